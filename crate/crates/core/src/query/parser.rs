//! Recursive-descent parser for the `SELECT ... FROM ... [WHERE ...]` subset:
//!
//! ```text
//! query      := SELECT projection FROM ident [WHERE predicate] [";"]
//! projection := TRANSFORM "(" ident {"," ident} ")" USING "'" modref "'" [AS ident {"," ident}]
//!             | "*" | ident {"," ident}
//! modref     := ident ["(" key "=" text {"," key "=" text} ")"]
//! predicate  := term {AND term}
//! term       := ident cmp literal | ident IN "(" literal {"," literal} ")"
//! cmp        := "=" | ">=" | "<="
//! literal    := "'" text "'" | number | date
//! ```
//!
//! Keywords are case-insensitive. Quoted strings shaped like `YYYY-MM-DD`
//! or `HH:MM:SS` become DATE / TIME literals, the same as bare dates.

use crate::error::ParseError;
use crate::query::ast::{CmpOp, ModuleRef, Params, Predicate, Projection, QueryAst};
use crate::value::{is_identifier, parse_date, parse_time, Value};

const KEYWORDS: &[&str] = &["SELECT", "TRANSFORM", "USING", "AS", "FROM", "WHERE", "AND", "IN"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Int(i64),
    Float(f64),
    Date(chrono::NaiveDate),
    Str(String),
    LParen,
    RParen,
    Comma,
    Star,
    Semi,
    Op(CmpOp),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Int(v) => format!("number {v}"),
            Tok::Float(v) => format!("number {v}"),
            Tok::Date(d) => format!("date {d}"),
            Tok::Str(s) => format!("string '{s}'"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Star => "`*`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Op(op) => format!("`{}`", op.as_str()),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn err(offset: usize, expected: &[&str], found: impl Into<String>) -> ParseError {
    ParseError {
        offset,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b',' => out.push((Tok::Comma, start)),
            b'*' => out.push((Tok::Star, start)),
            b';' => out.push((Tok::Semi, start)),
            b'=' => out.push((Tok::Op(CmpOp::Eq), start)),
            b'>' | b'<' => {
                if bytes.get(i + 1) != Some(&b'=') {
                    return Err(err(i + 1, &["`=`"], "unsupported comparison"));
                }
                out.push((Tok::Op(if c == b'>' { CmpOp::Ge } else { CmpOp::Le }), start));
                i += 1;
            }
            b'\'' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    let rest = &text[j..];
                    let Some(q) = rest.find('\'') else {
                        return Err(err(text.len(), &["closing `'`"], "end of input"));
                    };
                    s.push_str(&rest[..q]);
                    j += q + 1;
                    if bytes.get(j) == Some(&b'\'') {
                        s.push('\'');
                        j += 1;
                    } else {
                        break;
                    }
                }
                out.push((Tok::Str(s), start));
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_' || bytes[j] == b'-') {
                    j += 1;
                }
                out.push((Tok::Word(text[i..j].to_string()), start));
                i = j;
                continue;
            }
            c if c.is_ascii_digit() || (c == b'-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) => {
                let (tok, end) = lex_number(text, i)?;
                out.push((tok, start));
                i = end;
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap();
                return Err(err(i, &["token"], format!("unexpected character {ch:?}")));
            }
        }
        i += 1;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

fn lex_number(text: &str, start: usize) -> Result<(Tok, usize), ParseError> {
    let bytes = text.as_bytes();
    let digits_from = |mut j: usize| {
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    // Bare date: exactly YYYY-MM-DD.
    if start + 10 <= bytes.len() && bytes[start] != b'-' && bytes[start..start + 10].is_ascii() {
        let cand = &text[start..start + 10];
        let boundary = bytes.get(start + 10).is_none_or(|b| !b.is_ascii_alphanumeric() && *b != b'-');
        if cand.as_bytes()[4] == b'-' && cand.as_bytes()[7] == b'-' && boundary {
            if let Some(d) = parse_date(cand) {
                return Ok((Tok::Date(d), start + 10));
            }
            if digits_from(start) == start + 4 {
                return Err(err(start, &["date YYYY-MM-DD"], format!("invalid date `{cand}`")));
            }
        }
    }
    let mut j = start;
    if bytes[j] == b'-' {
        j += 1;
    }
    j = digits_from(j);
    let mut is_float = false;
    if bytes.get(j) == Some(&b'.') && bytes.get(j + 1).is_some_and(u8::is_ascii_digit) {
        is_float = true;
        j = digits_from(j + 1);
    }
    if matches!(bytes.get(j), Some(b'e' | b'E')) {
        let mut k = j + 1;
        if matches!(bytes.get(k), Some(b'+' | b'-')) {
            k += 1;
        }
        if bytes.get(k).is_some_and(u8::is_ascii_digit) {
            is_float = true;
            j = digits_from(k);
        }
    }
    if bytes.get(j).is_some_and(|b| b.is_ascii_alphabetic() || *b == b'_' || *b == b'-') {
        return Err(err(j, &["number"], format!("malformed number `{}`", &text[start..=j])));
    }
    let lexeme = &text[start..j];
    let tok = if is_float {
        Tok::Float(lexeme.parse().map_err(|_| err(start, &["number"], lexeme))?)
    } else {
        Tok::Int(lexeme.parse().map_err(|_| err(start, &["64-bit integer"], lexeme))?)
    };
    Ok((tok, j))
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(err(self.offset(), expected, self.peek().describe()))
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.at_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.fail(&[kw])
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, name: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.fail(&[name])
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Word(w) if !KEYWORDS.iter().any(|k| w.eq_ignore_ascii_case(k)) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn query(&mut self) -> Result<QueryAst, ParseError> {
        self.keyword("SELECT")?;
        let projection = self.projection()?;
        self.keyword("FROM")?;
        let source = self.ident()?;
        let predicate = if self.at_keyword("WHERE") {
            self.bump();
            Some(self.predicate()?)
        } else {
            None
        };
        self.eat(&Tok::Semi);
        if *self.peek() != Tok::Eof {
            let mut expected = vec!["end of input"];
            if predicate.is_some() {
                expected.insert(0, "AND");
            } else {
                expected.insert(0, "WHERE");
            }
            return self.fail(&expected);
        }
        Ok(QueryAst { projection, source, predicate })
    }

    fn projection(&mut self) -> Result<Projection, ParseError> {
        if self.eat(&Tok::Star) {
            return Ok(Projection::Star);
        }
        if !self.at_keyword("TRANSFORM") {
            if !matches!(self.peek(), Tok::Word(_)) {
                return self.fail(&["TRANSFORM", "`*`", "identifier"]);
            }
            return Ok(Projection::Columns(self.ident_list()?));
        }
        self.bump();
        self.expect(&Tok::LParen, "`(`")?;
        let inputs = self.ident_list()?;
        self.expect(&Tok::RParen, "`)`")?;
        self.keyword("USING")?;
        let (module, at) = match self.bump() {
            (Tok::Str(s), at) => (s, at),
            (tok, at) => return Err(err(at, &["quoted module name"], tok.describe())),
        };
        // Offsets inside the module reference are relative to just past the quote.
        let module = parse_modref(&module).map_err(|mut e| {
            e.offset += at + 1;
            e
        })?;
        let output_names = if self.at_keyword("AS") {
            self.bump();
            let names = self.ident_list()?;
            for (i, n) in names.iter().enumerate() {
                if names[..i].contains(n) {
                    return Err(err(self.offset(), &["unique output name"], format!("duplicate `{n}`")));
                }
            }
            Some(names)
        } else {
            None
        };
        Ok(Projection::Transform { inputs, module, output_names })
    }

    fn predicate(&mut self) -> Result<Predicate, ParseError> {
        let mut terms = vec![self.term()?];
        while self.at_keyword("AND") {
            self.bump();
            terms.push(self.term()?);
        }
        Ok(Predicate::all(terms).expect("at least one term"))
    }

    fn term(&mut self) -> Result<Predicate, ParseError> {
        let column = self.ident()?;
        if let Tok::Op(op) = *self.peek() {
            self.bump();
            let value = self.literal()?;
            return Ok(Predicate::Compare { column, op, value });
        }
        if self.at_keyword("IN") {
            self.bump();
            self.expect(&Tok::LParen, "`(`")?;
            let mut values = vec![self.literal()?];
            while self.eat(&Tok::Comma) {
                values.push(self.literal()?);
            }
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(Predicate::In { column, values });
        }
        self.fail(&["`=`", "`>=`", "`<=`", "IN"])
    }

    fn literal(&mut self) -> Result<Value, ParseError> {
        let v = match self.peek() {
            Tok::Int(v) => Value::Int(*v),
            Tok::Float(v) => Value::Float(*v),
            Tok::Date(d) => Value::Date(*d),
            Tok::Str(s) => {
                if let Some(d) = parse_date(s) {
                    Value::Date(d)
                } else if let Some(t) = parse_time(s) {
                    Value::Time(t)
                } else {
                    Value::Text(s.clone())
                }
            }
            _ => return self.fail(&["string", "number", "date"]),
        };
        self.bump();
        Ok(v)
    }
}

/// Parses `name` or `name(key=value, ...)` from inside a USING string.
pub fn parse_modref(text: &str) -> Result<ModuleRef, ParseError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].1.is_whitespace() {
            *i += 1;
        }
    };
    let offset_at = |i: usize| chars.get(i).map_or(text.len(), |c| c.0);
    let found_at = |i: usize| chars.get(i).map_or("end of module reference".to_string(), |c| format!("{:?}", c.1));
    let word = |i: &mut usize| {
        let start = *i;
        while *i < chars.len() && (chars[*i].1.is_ascii_alphanumeric() || matches!(chars[*i].1, '_' | '-')) {
            *i += 1;
        }
        text[offset_at(start)..offset_at(*i)].to_string()
    };

    skip_ws(&mut i);
    let name_at = i;
    let name = word(&mut i);
    if !is_identifier(&name) {
        return Err(err(offset_at(name_at), &["module name"], found_at(name_at)));
    }
    skip_ws(&mut i);
    let mut params = Params::new();
    if i < chars.len() && chars[i].1 == '(' {
        i += 1;
        skip_ws(&mut i);
        if i < chars.len() && chars[i].1 == ')' {
            i += 1;
        } else {
            loop {
                skip_ws(&mut i);
                let key_at = i;
                let key = word(&mut i);
                if !is_identifier(&key) {
                    return Err(err(offset_at(key_at), &["parameter name"], found_at(key_at)));
                }
                skip_ws(&mut i);
                if i >= chars.len() || chars[i].1 != '=' {
                    return Err(err(offset_at(i), &["`=`"], found_at(i)));
                }
                i += 1;
                // Value runs to the next unescaped `,` or `)`; unescaped edge whitespace is trimmed.
                let mut value: Vec<(char, bool)> = Vec::new();
                while i < chars.len() && !matches!(chars[i].1, ',' | ')') {
                    if chars[i].1 == '\\' && i + 1 < chars.len() {
                        value.push((chars[i + 1].1, true));
                        i += 2;
                    } else {
                        value.push((chars[i].1, false));
                        i += 1;
                    }
                }
                let lo = value.iter().position(|&(c, esc)| esc || !c.is_whitespace()).unwrap_or(value.len());
                let hi = value.iter().rposition(|&(c, esc)| esc || !c.is_whitespace()).map_or(lo, |p| p + 1);
                let value: String = value[lo..hi.max(lo)].iter().map(|&(c, _)| c).collect();
                if params.insert(key.clone(), value).is_some() {
                    return Err(err(offset_at(key_at), &["distinct parameter names"], format!("duplicate `{key}`")));
                }
                match chars.get(i).map(|c| c.1) {
                    Some(',') => i += 1,
                    Some(')') => {
                        i += 1;
                        break;
                    }
                    _ => return Err(err(offset_at(i), &["`,`", "`)`"], found_at(i))),
                }
            }
        }
        skip_ws(&mut i);
    }
    if i < chars.len() {
        return Err(err(offset_at(i), &["`(`", "end of module reference"], found_at(i)));
    }
    Ok(ModuleRef { name, params })
}

/// Parses query text into an AST.
pub fn parse(text: &str) -> Result<QueryAst, ParseError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.query()
}
