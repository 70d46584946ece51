//! Delimited-text conversion and typed CSV loading.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use csv::{QuoteStyle, ReaderBuilder, Terminator, WriterBuilder};

use crate::error::{Error, Result};
use crate::storage::table::{Table, TableBuilder};
use crate::value::{parse_date, parse_time, DataType, Field, Schema, Value};

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    WriterBuilder::new()
        .quote_style(QuoteStyle::Necessary)
        .terminator(Terminator::Any(b'\n'))
        .from_writer(out)
}

fn check_delimiter(delimiter: char) -> Result<()> {
    if matches!(delimiter, '"' | '\n' | '\r') {
        return Err(Error::InvalidRequest(format!("{delimiter:?} cannot be a field delimiter")));
    }
    Ok(())
}

/// Rewrites delimiter-separated text (no quoting in the source) as CSV.
/// Every line must carry the same number of fields as the first.
pub fn convert_delimited<R: Read, W: Write>(input: R, output: W, delimiter: char) -> Result<u64> {
    check_delimiter(delimiter)?;
    let mut writer = csv_writer(output);
    let mut expected = None;
    let mut lines = 0u64;
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        let line_no = i as u64 + 1;
        let fields: Vec<&str> = line.split(delimiter).collect();
        match expected {
            None => expected = Some(fields.len()),
            Some(n) if n != fields.len() => {
                return Err(Error::Csv {
                    line: line_no,
                    message: format!("expected {n} fields, found {}", fields.len()),
                })
            }
            _ => {}
        }
        writer
            .write_record(&fields)
            .map_err(|e| Error::Csv { line: line_no, message: e.to_string() })?;
        lines += 1;
    }
    writer.flush()?;
    Ok(lines)
}

/// Converts a delimited text file into a CSV file next to it and returns the
/// new path (`name.csv`, or `name.converted.csv` if that would overwrite the input).
pub fn convert_text_to_csv(input_path: &Path, delimiter: char) -> Result<PathBuf> {
    check_delimiter(delimiter)?;
    let input = File::open(input_path)?;
    let mut out_path = input_path.with_extension("csv");
    if out_path == input_path {
        out_path = input_path.with_extension("converted.csv");
    }
    let tmp = out_path.with_extension("csv.partial");
    let result = (|| {
        let mut out = BufWriter::new(File::create(&tmp)?);
        convert_delimited(input, &mut out, delimiter)?;
        out.flush()?;
        Ok::<_, Error>(())
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(e);
    }
    std::fs::rename(&tmp, &out_path)?;
    Ok(out_path)
}

/// Parses CSV text into a typed table. Empty fields become NULL.
pub fn read_table<R: Read>(input: R, name: &str, schema: Schema, has_header: bool) -> Result<Table> {
    let mut reader = ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut builder = TableBuilder::new(name, schema.clone())?;
    let mut record = csv::StringRecord::new();
    let mut first = true;
    let mut data_row = 0u64;
    loop {
        let more = reader.read_record(&mut record).map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != schema.len() {
            return Err(Error::Csv {
                line,
                message: format!("expected {} fields, found {}", schema.len(), record.len()),
            });
        }
        if first && has_header {
            first = false;
            for (got, want) in record.iter().zip(schema.names()) {
                if got.trim() != want {
                    return Err(Error::Csv {
                        line,
                        message: format!("header `{}` does not match schema column `{want}`", got.trim()),
                    });
                }
            }
            continue;
        }
        first = false;
        data_row += 1;
        let mut row = Vec::with_capacity(schema.len());
        for (raw, field) in record.iter().zip(schema.fields()) {
            let value = Value::parse_as(raw, field.data_type).map_err(|message| Error::CellParse {
                row: data_row,
                column: field.name.clone(),
                message,
            })?;
            row.push(value);
        }
        builder.push_row(row)?;
    }
    Ok(builder.finish())
}

pub fn write_table<W: Write>(table: &Table, output: W, header: bool) -> Result<()> {
    let mut writer = csv_writer(output);
    let to_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    if header {
        writer.write_record(table.schema().names()).map_err(to_err)?;
    }
    for row in table.rows() {
        writer.write_record(row.iter().map(Value::to_csv_field)).map_err(to_err)?;
    }
    writer.flush()?;
    Ok(())
}

/// Guesses a schema from CSV text: each column gets the narrowest of
/// INT, FLOAT, DATE, TIME that accepts every non-empty cell, else TEXT.
/// Names come from the header when present, otherwise `c1`, `c2`, ...
pub fn infer_schema<R: Read>(input: R, has_header: bool) -> Result<Schema> {
    let mut reader = ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut names: Option<Vec<String>> = None;
    let mut candidates: Vec<[bool; 4]> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        if i == 0 {
            candidates = vec![[true; 4]; record.len()];
            if has_header {
                names = Some(record.iter().map(|s| s.trim().to_string()).collect());
                continue;
            }
        }
        if record.len() != candidates.len() {
            return Err(Error::Csv {
                line: i as u64 + 1,
                message: format!("expected {} fields, found {}", candidates.len(), record.len()),
            });
        }
        for (cell, c) in record.iter().zip(candidates.iter_mut()) {
            let cell = cell.trim();
            if cell.is_empty() {
                continue;
            }
            c[0] &= cell.parse::<i64>().is_ok();
            c[1] &= cell.parse::<f64>().is_ok_and(|v| !v.is_nan());
            c[2] &= parse_date(cell).is_some();
            c[3] &= parse_time(cell).is_some();
        }
    }
    let names = names.unwrap_or_else(|| (1..=candidates.len()).map(|i| format!("c{i}")).collect());
    let fields = names
        .into_iter()
        .zip(candidates)
        .map(|(name, c)| {
            let ty = [DataType::Int, DataType::Float, DataType::Date, DataType::Time]
                .into_iter()
                .zip(c)
                .find_map(|(ty, ok)| ok.then_some(ty))
                .unwrap_or(DataType::Text);
            Field::new(name, ty)
        })
        .collect();
    Schema::new(fields)
}
