//! Reading one numeric column from delimited text.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::str::FromStr;

use kdekit::Sample64;

use crate::CliError;

/// A column picked by 1-based position or by header name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl FromStr for Column {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.parse::<usize>() {
            Ok(0) => Err("column positions start at 1".into()),
            Ok(i) => Ok(Column::Index(i)),
            Err(_) if s.trim().is_empty() => Err("empty column name".into()),
            Err(_) => Ok(Column::Name(s.trim().to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Delimiter {
    Char(u8),
    /// Any run of spaces and tabs.
    Whitespace,
}

impl FromStr for Delimiter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "whitespace" | "ws" => Ok(Delimiter::Whitespace),
            "tab" | "\\t" | "\t" => Ok(Delimiter::Char(b'\t')),
            _ if s.len() == 1 && s.is_ascii() => Ok(Delimiter::Char(s.as_bytes()[0])),
            _ => Err(format!("delimiter must be one ASCII character, 'tab' or 'whitespace', got '{s}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataSource {
    /// `None` reads standard input.
    pub path: Option<PathBuf>,
    pub column: Column,
    pub delimiter: Delimiter,
    pub skip_header: bool,
    /// Number of largest values to drop after parsing.
    pub exclude_top: usize,
}

impl Default for DataSource {
    fn default() -> Self {
        Self {
            path: None,
            column: Column::Index(1),
            delimiter: Delimiter::Char(b','),
            skip_header: false,
            exclude_top: 0,
        }
    }
}

/// A row that was skipped, with its 1-based line number.
#[derive(Clone, Debug, PartialEq)]
pub struct RowWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Ingested {
    pub sample: Sample64,
    pub warnings: Vec<RowWarning>,
}

pub fn ingest(source: &DataSource, stdin: &mut dyn Read) -> Result<Ingested, CliError> {
    let text = match &source.path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::Io {
            path: p.display().to_string(),
            source: e,
        })?,
        None => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|e| CliError::Io {
                path: "standard input".into(),
                source: e,
            })?;
            s
        }
    };
    parse_text(&text, source)
}

fn records(text: &str, delimiter: Delimiter) -> Result<Vec<(usize, Vec<String>)>, CliError> {
    match delimiter {
        Delimiter::Whitespace => Ok(text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| (i + 1, l.split_whitespace().map(String::from).collect()))
            .collect()),
        Delimiter::Char(d) => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .trim(csv::Trim::All)
                .delimiter(d)
                .from_reader(text.as_bytes());
            // the reader's line counter ignores blank lines, and a record's
            // byte offset can point at blank lines before it
            let bytes = text.as_bytes();
            let line_of = |pos: Option<&csv::Position>| {
                pos.map_or(0, |p| {
                    let mut start = p.byte() as usize;
                    while start < bytes.len() && matches!(bytes[start], b'\n' | b'\r') {
                        start += 1;
                    }
                    bytes[..start].iter().filter(|&&b| b == b'\n').count() + 1
                })
            };
            let mut out = Vec::new();
            for rec in reader.records() {
                let rec = rec.map_err(|e| CliError::Parse {
                    line: line_of(e.position()),
                    message: e.to_string(),
                })?;
                let line = line_of(rec.position());
                if rec.iter().all(str::is_empty) {
                    continue;
                }
                out.push((line, rec.iter().map(String::from).collect()));
            }
            Ok(out)
        }
    }
}

/// Parses `text` as described by `source` (its `path` is ignored).
pub fn parse_text(text: &str, source: &DataSource) -> Result<Ingested, CliError> {
    let rows = records(text, source.delimiter)?;
    let mut rows = rows.into_iter();
    let header = if source.skip_header || matches!(source.column, Column::Name(_)) {
        rows.next()
    } else {
        None
    };
    let index = match &source.column {
        Column::Index(i) => i - 1,
        Column::Name(name) => {
            let (_, fields) = header.as_ref().ok_or_else(|| {
                CliError::Ingestion(format!("column '{name}' requested but the input is empty"))
            })?;
            fields.iter().position(|f| f == name).ok_or_else(|| {
                CliError::Ingestion(format!("column '{name}' not found in header {fields:?}"))
            })?
        }
    };

    let mut values = Vec::new();
    let mut warnings = Vec::new();
    for (line, fields) in rows {
        let Some(field) = fields.get(index) else {
            warnings.push(RowWarning {
                line,
                message: format!("row has {} field(s), column {} is missing", fields.len(), index + 1),
            });
            continue;
        };
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => {
                return Err(CliError::Parse { line, message: format!("value {v} is not finite") });
            }
            Err(_) => warnings.push(RowWarning {
                line,
                message: format!("cannot parse '{field}' as a number"),
            }),
        }
    }

    if values.is_empty() {
        return Err(CliError::Ingestion(format!(
            "no numeric values in column {} ({} row(s) skipped)",
            index + 1,
            warnings.len()
        )));
    }
    if source.exclude_top >= values.len() {
        return Err(CliError::Ingestion(format!(
            "excluding the top {} of {} value(s) leaves nothing",
            source.exclude_top,
            values.len()
        )));
    }
    let mut sample = Sample64::new(values)?.into_values();
    sample.truncate(sample.len() - source.exclude_top);
    Ok(Ingested { sample: Sample64::new(sample)?, warnings })
}
