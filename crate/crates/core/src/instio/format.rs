use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::instio::ParseError;
use crate::model::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// `{"agents": n, "goods": m, "valuations": [[...], ...]}`
    Json,
    /// Header `agent,g1,...,gm`, then one `a<i>,v,...` row per agent.
    Csv,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }

    /// JSON if the first non-blank character opens an object, CSV otherwise.
    pub fn sniff(text: &str) -> Format {
        if text.trim_start().starts_with('{') {
            Format::Json
        } else {
            Format::Csv
        }
    }
}

pub fn parse_instance(text: &str, format: Option<Format>) -> Result<Instance, ParseError> {
    match format.unwrap_or_else(|| Format::sniff(text)) {
        Format::Json => parse_json(text),
        Format::Csv => parse_csv(text),
    }
}

pub fn write_instance(instance: &Instance, format: Format) -> String {
    match format {
        Format::Json => write_json(instance),
        Format::Csv => write_csv(instance),
    }
}

fn classify(value: &Value, row: usize, col: usize) -> Result<u64, ParseError> {
    match value {
        Value::Number(num) => {
            if let Some(v) = num.as_u64() {
                Ok(v)
            } else if num.as_i64().is_some_and(|v| v < 0) || num.as_f64().is_some_and(|v| v < 0.0) {
                Err(ParseError::NegativeValue { row, col })
            } else {
                Err(ParseError::NonInteger {
                    row,
                    col,
                    text: num.to_string(),
                })
            }
        }
        other => Err(ParseError::NonInteger {
            row,
            col,
            text: other.to_string(),
        }),
    }
}

fn parse_json(text: &str) -> Result<Instance, ParseError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let field = |name: &str| doc.get(name).ok_or_else(|| ParseError::MissingField(name.to_string()));
    let rows = field("valuations")?
        .as_array()
        .ok_or_else(|| ParseError::Shape("`valuations` must be an array of rows".into()))?;
    let mut matrix = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let cells = row
            .as_array()
            .ok_or_else(|| ParseError::Shape(format!("row {r} is not an array")))?;
        let values = cells
            .iter()
            .enumerate()
            .map(|(c, v)| classify(v, r, c))
            .collect::<Result<Vec<u64>, _>>()?;
        matrix.push(values);
    }
    check_ragged(&matrix)?;
    let count = |name: &str| -> Result<Option<usize>, ParseError> {
        match doc.get(name) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|x| Some(x as usize))
                .ok_or_else(|| ParseError::Shape(format!("`{name}` must be a non-negative integer"))),
        }
    };
    if let Some(n) = count("agents")? {
        if n != matrix.len() {
            return Err(ParseError::Shape(format!("`agents` is {n} but there are {} rows", matrix.len())));
        }
    }
    if let Some(m) = count("goods")? {
        let actual = matrix.first().map_or(0, Vec::len);
        if m != actual {
            return Err(ParseError::Shape(format!("`goods` is {m} but rows have {actual} entries")));
        }
    }
    Instance::new(matrix).map_err(|e| ParseError::Shape(e.to_string()))
}

fn check_ragged(matrix: &[Vec<u64>]) -> Result<(), ParseError> {
    if let Some(first) = matrix.first() {
        for (r, row) in matrix.iter().enumerate() {
            if row.len() != first.len() {
                return Err(ParseError::Ragged {
                    row: r,
                    expected: first.len(),
                    found: row.len(),
                });
            }
        }
    }
    Ok(())
}

fn parse_csv(text: &str) -> Result<Instance, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(h) => h.map_err(csv_error)?,
        None => return Err(ParseError::Shape("empty input".into())),
    };
    let labelled = header.get(0).is_some_and(|h| h.eq_ignore_ascii_case("agent"));
    let skip = usize::from(labelled);
    let expected = header.len() - skip;
    let mut matrix = Vec::new();
    for (r, record) in records.enumerate() {
        let record = record.map_err(csv_error)?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let cells: Vec<&str> = record.iter().skip(skip).collect();
        if cells.len() != expected {
            return Err(ParseError::Ragged {
                row: r,
                expected,
                found: cells.len(),
            });
        }
        let row = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| parse_cell(cell, r, c))
            .collect::<Result<Vec<u64>, _>>()?;
        matrix.push(row);
    }
    Instance::new(matrix).map_err(|e| ParseError::Shape(e.to_string()))
}

fn parse_cell(cell: &str, row: usize, col: usize) -> Result<u64, ParseError> {
    if let Ok(v) = cell.parse::<u64>() {
        return Ok(v);
    }
    if cell.starts_with('-') && cell[1..].parse::<f64>().is_ok() {
        return Err(ParseError::NegativeValue { row, col });
    }
    Err(ParseError::NonInteger {
        row,
        col,
        text: cell.to_string(),
    })
}

fn csv_error(e: csv::Error) -> ParseError {
    let (line, column) = e
        .position()
        .map_or((0, 0), |p| (p.line() as usize, p.byte() as usize));
    ParseError::Syntax {
        line,
        column,
        message: e.to_string(),
    }
}

#[derive(Serialize)]
struct JsonInstance<'a> {
    agents: usize,
    goods: usize,
    valuations: &'a [Vec<u64>],
}

fn write_json(instance: &Instance) -> String {
    let doc = JsonInstance {
        agents: instance.n_agents(),
        goods: instance.n_goods(),
        valuations: instance.valuations(),
    };
    let mut out = serde_json::to_string(&doc).expect("plain data serialises");
    out.push('\n');
    out
}

fn write_csv(instance: &Instance) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["agent".to_string()];
    header.extend((1..=instance.n_goods()).map(|j| format!("g{j}")));
    writer.write_record(&header).expect("in-memory write");
    for (i, row) in instance.valuations().iter().enumerate() {
        let mut rec = vec![format!("a{}", i + 1)];
        rec.extend(row.iter().map(u64::to_string));
        writer.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("flush")).expect("ascii")
}
