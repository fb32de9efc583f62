//! Reading observation files: comma- or whitespace-delimited, optional
//! header row, `#` comments.

use std::path::Path;

use ar1bayes::TimeSeries;

use crate::{CliError, CliResult};

fn fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

enum Column {
    Index(usize),
    Name(String),
    Last,
}

fn parse_column(spec: Option<&str>) -> CliResult<Column> {
    match spec {
        None => Ok(Column::Last),
        Some(s) => match s.parse::<usize>() {
            Ok(0) => Err(CliError::Usage("--column is 1-based".into())),
            Ok(i) => Ok(Column::Index(i - 1)),
            Err(_) => Ok(Column::Name(s.to_string())),
        },
    }
}

pub fn parse_series(text: &str, column: Option<&str>) -> CliResult<TimeSeries> {
    let mut column = parse_column(column)?;
    let mut values = Vec::new();
    let mut seen_data_line = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = fields(line);
        if !seen_data_line {
            seen_data_line = true;
            let all_numeric = row.iter().all(|f| f.parse::<f64>().is_ok());
            if !all_numeric {
                // Header row: resolve a named column against it.
                if let Column::Name(name) = &column {
                    let pos = row.iter().position(|f| f == name).ok_or_else(|| {
                        CliError::Data(format!("line {line_no}: no column named `{name}` in header"))
                    })?;
                    column = Column::Index(pos);
                }
                continue;
            }
        }
        let idx = match &column {
            Column::Index(i) => *i,
            Column::Last => row.len() - 1,
            Column::Name(name) => {
                return Err(CliError::Data(format!(
                    "column `{name}` requested but the file has no header row"
                )))
            }
        };
        let field = row
            .get(idx)
            .ok_or_else(|| CliError::Data(format!("line {line_no}: missing column {}", idx + 1)))?;
        let value: f64 = field
            .parse()
            .map_err(|_| CliError::Data(format!("line {line_no}: cannot parse `{field}` as a number")))?;
        if !value.is_finite() {
            return Err(CliError::Data(format!("line {line_no}: non-finite value `{field}`")));
        }
        values.push(value);
    }
    Ok(TimeSeries::new(values)?)
}

pub fn read_series(path: &Path, column: Option<&str>) -> CliResult<TimeSeries> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_series(&text, column).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}
