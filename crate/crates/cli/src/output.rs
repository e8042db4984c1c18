//! Output plumbing: lossless float formatting for CSV bodies, file/stdout
//! writers, and the λ-grid flag parser.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::errors::{CliError, CliResult};

/// 17 significant digits: enough for a lossless f64 round trip in CSV.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Parse `start:stop:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!(
            "lambda grid `{spec}` is not of the form start:stop:step"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("`{p}` in grid `{spec}` is not a number")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !step.is_finite() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start
    {
        return Err(CliError::Config(format!(
            "grid `{spec}` needs finite start <= stop and step > 0"
        )));
    }
    let mut grid = Vec::new();
    let mut i = 0u64;
    loop {
        let value = start + step * i as f64;
        if value > stop + step * 1e-9 {
            break;
        }
        grid.push(value);
        i += 1;
    }
    Ok(grid)
}

pub fn read_to_string(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Parse a numeric CSV with a fixed column count; a non-numeric first line
/// is treated as a header and skipped.
pub fn read_numeric_csv(path: &Path, columns: usize) -> CliResult<Vec<Vec<f64>>> {
    let text = read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) if values.len() == columns => rows.push(values),
            Ok(values) => {
                return Err(CliError::Config(format!(
                    "{}: line {}: expected {columns} columns, found {}",
                    path.display(),
                    lineno + 1,
                    values.len()
                )))
            }
            Err(_) if lineno == 0 => continue, // header
            Err(_) => {
                return Err(CliError::Config(format!(
                    "{}: line {}: `{trimmed}` is not numeric",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(rows)
}

pub fn write_file(path: &Path, body: &str) -> CliResult<()> {
    std::fs::write(path, body)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Print a serializable value as pretty JSON on stdout.
pub fn emit_json<T: serde::Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serialization: {e}")))?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{text}").map_err(|e| CliError::Config(format!("stdout: {e}")))
}

pub fn emit_text(text: &str) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    write!(stdout, "{text}").map_err(|e| CliError::Config(format!("stdout: {e}")))
}

/// Where side files land: `--out BASE` produces `BASE.csv` and `BASE.json`.
pub fn side_paths(out: &Path) -> (PathBuf, PathBuf) {
    let mut csv = out.as_os_str().to_owned();
    csv.push(".csv");
    let mut json = out.as_os_str().to_owned();
    json.push(".json");
    (PathBuf::from(csv), PathBuf::from(json))
}
