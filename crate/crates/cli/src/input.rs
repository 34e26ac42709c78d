use std::fs;
use std::path::Path;

use crate::config::{RunConfig, DEFAULT_N};
use crate::EvalError;

/// Parses one decimal value per line. Any other line, blank ones included,
/// is an error.
pub fn parse_values(text: &str, path: &Path) -> Result<Vec<f64>, EvalError> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let t = line.trim();
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(EvalError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    text: line.to_string(),
                }),
            }
        })
        .collect()
}

pub fn read_values(path: &Path) -> Result<Vec<f64>, EvalError> {
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_values(&text, path)
}

/// The stream a run operates on.
pub fn load_values(cfg: &RunConfig) -> Result<Vec<f64>, EvalError> {
    match (cfg.dataset(), &cfg.input) {
        (Some(ds), _) => {
            let n = cfg.n.unwrap_or(DEFAULT_N) as usize;
            Ok(ds.generate(n, cfg.seed)?)
        }
        (None, Some(path)) => {
            let mut values = read_values(path)?;
            if values.is_empty() {
                return Err(EvalError::Config(format!(
                    "{} holds no values",
                    path.display()
                )));
            }
            if let Some(n) = cfg.n {
                let n = n as usize;
                if n > values.len() {
                    return Err(EvalError::Config(format!(
                        "asked for {n} values but {} holds {}",
                        path.display(),
                        values.len()
                    )));
                }
                values.truncate(n);
            }
            Ok(values)
        }
        (None, None) => Err(EvalError::Config("file input needs --input".into())),
    }
}
