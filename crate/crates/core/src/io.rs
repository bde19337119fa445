//! Delimited-text helpers shared by the file loaders.
//!
//! Every table is UTF-8 CSV with a header row. Year-indexed parameters are
//! wide columns named `<prefix>_<YYYY>`. Empty cells mean "not given".

use crate::years::{Year, YearSeries};
use log::warn;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
}

impl IoError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// True when the file could not be read, as opposed to bad content.
    pub fn is_io(&self) -> bool {
        match self {
            IoError::Io { .. } => true,
            IoError::Csv { source, .. } => source.is_io_error(),
            _ => false,
        }
    }
}

/// One parsed CSV row with access by column name.
#[derive(Debug)]
pub struct Row<'a> {
    pub path: &'a Path,
    pub line: u64,
    headers: &'a [String],
    record: csv::StringRecord,
}

impl<'a> Row<'a> {
    pub fn err(&self, message: impl Into<String>) -> IoError {
        IoError::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            message: message.into(),
        }
    }

    /// Trimmed cell, `None` when the column is absent or the cell empty.
    pub fn get(&self, column: &str) -> Option<&str> {
        let idx = self.headers.iter().position(|h| h == column)?;
        let v = self.record.get(idx)?.trim();
        (!v.is_empty()).then_some(v)
    }

    pub fn required(&self, column: &str) -> Result<&str, IoError> {
        self.get(column)
            .ok_or_else(|| self.err(format!("missing value for `{column}`")))
    }

    pub fn f64_opt(&self, column: &str) -> Result<Option<f64>, IoError> {
        self.get(column)
            .map(|v| parse_f64(v).map_err(|_| self.err(format!("`{column}`: not a number: {v}"))))
            .transpose()
    }

    pub fn f64(&self, column: &str) -> Result<f64, IoError> {
        self.f64_opt(column)?
            .ok_or_else(|| self.err(format!("missing value for `{column}`")))
    }

    pub fn bool_opt(&self, column: &str) -> Result<Option<bool>, IoError> {
        self.get(column)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" | "y" => Ok(true),
                "false" | "0" | "no" | "n" => Ok(false),
                _ => Err(self.err(format!("`{column}`: not a boolean: {v}"))),
            })
            .transpose()
    }

    /// Collects the wide columns `<prefix>_<YYYY>` into a series.
    pub fn series(&self, prefix: &str) -> Result<YearSeries, IoError> {
        let mut series = YearSeries::new();
        for (idx, header) in self.headers.iter().enumerate() {
            let Some(year) = year_column(header, prefix) else {
                continue;
            };
            let Some(cell) = self.record.get(idx).map(str::trim).filter(|c| !c.is_empty()) else {
                continue;
            };
            let v = parse_f64(cell).map_err(|_| self.err(format!("`{header}`: not a number: {cell}")))?;
            series.set(year, v);
        }
        Ok(series)
    }
}

pub fn parse_f64(s: &str) -> Result<f64, std::num::ParseFloatError> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse(),
    }
}

fn year_column(header: &str, prefix: &str) -> Option<Year> {
    let rest = header.strip_prefix(prefix)?.strip_prefix('_')?;
    (rest.len() == 4).then(|| rest.parse().ok()).flatten()
}

/// Reads a CSV table. Columns outside `known` (or the year prefixes in
/// `year_prefixes`) are reported as warnings, not errors.
pub fn read_table(
    path: &Path,
    known: &[&str],
    year_prefixes: &[&str],
    mut each: impl FnMut(&Row<'_>) -> Result<(), IoError>,
) -> Result<Vec<String>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let known: BTreeSet<&str> = known.iter().copied().collect();
    let mut warnings = Vec::new();
    for h in &headers {
        let is_year = year_prefixes.iter().any(|p| year_column(h, p).is_some());
        if !known.contains(h.as_str()) && !is_year {
            warn!("{}: ignoring unknown column `{h}`", path.display());
            warnings.push(format!("{}: unknown column `{h}`", path.display()));
        }
    }
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let row = Row {
            path,
            line: i as u64 + 2,
            headers: &headers,
            record,
        };
        each(&row)?;
    }
    Ok(warnings)
}

/// Formats wide year columns for a set of series sharing one prefix.
pub fn year_headers<'a>(prefix: &str, series: impl IntoIterator<Item = &'a YearSeries>) -> Vec<(Year, String)> {
    let years: BTreeSet<Year> = series.into_iter().flat_map(|s| s.iter().map(|(y, _)| y)).collect();
    years.into_iter().map(|y| (y, format!("{prefix}_{y}"))).collect()
}

/// Reads a whole text file.
pub fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))
}

pub fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = read_to_string(path)?;
    toml::from_str(&text).map_err(|e| IoError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Sorted map helper for deterministic output.
pub type Sorted<K, V> = BTreeMap<K, V>;
