//! CSV tables with `#`-prefixed provenance lines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::params::Params;
use crate::error::{Error, Result};

/// Shortest representation that round-trips to the same `f64`, switching to
/// exponent notation for very small or very large magnitudes.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// Plain in-memory table: named columns, string cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Render with the provenance block for `mode` and its resolved parameters.
    pub fn render(&self, mode: &str, params: &Params) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        write_provenance(&mut out, mode, params)?;
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        drop(w);
        Ok(out)
    }

    /// Write to `path`, or to standard output when `path` is `None`.
    pub fn write(&self, path: Option<&Path>, mode: &str, params: &Params) -> Result<()> {
        emit(path, &self.render(mode, params)?)
    }
}

pub(crate) const PROVENANCE_PREFIX: &str = "# aloha-entropy ";

pub(crate) fn write_provenance(
    out: &mut impl Write,
    mode: &str,
    params: &Params,
) -> io::Result<()> {
    writeln!(
        out,
        "{PROVENANCE_PREFIX}{} {mode}",
        env!("CARGO_PKG_VERSION")
    )?;
    writeln!(out, "# resolved configuration:")?;
    for line in params.to_toml().lines() {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

pub(crate) fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
            }
            let file = File::create(p)
                .map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            w.write_all(bytes)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(bytes)?;
            lock.flush()?;
        }
    }
    Ok(())
}

/// Recover the resolved configuration from a file written by [`Table::write`].
pub fn read_provenance(text: &str) -> Result<Params> {
    let body: String = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .skip(2)
        .map(|l| format!("{}\n", l.strip_prefix("# ").unwrap_or("")))
        .collect();
    Params::from_toml(&body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::params::Count;

    #[test]
    fn floats_round_trip() {
        for x in [0.0, 0.5, 1.0 / 3.0, 2.5e-49, 0.8923781, 1e20, -0.25, 1e-4] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(0.02), "0.02");
        assert_eq!(format_float(3e-7), "3e-7");
        assert_eq!(format_opt(None), "");
    }

    #[test]
    fn rendered_table_carries_config() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1".into(), format_float(0.5)]);
        let params = Params {
            m: Some(Count(3)),
            alpha: Some(0.25),
            ..Default::default()
        };
        let text = String::from_utf8(t.render("analyze", &params).unwrap()).unwrap();
        assert!(text.starts_with("# aloha-entropy"));
        assert!(text.ends_with("a,b\n1,0.5\n"));
        assert_eq!(read_provenance(&text).unwrap(), params);
    }
}
