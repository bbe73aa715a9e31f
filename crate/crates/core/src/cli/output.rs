//! CSV emission.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::{Error, Result};

/// Significant digits written for every float.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    Float(f64),
    Int(u64),
    Empty,
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}

impl From<Option<f64>> for Field {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Field::Empty, Field::Float)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as u64)
    }
}

impl Field {
    pub fn render(&self) -> String {
        match *self {
            Field::Float(x) => format_significant(x, SIGNIFICANT_DIGITS),
            Field::Int(i) => i.to_string(),
            Field::Empty => String::new(),
        }
    }
}

/// `%.{sig}g`-style formatting: fixed notation for exponents in
/// `[-5, sig)`, scientific otherwise, trailing zeros trimmed.
pub fn format_significant(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= sig as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes a header row and `records` as comma-separated UTF-8 with `\n`
/// line endings.
pub fn emit_csv(path: &Path, schema: &[&str], records: &[Vec<Field>]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(schema).map_err(csv_err)?;
    for record in records {
        if record.len() != schema.len() {
            return Err(Error::LengthMismatch {
                expected: schema.len(),
                actual: record.len(),
            });
        }
        w.write_record(record.iter().map(Field::render))
            .map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Writes `text` to `path`, attaching the path to any I/O error.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
