//! CSV tables with a leading `# config` comment line.

use std::hash::Hasher;
use std::io::{self, Write};
use std::path::Path;

use fnv::FnvHasher;

/// Significant digits of every number written.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style rendering: shortest of fixed or scientific, trailing
/// zeros removed.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIGNIFICANT_DIGITS as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// FNV-1a 64 hash of the resolved configuration line, as 16 hex digits.
pub fn config_hash(description: &str) -> String {
    let mut h = FnvHasher::default();
    h.write(description.as_bytes());
    format!("{:016x}", h.finish())
}

/// A CSV table whose rows all carry the hash of `config`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    config: String,
    hash: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(config: impl Into<String>, columns: &[&str]) -> Self {
        let config = config.into();
        let hash = config_hash(&config);
        let mut header: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
        header.push("config_hash".into());
        Self {
            config,
            hash,
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, mut row: Vec<String>) {
        assert_eq!(row.len() + 1, self.header.len(), "row width");
        row.push(self.hash.clone());
        self.rows.push(row);
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn config(&self) -> &str {
        &self.config
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# config {}", self.config)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        buf
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_number(-10.0), "-10");
        assert_eq!(format_number(123456.789), "123456.789");
        assert_eq!(format_number(1e-7), "1e-07");
        assert_eq!(format_number(1.5e15), "1.5e+15");
        assert_eq!(format_number(0.0001), "0.0001");
        assert_eq!(format_number(999999999999.5), "1e+12");
        assert_eq!(format_number(-0.0), "0");
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(config_hash(""), "cbf29ce484222325");
        assert_eq!(config_hash("a"), "af63dc4c8601ec8c");
    }

    #[test]
    fn layout() {
        let mut t = Table::new("seed=1", &["x", "y"]);
        t.push(vec!["1".into(), "a,b".into()]);
        let text = String::from_utf8(t.to_bytes()).unwrap();
        let hash = config_hash("seed=1");
        assert_eq!(text, format!("# config seed=1\nx,y,config_hash\n1,\"a,b\",{hash}\n"));
        assert!(!text.contains('\r'));
    }
}
