//! Line-oriented `key = value` reports with optional tables.

use std::fmt::{self, Display, Write};

/// Stable float rendering: fixed nine decimals in `[1e-3, 1e6)`,
/// scientific otherwise.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_nan() || x.is_infinite() {
        x.to_string()
    } else if (1e-3..1e6).contains(&x.abs()) {
        format!("{x:.9}")
    } else {
        format!("{x:.6e}")
    }
}

pub fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    text: String,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kv(&mut self, key: &str, value: impl Display) -> &mut Self {
        let _ = writeln!(self.text, "{key} = {value}");
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.kv(key, fmt_f64(value))
    }

    pub fn nums(&mut self, key: &str, values: &[f64]) -> &mut Self {
        self.kv(key, fmt_list(values))
    }

    /// `[name]` header, a column line and one line per row.
    pub fn table(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> &mut Self {
        let _ = writeln!(self.text, "\n[{name}]");
        let _ = writeln!(self.text, "{}", columns.join(" "));
        for r in rows {
            let _ = writeln!(self.text, "{}", r.join(" "));
        }
        self
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}
