//! Run reports.
//!
//! Machine mode prints one `key=value` pair per line between a
//! `ctz-report 1` header line and an `end` line. Keys are ASCII without
//! spaces; values run to the end of the line. Repeated records use indexed
//! keys such as `block.3.bits`.

use std::fmt::{self, Display, Write as _};

#[derive(Clone, Debug, Default)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Report::default();
        r.put("command", command);
        r
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    /// Floats with 6 decimals.
    pub fn put_f(&mut self, key: impl Into<String>, value: f64) {
        self.put(key, format!("{value:.6}"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self, machine: bool) -> String {
        let mut out = String::new();
        if machine {
            out.push_str("ctz-report 1\n");
            for (k, v) in &self.entries {
                let _ = writeln!(out, "{k}={v}");
            }
            out.push_str("end\n");
        } else {
            let w = self.entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in &self.entries {
                let _ = writeln!(out, "{k:<w$}  {v}");
            }
        }
        out
    }

    /// Parses the machine form back.
    pub fn parse(text: &str) -> Option<Report> {
        let mut lines = text.lines();
        if lines.next()? != "ctz-report 1" {
            return None;
        }
        let mut entries = Vec::new();
        for line in lines {
            if line == "end" {
                return Some(Report { entries });
            }
            let (k, v) = line.split_once('=')?;
            entries.push((k.to_string(), v.to_string()));
        }
        None
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_round_trip() {
        let mut r = Report::new("stats");
        r.put("a.b", 3);
        r.put_f("h", 0.5);
        r.put("note", "x = y");
        let back = Report::parse(&r.render(true)).unwrap();
        assert_eq!(back.get("h"), Some("0.500000"));
        assert_eq!(back.get("note"), Some("x = y"));
        assert_eq!(back.get("command"), Some("stats"));
    }
}
