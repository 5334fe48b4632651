use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use crate::config::RunConfig;

/// Pretty JSON with every float written as `{:.16e}`, i.e. 17 significant
/// digits, so files are byte-stable and round-trip exactly.
struct FixedDigits<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", fmt_f64(value))
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        end_object_key(),
        begin_object_value(),
        end_object_value(),
    );
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser).expect("in-memory JSON");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// A CSV table; floats are formatted by the caller with [`fmt_f64`].
pub struct Table {
    pub name: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Output of one task: a JSON result, CSV tables and a human summary.
pub struct Report {
    pub result: Value,
    pub tables: Vec<Table>,
    pub summary: String,
}

pub fn provenance(cfg: &RunConfig) -> Value {
    json!({
        "tool": "bbnf",
        "version": env!("CARGO_PKG_VERSION"),
        "task": cfg.task.name(),
        "config": cfg,
    })
}

/// Writes `<task>.json`, the CSV tables and the resolved `config.toml` into
/// the output directory.
pub fn write(cfg: &RunConfig, report: &Report) -> io::Result<()> {
    let dir = &cfg.out;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
    let doc = json!({ "provenance": provenance(cfg), "result": report.result });
    std::fs::write(dir.join(format!("{}.json", cfg.task.name())), to_json_string(&doc))?;
    for t in &report.tables {
        write_csv(&dir.join(format!("{}.csv", t.name)), t)?;
    }
    Ok(())
}

fn write_csv(path: &Path, t: &Table) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&t.header)?;
    for r in &t.rows {
        w.write_record(r)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        let s = to_json_string(&json!({ "x": 0.1, "y": [1.0, -2.5e-300], "n": 3 }));
        assert!(s.contains("\"x\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("-2.5000000000000000e-300"), "{s}");
        assert!(s.contains("\"n\": 3"), "{s}");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }
}
