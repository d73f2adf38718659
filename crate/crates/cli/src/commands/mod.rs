pub mod curves;
pub mod entropy;
pub mod fock_check;
pub mod solve;
pub mod verify;

use std::fmt::Write;

use serde::Serialize;

use crate::{Format, Outcome};

pub(crate) fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub(crate) fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

/// Renders `rows` as CSV under `header`.
pub(crate) fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV");
    for r in rows {
        w.write_record(r).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
}

pub(crate) fn join(values: &[f64], precision: usize) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v:.precision$}").unwrap();
    }
    s
}

/// Picks the rendering for `format`; `text` and `csv` are built lazily.
pub(crate) fn render<T: Serialize>(
    format: Format,
    code: i32,
    report: &T,
    text: impl FnOnce() -> String,
    csv: impl FnOnce() -> String,
) -> Outcome {
    let stdout = match format {
        Format::Text => text(),
        Format::Json => json(report),
        Format::Csv => csv(),
    };
    Outcome { code, stdout }
}
