//! Text renderings of results. Every function here is pure, so identical
//! inputs give byte-identical output.

use num_complex::Complex64;
use qcc_core::weakvalue::WeakValueTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Fixed-point with six decimals, trailing zeros trimmed; `-0` prints as `0`.
pub fn real(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// `a+bi` with six displayed decimals.
pub fn complex(z: Complex64) -> String {
    let re = real(z.re);
    let im = real(z.im);
    match im.strip_prefix('-') {
        Some(mag) => format!("{re}-{mag}i"),
        None => format!("{re}+{im}i"),
    }
}

/// 17 significant digits, the CSV number format.
pub fn sig17(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Left-aligned columns separated by two spaces, no trailing whitespace.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut out = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            out.push_str(cell);
            if i + 1 < cells.len() {
                out.push_str(&" ".repeat(w - cell.chars().count() + 2));
            }
        }
        out.push('\n');
        out
    };
    let mut out = line(headers.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

/// Two-column `key  value` block without a header.
pub fn key_values(pairs: &[(&str, String)]) -> String {
    let width = pairs
        .iter()
        .map(|(k, _)| k.chars().count())
        .max()
        .unwrap_or(0);
    pairs
        .iter()
        .map(|(k, v)| format!("{k}{}  {v}\n", " ".repeat(width - k.chars().count())))
        .collect()
}

pub fn csv(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = headers.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(
            &row.iter()
                .map(|c| csv_field(c))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    out
}

pub fn weak_value_table(t: &WeakValueTable, format: Format) -> String {
    match format {
        Format::Table => {
            let rows: Vec<Vec<String>> = t
                .rows()
                .iter()
                .map(|r| vec![format!("({})_w", r.label), complex(r.value)])
                .collect();
            table(&["observable", "weak value"], &rows)
        }
        Format::Json => format!("{}\n", t.to_json()),
        Format::Csv => t.to_csv(),
    }
}

/// Folds `Π`/`σ` to `Pi`/`s` so labels can be typed on any keyboard.
pub fn ascii_label(label: &str) -> String {
    label.replace('Π', "Pi").replace('σ', "s")
}
