//! Plain-text matrix files.
//!
//! ```text
//! 2 2 bool
//! 10
//! 01
//! # optional label
//! ```

use std::fs;
use std::path::Path;

use super::comm::{CommMatrix, Convention};
use crate::error::{Error, Result};

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

pub fn parse_matrix(text: &str) -> Result<CommMatrix> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim_end_matches('\r')));
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, 1, "empty input"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(hl, 1, "header must be \"<rows> <cols> <bool|sign>\""));
    }
    let rows: usize = fields[0].parse().map_err(|_| parse_err(hl, 1, "bad row count"))?;
    let cols: usize = fields[1].parse().map_err(|_| parse_err(hl, 1, "bad column count"))?;
    let conv = match fields[2] {
        "bool" => Convention::Boolean01,
        "sign" => Convention::SignPM1,
        other => return Err(parse_err(hl, 1, format!("unknown convention \"{other}\""))),
    };
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension("matrix must be non-empty".into()));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    let mut label = None;
    let mut seen = 0;
    for (ln, line) in lines {
        if let Some(rest) = line.strip_prefix('#') {
            label = Some(rest.trim().to_string());
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if seen == rows {
            return Err(Error::Dimension(format!("line {ln}: more than {rows} rows")));
        }
        let chars: Vec<char> = line.trim().chars().collect();
        if chars.len() != cols {
            return Err(Error::Dimension(format!("line {ln}: expected {cols} entries, found {}", chars.len())));
        }
        for (c, ch) in chars.into_iter().enumerate() {
            let e = match (conv, ch) {
                (Convention::Boolean01, '0') => 0,
                (Convention::Boolean01, '1') => 1,
                (Convention::SignPM1, '+') => 1,
                (Convention::SignPM1, '-') => -1,
                _ => return Err(parse_err(ln, c + 1, format!("unexpected character '{ch}'"))),
            };
            entries.push(e);
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::Dimension(format!("expected {rows} rows, found {seen}")));
    }
    let m = CommMatrix::from_entries(rows, cols, &entries, conv)?;
    Ok(match label {
        Some(l) => m.with_label(l),
        None => m,
    })
}

pub fn format_matrix(m: &CommMatrix) -> String {
    let conv = match m.convention() {
        Convention::Boolean01 => "bool",
        Convention::SignPM1 => "sign",
    };
    let mut s = format!("{} {} {conv}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            s.push(match (m.convention(), m.bit(i, j)) {
                (Convention::Boolean01, true) => '1',
                (Convention::Boolean01, false) => '0',
                (Convention::SignPM1, true) => '+',
                (Convention::SignPM1, false) => '-',
            });
        }
        s.push('\n');
    }
    if let Some(l) = m.label() {
        s.push_str(&format!("# {l}\n"));
    }
    s
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<CommMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn save_matrix(m: &CommMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_matrix(m))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::generators::gen_equality;

    #[test]
    fn parses_bool_and_sign() {
        let m = parse_matrix("2 2 bool\n10\n01\n").unwrap();
        assert_eq!(m.to_bool(), gen_equality(1).unwrap().to_bool());
        let s = parse_matrix("2 2 sign\n+-\n-+\n").unwrap();
        assert_eq!(s.convention(), Convention::SignPM1);
        assert_eq!(s.get(0, 1), -1);
    }

    #[test]
    fn reports_position_of_bad_character() {
        match parse_matrix("2 2 bool\n10\n0x\n") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(parse_matrix("2 2 bool\n10\n"), Err(Error::Dimension(_))));
        assert!(matches!(parse_matrix("1 2 bool\n101\n"), Err(Error::Dimension(_))));
    }

    #[test]
    fn label_round_trip() {
        let m = gen_equality(2).unwrap();
        let back = parse_matrix(&format_matrix(&m)).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.label(), Some("eq(2)"));
    }
}
