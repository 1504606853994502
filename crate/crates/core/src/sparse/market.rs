//! Matrix Market coordinate format (complex, general) import/export.

use std::fmt::Write as _;

use super::CsrMatrix;
use crate::error::{Error, Result};
use crate::C64;

pub fn to_matrix_market(a: &CsrMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate complex general\n");
    let _ = writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(out, "{} {} {:.16e} {:.16e}", i + 1, j + 1, v.re, v.im);
    }
    out
}

/// Reads `coordinate` matrices with `complex`, `real` or `integer` fields and
/// `general`, `symmetric` or `hermitian` symmetry.
pub fn from_matrix_market(text: &str) -> Result<CsrMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(Error::Parse { line: 1, msg: format!("unsupported header `{header}`") });
    }
    let complex = match tokens[3].as_str() {
        "complex" => true,
        "real" | "integer" => false,
        other => return Err(Error::Parse { line: 1, msg: format!("unsupported field `{other}`") }),
    };
    let symmetry = tokens[4].clone();
    if !matches!(symmetry.as_str(), "general" | "symmetric" | "hermitian") {
        return Err(Error::Parse { line: 1, msg: format!("unsupported symmetry `{symmetry}`") });
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (ln, line) in lines {
        let line_no = ln + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |msg: &str| Error::Parse { line: line_no, msg: msg.to_string() };
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err("expected `rows cols nnz`"));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|_| parse_err("bad size line"));
                size = Some((p(fields[0])?, p(fields[1])?, p(fields[2])?));
            }
            Some((nr, nc, _)) => {
                let want = if complex { 4 } else { 3 };
                if fields.len() != want {
                    return Err(parse_err("wrong number of fields in entry"));
                }
                let i: usize = fields[0].parse().map_err(|_| parse_err("bad row index"))?;
                let j: usize = fields[1].parse().map_err(|_| parse_err("bad column index"))?;
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(parse_err("index out of range"));
                }
                let re: f64 = fields[2].parse().map_err(|_| parse_err("bad value"))?;
                let im: f64 = if complex { fields[3].parse().map_err(|_| parse_err("bad value"))? } else { 0.0 };
                let v = C64::new(re, im);
                triplets.push((i - 1, j - 1, v));
                if i != j {
                    match symmetry.as_str() {
                        "symmetric" => triplets.push((j - 1, i - 1, v)),
                        "hermitian" => triplets.push((j - 1, i - 1, v.conj())),
                        _ => {}
                    }
                }
            }
        }
    }
    let (nr, nc, _) = size.ok_or(Error::Parse { line: 1, msg: "missing size line".into() })?;
    CsrMatrix::from_triplets(nr, nc, triplets)
}
