//! Matrix Market reading and writing for dense complex matrices.
//!
//! Supports `coordinate` and `array` layouts, `real`, `integer` and
//! `complex` fields, and `general`, `symmetric`, `skew-symmetric` and
//! `hermitian` symmetry. Vectors are read as `n x 1` matrices.

use std::fs;
use std::path::Path;

use crate::operator::{CMat, CVec, C64};
use crate::{Result, ZenoError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
    Hermitian,
}

fn err(line: usize, msg: impl Into<String>) -> ZenoError {
    ZenoError::MatrixMarket { line, msg: msg.into() }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CMat> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

pub fn read_vector_market(path: impl AsRef<Path>) -> Result<CVec> {
    let m = read_matrix_market(path)?;
    if m.ncols() != 1 {
        return Err(err(0, format!("expected a single column, found {}", m.ncols())));
    }
    Ok(m.column(0).into_owned())
}

pub fn parse_matrix_market(text: &str) -> Result<CMat> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(err(1, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(err(1, format!("unsupported layout '{other}'"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(err(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(err(1, format!("unsupported symmetry '{other}'"))),
    };
    if symmetry == Symmetry::Hermitian && field == Field::Real {
        return Err(err(1, "hermitian symmetry requires a complex field"));
    }

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(size_line, format!("bad size entry '{t}'"))))
        .collect::<Result<_>>()?;
    let (rows, cols) = match (layout, dims.as_slice()) {
        (Layout::Coordinate, [r, c, _]) | (Layout::Array, [r, c]) => (*r, *c),
        _ => return Err(err(size_line, "wrong number of size entries")),
    };
    if symmetry != Symmetry::General && rows != cols {
        return Err(err(size_line, "symmetric storage needs a square matrix"));
    }
    let nnz = if layout == Layout::Coordinate { dims[2] } else { 0 };

    let mut m = CMat::zeros(rows, cols);
    let mut count = 0usize;
    let parse_value = |line: usize, toks: &[&str]| -> Result<C64> {
        let num = |t: &str| t.parse::<f64>().map_err(|_| err(line, format!("bad number '{t}'")));
        match (field, toks) {
            (Field::Real, [re]) => Ok(C64::new(num(re)?, 0.0)),
            (Field::Complex, [re, im]) => Ok(C64::new(num(re)?, num(im)?)),
            _ => Err(err(line, "wrong number of value fields")),
        }
    };
    let mut place = |line: usize, i: usize, j: usize, v: C64| -> Result<()> {
        if i >= rows || j >= cols {
            return Err(err(line, format!("index ({}, {}) out of range", i + 1, j + 1)));
        }
        m[(i, j)] = v;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => m[(j, i)] = v,
                Symmetry::Skew => m[(j, i)] = -v,
                Symmetry::Hermitian => m[(j, i)] = v.conj(),
            }
        } else if symmetry == Symmetry::Skew && v != C64::new(0.0, 0.0) {
            return Err(err(line, "skew-symmetric matrix with nonzero diagonal"));
        }
        Ok(())
    };

    match layout {
        Layout::Coordinate => {
            for (line, text) in body {
                let toks: Vec<&str> = text.split_whitespace().collect();
                if toks.len() < 3 {
                    return Err(err(line, "expected 'row col value'"));
                }
                let idx = |t: &str| -> Result<usize> {
                    let k: usize = t.parse().map_err(|_| err(line, format!("bad index '{t}'")))?;
                    k.checked_sub(1).ok_or_else(|| err(line, "indices are 1-based"))
                };
                let (i, j) = (idx(toks[0])?, idx(toks[1])?);
                if symmetry != Symmetry::General && j > i {
                    return Err(err(line, "symmetric storage lists the lower triangle only"));
                }
                place(line, i, j, parse_value(line, &toks[2..])?)?;
                count += 1;
            }
            if count != nnz {
                return Err(err(0, format!("declared {nnz} entries, found {count}")));
            }
        }
        Layout::Array => {
            // Column-major; symmetric variants store the lower triangle.
            let mut slots = Vec::new();
            for j in 0..cols {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::Skew => j + 1,
                    _ => j,
                };
                for i in start..rows {
                    slots.push((i, j));
                }
            }
            for (line, text) in body {
                let toks: Vec<&str> = text.split_whitespace().collect();
                let &(i, j) = slots.get(count).ok_or_else(|| err(line, "too many entries"))?;
                place(line, i, j, parse_value(line, &toks)?)?;
                count += 1;
            }
            if count != slots.len() {
                return Err(err(0, format!("expected {} entries, found {count}", slots.len())));
            }
        }
    }
    Ok(m)
}

/// Writes a general complex coordinate file listing every nonzero entry.
pub fn format_matrix_market(m: &CMat) -> String {
    let entries: Vec<(usize, usize, C64)> = (0..m.ncols())
        .flat_map(|j| (0..m.nrows()).map(move |i| (i, j)))
        .filter(|&(i, j)| m[(i, j)] != C64::new(0.0, 0.0)).map(|(i, j)| (i, j, m[(i, j)]))
        .collect();
    let mut out = format!("%%MatrixMarket matrix coordinate complex general\n{} {} {}\n", m.nrows(), m.ncols(), entries.len());
    for (i, j, v) in entries {
        out.push_str(&format!("{} {} {:e} {:e}\n", i + 1, j + 1, v.re, v.im));
    }
    out
}

pub fn write_matrix_market(path: impl AsRef<Path>, m: &CMat) -> Result<()> {
    fs::write(path, format_matrix_market(m))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_real_symmetric_coordinate() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 4\n1 1 2.0\n2 1 -1\n3 3 5e-1\n2 2 1\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m[(0, 1)], C64::new(-1.0, 0.0));
        assert_eq!(m[(1, 0)], C64::new(-1.0, 0.0));
        assert_eq!(m[(2, 2)], C64::new(0.5, 0.0));
        assert_eq!(m[(0, 2)], C64::new(0.0, 0.0));
    }

    #[test]
    fn reads_complex_hermitian_coordinate() {
        let text = "%%MatrixMarket matrix coordinate complex hermitian\n2 2 3\n1 1 1 0\n2 1 0.5 -2\n2 2 3 0\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m[(1, 0)], C64::new(0.5, -2.0));
        assert_eq!(m[(0, 1)], C64::new(0.5, 2.0));
    }

    #[test]
    fn reads_array_layouts() {
        let general = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n";
        let m = parse_matrix_market(general).unwrap();
        assert_eq!(m[(1, 0)], C64::new(2.0, 0.0));
        assert_eq!(m[(0, 1)], C64::new(3.0, 0.0));
        let skew = "%%MatrixMarket matrix array real skew-symmetric\n3 3\n1\n2\n3\n";
        let s = parse_matrix_market(skew).unwrap();
        assert_eq!(s[(0, 1)], C64::new(-1.0, 0.0));
        assert_eq!(s[(2, 1)], C64::new(3.0, 0.0));
        let vec = "%%MatrixMarket matrix array complex general\n2 1\n1 0\n0 1\n";
        assert_eq!(parse_matrix_market(vec).unwrap()[(1, 0)], C64::new(0.0, 1.0));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in [
            "",
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1\n",
            "%%MatrixMarket matrix coordinate real hermitian\n2 2 1\n1 1 1\n",
            "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n",
            "%%MatrixMarket matrix array complex general\n1 1\n1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n",
        ] {
            assert!(matches!(parse_matrix_market(bad), Err(ZenoError::MatrixMarket { .. })), "{bad:?}");
        }
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.mtx");
        let mut m = CMat::zeros(3, 2);
        m[(0, 0)] = C64::new(0.1, -3.0);
        m[(2, 1)] = C64::new(1e-300, 7.0);
        write_matrix_market(&p, &m).unwrap();
        assert_eq!(read_matrix_market(&p).unwrap(), m);
        assert!(read_vector_market(&p).is_err());
    }

    proptest! {
        #[test]
        fn formatted_matrices_parse_back(vals in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 12)) {
            let m = CMat::from_iterator(3, 4, vals.iter().map(|&(a, b)| C64::new(a, b)));
            prop_assert_eq!(parse_matrix_market(&format_matrix_market(&m)).unwrap(), m);
        }
    }
}
