// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Plain-text matrix serialization.
//!
//! ```text
//! kerrnet-matrix v1
//! mode_dims 3 4
//! storage sparse
//! <row> <col> <re> <im>     one line per stored entry
//! ```
//! Dense storage lists `<re> <im>` for every entry in row-major order instead.
//! Floats use the shortest round-trip representation, so a write/read cycle is bit-exact.

use std::io::{BufRead, Write};

use num_complex::Complex64 as C64;

use super::{Operator, SpaceDescriptor};
use crate::error::{Error, Result};

const MAGIC: &str = "kerrnet-matrix v1";

/// Storage layout chosen when writing a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixStorage {
    Sparse,
    Dense,
}

/// Writes `op` in the text format above.
pub fn write_matrix<W: Write>(mut w: W, op: &Operator, storage: MatrixStorage) -> Result<()> {
    writeln!(w, "{MAGIC}")?;
    let dims: Vec<String> = op.space().mode_dims().iter().map(|d| d.to_string()).collect();
    writeln!(w, "mode_dims {}", dims.join(" "))?;
    match storage {
        MatrixStorage::Sparse => {
            writeln!(w, "storage sparse")?;
            for (r, c, v) in op.triplets() {
                writeln!(w, "{r} {c} {:?} {:?}", v.re, v.im)?;
            }
        }
        MatrixStorage::Dense => {
            writeln!(w, "storage dense")?;
            let n = op.dim();
            for r in 0..n {
                for c in 0..n {
                    let v = op.get(r, c);
                    writeln!(w, "{:?} {:?}", v.re, v.im)?;
                }
            }
        }
    }
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    tok.ok_or_else(|| parse_err(line, "missing value"))?
        .parse()
        .map_err(|e| parse_err(line, format!("{e}")))
}

/// Reads a matrix written by [`write_matrix`].
pub fn read_matrix<R: BufRead>(r: R) -> Result<Operator> {
    let mut lines = r.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, l)) => Ok((i + 1, l?)),
            None => Err(parse_err(0, format!("unexpected end of input, expected {what}"))),
        }
    };
    let (ln, magic) = next("header")?;
    if magic.trim() != MAGIC {
        return Err(parse_err(ln, format!("expected `{MAGIC}`")));
    }
    let (ln, dims) = next("mode_dims")?;
    let mut toks = dims.split_whitespace();
    if toks.next() != Some("mode_dims") {
        return Err(parse_err(ln, "expected `mode_dims`"));
    }
    let dims: Vec<usize> = toks
        .map(|t| t.parse().map_err(|e| parse_err(ln, format!("{e}"))))
        .collect::<Result<_>>()?;
    let space = SpaceDescriptor::new(dims)?;
    let n = space.total_dim();
    let (ln, storage) = next("storage")?;
    let storage = match storage.trim() {
        "storage sparse" => MatrixStorage::Sparse,
        "storage dense" => MatrixStorage::Dense,
        other => return Err(parse_err(ln, format!("unknown storage `{other}`"))),
    };
    let mut triplets = Vec::new();
    let mut count = 0usize;
    loop {
        let Ok((ln, l)) = next("entry") else { break };
        if l.trim().is_empty() {
            continue;
        }
        let mut t = l.split_whitespace();
        match storage {
            MatrixStorage::Sparse => {
                let r: usize = t.next().ok_or_else(|| parse_err(ln, "missing row"))?.parse()
                    .map_err(|e| parse_err(ln, format!("{e}")))?;
                let c: usize = t.next().ok_or_else(|| parse_err(ln, "missing col"))?.parse()
                    .map_err(|e| parse_err(ln, format!("{e}")))?;
                if r >= n || c >= n {
                    return Err(parse_err(ln, "index out of range"));
                }
                let re = parse_f64(t.next(), ln)?;
                let im = parse_f64(t.next(), ln)?;
                triplets.push((r, c, C64::new(re, im)));
            }
            MatrixStorage::Dense => {
                if count >= n * n {
                    return Err(parse_err(ln, "too many dense entries"));
                }
                let re = parse_f64(t.next(), ln)?;
                let im = parse_f64(t.next(), ln)?;
                triplets.push((count / n, count % n, C64::new(re, im)));
            }
        }
        count += 1;
    }
    if storage == MatrixStorage::Dense && count != n * n {
        return Err(parse_err(0, format!("expected {} dense entries, found {count}", n * n)));
    }
    Operator::from_triplets(space, triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, kerr_hamiltonian};

    #[test]
    fn round_trip_is_bit_exact() {
        let s = SpaceDescriptor::new(vec![3, 4]).unwrap();
        let a = annihilation(&s, 1).unwrap().scale(C64::new(0.1, 1.0 / 3.0));
        let op = a.add(&kerr_hamiltonian(&s, 0, 50.0, -50.0 / 60.0).unwrap()).unwrap();
        for storage in [MatrixStorage::Sparse, MatrixStorage::Dense] {
            let mut buf = Vec::new();
            write_matrix(&mut buf, &op, storage).unwrap();
            let back = read_matrix(buf.as_slice()).unwrap();
            assert_eq!(back, op);
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_matrix("nope\n".as_bytes()).is_err());
        let bad = "kerrnet-matrix v1\nmode_dims 2\nstorage sparse\n5 0 1 0\n";
        assert!(read_matrix(bad.as_bytes()).is_err());
        let short = "kerrnet-matrix v1\nmode_dims 2\nstorage dense\n1 0\n";
        assert!(read_matrix(short.as_bytes()).is_err());
    }
}
