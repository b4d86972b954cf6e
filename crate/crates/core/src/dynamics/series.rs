// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::QuantumState;
use crate::slh::{Drives, ParametricOperator, SlhTriple};

/// Named, possibly drive-dependent, operator whose mean is recorded.
#[derive(Clone, Debug)]
pub struct Observable {
    pub name: String,
    pub op: ParametricOperator,
}

impl Observable {
    pub fn new(name: impl Into<String>, op: ParametricOperator) -> Self {
        Self { name: name.into(), op }
    }
}

/// Time series of expectation values.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectationSeries {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `mean[o][t]`.
    pub mean: Vec<Vec<C64>>,
    /// Standard error of the complex ensemble mean, `sqrt(sum |x - m|^2 / (M (M - 1)))`;
    /// zero for deterministic evolutions.
    pub stderr: Vec<Vec<f64>>,
    /// Number of trajectories averaged (1 for a master-equation run).
    pub samples: usize,
}

impl ExpectationSeries {
    /// Index of the observable called `name`.
    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no observable `{name}`")))
    }

    /// Mean of observable `name` over all times.
    pub fn series(&self, name: &str) -> Result<&[C64]> {
        Ok(&self.mean[self.index(name)?])
    }

    /// Writes `time` then `re, im, abs, stderr` columns for every observable.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = vec!["time".to_string()];
        for n in &self.names {
            for suffix in ["re", "im", "abs", "stderr"] {
                header.push(format!("{n}_{suffix}"));
            }
        }
        writeln!(w, "{}", header.join(","))?;
        for (ti, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:?}")];
            for o in 0..self.names.len() {
                let m = self.mean[o][ti];
                row.push(format!("{:?}", m.re));
                row.push(format!("{:?}", m.im));
                row.push(format!("{:?}", m.norm()));
                row.push(format!("{:?}", self.stderr[o][ti]));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Mean `<L_k>` of output channel `k` (1-based) of `g` in `state`.
pub fn output_mean(g: &SlhTriple, state: &QuantumState, drives: &Drives, k: usize) -> Result<C64> {
    if k == 0 || k > g.channels() {
        return Err(Error::ChannelOutOfRange { index: k, channels: g.channels() });
    }
    let op = g.l()[k - 1].evaluate(drives)?;
    state.expect(&op)
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_four_columns_per_observable() {
        let s = ExpectationSeries {
            times: vec![0.0, 0.5],
            names: vec!["a".into(), "n".into()],
            mean: vec![vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0)], vec![C64::new(3.0, 0.0); 2]],
            stderr: vec![vec![0.0; 2]; 2],
            samples: 1,
        };
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time,a_re,a_im,a_abs,a_stderr,n_re,n_im,n_abs,n_stderr");
        assert_eq!(lines[2].split(',').count(), 9);
        assert!(lines[2].starts_with("0.5,0.0,2.0,2.0,"));
    }
}
