// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::slh::Drives;

/// Constant drive levels on `[start, end)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub levels: BTreeMap<String, C64>,
}

/// Piecewise-linear drive amplitudes over time.
///
/// Stored as knots with linear interpolation in between and constant extension
/// outside. Knot times are the integration breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveSchedule {
    names: Vec<String>,
    times: Vec<f64>,
    /// `values[k][i]`: amplitude of `names[i]` at `times[k]`.
    values: Vec<Vec<C64>>,
}

impl DriveSchedule {
    /// Contiguous constant segments; at each interior boundary every drive moves
    /// linearly from its old to its new level over the first `ramp` time units of
    /// the new segment.
    pub fn stepped(segments: &[Segment], ramp: f64) -> Result<Self> {
        let Some(first) = segments.first() else {
            return Err(Error::InvalidSchedule("no segments".into()));
        };
        if !(ramp >= 0.0 && ramp.is_finite()) {
            return Err(Error::InvalidSchedule(format!("ramp duration {ramp} must be non-negative")));
        }
        let names: Vec<String> = first.levels.keys().cloned().collect();
        let row = |s: &Segment| -> Result<Vec<C64>> {
            if s.levels.len() != names.len() || names.iter().any(|n| !s.levels.contains_key(n)) {
                return Err(Error::InvalidSchedule("segments must set the same drives".into()));
            }
            Ok(names.iter().map(|n| s.levels[n]).collect())
        };
        let mut times = vec![first.start];
        let mut values = vec![row(first)?];
        for (i, s) in segments.iter().enumerate() {
            if !(s.end > s.start) {
                return Err(Error::InvalidSchedule(format!("segment {i} has end <= start")));
            }
            if i > 0 {
                let prev = &segments[i - 1];
                if (prev.end - s.start).abs() > 1e-12 * (1.0 + s.start.abs()) {
                    return Err(Error::InvalidSchedule(format!("segment {i} is not contiguous")));
                }
                if ramp > s.end - s.start {
                    return Err(Error::InvalidSchedule(format!("ramp longer than segment {i}")));
                }
                let old = values.last().unwrap().clone();
                times.push(s.start);
                values.push(old);
                if ramp > 0.0 {
                    times.push(s.start + ramp);
                    values.push(row(s)?);
                } else {
                    *values.last_mut().unwrap() = row(s)?;
                }
            }
        }
        let last = segments.last().unwrap();
        times.push(last.end);
        values.push(row(last)?);
        Ok(Self { names, times, values })
    }

    /// Single drive swept linearly from `v0` at `t0` to `v1` at `t1`.
    pub fn linear(name: &str, t0: f64, v0: C64, t1: f64, v1: C64) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::InvalidSchedule("sweep needs t1 > t0".into()));
        }
        Ok(Self { names: vec![name.to_string()], times: vec![t0, t1], values: vec![vec![v0], vec![v1]] })
    }

    /// Fixed drives on `[t0, t1]`.
    pub fn constant(levels: &Drives, t0: f64, t1: f64) -> Result<Self> {
        Self::stepped(&[Segment { start: t0, end: t1, levels: levels.clone() }], 0.0)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Knot times, where the drive derivative may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.times.clone();
        b.dedup();
        b
    }

    fn row_at(&self, t: f64) -> Vec<C64> {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1].clone();
        }
        // Last knot with time <= t, so a zero-length ramp switches to the new level.
        let k = self.times.partition_point(|&x| x <= t) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        if t1 <= t0 {
            return self.values[k + 1].clone();
        }
        let w = (t - t0) / (t1 - t0);
        self.values[k]
            .iter()
            .zip(&self.values[k + 1])
            .map(|(a, b)| a * (1.0 - w) + b * w)
            .collect()
    }

    /// All drive amplitudes at time `t`.
    pub fn at(&self, t: f64) -> Drives {
        self.names.iter().cloned().zip(self.row_at(t)).collect()
    }

    /// Maps schedule columns onto a parameter list; every parameter must be scheduled.
    pub fn resolve(&self, params: &[String]) -> Result<ResolvedSchedule> {
        let cols = params
            .iter()
            .map(|p| self.names.iter().position(|n| n == p).ok_or_else(|| Error::UnboundParameter(p.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(ResolvedSchedule { schedule: self.clone(), cols })
    }
}

/// A schedule evaluated directly in an [`crate::slh::OpenSystem`]'s parameter order.
#[derive(Clone, Debug)]
pub struct ResolvedSchedule {
    schedule: DriveSchedule,
    cols: Vec<usize>,
}

impl ResolvedSchedule {
    pub fn values(&self, t: f64) -> Vec<C64> {
        let row = self.schedule.row_at(t);
        self.cols.iter().map(|&c| row[c]).collect()
    }

    pub fn schedule(&self) -> &DriveSchedule {
        &self.schedule
    }
}
