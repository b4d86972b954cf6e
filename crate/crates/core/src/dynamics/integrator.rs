// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dormand-Prince 5(4) with FSAL and fourth-order dense output.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative and absolute error tolerances for adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub const fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Adaptive stepper over a complex state vector.
pub(crate) struct Dopri5 {
    tol: Tolerances,
    t: f64,
    h: f64,
    y: Vec<C64>,
    k: [Vec<C64>; 7],
    ytmp: Vec<C64>,
    fsal: bool,
    /// Dense-output coefficients of the last accepted step.
    cont: [Vec<C64>; 5],
    t_old: f64,
    h_old: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl Dopri5 {
    pub fn new(t0: f64, y0: Vec<C64>, tol: Tolerances) -> Self {
        let n = y0.len();
        let z = || vec![C64::new(0.0, 0.0); n];
        Self {
            tol,
            t: t0,
            h: 0.0,
            y: y0,
            k: [z(), z(), z(), z(), z(), z(), z()],
            ytmp: z(),
            fsal: false,
            cont: [z(), z(), z(), z(), z()],
            t_old: t0,
            h_old: 0.0,
            accepted: 0,
            rejected: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[C64] {
        &self.y
    }

    /// Restarts from a new state (after a jump or a breakpoint); the step size is kept.
    pub fn reset(&mut self, t: f64, y: &[C64]) {
        self.t = t;
        self.y.copy_from_slice(y);
        self.fsal = false;
    }

    /// Restarts at a breakpoint keeping the current state.
    pub fn restart(&mut self) {
        self.fsal = false;
    }

    fn err_scale(&self, a: C64, b: C64) -> f64 {
        self.tol.atol + self.tol.rtol * a.norm().max(b.norm())
    }

    fn initial_step<F>(&mut self, f: &mut F, span: f64) -> f64
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = self.y.len() as f64;
        let (mut d0, mut d1) = (0.0, 0.0);
        for (y, k) in self.y.iter().zip(&self.k[0]) {
            let sc = self.err_scale(*y, *y);
            d0 += (y.norm() / sc).powi(2);
            d1 += (k.norm() / sc).powi(2);
        }
        let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(span);
        for ((t, y), k) in self.ytmp.iter_mut().zip(&self.y).zip(&self.k[0]) {
            *t = y + k * h0;
        }
        let mut f1 = vec![C64::new(0.0, 0.0); self.y.len()];
        f(self.t + h0, &self.ytmp, &mut f1);
        let mut d2 = 0.0;
        for ((a, b), y) in f1.iter().zip(&self.k[0]).zip(&self.y) {
            d2 += ((a - b).norm() / self.err_scale(*y, *y)).powi(2);
        }
        let d2 = (d2 / n).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(span)
    }

    /// Takes one accepted step that does not pass `t_stop`.
    pub fn step<F>(&mut self, f: &mut F, t_stop: f64) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let span = t_stop - self.t;
        if span <= 0.0 {
            return Ok(());
        }
        if !self.fsal {
            let (t, y) = (self.t, std::mem::take(&mut self.y));
            f(t, &y, &mut self.k[0]);
            self.y = y;
            self.fsal = true;
        }
        if self.h <= 0.0 {
            self.h = self.initial_step(f, span);
        }
        let n = self.y.len();
        let mut fac_max = 10.0;
        loop {
            let mut h = self.h.min(span);
            let last = h >= span * (1.0 - 1e-12);
            if last {
                h = span;
            }
            if h < 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t, h });
            }
            let t = self.t;
            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            let y = &self.y;
            let yt = &mut self.ytmp;
            for i in 0..n {
                yt[i] = y[i] + k1[i] * (h * A21);
            }
            f(t + C2 * h, yt, k2);
            for i in 0..n {
                yt[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
            }
            f(t + C3 * h, yt, k3);
            for i in 0..n {
                yt[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
            }
            f(t + C4 * h, yt, k4);
            for i in 0..n {
                yt[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
            }
            f(t + C5 * h, yt, k5);
            for i in 0..n {
                yt[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
            }
            let t_new = if last { t_stop } else { t + h };
            f(t_new, yt, k6);
            for i in 0..n {
                yt[i] = y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
            }
            f(t_new, yt, k7);
            let mut err = 0.0;
            for i in 0..n {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                let sc = self.tol.atol + self.tol.rtol * y[i].norm().max(yt[i].norm());
                err += (e.norm() / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                self.h = h * 0.2;
                self.rejected += 1;
                fac_max = 1.0;
                continue;
            }
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, fac_max);
            if err <= 1.0 {
                for i in 0..n {
                    let y0 = y[i];
                    let y1 = yt[i];
                    let ydiff = y1 - y0;
                    let bspl = k1[i] * h - ydiff;
                    self.cont[0][i] = y0;
                    self.cont[1][i] = ydiff;
                    self.cont[2][i] = bspl;
                    self.cont[3][i] = ydiff - k7[i] * h - bspl;
                    self.cont[4][i] =
                        (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
                }
                std::mem::swap(k1, k7);
                std::mem::swap(&mut self.y, &mut self.ytmp);
                self.t_old = t;
                self.h_old = t_new - t;
                self.t = t_new;
                // A truncated final step says nothing about the natural step size.
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
                self.accepted += 1;
                return Ok(());
            }
            self.h = h * fac.min(1.0);
            self.rejected += 1;
            fac_max = 1.0;
        }
    }

    /// Interpolated state at `t` inside the last accepted step.
    pub fn dense(&self, t: f64, out: &mut [C64]) {
        if self.h_old == 0.0 {
            out.copy_from_slice(&self.y);
            return;
        }
        let th = (t - self.t_old) / self.h_old;
        let th1 = 1.0 - th;
        let [c0, c1, c2, c3, c4] = &self.cont;
        for i in 0..out.len() {
            out[i] = c0[i] + (c1[i] + (c2[i] + (c3[i] + c4[i] * th1) * th) * th1) * th;
        }
    }

    /// Start of the last accepted step.
    pub fn t_old(&self) -> f64 {
        self.t_old
    }
}
