//! Uniform periodic grids and Fourier helpers.
//!
//! Coefficients follow the convention `f(x_j) = sum_n c_n exp(i w_n x_j)`, so a
//! forward transform is divided by `m`. Mode vectors used by the operators are
//! stored in ascending order `n = -m/2, ..., m/2 - 1`.

use std::cell::RefCell;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlannerScalar};

use crate::error::{domain, Error, Result};
use crate::wave::WaveFamily;

/// Smallest grid accepted anywhere.
pub const MIN_GRID: usize = 16;

/// Uniform grid on `[0, period)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    m: usize,
    period: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn new(m: usize, period: f64) -> Result<Self> {
        if m < MIN_GRID || !m.is_multiple_of(2) {
            return Err(Error::InvalidGrid { m, min: MIN_GRID });
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(domain("period", period, "finite and positive"));
        }
        let nodes = (0..m).map(|j| j as f64 * period / m as f64).collect();
        Ok(Self { m, period, nodes })
    }

    /// Grid for the rescaled variable `z` on `[0, 2 pi)`.
    pub fn bloch(m: usize) -> Result<Self> {
        Self::new(m, TAU)
    }

    /// Grid on `n_periods` fundamental periods `2 t0` of the wave.
    pub fn for_wave(w: &WaveFamily, n_periods: usize, m: usize) -> Result<Self> {
        w.require_periodic()?;
        if n_periods == 0 {
            return Err(domain("n_periods", 0.0, "n_periods >= 1"));
        }
        Self::new(m, n_periods as f64 * w.period())
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn spacing(&self) -> f64 {
        self.period / self.m as f64
    }

    /// Sample a real function at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// Angular wavenumbers `2 pi n / period` in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.m)
            .map(|i| TAU / self.period * fft_mode(i, self.m) as f64)
            .collect()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len == self.m {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.m,
                got: len,
            })
        }
    }
}

/// Signed mode number of FFT slot `i`; the Nyquist slot maps to `-m/2`.
#[inline]
pub fn fft_mode(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

/// FFT slot of signed mode `n`, for `-m/2 <= n < m/2`.
#[inline]
pub fn fft_slot(n: i64, m: usize) -> usize {
    n.rem_euclid(m as i64) as usize
}

// The scalar planner gives the same bits on every CPU, and its
// forward-inverse round trip has no measurable modulus bias; the SIMD
// plans drift the discrete L2 norm by about 1e-16 per round trip.
thread_local! {
    static PLANNER: RefCell<FftPlannerScalar<f64>> = RefCell::new(FftPlannerScalar::new());
}

pub(crate) fn plans(m: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(m), p.plan_fft_inverse(m))
    })
}

/// Fourier coefficients `c_n` in FFT order (normalised by `1/m`).
pub fn forward(values: &[C64]) -> Vec<C64> {
    let m = values.len();
    let (fwd, _) = plans(m);
    let mut buf = values.to_vec();
    fwd.process(&mut buf);
    let s = 1.0 / m as f64;
    buf.iter_mut().for_each(|z| *z *= s);
    buf
}

/// Samples from coefficients in FFT order.
pub fn inverse(coeffs: &[C64]) -> Vec<C64> {
    let (_, inv) = plans(coeffs.len());
    let mut buf = coeffs.to_vec();
    inv.process(&mut buf);
    buf
}

pub fn to_complex(values: &[f64]) -> Vec<C64> {
    values.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// `order`-th spectral derivative of periodic samples on `[0, period)`.
/// The Nyquist mode is dropped for odd orders.
pub fn derivative(values: &[C64], period: f64, order: u32) -> Vec<C64> {
    let m = values.len();
    let mut c = forward(values);
    for (i, z) in c.iter_mut().enumerate() {
        let n = fft_mode(i, m);
        if order % 2 == 1 && 2 * n.unsigned_abs() as usize == m {
            *z = C64::new(0.0, 0.0);
            continue;
        }
        let w = TAU / period * n as f64;
        *z *= C64::new(0.0, w).powu(order);
    }
    inverse(&c)
}

/// Real-valued version of [`derivative`].
pub fn derivative_real(values: &[f64], period: f64, order: u32) -> Vec<f64> {
    derivative(&to_complex(values), period, order)
        .into_iter()
        .map(|z| z.re)
        .collect()
}

/// Trapezoid rule on one period, exact for trigonometric polynomials of degree `< m`.
pub fn integrate(values: &[f64], period: f64) -> f64 {
    values.iter().sum::<f64>() * period / values.len() as f64
}

/// `L^2` inner product of real samples.
pub fn inner(f: &[f64], g: &[f64], period: f64) -> f64 {
    f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * period / f.len() as f64
}

/// Squared `L^2` norm of complex samples.
pub fn norm_sq(f: &[C64], period: f64) -> f64 {
    f.iter().map(|z| z.norm_sqr()).sum::<f64>() * period / f.len() as f64
}

/// Squared `H^2` norm `||f||^2 + ||f'||^2 + ||f''||^2`, computed in Fourier space.
pub fn h2_norm_sq(f: &[C64], period: f64) -> f64 {
    let m = f.len();
    let c = forward(f);
    c.iter()
        .enumerate()
        .map(|(i, z)| {
            let w2 = (TAU / period * fft_mode(i, m) as f64).powi(2);
            (1.0 + w2 + w2 * w2) * z.norm_sqr()
        })
        .sum::<f64>()
        * period
}

/// Shift samples by `s`: returns `f(x + s)` by phase multiplication.
pub fn shift(values: &[C64], period: f64, s: f64) -> Vec<C64> {
    let m = values.len();
    let mut c = forward(values);
    for (i, z) in c.iter_mut().enumerate() {
        let n = fft_mode(i, m);
        if 2 * n.unsigned_abs() as usize == m {
            // Keep the Nyquist mode real so real inputs stay real.
            *z *= (TAU / period * n as f64 * s).cos();
            continue;
        }
        *z *= C64::from_polar(1.0, TAU / period * n as f64 * s);
    }
    inverse(&c)
}
