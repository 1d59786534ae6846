//! Periodic complex fields and the conserved functionals of the NLS flow.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{derivative, fft_slot, h2_norm_sq, inverse, shift, Grid};
use crate::wave::{profile, WaveFamily};

/// Smallest grid accepted for time evolution.
pub const MIN_FIELD_M: usize = 64;

/// Samples of `psi` on `[0, period)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<C64>,
    period: f64,
}

impl Field {
    pub fn new(values: Vec<C64>, period: f64) -> Result<Self> {
        let m = values.len();
        if m < MIN_FIELD_M || !m.is_multiple_of(2) {
            return Err(Error::InvalidGrid {
                m,
                min: MIN_FIELD_M,
            });
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(crate::error::domain("period", period, "period > 0"));
        }
        Ok(Self { values, period })
    }

    pub fn from_real(values: &[f64], period: f64) -> Result<Self> {
        Self::new(values.iter().map(|&x| C64::new(x, 0.0)).collect(), period)
    }

    /// The wave profile on `n_periods` periods.
    pub fn wave(w: &WaveFamily, n_periods: usize, m: usize) -> Result<Self> {
        let g = Grid::for_wave(w, n_periods, m)?;
        Self::from_real(&g.sample(|x| profile(w, x)), g.period())
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<C64> {
        self.values
    }
    pub fn m(&self) -> usize {
        self.values.len()
    }
    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn grid(&self) -> Grid {
        Grid::new(self.m(), self.period).expect("field grid was validated")
    }

    /// `exp(i alpha) psi(x + s)`.
    pub fn transform(&self, alpha: f64, s: f64) -> Self {
        let rot = C64::from_polar(1.0, alpha);
        let values = shift(&self.values, self.period, s)
            .into_iter()
            .map(|z| rot * z)
            .collect();
        Self {
            values,
            period: self.period,
        }
    }

    pub fn h2_norm(&self) -> f64 {
        h2_norm_sq(&self.values, self.period).sqrt()
    }
}

/// The six conserved quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservedSet {
    /// `E = int |psi_x|^2 + (1 - |psi|^2)^2 / 2`.
    pub e: f64,
    /// `Q = int |psi|^2`.
    pub q: f64,
    /// `M = (i/2) int (conj(psi) psi_x - psi conj(psi_x))`.
    pub mom: f64,
    /// `R = int |psi_xx|^2 + 3|psi|^2 |psi_x|^2 + (2 Re(conj(psi) psi_x))^2 / 2 + |psi|^6 / 2`.
    pub r: f64,
    /// `S = R - (3 - ee^2) Q / 2`.
    pub s: f64,
    /// `Lambda_c = S - c E`.
    pub lambda_c: f64,
}

/// Which conserved quantity to read from a [`ConservedSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    Energy,
    Charge,
    Momentum,
    R,
    S,
    Lambda,
}

impl ConservedSet {
    pub fn get(&self, f: Functional) -> f64 {
        match f {
            Functional::Energy => self.e,
            Functional::Charge => self.q,
            Functional::Momentum => self.mom,
            Functional::R => self.r,
            Functional::S => self.s,
            Functional::Lambda => self.lambda_c,
        }
    }
}

/// All six functionals by spectral differentiation and the trapezoid rule.
/// The field must span a whole number of wave periods.
pub fn functionals(psi: &Field, w: &WaveFamily, c: f64) -> Result<ConservedSet> {
    if w.periods_in(psi.period()).is_none() {
        return Err(Error::PeriodMismatch {
            kind: "functionals",
            period: psi.period(),
            reason: "field must span a whole number of wave periods",
        });
    }
    Ok(functionals_unchecked(psi, w.ee(), c))
}

pub(crate) fn functionals_unchecked(psi: &Field, ee: f64, c: f64) -> ConservedSet {
    let p = psi.period();
    let v = psi.values();
    let px = derivative(v, p, 1);
    let pxx = derivative(v, p, 2);
    let (mut e, mut q, mut mom, mut r) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..v.len() {
        let r2 = v[j].norm_sqr();
        let dx2 = px[j].norm_sqr();
        let cross = v[j].conj() * px[j];
        e += dx2 + 0.5 * (1.0 - r2).powi(2);
        q += r2;
        mom -= cross.im;
        r += pxx[j].norm_sqr() + 3.0 * r2 * dx2 + 2.0 * cross.re * cross.re + 0.5 * r2 * r2 * r2;
    }
    let h = p / v.len() as f64;
    let (e, q, mom, r) = (e * h, q * h, mom * h, r * h);
    let s = r - 0.5 * (3.0 - ee * ee) * q;
    ConservedSet {
        e,
        q,
        mom,
        r,
        s,
        lambda_c: s - c * e,
    }
}

/// Seeded random trigonometric polynomial with modes `|n| <= max_mode` and
/// coefficients damped by `1/(1 + n^2)`.
pub fn random_trig(m: usize, max_mode: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); m];
    let top = max_mode.min(m / 2 - 1) as i64;
    for n in -top..=top {
        let damp = 1.0 / (1.0 + (n * n) as f64);
        let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        c[fft_slot(n, m)] = z * damp;
    }
    inverse(&c)
}

/// Generator used for every seeded draw in this module.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Central fourth-order difference of `f` along `dir` at `psi`.
pub fn directional_derivative(
    psi: &Field,
    dir: &[C64],
    w: &WaveFamily,
    c: f64,
    f: Functional,
    h: f64,
) -> Result<f64> {
    if dir.len() != psi.m() {
        return Err(Error::GridMismatch {
            expected: psi.m(),
            got: dir.len(),
        });
    }
    let at = |t: f64| -> Result<f64> {
        let vals = psi
            .values()
            .iter()
            .zip(dir)
            .map(|(a, b)| a + b * t)
            .collect();
        Ok(functionals(&Field::new(vals, psi.period())?, w, c)?.get(f))
    };
    Ok((-at(2.0 * h)? + 8.0 * at(h)? - 8.0 * at(-h)? + at(-2.0 * h)?) / (12.0 * h))
}

/// Largest directional derivative of `E` and of `S` at the wave along 20
/// seeded smooth directions of unit `H^2` norm.
pub fn variational_residual(w: &WaveFamily, c: f64, g: &Grid) -> Result<(f64, f64)> {
    w.require_periodic()?;
    let u0 = Field::from_real(&g.sample(|x| profile(w, x)), g.period())?;
    let mut rng = seeded(0x5eed);
    let (mut re, mut rs): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let mut d = random_trig(g.m(), g.m() / 8, &mut rng);
        let n = h2_norm_sq(&d, g.period()).sqrt();
        d.iter_mut().for_each(|z| *z /= n);
        re = re.max(directional_derivative(&u0, &d, w, c, Functional::Energy, 1e-3)?.abs());
        rs = rs.max(directional_derivative(&u0, &d, w, c, Functional::S, 1e-3)?.abs());
    }
    Ok((re, rs))
}
