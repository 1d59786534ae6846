//! Galerkin assembly of the linearised operators in a Fourier mode basis.
//!
//! Every operator here has the form
//!
//! ```text
//! a4 d^4 + a2 d^2 - b d q d + p0 + p1 q + p2 q^2,    q = (wave profile)^2
//! ```
//!
//! With modes `e_n = exp(i w_n x) / sqrt(P)` and `w_n = unit * (n + kappa)`
//! the matrix entries are exact up to the Fourier coefficients of `q` and
//! `q^2`. Those are taken from samples on a grid four times finer than the
//! operator grid, so every coefficient `q_{n-m}` with `|n - m| < m` is
//! alias-free. The divergence term contributes `b w_n w_m q_{n-m}`, which
//! makes the matrix Hermitian by construction.

use std::f64::consts::TAU;
use std::fmt;

use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::eigen::{hermitian_defect, hermitian_eigen, HermitianEigen};
use crate::error::{domain, Error, Result};
use crate::spectral::{fft_slot, forward, inverse, Grid};
use crate::wave::{profile, WaveFamily};

/// Oversampling factor for the coefficient spectra.
const COEFF_OVERSAMPLE: usize = 4;

/// Which linearised operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    Lplus,
    Lminus,
    Mplus,
    Mminus,
    Kplus,
    Kminus,
    /// `K+(c)` in the rescaled variable `z = ell x` with Bloch shift.
    Pplus,
    /// `K-(c)` in the rescaled variable `z = ell x` with Bloch shift.
    Pminus,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 8] = [
        Self::Lplus,
        Self::Lminus,
        Self::Mplus,
        Self::Mminus,
        Self::Kplus,
        Self::Kminus,
        Self::Pplus,
        Self::Pminus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lplus => "Lplus",
            Self::Lminus => "Lminus",
            Self::Mplus => "Mplus",
            Self::Mminus => "Mminus",
            Self::Kplus => "Kplus",
            Self::Kminus => "Kminus",
            Self::Pplus => "Pplus",
            Self::Pminus => "Pminus",
        }
    }

    /// Operators posed in the rescaled variable on `[0, 2 pi)`.
    pub fn is_bloch(self) -> bool {
        matches!(self, Self::Pplus | Self::Pminus)
    }

    /// Operators with a speed parameter `c`.
    pub fn uses_c(self) -> bool {
        matches!(
            self,
            Self::Kplus | Self::Kminus | Self::Pplus | Self::Pminus
        )
    }

    /// Coefficients in the physical variable.
    pub fn symbol(self, ee: f64, c: f64) -> OperatorSymbol {
        let lplus = OperatorSymbol {
            second: -1.0,
            potential: [-1.0, 3.0, 0.0],
            ..OperatorSymbol::ZERO
        };
        let lminus = OperatorSymbol {
            second: -1.0,
            potential: [-1.0, 1.0, 0.0],
            ..OperatorSymbol::ZERO
        };
        let mplus = OperatorSymbol {
            fourth: 1.0,
            flux: 5.0,
            potential: [-4.0 + 3.0 * ee * ee, 15.0, -5.0],
            ..OperatorSymbol::ZERO
        };
        let mminus = OperatorSymbol {
            fourth: 1.0,
            flux: 3.0,
            potential: [-1.0, 1.0, 0.0],
            ..OperatorSymbol::ZERO
        };
        match self {
            Self::Lplus => lplus,
            Self::Lminus => lminus,
            Self::Mplus => mplus,
            Self::Mminus => mminus,
            Self::Kplus | Self::Pplus => mplus.combine(1.0, &lplus, -c),
            Self::Kminus | Self::Pminus => mminus.combine(1.0, &lminus, -c),
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

/// Coefficients of `a4 d^4 + a2 d^2 - b d q d + p0 + p1 q + p2 q^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSymbol {
    pub fourth: f64,
    pub second: f64,
    pub flux: f64,
    pub potential: [f64; 3],
}

impl OperatorSymbol {
    pub const ZERO: Self = Self {
        fourth: 0.0,
        second: 0.0,
        flux: 0.0,
        potential: [0.0; 3],
    };

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        Self {
            fourth: a * self.fourth + b * other.fourth,
            second: a * self.second + b * other.second,
            flux: a * self.flux + b * other.flux,
            potential: [0, 1, 2].map(|i| a * self.potential[i] + b * other.potential[i]),
        }
    }
}

/// Fourier coefficients of `q` and `q^2` on the fine grid.
#[derive(Debug, Clone)]
pub struct CoefficientSpectrum {
    q: Vec<C64>,
    q2: Vec<C64>,
}

impl CoefficientSpectrum {
    /// Sample `q` on `oversample * m` points of `[0, period)`.
    pub fn new(q: impl Fn(f64) -> f64, period: f64, m: usize) -> Self {
        let n = COEFF_OVERSAMPLE * m;
        let samples: Vec<f64> = (0..n).map(|j| q(j as f64 * period / n as f64)).collect();
        let q1: Vec<C64> = samples.iter().map(|&v| C64::new(v, 0.0)).collect();
        let q2: Vec<C64> = samples.iter().map(|&v| C64::new(v * v, 0.0)).collect();
        Self {
            q: forward(&q1),
            q2: forward(&q2),
        }
    }

    #[inline]
    fn at(&self, d: i64) -> (C64, C64) {
        let s = fft_slot(d, self.q.len());
        (self.q[s], self.q2[s])
    }
}

/// A Hermitian operator stored in the orthonormal Fourier basis of a grid.
///
/// Row/column `i` corresponds to mode `n = i - m/2`. The Nyquist mode
/// `n = -m/2` has no partner, so it is kept decoupled (diagonal only); this
/// keeps `kappa = 0` matrices real in the nodal basis and makes the spectrum
/// exactly symmetric under `kappa -> -kappa`.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    m: usize,
    period: f64,
    unit: f64,
    kappa: f64,
    modes: Mat<C64>,
}

impl SpectralOperator {
    /// Assemble `symbol` with wavenumbers `unit * (n + kappa)`.
    pub fn assemble(
        symbol: &OperatorSymbol,
        spectrum: &CoefficientSpectrum,
        m: usize,
        period: f64,
        unit: f64,
        kappa: f64,
    ) -> Self {
        let half = (m / 2) as i64;
        let omega: Vec<f64> = (0..m)
            .map(|i| unit * ((i as i64 - half) as f64 + kappa))
            .collect();
        let mut a = Mat::<C64>::zeros(m, m);
        for j in 0..m {
            for i in j..m {
                if j == 0 && i != 0 {
                    continue;
                }
                let (q, q2) = spectrum.at(i as i64 - j as i64);
                let mut z = symbol.flux * omega[i] * omega[j] * q
                    + symbol.potential[1] * q
                    + symbol.potential[2] * q2;
                if i == j {
                    let w2 = omega[i] * omega[i];
                    z = C64::new(
                        z.re + symbol.fourth * w2 * w2 - symbol.second * w2 + symbol.potential[0],
                        0.0,
                    );
                }
                a[(i, j)] = z;
                a[(j, i)] = z.conj();
            }
        }
        Self {
            m,
            period,
            unit,
            kappa,
            modes: a,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    /// Wavenumber of mode row `i`.
    pub fn omega(&self, i: usize) -> f64 {
        self.unit * ((i as i64 - (self.m / 2) as i64) as f64 + self.kappa)
    }

    /// Matrix in the orthonormal mode basis.
    pub fn modes(&self) -> MatRef<'_, C64> {
        self.modes.as_ref()
    }

    /// Orthonormal-basis coordinates (ascending modes) of periodic samples.
    pub fn to_modes(&self, f: &[C64]) -> Result<Vec<C64>> {
        if f.len() != self.m {
            return Err(Error::GridMismatch {
                expected: self.m,
                got: f.len(),
            });
        }
        let c = forward(f);
        let s = self.period.sqrt();
        let half = (self.m / 2) as i64;
        Ok((0..self.m)
            .map(|i| s * c[fft_slot(i as i64 - half, self.m)])
            .collect())
    }

    /// Inverse of [`Self::to_modes`].
    pub fn from_modes(&self, a: &[C64]) -> Vec<C64> {
        let s = 1.0 / self.period.sqrt();
        let half = (self.m / 2) as i64;
        let mut c = vec![C64::new(0.0, 0.0); self.m];
        for (i, z) in a.iter().enumerate() {
            c[fft_slot(i as i64 - half, self.m)] = z * s;
        }
        inverse(&c)
    }

    pub fn apply_modes(&self, a: &[C64]) -> Vec<C64> {
        let m = self.m;
        let mut out = vec![C64::new(0.0, 0.0); m];
        for (j, &aj) in a.iter().enumerate().take(m) {
            if aj == C64::new(0.0, 0.0) {
                continue;
            }
            let col = self.modes.col(j);
            for i in 0..m {
                out[i] += col[i] * aj;
            }
        }
        out
    }

    /// Apply to periodic samples on the operator's grid.
    pub fn apply(&self, f: &[C64]) -> Result<Vec<C64>> {
        let a = self.to_modes(f)?;
        Ok(self.from_modes(&self.apply_modes(&a)))
    }

    /// Apply to real samples, returning the real part.
    pub fn apply_real(&self, f: &[f64]) -> Result<Vec<f64>> {
        let fc: Vec<C64> = f.iter().map(|&x| C64::new(x, 0.0)).collect();
        Ok(self.apply(&fc)?.into_iter().map(|z| z.re).collect())
    }

    /// `<A f, f>` with the `L^2` inner product on one period.
    pub fn quadratic_form(&self, f: &[C64]) -> Result<f64> {
        let a = self.to_modes(f)?;
        let b = self.apply_modes(&a);
        Ok(a.iter().zip(&b).map(|(x, y)| (x.conj() * y).re).sum())
    }

    /// The matrix acting on nodal values.
    pub fn nodal_matrix(&self) -> Mat<C64> {
        let m = self.m;
        let mut out = Mat::<C64>::zeros(m, m);
        let mut e = vec![C64::new(0.0, 0.0); m];
        for j in 0..m {
            e.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            e[j] = C64::new(1.0, 0.0);
            let col = self.apply(&e).expect("length matches");
            for i in 0..m {
                out[(i, j)] = col[i];
            }
        }
        out
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        hermitian_eigen(self.modes.as_ref())
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(self.modes.as_ref())
    }
}

/// One of the named operators for a given wave, speed, and Bloch number.
#[derive(Debug, Clone)]
pub struct BlochOperator {
    pub kind: OperatorKind,
    pub c: f64,
    pub kappa: f64,
    pub wave: WaveFamily,
    pub grid: Grid,
    op: SpectralOperator,
}

impl BlochOperator {
    pub fn operator(&self) -> &SpectralOperator {
        &self.op
    }
    /// Nodal matrix (dense, `m x m`).
    pub fn matrix(&self) -> Mat<C64> {
        self.op.nodal_matrix()
    }
    pub fn apply(&self, f: &[C64]) -> Result<Vec<C64>> {
        self.op.apply(f)
    }
    pub fn apply_real(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.op.apply_real(f)
    }
    pub fn eigen(&self) -> Result<HermitianEigen> {
        self.op.eigen()
    }
}

/// Assemble `kind` for wave `w`. P-kinds live on `[0, 2 pi)` in `z = ell x`;
/// the other kinds live on a whole number of wave periods in `x`.
pub fn assemble(
    kind: OperatorKind,
    w: &WaveFamily,
    c: f64,
    kappa: f64,
    g: &Grid,
) -> Result<BlochOperator> {
    w.require_periodic()?;
    if !(kappa.is_finite() && kappa.abs() <= 0.5) {
        return Err(domain("kappa", kappa, "-1/2 <= kappa <= 1/2"));
    }
    let symbol = kind.symbol(w.ee(), c);
    let (spectrum, unit) = if kind.is_bloch() {
        if (g.period() - TAU).abs() > 1e-12 {
            return Err(Error::PeriodMismatch {
                kind: kind.name(),
                period: g.period(),
                reason: "P operators need period 2 pi",
            });
        }
        let wc = *w;
        let ell = w.ell();
        (
            CoefficientSpectrum::new(move |z| profile(&wc, z / ell).powi(2), TAU, g.m()),
            ell,
        )
    } else {
        if w.periods_in(g.period()).is_none() {
            return Err(Error::PeriodMismatch {
                kind: kind.name(),
                period: g.period(),
                reason: "x operators need a whole number of wave periods",
            });
        }
        let wc = *w;
        (
            CoefficientSpectrum::new(move |x| profile(&wc, x).powi(2), g.period(), g.m()),
            TAU / g.period(),
        )
    };
    let op = SpectralOperator::assemble(&symbol, &spectrum, g.m(), g.period(), unit, kappa);
    Ok(BlochOperator {
        kind,
        c: if kind.uses_c() { c } else { 0.0 },
        kappa,
        wave: *w,
        grid: g.clone(),
        op,
    })
}

/// Mode-space derivative helper: multiplies coordinates by `(i w_n)^order`.
pub fn differentiate_modes(op: &SpectralOperator, a: &[C64], order: u32) -> Vec<C64> {
    a.iter()
        .enumerate()
        .map(|(i, z)| {
            if i == 0 && order % 2 == 1 {
                return C64::new(0.0, 0.0);
            }
            z * C64::new(0.0, op.omega(i)).powu(order)
        })
        .collect()
}
