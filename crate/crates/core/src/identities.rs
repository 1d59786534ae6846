//! Closed-form generalised kernel vectors of the linearised operators and
//! the inhomogeneous identities they satisfy.
//!
//! Everything here lives in the variable `xi = x / sqrt(1 + k^2)`, in which
//! the wave is proportional to `j(xi) = sn(xi, k)` and has period `4K(k)`.
//! The scaled operators are
//!
//! ```text
//! LL- = -d^2 - (1 + k^2) + 2k^2 j^2
//! LL+ = -d^2 - (1 + k^2) + 6k^2 j^2
//! MM- = d^4 - 6k^2 d j^2 d + 2k^2 (1 + k^2) j^2 - (1 + k^2)^2
//! MM+ = d^4 - 10k^2 d j^2 d - 20k^4 j^4 + 30k^2 (1 + k^2) j^2 - (1 + 14k^2 + k^4)
//! ```

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::elliptic::{complete_ke, incomplete_e, jacobi, EllipticModulus};
use crate::error::{domain, Error, Result};
use crate::linops::{CoefficientSpectrum, OperatorSymbol, SpectralOperator};
use crate::spectral::{inner, Grid};
use crate::wave::WaveFamily;

/// The six identities, named after the operator and the vector it acts on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Identity {
    /// `LL- V = -2 (1 - E/K) j'`.
    LminusV,
    /// `MM- V = 4 [k^2 - (1 - E/K)(1 + k^2)] j'`.
    MminusV,
    /// `(MM- - c (1 + k^2) LL-) V = [4k^2 + 2 (c - 2)(1 + k^2)(1 - E/K)] j'`.
    KminusV { c: f64 },
    /// `LL+ U = 2 (k^2 - 1 + (1 + k^2) E/K) j`.
    LplusU,
    /// `MM+ U = 4 [2k^4 - k^2 - 1 + (1 + 4k^2 + k^4) E/K] j`.
    MplusU,
    /// `(MM+ - 2 (1 + k^2) LL+) U = 4k^2 [k^2 - 1 + 2E/K] j`.
    KplusU,
}

impl Identity {
    /// All six, with `c = 2` for the `K-` identity.
    pub const ALL: [Identity; 6] = [
        Self::LminusV,
        Self::MminusV,
        Self::KminusV { c: 2.0 },
        Self::LplusU,
        Self::MplusU,
        Self::KplusU,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::LminusV => "LminusV",
            Self::MminusV => "MminusV",
            Self::KminusV { .. } => "KminusV",
            Self::LplusU => "LplusU",
            Self::MplusU => "MplusU",
            Self::KplusU => "KplusU",
        }
    }

    fn acts_on_v(&self) -> bool {
        matches!(self, Self::LminusV | Self::MminusV | Self::KminusV { .. })
    }

    /// Operator symbol in `xi`, with `q = j^2`.
    pub fn symbol(&self, k: f64) -> OperatorSymbol {
        let k2 = k * k;
        let s = 1.0 + k2;
        let ll_minus = OperatorSymbol {
            second: -1.0,
            potential: [-s, 2.0 * k2, 0.0],
            ..OperatorSymbol::ZERO
        };
        let ll_plus = OperatorSymbol {
            second: -1.0,
            potential: [-s, 6.0 * k2, 0.0],
            ..OperatorSymbol::ZERO
        };
        let mm_minus = OperatorSymbol {
            fourth: 1.0,
            flux: 6.0 * k2,
            potential: [-s * s, 2.0 * k2 * s, 0.0],
            ..OperatorSymbol::ZERO
        };
        let mm_plus = OperatorSymbol {
            fourth: 1.0,
            flux: 10.0 * k2,
            potential: [-(1.0 + 14.0 * k2 + k2 * k2), 30.0 * k2 * s, -20.0 * k2 * k2],
            ..OperatorSymbol::ZERO
        };
        match *self {
            Self::LminusV => ll_minus,
            Self::MminusV => mm_minus,
            Self::KminusV { c } => mm_minus.combine(1.0, &ll_minus, -c * s),
            Self::LplusU => ll_plus,
            Self::MplusU => mm_plus,
            Self::KplusU => mm_plus.combine(1.0, &ll_plus, -2.0 * s),
        }
    }

    /// Coefficient of `j'` (for `V`) or `j` (for `U`) on the right-hand side.
    pub fn coefficient(&self, k: f64) -> Result<f64> {
        let r = ratio(k)?;
        let k2 = k * k;
        let s = 1.0 + k2;
        Ok(match *self {
            Self::LminusV => -2.0 * (1.0 - r),
            Self::MminusV => 4.0 * (k2 - (1.0 - r) * s),
            Self::KminusV { c } => 4.0 * k2 + 2.0 * (c - 2.0) * s * (1.0 - r),
            Self::LplusU => 2.0 * (k2 - 1.0 + s * r),
            Self::MplusU => 4.0 * (2.0 * k2 * k2 - k2 - 1.0 + (1.0 + 4.0 * k2 + k2 * k2) * r),
            Self::KplusU => 4.0 * k2 * (k2 - 1.0 + 2.0 * r),
        })
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::KminusV { c } => write!(f, "KminusV(c={c})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Identity {
    type Err = Error;
    /// Case-insensitive name; `KminusV` takes `c = 2` unless written
    /// `KminusV:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let found = Self::ALL
            .into_iter()
            .find(|i| i.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownTag(s.to_string()))?;
        match (found, arg) {
            (Self::KminusV { .. }, Some(a)) => {
                let c = a.parse().map_err(|_| Error::UnknownTag(s.to_string()))?;
                Ok(Self::KminusV { c })
            }
            (_, None) => Ok(found),
            _ => Err(Error::UnknownTag(s.to_string())),
        }
    }
}

fn modulus(k: f64) -> Result<EllipticModulus> {
    if !(k > 0.0 && k < 1.0) {
        return Err(domain("k", k, "0 < k < 1"));
    }
    EllipticModulus::new(k)
}

/// `E(k) / K(k)`.
fn ratio(k: f64) -> Result<f64> {
    let (kk, ee) = complete_ke(modulus(k)?)?;
    Ok(ee / kk)
}

/// Even, `4K`-periodic solution of `LL- V = -2 (1 - E/K) j'`.
pub fn eval_v(xi: f64, k: f64) -> Result<f64> {
    let km = modulus(k)?;
    let r = ratio(k)?;
    let t = jacobi(xi, km);
    Ok(t.cn * t.dn + t.sn * (incomplete_e(xi, km) - r * xi))
}

/// Odd, `4K`-periodic solution of `LL+ U = 2 (k^2 - 1 + (1 + k^2) E/K) j`.
pub fn eval_u(xi: f64, k: f64) -> Result<f64> {
    let km = modulus(k)?;
    let r = ratio(k)?;
    let t = jacobi(xi, km);
    Ok(r * t.sn + k * k * t.sn * t.cn * t.cn - t.cn * t.dn * (incomplete_e(xi, km) - r * xi))
}

/// Grid of `m` points on one period `[0, 4K)` in `xi`.
pub fn xi_grid(k: f64, m: usize) -> Result<Grid> {
    let (kk, _) = complete_ke(modulus(k)?)?;
    Grid::new(m, 4.0 * kk)
}

fn operator(id: &Identity, k: f64, g: &Grid) -> Result<SpectralOperator> {
    let km = modulus(k)?;
    let spectrum = CoefficientSpectrum::new(|x| jacobi(x, km).sn.powi(2), g.period(), g.m());
    Ok(SpectralOperator::assemble(
        &id.symbol(k),
        &spectrum,
        g.m(),
        g.period(),
        std::f64::consts::TAU / g.period(),
        0.0,
    ))
}

/// Grid values of the operator applied to `V` or `U`, and of the
/// right-hand side.
pub fn identity_sides(id: &Identity, k: f64, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = xi_grid(k, m)?;
    let km = modulus(k)?;
    let coef = id.coefficient(k)?;
    let (f, rhs): (Vec<f64>, Vec<f64>) = if id.acts_on_v() {
        let f = g
            .nodes()
            .iter()
            .map(|&x| eval_v(x, k))
            .collect::<Result<_>>()?;
        let t = g.sample(|x| {
            let t = jacobi(x, km);
            coef * t.cn * t.dn
        });
        (f, t)
    } else {
        let f = g
            .nodes()
            .iter()
            .map(|&x| eval_u(x, k))
            .collect::<Result<_>>()?;
        (f, g.sample(|x| coef * jacobi(x, km).sn))
    };
    let lhs = operator(id, k, &g)?.apply_real(&f)?;
    Ok((lhs, rhs))
}

/// `max |LHS - RHS|` over an `m`-point grid on one period.
pub fn verify_identity(id: &Identity, k: f64, m: usize) -> Result<f64> {
    let (lhs, rhs) = identity_sides(id, k, m)?;
    Ok(lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Closed forms of `||j||^2`, `||j'||^2` and `<j', V>` over one period.
pub fn norms(k: f64) -> Result<(f64, f64, f64)> {
    let (kk, ee) = complete_ke(modulus(k)?)?;
    let r = ee / kk;
    let k2 = k * k;
    let n1 = 4.0 * kk / k2 * (1.0 - r);
    let n2 = 4.0 * kk / (3.0 * k2) * (k2 - 1.0 + (k2 + 1.0) * r);
    let n3 = 2.0 * kk / k2 * (k2 - 1.0 + 2.0 * r - r * r);
    Ok((n1, n2, n3))
}

/// Trapezoid-rule values of the same three integrals on an `m`-point grid.
pub fn norms_by_quadrature(k: f64, m: usize) -> Result<(f64, f64, f64)> {
    let g = xi_grid(k, m)?;
    let km = modulus(k)?;
    let j = g.sample(|x| jacobi(x, km).sn);
    let dj = g.sample(|x| {
        let t = jacobi(x, km);
        t.cn * t.dn
    });
    let v: Vec<f64> = g
        .nodes()
        .iter()
        .map(|&x| eval_v(x, k))
        .collect::<Result<_>>()?;
    let p = g.period();
    Ok((inner(&j, &j, p), inner(&dj, &dj, p), inner(&dj, &v, p)))
}

/// `<j, V>` by quadrature; zero by parity.
pub fn parity_product(k: f64, m: usize) -> Result<f64> {
    let g = xi_grid(k, m)?;
    let km = modulus(k)?;
    let j = g.sample(|x| jacobi(x, km).sn);
    let v: Vec<f64> = g
        .nodes()
        .iter()
        .map(|&x| eval_v(x, k))
        .collect::<Result<_>>()?;
    Ok(inner(&j, &v, g.period()))
}

/// Angle between the grid vectors `LL- V` and `MM- V`.
pub fn proportionality_angle(k: f64, m: usize) -> Result<f64> {
    let (a, _) = identity_sides(&Identity::LminusV, k, m)?;
    let (b, _) = identity_sides(&Identity::MminusV, k, m)?;
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let cos = (dot.abs() / (na * nb)).min(1.0);
    // acos loses half the digits near 1; use the sine of the angle instead.
    let cross = na * na * nb * nb - dot * dot;
    Ok((cross.max(0.0).sqrt() / (na * nb)).atan2(cos))
}

/// `mu''(0)` from the closed-form norms and the resolvent identity
/// `(MM- - c (1 + k^2) LL-)^{-1} j' = V / D`; no linear solve.
pub fn mu_from_appendix(w: &WaveFamily, c: f64) -> Result<f64> {
    w.require_periodic()?;
    if !(c >= 1.0) {
        return Err(domain("c", c, "c >= 1"));
    }
    let k = w.k();
    let (n1, n2, n3) = norms(k)?;
    let r = ratio(k)?;
    let s = 1.0 + k * k;
    let d = 4.0 * k * k + 2.0 * (c - 2.0) * s * (1.0 - r);
    let ell = w.ell();
    let g2 = (c - 2.0).powi(2);
    Ok(2.0 * ell * ell / n1 * (-4.0 * g2 * s * n3 / d + 3.0 * n2 / s + (3.0 - c) * n1))
}
