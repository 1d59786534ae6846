//! Small-amplitude model near the zero wave.
//!
//! For `ee = 1 - a^2` the two Floquet-Bloch bands of `P+-(c, kappa)` that
//! touch zero at `a = 0` (Fourier modes `n = +-1`) are described to
//! `O(a^4)` by a 2x2 matrix perturbation of the constant-coefficient
//! dispersion `lambda_n(kappa) = (kappa + n)^4 - c (kappa + n)^2 + c - 1`.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::linops::{assemble, brillouin_grid, mu_curvature_numeric, OperatorKind};
use crate::output::Table;
use crate::spectral::Grid;
use crate::wave::family_from_ee;

/// Largest amplitude the expansion is trusted for.
pub const MAX_AMPLITUDE: f64 = 0.3;

/// Which operator the model approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallAmpParams {
    pub a: f64,
    /// `c - 2`.
    pub gamma: f64,
    pub kappa: f64,
}

impl SmallAmpParams {
    pub fn new(a: f64, c: f64, kappa: f64) -> Result<Self> {
        if !(0.0..=MAX_AMPLITUDE).contains(&a) {
            return Err(domain("a", a, "0 <= a <= 0.3"));
        }
        if !kappa.is_finite() || !c.is_finite() {
            return Err(domain("kappa", kappa, "finite kappa and c"));
        }
        Ok(Self {
            a,
            gamma: c - 2.0,
            kappa,
        })
    }

    pub fn c(&self) -> f64 {
        2.0 + self.gamma
    }

    /// The wave parameter the expansion corresponds to.
    pub fn ee(&self) -> f64 {
        1.0 - self.a * self.a
    }
}

/// Constant-coefficient band `n` at Bloch number `kappa`.
pub fn lambda0(n: i64, kappa: f64, c: f64) -> f64 {
    let x = kappa + n as f64;
    let x2 = x * x;
    x2 * x2 - c * x2 + c - 1.0
}

/// `A = diag(lambda_1, lambda_-1) + a^2 G(kappa)`, first row and column
/// belonging to `n = +1`.
pub fn matrix_model(sign: Sign, p: &SmallAmpParams) -> [[f64; 2]; 2] {
    let (c, k, a2) = (p.c(), p.kappa, p.a * p.a);
    let diag = |s: f64| {
        let x2 = (k + s) * (k + s);
        let g = match sign {
            Sign::Minus => -1.5 * x2 * x2 + 0.75 * c * x2 + 0.5 * (1.0 - c) + 1.5 * x2,
            Sign::Plus => -1.5 * x2 * x2 + 0.75 * c * x2 + 1.5 * (1.0 - c) + 2.5 * x2,
        };
        lambda0(s as i64, k, c) + a2 * g
    };
    let off = a2
        * match sign {
            Sign::Minus => 0.25 * (1.0 - c) + 0.75 * (k * k - 1.0),
            Sign::Plus => 0.75 * (5.0 - c) + 1.25 * (k * k - 1.0),
        };
    [[diag(1.0), off], [off, diag(-1.0)]]
}

fn eig2(m: [[f64; 2]; 2]) -> (f64, f64) {
    let half_tr = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let r = half_diff.hypot(m[0][1]);
    (half_tr + r, half_tr - r)
}

/// Model eigenvalues `(lambda_+1, lambda_-1)`, largest first.
///
/// For `P-` the gauge mode forces `lambda_-1(0) = 0` exactly, so the
/// `kappa`-independent offset of the truncated matrix is removed from the
/// lower branch. No such correction is applied for `P+`.
pub fn band_expansion(sign: Sign, p: &SmallAmpParams) -> (f64, f64) {
    let (hi, lo) = eig2(matrix_model(sign, p));
    match sign {
        Sign::Plus => (hi, lo),
        Sign::Minus => {
            let at_zero = SmallAmpParams { kappa: 0.0, ..*p };
            let mu = eig2(matrix_model(sign, &at_zero)).1;
            (hi, lo - mu)
        }
    }
}

/// `c-+ = 2 -+ sqrt(2) a`.
pub fn c_bounds_asymptotic(a: f64) -> (f64, f64) {
    (2.0 - SQRT_2 * a, 2.0 + SQRT_2 * a)
}

/// Second derivative at `kappa = 0` of the model's lower `P-` branch.
pub fn model_curvature(a: f64, c: f64) -> Result<f64> {
    let h = 1e-4;
    let lo = |k: f64| -> Result<f64> {
        Ok(band_expansion(Sign::Minus, &SmallAmpParams::new(a, c, k)?).1)
    };
    Ok((lo(h)? - 2.0 * lo(0.0)? + lo(-h)?) / (h * h))
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut flo = f(lo)?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `gamma > 0` where the model curvature of `lambda_-1` changes sign.
pub fn model_flip(a: f64) -> Result<f64> {
    bisect(0.0, 3.0 * a, |g| model_curvature(a, 2.0 + g))
}

/// `(2 - c_low, c_high - 2)` where the curvature of the lowest `P-` band at
/// `kappa = 0`, evaluated on the full operator for `ee = 1 - a^2`, changes
/// sign.
pub fn measured_flip(a: f64, g: &Grid) -> Result<(f64, f64)> {
    let w = family_from_ee(1.0 - a * a)?;
    let f = |c: f64| mu_curvature_numeric(&w, c, g);
    let up = bisect(2.0, 2.0 + 3.0 * a, f)?;
    let down = bisect(2.0, (2.0 - 3.0 * a).max(1.0), f)?;
    Ok((2.0 - down, up - 2.0))
}

/// The two eigenvalues of the full `P(c, kappa)` whose eigenvectors carry
/// the most weight on modes `n = +-1`, in descending order.
pub fn full_pair(sign: Sign, a: f64, c: f64, kappa: f64, g: &Grid) -> Result<(f64, f64)> {
    let w = family_from_ee(1.0 - a * a)?;
    let kind = match sign {
        Sign::Plus => OperatorKind::Pplus,
        Sign::Minus => OperatorKind::Pminus,
    };
    let e = assemble(kind, &w, c, kappa, g)?.eigen()?;
    let half = g.m() / 2;
    let n = e.len().min(8);
    let mut idx: Vec<(usize, f64)> = (0..n)
        .map(|j| {
            let v = e.vectors.col(j);
            (j, v[half + 1].norm_sqr() + v[half - 1].norm_sqr())
        })
        .collect();
    idx.sort_by(|x, y| y.1.total_cmp(&x.1));
    let (p, q) = (e.values[idx[0].0], e.values[idx[1].0]);
    Ok((p.max(q), p.min(q)))
}

/// Largest deviation between [`full_pair`] and [`band_expansion`] over
/// `kappas`.
pub fn oracle_deviation(sign: Sign, a: f64, c: f64, kappas: &[f64], g: &Grid) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &k in kappas {
        let (m1, m2) = band_expansion(sign, &SmallAmpParams::new(a, c, k)?);
        let (f1, f2) = full_pair(sign, a, c, k, g)?;
        worst = worst.max((m1 - f1).abs()).max((m2 - f2).abs());
    }
    Ok(worst)
}

/// Constant-coefficient bands `n = -3..=3` over the Brillouin zone.
pub fn exact_band_table(c: f64, n_kappa: usize) -> Table {
    let ns: Vec<i64> = (-3..=3).collect();
    let mut header = vec!["kappa".to_string()];
    header.extend(ns.iter().map(|n| format!("n={n}")));
    let rows = brillouin_grid(n_kappa)
        .into_iter()
        .map(|k| {
            let mut row = vec![k];
            row.extend(ns.iter().map(|&n| lambda0(n, k, c)));
            row
        })
        .collect();
    Table::new(header, rows)
}

/// `kappa, lambda_-1, lambda_+1` from the `P-` model.
pub fn model_band_table(a: f64, c: f64, n_kappa: usize) -> Result<Table> {
    let rows = brillouin_grid(n_kappa)
        .into_iter()
        .map(|k| {
            let (hi, lo) = band_expansion(Sign::Minus, &SmallAmpParams::new(a, c, k)?);
            Ok(vec![k, lo, hi])
        })
        .collect::<Result<_>>()?;
    Ok(Table::new(
        vec![
            "kappa".into(),
            "lambda_minus1".into(),
            "lambda_plus1".into(),
        ],
        rows,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispersion_values() {
        assert_eq!(lambda0(1, 0.0, 2.0), 0.0);
        assert_eq!(lambda0(0, 0.0, 2.0), 1.0);
        assert!((lambda0(-1, 0.25, 2.0) - 0.191_406_25).abs() < 1e-15);
    }

    #[test]
    fn unperturbed_matrix_is_diagonal() {
        let p = SmallAmpParams::new(0.0, 2.3, 0.17).unwrap();
        for s in [Sign::Plus, Sign::Minus] {
            let m = matrix_model(s, &p);
            assert_eq!(m[0][1], 0.0);
            assert_eq!(m[0][0], lambda0(1, 0.17, 2.3));
            assert_eq!(m[1][1], lambda0(-1, 0.17, 2.3));
        }
    }

    #[test]
    fn zero_mode_and_split_at_origin() {
        for a in [0.05, 0.1, 0.2] {
            let p = SmallAmpParams::new(a, 2.0, 0.0).unwrap();
            let (hi, lo) = band_expansion(Sign::Minus, &p);
            assert_eq!(lo, 0.0);
            assert!((hi - 2.0 * a * a).abs() < 4.0 * a.powi(4), "{a}: {hi}");
            let raw = eig2(matrix_model(Sign::Minus, &p));
            assert!(raw.1.abs() < 4.0 * a.powi(4));
        }
    }

    #[test]
    fn curvature_sign_follows_gamma() {
        let a = 0.1;
        assert!(model_curvature(a, 2.0 + 0.5 * a).unwrap() > 0.0);
        assert!(model_curvature(a, 2.0 + 2.0 * a).unwrap() < 0.0);
        let flip = model_flip(a).unwrap();
        assert!((flip / (SQRT_2 * a) - 1.0).abs() < 0.1, "{flip}");
    }

    #[test]
    fn asymptotic_bounds() {
        assert_eq!(c_bounds_asymptotic(0.0), (2.0, 2.0));
        let (lo, hi) = c_bounds_asymptotic(0.1);
        assert!((hi - 2.0 - 0.141_421_356_237_309_5).abs() < 1e-15);
        assert!((2.0 - lo - 0.141_421_356_237_309_5).abs() < 1e-15);
        for i in 1..=20 {
            let a = 0.01 * i as f64;
            let w = family_from_ee(1.0 - a * a).unwrap();
            let (elo, ehi) = crate::linops::c_interval_exact(&w);
            let (alo, ahi) = c_bounds_asymptotic(a);
            assert!((elo - alo).abs() <= 0.5 * a * a && (ehi - ahi).abs() <= 0.5 * a * a);
        }
    }

    #[test]
    fn rejects_large_amplitude() {
        assert!(SmallAmpParams::new(0.31, 2.0, 0.0).is_err());
    }

    #[test]
    fn model_tracks_full_operator() {
        let g = Grid::bloch(64).unwrap();
        let ks: Vec<f64> = (0..9).map(|i| -0.4 + 0.1 * i as f64).collect();
        for a in [0.1, 0.2] {
            let d = oracle_deviation(Sign::Minus, a, 2.0, &ks, &g).unwrap();
            assert!(d < 5.0 * a.powi(4) + 1e-8, "{a}: {d}");
        }
    }
}
