//! The stability interval `(c-, c+)` and the curvature `mu''(0)` of the band
//! of `P-(c, kappa)` that passes through zero at `kappa = 0`.

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;

use super::assembly::{assemble, OperatorKind};
use crate::error::{domain, Error, Result};
use crate::spectral::{to_complex, Grid};
use crate::wave::{profile, profile_derivatives, WaveFamily};

/// Minimum gap between the kernel and the rest of the spectrum.
pub const KERNEL_GAP: f64 = 1e-6;

/// Exact interval `c = 2 -+ 2k/(1 + k^2)`, evaluated as `2 -+ sqrt(1 - ee^2)`.
pub fn c_interval_exact(w: &WaveFamily) -> (f64, f64) {
    let ee = w.ee();
    let r = ((1.0 - ee) * (1.0 + ee)).sqrt();
    (2.0 - r, 2.0 + r)
}

fn curvature_inputs(w: &WaveFamily, c: f64) -> Result<(f64, f64, f64)> {
    w.require_periodic()?;
    if !(c >= 1.0) {
        return Err(domain("c", c, "c >= 1"));
    }
    let k = w.k();
    if k == 0.0 {
        return Err(domain("ee", w.ee(), "0 < ee < 1 (nontrivial wave)"));
    }
    Ok((k, w.complete_e() / w.complete_k(), w.ell()))
}

/// Closed-form `mu''(0)`.
pub fn mu_curvature_explicit(w: &WaveFamily, c: f64) -> Result<f64> {
    let (k, r, ell) = curvature_inputs(w, c)?;
    let k2 = k * k;
    let g = c - 2.0;
    let s = 1.0 + k2;
    let num = 2.0 * ell * ell * k2 * (4.0 * k2 - g * g * s * s);
    let den = s * (1.0 - r) * (2.0 * k2 + g * s * (1.0 - r));
    Ok(num / den)
}

/// Solve `A x = b` subject to `<u, x> = 0`, where `u` spans the numerical
/// kernel of the Hermitian matrix `A`. A Householder reflector maps `u` to
/// the first unit vector; the remaining `(n-1)`-dimensional block is solved
/// by LU. The component of `b` along `u` is removed first.
pub fn solve_deflated(a: MatRef<'_, C64>, u: &[C64], b: &[C64]) -> Result<Vec<C64>> {
    let n = a.nrows();
    let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let u: Vec<C64> = u.iter().map(|z| z / nu).collect();
    let ub: C64 = u.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let b: Vec<C64> = b.iter().zip(&u).map(|(y, x)| y - ub * x).collect();

    let phase = if u[0].norm() > 0.0 {
        u[0] / u[0].norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let mut v = u.clone();
    v[0] += phase;
    let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let reflect = |x: &[C64]| -> Vec<C64> {
        let d: C64 = v.iter().zip(x).map(|(p, q)| p.conj() * q).sum();
        let f = 2.0 * d / vv;
        x.iter().zip(&v).map(|(q, p)| q - f * p).collect()
    };

    // B = H A H, built column by column.
    let mut ha = Mat::<C64>::zeros(n, n);
    for j in 0..n {
        let col: Vec<C64> = a.col(j).iter().copied().collect();
        let hc = reflect(&col);
        for i in 0..n {
            ha[(i, j)] = hc[i];
        }
    }
    let mut sub = Mat::<C64>::zeros(n - 1, n - 1);
    for i in 0..n {
        let row: Vec<C64> = ha.row(i).iter().map(|z| z.conj()).collect();
        let hr = reflect(&row);
        if i == 0 {
            continue;
        }
        for j in 1..n {
            sub[(i - 1, j - 1)] = hr[j].conj();
        }
    }
    let hb = reflect(&b);
    let rhs = Mat::<C64>::from_fn(n - 1, 1, |i, _| hb[i + 1]);
    let y = sub.partial_piv_lu().solve(&rhs);
    let mut full = vec![C64::new(0.0, 0.0); n];
    for i in 1..n {
        full[i] = y[(i - 1, 0)];
    }
    if full.iter().any(|z| !z.is_finite()) {
        return Err(Error::Singular("deflated solve"));
    }
    Ok(reflect(&full))
}

/// `mu''(0)` from the bracket formula with a constrained numerical solve on
/// the `z` grid.
pub fn mu_curvature_numeric(w: &WaveFamily, c: f64, g: &Grid) -> Result<f64> {
    w.require_periodic()?;
    let op = assemble(OperatorKind::Pminus, w, c, 0.0, g)?;
    let eig = op.eigen()?;
    let mut order: Vec<usize> = (0..eig.len()).collect();
    order.sort_by(|&i, &j| eig.values[i].abs().total_cmp(&eig.values[j].abs()));
    let second = eig.values[order[1]].abs();
    if second <= KERNEL_GAP {
        return Err(Error::DegenerateKernel { second });
    }
    let kernel = eig.vector(order[0]);

    let ell = w.ell();
    let spec = op.operator();
    let uu = spec.to_modes(&to_complex(&g.sample(|z| profile(w, z / ell))))?;
    let du = spec.to_modes(&to_complex(
        &g.sample(|z| profile_derivatives(w, z / ell).1 / ell),
    ))?;
    let wsol = solve_deflated(spec.modes(), &kernel, &du)?;

    let dot =
        |a: &[C64], b: &[C64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum() };
    let nu = dot(&uu, &uu);
    let ndu = dot(&du, &du);
    let duw = dot(&du, &wsol);
    let (l2, l4) = (ell * ell, ell.powi(4));
    let g2 = (c - 2.0).powi(2);
    Ok(2.0 / nu * (-4.0 * l4 * g2 * duw + 3.0 * l4 * ndu + (3.0 - c) * l2 * nu))
}

/// Second-difference estimate of `mu''(0)` from the band through zero,
/// Richardson-extrapolated from steps `h` and `2h`.
pub fn mu_curvature_from_band(w: &WaveFamily, c: f64, g: &Grid, h: f64) -> Result<f64> {
    let kernel = {
        let op = assemble(OperatorKind::Pminus, w, c, 0.0, g)?;
        let e = op.eigen()?;
        let j = (0..e.len())
            .min_by(|&i, &j| e.values[i].abs().total_cmp(&e.values[j].abs()))
            .expect("nonempty spectrum");
        (e.values[j], e.vector(j))
    };
    let mu = |kappa: f64| -> Result<f64> {
        if kappa == 0.0 {
            return Ok(kernel.0);
        }
        let e = assemble(OperatorKind::Pminus, w, c, kappa, g)?.eigen()?;
        let j = (0..e.len())
            .max_by(|&a, &b| {
                let oa: C64 = kernel
                    .1
                    .iter()
                    .zip(e.vectors.col(a).iter())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let ob: C64 = kernel
                    .1
                    .iter()
                    .zip(e.vectors.col(b).iter())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                oa.norm().total_cmp(&ob.norm())
            })
            .expect("nonempty spectrum");
        Ok(e.values[j])
    };
    let m0 = mu(0.0)?;
    let d = |s: f64| -> Result<f64> { Ok((mu(s)? - 2.0 * m0 + mu(-s)?) / (s * s)) };
    let (d1, d2) = (d(h)?, d(2.0 * h)?);
    Ok((4.0 * d1 - d2) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::family_from_ee;

    #[test]
    fn interval_values() {
        let w = family_from_ee(0.8).unwrap();
        assert_eq!(c_interval_exact(&w), (1.4, 2.6));
        assert_eq!(c_interval_exact(&family_from_ee(0.0).unwrap()), (1.0, 3.0));
        let ee = 1.0 - 1e-6;
        let a = (1.0f64 - ee).sqrt();
        let (lo, hi) = c_interval_exact(&family_from_ee(ee).unwrap());
        assert!((2.0 - lo) <= 2f64.sqrt() * a * 1.01 && (2.0 - lo) >= 2f64.sqrt() * a * 0.99);
        assert!((hi - 2.0) <= 2f64.sqrt() * a * 1.01);
        for i in 1..50 {
            let w = family_from_ee(i as f64 / 50.0).unwrap();
            let (lo, hi) = c_interval_exact(&w);
            let k = w.k();
            assert!((lo - (2.0 - 2.0 * k / (1.0 + k * k))).abs() < 1e-14);
            assert!((1.0..2.0).contains(&lo) && 2.0 < hi && hi <= 3.0);
        }
    }

    #[test]
    fn explicit_sign_pattern() {
        let w = family_from_ee(0.5).unwrap();
        let (lo, hi) = c_interval_exact(&w);
        assert!(mu_curvature_explicit(&w, hi).unwrap().abs() < 1e-12);
        assert!(mu_curvature_explicit(&w, lo).unwrap().abs() < 1e-12);
        assert!(mu_curvature_explicit(&w, 2.0).unwrap() > 0.0);
        assert!(mu_curvature_explicit(&family_from_ee(0.8).unwrap(), 2.9).unwrap() < 0.0);
        assert!(mu_curvature_explicit(&w, 0.9).is_err());
    }

    #[test]
    fn numeric_matches_explicit() {
        let g = Grid::bloch(128).unwrap();
        for &(ee, c) in &[(0.5, 2.0), (0.2, 1.5)] {
            let w = family_from_ee(ee).unwrap();
            let ex = mu_curvature_explicit(&w, c).unwrap();
            let nu = mu_curvature_numeric(&w, c, &g).unwrap();
            assert!(((nu - ex) / ex).abs() < 1e-6, "{ee} {c}: {nu} vs {ex}");
        }
    }

    #[test]
    fn band_fit_matches_explicit() {
        let g = Grid::bloch(128).unwrap();
        let w = family_from_ee(0.5).unwrap();
        let ex = mu_curvature_explicit(&w, 2.0).unwrap();
        let fd = mu_curvature_from_band(&w, 2.0, &g, 1e-3).unwrap();
        assert!(((fd - ex) / ex).abs() < 1e-4, "{fd} vs {ex}");
    }
}
