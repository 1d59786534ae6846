//! Floquet-Bloch spectrum of the linearised NLS flow `JL = [[0, L-], [-L+, 0]]`.
//!
//! At `kappa = 0` the operator has a four-dimensional generalised kernel made
//! of two Jordan chains, `(0, V) -> (u0', 0)` and `(U, 0) -> (0, -u0)`, where
//! `L+ U = u0` and `L- V = u0'`. A general eigensolver perturbs a defective
//! zero eigenvalue by about `sqrt(eps ||JL||)`, so that subspace is deflated
//! explicitly and only the complementary block goes to the eigensolver.

use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::assembly::{assemble, OperatorKind, SpectralOperator};
use super::curvature::solve_deflated;
use crate::eigen::general_eigenvalues;
use crate::error::Result;
use crate::spectral::{to_complex, Grid};
use crate::wave::{profile, profile_derivatives, WaveFamily};

/// Per-`kappa` outcome of the stability check.
#[derive(Debug, Clone, Serialize)]
pub struct StabilitySlice {
    pub kappa: f64,
    pub max_abs_re: f64,
    /// `||Q2^H JL Q1||` for the deflated subspace; zero when nothing was deflated.
    pub deflation_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub slices: Vec<StabilitySlice>,
    pub max_abs_re: f64,
}

fn block_operator(lp: &SpectralOperator, lm: &SpectralOperator) -> Mat<C64> {
    let m = lp.m();
    let (a, b) = (lm.modes(), lp.modes());
    Mat::<C64>::from_fn(2 * m, 2 * m, |i, j| match (i < m, j < m) {
        (true, false) => a[(i, j - m)],
        (false, true) => -b[(i - m, j)],
        _ => C64::new(0.0, 0.0),
    })
}

/// Eigenvalues of `JL` at one Bloch number, with the generalised kernel
/// removed at `kappa = 0` for a nontrivial wave. Returns the eigenvalues and
/// the deflation residual.
pub fn jl_eigenvalues(w: &WaveFamily, g: &Grid, kappa: f64) -> Result<(Vec<C64>, f64)> {
    let lp = assemble(OperatorKind::Lplus, w, 0.0, kappa, g)?;
    let lm = assemble(OperatorKind::Lminus, w, 0.0, kappa, g)?;
    let (lp, lm) = (lp.operator(), lm.operator());
    let jl = block_operator(lp, lm);
    if kappa != 0.0 || w.amp() == 0.0 {
        return Ok((general_eigenvalues(jl.as_ref())?, 0.0));
    }

    let m = lp.m();
    let u0 = lp.to_modes(&to_complex(&g.sample(|x| profile(w, x))))?;
    let du0 = lp.to_modes(&to_complex(&g.sample(|x| profile_derivatives(w, x).1)))?;
    let big_u = solve_deflated(lp.modes(), &du0, &u0)?;
    let big_v = solve_deflated(lm.modes(), &u0, &du0)?;
    let zero = vec![C64::new(0.0, 0.0); m];
    let stack = |a: &[C64], b: &[C64]| -> Vec<C64> { a.iter().chain(b).copied().collect() };
    let basis = [
        stack(&du0, &zero),
        stack(&zero, &u0),
        stack(&big_u, &zero),
        stack(&zero, &big_v),
    ];
    let a = Mat::<C64>::from_fn(2 * m, 4, |i, j| basis[j][i]);
    let q = a.qr().compute_Q();
    let t = q.adjoint() * &jl * &q;
    let n = 2 * m;
    let t22 = t.submatrix(4, 4, n - 4, n - 4).to_owned();
    let t21 = t.submatrix(4, 0, n - 4, 4);
    let mut res: f64 = 0.0;
    for j in 0..4 {
        for i in 0..n - 4 {
            res = res.max(t21[(i, j)].norm());
        }
    }
    let mut ev = general_eigenvalues(t22.as_ref())?;
    ev.extend(std::iter::repeat_n(C64::new(0.0, 0.0), 4));
    Ok((ev, res))
}

/// Maximum `|Re lambda|` of the `JL` spectrum over the given Bloch numbers.
/// `g` is an `x` grid on a whole number of wave periods.
pub fn spectral_stability_check(
    w: &WaveFamily,
    g: &Grid,
    kappas: &[f64],
) -> Result<StabilityReport> {
    let slices: Vec<StabilitySlice> = kappas
        .par_iter()
        .map(|&kappa| {
            let (ev, res) = jl_eigenvalues(w, g, kappa)?;
            let max_abs_re = ev.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
            Ok(StabilitySlice {
                kappa,
                max_abs_re,
                deflation_residual: res,
            })
        })
        .collect::<Result<_>>()?;
    let max_abs_re = slices.iter().map(|s| s.max_abs_re).fold(0.0, f64::max);
    Ok(StabilityReport { slices, max_abs_re })
}

/// Largest principal-angle sine between the numerical null space of `JL`
/// at `kappa = 0` and `span{(u0', 0), (0, u0)}`. Also returns the dimension
/// of the null space (singular values below `tol * sigma_max`).
pub fn jl_kernel_alignment(w: &WaveFamily, g: &Grid, tol: f64) -> Result<(usize, f64)> {
    let lp = assemble(OperatorKind::Lplus, w, 0.0, 0.0, g)?;
    let lm = assemble(OperatorKind::Lminus, w, 0.0, 0.0, g)?;
    let (lp, lm) = (lp.operator(), lm.operator());
    let jl = block_operator(lp, lm);
    let svd = jl
        .thin_svd()
        .map_err(|e| crate::error::Error::Eigensolver(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let n = s.nrows();
    let smax = s[0].re;
    let dim = (0..n).filter(|&i| s[i].re < tol * smax).count();
    let m = lp.m();
    let u0 = lp.to_modes(&to_complex(&g.sample(|x| profile(w, x))))?;
    let du0 = lp.to_modes(&to_complex(&g.sample(|x| profile_derivatives(w, x).1)))?;
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let (nu, ndu) = (norm(&u0), norm(&du0));
    let v = svd.V();
    let mut worst: f64 = 0.0;
    for k in n - dim..n {
        let col: Vec<C64> = v.col(k).iter().copied().collect();
        // Components along the two (orthogonal) reference vectors.
        let a: C64 = du0
            .iter()
            .zip(&col[..m])
            .map(|(x, y)| x.conj() * y)
            .sum::<C64>()
            / ndu;
        let b: C64 = u0
            .iter()
            .zip(&col[m..])
            .map(|(x, y)| x.conj() * y)
            .sum::<C64>()
            / nu;
        let inside = a.norm_sqr() + b.norm_sqr();
        worst = worst.max((1.0 - inside).max(0.0).sqrt());
    }
    Ok((dim, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::bands::brillouin_grid;
    use crate::wave::family_from_ee;

    #[test]
    fn zero_wave_dispersion_relation() {
        let w = WaveFamily::zero_wave();
        let g = Grid::new(32, std::f64::consts::TAU).unwrap();
        let kappa = 0.25;
        let (ev, _) = jl_eigenvalues(&w, &g, kappa).unwrap();
        let mut got: Vec<f64> = ev.iter().map(|z| z.im).collect();
        got.sort_by(f64::total_cmp);
        let mut expect: Vec<f64> = (-16i64..16)
            .flat_map(|n| {
                let x = n as f64 + kappa;
                let v = x * x - 1.0;
                [v, -v]
            })
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!(ev.iter().all(|z| z.re.abs() < 1e-9));
    }

    #[test]
    fn periodic_wave_is_spectrally_stable() {
        let w = family_from_ee(0.5).unwrap();
        let g = Grid::for_wave(&w, 1, 64).unwrap();
        let r = spectral_stability_check(&w, &g, &brillouin_grid(5)).unwrap();
        assert!(r.max_abs_re < 1e-7, "{}", r.max_abs_re);
        assert!(r.slices.iter().all(|s| s.deflation_residual < 1e-8));
    }

    #[test]
    fn kernel_spans_symmetry_modes() {
        let w = family_from_ee(0.5).unwrap();
        let g = Grid::for_wave(&w, 1, 64).unwrap();
        let (dim, angle) = jl_kernel_alignment(&w, &g, 1e-10).unwrap();
        assert_eq!(dim, 2);
        assert!(angle < 1e-6, "{angle}");
    }
}
