//! Quadratic forms of `K+-(c)` and their sum-of-squares representations, and
//! the intertwining identity `L- K+(c) = K-(c) L+`.

use num_complex::Complex64 as C64;

use super::assembly::{
    assemble, BlochOperator, CoefficientSpectrum, OperatorKind, SpectralOperator,
};
use crate::error::{Error, Result};
use crate::spectral::{derivative_real, integrate, to_complex, Grid};
use crate::wave::{black_soliton, profile_derivatives, WaveFamily};

/// Relative size below which `u0'` is treated as vanishing at a node.
const ZERO_DERIVATIVE_REL: f64 = 1e-8;
/// Largest sample allowed at a zero of `u0'`.
const ADMISSIBLE_TOL: f64 = 1e-10;

/// `<A f, f>` with quadrature weight `period / m`.
pub fn quadratic_form(op: &BlochOperator, f: &[C64]) -> Result<f64> {
    op.grid.check_len(f.len())?;
    op.operator().quadratic_form(f)
}

fn l2_sq(f: &[f64], period: f64) -> f64 {
    integrate(&f.iter().map(|x| x * x).collect::<Vec<_>>(), period)
}

/// `||L- v||^2 + ||u0 v_x - u0' v||^2`, which equals `<K-(2) v, v>`.
pub fn sos_k_minus(w: &WaveFamily, v: &[f64], g: &Grid) -> Result<f64> {
    w.require_periodic()?;
    g.check_len(v.len())?;
    let p = g.period();
    let vx = derivative_real(v, p, 1);
    let vxx = derivative_real(v, p, 2);
    let mut lv = Vec::with_capacity(v.len());
    let mut cross = Vec::with_capacity(v.len());
    for (j, &x) in g.nodes().iter().enumerate() {
        let (u, du, _) = profile_derivatives(w, x);
        lv.push(-vxx[j] + (u * u - 1.0) * v[j]);
        cross.push(u * vx[j] - du * v[j]);
    }
    Ok(l2_sq(&lv, p) + l2_sq(&cross, p))
}

/// `||w_x||^2 + (3 - c)||w||^2 + 2 ee^2 ||u0 w / u0'||^2` with
/// `w = u_x - (u0''/u0') u`. `u` must vanish wherever `u0'` does; at such
/// nodes the quotients are replaced by their limits `u_x / u0''` and
/// `w_x / u0''`.
pub fn k_plus_partial(w: &WaveFamily, u: &[f64], c: f64, g: &Grid) -> Result<f64> {
    w.require_periodic()?;
    g.check_len(u.len())?;
    let p = g.period();
    let derivs: Vec<(f64, f64, f64)> = g
        .nodes()
        .iter()
        .map(|&x| profile_derivatives(w, x))
        .collect();
    let scale = derivs.iter().map(|d| d.1.abs()).fold(0.0, f64::max);
    let zero = |d: &(f64, f64, f64)| d.1.abs() < ZERO_DERIVATIVE_REL * scale;
    for (j, d) in derivs.iter().enumerate() {
        if zero(d) && u[j].abs() > ADMISSIBLE_TOL {
            return Err(Error::Admissibility(format!(
                "u = {:e} at node {j} where u0' vanishes",
                u[j]
            )));
        }
    }
    let ux = derivative_real(u, p, 1);
    let wv: Vec<f64> = derivs
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let ratio = if zero(d) { ux[j] / d.2 } else { u[j] / d.1 };
            ux[j] - d.2 * ratio
        })
        .collect();
    let wx = derivative_real(&wv, p, 1);
    let q: Vec<f64> = derivs
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let ratio = if zero(d) { wx[j] / d.2 } else { wv[j] / d.1 };
            d.0 * ratio
        })
        .collect();
    let ee = w.ee();
    Ok(l2_sq(&wx, p) + (3.0 - c) * l2_sq(&wv, p) + 2.0 * ee * ee * l2_sq(&q, p))
}

/// Black-soliton check on `[-half_width, half_width)`: returns the energy
/// form of `<K+(c) u, u>` and the representation `||w_x||^2 + (3 - c)||w||^2`
/// with `w = u_x + sqrt 2 u0 u`.
pub fn k_plus_soliton_forms(
    c: f64,
    u: impl Fn(f64) -> f64,
    half_width: f64,
    m: usize,
) -> Result<(f64, f64)> {
    let g = Grid::new(m, 2.0 * half_width)?;
    let p = g.period();
    let xs: Vec<f64> = g.nodes().iter().map(|x| x - half_width).collect();
    let uv: Vec<f64> = xs.iter().map(|&x| u(x)).collect();
    let ux = derivative_real(&uv, p, 1);
    let uxx = derivative_real(&uv, p, 2);
    let mut energy = Vec::with_capacity(m);
    let mut wv = Vec::with_capacity(m);
    for (j, &x) in xs.iter().enumerate() {
        let u0 = black_soliton(x);
        let q = u0 * u0;
        let e = uxx[j].powi(2)
            + 5.0 * q * ux[j].powi(2)
            + (-5.0 * q * q + 15.0 * q - 4.0) * uv[j].powi(2)
            - c * (ux[j].powi(2) + (3.0 * q - 1.0) * uv[j].powi(2));
        energy.push(e);
        wv.push(ux[j] + std::f64::consts::SQRT_2 * u0 * uv[j]);
    }
    let wx = derivative_real(&wv, p, 1);
    let form = integrate(&energy, p);
    Ok((form, l2_sq(&wx, p) + (3.0 - c) * l2_sq(&wv, p)))
}

/// `||(L- K+(c) - K-(c) L+) f||_inf / ||f||_inf` on an `x` grid.
pub fn intertwine_residual(w: &WaveFamily, c: f64, f: &[f64], g: &Grid) -> Result<f64> {
    g.check_len(f.len())?;
    let op = |kind| assemble(kind, w, c, 0.0, g);
    let (lm, lp, kp, km) = (
        op(OperatorKind::Lminus)?,
        op(OperatorKind::Lplus)?,
        op(OperatorKind::Kplus)?,
        op(OperatorKind::Kminus)?,
    );
    let a = lm.operator().to_modes(&to_complex(f))?;
    let lhs = lm.operator().apply_modes(&kp.operator().apply_modes(&a));
    let rhs = km.operator().apply_modes(&lp.operator().apply_modes(&a));
    let diff: Vec<C64> = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
    let r = lm.operator().from_modes(&diff);
    let num = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let den = f.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(num / den)
}

/// Operator assembled for an arbitrary profile, used by the soliton check tests.
pub fn assemble_for_profile(
    kind: OperatorKind,
    ee: f64,
    c: f64,
    u0: impl Fn(f64) -> f64,
    g: &Grid,
) -> SpectralOperator {
    let spectrum = CoefficientSpectrum::new(|x| u0(x).powi(2), g.period(), g.m());
    SpectralOperator::assemble(
        &kind.symbol(ee, c),
        &spectrum,
        g.m(),
        g.period(),
        std::f64::consts::TAU / g.period(),
        0.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::{family_from_ee, profile};

    #[test]
    fn sum_of_squares_vanishes_on_gauge_mode() {
        let w = family_from_ee(0.3).unwrap();
        let g = Grid::for_wave(&w, 1, 128).unwrap();
        let u0 = g.sample(|x| profile(&w, x));
        assert!(sos_k_minus(&w, &u0, &g).unwrap().abs() < 1e-10);
        let eps = 1e-3;
        let t0 = w.t0();
        let v: Vec<f64> = g
            .nodes()
            .iter()
            .zip(&u0)
            .map(|(&x, &u)| u + eps * (std::f64::consts::PI * x / t0).sin())
            .collect();
        let s = sos_k_minus(&w, &v, &g).unwrap();
        assert!(s > 0.0 && s < 1e3 * eps * eps);
    }

    #[test]
    fn partial_form_matches_matrix() {
        let w = family_from_ee(0.6).unwrap();
        let g = Grid::for_wave(&w, 1, 128).unwrap();
        let t0 = w.t0();
        let u = g.sample(|x| profile_derivatives(&w, x).1 * (std::f64::consts::PI * x / t0).sin());
        let op = assemble(OperatorKind::Kplus, &w, 2.0, 0.0, &g).unwrap();
        let a = quadratic_form(&op, &to_complex(&u)).unwrap();
        let b = k_plus_partial(&w, &u, 2.0, &g).unwrap();
        assert!(((a - b) / a).abs() < 1e-6, "{a} vs {b}");
        let du = g.sample(|x| profile_derivatives(&w, x).1);
        assert!(k_plus_partial(&w, &du, 2.0, &g).unwrap().abs() < 1e-12);
        let bad = g.sample(|x| (x + 0.1).cos());
        assert!(matches!(
            k_plus_partial(&w, &bad, 2.0, &g),
            Err(Error::Admissibility(_))
        ));
    }

    #[test]
    fn soliton_representation() {
        let u = |x: f64| 1.0 / (0.8 * x).cosh() * (0.3 * x).sin();
        let (form, rep) = k_plus_soliton_forms(2.0, u, 30.0, 512).unwrap();
        assert!(((form - rep) / rep).abs() < 1e-4, "{form} vs {rep}");
        // Same form through the assembled operator.
        let g = Grid::new(512, 60.0).unwrap();
        let op = assemble_for_profile(
            OperatorKind::Kplus,
            0.0,
            2.0,
            |x| black_soliton(x - 30.0),
            &g,
        );
        let uv = g.sample(|x| u(x - 30.0));
        let q = op.quadratic_form(&to_complex(&uv)).unwrap();
        assert!(((q - rep) / rep).abs() < 1e-4);
    }

    #[test]
    fn intertwining_on_translation_mode() {
        let w = family_from_ee(0.5).unwrap();
        let g = Grid::for_wave(&w, 1, 128).unwrap();
        let du = g.sample(|x| profile_derivatives(&w, x).1);
        assert!(intertwine_residual(&w, 2.0, &du, &g).unwrap() < 1e-8);
    }
}
