//! Modulation parameters: the translation `xi` and phase `theta` with
//! `exp(i (t + theta)) psi(x + xi) = u0(x) + u(x) + i v(x)`, fixed by the
//! orthogonality conditions `<u0', u> = <u0, v> = 0`.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::field::Field;
use crate::error::{Error, Result};
use crate::spectral::{derivative_real, h2_norm_sq, inner, shift};
use crate::wave::{profile_derivatives, WaveFamily};

const MAX_NEWTON: usize = 50;
/// Newton stops once the update is below this.
const STEP_TOL: f64 = 1e-14;
/// Largest accepted `||u + iv|| / ||u0||` in `L^2`.
pub const TUBE_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Serialize)]
pub struct ModulationFit {
    pub xi: f64,
    /// Phase in `[0, 2 pi)`.
    pub theta: f64,
    /// Phase as produced by Newton from the guess, before wrapping.
    pub theta_raw: f64,
    /// Real part of the perturbation on the field's grid.
    pub u: Vec<f64>,
    /// Imaginary part of the perturbation.
    pub v: Vec<f64>,
    pub period: f64,
    /// Norm of the orthogonality conditions at the solution.
    pub residual: f64,
    pub iterations: usize,
}

impl ModulationFit {
    /// `||u + i v||_{H^2}`.
    pub fn distance(&self) -> f64 {
        let z: Vec<C64> = self
            .u
            .iter()
            .zip(&self.v)
            .map(|(&a, &b)| C64::new(a, b))
            .collect();
        h2_norm_sq(&z, self.period).sqrt()
    }
}

struct Shifted {
    u0: Vec<f64>,
    du0: Vec<f64>,
    ddu0: Vec<f64>,
}

fn sample_shifted(w: &WaveFamily, nodes: &[f64], xi: f64) -> Shifted {
    let mut s = Shifted {
        u0: Vec::with_capacity(nodes.len()),
        du0: Vec::with_capacity(nodes.len()),
        ddu0: Vec::with_capacity(nodes.len()),
    };
    for &x in nodes {
        let (a, b, c) = profile_derivatives(w, x - xi);
        s.u0.push(a);
        s.du0.push(b);
        s.ddu0.push(c);
    }
    s
}

/// Newton iteration on `f(xi, theta) = [<u0'(. - xi), Re z>, <u0(. - xi), Im z>]`
/// with `z = exp(i (t + theta)) psi`, started from `guess`.
pub fn fit_modulation(
    psi: &Field,
    w: &WaveFamily,
    t: f64,
    guess: (f64, f64),
) -> Result<ModulationFit> {
    w.require_periodic()?;
    let g = psi.grid();
    let p = g.period();
    let (mut xi, mut theta) = guess;
    let mut converged = None;
    for it in 0..MAX_NEWTON {
        let rot = C64::from_polar(1.0, t + theta);
        let re: Vec<f64> = psi.values().iter().map(|z| (rot * z).re).collect();
        let im: Vec<f64> = psi.values().iter().map(|z| (rot * z).im).collect();
        let s = sample_shifted(w, g.nodes(), xi);
        let f1 = inner(&s.du0, &re, p);
        let f2 = inner(&s.u0, &im, p);
        let j11 = -inner(&s.ddu0, &re, p);
        let j12 = -inner(&s.du0, &im, p);
        let j21 = -inner(&s.du0, &im, p);
        let j22 = inner(&s.u0, &re, p);
        let det = j11 * j22 - j12 * j21;
        let scale = inner(&s.du0, &s.du0, p) * inner(&s.u0, &s.u0, p);
        if !(det.abs() > 1e-10 * scale) {
            return Err(Error::DegenerateFit);
        }
        let dxi = (f1 * j22 - f2 * j12) / det;
        let dth = (j11 * f2 - j21 * f1) / det;
        xi -= dxi;
        theta -= dth;
        if !(xi.is_finite() && theta.is_finite()) {
            break;
        }
        if dxi.abs().max(dth.abs()) < STEP_TOL * (1.0 + xi.abs()) {
            converged = Some(it + 1);
            break;
        }
    }
    let Some(iterations) = converged else {
        return Err(Error::OutsideTube(format!(
            "Newton did not converge in {MAX_NEWTON} iterations"
        )));
    };

    let rot = C64::from_polar(1.0, t + theta);
    let z: Vec<C64> = psi.values().iter().map(|v| rot * v).collect();
    let z = shift(&z, p, xi);
    let base = sample_shifted(w, g.nodes(), 0.0);
    let u: Vec<f64> = z.iter().zip(&base.u0).map(|(z, a)| z.re - a).collect();
    let v: Vec<f64> = z.iter().map(|z| z.im).collect();
    let residual = inner(&base.du0, &u, p).hypot(inner(&base.u0, &v, p));

    let dist2 = inner(&u, &u, p) + inner(&v, &v, p);
    let ref2 = inner(&base.u0, &base.u0, p);
    if dist2 > TUBE_RADIUS * TUBE_RADIUS * ref2 {
        return Err(Error::OutsideTube(format!(
            "relative L2 distance {:.3e} exceeds {TUBE_RADIUS}",
            (dist2 / ref2).sqrt()
        )));
    }
    Ok(ModulationFit {
        xi,
        theta: theta.rem_euclid(TAU),
        theta_raw: theta,
        u,
        v,
        period: p,
        residual,
        iterations,
    })
}

/// `(xi', theta')` from the 2x2 system obtained by projecting the
/// perturbation equations onto `u0'` and `u0`.
pub fn modulation_rates(fit: &ModulationFit, w: &WaveFamily) -> Result<(f64, f64)> {
    w.require_periodic()?;
    let p = fit.period;
    let m = fit.u.len();
    let nodes: Vec<f64> = (0..m).map(|j| j as f64 * p / m as f64).collect();
    let s = sample_shifted(w, &nodes, 0.0);
    let (u, v) = (&fit.u, &fit.v);
    let ux = derivative_real(u, p, 1);
    let vx = derivative_real(v, p, 1);
    let uxx = derivative_real(u, p, 2);
    let vxx = derivative_real(v, p, 2);

    let mut lm_v = Vec::with_capacity(m);
    let mut lp_u = Vec::with_capacity(m);
    let mut n1 = Vec::with_capacity(m);
    let mut n2 = Vec::with_capacity(m);
    for j in 0..m {
        let a = s.u0[j];
        lm_v.push(-vxx[j] + (a * a - 1.0) * v[j]);
        lp_u.push(-uxx[j] + (3.0 * a * a - 1.0) * u[j]);
        let r2 = u[j] * u[j] + v[j] * v[j];
        n1.push((2.0 * a * u[j] + r2) * v[j]);
        n2.push((3.0 * a * u[j] + r2) * u[j] + a * v[j] * v[j]);
    }
    let b11 = -inner(&s.du0, &s.du0, p) - inner(&s.du0, &ux, p);
    let b12 = inner(&s.du0, v, p);
    let b21 = inner(&s.u0, &vx, p);
    let b22 = inner(&s.u0, &s.u0, p) + inner(&s.u0, u, p);
    let r1 = inner(&s.du0, &lm_v, p) + inner(&s.du0, &n1, p);
    let r2 = inner(&s.u0, &lp_u, p) + inner(&s.u0, &n2, p);
    let det = b11 * b22 - b12 * b21;
    if !(det.abs() > 1e-12 * b11.abs() * b22.abs()) {
        return Err(Error::Singular("modulation matrix B"));
    }
    Ok(((r1 * b22 - b12 * r2) / det, (b11 * r2 - b21 * r1) / det))
}
