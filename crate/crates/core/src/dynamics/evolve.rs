//! Split-step Fourier integration of `i psi_t + psi_xx - |psi|^2 psi = 0`.
//!
//! The linear flow `exp(-i k^2 t)` is exact in Fourier space and the
//! nonlinear flow `exp(-i |psi|^2 t)` is exact pointwise, because it leaves
//! `|psi|` unchanged. Strang splitting composes them symmetrically; the
//! default scheme composes three Strang steps with the fourth-order
//! triple-jump weights.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::Fft;
use serde::Serialize;

use super::field::Field;
use crate::error::{Error, Result};
use crate::spectral::{fft_mode, plans};

/// Largest accepted `dt * kmax^2`, the linear phase advance of the highest
/// mode in one step.
pub const MAX_LINEAR_PHASE: f64 = 100.0;

/// Steps between finiteness checks.
const CHECK_EVERY: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Scheme {
    /// Second order, one linear solve per step.
    Strang,
    /// Fourth order, three linear solves per step.
    #[default]
    Yoshida4,
}

impl Scheme {
    fn weights(self) -> Vec<f64> {
        match self {
            Scheme::Strang => vec![1.0],
            Scheme::Yoshida4 => {
                let c = 2f64.cbrt();
                let w1 = 1.0 / (2.0 - c);
                vec![w1, -c * w1, w1]
            }
        }
    }
}

/// `exp(i phi)` with the floating-point neighbour of `(cos, sin)` whose
/// squared modulus is closest to one. The linear propagators are applied
/// thousands of times, so a fixed rounding bias in their modulus would show
/// up as a steady drift of the charge.
fn unit_phase(phi: f64) -> C64 {
    let (s, c) = phi.sin_cos();
    let defect = |c: f64, s: f64| c.mul_add(c, s.mul_add(s, -1.0)).abs();
    let mut best = (defect(c, s), c, s);
    for dc in [-1i64, 0, 1] {
        for ds in [-1i64, 0, 1] {
            let (c2, s2) = (nudge(c, dc), nudge(s, ds));
            let d = defect(c2, s2);
            if d < best.0 {
                best = (d, c2, s2);
            }
        }
    }
    C64::new(best.1, best.2)
}

/// Moves `x` by `steps` units in the last place.
fn nudge(x: f64, steps: i64) -> f64 {
    match steps.cmp(&0) {
        std::cmp::Ordering::Equal => x,
        std::cmp::Ordering::Greater => x.next_up(),
        std::cmp::Ordering::Less => x.next_down(),
    }
}

/// Precomputed propagators for a fixed grid, step and scheme.
pub struct Integrator {
    m: usize,
    /// Nonlinear sub-step lengths, one more than the linear ones.
    kicks: Vec<f64>,
    /// Linear propagators in FFT order.
    drifts: Vec<Vec<C64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
    steps_done: usize,
}

impl Integrator {
    pub fn new(m: usize, period: f64, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(crate::error::domain("dt", dt, "dt > 0"));
        }
        let kmax = std::f64::consts::PI * m as f64 / period;
        let phase = dt * kmax * kmax;
        if phase > MAX_LINEAR_PHASE {
            return Err(Error::StepTooLarge {
                value: phase,
                limit: MAX_LINEAR_PHASE,
            });
        }
        let w = scheme.weights();
        let mut kicks = Vec::with_capacity(w.len() + 1);
        kicks.push(0.5 * w[0] * dt);
        for pair in w.windows(2) {
            kicks.push(0.5 * (pair[0] + pair[1]) * dt);
        }
        kicks.push(0.5 * w[w.len() - 1] * dt);
        let inv_m = 1.0 / m as f64;
        let drifts = w
            .iter()
            .map(|&wi| {
                (0..m)
                    .map(|i| {
                        let k = std::f64::consts::TAU / period * fft_mode(i, m) as f64;
                        unit_phase(-k * k * wi * dt) * inv_m
                    })
                    .collect()
            })
            .collect();
        let (fwd, inv) = plans(m);
        let scratch = vec![
            C64::new(0.0, 0.0);
            fwd.get_inplace_scratch_len()
                .max(inv.get_inplace_scratch_len())
        ];
        Ok(Self {
            m,
            kicks,
            drifts,
            fwd,
            inv,
            scratch,
            steps_done: 0,
        })
    }

    /// Pointwise rotation by `-|z|^2 tau`. For a standing wave the angles
    /// repeat every step, so the rotated value is rescaled to the old
    /// modulus to stop the rounding of `cos` and `sin` from compounding.
    fn kick(psi: &mut [C64], tau: f64) {
        for z in psi.iter_mut() {
            let r2 = z.norm_sqr();
            let rotated = *z * C64::from_polar(1.0, -r2 * tau);
            let s2 = rotated.norm_sqr();
            *z = if s2 > 0.0 {
                rotated * (r2 / s2).sqrt()
            } else {
                rotated
            };
        }
    }

    /// Advance `psi` by `steps` steps in place.
    pub fn advance(&mut self, psi: &mut [C64], steps: usize) -> Result<()> {
        if psi.len() != self.m {
            return Err(Error::GridMismatch {
                expected: self.m,
                got: psi.len(),
            });
        }
        for s in 0..steps {
            Self::kick(psi, self.kicks[0]);
            for (drift, &tau) in self.drifts.iter().zip(&self.kicks[1..]) {
                self.fwd.process_with_scratch(psi, &mut self.scratch);
                psi.iter_mut().zip(drift).for_each(|(z, d)| *z *= d);
                self.inv.process_with_scratch(psi, &mut self.scratch);
                Self::kick(psi, tau);
            }
            self.steps_done += 1;
            let check = (s + 1) % CHECK_EVERY == 0 || s + 1 == steps;
            if check && psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite {
                    step: self.steps_done,
                });
            }
        }
        Ok(())
    }
}

/// `steps` steps of size `dt` with the default fourth-order scheme.
pub fn evolve(psi0: &Field, dt: f64, steps: usize) -> Result<Field> {
    evolve_with(psi0, dt, steps, Scheme::default())
}

pub fn evolve_with(psi0: &Field, dt: f64, steps: usize, scheme: Scheme) -> Result<Field> {
    if steps == 0 {
        return Err(crate::error::domain("steps", 0.0, "steps >= 1"));
    }
    let mut it = Integrator::new(psi0.m(), psi0.period(), dt, scheme)?;
    let mut out = psi0.clone();
    it.advance(out.values_mut(), steps)?;
    Ok(out)
}
