//! Orbital-stability experiment: perturb the wave, evolve, and track the
//! modulated perturbation, the Lyapunov functional and the modulation rates.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::evolve::{Integrator, Scheme};
use super::field::{functionals, random_trig, seeded, Field};
use super::modulation::{fit_modulation, modulation_rates};
use crate::error::{domain, Result};
use crate::output::Table;
use crate::spectral::{h2_norm_sq, inner, Grid};
use crate::wave::{family_from_ee, profile_derivatives};

/// `c` of the Lyapunov functional tracked along the trajectory.
pub const LYAPUNOV_C: f64 = 2.0;
/// Largest accepted perturbation size.
pub const MAX_DELTA: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentParams {
    pub ee: f64,
    pub n_periods: usize,
    /// `H^2` norm of the initial perturbation.
    pub delta: f64,
    pub t_end: f64,
    pub dt: f64,
    pub m: usize,
    pub seed: u64,
    /// Steps between modulation fits.
    pub sample_every: usize,
    pub scheme: Scheme,
}

impl ExperimentParams {
    pub fn new(ee: f64, n_periods: usize, delta: f64, t_end: f64, dt: f64) -> Self {
        Self {
            ee,
            n_periods,
            delta,
            t_end,
            dt,
            m: 256 * n_periods.max(1),
            seed: 1,
            sample_every: 100,
            scheme: Scheme::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.ee > 0.0 && self.ee < 1.0) {
            return Err(domain("ee", self.ee, "0 < ee < 1"));
        }
        if self.n_periods == 0 {
            return Err(domain("n_periods", 0.0, "n_periods >= 1"));
        }
        if !(0.0..=MAX_DELTA).contains(&self.delta) {
            return Err(domain("delta", self.delta, "0 <= delta <= 0.1"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(domain("t_end", self.t_end, "t_end > 0"));
        }
        if self.sample_every == 0 {
            return Err(domain("sample_every", 0.0, "sample_every >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub t: f64,
    pub xi: f64,
    /// Unwrapped phase.
    pub theta: f64,
    /// `||u + i v||_{H^2}`.
    pub dist: f64,
    pub lambda2: f64,
    pub q: f64,
    /// `|xi'| + |theta'|`.
    pub rate: f64,
    /// `(Lambda_2(psi) - Lambda_2(u0)) / dist^2`, absent when `dist = 0`.
    pub sandwich: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub max_dist: f64,
    /// Largest `|Lambda_2(t) - Lambda_2(0)|`.
    pub lambda_drift: f64,
    pub q_drift: f64,
    pub sandwich_min: Option<f64>,
    pub sandwich_max: Option<f64>,
    pub max_rate: f64,
    /// `max_rate / max_dist`, the empirical constant in `|xi'| + |theta'| <= C eps`.
    pub rate_constant: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub params: ExperimentParams,
    pub time_series: Vec<Sample>,
    pub summary: ExperimentSummary,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Time series; a missing sandwich ratio is written as NaN.
    pub fn table(&self) -> Table {
        let header = [
            "t", "xi", "theta", "dist", "lambda2", "q", "rate", "sandwich",
        ];
        let rows = self
            .time_series
            .iter()
            .map(|s| {
                vec![
                    s.t,
                    s.xi,
                    s.theta,
                    s.dist,
                    s.lambda2,
                    s.q,
                    s.rate,
                    s.sandwich.unwrap_or(f64::NAN),
                ]
            })
            .collect();
        Table::new(header.iter().map(|s| s.to_string()).collect(), rows)
    }
}

/// Seeded direction with `Re d` orthogonal to `u0'`, `Im d` orthogonal to
/// `u0`, and unit `H^2` norm.
pub fn perturbation_direction(g: &Grid, du0: &[f64], u0: &[f64], seed: u64) -> Vec<C64> {
    let p = g.period();
    let mut rng = seeded(seed);
    let d = random_trig(g.m(), g.m() / 8, &mut rng);
    let mut re: Vec<f64> = d.iter().map(|z| z.re).collect();
    let mut im: Vec<f64> = d.iter().map(|z| z.im).collect();
    let a = inner(du0, &re, p) / inner(du0, du0, p);
    re.iter_mut().zip(du0).for_each(|(x, b)| *x -= a * b);
    let a = inner(u0, &im, p) / inner(u0, u0, p);
    im.iter_mut().zip(u0).for_each(|(x, b)| *x -= a * b);
    let mut d: Vec<C64> = re
        .into_iter()
        .zip(im)
        .map(|(a, b)| C64::new(a, b))
        .collect();
    let n = h2_norm_sq(&d, p).sqrt();
    d.iter_mut().for_each(|z| *z /= n);
    d
}

fn extremes(xs: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    xs.fold(None, |acc, x| match acc {
        None => Some((x, x)),
        Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
    })
}

/// Runs the experiment; the trajectory is fitted at `t = 0` and every
/// `sample_every` steps up to `t_end`.
pub fn stability_experiment(params: &ExperimentParams) -> Result<ExperimentReport> {
    params.validate()?;
    let w = family_from_ee(params.ee)?;
    let g = Grid::for_wave(&w, params.n_periods, params.m)?;
    let p = g.period();
    let mut u0 = Vec::with_capacity(g.m());
    let mut du0 = Vec::with_capacity(g.m());
    for &x in g.nodes() {
        let (a, b, _) = profile_derivatives(&w, x);
        u0.push(a);
        du0.push(b);
    }
    let base = Field::from_real(&u0, p)?;
    let lambda_wave = functionals(&base, &w, LYAPUNOV_C)?.lambda_c;

    let d = perturbation_direction(&g, &du0, &u0, params.seed);
    let mut psi: Vec<C64> = u0
        .iter()
        .zip(&d)
        .map(|(a, b)| a + params.delta * b)
        .collect();

    let steps = (params.t_end / params.dt).round() as usize;
    let mut it = Integrator::new(g.m(), p, params.dt, params.scheme)?;
    let mut series = Vec::new();
    let mut guess = (0.0, 0.0);
    let mut done = 0;
    loop {
        let t = done as f64 * params.dt;
        let field = Field::new(psi.clone(), p)?;
        let fit = fit_modulation(&field, &w, t, guess)?;
        guess = (fit.xi, fit.theta_raw);
        let f = functionals(&field, &w, LYAPUNOV_C)?;
        let (xd, td) = modulation_rates(&fit, &w)?;
        let dist = fit.distance();
        series.push(Sample {
            t,
            xi: fit.xi,
            theta: fit.theta_raw,
            dist,
            lambda2: f.lambda_c,
            q: f.q,
            rate: xd.abs() + td.abs(),
            sandwich: (dist > 0.0).then(|| (f.lambda_c - lambda_wave) / (dist * dist)),
        });
        if done >= steps {
            break;
        }
        let n = params.sample_every.min(steps - done);
        it.advance(&mut psi, n)?;
        done += n;
    }

    let first = &series[0];
    let drift = |f: fn(&Sample) -> f64| {
        series
            .iter()
            .map(|s| (f(s) - f(first)).abs())
            .fold(0.0, f64::max)
    };
    let max_dist = series.iter().map(|s| s.dist).fold(0.0, f64::max);
    let max_rate = series.iter().map(|s| s.rate).fold(0.0, f64::max);
    let sandwich = extremes(series.iter().filter_map(|s| s.sandwich));
    let summary = ExperimentSummary {
        max_dist,
        lambda_drift: drift(|s| s.lambda2),
        q_drift: drift(|s| s.q),
        sandwich_min: sandwich.map(|s| s.0),
        sandwich_max: sandwich.map(|s| s.1),
        max_rate,
        rate_constant: (max_dist > 0.0).then(|| max_rate / max_dist),
    };
    Ok(ExperimentReport {
        params: params.clone(),
        time_series: series,
        summary,
    })
}
