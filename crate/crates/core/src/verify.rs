//! The invariant suite behind `cnoidal-lab verify`: every check reduces to
//! one number compared against one threshold.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::dynamics::{random_trig, seeded, stability_experiment, ExperimentParams};
use crate::error::{Error, Result};
use crate::identities::{mu_from_appendix, norms, norms_by_quadrature, verify_identity, Identity};
use crate::linops::{
    assemble, brillouin_grid, c_interval_exact, intertwine_residual, k_plus_partial,
    lowest_eigenvalues, mu_curvature_explicit, mu_curvature_numeric, quadratic_form, sos_k_minus,
    spectral_stability_check, OperatorKind,
};
use crate::output::fmt_f64;
use crate::smallamp::{measured_flip, oracle_deviation, Sign};
use crate::spectral::{inner, to_complex, Grid};
use crate::wave::{family_from_ee, profile_derivatives, small_amplitude_defects, WaveFamily};

/// Values of `ee` swept by the kernel and positivity checks.
pub const KERNEL_EES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
/// Bloch numbers per band scan.
pub const BAND_KAPPAS: usize = 33;
/// Bloch numbers for the `JL` spectrum.
pub const JL_KAPPAS: usize = 17;
/// Smallest acceptable second eigenvalue next to a kernel.
pub const KERNEL_GAP_MIN: f64 = 1e-4;
const NORM_QUADRATURE_M: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Bound {
    /// `value <= t`
    AtMost(f64),
    /// `value >= t`
    AtLeast(f64),
    /// `value > t`
    Above(f64),
}

impl Bound {
    pub fn threshold(self) -> f64 {
        match self {
            Bound::AtMost(t) | Bound::AtLeast(t) | Bound::Above(t) => t,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Bound::AtMost(_) => "<=",
            Bound::AtLeast(_) => ">=",
            Bound::Above(_) => ">",
        }
    }

    pub fn holds(self, v: f64) -> bool {
        match self {
            Bound::AtMost(t) => v <= t,
            Bound::AtLeast(t) => v >= t,
            Bound::Above(t) => v > t,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: &'static str,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl CheckRow {
    fn new(name: &'static str, value: f64, bound: Bound) -> Self {
        Self {
            name,
            value,
            bound,
            pass: bound.holds(value),
        }
    }
}

type Runner = fn(&RunConfig) -> Result<Vec<CheckRow>>;

struct Check {
    rows: &'static [&'static str],
    run: Runner,
}

const CHECKS: &[Check] = &[
    Check {
        rows: &["interval_exact"],
        run: interval,
    },
    Check {
        rows: &["curvature_resolvent", "curvature_numeric"],
        run: curvature,
    },
    Check {
        rows: &["kernel_plus", "kernel_minus", "kernel_gap", "band_minimum"],
        run: kernels,
    },
    Check {
        rows: &["negative_direction"],
        run: negative_direction,
    },
    Check {
        rows: &["identities", "norms"],
        run: identities,
    },
    Check {
        rows: &["smallamp_oracle", "curvature_flip"],
        run: small_amplitude,
    },
    Check {
        rows: &["sos_minus", "sos_plus"],
        run: sum_of_squares,
    },
    Check {
        rows: &["intertwining"],
        run: intertwining,
    },
    Check {
        rows: &["spectral_stability"],
        run: spectral,
    },
    Check {
        rows: &[
            "orbital_distance",
            "orbital_lambda_drift",
            "orbital_charge_drift",
            "orbital_sandwich_min",
            "orbital_rate",
        ],
        run: orbital,
    },
    Check {
        rows: &["expansion_profile", "expansion_ell"],
        run: expansion,
    },
];

/// Names of all rows, in output order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().flat_map(|c| c.rows.iter().copied()).collect()
}

/// Runs every check, or only the row named `filter`.
pub fn run_checks(cfg: &RunConfig, filter: Option<&str>) -> Result<Vec<CheckRow>> {
    cfg.validate()?;
    if let Some(f) = filter {
        if !check_names().contains(&f) {
            return Err(Error::UnknownTag(f.to_string()));
        }
    }
    let mut out = Vec::new();
    for c in CHECKS {
        if filter.is_some_and(|f| !c.rows.contains(&f)) {
            continue;
        }
        out.extend(
            (c.run)(cfg)?
                .into_iter()
                .filter(|r| filter.is_none_or(|f| r.name == f)),
        );
    }
    Ok(out)
}

/// Runs the check that produces row `name` and returns all of its rows.
pub fn run_group(cfg: &RunConfig, name: &str) -> Result<Vec<CheckRow>> {
    cfg.validate()?;
    let c = CHECKS
        .iter()
        .find(|c| c.rows.contains(&name))
        .ok_or_else(|| Error::UnknownTag(name.to_string()))?;
    (c.run)(cfg)
}

/// CSV with columns `check,value,relation,threshold,pass`.
pub fn rows_to_csv(rows: &[CheckRow], metadata: &str) -> String {
    let mut s = String::from("check,value,relation,threshold,pass\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.name,
            fmt_f64(r.value),
            r.bound.symbol(),
            fmt_f64(r.bound.threshold()),
            r.pass
        ));
    }
    s.push_str(&format!("# {metadata}\n"));
    s
}

fn interval(_: &RunConfig) -> Result<Vec<CheckRow>> {
    let (lo, hi) = c_interval_exact(&family_from_ee(0.8)?);
    let err = (lo - 1.4).abs().max((hi - 2.6).abs());
    Ok(vec![CheckRow::new(
        "interval_exact",
        err,
        Bound::AtMost(0.0),
    )])
}

fn curvature(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let g = Grid::bloch(cfg.grid_m)?;
    let mut cases = Vec::new();
    for ee in [0.2, 0.5, 0.8] {
        let w = family_from_ee(ee)?;
        let (lo, hi) = c_interval_exact(&w);
        for c in [1.5, 2.0, 2.5] {
            if c > lo && c < hi {
                cases.push((w, c));
            }
        }
    }
    let errs: Vec<(f64, f64)> = cases
        .par_iter()
        .map(|(w, c)| {
            let e = mu_curvature_explicit(w, *c)?;
            let a = mu_from_appendix(w, *c)?;
            let n = mu_curvature_numeric(w, *c, &g)?;
            Ok((((a - e) / e).abs(), ((n - e) / e).abs()))
        })
        .collect::<Result<_>>()?;
    let worst = |f: fn(&(f64, f64)) -> f64| errs.iter().map(f).fold(0.0, f64::max);
    Ok(vec![
        CheckRow::new("curvature_resolvent", worst(|e| e.0), Bound::AtMost(1e-11)),
        CheckRow::new("curvature_numeric", worst(|e| e.1), Bound::AtMost(1e-6)),
    ])
}

/// Sorted `|lambda|` of `kind` at `c = 2`, `kappa = 0`.
fn abs_spectrum(kind: OperatorKind, w: &WaveFamily, g: &Grid) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = assemble(kind, w, 2.0, 0.0, g)?
        .eigen()?
        .values
        .iter()
        .map(|x| x.abs())
        .collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn kernels(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let kappas = brillouin_grid(BAND_KAPPAS);
    // (smallest |lambda| of K+, of K-, smallest second |lambda|, lowest band value)
    let per_ee: Vec<(f64, f64, f64, f64)> = KERNEL_EES
        .par_iter()
        .map(|&ee| {
            let w = family_from_ee(ee)?;
            let g = Grid::for_wave(&w, 1, cfg.grid_m)?;
            let sp = abs_spectrum(OperatorKind::Kplus, &w, &g)?;
            let sm = abs_spectrum(OperatorKind::Kminus, &w, &g)?;
            let floor = |kind| -> Result<f64> {
                Ok(lowest_eigenvalues(kind, &w, 2.0, &kappas, &g)?
                    .into_iter()
                    .fold(f64::INFINITY, f64::min))
            };
            let b = floor(OperatorKind::Kplus)?.min(floor(OperatorKind::Kminus)?);
            Ok((sp[0], sm[0], sp[1].min(sm[1]), b))
        })
        .collect::<Result<_>>()?;
    let max = |f: fn(&(f64, f64, f64, f64)) -> f64| per_ee.iter().map(f).fold(0.0, f64::max);
    let min =
        |f: fn(&(f64, f64, f64, f64)) -> f64| per_ee.iter().map(f).fold(f64::INFINITY, f64::min);
    Ok(vec![
        CheckRow::new("kernel_plus", max(|t| t.0), Bound::AtMost(cfg.kernel_tol)),
        CheckRow::new("kernel_minus", max(|t| t.1), Bound::AtMost(cfg.kernel_tol)),
        CheckRow::new("kernel_gap", min(|t| t.2), Bound::AtLeast(KERNEL_GAP_MIN)),
        CheckRow::new(
            "band_minimum",
            min(|t| t.3),
            Bound::AtLeast(-cfg.kernel_tol),
        ),
    ])
}

fn negative_direction(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let w = family_from_ee(0.8)?;
    let g = Grid::bloch(cfg.grid_m)?;
    let low = lowest_eigenvalues(
        OperatorKind::Pminus,
        &w,
        2.9,
        &brillouin_grid(BAND_KAPPAS),
        &g,
    )?;
    let min = low.into_iter().fold(f64::INFINITY, f64::min);
    Ok(vec![CheckRow::new(
        "negative_direction",
        min,
        Bound::AtMost(-1e-6),
    )])
}

fn identities(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let ks = [0.2, 0.5, 0.8];
    let mut worst: f64 = 0.0;
    for k in ks {
        for id in Identity::ALL {
            worst = worst.max(verify_identity(&id, k, cfg.grid_m)?);
        }
    }
    let mut norm_err: f64 = 0.0;
    for k in ks {
        let a = norms(k)?;
        let b = norms_by_quadrature(k, NORM_QUADRATURE_M.max(cfg.grid_m))?;
        for (x, y) in [(a.0, b.0), (a.1, b.1), (a.2, b.2)] {
            norm_err = norm_err.max(((x - y) / x).abs());
        }
    }
    Ok(vec![
        CheckRow::new("identities", worst, Bound::AtMost(cfg.identity_tol)),
        CheckRow::new("norms", norm_err, Bound::AtMost(1e-9)),
    ])
}

fn small_amplitude(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let g = Grid::bloch(cfg.grid_m)?;
    let kappas: Vec<f64> = (0..17).map(|i| -0.4 + 0.05 * i as f64).collect();
    let rows: Vec<(f64, f64)> = [0.05, 0.1, 0.2]
        .par_iter()
        .map(|&a| {
            let dev = oracle_deviation(Sign::Minus, a, 2.0, &kappas, &g)?;
            let (down, up) = measured_flip(a, &g)?;
            let target = std::f64::consts::SQRT_2 * a;
            let flip = ((down - target) / target)
                .abs()
                .max(((up - target) / target).abs());
            Ok((dev / (5.0 * a.powi(4) + 1e-8), flip))
        })
        .collect::<Result<_>>()?;
    Ok(vec![
        // Deviation as a fraction of the budget 5 a^4 + 1e-8.
        CheckRow::new(
            "smallamp_oracle",
            rows.iter().map(|r| r.0).fold(0.0, f64::max),
            Bound::AtMost(1.0),
        ),
        CheckRow::new(
            "curvature_flip",
            rows.iter().map(|r| r.1).fold(0.0, f64::max),
            Bound::AtMost(0.1),
        ),
    ])
}

/// Real band-limited function with unit `L^2` norm.
fn random_real(g: &Grid, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    let v: Vec<f64> = random_trig(g.m(), g.m() / 8, rng)
        .iter()
        .map(|z| z.re)
        .collect();
    let n = inner(&v, &v, g.period()).sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn sum_of_squares(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let w = family_from_ee(0.5)?;
    let g = Grid::for_wave(&w, 1, cfg.grid_m)?;
    let km = assemble(OperatorKind::Kminus, &w, 2.0, 0.0, &g)?;
    let kp = assemble(OperatorKind::Kplus, &w, 2.0, 0.0, &g)?;
    let du = g.sample(|x| profile_derivatives(&w, x).1);
    let mut rng = seeded(cfg.seed);
    let mut minus: f64 = 0.0;
    for _ in 0..50 {
        let v = random_real(&g, &mut rng);
        let q = quadratic_form(&km, &to_complex(&v))?;
        minus = minus.max((q - sos_k_minus(&w, &v, &g)?).abs());
    }
    let mut plus: f64 = 0.0;
    for _ in 0..20 {
        // Multiples of u0' vanish wherever u0' does.
        let r: Vec<f64> = random_trig(g.m(), 16, &mut rng)
            .iter()
            .map(|z| z.re)
            .collect();
        let u: Vec<f64> = r.iter().zip(&du).map(|(a, b)| a * b).collect();
        let q = quadratic_form(&kp, &to_complex(&u))?;
        plus = plus.max(((q - k_plus_partial(&w, &u, 2.0, &g)?) / q).abs());
    }
    Ok(vec![
        CheckRow::new("sos_minus", minus, Bound::AtMost(1e-8)),
        CheckRow::new("sos_plus", plus, Bound::AtMost(1e-6)),
    ])
}

fn intertwining(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(cfg.seed);
    let mut worst: f64 = 0.0;
    for ee in [0.3, 0.7] {
        let w = family_from_ee(ee)?;
        let g = Grid::for_wave(&w, 1, cfg.grid_m)?;
        for c in [1.3, 2.0, 2.7] {
            for _ in 0..5 {
                let f = random_real(&g, &mut rng);
                worst = worst.max(intertwine_residual(&w, c, &f, &g)?);
            }
        }
    }
    Ok(vec![CheckRow::new(
        "intertwining",
        worst,
        Bound::AtMost(1e-6),
    )])
}

fn spectral(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let kappas = brillouin_grid(JL_KAPPAS);
    let mut worst: f64 = 0.0;
    for ee in [0.3, 0.7] {
        let w = family_from_ee(ee)?;
        let g = Grid::for_wave(&w, 1, cfg.grid_m)?;
        worst = worst.max(spectral_stability_check(&w, &g, &kappas)?.max_abs_re);
    }
    Ok(vec![CheckRow::new(
        "spectral_stability",
        worst,
        Bound::AtMost(cfg.kernel_tol),
    )])
}

fn orbital(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let delta = 1e-3;
    let mut p = ExperimentParams::new(0.5, 1, delta, 20.0, cfg.dt);
    p.m = cfg.grid_m;
    p.seed = cfg.seed;
    let s = stability_experiment(&p)?.summary;
    Ok(vec![
        // Distance in units of delta.
        CheckRow::new("orbital_distance", s.max_dist / delta, Bound::AtMost(10.0)),
        CheckRow::new("orbital_lambda_drift", s.lambda_drift, Bound::AtMost(1e-8)),
        CheckRow::new("orbital_charge_drift", s.q_drift, Bound::AtMost(1e-11)),
        CheckRow::new(
            "orbital_sandwich_min",
            s.sandwich_min.unwrap_or(f64::NAN),
            Bound::Above(0.0),
        ),
        CheckRow::new("orbital_rate", s.max_rate, Bound::AtMost(0.1)),
    ])
}

fn expansion(_: &RunConfig) -> Result<Vec<CheckRow>> {
    let w = family_from_ee(1.0 - 1e-4)?;
    let a = w.amp();
    let (sup, dl) = small_amplitude_defects(&w, 1024)?;
    Ok(vec![
        // Both in units of the respective power of a.
        CheckRow::new("expansion_profile", sup / a.powi(3), Bound::AtMost(10.0)),
        CheckRow::new("expansion_ell", dl / a.powi(4), Bound::AtMost(10.0)),
    ])
}
