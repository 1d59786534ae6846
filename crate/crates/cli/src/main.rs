//! `cnoidal-lab`: figure data, band tables, the verification suite and the
//! orbital-stability experiment, written to CSV and JSON files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use cnoidal_core::dynamics::{stability_experiment, ExperimentParams};
use cnoidal_core::linops::{bands, brillouin_grid, c_interval_exact};
use cnoidal_core::output::Table;
use cnoidal_core::smallamp::{
    c_bounds_asymptotic, exact_band_table, model_band_table, MAX_AMPLITUDE,
};
use cnoidal_core::verify::{check_names, rows_to_csv, run_checks};
use cnoidal_core::wave::phase_orbit;
use cnoidal_core::{family_from_ee, Grid, OperatorKind, RunConfig, WaveFamily};

/// Overrides `--out-dir` when set.
const OUT_ENV: &str = "CNOIDAL_LAB_OUT";

#[derive(Parser)]
#[command(
    name = "cnoidal-lab",
    version,
    about = "Cnoidal waves of the defocusing NLS equation"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Fourier grid size.
    #[arg(long, global = true, default_value_t = 256)]
    grid_m: usize,
    /// Threshold for numerically zero eigenvalues.
    #[arg(long, global = true, default_value_t = 1e-7)]
    kernel_tol: f64,
    /// Threshold for the elliptic identity residuals.
    #[arg(long, global = true, default_value_t = 1e-6)]
    identity_tol: f64,
    /// Time step of the NLS integrator.
    #[arg(long, global = true, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory; the CNOIDAL_LAB_OUT variable takes precedence.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand, Serialize)]
enum Cmd {
    /// Phase-plane level sets, one CSV per ee.
    Figure1 {
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.4, 0.8], value_parser = ee_closed)]
        ee: Vec<f64>,
        /// Samples per curve.
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
    /// Constant-coefficient bands and the small-amplitude model bands.
    Figure2 {
        #[arg(long, default_value_t = 0.2, value_parser = amplitude)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long, default_value_t = 101)]
        n_kappa: usize,
    },
    /// Exact and asymptotic ends of the stability interval against ee.
    Figure3 {
        #[arg(long, default_value_t = 50)]
        n_points: usize,
    },
    /// Tracked Floquet-Bloch bands of one operator.
    Bands {
        /// Lplus, Lminus, Mplus, Mminus, Kplus, Kminus, Pplus or Pminus.
        #[arg(long, default_value = "Kminus", value_parser = kind)]
        kind: String,
        #[arg(long, default_value_t = 0.5, value_parser = ee_open)]
        ee: f64,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long, default_value_t = 33)]
        n_kappa: usize,
        #[arg(long, default_value_t = 4)]
        n_bands: usize,
    },
    /// Run the invariant suite; exit status 1 if any check fails.
    Verify {
        /// Run only the named check.
        #[arg(long)]
        check: Option<String>,
    },
    /// Perturb the wave, evolve, and track the modulation parameters.
    Evolve {
        #[arg(long, default_value_t = 0.5, value_parser = ee_open)]
        ee: f64,
        #[arg(long, default_value_t = 1)]
        n_periods: usize,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
    },
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| e.to_string())
}

fn ee_closed(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("ee = {v} is outside [0, 1]"))
    }
}

fn ee_open(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("ee = {v} is outside (0, 1)"))
    }
}

fn amplitude(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=MAX_AMPLITUDE).contains(&v) {
        Ok(v)
    } else {
        Err(format!("a = {v} is outside [0, {MAX_AMPLITUDE}]"))
    }
}

fn kind(s: &str) -> Result<String, String> {
    parse_kind(s).map(|k| k.name().to_string())
}

fn parse_kind(s: &str) -> Result<OperatorKind, String> {
    OperatorKind::ALL
        .into_iter()
        .find(|k| k.name().eq_ignore_ascii_case(s))
        .ok_or_else(|| format!("unknown operator `{s}`"))
}

type Failure = Box<dyn std::error::Error>;

struct Ctx {
    cfg: RunConfig,
    /// `config-sha256=...` trailer shared by every file of the run.
    meta: String,
}

impl Ctx {
    fn new(common: &Common, cmd: &Cmd) -> Result<Self, Failure> {
        let out_dir = match std::env::var_os(OUT_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => common.out_dir.clone(),
        };
        let cfg = RunConfig {
            grid_m: common.grid_m,
            kernel_tol: common.kernel_tol,
            identity_tol: common.identity_tol,
            dt: common.dt,
            seed: common.seed,
            out_dir,
        };
        cfg.validate()?;
        let record = serde_json::to_string(&(&cfg, cmd))?;
        let hash = Sha256::digest(record.as_bytes());
        let meta = format!(
            "config-sha256={hash:x} version={}",
            env!("CARGO_PKG_VERSION")
        );
        std::fs::create_dir_all(&cfg.out_dir)?;
        Ok(Self { cfg, meta })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out_dir.join(name)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        let p = self.path(name);
        std::fs::write(&p, contents)?;
        Ok(p)
    }

    fn write_table(&self, name: &str, t: &Table) -> Result<PathBuf, Failure> {
        self.write(name, &t.to_csv_string(&self.meta))
    }
}

fn announce(p: &Path) {
    println!("wrote {}", p.display());
}

/// Short decimal label for file names: `0.4 -> 0.4`, `1 -> 1`.
fn label(x: f64) -> String {
    format!("{x}")
}

fn figure1(ctx: &Ctx, ees: &[f64], n: usize) -> Result<(), Failure> {
    for &ee in ees {
        let orbit = phase_orbit(&family_from_ee(ee)?, n)?;
        let rows = orbit.points.iter().map(|&(u, du)| vec![u, du]).collect();
        let mut t = Table::new(vec!["u0".into(), "du0".into()], rows);
        if orbit.heteroclinic {
            t = t.with_note("heteroclinic orbit between (-1, 0) and (1, 0), sampled on [-30, 30]");
        }
        announce(&ctx.write_table(&format!("figure1_ee{}.csv", label(ee)), &t)?);
    }
    Ok(())
}

fn figure2(ctx: &Ctx, a: f64, c: f64, n_kappa: usize) -> Result<(), Failure> {
    announce(&ctx.write_table("figure2_exact.csv", &exact_band_table(c, n_kappa))?);
    let mut model = model_band_table(a, c, n_kappa)?;
    let (lo, hi) = c_bounds_asymptotic(a);
    if a > 0.0 && (c <= lo || c >= hi) {
        model = model.with_note(format!(
            "c = {c} is outside the asymptotic interval ({lo}, {hi}) for a = {a}"
        ));
    }
    announce(&ctx.write_table("figure2_model.csv", &model)?);
    Ok(())
}

fn figure3(ctx: &Ctx, n_points: usize) -> Result<(), Failure> {
    if n_points == 0 {
        return Err("need at least one point".into());
    }
    // ee = i/n for i = 1..=n: ends at the zero wave and, for n = 50, hits 0.8.
    let mut rows = Vec::with_capacity(n_points);
    for i in 1..=n_points {
        let ee = i as f64 / n_points as f64;
        // ee = 1 is the zero wave, which the constructor leaves out.
        let w = if ee == 1.0 {
            WaveFamily::zero_wave()
        } else {
            family_from_ee(ee)?
        };
        let (lo, hi) = c_interval_exact(&w);
        let (alo, ahi) = c_bounds_asymptotic((1.0 - ee).sqrt());
        rows.push(vec![ee, lo, hi, alo, ahi]);
    }
    let header = [
        "ee",
        "c_minus",
        "c_plus",
        "asymptotic_c_minus",
        "asymptotic_c_plus",
    ];
    let t = Table::new(header.iter().map(|s| s.to_string()).collect(), rows);
    announce(&ctx.write_table("figure3.csv", &t)?);
    Ok(())
}

fn band_table(
    ctx: &Ctx,
    kind: &str,
    ee: f64,
    c: f64,
    n_kappa: usize,
    n_bands: usize,
) -> Result<(), Failure> {
    let kind = parse_kind(kind)?;
    let w = family_from_ee(ee)?;
    let g = if kind.is_bloch() {
        Grid::bloch(ctx.cfg.grid_m)?
    } else {
        Grid::for_wave(&w, 1, ctx.cfg.grid_m)?
    };
    let b = bands(kind, &w, c, &brillouin_grid(n_kappa), n_bands, &g)?;
    let name = format!("bands_{}_ee{}_c{}.csv", kind.name(), label(ee), label(c));
    announce(&ctx.write_table(&name, &b.to_table())?);
    Ok(())
}

fn verify(ctx: &Ctx, check: Option<&str>) -> Result<bool, Failure> {
    if let Some(c) = check {
        if !check_names().contains(&c) {
            return Err(format!("unknown check `{c}`; known: {}", check_names().join(", ")).into());
        }
    }
    let rows = run_checks(&ctx.cfg, check)?;
    let csv = rows_to_csv(&rows, &ctx.meta);
    print!("{csv}");
    announce(&ctx.write("verify.csv", &csv)?);
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    if !failed.is_empty() {
        eprintln!("failed: {}", failed.join(", "));
    }
    Ok(failed.is_empty())
}

fn evolve(ctx: &Ctx, ee: f64, n_periods: usize, delta: f64, t_end: f64) -> Result<(), Failure> {
    let mut p = ExperimentParams::new(ee, n_periods, delta, t_end, ctx.cfg.dt);
    p.m = ctx.cfg.grid_m * n_periods.max(1);
    p.seed = ctx.cfg.seed;
    let report = stability_experiment(&p)?;
    let s = &report.summary;
    println!(
        "max_dist {:e}  lambda_drift {:e}  q_drift {:e}  max_rate {:e}",
        s.max_dist, s.lambda_drift, s.q_drift, s.max_rate
    );
    let json = format!("{}\n", report.to_json()?);
    announce(&ctx.write("evolve.json", &json)?);
    announce(&ctx.write_table("evolve.csv", &report.table())?);
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let ctx = Ctx::new(&cli.common, &cli.cmd)?;
    match &cli.cmd {
        Cmd::Figure1 { ee, n } => figure1(&ctx, ee, *n)?,
        Cmd::Figure2 { a, c, n_kappa } => figure2(&ctx, *a, *c, *n_kappa)?,
        Cmd::Figure3 { n_points } => figure3(&ctx, *n_points)?,
        Cmd::Bands {
            kind,
            ee,
            c,
            n_kappa,
            n_bands,
        } => band_table(&ctx, kind, *ee, *c, *n_kappa, *n_bands)?,
        Cmd::Verify { check } => return verify(&ctx, check.as_deref()),
        Cmd::Evolve {
            ee,
            n_periods,
            delta,
            t_end,
        } => evolve(&ctx, *ee, *n_periods, *delta, *t_end)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
