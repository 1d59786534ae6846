//! Floquet-Bloch band structures with eigenvector-overlap tracking.

use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::assembly::{assemble, OperatorKind};
use crate::error::{domain, Result};
use crate::output::Table;
use crate::spectral::Grid;
use crate::wave::WaveFamily;

/// Extra eigenpairs carried along so that bands can cross into view.
const TRACK_MARGIN: usize = 4;
/// Overlaps closer than this are treated as ties.
const OVERLAP_TIE: f64 = 1e-8;

/// Eigenvalue curves `lambda_b(kappa)`, band-major.
#[derive(Debug, Clone, Serialize)]
pub struct BandStructure {
    pub kappas: Vec<f64>,
    pub bands: Vec<Vec<f64>>,
}

impl BandStructure {
    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    pub fn band(&self, b: usize) -> &[f64] {
        &self.bands[b]
    }

    /// Smallest value over all bands and `kappa`.
    pub fn min(&self) -> f64 {
        self.bands
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Columns `kappa, band_0, band_1, ...`.
    pub fn to_table(&self) -> Table {
        let mut header = vec!["kappa".to_string()];
        header.extend((0..self.n_bands()).map(|b| format!("band_{b}")));
        let rows = self
            .kappas
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let mut row = vec![k];
                row.extend(self.bands.iter().map(|b| b[i]));
                row
            })
            .collect();
        Table::new(header, rows)
    }
}

/// `n` equispaced points on `[-1/2, 1/2]`.
pub fn brillouin_grid(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|i| -0.5 + i as f64 / (n - 1) as f64).collect(),
    }
}

/// Bottom of the spectrum of `kind` at each `kappa`, without band tracking.
pub fn lowest_eigenvalues(
    kind: OperatorKind,
    w: &WaveFamily,
    c: f64,
    kappa_grid: &[f64],
    g: &Grid,
) -> Result<Vec<f64>> {
    kappa_grid
        .par_iter()
        .map(|&kappa| Ok(assemble(kind, w, c, kappa, g)?.eigen()?.values[0]))
        .collect()
}

struct Slice {
    values: Vec<f64>,
    vectors: Mat<C64>,
}

/// Lowest `n_bands` eigenvalues of `kind` at each `kappa`, tracked across
/// adjacent points by maximal eigenvector overlap.
pub fn bands(
    kind: OperatorKind,
    w: &WaveFamily,
    c: f64,
    kappa_grid: &[f64],
    n_bands: usize,
    g: &Grid,
) -> Result<BandStructure> {
    if n_bands == 0 || n_bands > g.m() {
        return Err(domain("n_bands", n_bands as f64, "1 <= n_bands <= m"));
    }
    let n_track = (n_bands + TRACK_MARGIN).min(g.m());
    let slices: Vec<Slice> = kappa_grid
        .par_iter()
        .map(|&kappa| {
            let op = assemble(kind, w, c, kappa, g)?;
            let e = op.eigen()?;
            let vectors = e.vectors.subcols(0, n_track).to_owned();
            Ok(Slice {
                values: e.values[..n_track].to_vec(),
                vectors,
            })
        })
        .collect::<Result<_>>()?;

    let mut bands = vec![Vec::with_capacity(kappa_grid.len()); n_bands];
    let Some(first) = slices.first() else {
        return Ok(BandStructure {
            kappas: vec![],
            bands,
        });
    };
    // Band b is identified with column current[b] of the previous slice.
    let mut current: Vec<usize> = (0..n_bands).collect();
    for (b, band) in bands.iter_mut().enumerate() {
        band.push(first.values[b]);
    }
    for pair in slices.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        current = match_columns(prev, next, &current);
        for (b, band) in bands.iter_mut().enumerate() {
            band.push(next.values[current[b]]);
        }
    }
    Ok(BandStructure {
        kappas: kappa_grid.to_vec(),
        bands,
    })
}

/// Greedy maximal-overlap matching; ties go to the closest eigenvalue.
fn match_columns(prev: &Slice, next: &Slice, current: &[usize]) -> Vec<usize> {
    let n_next = next.values.len();
    let mut pairs = Vec::with_capacity(current.len() * n_next);
    for (b, &pc) in current.iter().enumerate() {
        let u = prev.vectors.col(pc);
        for j in 0..n_next {
            let v = next.vectors.col(j);
            let ov: f64 = u
                .iter()
                .zip(v.iter())
                .map(|(a, b)| a.conj() * b)
                .sum::<C64>()
                .norm_sqr();
            let dist = (prev.values[pc] - next.values[j]).abs();
            pairs.push((b, j, ov, dist));
        }
    }
    // Quantised overlaps give a total order in which near-ties fall back to
    // eigenvalue distance.
    pairs.sort_by(|a, b| {
        let qa = (a.2 / OVERLAP_TIE).round() as i64;
        let qb = (b.2 / OVERLAP_TIE).round() as i64;
        qb.cmp(&qa).then(a.3.total_cmp(&b.3))
    });
    let mut out = vec![usize::MAX; current.len()];
    let mut taken = vec![false; n_next];
    for (b, j, _, _) in pairs {
        if out[b] == usize::MAX && !taken[j] {
            out[b] = j;
            taken[j] = true;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::family_from_ee;

    #[test]
    fn zero_wave_bands_are_constant_coefficient() {
        let w = WaveFamily::zero_wave();
        let g = Grid::bloch(32).unwrap();
        let ks = brillouin_grid(21);
        let bs = bands(OperatorKind::Pminus, &w, 2.0, &ks, 5, &g).unwrap();
        for (i, &k) in ks.iter().enumerate() {
            let mut exact: Vec<f64> = (-16i64..16)
                .map(|n| {
                    let x = k + n as f64;
                    x.powi(4) - 2.0 * x * x + 1.0
                })
                .collect();
            exact.sort_by(f64::total_cmp);
            let mut got: Vec<f64> = bs.bands.iter().map(|b| b[i]).collect();
            got.sort_by(f64::total_cmp);
            for (a, e) in got.iter().zip(&exact) {
                assert!((a - e).abs() < 1e-12, "kappa {k}: {a} vs {e}");
            }
        }
        let mid = ks.len() / 2;
        let zeros = bs.bands.iter().filter(|b| b[mid].abs() < 1e-12).count();
        assert_eq!(zeros, 2);
    }

    #[test]
    fn tracked_bands_are_continuous_and_symmetric() {
        let w = family_from_ee(0.5).unwrap();
        let g = Grid::bloch(64).unwrap();
        let ks = brillouin_grid(41);
        let bs = bands(OperatorKind::Pminus, &w, 2.0, &ks, 5, &g).unwrap();
        let dk = ks[1] - ks[0];
        for b in &bs.bands {
            for i in 1..ks.len() {
                assert!((b[i] - b[i - 1]).abs() <= 100.0 * dk);
            }
            for i in 0..ks.len() {
                let j = ks.len() - 1 - i;
                let (mut x, mut y) = (
                    bs.bands.iter().map(|b| b[i]).collect::<Vec<_>>(),
                    bs.bands.iter().map(|b| b[j]).collect::<Vec<_>>(),
                );
                x.sort_by(f64::total_cmp);
                y.sort_by(f64::total_cmp);
                for (p, q) in x.iter().zip(&y) {
                    assert!((p - q).abs() < 1e-10);
                }
            }
        }
        assert!(bs.min() > -1e-9);
    }
}
