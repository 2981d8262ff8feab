//! Global and cell-wise data-copying tests.
//!
//! `Z_U ≪ 0` means generated points are closer to the training set than
//! held-out points are (copying); `Z_U ≫ 0` means they are farther
//! (underfitting). `C_T` averages the per-cell `Z_U` over cells the generator
//! actually populates, weighting each cell by its share of the test sample.

use alloc::vec::Vec;

use crate::dataset::{PointSet, Seed};
use crate::error::{invalid, Error, Result};
use crate::math::{normal_quantile, sqrt};
use crate::metric::{distance_sample_indexed, Metric, NnIndex};
use crate::partition::{counts, Partition};
use crate::rank_stats::{mann_whitney, UTestResult};

pub const DEFAULT_MIN_CELL: usize = 20;
pub const DEFAULT_SIGNIFICANCE: f64 = 0.05;

/// Minimum generated mass `τ` for a cell to enter `C_T`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Tau {
    /// `min_cell / m`: the cell must hold at least `min_cell` generated points.
    #[default]
    Auto,
    Value(f64),
}

impl Tau {
    pub fn resolve(self, min_cell: usize, m: usize) -> f64 {
        match self {
            Tau::Auto => min_cell as f64 / m as f64,
            Tau::Value(t) => t,
        }
    }
}

/// Why a cell did not enter `C_T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exclusion {
    BelowTau,
    InsufficientTest,
    InsufficientGen,
}

impl Exclusion {
    pub fn as_str(self) -> &'static str {
        match self {
            Exclusion::BelowTau => "below-tau",
            Exclusion::InsufficientTest => "insufficient-test",
            Exclusion::InsufficientGen => "insufficient-gen",
        }
    }

    pub fn parse(tag: &str) -> Option<Self> {
        match tag {
            "below-tau" => Some(Exclusion::BelowTau),
            "insufficient-test" => Some(Exclusion::InsufficientTest),
            "insufficient-gen" => Some(Exclusion::InsufficientGen),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopyConfig {
    pub tau: Tau,
    pub min_cell: usize,
    pub significance: f64,
    pub metric: Metric,
}

impl Default for CopyConfig {
    fn default() -> Self {
        Self {
            tau: Tau::Auto,
            min_cell: DEFAULT_MIN_CELL,
            significance: DEFAULT_SIGNIFICANCE,
            metric: Metric::SquaredEuclidean,
        }
    }
}

/// Run parameters echoed into a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopyParams {
    pub k: usize,
    /// The resolved threshold.
    pub tau: f64,
    pub min_cell: usize,
    pub significance: f64,
    pub metric: Metric,
    pub seed: Seed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellResult {
    pub cell: usize,
    pub train_count: usize,
    pub test_count: usize,
    pub gen_count: usize,
    /// `P_n(π)`.
    pub p_frac: f64,
    /// `Q_m(π)`.
    pub q_frac: f64,
    /// In-cell `Z_U`; absent for excluded cells.
    pub z_u: Option<f64>,
    pub z_pi: f64,
    pub included_in_ct: bool,
    pub exclusion_reason: Option<Exclusion>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopyReport {
    pub global: UTestResult,
    pub cells: Vec<CellResult>,
    pub c_t: f64,
    pub ndb_over: usize,
    pub ndb_under: usize,
    pub params: CopyParams,
}

/// Result of a cell-occupancy z-test between two samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationResult {
    pub ndb_over: usize,
    pub ndb_under: usize,
    pub z: Vec<f64>,
    /// Cells where the pooled proportion is 0 or 1 and `z` was set to 0.
    pub degenerate: Vec<bool>,
    pub z_crit: f64,
}

/// Mann-Whitney test of generated versus test distances to the full
/// training set.
pub fn global_test(
    train: &PointSet,
    test: &PointSet,
    gen: &PointSet,
    metric: Metric,
) -> Result<UTestResult> {
    let index = NnIndex::new(train);
    let a = distance_sample_indexed(test, &index, metric)?;
    let b = distance_sample_indexed(gen, &index, metric)?;
    mann_whitney(a.values(), b.values())
}

/// Occupancy z-score for one cell: sample A has `count_a` of `total_a`
/// points in the cell, sample B `count_b` of `total_b`. Positive when B is
/// over-represented. Returns `None` when the pooled proportion is 0 or 1.
pub fn occupancy_z(count_a: usize, total_a: usize, count_b: usize, total_b: usize) -> Option<f64> {
    let (na, nb) = (total_a as f64, total_b as f64);
    let pa = count_a as f64 / na;
    let pb = count_b as f64 / nb;
    let pooled = (count_a + count_b) as f64 / (na + nb);
    if pooled <= 0.0 || pooled >= 1.0 {
        return None;
    }
    Some((pb - pa) / sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)))
}

pub(crate) fn ndb_from_counts(
    base_counts: &[usize],
    base_total: usize,
    gen_counts: &[usize],
    gen_total: usize,
    significance: f64,
) -> Result<RepresentationResult> {
    if !(significance > 0.0 && significance < 0.5) {
        return Err(invalid("significance must lie in (0, 0.5)"));
    }
    let z_crit = normal_quantile(1.0 - significance);
    let mut out = RepresentationResult {
        ndb_over: 0,
        ndb_under: 0,
        z: Vec::with_capacity(base_counts.len()),
        degenerate: Vec::with_capacity(base_counts.len()),
        z_crit,
    };
    for (&a, &b) in base_counts.iter().zip(gen_counts) {
        let z = occupancy_z(a, base_total, b, gen_total);
        let zv = z.unwrap_or(0.0);
        if zv > z_crit {
            out.ndb_over += 1;
        } else if zv < -z_crit {
            out.ndb_under += 1;
        }
        out.z.push(zv);
        out.degenerate.push(z.is_none());
    }
    Ok(out)
}

/// Counts cells where the generated sample is significantly over- or
/// under-represented relative to the test sample (one-sided tests at
/// `significance` in each direction).
pub fn representation_test(
    test: &PointSet,
    gen: &PointSet,
    part: &Partition,
    significance: f64,
) -> Result<RepresentationResult> {
    let tc = counts(part, test)?;
    let gc = counts(part, gen)?;
    ndb_from_counts(&tc, test.len(), &gc, gen.len(), significance)
}

/// Per-cell copying test and its `C_T` summary.
///
/// Cell membership restricts which points enter each in-cell test, but every
/// distance is measured to the full training set. A cell is included when
/// `Q_m(π) ≥ τ` and both the test and generated samples have at least
/// `min_cell` points in it; `C_T` is the `P_n(π)`-weighted mean of in-cell
/// `Z_U` over included cells.
pub fn ct_test(
    train: &PointSet,
    test: &PointSet,
    gen: &PointSet,
    part: &Partition,
    config: &CopyConfig,
) -> Result<CopyReport> {
    if config.min_cell == 0 {
        return Err(invalid("min_cell must be at least 1"));
    }
    let tau = config.tau.resolve(config.min_cell, gen.len());
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid("tau must lie in [0, 1]"));
    }
    let k = part.k();
    let index = NnIndex::new(train);
    let test_d = distance_sample_indexed(test, &index, config.metric)?;
    let gen_d = distance_sample_indexed(gen, &index, config.metric)?;
    let global = mann_whitney(test_d.values(), gen_d.values())?;

    let train_cells = part.assign(train)?;
    let test_cells = part.assign(test)?;
    let gen_cells = part.assign(gen)?;
    let train_counts = tally(&train_cells, k);
    let test_counts = tally(&test_cells, k);
    let gen_counts = tally(&gen_cells, k);
    let rep = ndb_from_counts(
        &test_counts,
        test.len(),
        &gen_counts,
        gen.len(),
        config.significance,
    )?;

    let (n, m) = (test.len() as f64, gen.len() as f64);
    let mut cells = Vec::with_capacity(k);
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for c in 0..k {
        let p_frac = test_counts[c] as f64 / n;
        let q_frac = gen_counts[c] as f64 / m;
        let exclusion = if q_frac < tau {
            Some(Exclusion::BelowTau)
        } else if test_counts[c] < config.min_cell {
            Some(Exclusion::InsufficientTest)
        } else if gen_counts[c] < config.min_cell {
            Some(Exclusion::InsufficientGen)
        } else {
            None
        };
        let z_u = match exclusion {
            Some(_) => None,
            None => {
                let a = members(&test_cells, c, test_d.values());
                let b = members(&gen_cells, c, gen_d.values());
                let z = mann_whitney(&a, &b)?.z_u;
                weighted += p_frac * z;
                weight += p_frac;
                Some(z)
            }
        };
        cells.push(CellResult {
            cell: c,
            train_count: train_counts[c],
            test_count: test_counts[c],
            gen_count: gen_counts[c],
            p_frac,
            q_frac,
            z_u,
            z_pi: rep.z[c],
            included_in_ct: exclusion.is_none(),
            exclusion_reason: exclusion,
        });
    }
    if weight == 0.0 {
        return Err(Error::NoRepresentedCells);
    }

    Ok(CopyReport {
        global,
        cells,
        c_t: weighted / weight,
        ndb_over: rep.ndb_over,
        ndb_under: rep.ndb_under,
        params: CopyParams {
            k,
            tau,
            min_cell: config.min_cell,
            significance: config.significance,
            metric: config.metric,
            seed: part.seed(),
        },
    })
}

fn tally(labels: &[usize], k: usize) -> Vec<usize> {
    let mut out = alloc::vec![0usize; k];
    for &c in labels {
        out[c] += 1;
    }
    out
}

fn members(labels: &[usize], cell: usize, values: &[f64]) -> Vec<f64> {
    labels
        .iter()
        .zip(values)
        .filter(|(&c, _)| c == cell)
        .map(|(_, &v)| v)
        .collect()
}
