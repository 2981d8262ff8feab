//! Mann-Whitney U machinery for comparing two distance samples.
//!
//! With `A_i` the test-sample distances (`n` of them) and `B_j` the generated
//! distances (`m`), `U = #{(i, j) : B_j > A_i}` with ties counted as one half.
//! `U / mn` estimates the probability that a generated point is farther from
//! the training set than a test point; under the null it is one half. The
//! z-score uses `μ = mn/2` and `σ = sqrt(mn(m + n + 1)/12)`, with no tie or
//! continuity correction.

use alloc::vec::Vec;

use crate::dataset::{Role, Sampler, Seed};
use crate::error::{invalid, Error, Result};
use crate::math::{exp, mean_and_sd, sqrt};
use crate::metric::{distance_sample_indexed, Metric, NnIndex};

/// Below this many points on either side the normal approximation is shaky.
pub const NORMAL_APPROX_MIN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UTestResult {
    /// `U_{Q_m}`: pairs with generated distance above test distance, ties 1/2.
    pub u: f64,
    /// Sum of the generated sample's midranks in the pooled ranking.
    pub rank_sum: f64,
    /// `U / mn`, the estimate of `Pr(B > A)`.
    pub delta_hat: f64,
    pub z_u: f64,
    /// Generated-side size.
    pub m: usize,
    /// Test-side size.
    pub n: usize,
    /// Number of (test, generated) pairs with exactly equal values.
    pub tie_count: u64,
    /// Set when `min(m, n) < 20`.
    pub small_sample: bool,
}

/// `(u - mn/2) / sqrt(mn(m + n + 1)/12)`.
pub fn z_score(u: f64, m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    (u - m * n / 2.0) / sqrt(m * n * (m + n + 1.0) / 12.0)
}

/// `Z_U` when `U = 0`: `-sqrt(3mn / (m + n + 1))`.
pub fn copy_limit_z(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    -sqrt(3.0 * m * n / (m + n + 1.0))
}

/// Runs the U test of generated distances against test distances.
pub fn mann_whitney(test: &[f64], generated: &[f64]) -> Result<UTestResult> {
    let n = test.len();
    let m = generated.len();
    if n == 0 || m == 0 {
        return Err(Error::EmptyPointSet);
    }
    if let Some(pos) = test.iter().chain(generated).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: pos, col: 0 });
    }

    // (value, is_generated)
    let mut pooled: Vec<(f64, bool)> = test
        .iter()
        .map(|&v| (v, false))
        .chain(generated.iter().map(|&v| (v, true)))
        .collect();
    pooled.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sum = 0.0;
    let mut tie_count = 0u64;
    let mut start = 0;
    while start < pooled.len() {
        let mut end = start + 1;
        while end < pooled.len() && pooled[end].0 == pooled[start].0 {
            end += 1;
        }
        // Ranks start..end (1-based start+1..=end) share their mean.
        let midrank = (start + 1 + end) as f64 / 2.0;
        let gen_in_group = pooled[start..end].iter().filter(|p| p.1).count() as u64;
        let test_in_group = (end - start) as u64 - gen_in_group;
        rank_sum += gen_in_group as f64 * midrank;
        tie_count += gen_in_group * test_in_group;
        start = end;
    }

    let mf = m as f64;
    let u = rank_sum - mf * (mf + 1.0) / 2.0;
    Ok(UTestResult {
        u,
        rank_sum,
        delta_hat: u / (mf * n as f64),
        z_u: z_score(u, m, n),
        m,
        n,
        tie_count,
        small_sample: m.min(n) < NORMAL_APPROX_MIN,
    })
}

/// Spread of `Z_U` over repeated draws with `Q = P`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSummary {
    pub mean_z: f64,
    pub std_z: f64,
    pub z_values: Vec<f64>,
}

/// Draws fresh `T`, `P_n` and `Q_m` from one sampler per trial and runs the
/// global test each time. Trial `i` uses the stream of `seed.derive(i)`.
pub fn null_calibration(
    sampler: &Sampler,
    train_size: usize,
    n: usize,
    m: usize,
    trials: usize,
    seed: Seed,
) -> Result<NullSummary> {
    sampler.validate()?;
    if trials < 2 {
        return Err(invalid("null calibration needs at least 2 trials"));
    }
    let z_values = (0..trials)
        .map(|trial| {
            let mut rng = seed.derive(trial as u64).rng();
            let train = sampler.draw(train_size, Role::Train, &mut rng)?;
            let test = sampler.draw(n, Role::Test, &mut rng)?;
            let gen = sampler.draw(m, Role::Generated, &mut rng)?;
            let index = NnIndex::new(&train);
            let a = distance_sample_indexed(&test, &index, Metric::SquaredEuclidean)?;
            let b = distance_sample_indexed(&gen, &index, Metric::SquaredEuclidean)?;
            Ok(mann_whitney(a.values(), b.values())?.z_u)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean_z, std_z) = mean_and_sd(&z_values);
    Ok(NullSummary {
        mean_z,
        std_z,
        z_values,
    })
}

/// Where the reference value of `Δ` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaReference {
    Known(f64),
    /// Estimate by exhaustive pair comparison over `points` fresh draws from
    /// each distribution (at least 1000, so at least 10⁶ pairs).
    Oracle {
        points: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationRow {
    pub t: f64,
    /// Fraction of trials with `|U/mn − Δ| ≥ t`.
    pub empirical_exceedance: f64,
    /// `exp(−2t²mn/(m + n))`.
    pub bound: f64,
}

impl ConcentrationRow {
    pub fn within(&self, slack: f64) -> bool {
        self.empirical_exceedance <= self.bound + slack
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationTable {
    pub delta: f64,
    /// Rough standard error of an oracle estimate (zero for a known `Δ`).
    pub delta_std_error: f64,
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    pub rows: Vec<ConcentrationRow>,
}

/// `exp(−2t²mn/(m + n))`.
pub fn concentration_bound(t: f64, m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    exp(-2.0 * t * t * m * n / (m + n))
}

/// Monte Carlo check of the concentration of `U/mn` around `Δ`.
///
/// The training set is drawn once from `p_spec` (stream `seed.derive(0)`) and
/// held fixed, so `Δ` is the probability conditioned on it. Each trial draws
/// `n` test points from `p_spec` and `m` generated points from `q_spec`.
#[allow(clippy::too_many_arguments)]
pub fn concentration_check(
    p_spec: &Sampler,
    q_spec: &Sampler,
    train_size: usize,
    n: usize,
    m: usize,
    trials: usize,
    t_grid: &[f64],
    reference: DeltaReference,
    seed: Seed,
) -> Result<ConcentrationTable> {
    p_spec.validate()?;
    q_spec.validate()?;
    if p_spec.dim() != q_spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: p_spec.dim(),
            found: q_spec.dim(),
        });
    }
    if t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(invalid("every t in the grid must be positive"));
    }
    if trials == 0 {
        return Err(invalid("concentration check needs at least one trial"));
    }

    let train = p_spec.draw(train_size, Role::Train, &mut seed.derive(0).rng())?;
    let index = NnIndex::new(&train);

    let (delta, delta_std_error) = match reference {
        DeltaReference::Known(d) => {
            if !(0.0..=1.0).contains(&d) {
                return Err(invalid("reference delta must lie in [0, 1]"));
            }
            (d, 0.0)
        }
        DeltaReference::Oracle { points } => {
            if points < 1000 {
                return Err(invalid("oracle needs at least 1000 points per side"));
            }
            let mut rng = seed.derive(1).rng();
            let a = p_spec.draw(points, Role::Test, &mut rng)?;
            let b = q_spec.draw(points, Role::Generated, &mut rng)?;
            let da = distance_sample_indexed(&a, &index, Metric::SquaredEuclidean)?;
            let db = distance_sample_indexed(&b, &index, Metric::SquaredEuclidean)?;
            let mut twice = 0u64;
            for &bj in db.values() {
                for &ai in da.values() {
                    twice += if bj > ai {
                        2
                    } else if bj == ai {
                        1
                    } else {
                        0
                    };
                }
            }
            let pairs = (points * points) as f64;
            let k = points as f64;
            (
                twice as f64 / (2.0 * pairs),
                sqrt((2.0 * k + 1.0) / (12.0 * k * k)),
            )
        }
    };

    let deviations = (0..trials)
        .map(|trial| {
            let mut rng = seed.derive(2 + trial as u64).rng();
            let test = p_spec.draw(n, Role::Test, &mut rng)?;
            let gen = q_spec.draw(m, Role::Generated, &mut rng)?;
            let a = distance_sample_indexed(&test, &index, Metric::SquaredEuclidean)?;
            let b = distance_sample_indexed(&gen, &index, Metric::SquaredEuclidean)?;
            Ok((mann_whitney(a.values(), b.values())?.delta_hat - delta).abs())
        })
        .collect::<Result<Vec<f64>>>()?;

    let rows = t_grid
        .iter()
        .map(|&t| ConcentrationRow {
            t,
            empirical_exceedance: deviations.iter().filter(|&&d| d >= t).count() as f64
                / trials as f64,
            bound: concentration_bound(t, m, n),
        })
        .collect();

    Ok(ConcentrationTable {
        delta,
        delta_std_error,
        m,
        n,
        trials,
        rows,
    })
}
