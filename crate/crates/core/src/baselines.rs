//! Two-sample and three-sample comparison tests.
//!
//! None of these look at distances to individual training points in the way
//! the copy detector does, and most of them cannot tell a generator that
//! resamples its training set from a good one. They are here so sweeps can
//! show that side by side.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand::seq::SliceRandom;

use crate::copy_detector::{ndb_from_counts, RepresentationResult};
use crate::dataset::{PointSet, Role, Seed};
use crate::error::{invalid, Error, Result};
use crate::linalg::{matmul, sqrt_psd, symmetric_eigen, trace};
use crate::math::{exp, mean_and_sd, sqrt, tan};
use crate::metric::{squared_euclidean, Metric, NnIndex};
use crate::partition::{counts, fit_kmeans, fractions, Partition, DEFAULT_MAX_ITERS};

pub const DEFAULT_PR_RESOLUTION: usize = 20;
pub const DEFAULT_PERMUTATIONS: usize = 500;

/// Leave-one-out 1-NN accuracies over the pooled training and generated
/// samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NNAccuracy {
    pub train_acc: f64,
    pub gen_acc: f64,
    pub mean_acc: f64,
    pub m: usize,
}

/// Two-sample nearest-neighbour test.
///
/// Pools the two equal-size samples, predicts each point's label from its
/// nearest other point, and reports accuracy per label. At equal distance a
/// neighbour from the other sample wins, so exact copies are always seen as
/// each other's neighbours. Ideal is 0.5 for both.
pub fn two_sample_nn(train_sub: &PointSet, gen: &PointSet, metric: Metric) -> Result<NNAccuracy> {
    // The metric only changes distances monotonically, so neighbours are the
    // same under either choice.
    let _ = metric;
    let m = train_sub.len();
    if gen.len() != m {
        return Err(Error::SizeMismatch {
            left: m,
            right: gen.len(),
        });
    }
    let pool = PointSet::concat(&[train_sub, gen], Role::Train)?;
    let index = NnIndex::new(&pool);
    let is_train = |i: usize| i < m;

    let mut correct = [0usize; 2];
    for i in 0..2 * m {
        let own = is_train(i);
        let prefer = |a: usize, b: usize| {
            let a_other = is_train(a) != own;
            let b_other = is_train(b) != own;
            if a_other != b_other {
                a_other
            } else {
                a < b
            }
        };
        let nb = index
            .nearest_excluding(pool.row(i), i, prefer)?
            .expect("pool holds at least two points");
        if is_train(nb.index) == own {
            correct[usize::from(!own)] += 1;
        }
    }
    let train_acc = correct[0] as f64 / m as f64;
    let gen_acc = correct[1] as f64 / m as f64;
    Ok(NNAccuracy {
        train_acc,
        gen_acc,
        mean_acc: (train_acc + gen_acc) / 2.0,
        m,
    })
}

fn moments(p: &PointSet) -> (Vec<f64>, Vec<f64>) {
    let d = p.dim();
    let n = p.len() as f64;
    let mut mean = vec![0.0; d];
    for row in p.rows() {
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= n);
    let mut cov = vec![0.0; d * d];
    for row in p.rows() {
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in i..d {
                cov[i * d + j] += di * (row[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov[i * d + j] / n;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    (mean, cov)
}

fn regularize(cov: &mut [f64], d: usize) {
    let (values, _) = symmetric_eigen(cov, d);
    let max = values.iter().copied().fold(0.0f64, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 1e-12 * max {
        let eps = 1e-6 * trace(cov, d) / d as f64;
        for i in 0..d {
            cov[i * d + i] += eps;
        }
    }
}

/// Fréchet distance between the maximum-likelihood Gaussians of two samples:
/// `‖μ_a − μ_b‖² + tr(Σ_a + Σ_b − 2(Σ_a Σ_b)^{1/2})`.
///
/// Covariances use the `1/N` normalisation; a rank-deficient covariance gets
/// `1e-6 ×` its mean diagonal added. The cross term is evaluated as
/// `tr((Σ_a^{1/2} Σ_b Σ_a^{1/2})^{1/2})`, which is symmetric and PSD.
pub fn frechet_gaussian(a: &PointSet, b: &PointSet) -> Result<f64> {
    a.check_dim(b.dim())?;
    let d = a.dim();
    let (mu_a, mut cov_a) = moments(a);
    let (mu_b, mut cov_b) = moments(b);
    regularize(&mut cov_a, d);
    regularize(&mut cov_b, d);

    let root_a = sqrt_psd(&cov_a, d);
    let mut inner = matmul(&matmul(&root_a, &cov_b, d), &root_a, d);
    for i in 0..d {
        for j in i + 1..d {
            let s = 0.5 * (inner[i * d + j] + inner[j * d + i]);
            inner[i * d + j] = s;
            inner[j * d + i] = s;
        }
    }
    let (values, _) = symmetric_eigen(&inner, d);
    let cross: f64 = values.iter().map(|&l| sqrt(l.max(0.0))).sum();

    let mean_term = squared_euclidean(&mu_a, &mu_b);
    let value = mean_term + trace(&cov_a, d) + trace(&cov_b, d) - 2.0 * cross;
    Ok(value.max(0.0))
}

/// Cell-occupancy z-test of the generated sample against the training set
/// (the independent-test-set version is
/// [`representation_test`](crate::copy_detector::representation_test)).
pub fn binning_ndb(
    train: &PointSet,
    gen: &PointSet,
    part: &Partition,
    significance: f64,
) -> Result<RepresentationResult> {
    let tc = counts(part, train)?;
    let gc = counts(part, gen)?;
    ndb_from_counts(&tc, train.len(), &gc, gen.len(), significance)
}

/// Precision/recall curve points `(α(λ), β(λ))` for `λ` in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct PRCurve {
    pub lambdas: Vec<f64>,
    pub points: Vec<(f64, f64)>,
}

impl PRCurve {
    pub fn resolution(&self) -> usize {
        self.points.len()
    }
}

fn check_histogram(h: &[f64]) -> Result<()> {
    let sum: f64 = h.iter().sum();
    if h.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

/// `α(λ) = Σ min(λP(π), Q(π))`, `β(λ) = Σ min(P(π), Q(π)/λ)` for
/// `λ_i = tan(i/(r + 1) · π/2)`, `i = 1..=r`.
pub fn precision_recall(p_frac: &[f64], q_frac: &[f64], r: usize) -> Result<PRCurve> {
    if r == 0 {
        return Err(invalid("precision/recall resolution must be at least 1"));
    }
    if p_frac.is_empty() || p_frac.len() != q_frac.len() {
        return Err(Error::SizeMismatch {
            left: p_frac.len(),
            right: q_frac.len(),
        });
    }
    check_histogram(p_frac)?;
    check_histogram(q_frac)?;
    let lambdas: Vec<f64> = (1..=r)
        .map(|i| tan(i as f64 / (r + 1) as f64 * FRAC_PI_2))
        .collect();
    let points = lambdas
        .iter()
        .map(|&l| {
            let alpha = p_frac
                .iter()
                .zip(q_frac)
                .map(|(p, q)| (l * p).min(*q))
                .sum();
            let beta = p_frac.iter().zip(q_frac).map(|(p, q)| p.min(q / l)).sum();
            (alpha, beta)
        })
        .collect();
    Ok(PRCurve { lambdas, points })
}

/// Cell histograms of both samples over k-means cells fitted on their union.
pub fn pr_histograms(
    train: &PointSet,
    gen: &PointSet,
    k: usize,
    seed: Seed,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let pooled = PointSet::concat(&[train, gen], Role::Train)?;
    let part = fit_kmeans(&pooled, k, seed, DEFAULT_MAX_ITERS)?;
    let p = fractions(&counts(&part, train)?, train.len());
    let q = fractions(&counts(&part, gen)?, gen.len());
    Ok((p, q))
}

/// Precision/recall curve averaged over `repeats` independently seeded
/// clusterings of the pooled sample (repeat `i` uses `seed.derive(i)`).
pub fn precision_recall_kmeans(
    train: &PointSet,
    gen: &PointSet,
    k: usize,
    r: usize,
    repeats: usize,
    seed: Seed,
) -> Result<PRCurve> {
    if repeats == 0 {
        return Err(invalid("need at least one clustering"));
    }
    let mut acc: Option<PRCurve> = None;
    for rep in 0..repeats {
        let (p, q) = pr_histograms(train, gen, k, seed.derive(rep as u64))?;
        let curve = precision_recall(&p, &q, r)?;
        acc = Some(match acc {
            None => curve,
            Some(mut a) => {
                for (x, y) in a.points.iter_mut().zip(&curve.points) {
                    x.0 += y.0;
                    x.1 += y.1;
                }
                a
            }
        });
    }
    let mut curve = acc.expect("at least one repeat");
    for p in &mut curve.points {
        p.0 /= repeats as f64;
        p.1 /= repeats as f64;
    }
    Ok(curve)
}

/// Gaussian RBF bandwidth choice for the kernel MMD test.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth {
    /// Median pairwise Euclidean distance over the pooled three samples.
    #[default]
    Median,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MMDResult {
    pub mmd2_train_gen: f64,
    pub mmd2_train_test: f64,
    /// `mmd2_train_gen − mmd2_train_test`; negative when the generated
    /// sample is closer to the training set than the test sample is.
    pub gap: f64,
    /// Permutation p-value for `H0: MMD(T, Q_m) ≥ MMD(T, P_n)`.
    pub p_value: f64,
    /// Standard deviation of the gap under test/generated relabelling.
    pub null_sd: f64,
    pub bandwidth: f64,
}

/// Median pairwise Euclidean distance among all rows of the given sets.
pub fn median_pairwise_distance(sets: &[&PointSet]) -> Result<f64> {
    let pooled = PointSet::concat(sets, Role::Train)?;
    let n = pooled.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let mut sq = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let xi = pooled.row(i);
        for j in i + 1..n {
            sq.push(squared_euclidean(xi, pooled.row(j)));
        }
    }
    let mid = sq.len() / 2;
    let (_, upper, _) = sq.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = sqrt(*upper);
    if sq.len() % 2 == 1 {
        return Ok(upper);
    }
    let lower = sq[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(0.5 * (sqrt(lower) + upper))
}

/// Three-sample kernel MMD comparison of `MMD²(T, Q_m)` against
/// `MMD²(T, P_n)` with biased (V-statistic) estimates.
///
/// The p-value comes from `permutations` relabellings of the pooled test and
/// generated points into groups of the original sizes, permutation `b`
/// shuffled with `seed.derive(b)`:
/// `p = (1 + #{gap* ≤ gap}) / (1 + B)`.
pub fn kmmd_three_sample(
    train: &PointSet,
    test: &PointSet,
    gen: &PointSet,
    bandwidth: Bandwidth,
    permutations: usize,
    seed: Seed,
) -> Result<MMDResult> {
    train.check_dim(test.dim())?;
    train.check_dim(gen.dim())?;
    if permutations == 0 {
        return Err(invalid("kernel MMD needs at least one permutation"));
    }
    let h = match bandwidth {
        Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        Bandwidth::Fixed(_) => return Err(invalid("bandwidth must be positive and finite")),
        Bandwidth::Median => median_pairwise_distance(&[train, test, gen])?,
    };
    if !(h > 0.0) {
        return Err(Error::DegenerateBandwidth);
    }
    let gamma = 1.0 / (2.0 * h * h);
    let kernel = |a: &[f64], b: &[f64]| exp(-gamma * squared_euclidean(a, b));

    let nt = train.len();
    let n = test.len();
    let m = gen.len();
    let pool = PointSet::concat(&[test, gen], Role::Train)?;
    let big_n = n + m;

    let mut tt = nt as f64;
    for i in 0..nt {
        for j in i + 1..nt {
            tt += 2.0 * kernel(train.row(i), train.row(j));
        }
    }
    let mean_tt = tt / (nt * nt) as f64;

    // Row sums of the train-vs-pool kernel block.
    let r: Vec<f64> = pool
        .rows()
        .map(|z| train.rows().map(|t| kernel(t, z)).sum())
        .collect();

    // Pool Gram: column sums always; the full upper triangle only when the
    // group sizes differ and the quadratic term survives.
    let keep_gram = m != n;
    let mut col = vec![1.0; big_n];
    let mut gram = if keep_gram {
        vec![0.0; big_n * big_n]
    } else {
        Vec::new()
    };
    let mut block_pp = n as f64;
    let mut block_qq = m as f64;
    for i in 0..big_n {
        if keep_gram {
            gram[i * big_n + i] = 1.0;
        }
        for j in i + 1..big_n {
            let kij = kernel(pool.row(i), pool.row(j));
            col[i] += kij;
            col[j] += kij;
            if keep_gram {
                gram[i * big_n + j] = kij;
                gram[j * big_n + i] = kij;
            }
            if j < n {
                block_pp += 2.0 * kij;
            } else if i >= n {
                block_qq += 2.0 * kij;
            }
        }
    }
    let total: f64 = col.iter().sum();
    let r_total: f64 = r.iter().sum();

    let (ntf, nf, mf) = (nt as f64, n as f64, m as f64);
    let mmd2_train_test =
        mean_tt - 2.0 * r[..n].iter().sum::<f64>() / (ntf * nf) + block_pp / (nf * nf);
    let mmd2_train_gen =
        mean_tt - 2.0 * r[n..].iter().sum::<f64>() / (ntf * mf) + block_qq / (mf * mf);

    // Gap for a relabelling where `gen_idx` are the "generated" positions.
    let quad_coef = 1.0 / (mf * mf) - 1.0 / (nf * nf);
    let relabelled_gap = |gen_idx: &[usize]| {
        let ra: f64 = gen_idx.iter().map(|&i| r[i]).sum();
        let ca: f64 = gen_idx.iter().map(|&i| col[i]).sum();
        let mut g = -2.0 * ra / (ntf * mf) + 2.0 * (r_total - ra) / (ntf * nf)
            - (total - 2.0 * ca) / (nf * nf);
        if keep_gram {
            let mut s = 0.0;
            for &i in gen_idx {
                let row = &gram[i * big_n..(i + 1) * big_n];
                for &j in gen_idx {
                    s += row[j];
                }
            }
            g += quad_coef * s;
        }
        g
    };

    let observed_idx: Vec<usize> = (n..big_n).collect();
    let observed = relabelled_gap(&observed_idx);
    let mut null = Vec::with_capacity(permutations);
    for b in 0..permutations {
        let mut perm: Vec<usize> = (0..big_n).collect();
        perm.shuffle(&mut seed.derive(b as u64).rng());
        null.push(relabelled_gap(&perm[..m]));
    }
    let below = null.iter().filter(|&&g| g <= observed).count();
    let (_, null_sd) = mean_and_sd(&null);

    Ok(MMDResult {
        mmd2_train_gen,
        mmd2_train_test,
        gap: mmd2_train_gen - mmd2_train_test,
        p_value: (1 + below) as f64 / (1 + permutations) as f64,
        null_sd,
        bandwidth: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_moons, Sampler};
    use alloc::vec;

    fn vals(v: &[f64], role: Role) -> PointSet {
        PointSet::from_values(v, role).unwrap()
    }

    /// Direct O(N²) biased MMD² used as an oracle.
    fn mmd2_direct(x: &PointSet, y: &PointSet, h: f64) -> f64 {
        let k = |a: &[f64], b: &[f64]| (-squared_euclidean(a, b) / (2.0 * h * h)).exp();
        let mean = |p: &PointSet, q: &PointSet| {
            let mut s = 0.0;
            for a in p.rows() {
                for b in q.rows() {
                    s += k(a, b);
                }
            }
            s / (p.len() * q.len()) as f64
        };
        mean(x, x) - 2.0 * mean(x, y) + mean(y, y)
    }

    #[test]
    fn nn_exact_copy_and_separated() {
        let t = generate_moons(60, 0.1, Seed(1)).unwrap();
        let copy = t.clone().with_role(Role::Generated);
        let r = two_sample_nn(&t, &copy, Metric::SquaredEuclidean).unwrap();
        assert_eq!((r.train_acc, r.gen_acc), (0.0, 0.0));

        let far: Vec<f64> = t.as_slice().iter().map(|v| v + 100.0).collect();
        let far = PointSet::new(far, 2, Role::Generated).unwrap();
        let r = two_sample_nn(&t, &far, Metric::SquaredEuclidean).unwrap();
        assert_eq!((r.train_acc, r.gen_acc, r.mean_acc), (1.0, 1.0, 1.0));
    }

    #[test]
    fn nn_one_dimensional_example() {
        let r = two_sample_nn(
            &vals(&[0.0, 2.0], Role::Train),
            &vals(&[0.9, 1.1], Role::Generated),
            Metric::Euclidean,
        )
        .unwrap();
        assert_eq!((r.train_acc, r.gen_acc, r.mean_acc), (0.0, 1.0, 0.5));
        assert!(matches!(
            two_sample_nn(
                &vals(&[0.0], Role::Train),
                &vals(&[1.0, 2.0], Role::Generated),
                Metric::Euclidean
            ),
            Err(Error::SizeMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn frechet_examples() {
        let a = generate_moons(200, 0.1, Seed(4)).unwrap();
        assert!(frechet_gaussian(&a, &a).unwrap() < 1e-9);

        // Means 0 and 1, both with variance 2/3.
        let x = vals(&[-1.0, 0.0, 1.0], Role::Train);
        let y = vals(&[0.0, 1.0, 2.0], Role::Generated);
        assert!((frechet_gaussian(&x, &y).unwrap() - 1.0).abs() < 1e-12);

        // Equal means, variances 1 and 4.
        let x = vals(&[-1.0, 1.0], Role::Train);
        let y = vals(&[-2.0, 2.0], Role::Generated);
        assert!((frechet_gaussian(&x, &y).unwrap() - 1.0).abs() < 1e-12);

        let two = PointSet::from_rows(&[[0.0, 0.0]], Role::Train).unwrap();
        assert!(frechet_gaussian(&two, &x).is_err());
    }

    #[test]
    fn frechet_is_symmetric() {
        for s in 0..10 {
            let mut rng = Seed(s).rng();
            let a = Sampler::standard_normal(3)
                .draw(40, Role::Train, &mut rng)
                .unwrap();
            let b = Sampler::Normal {
                dim: 3,
                mean: 0.5,
                sd: 2.0,
            }
            .draw(30, Role::Train, &mut rng)
            .unwrap();
            let ab = frechet_gaussian(&a, &b).unwrap();
            let ba = frechet_gaussian(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-10 * ab.max(1.0), "{ab} {ba}");
        }
    }

    #[test]
    fn frechet_rank_deficient_is_finite() {
        let line = PointSet::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], Role::Train).unwrap();
        let v = frechet_gaussian(&line, &line).unwrap();
        assert!(v.is_finite() && v < 1e-9);
    }

    #[test]
    fn binning_example() {
        let part = Partition::from_centroids(vec![0.0, 10.0], 1, Seed(0)).unwrap();
        let mut t = vec![0.0; 40];
        t.extend(vec![10.0; 60]);
        let mut q = vec![0.0; 60];
        q.extend(vec![10.0; 40]);
        let r = binning_ndb(
            &vals(&t, Role::Train),
            &vals(&q, Role::Generated),
            &part,
            0.05,
        )
        .unwrap();
        assert!((r.z[0] - 2.8284).abs() < 1e-4);
        assert_eq!((r.ndb_over, r.ndb_under), (1, 1));

        let only_first = vals(&vec![0.0; 100], Role::Generated);
        let r = binning_ndb(&vals(&t, Role::Train), &only_first, &part, 0.05).unwrap();
        assert!(r.z[1] < -5.0);
    }

    #[test]
    fn pr_examples() {
        let p = [0.2, 0.3, 0.5];
        let c = precision_recall(&p, &p, 1).unwrap();
        assert!((c.points[0].0 - 1.0).abs() < 1e-12 && (c.points[0].1 - 1.0).abs() < 1e-12);

        let c =
            precision_recall(&[0.5, 0.5, 0.0], &[0.0, 0.0, 1.0], DEFAULT_PR_RESOLUTION).unwrap();
        assert_eq!(c.resolution(), 20);
        assert!(c.points.iter().all(|&(a, b)| a == 0.0 && b == 0.0));
        assert!(c.lambdas.windows(2).all(|w| w[0] < w[1]));

        let c = precision_recall(&[0.5, 0.5], &[1.0, 0.0], 1).unwrap();
        assert!((c.points[0].0 - 0.5).abs() < 1e-12);
        assert!((c.points[0].1 - 0.5).abs() < 1e-12);

        assert!(matches!(
            precision_recall(&[0.5, 0.4], &[0.5, 0.5], 3),
            Err(Error::NotNormalized { .. })
        ));
        assert!(precision_recall(&[1.0], &[1.0], 0).is_err());
    }

    #[test]
    fn pr_permutation_invariant() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let q = [0.25, 0.05, 0.4, 0.3];
        let a = precision_recall(&p, &q, 9).unwrap();
        let b = precision_recall(&[p[3], p[1], p[0], p[2]], &[q[3], q[1], q[0], q[2]], 9).unwrap();
        for (x, y) in a.points.iter().zip(&b.points) {
            assert!((x.0 - y.0).abs() < 1e-15 && (x.1 - y.1).abs() < 1e-15);
        }
    }

    #[test]
    fn pr_kmeans_identical_sets_reach_one() {
        let t = generate_moons(200, 0.1, Seed(1)).unwrap();
        let c = precision_recall_kmeans(&t, &t, 5, 1, 2, Seed(3)).unwrap();
        assert!((c.points[0].0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kmmd_identical_test_and_gen() {
        let t = generate_moons(50, 0.1, Seed(1)).unwrap();
        let p = generate_moons(40, 0.1, Seed(2)).unwrap();
        let r = kmmd_three_sample(&t, &p, &p, Bandwidth::Median, 20, Seed(0)).unwrap();
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn kmmd_single_points() {
        let a = vals(&[0.0], Role::Train);
        let b = vals(&[3.0], Role::Generated);
        let r = kmmd_three_sample(&a, &a, &a, Bandwidth::Fixed(1.0), 1, Seed(0)).unwrap();
        assert_eq!(r.mmd2_train_gen, 0.0);
        let r = kmmd_three_sample(&a, &a, &b, Bandwidth::Fixed(2.0), 1, Seed(0)).unwrap();
        let expect = 2.0 - 2.0 * (-9.0f64 / 8.0).exp();
        assert!((r.mmd2_train_gen - expect).abs() < 1e-15);
        assert!(matches!(
            kmmd_three_sample(&a, &a, &a, Bandwidth::Median, 1, Seed(0)),
            Err(Error::DegenerateBandwidth)
        ));
    }

    #[test]
    fn kmmd_matches_direct_estimates_and_permutation_formula() {
        for (n, m) in [(30, 30), (25, 40)] {
            let mut rng = Seed(n as u64).rng();
            let s = Sampler::Moons { noise: 0.1 };
            let t = s.draw(35, Role::Train, &mut rng).unwrap();
            let p = s.draw(n, Role::Test, &mut rng).unwrap();
            let q = Sampler::Normal {
                dim: 2,
                mean: 0.3,
                sd: 0.5,
            }
            .draw(m, Role::Generated, &mut rng)
            .unwrap();
            let r = kmmd_three_sample(&t, &p, &q, Bandwidth::Fixed(0.7), 50, Seed(1)).unwrap();
            assert!((r.mmd2_train_gen - mmd2_direct(&t, &q, 0.7)).abs() < 1e-12);
            assert!((r.mmd2_train_test - mmd2_direct(&t, &p, 0.7)).abs() < 1e-12);
            assert!(r.mmd2_train_gen >= -1e-9 && r.mmd2_train_test >= -1e-9);
            assert!(r.p_value > 0.0 && r.p_value <= 1.0);

            // Re-derive the permutation null directly from relabelled sets.
            let pool = PointSet::concat(&[&p, &q], Role::Train).unwrap();
            let mut gaps = Vec::new();
            for b in 0..50 {
                let mut perm: Vec<usize> = (0..n + m).collect();
                perm.shuffle(&mut Seed(1).derive(b).rng());
                let qs = pool.select(&perm[..m]).unwrap();
                let ps = pool.select(&perm[m..]).unwrap();
                gaps.push(mmd2_direct(&t, &qs, 0.7) - mmd2_direct(&t, &ps, 0.7));
            }
            let below = gaps.iter().filter(|&&g| g <= r.gap + 1e-12).count();
            assert_eq!(r.p_value, (1 + below) as f64 / 51.0);
            let (_, sd) = mean_and_sd(&gaps);
            assert!((sd - r.null_sd).abs() < 1e-10);
        }
    }

    #[test]
    fn median_distance_small_case() {
        let x = vals(&[0.0, 1.0, 3.0], Role::Train);
        // Distances 1, 3, 2 -> median 2.
        assert_eq!(median_pairwise_distance(&[&x]).unwrap(), 2.0);
        let y = vals(&[0.0, 1.0, 3.0, 7.0], Role::Train);
        // 1,3,7,2,6,4 -> (3 + 4) / 2.
        assert_eq!(median_pairwise_distance(&[&y]).unwrap(), 3.5);
    }
}
