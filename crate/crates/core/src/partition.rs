//! Instance-space partition from k-means on the training set.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::dataset::{PointSet, Seed};
use crate::error::{invalid, Error, Result};
use crate::metric::squared_euclidean;

pub const DEFAULT_MAX_ITERS: usize = 300;

/// Fitted k-means centroids. A point belongs to the cell of its nearest
/// centroid, ties going to the lowest centroid index.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    centroids: Vec<f64>,
    k: usize,
    dim: usize,
    seed: Seed,
    inertia: f64,
    iterations: usize,
    inertia_trace: Vec<f64>,
}

impl Partition {
    /// Rebuilds a partition from stored centroids (row-major, `k × dim`).
    pub fn from_centroids(centroids: Vec<f64>, dim: usize, seed: Seed) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if centroids.is_empty() || centroids.len() % dim != 0 {
            return Err(invalid(
                "centroid buffer must hold k >= 1 rows of length dim",
            ));
        }
        if centroids.iter().any(|c| !c.is_finite()) {
            return Err(invalid("centroids must be finite"));
        }
        let k = centroids.len() / dim;
        Ok(Self {
            centroids,
            k,
            dim,
            seed,
            inertia: 0.0,
            iterations: 0,
            inertia_trace: Vec::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    /// Sum of squared distances from training points to their centroids.
    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Inertia after the initial assignment and after every Lloyd step.
    pub fn inertia_trace(&self) -> &[f64] {
        &self.inertia_trace
    }

    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }

    pub fn centroids(&self) -> &[f64] {
        &self.centroids
    }

    pub fn assign_point(&self, x: &[f64]) -> usize {
        nearest_centroid(&self.centroids, self.dim, x).0
    }

    pub fn assign(&self, points: &PointSet) -> Result<Vec<usize>> {
        if points.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: points.dim(),
            });
        }
        Ok(points.rows().map(|x| self.assign_point(x)).collect())
    }
}

fn nearest_centroid(centroids: &[f64], dim: usize, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centre) in centroids.chunks_exact(dim).enumerate() {
        let d = squared_euclidean(x, centre);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn assign_all(centroids: &[f64], dim: usize, points: &PointSet) -> (Vec<usize>, Vec<f64>) {
    points
        .rows()
        .map(|x| nearest_centroid(centroids, dim, x))
        .unzip()
}

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or `max_iters` updates have run. A cluster that empties out is
/// moved onto the point currently farthest from its own centroid.
pub fn fit_kmeans(train: &PointSet, k: usize, seed: Seed, max_iters: usize) -> Result<Partition> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let distinct = train.distinct_rows();
    if k > distinct {
        return Err(Error::TooManyClusters { k, distinct });
    }
    let dim = train.dim();
    let n = train.len();
    let mut rng = seed.rng();

    // k-means++ seeding.
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(train.row(first));
    let mut d2: Vec<f64> = train
        .rows()
        .map(|x| squared_euclidean(x, train.row(first)))
        .collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in d2.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
        // k <= distinct guarantees some point still has positive weight.
        let pick = pick.expect("a point with positive seeding weight");
        let chosen = train.row(pick);
        centroids.extend_from_slice(chosen);
        for (w, x) in d2.iter_mut().zip(train.rows()) {
            *w = w.min(squared_euclidean(x, chosen));
        }
    }

    let (mut labels, mut dists) = assign_all(&centroids, dim, train);
    let mut trace = vec![dists.iter().sum::<f64>()];
    let mut iterations = 0;
    for _ in 0..max_iters {
        iterations += 1;
        update_centroids(&mut centroids, dim, k, train, &labels, &mut dists);
        let (new_labels, new_dists) = assign_all(&centroids, dim, train);
        trace.push(new_dists.iter().sum());
        dists = new_dists;
        if new_labels == labels {
            break;
        }
        labels = new_labels;
    }

    let inertia = *trace.last().expect("trace starts nonempty");
    Ok(Partition {
        centroids,
        k,
        dim,
        seed,
        inertia,
        iterations,
        inertia_trace: trace,
    })
}

fn update_centroids(
    centroids: &mut [f64],
    dim: usize,
    k: usize,
    train: &PointSet,
    labels: &[usize],
    dists: &mut [f64],
) {
    let mut sums = vec![0.0; k * dim];
    let mut counts = vec![0usize; k];
    for (x, &c) in train.rows().zip(labels) {
        counts[c] += 1;
        for (s, v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(x) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let inv = counts[c] as f64;
            for (dst, s) in centroids[c * dim..(c + 1) * dim]
                .iter_mut()
                .zip(&sums[c * dim..(c + 1) * dim])
            {
                *dst = s / inv;
            }
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            let far = dists
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &d)| {
                    if d > best.1 {
                        (i, d)
                    } else {
                        best
                    }
                });
            centroids[c * dim..(c + 1) * dim].copy_from_slice(train.row(far.0));
            dists[far.0] = 0.0;
        }
    }
}

/// Per-cell counts and fractions of each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOccupancy {
    pub train_count: Vec<usize>,
    pub test_count: Vec<usize>,
    pub gen_count: Vec<usize>,
    /// `T(π)`.
    pub train_frac: Vec<f64>,
    /// `P_n(π)`.
    pub test_frac: Vec<f64>,
    /// `Q_m(π)`.
    pub gen_frac: Vec<f64>,
}

pub(crate) fn counts(part: &Partition, points: &PointSet) -> Result<Vec<usize>> {
    let mut out = vec![0usize; part.k()];
    for c in part.assign(points)? {
        out[c] += 1;
    }
    Ok(out)
}

pub(crate) fn fractions(counts: &[usize], total: usize) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

pub fn occupancy(
    part: &Partition,
    train: &PointSet,
    test: &PointSet,
    gen: &PointSet,
) -> Result<CellOccupancy> {
    let train_count = counts(part, train)?;
    let test_count = counts(part, test)?;
    let gen_count = counts(part, gen)?;
    Ok(CellOccupancy {
        train_frac: fractions(&train_count, train.len()),
        test_frac: fractions(&test_count, test.len()),
        gen_frac: fractions(&gen_count, gen.len()),
        train_count,
        test_count,
        gen_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Role, Sampler};
    use rand_distr::{Distribution, StandardNormal};

    fn blobs(seed: u64) -> PointSet {
        let mut rng = Seed(seed).rng();
        let mut data = Vec::new();
        for i in 0..200 {
            let c = if i % 2 == 0 { 0.0 } else { 100.0 };
            for _ in 0..2 {
                let z: f64 = StandardNormal.sample(&mut rng);
                data.push(c + z);
            }
        }
        PointSet::new(data, 2, Role::Train).unwrap()
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let t = PointSet::from_rows(&[[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]], Role::Train).unwrap();
        let p = fit_kmeans(&t, 1, Seed(5), DEFAULT_MAX_ITERS).unwrap();
        assert!((p.centroid(0)[0] - 1.0).abs() < 1e-15);
        assert!((p.centroid(0)[1] - 1.0).abs() < 1e-15);
        assert_eq!(p.assign(&t).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn separated_blobs_are_recovered() {
        let t = blobs(3);
        let p = fit_kmeans(&t, 2, Seed(1), DEFAULT_MAX_ITERS).unwrap();
        let mut found = [false, false];
        for c in 0..2 {
            let ctr = p.centroid(c);
            for (j, truth) in [0.0, 100.0].iter().enumerate() {
                if (ctr[0] - truth).hypot(ctr[1] - truth) < 1.0 {
                    found[j] = true;
                }
            }
        }
        assert_eq!(found, [true, true]);
    }

    #[test]
    fn fit_is_deterministic() {
        let t = blobs(9);
        assert_eq!(
            fit_kmeans(&t, 5, Seed(2), 50).unwrap(),
            fit_kmeans(&t, 5, Seed(2), 50).unwrap()
        );
    }

    #[test]
    fn too_many_clusters() {
        let t = PointSet::from_rows(&[[0.0], [0.0], [1.0]], Role::Train).unwrap();
        assert_eq!(
            fit_kmeans(&t, 3, Seed(0), 10),
            Err(Error::TooManyClusters { k: 3, distinct: 2 })
        );
        assert!(fit_kmeans(&t, 2, Seed(0), 10).is_ok());
        assert!(fit_kmeans(&t, 0, Seed(0), 10).is_err());
    }

    #[test]
    fn assignment_rules() {
        let p = Partition::from_centroids(alloc::vec![0.0, 10.0], 1, Seed(0)).unwrap();
        let x = PointSet::from_values(&[4.0, 10.0, 5.0], Role::Test).unwrap();
        assert_eq!(p.assign(&x).unwrap(), vec![0, 1, 0]);

        let q = Partition::from_centroids(alloc::vec![9.0, -1.0, 7.0, 1.0], 1, Seed(0)).unwrap();
        assert_eq!(q.assign_point(&[0.0]), 1);
        assert!(q
            .assign(&PointSet::from_rows(&[[0.0, 0.0]], Role::Test).unwrap())
            .is_err());
    }

    #[test]
    fn occupancy_fractions() {
        let p = Partition::from_centroids(alloc::vec![0.0, 10.0], 1, Seed(0)).unwrap();
        let train = PointSet::from_values(&[0.0, 1.0, 9.0], Role::Train).unwrap();
        let test = PointSet::from_values(&[0.0, 10.0], Role::Test).unwrap();
        let gen = PointSet::from_values(&[0.5, 1.0, 2.0], Role::Generated).unwrap();
        let occ = occupancy(&p, &train, &test, &gen).unwrap();
        assert_eq!(occ.test_frac, vec![0.5, 0.5]);
        assert_eq!(occ.gen_count, vec![3, 0]);
        assert_eq!(occ.gen_frac, vec![1.0, 0.0]);

        let one = Partition::from_centroids(alloc::vec![3.0], 1, Seed(0)).unwrap();
        let occ = occupancy(&one, &train, &test, &gen).unwrap();
        assert_eq!(
            (occ.train_frac[0], occ.test_frac[0], occ.gen_frac[0]),
            (1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn lloyd_never_increases_inertia() {
        for s in 0..10 {
            let mut rng = Seed(s).rng();
            let t = Sampler::Moons { noise: 0.1 }
                .draw(300, Role::Train, &mut rng)
                .unwrap();
            let p = fit_kmeans(&t, 8, Seed(s), DEFAULT_MAX_ITERS).unwrap();
            for w in p.inertia_trace().windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "{w:?}");
            }
            let occ = occupancy(&p, &t, &t, &t).unwrap();
            assert!((occ.train_frac.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
