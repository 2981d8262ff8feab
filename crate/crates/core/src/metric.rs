//! Distance from a point to the training set, `d(x) = min_t ‖x − t‖²`.

use alloc::vec::Vec;

use crate::dataset::{PointSet, Role};
use crate::error::{Error, Result};
use crate::math::sqrt;

/// Point-to-point distance used for nearest-neighbour distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Metric {
    #[default]
    SquaredEuclidean,
    Euclidean,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        self.from_squared(squared_euclidean(a, b))
    }

    /// Maps a squared Euclidean distance into this metric.
    pub fn from_squared(self, sq: f64) -> f64 {
        match self {
            Metric::SquaredEuclidean => sq,
            Metric::Euclidean => sqrt(sq),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::SquaredEuclidean => "squared-euclidean",
            Metric::Euclidean => "euclidean",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "squared-euclidean" | "sqeuclidean" => Some(Metric::SquaredEuclidean),
            "euclidean" => Some(Metric::Euclidean),
            _ => None,
        }
    }
}

#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Result of a nearest-neighbour query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub sq_dist: f64,
}

/// Exact nearest-neighbour search over a fixed point set.
///
/// Points are sorted by their first coordinate; a query walks outward from its
/// own position and stops on each side once the first-coordinate gap alone
/// exceeds the best squared distance found. The answer is always the exact
/// minimum, with ties going to the lowest point index unless a caller
/// supplies its own tie rule.
#[derive(Debug, Clone)]
pub struct NnIndex<'a> {
    points: &'a PointSet,
    order: Vec<usize>,
    keys: Vec<f64>,
}

impl<'a> NnIndex<'a> {
    pub fn new(points: &'a PointSet) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            points.row(a)[0]
                .total_cmp(&points.row(b)[0])
                .then(a.cmp(&b))
        });
        let keys = order.iter().map(|&i| points.row(i)[0]).collect();
        Self {
            points,
            order,
            keys,
        }
    }

    pub fn points(&self) -> &PointSet {
        self.points
    }

    pub fn nearest(&self, x: &[f64]) -> Result<Neighbor> {
        self.points.check_dim(x.len())?;
        Ok(self
            .search(x, None, |a, b| a < b)
            .expect("index over a nonempty point set"))
    }

    /// Nearest neighbour other than `skip`. `prefer(a, b)` decides whether
    /// candidate `a` replaces the current best `b` at equal distance.
    /// Returns `None` only when the index holds `skip` alone.
    pub fn nearest_excluding(
        &self,
        x: &[f64],
        skip: usize,
        prefer: impl Fn(usize, usize) -> bool,
    ) -> Result<Option<Neighbor>> {
        self.points.check_dim(x.len())?;
        Ok(self.search(x, Some(skip), prefer))
    }

    fn search(
        &self,
        x: &[f64],
        skip: Option<usize>,
        prefer: impl Fn(usize, usize) -> bool,
    ) -> Option<Neighbor> {
        let key = x[0];
        let start = self.keys.partition_point(|&k| k < key);
        let mut hi = start;
        let mut lo = start;
        let mut best: Option<Neighbor> = None;

        loop {
            let gap_hi = self.keys.get(hi).map(|&k| (k - key) * (k - key));
            let gap_lo = if lo > 0 {
                let k = self.keys[lo - 1];
                Some((k - key) * (k - key))
            } else {
                None
            };
            let take_hi = match (gap_hi, gap_lo) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(h), Some(l)) => h <= l,
            };
            let (pos, gap) = if take_hi {
                (hi, gap_hi.unwrap())
            } else {
                (lo - 1, gap_lo.unwrap())
            };
            // Both sides are ordered by gap, so once the nearer frontier is
            // out of reach the search is complete.
            if let Some(b) = best {
                if gap > b.sq_dist {
                    break;
                }
            }
            if take_hi {
                hi += 1;
            } else {
                lo -= 1;
            }

            let idx = self.order[pos];
            if Some(idx) == skip {
                continue;
            }
            let d = squared_euclidean(x, self.points.row(idx));
            let replace = match best {
                None => true,
                Some(b) => d < b.sq_dist || (d == b.sq_dist && prefer(idx, b.index)),
            };
            if replace {
                best = Some(Neighbor {
                    index: idx,
                    sq_dist: d,
                });
            }
        }
        best
    }
}

/// Distance from `x` to its nearest point in `train`.
pub fn nn_distance(x: &[f64], train: &PointSet, metric: Metric) -> Result<f64> {
    train.check_dim(x.len())?;
    let best = train
        .rows()
        .map(|t| squared_euclidean(x, t))
        .fold(f64::INFINITY, f64::min);
    Ok(metric.from_squared(best))
}

/// The empirical sample of distances-to-training-set for one point set.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSample {
    values: Vec<f64>,
    role: Role,
    metric: Metric,
}

impl DistanceSample {
    pub fn new(values: Vec<f64>, role: Role, metric: Metric) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite { row: pos, col: 0 });
        }
        Ok(Self {
            values,
            role,
            metric,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Sub-sample at the given positions, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            values: indices.iter().map(|&i| self.values[i]).collect(),
            role: self.role,
            metric: self.metric,
        }
    }
}

/// Nearest-training-point distance of every row of `points`, in row order.
pub fn distance_sample(
    points: &PointSet,
    train: &PointSet,
    metric: Metric,
) -> Result<DistanceSample> {
    let index = NnIndex::new(train);
    distance_sample_indexed(points, &index, metric)
}

/// As [`distance_sample`] but reusing a prebuilt index over the training set.
pub fn distance_sample_indexed(
    points: &PointSet,
    index: &NnIndex<'_>,
    metric: Metric,
) -> Result<DistanceSample> {
    index.points().check_dim(points.dim())?;
    let values = points
        .rows()
        .map(|x| index.nearest(x).map(|nb| metric.from_squared(nb.sq_dist)))
        .collect::<Result<Vec<_>>>()?;
    DistanceSample::new(values, points.role(), metric)
}
