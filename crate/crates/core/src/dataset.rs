//! Point sets, seeds, deterministic splitting and synthetic data.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::math::{cos, sin};

/// The random number generator behind every seeded operation.
pub type SeededRng = ChaCha20Rng;

/// Which sample a point set plays in a three-sample test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// The training set `T` the generator was fitted on.
    Train,
    /// The held-out sample `P_n` from the target distribution.
    Test,
    /// The generated sample `Q_m`.
    Generated,
    /// A second held-out sample, used for bandwidth selection.
    Validation,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Test => "test",
            Role::Generated => "generated",
            Role::Validation => "validation",
        }
    }
}

/// A 64-bit seed.
///
/// Seeds expand into a ChaCha20 generator via [`SeedableRng::seed_from_u64`].
/// Independent sub-streams are addressed by index: [`Seed::stream`] selects
/// ChaCha20 stream `i` under the same key, and [`Seed::derive`] takes the
/// first `u64` of that stream as a child seed. Same seed and parameters give
/// bit-identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> SeededRng {
        ChaCha20Rng::seed_from_u64(self.0)
    }

    pub fn stream(self, index: u64) -> SeededRng {
        let mut rng = self.rng();
        rng.set_stream(index);
        rng
    }

    pub fn derive(self, index: u64) -> Seed {
        Seed(self.stream(index).next_u64())
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

/// A row-major matrix of points sharing one dimension and one [`Role`].
///
/// Invariants (checked on construction): at least one row, `dim >= 1`, and
/// every entry finite.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    dim: usize,
    role: Role,
}

impl PointSet {
    /// Builds a point set from a flat row-major buffer.
    pub fn new(data: Vec<f64>, dim: usize, role: Role) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self { data, dim, role })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], role: Role) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyPointSet)?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, dim, role)
    }

    /// One-dimensional point set, one point per value.
    pub fn from_values(values: &[f64], role: Role) -> Result<Self> {
        Self::new(values.to_vec(), 1, role)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Always false: empty point sets cannot be constructed.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// New point set made of the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Ok(Self {
            data,
            dim: self.dim,
            role: self.role,
        })
    }

    /// Stacks point sets of equal dimension; the result takes `role`.
    pub fn concat(parts: &[&PointSet], role: Role) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyPointSet)?;
        let mut data = Vec::new();
        for p in parts {
            first.check_dim(p.dim)?;
            data.extend_from_slice(&p.data);
        }
        Ok(Self {
            data,
            dim: first.dim,
            role,
        })
    }

    /// Seeded sample of `count` rows without replacement.
    pub fn subsample(&self, count: usize, seed: Seed) -> Result<Self> {
        if count == 0 {
            return Err(Error::EmptyPointSet);
        }
        if count > self.len() {
            return Err(Error::TooFewPoints {
                needed: count,
                got: self.len(),
            });
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut seed.rng());
        idx.truncate(count);
        self.select(&idx)
    }

    /// Seeded sample of `count` rows with replacement.
    pub fn bootstrap(&self, count: usize, seed: Seed) -> Result<Self> {
        if count == 0 {
            return Err(Error::EmptyPointSet);
        }
        let mut rng = seed.rng();
        let n = self.len();
        let idx: Vec<usize> = (0..count).map(|_| rng.random_range(0..n)).collect();
        self.select(&idx)
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    /// Number of distinct rows (exact comparison).
    pub fn distinct_rows(&self) -> usize {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        let cmp_rows = |a: &usize, b: &usize| {
            self.row(*a)
                .iter()
                .zip(self.row(*b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(core::cmp::Ordering::Equal)
        };
        idx.sort_unstable_by(cmp_rows);
        idx.dedup_by(|a, b| self.row(*a) == self.row(*b));
        idx.len()
    }
}

/// Splits rows into disjoint parts by a seeded uniform shuffle.
///
/// Part `i` gets `floor(fractions[i] * N)` rows; the rows left over from
/// flooring go to the first part.
pub fn split(points: &PointSet, fractions: &[f64], seed: Seed) -> Result<Vec<PointSet>> {
    let sum: f64 = fractions.iter().sum();
    if fractions.is_empty()
        || fractions.iter().any(|f| !(*f > 0.0) || !f.is_finite())
        || (sum - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidFractions { sum });
    }
    let n = points.len();
    let mut sizes: Vec<usize> = fractions
        .iter()
        .map(|f| libm::floor(f * n as f64) as usize)
        .collect();
    let allocated: usize = sizes.iter().sum();
    sizes[0] += n.saturating_sub(allocated);
    if sizes.contains(&0) {
        return Err(Error::TooFewPoints {
            needed: fractions.len(),
            got: n,
        });
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed.rng());
    let mut parts = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for size in sizes {
        parts.push(points.select(&idx[start..start + size])?);
        start += size;
    }
    Ok(parts)
}

/// Two interlocking half-circle arcs with isotropic Gaussian noise.
///
/// The first `ceil(n/2)` rows lie on arc A, `(cos θ, sin θ)`; the remaining
/// `floor(n/2)` rows lie on arc B, `(1 - cos θ, 0.5 - sin θ)`, with `θ`
/// uniform on `[0, π]`. Each coordinate then gets `noise * N(0, 1)` added.
pub fn generate_moons(n: usize, noise: f64, seed: Seed) -> Result<PointSet> {
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let mut rng = seed.rng();
    moons(n, noise, Role::Train, &mut rng)
}

fn moons(n: usize, noise: f64, role: Role, rng: &mut SeededRng) -> Result<PointSet> {
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(invalid("moons noise must be a finite nonnegative number"));
    }
    let upper = n.div_ceil(2);
    let mut data = Vec::with_capacity(2 * n);
    for i in 0..n {
        let theta = rng.random::<f64>() * PI;
        let (x, y) = if i < upper {
            (cos(theta), sin(theta))
        } else {
            (1.0 - cos(theta), 0.5 - sin(theta))
        };
        // Noise is always drawn so the stream is identical for every noise level.
        let nx: f64 = rng.sample(StandardNormal);
        let ny: f64 = rng.sample(StandardNormal);
        data.push(x + noise * nx);
        data.push(y + noise * ny);
    }
    PointSet::new(data, 2, role)
}

/// A distribution that point sets can be drawn from in Monte Carlo runs.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    /// Isotropic normal with the same mean in every coordinate.
    Normal { dim: usize, mean: f64, sd: f64 },
    /// The moons distribution of [`generate_moons`].
    Moons { noise: f64 },
    /// A point mass.
    Constant { point: Vec<f64> },
}

impl Sampler {
    pub fn standard_normal(dim: usize) -> Self {
        Sampler::Normal {
            dim,
            mean: 0.0,
            sd: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Sampler::Normal { dim, .. } => *dim,
            Sampler::Moons { .. } => 2,
            Sampler::Constant { point } => point.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Sampler::Normal { dim, mean, sd } => {
                if *dim == 0 || !mean.is_finite() || !sd.is_finite() || *sd < 0.0 {
                    return Err(invalid(
                        "normal sampler needs dim >= 1, finite mean, sd >= 0",
                    ));
                }
            }
            Sampler::Moons { noise } => {
                if !noise.is_finite() || *noise < 0.0 {
                    return Err(invalid("moons sampler needs finite noise >= 0"));
                }
            }
            Sampler::Constant { point } => {
                if point.is_empty() || point.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("constant sampler needs a finite, nonempty point"));
                }
            }
        }
        Ok(())
    }

    pub fn draw(&self, count: usize, role: Role, rng: &mut SeededRng) -> Result<PointSet> {
        self.validate()?;
        if count == 0 {
            return Err(Error::EmptyPointSet);
        }
        match self {
            Sampler::Normal { dim, mean, sd } => {
                let data = (0..count * dim)
                    .map(|_| mean + sd * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                PointSet::new(data, *dim, role)
            }
            Sampler::Moons { noise } => moons(count, *noise, role, rng),
            Sampler::Constant { point } => {
                let mut data = Vec::with_capacity(count * point.len());
                for _ in 0..count {
                    data.extend_from_slice(point);
                }
                PointSet::new(data, point.len(), role)
            }
        }
    }
}
