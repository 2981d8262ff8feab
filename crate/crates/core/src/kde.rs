//! Isotropic Gaussian kernel density estimator used as a tunable generator.
//!
//! Small `σ` makes the model resample its training points almost exactly;
//! large `σ` smears them out. Sweeping `σ` therefore walks a generator from
//! copying to underfitting.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::{PointSet, Role, Seed};
use crate::error::{invalid, Error, Result};
use crate::math::{exp, ln, mean_and_sd, sqrt};
use crate::metric::squared_euclidean;

#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel {
    centers: PointSet,
    sigma: f64,
}

impl KdeModel {
    pub fn new(centers: PointSet, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("kernel width must be positive and finite"));
        }
        Ok(KdeModel { centers, sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn centers(&self) -> &PointSet {
        &self.centers
    }

    pub fn dim(&self) -> usize {
        self.centers.dim()
    }

    fn log_norm(&self) -> f64 {
        let d = self.dim() as f64;
        -0.5 * d * ln(2.0 * PI) - d * ln(self.sigma) - ln(self.centers.len() as f64)
    }

    /// `log q_σ(x)` computed with a streaming log-sum-exp over the centres.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.centers.check_dim(x.len())?;
        let scale = -0.5 / (self.sigma * self.sigma);
        let mut max = f64::NEG_INFINITY;
        let mut acc = 0.0;
        for c in self.centers.rows() {
            let e = scale * squared_euclidean(x, c);
            if e > max {
                acc = acc * exp(max - e) + 1.0;
                max = e;
            } else {
                acc += exp(e - max);
            }
        }
        Ok(self.log_norm() + max + ln(acc))
    }

    pub fn mean_log_density(&self, points: &PointSet) -> Result<f64> {
        self.centers.check_dim(points.dim())?;
        let mut total = 0.0;
        for x in points.rows() {
            total += self.log_density(x)?;
        }
        Ok(total / points.len() as f64)
    }

    /// Draws `m` points: a uniformly chosen centre plus `σ·N(0, I)`.
    pub fn sample(&self, m: usize, seed: Seed) -> Result<PointSet> {
        if m == 0 {
            return Err(Error::EmptyPointSet);
        }
        let d = self.dim();
        let mut rng = seed.rng();
        let mut data = Vec::with_capacity(m * d);
        for _ in 0..m {
            let c = self.centers.row(rng.random_range(0..self.centers.len()));
            for &v in c {
                let z: f64 = rng.sample(StandardNormal);
                data.push(v + self.sigma * z);
            }
        }
        PointSet::new(data, d, Role::Generated)
    }

    /// Posterior `Q(t | x)` over the centres.
    pub fn posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.centers.check_dim(x.len())?;
        let scale = -0.5 / (self.sigma * self.sigma);
        let logits: Vec<f64> = self
            .centers
            .rows()
            .map(|c| scale * squared_euclidean(x, c))
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut w: Vec<f64> = logits.iter().map(|l| exp(l - max)).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        Ok(w)
    }

    /// `Σ_t Q(t | x) ‖x − t‖²`.
    pub fn posterior_sq_distance(&self, x: &[f64]) -> Result<f64> {
        let w = self.posterior(x)?;
        Ok(w.iter()
            .zip(self.centers.rows())
            .map(|(wi, c)| wi * squared_euclidean(x, c))
            .sum())
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive; the endpoints are
/// returned exactly.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 {
        return Err(invalid(
            "log grid needs 0 < lo <= hi and at least one point",
        ));
    }
    if count == 1 {
        return Ok(alloc::vec![lo]);
    }
    let (a, b) = (ln(lo), ln(hi));
    let step = (b - a) / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|i| exp(a + step * i as f64)).collect();
    out[0] = lo;
    out[count - 1] = hi;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSelection {
    pub sigma_star: f64,
    /// `(σ, mean validation log-likelihood)` for every grid value.
    pub table: Vec<(f64, f64)>,
}

/// Picks the grid `σ` maximising mean validation log-likelihood. Ties go to
/// the smaller `σ`.
pub fn mle_bandwidth(
    train: &PointSet,
    validation: &PointSet,
    grid: &[f64],
) -> Result<BandwidthSelection> {
    if grid.is_empty() {
        return Err(invalid("bandwidth grid is empty"));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut table = Vec::with_capacity(sorted.len());
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for &sigma in &sorted {
        let model = KdeModel::new(train.clone(), sigma)?;
        let ll = model.mean_log_density(validation)?;
        if ll > best.1 {
            best = (sigma, ll);
        }
        table.push((sigma, ll));
    }
    Ok(BandwidthSelection {
        sigma_star: best.0,
        table,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorIdentity {
    /// Monte Carlo `E_{x~P}[Σ_t Q(t|x)‖x − t‖²]`.
    pub lhs: f64,
    /// Monte Carlo `E_{x~Q}[Σ_t Q(t|x)‖x − t‖²]`.
    pub rhs: f64,
    /// `d · σ²`, the exact value of the right-hand side.
    pub rhs_closed_form: f64,
    pub rhs_std_error: f64,
}

/// Estimates both sides of the identity
/// `E_P[Σ_t Q(t|x)‖x−t‖²] = E_Q[Σ_t Q(t|x)‖x−t‖²]`. The two sides agree
/// when `σ` maximises the expected log-likelihood of `P`; the right side is
/// always `d σ²`. `lhs` averages over `p_sample`, `rhs` over `draws`
/// model samples from `seed`.
pub fn posterior_identity(
    model: &KdeModel,
    p_sample: &PointSet,
    draws: usize,
    seed: Seed,
) -> Result<PosteriorIdentity> {
    model.centers.check_dim(p_sample.dim())?;
    let mut lhs = 0.0;
    for x in p_sample.rows() {
        lhs += model.posterior_sq_distance(x)?;
    }
    lhs /= p_sample.len() as f64;

    let q = model.sample(draws, seed)?;
    let mut vals = Vec::with_capacity(draws);
    for x in q.rows() {
        vals.push(model.posterior_sq_distance(x)?);
    }
    let (rhs, sd) = mean_and_sd(&vals);
    Ok(PosteriorIdentity {
        lhs,
        rhs,
        rhs_closed_form: model.dim() as f64 * model.sigma * model.sigma,
        rhs_std_error: sd / sqrt(draws as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_moons;
    use alloc::vec;

    #[test]
    fn single_center_is_a_gaussian() {
        let c = PointSet::from_rows(&[[1.0, -2.0]], Role::Train).unwrap();
        let m = KdeModel::new(c, 0.5).unwrap();
        let x = [1.3, -1.6];
        let d2: f64 = 0.09 + 0.16;
        let expect = -(2.0 * PI * 0.25).ln() - d2 / (2.0 * 0.25);
        assert!((m.log_density(&x).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn log_density_matches_naive_and_survives_far_points() {
        let t = generate_moons(30, 0.1, Seed(2)).unwrap();
        let m = KdeModel::new(t.clone(), 0.3).unwrap();
        let x = [0.2, 0.1];
        let naive: f64 = t
            .rows()
            .map(|c| (-squared_euclidean(&x, c) / (2.0 * 0.09)).exp() / (2.0 * PI * 0.09))
            .sum::<f64>()
            / 30.0;
        assert!((m.log_density(&x).unwrap() - naive.ln()).abs() < 1e-12);

        let tiny = KdeModel::new(t, 1e-3).unwrap();
        let v = tiny.log_density(&[50.0, 50.0]).unwrap();
        assert!(v.is_finite() && v < -1e6);
    }

    #[test]
    fn sample_is_deterministic_and_centered() {
        let t = generate_moons(20, 0.05, Seed(1)).unwrap();
        let m = KdeModel::new(t.clone(), 1e-9).unwrap();
        let a = m.sample(50, Seed(3)).unwrap();
        assert_eq!(a, m.sample(50, Seed(3)).unwrap());
        assert_eq!(a.role(), Role::Generated);
        for x in a.rows() {
            let nearest = t
                .rows()
                .map(|c| squared_euclidean(x, c))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-12);
        }
        assert!(KdeModel::new(t, 0.0).is_err());
    }

    #[test]
    fn posterior_sums_to_one() {
        let t = generate_moons(25, 0.1, Seed(5)).unwrap();
        let m = KdeModel::new(t, 0.2).unwrap();
        let w = m.posterior(&[0.5, 0.2]).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn grid_endpoints_and_spacing() {
        let g = log_grid(0.01, 10.0, 20).unwrap();
        assert_eq!((g[0], g[19]), (0.01, 10.0));
        let r = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-12));
        assert!(log_grid(0.0, 1.0, 3).is_err());
        assert_eq!(log_grid(2.0, 2.0, 1).unwrap(), vec![2.0]);
    }

    #[test]
    fn mle_prefers_interior_bandwidth() {
        let t = generate_moons(200, 0.1, Seed(1)).unwrap();
        let v = generate_moons(200, 0.1, Seed(2)).unwrap();
        let grid = log_grid(0.001, 10.0, 25).unwrap();
        let sel = mle_bandwidth(&t, &v, &grid).unwrap();
        assert!(sel.sigma_star > 0.001 && sel.sigma_star < 10.0);
        assert_eq!(sel.table.len(), 25);
        assert!(mle_bandwidth(&t, &v, &[]).is_err());
    }

    #[test]
    fn mle_ties_go_to_smaller_sigma() {
        // Duplicate grid values tie exactly.
        let t = PointSet::from_values(&[0.0, 1.0], Role::Train).unwrap();
        let v = PointSet::from_values(&[0.5], Role::Validation).unwrap();
        let sel = mle_bandwidth(&t, &v, &[0.5, 0.5, 0.25]).unwrap();
        let best = sel
            .table
            .iter()
            .map(|r| r.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let first = sel.table.iter().find(|r| r.1 == best).unwrap().0;
        assert_eq!(sel.sigma_star, first);
    }

    #[test]
    fn identity_rhs_matches_closed_form() {
        let t = generate_moons(100, 0.1, Seed(7)).unwrap();
        let m = KdeModel::new(t, 0.15).unwrap();
        let p = generate_moons(100, 0.1, Seed(8)).unwrap();
        let r = posterior_identity(&m, &p, 4000, Seed(9)).unwrap();
        assert!((r.rhs - r.rhs_closed_form).abs() < 4.0 * r.rhs_std_error + 1e-3);
        assert!(r.lhs > 0.0);
    }
}
