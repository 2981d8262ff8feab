//! Bandwidth sweep of a Gaussian KDE generator: every detector and baseline
//! evaluated on samples from models ranging from near-copying to underfit.
//!
//! Seeds: the partition is fitted with `seed.derive(0)`; trial `t` uses
//! `seed.derive(1 + t)` at every `σ`, so trials at different bandwidths share
//! random numbers. Within a trial, child 0 draws the generated sample,
//! child 1 the training subsample for the NN test and child 2 the kMMD
//! permutations.

use std::fmt::Write as _;

use rayon::prelude::*;

use datacopy_core::baselines::{
    binning_ndb, frechet_gaussian, kmmd_three_sample, two_sample_nn, Bandwidth,
};
use datacopy_core::copy_detector::ct_test;
use datacopy_core::kde::{log_grid, KdeModel};
use datacopy_core::math::mean_and_sd;
use datacopy_core::partition::{fit_kmeans, DEFAULT_MAX_ITERS};
use datacopy_core::{CopyConfig, Error, PointSet, Seed};

use crate::error::{CliError, Result};
use crate::io::write_real;

pub const SWEEP_HEADER: &str =
    "sigma,trial,c_t,global_z_u,nn_train_acc,nn_gen_acc,frechet,ndb_over,ndb_under,kmmd_gap,val_loglik";

const STAT_COLUMNS: [&str; 9] = [
    "c_t",
    "global_z_u",
    "nn_train_acc",
    "nn_gen_acc",
    "frechet",
    "ndb_over",
    "ndb_under",
    "kmmd_gap",
    "val_loglik",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sigmas: Vec<f64>,
    /// Generated sample size per trial.
    pub m: usize,
    pub trials: usize,
    pub cells: usize,
    pub permutations: usize,
    pub copy: CopyConfig,
    pub seed: Seed,
}

/// One `(σ, trial)` evaluation. `c_t` is NaN when no cell passed inclusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub sigma: f64,
    pub trial: usize,
    pub c_t: f64,
    pub global_z_u: f64,
    pub nn_train_acc: f64,
    pub nn_gen_acc: f64,
    pub frechet: f64,
    pub ndb_over: usize,
    pub ndb_under: usize,
    pub kmmd_gap: f64,
    /// Permutation standard deviation of the kMMD gap; not written to CSV.
    pub kmmd_null_sd: f64,
    pub val_loglik: f64,
}

impl SweepRow {
    fn stats(&self) -> [f64; 9] {
        [
            self.c_t,
            self.global_z_u,
            self.nn_train_acc,
            self.nn_gen_acc,
            self.frechet,
            self.ndb_over as f64,
            self.ndb_under as f64,
            self.kmmd_gap,
            self.val_loglik,
        ]
    }
}

/// Parses `lo:hi:N` (N log-spaced values) or a comma-separated list.
pub fn parse_sigmas(spec: &str) -> Result<Vec<f64>> {
    let bad = || {
        CliError::Usage(format!(
            "malformed sigma spec {spec:?}; use lo:hi:N or a comma list"
        ))
    };
    let sigmas = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        log_grid(lo, hi, n).map_err(|_| bad())?
    } else {
        spec.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<f64>>>()?
    };
    if sigmas.is_empty() || sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(bad());
    }
    Ok(sigmas)
}

fn evaluate(
    train: &PointSet,
    test: &PointSet,
    part: &datacopy_core::Partition,
    config: &SweepConfig,
    sigma: f64,
    trial: usize,
    val_loglik: f64,
) -> Result<SweepRow> {
    let seed = config.seed.derive(1 + trial as u64);
    let model = KdeModel::new(train.clone(), sigma)?;
    let gen = model.sample(config.m, seed.derive(0))?;

    let (c_t, global_z_u) = match ct_test(train, test, &gen, part, &config.copy) {
        Ok(r) => (r.c_t, r.global.z_u),
        Err(Error::NoRepresentedCells) => {
            let g =
                datacopy_core::copy_detector::global_test(train, test, &gen, config.copy.metric)?;
            (f64::NAN, g.z_u)
        }
        Err(e) => return Err(e.into()),
    };
    let train_sub = train.subsample(config.m, seed.derive(1))?;
    let nn = two_sample_nn(&train_sub, &gen, config.copy.metric)?;
    let frechet = frechet_gaussian(train, &gen)?;
    let ndb = binning_ndb(train, &gen, part, config.copy.significance)?;
    let mmd = kmmd_three_sample(
        train,
        test,
        &gen,
        Bandwidth::Median,
        config.permutations,
        seed.derive(2),
    )?;

    Ok(SweepRow {
        sigma,
        trial,
        c_t,
        global_z_u,
        nn_train_acc: nn.train_acc,
        nn_gen_acc: nn.gen_acc,
        frechet,
        ndb_over: ndb.ndb_over,
        ndb_under: ndb.ndb_under,
        kmmd_gap: mmd.gap,
        kmmd_null_sd: mmd.null_sd,
        val_loglik,
    })
}

/// Runs every `(σ, trial)` pair, in parallel, and returns rows ordered by
/// `σ` index then trial.
pub fn run_sweep(
    train: &PointSet,
    test: &PointSet,
    validation: &PointSet,
    config: &SweepConfig,
) -> Result<Vec<SweepRow>> {
    if config.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if config.m > train.len() {
        return Err(CliError::Usage(format!(
            "--m {} exceeds the training set size {}; the NN baseline subsamples m training points",
            config.m,
            train.len()
        )));
    }
    let part = fit_kmeans(
        train,
        config.cells,
        config.seed.derive(0),
        DEFAULT_MAX_ITERS,
    )?;
    let loglik = config
        .sigmas
        .par_iter()
        .map(|&s| Ok(KdeModel::new(train.clone(), s)?.mean_log_density(validation)?))
        .collect::<Result<Vec<f64>>>()?;

    let jobs: Vec<(usize, usize)> = (0..config.sigmas.len())
        .flat_map(|i| (0..config.trials).map(move |t| (i, t)))
        .collect();
    jobs.par_iter()
        .map(|&(i, t)| evaluate(train, test, &part, config, config.sigmas[i], t, loglik[i]))
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        write_real(&mut out, r.sigma);
        write!(out, ",{}", r.trial).expect("writing to a String");
        for (j, v) in r.stats().iter().enumerate() {
            out.push(',');
            if j == 5 || j == 6 {
                write!(out, "{}", *v as usize).expect("writing to a String");
            } else {
                write_real(&mut out, *v);
            }
        }
        out.push('\n');
    }
    out
}

/// Mean and sample standard deviation of each statistic, per `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSummary {
    pub sigma: f64,
    pub trials: usize,
    pub mean: [f64; 9],
    pub sd: [f64; 9],
}

impl SigmaSummary {
    pub fn mean_of(&self, column: &str) -> Option<f64> {
        STAT_COLUMNS
            .iter()
            .position(|c| *c == column)
            .map(|i| self.mean[i])
    }

    pub fn sd_of(&self, column: &str) -> Option<f64> {
        STAT_COLUMNS
            .iter()
            .position(|c| *c == column)
            .map(|i| self.sd[i])
    }
}

/// Groups consecutive rows with the same `σ`, as produced by [`run_sweep`].
pub fn summarize(rows: &[SweepRow]) -> Vec<SigmaSummary> {
    rows.chunk_by(|a, b| a.sigma == b.sigma)
        .map(|group| {
            let mut mean = [0.0; 9];
            let mut sd = [0.0; 9];
            for j in 0..9 {
                let col: Vec<f64> = group.iter().map(|r| r.stats()[j]).collect();
                (mean[j], sd[j]) = mean_and_sd(&col);
            }
            SigmaSummary {
                sigma: group[0].sigma,
                trials: group.len(),
                mean,
                sd,
            }
        })
        .collect()
}

pub fn summary_csv(summary: &[SigmaSummary]) -> String {
    let mut out = String::from("sigma,trials");
    for c in STAT_COLUMNS {
        write!(out, ",{c}_mean,{c}_sd").expect("writing to a String");
    }
    out.push('\n');
    for s in summary {
        write_real(&mut out, s.sigma);
        write!(out, ",{}", s.trials).expect("writing to a String");
        for j in 0..9 {
            out.push(',');
            write_real(&mut out, s.mean[j]);
            out.push(',');
            write_real(&mut out, s.sd[j]);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_specs() {
        let g = parse_sigmas("0.01:10:20").unwrap();
        assert_eq!((g.len(), g[0], g[19]), (20, 0.01, 10.0));
        assert_eq!(
            parse_sigmas("0.01, 0.13,10").unwrap(),
            vec![0.01, 0.13, 10.0]
        );
        assert_eq!(parse_sigmas("0.5").unwrap(), vec![0.5]);
        for bad in ["", "1:2", "a:b:c", "0:1:3", "1,-2", "1:2:3:4", "x"] {
            assert!(
                matches!(parse_sigmas(bad), Err(CliError::Usage(_))),
                "{bad}"
            );
        }
    }

    fn row(sigma: f64, trial: usize, c_t: f64) -> SweepRow {
        SweepRow {
            sigma,
            trial,
            c_t,
            global_z_u: 0.0,
            nn_train_acc: 0.5,
            nn_gen_acc: 0.5,
            frechet: 0.0,
            ndb_over: 1,
            ndb_under: 2,
            kmmd_gap: 0.0,
            kmmd_null_sd: 0.0,
            val_loglik: -1.0,
        }
    }

    #[test]
    fn csv_layout() {
        let text = sweep_csv(&[row(0.1, 0, -2.0), row(0.1, 1, 1.5)]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines[1], "0.1,0,-2,0,0.5,0.5,0,1,2,0,-1");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn summary_groups_by_sigma() {
        let s = summarize(&[row(0.1, 0, -2.0), row(0.1, 1, 0.0), row(1.0, 0, 3.0)]);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].mean_of("c_t"), Some(-1.0));
        assert!((s[0].sd_of("c_t").unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!((s[1].trials, s[1].mean_of("c_t")), (1, Some(3.0)));
        let text = summary_csv(&s);
        assert!(text.starts_with("sigma,trials,c_t_mean,c_t_sd,"));
        assert_eq!(text.lines().count(), 3);
    }
}
