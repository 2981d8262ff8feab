//! JSON forms of reports, partitions and baseline results.
//!
//! Field order in each struct is the key order in the output.

use std::path::Path;

use serde::{Deserialize, Serialize};

use datacopy_core::baselines::{MMDResult, NNAccuracy, PRCurve};
use datacopy_core::copy_detector::{CellResult, CopyParams, RepresentationResult};
use datacopy_core::{CopyReport, Partition, Seed, UTestResult};

use crate::error::{CliError, Result};
use crate::io::write_text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalJson {
    pub u: f64,
    pub rank_sum: f64,
    pub delta_hat: f64,
    pub z_u: f64,
    pub m: usize,
    pub n: usize,
    pub tie_count: u64,
}

impl From<&UTestResult> for GlobalJson {
    fn from(r: &UTestResult) -> Self {
        GlobalJson {
            u: r.u,
            rank_sum: r.rank_sum,
            delta_hat: r.delta_hat,
            z_u: r.z_u,
            m: r.m,
            n: r.n,
            tie_count: r.tie_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellJson {
    pub cell: usize,
    pub train_count: usize,
    pub test_count: usize,
    pub gen_count: usize,
    pub p_frac: f64,
    pub q_frac: f64,
    pub z_u: Option<f64>,
    pub z_pi: f64,
    pub included_in_ct: bool,
    pub exclusion_reason: Option<String>,
}

impl From<&CellResult> for CellJson {
    fn from(c: &CellResult) -> Self {
        CellJson {
            cell: c.cell,
            train_count: c.train_count,
            test_count: c.test_count,
            gen_count: c.gen_count,
            p_frac: c.p_frac,
            q_frac: c.q_frac,
            z_u: c.z_u,
            z_pi: c.z_pi,
            included_in_ct: c.included_in_ct,
            exclusion_reason: c.exclusion_reason.map(|e| e.as_str().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub k: usize,
    pub tau: f64,
    pub min_cell: usize,
    pub significance: f64,
    pub metric: String,
    pub seed: u64,
}

impl From<&CopyParams> for ParamsJson {
    fn from(p: &CopyParams) -> Self {
        ParamsJson {
            k: p.k,
            tau: p.tau,
            min_cell: p.min_cell,
            significance: p.significance,
            metric: p.metric.as_str().to_string(),
            seed: p.seed.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub global: GlobalJson,
    pub cells: Vec<CellJson>,
    pub c_t: f64,
    pub ndb_over: usize,
    pub ndb_under: usize,
    pub params: ParamsJson,
}

impl From<&CopyReport> for ReportJson {
    fn from(r: &CopyReport) -> Self {
        ReportJson {
            global: (&r.global).into(),
            cells: r.cells.iter().map(CellJson::from).collect(),
            c_t: r.c_t,
            ndb_over: r.ndb_over,
            ndb_under: r.ndb_under,
            params: (&r.params).into(),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn report_to_json(report: &CopyReport) -> Result<String> {
    if report.cells.is_empty() {
        return Err(CliError::Usage(
            "refusing to emit a report with no cells".into(),
        ));
    }
    to_json(&ReportJson::from(report))
}

pub fn emit_report(report: &CopyReport, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &report_to_json(report)?)
}

pub fn parse_report(text: &str) -> Result<ReportJson> {
    let r: ReportJson = serde_json::from_str(text)?;
    if r.cells.is_empty() {
        return Err(CliError::Usage("report has no cells".into()));
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionJson {
    pub k: usize,
    pub seed: u64,
    pub centroids: Vec<Vec<f64>>,
}

impl From<&Partition> for PartitionJson {
    fn from(p: &Partition) -> Self {
        PartitionJson {
            k: p.k(),
            seed: p.seed().0,
            centroids: (0..p.k()).map(|c| p.centroid(c).to_vec()).collect(),
        }
    }
}

impl PartitionJson {
    pub fn to_partition(&self) -> Result<Partition> {
        let dim = self.centroids.first().map_or(0, Vec::len);
        if self.centroids.len() != self.k || self.centroids.iter().any(|c| c.len() != dim) {
            return Err(CliError::Usage(
                "partition centroids do not match k and dimension".into(),
            ));
        }
        let flat = self.centroids.concat();
        Ok(Partition::from_centroids(flat, dim, Seed(self.seed))?)
    }
}

pub fn partition_to_json(part: &Partition) -> Result<String> {
    to_json(&PartitionJson::from(part))
}

pub fn parse_partition(text: &str) -> Result<Partition> {
    serde_json::from_str::<PartitionJson>(text)?.to_partition()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalReportJson {
    pub global: GlobalJson,
    pub metric: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnJson {
    pub train_acc: f64,
    pub gen_acc: f64,
    pub mean_acc: f64,
    pub m: usize,
}

impl From<&NNAccuracy> for NnJson {
    fn from(r: &NNAccuracy) -> Self {
        NnJson {
            train_acc: r.train_acc,
            gen_acc: r.gen_acc,
            mean_acc: r.mean_acc,
            m: r.m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrechetJson {
    pub frechet: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdbJson {
    pub ndb_over: usize,
    pub ndb_under: usize,
    pub z_crit: f64,
    pub z: Vec<f64>,
    pub degenerate: Vec<bool>,
}

impl From<&RepresentationResult> for NdbJson {
    fn from(r: &RepresentationResult) -> Self {
        NdbJson {
            ndb_over: r.ndb_over,
            ndb_under: r.ndb_under,
            z_crit: r.z_crit,
            z: r.z.clone(),
            degenerate: r.degenerate.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrPointJson {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrJson {
    pub resolution: usize,
    pub points: Vec<PrPointJson>,
}

impl From<&PRCurve> for PrJson {
    fn from(c: &PRCurve) -> Self {
        PrJson {
            resolution: c.resolution(),
            points: c
                .lambdas
                .iter()
                .zip(&c.points)
                .map(|(&lambda, &(alpha, beta))| PrPointJson {
                    lambda,
                    alpha,
                    beta,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmmdJson {
    pub mmd2_train_gen: f64,
    pub mmd2_train_test: f64,
    pub gap: f64,
    pub p_value: f64,
    pub null_sd: f64,
    pub bandwidth: f64,
}

impl From<&MMDResult> for KmmdJson {
    fn from(r: &MMDResult) -> Self {
        KmmdJson {
            mmd2_train_gen: r.mmd2_train_gen,
            mmd2_train_test: r.mmd2_train_test,
            gap: r.gap,
            p_value: r.p_value,
            null_sd: r.null_sd,
            bandwidth: r.bandwidth,
        }
    }
}
