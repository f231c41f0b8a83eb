//! Convergence runs: sample trees along a size grid and compare their ball
//! statistics with the limit.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde_json::{json, Value};

use treelimit::arith::to_f64;
use treelimit::degree_model::{sample_degree_sequence, DEFAULT_MAX_RETRIES};
use treelimit::hom_count::x_statistic;
use treelimit::limit_object::{limit_distribution, tv_distance};
use treelimit::neighborhood::empirical_stats;
use treelimit::tree::sample_tree;
use treelimit::{BallDistribution, CanonicalCode, LimitMeasure};

use crate::config::{ExperimentConfig, ModeSpec};
use crate::error::{HarnessError, Result};
use crate::oracle::ball_node_bound;
use crate::seeding::replicate_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub n: usize,
    pub replicate: usize,
    pub empirical: BallDistribution,
    pub tv: Option<f64>,
    /// `X / n` for each configured statistic.
    pub stats: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeSummary {
    pub n: usize,
    pub replicates: usize,
    pub mean_tv: Option<f64>,
    pub sd_tv: Option<f64>,
    /// Across-replicate standard deviation of each class frequency.
    pub class_sd: BTreeMap<CanonicalCode, f64>,
    pub stat_mean: Vec<f64>,
    pub stat_var: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub seed: u64,
    pub config_hash: String,
    pub radius: usize,
    pub stat_names: Vec<String>,
    pub limit: Option<BallDistribution>,
    pub replicates: Vec<ReplicateResult>,
    pub summaries: Vec<SizeSummary>,
    /// First error hit; the rows above hold everything that finished.
    pub failure: Option<String>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the `k - 1` denominator; zero for a single value.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn tv_distance_f64(p: &BallDistribution, q: &BallDistribution) -> f64 {
    let keys: BTreeSet<&CanonicalCode> = p.classes.keys().chain(q.classes.keys()).collect();
    keys.into_iter()
        .map(|k| (to_f64(&p.prob(k)) - to_f64(&q.prob(k))).abs())
        .sum::<f64>()
        / 2.0
}

fn summarize(n: usize, rows: &[&ReplicateResult], stat_count: usize) -> SizeSummary {
    let tvs: Vec<f64> = rows.iter().filter_map(|r| r.tv).collect();
    let (mean_tv, sd_tv) = if tvs.is_empty() {
        (None, None)
    } else {
        (Some(mean(&tvs)), Some(sample_variance(&tvs).sqrt()))
    };
    let classes: BTreeSet<&CanonicalCode> = rows
        .iter()
        .flat_map(|r| r.empirical.classes.keys())
        .collect();
    let class_sd = classes
        .into_iter()
        .map(|c| {
            let xs: Vec<f64> = rows.iter().map(|r| to_f64(&r.empirical.prob(c))).collect();
            (c.clone(), sample_variance(&xs).sqrt())
        })
        .collect();
    let per_stat: Vec<Vec<f64>> = (0..stat_count)
        .map(|s| rows.iter().map(|r| r.stats[s]).collect())
        .collect();
    SizeSummary {
        n,
        replicates: rows.len(),
        mean_tv,
        sd_tv,
        class_sd,
        stat_mean: per_stat
            .iter()
            .map(|xs| if xs.is_empty() { 0.0 } else { mean(xs) })
            .collect(),
        stat_var: per_stat.iter().map(|xs| sample_variance(xs)).collect(),
    }
}

/// Runs every `(n, replicate)` pair in parallel. Each pair draws from its
/// own seeded stream, so the report does not depend on scheduling.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let stats = config.statistics()?;
    let limit = match config.limit_law()? {
        Some(law) => {
            let m = LimitMeasure::new(law, config.degree_cap)?;
            if m.is_consistent() {
                let cap = ball_node_bound(config.radius, config.degree_cap);
                Some(limit_distribution(&m, config.radius, cap)?)
            } else {
                None
            }
        }
        None => None,
    };
    let models = config
        .n_grid
        .iter()
        .map(|&n| config.model.model_for(n))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..config.n_grid.len())
        .flat_map(|i| (0..config.samples_per_n).map(move |r| (i, r)))
        .collect();
    let outcomes: Vec<std::result::Result<ReplicateResult, String>> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let n = config.n_grid[i];
            let mut rng = replicate_rng(config.seed, n, r);
            let d = sample_degree_sequence(&models[i], n, &mut rng, DEFAULT_MAX_RETRIES)
                .map_err(|e| format!("n={n} replicate {r}: {e}"))?;
            let tree = sample_tree(&d, &mut rng);
            let empirical = BallDistribution::from_stats(&empirical_stats(&tree, config.radius));
            let tv = limit.as_ref().map(|l| match config.mode {
                ModeSpec::Exact => to_f64(&tv_distance(&empirical, l).expect("same depth")),
                ModeSpec::Float => tv_distance_f64(&empirical, l),
            });
            let values = stats
                .iter()
                .map(|(_, f)| x_statistic(f, &tree) as f64 / n as f64)
                .collect();
            Ok(ReplicateResult {
                n,
                replicate: r,
                empirical,
                tv,
                stats: values,
            })
        })
        .collect();

    let mut replicates = Vec::with_capacity(outcomes.len());
    let mut failure = None;
    for outcome in outcomes {
        match outcome {
            Ok(row) => replicates.push(row),
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    let summaries = config
        .n_grid
        .iter()
        .map(|&n| {
            let rows: Vec<&ReplicateResult> = replicates.iter().filter(|r| r.n == n).collect();
            summarize(n, &rows, stats.len())
        })
        .collect::<Vec<_>>();
    for s in &summaries {
        info!(
            "n={} mean_tv={:?} replicates={}",
            s.n, s.mean_tv, s.replicates
        );
    }
    Ok(ConvergenceReport {
        seed: config.seed,
        config_hash: config.hash(),
        radius: config.radius,
        stat_names: stats.into_iter().map(|(s, _)| s.name).collect(),
        limit,
        replicates,
        summaries,
        failure,
    })
}

pub const CONVERGENCE_HEADER: [&str; 7] = [
    "n",
    "replicate",
    "depth",
    "class_code",
    "empirical_p",
    "limit_p",
    "abs_err",
];
pub const SUMMARY_HEADER: [&str; 5] = ["n", "mean_tv", "sd_tv", "stat_name", "var_estimate"];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_convergence_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    w.write_record(CONVERGENCE_HEADER)
        .map_err(csv_error(path))?;
    for row in &report.replicates {
        let mut codes: BTreeSet<&CanonicalCode> = row.empirical.classes.keys().collect();
        if let Some(limit) = &report.limit {
            codes.extend(limit.classes.keys());
        }
        for code in codes {
            let p = to_f64(&row.empirical.prob(code));
            let q = report.limit.as_ref().map(|l| to_f64(&l.prob(code)));
            w.write_record([
                row.n.to_string(),
                row.replicate.to_string(),
                report.radius.to_string(),
                code.to_string(),
                p.to_string(),
                opt(q),
                opt(q.map(|q| (p - q).abs())),
            ])
            .map_err(csv_error(path))?;
        }
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_summary_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    w.write_record(SUMMARY_HEADER).map_err(csv_error(path))?;
    for s in &report.summaries {
        for (name, var) in report.stat_names.iter().zip(&s.stat_var) {
            w.write_record([
                s.n.to_string(),
                opt(s.mean_tv),
                opt(s.sd_tv),
                name.clone(),
                var.to_string(),
            ])
            .map_err(csv_error(path))?;
        }
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn report_json(report: &ConvergenceReport) -> Value {
    let summaries: Vec<Value> = report
        .summaries
        .iter()
        .map(|s| {
            let class_sd: BTreeMap<String, f64> = s
                .class_sd
                .iter()
                .map(|(c, v)| (c.to_string(), *v))
                .collect();
            let stats: Vec<Value> = report
                .stat_names
                .iter()
                .enumerate()
                .map(
                    |(i, name)| json!({"name": name, "mean": s.stat_mean[i], "var": s.stat_var[i]}),
                )
                .collect();
            json!({
                "n": s.n,
                "replicates": s.replicates,
                "mean_tv": s.mean_tv,
                "sd_tv": s.sd_tv,
                "class_sd": class_sd,
                "statistics": stats,
            })
        })
        .collect();
    let replicates: Vec<Value> = report
        .replicates
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "replicate": r.replicate,
                "tv": r.tv,
                "statistics": r.stats,
                "empirical": r.empirical.to_json(),
            })
        })
        .collect();
    json!({
        "seed": report.seed,
        "config_hash": report.config_hash,
        "radius": report.radius,
        "limit": report.limit.as_ref().map(BallDistribution::to_json),
        "summaries": summaries,
        "replicates": replicates,
        "failure": report.failure,
    })
}

/// Paths of the three report files inside `dir`.
pub fn report_paths(dir: &Path) -> [PathBuf; 3] {
    [
        dir.join("convergence.csv"),
        dir.join("summary.csv"),
        dir.join("report.json"),
    ]
}

pub fn emit_reports(report: &ConvergenceReport, dir: &Path) -> Result<[PathBuf; 3]> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let paths = report_paths(dir);
    write_convergence_csv(report, &paths[0])?;
    write_summary_csv(report, &paths[1])?;
    let text = serde_json::to_string_pretty(&report_json(report))?;
    fs::write(&paths[2], text + "\n").map_err(|source| HarnessError::Io {
        path: paths[2].clone(),
        source,
    })?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(grid: &str, reps: usize) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"model": {{"variant": "conditioned_iid", "pmf": {{"1": [1, 2], "3": [1, 2]}}}},
                "n_grid": {grid}, "samples_per_n": {reps}, "radius": 2, "seed": 42}}"#
        ))
        .unwrap()
    }

    #[test]
    fn rows_match_config_and_are_normalized() {
        let report = run_convergence(&config("[20, 40]", 5)).unwrap();
        assert_eq!(report.replicates.len(), 10);
        assert!(report.failure.is_none());
        for r in &report.replicates {
            assert!(r.empirical.total() == num_traits::One::one());
            let tv = r.tv.unwrap();
            assert!((0.0..=1.0).contains(&tv));
        }
        // no degree-2 vertices, so the edge statistic vanishes
        let edge = report
            .stat_names
            .iter()
            .position(|s| s == "edge_r1_1")
            .unwrap();
        assert!(report.replicates.iter().all(|r| r.stats[edge] == 0.0));
    }

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let dir = tempfile::tempdir().unwrap();
        let a = emit_reports(
            &run_convergence(&config("[10, 30]", 4)).unwrap(),
            &dir.path().join("a"),
        )
        .unwrap();
        let b = emit_reports(
            &run_convergence(&config("[10, 30]", 4)).unwrap(),
            &dir.path().join("b"),
        )
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
    }

    #[test]
    fn empty_report_writes_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let report = ConvergenceReport {
            seed: 0,
            config_hash: String::new(),
            radius: 1,
            stat_names: Vec::new(),
            limit: None,
            replicates: Vec::new(),
            summaries: Vec::new(),
            failure: None,
        };
        let paths = emit_reports(&report, dir.path()).unwrap();
        assert_eq!(
            fs::read_to_string(&paths[0]).unwrap(),
            CONVERGENCE_HEADER.join(",") + "\n"
        );
        assert_eq!(
            fs::read_to_string(&paths[1]).unwrap(),
            SUMMARY_HEADER.join(",") + "\n"
        );
    }

    #[test]
    fn variance_helper() {
        assert_eq!(sample_variance(&[1.0]), 0.0);
        assert_eq!(sample_variance(&[1.0, 3.0]), 2.0);
    }
}
