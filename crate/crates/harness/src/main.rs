use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

macro_rules! outln {
    ($out:expr, $($arg:tt)*) => {{
        $out.push_str(&format!($($arg)*));
        $out.push('\n');
    }};
}

use treelimit::arith::format_rational;
use treelimit::degree_model::{
    sample_degree_sequence, validate_degree_sequence, DEFAULT_MAX_RETRIES,
};
use treelimit::limit_object::{consistency_report, limit_distribution, p_limit, parse_pmf};
use treelimit::neighborhood::empirical_stats;
use treelimit::tree::sample_tree;
use treelimit::{DegreeModel, LabeledTree, LimitMeasure};
use treelimit_harness::config::ExperimentConfig;
use treelimit_harness::experiment::{emit_reports, run_convergence};
use treelimit_harness::oracle::{ball_node_bound, run_oracle_battery, BatteryOptions};
use treelimit_harness::star_demo::{run_star_demo, star_json, DEFAULT_CLASS_NODE_LIMIT};
use treelimit_harness::{HarnessError, Result};

#[derive(Parser)]
#[command(
    name = "treelimit",
    version,
    about = "Random labeled trees with given degrees and their local limits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample trees and print them as edge lists separated by blank lines.
    Sample {
        /// Comma-separated degree sequence.
        #[arg(long, conflicts_with_all = ["pmf", "star"])]
        degrees: Option<String>,
        /// Degree law `d:p,...` for conditioned i.i.d. degrees.
        #[arg(long, requires = "n")]
        pmf: Option<String>,
        /// Star on `n` vertices.
        #[arg(long, requires = "n")]
        star: bool,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Ball-class frequencies of a tree given as an edge list file.
    Stats {
        tree: PathBuf,
        #[arg(long, default_value_t = 1)]
        radius: usize,
    },
    /// Limit probabilities of every ball class of a given depth.
    Limit {
        /// Degree law `d:p,...`.
        #[arg(long)]
        pmf: String,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 8)]
        degree_cap: u32,
        /// Report the extension ratio of each positive-mass class instead.
        #[arg(long)]
        consistency: bool,
    },
    /// Exhaustive verification of the closed forms.
    Verify {
        #[arg(long, default_value_t = 7)]
        max_n: usize,
        /// Double the forest constant to check that the battery notices.
        #[arg(long)]
        corrupt_h: bool,
    },
    /// Convergence experiment from a JSON configuration.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Escaping mass of stars.
    StarDemo {
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 10, 100, 1000])]
        n: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_CLASS_NODE_LIMIT)]
        k: usize,
    },
}

fn parse_list(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("not an integer: {t:?}")))
        })
        .collect()
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })
}

fn run(cli: Cli, out: &mut String) -> Result<ExitCode> {
    match cli.command {
        Command::Sample {
            degrees,
            pmf,
            star,
            n,
            count,
            seed,
        } => {
            let (model, n) = match (degrees, pmf, star) {
                (Some(d), _, _) => {
                    let d = validate_degree_sequence(parse_list(&d)?)?;
                    let n = d.n();
                    (DegreeModel::fixed(d.into_inner())?, n)
                }
                (None, Some(p), _) => (
                    DegreeModel::ConditionedIid(parse_pmf(&p)?),
                    n.expect("required"),
                ),
                (None, None, true) => (DegreeModel::Star, n.expect("required")),
                _ => {
                    return Err(HarnessError::Config(
                        "give --degrees, --pmf or --star".into(),
                    ))
                }
            };
            model.check_feasible(n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut trees = Vec::new();
            for _ in 0..count {
                let d = sample_degree_sequence(&model, n, &mut rng, DEFAULT_MAX_RETRIES)?;
                trees.push(sample_tree(&d, &mut rng).to_edge_list());
            }
            out.push_str(&trees.join("\n"));
        }
        Command::Stats { tree, radius } => {
            let tree = LabeledTree::parse_edge_list(&read(&tree)?)?;
            let stats = empirical_stats(&tree, radius);
            for (code, count) in &stats.counts {
                outln!(
                    out,
                    "{code}\t{count}\t{}",
                    format_rational(&stats.frequency(code))
                );
            }
        }
        Command::Limit {
            pmf,
            depth,
            degree_cap,
            consistency,
        } => {
            let m = LimitMeasure::new(parse_pmf(&pmf)?, degree_cap)?;
            let node_cap = ball_node_bound(depth, degree_cap);
            let dist = limit_distribution(&m, depth, node_cap)?;
            if consistency {
                let rows: Vec<_> = dist
                    .classes
                    .keys()
                    .map(|code| {
                        let b = treelimit::RootedBall::from_code(code);
                        let r = consistency_report(&m, &b, degree_cap)?;
                        Ok(json!({
                            "code": code.as_str(),
                            "lhs": format_rational(&r.lhs),
                            "rhs": format_rational(&r.rhs),
                            "ratio": format_rational(&r.ratio),
                        }))
                    })
                    .collect::<Result<_>>()?;
                let doc = json!({"gamma": format_rational(m.gamma()), "reports": rows});
                outln!(out, "{}", serde_json::to_string_pretty(&doc)?);
            } else {
                debug_assert!(dist.classes.keys().all(|c| {
                    p_limit(&m, &treelimit::RootedBall::from_code(c)) == dist.prob(c)
                }));
                outln!(out, "{}", serde_json::to_string_pretty(&dist.to_json())?);
            }
        }
        Command::Verify { max_n, corrupt_h } => {
            let checks = run_oracle_battery(max_n, BatteryOptions { corrupt_h })?;
            let mut ok = true;
            for c in &checks {
                ok &= c.passed();
                outln!(
                    out,
                    "{} {}: {}",
                    if c.passed() { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if !ok {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Experiment { config, out_dir } => {
            let config = ExperimentConfig::load(&config)?;
            let dir = out_dir
                .or_else(|| config.out_dir.clone())
                .ok_or_else(|| HarnessError::Config("no output directory given".into()))?;
            let report = run_convergence(&config)?;
            let paths = emit_reports(&report, &dir)?;
            for p in &paths {
                outln!(out, "{}", p.display());
            }
            if let Some(e) = &report.failure {
                eprintln!("run stopped early: {e}");
                return Ok(ExitCode::from(1));
            }
        }
        Command::StarDemo { n, k } => {
            let rows = run_star_demo(&n, k)?;
            outln!(out, "{}", serde_json::to_string_pretty(&star_json(&rows))?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut out = String::new();
    let result = run(cli, &mut out);
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout
        .write_all(out.as_bytes())
        .and_then(|_| stdout.flush())
    {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
