//! Exact-equality checks of the closed forms against exhaustive enumeration
//! of all labeled trees.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use treelimit::arith::{format_rational, from_uint, rational};
use treelimit::degree_model::{enumerate_degree_sequences, DegreeDistribution};
use treelimit::hom_count::{
    cond_embed_prob, edge_degree_dist, edge_prob, embeds, expected_x, forest_embed_prob_with_h,
    h_constant, merge_numbered, x_statistic,
};
use treelimit::limit_object::{consistency_report, enumerate_balls, p_limit};
use treelimit::neighborhood::{aut_quotient_size, empirical_stats, strip_last_level};
use treelimit::tree::{
    all_labeled_trees, count_trees, enumerate_trees, prufer_decode, prufer_encode, sample_tree,
};
use treelimit::{
    DegreeModel, Error, LabeledTree, LimitMeasure, NumberedForest, PruferSequence, RootedBall,
};

use crate::error::{HarnessError, Result};

/// One line of a verification ledger.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub detail: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

/// Tallies cases and keeps the first few failure descriptions.
#[derive(Debug, Default)]
struct Tally {
    cases: usize,
    failures: Vec<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(describe());
        }
    }

    fn finish(self, name: &str) -> Check {
        let detail = if self.failures.is_empty() {
            format!("{} cases", self.cases)
        } else {
            let shown: Vec<&str> = self.failures.iter().take(3).map(String::as_str).collect();
            format!(
                "{} of {} cases failed; {}",
                self.failures.len(),
                self.cases,
                shown.join("; ")
            )
        };
        Check {
            name: name.to_string(),
            cases: self.cases,
            failures: self.failures.len(),
            detail,
        }
    }
}

/// Every labeled tree on `n` vertices.
pub struct TreeTable {
    pub n: usize,
    pub trees: Vec<LabeledTree>,
}

impl TreeTable {
    pub fn new(n: usize) -> Self {
        TreeTable {
            n,
            trees: all_labeled_trees(n).collect(),
        }
    }

    /// `P(T(D_n) = T)` for every tree in the table.
    pub fn weights(&self, model: &DegreeModel) -> treelimit::Result<Vec<BigRational>> {
        let mut cache: HashMap<Vec<u32>, BigRational> = HashMap::new();
        self.trees
            .iter()
            .map(|t| {
                let d = t.degrees();
                if let Some(p) = cache.get(&d) {
                    return Ok(p.clone());
                }
                let seq = t.degree_sequence();
                let p = model.prefix_probability(self.n, &d)? / from_uint(count_trees(&seq));
                cache.insert(d, p.clone());
                Ok(p)
            })
            .collect()
    }

    pub fn prob(
        &self,
        weights: &[BigRational],
        event: impl Fn(&LabeledTree) -> bool,
    ) -> BigRational {
        self.trees
            .iter()
            .zip(weights)
            .filter(|(t, _)| event(t))
            .map(|(_, w)| w)
            .sum()
    }
}

/// The models exercised at size `n`.
pub fn standard_models(n: usize) -> Vec<(String, DegreeModel)> {
    let mut path = vec![2; n - 2];
    path.extend([1, 1]);
    let mut out = vec![(
        format!("fixed{path:?}"),
        DegreeModel::fixed(path).expect("path"),
    )];
    if n >= 4 {
        let mut branched = vec![3];
        branched.extend(std::iter::repeat_n(2, n - 4));
        branched.extend([1, 1, 1]);
        out.push((
            format!("fixed{branched:?}"),
            DegreeModel::fixed(branched).expect("branched"),
        ));
    }
    if n >= 6 {
        let mut double = vec![3, 3];
        double.extend(std::iter::repeat_n(2, n - 6));
        double.extend([1, 1, 1, 1]);
        out.push((
            format!("fixed{double:?}"),
            DegreeModel::fixed(double).expect("double"),
        ));
    }
    out.push(("star".into(), DegreeModel::Star));
    let u123 = DegreeDistribution::uniform(&[1, 2, 3]).expect("pmf");
    out.push((
        "conditioned_iid{1,2,3}".into(),
        DegreeModel::ConditionedIid(u123),
    ));
    let u13 = DegreeModel::ConditionedIid(DegreeDistribution::uniform(&[1, 3]).expect("pmf"));
    if u13.check_feasible(n).is_ok() {
        out.push(("conditioned_iid{1,3}".into(), u13));
    }
    out
}

/// Small numbered forests in which every component can attach to the rest.
pub fn standard_forests() -> Vec<(String, NumberedForest)> {
    let spec: [ForestRow; 9] = [
        ("vertex r=1", 1, &[], &[1]),
        ("vertex r=2", 1, &[], &[2]),
        ("edge r=(1,1)", 2, &[(0, 1)], &[1, 1]),
        ("edge r=(0,2)", 2, &[(0, 1)], &[0, 2]),
        ("path r=(0,1,1)", 3, &[(0, 1), (1, 2)], &[0, 1, 1]),
        ("cherry r=(1,0,0)", 3, &[(0, 1), (0, 2)], &[1, 0, 0]),
        ("two vertices r=(1,2)", 2, &[], &[1, 2]),
        ("edge+vertex r=(1,0,1)", 3, &[(0, 1)], &[1, 0, 1]),
        (
            "path r=(1,0,0,1)",
            4,
            &[(0, 1), (1, 2), (2, 3)],
            &[1, 0, 0, 1],
        ),
    ];
    spec.iter()
        .map(|&(name, m, edges, r)| {
            (
                name.to_string(),
                NumberedForest::new(m, edges, r.to_vec()).expect("valid forest"),
            )
        })
        .collect()
}

/// An injective map `i -> n - 1 - (i + shift) mod n`.
pub fn reversed_map(n: usize, m: usize, shift: usize) -> Vec<u32> {
    (0..m).map(|i| (n - 1 - (i + shift) % n) as u32).collect()
}

pub fn check_prufer_bijection(n: usize) -> Check {
    let mut tally = Tally::default();
    let total = (n as u64).pow((n - 2) as u32);
    for mut code in 0..total {
        let mut symbols = vec![0u32; n - 2];
        for s in symbols.iter_mut().rev() {
            *s = (code % n as u64) as u32;
            code /= n as u64;
        }
        let seq = PruferSequence::new(n, symbols).expect("in range");
        let tree = prufer_decode(&seq);
        let back = prufer_encode(&tree);
        let ok = back == seq && prufer_decode(&back) == tree;
        tally.record(ok, || format!("{:?}", seq.symbols()));
    }
    tally.finish(&format!("prufer bijection n={n}"))
}

pub fn check_tree_counts(max_n: usize) -> Result<Check> {
    let mut tally = Tally::default();
    for n in 2..=max_n {
        let mut total = 0u64;
        for d in enumerate_degree_sequences(n)? {
            let listed = enumerate_trees(&d)?.count() as u64;
            total += listed;
            tally.record(count_trees(&d) == listed.into(), || format!("{d}"));
        }
        tally.record(total == (n as u64).pow(n as u32 - 2), || {
            format!("total at n={n}")
        });
    }
    Ok(tally.finish(&format!("tree counts n<={max_n}")))
}

pub fn check_forest_probs(
    table: &TreeTable,
    models: &[(String, DegreeModel)],
    forests: &[(String, NumberedForest)],
    h_scale: &BigRational,
) -> Result<Check> {
    let n = table.n;
    let mut tally = Tally::default();
    for (model_name, model) in models {
        let weights = table.weights(model)?;
        for (forest_name, nf) in forests {
            if nf.node_count() > n {
                continue;
            }
            let phi = reversed_map(n, nf.node_count(), 0);
            let brute = table.prob(&weights, |t| embeds(nf, &phi, t));
            let formula = forest_embed_prob_with_h(model, nf, n, &(h_constant(nf) * h_scale));
            let ok = formula.as_ref().is_ok_and(|p| *p == brute);
            tally.record(ok, || {
                format!(
                    "{model_name} / {forest_name} at n={n}: {formula:?} vs {}",
                    format_rational(&brute)
                )
            });
        }
    }
    Ok(tally.finish(&format!("forest embedding probability n={n}")))
}

pub fn check_conditionals(
    table: &TreeTable,
    models: &[(String, DegreeModel)],
    forests: &[(String, NumberedForest)],
) -> Result<Check> {
    let n = table.n;
    let mut tally = Tally::default();
    for (model_name, model) in models {
        let weights = table.weights(model)?;
        for (name1, nf1) in forests {
            for (name2, nf2) in forests {
                for shift in [0, 1, 2] {
                    if nf1.node_count() > n || nf2.node_count() > n {
                        continue;
                    }
                    let phi = reversed_map(n, nf1.node_count(), 0);
                    let psi = reversed_map(n, nf2.node_count(), shift);
                    let joint =
                        table.prob(&weights, |t| embeds(nf1, &phi, t) && embeds(nf2, &psi, t));
                    let marginal = table.prob(&weights, |t| embeds(nf2, &psi, t));
                    let got = cond_embed_prob(model, nf1, &phi, nf2, &psi, n);
                    let ok = match &got {
                        Ok(p) => !marginal.is_zero() && *p == &joint / &marginal,
                        Err(Error::NullConditioning) => marginal.is_zero(),
                        // the two demands contradict each other on some host vertex
                        Err(Error::InconsistentRemainders(_)) | Err(Error::NotAForest) => {
                            joint.is_zero()
                        }
                        Err(Error::DegenerateConfiguration(_)) => {
                            merge_numbered(nf1, &phi, nf2, &psi)
                                .is_ok_and(|m| m.forest.component_remainder_sums().contains(&0))
                        }
                        Err(_) => false,
                    };
                    tally.record(ok, || {
                        format!("{model_name} / {name1} | {name2} shift {shift} at n={n}: {got:?}")
                    });
                }
            }
        }
    }
    Ok(tally.finish(&format!("conditional embedding probability n={n}")))
}

pub fn check_expected_counts(
    table: &TreeTable,
    models: &[(String, DegreeModel)],
    forests: &[(String, NumberedForest)],
) -> Result<Check> {
    let n = table.n;
    let mut tally = Tally::default();
    for (model_name, model) in models {
        let weights = table.weights(model)?;
        for (forest_name, nf) in forests.iter().filter(|(_, f)| f.component_count() == 1) {
            if nf.node_count() > n {
                continue;
            }
            let brute: BigRational = table
                .trees
                .iter()
                .zip(&weights)
                .map(|(t, w)| w * BigRational::from_integer(BigInt::from(x_statistic(nf, t))))
                .sum();
            let formula = expected_x(model, nf, n);
            let ok = formula.as_ref().is_ok_and(|e| *e == brute);
            tally.record(ok, || {
                format!("{model_name} / {forest_name} at n={n}: {formula:?}")
            });
        }
    }
    Ok(tally.finish(&format!("expected labeled count n={n}")))
}

pub fn check_edge_formulas(table: &TreeTable, models: &[(String, DegreeModel)]) -> Result<Check> {
    let n = table.n;
    let mut tally = Tally::default();
    let adjacent = |t: &LabeledTree| t.has_edge(0, 1);
    for (model_name, model) in models {
        let weights = table.weights(model)?;
        let p_edge = table.prob(&weights, adjacent);
        for di in 1..n as u32 {
            for dj in 1..n as u32 {
                let degrees = |t: &LabeledTree| t.degree(0) == di && t.degree(1) == dj;
                let p_deg = table.prob(&weights, degrees);
                let both = table.prob(&weights, |t| degrees(t) && adjacent(t));
                if !p_deg.is_zero() {
                    let formula = edge_prob(di, dj, n)?;
                    tally.record(formula == &both / &p_deg, || {
                        format!("{model_name}: edge given degrees ({di},{dj}) at n={n}")
                    });
                }
                let formula = edge_degree_dist(model, n, di, dj)?;
                tally.record(formula == &both / &p_edge, || {
                    format!("{model_name}: degrees ({di},{dj}) given edge at n={n}")
                });
            }
        }
    }
    Ok(tally.finish(&format!("edge formulas n={n}")))
}

/// Empirical ball frequencies against `X^{(T', r')} / (n |Aut/~|)` for
/// every exactly-`l`-deep class, `1 <= l <= max_depth`.
pub fn check_per_tree_identity(trees: &[LabeledTree], max_depth: usize) -> Result<Check> {
    let mut tally = Tally::default();
    for (k, tree) in trees.iter().enumerate() {
        let n = tree.n();
        for l in 1..=max_depth {
            for (code, count) in empirical_stats(tree, l).counts {
                let b = RootedBall::from_code(&code);
                if b.depth() < l {
                    continue;
                }
                let (stripped, r) = strip_last_level(&b)?;
                let nf = NumberedForest::from_rooted(&stripped, r)?;
                let x = x_statistic(&nf, tree);
                let q = from_uint(aut_quotient_size(&b)?);
                let predicted =
                    BigRational::from_integer(BigInt::from(x)) / (q * rational(n as i64, 1));
                tally.record(predicted == rational(count as i64, n as i64), || {
                    format!("tree {k}, class {code}")
                });
            }
        }
    }
    Ok(tally.finish("per-tree ball identity"))
}

/// Random trees for the identity check: uniform trees and trees with a
/// sampled degree sequence.
pub fn random_trees(count: usize, n: usize, seed: u64) -> Vec<LabeledTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u123 = DegreeModel::ConditionedIid(DegreeDistribution::uniform(&[1, 2, 3]).expect("pmf"));
    (0..count)
        .map(|k| {
            if k % 2 == 0 {
                use rand::Rng;
                let symbols = (0..n - 2).map(|_| rng.random_range(0..n as u32)).collect();
                prufer_decode(&PruferSequence::new(n, symbols).expect("in range"))
            } else {
                let d =
                    treelimit::degree_model::sample_degree_sequence(&u123, n, &mut rng, 1_000_000)
                        .expect("feasible");
                sample_tree(&d, &mut rng)
            }
        })
        .collect()
}

/// Largest ball of depth `l` with degrees at most `cap`.
pub fn ball_node_bound(l: usize, cap: u32) -> usize {
    let mut total = 1usize;
    let mut width = 1usize;
    for k in 0..l {
        width = width.saturating_mul(if k == 0 { cap } else { cap.saturating_sub(1) } as usize);
        total = total.saturating_add(width);
    }
    total
}

/// The gamma battery of limit laws.
pub fn standard_measures(degree_cap: u32) -> Vec<(String, LimitMeasure)> {
    let laws: [LawRow; 6] = [
        ("{2 a.s.}", &[(2, 1, 1)]),
        ("uniform{1,3}", &[(1, 1, 2), (3, 1, 2)]),
        ("uniform{1,2,3}", &[(1, 1, 3), (2, 1, 3), (3, 1, 3)]),
        ("{1 a.s.}", &[(1, 1, 1)]),
        ("{3 a.s.}", &[(3, 1, 1)]),
        ("{1:1/2,2:1/4,4:1/4}", &[(1, 1, 2), (2, 1, 4), (4, 1, 4)]),
    ];
    laws.iter()
        .map(|&(name, pmf)| {
            let d0 = DegreeDistribution::new(pmf.iter().map(|&(d, a, b)| (d, rational(a, b))))
                .expect("pmf");
            (
                name.to_string(),
                LimitMeasure::new(d0, degree_cap).expect("within cap"),
            )
        })
        .collect()
}

/// Ratio `sum p(extensions) / p(base)` equals gamma for every positive-mass
/// base ball of depth `1..=max_base_depth`.
pub fn check_consistency(
    measures: &[(String, LimitMeasure)],
    max_base_depth: usize,
    degree_cap: u32,
) -> Result<Check> {
    let mut tally = Tally::default();
    for (name, m) in measures {
        for depth in 1..=max_base_depth {
            for base in enumerate_balls(depth, degree_cap, ball_node_bound(depth, degree_cap))? {
                if p_limit(m, &base).is_zero() {
                    continue;
                }
                let report = consistency_report(m, &base, degree_cap)?;
                tally.record(report.ratio == *m.gamma(), || {
                    format!(
                        "{name}, base {}: ratio {} vs gamma {}",
                        treelimit::neighborhood::canonical_code(&base),
                        format_rational(&report.ratio),
                        format_rational(m.gamma())
                    )
                });
            }
        }
    }
    Ok(tally.finish("consistency ratio equals gamma"))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BatteryOptions {
    /// Doubles the forest constant; the forest checks must then fail.
    pub corrupt_h: bool,
}

type ForestRow = (&'static str, usize, &'static [(u32, u32)], &'static [u32]);
type LawRow = (&'static str, &'static [(u32, i64, i64)]);

pub const MAX_BATTERY_N: usize = 8;
/// Embedding checks enumerate every labeled tree, so they stop here.
pub const MAX_EMBEDDING_N: usize = 7;

pub fn run_oracle_battery(max_n: usize, options: BatteryOptions) -> Result<Vec<Check>> {
    if !(4..=MAX_BATTERY_N).contains(&max_n) {
        return Err(HarnessError::Config(format!(
            "max_n must lie in 4..={MAX_BATTERY_N}, got {max_n}"
        )));
    }
    let h_scale = if options.corrupt_h {
        rational(2, 1)
    } else {
        BigRational::one()
    };
    let mut checks = vec![check_prufer_bijection(max_n), check_tree_counts(max_n)?];
    let forests = standard_forests();
    for n in 4..=max_n.min(MAX_EMBEDDING_N) {
        let table = TreeTable::new(n);
        let models = standard_models(n);
        checks.push(check_forest_probs(&table, &models, &forests, &h_scale)?);
        checks.push(check_conditionals(&table, &models, &forests)?);
        checks.push(check_expected_counts(&table, &models, &forests)?);
        checks.push(check_edge_formulas(&table, &models)?);
    }
    checks.push(check_per_tree_identity(&random_trees(20, 30, 17), 3)?);
    checks.push(check_consistency(&standard_measures(5), 2, 5)?);
    Ok(checks)
}
