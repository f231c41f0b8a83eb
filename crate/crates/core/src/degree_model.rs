//! Degree distributions, tree degree sequences and exchangeable random
//! degree-sequence models.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::arith::{falling_factorial, from_uint, rational, to_f64};
use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_degree_sequences`].
pub const ENUMERATION_MAX_N: usize = 10;

/// Default attempt budget for conditioned rejection sampling.
pub const DEFAULT_MAX_RETRIES: u64 = 1_000_000;

/// Largest `n` for which exact rational arithmetic is selected automatically.
pub const EXACT_MODE_MAX_N: usize = 64;

const FLOAT_MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithmeticMode {
    Exact,
    Float,
}

impl ArithmeticMode {
    /// Exact for small `n` with rational inputs, float otherwise.
    pub fn select(n: usize, inputs_exact: bool) -> Self {
        if inputs_exact && n <= EXACT_MODE_MAX_N {
            ArithmeticMode::Exact
        } else {
            ArithmeticMode::Float
        }
    }
}

/// A finitely supported law on the positive integers.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    pmf: BTreeMap<u32, BigRational>,
    mode: ArithmeticMode,
}

impl DegreeDistribution {
    /// Builds an exact distribution. Zero entries are dropped; the masses must
    /// sum to exactly one.
    pub fn new(entries: impl IntoIterator<Item = (u32, BigRational)>) -> Result<Self> {
        let pmf = collect_pmf(entries)?;
        let total: BigRational = pmf.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(DegreeDistribution {
            pmf,
            mode: ArithmeticMode::Exact,
        })
    }

    /// Builds a float-mode distribution; masses must sum to one within 1e-12.
    pub fn from_f64(entries: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut converted = Vec::new();
        for (d, p) in entries {
            let r = BigRational::from_float(p).ok_or_else(|| {
                Error::InvalidDistribution(format!("mass {p} for degree {d} is not finite"))
            })?;
            converted.push((d, r));
        }
        let pmf = collect_pmf(converted)?;
        let total: f64 = pmf.values().map(to_f64).sum();
        if (total - 1.0).abs() > FLOAT_MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(DegreeDistribution {
            pmf,
            mode: ArithmeticMode::Float,
        })
    }

    pub fn point_mass(d: u32) -> Result<Self> {
        Self::new([(d, BigRational::one())])
    }

    /// Uniform law on the given distinct degrees.
    pub fn uniform(degrees: &[u32]) -> Result<Self> {
        let k = degrees.len() as i64;
        if k == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut seen = degrees.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != degrees.len() {
            return Err(Error::InvalidDistribution("repeated degree".into()));
        }
        Self::new(degrees.iter().map(|&d| (d, rational(1, k))))
    }

    pub fn mode(&self) -> ArithmeticMode {
        self.mode
    }

    pub fn support(&self) -> Vec<u32> {
        self.pmf.keys().copied().collect()
    }

    pub fn prob(&self, d: u32) -> BigRational {
        self.pmf.get(&d).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn prob_f64(&self, d: u32) -> f64 {
        self.pmf.get(&d).map(to_f64).unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.pmf.iter().map(|(&d, p)| (d, p))
    }

    pub fn min_degree(&self) -> u32 {
        *self.pmf.keys().next().expect("non-empty support")
    }

    pub fn max_degree(&self) -> u32 {
        *self.pmf.keys().next_back().expect("non-empty support")
    }

    pub fn mean(&self) -> BigRational {
        self.pmf
            .iter()
            .map(|(&d, p)| p * BigRational::from_integer(BigInt::from(d)))
            .sum()
    }
}

fn collect_pmf(
    entries: impl IntoIterator<Item = (u32, BigRational)>,
) -> Result<BTreeMap<u32, BigRational>> {
    let mut pmf = BTreeMap::new();
    for (d, p) in entries {
        if p.is_negative() {
            return Err(Error::InvalidDistribution(format!(
                "negative mass for degree {d}"
            )));
        }
        if p.is_zero() {
            continue;
        }
        if d == 0 {
            return Err(Error::InvalidDistribution(
                "degree 0 has positive mass".into(),
            ));
        }
        if pmf.insert(d, p).is_some() {
            return Err(Error::InvalidDistribution(format!(
                "degree {d} listed twice"
            )));
        }
    }
    if pmf.is_empty() {
        return Err(Error::InvalidDistribution("empty support".into()));
    }
    Ok(pmf)
}

/// `E(D_0) - 1`. The limit measure is consistent exactly when this is one.
pub fn gamma(d0: &DegreeDistribution) -> BigRational {
    d0.mean() - BigRational::one()
}

/// Degree sequence of a labeled tree on `n >= 2` nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeSequence {
    degrees: Vec<u32>,
}

impl DegreeSequence {
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.degrees
    }
}

impl fmt::Display for DegreeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.degrees.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

pub fn required_degree_sum(n: usize) -> u64 {
    2 * (n as u64 - 1)
}

pub fn validate_degree_sequence(degrees: Vec<u32>) -> Result<DegreeSequence> {
    let n = degrees.len();
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    if let Some((index, &value)) = degrees.iter().enumerate().find(|(_, &d)| d < 1) {
        return Err(Error::EntryBelowOne { index, value });
    }
    let actual: u64 = degrees.iter().map(|&d| u64::from(d)).sum();
    let required = required_degree_sum(n);
    if actual != required {
        return Err(Error::SumMismatch {
            n,
            actual,
            required,
        });
    }
    Ok(DegreeSequence { degrees })
}

/// All degree sequences of trees on `n` nodes, in lexicographic order.
pub fn enumerate_degree_sequences(n: usize) -> Result<Vec<DegreeSequence>> {
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    if n > ENUMERATION_MAX_N {
        return Err(Error::NTooLarge {
            n,
            max: ENUMERATION_MAX_N,
        });
    }
    // compositions of n - 2 "excess" units into n parts, each part + 1
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    fn rec(n: usize, remaining: u32, current: &mut Vec<u32>, out: &mut Vec<DegreeSequence>) {
        if current.len() + 1 == n {
            current.push(remaining + 1);
            out.push(DegreeSequence {
                degrees: current.clone(),
            });
            current.pop();
            return;
        }
        for extra in 0..=remaining {
            current.push(extra + 1);
            rec(n, remaining - extra, current, out);
            current.pop();
        }
    }
    rec(n, n as u32 - 2, &mut current, &mut out);
    Ok(out)
}

/// Exchangeable random degree-sequence models.
#[derive(Debug, Clone, PartialEq)]
pub enum DegreeModel {
    /// A fixed multiset, placed in uniformly random order.
    Fixed(DegreeSequence),
    /// `n` i.i.d. draws from `D_0` conditioned on summing to `2(n-1)`.
    ConditionedIid(DegreeDistribution),
    /// Degree `n - 1` at a uniform index, `1` elsewhere.
    Star,
    /// Weighted mixture of models; weights are positive and sum to one.
    Mixture(Vec<(BigRational, DegreeModel)>),
}

impl DegreeModel {
    /// A `Fixed` model; the multiset is validated and stored sorted.
    pub fn fixed(mut degrees: Vec<u32>) -> Result<Self> {
        degrees.sort_unstable();
        Ok(DegreeModel::Fixed(validate_degree_sequence(degrees)?))
    }

    pub fn mixture(components: Vec<(BigRational, DegreeModel)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDistribution("empty mixture".into()));
        }
        if components.iter().any(|(w, _)| !w.is_positive()) {
            return Err(Error::InvalidDistribution(
                "mixture weights must be positive".into(),
            ));
        }
        let total: BigRational = components.iter().map(|(w, _)| w).sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "mixture weights sum to {total}"
            )));
        }
        Ok(DegreeModel::Mixture(components))
    }

    /// Errors unless some valid degree sequence on `n` nodes has positive
    /// probability under every mixture component.
    pub fn check_feasible(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::TooFewNodes(n));
        }
        match self {
            DegreeModel::Fixed(seq) => {
                if seq.n() != n {
                    return Err(Error::ModelSizeMismatch {
                        expected: seq.n(),
                        requested: n,
                    });
                }
                Ok(())
            }
            DegreeModel::Star => Ok(()),
            DegreeModel::ConditionedIid(d0) => {
                if conditioned_sum_reachable(d0, n) {
                    Ok(())
                } else {
                    Err(Error::InfeasibleModel { n })
                }
            }
            DegreeModel::Mixture(parts) => parts.iter().try_for_each(|(_, m)| m.check_feasible(n)),
        }
    }

    /// `P(D_n(1..k) = prefix)`, exact.
    pub fn prefix_probability(&self, n: usize, prefix: &[u32]) -> Result<BigRational> {
        if prefix.len() > n {
            return Err(Error::PrefixTooLong { k: prefix.len(), n });
        }
        match self {
            DegreeModel::Fixed(seq) => {
                if seq.n() != n {
                    return Err(Error::ModelSizeMismatch {
                        expected: seq.n(),
                        requested: n,
                    });
                }
                Ok(fixed_prefix_probability(seq, prefix))
            }
            DegreeModel::Star => Ok(star_prefix_probability(n, prefix)),
            DegreeModel::ConditionedIid(d0) => conditioned_iid_marginal(d0, n, prefix),
            DegreeModel::Mixture(parts) => {
                let mut total = BigRational::zero();
                for (w, m) in parts {
                    total += w * m.prefix_probability(n, prefix)?;
                }
                Ok(total)
            }
        }
    }

    /// Float counterpart of [`prefix_probability`](Self::prefix_probability),
    /// usable at large `n`.
    pub fn prefix_probability_f64(&self, n: usize, prefix: &[u32]) -> Result<f64> {
        match self {
            DegreeModel::ConditionedIid(d0) => conditioned_iid_marginal_f64(d0, n, prefix),
            DegreeModel::Mixture(parts) => {
                let mut total = 0.0;
                for (w, m) in parts {
                    total += to_f64(w) * m.prefix_probability_f64(n, prefix)?;
                }
                Ok(total)
            }
            _ => self.prefix_probability(n, prefix).map(|p| to_f64(&p)),
        }
    }
}

fn degree_counts(degrees: &[u32]) -> BTreeMap<u32, u64> {
    let mut counts = BTreeMap::new();
    for &d in degrees {
        *counts.entry(d).or_insert(0) += 1;
    }
    counts
}

fn fixed_prefix_probability(seq: &DegreeSequence, prefix: &[u32]) -> BigRational {
    let multiset = degree_counts(seq.degrees());
    let mut num = BigUint::one();
    for (d, p) in degree_counts(prefix) {
        let m = multiset.get(&d).copied().unwrap_or(0);
        if p > m {
            return BigRational::zero();
        }
        num *= falling_factorial(m, p);
    }
    let den = falling_factorial(seq.n() as u64, prefix.len() as u64);
    from_uint(num) / from_uint(den)
}

fn star_prefix_probability(n: usize, prefix: &[u32]) -> BigRational {
    let hub = (n - 1) as u32;
    let k = prefix.len();
    if n == 2 {
        return if prefix.iter().all(|&d| d == 1) {
            BigRational::one()
        } else {
            BigRational::zero()
        };
    }
    if prefix.iter().any(|&d| d != 1 && d != hub) {
        return BigRational::zero();
    }
    match prefix.iter().filter(|&&d| d == hub).count() {
        0 => rational((n - k) as i64, n as i64),
        1 => rational(1, n as i64),
        _ => BigRational::zero(),
    }
}

/// Whether `n` i.i.d. draws from `d0` can sum to `2(n-1)`.
fn conditioned_sum_reachable(d0: &DegreeDistribution, n: usize) -> bool {
    let target = required_degree_sum(n) as usize;
    let words = target / 64 + 1;
    let mut reach = vec![0u64; words];
    reach[0] = 1;
    let support: Vec<usize> = d0.support().into_iter().map(|d| d as usize).collect();
    for _ in 0..n {
        let mut next = vec![0u64; words];
        for &d in &support {
            shift_or(&reach, d, &mut next);
        }
        reach = next;
    }
    (reach[target / 64] >> (target % 64)) & 1 == 1
}

fn shift_or(src: &[u64], shift: usize, dst: &mut [u64]) {
    let (word_shift, bit_shift) = (shift / 64, shift % 64);
    for i in (word_shift..dst.len()).rev() {
        let j = i - word_shift;
        let mut v = src[j] << bit_shift;
        if bit_shift > 0 && j > 0 {
            v |= src[j - 1] >> (64 - bit_shift);
        }
        dst[i] |= v;
    }
    // bits past the target are irrelevant
}

/// Integer weights `w_d = pmf(d) * L` over the common denominator `L`.
fn integer_weights(d0: &DegreeDistribution) -> Vec<(usize, BigUint)> {
    let lcm = d0
        .iter()
        .fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
    d0.iter()
        .map(|(d, p)| {
            let w = (p.numer() * (&lcm / p.denom()))
                .to_biguint()
                .expect("positive mass");
            (d as usize, w)
        })
        .collect()
}

/// `P(D_n(1..k) = prefix)` when `D_n` is `n` i.i.d. copies of `d0`
/// conditioned on summing to `2(n-1)`. Infeasible prefixes have probability
/// zero.
pub fn conditioned_iid_marginal(
    d0: &DegreeDistribution,
    n: usize,
    prefix: &[u32],
) -> Result<BigRational> {
    let k = prefix.len();
    if k > n {
        return Err(Error::PrefixTooLong { k, n });
    }
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    let target = required_degree_sum(n) as usize;
    let weights = integer_weights(d0);
    let min_d = d0.min_degree() as usize;

    // coefficient arrays of (sum_d w_d x^d)^j, truncated at the target
    let mut power = vec![BigUint::zero(); target + 1];
    power[0] = BigUint::one();
    let mut rest_power = None;
    for j in 1..=n {
        if j - 1 == n - k {
            rest_power = Some(power.clone());
        }
        let mut next = vec![BigUint::zero(); target + 1];
        let lowest = (j - 1) * min_d;
        for s in lowest..=target {
            if power[s].is_zero() {
                continue;
            }
            for (d, w) in &weights {
                if s + d <= target {
                    next[s + d] += &power[s] * w;
                }
            }
        }
        power = next;
    }
    let rest_power = rest_power.unwrap_or_else(|| power.clone());
    let total = &power[target];
    if total.is_zero() {
        return Err(Error::UnconditionedSumZero {
            target: target as u64,
        });
    }

    let mut num = BigUint::one();
    let mut prefix_sum = 0usize;
    for &d in prefix {
        match weights.iter().find(|(x, _)| *x == d as usize) {
            Some((_, w)) => num *= w,
            None => return Ok(BigRational::zero()),
        }
        prefix_sum += d as usize;
    }
    if prefix_sum > target {
        return Ok(BigRational::zero());
    }
    num *= &rest_power[target - prefix_sum];
    Ok(from_uint(num) / from_uint(total.clone()))
}

/// Log-space version of [`conditioned_iid_marginal`] for large `n`.
pub fn conditioned_iid_marginal_f64(
    d0: &DegreeDistribution,
    n: usize,
    prefix: &[u32],
) -> Result<f64> {
    let k = prefix.len();
    if k > n {
        return Err(Error::PrefixTooLong { k, n });
    }
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    let target = required_degree_sum(n) as usize;
    let log_w: Vec<(usize, f64)> = d0
        .iter()
        .map(|(d, p)| (d as usize, to_f64(p).ln()))
        .collect();

    let mut power = vec![f64::NEG_INFINITY; target + 1];
    power[0] = 0.0;
    let mut rest_power = None;
    for j in 1..=n {
        if j - 1 == n - k {
            rest_power = Some(power.clone());
        }
        let mut next = vec![f64::NEG_INFINITY; target + 1];
        for s in 0..=target {
            if power[s] == f64::NEG_INFINITY {
                continue;
            }
            for &(d, lw) in &log_w {
                if s + d <= target {
                    next[s + d] = log_add(next[s + d], power[s] + lw);
                }
            }
        }
        power = next;
    }
    let rest_power = rest_power.unwrap_or_else(|| power.clone());
    let log_total = power[target];
    if log_total == f64::NEG_INFINITY {
        return Err(Error::UnconditionedSumZero {
            target: target as u64,
        });
    }
    let mut log_num = 0.0;
    let mut prefix_sum = 0usize;
    for &d in prefix {
        match log_w.iter().find(|(x, _)| *x == d as usize) {
            Some((_, lw)) => log_num += lw,
            None => return Ok(0.0),
        }
        prefix_sum += d as usize;
    }
    if prefix_sum > target {
        return Ok(0.0);
    }
    log_num += rest_power[target - prefix_sum];
    Ok((log_num - log_total).exp())
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Draws a degree sequence on `n` nodes from `model`.
pub fn sample_degree_sequence<R: Rng + ?Sized>(
    model: &DegreeModel,
    n: usize,
    rng: &mut R,
    max_retries: u64,
) -> Result<DegreeSequence> {
    model.check_feasible(n)?;
    match model {
        DegreeModel::Fixed(seq) => {
            let mut degrees = seq.degrees().to_vec();
            degrees.shuffle(rng);
            Ok(DegreeSequence { degrees })
        }
        DegreeModel::Star => {
            let mut degrees = vec![1u32; n];
            let center = rng.random_range(0..n);
            degrees[center] = (n - 1) as u32;
            Ok(DegreeSequence { degrees })
        }
        DegreeModel::ConditionedIid(d0) => sample_conditioned_iid(d0, n, rng, max_retries),
        DegreeModel::Mixture(parts) => {
            let weights: Vec<f64> = parts.iter().map(|(w, _)| to_f64(w)).collect();
            let pick = WeightedIndex::new(&weights)
                .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
            let (_, component) = &parts[pick.sample(rng)];
            sample_degree_sequence(component, n, rng, max_retries)
        }
    }
}

fn sample_conditioned_iid<R: Rng + ?Sized>(
    d0: &DegreeDistribution,
    n: usize,
    rng: &mut R,
    max_retries: u64,
) -> Result<DegreeSequence> {
    let mean = d0.mean().to_f64().unwrap_or(f64::NAN);
    let slack = 4.0 / (n as f64).sqrt();
    if (mean - 2.0).abs() > slack {
        log::warn!("E(D_0) = {mean} is far from 2 for n = {n}; conditioned sampling may be slow");
    }
    let support = d0.support();
    let weights: Vec<f64> = support.iter().map(|&d| d0.prob_f64(d)).collect();
    let index =
        WeightedIndex::new(&weights).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let target = required_degree_sum(n);
    let mut degrees = vec![0u32; n];
    for _ in 0..max_retries {
        let mut sum = 0u64;
        for slot in degrees.iter_mut() {
            *slot = support[index.sample(rng)];
            sum += u64::from(*slot);
        }
        if sum == target {
            return Ok(DegreeSequence { degrees });
        }
    }
    Err(Error::RetriesExhausted(max_retries))
}

/// `|P(D_phi = d, D_psi = d) - P(D_phi = d) P(D_psi = d)|` for disjoint
/// index sets `phi`, `psi` (0-based) under an exchangeable model.
pub fn independence_gap(
    model: &DegreeModel,
    n: usize,
    fragment: &[u32],
    phi: &[usize],
    psi: &[usize],
) -> Result<BigRational> {
    if phi.len() != fragment.len() || psi.len() != fragment.len() {
        return Err(Error::OverlappingSupports);
    }
    let mut seen = vec![false; n];
    for &i in phi.iter().chain(psi) {
        if i >= n || seen[i] {
            return Err(Error::OverlappingSupports);
        }
        seen[i] = true;
    }
    // exchangeability: only the number of positions matters
    let single = model.prefix_probability(n, fragment)?;
    let doubled: Vec<u32> = fragment.iter().chain(fragment).copied().collect();
    let joint = model.prefix_probability(n, &doubled)?;
    Ok((joint - &single * &single).abs())
}
