//! The limit measure on rooted trees determined by a degree law `D_0`,
//! represented through its finite-depth ball marginals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde_json::{json, Value};

use crate::arith::{factorial, format_rational, from_uint, parse_rational, to_f64};
use crate::degree_model::{gamma, DegreeDistribution, DegreeModel};
use crate::error::{Error, Result};
use crate::hom_count::{expected_x, NumberedForest};
use crate::neighborhood::{
    aut_quotient_size, aut_size, canonical_code, strip_last_level, CanonicalCode,
    NeighborhoodStats, RootedBall,
};

#[derive(Debug, Clone, PartialEq)]
pub struct LimitMeasure {
    d0: DegreeDistribution,
    gamma: BigRational,
    degree_cap: u32,
}

impl LimitMeasure {
    pub fn new(d0: DegreeDistribution, degree_cap: u32) -> Result<Self> {
        if d0.max_degree() > degree_cap {
            return Err(Error::InvalidDistribution(format!(
                "support reaches degree {} beyond the cap {degree_cap}",
                d0.max_degree()
            )));
        }
        let gamma = gamma(&d0);
        Ok(LimitMeasure {
            d0,
            gamma,
            degree_cap,
        })
    }

    pub fn d0(&self) -> &DegreeDistribution {
        &self.d0
    }

    /// `E(D_0) - 1`.
    pub fn gamma(&self) -> &BigRational {
        &self.gamma
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    /// The marginals extend to a measure on infinite rooted trees iff `gamma = 1`.
    pub fn is_consistent(&self) -> bool {
        self.gamma.is_one()
    }
}

/// `p(B) = t_l * prod_{i not in T_l} P(D_0 = d_i) (d_i - 1)! / |Aut(B)|`,
/// with `d_i` the degree of `i` inside `B`. The single vertex has mass 1.
pub fn p_limit(m: &LimitMeasure, b: &RootedBall) -> BigRational {
    let l = b.depth();
    if l == 0 {
        return BigRational::one();
    }
    let mut acc = BigRational::from_integer(BigInt::from(b.levels()[l].len()));
    for level in &b.levels()[..l] {
        for &i in level {
            let d = b.degree(i);
            let p = m.d0.prob(d);
            if p.is_zero() {
                return BigRational::zero();
            }
            acc *= p * from_uint(factorial(u64::from(d) - 1));
        }
    }
    acc / from_uint(aut_size(b))
}

/// Root with `d` children.
pub fn star_ball(d: u32) -> RootedBall {
    let mut parents = vec![None];
    parents.extend(std::iter::repeat_n(Some(0), d as usize));
    RootedBall::from_parents(&parents).expect("star")
}

/// Probabilities on the classes of exactly-`depth`-deep balls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallDistribution {
    pub depth: usize,
    pub classes: BTreeMap<CanonicalCode, BigRational>,
}

impl BallDistribution {
    pub fn total(&self) -> BigRational {
        self.classes.values().sum()
    }

    /// `1 - total`; positive when mass sits on classes that were not listed.
    pub fn deficit(&self) -> BigRational {
        BigRational::one() - self.total()
    }

    pub fn prob(&self, code: &CanonicalCode) -> BigRational {
        self.classes
            .get(code)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn from_stats(stats: &NeighborhoodStats) -> Self {
        BallDistribution {
            depth: stats.radius,
            classes: stats.frequencies(),
        }
    }

    pub fn to_json(&self) -> Value {
        let classes: Vec<Value> = self
            .classes
            .iter()
            .map(|(code, p)| {
                json!({
                    "code": code.as_str(),
                    "p_num": p.numer().to_string(),
                    "p_den": p.denom().to_string(),
                })
            })
            .collect();
        json!({
            "depth": self.depth,
            "classes": classes,
            "deficit": format_rational(&self.deficit()),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("ball distribution: {what}"));
        let depth = value["depth"].as_u64().ok_or_else(|| bad("depth"))? as usize;
        let mut classes = BTreeMap::new();
        for entry in value["classes"].as_array().ok_or_else(|| bad("classes"))? {
            let code: CanonicalCode = entry["code"].as_str().ok_or_else(|| bad("code"))?.parse()?;
            let num: BigInt = entry["p_num"]
                .as_str()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("p_num"))?;
            let den: BigInt = entry["p_den"]
                .as_str()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("p_den"))?;
            if den.is_zero() {
                return Err(bad("zero denominator"));
            }
            classes.insert(code, BigRational::new(num, den));
        }
        Ok(BallDistribution { depth, classes })
    }
}

/// The law of the root degree under the limit: equals the pmf of `D_0`.
pub fn depth1_marginal(m: &LimitMeasure) -> BallDistribution {
    let classes =
        m.d0.support()
            .into_iter()
            .map(|d| {
                let b = star_ball(d);
                (canonical_code(&b), p_limit(m, &b))
            })
            .filter(|(_, p)| !p.is_zero())
            .collect();
    BallDistribution { depth: 1, classes }
}

struct ClassEntry {
    bytes: Vec<u8>,
    nodes: usize,
    height: usize,
}

struct Generator<'a> {
    layer: &'a [ClassEntry],
    counts: &'a [u32],
    max_count: usize,
    node_cap: usize,
    budget: usize,
    generated: usize,
    out: Vec<ClassEntry>,
}

impl Generator<'_> {
    fn grow(&mut self, start: usize, chosen: &mut Vec<usize>, nodes: usize) -> Result<()> {
        if self.counts.contains(&(chosen.len() as u32)) {
            self.generated += 1;
            if self.generated > self.budget {
                return Err(Error::CapExceeded { cap: self.budget });
            }
            let mut bytes = vec![b'('];
            let mut height = 0;
            for &c in chosen.iter() {
                bytes.extend_from_slice(&self.layer[c].bytes);
                height = height.max(self.layer[c].height + 1);
            }
            bytes.push(b')');
            self.out.push(ClassEntry {
                bytes,
                nodes,
                height,
            });
        }
        if chosen.len() == self.max_count {
            return Ok(());
        }
        for i in start..self.layer.len() {
            let total = nodes + self.layer[i].nodes;
            if total > self.node_cap {
                continue;
            }
            chosen.push(i);
            self.grow(i, chosen, total)?;
            chosen.pop();
        }
        Ok(())
    }
}

/// Classes of exactly-`l`-deep rooted trees whose root has a child count in
/// `root_counts` and whose other non-deepest nodes have a child count in
/// `inner_counts`.
fn enumerate_codes(
    l: usize,
    root_counts: &[u32],
    inner_counts: &[u32],
    node_cap: usize,
) -> Result<Vec<CanonicalCode>> {
    let budget = node_cap.saturating_mul(1000);
    let mut generated = 0;
    let mut layer = vec![ClassEntry {
        bytes: b"()".to_vec(),
        nodes: 1,
        height: 0,
    }];
    for depth in (0..l).rev() {
        let counts = if depth == 0 {
            root_counts
        } else {
            inner_counts
        };
        let mut generator = Generator {
            layer: &layer,
            counts,
            max_count: counts.iter().copied().max().unwrap_or(0) as usize,
            node_cap,
            budget,
            generated,
            out: Vec::new(),
        };
        generator.grow(0, &mut Vec::new(), 1)?;
        generated = generator.generated;
        let mut next = generator.out;
        if depth == 0 {
            next.retain(|c| c.height == l);
        }
        // sorted layers make every child concatenation canonical
        next.sort_by(|a, b| a.bytes.cmp(&b.bytes));
        layer = next;
    }
    Ok(layer
        .into_iter()
        .map(|c| CanonicalCode::from_canonical_bytes(c.bytes))
        .collect())
}

/// One representative per class of exactly-`l`-deep rooted trees with all
/// degrees at most `degree_cap` and at most `node_cap` nodes.
pub fn enumerate_balls(l: usize, degree_cap: u32, node_cap: usize) -> Result<Vec<RootedBall>> {
    if l == 0 {
        return Ok(vec![RootedBall::singleton()]);
    }
    let root: Vec<u32> = (1..=degree_cap).collect();
    let inner: Vec<u32> = (0..degree_cap).collect();
    Ok(enumerate_codes(l, &root, &inner, node_cap)?
        .iter()
        .map(RootedBall::from_code)
        .collect())
}

/// Like [`enumerate_balls`] but every non-deepest node has its degree in
/// `degrees`.
pub fn enumerate_balls_with_degrees(
    l: usize,
    degrees: &[u32],
    node_cap: usize,
) -> Result<Vec<RootedBall>> {
    if l == 0 {
        return Ok(vec![RootedBall::singleton()]);
    }
    let root: Vec<u32> = degrees.iter().copied().filter(|&d| d >= 1).collect();
    let inner: Vec<u32> = degrees
        .iter()
        .filter(|&&d| d >= 1)
        .map(|&d| d - 1)
        .collect();
    Ok(enumerate_codes(l, &root, &inner, node_cap)?
        .iter()
        .map(RootedBall::from_code)
        .collect())
}

/// `p_limit` on every positive-mass class of depth `l`.
pub fn limit_distribution(m: &LimitMeasure, l: usize, node_cap: usize) -> Result<BallDistribution> {
    let mut classes = BTreeMap::new();
    for b in enumerate_balls_with_degrees(l, &m.d0.support(), node_cap)? {
        let p = p_limit(m, &b);
        if !p.is_zero() {
            classes.insert(canonical_code(&b), p);
        }
    }
    Ok(BallDistribution { depth: l, classes })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub ratio: BigRational,
}

fn multisets(values: &[u32], size: usize) -> Vec<Vec<u32>> {
    fn rec(values: &[u32], size: usize, start: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..values.len() {
            cur.push(values[i]);
            rec(values, size, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(values, size, 0, &mut Vec::new(), &mut out);
    out
}

/// Compares `p(B)` with the total mass of the one-level extensions of `B`
/// obtained by giving every deepest node of `B` a degree in the support.
pub fn consistency_report(
    m: &LimitMeasure,
    base: &RootedBall,
    degree_cap: u32,
) -> Result<ConsistencyReport> {
    let support = m.d0.support();
    if support.iter().any(|&d| d < 1 || d > degree_cap) {
        return Err(Error::InvalidDistribution(format!(
            "support must lie in [1, {degree_cap}]"
        )));
    }
    let depth = base.depth();
    if depth < 1 {
        return Err(Error::DepthTooSmall {
            required: 1,
            actual: depth,
        });
    }
    let lhs = p_limit(m, base);
    if lhs.is_zero() {
        return Err(Error::ZeroMassBase);
    }

    // deepest nodes come grouped by parent in BFS order
    let mut groups: Vec<usize> = Vec::new();
    let mut last_parent = None;
    for &v in &base.levels()[depth] {
        if base.parent(v) != last_parent {
            groups.push(0);
            last_parent = base.parent(v);
        }
        *groups.last_mut().expect("group") += 1;
    }
    let options: Vec<Vec<Vec<u32>>> = groups.iter().map(|&k| multisets(&support, k)).collect();

    let mut seen: BTreeMap<CanonicalCode, BigRational> = BTreeMap::new();
    let mut pick = vec![0usize; options.len()];
    loop {
        let counts: Vec<u32> = pick
            .iter()
            .zip(&options)
            .flat_map(|(&i, opts)| opts[i].iter().map(|&d| d - 1))
            .collect();
        if counts.iter().any(|&c| c > 0) {
            let ext = base.extend_deepest(&counts);
            seen.entry(canonical_code(&ext))
                .or_insert_with(|| p_limit(m, &ext));
        }
        let mut g = 0;
        loop {
            if g == pick.len() {
                let rhs: BigRational = seen.into_values().sum();
                let ratio = &rhs / &lhs;
                return Ok(ConsistencyReport { lhs, rhs, ratio });
            }
            pick[g] += 1;
            if pick[g] < options[g].len() {
                break;
            }
            pick[g] = 0;
            g += 1;
        }
    }
}

/// `mu_n(B) = E(X_n^{(T', r')}) / (n |Aut(B)/~|)` where `(T', r')` is `B`
/// with its deepest level stripped.
pub fn mu_n(model: &DegreeModel, b: &RootedBall, n: usize) -> Result<BigRational> {
    let (stripped, remainders) = strip_last_level(b)?;
    let nf = NumberedForest::from_rooted(&stripped, remainders)?;
    let ex = expected_x(model, &nf, n)?;
    let quotient = from_uint(aut_quotient_size(b)?);
    Ok(ex / (BigRational::from_integer(BigInt::from(n)) * quotient))
}

/// Draws balls from the limit measure level by level. At each new level
/// one uniformly chosen frontier node takes the size-biased law
/// `P(D_0 = d)(d - 1)` and every other frontier node an independent copy
/// of `D_0`.
#[derive(Debug, Clone)]
pub struct LimitSampler {
    degrees: Vec<u32>,
    plain: WeightedIndex<f64>,
    biased: WeightedIndex<f64>,
}

impl LimitSampler {
    pub fn new(m: &LimitMeasure) -> Result<Self> {
        if !m.is_consistent() {
            return Err(Error::NotConsistent {
                gamma: format_rational(&m.gamma),
            });
        }
        let degrees = m.d0.support();
        let plain = degrees.iter().map(|&d| m.d0.prob_f64(d));
        let biased = degrees
            .iter()
            .map(|&d| to_f64(&m.d0.prob(d)) * f64::from(d - 1));
        let invalid = |e: rand::distr::weighted::Error| Error::InvalidDistribution(e.to_string());
        Ok(LimitSampler {
            plain: WeightedIndex::new(plain).map_err(invalid)?,
            biased: WeightedIndex::new(biased).map_err(invalid)?,
            degrees,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, l: usize, rng: &mut R) -> RootedBall {
        let mut parents: Vec<Option<u32>> = vec![None];
        if l == 0 {
            return RootedBall::singleton();
        }
        let root_degree = self.degrees[self.plain.sample(rng)];
        parents.extend(std::iter::repeat_n(Some(0), root_degree as usize));
        let mut frontier = 1..parents.len();
        for _ in 1..l {
            let spine = rng.random_range(frontier.clone());
            let next_start = parents.len();
            for v in frontier.clone() {
                let law = if v == spine {
                    &self.biased
                } else {
                    &self.plain
                };
                let d = self.degrees[law.sample(rng)];
                parents.extend(std::iter::repeat_n(Some(v as u32), d as usize - 1));
            }
            frontier = next_start..parents.len();
        }
        RootedBall::from_parents(&parents).expect("built top-down")
    }
}

pub fn sample_limit_ball<R: Rng + ?Sized>(
    m: &LimitMeasure,
    l: usize,
    rng: &mut R,
) -> Result<RootedBall> {
    Ok(LimitSampler::new(m)?.sample(l, rng))
}

/// `(1/2) sum |P - Q|` over the union of classes.
pub fn tv_distance(p: &BallDistribution, q: &BallDistribution) -> Result<BigRational> {
    if p.depth != q.depth {
        return Err(Error::DepthMismatch(p.depth, q.depth));
    }
    let mut total = BigRational::zero();
    for (code, a) in &p.classes {
        total += (a - q.prob(code)).abs();
    }
    for (code, b) in &q.classes {
        if !p.classes.contains_key(code) {
            total += b.abs();
        }
    }
    Ok(total / BigRational::from_integer(BigInt::from(2)))
}

/// Parses `"d:num/den,d:num/den"` into a degree law.
pub fn parse_pmf(text: &str) -> Result<DegreeDistribution> {
    let mut entries = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (d, p) = part
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected degree:probability, got {part:?}")))?;
        let d: u32 = d
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("{d:?}: {e}")))?;
        let p = parse_rational(p.trim())
            .ok_or_else(|| Error::Parse(format!("bad probability {p:?}")))?;
        entries.push((d, p));
    }
    DegreeDistribution::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn measure(pairs: &[(u32, i64, i64)]) -> LimitMeasure {
        let d0 =
            DegreeDistribution::new(pairs.iter().map(|&(d, a, b)| (d, rational(a, b)))).unwrap();
        LimitMeasure::new(d0, 5).unwrap()
    }

    fn ball(parents: &[Option<u32>]) -> RootedBall {
        RootedBall::from_parents(parents).unwrap()
    }

    fn path_ball(l: usize) -> RootedBall {
        // root in the middle of a path of 2l + 1 nodes
        let mut parents = vec![None, Some(0), Some(0)];
        for k in 1..l as u32 {
            parents.push(Some(2 * k - 1));
            parents.push(Some(2 * k));
        }
        ball(&parents)
    }

    #[test]
    fn p_limit_examples() {
        let two = measure(&[(2, 1, 1)]);
        for l in 1..5 {
            assert_eq!(p_limit(&two, &path_ball(l)), rational(1, 1));
        }
        let u13 = measure(&[(1, 1, 2), (3, 1, 2)]);
        assert_eq!(p_limit(&u13, &star_ball(3)), rational(1, 2));
        let hook = ball(&[None, Some(0), Some(1), Some(1)]);
        assert_eq!(p_limit(&u13, &hook), rational(1, 2));
        assert_eq!(p_limit(&u13, &star_ball(2)), rational(0, 1));
    }

    #[test]
    fn depth1_marginal_is_pmf() {
        let u13 = measure(&[(1, 1, 2), (3, 1, 2)]);
        let marginal = depth1_marginal(&u13);
        assert_eq!(marginal.classes.len(), 2);
        assert_eq!(
            marginal.prob(&canonical_code(&star_ball(1))),
            rational(1, 2)
        );
        assert_eq!(
            marginal.prob(&canonical_code(&star_ball(3))),
            rational(1, 2)
        );
        let skew = measure(&[(1, 1, 6), (2, 1, 3), (4, 1, 2)]);
        let marginal = depth1_marginal(&skew);
        assert_eq!(marginal.total(), rational(1, 1));
        assert_eq!(
            marginal.prob(&canonical_code(&star_ball(4))),
            rational(1, 2)
        );
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_balls(1, 3, 100).unwrap().len(), 3);
        assert_eq!(enumerate_balls(2, 2, 100).unwrap().len(), 3);
        assert_eq!(enumerate_balls(2, 1, 100).unwrap().len(), 0);
        assert!(matches!(
            enumerate_balls(4, 10, 30),
            Err(Error::CapExceeded { .. })
        ));
        for b in enumerate_balls(2, 4, 100).unwrap() {
            assert_eq!(b.depth(), 2);
            assert!((0..b.node_count() as u32).all(|i| b.degree(i) <= 4));
        }
    }

    #[test]
    fn consistency_examples() {
        let two = measure(&[(2, 1, 1)]);
        assert_eq!(
            consistency_report(&two, &path_ball(1), 5).unwrap().ratio,
            rational(1, 1)
        );
        let u13 = measure(&[(1, 1, 2), (3, 1, 2)]);
        for base in enumerate_balls(2, 3, 100).unwrap() {
            if let Ok(rep) = consistency_report(&u13, &base, 5) {
                assert_eq!(rep.ratio, rational(1, 1));
            }
        }
        let one = measure(&[(1, 1, 1)]);
        assert_eq!(
            consistency_report(&one, &star_ball(1), 5).unwrap().ratio,
            rational(0, 1)
        );
        assert_eq!(
            consistency_report(&u13, &star_ball(2), 5),
            Err(Error::ZeroMassBase)
        );
    }

    #[test]
    fn masses_sum_to_one_for_unit_gamma() {
        let m = measure(&[(1, 1, 2), (2, 1, 4), (4, 1, 4)]);
        assert!(m.is_consistent());
        for l in 1..=3 {
            assert_eq!(
                limit_distribution(&m, l, 200).unwrap().total(),
                rational(1, 1),
                "l={l}"
            );
        }
    }

    #[test]
    fn mu_n_examples() {
        let fixed = DegreeModel::fixed(vec![2, 2, 1, 1]).unwrap();
        assert_eq!(mu_n(&fixed, &star_ball(2), 4).unwrap(), rational(1, 2));
        let total: BigRational = (1..=3)
            .map(|d| mu_n(&fixed, &star_ball(d), 4).unwrap())
            .sum();
        assert_eq!(total, rational(1, 1));
    }

    /// Exact law of the sampler, by expanding every frontier assignment.
    fn sampler_law(m: &LimitMeasure, l: usize) -> BTreeMap<CanonicalCode, BigRational> {
        let support = m.d0().support();
        let mut current: Vec<(RootedBall, BigRational)> = support
            .iter()
            .map(|&d| (star_ball(d), m.d0().prob(d)))
            .collect();
        for _ in 1..l {
            let mut next = Vec::new();
            for (b, w) in current {
                let frontier = b.levels()[b.depth()].len();
                let mut pick = vec![0usize; frontier];
                loop {
                    let degrees: Vec<u32> = pick.iter().map(|&i| support[i]).collect();
                    let base: BigRational = degrees.iter().map(|&d| m.d0().prob(d)).product();
                    let spine: BigRational = degrees
                        .iter()
                        .map(|&d| BigRational::from_integer(BigInt::from(d - 1)))
                        .sum();
                    let weight =
                        &w * base * spine / BigRational::from_integer(BigInt::from(frontier));
                    if !weight.is_zero() {
                        let counts: Vec<u32> = degrees.iter().map(|d| d - 1).collect();
                        next.push((b.extend_deepest(&counts), weight));
                    }
                    let mut g = 0;
                    while g < frontier {
                        pick[g] += 1;
                        if pick[g] < support.len() {
                            break;
                        }
                        pick[g] = 0;
                        g += 1;
                    }
                    if g == frontier {
                        break;
                    }
                }
            }
            current = next;
        }
        let mut law = BTreeMap::new();
        for (b, w) in current {
            *law.entry(canonical_code(&b))
                .or_insert_with(BigRational::zero) += w;
        }
        law
    }

    #[test]
    fn sampler_law_is_exactly_the_limit() {
        for m in [
            measure(&[(1, 1, 2), (3, 1, 2)]),
            measure(&[(1, 1, 3), (2, 1, 3), (3, 1, 3)]),
            measure(&[(1, 1, 2), (2, 1, 4), (4, 1, 4)]),
        ] {
            for l in 1..=3 {
                let exact = limit_distribution(&m, l, 200).unwrap().classes;
                assert_eq!(sampler_law(&m, l), exact, "l={l}");
            }
        }
    }

    #[test]
    fn sampler_rejects_inconsistent_measures() {
        let three = measure(&[(3, 1, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_limit_ball(&three, 2, &mut rng),
            Err(Error::NotConsistent { .. })
        ));
        let two = measure(&[(2, 1, 1)]);
        for l in 0..4 {
            let b = sample_limit_ball(&two, l, &mut rng).unwrap();
            assert_eq!(
                canonical_code(&b),
                canonical_code(&path_ball(l).truncate(l))
            );
        }
    }

    #[test]
    fn tv_examples() {
        let a = canonical_code(&star_ball(1));
        let b = canonical_code(&star_ball(2));
        let half = BallDistribution {
            depth: 1,
            classes: [(a.clone(), rational(1, 2)), (b.clone(), rational(1, 2))].into(),
        };
        let point_a = BallDistribution {
            depth: 1,
            classes: [(a, rational(1, 1))].into(),
        };
        let point_b = BallDistribution {
            depth: 1,
            classes: [(b, rational(1, 1))].into(),
        };
        assert_eq!(tv_distance(&half, &half).unwrap(), rational(0, 1));
        assert_eq!(tv_distance(&point_a, &point_b).unwrap(), rational(1, 1));
        assert_eq!(tv_distance(&half, &point_a).unwrap(), rational(1, 2));
        let deeper = BallDistribution {
            depth: 2,
            classes: BTreeMap::new(),
        };
        assert_eq!(tv_distance(&half, &deeper), Err(Error::DepthMismatch(1, 2)));
    }

    #[test]
    fn json_round_trip() {
        let m = measure(&[(1, 1, 2), (3, 1, 2)]);
        let dist = limit_distribution(&m, 2, 100).unwrap();
        let back = BallDistribution::from_json(&dist.to_json()).unwrap();
        assert_eq!(back, dist);
        assert_eq!(dist.to_json()["deficit"], "0");
    }

    #[test]
    fn pmf_parsing() {
        let d = parse_pmf("1:1/2, 3:1/2").unwrap();
        assert_eq!(d.support(), vec![1, 3]);
        assert!(parse_pmf("1:1/2").is_err());
    }
}
