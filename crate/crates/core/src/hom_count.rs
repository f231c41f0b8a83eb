//! Numbered forests `(F, r)`, injective (labeled) homomorphism counting into
//! host trees, and the closed-form probabilities that a fixed map embeds a
//! numbered forest into `T(D_n)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{factorial, falling_factorial, from_uint, rational};
use crate::degree_model::{validate_degree_sequence, DegreeModel};
use crate::error::{Error, Result};
use crate::neighborhood::RootedBall;
use crate::tree::{count_trees, LabeledTree};

/// A simple undirected graph on `0..m` (no loops, no parallel edges).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    adjacency: Vec<Vec<u32>>,
}

impl SimpleGraph {
    pub fn new(m: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); m];
        for &(u, v) in edges {
            if u as usize >= m || v as usize >= m {
                return Err(Error::InvalidGraph(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph("parallel edges".into()));
            }
        }
        Ok(SimpleGraph { adjacency })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.adjacency[v as usize].len() as u32
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (u, list) in self.adjacency.iter().enumerate() {
            out.extend(
                list.iter()
                    .filter(|&&v| (u as u32) < v)
                    .map(|&v| (u as u32, v)),
            );
        }
        out
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let m = self.node_count();
        let mut seen = vec![false; m];
        let mut out = Vec::new();
        for s in 0..m {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s as u32];
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &w in &self.adjacency[u as usize] {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_forest(&self) -> bool {
        self.edge_count() + self.components().len() == self.node_count()
    }
}

/// A forest with a remainder degree on every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberedForest {
    graph: SimpleGraph,
    remainders: Vec<u32>,
    components: Vec<Vec<u32>>,
}

impl NumberedForest {
    pub fn new(m: usize, edges: &[(u32, u32)], remainders: Vec<u32>) -> Result<Self> {
        Self::from_graph(SimpleGraph::new(m, edges)?, remainders)
    }

    pub fn from_graph(graph: SimpleGraph, remainders: Vec<u32>) -> Result<Self> {
        if graph.node_count() == 0 {
            return Err(Error::InvalidGraph("empty forest".into()));
        }
        if remainders.len() != graph.node_count() {
            return Err(Error::InvalidGraph(format!(
                "{} remainders for {} nodes",
                remainders.len(),
                graph.node_count()
            )));
        }
        if !graph.is_forest() {
            return Err(Error::NotAForest);
        }
        if let Some(v) =
            (0..graph.node_count()).find(|&v| graph.degree(v as u32) + remainders[v] == 0)
        {
            return Err(Error::InvalidGraph(format!(
                "node {v} would need host degree 0"
            )));
        }
        let components = graph.components();
        Ok(NumberedForest {
            graph,
            remainders,
            components,
        })
    }

    /// The numbered tree `(T', r')` of a ball with its deepest level removed.
    pub fn from_rooted(tree: &RootedBall, remainders: Vec<u32>) -> Result<Self> {
        let edges: Vec<(u32, u32)> = (1..tree.node_count() as u32)
            .map(|i| (tree.parent(i).expect("non-root"), i))
            .collect();
        Self::new(tree.node_count(), &edges, remainders)
    }

    pub fn graph(&self) -> &SimpleGraph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn remainders(&self) -> &[u32] {
        &self.remainders
    }

    pub fn components(&self) -> &[Vec<u32>] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// `R_i`, the remainder total of each component.
    pub fn component_remainder_sums(&self) -> Vec<u64> {
        self.components
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&j| u64::from(self.remainders[j as usize]))
                    .sum()
            })
            .collect()
    }

    pub fn total_remainder(&self) -> u64 {
        self.remainders.iter().map(|&r| u64::from(r)).sum()
    }

    /// Host degree required of each node, `D_F(j) + r_j`.
    pub fn target_degrees(&self) -> Vec<u32> {
        (0..self.node_count() as u32)
            .map(|j| self.graph.degree(j) + self.remainders[j as usize])
            .collect()
    }

    /// Text block: `m`, then 1-based edges `u v`, then the `m` remainders.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.node_count());
        for (u, v) in self.graph.edges() {
            let _ = writeln!(out, "{} {}", u + 1, v + 1);
        }
        let rem: Vec<String> = self.remainders.iter().map(u32::to_string).collect();
        out.push_str(&rem.join(" "));
        out.push('\n');
        out
    }

    /// Parses one text block; the last non-empty line holds the remainders.
    pub fn parse_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        if lines.len() < 2 {
            return Err(Error::Parse(
                "numbered forest needs a size and a remainder line".into(),
            ));
        }
        let m: usize = lines[0]
            .parse()
            .map_err(|e| Error::Parse(format!("forest size: {e}")))?;
        let numbers = |line: &str| -> Result<Vec<u32>> {
            line.split_whitespace()
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|e| Error::Parse(format!("{line:?}: {e}")))
                })
                .collect()
        };
        let remainders = numbers(lines[lines.len() - 1])?;
        if remainders.len() != m {
            return Err(Error::Parse(format!("expected {m} remainders")));
        }
        let mut edges = Vec::new();
        for line in &lines[1..lines.len() - 1] {
            let pair = numbers(line)?;
            if pair.len() != 2 || pair.contains(&0) {
                return Err(Error::Parse(format!("bad edge line {line:?}")));
            }
            edges.push((pair[0] - 1, pair[1] - 1));
        }
        Self::new(m, &edges, remainders)
    }

    /// Parses blocks separated by blank lines.
    pub fn parse_many(text: &str) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        let mut block = String::new();
        for line in text.lines().chain(std::iter::once("")) {
            if line.trim().is_empty() {
                if !block.trim().is_empty() {
                    out.push(Self::parse_text(&block)?);
                }
                block.clear();
            } else {
                block.push_str(line);
                block.push('\n');
            }
        }
        Ok(out)
    }
}

/// Placement order for backtracking: per component, BFS from the node with
/// the largest required degree. Each entry carries the already-placed
/// neighbors of the node (the first one is its BFS parent).
fn placement_order(graph: &SimpleGraph, key: &[u32]) -> Vec<(u32, Vec<u32>)> {
    let m = graph.node_count();
    let mut placed = vec![false; m];
    let mut order = Vec::with_capacity(m);
    for comp in graph.components() {
        let start = *comp
            .iter()
            .max_by_key(|&&v| (key[v as usize], std::cmp::Reverse(v)))
            .expect("non-empty component");
        let mut queue = vec![start];
        placed[start as usize] = true;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for &w in graph.neighbors(u) {
                if !placed[w as usize] {
                    placed[w as usize] = true;
                    queue.push(w);
                }
            }
        }
        let mut position = vec![usize::MAX; m];
        for (i, &v) in queue.iter().enumerate() {
            position[v as usize] = i;
        }
        for (i, &v) in queue.iter().enumerate() {
            let mut back: Vec<u32> = graph
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| position[w as usize] < i)
                .collect();
            back.sort_by_key(|&w| position[w as usize]);
            order.push((v, back));
        }
    }
    order
}

struct Backtrack<'a> {
    host: &'a LabeledTree,
    order: Vec<(u32, Vec<u32>)>,
    targets: Option<Vec<u32>>,
    by_degree: BTreeMap<u32, Vec<u32>>,
    image: Vec<u32>,
    used: Vec<bool>,
}

impl Backtrack<'_> {
    fn admissible(&self, f_node: u32, h: u32) -> bool {
        if self.used[h as usize] {
            return false;
        }
        if let Some(t) = &self.targets {
            if self.host.degree(h) != t[f_node as usize] {
                return false;
            }
        }
        true
    }

    fn count(&mut self, depth: usize) -> u128 {
        if depth == self.order.len() {
            return 1;
        }
        let (f_node, back) = self.order[depth].clone();
        let candidates: Vec<u32> = match back.first() {
            Some(&p) => self.host.neighbors(self.image[p as usize]).to_vec(),
            None => match &self.targets {
                Some(t) => self
                    .by_degree
                    .get(&t[f_node as usize])
                    .cloned()
                    .unwrap_or_default(),
                None => (0..self.host.n() as u32).collect(),
            },
        };
        let mut total = 0;
        for h in candidates {
            if !self.admissible(f_node, h) {
                continue;
            }
            if back[1.min(back.len())..]
                .iter()
                .any(|&w| !self.host.has_edge(self.image[w as usize], h))
            {
                continue;
            }
            self.used[h as usize] = true;
            self.image[f_node as usize] = h;
            total += self.count(depth + 1);
            self.used[h as usize] = false;
        }
        total
    }
}

fn count_injective(graph: &SimpleGraph, targets: Option<Vec<u32>>, host: &LabeledTree) -> u128 {
    if graph.node_count() > host.n() {
        return 0;
    }
    let key: Vec<u32> = match &targets {
        Some(t) => t.clone(),
        None => (0..graph.node_count() as u32)
            .map(|v| graph.degree(v))
            .collect(),
    };
    let mut by_degree: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for v in 0..host.n() as u32 {
        by_degree.entry(host.degree(v)).or_default().push(v);
    }
    let mut search = Backtrack {
        host,
        order: placement_order(graph, &key),
        targets,
        by_degree,
        image: vec![0; graph.node_count()],
        used: vec![false; host.n()],
    };
    search.count(0)
}

/// Number of injective homomorphisms `F -> G`.
pub fn inj_count(f: &SimpleGraph, g: &LabeledTree) -> u128 {
    count_injective(f, None, g)
}

/// `inj(F, G)`: injective homomorphisms per host vertex.
pub fn inj_density(f: &SimpleGraph, g: &LabeledTree) -> BigRational {
    BigRational::new(BigInt::from(inj_count(f, g)), BigInt::from(g.n()))
}

/// `X^{(F,r)}(G)`: injective homomorphisms with host degree `D_F(v) + r_v`
/// at every image.
pub fn x_statistic(nf: &NumberedForest, g: &LabeledTree) -> u128 {
    count_injective(&nf.graph, Some(nf.target_degrees()), g)
}

/// `inj_lab((F, r), G) = X / |V(G)|`.
pub fn inj_lab_density(nf: &NumberedForest, g: &LabeledTree) -> BigRational {
    BigRational::new(BigInt::from(x_statistic(nf, g)), BigInt::from(g.n()))
}

/// Whether `phi` is an injective labeled homomorphism of `nf` into `g`.
pub fn embeds(nf: &NumberedForest, phi: &[u32], g: &LabeledTree) -> bool {
    let targets = nf.target_degrees();
    nf.graph
        .edges()
        .iter()
        .all(|&(a, b)| g.has_edge(phi[a as usize], phi[b as usize]))
        && phi.iter().zip(&targets).all(|(&h, &t)| g.degree(h) == t)
}

fn check_map(phi: &[u32], m: usize, n: usize) -> Result<()> {
    if phi.len() != m {
        return Err(Error::InvalidEmbedding);
    }
    let mut seen = vec![false; n];
    for &h in phi {
        if h as usize >= n || seen[h as usize] {
            return Err(Error::InvalidEmbedding);
        }
        seen[h as usize] = true;
    }
    Ok(())
}

/// `H(r, F) = prod_i [ R_i prod_{j in C_i} (D_F(j) + r_j - 1)! / r_j! ]`.
pub fn h_constant(nf: &NumberedForest) -> BigRational {
    let mut h = BigRational::one();
    for (comp, r_sum) in nf.components.iter().zip(nf.component_remainder_sums()) {
        h *= BigRational::from_integer(BigInt::from(r_sum));
        for &j in comp {
            let r = u64::from(nf.remainders[j as usize]);
            let target = u64::from(nf.graph.degree(j)) + r;
            h *= from_uint(factorial(target - 1)) / from_uint(factorial(r));
        }
    }
    h
}

/// `P(I_n(F, phi) = 1)` for any fixed injective `phi` under an exchangeable
/// model.
pub fn forest_embed_prob(
    model: &DegreeModel,
    nf: &NumberedForest,
    n: usize,
) -> Result<BigRational> {
    forest_embed_prob_with_h(model, nf, n, &h_constant(nf))
}

/// The embedding formula evaluated with a caller-supplied `H` constant.
pub fn forest_embed_prob_with_h(
    model: &DegreeModel,
    nf: &NumberedForest,
    n: usize,
    h: &BigRational,
) -> Result<BigRational> {
    let m = nf.node_count();
    let c = nf.component_count();
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    if m > n {
        return Err(Error::DegenerateConfiguration(format!(
            "forest has {m} nodes, host has {n}"
        )));
    }
    let targets = nf.target_degrees();
    if m == n && c == 1 {
        // F spans the whole tree
        if nf.total_remainder() != 0 {
            return Ok(BigRational::zero());
        }
        let Ok(seq) = validate_degree_sequence(targets.clone()) else {
            return Ok(BigRational::zero());
        };
        let mass = model.prefix_probability(n, &targets)?;
        return Ok(mass / from_uint(count_trees(&seq)));
    }
    if m < n && nf.component_remainder_sums().contains(&0) {
        return Err(Error::DegenerateConfiguration(
            "a component has no remainder degree to attach to the rest of the tree".into(),
        ));
    }
    let mass = model.prefix_probability(n, &targets)?;
    Ok(factorial_ratio(n - m + c - 2, n - 2) * h * mass)
}

/// `a! / b!` as a rational.
fn factorial_ratio(a: usize, b: usize) -> BigRational {
    from_uint(factorial(a as u64)) / from_uint(factorial(b as u64))
}

/// Two numbered forests glued along coinciding images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedForest {
    pub forest: NumberedForest,
    /// Host vertex of each merged node.
    pub images: Vec<u32>,
    /// Merged index of each node of the first forest.
    pub left: Vec<u32>,
    /// Merged index of each node of the second forest.
    pub right: Vec<u32>,
}

/// Identifies `i in F1` with `j in F2` iff `phi(i) = psi(j)` and unions the
/// edges. Shared nodes must agree on their target host degree; the merged
/// remainder is that target minus the merged degree.
pub fn merge_numbered(
    nf1: &NumberedForest,
    phi: &[u32],
    nf2: &NumberedForest,
    psi: &[u32],
) -> Result<MergedForest> {
    let span = phi
        .iter()
        .chain(psi)
        .copied()
        .max()
        .map_or(0, |x| x as usize + 1);
    check_map(phi, nf1.node_count(), span)?;
    check_map(psi, nf2.node_count(), span)?;

    let mut images: Vec<u32> = Vec::new();
    let mut targets: Vec<u32> = Vec::new();
    let mut index_of: BTreeMap<u32, u32> = BTreeMap::new();
    let mut place = |h: u32, t: u32| -> Result<u32> {
        if let Some(&idx) = index_of.get(&h) {
            if targets[idx as usize] != t {
                return Err(Error::InconsistentRemainders(h));
            }
            return Ok(idx);
        }
        let idx = images.len() as u32;
        images.push(h);
        targets.push(t);
        index_of.insert(h, idx);
        Ok(idx)
    };
    let t1 = nf1.target_degrees();
    let t2 = nf2.target_degrees();
    let left = phi
        .iter()
        .zip(&t1)
        .map(|(&h, &t)| place(h, t))
        .collect::<Result<Vec<_>>>()?;
    let right = psi
        .iter()
        .zip(&t2)
        .map(|(&h, &t)| place(h, t))
        .collect::<Result<Vec<_>>>()?;

    let mut edges: Vec<(u32, u32)> = nf1
        .graph
        .edges()
        .iter()
        .map(|&(a, b)| (left[a as usize], left[b as usize]))
        .chain(
            nf2.graph
                .edges()
                .iter()
                .map(|&(a, b)| (right[a as usize], right[b as usize])),
        )
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let graph = SimpleGraph::new(images.len(), &edges)?;
    if !graph.is_forest() {
        return Err(Error::NotAForest);
    }
    let mut remainders = Vec::with_capacity(images.len());
    for (v, &t) in targets.iter().enumerate() {
        let deg = graph.degree(v as u32);
        if deg > t {
            return Err(Error::InconsistentRemainders(images[v]));
        }
        remainders.push(t - deg);
    }
    Ok(MergedForest {
        forest: NumberedForest::from_graph(graph, remainders)?,
        images,
        left,
        right,
    })
}

/// `P(I_n(F1, phi) = 1 | I_n(F2, psi) = 1)`.
pub fn cond_embed_prob(
    model: &DegreeModel,
    nf1: &NumberedForest,
    phi: &[u32],
    nf2: &NumberedForest,
    psi: &[u32],
    n: usize,
) -> Result<BigRational> {
    check_map(phi, nf1.node_count(), n)?;
    check_map(psi, nf2.node_count(), n)?;
    let merged = merge_numbered(nf1, phi, nf2, psi)?;
    let f12 = &merged.forest;
    let (m12, c12) = (f12.node_count(), f12.component_count());
    let (m2, c2) = (nf2.node_count(), nf2.component_count());

    let spanning = |m: usize, c: usize| m == n && c == 1;
    if spanning(m12, c12) || spanning(m2, c2) {
        let den = forest_embed_prob(model, nf2, n)?;
        if den.is_zero() {
            return Err(Error::NullConditioning);
        }
        return Ok(forest_embed_prob(model, f12, n)? / den);
    }
    for forest in [f12, nf2] {
        if forest.component_remainder_sums().contains(&0) {
            return Err(Error::DegenerateConfiguration(
                "a component has no remainder degree to attach to the rest of the tree".into(),
            ));
        }
    }
    let h2 = h_constant(nf2);
    let p2 = model.prefix_probability(n, &nf2.target_degrees())?;
    if h2.is_zero() || p2.is_zero() {
        return Err(Error::NullConditioning);
    }
    let p12 = model.prefix_probability(n, &f12.target_degrees())?;
    Ok(factorial_ratio(n - m12 + c12 - 2, n - m2 + c2 - 2) * (h_constant(f12) / h2) * (p12 / p2))
}

/// `E(X_n^{(T,r)}) = n!/(n-k)! * P(I_n(T, phi) = 1)` for a numbered tree.
pub fn expected_x(model: &DegreeModel, nf: &NumberedForest, n: usize) -> Result<BigRational> {
    if nf.component_count() != 1 {
        return Err(Error::InvalidGraph("expected a tree".into()));
    }
    let k = nf.node_count();
    if k > n {
        return Err(Error::DegenerateConfiguration(format!(
            "tree has {k} nodes, host has {n}"
        )));
    }
    let p = forest_embed_prob(model, nf, n)?;
    Ok(from_uint(falling_factorial(n as u64, k as u64)) * p)
}

/// `P(ij in E | D(i) = d_i, D(j) = d_j) = (d_i + d_j - 2) / (n - 2)`.
pub fn edge_prob(d_i: u32, d_j: u32, n: usize) -> Result<BigRational> {
    if n < 3 {
        return Err(Error::DegenerateConfiguration(format!("n = {n} < 3")));
    }
    if d_i == 0 || d_j == 0 {
        return Err(Error::DegenerateConfiguration(
            "degrees must be positive".into(),
        ));
    }
    Ok(rational(i64::from(d_i + d_j - 2), n as i64 - 2))
}

/// `P(D(i) = d_i, D(j) = d_j | ij in E)
///  = n/(n-2) * (d_i + d_j - 2)/2 * P(D(i) = d_i, D(j) = d_j)`.
pub fn edge_degree_dist(model: &DegreeModel, n: usize, d_i: u32, d_j: u32) -> Result<BigRational> {
    if n < 3 {
        return Err(Error::DegenerateConfiguration(format!("n = {n} < 3")));
    }
    if d_i == 0 || d_j == 0 {
        return Err(Error::DegenerateConfiguration(
            "degrees must be positive".into(),
        ));
    }
    let mass = model.prefix_probability(n, &[d_i, d_j])?;
    Ok(rational(n as i64, n as i64 - 2) * rational(i64::from(d_i + d_j - 2), 2) * mass)
}
