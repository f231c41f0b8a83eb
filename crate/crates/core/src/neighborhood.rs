//! Rooted balls `B_G(v, R)`, rooted-isomorphism codes, automorphism counts
//! and empirical neighborhood statistics.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::factorial;
use crate::error::{Error, Result};
use crate::tree::LabeledTree;

/// A finite rooted tree with nodes numbered in BFS order (root is 0, every
/// parent precedes its children, children lists are increasing).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedBall {
    parent: Vec<Option<u32>>,
    children: Vec<Vec<u32>>,
    level: Vec<u32>,
    levels: Vec<Vec<u32>>,
}

impl RootedBall {
    /// The single-vertex ball.
    pub fn singleton() -> Self {
        Self::from_parents(&[None]).expect("valid")
    }

    /// Builds from a parent array with exactly one root. Nodes are renumbered
    /// into BFS order; the returned ball does not remember the input labels.
    pub fn from_parents(parents: &[Option<u32>]) -> Result<Self> {
        let k = parents.len();
        let roots: Vec<usize> = (0..k).filter(|&i| parents[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidGraph(format!("{} roots", roots.len())));
        }
        let mut kids = vec![Vec::new(); k];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                if *p as usize >= k {
                    return Err(Error::InvalidGraph(format!("parent {p} out of range")));
                }
                kids[*p as usize].push(i as u32);
            }
        }
        let mut order = vec![roots[0] as u32];
        let mut head = 0;
        while head < order.len() {
            let u = order[head] as usize;
            head += 1;
            order.extend(kids[u].iter().copied());
        }
        if order.len() != k {
            return Err(Error::InvalidGraph("parent links contain a cycle".into()));
        }
        let mut new_index = vec![0u32; k];
        for (pos, &old) in order.iter().enumerate() {
            new_index[old as usize] = pos as u32;
        }
        let parent: Vec<Option<u32>> = order
            .iter()
            .map(|&old| parents[old as usize].map(|p| new_index[p as usize]))
            .collect();
        Ok(Self::from_bfs_parents(parent))
    }

    /// `parent[i] < i` for every non-root `i`; root is node 0.
    fn from_bfs_parents(parent: Vec<Option<u32>>) -> Self {
        let k = parent.len();
        let mut children = vec![Vec::new(); k];
        let mut level = vec![0u32; k];
        for i in 1..k {
            let p = parent[i].expect("non-root has a parent") as usize;
            debug_assert!(p < i);
            children[p].push(i as u32);
            level[i] = level[p] + 1;
        }
        let depth = level.iter().copied().max().unwrap_or(0) as usize;
        let mut levels = vec![Vec::new(); depth + 1];
        for (i, &l) in level.iter().enumerate() {
            levels[l as usize].push(i as u32);
        }
        RootedBall {
            parent,
            children,
            level,
            levels,
        }
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    /// Largest distance from the root.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Nodes at each distance from the root (`T_0, T_1, ...`).
    pub fn levels(&self) -> &[Vec<u32>] {
        &self.levels
    }

    /// `t_0, t_1, ..., t_l`.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn parent(&self, i: u32) -> Option<u32> {
        self.parent[i as usize]
    }

    pub fn children(&self, i: u32) -> &[u32] {
        &self.children[i as usize]
    }

    pub fn level_of(&self, i: u32) -> usize {
        self.level[i as usize] as usize
    }

    /// Degree of `i` inside the ball.
    pub fn degree(&self, i: u32) -> u32 {
        self.children[i as usize].len() as u32 + u32::from(self.parent[i as usize].is_some())
    }

    /// The ball of radius `radius` around the root.
    pub fn truncate(&self, radius: usize) -> RootedBall {
        let keep = self.level.iter().filter(|&&l| l as usize <= radius).count();
        // BFS order puts shallower nodes first
        Self::from_bfs_parents(self.parent[..keep].to_vec())
    }

    /// Adds `counts[j]` leaf children to the `j`-th deepest-level node.
    pub fn extend_deepest(&self, counts: &[u32]) -> RootedBall {
        let deepest = &self.levels[self.depth()];
        assert_eq!(counts.len(), deepest.len(), "one count per deepest node");
        let mut parent = self.parent.clone();
        for (&node, &c) in deepest.iter().zip(counts) {
            parent.extend(std::iter::repeat_n(Some(node), c as usize));
        }
        Self::from_bfs_parents(parent)
    }

    /// AHU codes of every node's subtree, indexed by node.
    fn subtree_codes(&self) -> Vec<Vec<u8>> {
        let k = self.node_count();
        let mut codes: Vec<Vec<u8>> = vec![Vec::new(); k];
        for i in (0..k).rev() {
            let mut kids: Vec<&[u8]> = self.children[i]
                .iter()
                .map(|&c| codes[c as usize].as_slice())
                .collect();
            kids.sort_unstable();
            let mut code = Vec::with_capacity(2 + kids.iter().map(|c| c.len()).sum::<usize>());
            code.push(b'(');
            for c in kids {
                code.extend_from_slice(c);
            }
            code.push(b')');
            codes[i] = code;
        }
        codes
    }

    pub fn from_code(code: &CanonicalCode) -> RootedBall {
        let mut parent = Vec::with_capacity(code.node_count);
        let mut stack: Vec<u32> = Vec::new();
        for &b in &code.bytes {
            if b == b'(' {
                let id = parent.len() as u32;
                parent.push(stack.last().copied());
                stack.push(id);
            } else {
                stack.pop();
            }
        }
        // preorder numbering; renumber into BFS order
        RootedBall::from_parents(&parent).expect("code describes a tree")
    }
}

/// Balanced-parenthesis code; equal codes iff rooted-isomorphic balls.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode {
    bytes: Vec<u8>,
    node_count: usize,
    depth: usize,
}

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.bytes).expect("ASCII")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Wraps bytes already known to be a canonical code.
    pub(crate) fn from_canonical_bytes(bytes: Vec<u8>) -> Self {
        let (node_count, depth) = scan_parens(&bytes).expect("balanced");
        CanonicalCode {
            bytes,
            node_count,
            depth,
        }
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn scan_parens(bytes: &[u8]) -> Option<(usize, usize)> {
    let mut open = 0usize;
    let mut nodes = 0usize;
    let mut depth = 0usize;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => {
                if open == 0 && i > 0 {
                    return None;
                }
                open += 1;
                nodes += 1;
                depth = depth.max(open - 1);
            }
            b')' => {
                open = open.checked_sub(1)?;
            }
            _ => return None,
        }
    }
    (open == 0 && nodes > 0).then_some((nodes, depth))
}

impl FromStr for CanonicalCode {
    type Err = Error;

    /// Accepts any balanced parenthesis tree and canonicalises it.
    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.trim().as_bytes();
        scan_parens(bytes).ok_or_else(|| Error::Parse(format!("not a rooted tree code: {s:?}")))?;
        let raw = CanonicalCode::from_canonical_bytes(bytes.to_vec());
        Ok(canonical_code(&RootedBall::from_code(&raw)))
    }
}

/// The rooted `radius`-ball around `v`.
pub fn ball(tree: &LabeledTree, v: u32, radius: usize) -> RootedBall {
    BallScanner::new(tree.n()).scan(tree, v, radius).0
}

/// Reusable scratch space for repeated ball extraction on one host tree.
struct BallScanner {
    mark: Vec<u32>,
    stamp: u32,
}

impl BallScanner {
    fn new(n: usize) -> Self {
        BallScanner {
            mark: vec![0; n],
            stamp: 0,
        }
    }

    /// Returns the ball and the host label of each ball node.
    fn scan(&mut self, tree: &LabeledTree, v: u32, radius: usize) -> (RootedBall, Vec<u32>) {
        self.stamp += 1;
        let stamp = self.stamp;
        let mut host = vec![v];
        let mut parent = vec![None];
        let mut dist = vec![0usize];
        self.mark[v as usize] = stamp;
        let mut head = 0;
        while head < host.len() {
            let u = host[head];
            let du = dist[head];
            if du < radius {
                for &w in tree.neighbors(u) {
                    if self.mark[w as usize] != stamp {
                        self.mark[w as usize] = stamp;
                        host.push(w);
                        parent.push(Some(head as u32));
                        dist.push(du + 1);
                    }
                }
            }
            head += 1;
        }
        (RootedBall::from_bfs_parents(parent), host)
    }
}

/// Ball together with the host vertex of each of its nodes.
pub fn ball_with_host_labels(tree: &LabeledTree, v: u32, radius: usize) -> (RootedBall, Vec<u32>) {
    BallScanner::new(tree.n()).scan(tree, v, radius)
}

pub fn canonical_code(ball: &RootedBall) -> CanonicalCode {
    let bytes = ball.subtree_codes().swap_remove(0);
    CanonicalCode {
        bytes,
        node_count: ball.node_count(),
        depth: ball.depth(),
    }
}

/// Root-preserving automorphisms: the product over nodes of `m!` for each
/// multiplicity `m` of identical child subtrees.
pub fn aut_size(ball: &RootedBall) -> BigUint {
    let codes = ball.subtree_codes();
    let mut total = BigUint::one();
    for i in 0..ball.node_count() {
        let mut kids: Vec<&Vec<u8>> = ball.children[i]
            .iter()
            .map(|&c| &codes[c as usize])
            .collect();
        kids.sort_unstable();
        let mut run = 1u64;
        for w in kids.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                total *= factorial(run);
                run = 1;
            }
        }
        total *= factorial(run);
    }
    total
}

/// `|Aut(B)|` divided by the permutations of deepest-level siblings,
/// `prod_{i in T_{l-1}} (children of i)!`.
pub fn aut_quotient_size(ball: &RootedBall) -> Result<BigUint> {
    let l = ball.depth();
    if l < 1 {
        return Err(Error::DepthTooSmall {
            required: 1,
            actual: l,
        });
    }
    let sibling_perms = ball.levels[l - 1].iter().fold(BigUint::one(), |acc, &i| {
        acc * factorial(ball.children[i as usize].len() as u64)
    });
    let (q, r) = aut_size(ball).div_rem(&sibling_perms);
    if !r.is_zero() {
        return Err(Error::NonDivisible);
    }
    Ok(q)
}

/// Removes the deepest level; the remainder of each kept node is its degree
/// loss (zero except on `T_{l-1}`).
pub fn strip_last_level(ball: &RootedBall) -> Result<(RootedBall, Vec<u32>)> {
    let l = ball.depth();
    if l < 1 {
        return Err(Error::DepthTooSmall {
            required: 1,
            actual: l,
        });
    }
    let stripped = ball.truncate(l - 1);
    let remainders = (0..stripped.node_count() as u32)
        .map(|i| ball.degree(i) - stripped.degree(i))
        .collect();
    Ok((stripped, remainders))
}

/// Counts of radius-`R` ball classes over all roots of a host tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodStats {
    pub n: usize,
    pub radius: usize,
    pub counts: BTreeMap<CanonicalCode, u64>,
}

impl NeighborhoodStats {
    pub fn frequency(&self, code: &CanonicalCode) -> BigRational {
        let c = self.counts.get(code).copied().unwrap_or(0);
        BigRational::new(BigInt::from(c), BigInt::from(self.n))
    }

    /// `p(R, F, U(G))` for every class present.
    pub fn frequencies(&self) -> BTreeMap<CanonicalCode, BigRational> {
        self.counts
            .keys()
            .map(|code| (code.clone(), self.frequency(code)))
            .collect()
    }

    pub fn frequencies_f64(&self) -> BTreeMap<CanonicalCode, f64> {
        self.counts
            .iter()
            .map(|(code, &c)| (code.clone(), c as f64 / self.n as f64))
            .collect()
    }

    /// Statistics at a smaller radius, obtained by truncating each class.
    pub fn coarsen(&self, radius: usize) -> NeighborhoodStats {
        assert!(radius <= self.radius);
        let mut counts = BTreeMap::new();
        for (code, &c) in &self.counts {
            let truncated = canonical_code(&RootedBall::from_code(code).truncate(radius));
            *counts.entry(truncated).or_insert(0) += c;
        }
        NeighborhoodStats {
            n: self.n,
            radius,
            counts,
        }
    }
}

pub fn empirical_stats(tree: &LabeledTree, radius: usize) -> NeighborhoodStats {
    let mut scanner = BallScanner::new(tree.n());
    let mut counts = BTreeMap::new();
    for v in 0..tree.n() as u32 {
        let (b, _) = scanner.scan(tree, v, radius);
        *counts.entry(canonical_code(&b)).or_insert(0) += 1;
    }
    NeighborhoodStats {
        n: tree.n(),
        radius,
        counts,
    }
}
