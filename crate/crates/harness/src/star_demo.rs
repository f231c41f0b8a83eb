//! Stars have no local limit: leaf balls of radius 2 are the whole star, so
//! mass escapes every finite set of classes.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use treelimit::arith::{format_rational, rational};
use treelimit::neighborhood::empirical_stats;
use treelimit::LabeledTree;

use crate::error::{HarnessError, Result};

pub const DEFAULT_CLASS_NODE_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarRow {
    pub n: usize,
    /// Frequency of the single-edge class at radius 1.
    pub edge_mass: BigRational,
    /// Radius-2 frequency carried by classes with at most `k` nodes.
    pub small_mass: BigRational,
}

#[derive(Debug, Serialize)]
struct StarRowJson {
    n: usize,
    edge_mass: String,
    small_depth2_mass: String,
}

pub fn star(n: usize) -> LabeledTree {
    let edges: Vec<(u32, u32)> = (1..n as u32).map(|v| (0, v)).collect();
    LabeledTree::from_edges(n, &edges).expect("star")
}

pub fn run_star_demo(n_grid: &[usize], k: usize) -> Result<Vec<StarRow>> {
    if let Some(&n) = n_grid.iter().find(|&&n| n < 4) {
        return Err(HarnessError::Config(format!(
            "star demo needs n >= 4, got {n}"
        )));
    }
    let edge_code = "(())".parse().expect("code");
    Ok(n_grid
        .iter()
        .map(|&n| {
            let t = star(n);
            let edge_mass = empirical_stats(&t, 1).frequency(&edge_code);
            let small_mass = empirical_stats(&t, 2)
                .counts
                .iter()
                .filter(|(code, _)| code.node_count() <= k)
                .fold(BigRational::zero(), |acc, (_, &c)| {
                    acc + rational(c as i64, n as i64)
                });
            StarRow {
                n,
                edge_mass,
                small_mass,
            }
        })
        .collect())
}

pub fn star_json(rows: &[StarRow]) -> serde_json::Value {
    let rows: Vec<StarRowJson> = rows
        .iter()
        .map(|r| StarRowJson {
            n: r.n,
            edge_mass: format_rational(&r.edge_mass),
            small_depth2_mass: format_rational(&r.small_mass),
        })
        .collect();
    serde_json::to_value(rows).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let rows = run_star_demo(&[4, 10, 1000], DEFAULT_CLASS_NODE_LIMIT).unwrap();
        assert_eq!(rows[0].small_mass, rational(1, 1));
        assert_eq!(rows[1].edge_mass, rational(9, 10));
        assert_eq!(rows[2].edge_mass, rational(999, 1000));
        assert!(rows[2].small_mass.is_zero());
        assert!(run_star_demo(&[3], 10).is_err());
    }
}
