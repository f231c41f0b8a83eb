//! Uniform random labeled trees with a given degree sequence, their local
//! (rooted-ball) statistics, labeled subgraph densities and the limit
//! measure on rooted trees.

pub mod arith;
pub mod degree_model;
pub mod error;
pub mod hom_count;
pub mod limit_object;
pub mod neighborhood;
pub mod tree;

pub use degree_model::{DegreeDistribution, DegreeModel, DegreeSequence};
pub use error::{Error, Result};
pub use hom_count::{NumberedForest, SimpleGraph};
pub use limit_object::{BallDistribution, LimitMeasure};
pub use neighborhood::{CanonicalCode, NeighborhoodStats, RootedBall};
pub use tree::{LabeledTree, PruferSequence};
