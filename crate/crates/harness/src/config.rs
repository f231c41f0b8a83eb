//! JSON experiment configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use treelimit::arith::rational;
use treelimit::degree_model::ArithmeticMode;
use treelimit::{DegreeDistribution, DegreeModel, NumberedForest};

use crate::error::{HarnessError, Result};

/// A probability given as `[numerator, denominator]`.
pub type Fraction = [i64; 2];

fn fraction(f: &Fraction) -> Result<BigRational> {
    if f[1] <= 0 || f[0] < 0 {
        return Err(HarnessError::Config(format!(
            "bad fraction {}/{}",
            f[0], f[1]
        )));
    }
    Ok(rational(f[0], f[1]))
}

fn degree_key(key: &str) -> Result<u32> {
    key.trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("degree key {key:?} is not an integer")))
}

pub fn pmf_from_map(map: &BTreeMap<String, Fraction>) -> Result<DegreeDistribution> {
    let entries = map
        .iter()
        .map(|(k, f)| Ok((degree_key(k)?, fraction(f)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DegreeDistribution::new(entries)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// One explicit multiset; every `n` in the grid must equal its length.
    Fixed,
    /// For each `n` the multiset with `floor(f_d n)` nodes of each degree
    /// `d >= 3`, the rest filled with degrees 2 and 1.
    Profile,
    ConditionedIid,
    Star,
    Mixture,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf: Option<BTreeMap<String, Fraction>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiset: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<BTreeMap<String, Fraction>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<ComponentSpec>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight: Fraction,
    pub model: ModelSpec,
}

/// Degree counts of a profile model at size `n`.
pub fn profile_multiset(profile: &BTreeMap<u32, BigRational>, n: usize) -> Result<Vec<u32>> {
    let mut degrees = Vec::with_capacity(n);
    let mut excess: i64 = 0;
    let mut branch: i64 = 0;
    for (&d, f) in profile {
        let count = (f * BigRational::from_integer(n.into()))
            .floor()
            .to_integer();
        let count: i64 = count
            .try_into()
            .map_err(|_| HarnessError::Config("profile count overflow".into()))?;
        degrees.extend(std::iter::repeat_n(d, count as usize));
        excess += (i64::from(d) - 1) * count;
        branch += (i64::from(d) - 2) * count;
    }
    let twos = n as i64 - 2 - excess;
    if twos < 0 {
        return Err(HarnessError::Config(format!(
            "profile does not fit n = {n}"
        )));
    }
    degrees.extend(std::iter::repeat_n(2, twos as usize));
    degrees.extend(std::iter::repeat_n(1, (2 + branch) as usize));
    debug_assert_eq!(degrees.len(), n);
    Ok(degrees)
}

impl ModelSpec {
    fn profile_map(&self) -> Result<BTreeMap<u32, BigRational>> {
        let raw = self
            .profile
            .as_ref()
            .ok_or_else(|| HarnessError::Config("profile model needs a profile".into()))?;
        let mut out = BTreeMap::new();
        for (k, f) in raw {
            let d = degree_key(k)?;
            if d < 3 {
                return Err(HarnessError::Config(
                    "profile lists degrees >= 3 only".into(),
                ));
            }
            out.insert(d, fraction(f)?);
        }
        Ok(out)
    }

    /// The model at size `n`.
    pub fn model_for(&self, n: usize) -> Result<DegreeModel> {
        match self.variant {
            Variant::Fixed => {
                let multiset = self
                    .multiset
                    .clone()
                    .ok_or_else(|| HarnessError::Config("fixed model needs a multiset".into()))?;
                if multiset.len() != n {
                    return Err(HarnessError::Config(format!(
                        "multiset has {} entries but n = {n}",
                        multiset.len()
                    )));
                }
                Ok(DegreeModel::fixed(multiset)?)
            }
            Variant::Profile => Ok(DegreeModel::fixed(profile_multiset(
                &self.profile_map()?,
                n,
            )?)?),
            Variant::ConditionedIid => {
                let pmf = self.pmf.as_ref().ok_or_else(|| {
                    HarnessError::Config("conditioned_iid model needs a pmf".into())
                })?;
                Ok(DegreeModel::ConditionedIid(pmf_from_map(pmf)?))
            }
            Variant::Star => Ok(DegreeModel::Star),
            Variant::Mixture => {
                let components = self
                    .components
                    .as_ref()
                    .ok_or_else(|| HarnessError::Config("mixture model needs components".into()))?;
                let parts = components
                    .iter()
                    .map(|c| Ok((fraction(&c.weight)?, c.model.model_for(n)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(DegreeModel::mixture(parts)?)
            }
        }
    }

    /// The degree law of the local limit, when the model determines one.
    pub fn limit_law(&self) -> Result<Option<DegreeDistribution>> {
        match self.variant {
            Variant::ConditionedIid => {
                Ok(Some(pmf_from_map(self.pmf.as_ref().ok_or_else(|| {
                    HarnessError::Config("conditioned_iid model needs a pmf".into())
                })?)?))
            }
            Variant::Profile => {
                let profile = self.profile_map()?;
                let mut pmf: BTreeMap<u32, BigRational> = profile.clone();
                let mut two = BigRational::one();
                let mut one = BigRational::zero();
                for (&d, f) in &profile {
                    two -= f * BigRational::from_integer((d - 1).into());
                    one += f * BigRational::from_integer((d - 2).into());
                }
                pmf.insert(2, two);
                pmf.insert(1, one);
                Ok(Some(DegreeDistribution::new(pmf)?))
            }
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    #[default]
    Exact,
    Float,
}

impl From<ModeSpec> for ArithmeticMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Exact => ArithmeticMode::Exact,
            ModeSpec::Float => ArithmeticMode::Float,
        }
    }
}

/// A tracked statistic `X^{(F, r)} / n`; edges are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatSpec {
    pub name: String,
    pub nodes: usize,
    #[serde(default)]
    pub edges: Vec<[u32; 2]>,
    pub remainders: Vec<u32>,
}

impl StatSpec {
    pub fn forest(&self) -> Result<NumberedForest> {
        let edges = self
            .edges
            .iter()
            .map(|&[u, v]| {
                if u == 0 || v == 0 {
                    Err(HarnessError::Config(format!(
                        "statistic {}: edges are 1-based",
                        self.name
                    )))
                } else {
                    Ok((u - 1, v - 1))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NumberedForest::new(
            self.nodes,
            &edges,
            self.remainders.clone(),
        )?)
    }

    pub fn vertex(d: u32) -> Self {
        StatSpec {
            name: format!("vertex_r{d}"),
            nodes: 1,
            edges: Vec::new(),
            remainders: vec![d],
        }
    }

    pub fn edge(r1: u32, r2: u32) -> Self {
        StatSpec {
            name: format!("edge_r{r1}_{r2}"),
            nodes: 2,
            edges: vec![[1, 2]],
            remainders: vec![r1, r2],
        }
    }
}

fn default_degree_cap() -> u32 {
    8
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub n_grid: Vec<usize>,
    pub samples_per_n: usize,
    pub radius: usize,
    #[serde(default = "default_degree_cap")]
    pub degree_cap: u32,
    pub seed: u64,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Overrides the limit law derived from the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_pmf: Option<BTreeMap<String, Fraction>>,
    /// Defaults to one vertex statistic per limit degree plus `edge_r1_1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistics: Option<Vec<StatSpec>>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(HarnessError::Config("n_grid is empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config(
                "n_grid must be strictly increasing".into(),
            ));
        }
        if self.samples_per_n == 0 {
            return Err(HarnessError::Config(
                "samples_per_n must be at least 1".into(),
            ));
        }
        if self.radius == 0 {
            return Err(HarnessError::Config("radius must be at least 1".into()));
        }
        for &n in &self.n_grid {
            let model = self.model.model_for(n)?;
            model.check_feasible(n)?;
        }
        if let Some(law) = self.limit_law()? {
            if law.max_degree() > self.degree_cap {
                return Err(HarnessError::Config(format!(
                    "limit support reaches {} beyond degree_cap {}",
                    law.max_degree(),
                    self.degree_cap
                )));
            }
        }
        self.statistics()?;
        Ok(())
    }

    pub fn limit_law(&self) -> Result<Option<DegreeDistribution>> {
        match &self.limit_pmf {
            Some(map) => Ok(Some(pmf_from_map(map)?)),
            None => self.model.limit_law(),
        }
    }

    pub fn statistics(&self) -> Result<Vec<(StatSpec, NumberedForest)>> {
        let specs = match &self.statistics {
            Some(list) => list.clone(),
            None => {
                let mut list: Vec<StatSpec> = match self.limit_law()? {
                    Some(law) => law.support().into_iter().map(StatSpec::vertex).collect(),
                    None => Vec::new(),
                };
                list.push(StatSpec::edge(1, 1));
                list
            }
        };
        specs
            .into_iter()
            .map(|s| {
                let f = s.forest()?;
                Ok((s, f))
            })
            .collect()
    }

    /// SHA-256 of the normalized configuration.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("serializable");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
