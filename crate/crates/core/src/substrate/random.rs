use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution as _, Exp, LogNormal, Normal};

use super::{reduce_edges, Orientation, SubstrateError, SubstrateGraph};
use crate::rng::{substream, TaskKind};

/// Sampling distribution given on the command line as `name:params`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Const(f64),
    Uniform(f64, f64),
    /// Integers in `[lo, hi]`, e.g. tick coordinates.
    Int(i64, i64),
    Normal(f64, f64),
    LogNormal(f64, f64),
    Exp(f64),
}

impl Distribution {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Const(v) => v,
            Distribution::Uniform(a, b) => rng.random_range(a..b),
            Distribution::Int(a, b) => rng.random_range(a..=b) as f64,
            Distribution::Normal(m, s) => Normal::new(m, s).expect("validated").sample(rng),
            Distribution::LogNormal(m, s) => LogNormal::new(m, s).expect("validated").sample(rng),
            Distribution::Exp(r) => Exp::new(r).expect("validated").sample(rng),
        }
    }

    /// True when every sample is `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        match *self {
            Distribution::Const(v) => v >= 0.0,
            Distribution::Uniform(a, _) => a >= 0.0,
            Distribution::Int(a, _) => a >= 0,
            Distribution::Normal(..) => false,
            Distribution::LogNormal(..) | Distribution::Exp(_) => true,
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Const(v) => write!(f, "const:{v}"),
            Distribution::Uniform(a, b) => write!(f, "uniform:{a},{b}"),
            Distribution::Int(a, b) => write!(f, "int:{a},{b}"),
            Distribution::Normal(m, s) => write!(f, "normal:{m},{s}"),
            Distribution::LogNormal(m, s) => write!(f, "lognormal:{m},{s}"),
            Distribution::Exp(r) => write!(f, "exp:{r}"),
        }
    }
}

impl FromStr for Distribution {
    type Err = SubstrateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| SubstrateError::InvalidDistribution(format!("`{s}`: {m}"));
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.is_empty() {
            vec![]
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad("parameters must be numbers"))?
        };
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(bad("parameters must be finite"));
        }
        let arity = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("expected {n} parameter(s)")))
            }
        };
        let d = match name {
            "const" => {
                arity(1)?;
                Distribution::Const(nums[0])
            }
            "uniform" => {
                arity(2)?;
                if nums[0] >= nums[1] {
                    return Err(bad("need lo < hi"));
                }
                Distribution::Uniform(nums[0], nums[1])
            }
            "int" => {
                arity(2)?;
                if nums[0].fract() != 0.0 || nums[1].fract() != 0.0 || nums[0] > nums[1] {
                    return Err(bad("need integer lo <= hi"));
                }
                Distribution::Int(nums[0] as i64, nums[1] as i64)
            }
            "normal" | "lognormal" => {
                arity(2)?;
                if nums[1] <= 0.0 {
                    return Err(bad("sigma must be > 0"));
                }
                if name == "normal" {
                    Distribution::Normal(nums[0], nums[1])
                } else {
                    Distribution::LogNormal(nums[0], nums[1])
                }
            }
            "exp" => {
                arity(1)?;
                if nums[0] <= 0.0 {
                    return Err(bad("rate must be > 0"));
                }
                Distribution::Exp(nums[0])
            }
            _ => return Err(bad("unknown distribution")),
        };
        Ok(d)
    }
}

/// How vertex weights are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightSource {
    /// One draw per vertex.
    #[default]
    Vertex,
    /// One nonnegative activity draw per edge, reduced onto vertices with
    /// unsigned incidence.
    Edges,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    pub vertices: usize,
    pub edges: usize,
    pub weight_dist: Distribution,
    pub coord_dist: Distribution,
    pub weight_source: WeightSource,
}

/// Random graph with uniformly drawn edges (no self loops).
pub fn random_graph(spec: &GraphSpec, seed: u64) -> Result<SubstrateGraph, SubstrateError> {
    if !spec.weight_dist.is_nonnegative() {
        return Err(SubstrateError::InvalidDistribution(format!(
            "weight distribution `{}` can produce negative weights",
            spec.weight_dist
        )));
    }
    if spec.edges > 0 && spec.vertices < 2 {
        return Err(SubstrateError::InvalidDistribution(
            "edges need at least two vertices".into(),
        ));
    }
    let mut rng = substream(seed, 0, TaskKind::Substrate, 0);
    let n = spec.vertices;
    let coords: Vec<f64> = (0..n).map(|_| spec.coord_dist.sample(&mut rng)).collect();
    let edges: Vec<(usize, usize)> = (0..spec.edges)
        .map(|_| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        })
        .collect();
    let weights = match spec.weight_source {
        WeightSource::Vertex => (0..n).map(|_| spec.weight_dist.sample(&mut rng)).collect(),
        WeightSource::Edges => {
            let activity: Vec<f64> =
                (0..edges.len()).map(|_| spec.weight_dist.sample(&mut rng)).collect();
            let skeleton = SubstrateGraph::new(vec![0.0; n], coords.clone(), edges.clone())?;
            reduce_edges(&skeleton, &activity, Orientation::Absolute)?
        }
    };
    SubstrateGraph::new(weights, coords, edges)
}
