//! Built-in network generators and their agent-label conventions.

use std::collections::BTreeSet;

use crate::arcp::{self, ArcpConfig};
use crate::dynamics::{Aggregator, InteractionRule, NetworkDynamics};
use crate::petri::AgentId;

use super::ScenarioError;

/// A named network family with optional parameters, e.g. `grid3x3`,
/// `arcp:n=5,trim=1`, or `linear_alltoall:n=5,weight=2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuiltinNetwork {
    /// Three agents in a line: `{0} -> 1`, `{0,1} -> 2`.
    Chain3,
    /// Five agents in a ring of overlapping pair influences.
    Ring5,
    /// Five agents, every 3-subset influencing each outside agent.
    AllToAll5Joint,
    /// Nine agents on a 3x3 grid; each agent is influenced jointly by the
    /// rest of its column and jointly by the rest of its row.
    Grid3x3,
    /// Trimmed-mean protocol on a complete network.
    Arcp(ArcpConfig),
    /// Classical diffusive all-to-all coupling with a uniform weight.
    LinearAllToAll { n: usize, weight: FiniteWeight },
}

/// Weight wrapper so generator specs stay hashable/comparable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteWeight(pub f64);

impl Eq for FiniteWeight {}

fn err(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::UnknownGenerator(msg.into())
}

impl BuiltinNetwork {
    /// Parses `name` or `name:key=value,...`.
    pub fn parse(spec: &str) -> Result<Self, ScenarioError> {
        let (name, params) = match spec.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (spec.trim(), None),
        };
        let mut kv = std::collections::BTreeMap::new();
        if let Some(params) = params {
            for part in params.split(',').filter(|p| !p.trim().is_empty()) {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| err(format!("bad generator parameter `{part}`")))?;
                kv.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get_usize = |kv: &std::collections::BTreeMap<String, String>, key: &str, default: usize| {
            kv.get(key)
                .map(|v| v.parse::<usize>().map_err(|_| err(format!("parameter {key}={v} is not an integer"))))
                .unwrap_or(Ok(default))
        };
        match name {
            "chain3" => Ok(Self::Chain3),
            "ring5" => Ok(Self::Ring5),
            "alltoall5_joint" => Ok(Self::AllToAll5Joint),
            "grid3x3" => Ok(Self::Grid3x3),
            "arcp" => {
                let n = get_usize(&kv, "n", 5)?;
                let trim = get_usize(&kv, "trim", 1)?;
                let cfg = ArcpConfig::new(n, trim)
                    .map_err(|e| err(format!("bad arcp parameters: {e}")))?;
                Ok(Self::Arcp(cfg))
            }
            "linear_alltoall" => {
                let n = get_usize(&kv, "n", 5)?;
                if n < 2 {
                    return Err(err("linear_alltoall needs at least two agents"));
                }
                let weight = kv
                    .get("weight")
                    .map(|v| {
                        v.parse::<f64>()
                            .map_err(|_| err(format!("parameter weight={v} is not a number")))
                    })
                    .unwrap_or(Ok(1.0))?;
                if weight <= 0.0 || !weight.is_finite() {
                    return Err(err("linear weights must be positive"));
                }
                Ok(Self::LinearAllToAll { n, weight: FiniteWeight(weight) })
            }
            other => Err(err(format!("unknown generator `{other}`"))),
        }
    }

    /// Canonical generator string, parseable by [`BuiltinNetwork::parse`].
    pub fn spec_string(&self) -> String {
        match self {
            Self::Chain3 => "chain3".into(),
            Self::Ring5 => "ring5".into(),
            Self::AllToAll5Joint => "alltoall5_joint".into(),
            Self::Grid3x3 => "grid3x3".into(),
            Self::Arcp(cfg) => format!("arcp:n={},trim={}", cfg.n(), cfg.trim()),
            Self::LinearAllToAll { n, weight } => {
                format!("linear_alltoall:n={},weight={}", n, weight.0)
            }
        }
    }

    pub fn dynamics(&self) -> NetworkDynamics {
        match self {
            Self::Chain3 => {
                let rules = vec![
                    InteractionRule::joint(set(&[0]), AgentId(1)),
                    InteractionRule::joint(set(&[0, 1]), AgentId(2)),
                ];
                let aggregators = vec![
                    Aggregator::unit_sum(0),
                    Aggregator::unit_sum(1),
                    Aggregator::unit_sum(1),
                ];
                NetworkDynamics::new(3, rules, aggregators).expect("valid by construction")
            }
            Self::Ring5 => {
                let pairs: [([usize; 2], usize); 5] =
                    [([0, 1], 2), ([1, 2], 3), ([2, 3], 4), ([3, 4], 0), ([4, 0], 1)];
                let rules = pairs
                    .iter()
                    .map(|(g, t)| InteractionRule::joint(set(g), AgentId(*t)))
                    .collect();
                NetworkDynamics::new(5, rules, vec![Aggregator::unit_sum(1); 5])
                    .expect("valid by construction")
            }
            Self::AllToAll5Joint => {
                let mut rules = Vec::new();
                for i in 0..5usize {
                    let others: Vec<usize> = (0..5).filter(|&j| j != i).collect();
                    for g in crate::dynamics::combinations(&others, 3) {
                        rules.push(InteractionRule::joint(set(&g), AgentId(i)));
                    }
                }
                NetworkDynamics::new(5, rules, vec![Aggregator::unit_sum(4); 5])
                    .expect("valid by construction")
            }
            Self::Grid3x3 => {
                let mut rules = Vec::new();
                for r in 0..3usize {
                    for c in 0..3usize {
                        let target = AgentId(3 * r + c);
                        let column: Vec<usize> =
                            (0..3).filter(|&rr| rr != r).map(|rr| 3 * rr + c).collect();
                        let row: Vec<usize> =
                            (0..3).filter(|&cc| cc != c).map(|cc| 3 * r + cc).collect();
                        rules.push(InteractionRule::joint(set(&column), target));
                        rules.push(InteractionRule::joint(set(&row), target));
                    }
                }
                NetworkDynamics::new(9, rules, vec![Aggregator::unit_sum(2); 9])
                    .expect("valid by construction")
            }
            Self::Arcp(cfg) => arcp::as_network_dynamics(*cfg),
            Self::LinearAllToAll { n, weight } => {
                let mut rules = Vec::new();
                for i in 0..*n {
                    for j in 0..*n {
                        if i != j {
                            rules.push(InteractionRule::linear(AgentId(j), AgentId(i), weight.0));
                        }
                    }
                }
                NetworkDynamics::new(*n, rules, vec![Aggregator::unit_sum(n - 1); *n])
                    .expect("valid by construction")
            }
        }
    }

    pub fn n_agents(&self) -> usize {
        match self {
            Self::Chain3 => 3,
            Self::Ring5 | Self::AllToAll5Joint => 5,
            Self::Grid3x3 => 9,
            Self::Arcp(cfg) => cfg.n(),
            Self::LinearAllToAll { n, .. } => *n,
        }
    }

    /// Human label for one agent; the grid uses 1-based `(row,col)` pairs.
    pub fn label(&self, agent: AgentId) -> String {
        match self {
            Self::Grid3x3 => format!("({},{})", agent.0 / 3 + 1, agent.0 % 3 + 1),
            _ => agent.to_string(),
        }
    }

    /// Accepts a plain index for any network and `(row,col)` for the grid.
    pub fn parse_agent(&self, text: &str) -> Result<AgentId, ScenarioError> {
        let text = text.trim();
        if let Self::Grid3x3 = self {
            if let Some(inner) = text.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
                let (r, c) = inner
                    .split_once(',')
                    .ok_or_else(|| err(format!("bad grid label `{text}`")))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|v| (1..=3).contains(v))
                        .ok_or_else(|| err(format!("bad grid label `{text}`")))
                };
                let (r, c) = (parse(r)?, parse(c)?);
                return Ok(AgentId(3 * (r - 1) + (c - 1)));
            }
        }
        let idx = text
            .parse::<usize>()
            .map_err(|_| err(format!("bad agent reference `{text}`")))?;
        if idx >= self.n_agents() {
            return Err(err(format!(
                "agent {idx} out of range for `{}`",
                self.spec_string()
            )));
        }
        Ok(AgentId(idx))
    }
}

fn set(xs: &[usize]) -> BTreeSet<AgentId> {
    xs.iter().copied().map(AgentId).collect()
}

/// Builds a built-in network from its generator spec string.
pub fn builtin_network(spec: &str) -> Result<NetworkDynamics, ScenarioError> {
    Ok(BuiltinNetwork::parse(spec)?.dynamics())
}
