//! Interaction rate functions, per-agent aggregators, and assembly of the
//! network vector field, plus numerical probes certifying joint influence and
//! cooperativity.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::arcp::{trimmed_mean, ArcpConfig};
use crate::petri::{AgentId, PetriNet, Transition};

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

/// Rate handle for user-supplied influences: (full state, group indices,
/// target index) -> rate. Assumed Lipschitz; not verified.
pub type CustomRate = Arc<dyn Fn(&[f64], &[usize], usize) -> f64 + Send + Sync>;

/// How the rate of one influence is computed from the state.
#[derive(Clone)]
pub enum RateKind {
    /// Consistency-filtered group rate: the group moves the target only when
    /// all members sit on the same side of it.
    MaxMinJoint,
    /// Classical diffusive pair coupling with a positive weight.
    LinearPair { weight: f64 },
    /// Marker for trimmed-mean networks: the rule carries topology only and
    /// the whole per-agent rate is evaluated by the trimmed-mean drift.
    ArcpImplicit,
    Custom(CustomRate),
}

impl fmt::Debug for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateKind::MaxMinJoint => write!(f, "MaxMinJoint"),
            RateKind::LinearPair { weight } => write!(f, "LinearPair {{ weight: {weight} }}"),
            RateKind::ArcpImplicit => write!(f, "ArcpImplicit"),
            RateKind::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl PartialEq for RateKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (RateKind::MaxMinJoint, RateKind::MaxMinJoint) => true,
            (RateKind::LinearPair { weight: a }, RateKind::LinearPair { weight: b }) => a == b,
            (RateKind::ArcpImplicit, RateKind::ArcpImplicit) => true,
            (RateKind::Custom(a), RateKind::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// One minimal joint influence `group -> target` with its rate function.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionRule {
    pub group: BTreeSet<AgentId>,
    pub target: AgentId,
    pub rate: RateKind,
}

impl InteractionRule {
    pub fn joint(group: BTreeSet<AgentId>, target: AgentId) -> Self {
        Self { group, target, rate: RateKind::MaxMinJoint }
    }

    pub fn linear(source: AgentId, target: AgentId, weight: f64) -> Self {
        Self {
            group: [source].into_iter().collect(),
            target,
            rate: RateKind::LinearPair { weight },
        }
    }
}

/// Monotone combination of the incoming rule rates of one agent. Every kind
/// vanishes at the all-zero argument and is strictly increasing in each
/// argument there.
#[derive(Debug, Clone, PartialEq)]
pub enum Aggregator {
    WeightedSum(Vec<f64>),
    MinPlusMax,
    SaturatedSum { weights: Vec<f64>, sat_level: f64 },
    CubedSum(Vec<f64>),
}

impl Aggregator {
    pub fn unit_sum(arity: usize) -> Self {
        Aggregator::WeightedSum(vec![1.0; arity])
    }

    fn validate(&self, arity: usize, agent: AgentId) -> Result<()> {
        let check_weights = |ws: &Vec<f64>| -> Result<()> {
            if ws.len() != arity {
                return Err(DynamicsError::InvalidArgument(format!(
                    "aggregator of agent {agent} has {} weights but {arity} incoming rules",
                    ws.len()
                )));
            }
            if ws.iter().any(|w| !w.is_finite() || *w <= 0.0) {
                return Err(DynamicsError::InvalidArgument(format!(
                    "aggregator weights of agent {agent} must be finite and positive"
                )));
            }
            Ok(())
        };
        match self {
            Aggregator::WeightedSum(ws) | Aggregator::CubedSum(ws) => check_weights(ws),
            Aggregator::SaturatedSum { weights, sat_level } => {
                check_weights(weights)?;
                if !sat_level.is_finite() || *sat_level <= 0.0 {
                    return Err(DynamicsError::InvalidArgument(format!(
                        "saturation level of agent {agent} must be finite and positive"
                    )));
                }
                Ok(())
            }
            Aggregator::MinPlusMax => {
                if arity == 0 {
                    return Err(DynamicsError::InvalidArgument(format!(
                        "min-plus-max aggregator of agent {agent} needs at least one rule"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Group rate with consistency filtering: positive only when every group
/// member sits strictly above the target, negative only when every member
/// sits strictly below, zero on straddles and at consensus.
pub fn joint_rate(group: &BTreeSet<AgentId>, target: AgentId, x: &[f64]) -> Result<f64> {
    if group.is_empty() {
        return Err(DynamicsError::InvalidArgument("influence group must be non-empty".into()));
    }
    if group.contains(&target) {
        return Err(DynamicsError::InvalidArgument(
            "target must not be a member of its influence group".into(),
        ));
    }
    for a in group.iter().chain(std::iter::once(&target)) {
        if a.0 >= x.len() {
            return Err(DynamicsError::InvalidArgument(format!(
                "agent {a} out of range for a state of length {}",
                x.len()
            )));
        }
    }
    let idx: Vec<usize> = group.iter().map(|a| a.0).collect();
    Ok(joint_rate_raw(&idx, target.0, x))
}

fn joint_rate_raw(group: &[usize], target: usize, x: &[f64]) -> f64 {
    let xi = x[target];
    let mut max_of_min = f64::NEG_INFINITY;
    let mut min_of_max = f64::INFINITY;
    for &j in group {
        let d = x[j] - xi;
        max_of_min = max_of_min.max(d.min(0.0));
        min_of_max = min_of_max.min(d.max(0.0));
    }
    max_of_min + min_of_max
}

/// Diffusive pair rate `weight * (x_source - x_target)`.
pub fn linear_rate(weight: f64, source: AgentId, target: AgentId, x: &[f64]) -> f64 {
    weight * (x[source.0] - x[target.0])
}

/// Applies an aggregator to a rate vector.
pub fn aggregate(agg: &Aggregator, rates: &[f64]) -> Result<f64> {
    let arity_error = |want: usize| {
        DynamicsError::InvalidArgument(format!(
            "aggregator arity mismatch: got {} rates, expected {want}",
            rates.len()
        ))
    };
    match agg {
        Aggregator::WeightedSum(ws) => {
            if ws.len() != rates.len() {
                return Err(arity_error(ws.len()));
            }
            Ok(ws.iter().zip(rates).map(|(w, r)| w * r).sum())
        }
        Aggregator::MinPlusMax => {
            if rates.is_empty() {
                return Err(arity_error(1));
            }
            let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
            let max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(min + max)
        }
        Aggregator::SaturatedSum { weights, sat_level } => {
            if weights.len() != rates.len() {
                return Err(arity_error(weights.len()));
            }
            Ok(weights
                .iter()
                .zip(rates)
                .map(|(w, r)| w * r.clamp(-sat_level, *sat_level))
                .sum())
        }
        Aggregator::CubedSum(ws) => {
            if ws.len() != rates.len() {
                return Err(arity_error(ws.len()));
            }
            let s: f64 = ws.iter().zip(rates).map(|(w, r)| w * r).sum();
            Ok(s.powi(3))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum EvalKind {
    Structured,
    TrimmedMean { trim: usize },
}

/// A network of agents, their interaction rules, and per-agent aggregators.
///
/// The (group -> target) pairs of the rule list, read as minimal influences,
/// define exactly the Petri net used for structural analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDynamics {
    n_agents: usize,
    rules: Vec<InteractionRule>,
    aggregators: Vec<Aggregator>,
    eval: EvalKind,
}

impl NetworkDynamics {
    pub fn new(
        n_agents: usize,
        mut rules: Vec<InteractionRule>,
        aggregators: Vec<Aggregator>,
    ) -> Result<Self> {
        if n_agents == 0 || n_agents > crate::petri::MAX_AGENTS {
            return Err(DynamicsError::InvalidArgument(format!(
                "agent count must be in 1..={}, got {n_agents}",
                crate::petri::MAX_AGENTS
            )));
        }
        let implicit = rules.iter().filter(|r| matches!(r.rate, RateKind::ArcpImplicit)).count();
        if implicit != 0 && implicit != rules.len() {
            return Err(DynamicsError::InvalidArgument(
                "trimmed-mean topology rules cannot be mixed with explicit rate rules".into(),
            ));
        }
        for rule in &rules {
            if rule.group.is_empty() {
                return Err(DynamicsError::InvalidArgument(
                    "influence group must be non-empty".into(),
                ));
            }
            if rule.group.contains(&rule.target) {
                return Err(DynamicsError::InvalidArgument(format!(
                    "agent {} cannot belong to its own influence group",
                    rule.target
                )));
            }
            for a in rule.group.iter().chain(std::iter::once(&rule.target)) {
                if a.0 >= n_agents {
                    return Err(DynamicsError::InvalidArgument(format!(
                        "agent {a} out of range for a network of {n_agents} agents"
                    )));
                }
            }
            if let RateKind::LinearPair { weight } = rule.rate {
                if rule.group.len() != 1 {
                    return Err(DynamicsError::InvalidArgument(
                        "linear rules couple exactly one source agent".into(),
                    ));
                }
                if !weight.is_finite() || weight <= 0.0 {
                    return Err(DynamicsError::InvalidArgument(
                        "linear rule weights must be finite and positive".into(),
                    ));
                }
            }
        }
        rules.sort_by(|a, b| (a.target, &a.group).cmp(&(b.target, &b.group)));
        for w in rules.windows(2) {
            if w[0].target == w[1].target && w[0].group == w[1].group {
                return Err(DynamicsError::InvalidArgument(format!(
                    "duplicate rule for target {} (minimal influences are unique)",
                    w[0].target
                )));
            }
        }
        let eval = if implicit > 0 {
            let trim = Self::validate_trimmed_topology(n_agents, &rules)?;
            EvalKind::TrimmedMean { trim }
        } else {
            EvalKind::Structured
        };
        if aggregators.len() != n_agents {
            return Err(DynamicsError::InvalidArgument(format!(
                "need one aggregator per agent: got {}, expected {n_agents}",
                aggregators.len()
            )));
        }
        for (i, agg) in aggregators.iter().enumerate() {
            let arity = rules.iter().filter(|r| r.target.0 == i).count();
            agg.validate(arity, AgentId(i))?;
        }
        Ok(Self { n_agents, rules, aggregators, eval })
    }

    /// Trimmed-mean rules must form the complete family of (trim+1)-subsets
    /// towards every agent.
    fn validate_trimmed_topology(n_agents: usize, rules: &[InteractionRule]) -> Result<usize> {
        let g = rules[0].group.len();
        if rules.iter().any(|r| r.group.len() != g) {
            return Err(DynamicsError::InvalidArgument(
                "trimmed-mean topology groups must all have the same size".into(),
            ));
        }
        let trim = g - 1;
        ArcpConfig::new(n_agents, trim)
            .map_err(|e| DynamicsError::InvalidArgument(e.to_string()))?;
        let expected: usize = (0..n_agents).map(|_| binomial(n_agents - 1, g)).sum();
        if rules.len() != expected {
            return Err(DynamicsError::InvalidArgument(format!(
                "trimmed-mean topology must contain every {g}-subset toward every agent \
                 ({expected} rules), got {}",
                rules.len()
            )));
        }
        Ok(trim)
    }

    pub(crate) fn trimmed_mean_network(cfg: ArcpConfig) -> Self {
        let n = cfg.n();
        let g = cfg.trim() + 1;
        let mut rules = Vec::new();
        for i in 0..n {
            let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            for combo in combinations(&others, g) {
                rules.push(InteractionRule {
                    group: combo.into_iter().map(AgentId).collect(),
                    target: AgentId(i),
                    rate: RateKind::ArcpImplicit,
                });
            }
        }
        let arity = binomial(n - 1, g);
        let aggregators = vec![Aggregator::unit_sum(arity); n];
        Self::new(n, rules, aggregators).expect("trimmed-mean topology is valid by construction")
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn rules(&self) -> &[InteractionRule] {
        &self.rules
    }

    pub fn aggregators(&self) -> &[Aggregator] {
        &self.aggregators
    }

    pub fn trimmed_mean_trim(&self) -> Option<usize> {
        match self.eval {
            EvalKind::TrimmedMean { trim } => Some(trim),
            EvalKind::Structured => None,
        }
    }

    /// The interaction topology as a Petri net (one transition per rule).
    pub fn petri_net(&self) -> PetriNet {
        let transitions = self
            .rules
            .iter()
            .map(|r| {
                Transition::new(r.group.clone(), r.target)
                    .expect("rule invariants imply a valid transition")
            })
            .collect();
        PetriNet::new(self.n_agents, transitions)
            .expect("rule invariants imply a valid net")
    }

    /// Compiles the vector field for repeated evaluation.
    pub fn assemble_rhs(&self) -> VectorField {
        let mut per_agent: Vec<Vec<CompiledRule>> = vec![Vec::new(); self.n_agents];
        for rule in &self.rules {
            per_agent[rule.target.0].push(CompiledRule {
                group: rule.group.iter().map(|a| a.0).collect(),
                rate: rule.rate.clone(),
            });
        }
        VectorField {
            n_agents: self.n_agents,
            agents: per_agent
                .into_iter()
                .zip(self.aggregators.iter().cloned())
                .map(|(rules, aggregator)| CompiledAgent { rules, aggregator })
                .collect(),
            eval: self.eval.clone(),
        }
    }
}

#[derive(Clone)]
struct CompiledRule {
    group: Vec<usize>,
    rate: RateKind,
}

#[derive(Clone)]
struct CompiledAgent {
    rules: Vec<CompiledRule>,
    aggregator: Aggregator,
}

/// Evaluates per-agent derivatives. Agents without incoming rules have
/// derivative zero; rule rates feed the agent's aggregator in canonical rule
/// order.
#[derive(Clone)]
pub struct VectorField {
    n_agents: usize,
    agents: Vec<CompiledAgent>,
    eval: EvalKind,
}

impl VectorField {
    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn component(&self, i: usize, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n_agents);
        if let EvalKind::TrimmedMean { trim } = self.eval {
            return trimmed_mean(x, trim) - x[i];
        }
        let agent = &self.agents[i];
        if agent.rules.is_empty() {
            return 0.0;
        }
        let rates: Vec<f64> = agent
            .rules
            .iter()
            .map(|r| match &r.rate {
                RateKind::MaxMinJoint | RateKind::ArcpImplicit => joint_rate_raw(&r.group, i, x),
                RateKind::LinearPair { weight } => weight * (x[r.group[0]] - x[i]),
                RateKind::Custom(f) => f(x, &r.group, i),
            })
            .collect();
        aggregate(&agent.aggregator, &rates).expect("arity validated at construction")
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate().take(self.n_agents) {
            *slot = self.component(i, x);
        }
    }

    pub fn eval_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_agents];
        self.eval(x, &mut out);
        out
    }
}

/// Probe grid for the joint-influence test: `points` values per axis, spanning
/// `[lo, hi]` for both the group value and the ambient value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self { lo: -10.0, hi: 10.0, points: 41 }
    }
}

/// A grid point where the strict sign condition failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeViolation {
    pub group_value: f64,
    pub ambient_value: f64,
    pub rate: f64,
}

/// Outcome of a joint-influence probe.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceProbeResult {
    /// Strict sign condition held at every off-diagonal grid point.
    pub holds: bool,
    /// Every proper non-empty subset of the group fails the same probe.
    pub minimal: bool,
    /// Smallest |rate| observed off the diagonal (0 when the probe fails).
    pub margin: f64,
    pub violations: Vec<ProbeViolation>,
}

/// Tests whether `group` jointly influences `target`: the group is placed at a
/// common value, every other agent (including the target) at the ambient
/// value, and the target's full derivative component must have the sign of
/// their difference, strictly, at every off-diagonal grid point.
pub fn probe_joint_influence(
    dynamics: &NetworkDynamics,
    group: &BTreeSet<AgentId>,
    target: AgentId,
    grid: ProbeGrid,
) -> Result<InfluenceProbeResult> {
    if grid.points < 3 || !grid.lo.is_finite() || !grid.hi.is_finite() || grid.lo >= grid.hi {
        return Err(DynamicsError::InvalidArgument(
            "probe grid needs lo < hi and at least 3 points".into(),
        ));
    }
    if group.is_empty() || group.contains(&target) {
        return Err(DynamicsError::InvalidArgument(
            "probe group must be non-empty and exclude the target".into(),
        ));
    }
    for a in group.iter().chain(std::iter::once(&target)) {
        if a.0 >= dynamics.n_agents() {
            return Err(DynamicsError::InvalidArgument(format!("agent {a} out of range")));
        }
    }
    let field = dynamics.assemble_rhs();
    let (holds, margin, violations) = probe_once(&field, group, target, grid);

    let members: Vec<AgentId> = group.iter().copied().collect();
    let mut minimal = true;
    'subsets: for mask in 1..(1u32 << members.len()) - 1 {
        let subset: BTreeSet<AgentId> = members
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .map(|(_, &a)| a)
            .collect();
        let (sub_holds, _, _) = probe_once(&field, &subset, target, grid);
        if sub_holds {
            minimal = false;
            break 'subsets;
        }
    }
    Ok(InfluenceProbeResult { holds, minimal, margin, violations })
}

fn probe_once(
    field: &VectorField,
    group: &BTreeSet<AgentId>,
    target: AgentId,
    grid: ProbeGrid,
) -> (bool, f64, Vec<ProbeViolation>) {
    let n = field.n_agents();
    let step = (grid.hi - grid.lo) / (grid.points - 1) as f64;
    let mut x = vec![0.0; n];
    let mut holds = true;
    let mut margin = f64::INFINITY;
    let mut violations = Vec::new();
    for gi in 0..grid.points {
        let group_value = grid.lo + gi as f64 * step;
        for ai in 0..grid.points {
            let ambient = grid.lo + ai as f64 * step;
            if group_value == ambient {
                continue;
            }
            for v in x.iter_mut() {
                *v = ambient;
            }
            for a in group {
                x[a.0] = group_value;
            }
            let rate = field.component(target.0, &x);
            let signed = (group_value - ambient).signum() * rate;
            if signed > 0.0 {
                margin = margin.min(rate.abs());
            } else {
                holds = false;
                if violations.len() < 16 {
                    violations.push(ProbeViolation { group_value, ambient_value: ambient, rate });
                }
            }
        }
    }
    if !holds || !margin.is_finite() {
        margin = 0.0;
    }
    (holds, margin, violations)
}

/// A state and coordinate pair at which increasing another agent's value
/// decreased some derivative component.
#[derive(Debug, Clone, PartialEq)]
pub struct CooperativityViolation {
    pub state: Vec<f64>,
    pub perturbed: AgentId,
    pub affected: AgentId,
    pub before: f64,
    pub after: f64,
}

impl fmt::Display for CooperativityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "raising agent {} lowered d/dt of agent {} from {} to {}",
            self.perturbed, self.affected, self.before, self.after
        )
    }
}

const COOP_STEP_REL: f64 = 1e-5;
const COOP_TOLERANCE: f64 = 1e-9;

/// Finite-difference cooperativity check at random states: perturbing any
/// agent upward must never decrease another agent's derivative. A failure is
/// re-checked at three nearby states before being reported.
pub fn probe_cooperativity(
    dynamics: &NetworkDynamics,
    samples: usize,
    interval: (f64, f64),
    rng: &mut impl Rng,
) -> std::result::Result<(), CooperativityViolation> {
    let n = dynamics.n_agents();
    let field = dynamics.assemble_rhs();
    for _ in 0..samples.max(1) {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(interval.0..=interval.1)).collect();
        for j in 0..n {
            let h = COOP_STEP_REL * x[j].abs().max(1.0);
            let mut xp = x.clone();
            xp[j] += h;
            for i in 0..n {
                if i == j {
                    continue;
                }
                let before = field.component(i, &x);
                let after = field.component(i, &xp);
                if after < before - COOP_TOLERANCE && !recheck_nearby(&field, &x, i, j, h, rng) {
                    return Err(CooperativityViolation {
                        state: x,
                        perturbed: AgentId(j),
                        affected: AgentId(i),
                        before,
                        after,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Kink-straddling guard: a genuine monotonicity failure persists under small
/// shifts of the base state.
fn recheck_nearby(
    field: &VectorField,
    x: &[f64],
    affected: usize,
    perturbed: usize,
    h: f64,
    rng: &mut impl Rng,
) -> bool {
    (0..3).any(|_| {
        let mut y: Vec<f64> = x.iter().map(|v| v + rng.gen_range(-h..=h)).collect();
        let before = field.component(affected, &y);
        y[perturbed] += h;
        let after = field.component(affected, &y);
        after >= before - COOP_TOLERANCE
    })
}

/// Checks the aggregator contract for a given arity: exact zero at zero,
/// strict sign just off zero in each coordinate, and non-decreasingness in
/// every coordinate at random rate vectors.
pub fn probe_aggregator_contract(
    agg: &Aggregator,
    arity: usize,
    rng: &mut impl Rng,
) -> Result<bool> {
    agg.validate(arity, AgentId(0))?;
    if arity == 0 {
        return Ok(true);
    }
    let zero = vec![0.0; arity];
    if aggregate(agg, &zero)? != 0.0 {
        return Ok(false);
    }
    let eps = 1e-3;
    for k in 0..arity {
        let mut up = zero.clone();
        up[k] = eps;
        let mut down = zero.clone();
        down[k] = -eps;
        if !(aggregate(agg, &up)? > 0.0 && aggregate(agg, &down)? < 0.0) {
            return Ok(false);
        }
    }
    for _ in 0..64 {
        let base: Vec<f64> = (0..arity).map(|_| rng.gen_range(-5.0..=5.0)).collect();
        let v0 = aggregate(agg, &base)?;
        for k in 0..arity {
            let mut bumped = base.clone();
            bumped[k] += 0.25;
            if aggregate(agg, &bumped)? < v0 - 1e-12 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All k-element subsets of `items`, in lexicographic order.
pub fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}
