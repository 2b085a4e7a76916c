//! Runnable scenario definitions: a network, its declared faults with their
//! signals, optional per-channel Byzantine overrides, and integration
//! settings, together with a versioned human-editable text format.

pub mod expr;
pub mod generators;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::dynamics::{Aggregator, InteractionRule, NetworkDynamics, RateKind};
use crate::petri::AgentId;
use crate::simulate::{
    self, ByzantineOverride, FaultSignal, MonitorConfig, OverrideValue, SignalDef, Trajectory,
};

pub use expr::{eval_expression, parse_signal, SignalExpression};
pub use generators::{builtin_network, BuiltinNetwork};

const FORMAT_HEADER: &str = "jointnet-scenario v1";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario file, line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported scenario format header `{found}` (expected `{FORMAT_HEADER}`)")]
    SchemaVersion { found: String },
    #[error("{0}")]
    UnknownGenerator(String),
    #[error("scenario validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
    #[error("network error: {0}")]
    Dynamics(#[from] crate::dynamics::DynamicsError),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

/// One runnable experiment: network + fault set + signals + overrides +
/// initial healthy state + integration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Generator spec when the network came from a named generator; explicit
    /// networks are serialized rule by rule.
    pub generator: Option<String>,
    pub dynamics: NetworkDynamics,
    pub fault_set: BTreeSet<AgentId>,
    pub signals: Vec<FaultSignal>,
    pub overrides: Vec<ByzantineOverride>,
    /// Initial values of the healthy agents, in ascending agent order.
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub step: f64,
    pub epsilon: f64,
}

impl Scenario {
    pub fn healthy_agents(&self) -> Vec<AgentId> {
        (0..self.dynamics.n_agents())
            .map(AgentId)
            .filter(|a| !self.fault_set.contains(a))
            .collect()
    }

    /// Collects every violated invariant at once.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        let n = self.dynamics.n_agents();
        for a in &self.fault_set {
            if a.0 >= n {
                issues.push(format!("fault agent {a} out of range (network has {n} agents)"));
            }
        }
        if self.fault_set.len() >= n {
            issues.push("at least one agent must stay healthy".into());
        }
        let signal_agents: BTreeSet<AgentId> = self.signals.iter().map(|s| s.agent).collect();
        for a in &self.fault_set {
            if !signal_agents.contains(a) {
                issues.push(format!("fault agent {a} has no signal"));
            }
        }
        for a in &signal_agents {
            if !self.fault_set.contains(a) {
                issues.push(format!("signal given for agent {a}, which is not in the fault set"));
            }
        }
        if signal_agents.len() != self.signals.len() {
            issues.push("duplicate signal definitions".into());
        }
        let healthy = n - self.fault_set.iter().filter(|a| a.0 < n).count();
        if self.x0.len() != healthy {
            issues.push(format!(
                "x0 has {} entries but there are {healthy} healthy agents",
                self.x0.len()
            ));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            issues.push("x0 entries must be finite".into());
        }
        for o in &self.overrides {
            if !self.fault_set.contains(&o.sender) {
                issues.push(format!("override sender {} is not a fault agent", o.sender));
            }
            if o.sender == o.receiver {
                issues.push(format!("override for agent {} targets itself", o.sender));
            }
            if o.receiver.0 >= n {
                issues.push(format!("override receiver {} out of range", o.receiver));
            }
        }
        if self.step <= 0.0 || !self.step.is_finite() {
            issues.push("step must be positive".into());
        }
        if self.horizon < self.step || !self.horizon.is_finite() {
            issues.push("horizon must be at least one step".into());
        }
        if self.epsilon <= 0.0 || !self.epsilon.is_finite() {
            issues.push("epsilon must be positive".into());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Validation(issues))
        }
    }

    /// Integrates the scenario with its own settings.
    pub fn run(&self) -> simulate::Result<Trajectory> {
        self.run_to(self.horizon)
    }

    /// Integrates up to a custom horizon (for shortened checks).
    pub fn run_to(&self, horizon: f64) -> simulate::Result<Trajectory> {
        simulate::integrate_with(
            &self.dynamics,
            &self.fault_set,
            &self.signals,
            &self.overrides,
            &self.x0,
            horizon,
            self.step,
            MonitorConfig {
                tolerance: simulate::ENVELOPE_TOLERANCE_FACTOR * self.step,
                epsilon: self.epsilon,
            },
        )
    }

    /// Renders the scenario in the versioned text format.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{FORMAT_HEADER}");
        let _ = writeln!(s, "name {}", self.name);
        let _ = writeln!(s);
        let _ = writeln!(s, "[network]");
        match &self.generator {
            Some(spec) => {
                let _ = writeln!(s, "generator {spec}");
            }
            None => {
                let _ = writeln!(s, "agents {}", self.dynamics.n_agents());
                for (i, agg) in self.dynamics.aggregators().iter().enumerate() {
                    let _ = writeln!(s, "aggregator {i} {}", render_aggregator(agg));
                }
                for rule in self.dynamics.rules() {
                    let _ = writeln!(s, "{}", render_rule(rule));
                }
            }
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "[faults]");
        if !self.fault_set.is_empty() {
            let ids: Vec<String> = self.fault_set.iter().map(|a| a.to_string()).collect();
            let _ = writeln!(s, "agents {}", ids.join(" "));
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "[signals]");
        for sig in &self.signals {
            let def = match &sig.def {
                SignalDef::Constant(v) => format!("constant {v}"),
                SignalDef::Expression(e) => format!("expr {e}"),
                SignalDef::CubicDrift => "cubic_drift".into(),
                SignalDef::RampedCosine => "ramped_cosine".into(),
            };
            let _ = writeln!(s, "{} {def}", sig.agent);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "[overrides]");
        for o in &self.overrides {
            let value = match &o.value {
                OverrideValue::Offset(v) => format!("offset {v}"),
                OverrideValue::Absolute(e) => format!("absolute {e}"),
            };
            let _ = writeln!(s, "{} -> {} {value}", o.sender, o.receiver);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "[integration]");
        let xs: Vec<String> = self.x0.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "x0 {}", xs.join(" "));
        let _ = writeln!(s, "horizon {}", self.horizon);
        let _ = writeln!(s, "step {}", self.step);
        let _ = writeln!(s, "epsilon {}", self.epsilon);
        s
    }
}

fn render_aggregator(agg: &Aggregator) -> String {
    let join = |ws: &[f64]| ws.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" ");
    match agg {
        Aggregator::WeightedSum(ws) => format!("weighted_sum {}", join(ws)).trim_end().to_string(),
        Aggregator::MinPlusMax => "min_plus_max".into(),
        Aggregator::SaturatedSum { weights, sat_level } => {
            format!("saturated_sum {sat_level} {}", join(weights)).trim_end().to_string()
        }
        Aggregator::CubedSum(ws) => format!("cubed_sum {}", join(ws)).trim_end().to_string(),
    }
}

fn render_rule(rule: &InteractionRule) -> String {
    let group: Vec<String> = rule.group.iter().map(|a| a.to_string()).collect();
    match &rule.rate {
        RateKind::MaxMinJoint => format!("rule joint {} -> {}", group.join(","), rule.target),
        RateKind::LinearPair { weight } => {
            format!("rule linear {} -> {} weight {weight}", group.join(","), rule.target)
        }
        RateKind::ArcpImplicit => format!("rule trimmed {} -> {}", group.join(","), rule.target),
        RateKind::Custom(_) => format!("rule custom {} -> {}", group.join(","), rule.target),
    }
}

/// Saves a scenario in the text format. Networks with custom rate handles
/// cannot be serialized.
pub fn save_scenario(sc: &Scenario, path: &Path) -> Result<()> {
    if sc.generator.is_none()
        && sc.dynamics.rules().iter().any(|r| matches!(r.rate, RateKind::Custom(_)))
    {
        return Err(ScenarioError::Validation(vec![
            "networks with custom rate handles cannot be saved".into(),
        ]));
    }
    sc.validate()?;
    std::fs::write(path, sc.render())?;
    Ok(())
}

/// Loads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

#[derive(Default)]
struct NetworkDraft {
    generator: Option<String>,
    agents: Option<usize>,
    aggregators: Vec<(usize, Aggregator)>,
    rules: Vec<InteractionRule>,
}

/// Parses the text format; scenario-level invariants are validated after
/// parsing and reported all at once.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, raw)) => {
                let line = strip_comment(raw);
                if line.is_empty() {
                    continue;
                }
                break line.to_string();
            }
            None => return Err(ScenarioError::SchemaVersion { found: "<empty file>".into() }),
        }
    };
    if header != FORMAT_HEADER {
        return Err(ScenarioError::SchemaVersion { found: header });
    }

    let mut name = String::new();
    let mut section = String::new();
    let mut draft = NetworkDraft::default();
    let mut fault_set: BTreeSet<AgentId> = BTreeSet::new();
    let mut signals: Vec<FaultSignal> = Vec::new();
    let mut overrides: Vec<ByzantineOverride> = Vec::new();
    let mut x0: Vec<f64> = Vec::new();
    let mut horizon = simulate::DEFAULT_HORIZON;
    let mut step = simulate::DEFAULT_STEP;
    let mut epsilon = simulate::DEFAULT_EPSILON;

    for (idx, raw) in lines {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fail = |message: String| ScenarioError::Parse { line: lineno, message };
        if let Some(rest) = line.strip_prefix('[') {
            section = rest
                .strip_suffix(']')
                .ok_or_else(|| fail("unterminated section header".into()))?
                .trim()
                .to_string();
            continue;
        }
        if section.is_empty() {
            if let Some(rest) = line.strip_prefix("name") {
                name = rest.trim().to_string();
                continue;
            }
            return Err(fail(format!("unexpected line `{line}` before any section")));
        }
        match section.as_str() {
            "network" => parse_network_line(line, lineno, &mut draft)?,
            "faults" => {
                let rest = line
                    .strip_prefix("agents")
                    .ok_or_else(|| fail("fault lines look like `agents 3 4`".into()))?;
                for part in rest.split_whitespace() {
                    let id = part
                        .parse::<usize>()
                        .map_err(|_| fail(format!("bad agent id `{part}`")))?;
                    fault_set.insert(AgentId(id));
                }
            }
            "signals" => signals.push(parse_signal_line(line, lineno)?),
            "overrides" => overrides.push(parse_override_line(line, lineno)?),
            "integration" => {
                let (key, rest) = line
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| fail(format!("bad integration line `{line}`")))?;
                match key {
                    "x0" => {
                        x0 = rest
                            .split_whitespace()
                            .map(|p| {
                                p.parse::<f64>().map_err(|_| fail(format!("bad value `{p}` in x0")))
                            })
                            .collect::<Result<_>>()?;
                    }
                    "horizon" => horizon = parse_number(rest, lineno)?,
                    "step" => step = parse_number(rest, lineno)?,
                    "epsilon" => epsilon = parse_number(rest, lineno)?,
                    other => return Err(fail(format!("unknown integration key `{other}`"))),
                }
            }
            other => return Err(fail(format!("unknown section `{other}`"))),
        }
    }

    let (generator, dynamics) = match draft.generator {
        Some(spec) => (Some(spec.clone()), builtin_network(&spec)?),
        None => {
            let n = draft.agents.ok_or(ScenarioError::Parse {
                line: 0,
                message: "network section needs `generator <spec>` or `agents <n>`".into(),
            })?;
            let mut aggregators = vec![Aggregator::WeightedSum(Vec::new()); n];
            for (i, agg) in draft.aggregators {
                if i >= n {
                    return Err(ScenarioError::Parse {
                        line: 0,
                        message: format!("aggregator index {i} out of range"),
                    });
                }
                aggregators[i] = agg;
            }
            // default aggregators: unit weights matching each agent's rule count
            for (i, agg) in aggregators.iter_mut().enumerate() {
                if matches!(agg, Aggregator::WeightedSum(ws) if ws.is_empty()) {
                    let arity = draft.rules.iter().filter(|r| r.target.0 == i).count();
                    *agg = Aggregator::unit_sum(arity);
                }
            }
            (None, NetworkDynamics::new(n, draft.rules, aggregators)?)
        }
    };

    let scenario = Scenario {
        name,
        generator,
        dynamics,
        fault_set,
        signals,
        overrides,
        x0,
        horizon,
        step,
        epsilon,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn strip_comment(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

fn parse_number(text: &str, lineno: usize) -> Result<f64> {
    text.trim().parse::<f64>().map_err(|_| ScenarioError::Parse {
        line: lineno,
        message: format!("bad number `{}`", text.trim()),
    })
}

fn parse_network_line(line: &str, lineno: usize, draft: &mut NetworkDraft) -> Result<()> {
    let fail = |message: String| ScenarioError::Parse { line: lineno, message };
    if let Some(rest) = line.strip_prefix("generator") {
        draft.generator = Some(rest.trim().to_string());
        return Ok(());
    }
    if let Some(rest) = line.strip_prefix("agents") {
        draft.agents = Some(
            rest.trim()
                .parse::<usize>()
                .map_err(|_| fail(format!("bad agent count `{}`", rest.trim())))?,
        );
        return Ok(());
    }
    if let Some(rest) = line.strip_prefix("aggregator") {
        let mut parts = rest.split_whitespace();
        let idx = parts
            .next()
            .and_then(|p| p.parse::<usize>().ok())
            .ok_or_else(|| fail("aggregator lines look like `aggregator <i> <kind> ...`".into()))?;
        let kind = parts.next().ok_or_else(|| fail("missing aggregator kind".into()))?;
        let rest_vals: Vec<f64> = parts
            .map(|p| p.parse::<f64>().map_err(|_| fail(format!("bad weight `{p}`"))))
            .collect::<Result<_>>()?;
        let agg = match kind {
            "weighted_sum" => Aggregator::WeightedSum(rest_vals),
            "min_plus_max" => Aggregator::MinPlusMax,
            "cubed_sum" => Aggregator::CubedSum(rest_vals),
            "saturated_sum" => {
                let (level, weights) = rest_vals
                    .split_first()
                    .ok_or_else(|| fail("saturated_sum needs a level".into()))?;
                Aggregator::SaturatedSum { weights: weights.to_vec(), sat_level: *level }
            }
            other => return Err(fail(format!("unknown aggregator kind `{other}`"))),
        };
        draft.aggregators.push((idx, agg));
        return Ok(());
    }
    if let Some(rest) = line.strip_prefix("rule") {
        let rest = rest.trim();
        let (kind, rest) = rest
            .split_once(char::is_whitespace)
            .ok_or_else(|| fail("rule lines look like `rule joint 1,2 -> 0`".into()))?;
        let (group_text, rhs) =
            rest.split_once("->").ok_or_else(|| fail("rule is missing `->`".into()))?;
        let group: BTreeSet<AgentId> = group_text
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map(AgentId)
                    .map_err(|_| fail(format!("bad agent id `{}`", p.trim())))
            })
            .collect::<Result<_>>()?;
        let mut rhs_parts = rhs.split_whitespace();
        let target = rhs_parts
            .next()
            .and_then(|p| p.parse::<usize>().ok())
            .map(AgentId)
            .ok_or_else(|| fail("rule is missing its target agent".into()))?;
        let rate = match kind {
            "joint" => RateKind::MaxMinJoint,
            "trimmed" => RateKind::ArcpImplicit,
            "linear" => {
                match (rhs_parts.next(), rhs_parts.next()) {
                    (Some("weight"), Some(w)) => RateKind::LinearPair {
                        weight: w
                            .parse::<f64>()
                            .map_err(|_| fail(format!("bad weight `{w}`")))?,
                    },
                    (None, _) => RateKind::LinearPair { weight: 1.0 },
                    _ => return Err(fail("linear rules end with `weight <w>`".into())),
                }
            }
            other => return Err(fail(format!("unknown rule kind `{other}`"))),
        };
        draft.rules.push(InteractionRule { group, target, rate });
        return Ok(());
    }
    Err(fail(format!("unknown network line `{line}`")))
}

fn parse_signal_line(line: &str, lineno: usize) -> Result<FaultSignal> {
    let fail = |message: String| ScenarioError::Parse { line: lineno, message };
    let (agent_text, rest) = line
        .split_once(char::is_whitespace)
        .ok_or_else(|| fail("signal lines look like `<agent> constant 0`".into()))?;
    let agent = agent_text
        .parse::<usize>()
        .map(AgentId)
        .map_err(|_| fail(format!("bad agent id `{agent_text}`")))?;
    let rest = rest.trim();
    let def = if rest == "cubic_drift" {
        SignalDef::CubicDrift
    } else if rest == "ramped_cosine" {
        SignalDef::RampedCosine
    } else if let Some(v) = rest.strip_prefix("constant") {
        SignalDef::Constant(parse_number(v, lineno)?)
    } else if let Some(e) = rest.strip_prefix("expr") {
        SignalDef::Expression(
            expr::parse_signal(e.trim()).map_err(|e| fail(format!("bad expression: {e}")))?,
        )
    } else {
        return Err(fail(format!("unknown signal definition `{rest}`")));
    };
    Ok(FaultSignal { agent, def })
}

fn parse_override_line(line: &str, lineno: usize) -> Result<ByzantineOverride> {
    let fail = |message: String| ScenarioError::Parse { line: lineno, message };
    let (sender_text, rest) = line
        .split_once("->")
        .ok_or_else(|| fail("override lines look like `<sender> -> <receiver> offset 2`".into()))?;
    let sender = sender_text
        .trim()
        .parse::<usize>()
        .map(AgentId)
        .map_err(|_| fail(format!("bad agent id `{}`", sender_text.trim())))?;
    let mut parts = rest.trim().splitn(2, char::is_whitespace);
    let receiver = parts
        .next()
        .and_then(|p| p.parse::<usize>().ok())
        .map(AgentId)
        .ok_or_else(|| fail("override is missing its receiver".into()))?;
    let rest = parts.next().unwrap_or("").trim();
    let value = if let Some(v) = rest.strip_prefix("offset") {
        OverrideValue::Offset(parse_number(v, lineno)?)
    } else if let Some(e) = rest.strip_prefix("absolute") {
        OverrideValue::Absolute(
            expr::parse_signal(e.trim()).map_err(|e| fail(format!("bad expression: {e}")))?,
        )
    } else {
        return Err(fail(format!("unknown override value `{rest}`")));
    };
    Ok(ByzantineOverride { sender, receiver, value })
}

/// Receiver-dependent coupling weight used by the `linear_demo` scenario.
/// Uniform weights make every healthy pair contract identically, which hides
/// the disruption; here agent 0 tracks its inputs tightly while agent 2 lags,
/// so drifting inputs hold the healthy agents apart.
pub fn linear_demo_weight(receiver: usize, source: usize) -> f64 {
    let scale = [3.0, 1.0, 0.3, 1.0, 1.0][receiver];
    scale * (1.0 + 0.4 * ((1 + 3 * receiver + 7 * source) as f64).sin())
}

/// Bundled demonstration scenarios (also shipped as files under
/// `scenarios/`).
pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    let drifting_signals = || {
        vec![
            FaultSignal { agent: AgentId(3), def: SignalDef::CubicDrift },
            FaultSignal { agent: AgentId(4), def: SignalDef::RampedCosine },
        ]
    };
    let sc = match name {
        // Two drifting faults against the joint-interaction network: the three
        // healthy agents still agree inside their initial hull.
        "joint_demo" => Scenario {
            name: "joint_demo".into(),
            generator: Some("alltoall5_joint".into()),
            dynamics: builtin_network("alltoall5_joint")?,
            fault_set: [AgentId(3), AgentId(4)].into_iter().collect(),
            signals: drifting_signals(),
            overrides: Vec::new(),
            x0: vec![35.0, 10.0, 5.0],
            horizon: simulate::DEFAULT_HORIZON,
            step: simulate::DEFAULT_STEP,
            epsilon: simulate::DEFAULT_EPSILON,
        },
        // The same faults against diffusive coupling with heterogeneous
        // weights: the healthy agents are pulled apart persistently.
        "linear_demo" => {
            let n = 5usize;
            let mut rules = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        rules.push(InteractionRule::linear(
                            AgentId(j),
                            AgentId(i),
                            linear_demo_weight(i, j),
                        ));
                    }
                }
            }
            let dynamics =
                NetworkDynamics::new(n, rules, vec![Aggregator::unit_sum(n - 1); n])?;
            Scenario {
                name: "linear_demo".into(),
                generator: None,
                dynamics,
                fault_set: [AgentId(3), AgentId(4)].into_iter().collect(),
                signals: drifting_signals(),
                overrides: Vec::new(),
                x0: vec![35.0, 10.0, 5.0],
                horizon: simulate::DEFAULT_HORIZON,
                step: simulate::DEFAULT_STEP,
                epsilon: simulate::DEFAULT_EPSILON,
            }
        }
        // Diagonal fault pair held at zero; the initial state sits exactly on
        // the frozen configuration, so every healthy agent is stationary.
        "grid_freeze" => Scenario {
            name: "grid_freeze".into(),
            generator: Some("grid3x3".into()),
            dynamics: builtin_network("grid3x3")?,
            fault_set: [AgentId(4), AgentId(8)].into_iter().collect(),
            signals: vec![
                FaultSignal::constant(AgentId(4), 0.0),
                FaultSignal::constant(AgentId(8), 0.0),
            ],
            overrides: Vec::new(),
            // healthy agents 0,1,2,3,5,6,7: corner block at 1, (2,3) at 0,
            // (1,3) and (2,1) at the 0.5 balance point
            x0: vec![1.0, 1.0, 0.5, 0.5, 0.0, 1.0, 1.0],
            horizon: simulate::DEFAULT_HORIZON,
            step: simulate::DEFAULT_STEP,
            epsilon: simulate::DEFAULT_EPSILON,
        },
        // Diagonal fault pair oscillating above a negatively initialized
        // block: consensus stays broken.
        "grid_two_fault" => Scenario {
            name: "grid_two_fault".into(),
            generator: Some("grid3x3".into()),
            dynamics: builtin_network("grid3x3")?,
            fault_set: [AgentId(4), AgentId(8)].into_iter().collect(),
            signals: vec![
                FaultSignal {
                    agent: AgentId(4),
                    def: SignalDef::Expression(expr::parse_signal("2 + sin(3*t)/2").unwrap()),
                },
                FaultSignal {
                    agent: AgentId(8),
                    def: SignalDef::Expression(expr::parse_signal("2 + cos(2*t)/2").unwrap()),
                },
            ],
            overrides: Vec::new(),
            x0: vec![-1.0, -1.0, -0.3, -0.3, 0.0, -1.0, -1.0],
            horizon: simulate::DEFAULT_HORIZON,
            step: simulate::DEFAULT_STEP,
            epsilon: simulate::DEFAULT_EPSILON,
        },
        // A single lying agent: it holds 0 but reports +2 to two neighbours
        // and -2 to the other two.
        "grid_byzantine" => Scenario {
            name: "grid_byzantine".into(),
            generator: Some("grid3x3".into()),
            dynamics: builtin_network("grid3x3")?,
            fault_set: [AgentId(4)].into_iter().collect(),
            signals: vec![FaultSignal::constant(AgentId(4), 0.0)],
            overrides: simulate::byzantine_demo_overrides(2.0, -2.0),
            x0: vec![1.0, 1.0, 0.0, 1.0, -1.0, 0.0, -1.0, -1.0],
            horizon: simulate::DEFAULT_HORIZON,
            step: simulate::DEFAULT_STEP,
            epsilon: simulate::DEFAULT_EPSILON,
        },
        other => {
            return Err(ScenarioError::UnknownGenerator(format!(
                "unknown bundled scenario `{other}`"
            )))
        }
    };
    sc.validate()?;
    Ok(sc)
}

pub const BUILTIN_SCENARIOS: [&str; 5] =
    ["joint_demo", "linear_demo", "grid_freeze", "grid_two_fault", "grid_byzantine"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scenarios_validate_and_round_trip() {
        for name in BUILTIN_SCENARIOS {
            let sc = builtin_scenario(name).unwrap();
            let text = sc.render();
            let parsed = parse_scenario(&text).unwrap();
            assert_eq!(sc, parsed, "round trip changed scenario {name}");
            // render is a fixed point
            assert_eq!(text, parsed.render());
        }
    }

    #[test]
    fn missing_signal_is_reported_with_the_agent() {
        let mut sc = builtin_scenario("joint_demo").unwrap();
        sc.signals.retain(|s| s.agent != AgentId(4));
        match sc.validate() {
            Err(ScenarioError::Validation(issues)) => {
                assert!(issues.iter().any(|m| m.contains("agent 4")), "{issues:?}");
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn validation_collects_all_issues_at_once() {
        let mut sc = builtin_scenario("joint_demo").unwrap();
        sc.signals.clear();
        sc.x0 = vec![1.0];
        sc.step = -1.0;
        match sc.validate() {
            Err(ScenarioError::Validation(issues)) => {
                assert!(issues.len() >= 4, "expected several issues, got {issues:?}");
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn byzantine_scenario_has_four_overrides() {
        let sc = builtin_scenario("grid_byzantine").unwrap();
        assert_eq!(sc.overrides.len(), 4);
        let text = sc.render();
        let parsed = parse_scenario(&text).unwrap();
        assert_eq!(parsed.overrides.len(), 4);
    }

    #[test]
    fn version_header_is_enforced() {
        assert!(matches!(
            parse_scenario("jointnet-scenario v99\nname x\n"),
            Err(ScenarioError::SchemaVersion { .. })
        ));
        assert!(matches!(parse_scenario(""), Err(ScenarioError::SchemaVersion { .. })));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "jointnet-scenario v1\nname x\n\n[network]\ngenerator chain3\n\n[faults]\nagents zz\n";
        match parse_scenario(text) {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn explicit_network_round_trip() {
        let sc = builtin_scenario("linear_demo").unwrap();
        assert!(sc.generator.is_none());
        let text = sc.render();
        let parsed = parse_scenario(&text).unwrap();
        assert_eq!(sc.dynamics, parsed.dynamics);
    }

    #[test]
    fn save_and_load_through_a_file() {
        let dir = std::env::temp_dir().join("jointnet-scenario-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("demo.scn");
        let sc = builtin_scenario("grid_freeze").unwrap();
        save_scenario(&sc, &path).unwrap();
        let loaded = load_scenario(&path).unwrap();
        assert_eq!(sc, loaded);
        std::fs::remove_file(&path).ok();
    }
}
