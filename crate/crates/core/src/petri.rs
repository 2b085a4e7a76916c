//! Petri-net model of a joint-agent interaction topology and the structural
//! invariants used to decide robust consensuability: siphons, controlled
//! siphons, minimal switches, and the pairwise-certificate check.
//!
//! Places are agents; every transition models one minimal joint influence
//! `J -> i` and therefore has exactly one output place.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Nets are manipulated as `u64` bitmasks internally.
pub const MAX_AGENTS: usize = 64;

/// Place-count bound for the exhaustive consensuability oracle.
pub const ORACLE_MAX_PLACES: usize = 16;

/// Fault-count bound for the exhaustive oracle (switch families are kept as
/// one bit per fault subset).
pub const ORACLE_MAX_FAULTS: usize = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PetriError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),
    #[error("net text, line {line}: {message}")]
    ParseText { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, PetriError>;

/// Index of one agent (a place of the net), stable across all modules for a
/// given scenario.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of a transition within its net's canonical transition list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransitionId(pub usize);

/// One minimal joint influence: the input group acts on a single output agent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Transition {
    inputs: BTreeSet<AgentId>,
    output: AgentId,
}

impl Transition {
    pub fn new(inputs: BTreeSet<AgentId>, output: AgentId) -> Result<Self> {
        if inputs.is_empty() {
            return Err(PetriError::InvalidArgument(
                "transition must have a non-empty input set".into(),
            ));
        }
        if inputs.contains(&output) {
            return Err(PetriError::InvalidArgument(format!(
                "transition output {output} must not be one of its inputs"
            )));
        }
        Ok(Self { inputs, output })
    }

    pub fn inputs(&self) -> &BTreeSet<AgentId> {
        &self.inputs
    }

    pub fn output(&self) -> AgentId {
        self.output
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.inputs.iter().map(|a| a.to_string()).collect();
        write!(f, "[{}] -> {}", ids.join(","), self.output)
    }
}

/// Bipartite structure of agent-places and joint-influence transitions.
///
/// Construction sorts transitions into canonical order and rejects duplicates:
/// a duplicate (inputs, output) pair cannot arise from distinct minimal
/// influences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetriNet {
    n_agents: usize,
    transitions: Vec<Transition>,
}

impl PetriNet {
    pub fn new(n_agents: usize, mut transitions: Vec<Transition>) -> Result<Self> {
        if n_agents == 0 {
            return Err(PetriError::InvalidArgument("net must have at least one agent".into()));
        }
        if n_agents > MAX_AGENTS {
            return Err(PetriError::UnsupportedSize(format!(
                "at most {MAX_AGENTS} agents are supported, got {n_agents}"
            )));
        }
        for t in &transitions {
            for a in t.inputs().iter().chain(std::iter::once(&t.output)) {
                if a.0 >= n_agents {
                    return Err(PetriError::InvalidArgument(format!(
                        "agent {a} out of range for a net with {n_agents} agents"
                    )));
                }
            }
        }
        transitions.sort();
        for w in transitions.windows(2) {
            if w[0] == w[1] {
                return Err(PetriError::InvalidArgument(format!(
                    "duplicate transition {}",
                    w[0]
                )));
            }
        }
        Ok(Self { n_agents, transitions })
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, id: TransitionId) -> Option<&Transition> {
        self.transitions.get(id.0)
    }

    pub fn all_places(&self) -> BTreeSet<AgentId> {
        (0..self.n_agents).map(AgentId).collect()
    }

    fn check_places(&self, places: &BTreeSet<AgentId>) -> Result<()> {
        if let Some(a) = places.iter().find(|a| a.0 >= self.n_agents) {
            return Err(PetriError::InvalidArgument(format!(
                "agent {a} out of range for a net with {} agents",
                self.n_agents
            )));
        }
        Ok(())
    }

    fn mask_of(&self, places: &BTreeSet<AgentId>) -> Result<u64> {
        self.check_places(places)?;
        Ok(places.iter().fold(0u64, |m, a| m | (1u64 << a.0)))
    }

    fn inputs_mask(&self, t: &Transition) -> u64 {
        t.inputs.iter().fold(0u64, |m, a| m | (1u64 << a.0))
    }

    /// Transitions whose output place lies in `places`.
    pub fn input_transitions(&self, places: &BTreeSet<AgentId>) -> Result<BTreeSet<TransitionId>> {
        let mask = self.mask_of(places)?;
        Ok(self
            .transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| mask & (1u64 << t.output.0) != 0)
            .map(|(i, _)| TransitionId(i))
            .collect())
    }

    /// Transitions with at least one input place in `places`.
    pub fn output_transitions(&self, places: &BTreeSet<AgentId>) -> Result<BTreeSet<TransitionId>> {
        let mask = self.mask_of(places)?;
        Ok(self
            .transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| self.inputs_mask(t) & mask != 0)
            .map(|(i, _)| TransitionId(i))
            .collect())
    }

    /// A non-empty place set is a siphon when each of its input transitions is
    /// also one of its output transitions.
    pub fn is_siphon(&self, places: &BTreeSet<AgentId>) -> Result<bool> {
        if places.is_empty() {
            return Err(PetriError::InvalidArgument("siphons are non-empty by definition".into()));
        }
        let mask = self.mask_of(places)?;
        Ok(self.is_controlled_siphon_masks(mask, 0))
    }

    /// Controlled variant: inputs may also be covered by output transitions of
    /// the switch set. With an empty switch this is exactly `is_siphon`.
    pub fn is_controlled_siphon(
        &self,
        places: &BTreeSet<AgentId>,
        switch: &BTreeSet<AgentId>,
    ) -> Result<bool> {
        if places.is_empty() {
            return Err(PetriError::InvalidArgument("siphons are non-empty by definition".into()));
        }
        let p = self.mask_of(places)?;
        let s = self.mask_of(switch)?;
        if p & s != 0 {
            return Err(PetriError::InvalidArgument(
                "place set and switch must be disjoint".into(),
            ));
        }
        Ok(self.is_controlled_siphon_masks(p, s))
    }

    fn is_controlled_siphon_masks(&self, places: u64, switch: u64) -> bool {
        let cover = places | switch;
        self.transitions
            .iter()
            .all(|t| places & (1u64 << t.output.0) == 0 || self.inputs_mask(t) & cover != 0)
    }

    /// All inclusion-minimal switches `W <= pool` making `places` a
    /// W-controlled siphon, in canonical order. Returns `[{}]` when `places`
    /// is already a siphon and `[]` when no subset of the pool works.
    pub fn minimal_switches(
        &self,
        places: &BTreeSet<AgentId>,
        pool: &BTreeSet<AgentId>,
    ) -> Result<Vec<BTreeSet<AgentId>>> {
        if places.is_empty() {
            return Err(PetriError::InvalidArgument("siphons are non-empty by definition".into()));
        }
        let p = self.mask_of(places)?;
        let pool_mask = self.mask_of(pool)?;
        if p & pool_mask != 0 {
            return Err(PetriError::InvalidArgument(
                "place set and fault pool must be disjoint".into(),
            ));
        }
        Ok(self
            .minimal_switch_masks(p, pool_mask)
            .into_iter()
            .map(set_of_mask)
            .collect())
    }

    /// Hitting sets over the uncovered input transitions: each uncovered
    /// transition must receive an input from the switch.
    fn minimal_switch_masks(&self, places: u64, pool: u64) -> Vec<u64> {
        let mut cover_sets: Vec<u64> = Vec::new();
        for t in &self.transitions {
            if places & (1u64 << t.output.0) == 0 {
                continue;
            }
            let ins = self.inputs_mask(t);
            if ins & places != 0 {
                continue; // covered by the set itself
            }
            let candidates = ins & pool;
            if candidates == 0 {
                return Vec::new(); // this transition can never be covered
            }
            cover_sets.push(candidates);
        }
        if cover_sets.is_empty() {
            return vec![0];
        }
        // Deduplicate identical requirements before branching.
        cover_sets.sort_unstable();
        cover_sets.dedup();
        let mut found: Vec<u64> = Vec::new();
        let mut seen: HashSet<u64> = HashSet::new();
        hit(&cover_sets, 0, &mut seen, &mut found);
        keep_minimal(&mut found);
        sort_masks(&mut found);
        found
    }

    /// Certificates `(S, W)` with `S` inside the healthy complement of the
    /// pool, `S` minimal among W'-controlled siphons for some `W' <= pool`,
    /// and `W` a minimal switch of `S` within that `W'`.
    pub fn enumerate_minimal_controlled_siphons(
        &self,
        fault_pool: &BTreeSet<AgentId>,
    ) -> Result<Vec<ControlledSiphonCertificate>> {
        let pool = self.mask_of(fault_pool)?;
        let healthy = self.full_mask() & !pool;
        if healthy == 0 {
            return Err(PetriError::InvalidArgument(
                "fault pool must leave at least one healthy place".into(),
            ));
        }
        let mut out: Vec<ControlledSiphonCertificate> = Vec::new();
        let mut dedup: BTreeSet<(u64, u64)> = BTreeSet::new();
        for switch in submasks(pool) {
            for s in self.minimal_controlled_siphon_masks(healthy, switch)? {
                for w in self.minimal_switch_masks(s, switch) {
                    if dedup.insert((s, w)) {
                        out.push(self.certificate_from_masks(s, w));
                    }
                }
            }
        }
        out.sort_by(|a, b| (&a.places, &a.switch).cmp(&(&b.places, &b.switch)));
        Ok(out)
    }

    /// Convenience: the minimal siphons of the net (empty-switch certificates
    /// over all places).
    pub fn minimal_siphons(&self) -> Result<Vec<BTreeSet<AgentId>>> {
        Ok(self
            .enumerate_minimal_controlled_siphons(&BTreeSet::new())?
            .into_iter()
            .map(|c| c.places)
            .collect())
    }

    /// Subset-growth enumeration of the inclusion-minimal switch-controlled
    /// siphons within `healthy`. From each seed place, the currently uncovered
    /// input transition with the fewest completion candidates is selected and
    /// the search branches on which of its healthy inputs to absorb.
    fn minimal_controlled_siphon_masks(&self, healthy: u64, switch: u64) -> Result<Vec<u64>> {
        let outputs: Vec<u64> = self.transitions.iter().map(|t| 1u64 << t.output.0).collect();
        let inputs: Vec<u64> = self.transitions.iter().map(|t| self.inputs_mask(t)).collect();

        struct Search<'a> {
            outputs: &'a [u64],
            inputs: &'a [u64],
            healthy: u64,
            switch: u64,
            visited: HashSet<u64>,
            found: Vec<u64>,
        }

        impl Search<'_> {
            fn grow(&mut self, set: u64) -> Result<()> {
                if !self.visited.insert(set) {
                    return Ok(());
                }
                if self.visited.len() > 4_000_000 {
                    return Err(PetriError::UnsupportedSize(
                        "siphon enumeration exceeded its search budget".into(),
                    ));
                }
                if self.found.iter().any(|&f| f | set == set) {
                    return Ok(()); // already contains a recorded siphon
                }
                let cover = set | self.switch;
                let mut branch: Option<u64> = None;
                for (out, ins) in self.outputs.iter().zip(self.inputs) {
                    if out & set == 0 || ins & cover != 0 {
                        continue;
                    }
                    let candidates = ins & self.healthy & !set;
                    if candidates == 0 {
                        return Ok(()); // dead end: transition cannot be covered
                    }
                    match branch {
                        Some(b) if b.count_ones() <= candidates.count_ones() => {}
                        _ => branch = Some(candidates),
                    }
                }
                match branch {
                    None => self.found.push(set),
                    Some(candidates) => {
                        for q in bits(candidates) {
                            self.grow(set | (1u64 << q))?;
                        }
                    }
                }
                Ok(())
            }
        }

        let mut search = Search {
            outputs: &outputs,
            inputs: &inputs,
            healthy,
            switch,
            visited: HashSet::new(),
            found: Vec::new(),
        };
        for p in bits(healthy) {
            search.grow(1u64 << p)?;
        }
        let mut found = search.found;
        keep_minimal(&mut found);
        sort_masks(&mut found);
        Ok(found)
    }

    fn certificate_from_masks(&self, places: u64, switch: u64) -> ControlledSiphonCertificate {
        let mut witnesses = Vec::new();
        for f in bits(switch) {
            let fbit = 1u64 << f;
            let without = (places | switch) & !fbit;
            // Minimality of the switch guarantees a transition covered only by f.
            let t = self
                .transitions
                .iter()
                .find(|t| {
                    places & (1u64 << t.output.0) != 0 && {
                        let ins = self.inputs_mask(t);
                        ins & fbit != 0 && ins & without == 0
                    }
                })
                .expect("minimal switch element must have a witness transition");
            witnesses.push((AgentId(f), t.clone()));
        }
        ControlledSiphonCertificate {
            places: set_of_mask(places),
            switch: set_of_mask(switch),
            uncovered_when_switch_removed: witnesses,
        }
    }

    fn full_mask(&self) -> u64 {
        if self.n_agents == 64 {
            u64::MAX
        } else {
            (1u64 << self.n_agents) - 1
        }
    }

    /// Decides robust consensuability with respect to the given fault set:
    /// the healthy complement must be a siphon, and no two certificates may
    /// have disjoint place sets together with disjoint switches.
    pub fn check_robust_consensuability(
        &self,
        fault_set: &BTreeSet<AgentId>,
    ) -> Result<ConsensuabilityReport> {
        let faults = self.mask_of(fault_set)?;
        let healthy = self.full_mask() & !faults;
        if healthy == 0 {
            return Err(PetriError::InvalidArgument(
                "fault set must be a proper subset of the places".into(),
            ));
        }
        if !self.is_controlled_siphon_masks(healthy, 0) {
            return Ok(ConsensuabilityReport {
                verdict: false,
                healthy_is_siphon: false,
                witness: None,
                enumerated_pairs: 0,
                certificate_scope: SCOPE_NOTE.to_string(),
            });
        }
        let certs = self.enumerate_minimal_controlled_siphons(fault_set)?;
        let mut pairs = 0usize;
        for i in 0..certs.len() {
            for j in (i + 1)..certs.len() {
                pairs += 1;
                let (a, b) = (&certs[i], &certs[j]);
                if a.places.is_disjoint(&b.places) && a.switch.is_disjoint(&b.switch) {
                    return Ok(ConsensuabilityReport {
                        verdict: false,
                        healthy_is_siphon: true,
                        witness: Some((a.clone(), b.clone())),
                        enumerated_pairs: pairs,
                        certificate_scope: SCOPE_NOTE.to_string(),
                    });
                }
            }
        }
        Ok(ConsensuabilityReport {
            verdict: true,
            healthy_is_siphon: true,
            witness: None,
            enumerated_pairs: pairs,
            certificate_scope: SCOPE_NOTE.to_string(),
        })
    }

    /// Brute-force reference for `check_robust_consensuability`: iterates all
    /// non-empty healthy subsets and all fault subsets, tests the controlled
    /// siphon condition directly, and scans all pairs. Kept independent of the
    /// certificate enumeration above.
    pub fn exhaustive_consensuability_oracle(&self, fault_set: &BTreeSet<AgentId>) -> Result<bool> {
        if self.n_agents > ORACLE_MAX_PLACES {
            return Err(PetriError::UnsupportedSize(format!(
                "the exhaustive oracle supports at most {ORACLE_MAX_PLACES} places"
            )));
        }
        if fault_set.len() > ORACLE_MAX_FAULTS {
            return Err(PetriError::UnsupportedSize(format!(
                "the exhaustive oracle supports at most {ORACLE_MAX_FAULTS} faults"
            )));
        }
        let faults = self.mask_of(fault_set)?;
        let healthy = self.full_mask() & !faults;
        if healthy == 0 {
            return Err(PetriError::InvalidArgument(
                "fault set must be a proper subset of the places".into(),
            ));
        }
        if !self.is_controlled_siphon_masks(healthy, 0) {
            return Ok(false);
        }

        let fault_bits: Vec<usize> = bits(faults).collect();
        let n_fault_subsets = 1usize << fault_bits.len();
        let subset_mask = |idx: usize| -> u64 {
            fault_bits
                .iter()
                .enumerate()
                .filter(|(k, _)| idx & (1 << k) != 0)
                .fold(0u64, |m, (_, &b)| m | (1u64 << b))
        };

        // families[s] has bit w set when fault subset w controls healthy subset s
        let healthy_bits: Vec<usize> = bits(healthy).collect();
        let n_h = healthy_bits.len();
        let expand = |idx: usize| -> u64 {
            healthy_bits
                .iter()
                .enumerate()
                .filter(|(k, _)| idx & (1 << k) != 0)
                .fold(0u64, |m, (_, &b)| m | (1u64 << b))
        };
        let mut families: Vec<u64> = vec![0; 1usize << n_h];
        for (idx, family) in families.iter_mut().enumerate().skip(1) {
            let s = expand(idx);
            for w in 0..n_fault_subsets {
                if self.is_controlled_siphon_masks(s, subset_mask(w)) {
                    *family |= 1u64 << w;
                }
            }
        }

        // disjoint[w] has bit v set when fault subsets w and v are disjoint
        let disjoint: Vec<u64> = (0..n_fault_subsets)
            .map(|w| {
                (0..n_fault_subsets)
                    .filter(|&v| subset_mask(w) & subset_mask(v) == 0)
                    .fold(0u64, |m, v| m | (1u64 << v))
            })
            .collect();

        // Scan disjoint pairs (s1, s2) via submask enumeration of s1's complement.
        let full = (1usize << n_h) - 1;
        for s1 in 1..=full {
            let fam1 = families[s1];
            if fam1 == 0 {
                continue;
            }
            let rest = full & !s1;
            let mut s2 = rest;
            while s2 != 0 {
                let fam2 = families[s2];
                if fam2 != 0 {
                    for w in bits(fam1) {
                        if fam2 & disjoint[w] != 0 {
                            return Ok(false);
                        }
                    }
                }
                s2 = (s2 - 1) & rest;
            }
        }
        Ok(true)
    }

    /// Canonical text form: `agents <n>` followed by one `[j1,j2,...] -> i`
    /// line per transition, 0-based ids.
    pub fn to_text(&self) -> String {
        let mut s = format!("agents {}\n", self.n_agents);
        for t in &self.transitions {
            s.push_str(&t.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n_agents: Option<usize> = None;
        let mut transitions = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            if let Some(rest) = line.strip_prefix("agents") {
                let n = rest.trim().parse::<usize>().map_err(|_| PetriError::ParseText {
                    line: lineno,
                    message: format!("invalid agent count `{}`", rest.trim()),
                })?;
                n_agents = Some(n);
                continue;
            }
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| PetriError::ParseText {
                line: lineno,
                message: "expected `[j1,j2,...] -> i`".into(),
            })?;
            let lhs = lhs.trim();
            let inner = lhs
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| PetriError::ParseText {
                    line: lineno,
                    message: "input list must be bracketed".into(),
                })?;
            let mut inputs = BTreeSet::new();
            for part in inner.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let id = part.parse::<usize>().map_err(|_| PetriError::ParseText {
                    line: lineno,
                    message: format!("invalid agent id `{part}`"),
                })?;
                inputs.insert(AgentId(id));
            }
            let output = rhs.trim().parse::<usize>().map_err(|_| PetriError::ParseText {
                line: lineno,
                message: format!("invalid agent id `{}`", rhs.trim()),
            })?;
            let t = Transition::new(inputs, AgentId(output)).map_err(|e| PetriError::ParseText {
                line: lineno,
                message: e.to_string(),
            })?;
            transitions.push(t);
        }
        let n_agents = n_agents.ok_or(PetriError::ParseText {
            line: 0,
            message: "missing `agents <n>` line".into(),
        })?;
        Self::new(n_agents, transitions)
    }
}

const SCOPE_NOTE: &str =
    "certificate place-sets range over healthy agents only; switches over the declared fault set";

/// A controlled siphon together with the evidence that its switch is minimal:
/// for each switch agent, one input transition that becomes uncovered when
/// that agent is dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlledSiphonCertificate {
    pub places: BTreeSet<AgentId>,
    pub switch: BTreeSet<AgentId>,
    pub uncovered_when_switch_removed: Vec<(AgentId, Transition)>,
}

impl fmt::Display for ControlledSiphonCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_set = |s: &BTreeSet<AgentId>| {
            let ids: Vec<String> = s.iter().map(|a| a.to_string()).collect();
            format!("{{{}}}", ids.join(","))
        };
        write!(f, "S={} switch={}", fmt_set(&self.places), fmt_set(&self.switch))
    }
}

/// Outcome of the robust-consensuability decision for one fault set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensuabilityReport {
    pub verdict: bool,
    pub healthy_is_siphon: bool,
    /// Violating certificate pair; present exactly when the verdict is false
    /// while the healthy set is a siphon.
    pub witness: Option<(ControlledSiphonCertificate, ControlledSiphonCertificate)>,
    pub enumerated_pairs: usize,
    pub certificate_scope: String,
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask & (1u64 << i) != 0)
}

fn set_of_mask(mask: u64) -> BTreeSet<AgentId> {
    bits(mask).map(AgentId).collect()
}

/// All submasks of `mask`, including 0 and `mask` itself.
fn submasks(mask: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut s = mask;
    loop {
        out.push(s);
        if s == 0 {
            break;
        }
        s = (s - 1) & mask;
    }
    out.reverse(); // ascending so the empty switch comes first
    out
}

/// Minimal hitting sets of the requirement family, by branching on the first
/// requirement not yet hit. Non-minimal results are filtered by the caller.
fn hit(reqs: &[u64], chosen: u64, seen: &mut HashSet<u64>, out: &mut Vec<u64>) {
    match reqs.iter().find(|&&r| r & chosen == 0) {
        None => out.push(chosen),
        Some(&r) => {
            for q in bits(r) {
                let next = chosen | (1u64 << q);
                if seen.insert(next) {
                    hit(reqs, next, seen, out);
                }
            }
        }
    }
}

fn keep_minimal(masks: &mut Vec<u64>) {
    let snapshot = masks.clone();
    masks.retain(|&m| !snapshot.iter().any(|&o| o != m && o & m == o));
    masks.sort_unstable();
    masks.dedup();
}

/// Order masks by their sorted element lists rather than numeric value.
fn sort_masks(masks: &mut [u64]) {
    masks.sort_by_cached_key(|&m| bits(m).collect::<Vec<_>>());
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(xs: &[usize]) -> BTreeSet<AgentId> {
        xs.iter().copied().map(AgentId).collect()
    }

    fn chain3() -> PetriNet {
        // {0} -> 1, {0,1} -> 2
        PetriNet::new(
            3,
            vec![
                Transition::new(ids(&[0]), AgentId(1)).unwrap(),
                Transition::new(ids(&[0, 1]), AgentId(2)).unwrap(),
            ],
        )
        .unwrap()
    }

    fn ring5() -> PetriNet {
        // {0,1}->2, {1,2}->3, {2,3}->4, {3,4}->0, {4,0}->1
        let specs: [(&[usize], usize); 5] =
            [(&[0, 1], 2), (&[1, 2], 3), (&[2, 3], 4), (&[3, 4], 0), (&[4, 0], 1)];
        PetriNet::new(
            5,
            specs
                .iter()
                .map(|(i, o)| Transition::new(ids(i), AgentId(*o)).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn grid3x3() -> PetriNet {
        crate::scenario::builtin_network("grid3x3").unwrap().petri_net()
    }

    /// 1-based grid label to 0-based index.
    fn g(r: usize, c: usize) -> usize {
        (r - 1) * 3 + (c - 1)
    }

    #[test]
    fn construction_rejects_malformed_transitions() {
        assert!(Transition::new(ids(&[]), AgentId(1)).is_err());
        assert!(Transition::new(ids(&[1]), AgentId(1)).is_err());
        let dup = vec![
            Transition::new(ids(&[0]), AgentId(1)).unwrap(),
            Transition::new(ids(&[0]), AgentId(1)).unwrap(),
        ];
        assert!(matches!(PetriNet::new(2, dup), Err(PetriError::InvalidArgument(_))));
        let out_of_range = vec![Transition::new(ids(&[5]), AgentId(1)).unwrap()];
        assert!(PetriNet::new(2, out_of_range).is_err());
    }

    #[test]
    fn input_transitions_on_chain() {
        let net = chain3();
        assert!(net.input_transitions(&ids(&[0])).unwrap().is_empty());
        assert_eq!(net.input_transitions(&ids(&[1, 2])).unwrap().len(), 2);
        assert!(matches!(
            net.input_transitions(&ids(&[7])),
            Err(PetriError::InvalidArgument(_))
        ));
    }

    #[test]
    fn input_transitions_on_grid_single_place() {
        let net = grid3x3();
        let ts = net.input_transitions(&ids(&[g(2, 3)])).unwrap();
        let got: BTreeSet<BTreeSet<AgentId>> = ts
            .iter()
            .map(|&t| net.transition(t).unwrap().inputs().clone())
            .collect();
        let expected: BTreeSet<BTreeSet<AgentId>> =
            [ids(&[g(2, 1), g(2, 2)]), ids(&[g(1, 3), g(3, 3)])].into_iter().collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn output_transitions_on_chain_and_ring() {
        let net = chain3();
        assert_eq!(net.output_transitions(&ids(&[0])).unwrap().len(), 2);
        assert!(net.output_transitions(&ids(&[2])).unwrap().is_empty());

        let ring = ring5();
        let ts = ring.output_transitions(&ids(&[2])).unwrap();
        let outs: BTreeSet<AgentId> =
            ts.iter().map(|&t| ring.transition(t).unwrap().output()).collect();
        assert_eq!(outs, ids(&[3, 4]));
    }

    #[test]
    fn siphon_basics_on_chain() {
        let net = chain3();
        assert!(net.is_siphon(&ids(&[0])).unwrap());
        assert!(!net.is_siphon(&ids(&[1, 2])).unwrap());
        assert!(net.is_siphon(&BTreeSet::new()).is_err());
    }

    #[test]
    fn grid_corner_block_is_siphon() {
        let net = grid3x3();
        assert!(net
            .is_siphon(&ids(&[g(1, 1), g(1, 2), g(2, 1), g(2, 2)]))
            .unwrap());
    }

    #[test]
    fn controlled_siphon_examples() {
        let net = grid3x3();
        // empty switch reduces to the plain siphon notion
        for s in [ids(&[g(1, 1)]), ids(&[g(1, 1), g(1, 2), g(2, 1), g(2, 2)])] {
            assert_eq!(
                net.is_controlled_siphon(&s, &BTreeSet::new()).unwrap(),
                net.is_siphon(&s).unwrap()
            );
        }
        assert!(net
            .is_controlled_siphon(&ids(&[g(2, 3)]), &ids(&[g(2, 2), g(3, 3)]))
            .unwrap());
        assert!(net
            .is_controlled_siphon(&ids(&[g(1, 1), g(1, 2), g(2, 1)]), &ids(&[g(2, 2)]))
            .unwrap());
        assert!(net.is_controlled_siphon(&ids(&[g(1, 1)]), &ids(&[g(1, 1)])).is_err());
    }

    #[test]
    fn minimal_switches_examples() {
        let net = grid3x3();
        // a siphon needs no switch at all
        let block = ids(&[g(1, 1), g(1, 2), g(2, 1), g(2, 2)]);
        assert_eq!(
            net.minimal_switches(&block, &ids(&[g(3, 3)])).unwrap(),
            vec![BTreeSet::new()]
        );
        // both pool members are needed to control the lone place (2,3)
        assert_eq!(
            net.minimal_switches(&ids(&[g(2, 3)]), &ids(&[g(2, 2), g(3, 3)]))
                .unwrap(),
            vec![ids(&[g(2, 2), g(3, 3)])]
        );
        assert_eq!(
            net.minimal_switches(&ids(&[g(1, 1), g(1, 2), g(2, 1)]), &ids(&[g(2, 2)]))
                .unwrap(),
            vec![ids(&[g(2, 2)])]
        );
        // no subset of an unrelated pool works for a non-siphon
        assert!(net
            .minimal_switches(&ids(&[g(2, 3)]), &ids(&[g(1, 1)]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn chain_certificates_with_empty_pool() {
        let net = chain3();
        let certs = net.enumerate_minimal_controlled_siphons(&BTreeSet::new()).unwrap();
        assert_eq!(certs.len(), 1);
        assert_eq!(certs[0].places, ids(&[0]));
        assert!(certs[0].switch.is_empty());
    }

    #[test]
    fn grid_minimal_siphons_come_in_two_layouts() {
        // Minimal siphons of the grid net are the 9 two-row/two-column blocks
        // and the 6 three-row cycles (each non-empty row and column slice has
        // exactly two members).
        let net = grid3x3();
        let siphons = net.minimal_siphons().unwrap();
        assert_eq!(siphons.len(), 15);
        let quads = siphons.iter().filter(|s| s.len() == 4).count();
        let hexes = siphons.iter().filter(|s| s.len() == 6).count();
        assert_eq!((quads, hexes), (9, 6));
        for s in &siphons {
            assert!(net.is_siphon(s).unwrap());
            for axis in 0..2 {
                for line in 0..3 {
                    let slice = s
                        .iter()
                        .filter(|a| if axis == 0 { a.0 / 3 == line } else { a.0 % 3 == line })
                        .count();
                    assert!(slice == 0 || slice == 2, "minimal siphon slice of size {slice}");
                }
            }
        }
    }

    #[test]
    fn grid_certificates_with_diagonal_pool() {
        let net = grid3x3();
        let certs = net
            .enumerate_minimal_controlled_siphons(&ids(&[g(2, 2), g(3, 3)]))
            .unwrap();
        assert!(certs
            .iter()
            .any(|c| c.places == ids(&[g(2, 3)]) && c.switch == ids(&[g(2, 2), g(3, 3)])));
    }

    #[test]
    fn grid_single_fault_is_robust() {
        let net = grid3x3();
        let report = net.check_robust_consensuability(&ids(&[g(2, 2)])).unwrap();
        assert!(report.verdict);
        assert!(report.healthy_is_siphon);
        assert!(report.witness.is_none());
    }

    #[test]
    fn grid_diagonal_fault_pair_witness() {
        let net = grid3x3();
        let report = net
            .check_robust_consensuability(&ids(&[g(2, 2), g(3, 3)]))
            .unwrap();
        assert!(!report.verdict);
        assert!(report.healthy_is_siphon);
        let (a, b) = report.witness.expect("witness expected");
        let pair: BTreeSet<(BTreeSet<AgentId>, BTreeSet<AgentId>)> =
            [(a.places, a.switch), (b.places, b.switch)].into_iter().collect();
        assert!(pair.contains(&(ids(&[g(2, 3)]), ids(&[g(2, 2), g(3, 3)]))));
        assert!(pair.contains(&(
            ids(&[g(1, 1), g(1, 2), g(3, 1), g(3, 2)]),
            BTreeSet::new()
        )));
    }

    #[test]
    fn grid_same_row_fault_pair_breaks_healthy_siphon() {
        let net = grid3x3();
        let report = net
            .check_robust_consensuability(&ids(&[g(2, 1), g(2, 2)]))
            .unwrap();
        assert!(!report.verdict);
        assert!(!report.healthy_is_siphon);
        assert!(report.witness.is_none());
    }

    #[test]
    fn check_rejects_all_places_faulty() {
        let net = chain3();
        assert!(net.check_robust_consensuability(&ids(&[0, 1, 2])).is_err());
    }

    #[test]
    fn oracle_matches_checker_on_small_nets() {
        for net in [chain3(), ring5(), grid3x3()] {
            let places: Vec<AgentId> = net.all_places().into_iter().collect();
            let mut fault_sets: Vec<BTreeSet<AgentId>> = vec![BTreeSet::new()];
            for (i, &a) in places.iter().enumerate() {
                fault_sets.push([a].into_iter().collect());
                for &b in &places[i + 1..] {
                    fault_sets.push([a, b].into_iter().collect());
                }
            }
            for faults in fault_sets {
                if faults.len() == net.n_agents() {
                    continue;
                }
                let fast = net.check_robust_consensuability(&faults).unwrap().verdict;
                let slow = net.exhaustive_consensuability_oracle(&faults).unwrap();
                assert_eq!(fast, slow, "net {:?} faults {:?}", net.n_agents(), faults);
            }
        }
    }

    #[test]
    fn oracle_accepts_grid_cases() {
        let net = grid3x3();
        assert!(net.exhaustive_consensuability_oracle(&BTreeSet::new()).unwrap());
        assert!(net.exhaustive_consensuability_oracle(&ids(&[g(2, 2)])).unwrap());
    }

    #[test]
    fn oracle_size_guard() {
        let t = Transition::new(ids(&[0]), AgentId(1)).unwrap();
        let net = PetriNet::new(17, vec![t]).unwrap();
        assert!(matches!(
            net.exhaustive_consensuability_oracle(&BTreeSet::new()),
            Err(PetriError::UnsupportedSize(_))
        ));
    }

    #[test]
    fn net_text_round_trip() {
        let net = grid3x3();
        let text = net.to_text();
        let parsed = PetriNet::from_text(&text).unwrap();
        assert_eq!(net, parsed);
        assert!(PetriNet::from_text("agents x\n").is_err());
        assert!(PetriNet::from_text("[0] -> 1\n").is_err());
        assert!(PetriNet::from_text("agents 2\n0 -> 1\n").is_err());
    }
}
