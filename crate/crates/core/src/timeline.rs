//! Scenario model and engine.
//!
//! A [`Timeline`] is an ordered list of events over named subsystems. It is
//! evaluated either exactly, by enumerating every measurement branch
//! ([`enumerate`]), or by seeded Monte Carlo with projective collapse and
//! rejection of post-selection failures ([`sample`]).
//!
//! # Random numbers
//!
//! The sampler uses ChaCha20 (`rand_chacha::ChaCha20Rng`), a counter-based
//! stream cipher generator. The 64-bit seed is expanded with
//! `SeedableRng::seed_from_u64`; shots are split into blocks of
//! [`SAMPLE_BLOCK`] and block `b` draws from stream `b` of that key. A
//! uniform draw is `(next_u64() >> 11) · 2⁻⁵³`. The resulting sequence does
//! not depend on platform or thread count.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{apply_local, LinearOp, C64, MAX_AMPLITUDES};
use crate::measure::{Observable, Outcome, OutcomeDistribution, SELECTION_EPS};
use crate::states::ForwardState;

/// Default limit on the number of simultaneously tracked branches.
pub const DEFAULT_BRANCH_CAP: usize = 1_000_000;

/// Shots per independent random stream.
pub const SAMPLE_BLOCK: usize = 1024;

/// Unitarity tolerance for `unitary` and `feedforward` operators.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct System {
    pub name: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Event {
    /// Initial state over all systems, in declaration order.
    Preselect(ForwardState),
    Unitary {
        op: LinearOp,
        targets: Vec<String>,
    },
    Measure {
        observable: Observable,
        targets: Vec<String>,
        label: String,
    },
    /// Keeps only runs where measurement `label` gave outcome index `outcome`.
    Postselect {
        label: String,
        outcome: usize,
    },
    /// From here on the targets may not be touched.
    Guard {
        targets: Vec<String>,
    },
    /// Applies `ops[k]` when measurement `on` gave outcome index `k`.
    Feedforward {
        on: String,
        ops: Vec<LinearOp>,
        targets: Vec<String>,
    },
    /// Unobserved Kraus map; trace-decreasing maps act as post-selection.
    Channel {
        channel: Channel,
        targets: Vec<String>,
    },
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::Preselect(_) => "preselect",
            Event::Unitary { .. } => "unitary",
            Event::Measure { .. } => "measure",
            Event::Postselect { .. } => "postselect",
            Event::Guard { .. } => "guard",
            Event::Feedforward { .. } => "feedforward",
            Event::Channel { .. } => "channel",
        }
    }

    pub fn targets(&self) -> &[String] {
        match self {
            Event::Unitary { targets, .. }
            | Event::Measure { targets, .. }
            | Event::Guard { targets }
            | Event::Feedforward { targets, .. }
            | Event::Channel { targets, .. } => targets,
            Event::Preselect(_) | Event::Postselect { .. } => &[],
        }
    }
}

fn names(targets: &[&str]) -> Vec<String> {
    targets.iter().map(|s| s.to_string()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Timeline {
    systems: Vec<System>,
    events: Vec<Event>,
}

impl Timeline {
    pub fn new<S: Into<String>>(systems: impl IntoIterator<Item = (S, usize)>) -> Self {
        Self {
            systems: systems
                .into_iter()
                .map(|(name, dim)| System {
                    name: name.into(),
                    dim,
                })
                .collect(),
            events: Vec::new(),
        }
    }

    pub fn from_parts(systems: Vec<System>, events: Vec<Event>) -> Self {
        Self { systems, events }
    }

    pub fn systems(&self) -> &[System] {
        &self.systems
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    pub fn system_index(&self, name: &str) -> Option<usize> {
        self.systems.iter().position(|s| s.name == name)
    }

    pub fn measurement_labels(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Measure { label, .. } => Some(label.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn insert(&mut self, index: usize, event: Event) {
        self.events.insert(index, event);
    }

    pub fn remove(&mut self, index: usize) -> Event {
        self.events.remove(index)
    }

    pub fn preselect(mut self, state: ForwardState) -> Self {
        self.push(Event::Preselect(state));
        self
    }

    pub fn unitary(mut self, op: LinearOp, targets: &[&str]) -> Self {
        self.push(Event::Unitary {
            op,
            targets: names(targets),
        });
        self
    }

    pub fn measure(mut self, observable: Observable, targets: &[&str], label: &str) -> Self {
        self.push(Event::Measure {
            observable,
            targets: names(targets),
            label: label.to_string(),
        });
        self
    }

    pub fn postselect(mut self, label: &str, outcome: usize) -> Self {
        self.push(Event::Postselect {
            label: label.to_string(),
            outcome,
        });
        self
    }

    pub fn guard(mut self, targets: &[&str]) -> Self {
        self.push(Event::Guard {
            targets: names(targets),
        });
        self
    }

    pub fn feedforward(mut self, on: &str, ops: Vec<LinearOp>, targets: &[&str]) -> Self {
        self.push(Event::Feedforward {
            on: on.to_string(),
            ops,
            targets: names(targets),
        });
        self
    }

    pub fn channel(mut self, channel: Channel, targets: &[&str]) -> Self {
        self.push(Event::Channel {
            channel,
            targets: names(targets),
        });
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ValidationError {
    BadSystemDimension {
        name: String,
        dim: usize,
    },
    DuplicateSystem {
        name: String,
    },
    TotalDimension {
        total: usize,
        cap: usize,
    },
    NoPreselect,
    PreselectNotFirst {
        index: usize,
    },
    StateDimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    EmptyTargets {
        index: usize,
    },
    UnknownSystem {
        index: usize,
        name: String,
    },
    DuplicateTarget {
        index: usize,
        name: String,
    },
    OperatorDimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    NotUnitary {
        index: usize,
        defect: f64,
    },
    DuplicateLabel {
        index: usize,
        label: String,
    },
    UnknownLabel {
        index: usize,
        label: String,
    },
    OutcomeOutOfRange {
        index: usize,
        label: String,
        outcome: usize,
        count: usize,
    },
    FeedforwardArity {
        index: usize,
        expected: usize,
        found: usize,
    },
    GuardViolation {
        index: usize,
        system: String,
    },
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationError::*;
        match self {
            BadSystemDimension { name, dim } => {
                write!(
                    f,
                    "system '{name}' has dimension {dim}; at least 2 is required"
                )
            }
            DuplicateSystem { name } => write!(f, "system '{name}' is declared twice"),
            TotalDimension { total, cap } => {
                write!(f, "total dimension {total} exceeds the cap of {cap}")
            }
            NoPreselect => write!(f, "timeline has no preselect event"),
            PreselectNotFirst { index } => {
                write!(
                    f,
                    "event {index}: preselect must be the first and only preselect"
                )
            }
            StateDimension {
                index,
                expected,
                found,
            } => write!(
                f,
                "event {index}: state has {found} amplitudes, systems need {expected}"
            ),
            EmptyTargets { index } => write!(f, "event {index}: no target systems"),
            UnknownSystem { index, name } => write!(f, "event {index}: unknown system '{name}'"),
            DuplicateTarget { index, name } => {
                write!(f, "event {index}: system '{name}' targeted twice")
            }
            OperatorDimension {
                index,
                expected,
                found,
            } => write!(
                f,
                "event {index}: operator side {found} does not match target dimension {expected}"
            ),
            NotUnitary { index, defect } => {
                write!(
                    f,
                    "event {index}: operator is not unitary (defect {defect:e})"
                )
            }
            DuplicateLabel { index, label } => {
                write!(f, "event {index}: measurement label '{label}' already used")
            }
            UnknownLabel { index, label } => {
                write!(
                    f,
                    "event {index}: no earlier measurement labelled '{label}'"
                )
            }
            OutcomeOutOfRange {
                index,
                label,
                outcome,
                count,
            } => write!(
                f,
                "event {index}: outcome {outcome} out of range for '{label}' ({count} outcomes)"
            ),
            FeedforwardArity {
                index,
                expected,
                found,
            } => write!(
                f,
                "event {index}: feedforward needs {expected} operators, found {found}"
            ),
            GuardViolation { index, system } => {
                write!(f, "event {index}: guarded system '{system}' is touched")
            }
        }
    }
}

impl std::error::Error for ValidationError {}

/// Structural checks. Returns every problem found, in event order.
pub fn validate(t: &Timeline) -> std::result::Result<(), Vec<ValidationError>> {
    use ValidationError::*;
    let mut errors = Vec::new();

    let mut seen_names = HashSet::new();
    let mut total = 1usize;
    for s in &t.systems {
        if s.dim < 2 {
            errors.push(BadSystemDimension {
                name: s.name.clone(),
                dim: s.dim,
            });
        }
        if !seen_names.insert(s.name.as_str()) {
            errors.push(DuplicateSystem {
                name: s.name.clone(),
            });
        }
        total = total.saturating_mul(s.dim.max(1));
    }
    if total > MAX_AMPLITUDES {
        errors.push(TotalDimension {
            total,
            cap: MAX_AMPLITUDES,
        });
    }

    if !matches!(t.events.first(), Some(Event::Preselect(_))) {
        errors.push(NoPreselect);
    }

    let mut guarded: HashSet<&str> = HashSet::new();
    // label -> outcome count
    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();

    for (index, event) in t.events.iter().enumerate() {
        // Target resolution and guard checks.
        let mut target_dim = 1usize;
        let mut targets_ok = true;
        if !matches!(event, Event::Preselect(_) | Event::Postselect { .. }) {
            let targets = event.targets();
            if targets.is_empty() {
                errors.push(EmptyTargets { index });
                targets_ok = false;
            }
            let mut local = HashSet::new();
            for name in targets {
                match t.system_index(name) {
                    Some(k) => target_dim = target_dim.saturating_mul(t.systems[k].dim),
                    None => {
                        errors.push(UnknownSystem {
                            index,
                            name: name.clone(),
                        });
                        targets_ok = false;
                    }
                }
                if !local.insert(name.as_str()) {
                    errors.push(DuplicateTarget {
                        index,
                        name: name.clone(),
                    });
                    targets_ok = false;
                }
                if !matches!(event, Event::Guard { .. }) && guarded.contains(name.as_str()) {
                    errors.push(GuardViolation {
                        index,
                        system: name.clone(),
                    });
                }
            }
        }
        let check_side = |side: usize, errors: &mut Vec<ValidationError>| {
            if targets_ok && side != target_dim {
                errors.push(OperatorDimension {
                    index,
                    expected: target_dim,
                    found: side,
                });
            }
        };

        match event {
            Event::Preselect(state) => {
                if index != 0 {
                    errors.push(PreselectNotFirst { index });
                }
                if state.len() != total {
                    errors.push(StateDimension {
                        index,
                        expected: total,
                        found: state.len(),
                    });
                }
            }
            Event::Unitary { op, .. } => {
                check_side(op.side(), &mut errors);
                let defect = op.unitarity_defect();
                if defect > UNITARY_TOL {
                    errors.push(NotUnitary { index, defect });
                }
            }
            Event::Measure {
                observable, label, ..
            } => {
                check_side(observable.side(), &mut errors);
                if labels.insert(label, observable.outcome_count()).is_some() {
                    errors.push(DuplicateLabel {
                        index,
                        label: label.clone(),
                    });
                }
            }
            Event::Postselect { label, outcome } => match labels.get(label.as_str()) {
                None => errors.push(UnknownLabel {
                    index,
                    label: label.clone(),
                }),
                Some(&count) if *outcome >= count => errors.push(OutcomeOutOfRange {
                    index,
                    label: label.clone(),
                    outcome: *outcome,
                    count,
                }),
                Some(_) => {}
            },
            Event::Guard { targets } => {
                for name in targets {
                    guarded.insert(name.as_str());
                }
            }
            Event::Feedforward { on, ops, .. } => {
                match labels.get(on.as_str()) {
                    None => errors.push(UnknownLabel {
                        index,
                        label: on.clone(),
                    }),
                    Some(&count) if count != ops.len() => errors.push(FeedforwardArity {
                        index,
                        expected: count,
                        found: ops.len(),
                    }),
                    Some(_) => {}
                }
                for op in ops {
                    check_side(op.side(), &mut errors);
                    let defect = op.unitarity_defect();
                    if defect > UNITARY_TOL {
                        errors.push(NotUnitary { index, defect });
                    }
                }
            }
            Event::Channel { channel, .. } => check_side(channel.side(), &mut errors),
        }
    }

    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementResult {
    pub label: String,
    pub distribution: OutcomeDistribution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerStats {
    pub shots: usize,
    pub accepted: usize,
    pub seed: u64,
    /// Outcome indices (one per measurement, in timeline order) of every
    /// accepted shot, in shot order.
    pub records: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    measurements: Vec<MeasurementResult>,
    postselection_probability: f64,
    branch_count: usize,
    joint: Vec<(Vec<usize>, f64)>,
    sampler: Option<SamplerStats>,
}

impl RunResult {
    /// Conditional distribution of each measurement, in timeline order.
    pub fn measurements(&self) -> &[MeasurementResult] {
        &self.measurements
    }

    pub fn distribution(&self, label: &str) -> Option<&OutcomeDistribution> {
        self.measurements
            .iter()
            .find(|m| m.label == label)
            .map(|m| &m.distribution)
    }

    /// Probability that all post-selections succeed. For sampled runs this
    /// is the accepted fraction.
    pub fn postselection_probability(&self) -> f64 {
        self.postselection_probability
    }

    /// Surviving branches (exact) or distinct accepted records (sampled).
    pub fn branch_count(&self) -> usize {
        self.branch_count
    }

    /// Conditional joint distribution over full outcome records.
    pub fn joint(&self) -> &[(Vec<usize>, f64)] {
        &self.joint
    }

    pub fn sampler(&self) -> Option<&SamplerStats> {
        self.sampler.as_ref()
    }

    fn slot(&self, label: &str) -> Result<usize> {
        self.measurements
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    /// Conditional joint distribution of the listed measurements.
    pub fn joint_over(&self, labels: &[&str]) -> Result<BTreeMap<Vec<usize>, f64>> {
        let slots = labels
            .iter()
            .map(|l| self.slot(l))
            .collect::<Result<Vec<_>>>()?;
        let mut out = BTreeMap::new();
        for (record, p) in &self.joint {
            let key: Vec<usize> = slots.iter().map(|&s| record[s]).collect();
            *out.entry(key).or_insert(0.0) += p;
        }
        Ok(out)
    }

    /// Distribution of `label` further conditioned on other outcomes.
    pub fn conditional(&self, label: &str, given: &[(&str, usize)]) -> Result<OutcomeDistribution> {
        let slot = self.slot(label)?;
        let given = given
            .iter()
            .map(|(l, k)| Ok((self.slot(l)?, *k)))
            .collect::<Result<Vec<_>>>()?;
        let outcomes = self.measurements[slot].distribution.outcomes().to_vec();
        let mut weights = vec![0.0; outcomes.len()];
        for (record, p) in &self.joint {
            if given.iter().all(|&(s, k)| record[s] == k) {
                weights[record[slot]] += p;
            }
        }
        OutcomeDistribution::from_weights(outcomes, weights)
    }
}

enum Step<'a> {
    Apply {
        matrix: &'a DMatrix<C64>,
        targets: Vec<usize>,
    },
    Measure {
        projectors: Vec<&'a DMatrix<C64>>,
        targets: Vec<usize>,
        slot: usize,
    },
    Postselect {
        slot: usize,
        outcome: usize,
    },
    Feedforward {
        slot: usize,
        ops: Vec<&'a DMatrix<C64>>,
        targets: Vec<usize>,
    },
    Kraus {
        ops: Vec<&'a DMatrix<C64>>,
        targets: Vec<usize>,
    },
}

struct Plan<'a> {
    dims: Vec<usize>,
    initial: Vec<C64>,
    steps: Vec<Step<'a>>,
    outcomes: Vec<(String, Vec<Outcome>)>,
}

impl<'a> Plan<'a> {
    fn build(t: &'a Timeline) -> Result<Self> {
        validate(t).map_err(Error::Invalid)?;
        let dims = t.dims();
        let resolve = |targets: &[String]| -> Vec<usize> {
            targets
                .iter()
                .map(|n| t.system_index(n).expect("validated"))
                .collect()
        };
        let mut initial = Vec::new();
        let mut steps = Vec::new();
        let mut outcomes: Vec<(String, Vec<Outcome>)> = Vec::new();
        let slot_of = |outcomes: &[(String, Vec<Outcome>)], label: &str| {
            outcomes
                .iter()
                .position(|(l, _)| l == label)
                .expect("validated")
        };
        for event in &t.events {
            match event {
                Event::Preselect(state) => initial = state.ket().amplitudes().to_vec(),
                Event::Unitary { op, targets } => steps.push(Step::Apply {
                    matrix: op.matrix(),
                    targets: resolve(targets),
                }),
                Event::Measure {
                    observable,
                    targets,
                    label,
                } => {
                    steps.push(Step::Measure {
                        projectors: observable.projectors().iter().map(|p| p.matrix()).collect(),
                        targets: resolve(targets),
                        slot: outcomes.len(),
                    });
                    outcomes.push((label.clone(), observable.outcomes()));
                }
                Event::Postselect { label, outcome } => steps.push(Step::Postselect {
                    slot: slot_of(&outcomes, label),
                    outcome: *outcome,
                }),
                Event::Guard { .. } => {}
                Event::Feedforward { on, ops, targets } => steps.push(Step::Feedforward {
                    slot: slot_of(&outcomes, on),
                    ops: ops.iter().map(LinearOp::matrix).collect(),
                    targets: resolve(targets),
                }),
                Event::Channel { channel, targets } => steps.push(Step::Kraus {
                    ops: channel.kraus().iter().map(LinearOp::matrix).collect(),
                    targets: resolve(targets),
                }),
            }
        }
        Ok(Self {
            dims,
            initial,
            steps,
            outcomes,
        })
    }
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

struct Branch {
    amps: Vec<C64>,
    record: Vec<usize>,
}

fn expand_check(current: usize, factor: usize, cap: usize) -> Result<()> {
    let needed = current.saturating_mul(factor);
    if needed > cap {
        return Err(Error::BranchCapExceeded { needed, cap });
    }
    Ok(())
}

/// Exact evaluation with the default branch cap.
pub fn enumerate(t: &Timeline) -> Result<RunResult> {
    enumerate_with_cap(t, DEFAULT_BRANCH_CAP)
}

/// Exact evaluation: every measurement outcome and every Kraus operator
/// spawns a branch; amplitudes are carried unnormalized so that branch
/// weights are joint probabilities.
pub fn enumerate_with_cap(t: &Timeline, cap: usize) -> Result<RunResult> {
    let plan = Plan::build(t)?;
    let slots = plan.outcomes.len();
    let mut branches = vec![Branch {
        amps: plan.initial.clone(),
        record: vec![usize::MAX; slots],
    }];

    for step in &plan.steps {
        match step {
            Step::Apply { matrix, targets } => {
                for b in &mut branches {
                    b.amps = apply_local(matrix, targets, &plan.dims, &b.amps);
                }
            }
            Step::Measure {
                projectors,
                targets,
                slot,
            } => {
                expand_check(branches.len(), projectors.len(), cap)?;
                let mut next = Vec::with_capacity(branches.len() * projectors.len());
                for b in &branches {
                    for (k, p) in projectors.iter().enumerate() {
                        let amps = apply_local(p, targets, &plan.dims, &b.amps);
                        if norm_sqr(&amps) == 0.0 {
                            continue;
                        }
                        let mut record = b.record.clone();
                        record[*slot] = k;
                        next.push(Branch { amps, record });
                    }
                }
                branches = next;
            }
            Step::Postselect { slot, outcome } => {
                branches.retain(|b| b.record[*slot] == *outcome);
            }
            Step::Feedforward { slot, ops, targets } => {
                for b in &mut branches {
                    b.amps = apply_local(ops[b.record[*slot]], targets, &plan.dims, &b.amps);
                }
            }
            Step::Kraus { ops, targets } => {
                expand_check(branches.len(), ops.len(), cap)?;
                let mut next = Vec::with_capacity(branches.len() * ops.len());
                for b in &branches {
                    for k in ops {
                        let amps = apply_local(k, targets, &plan.dims, &b.amps);
                        if norm_sqr(&amps) == 0.0 {
                            continue;
                        }
                        next.push(Branch {
                            amps,
                            record: b.record.clone(),
                        });
                    }
                }
                branches = next;
            }
        }
    }

    let mut joint: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut total = 0.0;
    for b in &branches {
        let w = norm_sqr(&b.amps);
        total += w;
        *joint.entry(b.record.clone()).or_insert(0.0) += w;
    }
    if total.is_nan() || total <= SELECTION_EPS {
        return Err(Error::EmptyEnsemble { weight: total });
    }
    let joint: Vec<(Vec<usize>, f64)> = joint.into_iter().map(|(r, w)| (r, w / total)).collect();
    let measurements = marginals(&plan.outcomes, &joint)?;
    Ok(RunResult {
        measurements,
        postselection_probability: total.min(1.0),
        branch_count: branches.len(),
        joint,
        sampler: None,
    })
}

fn marginals(
    outcomes: &[(String, Vec<Outcome>)],
    joint: &[(Vec<usize>, f64)],
) -> Result<Vec<MeasurementResult>> {
    outcomes
        .iter()
        .enumerate()
        .map(|(slot, (label, outs))| {
            let mut weights = vec![0.0; outs.len()];
            for (record, p) in joint {
                weights[record[slot]] += p;
            }
            Ok(MeasurementResult {
                label: label.clone(),
                distribution: OutcomeDistribution::from_weights(outs.clone(), weights)?,
            })
        })
        .collect()
}

fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn choose(weights: &[f64], total: f64, u: f64) -> Option<usize> {
    let target = u * total;
    let mut acc = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return Some(k);
        }
    }
    None
}

fn run_shot(plan: &Plan<'_>, rng: &mut ChaCha20Rng) -> Option<Vec<usize>> {
    let mut v = plan.initial.clone();
    let mut record = vec![usize::MAX; plan.outcomes.len()];
    for step in &plan.steps {
        match step {
            Step::Apply { matrix, targets } => v = apply_local(matrix, targets, &plan.dims, &v),
            Step::Measure {
                projectors,
                targets,
                slot,
            } => {
                let candidates: Vec<Vec<C64>> = projectors
                    .iter()
                    .map(|p| apply_local(p, targets, &plan.dims, &v))
                    .collect();
                let weights: Vec<f64> = candidates.iter().map(|c| norm_sqr(c)).collect();
                let total: f64 = weights.iter().sum();
                let u = uniform(rng);
                let k = choose(&weights, total, u)
                    .unwrap_or_else(|| weights.iter().rposition(|&w| w > 0.0).unwrap_or(0));
                let scale = 1.0 / weights[k].sqrt();
                v = candidates[k].iter().map(|a| a * scale).collect();
                record[*slot] = k;
            }
            Step::Postselect { slot, outcome } => {
                if record[*slot] != *outcome {
                    return None;
                }
            }
            Step::Feedforward { slot, ops, targets } => {
                v = apply_local(ops[record[*slot]], targets, &plan.dims, &v);
            }
            Step::Kraus { ops, targets } => {
                let candidates: Vec<Vec<C64>> = ops
                    .iter()
                    .map(|k| apply_local(k, targets, &plan.dims, &v))
                    .collect();
                let weights: Vec<f64> = candidates.iter().map(|c| norm_sqr(c)).collect();
                // Missing weight relative to ‖v‖² is the rejection probability
                // of a trace-decreasing map.
                let norm = norm_sqr(&v).max(weights.iter().sum());
                let k = choose(&weights, norm, uniform(rng))?;
                let scale = 1.0 / weights[k].sqrt();
                v = candidates[k].iter().map(|a| a * scale).collect();
            }
        }
    }
    Some(record)
}

/// Monte Carlo evaluation with Born-rule collapse and rejection sampling.
/// Deterministic for a given seed, independent of thread count.
pub fn sample(t: &Timeline, shots: usize, seed: u64) -> Result<RunResult> {
    if shots == 0 {
        return Err(Error::BadDimension(0));
    }
    let plan = Plan::build(t)?;
    let blocks = shots.div_ceil(SAMPLE_BLOCK);
    let per_block: Vec<Vec<Option<Vec<usize>>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let n = SAMPLE_BLOCK.min(shots - b * SAMPLE_BLOCK);
            (0..n).map(|_| run_shot(&plan, &mut rng)).collect()
        })
        .collect();
    let records: Vec<Vec<usize>> = per_block.into_iter().flatten().flatten().collect();

    if records.is_empty() {
        let exact = enumerate(t)?;
        return Err(Error::NoAcceptedShots {
            shots,
            probability: exact.postselection_probability(),
        });
    }

    let accepted = records.len();
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for r in &records {
        *counts.entry(r.clone()).or_insert(0) += 1;
    }
    let joint: Vec<(Vec<usize>, f64)> = counts
        .into_iter()
        .map(|(r, n)| (r, n as f64 / accepted as f64))
        .collect();
    let measurements = marginals(&plan.outcomes, &joint)?;
    Ok(RunResult {
        measurements,
        postselection_probability: accepted as f64 / shots as f64,
        branch_count: joint.len(),
        joint,
        sampler: Some(SamplerStats {
            shots,
            accepted,
            seed,
            records,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Ket;
    use crate::states::{maximally_entangled, named_qubit};

    fn z_timeline() -> Timeline {
        Timeline::new([("q", 2)])
            .preselect(named_qubit("zero").unwrap())
            .measure(Observable::sigma_z(), &["q"], "z")
    }

    #[test]
    fn single_measurement() {
        let r = enumerate(&z_timeline()).unwrap();
        assert_eq!(r.postselection_probability(), 1.0);
        assert_eq!(
            r.distribution("z").unwrap().probability_of_value(1.0),
            Some(1.0)
        );
    }

    #[test]
    fn postselect_on_eigenstate() {
        let t = z_timeline().postselect("z", 1);
        let r = enumerate(&t).unwrap();
        assert_eq!(r.distribution("z").unwrap().probability(1), 1.0);
    }

    #[test]
    fn empty_ensemble() {
        let t = z_timeline().postselect("z", 0);
        assert!(matches!(enumerate(&t), Err(Error::EmptyEnsemble { .. })));
        assert!(matches!(
            sample(&t, 100, 1),
            Err(Error::NoAcceptedShots { .. }) | Err(Error::EmptyEnsemble { .. })
        ));
    }

    #[test]
    fn validation_reports_each_problem() {
        let t = Timeline::new([("q", 2), ("anc", 2)])
            .preselect(maximally_entangled(2).unwrap())
            .guard(&["anc"])
            .measure(Observable::sigma_z(), &["anc"], "a")
            .postselect("missing", 0)
            .measure(Observable::sigma_z(), &["nope"], "a");
        let errors = validate(&t).unwrap_err();
        assert!(errors.contains(&ValidationError::GuardViolation {
            index: 2,
            system: "anc".into()
        }));
        assert!(errors.contains(&ValidationError::UnknownLabel {
            index: 3,
            label: "missing".into()
        }));
        assert!(errors.contains(&ValidationError::UnknownSystem {
            index: 4,
            name: "nope".into()
        }));
        assert!(errors.contains(&ValidationError::DuplicateLabel {
            index: 4,
            label: "a".into()
        }));
    }

    #[test]
    fn preselect_must_be_first() {
        let t = Timeline::new([("q", 2)])
            .measure(Observable::sigma_z(), &["q"], "z")
            .preselect(named_qubit("zero").unwrap());
        let errors = validate(&t).unwrap_err();
        assert!(errors.contains(&ValidationError::NoPreselect));
        assert!(errors.contains(&ValidationError::PreselectNotFirst { index: 1 }));
    }

    #[test]
    fn branch_cap() {
        let t = Timeline::new([("q", 2)])
            .preselect(named_qubit("plus").unwrap())
            .measure(Observable::sigma_z(), &["q"], "a")
            .unitary(crate::measure::pauli::hadamard(), &["q"])
            .measure(Observable::sigma_z(), &["q"], "b");
        assert_eq!(
            enumerate_with_cap(&t, 3),
            Err(Error::BranchCapExceeded { needed: 4, cap: 3 })
        );
        assert!(enumerate_with_cap(&t, 4).is_ok());
    }

    #[test]
    fn sampler_is_deterministic() {
        let t = Timeline::new([("q", 2)])
            .preselect(named_qubit("zero").unwrap())
            .measure(Observable::sigma_x(), &["q"], "x");
        let a = sample(&t, 5000, 7).unwrap();
        let b = sample(&t, 5000, 7).unwrap();
        assert_eq!(a, b);
        let c = sample(&t, 5000, 8).unwrap();
        assert_ne!(a.sampler().unwrap().records, c.sampler().unwrap().records);
    }

    #[test]
    fn conditional_and_joint() {
        let t = Timeline::new([("a", 2), ("b", 2)])
            .preselect(maximally_entangled(2).unwrap())
            .measure(Observable::sigma_z(), &["a"], "za")
            .measure(Observable::sigma_z(), &["b"], "zb");
        let r = enumerate(&t).unwrap();
        let joint = r.joint_over(&["za", "zb"]).unwrap();
        assert!((joint[&vec![0, 0]] - 0.5).abs() < 1e-15);
        assert!((joint[&vec![1, 1]] - 0.5).abs() < 1e-15);
        assert!(!joint.contains_key(&vec![0, 1]));
        let c = r.conditional("zb", &[("za", 1)]).unwrap();
        assert_eq!(c.probability(1), 1.0);
    }

    #[test]
    fn trace_decreasing_channel_postselects() {
        let up = Ket::basis(vec![2], 0).unwrap();
        let keep_up = Channel::post_selected(vec![LinearOp::projector(&up).unwrap()]).unwrap();
        let t = Timeline::new([("q", 2)])
            .preselect(named_qubit("plus").unwrap())
            .channel(keep_up, &["q"])
            .measure(Observable::sigma_z(), &["q"], "z");
        let r = enumerate(&t).unwrap();
        assert!((r.postselection_probability() - 0.5).abs() < 1e-15);
        assert!(
            (r.distribution("z")
                .unwrap()
                .probability_of_value(1.0)
                .unwrap()
                - 1.0)
                .abs()
                < 1e-15
        );
        let s = sample(&t, 4096, 3).unwrap();
        assert_eq!(
            s.distribution("z").unwrap().probability_of_value(1.0),
            Some(1.0)
        );
        let acc = s.postselection_probability();
        assert!((acc - 0.5).abs() < 5.0 * (0.25f64 / 4096.0).sqrt());
    }
}
