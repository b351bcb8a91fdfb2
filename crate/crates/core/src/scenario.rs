//! JSON scenario documents.
//!
//! ```json
//! {
//!   "version": 1,
//!   "systems": [{"name": "ball", "dim": 3}],
//!   "events": [
//!     {"type": "preselect", "state": [[0.57735, 0], [0.57735, 0], [0.57735, 0]]},
//!     {"type": "measure", "observable": {"projector": [[1, 0], [0, 0], [0, 0]]},
//!      "targets": ["ball"], "label": "open"}
//!   ]
//! }
//! ```
//!
//! Amplitudes and matrix entries are `[re, im]` pairs or plain reals;
//! matrices are row-major. States and operators may also be given by name or
//! built with `tensor`, `projector`, `max_entangled` and `identity`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::Channel;
use crate::error::Error;
use crate::linalg::{tensor_all, Ket, LinearOp, C64, DEFAULT_GROUP_TOL};
use crate::measure::{pauli, Observable};
use crate::states::{
    bell_operator, maximally_entangled, named_qubit, singlet, BellState, ForwardState,
};
use crate::timeline::{validate, Event, System, Timeline, ValidationError};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("malformed scenario: {0}")]
    Json(String),
    #[error("unsupported scenario version {0}")]
    Version(u32),
    #[error("event {index}: {message}")]
    Event { index: usize, message: String },
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ValidationError>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Complex([f64; 2]),
    Real(f64),
}

impl Amplitude {
    fn value(self) -> C64 {
        match self {
            Amplitude::Complex([re, im]) => C64::new(re, im),
            Amplitude::Real(re) => C64::new(re, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Amplitudes(Vec<Amplitude>),
    Built(StateExpr),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateExpr {
    Tensor(Vec<StateSpec>),
    MaxEntangled(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpSpec {
    Named(String),
    Matrix(Vec<Vec<Amplitude>>),
    Built(OpExpr),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OpExpr {
    Tensor(Vec<OpSpec>),
    Projector(StateSpec),
    Identity(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub name: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventDoc {
    Preselect {
        state: StateSpec,
    },
    Unitary {
        op: OpSpec,
        targets: Vec<String>,
    },
    Measure {
        observable: OpSpec,
        targets: Vec<String>,
        label: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group_tol: Option<f64>,
    },
    Postselect {
        label: String,
        outcome: usize,
    },
    Guard {
        targets: Vec<String>,
    },
    Feedforward {
        on: String,
        ops: Vec<OpSpec>,
        targets: Vec<String>,
    },
    Channel {
        kraus: Vec<OpSpec>,
        targets: Vec<String>,
        #[serde(default = "yes", skip_serializing_if = "is_true")]
        physical: bool,
    },
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDoc {
    pub version: u32,
    pub systems: Vec<SystemDoc>,
    pub events: Vec<EventDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    #[serde(default)]
    version: Option<u32>,
    systems: Vec<SystemDoc>,
    events: Vec<serde_json::Value>,
}

/// Named states: the single-qubit axis states, `singlet`, the four
/// `bell_*` states and `max_entangled` (two qubits).
pub fn named_state(name: &str) -> Option<ForwardState> {
    match name {
        "singlet" => Some(singlet()),
        "bell_phi_plus" => Some(BellState::PhiPlus.state()),
        "bell_phi_minus" => Some(BellState::PhiMinus.state()),
        "bell_psi_plus" => Some(BellState::PsiPlus.state()),
        "bell_psi_minus" => Some(BellState::PsiMinus.state()),
        "max_entangled" => maximally_entangled(2).ok(),
        _ => named_qubit(name),
    }
}

/// Named operators: `sigma_x`, `sigma_y`, `sigma_z`, `hadamard`,
/// `identity` (qubit) and `bell_basis`.
pub fn named_op(name: &str) -> Option<LinearOp> {
    match name {
        "sigma_x" => Some(pauli::x()),
        "sigma_y" => Some(pauli::y()),
        "sigma_z" => Some(pauli::z()),
        "hadamard" => Some(pauli::hadamard()),
        "identity" => Some(pauli::identity()),
        "bell_basis" => Some(bell_operator()),
        _ => None,
    }
}

type Msg = String;

fn lib(e: Error) -> Msg {
    e.to_string()
}

/// Unnormalized ket described by `spec`.
pub fn resolve_state(spec: &StateSpec) -> Result<Ket, Msg> {
    match spec {
        StateSpec::Named(n) => named_state(n)
            .map(|s| s.ket().clone())
            .ok_or_else(|| format!("unknown state `{n}`")),
        StateSpec::Amplitudes(a) => {
            Ket::from_amplitudes(a.iter().map(|x| x.value()).collect()).map_err(lib)
        }
        StateSpec::Built(StateExpr::MaxEntangled(d)) => maximally_entangled(*d)
            .map(|s| s.ket().clone())
            .map_err(lib),
        StateSpec::Built(StateExpr::Tensor(parts)) => {
            let kets = parts
                .iter()
                .map(resolve_state)
                .collect::<Result<Vec<_>, _>>()?;
            tensor_all(&kets).ok_or_else(|| "empty tensor product".to_string())
        }
    }
}

pub fn resolve_op(spec: &OpSpec) -> Result<LinearOp, Msg> {
    match spec {
        OpSpec::Named(n) => named_op(n).ok_or_else(|| format!("unknown operator `{n}`")),
        OpSpec::Matrix(rows) => {
            let rows: Vec<Vec<C64>> = rows
                .iter()
                .map(|r| r.iter().map(|x| x.value()).collect())
                .collect();
            LinearOp::from_rows(&rows).map_err(lib)
        }
        OpSpec::Built(OpExpr::Identity(d)) => LinearOp::identity(vec![*d]).map_err(lib),
        OpSpec::Built(OpExpr::Projector(s)) => {
            let k = resolve_state(s)?.normalized().map_err(lib)?;
            LinearOp::projector(&k).map_err(lib)
        }
        OpSpec::Built(OpExpr::Tensor(parts)) => {
            let ops = parts
                .iter()
                .map(resolve_op)
                .collect::<Result<Vec<_>, _>>()?;
            tensor_all(&ops).ok_or_else(|| "empty tensor product".to_string())
        }
    }
}

/// Gives `op` the subsystem structure of its targets when sizes agree;
/// mismatches are left for validation to report.
fn shape_op(op: LinearOp, targets: &[String], systems: &[SystemDoc]) -> LinearOp {
    let dims: Option<Vec<usize>> = targets
        .iter()
        .map(|t| systems.iter().find(|s| &s.name == t).map(|s| s.dim))
        .collect();
    match dims {
        Some(d) if d.iter().product::<usize>() == op.side() => op.with_dims(d).unwrap_or(op),
        _ => op,
    }
}

fn build_event(doc: &EventDoc, systems: &[SystemDoc]) -> Result<Event, Msg> {
    Ok(match doc {
        EventDoc::Preselect { state } => {
            let ket = resolve_state(state)?;
            let dims: Vec<usize> = systems.iter().map(|s| s.dim).collect();
            let ket = if dims.iter().product::<usize>() == ket.len() && !dims.is_empty() {
                ket.with_dims(dims).map_err(lib)?
            } else {
                ket
            };
            Event::Preselect(ForwardState::new(ket).map_err(lib)?)
        }
        EventDoc::Unitary { op, targets } => Event::Unitary {
            op: shape_op(resolve_op(op)?, targets, systems),
            targets: targets.clone(),
        },
        EventDoc::Measure {
            observable,
            targets,
            label,
            group_tol,
        } => {
            let op = shape_op(resolve_op(observable)?, targets, systems);
            let tol = group_tol.unwrap_or(DEFAULT_GROUP_TOL);
            Event::Measure {
                observable: Observable::with_tolerance(op, tol).map_err(lib)?,
                targets: targets.clone(),
                label: label.clone(),
            }
        }
        EventDoc::Postselect { label, outcome } => Event::Postselect {
            label: label.clone(),
            outcome: *outcome,
        },
        EventDoc::Guard { targets } => Event::Guard {
            targets: targets.clone(),
        },
        EventDoc::Feedforward { on, ops, targets } => Event::Feedforward {
            on: on.clone(),
            ops: ops
                .iter()
                .map(|o| Ok(shape_op(resolve_op(o)?, targets, systems)))
                .collect::<Result<_, Msg>>()?,
            targets: targets.clone(),
        },
        EventDoc::Channel {
            kraus,
            targets,
            physical,
        } => {
            let ops = kraus
                .iter()
                .map(|o| Ok(shape_op(resolve_op(o)?, targets, systems)))
                .collect::<Result<Vec<_>, Msg>>()?;
            let channel = if *physical {
                Channel::physical(ops)
            } else {
                Channel::post_selected(ops)
            }
            .map_err(lib)?;
            Event::Channel {
                channel,
                targets: targets.clone(),
            }
        }
    })
}

/// Parses a scenario document into a validated timeline.
pub fn parse_scenario(text: &str) -> Result<Timeline, ScenarioError> {
    let raw: RawDoc = serde_json::from_str(text).map_err(|e| ScenarioError::Json(e.to_string()))?;
    if let Some(v) = raw.version {
        if v != SCENARIO_VERSION {
            return Err(ScenarioError::Version(v));
        }
    }
    let mut events = Vec::with_capacity(raw.events.len());
    for (index, value) in raw.events.into_iter().enumerate() {
        let doc: EventDoc = serde_json::from_value(value).map_err(|e| ScenarioError::Event {
            index,
            message: e.to_string(),
        })?;
        let event = build_event(&doc, &raw.systems)
            .map_err(|message| ScenarioError::Event { index, message })?;
        events.push(event);
    }
    let systems = raw
        .systems
        .into_iter()
        .map(|s| System {
            name: s.name,
            dim: s.dim,
        })
        .collect();
    let t = Timeline::from_parts(systems, events);
    validate(&t).map_err(ScenarioError::Invalid)?;
    Ok(t)
}

fn amps(values: &[C64]) -> Vec<Amplitude> {
    values
        .iter()
        .map(|z| Amplitude::Complex([z.re, z.im]))
        .collect()
}

fn matrix(op: &LinearOp) -> OpSpec {
    let n = op.side();
    OpSpec::Matrix(
        (0..n)
            .map(|r| (0..n).map(|c| op.entry(r, c)).collect::<Vec<_>>())
            .map(|row| amps(&row))
            .collect(),
    )
}

/// Explicit-form document for a timeline: every state and operator is
/// written out as numbers.
pub fn to_document(t: &Timeline) -> ScenarioDoc {
    let events = t
        .events()
        .iter()
        .map(|e| match e {
            Event::Preselect(s) => EventDoc::Preselect {
                state: StateSpec::Amplitudes(amps(s.ket().amplitudes())),
            },
            Event::Unitary { op, targets } => EventDoc::Unitary {
                op: matrix(op),
                targets: targets.clone(),
            },
            Event::Measure {
                observable,
                targets,
                label,
            } => EventDoc::Measure {
                observable: matrix(observable.op()),
                targets: targets.clone(),
                label: label.clone(),
                group_tol: (observable.group_tol() != DEFAULT_GROUP_TOL)
                    .then_some(observable.group_tol()),
            },
            Event::Postselect { label, outcome } => EventDoc::Postselect {
                label: label.clone(),
                outcome: *outcome,
            },
            Event::Guard { targets } => EventDoc::Guard {
                targets: targets.clone(),
            },
            Event::Feedforward { on, ops, targets } => EventDoc::Feedforward {
                on: on.clone(),
                ops: ops.iter().map(matrix).collect(),
                targets: targets.clone(),
            },
            Event::Channel { channel, targets } => EventDoc::Channel {
                kraus: channel.kraus().iter().map(matrix).collect(),
                targets: targets.clone(),
                physical: channel.is_physical(),
            },
        })
        .collect();
    ScenarioDoc {
        version: SCENARIO_VERSION,
        systems: t
            .systems()
            .iter()
            .map(|s| SystemDoc {
                name: s.name.clone(),
                dim: s.dim,
            })
            .collect(),
        events,
    }
}

pub fn to_json(t: &Timeline) -> String {
    serde_json::to_string_pretty(&to_document(t)).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_BOX: &str = r#"{
        "systems": [{"name": "ball", "dim": 3}],
        "events": [
            {"type": "preselect", "state": [0.5773502691896258, 0.5773502691896258, 0.5773502691896258]},
            {"type": "measure", "observable": {"projector": [1, 0, 0]}, "targets": ["ball"], "label": "open"},
            {"type": "measure", "observable": {"projector": [1, 1, -1]}, "targets": ["ball"], "label": "post"},
            {"type": "postselect", "label": "post", "outcome": 1}
        ]
    }"#;

    #[test]
    fn parses_three_box() {
        let t = parse_scenario(THREE_BOX).unwrap();
        let r = crate::timeline::enumerate(&t).unwrap();
        let p = r
            .distribution("open")
            .unwrap()
            .probability_of_value(1.0)
            .unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn names_and_builders() {
        let doc = r#"{
            "systems": [{"name": "a", "dim": 2}, {"name": "b", "dim": 2}, {"name": "c", "dim": 2}],
            "events": [
                {"type": "preselect", "state": {"tensor": ["singlet", "up"]}},
                {"type": "guard", "targets": ["b"]},
                {"type": "unitary", "op": {"tensor": ["hadamard", "sigma_x"]}, "targets": ["a", "c"]},
                {"type": "measure", "observable": "sigma_z", "targets": ["c"], "label": "z"}
            ]
        }"#;
        let t = parse_scenario(doc).unwrap();
        assert_eq!(t.events().len(), 4);
        assert_eq!(t.dims(), vec![2, 2, 2]);
    }

    #[test]
    fn bad_event_type_names_index() {
        let doc = r#"{"systems": [{"name": "q", "dim": 2}],
            "events": [{"type": "preselect", "state": "up"}, {"type": "teleport"}]}"#;
        let err = parse_scenario(doc).unwrap_err();
        assert!(matches!(err, ScenarioError::Event { index: 1, .. }));
        assert!(err.to_string().starts_with("event 1:"));
    }

    #[test]
    fn validation_errors_surface() {
        let doc = r#"{"systems": [{"name": "q", "dim": 2}],
            "events": [{"type": "preselect", "state": "up"},
                       {"type": "postselect", "label": "nowhere", "outcome": 0}]}"#;
        assert!(matches!(
            parse_scenario(doc),
            Err(ScenarioError::Invalid(_))
        ));
    }

    #[test]
    fn explicit_form_is_a_fixed_point() {
        let t = parse_scenario(THREE_BOX).unwrap();
        let once = to_json(&t);
        let twice = to_json(&parse_scenario(&once).unwrap());
        assert_eq!(once, twice);
    }
}
