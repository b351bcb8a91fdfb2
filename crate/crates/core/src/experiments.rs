//! Built-in named experiments, each a small set of timelines plus the
//! quantities worth reporting.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::Ket;
use crate::measure::{born_of_backward, Observable};
use crate::protocols::{
    audit_timeline, cloning_signaling_audit, erase_past, flip_timeline, flip_verification,
    forward_flip_mixed_timeline, ideal_backward_cloner, teleport_backward_experiment,
    teleport_backward_timeline, AuditCandidate, SpinBasis,
};
use crate::random;
use crate::states::{named_qubit, BackwardState, ForwardState};
use crate::timeline::{enumerate, RunResult, Timeline};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const CATALOG: [ExperimentInfo; 5] = [
    ExperimentInfo {
        name: "erase",
        summary: "erase a system's past by entangling it with a guarded ancilla; \
                  intermediate statistics then follow the post-selection alone",
    },
    ExperimentInfo {
        name: "three-box",
        summary: "ball pre- and post-selected over three boxes is found with certainty \
                  in box 1 and, separately, in box 2",
    },
    ExperimentInfo {
        name: "teleport-backward",
        summary: "teleport a backward-evolving state from Victor to Victoria through a \
                  Bell measurement and Pauli corrections",
    },
    ExperimentInfo {
        name: "flip",
        summary: "turn a backward-evolving qubit state into a forward-evolving one \
                  with a singlet; the forward-to-backward attempt fails",
    },
    ExperimentInfo {
        name: "cloning-audit",
        summary: "cloning backward states would let a later choice change earlier \
                  statistics; physical channels never do",
    },
];

pub fn names() -> Vec<&'static str> {
    CATALOG.iter().map(|e| e.name).collect()
}

/// Candidate placed between the two times of the cloning audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelChoice {
    IdealCloner,
    Identity,
    RandomCptp,
}

impl ChannelChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ideal-cloner" => Some(Self::IdealCloner),
            "identity" => Some(Self::Identity),
            "random-cptp" => Some(Self::RandomCptp),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOptions {
    /// Victor's observable and post-selected outcome index.
    pub a_observable: Observable,
    pub a_outcome: usize,
    /// Victoria's observable.
    pub b_observable: Observable,
    /// Backward state used by `erase` and `flip`.
    pub chi: BackwardState,
    /// Intermediate observable of `erase`.
    pub intermediate: Observable,
    pub channel: ChannelChoice,
    pub trials: usize,
    pub kraus_count: usize,
    pub seed: u64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        let z = Observable::sigma_z();
        let up = z.outcome_index(1.0).expect("σ_z has +1");
        Self {
            a_observable: z.clone(),
            a_outcome: up,
            b_observable: z,
            chi: named_qubit("plus").expect("named").to_backward(),
            intermediate: Observable::sigma_x(),
            channel: ChannelChoice::IdealCloner,
            trials: 100,
            kraus_count: 3,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedRun {
    pub name: String,
    pub result: RunResult,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub name: &'static str,
    /// The quantities the experiment exists to show, in display order.
    pub headline: Vec<(String, f64)>,
    pub runs: Vec<NamedRun>,
}

impl ExperimentReport {
    pub fn headline_value(&self, key: &str) -> Option<f64> {
        self.headline
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }
}

fn info(name: &str) -> Result<&'static ExperimentInfo> {
    CATALOG
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownExperiment {
            name: name.to_string(),
            available: names().join(", "),
        })
}

/// The timelines an experiment evaluates, by run name.
pub fn timelines(name: &str, opts: &ExperimentOptions) -> Result<Vec<(String, Timeline)>> {
    let name = info(name)?.name;
    let named = |n: &str, t: Timeline| (n.to_string(), t);
    Ok(match name {
        "erase" => vec![
            named("unselected", erase_unselected(opts)?),
            named("post-selected", erase_selected(opts)?),
        ],
        "three-box" => (0..3)
            .map(|b| Ok((format!("box{}", b + 1), three_box(b)?)))
            .collect::<Result<_>>()?,
        "teleport-backward" => vec![named(
            "teleport",
            teleport_backward_timeline(&opts.a_observable, opts.a_outcome, &opts.b_observable)?,
        )],
        "flip" => vec![
            named("singlet", flip_timeline(&opts.chi)?),
            named("forward-attempt", forward_flip_mixed_timeline()),
        ],
        "cloning-audit" => {
            let cloner = ideal_backward_cloner();
            let mut out = Vec::new();
            for later in SpinBasis::BOTH {
                for earlier in SpinBasis::BOTH {
                    out.push((
                        format!("later-{}/half-{}", later.name(), earlier.name()),
                        audit_timeline(cloner.channel_for(later), earlier, later)?,
                    ));
                }
            }
            out
        }
        _ => unreachable!("catalog names are exhaustive"),
    })
}

/// Every built-in timeline with default options.
pub fn builtin_timelines() -> Vec<(String, Timeline)> {
    let opts = ExperimentOptions::default();
    CATALOG
        .iter()
        .flat_map(|e| {
            timelines(e.name, &opts)
                .expect("defaults are valid")
                .into_iter()
                .map(move |(run, t)| (format!("{}:{run}", e.name), t))
        })
        .collect()
}

pub fn run_experiment(name: &str, opts: &ExperimentOptions) -> Result<ExperimentReport> {
    let name = info(name)?.name;
    match name {
        "erase" => run_erase(opts),
        "three-box" => run_three_box(),
        "teleport-backward" => run_teleport(opts),
        "flip" => run_flip(opts),
        "cloning-audit" => run_audit(opts),
        _ => unreachable!("catalog names are exhaustive"),
    }
}

fn exact_runs(list: Vec<(String, Timeline)>) -> Result<Vec<NamedRun>> {
    list.into_iter()
        .map(|(name, t)| {
            Ok(NamedRun {
                name,
                result: enumerate(&t)?,
            })
        })
        .collect()
}

fn label_value(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e6 {
        format!("{v:+}")
    } else {
        format!("{v:+.6}")
    }
}

// --- erase -----------------------------------------------------------------

fn erase_unselected(opts: &ExperimentOptions) -> Result<Timeline> {
    let d = opts.intermediate.side();
    Ok(erase_past(d)?.timeline("system", "ancilla").measure(
        opts.intermediate.clone(),
        &["system"],
        "intermediate",
    ))
}

fn erase_selected(opts: &ExperimentOptions) -> Result<Timeline> {
    let post = Observable::projector_onto(&opts.chi.outcome())?;
    let found = post.outcome_index(1.0).expect("projector has eigenvalue 1");
    Ok(erase_unselected(opts)?
        .measure(post, &["system"], "final")
        .postselect("final", found))
}

fn run_erase(opts: &ExperimentOptions) -> Result<ExperimentReport> {
    let runs = exact_runs(timelines("erase", opts)?)?;
    let expected = born_of_backward(&opts.chi, &opts.intermediate)?;
    let got = runs[1]
        .result
        .distribution("intermediate")
        .expect("measured");
    let mut headline: Vec<(String, f64)> = got
        .iter()
        .map(|(o, p)| (format!("p({})", label_value(o.eigenvalue)), p))
        .collect();
    headline.push(("max_deviation".into(), got.max_abs_diff(&expected)));
    Ok(ExperimentReport {
        name: "erase",
        headline,
        runs,
    })
}

// --- three boxes -----------------------------------------------------------

fn three_box_states() -> (ForwardState, Ket) {
    let s = 1.0 / 3f64.sqrt();
    let pre = ForwardState::new(Ket::from_real(&[s, s, s]).expect("3")).expect("normalized");
    let post = Ket::from_real(&[s, s, -s]).expect("3");
    (pre, post)
}

/// Opens box `b` (0-based) between the pre- and post-selection.
pub fn three_box(b: usize) -> Result<Timeline> {
    let (pre, post) = three_box_states();
    let open = Observable::projector_onto(&Ket::basis(vec![3], b)?)?;
    let post = Observable::projector_onto(&post)?;
    let found = post.outcome_index(1.0).expect("projector has eigenvalue 1");
    Ok(Timeline::new([("ball", 3)])
        .preselect(pre)
        .measure(open, &["ball"], "open")
        .measure(post, &["ball"], "post")
        .postselect("post", found))
}

fn run_three_box() -> Result<ExperimentReport> {
    let runs = exact_runs(timelines("three-box", &ExperimentOptions::default())?)?;
    let headline = runs
        .iter()
        .map(|r| {
            let p = r
                .result
                .distribution("open")
                .and_then(|d| d.probability_of_value(1.0))
                .expect("measured");
            (format!("p_found_{}", r.name), p)
        })
        .collect();
    Ok(ExperimentReport {
        name: "three-box",
        headline,
        runs,
    })
}

// --- teleportation ---------------------------------------------------------

fn run_teleport(opts: &ExperimentOptions) -> Result<ExperimentReport> {
    let report =
        teleport_backward_experiment(&opts.a_observable, opts.a_outcome, &opts.b_observable)?;
    let mut headline: Vec<(String, f64)> = report
        .victoria
        .iter()
        .map(|(o, p)| (format!("p({})", label_value(o.eigenvalue)), p))
        .collect();
    for b in &report.branches {
        headline.push((format!("p_bell_{}", b.outcome.name()), b.probability));
    }
    headline.push(("max_deviation".into(), report.max_deviation()));
    headline.push((
        "postselection_probability".into(),
        report.postselection_probability,
    ));
    Ok(ExperimentReport {
        name: "teleport-backward",
        headline,
        runs: vec![NamedRun {
            name: "teleport".into(),
            result: report.run,
        }],
    })
}

// --- flip ------------------------------------------------------------------

fn run_flip(opts: &ExperimentOptions) -> Result<ExperimentReport> {
    let v = flip_verification(&opts.chi)?;
    let runs = exact_runs(timelines("flip", opts)?)?;
    let singlet_outcome = crate::states::BellState::PsiMinus as usize;
    let p_singlet = runs[1]
        .result
        .distribution("bell")
        .expect("measured")
        .probability(singlet_outcome);
    let amps = v.flipped.ket().amplitudes();
    Ok(ExperimentReport {
        name: "flip",
        headline: vec![
            ("flipped_up_re".into(), amps[0].re),
            ("flipped_up_im".into(), amps[0].im),
            ("flipped_down_re".into(), amps[1].re),
            ("flipped_down_im".into(), amps[1].im),
            ("fidelity".into(), v.fidelity),
            ("check_probability".into(), v.check_probability),
            ("forward_flip_success_probability".into(), p_singlet),
        ],
        runs,
    })
}

// --- cloning audit ---------------------------------------------------------

fn run_audit(opts: &ExperimentOptions) -> Result<ExperimentReport> {
    match opts.channel {
        ChannelChoice::IdealCloner => {
            let r = cloning_signaling_audit(&ideal_backward_cloner())?;
            let runs = exact_runs(timelines("cloning-audit", opts)?)?;
            Ok(ExperimentReport {
                name: "cloning-audit",
                headline: vec![
                    ("trace_distance".into(), r.trace_distance),
                    ("half_sigma_z_distance".into(), r.half_distances[0]),
                    ("half_sigma_x_distance".into(), r.half_distances[1]),
                    ("physical".into(), 0.0),
                ],
                runs,
            })
        }
        ChannelChoice::Identity => {
            let ch = Channel::identity(vec![2, 2])?;
            single_channel_audit(&ch)
        }
        ChannelChoice::RandomCptp => {
            let trials = opts.trials.max(1);
            let distances = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let ch = random_trial_channel(opts.seed, i as u64, opts.kraus_count);
                    cloning_signaling_audit(&ch).map(|r| r.trace_distance)
                })
                .collect::<Result<Vec<_>>>()?;
            let first = random_trial_channel(opts.seed, 0, opts.kraus_count);
            let mut report = single_channel_audit(&first)?;
            report.headline = vec![
                (
                    "max_trace_distance".into(),
                    distances.iter().copied().fold(0.0, f64::max),
                ),
                ("trials".into(), trials as f64),
                ("physical".into(), 1.0),
            ];
            Ok(report)
        }
    }
}

/// The `i`-th random channel of an audit with `seed`; each trial has its own
/// generator so results do not depend on scheduling.
pub fn random_trial_channel(seed: u64, i: u64, kraus_count: usize) -> Channel {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(i);
    random::channel(vec![2, 2], kraus_count.max(1), &mut rng)
}

fn single_channel_audit(ch: &Channel) -> Result<ExperimentReport> {
    let r = cloning_signaling_audit(ch)?;
    let mut runs = Vec::new();
    for later in SpinBasis::BOTH {
        for earlier in SpinBasis::BOTH {
            runs.push(NamedRun {
                name: format!("later-{}/half-{}", later.name(), earlier.name()),
                result: enumerate(&audit_timeline(ch, earlier, later)?)?,
            });
        }
    }
    Ok(ExperimentReport {
        name: "cloning-audit",
        headline: vec![
            ("trace_distance".into(), r.trace_distance),
            ("physical".into(), if r.physical { 1.0 } else { 0.0 }),
        ],
        runs,
    })
}
