//! Gedanken protocols built on the timeline engine: erasing the past of a
//! system, teleporting a backward state, flipping its time direction, and
//! auditing a would-be cloner of backward states for signaling.

use nalgebra::DMatrix;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{c, contract_functional, tensor, Ket, LinearOp, C64};
use crate::measure::{pauli, Observable, OutcomeDistribution};
use crate::states::{
    bell_operator, maximally_entangled, named_qubit, singlet, BackwardState, BellState,
    ForwardState,
};
use crate::timeline::{enumerate, sample, Event, RunResult, Timeline};

// ---------------------------------------------------------------------------
// Erasure of the past

/// Names the ancilla that must stay unmeasured after an erasure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardToken {
    subsystem: usize,
}

impl GuardToken {
    /// Position of the guarded ancilla within the erased state.
    pub fn subsystem(&self) -> usize {
        self.subsystem
    }

    /// Appends the matching `Guard` event: the ancilla is the
    /// `subsystem()`-th of `names`.
    pub fn guard(&self, timeline: Timeline, names: &[&str]) -> Timeline {
        timeline.guard(&[names[self.subsystem]])
    }
}

/// A system whose past has been erased: it is maximally entangled with an
/// ancilla that nobody may touch.
#[derive(Clone, Debug, PartialEq)]
pub struct ErasedPast {
    pub state: ForwardState,
    pub token: GuardToken,
}

impl ErasedPast {
    /// A timeline over `(system, ancilla)` that starts in the erased state
    /// with the ancilla guarded.
    pub fn timeline(&self, system: &str, ancilla: &str) -> Timeline {
        let d = self.state.dims()[0];
        let t = Timeline::new([(system, d), (ancilla, d)]).preselect(self.state.clone());
        self.token.guard(t, &[system, ancilla])
    }
}

pub fn erase_past(system_dim: usize) -> Result<ErasedPast> {
    Ok(ErasedPast {
        state: maximally_entangled(system_dim)?,
        token: GuardToken { subsystem: 1 },
    })
}

// ---------------------------------------------------------------------------
// Time-direction flip

fn require_qubit(dims: &[usize], len: usize) -> Result<()> {
    if len != 2 || dims.len() != 1 {
        return Err(Error::DimMismatch {
            expected: 2,
            found: len,
        });
    }
    Ok(())
}

/// `α⟨↑| + β⟨↓|  ↦  −β*|↑⟩ + α*|↓⟩`, where `α, β` are the amplitudes of the
/// outcome ket whose bra is `chi`. In stored coefficients `(c₀, c₁)` this is
/// `(−c₁, c₀)`.
pub fn flip_backward_to_forward(chi: &BackwardState) -> Result<ForwardState> {
    require_qubit(chi.dims(), chi.len())?;
    let cf = chi.coefficients().amplitudes();
    ForwardState::new(Ket::from_amplitudes(vec![-cf[1], cf[0]])?)
}

/// The backward counterpart a forward state would have to be flipped into:
/// `α|↑⟩ + β|↓⟩  ↦  −β⟨↑| + α⟨↓|` (coefficients), which is what a singlet
/// projection leaves behind.
pub fn flip_target_of_forward(psi: &ForwardState) -> Result<BackwardState> {
    require_qubit(psi.dims(), psi.len())?;
    let a = psi.ket().amplitudes();
    BackwardState::from_coefficients(Ket::from_amplitudes(vec![-a[1], a[0]])?)
}

/// Singlet timeline that post-selects `system` on `chi` and then checks
/// whether `ancilla` is in `flip(chi)`.
pub fn flip_timeline(chi: &BackwardState) -> Result<Timeline> {
    let flipped = flip_backward_to_forward(chi)?;
    let post = Observable::projector_onto(&chi.outcome())?;
    let found = post.outcome_index(1.0).expect("projector has eigenvalue 1");
    let check = Observable::projector_onto(flipped.ket())?;
    Ok(Timeline::new([("system", 2), ("ancilla", 2)])
        .preselect(singlet())
        .measure(post, &["system"], "post")
        .postselect("post", found)
        .measure(check, &["ancilla"], "check"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlipVerification {
    /// The flipped state predicted by the formula.
    pub flipped: ForwardState,
    /// Ancilla state after post-selecting the system on `chi`.
    pub conditional: ForwardState,
    /// `|⟨flipped|conditional⟩|²`.
    pub fidelity: f64,
    /// Probability that the ancilla is found in `flipped`, from the engine.
    pub check_probability: f64,
    /// Probability of the post-selection itself.
    pub postselection_probability: f64,
}

/// Operational check of the flip: a singlet, post-selected on `chi` at the
/// system, leaves the ancilla in `flip(chi)`.
pub fn flip_verification(chi: &BackwardState) -> Result<FlipVerification> {
    let flipped = flip_backward_to_forward(chi)?;
    let singlet = singlet();
    let rest = contract_functional(
        chi.coefficients().amplitudes(),
        &[0],
        singlet.dims(),
        singlet.ket().amplitudes(),
    );
    let conditional = ForwardState::normalize(Ket::from_amplitudes(rest)?)?;
    let fidelity = flipped.fidelity(&conditional)?;

    let t = flip_timeline(chi)?;
    let run = enumerate(&t)?;
    let check = run.distribution("check").expect("measured");
    let found = check
        .probability_of_value(1.0)
        .expect("projector has eigenvalue 1");
    Ok(FlipVerification {
        flipped,
        conditional,
        fidelity,
        check_probability: found,
        postselection_probability: run.postselection_probability(),
    })
}

/// What happens when a Bell measurement is used to flip a forward state.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardFlipReport {
    /// Probability of each Bell outcome (all equal to 1/4).
    pub outcome_probabilities: [f64; 4],
    /// `|⟨target|left behind⟩|²` per Bell outcome; 1 only for the singlet.
    pub fidelities: [f64; 4],
    /// Per outcome, the ancilla unitary (applied before the Bell measurement)
    /// that would have turned that outcome's leftover into the target.
    pub corrections: [LinearOp; 4],
    /// Two inputs that, for the same non-singlet outcome reached with the
    /// singlet's correction, need different repairs: a witness that one
    /// outcome-independent correction does not exist.
    pub witness: CorrectionWitness,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionWitness {
    pub outcome_a: BellState,
    pub outcome_b: BellState,
    /// `|tr(V_a† V_b)| / 2`; 1 iff the corrections agree up to phase.
    pub overlap: f64,
    /// Fidelity reached on `input` if outcome `b` occurs but correction `a`
    /// was applied.
    pub fidelity_with_wrong_correction: f64,
    pub input: ForwardState,
}

/// Leftover backward coefficients on the ancilla after the Bell outcome `k`
/// on `(system, ancilla)` given system input `psi` (unnormalized).
fn leftover(psi: &Ket, k: BellState) -> Vec<C64> {
    let bell = k.state();
    let b = bell.ket().amplitudes();
    (0..2)
        .map(|j| {
            (0..2)
                .map(|i| b[2 * i + j].conj() * psi.amplitudes()[i])
                .sum()
        })
        .collect()
}

/// Linear map `psi ↦ leftover(psi, k)`, scaled to be unitary.
fn leftover_map(k: BellState) -> DMatrix<C64> {
    let s = c(std::f64::consts::SQRT_2, 0.0);
    let mut m = DMatrix::<C64>::zeros(2, 2);
    for i in 0..2 {
        let e = Ket::basis(vec![2], i).expect("qubit");
        let col = leftover(&e, k);
        for j in 0..2 {
            m[(j, i)] = col[j] * s;
        }
    }
    m
}

/// Bell-measurement attempt to flip the forward state `psi` into a backward
/// state on the ancilla.
pub fn forward_flip_attempt(psi: &ForwardState) -> Result<ForwardFlipReport> {
    let target = flip_target_of_forward(psi)?;
    let flip_coeffs =
        DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);

    let mut probabilities = [0.0; 4];
    let mut fidelities = [0.0; 4];
    let mut corrections = Vec::with_capacity(4);
    for k in BellState::ALL {
        let left = leftover(psi.ket(), k);
        // The erased ancilla is maximally mixed, so the outcome has
        // probability ‖w‖²/2 for leftover functional w.
        let weight: f64 = left.iter().map(|a| a.norm_sqr()).sum();
        probabilities[k as usize] = weight / 2.0;
        let left = BackwardState::from_coefficients(Ket::from_amplitudes(left)?.normalized()?)?;
        fidelities[k as usize] = left.coefficients().inner(target.coefficients())?.norm_sqr();
        // A unitary V on the ancilla before the measurement turns
        // coefficients c into Vᵀc; we need Vᵀ A_k = S.
        let a = leftover_map(k);
        let vt = &flip_coeffs * a.adjoint();
        corrections.push(LinearOp::new(vt.transpose(), vec![2])?);
    }
    let corrections: [LinearOp; 4] = corrections.try_into().expect("four outcomes");

    let witness = correction_witness(&corrections)?;
    Ok(ForwardFlipReport {
        outcome_probabilities: probabilities,
        fidelities,
        corrections,
        witness,
    })
}

fn correction_witness(corrections: &[LinearOp; 4]) -> Result<CorrectionWitness> {
    let a = BellState::PsiMinus;
    let (b, overlap) = BellState::ALL
        .iter()
        .filter(|&&k| k != a)
        .map(|&k| {
            let prod = corrections[a as usize]
                .dagger()
                .mul(&corrections[k as usize])?;
            Ok((k, prod.trace().norm() / 2.0))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("three candidates");

    // Search the six axis states for the input hurt most by using `a`'s
    // correction when `b` occurs.
    let mut best: Option<(f64, ForwardState)> = None;
    for name in ["up", "down", "plus", "minus", "plus_i", "minus_i"] {
        let psi = named_qubit(name).expect("named");
        let target = flip_target_of_forward(&psi)?;
        // Apply V_a on the ancilla, then outcome b leaves Vᵀ_a A_b psi.
        let a_map = leftover_map(b);
        let coeffs = corrections[a as usize].matrix().transpose() * (a_map * psi.ket().vector());
        let got = Ket::from_amplitudes(coeffs.as_slice().to_vec())?.normalized()?;
        let f = got.inner(target.coefficients())?.norm_sqr();
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, psi));
        }
    }
    let (fidelity, input) = best.expect("six inputs");
    Ok(CorrectionWitness {
        outcome_a: a,
        outcome_b: b,
        overlap,
        fidelity_with_wrong_correction: fidelity,
        input,
    })
}

/// Bell measurement on a maximally mixed system (purified by `reference`)
/// and an erased ancilla; the singlet outcome is the only one that flips.
pub fn forward_flip_mixed_timeline() -> Timeline {
    let pair = maximally_entangled(2).expect("qubit");
    Timeline::new([
        ("system", 2),
        ("reference", 2),
        ("ancilla", 2),
        ("keeper", 2),
    ])
    .preselect(pair.tensor(&pair))
    .guard(&["reference", "keeper"])
    .measure(
        Observable::new(bell_operator()).expect("Hermitian"),
        &["system", "ancilla"],
        "bell",
    )
}

// ---------------------------------------------------------------------------
// Backward teleportation

/// Correction table for Bob, indexed by Bell outcome.
///
/// | Alice's outcome | Bob applies |
/// |-----------------|-------------|
/// | Φ+              | I           |
/// | Φ−              | Z           |
/// | Ψ+              | X           |
/// | Ψ−              | XZ          |
pub fn teleportation_corrections() -> [LinearOp; 4] {
    [
        pauli::identity(),
        pauli::z(),
        pauli::x(),
        pauli::x().mul(&pauli::z()).expect("2x2"),
    ]
}

/// Input-to-output map of standard teleportation for Bell outcome `k`,
/// correction included, scaled by 2 so that it is unitary.
pub fn teleportation_map(k: BellState) -> LinearOp {
    let phi_plus = BellState::PhiPlus.state();
    let bell = k.state();
    let correction = &teleportation_corrections()[k as usize];
    let mut m = DMatrix::<C64>::zeros(2, 2);
    for i in 0..2 {
        let input = ForwardState::basis(vec![2], i).expect("qubit");
        let joint = input.tensor(&phi_plus);
        let bob = contract_functional(
            bell.to_backward().coefficients().amplitudes(),
            &[0, 1],
            joint.dims(),
            joint.ket().amplitudes(),
        );
        let bob = Ket::from_amplitudes(bob).expect("qubit");
        let out = correction.apply(&bob).expect("2x2");
        for j in 0..2 {
            m[(j, i)] = out.amplitudes()[j] * c(2.0, 0.0);
        }
    }
    LinearOp::new(m, vec![2]).expect("2x2")
}

/// `|tr M|² / 4` for the corrected map `M` of outcome `k`.
pub fn teleport_process_fidelity(k: BellState) -> f64 {
    teleportation_map(k).trace().norm_sqr() / 4.0
}

/// Victoria measures `b_obs` on an erased system, Alice teleports it to
/// Bob, Bob corrects, and Victor measures `a_obs` and keeps outcome `a`.
pub fn teleport_backward_timeline(
    a_obs: &Observable,
    a: usize,
    b_obs: &Observable,
) -> Result<Timeline> {
    for obs in [a_obs, b_obs] {
        require_qubit(obs.dims(), obs.side())?;
    }
    if a >= a_obs.outcome_count() {
        return Err(Error::UnknownOutcome(format!(
            "index {a} for an observable with {} outcomes",
            a_obs.outcome_count()
        )));
    }
    let erased = erase_past(2)?;
    let pair = BellState::PhiPlus.state();
    Ok(
        Timeline::new([("system", 2), ("reference", 2), ("alice", 2), ("bob", 2)])
            .preselect(erased.state.tensor(&pair))
            .guard(&["reference"])
            .measure(b_obs.clone(), &["system"], "victoria")
            .measure(
                Observable::new(bell_operator())?,
                &["system", "alice"],
                "bell",
            )
            .feedforward("bell", teleportation_corrections().to_vec(), &["bob"])
            .measure(a_obs.clone(), &["bob"], "victor")
            .postselect("victor", a),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct BellBranch {
    pub outcome: BellState,
    pub correction: &'static str,
    /// Probability of this Bell outcome given Victor's post-selection.
    pub probability: f64,
    /// Victoria's distribution within this branch.
    pub victoria: OutcomeDistribution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TeleportReport {
    /// Victoria's outcome distribution given Victor's post-selection.
    pub victoria: OutcomeDistribution,
    /// `tr(P_a P_b) / tr(P_a)`, which is `|⟨B=b|A=a⟩|²` for a rank-one `P_a`.
    pub expected: Vec<f64>,
    pub branches: Vec<BellBranch>,
    pub postselection_probability: f64,
    pub run: RunResult,
}

impl TeleportReport {
    /// Largest deviation from `expected`, overall and within every branch.
    pub fn max_deviation(&self) -> f64 {
        std::iter::once(&self.victoria)
            .chain(self.branches.iter().map(|b| &b.victoria))
            .flat_map(|d| {
                d.probabilities()
                    .iter()
                    .zip(&self.expected)
                    .map(|(p, e)| (p - e).abs())
            })
            .fold(0.0, f64::max)
    }
}

const CORRECTION_NAMES: [&str; 4] = ["I", "Z", "X", "XZ"];

/// Expected statistics `tr(P_a P_b) / tr(P_a)` for Victoria's outcomes.
pub fn teleport_expected(a_obs: &Observable, a: usize, b_obs: &Observable) -> Vec<f64> {
    let pa = &a_obs.projectors()[a];
    let norm = pa.trace().re;
    b_obs
        .projectors()
        .iter()
        .map(|pb| pa.mul(pb).expect("same size").trace().re / norm)
        .collect()
}

fn selection_error(e: Error) -> Error {
    match e {
        Error::EmptyEnsemble { weight } => Error::InconsistentSelection { weight },
        other => other,
    }
}

pub fn teleport_backward_experiment(
    a_obs: &Observable,
    a: usize,
    b_obs: &Observable,
) -> Result<TeleportReport> {
    let t = teleport_backward_timeline(a_obs, a, b_obs)?;
    let run = enumerate(&t).map_err(selection_error)?;
    let victoria = run.distribution("victoria").expect("measured").clone();
    let bell = run.distribution("bell").expect("measured").clone();
    let branches = BellState::ALL
        .iter()
        .map(|&k| {
            Ok(BellBranch {
                outcome: k,
                correction: CORRECTION_NAMES[k as usize],
                probability: bell.probability(k as usize),
                victoria: run.conditional("victoria", &[("bell", k as usize)])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TeleportReport {
        victoria,
        expected: teleport_expected(a_obs, a, b_obs),
        branches,
        postselection_probability: run.postselection_probability(),
        run,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledTeleport {
    pub victoria: OutcomeDistribution,
    pub expected: Vec<f64>,
    pub shots: usize,
    pub accepted: usize,
    pub seed: u64,
}

impl SampledTeleport {
    /// Largest `|p̂ − p| / σ` with `σ = √(p(1−p)/n)` over Victoria's outcomes;
    /// outcomes with `p ∈ {0, 1}` must match exactly and count as 0 or ∞.
    pub fn max_z_score(&self) -> f64 {
        let n = self.accepted as f64;
        self.victoria
            .probabilities()
            .iter()
            .zip(&self.expected)
            .map(|(&got, &p)| {
                let sigma = (p * (1.0 - p) / n).sqrt();
                let diff = (got - p).abs();
                if diff <= 1e-12 {
                    0.0
                } else if sigma == 0.0 {
                    f64::INFINITY
                } else {
                    diff / sigma
                }
            })
            .fold(0.0, f64::max)
    }
}

pub fn teleport_backward_sampled(
    a_obs: &Observable,
    a: usize,
    b_obs: &Observable,
    shots: usize,
    seed: u64,
) -> Result<SampledTeleport> {
    let t = teleport_backward_timeline(a_obs, a, b_obs)?;
    let run = sample(&t, shots, seed).map_err(selection_error)?;
    let stats = run.sampler().expect("sampled run");
    Ok(SampledTeleport {
        victoria: run.distribution("victoria").expect("measured").clone(),
        expected: teleport_expected(a_obs, a, b_obs),
        shots,
        accepted: stats.accepted,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Cloning audit

/// Spin basis chosen for a measurement in the audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpinBasis {
    Z,
    X,
}

impl SpinBasis {
    pub const BOTH: [SpinBasis; 2] = [SpinBasis::Z, SpinBasis::X];

    pub fn observable(self) -> Observable {
        match self {
            SpinBasis::Z => Observable::sigma_z(),
            SpinBasis::X => Observable::sigma_x(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpinBasis::Z => "sigma_z",
            SpinBasis::X => "sigma_x",
        }
    }

    /// Eigenvectors in outcome order (eigenvalue −1, then +1).
    pub fn eigenvectors(self) -> [Ket; 2] {
        let names = match self {
            SpinBasis::Z => ["down", "up"],
            SpinBasis::X => ["minus", "plus"],
        };
        names.map(|n| named_qubit(n).expect("named").ket().clone())
    }
}

/// Something that can sit between the two measurement times of the audit.
/// Physical channels ignore the later choice; a backward cloner cannot.
pub trait AuditCandidate {
    fn channel_for(&self, later: SpinBasis) -> &Channel;
    fn is_physical(&self) -> bool;
}

impl AuditCandidate for Channel {
    fn channel_for(&self, _later: SpinBasis) -> &Channel {
        self
    }

    fn is_physical(&self) -> bool {
        Channel::is_physical(self)
    }
}

/// The hypothetical cloner of backward states. Whatever basis the later
/// measurement selects on the first particle, the pair's backward state
/// becomes two copies of it: Kraus operators `|e_k e_k⟩⟨e_k e_k|` in that
/// basis. No single linear map does this for both bases, so the machine is
/// a pair of post-selected maps keyed by the later choice.
#[derive(Clone, Debug, PartialEq)]
pub struct BackwardCloner {
    z: Channel,
    x: Channel,
}

impl BackwardCloner {
    pub fn channel(&self, later: SpinBasis) -> &Channel {
        match later {
            SpinBasis::Z => &self.z,
            SpinBasis::X => &self.x,
        }
    }
}

impl AuditCandidate for BackwardCloner {
    fn channel_for(&self, later: SpinBasis) -> &Channel {
        self.channel(later)
    }

    fn is_physical(&self) -> bool {
        false
    }
}

pub fn ideal_backward_cloner() -> BackwardCloner {
    let build = |basis: SpinBasis| {
        let kraus = basis
            .eigenvectors()
            .iter()
            .map(|e| {
                let pair = tensor(e, e);
                LinearOp::projector(&pair).expect("normalized")
            })
            .collect();
        Channel::post_selected(kraus).expect("nonzero")
    };
    BackwardCloner {
        z: build(SpinBasis::Z),
        x: build(SpinBasis::X),
    }
}

/// Two erased pairs `(p1, r1)` and `(p2, r2)`; at t₁ both particles are
/// measured in `earlier`, the candidate acts on `(p1, p2)`, and at t₂ the
/// first particle is measured in `later`.
pub fn audit_timeline(channel: &Channel, earlier: SpinBasis, later: SpinBasis) -> Result<Timeline> {
    if channel.side() != 4 {
        return Err(Error::DimMismatch {
            expected: 4,
            found: channel.side(),
        });
    }
    let erased = erase_past(2)?.state;
    Ok(Timeline::new([("p1", 2), ("r1", 2), ("p2", 2), ("r2", 2)])
        .preselect(erased.tensor(&erased))
        .guard(&["r1", "r2"])
        .measure(earlier.observable(), &["p1"], "t1_first")
        .measure(earlier.observable(), &["p2"], "t1_second")
        .channel(channel.clone(), &["p1", "p2"])
        .measure(later.observable(), &["p1"], "t2"))
}

/// Joint t₁ statistics of one half of the ensemble; entry `2i + j` is the
/// probability of outcome `i` on the first particle and `j` on the second.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfStatistics {
    pub earlier: SpinBasis,
    pub joint: [f64; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignalingReport {
    /// Both halves with σ_z chosen at t₂.
    pub under_z: [HalfStatistics; 2],
    /// Both halves with σ_x chosen at t₂.
    pub under_x: [HalfStatistics; 2],
    /// Total-variation distance per half (σ_z half, σ_x half).
    pub half_distances: [f64; 2],
    /// Total-variation distance between the whole ensembles, each half
    /// weighted 1/2.
    pub trace_distance: f64,
    pub physical: bool,
}

fn half(
    candidate: &(impl AuditCandidate + ?Sized),
    earlier: SpinBasis,
    later: SpinBasis,
) -> Result<HalfStatistics> {
    let t = audit_timeline(candidate.channel_for(later), earlier, later)?;
    let run = enumerate(&t)?;
    let joint_map = run.joint_over(&["t1_first", "t1_second"])?;
    let mut joint = [0.0; 4];
    for (key, p) in joint_map {
        joint[2 * key[0] + key[1]] += p;
    }
    Ok(HalfStatistics { earlier, joint })
}

/// Earlier-time pair statistics under both later choices, and how far apart
/// they are. A physical candidate gives distance 0.
pub fn cloning_signaling_audit(
    candidate: &(impl AuditCandidate + ?Sized),
) -> Result<SignalingReport> {
    let stats = |later| -> Result<[HalfStatistics; 2]> {
        Ok([
            half(candidate, SpinBasis::Z, later)?,
            half(candidate, SpinBasis::X, later)?,
        ])
    };
    let under_z = stats(SpinBasis::Z)?;
    let under_x = stats(SpinBasis::X)?;
    let l1 = |a: &HalfStatistics, b: &HalfStatistics| -> f64 {
        a.joint
            .iter()
            .zip(&b.joint)
            .map(|(p, q)| (p - q).abs())
            .sum()
    };
    let half_distances = [
        0.5 * l1(&under_z[0], &under_x[0]),
        0.5 * l1(&under_z[1], &under_x[1]),
    ];
    let trace_distance = (0.5 * (half_distances[0] + half_distances[1])).clamp(0.0, 1.0);
    Ok(SignalingReport {
        under_z,
        under_x,
        half_distances,
        trace_distance,
        physical: candidate.is_physical(),
    })
}

/// Guard events, if any, in a timeline.
pub fn guarded_systems(t: &Timeline) -> Vec<String> {
    t.events()
        .iter()
        .filter_map(|e| match e {
            Event::Guard { targets } => Some(targets.clone()),
            _ => None,
        })
        .flatten()
        .collect()
}
