//! Quantum states tagged with their direction of time evolution.
//!
//! # Conjugation convention
//!
//! A [`BackwardState`] stores the coefficients of a linear functional:
//! coefficients `c_j` denote `Σ_j c_j ⟨j|`. The backward state created by a
//! measurement outcome `|χ⟩ = Σ_j χ_j |j⟩` therefore has coefficients
//! `c_j = conj(χ_j)`. [`BackwardState::apply`] is the only place where a
//! backward state meets a ket, and it never conjugates; construction from an
//! outcome ket ([`BackwardState::from_outcome`]) is the only place that does.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{c, eigensystem, Ket, LinearOp, Tensor, C64, DEFAULT_GROUP_TOL, ONE, ZERO};

/// Normalization tolerance for pure states.
pub const NORM_TOL: f64 = 1e-12;

/// Tolerance for density operator checks (trace, positivity, hermiticity).
pub const DENSITY_TOL: f64 = 1e-10;

fn check_normalized(ket: &Ket) -> Result<()> {
    let norm = ket.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// A normalized ket evolving forward in time, created by a past measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardState {
    ket: Ket,
}

impl ForwardState {
    pub fn new(ket: Ket) -> Result<Self> {
        check_normalized(&ket)?;
        Ok(Self { ket })
    }

    /// Normalizes `ket` first.
    pub fn normalize(ket: Ket) -> Result<Self> {
        Ok(Self {
            ket: ket.normalized()?,
        })
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        Self::new(Ket::basis(dims, index)?)
    }

    pub fn ket(&self) -> &Ket {
        &self.ket
    }

    pub fn dims(&self) -> &[usize] {
        self.ket.dims()
    }

    pub fn len(&self) -> usize {
        self.ket.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ket.is_empty()
    }

    /// The backward state `⟨ψ|` created by post-selecting on this state.
    pub fn to_backward(&self) -> BackwardState {
        BackwardState {
            coefficients: self.ket.conjugate(),
        }
    }

    pub fn tensor(&self, other: &ForwardState) -> ForwardState {
        ForwardState {
            ket: self.ket.tensor(&other.ket),
        }
    }

    pub fn evolve(&self, unitary: &LinearOp) -> Result<ForwardState> {
        ForwardState::normalize(unitary.apply(&self.ket)?)
    }

    pub fn density(&self) -> DensityOp {
        DensityOp {
            op: LinearOp::outer(&self.ket, &self.ket).expect("same length"),
        }
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &ForwardState) -> Result<f64> {
        Ok(self.ket.inner(&other.ket)?.norm_sqr())
    }
}

/// A normalized bra evolving backward in time, created by a future
/// measurement. See the module docs for the storage convention.
#[derive(Clone, Debug, PartialEq)]
pub struct BackwardState {
    coefficients: Ket,
}

impl BackwardState {
    /// Wraps functional coefficients `c_j` of `Σ_j c_j ⟨j|` as stored.
    pub fn from_coefficients(coefficients: Ket) -> Result<Self> {
        check_normalized(&coefficients)?;
        Ok(Self { coefficients })
    }

    /// The bra `⟨χ|` of a post-selection outcome `|χ⟩`.
    pub fn from_outcome(outcome: Ket) -> Result<Self> {
        check_normalized(&outcome)?;
        Ok(Self {
            coefficients: outcome.conjugate(),
        })
    }

    pub fn normalize_outcome(outcome: Ket) -> Result<Self> {
        Self::from_outcome(outcome.normalized()?)
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        Self::from_coefficients(Ket::basis(dims, index)?)
    }

    pub fn coefficients(&self) -> &Ket {
        &self.coefficients
    }

    /// The outcome ket `|χ⟩` whose bra this is.
    pub fn outcome(&self) -> Ket {
        self.coefficients.conjugate()
    }

    pub fn to_forward(&self) -> ForwardState {
        ForwardState {
            ket: self.outcome(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        self.coefficients.dims()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `⟨self|ket⟩ = Σ_j c_j ket_j`.
    pub fn apply(&self, ket: &Ket) -> Result<C64> {
        if ket.len() != self.len() {
            return Err(Error::DimMismatch {
                expected: self.len(),
                found: ket.len(),
            });
        }
        Ok(self
            .coefficients
            .amplitudes()
            .iter()
            .zip(ket.amplitudes())
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Backward evolution through `unitary`: `⟨χ|U`.
    pub fn evolve_back(&self, unitary: &LinearOp) -> Result<BackwardState> {
        let row = unitary.matrix().transpose() * self.coefficients.vector();
        Self::from_coefficients(Ket::new(
            row.as_slice().to_vec(),
            self.coefficients.dims().to_vec(),
        )?)
    }

    pub fn tensor(&self, other: &BackwardState) -> BackwardState {
        BackwardState {
            coefficients: self.coefficients.tensor(&other.coefficients),
        }
    }
}

/// A pre- and post-selected pure state pair `⟨φ| |ψ⟩` over one space.
///
/// Such a pair can be measured destructively, but it has no single place to
/// be teleported to (its forward half only moves into the future and its
/// backward half only into the past), and neither half can be cloned.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoStateVector {
    backward: BackwardState,
    forward: ForwardState,
}

impl TwoStateVector {
    pub fn new(backward: BackwardState, forward: ForwardState) -> Result<Self> {
        if backward.dims() != forward.dims() {
            return Err(Error::DimMismatch {
                expected: forward.len(),
                found: backward.len(),
            });
        }
        let overlap = backward.apply(forward.ket())?.norm();
        if overlap <= NORM_TOL {
            return Err(Error::OrthogonalSelection { overlap });
        }
        Ok(Self { backward, forward })
    }

    pub fn backward(&self) -> &BackwardState {
        &self.backward
    }

    pub fn forward(&self) -> &ForwardState {
        &self.forward
    }

    /// `⟨φ|ψ⟩`.
    pub fn overlap(&self) -> C64 {
        self.backward
            .apply(self.forward.ket())
            .expect("dims checked at construction")
    }
}

/// Positive semidefinite, unit-trace, Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOp {
    op: LinearOp,
}

impl DensityOp {
    pub fn new(op: LinearOp) -> Result<Self> {
        if op.hermiticity_defect() > DENSITY_TOL {
            return Err(Error::NotDensity("not Hermitian"));
        }
        if (op.trace() - ONE).norm() > DENSITY_TOL {
            return Err(Error::NotDensity("trace differs from one"));
        }
        let spectrum = eigensystem(&op, DEFAULT_GROUP_TOL)?;
        if spectrum.eigenvalues().first().copied().unwrap_or(0.0) < -DENSITY_TOL {
            return Err(Error::NotDensity("negative eigenvalue"));
        }
        Ok(Self { op })
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let id = LinearOp::identity(dims)?;
        let n = id.side() as f64;
        Ok(Self {
            op: id.scaled(c(1.0 / n, 0.0)),
        })
    }

    pub fn op(&self) -> &LinearOp {
        &self.op
    }

    pub fn dims(&self) -> &[usize] {
        self.op.dims()
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOp> {
        Ok(DensityOp {
            op: self.op.partial_trace(keep)?,
        })
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, pure: &ForwardState) -> Result<f64> {
        let v = self.op.apply(pure.ket())?;
        Ok(pure.ket().inner(&v)?.re)
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityOp) -> Result<f64> {
        let diff = self.op.add(&other.op.scaled(c(-1.0, 0.0)))?;
        // The difference of two density operators is Hermitian.
        let e = eigensystem(&diff, 1e-14)?;
        let sum: f64 = e
            .eigenvalues()
            .iter()
            .zip(e.projectors())
            .map(|(l, p)| l.abs() * p.trace().re)
            .sum();
        Ok(0.5 * sum)
    }
}

impl TryFrom<LinearOp> for DensityOp {
    type Error = Error;

    fn try_from(op: LinearOp) -> Result<Self> {
        DensityOp::new(op)
    }
}

/// `(1/√d) Σ_j |j⟩|j⟩` over system ⊗ ancilla.
pub fn maximally_entangled(d: usize) -> Result<ForwardState> {
    if d < 2 {
        return Err(Error::BadDimension(d));
    }
    let amp = c(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = vec![ZERO; d * d];
    for j in 0..d {
        amps[j * d + j] = amp;
    }
    ForwardState::new(Ket::new(amps, vec![d, d])?)
}

fn two_qubit(amps: [f64; 4]) -> ForwardState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = amps.iter().map(|&a| c(a * s, 0.0)).collect();
    ForwardState::new(Ket::new(amps, vec![2, 2]).expect("4 amplitudes")).expect("normalized")
}

/// `(|↑↓⟩ − |↓↑⟩)/√2`.
pub fn singlet() -> ForwardState {
    two_qubit([0.0, 1.0, -1.0, 0.0])
}

/// The index of each Bell state in [`bell_basis`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellState {
    PhiPlus = 0,
    PhiMinus = 1,
    PsiPlus = 2,
    PsiMinus = 3,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }

    pub fn state(self) -> ForwardState {
        match self {
            BellState::PhiPlus => two_qubit([1.0, 0.0, 0.0, 1.0]),
            BellState::PhiMinus => two_qubit([1.0, 0.0, 0.0, -1.0]),
            BellState::PsiPlus => two_qubit([0.0, 1.0, 1.0, 0.0]),
            BellState::PsiMinus => two_qubit([0.0, 1.0, -1.0, 0.0]),
        }
    }
}

/// Φ+, Φ−, Ψ+, Ψ− in that order.
pub fn bell_basis() -> [ForwardState; 4] {
    BellState::ALL.map(BellState::state)
}

/// Hermitian operator `Σ_k k |B_k⟩⟨B_k|` whose eigenspaces are the Bell
/// states, in [`bell_basis`] order.
pub fn bell_operator() -> LinearOp {
    let mut m = DMatrix::<C64>::zeros(4, 4);
    for (k, b) in bell_basis().iter().enumerate() {
        m += LinearOp::outer(b.ket(), b.ket()).expect("4x4").matrix() * c(k as f64, 0.0);
    }
    LinearOp::new(m, vec![2, 2]).expect("4x4")
}

/// Single-qubit states by name: `up`/`zero`, `down`/`one`, `plus`, `minus`,
/// `plus_i`, `minus_i`.
pub fn named_qubit(name: &str) -> Option<ForwardState> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match name {
        "up" | "zero" => [ONE, ZERO],
        "down" | "one" => [ZERO, ONE],
        "plus" => [c(s, 0.0), c(s, 0.0)],
        "minus" => [c(s, 0.0), c(-s, 0.0)],
        "plus_i" => [c(s, 0.0), c(0.0, s)],
        "minus_i" => [c(s, 0.0), c(0.0, -s)],
        _ => return None,
    };
    ForwardState::new(Ket::from_amplitudes(amps.to_vec()).ok()?).ok()
}
