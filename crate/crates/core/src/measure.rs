//! Probability rules for projective measurements on forward states and on
//! pre- and post-selected ensembles.

use crate::error::{Error, Result};
use crate::linalg::{
    contract_functional, eigensystem, HermitianEigensystem, Ket, LinearOp, C64, DEFAULT_GROUP_TOL,
};
use crate::states::{BackwardState, ForwardState, TwoStateVector};
use crate::timeline::{self, Timeline};

/// Below this total branch weight a pre/post pair is treated as empty.
pub const SELECTION_EPS: f64 = 1e-14;

/// Tolerance on distribution normalization.
pub const DIST_TOL: f64 = 1e-10;

/// A Hermitian operator together with its grouped spectral decomposition.
///
/// Outcomes are indexed by ascending eigenvalue; a degenerate operator such
/// as a rank-one projector on a qutrit has exactly two outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    op: LinearOp,
    spectrum: HermitianEigensystem,
    group_tol: f64,
}

impl Observable {
    pub fn new(op: LinearOp) -> Result<Self> {
        Self::with_tolerance(op, DEFAULT_GROUP_TOL)
    }

    pub fn with_tolerance(op: LinearOp, group_tol: f64) -> Result<Self> {
        let spectrum = eigensystem(&op, group_tol)?;
        Ok(Self {
            op,
            spectrum,
            group_tol,
        })
    }

    pub fn sigma_x() -> Self {
        Self::new(pauli::x()).expect("Hermitian")
    }

    pub fn sigma_y() -> Self {
        Self::new(pauli::y()).expect("Hermitian")
    }

    pub fn sigma_z() -> Self {
        Self::new(pauli::z()).expect("Hermitian")
    }

    /// Two-outcome observable `|k⟩⟨k|`: outcome 0 is "not found" (eigenvalue
    /// 0), outcome 1 is "found" (eigenvalue 1).
    pub fn projector_onto(k: &Ket) -> Result<Self> {
        Self::new(LinearOp::projector(k)?)
    }

    /// Rotates the observable: `U B U†`, keeping outcome order.
    pub fn conjugated_by(&self, u: &LinearOp) -> Result<Self> {
        let projectors = self
            .spectrum
            .projectors()
            .iter()
            .map(|p| p.conjugated_by(u))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            op: self.op.conjugated_by(u)?,
            spectrum: HermitianEigensystem::from_parts(
                self.spectrum.eigenvalues().to_vec(),
                projectors,
            ),
            group_tol: self.group_tol,
        })
    }

    pub fn op(&self) -> &LinearOp {
        &self.op
    }

    pub fn group_tol(&self) -> f64 {
        self.group_tol
    }

    pub fn dims(&self) -> &[usize] {
        self.op.dims()
    }

    pub fn side(&self) -> usize {
        self.op.side()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.spectrum.eigenvalues()
    }

    pub fn projectors(&self) -> &[LinearOp] {
        self.spectrum.projectors()
    }

    pub fn outcome_count(&self) -> usize {
        self.spectrum.len()
    }

    pub fn outcomes(&self) -> Vec<Outcome> {
        self.eigenvalues()
            .iter()
            .enumerate()
            .map(|(index, &eigenvalue)| Outcome { index, eigenvalue })
            .collect()
    }

    /// Index of the outcome whose eigenvalue is within `1e-8` of `value`.
    pub fn outcome_index(&self, value: f64) -> Option<usize> {
        self.eigenvalues()
            .iter()
            .position(|&l| (l - value).abs() <= 1e-8)
    }
}

/// Standard single-qubit operators.
pub mod pauli {
    use crate::linalg::{c, LinearOp};

    pub fn identity() -> LinearOp {
        LinearOp::identity(vec![2]).expect("2x2")
    }

    pub fn x() -> LinearOp {
        LinearOp::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("2x2")
    }

    pub fn y() -> LinearOp {
        LinearOp::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ])
        .expect("2x2")
    }

    pub fn z() -> LinearOp {
        LinearOp::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).expect("2x2")
    }

    pub fn hadamard() -> LinearOp {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        LinearOp::from_real_rows(&[&[s, s], &[s, -s]]).expect("2x2")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub index: usize,
    pub eigenvalue: f64,
}

/// Probabilities over the outcomes of one measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    outcomes: Vec<Outcome>,
    probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    /// Normalizes nonnegative weights. Fails when their sum is at or below
    /// [`SELECTION_EPS`].
    pub fn from_weights(outcomes: Vec<Outcome>, weights: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(outcomes.len(), weights.len());
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= SELECTION_EPS {
            return Err(Error::InconsistentSelection { weight: total });
        }
        let probabilities = weights.iter().map(|w| w.max(0.0) / total).collect();
        Ok(Self {
            outcomes,
            probabilities,
        })
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.probabilities.get(index).copied().unwrap_or(0.0)
    }

    /// Probability of the outcome with the given eigenvalue (within `1e-8`).
    pub fn probability_of_value(&self, eigenvalue: f64) -> Option<f64> {
        self.outcomes
            .iter()
            .position(|o| (o.eigenvalue - eigenvalue).abs() <= 1e-8)
            .map(|i| self.probabilities[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, f64)> + '_ {
        self.outcomes
            .iter()
            .copied()
            .zip(self.probabilities.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Largest absolute per-outcome difference.
    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimMismatch { expected, found });
    }
    Ok(())
}

/// Born rule: `p_n = ‖P_n |ψ⟩‖²`.
pub fn born(state: &ForwardState, obs: &Observable) -> Result<OutcomeDistribution> {
    check_dims(obs.side(), state.len())?;
    let weights = obs
        .projectors()
        .iter()
        .map(|p| p.apply(state.ket()).map(|v| v.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    OutcomeDistribution::from_weights(obs.outcomes(), weights)
}

/// `⟨φ|P|ψ⟩` summed so that swapping the roles of `φ` and `ψ` yields the
/// exact complex conjugate: each `(i, j)` term is paired with its `(j, i)`
/// mirror. With `P` exactly Hermitian this makes the ABL rule bitwise
/// time-symmetric.
fn sandwich(post: &[C64], p: &LinearOp, pre: &[C64]) -> C64 {
    let term = |i: usize, j: usize| p.entry(i, j) * (post[i] * pre[j]);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..pre.len() {
        acc += term(i, i);
        for j in i + 1..pre.len() {
            acc += term(i, j) + term(j, i);
        }
    }
    acc
}

/// ABL rule: `p_n ∝ |⟨φ|P_n|ψ⟩|²`.
pub fn abl(
    pre: &ForwardState,
    post: &BackwardState,
    obs: &Observable,
) -> Result<OutcomeDistribution> {
    check_dims(obs.side(), pre.len())?;
    check_dims(obs.side(), post.len())?;
    let weights = obs
        .projectors()
        .iter()
        .map(|p| sandwich(post.coefficients().amplitudes(), p, pre.ket().amplitudes()).norm_sqr())
        .collect();
    OutcomeDistribution::from_weights(obs.outcomes(), weights)
}

/// ABL rule for a two-state vector.
pub fn abl_two_state(tsv: &TwoStateVector, obs: &Observable) -> Result<OutcomeDistribution> {
    abl(tsv.forward(), tsv.backward(), obs)
}

/// ABL rule with partial post-selection: the pre-selected state lives on
/// system ⊗ ancilla (system first), the post-selection and the intermediate
/// observable act on the system only, and the ancilla is never measured.
///
/// `p_n ∝ ‖P_{A=a} P_{B=b_n} |Ψ⟩‖²`, where `P_{A=a} = |χ⟩⟨χ|` is the
/// projector of the post-selection outcome.
pub fn abl_generalized(
    ent_pre: &ForwardState,
    post: &BackwardState,
    obs: &Observable,
) -> Result<OutcomeDistribution> {
    let dims = ent_pre.dims();
    if dims.len() < 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            found: dims.len(),
        });
    }
    check_dims(dims[0], post.len())?;
    check_dims(dims[0], obs.side())?;

    // ‖(|χ⟩⟨χ| ⊗ I) w‖ = ‖(⟨χ| ⊗ I) w‖ for normalized |χ⟩.
    let post_coeffs = post.coefficients().amplitudes();
    let weights = obs
        .projectors()
        .iter()
        .map(|p| {
            let projected = p.with_dims(vec![dims[0]])?.apply_on(&[0], ent_pre.ket())?;
            let rest = contract_functional(post_coeffs, &[0], dims, projected.amplitudes());
            Ok(rest.iter().map(|a| a.norm_sqr()).sum::<f64>())
        })
        .collect::<Result<Vec<_>>>()?;
    OutcomeDistribution::from_weights(obs.outcomes(), weights)
}

/// Brute-force sequential-measurement oracle: enumerates every branch of the
/// timeline with projective collapse and returns the conditional
/// distribution of each measurement given all post-selections.
pub fn sequential_oracle(t: &Timeline) -> Result<Vec<(String, OutcomeDistribution)>> {
    let run = timeline::enumerate(t)?;
    Ok(run
        .measurements()
        .iter()
        .map(|m| (m.label.clone(), m.distribution.clone()))
        .collect())
}

/// `|⟨χ|B=b_n⟩|²` summed over each eigenspace, i.e. the Born distribution of
/// the outcome ket of a backward state.
pub fn born_of_backward(post: &BackwardState, obs: &Observable) -> Result<OutcomeDistribution> {
    born(&post.to_forward(), obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{maximally_entangled, named_qubit};

    fn qubit(name: &str) -> ForwardState {
        named_qubit(name).unwrap()
    }

    #[test]
    fn born_examples() {
        let z = Observable::sigma_z();
        let x = Observable::sigma_x();
        let d = born(&qubit("zero"), &z).unwrap();
        assert_eq!(d.probability_of_value(1.0), Some(1.0));
        let d = born(&qubit("zero"), &x).unwrap();
        assert!((d.probability_of_value(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((d.probability_of_value(-1.0).unwrap() - 0.5).abs() < 1e-15);
        let d = born(&qubit("plus"), &x).unwrap();
        assert!((d.probability_of_value(1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn born_dim_mismatch() {
        let obs = Observable::projector_onto(&Ket::basis(vec![3], 0).unwrap()).unwrap();
        assert!(matches!(
            born(&qubit("zero"), &obs),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn abl_examples() {
        let z = Observable::sigma_z();
        let x = Observable::sigma_x();
        let d = abl(&qubit("zero"), &qubit("zero").to_backward(), &z).unwrap();
        assert!((d.probability_of_value(1.0).unwrap() - 1.0).abs() < 1e-15);
        let d = abl(&qubit("zero"), &qubit("plus").to_backward(), &x).unwrap();
        assert!((d.probability_of_value(1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn abl_inconsistent_selection() {
        let z = Observable::sigma_z();
        let err = abl(&qubit("zero"), &qubit("one").to_backward(), &z).unwrap_err();
        assert!(matches!(err, Error::InconsistentSelection { .. }));
    }

    #[test]
    fn three_box_elements_of_reality() {
        let pre = ForwardState::normalize(Ket::from_real(&[1.0, 1.0, 1.0]).unwrap()).unwrap();
        let post =
            BackwardState::normalize_outcome(Ket::from_real(&[1.0, 1.0, -1.0]).unwrap()).unwrap();
        for b in 0..2 {
            let obs = Observable::projector_onto(&Ket::basis(vec![3], b).unwrap()).unwrap();
            assert_eq!(obs.outcome_count(), 2);
            let d = abl(&pre, &post, &obs).unwrap();
            assert!((d.probability_of_value(1.0).unwrap() - 1.0).abs() < 1e-12);
        }
        // Box 3 is not an element of reality.
        let obs = Observable::projector_onto(&Ket::basis(vec![3], 2).unwrap()).unwrap();
        let d = abl(&pre, &post, &obs).unwrap();
        assert!((d.probability_of_value(1.0).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn generalized_rule_reduces_to_scalar_product() {
        let z = Observable::sigma_z();
        let ent = maximally_entangled(2).unwrap();
        let d = abl_generalized(&ent, &qubit("plus").to_backward(), &z).unwrap();
        assert!((d.probability(0) - 0.5).abs() < 1e-15);
        assert!((d.probability(1) - 0.5).abs() < 1e-15);
        let d = abl_generalized(&ent, &qubit("zero").to_backward(), &z).unwrap();
        assert!((d.probability_of_value(1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn generalized_rule_rejects_flat_state() {
        let z = Observable::sigma_z();
        let err = abl_generalized(&qubit("zero"), &qubit("zero").to_backward(), &z).unwrap_err();
        assert!(matches!(err, Error::DimMismatch { .. }));
    }

    #[test]
    fn conjugated_observable_keeps_order() {
        let h = pauli::hadamard();
        let z = Observable::sigma_z();
        let rotated = z.conjugated_by(&h).unwrap();
        let direct = Observable::sigma_x();
        for (a, b) in rotated.projectors().iter().zip(direct.projectors()) {
            assert!(a.max_abs_diff(b) < 1e-12);
        }
    }
}
