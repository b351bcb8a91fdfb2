use twostate::linalg::Ket;
use twostate::protocols::{flip_verification, forward_flip_attempt};
use twostate::states::{BackwardState, ForwardState};

fn main() -> twostate::error::Result<()> {
    // Backward to forward works with a singlet.
    let chi = BackwardState::normalize_outcome(Ket::from_real(&[0.6, 0.8])?)?;
    let v = flip_verification(&chi)?;
    println!("flipped         {:?}", v.flipped.ket().amplitudes());
    println!("conditional     {:?}", v.conditional.ket().amplitudes());
    println!("fidelity        {:.12}", v.fidelity);
    println!("check found     {:.12}", v.check_probability);

    // Forward to backward needs a Bell outcome and a correction that depends on it.
    let psi = ForwardState::normalize(Ket::from_real(&[1.0, 2.0])?)?;
    let attempt = forward_flip_attempt(&psi)?;
    println!("bell outcomes   {:?}", attempt.outcome_probabilities);
    println!("fidelities      {:?}", attempt.fidelities);
    let w = &attempt.witness;
    println!(
        "{} and {} need corrections with overlap {:.3}; using the wrong one gives fidelity {:.3}",
        w.outcome_a.name(),
        w.outcome_b.name(),
        w.overlap,
        w.fidelity_with_wrong_correction
    );
    Ok(())
}
