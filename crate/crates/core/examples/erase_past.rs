//! Erasing the past with a maximally entangled, untouched ancilla. The
//! system's intermediate statistics then depend only on what is selected
//! at the end.

use twostate::measure::Observable;
use twostate::protocols::erase_past;
use twostate::scenario::named_state;
use twostate::states::BackwardState;
use twostate::timeline::enumerate;

fn main() -> twostate::error::Result<()> {
    let erased = erase_past(2)?;
    println!("guarded subsystem index: {}", erased.token.subsystem());

    for final_state in ["up", "plus", "plus_i"] {
        let chi = named_state(final_state).unwrap().ket().clone();
        let post = Observable::projector_onto(&chi)?;
        let found = post.outcome_index(1.0).unwrap();
        let t = erased
            .timeline("system", "ancilla")
            .measure(Observable::sigma_x(), &["system"], "x")
            .measure(post, &["system"], "final")
            .postselect("final", found);
        let run = enumerate(&t)?;
        let x = run.distribution("x").unwrap();
        let backward = BackwardState::from_outcome(chi)?;
        println!(
            "final {final_state:<6} p(x=+1) = {:.6}  (bra alone: {:.6})",
            x.probability_of_value(1.0).unwrap(),
            twostate::measure::born_of_backward(&backward, &Observable::sigma_x())?
                .probability_of_value(1.0)
                .unwrap()
        );
    }
    Ok(())
}
