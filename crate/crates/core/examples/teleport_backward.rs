//! Victor post-selects Bob's qubit; after a Bell measurement and the usual
//! corrections, Victoria's earlier measurement on the system sees Victor's
//! state.

use twostate::measure::Observable;
use twostate::protocols::{teleport_backward_experiment, teleport_backward_sampled};

fn main() -> twostate::error::Result<()> {
    let a_obs = Observable::sigma_z();
    let b_obs = Observable::sigma_x();
    let up = a_obs.outcome_index(1.0).unwrap();

    for (victor, victoria) in [(&a_obs, &a_obs), (&a_obs, &b_obs)] {
        let report = teleport_backward_experiment(victor, up, victoria)?;
        println!(
            "Victoria's distribution {:?}",
            report.victoria.probabilities()
        );
        println!("expected                {:?}", report.expected);
        for branch in &report.branches {
            println!(
                "  {:<4} correction {:<2}  p = {:.4}  victoria {:?}",
                branch.outcome.name(),
                branch.correction,
                branch.probability,
                branch.victoria.probabilities()
            );
        }
    }

    let sampled = teleport_backward_sampled(&a_obs, up, &b_obs, 200_000, 9)?;
    println!(
        "sampled: {} of {} shots accepted, worst z-score {:.2}",
        sampled.accepted,
        sampled.shots,
        sampled.max_z_score()
    );
    Ok(())
}
