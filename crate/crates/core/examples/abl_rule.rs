//! Outcome probabilities for a spin measured between a pre-selection and a
//! post-selection, next to the Born rule that ignores the future.

use twostate::linalg::Ket;
use twostate::measure::{abl, born, Observable};
use twostate::states::{named_qubit, BackwardState};

fn main() -> twostate::error::Result<()> {
    let up = named_qubit("up").unwrap();
    let plus = BackwardState::from_outcome(named_qubit("plus").unwrap().ket().clone())?;

    for (name, obs) in [
        ("sigma_x", Observable::sigma_x()),
        ("sigma_y", Observable::sigma_y()),
        ("sigma_z", Observable::sigma_z()),
    ] {
        let two_time = abl(&up, &plus, &obs)?;
        let one_time = born(&up, &obs)?;
        println!("{name}");
        for ((o, p), q) in two_time.iter().zip(one_time.probabilities()) {
            println!("  {:+.0}: two-time {p:.4}  born {q:.4}", o.eigenvalue);
        }
    }

    // A spin along an oblique axis.
    let theta = 0.3_f64;
    let tilted = Ket::from_real(&[(theta / 2.0).cos(), (theta / 2.0).sin()])?;
    let d = abl(
        &up,
        &BackwardState::from_outcome(tilted)?,
        &Observable::sigma_x(),
    )?;
    println!(
        "sigma_x between up and a {theta} rad tilt: p(+1) = {:.6}",
        d.probability(1)
    );
    Ok(())
}
