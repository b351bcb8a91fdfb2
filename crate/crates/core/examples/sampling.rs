//! Monte Carlo against exact enumeration on the same timeline.

use twostate::experiments::three_box;
use twostate::timeline::{enumerate, sample};

fn main() -> twostate::error::Result<()> {
    let t = three_box(1)?;
    let exact = enumerate(&t)?;
    for shots in [1_000, 10_000, 100_000] {
        let run = sample(&t, shots, 42)?;
        let stats = run.sampler().unwrap();
        println!(
            "{shots:>7} shots: {:>6} accepted, acceptance {:.4} (exact {:.4})",
            stats.accepted,
            stats.accepted as f64 / shots as f64,
            exact.postselection_probability()
        );
        for (m, e) in run.measurements().iter().zip(exact.measurements()) {
            println!(
                "    {:<5} sampled {:?}  exact {:?}",
                m.label,
                m.distribution.probabilities(),
                e.distribution.probabilities()
            );
        }
    }
    Ok(())
}
