//! A cloner of backward states would let a later basis choice show up in
//! earlier statistics. Physical channels never do.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use twostate::channel::Channel;
use twostate::protocols::{cloning_signaling_audit, ideal_backward_cloner};
use twostate::random;

fn main() -> twostate::error::Result<()> {
    let cloner = cloning_signaling_audit(&ideal_backward_cloner())?;
    println!("ideal cloner: trace distance {:.6}", cloner.trace_distance);
    for (z, x) in cloner.under_z.iter().zip(&cloner.under_x) {
        println!(
            "  earlier {:?}: joint under later z {:?}, under later x {:?}",
            z.earlier, z.joint, x.joint
        );
    }

    let identity = cloning_signaling_audit(&Channel::identity(vec![2, 2])?)?;
    println!(
        "identity:     trace distance {:.3e}",
        identity.trace_distance
    );

    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let worst = (0..20)
        .map(|_| {
            let c = random::channel(vec![2, 2], 3, &mut rng);
            cloning_signaling_audit(&c).map(|r| r.trace_distance)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("20 random channels: largest trace distance {worst:.3e}");
    Ok(())
}
