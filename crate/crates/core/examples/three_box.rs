//! The three-box arrangement: opened alone, box 1 certainly holds the ball,
//! and so does box 2. Box 3 does not share the property.

use twostate::experiments::three_box;
use twostate::timeline::enumerate;

fn main() -> twostate::error::Result<()> {
    for b in 0..3 {
        let run = enumerate(&three_box(b)?)?;
        let found = run
            .distribution("open")
            .unwrap()
            .probability_of_value(1.0)
            .unwrap();
        println!(
            "open box {}: found with probability {found:.12} (post-selection succeeds {:.4})",
            b + 1,
            run.postselection_probability()
        );
    }
    Ok(())
}
