//! Loads a scenario document, runs it, and writes it back in explicit form.
//!
//! `cargo run --example scenario_file -- scenarios/erased_past.json`

use twostate::report::{Format, Mode, ResultDoc};
use twostate::scenario::{parse_scenario, to_json};
use twostate::timeline::enumerate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../scenarios/three_box.json"
        )
        .into()
    });
    let text = std::fs::read_to_string(&path)?;
    let t = parse_scenario(&text)?;
    let run = enumerate(&t)?;
    print!(
        "{}",
        ResultDoc::from_run(&path, Mode::Exact, run).render(Format::Table)
    );

    let explicit = to_json(&t);
    println!(
        "\nexplicit form: {} bytes, {} events",
        explicit.len(),
        t.events().len()
    );
    Ok(())
}
