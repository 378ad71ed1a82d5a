//! Lists the frozen corpus and samples one entry on two resolutions.
//!
//! `cargo run --release --example corpus_tour`

use morrey_lab::corpus::{listing, load, verify_frozen, CORPUS_VERSION};
use morrey_lab::grid::make_grid;

fn main() -> morrey_lab::Result<()> {
    for entry in listing()? {
        println!("{:<24} {}", entry.name, entry.hash);
    }
    match verify_frozen(CORPUS_VERSION) {
        Ok(()) => println!("corpus version {CORPUS_VERSION}: digests match"),
        Err(e) => println!("corpus version {CORPUS_VERSION}: {e}"),
    }
    for m in [64, 128] {
        let grid = make_grid(2, 1.0, m, false)?;
        let tail = load("power-tail-λ4", &grid)?;
        println!(
            "power-tail-λ4 on {m}^2: integral {:.6}, max {:.4}",
            tail.integral(),
            tail.max_abs()
        );
    }
    Ok(())
}
