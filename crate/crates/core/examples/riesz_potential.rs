//! Fractional integral of a Gaussian by two quadratures and a tangential Riesz transform.
//!
//! `cargo run --release --example riesz_potential`

use morrey_lab::corpus::load;
use morrey_lab::grid::make_grid;
use morrey_lab::potential::{riesz_potential, riesz_transform, PotentialMethod, TransformMethod};

fn main() -> morrey_lab::Result<()> {
    let grid = make_grid(2, 1.0, 32, false)?;
    let f = load("gaussian-wide", &grid)?;
    for alpha in [0.5, 1.0, 1.5] {
        let fast = riesz_potential(&f, alpha, PotentialMethod::Quadrature)?;
        let direct = riesz_potential(&f, alpha, PotentialMethod::HedbergSplit)?;
        let gap = fast
            .values()
            .iter()
            .zip(direct.values())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        println!(
            "I_{alpha} f: max {:.5}, methods differ by {gap:.1e}",
            fast.max_abs()
        );
    }

    let periodic = make_grid(2, 1.0, 64, true)?;
    let g = load("band-limited-b", &periodic)?;
    let s = riesz_transform(&g, 0, TransformMethod::Spectral)?;
    let ss = riesz_transform(&s, 0, TransformMethod::Spectral)?;
    println!(
        "S_1 g: max {:.5}; S_1 S_1 g: max {:.5}",
        s.max_abs(),
        ss.max_abs()
    );
    Ok(())
}
