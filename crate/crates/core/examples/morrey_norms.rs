//! Morrey-Lorentz norms over nested cube families and the cube that attains each.
//!
//! `cargo run --release --example morrey_norms`

use morrey_lab::corpus::load;
use morrey_lab::grid::{enumerate_cubes, make_grid, CubeFamily};
use morrey_lab::morrey::{morrey_lorentz_norm, weak_morrey_norm, MorreyParams};

fn main() -> morrey_lab::Result<()> {
    let grid = make_grid(2, 1.0, 64, false)?;
    let f = load("power-tail-λ4", &grid)?;
    let params = MorreyParams::new(2.0, 2.0, 4.0)?;

    for scales in [3, 4, 5] {
        let family = enumerate_cubes(&grid, scales, 2)?;
        let norm = morrey_lorentz_norm(&f, params, &family)?;
        let side = norm.argmax.map_or(0.0, |q| q.side(&grid));
        println!(
            "{scales} scales, {:>6} cubes: {:.5} (side {side:.4})",
            family.len(),
            norm.value
        );
    }

    let family = CubeFamily::point_scale(&grid, 2)?;
    let strong = morrey_lorentz_norm(&f, params, &family)?.value;
    let weak = weak_morrey_norm(&f, 2.0, 4.0, &family)?.value;
    println!("all scales: strong {strong:.5}, weak {weak:.5}");
    Ok(())
}
