//! Hardy-Littlewood, fractional and sharp maximal functions of an indicator.
//!
//! `cargo run --release --example maximal_functions`

use morrey_lab::corpus::load;
use morrey_lab::grid::{make_grid, CubeFamily};
use morrey_lab::maximal::{bmo_norm, fractional_maximal, hardy_littlewood, sharp_maximal};

fn main() -> morrey_lab::Result<()> {
    let grid = make_grid(2, 1.5, 64, false)?;
    let f = load("indicator-ball", &grid)?;
    let family = CubeFamily::point_scale(&grid, 2)?;

    let m = hardy_littlewood(&f, &family)?;
    let corner = m.values.values()[0];
    println!("M f: max {:.4}, corner {corner:.4}", m.max());

    for alpha in [0.5, 1.0, 1.5] {
        println!(
            "M_{alpha} f: max {:.4}",
            fractional_maximal(&f, alpha, &family)?.max()
        );
    }

    println!("f#: max {:.4}", sharp_maximal(&f, &family)?.max());
    println!("BMO seminorm {:.4}", bmo_norm(&f, &family)?);
    Ok(())
}
