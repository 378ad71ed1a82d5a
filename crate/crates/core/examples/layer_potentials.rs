//! Spectral layer potentials above a periodic boundary.
//!
//! `cargo run --release --example layer_potentials`

use std::f64::consts::PI;

use morrey_lab::grid::{make_grid, sample};
use morrey_lab::potential::{
    grad_n, neumann_layer_n, normal_derivative_n, single_layer_d, ZeroModePolicy,
};

fn main() -> morrey_lab::Result<()> {
    let grid = make_grid(2, 0.5, 64, true)?;
    let f = sample(&grid, |x| (2.0 * PI * x[0]).cos() * (4.0 * PI * x[1]).sin())?;
    let heights = [0.01, 0.05, 0.1, 0.2, 0.4];
    let policy = ZeroModePolicy::StrictReject;

    let d = single_layer_d(&f, &heights)?;
    let n = neumann_layer_n(&f, &heights, policy)?;
    let gradient = grad_n(&f, &heights, policy)?;
    // Every column decays like exp(-2π√20 t) for this single mode.
    println!(
        "{:>6} {:>10} {:>10} {:>10}",
        "t", "|D f|", "|N f|", "|dt N f|"
    );
    for (j, t) in heights.iter().enumerate() {
        println!(
            "{t:>6} {:>10.6} {:>10.6} {:>10.6}",
            d.layer(j)?.max_abs(),
            n.layer(j)?.max_abs(),
            gradient[2].layer(j)?.max_abs()
        );
    }

    let boundary = normal_derivative_n(&f, &[0.0], policy)?.layer(0)?;
    let recovery = boundary
        .values()
        .iter()
        .zip(f.values())
        .fold(0.0f64, |a, (u, v)| a.max((u + v).abs()));
    println!("Neumann data recovered to {recovery:.1e}");
    Ok(())
}
