//! Rearrangement, both Lorentz norms and the product inequality on a power singularity.
//!
//! `cargo run --release --example lorentz_norms`

use morrey_lab::grid::{make_grid, sample_excluding};
use morrey_lab::lorentz::{
    decreasing_rearrangement, holder_check, lorentz_norm, HolderExponents, LorentzParams, NormKind,
};

fn main() -> morrey_lab::Result<()> {
    let grid = make_grid(2, 1.0, 128, false)?;
    // |x|^{-1/2} lies in the weak space L^{4,∞} but in no L^{4,d} with d < ∞ on the whole plane.
    let f = sample_excluding(
        &grid,
        |x| x.iter().map(|v| v * v).sum::<f64>().powf(-0.25),
        |x| x.iter().all(|v| *v == 0.0),
    )?;
    let star = decreasing_rearrangement(&f);
    for t in [1e-3, 1e-2, 1e-1, 1.0] {
        println!("f*({t:<5}) = {:.4}", star.eval(t));
    }

    println!("{:>6} {:>12} {:>12}", "d", "rearranged", "natural");
    for d in [1.0, 2.0, 4.0, 8.0, f64::INFINITY] {
        let params = LorentzParams::new(4.0, d)?;
        println!(
            "{d:>6} {:>12.5} {:>12.5}",
            lorentz_norm(&f, params, NormKind::Rearrangement)?,
            lorentz_norm(&f, params, NormKind::Natural)?
        );
    }

    let g = f.map(|v| v.sqrt())?;
    let e = HolderExponents {
        p1: 4.0,
        z1: 2.0,
        p2: 8.0,
        z2: 4.0,
        r: 8.0 / 3.0,
        s: 4.0 / 3.0,
    };
    let check = holder_check(&f, &g, e, NormKind::Natural)?;
    println!(
        "product inequality: {:.5} <= {:.5} (ratio {:.3})",
        check.lhs,
        check.rhs,
        check.ratio()
    );
    Ok(())
}
