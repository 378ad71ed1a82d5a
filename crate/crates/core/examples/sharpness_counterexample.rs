//! Nested random cube families and the growth of `‖M_α g_N‖/‖g_N‖` with the depth `N`.
//!
//! `cargo run --release --example sharpness_counterexample`

use morrey_lab::sharpness::{build_cantor, divergence_report, solve_delta, SharpnessConfig};

fn main() -> morrey_lab::Result<()> {
    let delta = solve_delta(2.0, 4.0)?;
    let family = build_cantor(2, 3, delta, 11)?;
    println!(
        "delta = {delta}, E_3 has {} cubes, measure identity defect {:.1e}, nested: {}",
        family.stages[3].len(),
        family.measure_identity_defect(),
        family.is_nested()
    );

    let config = SharpnessConfig {
        r: 2.0,
        mu: 4.0,
        p: 2.0,
        lambda: 8.0,
    };
    let report = divergence_report(config, 2, 1..=4, 2024)?;
    println!(
        "alpha = {} (window empty: {})",
        report.alpha, report.alpha_window_empty
    );
    println!(
        "{:>3} {:>10} {:>10} {:>12} {:>12} {:>10}",
        "N", "|g|", "|g| grid", "|M g|", "closed form", "ratio"
    );
    for row in &report.rows {
        println!(
            "{:>3} {:>10.6} {:>10.6} {:>12.6} {:>12.4} {:>10.4}",
            row.depth,
            row.norm_analytic,
            row.norm_grid,
            row.maximal_norm,
            row.closed_form,
            row.ratio
        );
    }
    println!("ratios strictly increasing: {}", report.strictly_increasing);
    Ok(())
}
