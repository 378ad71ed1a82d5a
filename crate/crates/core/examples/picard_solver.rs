//! Calibrated Picard iteration for the nonlinear Neumann problem with small data.
//!
//! `cargo run --release --example picard_solver`

use morrey_lab::bvp::{BVProblem, Exponents, LayerModel, PicardOptions, Solver};
use morrey_lab::grid::{make_grid, sample};

fn main() -> morrey_lab::Result<()> {
    let grid = make_grid(2, 2.0, 32, false)?;
    let exponents = Exponents::new(3, 3.0, 2.1)?;
    let bump = |a: f64| {
        sample(&grid, move |x| {
            a * (-4.0 * (x[0] * x[0] + x[1] * x[1])).exp()
        })
    };
    let problem = BVProblem::new(exponents, bump(0.2)?, bump(0.3)?, bump(0.2)?)?;
    let solver = Solver::new(&grid, exponents, LayerModel::FreeSpace)?;

    let calibration = solver.calibrate(&problem, &[bump(1.0)?, problem.f.clone()])?;
    let certificate = calibration
        .certificate(exponents.rho)
        .for_data(calibration.data_size(&solver, &problem.f)?);
    println!(
        "L = {:.4}, M = {:.4}, eps_max = {:.4e}, certified: {}",
        calibration.l,
        calibration.m,
        certificate.eps_max,
        certificate.valid()
    );

    let options = PicardOptions {
        certificate: Some(certificate),
        ..Default::default()
    };
    let state = solver.solve(&problem, &options)?;
    for (k, d) in state.diff_history.iter().enumerate() {
        println!("step {:>2}: |u_k+1 - u_k|_A = {d:.3e}", k + 1);
    }
    println!(
        "converged {} in {} steps, observed rate {:.3} vs certified {:.3}",
        state.converged,
        state.iterations,
        state.theta_emp(),
        certificate.theta
    );
    Ok(())
}
