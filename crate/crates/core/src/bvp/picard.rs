//! Fixed-point iteration `u_{k+1} = N f + N(V u_k) + N(b|u_k|^{ρ−1}u_k)` on boundary densities,
//! empirical operator constants and the contraction certificate.

use serde::Serialize;

use super::{ANorm, BVProblem, Solver};
use crate::error::{Error, Result};
use crate::grid::SampledFunction;

const SAFETY: f64 = 1.25;
const POWER_STEPS: usize = 6;

#[derive(Clone, Debug)]
pub struct PicardOptions {
    pub max_iter: usize,
    /// Stop once the `A`-norm of the successive difference drops below this.
    pub tol: f64,
    pub keep_iterates: bool,
    pub certificate: Option<Certificate>,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-8,
            keep_iterates: true,
            certificate: None,
        }
    }
}

/// Iterate history of one run. `density` is `g_k`, so that `u_k = N g_k` and `trace = u_k|₀`.
#[derive(Clone, Debug, Serialize)]
pub struct PicardState {
    pub iterations: usize,
    #[serde(skip)]
    pub density: SampledFunction,
    #[serde(skip)]
    pub trace: SampledFunction,
    pub a_history: Vec<ANorm>,
    /// `‖u_{k+1} − u_k‖_A`.
    pub diff_history: Vec<f64>,
    /// Boundary traces `u_k|₀`, when kept.
    #[serde(skip)]
    pub iterates: Vec<SampledFunction>,
    /// Means removed from products before applying `N` (periodic model only).
    pub adjustments: Vec<f64>,
    pub warnings: Vec<String>,
    pub converged: bool,
    /// `‖u − Φ(u)‖_A` at the returned iterate.
    pub defect: f64,
}

impl PicardState {
    /// Successive ratios `d_{k+1}/d_k` of the difference history.
    pub fn rates(&self) -> Vec<f64> {
        self.diff_history
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect()
    }

    /// Largest observed contraction ratio.
    pub fn theta_emp(&self) -> f64 {
        self.rates().into_iter().fold(0.0, f64::max)
    }

    pub fn solution_norm(&self) -> f64 {
        self.a_history.last().map_or(0.0, |a| a.total)
    }
}

impl Solver {
    /// One application of the Picard map on densities, with the removed mean.
    pub fn step(
        &self,
        problem: &BVProblem,
        density: &SampledFunction,
    ) -> Result<(SampledFunction, f64)> {
        let u = self.op.trace(density)?;
        self.op.prepare(&problem.density_of(&u)?)
    }

    pub fn solve(&self, problem: &BVProblem, options: &PicardOptions) -> Result<PicardState> {
        problem.grid().check_same(self.op.grid())?;
        let mut warnings = Vec::new();
        match &options.certificate {
            Some(c) if c.valid() => {}
            Some(c) => warnings.push(format!(
                "certificate violated: feasible = {}, data size {:?} against eps_max {:e}",
                c.feasible, c.data_size, c.eps_max
            )),
            None => warnings.push("running without a contraction certificate".into()),
        }
        let (mut density, first_adj) = self.op.prepare(&problem.f)?;
        let mut adjustments = vec![first_adj];
        let mut trace = self.op.trace(&density)?;
        let mut iterates = Vec::new();
        if options.keep_iterates {
            iterates.push(trace.clone());
        }
        let mut a_history = vec![self.a_norm(&density)?];
        let mut diff_history: Vec<f64> = Vec::new();
        let mut converged = false;
        let mut increases = 0;
        while a_history.len() < options.max_iter.max(1) {
            let (next, adj) = self.op.prepare(&problem.density_of(&trace)?)?;
            adjustments.push(adj);
            let diff = self.a_distance(&next, &density)?;
            density = next;
            trace = self.op.trace(&density)?;
            a_history.push(self.a_norm(&density)?);
            if options.keep_iterates {
                iterates.push(trace.clone());
            }
            if diff_history.last().is_some_and(|&last| diff > last) {
                increases += 1;
            } else {
                increases = 0;
            }
            diff_history.push(diff);
            if !diff.is_finite() || increases >= 3 {
                return Err(Error::Diverged {
                    iterations: a_history.len(),
                    history: diff_history,
                });
            }
            if diff < options.tol {
                converged = true;
                break;
            }
        }
        let (image, _) = self.step(problem, &density)?;
        let defect = self.a_distance(&image, &density)?;
        if !converged {
            warnings.push(format!(
                "no convergence within {} iterations",
                options.max_iter
            ));
        }
        Ok(PicardState {
            iterations: a_history.len(),
            density,
            trace,
            a_history,
            diff_history,
            iterates,
            adjustments,
            warnings,
            converged,
            defect,
        })
    }

    /// Empirical operator constants over `probes` (boundary densities), each the largest
    /// observed ratio times a safety factor.
    pub fn calibrate(
        &self,
        problem: &BVProblem,
        probes: &[SampledFunction],
    ) -> Result<Calibration> {
        let rho = problem.exponents.rho;
        let mut c_n: f64 = 0.0;
        let mut l: f64 = 0.0;
        let mut m: f64 = 0.0;
        let mut samples = 0;
        let mut norms = Vec::with_capacity(probes.len());
        for g in probes {
            let a = self.a_norm(g)?.total;
            let data = self.ctx.data_norm(g)?;
            if data > 0.0 {
                c_n = c_n.max(a / data);
                samples += 1;
            }
            norms.push(a);
        }
        // Power iteration on g ↦ V·N g.
        for (g, &a0) in probes.iter().zip(&norms) {
            let mut current = g.clone();
            let mut a = a0;
            for _ in 0..POWER_STEPS {
                if a == 0.0 {
                    break;
                }
                let u = self.op.trace(&current)?;
                let (next, _) = self.op.prepare(&problem.v.zip_with(&u, |v, u| v * u)?)?;
                let a_next = self.a_norm(&next)?.total;
                l = l.max(a_next / a);
                samples += 1;
                current = next.scaled(1.0 / a_next.max(f64::MIN_POSITIVE));
                a = if a_next > 0.0 { 1.0 } else { 0.0 };
            }
        }
        let nonlinear = |u: &SampledFunction, v: &SampledFunction| -> Result<SampledFunction> {
            let diff = u.zip_with(v, |a, b| {
                a.abs().powf(rho - 1.0) * a - b.abs().powf(rho - 1.0) * b
            })?;
            Ok(self
                .op
                .prepare(&diff.zip_with(&problem.b, |d, b| d * b)?)?
                .0)
        };
        if problem.b.max_abs() > 0.0 {
            for (i, (gi, &ai)) in probes.iter().zip(&norms).enumerate() {
                if ai == 0.0 {
                    continue;
                }
                let partners: Vec<SampledFunction> = probes
                    .iter()
                    .skip(i + 1)
                    .take(3)
                    .cloned()
                    .chain([gi.scaled(0.5), gi.scaled(-1.0)])
                    .collect();
                let ui = self.op.trace(gi)?;
                for gj in &partners {
                    let aj = self.a_norm(gj)?.total;
                    let dist = self.a_distance(gi, gj)?;
                    if dist == 0.0 {
                        continue;
                    }
                    let num = self.a_norm(&nonlinear(&ui, &self.op.trace(gj)?)?)?.total;
                    m = m.max(num / (dist * (ai.powf(rho - 1.0) + aj.powf(rho - 1.0))));
                    samples += 1;
                }
            }
        }
        Ok(Calibration {
            c_n: SAFETY * c_n,
            l: SAFETY * l,
            m: SAFETY * m,
            safety: SAFETY,
            samples,
        })
    }
}

/// `picard_solve` on a freshly built free-space solver.
pub fn picard_solve(problem: &BVProblem, options: &PicardOptions) -> Result<PicardState> {
    Solver::new(problem.grid(), problem.exponents, Default::default())?.solve(problem, options)
}

/// Empirical constants: `C_N` bounds `‖N g‖_A/‖g‖_{M^ω_{p∞}}`, `L` the linear feedback
/// `‖N(V u)‖_A/‖u‖_A`, `M` the nonlinear Lipschitz factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub c_n: f64,
    pub l: f64,
    pub m: f64,
    pub safety: f64,
    pub samples: usize,
}

impl Calibration {
    pub fn certificate(&self, rho: f64) -> Certificate {
        contraction_certificate(self.l, self.m, rho)
    }

    /// `ε = C_N ‖f‖_{M^ω_{p∞}}`.
    pub fn data_size(&self, solver: &Solver, f: &SampledFunction) -> Result<f64> {
        Ok(self.c_n * solver.ctx.data_norm(f)?)
    }
}

/// Largest `ε` with `L + M 2^ρ (ε/(1−L))^{ρ−1} < (1+L)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub l: f64,
    pub m: f64,
    pub rho: f64,
    /// `f64::INFINITY` when `M = 0`.
    pub eps_max: f64,
    pub feasible: bool,
    /// Certified contraction factor `(1+L)/2`.
    pub theta: f64,
    pub data_size: Option<f64>,
}

pub fn contraction_certificate(l: f64, m: f64, rho: f64) -> Certificate {
    let feasible = l.is_finite() && (0.0..1.0).contains(&l) && m >= 0.0 && rho > 1.0;
    let eps_max = if !feasible {
        0.0
    } else if m == 0.0 {
        f64::INFINITY
    } else {
        (1.0 - l) * ((1.0 - l) / (2.0 * m * 2f64.powf(rho))).powf(1.0 / (rho - 1.0))
    };
    Certificate {
        l,
        m,
        rho,
        eps_max,
        feasible,
        theta: 0.5 * (1.0 + l),
        data_size: None,
    }
}

impl Certificate {
    pub fn for_data(mut self, eps: f64) -> Self {
        self.data_size = Some(eps);
        self
    }

    pub fn admits(&self, eps: f64) -> bool {
        self.feasible && eps < self.eps_max
    }

    pub fn valid(&self) -> bool {
        self.data_size.is_some_and(|e| self.admits(e))
    }

    /// Radius `2ε/(1−L)` of the invariant ball.
    pub fn ball_radius(&self, eps: f64) -> f64 {
        2.0 * eps / (1.0 - self.l)
    }

    /// Lipschitz bound `C/(1−θ)` of the data-to-solution map.
    pub fn lipschitz(&self, c_n: f64) -> f64 {
        c_n / (1.0 - self.theta)
    }
}
