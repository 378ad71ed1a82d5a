//! Mild solutions of the Neumann problem
//! `Δu = 0` in the upper half-space, `∂u/∂ν = V u + b|u|^{ρ−1}u + f` on the boundary,
//! computed as fixed points of `u = N(f + V u + b|u|^{ρ−1}u)`.
//!
//! A field is represented by its Neumann density `g` (so `u = N g` and `−∂_{x_n}u = g` on the
//! boundary); traces, slab values and gradients are derived views.

mod checks;
mod oracles;
mod picard;

pub use checks::{
    energy, energy_scaling_exponent, holder_quotient, laplacian_defect, nonlinearity_ratio,
    picard_step_equivariance, positivity_check, residual, rotate_quarter, scaled_problem,
    stability_check, symmetry_check, BoundaryMap, Energy, EnergyScaling, PositivityReport,
    Residual, StabilityReport, SymmetryDefects,
};
pub use oracles::{oracle_bubble, oracle_linear, Bubble, LinearSolution};
pub use picard::{
    contraction_certificate, picard_solve, Calibration, Certificate, PicardOptions, PicardState,
};

use serde::Serialize;

use crate::error::{relation, Error, Result};
use crate::grid::{enumerate_cubes, CubeFamily, GridSpec, SampledFunction};
use crate::morrey::{weak_morrey_norm, MorreyParams};
use crate::potential::{dealias, grad_n, mean, neumann_layer_n, FreeSpaceLayer, ZeroModePolicy};

/// The exponent web tied to the nonlinearity `ρ` in dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Exponents {
    pub n: usize,
    pub rho: f64,
    /// Data space `M^ω_{p∞}`.
    pub omega: f64,
    pub p: f64,
    /// Trace space `M^λ_{q∞}`.
    pub lambda: f64,
    pub q: f64,
    /// Gradient space `M^μ_{r∞}`.
    pub mu: f64,
    pub r: f64,
}

impl Exponents {
    pub fn new(n: usize, rho: f64, mu: f64) -> Result<Self> {
        if n < 3 {
            return Err(relation(format!("n >= 3 (got n = {n})")));
        }
        let nm1 = n as f64 - 1.0;
        if !(rho > nm1 / (n as f64 - 2.0)) {
            return Err(relation(format!("(n-1)/(n-2) < rho (got rho = {rho})")));
        }
        let omega = nm1 * (rho - 1.0) / rho;
        let lambda = nm1 * (rho - 1.0);
        let p = omega / (nm1 * (mu / omega - 1.0));
        let r = mu * p / omega;
        let q = lambda * p / omega;
        let (lo, hi) = Self::mu_window(n, rho);
        if !(mu > lo && mu < hi) {
            return Err(relation(format!(
                "1 <= p <= omega requires {lo:.6} < mu < {hi:.6} (got mu = {mu})"
            )));
        }
        if !(mu < lambda) {
            return Err(relation(format!(
                "mu < lambda (got mu = {mu}, lambda = {lambda})"
            )));
        }
        if !(r > 1.0 && r < mu) {
            return Err(relation(format!("1 < r < mu (got r = {r}, mu = {mu})")));
        }
        Ok(Self {
            n,
            rho,
            omega,
            p,
            lambda,
            q,
            mu,
            r,
        })
    }

    /// Open interval of `μ` for which `1 ≤ p ≤ ω`.
    pub fn mu_window(n: usize, rho: f64) -> (f64, f64) {
        let nm1 = n as f64 - 1.0;
        let omega = nm1 * (rho - 1.0) / rho;
        (omega * n as f64 / nm1, omega + omega * omega / nm1)
    }

    /// `μ` at the centre of [`Self::mu_window`].
    pub fn centred(n: usize, rho: f64) -> Result<Self> {
        let (lo, hi) = Self::mu_window(n, rho);
        Self::new(n, rho, 0.5 * (lo + hi))
    }

    /// `(n−1)/ω − (n−1)/μ − 1/r`, zero up to rounding.
    pub fn scaling_defect(&self) -> f64 {
        let nm1 = self.n as f64 - 1.0;
        nm1 / self.omega - nm1 / self.mu - 1.0 / self.r
    }
}

/// How `N` is realized on the truncated boundary box.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum LayerModel {
    /// Whole-hyperplane kernel applied to data supported in the box.
    #[default]
    FreeSpace,
    /// Fourier symbols on the periodic torus; products are projected per the zero-mode policy
    /// and optionally truncated to the lower two thirds of the spectrum.
    Periodic {
        policy: ZeroModePolicy,
        dealias: bool,
    },
}

/// `N`, its trace and its gradient for one boundary grid.
pub struct LayerOperator {
    grid: GridSpec,
    model: LayerModel,
    free: Option<FreeSpaceLayer>,
}

impl LayerOperator {
    pub fn new(grid: &GridSpec, model: LayerModel) -> Result<Self> {
        let free = match model {
            LayerModel::FreeSpace => Some(FreeSpaceLayer::new(grid)?),
            LayerModel::Periodic { .. } => {
                if !grid.periodic() {
                    return Err(Error::InvalidGrid(
                        "periodic layer model needs a periodic grid".into(),
                    ));
                }
                None
            }
        };
        Ok(Self {
            grid: grid.clone(),
            model,
            free,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn model(&self) -> LayerModel {
        self.model
    }

    /// Density actually fed to `N`, and the mean removed from it (zero in free space).
    pub fn prepare(&self, density: &SampledFunction) -> Result<(SampledFunction, f64)> {
        match self.model {
            LayerModel::FreeSpace => Ok((density.clone(), 0.0)),
            LayerModel::Periodic {
                policy,
                dealias: truncate,
            } => {
                let m = mean(density);
                if policy == ZeroModePolicy::StrictReject
                    && m.abs() > 1e-12 * density.max_abs().max(1e-300)
                {
                    return Err(Error::ZeroMode { mean: m });
                }
                let mut out = density.map(|v| v - m)?;
                if truncate {
                    out = dealias(&out)?;
                }
                Ok((out, m))
            }
        }
    }

    fn policy(&self) -> ZeroModePolicy {
        match self.model {
            LayerModel::FreeSpace => ZeroModePolicy::StrictReject,
            LayerModel::Periodic { .. } => ZeroModePolicy::DropZeroMode,
        }
    }

    pub fn trace(&self, density: &SampledFunction) -> Result<SampledFunction> {
        match &self.free {
            Some(layer) => layer.trace(density),
            None => neumann_layer_n(density, &[0.0], self.policy())?.layer(0),
        }
    }

    pub fn value_at(&self, density: &SampledFunction, t: f64) -> Result<Vec<f64>> {
        match &self.free {
            Some(layer) => layer.value_at(density, t),
            None => Ok(neumann_layer_n(density, &[t], self.policy())?
                .layer(0)?
                .into_values()),
        }
    }

    /// Tangential components, then `∂_{x_n}`.
    pub fn gradient_at(&self, density: &SampledFunction, t: f64) -> Result<Vec<Vec<f64>>> {
        match &self.free {
            Some(layer) => layer.gradient_at(density, t),
            None => grad_n(density, &[t], self.policy())?
                .iter()
                .map(|field| Ok(field.layer(0)?.into_values()))
                .collect(),
        }
    }

    /// Interior slab over the boundary box with heights `h, 2h, …, mh`.
    pub fn slab_grid(&self) -> Result<GridSpec> {
        self.slab_grid_from(self.grid.spacing())
    }

    fn slab_grid_from(&self, bottom: f64) -> Result<GridSpec> {
        let g = &self.grid;
        let mut lower = g.lower().to_vec();
        lower.push(bottom);
        GridSpec::new(g.dim() + 1, g.half_width(), g.points_per_axis(), false)?.with_lower(&lower)
    }

    fn assemble(&self, slab: GridSpec, layers: Vec<Vec<f64>>) -> Result<SampledFunction> {
        let m = self.grid.points_per_axis();
        let mut values = vec![0.0; slab.len()];
        for (j, layer) in layers.iter().enumerate() {
            for (k, v) in layer.iter().enumerate() {
                values[k * m + j] = *v;
            }
        }
        SampledFunction::new(slab, values)
    }

    /// `|∇N g|` on [`Self::slab_grid`].
    pub fn gradient_slab(&self, density: &SampledFunction) -> Result<SampledFunction> {
        let m = self.grid.points_per_axis();
        let h = self.grid.spacing();
        let layers = (1..=m)
            .map(|j| {
                let grad = self.gradient_at(density, j as f64 * h)?;
                Ok((0..self.grid.len())
                    .map(|k| grad.iter().map(|c| c[k] * c[k]).sum::<f64>().sqrt())
                    .collect())
            })
            .collect::<Result<_>>()?;
        self.assemble(self.slab_grid()?, layers)
    }

    /// `N g` at heights `0, h, …, (m−1)h`; the first layer is the trace.
    pub fn closed_slab(&self, density: &SampledFunction) -> Result<SampledFunction> {
        let m = self.grid.points_per_axis();
        let h = self.grid.spacing();
        let mut layers = vec![self.trace(density)?.into_values()];
        for j in 1..m {
            layers.push(self.value_at(density, j as f64 * h)?);
        }
        self.assemble(self.slab_grid_from(0.0)?, layers)
    }

    /// `N g` at heights `h, …, mh`.
    pub fn value_slab(&self, density: &SampledFunction) -> Result<SampledFunction> {
        let m = self.grid.points_per_axis();
        let h = self.grid.spacing();
        let layers = (1..=m)
            .map(|j| self.value_at(density, j as f64 * h))
            .collect::<Result<_>>()?;
        self.assemble(self.slab_grid()?, layers)
    }
}

/// Boundary data of the problem, on one shared boundary grid.
#[derive(Clone, Debug)]
pub struct BVProblem {
    pub exponents: Exponents,
    pub f: SampledFunction,
    pub v: SampledFunction,
    pub b: SampledFunction,
}

impl BVProblem {
    pub fn new(
        exponents: Exponents,
        f: SampledFunction,
        v: SampledFunction,
        b: SampledFunction,
    ) -> Result<Self> {
        if f.grid().dim() + 1 != exponents.n {
            return Err(Error::GridMismatch(format!(
                "boundary grid of dimension {} for n = {}",
                f.grid().dim(),
                exponents.n
            )));
        }
        f.grid().check_same(v.grid())?;
        f.grid().check_same(b.grid())?;
        Ok(Self { exponents, f, v, b })
    }

    pub fn grid(&self) -> &GridSpec {
        self.f.grid()
    }

    /// `f + V u + b|u|^{ρ−1}u`.
    pub fn density_of(&self, u: &SampledFunction) -> Result<SampledFunction> {
        let rho = self.exponents.rho;
        let values = self
            .f
            .values()
            .iter()
            .zip(self.v.values())
            .zip(self.b.values())
            .zip(u.values())
            .map(|(((f, v), b), u)| f + v * u + b * u.abs().powf(rho - 1.0) * u)
            .collect();
        SampledFunction::new(self.grid().clone(), values)
    }

    pub fn with_f(&self, f: SampledFunction) -> Result<Self> {
        Self::new(self.exponents, f, self.v.clone(), self.b.clone())
    }
}

/// Cube families for the two parts of the A-norm.
pub struct NormContext {
    pub exponents: Exponents,
    pub boundary_cubes: CubeFamily,
    pub slab_cubes: CubeFamily,
}

impl NormContext {
    pub fn new(op: &LayerOperator, exponents: Exponents) -> Result<Self> {
        let boundary = op.grid();
        let boundary_cubes = CubeFamily::point_scale(boundary, 2)?;
        let slab = op.slab_grid()?;
        let scales = (slab.points_per_axis().trailing_zeros() as usize).clamp(3, 6);
        let slab_cubes = enumerate_cubes(&slab, scales, 1)?;
        Ok(Self {
            exponents,
            boundary_cubes,
            slab_cubes,
        })
    }

    /// `‖·‖_{M^ω_{p∞}}` on the boundary.
    pub fn data_norm(&self, f: &SampledFunction) -> Result<f64> {
        let e = &self.exponents;
        Ok(weak_morrey_norm(f, e.p, e.omega, &self.boundary_cubes)?.value)
    }

    /// `‖·‖_{M^λ_{q∞}}` on the boundary.
    pub fn trace_norm(&self, u: &SampledFunction) -> Result<f64> {
        let e = &self.exponents;
        Ok(weak_morrey_norm(u, e.q, e.lambda, &self.boundary_cubes)?.value)
    }
}

/// `‖|∇u|‖_{M^μ_{r∞}} + ‖u|₀‖_{M^λ_{q∞}}` for `u = N g`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ANorm {
    pub grad_part: f64,
    pub trace_part: f64,
    pub total: f64,
}

pub fn a_norm(op: &LayerOperator, ctx: &NormContext, density: &SampledFunction) -> Result<ANorm> {
    if density.max_abs() == 0.0 {
        return Ok(ANorm::default());
    }
    let e = &ctx.exponents;
    let grad = op.gradient_slab(density)?;
    let grad_part = weak_morrey_norm(&grad, e.r, e.mu, &ctx.slab_cubes)?.value;
    let trace_part = ctx.trace_norm(&op.trace(density)?)?;
    Ok(ANorm {
        grad_part,
        trace_part,
        total: grad_part + trace_part,
    })
}

/// Layer operator and norm context shared by calibration, solves and checks.
pub struct Solver {
    pub op: LayerOperator,
    pub ctx: NormContext,
}

impl Solver {
    pub fn new(grid: &GridSpec, exponents: Exponents, model: LayerModel) -> Result<Self> {
        let op = LayerOperator::new(grid, model)?;
        let ctx = NormContext::new(&op, exponents)?;
        Ok(Self { op, ctx })
    }

    pub fn exponents(&self) -> &Exponents {
        &self.ctx.exponents
    }

    pub fn a_norm(&self, density: &SampledFunction) -> Result<ANorm> {
        a_norm(&self.op, &self.ctx, density)
    }

    /// `A`-norm of `N(g₁ − g₂)`.
    pub fn a_distance(&self, g1: &SampledFunction, g2: &SampledFunction) -> Result<f64> {
        Ok(self.a_norm(&g1.zip_with(g2, |a, b| a - b)?)?.total)
    }
}

/// Weak-Morrey parameters of the gradient part, exposed for reports.
pub fn gradient_params(e: &Exponents) -> Result<MorreyParams> {
    MorreyParams::weak(e.r, e.mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};

    #[test]
    fn exponent_web_at_rho_three() {
        let e = Exponents::new(3, 3.0, 2.1).unwrap();
        assert!((e.omega - 4.0 / 3.0).abs() < 1e-12);
        assert!((e.lambda - 4.0).abs() < 1e-12);
        assert!((e.p - 1.159420289855).abs() < 1e-9);
        assert!((e.r - 1.826086956522).abs() < 1e-9);
        assert!((e.q - 3.478260869565).abs() < 1e-9);
        assert!(e.scaling_defect().abs() < 1e-12);
        assert!((e.r / e.mu - e.q / e.lambda).abs() < 1e-12);
        assert!(Exponents::new(3, 3.0, 3.0).is_err());
        assert!(Exponents::new(3, 1.5, 1.0).is_err());
    }

    #[test]
    fn zero_density_has_zero_norm() {
        let g = make_grid(2, 1.0, 16, false).unwrap();
        let op = LayerOperator::new(&g, LayerModel::FreeSpace).unwrap();
        let ctx = NormContext::new(&op, Exponents::new(3, 3.0, 2.1).unwrap()).unwrap();
        let a = a_norm(&op, &ctx, &SampledFunction::zeros(&g)).unwrap();
        assert_eq!((a.grad_part, a.trace_part, a.total), (0.0, 0.0, 0.0));
    }

    #[test]
    fn single_mode_parts_are_finite() {
        let g = make_grid(2, 0.5, 16, true).unwrap();
        let model = LayerModel::Periodic {
            policy: ZeroModePolicy::StrictReject,
            dealias: false,
        };
        let op = LayerOperator::new(&g, model).unwrap();
        let ctx = NormContext::new(&op, Exponents::new(3, 3.0, 2.1).unwrap()).unwrap();
        let f = sample(&g, |x| (2.0 * std::f64::consts::PI * x[0]).cos()).unwrap();
        let a = a_norm(&op, &ctx, &f).unwrap();
        assert!(a.grad_part.is_finite() && a.grad_part > 0.0);
        // The trace is cos/(2π): its weak Morrey norm is bounded by the sup times |box|^{1/λ}.
        assert!(a.trace_part <= 1.0 / (2.0 * std::f64::consts::PI) * 1.0 + 1e-12);
    }
}
