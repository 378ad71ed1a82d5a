//! Residuals, energy, symmetry, positivity, stability and regularity diagnostics.

use rayon::prelude::*;
use serde::Serialize;

use super::{BVProblem, Exponents, PicardOptions, PicardState, Solver};
use crate::error::{invalid, Error, Result};
use crate::grid::{CubeFamily, GridSpec, SampledFunction};
use crate::morrey::weak_morrey_norm;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residual {
    /// Largest 2n+1-point Laplacian of the materialized field.
    pub interior: f64,
    /// `interior` divided by the largest single second difference at the same nodes.
    pub interior_relative: f64,
    /// `max |−∂_{x_n}u − (V u + b|u|^{ρ−1}u + f)|` on the boundary; `−∂_{x_n}N g = g` there.
    pub boundary: f64,
}

/// Residuals of `u = N g`; the interior part uses slab layers at heights `≥ min_height`.
pub fn residual(
    solver: &Solver,
    problem: &BVProblem,
    density: &SampledFunction,
    min_height: f64,
) -> Result<Residual> {
    let (image, _) = solver.step(problem, density)?;
    let boundary = image
        .values()
        .iter()
        .zip(density.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let slab = solver.op.value_slab(density)?;
    let (interior, scale) = laplacian_defect(&slab, min_height)?;
    Ok(Residual {
        interior,
        interior_relative: if scale > 0.0 {
            interior / scale
        } else {
            interior
        },
        boundary,
    })
}

/// Largest discrete Laplacian and largest second difference over nodes whose full stencil is
/// inside the grid and whose last coordinate is at least `min_height`.
pub fn laplacian_defect(field: &SampledFunction, min_height: f64) -> Result<(f64, f64)> {
    let g = field.grid();
    let dim = g.dim();
    let m = g.points_per_axis();
    let h = g.spacing();
    let first = (0..m)
        .find(|&j| j >= 1 && g.coord(dim - 1, j) >= min_height - 1e-12 * h)
        .ok_or_else(|| Error::InvalidHeights(format!("no layer at or above {min_height}")))?;
    if first + 1 >= m {
        return Err(Error::InvalidHeights(format!(
            "no interior layer at or above {min_height}"
        )));
    }
    let v = field.values();
    let (lap, scale) = (0..g.len())
        .into_par_iter()
        .filter_map(|k| {
            let idx = g.unflatten(k);
            let inside = (0..dim).all(|a| idx[a] >= 1 && idx[a] + 1 < m) && idx[dim - 1] >= first;
            if !inside {
                return None;
            }
            let mut lap = 0.0;
            let mut scale: f64 = 0.0;
            let mut stride = 1;
            for _ in 0..dim {
                let d2 = (v[k + stride] - 2.0 * v[k] + v[k - stride]) / (h * h);
                lap += d2;
                scale = scale.max(d2.abs());
                stride *= m;
            }
            Some((lap.abs(), scale))
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    Ok((lap, scale))
}

/// `E(u) = ½∫|∇u|² − ½∫V u² − 1/(ρ+1)∫ b|u|^{ρ+1} + ∫ u f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Energy {
    /// `½∫_{ℝⁿ₊}|∇u|²`, evaluated as `½∫ u g` on the boundary.
    pub dirichlet: f64,
    /// `½∫|∇u|²` over the materialized slab only.
    pub dirichlet_slab: f64,
    pub potential: f64,
    pub nonlinear: f64,
    pub source: f64,
    pub total: f64,
}

pub fn energy(solver: &Solver, problem: &BVProblem, density: &SampledFunction) -> Result<Energy> {
    let rho = problem.exponents.rho;
    let u = solver.op.trace(density)?;
    let w = u.weight();
    let sum = |f: &dyn Fn(usize) -> f64| (0..u.grid().len()).map(f).sum::<f64>() * w;
    let (uv, gv) = (u.values(), density.values());
    let dirichlet = 0.5 * sum(&|k| uv[k] * gv[k]);
    let potential = -0.5 * sum(&|k| problem.v.values()[k] * uv[k] * uv[k]);
    let nonlinear = -sum(&|k| problem.b.values()[k] * uv[k].abs().powf(rho + 1.0)) / (rho + 1.0);
    let source = sum(&|k| uv[k] * problem.f.values()[k]);
    let grad = solver.op.gradient_slab(density)?;
    let dirichlet_slab = 0.5 * grad.values().iter().map(|v| v * v).sum::<f64>() * grad.weight();
    Ok(Energy {
        dirichlet,
        dirichlet_slab,
        potential,
        nonlinear,
        source,
        total: dirichlet + potential + nonlinear + source,
    })
}

/// Data of `u_γ(x) = γ^{1/(ρ−1)} u(γx)`: the same samples on the box shrunk by `γ`, with
/// `f ↦ γ^{ρ/(ρ−1)} f` and `V ↦ γ V`.
pub fn scaled_problem(problem: &BVProblem, gamma: f64) -> Result<BVProblem> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(format!(
            "dilation factor must be positive, got {gamma}"
        )));
    }
    let g = problem.grid();
    let lower: Vec<f64> = g.lower().iter().map(|v| v / gamma).collect();
    let grid = GridSpec::new(
        g.dim(),
        g.half_width() / gamma,
        g.points_per_axis(),
        g.periodic(),
    )?
    .with_lower(&lower)?;
    let rho = problem.exponents.rho;
    let resample = |f: &SampledFunction, c: f64| {
        SampledFunction::new(grid.clone(), f.values().iter().map(|v| c * v).collect())
    };
    BVProblem::new(
        problem.exponents,
        resample(&problem.f, gamma.powf(rho / (rho - 1.0)))?,
        resample(&problem.v, gamma)?,
        resample(&problem.b, 1.0)?,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyScaling {
    pub energy: f64,
    pub energy_scaled: f64,
    pub ratio: f64,
    pub measured_exponent: f64,
    /// `2/(ρ−1) + 2 − n`.
    pub expected_exponent: f64,
}

/// Solves the problem and its `γ`-dilation on free-space solvers and compares energies.
pub fn energy_scaling_exponent(
    problem: &BVProblem,
    gamma: f64,
    options: &PicardOptions,
) -> Result<EnergyScaling> {
    let scaled = scaled_problem(problem, gamma)?;
    let run = |p: &BVProblem| -> Result<f64> {
        let solver = Solver::new(p.grid(), p.exponents, Default::default())?;
        let state = solver.solve(p, options)?;
        Ok(energy(&solver, p, &state.density)?.total)
    };
    let e = run(problem)?;
    let es = run(&scaled)?;
    let rho = problem.exponents.rho;
    Ok(EnergyScaling {
        energy: e,
        energy_scaled: es,
        ratio: es / e,
        measured_exponent: (es / e).ln() / gamma.ln(),
        expected_exponent: 2.0 / (rho - 1.0) + 2.0 - problem.exponents.n as f64,
    })
}

/// Lattice symmetries of a boundary box centred at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundaryMap {
    /// `(x₁, x₂) ↦ (−x₂, x₁)`, planar boundaries only.
    QuarterTurn,
    /// `x_a ↦ −x_a`.
    Reflect(usize),
}

impl BoundaryMap {
    fn check(&self, grid: &GridSpec) -> Result<()> {
        let centred = grid
            .lower()
            .iter()
            .all(|&l| (l + grid.half_width()).abs() <= 1e-12 * grid.half_width());
        if !centred {
            return Err(invalid(
                "lattice symmetries need a box centred at the origin",
            ));
        }
        match *self {
            BoundaryMap::QuarterTurn if grid.dim() != 2 => {
                Err(invalid("a quarter turn needs a two-dimensional boundary"))
            }
            BoundaryMap::Reflect(a) if a >= grid.dim() => {
                Err(invalid(format!("no axis {a} in dimension {}", grid.dim())))
            }
            _ => Ok(()),
        }
    }

    /// Index of `T(x)` for the node `idx`, or `None` when it falls outside a bounded grid.
    fn image(&self, grid: &GridSpec, idx: &[usize]) -> Option<usize> {
        let m = grid.points_per_axis();
        let neg = |i: usize| {
            if grid.periodic() {
                Some((m - i) % m)
            } else if i == 0 {
                None
            } else {
                Some(m - i)
            }
        };
        let mut out = [0usize; 3];
        out[..grid.dim()].copy_from_slice(&idx[..grid.dim()]);
        match *self {
            BoundaryMap::QuarterTurn => {
                out[0] = neg(idx[1])?;
                out[1] = idx[0];
            }
            BoundaryMap::Reflect(a) => out[a] = neg(idx[a])?,
        }
        Some(grid.flatten(&out[..grid.dim()]))
    }

    /// `f ∘ T`. On bounded grids `f` must vanish where `T` leaves the grid.
    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        let grid = f.grid();
        self.check(grid)?;
        let mut out = vec![0.0; grid.len()];
        for (k, slot) in out.iter_mut().enumerate() {
            if let Some(src) = self.image(grid, &grid.unflatten(k)) {
                *slot = f.values()[src];
            }
        }
        // Nodes never reached as images carry data the map would drop.
        let mut hit = vec![false; grid.len()];
        for k in 0..grid.len() {
            if let Some(src) = self.image(grid, &grid.unflatten(k)) {
                hit[src] = true;
            }
        }
        if let Some(k) = (0..grid.len()).find(|&k| !hit[k] && f.values()[k] != 0.0) {
            return Err(invalid(format!(
                "data is nonzero at node {:?}, which the symmetry maps off the grid",
                &grid.unflatten(k)[..grid.dim()]
            )));
        }
        SampledFunction::new(grid.clone(), out)
    }
}

pub fn rotate_quarter(f: &SampledFunction) -> Result<SampledFunction> {
    BoundaryMap::QuarterTurn.apply(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetryDefects {
    /// `max |u∘T − u|`.
    pub symmetric: f64,
    /// `max |u∘T + u|`.
    pub antisymmetric: f64,
}

/// Defects of `u` under `T` over the nodes whose image lies on the grid.
pub fn symmetry_check(u: &SampledFunction, map: BoundaryMap) -> Result<SymmetryDefects> {
    let grid = u.grid();
    map.check(grid)?;
    let v = u.values();
    let (mut sym, mut anti) = (0.0f64, 0.0f64);
    for k in 0..grid.len() {
        if let Some(src) = map.image(grid, &grid.unflatten(k)) {
            sym = sym.max((v[src] - v[k]).abs());
            anti = anti.max((v[src] + v[k]).abs());
        }
    }
    Ok(SymmetryDefects {
        symmetric: sym,
        antisymmetric: anti,
    })
}

/// `max |Φ_T(g∘T) − Φ(g)∘T|` for one Picard step, where `Φ_T` uses the mapped data.
pub fn picard_step_equivariance(
    solver: &Solver,
    problem: &BVProblem,
    density: &SampledFunction,
    map: BoundaryMap,
) -> Result<f64> {
    let mapped = BVProblem::new(
        problem.exponents,
        map.apply(&problem.f)?,
        map.apply(&problem.v)?,
        map.apply(&problem.b)?,
    )?;
    let (direct, _) = solver.step(problem, density)?;
    let (turned, _) = solver.step(&mapped, &map.apply(density)?)?;
    // Compare on nodes whose image exists; boundary rows of a bounded grid are not mapped.
    let grid = density.grid();
    let direct_v = direct.values();
    let turned_v = turned.values();
    Ok((0..grid.len())
        .filter_map(|k| {
            map.image(grid, &grid.unflatten(k))
                .map(|src| (turned_v[k] - direct_v[src]).abs())
        })
        .fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PositivityReport {
    /// Smallest value over all stored boundary iterates.
    pub min_iterate: f64,
    /// Smallest slab value of the limit where `N f > tol`.
    pub min_limit: f64,
    pub iterates_ok: bool,
    pub limit_ok: bool,
}

pub fn positivity_check(
    solver: &Solver,
    problem: &BVProblem,
    state: &PicardState,
    tol: f64,
) -> Result<PositivityReport> {
    let min_of = |f: &SampledFunction| f.values().iter().copied().fold(f64::INFINITY, f64::min);
    let min_iterate = state
        .iterates
        .iter()
        .map(min_of)
        .fold(f64::INFINITY, f64::min);
    let reference = solver.op.value_slab(&problem.f)?;
    let limit = solver.op.value_slab(&state.density)?;
    let mut min_limit = min_of(&state.trace);
    for (r, u) in reference.values().iter().zip(limit.values()) {
        if *r > tol {
            min_limit = min_limit.min(*u);
        }
    }
    Ok(PositivityReport {
        min_iterate,
        min_limit,
        iterates_ok: min_iterate >= -5.0 * tol,
        limit_ok: min_limit > 0.0 || problem.f.max_abs() == 0.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub solution_distance: f64,
    pub data_distance: f64,
    /// `‖u_{f₁} − u_{f₂}‖_A / ‖f₁ − f₂‖_{M^ω_{p∞}}`, zero when the data coincide.
    pub ratio: f64,
}

pub fn stability_check(
    solver: &Solver,
    problem: &BVProblem,
    f1: &SampledFunction,
    f2: &SampledFunction,
    options: &PicardOptions,
) -> Result<StabilityReport> {
    let data_distance = solver.ctx.data_norm(&f1.zip_with(f2, |a, b| a - b)?)?;
    if data_distance == 0.0 {
        return Ok(StabilityReport {
            solution_distance: 0.0,
            data_distance,
            ratio: 0.0,
        });
    }
    let s1 = solver.solve(&problem.with_f(f1.clone())?, options)?;
    let s2 = solver.solve(&problem.with_f(f2.clone())?, options)?;
    let solution_distance = solver.a_distance(&s1.density, &s2.density)?;
    Ok(StabilityReport {
        solution_distance,
        data_distance,
        ratio: solution_distance / data_distance,
    })
}

/// `max |u(x) − u(y)|/|x − y|^α` over pairs at dyadic offsets along each axis.
pub fn holder_quotient(u: &SampledFunction, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!(
            "Hoelder exponent must lie in (0, 1), got {alpha}"
        )));
    }
    let g = u.grid();
    let m = g.points_per_axis();
    let h = g.spacing();
    let v = u.values();
    let strides: Vec<usize> = (0..g.dim())
        .map(|a| m.pow((g.dim() - 1 - a) as u32))
        .collect();
    Ok((0..g.len())
        .into_par_iter()
        .map(|k| {
            let idx = g.unflatten(k);
            let mut best: f64 = 0.0;
            for a in 0..g.dim() {
                let mut s = 1;
                while idx[a] + s < m {
                    let diff = (v[k + s * strides[a]] - v[k]).abs();
                    best = best.max(diff / (s as f64 * h).powf(alpha));
                    s *= 2;
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max))
}

/// `‖|u|^{ρ−1}u − |v|^{ρ−1}v‖_{M^λ_{(q/ρ)∞}} / (‖u−v‖_{M^λ_{q∞}}(‖u‖^{ρ−1} + ‖v‖^{ρ−1}))`.
pub fn nonlinearity_ratio(
    u: &SampledFunction,
    v: &SampledFunction,
    e: &Exponents,
    cubes: &CubeFamily,
) -> Result<f64> {
    let rho = e.rho;
    let power = |x: f64| x.abs().powf(rho - 1.0) * x;
    let num = weak_morrey_norm(
        &u.zip_with(v, |a, b| power(a) - power(b))?,
        e.q / rho,
        e.lambda,
        cubes,
    )?
    .value;
    let norm = |f: &SampledFunction| -> Result<f64> {
        Ok(weak_morrey_norm(f, e.q, e.lambda, cubes)?.value)
    };
    let den = norm(&u.zip_with(v, |a, b| a - b)?)?
        * (norm(u)?.powf(rho - 1.0) + norm(v)?.powf(rho - 1.0));
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvp::LayerModel;
    use crate::grid::{make_grid, sample, CubeFamily};

    fn bump(x: &[f64]) -> f64 {
        (-4.0 * (x[0] * x[0] + x[1] * x[1])).exp()
    }

    /// Radial data cut to zero on the first row and column.
    fn radial(g: &GridSpec, amp: f64) -> SampledFunction {
        let lo = g.lower()[0] + 0.5 * g.spacing();
        sample(g, |x| {
            if x[0] < lo || x[1] < lo {
                0.0
            } else {
                amp * bump(x)
            }
        })
        .unwrap()
    }

    fn problem(g: &GridSpec, f: SampledFunction, v: f64, b: f64) -> BVProblem {
        BVProblem::new(
            Exponents::new(3, 3.0, 2.1).unwrap(),
            f,
            radial(g, v),
            radial(g, b),
        )
        .unwrap()
    }

    #[test]
    fn quarter_turn_symmetry_and_equivariance() {
        let g = make_grid(2, 2.0, 16, false).unwrap();
        let p = problem(&g, radial(&g, 0.5), 0.3, 0.2);
        let solver = Solver::new(&g, p.exponents, LayerModel::FreeSpace).unwrap();
        let state = solver.solve(&p, &PicardOptions::default()).unwrap();
        let d = symmetry_check(&state.trace, BoundaryMap::QuarterTurn).unwrap();
        assert!(d.symmetric < 5e-8, "{d:?}");
        let odd = sample(&g, |x| {
            if x[0] < -1.8 || x[1] < -1.8 {
                0.0
            } else {
                x[0] * x[1] * bump(x)
            }
        })
        .unwrap();
        let q = problem(&g, odd, 0.3, 0.2);
        let s = solver.solve(&q, &PicardOptions::default()).unwrap();
        let d = symmetry_check(&s.trace, BoundaryMap::QuarterTurn).unwrap();
        assert!(d.antisymmetric < 5e-8, "{d:?}");
        let e =
            picard_step_equivariance(&solver, &q, &s.density, BoundaryMap::QuarterTurn).unwrap();
        assert!(e < 1e-12);
        assert!(rotate_quarter(&SampledFunction::constant(&g, 1.0)).is_err());
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = make_grid(2, 2.0, 16, false).unwrap();
        let p = problem(&g, SampledFunction::zeros(&g), 0.3, 0.2);
        let solver = Solver::new(&g, p.exponents, LayerModel::FreeSpace).unwrap();
        let state = solver.solve(&p, &PicardOptions::default()).unwrap();
        assert_eq!(state.trace.max_abs(), 0.0);
        let d = symmetry_check(&state.trace, BoundaryMap::Reflect(0)).unwrap();
        assert_eq!((d.symmetric, d.antisymmetric), (0.0, 0.0));
        let en = energy(&solver, &p, &state.density).unwrap();
        assert_eq!(en.total, 0.0);
    }

    #[test]
    fn positivity_and_residual() {
        let g = make_grid(2, 2.0, 16, false).unwrap();
        let p = problem(&g, radial(&g, 0.5), 0.3, 0.2);
        let solver = Solver::new(&g, p.exponents, LayerModel::FreeSpace).unwrap();
        let opts = PicardOptions {
            tol: 1e-10,
            ..Default::default()
        };
        let state = solver.solve(&p, &opts).unwrap();
        let r = positivity_check(&solver, &p, &state, opts.tol).unwrap();
        assert!(r.iterates_ok && r.limit_ok, "{r:?}");
        let res = residual(&solver, &p, &state.density, 0.5).unwrap();
        assert!(res.boundary < 1e-9, "{res:?}");
        // Point-source sums are harmonic, so the interior defect is finite-difference error.
        let fine = make_grid(2, 2.0, 32, false).unwrap();
        let pf = problem(&fine, radial(&fine, 0.5), 0.0, 0.0);
        let sf = Solver::new(&fine, pf.exponents, LayerModel::FreeSpace).unwrap();
        let coarse = residual(&solver, &p, &p.f, 0.5).unwrap();
        let refined = residual(&sf, &pf, &pf.f, 0.5).unwrap();
        assert!(
            refined.interior < 0.35 * coarse.interior,
            "{coarse:?} {refined:?}"
        );
    }

    #[test]
    fn dirichlet_energy_is_nonnegative() {
        let g = make_grid(2, 2.0, 16, false).unwrap();
        let p = problem(&g, radial(&g, 1.0), 0.0, 0.0);
        let solver = Solver::new(&g, p.exponents, LayerModel::FreeSpace).unwrap();
        let en = energy(&solver, &p, &p.f).unwrap();
        assert!(en.dirichlet > 0.0 && en.dirichlet_slab > 0.0 && en.dirichlet_slab < en.dirichlet);
        assert_eq!(en.potential, 0.0);
        assert_eq!(en.nonlinear, 0.0);
    }

    #[test]
    fn critical_energy_is_dilation_invariant() {
        let g = make_grid(2, 2.0, 16, false).unwrap();
        let p = problem(&g, radial(&g, 0.5), 0.3, 0.2);
        let s = energy_scaling_exponent(&p, 2.0, &PicardOptions::default()).unwrap();
        assert_eq!(s.expected_exponent, 0.0);
        assert!((s.ratio - 1.0).abs() < 1e-6, "{s:?}");
    }

    #[test]
    fn holder_quotient_of_affine_field() {
        let g = make_grid(2, 1.0, 32, false).unwrap();
        let u = sample(&g, |x| 2.0 * x[0] - x[1]).unwrap();
        let q = holder_quotient(&u, 0.5).unwrap();
        // Lipschitz constant 2 along axes times diam^{1/2}.
        assert!(q <= 2.0 * 2f64.sqrt() + 1e-12 && q > 0.0);
        assert!(holder_quotient(&u, 1.0).is_err());
    }

    #[test]
    fn nonlinearity_ratio_is_bounded() {
        let g = make_grid(2, 1.0, 16, false).unwrap();
        let e = Exponents::new(3, 3.0, 2.1).unwrap();
        let cubes = CubeFamily::point_scale(&g, 2).unwrap();
        let u = sample(&g, |x| (3.0 * x[0]).sin() + x[1]).unwrap();
        let v = sample(&g, |x| 0.5 * (2.0 * x[1]).cos()).unwrap();
        let r = nonlinearity_ratio(&u, &v, &e, &cubes).unwrap();
        assert!(r > 0.0 && r < 10.0, "{r}");
        assert_eq!(nonlinearity_ratio(&u, &u, &e, &cubes).unwrap(), 0.0);
    }
}
