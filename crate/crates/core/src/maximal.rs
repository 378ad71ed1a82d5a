//! Fractional, Hardy-Littlewood and sharp maximal functions over cube families.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::grid::{CubeFamily, SampledFunction};
use crate::potential::riesz_potential_at;

/// A maximal function on the grid with the family index of the cube attaining it per node.
#[derive(Clone, Debug)]
pub struct MaximalResult {
    pub values: SampledFunction,
    pub argmax_cube_per_point: Option<Vec<u32>>,
}

impl MaximalResult {
    pub fn max(&self) -> f64 {
        self.values.values().iter().copied().fold(0.0, f64::max)
    }
}

fn check_alpha(alpha: f64, dim: usize) -> Result<()> {
    if !(alpha >= 0.0 && alpha < dim as f64) {
        return Err(invalid(format!(
            "alpha must lie in [0, {dim}), got {alpha}"
        )));
    }
    Ok(())
}

fn require_point_scale(cubes: &CubeFamily) -> Result<()> {
    if !cubes.has_point_scale() {
        return Err(invalid(
            "maximal functions need a family with single-cell cubes",
        ));
    }
    Ok(())
}

/// Per-node maximum of a per-cube score over the cubes containing the node.
fn scatter_max(f: &SampledFunction, cubes: &CubeFamily, scores: &[f64]) -> Result<MaximalResult> {
    let grid = f.grid();
    let mut best = vec![f64::NEG_INFINITY; grid.len()];
    let mut arg = vec![0u32; grid.len()];
    for (i, (q, &s)) in cubes.cubes().iter().zip(scores).enumerate() {
        q.for_each_node(grid, |k| {
            if s > best[k] {
                best[k] = s;
                arg[k] = i as u32;
            }
        });
    }
    let values = best.into_iter().map(|v| v.max(0.0)).collect();
    Ok(MaximalResult {
        values: SampledFunction::new(grid.clone(), values)?,
        argmax_cube_per_point: Some(arg),
    })
}

fn averages(f: &SampledFunction, cubes: &CubeFamily, alpha: f64) -> Vec<f64> {
    let grid = f.grid();
    let dim = grid.dim() as f64;
    cubes
        .cubes()
        .par_iter()
        .map(|q| {
            let mut sum = 0.0;
            q.for_each_node(grid, |k| sum += f.values()[k].abs());
            let mean = sum / q.node_count(grid) as f64;
            q.measure(grid).powf(alpha / dim) * mean
        })
        .collect()
}

/// `M_α f(x) = sup_{Q∋x} |Q|^{α/n} ⨍_Q |f|`; `α = 0` is the Hardy-Littlewood maximal function.
pub fn fractional_maximal(
    f: &SampledFunction,
    alpha: f64,
    cubes: &CubeFamily,
) -> Result<MaximalResult> {
    cubes.check_grid(f.grid())?;
    check_alpha(alpha, f.grid().dim())?;
    require_point_scale(cubes)?;
    scatter_max(f, cubes, &averages(f, cubes, alpha))
}

pub fn hardy_littlewood(f: &SampledFunction, cubes: &CubeFamily) -> Result<MaximalResult> {
    fractional_maximal(f, 0.0, cubes)
}

/// `M_α f` at one node, using only the cubes that contain it.
pub fn fractional_maximal_at(
    f: &SampledFunction,
    alpha: f64,
    cubes: &CubeFamily,
    node: usize,
) -> Result<f64> {
    cubes.check_grid(f.grid())?;
    check_alpha(alpha, f.grid().dim())?;
    let grid = f.grid();
    let idx = grid.unflatten(node);
    let dim = grid.dim() as f64;
    Ok(cubes
        .cubes()
        .par_iter()
        .filter(|q| q.contains(grid, &idx))
        .map(|q| {
            let mut sum = 0.0;
            q.for_each_node(grid, |k| sum += f.values()[k].abs());
            q.measure(grid).powf(alpha / dim) * sum / q.node_count(grid) as f64
        })
        .reduce(|| 0.0, f64::max))
}

/// Centred-ball variant at one node: `sup_ℓ |B(x,ℓ)|^{α/n} ⨍_{B(x,ℓ)} |f|` over `radii`,
/// with each ball discretized by the nodes it contains.
pub fn centered_ball_maximal_at(
    f: &SampledFunction,
    alpha: f64,
    node: usize,
    radii: &[f64],
) -> Result<f64> {
    let grid = f.grid();
    check_alpha(alpha, grid.dim())?;
    let x = grid.point(node);
    let w = f.weight();
    let mut dist: Vec<(f64, f64)> = (0..grid.len())
        .map(|k| {
            let y = grid.point(k);
            let r2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            (r2.sqrt(), f.values()[k].abs())
        })
        .collect();
    dist.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: f64 = 0.0;
    for &radius in radii {
        let inside = dist.partition_point(|(r, _)| *r < radius);
        if inside == 0 {
            continue;
        }
        let mass: f64 = dist[..inside].iter().map(|(_, v)| v).sum::<f64>() * w;
        let measure = inside as f64 * w;
        best = best.max(measure.powf(alpha / grid.dim() as f64) * mass / measure);
    }
    Ok(best)
}

/// `f♯(x) = sup_{Q∋x} ⨍_Q |f − f_Q|`.
pub fn sharp_maximal(f: &SampledFunction, cubes: &CubeFamily) -> Result<MaximalResult> {
    cubes.check_grid(f.grid())?;
    let grid = f.grid();
    let scores: Vec<f64> = cubes
        .cubes()
        .par_iter()
        .map_init(Vec::new, |buf, q| {
            q.gather(grid, f.values(), buf);
            let mean = buf.iter().sum::<f64>() / buf.len() as f64;
            buf.iter().map(|v| (v - mean).abs()).sum::<f64>() / buf.len() as f64
        })
        .collect();
    scatter_max(f, cubes, &scores)
}

/// `sup_x f♯(x)`, i.e. the largest mean oscillation over the family.
pub fn bmo_norm(f: &SampledFunction, cubes: &CubeFamily) -> Result<f64> {
    Ok(sharp_maximal(f, cubes)?.max())
}

/// Constant `(p/(p−1))^{1/k′}` bounding `sup M_{n/λ} f` by `‖f‖_{M^λ_{pk}}`.
pub fn fractional_sup_constant(p: f64, k: f64) -> f64 {
    (p / (p - 1.0)).powf(1.0 - 1.0 / k)
}

/// Radius splitting `I_δ f(x)` and both sides of `|I_δ f(x)| ≲ (M_α f)^{δ/α}(M₀ f)^{1−δ/α}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HedbergSplit {
    pub rho_opt: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub m_alpha: f64,
    pub m_zero: f64,
}

pub fn hedberg_split(
    f: &SampledFunction,
    delta: f64,
    alpha: f64,
    node: usize,
    cubes: &CubeFamily,
) -> Result<HedbergSplit> {
    if !(delta > 0.0 && delta < alpha) {
        return Err(invalid(format!(
            "need 0 < delta < alpha, got delta = {delta}, alpha = {alpha}"
        )));
    }
    let m_alpha = fractional_maximal_at(f, alpha, cubes, node)?;
    let m_zero = fractional_maximal_at(f, 0.0, cubes, node)?;
    if m_zero <= 0.0 {
        return Err(invalid(
            "M_0 f vanishes at the point; the split is undefined",
        ));
    }
    let lhs = riesz_potential_at(f, delta, node)?.abs();
    let theta = delta / alpha;
    Ok(HedbergSplit {
        rho_opt: (m_alpha / m_zero).powf(1.0 / alpha),
        lhs,
        rhs: m_alpha.powf(theta) * m_zero.powf(1.0 - theta),
        m_alpha,
        m_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{enumerate_cubes, make_grid, sample, GridSpec};

    fn family(g: &GridSpec) -> CubeFamily {
        CubeFamily::point_scale(g, 2).unwrap()
    }

    #[test]
    fn constant_is_fixed() {
        let g = make_grid(2, 1.0, 16, false).unwrap();
        let f = SampledFunction::constant(&g, 2.5);
        let m = hardy_littlewood(&f, &family(&g)).unwrap();
        assert!(m.values.values().iter().all(|v| (v - 2.5).abs() < 1e-12));
        assert!(sharp_maximal(&f, &family(&g)).unwrap().max() < 1e-12);
        assert!(fractional_maximal(&f, 2.0, &family(&g)).is_err());
        assert!(fractional_maximal(&f, 0.0, &enumerate_cubes(&g, 3, 1).unwrap()).is_err());
    }

    #[test]
    fn dominates_the_function() {
        let g = make_grid(2, 1.0, 32, false).unwrap();
        let f = sample(&g, |x| (4.0 * x[0]).sin() * (x[1] - 0.3)).unwrap();
        let m = hardy_littlewood(&f, &family(&g)).unwrap();
        for (mv, fv) in m.values.values().iter().zip(f.values()) {
            assert!(*mv >= fv.abs() - 1e-14);
        }
    }

    #[test]
    fn disc_with_ball_family() {
        let g = make_grid(2, 2.0, 128, false).unwrap();
        let f = sample(&g, |x| f64::from(u8::from(x[0].hypot(x[1]) < 1.0))).unwrap();
        let centre = g.node_index(&[0.0, 0.0]).unwrap();
        let radii: Vec<f64> = (1..=80).map(|i| 0.025 * i as f64).collect();
        let v = centered_ball_maximal_at(&f, 1.0, centre, &radii).unwrap();
        let exact = std::f64::consts::PI.sqrt();
        assert!((v / exact - 1.0).abs() < 0.03, "{v}");
    }

    #[test]
    fn sign_function_oscillation() {
        let g = make_grid(1, 1.0, 64, false).unwrap();
        let f = sample(&g, |x| if x[0] >= 0.0 { 1.0 } else { -1.0 }).unwrap();
        let fam = family(&g);
        let sharp = sharp_maximal(&f, &fam).unwrap();
        let centre = g.node_index(&[0.0]).unwrap();
        assert!((sharp.values.values()[centre] - 1.0).abs() < 1e-12);
        assert!((bmo_norm(&f, &fam).unwrap() - 1.0).abs() <= g.spacing());
        let ind = sample(&g, |x| f64::from(u8::from((0.0..0.5).contains(&x[0])))).unwrap();
        assert!(sharp_maximal(&ind, &fam).unwrap().max() <= 1.0);
    }

    #[test]
    fn hedberg_radius_scales() {
        let base = make_grid(2, 2.0, 64, false).unwrap();
        let f = sample(&base, |x| f64::from(u8::from(x[0].hypot(x[1]) < 1.0))).unwrap();
        let node = base.node_index(&[0.0, 0.0]).unwrap();
        let split = hedberg_split(&f, 0.5, 1.0, node, &family(&base)).unwrap();
        assert!(split.lhs <= 4.0 * split.rhs);
        let gamma = 2.0;
        let scaled_grid = make_grid(2, 2.0 / gamma, 64, false).unwrap();
        let fs = SampledFunction::new(scaled_grid.clone(), f.values().to_vec()).unwrap();
        let s2 = hedberg_split(&fs, 0.5, 1.0, node, &family(&scaled_grid)).unwrap();
        assert!((s2.rho_opt * gamma / split.rho_opt - 1.0).abs() < 0.05);
        let zero = SampledFunction::zeros(&base);
        assert!(hedberg_split(&zero, 0.5, 1.0, node, &family(&base)).is_err());
    }
}
