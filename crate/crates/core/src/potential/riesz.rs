use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::fft::Convolution;
use crate::grid::{GridSpec, SampledFunction};
use crate::quad::{cell_integral_power, integrate_box};

/// Cells within this many steps (max-norm) of the target get exact cell integrals.
const NEAR: i64 = 4;

/// `c_{nα}` in `I_α f = c_{nα} ∫ f(y)|x−y|^{α−n} dy`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RieszConstant {
    n: usize,
    alpha: f64,
    c: f64,
}

impl RieszConstant {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        let nf = n as f64;
        if !(alpha > 0.0 && alpha < nf) {
            return Err(invalid(format!(
                "order alpha must lie in (0, {n}), got {alpha}"
            )));
        }
        let c = gamma((nf - alpha) / 2.0)
            / (2f64.powf(alpha) * std::f64::consts::PI.powf(nf / 2.0) * gamma(alpha / 2.0));
        Ok(Self { n, alpha, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn value(&self) -> f64 {
        self.c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PotentialMethod {
    /// Zero-padded FFT convolution with the cell-weight table.
    Quadrature,
    /// Point-by-point near/far sums with the same weights.
    HedbergSplit,
}

/// Cell weights `c ∫_{cell(Δ)} |y|^{α−n} dy` for offsets `Δ` in grid steps; each sample is
/// spread over the cell centred on its node.
pub(crate) struct PowerWeights {
    dim: usize,
    h: f64,
    exponent: f64,
    c: f64,
    near: Vec<f64>,
}

impl PowerWeights {
    pub(crate) fn new(grid: &GridSpec, alpha: f64) -> Result<Self> {
        let dim = grid.dim();
        let c = RieszConstant::new(dim, alpha)?.value();
        let h = grid.spacing();
        let width = (2 * NEAR + 1) as usize;
        let near = (0..width.pow(dim as u32))
            .into_par_iter()
            .map(|flat| {
                let offset = near_offset(flat, dim);
                let center: Vec<f64> = offset[..dim].iter().map(|&o| o as f64 * h).collect();
                c * cell_integral_power(&center, h, alpha)
            })
            .collect();
        Ok(Self {
            dim,
            h,
            exponent: alpha - dim as f64,
            c,
            near,
        })
    }

    pub(crate) fn weight(&self, offset: &[i64]) -> f64 {
        if offset.iter().all(|o| o.abs() <= NEAR) {
            let flat = offset.iter().fold(0usize, |acc, &o| {
                acc * (2 * NEAR + 1) as usize + (o + NEAR) as usize
            });
            return self.near[flat];
        }
        let r2: f64 = offset.iter().map(|&o| (o as f64 * self.h).powi(2)).sum();
        self.c * self.h.powi(self.dim as i32) * r2.powf(0.5 * self.exponent)
    }
}

fn near_offset(flat: usize, dim: usize) -> [i64; 3] {
    let width = (2 * NEAR + 1) as usize;
    let mut offset = [0i64; 3];
    let mut rest = flat;
    for a in (0..dim).rev() {
        offset[a] = (rest % width) as i64 - NEAR;
        rest /= width;
    }
    offset
}

fn reject_periodic(grid: &GridSpec) -> Result<()> {
    if grid.periodic() {
        return Err(Error::InvalidGrid(
            "Riesz potentials act on compactly supported data; use a non-periodic grid".into(),
        ));
    }
    Ok(())
}

/// `I_α f` on the grid of `f`, treating `f` as zero outside its box.
pub fn riesz_potential(
    f: &SampledFunction,
    alpha: f64,
    method: PotentialMethod,
) -> Result<SampledFunction> {
    let grid = f.grid();
    reject_periodic(grid)?;
    let weights = PowerWeights::new(grid, alpha)?;
    let values = match method {
        PotentialMethod::Quadrature => {
            Convolution::new(grid.points_per_axis(), grid.dim(), |o| weights.weight(o))
                .apply(f.values())
        }
        PotentialMethod::HedbergSplit => (0..grid.len())
            .into_par_iter()
            .map(|k| direct_sum(f, &weights, k))
            .collect(),
    };
    SampledFunction::new(grid.clone(), values)
}

/// `I_α f` at the single node `node`.
pub fn riesz_potential_at(f: &SampledFunction, alpha: f64, node: usize) -> Result<f64> {
    reject_periodic(f.grid())?;
    let weights = PowerWeights::new(f.grid(), alpha)?;
    Ok(direct_sum(f, &weights, node))
}

fn direct_sum(f: &SampledFunction, weights: &PowerWeights, node: usize) -> f64 {
    let grid = f.grid();
    let dim = grid.dim();
    let x = grid.unflatten(node);
    let mut offset = [0i64; 3];
    let mut total = 0.0;
    for (k, v) in f.values().iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let y = grid.unflatten(k);
        for a in 0..dim {
            offset[a] = x[a] as i64 - y[a] as i64;
        }
        total += weights.weight(&offset[..dim]) * v;
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TransformMethod {
    /// Fourier multiplier `iξ_j/|ξ|` on a periodic grid.
    Spectral,
    /// Principal-value quadrature of the kernel on compactly supported data.
    PvQuadrature,
}

/// Tangential transform `S_j` with symbol `iξ_j/|ξ|` along the 0-based `axis`.
pub fn riesz_transform(
    f: &SampledFunction,
    axis: usize,
    method: TransformMethod,
) -> Result<SampledFunction> {
    let dim = f.grid().dim();
    if axis >= dim {
        return Err(invalid(format!(
            "component {} out of range 1..={dim}",
            axis + 1
        )));
    }
    match method {
        TransformMethod::Spectral => super::spectral::riesz_transform_spectral(f, axis),
        TransformMethod::PvQuadrature => riesz_transform_pv(f, axis),
    }
}

/// `c_d ∫ y_j/|y|^{d+1}` style kernel normalization on `ℝ^d`.
pub fn transform_constant(dim: usize) -> f64 {
    let e = (dim as f64 + 1.0) / 2.0;
    gamma(e) / std::f64::consts::PI.powf(e)
}

/// `S_j f(x) = c_d P.V.∫ y_j |y|^{−d−1} f(x + y) dy`; the self cell contributes through
/// the first-order Taylor term of `f`.
fn riesz_transform_pv(f: &SampledFunction, axis: usize) -> Result<SampledFunction> {
    let grid = f.grid();
    let dim = grid.dim();
    let m = grid.points_per_axis();
    let h = grid.spacing();
    let cd = transform_constant(dim);
    let width = (2 * NEAR + 1) as usize;
    let near: Vec<f64> = (0..width.pow(dim as u32))
        .into_par_iter()
        .map(|flat| {
            let offset = near_offset(flat, dim);
            if offset[..dim].iter().all(|&o| o == 0) {
                return 0.0;
            }
            let lo: Vec<f64> = offset[..dim]
                .iter()
                .map(|&o| (o as f64 - 0.5) * h)
                .collect();
            let hi: Vec<f64> = offset[..dim]
                .iter()
                .map(|&o| (o as f64 + 0.5) * h)
                .collect();
            cd * integrate_box(&lo, &hi, 2, 8, |y| {
                let r2: f64 = y.iter().map(|v| v * v).sum();
                y[axis] * r2.powf(-0.5 * (dim as f64 + 1.0))
            })
        })
        .collect();
    let kernel = |o: &[i64]| {
        // Correlation: the weight of f(x + Δ) sits at convolution offset −Δ.
        let delta: Vec<i64> = o.iter().map(|v| -v).collect();
        if delta.iter().all(|d| d.abs() <= NEAR) {
            let flat = delta
                .iter()
                .fold(0usize, |acc, &d| acc * width + (d + NEAR) as usize);
            return near[flat];
        }
        let r2: f64 = delta.iter().map(|&d| (d as f64 * h).powi(2)).sum();
        cd * h.powi(dim as i32) * delta[axis] as f64 * h * r2.powf(-0.5 * (dim as f64 + 1.0))
    };
    let mut values = Convolution::new(m, dim, kernel).apply(f.values());
    let self_cell = cd * cell_integral_power(&vec![0.0; dim], h, 1.0) / dim as f64;
    let stride = m.pow((dim - 1 - axis) as u32);
    for (k, v) in values.iter_mut().enumerate() {
        let i = grid.unflatten(k)[axis];
        let up = if i + 1 < m {
            f.values()[k + stride]
        } else {
            0.0
        };
        let down = if i > 0 { f.values()[k - stride] } else { 0.0 };
        *v += self_cell * (up - down) / (2.0 * h);
    }
    SampledFunction::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};
    use std::f64::consts::PI;

    #[test]
    fn constant_in_the_plane() {
        let c = RieszConstant::new(2, 1.0).unwrap().value();
        assert!((c - 1.0 / (2.0 * PI)).abs() < 1e-14);
        assert!(RieszConstant::new(2, 2.0).is_err());
        assert!(RieszConstant::new(2, 0.0).is_err());
    }

    #[test]
    fn disc_oracle_at_origin() {
        let g = make_grid(2, 2.0, 128, false).unwrap();
        let f = sample(&g, |x| if x[0].hypot(x[1]) < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let centre = g.node_index(&[0.0, 0.0]).unwrap();
        let at = riesz_potential_at(&f, 1.0, centre).unwrap();
        assert!((at - 1.0).abs() < 0.01, "{at}");
        let full = riesz_potential(&f, 1.0, PotentialMethod::Quadrature).unwrap();
        assert!((full.values()[centre] - at).abs() < 1e-10);
    }

    #[test]
    fn methods_agree() {
        let g = make_grid(2, 1.0, 32, false).unwrap();
        let f = sample(&g, |x| (-(8.0 * (x[0] * x[0] + x[1] * x[1]))).exp()).unwrap();
        let a = riesz_potential(&f, 0.7, PotentialMethod::Quadrature).unwrap();
        let b = riesz_potential(&f, 0.7, PotentialMethod::HedbergSplit).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn translation_equivariance() {
        let g = make_grid(2, 1.0, 32, false).unwrap();
        let bump = |x: &[f64], s: f64| {
            (-(20.0 * ((x[0] - s).powi(2) + x[1] * x[1]))).exp()
                * f64::from(u8::from((x[0] - s).abs() < 0.4 && x[1].abs() < 0.4))
        };
        let f = sample(&g, |x| bump(x, 0.0)).unwrap();
        let shift = 4;
        let fs = sample(&g, |x| bump(x, shift as f64 * g.spacing())).unwrap();
        let a = riesz_potential(&f, 1.2, PotentialMethod::Quadrature).unwrap();
        let b = riesz_potential(&fs, 1.2, PotentialMethod::Quadrature).unwrap();
        let m = g.points_per_axis();
        for i in 0..m - shift {
            for j in 0..m {
                let lhs = b.at(&[i + shift, j]);
                let rhs = a.at(&[i, j]);
                assert!((lhs - rhs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let g = make_grid(1, 1.0, 16, false).unwrap();
        let z = riesz_potential(
            &SampledFunction::zeros(&g),
            0.5,
            PotentialMethod::Quadrature,
        )
        .unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let gp = make_grid(1, 1.0, 16, true).unwrap();
        assert!(riesz_potential(
            &SampledFunction::zeros(&gp),
            0.5,
            PotentialMethod::Quadrature
        )
        .is_err());
    }

    #[test]
    fn pv_matches_spectral_on_gaussian() {
        for dim in [1usize, 2] {
            let m = if dim == 1 { 1024 } else { 128 };
            let gp = make_grid(dim, 8.0, m, true).unwrap();
            let ga = make_grid(dim, 8.0, m, false).unwrap();
            // Odd in x1, so the transform decays fast enough for the periodic images to be negligible.
            let bump = |x: &[f64]| x[0] * (-x.iter().map(|v| v * v).sum::<f64>() / 0.5).exp();
            let spectral =
                riesz_transform(&sample(&gp, bump).unwrap(), 0, TransformMethod::Spectral).unwrap();
            let pv = riesz_transform(
                &sample(&ga, bump).unwrap(),
                0,
                TransformMethod::PvQuadrature,
            )
            .unwrap();
            let scale = spectral.max_abs();
            let err = spectral
                .values()
                .iter()
                .zip(pv.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 0.02 * scale, "dim {dim}: {err} vs {scale}");
        }
    }
}
