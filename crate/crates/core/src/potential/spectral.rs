//! Fourier-multiplier operators on the periodic boundary torus.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::{fft_nd, wave_number};
use crate::grid::{GridSpec, SampledFunction};

/// What `N` does with the constant mode, where its symbol `1/(2π|ξ|)` blows up.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum ZeroModePolicy {
    /// Reject data with nonzero mean.
    #[default]
    StrictReject,
    /// Silently project the data onto mean zero.
    DropZeroMode,
}

/// Harmonic field stored as boundary modes at a list of heights.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: GridSpec,
    heights: Vec<f64>,
    layers: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Unnormalized DFT coefficients at `heights[layer]`.
    pub fn modes(&self, layer: usize) -> &[Complex64] {
        &self.layers[layer]
    }

    /// Point values at `heights[layer]`.
    pub fn layer(&self, layer: usize) -> Result<SampledFunction> {
        inverse(&self.grid, self.layers[layer].clone())
    }

    /// Largest violation of `c(−k) = conj(c(k))` over all layers, relative to the largest mode.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        let m = g.points_per_axis();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for layer in &self.layers {
            for (k, c) in layer.iter().enumerate() {
                let idx = g.unflatten(k);
                let mut neg = [0usize; 3];
                for a in 0..g.dim() {
                    neg[a] = (m - idx[a]) % m;
                }
                let partner = layer[g.flatten(&neg)];
                worst = worst.max((c - partner.conj()).norm());
                scale = scale.max(c.norm());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            0.0
        }
    }

    /// Pointwise combination of two fields on the same grid and heights.
    pub fn zip_with(
        &self,
        other: &SpectralField,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<SpectralField> {
        self.grid.check_same(&other.grid)?;
        if self.heights != other.heights {
            return Err(Error::InvalidHeights("fields use different heights".into()));
        }
        let layers = self
            .layers
            .iter()
            .zip(&other.layers)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| op(*x, *y)).collect())
            .collect();
        Ok(SpectralField {
            grid: self.grid.clone(),
            heights: self.heights.clone(),
            layers,
        })
    }

    /// Largest modulus over all modes and layers, divided by the point count.
    pub fn max_mode(&self) -> f64 {
        let n = self.grid.len() as f64;
        self.layers
            .iter()
            .flatten()
            .fold(0.0, |m: f64, c| m.max(c.norm() / n))
    }
}

fn require_periodic(grid: &GridSpec) -> Result<()> {
    if !grid.periodic() {
        return Err(Error::InvalidGrid(
            "spectral operators need a periodic boundary grid".into(),
        ));
    }
    Ok(())
}

fn check_heights(heights: &[f64], allow_zero: bool) -> Result<()> {
    if heights.is_empty() {
        return Err(Error::InvalidHeights("empty height list".into()));
    }
    if let Some(h) = heights
        .iter()
        .find(|&&h| !h.is_finite() || h < 0.0 || (!allow_zero && h == 0.0))
    {
        return Err(Error::InvalidHeights(format!(
            "height {h} must be {}",
            if allow_zero {
                "non-negative"
            } else {
                "positive"
            }
        )));
    }
    Ok(())
}

pub(crate) fn forward(f: &SampledFunction) -> Vec<Complex64> {
    let g = f.grid();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut data, g.points_per_axis(), g.dim(), false);
    data
}

pub(crate) fn inverse(grid: &GridSpec, mut modes: Vec<Complex64>) -> Result<SampledFunction> {
    fft_nd(&mut modes, grid.points_per_axis(), grid.dim(), true);
    let n = grid.len() as f64;
    SampledFunction::new(grid.clone(), modes.iter().map(|c| c.re / n).collect())
}

/// Frequency vector `ξ = k/(2W)` of mode `flat`, and whether any component is the Nyquist index.
pub(crate) fn frequency(grid: &GridSpec, flat: usize) -> ([f64; 3], bool) {
    let m = grid.points_per_axis();
    let idx = grid.unflatten(flat);
    let mut xi = [0.0; 3];
    let mut nyquist = false;
    for a in 0..grid.dim() {
        xi[a] = wave_number(idx[a], m) as f64 / (2.0 * grid.half_width());
        nyquist |= m.is_multiple_of(2) && idx[a] == m / 2;
    }
    (xi, nyquist)
}

fn norm(xi: &[f64; 3]) -> f64 {
    (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
}

fn multiply(f: &SampledFunction, symbol: impl Fn(&[f64; 3], bool) -> Complex64) -> Vec<Complex64> {
    let g = f.grid();
    forward(f)
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let (xi, nyq) = frequency(g, k);
            c * symbol(&xi, nyq)
        })
        .collect()
}

fn field(
    f: &SampledFunction,
    heights: &[f64],
    symbol: impl Fn(&[f64; 3], bool, f64) -> Complex64,
) -> SpectralField {
    let g = f.grid();
    let base = forward(f);
    let freqs: Vec<([f64; 3], bool)> = (0..g.len()).map(|k| frequency(g, k)).collect();
    let layers = heights
        .iter()
        .map(|&t| {
            base.iter()
                .zip(&freqs)
                .map(|(c, (xi, nyq))| c * symbol(xi, *nyq, t))
                .collect()
        })
        .collect();
    SpectralField {
        grid: g.clone(),
        heights: heights.to_vec(),
        layers,
    }
}

/// Mean over the box.
pub fn mean(f: &SampledFunction) -> f64 {
    f.integral() / f.grid().volume()
}

pub fn subtract_mean(f: &SampledFunction) -> SampledFunction {
    let m = mean(f);
    f.map(|v| v - m).expect("finite")
}

fn apply_policy(f: &SampledFunction, policy: ZeroModePolicy) -> Result<()> {
    let m = mean(f);
    if policy == ZeroModePolicy::StrictReject && m.abs() > 1e-12 * f.max_abs().max(1e-300) {
        return Err(Error::ZeroMode { mean: m });
    }
    Ok(())
}

pub(crate) fn riesz_transform_spectral(
    f: &SampledFunction,
    axis: usize,
) -> Result<SampledFunction> {
    require_periodic(f.grid())?;
    let modes = multiply(f, |xi, nyq| {
        let r = norm(xi);
        if r == 0.0 || nyq {
            Complex64::default()
        } else {
            Complex64::new(0.0, xi[axis] / r)
        }
    });
    inverse(f.grid(), modes)
}

/// Two-thirds rule: drops every mode with some `|k_a| > m/3`.
pub fn dealias(f: &SampledFunction) -> Result<SampledFunction> {
    let g = f.grid();
    require_periodic(g)?;
    let m = g.points_per_axis();
    let mut modes = forward(f);
    for (k, c) in modes.iter_mut().enumerate() {
        let idx = g.unflatten(k);
        if (0..g.dim()).any(|a| 3 * wave_number(idx[a], m).unsigned_abs() as usize > m) {
            *c = Complex64::default();
        }
    }
    inverse(g, modes)
}

/// Poisson extension `D f`, symbol `e^{−2π|ξ|x_n}`.
pub fn single_layer_d(f: &SampledFunction, heights: &[f64]) -> Result<SpectralField> {
    require_periodic(f.grid())?;
    check_heights(heights, false)?;
    Ok(field(f, heights, |xi, _, t| {
        Complex64::new((-2.0 * PI * norm(xi) * t).exp(), 0.0)
    }))
}

/// Neumann extension `N f`, symbol `e^{−2π|ξ|x_n}/(2π|ξ|)`; height 0 gives the trace.
pub fn neumann_layer_n(
    f: &SampledFunction,
    heights: &[f64],
    policy: ZeroModePolicy,
) -> Result<SpectralField> {
    require_periodic(f.grid())?;
    check_heights(heights, true)?;
    apply_policy(f, policy)?;
    Ok(field(f, heights, |xi, _, t| {
        let r = norm(xi);
        if r == 0.0 {
            Complex64::default()
        } else {
            Complex64::new((-2.0 * PI * r * t).exp() / (2.0 * PI * r), 0.0)
        }
    }))
}

pub fn boundary_trace_n(f: &SampledFunction, policy: ZeroModePolicy) -> Result<SampledFunction> {
    neumann_layer_n(f, &[0.0], policy)?.layer(0)
}

/// `∂_{x_n} N f`, symbol `−e^{−2π|ξ|x_n}` off the zero mode.
pub fn normal_derivative_n(
    f: &SampledFunction,
    heights: &[f64],
    policy: ZeroModePolicy,
) -> Result<SpectralField> {
    require_periodic(f.grid())?;
    check_heights(heights, true)?;
    apply_policy(f, policy)?;
    Ok(field(f, heights, |xi, _, t| {
        let r = norm(xi);
        if r == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(-(-2.0 * PI * r * t).exp(), 0.0)
        }
    }))
}

/// `∇N f`: the tangential components `S_j D f`, then the normal component `−D f`.
pub fn grad_n(
    f: &SampledFunction,
    heights: &[f64],
    policy: ZeroModePolicy,
) -> Result<Vec<SpectralField>> {
    let mut out: Vec<SpectralField> = (0..f.grid().dim())
        .map(|axis| tangential_derivative_n(f, heights, policy, axis))
        .collect::<Result<_>>()?;
    out.push(normal_derivative_n(f, heights, policy)?);
    Ok(out)
}

/// `∂_j N f` computed as differentiation `2πiξ_j` of the `N` symbol.
fn tangential_derivative_n(
    f: &SampledFunction,
    heights: &[f64],
    policy: ZeroModePolicy,
    axis: usize,
) -> Result<SpectralField> {
    require_periodic(f.grid())?;
    check_heights(heights, true)?;
    apply_policy(f, policy)?;
    Ok(field(f, heights, |xi, nyq, t| {
        let r = norm(xi);
        if r == 0.0 || nyq {
            Complex64::default()
        } else {
            let n_symbol = (-2.0 * PI * r * t).exp() / (2.0 * PI * r);
            Complex64::new(0.0, 2.0 * PI * xi[axis]) * n_symbol
        }
    }))
}
