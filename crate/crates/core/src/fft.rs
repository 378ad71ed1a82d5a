//! Multidimensional FFTs and aperiodic convolutions on square grids.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// In-place FFT over every axis of a row-major `side^dim` array (unnormalized).
pub(crate) fn fft_nd(data: &mut [Complex64], side: usize, dim: usize, inverse: bool) {
    let plan = plan(side, inverse);
    transform_nd(data, side, dim, &plan);
}

pub(crate) fn plan(side: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(side)
    } else {
        planner.plan_fft_forward(side)
    }
}

fn transform_nd(data: &mut [Complex64], side: usize, dim: usize, plan: &Arc<dyn Fft<f64>>) {
    debug_assert_eq!(data.len(), side.pow(dim as u32));
    for axis in 0..dim {
        let stride = side.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            data.par_chunks_mut(side).for_each(|row| plan.process(row));
            continue;
        }
        let block = side * stride;
        data.par_chunks_mut(block).for_each(|chunk| {
            let mut line = vec![Complex64::default(); side];
            for offset in 0..stride {
                for (i, v) in line.iter_mut().enumerate() {
                    *v = chunk[offset + i * stride];
                }
                plan.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    chunk[offset + i * stride] = *v;
                }
            }
        });
    }
}

/// Signed wave numbers of an FFT of length `side`.
pub(crate) fn wave_number(index: usize, side: usize) -> i64 {
    if index <= side / 2 {
        index as i64
    } else {
        index as i64 - side as i64
    }
}

/// Linear (zero-padded) convolution `out[x] = Σ_y K(x − y) f[y]` on a `side^dim` grid.
pub(crate) struct Convolution {
    side: usize,
    dim: usize,
    kernel_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Convolution {
    /// `kernel` receives the integer offset `x − y`, each component in `−(side−1)..=side−1`.
    pub(crate) fn new(side: usize, dim: usize, kernel: impl Fn(&[i64]) -> f64 + Sync) -> Self {
        let padded = 2 * side;
        let total = padded.pow(dim as u32);
        let mut kernel_hat: Vec<Complex64> = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut offset = [0i64; 3];
                let mut rest = flat;
                for a in (0..dim).rev() {
                    let i = rest % padded;
                    rest /= padded;
                    if i == side {
                        return Complex64::default();
                    }
                    offset[a] = wave_number(i, padded);
                }
                Complex64::new(kernel(&offset[..dim]), 0.0)
            })
            .collect();
        let forward = plan(padded, false);
        let inverse = plan(padded, true);
        transform_nd(&mut kernel_hat, padded, dim, &forward);
        Self {
            side,
            dim,
            kernel_hat,
            forward,
            inverse,
        }
    }

    pub(crate) fn apply(&self, values: &[f64]) -> Vec<f64> {
        let (side, dim) = (self.side, self.dim);
        let padded = 2 * side;
        let total = padded.pow(dim as u32);
        let mut buf = vec![Complex64::default(); total];
        for (k, v) in values.iter().enumerate() {
            buf[pad_index(k, side, dim)] = Complex64::new(*v, 0.0);
        }
        transform_nd(&mut buf, padded, dim, &self.forward);
        buf.par_iter_mut()
            .zip(&self.kernel_hat)
            .for_each(|(b, k)| *b *= k);
        transform_nd(&mut buf, padded, dim, &self.inverse);
        let norm = 1.0 / total as f64;
        (0..values.len())
            .map(|k| buf[pad_index(k, side, dim)].re * norm)
            .collect()
    }
}

fn pad_index(flat: usize, side: usize, dim: usize) -> usize {
    let padded = 2 * side;
    let mut rest = flat;
    let mut out = 0;
    let mut scale = 1;
    for _ in 0..dim {
        out += (rest % side) * scale;
        rest /= side;
        scale *= padded;
    }
    out
}
