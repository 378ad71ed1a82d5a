//! Riesz potentials, Riesz transforms and the half-space layer potentials `D` and `N`.
//!
//! Kernel-space operators spread each sample over the cell centred on its node and use exact
//! cell integrals near the singularity. Spectral operators act on periodic boundary grids with
//! frequencies `ξ = k/(2W)`.

mod free_space;
mod riesz;
mod spectral;

pub use free_space::FreeSpaceLayer;
pub use riesz::{
    riesz_potential, riesz_potential_at, riesz_transform, transform_constant, PotentialMethod,
    RieszConstant, TransformMethod,
};
pub use spectral::{
    boundary_trace_n, dealias, grad_n, mean, neumann_layer_n, normal_derivative_n, single_layer_d,
    subtract_mean, SpectralField, ZeroModePolicy,
};
