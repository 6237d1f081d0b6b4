//! Discrete channel geometry `T^{N-1} x (-1,1)` and the operator algebra on it.
//!
//! Periodic directions are resolved by Fourier collocation, the wall-normal
//! direction `z` by second-order finite differences on a uniform collocated
//! grid with nodes at both walls. The same trapezoid-in-z quadrature backs
//! every integral in the crate, which is what makes the discrete mass and
//! energy bookkeeping exact where the solvers promise it.

mod field;
mod grid;
mod ops;
mod spectral;

pub use field::{ScalarField, SurfaceField, VectorField};
pub use grid::{build_grid, ChannelGrid, GridError, Wall};
pub use ops::{
    divergence, gradient, laplacian, normal_derivative, surface_integral, tangential_gradient,
    tangential_laplacian, trace, volume_integral, volume_mean,
};
pub(crate) use ops::{dn_row as ops_dn_row, dz1_row as ops_dz1_row, dz2_row as ops_dz2_row};
pub use spectral::{SurfaceSpectrum, VolumeSpectrum};
