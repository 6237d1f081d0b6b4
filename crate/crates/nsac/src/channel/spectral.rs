//! Fourier transforms along the periodic directions.
//!
//! Transforms act per z-level (bulk fields) or on the wall lattice (surface
//! fields); the wall-normal direction is never transformed. Forward/inverse
//! round trips are exact to rounding; inverse transforms fold the 1/N
//! normalization in at the end.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::FftPlanner;

use super::field::{ScalarField, SurfaceField};
use super::grid::{ChannelGrid, Wall};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_lines(data: &mut [Complex<f64>], n: usize, stride: usize, n_lines: usize, inverse: bool) {
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    let mut line = vec![Complex::new(0.0, 0.0); n];
    for l in 0..n_lines {
        // Lines are indexed so that element i of line l sits at offset
        // base(l) + i*stride; bases enumerate the remaining indices.
        let base = line_base(l, n, stride);
        for (i, item) in line.iter_mut().enumerate() {
            *item = data[base + i * stride];
        }
        fft.process(&mut line);
        for (i, item) in line.iter().enumerate() {
            data[base + i * stride] = *item;
        }
    }
}

// For stride s and line length n, consecutive lines pack the complement:
// offsets run over blocks of n*s, inner position within the stride.
fn line_base(l: usize, n: usize, stride: usize) -> usize {
    let block = l / stride;
    let inner = l % stride;
    block * n * stride + inner
}

fn transform_periodic(data: &mut [Complex<f64>], grid: &ChannelGrid, inner: usize, inverse: bool) {
    // inner = number of contiguous trailing entries per lattice site
    // (n_wall for bulk data, 1 for wall data).
    match grid.n_periodic_dims() {
        1 => {
            let nx = grid.n_periodic()[0];
            fft_lines(data, nx, inner, data.len() / nx, inverse);
        }
        2 => {
            let nx = grid.n_periodic()[0];
            let ny = grid.n_periodic()[1];
            // y lines: stride = inner, then x lines: stride = ny * inner.
            fft_lines(data, ny, inner, data.len() / ny, inverse);
            fft_lines(data, nx, ny * inner, data.len() / nx, inverse);
        }
        _ => unreachable!(),
    }
    if inverse {
        let scale = 1.0 / grid.np_total() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Fourier coefficients of a bulk field, laid out as `bin * n_wall + iz`.
#[derive(Debug, Clone)]
pub struct VolumeSpectrum {
    grid: Arc<ChannelGrid>,
    coeffs: Vec<Complex<f64>>,
}

impl VolumeSpectrum {
    pub fn grid(&self) -> &Arc<ChannelGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<f64>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<f64>] {
        &mut self.coeffs
    }

    pub fn zeros(grid: &Arc<ChannelGrid>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex::new(0.0, 0.0); grid.n_total()],
        }
    }

    pub fn to_field(&self) -> ScalarField {
        let mut data = self.coeffs.clone();
        transform_periodic(&mut data, &self.grid, self.grid.n_wall(), true);
        ScalarField::from_values(&self.grid, data.iter().map(|c| c.re).collect())
    }

    /// Spectral derivative along periodic direction `d` (Nyquist bin zeroed).
    pub fn derivative(&self, d: usize) -> Self {
        let mut out = self.clone();
        let nz = self.grid.n_wall();
        let n = self.grid.n_periodic()[d];
        for ip in 0..self.grid.np_total() {
            let idx = self.grid.p_indices(ip);
            let k = if idx[d] == n / 2 {
                0.0
            } else {
                self.grid.wavenumbers(d)[idx[d]]
            };
            let ik = Complex::new(0.0, k);
            for iz in 0..nz {
                out.coeffs[ip * nz + iz] *= ik;
            }
        }
        out
    }

    /// Multiplies each bin by `-k^2` (the periodic part of the Laplacian).
    pub fn neg_k_squared(&self) -> Self {
        let mut out = self.clone();
        let nz = self.grid.n_wall();
        for ip in 0..self.grid.np_total() {
            let k2 = self.grid.k_squared(ip);
            for iz in 0..nz {
                out.coeffs[ip * nz + iz] *= -k2;
            }
        }
        out
    }
}

impl ScalarField {
    pub fn to_spectrum(&self) -> VolumeSpectrum {
        let mut data: Vec<Complex<f64>> = self
            .values()
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .collect();
        transform_periodic(&mut data, self.grid(), self.grid().n_wall(), false);
        VolumeSpectrum {
            grid: self.grid().clone(),
            coeffs: data,
        }
    }
}

/// Fourier coefficients of a wall field, laid out per lattice bin.
#[derive(Debug, Clone)]
pub struct SurfaceSpectrum {
    grid: Arc<ChannelGrid>,
    wall: Wall,
    coeffs: Vec<Complex<f64>>,
}

impl SurfaceSpectrum {
    pub fn coeffs(&self) -> &[Complex<f64>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<f64>] {
        &mut self.coeffs
    }

    pub fn zeros(grid: &Arc<ChannelGrid>, wall: Wall) -> Self {
        Self {
            grid: grid.clone(),
            wall,
            coeffs: vec![Complex::new(0.0, 0.0); grid.np_total()],
        }
    }

    pub fn to_field(&self) -> SurfaceField {
        let mut data = self.coeffs.clone();
        transform_periodic(&mut data, &self.grid, 1, true);
        SurfaceField::from_values(&self.grid, self.wall, data.iter().map(|c| c.re).collect())
    }

    pub fn derivative(&self, d: usize) -> Self {
        let mut out = self.clone();
        let n = self.grid.n_periodic()[d];
        for ip in 0..self.grid.np_total() {
            let idx = self.grid.p_indices(ip);
            let k = if idx[d] == n / 2 {
                0.0
            } else {
                self.grid.wavenumbers(d)[idx[d]]
            };
            out.coeffs[ip] *= Complex::new(0.0, k);
        }
        out
    }

    pub fn neg_k_squared(&self) -> Self {
        let mut out = self.clone();
        for ip in 0..self.grid.np_total() {
            out.coeffs[ip] *= -self.grid.k_squared(ip);
        }
        out
    }
}

impl SurfaceField {
    pub fn to_spectrum(&self) -> SurfaceSpectrum {
        let mut data: Vec<Complex<f64>> = self
            .values()
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .collect();
        transform_periodic(&mut data, self.grid(), 1, false);
        SurfaceSpectrum {
            grid: self.grid().clone(),
            wall: self.wall(),
            coeffs: data,
        }
    }
}
