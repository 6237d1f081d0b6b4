//! Discrete differential and integral operators.
//!
//! Periodic directions: exact spectral differentiation below the Nyquist
//! limit. Wall-normal direction: second-order centered differences at
//! interior nodes, one-sided second-order stencils at the walls (no ghost
//! nodes). The stencil rows here are the single source of truth; the
//! implicit solvers assemble their matrices from the same rows.

use super::field::{ScalarField, SurfaceField, VectorField};
use super::grid::Wall;

/// One matrix row of a wall-normal stencil: `n` (index, coefficient) pairs.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StencilRow {
    pub n: usize,
    pub idx: [usize; 4],
    pub c: [f64; 4],
}

impl StencilRow {
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.n).map(|i| (self.idx[i], self.c[i]))
    }
}

/// First derivative in z at node `iz`: centered inside, one-sided at walls.
pub(crate) fn dz1_row(iz: usize, nz: usize, dz: f64) -> StencilRow {
    let h = 0.5 / dz;
    if iz == 0 {
        StencilRow {
            n: 3,
            idx: [0, 1, 2, 0],
            c: [-3.0 * h, 4.0 * h, -h, 0.0],
        }
    } else if iz == nz - 1 {
        StencilRow {
            n: 3,
            idx: [nz - 1, nz - 2, nz - 3, 0],
            c: [3.0 * h, -4.0 * h, h, 0.0],
        }
    } else {
        StencilRow {
            n: 2,
            idx: [iz - 1, iz + 1, 0, 0],
            c: [-h, h, 0.0, 0.0],
        }
    }
}

/// Second derivative in z at node `iz`: 3-point inside, 4-point one-sided at
/// walls (second order, exact on cubics).
pub(crate) fn dz2_row(iz: usize, nz: usize, dz: f64) -> StencilRow {
    let h2 = 1.0 / (dz * dz);
    if iz == 0 {
        StencilRow {
            n: 4,
            idx: [0, 1, 2, 3],
            c: [2.0 * h2, -5.0 * h2, 4.0 * h2, -h2],
        }
    } else if iz == nz - 1 {
        StencilRow {
            n: 4,
            idx: [nz - 1, nz - 2, nz - 3, nz - 4],
            c: [2.0 * h2, -5.0 * h2, 4.0 * h2, -h2],
        }
    } else {
        StencilRow {
            n: 3,
            idx: [iz - 1, iz, iz + 1, 0],
            c: [h2, -2.0 * h2, h2, 0.0],
        }
    }
}

/// Outward normal derivative row at a wall (`n = -e_z` bottom, `+e_z` top).
pub(crate) fn dn_row(wall: Wall, nz: usize, dz: f64) -> StencilRow {
    let mut row = dz1_row(
        match wall {
            Wall::Bottom => 0,
            Wall::Top => nz - 1,
        },
        nz,
        dz,
    );
    if wall == Wall::Bottom {
        for c in row.c.iter_mut() {
            *c = -*c;
        }
    }
    row
}

fn apply_z_stencil(f: &ScalarField, row_of: impl Fn(usize) -> StencilRow) -> ScalarField {
    let grid = f.grid();
    let nz = grid.n_wall();
    let mut out = ScalarField::zeros(grid);
    let rows: Vec<StencilRow> = (0..nz).map(row_of).collect();
    for ip in 0..grid.np_total() {
        let base = ip * nz;
        for iz in 0..nz {
            let mut acc = 0.0;
            for (j, c) in rows[iz].entries() {
                acc += c * f.values()[base + j];
            }
            out.values_mut()[base + iz] = acc;
        }
    }
    out
}

/// d/dz with one-sided second-order rows at the walls.
pub(crate) fn dz1(f: &ScalarField) -> ScalarField {
    let nz = f.grid().n_wall();
    let dz = f.grid().dz();
    apply_z_stencil(f, |iz| dz1_row(iz, nz, dz))
}

/// d2/dz2 with one-sided second-order rows at the walls.
pub(crate) fn dz2(f: &ScalarField) -> ScalarField {
    let nz = f.grid().n_wall();
    let dz = f.grid().dz();
    apply_z_stencil(f, |iz| dz2_row(iz, nz, dz))
}

/// Gradient: spectral in periodic directions, finite differences in z.
pub fn gradient(f: &ScalarField) -> VectorField {
    let grid = f.grid();
    let spec = f.to_spectrum();
    let mut comps = Vec::with_capacity(grid.dim());
    for d in 0..grid.n_periodic_dims() {
        comps.push(spec.derivative(d).to_field());
    }
    comps.push(dz1(f));
    VectorField::from_components(comps)
}

/// Divergence, dual of `gradient` (same stencils).
pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let mut out = dz1(v.normal());
    for d in 0..grid.n_periodic_dims() {
        let dd = v.component(d).to_spectrum().derivative(d).to_field();
        out.axpy(1.0, &dd);
    }
    out
}

/// Laplacian: `-k^2` in periodic directions plus the z second difference.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let mut out = f.to_spectrum().neg_k_squared().to_field();
    out.axpy(1.0, &dz2(f));
    out
}

/// Tangential gradient of a wall field, one component per periodic direction.
pub fn tangential_gradient(s: &SurfaceField) -> Vec<SurfaceField> {
    let spec = s.to_spectrum();
    (0..s.grid().n_periodic_dims())
        .map(|d| spec.derivative(d).to_field())
        .collect()
}

/// Laplace-Beltrami operator on a flat wall: sum of periodic second derivatives.
pub fn tangential_laplacian(s: &SurfaceField) -> SurfaceField {
    s.to_spectrum().neg_k_squared().to_field()
}

/// Outward normal derivative `n . grad f` restricted to a wall.
pub fn normal_derivative(f: &ScalarField, wall: Wall) -> SurfaceField {
    let grid = f.grid();
    let nz = grid.n_wall();
    let row = dn_row(wall, nz, grid.dz());
    let mut values = vec![0.0; grid.np_total()];
    for (ip, v) in values.iter_mut().enumerate() {
        let base = ip * nz;
        let mut acc = 0.0;
        for (j, c) in row.entries() {
            acc += c * f.values()[base + j];
        }
        *v = acc;
    }
    SurfaceField::from_values(grid, wall, values)
}

/// Exact restriction of a bulk field to a wall plane.
pub fn trace(f: &ScalarField, wall: Wall) -> SurfaceField {
    let grid = f.grid();
    let iz = grid.wall_iz(wall);
    let values = (0..grid.np_total()).map(|ip| f.at(ip, iz)).collect();
    SurfaceField::from_values(grid, wall, values)
}

/// Quadrature: trapezoid in z, uniform in the periodic directions.
/// Summation order is fixed (flattened node order) for reproducibility.
pub fn volume_integral(f: &ScalarField) -> f64 {
    let grid = f.grid();
    let nz = grid.n_wall();
    let mut acc = 0.0;
    for ip in 0..grid.np_total() {
        for iz in 0..nz {
            acc += grid.quad_weight(iz) * f.values()[ip * nz + iz];
        }
    }
    acc
}

pub fn volume_mean(f: &ScalarField) -> f64 {
    volume_integral(f) / f.grid().volume()
}

pub fn surface_integral(s: &SurfaceField) -> f64 {
    let w = s.grid().surface_weight();
    let mut acc = 0.0;
    for &v in s.values() {
        acc += w * v;
    }
    acc
}
