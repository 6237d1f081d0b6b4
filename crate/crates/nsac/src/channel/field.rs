use std::sync::Arc;

use super::grid::{ChannelGrid, Wall};

/// Real samples at every bulk node of a channel grid.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<ChannelGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<ChannelGrid>) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.n_total()],
        }
    }

    pub fn constant(grid: &Arc<ChannelGrid>, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.n_total()],
        }
    }

    /// Samples `f(coords)` at every node; coords are `[x, (y,), z]`.
    pub fn from_fn(grid: &Arc<ChannelGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut values = vec![0.0; grid.n_total()];
        for ip in 0..grid.np_total() {
            for iz in 0..grid.n_wall() {
                values[grid.node(ip, iz)] = f(&grid.coords(ip, iz));
            }
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &Arc<ChannelGrid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.n_total(), "value count must match grid");
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<ChannelGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, ip: usize, iz: usize) -> f64 {
        self.values[self.grid.node(ip, iz)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(Arc::ptr_eq(&self.grid, &other.grid) || self.values.len() == other.values.len());
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (v, &xv) in self.values.iter_mut().zip(&x.values) {
            *v += a * xv;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        for v in &mut self.values {
            *v += c;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// A dim-component vector field; component `dim-1` is wall-normal (z).
#[derive(Debug, Clone)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn zeros(grid: &Arc<ChannelGrid>) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn from_components(components: Vec<ScalarField>) -> Self {
        let dim = components[0].grid().dim();
        assert_eq!(components.len(), dim, "component count must equal grid dim");
        Self { components }
    }

    /// Samples `f(coords, component)` at every node.
    pub fn from_fn(grid: &Arc<ChannelGrid>, f: impl Fn(&[f64], usize) -> f64) -> Self {
        Self {
            components: (0..grid.dim())
                .map(|c| ScalarField::from_fn(grid, |x| f(x, c)))
                .collect(),
        }
    }

    pub fn grid(&self) -> &Arc<ChannelGrid> {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, c: usize) -> &ScalarField {
        &self.components[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut ScalarField {
        &mut self.components[c]
    }

    /// Wall-normal component.
    pub fn normal(&self) -> &ScalarField {
        self.components.last().unwrap()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (c, xc) in self.components.iter_mut().zip(&x.components) {
            c.axpy(a, xc);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    /// Pointwise squared magnitude.
    pub fn magnitude_squared(&self) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid());
        for c in &self.components {
            for (o, &v) in out.values_mut().iter_mut().zip(c.values()) {
                *o += v * v;
            }
        }
        out
    }
}

/// Real samples on one wall's periodic lattice.
#[derive(Debug, Clone)]
pub struct SurfaceField {
    grid: Arc<ChannelGrid>,
    wall: Wall,
    values: Vec<f64>,
}

impl SurfaceField {
    pub fn zeros(grid: &Arc<ChannelGrid>, wall: Wall) -> Self {
        Self {
            grid: grid.clone(),
            wall,
            values: vec![0.0; grid.np_total()],
        }
    }

    pub fn constant(grid: &Arc<ChannelGrid>, wall: Wall, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            wall,
            values: vec![c; grid.np_total()],
        }
    }

    /// Samples `f(periodic coords)` on the wall lattice.
    pub fn from_fn(grid: &Arc<ChannelGrid>, wall: Wall, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut values = vec![0.0; grid.np_total()];
        for (ip, v) in values.iter_mut().enumerate() {
            let idx = grid.p_indices(ip);
            let coords: Vec<f64> = (0..grid.n_periodic_dims())
                .map(|d| grid.p_coord(d, idx[d]))
                .collect();
            *v = f(&coords);
        }
        Self {
            grid: grid.clone(),
            wall,
            values,
        }
    }

    pub fn from_values(grid: &Arc<ChannelGrid>, wall: Wall, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.np_total());
        Self {
            grid: grid.clone(),
            wall,
            values,
        }
    }

    pub fn grid(&self) -> &Arc<ChannelGrid> {
        &self.grid
    }

    pub fn wall(&self) -> Wall {
        self.wall
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            wall: self.wall,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            wall: self.wall,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (v, &xv) in self.values.iter_mut().zip(&x.values) {
            *v += a * xv;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
