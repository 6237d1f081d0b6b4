use std::f64::consts::PI;
use std::sync::Arc;

use thiserror::Error;

/// Identifies one of the two channel walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wall {
    /// z = -1, outward normal -e_z
    Bottom,
    /// z = +1, outward normal +e_z
    Top,
}

impl Wall {
    pub const BOTH: [Wall; 2] = [Wall::Bottom, Wall::Top];

    /// Index into per-wall arrays: bottom = 0, top = 1.
    pub fn index(self) -> usize {
        match self {
            Wall::Bottom => 0,
            Wall::Top => 1,
        }
    }

    /// Sign of the outward normal in the z direction.
    pub fn normal_sign(self) -> f64 {
        match self {
            Wall::Bottom => -1.0,
            Wall::Top => 1.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid size for {axis}: {got} (expected {expected})")]
    InvalidSize {
        axis: &'static str,
        got: usize,
        expected: &'static str,
    },
    #[error("invalid period length for {axis}: {got} (must be > 0 and finite)")]
    InvalidPeriod { axis: &'static str, got: f64 },
    #[error("dimension mismatch: dim={dim} but {what} has {got} entries")]
    DimMismatch {
        dim: usize,
        what: &'static str,
        got: usize,
    },
}

/// Discrete channel `T^{N-1} x (-1,1)` with its operator metadata.
///
/// Node layout: periodic lattice index `ip` (x fastest-varying last periodic
/// dimension, i.e. `ip = ix*ny + iy` in 3D, `ip = ix` in 2D) and wall-normal
/// index `iz` in `0..n_wall`, flattened as `ip * n_wall + iz` so z-lines are
/// contiguous.
#[derive(Debug, Clone)]
pub struct ChannelGrid {
    dim: usize,
    n_periodic: Vec<usize>,
    n_wall: usize,
    period_lengths: Vec<f64>,
    dz: f64,
    /// Fourier wavenumbers per periodic direction, FFT bin order, scaled by 2*pi/L.
    wavenumbers: Vec<Vec<f64>>,
    /// Trapezoid weights in z (sum = 2).
    z_weights: Vec<f64>,
}

/// Builds a channel grid, validating sizes.
///
/// `n_periodic` entries must be powers of two >= 8, `n_wall` odd >= 5 so the
/// walls and the midplane are grid nodes.
pub fn build_grid(
    dim: usize,
    n_periodic: &[usize],
    n_wall: usize,
    period_lengths: &[f64],
) -> Result<Arc<ChannelGrid>, GridError> {
    if dim != 2 && dim != 3 {
        return Err(GridError::InvalidSize {
            axis: "dim",
            got: dim,
            expected: "2 or 3",
        });
    }
    if n_periodic.len() != dim - 1 {
        return Err(GridError::DimMismatch {
            dim,
            what: "n_periodic",
            got: n_periodic.len(),
        });
    }
    if period_lengths.len() != dim - 1 {
        return Err(GridError::DimMismatch {
            dim,
            what: "period_lengths",
            got: period_lengths.len(),
        });
    }
    const AXES: [&str; 2] = ["x", "y"];
    for (d, &n) in n_periodic.iter().enumerate() {
        if n < 8 || !n.is_power_of_two() {
            return Err(GridError::InvalidSize {
                axis: AXES[d],
                got: n,
                expected: "a power of two >= 8",
            });
        }
    }
    if n_wall < 5 || n_wall % 2 == 0 {
        return Err(GridError::InvalidSize {
            axis: "z",
            got: n_wall,
            expected: "odd and >= 5",
        });
    }
    for (d, &l) in period_lengths.iter().enumerate() {
        if !(l.is_finite() && l > 0.0) {
            return Err(GridError::InvalidPeriod {
                axis: AXES[d],
                got: l,
            });
        }
    }

    let dz = 2.0 / (n_wall - 1) as f64;
    let wavenumbers = n_periodic
        .iter()
        .zip(period_lengths)
        .map(|(&n, &l)| {
            let scale = 2.0 * PI / l;
            (0..n)
                .map(|i| {
                    let j = if i <= n / 2 {
                        i as i64
                    } else {
                        i as i64 - n as i64
                    };
                    scale * j as f64
                })
                .collect()
        })
        .collect();
    let mut z_weights = vec![dz; n_wall];
    z_weights[0] = 0.5 * dz;
    z_weights[n_wall - 1] = 0.5 * dz;

    Ok(Arc::new(ChannelGrid {
        dim,
        n_periodic: n_periodic.to_vec(),
        n_wall,
        period_lengths: period_lengths.to_vec(),
        dz,
        wavenumbers,
        z_weights,
    }))
}

impl ChannelGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of periodic directions (dim - 1).
    pub fn n_periodic_dims(&self) -> usize {
        self.dim - 1
    }

    pub fn n_periodic(&self) -> &[usize] {
        &self.n_periodic
    }

    pub fn n_wall(&self) -> usize {
        self.n_wall
    }

    pub fn period_lengths(&self) -> &[f64] {
        &self.period_lengths
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    /// Grid spacing along periodic direction `d`.
    pub fn dp(&self, d: usize) -> f64 {
        self.period_lengths[d] / self.n_periodic[d] as f64
    }

    /// Number of nodes on the periodic lattice (one wall plane).
    pub fn np_total(&self) -> usize {
        self.n_periodic.iter().product()
    }

    /// Total number of bulk nodes.
    pub fn n_total(&self) -> usize {
        self.np_total() * self.n_wall
    }

    /// |Omega| = prod(L) * 2.
    pub fn volume(&self) -> f64 {
        2.0 * self.period_lengths.iter().product::<f64>()
    }

    /// Wall area |Gamma_w| of a single wall.
    pub fn wall_area(&self) -> f64 {
        self.period_lengths.iter().product::<f64>()
    }

    /// Boundary curvature of the channel cross-section; identically zero.
    pub fn curvature(&self) -> f64 {
        0.0
    }

    pub fn z(&self, iz: usize) -> f64 {
        -1.0 + self.dz * iz as f64
    }

    /// Coordinate along periodic direction `d` at lattice index `i`.
    pub fn p_coord(&self, d: usize, i: usize) -> f64 {
        self.dp(d) * i as f64
    }

    pub fn wavenumbers(&self, d: usize) -> &[f64] {
        &self.wavenumbers[d]
    }

    /// Decomposes a periodic lattice index into per-direction indices.
    pub fn p_indices(&self, ip: usize) -> [usize; 2] {
        match self.dim {
            2 => [ip, 0],
            _ => {
                let ny = self.n_periodic[1];
                [ip / ny, ip % ny]
            }
        }
    }

    /// Squared wavenumber magnitude for periodic lattice bin `ip`.
    pub fn k_squared(&self, ip: usize) -> f64 {
        let idx = self.p_indices(ip);
        let mut k2 = 0.0;
        for d in 0..self.n_periodic_dims() {
            let k = self.wavenumbers[d][idx[d]];
            k2 += k * k;
        }
        k2
    }

    /// Squared magnitude of the first-derivative wavenumbers (Nyquist bins
    /// count as zero, matching the odd-order spectral derivatives).
    pub fn k_squared_deriv(&self, ip: usize) -> f64 {
        let idx = self.p_indices(ip);
        let mut k2 = 0.0;
        for d in 0..self.n_periodic_dims() {
            if idx[d] == self.n_periodic[d] / 2 {
                continue;
            }
            let k = self.wavenumbers[d][idx[d]];
            k2 += k * k;
        }
        k2
    }

    /// Flattened node index.
    pub fn node(&self, ip: usize, iz: usize) -> usize {
        ip * self.n_wall + iz
    }

    /// Quadrature weight of node (ip, iz): uniform in periodic directions,
    /// trapezoid in z.
    pub fn quad_weight(&self, iz: usize) -> f64 {
        let mut w = self.z_weights[iz];
        for d in 0..self.n_periodic_dims() {
            w *= self.dp(d);
        }
        w
    }

    /// Trapezoid weight in z alone.
    pub fn z_weight(&self, iz: usize) -> f64 {
        self.z_weights[iz]
    }

    /// Quadrature weight of a wall-lattice node (uniform).
    pub fn surface_weight(&self) -> f64 {
        (0..self.n_periodic_dims()).map(|d| self.dp(d)).product()
    }

    /// Wall-plane z index.
    pub fn wall_iz(&self, wall: Wall) -> usize {
        match wall {
            Wall::Bottom => 0,
            Wall::Top => self.n_wall - 1,
        }
    }

    /// Physical coordinates of node (ip, iz) as [x, (y,), z].
    pub fn coords(&self, ip: usize, iz: usize) -> Vec<f64> {
        let idx = self.p_indices(ip);
        let mut c: Vec<f64> = (0..self.n_periodic_dims())
            .map(|d| self.p_coord(d, idx[d]))
            .collect();
        c.push(self.z(iz));
        c
    }
}
