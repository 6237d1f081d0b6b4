//! One time step of the incompressible momentum equation with generalized
//! Navier boundary conditions: explicit skew-symmetric advection, implicit
//! viscosity with slip (Robin) wall rows carrying the lagged Young stress,
//! capillary body force, and an incremental pressure projection.
//!
//! In the channel the slip condition reduces per wall to
//! `beta u_tau + eta d_n u_tau = Y grad_tau psi` with `Y` the boundary
//! operator of the active phase-field mode. The projection solves the
//! composed discrete `div grad` system per wavenumber so the corrected
//! velocity is divergence-free at every node, wall rows included, to
//! rounding; the lattice-mean wall-normal velocity mode is annihilated
//! exactly.

use std::sync::Arc;

use num_complex::Complex;
use thiserror::Error;

use crate::allen_cahn::AcMode;
use crate::channel::{
    divergence, gradient, tangential_gradient, trace, volume_mean, ChannelGrid, ScalarField,
    SurfaceField, SurfaceSpectrum, VectorField, VolumeSpectrum, Wall,
};
use crate::energetics::{capillary_force, EnergeticsError, PhysParams};
use crate::zline::{DenseLu, DenseMatrix, SingularSystem};

/// Complete time-step state of the coupled system.
#[derive(Debug, Clone)]
pub struct SimState {
    pub u: VectorField,
    /// Pressure in the mean-zero gauge.
    pub p: ScalarField,
    pub phi: ScalarField,
    /// Wall traces of phi, indexed bottom then top.
    pub psi: [SurfaceField; 2],
    pub t: f64,
}

#[derive(Debug, Error)]
pub enum StateError {
    #[error("velocity field is not discretely divergence-free: max |div u| = {0:.3e}")]
    NotDivergenceFree(f64),
    #[error("wall-normal velocity at a wall is nonzero: max |u.n| = {0:.3e}")]
    WallPenetration(f64),
    #[error("pressure gauge violated: |mean p| = {0:.3e}")]
    PressureGauge(f64),
    #[error(transparent)]
    Trace(#[from] EnergeticsError),
    #[error("non-finite values in state")]
    NonFinite,
}

impl SimState {
    /// Rest state with the given phase field.
    pub fn resting(phi: ScalarField) -> Self {
        let grid = phi.grid().clone();
        let psi = [trace(&phi, Wall::Bottom), trace(&phi, Wall::Top)];
        Self {
            u: VectorField::zeros(&grid),
            p: ScalarField::zeros(&grid),
            phi,
            psi,
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<ChannelGrid> {
        self.phi.grid()
    }

    pub fn validate(&self) -> Result<(), StateError> {
        if !(self.u.is_finite() && self.p.is_finite() && self.phi.is_finite()) {
            return Err(StateError::NonFinite);
        }
        let div = divergence(&self.u).max_abs();
        if div > 1e-10 {
            return Err(StateError::NotDivergenceFree(div));
        }
        let grid = self.grid();
        let mut pen = 0.0f64;
        for wall in Wall::BOTH {
            let iz = grid.wall_iz(wall);
            for ip in 0..grid.np_total() {
                pen = pen.max(self.u.normal().at(ip, iz).abs());
            }
        }
        if pen > 1e-13 {
            return Err(StateError::WallPenetration(pen));
        }
        let gauge = volume_mean(&self.p).abs();
        if gauge > 1e-12 {
            return Err(StateError::PressureGauge(gauge));
        }
        for wall in Wall::BOTH {
            crate::energetics::check_trace(&self.phi, &self.psi[wall.index()], wall)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum NsError {
    #[error("viscous solve failed: {0}")]
    Viscous(#[from] SingularSystem),
    #[error("projection left divergence {0:.3e} > 1e-10")]
    ProjectionResidual(f64),
    #[error(transparent)]
    Boundary(#[from] EnergeticsError),
}

/// Momentum/projection stepper with per-wavenumber factorizations cached for
/// a fixed grid, parameter set, and time step.
pub struct NsStepper {
    grid: Arc<ChannelGrid>,
    params: PhysParams,
    dt: f64,
    tangential_lu: Vec<DenseLu>,
    normal_lu: Vec<DenseLu>,
    /// Projection lines; `None` for the zero-wavenumber bin, which is
    /// annihilated exactly instead of solved.
    projection_lu: Vec<Option<DenseLu>>,
}

impl NsStepper {
    pub fn new(grid: &Arc<ChannelGrid>, params: &PhysParams, dt: f64) -> Result<Self, NsError> {
        assert!(dt > 0.0, "dt must be positive");
        let nz = grid.n_wall();
        let dz = grid.dz();
        let eta = params.eta;
        let a = 1.0 / dt;

        let mut tangential_lu = Vec::with_capacity(grid.np_total());
        let mut normal_lu = Vec::with_capacity(grid.np_total());
        let mut projection_lu = Vec::with_capacity(grid.np_total());
        for ip in 0..grid.np_total() {
            let k2 = grid.k_squared(ip);

            // Helmholtz interior: (1/dt + eta k^2) u - eta u_zz
            let mut interior = DenseMatrix::zeros(nz);
            for iz in 1..nz - 1 {
                interior.add(iz, iz, a + eta * k2);
                for (j, c) in crate::channel::ops_dz2_row(iz, nz, dz).entries() {
                    interior.add(iz, j, -eta * c);
                }
            }

            // tangential components: variational slip rows
            //   (dz/2)(u+/dt + eta k^2 u+) + eta (u+_w - u+_in)/dz + beta u+
            //     = Y grad_tau psi + (dz/2) rhs_w
            // (the half-cell momentum share keeps the discrete kinetic-energy
            // ledger exact against the trapezoid quadrature)
            let mut mt = interior.clone();
            for wall in Wall::BOTH {
                let iw = grid.wall_iz(wall);
                mt.add(iw, iw, params.beta + 0.5 * dz * (a + eta * k2) + eta / dz);
                let inner = match wall {
                    Wall::Bottom => 1,
                    Wall::Top => nz - 2,
                };
                mt.add(iw, inner, -eta / dz);
            }
            tangential_lu.push(mt.factor()?);

            // normal component: Dirichlet rows
            let mut mn = interior;
            for wall in Wall::BOTH {
                let iw = grid.wall_iz(wall);
                mn.add(iw, iw, 1.0);
            }
            normal_lu.push(mn.factor()?);

            // projection lines: the correction u -= (ik r, G r) with G the
            // wall-masked z gradient leaves divergence
            //   div* + k^2 r - (D_div G) r
            // at every node, so the lines solve (D_div G - k^2 I) r = div*.
            // The k^2 here must be the one the first-derivative operators
            // realize (Nyquist bins zeroed); bins the gradient cannot reach
            // are handled exactly like the mean mode.
            let k2_deriv = grid.k_squared_deriv(ip);
            if k2_deriv == 0.0 {
                projection_lu.push(None);
            } else {
                let mut grad = DenseMatrix::zeros(nz);
                for iz in 1..nz - 1 {
                    for (j, c) in crate::channel::ops_dz1_row(iz, nz, dz).entries() {
                        grad.add(iz, j, c);
                    }
                }
                let mut div = DenseMatrix::zeros(nz);
                for iz in 0..nz {
                    for (j, c) in crate::channel::ops_dz1_row(iz, nz, dz).entries() {
                        div.add(iz, j, c);
                    }
                }
                let mut proj = div.matmul(&grad);
                for iz in 0..nz {
                    proj.add(iz, iz, -k2_deriv);
                }
                projection_lu.push(Some(proj.factor()?));
            }
        }
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            dt,
            tangential_lu,
            normal_lu,
            projection_lu,
        })
    }

    /// Skew-symmetric advection `((u.grad)u + div(u x u)) / 2`.
    fn advection(&self, u: &VectorField) -> VectorField {
        let grid = &self.grid;
        let dim = grid.dim();
        let mut out = VectorField::zeros(grid);
        for j in 0..dim {
            let gj = gradient(u.component(j));
            let mut conv = ScalarField::zeros(grid);
            for i in 0..dim {
                conv.axpy(1.0, &u.component(i).zip_with(gj.component(i), |a, b| a * b));
            }
            let flux = VectorField::from_components(
                (0..dim)
                    .map(|i| u.component(i).zip_with(u.component(j), |a, b| a * b))
                    .collect(),
            );
            let mut total = divergence(&flux);
            total.axpy(1.0, &conv);
            total.scale(0.5);
            *out.component_mut(j) = total;
        }
        out
    }

    /// Wall Young-stress source `Y grad_tau psi` with `Y` per mode.
    fn young_stress(
        &self,
        state: &SimState,
        mode: AcMode,
    ) -> Result<[Vec<SurfaceField>; 2], NsError> {
        let mut out: [Vec<SurfaceField>; 2] = [Vec::new(), Vec::new()];
        for wall in Wall::BOTH {
            let psi = &state.psi[wall.index()];
            let y = match mode {
                AcMode::Dynamic => crate::energetics::lcal_operator(
                    &state.phi,
                    psi,
                    wall,
                    &self.params,
                    self.params.gamma,
                )?,
                AcMode::DeltaApprox | AcMode::Relaxation => {
                    crate::energetics::l_operator(&state.phi, psi, wall, &self.params)?
                }
            };
            out[wall.index()] = tangential_gradient(psi)
                .into_iter()
                .map(|g| g.zip_with(&y, |gv, yv| yv * gv))
                .collect();
        }
        Ok(out)
    }

    /// Solves the implicit viscous system for the pre-projection velocity.
    pub fn momentum_step(&self, state: &SimState, mode: AcMode) -> Result<VectorField, NsError> {
        self.momentum_step_from(state, &state.u, mode)
    }

    /// Like [`Self::momentum_step`], but with the explicit advection frozen
    /// at `advect_u` while the time difference anchors at `state.u`; used by
    /// the fixed-point sub-iterations of the coupled loop.
    pub fn momentum_step_from(
        &self,
        state: &SimState,
        advect_u: &VectorField,
        mode: AcMode,
    ) -> Result<VectorField, NsError> {
        let grid = &self.grid;
        let nz = grid.n_wall();
        let dim = grid.dim();
        let a = 1.0 / self.dt;

        let conv = self.advection(advect_u);
        let cap = capillary_force(&state.phi);
        let gradp = gradient(&state.p);
        let young = self.young_stress(state, mode)?;

        let mut star = VectorField::zeros(grid);
        let mut line = vec![Complex::new(0.0, 0.0); nz];
        for comp in 0..dim {
            let mut rhs = state.u.component(comp).clone();
            rhs.scale(a);
            rhs.axpy(-1.0, conv.component(comp));
            rhs.axpy(-1.0, cap.component(comp));
            rhs.axpy(-1.0, gradp.component(comp));
            let rhs_spec = rhs.to_spectrum();

            let tangential = comp < dim - 1;
            let wall_spec: Option<[SurfaceSpectrum; 2]> = if tangential {
                Some([young[0][comp].to_spectrum(), young[1][comp].to_spectrum()])
            } else {
                None
            };

            let half_cell = 0.5 * self.grid.dz();
            let mut out = VolumeSpectrum::zeros(grid);
            for ip in 0..grid.np_total() {
                for iz in 0..nz {
                    line[iz] = rhs_spec.coeffs()[ip * nz + iz];
                }
                if let Some(ws) = &wall_spec {
                    line[0] = ws[0].coeffs()[ip] + half_cell * rhs_spec.coeffs()[ip * nz];
                    line[nz - 1] =
                        ws[1].coeffs()[ip] + half_cell * rhs_spec.coeffs()[ip * nz + nz - 1];
                    self.tangential_lu[ip].solve_complex(&mut line);
                } else {
                    line[0] = Complex::new(0.0, 0.0);
                    line[nz - 1] = Complex::new(0.0, 0.0);
                    self.normal_lu[ip].solve_complex(&mut line);
                }
                for iz in 0..nz {
                    out.coeffs_mut()[ip * nz + iz] = line[iz];
                }
            }
            *star.component_mut(comp) = out.to_field();
        }
        Ok(star)
    }

    /// Projects `u_star` onto the discretely divergence-free space and
    /// updates the pressure incrementally (mean-zero gauge).
    pub fn project(
        &self,
        u_star: &VectorField,
        p_old: &ScalarField,
    ) -> Result<(VectorField, ScalarField), NsError> {
        let grid = &self.grid;
        let nz = grid.n_wall();
        let dz = grid.dz();
        let dim = grid.dim();

        let div_spec = divergence(u_star).to_spectrum();
        let mut comp_specs: Vec<VolumeSpectrum> = (0..dim)
            .map(|c| u_star.component(c).to_spectrum())
            .collect();

        let mut r_spec = VolumeSpectrum::zeros(grid);
        let mut line = vec![Complex::new(0.0, 0.0); nz];
        for ip in 0..grid.np_total() {
            match &self.projection_lu[ip] {
                Some(lu) => {
                    for iz in 0..nz {
                        line[iz] = div_spec.coeffs()[ip * nz + iz];
                    }
                    lu.solve_complex(&mut line);
                    for iz in 0..nz {
                        r_spec.coeffs_mut()[ip * nz + iz] = line[iz];
                    }
                }
                None => {
                    // Lattice-mean wall-normal velocity has no divergence-free
                    // part: remove it exactly and absorb it into the pressure
                    // through the cumulative trapezoid primitive.
                    let uz = &mut comp_specs[dim - 1];
                    let mut acc = Complex::new(0.0, 0.0);
                    let mut prev = uz.coeffs()[ip * nz];
                    r_spec.coeffs_mut()[ip * nz] = acc;
                    for iz in 1..nz {
                        let cur = uz.coeffs()[ip * nz + iz];
                        acc += 0.5 * dz * (prev + cur);
                        prev = cur;
                        r_spec.coeffs_mut()[ip * nz + iz] = acc;
                    }
                    for iz in 0..nz {
                        uz.coeffs_mut()[ip * nz + iz] = Complex::new(0.0, 0.0);
                    }
                }
            }
        }

        // corrections: tangential -= i k r, normal -= masked d_z r
        for d in 0..dim - 1 {
            let dr = r_spec.derivative(d);
            for (c, &g) in comp_specs[d].coeffs_mut().iter_mut().zip(dr.coeffs()) {
                *c -= g;
            }
        }
        for ip in 0..grid.np_total() {
            if self.projection_lu[ip].is_none() {
                continue;
            }
            for iz in 1..nz - 1 {
                let mut g = Complex::new(0.0, 0.0);
                for (j, c) in crate::channel::ops_dz1_row(iz, nz, dz).entries() {
                    g += c * r_spec.coeffs()[ip * nz + j];
                }
                comp_specs[dim - 1].coeffs_mut()[ip * nz + iz] -= g;
            }
        }

        let u_new =
            VectorField::from_components(comp_specs.into_iter().map(|s| s.to_field()).collect());
        let mut p_new = p_old.clone();
        let mut incr = r_spec.to_field();
        incr.scale(1.0 / self.dt);
        p_new.axpy(1.0, &incr);
        p_new.add_constant(-volume_mean(&p_new));

        let residual = divergence(&u_new).max_abs();
        if residual > 1e-10 {
            return Err(NsError::ProjectionResidual(residual));
        }
        Ok((u_new, p_new))
    }

    /// Full momentum step: viscous solve, projection, time advance of (u, p).
    /// The phase fields pass through unchanged.
    pub fn step(&self, state: &SimState, mode: AcMode) -> Result<SimState, NsError> {
        self.step_from(state, &state.u, mode)
    }

    /// Full momentum step with advection frozen at `advect_u`.
    pub fn step_from(
        &self,
        state: &SimState,
        advect_u: &VectorField,
        mode: AcMode,
    ) -> Result<SimState, NsError> {
        let star = self.momentum_step_from(state, advect_u, mode)?;
        let (u, p) = self.project(&star, &state.p)?;
        Ok(SimState {
            u,
            p,
            phi: state.phi.clone(),
            psi: state.psi.clone(),
            t: state.t + self.dt,
        })
    }
}

/// One-shot momentum solve (builds and discards the factorizations).
pub fn momentum_step(
    state: &SimState,
    params: &PhysParams,
    dt: f64,
    mode: AcMode,
) -> Result<VectorField, NsError> {
    NsStepper::new(state.grid(), params, dt)?.momentum_step(state, mode)
}

/// One-shot projection with time step `dt`.
pub fn project(
    u_star: &VectorField,
    p_old: &ScalarField,
    dt: f64,
) -> Result<(VectorField, ScalarField), NsError> {
    let params = PhysParams::default();
    NsStepper::new(u_star.grid(), &params, dt)?.project(u_star, p_old)
}

/// One-shot full Navier-Stokes step.
pub fn ns_step(
    state: &SimState,
    params: &PhysParams,
    dt: f64,
    mode: AcMode,
) -> Result<SimState, NsError> {
    NsStepper::new(state.grid(), params, dt)?.step(state, mode)
}
