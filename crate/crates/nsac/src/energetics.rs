//! Pointwise constitutive quantities: the double-well potential, the
//! fluid-solid wall energy, the boundary operators `L` and `Lcal`, the
//! Newtonian viscous stress, and the capillary body force.

use thiserror::Error;

use crate::channel::{
    gradient, laplacian, normal_derivative, tangential_laplacian, trace, ScalarField, SurfaceField,
    VectorField, Wall,
};

/// Model coefficients of the coupled system, plus the scheme's stabilization
/// constant and the small-data budget used by decay diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    /// Viscosity, > 0.
    pub eta: f64,
    /// Slip (friction) coefficient, > 0.
    pub beta: f64,
    /// Surface diffusion coefficient of the dynamic boundary condition, >= 0.
    pub gamma: f64,
    /// Tangential-smoothing coefficient of the delta-approximate problem, >= 0.
    pub delta: f64,
    /// Fluid-fluid interface tension, > 0.
    pub nu: f64,
    /// Static contact angle in (0, pi), radians.
    pub theta_s: f64,
    /// Stabilization constant of the semi-implicit scheme, >= 0.
    pub stab: f64,
    /// Small-data budget for decay runs (diagnostic reference, not enforced
    /// on general runs).
    pub eps0: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            eta: 1.0,
            beta: 1.0,
            gamma: 0.1,
            delta: 0.0,
            nu: 1.0,
            theta_s: std::f64::consts::FRAC_PI_2,
            stab: 2.0,
            eps0: 0.5,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("parameter {name} = {got} violates {constraint}")]
    OutOfRange {
        name: &'static str,
        got: f64,
        constraint: &'static str,
    },
}

impl PhysParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = [("eta", self.eta), ("beta", self.beta), ("nu", self.nu)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ParamError::OutOfRange {
                    name,
                    got: v,
                    constraint: "> 0",
                });
            }
        }
        let nonneg = [
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("stab", self.stab),
            ("eps0", self.eps0),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ParamError::OutOfRange {
                    name,
                    got: v,
                    constraint: ">= 0",
                });
            }
        }
        if !(self.theta_s > 0.0 && self.theta_s < std::f64::consts::PI) {
            return Err(ParamError::OutOfRange {
                name: "theta_s",
                got: self.theta_s,
                constraint: "in (0, pi)",
            });
        }
        Ok(())
    }

    pub fn wall_energy(&self, psi: f64) -> f64 {
        wall_energy(psi, self.nu, self.theta_s)
    }

    pub fn wall_force(&self, psi: f64) -> f64 {
        wall_force(psi, self.nu, self.theta_s)
    }
}

/// Double-well potential `F(s) = (s^2 - 1)^2 / 4`.
pub fn bulk_potential(s: f64) -> f64 {
    let q = s * s - 1.0;
    0.25 * q * q
}

/// `f = F' : s^3 - s`.
pub fn bulk_force(s: f64) -> f64 {
    s * s * s - s
}

/// Fluid-solid interfacial energy `-(nu/2) cos(theta_s) sin(pi psi / 2)`.
pub fn wall_energy(psi: f64, nu: f64, theta_s: f64) -> f64 {
    -0.5 * nu * theta_s.cos() * (0.5 * std::f64::consts::PI * psi).sin()
}

/// Its derivative `-(nu pi / 4) cos(theta_s) cos(pi psi / 2)`.
pub fn wall_force(psi: f64, nu: f64, theta_s: f64) -> f64 {
    -0.25 * std::f64::consts::PI * nu * theta_s.cos() * (0.5 * std::f64::consts::PI * psi).cos()
}

#[derive(Debug, Error)]
pub enum EnergeticsError {
    #[error("trace of phi differs from psi on {wall:?} wall by {gap:.3e} (> {tol:.1e})")]
    TraceMismatch { wall: Wall, gap: f64, tol: f64 },
}

pub(crate) const TRACE_TOL: f64 = 1e-8;

pub(crate) fn check_trace(
    phi: &ScalarField,
    psi: &SurfaceField,
    wall: Wall,
) -> Result<(), EnergeticsError> {
    let gap = trace(phi, wall).max_abs_diff(psi);
    if gap > TRACE_TOL {
        return Err(EnergeticsError::TraceMismatch {
            wall,
            gap,
            tol: TRACE_TOL,
        });
    }
    Ok(())
}

/// Uncompensated Young stress operator `L(phi) = d_n phi + gamma_fs'(psi)`.
pub fn l_operator(
    phi: &ScalarField,
    psi: &SurfaceField,
    wall: Wall,
    params: &PhysParams,
) -> Result<SurfaceField, EnergeticsError> {
    check_trace(phi, psi, wall)?;
    let dn = normal_derivative(phi, wall);
    Ok(dn.zip_with(psi, |d, p| d + params.wall_force(p)))
}

/// Dynamic-boundary operator `Lcal(phi) = -gamma lap_tau psi + L(phi)`.
pub fn lcal_operator(
    phi: &ScalarField,
    psi: &SurfaceField,
    wall: Wall,
    params: &PhysParams,
    gamma: f64,
) -> Result<SurfaceField, EnergeticsError> {
    let mut l = l_operator(phi, psi, wall, params)?;
    l.axpy(-gamma, &tangential_laplacian(psi));
    Ok(l)
}

/// Symmetric rank-2 tensor field, stored row-major.
#[derive(Debug, Clone)]
pub struct StressTensor {
    dim: usize,
    comps: Vec<ScalarField>,
}

impl StressTensor {
    pub fn component(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[i * self.dim + j]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Pointwise Frobenius norm squared, sum over all dim^2 entries.
    pub fn frobenius_squared(&self) -> ScalarField {
        let mut out = ScalarField::zeros(self.comps[0].grid());
        for c in &self.comps {
            for (o, &v) in out.values_mut().iter_mut().zip(c.values()) {
                *o += v * v;
            }
        }
        out
    }
}

/// Newtonian viscous stress `S(u) = eta (grad u + grad u^T)`.
pub fn viscous_stress(u: &VectorField, eta: f64) -> StressTensor {
    let dim = u.dim();
    let grads: Vec<VectorField> = (0..dim).map(|c| gradient(u.component(c))).collect();
    let mut comps = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            // grads[j].component(i) = d_i u_j
            comps.push(
                grads[j]
                    .component(i)
                    .zip_with(grads[i].component(j), |a, b| eta * (a + b)),
            );
        }
    }
    StressTensor { dim, comps }
}

/// Capillary force `div(grad phi (x) grad phi)`, evaluated as
/// `lap(phi) grad(phi) + grad(|grad phi|^2) / 2`. The gradient part is kept
/// rather than absorbed into the pressure so the energy ledger matches the
/// continuous balance without pressure bookkeeping.
pub fn capillary_force(phi: &ScalarField) -> VectorField {
    let g = gradient(phi);
    let lap = laplacian(phi);
    let mut out = gradient(&g.magnitude_squared());
    for c in 0..out.dim() {
        let comp = out.component_mut(c);
        comp.scale(0.5);
        for ((o, &l), &gc) in comp
            .values_mut()
            .iter_mut()
            .zip(lap.values())
            .zip(g.component(c).values())
        {
            *o += l * gc;
        }
    }
    out
}

/// Convenience: pointwise `F'` applied to a field.
pub fn bulk_force_field(phi: &ScalarField) -> ScalarField {
    phi.map(bulk_force)
}

/// Convenience wrapper used by steppers: mode-independent wall force field.
pub fn wall_force_field(psi: &SurfaceField, params: &PhysParams) -> SurfaceField {
    psi.map(|p| params.wall_force(p))
}
