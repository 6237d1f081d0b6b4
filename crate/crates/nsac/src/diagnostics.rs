//! Discrete evaluation of the energy and dissipation functionals, mass,
//! integer-order Sobolev norms, the per-step energy-law residual, and
//! exponential decay-rate fitting.

use thiserror::Error;

use crate::allen_cahn::{chemical_potential, AcMode};
use crate::channel::{
    gradient, surface_integral, tangential_gradient, tangential_laplacian, trace, volume_integral,
    ScalarField, SurfaceField, Wall,
};
use crate::energetics::{bulk_potential, viscous_stress, PhysParams};
use crate::navier_stokes::SimState;

/// Components of the total energy at one instant.
#[derive(Debug, Clone, Copy)]
pub struct EnergyReport {
    /// `int |u|^2 / 2`
    pub e_kin: f64,
    /// `int ( |grad phi|^2 / 2 + F(phi) )`
    pub e_bulk: f64,
    /// `sum over walls of int ( gamma/2 |grad_tau psi|^2 + gamma_fs(psi) )`
    pub e_surf: f64,
    pub e_total: f64,
    pub t: f64,
}

/// Components of the instantaneous dissipation.
#[derive(Debug, Clone, Copy)]
pub struct DissipationReport {
    /// `int |S(u)|^2 / 2`
    pub d_visc: f64,
    /// `int |mu - mu_bar|^2`
    pub d_chem: f64,
    /// `beta sum over walls of int |u_tau|^2`
    pub d_slip: f64,
    /// `sum over walls of int |W(psi)|^2` with `W` the mode's boundary operator
    pub d_wall: f64,
    pub t: f64,
}

impl DissipationReport {
    pub fn total(&self) -> f64 {
        self.d_visc + self.d_chem + self.d_slip + self.d_wall
    }
}

/// Discrete Dirichlet form `int grad f . grad g` in the pairing the implicit
/// solvers realize exactly: spectral (full `k^2`) along the periodic
/// directions, staggered first differences across the channel. A
/// second-order quadrature of the continuum integral.
pub fn dirichlet_form(f: &ScalarField, g: &ScalarField) -> f64 {
    let grid = f.grid();
    let nz = grid.n_wall();
    let dz = grid.dz();
    let fs = f.to_spectrum();
    let gs = g.to_spectrum();
    // Parseval: sum_x dx (d_x f)(d_x g) = (dx / N) sum_k k^2 Re(f g*)
    let np = grid.np_total() as f64;
    let mut pref = 1.0 / np;
    for d in 0..grid.n_periodic_dims() {
        pref *= grid.dp(d);
    }
    let mut acc = 0.0;
    for ip in 0..grid.np_total() {
        let k2 = grid.k_squared(ip);
        if k2 != 0.0 {
            for iz in 0..nz {
                let a = fs.coeffs()[ip * nz + iz];
                let b = gs.coeffs()[ip * nz + iz];
                acc += pref * grid.z_weight(iz) * k2 * (a.re * b.re + a.im * b.im);
            }
        }
    }
    // staggered z part
    let wp = grid.surface_weight();
    for ip in 0..grid.np_total() {
        for j in 0..nz - 1 {
            let df = f.values()[ip * nz + j + 1] - f.values()[ip * nz + j];
            let dg = g.values()[ip * nz + j + 1] - g.values()[ip * nz + j];
            acc += wp * df * dg / dz;
        }
    }
    acc
}

/// Surface Dirichlet form `int_Gamma grad_tau s . grad_tau s` matching the
/// solvers' `-k^2` multiplier exactly (Parseval with the full wavenumber).
pub fn surface_dirichlet_form(s: &SurfaceField) -> f64 {
    let grid = s.grid();
    let spec = s.to_spectrum();
    let np = grid.np_total() as f64;
    let pref = grid.surface_weight() / np;
    let mut acc = 0.0;
    for ip in 0..grid.np_total() {
        let k2 = grid.k_squared(ip);
        let c = spec.coeffs()[ip];
        acc += pref * k2 * (c.re * c.re + c.im * c.im);
    }
    acc
}

pub fn energy(state: &SimState, params: &PhysParams, mode: AcMode) -> EnergyReport {
    let e_kin = 0.5 * volume_integral(&state.u.magnitude_squared());

    let mut e_bulk = 0.5 * dirichlet_form(&state.phi, &state.phi);
    e_bulk += volume_integral(&state.phi.map(bulk_potential));

    let gamma = mode.surface_energy_coeff(params);
    let mut e_surf = 0.0;
    for wall in Wall::BOTH {
        let psi = &state.psi[wall.index()];
        e_surf += surface_integral(&psi.map(|p| params.wall_energy(p)));
        if gamma > 0.0 {
            e_surf += 0.5 * gamma * surface_dirichlet_form(psi);
        }
    }

    EnergyReport {
        e_kin,
        e_bulk,
        e_surf,
        e_total: e_kin + e_bulk + e_surf,
        t: state.t,
    }
}

/// The mode's wall boundary operator applied to the current state.
fn wall_operator(state: &SimState, params: &PhysParams, mode: AcMode, wall: Wall) -> SurfaceField {
    let psi = &state.psi[wall.index()];
    let dn = crate::channel::normal_derivative(&state.phi, wall);
    let mut w = dn.zip_with(psi, |d, p| d + params.wall_force(p));
    let gamma = mode.gamma_eff(params);
    if gamma > 0.0 {
        w.axpy(-gamma, &tangential_laplacian(psi));
    }
    w
}

pub fn dissipation(state: &SimState, params: &PhysParams, mode: AcMode) -> DissipationReport {
    let stress = viscous_stress(&state.u, params.eta);
    let d_visc = 0.5 * volume_integral(&stress.frobenius_squared());

    let mu = chemical_potential(&state.phi);
    let mu_bar = crate::channel::volume_mean(&mu);
    let d_chem = volume_integral(&mu.map(|m| (m - mu_bar) * (m - mu_bar)));

    let mut d_slip = 0.0;
    let mut d_wall = 0.0;
    for wall in Wall::BOTH {
        let mut slip_density = SurfaceField::zeros(state.grid(), wall);
        for d in 0..state.grid().n_periodic_dims() {
            let ut = trace(state.u.component(d), wall);
            slip_density.axpy(1.0, &ut.zip_with(&ut, |a, b| a * b));
        }
        d_slip += params.beta * surface_integral(&slip_density);

        let w = wall_operator(state, params, mode, wall);
        d_wall += surface_integral(&w.zip_with(&w, |a, b| a * b));
    }

    DissipationReport {
        d_visc,
        d_chem,
        d_slip,
        d_wall,
        t: state.t,
    }
}

/// Dissipation evaluated at the step-consistent levels of one completed step
/// `prev -> next`: viscous and slip at the new velocity through the exact
/// Dirichlet pairing, the chemical and wall channels through the rates the
/// step actually realized. Against [`energy`] differences, the resulting
/// balance residual measures time-splitting error rather than spatial
/// evaluation mismatch. Each component is a consistent quadrature of the
/// same continuum functional as in [`dissipation`] (the viscous one under
/// the unit-viscosity convention of the balance law).
pub fn dissipation_step(
    prev: &SimState,
    next: &SimState,
    params: &PhysParams,
    dt: f64,
) -> DissipationReport {
    let grid = next.grid();
    let mut d_visc = 0.0;
    for c in 0..next.u.dim() {
        d_visc += params.eta * dirichlet_form(next.u.component(c), next.u.component(c));
    }

    // realized chemical rate: (phi+ - phi)/dt + div(u phi)
    let flux = crate::channel::VectorField::from_components(
        (0..prev.u.dim())
            .map(|c| prev.u.component(c).zip_with(&prev.phi, |a, b| a * b))
            .collect(),
    );
    let mut rate = next.phi.clone();
    rate.axpy(-1.0, &prev.phi);
    rate.scale(1.0 / dt);
    rate.axpy(1.0, &crate::channel::divergence(&flux));
    let d_chem = volume_integral(&rate.zip_with(&rate, |a, b| a * b));

    let mut d_slip = 0.0;
    let mut d_wall = 0.0;
    for wall in Wall::BOTH {
        let mut slip_density = SurfaceField::zeros(grid, wall);
        for d in 0..grid.n_periodic_dims() {
            let ut = trace(next.u.component(d), wall);
            slip_density.axpy(1.0, &ut.zip_with(&ut, |a, b| a * b));
        }
        d_slip += params.beta * surface_integral(&slip_density);

        // realized wall operator: -(psi_t + u_tau . grad_tau psi)
        let mut w = next.psi[wall.index()].clone();
        w.axpy(-1.0, &prev.psi[wall.index()]);
        w.scale(1.0 / dt);
        let grads = tangential_gradient(&prev.psi[wall.index()]);
        for (d, gd) in grads.iter().enumerate() {
            let ut = trace(prev.u.component(d), wall);
            w.axpy(1.0, &ut.zip_with(gd, |a, b| a * b));
        }
        d_wall += surface_integral(&w.zip_with(&w, |a, b| a * b));
    }

    DissipationReport {
        d_visc,
        d_chem,
        d_slip,
        d_wall,
        t: next.t,
    }
}

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("report times are not uniformly spaced: step {step} has dt {got:.6e}, expected {expected:.6e}")]
    NonUniformDt {
        step: usize,
        got: f64,
        expected: f64,
    },
    #[error("nonpositive value {value:.3e} at sample {index}; decay fit needs positive data")]
    NonPositive { index: usize, value: f64 },
    #[error("unsupported Sobolev order {0}; supported orders are 0, 1, 2")]
    UnsupportedOrder(usize),
}

/// Per-step residual of the discrete energy balance,
/// `r_n = (E_{n+1} - E_n)/dt + D_{n+1}`, with the dissipation evaluated at
/// the step-consistent (end-of-step) state.
#[derive(Debug, Clone)]
pub struct ResidualSeries {
    pub values: Vec<f64>,
    pub max_abs: f64,
    pub mean_abs: f64,
}

pub fn energy_residual(
    history: &[(EnergyReport, DissipationReport)],
    dt: f64,
) -> Result<ResidualSeries, DiagnosticsError> {
    if history.len() < 2 {
        return Err(DiagnosticsError::TooFewSamples {
            need: 2,
            got: history.len(),
        });
    }
    for (i, pair) in history.windows(2).enumerate() {
        let got = pair[1].0.t - pair[0].0.t;
        if (got - dt).abs() > 1e-9 * dt.max(1.0) {
            return Err(DiagnosticsError::NonUniformDt {
                step: i,
                got,
                expected: dt,
            });
        }
    }
    let values: Vec<f64> = history
        .windows(2)
        .map(|pair| (pair[1].0.e_total - pair[0].0.e_total) / dt + pair[1].1.total())
        .collect();
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mean_abs = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
    Ok(ResidualSeries {
        values,
        max_abs,
        mean_abs,
    })
}

/// Total mass `int phi`.
pub fn mass(state: &SimState) -> f64 {
    volume_integral(&state.phi)
}

/// Integer-order Sobolev norm of a bulk field: H^0 = L^2, H^1 adds the
/// gradient, H^2 adds all second derivatives (full Hessian).
pub fn sobolev_norm(field: &ScalarField, order: usize) -> Result<f64, DiagnosticsError> {
    if order > 2 {
        return Err(DiagnosticsError::UnsupportedOrder(order));
    }
    let mut acc = volume_integral(&field.zip_with(field, |a, b| a * b));
    if order >= 1 {
        let g = gradient(field);
        acc += volume_integral(&g.magnitude_squared());
        if order >= 2 {
            for d in 0..field.grid().dim() {
                let h = gradient(g.component(d));
                acc += volume_integral(&h.magnitude_squared());
            }
        }
    }
    Ok(acc.sqrt())
}

/// Exponential fit `y ~ c0 exp(-alpha t)` by least squares on `log y`.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub alpha: f64,
    pub c0: f64,
    pub r2: f64,
}

pub fn decay_fit(times: &[f64], values: &[f64]) -> Result<DecayFit, DiagnosticsError> {
    if times.len() < 10 || times.len() != values.len() {
        return Err(DiagnosticsError::TooFewSamples {
            need: 10,
            got: times.len().min(values.len()),
        });
    }
    for (i, &v) in values.iter().enumerate() {
        if !(v > 0.0) {
            return Err(DiagnosticsError::NonPositive { index: i, value: v });
        }
    }
    let n = times.len() as f64;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let st: f64 = times.iter().sum();
    let sy: f64 = logs.iter().sum();
    let stt: f64 = times.iter().map(|t| t * t).sum();
    let sty: f64 = times.iter().zip(&logs).map(|(t, y)| t * y).sum();
    let denom = n * stt - st * st;
    let slope = (n * sty - st * sy) / denom;
    let intercept = (sy - slope * st) / n;
    let y_mean = sy / n;
    let ss_tot: f64 = logs.iter().map(|y| (y - y_mean) * (y - y_mean)).sum();
    let ss_res: f64 = times
        .iter()
        .zip(&logs)
        .map(|(t, y)| {
            let e = y - (intercept + slope * t);
            e * e
        })
        .sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecayFit {
        alpha: -slope,
        c0: intercept.exp(),
        r2,
    })
}

/// Smallest positive root of `lambda tan(lambda) = beta / eta` on (0, pi/2),
/// the decay wavenumber of the slip (Robin) Stokes eigenmode, by bisection.
pub fn slip_eigenvalue(eta: f64, beta: f64, tol: f64) -> f64 {
    let target = beta / eta;
    let f = |l: f64| l * l.tan() - target;
    let mut lo = 1e-12;
    let mut hi = std::f64::consts::FRAC_PI_2 - 1e-12;
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The decay-theorem observable `||u||^2 + ||L(psi)||^2_Gamma + ||mu - mu_bar||^2`.
pub fn decay_observable(state: &SimState, params: &PhysParams) -> f64 {
    let u2 = volume_integral(&state.u.magnitude_squared());
    let mu = chemical_potential(&state.phi);
    let mu_bar = crate::channel::volume_mean(&mu);
    let mu2 = volume_integral(&mu.map(|m| (m - mu_bar) * (m - mu_bar)));
    let mut l2 = 0.0;
    for wall in Wall::BOTH {
        let dn = crate::channel::normal_derivative(&state.phi, wall);
        let l = dn.zip_with(&state.psi[wall.index()], |d, p| d + params.wall_force(p));
        l2 += surface_integral(&l.zip_with(&l, |a, b| a * b));
    }
    u2 + l2 + mu2
}
