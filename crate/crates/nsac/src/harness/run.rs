//! The coupled time loop: phase-field step, momentum step, diagnostics,
//! optional fixed-point sub-iterations, and file output.

use std::path::PathBuf;
use std::sync::Arc;

use thiserror::Error;

use crate::allen_cahn::{AcError, AcMode, AcStepper, Frozen};
use crate::channel::{trace, ChannelGrid, GridError, Wall};
use crate::diagnostics::{
    decay_fit, decay_observable, dissipation, energy, mass, DecayFit, DiagnosticsError,
};
use crate::energetics::PhysParams;
use crate::navier_stokes::{NsError, NsStepper, SimState, StateError};

use super::config::RunConfig;
use super::io::{self, DiagRow, IoError};
use super::presets::{self, PresetError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Preset(#[from] PresetError),
    #[error("step {step}: {source}")]
    Ac {
        step: usize,
        #[source]
        source: AcError,
    },
    #[error("step {step}: {source}")]
    Ns {
        step: usize,
        #[source]
        source: NsError,
    },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(
        "step {step}: CFL violation: dt = {dt:.3e} exceeds 0.5 min(dx,dz)/|u|_inf; suggested dt <= {suggested:.3e}"
    )]
    Cfl {
        step: usize,
        dt: f64,
        suggested: f64,
    },
    #[error("step {step}: wall trace drifted from psi by {gap:.3e} (> 1e-8)")]
    TraceDrift { step: usize, gap: f64 },
}

/// Cached steppers for one (grid, params, mode, dt) tuple.
pub struct Integrator {
    ac: AcStepper,
    ns: NsStepper,
    mode: AcMode,
    dt: f64,
    picard_iters: usize,
    h_min: f64,
}

impl Integrator {
    pub fn new(
        grid: &Arc<ChannelGrid>,
        params: &PhysParams,
        mode: AcMode,
        dt: f64,
        picard_iters: usize,
    ) -> Result<Self, RunError> {
        let ac = AcStepper::new(grid, params, mode, dt)
            .map_err(|source| RunError::Ac { step: 0, source })?;
        let ns =
            NsStepper::new(grid, params, dt).map_err(|source| RunError::Ns { step: 0, source })?;
        let mut h_min = grid.dz();
        for d in 0..grid.n_periodic_dims() {
            h_min = h_min.min(grid.dp(d));
        }
        Ok(Self {
            ac,
            ns,
            mode,
            dt,
            picard_iters: picard_iters.max(1),
            h_min,
        })
    }

    /// One coupled step: phase field first (so the Young stress sees the
    /// freshest trace), then momentum; repeated with updated frozen
    /// coefficients when fixed-point sub-iterations are enabled.
    pub fn step(&self, state: &SimState, step_index: usize) -> Result<SimState, RunError> {
        let u_max = state.u.max_abs();
        if u_max > 0.0 && self.dt > 0.5 * self.h_min / u_max {
            return Err(RunError::Cfl {
                step: step_index,
                dt: self.dt,
                suggested: 0.45 * self.h_min / u_max,
            });
        }

        let mut frozen_u = state.u.clone();
        let mut frozen_phi = state.phi.clone();
        let mut frozen_psi = state.psi.clone();
        let mut next = None;
        for _ in 0..self.picard_iters {
            let frozen = Frozen {
                u: &frozen_u,
                phi: &frozen_phi,
                psi: &frozen_psi,
            };
            let (phi_new, psi_new) =
                self.ac
                    .step_with_frozen(state, &frozen)
                    .map_err(|source| RunError::Ac {
                        step: step_index,
                        source,
                    })?;
            let mid = SimState {
                u: state.u.clone(),
                p: state.p.clone(),
                phi: phi_new,
                psi: psi_new,
                t: state.t,
            };
            let advanced = self
                .ns
                .step_from(&mid, &frozen_u, self.mode)
                .map_err(|source| RunError::Ns {
                    step: step_index,
                    source,
                })?;
            frozen_u = advanced.u.clone();
            frozen_phi = advanced.phi.clone();
            frozen_psi = advanced.psi.clone();
            next = Some(advanced);
        }
        let next = next.expect("picard_iters >= 1");

        let gap = Wall::BOTH
            .iter()
            .map(|&w| trace(&next.phi, w).max_abs_diff(&next.psi[w.index()]))
            .fold(0.0f64, f64::max);
        if gap > 1e-8 {
            return Err(RunError::TraceDrift {
                step: step_index,
                gap,
            });
        }
        Ok(next)
    }

    pub fn mode(&self) -> AcMode {
        self.mode
    }
}

/// Advances `state` by `steps` steps without any file output.
pub fn advance(
    state: SimState,
    integrator: &Integrator,
    steps: usize,
) -> Result<SimState, RunError> {
    let mut s = state;
    for n in 1..=steps {
        s = integrator.step(&s, n)?;
    }
    Ok(s)
}

/// Exit report of a simulation run.
#[derive(Debug)]
pub struct RunReport {
    pub steps: usize,
    pub final_t: f64,
    pub diagnostics_path: PathBuf,
    pub final_state_dir: PathBuf,
    pub decay: Option<DecayFit>,
    /// `(t, ||u||^2 + ||L(psi)||^2_Gamma + ||mu - mu_bar||^2)` samples.
    pub decay_series: Vec<(f64, f64)>,
    pub phi_sq_min: f64,
    pub phi_sq_max: f64,
    pub mass_drift: f64,
    pub preset_note: Option<String>,
    pub summary: Vec<String>,
}

pub fn run_simulation(cfg: &RunConfig) -> Result<RunReport, RunError> {
    let grid = cfg.grid()?;
    let (mut state, preset_note) = presets::initial_state(cfg, &grid)?;
    state.validate()?;
    let integrator = Integrator::new(&grid, &cfg.params, cfg.mode, cfg.dt, cfg.picard_iters)?;

    let n_steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    let mass0 = mass(&state);

    let mut reports: Vec<(
        crate::diagnostics::EnergyReport,
        crate::diagnostics::DissipationReport,
    )> = Vec::new();
    let mut rows: Vec<DiagRow> = Vec::new();
    let mut decay_series = Vec::new();
    let mut phi_sq_min = f64::INFINITY;
    let mut phi_sq_max = f64::NEG_INFINITY;

    let record = |state: &SimState,
                  d: crate::diagnostics::DissipationReport,
                  reports: &mut Vec<(
        crate::diagnostics::EnergyReport,
        crate::diagnostics::DissipationReport,
    )>,
                  rows: &mut Vec<DiagRow>,
                  decay_series: &mut Vec<(f64, f64)>| {
        let e = energy(state, &cfg.params, cfg.mode);
        // balance residual of the step ending at this row: the dissipation
        // is step-consistent, so this measures the splitting error
        let residual = match reports.last() {
            Some((e_prev, _)) => {
                let dt_row = e.t - e_prev.t;
                (e.e_total - e_prev.e_total) / dt_row + d.total()
            }
            None => 0.0,
        };
        rows.push(DiagRow {
            t: state.t,
            e_kin: e.e_kin,
            e_bulk: e.e_bulk,
            e_surf: e.e_surf,
            e_total: e.e_total,
            d_visc: d.d_visc,
            d_chem: d.d_chem,
            d_slip: d.d_slip,
            d_wall: d.d_wall,
            mass: mass(state),
            residual,
            max_abs_phi: state.phi.max_abs(),
        });
        decay_series.push((state.t, decay_observable(state, &cfg.params)));
        reports.push((e, d));
    };

    record(
        &state,
        dissipation(&state, &cfg.params, cfg.mode),
        &mut reports,
        &mut rows,
        &mut decay_series,
    );
    let track_phi = |state: &SimState, lo: &mut f64, hi: &mut f64| {
        for &v in state.phi.values() {
            let s = v * v;
            if s < *lo {
                *lo = s;
            }
            if s > *hi {
                *hi = s;
            }
        }
    };
    track_phi(&state, &mut phi_sq_min, &mut phi_sq_max);

    for step in 1..=n_steps {
        let next = integrator.step(&state, step)?;
        let prev = std::mem::replace(&mut state, next);
        track_phi(&state, &mut phi_sq_min, &mut phi_sq_max);
        if step % cfg.diag_every == 0 || step == n_steps {
            let d = crate::diagnostics::dissipation_step(&prev, &state, &cfg.params, cfg.dt);
            record(&state, d, &mut reports, &mut rows, &mut decay_series);
        }
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 && step != n_steps {
            io::write_snapshot(&state, &cfg.out_dir.join(format!("snap_{step:08}")))?;
        }
    }

    let diagnostics_path = cfg.out_dir.join("diagnostics.csv");
    io::write_timeseries(&rows, &diagnostics_path)?;
    let final_state_dir = cfg.out_dir.join("final");
    io::write_snapshot(&state, &final_state_dir)?;

    let fit_samples: Vec<(f64, f64)> = decay_series
        .iter()
        .copied()
        .filter(|(t, v)| *t >= cfg.fit_t0 && *v > 0.0)
        .collect();
    let decay = if fit_samples.len() >= 10 {
        let times: Vec<f64> = fit_samples.iter().map(|(t, _)| *t).collect();
        let values: Vec<f64> = fit_samples.iter().map(|(_, v)| *v).collect();
        decay_fit(&times, &values).ok()
    } else {
        None
    };

    let mass_drift = (mass(&state) - mass0).abs() / grid.volume();
    let max_residual = rows
        .iter()
        .skip(1)
        .fold(0.0f64, |m, r| m.max(r.residual.abs()));

    let mut summary = vec![
        format!("steps = {n_steps}, t_end = {:.6}", state.t),
        format!(
            "mode = {}, eps0 budget = {}",
            cfg.mode.name(),
            cfg.params.eps0
        ),
        format!(
            "E(0) = {:.9e}, E(end) = {:.9e}",
            rows[0].e_total,
            rows.last().unwrap().e_total
        ),
        format!("volume-mean mass drift = {mass_drift:.3e}"),
        format!("max |energy residual| = {max_residual:.3e}"),
        format!("phi^2 range = [{phi_sq_min:.6}, {phi_sq_max:.6}]"),
    ];
    if let Some(note) = &preset_note {
        summary.push(note.clone());
    }
    if let Some(fit) = &decay {
        summary.push(format!(
            "decay fit over t >= {}: alpha = {:.6}, c0 = {:.6e}, r2 = {:.6}",
            cfg.fit_t0, fit.alpha, fit.c0, fit.r2
        ));
    }

    Ok(RunReport {
        steps: n_steps,
        final_t: state.t,
        diagnostics_path,
        final_state_dir,
        decay,
        decay_series,
        phi_sq_min,
        phi_sq_max,
        mass_drift,
        preset_note,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;
    use crate::harness::presets;

    #[test]
    fn picard_iterations_stay_close_to_single_pass() {
        let cfg = parse_config(
            "nx = 16\nnz = 9\ndt = 1e-3\nt_end = 0.02\nmode = dynamic\ngamma = 0.1\n\
             theta_s = 2pi/5\npreset = perturbed-flat\n",
        )
        .unwrap();
        let grid = cfg.grid().unwrap();
        let (state0, _) = presets::initial_state(&cfg, &grid).unwrap();
        let run = |picard: usize| {
            let integ = Integrator::new(&grid, &cfg.params, cfg.mode, cfg.dt, picard).unwrap();
            advance(state0.clone(), &integ, 20).unwrap()
        };
        let once = run(1);
        let twice = run(2);
        // sub-iterations refine the same step, so the gap is the size of the
        // per-step coupling lag, not of the solution
        let gap = once.phi.max_abs_diff(&twice.phi);
        assert!(gap > 0.0 && gap < 1e-4, "picard gap {gap:.3e}");
        assert!(
            (crate::channel::volume_mean(&twice.phi) - crate::channel::volume_mean(&once.phi))
                .abs()
                < 1e-13
        );
    }

    #[test]
    fn cfl_guard_names_step_and_suggests_dt() {
        let cfg = parse_config(
            "nx = 16\nnz = 9\ndt = 0.2\nt_end = 1\nmode = dynamic\ngamma = 0.1\n\
             preset = perturbed-flat\nic_mean = 1\nic_amp = 0\nic_u_amp = 5\neps0 = 1e6\n",
        )
        .unwrap();
        let grid = cfg.grid().unwrap();
        let (state0, _) = presets::initial_state(&cfg, &grid).unwrap();
        let integ = Integrator::new(&grid, &cfg.params, cfg.mode, cfg.dt, 1).unwrap();
        match integ.step(&state0, 1) {
            Err(RunError::Cfl {
                step, suggested, ..
            }) => {
                assert_eq!(step, 1);
                assert!(suggested > 0.0 && suggested < 0.2);
            }
            other => panic!("expected CFL error, got {other:?}"),
        }
    }
}
