//! Empirical delta-to-zero study: the delta-approximate runs against the
//! relaxation run from identical initial data.

use std::fmt;

use crate::allen_cahn::AcMode;
use crate::channel::Wall;
use crate::energetics::PhysParams;
use crate::navier_stokes::SimState;

use super::config::RunConfig;
use super::presets;
use super::run::{advance, Integrator, RunError};

#[derive(Debug, Clone, Copy)]
pub struct DeltaRow {
    pub delta: f64,
    /// `max over walls of ||psi_delta - psi_relax||_inf` at t_end.
    pub psi_vs_relax: f64,
    pub phi_vs_relax: f64,
    /// `||psi_delta_i - psi_delta_{i+1}||_inf` to the next smaller delta.
    pub psi_successive: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DeltaStudy {
    pub rows: Vec<DeltaRow>,
}

impl fmt::Display for DeltaStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>10} {:>16} {:>16} {:>16}",
            "delta", "|psi-psi_rel|", "|phi-phi_rel|", "successive"
        )?;
        for r in &self.rows {
            let succ = r
                .psi_successive
                .map(|v| format!("{v:.6e}"))
                .unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "{:>10.4e} {:>16.6e} {:>16.6e} {:>16}",
                r.delta, r.psi_vs_relax, r.phi_vs_relax, succ
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DeltaError {
    #[error("delta list must be strictly decreasing and positive, got {0:?}")]
    BadDeltas(Vec<f64>),
    #[error(transparent)]
    Run(#[from] RunError),
}

impl From<super::presets::PresetError> for DeltaError {
    fn from(e: super::presets::PresetError) -> Self {
        DeltaError::Run(RunError::Preset(e))
    }
}

pub fn run_delta_study(cfg: &RunConfig, deltas: &[f64]) -> Result<DeltaStudy, DeltaError> {
    if deltas.is_empty()
        || deltas.iter().any(|&d| !(d > 0.0))
        || deltas.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(DeltaError::BadDeltas(deltas.to_vec()));
    }
    let grid = cfg.grid().map_err(RunError::Grid)?;
    let (state0, _) = presets::initial_state(cfg, &grid)?;
    let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;

    let run_mode = |params: &PhysParams, mode: AcMode| -> Result<SimState, RunError> {
        let integrator = Integrator::new(&grid, params, mode, cfg.dt, cfg.picard_iters)?;
        advance(state0.clone(), &integrator, steps)
    };

    let relax_params = PhysParams {
        gamma: 0.0,
        delta: 0.0,
        ..cfg.params
    };
    let relax = run_mode(&relax_params, AcMode::Relaxation)?;

    let mut finals = Vec::new();
    for &d in deltas {
        let params = PhysParams {
            gamma: 0.0,
            delta: d,
            ..cfg.params
        };
        finals.push((d, run_mode(&params, AcMode::DeltaApprox)?));
    }

    let psi_dist = |a: &SimState, b: &SimState| {
        Wall::BOTH
            .iter()
            .map(|&w| a.psi[w.index()].max_abs_diff(&b.psi[w.index()]))
            .fold(0.0f64, f64::max)
    };

    let mut rows = Vec::new();
    for (i, (d, s)) in finals.iter().enumerate() {
        rows.push(DeltaRow {
            delta: *d,
            psi_vs_relax: psi_dist(s, &relax),
            phi_vs_relax: s.phi.max_abs_diff(&relax.phi),
            psi_successive: finals.get(i + 1).map(|(_, next)| psi_dist(s, next)),
        });
    }
    Ok(DeltaStudy { rows })
}
