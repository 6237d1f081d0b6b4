//! Acceptance suite: one test per acceptance criterion, each printing a
//! single pass line with the measured quantities when it succeeds.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use nsac::allen_cahn::{bb1_residual, AcMode, AcStepper};
use nsac::channel::{build_grid, ChannelGrid, ScalarField, SurfaceField, VectorField, Wall};
use nsac::diagnostics::slip_eigenvalue;
use nsac::energetics::PhysParams;
use nsac::harness::{
    parse_config, read_snapshot, read_timeseries, run_delta_study, run_mms, run_simulation,
    MmsCase, RunConfig,
};
use nsac::navier_stokes::{NsStepper, SimState};

fn work_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nsac_acceptance_{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn energy_law_config(dt: f64, out: &std::path::Path) -> RunConfig {
    let t_end = 1000.0 * dt;
    parse_config(&format!(
        "nx = 64\nnz = 33\ndt = {dt}\nt_end = {t_end}\nmode = dynamic\ngamma = 0.1\n\
         theta_s = 2pi/5\neta = 1\nbeta = 1\nnu = 1\nstab = 2\npreset = perturbed-flat\n\
         ic_mean = 0.9\nic_amp = 0.05\ndiag_every = 1\nout_dir = {}\n",
        out.display()
    ))
    .expect("valid config")
}

const ENERGY_DT_LADDER: [f64; 4] = [1e-3, 5e-4, 2.5e-4, 1.25e-4];

/// Criterion 1: the discrete energy-balance residual of the dynamic-mode
/// coupled run shrinks with dt at observed order >= 0.9.
#[test]
fn criterion_01_energy_law_residual_order() {
    let start = Instant::now();
    let base = work_dir("c01");
    let mut max_residuals = Vec::new();
    for (i, &dt) in ENERGY_DT_LADDER.iter().enumerate() {
        let cfg = energy_law_config(dt, &base.join(format!("run{i}")));
        let report = run_simulation(&cfg).expect("run");
        let rows = read_timeseries(&report.diagnostics_path).expect("csv");
        let max_res = rows.iter().skip(1).fold(0.0f64, |m, r| m.max(r[10].abs()));
        max_residuals.push(max_res);
    }
    let orders: Vec<f64> = max_residuals
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .collect();
    let elapsed = start.elapsed();
    for &o in &orders {
        assert!(
            o >= 0.9,
            "energy residual order {o:.3} < 0.9 (residuals {max_residuals:?})"
        );
    }
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "energy-law study took {elapsed:?} (budget 60 s)"
    );
    let _ = std::fs::remove_dir_all(&base);
    println!(
        "criterion 01 PASS - energy-law residual orders {:?} (residuals {:?}, {:.1} s)",
        orders
            .iter()
            .map(|o| (o * 1e3).round() / 1e3)
            .collect::<Vec<_>>(),
        max_residuals,
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: total energy is non-increasing at every step of the same
/// runs (tolerance 1e-12 max(1, E0)).
#[test]
fn criterion_02_monotone_energy() {
    let base = work_dir("c02");
    for (i, &dt) in ENERGY_DT_LADDER.iter().enumerate() {
        let cfg = energy_law_config(dt, &base.join(format!("run{i}")));
        let report = run_simulation(&cfg).expect("run");
        let rows = read_timeseries(&report.diagnostics_path).expect("csv");
        assert_eq!(rows.len(), 1001, "expected 1000 recorded steps");
        let e0: f64 = rows[0][4];
        let tol = 1e-12 * e0.abs().max(1.0);
        for (n, w) in rows.windows(2).enumerate() {
            assert!(
                w[1][4] <= w[0][4] + tol,
                "dt={dt}: energy rose at step {}: {} -> {}",
                n + 1,
                w[0][4],
                w[1][4]
            );
        }
    }
    let _ = std::fs::remove_dir_all(&base);
    println!("criterion 02 PASS - energy monotone over 1000 steps for all four dt");
}

/// Criterion 3: volume-mean mass drift <= 1e-12 over 1000 coupled steps in
/// every boundary-coupling mode.
#[test]
fn criterion_03_mass_conservation_all_modes() {
    let base = work_dir("c03");
    let mut drifts = Vec::new();
    for (mode, extra) in [
        ("dynamic", "gamma = 0.1\n"),
        ("delta_approx", "gamma = 0\ndelta = 0.05\n"),
        ("relaxation", "gamma = 0\ndelta = 0\n"),
    ] {
        let cfg = parse_config(&format!(
            "nx = 32\nnz = 17\ndt = 1e-3\nt_end = 1\nmode = {mode}\n{extra}theta_s = 2pi/5\n\
             preset = perturbed-flat\nic_mean = 0.9\nic_amp = 0.05\ndiag_every = 100\n\
             out_dir = {}\n",
            base.join(mode).display()
        ))
        .expect("valid config");
        let report = run_simulation(&cfg).expect("run");
        assert_eq!(report.steps, 1000);
        assert!(
            report.mass_drift <= 1e-12,
            "mode {mode}: volume-mean mass drift {:.3e} > 1e-12",
            report.mass_drift
        );
        drifts.push((mode, report.mass_drift));
    }
    let _ = std::fs::remove_dir_all(&base);
    println!("criterion 03 PASS - mass drift over 1000 steps: {drifts:?}");
}

/// Criterion 4: manufactured/self-refinement convergence. Wall-normal
/// observed orders in [1.8, 2.2] for the coupled elliptic case and the
/// dynamic-boundary phase-field case; periodic-direction error <= 1e-8 once
/// resolved.
#[test]
fn criterion_04_mms_convergence() {
    let start = Instant::now();
    let cfg = parse_config("nx = 16\nnz = 17\ndt = 1e-3\nt_end = 0.1\n").unwrap();

    let elliptic = run_mms(&cfg, MmsCase::Elliptic).expect("elliptic case");
    for &o in &elliptic.orders {
        assert!(
            (1.8..=2.2).contains(&o),
            "elliptic order {o:.3} outside [1.8, 2.2]: {elliptic}"
        );
    }
    let periodic = elliptic
        .rows
        .iter()
        .find(|r| r.label.contains("periodic"))
        .expect("periodic exactness row");
    assert!(
        periodic.value <= 1e-8,
        "periodic-direction error {:.3e} > 1e-8",
        periodic.value
    );

    let ac = run_mms(&cfg, MmsCase::AcDynamicBc).expect("ac-dynamic case");
    for &o in &ac.orders {
        assert!(
            (1.8..=2.2).contains(&o),
            "ac-dynamic order {o:.3} outside [1.8, 2.2]: {ac}"
        );
    }
    let stationary = ac
        .rows
        .iter()
        .find(|r| r.label.contains("stationary"))
        .expect("stationary-zero row");
    assert!(
        stationary.value <= 1e-12,
        "stationary manufactured-zero error {:.3e} > 1e-12",
        stationary.value
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "mms study took {elapsed:?} (budget 30 s)"
    );
    println!(
        "criterion 04 PASS - elliptic orders {:?}, ac-dynamic orders {:?}, periodic error {:.2e} ({:.1} s)",
        elliptic.orders.iter().map(|o| (o * 1e3).round() / 1e3).collect::<Vec<_>>(),
        ac.orders.iter().map(|o| (o * 1e3).round() / 1e3).collect::<Vec<_>>(),
        periodic.value,
        elapsed.as_secs_f64()
    );
}

/// Dense real-space solve of the coupled elliptic problem, assembled column
/// by column from the public operator algebra; independent of the
/// per-wavenumber solution path.
fn dense_elliptic_oracle(
    grid: &Arc<ChannelGrid>,
    source: &ScalarField,
    walls: &[SurfaceField; 2],
) -> ScalarField {
    let n = grid.n_total();
    let nz = grid.n_wall();
    let mut a = vec![0.0; n * n];
    for col in 0..n {
        let mut e = ScalarField::zeros(grid);
        e.values_mut()[col] = 1.0;
        let lap = nsac::channel::laplacian(&e);
        for ip in 0..grid.np_total() {
            for iz in 1..nz - 1 {
                let r = ip * nz + iz;
                a[r * n + col] = -lap.values()[r];
            }
            for wall in Wall::BOTH {
                let r = ip * nz + grid.wall_iz(wall);
                let psi_w = nsac::channel::trace(&e, wall);
                let lt = nsac::channel::tangential_laplacian(&psi_w);
                let dn = nsac::channel::normal_derivative(&e, wall);
                a[r * n + col] = psi_w.values()[ip] - lt.values()[ip] + dn.values()[ip];
            }
        }
    }
    let lu = nsac::zline::DenseLu::factor(a, n).expect("oracle factorization");
    let mut b = vec![0.0; n];
    for ip in 0..grid.np_total() {
        for iz in 0..nz {
            b[ip * nz + iz] = source.at(ip, iz);
        }
        b[ip * nz] = walls[0].values()[ip];
        b[ip * nz + nz - 1] = walls[1].values()[ip];
    }
    lu.solve(&mut b);
    ScalarField::from_values(grid, b)
}

/// Criterion 5: the per-wavenumber elliptic solver matches a dense direct
/// solve on a 16x9 grid to 1e-10 relative for 20 random right-hand sides.
#[test]
fn criterion_05_elliptic_oracle_equivalence() {
    let grid = build_grid(2, &[16], 9, &[2.0 * std::f64::consts::PI]).unwrap();
    let mut seed = 0xabcdef12345u64;
    let mut rnd = move || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut worst = 0.0f64;
    for case in 0..20 {
        let source = ScalarField::from_values(&grid, (0..grid.n_total()).map(|_| rnd()).collect());
        let walls = [
            SurfaceField::from_values(
                &grid,
                Wall::Bottom,
                (0..grid.np_total()).map(|_| rnd()).collect(),
            ),
            SurfaceField::from_values(
                &grid,
                Wall::Top,
                (0..grid.np_total()).map(|_| rnd()).collect(),
            ),
        ];
        let problem = nsac::elliptic_bs::BulkSurfaceProblem {
            a_bulk: 0.0,
            tangential_bulk: 0.0,
            a_surf: 1.0,
            gamma_surf: 1.0,
            source: source.clone(),
            wall_sources: walls.clone(),
        };
        let (phi, _) = nsac::elliptic_bs::solve_bulk_surface(&problem).expect("solve");
        let oracle = dense_elliptic_oracle(&grid, &source, &walls);
        let rel = phi.max_abs_diff(&oracle) / oracle.max_abs().max(1.0);
        assert!(rel <= 1e-10, "case {case}: relative deviation {rel:.3e}");
        worst = worst.max(rel);
    }
    println!("criterion 05 PASS - oracle equivalence over 20 random right-hand sides (worst {worst:.2e})");
}

/// Criterion 6: slip-eigenmode kinetic-energy decay rate within 2% of
/// 2 eta lambda^2, with lambda from the bisection oracle.
#[test]
fn criterion_06_slip_mode_decay() {
    let mut results = Vec::new();
    for (eta, beta) in [(1.0, 1.0), (1.0, 10.0), (0.1, 1.0)] {
        let (rate, target) = nsac::harness::mms::slip_decay_rate(eta, beta).expect("run");
        let rel = (rate - target).abs() / target;
        assert!(
            rel < 0.02,
            "(eta, beta) = ({eta}, {beta}): rate {rate:.6} vs {target:.6} ({:.3}%)",
            100.0 * rel
        );
        results.push(((eta, beta), (rel * 1e6).round() / 1e4));
    }
    println!("criterion 06 PASS - slip decay rates within 2% (rel errors in %: {results:?})");
}

fn decay_config(dim: usize, out: &std::path::Path) -> RunConfig {
    let geometry = if dim == 3 {
        "dim = 3\nnx = 16\nny = 16\nnz = 17\n"
    } else {
        "nx = 64\nnz = 33\n"
    };
    parse_config(&format!(
        "{geometry}dt = 2e-3\nt_end = 5\nmode = relaxation\ngamma = 0\ndelta = 0\n\
         theta_s = pi/2\npreset = perturbed-flat\nic_mean = 1\nic_amp = 0.02\nic_u_amp = 0.1\n\
         eps0 = 0.5\nfit_t0 = 0.5\ndiag_every = 5\nout_dir = {}\n",
        out.display()
    ))
    .expect("valid config")
}

/// Criterion 7: small-data exponential decay in relaxation mode (3D and 2D),
/// with the phase bound maintained and the wall identity residual refining
/// at observed order >= 1.
#[test]
fn criterion_07_exponential_decay() {
    let start = Instant::now();
    let base = work_dir("c07");
    let mut fits = Vec::new();
    for dim in [3usize, 2] {
        let cfg = decay_config(dim, &base.join(format!("d{dim}")));
        let report = run_simulation(&cfg).expect("decay run");
        let fit = report.decay.expect("decay fit available");
        assert!(
            fit.alpha > 0.0,
            "{dim}D: fitted alpha {} not positive",
            fit.alpha
        );
        assert!(fit.r2 >= 0.99, "{dim}D: r2 {} < 0.99", fit.r2);
        assert!(
            report.phi_sq_min >= 2.0 / 3.0 && report.phi_sq_max <= 4.0,
            "{dim}D: phi^2 range [{}, {}] leaves [2/3, 4]",
            report.phi_sq_min,
            report.phi_sq_max
        );
        fits.push((dim, (fit.alpha * 1e4).round() / 1e4, fit.r2));
    }

    // wall identity residual under grid refinement
    let bb1_run = |nx: usize, nz: usize, dt: f64| -> f64 {
        let g = build_grid(2, &[nx], nz, &[2.0 * std::f64::consts::PI]).unwrap();
        let params = PhysParams {
            gamma: 0.0,
            delta: 0.0,
            theta_s: std::f64::consts::FRAC_PI_2,
            ..PhysParams::default()
        };
        let stepper = AcStepper::new(&g, &params, AcMode::Relaxation, dt).unwrap();
        let phi0 = ScalarField::from_fn(&g, |x| {
            1.0 + 0.02 * x[0].cos() * (std::f64::consts::PI * x[1] / 2.0).cos()
        });
        let mut state = SimState::resting(phi0);
        for _ in 0..(0.1 / dt).round() as usize {
            let (phi, psi) = stepper.step(&state).unwrap();
            state.phi = phi;
            state.psi = psi;
            state.t += dt;
        }
        bb1_residual(&state, &params, AcMode::Relaxation).value
    };
    let residuals = [
        bb1_run(16, 9, 4e-3),
        bb1_run(32, 17, 1e-3),
        bb1_run(64, 33, 2.5e-4),
    ];
    let bb1_orders: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    for &o in &bb1_orders {
        assert!(o >= 1.0, "bb1 refinement order {o:.3} < 1 ({residuals:?})");
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "decay study took {elapsed:?} (budget 5 min)"
    );
    let _ = std::fs::remove_dir_all(&base);
    println!(
        "criterion 07 PASS - decay fits {fits:?}, bb1 orders {:?} ({:.1} s)",
        bb1_orders
            .iter()
            .map(|o| (o * 1e3).round() / 1e3)
            .collect::<Vec<_>>(),
        elapsed.as_secs_f64()
    );
}

/// Criterion 8: the delta-approximate runs approach the relaxation run
/// monotonically as delta decreases.
#[test]
fn criterion_08_delta_study() {
    let base = work_dir("c08");
    let cfg = parse_config(&format!(
        "nx = 32\nnz = 17\ndt = 1e-3\nt_end = 0.5\nmode = relaxation\ngamma = 0\ndelta = 0\n\
         theta_s = 2pi/5\npreset = perturbed-flat\nic_mean = 0.9\nic_amp = 0.05\nout_dir = {}\n",
        base.display()
    ))
    .expect("valid config");
    let deltas = [1e-1, 5e-2, 2.5e-2, 1.25e-2];
    let study = run_delta_study(&cfg, &deltas).expect("study");
    let distances: Vec<f64> = study.rows.iter().map(|r| r.psi_vs_relax).collect();
    for w in distances.windows(2) {
        assert!(
            w[1] < w[0],
            "psi distance to relaxation not strictly decreasing: {distances:?}"
        );
    }
    let _ = std::fs::remove_dir_all(&base);
    println!("criterion 08 PASS - |psi_delta - psi_relax| strictly decreasing: {distances:?}");
}

/// Criterion 9: pure phases at neutral angle are fixed points in every mode,
/// and a single-fluid run under the full boundary machinery coincides with a
/// plain slip (NBC) run.
#[test]
fn criterion_09_stationary_and_single_fluid() {
    let base = work_dir("c09");
    for (mode, extra) in [
        ("dynamic", "gamma = 0.1\n"),
        ("delta_approx", "gamma = 0\ndelta = 0.05\n"),
        ("relaxation", "gamma = 0\ndelta = 0\n"),
    ] {
        let out = base.join(mode);
        let cfg = parse_config(&format!(
            "nx = 16\nnz = 9\ndt = 1e-3\nt_end = 0.1\nmode = {mode}\n{extra}theta_s = pi/2\n\
             preset = stationary\ndiag_every = 10\nout_dir = {}\n",
            out.display()
        ))
        .expect("valid config");
        let report = run_simulation(&cfg).expect("run");
        assert_eq!(report.steps, 100);
        let grid = cfg.grid().unwrap();
        let final_state = read_snapshot(&report.final_state_dir, &grid).expect("reload");
        assert!(
            final_state.phi.map(|v| v - 1.0).max_abs() <= 1e-12,
            "mode {mode}: phi drifted by {:.3e}",
            final_state.phi.map(|v| v - 1.0).max_abs()
        );
        assert!(final_state.u.max_abs() <= 1e-12);
        for w in 0..2 {
            assert!(final_state.psi[w].map(|v| v - 1.0).max_abs() <= 1e-12);
        }

        // the opposite pure phase through the coupled loop directly
        let integ = nsac::harness::Integrator::new(&grid, &cfg.params, cfg.mode, cfg.dt, 1)
            .expect("integrator");
        let minus = SimState::resting(ScalarField::constant(&grid, -1.0));
        let end = nsac::harness::advance(minus, &integ, 100).expect("run");
        assert!(
            end.phi.map(|v| v + 1.0).max_abs() <= 1e-12,
            "mode {mode}: phi = -1 drifted by {:.3e}",
            end.phi.map(|v| v + 1.0).max_abs()
        );
        assert!(end.u.max_abs() <= 1e-12);
    }

    // single-fluid equivalence: coupled run with phi = 1 vs plain NBC run
    let out = base.join("gnbc");
    let cfg = parse_config(&format!(
        "nx = 16\nnz = 33\ndt = 1e-3\nt_end = 0.1\nmode = dynamic\ngamma = 0.1\ntheta_s = pi/2\n\
         preset = perturbed-flat\nic_mean = 1\nic_amp = 0\nic_u_amp = 0.1\ndiag_every = 10\n\
         out_dir = {}\n",
        out.display()
    ))
    .expect("valid config");
    let report = run_simulation(&cfg).expect("gnbc run");
    let grid = cfg.grid().unwrap();
    let gnbc = read_snapshot(&report.final_state_dir, &grid).expect("reload");

    // NBC run: same initial velocity, no phase coupling at all
    let params = cfg.params;
    let stepper = NsStepper::new(&grid, &params, cfg.dt).unwrap();
    let lambda = slip_eigenvalue(params.eta, params.beta, 1e-12);
    let mut state = SimState::resting(ScalarField::constant(&grid, 1.0));
    state.u = VectorField::from_fn(&grid, |x, c| {
        if c == 0 {
            0.1 * (lambda * x[x.len() - 1]).cos()
        } else {
            0.0
        }
    });
    for _ in 0..100 {
        state = stepper.step(&state, AcMode::Relaxation).unwrap();
        state.phi = ScalarField::constant(&grid, 1.0);
        state.psi = [
            nsac::channel::trace(&state.phi, Wall::Bottom),
            nsac::channel::trace(&state.phi, Wall::Top),
        ];
    }
    let gap = gnbc.u.max_abs_diff(&state.u);
    assert!(gap <= 1e-12, "GNBC vs NBC velocity gap {gap:.3e}");
    let _ = std::fs::remove_dir_all(&base);
    println!("criterion 09 PASS - stationary fixed points in all modes; GNBC/NBC gap {gap:.2e}");
}

/// Criterion 10: identical configurations produce bit-identical diagnostics.
#[test]
fn criterion_10_determinism() {
    let base = work_dir("c10");
    let run = |out: PathBuf| -> Vec<u8> {
        let cfg = parse_config(&format!(
            "nx = 32\nnz = 17\ndt = 1e-3\nt_end = 0.05\nmode = dynamic\ngamma = 0.1\n\
             theta_s = 2pi/5\npreset = perturbed-flat\nic_mean = 0.9\nic_amp = 0.05\nseed = 7\n\
             out_dir = {}\n",
            out.display()
        ))
        .expect("valid config");
        let report = run_simulation(&cfg).expect("run");
        std::fs::read(&report.diagnostics_path).expect("read csv")
    };
    let a = run(base.join("a"));
    let b = run(base.join("b"));
    assert_eq!(a, b, "diagnostics files differ between identical runs");
    let _ = std::fs::remove_dir_all(&base);
    println!(
        "criterion 10 PASS - bit-identical diagnostics ({} bytes)",
        a.len()
    );
}
