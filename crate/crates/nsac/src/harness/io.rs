//! File output: legacy VTK ASCII STRUCTURED_POINTS snapshots (one file per
//! field, double precision at 17 significant digits, reloadable as initial
//! conditions) and the diagnostics CSV time series.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::channel::{ChannelGrid, ScalarField, SurfaceField, VectorField, Wall};
use crate::navier_stokes::SimState;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed {what} (line {line})")]
    Malformed {
        path: String,
        what: &'static str,
        line: usize,
    },
    #[error("{path}: snapshot grid {got} does not match configured grid {expected}")]
    GridMismatch {
        path: String,
        got: String,
        expected: String,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn vtk_header(grid: &ChannelGrid, name: &str, t: f64, wall: Option<Wall>) -> String {
    let np = grid.n_periodic();
    let (nx, ny) = (np[0], if grid.dim() == 3 { np[1] } else { 1 });
    let nz = if wall.is_some() { 1 } else { grid.n_wall() };
    let dx = grid.dp(0);
    let dy = if grid.dim() == 3 { grid.dp(1) } else { 1.0 };
    let origin_z = match wall {
        Some(Wall::Top) => 1.0,
        _ => -1.0,
    };
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str(&format!("{name} t = {}\n", fmt17(t)));
    s.push_str("ASCII\n");
    s.push_str("DATASET STRUCTURED_POINTS\n");
    s.push_str(&format!("DIMENSIONS {nx} {ny} {nz}\n"));
    s.push_str(&format!("ORIGIN 0 0 {origin_z}\n"));
    s.push_str(&format!(
        "SPACING {} {} {}\n",
        fmt17(dx),
        fmt17(dy),
        fmt17(grid.dz())
    ));
    s.push_str(&format!("POINT_DATA {}\n", nx * ny * nz));
    s
}

/// VTK point order: x fastest, then y, then z.
fn vtk_node_order(grid: &ChannelGrid, wall: Option<Wall>) -> Vec<(usize, usize)> {
    let np = grid.n_periodic();
    let (nx, ny) = (np[0], if grid.dim() == 3 { np[1] } else { 1 });
    let mut order = Vec::new();
    let zs: Vec<usize> = match wall {
        Some(w) => vec![grid.wall_iz(w)],
        None => (0..grid.n_wall()).collect(),
    };
    for &iz in &zs {
        for iy in 0..ny {
            for ix in 0..nx {
                let ip = if grid.dim() == 3 { ix * ny + iy } else { ix };
                order.push((ip, iz));
            }
        }
    }
    order
}

fn write_scalar_vtk(field: &ScalarField, name: &str, t: f64, path: &Path) -> Result<(), IoError> {
    let grid = field.grid();
    let mut s = vtk_header(grid, name, t, None);
    s.push_str(&format!("SCALARS {name} double 1\n"));
    s.push_str("LOOKUP_TABLE default\n");
    for (ip, iz) in vtk_node_order(grid, None) {
        s.push_str(&fmt17(field.at(ip, iz)));
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| io_err(path, e))
}

fn write_vector_vtk(field: &VectorField, name: &str, t: f64, path: &Path) -> Result<(), IoError> {
    let grid = field.grid();
    let mut s = vtk_header(grid, name, t, None);
    s.push_str(&format!("VECTORS {name} double\n"));
    for (ip, iz) in vtk_node_order(grid, None) {
        // vectors are always written with three components; 2D fields map to
        // (u_x, 0, u_z)
        let (vx, vy, vz) = if grid.dim() == 3 {
            (
                field.component(0).at(ip, iz),
                field.component(1).at(ip, iz),
                field.component(2).at(ip, iz),
            )
        } else {
            (
                field.component(0).at(ip, iz),
                0.0,
                field.component(1).at(ip, iz),
            )
        };
        s.push_str(&format!("{} {} {}\n", fmt17(vx), fmt17(vy), fmt17(vz)));
    }
    fs::write(path, s).map_err(|e| io_err(path, e))
}

fn write_surface_vtk(field: &SurfaceField, name: &str, t: f64, path: &Path) -> Result<(), IoError> {
    let grid = field.grid();
    let mut s = vtk_header(grid, name, t, Some(field.wall()));
    s.push_str(&format!("SCALARS {name} double 1\n"));
    s.push_str("LOOKUP_TABLE default\n");
    for (ip, _) in vtk_node_order(grid, Some(field.wall())) {
        s.push_str(&fmt17(field.values()[ip]));
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| io_err(path, e))
}

/// Writes a full state snapshot into `dir` (one VTK file per field).
pub fn write_snapshot(state: &SimState, dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_scalar_vtk(&state.phi, "phi", state.t, &dir.join("phi.vtk"))?;
    write_scalar_vtk(&state.p, "p", state.t, &dir.join("p.vtk"))?;
    write_vector_vtk(&state.u, "u", state.t, &dir.join("u.vtk"))?;
    write_surface_vtk(
        &state.psi[0],
        "psi_bottom",
        state.t,
        &dir.join("psi_bottom.vtk"),
    )?;
    write_surface_vtk(&state.psi[1], "psi_top", state.t, &dir.join("psi_top.vtk"))?;
    Ok(())
}

struct VtkFile {
    t: f64,
    dims: [usize; 3],
    data: Vec<f64>,
    vector: bool,
}

fn read_vtk(path: &Path) -> Result<VtkFile, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let p = path.display().to_string();
    let malformed = |what, line| IoError::Malformed {
        path: p.clone(),
        what,
        line,
    };
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() < 8 {
        return Err(malformed("vtk header", lines.len()));
    }
    let t = lines[1]
        .rsplit(" = ")
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| malformed("title time", 2))?;
    let dims: Vec<usize> = lines[4]
        .strip_prefix("DIMENSIONS ")
        .ok_or_else(|| malformed("DIMENSIONS", 5))?
        .split_whitespace()
        .map(|s| s.parse().unwrap_or(0))
        .collect();
    if dims.len() != 3 {
        return Err(malformed("DIMENSIONS", 5));
    }
    let vector = lines[8].starts_with("VECTORS");
    let data_start = if vector { 9 } else { 10 };
    let mut data = Vec::new();
    for (off, l) in lines[data_start..].iter().enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        for tok in l.split_whitespace() {
            data.push(
                tok.parse()
                    .map_err(|_| malformed("data", data_start + off + 1))?,
            );
        }
    }
    Ok(VtkFile {
        t,
        dims: [dims[0], dims[1], dims[2]],
        data,
        vector,
    })
}

fn check_dims(
    f: &VtkFile,
    grid: &ChannelGrid,
    wall: Option<Wall>,
    path: &Path,
) -> Result<(), IoError> {
    let np = grid.n_periodic();
    let expected = [
        np[0],
        if grid.dim() == 3 { np[1] } else { 1 },
        if wall.is_some() { 1 } else { grid.n_wall() },
    ];
    if f.dims != expected {
        return Err(IoError::GridMismatch {
            path: path.display().to_string(),
            got: format!("{:?}", f.dims),
            expected: format!("{expected:?}"),
        });
    }
    Ok(())
}

/// Reads back a snapshot written by [`write_snapshot`] onto `grid`.
pub fn read_snapshot(dir: &Path, grid: &Arc<ChannelGrid>) -> Result<SimState, IoError> {
    let read_scalar = |name: &str| -> Result<(ScalarField, f64), IoError> {
        let path = dir.join(name);
        let f = read_vtk(&path)?;
        check_dims(&f, grid, None, &path)?;
        let mut field = ScalarField::zeros(grid);
        for (i, (ip, iz)) in vtk_node_order(grid, None).into_iter().enumerate() {
            field.values_mut()[grid.node(ip, iz)] = f.data[i];
        }
        Ok((field, f.t))
    };
    let (phi, t) = read_scalar("phi.vtk")?;
    let (p, _) = read_scalar("p.vtk")?;

    let upath = dir.join("u.vtk");
    let uf = read_vtk(&upath)?;
    check_dims(&uf, grid, None, &upath)?;
    if !uf.vector {
        return Err(IoError::Malformed {
            path: upath.display().to_string(),
            what: "expected VECTORS data",
            line: 9,
        });
    }
    let mut u = VectorField::zeros(grid);
    for (i, (ip, iz)) in vtk_node_order(grid, None).into_iter().enumerate() {
        let node = grid.node(ip, iz);
        if grid.dim() == 3 {
            for c in 0..3 {
                u.component_mut(c).values_mut()[node] = uf.data[3 * i + c];
            }
        } else {
            u.component_mut(0).values_mut()[node] = uf.data[3 * i];
            u.component_mut(1).values_mut()[node] = uf.data[3 * i + 2];
        }
    }

    let mut psi = [
        SurfaceField::zeros(grid, Wall::Bottom),
        SurfaceField::zeros(grid, Wall::Top),
    ];
    for (wall, name) in [(Wall::Bottom, "psi_bottom.vtk"), (Wall::Top, "psi_top.vtk")] {
        let path = dir.join(name);
        let f = read_vtk(&path)?;
        check_dims(&f, grid, Some(wall), &path)?;
        for (i, (ip, _)) in vtk_node_order(grid, Some(wall)).into_iter().enumerate() {
            psi[wall.index()].values_mut()[ip] = f.data[i];
        }
    }

    Ok(SimState { u, p, phi, psi, t })
}

/// One diagnostics row of the run time series.
#[derive(Debug, Clone, Copy)]
pub struct DiagRow {
    pub t: f64,
    pub e_kin: f64,
    pub e_bulk: f64,
    pub e_surf: f64,
    pub e_total: f64,
    pub d_visc: f64,
    pub d_chem: f64,
    pub d_slip: f64,
    pub d_wall: f64,
    pub mass: f64,
    pub residual: f64,
    pub max_abs_phi: f64,
}

pub const CSV_HEADER: &str =
    "t,e_kin,e_bulk,e_surf,e_total,d_visc,d_chem,d_slip,d_wall,mass,residual,max_abs_phi";

/// Writes the diagnostics series as CSV: '.' decimal, ',' separator, LF line
/// endings, 17 significant digits.
pub fn write_timeseries(rows: &[DiagRow], path: &Path) -> Result<(), IoError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
    }
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let cols = [
            r.t,
            r.e_kin,
            r.e_bulk,
            r.e_surf,
            r.e_total,
            r.d_visc,
            r.d_chem,
            r.d_slip,
            r.d_wall,
            r.mass,
            r.residual,
            r.max_abs_phi,
        ];
        let line: Vec<String> = cols.iter().map(|&v| fmt17(v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    f.write_all(s.as_bytes()).map_err(|e| io_err(path, e))
}

/// Parses a CSV written by [`write_timeseries`]; values round-trip exactly.
pub fn read_timeseries(path: &Path) -> Result<Vec<Vec<f64>>, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != CSV_HEADER {
                return Err(IoError::Malformed {
                    path: path.display().to_string(),
                    what: "csv header",
                    line: 1,
                });
            }
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|t| t.parse()).collect();
        rows.push(row.map_err(|_| IoError::Malformed {
            path: path.display().to_string(),
            what: "csv row",
            line: i + 1,
        })?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_grid;
    use std::f64::consts::PI;

    #[test]
    fn snapshot_round_trip_is_exact() {
        let dir = std::env::temp_dir().join("nsac_io_test_snapshot");
        let g = build_grid(2, &[8], 5, &[2.0 * PI]).unwrap();
        let phi = ScalarField::from_fn(&g, |x| 0.3 * x[0].sin() + x[1] / 3.0);
        let mut state = SimState::resting(phi);
        state.t = 0.625;
        *state.u.component_mut(0) = ScalarField::from_fn(&g, |x| (1.1 * x[1]).cos());
        write_snapshot(&state, &dir).unwrap();
        let loaded = read_snapshot(&dir, &g).unwrap();
        assert_eq!(loaded.t, state.t);
        assert!(loaded.phi.max_abs_diff(&state.phi) == 0.0);
        assert!(loaded.u.max_abs_diff(&state.u) == 0.0);
        assert!(loaded.psi[0].max_abs_diff(&state.psi[0]) == 0.0);
        assert!(loaded.psi[1].max_abs_diff(&state.psi[1]) == 0.0);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn snapshot_of_constant_field_is_all_ones() {
        let dir = std::env::temp_dir().join("nsac_io_test_ones");
        let g = build_grid(2, &[8], 5, &[2.0 * PI]).unwrap();
        let state = SimState::resting(ScalarField::constant(&g, 1.0));
        write_snapshot(&state, &dir).unwrap();
        let text = fs::read_to_string(dir.join("phi.vtk")).unwrap();
        let data_lines: Vec<&str> = text.lines().skip(10).collect();
        assert_eq!(data_lines.len(), g.n_total());
        for l in data_lines {
            assert_eq!(l.parse::<f64>().unwrap(), 1.0);
        }
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn snapshot_round_trip_3d() {
        let dir = std::env::temp_dir().join("nsac_io_test_snapshot3d");
        let g = build_grid(3, &[8, 16], 5, &[2.0 * PI, PI]).unwrap();
        let phi = ScalarField::from_fn(&g, |x| {
            x[0].sin() + (2.0 * x[1]).cos() * x[2] + 0.1 * x[2] * x[2]
        });
        let mut state = SimState::resting(phi);
        state.t = 1.5;
        *state.u.component_mut(1) = ScalarField::from_fn(&g, |x| 0.2 * (x[0] + x[1]).cos());
        write_snapshot(&state, &dir).unwrap();
        let loaded = read_snapshot(&dir, &g).unwrap();
        assert_eq!(loaded.t, state.t);
        assert!(loaded.phi.max_abs_diff(&state.phi) == 0.0);
        assert!(loaded.u.max_abs_diff(&state.u) == 0.0);
        assert!(loaded.psi[1].max_abs_diff(&state.psi[1]) == 0.0);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let path = std::env::temp_dir().join("nsac_io_test_series.csv");
        let rows = vec![
            DiagRow {
                t: 0.1,
                e_kin: 1.0 / 3.0,
                e_bulk: 2.0_f64.sqrt(),
                e_surf: -0.25,
                e_total: 1.5,
                d_visc: 1e-17,
                d_chem: PI,
                d_slip: 0.0,
                d_wall: 7.25e3,
                mass: -2.0 / 7.0,
                residual: 3.3e-12,
                max_abs_phi: 1.02,
            };
            3
        ];
        write_timeseries(&rows, &path).unwrap();
        let parsed = read_timeseries(&path).unwrap();
        assert_eq!(parsed.len(), 3);
        assert_eq!(parsed[0][1], 1.0 / 3.0);
        assert_eq!(parsed[0][2], 2.0_f64.sqrt());
        assert_eq!(parsed[1][5], 1e-17);
        let _ = fs::remove_file(&path);
    }
}
