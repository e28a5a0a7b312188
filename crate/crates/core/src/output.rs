//! CSV emission of time series, snapshots and sweep summaries.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! value parses back to the identical `f64`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::diagnostics::DiagnosticsRecord;
use crate::grid::MassGrid;
use crate::model::{StationaryProfile, TransformedState};

pub const TIMESERIES_HEADER: &str = "t,E_kin,E_pot,D_visc_cum,D_fric_cum,Y_min,Y_max,l2_u,l3_u,l4_u,l5_u,sup_u,sup_Qux,w_l2,w_grad,sup_theta_dist,flux_residual,dt";
pub const SNAPSHOT_HEADER: &str = "x_center,c,Q,cQ,cQ_inf,u_cell_avg";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("state does not match the grid")]
    ShapeMismatch,
}

pub fn write_timeseries<W: Write>(out: &mut W, records: &[DiagnosticsRecord]) -> io::Result<()> {
    writeln!(out, "{TIMESERIES_HEADER}")?;
    for r in records {
        let row = [
            r.t,
            r.e_kin,
            r.e_pot,
            r.d_visc_cum,
            r.d_fric_cum,
            r.y_min,
            r.y_max,
            r.lp_u.l2,
            r.lp_u.l3,
            r.lp_u.l4,
            r.lp_u.l5,
            r.sup_u,
            r.sup_qux,
            r.w_l2,
            r.w_grad,
            r.sup_theta_dist,
            r.flux_residual,
            r.dt,
        ];
        write_row(out, &row)?;
    }
    Ok(())
}

pub fn write_snapshot<W: Write>(
    out: &mut W,
    state: &TransformedState,
    grid: &MassGrid,
    stationary: &StationaryProfile,
) -> io::Result<()> {
    writeln!(out, "{SNAPSHOT_HEADER}")?;
    let u_avg = grid
        .node_to_cell(&state.u)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
    for (j, (&x, &u)) in grid.centers().iter().zip(&u_avg).enumerate() {
        let row = [
            x,
            state.c[j],
            state.q[j],
            state.c[j] * state.q[j],
            stationary.cq_inf[j],
            u,
        ];
        write_row(out, &row)?;
    }
    Ok(())
}

fn write_row<W: Write>(out: &mut W, row: &[f64]) -> io::Result<()> {
    let mut first = true;
    for v in row {
        if !first {
            out.write_all(b",")?;
        }
        first = false;
        write!(out, "{v}")?;
    }
    out.write_all(b"\n")
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<(), OutputError> {
    let wrap = |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(wrap)?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    body(&mut w).and_then(|_| w.flush()).map_err(wrap)
}

pub fn emit_timeseries(path: &Path, records: &[DiagnosticsRecord]) -> Result<(), OutputError> {
    write_file(path, |w| write_timeseries(w, records))
}

pub fn emit_snapshot(
    path: &Path,
    state: &TransformedState,
    grid: &MassGrid,
    stationary: &StationaryProfile,
) -> Result<(), OutputError> {
    if !state.fits(grid) || stationary.cq_inf.len() != grid.n_cells() {
        return Err(OutputError::ShapeMismatch);
    }
    write_file(path, |w| write_snapshot(w, state, grid, stationary))
}
