//! Plain-text and binary writers for trajectories, tables and plot scripts.
//!
//! Floats in CSV output use 17 significant digits so that files round-trip
//! exactly and identical runs produce identical bytes.

use std::io::{self, Read, Write};

use crate::geometry::Mesh;
use crate::integrator::{Trajectory, WaveState};

const SNAPSHOT_MAGIC: &[u8; 8] = b"WZSNAP01";

/// Fixed-width scientific format with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv_row<W: Write>(out: &mut W, row: &[f64]) -> io::Result<()> {
    let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
    writeln!(out, "{}", line.join(","))
}

/// Header plus one row per entry, comma separated with LF endings.
pub fn write_csv<W: Write, R: AsRef<[f64]>>(
    mut out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = R>,
) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        write_csv_row(&mut out, r.as_ref())?;
    }
    Ok(())
}

pub const TRAJECTORY_COLUMNS: [&str; 6] = ["t", "E", "E_kin", "E_pot", "E_nl", "D_accum"];

pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> io::Result<()> {
    write_csv(
        out,
        &TRAJECTORY_COLUMNS,
        traj.samples.iter().map(|s| {
            let e = &s.energy;
            [s.t, e.total, e.kinetic, e.potential, e.nonlinear, s.dissipated]
        }),
    )
}

/// Snapshot header as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotHeader {
    pub counts: Vec<usize>,
    pub spacing: Vec<f64>,
    pub t: f64,
    pub n_dof: usize,
}

/// Binary layout (little-endian): magic `WZSNAP01`, `u32` dimension, one
/// `u64` node count and one `f64` spacing per axis, `f64` time, `u64` dof
/// count, then `u` and `v` as `f64` arrays.
pub fn write_snapshot<W: Write>(mut out: W, mesh: &Mesh, state: &WaveState) -> io::Result<()> {
    if state.n_dof() != mesh.n_dof() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "state does not match mesh"));
    }
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&(mesh.dimension() as u32).to_le_bytes())?;
    for &c in mesh.counts() {
        out.write_all(&(c as u64).to_le_bytes())?;
    }
    for &h in mesh.spacing() {
        out.write_all(&h.to_le_bytes())?;
    }
    out.write_all(&state.t.to_le_bytes())?;
    out.write_all(&(state.n_dof() as u64).to_le_bytes())?;
    for x in state.u.iter().chain(&state.v) {
        out.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut input: R) -> io::Result<(SnapshotHeader, WaveState)> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(bad("not a wavezar snapshot"));
    }
    let mut b4 = [0u8; 4];
    input.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    if !(1..=2).contains(&dim) {
        return Err(bad("unsupported dimension"));
    }
    let mut b8 = [0u8; 8];
    let mut next = |input: &mut R| -> io::Result<[u8; 8]> {
        input.read_exact(&mut b8)?;
        Ok(b8)
    };
    let counts = (0..dim).map(|_| next(&mut input).map(|b| u64::from_le_bytes(b) as usize)).collect::<io::Result<Vec<_>>>()?;
    let spacing = (0..dim).map(|_| next(&mut input).map(f64::from_le_bytes)).collect::<io::Result<Vec<_>>>()?;
    let t = f64::from_le_bytes(next(&mut input)?);
    let n_dof = u64::from_le_bytes(next(&mut input)?) as usize;
    if n_dof > counts.iter().product::<usize>() {
        return Err(bad("dof count exceeds node count"));
    }
    let mut values = (0..2 * n_dof).map(|_| next(&mut input).map(f64::from_le_bytes)).collect::<io::Result<Vec<_>>>()?;
    let v = values.split_off(n_dof);
    let header = SnapshotHeader { counts, spacing, t, n_dof };
    Ok((header, WaveState { u: values, v, t }))
}

/// Gnuplot script drawing semilog energy curves and, if given, a resolvent
/// scan. Paths are written as given, relative to the script's directory.
pub fn plot_script(energy_csvs: &[&str], resolvent_csv: Option<&str>) -> String {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n");
    if !energy_csvs.is_empty() {
        s.push_str("\nset output 'energy.png'\nset logscale y\nset xlabel 't'\nset ylabel 'E(t)'\nplot ");
        let parts: Vec<String> = energy_csvs.iter().map(|f| format!("'{f}' using 1:2 with lines title '{f}'")).collect();
        s.push_str(&parts.join(", \\\n     "));
        s.push_str("\nunset logscale y\n");
    }
    if let Some(f) = resolvent_csv {
        s.push_str(&format!(
            "\nset output 'resolvent.png'\nset logscale y\nset xlabel 'mu'\nset ylabel 'resolvent norm'\nplot '{f}' using 1:2 with linespoints title 'norm'\nunset logscale y\n"
        ));
    }
    s
}
