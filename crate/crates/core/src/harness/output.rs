//! CSV and PPM writers.
//!
//! Every float is written in scientific notation with 17 significant digits,
//! which round-trips `f64` exactly. File layouts:
//!
//! - snapshot: one row per node, `x,rho,u,E,p,s` (1D) or `x,y,rho,u,v,E,p,s` (2D)
//! - space-time matrix: `t,n0,n1,...`, one row per observation time
//! - error series: `step,t,relative_avg_error,alignments`
//! - weight history: `step,t,w0,w1,...`
//! - feature counts: `step,t,p0,p1,...` (density features per particle)
//! - observations: `step,t,y0,...,e0,...` (observed values then noise)
//! - heatmap: binary PPM (`P6`), grey levels scaled between the field's
//!   minimum and maximum

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::euler::{entropy, pressure, FlowState, GasConstants};
use crate::Result;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt_f64).collect::<Vec<_>>().join(",")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_snapshot(path: &Path, state: &FlowState, gas: &GasConstants) -> Result<()> {
    let mut w = create(path)?;
    let g = state.grid();
    let p = pressure(state, gas)?;
    let s = entropy(state, gas)?;
    let vel: Vec<Vec<f64>> = (0..g.dim()).map(|a| state.velocity(a)).collect();
    if g.dim() == 1 {
        writeln!(w, "x,rho,u,E,p,s")?;
    } else {
        writeln!(w, "x,y,rho,u,v,E,p,s")?;
    }
    for i in 0..g.nx() {
        for j in 0..g.ny() {
            let k = g.index(i, j);
            let mut row = vec![g.x(i)];
            if g.dim() == 2 {
                row.push(g.y(j));
            }
            row.push(state.density()[k]);
            row.extend(vel.iter().map(|v| v[k]));
            row.extend([state.energy()[k], p[k], s[k]]);
            writeln!(w, "{}", join(row))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows of `(step, t, values)` under the header `step,t,<prefix>0,...`.
pub fn write_series(path: &Path, prefix: &str, rows: &[(usize, f64, Vec<f64>)]) -> Result<()> {
    let mut w = create(path)?;
    let width = rows.first().map_or(0, |r| r.2.len());
    let names: Vec<String> = (0..width).map(|k| format!("{prefix}{k}")).collect();
    writeln!(w, "step,t,{}", names.join(","))?;
    for (step, t, values) in rows {
        writeln!(w, "{step},{},{}", fmt_f64(*t), join(values.iter().copied()))?;
    }
    w.flush()?;
    Ok(())
}

/// Space-time matrix: one row per time, one column per node.
pub fn write_space_time(path: &Path, times: &[f64], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = create(path)?;
    let width = rows.first().map_or(0, Vec::len);
    let names: Vec<String> = (0..width).map(|k| format!("n{k}")).collect();
    writeln!(w, "t,{}", names.join(","))?;
    for (t, row) in times.iter().zip(rows) {
        writeln!(w, "{},{}", fmt_f64(*t), join(row.iter().copied()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_errors(path: &Path, times: &[f64], errors: &[f64], alignments: &[usize]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "step,t,relative_avg_error,alignments")?;
    for (k, ((t, e), a)) in times.iter().zip(errors).zip(alignments).enumerate() {
        writeln!(w, "{},{},{},{a}", k + 1, fmt_f64(*t), fmt_f64(*e))?;
    }
    w.flush()?;
    Ok(())
}

/// Grey-scale heatmap of a row-major `nx × ny` field; x runs down the rows.
pub fn write_ppm(path: &Path, field: &[f64], nx: usize, ny: usize) -> Result<()> {
    let mut w = create(path)?;
    let lo = field.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = field.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    write!(w, "P6\n{ny} {nx}\n255\n")?;
    let mut bytes = Vec::with_capacity(3 * field.len());
    for &v in field {
        let level = (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8;
        bytes.extend([level; 3]);
    }
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}
