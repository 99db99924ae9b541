//! Aligned convex combination of fields and flow states.
//!
//! Every matched pair `(i, î)` of an alignment path becomes an interpolation
//! knot at abscissa `α i + (1 - α) î` carrying the value `α f_i + (1 - α) g_î`.
//! The output is the knot interpolant sampled at the integer grid indices.
//! With nearest-neighbour sampling a discontinuity present in both inputs moves
//! to the blended position instead of splitting into a two-level staircase.
//!
//! Knots with a repeated abscissa keep the first occurrence along the path, and
//! a query exactly midway between two knots takes the left knot.

use crate::dtw::{self, AlignmentPath, AlignmentPath2D};
use crate::euler::FlowState;
use crate::features::density_features;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MixingCoefficient(f64);

impl MixingCoefficient {
    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(MixingCoefficient(alpha))
        } else {
            Err(Error::InvalidInput(format!("mixing coefficient {alpha} is outside [0, 1]")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Nearest,
    /// Piecewise linear between knots; for comparison runs only.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignOptions {
    /// Exponent of the alignment cost.
    pub q: f64,
    pub interpolation: Interpolation,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            q: dtw::DEFAULT_EXPONENT,
            interpolation: Interpolation::Nearest,
        }
    }
}

/// Alignment of two states on a 1D or 2D grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Alignment {
    Line(AlignmentPath),
    Plane(AlignmentPath2D),
}

impl Alignment {
    pub fn is_identity(&self) -> bool {
        match self {
            Alignment::Line(p) => p.is_identity(),
            Alignment::Plane(p) => p.rows.is_identity() && p.columns.is_identity(),
        }
    }
}

/// `α f + (1 - α) g`, exact at the endpoints and for equal operands, and never
/// outside `[min(f, g), max(f, g)]`.
#[inline]
pub fn lerp(alpha: f64, f: f64, g: f64) -> f64 {
    if alpha == 1.0 || f == g {
        f
    } else if alpha == 0.0 {
        g
    } else {
        (alpha * f + (1.0 - alpha) * g).clamp(f.min(g), f.max(g))
    }
}

/// Blended knot abscissae of one axis, deduplicated. Each entry is the
/// abscissa together with the index of the path pair that produced it.
fn axis_knots(path: &AlignmentPath, alpha: f64) -> Vec<(f64, usize)> {
    let mut knots: Vec<(f64, usize)> = Vec::with_capacity(path.len());
    for (k, &(i, j)) in path.pairs().iter().enumerate() {
        let x = lerp(alpha, i as f64, j as f64);
        match knots.last() {
            Some(&(last, _)) if last == x => {}
            _ => knots.push((x, k)),
        }
    }
    knots
}

/// For every integer query `0..n`, the bracketing knot indices and the linear
/// weight of the right one; nearest sampling uses weight 0 or 1.
fn sample_plan(knots: &[(f64, usize)], n: usize, interpolation: Interpolation) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    for q in 0..n {
        let q = q as f64;
        while k + 1 < knots.len() && knots[k + 1].0 <= q {
            k += 1;
        }
        if k + 1 == knots.len() || knots[k].0 >= q {
            out.push((k, k, 0.0));
            continue;
        }
        let (left, right) = (knots[k].0, knots[k + 1].0);
        match interpolation {
            Interpolation::Nearest => {
                let pick = if right - q < q - left { k + 1 } else { k };
                out.push((pick, pick, 0.0));
            }
            Interpolation::Linear => out.push((k, k + 1, (q - left) / (right - left))),
        }
    }
    out
}

fn check_alpha(alpha: f64) -> Result<()> {
    MixingCoefficient::new(alpha).map(|_| ())
}

/// Aligned combination of two length-`n` fields along `path`.
pub fn aligned_add_field_1d(
    f: &[f64],
    g: &[f64],
    alpha: f64,
    path: &AlignmentPath,
    interpolation: Interpolation,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let n = f.len();
    if g.len() != n {
        return Err(Error::InvalidInput(format!("fields of length {n} and {}", g.len())));
    }
    if !dtw::validate_path(path.pairs(), n, n) {
        return Err(Error::InvalidPath(format!("path does not align two fields of length {n}")));
    }
    let knots = axis_knots(path, alpha);
    let value = |k: usize| {
        let (i, j) = path.pairs()[knots[k].1];
        lerp(alpha, f[i], g[j])
    };
    Ok(sample_plan(&knots, n, interpolation)
        .into_iter()
        .map(|(a, b, w)| if w == 0.0 { value(a) } else { lerp(1.0 - w, value(a), value(b)) })
        .collect())
}

/// Aligned combination of two row-major `nx × ny` fields along a separable
/// 2D alignment.
pub fn aligned_add_field_2d(
    f: &[f64],
    g: &[f64],
    (nx, ny): (usize, usize),
    alpha: f64,
    path: &AlignmentPath2D,
    interpolation: Interpolation,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if f.len() != nx * ny || g.len() != nx * ny {
        return Err(Error::InvalidInput(format!(
            "fields of length {} and {} do not have shape {nx}x{ny}",
            f.len(),
            g.len()
        )));
    }
    if !dtw::validate_path(path.rows.pairs(), nx, nx) || !dtw::validate_path(path.columns.pairs(), ny, ny) {
        return Err(Error::InvalidPath(format!("paths do not fit a {nx}x{ny} field")));
    }
    let row_knots = axis_knots(&path.rows, alpha);
    let col_knots = axis_knots(&path.columns, alpha);
    let rows = sample_plan(&row_knots, nx, interpolation);
    let cols = sample_plan(&col_knots, ny, interpolation);

    let value = |r: usize, c: usize| {
        let (i, ih) = path.rows.pairs()[row_knots[r].1];
        let (j, jh) = path.columns.pairs()[col_knots[c].1];
        lerp(alpha, f[i * ny + j], g[ih * ny + jh])
    };
    let mut out = Vec::with_capacity(nx * ny);
    for &(r0, r1, wr) in &rows {
        for &(c0, c1, wc) in &cols {
            let v = if wr == 0.0 && wc == 0.0 {
                value(r0, c0)
            } else {
                let lo = lerp(1.0 - wc, value(r0, c0), value(r0, c1));
                let hi = lerp(1.0 - wc, value(r1, c0), value(r1, c1));
                lerp(1.0 - wr, lo, hi)
            };
            out.push(v);
        }
    }
    Ok(out)
}

/// Applies one alignment to every conserved field of two states.
pub fn aligned_add_state(
    x: &FlowState,
    xh: &FlowState,
    alpha: f64,
    alignment: &Alignment,
    interpolation: Interpolation,
) -> Result<FlowState> {
    if x.time() != xh.time() {
        return Err(Error::TimeMismatch(x.time(), xh.time()));
    }
    if x.grid() != xh.grid() {
        return Err(Error::InvalidInput("states live on different grids".into()));
    }
    let grid = x.grid();
    let fields = x
        .fields()
        .iter()
        .zip(xh.fields())
        .map(|(f, g)| match alignment {
            Alignment::Line(p) if grid.dim() == 1 => aligned_add_field_1d(f, g, alpha, p, interpolation),
            Alignment::Plane(p) if grid.dim() == 2 => {
                aligned_add_field_2d(f, g, (grid.nx(), grid.ny()), alpha, p, interpolation)
            }
            _ => Err(Error::InvalidPath("alignment dimension does not match the grid".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    FlowState::from_conserved(*grid, fields, x.time())
}

/// Optimal alignment of two states computed from their density features.
pub fn align_states(x: &FlowState, xh: &FlowState, q: f64) -> Result<Alignment> {
    let a = density_features(x)?;
    let b = density_features(xh)?;
    if x.grid() != xh.grid() {
        return Err(Error::InvalidInput("states live on different grids".into()));
    }
    if x.grid().dim() == 1 {
        Ok(Alignment::Line(dtw::dtw_1d(&a.values, &b.values, q)?))
    } else {
        let g = x.grid();
        Ok(Alignment::Plane(dtw::dtw_2d(&a.values, &b.values, g.nx(), g.ny(), q)?))
    }
}

/// Feature-aligned convex combination of two states: density features, optimal
/// path, then the aligned combination of all conserved fields.
pub fn aligned_pair_combine(x: &FlowState, xh: &FlowState, alpha: f64, opts: &AlignOptions) -> Result<FlowState> {
    check_alpha(alpha)?;
    if x.time() != xh.time() {
        return Err(Error::TimeMismatch(x.time(), xh.time()));
    }
    let alignment = align_states(x, xh, opts.q)?;
    aligned_add_state(x, xh, alpha, &alignment, opts.interpolation)
}

/// Plain pointwise convex combination of all conserved fields.
pub fn plain_combine(x: &FlowState, xh: &FlowState, alpha: f64) -> Result<FlowState> {
    check_alpha(alpha)?;
    if x.time() != xh.time() {
        return Err(Error::TimeMismatch(x.time(), xh.time()));
    }
    let fields = x
        .fields()
        .iter()
        .zip(xh.fields())
        .map(|(f, g)| f.iter().zip(g).map(|(&a, &b)| lerp(alpha, a, b)).collect())
        .collect();
    FlowState::from_conserved(*x.grid(), fields, x.time())
}
