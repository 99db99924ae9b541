//! Feature extraction: zero-padded backward difference quotients.
//!
//! In 1D the feature of a field `f` is `[0, f2 - f1, ..., fn - f(n-1)]`; in 2D it
//! is the mixed backward difference with a zero first row and column. The zero
//! padding stands in for a ghost node equal to the boundary value.

use crate::{Error, Result};

/// Physical quantity a feature term was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Density,
    Pressure,
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureField {
    /// Row-major values, same layout as the source field.
    pub values: Vec<f64>,
    /// `(nx, ny)`; `ny == 1` for 1D features.
    pub shape: (usize, usize),
    /// Source and coefficient of every term that contributed.
    pub provenance: Vec<(Source, f64)>,
}

impl FeatureField {
    pub fn is_2d(&self) -> bool {
        self.shape.1 > 1
    }
}

fn backward_1d(field: &[f64]) -> Result<Vec<f64>> {
    if field.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "feature extraction needs at least 2 nodes, got {}",
            field.len()
        )));
    }
    let mut out = Vec::with_capacity(field.len());
    out.push(0.0);
    out.extend(field.windows(2).map(|w| w[1] - w[0]));
    Ok(out)
}

fn mixed_2d(field: &[f64], nx: usize, ny: usize) -> Result<Vec<f64>> {
    if nx < 2 || ny < 2 || field.len() != nx * ny {
        return Err(Error::InvalidInput(format!(
            "cannot take a mixed difference of {} values as a {nx}x{ny} matrix",
            field.len()
        )));
    }
    let at = |i: usize, j: usize| field[i * ny + j];
    let mut out = vec![0.0; nx * ny];
    for i in 1..nx {
        for j in 1..ny {
            out[i * ny + j] = at(i, j) - at(i - 1, j) - (at(i, j - 1) - at(i - 1, j - 1));
        }
    }
    Ok(out)
}

pub fn extract_1d(field: &[f64]) -> Result<FeatureField> {
    Ok(FeatureField {
        shape: (field.len(), 1),
        values: backward_1d(field)?,
        provenance: vec![(Source::Other, 1.0)],
    })
}

/// Mixed backward difference of an `nx × ny` row-major field.
pub fn extract_2d(field: &[f64], nx: usize, ny: usize) -> Result<FeatureField> {
    Ok(FeatureField {
        values: mixed_2d(field, nx, ny)?,
        shape: (nx, ny),
        provenance: vec![(Source::Other, 1.0)],
    })
}

/// Coefficient-weighted sum of per-field features. `shape.1 == 1` selects the
/// 1D operator.
pub fn extract_weighted(terms: &[(&[f64], Source, f64)], shape: (usize, usize)) -> Result<FeatureField> {
    if terms.is_empty() || terms.iter().all(|t| t.2 == 0.0) {
        return Err(Error::InvalidInput("at least one nonzero coefficient is required".into()));
    }
    let len = shape.0 * shape.1;
    if let Some(t) = terms.iter().find(|t| t.0.len() != len) {
        return Err(Error::InvalidInput(format!(
            "field of length {} does not match shape {shape:?}",
            t.0.len()
        )));
    }
    let mut values = vec![0.0; len];
    for &(field, _, coeff) in terms {
        let d = if shape.1 == 1 {
            backward_1d(field)?
        } else {
            mixed_2d(field, shape.0, shape.1)?
        };
        for (v, d) in values.iter_mut().zip(d) {
            *v += coeff * d;
        }
    }
    Ok(FeatureField {
        values,
        shape,
        provenance: terms.iter().map(|t| (t.1, t.2)).collect(),
    })
}

/// Density features of a state (the default alignment input).
pub fn density_features(state: &crate::euler::FlowState) -> Result<FeatureField> {
    let g = state.grid();
    let mut f = if g.dim() == 1 {
        extract_1d(state.density())?
    } else {
        extract_2d(state.density(), g.nx(), g.ny())?
    };
    f.provenance = vec![(Source::Density, 1.0)];
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_dimensional_examples() {
        assert_eq!(extract_1d(&[2.0; 4]).unwrap().values, vec![0.0; 4]);
        assert_eq!(
            extract_1d(&[1.0, 1.0, 0.125, 0.125]).unwrap().values,
            vec![0.0, 0.0, -0.875, 0.0]
        );
        assert_eq!(extract_1d(&[0.0, 1.0, 2.0, 3.0]).unwrap().values, vec![0.0, 1.0, 1.0, 1.0]);
        assert!(extract_1d(&[1.0]).is_err());
    }

    #[test]
    fn two_dimensional_examples() {
        assert_eq!(extract_2d(&[3.0; 12], 3, 4).unwrap().values, vec![0.0; 12]);

        // additively separable field
        let f: Vec<f64> = (0..5)
            .flat_map(|i| (0..4).map(move |j| (i * i) as f64 + 0.5 * j as f64))
            .collect();
        assert!(extract_2d(&f, 5, 4).unwrap().values.iter().all(|&v| v == 0.0));

        // quadrant indicator {i >= 3, j >= 3} in 1-based indexing on a 4x4 grid
        let q: Vec<f64> = (0..4)
            .flat_map(|i| (0..4).map(move |j| if i >= 2 && j >= 2 { 1.0 } else { 0.0 }))
            .collect();
        let z = extract_2d(&q, 4, 4).unwrap().values;
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (2, 2) { 1.0 } else { 0.0 };
                assert_eq!(z[i * 4 + j], expected, "({i},{j})");
            }
        }
        assert!(extract_2d(&q, 1, 16).is_err());
        assert!(extract_2d(&q, 3, 4).is_err());
    }

    #[test]
    fn weighted_combinations() {
        let f = [1.0, 4.0, 2.0, 2.5];
        let single = extract_weighted(&[(&f, Source::Density, 1.0)], (4, 1)).unwrap();
        assert_eq!(single.values, extract_1d(&f).unwrap().values);

        let p = [9.0, 1.0, 3.0, 0.0];
        let density_only =
            extract_weighted(&[(&f, Source::Density, 1.0), (&p, Source::Pressure, 0.0)], (4, 1)).unwrap();
        assert_eq!(density_only.values, single.values);
        assert_eq!(density_only.provenance, vec![(Source::Density, 1.0), (Source::Pressure, 0.0)]);

        let halves =
            extract_weighted(&[(&f, Source::Density, 0.5), (&f, Source::Density, 0.5)], (4, 1)).unwrap();
        assert_eq!(halves.values, single.values);

        assert!(extract_weighted(&[(&f, Source::Density, 0.0)], (4, 1)).is_err());
        assert!(extract_weighted(&[(&f, Source::Density, 1.0), (&p[..3], Source::Pressure, 1.0)], (4, 1)).is_err());
    }

    proptest! {
        #[test]
        fn linearity(
            f in prop::collection::vec(-4i32..4, 2..30),
            a in -3i32..3,
            b in -3i32..3,
        ) {
            // small integers keep every operation exact
            let g: Vec<f64> = f.iter().rev().map(|&v| v as f64 * 0.5).collect();
            let f: Vec<f64> = f.iter().map(|&v| v as f64).collect();
            let (a, b) = (a as f64, b as f64);
            let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
            let lhs = extract_1d(&combo).unwrap().values;
            let fz = extract_1d(&f).unwrap().values;
            let gz = extract_1d(&g).unwrap().values;
            for k in 0..lhs.len() {
                prop_assert_eq!(lhs[k], a * fz[k] + b * gz[k]);
            }
        }

        #[test]
        fn unit_step_gives_a_single_spike(n in 2usize..60, k in 1usize..59) {
            prop_assume!(k < n);
            let f: Vec<f64> = (0..n).map(|i| if i >= k { 1.0 } else { 0.0 }).collect();
            let z = extract_1d(&f).unwrap().values;
            prop_assert_eq!(z[0], 0.0);
            for (i, v) in z.iter().enumerate() {
                prop_assert_eq!(*v, if i == k { 1.0 } else { 0.0 });
            }
        }

        #[test]
        fn padding_row_and_column_are_zero(
            nx in 2usize..7, ny in 2usize..7,
            seed in prop::collection::vec(-10.0f64..10.0, 49),
        ) {
            let f = &seed[..nx * ny];
            let z = extract_2d(f, nx, ny).unwrap().values;
            for v in &z[..ny] { prop_assert_eq!(*v, 0.0); }
            for i in 0..nx { prop_assert_eq!(z[i * ny], 0.0); }
        }
    }
}
