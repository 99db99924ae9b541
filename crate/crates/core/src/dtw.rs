//! Dynamic time warping.
//!
//! Paths are lists of 0-based index pairs `(i, j)` matching element `i` of the
//! first sequence with element `j` of the second. A valid path starts at
//! `(0, 0)`, ends at `(n - 1, m - 1)` and advances each index by 0 or 1 per step
//! (never both by 0).
//!
//! The dynamic program minimizes the sum of `|a_i - b_j|^q` along the path and
//! takes the `q`-th root once at the end. Ties between predecessors are broken
//! diagonal first, then the move advancing the first sequence, then the second,
//! so identical inputs always give the same path. Only two rows of the cost
//! table are kept; the backtracking pointers are packed at two bits per cell.

use crate::{Error, Result};

pub const DEFAULT_EXPONENT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentPath {
    pairs: Vec<(usize, usize)>,
    distance: f64,
    q: f64,
}

impl AlignmentPath {
    /// Wraps a path, checking it against sequence lengths `(n, m)`. The
    /// distance is left at NaN until one is computed for it.
    pub fn new(pairs: Vec<(usize, usize)>, n: usize, m: usize, q: f64) -> Result<Self> {
        if !validate_path(&pairs, n, m) {
            return Err(Error::InvalidPath(format!("path is not a valid alignment of lengths ({n}, {m})")));
        }
        Ok(AlignmentPath {
            pairs,
            distance: f64::NAN,
            q,
        })
    }

    pub fn identity(n: usize) -> Self {
        AlignmentPath {
            pairs: (0..n).map(|k| (k, k)).collect(),
            distance: 0.0,
            q: DEFAULT_EXPONENT,
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.iter().enumerate().all(|(k, &(i, j))| i == k && j == k)
    }

    /// Lengths `(n, m)` of the aligned sequences.
    pub fn extent(&self) -> (usize, usize) {
        self.pairs.last().map_or((0, 0), |&(i, j)| (i + 1, j + 1))
    }

    /// The same alignment seen from the second sequence.
    pub fn mirrored(&self) -> Self {
        AlignmentPath {
            pairs: self.pairs.iter().map(|&(i, j)| (j, i)).collect(),
            distance: self.distance,
            q: self.q,
        }
    }
}

/// Column path and row path of a separable 2D alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentPath2D {
    /// Aligns column indices (the y axis).
    pub columns: AlignmentPath,
    /// Aligns row indices (the x axis).
    pub rows: AlignmentPath,
}

impl AlignmentPath2D {
    pub fn identity(nx: usize, ny: usize) -> Self {
        AlignmentPath2D {
            columns: AlignmentPath::identity(ny),
            rows: AlignmentPath::identity(nx),
        }
    }
}

/// Checks the endpoint, step and length rules for sequences of lengths `(n, m)`.
pub fn validate_path(pairs: &[(usize, usize)], n: usize, m: usize) -> bool {
    if n == 0 || m == 0 || pairs.first() != Some(&(0, 0)) || pairs.last() != Some(&(n - 1, m - 1)) {
        return false;
    }
    let steps_ok = pairs.windows(2).all(|w| {
        let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
        di <= 1 && dj <= 1 && di + dj > 0
    });
    steps_ok && pairs.len() >= n.max(m) && pairs.len() < n + m
}

#[inline]
fn powered(d: f64, q: f64) -> f64 {
    if q == 2.0 {
        d * d
    } else if q == 1.0 {
        d.abs()
    } else {
        d.abs().powf(q)
    }
}

#[inline]
fn root(total: f64, q: f64) -> f64 {
    if q == 2.0 {
        total.sqrt()
    } else if q == 1.0 {
        total
    } else {
        total.powf(1.0 / q)
    }
}

/// Aligned q-norm distance of scalar sequences along a given path.
pub fn aligned_distance(a: &[f64], b: &[f64], pairs: &[(usize, usize)], q: f64) -> Result<f64> {
    if !validate_path(pairs, a.len(), b.len()) {
        return Err(Error::InvalidPath("path does not fit the sequences".into()));
    }
    let total: f64 = pairs.iter().map(|&(i, j)| powered(a[i] - b[j], q)).sum();
    Ok(root(total, q))
}

/// Aligned distance of vector-valued sequences (Euclidean norm per element).
pub fn aligned_distance_vectors(a: &[&[f64]], b: &[&[f64]], pairs: &[(usize, usize)], q: f64) -> Result<f64> {
    if !validate_path(pairs, a.len(), b.len()) {
        return Err(Error::InvalidPath("path does not fit the sequences".into()));
    }
    let total: f64 = pairs.iter().map(|&(i, j)| vector_cost(a[i], b[j], q)).sum();
    Ok(root(total, q))
}

fn vector_cost(x: &[f64], y: &[f64], q: f64) -> f64 {
    let ss: f64 = x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum();
    if q == 2.0 {
        ss
    } else {
        ss.sqrt().powf(q)
    }
}

const DIAG: u8 = 0;
const UP: u8 = 1;
const LEFT: u8 = 2;

struct Pointers {
    bits: Vec<u8>,
    m: usize,
}

impl Pointers {
    fn new(n: usize, m: usize) -> Self {
        Pointers {
            bits: vec![0; (n * m).div_ceil(4)],
            m,
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, code: u8) {
        let k = i * self.m + j;
        let shift = 2 * (k % 4);
        self.bits[k / 4] = (self.bits[k / 4] & !(3 << shift)) | (code << shift);
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> u8 {
        let k = i * self.m + j;
        (self.bits[k / 4] >> (2 * (k % 4))) & 3
    }
}

/// Core dynamic program over an `n × m` table of element costs (already raised
/// to the power q). Returns the optimal path and its accumulated cost.
pub fn dtw_with_cost<F>(n: usize, m: usize, cost: F) -> Result<(Vec<(usize, usize)>, f64)>
where
    F: Fn(usize, usize) -> f64,
{
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput("cannot align an empty sequence".into()));
    }
    let mut ptr = Pointers::new(n, m);
    let mut prev = vec![0.0; m];
    let mut cur = vec![0.0; m];

    prev[0] = cost(0, 0);
    for j in 1..m {
        prev[j] = prev[j - 1] + cost(0, j);
        ptr.set(0, j, LEFT);
    }
    for i in 1..n {
        cur[0] = prev[0] + cost(i, 0);
        ptr.set(i, 0, UP);
        for j in 1..m {
            let mut best = prev[j - 1];
            let mut code = DIAG;
            if prev[j] < best {
                best = prev[j];
                code = UP;
            }
            if cur[j - 1] < best {
                best = cur[j - 1];
                code = LEFT;
            }
            cur[j] = best + cost(i, j);
            ptr.set(i, j, code);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let total = prev[m - 1];

    let mut pairs = Vec::with_capacity(n + m - 1);
    let (mut i, mut j) = (n - 1, m - 1);
    pairs.push((i, j));
    while (i, j) != (0, 0) {
        match ptr.get(i, j) {
            DIAG => {
                i -= 1;
                j -= 1;
            }
            UP => i -= 1,
            _ => j -= 1,
        }
        pairs.push((i, j));
    }
    pairs.reverse();
    Ok((pairs, total))
}

/// Optimal alignment of two scalar sequences.
pub fn dtw_1d(a: &[f64], b: &[f64], q: f64) -> Result<AlignmentPath> {
    if !(q > 0.0) {
        return Err(Error::InvalidInput(format!("norm exponent must be positive, got {q}")));
    }
    let (pairs, total) = dtw_with_cost(a.len(), b.len(), |i, j| powered(a[i] - b[j], q))?;
    Ok(AlignmentPath {
        pairs,
        distance: root(total, q),
        q,
    })
}

fn align_vectors(a: &[Vec<f64>], b: &[Vec<f64>], q: f64) -> Result<AlignmentPath> {
    let n = a.len();
    let m = b.len();
    let mut table = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            table[i * m + j] = vector_cost(&a[i], &b[j], q);
        }
    }
    let (pairs, total) = dtw_with_cost(n, m, |i, j| table[i * m + j])?;
    Ok(AlignmentPath {
        pairs,
        distance: root(total, q),
        q,
    })
}

/// Separable alignment of two `nx × ny` row-major fields: columns are aligned
/// as vectors first, then rows.
pub fn dtw_2d(a: &[f64], b: &[f64], nx: usize, ny: usize, q: f64) -> Result<AlignmentPath2D> {
    if a.len() != nx * ny || b.len() != nx * ny || nx == 0 || ny == 0 {
        return Err(Error::InvalidInput(format!(
            "fields of length {} and {} do not both have shape {nx}x{ny}",
            a.len(),
            b.len()
        )));
    }
    if !(q > 0.0) {
        return Err(Error::InvalidInput(format!("norm exponent must be positive, got {q}")));
    }
    let columns_of = |f: &[f64]| -> Vec<Vec<f64>> {
        (0..ny).map(|j| (0..nx).map(|i| f[i * ny + j]).collect()).collect()
    };
    let rows_of = |f: &[f64]| -> Vec<Vec<f64>> { f.chunks(ny).map(|r| r.to_vec()).collect() };

    let columns = align_vectors(&columns_of(a), &columns_of(b), q)?;
    let rows = align_vectors(&rows_of(a), &rows_of(b), q)?;
    Ok(AlignmentPath2D { columns, rows })
}

/// Delannoy number `sum_k C(m, k) C(n, k) 2^k`.
pub fn delannoy(m: u32, n: u32) -> u128 {
    let binom = |n: u32, k: u32| -> u128 {
        (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
    };
    (0..=m.min(n))
        .map(|k| binom(m, k) * binom(n, k) * (1u128 << k))
        .sum()
}

/// Number of valid alignment paths between sequences of lengths `n` and `m`:
/// a path takes `n - 1` and `m - 1` unit moves, so this is `D(n - 1, m - 1)`.
pub fn path_count(n: u32, m: u32) -> u128 {
    delannoy(n.saturating_sub(1), m.saturating_sub(1))
}
