//! Fifth-order WENO reconstruction (Jiang-Shu smoothness indicators).

const EPS: f64 = 1e-6;
const LINEAR: [f64; 3] = [0.1, 0.6, 0.3];

/// Reconstructs the interface value at `i + 1/2` from the upwind-biased
/// stencil `v = [f(i-2), f(i-1), f(i), f(i+1), f(i+2)]`.
///
/// The downwind flux uses the same routine with the stencil mirrored about the
/// interface.
#[inline]
pub(super) fn reconstruct(v: [f64; 5]) -> f64 {
    let [v0, v1, v2, v3, v4] = v;

    let q0 = (2.0 * v0 - 7.0 * v1 + 11.0 * v2) / 6.0;
    let q1 = (-v1 + 5.0 * v2 + 2.0 * v3) / 6.0;
    let q2 = (2.0 * v2 + 5.0 * v3 - v4) / 6.0;

    let b0 = 13.0 / 12.0 * (v0 - 2.0 * v1 + v2).powi(2) + 0.25 * (v0 - 4.0 * v1 + 3.0 * v2).powi(2);
    let b1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3).powi(2) + 0.25 * (v1 - v3).powi(2);
    let b2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4).powi(2) + 0.25 * (3.0 * v2 - 4.0 * v3 + v4).powi(2);

    let a0 = LINEAR[0] / (EPS + b0).powi(2);
    let a1 = LINEAR[1] / (EPS + b1).powi(2);
    let a2 = LINEAR[2] / (EPS + b2).powi(2);
    (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)
}
