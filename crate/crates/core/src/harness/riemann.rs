//! Exact solution of the 1D Riemann problem for an ideal gas.

use crate::euler::GasConstants;
use crate::{Error, Result};

/// Primitive state `(rho, u, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl Primitive {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        Primitive { rho, u, p }
    }
}

/// Solved Riemann problem, sampled along `xi = (x - x_d) / t`.
#[derive(Debug, Clone, Copy)]
pub struct RiemannSolution {
    left: Primitive,
    right: Primitive,
    gamma: f64,
    p_star: f64,
    u_star: f64,
}

const TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

fn sound_speed(s: &Primitive, g: f64) -> f64 {
    (g * s.p / s.rho).sqrt()
}

/// Pressure function of one side and its derivative.
fn wave_function(p: f64, s: &Primitive, g: f64) -> (f64, f64) {
    let c = sound_speed(s, g);
    if p > s.p {
        let a = 2.0 / ((g + 1.0) * s.rho);
        let b = (g - 1.0) / (g + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (p + b)))
    } else {
        let r = p / s.p;
        let e = (g - 1.0) / (2.0 * g);
        (2.0 * c / (g - 1.0) * (r.powf(e) - 1.0), r.powf(-(g + 1.0) / (2.0 * g)) / (s.rho * c))
    }
}

impl RiemannSolution {
    pub fn solve(left: Primitive, right: Primitive, gas: &GasConstants) -> Result<Self> {
        let g = gas.gamma();
        for s in [&left, &right] {
            if !(s.rho > 0.0 && s.p > 0.0) {
                return Err(Error::InvalidInput(format!("Riemann state {s:?} is not physical")));
            }
        }
        let (cl, cr) = (sound_speed(&left, g), sound_speed(&right, g));
        let du = right.u - left.u;
        if 2.0 * (cl + cr) / (g - 1.0) <= du {
            return Err(Error::VacuumFormation);
        }
        // primitive-variable linearization as the starting guess
        let pv = 0.5 * (left.p + right.p) - 0.125 * du * (left.rho + right.rho) * (cl + cr);
        let mut p = pv.max(TOL);
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let (fl, dl) = wave_function(p, &left, g);
            let (fr, dr) = wave_function(p, &right, g);
            let mut next = p - (fl + fr + du) / (dl + dr);
            if next <= 0.0 {
                next = 0.5 * p;
            }
            let change = 2.0 * (next - p).abs() / (next + p);
            p = next;
            if change < TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::InvalidInput("star pressure iteration did not converge".into()));
        }
        let (fl, _) = wave_function(p, &left, g);
        let (fr, _) = wave_function(p, &right, g);
        let u_star = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
        Ok(RiemannSolution {
            left,
            right,
            gamma: g,
            p_star: p,
            u_star,
        })
    }

    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    pub fn u_star(&self) -> f64 {
        self.u_star
    }

    /// Density left and right of the contact.
    pub fn star_densities(&self) -> (f64, f64) {
        (self.star_density(&self.left), self.star_density(&self.right))
    }

    fn star_density(&self, s: &Primitive) -> f64 {
        let g = self.gamma;
        let r = self.p_star / s.p;
        if r > 1.0 {
            let k = (g - 1.0) / (g + 1.0);
            s.rho * (r + k) / (r * k + 1.0)
        } else {
            s.rho * r.powf(1.0 / g)
        }
    }

    /// Speed of the left (`-1`) or right (`+1`) shock, if that wave is a shock.
    pub fn shock_speed(&self, side: i32) -> Option<f64> {
        let g = self.gamma;
        let (s, sign) = if side < 0 { (&self.left, -1.0) } else { (&self.right, 1.0) };
        (self.p_star > s.p).then(|| {
            let c = sound_speed(s, g);
            s.u + sign * c * ((g + 1.0) / (2.0 * g) * self.p_star / s.p + (g - 1.0) / (2.0 * g)).sqrt()
        })
    }

    /// Solution at similarity coordinate `xi = (x - x_d) / t`.
    pub fn sample(&self, xi: f64) -> Primitive {
        let g = self.gamma;
        let (ps, us) = (self.p_star, self.u_star);
        if xi <= us {
            let s = &self.left;
            let c = sound_speed(s, g);
            if ps > s.p {
                let speed = self.shock_speed(-1).unwrap();
                if xi <= speed {
                    *s
                } else {
                    Primitive::new(self.star_density(s), us, ps)
                }
            } else {
                let head = s.u - c;
                let c_star = c * (ps / s.p).powf((g - 1.0) / (2.0 * g));
                let tail = us - c_star;
                if xi <= head {
                    *s
                } else if xi >= tail {
                    Primitive::new(self.star_density(s), us, ps)
                } else {
                    let f = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * c) * (s.u - xi);
                    Primitive::new(
                        s.rho * f.powf(2.0 / (g - 1.0)),
                        2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * s.u + xi),
                        s.p * f.powf(2.0 * g / (g - 1.0)),
                    )
                }
            }
        } else {
            let s = &self.right;
            let c = sound_speed(s, g);
            if ps > s.p {
                let speed = self.shock_speed(1).unwrap();
                if xi >= speed {
                    *s
                } else {
                    Primitive::new(self.star_density(s), us, ps)
                }
            } else {
                let head = s.u + c;
                let c_star = c * (ps / s.p).powf((g - 1.0) / (2.0 * g));
                let tail = us + c_star;
                if xi >= head {
                    *s
                } else if xi <= tail {
                    Primitive::new(self.star_density(s), us, ps)
                } else {
                    let f = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * c) * (s.u - xi);
                    Primitive::new(
                        s.rho * f.powf(2.0 / (g - 1.0)),
                        2.0 / (g + 1.0) * (-c + 0.5 * (g - 1.0) * s.u + xi),
                        s.p * f.powf(2.0 * g / (g - 1.0)),
                    )
                }
            }
        }
    }

    /// Samples the solution at positions `xs` and time `t > 0` for a
    /// diaphragm at `x_d`.
    pub fn sample_at(&self, xs: &[f64], x_d: f64, t: f64) -> Vec<Primitive> {
        xs.iter().map(|&x| self.sample((x - x_d) / t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gas() -> GasConstants {
        GasConstants::default()
    }

    #[test]
    fn constant_data() {
        let s = Primitive::new(1.0, 0.3, 2.0);
        let r = RiemannSolution::solve(s, s, &gas()).unwrap();
        assert!((r.p_star() - 2.0).abs() < 1e-12);
        for xi in [-3.0, 0.0, 0.3, 5.0] {
            let v = r.sample(xi);
            assert!((v.rho - 1.0).abs() < 1e-12 && (v.u - 0.3).abs() < 1e-12 && (v.p - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sod_star_state() {
        // the star region satisfies both wave relations with one pressure
        let (l, r) = (Primitive::new(1.0, 0.0, 1.0), Primitive::new(0.125, 0.0, 0.1));
        let sol = RiemannSolution::solve(l, r, &gas()).unwrap();
        let (fl, _) = wave_function(sol.p_star(), &l, 1.4);
        let (fr, _) = wave_function(sol.p_star(), &r, 1.4);
        assert!((fl + fr).abs() < 1e-12);
        assert!(sol.p_star() > 0.1 && sol.p_star() < 1.0);
        assert!(sol.shock_speed(1).unwrap() > sol.u_star());
        assert!(sol.shock_speed(-1).is_none());
        let (dl, dr) = sol.star_densities();
        assert!(dl > dr && dr > 0.125);
        // Rankine-Hugoniot mass flux across the right shock
        let s = sol.shock_speed(1).unwrap();
        assert!((dr * (sol.u_star() - s) - 0.125 * (0.0 - s)).abs() < 1e-10);
    }

    #[test]
    fn colliding_flows_are_symmetric() {
        let l = Primitive::new(1.0, 1.0, 1.0);
        let r = Primitive::new(1.0, -1.0, 1.0);
        let sol = RiemannSolution::solve(l, r, &gas()).unwrap();
        assert!(sol.u_star().abs() < 1e-12);
        for xi in [0.2, 0.7, 1.3, 2.5] {
            let (a, b) = (sol.sample(-xi), sol.sample(xi));
            assert!((a.rho - b.rho).abs() < 1e-12 && (a.p - b.p).abs() < 1e-12 && (a.u + b.u).abs() < 1e-12);
        }
    }

    #[test]
    fn rarefaction_is_continuous() {
        let sol = RiemannSolution::solve(Primitive::new(1.0, 0.0, 1.0), Primitive::new(0.125, 0.0, 0.1), &gas()).unwrap();
        let c = (1.4f64).sqrt();
        let head = sol.sample(-c);
        assert!((head.rho - 1.0).abs() < 1e-12);
        let c_star = c * (sol.p_star()).powf(0.4 / 2.8);
        let tail = sol.sample(sol.u_star() - c_star + 1e-13);
        assert!((tail.rho - sol.star_densities().0).abs() < 1e-9);
    }

    #[test]
    fn vacuum_is_detected() {
        let l = Primitive::new(1.0, -20.0, 0.1);
        let r = Primitive::new(1.0, 20.0, 0.1);
        assert!(matches!(RiemannSolution::solve(l, r, &gas()), Err(Error::VacuumFormation)));
    }
}
