//! Inviscid Burgers via finite differences in conservation form:
//! WENO5-JS reconstruction, global Lax-Friedrichs flux splitting and
//! three-stage TVD Runge-Kutta time stepping.

use super::Stepper;
use crate::error::{invalid_arg, Error, Result};
use crate::grid::{Domain, GridSet, NodalState};

const WENO_EPS: f64 = 1e-6;
const LINEAR_WEIGHTS: [f64; 3] = [0.1, 0.6, 0.3];
const CFL: f64 = 0.4;
const CFL_LIMIT: f64 = 0.5;

/// Left-biased WENO5-JS reconstruction of the i+1/2 face value from the
/// five cell values f_{i-2}..f_{i+2}.
fn weno5_face(fm2: f64, fm1: f64, f0: f64, fp1: f64, fp2: f64) -> f64 {
    let p0 = (2.0 * fm2 - 7.0 * fm1 + 11.0 * f0) / 6.0;
    let p1 = (-fm1 + 5.0 * f0 + 2.0 * fp1) / 6.0;
    let p2 = (2.0 * f0 + 5.0 * fp1 - fp2) / 6.0;

    let b0 = 13.0 / 12.0 * (fm2 - 2.0 * fm1 + f0).powi(2)
        + 0.25 * (fm2 - 4.0 * fm1 + 3.0 * f0).powi(2);
    let b1 = 13.0 / 12.0 * (fm1 - 2.0 * f0 + fp1).powi(2) + 0.25 * (fm1 - fp1).powi(2);
    let b2 = 13.0 / 12.0 * (f0 - 2.0 * fp1 + fp2).powi(2)
        + 0.25 * (3.0 * f0 - 4.0 * fp1 + fp2).powi(2);

    let a0 = LINEAR_WEIGHTS[0] / (WENO_EPS + b0).powi(2);
    let a1 = LINEAR_WEIGHTS[1] / (WENO_EPS + b1).powi(2);
    let a2 = LINEAR_WEIGHTS[2] / (WENO_EPS + b2).powi(2);
    (a0 * p0 + a1 * p1 + a2 * p2) / (a0 + a1 + a2)
}

#[inline]
fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

/// Numerical fluxes F_{i+1/2} for u_t + (u^2/2)_x = 0 with global
/// Lax-Friedrichs splitting f(u) = (f +- a u) / 2, a = max |u|.
fn numerical_fluxes(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let a = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let f_plus: Vec<f64> = u.iter().map(|&v| 0.5 * (0.5 * v * v + a * v)).collect();
    let f_minus: Vec<f64> = u.iter().map(|&v| 0.5 * (0.5 * v * v - a * v)).collect();

    let at = |f: &[f64], i: i64| f[wrap(i, n)];
    (0..n as i64)
        .map(|i| {
            // Upwind reconstruction of f+ at i+1/2 and the mirrored
            // (right-biased) reconstruction of f-.
            let left = weno5_face(
                at(&f_plus, i - 2),
                at(&f_plus, i - 1),
                at(&f_plus, i),
                at(&f_plus, i + 1),
                at(&f_plus, i + 2),
            );
            let right = weno5_face(
                at(&f_minus, i + 3),
                at(&f_minus, i + 2),
                at(&f_minus, i + 1),
                at(&f_minus, i),
                at(&f_minus, i - 1),
            );
            left + right
        })
        .collect()
}

/// -(F_{i+1/2} - F_{i-1/2}) / dx; the flux difference telescopes over the
/// periodic ring, so the discrete mean is conserved.
fn rhs(u: &[f64], dx: f64) -> Vec<f64> {
    let n = u.len();
    let flux = numerical_fluxes(u);
    (0..n)
        .map(|i| {
            let prev = if i == 0 { n - 1 } else { i - 1 };
            -(flux[i] - flux[prev]) / dx
        })
        .collect()
}

fn tvd_rk3_substep(u: &[f64], dx: f64, dt: f64) -> Vec<f64> {
    let n = u.len();
    let l0 = rhs(u, dx);
    let u1: Vec<f64> = (0..n).map(|i| u[i] + dt * l0[i]).collect();
    let l1 = rhs(&u1, dx);
    let u2: Vec<f64> = (0..n)
        .map(|i| 0.75 * u[i] + 0.25 * (u1[i] + dt * l1[i]))
        .collect();
    let l2 = rhs(&u2, dx);
    (0..n)
        .map(|i| u[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * l2[i]))
        .collect()
}

/// WENO5 + TVD-RK3 stepper for inviscid Burgers on the uniform periodic
/// grid. Each output step is split into sub-steps so the per-sub-step
/// CFL number max|u| dt / dx stays below 0.5.
pub struct InviscidBurgersStepper {
    dx: f64,
    dt: f64,
    nominal_substeps: u32,
}

impl InviscidBurgersStepper {
    pub fn new(grid: &GridSet, dt: f64) -> Result<Self> {
        if !grid.is_uniform_1d() {
            return Err(invalid_arg(
                "inviscid Burgers stepper is defined on the uniform periodic 1D grid",
            ));
        }
        let length = match grid.domain() {
            Domain::Periodic1D { length } => length,
            Domain::Box2D => unreachable!("is_uniform_1d guarantees a periodic domain"),
        };
        let dx = length / grid.len() as f64;
        // Nominal sub-step count for metadata, budgeting max|u| at 3.
        let nominal_substeps = (3.0 * dt / (CFL * dx)).ceil().max(1.0) as u32;
        Ok(InviscidBurgersStepper {
            dx,
            dt,
            nominal_substeps,
        })
    }
}

impl Stepper for InviscidBurgersStepper {
    fn step(&self, state: &NodalState) -> Result<NodalState> {
        let mut u = state.values().to_vec();
        let mut remaining = self.dt;
        while remaining > 0.0 {
            let a = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let dt_stable = CFL * self.dx / a.max(1e-12);
            let h = remaining.min(dt_stable);
            let cfl = a * h / self.dx;
            if cfl > CFL_LIMIT {
                return Err(Error::Numerical(format!(
                    "WENO sub-step CFL {cfl} exceeds the {CFL_LIMIT} limit"
                )));
            }
            u = tvd_rk3_substep(&u, self.dx, h);
            if !u.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("inviscid Burgers step".into()));
            }
            remaining -= h;
        }
        state.with_values(u, state.time())
    }

    fn substeps(&self) -> u32 {
        self.nominal_substeps
    }
}

/// One output step without retaining the stepper.
pub fn inviscid_burgers_step(state: &NodalState, grid: &GridSet, dt: f64) -> Result<NodalState> {
    InviscidBurgersStepper::new(grid, dt)?.step(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_periodic_grid;
    use std::f64::consts::PI;

    fn mean(u: &[f64]) -> f64 {
        u.iter().sum::<f64>() / u.len() as f64
    }

    #[test]
    fn weno_reconstruction_is_exact_on_constants_and_linears() {
        assert!((weno5_face(2.0, 2.0, 2.0, 2.0, 2.0) - 2.0).abs() < 1e-15);
        // All three candidate stencils agree on linear data, so the face
        // value is exact no matter what the nonlinear weights do.
        let f = |i: i64| 0.3 + 0.7 * i as f64;
        let face = weno5_face(f(-2), f(-1), f(0), f(1), f(2));
        assert!((face - (0.3 + 0.7 * 0.5)).abs() < 1e-14);
    }

    #[test]
    fn weno_flux_differences_reach_fifth_order() {
        // The face values reconstruct the sliding-average flux: the
        // difference (F_{i+1/2} - F_{i-1/2}) / h approximates f'(x_i) to
        // 5th order on smooth monotone data.
        let err = |h: f64| {
            let f = |i: i64| (i as f64 * h).exp();
            let hi = weno5_face(f(-2), f(-1), f(0), f(1), f(2));
            let lo = weno5_face(f(-3), f(-2), f(-1), f(0), f(1));
            ((hi - lo) / h - 1.0).abs() // f'(0) = 1
        };
        let (e1, e2) = (err(0.1), err(0.05));
        let order = (e1 / e2).log2();
        assert!(order > 4.5, "observed order {order} (errors {e1}, {e2})");
    }

    #[test]
    fn constant_state_is_fixed_point() {
        let g = make_uniform_periodic_grid(64, 2.0 * PI).unwrap();
        let ic = NodalState::scalar(vec![0.8; 64], 0.0).unwrap();
        let next = inviscid_burgers_step(&ic, &g, 0.1).unwrap();
        for v in next.values() {
            assert!((v - 0.8).abs() < 1e-14);
        }
    }

    #[test]
    fn mean_is_conserved_through_a_shock() {
        let g = make_uniform_periodic_grid(100, 2.0 * PI).unwrap();
        let mut u = NodalState::scalar(
            (0..100).map(|i| (2.0 * PI * i as f64 / 100.0).sin() + 0.1).collect(),
            0.0,
        )
        .unwrap();
        let m0 = mean(u.values());
        let stepper = InviscidBurgersStepper::new(&g, 0.05).unwrap();
        for _ in 0..40 {
            u = stepper.step(&u).unwrap();
        }
        assert!((mean(u.values()) - m0).abs() < 1e-14);
    }

    #[test]
    fn sine_steepens_into_a_shock() {
        // For u_0 = sin x the gradient blows up at t = 1; past that the
        // discrete slope max|du| / dx must far exceed the initial one.
        let g = make_uniform_periodic_grid(200, 2.0 * PI).unwrap();
        let dx = 2.0 * PI / 200.0;
        let mut u = NodalState::scalar(
            (0..200).map(|i| (i as f64 * dx).sin()).collect(),
            0.0,
        )
        .unwrap();
        let slope = |v: &[f64]| {
            (0..v.len())
                .map(|i| (v[(i + 1) % v.len()] - v[i]).abs() / dx)
                .fold(0.0f64, f64::max)
        };
        let s0 = slope(u.values());
        let stepper = InviscidBurgersStepper::new(&g, 0.05).unwrap();
        for _ in 0..30 {
            u = stepper.step(&u).unwrap();
        }
        assert!(slope(u.values()) > 5.0 * s0);
        assert!(u.values().iter().all(|v| v.is_finite()));
        assert!(u.values().iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1.1);
    }

    #[test]
    fn matches_method_of_characteristics_before_shock() {
        // u(x, t) solves u = sin(x - u t) before t = 1; fixed-point
        // iterate that relation and compare.
        let n = 256;
        let g = make_uniform_periodic_grid(n, 2.0 * PI).unwrap();
        let dx = 2.0 * PI / n as f64;
        let mut u = NodalState::scalar((0..n).map(|i| (i as f64 * dx).sin()).collect(), 0.0)
            .unwrap();
        let t = 0.5;
        let stepper = InviscidBurgersStepper::new(&g, 0.05).unwrap();
        for _ in 0..10 {
            u = stepper.step(&u).unwrap();
        }
        let mut max_err = 0.0f64;
        for i in 0..n {
            let x = i as f64 * dx;
            let mut v = (x).sin();
            for _ in 0..200 {
                v = (x - v * t).sin();
            }
            max_err = max_err.max((u.values()[i] - v).abs());
        }
        assert!(max_err < 2e-3, "max pointwise error {max_err}");
    }
}
