//! 1D reference steppers on the uniform periodic grid: variable-coefficient
//! advection-diffusion (Crank-Nicolson), the 4th-order PDE and the
//! integro-differential demo (exact Fourier integrators), viscous Burgers
//! (RK4 + spectral), and the exact linear wave system.

use super::{FixedFourierSeries, Stepper};
use crate::error::{invalid_arg, Error, Result};
use crate::grid::{GridSet, NodalState};
use crate::linalg::{DenseLu, Tensor};
use crate::spectral::SpectralOperator1D;
use num_complex::Complex;

fn require_uniform_1d(grid: &GridSet) -> Result<()> {
    if !grid.is_uniform_1d() {
        return Err(invalid_arg(
            "this stepper is defined on the uniform periodic 1D grid",
        ));
    }
    Ok(())
}

/// Crank-Nicolson step of u_t = -(alpha u)_x + (kappa u_x)_x with the
/// spatial operator assembled from spectral differentiation matrices and
/// diagonal coefficient matrices. The LU factorization of (I - dt/2 L) is
/// cached at construction.
pub struct AdvDiffCnStepper {
    explicit: Tensor, // I + dt/2 L
    implicit_lu: DenseLu,
    n: usize,
}

impl AdvDiffCnStepper {
    pub fn new(
        grid: &GridSet,
        alpha: &FixedFourierSeries,
        kappa: &FixedFourierSeries,
        dt: f64,
    ) -> Result<Self> {
        require_uniform_1d(grid)?;
        let n = grid.len();
        let op = SpectralOperator1D::new(n)?;
        let d1 = op.differentiation_matrix(1);

        // L = -D1 diag(alpha) + D1 diag(kappa) D1
        let alpha_vals: Vec<f64> = (0..n).map(|i| alpha.eval(grid.node(i)[0])).collect();
        let kappa_vals: Vec<f64> = (0..n).map(|i| kappa.eval(grid.node(i)[0])).collect();
        let mut l = Tensor::zeros(n, n);
        let diag_times = |diag: &[f64], m: &Tensor| {
            let mut out = m.clone();
            for r in 0..n {
                for c in 0..n {
                    out.set(r, c, diag[r] * m.get(r, c));
                }
            }
            out
        };
        let adv = d1.matmul(&diag_times(&alpha_vals, &Tensor::identity(n)));
        let diff = d1.matmul(&diag_times(&kappa_vals, &d1));
        for r in 0..n {
            for c in 0..n {
                l.set(r, c, -adv.get(r, c) + diff.get(r, c));
            }
        }

        let half = 0.5 * dt;
        let mut implicit = Tensor::identity(n);
        let mut explicit = Tensor::identity(n);
        for r in 0..n {
            for c in 0..n {
                implicit.set(r, c, implicit.get(r, c) - half * l.get(r, c));
                explicit.set(r, c, explicit.get(r, c) + half * l.get(r, c));
            }
        }
        let implicit_lu = DenseLu::factor(&implicit).map_err(|e| {
            Error::Numerical(format!("Crank-Nicolson system not solvable: {e}"))
        })?;
        if implicit_lu.pivot_ratio() < 1e-14 {
            return Err(Error::Numerical(format!(
                "Crank-Nicolson system nearly singular (pivot ratio {:e})",
                implicit_lu.pivot_ratio()
            )));
        }
        Ok(AdvDiffCnStepper {
            explicit,
            implicit_lu,
            n,
        })
    }
}

impl Stepper for AdvDiffCnStepper {
    fn step(&self, state: &NodalState) -> Result<NodalState> {
        let u = Tensor::column(state.values().to_vec());
        let rhs = self.explicit.matmul(&u);
        let next = self.implicit_lu.solve(rhs.data());
        debug_assert_eq!(next.len(), self.n);
        state.with_values(next, state.time())
    }
}

/// One Crank-Nicolson step without retaining the stepper.
pub fn advdiff1d_step_cn(
    state: &NodalState,
    grid: &GridSet,
    alpha: &FixedFourierSeries,
    kappa: &FixedFourierSeries,
    dt: f64,
) -> Result<NodalState> {
    AdvDiffCnStepper::new(grid, alpha, kappa, dt)?.step(state)
}

/// Exact integrator for u_t = -c u_xxxx: mode k decays by exp(-c k^4 dt).
pub struct FourthOrderStepper {
    op: SpectralOperator1D,
    c: f64,
    dt: f64,
}

impl FourthOrderStepper {
    pub fn new(grid: &GridSet, c: f64, dt: f64) -> Result<Self> {
        require_uniform_1d(grid)?;
        Ok(FourthOrderStepper {
            op: SpectralOperator1D::new(grid.len())?,
            c,
            dt,
        })
    }
}

impl Stepper for FourthOrderStepper {
    fn step(&self, state: &NodalState) -> Result<NodalState> {
        let c = self.c;
        let dt = self.dt;
        let next = self.op.apply_mode_factors(state.values(), |k| {
            let k = k as f64;
            Complex::new((-c * k * k * k * k * dt).exp(), 0.0)
        });
        state.with_values(next, state.time())
    }
}

pub fn fourth_order_exact_step(
    state: &NodalState,
    grid: &GridSet,
    c: f64,
    dt: f64,
) -> Result<NodalState> {
    FourthOrderStepper::new(grid, c, dt)?.step(state)
}

/// Exact integrator for u_t = nu u_xx + gamma * mean(u): the mean mode
/// grows by exp(gamma dt), every other mode decays by exp(-nu k^2 dt).
pub struct IntegroDiffStepper {
    op: SpectralOperator1D,
    nu: f64,
    gamma: f64,
    dt: f64,
}

impl IntegroDiffStepper {
    pub fn new(grid: &GridSet, nu: f64, gamma: f64, dt: f64) -> Result<Self> {
        require_uniform_1d(grid)?;
        Ok(IntegroDiffStepper {
            op: SpectralOperator1D::new(grid.len())?,
            nu,
            gamma,
            dt,
        })
    }
}

impl Stepper for IntegroDiffStepper {
    fn step(&self, state: &NodalState) -> Result<NodalState> {
        let (nu, gamma, dt) = (self.nu, self.gamma, self.dt);
        let next = self.op.apply_mode_factors(state.values(), |k| {
            if k == 0 {
                Complex::new((gamma * dt).exp(), 0.0)
            } else {
                let k = k as f64;
                Complex::new((-nu * k * k * dt).exp(), 0.0)
            }
        });
        state.with_values(next, state.time())
    }
}

pub fn integro_differential_step(
    state: &NodalState,
    grid: &GridSet,
    nu: f64,
    gamma: f64,
    dt: f64,
) -> Result<NodalState> {
    IntegroDiffStepper::new(grid, nu, gamma, dt)?.step(state)
}

/// Classical 4-stage Runge-Kutta for u_t = -u u_x + nu u_xx with spectral
/// derivatives and a 2/3-rule dealiased product. Sub-steps keep the stiff
/// diffusive modes inside the RK4 stability region.
pub struct ViscousBurgersStepper {
    op: SpectralOperator1D,
    nu: f64,
    dt_sub: f64,
    substeps: u32,
}

impl ViscousBurgersStepper {
    pub fn new(grid: &GridSet, nu: f64, dt: f64) -> Result<Self> {
        require_uniform_1d(grid)?;
        let n = grid.len();
        let op = SpectralOperator1D::new(n)?;
        // Stability bound: |lambda| dt <= 2.8 for RK4 with
        // lambda ~ nu k_max^2 + u_max k_max, u_max budgeted at 3.
        let k_max = (n / 2) as f64;
        let lambda = nu * k_max * k_max + 3.0 * k_max;
        let dt_stable = 2.5 / lambda;
        let substeps = (dt / dt_stable).ceil().max(1.0) as u32;
        Ok(ViscousBurgersStepper {
            op,
            nu,
            dt_sub: dt / substeps as f64,
            substeps,
        })
    }

    fn rhs(&self, u: &[f64]) -> Vec<f64> {
        let du = self.op.derivative(u, 1);
        let d2u = self.op.derivative(u, 2);
        let conv = self.op.dealiased_product(u, &du);
        conv.iter()
            .zip(&d2u)
            .map(|(c, d)| -c + self.nu * d)
            .collect()
    }

    fn rk4_substep(&self, u: &[f64]) -> Vec<f64> {
        let h = self.dt_sub;
        let k1 = self.rhs(u);
        let u2: Vec<f64> = u.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
        let k2 = self.rhs(&u2);
        let u3: Vec<f64> = u.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
        let k3 = self.rhs(&u3);
        let u4: Vec<f64> = u.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
        let k4 = self.rhs(&u4);
        (0..u.len())
            .map(|i| u[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }
}

impl Stepper for ViscousBurgersStepper {
    fn step(&self, state: &NodalState) -> Result<NodalState> {
        let mut u = state.values().to_vec();
        for _ in 0..self.substeps {
            u = self.rk4_substep(&u);
            if !u.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("viscous Burgers step".into()));
            }
        }
        state.with_values(u, state.time())
    }

    fn substeps(&self) -> u32 {
        self.substeps
    }
}

pub fn viscous_burgers_step(
    state: &NodalState,
    grid: &GridSet,
    nu: f64,
    dt: f64,
) -> Result<NodalState> {
    ViscousBurgersStepper::new(grid, nu, dt)?.step(state)
}

/// Exact solution of u_t = A u_x, A = [[0,1],[1,0]]: the characteristic
/// variables w+- = u1 +- u2 translate by -+t, realized as spectral phase
/// shifts.
pub fn wave_system_exact(
    u1_0: &NodalState,
    u2_0: &NodalState,
    grid: &GridSet,
    t: f64,
) -> Result<(NodalState, NodalState)> {
    require_uniform_1d(grid)?;
    if u1_0.nodes() != grid.len() || u2_0.nodes() != grid.len() {
        return Err(invalid_arg("component size disagrees with grid"));
    }
    let op = SpectralOperator1D::new(grid.len())?;
    let n = grid.len();
    let w_plus: Vec<f64> = (0..n).map(|i| u1_0.values()[i] + u2_0.values()[i]).collect();
    let w_minus: Vec<f64> = (0..n).map(|i| u1_0.values()[i] - u2_0.values()[i]).collect();
    // w+_t = w+_x  =>  w+(x, t) = w+(x + t, 0); w-_t = -w-_x mirrors it.
    let w_plus_t = op.translate(&w_plus, t);
    let w_minus_t = op.translate(&w_minus, -t);
    let u1: Vec<f64> = (0..n).map(|i| 0.5 * (w_plus_t[i] + w_minus_t[i])).collect();
    let u2: Vec<f64> = (0..n).map(|i| 0.5 * (w_plus_t[i] - w_minus_t[i])).collect();
    Ok((
        NodalState::scalar(u1, u1_0.time() + t.max(0.0))?,
        NodalState::scalar(u2, u2_0.time() + t.max(0.0))?,
    ))
}

/// Stepper form of the exact wave solution over concatenated components.
pub struct WaveSystemStepper {
    op: SpectralOperator1D,
    dt: f64,
    n: usize,
}

impl WaveSystemStepper {
    pub fn new(grid: &GridSet, dt: f64) -> Result<Self> {
        require_uniform_1d(grid)?;
        Ok(WaveSystemStepper {
            op: SpectralOperator1D::new(grid.len())?,
            dt,
            n: grid.len(),
        })
    }
}

impl Stepper for WaveSystemStepper {
    fn step(&self, state: &NodalState) -> Result<NodalState> {
        if state.components() != 2 || state.nodes() != self.n {
            return Err(invalid_arg("wave system expects a 2-component state"));
        }
        let u1 = state.component(0);
        let u2 = state.component(1);
        let n = self.n;
        let w_plus: Vec<f64> = (0..n).map(|i| u1[i] + u2[i]).collect();
        let w_minus: Vec<f64> = (0..n).map(|i| u1[i] - u2[i]).collect();
        let wp = self.op.translate(&w_plus, self.dt);
        let wm = self.op.translate(&w_minus, -self.dt);
        let mut values = Vec::with_capacity(2 * n);
        values.extend((0..n).map(|i| 0.5 * (wp[i] + wm[i])));
        values.extend((0..n).map(|i| 0.5 * (wp[i] - wm[i])));
        state.with_values(values, state.time())
    }
}

/// Serves a perturbed or permuted periodic 1D grid with a uniform-grid
/// stepper. Band-limited states resample exactly between the actual
/// nodes and the uniform grid of the same size through the trigonometric
/// cardinal basis, so the oracle state advances on the uniform grid while
/// inputs and outputs live on the grid the dataset uses.
pub struct ResampledStepper {
    inner: Box<dyn Stepper>,
    /// eval[i][k] = C(x_i - k h): uniform nodal values -> values at x_i.
    eval: Tensor,
    lu: DenseLu,
    n: usize,
}

/// Periodic cardinal interpolant centered at 0 on the uniform N-grid.
fn trig_cardinal(x: f64, n: usize, length: f64) -> f64 {
    let theta = 2.0 * std::f64::consts::PI * x / length;
    let half = 0.5 * theta;
    if half.sin().abs() < 1e-12 {
        return 1.0;
    }
    let nf = n as f64;
    if n % 2 == 0 {
        (nf * half).sin() * (half.cos() / half.sin()) / nf
    } else {
        (nf * half).sin() / (nf * half.sin())
    }
}

impl ResampledStepper {
    pub fn new(grid: &GridSet, inner: Box<dyn Stepper>) -> Result<Self> {
        let length = match grid.domain() {
            crate::grid::Domain::Periodic1D { length } => length,
            crate::grid::Domain::Box2D => {
                return Err(invalid_arg("resampling wrapper expects a periodic 1D grid"))
            }
        };
        let n = grid.len();
        let h = length / n as f64;
        let mut eval = Tensor::zeros(n, n);
        for i in 0..n {
            let x = grid.node(i)[0];
            for k in 0..n {
                eval.set(i, k, trig_cardinal(x - k as f64 * h, n, length));
            }
        }
        let lu = DenseLu::factor(&eval)?;
        Ok(ResampledStepper { inner, eval, lu, n })
    }

    fn to_uniform(&self, values: &[f64]) -> Vec<f64> {
        self.lu.solve(values)
    }

    fn from_uniform(&self, values: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|k| self.eval.get(i, k) * values[k]).sum())
            .collect()
    }
}

impl Stepper for ResampledStepper {
    fn step(&self, state: &NodalState) -> Result<NodalState> {
        let n = self.n;
        let c = state.components();
        let mut uniform = Vec::with_capacity(c * n);
        for comp in 0..c {
            uniform.extend(self.to_uniform(state.component(comp)));
        }
        let stepped = self.inner.step(&NodalState::new(
            uniform,
            state.time(),
            n,
            c,
        )?)?;
        let mut values = Vec::with_capacity(c * n);
        for comp in 0..c {
            values.extend(self.from_uniform(stepped.component(comp)));
        }
        NodalState::new(values, stepped.time(), n, c)
    }

    fn substeps(&self) -> u32 {
        self.inner.substeps()
    }
}
