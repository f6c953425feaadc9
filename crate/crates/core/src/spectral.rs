//! Fourier collocation helpers on uniform periodic grids of even size.
//!
//! Conventions: forward transform is the plain DFT, the inverse carries the
//! 1/N factor. Wavenumbers run 0..N/2-1, -N/2..-1 on the 2*pi-periodic
//! domain; the Nyquist mode is zeroed for odd derivatives.

use crate::error::{invalid_arg, Result};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct SpectralOperator1D {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl SpectralOperator1D {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(invalid_arg(format!(
                "spectral operator needs an even grid size >= 2, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(SpectralOperator1D {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer wavenumber of DFT bin i.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 - 1 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex<f64>> {
        assert_eq!(values.len(), self.n);
        let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    pub fn inverse(&self, spectrum: &[Complex<f64>]) -> Vec<f64> {
        assert_eq!(spectrum.len(), self.n);
        let mut buf = spectrum.to_vec();
        self.inv.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Multiply each mode by factor(k) and transform back.
    pub fn apply_mode_factors(
        &self,
        values: &[f64],
        factor: impl Fn(i64) -> Complex<f64>,
    ) -> Vec<f64> {
        let mut spec = self.forward(values);
        for (i, c) in spec.iter_mut().enumerate() {
            *c *= factor(self.wavenumber(i));
        }
        self.inverse(&spec)
    }

    /// m-th spectral derivative; the Nyquist mode is zeroed when m is odd.
    pub fn derivative(&self, values: &[f64], order: u32) -> Vec<f64> {
        let nyquist = -(self.n as i64) / 2;
        self.apply_mode_factors(values, |k| {
            if order % 2 == 1 && k == nyquist {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(0.0, k as f64).powu(order)
            }
        })
    }

    /// Translate the signal: u(x) -> u(x + shift) via phase factors.
    pub fn translate(&self, values: &[f64], shift: f64) -> Vec<f64> {
        self.apply_mode_factors(values, |k| {
            Complex::from_polar(1.0, k as f64 * shift)
        })
    }

    /// Pointwise product with 2/3-rule dealiasing: both factors are
    /// truncated to |k| < N/3 before multiplying in physical space.
    pub fn dealiased_product(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let cut = self.n as i64 / 3;
        let trunc = |w: &[f64]| {
            self.apply_mode_factors(w, |k| {
                if k.abs() < cut {
                    Complex::new(1.0, 0.0)
                } else {
                    Complex::new(0.0, 0.0)
                }
            })
        };
        let ut = trunc(u);
        let vt = trunc(v);
        ut.iter().zip(&vt).map(|(a, b)| a * b).collect()
    }

    /// Dense differentiation matrix D^m, column by column.
    pub fn differentiation_matrix(&self, order: u32) -> crate::linalg::Tensor {
        let n = self.n;
        let mut out = crate::linalg::Tensor::zeros(n, n);
        let mut unit = vec![0.0; n];
        for j in 0..n {
            unit[j] = 1.0;
            let col = self.derivative(&unit, order);
            unit[j] = 0.0;
            for i in 0..n {
                out.set(i, j, col[i]);
            }
        }
        out
    }
}
