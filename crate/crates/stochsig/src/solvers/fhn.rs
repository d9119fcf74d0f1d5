//! Stochastic FitzHugh-Nagumo model
//! `dv = (v - v^3 - u) / eps dt + sigma1 dW^1`,
//! `du = (gamma v - u + beta) dt + sigma2 dW^2`,
//! and splitting schemes built from its two exactly solvable sub-flows.

use super::{Needs, Scheme, StepInputs};
use crate::error::{invalid, Result};
use crate::real::Real;
use crate::sst::fhn_aux;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhnParams<T> {
    pub eps: T,
    pub gamma: T,
    pub beta: T,
    pub sigma1: T,
    pub sigma2: T,
}

impl<T: Real> FhnParams<T> {
    pub fn new(eps: T, gamma: T, beta: T, sigma1: T, sigma2: T) -> Result<Self> {
        if !(eps > T::zero()) {
            return Err(invalid("FitzHugh-Nagumo needs eps > 0"));
        }
        Ok(FhnParams { eps, gamma, beta, sigma1, sigma2 })
    }

    fn sigma(&self) -> [T; 2] {
        [self.sigma1, self.sigma2]
    }

    /// Flow of `v' = (v - v^3) / eps`, `u' = beta` for time `t`.
    pub fn nonlinear_flow(&self, t: T, y: [T; 2]) -> [T; 2] {
        let [v, u] = y;
        let one_minus = -(-T::lit(2.0) * t / self.eps).exp_m1();
        let denom = T::one() + (v * v - T::one()) * one_minus;
        [v / denom.sqrt(), u + self.beta * t]
    }

    /// `exp(t A)` with `A = [[0, -1/eps], [gamma, -1]]`, row-major.
    pub fn linear_propagator(&self, t: T) -> [[T; 2]; 2] {
        let a = [[T::zero(), -T::one() / self.eps], [self.gamma, -T::one()]];
        expm2(a, t)
    }

    pub fn linear_flow(&self, t: T, y: [T; 2]) -> [T; 2] {
        mat_vec(&self.linear_propagator(t), y)
    }

    /// Deterministic Strang splitting over time `t`.
    pub fn strang_flow(&self, t: T, y: [T; 2]) -> [T; 2] {
        let q = t * T::lit(0.5);
        self.nonlinear_flow(q, self.linear_flow(t, self.nonlinear_flow(q, y)))
    }
}

fn mat_vec<T: Real>(m: &[[T; 2]; 2], y: [T; 2]) -> [T; 2] {
    [m[0][0] * y[0] + m[0][1] * y[1], m[1][0] * y[0] + m[1][1] * y[1]]
}

fn mat_mul<T: Real>(a: &[[T; 2]; 2], b: &[[T; 2]; 2]) -> [[T; 2]; 2] {
    let mut c = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Closed form exponential of a real 2x2 matrix times `t`.
pub fn expm2<T: Real>(a: [[T; 2]; 2], t: T) -> [[T; 2]; 2] {
    let half = T::lit(0.5);
    let tau = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = tau * tau / T::lit(4.0) - det;
    let q = disc * t * t;
    let (c, s) = if q.abs() < T::lit(1e-8) {
        (T::one() + q * half + q * q / T::lit(24.0), t * (T::one() + q / T::lit(6.0) + q * q / T::lit(120.0)))
    } else if disc > T::zero() {
        let r = disc.sqrt();
        ((r * t).cosh(), (r * t).sinh() / r)
    } else {
        let r = (-disc).sqrt();
        ((r * t).cos(), (r * t).sin() / r)
    };
    let e = (tau * half * t).exp();
    let m = [[a[0][0] - tau * half, a[0][1]], [a[1][0], a[1][1] - tau * half]];
    [[e * (c + s * m[0][0]), e * s * m[0][1]], [e * s * m[1][0], e * (c + s * m[1][1])]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FhnMethod {
    /// Nonlinear half flow, exact-in-law linear stochastic flow, nonlinear half flow.
    Strang,
    /// Three-stage shifted splitting using `(W, H, n)`.
    HighOrder,
}

/// Noise contribution of the linear stochastic flow over `h`:
/// `int_0^h e^{A(h-s)} Sigma dW_s`, expanded to second order in `A`.
/// The needed integrals are `int (h-s) dW = int W dr` and
/// `int (h-s)^2 dW = 2 int (h - r) W_r dr`, both functions of `(W, H, K)`.
pub fn ou_noise<T: Real>(p: &FhnParams<T>, h: T, w: &[T], hh: &[T], k: &[T]) -> [T; 2] {
    let a = [[T::zero(), -T::one() / p.eps], [p.gamma, -T::one()]];
    let a2 = mat_mul(&a, &a);
    let sig = p.sigma();
    let mut j0 = [T::zero(); 2];
    let mut j1 = [T::zero(); 2];
    let mut j2 = [T::zero(); 2];
    for i in 0..2 {
        let p0 = h * (w[i] * T::lit(0.5) + hh[i]);
        let p1 = h * h * (w[i] / T::lit(3.0) + hh[i] * T::lit(0.5) - k[i]);
        j0[i] = sig[i] * w[i];
        j1[i] = sig[i] * p0;
        j2[i] = sig[i] * T::lit(2.0) * (h * p0 - p1);
    }
    let t1 = mat_vec(&a, j1);
    let t2 = mat_vec(&a2, j2);
    [j0[0] + t1[0] + t2[0] * T::lit(0.5), j0[1] + t1[1] + t2[1] * T::lit(0.5)]
}

pub fn fhn_strang_step<T: Real>(p: &FhnParams<T>, y: [T; 2], x: &StepInputs<T>) -> Result<[T; 2]> {
    let (hh, k) = (x.need_h()?, x.need_k()?);
    let q = x.h * T::lit(0.5);
    let y = p.nonlinear_flow(q, y);
    let lin = p.linear_flow(x.h, y);
    let xi = ou_noise(p, x.h, x.w, hh, k);
    let y = p.nonlinear_flow(q, [lin[0] + xi[0], lin[1] + xi[1]]);
    super::check_finite(&y)?;
    Ok(y)
}

pub fn fhn_high_order_step<T: Real>(p: &FhnParams<T>, y: [T; 2], x: &StepInputs<T>) -> Result<[T; 2]> {
    let (hh, n) = (x.need_h()?, x.need_n()?);
    let cbar = fhn_aux(x.w, hh, n, x.h).c;
    let sig = p.sigma();
    let half = T::lit(0.5);
    let q = x.h * half;
    let mut y1 = y;
    for i in 0..2 {
        y1[i] = y1[i] + sig[i] * (half * x.w[i] + hh[i] - half * cbar[i]);
    }
    let mut y2 = p.strang_flow(q, y1);
    for i in 0..2 {
        y2[i] = y2[i] + sig[i] * cbar[i];
    }
    let mut y3 = p.strang_flow(q, y2);
    for i in 0..2 {
        y3[i] = y3[i] + sig[i] * (half * x.w[i] - hh[i] - half * cbar[i]);
    }
    super::check_finite(&y3)?;
    Ok(y3)
}

#[derive(Debug, Clone, Copy)]
pub struct Fhn<T> {
    pub params: FhnParams<T>,
    pub method: FhnMethod,
}

impl<T: Real> Scheme<T> for Fhn<T> {
    type State = [T; 2];

    fn name(&self) -> &'static str {
        match self.method {
            FhnMethod::Strang => "strang",
            FhnMethod::HighOrder => "high_order_splitting",
        }
    }

    fn noise_dim(&self) -> usize {
        2
    }

    fn needs(&self) -> Needs {
        match self.method {
            FhnMethod::Strang => Needs::WHK,
            FhnMethod::HighOrder => Needs::WHN,
        }
    }

    fn step(&self, y: &mut [T; 2], x: &StepInputs<T>) -> Result<()> {
        *y = match self.method {
            FhnMethod::Strang => fhn_strang_step(&self.params, *y, x)?,
            FhnMethod::HighOrder => fhn_high_order_step(&self.params, *y, x)?,
        };
        Ok(())
    }

    fn observe(&self, y: &[T; 2]) -> Vec<T> {
        y.to_vec()
    }
}
