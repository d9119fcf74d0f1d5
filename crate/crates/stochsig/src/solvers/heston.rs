//! Heston model `dS = r S dt + sqrt(V) S dW^1`,
//! `dV = kappa (theta - V) dt + sigma sqrt(V) dW^2`, independent drivers.

use super::{Needs, Scheme, StepInputs};
use crate::error::{invalid, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams<T> {
    pub r: T,
    pub kappa: T,
    pub theta: T,
    pub sigma: T,
    pub s0: T,
    pub v0: T,
    pub strike: T,
    pub t: T,
}

impl<T: Real> HestonParams<T> {
    pub fn new(r: T, kappa: T, theta: T, sigma: T, s0: T, v0: T, strike: T, t: T) -> Result<Self> {
        if !(kappa > T::zero() && theta > T::zero() && sigma > T::zero() && s0 > T::zero() && v0 >= T::zero() && t > T::zero()) {
            return Err(invalid("Heston needs kappa, theta, sigma, S0, T > 0 and V0 >= 0"));
        }
        Ok(HestonParams { r, kappa, theta, sigma, s0, v0, strike, t })
    }

    /// Discounted call payoff.
    pub fn payoff(&self, s: T) -> T {
        (-self.r * self.t).exp() * (s - self.strike).max(T::zero())
    }
}

/// Milstein step without the Levy area terms, using the double integral
/// approximation `I^{21} ~ W^1 W^2 / 2` and full truncation of `V`.
pub fn heston_milstein_step<T: Real>(p: &HestonParams<T>, y: [T; 2], h: T, w: &[T]) -> [T; 2] {
    let [s, v] = y;
    let vp = v.max(T::zero());
    let rv = vp.sqrt();
    let half = T::lit(0.5);
    let (w1, w2) = (w[0], w[1]);
    let cross = if vp > T::zero() { p.sigma * s * half * half * w1 * w2 } else { T::zero() };
    let s_next = s + p.r * s * h + rv * s * w1 + half * vp * s * (w1 * w1 - h) + cross;
    let v_next = v + p.kappa * (p.theta - vp) * h + p.sigma * rv * w2 + p.sigma * p.sigma / T::lit(4.0) * (w2 * w2 - h);
    [s_next, v_next]
}

#[derive(Debug, Clone, Copy)]
pub struct HestonMilstein<T> {
    pub params: HestonParams<T>,
}

impl<T: Real> Scheme<T> for HestonMilstein<T> {
    type State = [T; 2];

    fn name(&self) -> &'static str {
        "milstein_no_area"
    }

    fn noise_dim(&self) -> usize {
        2
    }

    fn needs(&self) -> Needs {
        Needs::W
    }

    fn step(&self, y: &mut [T; 2], x: &StepInputs<T>) -> Result<()> {
        *y = heston_milstein_step(&self.params, *y, x.h, x.w);
        super::check_finite(y)
    }

    fn observe(&self, y: &[T; 2]) -> Vec<T> {
        vec![y[0]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> HestonParams<f64> {
        HestonParams::new(0.1, 2.0, 0.1, 0.5, 20.0, 0.4, 20.0, 1.0).unwrap()
    }

    #[test]
    fn zero_noise_step() {
        let p = reference();
        let y = heston_milstein_step(&p, [20.0, 0.4], 0.1, &[0.0, 0.0]);
        // S: 20 + 0.2 - 0.5 * 0.4 * 20 * 0.1; V: 0.4 + 2 (0.1 - 0.4) 0.1 - 0.0625 * 0.1
        assert!((y[0] - (20.0 + 0.2 - 0.4)).abs() < 1e-14);
        assert!((y[1] - (0.4 - 0.06 - 0.00625)).abs() < 1e-15);
    }

    #[test]
    fn truncation_keeps_sqrt_real() {
        let y = heston_milstein_step(&reference(), [20.0, -0.1], 0.1, &[0.3, -0.2]);
        assert!(y[0].is_finite() && y[1].is_finite());
    }

    #[test]
    fn payoff_values() {
        let p = reference();
        assert_eq!(p.payoff(19.0), 0.0);
        assert!((p.payoff(21.0) - (-0.1f64).exp()).abs() < 1e-15);
        assert!(HestonParams::new(0.1, 0.0, 0.1, 0.5, 20.0, 0.4, 20.0, 1.0).is_err());
    }
}
