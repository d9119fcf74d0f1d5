//! One-step integrators written as pure maps from a state and the Brownian
//! information of a step to the next state, plus a driver that runs them
//! over a sampled path.

mod driver;
pub mod fhn;
pub mod heston;
pub mod igbm;
pub mod sabr;
pub mod sde;
pub mod uld;

pub use driver::{solve, solve_on_path, terminal, BrownianPath, StepDiagnostics, Trajectory};

use crate::error::{Error, Result};
use crate::real::Real;

/// Which parts of the step signature a solver consumes. `W` is always needed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Needs {
    pub h: bool,
    pub k: bool,
    pub n: bool,
}

impl Needs {
    pub const W: Needs = Needs { h: false, k: false, n: false };
    pub const WH: Needs = Needs { h: true, k: false, n: false };
    pub const WHK: Needs = Needs { h: true, k: true, n: false };
    pub const WHN: Needs = Needs { h: true, k: false, n: true };
}

/// Brownian information over one step of length `h`, one entry per noise
/// coordinate.
#[derive(Debug, Clone, Copy)]
pub struct StepInputs<'a, T> {
    pub h: T,
    pub w: &'a [T],
    pub hh: Option<&'a [T]>,
    pub k: Option<&'a [T]>,
    pub n: Option<&'a [T]>,
}

impl<'a, T: Real> StepInputs<'a, T> {
    pub fn w_only(h: T, w: &'a [T]) -> Self {
        StepInputs { h, w, hh: None, k: None, n: None }
    }

    pub fn wh(h: T, w: &'a [T], hh: &'a [T]) -> Self {
        StepInputs { h, w, hh: Some(hh), k: None, n: None }
    }

    pub fn need_h(&self) -> Result<&'a [T]> {
        self.hh.ok_or(Error::MissingInput("H"))
    }

    pub fn need_k(&self) -> Result<&'a [T]> {
        self.k.ok_or(Error::MissingInput("K"))
    }

    pub fn need_n(&self) -> Result<&'a [T]> {
        self.n.ok_or(Error::MissingInput("n"))
    }

    pub fn check(&self, needs: Needs) -> Result<()> {
        if needs.h {
            self.need_h()?;
        }
        if needs.k {
            self.need_k()?;
        }
        if needs.n {
            self.need_n()?;
        }
        Ok(())
    }
}

/// A solver bound to its model, usable by the driver.
pub trait Scheme<T: Real>: Sync {
    type State: Clone + Send;

    fn name(&self) -> &'static str;
    fn noise_dim(&self) -> usize;
    fn needs(&self) -> Needs;
    fn step(&self, state: &mut Self::State, x: &StepInputs<T>) -> Result<()>;
    /// The components compared in error estimates.
    fn observe(&self, state: &Self::State) -> Vec<T>;
}

pub(crate) fn check_finite<T: Real>(y: &[T]) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::BlowUp(format!("{:?}", y.iter().map(|v| v.as_f64()).collect::<Vec<_>>())))
    }
}

/// `(1 - e^{-x}) / x`.
pub fn phi_exp1<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        T::one() - x / T::lit(2.0) + x * x / T::lit(6.0) - x * x * x / T::lit(24.0)
    } else {
        -(-x).exp_m1() / x
    }
}

/// `(e^{-x} + x - 1) / x^2`.
pub fn phi_exp2<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        T::lit(0.5) - x / T::lit(6.0) + x * x / T::lit(24.0) - x * x * x / T::lit(120.0)
    } else {
        ((-x).exp_m1() + x) / (x * x)
    }
}

/// `(e^x - 1) / x`.
pub fn phi_expm1<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        T::one() + x / T::lit(2.0) + x * x / T::lit(6.0) + x * x * x / T::lit(24.0)
    } else {
        x.exp_m1() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_branches_are_continuous() {
        for &x in &[0.99e-4f64, 1.01e-4, -0.99e-4, -1.01e-4] {
            assert!((phi_exp1(x) - (1.0 - (-x).exp()) / x).abs() < 1e-12);
            assert!((phi_expm1(x) - (x.exp() - 1.0) / x).abs() < 1e-12);
        }
        for &x in &[0.99e-4f64, 1.01e-4] {
            assert!((phi_exp2(x) - (0.5 - x / 6.0 + x * x / 24.0)).abs() < 1e-11);
        }
        assert_eq!(phi_exp1(0.0f64), 1.0);
        assert_eq!(phi_exp2(0.0f64), 0.5);
        assert!((phi_exp2(1.0f64) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn missing_inputs_are_reported() {
        let w = [0.1];
        let x = StepInputs::w_only(0.1, &w);
        assert!(x.check(Needs::W).is_ok());
        assert_eq!(x.check(Needs::WH), Err(Error::MissingInput("H")));
        let x = StepInputs::wh(0.1, &w, &w);
        assert_eq!(x.check(Needs::WHK), Err(Error::MissingInput("K")));
        assert_eq!(x.check(Needs::WHN), Err(Error::MissingInput("n")));
    }
}
