//! Underdamped Langevin dynamics
//! `dx = v dt`, `dv = -gamma v dt - grad f(x) dt + sqrt(2 gamma) dW`
//! and the third order SORT integrator.

use super::{phi_exp1, phi_exp2, Needs, Scheme, StepInputs};
use crate::error::{invalid, Result};
use crate::real::Real;

pub trait Potential<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn grad(&self, x: &[T], out: &mut [T]);
}

/// `f(x) = |x|^2 / 2` in `d` dimensions.
#[derive(Debug, Clone, Copy)]
pub struct Quadratic {
    pub d: usize,
}

impl<T: Real> Potential<T> for Quadratic {
    fn dim(&self) -> usize {
        self.d
    }
    fn grad(&self, x: &[T], out: &mut [T]) {
        out.copy_from_slice(x);
    }
}

/// Position, momentum and the cached gradient at the position.
#[derive(Debug, Clone, PartialEq)]
pub struct UldState<T> {
    pub x: Vec<T>,
    pub v: Vec<T>,
    pub grad: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct Sort<P> {
    pub gamma: f64,
    pub potential: P,
}

impl<P> Sort<P> {
    pub fn new(gamma: f64, potential: P) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(invalid(format!("friction must be positive, got {gamma}")));
        }
        Ok(Sort { gamma, potential })
    }

    pub fn init<T: Real>(&self, x: Vec<T>, v: Vec<T>) -> UldState<T>
    where
        P: Potential<T>,
    {
        let mut grad = vec![T::zero(); x.len()];
        self.potential.grad(&x, &mut grad);
        UldState { x, v, grad }
    }
}

/// One SORT step. The gradient at the new position is stored in the state and
/// reused by the next step, so each step costs two gradient evaluations.
pub fn sort_step<T: Real, P: Potential<T>>(s: &Sort<P>, st: &mut UldState<T>, x: &StepInputs<T>) -> Result<()> {
    let hh = x.need_h()?;
    let kk = x.need_k()?;
    let g = T::lit(s.gamma);
    let h = x.h;
    let rt = (T::lit(2.0) * g).sqrt();
    let half = T::lit(0.5);
    let gh = g * h;
    let (e_half, e_full) = ((-half * gh).exp(), (-gh).exp());
    // (1 - e^{-g h/2}) / g, (e^{-g h/2} + g h/2 - 1) / g^2 and the same over h
    let a1 = half * h * phi_exp1(half * gh);
    let b1 = half * h * half * h * phi_exp2(half * gh);
    let a2 = h * phi_exp1(gh);
    let b2 = h * h * phi_exp2(gh);
    let c_v = phi_exp1(gh);
    let d = st.x.len();

    let v1: Vec<T> = (0..d).map(|i| st.v[i] + rt * (hh[i] + T::lit(6.0) * kk[i])).collect();
    let noise: Vec<T> = (0..d).map(|i| rt * (x.w[i] - T::lit(12.0) * kk[i])).collect();
    let x1: Vec<T> = (0..d).map(|i| st.x[i] + a1 * v1[i] - b1 * st.grad[i] + b1 / h * noise[i]).collect();
    let mut g1 = vec![T::zero(); d];
    s.potential.grad(&x1, &mut g1);
    let third = T::one() / T::lit(3.0);
    let x_next: Vec<T> = (0..d)
        .map(|i| st.x[i] + a2 * v1[i] - b2 * (third * st.grad[i] + T::lit(2.0) * third * g1[i]) + b2 / h * noise[i])
        .collect();
    let mut g_next = vec![T::zero(); d];
    s.potential.grad(&x_next, &mut g_next);
    let sixth = T::one() / T::lit(6.0);
    for i in 0..d {
        let v2 = e_full * v1[i] - sixth * e_full * st.grad[i] * h - T::lit(2.0) * third * e_half * g1[i] * h - sixth * g_next[i] * h
            + c_v * noise[i];
        st.v[i] = v2 - rt * (hh[i] - T::lit(6.0) * kk[i]);
    }
    st.x = x_next;
    st.grad = g_next;
    super::check_finite(&st.x)?;
    super::check_finite(&st.v)
}

impl<T: Real, P: Potential<T>> Scheme<T> for Sort<P> {
    type State = UldState<T>;

    fn name(&self) -> &'static str {
        "sort"
    }

    fn noise_dim(&self) -> usize {
        self.potential.dim()
    }

    fn needs(&self) -> Needs {
        Needs::WHK
    }

    fn step(&self, st: &mut UldState<T>, x: &StepInputs<T>) -> Result<()> {
        sort_step(self, st, x)
    }

    fn observe(&self, st: &UldState<T>) -> Vec<T> {
        st.x.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Flat;
    impl Potential<f64> for Flat {
        fn dim(&self) -> usize {
            1
        }
        fn grad(&self, _x: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
    }

    #[test]
    fn force_free_noise_free_is_exact_ou_drift() {
        let s = Sort::new(2.0, Flat).unwrap();
        let z = [0.0];
        for &h in &[1e-6, 0.01, 0.5, 3.0] {
            let mut st = s.init(vec![0.3], vec![1.5]);
            sort_step(&s, &mut st, &StepInputs { h, w: &z, hh: Some(&z), k: Some(&z), n: None }).unwrap();
            let e = (-2.0 * h).exp();
            assert!((st.x[0] - (0.3 + (1.0 - e) / 2.0 * 1.5)).abs() < 1e-14);
            assert!((st.v[0] - e * 1.5).abs() < 1e-14);
        }
    }

    #[test]
    fn force_free_map_is_contractive() {
        // deterministic part is [[1, (1 - e^{-gh})/g], [0, e^{-gh}]]:
        // eigenvalues 1 and e^{-gh}
        let s = Sort::new(1.3, Flat).unwrap();
        let z = [0.0];
        for &h in &[1e-5, 0.1, 1.0, 50.0] {
            let mut st = s.init(vec![0.0], vec![1.0]);
            sort_step(&s, &mut st, &StepInputs { h, w: &z, hh: Some(&z), k: Some(&z), n: None }).unwrap();
            let (m01, m11) = (st.x[0], st.v[0]);
            assert!(m11.abs() <= 1.0 && m01.is_finite());
        }
    }

    #[test]
    fn fsal_gradient_count() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        struct Counting(AtomicUsize);
        impl Potential<f64> for Counting {
            fn dim(&self) -> usize {
                1
            }
            fn grad(&self, x: &[f64], out: &mut [f64]) {
                self.0.fetch_add(1, Ordering::Relaxed);
                out[0] = x[0];
            }
        }
        let s = Sort::new(2.0, Counting(AtomicUsize::new(0))).unwrap();
        let mut st = s.init(vec![1.0], vec![0.0]);
        let z = [0.1];
        for _ in 0..10 {
            sort_step(&s, &mut st, &StepInputs { h: 0.1, w: &z, hh: Some(&z), k: Some(&z), n: None }).unwrap();
        }
        assert_eq!(s.potential.0.load(Ordering::Relaxed), 1 + 2 * 10);
    }

    #[test]
    fn invalid_friction() {
        assert!(Sort::new(0.0, Flat).is_err());
        assert!(Sort::new(-1.0, Flat).is_err());
    }
}
