//! Inhomogeneous geometric Brownian motion `dy = a(b - y) dt + sigma y dW`.

use std::sync::OnceLock;

use super::sde::{ModelTag, NoiseClass, SdeProblem};
use super::{phi_expm1, Needs, Scheme, StepInputs};
use crate::error::{invalid, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgbmParams<T> {
    pub a: T,
    pub b: T,
    pub sigma: T,
}

impl<T: Real> IgbmParams<T> {
    pub fn new(a: T, b: T, sigma: T) -> Result<Self> {
        if !(a >= T::zero()) || !(sigma >= T::zero()) || !b.is_finite() {
            return Err(invalid("IGBM needs a >= 0, sigma >= 0 and finite b"));
        }
        Ok(IgbmParams { a, b, sigma })
    }

    /// Stratonovich drift rate `a + sigma^2 / 2`.
    pub fn a_tilde(&self) -> T {
        self.a + self.sigma * self.sigma * T::lit(0.5)
    }

    /// Stratonovich mean level `2ab / (2a + sigma^2)`.
    pub fn b_tilde(&self) -> T {
        T::lit(2.0) * self.a * self.b / (T::lit(2.0) * self.a + self.sigma * self.sigma)
    }
}

impl<T: Real> SdeProblem<T> for IgbmParams<T> {
    fn dim(&self) -> usize {
        1
    }
    fn noise_dim(&self) -> usize {
        1
    }
    fn noise_class(&self) -> NoiseClass {
        NoiseClass::Scalar
    }
    fn drift(&self, y: &[T], out: &mut [T]) {
        out[0] = self.a * (self.b - y[0]);
    }
    fn diffusion(&self, y: &[T], _i: usize, out: &mut [T]) {
        out[0] = self.sigma * y[0];
    }
    fn model_tag(&self) -> Option<ModelTag> {
        Some(ModelTag::Igbm)
    }
}

fn gauss_legendre_16() -> &'static [(f64, f64); 16] {
    static RULE: OnceLock<[(f64, f64); 16]> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 16;
        let mut rule = [(0.0, 0.0); N];
        for (k, slot) in rule.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=N {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

/// `int_0^h e^{a s - sigma What_s} ds` along the parabola
/// `What_s = (s/h) W + 6 (s/h)(1 - s/h) H`.
pub fn parabola_integral<T: Real>(a_tilde: T, sigma: T, h: T, w: T, hh: T) -> T {
    let half = T::lit(0.5);
    gauss_legendre_16()
        .iter()
        .map(|&(x, wt)| {
            let u = half * (T::lit(x) + T::one());
            let s = u * h;
            let path = u * w + T::lit(6.0) * u * (T::one() - u) * hh;
            T::lit(wt) * half * h * (a_tilde * s - sigma * path).exp()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgbmMethod {
    EulerMaruyama,
    Milstein,
    LogOde,
    ParabolaOde,
    LinearOde,
}

impl IgbmMethod {
    pub fn name(self) -> &'static str {
        match self {
            IgbmMethod::EulerMaruyama => "euler",
            IgbmMethod::Milstein => "milstein",
            IgbmMethod::LogOde => "log_ode",
            IgbmMethod::ParabolaOde => "parabola_ode",
            IgbmMethod::LinearOde => "linear_ode",
        }
    }

    pub fn all() -> [IgbmMethod; 5] {
        [IgbmMethod::LogOde, IgbmMethod::ParabolaOde, IgbmMethod::LinearOde, IgbmMethod::Milstein, IgbmMethod::EulerMaruyama]
    }
}

pub fn igbm_euler_step<T: Real>(p: &IgbmParams<T>, y: T, h: T, w: T) -> T {
    (y + p.a * (p.b - y) * h + p.sigma * y * w).max(T::zero())
}

pub fn igbm_milstein_step<T: Real>(p: &IgbmParams<T>, y: T, h: T, w: T) -> T {
    let s = p.sigma;
    (y + p.a_tilde() * (p.b_tilde() - y) * h + s * y * w + T::lit(0.5) * s * s * y * w * w).max(T::zero())
}

pub fn igbm_linear_step<T: Real>(p: &IgbmParams<T>, y: T, h: T, w: T) -> T {
    let x = -p.a_tilde() * h + p.sigma * w;
    x.exp() * y + p.a * p.b * h * phi_expm1(x)
}

pub fn igbm_log_ode_step<T: Real>(p: &IgbmParams<T>, y: T, h: T, w: T, hh: T) -> T {
    let s = p.sigma;
    let x = -p.a_tilde() * h + s * w;
    let phi = phi_expm1(x);
    let ab = p.a * p.b;
    let sst = T::lit(0.6) * h * hh * hh + h * h / T::lit(30.0);
    x.exp() * y + ab * h * (T::one() - s * hh) * phi + ab * s * s * sst * phi
}

pub fn igbm_parabola_step<T: Real>(p: &IgbmParams<T>, y: T, h: T, w: T, hh: T) -> T {
    let at = p.a_tilde();
    (-at * h + p.sigma * w).exp() * (y + p.a * p.b * parabola_integral(at, p.sigma, h, w, hh))
}

#[derive(Debug, Clone, Copy)]
pub struct Igbm<T> {
    pub params: IgbmParams<T>,
    pub method: IgbmMethod,
}

impl<T: Real> Scheme<T> for Igbm<T> {
    type State = T;

    fn name(&self) -> &'static str {
        self.method.name()
    }

    fn noise_dim(&self) -> usize {
        1
    }

    fn needs(&self) -> Needs {
        match self.method {
            IgbmMethod::LogOde | IgbmMethod::ParabolaOde => Needs::WH,
            _ => Needs::W,
        }
    }

    fn step(&self, y: &mut T, x: &StepInputs<T>) -> Result<()> {
        let (h, w) = (x.h, x.w[0]);
        let p = &self.params;
        *y = match self.method {
            IgbmMethod::EulerMaruyama => igbm_euler_step(p, *y, h, w),
            IgbmMethod::Milstein => igbm_milstein_step(p, *y, h, w),
            IgbmMethod::LinearOde => igbm_linear_step(p, *y, h, w),
            IgbmMethod::LogOde => igbm_log_ode_step(p, *y, h, w, x.need_h()?[0]),
            IgbmMethod::ParabolaOde => igbm_parabola_step(p, *y, h, w, x.need_h()?[0]),
        };
        super::check_finite(std::slice::from_ref(y))
    }

    fn observe(&self, y: &T) -> Vec<T> {
        vec![*y]
    }
}
