//! Simplified SABR model `dS = sigma dW^1`, `d sigma = sigma dW^2`, written
//! in Stratonovich form for Heun and SPaRK.

use super::sde::{ModelTag, NoiseClass, SdeProblem};
use crate::error::{invalid, Result};
use crate::real::Real;

/// State `(S, sigma)`. The Ito-to-Stratonovich correction gives drift
/// `(0, -sigma / 2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sabr;

impl<T: Real> SdeProblem<T> for Sabr {
    fn dim(&self) -> usize {
        2
    }
    fn noise_dim(&self) -> usize {
        2
    }
    fn noise_class(&self) -> NoiseClass {
        NoiseClass::Diagonal
    }
    fn drift(&self, y: &[T], out: &mut [T]) {
        out[0] = T::zero();
        out[1] = -y[1] * T::lit(0.5);
    }
    fn diffusion(&self, y: &[T], i: usize, out: &mut [T]) {
        out[0] = if i == 0 { y[1] } else { T::zero() };
        out[1] = if i == 1 { y[1] } else { T::zero() };
    }
    fn model_tag(&self) -> Option<ModelTag> {
        Some(ModelTag::Sabr)
    }
}

/// Previsible step `h(sigma) = log(1 + C / sigma^2)`.
pub fn previsible_step<T: Real>(sigma: T, c: T) -> Result<T> {
    if !(sigma > T::zero()) || !(c > T::zero()) {
        return Err(invalid("previsible step needs sigma > 0 and C > 0"));
    }
    Ok((c / (sigma * sigma)).ln_1p())
}
