//! Conditional estimators of the space-space-time Levy area `L` and the
//! auxiliary variables of the shifted Runge-Kutta and splitting schemes.

use crate::error::{Error, Result};
use crate::real::{sgn, Real};

/// Symmetric `d x d` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SstMatrix<T> {
    pub d: usize,
    pub h: T,
    l: Vec<T>,
}

impl<T: Real> SstMatrix<T> {
    pub fn from_fn(d: usize, h: T, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut l = vec![T::zero(); d * d];
        for i in 0..d {
            for j in i..d {
                let v = f(i, j);
                l[i * d + j] = v;
                l[j * d + i] = v;
            }
        }
        SstMatrix { d, h, l }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.l[i * self.d + j]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.d).all(|i| (0..self.d).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Conditioned on `(W, H)`.
    Wh,
    /// Conditioned on `(W, H, K)`.
    Whk,
    /// Conditioned on `(W, H, n)`.
    Whn,
}

/// Brownian information available over one step.
#[derive(Debug, Clone, Copy)]
pub struct SstInputs<'a, T> {
    pub h: T,
    pub w: &'a [T],
    pub hh: &'a [T],
    pub k: Option<&'a [T]>,
    pub n: Option<&'a [T]>,
}

impl<'a, T: Real> SstInputs<'a, T> {
    pub fn wh(h: T, w: &'a [T], hh: &'a [T]) -> Self {
        SstInputs { h, w, hh, k: None, n: None }
    }

    fn need_k(&self) -> Result<&'a [T]> {
        self.k.ok_or(Error::MissingInput("K"))
    }

    fn need_n(&self) -> Result<&'a [T]> {
        self.n.ok_or(Error::MissingInput("n"))
    }
}

fn sqrt_6pi<T: Real>() -> T {
    (T::lit(6.0) * T::PI()).sqrt()
}

/// `E[L | ...]` for the chosen conditioning.
pub fn l_mean<T: Real>(kind: EstimatorKind, x: &SstInputs<T>) -> Result<SstMatrix<T>> {
    let h = x.h;
    let h2 = h * h;
    let d = x.w.len();
    let (w, hh) = (x.w, x.hh);
    let three_fifths = T::lit(0.6);
    Ok(match kind {
        EstimatorKind::Wh => SstMatrix::from_fn(d, h, |i, j| {
            let diag = if i == j { h2 / T::lit(30.0) } else { T::zero() };
            three_fifths * h * hh[i] * hh[j] + diag
        }),
        EstimatorKind::Whk => {
            let k = x.need_k()?;
            SstMatrix::from_fn(d, h, |i, j| {
                let diag = if i == j { T::lit(3.0 / 140.0) * h2 } else { T::zero() };
                three_fifths * h * hh[i] * hh[j] - h * T::lit(0.5) * (w[i] * k[j] + k[i] * w[j])
                    + T::lit(60.0 / 7.0) * h * k[i] * k[j]
                    + diag
            })
        }
        EstimatorKind::Whn => {
            let n = x.need_n()?;
            let h32 = h * h.sqrt();
            let s = sqrt_6pi::<T>();
            SstMatrix::from_fn(d, h, |i, j| {
                if i == j {
                    three_fifths * h * hh[i] * hh[i] - w[i] * n[i] * h32 / (T::lit(8.0) * s) + h2 / T::lit(30.0)
                } else {
                    three_fifths * h * hh[i] * hh[j] - (w[i] * n[j] + n[i] * w[j]) * h32 / (T::lit(16.0) * s)
                        + h2 * n[i] * n[j] / (T::lit(40.0) * T::PI())
                }
            })
        }
    })
}

/// `Var(L | ...)` entrywise.
pub fn l_var<T: Real>(kind: EstimatorKind, x: &SstInputs<T>) -> Result<SstMatrix<T>> {
    let h = x.h;
    let h3 = h * h * h;
    let h4 = h3 * h;
    let d = x.w.len();
    let (w, hh) = (x.w, x.hh);
    let pi = T::PI();
    Ok(match kind {
        EstimatorKind::Wh => SstMatrix::from_fn(d, h, |i, j| {
            let v = if i == j { T::lit(11.0 / 25200.0) } else { T::lit(1.0 / 900.0) } * h4;
            v + h3 / T::lit(1440.0) * (w[i] * w[i] + w[j] * w[j]) + h3 / T::lit(1400.0) * (hh[i] * hh[i] + hh[j] * hh[j])
        }),
        EstimatorKind::Whk => {
            let k = x.need_k()?;
            SstMatrix::from_fn(d, h, |i, j| {
                let v = if i == j { T::lit(11.0 / 88200.0) } else { T::lit(9.0 / 19600.0) } * h4;
                v + h3 / T::lit(1400.0) * (hh[i] * hh[i] + hh[j] * hh[j]) + h3 / T::lit(98.0) * (k[i] * k[i] + k[j] * k[j])
            })
        }
        EstimatorKind::Whn => {
            let n = x.need_n()?;
            let h72 = h3 * h.sqrt();
            let s = sqrt_6pi::<T>();
            SstMatrix::from_fn(d, h, |i, j| {
                if i == j {
                    // the W^2 term carries h^3 so that every term scales like h^4
                    T::lit(11.0 / 25200.0) * h4
                        + (T::lit(1.0 / 720.0) - T::one() / (T::lit(384.0) * pi)) * h3 * w[i] * w[i]
                        + h3 * hh[i] * hh[i] / T::lit(700.0)
                        - w[i] * n[i] * h72 / (T::lit(320.0) * s)
                } else {
                    (T::lit(1.0 / 2880.0) - T::one() / (T::lit(1600.0) * pi * pi)) * h4
                        + (T::lit(17.0 / 46080.0) - T::one() / (T::lit(1536.0) * pi)) * h3 * (w[i] * w[i] + w[j] * w[j])
                        + h3 / T::lit(1792.0) * (hh[i] * hh[i] + hh[j] * hh[j])
                        - (T::one() - T::lit(2.0) / pi) * (w[i] * n[i] + w[j] * n[j]) * h72 / (T::lit(640.0) * s)
                }
            })
        }
    })
}

/// Mean and per-coordinate variance of `K` given the swing.
pub fn k_given_n<T: Real>(n: &[T], h: T) -> (Vec<T>, T) {
    let scale = h.sqrt() / (T::lit(8.0) * sqrt_6pi::<T>());
    let var = (T::lit(1.0 / 720.0) - T::one() / (T::lit(384.0) * T::PI())) * h;
    (n.iter().map(|&x| x * scale).collect(), var)
}

/// Estimate of `int W^i W^j dt` built from an estimate of `L`.
pub fn square_time_integral<T: Real>(kind: EstimatorKind, x: &SstInputs<T>) -> Result<SstMatrix<T>> {
    let l = l_mean(kind, x)?;
    let h = x.h;
    let (w, hh) = (x.w, x.hh);
    Ok(SstMatrix::from_fn(w.len(), h, |i, j| {
        h * w[i] * w[j] / T::lit(3.0) + h * T::lit(0.5) * (w[i] * hh[j] + hh[i] * w[j]) + T::lit(2.0) * l.get(i, j)
    }))
}

/// The value a high order Strang splitting implicitly uses for `L`.
/// A comparison value only; it is not a conditional expectation.
pub fn strang_sst_approx<T: Real>(h: T, w: &[T], hh: &[T]) -> SstMatrix<T> {
    let r3 = T::lit(3f64.sqrt());
    SstMatrix::from_fn(w.len(), h, |i, j| {
        (T::lit(2.0) - r3) / T::lit(24.0) * h * w[i] * w[j] + r3 / T::lit(2.0) * h * hh[i] * hh[j]
    })
}

/// Auxiliary `C` with its sign `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxC<T> {
    pub c: Vec<T>,
    pub eps: Vec<T>,
    /// How many radicands were negative and clamped to zero.
    pub clamps: usize,
}

fn aux_with<T: Real>(w: &[T], hh: &[T], n: &[T], h: T, coef: [T; 4]) -> AuxC<T> {
    let rh = h.sqrt();
    let eps_shift = T::lit(3.0) / (T::lit(24.0) * T::PI()).sqrt() * rh;
    let mut clamps = 0;
    let mut c = Vec::with_capacity(w.len());
    let mut eps = Vec::with_capacity(w.len());
    for i in 0..w.len() {
        let e = sgn(w[i] - eps_shift * n[i]);
        let mut rad = coef[0] * w[i] * w[i] + coef[1] * hh[i] * hh[i] + coef[2] * h - coef[3] * rh * n[i] * w[i];
        if rad < T::zero() {
            clamps += 1;
            rad = T::zero();
        }
        c.push(e * rad.sqrt());
        eps.push(e);
    }
    AuxC { c, eps, clamps }
}

/// `C` of the shifted Ralston method.
pub fn ralston_aux<T: Real>(w: &[T], hh: &[T], n: &[T], h: T) -> AuxC<T> {
    let coef = [T::one(), T::lit(12.0 / 5.0), T::lit(4.0 / 5.0), T::lit(3.0) / sqrt_6pi::<T>()];
    aux_with(w, hh, n, h, coef)
}

/// `C-bar` of the high order FitzHugh-Nagumo splitting.
pub fn fhn_aux<T: Real>(w: &[T], hh: &[T], n: &[T], h: T) -> AuxC<T> {
    let coef = [T::lit(1.0 / 3.0), T::lit(4.0 / 5.0), T::lit(4.0 / 15.0), T::one() / sqrt_6pi::<T>()];
    aux_with(w, hh, n, h, coef)
}
