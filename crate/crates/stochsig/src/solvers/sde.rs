//! Generic Runge-Kutta type steps for `dy = f(y) dt + sum_i g_i(y) dW^i`.
//!
//! Euler-Maruyama reads the equation in the Ito sense. Heun and SPaRK read
//! it in the Stratonovich sense. For additive noise the two agree.

use super::{check_finite, Needs, Scheme, StepInputs};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::sst::ralston_aux;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseClass {
    Additive,
    Scalar,
    Diagonal,
    General,
}

/// Models with a specialised treatment somewhere in the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelTag {
    Igbm,
    Uld,
    Fhn,
    Sabr,
    Heston,
    Oscillator,
}

pub trait SdeProblem<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    fn noise_class(&self) -> NoiseClass;
    fn drift(&self, y: &[T], out: &mut [T]);
    /// Column `i` of the diffusion.
    fn diffusion(&self, y: &[T], i: usize, out: &mut [T]);
    fn model_tag(&self) -> Option<ModelTag> {
        None
    }
}

/// Checks by evaluation that the diffusion is the same at every probe point.
pub fn probe_additive<T: Real, P: SdeProblem<T> + ?Sized>(p: &P, probes: &[Vec<T>]) -> bool {
    let e = p.dim();
    let mut a = vec![T::zero(); e];
    let mut b = vec![T::zero(); e];
    (0..p.noise_dim()).all(|i| {
        probes.windows(2).all(|pair| {
            p.diffusion(&pair[0], i, &mut a);
            p.diffusion(&pair[1], i, &mut b);
            a == b
        })
    })
}

fn drift_of<T: Real, P: SdeProblem<T> + ?Sized>(p: &P, y: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); p.dim()];
    p.drift(y, &mut out);
    out
}

/// `sum_i g_i(y) c_i`
fn noise_of<T: Real, P: SdeProblem<T> + ?Sized>(p: &P, y: &[T], c: &[T]) -> Vec<T> {
    let e = p.dim();
    let mut out = vec![T::zero(); e];
    let mut col = vec![T::zero(); e];
    for (i, &ci) in c.iter().enumerate() {
        p.diffusion(y, i, &mut col);
        for (o, &g) in out.iter_mut().zip(&col) {
            *o = *o + g * ci;
        }
    }
    out
}

fn require_additive<T: Real, P: SdeProblem<T> + ?Sized>(p: &P, solver: &'static str) -> Result<()> {
    if p.noise_class() == NoiseClass::Additive {
        Ok(())
    } else {
        Err(Error::WrongNoiseClass { solver })
    }
}

fn lin<T: Real>(y: &[T], terms: &[(T, &[T])]) -> Vec<T> {
    let mut out = y.to_vec();
    for (c, v) in terms {
        for (o, &x) in out.iter_mut().zip(v.iter()) {
            *o = *o + *c * x;
        }
    }
    out
}

pub fn euler_maruyama_step<T: Real, P: SdeProblem<T> + ?Sized>(p: &P, y: &[T], x: &StepInputs<T>) -> Result<Vec<T>> {
    let f = drift_of(p, y);
    let g = noise_of(p, y, x.w);
    let mut out = lin(y, &[(x.h, &f), (T::one(), &g)]);
    if p.model_tag() == Some(ModelTag::Igbm) {
        for v in out.iter_mut() {
            *v = v.max(T::zero());
        }
    }
    check_finite(&out)?;
    Ok(out)
}

pub fn heun_step<T: Real, P: SdeProblem<T> + ?Sized>(p: &P, y: &[T], x: &StepInputs<T>) -> Result<Vec<T>> {
    let half = T::lit(0.5);
    let f0 = drift_of(p, y);
    let g0 = noise_of(p, y, x.w);
    let z = lin(y, &[(x.h, &f0), (T::one(), &g0)]);
    let f1 = drift_of(p, &z);
    let g1 = noise_of(p, &z, x.w);
    let out = lin(y, &[(half * x.h, &f0), (half * x.h, &f1), (half, &g0), (half, &g1)]);
    check_finite(&out)?;
    Ok(out)
}

/// Splitting Path Runge-Kutta.
pub fn spark_step<T: Real, P: SdeProblem<T> + ?Sized>(p: &P, y: &[T], x: &StepInputs<T>) -> Result<Vec<T>> {
    let hh = x.need_h()?;
    let h = x.h;
    let half = T::lit(0.5);
    let r3 = T::lit(3.0).sqrt();
    let a = (T::lit(3.0) - r3) / T::lit(6.0);
    let c_mid: Vec<T> = x.w.iter().zip(hh).map(|(&w, &hv)| half * w + r3 * hv).collect();
    let c_y: Vec<T> = x.w.iter().zip(hh).map(|(&w, &hv)| a * w + hv).collect();
    let c_z: Vec<T> = x.w.iter().zip(hh).map(|(&w, &hv)| a * w - hv).collect();

    let f0 = drift_of(p, y);
    let y_mid = lin(y, &[(half * h, &f0), (T::one(), &noise_of(p, y, &c_mid))]);
    let f_mid = drift_of(p, &y_mid);
    let g_mid_w = noise_of(p, &y_mid, x.w);
    let z = lin(y, &[(h, &f_mid), (T::one(), &g_mid_w)]);
    let f_z = drift_of(p, &z);
    let out = lin(
        y,
        &[
            (a * h, &f0),
            (a * h, &f_z),
            (r3 / T::lit(3.0) * h, &f_mid),
            (r3 / T::lit(3.0), &g_mid_w),
            (T::one(), &noise_of(p, y, &c_y)),
            (T::one(), &noise_of(p, &z, &c_z)),
        ],
    );
    check_finite(&out)?;
    Ok(out)
}

pub fn sra1_step<T: Real, P: SdeProblem<T> + ?Sized>(p: &P, y: &[T], x: &StepInputs<T>) -> Result<Vec<T>> {
    require_additive(p, "SRA1")?;
    let hh = x.need_h()?;
    let q = T::lit(0.75);
    let shift: Vec<T> = x.w.iter().zip(hh).map(|(&w, &hv)| q * (w + T::lit(2.0) * hv)).collect();
    let f0 = drift_of(p, y);
    let y34 = lin(y, &[(q * x.h, &f0), (T::one(), &noise_of(p, y, &shift))]);
    let f1 = drift_of(p, &y34);
    let out = lin(y, &[(x.h / T::lit(3.0), &f0), (T::lit(2.0) / T::lit(3.0) * x.h, &f1), (T::one(), &noise_of(p, y, x.w))]);
    check_finite(&out)?;
    Ok(out)
}

pub fn shifted_euler_step<T: Real, P: SdeProblem<T> + ?Sized>(p: &P, y: &[T], x: &StepInputs<T>) -> Result<Vec<T>> {
    require_additive(p, "shifted Euler")?;
    let hh = x.need_h()?;
    let shift: Vec<T> = x.w.iter().zip(hh).map(|(&w, &hv)| T::lit(0.5) * w + hv).collect();
    let ys = lin(y, &[(T::one(), &noise_of(p, y, &shift))]);
    let out = lin(y, &[(x.h, &drift_of(p, &ys)), (T::one(), &noise_of(p, y, x.w))]);
    check_finite(&out)?;
    Ok(out)
}

pub fn shifted_ralston_step<T: Real, P: SdeProblem<T> + ?Sized>(p: &P, y: &[T], x: &StepInputs<T>) -> Result<Vec<T>> {
    require_additive(p, "shifted Ralston")?;
    let hh = x.need_h()?;
    let n = x.need_n()?;
    let aux = ralston_aux(x.w, hh, n, x.h);
    let half = T::lit(0.5);
    let shift: Vec<T> = (0..x.w.len()).map(|i| half * x.w[i] + hh[i] - half * aux.c[i]).collect();
    let sc = noise_of(p, y, &aux.c);
    let y1 = lin(y, &[(T::one(), &noise_of(p, y, &shift))]);
    let f1 = drift_of(p, &y1);
    let two_thirds = T::lit(2.0) / T::lit(3.0);
    let y23 = lin(&y1, &[(two_thirds * x.h, &f1), (two_thirds, &sc)]);
    let f2 = drift_of(p, &y23);
    let out = lin(y, &[(T::lit(0.25) * x.h, &f1), (T::lit(0.75) * x.h, &f2), (T::one(), &noise_of(p, y, x.w))]);
    check_finite(&out)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenericMethod {
    EulerMaruyama,
    Heun,
    Spark,
    Sra1,
    ShiftedEuler,
    ShiftedRalston,
}

impl GenericMethod {
    pub fn name(self) -> &'static str {
        match self {
            GenericMethod::EulerMaruyama => "euler",
            GenericMethod::Heun => "heun",
            GenericMethod::Spark => "spark",
            GenericMethod::Sra1 => "sra1",
            GenericMethod::ShiftedEuler => "shifted_euler",
            GenericMethod::ShiftedRalston => "shifted_ralston",
        }
    }

    pub fn needs(self) -> Needs {
        match self {
            GenericMethod::EulerMaruyama | GenericMethod::Heun => Needs::W,
            GenericMethod::Spark | GenericMethod::Sra1 | GenericMethod::ShiftedEuler => Needs::WH,
            GenericMethod::ShiftedRalston => Needs::WHN,
        }
    }
}

/// A generic method bound to a problem.
#[derive(Debug, Clone)]
pub struct Generic<P> {
    pub problem: P,
    pub method: GenericMethod,
}

impl<T: Real, P: SdeProblem<T>> Scheme<T> for Generic<P> {
    type State = Vec<T>;

    fn name(&self) -> &'static str {
        self.method.name()
    }

    fn noise_dim(&self) -> usize {
        self.problem.noise_dim()
    }

    fn needs(&self) -> Needs {
        self.method.needs()
    }

    fn step(&self, y: &mut Vec<T>, x: &StepInputs<T>) -> Result<()> {
        let p = &self.problem;
        *y = match self.method {
            GenericMethod::EulerMaruyama => euler_maruyama_step(p, y, x)?,
            GenericMethod::Heun => heun_step(p, y, x)?,
            GenericMethod::Spark => spark_step(p, y, x)?,
            GenericMethod::Sra1 => sra1_step(p, y, x)?,
            GenericMethod::ShiftedEuler => shifted_euler_step(p, y, x)?,
            GenericMethod::ShiftedRalston => shifted_ralston_step(p, y, x)?,
        };
        Ok(())
    }

    fn observe(&self, y: &Vec<T>) -> Vec<T> {
        y.clone()
    }
}

/// `dy = sin(y) dt + sigma dW`.
#[derive(Debug, Clone, Copy)]
pub struct Oscillator<T> {
    pub sigma: T,
}

impl<T: Real> SdeProblem<T> for Oscillator<T> {
    fn dim(&self) -> usize {
        1
    }
    fn noise_dim(&self) -> usize {
        1
    }
    fn noise_class(&self) -> NoiseClass {
        NoiseClass::Additive
    }
    fn drift(&self, y: &[T], out: &mut [T]) {
        out[0] = y[0].sin();
    }
    fn diffusion(&self, _y: &[T], _i: usize, out: &mut [T]) {
        out[0] = self.sigma;
    }
    fn model_tag(&self) -> Option<ModelTag> {
        Some(ModelTag::Oscillator)
    }
}

/// Problem built from closures, handy for tests and one-off models.
pub struct FnProblem<T, F, G> {
    pub dim: usize,
    pub noise_dim: usize,
    pub class: NoiseClass,
    pub f: F,
    pub g: G,
    pub _scalar: std::marker::PhantomData<T>,
}

impl<T, F, G> FnProblem<T, F, G> {
    pub fn new(dim: usize, noise_dim: usize, class: NoiseClass, f: F, g: G) -> Self {
        FnProblem { dim, noise_dim, class, f, g, _scalar: std::marker::PhantomData }
    }
}

impl<T, F, G> SdeProblem<T> for FnProblem<T, F, G>
where
    T: Real,
    F: Fn(&[T], &mut [T]) + Sync,
    G: Fn(&[T], usize, &mut [T]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn noise_dim(&self) -> usize {
        self.noise_dim
    }
    fn noise_class(&self) -> NoiseClass {
        self.class
    }
    fn drift(&self, y: &[T], out: &mut [T]) {
        (self.f)(y, out)
    }
    fn diffusion(&self, y: &[T], i: usize, out: &mut [T]) {
        (self.g)(y, i, out)
    }
}
