//! Moment-matched weak sampling of space-space Levy area.

use std::str::FromStr;

use crate::brownian::WhkSample;
use crate::error::{invalid, Error, Result};
use crate::real::Real;
use crate::rng::RandomStream;

/// Antisymmetric `d x d` area matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaMatrix<T> {
    pub d: usize,
    pub h: T,
    a: Vec<T>,
}

impl<T: Real> AreaMatrix<T> {
    pub fn zeros(d: usize, h: T) -> Self {
        AreaMatrix { d, h, a: vec![T::zero(); d * d] }
    }

    /// Builds from a closure evaluated for `i < j`; the lower triangle is its negation.
    pub fn from_upper(d: usize, h: T, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(d, h);
        for i in 0..d {
            for j in i + 1..d {
                m.set_upper(i, j, f(i, j));
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.a[i * self.d + j]
    }

    /// Sets entry `(i, j)` and `(j, i)` to `v` and `-v`.
    pub fn set_upper(&mut self, i: usize, j: usize, v: T) {
        assert!(i != j, "diagonal of an area matrix is fixed at zero");
        self.a[i * self.d + j] = v;
        self.a[j * self.d + i] = -v;
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.d).all(|i| {
            self.get(i, i) == T::zero() && (0..self.d).all(|j| self.get(i, j) == -self.get(j, i))
        })
    }

    fn add(&self, other: &Self) -> Self {
        AreaMatrix { d: self.d, h: self.h + other.h, a: self.a.iter().zip(&other.a).map(|(&x, &y)| x + y).collect() }
    }
}

/// Constants of the weak approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakAreaConstants<T> {
    /// Probability of the uniform branch of `xi`.
    pub p: T,
    pub c: T,
    pub exp_rate: T,
}

impl<T: Real> Default for WeakAreaConstants<T> {
    fn default() -> Self {
        WeakAreaConstants {
            p: T::lit(21130.0 / 25621.0),
            c: T::lit(3f64.sqrt() / 3.0 - 8.0 / 15.0),
            exp_rate: T::lit(15.0 / 8.0),
        }
    }
}

impl<T: Real> WeakAreaConstants<T> {
    /// `E[xi^4]` of the mixture.
    pub fn xi_fourth_moment(&self) -> T {
        // uniform on [-sqrt3, sqrt3] has fourth moment 9/5
        self.p * T::lit(9.0 / 5.0) + (T::one() - self.p)
    }

    /// `E|xi|`.
    pub fn xi_abs_mean(&self) -> T {
        self.p * T::lit(3f64.sqrt() / 2.0) + (T::one() - self.p)
    }

    /// `E[xi^ij xi^jk xi^kl xi^li]` for the subtly correlated matrix,
    /// i.e. `(E|xi|)^4 / 3`.
    pub fn modified_xi_four_cycle(&self) -> T {
        self.xi_abs_mean().powi(4) / T::lit(3.0)
    }
}

/// One draw of the mixture `xi`: uniform on `[-sqrt3, sqrt3]` with
/// probability `p`, otherwise a Rademacher sign.
pub fn sample_xi<T: Real>(k: &WeakAreaConstants<T>, stream: &mut RandomStream) -> T {
    if T::lit(stream.uniform()) < k.p {
        T::lit(3f64.sqrt() * (2.0 * stream.uniform() - 1.0))
    } else {
        stream.rademacher()
    }
}

fn sigmas<T: Real>(whk: &WhkSample<T>, k: &WeakAreaConstants<T>, stream: &mut RandomStream) -> Vec<T> {
    let d = whk.dim();
    let h = whk.interval.h();
    let cs: Vec<T> = (0..d).map(|_| stream.exponential_unchecked(k.exp_rate) + k.c).collect();
    let twelve = T::lit(12.0);
    let mut out = vec![T::zero(); d * d];
    for i in 0..d {
        for j in i + 1..d {
            let ki = twelve * whk.k_area[i];
            let kj = twelve * whk.k_area[j];
            let var = T::lit(3.0 / 28.0) * cs[i] * cs[j] * h * h + h / T::lit(28.0) * (ki * ki + kj * kj);
            let s = var.sqrt();
            out[i * d + j] = s;
            out[j * d + i] = s;
        }
    }
    out
}

/// `H (x) W - W (x) H + 12 (K (x) H - H (x) K)`, the conditional mean given `(W, H, K)`.
pub fn area_mean_given_whk<T: Real>(whk: &WhkSample<T>) -> AreaMatrix<T> {
    let twelve = T::lit(12.0);
    let (w, hh, k) = (&whk.w, &whk.h_area, &whk.k_area);
    AreaMatrix::from_upper(whk.dim(), whk.interval.h(), |i, j| {
        hh[i] * w[j] - w[i] * hh[j] + twelve * (k[i] * hh[j] - hh[i] * k[j])
    })
}

/// Weak approximation of the Levy area given `(W, H, K)`.
///
/// One vector of exponentials is drawn per call and shared by all pairs.
pub fn weak_levy_area<T: Real>(whk: &WhkSample<T>, stream: &mut RandomStream) -> AreaMatrix<T> {
    let k = WeakAreaConstants::default();
    let d = whk.dim();
    let sig = sigmas(whk, &k, stream);
    let mut area = area_mean_given_whk(whk);
    for i in 0..d {
        for j in i + 1..d {
            let v = area.get(i, j) + sig[i * d + j] * sample_xi(&k, stream);
            area.set_upper(i, j, v);
        }
    }
    area
}

/// Signs `Z^{ij}`, `i < j`, of the subtly correlated matrix (0-based indices).
pub fn subtle_signs<T: Real>(stream: &mut RandomStream) -> [[T; 4]; 4] {
    let z12: T = stream.rademacher();
    let z13: T = stream.rademacher();
    let z14: T = stream.rademacher();
    let z23: T = stream.rademacher();
    let (u1, u2) = stream.three_point_uniform::<T>();
    let z24 = z23 * z13 * z14 * u1;
    let z34 = z23 * z12 * z14 * u2;
    let o = T::zero();
    let mut z = [[o; 4]; 4];
    let upper = [(0, 1, z12), (0, 2, z13), (0, 3, z14), (1, 2, z23), (1, 3, z24), (2, 3, z34)];
    for (i, j, v) in upper {
        z[i][j] = v;
        z[j][i] = -v;
    }
    z
}

/// Weak approximation for `d = 4` whose signs are correlated so that the
/// four-cycle moment is positive.
pub fn modified_weak_levy_area_d4<T: Real>(whk: &WhkSample<T>, stream: &mut RandomStream) -> Result<AreaMatrix<T>> {
    if whk.dim() != 4 {
        return Err(invalid(format!("modified weak area needs d = 4, got {}", whk.dim())));
    }
    let k = WeakAreaConstants::default();
    let sig = sigmas(whk, &k, stream);
    let z = subtle_signs::<T>(stream);
    let mut area = area_mean_given_whk(whk);
    for i in 0..4 {
        for j in i + 1..4 {
            let mag = sample_xi(&k, stream).abs();
            // lower entry (j, i) is sigma * xi_hat^{ji} = sigma * |xi| * Z^{ij}
            let lower = sig[i * 4 + j] * mag * z[i][j];
            let v = area.get(i, j) - lower;
            area.set_upper(i, j, v);
        }
    }
    Ok(area)
}

/// Area over `[s, t]` from the areas and increments of its two halves.
pub fn two_step_area<T: Real>(
    w_left: &[T],
    w_right: &[T],
    area_left: &AreaMatrix<T>,
    area_right: &AreaMatrix<T>,
) -> Result<AreaMatrix<T>> {
    let d = area_left.d;
    if area_right.d != d || w_left.len() != d || w_right.len() != d {
        return Err(Error::IntervalMismatch("dimension differs between halves".into()));
    }
    let mut out = area_left.add(area_right);
    let half = T::lit(0.5);
    for i in 0..d {
        for j in i + 1..d {
            let v = out.get(i, j) + half * (w_left[i] * w_right[j] - w_right[i] * w_left[j]);
            out.set_upper(i, j, v);
        }
    }
    Ok(out)
}

/// Closed-form moments used as test oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    /// `E[b^2]` of the bridge area.
    VarBridge,
    FourthBridge,
    /// `E[(b^ij)^2 (b^jk)^2]`.
    CrossBridge,
    /// `E[b^ij b^jk b^kl b^li]`.
    FourCycleBridge,
    /// `E[H^i H^k b^ij b^jk]` for distinct `i, j, k`.
    HhBridgeCross,
    /// `E[a^2]` of the arch area.
    VarArch,
    FourthArch,
    /// `E[c^2]` of the cubic-bridge area.
    VarCubic,
    VarArea,
    /// Four-cycle of the standard weak bridge approximation.
    FourCycleTilde,
}

impl FromStr for MomentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "var_bridge" => MomentKind::VarBridge,
            "fourth_bridge" => MomentKind::FourthBridge,
            "cross_bridge" => MomentKind::CrossBridge,
            "four_cycle_bridge" => MomentKind::FourCycleBridge,
            "hh_bridge_cross" => MomentKind::HhBridgeCross,
            "var_arch" => MomentKind::VarArch,
            "fourth_arch" => MomentKind::FourthArch,
            "var_cubic" => MomentKind::VarCubic,
            "var_area" => MomentKind::VarArea,
            "four_cycle_tilde" => MomentKind::FourCycleTilde,
            other => return Err(invalid(format!("unknown moment kind `{other}`"))),
        })
    }
}

pub fn area_moment_oracle<T: Real>(kind: MomentKind, h: T) -> T {
    let h2 = h * h;
    let h4 = h2 * h2;
    match kind {
        MomentKind::VarBridge => h2 / T::lit(12.0),
        MomentKind::FourthBridge => T::lit(7.0 / 240.0) * h4,
        MomentKind::CrossBridge => T::lit(7.0 / 720.0) * h4,
        MomentKind::FourCycleBridge => h4 / T::lit(720.0),
        // the power of h is three: H scales like h^(1/2) and b like h
        MomentKind::HhBridgeCross => -(h2 * h) / T::lit(720.0),
        MomentKind::VarArch => h2 / T::lit(20.0),
        MomentKind::FourthArch => T::lit(27.0 / 2800.0) * h4,
        MomentKind::VarCubic => h2 / T::lit(28.0),
        MomentKind::VarArea => h2 / T::lit(4.0),
        MomentKind::FourCycleTilde => h4 / T::lit(1800.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CondMoment {
    Mean,
    Var,
    Kurt,
}

/// Moments of `A^{ij}` given `(W, H)`.
pub fn cond_moment_fns<T: Real>(w: &[T], hh: &[T], h: T, i: usize, j: usize, moment: CondMoment) -> Result<T> {
    if i == j {
        return Err(invalid("conditional area moments need i != j"));
    }
    let hsq = hh[i] * hh[i] + hh[j] * hh[j];
    let var = h * h / T::lit(20.0) + h / T::lit(5.0) * hsq;
    Ok(match moment {
        CondMoment::Mean => hh[i] * w[j] - hh[j] * w[i],
        CondMoment::Var => var,
        CondMoment::Kurt => {
            let excess = T::lit(3.0 / 1400.0) * h * h + T::lit(3.0 / 175.0) * h * hsq;
            T::lit(3.0) + excess / (var * var)
        }
    })
}

/// Scale of the logistic law of the bridge area.
///
/// `h / (2 pi)` is the scale whose variance `pi^2 s^2 / 3` equals `h^2 / 12`
/// and whose fourth moment `7 pi^4 s^4 / 15` equals `7 h^4 / 240`.
pub fn bridge_area_scale<T: Real>(h: T) -> T {
    h / (T::lit(2.0) * T::PI())
}

/// CDF of the bridge area, a logistic law with scale [`bridge_area_scale`].
pub fn bridge_area_cdf<T: Real>(x: T, h: T) -> Result<T> {
    if !(h > T::zero()) {
        return Err(invalid("bridge area law needs h > 0"));
    }
    Ok(logistic_cdf(x, bridge_area_scale(h)))
}

pub fn logistic_cdf<T: Real>(x: T, scale: T) -> T {
    T::one() / (T::one() + (-x / scale).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::{generate_whk, Interval};
    use crate::rng::SeedSpec;
    use crate::stats::mean_se;

    fn whk(w: Vec<f64>, hh: Vec<f64>, k: Vec<f64>) -> WhkSample<f64> {
        WhkSample { interval: Interval::of_length(1.0).unwrap(), w, h_area: hh, k_area: k }
    }

    #[test]
    fn one_dimensional_area_is_zero() {
        let mut s = SeedSpec::new(0).stream();
        let a = weak_levy_area(&whk(vec![0.3], vec![0.1], vec![0.01]), &mut s);
        assert_eq!(a.get(0, 0), 0.0);
    }

    #[test]
    fn constants() {
        let k = WeakAreaConstants::<f64>::default();
        assert!(k.p > 0.0 && k.p < 1.0 && k.c > 0.0);
        assert!((k.xi_fourth_moment() - 42525.0 / 25621.0).abs() < 1e-15);
        // mean of C + c is sqrt(3)/3
        assert!((1.0 / k.exp_rate + k.c - 3f64.sqrt() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn modified_needs_d4() {
        let mut s = SeedSpec::new(0).stream();
        assert!(modified_weak_levy_area_d4(&whk(vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]), &mut s).is_err());
    }

    #[test]
    fn conditional_mean_of_weak_area() {
        let sample = whk(vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]);
        let mut s = SeedSpec::new(1).stream();
        let xs: Vec<f64> = (0..200_000).map(|_| weak_levy_area(&sample, &mut s).get(0, 1)).collect();
        assert!(mean_se(&xs).within(-1.0, 5.0));
    }

    #[test]
    fn weak_arch_variance() {
        let mut s = SeedSpec::new(2).stream();
        let iv = Interval::of_length(1.0).unwrap();
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| {
                let x = generate_whk(iv, 2, &mut s).unwrap();
                let m = area_mean_given_whk(&x).get(0, 1);
                let a = weak_levy_area(&x, &mut s).get(0, 1) - m;
                a * a
            })
            .collect();
        assert!(mean_se(&xs).within(1.0 / 20.0, 5.0));
    }

    #[test]
    fn subtle_sign_four_cycles() {
        let mut s = SeedSpec::new(3).stream();
        let n = 300_000;
        let mut c1 = Vec::with_capacity(n);
        let mut c2 = Vec::with_capacity(n);
        let mut c3 = Vec::with_capacity(n);
        let mut other = Vec::with_capacity(n);
        for _ in 0..n {
            let z = subtle_signs::<f64>(&mut s);
            c1.push(z[0][1] * z[1][2] * z[2][3] * z[3][0]);
            c2.push(z[0][3] * z[3][1] * z[1][2] * z[2][0]);
            c3.push(z[0][2] * z[2][3] * z[3][1] * z[1][0]);
            other.push(z[0][1] * z[0][2]);
        }
        for c in [&c1, &c2, &c3] {
            assert!(mean_se(c).within(1.0 / 3.0, 5.0));
        }
        assert!(mean_se(&other).within(0.0, 5.0));
    }

    #[test]
    fn modified_xi_cycle_closed_form() {
        let k = WeakAreaConstants::<f64>::default();
        let p = 21130.0 / 25621.0;
        let expect = (p * 3f64.sqrt() / 2.0 + 1.0 - p).powi(4) / 3.0;
        assert!((k.modified_xi_four_cycle() - expect).abs() < 1e-15);
        assert!((expect - 0.2087).abs() < 1e-4);
    }

    #[test]
    fn two_step_hand_value() {
        let z = AreaMatrix::zeros(2, 0.5);
        let a = two_step_area(&[1.0, 0.0], &[0.0, 1.0], &z, &z).unwrap();
        assert_eq!(a.get(0, 1), 0.5);
        assert!(a.is_antisymmetric());
        assert_eq!(a.h, 1.0);
    }

    #[test]
    fn oracle_values() {
        assert!((area_moment_oracle(MomentKind::FourthBridge, 1.0f64) - 7.0 / 240.0).abs() < 1e-16);
        assert_eq!(area_moment_oracle(MomentKind::VarArea, 1.0), 0.25);
        assert!((area_moment_oracle(MomentKind::FourCycleTilde, 1.0f64) - 1.0 / 1800.0).abs() < 1e-18);
        assert!((area_moment_oracle(MomentKind::HhBridgeCross, 2.0f64) + 8.0 / 720.0).abs() < 1e-16);
        assert!("fifth_bridge".parse::<MomentKind>().is_err());
        assert_eq!("var_area".parse::<MomentKind>().unwrap(), MomentKind::VarArea);
    }

    #[test]
    fn conditional_moment_values() {
        let m = cond_moment_fns(&[0.0, 1.0], &[1.0, 0.0], 1.0, 0, 1, CondMoment::Mean).unwrap();
        assert_eq!(m, 1.0);
        let v = cond_moment_fns(&[0.3f64, 1.0], &[0.0, 0.0], 1.0, 0, 1, CondMoment::Var).unwrap();
        assert!((v - 0.05).abs() < 1e-16);
        let k = cond_moment_fns(&[0.3f64, 1.0], &[0.0, 0.0], 1.0, 0, 1, CondMoment::Kurt).unwrap();
        assert!((k - (3.0 + 3.0 / 1400.0 * 400.0)).abs() < 1e-12);
        assert!((k - 3.857142857142857).abs() < 1e-12);
        assert!(cond_moment_fns(&[0.0, 1.0], &[1.0, 0.0], 1.0, 1, 1, CondMoment::Mean).is_err());
    }

    #[test]
    fn logistic_cdf_values() {
        assert_eq!(bridge_area_cdf(0.0, 1.0).unwrap(), 0.5);
        assert!((bridge_area_cdf(1e3f64, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(bridge_area_cdf(0.0, 0.0).is_err());
        // second and fourth moments of the law must match the bridge moments
        for h in [1.0f64, 0.5] {
            let n = 400_000;
            let (lo, hi) = (-6.0 * h, 6.0 * h);
            let dx = (hi - lo) / n as f64;
            let (mut m2, mut m4) = (0.0, 0.0);
            for i in 0..n {
                let x = lo + (i as f64 + 0.5) * dx;
                let p = bridge_area_cdf(x + dx / 2.0, h).unwrap() - bridge_area_cdf(x - dx / 2.0, h).unwrap();
                m2 += x * x * p;
                m4 += x.powi(4) * p;
            }
            assert!((m2 - area_moment_oracle(MomentKind::VarBridge, h)).abs() < 1e-6 * h * h);
            assert!((m4 - area_moment_oracle(MomentKind::FourthBridge, h)).abs() < 1e-6 * h.powi(4));
        }
    }
}
