//! Exact generation of the Gaussian signature terms of Brownian motion.
//!
//! Over an interval of length `h` the increment `W`, the space-time area `H`
//! and the space-time-time area `K` are independent centred Gaussians with
//! variances `h`, `h/12` and `h/720`. Together with `h` they determine every
//! iterated integral of depth at most three that contains a single Brownian
//! letter.

use crate::error::{invalid, Error, Result};
use crate::real::{sgn, Real};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub s: T,
    pub t: T,
}

impl<T: Real> Interval<T> {
    pub fn new(s: T, t: T) -> Result<Self> {
        if !(t > s) || !(t - s).is_finite() {
            return Err(invalid(format!("interval needs t > s, got [{s}, {t}]")));
        }
        Ok(Interval { s, t })
    }

    /// `[0, h]`.
    pub fn of_length(h: T) -> Result<Self> {
        Self::new(T::zero(), h)
    }

    #[inline]
    pub fn h(&self) -> T {
        self.t - self.s
    }

    pub fn midpoint(&self) -> T {
        self.s + self.h() / T::lit(2.0)
    }

    pub fn halves(&self) -> (Self, Self) {
        let u = self.midpoint();
        (Interval { s: self.s, t: u }, Interval { s: u, t: self.t })
    }
}

/// The triple `(W, H, K)` per Brownian coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct WhkSample<T> {
    pub interval: Interval<T>,
    pub w: Vec<T>,
    pub h_area: Vec<T>,
    pub k_area: Vec<T>,
}

/// The pair `(W, H)`; the part that can be split and recombined exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct WhSample<T> {
    pub interval: Interval<T>,
    pub w: Vec<T>,
    pub h_area: Vec<T>,
}

impl<T: Real> WhkSample<T> {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn wh(&self) -> WhSample<T> {
        WhSample { interval: self.interval, w: self.w.clone(), h_area: self.h_area.clone() }
    }
}

impl<T: Real> WhSample<T> {
    pub fn dim(&self) -> usize {
        self.w.len()
    }
}

/// Space-time Levy swing, entries in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct SwingVector<T> {
    pub n: Vec<T>,
}

/// The six depth-three Gaussian iterated integrals, per coordinate.
/// Letter 0 is time and the first letter of a word is the innermost integral.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSignatureTerms<T> {
    pub h: T,
    pub i1: Vec<T>,
    pub i10: Vec<T>,
    pub i01: Vec<T>,
    pub i100: Vec<T>,
    pub i010: Vec<T>,
    pub i001: Vec<T>,
}

/// Extra Gaussians drawn when splitting `[s,t]` at its midpoint `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointAux<T> {
    /// Brownian arch value, `N(0, h/16)`.
    pub z: Vec<T>,
    /// `H_{s,u} - H_{u,t}`, `N(0, h/12)`.
    pub n_gauss: Vec<T>,
}

impl<T: Real> MidpointAux<T> {
    pub fn swing(&self) -> SwingVector<T> {
        SwingVector { n: self.n_gauss.iter().map(|&x| sgn(x)).collect() }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(invalid("dimension must be at least 1"))
    } else {
        Ok(())
    }
}

pub fn generate_whk<T: Real>(interval: Interval<T>, d: usize, stream: &mut RandomStream) -> Result<WhkSample<T>> {
    check_dim(d)?;
    let h = interval.h();
    let w = stream.gaussian_vec(d, h.sqrt())?;
    let h_area = stream.gaussian_vec(d, (h / T::lit(12.0)).sqrt())?;
    let k_area = stream.gaussian_vec(d, (h / T::lit(720.0)).sqrt())?;
    Ok(WhkSample { interval, w, h_area, k_area })
}

pub fn generate_wh<T: Real>(interval: Interval<T>, d: usize, stream: &mut RandomStream) -> Result<WhSample<T>> {
    check_dim(d)?;
    let h = interval.h();
    let w = stream.gaussian_vec(d, h.sqrt())?;
    let h_area = stream.gaussian_vec(d, (h / T::lit(12.0)).sqrt())?;
    Ok(WhSample { interval, w, h_area })
}

/// Swing drawn through its defining Gaussian, which is independent of the
/// `(W, H)` of the same interval. A zero Gaussian maps to +1.
pub fn generate_swing<T: Real>(interval: Interval<T>, d: usize, stream: &mut RandomStream) -> Result<SwingVector<T>> {
    check_dim(d)?;
    let std = (interval.h() / T::lit(12.0)).sqrt();
    let n = stream.gaussian_vec(d, std)?;
    Ok(SwingVector { n: n.into_iter().map(sgn).collect() })
}

pub fn signature_terms<T: Real>(whk: &WhkSample<T>) -> GaussianSignatureTerms<T> {
    let h = whk.interval.h();
    let h2 = h * h;
    let half = T::lit(0.5);
    let sixth = T::lit(1.0 / 6.0);
    let d = whk.dim();
    let mut out = GaussianSignatureTerms {
        h,
        i1: whk.w.clone(),
        i10: Vec::with_capacity(d),
        i01: Vec::with_capacity(d),
        i100: Vec::with_capacity(d),
        i010: Vec::with_capacity(d),
        i001: Vec::with_capacity(d),
    };
    for i in 0..d {
        let (w, hh, k) = (whk.w[i], whk.h_area[i], whk.k_area[i]);
        out.i10.push(h * w * half + h * hh);
        out.i01.push(h * w * half - h * hh);
        out.i100.push(h2 * w * sixth + h2 * hh * half + h2 * k);
        out.i010.push(h2 * w * sixth - T::lit(2.0) * h2 * k);
        out.i001.push(h2 * w * sixth - h2 * hh * half + h2 * k);
    }
    out
}

/// Splits `(W, H)` on `[s,t]` at the midpoint with fresh arch and swing
/// Gaussians.
pub fn midpoint_split<T: Real>(
    wh: &WhSample<T>,
    stream: &mut RandomStream,
) -> (WhSample<T>, WhSample<T>, MidpointAux<T>) {
    let h = wh.interval.h();
    let d = wh.dim();
    let z_std = (h / T::lit(16.0)).sqrt();
    let n_std = (h / T::lit(12.0)).sqrt();
    let z = (0..d).map(|_| stream.gaussian(z_std)).collect();
    let n_gauss = (0..d).map(|_| stream.gaussian(n_std)).collect();
    let aux = MidpointAux { z, n_gauss };
    let (l, r) = midpoint_split_with(wh, &aux);
    (l, r, aux)
}

/// Deterministic part of [`midpoint_split`] for given auxiliary values.
pub fn midpoint_split_with<T: Real>(wh: &WhSample<T>, aux: &MidpointAux<T>) -> (WhSample<T>, WhSample<T>) {
    let (li, ri) = wh.interval.halves();
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let three_halves = T::lit(1.5);
    let d = wh.dim();
    let mut left = WhSample { interval: li, w: Vec::with_capacity(d), h_area: Vec::with_capacity(d) };
    let mut right = WhSample { interval: ri, w: Vec::with_capacity(d), h_area: Vec::with_capacity(d) };
    for i in 0..d {
        let (w, hh, z, n) = (wh.w[i], wh.h_area[i], aux.z[i], aux.n_gauss[i]);
        left.w.push(half * w + three_halves * hh + z);
        right.w.push(half * w - three_halves * hh - z);
        left.h_area.push(quarter * hh - half * z + half * n);
        right.h_area.push(quarter * hh - half * z - half * n);
    }
    (left, right)
}

/// Combines `(W, H)` over two abutting halves of equal length.
pub fn chen_combine<T: Real>(left: &WhSample<T>, right: &WhSample<T>) -> Result<WhSample<T>> {
    let (hl, hr) = (left.interval.h(), right.interval.h());
    let tol = T::lit(1e-12) * (hl.abs() + hr.abs());
    if (left.interval.t - right.interval.s).abs() > tol || (hl - hr).abs() > tol {
        return Err(Error::IntervalMismatch(format!(
            "[{}, {}] and [{}, {}] are not equal abutting halves",
            left.interval.s, left.interval.t, right.interval.s, right.interval.t
        )));
    }
    if left.dim() != right.dim() {
        return Err(Error::IntervalMismatch("dimension differs".into()));
    }
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    let w = left.w.iter().zip(&right.w).map(|(&a, &b)| a + b).collect();
    let h_area = (0..left.dim())
        .map(|i| quarter * (left.w[i] - right.w[i]) + half * (left.h_area[i] + right.h_area[i]))
        .collect();
    Ok(WhSample { interval: Interval { s: left.interval.s, t: right.interval.t }, w, h_area })
}

/// Scalar `(W, H, K)` over one step, for one Brownian coordinate.
///
/// Unlike [`chen_combine`], [`Increment::concat`] accepts unequal lengths
/// and carries `K` exactly. It works through the moments
/// `P0 = int W_{s,r} dr` and `P1 = int (r - s) W_{s,r} dr`, which concatenate
/// linearly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment<T> {
    pub h: T,
    pub w: T,
    pub hh: T,
    pub k: T,
}

impl<T: Real> Increment<T> {
    pub fn sample(h: T, stream: &mut RandomStream) -> Self {
        Increment {
            h,
            w: stream.gaussian(h.sqrt()),
            hh: stream.gaussian((h / T::lit(12.0)).sqrt()),
            k: stream.gaussian((h / T::lit(720.0)).sqrt()),
        }
    }

    fn p0(&self) -> T {
        self.h * (self.w * T::lit(0.5) + self.hh)
    }

    fn p1(&self) -> T {
        let h2 = self.h * self.h;
        h2 * (self.w / T::lit(3.0) + self.hh * T::lit(0.5) - self.k)
    }

    /// The increment over the union of `self` followed by `next`.
    pub fn concat(&self, next: &Self) -> Self {
        let h = self.h + next.h;
        let w = self.w + next.w;
        let p0 = self.p0() + next.p0() + next.h * self.w;
        let p1 = self.p1()
            + next.p1()
            + self.h * next.p0()
            + self.w * (self.h * next.h + next.h * next.h * T::lit(0.5));
        let hh = p0 / h - w * T::lit(0.5);
        let k = w / T::lit(3.0) + hh * T::lit(0.5) - p1 / (h * h);
        Increment { h, w, hh, k }
    }

    /// Combines a run of consecutive steps.
    pub fn concat_all(steps: &[Self]) -> Self {
        let mut it = steps.iter();
        let first = *it.next().expect("at least one step");
        it.fold(first, |acc, s| acc.concat(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;
    use crate::stats::{mean_se, variance_se};

    fn unit() -> Interval<f64> {
        Interval::of_length(1.0).unwrap()
    }

    #[test]
    fn interval_validation() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(1.0, 0.5).is_err());
        assert!(Interval::new(0.5, 1.0).is_ok());
        let mut s = SeedSpec::new(0).stream();
        assert!(generate_whk(unit(), 0, &mut s).is_err());
    }

    #[test]
    fn signature_terms_hand_values() {
        let whk = WhkSample { interval: unit(), w: vec![1.0], h_area: vec![0.0], k_area: vec![0.0] };
        let t = signature_terms(&whk);
        assert_eq!((t.i10[0], t.i01[0]), (0.5, 0.5));
        for v in [t.i100[0], t.i010[0], t.i001[0]] {
            assert!((v - 1.0 / 6.0).abs() < 1e-15);
        }
        let whk = WhkSample { interval: unit(), w: vec![0.0], h_area: vec![1.0], k_area: vec![0.0] };
        let t = signature_terms(&whk);
        assert_eq!((t.i10[0], t.i01[0]), (1.0, -1.0));
        assert_eq!((t.i100[0], t.i010[0], t.i001[0]), (0.5, 0.0, -0.5));
    }

    #[test]
    fn split_hand_values() {
        let wh = WhSample { interval: unit(), w: vec![2.0], h_area: vec![0.0] };
        let aux = MidpointAux { z: vec![0.0], n_gauss: vec![0.0] };
        let (l, r) = midpoint_split_with(&wh, &aux);
        assert_eq!((l.w[0], r.w[0], l.h_area[0], r.h_area[0]), (1.0, 1.0, 0.0, 0.0));
        assert_eq!(aux.swing().n, vec![1.0]);
    }

    #[test]
    fn combine_hand_values() {
        let (li, ri) = unit().halves();
        let l = WhSample { interval: li, w: vec![1.0], h_area: vec![0.0] };
        let r = WhSample { interval: ri, w: vec![1.0], h_area: vec![0.0] };
        let c = chen_combine(&l, &r).unwrap();
        assert_eq!((c.w[0], c.h_area[0]), (2.0, 0.0));
        let r = WhSample { interval: ri, w: vec![0.0], h_area: vec![0.0] };
        assert_eq!(chen_combine(&l, &r).unwrap().h_area[0], 0.25);
    }

    #[test]
    fn combine_rejects_mismatch() {
        let l = WhSample { interval: Interval::new(0.0, 0.5).unwrap(), w: vec![1.0], h_area: vec![0.0] };
        let r = WhSample { interval: Interval::new(0.6, 1.1).unwrap(), w: vec![1.0], h_area: vec![0.0] };
        assert!(matches!(chen_combine(&l, &r), Err(Error::IntervalMismatch(_))));
        let r = WhSample { interval: Interval::new(0.5, 2.0).unwrap(), w: vec![1.0], h_area: vec![0.0] };
        assert!(chen_combine(&l, &r).is_err());
    }

    #[test]
    fn increment_concat_matches_chen_for_h() {
        let mut s = SeedSpec::new(4).stream();
        for _ in 0..1000 {
            let a = Increment::sample(0.5f64, &mut s);
            let b = Increment::sample(0.5f64, &mut s);
            let c = a.concat(&b);
            let l = WhSample { interval: Interval::new(0.0, 0.5).unwrap(), w: vec![a.w], h_area: vec![a.hh] };
            let r = WhSample { interval: Interval::new(0.5, 1.0).unwrap(), w: vec![b.w], h_area: vec![b.hh] };
            let wh = chen_combine(&l, &r).unwrap();
            assert!((c.w - wh.w[0]).abs() < 1e-14);
            assert!((c.hh - wh.h_area[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn increment_concat_is_associative() {
        let mut s = SeedSpec::new(5).stream();
        for _ in 0..1000 {
            let a = Increment::sample(0.3f64, &mut s);
            let b = Increment::sample(0.5f64, &mut s);
            let c = Increment::sample(0.2f64, &mut s);
            let x = a.concat(&b).concat(&c);
            let y = a.concat(&b.concat(&c));
            assert!((x.hh - y.hh).abs() < 1e-13 && (x.k - y.k).abs() < 1e-13);
        }
    }

    #[test]
    fn concatenated_k_has_the_right_law() {
        // K over [0,1] built from four quarter steps must be N(0, 1/720)
        // and uncorrelated with the combined W and H.
        let n = 200_000;
        let mut s = SeedSpec::new(6).stream();
        let mut ks = Vec::with_capacity(n);
        let mut kw = Vec::with_capacity(n);
        let mut kh = Vec::with_capacity(n);
        for _ in 0..n {
            let steps: Vec<Increment<f64>> = (0..4).map(|_| Increment::sample(0.25, &mut s)).collect();
            let c = Increment::concat_all(&steps);
            ks.push(c.k);
            kw.push(c.k * c.w);
            kh.push(c.k * c.hh);
        }
        assert!(variance_se(&ks).within(1.0 / 720.0, 5.0));
        assert!(mean_se(&kw).within(0.0, 5.0));
        assert!(mean_se(&kh).within(0.0, 5.0));
    }

    #[test]
    fn swing_is_balanced_and_independent_of_w() {
        let n = 1_000_000;
        let mut s = SeedSpec::new(8).stream();
        let mut ns = Vec::with_capacity(n);
        let mut nw = Vec::with_capacity(n);
        for _ in 0..n {
            let whk = generate_whk(unit(), 1, &mut s).unwrap();
            let sw = generate_swing(unit(), 1, &mut s).unwrap();
            ns.push(if sw.n[0] > 0.0 { 1.0 } else { 0.0 });
            nw.push(sw.n[0] * whk.w[0]);
        }
        assert!(mean_se(&ns).within(0.5, 5.0));
        assert!(mean_se(&nw).within(0.0, 5.0));
    }

    #[test]
    fn brownian_scaling() {
        let n = 200_000;
        let mut s = SeedSpec::new(9).stream();
        let i4 = Interval::of_length(4.0).unwrap();
        let ws: Vec<f64> = (0..n).map(|_| generate_whk(i4, 1, &mut s).unwrap().w[0]).collect();
        assert!(variance_se(&ws).within(4.0, 5.0));
    }
}
