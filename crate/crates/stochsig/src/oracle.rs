//! Brute-force fine-grid Brownian paths and the path functionals computed
//! from them. This is the independent reference the closed-form results
//! are tested against.
//!
//! The path is the piecewise linear interpolant of a grid sample. Every
//! functional below is the exact value for that interpolant, so the
//! stochastic integrals are Stratonovich integrals in the limit.

use crate::brownian::{Interval, WhkSample};
use crate::error::{invalid, Error, Result};
use crate::levy_weak::AreaMatrix;
use crate::real::{sgn, Real};
use crate::rng::RandomStream;
use crate::shuffle::WordEvaluator;
use crate::sst::SstMatrix;

/// Grid values `W(k h / m)` for `k = 0..=m`, one row per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct FinePath<T> {
    pub d: usize,
    pub m: usize,
    pub h: T,
    pub w: Vec<Vec<T>>,
}

/// Samples a path by midpoint refinement, level by level, so the draws for
/// an `m` grid are a prefix of the draws for a `2m` grid from the same stream.
pub fn simulate_fine<T: Real>(interval: Interval<T>, d: usize, m: usize, stream: &mut RandomStream) -> Result<FinePath<T>> {
    if m < 2 || !m.is_power_of_two() {
        return Err(invalid(format!("sub-step count must be a power of two >= 2, got {m}")));
    }
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let h = interval.h();
    let mut w = vec![vec![T::zero(); m + 1]; d];
    for row in w.iter_mut() {
        row[m] = stream.gaussian(h.sqrt());
    }
    let mut span = m;
    while span > 1 {
        let half = span / 2;
        // bridge midpoint variance is (span length) / 4
        let std = (h * T::lit(span as f64 / m as f64) / T::lit(4.0)).sqrt();
        for k in (0..m).step_by(span) {
            for row in w.iter_mut() {
                let mid = (row[k] + row[k + span]) * T::lit(0.5);
                row[k + half] = mid + stream.gaussian(std);
            }
        }
        span = half;
    }
    Ok(FinePath { d, m, h, w })
}

impl<T: Real> FinePath<T> {
    /// Path from explicit increments, one row per coordinate.
    pub fn from_increments(h: T, increments: &[Vec<T>]) -> Result<Self> {
        let d = increments.len();
        if d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        let m = increments[0].len();
        if increments.iter().any(|r| r.len() != m) || m == 0 {
            return Err(invalid("increment rows must be non-empty and equal length"));
        }
        let w = increments
            .iter()
            .map(|r| {
                let mut acc = T::zero();
                std::iter::once(T::zero())
                    .chain(r.iter().map(|&x| {
                        acc = acc + x;
                        acc
                    }))
                    .collect()
            })
            .collect();
        Ok(FinePath { d, m, h, w })
    }

    pub fn endpoint(&self, i: usize) -> T {
        self.w[i][self.m]
    }

    fn dt(&self) -> T {
        self.h / T::lit(self.m as f64)
    }

    /// Restriction to grid indices `[a, b]`, re-based to start at zero.
    pub fn sub_path(&self, a: usize, b: usize) -> FinePath<T> {
        let w = self.w.iter().map(|r| r[a..=b].iter().map(|&x| x - r[a]).collect()).collect();
        FinePath { d: self.d, m: b - a, h: self.dt() * T::lit((b - a) as f64), w }
    }
}

/// Everything the closed-form results talk about, for one path.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleFunctionals<T> {
    pub whk: WhkSample<T>,
    pub area: AreaMatrix<T>,
    pub bridge_area: AreaMatrix<T>,
    pub sst: SstMatrix<T>,
    pub swing: Vec<T>,
    pub m_levy: Vec<T>,
    pub square_integral: SstMatrix<T>,
}

/// Per-coordinate time moments of the path: `(H, K, M)`.
fn time_moments<T: Real>(row: &[T], h: T) -> (T, T, T) {
    let m = row.len() - 1;
    let dt = h / T::lit(m as f64);
    let w_end = row[m];
    let half = T::lit(0.5);
    // two-point Gauss rule is exact for the cubic integrands below
    let g = T::lit(0.5 / 3f64.sqrt());
    let nodes = [half - g, half + g];
    let (mut p0, mut p1, mut pm) = (T::zero(), T::zero(), T::zero());
    for k in 0..m {
        let (a, b) = (row[k], row[k + 1]);
        let r0 = dt * T::lit(k as f64);
        for &x in &nodes {
            let u = r0 + x * dt;
            let wu = a + (b - a) * x;
            let bridge = wu - u / h * w_end;
            let wt = dt * half;
            p0 = p0 + wt * wu;
            p1 = p1 + wt * u * wu;
            let c = u - h * half;
            pm = pm + wt * bridge * (half * c * c - h * h / T::lit(40.0));
        }
    }
    let hh = p0 / h - w_end * half;
    let k = w_end / T::lit(3.0) + hh * half - p1 / (h * h);
    (hh, k, pm / (h * h * h))
}

pub fn functionals<T: Real>(path: &FinePath<T>) -> OracleFunctionals<T> {
    let (d, m, h) = (path.d, path.m, path.h);
    let dt = path.dt();
    let w: Vec<T> = (0..d).map(|i| path.endpoint(i)).collect();
    let mut hh = Vec::with_capacity(d);
    let mut kk = Vec::with_capacity(d);
    let mut mm = Vec::with_capacity(d);
    for row in &path.w {
        let (a, b, c) = time_moments(row, h);
        hh.push(a);
        kk.push(b);
        mm.push(c);
    }
    let half = T::lit(0.5);

    let area = AreaMatrix::from_upper(d, h, |i, j| {
        let (ri, rj) = (&path.w[i], &path.w[j]);
        let mut acc = T::zero();
        for k in 0..m {
            acc = acc + ri[k] * (rj[k + 1] - rj[k]) - rj[k] * (ri[k + 1] - ri[k]);
        }
        half * acc
    });
    let bridge_area = AreaMatrix::from_upper(d, h, |i, j| area.get(i, j) - (hh[i] * w[j] - w[i] * hh[j]));

    let third = T::lit(1.0 / 3.0);
    let sixth = T::lit(1.0 / 6.0);
    let square_integral = SstMatrix::from_fn(d, h, |i, j| {
        let (ri, rj) = (&path.w[i], &path.w[j]);
        let mut acc = T::zero();
        for k in 0..m {
            acc = acc + third * (ri[k] * rj[k] + ri[k + 1] * rj[k + 1]) + sixth * (ri[k] * rj[k + 1] + ri[k + 1] * rj[k]);
        }
        acc * dt
    });
    let sst = SstMatrix::from_fn(d, h, |i, j| {
        half * (square_integral.get(i, j) - h * w[i] * w[j] * third - h * half * (w[i] * hh[j] + hh[i] * w[j]))
    });

    let swing = if m >= 2 {
        let (l, r) = (path.sub_path(0, m / 2), path.sub_path(m / 2, m));
        (0..d)
            .map(|i| {
                let hl = time_moments(&l.w[i], l.h).0;
                let hr = time_moments(&r.w[i], r.h).0;
                sgn(hl - hr)
            })
            .collect()
    } else {
        vec![T::one(); d]
    };

    let interval = Interval { s: T::zero(), t: h };
    OracleFunctionals {
        whk: WhkSample { interval, w, h_area: hh, k_area: kk },
        area,
        bridge_area,
        sst,
        swing,
        m_levy: mm,
        square_integral,
    }
}

/// Iterated integral of a word over the piecewise linear path, letter 0 is
/// time and letter `i >= 1` is coordinate `i - 1`. Computed exactly by
/// Chen's identity over the linear pieces.
pub fn word_integral<T: Real>(path: &FinePath<T>, word: &[u8]) -> Result<T> {
    if word.len() > 4 {
        return Err(Error::UnsupportedWord(format!("{word:?} is longer than 4")));
    }
    if let Some(&l) = word.iter().find(|&&l| l as usize > path.d) {
        return Err(invalid(format!("letter {l} outside alphabet 0..={}", path.d)));
    }
    let n = word.len();
    let dt = path.dt();
    let inv_fact = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0].map(T::lit);
    let mut p = [T::zero(); 5];
    p[0] = T::one();
    let mut delta = [T::zero(); 4];
    for seg in 0..path.m {
        for (pos, &l) in word.iter().enumerate() {
            delta[pos] = if l == 0 { dt } else { path.w[l as usize - 1][seg + 1] - path.w[l as usize - 1][seg] };
        }
        for k in (1..=n).rev() {
            let mut acc = p[k];
            let mut prod = T::one();
            for j in (0..k).rev() {
                prod = prod * delta[j];
                acc = acc + p[j] * prod * inv_fact[k - j];
            }
            p[k] = acc;
        }
    }
    Ok(p[n])
}

/// Word values read off a fine path.
pub struct OracleEvaluator<'a, T> {
    pub path: &'a FinePath<T>,
}

impl<'a, T: Real> WordEvaluator<T> for OracleEvaluator<'a, T> {
    fn word_value(&self, word: &[u8]) -> Option<T> {
        word_integral(self.path, word).ok()
    }
}
