use super::{Needs, Scheme, StepInputs};
use crate::brownian::Increment;
use crate::error::{invalid, Error, Result};
use crate::real::{sgn, Real};
use crate::rng::{RandomStream, SeedSpec};

/// Per-step Brownian information for a whole path, stored flat with index
/// `step * d + coordinate`.
///
/// Every step carries `(W, H, K)` and a swing `n`. The swing of a sampled
/// step is drawn independently of `(W, H)`, which is its exact joint law with
/// them; it is not coupled to `K`, and no solver reads both.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath<T> {
    pub d: usize,
    pub h: Vec<T>,
    pub w: Vec<T>,
    pub hh: Vec<T>,
    pub k: Vec<T>,
    pub n: Option<Vec<T>>,
}

impl<T: Real> BrownianPath<T> {
    /// Draw order per step: `(W, H, K)` for each coordinate, then the swings.
    pub fn sample(d: usize, schedule: &[T], stream: &mut RandomStream) -> Result<Self> {
        if d == 0 {
            return Err(invalid("noise dimension must be at least 1"));
        }
        if schedule.iter().any(|&h| !(h > T::zero()) || !h.is_finite()) {
            return Err(invalid("step sizes must be positive and finite"));
        }
        let m = schedule.len();
        let mut p = BrownianPath {
            d,
            h: schedule.to_vec(),
            w: Vec::with_capacity(m * d),
            hh: Vec::with_capacity(m * d),
            k: Vec::with_capacity(m * d),
            n: Some(Vec::with_capacity(m * d)),
        };
        let n = p.n.as_mut().expect("just built");
        for &h in schedule {
            for _ in 0..d {
                let inc = Increment::sample(h, stream);
                p.w.push(inc.w);
                p.hh.push(inc.hh);
                p.k.push(inc.k);
            }
            for _ in 0..d {
                n.push(stream.rademacher());
            }
        }
        Ok(p)
    }

    pub fn uniform(d: usize, h: T, steps: usize, stream: &mut RandomStream) -> Result<Self> {
        Self::sample(d, &vec![h; steps], stream)
    }

    pub fn steps(&self) -> usize {
        self.h.len()
    }

    pub fn total_time(&self) -> T {
        self.h.iter().copied().sum()
    }

    pub fn increment(&self, step: usize, i: usize) -> Increment<T> {
        let j = step * self.d + i;
        Increment { h: self.h[step], w: self.w[j], hh: self.hh[j], k: self.k[j] }
    }

    pub fn inputs(&self, step: usize) -> StepInputs<'_, T> {
        let r = step * self.d..(step + 1) * self.d;
        StepInputs {
            h: self.h[step],
            w: &self.w[r.clone()],
            hh: Some(&self.hh[r.clone()]),
            k: Some(&self.k[r.clone()]),
            n: self.n.as_ref().map(|n| &n[r]),
        }
    }

    /// The path seen through steps made of `r` consecutive steps. All of
    /// `(W, H, K)` combine exactly. The swing is the sign of the difference
    /// of the half-interval space-time areas, so it is exact when `r` is even
    /// and unavailable otherwise (`r = 1` keeps it).
    pub fn coarsen(&self, r: usize) -> Result<Self> {
        if r == 0 || self.steps() % r != 0 {
            return Err(invalid(format!("cannot group {} steps in blocks of {r}", self.steps())));
        }
        if r == 1 {
            return Ok(self.clone());
        }
        let (d, m) = (self.d, self.steps() / r);
        let mut out = BrownianPath {
            d,
            h: Vec::with_capacity(m),
            w: Vec::with_capacity(m * d),
            hh: Vec::with_capacity(m * d),
            k: Vec::with_capacity(m * d),
            n: if r % 2 == 0 { Some(Vec::with_capacity(m * d)) } else { None },
        };
        let mut swings = Vec::with_capacity(d);
        for c in 0..m {
            let base = c * r;
            out.h.push(self.h[base..base + r].iter().copied().sum());
            swings.clear();
            for i in 0..d {
                let block = |a: usize, b: usize| {
                    let mut acc = self.increment(a, i);
                    for s in a + 1..b {
                        acc = acc.concat(&self.increment(s, i));
                    }
                    acc
                };
                let inc = if r % 2 == 0 {
                    let (left, right) = (block(base, base + r / 2), block(base + r / 2, base + r));
                    swings.push(sgn(left.hh - right.hh));
                    left.concat(&right)
                } else {
                    block(base, base + r)
                };
                out.w.push(inc.w);
                out.hh.push(inc.hh);
                out.k.push(inc.k);
            }
            if let Some(n) = out.n.as_mut() {
                n.extend_from_slice(&swings);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics<T> {
    pub h: T,
    pub consumed: Needs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub diagnostics: Vec<StepDiagnostics<T>>,
    /// Set when a step produced a non-finite state; `states` then ends at the
    /// last finite one.
    pub blow_up: Option<String>,
}

impl<T: Real> Trajectory<T> {
    pub fn terminal(&self) -> &[T] {
        self.states.last().expect("trajectory holds the initial state")
    }
}

fn check_path<T: Real, S: Scheme<T>>(scheme: &S, path: &BrownianPath<T>) -> Result<()> {
    if scheme.noise_dim() != path.d {
        return Err(invalid(format!("{} needs {} noise coordinates, path has {}", scheme.name(), scheme.noise_dim(), path.d)));
    }
    if scheme.needs().n && path.n.is_none() {
        return Err(Error::MissingInput("n"));
    }
    Ok(())
}

/// Runs the scheme over the path, recording every state.
pub fn solve_on_path<T: Real, S: Scheme<T>>(scheme: &S, init: S::State, path: &BrownianPath<T>) -> Result<Trajectory<T>> {
    check_path(scheme, path)?;
    let needs = scheme.needs();
    let mut state = init;
    let mut t = T::zero();
    let mut traj = Trajectory {
        times: vec![t],
        states: vec![scheme.observe(&state)],
        diagnostics: Vec::with_capacity(path.steps()),
        blow_up: None,
    };
    for s in 0..path.steps() {
        let x = path.inputs(s);
        match scheme.step(&mut state, &x) {
            Ok(()) => {}
            Err(Error::BlowUp(msg)) => {
                traj.blow_up = Some(msg);
                return Ok(traj);
            }
            Err(e) => return Err(e),
        }
        t = t + x.h;
        traj.times.push(t);
        traj.states.push(scheme.observe(&state));
        traj.diagnostics.push(StepDiagnostics { h: x.h, consumed: needs });
    }
    Ok(traj)
}

/// Terminal state only. Non-finite states surface as [`Error::BlowUp`].
pub fn terminal<T: Real, S: Scheme<T>>(scheme: &S, init: S::State, path: &BrownianPath<T>) -> Result<S::State> {
    check_path(scheme, path)?;
    let mut state = init;
    for s in 0..path.steps() {
        scheme.step(&mut state, &path.inputs(s))?;
    }
    Ok(state)
}

/// Samples a path for the schedule from `seed` and runs the scheme on it.
pub fn solve<T: Real, S: Scheme<T>>(scheme: &S, init: S::State, schedule: &[T], seed: &SeedSpec) -> Result<Trajectory<T>> {
    let path = BrownianPath::sample(scheme.noise_dim(), schedule, &mut seed.stream())?;
    solve_on_path(scheme, init, &path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::{chen_combine, Interval, WhSample};

    #[test]
    fn coarse_wh_matches_chen_combine() {
        let p: BrownianPath<f64> = BrownianPath::uniform(2, 0.25, 8, &mut SeedSpec::new(1).stream()).unwrap();
        let c = p.coarsen(2).unwrap();
        for j in 0..4 {
            for i in 0..2 {
                let a = p.increment(2 * j, i);
                let b = p.increment(2 * j + 1, i);
                let s0 = 0.5 * j as f64;
                let l = WhSample { interval: Interval::new(s0, s0 + 0.25).unwrap(), w: vec![a.w], h_area: vec![a.hh] };
                let r = WhSample { interval: Interval::new(s0 + 0.25, s0 + 0.5).unwrap(), w: vec![b.w], h_area: vec![b.hh] };
                let wh = chen_combine(&l, &r).unwrap();
                let ci = c.increment(j, i);
                assert!((ci.w - wh.w[0]).abs() < 1e-12 && (ci.hh - wh.h_area[0]).abs() < 1e-12);
                assert_eq!(c.n.as_ref().unwrap()[j * 2 + i], sgn(a.hh - b.hh));
            }
        }
    }

    #[test]
    fn odd_blocks_drop_the_swing() {
        let p: BrownianPath<f64> = BrownianPath::uniform(1, 0.1, 9, &mut SeedSpec::new(2).stream()).unwrap();
        assert!(p.coarsen(3).unwrap().n.is_none());
        assert!(p.coarsen(2).is_err());
        assert_eq!(p.coarsen(1).unwrap(), p);
        assert!((p.coarsen(9).unwrap().total_time() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn bad_schedules_are_rejected() {
        let mut s = SeedSpec::new(3).stream();
        assert!(BrownianPath::<f64>::sample(1, &[0.1, 0.0], &mut s).is_err());
        assert!(BrownianPath::<f64>::sample(0, &[0.1], &mut s).is_err());
    }
}
