//! Monte Carlo error estimators over coupled coarse and fine solutions.
//!
//! Paths are independent: path `p` draws from `seed.child(p)`, so results do
//! not depend on the thread count. Per-path values are collected in path
//! order and reduced serially.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::SeedSpec;
use crate::solvers::terminal;
use crate::solvers::{BrownianPath, Scheme};
use crate::stats::{mean_se, MeanSe};

/// Fraction of non-finite paths tolerated before an estimate is refused.
pub const BLOW_UP_LIMIT: f64 = 1e-3;

/// A scheme together with its starting state.
pub struct Runner<'a, S: Scheme<f64>> {
    pub scheme: &'a S,
    pub init: &'a (dyn Fn(&mut crate::rng::RandomStream) -> S::State + Sync),
}

impl<'a, S: Scheme<f64>> Runner<'a, S> {
    pub fn new(scheme: &'a S, init: &'a (dyn Fn(&mut crate::rng::RandomStream) -> S::State + Sync)) -> Self {
        Runner { scheme, init }
    }
}

/// Root mean square with its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rms {
    pub value: f64,
    pub se: f64,
    pub n: usize,
}

impl Rms {
    pub fn from_squares(sq: &[f64]) -> Rms {
        let m = mean_se(sq);
        let value = m.mean.max(0.0).sqrt();
        let se = if value > 0.0 { m.se / (2.0 * value) } else { 0.0 };
        Rms { value, se, n: m.n }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn blow_up_check(failed: usize, total: usize) -> Result<()> {
    if failed as f64 > BLOW_UP_LIMIT * total as f64 {
        Err(Error::BlowUp(format!("{failed} of {total} paths became non-finite")))
    } else {
        Ok(())
    }
}

/// Per-path outcome of running one reference and several coarse schemes on
/// the same Brownian path. `None` marks a path that blew up somewhere.
type PathOutcome = Option<(Vec<f64>, Vec<Vec<Vec<f64>>>)>;

/// Runs the fine reference on a grid of `n_fine` steps over `[0, t]` and each
/// coarse scheme for every `N` in `ns` on the coarsened path. `n_fine` must
/// be a multiple of each `N`.
pub fn coupled_terminals<F: Scheme<f64>, S: Scheme<f64>>(
    fine: &Runner<F>,
    coarse: &[Runner<S>],
    t: f64,
    ns: &[usize],
    n_fine: usize,
    paths: usize,
    seed: &SeedSpec,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<Vec<Vec<f64>>>>)> {
    for &n in ns {
        if n == 0 || n_fine % n != 0 {
            return Err(crate::error::invalid(format!("fine grid {n_fine} is not a multiple of {n}")));
        }
    }
    let d = fine.scheme.noise_dim();
    let outcomes: Vec<Result<PathOutcome>> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let mut stream = seed.child(p as u64).stream();
            let init_f = (fine.init)(&mut stream);
            let inits: Vec<S::State> = coarse.iter().map(|c| (c.init)(&mut stream)).collect();
            let path = BrownianPath::uniform(d, t / n_fine as f64, n_fine, &mut stream)?;
            let reference = match terminal(fine.scheme, init_f, &path) {
                Ok(s) => fine.scheme.observe(&s),
                Err(Error::BlowUp(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let mut per_n = Vec::with_capacity(ns.len());
            for &n in ns {
                let cp = path.coarsen(n_fine / n)?;
                let mut per_s = Vec::with_capacity(coarse.len());
                for (c, init) in coarse.iter().zip(&inits) {
                    match terminal(c.scheme, init.clone(), &cp) {
                        Ok(s) => per_s.push(c.scheme.observe(&s)),
                        Err(Error::BlowUp(_)) => return Ok(None),
                        Err(e) => return Err(e),
                    }
                }
                per_n.push(per_s);
            }
            Ok(Some((reference, per_n)))
        })
        .collect();
    let mut refs = Vec::with_capacity(paths);
    let mut out = Vec::with_capacity(paths);
    let mut failed = 0;
    for o in outcomes {
        match o? {
            Some((r, c)) => {
                refs.push(r);
                out.push(c);
            }
            None => failed += 1,
        }
    }
    blow_up_check(failed, paths)?;
    Ok((refs, out))
}

/// Strong error table `[scheme][N]` against the fine reference.
pub fn strong_errors(refs: &[Vec<f64>], coarse: &[Vec<Vec<Vec<f64>>>], n_schemes: usize, n_ns: usize) -> Vec<Vec<(Rms, Vec<f64>)>> {
    (0..n_schemes)
        .map(|s| {
            (0..n_ns)
                .map(|j| {
                    let sq: Vec<f64> = refs.iter().zip(coarse).map(|(r, c)| sq_dist(&c[j][s], r)).collect();
                    (Rms::from_squares(&sq), sq)
                })
                .collect()
        })
        .collect()
}

/// `sqrt(E a / E b)` from paired squared errors, with a delta-method SE that
/// accounts for the pairing.
pub fn paired_ratio(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut vaa, mut vbb, mut vab) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        vaa += (x - ma) * (x - ma);
        vbb += (y - mb) * (y - mb);
        vab += (x - ma) * (y - mb);
    }
    let (vaa, vbb, vab) = (vaa / (n - 1.0), vbb / (n - 1.0), vab / (n - 1.0));
    let ratio = (ma / mb).sqrt();
    let var_log = 0.25 * (vaa / (ma * ma) + vbb / (mb * mb) - 2.0 * vab / (ma * mb)) / n;
    (ratio, ratio * var_log.max(0.0).sqrt())
}

/// Step-halving strong error: the same scheme with `N` and `2N` steps on one
/// path, the coarse increments being exact combinations of the fine ones.
pub fn step_halving<S: Scheme<f64>>(runner: &Runner<S>, t: f64, n: usize, paths: usize, seed: &SeedSpec) -> Result<Rms> {
    let d = runner.scheme.noise_dim();
    let outcomes: Vec<Result<Option<f64>>> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let mut stream = seed.child(p as u64).stream();
            let init = (runner.init)(&mut stream);
            let path = BrownianPath::uniform(d, t / (2 * n) as f64, 2 * n, &mut stream)?;
            let coarse = path.coarsen(2)?;
            let a = terminal(runner.scheme, init.clone(), &path);
            let b = terminal(runner.scheme, init, &coarse);
            match (a, b) {
                (Ok(a), Ok(b)) => Ok(Some(sq_dist(&runner.scheme.observe(&a), &runner.scheme.observe(&b)))),
                (Err(Error::BlowUp(_)), _) | (_, Err(Error::BlowUp(_))) => Ok(None),
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        })
        .collect();
    let mut sq = Vec::with_capacity(paths);
    let mut failed = 0;
    for o in outcomes {
        match o? {
            Some(v) => sq.push(v),
            None => failed += 1,
        }
    }
    blow_up_check(failed, paths)?;
    Ok(Rms::from_squares(&sq))
}

/// Weak error `|E phi(coarse) - E phi(fine)|` with the SE of the paired
/// difference.
pub fn weak_error(refs: &[Vec<f64>], coarse: &[Vec<f64>], payoff: impl Fn(&[f64]) -> f64) -> MeanSe {
    let diffs: Vec<f64> = refs.iter().zip(coarse).map(|(r, c)| payoff(c) - payoff(r)).collect();
    let m = mean_se(&diffs);
    MeanSe { mean: m.mean.abs(), ..m }
}

/// One level of a multilevel estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStats {
    pub level: usize,
    pub steps: usize,
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlmcReport {
    pub levels: Vec<LevelStats>,
    pub estimate: f64,
    pub se: f64,
}

/// Multilevel estimator with fixed per-level sample counts. Level `l` uses
/// `base_steps * 2^l` steps; for `l > 0` the coarse solution runs on the
/// pairwise combination of the fine increments.
pub fn mlmc_estimate<S: Scheme<f64>>(
    runner: &Runner<S>,
    payoff: &(dyn Fn(&[f64]) -> f64 + Sync),
    t: f64,
    base_steps: usize,
    samples: &[usize],
    seed: &SeedSpec,
) -> Result<MlmcReport> {
    let d = runner.scheme.noise_dim();
    let mut levels = Vec::with_capacity(samples.len());
    for (l, &n_l) in samples.iter().enumerate() {
        let steps = base_steps << l;
        let level_seed = seed.child(l as u64);
        let vals: Vec<Result<Option<f64>>> = (0..n_l)
            .into_par_iter()
            .map(|p| {
                let mut stream = level_seed.child(p as u64).stream();
                let init = (runner.init)(&mut stream);
                let path = BrownianPath::uniform(d, t / steps as f64, steps, &mut stream)?;
                let fine = match terminal(runner.scheme, init.clone(), &path) {
                    Ok(s) => payoff(&runner.scheme.observe(&s)),
                    Err(Error::BlowUp(_)) => return Ok(None),
                    Err(e) => return Err(e),
                };
                if l == 0 {
                    return Ok(Some(fine));
                }
                match terminal(runner.scheme, init, &path.coarsen(2)?) {
                    Ok(s) => Ok(Some(fine - payoff(&runner.scheme.observe(&s)))),
                    Err(Error::BlowUp(_)) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect();
        let mut ys = Vec::with_capacity(n_l);
        let mut failed = 0;
        for v in vals {
            match v? {
                Some(y) => ys.push(y),
                None => failed += 1,
            }
        }
        blow_up_check(failed, n_l)?;
        let m = mean_se(&ys);
        levels.push(LevelStats { level: l, steps, samples: ys.len(), mean: m.mean, variance: m.se * m.se * ys.len() as f64 });
    }
    let estimate = levels.iter().map(|l| l.mean).sum();
    let se = levels.iter().map(|l| l.variance / l.samples as f64).sum::<f64>().sqrt();
    Ok(MlmcReport { levels, estimate, se })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::sde::{FnProblem, Generic, GenericMethod, NoiseClass};

    fn brownian() -> Generic<impl crate::solvers::sde::SdeProblem<f64>> {
        let p = FnProblem::new(1, 1, NoiseClass::Additive, |_: &[f64], o: &mut [f64]| o[0] = 0.0, |_: &[f64], _, o: &mut [f64]| o[0] = 0.7);
        Generic { problem: p, method: GenericMethod::EulerMaruyama }
    }

    #[test]
    fn exact_scheme_has_zero_strong_error() {
        let s = brownian();
        let init = |_: &mut crate::rng::RandomStream| vec![1.0];
        let r = Runner::new(&s, &init);
        let (refs, c) = coupled_terminals(&r, &[Runner::new(&s, &init)], 1.0, &[2, 5, 10], 20, 200, &SeedSpec::new(1)).unwrap();
        for (rms, _) in &strong_errors(&refs, &c, 1, 3)[0] {
            assert!(rms.value < 1e-13);
        }
        assert!(step_halving(&r, 1.0, 8, 100, &SeedSpec::new(2)).unwrap().value < 1e-13);
    }

    #[test]
    fn self_comparison_is_zero() {
        let s = brownian();
        let init = |_: &mut crate::rng::RandomStream| vec![0.0];
        let r = Runner::new(&s, &init);
        let (refs, c) = coupled_terminals(&r, &[Runner::new(&s, &init)], 1.0, &[10], 10, 50, &SeedSpec::new(3)).unwrap();
        assert_eq!(strong_errors(&refs, &c, 1, 1)[0][0].0.value, 0.0);
        let coarse: Vec<Vec<f64>> = c.iter().map(|x| x[0][0].clone()).collect();
        assert_eq!(weak_error(&refs, &coarse, |y| y[0].max(0.0)).mean, 0.0);
    }

    #[test]
    fn ratio_of_identical_is_one() {
        let a = [1.0, 2.0, 0.5, 3.0];
        let (r, se) = paired_ratio(&a, &a);
        assert!((r - 1.0).abs() < 1e-15 && se < 1e-12);
    }

    #[test]
    fn single_level_mlmc_is_plain_monte_carlo() {
        let s = brownian();
        let init = |_: &mut crate::rng::RandomStream| vec![0.0];
        let r = Runner::new(&s, &init);
        let pay = |y: &[f64]| y[0] * y[0];
        let rep = mlmc_estimate(&r, &pay, 1.0, 4, &[20_000], &SeedSpec::new(4)).unwrap();
        assert_eq!(rep.levels.len(), 1);
        assert!((rep.estimate - 0.49).abs() < 5.0 * rep.se);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let s = brownian();
        let init = |_: &mut crate::rng::RandomStream| vec![0.0];
        let r = Runner::new(&s, &init);
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| step_halving(&r, 1.0, 4, 64, &SeedSpec::new(5)).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
