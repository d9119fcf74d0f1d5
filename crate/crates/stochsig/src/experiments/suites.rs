use std::time::Instant;

use rayon::prelude::*;

use super::engine::{coupled_terminals, mlmc_estimate, paired_ratio, step_halving, strong_errors, weak_error, Runner};
use super::{ExperimentConfig, Row};
use crate::brownian::{chen_combine, generate_wh, generate_whk, midpoint_split, signature_terms, Interval, WhkSample};
use crate::error::Result;
use crate::levy_weak::{
    area_mean_given_whk, bridge_area_scale, logistic_cdf, modified_weak_levy_area_d4, sample_xi, weak_levy_area,
    AreaMatrix, WeakAreaConstants,
};
use crate::oracle::{functionals, simulate_fine, word_integral, FinePath};
use crate::rng::{RandomStream, SeedSpec};
use crate::shuffle::{decomposition_residual_ij, decomposition_residual_ijk, GaussianEvaluator, TensorPoly};
use crate::solvers::fhn::{Fhn, FhnMethod, FhnParams};
use crate::solvers::heston::{HestonMilstein, HestonParams};
use crate::solvers::igbm::{Igbm, IgbmMethod, IgbmParams};
use crate::solvers::sde::{Generic, GenericMethod, Oscillator};
use crate::solvers::uld::{Quadratic, Sort};
use crate::sst::{k_given_n, l_mean, l_var, EstimatorKind, SstInputs};
use crate::stats::{ks_statistic, linear_fit, loglog_slope, mean_se, variance_se, MeanSe};

const CHUNK: usize = 4096;

/// `n` draws of `f`, chunk `c` using stream `seed.child(c)`, collected in order.
fn draw<X: Send>(n: usize, seed: &SeedSpec, f: impl Fn(&mut RandomStream) -> Result<X> + Sync) -> Result<Vec<X>> {
    let parts: Vec<Result<Vec<X>>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut s = seed.child(c as u64).stream();
            (0..CHUNK.min(n - c * CHUNK)).map(|_| f(&mut s)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn col<const K: usize>(xs: &[[f64; K]], c: usize) -> Vec<f64> {
    xs.iter().map(|x| x[c]).collect()
}

fn se_row(experiment: &str, solver: &str, m: MeanSe, target: f64, k: f64) -> Row {
    Row::new(experiment, solver, m.n, m.mean, m.se).check_se(target, k)
}

fn timed(rows: &mut Vec<Row>, start: Instant, block: Vec<Row>) {
    let dt = start.elapsed().as_secs_f64();
    rows.extend(block.into_iter().map(|r| Row { runtime_s: dt, ..r }));
}

fn products(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    xs.iter().zip(ys).map(|(x, y)| x * y).collect()
}

pub(super) fn moments(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let (h, k) = (cfg.h, cfg.se_multiple);
    let iv = Interval::of_length(h)?;
    let root = SeedSpec::new(cfg.seed).child(1);
    let mut rows = Vec::new();

    let t = Instant::now();
    let s = draw(cfg.n(1_000_000), &root.child(0), |st| {
        let x = generate_whk(iv, 1, st)?;
        Ok([x.w[0], x.h_area[0], x.k_area[0]])
    })?;
    let (w, hh, kk) = (col(&s, 0), col(&s, 1), col(&s, 2));
    let block = vec![
        se_row("moments/var_w", "whk", variance_se(&w), h, k),
        se_row("moments/var_h", "whk", variance_se(&hh), h / 12.0, k),
        se_row("moments/var_k", "whk", variance_se(&kk), h / 720.0, k),
        se_row("moments/cov_wh", "whk", mean_se(&products(&w, &hh)), 0.0, k),
        se_row("moments/cov_wk", "whk", mean_se(&products(&w, &kk)), 0.0, k),
        se_row("moments/cov_hk", "whk", mean_se(&products(&hh, &kk)), 0.0, k),
    ];
    timed(&mut rows, t, block);

    let t = Instant::now();
    let n = cfg.n(10_000);
    let res = draw(n, &root.child(1), |st| {
        let x = generate_whk(iv, 2, st)?;
        let g = signature_terms(&x);
        let mut r = [0.0f64; 2];
        for i in 0..2 {
            r[0] = r[0].max((g.i10[i] + g.i01[i] - h * g.i1[i]).abs());
            r[1] = r[1].max((g.i100[i] + g.i010[i] + g.i001[i] - 0.5 * h * h * g.i1[i]).abs());
        }
        Ok(r)
    })?;
    let max = |c: usize| res.iter().map(|r| r[c]).fold(0.0, f64::max);
    let block = vec![
        Row::new("moments/identity_depth2", "gaussian_terms", n, max(0), 0.0).check(0.0, 1e-12 * h.max(1.0).powf(1.5)),
        Row::new("moments/identity_depth3", "gaussian_terms", n, max(1), 0.0).check(0.0, 1e-12 * h.max(1.0).powf(2.5)),
    ];
    timed(&mut rows, t, block);

    let t = Instant::now();
    let s = draw(cfg.n(1_000_000), &root.child(2), |st| {
        let wh = generate_wh(iv, 1, st)?;
        let (l, r, _) = midpoint_split(&wh, st);
        let back = chen_combine(&l, &r)?;
        let err = (back.w[0] - wh.w[0]).abs().max((back.h_area[0] - wh.h_area[0]).abs());
        Ok([err, l.w[0], l.h_area[0], r.w[0], r.h_area[0]])
    })?;
    let err = s.iter().map(|x| x[0]).fold(0.0, f64::max);
    let (wl, hl, wr, hr) = (col(&s, 1), col(&s, 2), col(&s, 3), col(&s, 4));
    let block = vec![
        Row::new("moments/split_roundtrip", "midpoint_split", s.len(), err, 0.0).check(0.0, 1e-12 * h.max(1.0)),
        se_row("moments/var_w_left", "midpoint_split", variance_se(&wl), h / 2.0, k),
        se_row("moments/var_h_left", "midpoint_split", variance_se(&hl), h / 24.0, k),
        se_row("moments/var_w_right", "midpoint_split", variance_se(&wr), h / 2.0, k),
        se_row("moments/var_h_right", "midpoint_split", variance_se(&hr), h / 24.0, k),
        se_row("moments/cov_w_halves", "midpoint_split", mean_se(&products(&wl, &wr)), 0.0, k),
        se_row("moments/cov_h_halves", "midpoint_split", mean_se(&products(&hl, &hr)), 0.0, k),
    ];
    timed(&mut rows, t, block);
    Ok(rows)
}

/// Bridge-area entries from the oracle path.
fn oracle_bridge(path: &FinePath<f64>) -> AreaMatrix<f64> {
    functionals(path).bridge_area
}

fn bridge_of<'a>(a: &'a AreaMatrix<f64>, x: &WhkSample<f64>) -> impl Fn(usize, usize) -> f64 + 'a {
    let (w, hh) = (x.w.clone(), x.h_area.clone());
    move |i, j| a.get(i, j) - (hh[i] * w[j] - w[i] * hh[j])
}

fn four_cycle(b: impl Fn(usize, usize) -> f64) -> f64 {
    b(0, 1) * b(1, 2) * b(2, 3) * b(3, 0)
}

pub(super) fn levy_area(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let (h, k) = (cfg.h, cfg.se_multiple);
    let (h2, h4) = (h * h, h.powi(4));
    let iv = Interval::of_length(h)?;
    let root = SeedSpec::new(cfg.seed).child(2);
    let mut rows = Vec::new();

    let t = Instant::now();
    let n = cfg.oracle_paths.unwrap_or(100_000);
    let m = cfg.oracle_steps.unwrap_or(4096);
    let mut b = draw(n, &root.child(0), |st| Ok(oracle_bridge(&simulate_fine(iv, 2, m, st)?).get(0, 1)))?;
    let var = variance_se(&b);
    let fourth = mean_se(&b.iter().map(|x| x.powi(4)).collect::<Vec<_>>());
    let s = bridge_area_scale(h);
    let ks_half = ks_statistic(&mut b, |x| logistic_cdf(x, s));
    let ks_full = ks_statistic(&mut b, |x| logistic_cdf(x, 2.0 * s));
    let block = vec![
        se_row("levy-area/bridge_var", "oracle", var, h2 / 12.0, k).with_n(m),
        se_row("levy-area/bridge_fourth", "oracle", fourth, 7.0 / 240.0 * h4, k).with_n(m),
        Row::new("levy-area/bridge_ks_scale_h_over_2pi", "oracle", n, ks_half, f64::NAN).with_n(m).check(0.0, 0.01),
        Row::new("levy-area/bridge_ks_scale_h_over_pi", "oracle", n, ks_full, f64::NAN).with_n(m).check(0.0, 0.01),
    ];
    timed(&mut rows, t, block);

    let t = Instant::now();
    let consts = WeakAreaConstants::<f64>::default();
    let s = draw(cfg.n(1_000_000), &root.child(1), |st| {
        let x = generate_whk(iv, 3, st)?;
        let a = weak_levy_area(&x, st);
        let mean = area_mean_given_whk(&x);
        let b = bridge_of(&a, &x);
        let xi: f64 = sample_xi(&consts, st);
        Ok([a.get(0, 1), b(0, 1), b(1, 2), a.get(0, 1) - mean.get(0, 1), xi])
    })?;
    let pow = |c: usize, p: i32| col(&s, c).iter().map(|x| x.powi(p)).collect::<Vec<_>>();
    let cross: Vec<f64> = s.iter().map(|x| x[1] * x[1] * x[2] * x[2]).collect();
    let block = vec![
        se_row("levy-area/area_second", "weak", mean_se(&pow(0, 2)), h2 / 4.0, k),
        se_row("levy-area/bridge_fourth", "weak", mean_se(&pow(1, 4)), 7.0 / 240.0 * h4, k),
        se_row("levy-area/bridge_cross", "weak", mean_se(&cross), 7.0 / 720.0 * h4, k),
        se_row("levy-area/arch_second", "weak", mean_se(&pow(3, 2)), h2 / 20.0, k),
        se_row("levy-area/xi_fourth", "weak", mean_se(&pow(4, 4)), 42525.0 / 25621.0, k),
    ];
    timed(&mut rows, t, block);

    let t = Instant::now();
    let s = draw(cfg.n(1_000_000), &root.child(2), |st| {
        let x = generate_whk(iv, 4, st)?;
        let a = weak_levy_area(&x, st);
        let am = modified_weak_levy_area_d4(&x, st)?;
        Ok([four_cycle(bridge_of(&a, &x)), four_cycle(bridge_of(&am, &x))])
    })?;
    let n4 = cfg.oracle_paths.unwrap_or(20_000);
    let m4 = cfg.oracle_steps.unwrap_or(1024);
    let oc = draw(n4, &root.child(3), |st| {
        let b = oracle_bridge(&simulate_fine(iv, 4, m4, st)?);
        Ok(four_cycle(|i, j| b.get(i, j)))
    })?;
    let block = vec![
        se_row("levy-area/four_cycle", "weak", mean_se(&col(&s, 0)), h4 / 1800.0, k),
        {
            let m = mean_se(&col(&s, 1));
            Row::new("levy-area/four_cycle", "weak_modified", m.n, m.mean, m.se).check(0.0013 * h4, 0.0002 * h4)
        },
        se_row("levy-area/four_cycle", "oracle", mean_se(&oc), h4 / 720.0, k).with_n(m4),
    ];
    timed(&mut rows, t, block);
    Ok(rows)
}

pub(super) fn sst(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let (h, k) = (cfg.h, cfg.se_multiple);
    let iv = Interval::of_length(h)?;
    let root = SeedSpec::new(cfg.seed).child(3);
    let mut rows = Vec::new();

    let t = Instant::now();
    let n = cfg.oracle_paths.unwrap_or(100_000);
    let m = cfg.oracle_steps.unwrap_or(1024);
    let per_path = draw(n, &root.child(0), |st| {
        let f = functionals(&simulate_fine(iv, 2, m, st)?);
        let (w, hh, kk, nn) = (&f.whk.w, &f.whk.h_area, &f.whk.k_area, &f.swing);
        let wh = SstInputs::wh(h, w, hh);
        let est = [
            l_mean(EstimatorKind::Wh, &wh)?,
            l_mean(EstimatorKind::Whn, &SstInputs { n: Some(nn), ..wh })?,
            l_mean(EstimatorKind::Whk, &SstInputs { k: Some(kk), ..wh })?,
        ];
        let mut out = [[0.0; 4]; 2];
        for (i, o) in out.iter_mut().enumerate() {
            let l = f.sst.get(i, i);
            for (e, slot) in est.iter().zip(o.iter_mut()) {
                *slot = (l - e.get(i, i)).powi(2);
            }
            o[3] = kk[i] * nn[i];
        }
        Ok(out)
    })?;
    // coordinates are independent, so each contributes its own sample
    let s: Vec<[f64; 4]> = per_path.into_iter().flatten().collect();
    let (e_wh, e_whn, e_whk, kn) = (col(&s, 0), col(&s, 1), col(&s, 2), col(&s, 3));

    let g = draw(cfg.n(1_000_000), &root.child(1), |st| {
        let x = generate_whk(iv, 1, st)?;
        let inp = SstInputs { k: Some(&x.k_area), ..SstInputs::wh(h, &x.w, &x.h_area) };
        Ok(l_var(EstimatorKind::Whk, &inp)?.get(0, 0))
    })?;
    let vbar = mean_se(&g);
    let mse_whk = mean_se(&e_whk);

    let (r, r_se) = paired_ratio(&e_whn, &e_wh);
    let (kn_mean, kn_var) = k_given_n(&[1.0], h);
    let block = vec![
        se_row("sst/mse_diag", "l_mean_wh", mean_se(&e_wh), 7.0 / 3600.0 * h.powi(4), k).with_n(m),
        {
            let e = mean_se(&e_whn);
            Row::new("sst/mse_diag", "l_mean_whn", e.n, e.mean, e.se).with_n(m)
        },
        Row::new("sst/mse_ratio_whn_over_wh", "l_mean_whn", s.len(), r * r, 2.0 * r * r_se).with_n(m).check_range(0.0, 1.0),
        Row::new("sst/mse_diag", "l_mean_whk", mse_whk.n, mse_whk.mean, mse_whk.se)
            .with_n(m)
            .check(vbar.mean, k * (mse_whk.se.powi(2) + vbar.se.powi(2)).sqrt()),
        se_row("sst/k_given_swing_mean", "oracle", mean_se(&kn), kn_mean[0], k).with_n(m),
        se_row("sst/k_given_swing_var", "oracle", variance_se(&kn), kn_var, k).with_n(m),
    ];
    timed(&mut rows, t, block);
    Ok(rows)
}

/// Pairs of words over `{0, .., d}` with total length at most `max_len`,
/// keeping only those for which `keep` holds on the concatenation.
fn word_pairs(d: u8, max_len: usize, keep: impl Fn(&[u8]) -> bool) -> Vec<(Vec<u8>, Vec<u8>)> {
    let mut words: Vec<Vec<u8>> = vec![vec![]];
    let mut all = Vec::new();
    for _ in 1..max_len {
        words = words.iter().flat_map(|w| (0..=d).map(move |l| [w.as_slice(), &[l]].concat())).collect();
        all.extend(words.clone());
    }
    let mut out = Vec::new();
    for u in &all {
        for v in &all {
            let uv = [u.as_slice(), v].concat();
            if uv.len() <= max_len && keep(&uv) {
                out.push((u.clone(), v.clone()));
            }
        }
    }
    out
}

type ShufflePair = (TensorPoly, TensorPoly, TensorPoly);

fn shuffle_pairs(d: u8, pairs: &[(Vec<u8>, Vec<u8>)]) -> Result<Vec<ShufflePair>> {
    pairs
        .iter()
        .map(|(u, v)| {
            let (pu, pv) = (TensorPoly::word(d, u)?, TensorPoly::word(d, v)?);
            Ok((pu.shuffle(&pv)?, pu, pv))
        })
        .collect()
}

pub(super) fn shuffle_check(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let h = cfg.h;
    let iv = Interval::of_length(h)?;
    let root = SeedSpec::new(cfg.seed).child(4);
    let mut rows = Vec::new();

    let t = Instant::now();
    let mut bad2 = 0usize;
    let mut bad3 = 0usize;
    for i in 0..3u8 {
        for j in 0..3u8 {
            bad2 += decomposition_residual_ij(2, i, j)?.terms().count();
            for l in 0..3u8 {
                bad3 += decomposition_residual_ijk(2, i, j, l)?.terms().count();
            }
        }
    }
    let block = vec![
        Row::new("shuffle-check/residual_terms_ij", "exact_rational", 9, bad2 as f64, 0.0).check(0.0, 0.0),
        Row::new("shuffle-check/residual_terms_ijk", "exact_rational", 27, bad3 as f64, 0.0).check(0.0, 0.0),
    ];
    timed(&mut rows, t, block);

    let t = Instant::now();
    let pairs = shuffle_pairs(2, &word_pairs(2, 3, |w| w.iter().filter(|&&l| l != 0).count() <= 1))?;
    let n = cfg.n(10_000);
    let errs = draw(n, &root.child(0), |st| {
        let x = generate_whk(iv, 2, st)?;
        let g = signature_terms(&x);
        let ev = GaussianEvaluator { terms: &g };
        let mut e = 0.0f64;
        for (uv, u, v) in &pairs {
            e = e.max((uv.evaluate(&ev)? - u.evaluate(&ev)? * v.evaluate(&ev)?).abs());
        }
        Ok(e)
    })?;
    let err = errs.into_iter().fold(0.0, f64::max);
    let block = vec![Row::new("shuffle-check/numeric_identity", "gaussian_terms", n, err, 0.0)
        .with_n(pairs.len())
        .check(0.0, 1e-10 * h.max(1.0).powi(3))];
    timed(&mut rows, t, block);

    let t = Instant::now();
    let pairs = word_pairs(2, 4, |_| true);
    let polys = shuffle_pairs(2, &pairs)?;
    let n_paths = 100;
    let errs = draw(n_paths, &root.child(1), |st| {
        let p = simulate_fine(iv, 2, 64, st)?;
        let mut e = 0.0f64;
        for ((u, v), (uv, _, _)) in pairs.iter().zip(&polys) {
            let mut lhs = 0.0;
            for (w, c) in uv.terms() {
                lhs += num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN) * word_integral(&p, &w.0)?;
            }
            e = e.max((lhs - word_integral(&p, u)? * word_integral(&p, v)?).abs());
        }
        Ok(e)
    })?;
    let err = errs.into_iter().fold(0.0, f64::max);
    let block = vec![Row::new("shuffle-check/numeric_identity", "oracle_path", n_paths, err, 0.0)
        .with_n(pairs.len())
        .check(0.0, 1e-10 * h.max(1.0).powi(4))];
    timed(&mut rows, t, block);
    Ok(rows)
}

fn step_sizes(t: f64, ns: &[usize]) -> Vec<f64> {
    ns.iter().map(|&n| t / n as f64).collect()
}

pub(super) fn convergence(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let root = SeedSpec::new(cfg.seed).child(5);
    let mut rows = Vec::new();

    // SORT, step halving on the same Brownian path
    let t = Instant::now();
    let sort = Sort::new(cfg.sort_gamma, Quadratic { d: 1 })?;
    let x_std = cfg.sort_x0_var.sqrt();
    let init = |st: &mut RandomStream| sort.init(vec![st.gaussian(x_std)], vec![0.0]);
    let runner = Runner::new(&sort, &init);
    let n = cfg.n(10_000);
    let mut block = Vec::new();
    let mut errs = Vec::new();
    for (j, &steps) in cfg.sort_ns.iter().enumerate() {
        let e = step_halving(&runner, cfg.sort_t, steps, n, &root.child(0).child(j as u64))?;
        block.push(Row::new("convergence/uld_strong", "sort", e.n, e.value, e.se).with_n(steps));
        errs.push(e.value);
    }
    let (slope, se) = loglog_slope(&step_sizes(cfg.sort_t, &cfg.sort_ns), &errs);
    block.push(Row::new("convergence/uld_slope", "sort", n, slope, se).check(3.0, 0.3));
    timed(&mut rows, t, block);

    // IGBM against a fine log-ODE reference
    let t = Instant::now();
    let p = IgbmParams::new(cfg.igbm_a, cfg.igbm_b, cfg.igbm_sigma)?;
    let schemes: Vec<Igbm<f64>> = IgbmMethod::all().iter().map(|&method| Igbm { params: p, method }).collect();
    let y0 = cfg.igbm_y0;
    let init = move |_: &mut RandomStream| y0;
    let fine = Runner::new(&schemes[0], &init);
    let coarse: Vec<_> = schemes.iter().map(|s| Runner::new(s, &init)).collect();
    let ns = &cfg.igbm_ns;
    let (refs, outs) = coupled_terminals(&fine, &coarse, cfg.igbm_t, ns, cfg.igbm_fine_steps, n, &root.child(1))?;
    let table = strong_errors(&refs, &outs, schemes.len(), ns.len());
    let hs = step_sizes(cfg.igbm_t, ns);
    let mut block = Vec::new();
    for (s, scheme) in schemes.iter().enumerate() {
        let name = scheme.method.name();
        for (j, &steps) in ns.iter().enumerate() {
            let e = table[s][j].0;
            block.push(Row::new("convergence/igbm_strong", name, e.n, e.value, e.se).with_n(steps));
        }
        let es: Vec<f64> = table[s].iter().map(|x| x.0.value).collect();
        let (slope, se) = loglog_slope(&hs, &es);
        let row = Row::new("convergence/igbm_strong_slope", name, n, slope, se);
        block.push(if scheme.method == IgbmMethod::LogOde { row.check_range(1.4, 2.0) } else { row });
    }
    // ordering at the finest coarse grid: each ratio of errors below one
    let last = ns.len() - 1;
    for s in 0..3 {
        let (r, se) = paired_ratio(&table[s][last].1, &table[s + 1][last].1);
        let label = format!("{}/{}", schemes[s].method.name(), schemes[s + 1].method.name());
        block.push(Row::new("convergence/igbm_strong_ordering", label, n, r, se).with_n(ns[last]).check_range(0.0, 1.0));
    }
    // weak errors of the call payoff need coarse grids to rise above the noise
    let ns = &cfg.igbm_weak_ns;
    let n_weak = cfg.paths.unwrap_or(cfg.igbm_weak_paths);
    let (refs, outs) = coupled_terminals(&fine, &coarse, cfg.igbm_t, ns, cfg.igbm_fine_steps, n_weak, &root.child(3))?;
    let hs = step_sizes(cfg.igbm_t, ns);
    let strike = cfg.igbm_b;
    let mut weak_slopes = Vec::new();
    for (s, scheme) in schemes.iter().enumerate() {
        let name = scheme.method.name();
        let mut weak = Vec::new();
        for (j, &steps) in ns.iter().enumerate() {
            let ys: Vec<Vec<f64>> = outs.iter().map(|o| o[j][s].clone()).collect();
            let w = weak_error(&refs, &ys, |y| (y[0] - strike).max(0.0));
            block.push(Row::new("convergence/igbm_weak", name, w.n, w.mean, w.se).with_n(steps));
            weak.push(w.mean);
        }
        let (ws, wse) = loglog_slope(&hs, &weak);
        block.push(Row::new("convergence/igbm_weak_slope", name, n_weak, ws, wse));
        weak_slopes.push((scheme.method, ws, wse));
    }
    let slope_of = |m: IgbmMethod| weak_slopes.iter().find(|x| x.0 == m).map(|x| (x.1, x.2)).unwrap_or((f64::NAN, f64::NAN));
    let (a, b) = (slope_of(IgbmMethod::LogOde), slope_of(IgbmMethod::EulerMaruyama));
    block.push(
        Row::new("convergence/igbm_weak_slope_gap", "log_ode-euler", n_weak, a.0 - b.0, (a.1 * a.1 + b.1 * b.1).sqrt())
            .check_range(0.0, 4.0),
    );
    timed(&mut rows, t, block);

    // FitzHugh-Nagumo against a fine high order splitting
    let t = Instant::now();
    let p = FhnParams::new(cfg.fhn_eps, cfg.fhn_gamma, cfg.fhn_beta, cfg.fhn_sigma1, cfg.fhn_sigma2)?;
    let ho = Fhn { params: p, method: FhnMethod::HighOrder };
    let st = Fhn { params: p, method: FhnMethod::Strang };
    let init = |_: &mut RandomStream| [0.0, 0.0];
    let fine = Runner::new(&ho, &init);
    let coarse = [Runner::new(&ho, &init), Runner::new(&st, &init)];
    let ns = &cfg.fhn_ns;
    let n_fhn = cfg.paths.unwrap_or(cfg.fhn_paths);
    let (refs, outs) = coupled_terminals(&fine, &coarse, cfg.fhn_t, ns, cfg.fhn_fine_steps, n_fhn, &root.child(2))?;
    let table = strong_errors(&refs, &outs, 2, ns.len());
    let hs = step_sizes(cfg.fhn_t, ns);
    let mut block = Vec::new();
    for (s, (scheme, target)) in [(&ho, 1.5), (&st, 1.0)].into_iter().enumerate() {
        let name = crate::solvers::Scheme::<f64>::name(scheme);
        for (j, &steps) in ns.iter().enumerate() {
            let e = table[s][j].0;
            block.push(Row::new("convergence/fhn_strong", name, e.n, e.value, e.se).with_n(steps));
        }
        let es: Vec<f64> = table[s].iter().map(|x| x.0.value).collect();
        let (slope, se) = loglog_slope(&hs, &es);
        block.push(Row::new("convergence/fhn_slope", name, n_fhn, slope, se).check(target, 0.2));
    }
    timed(&mut rows, t, block);
    Ok(rows)
}

pub(super) fn ratio(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let root = SeedSpec::new(cfg.seed).child(6);
    let t = Instant::now();
    let p = Oscillator { sigma: cfg.osc_sigma };
    let mk = |method| Generic { problem: p, method };
    let schemes = [
        mk(GenericMethod::ShiftedRalston),
        mk(GenericMethod::Sra1),
        mk(GenericMethod::ShiftedEuler),
        mk(GenericMethod::EulerMaruyama),
    ];
    let y0 = cfg.osc_y0;
    let init = move |_: &mut RandomStream| vec![y0];
    let fine = Runner::new(&schemes[0], &init);
    let coarse: Vec<_> = schemes.iter().map(|s| Runner::new(s, &init)).collect();
    let ns = &cfg.ratio_ns;
    let n = cfg.n(10_000);
    let (refs, outs) = coupled_terminals(&fine, &coarse, cfg.osc_t, ns, cfg.ratio_fine_steps, n, &root.child(0))?;
    let table = strong_errors(&refs, &outs, schemes.len(), ns.len());
    let mut block = Vec::new();
    for (j, &steps) in ns.iter().enumerate() {
        for (s, scheme) in schemes.iter().enumerate() {
            let e = table[s][j].0;
            block.push(Row::new("ratio/oscillator_strong", scheme.method.name(), e.n, e.value, e.se).with_n(steps));
        }
        let (r, se) = paired_ratio(&table[0][j].1, &table[1][j].1);
        let row = Row::new("ratio/shifted_ralston_over_sra1", "shifted_ralston/sra1", n, r, se).with_n(steps);
        block.push(if steps >= 32 { row.check(0.37, 0.05) } else { row });
        let (r, se) = paired_ratio(&table[2][j].1, &table[3][j].1);
        let row = Row::new("ratio/shifted_euler_over_euler", "shifted_euler/euler", n, r, se).with_n(steps);
        block.push(if steps >= 10 { row.check_range(0.25, 0.45) } else { row });
    }
    let mut rows = Vec::new();
    timed(&mut rows, t, block);
    Ok(rows)
}

pub(super) fn mlmc(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let root = SeedSpec::new(cfg.seed).child(7);
    let t = Instant::now();
    let p = HestonParams::new(
        cfg.heston_r,
        cfg.heston_kappa,
        cfg.heston_theta,
        cfg.heston_sigma,
        cfg.heston_s0,
        cfg.heston_v0,
        cfg.heston_strike,
        cfg.heston_t,
    )?;
    let scheme = HestonMilstein { params: p };
    let init = move |_: &mut RandomStream| [p.s0, p.v0];
    let runner = Runner::new(&scheme, &init);
    let payoff = move |y: &[f64]| p.payoff(y[0]);
    let n = cfg.n(20_000);
    let levels = cfg.mlmc_levels;
    let rep = mlmc_estimate(&runner, &payoff, p.t, cfg.mlmc_base_steps, &vec![n; levels], &root.child(0))?;
    let finest = cfg.mlmc_base_steps << (levels - 1);
    let single = mlmc_estimate(&runner, &payoff, p.t, finest, &[n], &root.child(1))?;

    let mut block = Vec::new();
    for l in &rep.levels {
        let se = (l.variance / l.samples as f64).sqrt();
        block.push(Row::new(format!("mlmc/level_{}_mean", l.level), "milstein_no_area", l.samples, l.mean, se).with_n(l.steps));
        block.push(Row::new(format!("mlmc/level_{}_variance", l.level), "milstein_no_area", l.samples, l.variance, f64::NAN).with_n(l.steps));
    }
    let xs: Vec<f64> = rep.levels[1..].iter().map(|l| l.level as f64).collect();
    let ys: Vec<f64> = rep.levels[1..].iter().map(|l| l.variance.log2()).collect();
    let (slope, _, slope_se) = linear_fit(&xs, &ys);
    block.push(Row::new("mlmc/level_variance_slope", "milstein_no_area", n, slope, slope_se).check(-1.0, 0.3));
    block.push(Row::new("mlmc/estimate", "milstein_no_area", n, rep.estimate, rep.se).with_n(finest));
    block.push(Row::new("mlmc/single_level_estimate", "milstein_no_area", n, single.estimate, single.se).with_n(finest));
    let se = (rep.se * rep.se + single.se * single.se).sqrt();
    block.push(Row::new("mlmc/telescoping_difference", "milstein_no_area", n, rep.estimate - single.estimate, se).with_n(finest).check(0.0, 3.0 * se));
    let mut rows = Vec::new();
    timed(&mut rows, t, block);
    Ok(rows)
}
