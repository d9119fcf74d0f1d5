//! Closed-form laws checked against brute-force fine-grid Brownian paths.

use stochsig::brownian::Interval;
use stochsig::levy_weak::{area_moment_oracle, cond_moment_fns, CondMoment, MomentKind};
use stochsig::oracle::{functionals, simulate_fine, OracleFunctionals};
use stochsig::rng::SeedSpec;
use stochsig::solvers::sde::{Generic, GenericMethod, Oscillator};
use stochsig::solvers::{terminal, BrownianPath};
use stochsig::sst::{l_mean, l_var, EstimatorKind, SstInputs};
use stochsig::stats::{mean_se, variance_se, MeanSe};

fn sample(d: usize, m: usize, n: usize, h: f64, seed: u64) -> Vec<OracleFunctionals<f64>> {
    let iv = Interval::of_length(h).unwrap();
    let mut s = SeedSpec::new(seed).stream();
    (0..n).map(|_| functionals(&simulate_fine(iv, d, m, &mut s).unwrap())).collect()
}

fn assert_within(m: MeanSe, target: f64, k: f64, what: &str) {
    assert!(m.within(target, k), "{what}: {} +- {} vs {target} (z = {:.2})", m.mean, m.se, m.z(target));
}

#[test]
fn space_time_areas_have_gaussian_variances() {
    let h = 0.7;
    let f = sample(1, 256, 40_000, h, 1);
    let hh: Vec<f64> = f.iter().map(|x| x.whk.h_area[0]).collect();
    let kk: Vec<f64> = f.iter().map(|x| x.whk.k_area[0]).collect();
    let w: Vec<f64> = f.iter().map(|x| x.whk.w[0]).collect();
    assert_within(variance_se(&w), h, 5.0, "Var W");
    assert_within(variance_se(&hh), h / 12.0, 5.0, "Var H");
    assert_within(variance_se(&kk), h / 720.0, 5.0, "Var K");
    let wk: Vec<f64> = w.iter().zip(&kk).map(|(a, b)| a * b).collect();
    let hk: Vec<f64> = hh.iter().zip(&kk).map(|(a, b)| a * b).collect();
    assert_within(mean_se(&wk), 0.0, 5.0, "E[WK]");
    assert_within(mean_se(&hk), 0.0, 5.0, "E[HK]");
}

#[test]
fn area_and_bridge_moments() {
    let h = 1.0;
    let f = sample(3, 256, 40_000, h, 2);
    let a2: Vec<f64> = f.iter().map(|x| x.area.get(0, 1).powi(2)).collect();
    let b4: Vec<f64> = f.iter().map(|x| x.bridge_area.get(0, 1).powi(4)).collect();
    let cross: Vec<f64> = f.iter().map(|x| (x.bridge_area.get(0, 1) * x.bridge_area.get(1, 2)).powi(2)).collect();
    let hh_b: Vec<f64> = f
        .iter()
        .map(|x| x.whk.h_area[0] * x.whk.h_area[2] * x.bridge_area.get(0, 1) * x.bridge_area.get(1, 2))
        .collect();
    assert_within(mean_se(&a2), area_moment_oracle(MomentKind::VarArea, h), 5.0, "E[A^2]");
    assert_within(mean_se(&b4), area_moment_oracle(MomentKind::FourthBridge, h), 5.0, "E[b^4]");
    assert_within(mean_se(&cross), area_moment_oracle(MomentKind::CrossBridge, h), 5.0, "E[b^2 b^2]");
    assert_within(mean_se(&hh_b), area_moment_oracle(MomentKind::HhBridgeCross, h), 5.0, "E[HHbb]");
}

#[test]
fn conditional_area_variance_averages_correctly() {
    let h = 1.0;
    let f = sample(2, 256, 40_000, h, 3);
    let mut resid = Vec::new();
    let mut var = Vec::new();
    for x in &f {
        let (w, hh) = (&x.whk.w, &x.whk.h_area);
        let mean = cond_moment_fns(w, hh, h, 0, 1, CondMoment::Mean).unwrap();
        resid.push((x.area.get(0, 1) - mean).powi(2));
        var.push(cond_moment_fns(w, hh, h, 0, 1, CondMoment::Var).unwrap());
    }
    let target = var.iter().sum::<f64>() / var.len() as f64;
    assert_within(mean_se(&resid), target, 5.0, "E[(A - E[A|W,H])^2]");
}

#[test]
fn four_cycle_of_true_bridge_areas() {
    let f = sample(4, 128, 20_000, 1.0, 4);
    let c: Vec<f64> = f
        .iter()
        .map(|x| {
            let b = &x.bridge_area;
            b.get(0, 1) * b.get(1, 2) * b.get(2, 3) * b.get(3, 0)
        })
        .collect();
    assert_within(mean_se(&c), 1.0 / 720.0, 5.0, "four cycle");
}

#[test]
fn sst_mean_and_estimator_errors() {
    let h = 1.0;
    let f = sample(2, 512, 40_000, h, 5);
    let (mut l, mut e_wh, mut e_whn, mut e_whk, mut v_whk) = (vec![], vec![], vec![], vec![], vec![]);
    for x in &f {
        let (w, hh, k, n) = (&x.whk.w, &x.whk.h_area, &x.whk.k_area, &x.swing);
        let wh = SstInputs::wh(h, w, hh);
        let whn = SstInputs { n: Some(n), ..wh };
        let whk = SstInputs { k: Some(k), ..wh };
        let (a, b, c) = (
            l_mean(EstimatorKind::Wh, &wh).unwrap(),
            l_mean(EstimatorKind::Whn, &whn).unwrap(),
            l_mean(EstimatorKind::Whk, &whk).unwrap(),
        );
        let vk = l_var(EstimatorKind::Whk, &whk).unwrap();
        for i in 0..2 {
            let li = x.sst.get(i, i);
            l.push(li);
            e_wh.push((li - a.get(i, i)).powi(2));
            e_whn.push((li - b.get(i, i)).powi(2));
            e_whk.push((li - c.get(i, i)).powi(2));
            v_whk.push(vk.get(i, i));
        }
    }
    assert_within(mean_se(&l), h * h / 12.0, 5.0, "E[L]");
    assert_within(mean_se(&e_wh), 7.0 / 3600.0, 5.0, "MSE given (W, H)");
    let (whn, wh) = (mean_se(&e_whn), mean_se(&e_wh));
    assert!(whn.mean + 5.0 * whn.se < wh.mean, "swing does not help: {} vs {}", whn.mean, wh.mean);
    let target = v_whk.iter().sum::<f64>() / v_whk.len() as f64;
    assert!((target - 0.000272_11).abs() < 2e-6, "unconditional WHK variance {target}");
    assert_within(mean_se(&e_whk), target, 5.0, "MSE given (W, H, K)");
}

/// Over one small step the shifted Ralston error relative to SRA1 approaches
/// `sqrt(7/30 - 5/(16 pi))`; the remaining gap shrinks like `h^(1/2)`.
#[test]
fn local_error_ratio_of_shifted_ralston_to_sra1() {
    let target = (7.0 / 30.0 - 5.0 / (16.0 * std::f64::consts::PI)).sqrt();
    assert!((target - 0.3659).abs() < 1e-4);
    let p = Oscillator { sigma: 1.0 };
    let sr = Generic { problem: p, method: GenericMethod::ShiftedRalston };
    let sra1 = Generic { problem: p, method: GenericMethod::Sra1 };
    let h = 2f64.powi(-12);
    let sub = 256;
    let n = 40_000;
    let mut s = SeedSpec::new(6).stream();
    let (mut ea, mut eb) = (0.0, 0.0);
    for _ in 0..n {
        let fine = BrownianPath::uniform(1, h / sub as f64, sub, &mut s).unwrap();
        let one = fine.coarsen(sub).unwrap();
        let y_ref = terminal(&sr, vec![1.0], &fine).unwrap()[0];
        ea += (terminal(&sr, vec![1.0], &one).unwrap()[0] - y_ref).powi(2);
        eb += (terminal(&sra1, vec![1.0], &one).unwrap()[0] - y_ref).powi(2);
    }
    let ratio = (ea / eb).sqrt();
    assert!((ratio - target).abs() < 0.03, "local ratio {ratio} vs {target}");
}
