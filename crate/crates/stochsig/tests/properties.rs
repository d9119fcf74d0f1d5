use proptest::prelude::*;

use stochsig::brownian::{chen_combine, generate_whk, midpoint_split_with, Increment, Interval, MidpointAux, WhSample};
use stochsig::levy_weak::{bridge_area_cdf, logistic_cdf, modified_weak_levy_area_d4, two_step_area, weak_levy_area};
use stochsig::oracle::{simulate_fine, word_integral};
use stochsig::rng::SeedSpec;
use stochsig::shuffle::{shuffle_words, TensorPoly};
use stochsig::solvers::BrownianPath;
use stochsig::sst::{l_mean, l_var, EstimatorKind, SstInputs};
use stochsig::stats::ks_statistic;

fn word(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..=2, 0..=max_len)
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn shuffle_is_commutative(u in word(3), v in word(3)) {
        let (pu, pv) = (TensorPoly::word(2, &u).unwrap(), TensorPoly::word(2, &v).unwrap());
        prop_assert_eq!(pu.shuffle(&pv).unwrap(), pv.shuffle(&pu).unwrap());
    }

    #[test]
    fn shuffle_is_associative(u in word(2), v in word(2), w in word(2)) {
        let (pu, pv, pw) = (TensorPoly::word(2, &u).unwrap(), TensorPoly::word(2, &v).unwrap(), TensorPoly::word(2, &w).unwrap());
        let left = pu.shuffle(&pv).unwrap().shuffle(&pw).unwrap();
        let right = pu.shuffle(&pv.shuffle(&pw).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn shuffle_has_binomial_size(u in word(4), v in word(4)) {
        let total: u64 = shuffle_words(&u, &v).values().sum();
        prop_assert_eq!(total, binomial((u.len() + v.len()) as u64, u.len() as u64));
        for w in shuffle_words(&u, &v).keys() {
            prop_assert_eq!(w.0.len(), u.len() + v.len());
        }
    }

    #[test]
    fn empty_word_is_the_unit(u in word(4)) {
        let pu = TensorPoly::word(2, &u).unwrap();
        prop_assert_eq!(pu.shuffle(&TensorPoly::one(2)).unwrap(), pu.clone());
        prop_assert_eq!(pu.concat(&TensorPoly::one(2)).unwrap(), pu);
    }

    #[test]
    fn shuffle_identity_holds_on_paths(u in word(2), v in word(2), seed in any::<u64>()) {
        let iv = Interval::of_length(0.8).unwrap();
        let p = simulate_fine(iv, 2, 16, &mut SeedSpec::new(seed).stream()).unwrap();
        let mut lhs = 0.0;
        for (w, m) in shuffle_words(&u, &v) {
            lhs += m as f64 * word_integral(&p, &w.0).unwrap();
        }
        let rhs = word_integral(&p, &u).unwrap() * word_integral(&p, &v).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn split_then_combine_round_trips(
        h in 1e-3f64..10.0, w in -3.0f64..3.0, hh in -1.0f64..1.0, z in -1.0f64..1.0, n in -1.0f64..1.0,
    ) {
        let wh = WhSample { interval: Interval::of_length(h).unwrap(), w: vec![w], h_area: vec![hh] };
        let (l, r) = midpoint_split_with(&wh, &MidpointAux { z: vec![z], n_gauss: vec![n] });
        let back = chen_combine(&l, &r).unwrap();
        prop_assert!(close(back.w[0], w, 1e-12));
        prop_assert!(close(back.h_area[0], hh, 1e-12));
        prop_assert!(close(l.interval.h() + r.interval.h(), h, 1e-14));
    }

    #[test]
    fn increment_concat_is_associative(seed in any::<u64>(), h1 in 0.01f64..2.0, h2 in 0.01f64..2.0, h3 in 0.01f64..2.0) {
        let mut s = SeedSpec::new(seed).stream();
        let (a, b, c) = (Increment::sample(h1, &mut s), Increment::sample(h2, &mut s), Increment::sample(h3, &mut s));
        let (x, y) = (a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
        prop_assert!(close(x.h, y.h, 1e-13) && close(x.w, y.w, 1e-13));
        prop_assert!(close(x.hh, y.hh, 1e-11) && close(x.k, y.k, 1e-11));
    }

    #[test]
    fn coarsening_preserves_the_increment(seed in any::<u64>(), d in 1usize..4, blocks in 1usize..5, r in 1usize..5) {
        let mut s = SeedSpec::new(seed).stream();
        let p = BrownianPath::uniform(d, 0.1f64, blocks * r, &mut s).unwrap();
        let c = p.coarsen(r).unwrap();
        prop_assert_eq!(c.steps(), blocks);
        prop_assert!(close(c.total_time(), p.total_time(), 1e-13));
        for i in 0..d {
            let fine: f64 = (0..p.steps()).map(|k| p.increment(k, i).w).sum();
            let coarse: f64 = (0..c.steps()).map(|k| c.increment(k, i).w).sum();
            prop_assert!(close(fine, coarse, 1e-12));
        }
    }

    #[test]
    fn weak_areas_are_antisymmetric(seed in any::<u64>(), d in 1usize..6, h in 1e-3f64..5.0) {
        let mut s = SeedSpec::new(seed).stream();
        let whk = generate_whk(Interval::of_length(h).unwrap(), d, &mut s).unwrap();
        prop_assert!(weak_levy_area(&whk, &mut s).is_antisymmetric());
        if d == 4 {
            prop_assert!(modified_weak_levy_area_d4(&whk, &mut s).unwrap().is_antisymmetric());
        }
    }

    #[test]
    fn two_step_area_is_antisymmetric(seed in any::<u64>(), d in 2usize..5) {
        let mut s = SeedSpec::new(seed).stream();
        let iv = Interval::of_length(0.5).unwrap();
        let (x, y) = (generate_whk(iv, d, &mut s).unwrap(), generate_whk(iv, d, &mut s).unwrap());
        let (a, b) = (weak_levy_area(&x, &mut s), weak_levy_area(&y, &mut s));
        prop_assert!(two_step_area(&x.w, &y.w, &a, &b).unwrap().is_antisymmetric());
    }

    #[test]
    fn sst_estimates_are_symmetric_and_variances_positive(seed in any::<u64>(), d in 1usize..5, h in 1e-3f64..4.0) {
        let mut s = SeedSpec::new(seed).stream();
        let x = generate_whk(Interval::of_length(h).unwrap(), d, &mut s).unwrap();
        let n: Vec<f64> = (0..d).map(|_| s.rademacher()).collect();
        let inp = SstInputs { k: Some(&x.k_area), n: Some(&n), ..SstInputs::wh(h, &x.w, &x.h_area) };
        for kind in [EstimatorKind::Wh, EstimatorKind::Whk, EstimatorKind::Whn] {
            prop_assert!(l_mean(kind, &inp).unwrap().is_symmetric());
            let v = l_var(kind, &inp).unwrap();
            prop_assert!(v.is_symmetric());
            for i in 0..d {
                for j in 0..d {
                    prop_assert!(v.get(i, j) > 0.0);
                }
            }
        }
    }

    #[test]
    fn logistic_cdf_is_a_distribution(x in -50.0f64..50.0, dx in 0.0f64..5.0, h in 1e-2f64..10.0) {
        let (a, b) = (bridge_area_cdf(x, h).unwrap(), bridge_area_cdf(x + dx, h).unwrap());
        prop_assert!((0.0..=1.0).contains(&a) && a <= b);
        prop_assert!(close(logistic_cdf(x, h) + logistic_cdf(-x, h), 1.0, 1e-12));
    }

    #[test]
    fn ks_statistic_is_bounded(xs in prop::collection::vec(-5.0f64..5.0, 1..50)) {
        let mut v = xs.clone();
        let d = ks_statistic(&mut v, |x| logistic_cdf(x, 1.0));
        prop_assert!((0.0..=1.0).contains(&d));
    }
}
