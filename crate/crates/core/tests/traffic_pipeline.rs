use datacollab::privacy::*;
use datacollab::traffic::*;
use proptest::prelude::*;

fn noiseless(q: f64, red: f64, cycles: u32) -> MovementConfig {
    MovementConfig { jitter: 0.0, ..MovementConfig::case1(q, red, cycles) }
}

#[test]
fn round_trip_recovers_flow_noiseless() {
    let fd = FundamentalDiagram::default();
    for &q in &[0.05, 0.1, 0.2, 0.35, 0.5] {
        let ds = simulate_foq(&fd, &noiseless(q, 40.0, 3), 1).unwrap();
        assert!(ds.len() >= 3);
        let fit = fit_case1(&ds).unwrap();
        let q_hat = slope_to_flow(fit.slope, &fd).unwrap();
        assert!((q_hat - q).abs() / q < 1e-9, "q={q} q_hat={q_hat}");
    }
}

#[test]
fn single_owner_estimate_within_one_percent() {
    let fd = FundamentalDiagram::default();
    let cfg = MovementConfig { lanes: 2, ..noiseless(0.6, 40.0, 2) };
    let ds = simulate_foq(&fd, &cfg, 2).unwrap();
    let est = estimate_demands(&[MovementInput {
        fd,
        lanes: 2,
        segment_start: None,
        shares: vec![OwnerShare::Points(ds)],
        prior_flow: 0.0,
        prior_sd: 0.0,
        fuse_prior: false,
    }])
    .unwrap();
    assert!((est[0].flow - 0.6).abs() / 0.6 < 0.01);
}

#[test]
fn identical_owners_halve_variance() {
    let fd = FundamentalDiagram::default();
    let ds = simulate_foq(&fd, &MovementConfig::case1(0.2, 40.0, 5), 3).unwrap();
    let input = |n: usize| MovementInput {
        fd,
        lanes: 1,
        segment_start: None,
        shares: vec![OwnerShare::Points(ds.clone()); n],
        prior_flow: 0.0,
        prior_sd: 0.0,
        fuse_prior: false,
    };
    let one = estimate_demands(&[input(1)]).unwrap();
    let two = estimate_demands(&[input(2)]).unwrap();
    assert!((two[0].slope_variance - one[0].slope_variance / 2.0).abs() < 1e-15);
}

#[test]
fn stricter_budget_widens_posterior() {
    let fd = FundamentalDiagram::default();
    let bounds = FoQBounds { t_max: 60.0, h_max: 150.0 };
    let w = SensitivityWeights::new([1.0, 1.0, 1.0, 0.01], bounds).unwrap();
    let mut sum = [0.0, 0.0];
    for rep in 0..200u64 {
        let ds = simulate_foq(&fd, &MovementConfig::case1(0.2, 40.0, 20), rep).unwrap();
        let stats = query_stats(&ds, &bounds).unwrap();
        for (slot, eps) in [0.9, 0.1].into_iter().enumerate() {
            let pb = PrivacyBudget::new(eps, 0.05).unwrap();
            let noise = noise_scales(&w, &pb).unwrap();
            let released = perturb_stats(&stats, &w, &pb, 1000 + rep).unwrap();
            let share = OwnerShare::Perturbed {
                stats: released,
                noise,
                reference_lam_t: released.lam_t.max(stats.lam_t * 0.1),
            };
            let est = estimate_demands(&[MovementInput {
                fd,
                lanes: 1,
                segment_start: None,
                shares: vec![share],
                prior_flow: 0.05,
                prior_sd: 0.05,
                fuse_prior: false,
            }])
            .unwrap();
            sum[slot] += est[0].slope_variance.min(1e6);
        }
    }
    assert!(sum[1] > sum[0]);
}

#[test]
fn thinned_recovery_within_ten_percent_on_average() {
    let fd = FundamentalDiagram::default();
    let q = 0.25;
    let cfg = MovementConfig { penetration: 0.2, ..MovementConfig::case1(q, 40.0, 20) };
    let errs: Vec<f64> = (0..50u64)
        .map(|seed| {
            let ds = simulate_foq(&fd, &cfg, seed).unwrap();
            let fit = fit_case1(&ds).unwrap();
            (slope_to_flow_clamped(fit.slope, &fd) - q).abs() / q
        })
        .collect();
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    assert!(mean < 0.10, "mean relative error {mean}");
}

#[test]
fn case2_segments_are_recovered() {
    let fd = FundamentalDiagram::default();
    let cfg = MovementConfig { case: ArrivalCase::Case2 { discharge: 15.0 }, ..noiseless(0.2, 60.0, 1) };
    let ds = simulate_foq(&fd, &cfg, 1).unwrap();
    let tb = case2_breakpoint(&fd, 15.0);
    let split =
        |keep: &dyn Fn(f64) -> bool| FoQDataset::new(0, 0, ds.points.iter().copied().filter(|p| keep(p.t)).collect());
    let seg_a = split(&|t| t < tb - 1e-9);
    let seg_b = split(&|t| t > tb + 1e-9);
    let a = fit_case2a(&seg_a, -fd.w).unwrap();
    assert!(a.intercept.unwrap().abs() < 1e-9);
    assert!(a.sigma2 < 1e-18);
    let b = fit_case2b(&seg_b).unwrap();
    assert!((slope_to_flow(b.slope, &fd).unwrap() - 0.2).abs() < 1e-9);
}

#[test]
fn sample_mean_matches_posterior() {
    let e = DemandEstimate {
        slope_mean: -1.0,
        slope_variance: 0.01,
        flow: 0.3,
        flow_variance: 0.0004,
        capacity: 1.0,
        from_prior: false,
        dropped: 0,
    };
    let draws = sample_true_demand(&[e], 10_000, 5);
    let mean = draws.iter().map(|d| d[0]).sum::<f64>() / 1e4;
    assert!((mean - 0.3).abs() < 3.0 * 0.02 / 100.0);
}

fn two_param_oracle(points: &[(f64, f64)]) -> (f64, f64) {
    // normal equations [Σ1 Σt; Σt Σt²][γ ψ]ᵀ = [Σh Σth]ᵀ, solved by Cramer's rule
    let n = points.len() as f64;
    let st: f64 = points.iter().map(|p| p.0).sum();
    let stt: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sh: f64 = points.iter().map(|p| p.1).sum();
    let sth: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let det = n * stt - st * st;
    let gamma = (sh * stt - st * sth) / det;
    let psi = (n * sth - st * sh) / det;
    (psi, gamma)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn case2b_matches_normal_equations(points in prop::collection::vec((0.0f64..60.0, -150.0f64..0.0), 50)) {
        let ds = FoQDataset::new(0, 0, points.iter().map(|&(t, h)| FoQPoint::new(t, h)).collect());
        let fit = fit_case2b(&ds).unwrap();
        let (psi, gamma) = two_param_oracle(&points);
        prop_assert!((fit.slope - psi).abs() < 1e-9);
        prop_assert!((fit.intercept.unwrap() - gamma).abs() < 1e-9);
    }

    #[test]
    fn slope_steepens_with_flow(q1 in 0.06f64..0.5, dq in 0.01f64..0.05) {
        let fd = FundamentalDiagram::default();
        let q2 = (q1 + dq).min(0.55);
        let s1 = fit_case1(&simulate_foq(&fd, &noiseless(q1, 40.0, 2), 0).unwrap()).unwrap().slope;
        let s2 = fit_case1(&simulate_foq(&fd, &noiseless(q2, 40.0, 2), 0).unwrap()).unwrap().slope;
        prop_assert!(s2 < s1);
    }

    #[test]
    fn replication_scales_slope_variance(seed in 0u64..1000, k in 2usize..6) {
        let fd = FundamentalDiagram::default();
        let ds = simulate_foq(&fd, &MovementConfig::case1(0.2, 40.0, 3), seed).unwrap();
        let rep = FoQDataset::new(0, 0, ds.points.iter().cycle().take(ds.len() * k).copied().collect());
        let a = fit_case1(&ds).unwrap();
        let b = fit_case1(&rep).unwrap();
        // Λ_T grows k-fold; σ̂² moves only through its N − 1 denominator
        let n = ds.len() as f64;
        let kf = k as f64;
        let expected = a.slope_variance * (n - 1.0) / (kf * n - 1.0);
        prop_assert!((b.slope_variance - expected).abs() <= 1e-9 * expected.max(1e-30));
        prop_assert!(b.slope_variance <= a.slope_variance / kf * (1.0 + 1.0 / n));
    }

    #[test]
    fn fusion_permutation_and_associativity(est in prop::collection::vec((-5.0f64..0.0, 0.01f64..2.0), 3)) {
        let all = fuse_estimates(&est).unwrap();
        let rev: Vec<_> = est.iter().rev().copied().collect();
        let r = fuse_estimates(&rev).unwrap();
        prop_assert!((all.0 - r.0).abs() < 1e-12 && (all.1 - r.1).abs() < 1e-12);
        let left = fuse_estimates(&est[..2]).unwrap();
        let nested = fuse_estimates(&[left, est[2]]).unwrap();
        prop_assert!((all.0 - nested.0).abs() < 1e-12 && (all.1 - nested.1).abs() < 1e-12);
        // product of Gaussians, expanded directly
        let p: f64 = est.iter().map(|e| 1.0 / e.1).sum();
        let m: f64 = est.iter().map(|e| e.0 / e.1).sum::<f64>() / p;
        prop_assert!((all.0 - m).abs() < 1e-12 && (all.1 - 1.0 / p).abs() < 1e-12);
    }

    #[test]
    fn flow_increases_with_slope_magnitude(a in 0.001f64..5.0, b in 0.001f64..5.0) {
        let fd = FundamentalDiagram::default();
        prop_assume!((a - b).abs() > 1e-9);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(slope_to_flow(-hi, &fd).unwrap() > slope_to_flow(-lo, &fd).unwrap());
    }
}
