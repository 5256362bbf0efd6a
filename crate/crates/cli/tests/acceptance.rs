//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Tolerances are pinned here.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use datacollab::game::counterexample::{followers, EXPECTED_TABLE};
use datacollab::game::*;
use datacollab::privacy::*;
use datacollab::rng::rng_from_seed;
use datacollab::signal::*;
use datacollab::sim::{run_game_on, utility_surface, Region, Scenario};
use datacollab::traffic::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const BOUNDS: FoQBounds = FoQBounds { t_max: 60.0, h_max: 150.0 };

type Criterion = (&'static str, Duration, Box<dyn Fn() -> Verdict>);

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

fn foq_line(n: usize, psi: f64, noise_sd: f64, seed: u64) -> FoQDataset {
    let mut rng = rng_from_seed(seed);
    let points = (0..n)
        .map(|_| {
            let t: f64 = rng.random_range(0.0..60.0);
            let z: f64 = StandardNormal.sample(&mut rng);
            BOUNDS.clamp(FoQPoint::new(t, psi * t + noise_sd * z))
        })
        .collect();
    FoQDataset::new(0, 0, points)
}

fn c1_counterexample() -> Verdict {
    let t = upper_stage_value_table(&followers()).unwrap();
    let mut worst: f64 = 0.0;
    for (a, row) in t.profiles_lexicographic().iter().zip(EXPECTED_TABLE) {
        for (v, p) in t.value(a).iter().zip(row) {
            worst = worst.max((v - p).abs());
        }
    }
    let pure = pure_ne(&t);
    let dd = decreasing_differences_check(&t).holds;
    let regret = mixed_ne(&t).unwrap().regret;
    verdict(
        worst <= 0.005 && pure.is_empty() && dd && regret < 1e-6,
        format!(
            "max table gap {worst:.4} (tol 0.005), pure NE {}, DD {dd}, mixed regret {regret:.1e} (tol 1e-6)",
            pure.len()
        ),
    )
}

fn c2_count_budget() -> Verdict {
    let cases = [(0.5, 0.01), (0.1, 0.05), (0.9, 1e-5)];
    let identity = cases.iter().all(|&(e, d)| traj_to_count_budget(e, d, 1) == (e, d));
    let mut worst: f64 = 0.0;
    for &(eps, delta) in &cases {
        for b in [2u32, 3, 5] {
            let (mut e, mut d) = (eps, delta);
            for _ in 1..b {
                d = eps.exp() * d + delta;
                e += eps;
            }
            let (ce, cd) = traj_to_count_budget(eps, delta, b);
            worst = worst.max((ce - e).abs()).max((cd - d).abs());
        }
    }
    verdict(identity && worst <= 1e-12, format!("b = 1 identity {identity}, chain gap {worst:.1e} (tol 1e-12)"))
}

fn c3_moments() -> Verdict {
    let w = SensitivityWeights::new([1.0; 4], BOUNDS).unwrap();
    let pb = PrivacyBudget::new(0.5, 0.05).unwrap();
    let sc = noise_scales(&w, &pb).unwrap();
    // σ_f·ρ_l/‖ρ‖ from scratch: Δ_f over (t_max², t_max·h_max, h_max², 1)
    let df = (3600f64.powi(2) + 9000f64.powi(2) + 22500f64.powi(2) + 1.0).sqrt();
    let sd = df * (2.0 * (1.25f64 / 0.05).ln()).sqrt() / 0.5 / 2.0;
    let stats = query_stats(&foq_line(50, -1.5, 4.0, 1), &BOUNDS).unwrap();
    let reps = 100_000;
    let mut rng = rng_from_seed(3);
    let mut cols: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(reps)).collect();
    for _ in 0..reps {
        let p = perturb_with(&stats, &sc, &mut rng);
        for (c, v) in cols.iter_mut().zip([p.lam_t, p.lam_th, p.lam_h, p.n]) {
            c.push(v);
        }
    }
    let truth = [stats.lam_t, stats.lam_th, stats.lam_h, stats.n];
    let mut worst_z: f64 = 0.0;
    let mut worst_v: f64 = 0.0;
    for (c, t) in cols.iter().zip(truth) {
        let (m, v) = mean_var(c);
        worst_z = worst_z.max((m - t).abs() / (sd / (reps as f64).sqrt()));
        worst_v = worst_v.max((v / (sd * sd) - 1.0).abs());
    }
    verdict(
        worst_z <= 3.0 && worst_v <= 0.05,
        format!("worst mean offset {worst_z:.2} SE (tol 3), worst variance error {:.2}% (tol 5%)", 100.0 * worst_v),
    )
}

fn c4_slope_variance() -> Verdict {
    let ds = foq_line(500, -1.5, 4.0, 2);
    let stats = query_stats(&ds, &BOUNDS).unwrap();
    let w = SensitivityWeights::new([1.0; 4], BOUNDS).unwrap();
    let pb = PrivacyBudget::new(0.9, 0.05).unwrap();
    let sc = noise_scales(&w, &pb).unwrap();
    let analytic = slope_distribution(&stats, stats.lam_t, &sc).unwrap().variance;
    let mut rng = rng_from_seed(2024);
    let slopes: Vec<f64> = (0..2000)
        .map(|_| {
            let released = perturb_with(&stats, &sc, &mut rng);
            released.lam_th / released.lam_t
        })
        .collect();
    let (_, v) = mean_var(&slopes);
    let rel = v / analytic - 1.0;
    verdict(rel.abs() <= 0.05, format!("MC/analytic variance {:.4} (tol ±5%)", 1.0 + rel))
}

fn c5_regression() -> Verdict {
    let ts: Vec<f64> = (0..40).map(|i| 1.5 * i as f64 + 0.3).collect();
    let make =
        |psi: f64, gamma: f64| FoQDataset::new(0, 0, ts.iter().map(|&t| FoQPoint::new(t, psi * t + gamma)).collect());
    let fd = FundamentalDiagram::default();
    let e1 = (fit_case1(&make(-1.3, 0.0)).unwrap().slope + 1.3).abs();
    let a = fit_case2a(&make(-fd.w, -17.0), -fd.w).unwrap();
    let e2a = (a.intercept.unwrap() + 17.0).abs();
    let b = fit_case2b(&make(-0.8, -9.5)).unwrap();
    let e2b = (b.slope + 0.8).abs().max((b.intercept.unwrap() + 9.5).abs());
    let mut rng = rng_from_seed(55);
    let mut worst_oracle: f64 = 0.0;
    for _ in 0..100 {
        let pts: Vec<(f64, f64)> =
            (0..50).map(|_| (rng.random_range(0.0..60.0), rng.random_range(-150.0..0.0))).collect();
        let n = pts.len() as f64;
        let st: f64 = pts.iter().map(|p| p.0).sum();
        let stt: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sh: f64 = pts.iter().map(|p| p.1).sum();
        let sth: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let det = n * stt - st * st;
        let psi = (n * sth - st * sh) / det;
        let gamma = (sh * stt - st * sth) / det;
        let fit = fit_case2b(&FoQDataset::new(0, 0, pts.iter().map(|&(t, h)| FoQPoint::new(t, h)).collect())).unwrap();
        worst_oracle = worst_oracle.max((fit.slope - psi).abs()).max((fit.intercept.unwrap() - gamma).abs());
    }
    let worst = e1.max(e2a).max(e2b);
    verdict(
        worst <= 1e-9 && worst_oracle <= 1e-9,
        format!("noiseless recovery error {worst:.1e}, normal-equation gap {worst_oracle:.1e} over 100 instances (tol 1e-9)"),
    )
}

fn c6_demand_recovery() -> Verdict {
    let fd = FundamentalDiagram::default();
    let mut worst_exact: f64 = 0.0;
    for q in [0.05, 0.1, 0.2, 0.35, 0.5] {
        let cfg = MovementConfig { jitter: 0.0, ..MovementConfig::case1(q, 40.0, 3) };
        let ds = simulate_foq(&fd, &cfg, 1).unwrap();
        let q_hat = slope_to_flow_clamped(fit_case1(&ds).unwrap().slope, &fd);
        worst_exact = worst_exact.max((q_hat - q).abs() / q);
    }
    let q = 0.25;
    let cfg = MovementConfig { penetration: 0.2, ..MovementConfig::case1(q, 40.0, 20) };
    let mean_err = (0..50u64)
        .map(|seed| {
            let ds = simulate_foq(&fd, &cfg, seed).unwrap();
            (slope_to_flow_clamped(fit_case1(&ds).unwrap().slope, &fd) - q).abs() / q
        })
        .sum::<f64>()
        / 50.0;
    verdict(
        worst_exact <= 0.02 && mean_err <= 0.10,
        format!(
            "noiseless full penetration {:.2e}% (tol 2%), 20% penetration mean error {:.2}% over 50 seeds (tol 10%)",
            100.0 * worst_exact,
            100.0 * mean_err
        ),
    )
}

fn c7_maxband() -> Verdict {
    let mut worst = f64::INFINITY;
    let mut all_feasible = true;
    for seed in 0..25u64 {
        let p = common::random_band(seed, 2 + (seed % 2) as usize);
        let s = maxband_solve(&p);
        all_feasible &= s.feasible;
        worst = worst.min(s.objective - common::maxband_grid_oracle(&p, 2e-3));
    }
    verdict(
        all_feasible && worst >= -5e-3,
        format!("min(solver − grid oracle) {worst:.2e} over 25 instances (tol −5e-3)"),
    )
}

fn c8_webster() -> Verdict {
    let geom = ArterialGeometry {
        intersections: vec![IntersectionGeom { lost_time: 12.0, phases: 2, e_out: 0.0, e_in: 0.0 }],
        segment_lengths: vec![],
        cruise_speed: 12.0,
        movements: vec![
            MovementGeom { intersection: 0, phase: 0, capacity: 1.0, direction: Direction::OutboundThrough },
            MovementGeom { intersection: 0, phase: 0, capacity: 1.0, direction: Direction::InboundThrough },
            MovementGeom { intersection: 0, phase: 1, capacity: 1.0, direction: Direction::Side },
        ],
    };
    let o = TimingOptions::default();
    let c = webster_cycle(&[0.5, 0.3, 0.1], &geom, &o).unwrap();
    let over = matches!(webster_cycle(&[0.6, 0.3, 0.4], &geom, &o), Err(SignalError::Oversaturated { .. }))
        && matches!(webster_cycle(&[0.9, 0.3, 0.4], &geom, &o), Err(SignalError::Oversaturated { .. }));
    verdict(c == 57.5 && over, format!("L = 12, Y = 0.6 gives C = {c} (want 57.5 exactly), Y ≥ 1 oversaturated {over}"))
}

fn log_follower(id: usize, cost: f64, beta: f64) -> FollowerSpec {
    FollowerSpec::new(id, move |z: &[f64]| (z.iter().sum::<f64>() + 1.0).ln() - cost * z[id]).with_beta(beta)
}

fn c9_theory() -> Verdict {
    let mut phi_ok = true;
    let mut beta_ok = true;
    for cost in [0.0, 0.2, 0.5] {
        for z_other in [0.0, 0.5, 1.0] {
            let f = log_follower(0, cost, 0.1);
            let gains: Vec<f64> =
                (0..20).map(|i| collaboration_gain(&f, 0, i as f64 / 19.0, &[0.0, z_other])).collect();
            phi_ok &= gains.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            let gains: Vec<f64> = (0..20)
                .map(|i| collaboration_gain(&log_follower(0, cost, 0.02 * i as f64), 0, 0.3, &[0.0, z_other]))
                .collect();
            beta_ok &= gains.windows(2).all(|w| w[1] < w[0]);
        }
    }
    let fs: Vec<FollowerSpec> = (0..3)
        .map(|k| {
            let c = [0.6, 0.75, 0.9][k];
            FollowerSpec::new(k, move |z: &[f64]| (z.iter().sum::<f64>() + 1.0).ln() - c * z[k] - 0.1 * z[k] * z[k])
                .with_floor(0.1)
        })
        .collect();
    let active = [true; 3];
    let reference = lower_stage_equilibrium(&fs, &active).unwrap();
    let mut rng = rng_from_seed(9);
    let mut spread: f64 = 0.0;
    for _ in 0..10 {
        let start: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..1.0)).collect();
        let opts = LowerStageOptions { start: Some(start), ..Default::default() };
        let z = lower_stage_equilibrium_with(&fs, &active, &opts).unwrap();
        spread = spread.max(z.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    verdict(
        phi_ok && beta_ok && spread < 1e-6,
        format!(
            "gain non-increasing in φ {phi_ok}, decreasing in β {beta_ok}, 10-start spread {spread:.1e} (tol 1e-6)"
        ),
    )
}

fn c10_qualitative(root: &Path) -> Verdict {
    let text = std::fs::read_to_string(root.join("scenarios/arterial.toml")).unwrap();
    let scn = Scenario::from_toml_str(&text).unwrap();
    scn.validate().unwrap();
    let s = utility_surface(&scn).unwrap();
    let g = run_game_on(&scn, &s).unwrap();
    let n = s.axes[0].len();
    let pooled = |a: f64, b: f64| (a * a + b * b).sqrt();

    // (a) on the 8×8 block of positive budgets
    let mut mono_viol = 0;
    for i in 1..n {
        for j in 1..n {
            let c = s.cell(&[i, j]);
            for next in [[i + 1, j], [i, j + 1]] {
                if next[0] < n && next[1] < n {
                    let d = s.cell(&next);
                    if d.u_ma < c.u_ma - 2.0 * pooled(c.se_ma, d.se_ma) {
                        mono_viol += 1;
                    }
                }
            }
        }
    }

    // (b)
    let strict =
        g.regions.iter().any(|r| r.region == Region::NoShare && r.d.iter().all(|&d| d == scn.game.d_values[0]));
    let lenient_full =
        g.regions.iter().any(|r| r.region == Region::FullShare && r.d.iter().all(|&d| d > scn.game.d_values[0]));

    // (c) U_k along the other provider's budget
    let mut conc_viol = 0;
    for k in 0..2 {
        for own in 1..n {
            for j in 2..n - 1 {
                let at = |x: usize| if k == 0 { s.cell(&[own, x]) } else { s.cell(&[x, own]) };
                let (a, b, c) = (at(j - 1), at(j), at(j + 1));
                let second = a.u_mp[k] - 2.0 * b.u_mp[k] + c.u_mp[k];
                let se = scn.mps[k].kappa * (a.se_ma.powi(2) + 4.0 * b.se_ma.powi(2) + c.se_ma.powi(2)).sqrt();
                if second > 2.0 * se {
                    conc_viol += 1;
                }
            }
        }
    }
    verdict(
        mono_viol == 0 && strict && lenient_full && conc_viol == 0,
        format!(
            "S = {}, {}×{} grid: monotonicity violations {mono_viol}, strict-d no-share {strict}, lenient-d full-share {lenient_full}, second-difference violations {conc_viol}; SNE d = {:?} ({})",
            s.samples,
            n - 1,
            n - 1,
            g.leader_choice,
            g.region.name()
        ),
    )
}

fn c11_determinism(root: &Path) -> Verdict {
    let bin = env!("CARGO_BIN_EXE_datacollab");
    let scn = root.join("crates/cli/tests/fixtures/small.toml");
    let scn = scn.to_str().unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let runs: [(&str, &[&str], &[&str]); 6] = [
        ("surface", &["--scenario", scn], &["surface.csv", "surface.json"]),
        ("equilibrium", &["--scenario", scn], &["equilibrium.json", "regions.csv"]),
        ("datamap", &["--scenario", scn], &["datamap.csv", "datamap.json"]),
        ("maxband", &["--scenario", scn], &[]),
        ("counterexample", &[], &[]),
        ("dp", &["--eps", "0.5", "--delta", "0.01", "--b", "3"], &[]),
    ];
    let mut differing = Vec::new();
    for (cmd, args, files) in runs {
        let mut stdout = Vec::new();
        for d in &dirs {
            let mut c = Command::new(bin);
            c.args(["--seed", "7", cmd]).args(args);
            if !files.is_empty() {
                c.args(["--out", d.path().to_str().unwrap()]);
            }
            let o = c.output().unwrap();
            if !o.status.success() {
                return verdict(false, format!("{cmd} exited with {:?}", o.status.code()));
            }
            stdout.push(o.stdout);
        }
        if stdout[0] != stdout[1] {
            differing.push(format!("{cmd}:stdout"));
        }
        for f in files {
            if std::fs::read(dirs[0].path().join(f)).unwrap() != std::fs::read(dirs[1].path().join(f)).unwrap() {
                differing.push(format!("{cmd}:{f}"));
            }
        }
    }
    verdict(differing.is_empty(), format!("6 commands run twice with --seed 7, differing outputs: {differing:?}"))
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let criteria: Vec<Criterion> = vec![
        ("three-provider payoff table and equilibria", Duration::from_secs(1), Box::new(c1_counterexample)),
        ("trajectory to count-level budget", Duration::from_secs(1), Box::new(c2_count_budget)),
        ("Gaussian mechanism moments", Duration::from_secs(10), Box::new(c3_moments)),
        ("released slope variance", Duration::from_secs(30), Box::new(c4_slope_variance)),
        ("regression oracles", Duration::from_secs(5), Box::new(c5_regression)),
        ("end-to-end demand recovery", Duration::from_secs(30), Box::new(c6_demand_recovery)),
        ("MAXBAND against grid oracle", Duration::from_secs(120), Box::new(c7_maxband)),
        ("Webster cycle", Duration::from_secs(1), Box::new(c8_webster)),
        ("equilibrium theory properties", Duration::from_secs(30), Box::new(c9_theory)),
        (
            "qualitative collaboration regions",
            Duration::from_secs(600),
            Box::new({
                let root = root.clone();
                move || c10_qualitative(&root)
            }),
        ),
        (
            "CLI determinism",
            Duration::from_secs(120),
            Box::new({
                let root = root.clone();
                move || c11_determinism(&root)
            }),
        ),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let ok = v.ok && took <= *limit;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {} [{:.2}s, limit {}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
