use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use datacollab::game::counterexample::{followers, EXPECTED_TABLE};
use datacollab::game::{decreasing_differences_check, mixed_ne, pure_ne, upper_stage_value_table};
use datacollab::privacy::{
    gaussian_sigma, l2_sensitivity, noise_scales, traj_to_count_budget, FoQBounds, PrivacyBudget, SensitivityWeights,
};
use datacollab::signal::{build_plan, evaluate_delay};
use datacollab::sim::{
    data_utility_map, export_results, run_game_on, utility_surface, Artifact, ExportFormat, Scenario, SimError,
};

#[derive(Parser)]
#[command(name = "datacollab", version, about = "Data collaboration experiments for arterial signal timing")]
struct Cli {
    /// Overrides the scenario's base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all available cores by default.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo utility surface over the budget grid.
    Surface {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        /// Comma-separated budgets replacing `game.eps_grid`.
        #[arg(long, value_delimiter = ',')]
        eps_grid: Option<Vec<f64>>,
    },
    /// Leader-optimal thresholds and the sharing region of every grid point.
    Equilibrium {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        /// Comma-separated thresholds replacing `game.d_values`.
        #[arg(long, value_delimiter = ',')]
        d_values: Option<Vec<f64>>,
    },
    /// Three-provider game without a pure follower equilibrium.
    Counterexample,
    /// Noise scale and count-level budget of the Gaussian mechanism.
    Dp {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        /// Number of points by which count-adjacent datasets differ.
        #[arg(long, default_value_t = 1)]
        b: u32,
        #[arg(long, default_value_t = 60.0)]
        t_max: f64,
        #[arg(long, default_value_t = 150.0)]
        h_max: f64,
        /// `ρ_T,ρ_TH,ρ_H,ρ_N`.
        #[arg(long, value_delimiter = ',', default_value = "1,1,1,1")]
        rho: Vec<f64>,
    },
    /// Band, loop integers and offsets of the plan for a scenario's demand.
    Maxband {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = DemandKind::True)]
        demand: DemandKind,
    },
    /// Delay of plans built for estimated demand under true demand.
    Datamap {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Multipliers of true demand for the estimate axis.
        #[arg(long, value_delimiter = ',', default_value = "0.6,0.8,1,1.2,1.4")]
        q_hat_scales: Vec<f64>,
        /// Multipliers of true demand for the truth axis.
        #[arg(long, value_delimiter = ',', default_value = "0.6,0.8,1,1.2,1.4")]
        q_scales: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DemandKind {
    True,
    Prior,
}

enum Failure {
    Config(String),
    Compute(String),
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Compute(e.to_string())
        }
    }
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    version: String,
    scenario_path: String,
    scenario_sha256: String,
    seed: u64,
    outputs: Vec<String>,
    wall_clock_s: f64,
}

struct Loaded {
    scenario: Scenario,
    path: PathBuf,
    sha256: String,
}

fn load(path: &Path, seed: Option<u64>, samples: Option<usize>) -> Result<Loaded, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let text =
        String::from_utf8(bytes.clone()).map_err(|_| Failure::Config(format!("{} is not UTF-8", path.display())))?;
    let mut scenario = Scenario::from_toml_str(&text)?;
    if let Some(s) = seed {
        scenario.mc.seed = s;
    }
    if let Some(n) = samples {
        scenario.mc.samples = n;
    }
    scenario.validate()?;
    Ok(Loaded { scenario, path: path.to_path_buf(), sha256: hex::encode(Sha256::digest(&bytes)) })
}

fn write_manifest(out: &Path, command: &str, l: &Loaded, outputs: &[&str], started: Instant) -> Result<(), Failure> {
    let m = RunManifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_path: l.path.display().to_string(),
        scenario_sha256: l.sha256.clone(),
        seed: l.scenario.mc.seed,
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    let mut text = serde_json::to_string_pretty(&m).map_err(|e| Failure::Compute(e.to_string()))?;
    text.push('\n');
    fs::write(out.join("manifest.json"), text).map_err(|e| Failure::Compute(e.to_string()))
}

fn out_dir(out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::Config(format!("cannot create {}: {e}", out.display())))
}

fn emit(out: &Path, files: &[(&str, Artifact<'_>, ExportFormat)]) -> Result<(), Failure> {
    for (name, artifact, format) in files {
        export_results(*artifact, *format, &out.join(name))?;
        log::info!("wrote {}", out.join(name).display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let started = Instant::now();
    match cli.command {
        Command::Surface { scenario, out, samples, eps_grid } => {
            let mut l = load(&scenario, cli.seed, samples)?;
            if let Some(g) = eps_grid {
                l.scenario.game.eps_grid = g;
                l.scenario.validate()?;
            }
            out_dir(&out)?;
            let s = utility_surface(&l.scenario)?;
            let files = [
                ("surface.csv", Artifact::Surface(&s), ExportFormat::Csv),
                ("surface.json", Artifact::Surface(&s), ExportFormat::Json),
                ("surface.svg", Artifact::Surface(&s), ExportFormat::Svg),
            ];
            emit(&out, &files)?;
            write_manifest(&out, "surface", &l, &["surface.csv", "surface.json", "surface.svg"], started)?;
        }
        Command::Equilibrium { scenario, out, samples, d_values } => {
            let mut l = load(&scenario, cli.seed, samples)?;
            if let Some(d) = d_values {
                l.scenario.game.d_values = d;
                l.scenario.validate()?;
            }
            out_dir(&out)?;
            let s = utility_surface(&l.scenario)?;
            let g = run_game_on(&l.scenario, &s)?;
            println!(
                "leader choice d = {:?}: {} (share probabilities {:?}, budgets {:?}), leader value {:.4} s/veh",
                g.leader_choice,
                g.region.name(),
                g.share_prob,
                g.eps,
                g.leader_value
            );
            let files = [
                ("equilibrium.json", Artifact::Game(&g), ExportFormat::Json),
                ("regions.csv", Artifact::Game(&g), ExportFormat::Csv),
                ("regions.svg", Artifact::Game(&g), ExportFormat::Svg),
            ];
            emit(&out, &files)?;
            write_manifest(&out, "equilibrium", &l, &["equilibrium.json", "regions.csv", "regions.svg"], started)?;
        }
        Command::Counterexample => counterexample()?,
        Command::Dp { eps, delta, b, t_max, h_max, rho } => dp(eps, delta, b, t_max, h_max, &rho)?,
        Command::Maxband { scenario, demand } => {
            let l = load(&scenario, cli.seed, None)?;
            let scn = &l.scenario;
            let flows = match demand {
                DemandKind::True => scn.true_flows(),
                DemandKind::Prior => scn.prior_flows(),
            };
            let geom = scn.geometry();
            let o =
                build_plan(&flows, &geom, &scn.network.timing, true).map_err(|e| Failure::Compute(e.to_string()))?;
            let p = &o.plan;
            println!("cycle_s {:.4}", p.cycle_s);
            if o.oversaturated {
                println!("oversaturated: maximum cycle used");
            }
            println!("b {:.6}", o.band.b);
            println!("b_bar {:.6}", o.band.b_bar);
            println!("zeta {}", fmt_list(&o.band.zeta));
            println!("zeta_bar {}", fmt_list(&o.band.zeta_bar));
            println!("m {:?}", o.band.m);
            println!("objective {:.6}", o.band.objective);
            if !o.band.feasible {
                println!("zero band: no feasible loop-integer vector");
            }
            println!("offsets_s {}", fmt_list(&p.offsets_s));
            for (i, g) in p.greens.iter().enumerate() {
                println!("greens_s[{i}] {}", fmt_list(g));
            }
            println!("delay_s_per_veh {:.4}", evaluate_delay(p, &scn.true_flows(), &geom, &o.band));
        }
        Command::Datamap { scenario, out, q_hat_scales, q_scales } => {
            let l = load(&scenario, cli.seed, None)?;
            out_dir(&out)?;
            let m = data_utility_map(&l.scenario, &q_hat_scales, &q_scales)?;
            let files = [
                ("datamap.csv", Artifact::Map(&m), ExportFormat::Csv),
                ("datamap.json", Artifact::Map(&m), ExportFormat::Json),
                ("datamap.svg", Artifact::Map(&m), ExportFormat::Svg),
            ];
            emit(&out, &files)?;
            write_manifest(&out, "datamap", &l, &["datamap.csv", "datamap.json", "datamap.svg"], started)?;
        }
    }
    Ok(())
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ")
}

fn counterexample() -> Result<(), Failure> {
    let fail = |e: datacollab::game::GameError| Failure::Compute(e.to_string());
    let t = upper_stage_value_table(&followers()).map_err(fail)?;
    println!("profile   V_1      V_2      V_3      expected");
    for (a, row) in t.profiles_lexicographic().iter().zip(EXPECTED_TABLE) {
        let bits: String = a.iter().map(|&x| if x { '1' } else { '0' }).collect();
        let v = t.value(a);
        println!(
            "{bits}       {:>7.4}  {:>7.4}  {:>7.4}  ({:.2}, {:.2}, {:.2})",
            v[0], v[1], v[2], row[0], row[1], row[2]
        );
    }
    let pure = pure_ne(&t);
    if pure.is_empty() {
        println!("pure equilibria: none");
    } else {
        println!("pure equilibria: {pure:?}");
    }
    let dd = decreasing_differences_check(&t);
    println!("decreasing differences: {} (largest increment change {:.3e})", dd.holds, dd.worst_violation);
    let m = mixed_ne(&t).map_err(fail)?;
    println!("mixed equilibrium: p = {} regret {:.3e}", fmt_list(&m.probs), m.regret);
    Ok(())
}

fn dp(eps: f64, delta: f64, b: u32, t_max: f64, h_max: f64, rho: &[f64]) -> Result<(), Failure> {
    let cfg = |m: String| Failure::Config(m);
    let pb = PrivacyBudget::new(eps, delta).map_err(|e| cfg(e.to_string()))?;
    if b == 0 {
        return Err(cfg("b must be at least 1".into()));
    }
    let rho: [f64; 4] = rho.try_into().map_err(|_| cfg(format!("rho needs 4 values, got {}", rho.len())))?;
    let w = SensitivityWeights::new(rho, FoQBounds { t_max, h_max }).map_err(|e| cfg(e.to_string()))?;
    let df = l2_sensitivity(&w);
    let sigma = gaussian_sigma(df, &pb).map_err(|e| cfg(e.to_string()))?;
    let sc = noise_scales(&w, &pb).map_err(|e| cfg(e.to_string()))?;
    println!("delta_f {df:.6}");
    println!("sigma_f {sigma:.6}");
    println!("sigma_t {:.6} sigma_th {:.6} sigma_h {:.6} sigma_n {:.6}", sc.t, sc.th, sc.h, sc.n);
    let (ce, cd) = traj_to_count_budget(eps, delta, b);
    println!("count-level budget for b = {b}: eps {ce:.6} delta {cd:.6}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("computation error: {m}");
            ExitCode::from(3)
        }
    }
}
