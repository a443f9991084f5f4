use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sparse_recovery::codes::PVParams;
use sparse_recovery::expanders::CheckMode;
use sparse_recovery::harness::{
    csv_bytes, expansion_check, isolation_check, json_bytes, neighborhood_check, pv_planted, rs_fuzz, run_trials,
    schedule_seed, summarize, workers_from_env, write_file, HarnessConfig,
};
use sparse_recovery::recovery::toplevel_recover;
use sparse_recovery::sketch::{apply_sketch, read_sketch, write_sketch, Schedule, Signal};

#[derive(Parser)]
#[command(name = "sparse-l1", version, about = "For-all l1/l1 sparse recovery sketches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set k=16`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<HarnessConfig> {
        let mut cfg = match &self.config {
            Some(p) => HarnessConfig::from_file(p).with_context(|| format!("reading {}", p.display()))?,
            None => HarnessConfig::default(),
        };
        for o in &self.overrides {
            let (k, v) = o.split_once('=').with_context(|| format!("override {o:?} is not KEY=VALUE"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Auto,
    Exact,
    MonteCarlo,
}

impl Mode {
    fn check_mode(self) -> Option<CheckMode> {
        match self {
            Mode::Auto => None,
            Mode::Exact => Some(CheckMode::Exact),
            Mode::MonteCarlo => Some(CheckMode::MonteCarlo),
        }
    }
}

#[derive(Args)]
struct SeedArgs {
    /// Number of seeds to check.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seeds that must pass (default: all).
    #[arg(long)]
    min_pass: Option<u64>,
}

impl SeedArgs {
    fn seeds(&self) -> impl Iterator<Item = u64> {
        self.seed..self.seed + self.seeds
    }

    fn required(&self) -> u64 {
        self.min_pass.unwrap_or(self.seeds)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the resolved round parameters and measurement count.
    Params {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Sketch a signal given as JSON `{"n": N, "entries": [[i, v], ...]}`.
    Sketch {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover an approximation from a sketch file.
    Recover {
        #[arg(long)]
        sketch: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check (4k, eps) expansion of a two-layer scheme.
    VerifyExpander {
        #[arg(long, default_value_t = 20)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        #[command(flatten)]
        seeds: SeedArgs,
    },
    /// Check the isolation property of a one-layer scheme.
    VerifyIsolation {
        #[arg(long, default_value_t = 1 << 15)]
        n: u64,
        #[arg(long, default_value_t = 16)]
        ell: usize,
        #[arg(long, default_value_t = 0.25)]
        eta: f64,
        #[arg(long, default_value_t = 0.25)]
        zeta: f64,
        #[command(flatten)]
        seeds: SeedArgs,
    },
    /// Count distinct walk endpoints in random out-regular digraphs.
    Neighborhood {
        #[arg(long, default_value_t = 1024)]
        nodes: usize,
        #[arg(long, default_value_t = 8)]
        degree: usize,
        /// Required distinct endpoints as a fraction of the node count.
        #[arg(long, default_value_t = 0.8)]
        fraction: f64,
        /// Fraction of start nodes that must reach `fraction`.
        #[arg(long, default_value_t = 0.99)]
        starts: f64,
        #[command(flatten)]
        seeds: SeedArgs,
    },
    /// Reed-Solomon and Parvaresh-Vardy round-trip fuzzing.
    CodesTest {
        #[arg(long, default_value_t = 1000)]
        rs_trials: usize,
        #[arg(long, default_value_t = 50)]
        pv_trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a batch of trials; worker count comes from SPARSE_L1_WORKERS.
    Bench {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        csv: PathBuf,
        /// Batch summary; defaults to the CSV path with a .json extension.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn schedule_for(cfg: &HarnessConfig) -> Result<Schedule> {
    Ok(Schedule::new(cfg.n, cfg.k as u64, cfg.eps, &cfg.sketch, schedule_seed(cfg.seed))?)
}

#[derive(Serialize)]
struct SeedResult<T: Serialize> {
    seed: u64,
    pass: bool,
    report: T,
}

fn seed_checks<T: Serialize>(
    seeds: &SeedArgs,
    mut run: impl FnMut(u64) -> Result<(bool, T)>,
) -> Result<bool> {
    let mut results = Vec::new();
    for seed in seeds.seeds() {
        let (pass, report) = run(seed)?;
        results.push(SeedResult { seed, pass, report });
    }
    let passed = results.iter().filter(|r| r.pass).count() as u64;
    print_json(&results)?;
    eprintln!("{passed}/{} seeds passed (need {})", seeds.seeds, seeds.required());
    Ok(passed >= seeds.required())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Params { cfg } => {
            let cfg = cfg.load()?;
            let schedule = schedule_for(&cfg)?;
            #[derive(Serialize)]
            struct Out {
                measurement_count: usize,
                config: BTreeMap<String, String>,
                rounds: Vec<sparse_recovery::sketch::RoundSpec>,
            }
            print_json(&Out {
                measurement_count: schedule.measurement_count(),
                config: cfg.pairs().into_iter().collect(),
                rounds: schedule.specs(),
            })?;
            Ok(true)
        }
        Command::Sketch { cfg, signal, out } => {
            let mut cfg = cfg.load()?;
            let text = std::fs::read_to_string(&signal).with_context(|| format!("reading {}", signal.display()))?;
            let raw: Signal = serde_json::from_str(&text).context("parsing signal JSON")?;
            let x = Signal::new(raw.n, raw.entries)?;
            cfg.n = x.n;
            let schedule = schedule_for(&cfg)?;
            let sketch = apply_sketch(&schedule, &x)?;
            write_sketch(&out, &schedule, &sketch)?;
            eprintln!("wrote {} measurements to {}", sketch.values.len(), out.display());
            Ok(true)
        }
        Command::Recover { sketch, out } => {
            let (schedule, sk) = read_sketch(&sketch)?;
            let rec = toplevel_recover(&schedule, &sk)?;
            for r in &rec.rounds {
                eprintln!(
                    "round {}: s={} heavy={} decoded={} candidates={} estimated={}",
                    r.round,
                    r.s,
                    r.identify.heavy_buckets,
                    r.identify.chunks_decoded,
                    r.identify.candidates,
                    r.estimated
                );
            }
            write_file(&out, format!("{}\n", serde_json::to_string(&rec.approx)?).as_bytes())?;
            Ok(true)
        }
        Command::VerifyExpander { n, k, eps, mode, seeds } => seed_checks(&seeds, |seed| {
            let r = expansion_check(n, k, eps, seed, mode.check_mode())?;
            Ok((r.pass, r))
        }),
        Command::VerifyIsolation { n, ell, eta, zeta, seeds } => seed_checks(&seeds, |seed| {
            let r = isolation_check(n, ell, eta, zeta, seed)?;
            Ok((r.pass, r))
        }),
        Command::Neighborhood { nodes, degree, fraction, starts, seeds } => {
            if degree < 2 {
                bail!("degree must be at least 2");
            }
            seed_checks(&seeds, |seed| {
                let r = neighborhood_check(nodes, degree, fraction, seed);
                Ok((r.good_starts as f64 >= starts * nodes as f64, r))
            })
        }
        Command::CodesTest { rs_trials, pv_trials, seed } => {
            let rs = rs_fuzz(8, 16, 4, rs_trials, seed)?;
            let params = PVParams::design(1 << 14, 10, 64, 0.3, 1.5, seed)?;
            let pv = pv_planted(&params, 0.3, 512, pv_trials, seed)?;
            #[derive(Serialize)]
            struct Out<T> {
                reed_solomon: T,
                parvaresh_vardy: T,
            }
            let pass = rs.pass() && pv.pass();
            print_json(&Out { reed_solomon: rs, parvaresh_vardy: pv })?;
            Ok(pass)
        }
        Command::Bench { cfg, csv, json } => {
            let cfg = cfg.load()?;
            let workers = workers_from_env()?;
            let reports = run_trials(&cfg, workers)?;
            let summary = summarize(&cfg, &reports)?;
            write_file(&csv, &csv_bytes(&reports)?)?;
            let json = json.unwrap_or_else(|| csv.with_extension("json"));
            write_file(&json, &json_bytes(&summary)?)?;
            eprintln!(
                "{} trials, {} failed; ratio median {:.4} p90 {:.4} max {:.4}; {} within 1+2eps; {} exact",
                summary.trials,
                summary.failed,
                summary.ratio.median,
                summary.ratio.p90,
                summary.ratio.max,
                summary.within_one_plus_two_eps,
                summary.exact
            );
            Ok(summary.failed == 0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
