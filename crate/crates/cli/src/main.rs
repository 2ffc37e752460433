use amoebot::files::{read_trace, trace_to_string, Configuration, RunMetrics};
use amoebot::generate::{generate, Shape};
use amoebot::geometry::Dim;
use amoebot::oracles::{sample_progress_lemma, verify_small_neighborhoods_hole_free, verify_vertex_angles};
use amoebot::replay::{check_summary, recompute_rounds, replay, ReplayMode};
use amoebot::scheduler::{self, AdversaryPolicy, Limits, Mode, PolicyKind};
use amoebot::topology;
use amoebot::engine::Erosion;
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "amoebot", version, about = "Erosion-based leader election on amoebot lattices")]
struct Cli {
    /// Seed for generators and adversaries.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_parser = parse_dim, default_value = "3d")]
    dim: Dim,
    #[arg(long, global = true, value_parser = parse_policy, default_value = "uniform-random")]
    policy: PolicyKind,
    #[arg(long, global = true, value_parser = parse_mode, default_value = "sequential")]
    mode: Mode,
    /// Comma-separated `key=value` limits: max_steps, lock_budget, safety=on|off.
    #[arg(long, global = true, value_parser = parse_limits, default_value = "")]
    limits: Limits,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a connected, contractible configuration.
    Gen {
        #[arg(long, value_parser = parse_shape, default_value = "blob")]
        shape: Shape,
        #[arg(long)]
        size: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run leader election on a configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Activation order for the scripted policy, as amoebot ids.
        #[arg(long, value_delimiter = ',')]
        script: Vec<u32>,
    },
    /// Re-execute a trace and check it.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "check-guards")]
        check: CheckMode,
    },
    /// Report connectivity, Betti numbers and boundary genus.
    CheckTopology {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the neighbourhood oracles and the progress sampler.
    VerifyOracles {
        #[arg(long, value_enum, default_value = "all")]
        oracle: OracleChoice,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        min_size: usize,
        #[arg(long, default_value_t = 200)]
        max_size: usize,
        /// Machine-readable report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Summarize metrics files as CSV.
    Stats {
        #[arg(required = true)]
        metrics: Vec<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckMode {
    CheckGuards,
    CheckTopologyEachErode,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleChoice {
    Holes,
    Angles,
    Progress,
    All,
}

fn parse_dim(s: &str) -> Result<Dim, String> {
    match s {
        "2d" | "2D" | "2" => Ok(Dim::Two),
        "3d" | "3D" | "3" => Ok(Dim::Three),
        _ => Err(format!("unknown dimension '{s}' (use 2d or 3d)")),
    }
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse().map_err(|e: scheduler::SchedulerError| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: scheduler::SchedulerError| e.to_string())
}

fn parse_limits(s: &str) -> Result<Limits, String> {
    s.parse().map_err(|e: scheduler::SchedulerError| e.to_string())
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    s.parse().map_err(|e: amoebot::generate::GenerateError| e.to_string())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> Result<Configuration> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Configuration::from_json(&text, false).with_context(|| format!("loading {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every check passed.
fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Gen { shape, size, out } => {
            let c = generate(*shape, *size, cli.seed, cli.dim)?;
            write_out(out.as_deref(), &c.to_json())?;
            Ok(true)
        }
        Command::Run { config, trace, metrics, script } => {
            let c = load_config(config)?;
            let sys = c.to_system()?;
            let policy = if cli.policy == PolicyKind::Scripted {
                AdversaryPolicy::scripted(script.iter().map(|&i| amoebot::engine::AmoebotId(i)).collect())
            } else {
                AdversaryPolicy::new(cli.policy, cli.seed)
            };
            let start = Instant::now();
            let t = scheduler::run(sys, cli.mode, &policy, cli.limits)?;
            let wall = start.elapsed().as_secs_f64() * 1e3;
            let m = RunMetrics::from_trace(&t, wall);
            if let Some(p) = trace {
                std::fs::write(p, trace_to_string(&t)).with_context(|| format!("writing {}", p.display()))?;
            }
            write_out(metrics.as_deref(), &m.to_json())?;
            for v in &t.summary.violations {
                eprintln!("violation: {v}");
            }
            Ok(t.succeeded())
        }
        Command::Replay { trace, config, check } => {
            let c = load_config(config)?;
            let file = std::fs::File::open(trace).with_context(|| format!("opening {}", trace.display()))?;
            let t = read_trace(BufReader::new(file))?;
            if t.header.n != c.nodes.len() || t.header.dim != c.dim {
                bail!("trace header does not match the configuration");
            }
            let mode = match check {
                CheckMode::CheckGuards => ReplayMode::CheckGuards,
                CheckMode::CheckTopologyEachErode => ReplayMode::CheckTopology,
            };
            let sequential = t.header.mode == Mode::Sequential;
            let (mut report, _) = replay(&Erosion, c.to_system()?, &t.events, mode, sequential);
            if report.divergence.is_none() {
                let rounds = sequential.then(|| recompute_rounds(&Erosion, c.to_system().expect("loaded"), &t.events));
                report.divergence = check_summary(&report, &t.events, &t.summary, rounds);
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.passed())
        }
        Command::CheckTopology { config } => {
            let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
            let c = Configuration::from_json(&text, true)?;
            let connected = topology::is_connected(c.dim, &c.nodes);
            let complex = topology::build_dual_complex(c.dim, &c.nodes)?;
            let b = topology::betti(&complex);
            let e = topology::euler_betti(c.dim, &c.nodes)?;
            let genus = match topology::boundary_genus(&complex) {
                Ok(g) => format!("{g:?}"),
                Err(_) => "n/a".into(),
            };
            println!("nodes: {}", c.nodes.len());
            println!("connected: {connected}");
            println!("betti (rank): {} {} {}", b.b0, b.b1, b.b2);
            println!("betti (euler): {} {} {}", e.b0, e.b1, e.b2);
            println!("euler characteristic: {}", complex.euler_characteristic());
            println!("boundary genus: {genus}");
            let ok = connected && b.is_contractible();
            println!("contractible: {}", b.is_contractible());
            Ok(ok)
        }
        Command::VerifyOracles { oracle, count, min_size, max_size, report } => {
            let mut doc = serde_json::Map::new();
            let mut ok = true;
            let want = |o: OracleChoice| *oracle == o || *oracle == OracleChoice::All;
            if want(OracleChoice::Holes) {
                let r = verify_small_neighborhoods_hole_free();
                println!(
                    "holes: {} subsets, {} violators, {} inconsistent, control b1={} -> {}",
                    r.enumeration.total(),
                    r.violators.len(),
                    r.inconsistent.len(),
                    r.negative_control.betti.b1,
                    if r.passed() { "PASS" } else { "FAIL" }
                );
                ok &= r.passed();
                doc.insert("holes".into(), serde_json::to_value(&r)?);
            }
            if want(OracleChoice::Angles) {
                let r = verify_vertex_angles();
                println!(
                    "angles: {} subsets, {} classified, {} excluded, {} violators -> {}",
                    r.enumeration.total(),
                    r.classified,
                    r.excluded.len(),
                    r.violators.len(),
                    if r.passed() { "PASS" } else { "FAIL" }
                );
                ok &= r.passed();
                doc.insert("angles".into(), serde_json::to_value(&r)?);
            }
            if want(OracleChoice::Progress) {
                if min_size > max_size || *min_size < 2 {
                    bail!("size range must satisfy 2 <= min-size <= max-size");
                }
                let r = sample_progress_lemma(*count, *min_size..=*max_size, cli.seed, &[Dim::Two, Dim::Three]);
                println!(
                    "progress: {} sampled, {} skipped, {} counterexamples, rule hits {:?} -> {}",
                    r.sampled,
                    r.skipped.len(),
                    r.counterexamples.len(),
                    r.rule_hits,
                    if r.passed() { "PASS" } else { "FAIL" }
                );
                ok &= r.passed();
                doc.insert("progress".into(), serde_json::to_value(&r)?);
            }
            if let Some(p) = report {
                let text = serde_json::to_string_pretty(&serde_json::Value::Object(doc))?;
                std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(ok)
        }
        Command::Stats { metrics, out } => {
            let mut all = Vec::new();
            for p in metrics {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                for line in text.lines().filter(|l| !l.trim().is_empty()) {
                    all.push(RunMetrics::from_json(line).with_context(|| format!("parsing {}", p.display()))?);
                }
            }
            write_out(out.as_deref(), &amoebot::stats::summarize(&all))?;
            Ok(true)
        }
    }
}
