//! `poolsim`: run spectrum pooling campaigns from the command line.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use poolsim::deployment::drop_network;
use poolsim::harness::{sweep_groups, CampaignResult};
use poolsim::presets::{desk_scale, expand, Preset};
use poolsim::report::{write_raw_jsonl, write_summary_csv};
use poolsim::{run_campaign, CampaignOptions, Scenario, ScenarioConfig, SimError};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) | SimError::BandPlan(_) | SimError::MissingBaseline(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "poolsim", version, about = "Monte Carlo simulator for mmWave inter-operator spectrum pooling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a preset or custom sweep and write result files.
    Run(RunArgs),
    /// Check a config and its expanded scenarios without running.
    Validate(ConfigArgs),
    /// List the figure presets and the scenarios they expand to.
    Presets(ConfigArgs),
    /// Write one drop's node positions as CSV.
    Topology(TopologyArgs),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Config file of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// fig1a, fig1b, fig2a, fig2b or custom.
    #[arg(long, value_name = "NAME", default_value = "custom", value_parser = parse_preset)]
    preset: Preset,
    /// Override one config key; repeatable. Applied after preset values.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Master seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Shrink the region to 500 m for quick runs.
    #[arg(long)]
    desk: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "results")]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    /// Write per-UE rates to raw/<scenario>.jsonl.
    #[arg(long)]
    dump_raw: bool,
    /// Write every drop's topology to topology/<group>-drop<k>.csv.
    #[arg(long)]
    dump_topology: bool,
    /// No progress lines on stderr.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct TopologyArgs {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long)]
    desk: bool,
    /// Drop index.
    #[arg(long, default_value_t = 0)]
    drop: u64,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// A closed stdout (e.g. piped into `head`) ends output quietly.
fn stdout_result(r: io::Result<()>) -> Result<(), CliError> {
    match r {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Runtime(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
}

fn load_base(path: Option<&Path>, seed: Option<u64>, desk: bool) -> Result<ScenarioConfig, CliError> {
    let mut base = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            ScenarioConfig::from_kv_text(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => ScenarioConfig::default(),
    };
    if desk {
        desk_scale(&mut base);
    }
    if let Some(s) = seed {
        base.master_seed = s;
    }
    Ok(base)
}

fn scenarios(args: &ConfigArgs) -> Result<Vec<Scenario>, CliError> {
    let base = load_base(args.config.as_deref(), args.seed, args.desk)?;
    let scenarios = expand(args.preset, &base, &args.sets).map_err(|e| CliError::Config(e.to_string()))?;
    for s in &scenarios {
        s.cfg.band_plan().map_err(|e| CliError::Config(format!("{}: {e}", s.id)))?;
    }
    Ok(scenarios)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    Ok(BufWriter::new(fs::File::create(path).map_err(io_err(path))?))
}

fn write_results(args: &RunArgs, scenarios: &[Scenario], result: &CampaignResult, wall: f64, started: u64) -> Result<(), CliError> {
    let out = &args.out;
    fs::create_dir_all(out).map_err(io_err(out))?;

    let path = out.join("summary.csv");
    let mut w = create(&path)?;
    write_summary_csv(&result.reports, &mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;

    let meta = json!({
        "tool": "poolsim",
        "version": env!("CARGO_PKG_VERSION"),
        "preset": args.cfg.preset.name(),
        "config_file": args.cfg.config.as_ref().map(|p| p.display().to_string()),
        "overrides": args.cfg.sets,
        "desk": args.cfg.desk,
        "jobs": args.jobs,
        "started_unix_s": started,
        "wall_time_s": wall,
        "scenarios": scenarios.iter().map(|s| json!({
            "id": s.id,
            "config": s.cfg.entries().into_iter().map(|(k, v)| (k, v.into())).collect::<serde_json::Map<_, _>>(),
        })).collect::<Vec<_>>(),
    });
    let path = out.join("meta.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &meta)
        .map_err(io::Error::from)
        .and_then(|_| writeln!(w))
        .and_then(|_| w.flush())
        .map_err(io_err(&path))?;

    if args.dump_raw {
        let dir = out.join("raw");
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for dist in &result.distributions {
            let path = dir.join(format!("{}.jsonl", dist.scenario.id));
            let mut w = create(&path)?;
            write_raw_jsonl(dist, &mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;
        }
    }

    if args.dump_topology {
        let dir = out.join("topology");
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for group in sweep_groups(scenarios) {
            let first = &scenarios[group[0]];
            for d in 0..first.cfg.n_drops as u64 {
                let topo = drop_network(&first.cfg, d).map_err(|e| CliError::Runtime(e.to_string()))?;
                let path = dir.join(format!("{}-drop{d}.csv", first.id));
                let mut w = create(&path)?;
                topo.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;
            }
        }
    }
    Ok(())
}

fn run(args: &RunArgs) -> Result<(), CliError> {
    let scenarios = scenarios(&args.cfg)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let t = Instant::now();
    if !args.quiet {
        eprintln!("running {} scenarios", scenarios.len());
    }
    let opts = CampaignOptions { jobs: args.jobs.map(|j| j as usize), progress: !args.quiet };
    let result = run_campaign(&scenarios, &opts)?;
    write_results(args, &scenarios, &result, t.elapsed().as_secs_f64(), started)?;
    if !args.quiet {
        eprintln!("wrote {}", args.out.join("summary.csv").display());
    }
    Ok(())
}

fn validate(args: &ConfigArgs) -> Result<(), CliError> {
    let scenarios = scenarios(args)?;
    println!("ok: {} scenarios", scenarios.len());
    Ok(())
}

fn presets(args: &ConfigArgs) -> Result<(), CliError> {
    let base = load_base(args.config.as_deref(), args.seed, args.desk)?;
    let mut out = io::stdout().lock();
    let write = |out: &mut io::StdoutLock, preset: Preset| -> Result<(), CliError> {
        let list = expand(preset, &base, &args.sets).map_err(|e| CliError::Config(e.to_string()))?;
        let mut text = format!("{}: {}\n", preset.name(), preset.description());
        for s in &list {
            text += &format!(
                "  {:28} pooling={:9} coordination={:5} carrier={}GHz bs_density={} bs_array={} ue_array={} n_drops={}\n",
                s.id, s.cfg.pooling, s.cfg.coordination, s.cfg.carrier_ghz, s.cfg.bs_density_per_op, s.cfg.bs_array,
                s.cfg.ue_array, s.cfg.n_drops
            );
        }
        stdout_result(out.write_all(text.as_bytes()))
    };
    // a preset given explicitly lists only that one
    if args.preset != Preset::Custom {
        return write(&mut out, args.preset);
    }
    Preset::ALL.into_iter().try_for_each(|p| write(&mut out, p))
}

fn topology(args: &TopologyArgs) -> Result<(), CliError> {
    let mut cfg = load_base(args.config.as_deref(), args.seed, args.desk)?;
    for s in &args.sets {
        cfg.apply_override(s).map_err(|e| CliError::Config(e.to_string()))?;
    }
    let cfg = cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let topo = drop_network(&cfg, args.drop).map_err(|e| CliError::Runtime(e.to_string()))?;
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            topo.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
        }
        None => stdout_result(topo.write_csv(io::stdout().lock())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CliError::Usage(String::new()).exit_code() } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Validate(a) => validate(a),
        Command::Presets(a) => presets(a),
        Command::Topology(a) => topology(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("poolsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
