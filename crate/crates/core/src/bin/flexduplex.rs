use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use flexduplex::channel::{build_channel, build_coupling, ChannelParams, InterferenceFlags};
use flexduplex::harness::{aggregate, generate_scenario, read_records, run_sweep, write_records, Aggregates, Ratio, SweepConfig};
use flexduplex::model::Scenario;
use flexduplex::rng::derive_seed;
use flexduplex::solvers::{solve, Protocol};
use flexduplex::{Error, Execution, Result};

#[derive(Parser)]
#[command(name = "flexduplex", version, about = "Flexible-duplex UL/DL resource partitioning")]
struct Cli {
    /// JSON sweep configuration; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one two-cell instance (scenario plus channel parameters).
    Gen(GenArgs),
    /// Solve one instance with one protocol and print the outcome as JSON.
    Solve(SolveArgs),
    /// Run the Monte-Carlo sweep and write records.csv and aggregates.json.
    Sweep(SweepArgs),
    /// Recompute aggregates from a records CSV.
    Aggregate(AggregateArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Demand split between the cells, e.g. 3/7.
    #[arg(long, default_value = "5/5")]
    inter: Ratio,
    /// UL/DL split in cell 1.
    #[arg(long, default_value = "5/5")]
    intra1: Ratio,
    /// UL/DL split in cell 2.
    #[arg(long, default_value = "5/5")]
    intra2: Ratio,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance written by `gen`, or a bare scenario JSON.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "safp")]
    protocol: Protocol,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    niter: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Keep the iteration trace in the output.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated protocol list.
    #[arg(long, value_delimiter = ',')]
    protocols: Option<Vec<Protocol>>,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct AggregateArgs {
    records: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Scenario with the channel it was drawn for.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    scenario: Scenario,
    channel: ChannelParams,
    interference: InterferenceFlags,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InstanceInput {
    Full(InstanceFile),
    Bare(Scenario),
}

fn load_config(path: Option<&Path>) -> Result<SweepConfig> {
    match path {
        Some(p) => Ok(serde_json::from_reader(io::BufReader::new(File::open(p)?))?),
        None => Ok(SweepConfig::default()),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn gen(config: &SweepConfig, args: &GenArgs) -> Result<()> {
    config.check()?;
    let scenario = generate_scenario(config, args.inter, [args.intra1, args.intra2], args.seed)?;
    let channel = ChannelParams { seed: derive_seed(args.seed, &[1]), ..config.channel.clone() };
    let file = InstanceFile { scenario, channel, interference: config.interference };
    write_json(args.out.as_deref(), &file)
}

fn solve_cmd(config: &SweepConfig, args: &SolveArgs) -> Result<()> {
    let text = fs::read_to_string(&args.scenario)?;
    let file = match serde_json::from_str(&text)? {
        InstanceInput::Full(f) => f,
        InstanceInput::Bare(scenario) => InstanceFile {
            scenario,
            channel: config.channel.clone(),
            interference: config.interference,
        },
    };
    let mut solver = config.solver.clone();
    solver.n_max = args.nmax.unwrap_or(solver.n_max);
    solver.n_iter = args.niter.unwrap_or(solver.n_iter);
    solver.epsilon = args.eps.unwrap_or(solver.epsilon);
    solver.alpha = args.alpha.or(solver.alpha);
    solver.seed = args.seed.unwrap_or(solver.seed);
    solver.record_trace = args.trace;
    solver.check()?;

    let scn = &file.scenario;
    scn.ensure_valid()?;
    let chan = build_channel(scn, &file.channel)?;
    let coupling = build_coupling(scn, &chan, &file.channel, file.interference)?;
    let outcome = solve(args.protocol, scn, &coupling, &solver)?;
    write_json(args.out.as_deref(), &outcome)
}

fn print_table(agg: &Aggregates) -> Result<()> {
    let mut out = io::stdout().lock();
    let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
    writeln!(out, "{:<6} {:>8} {:>9} {:>9} {:>9}", "proto", "runs", "outage", "out D<=", "mean rho")?;
    for (p, s) in &agg.protocols {
        writeln!(
            out,
            "{:<6} {:>8} {:>9} {:>9} {:>9}",
            p.name(),
            s.all.count,
            fmt(s.all.outage),
            fmt(s.low_distance.outage),
            fmt(s.all.mean_rho)
        )?;
    }
    Ok(())
}

fn sweep(mut config: SweepConfig, args: &SweepArgs) -> Result<()> {
    config.runs = args.runs.unwrap_or(config.runs);
    config.master_seed = args.seed.unwrap_or(config.master_seed);
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if let Some(p) = &args.protocols {
        config.protocols = p.clone();
    }
    if args.sequential {
        config.execution = Execution::Sequential;
    }
    config.check()?;

    let result = run_sweep(&config)?;
    fs::create_dir_all(&config.output_dir)?;
    write_records(&result.records, BufWriter::new(File::create(config.output_dir.join("records.csv"))?))?;
    write_json(Some(&config.output_dir.join("aggregates.json")), &result.aggregates)?;
    print_table(&result.aggregates)
}

fn aggregate_cmd(config: &SweepConfig, args: &AggregateArgs) -> Result<()> {
    let records = read_records(io::BufReader::new(File::open(&args.records)?))?;
    let agg = aggregate(&records, &config.bin_edges, config.distance_split)?;
    write_json(args.out.as_deref(), &agg)
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Gen(a) => gen(&config, a),
        Command::Solve(a) => solve_cmd(&config, a),
        Command::Sweep(a) => sweep(config, a),
        Command::Aggregate(a) => aggregate_cmd(&config, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
