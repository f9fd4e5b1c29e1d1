use std::fs::{self, File};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use cascadenet::cascade_fixed::{
    fixed_lti_run, grid_for_rows, model_from_rows, read_edge_laws, read_node_laws, write_edge_laws, write_node_laws,
};
use cascadenet::harness::config::{read_config_layer, ExperimentConfig, ExperimentId};
use cascadenet::harness::eu::{eu_skeleton, EuBalanceSheets, EuCalibration};
use cascadenet::harness::experiments::run_and_write;
use cascadenet::harness::HarnessError;
use cascadenet::netgen::{
    poisson_skeleton, preferential_attachment, read_skeleton_file, top_connected_subnetwork, write_skeleton_file,
};
use cascadenet::rng::stream;

#[derive(Parser)]
#[command(name = "cascadenet", version, about = "Double cascades of stress and default on interbank networks")]
struct Cli {
    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its tables.
    Run(RunArgs),
    /// Generate a skeleton file.
    Gen(GenArgs),
    /// Build the EU-style 90-bank network and write it with its laws.
    EuBuild {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fixed-skeleton cascade mapping from a skeleton and law files.
    Fixed(FixedArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    experiment: String,
    /// TOML configuration; command-line values take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated subset of lti, fixed, mc.
    #[arg(long, value_delimiter = ',')]
    engines: Option<Vec<String>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    network_seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    z: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long)]
    grid_cells: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Poisson,
    Pa,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long)]
    n: usize,
    /// Mean degree of the Poisson model.
    #[arg(long, default_value_t = 10.0)]
    z: f64,
    #[arg(long, default_value_t = 0.169)]
    alpha: f64,
    #[arg(long, default_value_t = 0.169)]
    gamma: f64,
    #[arg(long, default_value_t = 4.417)]
    delta_in: f64,
    #[arg(long, default_value_t = 4.417)]
    delta_out: f64,
    /// Keep only this many most connected nodes.
    #[arg(long)]
    keep: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct FixedArgs {
    #[arg(long)]
    skeleton: PathBuf,
    #[arg(long)]
    node_laws: PathBuf,
    #[arg(long)]
    edge_laws: PathBuf,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 2048)]
    grid_cells: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Per-node probabilities as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn flag_layer(args: &RunArgs) -> toml::Table {
    let mut t = toml::Table::new();
    let mut put = |k: &str, v: Option<toml::Value>| {
        if let Some(v) = v {
            t.insert(k.into(), v);
        }
    };
    put("engines", args.engines.clone().map(toml::Value::from));
    put("trials", args.trials.map(|x| toml::Value::Integer(x as i64)));
    put("seed", args.seed.map(|x| toml::Value::Integer(x as i64)));
    put("network_seed", args.network_seed.map(|x| toml::Value::Integer(x as i64)));
    put("n", args.n.map(|x| toml::Value::Integer(x as i64)));
    put("z", args.z.map(toml::Value::Float));
    put("lambdas", args.lambdas.clone().map(toml::Value::from));
    put("grid_cells", args.grid_cells.map(|x| toml::Value::Integer(x as i64)));
    put("out", args.out.as_ref().map(|p| toml::Value::String(p.display().to_string())));
    t
}

fn run(args: RunArgs) -> Result<(), HarnessError> {
    let id: ExperimentId = args.experiment.parse()?;
    let mut layers = Vec::new();
    if let Some(path) = &args.config {
        layers.push(read_config_layer(path)?);
    }
    layers.push(flag_layer(&args));
    let config = ExperimentConfig::resolve(id, &layers)?;
    let results = run_and_write(&config)?;
    for t in &results.tables {
        println!("{}: {} rows -> {}", t.name, t.rows.len(), config.out.join(format!("{}.csv", t.name)).display());
    }
    if !results.skipped.is_empty() {
        println!("{} sweep points skipped, see summary.json", results.skipped.len());
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), HarnessError> {
    let mut rng = stream(args.seed, 0);
    let g = match args.model {
        Model::Poisson => poisson_skeleton(args.n, args.z, &mut rng)?,
        Model::Pa => preferential_attachment(args.n, args.alpha, args.gamma, args.delta_in, args.delta_out, &mut rng)?,
    };
    let g = match args.keep {
        Some(m) => top_connected_subnetwork(&g, m)?.skeleton,
        None => g,
    };
    write_skeleton_file(&g, &args.out)?;
    println!("{} nodes, {} edges -> {}", g.node_count(), g.edge_count(), args.out.display());
    Ok(())
}

fn eu_build(seed: u64, out: PathBuf) -> Result<(), HarnessError> {
    let cal = EuCalibration::default();
    let mut rng = stream(seed, 0);
    let g = Arc::new(eu_skeleton(&cal, &mut rng)?);
    let sheets = EuBalanceSheets::new(g.clone(), &cal, 1.0, 1.0)?;
    let real = sheets.draw(&mut rng)?;
    fs::create_dir_all(&out)?;
    write_skeleton_file(&g, &out.join("skeleton.txt"))?;
    let p0 = 1.0 / g.node_count() as f64;
    write_node_laws(&sheets.node_law_rows(p0), File::create(out.join("nodes.csv"))?)?;
    write_edge_laws(&sheets.edge_law_rows(), File::create(out.join("edges.csv"))?)?;
    let mut w = csv::Writer::from_path(out.join("balance_sheets.csv")).map_err(|e| HarnessError::Io(std::io::Error::other(e)))?;
    let io = |e: csv::Error| HarnessError::Io(std::io::Error::other(e));
    w.write_record(["v", "delta", "sigma"]).map_err(io)?;
    for v in 0..g.node_count() {
        w.write_record([v.to_string(), real.delta[v].to_string(), real.sigma[v].to_string()]).map_err(io)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(out.join("exposures.csv")).map_err(io)?;
    w.write_record(["v", "w", "omega"]).map_err(io)?;
    for (e, edge) in g.edges().iter().enumerate() {
        w.write_record([edge.debtor.to_string(), edge.creditor.to_string(), real.omega[e].to_string()]).map_err(io)?;
    }
    w.flush()?;
    fs::write(out.join("calibration.toml"), toml::to_string(&cal).map_err(|e| HarnessError::Config(e.to_string()))?)?;
    println!("{} banks, {} exposures -> {}", g.node_count(), g.edge_count(), out.display());
    Ok(())
}

fn fixed(args: FixedArgs) -> Result<(), HarnessError> {
    if !(args.tol > 0.0) {
        return Err(HarnessError::Config("tol must be positive".into()));
    }
    let g = Arc::new(read_skeleton_file(&args.skeleton)?);
    let nodes = read_node_laws(File::open(&args.node_laws)?)?;
    let edges = read_edge_laws(File::open(&args.edge_laws)?)?;
    let grid = grid_for_rows(&nodes, args.grid_cells)?;
    let model = model_from_rows(g, &nodes, &edges, grid, args.lambda)?;
    let outcome = fixed_lti_run(&model, args.tol, args.max_iter);
    println!(
        "expected defaults {:.6}, expected stressed {:.6}, {} iterations{}",
        outcome.expected_defaults,
        outcome.expected_stressed,
        outcome.iterations,
        if outcome.converged { "" } else { " (not converged)" }
    );
    if let Some(path) = args.out {
        let io = |e: csv::Error| HarnessError::Io(std::io::Error::other(e));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(["v", "p", "q"]).map_err(io)?;
        for (v, (p, q)) in outcome.state.p.iter().zip(&outcome.state.q).enumerate() {
            w.write_record([v.to_string(), p.to_string(), q.to_string()]).map_err(io)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Gen(args) => gen(args),
        Command::EuBuild { seed, out } => eu_build(seed, out),
        Command::Fixed(args) => fixed(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
