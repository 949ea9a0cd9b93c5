use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use dilute_core::arith::parse_k_rational;
use dilute_core::error::Error;
use dilute_core::experiment::{self, Command, EnergySpec, KGrid, OutputFormat, RunConfig};
use dilute_core::model::parse_seed;
use dilute_core::verify::{self, Suite};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Lyapunov,
    Dos,
    Anomaly,
    Harmonics,
    SweepEnergy,
    SweepDensity,
    Verify,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

/// Lyapunov exponent and density of states of the dilute random Schroedinger chain.
#[derive(Debug, Parser)]
#[command(name = "dilute", version)]
struct Cli {
    command: Cmd,

    /// Quasi-momentum in (0, pi).
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["energy", "k_rational"])]
    k: Option<f64>,
    /// Energy in (-2, 2).
    #[arg(long = "E", allow_hyphen_values = true, conflicts_with = "k_rational")]
    energy: Option<f64>,
    /// k = pi p/q given exactly.
    #[arg(long, value_name = "P/Q")]
    k_rational: Option<String>,
    /// Energy sweep grid in k.
    #[arg(long, value_name = "START:STOP:POINTS")]
    k_grid: Option<String>,

    #[arg(long, default_value_t = 0.05)]
    rho: f64,
    /// Densities for sweep-density, comma separated.
    #[arg(long, value_delimiter = ',')]
    rho_grid: Option<Vec<f64>>,
    /// Impurity law "v:w,...".
    #[arg(long, default_value = "2:1", allow_hyphen_values = true)]
    dist: String,

    #[arg(long, default_value_t = 1_000_000)]
    steps: u64,
    #[arg(long, default_value_t = 10_000)]
    burn_in: u64,
    #[arg(long, default_value_t = 1)]
    replicas: u64,
    /// Decimal or 0x-hex; defaults to 1, or to the suite seed for verify.
    #[arg(long)]
    seed: Option<String>,

    #[arg(long, default_value_t = 64)]
    m_max: usize,
    #[arg(long, default_value_t = 128)]
    l_max: usize,
    #[arg(long, default_value_t = 32)]
    n_max: usize,
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    #[arg(long, default_value_t = 12)]
    q_max: u32,
    /// Box size for eigenvalue counting, 0 to skip.
    #[arg(long = "box", default_value_t = 10_000)]
    box_size: usize,

    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    no_timestamp: bool,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,

    #[arg(long, value_enum, default_value_t = SuiteArg::Fast)]
    suite: SuiteArg,
}

fn config(cli: &Cli) -> Result<RunConfig, Error> {
    let energy = match (cli.k, cli.energy, &cli.k_rational) {
        (Some(k), _, _) => Some(EnergySpec::K(k)),
        (_, Some(e), _) => Some(EnergySpec::E(e)),
        (_, _, Some(r)) => {
            let (p, q) = parse_k_rational(r)?;
            Some(EnergySpec::Rational { p, q })
        }
        _ => None,
    };
    let config = RunConfig {
        command: match cli.command {
            Cmd::Lyapunov => Command::Lyapunov,
            Cmd::Dos => Command::Dos,
            Cmd::Anomaly => Command::Anomaly,
            Cmd::Harmonics => Command::Harmonics,
            Cmd::SweepEnergy => Command::SweepEnergy,
            Cmd::SweepDensity => Command::SweepDensity,
            Cmd::Verify => Command::Verify,
        },
        energy,
        k_grid: cli.k_grid.as_deref().map(KGrid::parse).transpose()?,
        rho: cli.rho,
        rho_grid: cli.rho_grid.clone(),
        dist: cli.dist.clone(),
        n_steps: cli.steps,
        burn_in: cli.burn_in,
        replicas: cli.replicas,
        seed: cli.seed.as_deref().map(parse_seed).transpose()?.unwrap_or(1),
        m_max: cli.m_max,
        l_max: cli.l_max,
        n_max: cli.n_max,
        n_grid: cli.grid,
        q_max: cli.q_max,
        box_size: cli.box_size,
        format: match cli.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        },
        out: cli.out.clone(),
        no_timestamp: cli.no_timestamp,
        threads: cli.threads,
        full: matches!(cli.suite, SuiteArg::Full),
        ..RunConfig::default()
    };
    config.validate()?;
    Ok(config)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Consistency(_) => 3,
        _ => 1,
    }
}

fn emit(text: &str, out: Option<&str>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(cli: &Cli, config: &RunConfig) -> Result<u8, Error> {
    let suite = if config.full { Suite::Full } else { Suite::Fast };
    let seed = if cli.seed.is_some() { config.seed } else { verify::DEFAULT_SEED };
    let verdict = verify::cmd_verify(suite, seed, config.threads)?;
    for c in &verdict.criteria {
        eprintln!("{}", c.line());
    }
    let text = serde_json::to_string_pretty(&verdict).expect("verdict serializes") + "\n";
    emit(&text, config.out.as_deref())?;
    Ok(if verdict.passed { 0 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(&cli).and_then(|config| match config.command {
        Command::Verify => verify(&cli, &config),
        _ => experiment::run(&config).and_then(|text| emit(&text, config.out.as_deref())).map(|_| 0),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("dilute: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
