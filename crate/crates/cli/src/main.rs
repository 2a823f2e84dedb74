use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quadlab_cli::scenario::{Experiment, OracleSpec, SpaceExpectation};
use quadlab_cli::{
    emit_plotdata, find, list_presets, read_csv, run_scenario, write_outputs, HarnessError, Scenario,
    DEFAULT_SEED, EXIT_INVALID,
};
use quadlab_core::EquationSpec;

#[derive(Parser)]
#[command(name = "quadlab", version, about = "Stability experiments for quadratic functional equations")]
struct Cli {
    /// Directory that relative output paths resolve against.
    #[arg(long, global = true, env = "QUADLAB_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config.
    Run { config: PathBuf },
    /// Run a built-in scenario.
    Preset {
        name: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// List the built-in scenarios.
    List,
    /// Compare the solution spaces of two equations over F_q^d.
    Oracle {
        /// fe1, fe2, fe3:<n>, fe3_0:<a> or hom:<scale>:<degree>.
        eq1: String,
        eq2: String,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// Project a results CSV onto (norm_x, deviation, bound), sorted by norm_x.
    Plotdata {
        results: PathBuf,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn equation(arg: &str, text: &str) -> Result<EquationSpec, HarnessError> {
    text.parse().map_err(|e: quadlab_core::Error| HarnessError::Invalid {
        path: arg.to_string(),
        message: e.to_string(),
    })
}

fn execute(scenario: Scenario, out_dir: &Path) -> Result<u8, HarnessError> {
    let outcome = run_scenario(&scenario)?;
    let written = write_outputs(&scenario, &outcome, out_dir)?;
    for line in &outcome.summary {
        println!("{}: {line}", scenario.name);
    }
    let status = outcome.status();
    println!(
        "{}: {:?} ({} rows) -> {}",
        scenario.name,
        status,
        outcome.rows.len(),
        written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ")
    );
    Ok(status.exit_code())
}

fn dispatch(cli: Cli) -> Result<u8, HarnessError> {
    match cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config).map_err(|source| HarnessError::Io {
                path: config.clone(),
                source,
            })?;
            execute(Scenario::from_json(&text)?, &cli.out_dir)
        }
        Command::Preset { name, seed } => {
            let preset = find(&name).ok_or(HarnessError::UnknownPreset(name))?;
            execute(preset.scenario(seed), &cli.out_dir)
        }
        Command::List => {
            for (name, tag, description) in list_presets() {
                println!("{name:<18} {tag:<14} {description}");
            }
            Ok(0)
        }
        Command::Oracle { eq1, eq2, q, d } => {
            let (a, b) = (equation("eq1", &eq1)?, equation("eq2", &eq2)?);
            let scenario = Scenario {
                name: format!("oracle-{}-{}-q{q}-d{d}", a, b).replace(':', "_"),
                seed: 0,
                outputs: Default::default(),
                experiment: Experiment::Oracle(OracleSpec {
                    a,
                    b,
                    q,
                    d,
                    expect: SpaceExpectation::Equal,
                }),
            };
            execute(scenario, &cli.out_dir)
        }
        Command::Plotdata { results, output } => {
            let bytes = emit_plotdata(&read_csv(&results)?)?;
            match output {
                Some(p) => quadlab_cli::results::write_atomic(&p, &bytes)?,
                None => print!("{}", String::from_utf8_lossy(&bytes)),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
