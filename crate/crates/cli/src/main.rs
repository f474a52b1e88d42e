//! Command-line front end: thermal snapshots, feedback-cycle tables, chain
//! reversal with path-entropy statistics, channel-algebra tables, ledger
//! checks, and the deterministic verification suites.
//!
//! Exit codes: 0 on success / all checks passing, 2 on verification failure,
//! 1 on usage or input errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;

use demonlab::chain::{MarkovChainSpec, SigmaMode, StructuredChainSpec};
use demonlab::info::{Axis, JointDist, ProbVec, TransitionMatrix};
use demonlab::szilard::{self, LegTable};
use demonlab::thermal::{self, Hamiltonian, ThermalParams};
use demonlab::{bsc, ledger, verify};

#[derive(Parser)]
#[command(name = "demonlab", version, about = "Entropy-bookkeeping laboratory for feedback-controlled thermodynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Subcommand)]
enum Command {
    /// Thermal-state snapshot of a diagonal spectrum: Z, E, S, F and the
    /// E = T S + F residual.
    Thermal {
        /// Comma-separated energy levels, e.g. "0,1,2.5".
        #[arg(long)]
        levels: String,
        /// Inverse temperature.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Per-leg entropy-change table of one feedback cycle.
    Szilard {
        /// Case tag: c1, c2, q1, or q2.
        #[arg(long)]
        case: String,
        /// Path to the JSON parameter file.
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Bath temperature for the accompanying work report.
        #[arg(long)]
        temperature: Option<f64>,
    },
    /// Bayes-reverse a hidden/observed chain and report path-entropy stats.
    Reverse {
        /// Path to the JSON chain file.
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        /// Sample count (Monte Carlo mode).
        #[arg(long)]
        samples: Option<usize>,
        /// RNG seed (required in Monte Carlo mode).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Binary-symmetric-channel utilities.
    Bsc {
        #[command(subcommand)]
        command: BscCommand,
    },
    /// Thermodynamic ledger checks.
    Ledger {
        #[command(subcommand)]
        command: LedgerCommand,
    },
    /// Run a deterministic verification suite.
    Verify {
        /// Suite: all, thermal, cain, reversal, szilard, bsc, ledger.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BscCommand {
    /// Symmetric-kernel cycle table for initial bias L, sensor channel
    /// M(alpha), feedback channel M(beta).
    Table {
        #[arg(long)]
        l: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum LedgerCommand {
    /// Quasi-static two-bath engine numbers.
    Engine(EngineArgs),
    /// Rectangle cycle in the (T, S) plane.
    Carnot(CarnotArgs),
    /// First-law and contact-edge residuals of a process step file.
    Check {
        #[arg(long)]
        params: PathBuf,
    },
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long)]
    t_hot: f64,
    #[arg(long)]
    t_cold: f64,
    #[arg(long)]
    q_cold: f64,
}

#[derive(Args)]
struct CarnotArgs {
    #[arg(long)]
    t_hot: f64,
    #[arg(long)]
    t_cold: f64,
    #[arg(long)]
    s_low: f64,
    #[arg(long)]
    s_high: f64,
}

// ---------------------------------------------------------------------------
// Raw JSON input schemas (validated through the library constructors)
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    rows: usize,
    cols: usize,
    /// Row-major; column x holds the output distribution given input x.
    data: Vec<f64>,
}

impl RawKernel {
    fn build(&self) -> Result<TransitionMatrix, CliError> {
        TransitionMatrix::new(self.rows, self.cols, self.data.clone()).map_err(input_err)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawC1 {
    p_s0: Vec<f64>,
    p_sigma1_given_s0: RawKernel,
    p_s2_given_sigma1: RawKernel,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawC2 {
    /// Row-major over (s0, t0).
    p_s0t0: Vec<f64>,
    n_s: usize,
    n_t: usize,
    p_sigma1_given_s0: RawKernel,
    p_s2_given_sigma1: RawKernel,
    p_t2_given_sigma1: RawKernel,
}

/// Complex entries as [re, im] pairs.
type RawComplexMatrix = Vec<Vec<[f64; 2]>>;

fn build_complex(m: &RawComplexMatrix, what: &str) -> Result<DMatrix<Complex64>, CliError> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(CliError::Input(format!("{what}: ragged or empty complex matrix")));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| Complex64::new(m[i][j][0], m[i][j][1])))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQ1 {
    a_init: RawComplexMatrix,
    a_meas: RawComplexMatrix,
    feedback: Vec<RawComplexMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQ2 {
    n_s: usize,
    n_t: usize,
    a_init: RawComplexMatrix,
    a_meas: RawComplexMatrix,
    feedback: Vec<RawComplexMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    initial: Vec<f64>,
    steps: Vec<RawKernel>,
    dim_th: usize,
    dim_x: usize,
}

enum CliError {
    /// Usage or input problem (exit 1).
    Input(String),
    /// A verification suite failed (exit 2).
    VerificationFailed,
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Resolve `--out` against the default output directory env var.
fn resolve_out(path: PathBuf) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var("DEMONLAB_OUT_DIR") {
            return PathBuf::from(dir).join(path);
        }
    }
    path
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let path = resolve_out(path);
            std::fs::write(&path, text)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn table_output(table: &LegTable, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(table).expect("serializable"),
        Format::Markdown => table.to_markdown(),
        Format::Csv => {
            let mut s = String::from(
                "leg,system_direct,system_closed_form,joint_direct,joint_closed_form\n",
            );
            for r in &table.legs {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.leg,
                    r.system.direct,
                    r.system.closed_form,
                    r.joint.direct,
                    r.joint.closed_form
                ));
            }
            s
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Thermal { levels, beta, format } => {
            let levels: Vec<f64> = levels
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Input(format!("bad --levels: {e}")))?;
            if levels.is_empty() {
                return Err(CliError::Input("need at least one level".into()));
            }
            let h = Hamiltonian::diagonal(&levels);
            let t = ThermalParams::new(beta).map_err(input_err)?;
            let e = thermal::thermal_energy(&h, t);
            let s = thermal::thermal_entropy(&h, t);
            let f = thermal::free_energy(&h, t);
            let report = json!({
                "beta": beta,
                "temperature": t.temperature(),
                "partition_function": thermal::partition_function(&h, t),
                "energy": e,
                "entropy": s,
                "free_energy": f,
                "decomposition_residual": e - (t.temperature() * s + f),
            });
            match format {
                Format::Markdown | Format::Csv => {
                    println!("quantity,value");
                    for (k, v) in report.as_object().unwrap() {
                        println!("{k},{v}");
                    }
                }
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
            }
            Ok(())
        }
        Command::Szilard { case, params, format, temperature } => {
            let table = match case.as_str() {
                "c1" => {
                    let raw: RawC1 = read_json(&params)?;
                    let p = szilard::C1Params {
                        p_s0: ProbVec::new(raw.p_s0).map_err(input_err)?,
                        p_sigma1_given_s0: raw.p_sigma1_given_s0.build()?,
                        p_s2_given_sigma1: raw.p_s2_given_sigma1.build()?,
                    };
                    szilard::table_c1(&p).map_err(input_err)?
                }
                "c2" => {
                    let raw: RawC2 = read_json(&params)?;
                    let p = szilard::C2Params {
                        p_s0t0: JointDist::new(
                            vec![Axis::new("s0", raw.n_s), Axis::new("t0", raw.n_t)],
                            raw.p_s0t0,
                        )
                        .map_err(input_err)?,
                        p_sigma1_given_s0: raw.p_sigma1_given_s0.build()?,
                        p_s2_given_sigma1: raw.p_s2_given_sigma1.build()?,
                        p_t2_given_sigma1: raw.p_t2_given_sigma1.build()?,
                    };
                    szilard::table_c2(&p).map_err(input_err)?
                }
                "q1" => {
                    let raw: RawQ1 = read_json(&params)?;
                    let p = szilard::Q1Params {
                        a_init: build_complex(&raw.a_init, "a_init")?,
                        a_meas: build_complex(&raw.a_meas, "a_meas")?,
                        feedback: raw
                            .feedback
                            .iter()
                            .map(|m| build_complex(m, "feedback"))
                            .collect::<Result<_, _>>()?,
                    };
                    szilard::table_q1(&p).map_err(input_err)?
                }
                "q2" => {
                    let raw: RawQ2 = read_json(&params)?;
                    let p = szilard::Q2Params {
                        n_s: raw.n_s,
                        n_t: raw.n_t,
                        a_init: build_complex(&raw.a_init, "a_init")?,
                        a_meas: build_complex(&raw.a_meas, "a_meas")?,
                        feedback: raw
                            .feedback
                            .iter()
                            .map(|m| build_complex(m, "feedback"))
                            .collect::<Result<_, _>>()?,
                    };
                    szilard::table_q2(&p).map_err(input_err)?
                }
                other => {
                    return Err(CliError::Input(format!(
                        "unknown case '{other}'; expected c1, c2, q1, or q2"
                    )))
                }
            };
            let mut text = table_output(&table, format);
            if let Some(t) = temperature {
                let report = szilard::work_report(&table, t).map_err(input_err)?;
                match format {
                    Format::Json => {
                        text = serde_json::to_string_pretty(&json!({
                            "table": table,
                            "work_report": report,
                        }))
                        .unwrap();
                    }
                    _ => {
                        text.push('\n');
                        for e in &report.entries {
                            text.push_str(&format!(
                                "{} ({}) entropy {} work {}\n",
                                e.label, e.kind, e.entropy_nats, e.work
                            ));
                        }
                    }
                }
            }
            println!("{text}");
            Ok(())
        }
        Command::Reverse { params, mode, samples, seed, out } => {
            let raw: RawChain = read_json(&params)?;
            let initial = ProbVec::new(raw.initial).map_err(input_err)?;
            let steps = raw
                .steps
                .iter()
                .map(RawKernel::build)
                .collect::<Result<Vec<_>, _>>()?;
            let chain_spec = MarkovChainSpec::new(initial, steps).map_err(input_err)?;
            let spec = StructuredChainSpec::new(chain_spec, raw.dim_th, raw.dim_x)
                .map_err(input_err)?;
            let sigma_mode = match mode {
                Mode::Exact => SigmaMode::Exact,
                Mode::Mc => {
                    let n_samples = samples.ok_or_else(|| {
                        CliError::Input("--samples is required with --mode mc".into())
                    })?;
                    let seed = seed.ok_or_else(|| {
                        CliError::Input("--seed is required with --mode mc".into())
                    })?;
                    SigmaMode::MonteCarlo { n_samples, seed }
                }
            };
            let rev = demonlab::chain::reverse_chain(&spec.chain).map_err(input_err)?;
            let sigma =
                demonlab::chain::estimate_sigma(&spec, sigma_mode, false).map_err(input_err)?;
            let report = json!({
                "reversed_initial": rev.chain.initial,
                "reversed_steps": rev.chain.steps,
                "flagged_columns": rev.flagged,
                "sigma": sigma,
            });
            emit(&serde_json::to_string_pretty(&report).unwrap(), out)
        }
        Command::Bsc { command } => match command {
            BscCommand::Table { l, alpha, beta, format } => {
                let table = bsc::c1_bsc_table(l, alpha, beta).map_err(input_err)?;
                println!("{}", table_output(&table, format));
                Ok(())
            }
        },
        Command::Ledger { command } => match command {
            LedgerCommand::Engine(a) => {
                let rep =
                    ledger::heat_engine_cycle(a.t_hot, a.t_cold, a.q_cold).map_err(input_err)?;
                println!("{}", serde_json::to_string_pretty(&rep).unwrap());
                Ok(())
            }
            LedgerCommand::Carnot(a) => {
                let rep = ledger::carnot_cycle_check(a.t_hot, a.t_cold, a.s_low, a.s_high)
                    .map_err(input_err)?;
                println!("{}", serde_json::to_string_pretty(&rep).unwrap());
                Ok(())
            }
            LedgerCommand::Check { params } => {
                let step: ledger::ProcessStep = read_json(&params)?;
                let residual = step.check_contacts().map_err(input_err)?;
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({ "max_residual": residual })).unwrap()
                );
                if residual > 1e-12 {
                    return Err(CliError::VerificationFailed);
                }
                Ok(())
            }
        },
        Command::Verify { suite, seed, out } => {
            let start = std::time::Instant::now();
            let report = verify::run_suite(&suite, seed).map_err(input_err)?;
            // Wall time goes to stderr only, so reports stay byte-identical.
            eprintln!("suite '{suite}' finished in {:?}", start.elapsed());
            emit(&serde_json::to_string_pretty(&report).unwrap(), out)?;
            if report.overall != "pass" {
                return Err(CliError::VerificationFailed);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error itself
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::VerificationFailed) => {
            eprintln!("verification failed");
            ExitCode::from(2)
        }
    }
}
