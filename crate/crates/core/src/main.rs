use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cvpair::dynamics::{build_drift, stability_check, StabilityMethod};
use cvpair::harness::config_file::{load_config, parse_quantity, Dimension};
use cvpair::harness::output::{emit_csv, emit_svg_plot, CsvTable};
use cvpair::harness::{
    run_sweep, scenario_custom, scenario_fig2, scenario_fig3, scenario_fig4, scenario_fig5, Axis,
    AxisKind, Fig4Model, Scenario, ScenarioId, SweepOptions,
};
use cvpair::physics::{config_warnings, derive_couplings, validate_config, SystemConfig};
use cvpair::steady_state::SolverBackend;
use cvpair::{Error, Result};

#[derive(Parser)]
#[command(name = "cvpair", version, about = "Stationary microwave entanglement sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Fig2,
    Fig3,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Eigenvalue,
    Certificate,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write CSV (stdout unless --out is given).
    Run {
        #[arg(long)]
        scenario: String,
        /// Pair count for fig2_detuning and fig4_temperature with --model fig2.
        #[arg(long, default_value_t = 2)]
        pairs: usize,
        /// Network used by fig4_temperature: the three-pair multi-frequency
        /// network (fig3) or identical 9 GHz pairs (fig2, with --pairs).
        #[arg(long, value_enum, default_value = "fig3")]
        model: ModelArg,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// JSON network description, required by the custom scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Axis for the custom scenario: detuning, temperature or dc.
        #[arg(long)]
        axis: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        max: Option<f64>,
        /// Overrides the bath temperature, e.g. "20 mK".
        #[arg(long)]
        temperature: Option<String>,
        #[arg(long, default_value = "vectorized")]
        backend: String,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check a configuration file and print violations and warnings.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Report the spectral abscissa and stability verdict of a configuration.
    Stability {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodArg,
    },
}

fn checked_config(path: &Path) -> Result<SystemConfig> {
    let cfg = load_config(path)?;
    let violations = validate_config(&cfg);
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }
    for w in config_warnings(&cfg) {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

#[allow(clippy::too_many_arguments)]
fn build_scenario(
    id: ScenarioId,
    pairs: usize,
    model: ModelArg,
    config: Option<&PathBuf>,
    axis: Option<&str>,
    min: Option<f64>,
    max: Option<f64>,
) -> Result<Scenario> {
    if id != ScenarioId::Custom && (config.is_some() || axis.is_some()) {
        return Err(Error::InvalidInput(
            "--config and --axis apply only to the custom scenario".into(),
        ));
    }
    let mut s = match id {
        ScenarioId::Fig2Detuning => scenario_fig2(pairs)?,
        ScenarioId::Fig3Multifreq => scenario_fig3(),
        ScenarioId::Fig4Temperature => scenario_fig4(match model {
            ModelArg::Fig2 => Fig4Model::IdenticalPairs(pairs),
            ModelArg::Fig3 => Fig4Model::MultiFrequency,
        })?,
        ScenarioId::Fig5DetuningCoefficient => scenario_fig5(),
        ScenarioId::Custom => {
            let path = config
                .ok_or_else(|| Error::InvalidInput("custom scenario needs --config".into()))?;
            let kind: AxisKind = axis
                .ok_or_else(|| Error::InvalidInput("custom scenario needs --axis".into()))?
                .parse()?;
            let (lo, hi) = match kind {
                AxisKind::Temperature => (1e-3, 0.25),
                _ => (-1.0, 1.0),
            };
            scenario_custom(checked_config(path)?, Axis::of_kind(kind, lo, hi, 101))
        }
    };
    if let Some(v) = min {
        s.axis.min = v;
    }
    if let Some(v) = max {
        s.axis.max = v;
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            pairs,
            model,
            points,
            out,
            svg,
            config,
            axis,
            min,
            max,
            temperature,
            backend,
            workers,
        } => {
            let id: ScenarioId = scenario.parse()?;
            let backend: SolverBackend = backend.parse()?;
            let mut s = build_scenario(id, pairs, model, config.as_ref(), axis.as_deref(), min, max)?;
            if let Some(k) = points {
                s.axis.points = k;
            }
            if let Some(t) = temperature {
                s.base_config.mech.temperature = parse_quantity(&t, Dimension::Temperature, None)
                    .map_err(|m| Error::InvalidInput(format!("--temperature: {m}")))?;
            }
            let result = run_sweep(&s, SweepOptions { backend, workers })?;
            match &out {
                Some(path) => emit_csv(&result, path)?,
                None => print!("{}", CsvTable::from_result(&result).to_csv_string()),
            }
            if let Some(path) = &svg {
                emit_svg_plot(&result, path)?;
            }
            let unstable = result.rows.iter().filter(|r| !r.stable).count();
            let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
            eprintln!(
                "{}: {} points, {unstable} unstable, {failed} failed, config {}",
                result.metadata.scenario,
                result.rows.len(),
                result.metadata.config_hash
            );
            for row in result.rows.iter().filter_map(|r| r.error.as_ref().map(|e| (r.axis, e))) {
                eprintln!("  axis {:e}: {}", row.0, row.1);
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = checked_config(&config)?;
            derive_couplings(&cfg)?;
            println!("ok: {} microwave cavities, dimension {}", cfg.n_microwaves(), cfg.dimension());
            Ok(())
        }
        Command::Stability { config, method } => {
            let cfg = checked_config(&config)?;
            let derived = derive_couplings(&cfg)?;
            let a = build_drift(&cfg, &derived);
            let method = match method {
                MethodArg::Eigenvalue => StabilityMethod::Eigenvalue,
                MethodArg::Certificate => StabilityMethod::LyapunovCertificate,
                MethodArg::Both => StabilityMethod::Both,
            };
            let report = stability_check(&a, method)?;
            for z in &report.eigenvalues {
                println!("eigenvalue {:.16e} {:+.16e}i", z.re, z.im);
            }
            if let Some(s) = report.spectral_abscissa {
                println!("spectral_abscissa {s:.16e}");
            }
            println!("{}", if report.is_stable { "stable" } else { "unstable" });
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
