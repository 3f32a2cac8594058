//! Command-line front end: calibrate a parameter from a loss file, generate
//! synthetic losses, or run the method-comparison benchmark.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use riskcal::error::Error;
use riskcal::fwer::{
    bonferroni, cascaded_2d_fixed_sequence, fixed_sequence, holm, sgt, split_fixed_sequence,
    RejectionSet, TestGraph,
};
use riskcal::grid::ParameterGrid;
use riskcal::loss::{LossTensor, RiskSpec};
use riskcal::pvalues::{combine_max, pvalues_from_tensor, PValueMethod};
use riskcal::report::{
    benchmark_report_to_json, render_benchmark_svg, CalibrationReport, SelectedPoint,
};
use riskcal::select::select_sup;
use riskcal::sim::{
    run_benchmark_trials, simulate_ar, target_risks, ARConfig, BenchMethod, RiskCurve,
};
use riskcal::uniform::{calibrate_uniform, Growth, UniformBoundConfig};

#[derive(Parser)]
#[command(name = "riskcal", version, about = "Risk calibration over a parameter grid via multiple testing")]
struct Cli {
    /// Worker threads for Monte Carlo loops (default: all cores). Results
    /// are independent of this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a risk-controlling parameter set from a loss file.
    Calibrate(CalibrateArgs),
    /// Generate a synthetic autoregressive loss file.
    Simulate(SimulateArgs),
    /// Compare calibration methods on the synthetic benchmark.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PValueFlag {
    Hb,
    Clt,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProcedureFlag {
    Bonferroni,
    Holm,
    FixedSeq,
    Sgt,
    SplitFixedSeq,
    Cascade2d,
    Uniform,
}

impl ProcedureFlag {
    fn name(self) -> &'static str {
        match self {
            ProcedureFlag::Bonferroni => "bonferroni",
            ProcedureFlag::Holm => "holm",
            ProcedureFlag::FixedSeq => "fixed-seq",
            ProcedureFlag::Sgt => "sgt",
            ProcedureFlag::SplitFixedSeq => "split-fixed-seq",
            ProcedureFlag::Cascade2d => "cascade-2d",
            ProcedureFlag::Uniform => "uniform",
        }
    }
}

#[derive(Parser)]
struct CalibrateArgs {
    /// Loss CSV (header `# n=.. N=.. m=.. bounded=..`).
    #[arg(long)]
    loss: PathBuf,
    /// Parameter grid JSON.
    #[arg(long)]
    grid: PathBuf,
    /// Comma-separated risk levels, one per controlled risk.
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    delta: f64,
    #[arg(long, value_enum, default_value = "hb")]
    pvalue: PValueFlag,
    #[arg(long, value_enum)]
    procedure: ProcedureFlag,
    /// Comma-separated start indices for fixed-seq.
    #[arg(long)]
    starts: Option<String>,
    /// Test graph JSON for sgt.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Fraction of examples used to learn the split-fixed-seq ordering.
    #[arg(long, default_value_t = 0.5)]
    split_frac: f64,
    /// Number of ordering steps for split-fixed-seq.
    #[arg(long, default_value_t = 10)]
    split_d: usize,
    /// Concentration offset eta for the uniform procedure (0 = optimize).
    #[arg(long)]
    eta: Option<f64>,
    /// Selection preset applied to the certified set.
    #[arg(long, default_value = "sup")]
    selection: String,
    /// Include the combined p-value vector in the report.
    #[arg(long)]
    emit_pvalues: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Parser)]
struct SimulateArgs {
    /// Number of examples.
    #[arg(long, default_value_t = 5000)]
    n: usize,
    /// Number of grid points.
    #[arg(long = "N", default_value_t = 1000)]
    grid_points: usize,
    #[arg(long, default_value_t = 0.9)]
    corr: f64,
    #[arg(long, env = "RISKCAL_SEED", default_value_t = 0)]
    seed: u64,
    /// V-shaped risk curve as `r_end,r_min`.
    #[arg(long)]
    v_shape: Option<String>,
    /// JSON array of explicit per-grid-point risks.
    #[arg(long)]
    risk_curve: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Parser)]
struct BenchArgs {
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long = "N", default_value_t = 1000)]
    grid_points: usize,
    #[arg(long, default_value_t = 0.9)]
    corr: f64,
    #[arg(long, env = "RISKCAL_SEED", default_value_t = 0)]
    seed: u64,
    /// V-shaped risk curve as `r_end,r_min`.
    #[arg(long, default_value = "0.18,0.14")]
    v_shape: String,
    #[arg(long, default_value = "0.1,0.15,0.2")]
    alphas: String,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Comma-separated subset of
    /// empirical-baseline,fixed-sequence,bonferroni,uniform.
    #[arg(long, default_value = "empirical-baseline,fixed-sequence,bonferroni,uniform")]
    methods: String,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Also write a self-contained SVG plot here.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    let run = || match cli.command {
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bench(args) => cmd_bench(args),
    };
    let result = match threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(k).build();
            match pool {
                Ok(pool) => pool.install(run),
                Err(e) => Err(CliError::input(format!("thread pool: {e}"))),
            }
        }
        None => run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn parse_f64_list(text: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::input(format!("{flag}: cannot parse '{part}' as a number")))
        })
        .collect()
}

fn parse_usize_list(text: &str, flag: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim().parse::<usize>().map_err(|_| {
                CliError::input(format!("{flag}: cannot parse '{part}' as an index"))
            })
        })
        .collect()
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let loss = LossTensor::load(&args.loss)?;
    let grid = ParameterGrid::from_json(&read_file(&args.grid)?)?;
    loss.check_grid(&grid)?;
    let alphas = parse_f64_list(&args.alpha, "--alpha")?;
    let spec = RiskSpec::new(alphas.clone(), args.delta)?;
    let method = match args.pvalue {
        PValueFlag::Hb => PValueMethod::Hb,
        PValueFlag::Clt => PValueMethod::Clt,
    };

    let mut emitted_pvalues = None;
    let rejection = match args.procedure {
        ProcedureFlag::Uniform => {
            if loss.n_risks() != 1 || alphas.len() != 1 {
                return Err(CliError::input(
                    "the uniform procedure supports a single risk",
                ));
            }
            let mut config = UniformBoundConfig::new(
                args.eta.unwrap_or(0.0),
                Growth::Linear { m: 1 },
            )?;
            if let Some(eta) = args.eta {
                config.eta = eta;
            }
            let smallest = calibrate_uniform(loss.slice(0), alphas[0], args.delta, &config)?;
            let rejected = match smallest {
                Some(j) => (j..grid.len()).collect(),
                None => Vec::new(),
            };
            RejectionSet {
                procedure: "uniform".into(),
                delta: args.delta,
                rejected,
                log: Vec::new(),
            }
        }
        ProcedureFlag::SplitFixedSeq => {
            let n = loss.n_examples();
            let at = ((n as f64) * args.split_frac).floor() as usize;
            if at == 0 || at >= n {
                return Err(CliError::input("--split-frac leaves an empty half"));
            }
            let (first, second) = loss.split_rows(at)?;
            let p_graph = pvalues_from_tensor(&first, &spec, method)?;
            let p_test = combine_max(&pvalues_from_tensor(&second, &spec, method)?);
            if args.emit_pvalues {
                emitted_pvalues = Some(p_test.values.clone());
            }
            let (_, set) = split_fixed_sequence(&p_graph, &p_test, args.split_d, args.delta)?;
            set
        }
        _ => {
            let p = combine_max(&pvalues_from_tensor(&loss, &spec, method)?);
            if args.emit_pvalues {
                emitted_pvalues = Some(p.values.clone());
            }
            match args.procedure {
                ProcedureFlag::Bonferroni => bonferroni(&p, args.delta)?,
                ProcedureFlag::Holm => holm(&p, args.delta)?,
                ProcedureFlag::FixedSeq => {
                    let starts = match &args.starts {
                        Some(text) => parse_usize_list(text, "--starts")?,
                        None => vec![0],
                    };
                    fixed_sequence(&p, args.delta, &starts)?
                }
                ProcedureFlag::Sgt => {
                    let path = args.graph.as_ref().ok_or_else(|| {
                        CliError::input("--procedure sgt requires --graph")
                    })?;
                    let graph = TestGraph::from_json(&read_file(path)?)?;
                    if (graph.delta() - args.delta).abs() > 1e-9 {
                        return Err(CliError::input(format!(
                            "graph budgets sum to {} but --delta is {}",
                            graph.delta(),
                            args.delta
                        )));
                    }
                    sgt(&p, &graph)?
                }
                ProcedureFlag::Cascade2d => {
                    let shape = grid.shape().ok_or_else(|| {
                        CliError::input("--procedure cascade-2d needs a grid with 2-D shape")
                    })?;
                    if shape.len() != 2 {
                        return Err(CliError::input(
                            "--procedure cascade-2d needs a grid with 2-D shape",
                        ));
                    }
                    cascaded_2d_fixed_sequence(&p, (shape[0], shape[1]), args.delta)?
                }
                _ => unreachable!(),
            }
        }
    };
    if rejection.replay() != rejection.rejected {
        return Err(CliError::internal("audit log does not replay to the certified set"));
    }

    if args.selection != "sup" {
        return Err(CliError::input(format!(
            "unknown selection preset '{}'",
            args.selection
        )));
    }
    let selected = match select_sup(&rejection, &grid, 0) {
        Ok(index) => Some(SelectedPoint {
            index,
            value: grid.value(index).to_vec(),
        }),
        Err(Error::NoParameterCertified) => None,
        Err(e) => return Err(e.into()),
    };
    let abstained = selected.is_none();

    let mut config = BTreeMap::new();
    config.insert("loss".into(), args.loss.display().to_string());
    config.insert("grid".into(), args.grid.display().to_string());
    config.insert("alpha".into(), args.alpha.clone());
    config.insert("delta".into(), format!("{}", args.delta));
    config.insert(
        "pvalue".into(),
        match args.pvalue {
            PValueFlag::Hb => "hb".into(),
            PValueFlag::Clt => "clt".into(),
        },
    );
    config.insert("procedure".into(), args.procedure.name().into());
    config.insert("selection".into(), args.selection.clone());
    if let Some(starts) = &args.starts {
        config.insert("starts".into(), starts.clone());
    }
    if let Some(graph) = &args.graph {
        config.insert("graph".into(), graph.display().to_string());
    }
    if args.procedure == ProcedureFlag::SplitFixedSeq {
        config.insert("split-frac".into(), format!("{}", args.split_frac));
        config.insert("split-d".into(), format!("{}", args.split_d));
    }
    if let Some(eta) = args.eta {
        config.insert("eta".into(), format!("{eta}"));
    }

    let report = CalibrationReport {
        version: riskcal::VERSION.to_string(),
        config,
        n_examples: loss.n_examples(),
        n_grid: grid.len(),
        empirical_risk: loss
            .empirical_risk()
            .into_iter()
            .map(|s| s.mean)
            .collect(),
        pvalues: emitted_pvalues,
        rejection,
        selected,
        abstained,
    };
    write_file(&args.out, &report.to_json())?;
    if abstained {
        println!("no parameter certified (abstained); report: {}", args.out.display());
    } else {
        let sel = report.selected.as_ref().expect("not abstained");
        println!(
            "certified {} grid points; selected index {}; report: {}",
            report.rejection.rejected.len(),
            sel.index,
            args.out.display()
        );
    }
    Ok(())
}

fn risk_curve_from_flags(
    v_shape: Option<&str>,
    risk_curve: Option<&Path>,
) -> Result<RiskCurve, CliError> {
    match (v_shape, risk_curve) {
        (Some(_), Some(_)) => Err(CliError::input(
            "--v-shape and --risk-curve are mutually exclusive",
        )),
        (Some(text), None) => {
            let parts = parse_f64_list(text, "--v-shape")?;
            if parts.len() != 2 {
                return Err(CliError::input("--v-shape expects 'r_end,r_min'"));
            }
            Ok(RiskCurve::VShape {
                r_end: parts[0],
                r_min: parts[1],
            })
        }
        (None, Some(path)) => {
            let risks: Vec<f64> = serde_json::from_str(&read_file(path)?)
                .map_err(|e| CliError::input(format!("--risk-curve: {e}")))?;
            Ok(RiskCurve::Explicit(risks))
        }
        (None, None) => Ok(RiskCurve::VShape {
            r_end: 0.25,
            r_min: 0.05,
        }),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let config = ARConfig {
        n_examples: args.n,
        n_grid: args.grid_points,
        corr: args.corr,
        risk_curve: risk_curve_from_flags(args.v_shape.as_deref(), args.risk_curve.as_deref())?,
        seed: args.seed,
    };
    let loss = simulate_ar(&config)?;
    let tensor = LossTensor::from_matrix(loss);
    write_file(&args.out, &tensor.to_csv())?;
    println!(
        "wrote {} examples x {} grid points to {}",
        args.n,
        args.grid_points,
        args.out.display()
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let config = ARConfig {
        n_examples: args.n,
        n_grid: args.grid_points,
        corr: args.corr,
        risk_curve: risk_curve_from_flags(Some(&args.v_shape), None)?,
        seed: args.seed,
    };
    let alphas = parse_f64_list(&args.alphas, "--alphas")?;
    let methods = args
        .methods
        .split(',')
        .map(|tag| BenchMethod::parse(tag.trim()).map_err(CliError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let report = run_benchmark_trials(&config, &alphas, args.delta, &methods, args.trials)?;
    write_file(&args.out, &benchmark_report_to_json(&report))?;
    if let Some(plot) = &args.plot {
        let risks = target_risks(&config)?;
        write_file(plot, &render_benchmark_svg(&report, &risks))?;
    }
    for (m_idx, method) in report.methods.iter().enumerate() {
        let cells: Vec<String> = report.endpoints[m_idx]
            .iter()
            .map(|e| match e {
                Some(v) => format!("{v:.3}"),
                None => "-".to_string(),
            })
            .collect();
        println!("{method}: {}", cells.join(" "));
    }
    Ok(())
}
