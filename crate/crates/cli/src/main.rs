use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ccc_cli::{
    load_graph, model_for, parse_real, read_file, run_experiment, write_file, Algorithm, CliError,
    ExperimentConfig, InstanceSpec,
};
use ccc_core::analysis::{
    charge_sides, pattern_name, verify_charging, verify_triangle_inequality, TrianglePoint,
};
use ccc_core::exact::{all_optimal, optimal_cost};
use ccc_core::generate::generate;
use ccc_core::io::{
    parse_distribution, parse_standard, write_clustering, write_distribution, write_graph,
    write_standard,
};
use ccc_core::precluster::{precluster_report, DEFAULT_BETA, DEFAULT_EPSILON};
use ccc_core::relax::{
    build_cluster_lp_capped, build_standard_lp, solve_cluster_capped, solve_standard,
    ClusterDistribution, StandardSolution, CLUSTER_LP_CAP,
};
use ccc_core::rng::RngStream;
use ccc_core::rounding::{
    estimate_cluster_cost, estimate_cost_of, estimate_expected_cost, round_cluster_based,
    round_mixed, round_pivot_based, RoundingFunctions,
};
use ccc_core::ALPHA_18_11;

#[derive(Parser)]
#[command(
    name = "ccc",
    version,
    about = "Chromatic correlation clustering toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the machine-readable result here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a planted-partition instance.
    Gen {
        /// Number of vertices, split into --clusters nearly equal parts.
        #[arg(long, required_unless_present = "sizes")]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        clusters: usize,
        /// Explicit cluster sizes, e.g. 3,3,2.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["n", "clusters"])]
        sizes: Option<Vec<usize>>,
        #[arg(long, short = 'L', default_value_t = 2)]
        colors: usize,
        #[arg(long, default_value_t = 0.0)]
        noise_in: f64,
        #[arg(long, default_value_t = 0.0)]
        noise_out: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the planted clustering as JSON.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Optimal clustering by exhaustive search.
    Exact {
        graph: PathBuf,
        /// Report how many optimal clusterings exist.
        #[arg(long)]
        count: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Solve an LP relaxation.
    Lp {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Relaxation::Standard)]
        relaxation: Relaxation,
        /// Largest n accepted by the cluster LP.
        #[arg(long, default_value_t = CLUSTER_LP_CAP)]
        cap: usize,
        /// Also write the LP in CPLEX LP format.
        #[arg(long)]
        export_lp: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Estimate the expected cost of a rounding algorithm; --out receives
    /// the clustering drawn by the first trial.
    Round {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Algorithm::Mixed)]
        algorithm: Algorithm,
        /// Decimal or fraction, e.g. 18/11.
        #[arg(long, default_value_t = ALPHA_18_11, value_parser = parse_real)]
        alpha: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// LP rounded by the pivot algorithm when no --solution is given.
        #[arg(long, value_enum, default_value_t = PivotLp::Standard)]
        relaxation: PivotLp,
        /// Precomputed LP solution (cluster distribution for cluster/mixed,
        /// standard solution for pivot).
        #[arg(long)]
        solution: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Seed clustering, atoms and admissible edges, checked against the optimum.
    Precluster {
        graph: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BETA)]
        beta: f64,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Numerical sweeps of the rounding analysis; --out receives the
    /// violations and extreme points as CSV. Exits with 2 on violations.
    Verify {
        #[arg(value_enum)]
        what: Sweep,
        /// Decimal or fraction, e.g. 18/11.
        #[arg(long, default_value_t = ALPHA_18_11, value_parser = parse_real)]
        alpha: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Run a batch experiment and write a CSV report.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Omit the timestamp line and wall-time columns.
        #[arg(long)]
        reproducible: bool,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Relaxation {
    Standard,
    Strong,
    Cluster,
}

#[derive(Clone, Copy, ValueEnum)]
enum PivotLp {
    Standard,
    Strong,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    Triangles,
    Charging,
}

/// Prints to stdout; a closed pipe is not an error.
fn say(text: &str) -> Result<(), CliError> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r.map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

/// Writes `doc` to `--out` and `summary` to stdout, or both to stdout.
fn emit(output: &Output, summary: &str, doc: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => {
            write_file(path, doc)?;
            say(summary)?;
        }
        None => {
            say(summary)?;
            say(doc)?;
        }
    }
    Ok(())
}

fn cmd_gen(spec: InstanceSpec, truth: Option<&Path>, output: &Output) -> Result<(), CliError> {
    let model = model_for(&spec, spec.seed)?;
    let phi = generate(&model)?;
    if let Some(path) = truth {
        write_file(path, &write_clustering(&phi, &model.planted()?)?)?;
    }
    emit(output, "", &write_graph(&phi))
}

fn cmd_exact(graph: &Path, count: bool, output: &Output) -> Result<(), CliError> {
    let phi = load_graph(graph)?;
    let (opt, witness) = optimal_cost(&phi)?;
    let mut summary = format!("opt: {opt}\n");
    if count {
        let _ = writeln!(summary, "optima: {}", all_optimal(&phi)?.len());
    }
    emit(output, &summary, &write_clustering(&phi, &witness)?)
}

fn cmd_lp(
    graph: &Path,
    relaxation: Relaxation,
    cap: usize,
    export: Option<&Path>,
    output: &Output,
) -> Result<(), CliError> {
    let phi = load_graph(graph)?;
    if let Some(path) = export {
        let lp = match relaxation {
            Relaxation::Standard => build_standard_lp(&phi, false)?,
            Relaxation::Strong => build_standard_lp(&phi, true)?,
            Relaxation::Cluster => build_cluster_lp_capped(&phi, cap)?,
        };
        write_file(path, &lp.to_lp_format())?;
    }
    let (value, doc) = match relaxation {
        Relaxation::Standard | Relaxation::Strong => {
            let (v, sol) = solve_standard(&phi, matches!(relaxation, Relaxation::Strong))?;
            (v, write_standard(&sol, Some(v)))
        }
        Relaxation::Cluster => {
            let (v, dist) = solve_cluster_capped(&phi, cap)?;
            (v, write_distribution(&dist, Some(v)))
        }
    };
    emit(output, &format!("value: {value}\n"), &doc)
}

enum Rounded {
    Cluster(ClusterDistribution),
    Pivot(StandardSolution),
}

struct RoundArgs {
    algorithm: Algorithm,
    alpha: f64,
    trials: usize,
    seed: u64,
    relaxation: PivotLp,
    solution: Option<PathBuf>,
}

fn cmd_round(graph: &Path, args: RoundArgs, output: &Output) -> Result<(), CliError> {
    let phi = load_graph(graph)?;
    let input_err = |path: &Path, source| CliError::Input {
        path: path.to_path_buf(),
        source,
    };
    let (lp_value, input) = match (&args.solution, args.algorithm) {
        (Some(path), Algorithm::Pivot) => {
            let sol = parse_standard(&read_file(path)?).map_err(|e| input_err(path, e))?;
            (None, Rounded::Pivot(sol))
        }
        (Some(path), _) => {
            let dist = parse_distribution(&read_file(path)?).map_err(|e| input_err(path, e))?;
            (None, Rounded::Cluster(dist))
        }
        (None, Algorithm::Pivot) => {
            let (v, sol) = solve_standard(&phi, matches!(args.relaxation, PivotLp::Strong))?;
            (Some(v), Rounded::Pivot(sol))
        }
        (None, _) => {
            let (v, dist) = solve_cluster_capped(&phi, CLUSTER_LP_CAP)?;
            (Some(v), Rounded::Cluster(dist))
        }
    };
    let f = RoundingFunctions::greedy();
    let (est, first) = match (&input, args.algorithm) {
        (Rounded::Pivot(sol), _) => {
            let first =
                round_pivot_based(&phi, sol, &f, &mut RngStream::with_stream(args.seed, 0))?;
            let est = estimate_cost_of(&phi, args.trials, args.seed, |rng| {
                round_pivot_based(&phi, sol, &f, rng).expect("validated by the first trial")
            })?;
            (est, first)
        }
        (Rounded::Cluster(dist), Algorithm::Cluster) => {
            let first = round_cluster_based(&phi, dist, &mut RngStream::with_stream(args.seed, 0))?;
            (
                estimate_cluster_cost(&phi, dist, args.trials, args.seed)?,
                first,
            )
        }
        (Rounded::Cluster(dist), _) => {
            let first = round_mixed(
                &phi,
                dist,
                args.alpha,
                &f,
                &mut RngStream::with_stream(args.seed, 0),
            )?;
            (
                estimate_expected_cost(&phi, dist, args.alpha, &f, args.trials, args.seed)?,
                first,
            )
        }
    };
    let mut summary = format!("algorithm: {}\n", args.algorithm.name());
    if let Some(v) = lp_value {
        let _ = writeln!(summary, "lp: {v}");
    }
    let _ = writeln!(
        summary,
        "trials: {}\nseed: {}\nmean: {}",
        est.trials, args.seed, est.mean
    );
    if let Some(se) = est.stderr {
        let _ = writeln!(summary, "stderr: {se}");
    }
    if let Some(path) = &output.out {
        write_file(path, &write_clustering(&phi, &first)?)?;
    }
    say(&summary)
}

fn cmd_precluster(
    graph: &Path,
    beta: f64,
    epsilon: f64,
    seed: u64,
    output: &Output,
) -> Result<(), CliError> {
    let phi = load_graph(graph)?;
    let report = precluster_report(&phi, epsilon, beta, &mut RngStream::new(seed))?;
    let mut doc = serde_json::to_string_pretty(&report).expect("report serializes");
    doc.push('\n');
    emit(output, "", &doc)
}

fn triangle_row(w: &mut csv::Writer<Vec<u8>>, p: &TrianglePoint) -> Result<(), CliError> {
    w.write_record([
        pattern_name(&p.signs),
        p.xs[0].to_string(),
        p.xs[1].to_string(),
        p.xs[2].to_string(),
        p.alg.to_string(),
        p.lp.to_string(),
        p.gap().to_string(),
    ])?;
    Ok(())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
}

/// Returns the number of violations.
fn cmd_verify(what: Sweep, alpha: f64, step: f64, output: &Output) -> Result<usize, CliError> {
    let mut w = csv_writer();
    let mut summary = String::new();
    let violations = match what {
        Sweep::Triangles => {
            let r = verify_triangle_inequality(alpha, step)?;
            w.write_record(["signs", "x", "y", "z", "alg", "lp", "gap"])?;
            for p in r.violations.iter().chain(&r.tight_points) {
                triangle_row(&mut w, p)?;
            }
            let _ = writeln!(summary, "alpha: {alpha}\nstep: {step}");
            let _ = writeln!(
                summary,
                "points: {} (+{} perturbed)",
                r.points_checked, r.perturbed_checked
            );
            for s in &r.patterns {
                let [x, y, z] = s.argmin;
                let _ = writeln!(
                    summary,
                    "{}: min gap {:e} at ({x}, {y}, {z})",
                    pattern_name(&s.signs),
                    s.min_gap
                );
            }
            let _ = writeln!(summary, "tight points: {}", r.tight_points.len());
            let _ = writeln!(summary, "violations: {}", r.violations.len());
            r.violations.len()
        }
        Sweep::Charging => {
            let r = verify_charging(alpha, step)?;
            w.write_record(["case", "s1", "s2", "s3", "lhs", "rhs", "gap"])?;
            let _ = writeln!(summary, "alpha: {alpha}\nstep: {step}");
            for c in &r.cases {
                let extreme = charge_sides(c.case, &c.argmin, alpha)?;
                let rows = c
                    .violations
                    .iter()
                    .map(|p| (p.scalars.clone(), p.lhs, p.rhs))
                    .chain([(c.argmin.clone(), extreme.0, extreme.1)]);
                for (scalars, lhs, rhs) in rows {
                    let mut rec = vec![c.case.name().to_string()];
                    rec.extend(
                        (0..3).map(|i| scalars.get(i).map(f64::to_string).unwrap_or_default()),
                    );
                    rec.extend([lhs, rhs, rhs - lhs].map(|v| v.to_string()));
                    w.write_record(&rec)?;
                }
                let _ = writeln!(
                    summary,
                    "{}: {} points, min gap {:e} at {:?}",
                    c.case.name(),
                    c.points_checked,
                    c.min_gap,
                    c.argmin
                );
            }
            let _ = writeln!(summary, "violations: {}", r.total_violations());
            r.total_violations()
        }
    };
    let csv = finish_csv(w)?;
    say(&summary)?;
    if let Some(path) = &output.out {
        write_file(path, &csv)?;
    }
    Ok(violations)
}

fn cmd_experiment(config: &Path, reproducible: bool, output: &Output) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config)?;
    let csv = run_experiment(&cfg, reproducible)?;
    match output.out.as_ref().or(cfg.output.as_ref()) {
        Some(path) => write_file(path, &csv),
        None => say(&csv),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Gen {
            n,
            clusters,
            sizes,
            colors,
            noise_in,
            noise_out,
            seed,
            truth,
            output,
        } => {
            let spec = InstanceSpec {
                name: None,
                file: None,
                n,
                colors: Some(colors),
                clusters: Some(clusters),
                sizes,
                noise_in,
                noise_out,
                seed,
                count: 1,
            };
            cmd_gen(spec, truth.as_deref(), &output)?;
        }
        Command::Exact {
            graph,
            count,
            output,
        } => cmd_exact(&graph, count, &output)?,
        Command::Lp {
            graph,
            relaxation,
            cap,
            export_lp,
            output,
        } => cmd_lp(&graph, relaxation, cap, export_lp.as_deref(), &output)?,
        Command::Round {
            graph,
            algorithm,
            alpha,
            trials,
            seed,
            relaxation,
            solution,
            output,
        } => {
            let args = RoundArgs {
                algorithm,
                alpha,
                trials,
                seed,
                relaxation,
                solution,
            };
            cmd_round(&graph, args, &output)?;
        }
        Command::Precluster {
            graph,
            beta,
            epsilon,
            seed,
            output,
        } => cmd_precluster(&graph, beta, epsilon, seed, &output)?,
        Command::Verify {
            what,
            alpha,
            step,
            output,
        } => {
            if cmd_verify(what, alpha, step, &output)? > 0 {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Experiment {
            config,
            reproducible,
            output,
        } => cmd_experiment(&config, reproducible, &output)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
