use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use a2ilu::mm::write_matrix_market;
use a2ilu::problems::ProblemSpec;
use a2ilu::{Method, Variant};
use a2ilu_bench::config::{OutputSettings, SolverSettings};
use a2ilu_bench::{
    emit_report, run_collection, run_sweep, Acceleration, CollectionConfig, FactorGrid,
    OutputFormat, Report, Result, RunConfig, RunRecord, Source,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "a2ilu-bench",
    version,
    about = "Auto-accelerated ILU benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated test matrix in Matrix Market format
    Generate {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Output .mtx path
        #[arg(long)]
        out: PathBuf,
        /// Also write the right-hand side, one value per line
        #[arg(long)]
        rhs: Option<PathBuf>,
    },
    /// Solve one system with one factorization, with and/or without acceleration
    Solve {
        /// Matrix Market file (b = A e); otherwise a generated problem is used
        #[arg(long, conflicts_with = "kind")]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        factor: FactorArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a parameter sweep described by a JSON or TOML file
    Sweep {
        /// Config file (.json or .toml)
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured output prefix
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Shifted ILU(0) with and without acceleration over a directory of .mtx files
    Collection {
        /// Directory of Matrix Market files
        #[arg(long)]
        dir: PathBuf,
        /// Comma-separated shifts
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5")]
        alphas: Vec<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Skip diagonal scaling
        #[arg(long)]
        no_scale: bool,
        /// Output prefix for CSV/JSON reports
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        format: OutputFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    PoissonJump,
    Helmholtz,
    AdvectionDiffusion,
}

#[derive(Args)]
struct ProblemArgs {
    /// Generated problem class
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Lattice points per axis
    #[arg(long, default_value_t = 20)]
    m: usize,
    /// Coefficient contrast of the jump problem
    #[arg(long, default_value_t = 1e3)]
    contrast: f64,
    /// Helmholtz shift
    #[arg(long, default_value_t = 0.0)]
    shift: f64,
    /// Advection velocity, comma-separated
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 0.0, 0.0])]
    velocity: Vec<f64>,
}

impl ProblemArgs {
    fn spec(&self) -> ProblemSpec {
        let m = self.m;
        match self.kind.unwrap_or(Kind::PoissonJump) {
            Kind::PoissonJump => ProblemSpec::PoissonJump {
                m,
                contrast: self.contrast,
            },
            Kind::Helmholtz => ProblemSpec::Helmholtz {
                m,
                shift: self.shift,
            },
            Kind::AdvectionDiffusion => ProblemSpec::AdvectionDiffusion {
                m,
                velocity: [self.velocity[0], self.velocity[1], self.velocity[2]],
            },
        }
    }
}

#[derive(Args)]
struct FactorArgs {
    /// ilu0, shifted_ilu0, milu0, level_ilu or crout_ilu
    #[arg(long, default_value = "ilu0")]
    variant: Variant,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Fill level
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Crout drop tolerance
    #[arg(long, default_value_t = 0.01)]
    tol: f64,
    /// Crout fill ratio; unlimited when omitted
    #[arg(long)]
    fill_m: Option<f64>,
}

impl FactorArgs {
    fn grid(&self) -> FactorGrid {
        match self.variant {
            Variant::Ilu0 => FactorGrid::Ilu0,
            Variant::ShiftedIlu0 => FactorGrid::ShiftedIlu0 {
                alpha: vec![self.alpha],
            },
            Variant::Milu0 => FactorGrid::Milu0 {
                omega: vec![self.omega],
            },
            Variant::LevelIlu => FactorGrid::LevelIlu { p: vec![self.p] },
            Variant::CroutIlu => FactorGrid::CroutIlu {
                tol: vec![self.tol],
                m: vec![self.fill_m],
            },
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// cg or bicgstab; chosen from the matrix symmetry when omitted
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Bound on ||r||^2 / ||b||^2
    #[arg(long, default_value_t = 1e-16)]
    epsilon: f64,
    #[arg(long)]
    max_iters: Option<usize>,
}

impl SolverArgs {
    fn settings(&self) -> SolverSettings {
        SolverSettings {
            method: self.method,
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            ..SolverSettings::default()
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "both")]
    accelerate: Acceleration,
    #[command(flatten)]
    solver: SolverArgs,
    /// Skip diagonal scaling
    #[arg(long)]
    no_scale: bool,
    /// Output prefix for CSV/JSON reports
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    format: OutputFormat,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s.to_ascii_lowercase().as_str() {
        "cg" => Ok(Method::Cg),
        "bicgstab" => Ok(Method::Bicgstab),
        _ => Err(format!("unknown method {s:?} (expected cg or bicgstab)")),
    }
}

fn print_records(records: &[RunRecord]) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{:<28} {:<13} {:>10} {:>5} {:>6} {:>8} {:>8} {:>12} {:>12}  {}",
        "matrix", "variant", "param", "acc", "iters", "phi", "gamma", "f(1,1)", "f", "class"
    );
    for r in records {
        let param = r
            .alpha
            .or(r.omega)
            .or(r.tol)
            .map(|v| format!("{v}"))
            .or(r.level_p.map(|p| p.to_string()))
            .unwrap_or_default();
        let num =
            |x: Option<f64>, w: usize| x.map_or(format!("{:>w$}", "-"), |v| format!("{v:>w$.4}"));
        let sci = |x: Option<f64>| x.map_or(format!("{:>12}", "-"), |v| format!("{v:>12.4e}"));
        let _ = writeln!(
            out,
            "{:<28} {:<13} {:>10} {:>5} {:>6} {} {} {} {}  {}{}",
            r.matrix,
            r.variant.as_str(),
            param,
            if r.accelerated { "yes" } else { "no" },
            r.iterations,
            num(r.phi, 8),
            num(r.gamma, 8),
            sci(r.f_baseline),
            sci(r.f_final),
            r.convergence_class.as_str(),
            r.error
                .as_ref()
                .map(|e| format!(" ({e})"))
                .unwrap_or_default()
        );
    }
}

fn emit(report: &Report, out: Option<&PathBuf>, format: OutputFormat) -> Result<()> {
    if let Some(prefix) = out {
        for p in emit_report(report, prefix, format)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { problem, out, rhs } => {
            let (a, b) = problem.spec().generate()?;
            write_matrix_market(&out, &a)?;
            if let Some(path) = rhs {
                let text: String = b.iter().map(|v| format!("{v:e}\n")).collect();
                std::fs::write(&path, text).map_err(|e| a2ilu_bench::BenchError::io(&path, e))?;
            }
            eprintln!("wrote {} (n = {}, nnz = {})", out.display(), a.n(), a.nnz());
        }
        Command::Solve {
            matrix,
            problem,
            factor,
            run,
        } => {
            let source = match matrix {
                Some(p) => Source::File(p),
                None => Source::Generator(problem.spec()),
            };
            let mut cfg = RunConfig::new(source, vec![factor.grid()]);
            cfg.acceleration = run.accelerate;
            cfg.solver = run.solver.settings();
            cfg.scaling = !run.no_scale;
            cfg.output = OutputSettings {
                path: run.out.clone(),
                format: run.format,
            };
            let records = run_sweep(&cfg)?;
            print_records(&records);
            emit(&Report::sweep(records), run.out.as_ref(), run.format)?;
        }
        Command::Sweep {
            config,
            out,
            format,
        } => {
            let cfg = RunConfig::load(&config)?;
            let records = run_sweep(&cfg)?;
            print_records(&records);
            let out = out.or(cfg.output.path.clone());
            emit(
                &Report::sweep(records),
                out.as_ref(),
                format.unwrap_or(cfg.output.format),
            )?;
        }
        Command::Collection {
            dir,
            alphas,
            solver,
            no_scale,
            out,
            format,
        } => {
            let cfg = CollectionConfig {
                alphas,
                solver: solver.settings(),
                scaling: !no_scale,
                ..CollectionConfig::default()
            };
            let report = run_collection(&dir, &cfg)?;
            println!(
                "{} matrices, {} skipped",
                report.matrices.len(),
                report.skipped.len()
            );
            for s in &report.skipped {
                println!("  skipped {}: {}", s.file, s.reason);
            }
            println!(
                "{:>6} | {:>5} {:>6} {:>5} | {:>5} {:>6} {:>5} | {:>5} {:>6} {:>5} {:>6} {:>5}",
                "alpha",
                "conv",
                "pseudo",
                "not",
                "conv",
                "pseudo",
                "not",
                "<-50",
                "-50..0",
                "same",
                "0..50",
                ">50"
            );
            for t in &report.tallies {
                let (i, a, h) = (t.shifted_ilu, t.shifted_a2ilu, t.increase_ratio);
                println!(
                    "{:>6.2} | {:>5} {:>6} {:>5} | {:>5} {:>6} {:>5} | {:>5} {:>6} {:>5} {:>6} {:>5}",
                    t.alpha,
                    i.convergent,
                    i.pseudo_convergent,
                    i.not_convergent,
                    a.convergent,
                    a.pseudo_convergent,
                    a.not_convergent,
                    h.below_minus_50,
                    h.minus_50_to_0,
                    h.no_change,
                    h.zero_to_plus_50,
                    h.above_plus_50
                );
            }
            emit(&Report::collection(report), out.as_ref(), format)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
