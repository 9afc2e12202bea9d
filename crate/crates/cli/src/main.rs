use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sylvkit_core::report::{
    self, AnalyzeOptions, Backend, Deciders, Fault, InstanceFile, PencilChoice, ReportFile,
};
use sylvkit_core::suite::{run_suite, SuiteConfig};
use sylvkit_core::tolerance::Tolerances;
use sylvkit_core::Instance;

/// Decides solvability of AXB + CX⋆D = E and AXB − CXD = E and checks
/// every answer against the vectorized linear system.
#[derive(Debug, Parser)]
#[command(name = "sylvkit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Decide S, US, SR, OR and UR for an instance file.
    Analyze {
        input: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// As `analyze`, plus a solution X of the equation with its E.
    Solve {
        input: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Spectrum and structure of one pencil attached to the instance.
    Spectrum {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = PencilArg::Q)]
        pencil: PencilArg,
        #[command(flatten)]
        flags: Flags,
    },
    /// Seeded agreement run over both equations and both stars.
    Suite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_dim: usize,
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Where the first disagreeing instance is written.
        #[arg(long, default_value = "sylvkit-reproducer.json")]
        reproducer: PathBuf,
        /// Worker threads, 0 for one per core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Args)]
struct Flags {
    /// Absolute singular-value cut for rank decisions.
    #[arg(long, env = "SYLVKIT_TOL")]
    tol: Option<f64>,
    /// Chordal distance under which eigenvalues are merged.
    #[arg(long)]
    cluster_tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = BackendArg::Both)]
    backend: BackendArg,
    /// Swap in a known-wrong spectral decider to exercise the harness.
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Spectral,
    Oracle,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaultArg {
    StarSquareNegated,
    GsylvSrNegated,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "verbatim")]
enum PencilArg {
    Q,
    P1,
    P2,
    P3,
    P4,
    AC,
    DB,
}

impl From<PencilArg> for PencilChoice {
    fn from(p: PencilArg) -> Self {
        match p {
            PencilArg::Q => PencilChoice::Q,
            PencilArg::P1 => PencilChoice::P1,
            PencilArg::P2 => PencilChoice::P2,
            PencilArg::P3 => PencilChoice::P3,
            PencilArg::P4 => PencilChoice::P4,
            PencilArg::AC => PencilChoice::AC,
            PencilArg::DB => PencilChoice::DB,
        }
    }
}

impl Flags {
    fn options(&self) -> Result<AnalyzeOptions> {
        let mut tol = Tolerances::default().with_rank_tol(self.tol);
        if let Some(t) = self.tol {
            anyhow::ensure!(
                t.is_finite() && t >= 0.0,
                "--tol must be a finite nonnegative number"
            );
        }
        if let Some(c) = self.cluster_tol {
            anyhow::ensure!(
                c.is_finite() && c > 0.0,
                "--cluster-tol must be a finite positive number"
            );
            tol = tol.with_cluster_tol(c);
        }
        let backend = match self.backend {
            BackendArg::Spectral => Backend::Spectral,
            BackendArg::Oracle => Backend::Oracle,
            BackendArg::Both => Backend::Both,
        };
        let fault = self.inject_fault.map(|f| match f {
            FaultArg::StarSquareNegated => Fault::StarSquareNegated,
            FaultArg::GsylvSrNegated => Fault::GSylvSrNegated,
        });
        Ok(AnalyzeOptions {
            tol,
            backend,
            deciders: Deciders::with_fault(fault),
        })
    }
}

/// Exit status: decided and consistent, bad input, or backends disagree.
enum Outcome {
    Agreed,
    Disagreed,
}

fn load(path: &Path) -> Result<Instance> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let (_, inst) = InstanceFile::parse(&text).with_context(|| format!("{}", path.display()))?;
    Ok(inst)
}

/// A closed pipe downstream is not an error of ours.
fn print_stdout(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn emit(mut report: ReportFile, input: &Path) -> Outcome {
    report.input = Some(input.display().to_string());
    print_stdout(&report.to_json());
    if report.agreed() {
        Outcome::Agreed
    } else {
        for d in &report.disagreements {
            eprintln!("disagreement: {d}");
        }
        Outcome::Disagreed
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Cmd::Analyze { input, flags } => {
            let opts = flags.options()?;
            let inst = load(&input)?;
            Ok(emit(report::analyze(&inst, &opts), &input))
        }
        Cmd::Solve { input, flags } => {
            let opts = flags.options()?;
            let inst = load(&input)?;
            let rep =
                report::solve(&inst, &opts).with_context(|| format!("{}", input.display()))?;
            Ok(emit(rep, &input))
        }
        Cmd::Spectrum {
            input,
            pencil,
            flags,
        } => {
            let opts = flags.options()?;
            let inst = load(&input)?;
            let rep = report::spectrum(&inst, pencil.into(), &opts.tol)
                .with_context(|| format!("{}: pencil {pencil:?}", input.display()))?;
            Ok(emit(rep, &input))
        }
        Cmd::Suite {
            seed,
            max_dim,
            count,
            reproducer,
            threads,
            flags,
        } => {
            let mut cfg = SuiteConfig::new(seed, max_dim, count);
            cfg.options = flags.options()?;
            cfg.threads = threads;
            let mut out = run_suite(&cfg);
            if let Some(file) = &out.reproducer {
                std::fs::write(&reproducer, file.to_json())
                    .with_context(|| format!("cannot write {}", reproducer.display()))?;
                if let Some(s) = out.report.suite.as_mut() {
                    s.reproducer = Some(reproducer.display().to_string());
                }
            }
            let summary = out
                .report
                .suite
                .as_ref()
                .expect("suite runs fill the summary");
            eprintln!("{}", summary.headline());
            if let Some(f) = &summary.first_disagreement {
                eprintln!(
                    "first disagreement: instance {} ({}), reproducer at {}",
                    f.index,
                    f.category,
                    reproducer.display()
                );
            }
            print_stdout(&out.report.to_json());
            Ok(if out.all_agree() {
                Outcome::Agreed
            } else {
                Outcome::Disagreed
            })
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for disagreement
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Agreed) => ExitCode::SUCCESS,
        Ok(Outcome::Disagreed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
