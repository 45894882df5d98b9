use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use awh_vlasov::config::ConfigFile;
use awh_vlasov::driver::{run, PreconditionerKind, RunSummary};
use awh_vlasov::scenarios::expansion_demo;
use awh_vlasov::studies::{convergence_study, fit_slope, run_mms, MmsCase};
use awh_vlasov::Result;

#[derive(Parser)]
#[command(name = "awh-vlasov", version, about = "Adaptive Hermite/Fourier Vlasov-Poisson solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a configuration file.
    Run {
        config: PathBuf,
        /// Override a configuration key, e.g. `--set nv=50`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Manufactured-solution test cases.
    Mms(MmsArgs),
    /// Two-stream instability with the standard parameters.
    TwoStream(TwoStreamArgs),
    /// Expand a shifted Gaussian in a fixed Hermite basis and report the error.
    ExpansionDemo {
        #[arg(long)]
        u0: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha0: f64,
        #[arg(long, default_value_t = 30)]
        modes: usize,
        /// Write `v,exact,approx` columns here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Time-step convergence of manufactured case 1.
    Convergence {
        #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = vec![1e-1, 1e-2, 1e-3])]
        dt_list: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        nv: usize,
        #[arg(long, default_value_t = 1.0)]
        t_final: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MmsCaseId {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    /// Tolerance study on the tanh profile.
    Tol,
}

#[derive(Args)]
struct MmsArgs {
    #[arg(long, value_enum)]
    case: MmsCaseId,
    #[arg(long)]
    nv: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Tolerances for the tolerance study.
    #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = vec![1e-1, 5e-2, 1e-2])]
    alpha_tols: Vec<f64>,
    /// Steps between error samples.
    #[arg(long, default_value_t = 10)]
    every: usize,
}

#[derive(Args)]
struct TwoStreamArgs {
    #[arg(long, conflicts_with = "fixed")]
    adaptive: bool,
    #[arg(long)]
    fixed: bool,
    #[arg(long, default_value_t = 100)]
    nv: usize,
    #[arg(long, default_value_t = 50)]
    nx: usize,
    #[arg(long, default_value_t = 5.0)]
    nu: f64,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    #[arg(long, default_value_t = 50.0)]
    t_final: f64,
    #[arg(long, value_enum, default_value_t = Precond::Streaming)]
    preconditioner: Precond,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precond {
    None,
    Streaming,
}

fn print_summary(s: &RunSummary) {
    let last = s.records.last().expect("initial record always present");
    println!("steps        {}", s.steps);
    println!("final time   {:.6}", s.final_time);
    println!("newton its   {}", s.newton_iterations);
    println!("gmres its    {}", s.gmres_iterations);
    println!("adaptations  {}", s.adaptations.len());
    println!("mass err     {:.3e}", s.records.iter().map(|r| r.mass_err).fold(0.0, f64::max));
    println!("momentum err {:.3e}", s.records.iter().map(|r| r.momentum_err).fold(0.0, f64::max));
    println!("energy err   {:.3e}", s.records.iter().map(|r| r.energy_err).fold(0.0, f64::max));
    println!("f_min        {:.6e}", last.f_min);
    println!("f_max        {:.6e}", last.f_max);
    for (i, sp) in last.species.iter().enumerate() {
        println!("species {i}    alpha={:.6} u={:.6}", sp.alpha, sp.u);
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, overrides, output } => {
            let mut file = ConfigFile::load(&config, &overrides)?;
            if output.is_some() {
                file.output_dir = output;
            }
            let summary = run(&file.into_run_config()?)?;
            print_summary(&summary);
        }
        Command::TwoStream(a) => {
            let file = ConfigFile {
                nv: a.nv,
                nx: a.nx,
                nu: a.nu,
                dt: a.dt,
                t_final: a.t_final,
                adaptive: !a.fixed,
                preconditioner: match a.preconditioner {
                    Precond::None => PreconditionerKind::None,
                    Precond::Streaming => PreconditionerKind::Streaming,
                },
                output_dir: a.output,
                ..ConfigFile::default()
            };
            let summary = run(&file.into_run_config()?)?;
            print_summary(&summary);
        }
        Command::Mms(a) => {
            let tweak = |mut c: MmsCase| {
                c.nv = a.nv.unwrap_or(c.nv);
                c.dt = a.dt.unwrap_or(c.dt);
                c.t_final = a.t_final.unwrap_or(c.t_final);
                c
            };
            let cases: Vec<(String, MmsCase)> = match a.case {
                MmsCaseId::One => vec![("case1".into(), tweak(MmsCase::case1()))],
                MmsCaseId::Two => vec![("case2".into(), tweak(MmsCase::case2()))],
                MmsCaseId::Three => vec![("case3".into(), tweak(MmsCase::case3()))],
                MmsCaseId::Tol => a.alpha_tols.iter().map(|&t| (format!("tol={t:e}"), tweak(MmsCase::tanh(t)))).collect(),
            };
            let mut out = std::io::stdout().lock();
            writeln!(out, "run,t,alpha,u,beta,w,error")?;
            for (name, case) in cases {
                let res = run_mms(&case, a.every)?;
                for s in res.samples.iter().filter(|s| s.error.is_some()) {
                    writeln!(
                        out,
                        "{name},{:.6},{:.10},{:.10},{:.10},{:.10},{:.6e}",
                        s.t,
                        s.alpha,
                        s.u,
                        s.beta,
                        s.w,
                        s.error.unwrap()
                    )?;
                }
            }
        }
        Command::ExpansionDemo { u0, alpha0, modes, output } => {
            let r = expansion_demo(u0, alpha0, modes, -2.0, 5.0, 2000)?;
            println!("u0={u0} alpha0={alpha0} modes={modes} relative_error={:.6e}", r.relative_error);
            if let Some(p) = output {
                let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
                writeln!(f, "v,exact,approx")?;
                for ((v, e), a) in r.v.iter().zip(&r.exact).zip(&r.approx) {
                    writeln!(f, "{v:.16e},{e:.16e},{a:.16e}")?;
                }
            }
        }
        Command::Convergence { dt_list, nv, t_final } => {
            let base = MmsCase { nv, t_final, ..MmsCase::case1() };
            let pts = convergence_study(&base, &dt_list)?;
            println!("dt,error");
            for p in &pts {
                println!("{:.6e},{:.6e}", p.dt, p.error);
            }
            if pts.len() >= 2 {
                println!("# slope {:.4}", fit_slope(&pts)?);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
