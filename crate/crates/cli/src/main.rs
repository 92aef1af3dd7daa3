use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sgdg::experiments::config::CONFIG_KEYS;
use sgdg::experiments::table::{
    profile_path, profile_to_csv, table_to_csv, table_to_json, write_file, ConvergenceRow,
};
use sgdg::experiments::{convergence_study_with, registry, run, OutputFormat, RefinementMode, RunConfig};
use sgdg::Error;

fn keys_help() -> String {
    let mut s = String::from("Config keys (file lines `key = value`, or --set key=value):\n");
    for (k, d) in CONFIG_KEYS {
        s.push_str(&format!("  {k:<22} {d}\n"));
    }
    s
}

#[derive(Parser, Debug)]
#[command(name = "sgdg", version, about = "Stochastic Galerkin DG solver with a posteriori error estimates", after_help = keys_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    #[value(name = "h_refine")]
    HRefine,
    #[value(name = "N_refine")]
    NRefine,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Config file with `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Test case (see `list-cases`)
    #[arg(long)]
    case: Option<String>,
    /// Chaos degree
    #[arg(long = "N")]
    chaos_degree: Option<usize>,
    /// DG polynomial degree
    #[arg(long = "p")]
    dg_degree: Option<usize>,
    /// Output file; the residual profile goes next to it as `<stem>_profile.csv`
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Any config key, repeatable: --set M=64 --set limiter=true
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single run; prints one table row
    Run(Common),
    /// Refinement study
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Registered test cases and their defaults
    ListCases,
}

fn build_config(c: &Common) -> Result<RunConfig, Error> {
    let text = match &c.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?,
        None => String::new(),
    };
    let default_case = c.case.as_deref().or(if c.config.is_none() { Some("advection") } else { None });
    let mut cfg = RunConfig::from_config_str(&text, default_case)?;
    if let Some(case) = &c.case {
        cfg.set("case", case)?;
    }
    for kv in &c.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k, v)?;
    }
    if let Some(n) = c.chaos_degree {
        cfg.chaos_degree = n;
    }
    if let Some(p) = c.dg_degree {
        cfg.dg_degree = p;
    }
    if let Some(out) = &c.out {
        cfg.out = Some(out.clone());
    }
    if let Some(f) = c.format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    Ok(cfg)
}

fn encode(rows: &[ConvergenceRow], format: OutputFormat) -> Result<String, Error> {
    match format {
        OutputFormat::Csv => table_to_csv(rows),
        OutputFormat::Json => table_to_json(rows),
    }
}

fn emit(rows: &[ConvergenceRow], cfg: &RunConfig) -> Result<(), Error> {
    let text = encode(rows, cfg.format)?;
    match &cfg.out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_profile(profile: &sgdg::estimator::ResidualProfile, out: Option<&Path>) -> Result<(), Error> {
    if let Some(out) = out {
        write_file(&profile_path(out), &profile_to_csv(profile)?)?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::ListCases => {
            for case in registry() {
                let d = case.defaults;
                println!(
                    "{:<26} T={} M={} dt={} N={} p={} flux={} limiter={} start={} projection={} scheme={}",
                    case.name,
                    case.t_end,
                    d.elements,
                    d.dt,
                    d.chaos_degree,
                    d.dg_degree,
                    d.flux,
                    d.limiter,
                    d.reconstruction_start,
                    d.projection,
                    d.scheme
                );
                println!("{:<26} {}", "", case.description);
            }
            Ok(())
        }
        Command::Run(common) => {
            let cfg = build_config(&common)?;
            let out = run(&cfg)?;
            for w in &out.residuals.warnings {
                eprintln!("warning: {w}");
            }
            emit(std::slice::from_ref(&out.row), &cfg)?;
            emit_profile(&out.residuals.profile, cfg.out.as_deref())
        }
        Command::Convergence { common, levels, mode } => {
            let mut cfg = build_config(&common)?;
            if let Some(l) = levels {
                cfg.levels = l;
            }
            if let Some(m) = mode {
                cfg.mode = match m {
                    Mode::HRefine => RefinementMode::HRefine,
                    Mode::NRefine => RefinementMode::NRefine,
                };
            }
            let mut partial: Vec<ConvergenceRow> = Vec::new();
            let mut last_profile = None;
            let result = convergence_study_with(&cfg, |out, rows| {
                eprintln!(
                    "level {} done: M = {}, N = {}, R_st = {:.3e}, R_stoch = {:.3e}, {:.1}s",
                    out.row.level, out.row.elements, out.row.chaos_degree, out.row.r_st, out.row.r_stoch, out.row.wall_time
                );
                partial = rows.to_vec();
                last_profile = Some(out.residuals.profile.clone());
            });
            match result {
                Ok(rows) => {
                    emit(&rows, &cfg)?;
                    if let Some(p) = &last_profile {
                        emit_profile(p, cfg.out.as_deref())?;
                    }
                    Ok(())
                }
                Err(e) => {
                    // flush what finished before failing
                    if !partial.is_empty() {
                        emit(&partial, &cfg)?;
                    }
                    Err(e)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
