use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::warn;

use fastlimit::barrier::{reaction_inequality_margin, run_barrier};
use fastlimit::lab::report::format_real;
use fastlimit::lab::{emit_csv, setup, stefan_experiment, sweep, Config, Table};
use fastlimit::par::{self, Execution};
use fastlimit::profile::{iota_residual, SelfSimilarProfile};
use fastlimit::reference::{heat_run, HeatSpec};
use fastlimit::solver::run;

#[derive(Debug, Parser)]
#[command(name = "fastlimit", version, about = "Fast-reaction limit experiments")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV output (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the reaction system and write the sampled trajectory.
    Simulate,
    /// Integrate the heat equation with the same grid, data and steps.
    Heat,
    /// Tabulate the self-similar limit profile.
    Profile {
        #[arg(long)]
        u0: f64,
        #[arg(long)]
        v0: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Sweep k against the heat limit.
    Sweep,
    /// Inflow problem against the free-boundary limit.
    Stefan,
    /// Build and check the annular subsolution.
    VerifyBarrier,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Ok(Config::load(p)?),
        None => Ok(Config::default()),
    }
}

fn write(table: &Table, dir: &Path, name: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    emit_csv(table, &path)?;
    Ok(path)
}

fn exec() -> Execution {
    Execution::Parallel
}

fn simulate(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let spec = setup::problem_from_config(cfg)?;
    let stride = setup::stride_from_config(cfg, spec.n_steps())?;
    cfg.finish()?;
    let traj = run(&spec, stride)?;
    let mut t = Table::new(["t", "x", "u", "v", "z"]);
    let x = spec.grid.positions();
    for (j, s) in traj.states.iter().enumerate() {
        let v = traj.v(j);
        for i in 0..x.len() {
            t.push_values(&[s.t, x[i], s.u.values()[i], v.values()[i], s.z.values()[i]]);
        }
    }
    Ok(vec![write(&t, out, "trajectory.csv")?])
}

fn heat(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let spec = HeatSpec::from_problem(&setup::problem_from_config(cfg)?);
    let stride = setup::stride_from_config(cfg, spec.as_problem().n_steps())?;
    cfg.finish()?;
    let traj = heat_run(&spec, stride)?;
    let mut t = Table::new(["t", "x", "u"]);
    let x = spec.grid.positions();
    for s in &traj.states {
        for i in 0..x.len() {
            t.push_values(&[s.t, x[i], s.u.values()[i]]);
        }
    }
    Ok(vec![write(&t, out, "heat.csv")?])
}

fn profile(u0: f64, v0: f64, samples: usize, out: &Path) -> Result<Vec<PathBuf>> {
    if samples < 2 {
        bail!("--samples must be at least 2");
    }
    let p = SelfSimilarProfile::new(u0, v0)?;
    let eta_max = 1.5 * p.iota();
    let mut t = Table::new(["eta", "f"]);
    for i in 0..samples {
        let eta = eta_max * i as f64 / (samples - 1) as f64;
        t.push_values(&[eta, p.eval(eta)?]);
    }
    let mut summary = Table::new(["u0", "v0", "iota", "residual"]);
    summary.push_values(&[u0, v0, p.iota(), iota_residual(p.iota(), u0, v0)]);
    println!("iota = {}", format_real(p.iota()));
    Ok(vec![
        write(&t, out, "profile.csv")?,
        write(&summary, out, "profile_summary.csv")?,
    ])
}

fn run_sweep(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let spec = setup::sweep_from_config(cfg, exec())?;
    cfg.finish()?;
    let report = sweep(&spec)?;
    if report.rows.is_empty() {
        bail!("every run of the sweep failed");
    }
    Ok(vec![
        write(&report.metrics_table(), out, "sweep_metrics.csv")?,
        write(&report.decay_table(), out, "sweep_decay.csv")?,
        write(&report.interface_table(), out, "sweep_interface.csv")?,
    ])
}

fn run_stefan(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let spec = setup::stefan_from_config(cfg, exec())?;
    cfg.finish()?;
    let report = stefan_experiment(&spec)?;
    if report.rows.is_empty() {
        bail!("every run of the experiment failed");
    }
    Ok(vec![
        write(&report.metrics_table(), out, "stefan_metrics.csv")?,
        write(&report.interface_table(), out, "stefan_interface.csv")?,
    ])
}

fn verify_barrier(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let (spec, run_cfg, [l1, l2]) = setup::barrier_from_config(cfg)?;
    cfg.finish()?;
    let outcome = run_barrier(&spec, &run_cfg)?;
    let margin = reaction_inequality_margin(&outcome.interval_traj, l1, l2, spec.m);
    let mut text = outcome.report.to_text();
    text += &format!(
        "reaction_lambda,{},{},{}\niota_star,{},,\ndelta,{},,\n",
        format_real(margin.value),
        format_real(margin.x),
        format_real(margin.t),
        format_real(outcome.choice.iota_star),
        format_real(outcome.choice.delta)
    );
    print!("{text}");
    let path = out.join("barrier_report.csv");
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(vec![path])
}

fn main_inner(cli: Cli) -> Result<Vec<PathBuf>> {
    if let Some(n) = cli.threads {
        par::set_threads(n)?;
    }
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let out = cli.out.as_path();
    if let Command::Profile { u0, v0, samples } = cli.command {
        if cli.config.is_some() {
            warn!("--config is ignored by `profile`");
        }
        return profile(u0, v0, samples, out);
    }
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate => simulate(&cfg, out),
        Command::Heat => heat(&cfg, out),
        Command::Sweep => run_sweep(&cfg, out),
        Command::Stefan => run_stefan(&cfg, out),
        Command::VerifyBarrier => verify_barrier(&cfg, out),
        Command::Profile { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
