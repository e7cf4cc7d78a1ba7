//! Command-line front end: `solve`, `dynamics`, `probe <name>`.
//!
//! Exit codes: 0 success, 1 configuration/input error, 2 partial results
//! (some stage, row or threshold failed), so sweeps stay scriptable.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::dynamics::{simulate_travelling_wave, DynParams};
use crate::error::{PwError, Result};
use crate::functionals::{potential_energy, EnergyReport};
use crate::io;
use crate::probes;
use crate::profile::Grid;
use crate::quadrature::QuadratureSpec;
use crate::solver::{continue_in_ell, WaveSolution};

#[derive(Debug, Parser)]
#[command(
    name = "periwave",
    about = "Solitary travelling waves of the 1D peridynamic equation: constrained minimization, verification, probes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the cutoff continuation and write per-stage profiles and reports.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides output.directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve a computed wave under the equation of motion and verify speed and shape.
    Dynamics {
        #[arg(long)]
        config: PathBuf,
        /// Path to a solution JSON written by `solve`.
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structural probes: energy-inequality, subadditivity, tails,
    /// tanh-asymptotics, dispersion, hypotheses.
    Probe {
        name: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> i32 {
    let code = match cli.command {
        Command::Solve { config, out } => cmd_solve(&config, out.as_deref()),
        Command::Dynamics {
            config,
            solution,
            out,
        } => cmd_dynamics(&config, &solution, out.as_deref()),
        Command::Probe { name, config, out } => cmd_probe(&name, &config, out.as_deref()),
    };
    match code {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn resolve_out(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    match out {
        Some(p) => Ok(p.to_path_buf()),
        None => Ok(PathBuf::from(cfg.output_directory()?)),
    }
}

fn write_stage_outputs(dir: &Path, sols: &[WaveSolution]) -> Result<()> {
    for sol in sols {
        io::write_solution(dir, &io::stage_stem(sol.ell), sol)?;
    }
    io::write_summary(&dir.join("summary.csv"), sols)?;
    Ok(())
}

pub fn cmd_solve(config: &Path, out: Option<&Path>) -> Result<i32> {
    let cfg = RunConfig::load(config)?;
    let pot = cfg.build_potential()?;
    let grid = cfg.build_grid()?;
    let quad = cfg.build_quadrature()?;
    let solver_cfg = cfg.build_solver()?;
    let dir = resolve_out(&cfg, out)?;
    std::fs::create_dir_all(&dir)?;

    match continue_in_ell(&solver_cfg, &pot, &grid, &quad) {
        Ok(sols) => {
            write_stage_outputs(&dir, &sols)?;
            if let Some(last) = sols.last() {
                let ell = last.ell;
                let report = EnergyReport {
                    t: last.t,
                    e: last.e,
                    ell,
                    k: last.k,
                    n_ell: pot.n_ell(ell)?,
                    c0: last.c0,
                };
                io::write_json(&dir.join("energy_report.json"), &report)?;
            }
            Ok(0)
        }
        Err(err) => {
            eprintln!("solve: {err}");
            let mut written = err.completed.clone();
            if let crate::solver::SolverError::NotConverged { best, .. } = &err.source {
                written.push((**best).clone());
            }
            write_stage_outputs(&dir, &written)?;
            Ok(2)
        }
    }
}

pub fn cmd_dynamics(config: &Path, solution: &Path, out: Option<&Path>) -> Result<i32> {
    let cfg = RunConfig::load(config)?;
    let pot = cfg.build_potential()?;
    let base_quad = cfg.build_quadrature()?;
    let dyn_cfg = cfg
        .dynamics
        .as_ref()
        .ok_or_else(|| PwError::config("dynamics", "section required for this command"))?;
    let dir = resolve_out(&cfg, out)?;

    let (record, profile) = io::read_solution(solution)?;
    // propagate under the same bond cutoff the wave was solved with
    let quad = QuadratureSpec::new(record.ell, base_quad.n_xi, base_quad.z_pad)?;
    let sol = WaveSolution {
        profile,
        k: record.k,
        ell: record.ell,
        t: record.t,
        e: record.e,
        lambda: record.lambda,
        c: record.c,
        c0: record.c0,
        residual_rel: record.residual_rel,
        monotone: record.monotone,
        iterations: record.iterations as usize,
        warnings: record.warnings.clone(),
    };
    let params = DynParams {
        p_len: dyn_cfg.p_len,
        n_x: dyn_cfg.n_x,
        dt: dyn_cfg.dt,
        horizon: dyn_cfg.horizon,
        n_samples: dyn_cfg.n_samples.unwrap_or(40),
        trajectory_stride: cfg.output.as_ref().and_then(|o| o.stride),
    };
    let report = match params.trajectory_stride {
        Some(stride) if stride > 0 => {
            std::fs::create_dir_all(&dir)?;
            let mut w = csv_writer(&dir.join("trajectory.csv"))?;
            w.write_record(["t", "x", "u", "v"])?;
            let mut io_err: Option<csv::Error> = None;
            let report = {
                let mut sink = |state: &crate::dynamics::DynState| {
                    if io_err.is_some() {
                        return;
                    }
                    let h = state.domain.h();
                    for i in 0..state.domain.n_x {
                        if let Err(e) = w.write_record(&[
                            format!("{}", state.t),
                            format!("{}", i as f64 * h),
                            format!("{}", state.u[i]),
                            format!("{}", state.v[i]),
                        ]) {
                            io_err = Some(e);
                            return;
                        }
                    }
                };
                crate::dynamics::simulate_with_trajectory(&sol, &pot, &quad, &params, &mut sink)?
            };
            if let Some(e) = io_err {
                return Err(e.into());
            }
            w.flush()?;
            report
        }
        _ => simulate_travelling_wave(&sol, &pot, &quad, &params)?,
    };
    io::write_json(&dir.join("propagation_report.json"), &report)?;
    println!(
        "measured speed {} (rel err {:.3e}), shape error {:.3e}, energy drift {:.3e}",
        report.measured_speed, report.speed_rel_error, report.shape_error, report.energy_drift
    );
    if report.speed_rel_error <= 0.01 && report.shape_error <= 0.02 {
        Ok(0)
    } else {
        Ok(2)
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_path(path)?)
}

pub fn cmd_probe(name: &str, config: &Path, out: Option<&Path>) -> Result<i32> {
    let cfg = RunConfig::load(config)?;
    let pot = cfg.build_potential()?;
    let quad = cfg.build_quadrature()?;
    let dir = resolve_out(&cfg, out)?;
    std::fs::create_dir_all(&dir)?;

    match name {
        "dispersion" => {
            let rows = probes::dispersion_rows(&pot, &quad, &probes::default_kappa_grid())?;
            let mut w = csv_writer(&dir.join("dispersion.csv"))?;
            w.write_record(["kappa", "omega", "phase_velocity", "group_velocity"])?;
            for r in rows {
                w.write_record(&[
                    format!("{}", r.kappa),
                    format!("{}", r.omega),
                    format!("{}", r.phase_velocity),
                    format!("{}", r.group_velocity),
                ])?;
            }
            w.flush()?;
            Ok(0)
        }
        "hypotheses" => {
            let report = pot.check_hypotheses(&quad)?;
            io::write_json(&dir.join("hypotheses.json"), &report)?;
            Ok(0)
        }
        "tanh-asymptotics" => {
            let k_ref = cfg.solver.as_ref().map(|s| s.k).unwrap_or(1.0);
            let rows = probes::tanh_asymptotics(&pot, &quad, k_ref, &[0.2, 0.1, 0.05, 0.025])?;
            let mut w = csv_writer(&dir.join("tanh_asymptotics.csv"))?;
            w.write_record([
                "beta",
                "e_quadrature",
                "e_expansion",
                "abs_error",
                "observed_order",
            ])?;
            for r in &rows {
                w.write_record(&[
                    format!("{}", r.beta),
                    format!("{}", r.e_quadrature),
                    format!("{}", r.e_expansion),
                    format!("{}", r.abs_error),
                    r.observed_order.map(|o| format!("{o}")).unwrap_or_default(),
                ])?;
            }
            w.flush()?;
            Ok(0)
        }
        "tails" => {
            let grid = cfg.build_grid()?;
            let solver_cfg = cfg.build_solver()?;
            let sols = continue_in_ell(&solver_cfg, &pot, &grid, &quad)
                .map_err(|e| PwError::Convergence(e.to_string()))?;
            let last = sols.last().expect("non-empty schedule");
            let mut w = csv_writer(&dir.join("tails.csv"))?;
            w.write_record(["z", "log10_abs_qprime"])?;
            for (z, l) in probes::tail_rows(&last.profile) {
                w.write_record(&[format!("{z}"), format!("{l}")])?;
            }
            w.flush()?;
            let half_window = 0.5 * (-last.profile.grid.z_min).min(last.profile.grid.z_max());
            let fit = probes::tail_fit(&last.profile, pot.delta, half_window)?;
            io::write_json(&dir.join("tails_fit.json"), &fit)?;
            Ok(0)
        }
        "energy-inequality" | "subadditivity" => {
            let grid = cfg.build_grid()?;
            let solver_cfg = cfg.build_solver()?;
            let scfg = cfg.solver.as_ref().expect("validated");
            let ks = scfg
                .k_sweep
                .clone()
                .unwrap_or_else(|| vec![2.0, 5.0, 10.0, 20.0]);
            let fractions = scfg
                .alpha_fractions
                .clone()
                .unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
            let solve_set = if name == "subadditivity" {
                probes::subadditivity_k_set(&ks, &fractions)
            } else {
                ks.clone()
            };
            let outcomes = probes::k_sweep(&solver_cfg, &pot, &grid, &quad, &solve_set);
            let mut failed = false;
            for o in &outcomes {
                if let Some(err) = &o.error {
                    failed = true;
                    eprintln!("sweep K = {}: {err}", o.k);
                }
            }
            if name == "energy-inequality" {
                let rows = probes::energy_inequality_rows(&pot, &outcomes)?;
                let mut w = csv_writer(&dir.join("energy_inequality.csv"))?;
                w.write_record(["K", "T", "n_ell_Vpp_T", "satisfied"])?;
                for r in rows {
                    w.write_record(&[
                        format!("{}", r.k),
                        format!("{}", r.t),
                        format!("{}", r.n_ell_vpp_t),
                        format!("{}", r.satisfied),
                    ])?;
                }
                w.flush()?;
            } else {
                let rows = probes::subadditivity_table(&outcomes, &ks, &fractions);
                let mut w = csv_writer(&dir.join("subadditivity.csv"))?;
                w.write_record(["K", "alpha", "T_K", "T_alpha", "T_rest", "violated"])?;
                for r in rows {
                    w.write_record(&[
                        format!("{}", r.k),
                        format!("{}", r.alpha),
                        format!("{}", r.t_k),
                        format!("{}", r.t_alpha),
                        format!("{}", r.t_rest),
                        format!("{}", r.violated),
                    ])?;
                }
                w.flush()?;
            }
            Ok(if failed { 2 } else { 0 })
        }
        other => Err(PwError::Argument(format!(
            "unknown probe `{other}`; expected one of energy-inequality, subadditivity, tails, tanh-asymptotics, dispersion, hypotheses"
        ))),
    }
}

/// Convenience for tests: run the solve pipeline directly from parsed pieces.
pub fn solve_to_dir(
    solver_cfg: &crate::solver::SolverConfig,
    pot: &crate::model::MicroPotential,
    grid: &Grid,
    quad: &QuadratureSpec,
    dir: &Path,
) -> Result<i32> {
    match continue_in_ell(solver_cfg, pot, grid, quad) {
        Ok(sols) => {
            write_stage_outputs(dir, &sols)?;
            if let Some(last) = sols.last() {
                let report = EnergyReport {
                    t: last.t,
                    e: potential_energy(&last.profile, pot, &QuadratureSpec::new(last.ell, quad.n_xi, quad.z_pad)?)?,
                    ell: last.ell,
                    k: last.k,
                    n_ell: pot.n_ell(last.ell)?,
                    c0: last.c0,
                };
                io::write_json(&dir.join("energy_report.json"), &report)?;
            }
            Ok(0)
        }
        Err(err) => {
            eprintln!("solve: {err}");
            write_stage_outputs(dir, &err.completed)?;
            Ok(2)
        }
    }
}
