//! Convergence study for the constrained solver: runs a continuation at the
//! given K / grid / schedule and prints per-stage timing, kinetic energy and
//! travelling-wave residual. Set PERIWAVE_TRACE=1 for per-check progress.
//!
//! Usage: calibrate [K] [z_half_width] [h_denominator] [max_iters] [tol_residual] [ell...]

use std::time::Instant;

use periwave::solver::{continue_in_ell, SolverConfig};
use periwave::{Grid, MicroPotential, QuadratureSpec};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let k: f64 = args.first().map(|s| s.parse().unwrap()).unwrap_or(10.0);
    let zhw: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(40.0);
    let hden: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(64.0);
    let max_iters: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(30000);
    let tol: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(1e-5);
    let schedule: Vec<f64> = if args.len() > 5 {
        args[5..].iter().map(|s| s.parse().unwrap()).collect()
    } else {
        vec![0.4, 0.2, 0.1, 0.05, 0.0]
    };

    let pot = MicroPotential::silling_symmetrized(1.0).unwrap();
    let grid = Grid::symmetric(zhw, 1.0 / hden).unwrap();
    let quad = QuadratureSpec::new(schedule[0], 32, 0.0).unwrap();
    let mut cfg = SolverConfig::new(k, schedule).unwrap();
    cfg.max_iters = max_iters;
    cfg.tol_residual = tol;

    println!(
        "K = {k}, grid |z| <= {zhw} with h = 1/{hden}, n = {}, schedule {:?}",
        grid.n, cfg.ell_schedule
    );
    let start = Instant::now();
    match continue_in_ell(&cfg, &pot, &grid, &quad) {
        Ok(sols) => {
            for s in &sols {
                println!(
                    "ell {:>6.3}: T {:.10}, E {:.10}, lambda {:.8}, c {:?}, residual {:.3e}, iters {}, monotone {}",
                    s.ell, s.t, s.e, s.lambda, s.c, s.residual_rel, s.iterations, s.monotone
                );
                for w in &s.warnings {
                    println!("   warning: {w}");
                }
            }
            println!("total {:.1} s", start.elapsed().as_secs_f64());
        }
        Err(e) => {
            println!("failed after {:.1} s: {e}", start.elapsed().as_secs_f64());
            for s in &e.completed {
                println!(
                    "completed ell {:>6.3}: T {:.10}, residual {:.3e}, iters {}",
                    s.ell, s.t, s.residual_rel, s.iterations
                );
            }
        }
    }
}
