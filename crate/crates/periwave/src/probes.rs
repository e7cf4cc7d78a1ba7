//! Numerical probes of the structural conditions behind wave existence:
//! dispersion curves, hypothesis checks, the low-amplitude kink-energy
//! expansion, tail decay of computed waves, and the energy-inequality /
//! subadditivity sweeps over the constraint level K.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PwError, Result};
use crate::functionals::potential_energy;
use crate::model::{MicroPotential, RadialFn, VKind};
use crate::profile::{Grid, Profile};
use crate::quadrature::QuadratureSpec;
use crate::solver::{continue_in_ell, SolverConfig, WaveSolution};

#[derive(Debug, Clone, Serialize)]
pub struct DispersionRow {
    pub kappa: f64,
    pub omega: f64,
    pub phase_velocity: f64,
    pub group_velocity: f64,
}

pub fn default_kappa_grid() -> Vec<f64> {
    let mut ks = vec![0.0];
    for i in 0..=60 {
        ks.push(10f64.powf(-3.0 + 4.7 * i as f64 / 60.0));
    }
    ks
}

pub fn dispersion_rows(
    pot: &MicroPotential,
    quad: &QuadratureSpec,
    kappas: &[f64],
) -> Result<Vec<DispersionRow>> {
    kappas
        .iter()
        .map(|&kappa| {
            let d = pot.dispersion(kappa, quad)?;
            Ok(DispersionRow {
                kappa,
                omega: d.omega,
                phase_velocity: d.phase_velocity,
                group_velocity: d.group_velocity,
            })
        })
        .collect()
}

/// Three-term low-steepness expansion of E_ℓ for the kink family
/// (Λ/√β) tanh(βz) under the symmetrized Silling material:
/// C₁Λ²(δ²-ℓ²)/4 + C₂Λ²β²(δ⁴-ℓ⁴)/8 + C₃Λ³√β(δ²-ℓ²)/12 with
/// C₁ = 4/3, C₂ = -4/45, C₃ = 16/15.
pub fn tanh_energy_expansion(lambda: f64, beta: f64, delta: f64, ell: f64) -> f64 {
    const C1: f64 = 4.0 / 3.0;
    const C2: f64 = -4.0 / 45.0;
    const C3: f64 = 16.0 / 15.0;
    let d2 = delta * delta - ell * ell;
    let d4 = delta.powi(4) - ell.powi(4);
    C1 * lambda * lambda / 4.0 * d2
        + C2 * lambda * lambda * beta * beta / 8.0 * d4
        + C3 * lambda.powi(3) * beta.sqrt() / 12.0 * d2
}

/// Amplitude scale at which the kink family meets E_ℓ = K as β → 0.
pub fn tanh_amplitude_scale(k: f64, delta: f64, ell: f64) -> f64 {
    (4.0 * k / ((4.0 / 3.0) * (delta * delta - ell * ell))).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct TanhAsymptoticsRow {
    pub beta: f64,
    pub e_quadrature: f64,
    pub e_expansion: f64,
    pub abs_error: f64,
    /// log2(err(2β)/err(β)) against the previous row; empty for the first.
    pub observed_order: Option<f64>,
}

/// Compares quadrature values of E_ℓ(q_{Λ,β}) to the expansion across a β
/// ladder at fixed Λ. Valid for the symmetrized Silling material.
pub fn tanh_asymptotics(
    pot: &MicroPotential,
    quad: &QuadratureSpec,
    k_ref: f64,
    betas: &[f64],
) -> Result<Vec<TanhAsymptoticsRow>> {
    if pot.v_kind != VKind::SillingSymmetrized
        || pot.m_kind != (RadialFn::PowerLaw { exponent: 1.0 })
        || pot.k_kind != (RadialFn::PowerLaw { exponent: 1.0 })
    {
        return Err(PwError::Domain(
            "kink-energy expansion applies to the symmetrized Silling material".into(),
        ));
    }
    let lambda = tanh_amplitude_scale(k_ref, pot.delta, quad.ell);
    let mut rows: Vec<TanhAsymptoticsRow> = Vec::new();
    for &beta in betas {
        if !(beta > 0.0) {
            return Err(PwError::Argument(format!("beta must be positive, got {beta}")));
        }
        let half = 8.0 / beta + pot.delta + 1.0;
        let h = 0.0125;
        let grid = Grid::symmetric(half, h)?;
        let profile = Profile::tanh_profile(lambda, beta, grid)?;
        let e = potential_energy(&profile, pot, quad)?;
        let e_exp = tanh_energy_expansion(lambda, beta, pot.delta, quad.ell);
        let abs_error = (e - e_exp).abs();
        let observed_order = rows.last().map(|prev: &TanhAsymptoticsRow| {
            (prev.abs_error / abs_error).log2() / (prev.beta / beta).log2()
        });
        rows.push(TanhAsymptoticsRow {
            beta,
            e_quadrature: e,
            e_expansion: e_exp,
            abs_error,
            observed_order,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct TailFit {
    pub left_log_slope: f64,
    pub right_log_slope: f64,
    pub min_slope_half_window: f64,
    pub max_slope: f64,
    /// Orders of magnitude between the slope peak and the window edge.
    pub decay_orders: f64,
    pub strictly_positive_half_window: bool,
}

/// (z, log10 |q'(z)|) at interior nodes with a representable slope.
pub fn tail_rows(profile: &Profile) -> Vec<(f64, f64)> {
    let d = profile.derivative();
    (1..profile.grid.n - 1)
        .filter_map(|i| {
            let s = d[i].abs();
            (s > 0.0).then(|| (profile.grid.z(i), s.log10()))
        })
        .collect()
}

/// Fits one-sided exponential tail rates ln|q'| ~ a ± r z and summarizes the
/// slope field of a computed wave.
pub fn tail_fit(profile: &Profile, pot_delta: f64, half_window: f64) -> Result<TailFit> {
    let d = profile.derivative();
    let n = profile.grid.n;
    let interior = 1..n - 1;
    let mut max_slope = 0.0f64;
    let mut z_peak = 0.0;
    for i in interior.clone() {
        if d[i].abs() > max_slope {
            max_slope = d[i].abs();
            z_peak = profile.grid.z(i);
        }
    }
    if max_slope == 0.0 {
        return Err(PwError::Degenerate("flat profile has no tails".into()));
    }
    let floor = max_slope * 1e-14;
    let fit_side = |left: bool| -> Result<f64> {
        let pts: Vec<(f64, f64)> = interior
            .clone()
            .filter_map(|i| {
                let z = profile.grid.z(i);
                let inside = if left {
                    z < z_peak - 2.0 * pot_delta
                } else {
                    z > z_peak + 2.0 * pot_delta
                };
                (inside && d[i].abs() > floor).then(|| (z, d[i].abs().ln()))
            })
            .collect();
        if pts.len() < 8 {
            return Err(PwError::Degenerate(
                "not enough tail points for a log-slope fit".into(),
            ));
        }
        let m = pts.len() as f64;
        let (mut sz, mut sy, mut szz, mut szy) = (0.0, 0.0, 0.0, 0.0);
        for &(z, y) in &pts {
            sz += z;
            sy += y;
            szz += z * z;
            szy += z * y;
        }
        Ok((m * szy - sz * sy) / (m * szz - sz * sz))
    };
    let left = fit_side(true)?;
    let right = fit_side(false)?;

    let mut min_half = f64::INFINITY;
    for i in interior.clone() {
        let z = profile.grid.z(i);
        if z.abs() <= half_window {
            min_half = min_half.min(d[i]);
        }
    }
    // decay from the peak to the outer 5% of the window, each side
    let z_lo = profile.grid.z_min;
    let z_hi = profile.grid.z_max();
    let edge_band = 0.05 * (z_hi - z_lo);
    let mut edge_max = 0.0f64;
    for i in interior {
        let z = profile.grid.z(i);
        if z - z_lo < edge_band || z_hi - z < edge_band {
            edge_max = edge_max.max(d[i].abs());
        }
    }
    let decay_orders = if edge_max > 0.0 {
        (max_slope / edge_max).log10()
    } else {
        f64::INFINITY
    };
    Ok(TailFit {
        left_log_slope: left,
        right_log_slope: right,
        min_slope_half_window: min_half,
        max_slope,
        decay_orders,
        strictly_positive_half_window: min_half > 0.0,
    })
}

/// One K-sweep entry: the converged (or best-effort) solve at the schedule's
/// final cutoff, or the failure message.
pub struct SweepOutcome {
    pub k: f64,
    pub solution: Option<WaveSolution>,
    pub converged: bool,
    pub error: Option<String>,
}

/// Runs the continuation for each K concurrently (rows are independent).
pub fn k_sweep(
    base: &SolverConfig,
    pot: &MicroPotential,
    grid: &Grid,
    quad: &QuadratureSpec,
    ks: &[f64],
) -> Vec<SweepOutcome> {
    let mut sorted: Vec<f64> = ks.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let outcomes: Vec<SweepOutcome> = sorted
        .par_iter()
        .map(|&k| {
            let mut cfg = base.clone();
            cfg.k = k;
            match continue_in_ell(&cfg, pot, grid, quad) {
                Ok(mut sols) => SweepOutcome {
                    k,
                    solution: sols.pop(),
                    converged: true,
                    error: None,
                },
                Err(e) => {
                    let msg = e.to_string();
                    let best = match e.source {
                        crate::solver::SolverError::NotConverged { best, .. } => Some(*best),
                        _ => None,
                    };
                    SweepOutcome {
                        k,
                        solution: best,
                        converged: false,
                        error: Some(msg),
                    }
                }
            }
        })
        .collect();
    outcomes
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyInequalityRow {
    pub k: f64,
    pub t: f64,
    pub n_ell_vpp_t: f64,
    pub satisfied: bool,
}

/// `N_ℓ V''(0) T < K` per sweep row.
pub fn energy_inequality_rows(
    pot: &MicroPotential,
    outcomes: &[SweepOutcome],
) -> Result<Vec<EnergyInequalityRow>> {
    let vpp0 = pot.eval_v(0.0, 2)?;
    outcomes
        .iter()
        .filter_map(|o| o.solution.as_ref().map(|s| (o.k, s)))
        .map(|(k, s)| {
            let n_ell = pot.n_ell(s.ell)?;
            let bound = n_ell * vpp0 * s.t;
            Ok(EnergyInequalityRow {
                k,
                t: s.t,
                n_ell_vpp_t: bound,
                satisfied: bound < k,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SubadditivityRow {
    pub k: f64,
    pub alpha: f64,
    pub t_k: f64,
    pub t_alpha: f64,
    pub t_rest: f64,
    pub violated: bool,
}

/// Checks T_K < T_α + T_{K-α} across the sweep for each split fraction.
pub fn subadditivity_table(
    outcomes: &[SweepOutcome],
    ks: &[f64],
    fractions: &[f64],
) -> Vec<SubadditivityRow> {
    let lookup = |k: f64| -> Option<f64> {
        outcomes
            .iter()
            .find(|o| (o.k - k).abs() <= 1e-12 * k.max(1.0))
            .and_then(|o| o.solution.as_ref().map(|s| s.t))
    };
    let mut rows = Vec::new();
    for &k in ks {
        for &frac in fractions {
            let alpha = frac * k;
            if let (Some(t_k), Some(t_a), Some(t_r)) =
                (lookup(k), lookup(alpha), lookup(k - alpha))
            {
                rows.push(SubadditivityRow {
                    k,
                    alpha,
                    t_k,
                    t_alpha: t_a,
                    t_rest: t_r,
                    violated: !(t_k < t_a + t_r),
                });
            }
        }
    }
    rows
}

/// The K values a subadditivity sweep must solve: the grid plus every split part.
pub fn subadditivity_k_set(ks: &[f64], fractions: &[f64]) -> Vec<f64> {
    let mut all = ks.to_vec();
    for &k in ks {
        for &f in fractions {
            all.push(f * k);
            all.push(k - f * k);
        }
    }
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.max(1.0));
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn expansion_constants_match_independent_quadrature() {
        // C1, C2, C3 come from moments of sech powers; cross-check the three
        // underlying integrals by Simpson quadrature on a wide window.
        let simpson = |f: &dyn Fn(f64) -> f64| -> f64 {
            let (a, b, n) = (-30.0, 30.0, 60_000usize);
            let h = (b - a) / n as f64;
            let mut acc = f(a) + f(b);
            for i in 1..n {
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
            }
            acc * h / 3.0
        };
        let sech = |z: f64| 1.0 / z.cosh();
        assert_relative_eq!(simpson(&|z| sech(z).powi(4)), 4.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(simpson(&|z| sech(z).powi(6)), 16.0 / 15.0, max_relative = 1e-10);
        assert_relative_eq!(
            simpson(&|z| sech(z).powi(4) * z.tanh().powi(2)),
            4.0 / 15.0,
            max_relative = 1e-10
        );
        // C2 is the moment combination ½·(4/15) - (1/6)·(4/3) = -4/45
        let c2 = 0.5 * (4.0 / 15.0) - (4.0 / 3.0) / 6.0;
        assert_relative_eq!(c2, -4.0 / 45.0, max_relative = 1e-12);
    }

    #[test]
    fn tanh_expansion_error_shrinks_superquadratically() {
        let pot = MicroPotential::silling_symmetrized(1.0).unwrap();
        let quad = QuadratureSpec::new(0.1, 32, 0.0).unwrap();
        let rows = tanh_asymptotics(&pot, &quad, 1.0, &[0.2, 0.1]).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].abs_error < rows[0].abs_error);
        let order = rows[1].observed_order.unwrap();
        assert!(order > 2.0, "observed order {order} too low");
    }

    #[test]
    fn tail_fit_of_exact_exponential() {
        // piecewise profile with q' = exp(-|z|): log-slopes ±1.
        let grid = Grid::symmetric(20.0, 0.05).unwrap();
        let values: Vec<f64> = (0..grid.n)
            .map(|i| {
                let z = grid.z(i);
                if z < 0.0 {
                    (z).exp()
                } else {
                    2.0 - (-z).exp()
                }
            })
            .collect();
        let p = Profile::new(grid, values).unwrap().normalize_origin();
        let fit = tail_fit(&p, 1.0, 10.0).unwrap();
        assert_relative_eq!(fit.left_log_slope, 1.0, max_relative = 1e-3);
        assert_relative_eq!(fit.right_log_slope, -1.0, max_relative = 1e-3);
        assert!(fit.strictly_positive_half_window);
        assert!(fit.decay_orders > 4.0);
    }

    #[test]
    fn subadditivity_k_set_contains_all_parts() {
        let set = subadditivity_k_set(&[2.0, 10.0], &[0.25, 0.5]);
        for k in [0.5, 1.0, 1.5, 2.0, 2.5, 5.0, 7.5, 10.0] {
            assert!(
                set.iter().any(|&x| (x - k).abs() < 1e-9),
                "missing {k} in {set:?}"
            );
        }
    }
}
