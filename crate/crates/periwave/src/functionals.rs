//! Discrete kinetic and potential energy functionals and their exact gradients.
//!
//! The kinetic energy T(q) = ½∫ q'² is evaluated exactly for the piecewise
//! linear interpolant: T_h = 1/(2h) Σ (q_{i+1} - q_i)². The potential energy
//!
//!   E_ℓ(q) = ∫_ℝ ∫_ℓ^δ V((q(z+ξ) - q(z)) / m(ξ)) k(ξ) dξ dz
//!
//! uses the grid-aligned composite Simpson bond rule in ξ and the trapezoid
//! rule in z on the profile grid, extended left by δ (plus padding) where the
//! density is still nonzero; the density vanishes identically beyond the last
//! node, so the infinite z-integral truncates exactly. Values q(z+ξ) come from
//! the profile's linear interpolation — that *defines* the discrete functional,
//! and the gradient differentiates exactly that discrete object, so
//! finite-difference checks agree to roundoff plus quadrature, and with the
//! aligned ξ-nodes the travelling-wave residual of a converged minimizer is
//! limited by the descent tolerance rather than by interpolation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PwError, Result};
use crate::model::MicroPotential;
use crate::profile::{Grid, Profile};
use crate::quadrature::{det_sum_indexed, pairwise_sum};

pub use crate::quadrature::QuadratureSpec;

/// Scalar summary of one energy evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub ell: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub n_ell: f64,
    pub c0: f64,
}

#[derive(Debug, Clone, Copy)]
struct XiNode {
    /// Gauss-Legendre weight times k(ξ).
    w_k: f64,
    /// 1 / m(ξ).
    inv_m: f64,
    /// Whole-cell offset of ξ on the grid.
    n0: isize,
    /// Fractional part of ξ/h.
    t: f64,
}

/// Reusable discretization of E_ℓ on a fixed grid: the interpolation stencil
/// depends only on the spacing, never on the grid origin, so recentered
/// profiles evaluate on the same operator.
#[derive(Debug, Clone)]
pub struct EnergyOp {
    h: f64,
    n: usize,
    n_left: usize,
    n_rows: usize,
    xi: Vec<XiNode>,
    pot: MicroPotential,
    pub ell: f64,
}

impl EnergyOp {
    pub fn new(grid: &Grid, pot: &MicroPotential, quad: &QuadratureSpec) -> Result<Self> {
        let quad = (*quad).validated_for(pot)?;
        let stride = crate::quadrature::bond_stride(grid.h, quad.ell, pot.delta, quad.n_xi);
        let (nodes, weights) =
            crate::quadrature::aligned_bond_rule(stride as f64 * grid.h, quad.ell, pot.delta)?;
        let xi = nodes
            .iter()
            .zip(weights.iter())
            .map(|(&x, &w)| {
                let ratio = x / grid.h;
                let n0 = ratio.floor() as isize;
                XiNode {
                    w_k: w * pot.k(x),
                    inv_m: 1.0 / pot.m(x),
                    n0,
                    t: ratio - n0 as f64,
                }
            })
            .collect();
        let n_left = ((pot.delta + quad.z_pad) / grid.h).ceil() as usize + 1;
        Ok(Self {
            h: grid.h,
            n: grid.n,
            n_left,
            n_rows: n_left + grid.n,
            xi,
            pot: pot.clone(),
            ell: quad.ell,
        })
    }

    fn check_grid(&self, p: &Profile) -> Result<()> {
        if p.grid.n != self.n || p.grid.h != self.h {
            return Err(PwError::Argument(
                "profile grid does not match the energy operator".into(),
            ));
        }
        Ok(())
    }

    /// Forward-interpolated value q(z_j + ξ_k) with constant extension.
    #[inline(always)]
    fn forward_value(&self, v: &[f64], jz: isize, node: &XiNode) -> f64 {
        let pos = jz + node.n0;
        if pos < 0 {
            v[0]
        } else if pos as usize >= self.n - 1 {
            v[self.n - 1]
        } else {
            let p = pos as usize;
            (1.0 - node.t) * v[p] + node.t * v[p + 1]
        }
    }

    #[inline(always)]
    fn base_value(&self, v: &[f64], jz: isize) -> f64 {
        if jz < 0 {
            v[0]
        } else {
            v[(jz as usize).min(self.n - 1)]
        }
    }

    /// Per-row contribution Σ_k w_k V(r_jk); rows are summed deterministically.
    pub fn energy(&self, p: &Profile) -> Result<f64> {
        self.check_grid(p)?;
        let v = &p.values;
        let e = self.h
            * det_sum_indexed(self.n_rows, |j| {
                let jz = j as isize - self.n_left as isize;
                let base = self.base_value(v, jz);
                let mut row = 0.0;
                for node in &self.xi {
                    let delta = self.forward_value(v, jz, node) - base;
                    row += node.w_k * self.pot.v(delta * node.inv_m);
                }
                row
            });
        if !e.is_finite() {
            return Err(PwError::Numeric(
                "potential energy evaluation produced a non-finite value".into(),
            ));
        }
        Ok(e)
    }

    /// Exact gradient of the discrete E with respect to nodal values.
    pub fn gradient(&self, p: &Profile) -> Result<Vec<f64>> {
        self.check_grid(p)?;
        let v = &p.values;
        let n_xi = self.xi.len();
        // V' coefficients are embarrassingly parallel; the scatter is serial.
        let coeff: Vec<f64> = (0..self.n_rows)
            .into_par_iter()
            .flat_map_iter(|j| {
                let jz = j as isize - self.n_left as isize;
                let base = self.base_value(v, jz);
                self.xi.iter().map(move |node| {
                    let delta = self.forward_value(v, jz, node) - base;
                    self.h * node.w_k * node.inv_m * self.pot.v_prime(delta * node.inv_m)
                })
            })
            .collect();
        let mut grad = vec![0.0; self.n];
        for j in 0..self.n_rows {
            let jz = j as isize - self.n_left as isize;
            let ib = if jz < 0 { 0 } else { (jz as usize).min(self.n - 1) };
            for (k, node) in self.xi.iter().enumerate() {
                let a = coeff[j * n_xi + k];
                if a == 0.0 {
                    continue;
                }
                let pos = jz + node.n0;
                if pos < 0 {
                    grad[0] += a;
                } else if pos as usize >= self.n - 1 {
                    grad[self.n - 1] += a;
                } else {
                    let p = pos as usize;
                    grad[p] += (1.0 - node.t) * a;
                    grad[p + 1] += node.t * a;
                }
                grad[ib] -= a;
            }
        }
        if !grad.iter().all(|g| g.is_finite()) {
            return Err(PwError::Numeric("potential gradient not finite".into()));
        }
        Ok(grad)
    }

    /// Strain table r_jk = (q(z_j+ξ_k) - q(z_j)) / m(ξ_k), row-major. The map
    /// q ↦ r is linear, so E(λq) re-evaluates cheaply from a cached table.
    pub fn strains(&self, p: &Profile) -> Result<Vec<f64>> {
        self.check_grid(p)?;
        let v = &p.values;
        let n_xi = self.xi.len();
        let mut r = vec![0.0; self.n_rows * n_xi];
        r.par_chunks_mut(n_xi).enumerate().for_each(|(j, row)| {
            let jz = j as isize - self.n_left as isize;
            let base = self.base_value(v, jz);
            for (slot, node) in row.iter_mut().zip(self.xi.iter()) {
                *slot = (self.forward_value(v, jz, node) - base) * node.inv_m;
            }
        });
        Ok(r)
    }

    /// (E(λq), dE/dλ) from a cached strain table.
    pub fn energy_of_scaled(&self, strains: &[f64], lambda: f64) -> (f64, f64) {
        let n_xi = self.xi.len();
        let partials: Vec<(f64, f64)> = strains
            .par_chunks(n_xi)
            .map(|row| {
                let mut e = 0.0;
                let mut de = 0.0;
                for (r, node) in row.iter().zip(self.xi.iter()) {
                    e += node.w_k * self.pot.v(lambda * r);
                    de += node.w_k * self.pot.v_prime(lambda * r) * r;
                }
                (e, de)
            })
            .collect();
        let e: Vec<f64> = partials.iter().map(|p| p.0).collect();
        let de: Vec<f64> = partials.iter().map(|p| p.1).collect();
        (self.h * pairwise_sum(&e), self.h * pairwise_sum(&de))
    }

    /// Constrained-stationarity pairing ⟨∇E, q⟩ = ∫∫ V'(Δ/m) Δ k/m dξ dz on the
    /// same stencil as `energy`; exact by linearity of the strains in q.
    pub fn pairing(&self, p: &Profile) -> Result<f64> {
        self.check_grid(p)?;
        let v = &p.values;
        Ok(self.h
            * det_sum_indexed(self.n_rows, |j| {
                let jz = j as isize - self.n_left as isize;
                let base = self.base_value(v, jz);
                let mut row = 0.0;
                for node in &self.xi {
                    let r = (self.forward_value(v, jz, node) - base) * node.inv_m;
                    row += node.w_k * self.pot.v_prime(r) * r;
                }
                row
            }))
    }

    pub fn pot(&self) -> &MicroPotential {
        &self.pot
    }
}

/// Discrete kinetic energy ½ ∫ q'²; exact for piecewise-linear profiles.
pub fn kinetic(p: &Profile) -> f64 {
    let v = &p.values;
    let n = v.len();
    (0.5 / p.grid.h) * det_sum_indexed(n - 1, |i| (v[i + 1] - v[i]) * (v[i + 1] - v[i]))
}

/// Gradient of the discrete kinetic energy: the graph Laplacian of the chain,
/// with boundary rows matching the one-sided end slopes.
pub fn grad_kinetic(p: &Profile) -> Vec<f64> {
    let v = &p.values;
    let n = v.len();
    let inv_h = 1.0 / p.grid.h;
    let mut g = vec![0.0; n];
    g[0] = inv_h * (v[0] - v[1]);
    g[n - 1] = inv_h * (v[n - 1] - v[n - 2]);
    for i in 1..n - 1 {
        g[i] = inv_h * (2.0 * v[i] - v[i - 1] - v[i + 1]);
    }
    g
}

/// Local bond energy density U(q; z) = ∫_ℓ^δ V((q(z+ξ)-q(z))/m) k dξ.
pub fn potential_density(
    p: &Profile,
    pot: &MicroPotential,
    quad: &QuadratureSpec,
    z: f64,
) -> Result<f64> {
    let (nodes, weights) = quad.xi_rule(pot.delta)?;
    let qz = p.eval_at(z);
    let mut acc = 0.0;
    for (&xi, &w) in nodes.iter().zip(weights.iter()) {
        let s = (p.eval_at(z + xi) - qz) / pot.m(xi);
        let val = pot.v(s) * pot.k(xi);
        if !val.is_finite() {
            return Err(PwError::Numeric(format!(
                "non-finite bond energy density at z = {z}, xi = {xi}"
            )));
        }
        acc += w * val;
    }
    Ok(acc)
}

/// Potential energy E_ℓ(q) on the grid (one-shot; builds the operator).
pub fn potential_energy(p: &Profile, pot: &MicroPotential, quad: &QuadratureSpec) -> Result<f64> {
    EnergyOp::new(&p.grid, pot, quad)?.energy(p)
}

/// Exact gradient of the discretized E_ℓ (one-shot; builds the operator).
pub fn grad_potential(
    p: &Profile,
    pot: &MicroPotential,
    quad: &QuadratureSpec,
) -> Result<Vec<f64>> {
    EnergyOp::new(&p.grid, pot, quad)?.gradient(p)
}

/// Scales a profile onto the constraint E_ℓ(λp) = K. Requires an even
/// superquadratic V so the map λ ↦ E_ℓ(λp) is strictly increasing.
pub fn rescale_to_energy(
    p: &Profile,
    pot: &MicroPotential,
    quad: &QuadratureSpec,
    k_target: f64,
) -> Result<(f64, Profile)> {
    let op = EnergyOp::new(&p.grid, pot, quad)?;
    rescale_with_op(&op, p, k_target)
}

/// `rescale_to_energy` against a prebuilt operator.
pub fn rescale_with_op(op: &EnergyOp, p: &Profile, k_target: f64) -> Result<(f64, Profile)> {
    if !(k_target > 0.0) {
        return Err(PwError::Argument(format!(
            "target energy must be positive, got {k_target}"
        )));
    }
    if !op.pot().v_kind.is_even_superquadratic() {
        return Err(PwError::Domain(
            "energy rescaling needs an even superquadratic V".into(),
        ));
    }
    const TOL: f64 = 1e-10;
    const LAMBDA_MIN: f64 = 1e-8;
    const LAMBDA_MAX: f64 = 1e8;
    let strains = op.strains(p)?;
    let (e0, _) = op.energy_of_scaled(&strains, 1.0);
    if !(e0 > 0.0) {
        return Err(PwError::Degenerate(format!(
            "profile has no potential energy to rescale (E = {e0})"
        )));
    }
    if (e0 - k_target).abs() <= TOL * k_target {
        return Ok((1.0, p.clone()));
    }
    let eval = |lam: f64| op.energy_of_scaled(&strains, lam);

    // Bracket the root of E(λ) - K; E is increasing in λ.
    let mut lo = (k_target / e0).sqrt().clamp(LAMBDA_MIN, LAMBDA_MAX);
    let mut hi = lo;
    while eval(lo).0 > k_target {
        lo *= 0.5;
        if lo < LAMBDA_MIN {
            return Err(PwError::Convergence(format!(
                "no lower rescale bracket above lambda = {LAMBDA_MIN}"
            )));
        }
    }
    while eval(hi).0 < k_target {
        hi *= 2.0;
        if hi > LAMBDA_MAX {
            return Err(PwError::Convergence(format!(
                "no upper rescale bracket below lambda = {LAMBDA_MAX}"
            )));
        }
    }
    let mut lam = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (e, de) = eval(lam);
        let err = e - k_target;
        if err.abs() <= TOL * k_target {
            return Ok((lam, p.scaled(lam)));
        }
        if err > 0.0 {
            hi = lam;
        } else {
            lo = lam;
        }
        let newton = lam - err / de;
        lam = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(PwError::Convergence(
        "energy rescale did not reach tolerance".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VKind;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn silling_sym() -> MicroPotential {
        MicroPotential::silling_symmetrized(1.0).unwrap()
    }

    fn quad(ell: f64) -> QuadratureSpec {
        QuadratureSpec::new(ell, 32, 0.0).unwrap()
    }

    fn smooth_random_profile(seed: u64, grid: Grid) -> Profile {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let span = grid.z_max() - grid.z_min;
        let center = 0.5 * (grid.z_min + grid.z_max());
        let modes: Vec<(f64, f64, f64)> = (0..5)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.5..4.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        let values = (0..grid.n)
            .map(|i| {
                let z = grid.z(i);
                let envelope = (-(8.0 * (z - center) / span).powi(2)).exp();
                modes
                    .iter()
                    .map(|(a, w, phi)| a * (w * z + phi).sin())
                    .sum::<f64>()
                    * envelope
            })
            .collect();
        Profile::new(grid, values).unwrap().normalize_origin()
    }

    #[test]
    fn kinetic_closed_forms() {
        let g = Grid::new(-2.0, 1.0 / 64.0, 64 * 5 + 1).unwrap(); // [-2, 3]
        assert_eq!(kinetic(&Profile::zeros(g.clone())), 0.0);
        let p = Profile::piecewise_linear(1.0, 2.0, g.clone(), 1.0).unwrap();
        assert_relative_eq!(kinetic(&p), 1.0, max_relative = 1e-12);
        let p2 = Profile::piecewise_linear(2.0, 3.0, Grid::new(-2.0, 1.0 / 64.0, 64 * 6 + 1).unwrap(), 1.0).unwrap();
        assert_relative_eq!(kinetic(&p2), 6.0, max_relative = 1e-12);
        // T of the tanh family is (2/3)Λ² independent of β.
        let gt = Grid::symmetric(18.0, 0.004).unwrap();
        let pt = Profile::tanh_profile(3.0, 0.5, gt).unwrap();
        assert_relative_eq!(kinetic(&pt), 6.0, max_relative = 1e-6);
    }

    #[test]
    fn kinetic_scales_quadratically_exact() {
        let g = Grid::new(-4.0, 0.125, 65).unwrap();
        let p = smooth_random_profile(7, g);
        let t = kinetic(&p);
        let t3 = kinetic(&p.scaled(3.0));
        assert_relative_eq!(t3, 9.0 * t, max_relative = 1e-14);
    }

    #[test]
    fn potential_density_cases() {
        let pot = MicroPotential::silling(1.0).unwrap();
        let q = quad(0.0);
        let g = Grid::new(-2.0, 1.0 / 128.0, 128 * 14 + 1).unwrap(); // [-2, 12]
        let zero = Profile::zeros(g.clone());
        assert_abs_diff_eq!(potential_density(&zero, &pot, &q, 0.3).unwrap(), 0.0);
        let c = Profile::new(g.clone(), vec![2.5; g.n]).unwrap();
        assert_abs_diff_eq!(potential_density(&c, &pot, &q, 1.0).unwrap(), 0.0);
        // Ramp interior: density = ∫_0^δ V(1) ξ dξ = δ²/4.
        let p = Profile::piecewise_linear(1.0, 10.0, g, 1.0).unwrap();
        assert_relative_eq!(
            potential_density(&p, &pot, &q, 5.0).unwrap(),
            0.25,
            max_relative = 1e-12
        );
    }

    /// Closed form of E_ℓ for the ramp under the symmetrized Silling model:
    /// V̄(Λ)[L(δ²-ℓ²)/2 - (δ³-ℓ³)/3] + 2(Λ²/6 + Λ³/24)(δ³-ℓ³)/3.
    fn ramp_energy_closed(lam: f64, l: f64, delta: f64, ell: f64) -> f64 {
        let vbar = 0.5 * lam * lam * (1.0 + lam.abs() / 3.0);
        let d2 = delta * delta - ell * ell;
        let d3 = delta.powi(3) - ell.powi(3);
        vbar * (l * d2 / 2.0 - d3 / 3.0) + 2.0 * (lam * lam / 6.0 + lam.powi(3) / 24.0) * d3 / 3.0
    }

    /// Independent brute-force double quadrature for the ramp: analytic profile
    /// values (no grid), ξ by Simpson, z by Simpson split at the density kinks.
    fn ramp_energy_brute(lam: f64, l: f64, delta: f64, ell: f64) -> f64 {
        let q = |z: f64| lam * z.clamp(0.0, l);
        let v = |s: f64| 0.5 * s * s * (1.0 + s.abs() / 3.0);
        let simpson = |a: f64, b: f64, n: usize, f: &dyn Fn(f64) -> f64| {
            let n = if n.is_multiple_of(2) { n } else { n + 1 };
            let h = (b - a) / n as f64;
            let mut acc = f(a) + f(b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(a + h * i as f64);
            }
            acc * h / 3.0
        };
        let phi = |xi: f64| {
            let integrand = |z: f64| v((q(z + xi) - q(z)) / xi) * xi;
            // density kinks at z = -xi, 0, l - xi, l
            let mut cuts = [-xi, 0.0, l - xi, l];
            cuts.sort_by(f64::total_cmp);
            let mut acc = 0.0;
            for w in cuts.windows(2) {
                if w[1] > w[0] {
                    acc += simpson(w[0], w[1], 400, &integrand);
                }
            }
            acc
        };
        simpson(ell, delta, 800, &phi)
    }

    #[test]
    fn ramp_potential_energy_matches_independent_quadratures() {
        let pot = silling_sym();
        let (lam, l, ell) = (1.0, 3.0, 0.1);
        let closed = ramp_energy_closed(lam, l, 1.0, ell);
        let brute = ramp_energy_brute(lam, l, 1.0, ell);
        assert_relative_eq!(brute, closed, max_relative = 1e-8);

        let h = 1.0 / 2048.0;
        let g = Grid::new(-2.0, h, (6.0 / h) as usize + 1).unwrap(); // [-2, 4]
        let p = Profile::piecewise_linear(lam, l, g, 1.0).unwrap();
        let e = potential_energy(&p, &pot, &quad(ell)).unwrap();
        assert_relative_eq!(e, brute, max_relative = 1e-6);
        assert_relative_eq!(e, closed, max_relative = 1e-6);
    }

    #[test]
    fn zero_profile_has_zero_energy_and_gradient() {
        let pot = silling_sym();
        let g = Grid::new(-4.0, 0.125, 81).unwrap();
        let zero = Profile::zeros(g);
        assert_abs_diff_eq!(potential_energy(&zero, &pot, &quad(0.0)).unwrap(), 0.0);
        let gk = grad_kinetic(&zero);
        assert!(gk.iter().all(|&x| x == 0.0));
        let ge = grad_potential(&zero, &pot, &quad(0.0)).unwrap();
        assert!(ge.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn grad_kinetic_matches_finite_differences() {
        let g = Grid::new(-4.0, 0.125, 64).unwrap();
        let p = smooth_random_profile(11, g);
        let grad = grad_kinetic(&p);
        let eps = 1e-6;
        let mut fd = vec![0.0; p.grid.n];
        for i in 0..p.grid.n {
            let mut up = p.clone();
            up.values[i] += eps;
            let mut dn = p.clone();
            dn.values[i] -= eps;
            fd[i] = (kinetic(&up) - kinetic(&dn)) / (2.0 * eps);
        }
        let num: f64 = grad.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = grad.iter().map(|a| a * a).sum();
        assert!((num / den).sqrt() <= 1e-6, "rel err {}", (num / den).sqrt());
    }

    #[test]
    fn grad_kinetic_ramp_interior_rows_vanish() {
        let g = Grid::new(-2.0, 0.125, 41).unwrap();
        let p = Profile::piecewise_linear(1.0, 2.0, g.clone(), 1.0).unwrap();
        let grad = grad_kinetic(&p);
        let i = ((1.0 - g.z_min) / g.h).round() as usize; // mid-ramp
        assert_abs_diff_eq!(grad[i], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn grad_potential_matches_finite_differences() {
        for (seed, ell) in [(1u64, 0.0), (2, 0.1), (3, 0.0), (4, 0.1)] {
            let g = Grid::new(-4.0, 8.0 / 127.0, 128).unwrap();
            let p = smooth_random_profile(seed, g);
            let pot = silling_sym();
            let q = quad(ell);
            let grad = grad_potential(&p, &pot, &q).unwrap();
            let eps = 3e-6;
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..p.grid.n {
                let mut up = p.clone();
                up.values[i] += eps;
                let mut dn = p.clone();
                dn.values[i] -= eps;
                let fd = (potential_energy(&up, &pot, &q).unwrap()
                    - potential_energy(&dn, &pot, &q).unwrap())
                    / (2.0 * eps);
                num += (grad[i] - fd) * (grad[i] - fd);
                den += grad[i] * grad[i];
            }
            let rel = (num / den).sqrt();
            assert!(rel <= 1e-6, "seed {seed} ell {ell}: rel err {rel}");
        }
    }

    #[test]
    fn grad_potential_vanishes_over_constant_tails() {
        let pot = silling_sym();
        let g = Grid::new(-10.0, 0.25, 81).unwrap(); // [-10, 10]
        // ramp occupies [0, 2]; nodes beyond z > 3 + δ see constant values
        let p = Profile::piecewise_linear(1.0, 2.0, g.clone(), 1.0).unwrap();
        let grad = grad_potential(&p, &pot, &quad(0.1)).unwrap();
        for i in 0..g.n {
            let z = g.z(i);
            if !(-2.0..=4.0).contains(&z) {
                assert_abs_diff_eq!(grad[i], 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn rescale_cases() {
        let pot = silling_sym();
        let q = quad(0.1);
        let g = Grid::new(-6.0, 0.0625, 193).unwrap();
        let p = smooth_random_profile(5, g);

        let e = potential_energy(&p, &pot, &q).unwrap();
        let (lam, _) = rescale_to_energy(&p, &pot, &q, e).unwrap();
        assert_abs_diff_eq!(lam, 1.0, epsilon = 1e-9);

        let k2 = potential_energy(&p.scaled(2.0), &pot, &q).unwrap();
        let (lam2, p2) = rescale_to_energy(&p, &pot, &q, k2).unwrap();
        assert_abs_diff_eq!(lam2, 2.0, epsilon = 1e-8);
        assert_relative_eq!(
            potential_energy(&p2, &pot, &q).unwrap(),
            k2,
            max_relative = 1e-9
        );

        // quadratic V: λ = sqrt(K/E) exactly
        let quad_pot = MicroPotential::quadratic(1.0).unwrap();
        let eq = potential_energy(&p, &quad_pot, &q).unwrap();
        let (lam3, _) = rescale_to_energy(&p, &quad_pot, &q, 4.0 * eq).unwrap();
        assert_relative_eq!(lam3, 2.0, max_relative = 1e-10);

        let zero = Profile::zeros(Grid::new(-6.0, 0.0625, 193).unwrap());
        assert!(rescale_to_energy(&zero, &pot, &q, 1.0).is_err());
    }

    #[test]
    fn scaling_inequalities() {
        let pot = silling_sym();
        let q = quad(0.05);
        let g = Grid::new(-6.0, 0.0625, 193).unwrap();
        let p = smooth_random_profile(9, g);
        let e1 = potential_energy(&p, &pot, &q).unwrap();
        for lam in [1.5, 2.0, 4.0] {
            let el = potential_energy(&p.scaled(lam), &pot, &q).unwrap();
            assert!(
                el >= lam * lam * e1 * (1.0 - 1e-12),
                "superquadratic scaling violated at lambda = {lam}"
            );
        }
        // quadratic V scales exactly quadratically
        let quad_pot = MicroPotential::quadratic(1.0).unwrap();
        let eq = potential_energy(&p, &quad_pot, &q).unwrap();
        let eq2 = potential_energy(&p.scaled(2.0), &quad_pot, &q).unwrap();
        assert_relative_eq!(eq2, 4.0 * eq, max_relative = 1e-12);
    }

    #[test]
    fn monotonize_does_not_decrease_potential_energy() {
        let pot = silling_sym();
        let q = quad(0.1);
        for seed in 0..6 {
            let g = Grid::new(-6.0, 0.125, 97).unwrap();
            let p = smooth_random_profile(seed, g);
            let e = potential_energy(&p, &pot, &q).unwrap();
            let em = potential_energy(&p.monotonize(), &pot, &q).unwrap();
            assert!(
                em >= e * (1.0 - 1e-12),
                "seed {seed}: monotonize lowered E from {e} to {em}"
            );
        }
    }

    #[test]
    fn small_amplitude_upper_bound() {
        // E ≤ sup V'' · N_ℓ · T over the realized strain range.
        let pot = silling_sym();
        let q = quad(0.1);
        let g = Grid::new(-6.0, 0.0625, 193).unwrap();
        for seed in [3u64, 8, 21] {
            let p = smooth_random_profile(seed, g.clone()).scaled(0.05);
            let smax = p.strain_sup_for(&pot, &q).unwrap();
            let m = pot.eval_v(0.0, 2).unwrap() + smax; // V̄'' = 1 + |s|
            let bound = m * pot.n_ell(0.1).unwrap() * kinetic(&p);
            let e = potential_energy(&p, &pot, &q).unwrap();
            assert!(
                e <= bound * (1.0 + 1e-6),
                "seed {seed}: E = {e} above bound {bound}"
            );
        }
    }

    #[test]
    fn energy_report_key_names() {
        let report = EnergyReport {
            t: 1.0,
            e: 2.0,
            ell: 0.1,
            k: 2.0,
            n_ell: 0.495,
            c0: 0.7,
        };
        let v = serde_json::to_value(&report).unwrap();
        for key in ["T", "E", "ell", "K", "n_ell", "c0"] {
            assert!(v.get(key).is_some(), "missing key {key}");
        }
    }

    #[test]
    fn custom_v_is_even_superquadratic() {
        let pot = MicroPotential::new(
            1.0,
            VKind::Custom {
                c2: 2.0,
                c3: 1.0,
                c4: 0.5,
            },
            1.0,
            2.0,
            1.0,
            0.25,
            crate::model::RadialFn::PowerLaw { exponent: 1.0 },
            crate::model::RadialFn::PowerLaw { exponent: 1.0 },
            crate::model::SuperquadraticSide::Both,
        )
        .unwrap();
        assert!(pot.v_kind.is_even_superquadratic());
        assert_abs_diff_eq!(pot.eval_v(-1.5, 0).unwrap(), pot.eval_v(1.5, 0).unwrap());
    }
}
