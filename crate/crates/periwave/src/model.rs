//! Bond-based material models of the scaling form W(η, ξ) = V(η / m(ξ)) k(ξ).
//!
//! A `MicroPotential` bundles the strain energy density V, the weight functions
//! m (odd) and k (even), the horizon δ and the growth constants that bound V''.
//! The bond force density is f(η, ξ) = ∂W/∂η = V'(η / m(ξ)) k(ξ) / m(ξ), which
//! is antisymmetric, f(-η, -ξ) = -f(η, ξ), whenever m is odd and k is even.
//!
//! Derived linear-wave quantities live here as well: the long-wave sound speed
//!
//!   c₀² = V''(0) ∫₀^δ k(ξ) ξ² / m(ξ)² dξ,
//!
//! the truncated second moment N_ℓ = ∫_ℓ^δ ξ² k / m² dξ, and the dispersion
//! relation ω²(κ) = κ² ∫₀^δ sinc²(ξκ/2) dγ(ξ) with dγ = V''(0) k ξ²/m² dξ.

use serde::Serialize;

use crate::error::{PwError, Result};
use crate::quadrature::{GaussLegendre, QuadratureSpec};

/// Strain energy density V(s) selector.
#[derive(Debug, Clone, PartialEq)]
pub enum VKind {
    /// ½s²(1 - s/3) in compression (s < 0), ½s² otherwise. Hardens in compression.
    SillingOriginal,
    /// Even extension of the superquadratic branch: ½s²(1 + |s|/3).
    SillingSymmetrized,
    /// ½s²; linear bond force.
    Quadratic,
    /// ½c₂s² + c₃|s|³/6 + c₄s⁴/24 with c₃, c₄ ≥ 0 (even, superquadratic on ℝ).
    Custom { c2: f64, c3: f64, c4: f64 },
}

impl VKind {
    /// True when V is even with V(λs) ≥ λ²V(s) for λ ≥ 1 (the solver requires this).
    pub fn is_even_superquadratic(&self) -> bool {
        match self {
            VKind::SillingOriginal => false,
            VKind::SillingSymmetrized | VKind::Quadratic => true,
            VKind::Custom { c3, c4, .. } => *c3 >= 0.0 && *c4 >= 0.0,
        }
    }
}

/// Half-line on which V is superquadratic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SuperquadraticSide {
    NonNegativeHalfLine,
    NonPositiveHalfLine,
    Both,
}

/// Radial weight: a power law or a non-negative sum of powers of |ξ|.
///
/// `k` uses the even evaluation Σ cᵢ|ξ|^{eᵢ}; `m` the odd one sgn(ξ)·Σ cᵢ|ξ|^{eᵢ}.
/// All exponents must be positive so the weight vanishes only at ξ = 0.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialFn {
    PowerLaw { exponent: f64 },
    PowerSum { terms: Vec<(f64, f64)> },
}

impl RadialFn {
    fn validate(&self, name: &str) -> Result<()> {
        match self {
            RadialFn::PowerLaw { exponent } => {
                if !exponent.is_finite() || *exponent <= 0.0 {
                    return Err(PwError::Argument(format!(
                        "{name}: power-law exponent must be positive, got {exponent}"
                    )));
                }
            }
            RadialFn::PowerSum { terms } => {
                if terms.is_empty() || terms.iter().all(|(c, _)| *c == 0.0) {
                    return Err(PwError::Argument(format!("{name}: empty power sum")));
                }
                for (c, e) in terms {
                    if !c.is_finite() || !e.is_finite() || *c < 0.0 || *e <= 0.0 {
                        return Err(PwError::Argument(format!(
                            "{name}: power-sum terms need c >= 0 and exponent > 0, got ({c}, {e})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn eval_abs(&self, r: f64) -> f64 {
        match self {
            RadialFn::PowerLaw { exponent } => r.powf(*exponent),
            RadialFn::PowerSum { terms } => terms.iter().map(|(c, e)| c * r.powf(*e)).sum(),
        }
    }
}

/// A micropotential of scaling form together with its growth constants.
#[derive(Debug, Clone)]
pub struct MicroPotential {
    pub delta: f64,
    pub v_kind: VKind,
    pub gamma1: f64,
    pub gamma2: f64,
    pub c1: f64,
    pub c2: f64,
    pub m_kind: RadialFn,
    pub k_kind: RadialFn,
    pub superquadratic_side: SuperquadraticSide,
}

/// Outcome of the structural checks on (V, m, k).
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub h1_convex_ok: bool,
    pub h1_superquadratic_ok: bool,
    pub h1_growth_bound_ok: bool,
    pub h2_integral_1: f64,
    pub h2_integral_2: f64,
    pub h2_integral_1_finite: bool,
    pub h2_integral_2_finite: bool,
    pub notes: Vec<String>,
}

/// ω, ω/κ and dω/dκ at one wavenumber.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DispersionPoint {
    pub omega: f64,
    pub phase_velocity: f64,
    pub group_velocity: f64,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl MicroPotential {
    /// Silling's original model: m(ξ) = ξ, k(ξ) = |ξ|, superquadratic in compression.
    pub fn silling(delta: f64) -> Result<Self> {
        Self::new(
            delta,
            VKind::SillingOriginal,
            1.0,
            1.0,
            0.5,
            0.5,
            RadialFn::PowerLaw { exponent: 1.0 },
            RadialFn::PowerLaw { exponent: 1.0 },
            SuperquadraticSide::NonPositiveHalfLine,
        )
    }

    /// Symmetrized Silling model, V̄(s) = ½s²(1 + |s|/3); superquadratic on all of ℝ.
    pub fn silling_symmetrized(delta: f64) -> Result<Self> {
        Self::new(
            delta,
            VKind::SillingSymmetrized,
            1.0,
            1.0,
            0.5,
            0.5,
            RadialFn::PowerLaw { exponent: 1.0 },
            RadialFn::PowerLaw { exponent: 1.0 },
            SuperquadraticSide::Both,
        )
    }

    /// Quadratic V with Silling weights; the linear (dispersive-only) medium.
    pub fn quadratic(delta: f64) -> Result<Self> {
        Self::new(
            delta,
            VKind::Quadratic,
            1.0,
            1.0,
            0.0,
            0.0,
            RadialFn::PowerLaw { exponent: 1.0 },
            RadialFn::PowerLaw { exponent: 1.0 },
            SuperquadraticSide::Both,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        delta: f64,
        v_kind: VKind,
        gamma1: f64,
        gamma2: f64,
        c1: f64,
        c2: f64,
        m_kind: RadialFn,
        k_kind: RadialFn,
        superquadratic_side: SuperquadraticSide,
    ) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(PwError::Argument(format!(
                "horizon must be positive, got {delta}"
            )));
        }
        if !(0.0 < gamma1 && gamma1 <= gamma2) {
            return Err(PwError::Argument(format!(
                "growth exponents need 0 < gamma1 <= gamma2, got ({gamma1}, {gamma2})"
            )));
        }
        if c1 < 0.0 || c2 < 0.0 {
            return Err(PwError::Argument(
                "growth coefficients must be non-negative".into(),
            ));
        }
        if let VKind::Custom { c2: q, c3, c4 } = &v_kind {
            // c2 = 0 (degenerate V''(0)) is constructible so the zero sound
            // speed limit can be exercised; the hypothesis report flags it.
            if *q < 0.0 || *c3 < 0.0 || *c4 < 0.0 {
                return Err(PwError::Argument(
                    "custom V needs c2, c3, c4 >= 0".into(),
                ));
            }
        }
        m_kind.validate("m")?;
        k_kind.validate("k")?;
        Ok(Self {
            delta,
            v_kind,
            gamma1,
            gamma2,
            c1,
            c2,
            m_kind,
            k_kind,
            superquadratic_side,
        })
    }

    /// m(ξ): odd, vanishing only at 0.
    #[inline]
    pub fn m(&self, xi: f64) -> f64 {
        self.m_kind.eval_abs(xi.abs()).copysign(xi)
    }

    /// k(ξ): even, vanishing only at 0.
    #[inline]
    pub fn k(&self, xi: f64) -> f64 {
        self.k_kind.eval_abs(xi.abs())
    }

    #[inline]
    pub(crate) fn v(&self, s: f64) -> f64 {
        match &self.v_kind {
            VKind::SillingOriginal => {
                if s < 0.0 {
                    0.5 * s * s * (1.0 - s / 3.0)
                } else {
                    0.5 * s * s
                }
            }
            VKind::SillingSymmetrized => 0.5 * s * s * (1.0 + s.abs() / 3.0),
            VKind::Quadratic => 0.5 * s * s,
            VKind::Custom { c2, c3, c4 } => {
                let a = s.abs();
                0.5 * c2 * s * s + c3 * a * a * a / 6.0 + c4 * s * s * s * s / 24.0
            }
        }
    }

    #[inline]
    pub(crate) fn v_prime(&self, s: f64) -> f64 {
        match &self.v_kind {
            VKind::SillingOriginal => {
                if s < 0.0 {
                    s - 0.5 * s * s
                } else {
                    s
                }
            }
            VKind::SillingSymmetrized => s + 0.5 * s * s.abs(),
            VKind::Quadratic => s,
            VKind::Custom { c2, c3, c4 } => {
                c2 * s + 0.5 * c3 * s * s.abs() + c4 * s * s * s / 6.0
            }
        }
    }

    #[inline]
    pub(crate) fn v_second(&self, s: f64) -> f64 {
        match &self.v_kind {
            VKind::SillingOriginal => {
                if s < 0.0 {
                    1.0 - s
                } else {
                    1.0
                }
            }
            VKind::SillingSymmetrized => 1.0 + s.abs(),
            VKind::Quadratic => 1.0,
            VKind::Custom { c2, c3, c4 } => c2 + c3 * s.abs() + 0.5 * c4 * s * s,
        }
    }

    /// V(s), V'(s) or V''(s). At the kink s = 0 the one-sided second derivatives
    /// agree for every supported kind, so order 2 is well defined there.
    pub fn eval_v(&self, s: f64, order: u8) -> Result<f64> {
        match order {
            0 => Ok(self.v(s)),
            1 => Ok(self.v_prime(s)),
            2 => Ok(self.v_second(s)),
            _ => Err(PwError::Argument(format!(
                "derivative order must be 0, 1 or 2, got {order}"
            ))),
        }
    }

    fn check_bond(&self, xi: f64) -> Result<()> {
        if xi == 0.0 || xi.abs() > self.delta || !xi.is_finite() {
            return Err(PwError::Domain(format!(
                "bond length must satisfy 0 < |xi| <= {}, got {xi}",
                self.delta
            )));
        }
        Ok(())
    }

    /// Bond energy density W(η, ξ) = V(η / m(ξ)) k(ξ).
    pub fn micro_w(&self, eta: f64, xi: f64) -> Result<f64> {
        self.check_bond(xi)?;
        Ok(self.v(eta / self.m(xi)) * self.k(xi))
    }

    /// Bond force density f(η, ξ) = V'(η / m(ξ)) k(ξ) / m(ξ).
    pub fn bond_force_f(&self, eta: f64, xi: f64) -> Result<f64> {
        self.check_bond(xi)?;
        let m = self.m(xi);
        Ok(self.v_prime(eta / m) * self.k(xi) / m)
    }

    /// Truncated second moment N_ℓ = ∫_ℓ^δ ξ² k(ξ) / m(ξ)² dξ.
    pub fn n_ell(&self, ell: f64) -> Result<f64> {
        if !(0.0..self.delta).contains(&ell) {
            return Err(PwError::Domain(format!(
                "cutoff must satisfy 0 <= ell < delta, got {ell}"
            )));
        }
        let rule = GaussLegendre::new(128)?;
        Ok(rule.integrate(ell, self.delta, |xi| {
            let m = self.m(xi);
            xi * xi * self.k(xi) / (m * m)
        }))
    }

    /// Long-wave sound speed c₀ = sqrt(V''(0) ∫₀^δ k ξ²/m² dξ).
    pub fn sound_speed_c0(&self, quad: &QuadratureSpec) -> Result<f64> {
        let _ = quad; // the moment integral is refined internally
        let (value, finite) = self.cutoff_integral(|xi| {
            let m = self.m(xi);
            xi * xi * self.k(xi) / (m * m)
        });
        if !finite {
            return Err(PwError::Domain(
                "second moment integral of k xi^2 / m^2 diverges; no sound speed".into(),
            ));
        }
        Ok((self.v_second(0.0) * value).sqrt())
    }

    /// Dispersion relation at wavenumber κ ≥ 0.
    ///
    /// Returns ω, phase velocity ω/κ and group velocity dω/dκ; at κ = 0 both
    /// velocities are the limit c₀.
    pub fn dispersion(&self, kappa: f64, quad: &QuadratureSpec) -> Result<DispersionPoint> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(PwError::Argument(format!(
                "wavenumber must be non-negative, got {kappa}"
            )));
        }
        let c0 = self.sound_speed_c0(quad)?;
        if kappa == 0.0 {
            return Ok(DispersionPoint {
                omega: 0.0,
                phase_velocity: c0,
                group_velocity: c0,
            });
        }
        // Resolve the sinc oscillations: about ten nodes per period of ξκ/2.
        let n = (quad.n_xi.max(32) as f64).max(2.0 * kappa * self.delta) as usize;
        let rule = GaussLegendre::new(n.min(2048))?;
        let vpp0 = self.v_second(0.0);
        let measure = |xi: f64| {
            let m = self.m(xi);
            vpp0 * self.k(xi) * xi * xi / (m * m)
        };
        let omega2 = kappa * kappa
            * rule.integrate(0.0, self.delta, |xi| {
                let x = 0.5 * xi * kappa;
                let s = sinc(x);
                s * s * measure(xi)
            });
        let omega = omega2.max(0.0).sqrt();
        let group = if omega > 0.0 {
            (kappa / omega)
                * rule.integrate(0.0, self.delta, |xi| {
                    let x = 0.5 * xi * kappa;
                    x.cos() * sinc(x) * measure(xi)
                })
        } else {
            c0
        };
        Ok(DispersionPoint {
            omega,
            phase_velocity: omega / kappa,
            group_velocity: group,
        })
    }

    /// Evaluates ∫_0^δ g(ξ) dξ with a shrinking inner cutoff and geometric
    /// extrapolation. Returns (value, finite?); a non-Cauchy increment sequence
    /// (ratio ≥ 0.7) is reported as divergent.
    fn cutoff_integral(&self, g: impl Fn(f64) -> f64) -> (f64, bool) {
        let rule = GaussLegendre::new(64).expect("valid rule size");
        let mut values = Vec::new();
        let mut eps = self.delta * 0.25;
        let outer = rule.integrate(self.delta * 0.25, self.delta, &g);
        let mut total = outer;
        values.push(total);
        for _ in 0..14 {
            let next_eps = eps * 0.25;
            total += rule.integrate(next_eps, eps, &g);
            values.push(total);
            eps = next_eps;
            if !total.is_finite() {
                return (total, false);
            }
        }
        let n = values.len();
        let d1 = values[n - 1] - values[n - 2];
        let d0 = values[n - 2] - values[n - 3];
        let scale = values[n - 1].abs().max(1.0);
        if d1.abs() <= 1e-12 * scale {
            return (values[n - 1], true);
        }
        let rho = d1.abs() / d0.abs().max(f64::MIN_POSITIVE);
        if rho < 0.7 {
            // geometric tail estimate
            (values[n - 1] + d1 * rho / (1.0 - rho), true)
        } else {
            (values[n - 1], false)
        }
    }

    /// Samples the structural conditions on V and evaluates both weight
    /// integrals ∫₀^δ ξ²k/m^{γ₂+2} dξ and ∫₀^δ k/m dξ.
    pub fn check_hypotheses(&self, quad: &QuadratureSpec) -> Result<HypothesisReport> {
        let _ = quad;
        let mut notes = Vec::new();

        // Sample points on the superquadratic side: log-spaced magnitudes.
        let mags: Vec<f64> = (0..61)
            .map(|i| 10f64.powf(-3.0 + 6.0 * (i as f64) / 60.0))
            .collect();
        let signs: &[f64] = match self.superquadratic_side {
            SuperquadraticSide::NonNegativeHalfLine => &[1.0],
            SuperquadraticSide::NonPositiveHalfLine => &[-1.0],
            SuperquadraticSide::Both => &[-1.0, 1.0],
        };

        let mut convex_ok = true;
        let mut superquadratic_ok = true;
        for &sign in signs {
            for &r in &mags {
                let s = sign * r;
                let vs = self.v(s);
                if !vs.is_finite() {
                    return Err(PwError::Numeric(format!(
                        "V evaluation not finite at s = {s}"
                    )));
                }
                if self.v_second(s) < -1e-12 {
                    convex_ok = false;
                    notes.push(format!("V'' < 0 at s = {s}"));
                }
                for lambda in [1.5, 2.0, 4.0] {
                    let lhs = self.v(lambda * s);
                    let rhs = lambda * lambda * vs;
                    if lhs < rhs * (1.0 - 1e-12) - 1e-300 {
                        superquadratic_ok = false;
                        notes.push(format!(
                            "superquadraticity fails at s = {s}, lambda = {lambda}"
                        ));
                    }
                }
            }
        }

        // Growth bound V''(x) <= V''(0) + c1|x|^g1 + c2|x|^g2, sampled on both sides.
        let vpp0 = self.v_second(0.0);
        let mut growth_ok = true;
        for &sign in &[-1.0, 1.0] {
            for &r in &mags {
                let x = sign * r;
                let bound =
                    vpp0 + self.c1 * r.powf(self.gamma1) + self.c2 * r.powf(self.gamma2);
                if self.v_second(x) > bound * (1.0 + 1e-12) + 1e-12 {
                    growth_ok = false;
                    notes.push(format!("growth bound fails at x = {x}"));
                }
            }
        }
        if self.c1 < 1.0 || self.c2 < 1.0 {
            notes.push(format!(
                "growth coefficients c1 = {}, c2 = {} are below the stated bound c1, c2 >= 1; \
                 accepted as given since the sampled growth bound still holds",
                self.c1, self.c2
            ));
        }

        let g2 = self.gamma2;
        let (int1, fin1) = self.cutoff_integral(|xi| {
            let m = self.m(xi);
            xi * xi * self.k(xi) / m.powf(g2 + 2.0)
        });
        let (int2, fin2) = self.cutoff_integral(|xi| self.k(xi) / self.m(xi));
        if !fin1 {
            notes.push("integral of xi^2 k / m^(gamma2+2) appears divergent".into());
        }
        if !fin2 {
            notes.push("integral of k / m appears divergent".into());
        }

        Ok(HypothesisReport {
            h1_convex_ok: convex_ok,
            h1_superquadratic_ok: superquadratic_ok,
            h1_growth_bound_ok: growth_ok,
            h2_integral_1: int1,
            h2_integral_2: int2,
            h2_integral_1_finite: fin1,
            h2_integral_2_finite: fin2,
            notes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::new(0.0, 32, 0.0).unwrap()
    }

    #[test]
    fn silling_v_values() {
        let pot = MicroPotential::silling(1.0).unwrap();
        assert_abs_diff_eq!(pot.eval_v(1.0, 0).unwrap(), 0.5);
        assert_abs_diff_eq!(pot.eval_v(-1.0, 0).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pot.eval_v(0.0, 0).unwrap(), 0.0);
        assert_abs_diff_eq!(pot.eval_v(0.0, 1).unwrap(), 0.0);
        let sym = MicroPotential::silling_symmetrized(1.0).unwrap();
        assert_abs_diff_eq!(sym.eval_v(-2.0, 2).unwrap(), 3.0);
        assert!(pot.eval_v(1.0, 3).is_err());
    }

    #[test]
    fn micro_w_values() {
        let pot = MicroPotential::silling(1.0).unwrap();
        assert_abs_diff_eq!(pot.micro_w(1.0, 1.0).unwrap(), 0.5);
        assert_abs_diff_eq!(pot.micro_w(0.0, 0.5).unwrap(), 0.0);
        // eta = -0.5, xi = 0.5: V(-1) * k(0.5) = (2/3) * 0.5
        assert_abs_diff_eq!(pot.micro_w(-0.5, 0.5).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert!(pot.micro_w(1.0, 0.0).is_err());
        assert!(pot.micro_w(1.0, 1.5).is_err());
    }

    #[test]
    fn bond_force_values() {
        let pot = MicroPotential::silling(1.0).unwrap();
        // F(-1) = -1 - 1/2
        assert_abs_diff_eq!(pot.bond_force_f(-1.0, 1.0).unwrap(), -1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pot.bond_force_f(0.0, 0.7).unwrap(), 0.0);
        let fwd = pot.bond_force_f(0.3, 0.7).unwrap();
        let bwd = pot.bond_force_f(-0.3, -0.7).unwrap();
        assert_abs_diff_eq!(fwd + bwd, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bond_force_matches_w_derivative() {
        // Centered finite difference of W in eta, away from the V-kink at 0.
        let pot = MicroPotential::silling_symmetrized(1.0).unwrap();
        let eps = 1e-6;
        for &(eta, xi) in &[(0.4, 0.8), (-0.9, 0.3), (1.7, 0.95), (-0.2, -0.6)] {
            let fd = (pot.micro_w(eta + eps, xi).unwrap() - pot.micro_w(eta - eps, xi).unwrap())
                / (2.0 * eps);
            let f = pot.bond_force_f(eta, xi).unwrap();
            assert_relative_eq!(f, fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn sound_speed_closed_form() {
        let pot = MicroPotential::silling(1.0).unwrap();
        assert_relative_eq!(
            pot.sound_speed_c0(&quad()).unwrap(),
            0.5f64.sqrt(),
            max_relative = 1e-12
        );
        let pot2 = MicroPotential::silling(2.0).unwrap();
        assert_relative_eq!(
            pot2.sound_speed_c0(&quad()).unwrap(),
            2.0f64.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn n_ell_closed_form() {
        let pot = MicroPotential::silling(1.0).unwrap();
        assert_relative_eq!(pot.n_ell(0.0).unwrap(), 0.5, max_relative = 1e-13);
        assert_relative_eq!(pot.n_ell(0.6).unwrap(), 0.32, max_relative = 1e-13);
        assert_abs_diff_eq!(pot.n_ell(1.0 - 1e-12).unwrap(), 0.0, epsilon = 1e-11);
        assert!(pot.n_ell(1.0).is_err());
    }

    #[test]
    fn dispersion_limits_and_bounds() {
        let pot = MicroPotential::silling(1.0).unwrap();
        let q = quad();
        let c0 = pot.sound_speed_c0(&q).unwrap();
        let at0 = pot.dispersion(0.0, &q).unwrap();
        assert_abs_diff_eq!(at0.omega, 0.0);
        assert_abs_diff_eq!(at0.phase_velocity, c0);
        assert_abs_diff_eq!(at0.group_velocity, c0);

        let at1 = pot.dispersion(1.0, &q).unwrap();
        assert!(at1.omega > 0.0 && at1.omega < c0);
        for kappa in [0.01, 0.1, 1.0, 5.0, 20.0, 50.0] {
            let d = pot.dispersion(kappa, &q).unwrap();
            assert!(d.phase_velocity < c0, "phase >= c0 at kappa = {kappa}");
            assert!(d.group_velocity < c0, "group >= c0 at kappa = {kappa}");
        }
        assert!(pot.dispersion(-1.0, &q).is_err());
    }

    #[test]
    fn dispersion_small_kappa_quadratic_approach() {
        let pot = MicroPotential::silling(1.0).unwrap();
        let q = quad();
        let c0 = pot.sound_speed_c0(&q).unwrap();
        let d1 = pot.dispersion(0.01, &q).unwrap();
        let d2 = pot.dispersion(0.02, &q).unwrap();
        let e1 = c0 - d1.phase_velocity;
        let e2 = c0 - d2.phase_velocity;
        // deviation from c0 shrinks like kappa^2
        assert_relative_eq!(e2 / e1, 4.0, max_relative = 0.05);
        let g1 = c0 - d1.group_velocity;
        let g2 = c0 - d2.group_velocity;
        assert_relative_eq!(g2 / g1, 4.0, max_relative = 0.05);
    }

    #[test]
    fn hypotheses_silling() {
        let pot = MicroPotential::silling(1.0).unwrap();
        let rep = pot.check_hypotheses(&quad()).unwrap();
        assert!(rep.h1_convex_ok);
        assert!(rep.h1_superquadratic_ok);
        assert!(rep.h1_growth_bound_ok);
        assert!(rep.h2_integral_1_finite && rep.h2_integral_2_finite);
        // k/m = 1 for Silling, so the second integral is just delta.
        assert_relative_eq!(rep.h2_integral_2, 1.0, max_relative = 1e-9);
        assert_relative_eq!(rep.h2_integral_1, 1.0, max_relative = 1e-9);
        // c1 = c2 = 1/2 sits below the stated lower bound; flagged, not rejected.
        assert!(rep.notes.iter().any(|n| n.contains("below the stated bound")));
    }

    #[test]
    fn degenerate_stiffness_gives_zero_sound_speed() {
        let pot = MicroPotential::new(
            1.0,
            VKind::Custom {
                c2: 0.0,
                c3: 1.0,
                c4: 0.0,
            },
            1.0,
            1.0,
            1.0,
            0.0,
            RadialFn::PowerLaw { exponent: 1.0 },
            RadialFn::PowerLaw { exponent: 1.0 },
            SuperquadraticSide::Both,
        )
        .unwrap();
        assert_abs_diff_eq!(pot.sound_speed_c0(&quad()).unwrap(), 0.0);
    }

    #[test]
    fn symmetrized_v_is_even_and_superquadratic_on_r() {
        let pot = MicroPotential::silling_symmetrized(1.0).unwrap();
        let vpp0 = pot.eval_v(0.0, 2).unwrap();
        for i in -40..=40 {
            let s = 0.25 * i as f64;
            let v = pot.eval_v(s, 0).unwrap();
            assert_abs_diff_eq!(v, pot.eval_v(-s, 0).unwrap(), epsilon = 1e-15);
            assert!(v >= 0.5 * vpp0 * s * s - 1e-15, "V̄ below its quadratic floor at {s}");
        }
    }

    #[test]
    fn hypotheses_quadratic_equality_case() {
        let pot = MicroPotential::quadratic(1.0).unwrap();
        let rep = pot.check_hypotheses(&quad()).unwrap();
        assert!(rep.h1_superquadratic_ok, "equality case must pass");
    }

    #[test]
    fn hypotheses_divergent_weight() {
        // m = xi^2, k = xi, gamma2 = 1: xi^2 * xi / xi^6 = xi^-3 diverges at 0.
        let pot = MicroPotential::new(
            1.0,
            VKind::Quadratic,
            1.0,
            1.0,
            0.0,
            0.0,
            RadialFn::PowerLaw { exponent: 2.0 },
            RadialFn::PowerLaw { exponent: 1.0 },
            SuperquadraticSide::Both,
        )
        .unwrap();
        let rep = pot.check_hypotheses(&quad()).unwrap();
        assert!(!rep.h2_integral_1_finite);
    }

    proptest! {
        #[test]
        fn bond_force_antisymmetry(eta in -5.0f64..5.0, xi in 0.01f64..1.0, sign in prop::bool::ANY) {
            let pot = MicroPotential::silling(1.0).unwrap();
            let xi = if sign { xi } else { -xi };
            let fwd = pot.bond_force_f(eta, xi).unwrap();
            let bwd = pot.bond_force_f(-eta, -xi).unwrap();
            prop_assert!((fwd + bwd).abs() <= 1e-12 * fwd.abs().max(1.0));
        }
    }
}
