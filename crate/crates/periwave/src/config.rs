//! Run configuration: one TOML document with sections `potential`, `grid`,
//! `quadrature`, `solver`, `dynamics`, `output`. Unknown keys are rejected;
//! each subcommand checks that the sections it needs are present.

use serde::Deserialize;

use crate::error::{PwError, Result};
use crate::model::{MicroPotential, RadialFn, SuperquadraticSide, VKind};
use crate::profile::Grid;
use crate::quadrature::QuadratureSpec;
use crate::solver::{InitKind, SolverConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialCfg,
    pub grid: Option<GridCfg>,
    pub quadrature: Option<QuadCfg>,
    pub solver: Option<SolverCfg>,
    pub dynamics: Option<DynCfg>,
    pub output: Option<OutputCfg>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialCfg {
    /// One of: silling_original, silling_symmetrized, quadratic, custom.
    pub kind: String,
    pub delta: f64,
    /// Custom V coefficients [c2, c3, c4] for ½c₂s² + c₃|s|³/6 + c₄s⁴/24.
    pub v_coeffs: Option<[f64; 3]>,
    pub m_exponent: Option<f64>,
    pub k_exponent: Option<f64>,
    /// Optional power-sum terms [[coef, exponent], ...] overriding the exponents.
    pub m_terms: Option<Vec<[f64; 2]>>,
    pub k_terms: Option<Vec<[f64; 2]>>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub z_half_width: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadCfg {
    pub ell: f64,
    pub n_xi: usize,
    #[serde(default)]
    pub z_pad: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverCfg {
    #[serde(rename = "K")]
    pub k: f64,
    pub ell_schedule: Vec<f64>,
    pub max_iters: Option<usize>,
    pub step_init: Option<f64>,
    pub armijo_c: Option<f64>,
    pub tol_residual: Option<f64>,
    pub tol_constraint: Option<f64>,
    pub monotonize_every: Option<usize>,
    /// One of: auto, piecewise_linear, tanh.
    pub init: Option<String>,
    /// One of: laplacian (default), none.
    pub preconditioner: Option<String>,
    pub init_lambda: Option<f64>,
    pub init_l: Option<f64>,
    pub init_beta: Option<f64>,
    /// K grid for the sweep probes.
    pub k_sweep: Option<Vec<f64>>,
    /// Split fractions for the subadditivity probe.
    pub alpha_fractions: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynCfg {
    #[serde(rename = "P")]
    pub p_len: Option<f64>,
    #[serde(rename = "N_x")]
    pub n_x: Option<usize>,
    pub dt: Option<f64>,
    pub horizon: f64,
    pub n_samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputCfg {
    pub directory: String,
    pub stride: Option<usize>,
}

impl RunConfig {
    /// Parses and structurally validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| PwError::Config {
            key: "<document>".into(),
            message: e.to_string(),
        })?;
        cfg.validate_common()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    fn validate_common(&self) -> Result<()> {
        let p = &self.potential;
        if !(p.delta.is_finite() && p.delta > 0.0) {
            return Err(PwError::config("potential.delta", "must be positive"));
        }
        match p.kind.as_str() {
            "silling_original" | "silling_symmetrized" | "quadratic" | "custom" => {}
            other => {
                return Err(PwError::config(
                    "potential.kind",
                    format!("unknown kind `{other}`"),
                ))
            }
        }
        if p.kind == "custom" && p.v_coeffs.is_none() {
            return Err(PwError::config(
                "potential.v_coeffs",
                "required for kind = \"custom\"",
            ));
        }
        if let Some(g) = &self.grid {
            if !(g.h.is_finite() && g.h > 0.0) {
                return Err(PwError::config("grid.h", "must be positive"));
            }
            if !(g.z_half_width.is_finite() && g.z_half_width > 0.0) {
                return Err(PwError::config("grid.z_half_width", "must be positive"));
            }
        }
        if let Some(q) = &self.quadrature {
            QuadratureSpec::new(q.ell, q.n_xi, q.z_pad).map_err(|e| PwError::Config {
                key: "quadrature".into(),
                message: e.to_string(),
            })?;
        }
        if let Some(s) = &self.solver {
            if !(s.k.is_finite() && s.k > 0.0) {
                return Err(PwError::config("solver.K", "must be a positive number"));
            }
            if s.ell_schedule.is_empty() {
                return Err(PwError::config("solver.ell_schedule", "must be non-empty"));
            }
            for w in s.ell_schedule.windows(2) {
                if !(w[1] < w[0]) {
                    return Err(PwError::config(
                        "solver.ell_schedule",
                        "must be strictly decreasing",
                    ));
                }
            }
            if s.ell_schedule.iter().any(|&l| !l.is_finite() || l < 0.0) {
                return Err(PwError::config(
                    "solver.ell_schedule",
                    "entries must be finite and non-negative",
                ));
            }
            if s.ell_schedule[0] >= self.potential.delta {
                return Err(PwError::config(
                    "solver.ell_schedule",
                    "entries must stay below potential.delta",
                ));
            }
            if let Some(init) = &s.init {
                match init.as_str() {
                    "auto" | "piecewise_linear" | "tanh" => {}
                    other => {
                        return Err(PwError::config(
                            "solver.init",
                            format!("unknown init `{other}`"),
                        ))
                    }
                }
            }
            if let Some(pc) = &s.preconditioner {
                match pc.as_str() {
                    "laplacian" | "none" => {}
                    other => {
                        return Err(PwError::config(
                            "solver.preconditioner",
                            format!("unknown preconditioner `{other}`"),
                        ))
                    }
                }
            }
            if let Some(ks) = &s.k_sweep {
                if ks.iter().any(|&k| !(k.is_finite() && k > 0.0)) {
                    return Err(PwError::config("solver.k_sweep", "entries must be positive"));
                }
            }
            if let Some(fr) = &s.alpha_fractions {
                if fr.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
                    return Err(PwError::config(
                        "solver.alpha_fractions",
                        "entries must lie in (0, 1)",
                    ));
                }
            }
        }
        if let Some(d) = &self.dynamics {
            if !(d.horizon.is_finite() && d.horizon >= 0.0) {
                return Err(PwError::config("dynamics.horizon", "must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn build_potential(&self) -> Result<MicroPotential> {
        let p = &self.potential;
        let m_kind = match (&p.m_terms, p.m_exponent) {
            (Some(terms), _) => RadialFn::PowerSum {
                terms: terms.iter().map(|t| (t[0], t[1])).collect(),
            },
            (None, Some(e)) => RadialFn::PowerLaw { exponent: e },
            (None, None) => RadialFn::PowerLaw { exponent: 1.0 },
        };
        let k_kind = match (&p.k_terms, p.k_exponent) {
            (Some(terms), _) => RadialFn::PowerSum {
                terms: terms.iter().map(|t| (t[0], t[1])).collect(),
            },
            (None, Some(e)) => RadialFn::PowerLaw { exponent: e },
            (None, None) => RadialFn::PowerLaw { exponent: 1.0 },
        };
        match p.kind.as_str() {
            "silling_original" => MicroPotential::silling(p.delta),
            "silling_symmetrized" => MicroPotential::silling_symmetrized(p.delta),
            "quadratic" => MicroPotential::quadratic(p.delta),
            "custom" => {
                let [c2v, c3, c4] = p.v_coeffs.expect("validated above");
                // V'' = c2 + c3|s| + c4 s²/2 gives the exact growth constants.
                let gamma1 = p.gamma1.unwrap_or(1.0);
                let gamma2 = p.gamma2.unwrap_or(2.0);
                let g1 = p.c1.unwrap_or(c3);
                let g2 = p.c2.unwrap_or(0.5 * c4);
                MicroPotential::new(
                    p.delta,
                    VKind::Custom {
                        c2: c2v,
                        c3,
                        c4,
                    },
                    gamma1,
                    gamma2,
                    g1,
                    g2,
                    m_kind,
                    k_kind,
                    SuperquadraticSide::Both,
                )
            }
            _ => unreachable!("validated"),
        }
    }

    pub fn build_grid(&self) -> Result<Grid> {
        let g = self
            .grid
            .as_ref()
            .ok_or_else(|| PwError::config("grid", "section required for this command"))?;
        Grid::symmetric(g.z_half_width, g.h)
    }

    pub fn build_quadrature(&self) -> Result<QuadratureSpec> {
        let q = self
            .quadrature
            .as_ref()
            .ok_or_else(|| PwError::config("quadrature", "section required for this command"))?;
        QuadratureSpec::new(q.ell, q.n_xi, q.z_pad)
    }

    pub fn build_solver(&self) -> Result<SolverConfig> {
        let s = self
            .solver
            .as_ref()
            .ok_or_else(|| PwError::config("solver", "section required for this command"))?;
        let mut cfg = SolverConfig::new(s.k, s.ell_schedule.clone())?;
        if let Some(v) = s.max_iters {
            cfg.max_iters = v;
        }
        if let Some(v) = s.step_init {
            cfg.step_init = v;
        }
        if let Some(v) = s.armijo_c {
            cfg.armijo_c = v;
        }
        if let Some(v) = s.tol_residual {
            cfg.tol_residual = v;
        }
        if let Some(v) = s.tol_constraint {
            cfg.tol_constraint = v;
        }
        if let Some(v) = s.monotonize_every {
            cfg.monotonize_every = v;
        }
        cfg.init = match s.init.as_deref() {
            None | Some("auto") => InitKind::Auto,
            Some("piecewise_linear") => InitKind::PiecewiseLinear {
                lambda: s.init_lambda,
                l: s.init_l,
            },
            Some("tanh") => InitKind::Tanh {
                lambda: s.init_lambda,
                beta: s.init_beta,
            },
            Some(_) => unreachable!("validated"),
        };
        cfg.preconditioner = match s.preconditioner.as_deref() {
            None | Some("laplacian") => crate::solver::Preconditioner::Laplacian,
            Some("none") => crate::solver::Preconditioner::None,
            Some(_) => unreachable!("validated"),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn output_directory(&self) -> Result<&str> {
        self.output
            .as_ref()
            .map(|o| o.directory.as_str())
            .ok_or_else(|| PwError::config("output", "section required for this command"))
    }
}
