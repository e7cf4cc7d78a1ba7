//! Gauss-Legendre rules and deterministic summation helpers.
//!
//! The bond integrals ∫_ℓ^δ … dξ are evaluated with Gauss-Legendre nodes mapped
//! onto [ℓ, δ]. Long sums over grid nodes use a fixed-size chunked pairwise
//! reduction so that results are bit-reproducible regardless of thread count.

use rayon::prelude::*;

use crate::error::{PwError, Result};

/// Number of values accumulated sequentially per chunk before the pairwise merge.
const SUM_CHUNK: usize = 1024;

/// Gauss-Legendre rule with nodes/weights on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes an `n`-point rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(PwError::Argument(
                "Gauss-Legendre rule needs at least one node".into(),
            ));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess for the i-th positive root, then Newton.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let nodes = self.nodes.iter().map(|&x| mid + half * x).collect();
        let weights = self.weights.iter().map(|&w| w * half).collect();
        (nodes, weights)
    }

    /// ∫_a^b f(x) dx by this rule.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (nodes, weights) = self.mapped(a, b);
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            acc += w * f(*x);
        }
        acc
    }
}

/// Legendre polynomial P_n(x) and its derivative via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Quadrature parameters for the bond energy functionals: the lower ξ-cutoff ℓ,
/// the Gauss-Legendre node count on [ℓ, δ], and extra z-range padding beyond the
/// profile support included in z-integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub ell: f64,
    pub n_xi: usize,
    pub z_pad: f64,
}

impl QuadratureSpec {
    pub fn new(ell: f64, n_xi: usize, z_pad: f64) -> Result<Self> {
        if !ell.is_finite() || ell < 0.0 {
            return Err(PwError::Argument(format!(
                "cutoff ell must be finite and non-negative, got {ell}"
            )));
        }
        if n_xi < 4 {
            return Err(PwError::Argument(format!(
                "n_xi must be at least 4, got {n_xi}"
            )));
        }
        if !z_pad.is_finite() || z_pad < 0.0 {
            return Err(PwError::Argument(format!(
                "z_pad must be finite and non-negative, got {z_pad}"
            )));
        }
        Ok(Self { ell, n_xi, z_pad })
    }

    /// Checks this spec against a material: ℓ < δ always, and ℓ = 0 only when the
    /// small-strain bond integrand ξ²k/m² stays bounded towards ξ = 0. Weights
    /// that blow up there require a positive cutoff.
    pub fn validated_for(self, pot: &crate::model::MicroPotential) -> Result<Self> {
        if self.ell >= pot.delta {
            return Err(PwError::Domain(format!(
                "cutoff ell = {} must be below the horizon delta = {}",
                self.ell, pot.delta
            )));
        }
        if self.ell == 0.0 {
            let probe = [1e-3, 1e-6, 1e-9].map(|r| {
                let xi = pot.delta * r;
                let m = pot.m(xi);
                xi * xi * pot.k(xi) / (m * m)
            });
            if !(probe[2] <= probe[1] * 1.5 + 1e-12 && probe[1] <= probe[0] * 1.5 + 1e-12)
                || !probe.iter().all(|v| v.is_finite())
            {
                return Err(PwError::Domain(
                    "bond integrand is singular at xi = 0 for this material; use ell > 0".into(),
                ));
            }
        }
        Ok(self)
    }

    /// Gauss-Legendre nodes and weights on [ℓ, δ].
    pub fn xi_rule(&self, delta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.ell >= delta {
            return Err(PwError::Domain(format!(
                "cutoff ell = {} must be below the horizon delta = {delta}",
                self.ell
            )));
        }
        let rule = GaussLegendre::new(self.n_xi)?;
        Ok(rule.mapped(self.ell, delta))
    }
}

/// Bond rule for the discrete energy functionals and the travelling-wave
/// residual: composite Simpson over ξ-nodes aligned with the grid (ξ = j·h).
///
/// Alignment is what makes the residual check sharp: every q(z ± ξ) the rule
/// touches is a nodal value, so the exact gradient of the discrete energy and
/// the directly-evaluated force integral agree identically at a stationary
/// point instead of to O(h²). Non-aligned ℓ or δ endpoints get a narrow
/// two-point Gauss panel; for ℓ = 0 the first cell [0, h] is closed with the
/// trapezoid using the (vanishing) ξ → 0 limit of the integrand.
/// Node stride for the aligned bond rule: the largest multiple of the grid
/// spacing that still yields about `n_xi` Simpson nodes across [ℓ, δ].
pub fn bond_stride(h: f64, ell: f64, delta: f64, n_xi: usize) -> usize {
    let target = (delta - ell) / n_xi.max(4) as f64;
    let max_stride = (delta / (2.0 * h)).floor().max(1.0);
    (target / h).floor().clamp(1.0, max_stride) as usize
}

pub fn aligned_bond_rule(h: f64, ell: f64, delta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(h > 0.0) || !(delta > 0.0) || !(0.0..delta).contains(&ell) {
        return Err(PwError::Argument(format!(
            "bond rule needs h > 0 and 0 <= ell < delta, got h = {h}, ell = {ell}, delta = {delta}"
        )));
    }
    let j_max = (delta / h + 1e-9).floor() as usize;
    if j_max < 2 {
        return Err(PwError::Domain(format!(
            "grid spacing h = {h} too coarse for the horizon delta = {delta}"
        )));
    }
    let lo = ((ell / h - 1e-9).ceil() as usize).max(1);
    if lo >= j_max {
        return Err(PwError::Domain(format!(
            "cutoff ell = {ell} leaves no aligned bond nodes below delta = {delta} at h = {h}"
        )));
    }
    let mut nodes: Vec<f64> = (lo..=j_max).map(|j| j as f64 * h).collect();
    let mut weights = vec![0.0; nodes.len()];
    // main panel: trapezoid on the first cell when the interval count is odd,
    // composite Simpson on the (even) rest
    let mut start = 0usize;
    if (j_max - lo) % 2 == 1 {
        weights[0] += 0.5 * h;
        weights[1] += 0.5 * h;
        start = 1;
    }
    if nodes.len() - start >= 3 {
        let m = nodes.len() - 1;
        weights[start] += h / 3.0;
        weights[m] += h / 3.0;
        for (idx, w) in weights.iter_mut().enumerate().take(m).skip(start + 1) {
            *w += if (idx - start) % 2 == 1 {
                4.0 * h / 3.0
            } else {
                2.0 * h / 3.0
            };
        }
    }
    // left closure
    let left_edge = lo as f64 * h;
    if ell <= 1e-12 * delta {
        if lo == 1 {
            weights[0] += 0.5 * h;
        }
    } else if left_edge - ell > 1e-12 * delta {
        let gl = GaussLegendre::new(2)?;
        let (sn, sw) = gl.mapped(ell, left_edge);
        nodes.extend_from_slice(&sn);
        weights.extend_from_slice(&sw);
    }
    // right closure
    let right_edge = j_max as f64 * h;
    if delta - right_edge > 1e-12 * delta {
        let gl = GaussLegendre::new(2)?;
        let (sn, sw) = gl.mapped(right_edge, delta);
        nodes.extend_from_slice(&sn);
        weights.extend_from_slice(&sw);
    }
    Ok((nodes, weights))
}

/// Pairwise summation of a slice (sequential, order-fixed).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Deterministic parallel sum: fixed-size chunks are accumulated sequentially,
/// chunk totals are merged pairwise in index order. The result does not depend
/// on the number of worker threads.
pub fn det_sum(xs: &[f64]) -> f64 {
    if xs.len() <= SUM_CHUNK {
        return pairwise_sum(xs);
    }
    let partials: Vec<f64> = xs
        .par_chunks(SUM_CHUNK)
        .map(pairwise_sum)
        .collect();
    pairwise_sum(&partials)
}

/// Deterministic parallel sum of `f(0) + … + f(n-1)` with fixed 256-element chunks.
pub fn det_sum_indexed(n: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    const CHUNK: usize = 256;
    if n == 0 {
        return 0.0;
    }
    let nchunks = n.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..nchunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n);
            let mut buf = [0.0; CHUNK];
            let len = hi - lo;
            for (slot, j) in buf[..len].iter_mut().zip(lo..hi) {
                *slot = f(j);
            }
            pairwise_sum(&buf[..len])
        })
        .collect();
    pairwise_sum(&partials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        // An n-point rule is exact through degree 2n-1; the odd power drops out.
        let rule = GaussLegendre::new(8).unwrap();
        let val = rule.integrate(-1.0, 1.0, |x| x.powi(15) + x.powi(14));
        assert_relative_eq!(val, 2.0 / 15.0, max_relative = 1e-14);
    }

    #[test]
    fn mapped_interval_linear() {
        let rule = GaussLegendre::new(16).unwrap();
        // ∫_0^1 ξ dξ = 1/2, the weighting that appears in the sound-speed integral.
        assert_relative_eq!(rule.integrate(0.0, 1.0, |x| x), 0.5, max_relative = 1e-15);
        // ∫_0.6^1 ξ dξ = 0.32
        assert_relative_eq!(rule.integrate(0.6, 1.0, |x| x), 0.32, max_relative = 1e-14);
    }

    #[test]
    fn five_point_nodes_match_reference() {
        let rule = GaussLegendre::new(5).unwrap();
        let reference = 0.906_179_845_938_664_f64;
        assert_relative_eq!(rule.nodes[4], reference, max_relative = 1e-14);
        assert_relative_eq!(rule.weights[2], 128.0 / 225.0, max_relative = 1e-14);
    }

    #[test]
    fn deterministic_sum_matches_sequential() {
        let xs: Vec<f64> = (0..100_000).map(|i| ((i * 2654435761_usize) % 1000) as f64 * 1e-3 - 0.5).collect();
        let a = det_sum(&xs);
        let b = det_sum(&xs);
        assert_eq!(a.to_bits(), b.to_bits());
        let seq: f64 = xs.iter().sum();
        assert_relative_eq!(a, seq, max_relative = 1e-12);
        let c = det_sum_indexed(xs.len(), |i| xs[i]);
        assert_relative_eq!(a, c, max_relative = 1e-12);
    }
}
