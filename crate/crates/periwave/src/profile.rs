//! Grid-sampled travelling-wave candidates q(z).
//!
//! A profile is a uniform grid of nodal displacements interpreted as the
//! piecewise-linear interpolant with constant extension outside the grid, and
//! normalized so q(0) = 0. The constant extension encodes candidates whose
//! derivative is supported inside the window.

use std::io::{Read, Write};

use crate::error::{PwError, Result};
use crate::model::MicroPotential;
use crate::quadrature::{GaussLegendre, QuadratureSpec};

/// Uniform grid: nodes z_min + i·h for i = 0..n.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub z_min: f64,
    pub h: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(z_min: f64, h: f64, n: usize) -> Result<Self> {
        if !z_min.is_finite() || !h.is_finite() || h <= 0.0 {
            return Err(PwError::Argument(format!(
                "grid needs finite z_min and spacing h > 0, got ({z_min}, {h})"
            )));
        }
        if n < 3 {
            return Err(PwError::Argument(format!(
                "grid needs at least 3 nodes, got {n}"
            )));
        }
        Ok(Self { z_min, h, n })
    }

    /// Symmetric grid covering [-z_half_width, z_half_width].
    pub fn symmetric(z_half_width: f64, h: f64) -> Result<Self> {
        if !z_half_width.is_finite() || z_half_width <= 0.0 {
            return Err(PwError::Argument(format!(
                "z_half_width must be positive, got {z_half_width}"
            )));
        }
        let n = (2.0 * z_half_width / h).round() as usize + 1;
        Grid::new(-z_half_width, h, n.max(3))
    }

    #[inline]
    pub fn z(&self, i: usize) -> f64 {
        self.z_min + self.h * i as f64
    }

    pub fn z_max(&self) -> f64 {
        self.z(self.n - 1)
    }
}

/// A travelling-wave candidate on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(PwError::Argument(format!(
                "value count {} does not match grid node count {}",
                values.len(),
                grid.n
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(PwError::Numeric("profile values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.n];
        Self { grid, values }
    }

    /// Ramp profile: 0 for z ≤ 0, Λz on [0, L], ΛL beyond. The grid must cover
    /// the ramp plus one horizon on each side.
    pub fn piecewise_linear(lambda: f64, l: f64, grid: Grid, delta: f64) -> Result<Self> {
        if !(l > 0.0) || !lambda.is_finite() {
            return Err(PwError::Argument(format!(
                "ramp needs finite slope and length L > 0, got ({lambda}, {l})"
            )));
        }
        if grid.z_min > -delta || grid.z_max() < l + delta {
            return Err(PwError::Domain(format!(
                "grid [{}, {}] too small for ramp support [-{delta}, {}]",
                grid.z_min,
                grid.z_max(),
                l + delta
            )));
        }
        let values = (0..grid.n)
            .map(|i| {
                let z = grid.z(i);
                lambda * z.clamp(0.0, l)
            })
            .collect();
        Ok(Profile { grid, values }.normalize_origin())
    }

    /// Kink profile (Λ/√β) tanh(βz); the grid must cover |z| ≤ 8/β so the tails
    /// are flat to near machine precision.
    pub fn tanh_profile(lambda: f64, beta: f64, grid: Grid) -> Result<Self> {
        if !(beta > 0.0) || !lambda.is_finite() {
            return Err(PwError::Argument(format!(
                "tanh profile needs beta > 0, got ({lambda}, {beta})"
            )));
        }
        let reach = 8.0 / beta;
        if grid.z_min > -reach || grid.z_max() < reach {
            return Err(PwError::Domain(format!(
                "grid [{}, {}] too small for tanh support [|z| <= {reach}]",
                grid.z_min,
                grid.z_max()
            )));
        }
        let amp = lambda / beta.sqrt();
        let values = (0..grid.n).map(|i| amp * (beta * grid.z(i)).tanh()).collect();
        Ok(Profile { grid, values }.normalize_origin())
    }

    /// Linear interpolation between nodes, constant extension outside.
    pub fn eval_at(&self, z: f64) -> f64 {
        let g = &self.grid;
        if z <= g.z_min {
            return self.values[0];
        }
        let last = g.n - 1;
        let s = (z - g.z_min) / g.h;
        if s >= last as f64 {
            return self.values[last];
        }
        let i = s.floor() as usize;
        let t = s - i as f64;
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }

    /// Slopes of the interpolant segments, (q_{i+1} - q_i)/h, length n-1.
    pub fn segment_slopes(&self) -> Vec<f64> {
        self.values
            .windows(2)
            .map(|w| (w[1] - w[0]) / self.grid.h)
            .collect()
    }

    /// Nodal slopes: central differences at interior nodes, one-sided at the
    /// ends (consistent with the constant extension outside).
    pub fn derivative(&self) -> Vec<f64> {
        let n = self.grid.n;
        let h = self.grid.h;
        let v = &self.values;
        let mut d = vec![0.0; n];
        d[0] = (v[1] - v[0]) / h;
        d[n - 1] = (v[n - 1] - v[n - 2]) / h;
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        d
    }

    /// Subtracts the interpolated value at z = 0, restoring q(0) = 0.
    pub fn normalize_origin(&self) -> Profile {
        let q0 = self.eval_at(0.0);
        let values = self.values.iter().map(|v| v - q0).collect();
        Profile {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Rearranged profile q̃(z) = ∫₀^z |q'(s)| ds: non-decreasing, with exactly
    /// the same discrete kinetic energy (the segment slopes only change sign).
    pub fn monotonize(&self) -> Profile {
        let mut values = Vec::with_capacity(self.grid.n);
        values.push(0.0);
        let mut acc = 0.0;
        for w in self.values.windows(2) {
            acc += (w[1] - w[0]).abs();
            values.push(acc);
        }
        Profile {
            grid: self.grid.clone(),
            values,
        }
        .normalize_origin()
    }

    /// Total rise q(+∞) - q(-∞) of the extended profile.
    pub fn total_rise(&self) -> f64 {
        self.values[self.grid.n - 1] - self.values[0]
    }

    /// Shifts the z-axis so the half-rise point sits at the origin. Pure
    /// coordinate shift: nodal values are untouched, so energies are exact.
    pub fn recenter(&self) -> Result<Profile> {
        let rise = self.total_rise();
        let scale = self
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-300);
        if rise.abs() <= 1e-14 * scale {
            return Err(PwError::Degenerate(
                "cannot recenter a constant profile".into(),
            ));
        }
        let target = self.values[0] + 0.5 * rise;
        // First segment where the interpolant crosses the half-rise level.
        let mut z_star = None;
        for i in 0..self.grid.n - 1 {
            let a = self.values[i] - target;
            let b = self.values[i + 1] - target;
            if a == 0.0 {
                z_star = Some(self.grid.z(i));
                break;
            }
            if a * b < 0.0 || b == 0.0 {
                let t = a / (a - b);
                z_star = Some(self.grid.z(i) + t * self.grid.h);
                break;
            }
        }
        let z_star = z_star.ok_or_else(|| {
            PwError::Numeric("half-rise level not crossed inside the grid".into())
        })?;
        let grid = Grid {
            z_min: self.grid.z_min - z_star,
            h: self.grid.h,
            n: self.grid.n,
        };
        Ok(Profile {
            grid,
            values: self.values.clone(),
        }
        .normalize_origin())
    }

    /// Largest bond difference quotient sup |q(x+ξ) - q(x)| / m(ξ) over grid
    /// nodes x and quadrature nodes ξ ∈ [ℓ, δ].
    pub fn bond_strain_sup(&self, pot: &MicroPotential, ell: f64) -> Result<f64> {
        if !(0.0 < ell && ell < pot.delta) {
            return Err(PwError::Domain(format!(
                "need 0 < ell < delta, got ell = {ell}, delta = {}",
                pot.delta
            )));
        }
        let rule = GaussLegendre::new(64)?;
        let (nodes, _) = rule.mapped(ell, pot.delta);
        let mut sup = 0.0f64;
        for i in 0..self.grid.n {
            let x = self.grid.z(i);
            let qx = self.values[i];
            for &xi in &nodes {
                let quot = (self.eval_at(x + xi) - qx).abs() / pot.m(xi);
                sup = sup.max(quot);
            }
        }
        Ok(sup)
    }

    /// Maximum strain over the energy stencil, sup |q(x+ξ)-q(x)|/m(ξ) with ξ at
    /// the spec's quadrature nodes. Used for realized-strain bounds.
    pub fn strain_sup_for(&self, pot: &MicroPotential, quad: &QuadratureSpec) -> Result<f64> {
        let (nodes, _) = quad.xi_rule(pot.delta)?;
        let mut sup = 0.0f64;
        for i in 0..self.grid.n {
            let x = self.grid.z(i);
            let qx = self.values[i];
            for &xi in &nodes {
                sup = sup.max((self.eval_at(x + xi) - qx).abs() / pot.m(xi));
            }
        }
        Ok(sup)
    }

    pub fn scaled(&self, lambda: f64) -> Profile {
        let values = self.values.iter().map(|v| lambda * v).collect();
        Profile {
            grid: self.grid.clone(),
            values,
        }
        .normalize_origin()
    }

    pub fn translated(&self, dz: f64) -> Profile {
        let grid = Grid {
            z_min: self.grid.z_min + dz,
            h: self.grid.h,
            n: self.grid.n,
        };
        Profile {
            grid,
            values: self.values.clone(),
        }
        .normalize_origin()
    }

    /// Length of the interval around the slope peak containing the given
    /// fraction of the discrete kinetic energy. Used to size periodic windows.
    pub fn energy_width(&self, fraction: f64) -> f64 {
        let slopes = self.segment_slopes();
        let energies: Vec<f64> = slopes.iter().map(|s| s * s).collect();
        let total: f64 = energies.iter().sum();
        if total <= 0.0 {
            return self.grid.h;
        }
        let peak = energies
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let mut acc = energies[peak];
        let (mut lo, mut hi) = (peak, peak);
        while acc < fraction * total && (lo > 0 || hi + 1 < energies.len()) {
            let left = if lo > 0 { energies[lo - 1] } else { -1.0 };
            let right = if hi + 1 < energies.len() {
                energies[hi + 1]
            } else {
                -1.0
            };
            if left >= right {
                lo -= 1;
                acc += left.max(0.0);
            } else {
                hi += 1;
                acc += right.max(0.0);
            }
        }
        ((hi - lo + 1) as f64) * self.grid.h
    }

    /// Writes the profile as CSV with header `z,q,dq` at full precision.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["z", "q", "dq"])?;
        let dq = self.derivative();
        for i in 0..self.grid.n {
            wtr.write_record(&[
                format!("{}", self.grid.z(i)),
                format!("{}", self.values[i]),
                format!("{}", dq[i]),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a `z,q,dq` CSV back into a profile, checking grid uniformity.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        {
            let headers = rdr.headers()?;
            if headers.len() != 3
                || headers.get(0).map(str::trim) != Some("z")
                || headers.get(1).map(str::trim) != Some("q")
                || headers.get(2).map(str::trim) != Some("dq")
            {
                return Err(PwError::Parse(format!(
                    "expected header z,q,dq, got {:?}",
                    headers
                )));
            }
        }
        let mut zs: Vec<f64> = Vec::new();
        let mut qs: Vec<f64> = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() != 3 {
                return Err(PwError::Parse(format!(
                    "row {} has {} fields, expected 3",
                    zs.len() + 1,
                    record.len()
                )));
            }
            let z: f64 = record[0]
                .trim()
                .parse()
                .map_err(|e| PwError::Parse(format!("bad z value {:?}: {e}", &record[0])))?;
            let q: f64 = record[1]
                .trim()
                .parse()
                .map_err(|e| PwError::Parse(format!("bad q value {:?}: {e}", &record[1])))?;
            let _dq: f64 = record[2]
                .trim()
                .parse()
                .map_err(|e| PwError::Parse(format!("bad dq value {:?}: {e}", &record[2])))?;
            if !z.is_finite() || !q.is_finite() {
                return Err(PwError::Parse("non-finite profile entry".into()));
            }
            zs.push(z);
            qs.push(q);
        }
        if zs.len() < 3 {
            return Err(PwError::Parse(format!(
                "profile needs at least 3 rows, got {}",
                zs.len()
            )));
        }
        let n = zs.len();
        let h = (zs[n - 1] - zs[0]) / (n - 1) as f64;
        if !h.is_finite() || h <= 0.0 {
            return Err(PwError::Parse(format!("non-increasing z column, h = {h}")));
        }
        for (i, &z) in zs.iter().enumerate() {
            let expect = zs[0] + h * i as f64;
            if (z - expect).abs() > 1e-9 * (1.0 + z.abs()) {
                return Err(PwError::Parse(format!(
                    "non-uniform z spacing at row {i}: {z} vs expected {expect}"
                )));
            }
        }
        Profile::new(Grid::new(zs[0], h, n)?, qs)
    }

    /// Entry point for parsing untrusted CSV bytes.
    pub fn from_csv_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_csv(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn small_grid() -> Grid {
        Grid::new(-2.0, 0.25, 25).unwrap() // covers [-2, 4]
    }

    #[test]
    fn piecewise_linear_basics() {
        let g = Grid::new(-2.0, 0.125, 41).unwrap(); // [-2, 3]
        let p = Profile::piecewise_linear(1.0, 2.0, g.clone(), 1.0).unwrap();
        assert_abs_diff_eq!(p.eval_at(1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eval_at(-1.5), 0.0);
        assert_abs_diff_eq!(p.eval_at(2.7), 2.0, epsilon = 1e-15);
        let zero = Profile::piecewise_linear(0.0, 2.0, g.clone(), 1.0);
        // Lambda = 0 is fine: identically zero
        assert!(zero.unwrap().values.iter().all(|&v| v == 0.0));
        // too-small grid rejected
        assert!(Profile::piecewise_linear(1.0, 5.0, g, 1.0).is_err());
    }

    #[test]
    fn tanh_profile_basics() {
        let g = Grid::symmetric(10.0, 0.05).unwrap();
        let p = Profile::tanh_profile(1.0, 1.0, g.clone()).unwrap();
        assert_abs_diff_eq!(p.eval_at(0.0), 0.0, epsilon = 1e-12);
        // analytic slope at the origin is Λ√β sech²(0) = 1
        let d = p.derivative();
        let mid = ((0.0 - g.z_min) / g.h).round() as usize;
        assert_relative_eq!(d[mid], 1.0, max_relative = 1e-3);
        assert!(Profile::tanh_profile(1.0, 0.5, g, ).is_err());
    }

    #[test]
    fn eval_at_interpolation() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let p = Profile::new(g, vec![0.0, 2.0, 6.0]).unwrap();
        assert_abs_diff_eq!(p.eval_at(1.0), 2.0);
        assert_abs_diff_eq!(p.eval_at(0.5), 1.0);
        assert_abs_diff_eq!(p.eval_at(1.5), 4.0);
        assert_abs_diff_eq!(p.eval_at(99.0), 6.0);
        assert_abs_diff_eq!(p.eval_at(-99.0), 0.0);
    }

    #[test]
    fn derivative_of_ramp_and_constant() {
        let g = Grid::new(-2.0, 0.125, 41).unwrap();
        let ramp = Profile::piecewise_linear(2.0, 2.5, g.clone(), 0.25).unwrap();
        let d = ramp.derivative();
        // interior of the ramp away from kinks
        let i = ((1.0 - g.z_min) / g.h).round() as usize;
        assert_abs_diff_eq!(d[i], 2.0, epsilon = 1e-12);
        let c = Profile::new(g, vec![3.0; 41]).unwrap();
        assert!(c.derivative().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn monotonize_sawtooth() {
        let g = Grid::new(0.0, 1.0, 4).unwrap();
        let p = Profile::new(g, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let m = p.monotonize();
        let slopes = m.segment_slopes();
        assert_eq!(slopes, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn recenter_ramp_and_translation_invariance() {
        let g = Grid::new(-2.0, 0.125, 41).unwrap();
        let p = Profile::piecewise_linear(1.0, 2.0, g, 1.0).unwrap();
        let r = p.recenter().unwrap();
        // midpoint of the ramp (z = 1) moves to the origin
        assert_abs_diff_eq!(r.eval_at(0.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.grid.z_min, -3.0, epsilon = 1e-12);

        let shifted = p.translated(3.0);
        let r2 = shifted.recenter().unwrap();
        assert_abs_diff_eq!(r2.grid.z_min, r.grid.z_min, epsilon = 1e-12);
        for (a, b) in r.values.iter().zip(r2.values.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }

        let c = Profile::new(Grid::new(0.0, 1.0, 3).unwrap(), vec![1.0; 3]).unwrap();
        assert!(c.recenter().is_err());
    }

    #[test]
    fn recenter_symmetric_tanh_is_fixed_point() {
        let g = Grid::symmetric(10.0, 0.05).unwrap();
        let p = Profile::tanh_profile(1.0, 1.0, g).unwrap();
        let r = p.recenter().unwrap();
        assert_abs_diff_eq!(r.grid.z_min, p.grid.z_min, epsilon = 1e-9);
        let rr = r.recenter().unwrap();
        assert_abs_diff_eq!(rr.grid.z_min, r.grid.z_min, epsilon = 1e-9);
    }

    #[test]
    fn bond_strain_sup_cases() {
        let pot = MicroPotential::silling(1.0).unwrap();
        let g = Grid::new(-2.0, 0.0625, 321).unwrap(); // [-2, 18]
        let zero = Profile::zeros(g.clone());
        assert_abs_diff_eq!(zero.bond_strain_sup(&pot, 0.1).unwrap(), 0.0);
        let p = Profile::piecewise_linear(1.5, 15.0, g, 1.0).unwrap();
        // quotient Λξ/ξ = Λ inside a long ramp
        assert_relative_eq!(
            p.bond_strain_sup(&pot, 0.1).unwrap(),
            1.5,
            max_relative = 1e-12
        );
        // for a monotone profile the sup is attained with positive sign
        let rule = GaussLegendre::new(64).unwrap();
        let (nodes, _) = rule.mapped(0.1, 1.0);
        let mut signed_max = f64::NEG_INFINITY;
        for i in 0..p.grid.n {
            let x = p.grid.z(i);
            for &xi in &nodes {
                signed_max = signed_max.max((p.eval_at(x + xi) - p.values[i]) / pot.m(xi));
            }
        }
        assert_relative_eq!(signed_max, 1.5, max_relative = 1e-12);
    }

    #[test]
    fn shallow_tanh_bond_increment_matches_direct_sampling() {
        // sup_z (q(z+delta) - q(z)) = 2(Λ/√β) tanh(βδ/2) ≈ Λ√β δ for small β
        let (lambda, beta, delta) = (1.0, 0.01, 1.0);
        let g = Grid::symmetric(8.0 / beta + 2.0, 0.05).unwrap();
        let p = Profile::tanh_profile(lambda, beta, g.clone()).unwrap();
        let mut sup = 0.0f64;
        for i in 0..g.n {
            let z = g.z(i);
            sup = sup.max(p.eval_at(z + delta) - p.values[i]);
        }
        let exact = 2.0 * (lambda / beta.sqrt()) * (beta * delta / 2.0).tanh();
        assert_relative_eq!(sup, exact, max_relative = 1e-6);
        assert!(sup <= lambda * beta.sqrt() * delta);
    }

    #[test]
    fn csv_round_trip_exact() {
        let g = small_grid();
        let p = Profile::new(
            g,
            (0..25).map(|i| ((i * i) as f64 * 0.173).sin()).collect(),
        )
        .unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let q = Profile::read_csv(buf.as_slice()).unwrap();
        assert_eq!(p.values, q.values);
        assert_eq!(p.grid.n, q.grid.n);
        assert_abs_diff_eq!(p.grid.z_min, q.grid.z_min);
    }

    #[test]
    fn csv_rejects_malformed() {
        assert!(Profile::from_csv_bytes(b"z,q\n1,2\n").is_err());
        assert!(Profile::from_csv_bytes(b"z,q,dq\n0,0,0\n1,1,1\n").is_err()); // too few rows
        assert!(Profile::from_csv_bytes(b"z,q,dq\n0,0,0\n1,1,1\nx,2,1\n").is_err());
        assert!(Profile::from_csv_bytes(b"z,q,dq\n0,0,0\n1,1,1\n1,2,1\n").is_err()); // non-uniform
        assert!(Profile::from_csv_bytes(b"z,q,dq\n0,nan,0\n1,1,1\n2,2,1\n").is_err());
    }

    proptest! {
        #[test]
        fn monotonize_preserves_kinetic_and_is_idempotent(
            vals in prop::collection::vec(-10.0f64..10.0, 8..40)
        ) {
            let n = vals.len();
            let g = Grid::new(-1.0, 0.25, n).unwrap();
            let p = Profile::new(g, vals).unwrap();
            let m = p.monotonize();
            let t_in: f64 = p.segment_slopes().iter().map(|s| s * s).sum();
            let t_out: f64 = m.segment_slopes().iter().map(|s| s * s).sum();
            prop_assert!((t_in - t_out).abs() <= 1e-12 * t_in.max(1e-30));
            prop_assert!(m.segment_slopes().iter().all(|&s| s >= 0.0));
            let mm = m.monotonize();
            for (a, b) in m.values.iter().zip(mm.values.iter()) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }

        #[test]
        fn eval_at_is_exact_on_nodes(vals in prop::collection::vec(-5.0f64..5.0, 3..20)) {
            let n = vals.len();
            let g = Grid::new(-2.0, 0.5, n).unwrap();
            let p = Profile::new(g.clone(), vals.clone()).unwrap();
            for i in 0..n {
                prop_assert_eq!(p.eval_at(g.z(i)), vals[i]);
            }
        }
    }
}
