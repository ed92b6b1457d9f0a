//! Discrete-ordinate angular quadratures.
//!
//! Two families are provided: the slab Gauss–Legendre set used for 1D
//! problems (`|S| = 2`, directions are the cosines `(x_k, 0, 0)`), and the
//! triangular `S_N` set on the unit sphere (Gauss–Legendre in the polar
//! cosine, equispaced azimuths at half offsets inside each octant).
//!
//! Every quadrature is expected to satisfy the moment identities
//!
//! ```text
//! Σ μ_k = |S|,  Σ μ_k Ω_k = 0,  Σ Ω_k |c·Ω_k| = 0,  Σ μ_k Ω_k⊗Ω_k = |S|/3 I
//! ```
//!
//! on the axes the quadrature is active on; see [`AngularQuadrature::defects`].

use std::f64::consts::PI;

use crate::geometry::Vec3;
use crate::{Error, Result};

/// Spatial reduction the quadrature is meant for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DimensionMode {
    /// 1D slab geometry: directions are cosines along `x`, `|S| = 2`.
    Slab1D,
    /// 2D `(x, y)` geometry with directions on the unit sphere, `|S| = 4π`.
    XY2D,
}

/// A finite set of directions and weights `(μ_k, Ω_k)`.
#[derive(Clone, Debug)]
pub struct AngularQuadrature {
    directions: Vec<Vec3>,
    weights: Vec<f64>,
    sphere_measure: f64,
    mode: DimensionMode,
    z_folded: bool,
}

/// Probe vectors for the odd absolute moment `Σ Ω_k |c·Ω_k|`.
const PROBES: [[f64; 3]; 8] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, 1.0, 0.0],
    [1.0, -1.0, 0.5],
    [0.3, 0.7, -0.2],
    [1.0, 1.0, 1.0],
    [-0.4, 0.2, 0.9],
];

/// Largest deviation from each quadrature identity.
#[derive(Clone, Copy, Debug, Default)]
pub struct MomentDefects {
    pub unit_norm: f64,
    pub weight_sum: f64,
    pub first_moment: f64,
    pub second_moment: f64,
    pub odd_abs_moment: f64,
    pub antipodal: f64,
}

impl MomentDefects {
    /// Names of the identities violated at the contract tolerances
    /// (all relative to `|S|` except the unit-norm and probe checks).
    pub fn failures(&self, sphere_measure: f64) -> Vec<&'static str> {
        let s = sphere_measure;
        let mut out = Vec::new();
        if self.unit_norm > 1e-12 {
            out.push("unit_norm");
        }
        if self.weight_sum > 1e-12 * s {
            out.push("weight_sum");
        }
        if self.first_moment > 1e-12 * s {
            out.push("first_moment");
        }
        if self.second_moment > 1e-10 * s {
            out.push("second_moment");
        }
        if self.odd_abs_moment > 1e-10 {
            out.push("odd_abs_moment");
        }
        if self.antipodal > 1e-12 {
            out.push("antipodal");
        }
        out
    }
}

/// `n`-point Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if !n.is_multiple_of(2) {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

impl AngularQuadrature {
    /// Slab Gauss–Legendre set with `n_angles` cosines in increasing order.
    pub fn slab(n_angles: usize) -> Result<Self> {
        if n_angles < 2 || !n_angles.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "slab quadrature needs an even number of angles >= 2, got {n_angles}"
            )));
        }
        let (x, w) = gauss_legendre(n_angles);
        Ok(Self {
            directions: x.into_iter().map(|xk| Vec3::new(xk, 0.0, 0.0)).collect(),
            weights: w,
            sphere_measure: 2.0,
            mode: DimensionMode::Slab1D,
            z_folded: false,
        })
    }

    /// Triangular `S_N` set on the full sphere, `N(N+2)` directions.
    ///
    /// Ordering: upper hemisphere first; inside a hemisphere the quadrants
    /// `(+,+), (-,+), (-,-), (+,-)`; inside a quadrant the polar levels from
    /// the equator towards the pole, then the azimuths in increasing angle.
    /// Direction 0 is therefore the near-equator, small-azimuth direction of
    /// the first octant.
    pub fn triangular_sn(order: usize) -> Result<Self> {
        if order < 2 || !order.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "triangular S_N needs an even order >= 2, got {order}"
            )));
        }
        let (mu, w) = gauss_legendre(order);
        let half = order / 2;
        // Positive polar cosines, level p = 1 nearest the pole.
        let levels: Vec<(usize, f64, f64)> = (1..=half).map(|p| (p, mu[order - p], w[order - p])).collect();
        let quadrant_signs = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
        let mut directions = Vec::with_capacity(order * (order + 2));
        let mut weights = Vec::with_capacity(order * (order + 2));
        for zsign in [1.0, -1.0] {
            for &(sx, sy) in &quadrant_signs {
                for &(p, xi, wp) in levels.iter().rev() {
                    let s = (1.0 - xi * xi).sqrt();
                    for q in 1..=p {
                        let phi = 0.5 * PI * (q as f64 - 0.5) / p as f64;
                        let (c, sn) = (phi.cos(), phi.sin());
                        directions.push(Vec3::new(sx * s * c, sy * s * sn, zsign * xi));
                        weights.push(wp * (2.0 * PI) / (4.0 * p as f64));
                    }
                }
            }
        }
        Ok(Self {
            directions,
            weights,
            sphere_measure: 4.0 * PI,
            mode: DimensionMode::XY2D,
            z_folded: false,
        })
    }

    /// Merges each direction with its mirror image across the `xy` plane,
    /// keeping the `Ω_z > 0` representative with doubled weight.
    ///
    /// For 2D problems whose data do not depend on `Ω_z`'s sign the solution
    /// is mirror-symmetric, so the folded set gives the same answer with half
    /// the unknowns. Direction indices of the upper hemisphere are kept.
    pub fn fold_z(&self) -> Self {
        if self.mode == DimensionMode::Slab1D || self.z_folded {
            return self.clone();
        }
        let (directions, weights) = self
            .directions
            .iter()
            .zip(&self.weights)
            .filter(|(d, _)| d.z() > 0.0)
            .map(|(d, w)| (*d, 2.0 * w))
            .unzip();
        Self {
            directions,
            weights,
            sphere_measure: self.sphere_measure,
            mode: self.mode,
            z_folded: true,
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    pub fn direction(&self, k: usize) -> Vec3 {
        self.directions[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn sphere_measure(&self) -> f64 {
        self.sphere_measure
    }

    pub fn mode(&self) -> DimensionMode {
        self.mode
    }

    pub fn is_z_folded(&self) -> bool {
        self.z_folded
    }

    /// Angular average `(1/|S|) Σ μ_k f_k`.
    pub fn average(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum::<f64>() / self.sphere_measure
    }

    /// Indices `k` with `Ω_k·n < 0`. Grazing directions are not inflow.
    pub fn inflow_set(&self, n: Vec3) -> Vec<usize> {
        self.directions
            .iter()
            .enumerate()
            .filter(|(_, d)| d.dot(&n) < 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    /// `δ^∂(n) = (1/|S|) Σ_{k inflow} μ_k |Ω_k·n|`.
    pub fn inflow_half_moment(&self, n: Vec3) -> f64 {
        self.inflow_set(n)
            .into_iter()
            .map(|k| self.weights[k] * self.directions[k].dot(&n).abs())
            .sum::<f64>()
            / self.sphere_measure
    }

    /// `(1/|S|) Σ_{k inflow(n)} μ_k |Ω_k·c| Ω_k`.
    pub fn inflow_weighted_first_moment(&self, n: Vec3, c: Vec3) -> Vec3 {
        self.inflow_set(n)
            .into_iter()
            .map(|k| self.directions[k] * (self.weights[k] * self.directions[k].dot(&c).abs()))
            .sum::<Vec3>()
            * (1.0 / self.sphere_measure)
    }

    /// Axes on which the first and odd moments must vanish.
    fn active_axes(&self) -> usize {
        match (self.mode, self.z_folded) {
            (DimensionMode::Slab1D, _) => 1,
            (DimensionMode::XY2D, true) => 2,
            (DimensionMode::XY2D, false) => 3,
        }
    }

    fn project(&self, v: Vec3) -> Vec3 {
        let mut out = Vec3::ZERO;
        out.0[..self.active_axes()].copy_from_slice(&v.0[..self.active_axes()]);
        out
    }

    /// Deviations from the quadrature identities.
    ///
    /// Slab sets are checked on the `x` axis only and their directions are
    /// cosines (`|Ω_x| ≤ 1`); folded sets are checked in the `xy` plane for
    /// the odd moments and on all axes for the second moment.
    pub fn defects(&self) -> MomentDefects {
        let s = self.sphere_measure;
        let axes = self.active_axes();
        let unit_norm = self
            .directions
            .iter()
            .map(|d| match self.mode {
                DimensionMode::Slab1D => (d.x().abs() - 1.0).max(0.0) + d.y().abs() + d.z().abs(),
                DimensionMode::XY2D => (d.norm() - 1.0).abs(),
            })
            .fold(0.0, f64::max);
        let weight_sum = (self.weights.iter().sum::<f64>() - s).abs();
        let first: Vec3 = self.directions.iter().zip(&self.weights).map(|(d, w)| *d * *w).sum();
        let first_moment = first.0[..axes].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let second_axes = if self.mode == DimensionMode::Slab1D { 1 } else { 3 };
        let mut second_moment = 0.0_f64;
        for a in 0..second_axes {
            for b in 0..second_axes {
                let m: f64 = self
                    .directions
                    .iter()
                    .zip(&self.weights)
                    .map(|(d, w)| w * d.0[a] * d.0[b])
                    .sum();
                let target = if a == b { s / 3.0 } else { 0.0 };
                second_moment = second_moment.max((m - target).abs());
            }
        }
        let mut odd_abs_moment = 0.0_f64;
        for probe in PROBES {
            let c = self.project(Vec3(probe));
            let v: Vec3 = self.directions.iter().map(|d| *d * d.dot(&c).abs()).sum();
            odd_abs_moment = odd_abs_moment.max(v.0[..axes].iter().fold(0.0, |m, x| m.max(x.abs())));
        }
        let antipodal = self
            .directions
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| {
                let target = if self.z_folded {
                    Vec3::new(-d.x(), -d.y(), d.z())
                } else {
                    -*d
                };
                self.directions
                    .iter()
                    .zip(&self.weights)
                    .map(|(e, v)| (*e - target).max_abs().max((v - w).abs()))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        MomentDefects {
            unit_norm,
            weight_sum,
            first_moment,
            second_moment,
            odd_abs_moment,
            antipodal,
        }
    }

    /// Checks every identity at the contract tolerances.
    pub fn validate(&self) -> Result<()> {
        let failures = self.defects().failures(self.sphere_measure);
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "quadrature violates {}",
                failures.join(", ")
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_gauss_legendre() {
        let q = AngularQuadrature::slab(2).unwrap();
        let r = 1.0 / 3.0_f64.sqrt();
        assert!((q.direction(0).x() + r).abs() < 1e-15);
        assert!((q.direction(1).x() - r).abs() < 1e-15);
        assert!((q.weight(0) - 1.0).abs() < 1e-15 && (q.weight(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eight_point_second_moment() {
        let q = AngularQuadrature::slab(8).unwrap();
        let m2: f64 = q
            .directions()
            .iter()
            .zip(q.weights())
            .map(|(d, w)| w * d.x() * d.x())
            .sum();
        assert!((m2 - 2.0 / 3.0).abs() < 1e-12);
        assert!(q.validate().is_ok());
        // ascending order
        assert!(q.directions().windows(2).all(|p| p[0].x() < p[1].x()));
    }

    #[test]
    fn rejects_odd_orders() {
        assert!(AngularQuadrature::slab(3).is_err());
        assert!(AngularQuadrature::slab(0).is_err());
        assert!(AngularQuadrature::triangular_sn(5).is_err());
        assert!(AngularQuadrature::triangular_sn(0).is_err());
    }

    #[test]
    fn s2_has_one_direction_per_octant() {
        let q = AngularQuadrature::triangular_sn(2).unwrap();
        assert_eq!(q.len(), 8);
        for w in q.weights() {
            assert!((w - PI / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn s6_counts_and_first_direction() {
        let q = AngularQuadrature::triangular_sn(6).unwrap();
        assert_eq!(q.len(), 48);
        let first_octant = q
            .directions()
            .iter()
            .filter(|d| d.x() > 0.0 && d.y() > 0.0 && d.z() > 0.0)
            .count();
        assert_eq!(first_octant, 6);
        // Ω_1 quoted to eight digits for the reflection benchmark.
        let d = q.direction(0);
        assert!((d.x() - 0.93802334).abs() < 1e-8);
        assert!((d.y() - 0.25134260).abs() < 1e-8);
        assert!((d.z() - 0.23861919).abs() < 1e-8);
        let folded = q.fold_z();
        assert_eq!(folded.len(), 24);
        assert_eq!(folded.direction(0), d);
    }

    #[test]
    fn s6_second_moment() {
        let q = AngularQuadrature::triangular_sn(6).unwrap();
        assert!(q.defects().second_moment < 1e-10 * 4.0 * PI);
    }

    #[test]
    fn inflow_sets() {
        let slab = AngularQuadrature::slab(8).unwrap();
        let left = slab.inflow_set(Vec3::new(-1.0, 0.0, 0.0));
        assert_eq!(left, vec![4, 5, 6, 7]);
        let q = AngularQuadrature::triangular_sn(6).unwrap();
        let n = Vec3::new(0.0, -1.0, 0.0);
        assert_eq!(q.inflow_set(n).len(), 24);
        let mut both = q.inflow_set(n);
        both.extend(q.inflow_set(-n));
        both.sort_unstable();
        let expected: Vec<usize> = (0..q.len()).filter(|&k| q.direction(k).dot(&n) != 0.0).collect();
        assert_eq!(both, expected);
    }

    #[test]
    fn grazing_directions_are_not_inflow() {
        let q = AngularQuadrature::triangular_sn(4).unwrap();
        assert!(q.inflow_set(Vec3::new(0.0, 0.0, 1.0)).len() == q.len() / 2);
        // in-plane normal: no direction of a triangular set is exactly grazing
        let n = Vec3::new(1.0, 0.0, 0.0);
        let count = q.inflow_set(n).len() + q.inflow_set(-n).len();
        assert_eq!(count, q.len());
    }

    #[test]
    fn half_moments_close_to_continuous_values() {
        for q in [
            AngularQuadrature::triangular_sn(6).unwrap(),
            AngularQuadrature::triangular_sn(6).unwrap().fold_z(),
            AngularQuadrature::triangular_sn(12).unwrap(),
        ] {
            for n in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.6, -0.8, 0.0)] {
                assert!((q.inflow_half_moment(n) - 0.25).abs() < 2e-2);
                // (1/|S|) Σ_{Ω·n<0} μ |Ω·n| Ω = -n/6 for the exact sphere.
                let mut m = q.inflow_weighted_first_moment(n, n);
                // a folded set only keeps the in-plane part
                m.0[2] = 0.0;
                assert!((m + n * (1.0 / 6.0)).norm() < 2e-2);
            }
        }
        let slab = AngularQuadrature::slab(8).unwrap();
        let n = Vec3::new(-1.0, 0.0, 0.0);
        let half: f64 = slab
            .directions()
            .iter()
            .zip(slab.weights())
            .filter(|(d, _)| d.x() > 0.0)
            .map(|(d, w)| w * d.x())
            .sum::<f64>()
            / 2.0;
        assert_eq!(slab.inflow_half_moment(n), half);
    }

    #[test]
    fn folded_set_keeps_in_plane_identities() {
        let q = AngularQuadrature::triangular_sn(8).unwrap().fold_z();
        assert!(q.validate().is_ok(), "{:?}", q.defects());
        let mz: f64 = q.directions().iter().zip(q.weights()).map(|(d, w)| w * d.z()).sum();
        assert!(mz > 1.0);
    }
}
