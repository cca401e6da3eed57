//! The avoided region around the backward orbit of `∞`.
//!
//! In the dilation coordinate `w = h(z)` the map becomes `f(w) = kw` and the
//! backward orbit of `h(∞) = 1` is `{1/kⁿ}`, accumulating at the repelling
//! fixed point `0`. The region `R_f(1)` is the central disk `|w| < |k|δ`
//! together with the disks `D_n(δ) = {|w − 1/kⁿ| < δ}` for `n = 1..N`; its
//! pullback `R_g(∞) = h⁻¹(R_f(1))` is the region perturbed orbits of `g`
//! must start outside of.

use serde::{Deserialize, Serialize};

use crate::algebra::{Complex, ExtendedComplex, LoxodromicData, MoebiusMap};
use crate::error::{Error, Result};
use crate::geometry::{apollonius_curve, curve_distance, Circle, ConjugatorH};

/// Margin band used by the conservative membership test.
pub const AVOIDANCE_BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvoidedRegionF {
    pub k: Complex,
    pub delta: f64,
    pub delta0: f64,
    pub t: f64,
    /// Number of explicit disks `D_1..D_N`.
    pub n_disks: usize,
    /// `|k|δ`, radius of the central disk.
    pub outer_radius: f64,
    /// `(log(|k| − 1) + log δ)/log|k|`; `n_disks` is strictly above it.
    pub disk_count_bound: f64,
    /// Centers `1/kⁿ`, `n = 1..=n_disks`.
    pub centers: Vec<Complex>,
}

/// Smallest `N ≥ 1` for which the δ-disk about `1/k^(N+1)` sits inside the
/// central disk `|w| < |k|δ`; then every later `1/kⁿ` is covered and the
/// complement of the truncated union stays forward invariant.
pub fn covering_disk_count(kabs: f64, delta: f64) -> usize {
    let mut n = 1usize;
    while kabs.powi(-(n as i32 + 1)) + delta > kabs * delta {
        n += 1;
    }
    n
}

pub fn build_avoided_f(k: Complex, delta0: f64, t: f64) -> Result<AvoidedRegionF> {
    let kabs = k.norm();
    if !(kabs > 1.0) {
        return Err(Error::InvalidParameter(format!("|k| must exceed 1, got {kabs}")));
    }
    if !(delta0 > 0.0 && delta0.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta0 must be positive, got {delta0}")));
    }
    if !(t > 1.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must exceed 1, got {t}")));
    }
    let delta = t * delta0 / (kabs - 1.0);
    let limit = (k - 1.0).norm() / kabs;
    if delta >= limit {
        return Err(Error::DeltaTooLarge { delta, limit });
    }
    let disk_count_bound = ((kabs - 1.0).ln() + delta.ln()) / kabs.ln();
    let from_bound = if disk_count_bound < 0.0 { 1 } else { disk_count_bound.floor() as usize + 1 };
    let n_disks = from_bound.max(covering_disk_count(kabs, delta)).max(1);
    let kinv = k.inv();
    let centers = std::iter::successors(Some(kinv), |c| Some(c * kinv)).take(n_disks).collect();
    Ok(AvoidedRegionF { k, delta, delta0, t, n_disks, outer_radius: kabs * delta, disk_count_bound, centers })
}

impl AvoidedRegionF {
    /// `w ∈ R_f(1) ⟺ |w| < |k|δ  or  |w − 1/kⁿ| < δ` for some `n ≤ N`.
    pub fn contains(&self, w: Complex) -> bool {
        w.norm() < self.outer_radius || self.centers.iter().any(|c| (w - c).norm() < self.delta)
    }

    /// Membership that also counts the `1e-12` boundary band as inside.
    pub fn contains_conservative(&self, w: Complex) -> bool {
        let band = AVOIDANCE_BOUNDARY_TOL * (1.0 + self.outer_radius);
        w.norm() < self.outer_radius + band || self.centers.iter().any(|c| (w - c).norm() < self.delta + band)
    }

    pub fn contains_extended(&self, w: ExtendedComplex) -> bool {
        match w {
            ExtendedComplex::Infinity => false,
            ExtendedComplex::Finite(w) => self.contains(w),
        }
    }

    /// True when the closed disk `|w − center| ≤ radius` misses the region.
    pub fn disjoint_from_disk(&self, center: Complex, radius: f64) -> bool {
        center.norm() - radius >= self.outer_radius
            && self.centers.iter().all(|c| (center - c).norm() - radius >= self.delta)
    }

    /// Distance from `w` to the region (0 inside).
    pub fn distance(&self, w: Complex) -> f64 {
        let central = (w.norm() - self.outer_radius).max(0.0);
        self.centers
            .iter()
            .map(|c| ((w - c).norm() - self.delta).max(0.0))
            .fold(central, f64::min)
    }

    pub fn kabs(&self) -> f64 {
        self.k.norm()
    }
}

/// `R_g(∞) = h⁻¹(R_f(1))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvoidedRegionG {
    pub base: AvoidedRegionF,
    pub h: ConjugatorH,
}

/// Pullback of one disk of `R_f(1)` to the z-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PulledBackDisk {
    Bounded(Circle),
    /// The w-disk contains `1 = h(∞)`; the pullback is the exterior of this circle.
    Exterior(Circle),
}

impl PulledBackDisk {
    pub fn circle(&self) -> Circle {
        match self {
            PulledBackDisk::Bounded(c) | PulledBackDisk::Exterior(c) => *c,
        }
    }
}

/// Image under `h⁻¹(w) = α + (α − β)/(w − 1)` of the disk `|w − q| < ρ`.
fn pull_back_disk(h: &ConjugatorH, q: Complex, rho: f64) -> PulledBackDisk {
    let u = q - 1.0;
    let den = u.norm_sqr() - rho * rho;
    let ab = h.alpha - h.beta;
    let center = h.alpha + ab * u.conj() / den;
    let circle = Circle { center, radius: ab.norm() * rho / den.abs() };
    if den > 0.0 {
        PulledBackDisk::Bounded(circle)
    } else {
        PulledBackDisk::Exterior(circle)
    }
}

impl AvoidedRegionG {
    pub fn new(base: AvoidedRegionF, data: &LoxodromicData) -> Self {
        Self { base, h: ConjugatorH::new(data) }
    }

    pub fn contains(&self, z: ExtendedComplex) -> bool {
        self.base.contains_extended(self.h.apply(z))
    }

    pub fn contains_finite(&self, z: Complex) -> bool {
        self.contains(ExtendedComplex::Finite(z))
    }

    pub fn contains_conservative(&self, z: Complex) -> bool {
        match self.h.apply(ExtendedComplex::Finite(z)) {
            ExtendedComplex::Infinity => false,
            ExtendedComplex::Finite(w) => self.base.contains_conservative(w),
        }
    }

    /// `g⁻ⁿ(∞) = h⁻¹(1/kⁿ)`.
    pub fn backward_orbit_point(&self, n: u32) -> ExtendedComplex {
        self.h.inverse(ExtendedComplex::Finite(self.base.k.inv().powu(n)))
    }

    /// The central region `ℂ ∖ B_{|k|δ}` as a generalized disk in z.
    pub fn central_region(&self) -> PulledBackDisk {
        let data = LoxodromicData {
            alpha: self.h.alpha,
            beta: self.h.beta,
            k: self.base.k,
            c_alpha_d: Complex::new(0.0, 0.0),
            c_beta_d: Complex::new(0.0, 0.0),
        };
        let rho = self.base.outer_radius;
        match apollonius_curve(&data, rho).as_circle() {
            Some(c) if rho < 1.0 => PulledBackDisk::Bounded(c),
            Some(c) => PulledBackDisk::Exterior(c),
            None => PulledBackDisk::Exterior(Circle { center: self.h.alpha, radius: f64::INFINITY }),
        }
    }

    /// `h⁻¹(D_n)` for `n = 1..N`.
    pub fn disk_pullbacks(&self) -> Vec<PulledBackDisk> {
        self.base.centers.iter().map(|&q| pull_back_disk(&self.h, q, self.base.delta)).collect()
    }
}

/// The two closed-form terms of the admissible perturbation bound plus the
/// w-transfer term, and their minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBound {
    /// `dist(∂B_{|k|δ}, B_{|k|²δ})`.
    pub apollonius_term: f64,
    /// `δ√|k||k − 1|² / ({2|k − 1|² + 2|c|δ√|k|}^½ |c|(δ|k| + 1))`.
    pub disk_term: f64,
    /// Largest ε for which every ε-disk about a point whose dilation image lies
    /// within `|k|δ` of some `1/kⁿ` maps into a w-disk of radius `(|k| − 1)δ`.
    pub transfer_term: f64,
    pub value: f64,
}

/// Admissible perturbation size for the avoided region with parameter `δ`.
pub fn epsilon_bound(data: &LoxodromicData, g: &MoebiusMap, delta: f64) -> Result<EpsilonBound> {
    if g.pole().is_none() {
        return Err(Error::LinearMap);
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let kabs = data.k_abs();
    let s = kabs.sqrt();
    let km1 = data.k_minus_one_abs();
    let cabs = g.c.norm();

    let inner = apollonius_curve(data, kabs * delta);
    let outer = apollonius_curve(data, kabs * kabs * delta);
    let apollonius_term = curve_distance(&inner, &outer);

    let disk_term = delta * s * km1 * km1
        / ((2.0 * km1 * km1 + 2.0 * cabs * delta * s).sqrt() * cabs * (delta * kabs + 1.0));

    let transfer_term =
        noise_transfer_limit(data.fixed_point_distance(), 1.0 + 1.0 / kabs + kabs * delta, (kabs - 1.0) * delta);

    let value = apollonius_term.min(disk_term).min(transfer_term);
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::EmptyMargin { value });
    }
    Ok(EpsilonBound { apollonius_term, disk_term, transfer_term, value })
}

pub fn epsilon_max(data: &LoxodromicData, g: &MoebiusMap, delta: f64) -> Result<f64> {
    epsilon_bound(data, g, delta).map(|b| b.value)
}

/// Largest `ε` such that for every `p` with `|h(p) − 1| ≤ w_reach` the image
/// `h(U(p, ε))` has diameter at most `w_margin`.
///
/// The image has radius `ε|α − β|/(|p − α|² − ε²)` and `|p − α| = |α − β|/|h(p) − 1|`,
/// so the condition is the quadratic `2ε|α−β| ≤ w_margin(L² − ε²)` with
/// `L = |α − β|/w_reach`.
pub fn noise_transfer_limit(fixed_point_distance: f64, w_reach: f64, w_margin: f64) -> f64 {
    let ab = fixed_point_distance;
    let x = w_margin * ab / w_reach;
    // positive root of w_margin·ε² + 2|α−β|ε − w_margin·L² = 0, in cancellation-free form
    x * x / (ab + (ab * ab + x * x).sqrt()) / w_margin
}

/// `h⁻¹(D_1)` in closed form: center
/// `(|k − 1|²(−d/c) − δ²|k|²α)/(|k − 1|² − δ²|k|²)`, radius
/// `δ|k|√|k||k − 1|/(|c|(|k − 1|² − δ²|k|²))`.
pub fn h_inv_d1(data: &LoxodromicData, g: &MoebiusMap, delta: f64) -> Result<Circle> {
    let pole = g.pole().ok_or(Error::LinearMap)?;
    let kabs = data.k_abs();
    let km1 = data.k_minus_one_abs();
    let limit = km1 / kabs;
    if !(delta > 0.0) || delta >= limit {
        return Err(Error::DeltaTooLarge { delta, limit });
    }
    let den = km1 * km1 - delta * delta * kabs * kabs;
    let center = (pole * (km1 * km1) - data.alpha * (delta * delta * kabs * kabs)) / den;
    let radius = delta * kabs * kabs.sqrt() * km1 / (g.c.norm() * den);
    Ok(Circle { center, radius })
}

/// The disk `D_{ε0}` about `−d/c` with `ε0 = δ|k|²|α − β|/(2|k − 1|²)`,
/// which lies inside `h⁻¹(D_1)`.
pub fn d_epsilon0_disk(data: &LoxodromicData, g: &MoebiusMap, delta: f64) -> Result<Circle> {
    let outer = h_inv_d1(data, g, delta)?;
    let pole = g.pole().ok_or(Error::LinearMap)?;
    let km1 = data.k_minus_one_abs();
    let kabs = data.k_abs();
    let radius = delta * kabs * kabs * data.fixed_point_distance() / (2.0 * km1 * km1);
    debug_assert!((pole - outer.center).norm() + radius <= outer.radius * (1.0 + 1e-12));
    Ok(Circle { center: pole, radius })
}

/// `sup |g′|` outside `R_g(∞)` is at most `4|k − 1|²/(δ²|k|³)`.
pub fn g_prime_sup_bound(data: &LoxodromicData, delta: f64) -> Result<f64> {
    let kabs = data.k_abs();
    let km1 = data.k_minus_one_abs();
    let limit = km1 / kabs;
    if !(delta > 0.0) || delta >= limit {
        return Err(Error::DeltaTooLarge { delta, limit });
    }
    Ok(4.0 * km1 * km1 / (delta * delta * kabs.powi(3)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::example_map;

    fn setup() -> (MoebiusMap, LoxodromicData, AvoidedRegionG) {
        let g = example_map();
        let data = g.fixed_points().unwrap();
        let f = build_avoided_f(data.k, 0.005, 2.0).unwrap();
        (g, data, AvoidedRegionG::new(f, &data))
    }

    #[test]
    fn example_parameters() {
        let (_, data, rg) = setup();
        let f = &rg.base;
        assert!((f.delta - 0.01 / 0.5625).abs() < 1e-15);
        // (log 0.5625 + log 0.017778)/log 1.5625 ≈ −10.32
        assert!((f.disk_count_bound - (0.5625f64.ln() + f.delta.ln()) / 1.5625f64.ln()).abs() < 1e-12);
        assert!(f.disk_count_bound < -10.0 && f.disk_count_bound > -10.5);
        assert!(f.n_disks as f64 > f.disk_count_bound);
        assert_eq!(f.n_disks, covering_disk_count(data.k_abs(), f.delta));
        assert!((f.outer_radius - 1.5625 * f.delta).abs() < 1e-15);
    }

    #[test]
    fn truncation_at_the_smaller_count_breaks_invariance() {
        // with a single disk, 1/k² is outside the region but k·(1/k²) = 1/k is inside
        let (_, data, rg) = setup();
        let mut one = rg.base.clone();
        one.n_disks = 1;
        one.centers.truncate(1);
        let w = data.k.inv().powu(2);
        assert!(!one.contains(w));
        assert!(one.contains(data.k * w));
        assert!(!rg.base.contains(data.k * w) || rg.base.contains(w));
    }

    #[test]
    fn real_k_four() {
        let f = build_avoided_f(Complex::new(4.0, 0.0), 0.75, 2.0).unwrap();
        assert!((f.delta - 0.5).abs() < 1e-15);
        assert!((f.disk_count_bound - (3f64.ln() + 0.5f64.ln()) / 4f64.ln()).abs() < 1e-12);
        assert!(f.n_disks >= 1);
    }

    #[test]
    fn construction_errors() {
        let k = Complex::new(0.4375, 1.5);
        assert!(matches!(build_avoided_f(k, 0.5, 2.0), Err(Error::DeltaTooLarge { .. })));
        assert!(build_avoided_f(k, 0.005, 1.0).is_err());
        assert!(build_avoided_f(Complex::new(0.5, 0.0), 0.005, 2.0).is_err());
    }

    #[test]
    fn f_membership() {
        let (_, data, rg) = setup();
        let f = &rg.base;
        assert!(f.contains(Complex::new(0.0, 0.0)));
        for c in &f.centers {
            assert!(f.contains(*c));
        }
        let w = Complex::from_polar(2.0 * f.outer_radius, 2.0);
        if f.centers.iter().all(|c| (w - c).norm() > f.delta) {
            assert!(!f.contains(w));
        }
        assert!(!f.contains(Complex::new(1.0, 0.0)));
        assert!(f.contains(data.k.inv()));
    }

    #[test]
    fn g_membership() {
        let (g, data, rg) = setup();
        assert!(rg.contains(ExtendedComplex::Finite(g.pole().unwrap())));
        assert!(rg.contains(ExtendedComplex::Finite(data.beta)));
        assert!(!rg.contains(ExtendedComplex::Finite(data.alpha)));
        assert!(!rg.contains(ExtendedComplex::Infinity));
        for n in 1..=(rg.base.n_disks as u32 + 5) {
            assert!(rg.contains(rg.backward_orbit_point(n)), "g^-{n}(inf) not covered");
        }
    }

    #[test]
    fn pulled_back_disks_match_membership() {
        let (_, _, rg) = setup();
        for pb in rg.disk_pullbacks() {
            let PulledBackDisk::Bounded(circle) = pb else { panic!("expected bounded pullback") };
            for z in (Circle { radius: circle.radius * 0.999, ..circle }).sample(90) {
                assert!(rg.contains_finite(z));
            }
        }
    }

    #[test]
    fn epsilon_terms() {
        let (g, data, rg) = setup();
        let b = epsilon_bound(&data, &g, rg.base.delta).unwrap();
        assert!(b.apollonius_term > 0.4 && b.apollonius_term < 0.5);
        assert!(b.disk_term > 0.6 && b.disk_term < 0.62);
        assert!(b.value > 0.0 && b.value <= b.transfer_term);
        let half = epsilon_bound(&data, &g, rg.base.delta / 2.0).unwrap();
        let ratio = half.disk_term / b.disk_term;
        assert!(ratio > 0.4 && ratio < 0.6);
    }

    #[test]
    fn d1_pullback_and_epsilon0() {
        let (g, data, rg) = setup();
        let delta = rg.base.delta;
        let d1 = h_inv_d1(&data, &g, delta).unwrap();
        let exact = rg.disk_pullbacks()[0].circle();
        assert!((d1.center - exact.center).norm() < 1e-10 * exact.radius);
        assert!((d1.radius - exact.radius).abs() < 1e-10 * exact.radius);
        let e0 = d_epsilon0_disk(&data, &g, delta).unwrap();
        for z in e0.sample(720) {
            assert!(rg.contains_finite(z));
        }
        assert!(matches!(h_inv_d1(&data, &g, 2.0), Err(Error::DeltaTooLarge { .. })));
    }

    #[test]
    fn g_prime_bound_at_maximal_delta() {
        let (_, data, _) = setup();
        let limit = data.k_minus_one_abs() / data.k_abs();
        let b = g_prime_sup_bound(&data, limit * (1.0 - 1e-12)).unwrap();
        // substitution gives 4|k−1|²|k|²/(|k−1|²|k|³) = 4/|k|
        assert!((b - 4.0 / data.k_abs()).abs() < 1e-9);
        let km1sq = 0.5625f64.powi(2) + 1.5f64.powi(2);
        let delta = 0.01 / 0.5625;
        let expected = 4.0 * km1sq / (delta * delta * 1.5625f64.powi(3));
        assert!((g_prime_sup_bound(&data, delta).unwrap() - expected).abs() < 1e-9 * expected);
    }
}
