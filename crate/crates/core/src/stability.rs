//! Exact and perturbed orbits, and the Hyers-Ulam constants.
//!
//! Two regimes are covered. Inside `B_R` the map is a contraction with
//! constant `K = sup_{B_R} |g′|`. In the transit region `(ℂ ∖ B_R) ∖ R_g(∞)`
//! deviations may grow by at most `M = 8|k − 1|²/(δ²|k|³)` per step, but only
//! for the uniform escaping time `N`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Complex, ExtendedComplex, LoxodromicData, MoebiusMap};
use crate::avoided::{AvoidedRegionG, PulledBackDisk};
use crate::error::{Error, Result};
use crate::geometry::{br_disk, contraction_threshold};

/// Distance to the pole below which an orbit is aborted.
pub const POLE_HIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseDistribution {
    UniformDisk,
    Boundary,
    Adversarial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub epsilon: f64,
    pub seed: u64,
    pub distribution: NoiseDistribution,
}

impl PerturbationSpec {
    pub fn new(epsilon: f64, seed: u64, distribution: NoiseDistribution) -> Self {
        Self { epsilon, seed, distribution }
    }
}

/// Derives the seed of trial `index` from a master seed (SplitMix64 finalizer).
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace {
    /// Perturbed orbit `a_n`.
    pub a: Vec<ExtendedComplex>,
    /// Exact orbit `b_n` with `b_0 = a_0`.
    pub b: Vec<ExtendedComplex>,
    /// `η_n = a_{n+1} − g(a_n)`.
    pub noise: Vec<Complex>,
    /// `|a_n − b_n|`.
    pub deviations: Vec<f64>,
    pub bound_values: Vec<f64>,
}

impl OrbitTrace {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }

    /// Fills `bound_values[n] = bound(n)`.
    pub fn attach_bounds(&mut self, bound: impl Fn(usize) -> f64) {
        self.bound_values = (0..self.a.len()).map(bound).collect();
    }

    /// Smallest `bound − deviation` over the trace (negative on violation).
    pub fn worst_margin(&self) -> f64 {
        self.deviations
            .iter()
            .zip(&self.bound_values)
            .map(|(d, b)| b - d)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn exact_orbit(g: &MoebiusMap, z0: ExtendedComplex, steps: usize) -> Vec<ExtendedComplex> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(z0);
    let mut z = z0;
    for _ in 0..steps {
        z = g.apply(z);
        out.push(z);
    }
    out
}

fn deviation(a: ExtendedComplex, b: ExtendedComplex) -> f64 {
    match (a, b) {
        (ExtendedComplex::Finite(x), ExtendedComplex::Finite(y)) => (x - y).norm(),
        (ExtendedComplex::Infinity, ExtendedComplex::Infinity) => 0.0,
        _ => f64::INFINITY,
    }
}

/// Points the adversarial noise is steered towards.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdversaryTargets(pub Vec<Complex>);

impl AdversaryTargets {
    pub fn from_region(g: &MoebiusMap, region: &AvoidedRegionG) -> Self {
        let mut pts: Vec<Complex> = region
            .disk_pullbacks()
            .into_iter()
            .filter_map(|d| match d {
                PulledBackDisk::Bounded(c) => Some(c.center),
                PulledBackDisk::Exterior(_) => None,
            })
            .collect();
        if let PulledBackDisk::Bounded(c) = region.central_region() {
            pts.push(c.center);
        }
        if let Some(p) = g.pole() {
            pts.push(p);
        }
        Self(pts)
    }

    fn nearest(&self, z: Complex) -> Option<Complex> {
        self.0
            .iter()
            .copied()
            .min_by(|x, y| (x - z).norm().total_cmp(&(y - z).norm()))
    }
}

fn draw_noise(rng: &mut ChaCha8Rng, spec: &PerturbationSpec, at: Complex, targets: &AdversaryTargets) -> Complex {
    let eps = spec.epsilon;
    if eps == 0.0 {
        return Complex::new(0.0, 0.0);
    }
    match spec.distribution {
        NoiseDistribution::UniformDisk => {
            let u: f64 = rng.gen();
            let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            Complex::from_polar(eps * u.sqrt(), theta)
        }
        NoiseDistribution::Boundary => {
            let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            Complex::from_polar(eps, theta)
        }
        NoiseDistribution::Adversarial => {
            // the draw is kept so every distribution consumes the stream alike
            let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            match targets.nearest(at) {
                Some(t) if (t - at).norm() > 0.0 => (t - at) * (eps / (t - at).norm()),
                _ => Complex::from_polar(eps, theta),
            }
        }
    }
}

/// `a_{n+1} = g(a_n) + η_n` with `|η_n| ≤ ε` checked on the stored values.
pub fn perturbed_orbit(
    g: &MoebiusMap,
    z0: ExtendedComplex,
    steps: usize,
    spec: &PerturbationSpec,
    targets: &AdversaryTargets,
) -> Result<OrbitTrace> {
    if !(spec.epsilon >= 0.0 && spec.epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon must be non-negative, got {}", spec.epsilon)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pole = g.pole();
    let mut a = Vec::with_capacity(steps + 1);
    let mut noise = Vec::with_capacity(steps);
    a.push(z0);
    let mut cur = z0;
    for step in 0..steps {
        if let (Some(p), ExtendedComplex::Finite(z)) = (pole, cur) {
            if (z - p).norm() <= POLE_HIT_TOL {
                return Err(Error::OrbitHitPole { step });
            }
        }
        let image = g.apply(cur);
        let next = match image {
            ExtendedComplex::Infinity => {
                if spec.epsilon > 0.0 {
                    return Err(Error::OrbitHitPole { step });
                }
                noise.push(Complex::new(0.0, 0.0));
                ExtendedComplex::Infinity
            }
            ExtendedComplex::Finite(gz) => {
                let mut eta = draw_noise(&mut rng, spec, gz, targets);
                let mut next = gz + eta;
                // rounding in the addition may push |next − gz| past ε; when ε is
                // tiny next to |gz| the overshoot is large, so the shrink doubles
                let mut shrink = 4.0 * f64::EPSILON;
                while (next - gz).norm() > spec.epsilon {
                    eta *= 1.0 - shrink;
                    next = gz + eta;
                    shrink = (2.0 * shrink).min(1.0);
                }
                noise.push(next - gz);
                ExtendedComplex::Finite(next)
            }
        };
        a.push(next);
        cur = next;
    }
    let b = exact_orbit(g, z0, steps);
    let deviations = a.iter().zip(&b).map(|(x, y)| deviation(*x, *y)).collect();
    Ok(OrbitTrace { a, b, noise, deviations, bound_values: Vec::new() })
}

/// `K = sup_{B_R} |g′|`, attained at the point of the disk `B_R` nearest to the pole.
pub fn contraction_constant(g: &MoebiusMap, data: &LoxodromicData, big_r: f64) -> Result<f64> {
    let threshold = contraction_threshold(data.k_abs());
    if !(big_r > threshold) {
        return Err(Error::RTooSmall { r: big_r, threshold });
    }
    let pole = g.pole().ok_or(Error::LinearMap)?;
    let disk = br_disk(data, big_r)?;
    let gap = (pole - disk.center).norm() - disk.radius;
    let k = 1.0 / (g.c.norm() * gap).powi(2);
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::RTooSmall { r: big_r, threshold });
    }
    Ok(k)
}

/// `Kⁿ·d0 + (1 − Kⁿ)/(1 − K)·ε`.
pub fn hyers_ulam_contraction_bound(k: f64, eps: f64, n: usize, d0: f64) -> f64 {
    let kn = k.powi(n.min(i32::MAX as usize) as i32);
    kn * d0 + (1.0 - kn) / (1.0 - k) * eps
}

/// `(Mⁿ − 1)/(M − 1)·ε`.
pub fn finite_time_bound(m: f64, eps: f64, n: usize) -> f64 {
    (m.powi(n.min(i32::MAX as usize) as i32) - 1.0) / (m - 1.0) * eps
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeTime {
    /// Smallest integer strictly above `bound`, at least 1.
    pub n: usize,
    pub bound: f64,
    /// The sufficient variant built from `((√|k| + 1)/(√|k| − 1))³`.
    pub n_sufficient: usize,
    pub sufficient_bound: f64,
}

fn strictly_above(x: f64) -> usize {
    if x < 0.0 {
        1
    } else {
        (x.floor() as usize + 1).max(1)
    }
}

/// Uniform escaping time from `(ℂ ∖ D(R)) ∖ R_f(1)` under `w ↦ kw` with
/// per-step noise `δ0`.
pub fn escape_time_bound(kabs: f64, delta0: f64) -> Result<EscapeTime> {
    if !(kabs > 1.0) || !(delta0 > 0.0) {
        return Err(Error::InvalidParameter(format!("need |k| > 1 and delta0 > 0, got {kabs}, {delta0}")));
    }
    let s = kabs.sqrt();
    let inner = (2.0 * (s + 1.0).powi(2) / (s * (kabs - 1.0)) + 1.0) / delta0 + 1.0;
    let bound = inner.ln() / kabs.ln();
    let cube = ((s + 1.0) / (s - 1.0)).powi(3);
    let sufficient_bound = (cube / delta0 + 1.0).ln() / kabs.ln();
    let n = strictly_above(bound);
    let n_sufficient = strictly_above(sufficient_bound);
    debug_assert!(n <= n_sufficient);
    Ok(EscapeTime { n, bound, n_sufficient, sufficient_bound })
}

/// Where an orbit starts, which selects the applicable bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartRegime {
    /// `a_0 ∈ B_R`.
    Contraction,
    /// `a_0 ∈ (ℂ ∖ B_R) ∖ R_g(∞)`.
    Transit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants {
    /// Contraction constant on `B_R`.
    pub k_contraction: f64,
    /// Expansion constant outside the avoided region.
    pub m_expansion: f64,
    /// Uniform escaping time.
    pub n_escape: usize,
    pub r: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub h_of_eps: f64,
}

/// `8|k − 1|²/(δ²|k|³)`.
pub fn expansion_constant(data: &LoxodromicData, delta: f64) -> f64 {
    let km1 = data.k_minus_one_abs();
    8.0 * km1 * km1 / (delta * delta * data.k_abs().powi(3))
}

impl StabilityConstants {
    pub fn new(k_contraction: f64, m_expansion: f64, n_escape: usize, r: f64, delta: f64, epsilon: f64) -> Self {
        let mut c = Self { k_contraction, m_expansion, n_escape, r, delta, epsilon, h_of_eps: 0.0 };
        c.h_of_eps = c.h_coefficient() * epsilon;
        c
    }

    pub fn compute(
        g: &MoebiusMap,
        data: &LoxodromicData,
        big_r: f64,
        delta: f64,
        delta0: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let k = contraction_constant(g, data, big_r)?;
        let m = expansion_constant(data, delta);
        let n = escape_time_bound(data.k_abs(), delta0)?.n;
        Ok(Self::new(k, m, n, big_r, delta, epsilon))
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self::new(self.k_contraction, self.m_expansion, self.n_escape, self.r, self.delta, epsilon)
    }

    /// `H(ε)/ε = (M^N − 1)/(M − 1) + 1/(1 − K)`.
    pub fn h_coefficient(&self) -> f64 {
        finite_time_bound(self.m_expansion, 1.0, self.n_escape) + 1.0 / (1.0 - self.k_contraction)
    }

    /// Bound on `|a_n − b_n|` for `b_0 = a_0`.
    pub fn combined_bound(&self, regime: StartRegime, n: usize) -> f64 {
        let eps = self.epsilon;
        match regime {
            StartRegime::Contraction => hyers_ulam_contraction_bound(self.k_contraction, eps, n, 0.0),
            StartRegime::Transit if n <= self.n_escape => finite_time_bound(self.m_expansion, eps, n),
            StartRegime::Transit => {
                finite_time_bound(self.m_expansion, eps, self.n_escape)
                    + hyers_ulam_contraction_bound(self.k_contraction, eps, n - self.n_escape, 0.0)
            }
        }
    }
}

/// `(ℂ ∖ B_R) ∖ R_g(∞)`, the region orbits must leave by the escaping time.
#[derive(Debug, Clone)]
pub struct TransitRegion<'a> {
    pub data: LoxodromicData,
    pub r: f64,
    pub avoided: &'a AvoidedRegionG,
}

impl TransitRegion<'_> {
    pub fn in_br(&self, z: Complex) -> bool {
        (z - self.data.beta).norm() >= self.r * (z - self.data.alpha).norm()
    }

    pub fn contains(&self, z: Complex) -> bool {
        !self.in_br(z) && !self.avoided.contains_finite(z)
    }

    /// Membership in the closure: `|z − β| ≤ R|z − α|` and outside the open avoided region.
    pub fn closure_contains(&self, z: ExtendedComplex) -> bool {
        match z {
            ExtendedComplex::Infinity => self.r >= 1.0 && !self.avoided.contains(z),
            ExtendedComplex::Finite(z) => {
                (z - self.data.beta).norm() <= self.r * (z - self.data.alpha).norm() && !self.avoided.contains_finite(z)
            }
        }
    }

    /// First index from which the orbit stays outside the closure.
    pub fn escape_index(&self, orbit: &[ExtendedComplex]) -> usize {
        if let Some(ExtendedComplex::Finite(z0)) = orbit.first() {
            if !self.contains(*z0) {
                return 0;
            }
        }
        orbit
            .iter()
            .rposition(|z| self.closure_contains(*z))
            .map_or(0, |i| i + 1)
    }
}

/// Largest escape index over orbits started at `starts`. Each orbit runs for
/// `10·n_bound` steps; one that is still in transit at the end is a violation.
pub fn empirical_escape_time(
    g: &MoebiusMap,
    transit: &TransitRegion<'_>,
    starts: &[Complex],
    spec: &PerturbationSpec,
    targets: &AdversaryTargets,
    n_bound: usize,
) -> Result<usize> {
    let steps = 10 * n_bound.max(1);
    let mut worst = 0;
    for (i, z0) in starts.iter().enumerate() {
        let trial = PerturbationSpec { seed: trial_seed(spec.seed, i as u64), ..*spec };
        let trace = perturbed_orbit(g, ExtendedComplex::Finite(*z0), steps, &trial, targets)?;
        let idx = transit.escape_index(&trace.a);
        if idx >= steps {
            return Err(Error::NoEscape { steps });
        }
        worst = worst.max(idx);
    }
    Ok(worst)
}
