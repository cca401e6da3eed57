//! Invariant suites and the independent oracles they compare against.
//!
//! Every suite returns a [`SuiteResult`]; the worst margin is the smallest
//! `allowed − observed` over all checks, so a negative margin is a failure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Complex, ExtendedComplex, LoxodromicData, MoebiusMap};
use crate::avoided::{
    build_avoided_f, d_epsilon0_disk, epsilon_bound, g_prime_sup_bound, h_inv_d1, noise_transfer_limit,
    AvoidedRegionG, EpsilonBound,
};
use crate::error::{Error, Result};
use crate::geometry::{
    apollonius_curve, br_disk, contraction_threshold, curve_distance, h_boundary_circle_of_s, h_image_of_s,
    hs1_outer_bound, s_boundary, Circle, Viewport,
};
use crate::stability::{
    exact_orbit, perturbed_orbit, trial_seed, AdversaryTargets, NoiseDistribution, PerturbationSpec,
    StabilityConstants, StartRegime, TransitRegion,
};

/// Relative tolerance of the algebraic and circle-fit oracles.
pub const ORACLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checks: u64,
    pub failures: u64,
    pub worst_margin: f64,
    pub detail: String,
}

impl SuiteResult {
    /// A suite that could not run at all.
    pub fn errored(name: &str, err: &Error) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            checks: 0,
            failures: 1,
            worst_margin: 0.0,
            detail: format!("error: {err}"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Tally {
    checks: u64,
    failures: u64,
    worst: f64,
}

impl Default for Tally {
    fn default() -> Self {
        Self { checks: 0, failures: 0, worst: f64::INFINITY }
    }
}

impl Tally {
    /// Records one check; `ok` decides pass/fail, `margin` feeds the summary.
    fn check(&mut self, ok: bool, margin: f64) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
        }
        self.worst = self.worst.min(margin);
    }

    /// A structural check that carries no margin of its own.
    fn require(&mut self, ok: bool) {
        self.check(ok, if ok { f64::INFINITY } else { -1.0 });
    }

    /// `observed ≤ allowed`.
    fn le(&mut self, observed: f64, allowed: f64) {
        self.check(observed <= allowed, allowed - observed);
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checks += other.checks;
        self.failures += other.failures;
        self.worst = self.worst.min(other.worst);
        self
    }

    fn finish(self, name: &str, detail: String) -> SuiteResult {
        SuiteResult {
            name: name.to_string(),
            passed: self.failures == 0 && self.checks > 0,
            checks: self.checks,
            failures: self.failures,
            worst_margin: if self.worst.is_finite() { self.worst } else { 0.0 },
            detail,
        }
    }
}

/// `|x − y| / scale`.
pub fn rel_err(x: Complex, y: Complex, scale: f64) -> f64 {
    (x - y).norm() / scale.max(f64::MIN_POSITIVE)
}

/// Algebraic least-squares circle fit (Kåsa). Points are centred and scaled
/// before solving the 3×3 normal equations.
pub fn circle_fit(points: &[Complex]) -> Option<Circle> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mean = points.iter().sum::<Complex>() / n;
    let scale = (points.iter().map(|p| (p - mean).norm_sqr()).sum::<f64>() / n).sqrt();
    if !(scale > 0.0) {
        return None;
    }
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for p in points {
        let q = (p - mean) / scale;
        let row = [q.re, q.im, 1.0];
        let s = q.norm_sqr();
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            rhs[i] -= s * row[i];
        }
    }
    let [d, e, f] = solve3(m, rhs)?;
    let r2 = (d * d + e * e) / 4.0 - f;
    if !(r2 > 0.0) {
        return None;
    }
    Some(Circle { center: mean + Complex::new(-d / 2.0, -e / 2.0) * scale, radius: r2.sqrt() * scale })
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = det3(&m);
    if det.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = rhs[row];
        }
        *slot = det3(&mc) / det;
    }
    Some(out)
}

fn uniform_complex(rng: &mut ChaCha8Rng, half: f64) -> Complex {
    Complex::new(rng.gen_range(-half..=half), rng.gen_range(-half..=half))
}

/// Random loxodromic map: coefficients uniform in `[−3, 3]²`, det-normalized,
/// rejecting traces within `1e-6` of `[−2, 2]` and `|c| < 1e-3`.
pub fn random_loxodromic_map(rng: &mut ChaCha8Rng) -> MoebiusMap {
    loop {
        let coeffs = [(); 4].map(|_| uniform_complex(rng, 3.0));
        let Ok(g) = MoebiusMap::new(coeffs[0], coeffs[1], coeffs[2], coeffs[3]) else { continue };
        let tr = g.trace();
        if tr.im.abs() <= 1e-6 && tr.re.abs() <= 2.0 + 1e-6 {
            continue;
        }
        if g.c.norm() < 1e-3 || g.fixed_points().is_err() {
            continue;
        }
        return g;
    }
}

/// Hyperbolic map `h⁻¹ ∘ (w ↦ kw) ∘ h` with random fixed points and real `k`.
pub fn random_hyperbolic_map(rng: &mut ChaCha8Rng, k_range: std::ops::Range<f64>) -> MoebiusMap {
    loop {
        let alpha = uniform_complex(rng, 20.0);
        let beta = uniform_complex(rng, 20.0);
        if (alpha - beta).norm() < 1.0 {
            continue;
        }
        let s = rng.gen_range(k_range.clone()).sqrt();
        // H = [[1, −β], [1, −α]], H⁻¹ ∝ [[−α, β], [−1, 1]], g = H⁻¹·diag(s, 1/s)·H
        let (si, one) = (1.0 / s, Complex::new(1.0, 0.0));
        let a = -alpha * s + beta * si;
        let b = alpha * beta * s - beta * alpha * si;
        let c = -one * s + si;
        let d = beta * s - alpha * si;
        let Ok(g) = MoebiusMap::new(a, b, c, d) else { continue };
        if g.fixed_points().is_ok() {
            return g;
        }
    }
}

/// Everything the Monte-Carlo suites need about one map.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub g: MoebiusMap,
    pub data: LoxodromicData,
    pub delta0: f64,
    pub t: f64,
    pub r: f64,
    pub avoided: AvoidedRegionG,
    pub eps_bound: EpsilonBound,
    pub targets: AdversaryTargets,
    pub viewport: Viewport,
}

/// Default `R` as a multiple of the contraction threshold.
pub const R_FACTOR: f64 = 1.01;

impl Scenario {
    pub fn new(g: &MoebiusMap, delta0: f64, t: f64, r: Option<f64>) -> Result<Self> {
        let data = g.fixed_points()?;
        let base = build_avoided_f(data.k, delta0, t)?;
        let eps_bound = epsilon_bound(&data, g, base.delta)?;
        let r = r.unwrap_or(R_FACTOR * contraction_threshold(data.k_abs()));
        let threshold = contraction_threshold(data.k_abs());
        if !(r > threshold) {
            return Err(Error::RTooSmall { r, threshold });
        }
        let avoided = AvoidedRegionG::new(base, &data);
        let targets = AdversaryTargets::from_region(g, &avoided);
        Ok(Self { g: *g, data, delta0, t, r, avoided, eps_bound, targets, viewport: Viewport::around(&data) })
    }

    pub fn transit(&self) -> TransitRegion<'_> {
        TransitRegion { data: self.data, r: self.r, avoided: &self.avoided }
    }

    pub fn constants(&self, epsilon: f64) -> Result<StabilityConstants> {
        StabilityConstants::compute(&self.g, &self.data, self.r, self.avoided.base.delta, self.delta0, epsilon)
    }

    fn h_inverse(&self, w: Complex) -> Option<Complex> {
        self.avoided.h.inverse(ExtendedComplex::Finite(w)).finite()
    }

    /// Uniform in the viewport half the time, otherwise pulled back from the
    /// w-disk `|w| ≤ 2` around the avoided region. Rejects points of `R_g(∞)`.
    pub fn sample_outside(&self, rng: &mut ChaCha8Rng) -> Complex {
        loop {
            let z = if rng.gen::<bool>() {
                let v = &self.viewport;
                Complex::new(rng.gen_range(v.min.re..=v.max.re), rng.gen_range(v.min.im..=v.max.im))
            } else {
                let w = Complex::from_polar(2.0 * rng.gen::<f64>().sqrt(), rng.gen::<f64>() * std::f64::consts::TAU);
                match self.h_inverse(w) {
                    Some(z) => z,
                    None => continue,
                }
            };
            if !self.avoided.contains_finite(z) {
                return z;
            }
        }
    }

    /// A start in `(ℂ ∖ B_R) ∖ R_g(∞)`.
    pub fn sample_transit(&self, rng: &mut ChaCha8Rng) -> Complex {
        let transit = self.transit();
        loop {
            let z = self.sample_outside(rng);
            if transit.contains(z) {
                return z;
            }
        }
    }

    /// Uniform in the open disk `B_R`.
    pub fn sample_br(&self, rng: &mut ChaCha8Rng) -> Result<Complex> {
        let disk = br_disk(&self.data, self.r)?;
        let transit = self.transit();
        loop {
            let z = disk.center
                + Complex::from_polar(disk.radius * rng.gen::<f64>().sqrt(), rng.gen::<f64>() * std::f64::consts::TAU);
            if transit.in_br(z) && (z - disk.center).norm() < disk.radius {
                return Ok(z);
            }
        }
    }
}

/// Fixtures for the example map: fixed points, exact trace, the
/// multiplier and the erratum of the quoted multiplier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Erratum {
    pub quoted_k: Complex,
    pub quoted_k_trace_residual: f64,
    pub computed_k: Complex,
    pub computed_k_trace_residual: f64,
}

/// `|√k + 1/√k − tr|` with the branch of `√k` matching `cα + d`.
pub fn multiplier_trace_residual(k: Complex, trace: Complex) -> f64 {
    let s = k.sqrt();
    let r1 = (s + s.inv() - trace).norm();
    let r2 = (-s - s.inv() - trace).norm();
    r1.min(r2)
}

pub fn multiplier_erratum(g: &MoebiusMap) -> Result<Erratum> {
    let data = g.fixed_points()?;
    let quoted_k = Complex::new(1.5625, 1.5);
    Ok(Erratum {
        quoted_k,
        quoted_k_trace_residual: multiplier_trace_residual(quoted_k, g.trace()),
        computed_k: data.k,
        computed_k_trace_residual: multiplier_trace_residual(data.k, g.trace()),
    })
}

pub fn suite_example_map(g: &MoebiusMap) -> SuiteResult {
    let name = "example_map_fixtures";
    let data = match g.fixed_points() {
        Ok(d) => d,
        Err(e) => return SuiteResult::errored(name, &e),
    };
    let mut t = Tally::default();
    t.le((data.alpha - Complex::new(25.0, 12.0)).norm(), 1e-9);
    t.le((data.beta - Complex::new(16.0, -18.75)).norm(), 1e-9);
    let tr = g.trace();
    t.check(tr == Complex::new(1.64, 0.27), if tr == Complex::new(1.64, 0.27) { 0.0 } else { -1.0 });
    t.le((data.k_abs() - 1.5625).abs(), 1e-10);
    let res = multiplier_trace_residual(data.k, tr);
    t.le(res, 1e-10);
    let quoted = multiplier_trace_residual(Complex::new(1.5625, 1.5), tr);
    // the quoted multiplier must fail the trace identity
    t.check(quoted > 1e-10, quoted - 1e-10);
    let detail = format!(
        "alpha={} beta={} k={} |k|={} trace={} residual(k)={:e} residual(quoted 1.5625+1.5i)={:e}",
        data.alpha,
        data.beta,
        data.k,
        data.k_abs(),
        tr,
        res,
        quoted
    );
    t.finish(name, detail)
}

fn identity_checks(g: &MoebiusMap, t: &mut Tally) -> Result<()> {
    let d = g.fixed_points()?;
    let (a, b, k) = (d.alpha, d.beta, d.k);
    let one = Complex::new(1.0, 0.0);
    t.le(rel_err((g.c * a + g.d) * (g.c * b + g.d), one, 1.0), ORACLE_TOL);
    let lhs = (g.c * (a - b)).powu(2);
    let rhs = (k - 1.0).powu(2) / k;
    t.le(rel_err(lhs, rhs, lhs.norm().max(rhs.norm())), ORACLE_TOL);
    let pole = g.pole().ok_or(Error::LinearMap)?;
    let alt = (k * b - a) / (k - 1.0);
    // −d/c lives on the scale of the fixed points
    t.le(rel_err(pole, alt, pole.norm().max(alt.norm()).max(a.norm()).max(b.norm())), ORACLE_TOL);
    let da = g.derivative(a)?.norm();
    let db = g.derivative(b)?.norm();
    t.check(da < 1.0 && db > 1.0, (1.0 - da).min(db - 1.0));
    // fixed-point residuals and multiplier consistency
    for z in [a, b] {
        let gz = g.apply_finite(z).ok_or(Error::PoleDerivative)?;
        t.le(rel_err(gz, z, z.norm().max(1.0)), ORACLE_TOL);
    }
    t.le(rel_err(g.derivative(a)?, k.inv(), k.inv().norm()), ORACLE_TOL);
    Ok(())
}

/// Identities for one map.
pub fn suite_map_identities(g: &MoebiusMap) -> SuiteResult {
    let name = "map_identities";
    let mut t = Tally::default();
    if let Err(e) = identity_checks(g, &mut t) {
        return SuiteResult::errored(name, &e);
    }
    t.finish(name, "fixed-point residuals, (cα+d)(cβ+d)=1, [c(α−β)]²=(k−1)²/k, −d/c=(kβ−α)/(k−1), |g′(α)|<1<|g′(β)|".into())
}

/// The same identities over random loxodromic maps.
pub fn suite_random_identities(maps: usize, seed: u64) -> SuiteResult {
    let name = "random_identities";
    let t = (0..maps)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i as u64));
            let g = random_loxodromic_map(&mut rng);
            let mut t = Tally::default();
            if identity_checks(&g, &mut t).is_err() {
                t.require(false);
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    t.finish(name, format!("{maps} random maps"))
}

/// Radii used by the geometry oracle.
pub fn oracle_radii(kabs: f64) -> [f64; 4] {
    [1.0 / kabs.sqrt(), 0.5, 1.0, 2.0]
}

/// Closed-form `h(∂S(r))` against a circle fit of `h` applied to samples of `∂S(r)`.
fn s_image_fit_checks(g: &MoebiusMap, data: &LoxodromicData, r: f64, t: &mut Tally) -> Result<()> {
    let h = crate::geometry::ConjugatorH::new(data);
    let closed = h_boundary_circle_of_s(data, g, r)?;
    let pts: Vec<Complex> = s_boundary(g, r)?
        .sample(360)
        .into_iter()
        .filter_map(|z| h.apply(ExtendedComplex::Finite(z)).finite())
        .collect();
    let fit = circle_fit(&pts).ok_or(Error::DegenerateLine)?;
    let scale = closed.center.norm().max(closed.radius);
    t.le(rel_err(fit.center, closed.center, scale), ORACLE_TOL);
    t.le((fit.radius - closed.radius).abs() / closed.radius, ORACLE_TOL);
    Ok(())
}

/// A radius is skipped when `∂S(r)` passes within 5% of `α`, where its image
/// degenerates to a line.
fn near_line(kabs: f64, r: f64) -> bool {
    (r * r - kabs).abs() < 0.05 * kabs
}

pub fn suite_geometry_oracle(maps: usize, seed: u64) -> SuiteResult {
    let name = "geometry_oracle";
    let t = (0..maps)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i as u64));
            let (g, data) = loop {
                let g = random_loxodromic_map(&mut rng);
                let data = g.fixed_points().expect("sampled maps are loxodromic");
                if !oracle_radii(data.k_abs()).iter().any(|&r| near_line(data.k_abs(), r)) {
                    break (g, data);
                }
            };
            let mut t = Tally::default();
            for r in oracle_radii(data.k_abs()) {
                if s_image_fit_checks(&g, &data, r, &mut t).is_err() {
                    t.require(false);
                }
            }
            let kabs = data.k_abs();
            let c = h_boundary_circle_of_s(&data, &g, 1.0 / kabs.sqrt()).expect("not a line");
            let expected = data.k_minus_one_abs() / (kabs * kabs - 1.0);
            t.le((c.center.norm() - expected).abs() / expected, ORACLE_TOL);
            t.le((c.radius - expected).abs() / expected, ORACLE_TOL);
            t
        })
        .reduce(Tally::default, Tally::merge);
    t.finish(name, format!("{maps} random maps x 4 radii, 360-point fits"))
}

/// Region identities for the scenario map, on random points.
pub fn suite_region_geometry(sc: &Scenario, points: usize, seed: u64) -> SuiteResult {
    let name = "region_geometry";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    let (g, data) = (&sc.g, &sc.data);
    let h = sc.avoided.h;
    let k = data.k;
    let s1 = match h_image_of_s(data, g, 1.0) {
        Ok(s) => s,
        Err(e) => return SuiteResult::errored(name, &e),
    };
    let rho = hs1_outer_bound(data);
    let fa = g.derivative(data.alpha).map(|d| d.norm()).unwrap_or(f64::NAN);
    let mut checked_s = 0u64;
    for _ in 0..points {
        let v = &sc.viewport;
        let z = Complex::new(rng.gen_range(v.min.re..=v.max.re), rng.gen_range(v.min.im..=v.max.im));
        let (Some(w), Some(gz)) = (h.apply(ExtendedComplex::Finite(z)).finite(), g.apply_finite(z)) else {
            continue;
        };
        // conjugation h∘g = f∘h
        if let Some(hgz) = h.apply(ExtendedComplex::Finite(gz)).finite() {
            t.le(rel_err(hgz, k * w, (k * w).norm().max(1.0)), 1e-9);
        }
        // h(B(r)) = {|w| > r}
        let r = rng.gen_range(0.1..10.0);
        let in_b = (z - data.beta).norm() > r * (z - data.alpha).norm();
        let gap = (w.norm() - r).abs() / r;
        if gap > 1e-9 {
            t.check(in_b == (w.norm() > r), gap);
        }
        // |g′(z)| < 1 exactly on S(1), and h(S(1)) agrees
        let dz = g.derivative(z).map(|d| d.norm()).unwrap_or(f64::INFINITY);
        if (dz - 1.0).abs() > 1e-9 {
            checked_s += 1;
            t.check((dz < 1.0) == s1.contains(ExtendedComplex::Finite(w)), (dz - 1.0).abs());
            if w.norm() > rho * (1.0 + 1e-9) {
                t.check(dz < 1.0, 1.0 - dz);
            }
        }
    }
    // closed forms against fits for this map
    for r in oracle_radii(data.k_abs()) {
        if !near_line(data.k_abs(), r) && s_image_fit_checks(g, data, r, &mut t).is_err() {
            t.require(false);
        }
    }
    // g(B_R) ⊂ B_{|k|R} ⊂ B_R on the boundary samples
    if let Ok(disk) = br_disk(data, sc.r) {
        for z in disk.sample(360) {
            if let Some(gz) = g.apply_finite(z) {
                let w = (gz - data.beta).norm() / (gz - data.alpha).norm();
                t.check(w > sc.r, w - sc.r);
            }
        }
    }
    t.finish(name, format!("{points} points, {checked_s} S(1) comparisons, |g'(alpha)|={fa:.6}, rho_outer={rho:.6}"))
}

/// Distance from `w` to the avoided w-region; the region is open, so
/// points at distance 0 on its boundary are outside.
fn w_margin(sc: &Scenario, z: ExtendedComplex) -> f64 {
    match sc.avoided.h.apply(z) {
        ExtendedComplex::Infinity => f64::INFINITY,
        ExtendedComplex::Finite(w) => sc.avoided.base.distance(w),
    }
}

/// Orbits started outside `R_g(∞)` never enter it.
pub fn suite_avoidance(sc: &Scenario, epsilon: f64, trials: usize, steps: usize, seed: u64) -> SuiteResult {
    let name = "avoidance";
    let dists = [NoiseDistribution::UniformDisk, NoiseDistribution::Adversarial];
    let t = (0..trials * dists.len())
        .into_par_iter()
        .map(|i| {
            let dist = dists[i % dists.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i as u64));
            let z0 = sc.sample_outside(&mut rng);
            let spec = PerturbationSpec::new(epsilon, rng.gen(), dist);
            let mut t = Tally::default();
            match perturbed_orbit(&sc.g, ExtendedComplex::Finite(z0), steps, &spec, &sc.targets) {
                Ok(trace) => {
                    for a in &trace.a {
                        t.check(!sc.avoided.contains(*a), w_margin(sc, *a));
                    }
                }
                Err(_) => t.require(false),
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    t.finish(
        name,
        format!("{trials} orbits x {steps} steps per noise type (uniform, adversarial), epsilon={epsilon:e}; margin in w-distance"),
    )
}

/// Exact invariance of the complements under `f` and `g`, the one-step
/// lemma, the backward orbit of `∞`, and the closed-form disks.
pub fn suite_complement_invariance(sc: &Scenario, points: usize, seed: u64) -> SuiteResult {
    let name = "complement_invariance";
    let base = &sc.avoided.base;
    let k = base.k;
    let kabs = base.kabs();
    let delta = base.delta;
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // g maps the complement of R_g(∞) into itself
    for _ in 0..points {
        let z = sc.sample_outside(&mut rng);
        let gz = sc.g.apply(ExtendedComplex::Finite(z));
        t.check(!sc.avoided.contains(gz), w_margin(sc, gz));
    }
    // f maps the complement of R_f(1) into itself
    let reach = 1.0 / kabs + 2.0 * delta + 1.0;
    let mut done = 0;
    while done < points {
        let w = Complex::from_polar(reach * rng.gen::<f64>().sqrt(), rng.gen::<f64>() * std::f64::consts::TAU);
        if base.contains(w) {
            continue;
        }
        done += 1;
        let kw = k * w;
        t.check(!base.contains(kw), base.distance(kw));
    }
    // one step of w ↦ kw + η, |η| ≤ δ0, cannot reach the next disk
    for _ in 0..points {
        let m = rng.gen_range(1..=base.n_disks.max(1)) as i32;
        let target = k.powi(-m);
        let off = delta * (1.0 + 3.0 * rng.gen::<f64>());
        let c = target + Complex::from_polar(off, rng.gen::<f64>() * std::f64::consts::TAU);
        if (c - target).norm() <= delta {
            continue;
        }
        let eta = Complex::from_polar(sc.delta0 * rng.gen::<f64>().sqrt(), rng.gen::<f64>() * std::f64::consts::TAU);
        let next = (k * c + eta - k.powi(1 - m)).norm();
        t.check(next > delta, next - delta);
    }
    // g⁻ⁿ(∞) lies in R_g(∞) for n = 1..N and 1/kⁿ falls in the central disk after
    for n in 1..=(base.n_disks as u32 + 5) {
        let z = sc.avoided.backward_orbit_point(n);
        let depth = match sc.avoided.h.apply(z) {
            ExtendedComplex::Finite(w) => base
                .centers
                .iter()
                .map(|c| delta - (w - c).norm())
                .fold(base.outer_radius - w.norm(), f64::max),
            ExtendedComplex::Infinity => -1.0,
        };
        t.check(sc.avoided.contains(z), depth);
    }
    // closed-form h⁻¹(D_1) against a fit of pulled-back samples, and D_ε0 ⊂ h⁻¹(D_1)
    if let (Ok(d1), Ok(de)) = (h_inv_d1(&sc.data, &sc.g, delta), d_epsilon0_disk(&sc.data, &sc.g, delta)) {
        let d1_circle = Circle { center: k.inv(), radius: delta };
        let pts: Vec<Complex> =
            d1_circle.sample(360).into_iter().filter_map(|w| sc.avoided.h.inverse(ExtendedComplex::Finite(w)).finite()).collect();
        match circle_fit(&pts) {
            Some(fit) => {
                let scale = fit.center.norm().max(fit.radius);
                t.le(rel_err(fit.center, d1.center, scale), ORACLE_TOL);
                t.le((fit.radius - d1.radius).abs() / d1.radius, ORACLE_TOL);
            }
            None => t.require(false),
        }
        let slack = (de.center - d1.center).norm() + de.radius;
        t.le(slack, d1.radius * (1.0 + 1e-12));
    } else {
        t.require(false);
    }
    // |g′| ≤ 4|k − 1|²/(δ²|k|³) outside R_g(∞)
    if let Ok(sup) = g_prime_sup_bound(&sc.data, delta) {
        for _ in 0..points {
            let z = sc.sample_outside(&mut rng);
            let d = sc.g.derivative(z).map(|d| d.norm()).unwrap_or(f64::INFINITY);
            t.le(d, sup);
        }
    }
    t.finish(name, format!("{points} points per property, N={} disks", base.n_disks))
}

/// Disk `U(center, radius)` in z that misses `R_g(∞)`, tested exactly through
/// its image under `h`.
fn disk_misses_region(sc: &Scenario, center: Complex, radius: f64) -> bool {
    match sc.avoided.h.image_of_disk(center, radius) {
        Ok(img) => sc.avoided.base.disjoint_from_disk(img.center, img.radius),
        Err(_) => false,
    }
}

/// Difference quotients of `g` on convex disks outside `R_g(∞)` stay below
/// twice the sup of `|g′|` over the disk.
pub fn suite_mean_value(sc: &Scenario, disks: usize, seed: u64) -> SuiteResult {
    let name = "mean_value";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    let pole = match sc.g.pole() {
        Some(p) => p,
        None => return SuiteResult::errored(name, &Error::LinearMap),
    };
    let cabs = sc.g.c.norm();
    let mut worst_ratio: f64 = 0.0;
    let mut done = 0;
    while done < disks {
        let z = sc.sample_outside(&mut rng);
        let radius = (z - pole).norm() * rng.gen_range(0.01..0.9);
        if !disk_misses_region(sc, z, radius) {
            continue;
        }
        done += 1;
        let gap = (z - pole).norm() - radius;
        let sup = 1.0 / (cabs * gap).powi(2);
        for _ in 0..20 {
            let u = z + Complex::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen::<f64>() * std::f64::consts::TAU);
            let v = z + Complex::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen::<f64>() * std::f64::consts::TAU);
            let (Some(gu), Some(gv)) = (sc.g.apply_finite(u), sc.g.apply_finite(v)) else { continue };
            if u == v {
                continue;
            }
            let q = (gu - gv).norm() / (u - v).norm();
            worst_ratio = worst_ratio.max(q / sup);
            t.le(q, 2.0 * sup * (1.0 + 1e-9));
        }
    }
    t.finish(name, format!("{disks} disks x 20 pairs, max quotient/sup = {worst_ratio:.6}"))
}

/// Outcome of the shadowing suite beyond pass/fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShadowingStats {
    pub max_deviation: f64,
    pub h_of_eps: f64,
    /// Largest `deviation / bound` over all steps with a nonzero bound.
    pub worst_ratio: f64,
    /// Largest `|g(a) − g(b)|/|a − b|` seen along transit pairs, against `M`.
    pub max_transit_quotient: f64,
    pub m_expansion: f64,
    pub contraction_starts: usize,
    pub transit_starts: usize,
}

#[derive(Debug, Clone, Copy)]
struct TrialStats {
    t: Tally,
    max_dev: f64,
    worst_ratio: f64,
    quotient: f64,
    contraction: usize,
}

impl TrialStats {
    fn merge(self, o: TrialStats) -> TrialStats {
        TrialStats {
            t: self.t.merge(o.t),
            max_dev: self.max_dev.max(o.max_dev),
            worst_ratio: self.worst_ratio.max(o.worst_ratio),
            quotient: self.quotient.max(o.quotient),
            contraction: self.contraction + o.contraction,
        }
    }

    fn empty() -> TrialStats {
        TrialStats { t: Tally::default(), max_dev: 0.0, worst_ratio: 0.0, quotient: 0.0, contraction: 0 }
    }
}

/// Every `|a_n − b_n|` against the regime bound, the sup against `H(ε)`, and
/// forward invariance of `B_R` once an orbit is inside.
pub fn suite_shadowing(
    sc: &Scenario,
    epsilon: f64,
    trials: usize,
    steps: usize,
    seed: u64,
) -> (SuiteResult, Option<ShadowingStats>) {
    let name = "shadowing";
    let consts = match sc.constants(epsilon) {
        Ok(c) => c,
        Err(e) => return (SuiteResult::errored(name, &e), None),
    };
    let transit = sc.transit();
    // B_R is forward invariant when ε < dist(B_{|k|R}, ∂B_R)
    let invariance_gap = curve_distance(
        &apollonius_curve(&sc.data, sc.r),
        &apollonius_curve(&sc.data, sc.data.k_abs() * sc.r),
    );
    let check_invariance = epsilon < invariance_gap;
    let s = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i as u64));
            let regime = if i % 2 == 0 { StartRegime::Contraction } else { StartRegime::Transit };
            let z0 = match regime {
                StartRegime::Contraction => match sc.sample_br(&mut rng) {
                    Ok(z) => z,
                    Err(_) => {
                        let mut st = TrialStats::empty();
                        st.t.require(false);
                        return st;
                    }
                },
                StartRegime::Transit => sc.sample_transit(&mut rng),
            };
            let spec = PerturbationSpec::new(epsilon, rng.gen(), NoiseDistribution::UniformDisk);
            let mut st = TrialStats::empty();
            st.contraction = usize::from(regime == StartRegime::Contraction);
            let mut trace = match perturbed_orbit(&sc.g, ExtendedComplex::Finite(z0), steps, &spec, &sc.targets) {
                Ok(tr) => tr,
                Err(_) => {
                    st.t.require(false);
                    return st;
                }
            };
            trace.attach_bounds(|n| consts.combined_bound(regime, n));
            let mut entered = false;
            for n in 0..trace.len() {
                let dev = trace.deviations[n];
                let bound = trace.bound_values[n];
                // margins relative to the bound; step 0 has bound 0 and deviation 0
                st.t.check(dev <= bound, if bound > 0.0 { (bound - dev) / bound } else { f64::INFINITY });
                st.t.check(dev <= consts.h_of_eps, (consts.h_of_eps - dev) / consts.h_of_eps);
                st.max_dev = st.max_dev.max(dev);
                if bound > 0.0 {
                    st.worst_ratio = st.worst_ratio.max(dev / bound);
                }
                if let (ExtendedComplex::Finite(a), ExtendedComplex::Finite(b)) = (trace.a[n], trace.b[n]) {
                    let in_br = transit.in_br(a);
                    if check_invariance && entered {
                        st.t.require(in_br);
                    }
                    entered |= in_br;
                    if !in_br && a != b {
                        if let (Some(ga), Some(gb)) = (sc.g.apply_finite(a), sc.g.apply_finite(b)) {
                            st.quotient = st.quotient.max((ga - gb).norm() / (a - b).norm());
                        }
                    }
                }
            }
            st
        })
        .reduce(TrialStats::empty, TrialStats::merge);
    let stats = ShadowingStats {
        max_deviation: s.max_dev,
        h_of_eps: consts.h_of_eps,
        worst_ratio: s.worst_ratio,
        max_transit_quotient: s.quotient,
        m_expansion: consts.m_expansion,
        contraction_starts: s.contraction,
        transit_starts: trials - s.contraction,
    };
    let detail = format!(
        "{trials} orbits x {steps} steps, epsilon={epsilon:e}, K={:.6}, M={:.6e}, N={}, H(eps)={:e}, max deviation={:e}, \
         worst deviation/bound={:.6}, max transit quotient={:.6} (M={:.3e}); margins relative to the bound",
        consts.k_contraction,
        consts.m_expansion,
        consts.n_escape,
        consts.h_of_eps,
        s.max_dev,
        s.worst_ratio,
        s.quotient,
        consts.m_expansion
    );
    (s.t.finish(name, detail), Some(stats))
}

/// Fractions of `epsilon_max` used for the linearity check of `H`.
pub const LINEARITY_FRACTIONS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// `H(ε)/ε` is the same for every fraction of `epsilon_max`.
pub fn suite_linearity(sc: &Scenario) -> SuiteResult {
    let name = "h_linearity";
    let emax = sc.eps_bound.value;
    let mut t = Tally::default();
    let ratios: Vec<f64> = LINEARITY_FRACTIONS
        .iter()
        .filter_map(|f| sc.constants(f * emax).ok().map(|c| c.h_of_eps / (f * emax)))
        .collect();
    if ratios.len() != LINEARITY_FRACTIONS.len() {
        t.require(false);
    }
    for r in &ratios {
        let rel = (r - ratios[0]).abs() / ratios[0];
        t.check(rel <= 1e-12, if rel.is_nan() { -1.0 } else { 1e-12 - rel });
    }
    let detail = if ratios.iter().all(|r| r.is_finite()) {
        format!("H(eps)/eps = {ratios:?}")
    } else {
        format!("H(eps)/eps = {ratios:?}; M^N overflows, the bound is uninformative for this map")
    };
    t.finish(name, detail)
}

/// Largest `ε` for which every transit step moves `w` by at most `δ0`.
pub fn escape_noise_limit(sc: &Scenario) -> f64 {
    let reach = 1.0 + sc.data.k_abs() * sc.r;
    noise_transfer_limit(sc.data.fixed_point_distance(), reach, sc.delta0)
}

/// Empirical escape steps against the uniform escaping time, exact and with
/// noise small enough that each step moves `w` by at most `δ0`.
fn escape_checks(sc: &Scenario, trials: usize, seed: u64, t: &mut Tally) -> Result<(usize, usize, f64)> {
    let bound = crate::stability::escape_time_bound(sc.data.k_abs(), sc.delta0)?;
    t.check(bound.n <= bound.n_sufficient, bound.n_sufficient as f64 - bound.n as f64);
    let transit = sc.transit();
    let ab = sc.data.fixed_point_distance();
    let eps = escape_noise_limit(sc).min(sc.eps_bound.value);
    let steps = 10 * bound.n;
    let h = sc.avoided.h;
    let results: Vec<(usize, f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i as u64));
            let z0 = sc.sample_transit(&mut rng);
            let orbit = if i % 2 == 0 {
                Ok(exact_orbit(&sc.g, ExtendedComplex::Finite(z0), steps))
            } else {
                let spec = PerturbationSpec::new(eps, rng.gen(), NoiseDistribution::UniformDisk);
                perturbed_orbit(&sc.g, ExtendedComplex::Finite(z0), steps, &spec, &sc.targets).map(|tr| tr.a)
            };
            match orbit {
                Ok(a) => {
                    // largest w-step noise seen while in transit
                    let mut w_noise: f64 = 0.0;
                    for n in 0..a.len() - 1 {
                        if let ExtendedComplex::Finite(z) = a[n] {
                            if transit.contains(z) {
                                let w = h.apply(a[n]).finite();
                                let w1 = h.apply(a[n + 1]).finite();
                                if let (Some(w), Some(w1)) = (w, w1) {
                                    // rounding of h near α grows like |w − 1|²/|α − β|
                                    let scale = z.norm().max(sc.data.alpha.norm()).max(sc.data.beta.norm());
                                    let rounding = 16.0
                                        * f64::EPSILON
                                        * ((w1 - 1.0).norm_sqr() * scale / ab + sc.data.k_abs() * w.norm() + 1.0);
                                    w_noise = w_noise.max((w1 - sc.data.k * w).norm() - rounding);
                                }
                            }
                        }
                    }
                    (transit.escape_index(&a), w_noise, true)
                }
                Err(_) => (usize::MAX, 0.0, false),
            }
        })
        .collect();
    let mut worst = 0;
    let mut max_w_noise: f64 = 0.0;
    for (idx, w_noise, ok) in results {
        t.require(ok);
        if ok {
            t.le(idx as f64, bound.n as f64);
            worst = worst.max(idx);
            max_w_noise = max_w_noise.max(w_noise);
        }
    }
    t.le(max_w_noise, sc.delta0);
    Ok((worst, bound.n, max_w_noise))
}

/// Escape times for the scenario map and `extra_maps` random hyperbolic maps.
pub fn suite_escape(sc: &Scenario, extra_maps: usize, trials: usize, seed: u64) -> SuiteResult {
    let name = "escape_time";
    let mut t = Tally::default();
    let mut lines = Vec::new();
    match escape_checks(sc, trials, seed, &mut t) {
        Ok((worst, n, wn)) => lines.push(format!("map: worst {worst} <= N={n}, max w-noise {wn:.3e}")),
        Err(e) => return SuiteResult::errored(name, &e),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, u64::MAX));
    let mut made = 0;
    while made < extra_maps {
        let g = random_hyperbolic_map(&mut rng, 1.5..6.0);
        let Ok(other) = Scenario::new(&g, sc.delta0, sc.t, None) else { continue };
        made += 1;
        match escape_checks(&other, trials, trial_seed(seed, made as u64), &mut t) {
            Ok((worst, n, wn)) => {
                lines.push(format!("hyperbolic |k|={:.4}: worst {worst} <= N={n}, max w-noise {wn:.3e}", other.data.k_abs()))
            }
            Err(e) => {
                t.require(false);
                lines.push(format!("hyperbolic map failed: {e}"));
            }
        }
    }
    t.finish(name, lines.join("; "))
}

/// Forward orbits converge to `α`, backward orbits to `β`.
pub fn suite_convergence(sc: &Scenario, starts: usize, steps: usize, seed: u64) -> SuiteResult {
    let name = "convergence";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    let (alpha, beta) = (sc.data.alpha, sc.data.beta);
    let ab = sc.data.fixed_point_distance();
    let inv = sc.g.inverse();
    let v = sc.viewport;
    let sample = |rng: &mut ChaCha8Rng, avoid: Complex| loop {
        let z = Complex::new(rng.gen_range(v.min.re..=v.max.re), rng.gen_range(v.min.im..=v.max.im));
        if (z - avoid).norm() > 0.1 * ab {
            return z;
        }
    };
    for (map, from, to) in [(&sc.g, beta, alpha), (&inv, alpha, beta)] {
        for _ in 0..starts {
            let z = sample(&mut rng, from);
            let tol = 1e-6 * (1.0 + to.norm());
            match map.iterate(ExtendedComplex::Finite(z), steps).finite() {
                Some(end) => t.le((end - to).norm(), tol),
                None => t.require(false),
            }
        }
    }
    t.finish(name, format!("{starts} starts each way, {steps} iterations"))
}

/// Parameters of a full verification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub delta0: f64,
    pub t: f64,
    pub r: Option<f64>,
    /// Perturbation size for the shadowing suite; defaults to `1e-3·epsilon_max`.
    pub epsilon: Option<f64>,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Runs every suite; suites that need the avoided region report its
/// construction error instead when it cannot be built.
pub fn run_all(g: &MoebiusMap, cfg: &VerifyConfig) -> Vec<SuiteResult> {
    let mut out = vec![suite_map_identities(g)];
    out.push(suite_random_identities(cfg.trials, trial_seed(cfg.seed, 1)));
    out.push(suite_geometry_oracle(cfg.trials.min(50), trial_seed(cfg.seed, 2)));
    match Scenario::new(g, cfg.delta0, cfg.t, cfg.r) {
        Ok(sc) => {
            let emax = sc.eps_bound.value;
            out.push(suite_region_geometry(&sc, 10 * cfg.trials, trial_seed(cfg.seed, 3)));
            out.push(suite_avoidance(&sc, 0.9 * emax, cfg.trials, cfg.steps.min(200), trial_seed(cfg.seed, 4)));
            out.push(suite_complement_invariance(&sc, 10 * cfg.trials, trial_seed(cfg.seed, 5)));
            out.push(suite_mean_value(&sc, cfg.trials, trial_seed(cfg.seed, 6)));
            let eps = cfg.epsilon.unwrap_or(1e-3 * emax);
            out.push(suite_shadowing(&sc, eps, cfg.trials, cfg.steps, trial_seed(cfg.seed, 7)).0);
            out.push(suite_linearity(&sc));
            out.push(suite_escape(&sc, 10, cfg.trials.min(100), trial_seed(cfg.seed, 8)));
            // 200 iterations, or enough for |k|⁻ⁿ to fall below 1e-12 when |k| is close to 1
            let iterations = 200usize.max((1e12f64.ln() / sc.data.k_abs().ln()).ceil() as usize);
            out.push(suite_convergence(&sc, cfg.trials.min(100), iterations, trial_seed(cfg.seed, 9)));
        }
        Err(e) => {
            for name in [
                "region_geometry",
                "avoidance",
                "complement_invariance",
                "mean_value",
                "shadowing",
                "h_linearity",
                "escape_time",
                "convergence",
            ] {
                out.push(SuiteResult::errored(name, &e));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::example_map;

    #[test]
    fn circle_fit_recovers_exact_circle() {
        let c = Circle { center: Complex::new(1e3, -2e3), radius: 0.25 };
        let fit = circle_fit(&c.sample(360)).unwrap();
        assert!((fit.center - c.center).norm() < 1e-9 * 1e3);
        assert!((fit.radius - c.radius).abs() < 1e-12);
    }

    #[test]
    fn circle_fit_rejects_collinear_points() {
        let pts: Vec<Complex> = (0..10).map(|i| Complex::new(i as f64, 2.0 * i as f64)).collect();
        assert!(circle_fit(&pts).is_none());
    }

    #[test]
    fn random_hyperbolic_maps_have_real_multiplier() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = random_hyperbolic_map(&mut rng, 1.5..6.0);
            let d = g.fixed_points().unwrap();
            assert!(d.k.im.abs() < 1e-9 * d.k.re, "{}", d.k);
            assert!((1.5..6.0).contains(&d.k.re));
        }
    }

    #[test]
    fn example_map_suite_passes() {
        let r = suite_example_map(&example_map());
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn erratum_values() {
        let e = multiplier_erratum(&example_map()).unwrap();
        assert!(e.computed_k_trace_residual < 1e-12);
        assert!(e.quoted_k_trace_residual > 0.1);
    }

    #[test]
    fn samplers_respect_regions() {
        let sc = Scenario::new(&example_map(), 0.005, 2.0, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let z = sc.sample_transit(&mut rng);
            assert!(sc.transit().contains(z));
            let z = sc.sample_br(&mut rng).unwrap();
            assert!(sc.transit().in_br(z));
        }
    }

    #[test]
    fn escape_noise_limit_is_below_epsilon_max_scale() {
        let sc = Scenario::new(&example_map(), 0.005, 2.0, None).unwrap();
        let e = escape_noise_limit(&sc);
        assert!(e > 0.0 && e < 0.01, "{e}");
    }
}
