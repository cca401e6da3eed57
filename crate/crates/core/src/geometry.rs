//! Apollonius regions around the fixed points, the punctured region `S(r)`
//! around the pole, and their exact images under the conjugator
//! `h(z) = (z − β)/(z − α)`.

use serde::{Deserialize, Serialize};

use crate::algebra::{Complex, ExtendedComplex, LoxodromicData, MoebiusMap};
use crate::error::{Error, Result};

/// Relative width of the band reported as "on the boundary".
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Tolerance for recognising a circle image that degenerates to a line.
pub const LINE_TOL: f64 = 1e-12;

/// `h(z) = (z − β)/(z − α)`, sending `β ↦ 0`, `α ↦ ∞`, `∞ ↦ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugatorH {
    pub alpha: Complex,
    pub beta: Complex,
}

impl ConjugatorH {
    pub fn new(data: &LoxodromicData) -> Self {
        Self { alpha: data.alpha, beta: data.beta }
    }

    pub fn apply(&self, z: ExtendedComplex) -> ExtendedComplex {
        match z {
            ExtendedComplex::Infinity => ExtendedComplex::Finite(Complex::new(1.0, 0.0)),
            ExtendedComplex::Finite(z) => {
                let den = z - self.alpha;
                if den.norm() == 0.0 {
                    ExtendedComplex::Infinity
                } else {
                    ExtendedComplex::from((z - self.beta) / den)
                }
            }
        }
    }

    /// `h⁻¹(w) = (αw − β)/(w − 1)`.
    pub fn inverse(&self, w: ExtendedComplex) -> ExtendedComplex {
        match w {
            ExtendedComplex::Infinity => ExtendedComplex::Finite(self.alpha),
            ExtendedComplex::Finite(w) => {
                let den = w - 1.0;
                if den.norm() == 0.0 {
                    ExtendedComplex::Infinity
                } else {
                    ExtendedComplex::from((self.alpha * w - self.beta) / den)
                }
            }
        }
    }

    /// `|h′(z)| = |α − β|/|z − α|²`.
    pub fn derivative_abs(&self, z: Complex) -> f64 {
        (self.alpha - self.beta).norm() / (z - self.alpha).norm_sqr()
    }

    /// Image of the closed disk `|z − p| ≤ r` when it excludes `α`.
    pub fn image_of_disk(&self, p: Complex, r: f64) -> Result<Circle> {
        let q = p - self.alpha;
        let den = q.norm_sqr() - r * r;
        if (q.norm() - r).abs() <= LINE_TOL * (1.0 + r) {
            return Err(Error::DegenerateLine);
        }
        let ab = self.alpha - self.beta;
        let center = Complex::new(1.0, 0.0) + ab * q.conj() / den;
        let radius = ab.norm() * r / den.abs();
        if den < 0.0 {
            return Err(Error::UnboundedImage {
                complement_center_re: center.re,
                complement_center_im: center.im,
                complement_radius: radius,
            });
        }
        Ok(Circle { center, radius })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Complex,
    pub radius: f64,
}

impl Circle {
    pub fn point_at(&self, theta: f64) -> Complex {
        self.center + Complex::from_polar(self.radius, theta)
    }

    /// `n` equally spaced points starting at angle 0.
    pub fn sample(&self, n: usize) -> Vec<Complex> {
        (0..n)
            .map(|i| self.point_at(std::f64::consts::TAU * i as f64 / n as f64))
            .collect()
    }
}

/// A generalized circle: proper circle or straight line `{ point + t·direction }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CircleOrLine {
    Circle(Circle),
    Line { point: Complex, direction: Complex },
}

impl CircleOrLine {
    pub fn as_circle(&self) -> Option<Circle> {
        match self {
            CircleOrLine::Circle(c) => Some(*c),
            CircleOrLine::Line { .. } => None,
        }
    }

    /// Unsigned Euclidean distance from `z` to the curve.
    pub fn distance_to(&self, z: Complex) -> f64 {
        match self {
            CircleOrLine::Circle(c) => ((z - c.center).norm() - c.radius).abs(),
            CircleOrLine::Line { point, direction } => {
                let u = direction / direction.norm();
                ((z - point) * u.conj()).im.abs()
            }
        }
    }
}

/// Minimal distance between two disjoint generalized circles.
pub fn curve_distance(a: &CircleOrLine, b: &CircleOrLine) -> f64 {
    match (a, b) {
        (CircleOrLine::Circle(x), CircleOrLine::Circle(y)) => {
            let d = (x.center - y.center).norm();
            if d + x.radius.min(y.radius) <= x.radius.max(y.radius) {
                // nested
                x.radius.max(y.radius) - x.radius.min(y.radius) - d
            } else {
                (d - x.radius - y.radius).max(0.0)
            }
        }
        (CircleOrLine::Circle(c), line @ CircleOrLine::Line { .. })
        | (line @ CircleOrLine::Line { .. }, CircleOrLine::Circle(c)) => {
            (line.distance_to(c.center) - c.radius).max(0.0)
        }
        (CircleOrLine::Line { point, direction }, l2 @ CircleOrLine::Line { direction: d2, .. }) => {
            if (direction * d2.conj()).im.abs() > LINE_TOL * direction.norm() * d2.norm() {
                0.0
            } else {
                l2.distance_to(*point)
            }
        }
    }
}

/// The Apollonius curve `C(ρ) = {z : |z − β| = ρ|z − α|}`. For `ρ = 1` it is
/// the perpendicular bisector of `αβ`.
pub fn apollonius_curve(data: &LoxodromicData, rho: f64) -> CircleOrLine {
    let (alpha, beta) = (data.alpha, data.beta);
    let rho2 = rho * rho;
    if (1.0 - rho2).abs() <= LINE_TOL {
        let mid = (alpha + beta) * 0.5;
        let dir = (alpha - beta) * Complex::new(0.0, 1.0);
        return CircleOrLine::Line { point: mid, direction: dir };
    }
    let center = (beta - alpha * rho2) / (1.0 - rho2);
    let radius = rho * (alpha - beta).norm() / (1.0 - rho2).abs();
    CircleOrLine::Circle(Circle { center, radius })
}

/// Outcome of a membership test that keeps track of the boundary band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Outside,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    /// `B(r) = {|z − β| ≥ r|z − α|}`, together with `∞` when `r ≤ 1`.
    ApolloniusB(f64),
    /// `C(r) = {|z − β| = r|z − α|}`.
    ApolloniusCircle(f64),
    /// `D(r) = {|w| ≥ r}` in the dilation coordinate.
    DiskExterior(f64),
    /// `S(r) = {|z + d/c| > r/|c|}`.
    SRegion(f64),
    /// Open disk.
    Disk { center: Complex, radius: f64 },
}

fn compare(lhs: f64, rhs: f64) -> Membership {
    let scale = 1.0 + lhs.abs().max(rhs.abs());
    if (lhs - rhs).abs() <= BOUNDARY_TOL * scale {
        return Membership::Boundary;
    }
    if lhs > rhs {
        Membership::Inside
    } else {
        Membership::Outside
    }
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Region::ApolloniusB(r) | Region::ApolloniusCircle(r) | Region::SRegion(r) => r > 0.0 && r.is_finite(),
            Region::DiskExterior(r) => r >= 0.0 && r.is_finite(),
            Region::Disk { radius, .. } => radius > 0.0 && radius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("region parameter out of range: {self:?}")))
        }
    }

    /// Exact predicate: `B`, `D` closed, `S` and `Disk` open.
    pub fn contains(&self, point: ExtendedComplex, data: &LoxodromicData, g: &MoebiusMap) -> bool {
        match (*self, point) {
            (Region::ApolloniusB(r), ExtendedComplex::Infinity) => r <= 1.0,
            (Region::ApolloniusB(r), ExtendedComplex::Finite(z)) => (z - data.beta).norm() >= r * (z - data.alpha).norm(),
            (Region::ApolloniusCircle(r), ExtendedComplex::Infinity) => r == 1.0,
            (Region::ApolloniusCircle(r), ExtendedComplex::Finite(z)) => (z - data.beta).norm() == r * (z - data.alpha).norm(),
            (Region::DiskExterior(_), ExtendedComplex::Infinity) => true,
            (Region::DiskExterior(r), ExtendedComplex::Finite(w)) => w.norm() >= r,
            (Region::SRegion(_), ExtendedComplex::Infinity) => false,
            (Region::SRegion(r), ExtendedComplex::Finite(z)) => match g.pole() {
                Some(p) => (z - p).norm() > r / g.c.norm(),
                None => true,
            },
            (Region::Disk { .. }, ExtendedComplex::Infinity) => false,
            (Region::Disk { center, radius }, ExtendedComplex::Finite(z)) => (z - center).norm() < radius,
        }
    }

    /// Like [`Region::contains`] but reports points within the boundary band.
    pub fn membership(&self, point: ExtendedComplex, data: &LoxodromicData, g: &MoebiusMap) -> Membership {
        let z = match point {
            ExtendedComplex::Finite(z) => z,
            ExtendedComplex::Infinity => {
                return if self.contains(point, data, g) { Membership::Inside } else { Membership::Outside };
            }
        };
        match *self {
            Region::ApolloniusB(r) => compare((z - data.beta).norm(), r * (z - data.alpha).norm()),
            Region::ApolloniusCircle(r) => match compare((z - data.beta).norm(), r * (z - data.alpha).norm()) {
                Membership::Boundary => Membership::Inside,
                _ => Membership::Outside,
            },
            Region::DiskExterior(r) => compare(z.norm(), r),
            Region::SRegion(r) => match g.pole() {
                Some(p) => compare((z - p).norm(), r / g.c.norm()),
                None => Membership::Inside,
            },
            Region::Disk { center, radius } => compare(radius, (z - center).norm()),
        }
    }
}

/// `h(C(r))` is the circle `|w| = r`.
pub fn h_image_of_circle(r: f64) -> Result<Circle> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    Ok(Circle { center: Complex::new(0.0, 0.0), radius: r })
}

/// The set `h(S(r)) = {w : (√|k|/r)·|w − 1/k| > |w − 1|}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SImage {
    pub ratio: f64,
    pub inv_k: Complex,
}

impl SImage {
    pub fn contains(&self, w: ExtendedComplex) -> bool {
        match w {
            // both sides grow like |w|; the ratio decides
            ExtendedComplex::Infinity => self.ratio > 1.0,
            ExtendedComplex::Finite(w) => self.ratio * (w - self.inv_k).norm() > (w - 1.0).norm(),
        }
    }
}

pub fn h_image_of_s(data: &LoxodromicData, g: &MoebiusMap, r: f64) -> Result<SImage> {
    if g.pole().is_none() {
        return Err(Error::LinearMap);
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    Ok(SImage { ratio: data.sqrt_k_abs() / r, inv_k: data.k.inv() })
}

/// Closed form of `h(∂S(r))`: center `(kr² − |k|)/(k(r² − |k|))`, radius
/// `r|k − 1|/(√|k|·|r² − |k||)`. A line when `r = √|k|`.
pub fn h_boundary_circle_of_s(data: &LoxodromicData, g: &MoebiusMap, r: f64) -> Result<Circle> {
    if g.pole().is_none() {
        return Err(Error::LinearMap);
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let k = data.k;
    let kabs = k.norm();
    let r2 = r * r;
    if (r2 - kabs).abs() <= LINE_TOL * kabs {
        return Err(Error::DegenerateLine);
    }
    let center = (k * r2 - kabs) / (k * (r2 - kabs));
    let radius = r * (k - 1.0).norm() / (kabs.sqrt() * (r2 - kabs).abs());
    Ok(Circle { center, radius })
}

/// The boundary of `S(r)` in the z-plane: the circle of radius `r/|c|` about `−d/c`.
pub fn s_boundary(g: &MoebiusMap, r: f64) -> Result<Circle> {
    let pole = g.pole().ok_or(Error::LinearMap)?;
    Ok(Circle { center: pole, radius: r / g.c.norm() })
}

/// Radius `ρ` such that `h(S(1))` contains `{|w| > ρ}`:
/// `ρ = (√|k|·|k − 1| + |k − |k||)/(|k|(|k| − 1))`.
pub fn hs1_outer_bound(data: &LoxodromicData) -> f64 {
    let kabs = data.k_abs();
    let s = kabs.sqrt();
    let rho = (s * data.k_minus_one_abs() + (data.k - kabs).norm()) / (kabs * (kabs - 1.0));
    debug_assert!(rho >= 1.0 / s * (1.0 - 1e-12));
    debug_assert!(rho <= contraction_threshold(kabs) * (1.0 + 1e-12));
    rho
}

/// `(√|k| + 1)²/(√|k|(|k| − 1))`, the radius beyond which `B_R ⊂ S(1)`.
pub fn contraction_threshold(kabs: f64) -> f64 {
    let s = kabs.sqrt();
    (s + 1.0).powi(2) / (s * (kabs - 1.0))
}

/// Radius of `h(U(p, r))` for the open disk `U(p, r) = {|z − p| < r}`:
/// `r·|α − β| / ||α − p|² − r²|`.
pub fn h_image_of_disk_radius(data: &LoxodromicData, p: Complex, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    ConjugatorH::new(data).image_of_disk(p, r).map(|c| c.radius)
}

/// `g(B(r)) = B(|k|r)`.
pub fn b_region_image(data: &LoxodromicData, r: f64) -> Result<Region> {
    let region = Region::ApolloniusB(data.k_abs() * r);
    Region::ApolloniusB(r).validate()?;
    Ok(region)
}

/// The closed disk about `β` of radius `R|k − 1|/(|c|(R + 1)√|k|)`, which
/// misses the interior of `B_R`.
pub fn complement_disk_in_br(data: &LoxodromicData, g: &MoebiusMap, big_r: f64) -> Result<Region> {
    if g.pole().is_none() {
        return Err(Error::LinearMap);
    }
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(Error::InvalidParameter(format!("R must be positive, got {big_r}")));
    }
    let radius = big_r * data.k_minus_one_abs() / (g.c.norm() * (big_r + 1.0) * data.sqrt_k_abs());
    Ok(Region::Disk { center: data.beta, radius })
}

/// The Euclidean disk occupied by `B_R` for `R > 1`.
pub fn br_disk(data: &LoxodromicData, big_r: f64) -> Result<Circle> {
    if big_r <= 1.0 {
        return Err(Error::InvalidParameter(format!("B_R is a bounded disk only for R > 1, got {big_r}")));
    }
    apollonius_curve(data, big_r).as_circle().ok_or(Error::DegenerateLine)
}

/// Axis-aligned box around both fixed points, padded by `3|α − β|` on every side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub min: Complex,
    pub max: Complex,
}

impl Viewport {
    pub fn around(data: &LoxodromicData) -> Self {
        let pad = 3.0 * data.fixed_point_distance();
        let (a, b) = (data.alpha, data.beta);
        Self {
            min: Complex::new(a.re.min(b.re) - pad, a.im.min(b.im) - pad),
            max: Complex::new(a.re.max(b.re) + pad, a.im.max(b.im) + pad),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.re - self.min.re
    }

    pub fn height(&self) -> f64 {
        self.max.im - self.min.im
    }

    pub fn contains(&self, z: Complex) -> bool {
        (self.min.re..=self.max.re).contains(&z.re) && (self.min.im..=self.max.im).contains(&z.im)
    }
}
