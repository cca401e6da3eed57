//! Moebius maps on the Riemann sphere: normalization, evaluation, composition,
//! trace classification, fixed points and the multiplier of a loxodromic map.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Coefficient determinants below this modulus are rejected.
pub const DET_EPS: f64 = 1e-14;
/// `|cz + d|` below this is treated as the pole.
pub const POLE_EPS: f64 = 1e-300;
/// Default tolerance for trace-based classification.
pub const CLASSIFY_TOL: f64 = 1e-9;

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtendedComplex {
    Finite(Complex),
    Infinity,
}

impl ExtendedComplex {
    pub fn finite(self) -> Option<Complex> {
        match self {
            ExtendedComplex::Finite(z) => Some(z),
            ExtendedComplex::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedComplex::Infinity)
    }
}

impl From<Complex> for ExtendedComplex {
    fn from(z: Complex) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            ExtendedComplex::Finite(z)
        } else {
            ExtendedComplex::Infinity
        }
    }
}

impl fmt::Display for ExtendedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedComplex::Finite(z) => write!(f, "{}", z),
            ExtendedComplex::Infinity => write!(f, "inf"),
        }
    }
}

/// `z ↦ (az + b)/(cz + d)` with `ad − bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapClass {
    PurelyLoxodromic,
    HyperbolicLoxodromic,
    Elliptic,
    Parabolic,
    Identity,
}

impl MapClass {
    pub fn is_loxodromic(self) -> bool {
        matches!(self, MapClass::PurelyLoxodromic | MapClass::HyperbolicLoxodromic)
    }
}

impl fmt::Display for MapClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MapClass::PurelyLoxodromic => "PurelyLoxodromic",
            MapClass::HyperbolicLoxodromic => "HyperbolicLoxodromic",
            MapClass::Elliptic => "Elliptic",
            MapClass::Parabolic => "Parabolic",
            MapClass::Identity => "Identity",
        };
        f.write_str(s)
    }
}

impl MoebiusMap {
    /// Builds a map from raw coefficients, dividing by the principal square
    /// root of the determinant. Coefficients whose determinant is already 1
    /// to within a few ulps are kept bit-for-bit.
    pub fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Result<Self> {
        Ok(Self::normalize_with_scale(a, b, c, d)?.0)
    }

    /// Like [`MoebiusMap::new`] but also returns the scalar the coefficients
    /// were divided by (the principal root of the determinant, or 1).
    pub fn normalize_with_scale(a: Complex, b: Complex, c: Complex, d: Complex) -> Result<(Self, Complex)> {
        for z in [a, b, c, d] {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
        }
        let det = a * d - b * c;
        if det.norm() <= DET_EPS {
            return Err(Error::DegenerateMap { det_abs: det.norm() });
        }
        if (det - 1.0).norm() <= 4.0 * f64::EPSILON {
            return Ok((Self { a, b, c, d }, Complex::new(1.0, 0.0)));
        }
        let s = det.sqrt();
        Ok((Self { a: a / s, b: b / s, c: c / s, d: d / s }, s))
    }

    pub fn identity() -> Self {
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        Self { a: one, b: zero, c: zero, d: one }
    }

    /// The dilation `w ↦ kw` as `diag(√k, 1/√k)`.
    pub fn dilation(k: Complex) -> Result<Self> {
        if k.norm() <= DET_EPS {
            return Err(Error::DegenerateMap { det_abs: 0.0 });
        }
        let s = k.sqrt();
        let zero = Complex::new(0.0, 0.0);
        Ok(Self { a: s, b: zero, c: zero, d: s.inv() })
    }

    pub fn det(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex {
        self.a + self.d
    }

    /// The pole `−d/c`, or `None` for affine maps.
    pub fn pole(&self) -> Option<Complex> {
        if self.c.norm() <= DET_EPS {
            None
        } else {
            Some(-self.d / self.c)
        }
    }

    pub fn apply(&self, z: ExtendedComplex) -> ExtendedComplex {
        match z {
            ExtendedComplex::Infinity => {
                if self.c.norm() == 0.0 {
                    ExtendedComplex::Infinity
                } else {
                    ExtendedComplex::Finite(self.a / self.c)
                }
            }
            ExtendedComplex::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() < POLE_EPS {
                    ExtendedComplex::Infinity
                } else {
                    ExtendedComplex::from((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Finite-only evaluation; `None` at the pole.
    pub fn apply_finite(&self, z: Complex) -> Option<Complex> {
        self.apply(ExtendedComplex::Finite(z)).finite()
    }

    /// `g ∘ other`.
    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        let a = self.a * other.a + self.b * other.c;
        let b = self.a * other.b + self.b * other.d;
        let c = self.c * other.a + self.d * other.c;
        let d = self.c * other.b + self.d * other.d;
        // det of a product of unimodular matrices is 1 up to rounding
        MoebiusMap::new(a, b, c, d).unwrap_or(MoebiusMap { a, b, c, d })
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn iterate(&self, z: ExtendedComplex, n: usize) -> ExtendedComplex {
        (0..n).fold(z, |acc, _| self.apply(acc))
    }

    /// `g′(z) = 1/(cz + d)²`.
    pub fn derivative(&self, z: Complex) -> Result<Complex> {
        let den = self.c * z + self.d;
        if den.norm() < POLE_EPS {
            return Err(Error::PoleDerivative);
        }
        Ok((den * den).inv())
    }

    pub fn classify(&self) -> MapClass {
        self.classify_with_tol(CLASSIFY_TOL)
    }

    pub fn classify_with_tol(&self, tol: f64) -> MapClass {
        let tr = self.trace();
        if tr.im.abs() > tol {
            return MapClass::PurelyLoxodromic;
        }
        let x = tr.re.abs();
        if x > 2.0 + tol {
            MapClass::HyperbolicLoxodromic
        } else if x >= 2.0 - tol {
            let scalar = self.b.norm() <= tol && self.c.norm() <= tol && (self.a - self.d).norm() <= tol;
            if scalar {
                MapClass::Identity
            } else {
                MapClass::Parabolic
            }
        } else {
            MapClass::Elliptic
        }
    }

    /// Fixed points, multiplier and the two derivative factors of a
    /// loxodromic map with `c ≠ 0`.
    pub fn fixed_points(&self) -> Result<LoxodromicData> {
        self.fixed_points_with_tol(CLASSIFY_TOL)
    }

    pub fn fixed_points_with_tol(&self, tol: f64) -> Result<LoxodromicData> {
        let tr = self.trace();
        if !self.classify_with_tol(tol).is_loxodromic() {
            return Err(Error::NotLoxodromic { re: tr.re, im: tr.im });
        }
        if self.c.norm() <= DET_EPS {
            return Err(Error::LinearMap);
        }
        let s = (tr * tr - 4.0).sqrt();
        let two_c = self.c * 2.0;
        let mut alpha = (self.a - self.d + s) / two_c;
        let mut beta = (self.a - self.d - s) / two_c;
        let mut c_alpha_d = (tr + s) * 0.5;
        let mut c_beta_d = (tr - s) * 0.5;
        if c_alpha_d.norm() < 1.0 {
            std::mem::swap(&mut alpha, &mut beta);
            std::mem::swap(&mut c_alpha_d, &mut c_beta_d);
        }
        Ok(LoxodromicData { alpha, beta, k: c_alpha_d * c_alpha_d, c_alpha_d, c_beta_d })
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})z + ({}) / ({})z + ({})", self.a, self.b, self.c, self.d)
    }
}

/// Fixed-point data of a loxodromic map. `alpha` attracts, `beta` repels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoxodromicData {
    pub alpha: Complex,
    pub beta: Complex,
    pub k: Complex,
    /// `cα + d`, the chosen branch of `√k`.
    pub c_alpha_d: Complex,
    /// `cβ + d = 1/(cα + d)`.
    pub c_beta_d: Complex,
}

impl LoxodromicData {
    /// The multiplier of the conjugated dilation `h ∘ g ∘ h⁻¹(w) = kw`.
    pub fn multiplier(&self) -> Complex {
        debug_assert!(self.k.norm() > 1.0);
        self.k
    }

    pub fn k_abs(&self) -> f64 {
        self.k.norm()
    }

    /// `√|k|`.
    pub fn sqrt_k_abs(&self) -> f64 {
        self.k.norm().sqrt()
    }

    pub fn k_minus_one_abs(&self) -> f64 {
        (self.k - 1.0).norm()
    }

    pub fn fixed_point_distance(&self) -> f64 {
        (self.alpha - self.beta).norm()
    }
}

/// True when `k` lies on the positive real axis within `tol`.
pub fn is_positive_real(k: Complex, tol: f64) -> bool {
    k.im.abs() <= tol && k.re > 0.0
}

/// Coefficients of the worked example: `(1.64z − 25 + 11.07i)/(0.04z + 0.27i)`.
pub fn example_map() -> MoebiusMap {
    MoebiusMap::new(
        Complex::new(1.64, 0.0),
        Complex::new(-25.0, 11.07),
        Complex::new(0.04, 0.0),
        Complex::new(0.0, 0.27),
    )
    .expect("example map has unit determinant")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn real_map(a: f64, b: f64, cc: f64, d: f64) -> MoebiusMap {
        MoebiusMap::new(c(a, 0.0), c(b, 0.0), c(cc, 0.0), c(d, 0.0)).unwrap()
    }

    #[test]
    fn example_map_is_unchanged_by_normalization() {
        let g = example_map();
        assert_eq!(g.a, c(1.64, 0.0));
        assert_eq!(g.b, c(-25.0, 11.07));
        assert_eq!(g.c, c(0.04, 0.0));
        assert_eq!(g.d, c(0.0, 0.27));
        assert!((g.det() - 1.0).norm() < 1e-14);
        assert_eq!(g.trace(), c(1.64, 0.27));
    }

    #[test]
    fn scalar_identity_normalizes_to_identity() {
        let g = real_map(2.0, 0.0, 0.0, 2.0);
        assert_eq!(g, MoebiusMap::identity());
        assert_eq!(g.classify(), MapClass::Identity);
    }

    #[test]
    fn unit_det_real_map_is_unchanged() {
        let g = real_map(2.0, 1.0, 1.0, 1.0);
        assert_eq!(g.a, c(2.0, 0.0));
        assert_eq!(g.d, c(1.0, 0.0));
    }

    #[test]
    fn degenerate_is_rejected() {
        let err = MoebiusMap::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateMap { .. }));
    }

    #[test]
    fn apply_at_infinity_and_pole() {
        let g = example_map();
        let at_inf = g.apply(ExtendedComplex::Infinity).finite().unwrap();
        assert!((at_inf - c(41.0, 0.0)).norm() < 1e-12);
        let pole = g.pole().unwrap();
        assert_eq!(g.apply(ExtendedComplex::Finite(pole)), ExtendedComplex::Infinity);
        let id = MoebiusMap::identity();
        assert_eq!(id.apply(ExtendedComplex::Finite(c(3.0, -2.0))), ExtendedComplex::Finite(c(3.0, -2.0)));
        assert_eq!(id.apply(ExtendedComplex::Infinity), ExtendedComplex::Infinity);
    }

    #[test]
    fn inverse_and_compose() {
        let g = real_map(2.0, 1.0, 1.0, 1.0);
        let gi = g.inverse();
        assert_eq!((gi.a, gi.b, gi.c, gi.d), (c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)));
        let e = example_map();
        let id = e.compose(&e.inverse());
        assert!((id.a - 1.0).norm() < 1e-12 && id.b.norm() < 1e-12);
        assert!(id.c.norm() < 1e-12 && (id.d - 1.0).norm() < 1e-12);
    }

    #[test]
    fn dilations_compose_multiplicatively() {
        let k1 = c(1.2, 0.7);
        let k2 = c(-0.4, 2.0);
        let p = MoebiusMap::dilation(k1).unwrap().compose(&MoebiusMap::dilation(k2).unwrap());
        let w = c(0.3, -1.1);
        let got = p.apply_finite(w).unwrap();
        assert!((got - k1 * k2 * w).norm() < 1e-13);
    }

    #[test]
    fn classification() {
        assert_eq!(example_map().classify(), MapClass::PurelyLoxodromic);
        assert_eq!(real_map(2.0, 1.0, 1.0, 1.0).classify(), MapClass::HyperbolicLoxodromic);
        assert_eq!(real_map(1.0, 1.0, 0.0, 1.0).classify(), MapClass::Parabolic);
        assert_eq!(real_map(0.0, -1.0, 1.0, 0.0).classify(), MapClass::Elliptic);
    }

    #[test]
    fn example_fixed_points() {
        let data = example_map().fixed_points().unwrap();
        assert!((data.alpha - c(25.0, 12.0)).norm() < 1e-9);
        assert!((data.beta - c(16.0, -18.75)).norm() < 1e-9);
        assert!((data.c_alpha_d - c(1.0, 0.75)).norm() < 1e-12);
        // (1 + 0.75i)² = 0.4375 + 1.5i
        assert!((data.k - c(0.4375, 1.5)).norm() < 1e-12);
        assert!((data.k_abs() - 1.5625).abs() < 1e-12);
        assert!(!is_positive_real(data.k, 1e-9));
    }

    #[test]
    fn golden_ratio_fixed_points() {
        let g = real_map(2.0, 1.0, 1.0, 1.0);
        let data = g.fixed_points().unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        // oracle: roots of z² − z − 1
        assert!((data.alpha - c(phi, 0.0)).norm() < 1e-12);
        assert!((data.beta - c(1.0 - phi, 0.0)).norm() < 1e-12);
        assert!(g.derivative(data.alpha).unwrap().norm() < 1.0);
        assert!((data.k - c((7.0 + 3.0 * 5f64.sqrt()) / 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fixed_point_errors() {
        assert!(matches!(MoebiusMap::identity().fixed_points(), Err(Error::NotLoxodromic { .. })));
        let affine = MoebiusMap::new(c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        assert_eq!(affine.fixed_points(), Err(Error::LinearMap));
    }

    #[test]
    fn derivative_at_fixed_points_and_pole() {
        let g = example_map();
        let data = g.fixed_points().unwrap();
        assert!((g.derivative(data.alpha).unwrap().norm() - 0.64).abs() < 1e-12);
        assert!((g.derivative(data.beta).unwrap().norm() - 1.5625).abs() < 1e-12);
        assert_eq!(g.derivative(g.pole().unwrap()), Err(Error::PoleDerivative));
        assert_eq!(MoebiusMap::identity().derivative(c(5.0, 1.0)).unwrap(), c(1.0, 0.0));
        // central difference oracle
        let z = data.alpha;
        let hstep = 1e-6;
        let fd = (g.apply_finite(z + hstep).unwrap() - g.apply_finite(z - hstep).unwrap()) / (2.0 * hstep);
        let exact = g.derivative(z).unwrap();
        assert!((fd - exact).norm() / exact.norm() < 1e-6);
    }

    #[test]
    fn real_coefficients_give_real_or_conjugate_fixed_points() {
        let g = real_map(0.5, -3.0, 1.0, 4.0);
        let data = g.fixed_points().unwrap();
        let real_pair = data.alpha.im.abs() < 1e-12 && data.beta.im.abs() < 1e-12;
        let conj_pair = (data.alpha - data.beta.conj()).norm() < 1e-12;
        assert!(real_pair || conj_pair);
    }
}
