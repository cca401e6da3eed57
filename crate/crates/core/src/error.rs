use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate map: |ad - bc| = {det_abs:e} is below the admissible threshold")]
    DegenerateMap { det_abs: f64 },

    #[error("map is not loxodromic: trace {re} + {im}i lies in [-2, 2]")]
    NotLoxodromic { re: f64, im: f64 },

    #[error("map is affine (c = 0); the operation needs a finite pole")]
    LinearMap,

    #[error("derivative undefined at the pole -d/c")]
    PoleDerivative,

    #[error("image of the circle is a straight line")]
    DegenerateLine,

    #[error("image of the disk is unbounded (the disk contains the attracting fixed point)")]
    UnboundedImage { complement_center_re: f64, complement_center_im: f64, complement_radius: f64 },

    #[error("delta = {delta} is not below |k - 1|/|k| = {limit}")]
    DeltaTooLarge { delta: f64, limit: f64 },

    #[error("admissible perturbation margin is empty (epsilon_max = {value:e})")]
    EmptyMargin { value: f64 },

    #[error("R = {r} does not exceed the contraction threshold {threshold}")]
    RTooSmall { r: f64, threshold: f64 },

    #[error("orbit came within 1e-12 of the pole at step {step}")]
    OrbitHitPole { step: usize },

    #[error("orbit did not leave the transit region within {steps} steps")]
    NoEscape { steps: usize },

    #[error("start point lies inside the avoided region")]
    StartInAvoidedRegion,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
