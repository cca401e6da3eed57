//! Run configuration: complex literals, the optional TOML file, and merging
//! with command-line flags.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::algebra::{Complex, MoebiusMap};
use crate::error::{Error, Result};
use crate::stability::NoiseDistribution;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_DELTA0: f64 = 0.005;
pub const DEFAULT_T: f64 = 2.0;
pub const DEFAULT_STEPS: usize = 500;
pub const DEFAULT_TRIALS: usize = 1000;

/// Coefficients of the example map as literals.
pub const EXAMPLE_MAP: [&str; 4] = ["1.64,0", "-25,11.07", "0.04,0", "0,0.27"];

fn parse_real(s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("not finite: {s:?}")));
    }
    Ok(v)
}

/// Parses `"re,im"` or `"a+bi"` (also `"bi"`, `"a"`, `"-i"`). A Unicode minus
/// sign is accepted in place of `-`.
pub fn parse_complex(input: &str) -> Result<Complex> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).map(|c| if c == '\u{2212}' { '-' } else { c }).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    if let Some((re, im)) = s.split_once(',') {
        return Ok(Complex::new(parse_real(re)?, parse_real(im)?));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex::new(parse_real(&s)?, 0.0));
    };
    // the sign splitting real and imaginary parts is the last one not inside an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&i| {
        (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E')
    });
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => parse_real(other)?,
    };
    Ok(Complex::new(parse_real(re)?, im))
}

/// Canonical `"re,im"` form; parses back to the same value.
pub fn format_complex(z: Complex) -> String {
    format!("{:?},{:?}", z.re, z.im)
}

/// Noise model names used on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseName {
    Uniform,
    Boundary,
    Adversarial,
}

impl From<NoiseName> for NoiseDistribution {
    fn from(n: NoiseName) -> Self {
        match n {
            NoiseName::Uniform => NoiseDistribution::UniformDisk,
            NoiseName::Boundary => NoiseDistribution::Boundary,
            NoiseName::Adversarial => NoiseDistribution::Adversarial,
        }
    }
}

/// Every setting optional; used both for the config file and for flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub map: Option<Vec<String>>,
    pub epsilon: Option<f64>,
    pub delta0: Option<f64>,
    pub t: Option<f64>,
    #[serde(rename = "R")]
    pub big_r: Option<f64>,
    pub steps: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub force: Option<bool>,
    pub start: Option<String>,
    pub noise: Option<NoiseName>,
    pub s_radius: Option<f64>,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    /// `self` wins wherever it is set.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            map: self.map.or(base.map),
            epsilon: self.epsilon.or(base.epsilon),
            delta0: self.delta0.or(base.delta0),
            t: self.t.or(base.t),
            big_r: self.big_r.or(base.big_r),
            steps: self.steps.or(base.steps),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            force: self.force.or(base.force),
            start: self.start.or(base.start),
            noise: self.noise.or(base.noise),
            s_radius: self.s_radius.or(base.s_radius),
        }
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub coefficients: [Complex; 4],
    pub epsilon: Option<f64>,
    pub delta0: f64,
    pub t: f64,
    pub big_r: Option<f64>,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub force: bool,
    pub start: Option<Complex>,
    pub noise: NoiseName,
    pub s_radius: f64,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn resolve(s: Settings) -> Result<Self> {
        let lits: Vec<String> = s.map.unwrap_or_else(|| EXAMPLE_MAP.iter().map(|x| x.to_string()).collect());
        if lits.len() != 4 {
            return Err(Error::InvalidParameter(format!("map needs 4 coefficients, got {}", lits.len())));
        }
        let mut coefficients = [Complex::new(0.0, 0.0); 4];
        for (slot, lit) in coefficients.iter_mut().zip(&lits) {
            *slot = parse_complex(lit)?;
        }
        let epsilon = match s.epsilon {
            Some(e) if !(e >= 0.0 && e.is_finite()) => {
                return Err(Error::InvalidParameter(format!("epsilon must be non-negative, got {e}")))
            }
            e => e,
        };
        let trials = s.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        let steps = s.steps.unwrap_or(DEFAULT_STEPS);
        if steps == 0 {
            return Err(Error::InvalidParameter("steps must be at least 1".into()));
        }
        let t = positive("t", s.t.unwrap_or(DEFAULT_T))?;
        if t <= 1.0 {
            return Err(Error::InvalidParameter(format!("t must exceed 1, got {t}")));
        }
        Ok(Self {
            coefficients,
            epsilon,
            delta0: positive("delta0", s.delta0.unwrap_or(DEFAULT_DELTA0))?,
            t,
            big_r: s.big_r.map(|r| positive("R", r)).transpose()?,
            steps,
            trials,
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            out: s.out,
            force: s.force.unwrap_or(false),
            start: s.start.as_deref().map(parse_complex).transpose()?,
            noise: s.noise.unwrap_or(NoiseName::Uniform),
            s_radius: positive("s_radius", s.s_radius.unwrap_or(1.0))?,
        })
    }

    pub fn map(&self) -> Result<MoebiusMap> {
        let [a, b, c, d] = self.coefficients;
        MoebiusMap::new(a, b, c, d)
    }

    /// The map coefficients in canonical form.
    pub fn map_literals(&self) -> [String; 4] {
        self.coefficients.map(format_complex)
    }
}
