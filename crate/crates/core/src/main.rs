use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use loxodromic::config::{NoiseName, RunConfig, Settings};
use loxodromic::report::{
    classify_report, classify_text, fmt_num, regime_of, to_json, trace_csv, verify_report, EscapeReport, Num,
    RegionPlot,
};
use loxodromic::stability::{empirical_escape_time, escape_time_bound, perturbed_orbit, trial_seed, PerturbationSpec};
use loxodromic::verify::{escape_noise_limit, run_all, Scenario, VerifyConfig};
use loxodromic::{Error, ExtendedComplex};

const EXIT_INVALID: u8 = 1;
const EXIT_NOT_LOXODROMIC: u8 = 2;
const EXIT_START_IN_AVOIDED: u8 = 3;
const EXIT_SUITE_FAILURE: u8 = 4;

/// Loxodromic Moebius maps: regions, perturbed orbits and shadowing bounds.
#[derive(Parser)]
#[command(name = "loxodromic", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Class, fixed points, multiplier and trace of the map.
    Classify(Flags),
    /// SVG of the regions in both coordinates and a JSON record of every curve.
    Regions(Flags),
    /// One perturbed orbit against the exact orbit, as CSV.
    Simulate(Flags),
    /// Uniform escaping time and its empirical check.
    EscapeTime(Flags),
    /// Run every invariant suite and write the JSON report.
    Verify(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Uniform,
    Boundary,
    Adversarial,
}

#[derive(Args)]
struct Flags {
    /// Coefficients a b c d, each "re,im" or "a+bi".
    #[arg(long, num_args = 4, value_names = ["A", "B", "C", "D"], allow_hyphen_values = true)]
    map: Option<Vec<String>>,
    /// Perturbation size; defaults to 1e-3 of the admissible maximum.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Noise bound in conjugated coordinates.
    #[arg(long)]
    delta0: Option<f64>,
    /// Avoided-disk scale factor, δ = t·δ0/(|k| − 1).
    #[arg(long)]
    t: Option<f64>,
    /// Radius of the contraction region B_R; defaults to 1.01 times the threshold.
    #[arg(long = "R")]
    big_r: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent. For `regions` this is the SVG, with the
    /// JSON next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Simulate even when the start lies in the avoided region.
    #[arg(long)]
    force: bool,
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start point of `simulate`; defaults to the midpoint of the fixed points.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    #[arg(long, value_enum)]
    noise: Option<NoiseArg>,
    /// Radius r of the region S(r) drawn by `regions`.
    #[arg(long)]
    s_radius: Option<f64>,
}

impl Flags {
    fn settings(&self) -> Settings {
        Settings {
            map: self.map.clone(),
            epsilon: self.epsilon,
            delta0: self.delta0,
            t: self.t,
            big_r: self.big_r,
            steps: self.steps,
            trials: self.trials,
            seed: self.seed,
            out: self.out.clone(),
            force: self.force.then_some(true),
            start: self.start.clone(),
            noise: self.noise.map(|n| match n {
                NoiseArg::Uniform => NoiseName::Uniform,
                NoiseArg::Boundary => NoiseName::Boundary,
                NoiseArg::Adversarial => NoiseName::Adversarial,
            }),
            s_radius: self.s_radius,
        }
    }

    fn resolve(&self) -> Result<RunConfig, Error> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
                Settings::from_toml(&text)?
            }
            None => Settings::default(),
        };
        RunConfig::resolve(self.settings().over(file))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotLoxodromic { .. } => EXIT_NOT_LOXODROMIC,
        Error::StartInAvoidedRegion => EXIT_START_IN_AVOIDED,
        _ => EXIT_INVALID,
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Parse(format!("cannot write stdout: {e}"))),
    }
}

fn classify(cfg: &RunConfig) -> Result<u8, Error> {
    let g = cfg.map()?;
    let report = classify_report(&g);
    match &cfg.out {
        Some(path) => {
            emit(Some(path), &to_json(&report))?;
            print!("{}", classify_text(&report, &g));
        }
        None => print!("{}", classify_text(&report, &g)),
    }
    Ok(if g.classify().is_loxodromic() { 0 } else { EXIT_NOT_LOXODROMIC })
}

fn scenario(cfg: &RunConfig) -> Result<Scenario, Error> {
    Scenario::new(&cfg.map()?, cfg.delta0, cfg.t, cfg.big_r)
}

fn regions(cfg: &RunConfig) -> Result<u8, Error> {
    let sc = scenario(cfg)?;
    let plot = RegionPlot::new(&sc, cfg.s_radius)?;
    let json = to_json(&plot.report());
    match &cfg.out {
        Some(path) => {
            emit(Some(path), &plot.svg())?;
            emit(Some(&path.with_extension("json")), &json)?;
        }
        None => emit(None, &json)?,
    }
    Ok(0)
}

fn simulate(cfg: &RunConfig) -> Result<u8, Error> {
    let sc = scenario(cfg)?;
    let z0 = cfg.start.unwrap_or((sc.data.alpha + sc.data.beta) / 2.0);
    if sc.avoided.contains_finite(z0) && !cfg.force {
        return Err(Error::StartInAvoidedRegion);
    }
    let eps = cfg.epsilon.unwrap_or(1e-3 * sc.eps_bound.value);
    let consts = sc.constants(eps)?;
    let regime = regime_of(&sc, z0);
    let spec = PerturbationSpec::new(eps, cfg.seed, cfg.noise.into());
    let mut trace = perturbed_orbit(&sc.g, ExtendedComplex::Finite(z0), cfg.steps, &spec, &sc.targets)?;
    trace.attach_bounds(|n| consts.combined_bound(regime, n));
    emit(cfg.out.as_deref(), &trace_csv(&trace, &sc))?;
    Ok(0)
}

fn escape_time(cfg: &RunConfig) -> Result<u8, Error> {
    let sc = scenario(cfg)?;
    let bound = escape_time_bound(sc.data.k_abs(), cfg.delta0)?;
    let eps = cfg.epsilon.unwrap_or_else(|| escape_noise_limit(&sc).min(sc.eps_bound.value));
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, 0));
    let starts: Vec<_> = (0..cfg.trials).map(|_| sc.sample_transit(&mut rng)).collect();
    let spec = PerturbationSpec::new(eps, trial_seed(cfg.seed, 1), cfg.noise.into());
    let result = empirical_escape_time(&sc.g, &sc.transit(), &starts, &spec, &sc.targets, bound.n);
    let passed = matches!(result, Ok(w) if w <= bound.n);
    let report = EscapeReport {
        k_abs: Num(sc.data.k_abs()),
        delta0: Num(cfg.delta0),
        big_r: Num(sc.r),
        n: bound.n,
        bound: Num(bound.bound),
        n_sufficient: bound.n_sufficient,
        sufficient_bound: Num(bound.sufficient_bound),
        epsilon: Num(eps),
        trials: cfg.trials,
        seed: cfg.seed,
        empirical_worst: result.as_ref().ok().copied(),
        error: result.err().map(|e| e.to_string()),
        passed,
    };
    emit(cfg.out.as_deref(), &to_json(&report))?;
    Ok(if passed { 0 } else { EXIT_SUITE_FAILURE })
}

fn verify(cfg: &RunConfig) -> Result<u8, Error> {
    let g = cfg.map()?;
    // a non-loxodromic map has nothing to verify
    g.fixed_points()?;
    let vc = VerifyConfig {
        delta0: cfg.delta0,
        t: cfg.t,
        r: cfg.big_r,
        epsilon: cfg.epsilon,
        steps: cfg.steps,
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let suites = run_all(&g, &vc);
    let report = verify_report(cfg, &g, &suites);
    emit(cfg.out.as_deref(), &to_json(&report))?;
    for s in &suites {
        eprintln!(
            "{} {}: {} checks, worst margin {}",
            if s.passed { "PASS" } else { "FAIL" },
            s.name,
            s.checks,
            fmt_num(s.worst_margin)
        );
    }
    Ok(if report.passed { 0 } else { EXIT_SUITE_FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = match &cli.verb {
        Verb::Classify(f) | Verb::Regions(f) | Verb::Simulate(f) | Verb::EscapeTime(f) | Verb::Verify(f) => f,
    };
    let outcome = flags.resolve().and_then(|cfg| match cli.verb {
        Verb::Classify(_) => classify(&cfg),
        Verb::Regions(_) => regions(&cfg),
        Verb::Simulate(_) => simulate(&cfg),
        Verb::EscapeTime(_) => escape_time(&cfg),
        Verb::Verify(_) => verify(&cfg),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
