//! Acceptance criteria. Each test prints one PASS/FAIL line, written straight
//! to stderr so it shows even when output is captured.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use loxodromic::algebra::{example_map, Complex};
use loxodromic::geometry::contraction_threshold;
use loxodromic::stability::escape_time_bound;
use loxodromic::verify::{
    multiplier_trace_residual, suite_avoidance, suite_complement_invariance, suite_convergence, suite_escape,
    suite_geometry_oracle, suite_random_identities, suite_shadowing, Scenario, SuiteResult, LINEARITY_FRACTIONS,
};

const SEED: u64 = 0x5eed_1234;

fn report(id: u32, label: &str, ok: bool, elapsed: Duration, limit: Option<Duration>, detail: &str) {
    let within = limit.is_none_or(|l| elapsed < l);
    let verdict = if ok && within { "PASS" } else { "FAIL" };
    let limit = limit.map_or(String::new(), |l| format!(" (limit {:.0?})", l));
    let line = format!("criterion {id} {label}: {verdict} in {elapsed:.2?}{limit}; {detail}\n");
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(within, "criterion {id} exceeded its runtime limit: {elapsed:?}");
}

fn summary(results: &[&SuiteResult]) -> String {
    results
        .iter()
        .map(|r| {
            format!(
                "{} passed={} checks={} failures={} worst_margin={:e}",
                r.name, r.passed, r.checks, r.failures, r.worst_margin
            )
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

fn example_scenario() -> Scenario {
    Scenario::new(&example_map(), 0.005, 2.0, None).expect("example map scenario")
}

#[test]
fn criterion_1_example_map_fixtures() {
    let start = Instant::now();
    let g = example_map();
    let d = g.fixed_points().unwrap();
    let tr = g.trace();
    let alpha_err = (d.alpha - Complex::new(25.0, 12.0)).norm();
    let beta_err = (d.beta - Complex::new(16.0, -18.75)).norm();
    let trace_exact = tr == Complex::new(1.64, 0.27);
    let kabs_err = (d.k_abs() - 1.5625).abs();
    let identity = multiplier_trace_residual(d.k, tr);
    let quoted = multiplier_trace_residual(Complex::new(1.5625, 1.5), tr);
    let k_matches = (d.k - Complex::new(0.4375, 1.5)).norm() < 1e-10;
    let ok = alpha_err <= 1e-9
        && beta_err <= 1e-9
        && trace_exact
        && kabs_err <= 1e-10
        && identity <= 1e-10
        && quoted > 1e-10
        && k_matches;
    let detail = format!(
        "|alpha-(25+12i)|={alpha_err:e} |beta-(16-18.75i)|={beta_err:e} trace exact={trace_exact} \
         ||k|-1.5625|={kabs_err:e} k={} sqrt-trace residual={identity:e}; quoted k=1.5625+1.5i residual={quoted:.6} (erratum)",
        d.k
    );
    report(1, "example map fixtures", ok, start.elapsed(), Some(Duration::from_secs(1)), &detail);
}

#[test]
fn criterion_2_algebraic_identities() {
    let start = Instant::now();
    let r = suite_random_identities(1000, SEED);
    report(2, "algebraic identities", r.passed, start.elapsed(), Some(Duration::from_secs(5)), &summary(&[&r]));
}

#[test]
fn criterion_3_geometry_oracle() {
    let start = Instant::now();
    let r = suite_geometry_oracle(50, SEED);
    report(3, "geometry oracle", r.passed, start.elapsed(), Some(Duration::from_secs(10)), &summary(&[&r]));
}

#[test]
fn criterion_4_avoidance() {
    let start = Instant::now();
    let sc = example_scenario();
    let eps = 0.9 * sc.eps_bound.value;
    let orbits = suite_avoidance(&sc, eps, 1000, 200, SEED);
    let invariance = suite_complement_invariance(&sc, 10_000, SEED);
    let ok = orbits.passed && invariance.passed;
    report(4, "avoidance", ok, start.elapsed(), Some(Duration::from_secs(30)), &summary(&[&orbits, &invariance]));
}

#[test]
fn criterion_5_shadowing_bound() {
    let start = Instant::now();
    let sc = example_scenario();
    let expected_r = 1.01 * contraction_threshold(sc.data.k_abs());
    assert_eq!(sc.r, expected_r);
    let emax = sc.eps_bound.value;
    let (r, stats) = suite_shadowing(&sc, 1e-3 * emax, 1000, 500, SEED);
    let stats = stats.expect("constants");
    let sup_ok = stats.max_deviation <= stats.h_of_eps;
    let both_regimes = stats.contraction_starts > 0 && stats.transit_starts > 0;
    let ratios: Vec<f64> =
        LINEARITY_FRACTIONS.iter().map(|f| sc.constants(f * emax).unwrap().h_of_eps / (f * emax)).collect();
    let linear = ratios.iter().all(|q| (q - ratios[0]).abs() / ratios[0] <= 1e-12);
    let ok = r.passed && sup_ok && both_regimes && linear;
    let detail = format!(
        "{} | sup deviation={:e} <= H(eps)={:e}: {sup_ok}; starts B_R={} transit={}; H/eps={ratios:?}",
        summary(&[&r]),
        stats.max_deviation,
        stats.h_of_eps,
        stats.contraction_starts,
        stats.transit_starts
    );
    report(5, "shadowing bound", ok, start.elapsed(), Some(Duration::from_secs(60)), &detail);
}

#[test]
fn criterion_6_escape_time() {
    let start = Instant::now();
    let sc = example_scenario();
    let r = suite_escape(&sc, 10, 200, SEED);
    let b = escape_time_bound(sc.data.k_abs(), sc.delta0).unwrap();
    let ok = r.passed && b.n <= b.n_sufficient;
    let detail = format!("N={} sufficient={} | {} | {}", b.n, b.n_sufficient, summary(&[&r]), r.detail);
    report(6, "escape time", ok, start.elapsed(), Some(Duration::from_secs(30)), &detail);
}

#[test]
fn criterion_7_convergence() {
    let start = Instant::now();
    let sc = example_scenario();
    let r = suite_convergence(&sc, 100, 200, SEED);
    report(7, "convergence", r.passed, start.elapsed(), Some(Duration::from_secs(2)), &summary(&[&r]));
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_loxodromic")).args(args).output().expect("spawn cli");
    (out.status.code().unwrap_or(-1), out.stdout)
}

#[test]
fn criterion_8_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for verb in ["simulate", "verify"] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{verb}-{run}.out"));
            let p = path.to_str().unwrap();
            let mut args = vec![verb, "--seed", "42", "--trials", "50", "--steps", "100", "--out", p];
            if verb == "simulate" {
                args.extend(["--epsilon", "1e-4"]);
            }
            let (code, stdout) = run_cli(&args);
            let file = std::fs::read(&path).unwrap_or_default();
            ok &= code == 0 && !file.is_empty();
            outputs.push((file, stdout));
        }
        let same = outputs[0] == outputs[1];
        ok &= same;
        notes.push(format!("{verb}: {} bytes, identical={same}", outputs[0].0.len()));
    }
    report(8, "determinism", ok, start.elapsed(), None, &notes.join("; "));
}
