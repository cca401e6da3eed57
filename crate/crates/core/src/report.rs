//! JSON reports, CSV traces and SVG region plots.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) in every format.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::algebra::{example_map, Complex, ExtendedComplex, LoxodromicData, MoebiusMap};
use crate::avoided::PulledBackDisk;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::geometry::{
    apollonius_curve, h_boundary_circle_of_s, h_image_of_circle, hs1_outer_bound, s_boundary, Circle, CircleOrLine,
    Viewport,
};
use crate::stability::{escape_time_bound, OrbitTrace, StabilityConstants, StartRegime};
use crate::verify::{multiplier_erratum, multiplier_trace_residual, Scenario, SuiteResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A float serialized with 17 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(fmt_num(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CNum {
    pub re: Num,
    pub im: Num,
}

impl From<Complex> for CNum {
    fn from(z: Complex) -> Self {
        Self { re: Num(z.re), im: Num(z.im) }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPoints {
    pub alpha: CNum,
    pub beta: CNum,
    pub k: CNum,
    pub k_abs: Num,
    /// `|√k + 1/√k − tr|`.
    pub trace_residual: Num,
}

impl From<&LoxodromicData> for FixedPoints {
    fn from(d: &LoxodromicData) -> Self {
        Self {
            alpha: d.alpha.into(),
            beta: d.beta.into(),
            k: d.k.into(),
            k_abs: Num(d.k_abs()),
            trace_residual: Num(multiplier_trace_residual(d.k, d.c_alpha_d + d.c_beta_d)),
        }
    }
}

/// The multiplier quoted for the example map against the computed one.
#[derive(Debug, Clone, Serialize)]
pub struct ErratumRecord {
    pub note: &'static str,
    pub quoted_k: CNum,
    pub quoted_k_trace_residual: Num,
    pub computed_k: CNum,
    pub computed_k_trace_residual: Num,
}

const ERRATUM_NOTE: &str = "the multiplier quoted as 1.5625+1.5i fails sqrt(k)+1/sqrt(k)=trace; \
k=(c*alpha+d)^2=0.4375+1.5i satisfies it and has |k|=1.5625";

pub fn erratum_for(g: &MoebiusMap) -> Option<ErratumRecord> {
    if *g != example_map() {
        return None;
    }
    let e = multiplier_erratum(g).ok()?;
    Some(ErratumRecord {
        note: ERRATUM_NOTE,
        quoted_k: e.quoted_k.into(),
        quoted_k_trace_residual: Num(e.quoted_k_trace_residual),
        computed_k: e.computed_k.into(),
        computed_k_trace_residual: Num(e.computed_k_trace_residual),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub map: [CNum; 4],
    pub classification: String,
    pub trace: CNum,
    pub fixed_points: Option<FixedPoints>,
    pub error: Option<String>,
    pub erratum: Option<ErratumRecord>,
}

pub fn classify_report(g: &MoebiusMap) -> ClassifyReport {
    let fp = g.fixed_points();
    ClassifyReport {
        map: [g.a, g.b, g.c, g.d].map(CNum::from),
        classification: g.classify().to_string(),
        trace: g.trace().into(),
        fixed_points: fp.as_ref().ok().map(FixedPoints::from),
        error: fp.err().map(|e| e.to_string()),
        erratum: erratum_for(g),
    }
}

pub fn classify_text(r: &ClassifyReport, g: &MoebiusMap) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "class: {}", r.classification);
    let _ = writeln!(s, "trace: {}", g.trace());
    match g.fixed_points() {
        Ok(d) => {
            let _ = writeln!(s, "alpha: {}", d.alpha);
            let _ = writeln!(s, "beta: {}", d.beta);
            let _ = writeln!(s, "k: {}", d.k);
            let _ = writeln!(s, "|k|: {}", d.k_abs());
        }
        Err(e) => {
            let _ = writeln!(s, "fixed points: {e}");
        }
    }
    if let Some(e) = &r.erratum {
        let _ = writeln!(s, "erratum: {}", e.note);
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonTerms {
    pub apollonius: Num,
    pub disk: Num,
    pub transfer: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsRecord {
    #[serde(rename = "R")]
    pub big_r: Num,
    #[serde(rename = "K")]
    pub k_contraction: Num,
    #[serde(rename = "M")]
    pub m_expansion: Num,
    #[serde(rename = "N")]
    pub n_escape: usize,
    pub n_escape_sufficient: usize,
    pub delta: Num,
    pub avoided_disks: usize,
    pub epsilon_max: Num,
    pub epsilon_terms: EpsilonTerms,
    pub epsilon: Num,
    #[serde(rename = "H")]
    pub h_of_eps: Num,
}

pub fn constants_record(sc: &Scenario, c: &StabilityConstants) -> ConstantsRecord {
    let esc = escape_time_bound(sc.data.k_abs(), sc.delta0).map(|e| e.n_sufficient).unwrap_or(0);
    ConstantsRecord {
        big_r: Num(c.r),
        k_contraction: Num(c.k_contraction),
        m_expansion: Num(c.m_expansion),
        n_escape: c.n_escape,
        n_escape_sufficient: esc,
        delta: Num(c.delta),
        avoided_disks: sc.avoided.base.n_disks,
        epsilon_max: Num(sc.eps_bound.value),
        epsilon_terms: EpsilonTerms {
            apollonius: Num(sc.eps_bound.apollonius_term),
            disk: Num(sc.eps_bound.disk_term),
            transfer: Num(sc.eps_bound.transfer_term),
        },
        epsilon: Num(c.epsilon),
        h_of_eps: Num(c.h_of_eps),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRecord {
    pub name: String,
    pub passed: bool,
    pub checks: u64,
    pub failures: u64,
    pub worst_margin: Num,
    pub detail: String,
}

impl From<&SuiteResult> for SuiteRecord {
    fn from(r: &SuiteResult) -> Self {
        Self {
            name: r.name.clone(),
            passed: r.passed,
            checks: r.checks,
            failures: r.failures,
            worst_margin: Num(r.worst_margin),
            detail: r.detail.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub map: [String; 4],
    pub delta0: Num,
    pub t: Num,
    #[serde(rename = "R")]
    pub big_r: Option<Num>,
    pub epsilon: Option<Num>,
    pub steps: usize,
    pub trials: usize,
}

impl From<&RunConfig> for ConfigEcho {
    fn from(c: &RunConfig) -> Self {
        Self {
            map: c.map_literals(),
            delta0: Num(c.delta0),
            t: Num(c.t),
            big_r: c.big_r.map(Num),
            epsilon: c.epsilon.map(Num),
            steps: c.steps,
            trials: c.trials,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config: ConfigEcho,
    pub classification: String,
    pub trace: CNum,
    pub fixed_points: Option<FixedPoints>,
    pub erratum: Option<ErratumRecord>,
    pub constants: Option<ConstantsRecord>,
    pub constants_error: Option<String>,
    pub suites: Vec<SuiteRecord>,
    pub passed: bool,
}

pub fn verify_report(cfg: &RunConfig, g: &MoebiusMap, suites: &[SuiteResult]) -> VerifyReport {
    let scenario = Scenario::new(g, cfg.delta0, cfg.t, cfg.big_r);
    let constants = scenario.as_ref().map_err(Error::clone).and_then(|sc| {
        let eps = cfg.epsilon.unwrap_or(1e-3 * sc.eps_bound.value);
        sc.constants(eps).map(|c| constants_record(sc, &c))
    });
    VerifyReport {
        tool: "loxodromic",
        version: VERSION,
        seed: cfg.seed,
        config: cfg.into(),
        classification: g.classify().to_string(),
        trace: g.trace().into(),
        fixed_points: g.fixed_points().ok().as_ref().map(FixedPoints::from),
        erratum: erratum_for(g),
        constants_error: constants.as_ref().err().map(|e| e.to_string()),
        constants: constants.ok(),
        suites: suites.iter().map(SuiteRecord::from).collect(),
        passed: !suites.is_empty() && suites.iter().all(|s| s.passed),
    }
}

pub const CSV_HEADER: &str = "n,a_re,a_im,b_re,b_im,deviation,bound,in_BR,in_avoided";

fn split(z: ExtendedComplex) -> (f64, f64) {
    match z {
        ExtendedComplex::Finite(z) => (z.re, z.im),
        ExtendedComplex::Infinity => (f64::INFINITY, f64::INFINITY),
    }
}

/// One row per step; `bound_values` must be attached.
pub fn trace_csv(trace: &OrbitTrace, sc: &Scenario) -> String {
    let transit = sc.transit();
    let mut s = String::with_capacity(200 * (trace.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for n in 0..trace.len() {
        let (ar, ai) = split(trace.a[n]);
        let (br, bi) = split(trace.b[n]);
        let in_br = trace.a[n].finite().is_some_and(|z| transit.in_br(z));
        let _ = writeln!(
            s,
            "{n},{},{},{},{},{},{},{},{}",
            fmt_num(ar),
            fmt_num(ai),
            fmt_num(br),
            fmt_num(bi),
            fmt_num(trace.deviations[n]),
            fmt_num(trace.bound_values.get(n).copied().unwrap_or(f64::NAN)),
            in_br,
            sc.avoided.contains(trace.a[n])
        );
    }
    s
}

pub fn regime_of(sc: &Scenario, z0: Complex) -> StartRegime {
    if sc.transit().in_br(z0) {
        StartRegime::Contraction
    } else {
        StartRegime::Transit
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EscapeReport {
    pub k_abs: Num,
    pub delta0: Num,
    #[serde(rename = "R")]
    pub big_r: Num,
    #[serde(rename = "N")]
    pub n: usize,
    pub bound: Num,
    pub n_sufficient: usize,
    pub sufficient_bound: Num,
    pub epsilon: Num,
    pub trials: usize,
    pub seed: u64,
    pub empirical_worst: Option<usize>,
    pub error: Option<String>,
    pub passed: bool,
}

/// A curve in one of the two panels.
#[derive(Debug, Clone, Serialize)]
pub struct CurveRecord {
    pub id: String,
    pub panel: &'static str,
    pub layer: &'static str,
    pub kind: &'static str,
    pub center: Option<CNum>,
    pub radius: Option<Num>,
    pub point: Option<CNum>,
    pub direction: Option<CNum>,
    /// For a circle, whether the region is its exterior.
    pub exterior: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Curve {
    Circle(Circle),
    Line { point: Complex, direction: Complex },
}

#[derive(Debug, Clone)]
struct Entry {
    id: String,
    panel: &'static str,
    layer: &'static str,
    curve: Curve,
    exterior: bool,
}

impl Entry {
    fn record(&self) -> CurveRecord {
        let (center, radius, point, direction, kind) = match self.curve {
            Curve::Circle(c) => (Some(c.center.into()), Some(Num(c.radius)), None, None, "circle"),
            Curve::Line { point, direction } => (None, None, Some(point.into()), Some(direction.into()), "line"),
        };
        CurveRecord {
            id: self.id.clone(),
            panel: self.panel,
            layer: self.layer,
            kind,
            center,
            radius,
            point,
            direction,
            exterior: self.exterior,
        }
    }
}

impl From<CircleOrLine> for Curve {
    fn from(c: CircleOrLine) -> Self {
        match c {
            CircleOrLine::Circle(c) => Curve::Circle(c),
            CircleOrLine::Line { point, direction } => Curve::Line { point, direction },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Window {
    pub min: CNum,
    pub max: CNum,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionsReport {
    pub map: [CNum; 4],
    pub fixed_points: FixedPoints,
    #[serde(rename = "R")]
    pub big_r: Num,
    pub delta: Num,
    pub s_radius: Num,
    pub z_window: Window,
    pub w_window: Window,
    pub curves: Vec<CurveRecord>,
}

/// Radii of the `C(r)` family drawn in both panels.
pub const C_FAMILY: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Region curves of one map in both coordinates, with the JSON and SVG forms.
#[derive(Debug, Clone)]
pub struct RegionPlot {
    entries: Vec<Entry>,
    z_view: Viewport,
    w_view: Viewport,
    sc: Scenario,
    s_radius: f64,
}

impl RegionPlot {
    pub fn new(sc: &Scenario, s_radius: f64) -> Result<Self> {
        let (g, data) = (&sc.g, &sc.data);
        let mut entries = Vec::new();
        let mut push = |id: String, panel, layer, curve, exterior| entries.push(Entry { id, panel, layer, curve, exterior });
        for (i, &r) in C_FAMILY.iter().enumerate() {
            push(format!("z-c{i}"), "z", "c_family", apollonius_curve(data, r).into(), r < 1.0);
            push(format!("w-c{i}"), "w", "c_family", Curve::Circle(h_image_of_circle(r)?), false);
        }
        push("z-br".into(), "z", "b_r", apollonius_curve(data, sc.r).into(), false);
        push("w-br".into(), "w", "b_r", Curve::Circle(h_image_of_circle(sc.r)?), true);
        push("z-s".into(), "z", "s_boundary", Curve::Circle(s_boundary(g, s_radius)?), true);
        let w_s = match h_boundary_circle_of_s(data, g, s_radius) {
            Ok(c) => Curve::Circle(c),
            Err(Error::DegenerateLine) => {
                // |w − 1/k| = |w − 1|: the bisector of 1/k and 1
                let inv_k = data.k.inv();
                Curve::Line { point: (inv_k + 1.0) / 2.0, direction: (Complex::new(1.0, 0.0) - inv_k) * Complex::i() }
            }
            Err(e) => return Err(e),
        };
        push("w-s".into(), "w", "s_image", w_s, s_radius * s_radius > data.k_abs());
        let base = &sc.avoided.base;
        push(
            "w-central".into(),
            "w",
            "avoided",
            Curve::Circle(Circle { center: Complex::new(0.0, 0.0), radius: base.outer_radius }),
            false,
        );
        let (central, exterior) = pulled(sc.avoided.central_region());
        push("z-central".into(), "z", "avoided", Curve::Circle(central), exterior);
        for (n, (&q, d)) in base.centers.iter().zip(sc.avoided.disk_pullbacks()).enumerate() {
            push(format!("w-d{}", n + 1), "w", "avoided", Curve::Circle(Circle { center: q, radius: base.delta }), false);
            let (c, exterior) = pulled(d);
            push(format!("z-d{}", n + 1), "z", "avoided", Curve::Circle(c), exterior);
        }
        let half = 1.1 * sc.r.max(1.5).max(hs1_outer_bound(data));
        let w_view = Viewport { min: Complex::new(-half, -half), max: Complex::new(half, half) };
        Ok(Self { entries, z_view: sc.viewport, w_view, sc: sc.clone(), s_radius })
    }

    pub fn report(&self) -> RegionsReport {
        let g = &self.sc.g;
        RegionsReport {
            map: [g.a, g.b, g.c, g.d].map(CNum::from),
            fixed_points: (&self.sc.data).into(),
            big_r: Num(self.sc.r),
            delta: Num(self.sc.avoided.base.delta),
            s_radius: Num(self.s_radius),
            z_window: Window { min: self.z_view.min.into(), max: self.z_view.max.into() },
            w_window: Window { min: self.w_view.min.into(), max: self.w_view.max.into() },
            curves: self.entries.iter().map(Entry::record).collect(),
        }
    }

    /// Three 600×600 panels: z, w, and w zoomed onto the avoided region. Each
    /// curve carries its exact parameters as `data-*` attributes matching the
    /// JSON record with the same id (the zoomed copies are prefixed `zoom-`).
    pub fn svg(&self) -> String {
        let total = 3 * PANEL + 2 * GAP;
        let base = &self.sc.avoided.base;
        let half = 1.2 * (1.0 / base.kabs() + base.delta).max(base.outer_radius);
        let zoom = Viewport { min: Complex::new(-half, -half), max: Complex::new(half, half) };
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{total}" height="{PANEL}" viewBox="0 0 {total} {PANEL}">"#
        );
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{total}" height="{PANEL}" fill="white"/>"#);
        let step = (PANEL + GAP) as f64;
        let panels = [
            ("z", "z", "", self.z_view, 0.0, "z-plane"),
            ("w", "w", "", self.w_view, step, "w-plane"),
            ("zoom", "w", "zoom-", zoom, 2.0 * step, "w-plane, avoided region"),
        ];
        for (name, source, prefix, view, x0, title) in panels {
            let tf = Transform::new(view, x0);
            let _ = writeln!(
                s,
                r#"<clipPath id="clip-{name}"><rect x="{x0}" y="0" width="{PANEL}" height="{PANEL}"/></clipPath>"#
            );
            let _ = writeln!(s, r#"<g id="panel-{name}" clip-path="url(#clip-{name})">"#);
            let _ = writeln!(s, r#"<rect x="{x0}" y="0" width="{PANEL}" height="{PANEL}" fill="none" stroke="black"/>"#);
            for layer in ["c_family", "b_r", "s_boundary", "s_image", "avoided"] {
                let items: Vec<&Entry> = self.entries.iter().filter(|e| e.panel == source && e.layer == layer).collect();
                if items.is_empty() {
                    continue;
                }
                let _ = writeln!(
                    s,
                    r#"<g id="{name}-{layer}" class="{layer}" fill="{}" stroke="{}">"#,
                    fill(layer),
                    stroke(layer)
                );
                for e in items {
                    s.push_str(&tf.element(e, prefix));
                }
                s.push_str("</g>\n");
            }
            let marks: Vec<(&str, Complex)> = match name {
                "z" => vec![("alpha", self.sc.data.alpha), ("beta", self.sc.data.beta)],
                "w" => vec![("1", Complex::new(1.0, 0.0)), ("0", Complex::new(0.0, 0.0))],
                _ => vec![("0", Complex::new(0.0, 0.0)), ("1/k", self.sc.data.k.inv())],
            };
            for (label, p) in marks {
                let (x, y) = tf.point(p);
                let _ = writeln!(
                    s,
                    r#"<circle class="marker" cx="{x:.4}" cy="{y:.4}" r="3" fill="black"/><text x="{:.4}" y="{:.4}" font-size="12">{label}</text>"#,
                    x + 5.0,
                    y - 5.0
                );
            }
            let _ = writeln!(s, r#"<text x="{:.1}" y="16" font-size="14">{title}</text>"#, x0 + 8.0);
            s.push_str("</g>\n");
        }
        s.push_str("</svg>\n");
        s
    }
}

fn pulled(d: PulledBackDisk) -> (Circle, bool) {
    match d {
        PulledBackDisk::Bounded(c) => (c, false),
        PulledBackDisk::Exterior(c) => (c, true),
    }
}

const PANEL: usize = 600;
const GAP: usize = 20;
const INSET: f64 = 20.0;

fn stroke(layer: &str) -> &'static str {
    match layer {
        "c_family" => "#9e9e9e",
        "b_r" => "#1565c0",
        "s_boundary" | "s_image" => "#2e7d32",
        _ => "#c62828",
    }
}

fn fill(layer: &str) -> &'static str {
    if layer == "avoided" {
        "#ef9a9a"
    } else {
        "none"
    }
}

/// Maps a viewport uniformly onto a square panel, `y` pointing up.
struct Transform {
    scale: f64,
    cx: f64,
    cy: f64,
    mid: Complex,
}

impl Transform {
    fn new(v: Viewport, x0: f64) -> Self {
        let usable = PANEL as f64 - 2.0 * INSET;
        let scale = usable / v.width().max(v.height());
        Self { scale, cx: x0 + PANEL as f64 / 2.0, cy: PANEL as f64 / 2.0, mid: (v.min + v.max) / 2.0 }
    }

    fn point(&self, z: Complex) -> (f64, f64) {
        let d = (z - self.mid) * self.scale;
        (self.cx + d.re, self.cy - d.im)
    }

    fn element(&self, e: &Entry, prefix: &str) -> String {
        let ext = if e.exterior { " data-exterior=\"true\"" } else { "" };
        match e.curve {
            Curve::Circle(c) => {
                let (x, y) = self.point(c.center);
                let fill = if e.exterior { r#" fill="none""# } else { "" };
                format!(
                    "<circle id=\"{prefix}{}\" cx=\"{x:.4}\" cy=\"{y:.4}\" r=\"{:.4}\"{fill} data-center-re=\"{}\" data-center-im=\"{}\" data-radius=\"{}\"{ext}/>\n",
                    e.id,
                    c.radius * self.scale,
                    fmt_num(c.center.re),
                    fmt_num(c.center.im),
                    fmt_num(c.radius)
                )
            }
            Curve::Line { point, direction } => {
                // long enough to cross the panel; the clip path trims it
                let reach = 4.0 * PANEL as f64 / self.scale;
                let u = direction / direction.norm();
                let (x1, y1) = self.point(point - u * reach);
                let (x2, y2) = self.point(point + u * reach);
                format!(
                    "<line id=\"{prefix}{}\" x1=\"{x1:.4}\" y1=\"{y1:.4}\" x2=\"{x2:.4}\" y2=\"{y2:.4}\" data-point-re=\"{}\" data-point-im=\"{}\" data-direction-re=\"{}\" data-direction-im=\"{}\"/>\n",
                    e.id,
                    fmt_num(point.re),
                    fmt_num(point.im),
                    fmt_num(direction.re),
                    fmt_num(direction.im)
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario() -> Scenario {
        Scenario::new(&example_map(), 0.005, 2.0, None).unwrap()
    }

    #[test]
    fn numbers_have_17_significant_digits() {
        assert_eq!(fmt_num(25.0), "2.5000000000000000e1");
        assert_eq!(fmt_num(-0.1), "-1.0000000000000001e-1");
        assert_eq!(fmt_num(0.1).parse::<f64>().unwrap(), 0.1);
        let json = to_json(&CNum::from(Complex::new(1.5, -2.0)));
        assert!(json.contains("\"re\": 1.5000000000000000e0"), "{json}");
        assert_eq!(to_json(&Num(f64::NAN)).trim(), "null");
    }

    #[test]
    fn region_records_match_library_closed_forms() {
        let sc = scenario();
        let plot = RegionPlot::new(&sc, 1.0).unwrap();
        let rep = plot.report();
        let ws = rep.curves.iter().find(|c| c.id == "w-s").unwrap();
        let closed = h_boundary_circle_of_s(&sc.data, &sc.g, 1.0).unwrap();
        assert_eq!(ws.radius, Some(Num(closed.radius)));
        assert_eq!(ws.center, Some(closed.center.into()));
        assert_eq!(rep.curves.iter().filter(|c| c.layer == "avoided" && c.panel == "w").count(), 1 + sc.avoided.base.n_disks);
    }

    #[test]
    fn every_svg_element_has_a_json_record() {
        let sc = scenario();
        let plot = RegionPlot::new(&sc, 1.0).unwrap();
        let svg = plot.svg();
        for c in plot.report().curves {
            let needle = format!("id=\"{}\"", c.id);
            let at = svg.find(&needle).unwrap_or_else(|| panic!("{} missing", c.id));
            let tail = &svg[at..svg[at..].find('\n').unwrap() + at];
            if let Some(r) = c.radius {
                assert!(tail.contains(&format!("data-radius=\"{}\"", fmt_num(r.0))));
            }
        }
    }

    #[test]
    fn line_case_at_sqrt_k() {
        let sc = scenario();
        let plot = RegionPlot::new(&sc, sc.data.sqrt_k_abs()).unwrap();
        let ws = plot.report().curves.into_iter().find(|c| c.id == "w-s").unwrap();
        assert_eq!(ws.kind, "line");
        assert!(plot.svg().contains("<line id=\"w-s\""));
    }

    #[test]
    fn erratum_only_for_example_map() {
        assert!(erratum_for(&example_map()).is_some());
        let other = MoebiusMap::new(
            Complex::new(2.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(1.0, 0.0),
        )
        .unwrap();
        assert!(erratum_for(&other).is_none());
    }
}
