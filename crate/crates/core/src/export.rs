//! CSV traces, family bundles and SVG portraits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::degeneracy::{Chart, ProjectiveDirection};
use crate::error::{GeoError, Result};
use crate::families::FamilySpec;
use crate::geoflow::{causal_type_of, CausalType, GeodesicCurve, Sample, Termination};
use crate::metric::{Bbox, MetricField};

pub const CSV_HEADER: &str = "t,x,y,chart,dirvalue,F,Delta,type";

fn chart_label(c: Chart) -> &'static str {
    match c {
        Chart::P => "p",
        Chart::PBAR => "pbar",
    }
}

/// Pointwise type of a sample under the hysteresis band.
pub fn sample_type(s: &Sample, band: f64) -> CausalType {
    causal_type_of(std::slice::from_ref(s), band)
}

/// Curve as CSV. Floats use the shortest representation that parses back
/// to the same bits.
pub fn curve_csv(curve: &GeodesicCurve, band: f64) -> String {
    let mut out = String::with_capacity(64 * curve.samples.len() + 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &curve.samples {
        let _ = writeln!(
            out,
            "{:?},{:?},{:?},{},{:?},{:?},{:?},{}",
            s.t,
            s.x,
            s.y,
            chart_label(s.dir.chart),
            s.dir.value,
            s.f,
            s.delta,
            sample_type(s, band).label()
        );
    }
    let _ = writeln!(out, "# termination: {}", curve.termination.label());
    let _ = writeln!(out, "# type: {}", curve.causal_type.label());
    out
}

/// Parsed CSV trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvCurve {
    pub samples: Vec<Sample>,
    pub types: Vec<CausalType>,
    pub termination: Option<Termination>,
    pub causal_type: Option<CausalType>,
}

pub fn parse_curve_csv(text: &str) -> Result<CsvCurve> {
    let bad = |line: usize, msg: &str| GeoError::Parse { pos: line, msg: msg.to_string() };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(bad(0, "missing CSV header")),
    }
    let mut out = CsvCurve { samples: vec![], types: vec![], termination: None, causal_type: None };
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            let c = c.trim();
            if let Some(v) = c.strip_prefix("termination:") {
                out.termination = Some(Termination::parse(v.trim()).ok_or_else(|| bad(i, "unknown termination"))?);
            } else if let Some(v) = c.strip_prefix("type:") {
                out.causal_type = Some(CausalType::parse(v.trim()).ok_or_else(|| bad(i, "unknown type"))?);
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(bad(i, "expected 8 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i, "bad number"));
        let chart = match f[3] {
            "p" => Chart::P,
            "pbar" => Chart::PBAR,
            _ => return Err(bad(i, "bad chart")),
        };
        out.samples.push(Sample {
            t: num(f[0])?,
            x: num(f[1])?,
            y: num(f[2])?,
            dir: ProjectiveDirection { chart, value: num(f[4])? },
            f: num(f[5])?,
            delta: num(f[6])?,
        });
        out.types.push(CausalType::parse(f[7]).ok_or_else(|| bad(i, "bad type"))?);
    }
    Ok(out)
}

pub fn write_curve_csv(path: &Path, curve: &GeodesicCurve, band: f64) -> Result<()> {
    fs::write(path, curve_csv(curve, band))?;
    Ok(())
}

#[derive(Serialize)]
struct FamilyDoc<'a> {
    family: &'a FamilySpec,
    traces: Vec<String>,
}

/// Sibling directory for the member traces of `json_path`.
pub fn traces_dir(json_path: &Path) -> PathBuf {
    let stem = json_path.file_stem().and_then(|s| s.to_str()).unwrap_or("family");
    json_path.with_file_name(format!("{}_traces", stem))
}

/// Write the family JSON and one CSV per member; returns the CSV paths.
pub fn write_family(json_path: &Path, spec: &FamilySpec, band: f64) -> Result<Vec<PathBuf>> {
    let dir = traces_dir(json_path);
    fs::create_dir_all(&dir)?;
    let mut paths = Vec::with_capacity(spec.members.len());
    let mut names = Vec::with_capacity(spec.members.len());
    for (i, m) in spec.members.iter().enumerate() {
        let name = format!("member_{:03}.csv", i);
        let p = dir.join(&name);
        write_curve_csv(&p, &m.curve, band)?;
        names.push(format!("{}/{}", dir.file_name().and_then(|s| s.to_str()).unwrap_or(""), name));
        paths.push(p);
    }
    let doc = FamilyDoc { family: spec, traces: names };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| GeoError::Io(e.to_string()))?;
    fs::write(json_path, text)?;
    Ok(paths)
}

/// Line conventions of the portraits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitStyle {
    pub bbox: Bbox,
    pub width_px: f64,
    /// (stroke width, dash array) per causal type
    pub timelike: (f64, Option<&'static str>),
    pub spacelike: (f64, Option<&'static str>),
    pub isotropic: (f64, Option<&'static str>),
    pub discriminant: (f64, Option<&'static str>),
    /// marching-squares resolution for S0
    pub grid: usize,
    pub band: f64,
}

impl PortraitStyle {
    pub fn new(bbox: Bbox) -> Self {
        PortraitStyle {
            bbox,
            width_px: 600.0,
            timelike: (1.0, None),
            spacelike: (1.0, Some("5 3")),
            isotropic: (2.6, None),
            discriminant: (1.2, Some("1 3")),
            grid: 200,
            band: 1e-7,
        }
    }

    pub fn stroke(&self, t: CausalType) -> (f64, Option<&'static str>) {
        match t {
            CausalType::Timelike => self.timelike,
            CausalType::Spacelike => self.spacelike,
            CausalType::Isotropic => self.isotropic,
            // a mixed run only appears for one-sample pieces; draw it thin
            CausalType::Mixed => (0.5, None),
        }
    }
}

/// Accumulates curves and marks, renders one SVG.
pub struct Portrait {
    pub style: PortraitStyle,
    pub title: String,
    curves: Vec<Vec<(f64, f64, CausalType)>>,
    marks: Vec<[f64; 2]>,
    s0: Vec<[[f64; 2]; 2]>,
}

impl Portrait {
    pub fn new(title: impl Into<String>, style: PortraitStyle) -> Self {
        Portrait { style, title: title.into(), curves: vec![], marks: vec![], s0: vec![] }
    }

    pub fn add_curve(&mut self, c: &GeodesicCurve) {
        let band = self.style.band;
        self.curves.push(c.samples.iter().map(|s| (s.x, s.y, sample_type(s, band))).collect());
    }

    /// Curve drawn in one style, e.g. an arc of S0 traced as a curve.
    pub fn add_polyline(&mut self, pts: &[[f64; 2]], t: CausalType) {
        self.curves.push(pts.iter().map(|p| (p[0], p[1], t)).collect());
    }

    pub fn add_mark(&mut self, q: [f64; 2]) {
        self.marks.push(q);
    }

    /// Zero set of Δ by marching squares.
    pub fn add_discriminant(&mut self, m: &MetricField) {
        self.s0.extend(marching_squares(|x, y| m.delta(x, y).unwrap_or(f64::NAN), &self.style.bbox, self.style.grid));
    }

    pub fn curve_count(&self) -> usize {
        self.curves.len()
    }

    pub fn render(&self) -> String {
        let bb = &self.style.bbox;
        let w = self.style.width_px;
        let h = (w * bb.height() / bb.width()).max(1.0);
        let sx = |x: f64| (x - bb.xmin) / bb.width() * w;
        let sy = |y: f64| (bb.ymax - y) / bb.height() * h;
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.3} {h:.3}">"#
        );
        let _ = writeln!(out, "<title>{}</title>", xml_escape(&self.title));
        let _ = writeln!(out, r#"<rect x="0" y="0" width="{w:.3}" height="{h:.3}" fill="white"/>"#);
        let stroke_attr = |(sw, dash): (f64, Option<&str>)| {
            let mut s = format!(r#"fill="none" stroke="black" stroke-width="{sw}""#);
            if let Some(d) = dash {
                let _ = write!(s, r#" stroke-dasharray="{d}""#);
            }
            s
        };
        if !self.s0.is_empty() {
            let _ = write!(out, r#"<path class="discriminant" {} stroke-linecap="round" d=""#, stroke_attr(self.style.discriminant));
            for seg in &self.s0 {
                let _ = write!(out, "M{:.2} {:.2}L{:.2} {:.2}", sx(seg[0][0]), sy(seg[0][1]), sx(seg[1][0]), sy(seg[1][1]));
            }
            out.push_str("\"/>\n");
        }
        for c in &self.curves {
            for (t, run) in runs(c) {
                if run.len() < 2 {
                    continue;
                }
                let _ = write!(out, r#"<polyline class="{}" {} points=""#, t.label(), stroke_attr(self.style.stroke(t)));
                let mut last: Option<(f64, f64)> = None;
                for &(x, y) in &run {
                    let p = (sx(x), sy(y));
                    if !p.0.is_finite() || !p.1.is_finite() {
                        continue;
                    }
                    // drop sub-pixel steps
                    if let Some(l) = last {
                        if (p.0 - l.0).hypot(p.1 - l.1) < 0.3 {
                            continue;
                        }
                    }
                    let _ = write!(out, "{:.2},{:.2} ", p.0, p.1);
                    last = Some(p);
                }
                out.push_str("\"/>\n");
            }
        }
        for q in &self.marks {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"#, sx(q[0]), sy(q[1]));
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Split a sampled curve into maximal same-type runs; neighbouring runs
/// share their boundary point so the drawing stays connected.
fn runs(c: &[(f64, f64, CausalType)]) -> Vec<(CausalType, Vec<(f64, f64)>)> {
    let mut out: Vec<(CausalType, Vec<(f64, f64)>)> = Vec::new();
    for &(x, y, t) in c {
        match out.last_mut() {
            Some((lt, pts)) if *lt == t => pts.push((x, y)),
            Some((_, pts)) => {
                let last = *pts.last().expect("non-empty run");
                out.push((t, vec![last, (x, y)]));
            }
            None => out.push((t, vec![(x, y)])),
        }
    }
    out
}

pub fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line segments approximating {f = 0} on an n×n grid over `bb`.
pub fn marching_squares<F: Fn(f64, f64) -> f64>(f: F, bb: &Bbox, n: usize) -> Vec<[[f64; 2]; 2]> {
    let n = n.max(2);
    let gx = |i: usize| bb.xmin + bb.width() * i as f64 / n as f64;
    let gy = |j: usize| bb.ymin + bb.height() * j as f64 / n as f64;
    let v: Vec<Vec<f64>> = (0..=n).map(|i| (0..=n).map(|j| f(gx(i), gy(j))).collect()).collect();
    let mut segs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let mut cross = Vec::with_capacity(4);
            for k in 0..4 {
                let (a, b) = (c[k], c[(k + 1) % 4]);
                let (fa, fb) = (v[a.0][a.1], v[b.0][b.1]);
                if !fa.is_finite() || !fb.is_finite() {
                    continue;
                }
                if (fa < 0.0) != (fb < 0.0) {
                    let t = fa / (fa - fb);
                    cross.push([gx(a.0) + t * (gx(b.0) - gx(a.0)), gy(a.1) + t * (gy(b.1) - gy(a.1))]);
                }
            }
            // saddle cells give four crossings; pair them in order
            for pair in cross.chunks_exact(2) {
                segs.push([pair[0], pair[1]]);
            }
        }
    }
    segs
}
