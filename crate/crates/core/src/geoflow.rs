//! Geodesic field V on the projectivized tangent bundle, the lifted
//! isotropic field X, the natural-parameter system and monitors.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cubic::BinaryCubic;
use crate::degeneracy::{chart_coeffs, chart_second, mu_from, Chart, ProjectiveDirection};
use crate::error::{GeoError, Result};
use crate::metric::{Bbox, Coeffs, MetricField, Second};
use crate::ode::{initial_step, trial, Controller, Trial};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectiveJet {
    pub x: f64,
    pub y: f64,
    pub dir: ProjectiveDirection,
}

impl ProjectiveJet {
    pub fn new(x: f64, y: f64, dir: ProjectiveDirection) -> Self {
        ProjectiveJet { x, y, dir: dir.canonical() }
    }

    pub fn with_slope(x: f64, y: f64, p: f64) -> Self {
        Self::new(x, y, ProjectiveDirection::from_vector(1.0, p))
    }

    /// Chart coordinates (x̄ = y, ȳ = x in chart PBAR).
    pub fn chart_state(&self) -> [f64; 3] {
        match self.dir.chart {
            Chart::P => [self.x, self.y, self.dir.value],
            Chart::PBAR => [self.y, self.x, self.dir.value],
        }
    }

    pub fn from_chart_state(chart: Chart, s: &[f64; 3]) -> Self {
        match chart {
            Chart::P => ProjectiveJet { x: s[0], y: s[1], dir: ProjectiveDirection::p(s[2]) },
            Chart::PBAR => ProjectiveJet { x: s[1], y: s[0], dir: ProjectiveDirection::pbar(s[2]) },
        }
    }
}

/// Velocity of a field in the chart coordinates of `chart`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartVelocity {
    pub chart: Chart,
    pub v: [f64; 3],
}

impl ChartVelocity {
    /// (ẋ, ẏ) in the original coordinate order.
    pub fn base(&self) -> [f64; 2] {
        match self.chart {
            Chart::P => [self.v[0], self.v[1]],
            Chart::PBAR => [self.v[1], self.v[0]],
        }
    }
}

fn v_in_chart(k: &Coeffs, p: f64) -> [f64; 3] {
    let d = k.delta();
    let mu = mu_from(k);
    let m = ((mu[3] * p + mu[2]) * p + mu[1]) * p + mu[0];
    [2.0 * d, 2.0 * d * p, m]
}

/// V = 2Δ(∂x + p∂y) + M ∂p in the chart of the jet; `orientation` = −1
/// gives the opposite representative.
pub fn field_v(m: &MetricField, j: &ProjectiveJet, orientation: f64) -> Result<ChartVelocity> {
    let k = chart_coeffs(&m.eval(j.x, j.y)?, j.dir.chart);
    let v = v_in_chart(&k, j.dir.value);
    Ok(ChartVelocity { chart: j.dir.chart, v: v.map(|c| c * orientation) })
}

/// F = a + 2bp + cp² in the chart of the jet, with its partials.
fn f_parts(k: &Coeffs, p: f64) -> (f64, f64, f64, f64) {
    let f = k.a + 2.0 * k.b * p + k.c * p * p;
    let fp = 2.0 * k.b + 2.0 * k.c * p;
    let fx = k.a_x + 2.0 * k.b_x * p + k.c_x * p * p;
    let fy = k.a_y + 2.0 * k.b_y * p + k.c_y * p * p;
    (f, fp, fx, fy)
}

/// F in the chart of the jet (not normalized).
pub fn f_chart(m: &MetricField, j: &ProjectiveJet) -> Result<f64> {
    let k = chart_coeffs(&m.eval(j.x, j.y)?, j.dir.chart);
    Ok(f_parts(&k, j.dir.value).0)
}

/// F on a unit direction vector; chart independent.
pub fn f_unit(m: &MetricField, j: &ProjectiveJet) -> Result<f64> {
    Ok(crate::degeneracy::f_unit(&m.eval(j.x, j.y)?, &j.dir))
}

/// X = (F_p, p F_p, −(F_x + p F_y)) for a jet on F = 0.
pub fn field_x(m: &MetricField, j: &ProjectiveJet, event_tol: f64) -> Result<ChartVelocity> {
    let k = chart_coeffs(&m.eval(j.x, j.y)?, j.dir.chart);
    let p = j.dir.value;
    let (f, fp, fx, fy) = f_parts(&k, p);
    if f.abs() >= event_tol * (1.0 + p * p) {
        return Err(GeoError::Invalid(format!("jet not on F=0 (F = {:e})", f)));
    }
    Ok(ChartVelocity { chart: j.dir.chart, v: [fp, p * fp, -(fx + p * fy)] })
}

/// Derivative of the coefficient record along x (axis 0) or y (axis 1).
fn coeff_deriv(k: &Coeffs, s: &Second, axis: usize) -> Coeffs {
    let [a2, b2, c2] = s.d;
    if axis == 0 {
        Coeffs { a: k.a_x, b: k.b_x, c: k.c_x, a_x: a2[0], a_y: a2[1], b_x: b2[0], b_y: b2[1], c_x: c2[0], c_y: c2[1] }
    } else {
        Coeffs { a: k.a_y, b: k.b_y, c: k.c_y, a_x: a2[1], a_y: a2[2], b_x: b2[1], b_y: b2[2], c_x: c2[1], c_y: c2[2] }
    }
}

/// μ is a sum of products of two coefficient entries, so its derivative is
/// the symmetrized bilinear form on (k, ∂k).
fn mu_bilinear(u: &Coeffs, w: &Coeffs) -> [f64; 4] {
    [
        u.a * (w.a_y - 2.0 * w.b_x) + u.a_x * w.b,
        u.b * (3.0 * w.a_y - 2.0 * w.b_x) + u.a_x * w.c - 2.0 * u.a * w.c_x,
        u.b * (2.0 * w.b_y - 3.0 * w.c_x) + 2.0 * u.a_y * w.c - u.a * w.c_y,
        u.c * (2.0 * w.b_y - w.c_x) - u.b * w.c_y,
    ]
}

fn mu_deriv(k: &Coeffs, dk: &Coeffs) -> [f64; 4] {
    let l = mu_bilinear(k, dk);
    let r = mu_bilinear(dk, k);
    [l[0] + r[0], l[1] + r[1], l[2] + r[2], l[3] + r[3]]
}

fn poly(mu: &[f64; 4], p: f64) -> f64 {
    ((mu[3] * p + mu[2]) * p + mu[1]) * p + mu[0]
}

fn poly_d(mu: &[f64; 4], p: f64) -> f64 {
    (3.0 * mu[3] * p + 2.0 * mu[2]) * p + mu[1]
}

/// Exact Jacobian of V in chart coordinates.
pub fn v_jacobian(m: &MetricField, j: &ProjectiveJet) -> Result<[[f64; 3]; 3]> {
    let k = chart_coeffs(&m.eval(j.x, j.y)?, j.dir.chart);
    let s = chart_second(&m.eval_second(j.x, j.y)?, j.dir.chart);
    let p = j.dir.value;
    let g = k.grad_delta();
    let d = k.delta();
    let mu = mu_from(&k);
    let mux = mu_deriv(&k, &coeff_deriv(&k, &s, 0));
    let muy = mu_deriv(&k, &coeff_deriv(&k, &s, 1));
    Ok([
        [2.0 * g[0], 2.0 * g[1], 0.0],
        [2.0 * p * g[0], 2.0 * p * g[1], 2.0 * d],
        [poly(&mux, p), poly(&muy, p), poly_d(&mu, p)],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spectrum {
    /// sorted by decreasing modulus
    pub lambda: [Complex64; 3],
}

/// Eigenvalues of the V Jacobian at a singular jet.
pub fn singular_spectrum(m: &MetricField, j: &ProjectiveJet, tol: f64) -> Result<Spectrum> {
    let k = chart_coeffs(&m.eval(j.x, j.y)?, j.dir.chart);
    let v = v_in_chart(&k, j.dir.value);
    let scale = 1.0 + k.a.abs().max(k.b.abs()).max(k.c.abs()).powi(2);
    if v[0].abs() > tol * scale || v[2].abs() > tol * scale {
        return Err(GeoError::Invalid(format!("jet is not singular (2Δ = {:e}, M = {:e})", v[0], v[2])));
    }
    let jac = v_jacobian(m, j)?;
    let mat = Matrix3::from_fn(|r, c| jac[r][c]);
    let ev = mat.complex_eigenvalues();
    let mut lambda = [ev[0], ev[1], ev[2]];
    lambda.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    Ok(Spectrum { lambda })
}

/// Closed form of the same spectrum: {2(Δ_x + pΔ_y), M_p, 0}.
pub fn singular_spectrum_closed(m: &MetricField, j: &ProjectiveJet) -> Result<[f64; 3]> {
    let k = chart_coeffs(&m.eval(j.x, j.y)?, j.dir.chart);
    let g = k.grad_delta();
    let p = j.dir.value;
    Ok([2.0 * (g[0] + p * g[1]), poly_d(&mu_from(&k), p), 0.0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: Option<f64>,
    pub chart_switch_threshold: f64,
    pub r_stop: f64,
    pub event_tol: f64,
    pub max_steps: usize,
    /// Dense samples so that consecutive samples are at most
    /// min(sample_gap, sample_rel·|pos − sample_origin|) apart.
    pub sample_gap: Option<f64>,
    pub sample_rel: Option<f64>,
    pub sample_origin: Option<[f64; 2]>,
    pub bbox: Option<Bbox>,
    /// disable the singular-set stop (used by vertical-line tests)
    pub stop_at_singular: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: None,
            chart_switch_threshold: 1.0,
            r_stop: 1e-6,
            event_tol: 1e-7,
            max_steps: 200_000,
            sample_gap: None,
            sample_rel: None,
            sample_origin: None,
            bbox: None,
            stop_at_singular: true,
        }
    }
}

impl IntegratorOptions {
    /// Parse overrides like `rel_tol=1e-10,r_stop=1e-7`; a bare number sets rel_tol.
    pub fn with_overrides(mut self, text: &str) -> Result<Self> {
        for item in text.split(|c| c == ',' || c == ';').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, val) = match item.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => ("rel_tol", item),
            };
            let v: f64 = val.parse().map_err(|_| GeoError::Invalid(format!("bad tolerance value '{}'", val)))?;
            if !(v > 0.0) {
                return Err(GeoError::Invalid(format!("tolerance {} must be positive", key)));
            }
            match key {
                "rel_tol" | "rel" => self.rel_tol = v,
                "abs_tol" | "abs" => self.abs_tol = v,
                "r_stop" => self.r_stop = v,
                "event_tol" => self.event_tol = v,
                "max_step" => self.max_step = Some(v),
                "chart_switch_threshold" => self.chart_switch_threshold = v,
                _ => return Err(GeoError::Invalid(format!("unknown tolerance key '{}'", key))),
            }
        }
        Ok(self)
    }

    pub fn from_env() -> Result<Self> {
        match std::env::var("PSEUDOGEO_TOL") {
            Ok(s) => Self::default().with_overrides(&s),
            Err(_) => Ok(Self::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    SpanExhausted,
    LeftBbox,
    HitSingularSet,
    StepUnderflow,
    StepBudget,
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::SpanExhausted => "span-exhausted",
            Termination::LeftBbox => "left-bbox",
            Termination::HitSingularSet => "hit-singular-set",
            Termination::StepUnderflow => "step-underflow",
            Termination::StepBudget => "step-budget",
        }
    }

    pub fn parse(s: &str) -> Option<Termination> {
        [
            Termination::SpanExhausted,
            Termination::LeftBbox,
            Termination::HitSingularSet,
            Termination::StepUnderflow,
            Termination::StepBudget,
        ]
        .into_iter()
        .find(|t| t.label() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalType {
    Timelike,
    Spacelike,
    Isotropic,
    Mixed,
}

impl CausalType {
    pub fn label(&self) -> &'static str {
        match self {
            CausalType::Timelike => "timelike",
            CausalType::Spacelike => "spacelike",
            CausalType::Isotropic => "isotropic",
            CausalType::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Option<CausalType> {
        [CausalType::Timelike, CausalType::Spacelike, CausalType::Isotropic, CausalType::Mixed]
            .into_iter()
            .find(|t| t.label() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub dir: ProjectiveDirection,
    /// F on the unit direction vector
    pub f: f64,
    pub delta: f64,
}

impl Sample {
    pub fn jet(&self) -> ProjectiveJet {
        ProjectiveJet { x: self.x, y: self.y, dir: self.dir }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EventKind {
    DeltaSignChange,
    FSignChange,
    ChartSwitch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicCurve {
    pub samples: Vec<Sample>,
    pub causal_type: CausalType,
    pub termination: Termination,
    pub events: Vec<Event>,
    pub steps: usize,
}

impl GeodesicCurve {
    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("curve has samples")
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.samples.iter().map(|s| [s.x, s.y]).collect()
    }

    /// Join an inward leg (reversed) with an outward leg sharing the seed.
    pub fn join(inward: &GeodesicCurve, outward: &GeodesicCurve) -> GeodesicCurve {
        let mut samples: Vec<Sample> = inward.samples.iter().rev().map(|s| Sample { t: -s.t, ..*s }).collect();
        samples.extend(outward.samples.iter().skip(1).cloned());
        let mut events = inward.events.clone();
        events.extend(outward.events.iter().cloned());
        let causal_type = causal_type_of(&samples, 1e-7);
        GeodesicCurve { samples, causal_type, termination: outward.termination, events, steps: inward.steps + outward.steps }
    }
}

/// Causal type from F samples with hysteresis band ±band.
pub fn causal_type_of(samples: &[Sample], band: f64) -> CausalType {
    let mut neg = false;
    let mut pos = false;
    for s in samples {
        if s.f < -band {
            neg = true;
        } else if s.f > band {
            pos = true;
        }
    }
    match (neg, pos) {
        (false, false) => CausalType::Isotropic,
        (true, false) => CausalType::Timelike,
        (false, true) => CausalType::Spacelike,
        (true, true) => CausalType::Mixed,
    }
}

pub fn causal_type(curve: &GeodesicCurve, opts: &IntegratorOptions) -> CausalType {
    causal_type_of(&curve.samples, opts.event_tol)
}

/// Phase-space distance to the singular set {Δ = 0, M = 0}, estimated from
/// the distance to S0 and the angle to the nearest real root of M.
pub fn singular_distance(k: &Coeffs, dir: &ProjectiveDirection, cutoff: f64) -> f64 {
    let g = k.grad_delta();
    let gn = g[0].hypot(g[1]);
    let d_s0 = if gn > 0.0 { k.delta().abs() / gn } else { f64::INFINITY };
    if d_s0 > cutoff {
        return d_s0;
    }
    let cubic = BinaryCubic { k: mu_from(k) };
    let dp = match cubic.roots(1e-12) {
        None => 0.0,
        Some(r) => r
            .roots
            .iter()
            .map(|(v, _)| dir.distance(&ProjectiveDirection::from_vector(v[0], v[1])))
            .fold(f64::INFINITY, f64::min),
    };
    d_s0.hypot(dp)
}

fn make_sample(m: &MetricField, t: f64, chart: Chart, s: &[f64; 3]) -> Result<(Sample, Coeffs)> {
    let j = ProjectiveJet::from_chart_state(chart, s);
    let k = m.eval(j.x, j.y)?;
    let f = crate::degeneracy::f_unit(&k, &j.dir);
    Ok((Sample { t, x: j.x, y: j.y, dir: j.dir, f, delta: k.delta() }, k))
}

/// Bisect θ ∈ (0, 1] for a sign change of g along the dense output.
fn bisect<const N: usize>(tr: &Trial<N>, g: &dyn Fn(&[f64; N]) -> f64, g0: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let gm = g(&tr.at(mid));
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (g0 > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    hi
}

fn base_of(chart: Chart, s: &[f64; 3]) -> [f64; 2] {
    match chart {
        Chart::P => [s[0], s[1]],
        Chart::PBAR => [s[1], s[0]],
    }
}

/// Integrate V from `j0` over parameter length |span|; negative span runs
/// the opposite orientation.
pub fn integrate_geodesic(m: &MetricField, j0: &ProjectiveJet, span: f64, opts: &IntegratorOptions) -> Result<GeodesicCurve> {
    let bbox = opts.bbox.unwrap_or(m.bbox);
    if !bbox.contains(j0.x, j0.y) {
        return Err(GeoError::Invalid(format!("start ({}, {}) outside bbox", j0.x, j0.y)));
    }
    let j0 = ProjectiveJet::new(j0.x, j0.y, j0.dir);
    let mut chart = j0.dir.chart;
    let mut sigma = if span < 0.0 { -1.0 } else { 1.0 };
    let total = span.abs();
    let mut s = j0.chart_state();
    let mut t = 0.0;

    let (first, k0) = make_sample(m, 0.0, chart, &s)?;
    let mut samples = vec![first];
    let mut events = Vec::new();
    let band = opts.event_tol;
    let mut delta_sign = sign_band(k0.delta(), 1e-14 * (1.0 + k0.a.abs().max(k0.c.abs()).powi(2)));
    let mut f_sign = sign_band(first.f, band);

    if opts.stop_at_singular && singular_distance(&k0, &j0.dir, opts.r_stop) < opts.r_stop {
        return Ok(GeodesicCurve { causal_type: causal_type_of(&samples, band), samples, termination: Termination::HitSingularSet, events, steps: 0 });
    }

    let rhs = |chart: Chart, sigma: f64| {
        move |_t: f64, y: &[f64; 3]| -> Result<[f64; 3]> {
            let b = base_of(chart, y);
            let k = chart_coeffs(&m.eval(b[0], b[1])?, chart);
            Ok(v_in_chart(&k, y[2]).map(|c| c * sigma))
        }
    };

    let mut f = rhs(chart, sigma);
    let mut k1 = f(t, &s)?;
    let mut h = initial_step(&s, &k1, opts.rel_tol, opts.abs_tol);
    if let Some(mx) = opts.max_step {
        h = h.min(mx);
    }
    let mut ctl = Controller::default();
    let mut steps = 0usize;
    let mut last_pos = [j0.x, j0.y];
    let termination;

    loop {
        if t >= total {
            termination = Termination::SpanExhausted;
            break;
        }
        if steps >= opts.max_steps {
            termination = Termination::StepBudget;
            break;
        }
        h = h.min(total - t);
        if let Some(mx) = opts.max_step {
            h = h.min(mx);
        }
        if h < 1e-14 * t.max(1.0) {
            termination = Termination::StepUnderflow;
            break;
        }
        let tr = match trial(&mut f, t, &s, &k1, h, opts.rel_tol, opts.abs_tol) {
            Ok(tr) => tr,
            Err(_) => {
                h *= 0.25;
                continue;
            }
        };
        let (ok, fac) = ctl.factor(tr.err);
        if !ok {
            h *= fac;
            continue;
        }
        steps += 1;
        let t_new = t + h;

        // bbox exit
        let b1 = base_of(chart, &tr.y1);
        if !bbox.contains(b1[0], b1[1]) {
            let g = |y: &[f64; 3]| {
                let b = base_of(chart, y);
                bbox.margin(b[0], b[1])
            };
            let g0 = g(&s);
            let th = bisect(&tr, &g, g0);
            // land on the boundary: take the last inside point of the bracket
            let mut lo = 0.0;
            let mut hi = th;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if g(&tr.at(mid)) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            push_dense(m, &tr, t, h, chart, 0.0, lo, &mut samples, &mut last_pos, opts)?;
            let y = tr.at(lo);
            let (smp, _) = make_sample(m, t + lo * h, chart, &y)?;
            samples.push(smp);
            termination = Termination::LeftBbox;
            break;
        }

        push_dense(m, &tr, t, h, chart, 0.0, 1.0, &mut samples, &mut last_pos, opts)?;
        let (smp, k) = make_sample(m, t_new, chart, &tr.y1)?;

        // Δ and F sign changes
        let ds = sign_band(smp.delta, 1e-14 * (1.0 + k.a.abs().max(k.c.abs()).powi(2)));
        if ds != 0 && delta_sign != 0 && ds != delta_sign {
            let g = |y: &[f64; 3]| {
                let b = base_of(chart, y);
                m.delta(b[0], b[1]).unwrap_or(0.0)
            };
            let g0 = g(&s);
            let th = bisect(&tr, &g, g0);
            let b = base_of(chart, &tr.at(th));
            events.push(Event { kind: EventKind::DeltaSignChange, t: t + th * h, x: b[0], y: b[1] });
        }
        if ds != 0 {
            delta_sign = ds;
        }
        let fs = sign_band(smp.f, band);
        if fs != 0 && f_sign != 0 && fs != f_sign {
            let g = |y: &[f64; 3]| {
                let j = ProjectiveJet::from_chart_state(chart, y);
                f_unit(m, &j).unwrap_or(0.0)
            };
            let g0 = samples[samples.len() - 1].f;
            let th = if g0 != 0.0 { bisect(&tr, &g, g0) } else { 1.0 };
            let b = base_of(chart, &tr.at(th));
            events.push(Event { kind: EventKind::FSignChange, t: t + th * h, x: b[0], y: b[1] });
        }
        if fs != 0 {
            f_sign = fs;
        }

        samples.push(smp);
        last_pos = [smp.x, smp.y];
        t = t_new;
        s = tr.y1;
        k1 = tr.k7;
        h *= fac;

        if opts.stop_at_singular && singular_distance(&k, &smp.dir, opts.r_stop) < opts.r_stop {
            termination = Termination::HitSingularSet;
            break;
        }

        if s[2].abs() > opts.chart_switch_threshold {
            let new_chart = match chart {
                Chart::P => Chart::PBAR,
                Chart::PBAR => Chart::P,
            };
            let nv = 1.0 / s[2];
            sigma *= nv.signum();
            s = [s[1], s[0], nv];
            chart = new_chart;
            f = rhs(chart, sigma);
            k1 = f(t, &s)?;
            events.push(Event { kind: EventKind::ChartSwitch, t, x: last_pos[0], y: last_pos[1] });
        }
    }
    Ok(GeodesicCurve { causal_type: causal_type_of(&samples, band), samples, termination, events, steps })
}

fn sign_band(v: f64, band: f64) -> i8 {
    if v > band {
        1
    } else if v < -band {
        -1
    } else {
        0
    }
}

/// Insert dense-output samples in (θ0, θ1) so that spacing honours the
/// requested sample gaps.
#[allow(clippy::too_many_arguments)]
fn push_dense(
    m: &MetricField,
    tr: &Trial<3>,
    t: f64,
    h: f64,
    chart: Chart,
    th0: f64,
    th1: f64,
    samples: &mut Vec<Sample>,
    last_pos: &mut [f64; 2],
    opts: &IntegratorOptions,
) -> Result<()> {
    if opts.sample_gap.is_none() && opts.sample_rel.is_none() {
        return Ok(());
    }
    let gap_at = |p: [f64; 2]| {
        let mut g = opts.sample_gap.unwrap_or(f64::INFINITY);
        if let (Some(rel), Some(o)) = (opts.sample_rel, opts.sample_origin) {
            g = g.min(rel * (p[0] - o[0]).hypot(p[1] - o[1]));
        }
        g
    };
    let end = base_of(chart, &tr.at(th1));
    let dist = (end[0] - last_pos[0]).hypot(end[1] - last_pos[1]);
    let g = gap_at(*last_pos).min(gap_at(end)).max(1e-300);
    if dist <= g {
        return Ok(());
    }
    let n = ((dist / g).ceil() as usize).min(10_000);
    for i in 1..n {
        let th = th0 + (th1 - th0) * i as f64 / n as f64;
        let y = tr.at(th);
        let (smp, _) = make_sample(m, t + th * h, chart, &y)?;
        samples.push(smp);
    }
    *last_pos = end;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NaturalSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NaturalCurve {
    pub samples: Vec<NaturalSample>,
    pub termination: Termination,
}

impl NaturalCurve {
    pub fn points(&self) -> Vec<[f64; 2]> {
        self.samples.iter().map(|s| [s.x, s.y]).collect()
    }
}

fn natural_rhs(m: &MetricField, y: &[f64; 4]) -> Result<[f64; 4]> {
    let k = m.eval(y[0], y[1])?;
    let (xd, yd) = (y[2], y[3]);
    let r1 = (k.c_x - 2.0 * k.b_y) * yd * yd - 2.0 * k.a_y * xd * yd - k.a_x * xd * xd;
    let r2 = (k.a_y - 2.0 * k.b_x) * xd * xd - 2.0 * k.c_x * xd * yd - k.c_y * yd * yd;
    let d = k.delta();
    let scale = k.a * k.a + 2.0 * k.b * k.b + k.c * k.c;
    if d.abs() <= 1e-12 * scale {
        return Err(GeoError::Degenerate("metric matrix singular".into()));
    }
    // solve [[a, b], [b, c]] (ẍ, ÿ) = (r1, r2)/2
    let xdd = 0.5 * (k.c * r1 - k.b * r2) / d;
    let ydd = 0.5 * (k.a * r2 - k.b * r1) / d;
    Ok([xd, yd, xdd, ydd])
}

fn energy(m: &MetricField, y: &[f64; 4]) -> Result<f64> {
    let k = m.eval(y[0], y[1])?;
    Ok(k.a * y[2] * y[2] + 2.0 * k.b * y[2] * y[3] + k.c * y[3] * y[3])
}

/// Second-order geodesic system in the natural parameter.
pub fn integrate_natural(m: &MetricField, q0: [f64; 2], v0: [f64; 2], span: f64, opts: &IntegratorOptions) -> Result<NaturalCurve> {
    let bbox = opts.bbox.unwrap_or(m.bbox);
    if !bbox.contains(q0[0], q0[1]) {
        return Err(GeoError::Invalid("start outside bbox".into()));
    }
    let k0 = m.eval(q0[0], q0[1])?;
    if k0.delta().abs() <= 1e-12 * (k0.a * k0.a + 2.0 * k0.b * k0.b + k0.c * k0.c) {
        return Err(GeoError::Degenerate("Δ(q0) = 0: natural system undefined".into()));
    }
    let dirn = if span < 0.0 { -1.0 } else { 1.0 };
    let total = span.abs();
    let mut s = [q0[0], q0[1], dirn * v0[0], dirn * v0[1]];
    let mut t = 0.0;
    let mut f = |_t: f64, y: &[f64; 4]| natural_rhs(m, y);
    let mut samples = vec![NaturalSample { t, x: s[0], y: s[1], vx: s[2], vy: s[3], energy: energy(m, &s)? }];
    let mut k1 = f(t, &s)?;
    let mut h = initial_step(&s, &k1, opts.rel_tol, opts.abs_tol);
    let mut ctl = Controller::default();
    let mut steps = 0;
    let mut last = q0;
    let termination;
    loop {
        if t >= total {
            termination = Termination::SpanExhausted;
            break;
        }
        if steps >= opts.max_steps {
            termination = Termination::StepBudget;
            break;
        }
        h = h.min(total - t);
        if let Some(mx) = opts.max_step {
            h = h.min(mx);
        }
        if h < 1e-14 * t.max(1.0) {
            termination = Termination::StepUnderflow;
            break;
        }
        let tr = match trial(&mut f, t, &s, &k1, h, opts.rel_tol, opts.abs_tol) {
            Ok(tr) => tr,
            Err(GeoError::Degenerate(_)) => {
                if h < 1e-10 {
                    termination = Termination::HitSingularSet;
                    break;
                }
                h *= 0.25;
                continue;
            }
            Err(e) => return Err(e),
        };
        let (ok, fac) = ctl.factor(tr.err);
        if !ok {
            h *= fac;
            continue;
        }
        steps += 1;
        let out = !bbox.contains(tr.y1[0], tr.y1[1]);
        let th_end = if out {
            let g = |y: &[f64; 4]| bbox.margin(y[0], y[1]);
            let mut lo = 0.0;
            let mut hi = 1.0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if g(&tr.at(mid)) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        } else {
            1.0
        };
        if let Some(gap) = opts.sample_gap {
            let e = tr.at(th_end);
            let dist = (e[0] - last[0]).hypot(e[1] - last[1]);
            let n = ((dist / gap).ceil() as usize).min(10_000);
            for i in 1..n {
                let th = th_end * i as f64 / n as f64;
                let y = tr.at(th);
                samples.push(NaturalSample { t: t + th * h, x: y[0], y: y[1], vx: y[2], vy: y[3], energy: energy(m, &y)? });
            }
        }
        let y = if out { tr.at(th_end) } else { tr.y1 };
        samples.push(NaturalSample { t: t + th_end * h, x: y[0], y: y[1], vx: y[2], vy: y[3], energy: energy(m, &y)? });
        last = [y[0], y[1]];
        if out {
            termination = Termination::LeftBbox;
            break;
        }
        t += h;
        s = tr.y1;
        k1 = tr.k7;
        h *= fac;
    }
    Ok(NaturalCurve { samples, termination })
}

/// α = (y − p²)/y² for the metric dy² − y dx².
pub fn clairaut_integral(j: &ProjectiveJet) -> Result<f64> {
    if j.y == 0.0 {
        return Err(GeoError::Invalid("Clairaut integral undefined on y = 0".into()));
    }
    let p = j.dir.slope();
    if !p.is_finite() {
        return Err(GeoError::Invalid("Clairaut integral undefined for vertical direction".into()));
    }
    Ok((j.y - p * p) / (j.y * j.y))
}

/// Central-difference divergence of V/(2F^{3/2}) (scaled) or of V itself,
/// in the chart coordinates of the jet.
pub fn divergence_fd(m: &MetricField, j: &ProjectiveJet, h: f64, scaled: bool) -> Result<f64> {
    let chart = j.dir.chart;
    let base = j.chart_state();
    let w = |s: [f64; 3]| -> Result<[f64; 3]> {
        let b = base_of(chart, &s);
        let k = chart_coeffs(&m.eval(b[0], b[1])?, chart);
        let v = v_in_chart(&k, s[2]);
        if !scaled {
            return Ok(v);
        }
        let f = f_parts(&k, s[2]).0;
        if f <= 0.0 {
            return Err(GeoError::Domain("F ≤ 0 inside the difference stencil".into()));
        }
        let sc = 1.0 / (2.0 * f.powf(1.5));
        Ok(v.map(|c| c * sc))
    };
    let mut div = 0.0;
    for i in 0..3 {
        let mut sp = base;
        let mut sm = base;
        sp[i] += h;
        sm[i] -= h;
        div += (w(sp)?[i] - w(sm)?[i]) / (2.0 * h);
    }
    Ok(div)
}

/// |div W| at the jet; requires F > 0.
pub fn divergence_w_residual(m: &MetricField, j: &ProjectiveJet, h: f64) -> Result<f64> {
    if f_chart(m, j)? <= 0.0 {
        return Err(GeoError::Invalid("divergence check needs F > 0".into()));
    }
    Ok(divergence_fd(m, j, h, true)?.abs())
}

/// Exact div V = 2(Δ_x + pΔ_y) + M_p in the chart of the jet.
pub fn divergence_v_exact(m: &MetricField, j: &ProjectiveJet) -> Result<f64> {
    let s = singular_spectrum_closed(m, j)?;
    Ok(s[0] + s[1])
}

/// Hausdorff distance between two polylines.
pub fn hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    fn to_poly(p: [f64; 2], poly: &[[f64; 2]]) -> f64 {
        if poly.len() == 1 {
            return (p[0] - poly[0][0]).hypot(p[1] - poly[0][1]);
        }
        let mut best = f64::INFINITY;
        for w in poly.windows(2) {
            let (u, v) = (w[0], w[1]);
            let d = [v[0] - u[0], v[1] - u[1]];
            let l2 = d[0] * d[0] + d[1] * d[1];
            let t = if l2 > 0.0 { (((p[0] - u[0]) * d[0] + (p[1] - u[1]) * d[1]) / l2).clamp(0.0, 1.0) } else { 0.0 };
            let c = [u[0] + t * d[0], u[1] + t * d[1]];
            best = best.min((p[0] - c[0]).hypot(p[1] - c[1]));
        }
        best
    }
    let ab = a.iter().map(|p| to_poly(*p, b)).fold(0.0, f64::max);
    let ba = b.iter().map(|p| to_poly(*p, a)).fold(0.0, f64::max);
    ab.max(ba)
}
