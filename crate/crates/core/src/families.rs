//! Geodesic families through a degenerate point.
//!
//! Case C: seeds on semicubic parabolas in the frame (S0 tangent,
//! isotropic direction), integrated both toward and away from q.
//! Case D: shooting in the blown-up frame Y = w/u², P = (p − v0)/u around
//! the chart of the isotropic direction; members are the shots that reach q
//! tangent to p0.

use serde::Serialize;

use crate::degeneracy::{
    chart_coeffs, chart_second, classify, find_s0_point, lifted_jacobian, lifted_pair, Case, Chart, DegenerateReport,
    ProjectiveDirection, Tolerances,
};
use crate::error::{GeoError, Result};
use crate::exec::{self, Exec};
use crate::fit::{fit_points, FitResult, FitWindow, LocalFrame, Model};
use crate::geoflow::{
    causal_type_of, field_v, integrate_geodesic, CausalType, GeodesicCurve, IntegratorOptions, ProjectiveJet, Sample,
    Termination,
};
use crate::metric::MetricField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lorentzian,
    Riemannian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Family,
    Separatrix,
    Explicit,
}

#[derive(Debug, Clone, Serialize)]
pub struct Member {
    /// grid parameters (α[, β]) used to build the seed
    pub params: Vec<f64>,
    pub side: Side,
    pub role: Role,
    pub seed: ProjectiveJet,
    #[serde(skip)]
    pub curve: GeodesicCurve,
    pub fit: Option<FitResult>,
    /// fitted deviation parameter (sign carries the causal rule)
    pub alpha: Option<f64>,
    pub causal_type: CausalType,
    pub termination: Termination,
    /// distance of the inner endpoint to q
    pub inner_distance: f64,
    /// sine distance of the inner direction to the family direction
    pub inner_dir_error: f64,
}

impl Member {
    pub fn reaches(&self, r_stop: f64) -> bool {
        self.inner_distance < 10.0 * r_stop && self.inner_dir_error < 1e-4
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub shots: usize,
    pub reaching: usize,
    pub closest: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilySpec {
    pub metric: String,
    pub q: [f64; 2],
    pub direction: ProjectiveDirection,
    pub case: Case,
    pub members: Vec<Member>,
    /// eigen-parabola coefficients of the blown-up frame (case D)
    pub parabolas: Vec<f64>,
    pub riemannian_probe: Option<ProbeReport>,
    pub warnings: Vec<String>,
}

impl FamilySpec {
    pub fn count(&self, side: Side, role: Role) -> usize {
        self.members.iter().filter(|m| m.side == side && m.role == role).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FamilyConfig {
    /// grid size per parameter
    pub count: usize,
    pub tau0: f64,
    pub opts: IntegratorOptions,
    pub exec: Exec,
    /// also integrate away from q (portraits)
    pub outward: bool,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig { count: 7, tau0: 1e-3, opts: IntegratorOptions::default(), exec: Exec::default(), outward: true }
    }
}

/// Roots (ε1, ε2) of t² − t/2 + ε, ε1 > 1/2 > 0 > ε2.
pub fn dsaddle_epsilons(eps: f64) -> Result<(f64, f64)> {
    if !(eps < 0.0) {
        return Err(GeoError::Invalid(format!("saddle thresholds need eps < 0, got {}", eps)));
    }
    let s = (0.25 - 4.0 * eps).sqrt();
    let e1 = 0.25 + 0.5 * s;
    // product form avoids cancellation for small |eps|
    let e2 = eps / e1;
    Ok((e1, e2))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Orientation (±1) whose base velocity at `j` has positive component along `d`.
fn orientation_along(m: &MetricField, j: &ProjectiveJet, d: [f64; 2]) -> Result<f64> {
    let v = field_v(m, j, 1.0)?.base();
    Ok(if dot(v, d) >= 0.0 { 1.0 } else { -1.0 })
}

fn member_from(
    params: Vec<f64>,
    side: Side,
    role: Role,
    seed: ProjectiveJet,
    inward: GeodesicCurve,
    outward: Option<GeodesicCurve>,
    q: [f64; 2],
    direction: &ProjectiveDirection,
) -> Member {
    let inner = inward.last();
    let inner_distance = dist([inner.x, inner.y], q);
    let inner_dir_error = inner.dir.distance(direction);
    let curve = match outward {
        Some(o) => GeodesicCurve::join(&inward, &o),
        None => inward,
    };
    Member {
        params,
        side,
        role,
        seed,
        causal_type: curve.causal_type,
        termination: curve.termination,
        curve,
        fit: None,
        alpha: None,
        inner_distance,
        inner_dir_error,
    }
}

/// Local frame of a case-C point: (S0 tangent, isotropic direction pointing
/// into the Lorentzian side).
pub fn case_c_frame(rep: &DegenerateReport) -> Result<LocalFrame> {
    let g = rep.grad_delta;
    let gn = g[0].hypot(g[1]);
    if gn == 0.0 {
        return Err(GeoError::Degenerate("grad Δ vanishes at q".into()));
    }
    let mut e_iso = rep.p0.unit();
    if dot(e_iso, g) > 0.0 {
        e_iso = [-e_iso[0], -e_iso[1]];
    }
    let e_s0 = [-g[1] / gn, g[0] / gn];
    if (e_s0[0] * e_iso[1] - e_s0[1] * e_iso[0]).abs() < 1e-8 {
        return Err(GeoError::Degenerate("isotropic direction tangent to S0".into()));
    }
    Ok(LocalFrame { origin: rep.q, e1: e_s0, e2: e_iso })
}

/// One-parameter families x ∼ ατ³, y ∼ ±τ² through a case-C point.
pub fn family_case_c_isotropic(m: &MetricField, q: [f64; 2], alphas: &[f64], cfg: &FamilyConfig) -> Result<FamilySpec> {
    let rep = classify(m, q, &Tolerances::default())?;
    if !rep.case.is_c() {
        return Err(GeoError::Mismatch(format!("point classifies as {}, expected a C case", rep.case)));
    }
    let frame = case_c_frame(&rep)?;
    let tau0 = cfg.tau0;
    let mut jobs = Vec::new();
    for &a in alphas {
        for side in [Side::Lorentzian, Side::Riemannian] {
            jobs.push((a, side));
        }
    }
    let bbox = cfg.opts.bbox.unwrap_or(m.bbox);
    let run = |&(a, side): &(f64, Side)| -> Result<Member> {
        let sg = if side == Side::Lorentzian { 1.0 } else { -1.0 };
        let pos = frame.point(a * tau0.powi(3), sg * tau0 * tau0);
        if !bbox.contains(pos[0], pos[1]) {
            return Err(GeoError::Invalid("seed outside bbox".into()));
        }
        let d_local = [3.0 * a * tau0 * tau0, sg * 2.0 * tau0];
        let d = [
            d_local[0] * frame.e1[0] + d_local[1] * frame.e2[0],
            d_local[0] * frame.e1[1] + d_local[1] * frame.e2[1],
        ];
        let seed = ProjectiveJet::new(pos[0], pos[1], ProjectiveDirection::from_vector(d[0], d[1]));
        let or = orientation_along(m, &seed, d)?;
        let mut opts = cfg.opts;
        // the seed itself is within τ0² of the singular jet
        opts.r_stop = opts.r_stop.min(1e-2 * tau0 * tau0);
        opts.sample_rel = Some(0.01);
        opts.sample_origin = Some(q);
        opts.sample_gap = Some(0.01 * bbox.width().max(bbox.height()));
        let inward = integrate_geodesic(m, &seed, -or * 1e3, &opts)?;
        let outward = integrate_geodesic(m, &seed, or * 1e3, &opts)?;
        let window = FitWindow { lo: tau0, hi: 10.0 * tau0 };
        // only the first passage through the window: a trace may come back to S0
        let near: Vec<[f64; 2]> = outward
            .points()
            .into_iter()
            .take_while(|p| frame.coords(*p)[1].abs().sqrt() <= window.hi)
            .collect();
        let fit = fit_points(&near, &frame, Model::Semicubic, window).ok();
        let mut mem = member_from(vec![a], side, Role::Family, seed, inward, Some(outward), q, &rep.p0);
        mem.alpha = fit.map(|f| f.coefficient).or(Some(0.0));
        mem.fit = fit;
        Ok(mem)
    };
    let results = exec::map(cfg.exec, &jobs, run);
    let mut members = Vec::new();
    for r in results {
        members.push(r?);
    }
    Ok(FamilySpec {
        metric: m.name.clone(),
        q,
        direction: rep.p0,
        case: rep.case,
        members,
        parabolas: vec![],
        riemannian_probe: None,
        warnings: rep.warnings,
    })
}

/// Trace the arc of S0 through q in both directions (a curve of singular
/// jets when S0 is tangent to a repeated admissible direction).
fn s0_arc(m: &MetricField, q: [f64; 2], step: f64) -> Result<GeodesicCurve> {
    let bbox = m.bbox;
    let mut halves: Vec<Vec<[f64; 2]>> = Vec::new();
    for sgn in [-1.0, 1.0] {
        let mut pts = vec![q];
        let mut cur = q;
        let mut prev_t: Option<[f64; 2]> = None;
        for _ in 0..100_000 {
            let g = m.eval(cur[0], cur[1])?.grad_delta();
            let gn = g[0].hypot(g[1]);
            let mut t = [-g[1] / gn * sgn, g[0] / gn * sgn];
            if let Some(pt) = prev_t {
                if dot(pt, t) < 0.0 {
                    t = [-t[0], -t[1]];
                }
            }
            let guess = [cur[0] + step * t[0], cur[1] + step * t[1]];
            if !bbox.contains(guess[0], guess[1]) {
                break;
            }
            let next = match find_s0_point(m, guess) {
                Ok(p) => p,
                Err(_) => break,
            };
            prev_t = Some(t);
            pts.push(next);
            cur = next;
        }
        halves.push(pts);
    }
    let mut pts: Vec<[f64; 2]> = halves[0].iter().rev().cloned().collect();
    pts.extend(halves[1].iter().skip(1));
    let mut samples = Vec::with_capacity(pts.len());
    for (i, w) in pts.iter().enumerate() {
        let k = m.eval(w[0], w[1])?;
        let g = k.grad_delta();
        let dir = ProjectiveDirection::from_vector(-g[1], g[0]);
        let f = crate::degeneracy::f_unit(&k, &dir);
        samples.push(Sample { t: i as f64 * step, x: w[0], y: w[1], dir, f, delta: k.delta() });
    }
    let causal_type = causal_type_of(&samples, 1e-7);
    Ok(GeodesicCurve { samples, causal_type, termination: Termination::LeftBbox, events: vec![], steps: 0 })
}

/// The geodesic through q with a non-isotropic admissible direction,
/// as two half-curves leaving q.
pub fn geodesic_case_c_nonisotropic(
    m: &MetricField,
    q: [f64; 2],
    root: &ProjectiveDirection,
    opts: &IntegratorOptions,
) -> Result<[GeodesicCurve; 2]> {
    let tol = Tolerances::default();
    let rep = classify(m, q, &tol)?;
    let r = rep
        .roots
        .iter()
        .filter(|r| !r.is_isotropic)
        .min_by(|a, b| a.dir.distance(root).partial_cmp(&b.dir.distance(root)).unwrap())
        .ok_or_else(|| GeoError::Invalid("no non-isotropic admissible direction at q".into()))?;
    if r.dir.distance(root) > 1e-6 {
        return Err(GeoError::Invalid("direction is not an admissible root".into()));
    }
    if r.multiplicity != 1 {
        let k = m.eval(q[0], q[1])?;
        let g = k.grad_delta();
        let tangent = ProjectiveDirection::from_vector(-g[1], g[0]);
        if r.dir.distance(&tangent) < tol.tangency {
            // S0 itself carries the repeated direction: the geodesic is the arc
            let arc = s0_arc(m, q, 1e-3)?;
            let i0 = arc
                .samples
                .iter()
                .enumerate()
                .min_by(|a, b| dist([a.1.x, a.1.y], q).partial_cmp(&dist([b.1.x, b.1.y], q)).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(0);
            let mut left = arc.clone();
            left.samples = arc.samples[..=i0].iter().rev().cloned().collect();
            let mut right = arc;
            right.samples.drain(..i0);
            return Ok([left, right]);
        }
        return Err(GeoError::Invalid("root not simple".into()));
    }
    // non-vertical eigenvector (1, p, w) of the linearization in the root's chart
    let dir = r.dir.canonical();
    let j = ProjectiveJet::new(q[0], q[1], dir);
    let jac = crate::geoflow::v_jacobian(m, &j)?;
    let p = dir.value;
    let lam = jac[0][0] + p * jac[0][1];
    let mp = jac[2][2];
    if (lam - mp).abs() < 1e-12 * (lam.abs() + mp.abs() + 1e-300) {
        return Err(GeoError::Degenerate("eigenvector nearly vertical".into()));
    }
    let w = (jac[2][0] + p * jac[2][1]) / (lam - mp);
    let delta = 1e-7 / (1.0 + w.abs());
    let sigma = if lam >= 0.0 { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    for s in [-1.0, 1.0] {
        let c = j.chart_state();
        let st = [c[0] + s * delta, c[1] + s * delta * p, c[2] + s * delta * w];
        let seed = ProjectiveJet::from_chart_state(dir.chart, &st);
        let mut o = *opts;
        o.stop_at_singular = false;
        let mut curve = integrate_geodesic(m, &seed, sigma * 1e3, &o)?;
        let k = m.eval(q[0], q[1])?;
        let f = crate::degeneracy::f_unit(&k, &dir);
        curve.samples.insert(0, Sample { t: -1.0, x: q[0], y: q[1], dir, f, delta: k.delta() });
        curve.causal_type = causal_type_of(&curve.samples[1..], o.event_tol);
        out.push(curve);
    }
    let b = out.pop().unwrap();
    let a = out.pop().unwrap();
    Ok([a, b])
}

/// Blown-up frame at a case-D point, in the chart of p0:
/// u = xc − X0, w = yc − Y0 − v0·u, Y = w/u², P = (p − v0)/u.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DFrame {
    pub chart: Chart,
    pub x0: f64,
    pub y0: f64,
    pub v0: f64,
    /// S0 is w ≈ κu²
    pub kappa: f64,
    /// sign of Y − κ on the Lorentzian side
    pub s_l: f64,
    /// lifted-field eigenvalues with their parabola coefficients (real case)
    pub eig: [(f64, f64); 2],
    pub real: bool,
    pub tr: f64,
    pub m2: f64,
}

impl DFrame {
    pub fn new(m: &MetricField, q: [f64; 2], p0: &ProjectiveDirection) -> Result<DFrame> {
        let p0 = p0.canonical();
        let chart = p0.chart;
        let k = chart_coeffs(&m.eval(q[0], q[1])?, chart);
        let s = chart_second(&m.eval_second(q[0], q[1])?, chart);
        let v0 = p0.value;
        let (x0, y0) = match chart {
            Chart::P => (q[0], q[1]),
            Chart::PBAR => (q[1], q[0]),
        };
        // second derivatives of Δ in chart coordinates
        let [a2, b2, c2] = s.d;
        let d1 = |i: usize| -> (f64, f64, f64) {
            if i == 0 {
                (k.a_x, k.b_x, k.c_x)
            } else {
                (k.a_y, k.b_y, k.c_y)
            }
        };
        let idx = |i: usize, j: usize| i + j;
        let dd = |i: usize, j: usize| {
            let (ai, bi, ci) = d1(i);
            let (aj, bj, cj) = d1(j);
            let n = idx(i, j);
            a2[n] * k.c + ai * cj + aj * ci + k.a * c2[n] - 2.0 * bi * bj - 2.0 * k.b * b2[n]
        };
        let d_dd = dd(0, 0) + 2.0 * v0 * dd(0, 1) + v0 * v0 * dd(1, 1);
        let g = k.grad_delta();
        if g[1].abs() < 1e-300 {
            return Err(GeoError::Degenerate("S0 tangent to the chart fibre".into()));
        }
        let kappa = -d_dd / (2.0 * g[1]);
        let s_l = -g[1].signum();
        let jac = lifted_jacobian(&k, &s, v0);
        let (tr, m2, pair) = lifted_pair(&jac);
        let real = pair[0].im == 0.0;
        let mut eig = [(pair[0].re, f64::NAN), (pair[1].re, f64::NAN)];
        if real {
            for e in eig.iter_mut() {
                e.1 = parabola_of(&jac, e.0);
            }
        }
        Ok(DFrame { chart, x0, y0, v0, kappa, s_l, eig, real, tr, m2 })
    }

    pub fn jet(&self, u: f64, yy: f64, pp: f64) -> ProjectiveJet {
        let xc = self.x0 + u;
        let yc = self.y0 + self.v0 * u + yy * u * u;
        let j = ProjectiveJet::from_chart_state(self.chart, &[xc, yc, self.v0 + pp * u]);
        ProjectiveJet::new(j.x, j.y, j.dir)
    }

    /// (u, Y, P) of a jet; P is infinite when the direction is outside the chart.
    pub fn coords(&self, j: &ProjectiveJet) -> [f64; 3] {
        let (xc, yc) = match self.chart {
            Chart::P => (j.x, j.y),
            Chart::PBAR => (j.y, j.x),
        };
        let val = if j.dir.chart == self.chart { j.dir.value } else { 1.0 / j.dir.value };
        let u = xc - self.x0;
        let w = yc - self.y0 - self.v0 * u;
        [u, w / (u * u), (val - self.v0) / u]
    }

    pub fn local_frame(&self, q: [f64; 2]) -> LocalFrame {
        match self.chart {
            Chart::P => LocalFrame { origin: q, e1: [1.0, self.v0], e2: [0.0, 1.0] },
            Chart::PBAR => LocalFrame { origin: q, e1: [self.v0, 1.0], e2: [1.0, 0.0] },
        }
    }

    /// Parabola of the D_s family (eigenvalue with the sign of the trace).
    pub fn k_family(&self) -> f64 {
        if (self.eig[0].0 >= 0.0) == (self.tr >= 0.0) {
            self.eig[0].1
        } else {
            self.eig[1].1
        }
    }

    /// The other real parabola: separatrix (D_s) or weak direction (D_n).
    pub fn k_other(&self) -> f64 {
        if (self.eig[0].0 >= 0.0) == (self.tr >= 0.0) {
            self.eig[1].1
        } else {
            self.eig[0].1
        }
    }

    pub fn k_weak(&self) -> f64 {
        if self.eig[0].0.abs() <= self.eig[1].0.abs() {
            self.eig[0].1
        } else {
            self.eig[1].1
        }
    }

    pub fn k_strong(&self) -> f64 {
        if self.eig[0].0.abs() <= self.eig[1].0.abs() {
            self.eig[1].1
        } else {
            self.eig[0].1
        }
    }

    /// Length scale of the blown-up picture.
    pub fn scale(&self) -> f64 {
        let mut l: f64 = 0.0;
        if self.real {
            for e in self.eig {
                l = l.max((e.1 - self.kappa).abs());
            }
        } else {
            // complex pair: use |λ|/4 as in the model family
            l = (self.m2.abs().sqrt() / 4.0).max((self.tr / 4.0 - self.kappa).abs());
        }
        if l > 0.0 {
            l
        } else {
            1.0
        }
    }
}

/// K = ½ vp/vx from the eigenvector of the lifted Jacobian for λ.
fn parabola_of(jac: &[[f64; 3]; 3], lam: f64) -> f64 {
    let mut a = *jac;
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= lam;
    }
    let cross = |r: [f64; 3], s: [f64; 3]| [r[1] * s[2] - r[2] * s[1], r[2] * s[0] - r[0] * s[2], r[0] * s[1] - r[1] * s[0]];
    let cands = [cross(a[0], a[1]), cross(a[0], a[2]), cross(a[1], a[2])];
    let best = cands
        .iter()
        .max_by(|x, y| {
            let nx = x.iter().map(|v| v * v).sum::<f64>();
            let ny = y.iter().map(|v| v * v).sum::<f64>();
            nx.partial_cmp(&ny).unwrap()
        })
        .unwrap();
    0.5 * best[2] / best[0]
}

const D_REL_TOL: f64 = 1e-12;
const D_SPAN: f64 = 1e9;

struct Shot {
    seed: ProjectiveJet,
    inward: GeodesicCurve,
    /// (u, Y) of the inner endpoint and u of the seed
    u_end: f64,
    y_end: f64,
    u_seed: f64,
}

impl Shot {
    /// Which side of the stable manifold of the parabola K the shot was
    /// on: the upper side passes q onto the other branch, or (stopped near
    /// q) drifted above the parabola; the lower side falls onto S0.
    fn above(&self, k: f64) -> bool {
        self.u_end * self.u_seed < 0.0 || self.y_end > k
    }
}

fn d_opts(cfg: &FamilyConfig, q: [f64; 2]) -> IntegratorOptions {
    let mut o = cfg.opts;
    // shots shadow an unstable manifold; integration error sets how close to q they stay on it
    o.rel_tol = o.rel_tol.min(D_REL_TOL);
    o.abs_tol = o.abs_tol.min(D_REL_TOL * 1e-6);
    o.sample_rel = Some(0.01);
    o.sample_origin = Some(q);
    o.max_steps = o.max_steps.max(400_000);
    o
}

/// Integrate toward q from the frame seed (u, Y, P).
fn shoot(m: &MetricField, fr: &DFrame, q: [f64; 2], u: f64, yy: f64, pp: f64, opts: &IntegratorOptions) -> Result<Shot> {
    let seed = fr.jet(u, yy, pp);
    let toward = [q[0] - seed.x, q[1] - seed.y];
    let or = orientation_along(m, &seed, toward)?;
    let inward = integrate_geodesic(m, &seed, or * D_SPAN, opts)?;
    let c = fr.coords(&inward.last().jet());
    Ok(Shot { seed, inward, u_end: c[0], y_end: c[1], u_seed: u })
}

fn reaches(shot: &Shot, q: [f64; 2], p0: &ProjectiveDirection, r_stop: f64) -> bool {
    let l = shot.inward.last();
    dist([l.x, l.y], q) < 10.0 * r_stop && l.dir.distance(p0) < 1e-4
}

/// Solve F = 0 for P at the frame point (u, Y), nearest to `guess`.
fn isotropic_p(m: &MetricField, fr: &DFrame, u: f64, yy: f64, guess: f64) -> Result<f64> {
    let j = fr.jet(u, yy, 0.0);
    let k = chart_coeffs(&m.eval(j.x, j.y)?, fr.chart);
    let roots = crate::cubic::solve_quadratic(k.c, 2.0 * k.b, k.a);
    let target = fr.v0 + guess * u;
    roots
        .into_iter()
        .min_by(|a, b| (a - target).abs().partial_cmp(&(b - target).abs()).unwrap())
        .map(|p| (p - fr.v0) / u)
        .ok_or_else(|| GeoError::Domain("no isotropic direction at seed (Riemannian point)".into()))
}

/// Bisect a seed parameter s ∈ [lo, hi] on a boolean indicator of the
/// shot outcome, to full precision; returns the last shot that reached q.
fn bisect_shot<G, I>(lo: f64, hi: f64, ind: &I, shoot_at: G, q: [f64; 2], p0: &ProjectiveDirection, r_stop: f64) -> Option<(f64, Shot)>
where
    G: Fn(f64) -> Option<Shot>,
    I: Fn(&Shot) -> bool,
{
    let (mut lo, mut hi) = (lo, hi);
    let s_lo = shoot_at(lo)?;
    let sign_lo = ind(&s_lo);
    let mut best = None;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let s = shoot_at(mid)?;
        let side = ind(&s);
        if reaches(&s, q, p0, r_stop) {
            best = Some((mid, s));
        }
        if side == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best
}

/// Scan `grid` for indicator sign changes and bisect each bracket.
fn scan_and_bisect<G, I>(grid: &[f64], ind: I, shoot_at: G, q: [f64; 2], p0: &ProjectiveDirection, r_stop: f64) -> Vec<(f64, Shot)>
where
    G: Fn(f64) -> Option<Shot>,
    I: Fn(&Shot) -> bool,
{
    let signs: Vec<Option<bool>> = grid.iter().map(|&s| shoot_at(s).map(|sh| ind(&sh))).collect();
    let mut found = Vec::new();
    for i in 0..grid.len().saturating_sub(1) {
        if let (Some(a), Some(b)) = (signs[i], signs[i + 1]) {
            if a != b {
                if let Some(r) = bisect_shot(grid[i], grid[i + 1], &ind, &shoot_at, q, p0, r_stop) {
                    found.push(r);
                }
            }
        }
    }
    found
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn d_member(
    m: &MetricField,
    fr: &DFrame,
    q: [f64; 2],
    p0: &ProjectiveDirection,
    cfg: &FamilyConfig,
    params: Vec<f64>,
    role: Role,
    shot: Shot,
    k_ref: f64,
) -> Result<Member> {
    let frame = fr.local_frame(q);
    let window = FitWindow { lo: 0.01 * cfg.tau0, hi: 0.1 * cfg.tau0 };
    let fit = fit_points(&shot.inward.points(), &frame, Model::Quadratic, window).ok();
    let alpha = fit.map(|_| {
        let dev: Vec<f64> = shot
            .inward
            .points()
            .iter()
            .map(|p| frame.coords(*p))
            .filter(|c| c[0].abs() >= window.lo && c[0].abs() <= window.hi)
            .map(|c| c[1] / (c[0] * c[0]) - k_ref)
            .collect();
        fr.s_l * dev.iter().sum::<f64>() / dev.len() as f64
    });
    let outward = if cfg.outward {
        let toward = [q[0] - shot.seed.x, q[1] - shot.seed.y];
        let or = orientation_along(m, &shot.seed, toward)?;
        let mut o = cfg.opts;
        o.sample_gap = Some(0.01 * m.bbox.width().max(m.bbox.height()));
        Some(integrate_geodesic(m, &shot.seed, -or * 1e3, &o)?)
    } else {
        None
    };
    let mut mem = member_from(params, Side::Lorentzian, role, shot.seed, shot.inward, outward, q, p0);
    mem.fit = fit;
    mem.alpha = alpha;
    Ok(mem)
}

/// Families entering a case-D point from the Lorentzian side.
pub fn family_case_d(m: &MetricField, q: [f64; 2], cfg: &FamilyConfig) -> Result<FamilySpec> {
    let rep = classify(m, q, &Tolerances::default())?;
    if !matches!(rep.case, Case::Ds | Case::Dn | Case::Df) {
        return Err(GeoError::Mismatch(format!("point classifies as {}, expected a D case", rep.case)));
    }
    let fr = DFrame::new(m, q, &rep.p0)?;
    let p0 = rep.p0;
    let opts = d_opts(cfg, q);
    let r_stop = opts.r_stop;
    let l0 = fr.scale();
    let n = cfg.count.max(2);
    let mut warnings = rep.warnings.clone();
    let mut members = Vec::new();
    let rho = 10.0 * cfg.tau0;
    let shoot_ok = |u: f64, yy: f64, pp: f64| shoot(m, &fr, q, u, yy, pp, &opts).ok();

    let mut parabolas = vec![];
    match rep.case {
        Case::Ds => {
            let kf = fr.k_family();
            let ks = fr.k_other();
            parabolas = vec![kf, ks];
            // one member per (branch, Y level): bisect P on the stable manifold
            let mut jobs = Vec::new();
            for u in [rho, -rho] {
                for d in linspace(-0.25, 0.25, 2 * n) {
                    jobs.push((u, kf + d * l0));
                }
            }
            let found = exec::map(cfg.exec, &jobs, |&(u, yy)| {
                let grid = linspace(2.0 * yy - 4.0 * l0, 2.0 * yy + 4.0 * l0, 17);
                let mut hits = scan_and_bisect(&grid, |s: &Shot| s.above(kf), |pp| shoot_ok(u, yy, pp), q, &p0, r_stop);
                hits.sort_by(|a, b| (a.0 - 2.0 * yy).abs().partial_cmp(&(b.0 - 2.0 * yy).abs()).unwrap());
                hits.into_iter().next().map(|(pp, shot)| (u, yy, pp, shot))
            });
            for (u, yy, pp, shot) in found.into_iter().flatten() {
                members.push(d_member(m, &fr, q, &p0, cfg, vec![u.signum() * (yy - kf), pp], Role::Family, shot, kf)?);
            }
            // separatrix: isotropic seeds Y = K_s + η, bisect η
            let seps = exec::map(cfg.exec, &[rho, -rho], |&u| {
                let at = |eta: f64| {
                    let yy = ks + eta;
                    let pp = isotropic_p(m, &fr, u, yy, 2.0 * ks).ok()?;
                    shoot_ok(u, yy, pp)
                };
                let grid = linspace(-0.5 * l0, 0.5 * l0, 21);
                let mut hits = scan_and_bisect(&grid, |s: &Shot| s.y_end > ks, at, q, &p0, r_stop);
                hits.sort_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap());
                hits.into_iter().next().map(|(eta, shot)| (u, eta, shot))
            });
            let mut nsep = 0;
            for (u, eta, shot) in seps.into_iter().flatten() {
                nsep += 1;
                members.push(d_member(m, &fr, q, &p0, cfg, vec![u.signum(), eta], Role::Separatrix, shot, ks)?);
            }
            if nsep == 0 {
                warnings.push("separatrix shooting found no bracket".into());
            }
        }
        Case::Dn | Case::Df => {
            // S0 runs close to the weak parabola, so the singular-curve stop
            // fires far from q at the default r_stop
            let deep = IntegratorOptions { r_stop: opts.r_stop * 1e-3, ..opts };
            let shoot_ok = |u: f64, yy: f64, pp: f64| shoot(m, &fr, q, u, yy, pp, &deep).ok();
            if fr.real {
                parabolas = vec![fr.k_weak(), fr.k_strong()];
            }
            let mut jobs = Vec::new();
            for u in [rho, -rho] {
                for a in linspace(0.1, 1.5, n) {
                    let yy = fr.kappa + fr.s_l * a * l0;
                    for b in linspace(1.5, 10.0, n) {
                        jobs.push((u, a, b, yy, 2.0 * yy + fr.s_l * b * l0));
                    }
                }
            }
            let shots = exec::map(cfg.exec, &jobs, |&(u, a, b, yy, pp)| shoot_ok(u, yy, pp).map(|s| (u, a, b, s)));
            let kref = if fr.real { fr.k_weak() } else { f64::NAN };
            let mut closest = f64::INFINITY;
            for (u, a, b, shot) in shots.into_iter().flatten() {
                let l = shot.inward.last();
                closest = closest.min(dist([l.x, l.y], q));
                if reaches(&shot, q, &p0, r_stop) {
                    members.push(d_member(m, &fr, q, &p0, cfg, vec![u.signum() * a, b], Role::Family, shot, kref)?);
                }
            }
            if members.is_empty() {
                warnings.push(format!("no Lorentzian shot reached q (closest approach {:.3e})", closest));
            }
        }
        _ => unreachable!(),
    }

    let deep = IntegratorOptions { r_stop: opts.r_stop * 1e-3, ..opts };
    let probe = riemannian_probe(m, &fr, q, &p0, cfg, &deep, r_stop)?;
    Ok(FamilySpec {
        metric: m.name.clone(),
        q,
        direction: p0,
        case: rep.case,
        members,
        parabolas,
        riemannian_probe: Some(probe),
        warnings,
    })
}

/// Shoot from a grid on the Riemannian side in both orientations and count
/// the shots that reach q tangent to p0.
fn riemannian_probe(
    m: &MetricField,
    fr: &DFrame,
    q: [f64; 2],
    p0: &ProjectiveDirection,
    cfg: &FamilyConfig,
    opts: &IntegratorOptions,
    r_stop: f64,
) -> Result<ProbeReport> {
    let l0 = fr.scale();
    let n = cfg.count.max(2);
    let rho = 10.0 * cfg.tau0;
    let mut jobs = Vec::new();
    for u in [rho, -rho] {
        for a in linspace(0.1, 1.5, n) {
            let yy = fr.kappa - fr.s_l * a * l0;
            for b in linspace(-10.0, 10.0, n + 1) {
                for or in [1.0, -1.0] {
                    jobs.push((u, yy, 2.0 * fr.kappa + b * l0, or));
                }
            }
        }
    }
    let res = exec::map(cfg.exec, &jobs, |&(u, yy, pp, or)| -> Option<(f64, bool)> {
        let seed = fr.jet(u, yy, pp);
        let c = integrate_geodesic(m, &seed, or * D_SPAN, opts).ok()?;
        let l = c.last();
        let d = dist([l.x, l.y], q);
        Some((d, d < 10.0 * r_stop && l.dir.distance(p0) < 1e-4))
    });
    let mut shots = 0;
    let mut reaching = 0;
    let mut closest = f64::INFINITY;
    for (d, hit) in res.into_iter().flatten() {
        shots += 1;
        closest = closest.min(d);
        if hit {
            reaching += 1;
        }
    }
    Ok(ProbeReport { shots, reaching, closest })
}

/// Number of reversals of the turning direction of the tangent along a
/// trace (a focus makes the direction wind back and forth).
pub fn direction_reversals(curve: &GeodesicCurve) -> usize {
    let ang: Vec<f64> = curve
        .samples
        .iter()
        .map(|s| {
            let v = s.dir.vector();
            (v[1] / v[0]).atan()
        })
        .collect();
    let mut last = 0.0;
    let mut n = 0;
    for w in ang.windows(2) {
        let mut d = w[1] - w[0];
        // directions are lines: fold differences into (−π/2, π/2]
        if d > std::f64::consts::FRAC_PI_2 {
            d -= std::f64::consts::PI;
        } else if d <= -std::f64::consts::FRAC_PI_2 {
            d += std::f64::consts::PI;
        }
        if d.abs() < 1e-12 {
            continue;
        }
        if last != 0.0 && d.signum() != last {
            n += 1;
        }
        last = d.signum();
    }
    n
}

/// Members of the explicit Clairaut family p² = y − αy² seeded at height y0.
pub fn clairaut_family(m: &MetricField, alphas: &[f64], y0: f64, x0: f64, cfg: &FamilyConfig) -> Result<Vec<Member>> {
    let jobs: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| [(a, 1.0), (a, -1.0)]).collect();
    let res = exec::map(cfg.exec, &jobs, |&(a, sg)| -> Result<Member> {
        let p2 = y0 - a * y0 * y0;
        if p2 < 0.0 {
            return Err(GeoError::Invalid(format!("alpha {} has no real direction at y0 = {}", a, y0)));
        }
        let seed = ProjectiveJet::with_slope(x0, y0, sg * p2.sqrt());
        let mut o = cfg.opts;
        o.sample_gap = Some(0.01);
        o.stop_at_singular = true;
        let fwd = integrate_geodesic(m, &seed, 50.0, &o)?;
        let bwd = integrate_geodesic(m, &seed, -50.0, &o)?;
        let curve = GeodesicCurve::join(&bwd, &fwd);
        let l = curve.first();
        Ok(Member {
            params: vec![a],
            side: if y0 > 0.0 { Side::Lorentzian } else { Side::Riemannian },
            role: Role::Explicit,
            seed,
            causal_type: curve.causal_type,
            termination: curve.termination,
            inner_distance: dist([l.x, l.y], [x0, 0.0]),
            inner_dir_error: 0.0,
            curve,
            fit: None,
            alpha: Some(a),
        })
    });
    res.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_epsilons() {
        let (a, b) = dsaddle_epsilons(-1.0).unwrap();
        assert!((a - 1.280776406404415).abs() < 1e-12);
        assert!((b + 0.780776406404415).abs() < 1e-12);
        assert!((a * b + 1.0).abs() < 1e-12 && (a + b - 0.5).abs() < 1e-12);
        let (a, b) = dsaddle_epsilons(-1e-14).unwrap();
        assert!((a - 0.5).abs() < 1e-12 && b.abs() < 1e-12);
        assert!(dsaddle_epsilons(0.0).is_err());
    }

    #[test]
    fn dd_frame_parabolas() {
        let m = crate::catalog::dd(-1.0);
        let rep = classify(&m, [0.0, 0.0], &Tolerances::default()).unwrap();
        let fr = DFrame::new(&m, [0.0, 0.0], &rep.p0).unwrap();
        let (e1, e2) = dsaddle_epsilons(-1.0).unwrap();
        assert!((fr.kappa + 1.0).abs() < 1e-12);
        assert_eq!(fr.s_l, 1.0);
        assert!((fr.k_family() - e1 / 2.0).abs() < 1e-12);
        assert!((fr.k_other() - e2 / 2.0).abs() < 1e-12);
        let j = fr.jet(0.01, 0.3, -0.7);
        let c = fr.coords(&j);
        assert!((c[0] - 0.01).abs() < 1e-15 && (c[1] - 0.3).abs() < 1e-10 && (c[2] + 0.7).abs() < 1e-10);
    }
}
