//! Invariant suites behind `check`. Each suite returns a report of named
//! checks; randomized trials draw from per-trial streams of one seed, so a
//! report does not depend on the thread count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog;
use crate::cubic::solve_quadratic;
use crate::degeneracy::{chart_coeffs, classify, find_s0_point, mu_from, Case, Chart, ProjectiveDirection, Tolerances};
use crate::error::{GeoError, Result};
use crate::exec::{self, Exec};
use crate::families::{self, dsaddle_epsilons, FamilyConfig, Role, Side};
use crate::fit::{fit_points, FitWindow, LocalFrame, Model};
use crate::geoflow::{
    causal_type_of, clairaut_integral, divergence_fd, divergence_w_residual, field_v, hausdorff, integrate_geodesic,
    integrate_natural, singular_spectrum, CausalType, IntegratorOptions, ProjectiveJet, Termination,
};
use crate::metric::{euclidean_gauss_curvature, MetricField};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// observed worst value (or count)
    pub value: f64,
    /// bound it is held to
    pub bound: f64,
    pub detail: String,
}

impl Check {
    /// Passes iff `value` is finite and ≤ `bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, detail: impl Into<String>) -> Check {
        Check { name: name.into(), passed: value.is_finite() && value <= bound, value, bound, detail: detail.into() }
    }

    /// Passes iff `value` ≥ `bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, detail: impl Into<String>) -> Check {
        Check { name: name.into(), passed: value.is_finite() && value >= bound, value, bound, detail: detail.into() }
    }

    pub fn truth(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), passed: ok, value: ok as u8 as f64, bound: 1.0, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, checks: Vec<Check>) -> SuiteReport {
        SuiteReport { suite: suite.into(), seed, passed: checks.iter().all(|c| c.passed), checks }
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    pub exec: Exec,
    pub opts: IntegratorOptions,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 1, exec: Exec::default(), opts: IntegratorOptions::default() }
    }
}

pub const SUITES: &[(&str, &str)] = &[
    ("cubic", "exact μ at the catalog origins, chart-swap identity of M"),
    ("classify", "case table, lifted spectrum of dd against α² − α + 4ε"),
    ("resonance", "λ1 = 2λ2 at isotropic singular jets, λ1 + λ2 = 0 at other C3 roots"),
    ("divergence", "div(V/2F^{3/2}) vanishes, div V does not"),
    ("oracle", "natural-parameter and projective integrators trace the same curves"),
    ("invariance", "F = 0 invariant, vertical lines over S0, constant causal type"),
    ("clairaut", "first integral of dy² − y dx², types by sign of α, empty strip"),
    ("sphere", "Minkowski sphere: degenerate parallels, signature, C1 points"),
    ("families", "semicubic and parabolic families through degenerate points"),
];

pub fn run(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let checks = match name {
        "cubic" => cubic(cfg),
        "classify" => classify_table(cfg),
        "resonance" => resonance(cfg),
        "divergence" => divergence(cfg),
        "oracle" => oracle(cfg),
        "invariance" => invariance(cfg),
        "clairaut" => clairaut(cfg),
        "sphere" => sphere(cfg),
        "families" => family_checks(cfg),
        _ => {
            let names: Vec<&str> = SUITES.iter().map(|s| s.0).collect();
            return Err(GeoError::Invalid(format!("unknown suite '{}' (known: {})", name, names.join(", "))));
        }
    }?;
    Ok(SuiteReport::new(name, cfg.seed, checks))
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn random_point(m: &MetricField, rng: &mut ChaCha8Rng) -> [f64; 2] {
    let b = m.bbox;
    let ex = 1e-3 * b.width();
    let ey = 1e-3 * b.height();
    [rng.gen_range(b.xmin + ex..b.xmax - ex), rng.gen_range(b.ymin + ey..b.ymax - ey)]
}

fn random_dir(rng: &mut ChaCha8Rng) -> ProjectiveDirection {
    let th: f64 = rng.gen_range(0.0..PI);
    ProjectiveDirection::from_vector(th.cos(), th.sin())
}

/// Orientation (±1) of V whose base velocity points along `d`.
fn orientation_along(m: &MetricField, j: &ProjectiveJet, d: [f64; 2]) -> Result<f64> {
    let v = field_v(m, j, 1.0)?.base();
    Ok(if v[0] * d[0] + v[1] * d[1] >= 0.0 { 1.0 } else { -1.0 })
}

fn coeff_scale(m: &MetricField, q: [f64; 2]) -> Result<f64> {
    let k = m.eval(q[0], q[1])?;
    Ok(k.a.abs().max(k.b.abs()).max(k.c.abs()).max(1e-300))
}

fn worst(vals: impl IntoIterator<Item = f64>) -> f64 {
    // NaN counts as a failure
    vals.into_iter().fold(0.0, |a: f64, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

// ---------------------------------------------------------------- cubic

fn cubic(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let exact = |m: &MetricField, want: [f64; 4]| -> Result<f64> {
        let mu = mu_from(&m.eval(0.0, 0.0)?);
        Ok(worst(mu.iter().zip(want).map(|(a, b)| (a - b).abs())))
    };
    out.push(Check::at_most("ex1 μ at origin = (0,0,1,0)", exact(&catalog::ex1(), [0.0, 0.0, 1.0, 0.0])?, f64::EPSILON, ""));
    for eps in [-1.0, 1.0 / 32.0, 1.0 / 8.0] {
        let v = exact(&catalog::dd(eps), [0.0, 0.0, -2.0, 0.0])?;
        out.push(Check::at_most(format!("dd({}) μ at origin = (0,0,-2,0)", eps), v, f64::EPSILON, ""));
    }
    // M̄ built from the swapped chart coefficients against −p̄³ M(1/p̄)
    let metrics = catalog::all_default();
    let idx: Vec<usize> = (0..metrics.len()).collect();
    let res = exec::map(cfg.exec, &idx, |&i| -> Result<f64> {
        let m = &metrics[i];
        let mut rng = rng_for(cfg.seed, 1000 + i as u64);
        let mut w: f64 = 0.0;
        for _ in 0..100 {
            let q = random_point(m, &mut rng);
            let k = m.eval(q[0], q[1])?;
            let mu = mu_from(&k);
            let bar = mu_from(&chart_coeffs(&k, Chart::PBAR));
            let want = [-mu[3], -mu[2], -mu[1], -mu[0]];
            let sc = mu.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
            w = w.max(worst(bar.iter().zip(want).map(|(a, b)| (a - b).abs() / sc)));
        }
        Ok(w)
    });
    for (m, r) in metrics.iter().zip(res) {
        out.push(Check::at_most(format!("{}: chart-swap identity, 100 points", m.name), r?, 1e-9, "relative"));
    }
    let k = catalog::ex1().eval(0.3, 0.0)?;
    let bar = mu_from(&chart_coeffs(&k, Chart::PBAR));
    out.push(Check::at_most("ex1 swapped chart M̄ = −p̄", worst(bar.iter().zip([0.0, -1.0, 0.0, 0.0]).map(|(a, b)| (a - b).abs())), 1e-15, ""));
    Ok(out)
}

// ------------------------------------------------------------- classify

fn classify_table(_cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let tol = Tolerances::default();
    let table: Vec<(MetricField, Case)> = vec![
        (catalog::dd(-1.0), Case::Ds),
        (catalog::dd(1.0 / 32.0), Case::Dn),
        (catalog::dd(1.0 / 8.0), Case::Df),
        (catalog::c1c3(-0.5), Case::C1),
        (catalog::c1c3(0.5), Case::C3),
        (catalog::ex1exp(), Case::C1),
        (catalog::ex1(), Case::C2),
    ];
    let mut out = Vec::new();
    for (m, want) in &table {
        let rep = classify(m, [0.0, 0.0], &tol)?;
        out.push(Check::truth(format!("{} at origin is {}", m.name, want), rep.case == *want, format!("got {}", rep.case)));
        if *want == Case::C2 {
            let warned = rep.warnings.iter().any(|w| w.contains("genericity"));
            out.push(Check::truth("ex1 carries a non-genericity warning", warned, rep.warnings.join("; ")));
        }
    }
    for eps in [-1.0, 1.0 / 32.0, 1.0 / 8.0, -0.3, 0.05, 0.5] {
        let rep = classify(&catalog::dd(eps), [0.0, 0.0], &tol)?;
        let r = worst(rep.isotropic_spectrum.iter().map(|l| (l * l - l + 4.0 * eps).norm()));
        out.push(Check::at_most(format!("dd({}) spectrum solves α² − α + 4ε = 0", eps), r, 1e-8, ""));
    }
    Ok(out)
}

// ------------------------------------------------------------ resonance

/// Points of S0 on the C-case catalog metrics.
fn c_case_points(seed: u64, n: usize) -> Result<Vec<(MetricField, [f64; 2])>> {
    let metrics = [catalog::ex1(), catalog::ex1exp(), catalog::c1c3(0.5), catalog::c1c3(-0.5), catalog::mink_sphere()];
    let mut rng = rng_for(seed, 2000);
    let mut out = Vec::new();
    let mut i = 0;
    while out.len() < n {
        let m = &metrics[i % metrics.len()];
        i += 1;
        let seed_pt = if m.name == "mink-sphere" {
            let th = if rng.gen_bool(0.5) { 0.7 } else { 2.4 };
            [th, rng.gen_range(-3.0..3.0)]
        } else {
            [rng.gen_range(-0.9..0.9), rng.gen_range(-0.1..0.1)]
        };
        let q = find_s0_point(m, seed_pt)?;
        out.push((m.clone(), q));
    }
    Ok(out)
}

fn resonance(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let tol = Tolerances::default();
    let pts = c_case_points(cfg.seed, 20)?;
    let res = exec::map(cfg.exec, &pts, |(m, q)| -> Result<(f64, f64, Vec<(f64, f64)>, Case)> {
        let rep = classify(m, *q, &tol)?;
        let s = singular_spectrum(m, &ProjectiveJet::new(q[0], q[1], rep.p0), 1e-9)?.lambda;
        let l1 = s[0].norm().max(1.0);
        let iso = (s[0] - 2.0 * s[1]).norm() / s[0].norm().max(1e-300);
        let third = s[2].norm() / l1;
        let mut others = Vec::new();
        if rep.case == Case::C3 {
            for d in rep.nonisotropic_simple_roots() {
                let s = singular_spectrum(m, &ProjectiveJet::new(q[0], q[1], d), 1e-9)?.lambda;
                let l1 = s[0].norm().max(1.0);
                others.push(((s[0] + s[1]).norm() / l1, s[2].norm() / l1));
            }
        }
        Ok((iso, third, others, rep.case))
    });
    let mut iso = Vec::new();
    let mut third = Vec::new();
    let mut sad = Vec::new();
    let mut not_c = 0;
    for r in res {
        let (i, t, o, case) = r?;
        if !case.is_c() {
            not_c += 1;
        }
        iso.push(i);
        third.push(t);
        for (s, t3) in o {
            sad.push(s);
            third.push(t3);
        }
    }
    Ok(vec![
        Check::at_most("sampled jets are C-case", not_c as f64, 0.0, format!("{} jets", pts.len())),
        Check::at_most("λ1 = 2λ2 at (q, p0), relative", worst(iso.iter().copied()), 1e-8, format!("{} jets", pts.len())),
        Check::at_most("λ1 + λ2 = 0 at non-isotropic C3 roots", worst(sad.iter().copied()), 1e-8, format!("{} jets", sad.len())),
        Check::at_least("non-isotropic C3 roots sampled", sad.len() as f64, 1.0, ""),
        Check::at_most("third eigenvalue ≈ 0, relative", worst(third.iter().copied()), 1e-8, ""),
    ])
}

// ----------------------------------------------------------- divergence

fn divergence(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let metrics = catalog::all_default();
    let idx: Vec<usize> = (0..metrics.len()).collect();
    let h = 1e-4;
    let res = exec::map(cfg.exec, &idx, |&i| -> Result<(f64, usize, usize)> {
        let m = &metrics[i];
        let mut rng = rng_for(cfg.seed, 3000 + i as u64);
        let (mut w, mut big, mut n) = (0.0f64, 0usize, 0usize);
        let mut tries = 0;
        while n < 50 {
            tries += 1;
            if tries > 200_000 {
                return Err(GeoError::NoConvergence(format!("{}: too few jets with F > 0", m.name)));
            }
            let q = random_point(m, &mut rng);
            let d = random_dir(&mut rng);
            let j = ProjectiveJet::new(q[0], q[1], d);
            // stay clear of F = 0 so the stencil sees a smooth F^{-3/2}
            if crate::geoflow::f_unit(m, &j)? < 0.25 {
                continue;
            }
            let r = divergence_w_residual(m, &j, h)?;
            w = if r.is_nan() { f64::NAN } else { w.max(r) };
            if divergence_fd(m, &j, h, false)?.abs() > 1e-2 {
                big += 1;
            }
            n += 1;
        }
        Ok((w, big, n))
    });
    let mut out = Vec::new();
    let (mut big, mut total) = (0, 0);
    let mut per = Vec::new();
    for (m, r) in metrics.iter().zip(res) {
        let (w, b, n) = r?;
        out.push(Check::at_most(format!("{}: div W residual, 50 jets", m.name), w, 1e-5, "h = 1e-4"));
        big += b;
        total += n;
        per.push(format!("{} {}/{}", m.name, b, n));
    }
    out.push(Check::at_least(
        "div V exceeds 1e-2 on at least half of the jets",
        big as f64,
        0.5 * total as f64,
        per.join(", "),
    ));
    Ok(out)
}

// --------------------------------------------------------------- oracle

/// Polyline cut at arc length `len` (interpolating the last point).
fn truncate_arc(pts: &[[f64; 2]], len: f64) -> Vec<[f64; 2]> {
    let mut out = vec![pts[0]];
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let d = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
        if acc + d >= len {
            let t = if d > 0.0 { (len - acc) / d } else { 0.0 };
            out.push([w[0][0] + t * (w[1][0] - w[0][0]), w[0][1] + t * (w[1][1] - w[0][1])]);
            return out;
        }
        acc += d;
        out.push(w[1]);
    }
    out
}

fn arc_length(pts: &[[f64; 2]]) -> f64 {
    pts.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum()
}

/// One window: returns the Hausdorff distance between the two traces.
pub fn oracle_window(m: &MetricField, rng: &mut ChaCha8Rng, base: &IntegratorOptions) -> Result<f64> {
    let mut opts = *base;
    opts.rel_tol = opts.rel_tol.min(1e-11);
    opts.abs_tol = opts.abs_tol.min(1e-13);
    // chord error of the polylines is κ·gap²/8
    opts.sample_gap = Some(2e-4);
    for _ in 0..10_000 {
        let q = random_point(m, rng);
        let sc = coeff_scale(m, q)?;
        if m.delta(q[0], q[1])?.abs() < 0.05 * sc * sc {
            continue;
        }
        let d = random_dir(rng);
        let j = ProjectiveJet::new(q[0], q[1], d);
        if crate::geoflow::f_unit(m, &j)?.abs() < 0.05 * sc {
            continue;
        }
        let v0 = d.unit();
        let nat = match integrate_natural(m, q, v0, 0.3, &opts) {
            Ok(c) if matches!(c.termination, Termination::SpanExhausted | Termination::LeftBbox) => c,
            _ => continue,
        };
        let np = nat.points();
        // stay off S0 along the whole window
        if np.iter().any(|p| m.delta(p[0], p[1]).map(|v| v.abs() < 0.01 * sc * sc).unwrap_or(true)) {
            continue;
        }
        let or = orientation_along(m, &j, v0)?;
        let geo = integrate_geodesic(m, &j, or * 1e3, &opts)?;
        let gp = truncate_arc(&geo.points(), arc_length(&np));
        return Ok(hausdorff(&np, &gp));
    }
    Err(GeoError::NoConvergence(format!("{}: no nondegenerate window found", m.name)))
}

fn oracle(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let metrics = catalog::all_default();
    let idx: Vec<usize> = (0..30).collect();
    let res = exec::map(cfg.exec, &idx, |&i| {
        let m = &metrics[i % metrics.len()];
        oracle_window(m, &mut rng_for(cfg.seed, 4000 + i as u64), &cfg.opts)
    });
    let mut ds = Vec::new();
    for r in res {
        ds.push(r?);
    }
    Ok(vec![Check::at_most("Hausdorff distance, 30 windows", worst(ds), 1e-6, "")])
}

// ----------------------------------------------------------- invariance

/// Jet with |F| < 1e-10 at a Lorentzian point of `m`.
fn isotropic_jet(m: &MetricField, rng: &mut ChaCha8Rng) -> Result<Option<ProjectiveJet>> {
    let q = random_point(m, rng);
    let k = m.eval(q[0], q[1])?;
    let sc = coeff_scale(m, q)?;
    if k.delta() > -0.01 * sc * sc {
        return Ok(None);
    }
    let roots = solve_quadratic(k.c, 2.0 * k.b, k.a);
    let mut dirs: Vec<ProjectiveDirection> = roots.iter().map(|&p| ProjectiveDirection::p(p).canonical()).collect();
    if k.c.abs() < 1e-14 * sc {
        dirs.push(ProjectiveDirection::infinity());
    }
    if dirs.is_empty() {
        return Ok(None);
    }
    let mut d = dirs[rng.gen_range(0..dirs.len())];
    // polish in the chart of d
    let kc = chart_coeffs(&k, d.chart);
    for _ in 0..5 {
        let f = kc.a + 2.0 * kc.b * d.value + kc.c * d.value * d.value;
        let fp = 2.0 * kc.b + 2.0 * kc.c * d.value;
        if fp == 0.0 {
            break;
        }
        d.value -= f / fp;
    }
    let j = ProjectiveJet::new(q[0], q[1], d);
    Ok((crate::geoflow::f_unit(m, &j)?.abs() < 1e-10).then_some(j))
}

fn trial_f_invariance(m: &MetricField, rng: &mut ChaCha8Rng, opts: &IntegratorOptions) -> Result<f64> {
    for _ in 0..10_000 {
        if let Some(j) = isotropic_jet(m, rng)? {
            let c = integrate_geodesic(m, &j, 1.0, opts)?;
            return Ok(worst(c.samples.iter().map(|s| s.f.abs())));
        }
    }
    Err(GeoError::NoConvergence(format!("{}: no Lorentzian point found", m.name)))
}

fn trial_vertical(m: &MetricField, rng: &mut ChaCha8Rng, opts: &IntegratorOptions) -> Result<f64> {
    for _ in 0..10_000 {
        let seed = random_point(m, rng);
        let q = match find_s0_point(m, seed) {
            Ok(q) if m.bbox.contains(q[0], q[1]) => q,
            _ => continue,
        };
        let d = random_dir(rng);
        let k = m.eval(q[0], q[1])?;
        let u = d.unit();
        let mu = mu_from(&k);
        // M on the unit direction vector as a binary cubic
        let mv = mu[0] * u[0].powi(3) + mu[1] * u[0].powi(2) * u[1] + mu[2] * u[0] * u[1].powi(2) + mu[3] * u[1].powi(3);
        if mv.abs() < 1e-2 * coeff_scale(m, q)?.powi(2) {
            continue;
        }
        let mut o = *opts;
        o.stop_at_singular = false;
        let c = integrate_geodesic(m, &ProjectiveJet::new(q[0], q[1], d), 1.0, &o)?;
        return Ok(worst(c.samples.iter().map(|s| (s.x - q[0]).hypot(s.y - q[1]))));
    }
    Err(GeoError::NoConvergence(format!("{}: no S0 point found", m.name)))
}

/// 1.0 when the S0-avoiding part of a random trajectory is mixed.
fn trial_type(m: &MetricField, rng: &mut ChaCha8Rng, opts: &IntegratorOptions) -> Result<f64> {
    for _ in 0..10_000 {
        let q = random_point(m, rng);
        let sc = coeff_scale(m, q)?;
        let d0 = m.delta(q[0], q[1])?;
        if d0.abs() < 0.05 * sc * sc {
            continue;
        }
        let j = ProjectiveJet::new(q[0], q[1], random_dir(rng));
        if crate::geoflow::f_unit(m, &j)?.abs() < 1e-3 * sc {
            continue;
        }
        let c = integrate_geodesic(m, &j, if rng.gen_bool(0.5) { 1.0 } else { -1.0 }, opts)?;
        let window: Vec<_> = c.samples.iter().take_while(|s| s.delta * d0 > 0.0 && s.delta.abs() > 1e-6).cloned().collect();
        return Ok((causal_type_of(&window, opts.event_tol) == CausalType::Mixed) as u8 as f64);
    }
    Err(GeoError::NoConvergence(format!("{}: no nondegenerate start found", m.name)))
}

type Trial = fn(&MetricField, &mut ChaCha8Rng, &IntegratorOptions) -> Result<f64>;

fn trials(cfg: &SuiteConfig, stream: u64, n: usize, f: Trial) -> Result<Vec<f64>> {
    let metrics = catalog::all_default();
    let idx: Vec<usize> = (0..n).collect();
    exec::map(cfg.exec, &idx, |&i| f(&metrics[i % metrics.len()], &mut rng_for(cfg.seed, stream + i as u64), &cfg.opts))
        .into_iter()
        .collect()
}

fn invariance(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let f = trials(cfg, 5000, 100, trial_f_invariance)?;
    let v = trials(cfg, 6000, 100, trial_vertical)?;
    let t = trials(cfg, 7000, 100, trial_type)?;
    Ok(vec![
        Check::at_most("|F| along isotropic starts, 100 trials", worst(f), 1e-7, "start |F| < 1e-10, unit span"),
        Check::at_most("(x, y) drift from S0 starts, 100 trials", worst(v), 1e-9, "M ≠ 0, unit span"),
        Check::at_most("mixed causal type on S0-avoiding windows", t.iter().sum::<f64>(), 0.0, "100 trials"),
    ])
}

// ------------------------------------------------------------- clairaut

fn clairaut(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let m = catalog::clairaut();
    let alphas = [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5];
    let y0 = 0.3;
    let jobs: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| [(a, 1.0), (a, -1.0)]).collect();
    let opts = cfg.opts;
    let drift = exec::map(cfg.exec, &jobs, |&(a, sg)| -> Result<f64> {
        let seed = ProjectiveJet::with_slope(0.0, y0, sg * (y0 - a * y0 * y0).sqrt());
        let a0 = clairaut_integral(&seed)?;
        let mut w: f64 = 0.0;
        for span in [1.0, -1.0] {
            let c = integrate_geodesic(&m, &seed, span, &opts)?;
            for s in c.samples.iter().filter(|s| s.y.abs() > 1e-3) {
                w = w.max((clairaut_integral(&s.jet())? - a0).abs());
            }
        }
        Ok(w)
    });
    let mut dr = Vec::new();
    for d in drift {
        dr.push(d?);
    }
    let fcfg = FamilyConfig { exec: cfg.exec, opts, ..FamilyConfig::default() };
    let members = families::clairaut_family(&m, &alphas, y0, 0.0, &fcfg)?;
    let mut wrong = Vec::new();
    let mut lowest = f64::INFINITY;
    for mem in &members {
        let a = mem.params[0];
        let want = if a > 0.0 {
            CausalType::Timelike
        } else if a < 0.0 {
            CausalType::Spacelike
        } else {
            CausalType::Isotropic
        };
        if mem.causal_type != want {
            wrong.push(format!("α={} is {}", a, mem.causal_type.label()));
        }
        lowest = lowest.min(mem.curve.samples.iter().map(|s| s.y).fold(f64::INFINITY, f64::min));
    }
    Ok(vec![
        Check::at_most("|α(t) − α(0)| over unit span, 20 geodesics", worst(dr), 1e-8, ""),
        Check::at_most("causal type follows the sign of α", wrong.len() as f64, 0.0, wrong.join("; ")),
        Check::at_least("y > 0 family never enters y < 0", lowest, -1e-9, format!("{} members", members.len())),
    ])
}

// --------------------------------------------------------------- sphere

fn sphere(_cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let m = catalog::mink_sphere();
    let e = catalog::sphere_embedding();
    let tol = Tolerances::default();
    let mut out = Vec::new();
    let phis = [-2.5, -1.0, 0.0, 0.7, 2.0];
    let mut d = 0.0f64;
    for th in [PI / 4.0, 3.0 * PI / 4.0] {
        for ph in phis {
            d = d.max(m.delta(th, ph)?.abs());
        }
    }
    out.push(Check::at_most("Δ at θ = π/4, 3π/4", d, 1e-10, "Z = ±1/√2"));
    let sig: Vec<&str> = [0.5, PI / 2.0, 2.6]
        .iter()
        .map(|&th| if m.delta(th, 0.3).unwrap_or(0.0) > 0.0 { "R" } else { "L" })
        .collect();
    out.push(Check::truth("signature pattern R/L/R", sig == ["R", "L", "R"], sig.join("/")));
    let mut bad = Vec::new();
    for seed_th in [0.7, 2.4] {
        for ph in phis {
            let q = find_s0_point(&m, [seed_th, ph])?;
            let rep = classify(&m, q, &tol)?;
            let kg = euclidean_gauss_curvature(&e, q[0], q[1])?;
            if rep.case != Case::C1 || kg <= 0.0 {
                bad.push(format!("({:.4}, {:.4}) {} K={:.3}", q[0], q[1], rep.case, kg));
            }
        }
    }
    out.push(Check::truth("S0 points are C1 with K > 0", bad.is_empty(), bad.join("; ")));
    Ok(out)
}

// ------------------------------------------------------------- families

/// Sup error of V-traces seeded on x = α|y|^{3/2} for `ex1`, and the
/// fitted exponent over τ ∈ [τ0, 10τ0].
pub fn ex1_closed_form(alpha: f64, branch: f64, tau0: f64, opts: &IntegratorOptions) -> Result<(f64, f64)> {
    let m = catalog::ex1();
    let y0 = branch * tau0 * tau0;
    let seed_pos = [alpha * tau0.powi(3), y0];
    // dx/dy = 1.5 α |y|^{1/2} sign(y); move away from q
    let d = [1.5 * alpha * tau0 * branch * branch, branch];
    let j = ProjectiveJet::new(seed_pos[0], seed_pos[1], ProjectiveDirection::from_vector(d[0], d[1]));
    let or = orientation_along(&m, &j, d)?;
    let mut o = *opts;
    o.sample_rel = Some(0.01);
    o.sample_origin = Some([0.0, 0.0]);
    o.sample_gap = Some(5e-3);
    let c = integrate_geodesic(&m, &j, or * 1e3, &o)?;
    let err = worst(
        c.samples
            .iter()
            .filter(|s| s.y.abs() >= tau0 * tau0 && s.y.abs() <= 0.5)
            .map(|s| (s.x - alpha * s.y.abs().powf(1.5)).abs()),
    );
    let pts: Vec<[f64; 2]> = c.points();
    let fit = fit_points(&pts, &LocalFrame::identity([0.0, 0.0]), Model::Semicubic, FitWindow { lo: tau0, hi: 10.0 * tau0 })?;
    Ok((err, fit.exponent))
}

fn family_checks(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let fcfg = FamilyConfig { exec: cfg.exec, opts: cfg.opts, ..FamilyConfig::default() };
    let alphas = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];

    let mut sup: f64 = 0.0;
    let mut expo: f64 = 0.0;
    for &a in &alphas {
        for br in [1.0, -1.0] {
            let (e, x) = ex1_closed_form(a, br, fcfg.tau0, &cfg.opts)?;
            sup = if e.is_nan() { f64::NAN } else { sup.max(e) };
            expo = expo.max((x - 1.5).abs());
        }
    }
    out.push(Check::at_most("ex1: V-traces stay on x = α|y|^{3/2}", sup, 1e-6, "y ∈ [τ0², 0.5]"));
    out.push(Check::at_most("ex1: |exponent − 3/2|", expo, 1e-3, ""));

    let r_stop = cfg.opts.r_stop;
    let c_points: Vec<(MetricField, [f64; 2])> = vec![
        (catalog::ex1(), [0.0, 0.0]),
        (catalog::ex1exp(), [0.0, 0.0]),
        (catalog::c1c3(0.5), [0.0, 0.0]),
        (catalog::c1c3(-0.5), [0.0, 0.0]),
        (catalog::mink_sphere(), [PI / 4.0, 0.0]),
    ];
    let mut worst_exp: f64 = 0.0;
    let mut far = Vec::new();
    for (m, q) in &c_points {
        let fam = families::family_case_c_isotropic(m, *q, &alphas, &fcfg)?;
        for mem in &fam.members {
            match mem.fit {
                Some(f) => worst_exp = worst_exp.max((f.exponent - 1.5).abs()),
                None => worst_exp = f64::NAN,
            }
            if !(mem.inner_distance < 10.0 * r_stop && mem.inner_dir_error < 1e-4) {
                far.push(format!("{} α={} {:?}", m.name, mem.params[0], mem.side));
            }
        }
        let both = fam.count(Side::Lorentzian, Role::Family) > 0 && fam.count(Side::Riemannian, Role::Family) > 0;
        out.push(Check::truth(format!("{}: members on both sides of S0", m.name), both, ""));
    }
    out.push(Check::at_most("C families: |exponent − 3/2|", worst_exp, 5e-3, "τ ∈ [τ0, 10τ0]"));
    out.push(Check::truth("C families: every member enters q along p0", far.is_empty(), far.join("; ")));

    for eps in [-1.0, 1.0 / 32.0, 1.0 / 8.0] {
        let m = catalog::dd(eps);
        let fam = families::family_case_d(&m, [0.0, 0.0], &fcfg)?;
        let entering = fam
            .members
            .iter()
            .filter(|mm| mm.role == Role::Family && mm.side == Side::Lorentzian && mm.reaches(r_stop))
            .count();
        out.push(Check::at_least(format!("dd({}): members entering q from the Lorentzian side", eps), entering as f64, 20.0, fam.warnings.join("; ")));
        let probe = fam.riemannian_probe.as_ref();
        out.push(Check::at_most(
            format!("dd({}): Riemannian shots reaching q", eps),
            probe.map(|p| p.reaching as f64).unwrap_or(f64::NAN),
            0.0,
            probe.map(|p| format!("{} shots, closest {:.3e}", p.shots, p.closest)).unwrap_or_default(),
        ));
        if eps < 0.0 {
            let (e1, e2) = dsaddle_epsilons(eps)?;
            let fam_err = worst(
                fam.members.iter().filter(|mm| mm.role == Role::Family).map(|mm| mm.fit.map(|f| (f.coefficient - e1 / 2.0).abs()).unwrap_or(f64::NAN)),
            );
            let sep: Vec<f64> =
                fam.members.iter().filter(|mm| mm.role == Role::Separatrix).filter_map(|mm| mm.fit.map(|f| (f.coefficient - e2 / 2.0).abs())).collect();
            out.push(Check::at_most("dd(-1): family coefficient − ε1/2", fam_err, 1e-2, ""));
            out.push(Check::at_most("dd(-1): separatrix coefficient − ε2/2", if sep.is_empty() { f64::NAN } else { worst(sep) }, 1e-2, ""));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncate_at_length() {
        let p = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]];
        let t = truncate_arc(&p, 1.5);
        assert_eq!(t.last().copied(), Some([1.0, 0.5]));
        assert!((arc_length(&t) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn unknown_suite() {
        assert!(run("nope", &SuiteConfig::default()).is_err());
    }

    #[test]
    fn worst_propagates_nan() {
        assert!(worst([1.0, f64::NAN, 0.5]).is_nan());
        assert_eq!(worst([1.0, 3.0]), 3.0);
    }
}
