//! Discriminant curve, isotropic and admissible directions, case taxonomy.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::cubic::{dir_dist, unit, BinaryCubic};
use crate::error::{GeoError, Result};
use crate::metric::{Coeffs, MetricField, Second};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Chart {
    P,
    PBAR,
}

/// Direction of a line: dy/dx in chart P, dx/dy in chart PBAR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectiveDirection {
    pub chart: Chart,
    pub value: f64,
}

impl ProjectiveDirection {
    pub fn p(value: f64) -> Self {
        ProjectiveDirection { chart: Chart::P, value }
    }

    pub fn pbar(value: f64) -> Self {
        ProjectiveDirection { chart: Chart::PBAR, value }
    }

    pub fn infinity() -> Self {
        Self::pbar(0.0)
    }

    /// Direction of the vector (dx, dy), canonical chart.
    pub fn from_vector(dx: f64, dy: f64) -> Self {
        if dy.abs() <= dx.abs() {
            Self::p(dy / dx)
        } else {
            Self::pbar(dx / dy)
        }
    }

    /// Representative vector (dx, dy), not normalized.
    pub fn vector(&self) -> [f64; 2] {
        match self.chart {
            Chart::P => [1.0, self.value],
            Chart::PBAR => [self.value, 1.0],
        }
    }

    pub fn unit(&self) -> [f64; 2] {
        unit(self.vector())
    }

    pub fn is_canonical(&self) -> bool {
        self.value.abs() <= 1.0
    }

    pub fn canonical(&self) -> Self {
        if self.is_canonical() {
            *self
        } else {
            let v = self.vector();
            Self::from_vector(v[0], v[1])
        }
    }

    /// Same direction expressed in the other chart (value may be infinite).
    pub fn flipped(&self) -> Self {
        let chart = match self.chart {
            Chart::P => Chart::PBAR,
            Chart::PBAR => Chart::P,
        };
        ProjectiveDirection { chart, value: 1.0 / self.value }
    }

    /// Slope dy/dx; infinite for vertical.
    pub fn slope(&self) -> f64 {
        match self.chart {
            Chart::P => self.value,
            Chart::PBAR => 1.0 / self.value,
        }
    }

    /// Sine of the angle to another direction.
    pub fn distance(&self, other: &ProjectiveDirection) -> f64 {
        dir_dist(self.vector(), other.vector())
    }
}

/// Coefficients in the working coordinates of a chart: identity for P,
/// swapped (x̄ = y, ȳ = x) for PBAR.
pub fn chart_coeffs(k: &Coeffs, chart: Chart) -> Coeffs {
    match chart {
        Chart::P => *k,
        Chart::PBAR => k.swapped(),
    }
}

pub fn chart_second(s: &Second, chart: Chart) -> Second {
    match chart {
        Chart::P => *s,
        Chart::PBAR => s.swapped(),
    }
}

/// μ0..μ3 from coefficients and first partials.
pub fn mu_from(k: &Coeffs) -> [f64; 4] {
    let Coeffs { a, b, c, a_x, a_y, b_x, b_y, c_x, c_y } = *k;
    [
        a * (a_y - 2.0 * b_x) + a_x * b,
        b * (3.0 * a_y - 2.0 * b_x) + a_x * c - 2.0 * a * c_x,
        b * (2.0 * b_y - 3.0 * c_x) + 2.0 * a_y * c - a * c_y,
        c * (2.0 * b_y - c_x) - b * c_y,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicM {
    pub mu: [f64; 4],
    pub q: [f64; 2],
}

impl CubicM {
    /// M(p) = μ0 + μ1 p + μ2 p² + μ3 p³ in chart P.
    pub fn eval_p(&self, p: f64) -> f64 {
        let m = &self.mu;
        ((m[3] * p + m[2]) * p + m[1]) * p + m[0]
    }

    /// Coefficients of the swapped-chart cubic M̄(p̄) = −p̄³ M(1/p̄).
    pub fn swapped_mu(&self) -> [f64; 4] {
        let m = &self.mu;
        [-m[3], -m[2], -m[1], -m[0]]
    }

    /// Value in the chart of `d`.
    pub fn eval(&self, d: &ProjectiveDirection) -> f64 {
        match d.chart {
            Chart::P => self.eval_p(d.value),
            Chart::PBAR => {
                let m = self.swapped_mu();
                let p = d.value;
                ((m[3] * p + m[2]) * p + m[1]) * p + m[0]
            }
        }
    }

    /// As a binary form in (dx, dy).
    pub fn binary(&self) -> BinaryCubic {
        BinaryCubic { k: self.mu }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.mu.iter().all(|v| v.abs() <= tol)
    }
}

pub fn delta(m: &MetricField, x: f64, y: f64) -> Result<(f64, [f64; 2])> {
    let k = m.eval(x, y)?;
    Ok((k.delta(), k.grad_delta()))
}

pub fn cubic_m(m: &MetricField, x: f64, y: f64) -> Result<CubicM> {
    Ok(CubicM { mu: mu_from(&m.eval(x, y)?), q: [x, y] })
}

/// F on a unit representative of the direction: chart independent.
pub fn f_unit(k: &Coeffs, d: &ProjectiveDirection) -> f64 {
    let [t, s] = d.unit();
    k.a * t * t + 2.0 * k.b * t * s + k.c * s * s
}

/// Newton refinement of `seed` onto Δ = 0.
pub fn find_s0_point(m: &MetricField, seed: [f64; 2]) -> Result<[f64; 2]> {
    let (d0, g0) = delta(m, seed[0], seed[1])?;
    let gn = g0[0].hypot(g0[1]);
    if gn < 1e-12 {
        return Err(GeoError::Degenerate(format!("grad Δ vanishes at ({}, {})", seed[0], seed[1])));
    }
    if d0.abs() < 1e-12 {
        return Ok(seed);
    }
    let axis = if g0[0].abs() > g0[1].abs() { 0 } else { 1 };
    let mut q = seed;
    let mut ok = false;
    for _ in 0..60 {
        let (d, g) = delta(m, q[0], q[1])?;
        if d.abs() < 1e-12 {
            ok = true;
            break;
        }
        if g[axis] == 0.0 || !g[axis].is_finite() {
            break;
        }
        let step = d / g[axis];
        if !step.is_finite() || step.abs() > 10.0 * (m.bbox.width() + m.bbox.height()) {
            break;
        }
        q[axis] -= step;
    }
    if !ok {
        // full-gradient Newton as a fallback
        q = seed;
        for _ in 0..100 {
            let (d, g) = delta(m, q[0], q[1])?;
            if d.abs() < 1e-12 {
                ok = true;
                break;
            }
            let g2 = g[0] * g[0] + g[1] * g[1];
            if g2 < 1e-24 {
                return Err(GeoError::Degenerate("grad Δ vanishes during Newton".into()));
            }
            q = [q[0] - d * g[0] / g2, q[1] - d * g[1] / g2];
        }
    }
    if !ok || !q[0].is_finite() || !q[1].is_finite() {
        return Err(GeoError::NoConvergence(format!("Newton onto Δ=0 from ({}, {})", seed[0], seed[1])));
    }
    if !m.bbox.contains(q[0], q[1]) {
        return Err(GeoError::NoConvergence(format!("S0 point ({}, {}) outside bbox", q[0], q[1])));
    }
    Ok(q)
}

/// Null direction of the degenerate form at q, canonical chart.
pub fn isotropic_direction_k(k: &Coeffs) -> Result<ProjectiveDirection> {
    let scale = k.a.abs().max(k.b.abs()).max(k.c.abs());
    if scale < 1e-14 {
        return Err(GeoError::Degenerate("a, b, c vanish together".into()));
    }
    if k.c.abs() >= k.a.abs() {
        Ok(ProjectiveDirection::p(-k.b / k.c))
    } else {
        Ok(ProjectiveDirection::pbar(-k.b / k.a))
    }
}

pub fn isotropic_direction(m: &MetricField, q: [f64; 2]) -> Result<ProjectiveDirection> {
    isotropic_direction_k(&m.eval(q[0], q[1])?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// discriminant threshold on the normalized cubic
    pub disc: f64,
    /// sine-angle threshold for tangency
    pub tangency: f64,
    /// |Δ| threshold (relative to the coefficient scale) for S0 membership
    pub on_s0: f64,
    /// relative threshold for degenerate D spectra
    pub spectrum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { disc: 1e-9, tangency: 1e-7, on_s0: 1e-8, spectrum: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleRoot {
    pub dir: ProjectiveDirection,
    pub multiplicity: u8,
    pub is_isotropic: bool,
}

fn on_s0_check(k: &Coeffs, q: [f64; 2], tol: &Tolerances) -> Result<()> {
    let scale = k.a.abs().max(k.b.abs()).max(k.c.abs()).max(1.0);
    if k.delta().abs() > tol.on_s0 * scale * scale {
        return Err(GeoError::Invalid(format!("({}, {}) is not on S0: Δ = {:e}", q[0], q[1], k.delta())));
    }
    Ok(())
}

/// Roots of M at q with multiplicities; also returns the discriminant and warnings.
pub fn admissible_directions_k(
    k: &Coeffs,
    q: [f64; 2],
    tol: &Tolerances,
) -> Result<(Vec<AdmissibleRoot>, f64, Vec<String>)> {
    let cm = CubicM { mu: mu_from(k), q };
    let br = cm
        .binary()
        .roots(tol.disc)
        .ok_or_else(|| GeoError::Degenerate(format!("M vanishes identically at ({}, {})", q[0], q[1])))?;
    let p0 = isotropic_direction_k(k)?;
    let mut roots: Vec<AdmissibleRoot> = br
        .roots
        .iter()
        .map(|(v, mult)| AdmissibleRoot { dir: ProjectiveDirection::from_vector(v[0], v[1]), multiplicity: *mult, is_isotropic: false })
        .collect();
    if let Some(i) = (0..roots.len()).min_by(|&i, &j| {
        roots[i].dir.distance(&p0).partial_cmp(&roots[j].dir.distance(&p0)).unwrap()
    }) {
        roots[i].is_isotropic = true;
    }
    Ok((roots, br.disc, br.warnings))
}

pub fn admissible_directions(m: &MetricField, q: [f64; 2], tol: &Tolerances) -> Result<Vec<AdmissibleRoot>> {
    let k = m.eval(q[0], q[1])?;
    on_s0_check(&k, q, tol)?;
    Ok(admissible_directions_k(&k, q, tol)?.0)
}

/// Sine of the angle between p0 and the S0 tangent.
pub fn tangency_sine(k: &Coeffs) -> Result<f64> {
    let g = k.grad_delta();
    let gn = g[0].hypot(g[1]);
    if gn < 1e-12 {
        return Err(GeoError::Degenerate("S0 not regular (grad Δ = 0)".into()));
    }
    let d = isotropic_direction_k(k)?.unit();
    Ok((g[0] * d[0] + g[1] * d[1]).abs() / gn)
}

pub fn tangency_test(m: &MetricField, q: [f64; 2], tol: &Tolerances) -> Result<bool> {
    let k = m.eval(q[0], q[1])?;
    Ok(tangency_sine(&k)? < tol.tangency)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    C1,
    C2,
    C3,
    #[serde(rename = "D_s")]
    Ds,
    #[serde(rename = "D_n")]
    Dn,
    #[serde(rename = "D_f")]
    Df,
}

impl Case {
    pub fn is_c(&self) -> bool {
        matches!(self, Case::C1 | Case::C2 | Case::C3)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Case::C1 => "C1",
            Case::C2 => "C2",
            Case::C3 => "C3",
            Case::Ds => "D_s",
            Case::Dn => "D_n",
            Case::Df => "D_f",
        }
    }
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

fn ser_complex_pair<S: Serializer>(v: &[Complex64; 2], s: S) -> std::result::Result<S::Ok, S::Error> {
    let arr = [[v[0].re, v[0].im], [v[1].re, v[1].im]];
    arr.serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegenerateReport {
    pub q: [f64; 2],
    pub delta: f64,
    pub grad_delta: [f64; 2],
    pub p0: ProjectiveDirection,
    #[serde(rename = "M")]
    pub m: CubicM,
    pub discriminant: f64,
    pub roots: Vec<AdmissibleRoot>,
    pub tangent: bool,
    pub tangency_sine: f64,
    pub case: Case,
    #[serde(serialize_with = "ser_complex_pair")]
    pub isotropic_spectrum: [Complex64; 2],
    pub warnings: Vec<String>,
}

impl DegenerateReport {
    pub fn p0_multiplicity(&self) -> u8 {
        self.roots.iter().find(|r| r.is_isotropic).map(|r| r.multiplicity).unwrap_or(0)
    }

    /// Simple roots other than p0.
    pub fn nonisotropic_simple_roots(&self) -> Vec<ProjectiveDirection> {
        self.roots.iter().filter(|r| !r.is_isotropic && r.multiplicity == 1).map(|r| r.dir).collect()
    }
}

/// Jacobian of the lifted field X = (F_p, p F_p, −(F_x + p F_y)) in chart
/// coordinates (x, y, p), for coefficients already in that chart.
pub fn lifted_jacobian(k: &Coeffs, s: &Second, p: f64) -> [[f64; 3]; 3] {
    let [a2, b2, c2] = s.d;
    let fp = 2.0 * k.b + 2.0 * k.c * p;
    let fxp = 2.0 * k.b_x + 2.0 * k.c_x * p;
    let fyp = 2.0 * k.b_y + 2.0 * k.c_y * p;
    let fy = k.a_y + 2.0 * k.b_y * p + k.c_y * p * p;
    let fxx = a2[0] + 2.0 * b2[0] * p + c2[0] * p * p;
    let fxy = a2[1] + 2.0 * b2[1] * p + c2[1] * p * p;
    let fyy = a2[2] + 2.0 * b2[2] * p + c2[2] * p * p;
    [
        [fxp, fyp, 2.0 * k.c],
        [p * fxp, p * fyp, fp + 2.0 * k.c * p],
        [-(fxx + p * fxy), -(fxy + p * fyy), -(fxp + fy + p * fyp)],
    ]
}

/// Eigenvalue pair of the lifted field at a criminant point: roots of
/// λ² − tr λ + m2 (the third eigenvalue is zero there).
pub fn lifted_pair(j: &[[f64; 3]; 3]) -> (f64, f64, [Complex64; 2]) {
    let tr = j[0][0] + j[1][1] + j[2][2];
    let m2 = j[0][0] * j[1][1] - j[0][1] * j[1][0] + j[0][0] * j[2][2] - j[0][2] * j[2][0] + j[1][1] * j[2][2]
        - j[1][2] * j[2][1];
    let disc = tr * tr - 4.0 * m2;
    let pair = if disc >= 0.0 {
        let s = disc.sqrt();
        [Complex64::new((tr + s) / 2.0, 0.0), Complex64::new((tr - s) / 2.0, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(tr / 2.0, s / 2.0), Complex64::new(tr / 2.0, -s / 2.0)]
    };
    (tr, m2, pair)
}

pub fn classify(m: &MetricField, q: [f64; 2], tol: &Tolerances) -> Result<DegenerateReport> {
    let k = m.eval(q[0], q[1])?;
    on_s0_check(&k, q, tol)?;
    let p0 = isotropic_direction_k(&k)?;
    let (roots, disc, mut warnings) = admissible_directions_k(&k, q, tol)?;
    let tan_sine = tangency_sine(&k)?;
    let tangent = tan_sine < tol.tangency;

    let iso = roots.iter().find(|r| r.is_isotropic).cloned().expect("at least one root");
    if iso.dir.distance(&p0) > 1e-6 {
        warnings.push(format!("isotropic direction is {:.3e} away from the nearest root of M", iso.dir.distance(&p0)));
    }
    let p0_double = iso.multiplicity >= 2;
    if p0_double != tangent {
        warnings.push(format!(
            "root pattern ({}) and tangency test (sine {:.3e}) disagree",
            if p0_double { "p0 repeated" } else { "p0 simple" },
            tan_sine
        ));
    }

    let kc = chart_coeffs(&k, p0.chart);
    let sc = chart_second(&m.eval_second(q[0], q[1])?, p0.chart);
    let jac = lifted_jacobian(&kc, &sc, p0.value);
    let (tr, m2, pair) = lifted_pair(&jac);

    let case = if p0_double {
        if iso.multiplicity == 3 {
            warnings.push("triple root of M: non-generic degenerate point".into());
        }
        let scale = tr.abs().max(m2.abs().sqrt()).max(1e-300);
        let disc_x = tr * tr - 4.0 * m2;
        if m2.abs() <= tol.spectrum * scale * scale {
            warnings.push("lifted-field spectrum has a zero eigenvalue (saddle/node boundary)".into());
        }
        if disc_x.abs() <= tol.spectrum * scale * scale {
            warnings.push("lifted-field spectrum nearly repeated (node/focus boundary)".into());
        }
        if disc_x < 0.0 && disc_x.abs() > tol.spectrum * scale * scale {
            Case::Df
        } else if m2 < 0.0 && m2.abs() > tol.spectrum * scale * scale {
            Case::Ds
        } else {
            Case::Dn
        }
    } else {
        let distinct = roots.len();
        match distinct {
            1 => Case::C1,
            3 => Case::C3,
            _ => {
                warnings.push("case C2: genericity condition not checked".into());
                Case::C2
            }
        }
    };

    Ok(DegenerateReport {
        q,
        delta: k.delta(),
        grad_delta: k.grad_delta(),
        p0,
        m: CubicM { mu: mu_from(&k), q },
        discriminant: disc,
        roots,
        tangent,
        tangency_sine: tan_sine,
        case,
        isotropic_spectrum: pair,
        warnings,
    })
}

/// Points of S0 inside the bbox, ordered along each component.
#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub component: usize,
    pub q: [f64; 2],
    pub case: Option<Case>,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn scan_s0(m: &MetricField, step: f64, tol: &Tolerances) -> Result<Vec<ScanPoint>> {
    let bb = m.bbox;
    let n = 120usize;
    let gx = |i: usize| bb.xmin + bb.width() * i as f64 / n as f64;
    let gy = |j: usize| bb.ymin + bb.height() * j as f64 / n as f64;
    let mut vals = vec![vec![0.0; n + 1]; n + 1];
    for (i, row) in vals.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m.delta(gx(i), gy(j)).unwrap_or(f64::NAN);
        }
    }
    let mut starts = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            for (di, dj) in [(1usize, 0usize), (0, 1)] {
                if i + di > n || j + dj > n {
                    continue;
                }
                let (v0, v1) = (vals[i][j], vals[i + di][j + dj]);
                if v0 == 0.0 || (v0 * v1 < 0.0) {
                    let t = if v0 == 0.0 { 0.0 } else { v0 / (v0 - v1) };
                    let x = gx(i) + t * (gx(i + di) - gx(i));
                    let y = gy(j) + t * (gy(j + dj) - gy(j));
                    starts.push([x, y]);
                }
            }
        }
    }
    if starts.is_empty() {
        return Err(GeoError::Invalid("no S0 in bbox".into()));
    }
    let mut comps: Vec<Vec<[f64; 2]>> = Vec::new();
    let covered = |comps: &Vec<Vec<[f64; 2]>>, q: [f64; 2]| {
        comps.iter().flatten().any(|p| (p[0] - q[0]).hypot(p[1] - q[1]) < 1.5 * step)
    };
    let correct = |q: [f64; 2]| -> Option<[f64; 2]> {
        let mut q = q;
        for _ in 0..50 {
            let (d, g) = delta(m, q[0], q[1]).ok()?;
            if d.abs() < 1e-12 {
                return Some(q);
            }
            let g2 = g[0] * g[0] + g[1] * g[1];
            if g2 < 1e-24 {
                return None;
            }
            q = [q[0] - d * g[0] / g2, q[1] - d * g[1] / g2];
        }
        None
    };
    let max_pts = ((bb.width() + bb.height()) * 4.0 / step) as usize + 10;
    for s in starts {
        let Some(q0) = correct(s) else { continue };
        if !bb.contains(q0[0], q0[1]) || covered(&comps, q0) {
            continue;
        }
        let mut branches: Vec<Vec<[f64; 2]>> = Vec::new();
        for sign in [1.0, -1.0] {
            let mut pts = Vec::new();
            let mut q = q0;
            let mut prev_t: Option<[f64; 2]> = None;
            for _ in 0..max_pts {
                let Ok((_, g)) = delta(m, q[0], q[1]) else { break };
                let gn = g[0].hypot(g[1]);
                if gn < 1e-12 {
                    break;
                }
                let mut t = [-g[1] / gn * sign, g[0] / gn * sign];
                if let Some(pt) = prev_t {
                    if pt[0] * t[0] + pt[1] * t[1] < 0.0 {
                        t = [-t[0], -t[1]];
                    }
                }
                prev_t = Some(t);
                let Some(next) = correct([q[0] + step * t[0], q[1] + step * t[1]]) else { break };
                if !bb.contains(next[0], next[1]) {
                    break;
                }
                // closed curve
                if pts.len() > 3 && (next[0] - q0[0]).hypot(next[1] - q0[1]) < 0.75 * step {
                    break;
                }
                pts.push(next);
                q = next;
            }
            branches.push(pts);
        }
        let mut comp: Vec<[f64; 2]> = branches[1].iter().rev().cloned().collect();
        comp.push(q0);
        comp.extend(branches[0].iter().cloned());
        comps.push(comp);
    }
    let mut out = Vec::new();
    for (ci, comp) in comps.iter().enumerate() {
        for q in comp {
            match classify(m, *q, tol) {
                Ok(r) => out.push(ScanPoint { component: ci, q: *q, case: Some(r.case), error: None, warnings: r.warnings }),
                Err(e) => out.push(ScanPoint { component: ci, q: *q, case: None, error: Some(e.to_string()), warnings: vec![] }),
            }
        }
    }
    Ok(out)
}
