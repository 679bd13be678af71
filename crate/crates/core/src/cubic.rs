//! Real roots of polynomials up to degree three and of binary cubic forms.

/// Real roots of a x³ + b x² + c x + d with a ≠ 0, ascending, Newton-polished.
pub fn solve_cubic(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    if a == 0.0 {
        return solve_quadratic(b, c, d);
    }
    let (b, c, d) = (b / a, c / a, d / a);
    // x = t - b/3: t³ + p t + q = 0
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let shift = -b / 3.0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let mut roots = if disc < 0.0 {
        let r = (-p / 3.0).sqrt();
        let cos_arg = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0);
        let phi = cos_arg.acos();
        (0..3)
            .map(|k| 2.0 * r * ((phi + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + shift)
            .collect::<Vec<_>>()
    } else {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        vec![u + v + shift]
    };
    let f = |x: f64| ((x + b) * x + c) * x + d;
    let df = |x: f64| (3.0 * x + 2.0 * b) * x + c;
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let g = df(*r);
            if g == 0.0 {
                break;
            }
            let step = f(*r) / g;
            if !step.is_finite() {
                break;
            }
            let next = *r - step;
            if f(next).abs() <= f(*r).abs() {
                *r = next;
            } else {
                break;
            }
        }
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots
}

pub fn solve_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let s = disc.sqrt();
    // stable form
    let qq = -0.5 * (b + b.signum() * s);
    let mut r = if qq == 0.0 { vec![0.0, 0.0] } else { vec![qq / a, c / qq] };
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r
}

/// Binary cubic B(t, s) = k[0] t³ + k[1] t² s + k[2] t s² + k[3] s³.
/// A root is a direction (t, s) ≠ 0 with B = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryCubic {
    pub k: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryRoots {
    /// Unit direction vectors (t, s) with multiplicities.
    pub roots: Vec<([f64; 2], u8)>,
    /// Discriminant of the max-normalized form.
    pub disc: f64,
    pub warnings: Vec<String>,
}

impl BinaryCubic {
    pub fn eval(&self, t: f64, s: f64) -> f64 {
        let k = &self.k;
        ((k[0] * t + k[1] * s) * t + k[2] * s * s) * t + k[3] * s * s * s
    }

    pub fn max_abs(&self) -> f64 {
        self.k.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn normalized(&self) -> BinaryCubic {
        let n = self.max_abs();
        BinaryCubic { k: self.k.map(|v| v / n) }
    }

    /// Discriminant in the usual (a, b, c, d) naming with a = coefficient of s³.
    pub fn discriminant(&self) -> f64 {
        let (a, b, c, d) = (self.k[3], self.k[2], self.k[1], self.k[0]);
        18.0 * a * b * c * d - 4.0 * b * b * b * d + b * b * c * c - 4.0 * a * c * c * c - 27.0 * a * a * d * d
    }

    /// Hessian covariant (h_ss, h_st, h_tt).
    pub fn hessian(&self) -> [f64; 3] {
        let (a, b, c, d) = (self.k[3], self.k[2], self.k[1], self.k[0]);
        [b * b - 3.0 * a * c, b * c - 9.0 * a * d, c * c - 3.0 * b * d]
    }

    /// Coefficients of the polynomial r ↦ B(t0 + t1 r, s0 + s1 r), ascending.
    fn restrict(&self, t0: f64, t1: f64, s0: f64, s1: f64) -> [f64; 4] {
        let mul = |p: &[f64], q: &[f64]| {
            let mut out = vec![0.0; p.len() + q.len() - 1];
            for (i, a) in p.iter().enumerate() {
                for (j, b) in q.iter().enumerate() {
                    out[i + j] += a * b;
                }
            }
            out
        };
        let t = [t0, t1];
        let s = [s0, s1];
        let tt = mul(&t, &t);
        let ss = mul(&s, &s);
        let terms = [mul(&tt, &t), mul(&tt, &s), mul(&t, &ss), mul(&ss, &s)];
        let mut out = [0.0; 4];
        for (ki, term) in self.k.iter().zip(terms.iter()) {
            for (o, v) in out.iter_mut().zip(term.iter()) {
                *o += ki * v;
            }
        }
        out
    }

    /// Projective real roots with multiplicities. `tol` is the absolute
    /// discriminant threshold after normalization. Returns None for B ≡ 0.
    pub fn roots(&self, tol: f64) -> Option<BinaryRoots> {
        if self.max_abs() < 1e-300 {
            return None;
        }
        let n = self.normalized();
        let disc = n.discriminant();
        let mut warnings = Vec::new();
        if disc.abs() <= tol {
            let h = n.hessian();
            let hmax = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if hmax <= tol.sqrt() {
                if hmax > 1e-14 {
                    warnings.push(format!("near-triple root (Hessian size {:.3e})", hmax));
                }
                let dir = n.triple_root_dir();
                return Some(BinaryRoots { roots: vec![(dir, 3)], disc, warnings });
            }
            if hmax < 1e-4 {
                warnings.push(format!("double root close to triple (Hessian size {:.3e})", hmax));
            }
            if disc != 0.0 {
                warnings.push(format!("discriminant {:.3e} within tolerance: treated as repeated root", disc));
            }
            // H is (nearly) a perfect square vanishing on the double root
            let [hss, hst, htt] = h;
            let dbl = if hss.abs() >= htt.abs() { unit([1.0, -hst / (2.0 * hss)]) } else { unit([-hst / (2.0 * htt), 1.0]) };
            let simple = n.deflate(dbl);
            return Some(BinaryRoots { roots: vec![(dbl, 2), (simple, 1)], disc, warnings });
        }
        if disc.abs() < 1e3 * tol {
            warnings.push(format!("discriminant {:.3e} close to the repeated-root threshold", disc));
        }
        // rotate so the leading coefficient is as large as possible
        let mut best = (0.0, 0.0f64);
        for i in 0..12 {
            let phi = std::f64::consts::PI * i as f64 / 12.0;
            let lead = n.eval(-phi.sin(), phi.cos()).abs();
            if lead > best.1 {
                best = (phi, lead);
            }
        }
        let (cph, sph) = (best.0.cos(), best.0.sin());
        let poly = n.restrict(cph, -sph, sph, cph);
        let rs = solve_cubic(poly[3], poly[2], poly[1], poly[0]);
        let mut roots: Vec<([f64; 2], u8)> = rs.iter().map(|&r| (unit([cph - sph * r, sph + cph * r]), 1)).collect();
        let want = if disc > 0.0 { 3 } else { 1 };
        if roots.len() != want {
            warnings.push(format!("root count {} disagrees with discriminant sign", roots.len()));
            if want == 1 && roots.len() == 3 {
                // keep the root with the largest separation from the others
                let sep = |i: usize| {
                    (0..3).filter(|&j| j != i).map(|j| dir_dist(roots[i].0, roots[j].0)).fold(f64::INFINITY, f64::min)
                };
                let i = (0..3).max_by(|&x, &y| sep(x).partial_cmp(&sep(y)).unwrap()).unwrap();
                roots = vec![roots[i]];
            }
        }
        Some(BinaryRoots { roots, disc, warnings })
    }

    fn triple_root_dir(&self) -> [f64; 2] {
        // B ∝ (t0 s − s0 t)³: ratio of the outer coefficients
        let (a, b, c, d) = (self.k[3], self.k[2], self.k[1], self.k[0]);
        if a.abs() >= d.abs() {
            // s/t root r with a(r - r0)^3: b = -3 a r0
            unit([1.0, -b / (3.0 * a)])
        } else {
            unit([-c / (3.0 * d), 1.0])
        }
    }

    /// Simple root of B = (t0 s − s0 t)² (α s + β t), least squares in (α, β).
    fn deflate(&self, dir: [f64; 2]) -> [f64; 2] {
        let [t0, s0] = dir;
        // columns for α and β against (s³, s²t, st², t³) = (k3, k2, k1, k0)
        let ca = [t0 * t0, -2.0 * t0 * s0, s0 * s0, 0.0];
        let cb = [0.0, t0 * t0, -2.0 * t0 * s0, s0 * s0];
        let rhs = [self.k[3], self.k[2], self.k[1], self.k[0]];
        let dot = |u: &[f64; 4], v: &[f64; 4]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let (aa, ab, bb) = (dot(&ca, &ca), dot(&ca, &cb), dot(&cb, &cb));
        let (ra, rb) = (dot(&ca, &rhs), dot(&cb, &rhs));
        let det = aa * bb - ab * ab;
        let alpha = (ra * bb - rb * ab) / det;
        let beta = (aa * rb - ab * ra) / det;
        unit([alpha, -beta])
    }
}

pub fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// Sine of the angle between two line directions.
pub fn dir_dist(u: [f64; 2], v: [f64; 2]) -> f64 {
    let u = unit(u);
    let v = unit(v);
    (u[0] * v[1] - u[1] * v[0]).abs()
}
