//! Metrics ds² = a dx² + 2b dxdy + c dy² with symbolic partials.

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::expr::{parse_expr_in, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bbox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Bbox {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Bbox> {
        if !(xmin < xmax && ymin < ymax) || ![xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) {
            return Err(GeoError::Invalid(format!("bad bbox [{}, {}, {}, {}]", xmin, xmax, ymin, ymax)));
        }
        Ok(Bbox { xmin, xmax, ymin, ymax })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.xmin && x <= self.xmax && y >= self.ymin && y <= self.ymax
    }

    /// Signed margin: positive inside, zero on the boundary.
    pub fn margin(&self, x: f64, y: f64) -> f64 {
        (x - self.xmin).min(self.xmax - x).min(y - self.ymin).min(self.ymax - y)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }
}

impl Default for Bbox {
    fn default() -> Self {
        Bbox { xmin: -1.0, xmax: 1.0, ymin: -1.0, ymax: 1.0 }
    }
}

/// Coefficients and first partials at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub a_x: f64,
    pub a_y: f64,
    pub b_x: f64,
    pub b_y: f64,
    pub c_x: f64,
    pub c_y: f64,
}

impl Coeffs {
    pub fn delta(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn grad_delta(&self) -> [f64; 2] {
        [
            self.a_x * self.c + self.a * self.c_x - 2.0 * self.b * self.b_x,
            self.a_y * self.c + self.a * self.c_y - 2.0 * self.b * self.b_y,
        ]
    }

    /// Coefficients seen from the swapped chart (x̄ = y, ȳ = x).
    pub fn swapped(&self) -> Coeffs {
        Coeffs {
            a: self.c,
            b: self.b,
            c: self.a,
            a_x: self.c_y,
            a_y: self.c_x,
            b_x: self.b_y,
            b_y: self.b_x,
            c_x: self.a_y,
            c_y: self.a_x,
        }
    }
}

/// Second partials: index [coef][k] with coef in (a,b,c), k in (xx, xy, yy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Second {
    pub d: [[f64; 3]; 3],
}

impl Second {
    pub fn swapped(&self) -> Second {
        let s = |r: [f64; 3]| [r[2], r[1], r[0]];
        Second { d: [s(self.d[2]), s(self.d[1]), s(self.d[0])] }
    }
}

#[derive(Debug, Clone)]
pub struct MetricField {
    pub name: String,
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    first: [Expr; 6],
    second: [[Expr; 3]; 3],
    pub bbox: Bbox,
}

impl MetricField {
    pub fn new(name: impl Into<String>, a: Expr, b: Expr, c: Expr, bbox: Bbox) -> MetricField {
        let first = [a.diff(0), a.diff(1), b.diff(0), b.diff(1), c.diff(0), c.diff(1)];
        let sec = |e: &Expr| {
            let ex = e.diff(0);
            [ex.diff(0), ex.diff(1), e.diff(1).diff(1)]
        };
        let second = [sec(&a), sec(&b), sec(&c)];
        MetricField { name: name.into(), a, b, c, first, second, bbox }
    }

    pub fn with_bbox(mut self, bbox: Bbox) -> MetricField {
        self.bbox = bbox;
        self
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<Coeffs> {
        let p = [x, y];
        let f = &self.first;
        let out = Coeffs {
            a: self.a.eval(p)?,
            b: self.b.eval(p)?,
            c: self.c.eval(p)?,
            a_x: f[0].eval(p)?,
            a_y: f[1].eval(p)?,
            b_x: f[2].eval(p)?,
            b_y: f[3].eval(p)?,
            c_x: f[4].eval(p)?,
            c_y: f[5].eval(p)?,
        };
        let all = [out.a, out.b, out.c, out.a_x, out.a_y, out.b_x, out.b_y, out.c_x, out.c_y];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GeoError::Domain(format!("non-finite coefficient at ({}, {})", x, y)));
        }
        Ok(out)
    }

    pub fn eval_second(&self, x: f64, y: f64) -> Result<Second> {
        let p = [x, y];
        let mut d = [[0.0; 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                d[i][k] = self.second[i][k].eval(p)?;
            }
        }
        Ok(Second { d })
    }

    pub fn delta(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.eval(x, y)?.delta())
    }

    pub fn spec_text(&self) -> String {
        format!("a={}; b={}; c={}", self.a, self.b, self.c)
    }

    /// Reject points where a, b, c vanish together.
    pub fn check_regular(&self, x: f64, y: f64) -> Result<()> {
        let k = self.eval(x, y)?;
        if k.a.abs().max(k.b.abs()).max(k.c.abs()) < 1e-14 {
            return Err(GeoError::Degenerate(format!("a, b, c all vanish at ({}, {})", x, y)));
        }
        Ok(())
    }
}

/// Parametrized surface (X, Y, Z)(u, v) in Minkowski 3-space dX² + dY² − dZ².
#[derive(Debug, Clone)]
pub struct Embedding {
    pub name: String,
    pub xyz: [Expr; 3],
    pub bbox: Bbox,
}

impl Embedding {
    pub fn new(name: impl Into<String>, x: Expr, y: Expr, z: Expr, bbox: Bbox) -> Embedding {
        Embedding { name: name.into(), xyz: [x, y, z], bbox }
    }

    pub fn point(&self, u: f64, v: f64) -> Result<[f64; 3]> {
        Ok([self.xyz[0].eval([u, v])?, self.xyz[1].eval([u, v])?, self.xyz[2].eval([u, v])?])
    }

    /// Tangent vectors (∂/∂u, ∂/∂v) of the embedding.
    pub fn tangents(&self, u: f64, v: f64) -> Result<([f64; 3], [f64; 3])> {
        let mut tu = [0.0; 3];
        let mut tv = [0.0; 3];
        for i in 0..3 {
            tu[i] = self.xyz[i].diff(0).eval([u, v])?;
            tv[i] = self.xyz[i].diff(1).eval([u, v])?;
        }
        Ok((tu, tv))
    }

    pub fn is_immersion_at(&self, u: f64, v: f64) -> Result<bool> {
        let (tu, tv) = self.tangents(u, v)?;
        let n = cross(tu, tv);
        let scale = norm(tu) * norm(tv);
        Ok(norm(n) > 1e-10 * scale.max(1e-300) && scale > 0.0)
    }

    pub fn spec_text(&self) -> String {
        let n = ["u", "v"];
        format!("X={}; Y={}; Z={}", self.xyz[0].render(n), self.xyz[1].render(n), self.xyz[2].render(n))
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Pull back dX² + dY² − dZ². Variables u, v become x, y of the metric.
pub fn induced_metric(e: &Embedding) -> MetricField {
    let du: Vec<Expr> = e.xyz.iter().map(|f| f.diff(0)).collect();
    let dv: Vec<Expr> = e.xyz.iter().map(|f| f.diff(1)).collect();
    let form = |p: &[Expr], q: &[Expr]| {
        Expr::sub(
            Expr::add(Expr::mul(p[0].clone(), q[0].clone()), Expr::mul(p[1].clone(), q[1].clone())),
            Expr::mul(p[2].clone(), q[2].clone()),
        )
    };
    MetricField::new(e.name.clone(), form(&du, &du), form(&du, &dv), form(&dv, &dv), e.bbox)
}

/// Gaussian curvature of the embedding for the Euclidean ambient metric.
pub fn euclidean_gauss_curvature(e: &Embedding, u: f64, v: f64) -> Result<f64> {
    if !e.is_immersion_at(u, v)? {
        return Err(GeoError::Degenerate(format!("not an immersion at ({}, {})", u, v)));
    }
    let (tu, tv) = e.tangents(u, v)?;
    let mut tuu = [0.0; 3];
    let mut tuv = [0.0; 3];
    let mut tvv = [0.0; 3];
    for i in 0..3 {
        let fu = e.xyz[i].diff(0);
        tuu[i] = fu.diff(0).eval([u, v])?;
        tuv[i] = fu.diff(1).eval([u, v])?;
        tvv[i] = e.xyz[i].diff(1).diff(1).eval([u, v])?;
    }
    let n = cross(tu, tv);
    let nn = norm(n);
    let n = [n[0] / nn, n[1] / nn, n[2] / nn];
    let (ee, ff, gg) = (dot(tu, tu), dot(tu, tv), dot(tv, tv));
    let (l, m, nq) = (dot(tuu, n), dot(tuv, n), dot(tvv, n));
    Ok((l * nq - m * m) / (ee * gg - ff * ff))
}

/// Either form the metric-spec text can take.
#[derive(Debug, Clone)]
pub enum Spec {
    Metric(MetricField),
    Embedding(Embedding),
}

impl Spec {
    pub fn into_metric(self) -> MetricField {
        match self {
            Spec::Metric(m) => m,
            Spec::Embedding(e) => induced_metric(&e),
        }
    }
}

/// Parse `a=..; b=..; c=..` (variables x, y) or `X=..; Y=..; Z=..` (variables u, v).
pub fn parse_spec(text: &str) -> Result<Spec> {
    let mut found: Vec<(String, Expr)> = Vec::new();
    let mut offset = 0usize;
    for piece in text.split(|c| c == ';' || c == '\n') {
        let len = piece.chars().count();
        let trimmed = piece.trim();
        if !trimmed.is_empty() {
            let eq = piece
                .find('=')
                .ok_or_else(|| GeoError::Parse { pos: offset, msg: "expected 'name=expr'".into() })?;
            let key = piece[..eq].trim().to_string();
            let key_pos = offset + piece[..eq].chars().count();
            let vars = match key.as_str() {
                "a" | "b" | "c" => ["x", "y"],
                "X" | "Y" | "Z" => ["u", "v"],
                _ => return Err(GeoError::UnknownIdent { pos: key_pos - key.chars().count(), name: key }),
            };
            if found.iter().any(|(k, _)| *k == key) {
                return Err(GeoError::Parse { pos: offset, msg: format!("duplicate key '{}'", key) });
            }
            let rhs = &piece[eq + 1..];
            let rhs_pos = offset + piece[..eq + 1].chars().count();
            found.push((key, parse_expr_in(rhs, vars, rhs_pos)?));
        }
        offset += len + 1;
    }
    let get = |k: &str| found.iter().find(|(n, _)| n == k).map(|(_, e)| e.clone());
    let end = text.chars().count();
    if found.iter().any(|(k, _)| k == "a" || k == "b" || k == "c") {
        if found.iter().any(|(k, _)| k == "X" || k == "Y" || k == "Z") {
            return Err(GeoError::Parse { pos: 0, msg: "mixes metric and embedding keys".into() });
        }
        let missing = ["a", "b", "c"].iter().find(|k| get(k).is_none());
        if let Some(k) = missing {
            return Err(GeoError::Parse { pos: end, msg: format!("missing '{}'", k) });
        }
        Ok(Spec::Metric(MetricField::new("inline", get("a").unwrap(), get("b").unwrap(), get("c").unwrap(), Bbox::default())))
    } else if !found.is_empty() {
        let missing = ["X", "Y", "Z"].iter().find(|k| get(k).is_none());
        if let Some(k) = missing {
            return Err(GeoError::Parse { pos: end, msg: format!("missing '{}'", k) });
        }
        Ok(Spec::Embedding(Embedding::new("inline", get("X").unwrap(), get("Y").unwrap(), get("Z").unwrap(), Bbox::default())))
    } else {
        Err(GeoError::Parse { pos: 0, msg: "empty metric spec".into() })
    }
}

/// Parse a metric spec; embeddings are pulled back.
pub fn parse_metric(text: &str) -> Result<MetricField> {
    Ok(parse_spec(text)?.into_metric())
}
