//! Named example metrics.

use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::expr::{parse_expr, parse_expr_in};
use crate::metric::{induced_metric, Bbox, Embedding, MetricField};

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static str,
    pub definition: &'static str,
    pub notes: &'static str,
}

pub const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "ex1",
        params: "",
        definition: "a=1; b=0; c=-y",
        notes: "S0 = {y=0}; isotropic direction p0 = inf; M = p^2, case C2 (double root p1 = 0); isotropic family x = alpha*|y|^(3/2)",
    },
    CatalogEntry {
        name: "ex1exp",
        params: "",
        definition: "a=exp(y); b=0; c=-y",
        notes: "S0 = {y=0}; M = 1 + p^2 at the origin, case C1",
    },
    CatalogEntry {
        name: "c1c3",
        params: "y1 (default 0.5)",
        definition: "a=1+(y-y1)^2; b=0; c=-y",
        notes: "case C1 at the origin for y1 < 0, C3 for y1 > 0 (roots p = +-sqrt(2*y1) and inf)",
    },
    CatalogEntry {
        name: "dd",
        params: "eps (default -1)",
        definition: "a=eps*x^2-y; b=0; c=1",
        notes: "S0 = {y = eps*x^2}; case D at the origin: eps < 0 saddle (D_s), 0 < eps < 1/16 node (D_n), eps > 1/16 focus (D_f)",
    },
    CatalogEntry {
        name: "clairaut",
        params: "",
        definition: "a=-y; b=0; c=1",
        notes: "first integral alpha = (y - p^2)/y^2; geodesics p^2 = y - alpha*y^2; boundary case eps = 0 of dd",
    },
    CatalogEntry {
        name: "mink-sphere",
        params: "",
        definition: "X=sin(u)*cos(v); Y=sin(u)*sin(v); Z=cos(u)",
        notes: "unit sphere in dX^2 + dY^2 - dZ^2; x = theta, y = phi; degenerate on theta = pi/4, 3pi/4 (Z = +-1/sqrt 2); S0 points are C1",
    },
];

fn metric(name: String, a: &str, b: &str, c: &str, bbox: Bbox) -> MetricField {
    let p = |s: &str| parse_expr(s).expect("catalog expression");
    MetricField::new(name, p(a), p(b), p(c), bbox)
}

pub fn ex1() -> MetricField {
    metric("ex1".into(), "1", "0", "-y", Bbox { xmin: -1.0, xmax: 1.0, ymin: -0.5, ymax: 0.5 })
}

pub fn ex1exp() -> MetricField {
    metric("ex1exp".into(), "exp(y)", "0", "-y", Bbox { xmin: -1.0, xmax: 1.0, ymin: -0.5, ymax: 0.5 })
}

pub fn c1c3(y1: f64) -> MetricField {
    let a = format!("1 + (y - ({}))^2", y1);
    metric(format!("c1c3({})", y1), &a, "0", "-y", Bbox { xmin: -1.0, xmax: 1.0, ymin: -0.5, ymax: 0.5 })
}

pub fn dd(eps: f64) -> MetricField {
    let a = format!("({})*x^2 - y", eps);
    metric(format!("dd({})", eps), &a, "0", "1", Bbox { xmin: -1.0, xmax: 1.0, ymin: -1.0, ymax: 1.0 })
}

pub fn clairaut() -> MetricField {
    metric("clairaut".into(), "-y", "0", "1", Bbox { xmin: -2.0, xmax: 2.0, ymin: -1.0, ymax: 1.5 })
}

pub fn sphere_embedding() -> Embedding {
    let p = |s: &str| parse_expr_in(s, ["u", "v"], 0).expect("catalog expression");
    let pi = std::f64::consts::PI;
    Embedding::new(
        "mink-sphere",
        p("sin(u)*cos(v)"),
        p("sin(u)*sin(v)"),
        p("cos(u)"),
        Bbox { xmin: 0.2, xmax: pi - 0.2, ymin: -pi, ymax: pi },
    )
}

pub fn mink_sphere() -> MetricField {
    induced_metric(&sphere_embedding())
}

/// Metrics used by suites that sweep "every catalog metric".
pub fn all_default() -> Vec<MetricField> {
    vec![ex1(), ex1exp(), c1c3(0.5), c1c3(-0.5), dd(-1.0), dd(1.0 / 32.0), dd(1.0 / 8.0), clairaut(), mink_sphere()]
}

/// Resolve `name` or `name(param)`; `param` overrides the default when given.
pub fn lookup(spec: &str, param: Option<f64>) -> Result<MetricField> {
    let spec = spec.trim();
    let (name, inline) = match spec.find('(') {
        Some(i) => {
            let close = spec
                .rfind(')')
                .filter(|&j| j > i)
                .ok_or_else(|| GeoError::Parse { pos: spec.len(), msg: "expected ')'".into() })?;
            let inner = spec[i + 1..close].trim();
            let v = parse_expr(inner)
                .and_then(|e| e.eval([0.0, 0.0]))
                .map_err(|_| GeoError::Invalid(format!("bad catalog parameter '{}'", inner)))?;
            (spec[..i].trim(), Some(v))
        }
        None => (spec, None),
    };
    let param = param.or(inline);
    match name {
        "ex1" => Ok(ex1()),
        "ex1exp" => Ok(ex1exp()),
        "c1c3" => Ok(c1c3(param.unwrap_or(0.5))),
        "dd" => Ok(dd(param.unwrap_or(-1.0))),
        "clairaut" => Ok(clairaut()),
        "mink-sphere" => Ok(mink_sphere()),
        _ => Err(GeoError::Invalid(format!("unknown catalog metric '{}'", name))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_forms() {
        assert_eq!(lookup("dd(1/8)", None).unwrap().name, "dd(0.125)");
        assert_eq!(lookup("dd", Some(-1.0)).unwrap().name, "dd(-1)");
        let m = lookup("c1c3(-0.5)", None).unwrap();
        assert!((m.eval(0.0, 0.0).unwrap().a - 1.25).abs() < 1e-15);
        assert!(lookup("nope", None).is_err());
        assert!(lookup("dd(1/8", None).is_err());
    }

    #[test]
    fn dd_delta() {
        let m = dd(-1.0);
        let k = m.eval(0.5, 0.2).unwrap();
        assert!((k.delta() - (-0.25 - 0.2)).abs() < 1e-15);
    }

    #[test]
    fn entries_cover_lookup() {
        for e in ENTRIES {
            assert!(lookup(e.name, None).is_ok(), "{}", e.name);
        }
    }
}
