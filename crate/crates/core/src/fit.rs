//! Asymptotic fits of traces near a degenerate point.

use serde::Serialize;

use crate::error::{GeoError, Result};

/// Oblique frame: pos = origin + ξ e1 + η e2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalFrame {
    pub origin: [f64; 2],
    pub e1: [f64; 2],
    pub e2: [f64; 2],
}

impl LocalFrame {
    pub fn identity(origin: [f64; 2]) -> Self {
        LocalFrame { origin, e1: [1.0, 0.0], e2: [0.0, 1.0] }
    }

    pub fn coords(&self, p: [f64; 2]) -> [f64; 2] {
        let d = [p[0] - self.origin[0], p[1] - self.origin[1]];
        let det = self.e1[0] * self.e2[1] - self.e1[1] * self.e2[0];
        [(d[0] * self.e2[1] - d[1] * self.e2[0]) / det, (self.e1[0] * d[1] - self.e1[1] * d[0]) / det]
    }

    pub fn point(&self, xi: f64, eta: f64) -> [f64; 2] {
        [
            self.origin[0] + xi * self.e1[0] + eta * self.e2[0],
            self.origin[1] + xi * self.e1[1] + eta * self.e2[1],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// ξ = α |η|^e, window on τ = sqrt|η|
    Semicubic,
    /// η = k ξ², window on τ = |ξ|
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub model: Model,
    /// semicubic only
    pub exponent: f64,
    /// α (semicubic, signed) or k (quadratic)
    pub coefficient: f64,
    pub residual: f64,
    pub samples: usize,
}

pub const MIN_SAMPLES: usize = 20;

pub fn fit_points(points: &[[f64; 2]], frame: &LocalFrame, model: Model, window: FitWindow) -> Result<FitResult> {
    if !(window.lo >= 0.0 && window.lo < window.hi) || !window.hi.is_finite() {
        return Err(GeoError::Invalid(format!("degenerate fit window [{}, {}]", window.lo, window.hi)));
    }
    let local: Vec<[f64; 2]> = points.iter().map(|p| frame.coords(*p)).collect();
    match model {
        Model::Semicubic => {
            let sel: Vec<[f64; 2]> = local
                .into_iter()
                .filter(|c| {
                    let tau = c[1].abs().sqrt();
                    tau >= window.lo && tau <= window.hi && c[0] != 0.0
                })
                .collect();
            if sel.len() < MIN_SAMPLES {
                return Err(GeoError::InsufficientSamples { got: sel.len(), need: MIN_SAMPLES });
            }
            let xs: Vec<f64> = sel.iter().map(|c| c[1].abs().ln()).collect();
            let ys: Vec<f64> = sel.iter().map(|c| c[0].abs().ln()).collect();
            let (slope, icept, res) = linfit(&xs, &ys)?;
            let sign = if sel.iter().filter(|c| c[0] > 0.0).count() * 2 >= sel.len() { 1.0 } else { -1.0 };
            Ok(FitResult { model, exponent: slope, coefficient: sign * icept.exp(), residual: res, samples: sel.len() })
        }
        Model::Quadratic => {
            let sel: Vec<[f64; 2]> = local
                .into_iter()
                .filter(|c| {
                    let tau = c[0].abs();
                    tau >= window.lo && tau <= window.hi
                })
                .collect();
            if sel.len() < MIN_SAMPLES {
                return Err(GeoError::InsufficientSamples { got: sel.len(), need: MIN_SAMPLES });
            }
            // weight by 1/ξ⁴ so each sample contributes its relative deviation
            let k = sel.iter().map(|c| c[1] / (c[0] * c[0])).sum::<f64>() / sel.len() as f64;
            let res = (sel.iter().map(|c| (c[1] / (c[0] * c[0]) - k).powi(2)).sum::<f64>() / sel.len() as f64).sqrt();
            Ok(FitResult { model, exponent: 2.0, coefficient: k, residual: res, samples: sel.len() })
        }
    }
}

fn linfit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(GeoError::Invalid("fit window spans no range".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let res = (xs.iter().zip(ys).map(|(x, y)| (y - icept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok((slope, icept, res))
}

pub fn fit_asymptotics(
    curve: &crate::geoflow::GeodesicCurve,
    frame: &LocalFrame,
    model: Model,
    window: FitWindow,
) -> Result<FitResult> {
    fit_points(&curve.points(), frame, model, window)
}
