//! Dormand–Prince 5(4) with PI step control and continuous output.

use crate::error::Result;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Result of one trial step.
pub struct Trial<const N: usize> {
    pub y1: [f64; N],
    /// derivative at the new point (first stage of the next step)
    pub k7: [f64; N],
    pub err: f64,
    dense: [[f64; N]; 5],
}

impl<const N: usize> Trial<N> {
    /// State at fraction θ ∈ [0, 1] of the step.
    pub fn at(&self, theta: f64) -> [f64; N] {
        let t1 = 1.0 - theta;
        let r = &self.dense;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = r[0][i] + theta * (r[1][i] + t1 * (r[2][i] + theta * (r[3][i] + t1 * r[4][i])));
        }
        out
    }
}

fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

/// One Dormand–Prince trial step of size h from (t, y) with y' = k1 known.
pub fn trial<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64, rtol: f64, atol: f64) -> Result<Trial<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k2 = f(t + C2 * h, &comb(y, h, &[(A21, k1)]))?;
    let k3 = f(t + C3 * h, &comb(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(t + C4 * h, &comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(t + C5 * h, &comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(t + h, &comb(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y1 = comb(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y1)?;
    let mut err = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = atol + rtol * y[i].abs().max(y1[i].abs());
        err += (e / sc).powi(2);
    }
    let err = (err / N as f64).sqrt();
    let mut dense = [[0.0; N]; 5];
    for i in 0..N {
        let ydiff = y1[i] - y[i];
        let bspl = h * k1[i] - ydiff;
        dense[0][i] = y[i];
        dense[1][i] = ydiff;
        dense[2][i] = bspl;
        dense[3][i] = ydiff - h * k7[i] - bspl;
        dense[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    if !err.is_finite() || y1.iter().any(|v| !v.is_finite()) {
        return Ok(Trial { y1, k7, err: f64::INFINITY, dense });
    }
    Ok(Trial { y1, k7, err, dense })
}

/// PI step-size controller.
#[derive(Debug, Clone)]
pub struct Controller {
    prev_err: f64,
}

impl Default for Controller {
    fn default() -> Self {
        Controller { prev_err: 1e-4 }
    }
}

impl Controller {
    const ALPHA: f64 = 0.7 / 5.0;
    const BETA: f64 = 0.4 / 5.0;

    /// Factor for the next step; `accepted` tells whether err ≤ 1.
    pub fn factor(&mut self, err: f64) -> (bool, f64) {
        if !err.is_finite() {
            return (false, 0.2);
        }
        if err <= 1.0 {
            let e = err.max(1e-10);
            let fac = 0.9 * e.powf(-Self::ALPHA) * self.prev_err.powf(Self::BETA);
            self.prev_err = e;
            (true, fac.clamp(0.2, 10.0))
        } else {
            let fac = 0.9 * err.powf(-Self::ALPHA);
            (false, fac.clamp(0.2, 1.0))
        }
    }
}

/// Initial step guess (Hairer's heuristic, simplified).
pub fn initial_step<const N: usize>(y: &[f64; N], k1: &[f64; N], rtol: f64, atol: f64) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = atol + rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (k1[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        (0.01 * d0 / d1).min(1.0)
    }
}
