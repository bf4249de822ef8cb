//! Extrapolation machinery for deciding "limit > 0" from finitely many
//! modulus values: Aitken acceleration plus least-squares model fits
//! (plateau with 1/x correction, power decay, logarithmic decay, geometric
//! decay), each scored by relative RMS residual.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    /// a(x) = a_inf + b / x
    Plateau,
    /// a(x) = c * x^(-beta), beta > 0
    PowerDecay,
    /// 1/a(x) = b + s ln x, s > 0
    LogDecay,
    /// a(x) = c * q^x, q < 1
    GeometricDecay,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::Plateau => "plateau",
            ModelKind::PowerDecay => "power-decay",
            ModelKind::LogDecay => "log-decay",
            ModelKind::GeometricDecay => "geometric-decay",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelFit {
    pub model: ModelKind,
    /// Extrapolated limit under this model (0 for the decay models).
    pub limit: f64,
    /// Relative RMS residual over the samples.
    pub residual: f64,
    /// Model parameters, in model-specific order.
    pub params: Vec<f64>,
}

/// Least squares y ~ b0 + b1 x. Returns (b0, b1).
fn linreg(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-30 {
        return (sy / n, 0.0);
    }
    let b1 = (n * sxy - sx * sy) / det;
    let b0 = (sy - b1 * sx) / n;
    (b0, b1)
}

fn rel_residual(samples: &[(f64, f64)], fitted: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for &(x, a) in samples {
        let denom = a.abs().max(1e-300);
        let d = (a - fitted(x)) / denom;
        acc += d * d;
    }
    (acc / samples.len() as f64).sqrt()
}

/// Aitken delta-squared applied to the last triple of values.
pub fn aitken(values: &[f64]) -> Option<f64> {
    if values.len() < 3 {
        return None;
    }
    let n = values.len();
    let (a0, a1, a2) = (values[n - 3], values[n - 2], values[n - 1]);
    let denom = a2 - 2.0 * a1 + a0;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some(a2 - (a2 - a1).powi(2) / denom)
}

/// Fits all models to the (x, a) samples and returns them sorted by
/// residual; invalid fits (wrong decay sign, nonpositive data for log fits)
/// are skipped.
pub fn fit_models(samples: &[(f64, f64)]) -> Vec<ModelFit> {
    let mut fits = Vec::new();
    if samples.len() < 3 {
        return fits;
    }
    let all_positive = samples.iter().all(|&(x, a)| a > 0.0 && x > 0.0);
    let a_last = samples.last().unwrap().1;

    // plateau: a = a_inf + b / x
    {
        let xs: Vec<f64> = samples.iter().map(|&(x, _)| 1.0 / x).collect();
        let ys: Vec<f64> = samples.iter().map(|&(_, a)| a).collect();
        let (a_inf, b) = linreg(&xs, &ys);
        let resid = rel_residual(samples, |x| a_inf + b / x);
        // a plateau extrapolating far below the data is really a decay in
        // disguise; require the asymptote to stay near the last sample
        if a_inf.is_finite() && a_inf >= 0.3 * a_last {
            fits.push(ModelFit {
                model: ModelKind::Plateau,
                limit: a_inf.max(0.0),
                residual: resid,
                params: vec![a_inf, b],
            });
        }
    }

    if all_positive {
        // power decay: ln a = ln c - beta ln x
        {
            let xs: Vec<f64> = samples.iter().map(|&(x, _)| x.ln()).collect();
            let ys: Vec<f64> = samples.iter().map(|&(_, a)| a.ln()).collect();
            let (lnc, slope) = linreg(&xs, &ys);
            let beta = -slope;
            if beta > 0.05 {
                let c = lnc.exp();
                let resid = rel_residual(samples, |x| c * x.powf(-beta));
                fits.push(ModelFit {
                    model: ModelKind::PowerDecay,
                    limit: 0.0,
                    residual: resid,
                    params: vec![c, beta],
                });
            }
        }
        // log decay: 1/a = b + s ln x
        {
            let xs: Vec<f64> = samples.iter().map(|&(x, _)| x.ln()).collect();
            let ys: Vec<f64> = samples.iter().map(|&(_, a)| 1.0 / a).collect();
            let (b, s) = linreg(&xs, &ys);
            if s > 0.0 {
                let resid = rel_residual(samples, |x| {
                    let d = b + s * x.ln();
                    if d > 0.0 {
                        1.0 / d
                    } else {
                        f64::INFINITY
                    }
                });
                fits.push(ModelFit {
                    model: ModelKind::LogDecay,
                    limit: 0.0,
                    residual: resid,
                    params: vec![b, s],
                });
            }
        }
        // geometric decay: ln a = ln c + x ln q
        {
            let xs: Vec<f64> = samples.iter().map(|&(x, _)| x).collect();
            let ys: Vec<f64> = samples.iter().map(|&(_, a)| a.ln()).collect();
            let (lnc, lnq) = linreg(&xs, &ys);
            if lnq < -0.05 {
                let c = lnc.exp();
                let resid = rel_residual(samples, |x| c * (lnq * x).exp());
                fits.push(ModelFit {
                    model: ModelKind::GeometricDecay,
                    limit: 0.0,
                    residual: resid,
                    params: vec![c, lnq.exp()],
                });
            }
        }
    }

    fits.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    fits
}
