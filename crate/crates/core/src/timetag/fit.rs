//! Weighted least-squares fit of `b + c·exp(−((τ−τ₀)/w)²)` to counted rates.

use super::{RateEstimate, TimetagError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub baseline: f64,
    /// Signed feature height: negative for a dip, positive for a peak.
    pub amplitude: f64,
    pub center: f64,
    /// 1/e half-width in the same unit as the abscissa.
    pub width: f64,
    /// Parameter standard errors, in the order above.
    pub sigmas: [f64; 4],
    pub chi2: f64,
    pub dof: usize,
    /// Feature depth relative to the baseline, `|c|/b`.
    pub visibility: f64,
    pub visibility_sigma: f64,
}

struct Model<'a> {
    x: &'a [f64],
    counts: &'a [f64],
    duration: &'a [f64],
}

impl Model<'_> {
    fn shape(x: f64, center: f64, width: f64) -> f64 {
        let u = (x - center) / width;
        (-u * u).exp()
    }

    /// Best linear (b, c) for a fixed shape and the resulting chi-square.
    /// `weights_from` supplies the model whose prediction sets the
    /// Poisson variance of each point (data itself when `None`).
    fn solve_linear(
        &self,
        center: f64,
        width: f64,
        weights_from: Option<&dyn Fn(f64) -> f64>,
    ) -> Option<(f64, f64, f64)> {
        let (mut s00, mut s01, mut s11, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut terms = Vec::with_capacity(self.x.len());
        for i in 0..self.x.len() {
            let t = self.duration[i];
            let y = self.counts[i] / t;
            let expected_counts = match weights_from {
                Some(f) => f(self.x[i]) * t,
                None => self.counts[i],
            };
            let var = expected_counts.max(1.0) / (t * t);
            let w = 1.0 / var;
            let g = Self::shape(self.x[i], center, width);
            s00 += w;
            s01 += w * g;
            s11 += w * g * g;
            r0 += w * y;
            r1 += w * g * y;
            terms.push((w, g, y));
        }
        let det = s00 * s11 - s01 * s01;
        if det.abs() < f64::MIN_POSITIVE || !det.is_finite() {
            return None;
        }
        let b = (s11 * r0 - s01 * r1) / det;
        let c = (s00 * r1 - s01 * r0) / det;
        let chi2 = terms
            .iter()
            .map(|(w, g, y)| w * (y - b - c * g).powi(2))
            .sum();
        Some((b, c, chi2))
    }
}

fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: [f64; 2]) -> [f64; 2] {
    let mut simplex = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut values = simplex.map(&f);
    for _ in 0..500 {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        if (values[2] - values[0]).abs() <= 1e-12 * (1.0 + values[0].abs()) {
            break;
        }
        let centroid = [
            (simplex[0][0] + simplex[1][0]) / 2.0,
            (simplex[0][1] + simplex[1][1]) / 2.0,
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = along(0.5);
            let fc = f(contracted);
            if fc < values[2] {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        (simplex[0][0] + simplex[i][0]) / 2.0,
                        (simplex[0][1] + simplex[i][1]) / 2.0,
                    ];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    simplex[0]
}

/// Inverse of a small symmetric positive-definite matrix by Gauss-Jordan.
fn invert4(mut a: [[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for k in 0..4 {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for r in 0..4 {
            if r != col {
                let factor = a[r][col];
                for k in 0..4 {
                    a[r][k] -= factor * a[col][k];
                    inv[r][k] -= factor * inv[col][k];
                }
            }
        }
    }
    Some(inv)
}

/// Fit a Gaussian dip or peak on a constant baseline.
///
/// Each point's variance is the Poisson variance of the counts predicted by
/// a first-pass fit, floored at one count.
pub fn fit_gaussian_feature(points: &[(f64, RateEstimate)]) -> Result<GaussianFit, TimetagError> {
    if points.len() < 5 {
        return Err(TimetagError::FitFailed(format!(
            "need at least 5 points, got {}",
            points.len()
        )));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let counts: Vec<f64> = points.iter().map(|p| p.1.counts as f64).collect();
    let duration: Vec<f64> = points.iter().map(|p| p.1.duration_s).collect();
    let model = Model {
        x: &x,
        counts: &counts,
        duration: &duration,
    };

    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(TimetagError::FitFailed("abscissa has zero span".into()));
    }

    let mut weights: Option<(f64, f64, f64, f64)> = None;
    let mut best = (0.0, 0.0, 0.0, 0.0);
    for _pass in 0..3 {
        let predict = weights.map(|(b, c, m, w)| move |t: f64| b + c * Model::shape(t, m, w));
        let chi2_at = |p: [f64; 2]| -> f64 {
            let width = p[1].exp();
            let r = match &predict {
                Some(f) => model.solve_linear(p[0], width, Some(f)),
                None => model.solve_linear(p[0], width, None),
            };
            r.map_or(f64::INFINITY, |(_, _, chi2)| chi2)
        };

        // Coarse grid over centre and log-width, then simplex refinement.
        let mut start = [lo, span.ln()];
        let mut start_chi2 = f64::INFINITY;
        for i in 0..=40 {
            let center = lo + span * i as f64 / 40.0;
            for j in 0..=30 {
                let lw = (span / 200.0).ln() + (200.0f64).ln() * j as f64 / 30.0;
                let v = chi2_at([center, lw]);
                if v < start_chi2 {
                    start_chi2 = v;
                    start = [center, lw];
                }
            }
        }
        let opt = nelder_mead(chi2_at, start, [span / 80.0, 0.1]);
        let width = opt[1].exp();
        let (b, c, _) = match &predict {
            Some(f) => model.solve_linear(opt[0], width, Some(f)),
            None => model.solve_linear(opt[0], width, None),
        }
        .ok_or_else(|| TimetagError::FitFailed("singular normal equations".into()))?;
        best = (b, c, opt[0], width);
        weights = Some(best);
    }

    let (b, c, center, width) = best;
    let predicted = |t: f64| b + c * Model::shape(t, center, width);
    let mut normal = [[0.0; 4]; 4];
    let mut chi2 = 0.0;
    for i in 0..x.len() {
        let t = duration[i];
        let var = (predicted(x[i]) * t).max(1.0) / (t * t);
        let g = Model::shape(x[i], center, width);
        let u = x[i] - center;
        let jac = [
            1.0,
            g,
            c * g * 2.0 * u / (width * width),
            c * g * 2.0 * u * u / (width * width * width),
        ];
        for r in 0..4 {
            for k in 0..4 {
                normal[r][k] += jac[r] * jac[k] / var;
            }
        }
        chi2 += (counts[i] / t - predicted(x[i])).powi(2) / var;
    }
    let dof = x.len().saturating_sub(4);
    let mut cov = invert4(normal)
        .ok_or_else(|| TimetagError::FitFailed("singular covariance".into()))?;
    let reduced = if dof > 0 { chi2 / dof as f64 } else { 1.0 };
    if reduced > 1.0 {
        for row in cov.iter_mut() {
            for v in row.iter_mut() {
                *v *= reduced;
            }
        }
    }
    let sigmas = [0, 1, 2, 3].map(|i| cov[i][i].max(0.0).sqrt());

    let visibility = c.abs() / b;
    let dv_db = -c.abs() / (b * b);
    let dv_dc = c.signum() / b;
    let var_v = dv_db * dv_db * cov[0][0] + dv_dc * dv_dc * cov[1][1] + 2.0 * dv_db * dv_dc * cov[0][1];

    Ok(GaussianFit {
        baseline: b,
        amplitude: c,
        center,
        width,
        sigmas,
        chi2,
        dof,
        visibility,
        visibility_sigma: var_v.max(0.0).sqrt(),
    })
}
