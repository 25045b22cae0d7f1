//! Penalized least-squares fitting of additive spline models and GCV
//! smoothing-parameter selection.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::basis::{BasisSpec, SmootherBasis, SplineError};

/// Version tag written into serialized fits.
pub const GAM_FIT_FORMAT_VERSION: u32 = 1;

/// Fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitStats {
    pub n: usize,
    pub rss: f64,
    /// Effective degrees of freedom of the smoothers, excluding the intercept.
    pub edf: f64,
    /// Trace of the influence matrix, including the intercept column.
    pub edf_total: f64,
    pub edf_per_smoother: Vec<f64>,
    pub residual_variance: f64,
    pub r2: f64,
    pub adjusted_r2: f64,
}

/// A fitted additive model. Serializes to a versioned JSON document so the
/// forecaster and CLI can reuse fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamFit {
    pub version: u32,
    pub intercept: f64,
    /// One coefficient block per smoother, in spec order.
    pub blocks: Vec<Vec<f64>>,
    pub lambdas: Vec<f64>,
    pub bases: Vec<SmootherBasis>,
    /// Start column of each block in the full design (intercept is column 0).
    pub col_offsets: Vec<usize>,
    pub stats: FitStats,
    /// Set when the GCV surface was degenerate and the grid fallback was used.
    pub gcv_warning: bool,
}

/// GCV search configuration: a log grid per smoother refined by coordinate
/// descent with golden-section line searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GcvOptions {
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    pub sweeps: usize,
}

impl Default for GcvOptions {
    fn default() -> Self {
        GcvOptions { grid_min: 1e-4, grid_max: 1e8, grid_points: 25, sweeps: 3 }
    }
}

/// Design and cross-products assembled once per dataset so repeated lambda
/// evaluations stay cheap.
struct Assembled {
    bases: Vec<SmootherBasis>,
    col_offsets: Vec<usize>,
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    yty: f64,
    y_mean: f64,
    n: usize,
    p: usize,
}

struct InnerFit {
    beta: DVector<f64>,
    edf_cols: Vec<f64>,
    rss: f64,
}

impl Assembled {
    fn build(
        hours: &[f64],
        days: &[f64],
        y: &[f64],
        specs: &[BasisSpec],
    ) -> Result<Self, SplineError> {
        if hours.len() != days.len() || hours.len() != y.len() {
            return Err(SplineError::LengthMismatch);
        }
        for (i, v) in y.iter().enumerate() {
            if !v.is_finite() {
                return Err(SplineError::NonFiniteResponse(i));
            }
        }
        let n = y.len();
        let mut bases = Vec::with_capacity(specs.len());
        let mut blocks = Vec::with_capacity(specs.len());
        let mut col_offsets = Vec::with_capacity(specs.len());
        let mut p = 1usize;
        for spec in specs {
            let (basis, design) = SmootherBasis::build(*spec, hours, days)?;
            col_offsets.push(p);
            p += basis.dim();
            bases.push(basis);
            blocks.push(design);
        }
        let mut x = DMatrix::<f64>::zeros(n, p);
        for i in 0..n {
            x[(i, 0)] = 1.0;
        }
        for (b, design) in blocks.iter().enumerate() {
            x.view_mut((0, col_offsets[b]), (n, design.ncols())).copy_from(design);
        }
        let xtx = x.transpose() * &x;
        let yv = DVector::from_column_slice(y);
        let xty = x.transpose() * &yv;
        let yty = yv.dot(&yv);
        let y_mean = yv.mean();
        Ok(Assembled { bases, col_offsets, xtx, xty, yty, y_mean, n, p })
    }

    /// Penalized normal matrix for the given lambdas.
    fn penalized_matrix(&self, lambdas: &[f64]) -> DMatrix<f64> {
        let mut a = self.xtx.clone();
        for (b, basis) in self.bases.iter().enumerate() {
            let s = basis.penalty();
            let off = self.col_offsets[b];
            let lam = lambdas[b];
            if lam != 0.0 {
                for i in 0..s.nrows() {
                    for j in 0..s.ncols() {
                        a[(off + i, off + j)] += lam * s[(i, j)];
                    }
                }
            }
        }
        a
    }

    fn solve(&self, lambdas: &[f64]) -> Result<InnerFit, SplineError> {
        let a = self.penalized_matrix(lambdas);
        let chol = match Cholesky::new(a.clone()) {
            Some(c) => c,
            None => {
                // Near-singular normal matrix: retry with a small ridge.
                let ridge = 1e-10 * a.trace() / self.p as f64;
                let mut a2 = a;
                for i in 0..self.p {
                    a2[(i, i)] += ridge;
                }
                Cholesky::new(a2).ok_or(SplineError::RankDeficient)?
            }
        };
        let beta = chol.solve(&self.xty);
        let influence = chol.solve(&self.xtx);
        let edf_cols: Vec<f64> = (0..self.p).map(|c| influence[(c, c)]).collect();
        let rss = (self.yty - 2.0 * beta.dot(&self.xty)
            + (beta.transpose() * &self.xtx * &beta)[(0, 0)])
            .max(0.0);
        Ok(InnerFit { beta, edf_cols, rss })
    }

    fn gcv_score(&self, inner: &InnerFit) -> f64 {
        let trace: f64 = inner.edf_cols.iter().sum();
        let denom = self.n as f64 - trace;
        if denom <= 1e-9 {
            return f64::INFINITY;
        }
        self.n as f64 * inner.rss / (denom * denom)
    }

    fn into_fit(self, lambdas: Vec<f64>, inner: InnerFit, gcv_warning: bool) -> GamFit {
        let trace: f64 = inner.edf_cols.iter().sum();
        let mut edf_per_smoother = Vec::with_capacity(self.bases.len());
        let mut blocks = Vec::with_capacity(self.bases.len());
        for (b, basis) in self.bases.iter().enumerate() {
            let off = self.col_offsets[b];
            let dim = basis.dim();
            edf_per_smoother.push(inner.edf_cols[off..off + dim].iter().sum());
            blocks.push(inner.beta.as_slice()[off..off + dim].to_vec());
        }
        let n = self.n as f64;
        let tss: f64 = self.yty - n * self.y_mean * self.y_mean;
        let r2 = if tss <= 1e-300 {
            if inner.rss <= 1e-300 { 1.0 } else { 0.0 }
        } else {
            1.0 - inner.rss / tss
        };
        let adjusted_r2 = if n - trace > 0.0 {
            1.0 - (1.0 - r2) * (n - 1.0) / (n - trace)
        } else {
            f64::NEG_INFINITY
        };
        let residual_variance =
            if n - trace > 0.0 { inner.rss / (n - trace) } else { f64::NAN };
        GamFit {
            version: GAM_FIT_FORMAT_VERSION,
            intercept: inner.beta[0],
            blocks,
            lambdas,
            bases: self.bases,
            col_offsets: self.col_offsets,
            stats: FitStats {
                n: self.n,
                rss: inner.rss,
                edf: trace - 1.0,
                edf_total: trace,
                edf_per_smoother,
                residual_variance,
                r2,
                adjusted_r2,
            },
            gcv_warning,
        }
    }
}

/// Fits the additive model by penalized least squares at fixed lambdas:
/// minimizes ||y - X beta||^2 + sum_j lambda_j beta_j' S_j beta_j.
pub fn fit_penalized_ls(
    hours: &[f64],
    days: &[f64],
    y: &[f64],
    specs: &[BasisSpec],
    lambdas: &[f64],
) -> Result<GamFit, SplineError> {
    assert_eq!(specs.len(), lambdas.len(), "one lambda per smoother");
    for &l in lambdas {
        assert!(l >= 0.0, "lambdas must be nonnegative");
    }
    let assembled = Assembled::build(hours, days, y, specs)?;
    let inner = assembled.solve(lambdas)?;
    Ok(assembled.into_fit(lambdas.to_vec(), inner, false))
}

/// Selects smoothing parameters by minimizing the GCV score
/// n * RSS / (n - tr(A))^2 with per-smoother log-grid coordinate descent and
/// golden-section refinement, then returns the fit at the selected lambdas.
pub fn select_lambda_gcv(
    hours: &[f64],
    days: &[f64],
    y: &[f64],
    specs: &[BasisSpec],
    opts: &GcvOptions,
) -> Result<GamFit, SplineError> {
    let assembled = Assembled::build(hours, days, y, specs)?;
    let j = specs.len();
    if j == 0 {
        let inner = assembled.solve(&[])?;
        return Ok(assembled.into_fit(vec![], inner, false));
    }
    let log_min = opts.grid_min.ln();
    let log_max = opts.grid_max.ln();
    let grid: Vec<f64> = (0..opts.grid_points)
        .map(|i| {
            (log_min + (log_max - log_min) * i as f64 / (opts.grid_points - 1) as f64).exp()
        })
        .collect();

    let mut lambdas = vec![1.0; j];
    let mut seen_min = f64::INFINITY;
    let mut seen_max = f64::NEG_INFINITY;
    let eval = |lams: &[f64],
                    seen: &mut (f64, f64)|
     -> Result<f64, SplineError> {
        let inner = assembled.solve(lams)?;
        let score = assembled.gcv_score(&inner);
        if score.is_finite() {
            seen.0 = seen.0.min(score);
            seen.1 = seen.1.max(score);
        }
        Ok(score)
    };
    let mut seen = (seen_min, seen_max);
    for _ in 0..opts.sweeps {
        for coord in 0..j {
            let mut best = (f64::INFINITY, lambdas[coord]);
            for &g in &grid {
                let mut trial = lambdas.clone();
                trial[coord] = g;
                let score = eval(&trial, &mut seen)?;
                // Ties resolve toward the smoother (larger lambda) candidate.
                if score < best.0 - 1e-15 * best.0.abs().max(1.0) || !best.0.is_finite() {
                    best = (score, g);
                }
            }
            lambdas[coord] = best.1;
        }
    }
    // Golden-section refinement per coordinate in log space.
    let step = (log_max - log_min) / (opts.grid_points - 1) as f64;
    for coord in 0..j {
        let center = lambdas[coord].ln();
        let mut lo = (center - step).max(log_min);
        let mut hi = (center + step).min(log_max);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut a = hi - phi * (hi - lo);
        let mut b = lo + phi * (hi - lo);
        let score_at = |lam_log: f64, lams: &[f64], coord: usize, seen: &mut (f64, f64)| {
            let mut trial = lams.to_vec();
            trial[coord] = lam_log.exp();
            let inner = assembled.solve(&trial)?;
            let s = assembled.gcv_score(&inner);
            if s.is_finite() {
                seen.0 = seen.0.min(s);
                seen.1 = seen.1.max(s);
            }
            Ok::<f64, SplineError>(s)
        };
        let mut fa = score_at(a, &lambdas, coord, &mut seen)?;
        let mut fb = score_at(b, &lambdas, coord, &mut seen)?;
        while hi - lo > 1e-2 {
            if fa <= fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - phi * (hi - lo);
                fa = score_at(a, &lambdas, coord, &mut seen)?;
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + phi * (hi - lo);
                fb = score_at(b, &lambdas, coord, &mut seen)?;
            }
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = score_at(mid, &lambdas, coord, &mut seen)?;
        let f_cur = eval(&lambdas, &mut seen)?;
        if f_mid < f_cur {
            lambdas[coord] = mid.exp();
        }
    }
    seen_min = seen.0;
    seen_max = seen.1;
    // Degenerate surface: fall back to the smoothest grid point and flag it.
    let flat = !seen_min.is_finite()
        || (seen_max - seen_min) <= 1e-12 * seen_min.abs().max(1.0);
    if flat {
        lambdas = vec![opts.grid_max; j];
    }
    let inner = assembled.solve(&lambdas)?;
    Ok(assembled.into_fit(lambdas, inner, flat))
}

/// Evaluates the fitted model at new covariates.
pub fn predict(fit: &GamFit, hours: &[f64], days: &[f64]) -> Result<Vec<f64>, SplineError> {
    if hours.len() != days.len() {
        return Err(SplineError::LengthMismatch);
    }
    let mut out = vec![fit.intercept; hours.len()];
    for (b, basis) in fit.bases.iter().enumerate() {
        let design = basis.design(hours, days)?;
        let beta = DVector::from_column_slice(&fit.blocks[b]);
        let contrib = design * beta;
        for (o, c) in out.iter_mut().zip(contrib.iter()) {
            *o += c;
        }
    }
    Ok(out)
}

/// Adjusted R-squared: 1 - (1 - R2)(n - 1)/(n - edf - 1), with edf counting
/// the smoothers' effective degrees of freedom (intercept excluded).
pub fn adjusted_r2(fit: &GamFit) -> Result<f64, SplineError> {
    let n = fit.stats.n as f64;
    let edf = fit.stats.edf;
    if n <= edf + 1.0 {
        return Err(SplineError::DegenerateDof { n: fit.stats.n, edf_plus_one: edf + 1.0 });
    }
    Ok(1.0 - (1.0 - fit.stats.r2) * (n - 1.0) / (n - edf - 1.0))
}
