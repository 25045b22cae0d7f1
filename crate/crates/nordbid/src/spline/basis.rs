//! Spline bases and their roughness penalties.
//!
//! Three smoother kinds are supported: natural cubic regression splines on
//! evenly spaced knots with an integrated-squared-second-derivative penalty,
//! cubic B-splines with a second-order difference penalty (optionally cyclic)
//! and tensor-product interactions of two marginal bases. Each smoother is
//! centered by absorbing a sum-to-zero constraint over the training design,
//! dropping one column per margin.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SplineError {
    #[error("basis dimension k={k} too small (need at least {min})")]
    KTooSmall { k: usize, min: usize },
    #[error("basis dimension k={k} exceeds {unique} unique covariate values")]
    KExceedsUnique { k: usize, unique: usize },
    #[error("covariate value {value} outside domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },
    #[error("cyclic fitting is only supported for P-spline bases")]
    CyclicUnsupported,
    #[error("design is rank deficient even after ridge fallback")]
    RankDeficient,
    #[error("non-finite response value at index {0}")]
    NonFiniteResponse(usize),
    #[error("degenerate fit: n={n} must exceed edf+1={edf_plus_one}")]
    DegenerateDof { n: usize, edf_plus_one: f64 },
    #[error("covariate vectors have mismatched lengths")]
    LengthMismatch,
}

/// Smoother families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    CubicRegression,
    PSpline,
    TensorInteraction,
}

/// Covariate a smoother acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Covariate {
    Hour,
    Day,
    HourDay,
}

impl Covariate {
    /// Inclusive covariate domain.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Covariate::Hour => (0.0, 23.0),
            Covariate::Day => (0.0, 6.0),
            Covariate::HourDay => unreachable!("tensor domain is per margin"),
        }
    }

    fn period(self) -> f64 {
        match self {
            Covariate::Hour => 24.0,
            Covariate::Day => 7.0,
            Covariate::HourDay => unreachable!(),
        }
    }
}

/// Specification of one smoother.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub kind: BasisKind,
    /// Basis dimension (pre-constraint). For tensors this is the hour margin.
    pub k: usize,
    /// Day-margin dimension for tensor smoothers.
    pub k2: Option<usize>,
    pub covariate: Covariate,
    pub cyclic: bool,
}

impl BasisSpec {
    pub fn cubic_regression(covariate: Covariate, k: usize) -> Self {
        BasisSpec { kind: BasisKind::CubicRegression, k, k2: None, covariate, cyclic: false }
    }

    pub fn p_spline(covariate: Covariate, k: usize) -> Self {
        BasisSpec { kind: BasisKind::PSpline, k, k2: None, covariate, cyclic: false }
    }

    pub fn tensor(k_hour: usize, k_day: usize) -> Self {
        BasisSpec {
            kind: BasisKind::TensorInteraction,
            k: k_hour,
            k2: Some(k_day),
            covariate: Covariate::HourDay,
            cyclic: false,
        }
    }
}

/// Internal parameterization of one marginal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum MarginKind {
    /// Natural cubic regression spline: knot locations plus the map from
    /// knot values to interior second derivatives.
    CubicRegression { knots: Vec<f64>, second_deriv_map: DMatrix<f64> },
    /// Cubic B-spline on an evenly spaced extended knot vector.
    PSpline { knots: Vec<f64> },
    /// Cyclic cubic B-spline with uniform spacing over one period.
    CyclicPSpline { spacing: f64, period: f64 },
}

/// One marginal basis with its centering transform and reduced penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginBasis {
    kind: MarginKind,
    covariate: Covariate,
    raw_dim: usize,
    /// Null-space basis of the sum-to-zero constraint; raw_dim x (raw_dim-1).
    centering: DMatrix<f64>,
    /// Penalty in the reduced (centered) parameterization.
    penalty: DMatrix<f64>,
}

impl MarginBasis {
    pub fn raw_dim(&self) -> usize {
        self.raw_dim
    }

    pub fn dim(&self) -> usize {
        self.raw_dim - 1
    }

    pub fn reduced_penalty(&self) -> &DMatrix<f64> {
        &self.penalty
    }

    /// Evaluates the raw (uncentered) basis row at `x`.
    pub fn raw_row(&self, x: f64) -> Result<DVector<f64>, SplineError> {
        let (lo, hi) = self.covariate.domain();
        if !(lo..=hi).contains(&x) {
            return Err(SplineError::OutOfDomain { value: x, lo, hi });
        }
        let mut row = DVector::<f64>::zeros(self.raw_dim);
        match &self.kind {
            MarginKind::CubicRegression { knots, second_deriv_map } => {
                cr_row(knots, second_deriv_map, x, &mut row);
            }
            MarginKind::PSpline { knots } => {
                let (start, vals) = bspline_row(knots, x);
                for (o, v) in vals.iter().enumerate() {
                    row[start + o] = *v;
                }
            }
            MarginKind::CyclicPSpline { spacing, period: _ } => {
                // Shifted copies of the uniform cubic B-spline wrapped onto
                // the period; requires k >= 4 so supports do not self-overlap.
                let k = self.raw_dim as f64;
                let u = x / spacing;
                for j in 0..self.raw_dim {
                    let mut t = (u - j as f64) % k;
                    if t < 0.0 {
                        t += k;
                    }
                    row[j] = uniform_cubic_bspline(t);
                }
            }
        }
        Ok(row)
    }

    /// Centered design block for a covariate vector.
    pub fn design(&self, values: &[f64]) -> Result<DMatrix<f64>, SplineError> {
        let mut raw = DMatrix::<f64>::zeros(values.len(), self.raw_dim);
        for (i, &x) in values.iter().enumerate() {
            let row = self.raw_row(x)?;
            raw.row_mut(i).copy_from(&row.transpose());
        }
        Ok(raw * &self.centering)
    }

    /// Builds a univariate margin from training covariate values.
    fn build(
        kind: BasisKind,
        covariate: Covariate,
        k: usize,
        cyclic: bool,
        training: &[f64],
    ) -> Result<Self, SplineError> {
        let (lo, hi) = covariate.domain();
        let mut unique: Vec<u64> = training.iter().map(|v| v.to_bits()).collect();
        unique.sort_unstable();
        unique.dedup();
        if k > unique.len() {
            return Err(SplineError::KExceedsUnique { k, unique: unique.len() });
        }
        let (margin_kind, raw_penalty) = match (kind, cyclic) {
            (BasisKind::CubicRegression, false) => {
                if k < 3 {
                    return Err(SplineError::KTooSmall { k, min: 3 });
                }
                let knots: Vec<f64> =
                    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
                let (map, penalty) = cr_penalty(&knots);
                (MarginKind::CubicRegression { knots, second_deriv_map: map }, penalty)
            }
            (BasisKind::CubicRegression, true) => return Err(SplineError::CyclicUnsupported),
            (BasisKind::PSpline, false) => {
                if k < 4 {
                    return Err(SplineError::KTooSmall { k, min: 4 });
                }
                let h = (hi - lo) / (k - 3) as f64;
                let knots: Vec<f64> = (0..k + 4).map(|i| lo + (i as f64 - 3.0) * h).collect();
                let penalty = difference_penalty(k);
                (MarginKind::PSpline { knots }, penalty)
            }
            (BasisKind::PSpline, true) => {
                if k < 4 {
                    return Err(SplineError::KTooSmall { k, min: 4 });
                }
                let period = covariate.period();
                let spacing = period / k as f64;
                let penalty = cyclic_difference_penalty(k);
                (MarginKind::CyclicPSpline { spacing, period }, penalty)
            }
            (BasisKind::TensorInteraction, _) => {
                unreachable!("tensor margins are built from their univariate parts")
            }
        };
        let mut margin = MarginBasis {
            kind: margin_kind,
            covariate,
            raw_dim: k,
            centering: DMatrix::identity(k, k),
            penalty: raw_penalty.clone(),
        };
        // Absorb the sum-to-zero constraint over the training design.
        let mut col_sums = DVector::<f64>::zeros(k);
        for &x in training {
            col_sums += margin.raw_row(x)?;
        }
        let z = householder_null_space(&col_sums);
        margin.penalty = z.transpose() * &raw_penalty * &z;
        margin.centering = z;
        Ok(margin)
    }
}

/// A complete smoother: one or two margins plus the block penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmootherBasis {
    pub spec: BasisSpec,
    margins: Vec<MarginBasis>,
    penalty: DMatrix<f64>,
    dim: usize,
}

impl SmootherBasis {
    /// Builds the smoother from training covariates and returns it together
    /// with its centered design block.
    pub fn build(
        spec: BasisSpec,
        hours: &[f64],
        days: &[f64],
    ) -> Result<(Self, DMatrix<f64>), SplineError> {
        if hours.len() != days.len() {
            return Err(SplineError::LengthMismatch);
        }
        match spec.kind {
            BasisKind::CubicRegression | BasisKind::PSpline => {
                let values = match spec.covariate {
                    Covariate::Hour => hours,
                    Covariate::Day => days,
                    Covariate::HourDay => return Err(SplineError::LengthMismatch),
                };
                let margin =
                    MarginBasis::build(spec.kind, spec.covariate, spec.k, spec.cyclic, values)?;
                let design = margin.design(values)?;
                let penalty = margin.penalty.clone();
                let dim = margin.dim();
                Ok((SmootherBasis { spec, margins: vec![margin], penalty, dim }, design))
            }
            BasisKind::TensorInteraction => {
                let k2 = spec.k2.ok_or(SplineError::KTooSmall { k: 0, min: 3 })?;
                let m1 = MarginBasis::build(
                    BasisKind::CubicRegression,
                    Covariate::Hour,
                    spec.k,
                    spec.cyclic,
                    hours,
                )?;
                let m2 = MarginBasis::build(BasisKind::PSpline, Covariate::Day, k2, false, days)?;
                let d1 = m1.dim();
                let d2 = m2.dim();
                let dim = d1 * d2;
                // Additive marginal penalties: S1 (x) I + I (x) S2, one lambda.
                let mut penalty = DMatrix::<f64>::zeros(dim, dim);
                for a in 0..d1 {
                    for a2 in 0..d1 {
                        let s1 = m1.penalty[(a, a2)];
                        if s1 != 0.0 {
                            for b in 0..d2 {
                                penalty[(a * d2 + b, a2 * d2 + b)] += s1;
                            }
                        }
                    }
                }
                for b in 0..d2 {
                    for b2 in 0..d2 {
                        let s2 = m2.penalty[(b, b2)];
                        if s2 != 0.0 {
                            for a in 0..d1 {
                                penalty[(a * d2 + b, a * d2 + b2)] += s2;
                            }
                        }
                    }
                }
                let smoother = SmootherBasis { spec, margins: vec![m1, m2], penalty, dim };
                let design = smoother.design(hours, days)?;
                Ok((smoother, design))
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn penalty(&self) -> &DMatrix<f64> {
        &self.penalty
    }

    pub fn margins(&self) -> &[MarginBasis] {
        &self.margins
    }

    /// Centered design block at arbitrary covariates (used for prediction).
    pub fn design(&self, hours: &[f64], days: &[f64]) -> Result<DMatrix<f64>, SplineError> {
        if hours.len() != days.len() {
            return Err(SplineError::LengthMismatch);
        }
        match self.spec.kind {
            BasisKind::CubicRegression | BasisKind::PSpline => {
                let values = match self.spec.covariate {
                    Covariate::Hour => hours,
                    Covariate::Day => days,
                    Covariate::HourDay => unreachable!(),
                };
                self.margins[0].design(values)
            }
            BasisKind::TensorInteraction => {
                let b1 = self.margins[0].design(hours)?;
                let b2 = self.margins[1].design(days)?;
                let (d1, d2) = (b1.ncols(), b2.ncols());
                let mut out = DMatrix::<f64>::zeros(hours.len(), d1 * d2);
                for i in 0..hours.len() {
                    for a in 0..d1 {
                        let v1 = b1[(i, a)];
                        for b in 0..d2 {
                            out[(i, a * d2 + b)] = v1 * b2[(i, b)];
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Orthonormal basis of the null space of `c^T x = 0` via one Householder
/// reflection; returns a K x (K-1) matrix.
fn householder_null_space(c: &DVector<f64>) -> DMatrix<f64> {
    let k = c.len();
    let norm = c.norm();
    if norm == 0.0 {
        return DMatrix::identity(k, k).columns(1, k - 1).into();
    }
    let mut v = c.clone();
    v[0] += c[0].signum() * norm;
    let vtv = v.dot(&v);
    let mut h = DMatrix::identity(k, k);
    for i in 0..k {
        for j in 0..k {
            h[(i, j)] -= 2.0 * v[i] * v[j] / vtv;
        }
    }
    h.columns(1, k - 1).into()
}

/// Natural-cubic-spline penalty on knot values: S = D^T B^{-1} D, together
/// with the (k-2) x k map from knot values to interior second derivatives.
fn cr_penalty(knots: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = knots.len();
    let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    let mut d = DMatrix::<f64>::zeros(k - 2, k);
    let mut b = DMatrix::<f64>::zeros(k - 2, k - 2);
    for i in 0..k - 2 {
        d[(i, i)] = 1.0 / h[i];
        d[(i, i + 1)] = -1.0 / h[i] - 1.0 / h[i + 1];
        d[(i, i + 2)] = 1.0 / h[i + 1];
        b[(i, i)] = (h[i] + h[i + 1]) / 3.0;
        if i + 1 < k - 2 {
            b[(i, i + 1)] = h[i + 1] / 6.0;
            b[(i + 1, i)] = h[i + 1] / 6.0;
        }
    }
    let b_inv_d = b
        .clone()
        .lu()
        .solve(&d)
        .expect("tridiagonal spline system is nonsingular");
    let penalty = d.transpose() * &b_inv_d;
    (b_inv_d, penalty)
}

/// Evaluates the natural cubic regression spline basis row at `x`.
fn cr_row(knots: &[f64], second_deriv_map: &DMatrix<f64>, x: f64, row: &mut DVector<f64>) {
    let k = knots.len();
    let j = knots
        .windows(2)
        .position(|w| x <= w[1])
        .unwrap_or(k - 2)
        .min(k - 2);
    let h = knots[j + 1] - knots[j];
    let a_minus = (knots[j + 1] - x) / h;
    let a_plus = (x - knots[j]) / h;
    let c_minus = ((knots[j + 1] - x).powi(3) / h - h * (knots[j + 1] - x)) / 6.0;
    let c_plus = ((x - knots[j]).powi(3) / h - h * (x - knots[j])) / 6.0;
    row[j] += a_minus;
    row[j + 1] += a_plus;
    // Interior second derivatives: m_i = (B^{-1} D beta)_i, natural BCs at the ends.
    if j >= 1 {
        for c in 0..k {
            row[c] += c_minus * second_deriv_map[(j - 1, c)];
        }
    }
    if j + 1 <= k - 2 {
        for c in 0..k {
            row[c] += c_plus * second_deriv_map[(j, c)];
        }
    }
}

/// Second-order difference penalty D2^T D2 for k coefficients.
fn difference_penalty(k: usize) -> DMatrix<f64> {
    let mut d = DMatrix::<f64>::zeros(k - 2, k);
    for i in 0..k - 2 {
        d[(i, i)] = 1.0;
        d[(i, i + 1)] = -2.0;
        d[(i, i + 2)] = 1.0;
    }
    d.transpose() * d
}

/// Cyclic second-order difference penalty (indices wrap).
fn cyclic_difference_penalty(k: usize) -> DMatrix<f64> {
    let mut d = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        d[(i, (i + k - 1) % k)] += 1.0;
        d[(i, i)] += -2.0;
        d[(i, (i + 1) % k)] += 1.0;
    }
    d.transpose() * d
}

/// Nonzero cubic B-spline values at `x`: returns the first active basis index
/// and the four values, via Cox-de Boor recursion.
fn bspline_row(knots: &[f64], x: f64) -> (usize, [f64; 4]) {
    let n_basis = knots.len() - 4;
    // Span index: largest j with knots[j] <= x, clamped so the four active
    // basis indices j-3..=j stay inside 0..n_basis.
    let mut span = 3;
    while span < n_basis - 1 && x >= knots[span + 1] {
        span += 1;
    }
    let mut vals = [0.0f64; 4];
    vals[0] = 1.0;
    let mut left = [0.0f64; 4];
    let mut right = [0.0f64; 4];
    for depth in 1..=3usize {
        left[depth] = x - knots[span + 1 - depth];
        right[depth] = knots[span + depth] - x;
        let mut saved = 0.0;
        for r in 0..depth {
            let denom = right[r + 1] + left[depth - r];
            let temp = vals[r] / denom;
            vals[r] = saved + right[r + 1] * temp;
            saved = left[depth - r] * temp;
        }
        vals[depth] = saved;
    }
    (span - 3, vals)
}

/// Uniform cubic B-spline on [0, 4].
fn uniform_cubic_bspline(t: f64) -> f64 {
    if !(0.0..4.0).contains(&t) {
        return 0.0;
    }
    if t < 1.0 {
        t * t * t / 6.0
    } else if t < 2.0 {
        (-3.0 * t.powi(3) + 12.0 * t * t - 12.0 * t + 4.0) / 6.0
    } else if t < 3.0 {
        (3.0 * t.powi(3) - 24.0 * t * t + 60.0 * t - 44.0) / 6.0
    } else {
        (4.0 - t).powi(3) / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_336() -> (Vec<f64>, Vec<f64>) {
        let hours: Vec<f64> = (0..336).map(|i| (i % 24) as f64).collect();
        let days: Vec<f64> = (0..336).map(|i| ((i / 24) % 7) as f64).collect();
        (hours, days)
    }

    #[test]
    fn bspline_rows_partition_unity() {
        let (hours, days) = grid_336();
        let spec = BasisSpec::p_spline(Covariate::Day, 7);
        let (basis, _) = SmootherBasis::build(spec, &hours, &days).unwrap();
        let margin = &basis.margins()[0];
        for x in [0.0, 0.5, 1.0, 3.3, 6.0, 4.0] {
            let row = margin.raw_row(x).unwrap();
            assert!((row.sum() - 1.0).abs() < 1e-12, "sum at {x} = {}", row.sum());
        }
        // k=4 basis evaluated at a knot still sums to 1.
        let spec4 = BasisSpec::p_spline(Covariate::Day, 4);
        let (basis4, _) = SmootherBasis::build(spec4, &hours, &days).unwrap();
        let row = basis4.margins()[0].raw_row(2.0).unwrap();
        assert!((row.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cyclic_bspline_rows_partition_unity() {
        let (hours, days) = grid_336();
        let spec = BasisSpec {
            kind: BasisKind::PSpline,
            k: 8,
            k2: None,
            covariate: Covariate::Hour,
            cyclic: true,
        };
        let (basis, _) = SmootherBasis::build(spec, &hours, &days).unwrap();
        for x in [0.0, 5.5, 11.9, 23.0, 17.25] {
            let row = basis.margins()[0].raw_row(x).unwrap();
            assert!((row.sum() - 1.0).abs() < 1e-12, "sum at {x} = {}", row.sum());
        }
    }

    #[test]
    fn constant_vector_has_zero_penalty() {
        let (hours, days) = grid_336();
        for spec in [
            BasisSpec::cubic_regression(Covariate::Hour, 24),
            BasisSpec::p_spline(Covariate::Day, 7),
        ] {
            let values = match spec.covariate {
                Covariate::Hour => &hours,
                _ => &days,
            };
            let margin =
                MarginBasis::build(spec.kind, spec.covariate, spec.k, false, values).unwrap();
            // Raw penalty applied to the constant coefficient vector, before centering.
            let raw_penalty = match spec.kind {
                BasisKind::CubicRegression => {
                    let knots: Vec<f64> = (0..spec.k)
                        .map(|i| {
                            let (lo, hi) = spec.covariate.domain();
                            lo + (hi - lo) * i as f64 / (spec.k - 1) as f64
                        })
                        .collect();
                    cr_penalty(&knots).1
                }
                BasisKind::PSpline => difference_penalty(spec.k),
                _ => unreachable!(),
            };
            let ones = DVector::from_element(spec.k, 1.0);
            let val = (ones.transpose() * &raw_penalty * &ones)[(0, 0)];
            assert!(val.abs() < 1e-9, "penalty of constant = {val}");
            let _ = margin;
        }
    }

    #[test]
    fn penalties_are_symmetric_psd() {
        let (hours, days) = grid_336();
        for spec in [
            BasisSpec::cubic_regression(Covariate::Hour, 24),
            BasisSpec::p_spline(Covariate::Day, 7),
            BasisSpec::tensor(12, 5),
        ] {
            let (basis, _) = SmootherBasis::build(spec, &hours, &days).unwrap();
            let s = basis.penalty();
            for i in 0..s.nrows() {
                for j in 0..s.ncols() {
                    assert!((s[(i, j)] - s[(j, i)]).abs() < 1e-12);
                }
            }
            let eig = s.clone().symmetric_eigen();
            for ev in eig.eigenvalues.iter() {
                assert!(*ev >= -1e-10 * s.nrows() as f64, "negative eigenvalue {ev}");
            }
        }
    }

    #[test]
    fn hour_basis_k24_centered_dimension() {
        let (hours, days) = grid_336();
        let spec = BasisSpec::cubic_regression(Covariate::Hour, 24);
        let (basis, design) = SmootherBasis::build(spec, &hours, &days).unwrap();
        assert_eq!(design.nrows(), 336);
        assert_eq!(design.ncols(), 23);
        assert_eq!(basis.dim(), 23);
        // Sum-to-zero over the training design columns.
        for c in 0..design.ncols() {
            let s: f64 = design.column(c).sum();
            assert!(s.abs() < 1e-8, "column {c} sums to {s}");
        }
    }

    #[test]
    fn cr_interpolates_values_at_knots() {
        // A natural cubic spline with coefficients beta reproduces beta at knots.
        let knots: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let (map, _) = cr_penalty(&knots);
        for (i, &knot) in knots.iter().enumerate() {
            let mut row = DVector::<f64>::zeros(6);
            cr_row(&knots, &map, knot, &mut row);
            for j in 0..6 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((row[j] - expect).abs() < 1e-10, "b_{j}({knot}) = {}", row[j]);
            }
        }
    }

    #[test]
    fn k_exceeding_unique_values_is_rejected() {
        let hours: Vec<f64> = (0..48).map(|i| (i % 4) as f64).collect();
        let days = vec![0.0; 48];
        let spec = BasisSpec::cubic_regression(Covariate::Hour, 8);
        let err = SmootherBasis::build(spec, &hours, &days).unwrap_err();
        assert!(matches!(err, SplineError::KExceedsUnique { .. }));
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let (hours, days) = grid_336();
        let spec = BasisSpec::cubic_regression(Covariate::Hour, 10);
        let (basis, _) = SmootherBasis::build(spec, &hours, &days).unwrap();
        let err = basis.design(&[24.5], &[0.0]).unwrap_err();
        assert!(matches!(err, SplineError::OutOfDomain { .. }));
    }

    #[test]
    fn tensor_block_dimension() {
        let (hours, days) = grid_336();
        let spec = BasisSpec::tensor(24, 7);
        let (basis, design) = SmootherBasis::build(spec, &hours, &days).unwrap();
        assert_eq!(basis.dim(), 23 * 6);
        assert_eq!(design.ncols(), 138);
    }

    #[test]
    fn cyclic_cr_unsupported() {
        let (hours, days) = grid_336();
        let spec = BasisSpec {
            kind: BasisKind::CubicRegression,
            k: 10,
            k2: None,
            covariate: Covariate::Hour,
            cyclic: true,
        };
        let err = SmootherBasis::build(spec, &hours, &days).unwrap_err();
        assert!(matches!(err, SplineError::CyclicUnsupported));
    }
}
