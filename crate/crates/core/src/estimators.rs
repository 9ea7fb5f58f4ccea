//! LS, LMMSE filtering and MMSE interpolation over the usable carriers.
//!
//! All covariance matrices are assembled from a [`CorrelationVector`] by physical
//! frequency lag, so gaps left by virtual carriers are handled exactly.

use num_complex::Complex64;

use crate::correlation::CorrelationVector;
use crate::error::{Error, Result};
use crate::linalg::{dot, CMatrix, Cholesky};
use crate::ofdm::OfdmConfig;

/// Per-carrier least squares, `received / pilot`.
pub fn ls_estimate(received: &[Complex64], pilot: &[Complex64]) -> Result<Vec<Complex64>> {
    if received.len() != pilot.len() {
        return Err(Error::Argument(format!(
            "received has {} carriers, pilot has {}",
            received.len(),
            pilot.len()
        )));
    }
    received
        .iter()
        .zip(pilot)
        .enumerate()
        .map(|(k, (y, x))| {
            if x.norm_sqr() == 0.0 {
                Err(Error::Argument(format!("pilot on carrier {k} is zero")))
            } else {
                Ok(y / x)
            }
        })
        .collect()
}

/// Mean `|estimate - truth|^2`.
pub fn empirical_mse(estimate: &[Complex64], truth: &[Complex64]) -> f64 {
    assert_eq!(estimate.len(), truth.len(), "length mismatch");
    if estimate.is_empty() {
        return 0.0;
    }
    estimate.iter().zip(truth).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / estimate.len() as f64
}

/// A block of the carrier covariance: rows and columns are usable positions.
#[derive(Debug, Clone, Copy)]
pub struct CorrelationMatrixView<'a> {
    pub source: &'a CorrelationVector,
    pub rows: &'a [usize],
    pub cols: &'a [usize],
}

impl<'a> CorrelationMatrixView<'a> {
    pub fn new(source: &'a CorrelationVector, rows: &'a [usize], cols: &'a [usize]) -> Self {
        Self { source, rows, cols }
    }

    /// `E[h_{rows[i]} conj(h_{cols[j]})] = r(f_i - f_j)`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize, config: &OfdmConfig) -> Complex64 {
        self.source.at(config.lag(self.rows[i], self.cols[j]))
    }

    pub fn materialize(&self, config: &OfdmConfig) -> CMatrix {
        CMatrix::from_fn(self.rows.len(), self.cols.len(), |i, j| self.entry(i, j, config))
    }
}

/// Covariance of the carriers at `positions`, with `noise_var` on the diagonal.
pub fn loaded_autocorrelation(r: &CorrelationVector, positions: &[usize], noise_var: f64, config: &OfdmConfig) -> CMatrix {
    let mut a = CorrelationMatrixView::new(r, positions, positions).materialize(config);
    a.add_diagonal(noise_var);
    a
}

fn check_inputs(r: &CorrelationVector, noise_var: f64, config: &OfdmConfig) -> Result<()> {
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(Error::Argument(format!("noise variance must be finite and >= 0, got {noise_var}")));
    }
    r.ensure_fits(config)
}

fn all_positions(config: &OfdmConfig) -> Vec<usize> {
    (0..config.k()).collect()
}

/// How a linear map is held once built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preparation {
    /// Dense weight matrix: costly to build, one matvec per use. Suits maps
    /// applied many times.
    #[default]
    Weights,
    /// Cholesky factor plus cross-correlation: cheap to build, two triangular
    /// solves and a matvec per use. Suits maps applied a handful of times.
    Factored,
}

/// `x -> C A^{-1} x` in one of the two [`Preparation`] forms.
#[derive(Debug, Clone)]
pub(crate) enum WienerMap {
    Weights(CMatrix),
    Factored { chol: Cholesky, cross: CMatrix },
}

impl WienerMap {
    /// `cross` is `C` (targets x sources), `a` the loaded source autocorrelation.
    pub(crate) fn build(cross: CMatrix, a: &CMatrix, prep: Preparation) -> Result<Self> {
        let chol = Cholesky::factor(a)?;
        Ok(match prep {
            // C A^{-1} = (A^{-1} C^H)^H since A is Hermitian
            Preparation::Weights => WienerMap::Weights(chol.solve_mat(&cross.adjoint()).adjoint()),
            Preparation::Factored => WienerMap::Factored { chol, cross },
        })
    }

    pub(crate) fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        match self {
            WienerMap::Weights(w) => w.matvec(x),
            WienerMap::Factored { chol, cross } => cross.matvec(&chol.solve_vec(x)),
        }
    }

    pub(crate) fn weights(&self) -> CMatrix {
        match self {
            WienerMap::Weights(w) => w.clone(),
            WienerMap::Factored { chol, cross } => chol.solve_mat(&cross.adjoint()).adjoint(),
        }
    }
}

/// LMMSE smoother `W = R (R + s2 I)^{-1}` for one correlation and noise level.
#[derive(Debug, Clone)]
pub struct LmmseFilter {
    map: WienerMap,
}

impl LmmseFilter {
    pub fn new(r: &CorrelationVector, noise_var: f64, config: &OfdmConfig) -> Result<Self> {
        Self::with_preparation(r, noise_var, config, Preparation::Weights)
    }

    pub fn with_preparation(r: &CorrelationVector, noise_var: f64, config: &OfdmConfig, prep: Preparation) -> Result<Self> {
        check_inputs(r, noise_var, config)?;
        let pos = all_positions(config);
        let rhh = CorrelationMatrixView::new(r, &pos, &pos).materialize(config);
        let mut a = rhh.clone();
        a.add_diagonal(noise_var);
        Ok(Self { map: WienerMap::build(rhh, &a, prep)? })
    }

    pub fn apply(&self, ls: &[Complex64]) -> Vec<Complex64> {
        self.map.apply(ls)
    }

    /// Dense `W`, computed on demand for the factored form.
    pub fn weights(&self) -> CMatrix {
        self.map.weights()
    }
}

/// `R (R + s2 I)^{-1} ls` over all usable carriers.
pub fn lmmse_filter(ls: &[Complex64], r: &CorrelationVector, noise_var: f64, config: &OfdmConfig) -> Result<Vec<Complex64>> {
    if ls.len() != config.k() {
        return Err(Error::Argument(format!("ls has {} carriers, grid has {}", ls.len(), config.k())));
    }
    Ok(LmmseFilter::with_preparation(r, noise_var, config, Preparation::Factored)?.apply(ls))
}

/// MMSE interpolation of the carriers `targets` from the LS values at `sources`:
/// `R_ts (R_ss + s2 I)^{-1} ls_s`.
pub fn interpolate_from(
    ls_sources: &[Complex64],
    sources: &[usize],
    targets: &[usize],
    r: &CorrelationVector,
    noise_var: f64,
    config: &OfdmConfig,
) -> Result<Vec<Complex64>> {
    if ls_sources.len() != sources.len() {
        return Err(Error::Argument("ls values and source positions differ in length".into()));
    }
    check_inputs(r, noise_var, config)?;
    let a = loaded_autocorrelation(r, sources, noise_var, config);
    let cross = CorrelationMatrixView::new(r, targets, sources).materialize(config);
    Ok(WienerMap::build(cross, &a, Preparation::Factored)?.apply(ls_sources))
}

/// Leave-one-out MMSE interpolation of carrier `target_pos` from the LS values
/// of every other usable carrier, given in usable order without the target.
pub fn mmse_interpolate(
    ls_others: &[Complex64],
    target_pos: usize,
    r: &CorrelationVector,
    noise_var: f64,
    config: &OfdmConfig,
) -> Result<Complex64> {
    let k = config.k();
    if target_pos >= k {
        return Err(Error::Argument(format!("target position {target_pos} outside {k} carriers")));
    }
    if ls_others.len() + 1 != k {
        return Err(Error::Argument(format!("expected {} neighbour values, got {}", k - 1, ls_others.len())));
    }
    let sources: Vec<usize> = (0..k).filter(|&p| p != target_pos).collect();
    Ok(interpolate_from(ls_others, &sources, &[target_pos], r, noise_var, config)?[0])
}

/// Expected squared error of interpolating `target` from `sources` with weights
/// built from `r_used`, when the channel actually follows `r_true`.
pub fn mismatched_interpolation_mse(
    r_used: &CorrelationVector,
    r_true: &CorrelationVector,
    noise_var: f64,
    target: usize,
    sources: &[usize],
    config: &OfdmConfig,
) -> Result<f64> {
    check_inputs(r_used, noise_var, config)?;
    r_true.ensure_fits(config)?;
    let a = loaded_autocorrelation(r_used, sources, noise_var, config);
    let c: Vec<Complex64> = sources.iter().map(|&s| r_used.at(config.lag(target, s))).collect();
    // w = c A^{-1}; A Hermitian so w^T = A^{-1 T} c^T = conj(A^{-1} conj(c))
    let cc: Vec<Complex64> = c.iter().map(|z| z.conj()).collect();
    let w: Vec<Complex64> = Cholesky::factor(&a)?.solve_vec(&cc).iter().map(|z| z.conj()).collect();
    Ok(weights_mse(&w, r_true, noise_var, target, sources, config))
}

/// `E|w y_s - h_t|^2` under `r_true`.
fn weights_mse(w: &[Complex64], r_true: &CorrelationVector, noise_var: f64, target: usize, sources: &[usize], config: &OfdmConfig) -> f64 {
    let mut quad = 0.0;
    for (i, &si) in sources.iter().enumerate() {
        if w[i].norm_sqr() == 0.0 {
            continue;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &sj) in sources.iter().enumerate() {
            let mut cov = r_true.at(config.lag(si, sj));
            if i == j {
                cov += noise_var;
            }
            acc += cov * w[j].conj();
        }
        quad += (w[i] * acc).re;
    }
    let cross: Complex64 = sources.iter().zip(w).map(|(&s, wj)| wj * r_true.at(config.lag(s, target))).sum();
    (r_true.values()[0].re - 2.0 * cross.re + quad).max(0.0)
}

/// Expected squared error at each of `targets` when they are interpolated
/// jointly from `sources` with `r_used`, under `r_true`. One solve for the
/// whole group.
pub fn group_interpolation_mse(
    r_used: &CorrelationVector,
    r_true: &CorrelationVector,
    noise_var: f64,
    targets: &[usize],
    sources: &[usize],
    config: &OfdmConfig,
) -> Result<Vec<f64>> {
    check_inputs(r_used, noise_var, config)?;
    r_true.ensure_fits(config)?;
    let a = loaded_autocorrelation(r_used, sources, noise_var, config);
    let cross = CorrelationMatrixView::new(r_used, targets, sources).materialize(config);
    let w = WienerMap::build(cross, &a, Preparation::Weights)?.weights();
    Ok(targets
        .iter()
        .enumerate()
        .map(|(i, &t)| weights_mse(w.row(i), r_true, noise_var, t, sources, config))
        .collect())
}

/// Theoretical leave-one-out interpolation MSE at `target_pos`.
pub fn interpolation_mse_theoretical(
    r_used: &CorrelationVector,
    r_true: &CorrelationVector,
    noise_var: f64,
    target_pos: usize,
    config: &OfdmConfig,
) -> Result<f64> {
    let sources: Vec<usize> = (0..config.k()).filter(|&p| p != target_pos).collect();
    mismatched_interpolation_mse(r_used, r_true, noise_var, target_pos, &sources, config)
}

/// Leave-one-out interpolation weights for every carrier at once.
///
/// With `B = (R + s2 I)^{-1}`, the MMSE prediction of `y_t` from the other
/// carriers is `-sum_{j != t} B_tj y_j / B_tt`, and since the noise on carrier t
/// is independent of the rest this is also the interpolation of `h_t`. Row t of
/// the returned matrix holds those weights, with a zero at column t.
#[derive(Debug, Clone)]
pub struct LooInterpolator {
    inv: CMatrix,
    diag: Vec<f64>,
}

impl LooInterpolator {
    pub fn new(r: &CorrelationVector, noise_var: f64, config: &OfdmConfig) -> Result<Self> {
        check_inputs(r, noise_var, config)?;
        let pos = all_positions(config);
        let a = loaded_autocorrelation(r, &pos, noise_var, config);
        let inv = Cholesky::factor(&a)?.inverse();
        let diag: Vec<f64> = (0..pos.len()).map(|i| inv[(i, i)].re).collect();
        if diag.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::Numerical("inverse has a non-positive diagonal".into()));
        }
        Ok(Self { inv, diag })
    }

    /// `hat h_int - ls` for every carrier: `-(B ls)_t / B_tt`.
    pub fn residuals(&self, ls: &[Complex64]) -> Vec<Complex64> {
        (0..self.diag.len())
            .map(|t| -dot(self.inv.row(t), ls) / self.diag[t])
            .collect()
    }

    pub fn interpolate(&self, ls: &[Complex64]) -> Vec<Complex64> {
        self.residuals(ls).iter().zip(ls).map(|(e, y)| e + y).collect()
    }

    pub fn weights(&self, target: usize) -> Vec<Complex64> {
        let d = self.diag[target];
        self.inv
            .row(target)
            .iter()
            .enumerate()
            .map(|(j, b)| if j == target { Complex64::new(0.0, 0.0) } else { -b / d })
            .collect()
    }

    /// Per-carrier leave-one-out MSE when the channel follows `r_true`.
    pub fn mse_profile(&self, r_true: &CorrelationVector, noise_var: f64, config: &OfdmConfig) -> Vec<f64> {
        let pos = all_positions(config);
        (0..pos.len())
            .map(|t| weights_mse(&self.weights(t), r_true, noise_var, t, &pos, config))
            .collect()
    }
}
