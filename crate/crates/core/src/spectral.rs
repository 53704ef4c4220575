//! Energy integrand `log det M / det M∞` and force integrand `Tr(M⁻¹ ∂M)`.

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::Solve;
use faer::{Accum, Mat, MatRef, Par, Side};

use crate::assembly::{InteractionMatrix, MatrixDerivative};
use crate::error::{Error, Result};

/// Integrand magnitudes below this are reported as zero.
pub const CLAMP: f64 = 1e-15;

/// Largest dimension accepted by the eigenvalue cross-check paths.
pub const MAX_EIG_DIMENSION: usize = 1000;

/// Integrands at one imaginary frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandSample {
    pub kappa: f64,
    /// `log det M - log det M∞`.
    pub energy_integrand: f64,
    /// `Tr(M⁻¹ ∂M/∂δ)`, per unit displacement.
    pub force_integrand: Option<f64>,
    /// Smallest pivot of the Cholesky factorization of the stored `M`.
    pub min_pivot: f64,
    /// Ratio of the largest to the smallest Cholesky pivot.
    pub condition_estimate: f64,
}

fn clamp(x: f64) -> f64 {
    if x.abs() < CLAMP {
        0.0
    } else {
        x
    }
}

fn cholesky(a: MatRef<'_, f64>) -> Option<Mat<f64>> {
    a.llt(Side::Lower).ok().map(|c| c.L().to_owned())
}

fn log_diag(l: &Mat<f64>) -> f64 {
    (0..l.nrows()).map(|k| 2.0 * l[(k, k)].ln()).sum()
}

/// `(log |det A|, sign det A)` by symmetric-indefinite factorization.
fn signed_logdet(a: MatRef<'_, f64>) -> (f64, f64) {
    let f = a.lblt(Side::Lower);
    let d = f.B_diag().column_vector();
    let s = f.B_subdiag().column_vector();
    let (mut log, mut sign) = (0.0, 1.0);
    let mut k = 0;
    while k < a.nrows() {
        let det = if k + 1 < a.nrows() && s[k] != 0.0 {
            let det = d[k] * d[k + 1] - s[k] * s[k];
            k += 2;
            det
        } else {
            k += 1;
            d[k - 1]
        };
        if det == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        log += det.abs().ln();
        sign *= det.signum();
    }
    (log, sign)
}

fn check_pair(m: &InteractionMatrix, m_inf: &InteractionMatrix) -> Result<()> {
    if m.kappa() != m_inf.kappa() || m.blocks() != m_inf.blocks() {
        return Err(Error::InvalidArgument("M and M∞ differ in κ or layout".into()));
    }
    if !m_inf.is_infinite() {
        return Err(Error::InvalidArgument("second matrix is not an M∞ variant".into()));
    }
    if m.scale() != m_inf.scale() {
        return Err(Error::InvalidArgument("M and M∞ are scaled differently".into()));
    }
    Ok(())
}

/// Block route: with `M = L Lᵀ` and `M∞_jj = C_j C_jᵀ`,
/// `log det M / det M∞ = Σ_j log det(I - Y_j Y_jᵀ)` where `Y_j = C_j⁻¹ L_{j,<j}`.
fn logdet_ratio_blocks(l: &Mat<f64>, m: &InteractionMatrix, m_inf: &InteractionMatrix) -> Option<f64> {
    let mut total = 0.0;
    for (j, &(offset, size)) in m.blocks().iter().enumerate() {
        let c = cholesky(m_inf.block(j, j))?;
        if m.block(j, j) != m_inf.block(j, j) {
            total += log_diag(&cholesky(m.block(j, j))?) - log_diag(&c);
        }
        if offset == 0 {
            continue;
        }
        let mut y = l.as_ref().submatrix(offset, 0, size, offset).to_owned();
        c.solve_lower_triangular_in_place(y.as_mut());
        let mut g = Mat::<f64>::identity(size, size);
        matmul(g.as_mut(), Accum::Add, y.as_ref(), y.as_ref().transpose(), -1.0, Par::Seq);
        total += log_diag(&cholesky(g.as_ref())?);
    }
    Some(total)
}

fn logdet_ratio_fallback(m: &InteractionMatrix, m_inf: &InteractionMatrix) -> Result<f64> {
    let (log_m, sign_m) = signed_logdet(m.matrix());
    let (mut log_inf, mut sign_inf) = (0.0, 1.0);
    for j in 0..m_inf.blocks().len() {
        let (l, s) = signed_logdet(m_inf.block(j, j));
        log_inf += l;
        sign_inf *= s;
    }
    let log_abs_ratio = log_m - log_inf;
    if sign_m * sign_inf <= 0.0 {
        return Err(Error::NegativeDeterminantRatio { log_abs_ratio });
    }
    Ok(clamp(log_abs_ratio))
}

/// `log det M - log det M∞`, by Cholesky factorization with a
/// symmetric-indefinite fallback.
pub fn logdet_ratio(m: &InteractionMatrix, m_inf: &InteractionMatrix) -> Result<f64> {
    check_pair(m, m_inf)?;
    match cholesky(m.matrix()) {
        Some(l) => match logdet_ratio_blocks(&l, m, m_inf) {
            Some(v) => Ok(clamp(v)),
            None => logdet_ratio_fallback(m, m_inf),
        },
        None => logdet_ratio_fallback(m, m_inf),
    }
}

fn eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Factorization(format!("eigenvalue solver: {e:?}")))
}

fn check_eig_size(n: usize) -> Result<()> {
    if n > MAX_EIG_DIMENSION {
        return Err(Error::TooLarge {
            n,
            limit: MAX_EIG_DIMENSION,
        });
    }
    Ok(())
}

/// `Σ log λ_n - Σ log λ_n^∞` over the eigenvalues of `M` and `M∞`.
pub fn logdet_ratio_eig(m: &InteractionMatrix, m_inf: &InteractionMatrix) -> Result<f64> {
    check_pair(m, m_inf)?;
    check_eig_size(m.dimension())?;
    let mut total = 0.0;
    for (sign, a) in [(1.0, m.matrix()), (-1.0, m_inf.matrix())] {
        for lambda in eigenvalues(a)? {
            if !(lambda > 0.0) {
                return Err(Error::Factorization(format!("non-positive eigenvalue {lambda:e}")));
            }
            total += sign * lambda.ln();
        }
    }
    Ok(clamp(total))
}

fn check_derivative(m: &InteractionMatrix, dm: &MatrixDerivative) -> Result<()> {
    if m.kappa() != dm.kappa() || m.blocks() != dm.blocks() {
        return Err(Error::InvalidArgument("M and ∂M differ in κ or layout".into()));
    }
    Ok(())
}

/// `Tr(M⁻¹ ∂M)` given the Cholesky factor of the stored `M`.
fn trace_with(l: &Mat<f64>, m: &InteractionMatrix, dm: &MatrixDerivative) -> f64 {
    let mut x = dm.matrix().to_owned();
    l.solve_lower_triangular_in_place(x.as_mut());
    l.transpose().solve_upper_triangular_in_place(x.as_mut());
    let trace: f64 = (0..x.nrows()).map(|k| x[(k, k)]).sum();
    clamp(trace * m.scale() / dm.scale())
}

/// `Tr(M⁻¹ ∂M/∂δ)`: one factorization and `N` solves.
pub fn force_trace(m: &InteractionMatrix, dm: &MatrixDerivative) -> Result<f64> {
    check_derivative(m, dm)?;
    match cholesky(m.matrix()) {
        Some(l) => Ok(trace_with(&l, m, dm)),
        None => {
            let x = m.matrix().lblt(Side::Lower).solve(dm.matrix());
            let trace: f64 = (0..x.nrows()).map(|k| x[(k, k)]).sum();
            if !trace.is_finite() {
                return Err(Error::Factorization("singular interaction matrix".into()));
            }
            Ok(clamp(trace * m.scale() / dm.scale()))
        }
    }
}

/// Eigenvalues `α` of `∂M v = α M v`, ascending.
pub fn force_eigs(m: &InteractionMatrix, dm: &MatrixDerivative) -> Result<Vec<f64>> {
    check_derivative(m, dm)?;
    check_eig_size(m.dimension())?;
    let l = cholesky(m.matrix()).ok_or_else(|| Error::Factorization("M is not positive definite".into()))?;
    let mut w = dm.matrix().to_owned();
    l.solve_lower_triangular_in_place(w.as_mut());
    let mut z = w.transpose().to_owned();
    l.solve_lower_triangular_in_place(z.as_mut());
    let n = z.nrows();
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (z[(i, j)] + z[(j, i)]));
    let factor = m.scale() / dm.scale();
    Ok(eigenvalues(sym.as_ref())?.into_iter().map(|a| a * factor).collect())
}

/// Both integrands from one factorization of `M`.
pub fn evaluate(m: &InteractionMatrix, m_inf: &InteractionMatrix, dm: Option<&MatrixDerivative>) -> Result<IntegrandSample> {
    check_pair(m, m_inf)?;
    if let Some(dm) = dm {
        check_derivative(m, dm)?;
    }
    let Some(l) = cholesky(m.matrix()) else {
        return Ok(IntegrandSample {
            kappa: m.kappa(),
            energy_integrand: logdet_ratio_fallback(m, m_inf)?,
            force_integrand: dm.map(|dm| force_trace(m, dm)).transpose()?,
            min_pivot: f64::NAN,
            condition_estimate: f64::NAN,
        });
    };
    let energy = match logdet_ratio_blocks(&l, m, m_inf) {
        Some(v) => clamp(v),
        None => logdet_ratio_fallback(m, m_inf)?,
    };
    let pivots: Vec<f64> = (0..l.nrows()).map(|k| l[(k, k)] * l[(k, k)]).collect();
    let min_pivot = pivots.iter().copied().fold(f64::INFINITY, f64::min);
    let max_pivot = pivots.iter().copied().fold(0.0, f64::max);
    Ok(IntegrandSample {
        kappa: m.kappa(),
        energy_integrand: energy,
        force_integrand: dm.map(|dm| trace_with(&l, m, dm)),
        min_pivot: min_pivot / m.scale(),
        condition_estimate: max_pivot / min_pivot,
    })
}
