use super::{hypersphere_lower_triangular, CategoricalKernelKind, SymmetricHyperMatrix};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Mat};
use crate::scalar::Scalar;

/// Φ(Θ_i) for the given kind.
///
/// | kind | Φ_jj      | Φ_jj' (j ≠ j')                 |
/// |------|-----------|--------------------------------|
/// | GD   | θ/2       | 0                              |
/// | CR   | Θ_jj      | 0                              |
/// | EHH  | 0         | (log ε)/2 · ([C Cᵀ]_jj' − 1)   |
/// | FE   | Θ_jj      | (log ε)/2 · ([C Cᵀ]_jj' − 1)   |
/// | HH   | 1         | ½ [C Cᵀ]_jj'                   |
pub fn phi_transform<T: Scalar>(
    kind: CategoricalKernelKind,
    theta: &SymmetricHyperMatrix<T>,
    epsilon: T,
) -> Result<Mat<T>> {
    if theta.kind() != kind {
        return Err(Error::ShapeMismatch(format!(
            "{} hyperparameters given to the {kind} transform",
            theta.kind()
        )));
    }
    let l = theta.levels();
    let half = T::c(0.5);
    let phi = match kind {
        CategoricalKernelKind::Gd | CategoricalKernelKind::Cr => {
            Mat::from_fn(l, l, |j, k| if j == k { theta.diag(j) } else { T::zero() })
        }
        CategoricalKernelKind::Ehh | CategoricalKernelKind::Fe => {
            let g = hypersphere_lower_triangular(theta).gram();
            let scale = epsilon.ln() * half;
            Mat::from_fn(l, l, |j, k| {
                if j == k {
                    theta.diag(j)
                } else {
                    scale * (g[(j, k)] - T::one())
                }
            })
        }
        CategoricalKernelKind::Hh => {
            let g = hypersphere_lower_triangular(theta).gram();
            Mat::from_fn(l, l, |j, k| if j == k { T::one() } else { half * g[(j, k)] })
        }
    };
    Ok(phi)
}

/// Correlation between levels `lr` and `ls` (0-based) given Φ.
///
/// 1 on equal levels, otherwise κ(2Φ_rs) κ(Φ_rr) κ(Φ_ss).
pub fn level_correlation<T: Scalar>(kind: CategoricalKernelKind, phi: &Mat<T>, lr: usize, ls: usize) -> T {
    if lr == ls {
        return T::one();
    }
    let two = T::one() + T::one();
    let (cross, dr, ds) = (two * phi[(lr, ls)], phi[(lr, lr)], phi[(ls, ls)]);
    if kind.is_exponential() {
        (-cross).exp() * (-dr).exp() * (-ds).exp()
    } else {
        cross * dr * ds
    }
}

/// The L_i × L_i correlation matrix R_i of one categorical variable.
pub fn categorical_matrix<T: Scalar>(
    kind: CategoricalKernelKind,
    theta: &SymmetricHyperMatrix<T>,
    epsilon: T,
) -> Result<Mat<T>> {
    let phi = phi_transform(kind, theta, epsilon)?;
    let l = theta.levels();
    let mut r = Mat::identity(l);
    // Φ_ab ≤ −(log ε)/2 exactly when [C Cᵀ]_ab ≥ 0.
    let phi_at_zero_gram = -epsilon.ln() * T::c(0.5);
    for a in 0..l {
        for b in 0..a {
            let mut v = level_correlation(kind, &phi, a, b);
            // T_i = ε^{1 - [C Cᵀ]} lies in [ε, 1] whenever [C Cᵀ] ≥ 0; keep
            // rounding in exp(log ε) from dipping below ε.
            if kind == CategoricalKernelKind::Ehh && phi[(a, b)] <= phi_at_zero_gram {
                v = v.max(epsilon).min(T::one());
            }
            r[(a, b)] = v;
            r[(b, a)] = v;
        }
    }
    Ok(r)
}

/// Recovers EHH angles Θ̂ whose correlation matrix reproduces `target`.
///
/// Each entry α is mapped to the Gram entry `1 − log α / log ε`, the Gram
/// matrix is Cholesky-factored, and the angles are read off its rows.
/// Targets whose Gram matrix is indefinite beyond rounding are rejected.
pub fn recover_angles_from_correlation<T: Scalar>(target: &Mat<T>, epsilon: T) -> Result<SymmetricHyperMatrix<T>> {
    if !target.is_square() || target.rows() < 2 {
        return Err(Error::ShapeMismatch("target must be square with at least 2 levels".into()));
    }
    let l = target.rows();
    let log_eps = epsilon.ln();
    let mut gram = Mat::identity(l);
    for a in 0..l {
        for b in 0..a {
            let alpha = target[(a, b)];
            if !(alpha > epsilon) || alpha > T::one() || alpha != target[(b, a)] {
                return Err(Error::NotRepresentable(format!(
                    "entry ({a}, {b}) = {alpha} must be symmetric and in (ε, 1]"
                )));
            }
            let g = T::one() - alpha.ln() / log_eps;
            gram[(a, b)] = g;
            gram[(b, a)] = g;
        }
    }
    // A Gram matrix from nearly-degenerate hypersphere rows can be singular
    // to rounding; blending it towards I by η keeps the unit diagonal and
    // moves each correlation by at most about |log ε|·η.
    let chol = std::iter::once(0.0)
        .chain([1e-13, 1e-12, 1e-11, 1e-10, 1e-9])
        .find_map(|eta| {
            let eta = T::c(eta);
            Cholesky::new(&Mat::from_fn(l, l, |a, b| {
                if a == b {
                    T::one()
                } else {
                    (T::one() - eta) * gram[(a, b)]
                }
            }))
        })
        .ok_or_else(|| Error::NotRepresentable("recovered Gram matrix is not positive semidefinite".into()))?;
    let c = chol.factor();
    let mut angles = Vec::with_capacity(l * (l - 1) / 2);
    for k in 1..l {
        // Θ_kj = atan2(|(c_k,j+1, …, c_kk)|, c_kj); no division by the
        // running sine product, which can underflow to rounding noise.
        let mut tail = vec![T::zero(); k + 1];
        for j in (0..k).rev() {
            tail[j] = tail[j + 1].hypot(c[(k, j + 1)]);
        }
        angles.extend((0..k).map(|j| tail[j].atan2(c[(k, j)])));
    }
    SymmetricHyperMatrix::hypersphere(CategoricalKernelKind::Ehh, l, &angles)
}
