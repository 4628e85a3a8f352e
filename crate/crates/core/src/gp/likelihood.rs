use crate::error::{Error, Result};
use crate::kernels::{ExponentPower, HyperparameterSet, KernelEvaluator};
use crate::linalg::{dot, Cholesky, Mat};
use crate::scalar::{abs_pow, Scalar};
use crate::space::{Dataset, MixedPoint};

/// Largest jitter tried before giving up on a factorization.
pub const MAX_JITTER: f64 = 1e-4;

/// Per-pair |Δ|^p terms and level indices of a fixed point set, so repeated
/// correlation assemblies only redo the exponentials.
#[derive(Clone, Debug)]
pub(crate) struct PairCache<T> {
    n: usize,
    n_cont: usize,
    n_int: usize,
    /// Row r > s at offset r(r-1)/2 + s, each holding n_cont + n_int terms.
    terms: Vec<T>,
    levels: Vec<Vec<usize>>,
}

impl<T: Scalar> PairCache<T> {
    pub(crate) fn new(points: &[MixedPoint<T>], p: ExponentPower) -> Self {
        let n = points.len();
        let (n_cont, n_int) = points
            .first()
            .map_or((0, 0), |w| (w.continuous.len(), w.integer.len()));
        let width = n_cont + n_int;
        let mut terms = Vec::with_capacity(n * n.saturating_sub(1) / 2 * width);
        for r in 1..n {
            for s in 0..r {
                let (a, b) = (&points[r], &points[s]);
                for j in 0..n_cont {
                    terms.push(abs_pow(a.continuous[j] - b.continuous[j], p.value()));
                }
                for j in 0..n_int {
                    terms.push(abs_pow(a.integer[j] - b.integer[j], p.value()));
                }
            }
        }
        let levels = points
            .iter()
            .map(|w| (0..w.levels.len()).map(|k| w.level_index(k)).collect())
            .collect();
        Self {
            n,
            n_cont,
            n_int,
            terms,
            levels,
        }
    }

    /// R with a unit diagonal, built from the kernel's continuous/integer θ and R_i.
    pub(crate) fn correlation(&self, hyper: &HyperparameterSet<T>, cat: &[Mat<T>]) -> Result<Mat<T>> {
        if hyper.theta_cont.len() != self.n_cont || hyper.theta_int.len() != self.n_int {
            return Err(Error::DimensionMismatch {
                expected: self.n_cont + self.n_int,
                found: hyper.theta_cont.len() + hyper.theta_int.len(),
            });
        }
        let width = self.n_cont + self.n_int;
        let mut r_mat = Mat::identity(self.n);
        let mut off = 0;
        for r in 1..self.n {
            for s in 0..r {
                let t = &self.terms[off..off + width];
                off += width;
                let mut sc = T::zero();
                for (tj, th) in t[..self.n_cont].iter().zip(&hyper.theta_cont) {
                    sc += *th * *tj;
                }
                let mut si = T::zero();
                for (tj, th) in t[self.n_cont..].iter().zip(&hyper.theta_int) {
                    si += *th * *tj;
                }
                let mut k = (-sc).exp() * (-si).exp();
                for (i, ri) in cat.iter().enumerate() {
                    k *= ri[(self.levels[r][i], self.levels[s][i])];
                }
                r_mat[(r, s)] = k;
                r_mat[(s, r)] = k;
            }
        }
        Ok(r_mat)
    }
}

/// R(Θ) over the dataset's points as given (no normalization).
pub fn correlation_matrix<T: Scalar>(
    dataset: &Dataset<T>,
    hyper: &HyperparameterSet<T>,
    p: ExponentPower,
) -> Result<Mat<T>> {
    hyper.check_space(dataset.space())?;
    let ev = KernelEvaluator::new(hyper, p)?;
    PairCache::new(dataset.points(), p).correlation(hyper, ev.categorical_matrices())
}

/// Everything the likelihood computes along the way; a fitted model keeps it.
#[derive(Clone, Debug)]
pub(crate) struct Profile<T> {
    pub value: T,
    pub mu: T,
    pub sigma2: T,
    pub jitter: T,
    pub chol: Cholesky<T>,
    /// R⁻¹(y − 1μ̂)
    pub alpha: Vec<T>,
    /// R⁻¹1
    pub rinv_one: Vec<T>,
    /// 1ᵀR⁻¹1
    pub one_rinv_one: T,
}

/// Factors R + jitter·I, multiplying the jitter by 10 on failure up to [`MAX_JITTER`].
pub(crate) fn factor_with_jitter<T: Scalar>(r: &Mat<T>, jitter: T) -> Result<(Cholesky<T>, T)> {
    let mut j = jitter;
    let cap = T::c(MAX_JITTER) * T::c(1.000_001);
    while j <= cap {
        let mut a = r.clone();
        a.add_diagonal(j);
        if let Some(c) = Cholesky::new(&a) {
            return Ok((c, j));
        }
        j *= T::c(10.0);
    }
    Err(Error::NumericalFailure(format!(
        "correlation matrix not factorable with jitter up to {MAX_JITTER:e}"
    )))
}

/// σ̂² floor: 1e-12·var(y), or 1e-12 when y is constant.
fn variance_floor<T: Scalar>(y: &[T]) -> T {
    let n = T::c(y.len() as f64);
    let mean = y.iter().copied().sum::<T>() / n;
    let var = y.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    let tiny = T::c(1e-12);
    if var > T::zero() {
        tiny * var
    } else {
        tiny
    }
}

pub(crate) fn profile<T: Scalar>(r: &Mat<T>, y: &[T], jitter: T) -> Result<Profile<T>> {
    let (chol, jitter) = factor_with_jitter(r, jitter)?;
    let n = y.len();
    let nt = T::c(n as f64);
    let rinv_one = chol.solve(&vec![T::one(); n]);
    let rinv_y = chol.solve(y);
    let one_rinv_one: T = rinv_one.iter().copied().sum();
    let mu = rinv_y.iter().copied().sum::<T>() / one_rinv_one;
    let alpha: Vec<T> = rinv_y.iter().zip(&rinv_one).map(|(&b, &a)| b - mu * a).collect();
    let resid: Vec<T> = y.iter().map(|&v| v - mu).collect();
    let sigma2 = (dot(&resid, &alpha) / nt).max(variance_floor(y));
    let half = T::c(0.5);
    let two_pi = T::c(std::f64::consts::TAU);
    let value = -half * nt * sigma2.ln() - half * chol.log_det() - half * nt * (T::one() + two_pi.ln());
    if !value.is_finite() {
        return Err(Error::NumericalFailure(format!("non-finite likelihood {value}")));
    }
    Ok(Profile {
        value,
        mu,
        sigma2,
        jitter,
        chol,
        alpha,
        rinv_one,
        one_rinv_one,
    })
}

/// Concentrated log-likelihood of the dataset's targets under R(Θ) + jitter·I.
///
/// μ̂ and σ̂² are profiled out:
/// `-(n/2) log σ̂² - ½ log|R| - (n/2)(1 + log 2π)`.
/// The dataset is used as given; a fitted model evaluates it on its
/// normalized inputs and standardized targets.
pub fn concentrated_log_likelihood<T: Scalar>(
    dataset: &Dataset<T>,
    hyper: &HyperparameterSet<T>,
    p: ExponentPower,
    jitter: T,
) -> Result<T> {
    let r = correlation_matrix(dataset, hyper, p)?;
    Ok(profile(&r, dataset.targets(), jitter)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{mixed_kernel, CategoricalKernelKind, SymmetricHyperMatrix, DEFAULT_EPSILON};
    use crate::space::{DesignSpace, VariableSpec};
    use approx::assert_relative_eq;

    fn mixed_space() -> DesignSpace {
        DesignSpace::new(vec![
            VariableSpec::continuous("x", 0.0, 1.0),
            VariableSpec::categorical_count("c", 3),
        ])
        .unwrap()
    }

    #[test]
    fn single_point_is_one() {
        let ds = Dataset::new(mixed_space(), vec![MixedPoint::new(vec![0.4], vec![], vec![2])], vec![3.0]).unwrap();
        let h = HyperparameterSet::new(
            CategoricalKernelKind::Gd,
            vec![1.0],
            vec![],
            vec![SymmetricHyperMatrix::gower(3, 1.0).unwrap()],
        );
        let r = correlation_matrix(&ds, &h, ExponentPower::Squared).unwrap();
        assert_eq!(r.as_slice(), &[1.0]);
        // σ̂² = 0 is floored, so the value is finite
        let l: f64 = concentrated_log_likelihood(&ds, &h, ExponentPower::Squared, 1e-10).unwrap();
        assert!(l.is_finite());
    }

    #[test]
    fn matches_mixed_kernel_and_orthogonal_levels() {
        let pts = vec![
            MixedPoint::new(vec![0.2], vec![], vec![1]),
            MixedPoint::new(vec![0.2], vec![], vec![2]),
            MixedPoint::new(vec![0.9], vec![], vec![3]),
        ];
        let ds = Dataset::new(mixed_space(), pts.clone(), vec![0.0, 1.0, 2.0]).unwrap();
        let ortho = SymmetricHyperMatrix::hypersphere(CategoricalKernelKind::Ehh, 3, &[std::f64::consts::FRAC_PI_2; 3]).unwrap();
        let h = HyperparameterSet::new(CategoricalKernelKind::Ehh, vec![2.0], vec![], vec![ortho]);
        for p in [ExponentPower::Absolute, ExponentPower::Squared] {
            let r = correlation_matrix(&ds, &h, p).unwrap();
            assert!(r.is_symmetric());
            for a in 0..3 {
                for b in 0..3 {
                    assert_relative_eq!(r[(a, b)], mixed_kernel(&pts[a], &pts[b], &h, p).unwrap(), max_relative = 1e-15);
                }
            }
            assert_relative_eq!(r[(0, 1)], DEFAULT_EPSILON, max_relative = 1e-12);
        }
    }

    #[test]
    fn duplicated_rows_escalate_jitter() {
        let s = DesignSpace::new(vec![VariableSpec::continuous("x", 0.0, 1.0)]).unwrap();
        let pts = vec![MixedPoint::continuous_only(vec![0.5]); 4];
        let ds = Dataset::new(s, pts, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let h = HyperparameterSet::new(CategoricalKernelKind::Gd, vec![1.0], vec![], vec![]);
        let l: f64 = concentrated_log_likelihood(&ds, &h, ExponentPower::Squared, 1e-10).unwrap();
        assert!(l.is_finite());
    }

    #[test]
    fn jitter_gives_up_past_the_cap() {
        let bad = Mat::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(factor_with_jitter(&bad, 1e-10), Err(Error::NumericalFailure(_))));
        let (_, j) = factor_with_jitter(&Mat::from_row_major(2, 2, vec![1.0, 1.0, 1.0, 1.0]), 1e-10).unwrap();
        assert!((1e-10..=1e-4).contains(&j));
    }
}
