use super::SymmetricHyperMatrix;
use crate::linalg::Mat;
use crate::scalar::{sin_cos, Scalar};

/// Lower-triangular C(Θ_i) whose rows are points on the unit sphere.
///
/// Row k uses the angles Θ_k1 … Θ_k,k-1:
/// `C_k1 = cos Θ_k1`, `C_kj = cos Θ_kj Π_{i<j} sin Θ_ki`, `C_kk = Π_{i<k} sin Θ_ki`.
pub fn hypersphere_lower_triangular<T: Scalar>(theta: &SymmetricHyperMatrix<T>) -> Mat<T> {
    hypersphere_from_angles(theta.levels(), |k, j| theta.angle(k, j))
}

/// Same construction from an arbitrary angle accessor `(k, j) -> Θ_kj`, k > j.
pub fn hypersphere_from_angles<T: Scalar>(levels: usize, angle: impl Fn(usize, usize) -> T) -> Mat<T> {
    let mut c = Mat::zeros(levels, levels);
    if levels == 0 {
        return c;
    }
    c[(0, 0)] = T::one();
    for k in 1..levels {
        let mut sin_prod = T::one();
        for j in 0..k {
            let (sin, cos) = sin_cos(angle(k, j));
            c[(k, j)] = cos * sin_prod;
            sin_prod *= sin;
        }
        c[(k, k)] = sin_prod;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::CategoricalKernelKind;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn two_levels() {
        let t = 0.7f64;
        let m = SymmetricHyperMatrix::hypersphere(CategoricalKernelKind::Ehh, 2, &[t]).unwrap();
        let c = hypersphere_lower_triangular(&m);
        assert_eq!(c.as_slice(), &[1.0, 0.0, t.cos(), t.sin()]);
        assert_relative_eq!(c.gram()[(0, 1)], t.cos(), epsilon = 1e-15);
    }

    #[test]
    fn right_angles_give_identity() {
        let m = SymmetricHyperMatrix::hypersphere(CategoricalKernelKind::Hh, 4, &[FRAC_PI_2; 6]).unwrap();
        let g = hypersphere_lower_triangular(&m).gram();
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(g[(i, j)], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn zero_angles_give_ones() {
        let m = SymmetricHyperMatrix::hypersphere(CategoricalKernelKind::Ehh, 5, &[0.0; 10]).unwrap();
        let c = hypersphere_lower_triangular(&m);
        for k in 0..5 {
            assert_eq!(c[(k, 0)], 1.0);
        }
        assert!(c.gram().as_slice().iter().all(|&v| v == 1.0));
    }
}
