use crate::error::{Error, Result};
use crate::kernels::{CategoricalKernelKind, HyperparameterSet, SymmetricHyperMatrix};
use crate::optimizer::BoxBounds;
use crate::scalar::Scalar;
use crate::space::DesignSpace;

/// Range of ln θ for length-scale-like parameters (θ_cont, θ_int, and the
/// GD/CR/FE diagonals). e^3 ≈ 20 already drives a level correlation to ε.
pub const LOG_THETA_BOUNDS: (f64, f64) = (-20.0, 3.0);

/// Flat optimizer coordinates for a hyperparameter set.
///
/// Order: ln θ_cont, ln θ_int, then each categorical Θ_i in its packed
/// row-major lower-triangle order. Diagonal entries are stored as logs,
/// angles as-is.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamLayout {
    kind: CategoricalKernelKind,
    n_continuous: usize,
    n_integer: usize,
    levels: Vec<usize>,
}

impl ParamLayout {
    pub fn new(space: &DesignSpace, kind: CategoricalKernelKind) -> Self {
        Self {
            kind,
            n_continuous: space.n_continuous(),
            n_integer: space.n_integer(),
            levels: space.level_counts(),
        }
    }

    pub fn kind(&self) -> CategoricalKernelKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.n_continuous
            + self.n_integer
            + self.levels.iter().map(|&l| self.kind.hyperparameter_count(l)).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether packed entry `idx` of an `levels`-level block is a diagonal (log-space) entry.
    fn is_log_entry(&self, levels: usize, idx: usize) -> bool {
        match self.kind {
            CategoricalKernelKind::Gd | CategoricalKernelKind::Cr => true,
            CategoricalKernelKind::Ehh | CategoricalKernelKind::Hh => false,
            CategoricalKernelKind::Fe => {
                // diagonal (k, k) sits at k(k+1)/2 + k
                (0..levels).any(|k| k * (k + 1) / 2 + k == idx)
            }
        }
    }

    pub fn bounds<T: Scalar>(&self) -> BoxBounds<T> {
        let (lo, hi) = (T::c(LOG_THETA_BOUNDS.0), T::c(LOG_THETA_BOUNDS.1));
        let amax = T::c(self.kind.angle_upper_bound());
        let mut lower = vec![lo; self.n_continuous + self.n_integer];
        let mut upper = vec![hi; self.n_continuous + self.n_integer];
        for &l in &self.levels {
            for idx in 0..self.kind.hyperparameter_count(l) {
                if self.is_log_entry(l, idx) {
                    lower.push(lo);
                    upper.push(hi);
                } else {
                    lower.push(T::zero());
                    upper.push(amax);
                }
            }
        }
        BoxBounds::new(lower, upper).expect("layout bounds are well ordered")
    }

    pub fn unpack<T: Scalar>(&self, flat: &[T]) -> Result<HyperparameterSet<T>> {
        if flat.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: flat.len(),
            });
        }
        let (cont, rest) = flat.split_at(self.n_continuous);
        let (int, mut rest) = rest.split_at(self.n_integer);
        let theta_cont = cont.iter().map(|v| v.exp()).collect();
        let theta_int = int.iter().map(|v| v.exp()).collect();
        let mut theta_cat = Vec::with_capacity(self.levels.len());
        for &l in &self.levels {
            let (block, tail) = rest.split_at(self.kind.hyperparameter_count(l));
            rest = tail;
            let values = block
                .iter()
                .enumerate()
                .map(|(i, &v)| if self.is_log_entry(l, i) { v.exp() } else { v })
                .collect();
            theta_cat.push(SymmetricHyperMatrix::new(self.kind, l, values)?);
        }
        Ok(HyperparameterSet::new(self.kind, theta_cont, theta_int, theta_cat))
    }

    /// Inverse of [`unpack`](Self::unpack). Zero diagonal entries map to the lower log bound.
    pub fn pack<T: Scalar>(&self, hyper: &HyperparameterSet<T>) -> Result<Vec<T>> {
        if hyper.kind != self.kind
            || hyper.theta_cont.len() != self.n_continuous
            || hyper.theta_int.len() != self.n_integer
            || hyper.theta_cat.iter().map(|m| m.levels()).ne(self.levels.iter().copied())
        {
            return Err(Error::ShapeMismatch("hyperparameters do not match the layout".into()));
        }
        let lo = T::c(LOG_THETA_BOUNDS.0);
        let log = |v: T| if v > T::zero() { v.ln().max(lo) } else { lo };
        let mut flat: Vec<T> = hyper.theta_cont.iter().chain(&hyper.theta_int).map(|&v| log(v)).collect();
        for m in &hyper.theta_cat {
            for (i, &v) in m.values().iter().enumerate() {
                flat.push(if self.is_log_entry(m.levels(), i) { log(v) } else { v });
            }
        }
        Ok(flat)
    }
}
