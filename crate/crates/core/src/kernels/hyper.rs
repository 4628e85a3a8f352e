use super::CategoricalKernelKind;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::space::DesignSpace;
use serde::{Deserialize, Serialize};

/// exp(-20) ≈ 2.06e-9, the smallest correlation the exponential kinds model.
pub const DEFAULT_EPSILON: f64 = 2.061_153_622_438_558e-9;

/// Hyperparameter matrix Θ_i of one categorical variable.
///
/// Only the entries the kind uses are stored, packed in row-major
/// lower-triangle order:
///
/// | kind    | values                                        |
/// |---------|-----------------------------------------------|
/// | GD      | `[θ]` (Θ_i = θ/2 · I)                          |
/// | CR      | `[Θ_11, …, Θ_LL]`                              |
/// | EHH, HH | `[Θ_21, Θ_31, Θ_32, Θ_41, …]` (angles)         |
/// | FE      | `[Θ_11, Θ_21, Θ_22, Θ_31, Θ_32, Θ_33, …]`      |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricHyperMatrix<T> {
    kind: CategoricalKernelKind,
    levels: usize,
    values: Vec<T>,
}

impl<T: Scalar> SymmetricHyperMatrix<T> {
    pub fn new(kind: CategoricalKernelKind, levels: usize, values: Vec<T>) -> Result<Self> {
        if levels < 2 {
            return Err(Error::ShapeMismatch(format!("{levels} levels, need at least 2")));
        }
        let want = kind.hyperparameter_count(levels);
        if values.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "{kind} with {levels} levels takes {want} values, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch(format!("non-finite entry {v}")));
        }
        let m = Self { kind, levels, values };
        if kind.has_diagonal() && (0..levels).any(|j| m.diag(j) < T::zero()) {
            return Err(Error::ShapeMismatch("diagonal entries must be non-negative".into()));
        }
        Ok(m)
    }

    /// GD matrix θ/2 · I.
    pub fn gower(levels: usize, theta: T) -> Result<Self> {
        Self::new(CategoricalKernelKind::Gd, levels, vec![theta])
    }

    /// CR diagonal matrix.
    pub fn relaxed(diag: Vec<T>) -> Result<Self> {
        Self::new(CategoricalKernelKind::Cr, diag.len(), diag)
    }

    /// EHH or HH matrix from its strictly-lower angles in row-major order.
    pub fn hypersphere(kind: CategoricalKernelKind, levels: usize, angles: &[T]) -> Result<Self> {
        if !matches!(kind, CategoricalKernelKind::Ehh | CategoricalKernelKind::Hh) {
            return Err(Error::ShapeMismatch(format!("{kind} is not a pure-angle kind")));
        }
        Self::new(kind, levels, angles.to_vec())
    }

    /// FE matrix from its diagonal and strictly-lower angles.
    pub fn full(diag: &[T], angles: &[T]) -> Result<Self> {
        let levels = diag.len();
        if angles.len() != levels * levels.saturating_sub(1) / 2 {
            return Err(Error::ShapeMismatch("FE angle count".into()));
        }
        let mut values = Vec::with_capacity(levels * (levels + 1) / 2);
        let mut a = angles.iter();
        for (k, &d) in diag.iter().enumerate() {
            for _ in 0..k {
                values.push(*a.next().expect("angle count checked"));
            }
            values.push(d);
        }
        Self::new(CategoricalKernelKind::Fe, levels, values)
    }

    pub fn kind(&self) -> CategoricalKernelKind {
        self.kind
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Index into `values` of entry (k, j), k ≥ j, for FE.
    #[inline]
    fn fe_index(k: usize, j: usize) -> usize {
        k * (k + 1) / 2 + j
    }

    /// Index of angle (k, j), k > j, for EHH/HH.
    #[inline]
    fn angle_index(k: usize, j: usize) -> usize {
        k * (k - 1) / 2 + j
    }

    /// Diagonal entry Θ_jj (θ/2 for GD, 0 for the pure-angle kinds).
    pub fn diag(&self, j: usize) -> T {
        match self.kind {
            CategoricalKernelKind::Gd => self.values[0] / (T::one() + T::one()),
            CategoricalKernelKind::Cr => self.values[j],
            CategoricalKernelKind::Fe => self.values[Self::fe_index(j, j)],
            CategoricalKernelKind::Ehh | CategoricalKernelKind::Hh => T::zero(),
        }
    }

    /// Off-diagonal entry Θ_kj = Θ_jk (0 for GD and CR).
    pub fn angle(&self, k: usize, j: usize) -> T {
        let (k, j) = if k > j { (k, j) } else { (j, k) };
        if k == j {
            return self.diag(k);
        }
        match self.kind {
            CategoricalKernelKind::Gd | CategoricalKernelKind::Cr => T::zero(),
            CategoricalKernelKind::Fe => self.values[Self::fe_index(k, j)],
            CategoricalKernelKind::Ehh | CategoricalKernelKind::Hh => self.values[Self::angle_index(k, j)],
        }
    }

    /// The full symmetric Θ_i.
    pub fn to_dense(&self) -> Mat<T> {
        Mat::from_fn(self.levels, self.levels, |k, j| self.angle(k, j))
    }
}

/// Θ = {θ_cont, θ_int, θ_cat} for one kernel kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperparameterSet<T> {
    pub kind: CategoricalKernelKind,
    pub epsilon: T,
    pub theta_cont: Vec<T>,
    pub theta_int: Vec<T>,
    pub theta_cat: Vec<SymmetricHyperMatrix<T>>,
}

impl<T: Scalar> HyperparameterSet<T> {
    pub fn new(
        kind: CategoricalKernelKind,
        theta_cont: Vec<T>,
        theta_int: Vec<T>,
        theta_cat: Vec<SymmetricHyperMatrix<T>>,
    ) -> Self {
        Self {
            kind,
            epsilon: T::c(DEFAULT_EPSILON),
            theta_cont,
            theta_int,
            theta_cat,
        }
    }

    pub fn with_epsilon(mut self, epsilon: T) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Number of free values, n + m + Σ count(kind, L_i).
    pub fn len(&self) -> usize {
        self.theta_cont.len() + self.theta_int.len() + self.theta_cat.iter().map(|m| m.values().len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks shapes against a design space.
    pub fn check_space(&self, space: &DesignSpace) -> Result<()> {
        let mismatch = |what: &str, e: usize, f: usize| {
            Err(Error::ShapeMismatch(format!("{what}: expected {e}, got {f}")))
        };
        if self.theta_cont.len() != space.n_continuous() {
            return mismatch("continuous θ", space.n_continuous(), self.theta_cont.len());
        }
        if self.theta_int.len() != space.n_integer() {
            return mismatch("integer θ", space.n_integer(), self.theta_int.len());
        }
        let levels = space.level_counts();
        if self.theta_cat.len() != levels.len() {
            return mismatch("categorical matrices", levels.len(), self.theta_cat.len());
        }
        for (m, &l) in self.theta_cat.iter().zip(&levels) {
            if m.levels() != l || m.kind() != self.kind {
                return Err(Error::ShapeMismatch(format!(
                    "categorical matrix {} with {} levels for a {}-level variable under {}",
                    m.kind(),
                    m.levels(),
                    l,
                    self.kind
                )));
            }
        }
        if !(self.epsilon > T::zero() && self.epsilon < T::one()) {
            return Err(Error::ShapeMismatch("epsilon must lie in (0, 1)".into()));
        }
        if self.theta_cont.iter().chain(&self.theta_int).any(|t| !(*t >= T::zero()) || !t.is_finite()) {
            return Err(Error::ShapeMismatch("θ entries must be finite and non-negative".into()));
        }
        Ok(())
    }
}
