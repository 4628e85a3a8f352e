//! Correlation kernels for continuous, integer and categorical inputs.
//!
//! Every categorical kernel is expressed through a level-wise form: a
//! per-variable symmetric hyperparameter matrix Θ_i is mapped to a matrix
//! Φ(Θ_i), and the correlation between two levels is
//! `κ(2Φ_rs) κ(Φ_rr) κ(Φ_ss)` with κ = exp(-·) for the exponential kinds
//! (GD, CR, EHH, FE) and κ = identity for HH.

mod categorical;
mod hypersphere;
mod hyper;

pub use categorical::{categorical_matrix, level_correlation, phi_transform, recover_angles_from_correlation};
pub use hyper::{HyperparameterSet, SymmetricHyperMatrix, DEFAULT_EPSILON};
pub use hypersphere::{hypersphere_from_angles, hypersphere_lower_triangular};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::{abs_pow, Scalar};
use crate::space::{DesignSpace, MixedPoint};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategoricalKernelKind {
    /// Gower distance: one θ per variable.
    Gd,
    /// Continuous relaxation: one θ per level.
    Cr,
    /// Exponential homoscedastic hypersphere: L(L-1)/2 angles.
    Ehh,
    /// Fully exponential: EHH angles plus per-level θ.
    Fe,
    /// Homoscedastic hypersphere: correlation matrix C Cᵀ directly.
    Hh,
}

impl CategoricalKernelKind {
    pub const ALL: [CategoricalKernelKind; 5] = [Self::Gd, Self::Cr, Self::Ehh, Self::Fe, Self::Hh];

    /// Number of hyperparameters this kind spends on a variable with `levels` levels.
    pub fn hyperparameter_count(self, levels: usize) -> usize {
        match self {
            Self::Gd => 1,
            Self::Cr => levels,
            Self::Ehh | Self::Hh => levels * (levels.saturating_sub(1)) / 2,
            Self::Fe => levels * (levels + 1) / 2,
        }
    }

    /// κ = exp(-·) for all kinds but HH.
    pub fn is_exponential(self) -> bool {
        !matches!(self, Self::Hh)
    }

    pub fn has_angles(self) -> bool {
        matches!(self, Self::Ehh | Self::Fe | Self::Hh)
    }

    pub fn has_diagonal(self) -> bool {
        matches!(self, Self::Gd | Self::Cr | Self::Fe)
    }

    /// Upper bound of the angle search interval, π/2 or π for HH.
    pub fn angle_upper_bound(self) -> f64 {
        match self {
            Self::Hh => std::f64::consts::PI,
            _ => std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Gd => "gd",
            Self::Cr => "cr",
            Self::Ehh => "ehh",
            Self::Fe => "fe",
            Self::Hh => "hh",
        }
    }
}

impl fmt::Display for CategoricalKernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name().to_uppercase())
    }
}

impl FromStr for CategoricalKernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown kernel kind {s:?}")))
    }
}

/// Exponent p of the continuous and integer kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ExponentPower {
    /// p = 1, absolute exponential.
    Absolute,
    /// p = 2, squared exponential.
    Squared,
}

impl ExponentPower {
    pub fn value(self) -> u8 {
        match self {
            Self::Absolute => 1,
            Self::Squared => 2,
        }
    }
}

impl TryFrom<u8> for ExponentPower {
    type Error = Error;

    fn try_from(p: u8) -> Result<Self> {
        match p {
            1 => Ok(Self::Absolute),
            2 => Ok(Self::Squared),
            other => Err(Error::InvalidSpec(format!("exponent p must be 1 or 2, got {other}"))),
        }
    }
}

impl From<ExponentPower> for u8 {
    fn from(p: ExponentPower) -> u8 {
        p.value()
    }
}

/// Π_j exp(-θ_j |x_r,j - x_s,j|^p).
pub fn continuous_kernel<T: Scalar>(xr: &[T], xs: &[T], theta: &[T], p: ExponentPower) -> Result<T> {
    if xr.len() != xs.len() || xr.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            found: if xr.len() != theta.len() { xr.len() } else { xs.len() },
        });
    }
    let mut s = T::zero();
    for ((&a, &b), &t) in xr.iter().zip(xs).zip(theta) {
        s += t * abs_pow(a - b, p.value());
    }
    Ok((-s).exp())
}

/// Same exponential kernel on relaxed integer coordinates.
pub fn integer_kernel<T: Scalar>(zr: &[T], zs: &[T], theta: &[T], p: ExponentPower) -> Result<T> {
    continuous_kernel(zr, zs, theta, p)
}

/// 0 when the levels agree, 1 otherwise.
pub fn hamming_score(lr: usize, ls: usize) -> u8 {
    u8::from(lr != ls)
}

/// Total number of hyperparameters, n + m + Σ_i count(kind, L_i).
pub fn hyperparameter_count(space: &DesignSpace, kind: CategoricalKernelKind) -> usize {
    space.n_continuous()
        + space.n_integer()
        + space
            .level_counts()
            .into_iter()
            .map(|l| kind.hyperparameter_count(l))
            .sum::<usize>()
}

/// Kernel with the categorical matrices R_i precomputed.
#[derive(Clone, Debug)]
pub struct KernelEvaluator<T> {
    theta_cont: Vec<T>,
    theta_int: Vec<T>,
    cat: Vec<Mat<T>>,
    p: ExponentPower,
}

impl<T: Scalar> KernelEvaluator<T> {
    pub fn new(hyper: &HyperparameterSet<T>, p: ExponentPower) -> Result<Self> {
        let cat = hyper
            .theta_cat
            .iter()
            .map(|m| categorical_matrix(hyper.kind, m, hyper.epsilon))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            theta_cont: hyper.theta_cont.clone(),
            theta_int: hyper.theta_int.clone(),
            cat,
            p,
        })
    }

    /// Categorical correlation matrices R_i.
    pub fn categorical_matrices(&self) -> &[Mat<T>] {
        &self.cat
    }

    pub fn exponent(&self) -> ExponentPower {
        self.p
    }

    pub fn eval(&self, wr: &MixedPoint<T>, ws: &MixedPoint<T>) -> Result<T> {
        if wr.levels.len() != self.cat.len() || ws.levels.len() != self.cat.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cat.len(),
                found: wr.levels.len().min(ws.levels.len()),
            });
        }
        let mut k = continuous_kernel(&wr.continuous, &ws.continuous, &self.theta_cont, self.p)?
            * integer_kernel(&wr.integer, &ws.integer, &self.theta_int, self.p)?;
        for (i, r) in self.cat.iter().enumerate() {
            let (a, b) = (wr.level_index(i), ws.level_index(i));
            if a >= r.rows() || b >= r.rows() {
                return Err(Error::LevelOutOfRange {
                    index: i,
                    level: a.max(b) + 1,
                });
            }
            k *= r[(a, b)];
        }
        Ok(k)
    }
}

/// k(w_r, w_s) = k_cont · k_int · Π_i [R_i]_{ℓ_r, ℓ_s}.
pub fn mixed_kernel<T: Scalar>(
    wr: &MixedPoint<T>,
    ws: &MixedPoint<T>,
    hyper: &HyperparameterSet<T>,
    p: ExponentPower,
) -> Result<T> {
    KernelEvaluator::new(hyper, p)?.eval(wr, ws)
}
