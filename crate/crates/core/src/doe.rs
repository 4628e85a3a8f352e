//! Latin hypercube designs and full-factorial validation grids.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`),
//! consumed variable by variable in design-space order:
//!
//! * continuous / integer: a Fisher–Yates shuffle of the n bins, then one
//!   uniform draw per point for its offset inside the bin; integers are the
//!   rounded unscaled value;
//! * categorical: a shuffle of the levels, cycled to length n, then a
//!   shuffle of that column.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{DesignSpace, MixedPoint, VariableSpec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

/// Default cap on the number of grid points.
pub const DEFAULT_GRID_CAP: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum DoeMethod {
    Lhs,
    /// One count per continuous or integer variable, in design-space order.
    Grid { points_per_dim: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoeRequest {
    pub space: DesignSpace,
    pub n_points: usize,
    pub seed: u64,
    pub method: DoeMethod,
}

impl DoeRequest {
    pub fn generate<T: Scalar>(&self) -> Result<Vec<MixedPoint<T>>> {
        match &self.method {
            DoeMethod::Lhs => {
                if self.n_points == 0 {
                    return Err(Error::InvalidSpec("n_points must be at least 1".into()));
                }
                lhs(&self.space, self.n_points, self.seed)
            }
            DoeMethod::Grid { points_per_dim } => grid(&self.space, points_per_dim),
        }
    }
}

/// Latin hypercube sample of `n_points` points.
pub fn lhs<T: Scalar>(space: &DesignSpace, n_points: usize, seed: u64) -> Result<Vec<MixedPoint<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_points;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(space.dim());
    for v in space.variables() {
        let col = match v {
            VariableSpec::Continuous { lower, upper, .. } => stratified(&mut rng, n)
                .into_iter()
                .map(|u| (lower + u * (upper - lower)).clamp(*lower, *upper))
                .collect(),
            VariableSpec::Integer { lower, upper, .. } => {
                let (lo, hi) = (*lower as f64, *upper as f64);
                stratified(&mut rng, n)
                    .into_iter()
                    .map(|u| (lo + u * (hi - lo)).round().clamp(lo, hi))
                    .collect()
            }
            VariableSpec::Categorical { levels, .. } => {
                let mut order: Vec<usize> = (1..=levels.len()).collect();
                order.shuffle(&mut rng);
                let mut col: Vec<f64> = (0..n).map(|i| order[i % order.len()] as f64).collect();
                col.shuffle(&mut rng);
                col
            }
        };
        columns.push(col);
    }
    (0..n)
        .map(|i| {
            let row: Vec<f64> = columns.iter().map(|c| c[i]).collect();
            space.point_from_ordered(&row)
        })
        .collect()
}

/// One value in each of the n equal bins of [0, 1], in shuffled order.
fn stratified(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut bins: Vec<usize> = (0..n).collect();
    bins.shuffle(rng);
    bins.into_iter()
        .map(|b| ((b as f64 + rng.gen::<f64>()) / n as f64).min(1.0))
        .collect()
}

/// `count` evenly spaced values from `lo` to `hi`; a single value sits at `lo`.
fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            }
        })
        .collect()
}

/// Per-variable value lists of the grid, in design-space order.
fn grid_axes(space: &DesignSpace, points_per_dim: &[usize]) -> Result<Vec<Vec<f64>>> {
    let want = space.n_continuous() + space.n_integer();
    if points_per_dim.len() != want {
        return Err(Error::DimensionMismatch {
            expected: want,
            found: points_per_dim.len(),
        });
    }
    if points_per_dim.contains(&0) {
        return Err(Error::InvalidSpec("grid counts must be at least 1".into()));
    }
    let mut counts = points_per_dim.iter();
    Ok(space
        .variables()
        .iter()
        .map(|v| match v {
            VariableSpec::Continuous { lower, upper, .. } => linspace(*lower, *upper, *counts.next().expect("count checked")),
            VariableSpec::Integer { lower, upper, .. } => {
                let count = *counts.next().expect("count checked");
                let all = (upper - lower + 1) as usize;
                if count >= all {
                    (*lower..=*upper).map(|z| z as f64).collect()
                } else {
                    let mut vals: Vec<f64> = linspace(*lower as f64, *upper as f64, count)
                        .into_iter()
                        .map(f64::round)
                        .collect();
                    vals.dedup();
                    vals
                }
            }
            VariableSpec::Categorical { levels, .. } => (1..=levels.len()).map(|l| l as f64).collect(),
        })
        .collect())
}

/// Number of points [`grid`] would produce.
pub fn grid_size(space: &DesignSpace, points_per_dim: &[usize]) -> Result<u128> {
    Ok(grid_axes(space, points_per_dim)?
        .iter()
        .map(|a| a.len() as u128)
        .product())
}

/// Cartesian grid with the last variable varying fastest.
pub fn grid<T: Scalar>(space: &DesignSpace, points_per_dim: &[usize]) -> Result<Vec<MixedPoint<T>>> {
    grid_with_cap(space, points_per_dim, DEFAULT_GRID_CAP)
}

pub fn grid_with_cap<T: Scalar>(space: &DesignSpace, points_per_dim: &[usize], cap: u128) -> Result<Vec<MixedPoint<T>>> {
    let axes = grid_axes(space, points_per_dim)?;
    let size: u128 = axes.iter().map(|a| a.len() as u128).product();
    if size > cap {
        return Err(Error::SizeOverflow { size, cap });
    }
    let mut idx = vec![0usize; axes.len()];
    let mut out = Vec::with_capacity(size as usize);
    for _ in 0..size {
        let row: Vec<f64> = idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect();
        out.push(space.point_from_ordered(&row)?);
        for d in (0..axes.len()).rev() {
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(out)
}

/// Writes a design as CSV (no target column).
pub fn write_design<W: Write, T: Scalar>(out: W, space: &DesignSpace, points: &[MixedPoint<T>]) -> Result<()> {
    space.write_points(out, points, None)
}
