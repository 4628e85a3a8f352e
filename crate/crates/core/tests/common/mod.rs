#![allow(dead_code)]

use mixgp::gp::LOG_THETA_BOUNDS;
use mixgp::{CategoricalKernelKind, DesignSpace, Hyperparameters, Matrix, Point, SymmetricHyperMatrix, VariableSpec};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

pub type Kind = CategoricalKernelKind;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// exp(U(ln-bounds)), the same range the fit searches.
pub fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(LOG_THETA_BOUNDS.0..LOG_THETA_BOUNDS.1).exp()
}

pub fn random_theta(kind: Kind, levels: usize, rng: &mut ChaCha8Rng) -> SymmetricHyperMatrix<f64> {
    let n_angles = levels * (levels - 1) / 2;
    let angle_hi = kind.angle_upper_bound();
    let mut angles = || (0..n_angles).map(|_| rng.gen_range(0.0..angle_hi)).collect::<Vec<f64>>();
    match kind {
        Kind::Gd => SymmetricHyperMatrix::gower(levels, log_uniform(rng)),
        Kind::Cr => SymmetricHyperMatrix::relaxed((0..levels).map(|_| log_uniform(rng)).collect()),
        Kind::Ehh | Kind::Hh => {
            let a = angles();
            SymmetricHyperMatrix::hypersphere(kind, levels, &a)
        }
        Kind::Fe => {
            let a = angles();
            let d: Vec<f64> = (0..levels).map(|_| log_uniform(rng)).collect();
            SymmetricHyperMatrix::full(&d, &a)
        }
    }
    .unwrap()
}

/// Random space with 0–2 continuous, 0–1 integer and 1–2 categorical variables.
pub fn random_space(rng: &mut ChaCha8Rng) -> DesignSpace {
    let mut vars = Vec::new();
    for i in 0..rng.gen_range(0..3) {
        let lo = rng.gen_range(-5.0..5.0);
        vars.push(VariableSpec::continuous(format!("x{i}"), lo, lo + rng.gen_range(0.5..10.0)));
    }
    if rng.gen_bool(0.5) {
        let lo = rng.gen_range(-3..3);
        vars.push(VariableSpec::integer("z", lo, lo + rng.gen_range(1..6)));
    }
    for i in 0..rng.gen_range(1..3) {
        vars.push(VariableSpec::categorical_count(format!("c{i}"), rng.gen_range(2..6)));
    }
    DesignSpace::new(vars).unwrap()
}

pub fn random_point(space: &DesignSpace, rng: &mut ChaCha8Rng) -> Point {
    let mut p = Point::new(vec![], vec![], vec![]);
    for k in 0..space.n_continuous() {
        let (lo, hi) = space.continuous_spec(k).bounds().unwrap();
        p.continuous.push(rng.gen_range(lo..=hi));
    }
    for k in 0..space.n_integer() {
        let (lo, hi) = space.integer_spec(k).bounds().unwrap();
        p.integer.push(rng.gen_range(lo as i64..=hi as i64) as f64);
    }
    for l in space.level_counts() {
        p.levels.push(rng.gen_range(1..=l));
    }
    p
}

pub fn random_hyper(space: &DesignSpace, kind: Kind, rng: &mut ChaCha8Rng) -> Hyperparameters {
    let mut theta = |n: usize| (0..n).map(|_| rng.gen_range(-3.0f64..2.0).exp()).collect::<Vec<_>>();
    let (tc, ti) = (theta(space.n_continuous()), theta(space.n_integer()));
    let cat = space.level_counts().into_iter().map(|l| random_theta(kind, l, rng)).collect();
    Hyperparameters::new(kind, tc, ti, cat)
}

/// EHH angles strictly inside [0, π/2) so every correlation exceeds ε.
pub fn interior_ehh(levels: usize, rng: &mut ChaCha8Rng) -> SymmetricHyperMatrix<f64> {
    let a: Vec<f64> = (0..levels * (levels - 1) / 2).map(|_| rng.gen_range(0.0..FRAC_PI_2 - 0.05)).collect();
    SymmetricHyperMatrix::hypersphere(Kind::Ehh, levels, &a).unwrap()
}

pub fn to_nalgebra(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    to_nalgebra(m).symmetric_eigenvalues().min()
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
