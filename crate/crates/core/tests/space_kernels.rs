mod common;

use common::*;
use mixgp::kernels::{
    categorical_matrix, hypersphere_lower_triangular, mixed_kernel, recover_angles_from_correlation, DEFAULT_EPSILON,
};
use mixgp::{DesignSpace, ExponentPower, MixedPoint, SymmetricHyperMatrix, VariableSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn one_hot_has_one_one_per_block(seed in any::<u64>()) {
        let mut r = rng(seed);
        let space = random_space(&mut r);
        let p = random_point(&space, &mut r);
        let v = space.one_hot_encode(&p).unwrap();
        let counts = space.level_counts();
        prop_assert_eq!(v.len(), counts.iter().sum::<usize>());
        prop_assert_eq!(v.iter().filter(|&&x| x == 1.0).count(), counts.len());
        prop_assert_eq!(v.iter().filter(|&&x| x == 0.0).count(), v.len() - counts.len());

        // argmax of each block gives the level back
        let mut offset = 0;
        for (k, &l) in counts.iter().enumerate() {
            let block = &v[offset..offset + l];
            let arg = (0..l).max_by(|&a, &b| block[a].total_cmp(&block[b])).unwrap();
            prop_assert_eq!(arg + 1, p.levels[k]);
            offset += l;
        }
    }

    #[test]
    fn normalize_is_monotone_and_lands_in_unit_box(seed in any::<u64>()) {
        let mut r = rng(seed);
        let space = random_space(&mut r);
        let (a, b) = (random_point(&space, &mut r), random_point(&space, &mut r));
        let (na, nb) = (space.normalize(&a).unwrap(), space.normalize(&b).unwrap());
        let pairs = a.continuous.iter().zip(&b.continuous).zip(na.continuous.iter().zip(&nb.continuous))
            .chain(a.integer.iter().zip(&b.integer).zip(na.integer.iter().zip(&nb.integer)));
        for ((x, y), (nx, ny)) in pairs {
            prop_assert!((0.0..=1.0).contains(nx) && (0.0..=1.0).contains(ny));
            prop_assert_eq!(x.partial_cmp(y), nx.partial_cmp(ny));
        }
        prop_assert_eq!(&na.levels, &a.levels);
    }

    #[test]
    fn normalize_is_identity_on_unit_spaces(xs in prop::collection::vec(0.0f64..=1.0, 1..5), level in 1usize..4) {
        let mut vars: Vec<VariableSpec> =
            (0..xs.len()).map(|i| VariableSpec::continuous(format!("x{i}"), 0.0, 1.0)).collect();
        vars.push(VariableSpec::categorical_count("c", 3));
        let space = DesignSpace::new(vars).unwrap();
        let p = MixedPoint::new(xs, vec![], vec![level]);
        let once = space.normalize(&p).unwrap();
        prop_assert_eq!(&once, &p);
        prop_assert_eq!(space.normalize(&once).unwrap(), once);
    }

    #[test]
    fn hypersphere_rows_are_unit_vectors(seed in any::<u64>(), levels in 2usize..10, half in any::<bool>()) {
        let mut r = rng(seed);
        let kind = if half { Kind::Ehh } else { Kind::Hh };
        let theta = random_theta(kind, levels, &mut r);
        let c = hypersphere_lower_triangular(&theta);
        for k in 0..levels {
            let n: f64 = c.row(k).iter().map(|v| v * v).sum();
            prop_assert!((n - 1.0).abs() < 1e-14, "row {} norm² {}", k, n);
            prop_assert!(c.row(k)[k + 1..].iter().all(|&v| v == 0.0));
        }
        let g = c.gram();
        let lower = if half { -1e-15 } else { -1.0 - 1e-15 };
        for a in 0..levels {
            prop_assert!((g[(a, a)] - 1.0).abs() < 1e-14);
            for b in 0..levels {
                prop_assert!(g[(a, b)] >= lower && g[(a, b)] <= 1.0 + 1e-15, "gram ({}, {}) = {}", a, b, g[(a, b)]);
            }
        }
    }

    #[test]
    fn categorical_matrices_are_valid_correlations(seed in any::<u64>(), levels in 2usize..14, k in 0usize..5) {
        let mut r = rng(seed);
        let kind = Kind::ALL[k];
        let theta = random_theta(kind, levels, &mut r);
        let m = categorical_matrix(kind, &theta, DEFAULT_EPSILON).unwrap();
        prop_assert!(m.is_symmetric());
        let lo = if kind == Kind::Hh { -1.0 } else { 0.0 };
        for a in 0..levels {
            prop_assert_eq!(m[(a, a)], 1.0);
            for b in 0..levels {
                prop_assert!(m[(a, b)] >= lo && m[(a, b)] <= 1.0);
            }
        }
        if kind == Kind::Ehh {
            prop_assert!(m.as_slice().iter().all(|&v| v >= DEFAULT_EPSILON));
        }
        if kind != Kind::Hh {
            prop_assert!(min_eigenvalue(&m) > 0.0);
        }
    }

    #[test]
    fn gower_is_relaxation_with_equal_diagonal(seed in any::<u64>(), levels in 2usize..14) {
        let theta = log_uniform(&mut rng(seed));
        let gd = categorical_matrix(Kind::Gd, &SymmetricHyperMatrix::gower(levels, theta).unwrap(), DEFAULT_EPSILON).unwrap();
        let cr_theta = SymmetricHyperMatrix::relaxed(vec![theta / 2.0; levels]).unwrap();
        let cr = categorical_matrix(Kind::Cr, &cr_theta, DEFAULT_EPSILON).unwrap();
        prop_assert!(max_abs_diff(&gd, &cr) <= 1e-12);
    }

    #[test]
    fn full_exponential_with_zero_angles_is_relaxation(seed in any::<u64>(), levels in 2usize..14) {
        let mut r = rng(seed);
        let diag: Vec<f64> = (0..levels).map(|_| log_uniform(&mut r)).collect();
        let cr = categorical_matrix(Kind::Cr, &SymmetricHyperMatrix::relaxed(diag.clone()).unwrap(), DEFAULT_EPSILON).unwrap();
        let fe_theta = SymmetricHyperMatrix::full(&diag, &vec![0.0; levels * (levels - 1) / 2]).unwrap();
        let phi = mixgp::kernels::phi_transform(Kind::Fe, &fe_theta, DEFAULT_EPSILON).unwrap();
        for a in 0..levels {
            for b in 0..levels {
                if a != b {
                    prop_assert_eq!(phi[(a, b)], 0.0);
                }
            }
        }
        let fe = categorical_matrix(Kind::Fe, &fe_theta, DEFAULT_EPSILON).unwrap();
        prop_assert!(max_abs_diff(&fe, &cr) <= 1e-12);
    }

    #[test]
    fn exponential_hypersphere_round_trips(seed in any::<u64>(), levels in 2usize..10) {
        let theta = interior_ehh(levels, &mut rng(seed));
        let t = categorical_matrix(Kind::Ehh, &theta, DEFAULT_EPSILON).unwrap();
        let back = recover_angles_from_correlation(&t, DEFAULT_EPSILON).unwrap();
        let t2 = categorical_matrix(Kind::Ehh, &back, DEFAULT_EPSILON).unwrap();
        prop_assert!(max_abs_diff(&t, &t2) <= 1e-10);
        // The recovered angles, read as HH, give the Gram matrix 1 − log T / log ε.
        let hh = SymmetricHyperMatrix::hypersphere(Kind::Hh, levels, back.values()).unwrap();
        let g = categorical_matrix(Kind::Hh, &hh, DEFAULT_EPSILON).unwrap();
        for a in 0..levels {
            for b in 0..a {
                let want = 1.0 - t[(a, b)].ln() / DEFAULT_EPSILON.ln();
                prop_assert!((g[(a, b)] - want).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn categorical_part_ignores_the_exponent(seed in any::<u64>(), k in 0usize..5) {
        let mut r = rng(seed);
        let space = random_space(&mut r);
        let h = random_hyper(&space, Kind::ALL[k], &mut r);
        let one = mixgp::kernels::KernelEvaluator::new(&h, ExponentPower::Absolute).unwrap();
        let two = mixgp::kernels::KernelEvaluator::new(&h, ExponentPower::Squared).unwrap();
        for (a, b) in one.categorical_matrices().iter().zip(two.categorical_matrices()) {
            prop_assert!(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn mixed_kernel_is_symmetric_with_unit_diagonal(seed in any::<u64>(), k in 0usize..5, squared in any::<bool>()) {
        let mut r = rng(seed);
        let space = random_space(&mut r);
        let h = random_hyper(&space, Kind::ALL[k], &mut r);
        let p = if squared { ExponentPower::Squared } else { ExponentPower::Absolute };
        let a = space.normalize(&random_point(&space, &mut r)).unwrap();
        let b = space.normalize(&random_point(&space, &mut r)).unwrap();
        prop_assert_eq!(mixed_kernel(&a, &b, &h, p).unwrap(), mixed_kernel(&b, &a, &h, p).unwrap());
        prop_assert_eq!(mixed_kernel(&a, &a, &h, p).unwrap(), 1.0);
    }
}

#[test]
fn out_of_range_level_is_rejected() {
    let space = DesignSpace::new(vec![VariableSpec::categorical_count("c", 3)]).unwrap();
    assert!(space.one_hot_encode(&MixedPoint::<f64>::categorical_only(vec![4])).is_err());
    assert!(space.one_hot_encode(&MixedPoint::<f64>::categorical_only(vec![0])).is_err());
}

#[test]
fn hh_can_be_negative() {
    let mut r = rng(7);
    let found = (0..50).any(|_| {
        let t = random_theta(Kind::Hh, 4, &mut r);
        let m = categorical_matrix(Kind::Hh, &t, DEFAULT_EPSILON).unwrap();
        m.as_slice().iter().any(|&v| v < 0.0)
    });
    assert!(found);
}
