mod common;

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use otsm::{
    build_maxdiff, build_ols, build_procrustes, certify, dual_upper_bound, hard_example, objective,
    solve, synth_procrustes, BlockDims, CertifyOptions, Config, OlsData, Point, Verdict, ViewData,
};
use proptest::prelude::*;

#[test]
fn maxdiff_couplings_are_off_diagonal_blocks_of_the_gram_matrix() {
    let mut rng = common::rng(1);
    let views: Vec<_> = [2, 3, 4]
        .iter()
        .map(|&d| common::gaussian(&mut rng, 10, d))
        .collect();
    let mut stacked = DMatrix::zeros(10, 9);
    let mut off = 0;
    for v in &views {
        stacked.view_mut((0, off), v.shape()).copy_from(v);
        off += v.ncols();
    }
    let gram = stacked.tr_mul(&stacked);
    let p = build_maxdiff(&ViewData::new(views).unwrap(), 2).unwrap();
    let mut expected = gram.clone();
    for (i, off) in p.dims().offsets().into_iter().enumerate() {
        let d = p.dims().dim(i);
        expected.view_mut((off, off), (d, d)).fill(0.0);
    }
    assert!((p.assemble_stilde() - expected).norm() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn procrustes_discrepancy_identity(m in 2usize..5, d in 1usize..5, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let views: Vec<_> = (0..m).map(|_| common::gaussian(&mut rng, 8, d)).collect();
        let pp = build_procrustes(&ViewData::new(views).unwrap(), d).unwrap();
        let x = common::random_point(&mut rng, pp.problem.dims());
        let direct = pp.discrepancy(&x).unwrap();
        let implied = pp.discrepancy_from_objective(objective(&pp.problem, &x).unwrap());
        prop_assert!((direct - implied).abs() <= 1e-9 * (1.0 + direct));
    }
}

#[test]
fn procrustes_rejects_unequal_dimensions() {
    let views = vec![DMatrix::<f64>::zeros(4, 2), DMatrix::zeros(4, 3)];
    assert!(build_procrustes(&ViewData::new(views).unwrap(), 2).is_err());
}

#[test]
fn noiseless_procrustes_aligns_exactly() {
    let s = synth_procrustes::<f64>(4, 30, 3, 3, 0.0, 42).unwrap();
    let pp = build_procrustes(&ViewData::new(s.views.clone()).unwrap(), 3).unwrap();
    assert_eq!(pp.problem, s.problem);
    let cfg = Config {
        tol: 1e-12,
        ..Config::default()
    };
    let rep = solve(&pp.problem, &cfg).unwrap();
    assert!(pp.discrepancy(&rep.solution).unwrap() < 1e-8 * pp.offset);
    // aligned views agree up to one common rotation: A_i O_i = L R_iᵀ O_i
    let common_rot = s.rotations[0].transpose() * rep.solution.block(0);
    for (r, o) in s.rotations.iter().zip(rep.solution.blocks()) {
        assert!((r.transpose() * o - &common_rot).norm() < 1e-6);
    }
    let c = certify(&pp.problem, &rep.solution, &CertifyOptions::default()).unwrap();
    assert_eq!(c.verdict, Verdict::CertifiedGlobal);
}

#[test]
fn noiseless_ols_recovers_rotations() {
    let mut rng = common::rng(8);
    let d = 3;
    let regressors: Vec<_> = (0..3).map(|_| common::gaussian(&mut rng, 20, d)).collect();
    let truth: Vec<_> = (0..3)
        .map(|_| common::random_stiefel(&mut rng, d, d))
        .collect();
    let y = regressors
        .iter()
        .zip(&truth)
        .fold(DMatrix::zeros(20, d), |acc, (a, q)| acc + a * q);
    let ols = build_ols(OlsData::new(y, regressors).unwrap(), d).unwrap();
    let cfg = Config {
        tol: 1e-12,
        ..Config::default()
    };
    let rep = solve(&ols.problem, &cfg).unwrap();
    let rec = ols.recover(&rep.solution).unwrap();
    assert!(ols.data.criterion(&rec).unwrap() <= 1e-8);
    for (r, q) in rec.iter().zip(&truth) {
        assert!((r - q).norm() < 1e-4);
    }
}

#[test]
fn ols_couplings_are_negated_cross_products() {
    let mut rng = common::rng(9);
    let a = common::gaussian(&mut rng, 6, 2);
    let y = common::gaussian(&mut rng, 6, 2);
    let ols = build_ols(OlsData::new(y.clone(), vec![a.clone()]).unwrap(), 2).unwrap();
    assert_eq!(ols.problem.num_blocks(), 2);
    assert!((ols.problem.coupling(0, 1).unwrap() + a.tr_mul(&y)).norm() < 1e-14);
}

#[test]
fn scalar_hard_example_optimum_is_one() {
    // d = r = 1: enumerate all sign patterns of −x1x2 + x1x3 + x2x3
    let s = [(0, 1, -1.0), (0, 2, 1.0), (1, 2, 1.0)];
    assert_eq!(common::sign_brute_force(&s, 3), 1.0);
    let p = hard_example::<f64>(1, 1).unwrap();
    let rep = solve(&p, &Config::default()).unwrap();
    assert_relative_eq!(rep.final_objective(), 1.0, epsilon = 1e-10);
}

#[test]
fn hard_example_feasible_triple_meets_dual_bound() {
    // O_1 = [I; 0], O_2 = [−½I; (√3/2)I], O_3 = O_1 + O_2 on d = 2r
    for r in 1..4 {
        let d = 2 * r;
        let p = hard_example::<f64>(d, r).unwrap();
        let eye = DMatrix::<f64>::identity(r, r);
        let mut o1 = DMatrix::zeros(d, r);
        o1.view_mut((0, 0), (r, r)).copy_from(&eye);
        let mut o2 = DMatrix::zeros(d, r);
        o2.view_mut((0, 0), (r, r)).copy_from(&(&eye * -0.5));
        o2.view_mut((r, 0), (r, r))
            .copy_from(&(&eye * (0.75f64).sqrt()));
        let o3 = &o1 + &o2;
        let x = Point::new(BlockDims::uniform(3, d, r).unwrap(), vec![o1, o2, o3]).unwrap();
        let f = objective(&p, &x).unwrap();
        assert_relative_eq!(f, 1.5 * r as f64, epsilon = 1e-12);
        assert_relative_eq!(dual_upper_bound(&p).unwrap(), f, epsilon = 1e-10);
        let c = certify(&p, &x, &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::CertifiedGlobal);
    }
}
