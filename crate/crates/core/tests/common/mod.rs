#![allow(dead_code)]

use nalgebra::DMatrix;
use otsm::{BlockDims, Point, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random point on the Stiefel manifold via QR of a Gaussian matrix.
pub fn random_stiefel(rng: &mut ChaCha8Rng, d: usize, r: usize) -> DMatrix<f64> {
    let q = gaussian(rng, d, r).qr().q();
    q.columns(0, r).into_owned()
}

pub fn random_point(rng: &mut ChaCha8Rng, dims: &BlockDims) -> Point {
    let blocks = dims
        .dims()
        .iter()
        .map(|&d| random_stiefel(rng, d, dims.rank()))
        .collect();
    Point::new(dims.clone(), blocks).unwrap()
}

/// Dense Gaussian couplings on every pair.
pub fn random_problem(rng: &mut ChaCha8Rng, dims: &BlockDims) -> Problem {
    let m = dims.num_blocks();
    let mut p = Problem::new(dims.clone());
    for i in 0..m {
        for j in i + 1..m {
            let s = gaussian(rng, dims.dim(i), dims.dim(j));
            p.set_coupling(i, j, s).unwrap();
        }
    }
    p
}

/// Scalar problem with `d_i = r = 1` and couplings `s[(i, j)]`.
pub fn sign_problem(s: &[(usize, usize, f64)], m: usize) -> Problem {
    let dims = BlockDims::uniform(m, 1, 1).unwrap();
    let mut p = Problem::new(dims);
    for &(i, j, v) in s {
        p.set_coupling(i, j, DMatrix::from_element(1, 1, v))
            .unwrap();
    }
    p
}

/// Value of a sign problem at `x ∈ {±1}^m`, evaluated from the coupling list.
pub fn sign_value(s: &[(usize, usize, f64)], x: &[f64]) -> f64 {
    s.iter().map(|&(i, j, v)| v * x[i] * x[j]).sum()
}

/// Best value of a sign problem by exhaustive search.
pub fn sign_brute_force(s: &[(usize, usize, f64)], m: usize) -> f64 {
    (0..1u32 << m)
        .map(|mask| {
            let x: Vec<f64> = (0..m)
                .map(|k| if mask >> k & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            sign_value(s, &x)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
