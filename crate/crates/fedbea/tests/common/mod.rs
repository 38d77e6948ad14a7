//! Shared helpers for the integration suites: independent oracles (dense
//! Jacobi eigensolver, damped Newton refiner) and suite builders. Everything
//! here stays independent of the library code paths it is used to check.

#![allow(dead_code)]
// index-based loops mirror the textbook rotation formulas
#![allow(clippy::needless_range_loop)]

use fedbea::models::{mean_full_hessian, Objective};
use fedbea::param::ParamVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded probe point with entries in [-0.5, 0.5].
pub fn probe_point(dim: usize, seed: u64) -> ParamVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ParamVector::new((0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect())
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
/// Independent of the library's power iteration.
pub fn jacobi_eigenvalues(matrix: &fedbea::SquareMatrix) -> Vec<f64> {
    let n = matrix.dim();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| matrix.get(i, j)).collect())
        .collect();
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-18 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Gaussian elimination with partial pivoting for tiny Newton systems.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        for row in (col + 1)..n {
            let f = a[row][col] / diag;
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Damped Newton refinement to a near-exact stationary point of a smooth
/// convex objective with `d <= 64`. Test-harness trainer only.
pub fn newton_refine<O: Objective>(
    obj: &O,
    batch: &O::Batch,
    mut w: ParamVector,
    grad_tol: f64,
    max_iters: usize,
) -> ParamVector {
    let d = w.dim();
    for _ in 0..max_iters {
        let g = obj.grad(batch, &w).unwrap();
        if g.norm_l2() <= grad_tol {
            break;
        }
        let h = mean_full_hessian(obj, std::slice::from_ref(batch), &w).unwrap();
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| h.get(i, j) + if i == j { 1e-12 } else { 0.0 })
                    .collect()
            })
            .collect();
        let step = ParamVector::new(solve_dense(rows, g.as_slice().to_vec()));
        let l0 = obj.loss(batch, &w).unwrap();
        let mut t = 1.0;
        loop {
            let cand = w.axpy(-t, &step);
            if obj.loss(batch, &cand).unwrap() <= l0 || t < 1e-8 {
                w = cand;
                break;
            }
            t /= 2.0;
        }
    }
    w
}
