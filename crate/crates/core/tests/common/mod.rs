//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use partitioned_fsi::densela::Matrix;
use partitioned_fsi::models::AffineProblem;
use rand::Rng;

/// Orthonormal basis from classical Gram-Schmidt with reorthogonalization.
pub fn random_orthogonal<R: Rng>(m: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    while basis.len() < m {
        let mut v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for q in &basis {
                let c: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Gaussian elimination with partial pivoting on row-major data.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| (0..p).map(|j| (0..m).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Affine pair whose composed map `A_s A_f` is symmetric with the given
/// spectral radius, together with the fixed point `d* = (I - A_s A_f)^-1
/// (A_s b_f + b_s)` from a direct solve.
pub struct AffineCase {
    pub m: usize,
    pub radius: f64,
    pub a_s: Vec<Vec<f64>>,
    pub a_f: Vec<Vec<f64>>,
    pub b_s: Vec<f64>,
    pub b_f: Vec<f64>,
    pub fixed_point: Vec<f64>,
}

impl AffineCase {
    pub fn random<R: Rng>(m: usize, radius: f64, rng: &mut R) -> Self {
        // rows of q are orthonormal, so q^T = q^-1
        let q = random_orthogonal(m, rng);
        let qt: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| q[j][i]).collect()).collect();
        let mut eig: Vec<f64> = (0..m)
            .map(|_| loop {
                let l = rng.gen_range(-radius..radius);
                // keep I - M comfortably invertible
                if (1.0 - l).abs() > 0.2 {
                    break l;
                }
            })
            .collect();
        eig[0] = if (1.0 - radius).abs() > 0.2 { radius } else { -radius };
        let d: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| if i == j { eig[i] } else { 0.0 }).collect())
            .collect();
        let composed = matmul(&matmul(&qt, &d), &q);
        // A_f = q^T, A_s = composed q
        let a_f = qt.clone();
        let a_s = matmul(&composed, &q);
        let b_s: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b_f: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lhs: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| f64::from(u8::from(i == j)) - composed[i][j]).collect())
            .collect();
        let rhs: Vec<f64> = matvec(&a_s, &b_f).iter().zip(&b_s).map(|(x, y)| x + y).collect();
        let fixed_point = gauss_solve(lhs, rhs);
        AffineCase {
            m,
            radius,
            a_s,
            a_f,
            b_s,
            b_f,
            fixed_point,
        }
    }

    pub fn problem(&self) -> AffineProblem {
        AffineProblem::new(
            Matrix::from_rows(&self.a_s).unwrap(),
            Matrix::from_rows(&self.a_f).unwrap(),
            self.b_s.clone(),
            self.b_f.clone(),
        )
        .unwrap()
    }
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let n = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    d / n.max(f64::MIN_POSITIVE)
}

/// `R(t)` of the balloon under `Q(t) = q_hat sin(pi t)`, by volume balance.
pub fn balloon_radius_exact(t: f64, r0: f64, q_hat: f64) -> f64 {
    use std::f64::consts::PI;
    (r0 * r0 + q_hat * (1.0 - (PI * t).cos()) / (PI * PI)).sqrt()
}
