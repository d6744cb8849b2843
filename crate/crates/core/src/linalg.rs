//! Dense symmetric linear algebra over any [`Real`] type: Cholesky
//! factorization, congruence reduction of a definite pencil and the cyclic
//! Jacobi eigenvalue method.

use crate::error::{Error, Result};
use crate::precision::Real;

/// Square matrix in row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> DenseMatrix<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DenseMatrix { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> DenseMatrix<U> {
        DenseMatrix { n: self.n, data: self.data.iter().map(f).collect() }
    }

    /// Principal submatrix on the given index set.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        DenseMatrix::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]).clone())
    }

    pub fn is_symmetric(&self) -> bool
    where
        T: PartialEq,
    {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.n.max(1))
    }
}

impl<T: Real> DenseMatrix<T> {
    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |s, x| s + x.clone() * x.clone()).sqrt()
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        self.rows()
            .map(|row| row.iter().zip(v).fold(T::zero(), |s, (a, b)| s + a.clone() * b.clone()))
            .collect()
    }
}

/// In-place lower Cholesky factor `A = L L^T`; the strict upper triangle is
/// zeroed. Fails with the index of the first non-positive pivot.
pub fn cholesky<T: Real>(a: &mut DenseMatrix<T>) -> Result<()> {
    let n = a.n;
    for j in 0..n {
        let mut d = a.get(j, j).clone();
        for k in 0..j {
            let l = a.get(j, k).clone();
            d = d - l.clone() * l;
        }
        if !(d > T::zero()) {
            return Err(Error::CholeskyFailure { pivot: j });
        }
        let d = d.sqrt();
        a.set(j, j, d.clone());
        for i in j + 1..n {
            let mut s = a.get(i, j).clone();
            for k in 0..j {
                s = s - a.get(i, k).clone() * a.get(j, k).clone();
            }
            a.set(i, j, s / d.clone());
        }
        for i in 0..j {
            a.set(i, j, T::zero());
        }
    }
    Ok(())
}

/// Cheap condition estimate of `L L^T`: `(max L_ii / min L_ii)^2`.
pub fn cholesky_condition_estimate<T: Real>(l: &DenseMatrix<T>) -> f64 {
    let diag: Vec<f64> = (0..l.n).map(|i| l.get(i, i).to_f64().abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    (max / min).powi(2)
}

/// Solves `L x = b` for lower triangular `L`.
pub fn forward_substitution<T: Real>(l: &DenseMatrix<T>, b: &[T]) -> Vec<T> {
    let n = l.n;
    let mut x: Vec<T> = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = b[i].clone();
        for (k, xk) in x.iter().enumerate() {
            s = s - l.get(i, k).clone() * xk.clone();
        }
        x.push(s / l.get(i, i).clone());
    }
    x
}

/// Solves `L^T x = b` for lower triangular `L`.
pub fn backward_substitution_transposed<T: Real>(l: &DenseMatrix<T>, b: &[T]) -> Vec<T> {
    let n = l.n;
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i].clone();
        for k in i + 1..n {
            s = s - l.get(k, i).clone() * x[k].clone();
        }
        x[i] = s / l.get(i, i).clone();
    }
    x
}

/// `C = L^{-1} M L^{-T}` for lower triangular `L` and symmetric `M`.
pub fn congruence_reduce<T: Real>(l: &DenseMatrix<T>, m: &DenseMatrix<T>) -> DenseMatrix<T> {
    let n = l.n;
    // X = L^{-1} M, column by column (M symmetric, so column j = row j).
    let mut x_cols: Vec<Vec<T>> = Vec::with_capacity(n);
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| m.get(i, j).clone()).collect();
        x_cols.push(forward_substitution(l, &col));
    }
    // C = X L^{-T} = (L^{-1} X^T)^T; row i of X is x_cols[*][i].
    let mut c = DenseMatrix::from_fn(n, |_, _| T::zero());
    for i in 0..n {
        let row: Vec<T> = (0..n).map(|j| x_cols[j][i].clone()).collect();
        let y = forward_substitution(l, &row);
        for (j, v) in y.into_iter().enumerate() {
            c.set(i, j, v);
        }
    }
    // Symmetrize against rounding.
    let two = T::one() + T::one();
    for i in 0..n {
        for j in 0..i {
            let avg = (c.get(i, j).clone() + c.get(j, i).clone()) / two.clone();
            c.set(i, j, avg.clone());
            c.set(j, i, avg);
        }
    }
    c
}

/// Eigenvalues and eigenvectors of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    /// `vectors[k]` is the unit eigenvector of `values[k]`.
    pub vectors: Vec<Vec<T>>,
    pub sweeps: usize,
}

/// Cyclic Jacobi method. Iterates until the off-diagonal Frobenius norm is
/// below `max(1e-30, 4 eps)` times the matrix norm.
pub fn jacobi_eigen<T: Real>(a: &DenseMatrix<T>) -> Result<SymmetricEigen<T>> {
    const MAX_SWEEPS: usize = 60;
    let n = a.n;
    let mut a = a.clone();
    let mut v = DenseMatrix::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() });
    let norm = a.frobenius_norm().to_f64();
    let tol = 1e-30f64.max(4.0 * T::epsilon()) * norm;
    let negligible = T::from_f64(T::epsilon() * T::epsilon() * norm);
    let two = T::one() + T::one();
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= tol || norm == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::JacobiNonConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q).clone();
                if apq.abs() <= negligible {
                    a.set(p, q, T::zero());
                    a.set(q, p, T::zero());
                    continue;
                }
                let theta = (a.get(q, q).clone() - a.get(p, p).clone()) / (two.clone() * apq.clone());
                let t = if theta.abs() > T::from_f64(1e60) {
                    T::one() / (two.clone() * theta.clone())
                } else if theta >= T::zero() {
                    let root = (theta.clone() * theta.clone() + T::one()).sqrt();
                    T::one() / (theta.clone() + root)
                } else {
                    let root = (theta.clone() * theta.clone() + T::one()).sqrt();
                    -(T::one() / (root - theta.clone()))
                };
                let c = T::one() / (t.clone() * t.clone() + T::one()).sqrt();
                let s = t.clone() * c.clone();
                rotate(&mut a, &mut v, p, q, &c, &s, &t, &apq);
            }
        }
    }
    let values = (0..n).map(|i| a.get(i, i).clone()).collect();
    let vectors = (0..n).map(|k| (0..n).map(|i| v.get(i, k).clone()).collect()).collect();
    Ok(SymmetricEigen { values, vectors, sweeps })
}

#[allow(clippy::too_many_arguments)]
fn rotate<T: Real>(
    a: &mut DenseMatrix<T>,
    v: &mut DenseMatrix<T>,
    p: usize,
    q: usize,
    c: &T,
    s: &T,
    t: &T,
    apq: &T,
) {
    let n = a.n;
    let app = a.get(p, p).clone() - t.clone() * apq.clone();
    let aqq = a.get(q, q).clone() + t.clone() * apq.clone();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a.get(k, p).clone();
        let akq = a.get(k, q).clone();
        let new_p = c.clone() * akp.clone() - s.clone() * akq.clone();
        let new_q = s.clone() * akp + c.clone() * akq;
        a.set(k, p, new_p.clone());
        a.set(p, k, new_p);
        a.set(k, q, new_q.clone());
        a.set(q, k, new_q);
    }
    a.set(p, p, app);
    a.set(q, q, aqq);
    a.set(p, q, T::zero());
    a.set(q, p, T::zero());
    for k in 0..n {
        let vkp = v.get(k, p).clone();
        let vkq = v.get(k, q).clone();
        v.set(k, p, c.clone() * vkp.clone() - s.clone() * vkq.clone());
        v.set(k, q, s.clone() * vkp + c.clone() * vkq);
    }
}

fn off_diagonal_norm<T: Real>(a: &DenseMatrix<T>) -> f64 {
    let mut s = 0.0;
    for i in 0..a.n {
        for j in 0..a.n {
            if i != j {
                s += a.get(i, j).to_f64().powi(2);
            }
        }
    }
    s.sqrt()
}

/// Largest eigenvalue of a symmetric 3x3 (or smaller) `f64` matrix.
pub fn symmetric_lambda_max(m: &[[f64; 3]; 3], dim: usize) -> f64 {
    let a = DenseMatrix::from_fn(dim, |i, j| m[i][j]);
    jacobi_eigen(&a)
        .expect("Jacobi converges for small symmetric matrices")
        .values
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::DoubleDouble;

    fn hilbert(n: usize) -> DenseMatrix<f64> {
        DenseMatrix::from_fn(n, |i, j| 1.0 / (i + j + 1) as f64)
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = hilbert(5);
        let mut l = a.clone();
        cholesky(&mut l).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let s: f64 = (0..5).map(|k| l.get(i, k) * l.get(j, k)).sum();
                assert!((s - a.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = DenseMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 2.0 });
        assert!(matches!(cholesky(&mut a), Err(Error::CholeskyFailure { pivot: 1 })));
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a = DenseMatrix::from_fn(4, |i, j| [[4.0, 1.0, 2.0, 0.5], [1.0, 3.0, 0.0, 1.0], [2.0, 0.0, 5.0, 1.5], [0.5, 1.0, 1.5, 2.0]][i][j]);
        let e = jacobi_eigen(&a).unwrap();
        for (val, vec) in e.values.iter().zip(&e.vectors) {
            let av = a.mul_vec(vec);
            for i in 0..4 {
                assert!((av[i] - val * vec[i]).abs() < 1e-13);
            }
        }
        let trace: f64 = e.values.iter().sum();
        assert!((trace - 14.0).abs() < 1e-13);
    }

    #[test]
    fn double_double_jacobi_on_ill_conditioned_pencil() {
        // Pencil (I, H) with Hilbert H: lambda_max = 1 / lambda_min(H).
        let n = 8;
        let h = DenseMatrix::from_fn(n, |i, j| DoubleDouble::from_rational(&num_rational::BigRational::new(1.into(), ((i + j + 1) as i64).into())));
        let id = DenseMatrix::from_fn(n, |i, j| if i == j { DoubleDouble::one() } else { DoubleDouble::zero() });
        let mut l = h.clone();
        cholesky(&mut l).unwrap();
        assert!(cholesky_condition_estimate(&l) > 1e8);
        let c = congruence_reduce(&l, &id);
        let e = jacobi_eigen(&c).unwrap();
        let max = e.values.iter().map(|v| v.to_f64()).fold(0.0, f64::max);
        // lambda_min(H_8) = 1.1115389663724424e-10
        assert!((1.0 / max - 1.1115389663724424e-10).abs() < 1e-24);
    }

    #[test]
    fn lambda_max_small() {
        let m = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 1.0]];
        assert!((symmetric_lambda_max(&m, 3) - 3.0).abs() < 1e-14);
        assert!((symmetric_lambda_max(&m, 2) - 3.0).abs() < 1e-14);
    }
}
