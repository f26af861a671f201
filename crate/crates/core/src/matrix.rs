//! Dense symmetric matrices and the small-matrix linear algebra the rest of
//! the crate is built on: cyclic Jacobi eigendecomposition, operator norm,
//! positive-semidefiniteness checks, a semidefinite Cholesky factorization,
//! and an LU solver with partial pivoting.
//!
//! Everything here is deterministic: no randomized pivoting, no
//! thread-dependent reduction orders. Matrices are stored row-major and are
//! kept exactly symmetric by construction (every write mirrors).

use crate::error::{Error, Result};

/// Exactly symmetric dense matrix, row-major storage.
///
/// All constructors either write both (j, k) and (k, j) or average the two
/// halves of the input, so `get(j, k) == get(k, j)` holds bitwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    a: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            a: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = c;
        }
        m
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = d[i];
        }
        m
    }

    /// Builds from `f` evaluated on the upper triangle (j <= k) and mirrored,
    /// so an asymmetric `f` cannot produce an asymmetric matrix.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            for k in j..n {
                let v = f(j, k);
                m.a[j * n + k] = v;
                m.a[k * n + j] = v;
            }
        }
        m
    }

    /// Builds from full row data, symmetrizing as (A + A^T) / 2.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "row length in symmetric matrix input",
                    expected: n,
                    got: rows[i].len(),
                });
            }
        }
        Ok(Self::from_fn(n, |j, k| {
            if j == k {
                rows[j][k]
            } else {
                0.5 * (rows[j][k] + rows[k][j])
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.a[j * self.n + k]
    }

    /// Writes both (j, k) and (k, j).
    #[inline]
    pub fn set(&mut self, j: usize, k: usize, v: f64) {
        self.a[j * self.n + k] = v;
        self.a[k * self.n + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|j| self.a[j * self.n..(j + 1) * self.n].to_vec())
            .collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i * self.n + i]).sum()
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                context: "matrix subtraction",
                expected: self.n,
                got: other.n,
            });
        }
        let mut out = SymMatrix::zeros(self.n);
        for i in 0..self.a.len() {
            out.a[i] = self.a[i] - other.a[i];
        }
        Ok(out)
    }

    /// Zero-pads into the leading block of an `n_big` x `n_big` matrix.
    pub fn embed_leading(&self, n_big: usize) -> Result<SymMatrix> {
        if n_big < self.n {
            return Err(Error::DimensionMismatch {
                context: "embedding target must not be smaller",
                expected: self.n,
                got: n_big,
            });
        }
        let mut out = SymMatrix::zeros(n_big);
        for j in 0..self.n {
            for k in 0..self.n {
                out.a[j * n_big + k] = self.a[j * self.n + k];
            }
        }
        Ok(out)
    }

    pub fn leading_block(&self, k: usize) -> Result<SymMatrix> {
        if k > self.n {
            return Err(Error::DimensionMismatch {
                context: "leading block size",
                expected: self.n,
                got: k,
            });
        }
        let mut out = SymMatrix::zeros(k);
        for j in 0..k {
            for l in 0..k {
                out.a[j * k + l] = self.a[j * self.n + l];
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.n,
                got: x.len(),
            });
        }
        Ok((0..self.n)
            .map(|j| {
                let row = &self.a[j * self.n..(j + 1) * self.n];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect())
    }

    /// x^T A y, summed row by row in index order.
    pub fn quadratic_form(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let ay = self.matvec(y)?;
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "quadratic form left vector",
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(x.iter().zip(&ay).map(|(a, b)| a * b).sum())
    }
}

/// Eigendecomposition of a symmetric matrix.
///
/// `values` are sorted ascending; `vectors` is row-major with column `j`
/// holding the unit eigenvector of `values[j]`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    n: usize,
}

impl SymEigen {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + j]).collect()
    }
}

const JACOBI_MAX_SWEEPS: usize = 50;
const JACOBI_TOL: f64 = 1e-15;

/// Cyclic Jacobi rotations on a copy of `m`. Returns the diagonal and,
/// optionally, the accumulated rotation matrix.
///
/// Convergence: the largest off-diagonal magnitude falls below
/// `1e-15 * frobenius_norm`. Already-diagonal input returns its diagonal
/// unchanged bit for bit (no rotations are applied). Failure to converge
/// within 50 sweeps is a hard error, never a silent partial result.
fn jacobi(m: &SymMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = m.n;
    let mut a = m.a.clone();
    let mut v = if want_vectors {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };
    if n < 2 {
        let diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        return Ok((diag, v));
    }

    let fro = m.frobenius_norm();
    let tol = JACOBI_TOL * fro;

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off_max = 0.0_f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off_max = off_max.max(a[p * n + q].abs());
            }
        }
        if off_max <= tol {
            let diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
            return Ok((diag, v));
        }

        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                // Large theta: t = 1/(2 theta) avoids overflow in theta^2.
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = a[p * n + p];
                let aqq = a[q * n + q];
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    let new_ip = aip - s * (aiq + tau * aip);
                    let new_iq = aiq + s * (aip - tau * aiq);
                    a[i * n + p] = new_ip;
                    a[p * n + i] = new_ip;
                    a[i * n + q] = new_iq;
                    a[q * n + i] = new_iq;
                }

                if let Some(vm) = v.as_mut() {
                    for i in 0..n {
                        let vip = vm[i * n + p];
                        let viq = vm[i * n + q];
                        vm[i * n + p] = vip - s * (viq + tau * vip);
                        vm[i * n + q] = viq + s * (vip - tau * viq);
                    }
                }
            }
        }
    }

    Err(Error::ConvergenceFailure {
        what: "Jacobi eigendecomposition",
        iterations: JACOBI_MAX_SWEEPS,
    })
}

/// Full eigendecomposition, values ascending.
pub fn sym_eigen(m: &SymMatrix) -> Result<SymEigen> {
    let n = m.n;
    let (diag, v) = jacobi(m, true)?;
    let v = v.expect("vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + new_col] = v[i * n + old_col];
        }
    }
    Ok(SymEigen { values, vectors, n })
}

/// Eigenvalues only, sorted ascending.
pub fn sym_eigenvalues(m: &SymMatrix) -> Result<Vec<f64>> {
    let (mut diag, _) = jacobi(m, false)?;
    diag.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(diag)
}

/// Spectral norm of a symmetric matrix: max |eigenvalue|.
pub fn operator_norm_sym(m: &SymMatrix) -> Result<f64> {
    if m.n == 0 {
        return Ok(0.0);
    }
    let vals = sym_eigenvalues(m)?;
    Ok(vals[0].abs().max(vals[vals.len() - 1].abs()))
}

#[derive(Debug, Clone, Copy)]
pub struct PsdReport {
    pub ok: bool,
    pub min_eigenvalue: f64,
}

/// Positive-semidefiniteness within `tol`: passes iff the smallest
/// eigenvalue is >= -tol. `tol` must be >= 0.
pub fn psd_check(m: &SymMatrix, tol: f64) -> Result<PsdReport> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            message: format!("must be >= 0, got {tol}"),
        });
    }
    if m.n == 0 {
        return Ok(PsdReport {
            ok: true,
            min_eigenvalue: 0.0,
        });
    }
    let vals = sym_eigenvalues(m)?;
    let min_eigenvalue = vals[0];
    Ok(PsdReport {
        ok: min_eigenvalue_ge(min_eigenvalue, tol),
        min_eigenvalue,
    })
}

#[inline]
fn min_eigenvalue_ge(min_eig: f64, tol: f64) -> bool {
    min_eig >= -tol
}

/// Cholesky factor L (lower, row-major) of a positive semidefinite matrix.
///
/// Zero pivots are accepted when the remaining column is also zero (rank
/// deficiency), so the all-zero matrix factors to L = 0. A pivot below
/// -1e-12 * max(diag) fails; callers that expect rounding-level indefiniteness
/// add diagonal jitter and retry.
pub(crate) fn cholesky_psd(m: &SymMatrix) -> Result<Vec<f64>> {
    let n = m.n;
    let mut l = vec![0.0; n * n];
    let max_diag = (0..n).fold(0.0_f64, |acc, i| acc.max(m.get(i, i)));
    let piv_tol = 1e-12 * max_diag;
    let col_tol = 1e-7 * (max_diag.max(0.0)).sqrt();
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d > piv_tol {
            let ljj = d.sqrt();
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        } else if d >= -piv_tol {
            l[j * n + j] = 0.0;
            for i in j + 1..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if s.abs() > col_tol {
                    return Err(Error::NotPositiveSemidefinite {
                        context: "Cholesky: zero pivot with nonzero column",
                    });
                }
                l[i * n + j] = 0.0;
            }
        } else {
            return Err(Error::NotPositiveSemidefinite {
                context: "Cholesky: negative pivot",
            });
        }
    }
    Ok(l)
}

/// Solves A x = b in place by LU with partial pivoting; `a` is n x n
/// row-major and is destroyed. Used as generic machinery by the dense
/// Lyapunov cross-check, which must not exploit any structure of A.
pub(crate) fn solve_linear(a: &mut [f64], n: usize, b: &mut [f64]) -> Result<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        let mut piv_abs = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > piv_abs {
                piv = r;
                piv_abs = v;
            }
        }
        if piv_abs == 0.0 {
            return Err(Error::NotPositiveSemidefinite {
                context: "LU: singular matrix",
            });
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            a[r * n + col] = 0.0;
            for c in col + 1..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r * n + c] * b[c];
        }
        b[r] = s / a[r * n + r];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn det2_eigs(a: f64, b: f64, c: f64) -> (f64, f64) {
        // eigenvalues of [[a, b], [b, c]]
        let tr = a + c;
        let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
        ((tr - disc) / 2.0, (tr + disc) / 2.0)
    }

    #[test]
    fn from_rows_symmetrizes() {
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![4.0, 3.0]]).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
    }

    #[test]
    fn eigen_2x2_closed_form() {
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let (lo, hi) = det2_eigs(2.0, 1.0, 3.0);
        let vals = sym_eigenvalues(&m).unwrap();
        assert_relative_eq!(vals[0], lo, max_relative = 1e-14);
        assert_relative_eq!(vals[1], hi, max_relative = 1e-14);
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        // deterministic pseudo-random symmetric matrix
        let n = 12;
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = SymMatrix::from_fn(n, |_, _| next());
        let e = sym_eigen(&m).unwrap();
        // check A v = lambda v for every pair
        for j in 0..n {
            let v = e.vector(j);
            let av = m.matvec(&v).unwrap();
            for i in 0..n {
                assert!(
                    (av[i] - e.values[j] * v[i]).abs() < 1e-12 * m.frobenius_norm(),
                    "residual too large at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn eigen_diagonal_input_is_exact() {
        let d = [3.5, -1.25, 0.75];
        let m = SymMatrix::from_diagonal(&d);
        let vals = sym_eigenvalues(&m).unwrap();
        assert_eq!(vals, vec![-1.25, 0.75, 3.5]);
    }

    #[test]
    fn operator_norm_matches_power_iteration() {
        let n = 20;
        let mut state = 0x243f6a8885a308d3_u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = SymMatrix::from_fn(n, |_, _| next());
        let norm = operator_norm_sym(&m).unwrap();

        // independent power iteration on A^2 (converges to largest |eig|^2)
        let mut x = vec![1.0_f64; n];
        let mut est = 0.0;
        for _ in 0..2000 {
            let y = m.matvec(&x).unwrap();
            let z = m.matvec(&y).unwrap();
            let nz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            est = nz.sqrt();
            for i in 0..n {
                x[i] = z[i] / nz;
            }
        }
        assert_relative_eq!(norm, est, max_relative = 1e-10);
    }

    #[test]
    fn psd_check_detects_indefinite() {
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let rep = psd_check(&m, 1e-12).unwrap();
        assert!(!rep.ok);
        assert_relative_eq!(rep.min_eigenvalue, -1.0, max_relative = 1e-14);
    }

    #[test]
    fn psd_check_accepts_slightly_perturbed() {
        let m = SymMatrix::from_diagonal(&[1.0, -1e-14]);
        assert!(psd_check(&m, 1e-10).unwrap().ok);
        assert!(!psd_check(&m, 1e-16).unwrap().ok);
    }

    #[test]
    fn cholesky_roundtrip_and_zero_matrix() {
        let m = SymMatrix::from_rows(&[
            vec![4.0, 2.0, 0.5],
            vec![2.0, 5.0, 1.0],
            vec![0.5, 1.0, 3.0],
        ])
        .unwrap();
        let l = cholesky_psd(&m).unwrap();
        let n = 3;
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for t in 0..n {
                    s += l[j * n + t] * l[k * n + t];
                }
                assert_relative_eq!(s, m.get(j, k), max_relative = 1e-14);
            }
        }
        let z = cholesky_psd(&SymMatrix::zeros(4)).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = SymMatrix::from_diagonal(&[1.0, -0.5]);
        assert!(cholesky_psd(&m).is_err());
    }

    #[test]
    fn lu_solves_small_system() {
        // A = [[2, 1], [1, 3]], b = [5, 10] -> x = [1, 3]
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![5.0, 10.0];
        solve_linear(&mut a, 2, &mut b).unwrap();
        assert_relative_eq!(b[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(b[1], 3.0, max_relative = 1e-14);
    }

    #[test]
    fn lu_rejects_singular() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut b = vec![1.0, 2.0];
        assert!(solve_linear(&mut a, 2, &mut b).is_err());
    }
}
