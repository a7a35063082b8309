//! Dense kernels shared by the stability and steady-state modules: real
//! Schur form and spectra, the two continuous Lyapunov backends, and the
//! matrix exponential.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real Schur factorization `A = Q T Q^T` with `T` quasi upper triangular.
pub struct RealSchur {
    pub q: DMatrix<f64>,
    pub t: DMatrix<f64>,
}

/// Real Schur form from LAPACK `dgees`.
pub fn real_schur(a: &DMatrix<f64>) -> Result<RealSchur> {
    let schur = lapack_schur(a)?;
    let (q, t) = schur.unpack();
    Ok(RealSchur { q, t })
}

fn lapack_schur(a: &DMatrix<f64>) -> Result<nalgebra_lapack::Schur<f64, nalgebra::Dyn>> {
    if !a.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("matrix passed to Schur factorization".into()));
    }
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "Schur factorization needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    nalgebra_lapack::Schur::try_new(a.clone()).ok_or(Error::EigenNoConvergence { dim: a.nrows() })
}

/// Diagonal block boundaries of a quasi upper triangular matrix.
fn schur_blocks(t: &DMatrix<f64>) -> Result<Vec<(usize, usize)>> {
    let n = t.nrows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            if i + 2 < n && t[(i + 2, i + 1)] != 0.0 {
                return Err(Error::InvalidInput(
                    "Schur factor is not quasi-triangular".into(),
                ));
            }
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    Ok(blocks)
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    Ok(lapack_schur(a)?.complex_eigenvalues().iter().copied().collect())
}

pub fn spectral_abscissa(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Position of `V[i][j]` (either order) in the packed upper triangle.
#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (r, c) = if i <= j { (i, j) } else { (j, i) };
    // rows 0..r contribute n, n-1, ..., n-r+1 entries
    r * n - r * r.saturating_sub(1) / 2 + (c - r)
}

/// Number of independent entries of an `n x n` symmetric matrix.
pub fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

pub fn pack_symmetric(v: &DMatrix<f64>) -> DVector<f64> {
    let n = v.nrows();
    let mut out = DVector::zeros(packed_len(n));
    for i in 0..n {
        for j in i..n {
            out[packed_index(n, i, j)] = v[(i, j)];
        }
    }
    out
}

pub fn unpack_symmetric(p: &DVector<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| p[packed_index(n, i, j)])
}

/// Upper bound on refinement sweeps after the first solve.
const MAX_REFINEMENT_STEPS: usize = 4;

/// Error-free transformation `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Running sum of products carried in twice working precision.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    err: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.err += e;
    }

    #[inline]
    fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        self.add(p);
        self.err += a.mul_add(b, -p);
    }

    fn value(&self) -> f64 {
        self.sum + self.err
    }
}

/// `A X + X A^T + (Q + Q^T) / 2` for symmetric `X`, accumulated with
/// compensated products so the result carries about one rounding error.
pub fn lyapunov_residual_compensated(
    a: &DMatrix<f64>,
    q: &DMatrix<f64>,
    x: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = a.nrows();
    let mut r = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = CompensatedSum::default();
            acc.add(0.5 * q[(i, j)]);
            acc.add(0.5 * q[(j, i)]);
            for k in 0..n {
                acc.add_product(a[(i, k)], x[(k, j)]);
                acc.add_product(x[(i, k)], a[(j, k)]);
            }
            r[(i, j)] = acc.value();
            r[(j, i)] = r[(i, j)];
        }
    }
    r
}

/// Refines `X` by repeated correction solves `A dX + dX A^T = -R` until the
/// update stops shrinking or falls to rounding level.
fn refine<F>(a: &DMatrix<f64>, q: &DMatrix<f64>, mut x: DMatrix<f64>, solve: F) -> Result<DMatrix<f64>>
where
    F: Fn(&DMatrix<f64>) -> Result<DMatrix<f64>>,
{
    let mut last = f64::INFINITY;
    for _ in 0..MAX_REFINEMENT_STEPS {
        let dx = solve(&lyapunov_residual_compensated(a, q, &x))?;
        let step = dx.amax();
        if !(step < last) {
            break;
        }
        x += &dx;
        x = (&x + x.transpose()) * 0.5;
        last = step;
        if step <= f64::EPSILON * x.amax() {
            break;
        }
    }
    Ok(x)
}

/// Solves `A X + X A^T = -Q` for symmetric `Q` as one dense linear system
/// over the packed upper triangle of `X`.
pub fn lyapunov_vectorized(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let m = packed_len(n);
    let mut sys = DMatrix::<f64>::zeros(m, m);
    for i in 0..n {
        for j in i..n {
            let row = packed_index(n, i, j);
            for k in 0..n {
                // (A X)_{ij} = sum_k A_ik X_kj,  (X A^T)_{ij} = sum_k X_ik A_jk
                let aik = a[(i, k)];
                if aik != 0.0 {
                    sys[(row, packed_index(n, k, j))] += aik;
                }
                let ajk = a[(j, k)];
                if ajk != 0.0 {
                    sys[(row, packed_index(n, i, k))] += ajk;
                }
            }
        }
    }
    let lu = sys.lu();
    let solve = |c: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let rhs = -pack_symmetric(&((c + c.transpose()) * 0.5));
        let x = lu.solve(&rhs).ok_or(Error::Singular("vectorized Lyapunov system"))?;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Singular("vectorized Lyapunov system"));
        }
        Ok(unpack_symmetric(&x, n))
    };
    let x = solve(q)?;
    refine(a, q, x, solve)
}

/// Solves `A X + X A^T = -Q` by Bartels-Stewart on the real Schur form of `A`.
pub fn lyapunov_schur(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let RealSchur { q: u, t } = real_schur(a)?;
    let blocks = schur_blocks(&t)?;
    let solve = |c: &DMatrix<f64>| schur_solve(&u, &t, &blocks, c);
    let x = solve(q)?;
    refine(a, q, x, solve)
}

fn schur_solve(
    u: &DMatrix<f64>,
    t: &DMatrix<f64>,
    blocks: &[(usize, usize)],
    q: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = t.nrows();
    // T Y + Y T^T = C with Y = U^T X U, C = -U^T Q U
    let c = -(u.transpose() * q * u);
    let mut y = DMatrix::<f64>::zeros(n, n);

    // T is upper quasi-triangular, so block (k, l) depends only on blocks
    // (i, l) with i > k and (k, j) with j > l.
    for &(rk, pk) in blocks.iter().rev() {
        for &(rl, pl) in blocks.iter().rev() {
            let mut rhs = c.view((rk, rl), (pk, pl)).clone_owned();
            let tail_r = rk + pk;
            if tail_r < n {
                rhs -= t.view((rk, tail_r), (pk, n - tail_r)) * y.view((tail_r, rl), (n - tail_r, pl));
            }
            let tail_c = rl + pl;
            if tail_c < n {
                rhs -= y.view((rk, tail_c), (pk, n - tail_c))
                    * t.view((rl, tail_c), (pl, n - tail_c)).transpose();
            }
            let tkk = t.view((rk, rk), (pk, pk)).clone_owned();
            let tll = t.view((rl, rl), (pl, pl)).clone_owned();
            let block = solve_small_sylvester(&tkk, &tll, &rhs)?;
            y.view_mut((rk, rl), (pk, pl)).copy_from(&block);
        }
    }
    let x = u * y * u.transpose();
    Ok((&x + x.transpose()) * 0.5)
}

/// Solves `P Y + Y R^T = C` for blocks of size 1 or 2 via the Kronecker form
/// `(I (x) P + R (x) I) vec(Y) = vec(C)`.
fn solve_small_sylvester(
    p: &DMatrix<f64>,
    r: &DMatrix<f64>,
    c: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let (pk, pl) = (p.nrows(), r.nrows());
    let m = pk * pl;
    let mut k = DMatrix::<f64>::zeros(m, m);
    // column-major vec: index = i + pk * j
    for j in 0..pl {
        for i in 0..pk {
            let row = i + pk * j;
            for s in 0..pk {
                k[(row, s + pk * j)] += p[(i, s)];
            }
            for s in 0..pl {
                k[(row, i + pk * s)] += r[(j, s)];
            }
        }
    }
    let rhs = DVector::from_column_slice(c.as_slice());
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("Schur-block Sylvester system"))?;
    Ok(DMatrix::from_column_slice(pk, pl, sol.as_slice()))
}

/// `exp(A t)` by Pade scaling and squaring.
pub fn expm(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if !t.is_finite() || !a.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("matrix exponential input".into()));
    }
    let m = (a * t).exp();
    if !m.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("matrix exponential result".into()));
    }
    Ok(m)
}

pub fn det2(m: &Matrix2<f64>) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Cofactor expansion along the first row.
pub fn det4(m: &Matrix4<f64>) -> f64 {
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let e = |r: usize, c: usize| m[(r, cols[c])];
        e(1, 0) * (e(2, 1) * e(3, 2) - e(2, 2) * e(3, 1))
            - e(1, 1) * (e(2, 0) * e(3, 2) - e(2, 2) * e(3, 0))
            + e(1, 2) * (e(2, 0) * e(3, 1) - e(2, 1) * e(3, 0))
    };
    let row: Vector4<f64> = m.row(0).transpose();
    row[0] * minor(0) - row[1] * minor(1) + row[2] * minor(2) - row[3] * minor(3)
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_indexing_is_a_bijection() {
        for n in 1..8 {
            let mut seen = vec![false; packed_len(n)];
            for i in 0..n {
                for j in i..n {
                    let k = packed_index(n, i, j);
                    assert!(!seen[k]);
                    seen[k] = true;
                    assert_eq!(k, packed_index(n, j, i));
                }
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn det4_matches_lu() {
        let m = Matrix4::new(
            2.0, -1.0, 0.5, 3.0, 0.1, 4.0, -2.0, 1.0, 1.5, 0.0, 3.0, -1.0, -0.7, 2.2, 1.1, 5.0,
        );
        let lu = DMatrix::from_column_slice(4, 4, m.as_slice()).determinant();
        assert!((det4(&m) - lu).abs() < 1e-12 * lu.abs());
    }

    #[test]
    fn both_backends_solve_a_small_nonnormal_system() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[-1.0, 5.0, 0.0, -5.0, -1.0, 2.0, 0.3, 0.0, -0.5],
        );
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 0.5]));
        for x in [lyapunov_vectorized(&a, &q).unwrap(), lyapunov_schur(&a, &q).unwrap()] {
            let r = &a * &x + &x * a.transpose() + &q;
            assert!(r.norm() < 1e-12 * (1.0 + x.norm()), "{r}");
        }
    }

    #[test]
    fn vectorized_reports_singular_systems() {
        // eigenvalues +1 and -1 sum to zero: A X + X A^T is singular
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let q = DMatrix::identity(2, 2);
        assert!(matches!(lyapunov_vectorized(&a, &q), Err(Error::Singular(_))));
    }
}
