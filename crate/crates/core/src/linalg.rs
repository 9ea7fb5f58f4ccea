//! Dense complex matrices and jittered Cholesky solves for Hermitian PSD systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Diagonal jitter ladder, as a fraction of `trace(A) / n`.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += v;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation from Hermitian symmetry, `max |a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..=i {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Unconjugated dot product `sum a_i b_i`.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower Cholesky factor `A + jitter I = L L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: CMatrix,
    jitter: f64,
}

impl Cholesky {
    /// Factors `a`, escalating diagonal jitter through [`JITTER_LADDER`] on failure.
    pub fn factor(a: &CMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Argument(format!("matrix is {}x{}, not square", a.rows(), a.cols())));
        }
        let scale = a.max_abs().max(1.0);
        if a.hermitian_defect() > 1e-10 * scale {
            return Err(Error::Argument("matrix is not Hermitian".into()));
        }
        if n == 0 {
            return Ok(Self { l: CMatrix::zeros(0, 0), jitter: 0.0 });
        }
        let mean_diag = a.trace().re / n as f64;
        let base = if mean_diag > 0.0 { mean_diag } else { scale };
        for eps in JITTER_LADDER {
            let jitter = eps * base;
            if let Some(l) = try_cholesky(a, jitter) {
                return Ok(Self { l, jitter });
            }
        }
        Err(Error::Numerical(format!(
            "Cholesky failed on a {n}x{n} system after jitter {:.1e}",
            JITTER_LADDER[JITTER_LADDER.len() - 1]
        )))
    }

    /// Absolute diagonal loading that made the factorization succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let l = &self.l;
        let mut y = b.to_vec();
        for i in 0..n {
            let row = l.row(i);
            let s = dot(&row[..i], &y[..i]);
            y[i] = (y[i] - s) / row[i].re;
        }
        for i in (0..n).rev() {
            let mut s = ZERO;
            for k in i + 1..n {
                s += l[(k, i)].conj() * y[k];
            }
            y[i] = (y[i] - s) / l[(i, i)].re;
        }
        y
    }

    /// Solves `A X = B` column by column.
    pub fn solve_mat(&self, b: &CMatrix) -> CMatrix {
        let n = self.dim();
        assert_eq!(b.rows(), n);
        let m = b.cols();
        let l = &self.l;
        // forward: L Y = B, processed row-wise so the inner loop is contiguous
        let mut y = b.clone();
        for i in 0..n {
            for k in 0..i {
                let lik = l[(i, k)];
                if lik == ZERO {
                    continue;
                }
                let (head, tail) = y.data.split_at_mut(i * m);
                let src = &head[k * m..(k + 1) * m];
                for (d, s) in tail[..m].iter_mut().zip(src) {
                    *d -= lik * s;
                }
            }
            let inv = 1.0 / l[(i, i)].re;
            for d in &mut y.data[i * m..(i + 1) * m] {
                *d *= inv;
            }
        }
        // backward: L^H X = Y
        for i in (0..n).rev() {
            for k in i + 1..n {
                let lki = l[(k, i)].conj();
                if lki == ZERO {
                    continue;
                }
                let (head, tail) = y.data.split_at_mut(k * m);
                let src = &tail[..m];
                for (d, s) in head[i * m..(i + 1) * m].iter_mut().zip(src) {
                    *d -= lki * s;
                }
            }
            let inv = 1.0 / l[(i, i)].re;
            for d in &mut y.data[i * m..(i + 1) * m] {
                *d *= inv;
            }
        }
        y
    }

    /// `(A + jitter I)^{-1}`.
    pub fn inverse(&self) -> CMatrix {
        self.solve_mat(&CMatrix::identity(self.dim()))
    }
}

fn try_cholesky(a: &CMatrix, jitter: f64) -> Option<CMatrix> {
    let n = a.rows();
    let max_diag = (0..n).map(|i| a[(i, i)].re).fold(0.0, f64::max) + jitter;
    let tol = n as f64 * f64::EPSILON * max_diag.max(f64::MIN_POSITIVE);
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let lj = l.row(j)[..j].to_vec();
        let d = a[(j, j)].re + jitter - lj.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if !(d > tol) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            // l_ij = (a_ij - sum_k l_ik conj(l_jk)) / l_jj
            let li = &l.data[i * n..i * n + j];
            let s: Complex64 = li.iter().zip(&lj).map(|(x, y)| x * y.conj()).sum();
            l[(i, j)] = (a[(i, j)] - s) / djj;
        }
    }
    Some(l)
}

/// Solves `A X = B` for Hermitian PSD `A`, with jitter escalation on
/// near-singular systems.
pub fn hermitian_solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if b.rows() != a.rows() {
        return Err(Error::Argument(format!(
            "right-hand side has {} rows, expected {}",
            b.rows(),
            a.rows()
        )));
    }
    Ok(Cholesky::factor(a)?.solve_mat(b))
}

pub fn hermitian_solve_vec(a: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if b.len() != a.rows() {
        return Err(Error::Argument(format!("right-hand side has {} rows, expected {}", b.len(), a.rows())));
    }
    Ok(Cholesky::factor(a)?.solve_vec(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian, substream, StreamTag};

    fn random_psd(n: usize, seed: u64) -> CMatrix {
        let mut rng = substream(seed, 0, StreamTag::Custom(1));
        let g = CMatrix::from_fn(n, n, |_, _| complex_gaussian(&mut rng, 1.0));
        let mut a = g.matmul(&g.adjoint());
        a.add_diagonal(0.1);
        a
    }

    /// Gaussian elimination with partial pivoting, as an independent oracle.
    fn gauss_solve(a: &CMatrix, b: &[Complex64]) -> Vec<Complex64> {
        let n = a.rows();
        let mut m: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                let mut r = a.row(i).to_vec();
                r.push(b[i]);
                r
            })
            .collect();
        for c in 0..n {
            let p = (c..n).max_by(|&x, &y| m[x][c].norm().partial_cmp(&m[y][c].norm()).unwrap()).unwrap();
            m.swap(c, p);
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    let v = m[c][k];
                    m[r][k] -= f * v;
                }
            }
        }
        let mut x = vec![ZERO; n];
        for i in (0..n).rev() {
            let s: Complex64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
            x[i] = (m[i][n] - s) / m[i][i];
        }
        x
    }

    #[test]
    fn identity_and_scaled_identity() {
        let b = vec![Complex64::new(1.0, 2.0), Complex64::new(-3.0, 0.5), Complex64::new(0.0, -1.0)];
        let x = hermitian_solve_vec(&CMatrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
        let mut two = CMatrix::identity(3);
        two.add_diagonal(1.0);
        let x = hermitian_solve_vec(&two, &b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi / 2.0).norm() < 1e-15);
        }
    }

    #[test]
    fn random_psd_matches_elimination_oracle() {
        let a = random_psd(8, 42);
        let mut rng = substream(42, 1, StreamTag::Custom(2));
        let b: Vec<Complex64> = (0..8).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let x = hermitian_solve_vec(&a, &b).unwrap();
        let oracle = gauss_solve(&a, &b);
        for (p, q) in x.iter().zip(&oracle) {
            assert!((p - q).norm() < 1e-9);
        }
        let ax = a.matvec(&x);
        let res: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(res <= 1e-8 * bn);
    }

    #[test]
    fn matrix_rhs_and_inverse() {
        let a = random_psd(6, 5);
        let inv = Cholesky::factor(&a).unwrap().inverse();
        let eye = a.matmul(&inv);
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((eye[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn singular_psd_gets_jitter() {
        let a = CMatrix::from_fn(5, 5, |_, _| Complex64::new(1.0, 0.0));
        let ch = Cholesky::factor(&a).unwrap();
        assert!(ch.jitter() > 0.0);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut a = CMatrix::identity(2);
        a[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(Cholesky::factor(&a), Err(Error::Argument(_))));
    }

    #[test]
    fn indefinite_fails_numerically() {
        let mut a = CMatrix::identity(2);
        a[(1, 1)] = Complex64::new(-1.0, 0.0);
        assert!(matches!(Cholesky::factor(&a), Err(Error::Numerical(_))));
    }
}
