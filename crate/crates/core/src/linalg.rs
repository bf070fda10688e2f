//! Small dense complex linear algebra: products, Householder QR, a cyclic
//! Jacobi Hermitian eigensolver, Cholesky log-determinants, Gauss–Jordan
//! inversion and Hessenberg–QR eigenvalues.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `A*A`, Hermitian.
    pub fn gram(&self) -> CMatrix {
        self.adjoint().matmul(self).expect("shapes agree")
    }

    pub fn scale(&self, c: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(
                "cannot add matrices of different shapes".into(),
            ));
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `A − λI`.
    pub fn shift(&self, lambda: Complex64) -> CMatrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= lambda;
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus of `A*A − I`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.gram();
        let mut worst: f64 = 0.0;
        for i in 0..g.rows {
            for j in 0..g.cols {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((g[(i, j)] - target).norm());
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

/// Householder QR of a square matrix: returns `(Q, R)` with `A = QR`.
pub fn householder_qr(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    if !a.is_square() {
        return Err(Error::Shape("QR expects a square matrix".into()));
    }
    let n = a.rows;
    let mut r = a.clone();
    let mut q = CMatrix::identity(n);
    let mut v = vec![ZERO; n];
    for k in 0..n.saturating_sub(1) {
        let norm: f64 = (k..n).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm;
        for i in k..n {
            v[i] = r[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: f64 = (k..n).map(|i| v[i].norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // R ← (I − 2vv*/|v|²) R
        for j in k..n {
            let mut dot = ZERO;
            for i in k..n {
                dot += v[i].conj() * r[(i, j)];
            }
            let c = dot * (2.0 / vnorm2);
            for i in k..n {
                let vi = v[i];
                r[(i, j)] -= c * vi;
            }
        }
        // Q ← Q (I − 2vv*/|v|²)
        for i in 0..n {
            let mut dot = ZERO;
            for l in k..n {
                dot += q[(i, l)] * v[l];
            }
            let c = dot * (2.0 / vnorm2);
            for l in k..n {
                let vl = v[l].conj();
                q[(i, l)] -= c * vl;
            }
        }
        for i in k + 1..n {
            r[(i, k)] = ZERO;
        }
    }
    Ok((q, r))
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
    pub sweeps: usize,
}

/// Cyclic Jacobi sweeps until the off-diagonal mass is negligible.
pub const JACOBI_MAX_SWEEPS: usize = 40;

/// Cyclic-Jacobi eigensolver for Hermitian matrices.
pub fn jacobi_eigh(a: &CMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::Shape("eigensolver expects a square matrix".into()));
    }
    let n = a.rows;
    let mut m = a.clone();
    // Symmetrize to remove rounding asymmetry in the input.
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    let mut w = CMatrix::identity(n);
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    loop {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let e = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // V = [[c, s], [−s ē, c ē]] on (p, q); M ← V* M V.
                let ebar = e.conj();
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c - mkq * (s * ebar);
                    m[(k, q)] = mkp * s + mkq * (c * ebar);
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c - mqk * (s * e);
                    m[(q, k)] = mpk * s + mqk * (c * e);
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let wkp = w[(k, p)];
                    let wkq = w[(k, q)];
                    w[(k, p)] = wkp * c - wkq * (s * ebar);
                    w[(k, q)] = wkp * s + wkq * (c * ebar);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, col)] = w[(k, i)];
        }
    }
    Ok(HermitianEigen {
        values,
        vectors,
        sweeps,
    })
}

impl HermitianEigen {
    /// `max_k ‖A v_k − μ_k v_k‖`.
    pub fn residual(&self, a: &CMatrix) -> f64 {
        let n = a.rows;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let mut r2 = 0.0;
            for i in 0..n {
                let mut s = ZERO;
                for j in 0..n {
                    s += a[(i, j)] * self.vectors[(j, k)];
                }
                r2 += (s - self.vectors[(i, k)] * self.values[k]).norm_sqr();
            }
            worst = worst.max(r2.sqrt());
        }
        worst
    }
}

/// Singular values of `A` (ascending), from the Jacobi eigenvalues of `A*A`.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    let e = jacobi_eigh(&a.gram())?;
    Ok(e.values.iter().map(|v| v.max(0.0).sqrt()).collect())
}

/// Lower-triangular Cholesky workspace in split real/imaginary storage, so
/// the inner products vectorize.
pub struct CholeskyWorkspace {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl CholeskyWorkspace {
    pub fn new(n: usize) -> Self {
        CholeskyWorkspace {
            n,
            re: vec![0.0; n * n],
            im: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Writes entry `(i, j)` of the lower triangle (`j ≤ i`).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.re[i * self.n + j] = v.re;
        self.im[i * self.n + j] = v.im;
    }

    /// Factors in place and returns `log det`. The matrix must be Hermitian
    /// positive definite; only the lower triangle is read.
    pub fn logdet(&mut self) -> Result<f64> {
        let n = self.n;
        let mut logdet = 0.0;
        for i in 0..n {
            for j in 0..=i {
                let (ri, ii) = (i * n, i * n);
                let (rj, ij) = (j * n, j * n);
                // Σ_{k<j} L_ik conj(L_jk)
                let (mut sr, mut si) = (0.0, 0.0);
                {
                    let ar = &self.re[ri..ri + j];
                    let ai = &self.im[ii..ii + j];
                    let br = &self.re[rj..rj + j];
                    let bi = &self.im[ij..ij + j];
                    let mut acc = [0.0f64; 8];
                    let chunks = j / 4;
                    for c in 0..chunks {
                        for l in 0..4 {
                            let k = 4 * c + l;
                            acc[l] += ar[k] * br[k] + ai[k] * bi[k];
                            acc[4 + l] += ai[k] * br[k] - ar[k] * bi[k];
                        }
                    }
                    for k in 4 * chunks..j {
                        sr += ar[k] * br[k] + ai[k] * bi[k];
                        si += ai[k] * br[k] - ar[k] * bi[k];
                    }
                    sr += acc[0] + acc[1] + acc[2] + acc[3];
                    si += acc[4] + acc[5] + acc[6] + acc[7];
                }
                let vr = self.re[i * n + j] - sr;
                let vi = self.im[i * n + j] - si;
                if i == j {
                    if !(vr > 0.0) {
                        return Err(Error::Degenerate(format!(
                            "matrix is not positive definite at pivot {i}"
                        )));
                    }
                    let d = vr.sqrt();
                    self.re[i * n + i] = d;
                    self.im[i * n + i] = 0.0;
                    logdet += 2.0 * d.ln();
                } else {
                    let d = self.re[j * n + j];
                    self.re[i * n + j] = vr / d;
                    self.im[i * n + j] = vi / d;
                }
            }
        }
        Ok(logdet)
    }
}

/// `log det A` for Hermitian positive definite `A`.
pub fn cholesky_logdet(a: &CMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Shape("Cholesky expects a square matrix".into()));
    }
    let n = a.rows;
    let mut ws = CholeskyWorkspace::new(n);
    for i in 0..n {
        for j in 0..=i {
            ws.set(i, j, a[(i, j)]);
        }
    }
    ws.logdet()
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Shape("only square matrices are invertible".into()));
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut inv = CMatrix::identity(n);
    let scale = a.frobenius();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm()))
            .unwrap();
        if m[(piv, col)].norm() <= 1e-14 * scale || scale == 0.0 {
            return Err(Error::Singular(format!("pivot {col} vanishes")));
        }
        if piv != col {
            for j in 0..n {
                m.data.swap(piv * n + j, col * n + j);
                inv.data.swap(piv * n + j, col * n + j);
            }
        }
        let d = ONE / m[(col, col)];
        for j in 0..n {
            m[(col, j)] *= d;
            inv[(col, j)] *= d;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[(i, col)];
            if f == ZERO {
                continue;
            }
            for j in 0..n {
                let mc = m[(col, j)];
                let ic = inv[(col, j)];
                m[(i, j)] -= f * mc;
                inv[(i, j)] -= f * ic;
            }
        }
    }
    Ok(inv)
}

/// Unitary reduction to upper Hessenberg form (returns only `H`).
pub fn hessenberg(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Shape(
            "Hessenberg reduction expects a square matrix".into(),
        ));
    }
    let n = a.rows;
    let mut h = a.clone();
    let mut v = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm;
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vn2: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        if vn2 == 0.0 {
            continue;
        }
        for j in 0..n {
            let mut dot = ZERO;
            for i in k + 1..n {
                dot += v[i].conj() * h[(i, j)];
            }
            let c = dot * (2.0 / vn2);
            for i in k + 1..n {
                let vi = v[i];
                h[(i, j)] -= c * vi;
            }
        }
        for i in 0..n {
            let mut dot = ZERO;
            for l in k + 1..n {
                dot += h[(i, l)] * v[l];
            }
            let c = dot * (2.0 / vn2);
            for l in k + 1..n {
                let vl = v[l].conj();
                h[(i, l)] -= c * vl;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    Ok(h)
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    // Returns (c, s) with [c s; −s̄ c]·[a; b] = [r; 0].
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, (b / bn).conj());
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

/// Eigenvalues of a general complex matrix by shifted QR on its Hessenberg form.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let mut h = hessenberg(a)?;
    let n = h.rows;
    let mut out = Vec::with_capacity(n);
    let mut hi = n;
    let mut iter = 0usize;
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    while hi > 0 {
        if hi == 1 {
            out.push(h[(0, 0)]);
            break;
        }
        // Find the active block [lo, hi).
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= f64::EPSILON * diag.max(1e-3 * scale) {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            out.push(h[(hi - 1, hi - 1)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 100 * n {
            return Err(Error::NoConvergence(iter));
        }
        // Wilkinson shift from the trailing 2x2 block; exceptional shift every 11 steps.
        let a11 = h[(hi - 2, hi - 2)];
        let a12 = h[(hi - 2, hi - 1)];
        let a21 = h[(hi - 1, hi - 2)];
        let a22 = h[(hi - 1, hi - 1)];
        let mu = if iter.is_multiple_of(11) {
            a22 + Complex64::new(h[(hi - 1, hi - 2)].norm(), 0.0)
        } else {
            let tr = a11 + a22;
            let det = a11 * a22 - a12 * a21;
            let disc = (tr * tr * 0.25 - det).sqrt();
            let e1 = tr * 0.5 + disc;
            let e2 = tr * 0.5 - disc;
            if (e1 - a22).norm() < (e2 - a22).norm() {
                e1
            } else {
                e2
            }
        };
        for i in lo..hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi - 1 {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            for i in 0..(k + 2).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..hi {
            h[(i, i)] += mu;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn test_matrix(n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let x = ((i * 7 + j * 13 + 3) % 17) as f64 / 17.0 - 0.5;
                let y = ((i * 11 + j * 5 + 1) % 19) as f64 / 19.0 - 0.5;
                m[(i, j)] = c(x, y);
            }
        }
        m
    }

    #[test]
    fn qr_reconstructs() {
        let a = test_matrix(6);
        let (q, r) = householder_qr(&a).unwrap();
        assert!(q.unitarity_defect() < 1e-13);
        let qr = q.matmul(&r).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((qr[(i, j)] - a[(i, j)]).norm() < 1e-13);
                if i > j {
                    assert_eq!(r[(i, j)], ZERO);
                }
            }
        }
    }

    #[test]
    fn jacobi_residual_and_trace() {
        let a = test_matrix(9).gram();
        let e = jacobi_eigh(&a).unwrap();
        assert!(e.residual(&a) <= 1e-10 * a.frobenius());
        let sum: f64 = e.values.iter().sum();
        assert!((sum - a.trace().re).abs() < 1e-12 * a.frobenius());
        assert!(e.vectors.unitarity_defect() < 1e-12);
    }

    #[test]
    fn cholesky_matches_jacobi() {
        let mut a = test_matrix(12).gram();
        for i in 0..12 {
            a[(i, i)] += c(0.1, 0.0);
        }
        let e = jacobi_eigh(&a).unwrap();
        let expected: f64 = e.values.iter().map(|v| v.ln()).sum();
        assert!((cholesky_logdet(&a).unwrap() - expected).abs() < 1e-11);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = test_matrix(7).shift(c(2.0, 0.5));
        let inv = inverse(&a).unwrap();
        let id = a.matmul(&inv).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let t = if i == j { ONE } else { ZERO };
                assert!((id[(i, j)] - t).norm() < 1e-12);
            }
        }
        assert!(inverse(&CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn eigenvalues_of_triangular_and_general() {
        let mut t = CMatrix::zeros(4, 4);
        let diag = [c(1.0, 0.0), c(-2.0, 1.0), c(0.5, -0.5), c(3.0, 0.0)];
        for i in 0..4 {
            t[(i, i)] = diag[i];
            for j in i + 1..4 {
                t[(i, j)] = c(0.3 * j as f64, -0.1);
            }
        }
        let mut ev = eigenvalues(&t).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        let mut d = diag.to_vec();
        d.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (x, y) in ev.iter().zip(&d) {
            assert!((x - y).norm() < 1e-12);
        }
        let a = test_matrix(10);
        let ev = eigenvalues(&a).unwrap();
        let tr: Complex64 = ev.iter().sum();
        assert!((tr - a.trace()).norm() < 1e-11);
        for z in ev {
            let s = singular_values(&a.shift(z)).unwrap();
            assert!(s[0] < 1e-7, "{z} not an eigenvalue: {}", s[0]);
        }
    }
}
