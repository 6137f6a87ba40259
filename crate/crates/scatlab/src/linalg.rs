//! Dense complex least squares by Householder QR with column scaling.
//!
//! The fundamental-solutions collocation systems solved here are
//! intentionally ill-conditioned; the QR solve is backward stable, so the
//! boundary residual certificate downstream remains meaningful even when
//! the coefficient vector itself is not.

use num_complex::Complex64;

/// Column-major complex matrix.
#[derive(Debug, Clone)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[c * self.rows + r] = v;
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// y = A x.
    #[cfg(test)]
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        for c in 0..self.cols {
            let xc = x[c];
            for (r, a) in self.col(c).iter().enumerate() {
                y[r] += a * xc;
            }
        }
        y
    }
}

/// Result of a least-squares solve.
#[derive(Debug, Clone)]
pub struct LstSq {
    pub solution: Vec<Complex64>,
    /// Euclidean norm of the residual A x - b.
    #[allow(dead_code)]
    pub residual_norm: f64,
    /// max |R_kk| / min |R_kk|: a cheap ill-conditioning indicator.
    pub r_diag_ratio: f64,
}

/// Minimize ||A x - b||_2 for a tall matrix (rows >= cols).
///
/// Columns are scaled to unit norm before factorization and the
/// solution is unscaled afterwards.
pub fn lstsq(a: &CMatrix, b: &[Complex64]) -> LstSq {
    assert!(a.rows >= a.cols, "least squares expects rows >= cols");
    assert_eq!(b.len(), a.rows);
    let m = a.rows;
    let n = a.cols;

    let mut work = a.clone();
    let mut rhs = b.to_vec();

    // Column scaling.
    let mut scale = vec![1.0f64; n];
    for c in 0..n {
        let norm = work.col(c).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            scale[c] = norm;
            for v in work.col_mut(c) {
                *v /= norm;
            }
        }
    }

    // Householder QR, applying reflectors to the rhs as we go.
    let mut diag = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        // Build reflector from work[k.., k].
        let alpha = work.get(k, k);
        let xnorm = (k..m).map(|r| work.get(r, k).norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            diag[k] = Complex64::new(0.0, 0.0);
            continue;
        }
        let phase = if alpha.norm() > 0.0 { alpha / alpha.norm() } else { Complex64::new(1.0, 0.0) };
        let beta = -phase * xnorm;
        // v = x - beta e_k, stored in place of column k below the diagonal.
        let v0 = alpha - beta;
        let vnorm_sqr = v0.norm_sqr() + (k + 1..m).map(|r| work.get(r, k).norm_sqr()).sum::<f64>();
        if vnorm_sqr == 0.0 {
            diag[k] = beta;
            continue;
        }
        let tau = 2.0 / vnorm_sqr;
        work.set(k, k, v0);

        // Apply (I - tau v v^H) to remaining columns and to the rhs.
        for c in k + 1..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for r in k..m {
                dot += work.get(r, k).conj() * work.get(r, c);
            }
            dot *= tau;
            for r in k..m {
                let update = work.get(r, c) - dot * work.get(r, k);
                work.set(r, c, update);
            }
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for r in k..m {
            dot += work.get(r, k).conj() * rhs[r];
        }
        dot *= tau;
        for r in k..m {
            rhs[r] -= dot * work.get(r, k);
        }
        diag[k] = beta;
    }

    // Back substitution on R (strict upper part of work, diagonal in diag).
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for c in k + 1..n {
            s -= work.get(k, c) * x[c];
        }
        x[k] = if diag[k].norm() > 0.0 { s / diag[k] } else { Complex64::new(0.0, 0.0) };
    }

    let residual_norm = rhs[n..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    let mut dmax = 0.0f64;
    let mut dmin = f64::INFINITY;
    for d in &diag {
        let a = d.norm();
        if a > dmax {
            dmax = a;
        }
        if a < dmin {
            dmin = a;
        }
    }
    let r_diag_ratio = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };

    for k in 0..n {
        x[k] /= scale[k];
    }
    LstSq { solution: x, residual_norm, r_diag_ratio }
}
