//! Small dense least-squares solver (Householder QR).

use alloc::vec;
use alloc::vec::Vec;

/// Failure of [`least_squares`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LstsqError {
    /// Fewer rows than columns.
    Underdetermined,
    /// Column `0` is (numerically) a linear combination of earlier columns.
    RankDeficient(usize),
}

/// Result of an ordinary least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqFit {
    pub coefficients: Vec<f64>,
    pub residual_sum_squares: f64,
    /// Diagonal of `(XᵀX)⁻¹`, for standard errors.
    pub unscaled_variances: Vec<f64>,
}

/// Minimise `‖X β − y‖²` for a row-major design `X` with `cols` columns.
pub fn least_squares(design: &[f64], cols: usize, y: &[f64]) -> Result<LstsqFit, LstsqError> {
    let rows = y.len();
    assert_eq!(
        design.len(),
        rows * cols,
        "design does not match response length"
    );
    if rows < cols {
        return Err(LstsqError::Underdetermined);
    }
    // column-major working copy
    let mut a: Vec<f64> = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            a[c * rows + r] = design[r * cols + c];
        }
    }
    let mut b = y.to_vec();
    let col_norms: Vec<f64> = (0..cols)
        .map(|c| {
            libm::sqrt(
                a[c * rows..(c + 1) * rows]
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>(),
            )
        })
        .collect();
    let mut diag = vec![0.0; cols];

    for k in 0..cols {
        let col = &mut a[k * rows..(k + 1) * rows];
        let norm = libm::sqrt(col[k..].iter().map(|v| v * v).sum::<f64>());
        let scale = col_norms[k].max(f64::MIN_POSITIVE);
        if norm <= 1e-11 * scale {
            return Err(LstsqError::RankDeficient(k));
        }
        let alpha = if col[k] > 0.0 { -norm } else { norm };
        col[k] -= alpha;
        let vnorm2: f64 = col[k..].iter().map(|v| v * v).sum();
        diag[k] = alpha;
        // reflect remaining columns and the response
        let v: Vec<f64> = col[k..].to_vec();
        for j in k + 1..cols {
            let cj = &mut a[j * rows + k..(j + 1) * rows];
            let dot: f64 = v.iter().zip(cj.iter()).map(|(p, q)| p * q).sum();
            let f = 2.0 * dot / vnorm2;
            for (q, p) in cj.iter_mut().zip(&v) {
                *q -= f * p;
            }
        }
        let dot: f64 = v.iter().zip(&b[k..]).map(|(p, q)| p * q).sum();
        let f = 2.0 * dot / vnorm2;
        for (q, p) in b[k..].iter_mut().zip(&v) {
            *q -= f * p;
        }
    }

    // R is upper triangular with diagonal `diag`, off-diagonals in a[j*rows + i], i < j
    let r_at = |i: usize, j: usize| if i == j { diag[i] } else { a[j * rows + i] };
    let mut beta = vec![0.0; cols];
    for i in (0..cols).rev() {
        let mut s = b[i];
        for j in i + 1..cols {
            s -= r_at(i, j) * beta[j];
        }
        beta[i] = s / diag[i];
    }
    let rss: f64 = b[cols..].iter().map(|v| v * v).sum();

    // diag((RᵀR)⁻¹) = row sums of squares of R⁻¹
    let mut rinv = vec![0.0; cols * cols];
    for j in 0..cols {
        rinv[j * cols + j] = 1.0 / diag[j];
        for i in (0..j).rev() {
            let mut s = 0.0;
            for k in i + 1..=j {
                s += r_at(i, k) * rinv[k * cols + j];
            }
            rinv[i * cols + j] = -s / diag[i];
        }
    }
    let unscaled_variances = (0..cols)
        .map(|i| {
            (i..cols)
                .map(|j| rinv[i * cols + j] * rinv[i * cols + j])
                .sum()
        })
        .collect();

    Ok(LstsqFit {
        coefficients: beta,
        residual_sum_squares: rss,
        unscaled_variances,
    })
}
