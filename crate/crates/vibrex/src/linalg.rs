//! Thin facade over the dense symmetric eigensolver.
//!
//! Everything downstream assumes the two contracts enforced here:
//! eigenvalues ascending with per-pair residual `||Hv - Ev|| <= tol*||H||`,
//! and a deterministic eigenvector gauge (first component of magnitude above
//! a relative threshold is positive). The backend runs sequentially so that
//! results do not depend on thread-pool size.

use std::sync::Once;

use thiserror::Error;

pub use faer::Mat;

#[derive(Debug, Error)]
pub enum EighError {
    #[error("eigensolver failed to converge on a {dim}x{dim} matrix")]
    NoConvergence { dim: usize },
    #[error("eigenpair residual {residual:.3e} exceeds {bound:.3e} (dim {dim})")]
    ResidualTooLarge {
        residual: f64,
        bound: f64,
        dim: usize,
    },
}

static FAER_SEQ: Once = Once::new();

fn pin_sequential() {
    FAER_SEQ.call_once(|| {
        faer::set_global_parallelism(faer::Par::Seq);
    });
}

/// Eigendecomposition of a real symmetric matrix.
///
/// `values[i]` ascending; `vectors.col(i)` is the unit eigenvector for
/// `values[i]`, sign-fixed so the first component with `|v_j| > 1e-8` is
/// positive. `max_residual` is `max_i ||H v_i - E_i v_i||_2`.
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
    pub max_residual: f64,
}

/// Decomposes `h` (assumed symmetric; the lower triangle is read) and checks
/// residuals against `rel_tol * ||h||_F`.
pub fn eigh(h: &Mat<f64>, rel_tol: f64) -> Result<Eigh, EighError> {
    pin_sequential();
    let dim = h.nrows();
    assert_eq!(dim, h.ncols(), "eigh expects a square matrix");

    let evd = h
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| EighError::NoConvergence { dim })?;

    let s = evd.S();
    let mut values: Vec<f64> = (0..dim).map(|i| s[i]).collect();
    let mut vectors = evd.U().to_owned();

    // The backend returns ascending eigenvalues; sort defensively anyway so the
    // ordering contract never silently depends on backend internals.
    if values.windows(2).any(|w| w[0] > w[1]) {
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let permuted = Mat::from_fn(dim, dim, |i, j| vectors[(i, order[j])]);
        values = order.iter().map(|&j| values[j]).collect();
        vectors = permuted;
    }

    for j in 0..dim {
        fix_sign(&mut vectors, j);
    }

    let norm = frobenius(h);
    let bound = rel_tol * norm.max(f64::MIN_POSITIVE);
    let max_residual = worst_residual(h, &values, &vectors);
    if max_residual > bound {
        return Err(EighError::ResidualTooLarge {
            residual: max_residual,
            bound,
            dim,
        });
    }

    Ok(Eigh {
        values,
        vectors,
        max_residual,
    })
}

/// Flips column `j` so its first component with magnitude above `1e-8`
/// (relative to the column max) is positive.
pub fn fix_sign(m: &mut Mat<f64>, j: usize) {
    let n = m.nrows();
    let mut peak = 0.0f64;
    for i in 0..n {
        peak = peak.max(m[(i, j)].abs());
    }
    if peak == 0.0 {
        return;
    }
    let thresh = 1e-8 * peak;
    for i in 0..n {
        let v = m[(i, j)];
        if v.abs() > thresh {
            if v < 0.0 {
                for r in 0..n {
                    m[(r, j)] = -m[(r, j)];
                }
            }
            return;
        }
    }
}

pub fn frobenius(m: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)] * m[(i, j)];
        }
    }
    s.sqrt()
}

fn worst_residual(h: &Mat<f64>, values: &[f64], vectors: &Mat<f64>) -> f64 {
    let dim = h.nrows();
    let mut worst = 0.0f64;
    for j in 0..dim {
        let mut r2 = 0.0;
        for i in 0..dim {
            let mut hv = 0.0;
            for k in 0..dim {
                hv += h[(i, k)] * vectors[(k, j)];
            }
            let r = hv - values[j] * vectors[(i, j)];
            r2 += r * r;
        }
        worst = worst.max(r2.sqrt());
    }
    worst
}

/// Largest absolute deviation of `VᵀV` from the identity.
pub fn orthonormality_defect(vectors: &Mat<f64>) -> f64 {
    let n = vectors.ncols();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in a..n {
            let mut dot = 0.0;
            for i in 0..vectors.nrows() {
                dot += vectors[(i, a)] * vectors[(i, b)];
            }
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}
