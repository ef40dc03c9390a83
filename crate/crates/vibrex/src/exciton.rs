//! Exciton eigensystem of the anchored chain.
//!
//! The single-exciton Hamiltonian lives on `L + 1` sites: the donor anchor at
//! `x = 0`, the chain sites `x = 1..=N` with hopping `phi`, and the acceptor
//! anchor at `x = L`, with the two anchoring bonds scaled down to
//! `epsilon * phi`. Because the anchors are resonant with the band-centre
//! stationary wave `k = L/2`, the three states hybridize into a symmetric
//! triplet while every other wave stays essentially unperturbed.
//!
//! Two constructions of the eigensystem are provided and kept strictly
//! parallel so they can be cross-checked:
//!
//! * [`analytic_eigensystem`]: the closed-form basis, exact for the
//!   restriction to the resonant subspace and first order in `epsilon`
//!   elsewhere;
//! * [`diagonalize_h_a`]: full numerical diagonalization, labeled against the
//!   closed form by overlap.

use crate::linalg::{self, EighError, Mat};
use crate::params::{DerivedParams, ModelParams, ParamError};
use thiserror::Error;

/// How the exciton basis was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Closed-form triplet plus unperturbed stationary waves.
    Analytic,
    /// Numerical diagonalization of the full site Hamiltonian.
    Numeric,
}

/// Physical identity of one exciton eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuLabel {
    /// Stationary wave of wavenumber index `k` (1-based, `k != L/2`).
    Wave(usize),
    /// Upper triplet state at `omega0 + sqrt(2) g`.
    Plus,
    /// Dark anchor combination pinned at `omega0`; it carries no chain
    /// amplitude and decouples from both the transfer and the phonon mode.
    Dark,
    /// Lower triplet state at `omega0 - sqrt(2) g`.
    Minus,
}

impl std::fmt::Display for MuLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MuLabel::Wave(k) => write!(f, "k{k}"),
            MuLabel::Plus => write!(f, "+"),
            MuLabel::Dark => write!(f, "o"),
            MuLabel::Minus => write!(f, "-"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExcitonError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Eigh(#[from] EighError),
    #[error("states {first} and {second} both overlap reference {label} strongest; labeling is ambiguous")]
    AmbiguousLabeling {
        first: usize,
        second: usize,
        label: MuLabel,
    },
    #[error("state {index} overlaps no reference above 0.5 (best {best:.3e})")]
    NoDominantReference { index: usize, best: f64 },
}

/// Labeled exciton eigenbasis. Columns of `vectors` are eigenstates over the
/// site index `x = 0..=L`; `energies[i]` and `labels[i]` describe column `i`.
#[derive(Debug, Clone)]
pub struct ExcitonSystem {
    pub energies: Vec<f64>,
    pub vectors: Mat<f64>,
    pub labels: Vec<MuLabel>,
    pub basis: Basis,
}

impl ExcitonSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn index_of(&self, label: MuLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Amplitudes of every eigenstate on the donor anchor `x = 0`.
    pub fn donor_amplitudes(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.vectors[(0, i)]).collect()
    }

    /// Amplitudes on the acceptor anchor `x = L`.
    pub fn acceptor_amplitudes(&self) -> Vec<f64> {
        let last = self.dim() - 1;
        (0..self.dim()).map(|i| self.vectors[(last, i)]).collect()
    }
}

/// Stationary waves of the isolated chain (anchoring bonds cut).
///
/// Returns `(energies, coefficients)`: `energies[k-1] = omega0 +
/// 2 phi cos(k pi / L)` and column `k-1` of the coefficient matrix holds
/// `sqrt(2/L) sin(k pi x / L)` on the chain rows `x = 1..=N`, zero on the two
/// anchor rows.
pub fn stationary_waves(p: &ModelParams) -> (Vec<f64>, Mat<f64>) {
    let n = p.n_sites();
    let l = p.l_sites as f64;
    let norm = (2.0 / l).sqrt();
    let mut energies = Vec::with_capacity(n);
    let mut coeffs = Mat::zeros(n + 2, n);
    for k in 1..=n {
        let kf = k as f64;
        energies.push(p.omega0 + 2.0 * p.phi * (kf * std::f64::consts::PI / l).cos());
        for x in 1..=n {
            coeffs[(x, k - 1)] = norm * (kf * (x as f64) * std::f64::consts::PI / l).sin();
        }
    }
    (energies, coeffs)
}

/// Site-basis Hamiltonian of the anchored chain, `(L+1) x (L+1)`.
pub fn build_h_a(p: &ModelParams) -> Mat<f64> {
    let n = p.n_sites();
    let dim = n + 2;
    let mut h = Mat::zeros(dim, dim);
    for x in 0..dim {
        h[(x, x)] = p.omega0;
    }
    for x in 1..n {
        h[(x, x + 1)] = p.phi;
        h[(x + 1, x)] = p.phi;
    }
    let anchor = p.epsilon * p.phi;
    h[(0, 1)] = anchor;
    h[(1, 0)] = anchor;
    h[(n, n + 1)] = anchor;
    h[(n + 1, n)] = anchor;
    h
}

/// Closed-form resonant triplet `(energies, site_vectors)` in the order
/// Plus, Dark, Minus.
///
/// The anchors couple only to the band-centre wave, with strengths `g` on the
/// donor side and `g' = g sin(N pi / 2)` on the acceptor side; the resulting
/// 3x3 block diagonalizes exactly into
/// `psi_+- = |0> / 2 +- |phi_c> / sqrt(2) + delta_N |L> / 2` at
/// `omega0 +- sqrt(2) g`, and the dark combination
/// `(|0> - delta_N |L>) / sqrt(2)` pinned at `omega0`.
pub fn analytic_triplet(p: &ModelParams, d: &DerivedParams) -> ([f64; 3], Mat<f64>) {
    let n = p.n_sites();
    let dim = n + 2;
    let (_, waves) = stationary_waves(p);
    let kc = p.l_sites / 2; // band-centre wavenumber index
    let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = Mat::zeros(dim, 3);
    for x in 1..=n {
        let w = waves[(x, kc - 1)];
        v[(x, 0)] = sqrt_half * w;
        v[(x, 2)] = -sqrt_half * w;
    }
    v[(0, 0)] = 0.5;
    v[(dim - 1, 0)] = 0.5 * d.delta_n;
    v[(0, 1)] = sqrt_half;
    v[(dim - 1, 1)] = -sqrt_half * d.delta_n;
    v[(0, 2)] = 0.5;
    v[(dim - 1, 2)] = 0.5 * d.delta_n;
    let split = std::f64::consts::SQRT_2 * d.g;
    ([p.omega0 + split, p.omega0, p.omega0 - split], v)
}

/// Closed-form eigensystem: stationary waves with `k < L/2`, then the triplet
/// (Plus, Dark, Minus), then the waves with `k > L/2`.
pub fn analytic_eigensystem(p: &ModelParams, d: &DerivedParams) -> ExcitonSystem {
    let n = p.n_sites();
    let dim = n + 2;
    let kc = p.l_sites / 2;
    let (wave_e, wave_v) = stationary_waves(p);
    let (trip_e, trip_v) = analytic_triplet(p, d);

    let mut energies = Vec::with_capacity(dim);
    let mut labels = Vec::with_capacity(dim);
    let mut vectors = Mat::zeros(dim, dim);
    let mut col = 0;
    let push_wave = |k: usize, col: &mut usize, energies: &mut Vec<f64>, labels: &mut Vec<MuLabel>, vectors: &mut Mat<f64>| {
        energies.push(wave_e[k - 1]);
        labels.push(MuLabel::Wave(k));
        for x in 0..dim {
            vectors[(x, *col)] = wave_v[(x, k - 1)];
        }
        *col += 1;
    };
    for k in 1..kc {
        push_wave(k, &mut col, &mut energies, &mut labels, &mut vectors);
    }
    for (j, label) in [MuLabel::Plus, MuLabel::Dark, MuLabel::Minus].into_iter().enumerate() {
        energies.push(trip_e[j]);
        labels.push(label);
        for x in 0..dim {
            vectors[(x, col)] = trip_v[(x, j)];
        }
        col += 1;
    }
    for k in (kc + 1)..=n {
        push_wave(k, &mut col, &mut energies, &mut labels, &mut vectors);
    }

    ExcitonSystem {
        energies,
        vectors,
        labels,
        basis: Basis::Analytic,
    }
}

/// Numerical eigensystem of the full site Hamiltonian, labeled by maximum
/// overlap with the closed-form references.
///
/// Degenerate clusters (eigenvalues closer than `1e-8 * ||H||`) are rotated
/// so that each column aligns with the projection of one reference onto the
/// cluster subspace; the rotation mixes only degenerate eigenvectors, so the
/// output still diagonalizes the Hamiltonian exactly. Without it the labels
/// at `epsilon = 0`, where the triplet is exactly threefold degenerate, would
/// depend on solver internals.
pub fn diagonalize_h_a(p: &ModelParams, d: &DerivedParams) -> Result<ExcitonSystem, ExcitonError> {
    p.validate()?;
    let h = build_h_a(p);
    let scale = linalg::frobenius(&h);
    let eig = linalg::eigh(&h, 1e-10)?;
    let dim = eig.values.len();
    let refs = analytic_eigensystem(p, d);
    let mut vectors = eig.vectors.clone();
    let energies = eig.values.clone();

    // Rotate degenerate clusters onto the reference directions.
    let cluster_tol = 1e-8 * scale;
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && (energies[end] - energies[end - 1]).abs() <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            align_cluster(&mut vectors, start..end, &refs.vectors);
        }
        start = end;
    }

    // Assign each column the reference it overlaps most.
    let mut labels = Vec::with_capacity(dim);
    let mut claimed: Vec<Option<usize>> = vec![None; dim];
    for i in 0..dim {
        let mut best = 0.0;
        let mut best_j = 0;
        for j in 0..dim {
            let mut ov = 0.0;
            for x in 0..dim {
                ov += vectors[(x, i)] * refs.vectors[(x, j)];
            }
            if ov.abs() > best {
                best = ov.abs();
                best_j = j;
            }
        }
        if best < 0.5 {
            return Err(ExcitonError::NoDominantReference { index: i, best });
        }
        if let Some(first) = claimed[best_j] {
            return Err(ExcitonError::AmbiguousLabeling {
                first,
                second: i,
                label: refs.labels[best_j],
            });
        }
        claimed[best_j] = Some(i);
        labels.push(refs.labels[best_j]);
    }

    Ok(ExcitonSystem {
        energies,
        vectors,
        labels,
        basis: Basis::Numeric,
    })
}

/// Replace the columns `range` of `vectors` (an orthonormal basis of a
/// degenerate subspace) with the Gram-Schmidt orthonormalization of the
/// reference projections onto that subspace.
fn align_cluster(vectors: &mut Mat<f64>, range: std::ops::Range<usize>, refs: &Mat<f64>) {
    let dim = vectors.nrows();
    let m = range.len();
    let cols: Vec<usize> = range.collect();

    // Coordinates of every reference in the cluster subspace.
    let nrefs = refs.ncols();
    let mut coords: Vec<(usize, Vec<f64>, f64)> = (0..nrefs)
        .map(|j| {
            let c: Vec<f64> = cols
                .iter()
                .map(|&i| (0..dim).map(|x| vectors[(x, i)] * refs[(x, j)]).sum())
                .collect();
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            (j, c, norm)
        })
        .collect();
    coords.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));

    // Orthonormalize the m best-projected references inside the subspace.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (_, c, _) in coords {
        if basis.len() == m {
            break;
        }
        let mut v = c;
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in &mut v {
                *vi /= norm;
            }
            basis.push(v);
        }
    }
    if basis.len() < m {
        // References do not span the cluster; keep the solver's basis.
        return;
    }

    let old: Vec<Vec<f64>> = cols
        .iter()
        .map(|&i| (0..dim).map(|x| vectors[(x, i)]).collect())
        .collect();
    for (slot, b) in basis.iter().enumerate() {
        for x in 0..dim {
            let mut v = 0.0;
            for (q, oq) in old.iter().enumerate() {
                v += b[q] * oq[x];
            }
            vectors[(x, cols[slot])] = v;
        }
        linalg::fix_sign(vectors, cols[slot]);
    }
}
