//! Phonon Fock space: thermal truncation and the exciton-phonon coupling.
//!
//! The lowest lattice mode is kept as a single quantum oscillator. Its Fock
//! space is truncated at `n_max` quanta chosen so that the neglected thermal
//! weight is below a tolerance, and the exciton-phonon interaction is the
//! displacement coupling `M (a^dag + a)` where `M` connects stationary waves
//! of adjacent wavenumber with uniform strength `eta`.

use crate::exciton::ExcitonSystem;
use crate::linalg::Mat;
use crate::params::{DerivedParams, ModelParams};
use thiserror::Error;

/// Hard ceiling on the number of phonon levels; the coupled matrix grows as
/// `((L+1)(n_max+1))^2` and past this point dense diagonalization is the
/// wrong tool.
pub const MAX_PHONON_LEVELS: usize = 512;

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error("truncation tolerance must lie in (0, 1e-2], got {0}")]
    BadTolerance(f64),
    #[error("thermal truncation needs n_max = {needed}, above the cap {cap}")]
    CapExceeded { needed: usize, cap: usize },
}

/// Thermal state of the truncated mode.
#[derive(Debug, Clone)]
pub struct ThermalTruncation {
    pub n_max: usize,
    /// Boltzmann weights `p_n = exp(-n beta Omega) (1 - exp(-beta Omega))`
    /// for `n = 0..=n_max`.
    pub weights: Vec<f64>,
    /// Thermal weight of the discarded levels, `exp(-(n_max+1) beta Omega)`.
    pub tail_mass: f64,
}

/// Boltzmann weights and tail for a given level count. At `T = 0` the ground
/// state carries everything.
pub fn thermal_truncation(d: &DerivedParams, n_max: usize) -> ThermalTruncation {
    if !d.beta_omega.is_finite() {
        let mut weights = vec![0.0; n_max + 1];
        weights[0] = 1.0;
        return ThermalTruncation {
            n_max,
            weights,
            tail_mass: 0.0,
        };
    }
    let q = (-d.beta_omega).exp();
    let norm = 1.0 - q;
    let mut weights = Vec::with_capacity(n_max + 1);
    let mut w = norm;
    for _ in 0..=n_max {
        weights.push(w);
        w *= q;
    }
    ThermalTruncation {
        n_max,
        weights,
        tail_mass: (-(d.beta_omega) * (n_max as f64 + 1.0)).exp(),
    }
}

/// Smallest `n_max` whose discarded thermal weight is below `tol`.
///
/// At `T = 0` the thermal criterion is vacuous and a floor of 10 levels
/// (or more if the coupling `eta` is strong against `Omega`) keeps the
/// zero-point dressing converged. An optional `probe` maps a candidate
/// `n_max` to any scalar observable; the estimate is then raised in steps of
/// 10 until the observable moves by less than 1e-4, which catches couplings
/// strong enough to spread population beyond the thermal prediction.
pub fn choose_n_max(
    d: &DerivedParams,
    tol: f64,
    probe: Option<&dyn Fn(usize) -> f64>,
) -> Result<usize, FockError> {
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(FockError::BadTolerance(tol));
    }
    let mut n = if d.beta_omega.is_finite() {
        // Smallest n with exp(-(n+1) beta Omega) < tol.
        let needed = (-tol.ln() / d.beta_omega - 1.0).ceil().max(0.0) as usize;
        if needed > MAX_PHONON_LEVELS {
            return Err(FockError::CapExceeded {
                needed,
                cap: MAX_PHONON_LEVELS,
            });
        }
        needed
    } else {
        let zero_point = 6.0 * d.eta * d.eta / (d.omega * d.omega) * 2.0;
        (zero_point.ceil() as usize).max(10)
    };
    if let Some(f) = probe {
        let mut current = f(n);
        while n + 10 <= MAX_PHONON_LEVELS {
            let next = f(n + 10);
            if (next - current).abs() < 1e-4 {
                break;
            }
            n += 10;
            current = next;
        }
        if n + 10 > MAX_PHONON_LEVELS {
            return Err(FockError::CapExceeded {
                needed: n + 10,
                cap: MAX_PHONON_LEVELS,
            });
        }
    }
    Ok(n)
}

/// Exciton-phonon coupling matrix in the given exciton basis.
///
/// In the stationary-wave basis the lowest mode couples waves of adjacent
/// wavenumber with uniform strength `eta` and does not touch the anchors;
/// the matrix here is that operator rotated onto the basis columns of `exc`.
/// In the closed-form basis the dark state's row and column vanish exactly,
/// which is what protects the stored qubit coherence.
pub fn m_operator(exc: &ExcitonSystem, p: &ModelParams, d: &DerivedParams) -> Mat<f64> {
    let dim = exc.dim();
    let n = p.n_sites();
    let (_, waves) = crate::exciton::stationary_waves(p);

    // M in the site basis: eta * sum_k |phi_k><phi_{k+1}| + h.c.
    let mut m_site = Mat::<f64>::zeros(dim, dim);
    for k in 0..n - 1 {
        for x in 1..=n {
            for y in 1..=n {
                let v = d.eta * (waves[(x, k)] * waves[(y, k + 1)] + waves[(x, k + 1)] * waves[(y, k)]);
                m_site[(x, y)] += v;
            }
        }
    }

    // Rotate onto the eigenbasis columns.
    let mut half = Mat::<f64>::zeros(dim, dim);
    for x in 0..dim {
        for j in 0..dim {
            let mut acc = 0.0;
            for y in 0..dim {
                acc += m_site[(x, y)] * exc.vectors[(y, j)];
            }
            half[(x, j)] = acc;
        }
    }
    let mut m = Mat::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = 0.0;
            for x in 0..dim {
                acc += exc.vectors[(x, i)] * half[(x, j)];
            }
            m[(i, j)] = acc;
        }
    }
    m
}

/// Dense Hamiltonian of the coupled exciton-phonon system.
#[derive(Debug, Clone)]
pub struct CoupledHamiltonian {
    /// `dim_exciton * n_levels` square matrix, exciton-major index
    /// `mu * n_levels + n`.
    pub matrix: Mat<f64>,
    pub dim_exciton: usize,
    /// Number of phonon levels kept, `n_max + 1`.
    pub n_levels: usize,
    /// Reference frequency subtracted when spectra are reported.
    pub omega0: f64,
}

impl CoupledHamiltonian {
    pub fn dim(&self) -> usize {
        self.dim_exciton * self.n_levels
    }

    pub fn index(&self, mu: usize, n: usize) -> usize {
        mu * self.n_levels + n
    }
}

/// Assemble `H = H_exciton + Omega a^dag a + M (a^dag + a)` on the truncated
/// Fock space.
pub fn build_full_h(
    exc: &ExcitonSystem,
    m: &Mat<f64>,
    p: &ModelParams,
    d: &DerivedParams,
    trunc: &ThermalTruncation,
) -> CoupledHamiltonian {
    let dim_a = exc.dim();
    let n_levels = trunc.n_max + 1;
    let dim = dim_a * n_levels;
    let mut h = Mat::<f64>::zeros(dim, dim);
    for mu in 0..dim_a {
        for nq in 0..n_levels {
            let row = mu * n_levels + nq;
            h[(row, row)] = exc.energies[mu] + nq as f64 * d.omega;
        }
    }
    for mu in 0..dim_a {
        for nu in 0..dim_a {
            let c = m[(mu, nu)];
            if c == 0.0 {
                continue;
            }
            for nq in 0..n_levels - 1 {
                // <n+1| a^dag |n> = sqrt(n+1), and M is symmetric.
                let amp = c * ((nq + 1) as f64).sqrt();
                h[(mu * n_levels + nq + 1, nu * n_levels + nq)] += amp;
            }
            for nq in 1..n_levels {
                let amp = c * (nq as f64).sqrt();
                h[(mu * n_levels + nq - 1, nu * n_levels + nq)] += amp;
            }
        }
    }
    CoupledHamiltonian {
        matrix: h,
        dim_exciton: dim_a,
        n_levels,
        omega0: p.omega0,
    }
}
