//! Second-order dressed propagator.
//!
//! A unitary transformation `exp(S1 + S2)` removes the exciton-phonon
//! coupling to second order in `eta`. The generator `S1 = Z a^dag - Z^T a`
//! solves `[H0, S1] = -V`, leaving an effective Hamiltonian
//!
//! ```text
//! H_eff = H_ex + dH_A + (Omega + dOmega) a^dag a + const
//! ```
//!
//! where `dH_A = -(Z^T M + M Z)/2` dresses the exciton energies and
//! `dOmega = B + B^T`, `B = (Z M - M Z)/2`, makes the phonon frequency
//! depend on the exciton state. Diagonalizing `dH_A` within the exciton
//! space yields dressed states `chi_nu` whose phonon ladders
//! `E_{nu,n} = omega_hat_nu + n (Omega + dOmega_nu)` reproduce the exact
//! spectrum at second order, and whose propagator picks up both a
//! temperature-dependent decoherence factor and one-phonon exchange
//! sidebands.

use crate::exact::{Engine, PropagatorSeries};
use crate::exciton::{ExcitonSystem, MuLabel};
use crate::linalg::{self, EighError, Mat};
use crate::params::{DerivedParams, ModelParams, ParamError};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PtError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Eigh(#[from] EighError),
    #[error("near-resonant denominator omega[{mu}] - omega[{nu}] + {harmonics} Omega = {den:.3e}; the dressing transformation is singular here")]
    SmallDenominator {
        mu: usize,
        nu: usize,
        harmonics: u8,
        den: f64,
    },
    #[error("dressed state {index} has no dominant parent (best weight {best:.3e})")]
    AmbiguousDressedLabel { index: usize, best: f64 },
}

/// Generators and effective operators of the dressing transformation, all in
/// the exciton eigenbasis.
#[derive(Debug, Clone)]
pub struct PtOperators {
    pub m: Mat<f64>,
    /// `Z[mu,nu] = M[mu,nu] / (omega_mu - omega_nu + Omega)`.
    pub z: Mat<f64>,
    /// Exciton dressing `-(Z^T M + M Z)/2`, symmetric.
    pub a: Mat<f64>,
    /// Antisymmetric part `(Z M - M Z)/2`.
    pub b: Mat<f64>,
    /// State-dependent phonon shift operator `B + B^T`.
    pub delta_omega: Mat<f64>,
    /// Second-harmonic generator `B[mu,nu] / (omega_mu - omega_nu + 2 Omega)`.
    pub s2: Mat<f64>,
}

fn mm(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = Mat::zeros(m, n);
    for i in 0..m {
        for l in 0..k {
            let ail = a[(i, l)];
            if ail != 0.0 {
                for j in 0..n {
                    c[(i, j)] += ail * b[(l, j)];
                }
            }
        }
    }
    c
}

fn transpose(a: &Mat<f64>) -> Mat<f64> {
    let mut t = Mat::zeros(a.ncols(), a.nrows());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            t[(j, i)] = a[(i, j)];
        }
    }
    t
}

/// Build the dressing generators from the coupling matrix `m` in the basis
/// of `exc`. Fails when any coupled pair sits within 1e-6 of a one- or
/// two-phonon resonance, where the transformation is singular.
pub fn build_pt_operators(
    exc: &ExcitonSystem,
    m: &Mat<f64>,
    d: &DerivedParams,
) -> Result<PtOperators, PtError> {
    let dim = exc.dim();
    let w = &exc.energies;
    let mut z = Mat::<f64>::zeros(dim, dim);
    for mu in 0..dim {
        for nu in 0..dim {
            let c = m[(mu, nu)];
            if c == 0.0 {
                continue;
            }
            let den = w[mu] - w[nu] + d.omega;
            if den.abs() < 1e-6 {
                return Err(PtError::SmallDenominator {
                    mu,
                    nu,
                    harmonics: 1,
                    den,
                });
            }
            z[(mu, nu)] = c / den;
        }
    }
    let zt = transpose(&z);
    let zm = mm(&z, m);
    let mz = mm(m, &z);
    let ztm = mm(&zt, m);
    let mut a = Mat::<f64>::zeros(dim, dim);
    let mut b = Mat::<f64>::zeros(dim, dim);
    let mut delta_omega = Mat::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            a[(i, j)] = -0.5 * (ztm[(i, j)] + mz[(i, j)]);
            b[(i, j)] = 0.5 * (zm[(i, j)] - mz[(i, j)]);
        }
    }
    for i in 0..dim {
        for j in 0..dim {
            delta_omega[(i, j)] = b[(i, j)] + b[(j, i)];
        }
    }
    let mut s2 = Mat::<f64>::zeros(dim, dim);
    for mu in 0..dim {
        for nu in 0..dim {
            let c = b[(mu, nu)];
            if c == 0.0 {
                continue;
            }
            let den = w[mu] - w[nu] + 2.0 * d.omega;
            if den.abs() < 1e-6 {
                return Err(PtError::SmallDenominator {
                    mu,
                    nu,
                    harmonics: 2,
                    den,
                });
            }
            s2[(mu, nu)] = c / den;
        }
    }
    Ok(PtOperators {
        m: m.clone(),
        z,
        a,
        b,
        delta_omega,
        s2,
    })
}

/// Independent reconstruction of the dressing matrices from the explicit
/// second-order sums, bypassing the generator algebra. Used to cross-check
/// [`build_pt_operators`].
pub fn delta_matrices(exc: &ExcitonSystem, m: &Mat<f64>, d: &DerivedParams) -> (Mat<f64>, Mat<f64>) {
    let dim = exc.dim();
    let w = &exc.energies;
    let mut dh = Mat::<f64>::zeros(dim, dim);
    let mut dw = Mat::<f64>::zeros(dim, dim);
    for mu in 0..dim {
        for nu in 0..dim {
            let mut h_acc = 0.0;
            let mut w_acc = 0.0;
            for s in 0..dim {
                let prod = m[(mu, s)] * m[(s, nu)];
                if prod == 0.0 {
                    continue;
                }
                h_acc -= 0.5
                    * prod
                    * (1.0 / (w[s] - w[mu] + d.omega) + 1.0 / (w[s] - w[nu] + d.omega));
                w_acc += 0.5
                    * prod
                    * (1.0 / (w[mu] - w[s] + d.omega) + 1.0 / (w[nu] - w[s] + d.omega)
                        - 1.0 / (w[s] - w[mu] + d.omega)
                        - 1.0 / (w[s] - w[nu] + d.omega));
            }
            dh[(mu, nu)] = h_acc;
            dw[(mu, nu)] = w_acc;
        }
    }
    (dh, dw)
}

/// Dressed exciton states and their state-dependent phonon frequencies.
#[derive(Debug, Clone)]
pub struct DressedSystem {
    /// Dressed energies `omega_hat_nu - omega0`, in the column order of `chi`.
    pub omega_hat_rel: Vec<f64>,
    /// Dressed eigenvectors as coordinates over the parent exciton basis.
    pub chi: Mat<f64>,
    /// Phonon frequency shift seen from each dressed state.
    pub delta_omega_nu: Vec<f64>,
    pub labels: Vec<MuLabel>,
    /// Diagonal exciton shifts `dH_A[mu,mu]` of the parent basis, kept for
    /// reporting alongside the dressed output.
    pub diag_shifts: Vec<f64>,
}

/// Diagonalize the dressed exciton block and attach per-state phonon shifts.
pub fn dress(
    exc: &ExcitonSystem,
    ops: &PtOperators,
    p: &ModelParams,
    _d: &DerivedParams,
) -> Result<DressedSystem, PtError> {
    let dim = exc.dim();
    let mut h = Mat::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            h[(i, j)] = ops.a[(i, j)];
        }
        h[(i, i)] += exc.energies[i] - p.omega0;
    }
    let eig = linalg::eigh(&h, 1e-12)?;
    let mut chi = eig.vectors;
    let mut omega_hat_rel = eig.values;

    // A parent whose dressing row and column vanish identically is an exact
    // eigenvector; replace the solver's nearest column with it so the
    // decoupling survives with no numerical dust.
    for mu in 0..dim {
        let decoupled = (0..dim).all(|j| {
            ops.a[(mu, j)] == 0.0
                && ops.a[(j, mu)] == 0.0
                && ops.delta_omega[(mu, j)] == 0.0
                && ops.delta_omega[(j, mu)] == 0.0
        });
        if !decoupled {
            continue;
        }
        let nu = (0..dim)
            .max_by(|&a, &b| chi[(mu, a)].abs().total_cmp(&chi[(mu, b)].abs()))
            .unwrap();
        for x in 0..dim {
            chi[(x, nu)] = if x == mu { 1.0 } else { 0.0 };
        }
        omega_hat_rel[nu] = exc.energies[mu] - p.omega0;
    }

    // Label dressed states by their parent. The two split partners can mix
    // strongly near degeneracy, so the pair is identified by combined weight
    // and ordered by energy; everything else must have a dominant parent.
    let ip = exc.index_of(MuLabel::Plus);
    let im = exc.index_of(MuLabel::Minus);
    let mut labels: Vec<Option<MuLabel>> = vec![None; dim];
    if let (Some(ip), Some(im)) = (ip, im) {
        let mut pair_weight: Vec<(usize, f64)> = (0..dim)
            .map(|nu| {
                (
                    nu,
                    chi[(ip, nu)] * chi[(ip, nu)] + chi[(im, nu)] * chi[(im, nu)],
                )
            })
            .collect();
        pair_weight.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let (first, second) = (pair_weight[0].0, pair_weight[1].0);
        let (hi, lo) = if omega_hat_rel[first] >= omega_hat_rel[second] {
            (first, second)
        } else {
            (second, first)
        };
        labels[hi] = Some(MuLabel::Plus);
        labels[lo] = Some(MuLabel::Minus);
    }
    for nu in 0..dim {
        if labels[nu].is_some() {
            continue;
        }
        let mut best = 0.0;
        let mut best_mu = 0;
        for mu in 0..dim {
            let wgt = chi[(mu, nu)] * chi[(mu, nu)];
            if wgt > best {
                best = wgt;
                best_mu = mu;
            }
        }
        let label = exc.labels[best_mu];
        if best < 0.5 || labels.iter().flatten().any(|l| *l == label) {
            return Err(PtError::AmbiguousDressedLabel { index: nu, best });
        }
        labels[nu] = Some(label);
    }
    let labels: Vec<MuLabel> = labels.into_iter().map(Option::unwrap).collect();

    let mut delta_omega_nu = vec![0.0; dim];
    for nu in 0..dim {
        let mut acc = 0.0;
        for mu in 0..dim {
            let c = chi[(mu, nu)];
            if c == 0.0 {
                continue;
            }
            for mp in 0..dim {
                acc += c * ops.delta_omega[(mu, mp)] * chi[(mp, nu)];
            }
        }
        delta_omega_nu[nu] = acc;
    }

    Ok(DressedSystem {
        omega_hat_rel,
        chi,
        delta_omega_nu,
        labels,
        diag_shifts: (0..dim).map(|i| ops.a[(i, i)]).collect(),
    })
}

/// One level of the dressed spectrum.
#[derive(Debug, Clone, Copy)]
pub struct PtLevel {
    /// Energy relative to `omega0`.
    pub energy_rel: f64,
    pub label: MuLabel,
    pub n: usize,
}

/// Dressed ladder `E_{nu,n} = omega_hat_nu + n (Omega + dOmega_nu)`,
/// ascending in energy.
pub fn pt_spectrum(dr: &DressedSystem, d: &DerivedParams, n_max: usize) -> Vec<PtLevel> {
    let mut levels = Vec::with_capacity(dr.omega_hat_rel.len() * (n_max + 1));
    for nu in 0..dr.omega_hat_rel.len() {
        for n in 0..=n_max {
            levels.push(PtLevel {
                energy_rel: dr.omega_hat_rel[nu] + n as f64 * (d.omega + dr.delta_omega_nu[nu]),
                label: dr.labels[nu],
                n,
            });
        }
    }
    levels.sort_by(|a, b| a.energy_rel.total_cmp(&b.energy_rel).then(a.n.cmp(&b.n)));
    levels
}

/// Thermally averaged transfer amplitude of the dressed theory.
///
/// Each dressed state contributes its oscillation at `omega_hat_nu`, shaped
/// by the decoherence factor
/// `F_nu(t) = (1 - e^{-b}) / (1 - e^{-b - i dOmega_nu t})`, `b = beta Omega`,
/// which is the exact thermal average of `e^{-i n dOmega_nu t}`. Keeping only
/// this dephasing term gives the diagonal propagator; the full version adds
/// the one-phonon exchange sidebands at `+-(Omega + dOmega_nu)` and the
/// second-order weight renormalization, all with thermal occupations evolved
/// under the shifted frequency.
pub fn pt_propagator(
    dr: &DressedSystem,
    ops: &PtOperators,
    exc: &ExcitonSystem,
    p: &ModelParams,
    d: &DerivedParams,
    times_phi: &[f64],
    diagonal: bool,
) -> PropagatorSeries {
    let dim = exc.dim();
    let u = exc.donor_amplitudes();
    let v = exc.acceptor_amplitudes();

    // Vectors transformed once: chi^T u, chi^T v, and the Z-screened pairs.
    let apply = |mat: &Mat<f64>, vec: &[f64]| -> Vec<f64> {
        (0..dim)
            .map(|i| (0..dim).map(|j| mat[(i, j)] * vec[j]).sum())
            .collect()
    };
    let apply_t = |mat: &Mat<f64>, vec: &[f64]| -> Vec<f64> {
        (0..dim)
            .map(|i| (0..dim).map(|j| mat[(j, i)] * vec[j]).sum())
            .collect()
    };

    let cu = apply_t(&dr.chi, &u); // chi^T u
    let cv = apply_t(&dr.chi, &v);
    let zu = apply(&ops.z, &u); // Z u
    let zv_t = apply_t(&ops.z, &v); // Z^T v
    let c_zu = apply_t(&dr.chi, &zu); // chi^T Z u
    let c_ztu = apply_t(&dr.chi, &apply_t(&ops.z, &u)); // chi^T Z^T u
    let c_zv = apply_t(&dr.chi, &apply(&ops.z, &v)); // chi^T Z v  (= (v^T Z^T chi)^T entries)
    let c_ztv = apply_t(&dr.chi, &zv_t); // chi^T Z^T v (= (v^T Z chi) entries)
    let zzt_u = apply(&ops.z, &apply_t(&ops.z, &u)); // Z Z^T u
    let ztz_u = apply_t(&ops.z, &zu); // Z^T Z u
    let zzt_v = apply(&ops.z, &zv_t); // Z Z^T v
    let ztz_v = apply_t(&ops.z, &apply(&ops.z, &v));
    let c_zzt_u = apply_t(&dr.chi, &zzt_u);
    let c_ztz_u = apply_t(&dr.chi, &ztz_u);
    let c_zzt_v = apply_t(&dr.chi, &zzt_v);
    let c_ztz_v = apply_t(&dr.chi, &ztz_v);

    let w1: Vec<f64> = (0..dim).map(|nu| cv[nu] * cu[nu]).collect();
    // (v^T Z chi)(chi^T Z^T u): phonon absorbed then re-emitted.
    let t_abs: Vec<f64> = (0..dim).map(|nu| c_ztv[nu] * c_ztu[nu]).collect();
    // (v^T Z^T chi)(chi^T Z u): phonon emitted then re-absorbed.
    let t_emi: Vec<f64> = (0..dim).map(|nu| c_zv[nu] * c_zu[nu]).collect();
    let w_nn: Vec<f64> = (0..dim)
        .map(|nu| c_zzt_v[nu] * cu[nu] + cv[nu] * c_zzt_u[nu])
        .collect();
    let w_np1: Vec<f64> = (0..dim)
        .map(|nu| c_ztz_v[nu] * cu[nu] + cv[nu] * c_ztz_u[nu])
        .collect();

    let cold = !d.beta_omega.is_finite() || d.beta_omega > 700.0;
    let q = if cold { 0.0 } else { (-d.beta_omega).exp() };

    let values: Vec<Complex64> = times_phi
        .iter()
        .map(|&tau| {
            let t = tau / p.phi;
            let mut g = Complex64::new(0.0, 0.0);
            for nu in 0..dim {
                let dw = dr.delta_omega_nu[nu];
                let (f_nu, n_nu) = if cold {
                    (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
                } else {
                    let rot = Complex64::from_polar(1.0, -dw * t);
                    let f = (1.0 - q) / (1.0 - q * rot);
                    // Thermal occupation evolved under the shifted frequency:
                    // 1 / (e^{b + i dOmega t} - 1).
                    let n = 1.0 / (Complex64::from_polar(1.0, dw * t) / q - 1.0);
                    (f, n)
                };
                let carrier = Complex64::from_polar(1.0, -dr.omega_hat_rel[nu] * t);
                let mut amp = Complex64::from(w1[nu]);
                if !diagonal {
                    let side = Complex64::from_polar(1.0, (d.omega + dw) * t);
                    amp += t_abs[nu] * n_nu * side;
                    amp += t_emi[nu] * (n_nu + 1.0) / side;
                    amp -= 0.5 * (w_nn[nu] * n_nu + w_np1[nu] * (n_nu + 1.0));
                }
                g += f_nu * carrier * amp;
            }
            g
        })
        .collect();

    PropagatorSeries {
        engine: if diagonal {
            Engine::PtDiagonal
        } else {
            Engine::PtFull
        },
        times_phi: times_phi.to_vec(),
        values,
        n_max: None,
        tail_mass: None,
        dropped_weight: 0.0,
        warnings: Vec::new(),
    }
}
