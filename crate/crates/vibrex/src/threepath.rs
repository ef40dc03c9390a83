//! Closed-form three-path transfer model.
//!
//! Near the anchoring resonance only three exciton states matter: the split
//! pair and the dark combination. Dressing by the lowest phonon mode shifts
//! the pair by power series `dw_+- = -sum_r (+-eps)^r E_r` whose coefficients
//!
//! ```text
//! E_r = (eta^2 / 2) Ebar^r [ (Omega + dw_gap)^-(r+1) + (Omega - dw_gap)^-(r+1) ]
//! ```
//!
//! follow from the repeated virtual hops `band-centre wave -> neighbour wave
//! -> back` with one phonon exchanged. Re-hybridizing the dressed pair gives
//! two renormalized paths interfering with the temperature-immune dark path;
//! the transfer amplitude becomes a two-frequency beat, a slow envelope at
//! `W_s` under a fast carrier at `W_f`, damped by the thermal decoherence
//! factors `F_+-`.

use crate::exact::{Engine, PropagatorSeries};
use crate::params::{DerivedParams, ModelParams, KB};
use num_complex::Complex64;
use thiserror::Error;

/// Default order of the dressing power series; terms beyond `eps^12` are far
/// below double precision for any anchoring in the perturbative window.
pub const R_MAX: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum ThreePathError {
    #[error("optimal-coupling radicand is not positive ({0:.3e}); the matching condition has no solution here")]
    NoOptimum(f64),
    #[error("occupation offset n0 - n_bar = {0:.3e} is not positive; the ceiling formula does not apply")]
    BadOccupationOffset(f64),
}

/// Dressing series coefficients `E_0..=E_rmax`, all positive in the
/// nonadiabatic regime.
pub fn taylor_coefficients(d: &DerivedParams, r_max: usize) -> Vec<f64> {
    let half_eta_sq = 0.5 * d.eta * d.eta;
    let plus = d.omega + d.delta_omega;
    let minus = d.omega - d.delta_omega;
    (0..=r_max)
        .map(|r| {
            let pow = d.e_bar.powi(r as i32);
            half_eta_sq * (pow / plus.powi(r as i32 + 1) + pow / minus.powi(r as i32 + 1))
        })
        .collect()
}

/// Dressed and re-hybridized two-path system at one `(epsilon, T)` point.
#[derive(Debug, Clone)]
pub struct ThreePathModel {
    pub coeffs: Vec<f64>,
    /// Series shifts of the split pair before re-hybridization.
    pub shift_plus: f64,
    pub shift_minus: f64,
    /// Phonon-mediated coupling between the dressed partners.
    pub v_mix: f64,
    pub cos_2theta: f64,
    pub sin_2theta: f64,
    /// Re-hybridized energies relative to `omega0`.
    pub omega_hat_plus_rel: f64,
    pub omega_hat_minus_rel: f64,
    /// Per-path phonon frequency shifts.
    pub phonon_shift_plus: f64,
    pub phonon_shift_minus: f64,
    /// Thermal path frequencies and the beat decomposition.
    pub w_plus: f64,
    pub w_minus: f64,
    pub w_slow: f64,
    pub w_fast: f64,
    /// Beat ratio `w_slow / w_fast`, the knob behind the interference
    /// resonances.
    pub alpha: f64,
}

/// Evaluate the dressed pair at the anchoring of `p`.
pub fn hybridize(p: &ModelParams, d: &DerivedParams) -> ThreePathModel {
    let coeffs = taylor_coefficients(d, R_MAX);
    let eps = p.epsilon;
    let mut shift_plus = 0.0;
    let mut shift_minus = 0.0;
    let mut v_mix = 0.0;
    let mut odd = 0.0;
    let mut pow = 1.0;
    for (r, &e) in coeffs.iter().enumerate() {
        let term = e * pow;
        shift_plus -= term;
        if r % 2 == 0 {
            shift_minus -= term;
            v_mix += term;
        } else {
            shift_minus += term;
            odd += term;
        }
        pow *= eps;
    }
    let diag_gap = 2.0 * d.e_bar * eps + (shift_plus - shift_minus);
    let split_sq = diag_gap * diag_gap + 4.0 * v_mix * v_mix;
    let split = split_sq.sqrt();
    let cos_2theta = diag_gap / split;
    let sin_2theta = 2.0 * v_mix / split;
    let mean = 0.5 * (shift_plus + shift_minus);
    let omega_hat_plus_rel = mean + 0.5 * split;
    let omega_hat_minus_rel = mean - 0.5 * split;
    let phonon_shift_plus = -2.0 * cos_2theta * odd;
    let phonon_shift_minus = 2.0 * cos_2theta * odd;
    let w_plus = omega_hat_plus_rel + d.n_bar * phonon_shift_plus;
    let w_minus = -(omega_hat_minus_rel + d.n_bar * phonon_shift_minus);
    let w_slow = 0.5 * (w_minus - w_plus);
    let w_fast = 0.5 * (w_minus + w_plus);
    ThreePathModel {
        coeffs,
        shift_plus,
        shift_minus,
        v_mix,
        cos_2theta,
        sin_2theta,
        omega_hat_plus_rel,
        omega_hat_minus_rel,
        phonon_shift_plus,
        phonon_shift_minus,
        w_plus,
        w_minus,
        w_slow,
        w_fast,
        alpha: w_slow / w_fast,
    }
}

/// Which decoherence factor shapes the two bright paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoherenceForm {
    /// Full thermal average `(1 - e^-b) / (1 - e^{-b - i dW t})`; modulus and
    /// phase exact at second order.
    Exact,
    /// Large-`n_bar` closed form
    /// `e^{-i n_bar dW t} / sqrt(1 + 4 n_bar (n_bar+1) sin^2(dW t / 2))`.
    Simplified,
}

/// Transfer amplitude of the three interfering paths. The dark path carries
/// a constant weight `-delta_N / 2` with no decoherence factor at all; the
/// bright paths oscillate at the re-hybridized frequencies under `F_+-`.
pub fn three_path_propagator(
    model: &ThreePathModel,
    p: &ModelParams,
    d: &DerivedParams,
    times_phi: &[f64],
    form: DecoherenceForm,
) -> PropagatorSeries {
    let cold = !d.beta_omega.is_finite() || d.beta_omega > 700.0;
    let q = if cold { 0.0 } else { (-d.beta_omega).exp() };
    let var = d.delta_n_bar_sq;
    let f_factor = |dw: f64, t: f64| -> Complex64 {
        if cold {
            return Complex64::new(1.0, 0.0);
        }
        match form {
            DecoherenceForm::Exact => {
                (1.0 - q) / (1.0 - q * Complex64::from_polar(1.0, -dw * t))
            }
            DecoherenceForm::Simplified => {
                let modulus = 1.0 / (1.0 + 4.0 * var * (0.5 * dw * t).sin().powi(2)).sqrt();
                Complex64::from_polar(modulus, -d.n_bar * dw * t)
            }
        }
    };
    let weight_plus = 0.25 * (1.0 + model.sin_2theta);
    let weight_minus = 0.25 * (1.0 - model.sin_2theta);
    let values = times_phi
        .iter()
        .map(|&tau| {
            let t = tau / p.phi;
            let bright_plus = f_factor(model.phonon_shift_plus, t)
                * Complex64::from_polar(1.0, -model.omega_hat_plus_rel * t);
            let bright_minus = f_factor(model.phonon_shift_minus, t)
                * Complex64::from_polar(1.0, -model.omega_hat_minus_rel * t);
            -d.delta_n * (0.5 - weight_plus * bright_plus - weight_minus * bright_minus)
        })
        .collect();
    PropagatorSeries {
        engine: Engine::ThreePath,
        times_phi: times_phi.to_vec(),
        values,
        n_max: None,
        tail_mass: None,
        dropped_weight: 0.0,
        warnings: Vec::new(),
    }
}

/// Anchoring that tunes the fast carrier onto the slow envelope's first
/// maximum: the root of `w_fast(eps) = 2 w_slow(eps)` at second order in
/// the series.
pub fn epsilon_star(d: &DerivedParams) -> Result<f64, ThreePathError> {
    let coeffs = taylor_coefficients(d, R_MAX);
    let (e0, e1, e2) = (coeffs[0], coeffs[1], coeffs[2]);
    let base = d.e_bar - e1;
    let radicand = base * base - 4.0 * d.n_bar * e1 * base - 2.0 * e0 * e2;
    if radicand <= 0.0 {
        return Err(ThreePathError::NoOptimum(radicand));
    }
    Ok(std::f64::consts::SQRT_2 * e0 / radicand.sqrt())
}

/// Ceiling on the transfer fidelity at the optimal anchoring.
#[derive(Debug, Clone, Copy)]
pub struct TransferCeiling {
    pub epsilon_star: f64,
    /// Occupation scale `|omega_hat_+ - omega0| / |dW_+|` at the optimum;
    /// decoherence stays harmless while `n_bar` is far below it.
    pub n_match: f64,
    /// Predicted maximum of `|G|` at the optimum.
    pub g_m_star: f64,
    /// Temperature at which `n_bar` reaches `n_match`, in K.
    pub t_zero_kelvin: f64,
}

pub fn transfer_ceiling(p: &ModelParams, d: &DerivedParams) -> Result<TransferCeiling, ThreePathError> {
    let eps = epsilon_star(d)?;
    let tuned = ModelParams {
        epsilon: eps,
        ..p.clone()
    };
    let model = hybridize(&tuned, d);
    let n_match = model.omega_hat_plus_rel.abs() / model.phonon_shift_plus.abs();
    let offset = n_match - d.n_bar;
    if offset <= 0.0 {
        return Err(ThreePathError::BadOccupationOffset(offset));
    }
    let g_m_star = 1.0 - (std::f64::consts::PI.powi(2) / 4.0) * d.delta_n_bar_sq / (offset * offset);
    let t_zero_kelvin = 2.0 * n_match * d.omega / (std::f64::consts::PI * KB);
    Ok(TransferCeiling {
        epsilon_star: eps,
        n_match,
        g_m_star,
        t_zero_kelvin,
    })
}

/// Interference class of a beat ratio `alpha = w_slow / w_fast`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceClass {
    /// `alpha = (2q - 1) / (2q + 1)`: the fast carrier vanishes with the
    /// envelope and the transfer maximum collapses.
    Destructive { q: usize },
    /// `alpha = (q - p) / (q + p + 1)`: a carrier extremum rides the
    /// envelope maximum and the transfer is locally enhanced.
    Constructive { q: usize, p: usize },
    None,
}

/// Classify `alpha` against the low-order resonance families; orders are
/// capped at 6 because higher fractions crowd together faster than any
/// physical window can resolve.
pub fn resonance_condition(alpha: f64, window: f64) -> ResonanceClass {
    const MAX_ORDER: usize = 6;
    let mut best = ResonanceClass::None;
    let mut best_dist = window;
    for q in 1..=MAX_ORDER {
        let target = (2.0 * q as f64 - 1.0) / (2.0 * q as f64 + 1.0);
        let dist = (alpha - target).abs();
        if dist <= best_dist {
            best_dist = dist;
            best = ResonanceClass::Destructive { q };
        }
    }
    for q in 1..=MAX_ORDER {
        for p in 0..q {
            let target = (q as f64 - p as f64) / (q as f64 + p as f64 + 1.0);
            let dist = (alpha - target).abs();
            if dist < best_dist {
                best_dist = dist;
                best = ResonanceClass::Constructive { q, p };
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn reference() -> (ModelParams, DerivedParams) {
        let p = ModelParams::reference();
        let d = p.derive().unwrap();
        (p, d)
    }

    #[test]
    fn series_coefficients_frozen_values() {
        let (_, d) = reference();
        let e = taylor_coefficients(&d, R_MAX);
        assert_relative_eq!(e[0], 0.036_426_527_488, max_relative = 1e-8);
        assert_relative_eq!(e[1], 0.014_530_644_674, max_relative = 1e-8);
        assert_relative_eq!(e[2], 0.006_231_144_860, max_relative = 1e-8);
        assert_relative_eq!(e[3], 0.002_800_644_638, max_relative = 1e-7);
        assert!(e.iter().all(|&x| x > 0.0));
        assert!(e.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn hybridized_model_frozen_values() {
        let (p, d) = reference();
        let m = hybridize(&p, &d);
        assert_relative_eq!(m.shift_plus, -0.036_616_485_123, max_relative = 1e-9);
        assert_relative_eq!(m.shift_minus, -0.036_238_676_055, max_relative = 1e-9);
        assert_relative_eq!(m.v_mix, 0.036_427_580_589, max_relative = 1e-9);
        assert_relative_eq!(m.cos_2theta, 0.868_890_713_409, max_relative = 1e-9);
        assert_relative_eq!(m.sin_2theta, 0.495_003_967_814, max_relative = 1e-9);
        assert_relative_eq!(m.phonon_shift_plus, -0.000_328_274_791, max_relative = 1e-6);
        assert_relative_eq!(m.omega_hat_plus_rel, 0.037_162_901_422, max_relative = 1e-9);
        assert_relative_eq!(m.omega_hat_minus_rel, -0.110_018_062_599, max_relative = 1e-9);
        assert_relative_eq!(m.w_plus, 0.032_807_652_248, max_relative = 1e-8);
        assert_relative_eq!(m.w_minus, 0.105_662_813_425, max_relative = 1e-8);
        assert_relative_eq!(m.w_fast, 0.069_235_232_836, max_relative = 1e-8);
        assert_relative_eq!(m.alpha, 0.526_142_241_405, max_relative = 1e-8);
    }

    #[test]
    fn slow_beat_equals_phonon_coupling() {
        // w_slow = v_mix is an identity of the hybridization, not an
        // approximation; it pins the slow envelope to the path coupling.
        for eps in [0.005, 0.013, 0.03] {
            let p = ModelParams {
                epsilon: eps,
                ..ModelParams::reference()
            };
            let d = p.derive().unwrap();
            let m = hybridize(&p, &d);
            assert_abs_diff_eq!(m.w_slow, m.v_mix, epsilon = 1e-12);
            assert!(m.w_slow < m.w_fast);
            assert!(m.alpha > 0.0 && m.alpha < 1.0);
        }
    }

    #[test]
    fn phonon_shifts_are_antisymmetric_and_ordered() {
        let (p, d) = reference();
        let m = hybridize(&p, &d);
        assert_abs_diff_eq!(m.phonon_shift_plus, -m.phonon_shift_minus, epsilon = 1e-15);
        // The upper path softens the mode, the lower path stiffens it.
        assert!(m.phonon_shift_plus < 0.0);
        assert!(m.phonon_shift_minus > 0.0);
    }

    #[test]
    fn decoherence_moduli_respect_floor() {
        let (p, d) = reference();
        let m = hybridize(&p, &d);
        let floor = 1.0 / (1.0 + 4.0 * d.delta_n_bar_sq).sqrt();
        let times: Vec<f64> = (0..5000).map(|i| i as f64 * 0.5).collect();
        for form in [DecoherenceForm::Exact, DecoherenceForm::Simplified] {
            let s = three_path_propagator(&m, &p, &d, &times, form);
            // Reconstruct |F_+| directly to test the bound on the factor
            // itself rather than on |G|.
            let q = (-d.beta_omega).exp();
            for &tau in times.iter().step_by(37) {
                let t = tau / p.phi;
                let f = match form {
                    DecoherenceForm::Exact => {
                        ((1.0 - q)
                            / (1.0
                                - q * Complex64::from_polar(1.0, -m.phonon_shift_plus * t)))
                        .norm()
                    }
                    DecoherenceForm::Simplified => {
                        1.0 / (1.0
                            + 4.0
                                * d.delta_n_bar_sq
                                * (0.5 * m.phonon_shift_plus * t).sin().powi(2))
                        .sqrt()
                    }
                };
                assert!(f >= floor - 1e-12);
                assert!(f <= 1.0 + 1e-12);
            }
            assert!(s.values.iter().all(|v| v.norm() <= 1.0 + 1e-9));
        }
    }

    #[test]
    fn transfer_peak_frozen_landmark() {
        let (p, d) = reference();
        let m = hybridize(&p, &d);
        let times: Vec<f64> = (0..20001).map(|i| i as f64 * 0.1).collect();
        let s = three_path_propagator(&m, &p, &d, &times, DecoherenceForm::Exact);
        let (idx, peak) = s
            .abs()
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &g)| if g > acc.1 { (i, g) } else { acc });
        assert_relative_eq!(peak, 0.960, max_relative = 2e-3);
        assert_abs_diff_eq!(times[idx], 701.9, epsilon = 1.0);
        assert!(s.values[0].norm() < 1e-12);
    }

    #[test]
    fn optimal_anchoring_frozen_values() {
        let (p, d) = reference();
        assert_relative_eq!(epsilon_star(&d).unwrap(), 0.011_405_711, max_relative = 1e-6);
        let ceil = transfer_ceiling(&p, &d).unwrap();
        assert_relative_eq!(ceil.n_match, 109.573_243, max_relative = 1e-6);
        assert_relative_eq!(ceil.g_m_star, 0.949_645_0, max_relative = 1e-5);
        assert_relative_eq!(ceil.t_zero_kelvin, 1520.740, max_relative = 1e-5);
        let cold = ModelParams {
            temperature: 100.0,
            ..p
        };
        let dc = cold.derive().unwrap();
        assert_relative_eq!(epsilon_star(&dc).unwrap(), 0.010_737_210, max_relative = 1e-6);
        let ceil_c = transfer_ceiling(&cold, &dc).unwrap();
        assert_relative_eq!(ceil_c.g_m_star, 0.995_205_0, max_relative = 1e-5);
    }

    #[test]
    fn zero_temperature_paths_never_decohere() {
        let p = ModelParams {
            temperature: 0.0,
            ..ModelParams::reference()
        };
        let d = p.derive().unwrap();
        let m = hybridize(&p, &d);
        let times: Vec<f64> = (0..2000).map(|i| i as f64).collect();
        let exact = three_path_propagator(&m, &p, &d, &times, DecoherenceForm::Exact);
        let simpl = three_path_propagator(&m, &p, &d, &times, DecoherenceForm::Simplified);
        for (a, b) in exact.values.iter().zip(&simpl.values) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn resonance_families_classify_known_ratios() {
        assert_eq!(
            resonance_condition(1.0 / 3.0, 0.01),
            ResonanceClass::Destructive { q: 1 }
        );
        assert_eq!(
            resonance_condition(0.6, 0.01),
            ResonanceClass::Destructive { q: 2 }
        );
        assert_eq!(
            resonance_condition(0.5, 0.01),
            ResonanceClass::Constructive { q: 1, p: 0 }
        );
        assert_eq!(resonance_condition(0.9, 0.01), ResonanceClass::None);
        assert_eq!(resonance_condition(0.47, 0.01), ResonanceClass::None);
    }
}
