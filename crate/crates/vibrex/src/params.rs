//! Model parameters and derived constants.
//!
//! The model is an amide-I exciton chain of `N = L - 1` sites bridging two
//! anchoring groups at `x = 0` and `x = L`, coupled to the lowest-frequency
//! phonon mode of the host lattice. Everything downstream (exciton basis,
//! phonon coupling, propagators) is parameterised by [`ModelParams`] plus the
//! derived quantities collected in [`DerivedParams`].
//!
//! Units: energies and frequencies in cm^-1, masses in kg, forces in N.
//! Temperature in K enters only through the dimensionless ratio
//! `beta_omega = Omega / (k_B T)`.

use thiserror::Error;

/// Boltzmann constant in cm^-1 per K.
pub const KB: f64 = 0.695_034_8;
/// Planck constant in J s.
pub const PLANCK_H: f64 = 6.626_07e-34;
/// Speed of light in cm/s.
pub const LIGHT_C: f64 = 2.997_924_58e10;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("lattice length L must be even and at least 4, got {0}")]
    BadLatticeLength(usize),
    #[error("hopping constant Phi must be positive, got {0}")]
    BadHopping(f64),
    #[error("lattice force constant W must be positive, got {0}")]
    BadForceConstant(f64),
    #[error("site mass must be positive, got {0}")]
    BadMass(f64),
    #[error("temperature must be non-negative, got {0}")]
    BadTemperature(f64),
    #[error("exciton-phonon force chi must be non-negative, got {0}")]
    BadChi(f64),
    #[error("anchoring ratio epsilon must be non-negative, got {0}")]
    BadEpsilon(f64),
}

/// Primary inputs of the transfer model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Internal frequency of each amide-I oscillator, cm^-1.
    pub omega0: f64,
    /// Nearest-neighbour hopping constant Phi, cm^-1.
    pub phi: f64,
    /// Anchoring bond ratio: the bonds linking the chain ends to the
    /// anchoring groups carry hopping `epsilon * phi`.
    pub epsilon: f64,
    /// Lattice length L. The chain has `N = L - 1` sites; L must be even so
    /// that the band-centre wave `k = L/2` exists and sits exactly at omega0.
    pub l_sites: usize,
    /// Lattice force constant W, N/m.
    pub w_force: f64,
    /// Mass per lattice site, kg.
    pub mass: f64,
    /// Exciton-phonon force chi, N. 10 pN = 1.0e-11 N.
    pub chi: f64,
    /// Temperature, K.
    pub temperature: f64,
    /// Phonon cutoff frequency override, cm^-1. When `Some`, this value is
    /// used instead of the one computed from `w_force` and `mass`; the
    /// reference parameter set quotes a rounded cutoff and reproducing its
    /// numbers exactly requires pinning it.
    pub omega_c_override: Option<f64>,
}

impl ModelParams {
    /// Reference parameter set: a ten-bond lattice with amide-I excitons
    /// (omega0 = 1660 cm^-1, Phi = 7.8 cm^-1), W = 15 N/m, M = 1.8e-25 kg,
    /// chi = 10 pN, epsilon = 0.013, T = 300 K, cutoff pinned at 96.86 cm^-1.
    pub fn reference() -> Self {
        ModelParams {
            omega0: 1660.0,
            phi: 7.8,
            epsilon: 0.013,
            l_sites: 10,
            w_force: 15.0,
            mass: 1.8e-25,
            chi: 1.0e-11,
            temperature: 300.0,
            omega_c_override: Some(96.86),
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.l_sites < 4 || self.l_sites % 2 != 0 {
            return Err(ParamError::BadLatticeLength(self.l_sites));
        }
        if !(self.phi > 0.0) {
            return Err(ParamError::BadHopping(self.phi));
        }
        if !(self.w_force > 0.0) {
            return Err(ParamError::BadForceConstant(self.w_force));
        }
        if !(self.mass > 0.0) {
            return Err(ParamError::BadMass(self.mass));
        }
        if !(self.temperature >= 0.0) {
            return Err(ParamError::BadTemperature(self.temperature));
        }
        if !(self.chi >= 0.0) {
            return Err(ParamError::BadChi(self.chi));
        }
        if !(self.epsilon >= 0.0) {
            return Err(ParamError::BadEpsilon(self.epsilon));
        }
        Ok(())
    }

    /// Number of chain sites N = L - 1.
    pub fn n_sites(&self) -> usize {
        self.l_sites - 1
    }

    /// Compute every derived quantity. Fails only on invalid primaries.
    pub fn derive(&self) -> Result<DerivedParams, ParamError> {
        self.validate()?;
        let l = self.l_sites as f64;

        // Cutoff of the acoustic phonon branch, converted to cm^-1.
        let omega_c_raw = (4.0 * self.w_force / self.mass).sqrt()
            / (2.0 * std::f64::consts::PI * LIGHT_C);
        let omega_c = self.omega_c_override.unwrap_or(omega_c_raw);

        // Lowest-frequency mode of the finite lattice.
        let omega = omega_c * (std::f64::consts::PI / (2.0 * l)).sin();

        // Small-polaron binding energy chi^2 / (W h c), cm^-1.
        let binding_energy = self.chi * self.chi / (self.w_force * PLANCK_H * LIGHT_C);

        // Exciton-phonon coupling of the band-centre waves to the lowest mode.
        let eta = (binding_energy * omega / l * (1.0 - (omega / omega_c).powi(2))).sqrt();

        // Effective coupling of the resonant triplet.
        let g = self.epsilon * self.phi * (2.0 / l).sqrt();
        // Parity factor sin(N pi / 2) for odd N: +1 when N % 4 == 1, -1 when
        // N % 4 == 3. Integer arithmetic keeps it exactly +-1.
        let n = self.n_sites();
        let delta_n = if n % 4 == 1 { 1.0 } else { -1.0 };

        // Band-centre hopping scale and gap to the adjacent waves.
        let e_bar = 2.0 * self.phi / l.sqrt();
        let delta_omega = 2.0 * self.phi * (std::f64::consts::PI / l).sin();

        let beta_omega = if self.temperature > 0.0 {
            omega / (KB * self.temperature)
        } else {
            f64::INFINITY
        };
        // Bose occupation of the lowest mode; exp overflow at large beta
        // saturates to +inf and the division gives exactly 0.
        let n_bar = if beta_omega.is_finite() {
            1.0 / (beta_omega.exp() - 1.0)
        } else {
            0.0
        };
        let delta_n_bar_sq = n_bar * (n_bar + 1.0);

        Ok(DerivedParams {
            omega_c,
            omega_c_raw,
            omega,
            binding_energy,
            eta,
            g,
            g_prime: g * delta_n,
            delta_n,
            e_bar,
            delta_omega,
            beta_omega,
            n_bar,
            delta_n_bar_sq,
        })
    }

    /// Regime checks behind the perturbative treatments. Violations do not
    /// stop a computation; they are surfaced through `validate` runs.
    pub fn validity_report(&self) -> Result<ValidityReport, ParamError> {
        let d = self.derive()?;
        let l = self.l_sites as f64;
        let nonadiabatic_margin = d.omega_c - 4.0 * self.phi;
        let epsilon_bound = 0.1 * std::f64::consts::PI * (2.0 / l).sqrt();
        // Thermal bound on the lattice length for second-order accuracy:
        // the cumulative dressing must stay small against the mode spacing.
        let l_star = if d.binding_energy > 0.0 && self.temperature > 0.0 {
            0.2 * d.omega_c * d.omega_c / (d.binding_energy * KB * self.temperature)
        } else {
            f64::INFINITY
        };
        Ok(ValidityReport {
            nonadiabatic: nonadiabatic_margin > 0.0,
            nonadiabatic_margin,
            small_epsilon: self.epsilon < epsilon_bound,
            epsilon_bound,
            length_ok: (l as f64) < l_star,
            l_star,
        })
    }
}

/// Quantities derived from [`ModelParams`]; all frequencies in cm^-1.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    /// Phonon cutoff actually in use (override or computed).
    pub omega_c: f64,
    /// Cutoff computed from W and M, kept for reporting.
    pub omega_c_raw: f64,
    /// Frequency Omega of the lowest lattice mode.
    pub omega: f64,
    /// Small-polaron binding energy E_B.
    pub binding_energy: f64,
    /// Coupling eta of band-centre waves to the lowest mode.
    pub eta: f64,
    /// Triplet coupling g = epsilon Phi sqrt(2/L).
    pub g: f64,
    /// Signed partner coupling g' = g sin(N pi / 2).
    pub g_prime: f64,
    /// Parity factor sin(N pi / 2), exactly +-1.
    pub delta_n: f64,
    /// Band-centre hopping scale 2 Phi / sqrt(L).
    pub e_bar: f64,
    /// Gap between the band-centre wave and its neighbours.
    pub delta_omega: f64,
    /// Omega / (k_B T); +inf at T = 0.
    pub beta_omega: f64,
    /// Bose occupation of the lowest mode.
    pub n_bar: f64,
    /// Thermal variance n_bar (n_bar + 1).
    pub delta_n_bar_sq: f64,
}

/// Outcome of the regime checks in [`ModelParams::validity_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    /// True when 4 Phi < Omega_c (exciton band inside one phonon quantum).
    pub nonadiabatic: bool,
    pub nonadiabatic_margin: f64,
    /// True when epsilon < 0.1 pi sqrt(2/L).
    pub small_epsilon: bool,
    pub epsilon_bound: f64,
    /// True when L < L*, the thermal length bound.
    pub length_ok: bool,
    pub l_star: f64,
}
