//! Physical parameters, analytic infidelity estimates and the error budget
//! of the gate for a concrete strontium-88 setup.
//!
//! Everything in SI at the boundary; [`SystemConfig::couplings`] converts
//! once into the dimensionless units of the simulation (`hbar = Omega0 = 1`).

pub mod simulation;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::hamiltonian::Couplings;
use crate::quantum::operators::DEFAULT_FOCK_PADDING;

pub use simulation::{
    decay_sweep, full_budget, full_simulation, mechanism_simulation, recoil_sweep, vdw_sweep,
    write_budget_csv, write_sweep_csv, BudgetOptions, BudgetRow, ErrorBudget, Mechanism,
    MechanismResult, SweepRow,
};

/// CODATA 2018 exact and recommended values.
pub mod constants {
    /// Planck constant, J s.
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
    /// Boltzmann constant, J/K.
    pub const BOLTZMANN: f64 = 1.380_649e-23;
    /// Atomic mass constant, kg.
    pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;
    /// Mass of strontium-88 in atomic mass units.
    pub const SR88_MASS_U: f64 = 87.905_612_5;
    /// Mass of strontium-88, kg.
    pub const SR88_MASS: f64 = SR88_MASS_U * ATOMIC_MASS;
}

use constants::{BOLTZMANN, HBAR, SR88_MASS};

/// Axis slots `[x, y, z]`; the laser points along `z`, the atoms are
/// separated along `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// `Omega0 / 2 pi`, Hz.
    pub rabi_frequency_hz: f64,
    /// `omega / 2 pi` per axis, Hz.
    pub trap_frequency_hz: [f64; 3],
    /// Rydberg lifetime `1/gamma`, s.
    pub lifetime_s: f64,
    /// Wavelength of the `|1> -> |r>` transition, m.
    pub wavelength_m: f64,
    /// `C6 / h` with sign, Hz m^6.
    pub c6_hz_m6: f64,
    /// Interatomic distance, m.
    pub separation_m: f64,
    pub mass_kg: f64,
    pub temperature_k: f64,
}

impl SystemConfig {
    /// The strontium-88 setup at 10 MHz Rabi frequency.
    pub fn table_one() -> Self {
        Self {
            rabi_frequency_hz: 10e6,
            trap_frequency_hz: [100e3, 100e3, 50e3],
            lifetime_s: 50e-6,
            wavelength_m: 323e-9,
            c6_hz_m6: -154e9 * 1e-36,
            separation_m: 3e-6,
            mass_kg: SR88_MASS,
            temperature_k: 0.0,
        }
    }

    /// Faster drive: 40 MHz with the atoms moved to 2.38 um.
    pub fn forty_megahertz() -> Self {
        Self {
            rabi_frequency_hz: 40e6,
            separation_m: 2.38e-6,
            ..Self::table_one()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rabi_frequency_hz", self.rabi_frequency_hz),
            ("trap_frequency_hz[x]", self.trap_frequency_hz[0]),
            ("trap_frequency_hz[y]", self.trap_frequency_hz[1]),
            ("trap_frequency_hz[z]", self.trap_frequency_hz[2]),
            ("wavelength_m", self.wavelength_m),
            ("separation_m", self.separation_m),
            ("mass_kg", self.mass_kg),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        // an infinite lifetime switches decay off
        if !(self.lifetime_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lifetime_s must be positive, got {}",
                self.lifetime_s
            )));
        }
        if !(self.temperature_k.is_finite() && self.temperature_k >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature {} K",
                self.temperature_k
            )));
        }
        if !self.c6_hz_m6.is_finite() {
            return Err(Error::InvalidParameter("C6 must be finite".into()));
        }
        Ok(())
    }

    /// `Omega0`, rad/s.
    pub fn rabi_angular(&self) -> f64 {
        2.0 * PI * self.rabi_frequency_hz
    }

    /// `1/Omega0`, s.
    pub fn time_unit(&self) -> f64 {
        1.0 / self.rabi_angular()
    }

    /// Trap frequencies `omega`, rad/s.
    pub fn trap_angular(&self) -> [f64; 3] {
        self.trap_frequency_hz.map(|f| 2.0 * PI * f)
    }

    /// `V / hbar Omega0` with `V = -C6 / R^6`.
    pub fn interaction(&self) -> f64 {
        -self.c6_hz_m6 / self.separation_m.powi(6) / self.rabi_frequency_hz
    }

    /// `gamma`, 1/s.
    pub fn decay_rate(&self) -> f64 {
        1.0 / self.lifetime_s
    }

    /// `k = 2 pi / lambda`, 1/m.
    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength_m
    }

    /// Recoil frequency `hbar k^2 / 2m`, rad/s.
    pub fn recoil_angular(&self) -> f64 {
        HBAR * self.wave_number().powi(2) / (2.0 * self.mass_kg)
    }

    /// Oscillator length `sqrt(hbar / m omega)` per axis, m.
    pub fn oscillator_length(&self) -> [f64; 3] {
        self.trap_angular()
            .map(|w| (HBAR / (self.mass_kg * w)).sqrt())
    }

    /// Lamb-Dicke factors `k_axis sqrt(hbar / 2 m omega_axis)`; only `z`
    /// carries the laser momentum.
    pub fn lamb_dicke(&self) -> [f64; 3] {
        let a = self.oscillator_length();
        [0.0, 0.0, self.wave_number() * a[2] / 2f64.sqrt()]
    }

    /// Dimensionless couplings for the simulation.
    pub fn couplings(&self) -> Couplings {
        let w = self.rabi_angular();
        let a = self.oscillator_length();
        Couplings {
            interaction: self.interaction(),
            decay_rate: self.decay_rate() / w,
            trap_frequency: self.trap_angular().map(|t| t / w),
            lamb_dicke: self.lamb_dicke(),
            position_over_separation: a.map(|l| l / 2f64.sqrt() / self.separation_m),
            vdw_order: 4,
            fock_padding: DEFAULT_FOCK_PADDING,
        }
    }

    /// Inverse of [`SystemConfig::couplings`] given the Rabi frequency, the
    /// mass and the temperature, which the dimensionless couplings do not fix.
    pub fn from_couplings(
        c: &Couplings,
        rabi_frequency_hz: f64,
        mass_kg: f64,
        temperature_k: f64,
    ) -> Result<Self> {
        let w = 2.0 * PI * rabi_frequency_hz;
        let trap = c.trap_frequency.map(|t| t * w);
        if trap.iter().any(|t| *t <= 0.0)
            || c.lamb_dicke[2] <= 0.0
            || c.position_over_separation[0] <= 0.0
        {
            return Err(Error::InvalidParameter(
                "couplings need positive trap frequencies, z Lamb-Dicke factor and x oscillator scale".into(),
            ));
        }
        let half_length = |omega: f64| (HBAR / (2.0 * mass_kg * omega)).sqrt();
        let k = c.lamb_dicke[2] / half_length(trap[2]);
        let separation = half_length(trap[0]) / c.position_over_separation[0];
        Ok(Self {
            rabi_frequency_hz,
            trap_frequency_hz: trap.map(|t| t / (2.0 * PI)),
            lifetime_s: 1.0 / (c.decay_rate * w),
            wavelength_m: 2.0 * PI / k,
            c6_hz_m6: -c.interaction * rabi_frequency_hz * separation.powi(6),
            separation_m: separation,
            mass_kg,
            temperature_k,
        })
    }

    /// `exp(-hbar omega / k_B T)` per axis.
    pub fn boltzmann_ratio(&self, temperature_k: f64) -> [f64; 3] {
        self.trap_angular()
            .map(|w| boltzmann_ratio(w, temperature_k))
    }
}

/// `exp(-hbar omega / k_B T)`; zero at `T = 0`.
pub fn boltzmann_ratio(omega: f64, temperature_k: f64) -> f64 {
    if temperature_k <= 0.0 {
        0.0
    } else {
        (-HBAR * omega / (BOLTZMANN * temperature_k)).exp()
    }
}

/// Thermal ground-state occupation `1 - exp(-hbar omega / k_B T)`.
pub fn ground_state_occupation(omega: f64, temperature_k: f64) -> f64 {
    1.0 - boltzmann_ratio(omega, temperature_k)
}

/// Mean thermal occupation `<n>`.
pub fn mean_occupation(omega: f64, temperature_k: f64) -> f64 {
    let q = boltzmann_ratio(omega, temperature_k);
    q / (1.0 - q)
}

/// `coth(hbar omega / 2 k_B T)`, exactly 1 at `T = 0`.
pub fn coth_factor(omega: f64, temperature_k: f64) -> f64 {
    if temperature_k <= 0.0 {
        return 1.0;
    }
    let x = HBAR * omega / (2.0 * BOLTZMANN * temperature_k);
    1.0 / x.tanh()
}

/// Decay infidelity `3/4 T_r gamma`.
pub fn analytic_decay_infidelity(mean_rydberg_time_s: f64, gamma: f64) -> f64 {
    if gamma * mean_rydberg_time_s >= 0.1 {
        log::warn!(
            "gamma T_r = {:.3} outside the linear regime",
            gamma * mean_rydberg_time_s
        );
    }
    0.75 * mean_rydberg_time_s * gamma
}

/// Recoil infidelity `15/32 (hbar k^2/2m) omega_z T_r^2 coth(hbar omega_z / 2 k_B T)`.
pub fn analytic_recoil_infidelity(
    config: &SystemConfig,
    mean_rydberg_time_s: f64,
    temperature_k: f64,
) -> f64 {
    let wz = config.trap_angular()[2];
    if wz * mean_rydberg_time_s > 0.5 {
        log::warn!(
            "omega_z T_r = {:.3}: motional sidebands start to resolve",
            wz * mean_rydberg_time_s
        );
    }
    15.0 / 32.0
        * config.recoil_angular()
        * wz
        * mean_rydberg_time_s.powi(2)
        * coth_factor(wz, temperature_k)
}

/// Detuning shift from the recoil energy, `(hbar k^2 / 2m) / 2 pi`, Hz.
pub fn recoil_phase_shift(config: &SystemConfig) -> f64 {
    config.recoil_angular() / (2.0 * PI)
}

/// Interaction-force infidelity
/// `27/4 (T_rr V / hbar)^2 (hbar / m omega_x) / R^2 coth(hbar omega_x / 2 k_B T)`.
pub fn analytic_vdw_infidelity(config: &SystemConfig, pair_time_s: f64, temperature_k: f64) -> f64 {
    let wx = config.trap_angular()[0];
    let v = config.interaction() * config.rabi_angular();
    let ax = config.oscillator_length()[0];
    27.0 / 4.0
        * (pair_time_s * v).powi(2)
        * (ax / config.separation_m).powi(2)
        * coth_factor(wx, temperature_k)
}

/// Short-time overlap `<alpha|alpha e^{-i omega_z t}>` of the recoil-kicked
/// ground state, `exp[-i E t - E omega_z t^2 / 2]` with `E = hbar k^2 / 2m`.
pub fn coherent_overlap(config: &SystemConfig, mean_rydberg_time_s: f64) -> Complex64 {
    let e = config.recoil_angular();
    let wz = config.trap_angular()[2];
    let t = mean_rydberg_time_s;
    Complex64::new(-0.5 * e * wz * t * t, -e * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn table_one_interaction() {
        let c = SystemConfig::table_one();
        assert!((c.interaction() - 21.1).abs() < 0.2, "{}", c.interaction());
    }

    #[test]
    fn round_trip_through_couplings() {
        let c = SystemConfig {
            temperature_k: 1.5e-6,
            ..SystemConfig::table_one()
        };
        let back = SystemConfig::from_couplings(
            &c.couplings(),
            c.rabi_frequency_hz,
            c.mass_kg,
            c.temperature_k,
        )
        .unwrap();
        let pairs = [
            (c.lifetime_s, back.lifetime_s),
            (c.wavelength_m, back.wavelength_m),
            (c.c6_hz_m6, back.c6_hz_m6),
            (c.separation_m, back.separation_m),
            (c.trap_frequency_hz[0], back.trap_frequency_hz[0]),
            (c.trap_frequency_hz[1], back.trap_frequency_hz[1]),
            (c.trap_frequency_hz[2], back.trap_frequency_hz[2]),
        ];
        for (a, b) in pairs {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive() {
        let mut c = SystemConfig::table_one();
        c.trap_frequency_hz[1] = 0.0;
        assert!(c.validate().is_err());
        assert!(SystemConfig::table_one().validate().is_ok());
    }

    #[test]
    fn coth_identity() {
        let w = 2.0 * PI * 50e3;
        assert_eq!(coth_factor(w, 0.0), 1.0);
        for t in [0.5e-6, 1.5e-6, 3e-6] {
            assert_relative_eq!(
                coth_factor(w, t),
                2.0 * mean_occupation(w, t) + 1.0,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn decay_formula() {
        assert_eq!(analytic_decay_infidelity(60e-9, 0.0), 0.0);
        let a = analytic_decay_infidelity(60e-9, 2e4);
        assert_relative_eq!(
            analytic_decay_infidelity(60e-9, 4e4),
            2.0 * a,
            max_relative = 1e-15
        );
    }

    #[test]
    fn recoil_shift_scales() {
        let c = SystemConfig::table_one();
        let heavy = SystemConfig {
            mass_kg: 2.0 * c.mass_kg,
            ..c.clone()
        };
        assert_relative_eq!(
            recoil_phase_shift(&heavy),
            0.5 * recoil_phase_shift(&c),
            max_relative = 1e-12
        );
        let long = SystemConfig {
            wavelength_m: 1e6,
            ..c.clone()
        };
        assert!(recoil_phase_shift(&long) < 1e-20);
    }

    #[test]
    fn vanishing_limits() {
        let c = SystemConfig::table_one();
        assert_eq!(analytic_vdw_infidelity(&c, 0.0, 0.0), 0.0);
        assert_eq!(coherent_overlap(&c, 0.0), Complex64::new(1.0, 0.0));
        let soft = SystemConfig {
            trap_frequency_hz: [100e3, 100e3, 1e-9],
            ..c
        };
        assert!(analytic_recoil_infidelity(&soft, 60e-9, 0.0) < 1e-15);
    }

    #[test]
    fn coherent_overlap_matches_exact_form() {
        // exact: <alpha|alpha e^{-i w t}> = exp(-|alpha|^2 (1 - e^{-i w t}))
        let c = SystemConfig::table_one();
        let eta2 = c.lamb_dicke()[2].powi(2);
        let wz = c.trap_angular()[2];
        for t in [10e-9, 60e-9, 200e-9] {
            let exact =
                (-eta2 * (Complex64::new(1.0, 0.0) - Complex64::new(0.0, -wz * t).exp())).exp();
            let approx = coherent_overlap(&c, t);
            let wt = wz * t;
            // the two agree up to third order in omega_z t
            assert!((exact - approx).norm() < 2.0 * eta2 * wt.powi(3), "t = {t}");
        }
    }
}
