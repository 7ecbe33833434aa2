//! Experiment configuration files.
//!
//! TOML with the unit in every key name. Unknown keys are rejected, and keys
//! that do not belong to the chosen pulse family or mode are errors too.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::budget::{BudgetOptions, Mechanism, SystemConfig};
use crate::error::{Error, Result};
use crate::optimizer::{
    default_bound, Bound, DcrabOptions, Objective, OptimizationProblem, Param, SweepVariable,
};
use crate::pulses::{
    DcrabBasis, FamilyKind, PulseShape, DCRAB_DEFAULT_COMPONENTS, DCRAB_DEFAULT_FMAX,
};
use crate::quantum::{IntegratorOptions, ModelFlags};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Optimize,
    Sweep,
    Budget,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Optimize => "optimize",
            Mode::Sweep => "sweep",
            Mode::Budget => "budget",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    Fig2d,
    Fig3,
    Fig4,
    Fig5a,
    Fig5b,
    Fig5c,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2d => "fig2d",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5a => "fig5a",
            Figure::Fig5b => "fig5b",
            Figure::Fig5c => "fig5c",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    TableOne,
    FortyMegahertz,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SystemSection {
    /// Starting values for the physical keys below.
    pub preset: Option<Preset>,
    /// Dimensionless blockade; excludes every physical key.
    pub V_over_Omega0: Option<f64>,
    pub omega0_over_2pi_MHz: Option<f64>,
    pub trap_x_over_2pi_kHz: Option<f64>,
    pub trap_y_over_2pi_kHz: Option<f64>,
    pub trap_z_over_2pi_kHz: Option<f64>,
    pub lifetime_us: Option<f64>,
    pub wavelength_nm: Option<f64>,
    pub c6_over_h_GHz_um6: Option<f64>,
    pub separation_um: Option<f64>,
    pub mass_u: Option<f64>,
    pub temperature_uK: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct PulseSection {
    pub family: Option<FamilyKind>,
    pub tau_Omega0: Option<f64>,
    pub delta0_over_Omega0: Option<f64>,
    pub omega_peak_over_Omega0: Option<f64>,
    pub theta_rad: Option<f64>,
    pub height_over_Omega0: Option<f64>,
    pub base_Omega0: Option<f64>,
    pub amplitude_over_Omega0: Option<f64>,
    pub width_Omega0: Option<f64>,
    pub kappa_Omega0: Option<f64>,
    /// Ramp time in physical units; needs a physical system.
    pub kappa_ns: Option<f64>,
    pub dcrab_frequencies_Omega0_over_2pi: Option<Vec<f64>>,
    pub dcrab_amplitudes_over_Omega0: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub tolerance: Option<f64>,
    pub grid_intervals: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct OptimizeSection {
    pub objective: Option<ObjectiveName>,
    /// Pulse keys to optimize; the family defaults when absent.
    pub free: Option<Vec<String>>,
    /// `key = [lower, upper]` with pulse key names.
    pub bounds: Option<toml::Table>,
    pub threshold: Option<f64>,
    pub tau_resolution_Omega0: Option<f64>,
    pub restarts: Option<usize>,
    pub max_evals: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveName {
    MinDuration,
    MinBellInfidelity,
    MinRydbergTime,
}

impl From<ObjectiveName> for Objective {
    fn from(o: ObjectiveName) -> Self {
        match o {
            ObjectiveName::MinDuration => Objective::MinDurationFeasible,
            ObjectiveName::MinBellInfidelity => Objective::MinBellInfidelity,
            ObjectiveName::MinRydbergTime => Objective::MinRydbergTime,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct DcrabSection {
    pub super_iterations: Option<usize>,
    pub components: Option<usize>,
    pub fmax_Omega0_over_2pi: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// `width_Omega0`, `kappa_Omega0` or `V_over_Omega0`.
    pub variable: Option<String>,
    pub values: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// Any of `recoil`, `trap`, `vdw`, `decay`.
    pub flags: Option<Vec<String>>,
    pub fock_z: Option<usize>,
    pub fock_x: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct BudgetSection {
    pub temperatures_uK: Option<Vec<f64>>,
    pub fock_dim: Option<usize>,
    pub probe_levels: Option<usize>,
    pub max_fock_dim: Option<usize>,
    pub convergence: Option<f64>,
    pub full_fock_z: Option<usize>,
    pub full_fock_x: Option<usize>,
    pub vdw_order: Option<usize>,
    /// Single-mechanism scan instead of the budget table.
    pub scan: Option<Mechanism>,
    pub scan_decay_rates_per_s: Option<Vec<f64>>,
    pub scan_trap_kHz: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub json: Option<bool>,
    pub figure: Option<Figure>,
}

/// One experiment, as read from a file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub pulse: PulseSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    pub simulate: Option<SimulateSection>,
    pub optimize: Option<OptimizeSection>,
    pub dcrab: Option<DcrabSection>,
    pub sweep: Option<SweepSection>,
    pub budget: Option<BudgetSection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// The physical or dimensionless description of the atoms.
#[derive(Clone, Debug, PartialEq)]
pub enum System {
    Dimensionless { interaction: f64 },
    Physical(SystemConfig),
}

impl System {
    pub fn interaction(&self) -> f64 {
        match self {
            System::Dimensionless { interaction } => *interaction,
            System::Physical(c) => c.interaction(),
        }
    }

    pub fn physical(&self, what: &str) -> Result<&SystemConfig> {
        match self {
            System::Physical(c) => Ok(c),
            System::Dimensionless { .. } => Err(Error::Config(format!(
                "{what} needs a physical [system] (a preset or explicit SI keys), not V_over_Omega0"
            ))),
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Sets `path = value` in a TOML tree, creating tables on the way.
fn set_path(root: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| config_err(format!("empty key in override `{path}`")))?;
    let mut table = root;
    for p in parts {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| config_err(format!("`{p}` in override `{path}` is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// Parses `key=value`; the value is read as a TOML value and falls back to a
/// plain string.
pub fn parse_override(s: &str) -> Result<(String, toml::Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{s}` is not key=value")))?;
    let k = k.trim();
    let v = v.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {v}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(v.to_string()),
    };
    Ok((k.to_string(), value))
}

impl ExperimentConfig {
    /// Parses a configuration text and applies `key=value` overrides.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        for o in overrides {
            let (k, v) = parse_override(o)?;
            set_path(&mut table, &k, v)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| config_err(e.to_string()))
    }

    pub fn from_file(path: &std::path::Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    /// The configuration with the preset expanded and every default filled
    /// in, so that it re-parses to the same experiment.
    pub fn resolved(&self) -> Result<Self> {
        let mut c = self.clone();
        let mode = c.mode.ok_or_else(|| config_err("mode is not set"))?;
        if matches!(mode, Mode::Optimize | Mode::Sweep) && c.seed.is_none() {
            return Err(config_err(format!("mode {} needs a seed", mode.name())));
        }
        if let System::Physical(p) = self.system()? {
            // keys given in the file keep their text; the rest come from the preset
            let s = &self.system;
            c.system = SystemSection {
                preset: None,
                V_over_Omega0: None,
                omega0_over_2pi_MHz: s.omega0_over_2pi_MHz.or(Some(p.rabi_frequency_hz / 1e6)),
                trap_x_over_2pi_kHz: s.trap_x_over_2pi_kHz.or(Some(p.trap_frequency_hz[0] / 1e3)),
                trap_y_over_2pi_kHz: s.trap_y_over_2pi_kHz.or(Some(p.trap_frequency_hz[1] / 1e3)),
                trap_z_over_2pi_kHz: s.trap_z_over_2pi_kHz.or(Some(p.trap_frequency_hz[2] / 1e3)),
                lifetime_us: s.lifetime_us.or(Some(p.lifetime_s / 1e-6)),
                wavelength_nm: s.wavelength_nm.or(Some(p.wavelength_m / 1e-9)),
                c6_over_h_GHz_um6: s.c6_over_h_GHz_um6.or(Some(p.c6_hz_m6 / 1e-27)),
                separation_um: s.separation_um.or(Some(p.separation_m / 1e-6)),
                mass_u: s
                    .mass_u
                    .or(Some(p.mass_kg / crate::budget::constants::ATOMIC_MASS)),
                temperature_uK: s.temperature_uK.or(Some(p.temperature_k / 1e-6)),
            };
        }
        let integ = self.integrator_options()?;
        c.integrator = IntegratorSection {
            tolerance: Some(integ.tolerance),
            grid_intervals: Some(integ.grid_intervals),
        };
        self.pulse()?;
        match mode {
            Mode::Simulate => {
                self.model()?;
            }
            Mode::Optimize => {
                self.problem()?;
                self.dcrab_options()?;
            }
            Mode::Sweep => {
                self.problem()?;
                self.sweep_spec()?;
            }
            Mode::Budget => {
                self.budget_options()?;
                self.temperatures()?;
                self.scan()?;
            }
        }
        let unused = |present: bool, name: &str| -> Result<()> {
            if present {
                Err(config_err(format!(
                    "[{name}] is not used in {} mode",
                    mode.name()
                )))
            } else {
                Ok(())
            }
        };
        unused(c.simulate.is_some() && mode != Mode::Simulate, "simulate")?;
        unused(
            c.optimize.is_some() && !matches!(mode, Mode::Optimize | Mode::Sweep),
            "optimize",
        )?;
        unused(c.dcrab.is_some() && mode != Mode::Optimize, "dcrab")?;
        unused(c.sweep.is_some() && mode != Mode::Sweep, "sweep")?;
        unused(c.budget.is_some() && mode != Mode::Budget, "budget")?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn system(&self) -> Result<System> {
        let s = &self.system;
        let physical_keys = [
            s.omega0_over_2pi_MHz,
            s.trap_x_over_2pi_kHz,
            s.trap_y_over_2pi_kHz,
            s.trap_z_over_2pi_kHz,
            s.lifetime_us,
            s.wavelength_nm,
            s.c6_over_h_GHz_um6,
            s.separation_um,
            s.mass_u,
            s.temperature_uK,
        ];
        let any_physical = s.preset.is_some() || physical_keys.iter().any(Option::is_some);
        if let Some(v) = s.V_over_Omega0 {
            if any_physical {
                return Err(config_err(
                    "[system] V_over_Omega0 excludes the physical keys",
                ));
            }
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(format!("V_over_Omega0 = {v} must be positive")));
            }
            return Ok(System::Dimensionless { interaction: v });
        }
        if !any_physical {
            return Err(config_err(
                "[system] needs V_over_Omega0, a preset or the physical keys",
            ));
        }
        let mut p = match s.preset {
            Some(Preset::TableOne) => Some(SystemConfig::table_one()),
            Some(Preset::FortyMegahertz) => Some(SystemConfig::forty_megahertz()),
            None => None,
        };
        let get =
            |v: Option<f64>, from_preset: Option<f64>, key: &str, scale: f64| -> Result<f64> {
                v.map(|x| x * scale).or(from_preset).ok_or_else(|| {
                    config_err(format!("[system] {key} is missing (no preset given)"))
                })
            };
        let base = p.take();
        let b = base.as_ref();
        let cfg = SystemConfig {
            rabi_frequency_hz: get(
                s.omega0_over_2pi_MHz,
                b.map(|c| c.rabi_frequency_hz),
                "omega0_over_2pi_MHz",
                1e6,
            )?,
            trap_frequency_hz: [
                get(
                    s.trap_x_over_2pi_kHz,
                    b.map(|c| c.trap_frequency_hz[0]),
                    "trap_x_over_2pi_kHz",
                    1e3,
                )?,
                get(
                    s.trap_y_over_2pi_kHz,
                    b.map(|c| c.trap_frequency_hz[1]),
                    "trap_y_over_2pi_kHz",
                    1e3,
                )?,
                get(
                    s.trap_z_over_2pi_kHz,
                    b.map(|c| c.trap_frequency_hz[2]),
                    "trap_z_over_2pi_kHz",
                    1e3,
                )?,
            ],
            lifetime_s: get(s.lifetime_us, b.map(|c| c.lifetime_s), "lifetime_us", 1e-6)?,
            wavelength_m: get(
                s.wavelength_nm,
                b.map(|c| c.wavelength_m),
                "wavelength_nm",
                1e-9,
            )?,
            c6_hz_m6: get(
                s.c6_over_h_GHz_um6,
                b.map(|c| c.c6_hz_m6),
                "c6_over_h_GHz_um6",
                1e9 * 1e-36,
            )?,
            separation_m: get(
                s.separation_um,
                b.map(|c| c.separation_m),
                "separation_um",
                1e-6,
            )?,
            mass_kg: get(
                s.mass_u,
                b.map(|c| c.mass_kg),
                "mass_u",
                crate::budget::constants::ATOMIC_MASS,
            )?,
            temperature_k: get(
                s.temperature_uK,
                b.map(|c| c.temperature_k),
                "temperature_uK",
                1e-6,
            )?,
        };
        cfg.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(System::Physical(cfg))
    }

    pub fn integrator_options(&self) -> Result<IntegratorOptions> {
        let mut o = IntegratorOptions::default();
        if let Some(t) = self.integrator.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(config_err(format!("integrator tolerance {t}")));
            }
            o.tolerance = t;
        }
        if let Some(g) = self.integrator.grid_intervals {
            if g < 2 {
                return Err(config_err("grid_intervals must be at least 2"));
            }
            o.grid_intervals = g;
        }
        Ok(o)
    }

    fn kappa(&self) -> Result<Option<f64>> {
        let p = &self.pulse;
        match (p.kappa_Omega0, p.kappa_ns) {
            (Some(_), Some(_)) => Err(config_err("set kappa_Omega0 or kappa_ns, not both")),
            (Some(k), None) => Ok(Some(k)),
            (None, Some(ns)) => {
                let sys = self.system()?;
                let c = sys.physical("kappa_ns")?;
                Ok(Some(ns * 1e-9 * c.rabi_angular()))
            }
            (None, None) => Ok(None),
        }
    }

    pub fn pulse(&self) -> Result<PulseShape> {
        let p = &self.pulse;
        let family = p
            .family
            .ok_or_else(|| config_err("[pulse] family is missing"))?;
        let need = |v: Option<f64>, key: &str| -> Result<f64> {
            v.ok_or_else(|| config_err(format!("[pulse] {key} is required for {}", family.name())))
        };
        let tau = need(p.tau_Omega0, "tau_Omega0")?;
        let delta0 = need(p.delta0_over_Omega0, "delta0_over_Omega0")?;
        let kappa = self.kappa()?;
        let allowed: &[&str] = match family {
            FamilyKind::DeltaJump => &["theta_rad"],
            FamilyKind::Triangle => &["height_over_Omega0", "base_Omega0"],
            FamilyKind::Gaussian => &["amplitude_over_Omega0", "width_Omega0"],
            FamilyKind::GaussianRamped => &["amplitude_over_Omega0", "width_Omega0", "kappa"],
            FamilyKind::Dcrab => &[
                "amplitude_over_Omega0",
                "width_Omega0",
                "kappa",
                "dcrab_frequencies_Omega0_over_2pi",
                "dcrab_amplitudes_over_Omega0",
            ],
        };
        let present = [
            ("theta_rad", p.theta_rad.is_some()),
            ("height_over_Omega0", p.height_over_Omega0.is_some()),
            ("base_Omega0", p.base_Omega0.is_some()),
            ("amplitude_over_Omega0", p.amplitude_over_Omega0.is_some()),
            ("width_Omega0", p.width_Omega0.is_some()),
            ("kappa", kappa.is_some()),
            (
                "dcrab_frequencies_Omega0_over_2pi",
                p.dcrab_frequencies_Omega0_over_2pi.is_some(),
            ),
            (
                "dcrab_amplitudes_over_Omega0",
                p.dcrab_amplitudes_over_Omega0.is_some(),
            ),
        ];
        for (key, set) in present {
            if set && !allowed.contains(&key) {
                return Err(config_err(format!(
                    "[pulse] {key} does not apply to {}",
                    family.name()
                )));
            }
        }
        let mut pulse = match family {
            FamilyKind::DeltaJump => {
                PulseShape::delta_jump(tau, delta0, need(p.theta_rad, "theta_rad")?)
            }
            FamilyKind::Triangle => PulseShape::triangle(
                tau,
                delta0,
                need(p.height_over_Omega0, "height_over_Omega0")?,
                need(p.base_Omega0, "base_Omega0")?,
            ),
            FamilyKind::Gaussian => PulseShape::gaussian(
                tau,
                delta0,
                need(p.amplitude_over_Omega0, "amplitude_over_Omega0")?,
                need(p.width_Omega0, "width_Omega0")?,
            ),
            FamilyKind::GaussianRamped => PulseShape::gaussian_ramped(
                tau,
                delta0,
                need(p.amplitude_over_Omega0, "amplitude_over_Omega0")?,
                need(p.width_Omega0, "width_Omega0")?,
                kappa.ok_or_else(|| {
                    config_err("[pulse] kappa_Omega0 or kappa_ns is required for gaussian_ramped")
                })?,
            ),
            FamilyKind::Dcrab => {
                let frequencies = p
                    .dcrab_frequencies_Omega0_over_2pi
                    .clone()
                    .unwrap_or_default();
                let amplitudes = p.dcrab_amplitudes_over_Omega0.clone().unwrap_or_default();
                if frequencies.len() != amplitudes.len() {
                    return Err(config_err(
                        "dCRAB frequencies and amplitudes differ in length",
                    ));
                }
                let basis = DcrabBasis {
                    frequencies,
                    amplitudes,
                    f_max: self
                        .dcrab
                        .as_ref()
                        .and_then(|d| d.fmax_Omega0_over_2pi)
                        .unwrap_or(DCRAB_DEFAULT_FMAX),
                };
                match (p.amplitude_over_Omega0, p.width_Omega0) {
                    (Some(a), Some(w)) => PulseShape::dcrab_seeded(tau, delta0, a, w, basis, kappa),
                    (None, None) => PulseShape::dcrab(tau, delta0, basis, kappa),
                    _ => {
                        return Err(config_err(
                            "a dCRAB Gaussian seed needs both amplitude and width",
                        ))
                    }
                }
            }
        };
        if let Some(s) = p.omega_peak_over_Omega0 {
            if !(0.0..=1.0).contains(&s) {
                return Err(config_err(format!(
                    "omega_peak_over_Omega0 = {s} outside [0, 1]"
                )));
            }
            pulse.omega_scale = s;
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(config_err(format!("tau_Omega0 = {tau} must be positive")));
        }
        Ok(pulse)
    }

    /// Model flags and Fock sizes `[z, x]` of simulate mode.
    pub fn model(&self) -> Result<(ModelFlags, [usize; 2])> {
        let s = self.simulate.clone().unwrap_or_default();
        let mut flags = ModelFlags::IDEAL;
        for f in s.flags.unwrap_or_default() {
            match f.as_str() {
                "recoil" => flags.recoil = true,
                "trap" => flags.trap = true,
                "vdw" => flags.vdw_position_dependence = true,
                "decay" => flags.decay = true,
                other => return Err(config_err(format!("unknown model flag `{other}`"))),
            }
        }
        let fock = [s.fock_z.unwrap_or(10), s.fock_x.unwrap_or(3)];
        if fock.contains(&0) {
            return Err(config_err("Fock sizes must be positive"));
        }
        if flags != ModelFlags::IDEAL {
            self.system()?.physical("a model with corrections")?;
        }
        Ok((flags, fock))
    }

    pub fn problem(&self) -> Result<OptimizationProblem> {
        let o = self
            .optimize
            .clone()
            .ok_or_else(|| config_err("[optimize] section is missing"))?;
        let objective = o
            .objective
            .ok_or_else(|| config_err("[optimize] objective is missing"))?;
        let mut p = OptimizationProblem::new(
            objective.into(),
            self.pulse()?,
            self.system()?.interaction(),
        );
        if let Some(free) = &o.free {
            p.free = free
                .iter()
                .map(|k| param_of(k).map(default_bound))
                .collect::<Result<_>>()?;
        }
        if let Some(bounds) = &o.bounds {
            for (k, v) in bounds {
                let param = param_of(k)?;
                let pair: Vec<f64> = v
                    .as_array()
                    .map(|a| {
                        a.iter()
                            .filter_map(|x| x.as_float().or(x.as_integer().map(|i| i as f64)))
                            .collect()
                    })
                    .unwrap_or_default();
                if pair.len() != 2 {
                    return Err(config_err(format!("bounds.{k} must be [lower, upper]")));
                }
                let slot = p
                    .free
                    .iter_mut()
                    .find(|b| b.param == param)
                    .ok_or_else(|| {
                        config_err(format!("bounds.{k} given for a parameter that is not free"))
                    })?;
                *slot = Bound::new(param, pair[0], pair[1]);
            }
        }
        if let Some(t) = o.threshold {
            p.threshold = t;
        }
        if let Some(t) = o.tau_resolution_Omega0 {
            p.tau_resolution = t;
        }
        if let Some(r) = o.restarts {
            p.restarts = r;
        }
        if let Some(m) = o.max_evals {
            p.max_evals = m;
        }
        if let Some(t) = o.tolerance {
            p.tolerance = t;
        }
        p.seed = self.seed.unwrap_or(0);
        for b in &p.free {
            if b.param.get(&p.template).is_none() {
                return Err(config_err(format!(
                    "{} is not a parameter of {}",
                    param_key(b.param),
                    p.template.kind().name()
                )));
            }
            if !(b.lower < b.upper) {
                return Err(config_err(format!(
                    "empty bounds for {}",
                    param_key(b.param)
                )));
            }
        }
        if !(p.threshold > 0.0 && p.tau_resolution > 0.0 && p.tolerance > 0.0) {
            return Err(config_err(
                "threshold, tau_resolution_Omega0 and tolerance must be positive",
            ));
        }
        Ok(p)
    }

    pub fn dcrab_options(&self) -> Result<Option<DcrabOptions>> {
        let Some(d) = &self.dcrab else {
            return Ok(None);
        };
        let o = DcrabOptions {
            super_iterations: d.super_iterations.unwrap_or(3),
            components: d.components.unwrap_or(DCRAB_DEFAULT_COMPONENTS),
            f_max: d.fmax_Omega0_over_2pi.unwrap_or(DCRAB_DEFAULT_FMAX),
            seed: self.seed.unwrap_or(0),
        };
        if !(o.f_max > 0.0) || o.components == 0 {
            return Err(config_err("dCRAB needs positive fmax and components"));
        }
        Ok(Some(o))
    }

    pub fn sweep_spec(&self) -> Result<(SweepVariable, Vec<f64>)> {
        let s = self
            .sweep
            .clone()
            .ok_or_else(|| config_err("[sweep] section is missing"))?;
        let variable = match s.variable.as_deref() {
            Some("width_Omega0") => SweepVariable::Width,
            Some("kappa_Omega0") => SweepVariable::Kappa,
            Some("V_over_Omega0") => SweepVariable::Interaction,
            Some(other) => return Err(config_err(format!("unknown sweep variable `{other}`"))),
            None => return Err(config_err("[sweep] variable is missing")),
        };
        let values = s
            .values
            .ok_or_else(|| config_err("[sweep] values are missing"))?;
        if values.is_empty() {
            return Err(config_err("[sweep] values are empty"));
        }
        Ok((variable, values))
    }

    pub fn budget_options(&self) -> Result<BudgetOptions> {
        let b = self.budget.clone().unwrap_or_default();
        let d = BudgetOptions::default();
        let o = BudgetOptions {
            fock_dim: b.fock_dim.unwrap_or(d.fock_dim),
            probe_levels: b.probe_levels.unwrap_or(d.probe_levels),
            max_fock_dim: b.max_fock_dim.unwrap_or(d.max_fock_dim),
            convergence: b.convergence.unwrap_or(d.convergence),
            full_fock_dim: [
                b.full_fock_z.unwrap_or(d.full_fock_dim[0]),
                b.full_fock_x.unwrap_or(d.full_fock_dim[1]),
            ],
            vdw_order: b.vdw_order.unwrap_or(d.vdw_order),
            tolerance: self.integrator.tolerance.unwrap_or(d.tolerance),
        };
        if o.fock_dim == 0 || o.full_fock_dim.contains(&0) || !(o.convergence > 0.0) {
            return Err(config_err("invalid budget truncation settings"));
        }
        Ok(o)
    }

    /// Budget temperatures in kelvin.
    pub fn temperatures(&self) -> Result<Vec<f64>> {
        let t = self
            .budget
            .as_ref()
            .and_then(|b| b.temperatures_uK.clone())
            .unwrap_or_else(|| vec![0.0]);
        if t.is_empty() || t.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(config_err(
                "temperatures_uK must be a non-empty list of non-negative values",
            ));
        }
        Ok(t.into_iter().map(|x| x * 1e-6).collect())
    }

    /// Scan mechanism and its grid in SI (1/s or Hz).
    pub fn scan(&self) -> Result<Option<(Mechanism, Vec<f64>)>> {
        let Some(b) = &self.budget else {
            return Ok(None);
        };
        let Some(m) = b.scan else {
            if b.scan_decay_rates_per_s.is_some() || b.scan_trap_kHz.is_some() {
                return Err(config_err("scan grids given without `scan`"));
            }
            return Ok(None);
        };
        let grid = match m {
            Mechanism::Decay => {
                if b.scan_trap_kHz.is_some() {
                    return Err(config_err("scan_trap_kHz does not apply to a decay scan"));
                }
                b.scan_decay_rates_per_s.clone()
            }
            _ => {
                if b.scan_decay_rates_per_s.is_some() {
                    return Err(config_err(
                        "scan_decay_rates_per_s applies to decay scans only",
                    ));
                }
                b.scan_trap_kHz
                    .clone()
                    .map(|v| v.into_iter().map(|x| x * 1e3).collect())
            }
        }
        .ok_or_else(|| config_err(format!("{} scan grid is missing", m.name())))?;
        if grid.is_empty() {
            return Err(config_err("scan grid is empty"));
        }
        Ok(Some((m, grid)))
    }
}

/// Pulse key name of an optimizable parameter.
pub fn param_key(p: Param) -> String {
    match p {
        Param::Tau => "tau_Omega0".into(),
        Param::Delta0 => "delta0_over_Omega0".into(),
        Param::Theta => "theta_rad".into(),
        Param::Height => "height_over_Omega0".into(),
        Param::Base => "base_Omega0".into(),
        Param::Amplitude => "amplitude_over_Omega0".into(),
        Param::Width => "width_Omega0".into(),
        Param::Kappa => "kappa_Omega0".into(),
        Param::Coefficient(i) => format!("dcrab_amplitude_{i}"),
    }
}

fn param_of(key: &str) -> Result<Param> {
    Ok(match key {
        "tau_Omega0" => Param::Tau,
        "delta0_over_Omega0" => Param::Delta0,
        "theta_rad" => Param::Theta,
        "height_over_Omega0" => Param::Height,
        "base_Omega0" => Param::Base,
        "amplitude_over_Omega0" => Param::Amplitude,
        "width_Omega0" => Param::Width,
        "kappa_Omega0" => Param::Kappa,
        k => match k
            .strip_prefix("dcrab_amplitude_")
            .and_then(|i| i.parse().ok())
        {
            Some(i) => Param::Coefficient(i),
            None => return Err(config_err(format!("unknown pulse parameter `{k}`"))),
        },
    })
}

/// `[pulse]` section describing `pulse`, for writing optimized pulses back
/// out in the configuration format.
pub fn pulse_section(pulse: &PulseShape) -> PulseSection {
    use crate::pulses::Family;
    let mut s = PulseSection {
        family: Some(pulse.kind()),
        tau_Omega0: Some(pulse.tau),
        delta0_over_Omega0: Some(pulse.delta0),
        omega_peak_over_Omega0: (pulse.omega_scale != 1.0).then_some(pulse.omega_scale),
        ..Default::default()
    };
    match &pulse.family {
        Family::DeltaJump { theta } => s.theta_rad = Some(theta.rem_euclid(2.0 * PI)),
        Family::Triangle { height, base } => {
            s.height_over_Omega0 = Some(*height);
            s.base_Omega0 = Some(*base);
        }
        Family::Gaussian { amplitude, width } => {
            s.amplitude_over_Omega0 = Some(*amplitude);
            s.width_Omega0 = Some(*width);
        }
        Family::GaussianRamped {
            amplitude,
            width,
            kappa,
        } => {
            s.amplitude_over_Omega0 = Some(*amplitude);
            s.width_Omega0 = Some(*width);
            s.kappa_Omega0 = Some(*kappa);
        }
        Family::Dcrab { basis, seed, kappa } => {
            if let Some([a, w]) = seed {
                s.amplitude_over_Omega0 = Some(*a);
                s.width_Omega0 = Some(*w);
            }
            s.kappa_Omega0 = *kappa;
            s.dcrab_frequencies_Omega0_over_2pi = Some(basis.frequencies.clone());
            s.dcrab_amplitudes_over_Omega0 = Some(basis.amplitudes.clone());
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
mode = "optimize"
seed = 7

[system]
V_over_Omega0 = 21.1

[pulse]
family = "gaussian"
tau_Omega0 = 7.69
delta0_over_Omega0 = 1.2
amplitude_over_Omega0 = -1.85
width_Omega0 = 1.7

[optimize]
objective = "min_duration"
bounds = { amplitude_over_Omega0 = [-40, 40] }
"#;

    #[test]
    fn parses_and_builds_problem() {
        let c = ExperimentConfig::parse(BASE, &[]).unwrap();
        let p = c.problem().unwrap();
        assert_eq!(p.interaction, 21.1);
        assert_eq!(p.seed, 7);
        let amp = p.free.iter().find(|b| b.param == Param::Amplitude).unwrap();
        assert_eq!((amp.lower, amp.upper), (-40.0, 40.0));
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = BASE.replace("width_Omega0 = 1.7", "width_Omega0 = 1.7\nwidth = 1.7");
        assert!(matches!(
            ExperimentConfig::parse(&bad, &[]),
            Err(Error::Config(_))
        ));
        let top = format!("colour = 3\n{BASE}");
        assert!(ExperimentConfig::parse(&top, &[]).is_err());
    }

    #[test]
    fn foreign_family_key_rejected() {
        let c = ExperimentConfig::parse(BASE, &["pulse.theta_rad=1.0".into()]).unwrap();
        assert!(c.pulse().is_err());
    }

    #[test]
    fn overrides_apply() {
        let c =
            ExperimentConfig::parse(BASE, &["pulse.tau_Omega0=8".into(), "seed=3".into()]).unwrap();
        assert_eq!(c.pulse().unwrap().tau, 8.0);
        assert_eq!(c.seed, Some(3));
        assert!(ExperimentConfig::parse(BASE, &["pulse.tau=8".into()]).is_err());
    }

    #[test]
    fn seed_required_for_optimization() {
        let c = ExperimentConfig::parse(&BASE.replace("seed = 7", ""), &[]).unwrap();
        assert!(c.resolved().is_err());
    }

    #[test]
    fn resolved_round_trips() {
        let text = r#"
mode = "budget"
[system]
preset = "table_one"
temperature_uK = 1.5
[pulse]
family = "gaussian_ramped"
tau_Omega0 = 8.13
delta0_over_Omega0 = 1.14
amplitude_over_Omega0 = -1.8
width_Omega0 = 1.65
kappa_ns = 4.9
[budget]
temperatures_uK = [0, 1.5]
"#;
        let c = ExperimentConfig::parse(text, &[])
            .unwrap()
            .resolved()
            .unwrap();
        let again = ExperimentConfig::parse(&c.to_toml(), &[])
            .unwrap()
            .resolved()
            .unwrap();
        assert_eq!(c, again);
        let sys = c.system().unwrap();
        let p = sys.physical("test").unwrap();
        let reference = SystemConfig {
            temperature_k: 1.5e-6,
            ..SystemConfig::table_one()
        };
        for (a, b) in [
            (p.interaction(), reference.interaction()),
            (p.decay_rate(), reference.decay_rate()),
            (p.recoil_angular(), reference.recoil_angular()),
            (p.temperature_k, reference.temperature_k),
        ] {
            assert!((a / b - 1.0).abs() < 1e-12, "{a} vs {b}");
        }
        let kappa = c.pulse().unwrap().kappa().unwrap();
        assert!((kappa - 4.9e-9 * 2.0 * PI * 10e6).abs() < 1e-12);
    }

    #[test]
    fn dimensionless_and_physical_exclusive() {
        let text = BASE.replace(
            "V_over_Omega0 = 21.1",
            "V_over_Omega0 = 21.1\nseparation_um = 3",
        );
        let c = ExperimentConfig::parse(&text, &[]).unwrap();
        assert!(c.system().is_err());
    }

    #[test]
    fn unused_section_rejected() {
        let text = format!("{BASE}\n[budget]\ntemperatures_uK = [0]\n");
        let c = ExperimentConfig::parse(&text, &[]).unwrap();
        assert!(c.resolved().is_err());
    }
}
