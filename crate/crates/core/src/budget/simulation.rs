//! Mechanism-isolated simulations, the full-model simulation and the
//! assembled error budget.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    analytic_decay_infidelity, analytic_recoil_infidelity, analytic_vdw_infidelity, SystemConfig,
};
use crate::error::{Error, Result};
use crate::metrics::{gate_fidelities, ideal_gate, FidelityReport, GateResult, Thermal};
use crate::pulses::PulseShape;
use crate::quantum::{Axis, HilbertSpace, IntegratorOptions, ModelFlags, MotionalAxis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    Decay,
    Recoil,
    Vdw,
}

impl Mechanism {
    pub const ALL: [Mechanism; 3] = [Mechanism::Decay, Mechanism::Recoil, Mechanism::Vdw];

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Decay => "decay",
            Mechanism::Recoil => "recoil",
            Mechanism::Vdw => "vdw",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetOptions {
    /// Fock levels per ladder in the mechanism simulations.
    pub fock_dim: usize,
    /// Extra levels of the convergence probe.
    pub probe_levels: usize,
    /// The truncation grows by `probe_levels` until the probe passes or this
    /// size is reached.
    pub max_fock_dim: usize,
    /// Largest accepted relative change under the probe.
    pub convergence: f64,
    /// Fock levels of the `z` and `x` ladders in the full simulation.
    pub full_fock_dim: [usize; 2],
    /// Order of the interaction series in the separation fluctuation.
    pub vdw_order: usize,
    pub tolerance: f64,
}

impl Default for BudgetOptions {
    fn default() -> Self {
        Self {
            fock_dim: 10,
            probe_levels: 2,
            max_fock_dim: 16,
            convergence: 0.05,
            full_fock_dim: [10, 3],
            vdw_order: 4,
            tolerance: 1e-10,
        }
    }
}

impl BudgetOptions {
    fn integrator(&self) -> IntegratorOptions {
        IntegratorOptions {
            tolerance: self.tolerance,
            grid_intervals: 200,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismResult {
    pub mechanism: Mechanism,
    pub temperature_k: f64,
    /// Numeric Bell-state infidelity; NaN when not converged.
    pub bell_infidelity: f64,
    pub avg_infidelity: f64,
    pub analytic: f64,
    pub converged: bool,
    /// Relative change of the Bell infidelity under the Fock probe.
    pub probe_change: f64,
}

/// The pulse with its detuning offset raised by the recoil energy.
fn recoil_compensated(config: &SystemConfig, pulse: &PulseShape) -> PulseShape {
    let mut p = pulse.clone();
    p.delta0 += config.recoil_angular() / config.rabi_angular();
    p
}

fn ideal_reference(
    config: &SystemConfig,
    pulse: &PulseShape,
    opts: &BudgetOptions,
) -> Result<GateResult> {
    ideal_gate(config.interaction(), pulse, &opts.integrator())
}

fn thermal_for(space: &HilbertSpace, config: &SystemConfig, temperature_k: f64) -> Thermal {
    let q = config.boltzmann_ratio(temperature_k);
    Thermal {
        temperature: temperature_k,
        boltzmann_ratios: space
            .axes()
            .iter()
            .map(|a| match a.axis {
                Axis::X => q[0],
                Axis::Y => q[1],
                Axis::Z => q[2],
            })
            .collect(),
    }
}

fn run(
    config: &SystemConfig,
    pulse: &PulseShape,
    space: &HilbertSpace,
    flags: ModelFlags,
    temperature_k: f64,
    opts: &BudgetOptions,
    label: &str,
) -> Result<FidelityReport> {
    let thermal = thermal_for(space, config, temperature_k);
    let mut couplings = config.couplings();
    couplings.vdw_order = opts.vdw_order;
    gate_fidelities(
        space,
        &couplings,
        pulse,
        flags,
        &thermal,
        &opts.integrator(),
        label,
    )
}

/// Infidelity from one error source alone, with the analytic estimate for
/// comparison. Motional mechanisms are run at `fock_dim` and
/// `fock_dim + probe_levels`, raising the truncation while the relative
/// change exceeds `convergence`. A point that still fails at `max_fock_dim`
/// (or whose thermal state does not fit the ladder) is marked not converged
/// and its numeric values are NaN.
pub fn mechanism_simulation(
    mechanism: Mechanism,
    config: &SystemConfig,
    pulse: &PulseShape,
    temperature_k: f64,
    opts: &BudgetOptions,
) -> Result<MechanismResult> {
    config.validate()?;
    let ideal = ideal_reference(config, pulse, opts)?;
    let unit = config.time_unit();
    let mean_rydberg_time = ideal.mean_rydberg_time * unit;
    let (axis, flags, analytic, run_pulse) = match mechanism {
        Mechanism::Decay => {
            let r = run(
                config,
                pulse,
                &HilbertSpace::internal(),
                ModelFlags::decay_only(),
                0.0,
                opts,
                mechanism.name(),
            )?;
            return Ok(MechanismResult {
                mechanism,
                temperature_k,
                bell_infidelity: r.bell_infidelity(),
                avg_infidelity: r.avg_infidelity(),
                analytic: analytic_decay_infidelity(mean_rydberg_time, config.decay_rate()),
                converged: true,
                probe_change: 0.0,
            });
        }
        Mechanism::Recoil => (
            Axis::Z,
            ModelFlags::recoil_only(),
            analytic_recoil_infidelity(config, mean_rydberg_time, temperature_k),
            recoil_compensated(config, pulse),
        ),
        Mechanism::Vdw => (
            Axis::X,
            ModelFlags::vdw_only(),
            analytic_vdw_infidelity(config, ideal.pair_time * unit, temperature_k),
            pulse.clone(),
        ),
    };
    let at = |n: usize| -> Result<Option<FidelityReport>> {
        let space = HilbertSpace::symmetric(axis, n)?;
        match run(
            config,
            &run_pulse,
            &space,
            flags,
            temperature_k,
            opts,
            mechanism.name(),
        ) {
            Ok(r) => Ok(Some(r)),
            Err(Error::ThermalTail(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let cap = opts.max_fock_dim.max(opts.fock_dim + opts.probe_levels);
    let mut n = opts.fock_dim;
    let mut base = at(n)?;
    let (bell, avg, change, converged) = loop {
        let probe = at(n + opts.probe_levels)?;
        let change = match (&base, &probe) {
            (Some(a), Some(b)) => {
                (b.bell_infidelity() - a.bell_infidelity()).abs()
                    / b.bell_infidelity().abs().max(1e-300)
            }
            _ => f64::INFINITY,
        };
        if change <= opts.convergence {
            let a = base.expect("finite change implies a result");
            break (a.bell_infidelity(), a.avg_infidelity(), change, true);
        }
        n += opts.probe_levels;
        if opts.probe_levels == 0 || n + opts.probe_levels > cap {
            break (f64::NAN, f64::NAN, change, false);
        }
        log::debug!(
            "{} at T = {temperature_k:.2e} K: raising Fock truncation to {n}",
            mechanism.name()
        );
        base = probe;
    };
    if !converged {
        log::warn!(
            "{} at T = {:.2e} K not converged in the Fock truncation (change {:.3})",
            mechanism.name(),
            temperature_k,
            change
        );
    }
    Ok(MechanismResult {
        mechanism,
        temperature_k,
        bell_infidelity: bell,
        avg_infidelity: avg,
        analytic,
        converged,
        probe_change: change,
    })
}

/// All error sources at once on `z` and `x` ladders of both atoms, with the
/// recoil-compensated detuning.
pub fn full_simulation(
    config: &SystemConfig,
    pulse: &PulseShape,
    temperature_k: f64,
    opts: &BudgetOptions,
) -> Result<FidelityReport> {
    config.validate()?;
    let [nz, nx] = opts.full_fock_dim;
    let space = HilbertSpace::build(&[
        MotionalAxis::new(Axis::Z, 0, nz),
        MotionalAxis::new(Axis::Z, 1, nz),
        MotionalAxis::new(Axis::X, 0, nx),
        MotionalAxis::new(Axis::X, 1, nx),
    ])?;
    run(
        config,
        &recoil_compensated(config, pulse),
        &space,
        ModelFlags::ALL,
        temperature_k,
        opts,
        "full",
    )
}

/// One line of the budget table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    /// `decay`, `recoil`, `vdw`, `summed` or `full`.
    pub entry: String,
    pub temperature_k: f64,
    pub bell_infidelity: f64,
    pub avg_infidelity: f64,
    /// Analytic estimate of the Bell infidelity, where one exists.
    pub analytic: Option<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub interaction: f64,
    /// Ideal-model `T_r` and `T_rr` in units of `1/Omega0`.
    pub mean_rydberg_time: f64,
    pub pair_time: f64,
    pub recoil_shift_hz: f64,
    pub rows: Vec<BudgetRow>,
}

impl ErrorBudget {
    pub fn row(&self, entry: &str, temperature_k: f64) -> Option<&BudgetRow> {
        self.rows
            .iter()
            .find(|r| r.entry == entry && (r.temperature_k - temperature_k).abs() <= 1e-15)
    }
}

/// Per-mechanism entries and their sum at every temperature, plus the full
/// simulation at `T = 0` when zero is among the temperatures.
pub fn full_budget(
    config: &SystemConfig,
    pulse: &PulseShape,
    temperatures: &[f64],
    opts: &BudgetOptions,
) -> Result<ErrorBudget> {
    config.validate()?;
    let ideal = ideal_reference(config, pulse, opts)?;
    // decay does not depend on the motional temperature
    let decay = mechanism_simulation(Mechanism::Decay, config, pulse, 0.0, opts)?;
    let mut rows = Vec::new();
    for &t in temperatures {
        let motional: Vec<MechanismResult> = [Mechanism::Recoil, Mechanism::Vdw]
            .par_iter()
            .map(|m| mechanism_simulation(*m, config, pulse, t, opts))
            .collect::<Result<_>>()?;
        let mut entries = vec![MechanismResult {
            temperature_k: t,
            ..decay.clone()
        }];
        entries.extend(motional);
        let mut sum_bell = 0.0;
        let mut sum_avg = 0.0;
        let mut sum_analytic = 0.0;
        for e in &entries {
            sum_bell += e.bell_infidelity;
            sum_avg += e.avg_infidelity;
            sum_analytic += e.analytic;
            rows.push(BudgetRow {
                entry: e.mechanism.name().to_string(),
                temperature_k: t,
                bell_infidelity: e.bell_infidelity,
                avg_infidelity: e.avg_infidelity,
                analytic: Some(e.analytic),
                converged: e.converged,
            });
        }
        rows.push(BudgetRow {
            entry: "summed".to_string(),
            temperature_k: t,
            bell_infidelity: sum_bell,
            avg_infidelity: sum_avg,
            analytic: Some(sum_analytic),
            converged: entries.iter().all(|e| e.converged),
        });
        if t == 0.0 {
            let full = full_simulation(config, pulse, 0.0, opts)?;
            rows.push(BudgetRow {
                entry: "full".to_string(),
                temperature_k: 0.0,
                bell_infidelity: full.bell_infidelity(),
                avg_infidelity: full.avg_infidelity(),
                analytic: None,
                converged: true,
            });
        }
    }
    Ok(ErrorBudget {
        interaction: config.interaction(),
        mean_rydberg_time: ideal.mean_rydberg_time,
        pair_time: ideal.pair_time,
        recoil_shift_hz: super::recoil_phase_shift(config),
        rows,
    })
}

/// One point of a mechanism sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub temperature_k: f64,
    pub numeric: f64,
    pub analytic: f64,
    pub converged: bool,
}

fn sweep_rows(
    mechanism: Mechanism,
    config: &SystemConfig,
    pulse: &PulseShape,
    values: &[f64],
    temperatures: &[f64],
    opts: &BudgetOptions,
    apply: impl Fn(&mut SystemConfig, f64) + Sync,
) -> Result<Vec<SweepRow>> {
    let points: Vec<(f64, f64)> = temperatures
        .iter()
        .flat_map(|&t| values.iter().map(move |&v| (v, t)))
        .collect();
    points
        .par_iter()
        .map(|&(v, t)| {
            let mut c = config.clone();
            apply(&mut c, v);
            let r = mechanism_simulation(mechanism, &c, pulse, t, opts)?;
            Ok(SweepRow {
                value: v,
                temperature_k: t,
                numeric: r.bell_infidelity,
                analytic: r.analytic,
                converged: r.converged,
            })
        })
        .collect()
}

/// Decay infidelity against the decay rate `gamma` (1/s).
pub fn decay_sweep(
    config: &SystemConfig,
    pulse: &PulseShape,
    gammas: &[f64],
    opts: &BudgetOptions,
) -> Result<Vec<SweepRow>> {
    if gammas.iter().any(|g| *g < 0.0) {
        return Err(Error::InvalidParameter(
            "decay rates must be non-negative".into(),
        ));
    }
    sweep_rows(
        Mechanism::Decay,
        config,
        pulse,
        gammas,
        &[0.0],
        opts,
        |c, g| {
            c.lifetime_s = if g > 0.0 { 1.0 / g } else { f64::INFINITY };
        },
    )
}

/// Recoil infidelity against `omega_z / 2 pi` (Hz) at each temperature.
pub fn recoil_sweep(
    config: &SystemConfig,
    pulse: &PulseShape,
    trap_z_hz: &[f64],
    temperatures: &[f64],
    opts: &BudgetOptions,
) -> Result<Vec<SweepRow>> {
    sweep_rows(
        Mechanism::Recoil,
        config,
        pulse,
        trap_z_hz,
        temperatures,
        opts,
        |c, f| {
            c.trap_frequency_hz[2] = f;
        },
    )
}

/// Interaction-force infidelity against `omega_x / 2 pi` (Hz).
pub fn vdw_sweep(
    config: &SystemConfig,
    pulse: &PulseShape,
    trap_x_hz: &[f64],
    temperatures: &[f64],
    opts: &BudgetOptions,
) -> Result<Vec<SweepRow>> {
    sweep_rows(
        Mechanism::Vdw,
        config,
        pulse,
        trap_x_hz,
        temperatures,
        opts,
        |c, f| {
            c.trap_frequency_hz[0] = f;
        },
    )
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.6e}")
    }
}

/// Budget table: one line per entry and temperature.
pub fn write_budget_csv<W: Write>(mut w: W, budget: &ErrorBudget) -> std::io::Result<()> {
    writeln!(
        w,
        "entry,temperature_K,bell_infidelity,avg_infidelity,analytic,converged"
    )?;
    for r in &budget.rows {
        writeln!(
            w,
            "{},{:.3e},{},{},{},{}",
            r.entry,
            r.temperature_k,
            fmt(r.bell_infidelity),
            fmt(r.avg_infidelity),
            r.analytic.map(fmt).unwrap_or_default(),
            r.converged
        )?;
    }
    Ok(())
}

/// Sweep table; non-converged points keep their row with empty numeric value.
pub fn write_sweep_csv<W: Write>(
    mut w: W,
    value_name: &str,
    rows: &[SweepRow],
) -> std::io::Result<()> {
    writeln!(
        w,
        "{value_name},temperature_K,numeric_infidelity,analytic_infidelity,converged"
    )?;
    for r in rows {
        writeln!(
            w,
            "{:.6e},{:.3e},{},{},{}",
            r.value,
            r.temperature_k,
            fmt(r.numeric),
            fmt(r.analytic),
            r.converged
        )?;
    }
    Ok(())
}
