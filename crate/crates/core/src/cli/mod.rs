//! The `rydcz` command line: configuration-driven simulate, optimize, sweep
//! and budget runs writing CSV (and JSON) tables.

pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::Parser;

use crate::budget::{decay_sweep, full_budget, recoil_sweep, vdw_sweep, Mechanism};
use crate::error::{Error, Result};
use crate::metrics::{gate_fidelities, simulate_gate, GateResult, Thermal};
use crate::optimizer::{dcrab_optimize, direct_search, gate_error, sweep};
use crate::quantum::{Axis, HilbertSpace, MotionalAxis};
use config::{param_key, pulse_section, ExperimentConfig, Mode, System};
use output::{budget_table, emit_figure_data, write_tables, Cell, FigureData, Table};

#[derive(Debug, Parser)]
#[command(
    name = "rydcz",
    version,
    about = "Rydberg controlled-phase gate simulation, optimization and error budgets"
)]
pub struct Args {
    /// What to run; must agree with `mode` in the file when that is set.
    #[arg(value_enum)]
    pub mode: Mode,
    #[arg(long)]
    pub config: PathBuf,
    /// `section.key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a JSON file next to every CSV.
    #[arg(long)]
    pub json: bool,
}

/// Exit status of a failed run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::StepUnderflow { .. }
        | Error::UndefinedPhase { .. }
        | Error::ThermalTail(_)
        | Error::FockNotConverged(_) => 2,
        Error::Infeasible { .. } => 3,
        _ => 1,
    }
}

/// What a successful run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Non-zero when results were written but flag a problem: 2 for
    /// unconverged budget entries, 3 for an infeasible optimization.
    pub status: i32,
}

/// Resolves the configuration of `args`, applying the command-line values.
pub fn resolve(args: &Args) -> Result<ExperimentConfig> {
    let mut overrides = args.overrides.clone();
    if let Some(s) = args.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(o) = &args.out {
        overrides.push(format!(
            "output.dir={}",
            toml::Value::String(o.display().to_string())
        ));
    }
    if args.json {
        overrides.push("output.json=true".into());
    }
    let mut cfg = ExperimentConfig::from_file(&args.config, &overrides)?;
    match cfg.mode {
        Some(m) if m != args.mode => {
            return Err(Error::Config(format!(
                "command asks for {} but the file sets mode = {}",
                args.mode.name(),
                m.name()
            )))
        }
        _ => cfg.mode = Some(args.mode),
    }
    cfg.resolved()
}

/// Runs a resolved configuration and writes its tables.
pub fn run(cfg: &ExperimentConfig, timestamp: u64) -> Result<RunOutcome> {
    let mode = cfg
        .mode
        .ok_or_else(|| Error::Config("mode is not set".into()))?;
    let (tables, status) = match mode {
        Mode::Simulate => (simulate(cfg)?, 0),
        Mode::Optimize => optimize(cfg)?,
        Mode::Sweep => run_sweep(cfg)?,
        Mode::Budget => budget(cfg)?,
    };
    let dir = PathBuf::from(cfg.output.dir.clone().unwrap_or_else(|| ".".into()));
    let files = write_tables(
        &dir,
        &tables,
        &cfg.to_toml(),
        timestamp,
        cfg.output.json.unwrap_or(false),
    )?;
    Ok(RunOutcome { files, status })
}

fn figure_table(cfg: &ExperimentConfig, data: FigureData<'_>) -> Result<Option<Table>> {
    cfg.output
        .figure
        .map(|f| emit_figure_data(&data, f))
        .transpose()
}

fn gate_table(g: &GateResult) -> Table {
    let mut t = Table::new(
        "gate",
        &[
            "input",
            "amplitude_re",
            "amplitude_im",
            "phase_rad",
            "rydberg_time_Omega0",
            "leakage",
            "surviving_norm",
        ],
    );
    let phases = [0.0, g.phi_01, g.phi_10, g.phi_11];
    for (k, label) in ["00", "01", "10", "11"].iter().enumerate() {
        t.push(vec![
            (*label).into(),
            g.amplitudes[k][0].into(),
            g.amplitudes[k][1].into(),
            phases[k].into(),
            g.rydberg_time[k].into(),
            g.leakage[k].into(),
            g.surviving_norm[k].into(),
        ]);
    }
    t
}

fn gate_summary(g: &GateResult) -> Vec<(&'static str, Cell)> {
    vec![
        ("gate_error", gate_error(g).into()),
        (
            "phase_condition_error_rad",
            g.phase_condition_error().into(),
        ),
        ("max_leakage", g.max_leakage().into()),
        ("mean_rydberg_time_Omega0", g.mean_rydberg_time.into()),
        ("pair_time_Omega0", g.pair_time.into()),
    ]
}

fn row_table(name: &str, cells: Vec<(&str, Cell)>) -> Table {
    let cols: Vec<&str> = cells.iter().map(|c| c.0).collect();
    let mut t = Table::new(name, &cols);
    t.push(cells.into_iter().map(|c| c.1).collect());
    t
}

fn simulate(cfg: &ExperimentConfig) -> Result<Vec<Table>> {
    let pulse = cfg.pulse()?;
    let opts = cfg.integrator_options()?;
    let (flags, [nz, nx]) = cfg.model()?;
    let system = cfg.system()?;
    let mut axes = Vec::new();
    if flags.recoil || flags.trap {
        axes.extend([
            MotionalAxis::new(Axis::Z, 0, nz),
            MotionalAxis::new(Axis::Z, 1, nz),
        ]);
    }
    if flags.vdw_position_dependence {
        axes.extend([
            MotionalAxis::new(Axis::X, 0, nx),
            MotionalAxis::new(Axis::X, 1, nx),
        ]);
    }
    let space = HilbertSpace::build(&axes)?;
    let couplings = match &system {
        System::Physical(c) => c.couplings(),
        System::Dimensionless { interaction } => crate::quantum::Couplings::ideal(*interaction),
    };
    let g = simulate_gate(&space, &couplings, &pulse, flags, &opts)?;
    let mut tables = vec![gate_table(&g)];
    let mut summary = gate_summary(&g);
    let temperature = match &system {
        System::Physical(c) => c.temperature_k,
        System::Dimensionless { .. } => 0.0,
    };
    let thermal = match &system {
        System::Physical(c) => {
            let q = c.boltzmann_ratio(temperature);
            Thermal {
                temperature,
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
        System::Dimensionless { .. } => Thermal::ground(&space),
    };
    let f = gate_fidelities(
        &space, &couplings, &pulse, flags, &thermal, &opts, "simulate",
    )?;
    summary.push(("temperature_uK", (temperature * 1e6).into()));
    summary.push(("bell_infidelity", f.bell_infidelity().into()));
    summary.push(("avg_infidelity", f.avg_infidelity().into()));
    tables.push(row_table("summary", summary));
    Ok(tables)
}

fn pulse_table(name: &str, pulse: &crate::pulses::PulseShape) -> Table {
    let s = pulse_section(pulse);
    let value = toml::Value::try_from(&s).expect("pulse section");
    let table = value.as_table().expect("table");
    let mut cols = Vec::new();
    let mut cells = Vec::new();
    for (k, v) in table {
        cols.push(k.clone());
        cells.push(match v {
            toml::Value::Float(x) => Cell::Num(*x),
            toml::Value::Integer(i) => Cell::Int(*i),
            toml::Value::String(s) => Cell::Text(s.clone()),
            other => Cell::Text(other.to_string()),
        });
    }
    let mut t = Table {
        name: name.to_string(),
        columns: cols,
        rows: Vec::new(),
    };
    t.push(cells);
    t
}

fn optimize(cfg: &ExperimentConfig) -> Result<(Vec<Table>, i32)> {
    let problem = cfg.problem()?;
    let mut result = direct_search(&problem)?;
    let mut tables = Vec::new();
    if let Some(opts) = cfg.dcrab_options()? {
        let outcome = dcrab_optimize(&result, &problem, &opts)?;
        let mut t = Table::new(
            "dcrab",
            &[
                "super_iteration",
                "frequencies_Omega0_over_2pi",
                "tau_Omega0",
                "gate_error",
                "accepted",
            ],
        );
        for s in &outcome.trace {
            let f: Vec<String> = s.frequencies.iter().map(|x| x.to_string()).collect();
            t.push(vec![
                s.index.into(),
                f.join(" ").into(),
                s.tau.into(),
                s.gate_error.into(),
                s.accepted.into(),
            ]);
        }
        tables.push(t);
        result = outcome.result;
    }
    let mut summary = vec![
        ("family", Cell::from(result.pulse.kind().name())),
        ("objective", format!("{:?}", problem.objective).into()),
        ("feasible", result.feasible.into()),
        ("evaluations", result.evaluations.into()),
        ("tau_Omega0", result.tau().into()),
        ("rydberg_time_01_Omega0", result.gate.rydberg_time[1].into()),
        ("rydberg_time_10_Omega0", result.gate.rydberg_time[2].into()),
        ("rydberg_time_11_Omega0", result.gate.rydberg_time[3].into()),
    ];
    summary.extend(gate_summary(&result.gate));
    tables.push(row_table("optimize", summary));
    tables.push(pulse_table("pulse", &result.pulse));
    let mut trace = Table::new(
        "trace",
        &["evaluation", "tau_Omega0", "gate_error", "best_tau_Omega0"],
    );
    for p in &result.trace {
        trace.push(vec![
            p.evaluation.into(),
            p.tau.into(),
            p.gate_error.into(),
            p.best_tau.into(),
        ]);
    }
    tables.push(trace);
    let free: Vec<String> = problem.free.iter().map(|b| param_key(b.param)).collect();
    log::info!(
        "optimized {} over {}",
        result.pulse.kind().name(),
        free.join(", ")
    );
    let status = if result.feasible { 0 } else { 3 };
    Ok((tables, status))
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<(Vec<Table>, i32)> {
    let problem = cfg.problem()?;
    let (variable, values) = cfg.sweep_spec()?;
    let points = sweep(&problem, variable, &values)?;
    let mut t = Table::new(
        "sweep",
        &[
            variable_key(variable),
            "feasible",
            "gate_error",
            "tau_Omega0",
            "delta0_over_Omega0",
            "rydberg_time_01_Omega0",
            "rydberg_time_10_Omega0",
            "rydberg_time_11_Omega0",
            "mean_rydberg_time_Omega0",
            "pair_time_Omega0",
            "message",
        ],
    );
    for p in &points {
        let r = p.result.as_ref();
        t.push(vec![
            p.value.into(),
            p.feasible.into(),
            r.map(|r| r.gate_error).into(),
            r.map(|r| r.tau()).into(),
            r.map(|r| r.pulse.delta0).into(),
            r.map(|r| r.gate.rydberg_time[1]).into(),
            r.map(|r| r.gate.rydberg_time[2]).into(),
            r.map(|r| r.gate.rydberg_time[3]).into(),
            r.map(|r| r.gate.mean_rydberg_time).into(),
            r.map(|r| r.gate.pair_time).into(),
            p.message.clone().map_or(Cell::Empty, Cell::Text),
        ]);
    }
    let mut tables = vec![t];
    tables.extend(figure_table(
        cfg,
        FigureData::Sweep {
            variable,
            points: &points,
        },
    )?);
    Ok((tables, 0))
}

fn variable_key(v: crate::optimizer::SweepVariable) -> &'static str {
    use crate::optimizer::SweepVariable::*;
    match v {
        Width => "width_Omega0",
        Kappa => "kappa_Omega0",
        Interaction => "V_over_Omega0",
    }
}

fn budget(cfg: &ExperimentConfig) -> Result<(Vec<Table>, i32)> {
    let system = cfg.system()?;
    let config = system.physical("budget mode")?;
    let pulse = cfg.pulse()?;
    let opts = cfg.budget_options()?;
    let temperatures = cfg.temperatures()?;
    if let Some((mechanism, grid)) = cfg.scan()? {
        let rows = match mechanism {
            Mechanism::Decay => decay_sweep(config, &pulse, &grid, &opts)?,
            Mechanism::Recoil => recoil_sweep(config, &pulse, &grid, &temperatures, &opts)?,
            Mechanism::Vdw => vdw_sweep(config, &pulse, &grid, &temperatures, &opts)?,
        };
        let unit = match mechanism {
            Mechanism::Decay => "decay_rate_per_s",
            Mechanism::Recoil => "trap_z_over_2pi_Hz",
            Mechanism::Vdw => "trap_x_over_2pi_Hz",
        };
        let mut t = Table::new(
            &format!("scan_{}", mechanism.name()),
            &[
                unit,
                "temperature_uK",
                "numeric_infidelity",
                "analytic_infidelity",
                "converged",
            ],
        );
        for r in &rows {
            t.push(vec![
                r.value.into(),
                (r.temperature_k * 1e6).into(),
                r.numeric.into(),
                r.analytic.into(),
                r.converged.into(),
            ]);
        }
        let mut tables = vec![t];
        tables.extend(figure_table(
            cfg,
            FigureData::Scan {
                mechanism,
                rows: &rows,
            },
        )?);
        return Ok((tables, 0));
    }
    let b = full_budget(config, &pulse, &temperatures, &opts)?;
    let mut tables = vec![budget_table(&b)?];
    tables.push(row_table(
        "budget_inputs",
        vec![
            ("V_over_Omega0", b.interaction.into()),
            ("mean_rydberg_time_Omega0", b.mean_rydberg_time.into()),
            ("pair_time_Omega0", b.pair_time.into()),
            (
                "mean_rydberg_time_ns",
                (b.mean_rydberg_time * config.time_unit() * 1e9).into(),
            ),
            ("recoil_shift_Hz", b.recoil_shift_hz.into()),
        ],
    ));
    tables.extend(figure_table(cfg, FigureData::Budget(&b))?);
    let status = if b.rows.iter().all(|r| r.converged) {
        0
    } else {
        2
    };
    Ok((tables, status))
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let outcome = resolve(&args).and_then(|cfg| run(&cfg, timestamp));
    match outcome {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            match o.status {
                2 => eprintln!("rydcz: some results did not converge (flagged in the output)"),
                3 => eprintln!("rydcz: no feasible pulse found; best-found result written"),
                _ => {}
            }
            o.status
        }
        Err(e) => {
            eprintln!("rydcz: {e}");
            exit_code(&e)
        }
    }
}
