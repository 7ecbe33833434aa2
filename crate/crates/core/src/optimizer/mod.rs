//! Pulse-parameter optimization on the idealized two-atom model.
//!
//! The gate error minimized everywhere is the Bell infidelity of the
//! three-level model without decay plus the largest leakage out of the
//! computational subspace. A pulse is feasible when this error is below the
//! problem threshold.

pub mod dcrab;
pub mod nelder_mead;
pub mod sweep;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{bell_infidelity_from_amplitudes, ideal_gate, GateResult};
use crate::pulses::{Family, FamilyKind, PulseShape};
use crate::quantum::IntegratorOptions;

pub use dcrab::{dcrab_optimize, DcrabOptions, DcrabOutcome, SuperIteration};
pub use nelder_mead::{NelderMeadOptions, NelderMeadResult};
pub use sweep::{sweep, SweepPoint, SweepVariable};

/// Default gate-error threshold for feasibility.
pub const DEFAULT_THRESHOLD: f64 = 1e-6;

/// Default resolution of the duration bisection.
pub const DEFAULT_TAU_RESOLUTION: f64 = 1e-3;

/// Target of the final polish. Drives the phase condition well below
/// `1e-5` rad, which a `1e-6` gate error alone does not guarantee.
pub const POLISH_TARGET: f64 = 1e-12;

/// Largest accepted violation of the controlled-phase condition, in rad.
pub const PHASE_TOLERANCE: f64 = 1e-5;

/// Output grid used while searching; reported results use the full grid.
const SEARCH_GRID: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Shortest feasible duration; ties go to the smaller mean Rydberg time.
    MinDurationFeasible,
    MinBellInfidelity,
    /// Smallest mean Rydberg time among feasible pulses.
    MinRydbergTime,
}

/// A scalar pulse parameter that can be optimized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Tau,
    Delta0,
    Theta,
    Height,
    Base,
    /// Gaussian amplitude (also the Gaussian seed of a dCRAB pulse).
    Amplitude,
    Width,
    Kappa,
    /// Amplitude of the `i`-th dCRAB cosine.
    Coefficient(usize),
}

impl Param {
    pub fn get(self, p: &PulseShape) -> Option<f64> {
        match (self, &p.family) {
            (Param::Tau, _) => Some(p.tau),
            (Param::Delta0, _) => Some(p.delta0),
            (Param::Theta, Family::DeltaJump { theta }) => Some(*theta),
            (Param::Height, Family::Triangle { height, .. }) => Some(*height),
            (Param::Base, Family::Triangle { base, .. }) => Some(*base),
            (Param::Amplitude, Family::Gaussian { amplitude, .. })
            | (Param::Amplitude, Family::GaussianRamped { amplitude, .. }) => Some(*amplitude),
            (Param::Width, Family::Gaussian { width, .. })
            | (Param::Width, Family::GaussianRamped { width, .. }) => Some(*width),
            (Param::Amplitude, Family::Dcrab { seed: Some(s), .. }) => Some(s[0]),
            (Param::Width, Family::Dcrab { seed: Some(s), .. }) => Some(s[1]),
            (Param::Kappa, Family::GaussianRamped { kappa, .. }) => Some(*kappa),
            (Param::Kappa, Family::Dcrab { kappa, .. }) => *kappa,
            (Param::Coefficient(i), Family::Dcrab { basis, .. }) => {
                basis.amplitudes.get(i).copied()
            }
            _ => None,
        }
    }

    pub fn set(self, p: &mut PulseShape, v: f64) -> Result<()> {
        let family = p.kind().name();
        let missing =
            || Error::InvalidParameter(format!("{self:?} is not a parameter of {family}"));
        match (self, &mut p.family) {
            (Param::Tau, _) => p.tau = v,
            (Param::Delta0, _) => p.delta0 = v,
            (Param::Theta, Family::DeltaJump { theta }) => *theta = v,
            (Param::Height, Family::Triangle { height, .. }) => *height = v,
            (Param::Base, Family::Triangle { base, .. }) => *base = v,
            (Param::Amplitude, Family::Gaussian { amplitude, .. })
            | (Param::Amplitude, Family::GaussianRamped { amplitude, .. }) => *amplitude = v,
            (Param::Width, Family::Gaussian { width, .. })
            | (Param::Width, Family::GaussianRamped { width, .. }) => *width = v,
            (Param::Amplitude, Family::Dcrab { seed: Some(s), .. }) => s[0] = v,
            (Param::Width, Family::Dcrab { seed: Some(s), .. }) => s[1] = v,
            (Param::Kappa, Family::GaussianRamped { kappa, .. }) => *kappa = v,
            (Param::Kappa, Family::Dcrab { kappa, .. }) => *kappa = Some(v),
            (Param::Coefficient(i), Family::Dcrab { basis, .. }) => {
                let slot = basis.amplitudes.get_mut(i).ok_or_else(missing)?;
                *slot = v;
            }
            _ => return Err(missing()),
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub param: Param,
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub fn new(param: Param, lower: f64, upper: f64) -> Self {
        Self {
            param,
            lower,
            upper,
        }
    }
}

/// Default search box of a parameter.
pub fn default_bound(param: Param) -> Bound {
    use std::f64::consts::PI;
    let (lo, hi) = match param {
        Param::Tau => (1.0, 20.0),
        Param::Delta0 => (-3.0, 3.0),
        Param::Theta => (0.0, 2.0 * PI),
        Param::Height => (-10.0, 10.0),
        Param::Base => (0.1, 20.0),
        Param::Amplitude => (-10.0, 10.0),
        Param::Width => (0.05, 10.0),
        Param::Kappa => (0.01, 2.0),
        Param::Coefficient(_) => (-3.0, 3.0),
    };
    Bound::new(param, lo, hi)
}

/// Free parameters of a family with the default boxes, duration first.
/// `kappa` of the ramped Gaussian is held fixed.
pub fn default_free(pulse: &PulseShape) -> Vec<Bound> {
    let mut params = vec![Param::Tau, Param::Delta0];
    match &pulse.family {
        Family::DeltaJump { .. } => params.push(Param::Theta),
        Family::Triangle { .. } => params.extend([Param::Height, Param::Base]),
        Family::Gaussian { .. } | Family::GaussianRamped { .. } => {
            params.extend([Param::Amplitude, Param::Width])
        }
        Family::Dcrab { basis, seed, .. } => {
            if seed.is_some() {
                params.extend([Param::Amplitude, Param::Width]);
            }
            params.extend((0..basis.len()).map(Param::Coefficient));
        }
    }
    params.into_iter().map(default_bound).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationProblem {
    pub objective: Objective,
    /// Starting point; parameters not listed in `free` stay at its values.
    pub template: PulseShape,
    pub free: Vec<Bound>,
    /// `V / hbar Omega0`.
    pub interaction: f64,
    pub threshold: f64,
    pub tau_resolution: f64,
    /// Randomized restarts per inner minimization.
    pub restarts: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_evals: usize,
}

impl OptimizationProblem {
    pub fn new(objective: Objective, template: PulseShape, interaction: f64) -> Self {
        let free = default_free(&template);
        Self {
            objective,
            template,
            free,
            interaction,
            threshold: DEFAULT_THRESHOLD,
            tau_resolution: DEFAULT_TAU_RESOLUTION,
            restarts: 5,
            seed: 0,
            tolerance: 1e-10,
            max_evals: 3000,
        }
    }

    /// Removes `param` from the free set, keeping the template value.
    pub fn fix(mut self, param: Param) -> Self {
        self.free.retain(|b| b.param != param);
        self
    }

    pub fn family(&self) -> FamilyKind {
        self.template.kind()
    }

    fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold {}",
                self.threshold
            )));
        }
        if !(self.tau_resolution > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau resolution {}",
                self.tau_resolution
            )));
        }
        if !(self.interaction > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "interaction {}",
                self.interaction
            )));
        }
        for b in &self.free {
            if b.param.get(&self.template).is_none() {
                return Err(Error::InvalidParameter(format!(
                    "{:?} is not a parameter of {}",
                    b.param,
                    self.family().name()
                )));
            }
            if !(b.lower < b.upper) {
                return Err(Error::InvalidParameter(format!(
                    "empty box for {:?}",
                    b.param
                )));
            }
        }
        Ok(())
    }
}

/// One evaluation recorded in the convergence trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluation: usize,
    pub tau: f64,
    pub gate_error: f64,
    /// Best feasible duration so far (infinite before the first one).
    pub best_tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub pulse: PulseShape,
    pub gate: GateResult,
    /// Bell infidelity plus the largest leakage.
    pub gate_error: f64,
    pub feasible: bool,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
}

impl OptimizationResult {
    pub fn tau(&self) -> f64 {
        self.pulse.tau
    }
}

/// Bell infidelity plus largest leakage of `gate`.
pub fn gate_error(gate: &GateResult) -> f64 {
    let amp = std::array::from_fn(|k| gate.amplitude(k));
    bell_infidelity_from_amplitudes(&amp).max(0.0) + gate.max_leakage()
}

/// Quantity minimized by the search: the gate error plus a penalty that
/// reaches `threshold` when the phase condition is off by
/// `PHASE_TOLERANCE`. Below `threshold` a pulse is feasible.
pub fn search_objective(gate: &GateResult, threshold: f64) -> f64 {
    let phase = gate.phase_condition_error() / PHASE_TOLERANCE;
    gate_error(gate) + threshold * phase * phase
}

/// Writes the convergence trace as CSV.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &[TracePoint]) -> std::io::Result<()> {
    writeln!(w, "evaluation,tau,gate_error,best_tau")?;
    for p in trace {
        writeln!(
            w,
            "{},{:.10},{:.6e},{:.10}",
            p.evaluation, p.tau, p.gate_error, p.best_tau
        )?;
    }
    Ok(())
}

/// Evaluation context shared by the search routines.
struct Search<'a> {
    problem: &'a OptimizationProblem,
    search_opts: IntegratorOptions,
    evaluations: usize,
    trace: Vec<TracePoint>,
    best_tau: f64,
    /// Score with an unweighted phase term, for ranking far from solutions.
    coarse: bool,
}

/// A local solution tracked across durations.
#[derive(Clone, Debug)]
struct Incumbent {
    x: Vec<f64>,
    error: f64,
}

impl<'a> Search<'a> {
    fn new(problem: &'a OptimizationProblem) -> Self {
        Self {
            problem,
            search_opts: IntegratorOptions {
                tolerance: problem.tolerance,
                grid_intervals: SEARCH_GRID,
                ..Default::default()
            },
            evaluations: 0,
            trace: Vec::new(),
            best_tau: f64::INFINITY,
            coarse: false,
        }
    }

    fn pulse(&self, bounds: &[Bound], x: &[f64], tau: Option<f64>) -> PulseShape {
        let mut p = self.problem.template.clone();
        for (b, v) in bounds.iter().zip(x) {
            b.param.set(&mut p, *v).expect("validated parameter");
        }
        if let Some(t) = tau {
            p.tau = t;
        }
        p
    }

    fn gate(&mut self, pulse: &PulseShape) -> Option<GateResult> {
        self.evaluations += 1;
        ideal_gate(self.problem.interaction, pulse, &self.search_opts).ok()
    }

    /// Search objective of a pulse; unusable pulses score infinity.
    fn error(&mut self, pulse: &PulseShape) -> f64 {
        let threshold = self.problem.threshold;
        let coarse = self.coarse;
        let e = self.gate(pulse).map_or(f64::INFINITY, |g| {
            if coarse {
                gate_error(&g) + g.phase_condition_error().powi(2)
            } else {
                search_objective(&g, threshold)
            }
        });
        if !coarse && e < self.problem.threshold {
            self.best_tau = self.best_tau.min(pulse.tau);
        }
        if !coarse && (self.evaluations.is_multiple_of(10) || e < self.problem.threshold) {
            self.trace.push(TracePoint {
                evaluation: self.evaluations,
                tau: pulse.tau,
                gate_error: e,
                best_tau: self.best_tau,
            });
        }
        e
    }

    fn mean_rydberg_time(&mut self, bounds: &[Bound], x: &[f64], tau: Option<f64>) -> f64 {
        let p = self.pulse(bounds, x, tau);
        self.gate(&p).map_or(f64::INFINITY, |g| g.mean_rydberg_time)
    }

    fn nm_opts(&self, target: f64, max_evals: usize) -> NelderMeadOptions {
        NelderMeadOptions {
            max_evals,
            xatol: 1e-10,
            fatol: 1e-16,
            target,
        }
    }

    /// One simplex run from `x0`.
    fn local(
        &mut self,
        bounds: &[Bound],
        x0: &[f64],
        tau: Option<f64>,
        target: f64,
        max_evals: usize,
        step: f64,
    ) -> Incumbent {
        let lower: Vec<f64> = bounds.iter().map(|b| b.lower).collect();
        let upper: Vec<f64> = bounds.iter().map(|b| b.upper).collect();
        let steps: Vec<f64> = bounds.iter().map(|b| step * (b.upper - b.lower)).collect();
        let opts = self.nm_opts(target, max_evals);
        let r = nelder_mead::minimize(
            |x| {
                let p = self.pulse(bounds, x, tau);
                self.error(&p)
            },
            x0,
            &steps,
            &lower,
            &upper,
            &opts,
        );
        Incumbent { x: r.x, error: r.f }
    }

    /// Simplex runs from `x0` and then from random perturbations of the
    /// incumbent, stopping once `target` is reached.
    fn minimize(
        &mut self,
        bounds: &[Bound],
        x0: &[f64],
        tau: Option<f64>,
        target: f64,
        rng: &mut ChaCha8Rng,
    ) -> Incumbent {
        let max_evals = self.problem.max_evals;
        let mut best = self.local(bounds, x0, tau, target, max_evals, 0.02);
        log::debug!("start: error {:.3e} at {:?}", best.error, best.x);
        for attempt in 1..=self.problem.restarts {
            if best.error <= target {
                break;
            }
            let start: Vec<f64> = best
                .x
                .iter()
                .zip(bounds)
                .map(|(v, b)| {
                    let scale = 0.01 * attempt as f64 * (b.upper - b.lower);
                    (v + scale * (2.0 * rng.gen::<f64>() - 1.0)).clamp(b.lower, b.upper)
                })
                .collect();
            let r = self.local(
                bounds,
                &start,
                tau,
                target,
                max_evals.min(RESTART_EVALS),
                0.02,
            );
            log::debug!("restart {attempt}: error {:.3e} at {:?}", r.error, r.x);
            if r.error < best.error {
                best = r;
            }
        }
        best
    }

    /// Distinct local solutions at fixed `tau`, found from a coarse grid
    /// over the shape parameters; best first by the coarse score.
    fn scan(&mut self, bounds: &[Bound], tau: f64, keep: usize) -> Vec<Incumbent> {
        let per_axis: usize = match bounds.len() {
            0 => return Vec::new(),
            1 | 2 => 15,
            3 => 9,
            4 => 5,
            _ => return Vec::new(),
        };
        let axes: Vec<Vec<f64>> = bounds
            .iter()
            .map(|b| {
                let (lo, hi) = scan_range(b, tau);
                (0..per_axis)
                    .map(|k| lo + (hi - lo) * k as f64 / (per_axis - 1) as f64)
                    .collect()
            })
            .collect();
        let total = per_axis.pow(bounds.len() as u32);
        self.coarse = true;
        let mut scored: Vec<(f64, Vec<f64>)> = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rest = idx;
            let x: Vec<f64> = axes
                .iter()
                .map(|a| {
                    let v = a[rest % per_axis];
                    rest /= per_axis;
                    v
                })
                .collect();
            let p = self.pulse(bounds, &x, Some(tau));
            scored.push((self.error(&p), x));
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut found: Vec<Incumbent> = Vec::new();
        for (_, x) in scored.into_iter().take(SCAN_STARTS) {
            let r = self.local(bounds, &x, Some(tau), 1e-9, SCAN_EVALS, 0.01);
            log::debug!("scan start {:?}: error {:.3e} at {:?}", x, r.error, r.x);
            let duplicate = found.iter().any(|f| distance(bounds, &f.x, &r.x) < 0.02);
            if !duplicate {
                found.push(r);
            }
        }
        self.coarse = false;
        found.sort_by(|a, b| a.error.total_cmp(&b.error));
        found.truncate(keep);
        found
    }

    /// Coarse-score simplex run from `x0`, used to get near a solution
    /// before the phase penalty makes the landscape stiff.
    fn approach(&mut self, bounds: &[Bound], x0: &[f64], tau: Option<f64>) -> Vec<f64> {
        self.coarse = true;
        let r = self.local(
            bounds,
            x0,
            tau,
            1e-10,
            self.problem.max_evals.min(SCAN_EVALS),
            0.01,
        );
        self.coarse = false;
        log::debug!("approach: coarse score {:.3e} at {:?}", r.error, r.x);
        r.x
    }

    /// Follows a local solution to `tau`: a short simplex run from `x`, then
    /// random restarts around it if that is not feasible.
    fn track(&mut self, bounds: &[Bound], x: &[f64], tau: f64, rng: &mut ChaCha8Rng) -> Incumbent {
        let threshold = self.problem.threshold;
        let target = 0.1 * threshold;
        let max_evals = self.problem.max_evals.min(TRACK_EVALS);
        let mut best = self.local(bounds, x, Some(tau), target, max_evals, 0.005);
        for attempt in 1..=self.problem.restarts {
            if best.error < threshold {
                break;
            }
            let start: Vec<f64> = best
                .x
                .iter()
                .zip(bounds)
                .map(|(v, b)| {
                    let scale = 0.02 * attempt as f64 * (b.upper - b.lower);
                    (v + scale * (2.0 * rng.gen::<f64>() - 1.0)).clamp(b.lower, b.upper)
                })
                .collect();
            let r = self.local(
                bounds,
                &start,
                Some(tau),
                target,
                max_evals.min(RESTART_EVALS),
                0.005,
            );
            if r.error < best.error {
                best = r;
            }
        }
        best
    }

    fn finish(&mut self, pulse: PulseShape) -> Result<OptimizationResult> {
        let gate = ideal_gate(
            self.problem.interaction,
            &pulse,
            &IntegratorOptions::with_tolerance(self.problem.tolerance),
        )?;
        let e = gate_error(&gate);
        Ok(OptimizationResult {
            pulse,
            feasible: search_objective(&gate, self.problem.threshold) < self.problem.threshold,
            gate_error: e,
            gate,
            evaluations: self.evaluations,
            trace: std::mem::take(&mut self.trace),
        })
    }
}

const SCAN_STARTS: usize = 8;
const RESTART_EVALS: usize = 600;
const TRACK_EVALS: usize = 1000;
const SCAN_EVALS: usize = 600;
const MAX_INCUMBENTS: usize = 3;

/// Range of the coarse initial scan, narrower than the search box.
fn scan_range(b: &Bound, tau: f64) -> (f64, f64) {
    use std::f64::consts::PI;
    let (lo, hi) = match b.param {
        Param::Delta0 => (-2.0, 2.0),
        Param::Theta => (0.0, 2.0 * PI),
        Param::Height | Param::Amplitude => (-6.0, 6.0),
        Param::Width => (0.3, 3.0),
        Param::Base => (0.5, tau),
        Param::Coefficient(_) => (-1.0, 1.0),
        Param::Kappa => (0.05, 1.0),
        Param::Tau => (b.lower, b.upper),
    };
    (lo.max(b.lower), hi.min(b.upper))
}

/// Max-norm distance in units of the search box.
fn distance(bounds: &[Bound], a: &[f64], b: &[f64]) -> f64 {
    bounds
        .iter()
        .zip(a.iter().zip(b))
        .map(|(bd, (x, y))| (x - y).abs() / (bd.upper - bd.lower))
        .fold(0.0, f64::max)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs the optimization described by `problem`. A problem without any
/// feasible point returns the best pulse found with `feasible == false`.
pub fn direct_search(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    problem.validate()?;
    match problem.objective {
        Objective::MinDurationFeasible => min_duration(problem).map(|(r, _)| r),
        Objective::MinBellInfidelity => min_error(problem),
        Objective::MinRydbergTime => min_rydberg_time(problem),
    }
}

fn split_tau(problem: &OptimizationProblem) -> (Option<Bound>, Vec<Bound>) {
    let tau = problem.free.iter().copied().find(|b| b.param == Param::Tau);
    let rest = problem
        .free
        .iter()
        .copied()
        .filter(|b| b.param != Param::Tau)
        .collect();
    (tau, rest)
}

fn start_of(pulse: &PulseShape, bounds: &[Bound]) -> Vec<f64> {
    bounds
        .iter()
        .map(|b| {
            b.param
                .get(pulse)
                .expect("validated")
                .clamp(b.lower, b.upper)
        })
        .collect()
}

fn min_error(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    let mut search = Search::new(problem);
    let mut rng = rng_for(problem.seed, 0);
    let x0 = search.approach(
        &problem.free,
        &start_of(&problem.template, &problem.free),
        None,
    );
    let best = search.minimize(&problem.free, &x0, None, POLISH_TARGET, &mut rng);
    let (x, _) = polish(&mut search, &problem.free, &best.x, None);
    let pulse = search.pulse(&problem.free, &x, None);
    search.finish(pulse)
}

/// A feasible point on one solution branch.
#[derive(Clone, Debug)]
struct Branch {
    tau: f64,
    /// Shape parameters.
    x: Vec<f64>,
    rydberg_time: f64,
    /// Feasible points met on the way, as `(tau, shape)`.
    visited: Vec<(f64, Vec<f64>)>,
}

/// Shortest feasible duration.
///
/// Feasible points are first located by minimizing the error jointly over
/// duration and shape, from the template and, failing that, from the best
/// points of a coarse scan. Each distinct solution is then followed to
/// shorter durations and the lower end of its feasible range bisected. The
/// shortest branch end wins, ties going to the smaller mean Rydberg time.
///
/// Also returns every branch end found.
fn min_duration(problem: &OptimizationProblem) -> Result<(OptimizationResult, Vec<Branch>)> {
    let (tau_bound, shape) = split_tau(problem);
    let Some(tau_bound) = tau_bound else {
        return min_error(problem).map(|r| (r, Vec::new()));
    };
    let mut search = Search::new(problem);
    let threshold = problem.threshold;
    let mut rng = rng_for(problem.seed, 0);
    let free = &problem.free;
    let tau_index = free
        .iter()
        .position(|b| b.param == Param::Tau)
        .expect("tau is free");
    let joint = |x: &[f64], tau: f64| -> Vec<f64> {
        let mut full = Vec::with_capacity(free.len());
        let mut rest = x.iter();
        for (i, _) in free.iter().enumerate() {
            full.push(if i == tau_index {
                tau
            } else {
                *rest.next().expect("shape")
            });
        }
        full
    };
    let split = |full: &[f64]| -> (f64, Vec<f64>) {
        let x = full
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != tau_index)
            .map(|(_, v)| *v)
            .collect();
        (full[tau_index], x)
    };

    let tau0 = problem.template.tau.clamp(tau_bound.lower, tau_bound.upper);
    let x0 = start_of(&problem.template, &shape);
    let target = 0.1 * threshold;
    let x0 = search.approach(free, &joint(&x0, tau0), None);
    let mut roots = vec![search.local(free, &x0, None, target, problem.max_evals, 0.01)];
    if roots[0].error >= threshold {
        for s in search.scan(&shape, tau0, MAX_INCUMBENTS) {
            let r = search.local(
                free,
                &joint(&s.x, tau0),
                None,
                target,
                problem.max_evals,
                0.005,
            );
            log::debug!("joint start: error {:.3e} at {:?}", r.error, r.x);
            roots.push(r);
        }
    }
    roots.sort_by(|a, b| a.error.total_cmp(&b.error));
    if roots[0].error >= threshold {
        let best = search.minimize(free, &roots[0].x.clone(), None, POLISH_TARGET, &mut rng);
        if best.error >= threshold {
            let (x, _) = polish(&mut search, free, &best.x, None);
            let pulse = search.pulse(free, &x, None);
            return Ok((search.finish(pulse)?, Vec::new()));
        }
        roots = vec![best];
    }
    roots.retain(|r| r.error < threshold);
    roots.dedup_by(|a, b| distance(free, &a.x, &b.x) < 0.02);
    roots.truncate(MAX_INCUMBENTS);

    let mut ends = Vec::with_capacity(roots.len());
    for root in &roots {
        let (tau, x) = split(&root.x);
        let end = descend(&mut search, &shape, tau_bound, tau, x, &mut rng);
        log::debug!(
            "branch end: tau {:.5}, T_r {:.5}",
            end.tau,
            end.rydberg_time
        );
        ends.push(end);
    }
    let resolution = problem.tau_resolution;
    ends.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    let shortest = ends[0].tau;
    let best = ends
        .iter()
        .filter(|e| e.tau <= shortest + resolution)
        .min_by(|a, b| a.rydberg_time.total_cmp(&b.rydberg_time))
        .expect("non-empty")
        .clone();
    let pulse = search.pulse(&shape, &best.x, Some(best.tau));
    Ok((search.finish(pulse)?, ends))
}

/// Bisects the lower end of the feasible range of the branch through the
/// feasible point `(tau, x)`.
fn descend(
    search: &mut Search,
    shape: &[Bound],
    tau_bound: Bound,
    tau: f64,
    x: Vec<f64>,
    rng: &mut ChaCha8Rng,
) -> Branch {
    let threshold = search.problem.threshold;
    let mut visited = vec![(tau, x.clone())];
    let (mut hi, mut xh) = (tau, x);
    let mut step = 0.005 * hi;
    let mut lo;
    loop {
        lo = (hi - step).max(tau_bound.lower);
        let r = search.track(shape, &xh, lo, rng);
        if r.error >= threshold {
            break;
        }
        hi = lo;
        xh = r.x;
        visited.push((hi, xh.clone()));
        if lo <= tau_bound.lower {
            break;
        }
        step *= 2.0;
    }
    while hi - lo > search.problem.tau_resolution {
        let mid = 0.5 * (lo + hi);
        let r = search.track(shape, &xh, mid, rng);
        if r.error < threshold {
            hi = mid;
            xh = r.x;
            visited.push((hi, xh.clone()));
        } else {
            lo = mid;
        }
        log::debug!("bisect [{lo:.5}, {hi:.5}]");
    }
    let (x, _) = polish(search, shape, &xh, Some(hi));
    let rydberg_time = search.mean_rydberg_time(shape, &x, Some(hi));
    Branch {
        tau: hi,
        x,
        rydberg_time,
        visited,
    }
}

/// Drives the error of a feasible point towards `POLISH_TARGET` with
/// shrinking simplices.
fn polish(search: &mut Search, bounds: &[Bound], x0: &[f64], tau: Option<f64>) -> (Vec<f64>, f64) {
    let lower: Vec<f64> = bounds.iter().map(|b| b.lower).collect();
    let upper: Vec<f64> = bounds.iter().map(|b| b.upper).collect();
    let mut x = x0.to_vec();
    let mut f = {
        let p = search.pulse(bounds, &x, tau);
        search.error(&p)
    };
    let mut scale = 1e-3;
    for _ in 0..4 {
        if f <= POLISH_TARGET {
            break;
        }
        let steps: Vec<f64> = x.iter().map(|v| scale * v.abs().max(0.1)).collect();
        let mut opts = search.nm_opts(POLISH_TARGET, search.problem.max_evals);
        opts.xatol = 1e-13;
        opts.fatol = 0.0;
        let r = nelder_mead::minimize(
            |y| {
                let p = search.pulse(bounds, y, tau);
                search.error(&p)
            },
            &x,
            &steps,
            &lower,
            &upper,
            &opts,
        );
        if r.f < f {
            x = r.x;
            f = r.f;
        }
        scale *= 0.1;
    }
    (x, f)
}

/// Step of the walk along a branch in `min_rydberg_time`.
const WALK_STEP: f64 = 0.05;

/// Smallest mean Rydberg time over feasible pulses. Every branch found by
/// the shortest-duration search is walked up to one unit of time above its
/// shortest duration, and the best walk point refined by a golden-section
/// search.
fn min_rydberg_time(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    let (tau_bound, shape) = split_tau(problem);
    let (shortest, ends) = min_duration(problem)?;
    let Some(tau_bound) = tau_bound else {
        return Ok(shortest);
    };
    if !shortest.feasible || shape.is_empty() {
        return Ok(shortest);
    }
    let threshold = problem.threshold;
    let mut search = Search::new(problem);
    search.evaluations = shortest.evaluations;
    let mut rng = rng_for(problem.seed, 1);

    let mut best: Option<Branch> = None;
    for end in &ends {
        // coarse walk, stopped by the first infeasible duration; every step
        // starts from the known feasible point closest in duration
        let mut known = end.visited.clone();
        known.push((end.tau, end.x.clone()));
        let nearest = |known: &[(f64, Vec<f64>)], tau: f64| -> Vec<f64> {
            known
                .iter()
                .min_by(|a, b| (a.0 - tau).abs().total_cmp(&(b.0 - tau).abs()))
                .expect("non-empty")
                .1
                .clone()
        };
        let mut walk: Vec<Branch> = vec![end.clone()];
        let top = (end.tau + 1.0).min(tau_bound.upper);
        let mut tau = end.tau;
        while tau + WALK_STEP <= top + 1e-12 {
            tau += WALK_STEP;
            let r = search.track(&shape, &nearest(&known, tau), tau, &mut rng);
            if r.error >= threshold {
                break;
            }
            let rydberg_time = search.mean_rydberg_time(&shape, &r.x, Some(tau));
            known.push((tau, r.x.clone()));
            walk.push(Branch {
                tau,
                x: r.x,
                rydberg_time,
                visited: Vec::new(),
            });
        }
        let k = (0..walk.len())
            .min_by(|&a, &b| walk[a].rydberg_time.total_cmp(&walk[b].rydberg_time))
            .expect("non-empty");
        log::debug!(
            "walk from {:.4}: best T_r {:.5} at {:.4}",
            end.tau,
            walk[k].rydberg_time,
            walk[k].tau
        );

        // golden section between the neighbours of the best walk point
        let left = walk[k.saturating_sub(1)].clone();
        let right = walk[(k + 1).min(walk.len() - 1)].clone();
        let mut cache: Vec<Branch> = walk.clone();
        let mut eval = |search: &mut Search, rng: &mut ChaCha8Rng, tau: f64| -> f64 {
            let r = search.track(&shape, &nearest(&known, tau), tau, rng);
            if r.error >= threshold {
                return f64::INFINITY;
            }
            let rydberg_time = search.mean_rydberg_time(&shape, &r.x, Some(tau));
            known.push((tau, r.x.clone()));
            cache.push(Branch {
                tau,
                x: r.x,
                rydberg_time,
                visited: Vec::new(),
            });
            rydberg_time
        };
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (left.tau, right.tau);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = eval(&mut search, &mut rng, c);
        let mut fd = eval(&mut search, &mut rng, d);
        while b - a > problem.tau_resolution {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = eval(&mut search, &mut rng, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = eval(&mut search, &mut rng, d);
            }
        }
        for point in cache {
            if best
                .as_ref()
                .is_none_or(|b| point.rydberg_time < b.rydberg_time)
            {
                best = Some(point);
            }
        }
    }
    let best = best.expect("at least one branch");
    let (x, _) = polish(&mut search, &shape, &best.x, Some(best.tau));
    let pulse = search.pulse(&shape, &x, Some(best.tau));
    let out = search.finish(pulse)?;
    Ok(
        if out.feasible && out.gate.mean_rydberg_time <= shortest.gate.mean_rydberg_time {
            out
        } else {
            shortest
        },
    )
}
