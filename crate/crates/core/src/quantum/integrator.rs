//! Adaptive Dormand-Prince 5(4) integration of `i d/dt psi = H(t) psi`.
//!
//! Steps are controlled on a mixed absolute/relative RMS norm. The
//! fourth-order continuous extension supplies states on a uniform output
//! grid, from which the Rydberg populations are sampled.

use num_complex::Complex64;

use super::hamiltonian::EffectiveHamiltonian;
use super::space::{HilbertSpace, Level, N_LEVELS};
use super::state::{apply_phase_jump, StateVector};
use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Continuous extension: y(t0 + x h) = y0 + h sum_j k_j sum_m P[j][m] x^{m+1}
const P: [[f64; 4]; 7] = [
    [
        1.0,
        -8048581381.0 / 2820520608.0,
        8663915743.0 / 2820520608.0,
        -12715105075.0 / 11282082432.0,
    ],
    [0.0, 0.0, 0.0, 0.0],
    [
        0.0,
        131558114200.0 / 32700410799.0,
        -68118460800.0 / 10900136933.0,
        87487479700.0 / 32700410799.0,
    ],
    [
        0.0,
        -1754552775.0 / 470086768.0,
        14199869525.0 / 1410260304.0,
        -10690763975.0 / 1880347072.0,
    ],
    [
        0.0,
        127303824393.0 / 49829197408.0,
        -318862633887.0 / 49829197408.0,
        701980252875.0 / 199316789632.0,
    ],
    [
        0.0,
        -282668133.0 / 205662961.0,
        2019193451.0 / 616988883.0,
        -1453857185.0 / 822651844.0,
    ],
    [
        0.0,
        40617522.0 / 29380423.0,
        -110615467.0 / 29380423.0,
        69997945.0 / 29380423.0,
    ],
];

/// Default number of intervals of the uniform observable grid per gate.
pub const DEFAULT_GRID_INTERVALS: usize = 2000;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorOptions {
    /// Used as both the absolute and the relative tolerance.
    pub tolerance: f64,
    pub max_steps: usize,
    /// Number of intervals of the uniform output grid over the full span.
    pub grid_intervals: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_steps: 1_000_000,
            grid_intervals: DEFAULT_GRID_INTERVALS,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

/// Observables sampled along an evolution.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `<n_1>`, `<n_2>` at each grid time.
    pub rydberg: Vec<[f64; 2]>,
    /// `<n_1 n_2>` at each grid time.
    pub rydberg_pair: Vec<f64>,
    pub norm_sqr: Vec<f64>,
    pub final_state: Option<StateVector>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Sum of the local error estimates (max-norm) of accepted steps.
    pub error_estimate: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.final_state
            .as_ref()
            .expect("trajectory has a final state")
    }
}

/// Rydberg-population observables of a state.
pub fn rydberg_observables(space: &HilbertSpace, psi: &[Complex64]) -> ([f64; 2], f64, f64) {
    let m = space.motional_dim();
    let r = Level::Rydberg.index();
    let mut n = [0.0; 2];
    let mut pair = 0.0;
    let mut norm = 0.0;
    for (internal, block) in psi.chunks(m).enumerate() {
        let p: f64 = block.iter().map(|a| a.norm_sqr()).sum();
        norm += p;
        let a = internal / N_LEVELS;
        let b = internal % N_LEVELS;
        if a == r {
            n[0] += p;
        }
        if b == r {
            n[1] += p;
        }
        if a == r && b == r {
            pair += p;
        }
    }
    (n, pair, norm)
}

struct Workspace {
    k: [Vec<Complex64>; 7],
    ytmp: Vec<Complex64>,
    ynew: Vec<Complex64>,
    err: Vec<Complex64>,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        let z = || vec![Complex64::new(0.0, 0.0); dim];
        Self {
            k: [z(), z(), z(), z(), z(), z(), z()],
            ytmp: z(),
            ynew: z(),
            err: z(),
        }
    }
}

fn stage(y: &[Complex64], h: f64, coeffs: &[f64], k: &[Vec<Complex64>], out: &mut [Complex64]) {
    out.copy_from_slice(y);
    for (j, &a) in coeffs.iter().enumerate() {
        if a != 0.0 {
            let ha = h * a;
            for (o, kj) in out.iter_mut().zip(&k[j]) {
                *o += kj * ha;
            }
        }
    }
}

/// Integrates a smooth segment `[t0, t1]`, sampling `on_grid` at every
/// requested grid time inside the segment. `grid` must be sorted.
fn integrate_segment(
    ham: &EffectiveHamiltonian,
    y: &mut [Complex64],
    t0: f64,
    t1: f64,
    opts: &IntegratorOptions,
    grid: &[f64],
    on_grid: &mut dyn FnMut(f64, &[Complex64]),
    stats: &mut Trajectory,
) -> Result<()> {
    let dim = y.len();
    let tol = opts.tolerance;
    let mut ws = Workspace::new(dim);
    let mut gi = 0;
    while gi < grid.len() && grid[gi] < t0 {
        gi += 1;
    }
    while gi < grid.len() && grid[gi] == t0 {
        on_grid(t0, y);
        gi += 1;
    }
    if t1 <= t0 {
        return Ok(());
    }

    let span = t1 - t0;
    let mut t = t0;
    ham.rhs(t, y, &mut ws.k[0]);
    // initial step from the scale of the derivative
    let d0 = rms(y, y, tol);
    let d1 = rms(&ws.k[0], y, tol);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(span);
    let mut dense = vec![Complex64::new(0.0, 0.0); dim];

    while t < t1 {
        if stats.accepted_steps + stats.rejected_steps >= opts.max_steps {
            return Err(Error::StepUnderflow { t, h });
        }
        if h < 1e-13 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }
        let last = t + h >= t1 || (t1 - (t + h)) < 1e-12 * span;
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            let coeffs: &[f64] = match s {
                1 => &A2,
                2 => &A3,
                3 => &A4,
                4 => &A5,
                5 => &A6,
                _ => &B,
            };
            let (done, todo) = ws.k.split_at_mut(s);
            stage(y, h, coeffs, done, &mut ws.ytmp);
            ham.rhs(t + C[s] * h, &ws.ytmp, &mut todo[0]);
            if s == 6 {
                ws.ynew.copy_from_slice(&ws.ytmp);
            }
        }
        for i in 0..dim {
            let mut e = Complex64::new(0.0, 0.0);
            for j in 0..7 {
                if E[j] != 0.0 {
                    e += ws.k[j][i] * E[j];
                }
            }
            ws.err[i] = e * h;
        }
        let err = rms_err(&ws.err, y, &ws.ynew, tol);
        if err <= 1.0 {
            while gi < grid.len() && grid[gi] <= t + h {
                let x = (grid[gi] - t) / h;
                dense_eval(y, &ws.k, h, x, &mut dense);
                on_grid(grid[gi], &dense);
                gi += 1;
            }
            stats.error_estimate += ws.err.iter().map(|e| e.norm()).fold(0.0, f64::max);
            stats.accepted_steps += 1;
            t = if last { t1 } else { t + h };
            y.copy_from_slice(&ws.ynew);
            ws.k.swap(0, 6);
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= fac;
            h = h.min(t1 - t).max(0.0);
            if t < t1 && h == 0.0 {
                h = t1 - t;
            }
        } else {
            stats.rejected_steps += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(())
}

fn dense_eval(y0: &[Complex64], k: &[Vec<Complex64>; 7], h: f64, x: f64, out: &mut [Complex64]) {
    let xp = [x, x * x, x * x * x, x * x * x * x];
    let mut w = [0.0; 7];
    for j in 0..7 {
        w[j] = h * (0..4).map(|m| P[j][m] * xp[m]).sum::<f64>();
    }
    for i in 0..y0.len() {
        let mut v = y0[i];
        for j in 0..7 {
            if w[j] != 0.0 {
                v += k[j][i] * w[j];
            }
        }
        out[i] = v;
    }
}

fn rms(v: &[Complex64], scale: &[Complex64], tol: f64) -> f64 {
    let s: f64 = v
        .iter()
        .zip(scale)
        .map(|(a, y)| {
            let sc = tol + tol * y.norm();
            (a.norm() / sc).powi(2)
        })
        .sum();
    (s / v.len() as f64).sqrt() * tol
}

fn rms_err(err: &[Complex64], y0: &[Complex64], y1: &[Complex64], tol: f64) -> f64 {
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = tol + tol * a.norm().max(b.norm());
            (e.norm() / sc).powi(2)
        })
        .sum();
    (s / err.len() as f64).sqrt()
}

/// Integrates `psi0` over `[t0, t1]` with no jumps, sampling the Rydberg
/// observables on `opts.grid_intervals + 1` uniform points.
pub fn integrate(
    ham: &EffectiveHamiltonian,
    space: &HilbertSpace,
    psi0: &StateVector,
    t_span: (f64, f64),
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    evolve_with_jumps(ham, space, psi0, t_span, &[], &[], opts)
}

/// Evolves over the full gate `[0, tau]`, splitting at the pulse
/// breakpoints and applying its instantaneous phase jumps exactly.
pub fn evolve_gate(
    ham: &EffectiveHamiltonian,
    space: &HilbertSpace,
    psi0: &StateVector,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let jumps = ham.pulse.jump_points();
    let breaks = ham.pulse.breakpoints();
    evolve_with_jumps(
        ham,
        space,
        psi0,
        (0.0, ham.pulse.tau),
        &breaks,
        &jumps,
        opts,
    )
}

fn evolve_with_jumps(
    ham: &EffectiveHamiltonian,
    space: &HilbertSpace,
    psi0: &StateVector,
    (t0, t1): (f64, f64),
    breakpoints: &[f64],
    jumps: &[(f64, f64)],
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if !(opts.tolerance > 0.0 && opts.tolerance.is_finite()) {
        return Err(Error::InvalidTolerance(opts.tolerance));
    }
    if psi0.dim() != ham.dim() || space.total_dim() != ham.dim() {
        return Err(Error::DimensionMismatch {
            expected: ham.dim(),
            got: psi0.dim(),
        });
    }
    let n = opts.grid_intervals.max(1);
    let grid: Vec<f64> = (0..=n)
        .map(|k| {
            if k == n {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / n as f64
            }
        })
        .collect();

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .chain(jumps.iter().map(|(t, _)| t))
        .copied()
        .filter(|&t| t > t0 && t < t1)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut traj = Trajectory {
        times: Vec::with_capacity(n + 1),
        rydberg: Vec::with_capacity(n + 1),
        rydberg_pair: Vec::with_capacity(n + 1),
        norm_sqr: Vec::with_capacity(n + 1),
        ..Default::default()
    };
    let mut samples: Vec<(f64, [f64; 2], f64, f64)> = Vec::with_capacity(n + 1);
    let mut y = psi0.0.clone();
    let mut start = t0;
    let mut next_grid = 0usize;
    for end in cuts.iter().copied().chain(std::iter::once(t1)) {
        // grid points strictly before `end` belong to this segment; the
        // final segment also takes `end` itself
        let upto = if end == t1 {
            grid.len()
        } else {
            grid.partition_point(|&g| g < end)
        };
        let seg_grid = &grid[next_grid..upto];
        let mut record = |t: f64, psi: &[Complex64]| {
            let (nr, pair, norm) = rydberg_observables(space, psi);
            samples.push((t, nr, pair, norm));
        };
        let mut stats = Trajectory::default();
        integrate_segment(
            ham,
            &mut y,
            start,
            end,
            opts,
            seg_grid,
            &mut record,
            &mut stats,
        )?;
        traj.accepted_steps += stats.accepted_steps;
        traj.rejected_steps += stats.rejected_steps;
        traj.error_estimate += stats.error_estimate;
        next_grid = upto;
        for (tj, theta) in jumps {
            if *tj == end {
                let mut psi = StateVector(std::mem::take(&mut y));
                apply_phase_jump(space, &mut psi, *theta);
                y = psi.0;
            }
        }
        start = end;
    }
    for (t, nr, pair, norm) in samples {
        traj.times.push(t);
        traj.rydberg.push(nr);
        traj.rydberg_pair.push(pair);
        traj.norm_sqr.push(norm);
    }
    traj.final_state = Some(StateVector(y));
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::PulseShape;
    use crate::quantum::hamiltonian::{assemble_hamiltonian, Couplings, ModelFlags};

    fn ideal(v: f64, pulse: &PulseShape) -> (HilbertSpace, EffectiveHamiltonian) {
        let s = HilbertSpace::internal();
        let h = assemble_hamiltonian(&s, &Couplings::ideal(v), pulse, ModelFlags::IDEAL).unwrap();
        (s, h)
    }

    #[test]
    fn single_atom_rabi_formula_on_grid() {
        let pulse = PulseShape::gaussian(6.0, 0.0, 0.0, 1.0);
        let (s, h) = ideal(0.0, &pulse);
        let psi0 = StateVector::product(&s, Level::Zero, Level::One, 0);
        let tr = integrate(&h, &s, &psi0, (0.0, 6.0), &IntegratorOptions::default()).unwrap();
        assert_eq!(tr.times.len(), DEFAULT_GRID_INTERVALS + 1);
        for (t, nr) in tr.times.iter().zip(&tr.rydberg) {
            let expected = (0.5 * t).sin().powi(2);
            assert!(
                (nr[1] - expected).abs() < 1e-8,
                "t={t}: {} vs {expected}",
                nr[1]
            );
            assert_eq!(nr[0], 0.0);
        }
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let pulse = PulseShape::idle(1.0);
        let (s, h) = ideal(1.0, &pulse);
        let psi0 = StateVector::basis(9, 0);
        let r = integrate(
            &h,
            &s,
            &psi0,
            (0.0, 1.0),
            &IntegratorOptions::with_tolerance(0.0),
        );
        assert!(matches!(r, Err(Error::InvalidTolerance(_))));
    }

    #[test]
    fn pathological_detuning_underflows() {
        let pulse = PulseShape::gaussian(2.0, 1e15, 0.0, 1.0);
        let (s, h) = ideal(1.0, &pulse);
        let psi0 = StateVector::product(&s, Level::One, Level::Zero, 0);
        let opts = IntegratorOptions::with_tolerance(1e-10);
        let r = integrate(&h, &s, &psi0, (0.0, 2.0), &opts);
        assert!(matches!(r, Err(Error::StepUnderflow { .. })));
    }
}
