//! Dressed CRAB: repeated direct searches over a randomized cosine basis
//! added on top of the best pulse found so far.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    default_bound, direct_search, Objective, OptimizationProblem, OptimizationResult, Param,
};
use crate::error::{Error, Result};
use crate::pulses::{DcrabBasis, Family, PulseShape, DCRAB_DEFAULT_COMPONENTS, DCRAB_DEFAULT_FMAX};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcrabOptions {
    pub super_iterations: usize,
    /// Fresh cosines per super-iteration.
    pub components: usize,
    pub f_max: f64,
    pub seed: u64,
}

impl Default for DcrabOptions {
    fn default() -> Self {
        Self {
            super_iterations: 3,
            components: DCRAB_DEFAULT_COMPONENTS,
            f_max: DCRAB_DEFAULT_FMAX,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperIteration {
    pub index: usize,
    /// Frequencies drawn in this super-iteration (empty for the baseline).
    pub frequencies: Vec<f64>,
    /// Best feasible duration after this super-iteration.
    pub tau: f64,
    pub gate_error: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcrabOutcome {
    pub result: OptimizationResult,
    /// Entry 0 is the baseline.
    pub trace: Vec<SuperIteration>,
}

/// The pulse as a dCRAB pulse whose seed is its Gaussian detuning.
pub fn as_dcrab(pulse: &PulseShape) -> Result<PulseShape> {
    let empty = DcrabBasis {
        frequencies: Vec::new(),
        amplitudes: Vec::new(),
        f_max: DCRAB_DEFAULT_FMAX,
    };
    let out = match &pulse.family {
        Family::Gaussian { amplitude, width } => {
            PulseShape::dcrab_seeded(pulse.tau, pulse.delta0, *amplitude, *width, empty, None)
        }
        Family::GaussianRamped {
            amplitude,
            width,
            kappa,
        } => PulseShape::dcrab_seeded(
            pulse.tau,
            pulse.delta0,
            *amplitude,
            *width,
            empty,
            Some(*kappa),
        ),
        Family::Dcrab { .. } => pulse.clone(),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "dCRAB needs a Gaussian seed, got {}",
                pulse.kind().name()
            )))
        }
    };
    Ok(PulseShape {
        omega_scale: pulse.omega_scale,
        ..out
    })
}

/// Improves a feasible `baseline` by `opts.super_iterations` rounds. Each
/// round draws fresh frequencies, freezes the earlier cosines and searches
/// the shortest feasible duration over the baseline detuning, the seed and
/// the new amplitudes. A round is kept only if it shortens the gate, so the
/// recorded durations never increase.
pub fn dcrab_optimize(
    baseline: &OptimizationResult,
    problem: &OptimizationProblem,
    opts: &DcrabOptions,
) -> Result<DcrabOutcome> {
    if !baseline.feasible {
        return Err(Error::Infeasible {
            best: baseline.gate_error,
            threshold: problem.threshold,
        });
    }
    let mut best = baseline.clone();
    let mut trace = vec![SuperIteration {
        index: 0,
        frequencies: Vec::new(),
        tau: best.tau(),
        gate_error: best.gate_error,
        accepted: true,
    }];
    if opts.super_iterations == 0 {
        return Ok(DcrabOutcome {
            result: best,
            trace,
        });
    }
    let mut current = as_dcrab(&baseline.pulse)?;
    for k in 1..=opts.super_iterations {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(k as u64);
        let fresh = DcrabBasis::random(opts.components, opts.f_max, &mut rng);
        let mut candidate = current.clone();
        candidate.tau = best.tau();
        let first_new = if let Family::Dcrab { basis, .. } = &mut candidate.family {
            let n = basis.len();
            basis.frequencies.extend(&fresh.frequencies);
            basis.amplitudes.extend(&fresh.amplitudes);
            basis.f_max = opts.f_max;
            n
        } else {
            unreachable!("converted above")
        };
        let mut free = vec![default_bound(Param::Tau), default_bound(Param::Delta0)];
        if Param::Amplitude.get(&candidate).is_some() {
            free.push(default_bound(Param::Amplitude));
            free.push(default_bound(Param::Width));
        }
        free.extend(
            (first_new..first_new + opts.components).map(|i| default_bound(Param::Coefficient(i))),
        );
        let sub = OptimizationProblem {
            objective: Objective::MinDurationFeasible,
            template: candidate,
            free,
            seed: opts.seed.wrapping_add(k as u64),
            ..problem.clone()
        };
        let accepted = match direct_search(&sub) {
            Ok(r) if r.feasible && r.tau() < best.tau() - 0.5 * problem.tau_resolution => {
                current = r.pulse.clone();
                best = r;
                true
            }
            _ => false,
        };
        log::info!(
            "dcrab super-iteration {k}: tau {:.4} accepted {accepted}",
            best.tau()
        );
        trace.push(SuperIteration {
            index: k,
            frequencies: fresh.frequencies,
            tau: best.tau(),
            gate_error: best.gate_error,
            accepted,
        });
    }
    Ok(DcrabOutcome {
        result: best,
        trace,
    })
}
