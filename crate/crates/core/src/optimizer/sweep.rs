//! Re-optimization along one fixed pulse or model parameter.

use serde::{Deserialize, Serialize};

use super::{direct_search, OptimizationProblem, OptimizationResult, Param};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Gaussian width, held fixed at each point.
    Width,
    /// Rabi ramp time.
    Kappa,
    /// `V / hbar Omega0`.
    Interaction,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Width => "width",
            SweepVariable::Kappa => "kappa",
            SweepVariable::Interaction => "interaction",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub result: Option<OptimizationResult>,
    pub feasible: bool,
    /// Why the point has no feasible result.
    pub message: Option<String>,
}

fn configure(
    base: &OptimizationProblem,
    variable: SweepVariable,
    value: f64,
) -> Result<OptimizationProblem> {
    let mut p = base.clone();
    match variable {
        SweepVariable::Width => {
            Param::Width.set(&mut p.template, value)?;
            p = p.fix(Param::Width);
        }
        SweepVariable::Kappa => {
            Param::Kappa.set(&mut p.template, value)?;
            p = p.fix(Param::Kappa);
        }
        SweepVariable::Interaction => p.interaction = value,
    }
    Ok(p)
}

/// Optimizes `problem` at every value in turn, warm-starting each point from
/// the previous result, so the grid order sets the branch that is followed.
/// Points without a feasible pulse are flagged, not dropped.
pub fn sweep(
    problem: &OptimizationProblem,
    variable: SweepVariable,
    values: &[f64],
) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::with_capacity(values.len());
    let mut warm: Option<OptimizationResult> = None;
    for &value in values {
        let mut base = problem.clone();
        if let Some(w) = &warm {
            base.template = w.pulse.clone();
        }
        let p = configure(&base, variable, value)?;
        let point = match direct_search(&p) {
            Ok(r) if r.feasible => {
                warm = Some(r.clone());
                SweepPoint {
                    value,
                    result: Some(r),
                    feasible: true,
                    message: None,
                }
            }
            Ok(r) => {
                warm = Some(r.clone());
                SweepPoint {
                    value,
                    message: Some(format!("gate error {:.3e} above threshold", r.gate_error)),
                    result: Some(r),
                    feasible: false,
                }
            }
            Err(e) => SweepPoint {
                value,
                result: None,
                feasible: false,
                message: Some(e.to_string()),
            },
        };
        log::info!(
            "sweep {} = {value}: feasible {}",
            variable.name(),
            point.feasible
        );
        out.push(point);
    }
    Ok(out)
}
