//! Gate-level figures of merit: Rydberg times, acquired phases, Bell-state
//! and average gate fidelities.
//!
//! Conventions:
//! - phases are measured relative to the `|00>` amplitude, which carries
//!   only the common trap zero-point phase;
//! - population lost through the non-Hermitian decay term is never
//!   renormalized; it has zero overlap with any target state;
//! - the phase corrections `e^{-i phi_10}` / `e^{-i phi_01}` are applied per
//!   qubit on `|1>` before comparison with the ideal controlled-Z.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulses::PulseShape;
use crate::quantum::hamiltonian::{
    assemble_hamiltonian, Couplings, EffectiveHamiltonian, ModelFlags,
};
use crate::quantum::integrator::{evolve_gate, IntegratorOptions, Trajectory};
use crate::quantum::space::{HilbertSpace, COMPUTATIONAL, COMPUTATIONAL_LABELS};
use crate::quantum::state::StateVector;

/// Cumulative Boltzmann weight that may be neglected in thermal sums.
pub const THERMAL_CUTOFF: f64 = 1e-6;

/// Amplitudes below this make a phase meaningless.
pub const PHASE_AMPLITUDE_FLOOR: f64 = 1e-6;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Composite Simpson rule on a uniform grid (trapezoid for a trailing odd
/// interval).
pub fn simpson(times: &[f64], values: &[f64]) -> f64 {
    let n = times.len();
    if n < 2 {
        return 0.0;
    }
    let h = (times[n - 1] - times[0]) / (n - 1) as f64;
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut s = 0.0;
    if even >= 2 {
        s += values[0] + values[even];
        for k in 1..even {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * values[k];
        }
        s *= h / 3.0;
    }
    if even < intervals {
        s += 0.5 * h * (values[even] + values[even + 1]);
    }
    s
}

/// `(T_r, T_rr)`: time integrals of `<n_1 + n_2>` and `<n_1 n_2>`.
pub fn rydberg_times(traj: &Trajectory) -> (f64, f64) {
    let single: Vec<f64> = traj.rydberg.iter().map(|n| n[0] + n[1]).collect();
    (
        simpson(&traj.times, &single),
        simpson(&traj.times, &traj.rydberg_pair),
    )
}

/// Second-order estimate `T_rr = (Omega0 / sqrt(2) V)^2 T_r^{11}`
/// (dimensionless: `V` in units of `hbar Omega0`).
pub fn perturbative_pair_time(rydberg_time_11: f64, interaction: f64) -> f64 {
    if interaction.is_infinite() {
        return 0.0;
    }
    rydberg_time_11 / (2.0 * interaction * interaction)
}

/// Outcome of running the gate on each computational input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    /// `<alpha, phi|psi_final^alpha>` for alpha in 00, 01, 10, 11.
    pub amplitudes: [[f64; 2]; 4],
    pub phi_01: f64,
    pub phi_10: f64,
    pub phi_11: f64,
    /// `T_r^alpha` in units of `1/Omega0`.
    pub rydberg_time: [f64; 4],
    pub mean_rydberg_time: f64,
    /// `T_rr` of the `|11>` input.
    pub pair_time: f64,
    pub surviving_norm: [f64; 4],
    pub leakage: [f64; 4],
}

impl GateResult {
    /// `phi_11 - phi_01 - phi_10` folded into `(-pi, pi]`, measured from `pi`.
    pub fn phase_condition_error(&self) -> f64 {
        wrap(self.phi_11 - self.phi_01 - self.phi_10 - PI)
    }

    pub fn max_leakage(&self) -> f64 {
        self.leakage.iter().copied().fold(0.0, f64::max)
    }

    pub fn amplitude(&self, k: usize) -> C {
        c(self.amplitudes[k][0], self.amplitudes[k][1])
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Phases and leakages from the final states of the four computational
/// inputs (each started in the motional ground state).
pub fn extract_phases(
    space: &HilbertSpace,
    finals: &[StateVector; 4],
) -> Result<([f64; 3], [f64; 4], [C; 4])> {
    let mut amp = [c(0.0, 0.0); 4];
    let mut leakage = [0.0; 4];
    let m = space.motional_dim();
    for (k, (a, b)) in COMPUTATIONAL.iter().enumerate() {
        let psi = &finals[k];
        let base = space.compose(*a, *b, 0);
        amp[k] = psi.0[base];
        let inside: f64 = psi.0[base..base + m].iter().map(|v| v.norm_sqr()).sum();
        let norm = psi.norm_sqr();
        leakage[k] = if norm > 0.0 {
            (1.0 - inside / norm).max(0.0)
        } else {
            1.0
        };
        if amp[k].norm() < PHASE_AMPLITUDE_FLOOR {
            return Err(Error::UndefinedPhase {
                state: COMPUTATIONAL_LABELS[k],
                magnitude: amp[k].norm(),
            });
        }
    }
    let reference = amp[0].arg();
    let phase = |k: usize| wrap(amp[k].arg() - reference);
    Ok(([phase(1), phase(2), phase(3)], leakage, amp))
}

/// Runs the gate on `|alpha> (x) |motional ground>` for all four inputs.
pub fn simulate_gate(
    space: &HilbertSpace,
    couplings: &Couplings,
    pulse: &PulseShape,
    flags: ModelFlags,
    opts: &IntegratorOptions,
) -> Result<GateResult> {
    pulse.validate()?;
    let ham = assemble_hamiltonian(space, couplings, pulse, flags)?;
    let trajs: Vec<Trajectory> = COMPUTATIONAL
        .par_iter()
        .map(|(a, b)| evolve_gate(&ham, space, &StateVector::product(space, *a, *b, 0), opts))
        .collect::<Result<_>>()?;
    gate_result_from(space, &trajs)
}

fn gate_result_from(space: &HilbertSpace, trajs: &[Trajectory]) -> Result<GateResult> {
    let finals: [StateVector; 4] = std::array::from_fn(|k| trajs[k].final_state().clone());
    let ([p01, p10, p11], leakage, amp) = extract_phases(space, &finals)?;
    let mut rydberg_time = [0.0; 4];
    let mut pair_time = 0.0;
    for (k, tr) in trajs.iter().enumerate() {
        let (tr_k, trr_k) = rydberg_times(tr);
        rydberg_time[k] = tr_k;
        if k == 3 {
            pair_time = trr_k;
        }
    }
    Ok(GateResult {
        amplitudes: amp.map(|a| [a.re, a.im]),
        phi_01: p01,
        phi_10: p10,
        phi_11: p11,
        rydberg_time,
        mean_rydberg_time: (rydberg_time[1] + rydberg_time[2] + rydberg_time[3]) / 3.0,
        pair_time,
        surviving_norm: std::array::from_fn(|k| finals[k].norm_sqr()),
        leakage,
    })
}

/// Idealized three-level gate (no motion, no decay) at blockade `V/hbar Omega0`.
pub fn ideal_gate(
    interaction: f64,
    pulse: &PulseShape,
    opts: &IntegratorOptions,
) -> Result<GateResult> {
    simulate_gate(
        &HilbertSpace::internal(),
        &Couplings::ideal(interaction),
        pulse,
        ModelFlags::IDEAL,
        opts,
    )
}

/// Bell infidelity of the idealized gate computed from its returning
/// amplitudes, with the phase correction taken from `|10>` and `|01>`.
pub fn bell_infidelity_from_amplitudes(amp: &[C; 4]) -> f64 {
    let reference = amp[0].arg();
    let phi_01 = amp[1].arg() - reference;
    let phi_10 = amp[2].arg() - reference;
    let correction = [0.0, phi_01, phi_10, phi_01 + phi_10];
    let sign = [1.0, 1.0, 1.0, -1.0];
    let s: C = (0..4)
        .map(|k| amp[k] * C::from_polar(0.25 * sign[k], -reference - correction[k]))
        .sum();
    1.0 - s.norm_sqr()
}

/// Thermal occupation of the motional ladders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thermal {
    /// Temperature in kelvin, recorded in reports only.
    pub temperature: f64,
    /// `exp(-hbar omega / k_B T)` for every motional ladder of the space,
    /// in declaration order.
    pub boltzmann_ratios: Vec<f64>,
}

impl Thermal {
    pub fn ground(space: &HilbertSpace) -> Self {
        Self {
            temperature: 0.0,
            boltzmann_ratios: vec![0.0; space.axes().len()],
        }
    }

    /// Product Fock states `(motional index, weight)` in decreasing weight,
    /// truncated once the kept weight exceeds `1 - THERMAL_CUTOFF`.
    pub fn initial_states(&self, space: &HilbertSpace) -> Result<Vec<(usize, f64)>> {
        let axes = space.axes();
        if self.boltzmann_ratios.len() != axes.len() {
            return Err(Error::InvalidParameter(format!(
                "{} Boltzmann ratios for {} ladders",
                self.boltzmann_ratios.len(),
                axes.len()
            )));
        }
        let mut states = vec![(Vec::<usize>::new(), 1.0f64)];
        for (ax, &q) in axes.iter().zip(&self.boltzmann_ratios) {
            if !(0.0..1.0).contains(&q) {
                return Err(Error::InvalidParameter(format!("Boltzmann ratio {q}")));
            }
            let mut next = Vec::with_capacity(states.len() * ax.fock_dim);
            for (occ, w) in &states {
                let mut p = 1.0 - q;
                for n in 0..ax.fock_dim {
                    if p == 0.0 {
                        break;
                    }
                    let mut o = occ.clone();
                    o.push(n);
                    next.push((o, w * p));
                    p *= q;
                }
            }
            states = next;
        }
        states.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut kept = Vec::new();
        let mut acc = 0.0;
        for (occ, w) in states {
            if acc >= 1.0 - THERMAL_CUTOFF {
                break;
            }
            acc += w;
            kept.push((space.motional_index(&occ), w));
        }
        if 1.0 - acc > THERMAL_CUTOFF {
            return Err(Error::ThermalTail(1.0 - acc));
        }
        Ok(kept)
    }
}

/// Which figure of merit a report holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Bell,
    Average,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub bell_fidelity: f64,
    pub avg_gate_fidelity: f64,
    pub temperature: f64,
    pub mechanism: String,
}

impl FidelityReport {
    pub fn bell_infidelity(&self) -> f64 {
        1.0 - self.bell_fidelity
    }

    pub fn avg_infidelity(&self) -> f64 {
        1.0 - self.avg_gate_fidelity
    }

    pub fn infidelity(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Bell => self.bell_infidelity(),
            Metric::Average => self.avg_infidelity(),
        }
    }
}

/// Propagated computational inputs for every thermal initial state, already
/// projected onto the computational subspace and phase corrected.
struct ThermalPropagation {
    /// `(weight, blocks)` where `blocks[k]` is a `4 x motional` matrix:
    /// row `beta`, column `m` = `<beta, m| Z U |alpha_k, n>`.
    components: Vec<(f64, [Vec<[C; 4]>; 4])>,
}

fn propagate_thermal(
    space: &HilbertSpace,
    ham: &EffectiveHamiltonian,
    thermal: &Thermal,
    opts: &IntegratorOptions,
) -> Result<ThermalPropagation> {
    // phase correction from the motional-ground run
    let initial = thermal.initial_states(space)?;
    let run = |mi: usize| -> Result<[StateVector; 4]> {
        let v: Vec<StateVector> = COMPUTATIONAL
            .par_iter()
            .map(|(a, b)| {
                evolve_gate(ham, space, &StateVector::product(space, *a, *b, mi), opts)
                    .map(|t| t.final_state.expect("final state"))
            })
            .collect::<Result<_>>()?;
        Ok(v.try_into().expect("four inputs"))
    };
    let ground = run(0)?;
    let (phases, _, _) = extract_phases(space, &ground)?;
    let (phi_01, phi_10) = (phases[0], phases[1]);
    let reference = ground[0].0[space.compose(COMPUTATIONAL[0].0, COMPUTATIONAL[0].1, 0)].arg();
    // correction e^{-i(a phi_10 + b phi_01)} on |ab>, plus the |00> reference
    let correction: [C; 4] = [
        C::from_polar(1.0, -reference),
        C::from_polar(1.0, -reference - phi_01),
        C::from_polar(1.0, -reference - phi_10),
        C::from_polar(1.0, -reference - phi_01 - phi_10),
    ];

    let rest: Vec<(usize, f64)> = initial.iter().copied().filter(|&(mi, _)| mi != 0).collect();
    let mut finals: Vec<(f64, [StateVector; 4])> = Vec::with_capacity(initial.len());
    if let Some(&(_, w0)) = initial.iter().find(|(mi, _)| *mi == 0) {
        finals.push((w0, ground));
    }
    let others: Vec<(f64, [StateVector; 4])> = rest
        .par_iter()
        .map(|&(mi, w)| run(mi).map(|f| (w, f)))
        .collect::<Result<_>>()?;
    finals.extend(others);

    let total_weight: f64 = finals.iter().map(|(w, _)| w).sum();
    let m = space.motional_dim();
    let components = finals
        .into_iter()
        .map(|(w, states)| {
            let blocks = states.map(|psi| {
                (0..m)
                    .map(|mi| {
                        std::array::from_fn(|beta| {
                            let (a, b) = COMPUTATIONAL[beta];
                            psi.0[space.compose(a, b, mi)] * correction[beta]
                        })
                    })
                    .collect::<Vec<[C; 4]>>()
            });
            (w / total_weight, blocks)
        })
        .collect();
    Ok(ThermalPropagation { components })
}

/// `U2 = H (x) H` on the computational basis.
pub fn preparation_unitary() -> Matrix4<C> {
    let h = 0.5;
    Matrix4::from_fn(|r, col| {
        let s = if (r & col).count_ones() % 2 == 1 {
            -h
        } else {
            h
        };
        c(s, 0.0)
    })
}

/// Hadamard on the second qubit, the basis change in `U1` that maps the
/// phase-corrected controlled-Z output onto `|B>`.
pub fn bell_basis_change() -> Matrix4<C> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Matrix4::zeros();
    for a in 0..2 {
        m[(2 * a, 2 * a)] = c(s, 0.0);
        m[(2 * a, 2 * a + 1)] = c(s, 0.0);
        m[(2 * a + 1, 2 * a)] = c(s, 0.0);
        m[(2 * a + 1, 2 * a + 1)] = c(-s, 0.0);
    }
    m
}

pub fn bell_state() -> Vector4<C> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Vector4::new(c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0))
}

pub fn controlled_z() -> Matrix4<C> {
    Matrix4::from_diagonal(&Vector4::new(
        c(1.0, 0.0),
        c(1.0, 0.0),
        c(1.0, 0.0),
        c(-1.0, 0.0),
    ))
}

impl ThermalPropagation {
    fn bell_fidelity(&self) -> f64 {
        let prep = preparation_unitary()
            * Vector4::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let bra = (bell_state().adjoint() * bell_basis_change()).transpose();
        let mut f = 0.0;
        for (w, blocks) in &self.components {
            let m = blocks[0].len();
            for mi in 0..m {
                let mut out = Vector4::<C>::zeros();
                for (k, block) in blocks.iter().enumerate() {
                    let col = block[mi];
                    for beta in 0..4 {
                        out[beta] += prep[k] * col[beta];
                    }
                }
                let amp: C = (0..4).map(|beta| bra[beta] * out[beta]).sum();
                f += w * amp.norm_sqr();
            }
        }
        f
    }

    /// The reduced map on `|i><j|`, as a `4 x 4` matrix per pair.
    fn channel(&self, i: usize, j: usize) -> Matrix4<C> {
        let mut out = Matrix4::<C>::zeros();
        for (w, blocks) in &self.components {
            for (ci, cj) in blocks[i].iter().zip(&blocks[j]) {
                for r in 0..4 {
                    for s in 0..4 {
                        out[(r, s)] += ci[r] * cj[s].conj() * *w;
                    }
                }
            }
        }
        out
    }

    fn avg_gate_fidelity(&self) -> f64 {
        let maps: Vec<Matrix4<C>> = (0..16).map(|k| self.channel(k / 4, k % 4)).collect();
        let apply = |rho: &Matrix4<C>| -> Matrix4<C> {
            let mut out = Matrix4::zeros();
            for i in 0..4 {
                for j in 0..4 {
                    if rho[(i, j)] != c(0.0, 0.0) {
                        out += maps[i * 4 + j] * rho[(i, j)];
                    }
                }
            }
            out
        };
        nielsen_average_fidelity(&controlled_z(), apply)
    }
}

fn pauli(k: usize) -> nalgebra::Matrix2<C> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match k {
        0 => nalgebra::Matrix2::new(o, z, z, o),
        1 => nalgebra::Matrix2::new(z, o, o, z),
        2 => nalgebra::Matrix2::new(z, -i, i, z),
        _ => nalgebra::Matrix2::new(o, z, z, -o),
    }
}

/// Two-qubit Pauli products, an orthogonal unitary operator basis with
/// `tr(U_j^dagger U_k) = 4 delta_jk`.
pub fn pauli_basis() -> Vec<Matrix4<C>> {
    let mut out = Vec::with_capacity(16);
    for a in 0..4 {
        for b in 0..4 {
            let k = pauli(a).kronecker(&pauli(b));
            out.push(Matrix4::from_fn(|r, s| k[(r, s)]));
        }
    }
    out
}

/// Average gate fidelity of `channel` against the unitary `target`,
/// `F = (sum_j tr(V U_j^dagger V^dagger E(U_j)) + d^2) / (d^2 (d + 1))`.
/// Applied verbatim to non-trace-preserving maps.
pub fn nielsen_average_fidelity(
    target: &Matrix4<C>,
    channel: impl Fn(&Matrix4<C>) -> Matrix4<C>,
) -> f64 {
    let d = 4.0;
    let vd = target.adjoint();
    let sum: C = pauli_basis()
        .iter()
        .map(|u| (target * u.adjoint() * vd * channel(u)).trace())
        .sum();
    (sum.re + d * d) / (d * d * (d + 1.0))
}

/// Bell-state and average gate fidelity of the pulse under the given model.
pub fn gate_fidelities(
    space: &HilbertSpace,
    couplings: &Couplings,
    pulse: &PulseShape,
    flags: ModelFlags,
    thermal: &Thermal,
    opts: &IntegratorOptions,
    mechanism: &str,
) -> Result<FidelityReport> {
    let ham = assemble_hamiltonian(space, couplings, pulse, flags)?;
    let prop = propagate_thermal(space, &ham, thermal, opts)?;
    Ok(FidelityReport {
        bell_fidelity: prop.bell_fidelity().clamp(0.0, 1.0),
        avg_gate_fidelity: prop.avg_gate_fidelity().clamp(0.0, 1.0),
        temperature: thermal.temperature,
        mechanism: mechanism.to_string(),
    })
}

pub fn bell_fidelity(
    space: &HilbertSpace,
    couplings: &Couplings,
    pulse: &PulseShape,
    flags: ModelFlags,
    thermal: &Thermal,
    opts: &IntegratorOptions,
) -> Result<FidelityReport> {
    gate_fidelities(space, couplings, pulse, flags, thermal, opts, "bell")
}

pub fn avg_gate_fidelity(
    space: &HilbertSpace,
    couplings: &Couplings,
    pulse: &PulseShape,
    flags: ModelFlags,
    thermal: &Thermal,
    opts: &IntegratorOptions,
) -> Result<FidelityReport> {
    gate_fidelities(space, couplings, pulse, flags, thermal, opts, "average")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::Axis;
    use approx::assert_relative_eq;

    #[test]
    fn wrap_range() {
        for x in [-7.0, -PI, -1.0, 0.0, PI, 4.0, 13.0] {
            let y = wrap(x);
            assert!(y > -PI && y <= PI, "{x} -> {y}");
            assert_relative_eq!(
                ((x - y) / (2.0 * PI)).round() * 2.0 * PI,
                x - y,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn simpson_exact_on_cubic() {
        let t: Vec<f64> = (0..=10).map(|k| 0.3 * k as f64).collect();
        let f: Vec<f64> = t.iter().map(|x| x * x * x - 2.0 * x).collect();
        let exact = 3f64.powi(4) / 4.0 - 9.0;
        assert_relative_eq!(simpson(&t, &f), exact, epsilon = 1e-12);
    }

    #[test]
    fn perturbative_pair_time_formula() {
        assert_relative_eq!(perturbative_pair_time(4.0, 20.0), 4.0 / 800.0);
    }

    #[test]
    fn amplitude_bell_infidelity() {
        // any single-qubit phases on top of a CZ leave the corrected Bell state exact
        let (g, a, b) = (0.3, 1.1, -0.4);
        let amp = [
            C::from_polar(1.0, g),
            C::from_polar(1.0, g + a),
            C::from_polar(1.0, g + b),
            C::from_polar(1.0, g + a + b + PI),
        ];
        assert!(bell_infidelity_from_amplitudes(&amp).abs() < 1e-14);
        let shrunk = amp.map(|z| z * 0.9);
        assert_relative_eq!(
            bell_infidelity_from_amplitudes(&shrunk),
            1.0 - 0.81,
            epsilon = 1e-12
        );
        let mut wrong = amp;
        wrong[3] = -wrong[3];
        assert_relative_eq!(
            bell_infidelity_from_amplitudes(&wrong),
            0.75,
            epsilon = 1e-12
        );
    }

    #[test]
    fn nielsen_limits() {
        let u = controlled_z();
        let perfect = nielsen_average_fidelity(&u, |rho| u * rho * u.adjoint());
        assert_relative_eq!(perfect, 1.0, epsilon = 1e-14);
        // uniform loss of a fraction p: 1 - F = 0.8 p
        let p = 0.01;
        let lossy = nielsen_average_fidelity(&u, |rho| u * rho * u.adjoint() * c(1.0 - p, 0.0));
        assert_relative_eq!(1.0 - lossy, 0.8 * p, epsilon = 1e-14);
    }

    #[test]
    fn bell_circuit_maps_cz_to_bell_state() {
        let prep = preparation_unitary()
            * Vector4::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let out = bell_basis_change() * controlled_z() * prep;
        let overlap = (bell_state().adjoint() * out)[(0, 0)];
        assert_relative_eq!(overlap.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn thermal_ground_is_single_state() {
        let space = HilbertSpace::symmetric(Axis::Z, 4).unwrap();
        let states = Thermal::ground(&space).initial_states(&space).unwrap();
        assert_eq!(states, vec![(0, 1.0)]);
    }

    #[test]
    fn thermal_weights_and_tail() {
        let space = HilbertSpace::symmetric(Axis::Z, 12).unwrap();
        let q = 0.2;
        let th = Thermal {
            temperature: 1.0,
            boltzmann_ratios: vec![q, q],
        };
        let states = th.initial_states(&space).unwrap();
        let kept: f64 = states.iter().map(|s| s.1).sum();
        assert!(1.0 - kept <= THERMAL_CUTOFF);
        assert_relative_eq!(states[0].1, (1.0 - q) * (1.0 - q), epsilon = 1e-15);
        assert!(states.windows(2).all(|w| w[0].1 >= w[1].1));

        let small = HilbertSpace::symmetric(Axis::Z, 3).unwrap();
        assert!(matches!(
            th.initial_states(&small),
            Err(Error::ThermalTail(_))
        ));
    }
}
