//! Time-dependent effective Hamiltonian of the driven atom pair.
//!
//! Units: `hbar = 1`, `Omega0 = 1`. The Hamiltonian is kept as three
//! sparse pieces, `H(t) = H_static + Omega(t) H_rabi + Delta(t) H_detuning`,
//! so a drive evaluation costs two scalar function calls.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operators::{
    displacement, embed, number, position, rydberg_projector, sigma_minus, sigma_plus,
    DEFAULT_FOCK_PADDING,
};
use super::space::{Axis, HilbertSpace, N_ATOMS};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::pulses::PulseShape;

/// Which corrections to the idealized three-level model are switched on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFlags {
    #[serde(default)]
    pub recoil: bool,
    #[serde(default)]
    pub trap: bool,
    #[serde(default)]
    pub vdw_position_dependence: bool,
    #[serde(default)]
    pub decay: bool,
}

impl ModelFlags {
    pub const IDEAL: ModelFlags = ModelFlags {
        recoil: false,
        trap: false,
        vdw_position_dependence: false,
        decay: false,
    };

    pub const ALL: ModelFlags = ModelFlags {
        recoil: true,
        trap: true,
        vdw_position_dependence: true,
        decay: true,
    };

    pub fn decay_only() -> Self {
        Self {
            decay: true,
            ..Self::IDEAL
        }
    }

    pub fn recoil_only() -> Self {
        Self {
            recoil: true,
            trap: true,
            ..Self::IDEAL
        }
    }

    pub fn vdw_only() -> Self {
        Self {
            vdw_position_dependence: true,
            trap: true,
            ..Self::IDEAL
        }
    }
}

/// Dimensionless couplings (energies in `hbar Omega0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    /// `V / hbar Omega0`, with `V = -C6 / R^6`.
    pub interaction: f64,
    /// `gamma / Omega0`.
    pub decay_rate: f64,
    /// Trap frequency per axis `[x, y, z]`, `omega / Omega0`.
    pub trap_frequency: [f64; 3],
    /// Lamb-Dicke factor `k_axis sqrt(hbar / 2 m omega_axis)` per axis.
    pub lamb_dicke: [f64; 3],
    /// Oscillator scale `sqrt(hbar / 2 m omega_axis) / R` per axis.
    pub position_over_separation: [f64; 3],
    /// Order of the Taylor expansion of `|R + x1 - x2|^-6` about `R`.
    pub vdw_order: usize,
    /// Extra Fock levels used when exponentiating the recoil kick.
    pub fock_padding: usize,
}

impl Couplings {
    /// Idealized couplings with only the blockade interaction.
    pub fn ideal(interaction: f64) -> Self {
        Self {
            interaction,
            decay_rate: 0.0,
            trap_frequency: [0.0; 3],
            lamb_dicke: [0.0; 3],
            position_over_separation: [0.0; 3],
            vdw_order: 2,
            fock_padding: DEFAULT_FOCK_PADDING,
        }
    }
}

fn axis_slot(axis: Axis) -> usize {
    match axis {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    }
}

/// Generalized binomial coefficient `binom(-6, k)`, the Taylor coefficients
/// of `(1 + u)^-6`.
pub fn inverse_sixth_coefficient(k: usize) -> f64 {
    let mut c = 1.0;
    for j in 0..k {
        c *= (-6.0 - j as f64) / (j as f64 + 1.0);
    }
    c
}

#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    pub static_part: CsrMatrix,
    pub rabi_part: CsrMatrix,
    pub detuning_part: CsrMatrix,
    pub pulse: PulseShape,
    pub flags: ModelFlags,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.static_part.nrows()
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.pulse.omega(t)
    }

    pub fn delta(&self, t: f64) -> f64 {
        self.pulse.delta(t)
    }

    /// `out = -i H(t) x`.
    pub fn rhs(&self, t: f64, x: &[Complex64], out: &mut [Complex64]) {
        let mi = Complex64::new(0.0, -1.0);
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        self.static_part.mul_add(mi, x, out);
        let om = self.omega(t);
        if om != 0.0 {
            self.rabi_part.mul_add(mi * om, x, out);
        }
        let de = self.delta(t);
        if de != 0.0 {
            self.detuning_part.mul_add(mi * de, x, out);
        }
    }

    /// Explicit matrix at time `t`.
    pub fn matrix_at(&self, t: f64) -> CsrMatrix {
        self.static_part
            .add(&self.rabi_part.scaled(Complex64::new(self.omega(t), 0.0)))
            .add(
                &self
                    .detuning_part
                    .scaled(Complex64::new(self.delta(t), 0.0)),
            )
    }
}

/// Builds `H = H0 + H_trap + H_int + H_decay` for the selected flags.
///
/// With no flags this is exactly the three-level model
/// `sum_i [Omega/2 (s+_i + s-_i) - Delta n_i] + V n1 n2`.
pub fn assemble_hamiltonian(
    space: &HilbertSpace,
    couplings: &Couplings,
    pulse: &PulseShape,
    flags: ModelFlags,
) -> Result<EffectiveHamiltonian> {
    if flags.recoil && !space.has_axis_on_all_atoms(Axis::Z) {
        return Err(Error::FlagSpaceMismatch {
            flag: "recoil",
            axis: "z",
        });
    }
    if flags.vdw_position_dependence && !space.has_axis_on_all_atoms(Axis::X) {
        return Err(Error::FlagSpaceMismatch {
            flag: "vdw_position_dependence",
            axis: "x",
        });
    }
    if flags.trap && space.axes().is_empty() {
        return Err(Error::FlagSpaceMismatch {
            flag: "trap",
            axis: "any",
        });
    }

    let dim = space.total_dim();
    let sp = sigma_plus();
    let sm = sigma_minus();
    let n = rydberg_projector();

    // drive: 1/2 sum_i (s+_i e^{ikz_i} + s-_i e^{-ikz_i})
    let mut rabi = CsrMatrix::zeros(dim, dim);
    for atom in 0..N_ATOMS {
        let (up, down) = match (flags.recoil, space.factor_of(atom, Axis::Z)) {
            (true, Some(f)) => {
                let nf = space.factor_dims()[f];
                let d = CsrMatrix::from_dense(&displacement(
                    nf,
                    couplings.lamb_dicke[axis_slot(Axis::Z)],
                    couplings.fock_padding,
                ));
                let dd = d.adjoint();
                (
                    embed(space, &[(atom, &sp), (f, &d)]),
                    embed(space, &[(atom, &sm), (f, &dd)]),
                )
            }
            _ => (embed(space, &[(atom, &sp)]), embed(space, &[(atom, &sm)])),
        };
        rabi = rabi.add(&up.add(&down).scaled(Complex64::new(0.5, 0.0)));
    }

    let mut detuning = CsrMatrix::zeros(dim, dim);
    for atom in 0..N_ATOMS {
        detuning = detuning.add(&embed(space, &[(atom, &n)]).scaled(Complex64::new(-1.0, 0.0)));
    }

    let pair = embed(space, &[(0, &n), (1, &n)]);
    let v = Complex64::new(couplings.interaction, 0.0);
    let mut stat = if flags.vdw_position_dependence {
        // u = (x1 - x2) / R in oscillator units of each x ladder
        let s = couplings.position_over_separation[axis_slot(Axis::X)];
        let f1 = space.factor_of(0, Axis::X).unwrap();
        let f2 = space.factor_of(1, Axis::X).unwrap();
        let x1 = position(space.factor_dims()[f1]);
        let x2 = position(space.factor_dims()[f2]);
        let u = embed(space, &[(f1, &x1)])
            .add(&embed(space, &[(f2, &x2)]).scaled(Complex64::new(-1.0, 0.0)))
            .scaled(Complex64::new(s, 0.0));
        let mut series = CsrMatrix::identity(dim);
        let mut power = CsrMatrix::identity(dim);
        for k in 1..=couplings.vdw_order {
            power = power.matmul(&u);
            series = series.add(&power.scaled(Complex64::new(inverse_sixth_coefficient(k), 0.0)));
        }
        pair.matmul(&series).scaled(v)
    } else {
        pair.scaled(v)
    };

    if flags.trap {
        for ax in space.axes() {
            let f = space.factor_of(ax.atom, ax.axis).unwrap();
            let w = couplings.trap_frequency[axis_slot(ax.axis)];
            let nf = space.factor_dims()[f];
            let osc = number(nf).add(&CsrMatrix::identity(nf).scaled(Complex64::new(0.5, 0.0)));
            stat = stat.add(&embed(space, &[(f, &osc)]).scaled(Complex64::new(w, 0.0)));
        }
    }

    if flags.decay {
        let half = Complex64::new(0.0, -0.5 * couplings.decay_rate);
        for atom in 0..N_ATOMS {
            stat = stat.add(&embed(space, &[(atom, &n)]).scaled(half));
        }
    }

    Ok(EffectiveHamiltonian {
        static_part: stat,
        rabi_part: rabi,
        detuning_part: detuning,
        pulse: pulse.clone(),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::space::{Level, MotionalAxis};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ideal_matches_three_level_model() {
        let s = HilbertSpace::internal();
        let v = 21.1;
        let pulse = PulseShape::gaussian(7.0, 0.0, 0.0, 1.0);
        let h = assemble_hamiltonian(&s, &Couplings::ideal(v), &pulse, ModelFlags::IDEAL).unwrap();
        let m = h.matrix_at(2.0).to_dense();
        let idx = |a, b| s.compose(a, b, 0);
        use Level::*;
        // Rabi couplings 1/2 between |1x> <-> |rx>
        assert_eq!(m[(idx(Rydberg, Zero), idx(One, Zero))], c(0.5, 0.0));
        assert_eq!(m[(idx(One, One), idx(One, Rydberg))], c(0.5, 0.0));
        assert_eq!(m[(idx(Rydberg, Rydberg), idx(One, Rydberg))], c(0.5, 0.0));
        assert_eq!(m[(idx(Rydberg, Rydberg), idx(Rydberg, Rydberg))], c(v, 0.0));
        assert_eq!(m[(idx(Zero, Zero), idx(Zero, Zero))], c(0.0, 0.0));
        // |0x> is never coupled
        for j in 0..9 {
            if j != idx(Zero, Zero) {
                assert_eq!(m[(idx(Zero, Zero), j)], c(0.0, 0.0));
            }
        }
        assert!(h.matrix_at(1.3).hermiticity_defect() < 1e-15);
    }

    #[test]
    fn detuning_enters_with_minus_sign() {
        let s = HilbertSpace::internal();
        let pulse = PulseShape::gaussian(7.0, 0.4, 0.0, 1.0);
        let h =
            assemble_hamiltonian(&s, &Couplings::ideal(10.0), &pulse, ModelFlags::IDEAL).unwrap();
        let m = h.matrix_at(1.0).to_dense();
        let r0 = s.compose(Level::Rydberg, Level::Zero, 0);
        let rr = s.compose(Level::Rydberg, Level::Rydberg, 0);
        assert_eq!(m[(r0, r0)], c(-0.4, 0.0));
        assert!((m[(rr, rr)] - c(10.0 - 0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn decay_is_minus_i_gamma_half_per_excitation() {
        let s = HilbertSpace::internal();
        let mut cpl = Couplings::ideal(21.1);
        cpl.decay_rate = 0.0032;
        let pulse = PulseShape::idle(5.0);
        let h = assemble_hamiltonian(&s, &cpl, &pulse, ModelFlags::decay_only()).unwrap();
        let m = h.static_part.to_dense();
        for i in 0..9 {
            let expected = -0.5 * cpl.decay_rate * s.rydberg_count(i) as f64;
            assert!((m[(i, i)].im - expected).abs() < 1e-18);
        }
    }

    #[test]
    fn flags_require_matching_ladders() {
        let pulse = PulseShape::idle(1.0);
        let cpl = Couplings::ideal(1.0);
        let x_only = HilbertSpace::symmetric(Axis::X, 3).unwrap();
        assert!(matches!(
            assemble_hamiltonian(&x_only, &cpl, &pulse, ModelFlags::recoil_only()),
            Err(Error::FlagSpaceMismatch { .. })
        ));
        let z_one = HilbertSpace::build(&[MotionalAxis::new(Axis::X, 0, 3)]).unwrap();
        assert!(matches!(
            assemble_hamiltonian(&z_one, &cpl, &pulse, ModelFlags::vdw_only()),
            Err(Error::FlagSpaceMismatch { .. })
        ));
        assert!(assemble_hamiltonian(
            &HilbertSpace::internal(),
            &cpl,
            &pulse,
            ModelFlags {
                trap: true,
                ..ModelFlags::IDEAL
            }
        )
        .is_err());
    }

    #[test]
    fn inverse_sixth_series() {
        assert_eq!(inverse_sixth_coefficient(0), 1.0);
        assert_eq!(inverse_sixth_coefficient(1), -6.0);
        assert_eq!(inverse_sixth_coefficient(2), 21.0);
        assert_eq!(inverse_sixth_coefficient(3), -56.0);
    }
}
