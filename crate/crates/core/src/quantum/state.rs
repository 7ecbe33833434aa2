use num_complex::Complex64;

use super::space::{HilbertSpace, Level};

/// Amplitudes over the basis of a [`HilbertSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(pub Vec<Complex64>);

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = Complex64::new(1.0, 0.0);
        v
    }

    /// `|a b> (x) |motional>` for a flattened motional index.
    pub fn product(space: &HilbertSpace, a: Level, b: Level, motional_index: usize) -> Self {
        Self::basis(space.total_dim(), space.compose(a, b, motional_index))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Multiplies every basis state by `e^{i theta}` once per atom in `|r>`.
///
/// This is the exact propagator of a detuning spike with area `theta`,
/// i.e. a jump of the laser phase.
pub fn apply_phase_jump(space: &HilbertSpace, psi: &mut StateVector, theta: f64) {
    let one = Complex64::from_polar(1.0, theta);
    let two = one * one;
    for (i, a) in psi.0.iter_mut().enumerate() {
        match space.rydberg_count(i) {
            1 => *a *= one,
            2 => *a *= two,
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn random_state(dim: usize, seed: u64) -> StateVector {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        StateVector(
            (0..dim)
                .map(|_| Complex64::new(rng.gen(), rng.gen()))
                .collect(),
        )
    }

    #[test]
    fn zero_jump_is_identity() {
        let s = HilbertSpace::internal();
        let psi = random_state(9, 1);
        let mut out = psi.clone();
        apply_phase_jump(&s, &mut out, 0.0);
        assert_eq!(out, psi);
    }

    #[test]
    fn full_turn_is_identity() {
        let s = HilbertSpace::internal();
        let psi = random_state(9, 2);
        let mut out = psi.clone();
        apply_phase_jump(&s, &mut out, 2.0 * PI);
        assert!(out.max_abs_diff(&psi) < 1e-14);
    }

    #[test]
    fn double_rydberg_gets_twice_the_phase() {
        let s = HilbertSpace::internal();
        let rr = s.compose(Level::Rydberg, Level::Rydberg, 0);
        let r1 = s.compose(Level::Rydberg, Level::One, 0);
        let mut psi = StateVector(vec![Complex64::new(1.0, 0.0); 9]);
        apply_phase_jump(&s, &mut psi, 0.3);
        assert!((psi.0[rr] - Complex64::from_polar(1.0, 0.6)).norm() < 1e-15);
        assert!((psi.0[r1] - Complex64::from_polar(1.0, 0.3)).norm() < 1e-15);
        assert_eq!(
            psi.0[s.compose(Level::One, Level::One, 0)],
            Complex64::new(1.0, 0.0)
        );
    }
}
