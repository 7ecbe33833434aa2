//! Rabi-frequency and detuning profiles of the gate pulse.
//!
//! All quantities are dimensionless: time in units of `1/Omega0`, Rabi
//! frequency and detuning in units of `Omega0`. Every detuning profile is
//! symmetric about `tau / 2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of cosine components drawn per dCRAB super-iteration.
pub const DCRAB_DEFAULT_COMPONENTS: usize = 4;

/// Default frequency cap of the dCRAB basis, in cycles per `1/Omega0`.
pub const DCRAB_DEFAULT_FMAX: f64 = 3.0 / (2.0 * PI);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    DeltaJump,
    Triangle,
    Gaussian,
    GaussianRamped,
    Dcrab,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::DeltaJump => "delta_jump",
            FamilyKind::Triangle => "triangle",
            FamilyKind::Gaussian => "gaussian",
            FamilyKind::GaussianRamped => "gaussian_ramped",
            FamilyKind::Dcrab => "dcrab",
        }
    }
}

/// Randomized cosine basis for the dCRAB detuning, centred on `tau / 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcrabBasis {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    #[serde(default = "default_fmax")]
    pub f_max: f64,
}

fn unit_scale() -> f64 {
    1.0
}

fn default_fmax() -> f64 {
    DCRAB_DEFAULT_FMAX
}

impl DcrabBasis {
    /// Draws `n` fresh frequencies uniformly in `(0, f_max]` with zero
    /// amplitudes.
    pub fn random<R: Rng + ?Sized>(n: usize, f_max: f64, rng: &mut R) -> Self {
        let frequencies = (0..n).map(|_| f_max * (1.0 - rng.gen::<f64>())).collect();
        Self {
            frequencies,
            amplitudes: vec![0.0; n],
            f_max,
        }
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    fn eval(&self, s: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.amplitudes)
            .map(|(f, a)| a * (2.0 * PI * f * s).cos())
            .sum()
    }
}

/// Family-specific detuning parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Constant detuning with an instantaneous laser-phase jump `theta` at
    /// `tau / 2`.
    DeltaJump {
        theta: f64,
    },
    /// Isosceles triangle of `height` and full `base` centred at `tau / 2`.
    Triangle {
        height: f64,
        base: f64,
    },
    Gaussian {
        amplitude: f64,
        width: f64,
    },
    /// Gaussian detuning with a `tanh` ramp of the Rabi frequency on both
    /// edges.
    GaussianRamped {
        amplitude: f64,
        width: f64,
        kappa: f64,
    },
    /// Detuning baseline plus a sum of cosines, optionally on top of a
    /// Gaussian seed `[amplitude, width]`; the Rabi frequency may be ramped
    /// like `GaussianRamped` when `kappa` is set.
    Dcrab {
        #[serde(flatten)]
        basis: DcrabBasis,
        #[serde(default)]
        seed: Option<[f64; 2]>,
        #[serde(default)]
        kappa: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub tau: f64,
    pub delta0: f64,
    /// Peak Rabi frequency in units of `Omega0`, within `[0, 1]`.
    #[serde(default = "unit_scale")]
    pub omega_scale: f64,
    #[serde(flatten)]
    pub family: Family,
}

impl PulseShape {
    pub fn delta_jump(tau: f64, delta0: f64, theta: f64) -> Self {
        Self {
            tau,
            delta0,
            omega_scale: 1.0,
            family: Family::DeltaJump { theta },
        }
    }

    pub fn triangle(tau: f64, delta0: f64, height: f64, base: f64) -> Self {
        Self {
            tau,
            delta0,
            omega_scale: 1.0,
            family: Family::Triangle { height, base },
        }
    }

    pub fn gaussian(tau: f64, delta0: f64, amplitude: f64, width: f64) -> Self {
        Self {
            tau,
            delta0,
            omega_scale: 1.0,
            family: Family::Gaussian { amplitude, width },
        }
    }

    pub fn gaussian_ramped(tau: f64, delta0: f64, amplitude: f64, width: f64, kappa: f64) -> Self {
        Self {
            tau,
            delta0,
            omega_scale: 1.0,
            family: Family::GaussianRamped {
                amplitude,
                width,
                kappa,
            },
        }
    }

    pub fn dcrab(tau: f64, delta0: f64, basis: DcrabBasis, kappa: Option<f64>) -> Self {
        Self {
            tau,
            delta0,
            omega_scale: 1.0,
            family: Family::Dcrab {
                basis,
                seed: None,
                kappa,
            },
        }
    }

    /// dCRAB pulse dressing a Gaussian detuning of `amplitude` and `width`.
    pub fn dcrab_seeded(
        tau: f64,
        delta0: f64,
        amplitude: f64,
        width: f64,
        basis: DcrabBasis,
        kappa: Option<f64>,
    ) -> Self {
        Self {
            tau,
            delta0,
            omega_scale: 1.0,
            family: Family::Dcrab {
                basis,
                seed: Some([amplitude, width]),
                kappa,
            },
        }
    }

    /// Pulse with no drive at all; the gate is the identity.
    pub fn idle(tau: f64) -> Self {
        Self {
            omega_scale: 0.0,
            ..Self::gaussian(tau, 0.0, 0.0, 1.0)
        }
    }

    /// Rejects non-finite values, non-positive durations or widths and
    /// negative ramps.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("pulse {what} = {v}")));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad("tau", self.tau);
        }
        if !self.delta0.is_finite() {
            return bad("delta0", self.delta0);
        }
        if !(0.0..=1.0).contains(&self.omega_scale) {
            return bad("omega_scale", self.omega_scale);
        }
        let positive = |what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                bad(what, v)
            }
        };
        let finite = |what: &str, v: f64| if v.is_finite() { Ok(()) } else { bad(what, v) };
        let ramp = |k: Option<f64>| match k {
            Some(k) if !(k >= 0.0 && k.is_finite()) => bad("kappa", k),
            _ => Ok(()),
        };
        match &self.family {
            Family::DeltaJump { theta } => finite("theta", *theta),
            Family::Triangle { height, base } => {
                finite("height", *height).and(positive("base", *base))
            }
            Family::Gaussian { amplitude, width } => {
                finite("amplitude", *amplitude).and(positive("width", *width))
            }
            Family::GaussianRamped {
                amplitude,
                width,
                kappa,
            } => finite("amplitude", *amplitude)
                .and(positive("width", *width))
                .and(ramp(Some(*kappa))),
            Family::Dcrab { basis, seed, kappa } => {
                for (&f, &a) in basis.frequencies.iter().zip(&basis.amplitudes) {
                    finite("dcrab frequency", f)?;
                    finite("dcrab amplitude", a)?;
                }
                if let Some([a, w]) = seed {
                    finite("amplitude", *a)?;
                    positive("width", *w)?;
                }
                ramp(*kappa)
            }
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self.family {
            Family::DeltaJump { .. } => FamilyKind::DeltaJump,
            Family::Triangle { .. } => FamilyKind::Triangle,
            Family::Gaussian { .. } => FamilyKind::Gaussian,
            Family::GaussianRamped { .. } => FamilyKind::GaussianRamped,
            Family::Dcrab { .. } => FamilyKind::Dcrab,
        }
    }

    pub fn kappa(&self) -> Option<f64> {
        match &self.family {
            Family::GaussianRamped { kappa, .. } => Some(*kappa),
            Family::Dcrab { kappa, .. } => *kappa,
            _ => None,
        }
    }

    /// Rabi frequency in units of `Omega0`; zero outside `[0, tau]`.
    pub fn omega(&self, t: f64) -> f64 {
        if !(0.0..=self.tau).contains(&t) {
            return 0.0;
        }
        let envelope = match self.kappa() {
            Some(k) if k > 0.0 => {
                let norm = (self.tau / (2.0 * k)).tanh().powi(2);
                (t / k).tanh() * ((self.tau - t) / k).tanh() / norm
            }
            _ => 1.0,
        };
        self.omega_scale * envelope
    }

    /// Detuning in units of `Omega0`. The phase jump of `DeltaJump` is not
    /// part of this function; see [`PulseShape::jump_points`].
    pub fn delta(&self, t: f64) -> f64 {
        let s = t - 0.5 * self.tau;
        self.delta0
            + match &self.family {
                Family::DeltaJump { .. } => 0.0,
                Family::Triangle { height, base } => {
                    let half = 0.5 * base;
                    if half <= 0.0 {
                        0.0
                    } else {
                        height * (1.0 - s.abs() / half).max(0.0)
                    }
                }
                Family::Gaussian { amplitude, width }
                | Family::GaussianRamped {
                    amplitude, width, ..
                } => amplitude * (-s * s / (2.0 * width * width)).exp(),
                Family::Dcrab { basis, seed, .. } => {
                    basis.eval(s) + seed.map_or(0.0, |[a, w]| a * (-s * s / (2.0 * w * w)).exp())
                }
            }
    }

    /// Instantaneous laser-phase jumps `(time, theta)` in increasing time.
    pub fn jump_points(&self) -> Vec<(f64, f64)> {
        match self.family {
            Family::DeltaJump { theta } => vec![(0.5 * self.tau, theta)],
            _ => Vec::new(),
        }
    }

    /// Times at which the drive is not smooth (jump points and the triangle
    /// apex and base corners) inside `(0, tau)`. The integrator restarts
    /// its step at these points.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mid = 0.5 * self.tau;
        let mut pts = match &self.family {
            Family::DeltaJump { .. } => vec![mid],
            Family::Triangle { base, .. } => vec![mid - 0.5 * base, mid, mid + 0.5 * base],
            _ => Vec::new(),
        };
        pts.retain(|&p| p > 0.0 && p < self.tau);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// 99%-energy bandwidth of `Delta(t) - Delta0`, in cycles per `1/Omega0`.
    /// A phase jump has a flat spectrum and reports `f64::INFINITY`.
    pub fn bandwidth_estimate(&self) -> f64 {
        if self.kind() == FamilyKind::DeltaJump {
            return f64::INFINITY;
        }
        spectral_bandwidth(|t| self.delta(t) - self.delta0, self.tau, 0.99)
    }
}

/// Smallest frequency `f` such that the one-sided power spectrum of `f(t)`
/// on `[0, tau]` holds `fraction` of the total energy below `f`.
pub fn spectral_bandwidth(f: impl Fn(f64) -> f64, tau: f64, fraction: f64) -> f64 {
    const SAMPLES_IN_PULSE: usize = 4096;
    const WINDOW: usize = 16;
    let n = SAMPLES_IN_PULSE * WINDOW;
    let dt = tau / SAMPLES_IN_PULSE as f64;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            if k < SAMPLES_IN_PULSE {
                Complex64::new(f((k as f64 + 0.5) * dt), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let power: Vec<f64> = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr();
            if k == 0 || k == half {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    let total: f64 = power.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let df = 1.0 / (n as f64 * dt);
    let mut acc = 0.0;
    for (k, p) in power.iter().enumerate() {
        acc += p;
        if acc >= fraction * total {
            return k as f64 * df;
        }
    }
    half as f64 * df
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_smooth(tau: f64) -> Vec<PulseShape> {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut basis = DcrabBasis::random(4, DCRAB_DEFAULT_FMAX, &mut rng);
        basis.amplitudes = vec![0.3, -0.2, 0.1, 0.05];
        vec![
            PulseShape::triangle(tau, -0.1, 2.0, 5.0),
            PulseShape::gaussian(tau, 0.2, 1.5, 1.7),
            PulseShape::gaussian_ramped(tau, 0.2, 1.5, 1.7, 0.31),
            PulseShape::dcrab(tau, 0.1, basis, None),
        ]
    }

    #[test]
    fn constant_rabi_inside_gate() {
        let p = PulseShape::gaussian(7.69, 0.0, 1.0, 1.7);
        for t in [0.1, 3.0, 7.6] {
            assert_eq!(p.omega(t), 1.0);
        }
        assert_eq!(p.omega(-0.1), 0.0);
        assert_eq!(p.omega(7.7), 0.0);
    }

    #[test]
    fn ramped_rabi_edges_and_peak() {
        let p = PulseShape::gaussian_ramped(7.7, 0.0, 1.0, 1.7, 0.31);
        assert_eq!(p.omega(0.0), 0.0);
        assert!(p.omega(7.7).abs() < 1e-15);
        assert!((p.omega(7.7 / 2.0) - 1.0).abs() < 1e-9);
        for k in 0..=100 {
            let w = p.omega(7.7 * k as f64 / 100.0);
            assert!((0.0..=1.0 + 1e-15).contains(&w));
        }
    }

    #[test]
    fn gaussian_peak_and_tails() {
        let (tau, d0, a, w) = (8.0, 0.3, 1.2, 1.1);
        let p = PulseShape::gaussian(tau, d0, a, w);
        assert!((p.delta(tau / 2.0) - (d0 + a)).abs() < 1e-15);
        for s in [-3.0 * w, 3.0 * w] {
            assert!((p.delta(tau / 2.0 + s) - d0).abs() <= a * (-4.5f64).exp() + 1e-15);
        }
    }

    #[test]
    fn triangle_outside_base_is_baseline() {
        let p = PulseShape::triangle(8.0, -0.4, 2.0, 3.0);
        assert_eq!(p.delta(1.0), -0.4);
        assert_eq!(p.delta(7.0), -0.4);
        assert!((p.delta(4.0) - 1.6).abs() < 1e-15);
        assert!((p.delta(4.75) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn dcrab_zero_amplitudes_is_baseline() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let basis = DcrabBasis::random(5, DCRAB_DEFAULT_FMAX, &mut rng);
        assert!(basis
            .frequencies
            .iter()
            .all(|&f| f > 0.0 && f <= DCRAB_DEFAULT_FMAX));
        let p = PulseShape::dcrab(7.7, 0.25, basis, None);
        for k in 0..50 {
            assert_eq!(p.delta(k as f64 * 0.15), 0.25);
        }
    }

    #[test]
    fn detuning_symmetric_about_midpoint() {
        let tau = 7.69;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in all_smooth(tau) {
            for _ in 0..1000 {
                let s = rng.gen::<f64>() * tau / 2.0;
                let d = (p.delta(tau / 2.0 + s) - p.delta(tau / 2.0 - s)).abs();
                assert!(d < 1e-12, "{:?} asymmetric by {d}", p.kind());
            }
        }
    }

    #[test]
    fn evaluation_is_deterministic() {
        for p in all_smooth(7.0) {
            for k in 0..20 {
                let t = 0.35 * k as f64;
                assert_eq!(p.delta(t).to_bits(), p.delta(t).to_bits());
                assert_eq!(p.omega(t).to_bits(), p.omega(t).to_bits());
            }
        }
    }

    #[test]
    fn delta_jump_bandwidth_unbounded() {
        assert!(PulseShape::delta_jump(8.53, 0.39, 3.9)
            .bandwidth_estimate()
            .is_infinite());
    }

    #[test]
    fn gaussian_bandwidth_scales_inversely_with_width() {
        let wide = PulseShape::gaussian(12.0, 0.0, 1.0, 1.0).bandwidth_estimate();
        let narrow = PulseShape::gaussian(12.0, 0.0, 1.0, 0.5).bandwidth_estimate();
        let ratio = narrow / wide;
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn triangle_and_gaussian_bandwidths_comparable() {
        // full width at half maximum matched: triangle base/2 = 2.355 w
        let w = 1.0;
        let g = PulseShape::gaussian(12.0, 0.0, 1.0, w).bandwidth_estimate();
        let t = PulseShape::triangle(12.0, 0.0, 1.0, 2.0 * 2.3548 * w).bandwidth_estimate();
        let r = t / g;
        assert!(r > 0.3 && r < 3.0, "ratio {r}");
    }

    #[test]
    fn pulse_serde_roundtrip() {
        for p in all_smooth(7.7) {
            let s = serde_json::to_string(&p).unwrap();
            let back: PulseShape = serde_json::from_str(&s).unwrap();
            assert_eq!(p, back);
        }
    }
}
