//! One-dimensional two-beam field in the focal plane of the recombining mirror.
//!
//! Each arm arrives as an envelope centered on its spot, multiplied by a
//! linear-phase carrier set by its tilt at focus and by the constant phase
//! accumulated in its [`PhaseLedger`](super::PhaseLedger). The sum of the two
//! complex amplitudes gives the fringe pattern; the sum of their squared
//! moduli gives the pattern without interference.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::apparatus::{ApparatusConfig, Arm, ArmGate};
use crate::error::{Error, Result};

/// Shape of a single arm's amplitude envelope, normalized to `E(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Envelope {
    /// `exp(-u²/2)`.
    Gaussian,
    /// `sin(u)/u`, the far field of a uniform slit.
    Sinc,
}

impl Envelope {
    pub fn amplitude(self, u: f64) -> f64 {
        match self {
            Envelope::Gaussian => (-0.5 * u * u).exp(),
            Envelope::Sinc => {
                if u.abs() < 1e-8 {
                    1.0 - u * u / 6.0
                } else {
                    u.sin() / u
                }
            }
        }
    }

    /// `∫ E((x - c)/w)² dx` over the whole line.
    pub fn energy(self, width: f64) -> f64 {
        match self {
            Envelope::Gaussian => std::f64::consts::PI.sqrt() * width,
            Envelope::Sinc => std::f64::consts::PI * width,
        }
    }

    /// Half-span, in envelope widths, sampled on either side of a spot.
    pub(crate) fn grid_margin(self) -> f64 {
        match self {
            Envelope::Gaussian => 6.0,
            Envelope::Sinc => 12.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Envelope::Gaussian => "gaussian",
            Envelope::Sinc => "sinc",
        }
    }
}

/// Closed-form description of one beam at the observation plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    pub center: f64,
    pub tilt: f64,
    /// Constant phase from the arm's ledger, radians.
    pub phase: f64,
    /// Multiplies the unit-peak envelope; zero for a blocked arm.
    pub scale: f64,
}

/// Analytic two-beam amplitude model.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBeam {
    pub wavenumber: f64,
    pub envelope: Envelope,
    pub width: f64,
    pub reflected: Beam,
    pub transmitted: Beam,
}

impl TwoBeam {
    /// Beam amplitudes on the normalized intensity scale: each arm carries
    /// `sqrt(I_j / (2 (I_R + I_T)))`, so two balanced, superimposed arms
    /// peak at exactly 1 and a lone balanced arm at 0.25.
    pub fn from_config(cfg: &ApparatusConfig, gate: ArmGate) -> Result<Self> {
        let (i_r, i_t) = cfg.arm_intensities()?;
        let norm = 0.5 / (i_r + i_t);
        let mut beams = Self::unit_modes(cfg)?;
        beams.reflected.scale = if gate.reflected {
            (norm * i_r).sqrt()
        } else {
            0.0
        };
        beams.transmitted.scale = if gate.transmitted {
            (norm * i_t).sqrt()
        } else {
            0.0
        };
        Ok(beams)
    }

    /// Both arms with unit-peak envelopes (`scale = 1`).
    pub fn unit_modes(cfg: &ApparatusConfig) -> Result<Self> {
        let (phase_r, phase_t) = cfg.arm_phases()?;
        Ok(Self {
            wavenumber: std::f64::consts::TAU / cfg.wavelength,
            envelope: cfg.envelope,
            width: cfg.envelope_width,
            reflected: Beam {
                center: cfg.spot_center_r,
                tilt: cfg.tilt_r,
                phase: phase_r,
                scale: 1.0,
            },
            transmitted: Beam {
                center: cfg.spot_center_t,
                tilt: cfg.tilt_t,
                phase: phase_t,
                scale: 1.0,
            },
        })
    }

    pub fn beam(&self, arm: Arm) -> &Beam {
        match arm {
            Arm::R => &self.reflected,
            Arm::T => &self.transmitted,
        }
    }

    pub fn amplitude(&self, arm: Arm, x: f64) -> Complex64 {
        let b = self.beam(arm);
        if b.scale == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let e = self.envelope.amplitude((x - b.center) / self.width);
        Complex64::from_polar(b.scale * e, self.wavenumber * b.tilt * x + b.phase)
    }

    pub fn coherent(&self, x: f64) -> f64 {
        (self.amplitude(Arm::R, x) + self.amplitude(Arm::T, x)).norm_sqr()
    }

    pub fn incoherent(&self, x: f64) -> f64 {
        self.amplitude(Arm::R, x).norm_sqr() + self.amplitude(Arm::T, x).norm_sqr()
    }

    /// Distance between adjacent fringes; infinite without a tilt difference.
    pub fn fringe_period(&self) -> f64 {
        let dt = (self.reflected.tilt - self.transmitted.tilt).abs();
        std::f64::consts::TAU / (self.wavenumber * dt)
    }

    /// Observation-plane interval holding essentially all of both spots.
    pub fn span(&self) -> (f64, f64) {
        let m = self.envelope.grid_margin() * self.width;
        let lo = self.reflected.center.min(self.transmitted.center) - m;
        let hi = self.reflected.center.max(self.transmitted.center) + m;
        (lo, hi)
    }
}

/// Sampled focal-plane field.
#[derive(Debug, Clone, PartialEq)]
pub struct FocalField {
    pub x_grid: Vec<f64>,
    pub amp_r: Vec<Complex64>,
    pub amp_t: Vec<Complex64>,
    pub envelope_kind: Envelope,
    /// Scale applied to arm intensities: `1 / (2 (I_R + I_T))`.
    pub normalization: f64,
}

/// Grid samples per fringe period used by [`synthesize_field`].
pub const SAMPLES_PER_FRINGE: f64 = 32.0;
/// Minimum acceptable sampling of a fringe period.
pub const MIN_SAMPLES_PER_FRINGE: f64 = 8.0;
const MAX_GRID_POINTS: usize = 1 << 21;

/// Sample the two-beam field on a grid resolving the fringes.
///
/// A statically blocked arm (`block_r`/`block_t`) has zero amplitude; a
/// chopping wheel is treated as open.
pub fn synthesize_field(cfg: &ApparatusConfig) -> Result<FocalField> {
    let model = TwoBeam::from_config(cfg, cfg.chopper.static_gate())?;
    let (lo, hi) = model.span();
    let period = model.fringe_period();
    let step_wanted = (period / SAMPLES_PER_FRINGE).min(model.width / 16.0);
    let n = (((hi - lo) / step_wanted).ceil() as usize + 1).max(2);
    // Odd count puts a node on the midpoint between the spots.
    let n = n.min(MAX_GRID_POINTS - 1) | 1;
    let step = (hi - lo) / (n - 1) as f64;
    if period.is_finite() && period / step < MIN_SAMPLES_PER_FRINGE {
        return Err(Error::Config(format!(
            "fringe period {period:.3e} m is under-resolved: grid step {step:.3e} m gives fewer \
             than {MIN_SAMPLES_PER_FRINGE} samples per fringe"
        )));
    }
    let x_grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let amp_r = x_grid.iter().map(|&x| model.amplitude(Arm::R, x)).collect();
    let amp_t = x_grid.iter().map(|&x| model.amplitude(Arm::T, x)).collect();
    let (i_r, i_t) = cfg.arm_intensities()?;
    Ok(FocalField {
        x_grid,
        amp_r,
        amp_t,
        envelope_kind: cfg.envelope,
        normalization: 0.5 / (i_r + i_t),
    })
}

impl FocalField {
    fn interpolate(&self, x: f64) -> Result<(Complex64, Complex64)> {
        let min = self.x_grid[0];
        let max = *self.x_grid.last().expect("grid has at least two samples");
        if !(min..=max).contains(&x) {
            return Err(Error::Range { x, min, max });
        }
        let step = (max - min) / (self.x_grid.len() - 1) as f64;
        let i = (((x - min) / step) as usize).min(self.x_grid.len() - 2);
        let f = (x - self.x_grid[i]) / (self.x_grid[i + 1] - self.x_grid[i]);
        let lerp = |a: &[Complex64]| a[i] * (1.0 - f) + a[i + 1] * f;
        Ok((lerp(&self.amp_r), lerp(&self.amp_t)))
    }

    /// `|amp_R(x) + amp_T(x)|²`, amplitudes interpolated linearly.
    pub fn coherent_intensity(&self, x: f64) -> Result<f64> {
        let (r, t) = self.interpolate(x)?;
        Ok((r + t).norm_sqr())
    }

    /// `|amp_R(x)|² + |amp_T(x)|²`.
    pub fn incoherent_intensity(&self, x: f64) -> Result<f64> {
        let (r, t) = self.interpolate(x)?;
        Ok(r.norm_sqr() + t.norm_sqr())
    }

    pub fn step(&self) -> f64 {
        self.x_grid[1] - self.x_grid[0]
    }
}

/// Free-function forms of the two intensity readouts.
pub fn coherent_intensity(field: &FocalField, x: f64) -> Result<f64> {
    field.coherent_intensity(x)
}

pub fn incoherent_intensity(field: &FocalField, x: f64) -> Result<f64> {
    field.incoherent_intensity(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apparatus::ChopperState;
    use proptest::prelude::*;

    fn superimposed() -> ApparatusConfig {
        ApparatusConfig {
            spot_center_r: 0.0,
            spot_center_t: 0.0,
            which_way_fibers: false,
            ..Default::default()
        }
    }

    fn peak(field: &FocalField, f: impl Fn(&FocalField, f64) -> f64) -> f64 {
        field
            .x_grid
            .iter()
            .map(|&x| f(field, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn balanced_superposition_peaks_at_one() {
        let field = synthesize_field(&superimposed()).unwrap();
        let p = peak(&field, |f, x| f.coherent_intensity(x).unwrap());
        assert!((p - 1.0).abs() < 1e-9, "peak {p}");
        assert!((field.coherent_intensity(0.0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_arm_peaks_at_quarter() {
        let mut cfg = superimposed();
        cfg.chopper = ChopperState::BlockT;
        let field = synthesize_field(&cfg).unwrap();
        let coh = field.coherent_intensity(0.0).unwrap();
        let inc = field.incoherent_intensity(0.0).unwrap();
        assert!((coh - 0.25).abs() < 1e-9, "{coh}");
        assert!((coh - inc).abs() < 1e-12);
    }

    #[test]
    fn half_wave_delay_nulls_the_center() {
        let mut cfg = superimposed();
        cfg.delay_opd = cfg.wavelength / 2.0;
        let field = synthesize_field(&cfg).unwrap();
        assert!(field.coherent_intensity(0.0).unwrap() < 1e-9);
    }

    #[test]
    fn constructive_destructive_and_single_readouts() {
        let a = Complex64::new(0.3, 0.0);
        let field = FocalField {
            x_grid: vec![0.0, 1.0],
            amp_r: vec![a, a],
            amp_t: vec![a, -a],
            envelope_kind: Envelope::Gaussian,
            normalization: 0.5,
        };
        assert!((field.coherent_intensity(0.0).unwrap() - 4.0 * 0.09).abs() < 1e-15);
        assert!(field.coherent_intensity(1.0).unwrap() < 1e-30);
        assert!((field.incoherent_intensity(0.0).unwrap() - 2.0 * 0.09).abs() < 1e-15);

        let single = FocalField {
            amp_t: vec![Complex64::new(0.0, 0.0); 2],
            ..field.clone()
        };
        assert!((single.coherent_intensity(0.5).unwrap() - 0.09).abs() < 1e-15);
        assert!((single.incoherent_intensity(0.5).unwrap() - 0.09).abs() < 1e-15);
        assert!(matches!(
            field.coherent_intensity(1.5),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn interpolation_is_on_amplitudes() {
        // opposite phasors: intensity interpolation would give 1 at the midpoint
        let field = FocalField {
            x_grid: vec![0.0, 1.0],
            amp_r: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            amp_t: vec![Complex64::new(0.0, 0.0); 2],
            envelope_kind: Envelope::Gaussian,
            normalization: 0.5,
        };
        assert!(field.coherent_intensity(0.5).unwrap() < 1e-30);
    }

    #[test]
    fn fringe_period_matches_tilt_difference() {
        let cfg = ApparatusConfig::default();
        let field = synthesize_field(&cfg).unwrap();
        let expected = cfg.wavelength / (cfg.tilt_r - cfg.tilt_t).abs();
        let mid = 0.5 * (cfg.spot_center_r + cfg.spot_center_t);
        // local maxima of the sampled pattern within a few fringes of the overlap center
        let i: Vec<f64> = field
            .x_grid
            .iter()
            .map(|&x| field.coherent_intensity(x).unwrap())
            .collect();
        let maxima: Vec<f64> = (1..i.len() - 1)
            .filter(|&j| i[j] > i[j - 1] && i[j] >= i[j + 1])
            .map(|j| {
                // parabolic refinement
                let (a, b, c) = (i[j - 1], i[j], i[j + 1]);
                field.x_grid[j] + 0.5 * field.step() * (a - c) / (a - 2.0 * b + c)
            })
            .filter(|x| (x - mid).abs() < 4.0 * expected)
            .collect();
        assert!(maxima.len() >= 6);
        for pair in maxima.windows(2) {
            let d = pair[1] - pair[0];
            assert!(
                (d / expected - 1.0).abs() < 0.01,
                "spacing {d} vs {expected}"
            );
        }
    }

    #[test]
    fn interference_redistributes_energy() {
        let cfg = ApparatusConfig::default();
        let field = synthesize_field(&cfg).unwrap();
        let h = field.step();
        let (mut coh, mut inc) = (0.0, 0.0);
        for &x in &field.x_grid {
            coh += field.coherent_intensity(x).unwrap() * h;
            inc += field.incoherent_intensity(x).unwrap() * h;
        }
        assert!((coh / inc - 1.0).abs() < 0.01);
    }

    #[test]
    fn coherent_never_exceeds_twice_incoherent() {
        let cfg = ApparatusConfig::default();
        let field = synthesize_field(&cfg).unwrap();
        for &x in field.x_grid.iter().step_by(7) {
            let c = field.coherent_intensity(x).unwrap();
            let i = field.incoherent_intensity(x).unwrap();
            assert!(c >= 0.0 && i >= 0.0);
            assert!(c <= 2.0 * i + 1e-15);
        }
    }

    #[test]
    fn phase_opposition_under_opd_sweep() {
        let mut cfg = superimposed();
        let lambda = cfg.wavelength;
        let mut sums = Vec::new();
        for k in 0..16 {
            let opd = lambda * k as f64 / 16.0;
            cfg.delay_opd = opd;
            let a = TwoBeam::from_config(&cfg, ArmGate::OPEN)
                .unwrap()
                .coherent(0.0);
            cfg.delay_opd = opd + lambda / 2.0;
            let b = TwoBeam::from_config(&cfg, ArmGate::OPEN)
                .unwrap()
                .coherent(0.0);
            sums.push(a + b);
        }
        for s in &sums {
            assert!((s - sums[0]).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn opd_periodicity(opd_frac in -2.0f64..2.0, x_frac in -1.0f64..1.0) {
            let mut cfg = ApparatusConfig::default();
            let x = x_frac * cfg.envelope_width;
            cfg.delay_opd = opd_frac * cfg.wavelength;
            let a = TwoBeam::from_config(&cfg, ArmGate::OPEN).unwrap().coherent(x);
            cfg.delay_opd += cfg.wavelength;
            let b = TwoBeam::from_config(&cfg, ArmGate::OPEN).unwrap().coherent(x);
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
