use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{EmissionStream, ModelKind};
use crate::apparatus::{place_detectors, ApparatusConfig, Arm, Detector, DetectorLayout};
use crate::detection::{HistogramSpec, Pickup, Quadratic};
use crate::error::Result;
use crate::numeric::integrate;
use crate::optics::{Envelope, PhaseLedger, TwoBeam};

/// Landing histogram bins per fringe period.
pub const BINS_PER_FRINGE: f64 = 16.0;

/// Everything the beamsplitter stage may read. The blocking device is
/// deliberately absent.
#[derive(Debug, Clone)]
pub struct EmissionContext {
    pub model: ModelKind,
    pub stream: EmissionStream,
    pub reflectance: f64,
    pub ledger_r: Arc<PhaseLedger>,
    pub ledger_t: Arc<PhaseLedger>,
}

impl EmissionContext {
    /// Beamsplitter outcome for one photon or quantum.
    pub fn draw_arm(&self, rng: &mut impl Rng) -> Arm {
        if rng.random::<f64>() < self.reflectance {
            Arm::R
        } else {
            Arm::T
        }
    }

    pub fn ledger(&self, arm: Arm) -> &Arc<PhaseLedger> {
        match arm {
            Arm::R => &self.ledger_r,
            Arm::T => &self.ledger_t,
        }
    }
}

/// Precomputed optics and detector overlaps for one configuration.
///
/// Patterns are expressed in the unit-energy arm modes
/// `u_j(x) = E((x − c_j)/w) e^{i(k tilt_j x + φ_j)} / sqrt(∫E²)`.
#[derive(Debug, Clone)]
pub struct SimContext {
    pub model: ModelKind,
    pub cfg: ApparatusConfig,
    pub layout: DetectorLayout,
    pub modes: TwoBeam,
    pub reflectance: f64,
    pub transmittance: f64,
    /// `∫ u_R ū_T dx`.
    pub overlap: Complex64,
    pub histogram: HistogramSpec,
    pickups: [Option<Pickup>; 4],
    bin_pickups: Vec<Pickup>,
    inv_sqrt_energy: f64,
}

impl SimContext {
    pub fn new(model: ModelKind, cfg: &ApparatusConfig) -> Result<Self> {
        cfg.validate()?;
        Self::with_layout(model, cfg, place_detectors(cfg)?)
    }

    /// Keep fibers where `layout` put them instead of placing them on this
    /// configuration's pattern.
    pub fn with_layout(
        model: ModelKind,
        cfg: &ApparatusConfig,
        layout: DetectorLayout,
    ) -> Result<Self> {
        cfg.validate()?;
        let modes = TwoBeam::unit_modes(cfg)?;
        let (reflectance, transmittance) = cfg.arm_intensities()?;
        let (lo, hi) = modes.span();
        let bin_width = modes.fringe_period() / BINS_PER_FRINGE;
        let histogram = HistogramSpec {
            x_min: lo,
            bin_width,
            n_bins: ((hi - lo) / bin_width).ceil() as usize,
        };
        let mut ctx = Self {
            model,
            cfg: cfg.clone(),
            layout,
            modes,
            reflectance,
            transmittance,
            overlap: Complex64::new(0.0, 0.0),
            histogram,
            pickups: [None; 4],
            bin_pickups: Vec::new(),
            inv_sqrt_energy: 1.0 / cfg.envelope.energy(cfg.envelope_width).sqrt(),
        };
        for d in Detector::ALL {
            ctx.pickups[d.index()] = layout.position(d).map(|x| {
                let (a, b) = layout.pickup(x);
                ctx.integrate_pickup(a, b, 2)
            });
        }
        ctx.bin_pickups = (0..histogram.n_bins)
            .map(|i| {
                let (a, b) = histogram.edges(i);
                ctx.integrate_pickup(a, b, 1)
            })
            .collect();
        ctx.overlap = ctx.bin_pickups.iter().map(|p| p.rt).sum();
        Ok(ctx)
    }

    pub fn emission_context(&self, stream: EmissionStream) -> EmissionContext {
        let (r, t) = self.cfg.arm_ledgers();
        EmissionContext {
            model: self.model,
            stream,
            reflectance: self.reflectance,
            ledger_r: Arc::new(r),
            ledger_t: Arc::new(t),
        }
    }

    fn integrate_pickup(&self, a: f64, b: f64, panels: usize) -> Pickup {
        let rr = integrate(|x| self.unit_mode(Arm::R, x).norm_sqr(), a, b, panels);
        let tt = integrate(|x| self.unit_mode(Arm::T, x).norm_sqr(), a, b, panels);
        let rt = integrate(
            |x| self.unit_mode(Arm::R, x) * self.unit_mode(Arm::T, x).conj(),
            a,
            b,
            panels,
        );
        Pickup { rr, tt, rt }
    }

    /// Unit-energy mode of `arm` at `x`.
    pub fn unit_mode(&self, arm: Arm, x: f64) -> Complex64 {
        self.modes.amplitude(arm, x) * self.inv_sqrt_energy
    }

    pub fn arm_intensity(&self, arm: Arm) -> f64 {
        match arm {
            Arm::R => self.reflectance,
            Arm::T => self.transmittance,
        }
    }

    /// Overlap integrals of the fiber at `d`, if that fiber exists.
    pub fn pickup(&self, d: Detector) -> Option<&Pickup> {
        self.pickups[d.index()].as_ref()
    }

    /// Overlaps over the whole observation plane.
    pub fn whole_plane(&self) -> Pickup {
        Pickup {
            rr: 1.0,
            tt: 1.0,
            rt: self.overlap,
        }
    }

    /// Value of the pattern `q` at `x`.
    pub fn pattern(&self, q: &Quadratic, x: f64) -> f64 {
        let ur = self.unit_mode(Arm::R, x);
        let ut = self.unit_mode(Arm::T, x);
        let rt = Complex64::new(q.rt_re, q.rt_im) * ur * ut.conj();
        (q.rr * ur.norm_sqr() + q.tt * ut.norm_sqr() + 2.0 * rt.re).max(0.0)
    }

    /// Pattern of a single photon split between both arms with amplitudes
    /// `sqrt(R)`, `sqrt(T)`, normalized to unit integral.
    pub fn coherent_density(&self) -> Quadratic {
        let q = Quadratic::of_field(
            Complex64::new(self.reflectance.sqrt(), 0.0),
            Complex64::new(self.transmittance.sqrt(), 0.0),
        );
        q.scaled(1.0 / q.apply(&self.whole_plane()))
    }

    /// Unit-integral pattern of one arm alone.
    pub fn arm_density(arm: Arm) -> Quadratic {
        match arm {
            Arm::R => Quadratic {
                rr: 1.0,
                ..Default::default()
            },
            Arm::T => Quadratic {
                tt: 1.0,
                ..Default::default()
            },
        }
    }

    /// Draw a landing position from `|u_arm|²`.
    pub fn sample_arm(&self, arm: Arm, rng: &mut impl Rng) -> f64 {
        let c = self.modes.beam(arm).center;
        let w = self.modes.width;
        match self.modes.envelope {
            Envelope::Gaussian => {
                let z: f64 = rng.sample(StandardNormal);
                c + w * std::f64::consts::FRAC_1_SQRT_2 * z
            }
            Envelope::Sinc => loop {
                let u = if rng.random::<bool>() {
                    rng.random_range(-1.0..1.0)
                } else {
                    let v = 1.0 - rng.random::<f64>();
                    if rng.random::<bool>() {
                        1.0 / v
                    } else {
                        -1.0 / v
                    }
                };
                let bound = if u.abs() <= 1.0 { 1.0 } else { 1.0 / (u * u) };
                if rng.random::<f64>() * bound < Envelope::Sinc.amplitude(u).powi(2) {
                    break c + w * u;
                }
            },
        }
    }

    /// Draw a landing position from the pattern `q`, which must be the
    /// pattern of a single field `a_R u_R + a_T u_T`.
    ///
    /// Proposals come from the mixture `|a_R|²|u_R|² + |a_T|²|u_T|²` and are
    /// accepted with probability `q(x) / (2·mixture(x)) ≤ 1`.
    pub fn sample_pattern(&self, q: &Quadratic, rng: &mut impl Rng) -> f64 {
        let total = q.rr + q.tt;
        debug_assert!(total > 0.0, "sampling an empty pattern");
        if q.rt_re == 0.0 && q.rt_im == 0.0 {
            let arm = if rng.random::<f64>() * total < q.rr {
                Arm::R
            } else {
                Arm::T
            };
            return self.sample_arm(arm, rng);
        }
        loop {
            let arm = if rng.random::<f64>() * total < q.rr {
                Arm::R
            } else {
                Arm::T
            };
            let x = self.sample_arm(arm, rng);
            let mixture = q.rr * self.unit_mode(Arm::R, x).norm_sqr()
                + q.tt * self.unit_mode(Arm::T, x).norm_sqr();
            if mixture > 0.0 && rng.random::<f64>() * 2.0 * mixture < self.pattern(q, x) {
                return x;
            }
        }
    }

    /// Histogram the pattern `q` would fill in expectation.
    pub fn expected_histogram(&self, q: &Quadratic) -> Vec<f64> {
        self.bin_pickups
            .iter()
            .map(|p| q.apply(p).max(0.0))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_modes_have_unit_energy() {
        let ctx = SimContext::new(ModelKind::Wave, &ApparatusConfig::default()).unwrap();
        let p = ctx.whole_plane();
        let sum_rr: f64 = ctx.bin_pickups.iter().map(|p| p.rr).sum();
        let sum_tt: f64 = ctx.bin_pickups.iter().map(|p| p.tt).sum();
        assert!((sum_rr - 1.0).abs() < 1e-9);
        assert!((sum_tt - 1.0).abs() < 1e-9);
        assert!(p.rt.norm() < 1e-6);
        let z = ctx.coherent_density().apply(&p);
        assert!((z - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sinc_sampler_matches_density() {
        let mut cfg = ApparatusConfig::default();
        cfg.envelope = Envelope::Sinc;
        cfg.spot_center_r = -6.0 * cfg.envelope_width;
        cfg.spot_center_t = 6.0 * cfg.envelope_width;
        let ctx = SimContext::new(ModelKind::Particle, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = ctx.modes.reflected.center;
        let w = cfg.envelope_width;
        let n = 200_000;
        let inside = (0..n)
            .filter(|_| (ctx.sample_arm(Arm::R, &mut rng) - c).abs() < w)
            .count() as f64
            / n as f64;
        // ∫_{-1}^{1} sinc² / π
        let expect: f64 =
            integrate(|u| Envelope::Sinc.amplitude(u).powi(2), -1.0, 1.0, 8) / std::f64::consts::PI;
        let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!(
            (inside - expect).abs() < 4.0 * sigma,
            "{inside} vs {expect}"
        );
    }
}
