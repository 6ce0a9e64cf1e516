//! Parameter sweeps, one run per value with derived seeds.

use super::{derive_seed, run_in, RunResult, RunSpec};
use crate::apparatus::place_detectors;
use crate::error::{Error, Result};
use crate::models::{ModelKind, SimContext, SourceKind};

/// Swept quantity. Values are in SI units: meters of delay-line path,
/// mean quanta per window, radians of tilt difference, radians of incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Opd,
    Flux,
    Tilt,
    Incidence,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 4] = [
        SweepVariable::Opd,
        SweepVariable::Flux,
        SweepVariable::Tilt,
        SweepVariable::Incidence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Opd => "opd",
            SweepVariable::Flux => "flux",
            SweepVariable::Tilt => "tilt",
            SweepVariable::Incidence => "incidence",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Validation {
                key: "sweep".into(),
                message: format!("unsupported sweep variable `{s}` (opd, flux, tilt, incidence)"),
            })
    }

    /// Whether the fibers stay where the base configuration put them.
    pub fn keeps_layout(self) -> bool {
        matches!(self, SweepVariable::Opd | SweepVariable::Flux)
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub result: RunResult,
    /// W1 counts per window.
    pub intensity_w1: f64,
}

/// One run per value. OPD and flux sweeps keep the fibers fixed at the
/// positions found for the base configuration; tilt and incidence sweeps
/// re-place them on every pattern.
pub fn sweep(spec: &RunSpec, var: SweepVariable, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.len() < 2 {
        return Err(Error::Validation {
            key: "steps".into(),
            message: format!("a sweep needs at least two values, got {}", values.len()),
        });
    }
    if var == SweepVariable::Flux && spec.model != ModelKind::LightQuanta {
        return Err(Error::ModelMismatch(format!(
            "flux sweeps need the light_quanta model, not {}",
            spec.model
        )));
    }
    spec.validate()?;
    let base_layout = place_detectors(&spec.cfg)?;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut s = spec.clone();
            s.seed = derive_seed(spec.seed, i as u64);
            match var {
                SweepVariable::Opd => s.cfg.delay_opd = v,
                SweepVariable::Flux => s.stream.source = SourceKind::Poissonian { mean: v },
                SweepVariable::Tilt => {
                    let mean = 0.5 * (s.cfg.tilt_r + s.cfg.tilt_t);
                    s.cfg.tilt_r = mean + 0.5 * v;
                    s.cfg.tilt_t = mean - 0.5 * v;
                }
                SweepVariable::Incidence => s.cfg.incidence_angle = v,
            }
            let ctx = if var.keeps_layout() {
                SimContext::with_layout(s.model, &s.cfg, base_layout)?
            } else {
                SimContext::new(s.model, &s.cfg)?
            };
            let result = run_in(&s, &ctx)?;
            let intensity_w1 = result.summary.counts.w1 / result.summary.n_windows as f64;
            Ok(SweepPoint {
                value: v,
                result,
                intensity_w1,
            })
        })
        .collect()
}

pub fn sweep_opd(spec: &RunSpec, opd_values: &[f64]) -> Result<Vec<SweepPoint>> {
    sweep(spec, SweepVariable::Opd, opd_values)
}

pub fn sweep_flux(spec: &RunSpec, mu_values: &[f64]) -> Result<Vec<SweepPoint>> {
    if let Some(&bad) = mu_values.iter().find(|&&m| !(m > 0.0 && m.is_finite())) {
        return Err(Error::Validation {
            key: "mean_per_window".into(),
            message: format!("flux values must be positive, got {bad}"),
        });
    }
    sweep(spec, SweepVariable::Flux, mu_values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CountMode;

    #[test]
    fn flux_sweep_needs_light_quanta() {
        let spec = RunSpec::new(ModelKind::Particle, 1);
        assert!(matches!(
            sweep_flux(&spec, &[0.1, 1.0]),
            Err(Error::ModelMismatch(_))
        ));
    }

    #[test]
    fn empty_sweep_is_rejected() {
        let spec = RunSpec::new(ModelKind::Wave, 1);
        assert!(matches!(
            sweep_opd(&spec, &[]),
            Err(Error::Validation { .. })
        ));
        assert!(SweepVariable::parse("color").is_err());
    }

    #[test]
    fn wave_w1_follows_cos_squared() {
        let mut spec = RunSpec::new(ModelKind::Wave, 5);
        spec.stream.n_windows = 2000;
        spec.count_mode = CountMode::Exact;
        let lambda = spec.cfg.wavelength;
        let pts = sweep_opd(&spec, &[0.0, lambda / 4.0, lambda / 2.0]).unwrap();
        let i0 = pts[0].intensity_w1;
        let rel: Vec<f64> = pts.iter().map(|p| p.intensity_w1 / i0).collect();
        assert!((rel[1] - 0.5).abs() < 0.02, "{rel:?}");
        assert!(rel[2] < 0.02, "{rel:?}");
    }
}
