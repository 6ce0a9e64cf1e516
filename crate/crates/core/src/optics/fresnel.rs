//! Reflection and transmission at a planar dielectric interface.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear polarization relative to the plane of incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    /// Electric field perpendicular to the plane of incidence.
    S,
    /// Electric field in the plane of incidence.
    P,
}

impl Polarization {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarization::S => "s",
            Polarization::P => "p",
        }
    }
}

/// Amplitude and energy coefficients for one interface crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelResult {
    /// Signed reflection amplitude.
    pub r_amp: f64,
    /// Transmission amplitude.
    pub t_amp: f64,
    /// Reflected fraction of the incident energy flux, `r_amp²`.
    pub reflectance: f64,
    /// Transmitted fraction of the energy flux, from the impedance-weighted
    /// transmission amplitude.
    pub transmittance: f64,
}

/// Fresnel coefficients for light going from index `n1` into index `n2`.
///
/// The transmittance is computed from `t_amp` through the flux factor
/// `n2 cos θt / (n1 cos θi)`, so `reflectance + transmittance = 1` holds
/// as a consequence of the two formulas rather than by construction.
pub fn fresnel(n1: f64, n2: f64, incidence: f64, pol: Polarization) -> Result<FresnelResult> {
    if !(n1 > 0.0 && n2 > 0.0) || !n1.is_finite() || !n2.is_finite() {
        return Err(Error::Domain(format!(
            "refractive indices must be positive, got n1 = {n1}, n2 = {n2}"
        )));
    }
    if !(0.0..FRAC_PI_2).contains(&incidence) {
        return Err(Error::Domain(format!(
            "incidence angle {incidence} rad outside [0, π/2)"
        )));
    }
    let (sin_i, cos_i) = incidence.sin_cos();
    let sin_t = n1 * sin_i / n2;
    if sin_t >= 1.0 {
        return Err(Error::Domain(format!(
            "total internal reflection: n1 sin θ = {:.6} ≥ n2 = {n2}",
            n1 * sin_i
        )));
    }
    let cos_t = (1.0 - sin_t * sin_t).sqrt();

    let (r_amp, t_amp) = match pol {
        Polarization::S => {
            let den = n1 * cos_i + n2 * cos_t;
            ((n1 * cos_i - n2 * cos_t) / den, 2.0 * n1 * cos_i / den)
        }
        Polarization::P => {
            let den = n2 * cos_i + n1 * cos_t;
            ((n2 * cos_i - n1 * cos_t) / den, 2.0 * n1 * cos_i / den)
        }
    };
    let flux = (n2 * cos_t) / (n1 * cos_i);
    Ok(FresnelResult {
        r_amp,
        t_amp,
        reflectance: r_amp * r_amp,
        transmittance: flux * t_amp * t_amp,
    })
}

/// Angle at which p-polarized reflectance vanishes.
pub fn brewster_angle(n1: f64, n2: f64) -> f64 {
    (n2 / n1).atan()
}
