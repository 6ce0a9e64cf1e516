//! Complex amplitudes, interface physics, phase ledgers and the focal-plane field.

pub mod field;
pub mod fresnel;
pub mod ledger;

/// Complex field amplitude; coherent summation is plain addition.
pub type ComplexAmp = num_complex::Complex64;

pub use field::{
    coherent_intensity, incoherent_intensity, synthesize_field, Beam, Envelope, FocalField, TwoBeam,
};
pub use fresnel::{brewster_angle, fresnel, FresnelResult, Polarization};
pub use ledger::{ledger_phase, PathEvent, PhaseLedger};

#[cfg(test)]
mod tests {
    use super::ComplexAmp;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn unit_phasor_preserves_magnitude(
            re in -1e3f64..1e3,
            im in -1e3f64..1e3,
            phase in -100.0f64..100.0,
        ) {
            let a = ComplexAmp::new(re, im);
            let b = a * ComplexAmp::from_polar(1.0, phase);
            let m = a.norm_sqr();
            prop_assert!(m >= 0.0);
            prop_assert!((b.norm_sqr() - m).abs() <= 1e-12 * m.max(f64::MIN_POSITIVE));
        }
    }
}
