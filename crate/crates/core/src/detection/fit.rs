//! Least-squares fringe fits.

use nalgebra::{DMatrix, DVector};

use super::summary::HistogramSpec;
use crate::apparatus::Arm;
use crate::error::{Error, Result};
use crate::numeric::{golden_section_min, integrate};
use crate::optics::TwoBeam;

/// Bin-averaged basis functions of the two-beam pattern:
/// `E_R²`, `E_T²`, `E_R E_T cos(κx)`, `E_R E_T sin(κx)` with `κ = 2π/Λ`
/// fixed by the configured tilts.
///
/// When the spots coincide the two envelope columns are identical and are
/// merged into one.
#[derive(Debug, Clone)]
pub struct FitBasis {
    columns: Vec<Vec<f64>>,
    merged: bool,
    bins_per_fringe: f64,
}

impl FitBasis {
    pub fn new(modes: &TwoBeam, spec: HistogramSpec) -> Self {
        let kappa = modes.wavenumber * (modes.reflected.tilt - modes.transmitted.tilt);
        let env = |arm: Arm, x: f64| {
            let b = modes.beam(arm);
            modes.envelope.amplitude((x - b.center) / modes.width)
        };
        let merged =
            (modes.reflected.center - modes.transmitted.center).abs() <= 1e-9 * modes.width;
        let mut columns = vec![Vec::with_capacity(spec.n_bins); if merged { 3 } else { 4 }];
        for i in 0..spec.n_bins {
            let (a, b) = spec.edges(i);
            let avg = |f: &dyn Fn(f64) -> f64| integrate(f, a, b, 1) / spec.bin_width;
            let er2 = avg(&|x| env(Arm::R, x).powi(2));
            let et2 = avg(&|x| env(Arm::T, x).powi(2));
            let c = avg(&|x| env(Arm::R, x) * env(Arm::T, x) * (kappa * x).cos());
            let s = avg(&|x| env(Arm::R, x) * env(Arm::T, x) * (kappa * x).sin());
            if merged {
                columns[0].push(er2);
                columns[1].push(c);
                columns[2].push(s);
            } else {
                columns[0].push(er2);
                columns[1].push(et2);
                columns[2].push(c);
                columns[3].push(s);
            }
        }
        let period = modes.fringe_period();
        Self {
            columns,
            merged,
            bins_per_fringe: period / spec.bin_width,
        }
    }
}

const IRLS_ROUNDS: usize = 4;

/// Minimum number of events for a meaningful fit.
pub const MIN_FIT_EVENTS: f64 = 1e3;

/// Fit `A_R E_R² + A_T E_T² + E_R E_T (B cos κx + C sin κx)` to a landing
/// histogram by Poisson-weighted least squares and return the two-beam visibility `√(B² + C²) / (A_R + A_T)`,
/// clamped to `[0, 1]`.
pub fn visibility_fit(histogram: &[f64], basis: &FitBasis) -> Result<f64> {
    if basis.bins_per_fringe < 8.0 {
        return Err(Error::FitFailure(format!(
            "only {:.1} bins per fringe period (need 8)",
            basis.bins_per_fringe
        )));
    }
    let total: f64 = histogram.iter().sum();
    if total < MIN_FIT_EVENTS {
        return Err(Error::FitFailure(format!(
            "{total} events in the histogram (need {MIN_FIT_EVENTS})"
        )));
    }
    let n = histogram.len();
    let k = basis.columns.len();
    let design = DMatrix::from_fn(n, k, |i, j| basis.columns[j][i]);
    let y = DVector::from_column_slice(histogram);
    let solve = |weights: Option<&DVector<f64>>| {
        let (a, b) = match weights {
            None => (design.clone(), y.clone()),
            Some(w) => (
                DMatrix::from_fn(n, k, |i, j| design[(i, j)] * w[i]),
                y.component_mul(w),
            ),
        };
        a.svd(true, true)
            .solve(&b, 1e-12)
            .map_err(|e| Error::FitFailure(e.to_string()))
    };
    // Reweighting by 1/fit converges to the Poisson maximum-likelihood
    // estimate, which uses the near-empty fringe minima far better than
    // plain least squares does.
    let mut coef = solve(None)?;
    for _ in 0..IRLS_ROUNDS {
        let fitted = &design * &coef;
        let peak = fitted.max().max(1e-300);
        let floor = (1e-3 * peak).max(f64::MIN_POSITIVE);
        let w = fitted.map(|v| 1.0 / v.max(floor).sqrt());
        coef = solve(Some(&w))?;
    }
    let fitted = &design * &coef;
    let residual = (&y - &fitted).norm();
    let poisson = fitted.iter().map(|v| v.max(0.0)).sum::<f64>().sqrt();
    if residual > 5.0 * poisson.max(1.0) {
        return Err(Error::FitFailure(format!(
            "residual norm {residual:.3} exceeds 5× the Poisson expectation {poisson:.3}"
        )));
    }
    let (a, b, c) = if basis.merged {
        (coef[0], coef[1], coef[2])
    } else {
        (coef[0] + coef[1], coef[2], coef[3])
    };
    if a <= 0.0 {
        return Err(Error::FitFailure(
            "non-positive fitted background".to_string(),
        ));
    }
    Ok(((b * b + c * c).sqrt() / a).clamp(0.0, 1.0))
}

/// Result of fitting `offset + amplitude cos(2πx/period + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    pub period: f64,
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub sse: f64,
}

fn sinusoid_at(xs: &[f64], ys: &[f64], period: f64) -> SinusoidFit {
    let w = std::f64::consts::TAU / period;
    let design = DMatrix::from_fn(xs.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => (w * xs[i]).cos(),
        _ => (w * xs[i]).sin(),
    });
    let y = DVector::from_column_slice(ys);
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(3));
    let sse = (&y - &design * &coef).norm_squared();
    SinusoidFit {
        period,
        offset: coef[0],
        amplitude: coef[1].hypot(coef[2]),
        phase: (-coef[2]).atan2(coef[1]),
        sse,
    }
}

/// Least-squares sinusoid with free period searched on `[period_lo, period_hi]`.
pub fn fit_sinusoid(xs: &[f64], ys: &[f64], period_lo: f64, period_hi: f64) -> Result<SinusoidFit> {
    if xs.len() != ys.len() || xs.len() < 4 {
        return Err(Error::FitFailure(
            "sinusoid fit needs at least four points".to_string(),
        ));
    }
    let steps = 400;
    let ratio = (period_hi / period_lo).ln();
    let grid: Vec<f64> = (0..=steps)
        .map(|i| period_lo * (ratio * i as f64 / steps as f64).exp())
        .collect();
    let best = (0..=steps)
        .min_by(|&a, &b| {
            sinusoid_at(xs, ys, grid[a])
                .sse
                .total_cmp(&sinusoid_at(xs, ys, grid[b]).sse)
        })
        .expect("non-empty grid");
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(steps)];
    let p = golden_section_min(|p| sinusoid_at(xs, ys, p).sse, lo, hi, period_lo * 1e-9);
    Ok(sinusoid_at(xs, ys, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apparatus::{ApparatusConfig, ArmGate};

    fn expected_hist(cfg: &ApparatusConfig, scale: f64) -> (Vec<f64>, FitBasis) {
        let model = TwoBeam::from_config(cfg, ArmGate::OPEN).unwrap();
        let (lo, hi) = model.span();
        let bw = model.fringe_period() / 16.0;
        let spec = HistogramSpec {
            x_min: lo,
            bin_width: bw,
            n_bins: ((hi - lo) / bw).ceil() as usize,
        };
        let hist = (0..spec.n_bins)
            .map(|i| {
                let (a, b) = spec.edges(i);
                scale * integrate(|x| model.coherent(x), a, b, 1)
            })
            .collect();
        (
            hist,
            FitBasis::new(&TwoBeam::unit_modes(cfg).unwrap(), spec),
        )
    }

    #[test]
    fn balanced_pattern_fits_unit_visibility() {
        let cfg = ApparatusConfig::default();
        let (hist, basis) = expected_hist(&cfg, 1e9);
        let v = visibility_fit(&hist, &basis).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn unbalanced_pattern_fits_two_root_rt() {
        let mut cfg = ApparatusConfig::default();
        cfg.incidence_angle =
            crate::apparatus::incidence_for_reflectance(1.0, 1.5, cfg.polarization, 0.8).unwrap();
        let (hist, basis) = expected_hist(&cfg, 1e9);
        let v = visibility_fit(&hist, &basis).unwrap();
        assert!((v - 0.8).abs() < 1e-6, "{v}");
    }

    #[test]
    fn superimposed_spots_use_merged_basis() {
        let mut cfg = ApparatusConfig::default();
        cfg.spot_center_r = 0.0;
        cfg.spot_center_t = 0.0;
        cfg.which_way_fibers = false;
        cfg.delay_opd = cfg.wavelength / 3.0;
        let (hist, basis) = expected_hist(&cfg, 1e9);
        assert!(basis.merged);
        let v = visibility_fit(&hist, &basis).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn too_few_events_is_a_failure() {
        let cfg = ApparatusConfig::default();
        let (hist, basis) = expected_hist(&cfg, 1.0);
        assert!(matches!(
            visibility_fit(&hist, &basis),
            Err(Error::FitFailure(_))
        ));
    }

    #[test]
    fn sinusoid_period_recovered() {
        let xs: Vec<f64> = (0..64).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 2.0 + 0.7 * (std::f64::consts::TAU * x / 1.3 + 0.4).cos())
            .collect();
        let f = fit_sinusoid(&xs, &ys, 0.5, 3.0).unwrap();
        assert!((f.period - 1.3).abs() < 1e-6);
        assert!((f.amplitude - 0.7).abs() < 1e-6);
        assert!((f.offset - 2.0).abs() < 1e-6);
    }
}
