//! Per-window outcomes and their associative accumulation.

use num_complex::Complex64;
use serde::Serialize;

use crate::apparatus::{Arm, Detector};

/// Coefficients of `c_rr |u_R|² + c_tt |u_T|² + 2 Re(c_rt u_R ū_T)`, the
/// expected intensity pattern contributed by a window when counts are
/// reported as exact means.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Quadratic {
    pub rr: f64,
    pub tt: f64,
    pub rt_re: f64,
    pub rt_im: f64,
}

impl Quadratic {
    /// Pattern of the field `a_r u_R + a_t u_T`.
    pub fn of_field(a_r: Complex64, a_t: Complex64) -> Self {
        let rt = a_r * a_t.conj();
        Self {
            rr: a_r.norm_sqr(),
            tt: a_t.norm_sqr(),
            rt_re: rt.re,
            rt_im: rt.im,
        }
    }

    pub fn scaled(self, k: f64) -> Self {
        Self {
            rr: self.rr * k,
            tt: self.tt * k,
            rt_re: self.rt_re * k,
            rt_im: self.rt_im * k,
        }
    }

    pub fn add(&mut self, other: &Quadratic) {
        self.rr += other.rr;
        self.tt += other.tt;
        self.rt_re += other.rt_re;
        self.rt_im += other.rt_im;
    }

    pub fn is_zero(&self) -> bool {
        self.rr == 0.0 && self.tt == 0.0 && self.rt_re == 0.0 && self.rt_im == 0.0
    }

    /// Apply to integrals `(∫|u_R|², ∫|u_T|², ∫u_R ū_T)` over some interval.
    pub fn apply(&self, p: &Pickup) -> f64 {
        let rt = Complex64::new(self.rt_re, self.rt_im) * p.rt;
        self.rr * p.rr + self.tt * p.tt + 2.0 * rt.re
    }
}

/// Mode-overlap integrals over one interval of the observation plane.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Pickup {
    pub rr: f64,
    pub tt: f64,
    pub rt: Complex64,
}

/// Fixed binning of landing positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramSpec {
    pub x_min: f64,
    pub bin_width: f64,
    pub n_bins: usize,
}

impl HistogramSpec {
    pub fn bin(&self, x: f64) -> Option<usize> {
        let u = (x - self.x_min) / self.bin_width;
        if u >= 0.0 && u < self.n_bins as f64 {
            Some(u as usize)
        } else {
            None
        }
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + self.bin_width * (i as f64 + 0.5)
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let a = self.x_min + self.bin_width * i as f64;
        (a, a + self.bin_width)
    }
}

/// Counts per detector, in the order P1, P2, W1, W2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DetectorCounts {
    pub p1: f64,
    pub p2: f64,
    pub w1: f64,
    pub w2: f64,
}

impl DetectorCounts {
    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            p1: a[0],
            p2: a[1],
            w1: a[2],
            w2: a[3],
        }
    }

    pub fn get(&self, d: Detector) -> f64 {
        match d {
            Detector::P1 => self.p1,
            Detector::P2 => self.p2,
            Detector::W1 => self.w1,
            Detector::W2 => self.w2,
        }
    }

    fn add(&mut self, o: &DetectorCounts) {
        self.p1 += o.p1;
        self.p2 += o.p2;
        self.w1 += o.w1;
        self.w2 += o.w2;
    }
}

/// Arm tags carried by detected events.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ArmTally {
    pub r: u64,
    pub t: u64,
}

impl ArmTally {
    pub fn record(&mut self, arm: Arm) {
        match arm {
            Arm::R => self.r += 1,
            Arm::T => self.t += 1,
        }
    }
}

/// What a single emission window left at the detectors.
///
/// `counts` are clicks in sampled mode and expected photon numbers in exact
/// mode. `attribution` sums, over P-fiber counts, the distinguishability
/// `|p(R|event) − p(T|event)|` weighted by the count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindowOutcome {
    pub counts: [f64; 4],
    pub landings: Vec<f64>,
    pub expected: Quadratic,
    pub attribution_weight: f64,
    pub attribution: f64,
    pub tags: ArmTally,
    pub quanta_emitted: u64,
    pub photons_detected: f64,
}

impl WindowOutcome {
    pub fn add_count(&mut self, d: Detector, amount: f64, distinguishability: f64) {
        self.counts[d.index()] += amount;
        if matches!(d, Detector::P1 | Detector::P2) {
            self.attribution_weight += amount;
            self.attribution += amount * distinguishability;
        }
    }
}

/// Totals over any number of windows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionSummary {
    pub counts: DetectorCounts,
    pub n_windows: u64,
    pub coincidences_p1p2: u64,
    pub singles_gates: u64,
    pub ledger_tags: ArmTally,
    pub attribution_weight: f64,
    pub attribution: f64,
    pub quanta_emitted: u64,
    pub photons_detected: f64,
    pub photons_detected_sq: f64,
    #[serde(skip)]
    pub histogram_spec: HistogramSpec,
    #[serde(skip)]
    pub histogram: Vec<f64>,
    #[serde(skip)]
    pub expected: Quadratic,
}

impl DetectionSummary {
    pub fn empty(spec: HistogramSpec) -> Self {
        Self {
            counts: DetectorCounts::default(),
            n_windows: 0,
            coincidences_p1p2: 0,
            singles_gates: 0,
            ledger_tags: ArmTally::default(),
            attribution_weight: 0.0,
            attribution: 0.0,
            quanta_emitted: 0,
            photons_detected: 0.0,
            photons_detected_sq: 0.0,
            histogram_spec: spec,
            histogram: vec![0.0; spec.n_bins],
            expected: Quadratic::default(),
        }
    }

    /// Fold one window in. Every window is a coincidence gate.
    pub fn record(&mut self, w: &WindowOutcome) {
        let c = DetectorCounts::from_array(w.counts);
        self.counts.add(&c);
        self.n_windows += 1;
        self.singles_gates += 1;
        if c.p1 >= 1.0 && c.p2 >= 1.0 {
            self.coincidences_p1p2 += 1;
        }
        self.ledger_tags.r += w.tags.r;
        self.ledger_tags.t += w.tags.t;
        self.attribution_weight += w.attribution_weight;
        self.attribution += w.attribution;
        self.quanta_emitted += w.quanta_emitted;
        self.photons_detected += w.photons_detected;
        self.photons_detected_sq += w.photons_detected * w.photons_detected;
        for &x in &w.landings {
            if let Some(b) = self.histogram_spec.bin(x) {
                self.histogram[b] += 1.0;
            }
        }
        self.expected.add(&w.expected);
    }

    /// Elementwise sum of two summaries over the same binning.
    pub fn merge(mut self, other: &DetectionSummary) -> Self {
        assert_eq!(
            self.histogram_spec, other.histogram_spec,
            "summaries use different histogram binning"
        );
        self.counts.add(&other.counts);
        self.n_windows += other.n_windows;
        self.coincidences_p1p2 += other.coincidences_p1p2;
        self.singles_gates += other.singles_gates;
        self.ledger_tags.r += other.ledger_tags.r;
        self.ledger_tags.t += other.ledger_tags.t;
        self.attribution_weight += other.attribution_weight;
        self.attribution += other.attribution;
        self.quanta_emitted += other.quanta_emitted;
        self.photons_detected += other.photons_detected;
        self.photons_detected_sq += other.photons_detected_sq;
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        self.expected.add(&other.expected);
        self
    }
}

/// Fold a sequence of window outcomes into a summary.
pub fn accumulate<'a>(
    spec: HistogramSpec,
    windows: impl IntoIterator<Item = &'a WindowOutcome>,
) -> DetectionSummary {
    let mut s = DetectionSummary::empty(spec);
    for w in windows {
        s.record(w);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SPEC: HistogramSpec = HistogramSpec {
        x_min: -1.0,
        bin_width: 0.25,
        n_bins: 8,
    };

    #[test]
    fn empty_stream_is_all_zero() {
        let s = accumulate(SPEC, []);
        assert_eq!(s.counts, DetectorCounts::default());
        assert_eq!(s.n_windows, 0);
        assert!(s.histogram.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn single_p1_event() {
        let mut w = WindowOutcome::default();
        w.add_count(Detector::P1, 1.0, 1.0);
        w.landings.push(-0.9);
        let s = accumulate(SPEC, [&w]);
        assert_eq!(s.counts.p1, 1.0);
        assert_eq!((s.counts.p2, s.counts.w1, s.counts.w2), (0.0, 0.0, 0.0));
        assert_eq!(s.histogram[0], 1.0);
        assert_eq!(s.coincidences_p1p2, 0);
        assert!(s.coincidences_p1p2 as f64 <= s.counts.p1.min(s.counts.p2));
    }

    #[test]
    fn out_of_range_landings_are_dropped() {
        let w = WindowOutcome {
            landings: vec![-2.0, 1.0, 0.999],
            ..Default::default()
        };
        let s = accumulate(SPEC, [&w]);
        assert_eq!(s.histogram.iter().sum::<f64>(), 1.0);
    }

    fn outcome() -> impl Strategy<Value = WindowOutcome> {
        (
            prop::array::uniform4(0u8..4),
            prop::collection::vec(-1.2f64..1.2, 0..4),
            0u8..3,
            0u8..3,
            0u8..5,
        )
            .prop_map(|(c, landings, r, t, q)| {
                let mut w = WindowOutcome {
                    landings,
                    tags: ArmTally {
                        r: r as u64,
                        t: t as u64,
                    },
                    quanta_emitted: q as u64,
                    photons_detected: f64::from(c.iter().map(|&v| v as u32).sum::<u32>()),
                    ..Default::default()
                };
                for (d, v) in Detector::ALL.into_iter().zip(c) {
                    w.add_count(d, f64::from(v), 1.0);
                }
                w
            })
    }

    proptest! {
        #[test]
        fn merge_is_associative_and_bit_exact(
            a in prop::collection::vec(outcome(), 0..20),
            b in prop::collection::vec(outcome(), 0..20),
        ) {
            let whole = accumulate(SPEC, a.iter().chain(b.iter()));
            let parts = accumulate(SPEC, &a).merge(&accumulate(SPEC, &b));
            prop_assert_eq!(&whole, &parts);
            let swapped = accumulate(SPEC, &b).merge(&accumulate(SPEC, &a));
            prop_assert_eq!(&whole, &swapped);
            prop_assert!(whole.coincidences_p1p2 as f64 <= whole.counts.p1.min(whole.counts.p2));
        }
    }
}
