use lightquanta::apparatus::{incidence_for_reflectance, ApparatusConfig, Arm, ChopperState};
use lightquanta::engine::{derive_seed, run, RunMode, RunSpec};
use lightquanta::models::{
    simulate_event, simulate_event_particle, simulate_event_pilot_wave, simulate_event_quantum,
    simulate_event_wave, ModelKind, SimContext, SourceKind,
};
use lightquanta::optics::Polarization;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erf;

fn with_reflectance(model: ModelKind, seed: u64, r: f64) -> RunSpec {
    let mut spec = RunSpec::new(model, seed);
    spec.cfg.incidence_angle = incidence_for_reflectance(1.0, 1.5, Polarization::S, r).unwrap();
    spec
}

/// Pearson statistic against expected bin probabilities; the last bin
/// collects everything outside the listed ones.
fn pearson(observed: &[u64], probs: &[f64], n: u64) -> f64 {
    observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

fn chi2_critical(dof: usize) -> f64 {
    ChiSquared::new(dof as f64).unwrap().inverse_cdf(0.999)
}

#[test]
fn particle_arm_fraction_follows_reflectance() {
    let ctx = SimContext::new(ModelKind::Particle, &ApparatusConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 1_000_000;
    let reflected = (0..n)
        .filter(|_| simulate_event_particle(&ctx, &mut rng).arm == Some(Arm::R))
        .count();
    let frac = reflected as f64 / n as f64;
    assert!((frac - 0.5).abs() < 0.002, "R fraction {frac}");
    assert!((ctx.reflectance - 0.5).abs() < 1e-9);
}

#[test]
fn particle_with_t_blocked_lands_only_from_r() {
    let cfg = ApparatusConfig {
        chopper: ChopperState::BlockT,
        ..Default::default()
    };
    let ctx = SimContext::new(ModelKind::Particle, &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let e = simulate_event(&ctx, &mut rng);
        if e.landing.is_some() {
            assert_eq!(e.arm, Some(Arm::R));
        } else {
            assert_eq!(e.arm, Some(Arm::T));
        }
    }
}

#[test]
fn particle_landings_follow_the_gaussian_spot() {
    let cfg = ApparatusConfig {
        chopper: ChopperState::BlockT,
        ..Default::default()
    };
    let ctx = SimContext::new(ModelKind::Particle, &cfg).unwrap();
    let (c, w) = (cfg.spot_center_r, cfg.envelope_width);
    // |exp(-u²/2)|² is a normal density with σ = w/√2.
    let cdf = |x: f64| 0.5 * (1.0 + erf((x - c) / w));
    let edges: Vec<f64> = (0..=30).map(|i| c - 2.5 * w + i as f64 * w / 6.0).collect();
    let mut probs: Vec<f64> = edges.windows(2).map(|e| cdf(e[1]) - cdf(e[0])).collect();
    probs.push(1.0 - probs.iter().sum::<f64>());

    let mut observed = vec![0u64; probs.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut n = 0;
    while n < 200_000 {
        let Some(x) = simulate_event(&ctx, &mut rng).landing else {
            continue;
        };
        n += 1;
        let bin = edges
            .windows(2)
            .position(|e| x >= e[0] && x < e[1])
            .unwrap_or(probs.len() - 1);
        observed[bin] += 1;
    }
    let stat = pearson(&observed, &probs, n);
    assert!(stat < chi2_critical(probs.len() - 1), "chi² = {stat}");
}

#[test]
fn pilot_wave_and_wave_share_a_position_marginal() {
    let cfg = ApparatusConfig::default();
    let wave = SimContext::new(ModelKind::Wave, &cfg).unwrap();
    let pilot = SimContext::new(ModelKind::PilotWave, &cfg).unwrap();
    let spec = wave.histogram;
    let n = 200_000;
    let mut a = vec![0u64; spec.n_bins];
    let mut b = vec![0u64; spec.n_bins];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..n {
        if let Some(i) = simulate_event_wave(&wave, &mut rng)
            .landing
            .and_then(|x| spec.bin(x))
        {
            a[i] += 1;
        }
        if let Some(i) = simulate_event_pilot_wave(&pilot, &mut rng)
            .landing
            .and_then(|x| spec.bin(x))
        {
            b[i] += 1;
        }
    }
    // Two-sample chi-square over bins with enough counts.
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let mut stat = 0.0;
    let mut dof = 0;
    for (&x, &y) in a.iter().zip(&b) {
        if x + y < 20 {
            continue;
        }
        stat += (ka * x as f64 - kb * y as f64).powi(2) / (x + y) as f64;
        dof += 1;
    }
    assert!(dof > 20);
    assert!(
        stat < chi2_critical(dof - 1),
        "chi² = {stat} over {dof} bins"
    );
}

#[test]
fn quantum_events_carry_their_predictability() {
    let spec = with_reflectance(ModelKind::QuantumComplementarity, 0, 0.8);
    let ctx = SimContext::new(spec.model, &spec.cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let e = simulate_event_quantum(&ctx, &mut rng);
    assert_eq!(e.arm, None);
    assert!(
        (e.distinguishability - 0.6).abs() < 1e-9,
        "{}",
        e.distinguishability
    );
}

#[test]
fn wave_fringes_vanish_with_one_arm_blocked() {
    let mut spec = RunSpec::new(ModelKind::Wave, 6);
    spec.stream.n_windows = 50_000;
    let open = run(&spec).unwrap();
    assert!((open.metrics.w.unwrap() - 1.0).abs() <= 0.01);
    assert!((open.metrics.visibility_fit.unwrap() - 1.0).abs() <= 0.01);

    spec.cfg.chopper = ChopperState::BlockT;
    let blocked = run(&spec).unwrap();
    // Fiber W keeps the slope of the lone spot's envelope; the fit does not.
    assert!(blocked.metrics.visibility_fit.unwrap() < 0.02);
}

#[test]
fn quantum_unbalanced_split_trades_fringes_for_path() {
    let mut spec = with_reflectance(ModelKind::QuantumComplementarity, 7, 0.8);
    spec.stream.n_windows = 50_000;
    let r = run(&spec).unwrap();
    let p = r.metrics.p_ledger.unwrap();
    let v = r.metrics.visibility_fit.unwrap();
    assert!((p - 0.6).abs() < 0.02, "P = {p}");
    assert!((v - 0.8).abs() < 0.03, "V = {v}");
    assert!((r.metrics.w.unwrap() - v).abs() < 0.05);

    spec.cfg.chopper = ChopperState::BlockT;
    let blocked = run(&spec).unwrap();
    assert!(blocked.metrics.visibility_fit.unwrap() < 0.02);
    assert!((blocked.metrics.p_ledger.unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn pilot_wave_keeps_both_path_and_fringes() {
    let mut spec = RunSpec::new(ModelKind::PilotWave, 8);
    spec.stream.n_windows = 50_000;
    let r = run(&spec).unwrap();
    assert!((r.metrics.p_ledger.unwrap() - 1.0).abs() < 1e-9);
    assert!((r.metrics.w.unwrap() - 1.0).abs() <= 0.02);
    assert!(r.metrics.complementarity_violation);
}

#[test]
fn light_quanta_fringes_grow_with_flux() {
    let mut single = RunSpec::new(ModelKind::LightQuanta, 9);
    single.stream.n_windows = 50_000;
    let r = run(&single).unwrap();
    assert!(r.metrics.w.unwrap() < 0.05, "W = {:?}", r.metrics.w);
    assert!((r.metrics.p_ledger.unwrap() - 1.0).abs() < 0.02);

    let mut bright = RunSpec::new(ModelKind::LightQuanta, 10);
    bright.stream.n_windows = 5_000;
    bright.stream.source = SourceKind::Poissonian { mean: 50.0 };
    let r = run(&bright).unwrap();
    let v = r.metrics.visibility_fit.unwrap();
    assert!(v > 0.9, "V = {v}");
}

#[test]
fn poisson_alpha_is_one_at_any_split() {
    for (i, refl) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let mut spec = with_reflectance(ModelKind::LightQuanta, derive_seed(11, i as u64), refl);
        spec.mode = RunMode::ChopperCoincidence;
        spec.stream.source = SourceKind::Poissonian { mean: 0.1 };
        spec.stream.n_windows = 1_000_000;
        let alpha = run(&spec).unwrap().metrics.alpha.unwrap();
        assert!((alpha - 1.0).abs() <= 0.1, "R = {refl}: α = {alpha}");
    }
}

#[test]
fn heralded_quantum_alpha_is_zero() {
    let mut spec = RunSpec::new(ModelKind::QuantumComplementarity, 12);
    spec.mode = RunMode::ChopperCoincidence;
    spec.stream.n_windows = 100_000;
    assert_eq!(run(&spec).unwrap().metrics.alpha, Some(0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn metrics_stay_in_range(
        model in prop::sample::select(ModelKind::ALL.to_vec()),
        refl in 0.1f64..0.9,
        opd_frac in 0.0f64..1.0,
        mean in 0.0f64..5.0,
        poisson in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut spec = with_reflectance(model, seed, refl);
        spec.cfg.delay_opd = opd_frac * spec.cfg.wavelength;
        spec.stream.n_windows = 300;
        if poisson {
            spec.stream.source = SourceKind::Poissonian { mean };
        }
        let m = run(&spec).unwrap().metrics;
        for v in [m.p_counts, m.p_ledger, m.w, m.visibility_fit].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&v), "{v} out of range");
        }
        if let Some(a) = m.alpha {
            prop_assert!(a >= 0.0);
        }
    }
}
