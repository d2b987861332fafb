use qrng_core::optics::{
    click_distribution, default_coherence_time_fs, output_distribution, ClickPattern, Detector,
    DetectorBank, InterferometerConfig,
};
use qrng_core::timetag::{
    coincidence_filter, coincidence_pairs, fit_gaussian_feature, purity_monitor, scan_delay, simulate,
    CoincidenceFilter, EventStream, MonitorVerdict, PairLabel, SourceConfig, TimingConfig,
};

fn ideal_interf(delay_fs: f64) -> InterferometerConfig {
    InterferometerConfig::ideal(delay_fs).unwrap()
}

fn no_jitter() -> TimingConfig {
    TimingConfig::new(0.0, 50.0, 3.0).unwrap()
}

#[test]
fn nothing_in_nothing_out() {
    let src = SourceConfig::new(0.0, 10.0, 1).unwrap();
    let events = simulate(&src, &ideal_interf(0.0), &DetectorBank::ideal(), &TimingConfig::default()).unwrap();
    assert!(events.is_empty());
}

#[test]
fn total_clicks_match_expectation() {
    // Per arm holding both photons: same detector (prob 1/2) gives one
    // click, different detectors give two, so 1.5 clicks per pair.
    let per_pair = 0.5 * 1.0 + 0.5 * 2.0;
    let expected = 1000.0 * 100.0 * per_pair;
    let src = SourceConfig::new(1000.0, 100.0, 7).unwrap();
    let n = EventStream::new(&src, &ideal_interf(0.0), &DetectorBank::ideal(), &TimingConfig::default())
        .unwrap()
        .count() as f64;
    assert!((n - expected).abs() < 3.0 * expected.sqrt(), "{n} vs {expected}");
}

#[test]
fn identical_seeds_identical_streams() {
    let src = SourceConfig::new(2000.0, 2.0, 99).unwrap();
    let bank = DetectorBank::new(0.8, 500.0).unwrap();
    let interf = ideal_interf(150.0);
    let timing = TimingConfig::default();
    let a = simulate(&src, &interf, &bank, &timing).unwrap();
    let b = simulate(&src, &interf, &bank, &timing).unwrap();
    assert_eq!(a, b);
    assert_eq!(coincidence_filter(&a, &timing).unwrap(), coincidence_filter(&b, &timing).unwrap());
    let other = simulate(&SourceConfig { seed: 100, ..src }, &interf, &bank, &timing).unwrap();
    assert_ne!(a, other);
}

#[test]
fn events_sorted_and_in_range() {
    let src = SourceConfig::new(5000.0, 1.0, 3).unwrap();
    let events = simulate(&src, &ideal_interf(300.0), &DetectorBank::new(0.9, 2000.0).unwrap(), &TimingConfig::default()).unwrap();
    assert!(events.windows(2).all(|w| w[0].time_ps <= w[1].time_ps));
    assert!(events.iter().all(|e| (0..src.duration_ps()).contains(&e.time_ps)));
}

#[test]
fn dark_count_gaps_are_exponential() {
    // Dark counts only, no dead time: D1's gaps should be Exp(rate). The
    // KS distance is compared against the asymptotic α = 0.01 critical
    // value 1.6276/√n.
    let rate = 10_000.0;
    let src = SourceConfig::new(0.0, 10.0, 2024).unwrap();
    let bank = DetectorBank::new(1.0, rate).unwrap();
    let timing = TimingConfig::new(0.0, 0.0, 3.0).unwrap();
    let times: Vec<i64> = simulate(&src, &ideal_interf(0.0), &bank, &timing)
        .unwrap()
        .into_iter()
        .filter(|e| e.detector == Detector::D1)
        .map(|e| e.time_ps)
        .collect();
    let mut gaps: Vec<f64> = times.windows(2).map(|w| (w[1] - w[0]) as f64 * 1e-12).collect();
    assert!(gaps.len() > 95_000, "{}", gaps.len());
    gaps.sort_by(f64::total_cmp);
    let n = gaps.len() as f64;
    let d = gaps
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let f = 1.0 - (-rate * g).exp();
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    assert!(d < 1.6276 / n.sqrt(), "D = {d}");
}

#[test]
fn coincidences_consume_two_distinct_clicks() {
    let src = SourceConfig::new(20_000.0, 2.0, 11).unwrap();
    let bank = DetectorBank::new(0.7, 20_000.0).unwrap();
    let timing = TimingConfig::default();
    let events = simulate(&src, &ideal_interf(400.0), &bank, &timing).unwrap();
    let pairs = coincidence_pairs(&events, &timing).unwrap();
    assert!(!pairs.is_empty());
    let mut used = vec![false; events.len()];
    for &(i, j) in &pairs {
        assert!(i < j);
        assert!(!used[i] && !used[j]);
        used[i] = true;
        used[j] = true;
        assert_ne!(events[i].detector, events[j].detector);
        assert!(events[j].time_ps - events[i].time_ps <= timing.window_ps());
    }
}

#[test]
fn four_folds_are_flagged() {
    // Very high dark rate forces windows holding three or more clicks.
    let src = SourceConfig::new(100_000.0, 0.5, 5).unwrap();
    let bank = DetectorBank::new(1.0, 1e6).unwrap();
    let timing = TimingConfig::default();
    let stream = EventStream::new(&src, &ideal_interf(0.0), &bank, &timing).unwrap();
    let mut filter = CoincidenceFilter::new(stream, &timing);
    let n = filter.by_ref().count() as u64;
    let stats = filter.stats();
    assert_eq!(stats.coincidences, n);
    assert_eq!(stats.clicks, 2 * n + stats.unpaired);
    assert!(stats.multi_click_windows > 0);
}

#[test]
fn per_label_rates_match_click_probabilities() {
    let tc = default_coherence_time_fs();
    let interf = ideal_interf(tc);
    let bank = DetectorBank::ideal();
    let src = SourceConfig::new(1000.0, 100.0, 42).unwrap();
    let timing = no_jitter();
    let clicks = click_distribution(&output_distribution(&interf).unwrap(), &bank);
    let coincidences = coincidence_filter(&simulate(&src, &interf, &bank, &timing).unwrap(), &timing).unwrap();
    let label_detectors = |l: PairLabel| match l {
        PairLabel::D1D2 => [Detector::D1, Detector::D2],
        PairLabel::D3D4 => [Detector::D3, Detector::D4],
        PairLabel::D1D3 => [Detector::D1, Detector::D3],
        PairLabel::D1D4 => [Detector::D1, Detector::D4],
        PairLabel::D2D3 => [Detector::D2, Detector::D3],
        PairLabel::D2D4 => [Detector::D2, Detector::D4],
    };
    for label in PairLabel::ALL {
        let observed = coincidences.iter().filter(|c| c.pair == label).count() as f64;
        let expected = 1000.0 * 100.0 * clicks.probability(ClickPattern::of(&label_detectors(label)));
        assert!(
            (observed - expected).abs() <= 4.0 * expected.sqrt(),
            "{label}: {observed} vs {expected}"
        );
    }
}

#[test]
fn same_arm_rate_doubles_off_the_dip() {
    let tc = default_coherence_time_fs();
    let src = SourceConfig::new(1000.0, 100.0, 8).unwrap();
    let points = scan_delay(&[0.0, 10.0 * tc], &src, &ideal_interf(0.0), &DetectorBank::ideal(), &TimingConfig::default()).unwrap();
    let at_zero = points[0].rate(PairLabel::D1D2);
    let far = points[1].rate(PairLabel::D1D2);
    let ratio = at_zero.rate_hz() / far.rate_hz();
    let sigma = ratio * ((1.0 / at_zero.counts as f64) + (1.0 / far.counts as f64)).sqrt();
    assert!((ratio - 2.0).abs() < 4.0 * sigma, "{ratio} ± {sigma}");
    // Only accidentals between different pairs remain at zero delay:
    // about 1.5e5 clicks × 1500 Hz × 3 ns ≈ 0.7 expected.
    assert!(points[0].cross_arm().counts <= 5);
}

#[test]
fn fitted_visibility_tracks_ceiling() {
    let tc = default_coherence_time_fs();
    let delays: Vec<f64> = (-10..=10).map(|i| i as f64 * 0.3 * tc).collect();
    let src = SourceConfig::new(1000.0, 20.0, 77).unwrap();
    for v0 in [0.8, 0.9, 1.0] {
        let interf = InterferometerConfig::new(0.0, tc, 0.5, v0).unwrap();
        let points = scan_delay(&delays, &src, &interf, &DetectorBank::ideal(), &TimingConfig::default()).unwrap();
        let cross: Vec<_> = points.iter().map(|p| (p.delay_fs, p.cross_arm())).collect();
        let fit = fit_gaussian_feature(&cross).unwrap();
        assert!(fit.amplitude < 0.0);
        assert!(
            (fit.visibility - v0).abs() <= 3.0 * fit.visibility_sigma.max(1e-3),
            "V0 = {v0}: {} ± {}",
            fit.visibility,
            fit.visibility_sigma
        );
        assert!((fit.width - tc).abs() < 0.1 * tc, "width {}", fit.width);
    }
}

#[test]
fn monitor_follows_state_purity() {
    let src = SourceConfig::new(1000.0, 10.0, 4).unwrap();
    let timing = TimingConfig::default();
    let bank = DetectorBank::ideal();
    let tc = default_coherence_time_fs();
    let at = |delay| coincidence_filter(&simulate(&src, &ideal_interf(delay), &bank, &timing).unwrap(), &timing).unwrap();

    let ok = purity_monitor(&at(0.0), 0);
    assert_eq!((ok.verdict, ok.cross_arm_count), (MonitorVerdict::Ok, 0));
    let alarm = purity_monitor(&at(3.0 * tc), 0);
    assert_eq!(alarm.verdict, MonitorVerdict::Alarm);
    assert!(alarm.cross_arm_count > 4000);
    assert_eq!(purity_monitor(&[], 0).verdict, MonitorVerdict::Ok);
}
