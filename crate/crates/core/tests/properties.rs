use proptest::prelude::*;

use tagforce::angle::{circular_mean, fold_half_turn, wrap180, wrap360};
use tagforce::design::evaluate_design;
use tagforce::estimator::{deflip_180, fit_calibration, per_channel_diff, ChannelSeries, TimeWindow};
use tagforce::harness::{import_reader_trace, PhaseUnits, ScenarioConfig};
use tagforce::link::default_channel_plan;
use tagforce::sensor::{
    solve_compression, CurveSource, ForceCapacitanceCurve, Interpolation, MaterialSpec, SensorGeometry,
};
use tagforce::transduction::{delta_phi, reflect_phase, thru_phase, LineSpec};

const PF: f64 = 1e-12;

fn capacitance() -> impl Strategy<Value = f64> {
    (-15.0f64..-8.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #[test]
    fn wrap_ranges(a in -1e6f64..1e6) {
        let w = wrap360(a);
        prop_assert!((0.0..360.0).contains(&w));
        let h = wrap180(a);
        prop_assert!(h > -180.0 && h <= 180.0);
        let f = fold_half_turn(a);
        prop_assert!(f > -90.0 && f <= 90.0);
        prop_assert!(wrap180(h - a).abs() < 1e-6);
    }

    #[test]
    fn reflect_phase_bounded_and_decreasing(c in capacitance(), k in 1.0001f64..10.0) {
        let line = LineSpec::default();
        let a = reflect_phase(c, &line).unwrap();
        let b = reflect_phase(c * k, &line).unwrap();
        prop_assert!(a > 0.0 && a < 180.0);
        prop_assert!(b < a);
    }

    #[test]
    fn thru_doubles_to_reflect(c in capacitance(), f in 800e6f64..1000e6) {
        let line = LineSpec::default().with_frequency(f);
        prop_assert!((2.0 * thru_phase(c, &line).unwrap() - reflect_phase(c, &line).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn delta_phi_in_half_turn(c in capacitance(), k in 1.0f64..100.0) {
        let d = delta_phi(c, c * k, &LineSpec::default()).unwrap();
        prop_assert!((0.0..180.0).contains(&d));
    }

    #[test]
    fn stretch_monotone(f1 in 0.0f64..50.0, df in 0.01f64..50.0, mu in 1e4f64..1e7) {
        let g = SensorGeometry::reference();
        let m = MaterialSpec::ecoflex().with_shear_modulus(mu);
        let a = solve_compression(f1, &g, &m).unwrap();
        let b = solve_compression(f1 + df, &g, &m).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b < a);
    }

    #[test]
    fn interpolated_curve_monotone_without_overshoot(
        steps in prop::collection::vec((0.1f64..2.0, 0.001f64..0.5), 1..6),
        probes in prop::collection::vec(0.0f64..1.0, 20),
    ) {
        let mut samples = vec![(0.0, 1.0 * PF)];
        for (df, dc) in steps {
            let (f, c) = *samples.last().unwrap();
            samples.push((f + df, c + dc * PF));
        }
        let curve = ForceCapacitanceCurve::from_samples(
            samples.clone(),
            CurveSource::UserTable,
            Interpolation::MonotoneCubic,
        ).unwrap();
        let fmax = curve.max_force();
        let mut xs: Vec<f64> = probes.iter().map(|p| p * fmax).collect();
        xs.sort_by(f64::total_cmp);
        let mut prev = f64::NEG_INFINITY;
        for x in xs {
            let c = curve.capacitance_at(x).unwrap();
            prop_assert!(c >= prev - 1e-27);
            // stays inside the bracketing samples
            let k = samples.partition_point(|s| s.0 <= x).clamp(1, samples.len() - 1);
            prop_assert!(c >= samples[k - 1].1 - 1e-27 && c <= samples[k].1 + 1e-27);
            prev = c;
        }
    }

    #[test]
    fn design_swing_bounded(d_mm in 0.001f64..2.0, eps in 1.0f64..10.0, mu in 1e4f64..1e7, fmax in 0.0f64..20.0) {
        let g = SensorGeometry { dielectric_thickness: d_mm * 1e-3, ..SensorGeometry::reference() };
        let m = MaterialSpec::new("x", eps, mu).unwrap();
        let c = evaluate_design(&g, &m, fmax, &LineSpec::default()).unwrap();
        prop_assert!((0.0..180.0).contains(&c.delta_phi_deg));
        prop_assert!(c.c_max >= c.c0);
    }

    #[test]
    fn circular_mean_shift_equivariant(
        xs in prop::collection::vec(-30.0f64..30.0, 1..30),
        center in 0.0f64..360.0,
        shift in 0.0f64..360.0,
    ) {
        let a: Vec<f64> = xs.iter().map(|x| wrap360(center + x)).collect();
        let b: Vec<f64> = a.iter().map(|x| wrap360(x + shift)).collect();
        let ma = circular_mean(a).unwrap();
        let mb = circular_mean(b).unwrap();
        prop_assert!(wrap180(mb - ma - shift).abs() < 1e-9);
    }

    #[test]
    fn window_swap_negates_diff(
        phases in prop::collection::vec(0.0f64..360.0, 4..40),
        split in 0.2f64..0.8,
    ) {
        let n = phases.len();
        let samples: Vec<(f64, f64)> = phases.iter().enumerate().map(|(i, &p)| (i as f64, p)).collect();
        let s = ChannelSeries { channel_index: 0, samples };
        let cut = (n as f64 * split).floor().max(1.0);
        let a = TimeWindow::new(0.0, cut).unwrap();
        let b = TimeWindow::new(cut, n as f64).unwrap();
        if let (Some(d1), Some(d2)) = (per_channel_diff(&s, a, b), per_channel_diff(&s, b, a)) {
            prop_assert!(wrap180(d1 + d2).abs() < 1e-9);
        }
    }

    #[test]
    fn deflip_removes_latched_segments(
        drift in prop::collection::vec(-3.0f64..3.0, 10..80),
        start in 0.0f64..360.0,
        toggles in prop::collection::vec(any::<bool>(), 80),
    ) {
        let mut p = start;
        let mut clean = Vec::new();
        let mut dirty = Vec::new();
        let mut state = false;
        for (i, d) in drift.iter().enumerate() {
            p = wrap360(p + d);
            if toggles[i] && i > 0 {
                state = !state;
            }
            clean.push((i as f64, p));
            dirty.push((i as f64, if state { wrap360(p + 180.0) } else { p }));
        }
        let fixed = deflip_180(&ChannelSeries { channel_index: 3, samples: dirty }, 170.0).unwrap();
        // the first read's state is unknowable, so compare up to a constant half turn
        let offset = wrap180(fixed.samples[0].1 - clean[0].1);
        for (a, b) in fixed.samples.iter().zip(&clean) {
            prop_assert!(wrap180(a.1 - b.1 - offset).abs() < 1e-9);
        }
    }

    #[test]
    fn quadratic_fit_recovers_coefficients(
        c0 in -1.0f64..1.0, c1 in -1.0f64..-0.1, c2 in -0.01f64..0.01,
        n in 3usize..30,
    ) {
        let phases: Vec<f64> = (0..n).map(|i| -20.0 * i as f64 / (n - 1) as f64).collect();
        let forces: Vec<f64> = phases.iter().map(|p| c0 + c1 * p + c2 * p * p).collect();
        let m = fit_calibration(&phases, &forces, 2).unwrap();
        let c = m.coefficients();
        prop_assert!((c[0] - c0).abs() < 1e-8 && (c[1] - c1).abs() < 1e-8 && (c[2] - c2).abs() < 1e-9);
        prop_assert!(m.residual_rms() < 1e-8);
    }

    #[test]
    fn raw4096_import_scales(v in 0u32..4096) {
        let text = format!("timestamp,epc,channel_index,phase,rssi\n0.5,A,2,{v},-50\n");
        let r = import_reader_trace(text.as_bytes(), PhaseUnits::Raw4096, &default_channel_plan()).unwrap();
        prop_assert_eq!(r[0].phase_deg, v as f64 * 360.0 / 4096.0);
    }

    #[test]
    fn config_round_trip(
        seed in prop::option::of(any::<u64>()),
        duration in 0.0f64..100.0,
        rate in 1.0f64..500.0,
        flip in 0.0f64..1.0,
        dynamic in any::<bool>(),
        channels in 1usize..60,
    ) {
        let mut c = ScenarioConfig { seed, duration_s: duration, ..ScenarioConfig::default() };
        c.reader.reads_per_second = rate;
        c.reader.flip_probability = flip;
        c.multipath.dynamic = dynamic;
        c.plan.channels = channels;
        let text = c.to_toml_string().unwrap();
        prop_assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), c);
    }
}
