mod common;

use common::{arb_train, simpson, train};
use proptest::prelude::*;
use spikenorm::{signal_to_spikes, Leak, PiecewiseConstantSignal, SpikeTrain};

proptest! {
    #[test]
    fn addition_is_commutative(a in arb_train(20, 3.0), b in arb_train(20, 3.0)) {
        prop_assert_eq!(&a + &b, &b + &a);
    }

    #[test]
    fn addition_is_associative(
        a in arb_train(15, 3.0),
        b in arb_train(15, 3.0),
        c in arb_train(15, 3.0),
    ) {
        let left = &(&a + &b) + &c;
        let right = &a + &(&b + &c);
        prop_assert!(left.approx_eq(&right, 1e-12));
    }

    #[test]
    fn identity_and_inverse(a in arb_train(20, 3.0)) {
        prop_assert_eq!(&a + &SpikeTrain::empty(), a.clone());
        prop_assert!((&a + &(-&a)).is_empty());
        prop_assert!((&a - &a).is_empty());
    }

    #[test]
    fn scaling_distributes(
        a in arb_train(15, 3.0),
        b in arb_train(15, 3.0),
        x in -3.0..3.0f64,
        y in -3.0..3.0f64,
    ) {
        prop_assert!((&a + &b).scale(x).approx_eq(&(&a.scale(x) + &b.scale(x)), 1e-12));
        prop_assert!(a.scale(x + y).approx_eq(&(&a.scale(x) + &a.scale(y)), 1e-12));
        prop_assert!(a.scale(x).scale(y).approx_eq(&a.scale(x * y), 1e-12));
    }

    #[test]
    fn construction_is_idempotent(a in arb_train(30, 3.0)) {
        let again = SpikeTrain::new(a.iter().map(|s| (s.time, s.amplitude))).unwrap();
        prop_assert_eq!(again, a);
    }

    #[test]
    fn canonical_form_holds(raw in prop::collection::vec((0u8..10, -2i8..=2), 0..30)) {
        let t = SpikeTrain::new(raw.iter().map(|&(t, a)| (t as f64, a as f64))).unwrap();
        prop_assert!(t.times().collect::<Vec<_>>().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(t.amplitudes().all(|a| a != 0.0));
        for time in 0..10u8 {
            let expected: f64 = raw.iter().filter(|e| e.0 == time).map(|e| e.1 as f64).sum();
            let got = t.iter().find(|s| s.time == time as f64).map_or(0.0, |s| s.amplitude);
            prop_assert_eq!(got, expected);
        }
    }

    #[test]
    fn shift_round_trip(a in arb_train(20, 3.0), dt in -5.0..5.0f64) {
        prop_assert!(a.shift(dt).shift(-dt).approx_eq(&a, 1e-12));
    }

    #[test]
    fn json_round_trip(a in arb_train(20, 3.0)) {
        let text = serde_json::to_string(&a).unwrap();
        let back: SpikeTrain = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn signal_prefix_integrals_match(
        pieces in prop::collection::vec((0.05..2.0f64, -3.0..3.0f64), 1..6),
        alpha in prop_oneof![Just(0.0), 0.01..5.0f64],
    ) {
        let mut breakpoints = vec![0.0];
        for (len, _) in &pieces {
            breakpoints.push(breakpoints.last().unwrap() + len);
        }
        let values: Vec<f64> = pieces.iter().map(|p| p.1).collect();
        let signal =
            PiecewiseConstantSignal::new(breakpoints.clone(), values.clone(), SpikeTrain::empty())
                .unwrap();
        let spikes = signal_to_spikes(&signal, Leak::Finite(alpha)).unwrap();
        for (k, &end) in breakpoints.iter().enumerate().skip(1) {
            let integral: f64 = (0..k)
                .map(|i| {
                    let v = values[i];
                    simpson(|t| v * (-alpha * (end - t)).exp(), breakpoints[i], breakpoints[i + 1], 2000)
                })
                .sum();
            let discrete: f64 = spikes
                .iter()
                .filter(|s| s.time <= end)
                .map(|s| s.amplitude * (-alpha * (end - s.time)).exp())
                .sum();
            prop_assert!(
                (integral - discrete).abs() <= 1e-9 * integral.abs().max(1.0),
                "at {end}: {integral} vs {discrete}"
            );
        }
    }
}

#[test]
fn mean_value_point_for_unit_leak() {
    let signal =
        PiecewiseConstantSignal::new(vec![0.0, 1.0], vec![1.0], SpikeTrain::empty()).unwrap();
    let spikes = signal_to_spikes(&signal, Leak::Finite(1.0)).unwrap();
    assert_eq!(spikes.len(), 1);
    let s = spikes.events()[0];
    let integral = simpson(f64::exp, 0.0, 1.0, 2000);
    assert!((integral - s.time.exp()).abs() < 1e-12);
    assert!((s.time - 0.541_324_854_612_918_1).abs() < 1e-12);
}

#[test]
fn impulses_pass_through() {
    let impulses = train(&[(0.5, 2.0), (3.0, -1.0)]);
    let signal = PiecewiseConstantSignal::new(vec![0.0, 2.0], vec![1.0], impulses).unwrap();
    let spikes = signal_to_spikes(&signal, Leak::ZERO).unwrap();
    assert_eq!(spikes, train(&[(0.5, 2.0), (1.0, 2.0), (3.0, -1.0)]));
    assert!(signal_to_spikes(&signal, Leak::Infinite).is_err());
}
