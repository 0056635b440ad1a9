//! Brute-force reference evaluations and input strategies shared by the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;
use spikenorm::{Leak, SpikeTrain};

/// Weight of the event at `tj` seen from `tn`; the infinite leak forgets everything but `tn`.
pub fn weight(alpha: Leak, tn: f64, tj: f64) -> f64 {
    match alpha {
        Leak::Finite(a) => (-a * (tn - tj)).exp(),
        Leak::Infinite => {
            if tn == tj {
                1.0
            } else {
                0.0
            }
        }
    }
}

fn pairs(train: &SpikeTrain) -> Vec<(f64, f64)> {
    train.iter().map(|s| (s.time, s.amplitude)).collect()
}

/// `max_n |Σ_{j≤n} a_j w(t_n, t_j)|` by a double loop.
pub fn alex_oracle(train: &SpikeTrain, alpha: Leak) -> f64 {
    let e = pairs(train);
    (0..e.len())
        .map(|n| {
            (0..=n)
                .map(|j| e[j].1 * weight(alpha, e[n].0, e[j].0))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// `max_{m≤n} |Σ_{j=m..n} a_j w(t_n, t_j)|` over every window.
pub fn disc_oracle(train: &SpikeTrain, alpha: Leak) -> f64 {
    let e = pairs(train);
    let mut best = 0.0f64;
    for n in 0..e.len() {
        for m in 0..=n {
            let s: f64 = (m..=n)
                .map(|j| e[j].1 * weight(alpha, e[n].0, e[j].0))
                .sum();
            best = best.max(s.abs());
        }
    }
    best
}

pub fn l2_oracle(train: &SpikeTrain, alpha: f64) -> f64 {
    let e = pairs(train);
    (0..e.len())
        .map(|k| {
            (0..=k)
                .map(|i| e[i].1 * (-alpha * (e[k].0 - e[i].0)).exp())
                .sum::<f64>()
                .powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + inner + f(b)) * h / 3.0
}

pub fn train(events: &[(f64, f64)]) -> SpikeTrain {
    SpikeTrain::new(events.iter().copied()).unwrap()
}

/// Spikes with gaps in `[0.01, 2]` starting at a time in `[0, 1]`.
pub fn arb_train(max_len: usize, amp: f64) -> impl Strategy<Value = SpikeTrain> {
    (
        0.0..1.0f64,
        prop::collection::vec((0.01..2.0f64, -amp..amp), 0..=max_len),
    )
        .prop_map(|(start, steps)| {
            let mut t = start;
            let events: Vec<(f64, f64)> = steps
                .into_iter()
                .map(|(gap, a)| {
                    t += gap;
                    (t, a)
                })
                .collect();
            SpikeTrain::new(events).unwrap()
        })
}

/// Spikes on the integer grid `1..=len` (a subset of it, zero amplitudes dropped).
pub fn arb_grid_train(max_len: usize, amp: f64) -> impl Strategy<Value = SpikeTrain> {
    prop::collection::vec(-amp..amp, 0..=max_len).prop_map(|amps| {
        SpikeTrain::new(
            amps.into_iter()
                .enumerate()
                .map(|(k, a)| ((k + 1) as f64, a)),
        )
        .unwrap()
    })
}

pub fn arb_leak() -> impl Strategy<Value = Leak> {
    prop_oneof![
        Just(Leak::ZERO),
        Just(Leak::Infinite),
        (0.001..20.0f64).prop_map(Leak::Finite),
    ]
}

pub fn arb_finite_leak() -> impl Strategy<Value = Leak> {
    prop_oneof![Just(Leak::ZERO), (0.001..20.0f64).prop_map(Leak::Finite)]
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
