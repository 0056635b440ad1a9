//! Leaky Alexiewicz and discrepancy norms of spike trains.
//!
//! The Alexiewicz norm `‖η‖_{A,α}` is the largest magnitude reached by the leaky running sum
//! `S_n = S_{n-1} e^{-α (t_n - t_{n-1})} + a_n`. The discrepancy norm `‖η‖_{D,α}` takes the
//! maximum over all contiguous windows instead of prefixes; the two satisfy
//! `A ≤ D ≤ 2A`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::spike::{Spike, SpikeTrain};

/// Leak rate `α` (units of 1/time). `Infinite` forgets everything between events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Leak {
    Finite(f64),
    Infinite,
}

impl Leak {
    pub const ZERO: Leak = Leak::Finite(0.0);

    /// Validates a rate; `f64::INFINITY` maps to [`Leak::Infinite`].
    pub fn new(rate: f64) -> Result<Self> {
        if rate == f64::INFINITY {
            Ok(Leak::Infinite)
        } else if rate.is_finite() && rate >= 0.0 {
            Ok(Leak::Finite(rate))
        } else {
            Err(Error::Config(format!("leak must be >= 0, got {rate}")))
        }
    }

    pub fn rate(self) -> f64 {
        match self {
            Leak::Finite(a) => a,
            Leak::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Leak::Finite(_))
    }

    /// True for the two regimes where the neuron carries no fractional memory
    /// across a gap in the usual sense: `α = 0` and `α = ∞`.
    pub fn is_extreme(self) -> bool {
        matches!(self, Leak::Infinite) || self == Leak::ZERO
    }

    /// Multiplicative decay `e^{-α gap}` for `gap >= 0`.
    #[inline]
    pub fn decay(self, gap: f64) -> f64 {
        match self {
            Leak::Finite(0.0) => 1.0,
            Leak::Finite(a) => (-a * gap).exp(),
            Leak::Infinite if gap == 0.0 => 1.0,
            Leak::Infinite => 0.0,
        }
    }
}

impl fmt::Display for Leak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Leak::Finite(a) => write!(f, "{a}"),
            Leak::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Leak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Infinity" => Ok(Leak::Infinite),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse leak '{other}'")))
                .and_then(Leak::new),
        }
    }
}

impl Serialize for Leak {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Leak::Finite(a) => serializer.serialize_f64(*a),
            Leak::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Leak {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(a) => Leak::new(a),
            Repr::Str(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Running leaky sum `S ← S·e^{-α gap} + a`, the incremental form shared by the
/// norm and the event-driven neuron.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LeakyAccumulator {
    leak: Leak,
    value: f64,
    last_time: Option<f64>,
}

impl LeakyAccumulator {
    pub(crate) fn new(leak: Leak) -> Self {
        Self {
            leak,
            value: 0.0,
            last_time: None,
        }
    }

    /// Decays the state to `time` and returns it (without adding anything).
    #[inline]
    pub(crate) fn advance(&mut self, time: f64) -> f64 {
        if let Some(prev) = self.last_time {
            self.value *= self.leak.decay(time - prev);
        }
        self.last_time = Some(time);
        self.value
    }

    #[inline]
    pub(crate) fn push(&mut self, spike: Spike) -> f64 {
        self.advance(spike.time);
        self.value += spike.amplitude;
        self.value
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub(crate) fn set(&mut self, value: f64) {
        self.value = value;
    }
}

/// Leaky prefix sums `S_n` for every event of `train`.
pub fn leaky_prefix_sums(train: &SpikeTrain, alpha: Leak) -> Vec<f64> {
    let mut acc = LeakyAccumulator::new(alpha);
    train.iter().map(|&s| acc.push(s)).collect()
}

/// `‖η‖_{A,α} = max_n |Σ_{j≤n} a_j e^{-α(t_n - t_j)}|`, in one pass.
pub fn alexiewicz_norm(train: &SpikeTrain, alpha: Leak) -> f64 {
    let mut acc = LeakyAccumulator::new(alpha);
    train.iter().fold(0.0, |m, &s| m.max(acc.push(s).abs()))
}

/// Quadratic reference evaluation of the Alexiewicz norm straight from its definition.
pub fn alexiewicz_norm_direct(train: &SpikeTrain, alpha: Leak) -> f64 {
    let ev = train.events();
    (0..ev.len())
        .map(|n| {
            ev[..=n]
                .iter()
                .map(|s| s.amplitude * alpha.decay(ev[n].time - s.time))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// `‖η‖_{D,α} = max_{m≤n} |Σ_{j=m}^{n} a_j e^{-α(t_n - t_j)}|`.
///
/// Linear time for `α = 0` (range of the prefix walk including the origin),
/// quadratic otherwise.
pub fn discrepancy_norm(train: &SpikeTrain, alpha: Leak) -> f64 {
    if train.is_empty() {
        return 0.0;
    }
    match alpha {
        Leak::Finite(0.0) => {
            let (mut lo, mut hi, mut s) = (0.0f64, 0.0f64, 0.0f64);
            for a in train.amplitudes() {
                s += a;
                lo = lo.min(s);
                hi = hi.max(s);
            }
            hi - lo
        }
        Leak::Infinite => train.max_abs_amplitude(),
        Leak::Finite(_) => {
            let ev = train.events();
            let mut best = 0.0f64;
            for n in 0..ev.len() {
                let mut window = 0.0;
                for m in (0..=n).rev() {
                    window += ev[m].amplitude * alpha.decay(ev[n].time - ev[m].time);
                    best = best.max(window.abs());
                }
            }
            best
        }
    }
}

/// `‖η‖_{2,α} = sqrt(Σ_k S_k²)` over the leaky prefix sums; undefined for infinite leak.
pub fn l2_norm(train: &SpikeTrain, alpha: Leak) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::Unsupported("L2 prefix norm requires a finite leak"));
    }
    let mut acc = LeakyAccumulator::new(alpha);
    Ok(train
        .iter()
        .map(|&s| {
            let v = acc.push(s);
            v * v
        })
        .sum::<f64>()
        .sqrt())
}

/// Bidiagonal `N×N` matrix (1 on the diagonal, −1 below) mapping the cube `[-1,1]^N`
/// onto the unit ball of `‖·‖_{A,0}`.
pub fn unit_ball_shear(n: usize) -> DMatrix<f64> {
    assert!(n >= 1, "shear matrix needs at least one dimension");
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if i == j + 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// Whether every prefix sum of `amplitudes` stays within `[-1, 1]`.
pub fn in_unit_ball_a0(amplitudes: &[f64]) -> bool {
    let mut s = 0.0;
    amplitudes.iter().all(|a| {
        s += a;
        (-1.0..=1.0).contains(&s)
    })
}
