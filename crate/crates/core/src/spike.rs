//! Spike trains as finite sums of weighted Dirac impulses, and the
//! piecewise-constant signals that can be folded into them.

use std::cmp::Ordering;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::norms::Leak;

/// A single weighted impulse `amplitude * δ(t - time)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spike {
    pub time: f64,
    pub amplitude: f64,
}

impl Spike {
    pub fn new(time: f64, amplitude: f64) -> Self {
        Self { time, amplitude }
    }
}

/// A finite spike train in canonical form.
///
/// Times are strictly increasing, coincident impulses are merged by summing
/// their amplitudes and zero amplitudes are never stored, so two trains
/// describing the same distribution compare equal with `==`. The empty train
/// is the zero vector.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTrain", into = "RawTrain")]
pub struct SpikeTrain {
    events: Vec<Spike>,
}

#[derive(Serialize, Deserialize)]
struct RawTrain {
    events: Vec<(f64, f64)>,
}

impl TryFrom<RawTrain> for SpikeTrain {
    type Error = Error;

    fn try_from(raw: RawTrain) -> Result<Self> {
        SpikeTrain::new(raw.events)
    }
}

impl From<SpikeTrain> for RawTrain {
    fn from(train: SpikeTrain) -> Self {
        RawTrain {
            events: train.events.iter().map(|s| (s.time, s.amplitude)).collect(),
        }
    }
}

fn by_time(a: &Spike, b: &Spike) -> Ordering {
    a.time.partial_cmp(&b.time).expect("finite times")
}

/// Sorts, merges coincident times and drops zero amplitudes.
fn canonicalize(mut events: Vec<Spike>) -> Vec<Spike> {
    events.sort_by(by_time);
    let mut out: Vec<Spike> = Vec::with_capacity(events.len());
    for s in events {
        match out.last_mut() {
            Some(last) if last.time == s.time => last.amplitude += s.amplitude,
            _ => {
                if let Some(last) = out.last() {
                    if last.amplitude == 0.0 {
                        out.pop();
                    }
                }
                out.push(s);
            }
        }
    }
    if out.last().is_some_and(|s| s.amplitude == 0.0) {
        out.pop();
    }
    out
}

impl SpikeTrain {
    /// Builds a canonical train from `(time, amplitude)` pairs in any order.
    pub fn new<I>(events: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let events = events
            .into_iter()
            .map(|(t, a)| {
                Ok(Spike::new(
                    ensure_finite("spike time", t)?,
                    ensure_finite("spike amplitude", a)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            events: canonicalize(events),
        })
    }

    pub fn from_spikes<I: IntoIterator<Item = Spike>>(spikes: I) -> Result<Self> {
        Self::new(spikes.into_iter().map(|s| (s.time, s.amplitude)))
    }

    /// Trusted constructor for internally produced spikes (finite values).
    pub(crate) fn from_finite(events: Vec<Spike>) -> Self {
        debug_assert!(events
            .iter()
            .all(|s| s.time.is_finite() && s.amplitude.is_finite()));
        Self {
            events: canonicalize(events),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[Spike] {
        &self.events
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Spike> {
        self.events.iter()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.events.iter().map(|s| s.time)
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.events.iter().map(|s| s.amplitude)
    }

    /// `max_i |a_i|`, zero for the empty train.
    pub fn max_abs_amplitude(&self) -> f64 {
        self.amplitudes().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Superposition `self + other`, merged in sorted order.
    pub fn add(&self, other: &SpikeTrain) -> SpikeTrain {
        let (a, b) = (&self.events, &other.events);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match by_time(&a[i], &b[j]) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let amp = a[i].amplitude + b[j].amplitude;
                    if amp != 0.0 {
                        out.push(Spike::new(a[i].time, amp));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        SpikeTrain { events: out }
    }

    /// Multiplies every amplitude by `factor`; a zero factor yields the empty train.
    pub fn scale(&self, factor: f64) -> SpikeTrain {
        if factor == 0.0 {
            return SpikeTrain::empty();
        }
        SpikeTrain::from_finite(
            self.events
                .iter()
                .map(|s| Spike::new(s.time, s.amplitude * factor))
                .collect(),
        )
    }

    /// Delays every spike by `dt`, i.e. `η(· − dt)`.
    pub fn shift(&self, dt: f64) -> SpikeTrain {
        SpikeTrain::from_finite(
            self.events
                .iter()
                .map(|s| Spike::new(s.time + dt, s.amplitude))
                .collect(),
        )
    }

    /// Multiplies every spike time by `factor` (> 0), keeping amplitudes.
    pub fn rescale_time(&self, factor: f64) -> SpikeTrain {
        debug_assert!(factor > 0.0);
        SpikeTrain::from_finite(
            self.events
                .iter()
                .map(|s| Spike::new(s.time * factor, s.amplitude))
                .collect(),
        )
    }

    /// Event-wise comparison with an absolute tolerance on both times and amplitudes.
    pub fn approx_eq(&self, other: &SpikeTrain, tol: f64) -> bool {
        self.len() == other.len()
            && self.iter().zip(other.iter()).all(|(a, b)| {
                (a.time - b.time).abs() <= tol && (a.amplitude - b.amplitude).abs() <= tol
            })
    }
}

impl<'a> IntoIterator for &'a SpikeTrain {
    type Item = &'a Spike;
    type IntoIter = std::slice::Iter<'a, Spike>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}

impl Add for &SpikeTrain {
    type Output = SpikeTrain;

    fn add(self, rhs: &SpikeTrain) -> SpikeTrain {
        SpikeTrain::add(self, rhs)
    }
}

impl Sub for &SpikeTrain {
    type Output = SpikeTrain;

    fn sub(self, rhs: &SpikeTrain) -> SpikeTrain {
        SpikeTrain::add(self, &-rhs)
    }
}

impl Neg for &SpikeTrain {
    type Output = SpikeTrain;

    fn neg(self) -> SpikeTrain {
        SpikeTrain {
            events: self
                .events
                .iter()
                .map(|s| Spike::new(s.time, -s.amplitude))
                .collect(),
        }
    }
}

/// A piecewise-constant signal on `[u_0, u_K]` with optional superimposed impulses.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantSignal {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    impulses: SpikeTrain,
}

impl PiecewiseConstantSignal {
    /// `values[k]` is the level on `(breakpoints[k], breakpoints[k + 1])`.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, impulses: SpikeTrain) -> Result<Self> {
        for &b in &breakpoints {
            ensure_finite("breakpoint", b)?;
        }
        for &v in &values {
            ensure_finite("signal value", v)?;
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if breakpoints.len() != values.len() + 1 && !(breakpoints.is_empty() && values.is_empty()) {
            return Err(Error::Validation(format!(
                "{} breakpoints cannot carry {} interval values",
                breakpoints.len(),
                values.len()
            )));
        }
        Ok(Self {
            breakpoints,
            values,
            impulses,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn impulses(&self) -> &SpikeTrain {
        &self.impulses
    }

    /// Signal level at `t`, ignoring impulses; zero outside the support and at breakpoints.
    pub fn value_at(&self, t: f64) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .find(|(w, _)| w[0] < t && t < w[1])
            .map_or(0.0, |(_, &v)| v)
    }
}

/// Offset of the mean-value point inside an interval of length `len` for leak rate `alpha > 0`:
/// `(1/α) ln((e^{α len} − 1) / (α len))`, evaluated without overflow.
fn mean_value_offset(alpha: f64, len: f64) -> f64 {
    let x = alpha * len;
    if x < 1e-3 {
        // series of ln(expm1(x)/x) = x/2 + x^2/24 - x^4/2880
        len * (0.5 + x / 24.0 - x * x * x / 2880.0)
    } else {
        (x + (-(-x).exp_m1()).ln() - x.ln()) / alpha
    }
}

/// Replaces each constant piece `c` on `U_k` by one impulse of weight `c |U_k|` placed at the
/// point where the leak-weighted integral of the piece is preserved.
///
/// For `α = 0` that point is the midpoint of the interval. The leak-weighted prefix integrals
/// of the signal and of the returned train coincide at every breakpoint.
pub fn signal_to_spikes(signal: &PiecewiseConstantSignal, alpha: Leak) -> Result<SpikeTrain> {
    let rate = match alpha {
        Leak::Finite(a) => a,
        Leak::Infinite => {
            return Err(Error::Unsupported(
                "mean-value spike placement is undefined for infinite leak",
            ))
        }
    };
    let mut spikes: Vec<Spike> = signal
        .breakpoints
        .windows(2)
        .zip(&signal.values)
        .filter(|(_, &c)| c != 0.0)
        .map(|(w, &c)| {
            let len = w[1] - w[0];
            let offset = if rate == 0.0 {
                0.5 * len
            } else {
                mean_value_offset(rate, len)
            };
            Spike::new(w[0] + offset, c * len)
        })
        .collect();
    spikes.extend(signal.impulses.iter().copied());
    Ok(SpikeTrain::from_finite(spikes))
}
