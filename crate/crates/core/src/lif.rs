//! Leaky integrate-and-fire neurons, event-driven and on a fixed time grid.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{alexiewicz_norm, Leak, LeakyAccumulator};
use crate::spike::{Spike, SpikeTrain};

/// Re-initialization applied to the membrane potential `u` when `|u| ≥ ϑ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResetMode {
    /// Emit `u` itself and restart from zero.
    #[serde(rename = "zero")]
    ToZero,
    /// Emit `sgn(u)·ϑ` and subtract it.
    #[serde(rename = "sub")]
    BySubtraction,
    /// Emit the truncated multiple `[u/ϑ]·ϑ` and keep the remainder.
    #[serde(rename = "mod")]
    ToMod,
}

impl ResetMode {
    pub const ALL: [ResetMode; 3] = [
        ResetMode::ToZero,
        ResetMode::BySubtraction,
        ResetMode::ToMod,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ResetMode::ToZero => "zero",
            ResetMode::BySubtraction => "sub",
            ResetMode::ToMod => "mod",
        }
    }
}

impl fmt::Display for ResetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(ResetMode::ToZero),
            "sub" => Ok(ResetMode::BySubtraction),
            "mod" => Ok(ResetMode::ToMod),
            other => Err(Error::Config(format!(
                "unknown reset mode '{other}' (expected zero, sub or mod)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifConfig {
    pub theta: f64,
    pub alpha: Leak,
    pub reset: ResetMode,
}

impl LifConfig {
    pub fn new(theta: f64, alpha: Leak, reset: ResetMode) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::Config(format!("threshold must be > 0, got {theta}")));
        }
        Ok(Self {
            theta,
            alpha,
            reset,
        })
    }

    /// Reset-to-mod neuron, the mode under which the quantization bounds hold.
    pub fn quantizer(theta: f64, alpha: Leak) -> Result<Self> {
        Self::new(theta, alpha, ResetMode::ToMod)
    }

    pub fn with_theta(self, theta: f64) -> Result<Self> {
        Self::new(theta, self.alpha, self.reset)
    }

    pub fn with_alpha(self, alpha: Leak) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_reset(self, reset: ResetMode) -> Self {
        Self { reset, ..self }
    }
}

/// `sgn(u)·k·ϑ` with `k` the largest integer such that `k·ϑ ≤ |u|`.
///
/// `k` is adjusted against the same products it is compared with, so a potential that is an
/// exact floating-point multiple `k·ϑ` is reproduced exactly.
pub fn truncate_to_multiple(u: f64, theta: f64) -> f64 {
    let mag = u.abs();
    let mut k = (mag / theta).trunc();
    while (k + 1.0) * theta <= mag {
        k += 1.0;
    }
    while k > 0.0 && k * theta > mag {
        k -= 1.0;
    }
    u.signum() * (k * theta)
}

/// Discharge amplitude for a potential that reached the threshold.
#[inline]
fn discharge(u: f64, theta: f64, reset: ResetMode) -> f64 {
    match reset {
        ResetMode::ToZero => u,
        ResetMode::BySubtraction => u.signum() * theta,
        ResetMode::ToMod => truncate_to_multiple(u, theta),
    }
}

/// Event-driven LIF neuron.
///
/// Between input events the potential decays by `e^{-α·gap}`; at each event it jumps by the
/// input amplitude and fires if `|u| ≥ ϑ`. Since decay never increases `|u|`, threshold
/// crossings can only happen at input instants and the output times are a subset of the input
/// times. Under reset-by-subtraction only one `ϑ` is discharged per event, so a remainder above
/// threshold is carried to the next input event.
pub fn lif(train: &SpikeTrain, cfg: &LifConfig) -> SpikeTrain {
    let mut acc = LeakyAccumulator::new(cfg.alpha);
    let mut out = Vec::new();
    for &spike in train {
        let before = acc.value();
        let decayed = acc.advance(spike.time);
        debug_assert!(decayed.abs() <= before.abs());
        if cfg.reset != ResetMode::BySubtraction {
            // post-reset potential of the previous event is sub-threshold, hence so is
            // everything on the open interval up to this event
            debug_assert!(decayed.abs() < cfg.theta);
        }
        let u = decayed + spike.amplitude;
        acc.set(u);
        if u.abs() >= cfg.theta {
            let b = discharge(u, cfg.theta, cfg.reset);
            acc.set(match cfg.reset {
                ResetMode::ToZero => 0.0,
                _ => u - b,
            });
            out.push(Spike::new(spike.time, b));
        }
    }
    SpikeTrain::from_finite(out)
}

/// `(η − LIF(η), ‖η − LIF(η)‖_{A,α})`. Under reset-to-mod the norm is below `ϑ`.
pub fn quantization_residual(train: &SpikeTrain, cfg: &LifConfig) -> (SpikeTrain, f64) {
    let residual = train - &lif(train, cfg);
    let norm = alexiewicz_norm(&residual, cfg.alpha);
    (residual, norm)
}

/// How the per-step decay factor of the grid model is derived from `α` and `Δt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaMode {
    /// `β = e^{-α Δt}`, consistent with the event-driven kernel.
    #[serde(rename = "exact")]
    ExactExp,
    /// `β = 1 − Δt/α`, reading `α` as a time constant.
    #[serde(rename = "paper")]
    Linear,
}

impl FromStr for BetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(BetaMode::ExactExp),
            "paper" | "linear" => Ok(BetaMode::Linear),
            other => Err(Error::Config(format!(
                "unknown beta mode '{other}' (expected exact or paper)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteLifConfig {
    pub base: LifConfig,
    pub dt: f64,
    pub beta_mode: BetaMode,
}

impl DiscreteLifConfig {
    pub fn new(base: LifConfig, dt: f64, beta_mode: BetaMode) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("time step must be > 0, got {dt}")));
        }
        let cfg = Self {
            base,
            dt,
            beta_mode,
        };
        cfg.beta()?;
        Ok(cfg)
    }

    /// Per-step decay factor.
    pub fn beta(&self) -> Result<f64> {
        match self.beta_mode {
            BetaMode::ExactExp => Ok(self.base.alpha.decay(self.dt)),
            BetaMode::Linear => match self.base.alpha {
                Leak::Infinite => Ok(1.0),
                Leak::Finite(a) if a > self.dt => Ok(1.0 - self.dt / a),
                Leak::Finite(a) => Err(Error::Config(format!(
                    "linear beta needs alpha > dt (alpha={a}, dt={})",
                    self.dt
                ))),
            },
        }
    }
}

/// Grid LIF: per step `u ← β·u + â_n`; if `|u| ≥ ϑ` emit `b̂_n` and discharge.
///
/// Input and output share the grid index, and the discharge is removed before the next decay,
/// which keeps the grid model in step with [`lif`] on grid-aligned trains.
pub fn lif_discrete(amplitudes: &[f64], cfg: &DiscreteLifConfig) -> Result<Vec<f64>> {
    let beta = cfg.beta()?;
    let theta = cfg.base.theta;
    let mut u = 0.0f64;
    Ok(amplitudes
        .iter()
        .map(|&a| {
            u = beta * u + a;
            if u.abs() >= theta {
                let b = discharge(u, theta, cfg.base.reset);
                u = match cfg.base.reset {
                    ResetMode::ToZero => 0.0,
                    _ => u - b,
                };
                b
            } else {
                0.0
            }
        })
        .collect())
}

/// Places each spike in cell `⌊t/Δt⌋` of a grid starting at zero.
pub fn to_grid(train: &SpikeTrain, dt: f64) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("time step must be > 0, got {dt}")));
    }
    let Some(last) = train.events().last() else {
        return Ok(Vec::new());
    };
    if let Some(first) = train.events().first().filter(|s| s.time < 0.0) {
        return Err(Error::Validation(format!(
            "negative spike time {} cannot be gridded",
            first.time
        )));
    }
    let mut grid = vec![0.0; (last.time / dt).floor() as usize + 1];
    let mut prev: Option<(usize, f64)> = None;
    for s in train {
        let k = (s.time / dt).floor() as usize;
        if let Some((pk, pt)) = prev {
            if pk == k {
                return Err(Error::Resolution {
                    first: pt,
                    second: s.time,
                    dt,
                });
            }
        }
        grid[k] = s.amplitude;
        prev = Some((k, s.time));
    }
    Ok(grid)
}

/// Inverse of [`to_grid`] for grid-aligned trains: cell `k` becomes a spike at `k·Δt`.
pub fn from_grid(amplitudes: &[f64], dt: f64) -> SpikeTrain {
    SpikeTrain::from_finite(
        amplitudes
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(k, &a)| Spike::new(k as f64 * dt, a))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-3;

    fn train(events: &[(f64, f64)]) -> SpikeTrain {
        SpikeTrain::new(events.iter().copied()).unwrap()
    }

    fn eta() -> SpikeTrain {
        train(&[(0.0, -1.5), (EPS, 1.0), (2.0 * EPS, 1.5)])
    }

    fn nu() -> SpikeTrain {
        train(&[(0.0, 1.0), (EPS, -1.0), (2.0 * EPS, 1.0)])
    }

    fn quantizer(alpha: Leak) -> LifConfig {
        LifConfig::quantizer(1.0, alpha).unwrap()
    }

    #[test]
    fn large_single_spike_is_truncated() {
        for alpha in [Leak::ZERO, Leak::Finite(3.0), Leak::Infinite] {
            let out = lif(&train(&[(0.7, 2.5)]), &quantizer(alpha));
            assert_eq!(out, train(&[(0.7, 2.0)]));
        }
        let neg = lif(&train(&[(0.0, -3.2)]), &quantizer(Leak::ZERO));
        assert_eq!(neg, train(&[(0.0, -3.0)]));
    }

    #[test]
    fn example_outputs_per_leak_regime() {
        assert_eq!(
            lif(&eta(), &quantizer(Leak::ZERO)),
            train(&[(0.0, -1.0), (2.0 * EPS, 2.0)])
        );
        assert_eq!(
            lif(&eta(), &quantizer(Leak::Infinite)),
            train(&[(0.0, -1.0), (EPS, 1.0), (2.0 * EPS, 1.0)])
        );
        assert_eq!(
            lif(&eta(), &quantizer(Leak::Finite(1.0))),
            train(&[(0.0, -1.0), (2.0 * EPS, 1.0)])
        );
        let perturbed = &eta() + &nu();
        for alpha in [
            Leak::ZERO,
            Leak::Finite(1.0),
            Leak::Finite(50.0),
            Leak::Infinite,
        ] {
            assert_eq!(
                lif(&perturbed, &quantizer(alpha)),
                train(&[(2.0 * EPS, 2.0)])
            );
        }
    }

    #[test]
    fn reset_modes_differ_on_large_input() {
        let t = train(&[(0.0, 2.5), (1.0, 0.2)]);
        let zero = LifConfig::new(1.0, Leak::ZERO, ResetMode::ToZero).unwrap();
        let sub = zero.with_reset(ResetMode::BySubtraction);
        let md = zero.with_reset(ResetMode::ToMod);
        assert_eq!(lif(&t, &zero), train(&[(0.0, 2.5)]));
        // 1.5 carried, 1.7 at t=1 fires again
        assert_eq!(lif(&t, &sub), train(&[(0.0, 1.0), (1.0, 1.0)]));
        assert_eq!(lif(&t, &md), train(&[(0.0, 2.0)]));
    }

    #[test]
    fn truncation_reproduces_exact_multiples() {
        for k in 1..50 {
            let theta = 0.3;
            let u = k as f64 * theta;
            assert_eq!(truncate_to_multiple(u, theta), u);
            assert_eq!(truncate_to_multiple(-u, theta), -u);
        }
        assert_eq!(truncate_to_multiple(1.8, 1.0), 1.0);
        assert_eq!(truncate_to_multiple(-1.8, 1.0), -1.0);
    }

    #[test]
    fn residual_of_example() {
        let (res, norm) = quantization_residual(&eta(), &quantizer(Leak::ZERO));
        assert_eq!(res, train(&[(0.0, -0.5), (EPS, 1.0), (2.0 * EPS, -0.5)]));
        assert_eq!(norm, 0.5);
        let fixed = train(&[(0.0, 1.0), (1.0, -2.0), (2.0, 1.0)]);
        let (res, norm) = quantization_residual(&fixed, &quantizer(Leak::ZERO));
        assert!(res.is_empty());
        assert_eq!(norm, 0.0);
    }

    #[test]
    fn discrete_single_large_spike() {
        let cfg =
            DiscreteLifConfig::new(quantizer(Leak::Finite(1.0)), 0.1, BetaMode::ExactExp).unwrap();
        let out = lif_discrete(&[2.5, 0.0, 0.0, 0.0], &cfg).unwrap();
        assert_eq!(out, vec![2.0, 0.0, 0.0, 0.0]);
        assert_eq!(lif_discrete(&[0.0; 6], &cfg).unwrap(), vec![0.0; 6]);
    }

    #[test]
    fn discrete_linear_beta_needs_large_time_constant() {
        let base = quantizer(Leak::Finite(0.05));
        assert!(DiscreteLifConfig::new(base, 0.1, BetaMode::Linear).is_err());
        let ok =
            DiscreteLifConfig::new(quantizer(Leak::Finite(0.5)), 0.1, BetaMode::Linear).unwrap();
        assert!((ok.beta().unwrap() - 0.8).abs() < 1e-15);
        assert!(DiscreteLifConfig::new(base, 0.0, BetaMode::ExactExp).is_err());
    }

    #[test]
    fn grid_conversion() {
        assert_eq!(
            to_grid(&train(&[(0.26, 1.0)]), 0.25).unwrap(),
            vec![0.0, 1.0]
        );
        match to_grid(&train(&[(0.1, 1.0), (0.15, 1.0)]), 0.25) {
            Err(Error::Resolution { first, second, .. }) => {
                assert_eq!((first, second), (0.1, 0.15));
            }
            other => panic!("expected collision error, got {other:?}"),
        }
        assert!(to_grid(&SpikeTrain::empty(), 0.25).unwrap().is_empty());
        assert!(to_grid(&train(&[(-1.0, 1.0)]), 0.25).is_err());
        let g = [0.0, 1.5, 0.0, -2.0];
        assert_eq!(from_grid(&g, 0.5), train(&[(0.5, 1.5), (1.5, -2.0)]));
    }

    #[test]
    fn reset_mode_strings() {
        for m in ResetMode::ALL {
            assert_eq!(m.as_str().parse::<ResetMode>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert!("foo".parse::<ResetMode>().is_err());
        assert!(LifConfig::new(0.0, Leak::ZERO, ResetMode::ToMod).is_err());
    }
}
