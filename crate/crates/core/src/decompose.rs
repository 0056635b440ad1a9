//! Splitting a train into its `ϑ`-quantized part and a sub-threshold residual, and
//! breaking the quantized part into trains of unit `‖·‖_{A,0}` norm.
//!
//! The unit decomposition works on the integer walk `S_k = Σ_{i≤k} a_i/ϑ`. With
//! `N = max_k |S_k| ≥ 2`, one round picks a unit walk `D_k ∈ {-1, 0, 1}` such that
//! `|S_k − D_k| ≤ N − 1` everywhere; subtracting its increments lowers the norm by exactly
//! one. The round takes `D_k = sgn(S_k)` where `|S_k| = N` and `D_k = 0` elsewhere, so every
//! peak of the walk moves one step towards zero and stretches that never reach `±N` are
//! left alone.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lif::{lif, LifConfig, ResetMode};
use crate::norms::alexiewicz_norm;
use crate::spike::{Spike, SpikeTrain};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    /// Quantized part, the LIF output.
    pub psi: SpikeTrain,
    /// Residual `η − ψ`.
    pub rho: SpikeTrain,
    /// Unit-norm trains summing to `psi`.
    pub units: Vec<SpikeTrain>,
}

/// `η = ψ + ρ` with `ψ = LIF(η)`; only meaningful for reset-to-mod.
pub fn quantize_split(train: &SpikeTrain, cfg: &LifConfig) -> Result<(SpikeTrain, SpikeTrain)> {
    if cfg.reset != ResetMode::ToMod {
        return Err(Error::Unsupported(
            "quantized split requires the reset-to-mod neuron",
        ));
    }
    let psi = lif(train, cfg);
    let rho = train - &psi;
    Ok((psi, rho))
}

/// Full decomposition: split, then unit-decompose the quantized part.
pub fn decompose(train: &SpikeTrain, cfg: &LifConfig) -> Result<Decomposition> {
    let (psi, rho) = quantize_split(train, cfg)?;
    let units = unit_decompose(&psi, cfg.theta)?;
    Ok(Decomposition { psi, rho, units })
}

/// Amplitudes of `train` as integer multiples of `theta` (within `1e-9`).
pub fn snap_to_multiples(train: &SpikeTrain, theta: f64) -> Result<Vec<i64>> {
    train
        .iter()
        .map(|s| {
            let ratio = s.amplitude / theta;
            let k = ratio.round();
            if (ratio - k).abs() > 1e-9 {
                Err(Error::Validation(format!(
                    "amplitude {} at t={} is not an integer multiple of {theta}",
                    s.amplitude, s.time
                )))
            } else {
                Ok(k as i64)
            }
        })
        .collect()
}

/// Decomposes a `ϑ`-quantized train into `‖ψ/ϑ‖_{A,0}` trains of unit norm whose sum is `ψ`.
pub fn unit_decompose(psi: &SpikeTrain, theta: f64) -> Result<Vec<SpikeTrain>> {
    let counts = snap_to_multiples(psi, theta)?;
    let times: Vec<f64> = psi.times().collect();
    Ok(unit_decompose_counts(&counts)
        .into_iter()
        .map(|unit| {
            SpikeTrain::from_finite(
                times
                    .iter()
                    .zip(unit)
                    .filter(|(_, d)| *d != 0)
                    .map(|(&t, d)| Spike::new(t, d as f64 * theta))
                    .collect(),
            )
        })
        .collect())
}

/// `max_k |Σ_{i≤k} c_i|`.
pub fn walk_norm(counts: &[i64]) -> i64 {
    counts
        .iter()
        .scan(0i64, |s, &c| {
            *s += c;
            Some(s.abs())
        })
        .max()
        .unwrap_or(0)
}

fn walk(counts: &[i64]) -> Vec<i64> {
    counts
        .iter()
        .scan(0i64, |s, &c| {
            *s += c;
            Some(*s)
        })
        .collect()
}

/// Peak structure of a walk whose first extreme is positive (0-based event indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Peaks {
    pub level: i64,
    /// First index reaching `level`, then each next index back at `level − 1` or above.
    pub top: Vec<usize>,
    /// For the stretch after each top peak: first index of its minimum, if that minimum is
    /// at most `-1`. `None` means the walk never dips below zero there and the stretch
    /// continues the preceding up interval.
    pub bottom: Vec<Option<usize>>,
}

/// Top and bottom peak indices of the walk of `counts` (assumed oriented so that the first
/// extreme is positive).
pub fn peaks(counts: &[i64]) -> Peaks {
    let s = walk(counts);
    let level = walk_norm(counts);
    let mut top = Vec::new();
    if let Some(first) = s.iter().position(|&v| v == level) {
        top.push(first);
        let mut k = first;
        while let Some(next) = (k + 1..s.len()).find(|&j| s[j] >= level - 1) {
            top.push(next);
            k = next;
        }
    }
    let bottom = top
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let end = top.get(i + 1).map_or(s.len(), |&n| n + 1);
            let stretch = m + 1..end;
            let min = stretch.clone().map(|j| s[j]).min()?;
            (min <= -1).then(|| stretch.clone().find(|&j| s[j] == min).unwrap())
        })
        .collect();
    Peaks { level, top, bottom }
}

/// Increments of the unit walk of one round on a walk with norm `level ≥ 1`.
fn unit_round(s: &[i64], level: i64) -> Vec<i64> {
    let mut d_prev = 0i64;
    s.iter()
        .map(|&sk| {
            let d = if sk.abs() == level { sk.signum() } else { 0 };
            let step = d - d_prev;
            d_prev = d;
            step
        })
        .collect()
}

/// Integer core of [`unit_decompose`]: returns `walk_norm(counts)` vectors over the same index
/// set, each of walk norm one, summing to `counts`.
pub fn unit_decompose_counts(counts: &[i64]) -> Vec<Vec<i64>> {
    let mut rest = counts.to_vec();
    let mut units = Vec::new();
    loop {
        let level = walk_norm(&rest);
        if level == 0 {
            return units;
        }
        let delta = unit_round(&walk(&rest), level);
        for (r, d) in rest.iter_mut().zip(&delta) {
            *r -= d;
        }
        debug_assert_eq!(walk_norm(&rest), level - 1);
        debug_assert_eq!(walk_norm(&delta), 1);
        units.push(delta);
    }
}

/// Checks `‖ρ‖_{A,α} < ϑ` for a split produced by [`quantize_split`].
pub fn residual_is_subthreshold(rho: &SpikeTrain, cfg: &LifConfig) -> bool {
    alexiewicz_norm(rho, cfg.alpha) < cfg.theta
}
