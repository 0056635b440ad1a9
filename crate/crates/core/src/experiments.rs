//! Randomized experiments checking the quantization, perturbation and Lipschitz-style bounds.
//!
//! Every trial draws its inputs from its own [`SplitMix64`] stream derived from the
//! configured seed and the trial index, so reports are identical whether trials run
//! sequentially or in parallel.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lif::{lif, quantization_residual, LifConfig, ResetMode};
use crate::norms::{alexiewicz_norm, l2_norm, Leak};
use crate::rng::SplitMix64;
use crate::snn::{gamma_for, snn_error_bound, snn_forward, GammaPolicy, SnnNetwork};
use crate::spike::{Spike, SpikeTrain};

/// Slack on inequalities whose sides are computed in floating point.
pub const BOUND_TOL: f64 = 1e-9;
/// Slack standing in for the second-order term of the lag bound.
pub const LAG_TOL: f64 = 1e-6;
/// Number of histogram buckets in report summaries.
pub const HISTOGRAM_BUCKETS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n_trials: usize,
    pub n_spikes: usize,
    pub amp_range: (f64, f64),
    pub alphas: Vec<Leak>,
    pub theta: f64,
    pub grid_spacing: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::quantization()
    }
}

impl ExperimentConfig {
    /// 100 trains of 50 spikes with amplitudes in `[-2, 2]`, `ϑ = 1`.
    pub fn quantization() -> Self {
        Self {
            seed: 7,
            n_trials: 100,
            n_spikes: 50,
            amp_range: (-2.0, 2.0),
            alphas: [0.01, 0.1, 1.0, 10.0, 100.0].map(Leak::Finite).to_vec(),
            theta: 1.0,
            grid_spacing: 1.0,
        }
    }

    pub fn lag_threshold() -> Self {
        Self {
            n_trials: 200,
            alphas: [0.2, 0.5, 0.8].map(Leak::Finite).to_vec(),
            ..Self::quantization()
        }
    }

    /// The `alphas` field is the leak sweep run at `ϑ = 0.3`; the threshold sweeps use `α = 4`.
    pub fn quasi_isometry() -> Self {
        Self {
            n_trials: 200,
            alphas: [0.0, 0.5, 1.0, 2.0, 4.0, 8.0].map(Leak::Finite).to_vec(),
            theta: 0.3,
            ..Self::quantization()
        }
    }

    pub fn snn_bound() -> Self {
        Self {
            n_trials: 100,
            n_spikes: 20,
            alphas: vec![
                Leak::ZERO,
                Leak::Finite(0.5),
                Leak::Finite(1.0),
                Leak::Infinite,
            ],
            ..Self::quantization()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.amp_range;
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Config(format!("empty amplitude range [{lo}, {hi})")));
        }
        if self.n_trials == 0 {
            return Err(Error::Config("need at least one trial".into()));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::Config(format!(
                "threshold must be > 0, got {}",
                self.theta
            )));
        }
        if !(self.grid_spacing > 0.0 && self.grid_spacing.is_finite()) {
            return Err(Error::Config("grid spacing must be > 0".into()));
        }
        Ok(())
    }

    fn neuron(&self, alpha: Leak, reset: ResetMode) -> Result<LifConfig> {
        LifConfig::new(self.theta, alpha, reset)
    }
}

/// Stream ids are `tag << 32 | index` so different draws in one experiment never share a stream.
fn stream(tag: u64, index: usize) -> u64 {
    (tag << 32) | index as u64
}

/// `n_spikes` spikes at `k·grid_spacing`, `k = 1..=n_spikes`, with i.i.d. uniform amplitudes.
pub fn gen_random_train(cfg: &ExperimentConfig, rng_stream: u64) -> SpikeTrain {
    let mut rng = SplitMix64::for_stream(cfg.seed, rng_stream);
    random_grid_train(&mut rng, cfg.n_spikes, cfg.amp_range, cfg.grid_spacing)
}

pub fn random_grid_train(
    rng: &mut SplitMix64,
    n_spikes: usize,
    (lo, hi): (f64, f64),
    spacing: f64,
) -> SpikeTrain {
    SpikeTrain::from_finite(
        (1..=n_spikes)
            .map(|k| Spike::new(k as f64 * spacing, rng.uniform(lo, hi)))
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub experiment: &'static str,
    pub variant: String,
    /// Swept parameter of the variant (spike count, lag, threshold offset, λ, ...).
    pub param: f64,
    pub reset: ResetMode,
    pub alpha: Leak,
    pub theta: f64,
    pub trial: usize,
    pub measured: f64,
    pub bound: Option<f64>,
    /// Set only where the bound is a guaranteed inequality for this row.
    pub pass: Option<bool>,
}

/// Experiment-level assertion that is not tied to a single trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(values: &[f64], buckets: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0; buckets];
        if values.is_empty() {
            return Self {
                lo: 0.0,
                hi: 0.0,
                counts,
            };
        }
        let width = (hi - lo) / buckets as f64;
        for &v in values {
            let k = if width > 0.0 {
                (((v - lo) / width) as usize).min(buckets - 1)
            } else {
                0
            };
            counts[k] += 1;
        }
        Self { lo, hi, counts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub variant: String,
    pub param: f64,
    pub reset: ResetMode,
    pub alpha: Leak,
    pub theta: f64,
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub failures: usize,
    pub histogram: Histogram,
}

/// `(α, λ)` grid of measured output differences, rows indexed by `α`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaLambdaSurface {
    pub label: String,
    pub alphas: Vec<Leak>,
    pub lambdas: Vec<f64>,
    pub measured: Vec<Vec<f64>>,
    pub bound: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaEstimate {
    pub alpha: Leak,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: &'static str,
    pub records: Vec<TrialRecord>,
    pub checks: Vec<Check>,
    pub surfaces: Vec<AlphaLambdaSurface>,
}

impl ExperimentReport {
    fn new(name: &'static str, records: Vec<TrialRecord>) -> Self {
        Self {
            name,
            records,
            checks: Vec::new(),
            surfaces: Vec::new(),
        }
    }

    pub fn failed_records(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| r.pass == Some(false))
    }

    /// No failing pass flag and no failing check.
    pub fn all_passed(&self) -> bool {
        self.failed_records().next().is_none() && self.checks.iter().all(|c| c.passed)
    }

    pub fn select<'a>(&'a self, variant: &'a str) -> impl Iterator<Item = &'a TrialRecord> + 'a {
        self.records.iter().filter(move |r| r.variant == variant)
    }

    /// Groups records by `(variant, param, reset, alpha, theta)` in first-seen order.
    pub fn summaries(&self) -> Vec<GroupSummary> {
        let mut groups: Vec<(GroupKey, Vec<&TrialRecord>)> = Vec::new();
        for r in &self.records {
            let key = GroupKey::of(r);
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, rows)) => rows.push(r),
                None => groups.push((key, vec![r])),
            }
        }
        groups
            .into_iter()
            .map(|(_, rows)| {
                let first = rows[0];
                let values: Vec<f64> = rows.iter().map(|r| r.measured).collect();
                GroupSummary {
                    variant: first.variant.clone(),
                    param: first.param,
                    reset: first.reset,
                    alpha: first.alpha,
                    theta: first.theta,
                    n: rows.len(),
                    min: values.iter().copied().fold(f64::INFINITY, f64::min),
                    max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    mean: mean(&values),
                    failures: rows.iter().filter(|r| r.pass == Some(false)).count(),
                    histogram: Histogram::new(&values, HISTOGRAM_BUCKETS),
                }
            })
            .collect()
    }
}

#[derive(PartialEq)]
struct GroupKey {
    variant: String,
    param: u64,
    reset: ResetMode,
    alpha: (bool, u64),
    theta: u64,
}

impl GroupKey {
    fn of(r: &TrialRecord) -> Self {
        Self {
            variant: r.variant.clone(),
            param: r.param.to_bits(),
            reset: r.reset,
            alpha: (r.alpha.is_finite(), r.alpha.rate().to_bits()),
            theta: r.theta.to_bits(),
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut r = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, my) = (mean(&rx), mean(&ry));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

fn par_trials<F>(n: usize, f: F) -> Vec<TrialRecord>
where
    F: Fn(usize) -> Vec<TrialRecord> + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(f)
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Spike counts of the quantization error sweep.
pub const N_SWEEP: [usize; 5] = [100, 200, 300, 400, 500];

/// Quantization error `‖LIF(η) − η‖` in the Alexiewicz and L2 prefix norms for every reset
/// mode and leak, plus a spike-count sweep at `α = 1`.
pub fn exp_quantization(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let theta = cfg.theta;
    let row = |variant: &str, param: f64, reset, alpha, trial, measured, bounded: bool| {
        let bound = bounded.then_some(theta);
        TrialRecord {
            experiment: "quantization",
            variant: variant.to_string(),
            param,
            reset,
            alpha,
            theta,
            trial,
            measured,
            bound,
            pass: (bounded && reset == ResetMode::ToMod).then_some(measured < theta),
        }
    };
    let mut records = par_trials(cfg.n_trials, |trial| {
        let eta = gen_random_train(cfg, stream(1, trial));
        let mut rows = Vec::new();
        for reset in ResetMode::ALL {
            for &alpha in &cfg.alphas {
                let neuron = cfg.neuron(alpha, reset).expect("validated");
                let (residual, a_err) = quantization_residual(&eta, &neuron);
                rows.push(row(
                    "a_norm",
                    cfg.n_spikes as f64,
                    reset,
                    alpha,
                    trial,
                    a_err,
                    true,
                ));
                if let Ok(l2) = l2_norm(&residual, alpha) {
                    rows.push(row(
                        "l2",
                        cfg.n_spikes as f64,
                        reset,
                        alpha,
                        trial,
                        l2,
                        false,
                    ));
                }
            }
        }
        rows
    });

    let sweep_alpha = Leak::Finite(1.0);
    for n in N_SWEEP {
        let sweep_cfg = ExperimentConfig {
            n_spikes: n,
            ..cfg.clone()
        };
        records.extend(par_trials(cfg.n_trials, |trial| {
            let eta = gen_random_train(&sweep_cfg, stream(2, trial));
            let mut rows = Vec::new();
            for reset in ResetMode::ALL {
                let neuron = cfg.neuron(sweep_alpha, reset).expect("validated");
                let (residual, a_err) = quantization_residual(&eta, &neuron);
                let l2 = l2_norm(&residual, sweep_alpha).expect("finite leak");
                rows.push(row(
                    "n_sweep_a",
                    n as f64,
                    reset,
                    sweep_alpha,
                    trial,
                    a_err,
                    true,
                ));
                rows.push(row(
                    "n_sweep_l2",
                    n as f64,
                    reset,
                    sweep_alpha,
                    trial,
                    l2,
                    false,
                ));
            }
            rows
        }));
    }

    let mut report = ExperimentReport::new("quantization", records);
    let by_n = |variant: &str, reduce: fn(&[f64]) -> f64| -> Vec<f64> {
        N_SWEEP
            .iter()
            .map(|&n| {
                let v: Vec<f64> = report
                    .select(variant)
                    .filter(|r| r.reset == ResetMode::ToMod && r.param == n as f64)
                    .map(|r| r.measured)
                    .collect();
                reduce(&v)
            })
            .collect()
    };
    let l2_means = by_n("n_sweep_l2", mean);
    let a_max = by_n("n_sweep_a", |v| v.iter().copied().fold(0.0, f64::max));
    let ns: Vec<f64> = N_SWEEP.iter().map(|&n| n as f64).collect();
    let rho = spearman(&ns, &l2_means);
    let strictly = l2_means.windows(2).all(|w| w[0] < w[1]);
    report.checks.push(Check {
        name: "l2_error_grows_with_spike_count".into(),
        passed: rho > 0.0 && strictly,
        detail: format!("means {l2_means:?}, spearman {rho}"),
    });
    report.checks.push(Check {
        name: "a_norm_error_bounded_for_all_spike_counts".into(),
        passed: a_max.iter().all(|&m| m < theta),
        detail: format!("max per N {a_max:?}"),
    });
    Ok(report)
}

/// Lag and threshold-offset perturbations of a single neuron.
///
/// Lag rows: `‖LIF(η(· − Δt)) − LIF(η)‖` against
/// `max|a| + 2ϑ + Δt·α(‖η‖ + max|a|)`, asserted (with slack [`LAG_TOL`]) for reset-to-mod and
/// `Δt ≤ 0.01·grid_spacing`. Threshold rows: `‖LIF_{ϑ+ε}(η) − LIF_ϑ(η)‖ ≤ 2ϑ + ε`.
pub fn exp_lag_threshold(
    cfg: &ExperimentConfig,
    dt_list: &[f64],
    eps_list: &[f64],
) -> Result<ExperimentReport> {
    cfg.validate()?;
    if dt_list
        .iter()
        .chain(eps_list)
        .any(|v| !(v.is_finite() && *v >= 0.0))
    {
        return Err(Error::Config(
            "lags and threshold offsets must be >= 0".into(),
        ));
    }
    let theta = cfg.theta;
    let small_lag = 0.01 * cfg.grid_spacing;
    let records = par_trials(cfg.n_trials, |trial| {
        let eta = gen_random_train(cfg, stream(3, trial));
        let max_amp = eta.max_abs_amplitude();
        let mut rows = Vec::new();
        for reset in ResetMode::ALL {
            for &alpha in &cfg.alphas {
                let neuron = cfg.neuron(alpha, reset).expect("validated");
                let base = lif(&eta, &neuron);
                let eta_norm = alexiewicz_norm(&eta, alpha);
                for &dt in dt_list {
                    let shifted = lif(&eta.shift(dt), &neuron);
                    let measured = alexiewicz_norm(&(&shifted - &base), alpha);
                    let bound = alpha
                        .is_finite()
                        .then(|| max_amp + 2.0 * theta + dt * alpha.rate() * (eta_norm + max_amp));
                    let pass = bound
                        .filter(|_| reset == ResetMode::ToMod && dt <= small_lag)
                        .map(|b| measured <= b + LAG_TOL);
                    rows.push(TrialRecord {
                        experiment: "lag_threshold",
                        variant: "lag".into(),
                        param: dt,
                        reset,
                        alpha,
                        theta,
                        trial,
                        measured,
                        bound,
                        pass,
                    });
                }
                for &eps in eps_list {
                    let raised = neuron.with_theta(theta + eps).expect("positive");
                    let measured = alexiewicz_norm(&(&lif(&eta, &raised) - &base), alpha);
                    let bound = 2.0 * theta + eps;
                    rows.push(TrialRecord {
                        experiment: "lag_threshold",
                        variant: "threshold".into(),
                        param: eps,
                        reset,
                        alpha,
                        theta,
                        trial,
                        measured,
                        bound: Some(bound),
                        pass: (reset == ResetMode::ToMod).then_some(measured <= bound + BOUND_TOL),
                    });
                }
            }
        }
        rows
    });
    Ok(ExperimentReport::new("lag_threshold", records))
}

/// Threshold sweep of the quasi-isometry experiment at `α = 4`.
pub const QI_THETAS: [f64; 6] = [2.0, 1.0, 0.5, 0.3, 0.1, 0.05];
/// Leak used by the threshold sweeps.
pub const QI_ALPHA: Leak = Leak::Finite(4.0);
/// Number of halvings `ϑ = 2^{-k}` in the asymptotic isometry sweep.
pub const QI_HALVINGS: usize = 11;

/// `| ‖LIF(η₁) − LIF(η₂)‖ − ‖η₁ − η₂‖ |` against `2ϑ` over threshold and leak sweeps, and the
/// shrinking of that deviation as `ϑ` is halved.
pub fn exp_quasi_isometry(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let halving: Vec<f64> = (0..QI_HALVINGS).map(|k| 0.5f64.powi(k as i32)).collect();
    let records = par_trials(cfg.n_trials, |trial| {
        let a = gen_random_train(cfg, stream(4, trial));
        let b = gen_random_train(cfg, stream(5, trial));
        let mut rows = Vec::new();
        let mut push = |variant: &str, param: f64, reset, alpha: Leak, theta: f64| {
            let neuron = LifConfig::new(theta, alpha, reset).expect("positive threshold");
            let d_in = alexiewicz_norm(&(&a - &b), alpha);
            let d_out = alexiewicz_norm(&(&lif(&a, &neuron) - &lif(&b, &neuron)), alpha);
            let measured = (d_out - d_in).abs();
            rows.push(TrialRecord {
                experiment: "quasi_isometry",
                variant: variant.to_string(),
                param,
                reset,
                alpha,
                theta,
                trial,
                measured,
                bound: Some(2.0 * theta),
                pass: (reset == ResetMode::ToMod).then_some(measured <= 2.0 * theta + BOUND_TOL),
            });
        };
        for reset in ResetMode::ALL {
            for theta in QI_THETAS {
                push("theta_sweep", theta, reset, QI_ALPHA, theta);
            }
            for &alpha in &cfg.alphas {
                push("alpha_sweep", alpha.rate(), reset, alpha, cfg.theta);
            }
        }
        for &theta in &halving {
            push("halving", theta, ResetMode::ToMod, QI_ALPHA, theta);
        }
        // input distance, for the relative convergence check
        rows.push(TrialRecord {
            experiment: "quasi_isometry",
            variant: "input_distance".into(),
            param: 0.0,
            reset: ResetMode::ToMod,
            alpha: QI_ALPHA,
            theta: 0.0,
            trial,
            measured: alexiewicz_norm(&(&a - &b), QI_ALPHA),
            bound: None,
            pass: None,
        });
        rows
    });
    let mut report = ExperimentReport::new("quasi_isometry", records);
    let means: Vec<f64> = halving
        .iter()
        .map(|&t| {
            let v: Vec<f64> = report
                .select("halving")
                .filter(|r| r.param == t)
                .map(|r| r.measured)
                .collect();
            mean(&v)
        })
        .collect();
    let d_in = mean(
        &report
            .select("input_distance")
            .map(|r| r.measured)
            .collect::<Vec<_>>(),
    );
    let rho = spearman(&halving, &means);
    let last = *means.last().unwrap();
    report.checks.push(Check {
        name: "deviation_vanishes_as_threshold_halves".into(),
        passed: rho > 0.0 && last <= 0.05 * d_in,
        detail: format!(
            "mean deviation per halving {means:?}, spearman {rho}, mean input distance {d_in}"
        ),
    });
    Ok(report)
}

/// The three-spike example pair: `η = (−3/2, 1, 3/2)`, `ν = (1, −1, 1)` at `0, ε, 2ε`.
pub fn example_pair(eps: f64) -> (SpikeTrain, SpikeTrain) {
    let times = [0.0, eps, 2.0 * eps];
    let eta = SpikeTrain::from_finite(
        times
            .iter()
            .zip([-1.5, 1.0, 1.5])
            .map(|(&t, a)| Spike::new(t, a))
            .collect(),
    );
    let nu = SpikeTrain::from_finite(
        times
            .iter()
            .zip([1.0, -1.0, 1.0])
            .map(|(&t, a)| Spike::new(t, a))
            .collect(),
    );
    (eta, nu)
}

/// Four illustrative variations of the example pair used for `(α, λ)` surfaces: the original,
/// its mirror image, a perturbation with flipped sign pattern, and a ten times wider spacing.
pub fn example_variations(eps: f64) -> Vec<(&'static str, SpikeTrain, SpikeTrain)> {
    let (eta, nu) = example_pair(eps);
    let (wide_eta, wide_nu) = example_pair(10.0 * eps);
    vec![
        ("original", eta.clone(), nu.clone()),
        ("mirrored", -&eta, -&nu),
        ("flipped_perturbation", eta, -&nu),
        ("wide_spacing", wide_eta, wide_nu),
    ]
}

type Runner<'a> = Box<dyn Fn(&[SpikeTrain]) -> Result<Vec<SpikeTrain>> + Sync + 'a>;

/// What an `(α, λ)` surface is measured on.
#[derive(Debug, Clone)]
pub enum AlphaLambdaTarget {
    /// A single neuron; its leak is replaced by each grid value.
    Neuron { theta: f64, reset: ResetMode },
    /// A network; its neuron leak is replaced by each grid value.
    Network(SnnNetwork),
}

/// For each `(α, λ)`: `max_j ‖target(η + λν)_j − target(η)_j‖_{A,α}` and the matching
/// Lipschitz-style bound with the safe `γ`.
pub fn exp_alpha_lambda(
    base: &[SpikeTrain],
    perturbation: &[SpikeTrain],
    alpha_grid: &[Leak],
    lambda_grid: &[f64],
    target: &AlphaLambdaTarget,
) -> Result<AlphaLambdaSurface> {
    if alpha_grid.is_empty() || lambda_grid.is_empty() {
        return Err(Error::Config(
            "alpha and lambda grids must be non-empty".into(),
        ));
    }
    if base.len() != perturbation.len() {
        return Err(Error::Config(
            "one perturbation train per input is required".into(),
        ));
    }
    if let AlphaLambdaTarget::Neuron { .. } = target {
        if base.len() != 1 {
            return Err(Error::Config(
                "a single neuron takes exactly one input".into(),
            ));
        }
    }
    let rows: Vec<(Vec<f64>, Vec<f64>)> = alpha_grid
        .par_iter()
        .map(|&alpha| -> Result<(Vec<f64>, Vec<f64>)> {
            let gamma = gamma_for(alpha, GammaPolicy::Safe);
            let run: Runner = match target {
                AlphaLambdaTarget::Neuron { theta, reset } => {
                    let neuron = LifConfig::new(*theta, alpha, *reset)?;
                    Box::new(move |inp: &[SpikeTrain]| Ok(vec![lif(&inp[0], &neuron)]))
                }
                AlphaLambdaTarget::Network(net) => {
                    let net = net.with_neuron(net.neuron().with_alpha(alpha));
                    Box::new(move |inp: &[SpikeTrain]| snn_forward(inp, &net))
                }
            };
            let reference = run(base)?;
            let mut measured = Vec::with_capacity(lambda_grid.len());
            let mut bound = Vec::with_capacity(lambda_grid.len());
            for &lambda in lambda_grid {
                let scaled: Vec<SpikeTrain> =
                    perturbation.iter().map(|p| p.scale(lambda)).collect();
                let perturbed: Vec<SpikeTrain> =
                    base.iter().zip(&scaled).map(|(b, p)| b + p).collect();
                let out = run(&perturbed)?;
                measured.push(
                    out.iter()
                        .zip(&reference)
                        .map(|(o, r)| alexiewicz_norm(&(o - r), alpha))
                        .fold(0.0, f64::max),
                );
                let nu_norms: Vec<f64> = scaled.iter().map(|p| alexiewicz_norm(p, alpha)).collect();
                bound.push(match target {
                    AlphaLambdaTarget::Neuron { theta, .. } => {
                        gamma * (nu_norms[0] / theta).ceil() * theta
                    }
                    AlphaLambdaTarget::Network(net) => {
                        snn_error_bound(&nu_norms, net, gamma, net.neuron().theta)?
                            .into_iter()
                            .fold(0.0, f64::max)
                    }
                });
            }
            Ok((measured, bound))
        })
        .collect::<Result<_>>()?;
    let (measured, bound) = rows.into_iter().unzip();
    Ok(AlphaLambdaSurface {
        label: String::new(),
        alphas: alpha_grid.to_vec(),
        lambdas: lambda_grid.to_vec(),
        measured,
        bound,
    })
}

/// The 2-3-1 network with weights `[[1,1],[1,2]]`, `[[.5,0],[.5,.5],[0,-.5]]`, `[[1,1,1]]`.
pub fn example_network(neuron: LifConfig) -> SnnNetwork {
    SnnNetwork::from_rows(
        vec![
            vec![vec![1.0, 1.0], vec![1.0, 2.0]],
            vec![vec![0.5, 0.0], vec![0.5, 0.5], vec![0.0, -0.5]],
            vec![vec![1.0, 1.0, 1.0]],
        ],
        neuron,
    )
    .expect("static shapes chain")
}

/// `α ∈ {0, 0.25, …, 10}` and `λ ∈ {0, 0.05, …, 1}`.
pub fn default_alpha_lambda_grids() -> (Vec<Leak>, Vec<f64>) {
    let alphas = (0..=40).map(|k| Leak::Finite(k as f64 * 0.25)).collect();
    let lambdas = (0..=20).map(|k| k as f64 * 0.05).collect();
    (alphas, lambdas)
}

/// `(α, λ)` surfaces for the example variations on a single reset-to-mod neuron and for the
/// 2-3-1 network with a single added spike on its first input, flattened into report rows.
pub fn alpha_lambda_report(seed: u64, eps: f64) -> Result<ExperimentReport> {
    let (alphas, lambdas) = default_alpha_lambda_grids();
    let mut surfaces = Vec::new();
    for reset in [ResetMode::ToMod, ResetMode::ToZero] {
        for (name, eta, nu) in example_variations(eps) {
            let mut s = exp_alpha_lambda(
                &[eta],
                &[nu],
                &alphas,
                &lambdas,
                &AlphaLambdaTarget::Neuron { theta: 1.0, reset },
            )?;
            s.label = format!("neuron_{name}_{reset}");
            surfaces.push((reset, s));
        }
    }
    let mut rng = SplitMix64::for_stream(seed, stream(6, 0));
    let inputs: Vec<SpikeTrain> = (0..2)
        .map(|_| random_grid_train(&mut rng, 8, (-1.0, 1.0), 1.0))
        .collect();
    for (name, at) in [("snn_red", 3.0), ("snn_green", 5.5)] {
        let spike = SpikeTrain::from_finite(vec![Spike::new(at, 1.0)]);
        for reset in [ResetMode::ToMod, ResetMode::ToZero] {
            let net = example_network(LifConfig::new(1.0, Leak::ZERO, reset)?);
            let mut s = exp_alpha_lambda(
                &inputs,
                &[spike.clone(), SpikeTrain::empty()],
                &alphas,
                &lambdas,
                &AlphaLambdaTarget::Network(net),
            )?;
            s.label = format!("{name}_{reset}");
            surfaces.push((reset, s));
        }
    }
    let mut records = Vec::new();
    for (reset, s) in &surfaces {
        for (i, &alpha) in s.alphas.iter().enumerate() {
            for (j, &lambda) in s.lambdas.iter().enumerate() {
                let (measured, bound) = (s.measured[i][j], s.bound[i][j]);
                records.push(TrialRecord {
                    experiment: "alpha_lambda",
                    variant: s.label.clone(),
                    param: lambda,
                    reset: *reset,
                    alpha,
                    theta: 1.0,
                    trial: 0,
                    measured,
                    bound: Some(bound),
                    pass: (*reset == ResetMode::ToMod).then_some(measured <= bound + BOUND_TOL),
                });
            }
        }
    }
    let mut report = ExperimentReport::new("alpha_lambda", records);
    report.surfaces = surfaces.into_iter().map(|(_, s)| s).collect();
    Ok(report)
}

/// `‖LIF_{1,α}(η + ν) − LIF_{1,α}(η)‖ / ⌈‖ν‖⌉`, or `None` when `ν` has zero norm.
pub fn amplification_ratio(eta: &SpikeTrain, nu: &SpikeTrain, alpha: Leak) -> Option<f64> {
    let denom = alexiewicz_norm(nu, alpha).ceil();
    if denom == 0.0 {
        return None;
    }
    let neuron = LifConfig::quantizer(1.0, alpha).expect("unit threshold");
    let diff = &lif(&(eta + nu), &neuron) - &lif(eta, &neuron);
    Some(alexiewicz_norm(&diff, alpha) / denom)
}

/// Random pair for the amplification search: a few spikes with gaps spread over several
/// orders of magnitude; `ν` lives on a random subset of the same instants.
pub fn random_perturbation_pair(rng: &mut SplitMix64) -> (SpikeTrain, SpikeTrain) {
    let n = 2 + rng.below(7) as usize;
    let mut t = 0.0;
    let mut eta = Vec::with_capacity(n);
    let mut nu = Vec::new();
    let nu_scale = rng.uniform(0.2, 2.5);
    for _ in 0..n {
        eta.push(Spike::new(t, rng.uniform(-2.0, 2.0)));
        if rng.unit() < 0.7 {
            nu.push(Spike::new(t, rng.uniform(-1.0, 1.0) * nu_scale));
        }
        t += 10f64.powf(rng.uniform(-4.0, 0.5));
    }
    (SpikeTrain::from_finite(eta), SpikeTrain::from_finite(nu))
}

/// Largest amplification ratio found per leak, seeded with the example pair at shrinking
/// spacings and its variations, followed by `search_budget` random pairs.
pub fn estimate_gamma(alpha_grid: &[Leak], search_budget: usize, seed: u64) -> Vec<GammaEstimate> {
    let mut seeds = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        for (_, eta, nu) in example_variations(eps) {
            seeds.push((eta, nu));
        }
    }
    alpha_grid
        .par_iter()
        .map(|&alpha| {
            let seeded = seeds
                .iter()
                .filter_map(|(e, n)| amplification_ratio(e, n, alpha));
            let searched = (0..search_budget).filter_map(|k| {
                let mut rng = SplitMix64::for_stream(seed, stream(7, k));
                let (e, n) = random_perturbation_pair(&mut rng);
                amplification_ratio(&e, &n, alpha)
            });
            GammaEstimate {
                alpha,
                ratio: seeded.chain(searched).fold(0.0, f64::max),
            }
        })
        .collect()
}

/// Gamma search as a report: one row per leak, asserted against the proven constant.
pub fn gamma_report(alpha_grid: &[Leak], search_budget: usize, seed: u64) -> ExperimentReport {
    let records = estimate_gamma(alpha_grid, search_budget, seed)
        .into_iter()
        .enumerate()
        .map(|(i, g)| {
            let bound = if g.alpha.is_extreme() { 1.0 } else { 3.0 };
            let tol = if g.alpha.is_extreme() {
                BOUND_TOL
            } else {
                LAG_TOL
            };
            TrialRecord {
                experiment: "gamma",
                variant: "max_ratio".into(),
                param: search_budget as f64,
                reset: ResetMode::ToMod,
                alpha: g.alpha,
                theta: 1.0,
                trial: i,
                measured: g.ratio,
                bound: Some(bound),
                pass: Some(g.ratio <= bound + tol),
            }
        })
        .collect();
    ExperimentReport::new("gamma", records)
}

/// Measured output perturbation of the 2-3-1 network against its error bound.
///
/// Each trial draws two input trains and a perturbation of one to three spikes on random
/// inputs at random instants; rows are per output channel.
pub fn exp_snn_bound(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let theta = cfg.theta;
    let records = par_trials(cfg.n_trials, |trial| {
        let mut rng = SplitMix64::for_stream(cfg.seed, stream(8, trial));
        let inputs: Vec<SpikeTrain> = (0..2)
            .map(|_| random_grid_train(&mut rng, cfg.n_spikes, cfg.amp_range, cfg.grid_spacing))
            .collect();
        let mut nu = vec![Vec::new(), Vec::new()];
        let span = cfg.n_spikes as f64 * cfg.grid_spacing;
        for _ in 0..1 + rng.below(3) {
            let channel = rng.below(2) as usize;
            let t = rng.uniform(0.0, span + cfg.grid_spacing);
            nu[channel].push(Spike::new(t, rng.uniform(-1.5, 1.5) * theta));
        }
        let nu: Vec<SpikeTrain> = nu.into_iter().map(SpikeTrain::from_finite).collect();
        let perturbed: Vec<SpikeTrain> = inputs.iter().zip(&nu).map(|(a, b)| a + b).collect();
        let mut rows = Vec::new();
        for &alpha in &cfg.alphas {
            let net = example_network(cfg.neuron(alpha, ResetMode::ToMod).expect("validated"));
            let clean = snn_forward(&inputs, &net).expect("two inputs");
            let noisy = snn_forward(&perturbed, &net).expect("two inputs");
            let nu_norms: Vec<f64> = nu.iter().map(|n| alexiewicz_norm(n, alpha)).collect();
            let bound =
                snn_error_bound(&nu_norms, &net, gamma_for(alpha, GammaPolicy::Safe), theta)
                    .expect("matching dimensions");
            for (j, (c, n)) in clean.iter().zip(&noisy).enumerate() {
                let measured = alexiewicz_norm(&(n - c), alpha);
                rows.push(TrialRecord {
                    experiment: "snn_bound",
                    variant: format!("output_{j}"),
                    param: nu_norms.iter().sum(),
                    reset: ResetMode::ToMod,
                    alpha,
                    theta,
                    trial,
                    measured,
                    bound: Some(bound[j]),
                    pass: Some(measured <= bound[j] + BOUND_TOL),
                });
            }
        }
        rows
    });
    Ok(ExperimentReport::new("snn_bound", records))
}

/// Lags of the default lag sweep, as fractions of the grid spacing; only the first two are
/// small enough for the asserted bound.
pub const LAG_FRACTIONS: [f64; 4] = [0.001, 0.01, 0.1, 0.5];
pub const THRESHOLD_OFFSETS: [f64; 3] = [0.01, 0.1, 0.5];
/// Leak grid of the gamma search.
pub const GAMMA_ALPHAS: [Leak; 7] = [
    Leak::Finite(0.0),
    Leak::Finite(0.25),
    Leak::Finite(0.5),
    Leak::Finite(1.0),
    Leak::Finite(2.0),
    Leak::Finite(4.0),
    Leak::Infinite,
];
/// Spacing of the example pair in the `(α, λ)` surfaces.
pub const SURFACE_EPS: f64 = 1e-3;

/// Experiment names accepted by [`run_named`].
pub const EXPERIMENTS: [&str; 6] = [
    "quantization",
    "lag_threshold",
    "quasi_isometry",
    "alpha_lambda",
    "gamma",
    "snn_bound",
];

/// Runs a named experiment with its preset configuration, overriding the seed and, where the
/// experiment has trials, their number (`gamma` uses it as its search budget).
pub fn run_named(name: &str, seed: Option<u64>, trials: Option<usize>) -> Result<ExperimentReport> {
    let tune = |mut cfg: ExperimentConfig| {
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(n) = trials {
            cfg.n_trials = n;
        }
        cfg
    };
    match name {
        "quantization" => exp_quantization(&tune(ExperimentConfig::quantization())),
        "lag_threshold" => {
            let cfg = tune(ExperimentConfig::lag_threshold());
            let lags: Vec<f64> = LAG_FRACTIONS.iter().map(|f| f * cfg.grid_spacing).collect();
            exp_lag_threshold(&cfg, &lags, &THRESHOLD_OFFSETS)
        }
        "quasi_isometry" => exp_quasi_isometry(&tune(ExperimentConfig::quasi_isometry())),
        "alpha_lambda" => alpha_lambda_report(seed.unwrap_or(7), SURFACE_EPS),
        "gamma" => {
            if trials == Some(0) {
                return Err(Error::Config("search budget must be positive".into()));
            }
            Ok(gamma_report(
                &GAMMA_ALPHAS,
                trials.unwrap_or(2000),
                seed.unwrap_or(7),
            ))
        }
        "snn_bound" => exp_snn_bound(&tune(ExperimentConfig::snn_bound())),
        other => Err(Error::Config(format!(
            "unknown experiment {other:?}; expected one of {}",
            EXPERIMENTS.join(", ")
        ))),
    }
}
