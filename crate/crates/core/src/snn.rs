//! Feedforward spiking networks of identical LIF neurons and their additive error bound.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lif::{lif, LifConfig, ResetMode};
use crate::norms::Leak;
use crate::spike::SpikeTrain;

/// Layered network: `layers[k]` has shape `N_{k+1} × N_k` and maps the outputs of layer `k`
/// (layer 0 being the inputs) to the drive of layer `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnnNetwork {
    layers: Vec<DMatrix<f64>>,
    neuron: LifConfig,
}

impl SnnNetwork {
    pub fn new(layers: Vec<DMatrix<f64>>, neuron: LifConfig) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[1].ncols() != pair[0].nrows() {
                return Err(Error::Config(format!(
                    "layer {} expects {} inputs but layer {} has {} neurons",
                    k + 2,
                    pair[1].ncols(),
                    k + 1,
                    pair[0].nrows()
                )));
            }
        }
        if let Some(w) = layers
            .iter()
            .flat_map(|m| m.iter())
            .find(|w| !w.is_finite())
        {
            return Err(Error::NonFinite {
                what: "weight",
                value: *w,
            });
        }
        Ok(Self { layers, neuron })
    }

    /// Builds a network from row-major nested weight lists.
    pub fn from_rows(rows: Vec<Vec<Vec<f64>>>, neuron: LifConfig) -> Result<Self> {
        let layers = rows
            .into_iter()
            .enumerate()
            .map(|(k, m)| {
                matrix_from_rows(&m).map_err(|e| match e {
                    Error::Config(msg) => Error::Config(format!("layer {}: {msg}", k + 1)),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers, neuron)
    }

    pub fn layers(&self) -> &[DMatrix<f64>] {
        &self.layers
    }

    pub fn neuron(&self) -> &LifConfig {
        &self.neuron
    }

    pub fn with_neuron(&self, neuron: LifConfig) -> Self {
        Self {
            layers: self.layers.clone(),
            neuron,
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.layers.last().unwrap().nrows()
    }

    fn rows(&self) -> Vec<Vec<Vec<f64>>> {
        self.layers
            .iter()
            .map(|m| {
                (0..m.nrows())
                    .map(|i| m.row(i).iter().copied().collect())
                    .collect()
            })
            .collect()
    }
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(Error::Config("empty weight matrix".into()));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config("ragged weight matrix".into()));
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.iter().flatten().copied(),
    ))
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    theta: f64,
    alpha: Leak,
    reset: ResetMode,
    layers: Vec<Vec<Vec<f64>>>,
}

impl Serialize for SnnNetwork {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawNetwork {
            theta: self.neuron.theta,
            alpha: self.neuron.alpha,
            reset: self.neuron.reset,
            layers: self.rows(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SnnNetwork {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawNetwork::deserialize(deserializer)?;
        LifConfig::new(raw.theta, raw.alpha, raw.reset)
            .and_then(|neuron| SnnNetwork::from_rows(raw.layers, neuron))
            .map_err(serde::de::Error::custom)
    }
}

/// Weighted superposition `Σ_i w_i·η_i`.
fn weighted_sum<'a, I>(terms: I) -> SpikeTrain
where
    I: IntoIterator<Item = (f64, &'a SpikeTrain)>,
{
    terms
        .into_iter()
        .filter(|(w, t)| *w != 0.0 && !t.is_empty())
        .fold(SpikeTrain::empty(), |acc, (w, t)| acc.add(&t.scale(w)))
}

/// Propagates input trains through every layer and returns the last layer's outputs.
pub fn snn_forward(inputs: &[SpikeTrain], net: &SnnNetwork) -> Result<Vec<SpikeTrain>> {
    if inputs.len() != net.n_inputs() {
        return Err(Error::Config(format!(
            "network expects {} input trains, got {}",
            net.n_inputs(),
            inputs.len()
        )));
    }
    let mut current = inputs.to_vec();
    for w in &net.layers {
        current = (0..w.nrows())
            .map(|j| {
                let drive = weighted_sum(w.row(j).iter().copied().zip(&current));
                lif(&drive, &net.neuron)
            })
            .collect();
    }
    Ok(current)
}

/// How `γ(α)` is chosen for `0 < α < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaPolicy {
    /// Proven upper bound 3.
    #[default]
    Safe,
    /// Conjectured value 2.
    Conjectured,
}

impl FromStr for GammaPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "safe" => Ok(GammaPolicy::Safe),
            "conjectured" => Ok(GammaPolicy::Conjectured),
            other => Err(Error::Config(format!(
                "unknown gamma policy '{other}' (expected safe or conjectured)"
            ))),
        }
    }
}

/// Amplification constant of the single-neuron Lipschitz-style bound.
pub fn gamma_for(alpha: Leak, policy: GammaPolicy) -> f64 {
    if alpha.is_extreme() {
        1.0
    } else {
        match policy {
            GammaPolicy::Safe => 3.0,
            GammaPolicy::Conjectured => 2.0,
        }
    }
}

/// Per-output bound on `‖SNN(η + ν) − SNN(η)‖_{A,α}` from the input perturbation norms.
///
/// Norms are measured in units of `theta`; with `Γ(x) = ⌈γ x⌉` coordinatewise the bound is
/// `Γ(W̃_L Γ(⋯ Γ(W̃_1 Γ(ν/ϑ))))·ϑ`, where `W̃` holds absolute weights.
pub fn snn_error_bound(
    nu_norms: &[f64],
    net: &SnnNetwork,
    gamma: f64,
    theta: f64,
) -> Result<Vec<f64>> {
    if nu_norms.len() != net.n_inputs() {
        return Err(Error::Config(format!(
            "network expects {} input norms, got {}",
            net.n_inputs(),
            nu_norms.len()
        )));
    }
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::Config(format!("gamma must be >= 1, got {gamma}")));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Config(format!("threshold must be > 0, got {theta}")));
    }
    if let Some(n) = nu_norms.iter().find(|n| !(n.is_finite() && **n >= 0.0)) {
        return Err(Error::Validation(format!("invalid perturbation norm {n}")));
    }
    let lift = |x: DVector<f64>| x.map(|v| (gamma * v).ceil());
    let mut x = lift(DVector::from_iterator(
        nu_norms.len(),
        nu_norms.iter().map(|n| n / theta),
    ));
    for w in &net.layers {
        x = lift(w.abs() * x);
    }
    Ok(x.iter().map(|v| v * theta).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train(events: &[(f64, f64)]) -> SpikeTrain {
        SpikeTrain::new(events.iter().copied()).unwrap()
    }

    fn neuron(alpha: Leak) -> LifConfig {
        LifConfig::quantizer(1.0, alpha).unwrap()
    }

    fn two_three_one(alpha: Leak) -> SnnNetwork {
        SnnNetwork::from_rows(
            vec![
                vec![vec![1.0, 1.0], vec![1.0, 2.0]],
                vec![vec![0.5, 0.0], vec![0.5, 0.5], vec![0.0, -0.5]],
                vec![vec![1.0, 1.0, 1.0]],
            ],
            neuron(alpha),
        )
        .unwrap()
    }

    #[test]
    fn identity_neuron_passes_sub_threshold_as_empty() {
        let net = SnnNetwork::from_rows(vec![vec![vec![1.0]]], neuron(Leak::ZERO)).unwrap();
        let out = snn_forward(&[train(&[(0.0, 0.4), (1.0, 0.3)])], &net).unwrap();
        assert_eq!(out, vec![SpikeTrain::empty()]);
        let out = snn_forward(&[train(&[(0.0, 1.4)])], &net).unwrap();
        assert_eq!(out, vec![train(&[(0.0, 1.0)])]);
    }

    #[test]
    fn zero_weights_silence_everything() {
        let net = SnnNetwork::from_rows(
            vec![vec![vec![0.0, 0.0]; 3], vec![vec![0.0; 3]]],
            neuron(Leak::Finite(1.0)),
        )
        .unwrap();
        let inputs = vec![train(&[(0.0, 5.0)]), train(&[(1.0, -7.0)])];
        assert_eq!(
            snn_forward(&inputs, &net).unwrap(),
            vec![SpikeTrain::empty()]
        );
    }

    #[test]
    fn layer_by_layer_matches_manual_composition() {
        let net = two_three_one(Leak::ZERO);
        let e1 = train(&[(1.0, 1.2), (2.0, 0.9), (3.0, -0.4)]);
        let e2 = train(&[(1.5, 0.8), (2.0, 0.6)]);
        let cfg = neuron(Leak::ZERO);
        let h1 = lif(&(&e1 + &e2), &cfg);
        let h2 = lif(&(&e1 + &e2.scale(2.0)), &cfg);
        let g1 = lif(&h1.scale(0.5), &cfg);
        let g2 = lif(&(&h1.scale(0.5) + &h2.scale(0.5)), &cfg);
        let g3 = lif(&h2.scale(-0.5), &cfg);
        let expected = lif(&(&(&g1 + &g2) + &g3), &cfg);
        assert_eq!(snn_forward(&[e1, e2], &net).unwrap(), vec![expected]);
    }

    #[test]
    fn dimension_checks() {
        assert!(SnnNetwork::from_rows(vec![], neuron(Leak::ZERO)).is_err());
        assert!(SnnNetwork::from_rows(
            vec![vec![vec![1.0, 1.0]], vec![vec![1.0, 1.0]]],
            neuron(Leak::ZERO)
        )
        .is_err());
        assert!(
            SnnNetwork::from_rows(vec![vec![vec![1.0], vec![1.0, 2.0]]], neuron(Leak::ZERO))
                .is_err()
        );
        let net = two_three_one(Leak::ZERO);
        assert!(snn_forward(&[SpikeTrain::empty()], &net).is_err());
        assert!(snn_error_bound(&[1.0], &net, 1.0, 1.0).is_err());
        assert!(snn_error_bound(&[1.0, 0.0], &net, 0.5, 1.0).is_err());
    }

    #[test]
    fn single_neuron_bound() {
        let net = SnnNetwork::from_rows(vec![vec![vec![1.0]]], neuron(Leak::ZERO)).unwrap();
        assert_eq!(snn_error_bound(&[1.2], &net, 1.0, 1.0).unwrap(), vec![2.0]);
        assert_eq!(snn_error_bound(&[0.0], &net, 3.0, 1.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn bound_for_two_three_one_by_hand() {
        // Γ(ν) = (1, 0); W1: (1, 1); W2: (0.5, 1, 0.5) -> (1, 1, 1); W3: 3
        let net = two_three_one(Leak::ZERO);
        assert_eq!(
            snn_error_bound(&[1.0, 0.0], &net, 1.0, 1.0).unwrap(),
            vec![3.0]
        );
        // γ = 3: Γ(ν) = (3, 0); W1: (3, 3) -> (9, 9); W2: (4.5, 9, 4.5) -> (14, 27, 14);
        // W3: 55 -> 165
        assert_eq!(
            snn_error_bound(&[1.0, 0.0], &net, 3.0, 1.0).unwrap(),
            vec![165.0]
        );
        // threshold scaling: ν measured in units of ϑ
        assert_eq!(
            snn_error_bound(&[0.5, 0.0], &net, 1.0, 0.5).unwrap(),
            vec![1.5]
        );
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_for(Leak::ZERO, GammaPolicy::Safe), 1.0);
        assert_eq!(gamma_for(Leak::Infinite, GammaPolicy::Conjectured), 1.0);
        assert_eq!(gamma_for(Leak::Finite(1.0), GammaPolicy::Safe), 3.0);
        assert_eq!(gamma_for(Leak::Finite(1.0), GammaPolicy::Conjectured), 2.0);
        assert_eq!("safe".parse::<GammaPolicy>().unwrap(), GammaPolicy::Safe);
    }

    #[test]
    fn network_json_round_trip() {
        let json = r#"{"theta": 1.0, "alpha": "inf", "reset": "mod",
                       "layers": [[[1.0, 1.0], [1.0, 2.0]], [[0.5, 0.0], [0.5, 0.5], [0.0, -0.5]], [[1.0, 1.0, 1.0]]]}"#;
        let net: SnnNetwork = serde_json::from_str(json).unwrap();
        assert_eq!(net, two_three_one(Leak::Infinite));
        assert_eq!(net.layers()[1][(2, 1)], -0.5);
        let back: SnnNetwork = serde_json::from_str(&serde_json::to_string(&net).unwrap()).unwrap();
        assert_eq!(back, net);
        let bad =
            r#"{"theta": 1.0, "alpha": 0, "reset": "mod", "layers": [[[1.0]], [[1.0, 1.0]]]}"#;
        assert!(serde_json::from_str::<SnnNetwork>(bad).is_err());
    }
}
