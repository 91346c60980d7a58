//! Seeded Monte Carlo over parameter distributions and ANDOR resolutions.
//!
//! Each draw samples the distributional leaves and the ANDOR gate types,
//! then computes the top probability exactly given that draw. Draw `i` of
//! `(seed, streamId)` comes from ChaCha8 seeded with `seed`, on stream
//! `streamId`, positioned at word `i << 32`, so any draw can be recomputed
//! on its own and parallel runs match sequential ones bit for bit. Within a
//! draw, leaves are sampled in identifier order, then ANDOR gates in
//! identifier order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Compiled, EngineError, Eval, GateResolution, Resolved, Scenario};
use crate::flat::FlatModel;
use crate::model::{effective_probability, DecisionAssignment, Identifier, ProbabilitySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngSeed { seed, stream_id }
    }

    /// Generator for draw `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos(u128::from(index) << 32);
        rng
    }
}

/// Point values for every leaf (before influences) and a resolution of
/// every ANDOR gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ParameterSet {
    pub probabilities: BTreeMap<Identifier, f64>,
    pub resolution: GateResolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct McResult {
    pub samples: usize,
    pub mean: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub seed: RngSeed,
    pub per_decision_context: DecisionAssignment,
    /// Draws whose conditional probability could not be computed; the
    /// statistics cover the remaining draws.
    pub failures: usize,
    pub flagged: bool,
}

/// Leaf probabilities in identifier order plus the AND/OR choice per gate.
fn draw(flat: &FlatModel, c: &Compiled, scenario: &Scenario, seed: &RngSeed, index: u64) -> (Vec<f64>, Vec<bool>) {
    let mut rng = seed.rng(index);
    let probs = c
        .leaves
        .iter()
        .map(|id| match scenario.overrides.get(id) {
            Some(&p) => p,
            None => match flat.events()[id].prob {
                ProbabilitySpec::Point { p } => p,
                ProbabilitySpec::Beta { alpha, beta } => {
                    Beta::new(alpha, beta).expect("validated parameters").sample(&mut rng)
                }
                ProbabilitySpec::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            },
        })
        .collect();
    let res = c.weights(scenario).into_iter().map(|w| rng.random::<f64>() < w).collect();
    (probs, res)
}

/// Parameters of draw `index`, deterministic in `(seed, index)`.
pub fn sample_parameters(flat: &FlatModel, seed: &RngSeed, index: u64) -> ParameterSet {
    sample_parameters_in(flat, &Scenario::default(), seed, index)
}

/// As [`sample_parameters`], with scenario overrides and weights applied.
pub fn sample_parameters_in(flat: &FlatModel, scenario: &Scenario, seed: &RngSeed, index: u64) -> ParameterSet {
    let c = Compiled::new(flat);
    let (probs, res) = draw(flat, &c, scenario, seed, index);
    ParameterSet {
        probabilities: c.leaves.iter().cloned().zip(probs).collect(),
        resolution: GateResolution(
            c.uncertain
                .iter()
                .zip(res)
                .map(|((id, _), and)| (id.clone(), if and { Resolved::And } else { Resolved::Or }))
                .collect(),
        ),
    }
}

pub fn mc_estimate(flat: &FlatModel, decisions: &DecisionAssignment, n: usize, seed: RngSeed) -> Result<McResult, EngineError> {
    mc_estimate_in(flat, &Scenario::with_decisions(decisions.clone()), n, seed)
}

pub fn mc_estimate_in(flat: &FlatModel, scenario: &Scenario, n: usize, seed: RngSeed) -> Result<McResult, EngineError> {
    if n < 2 {
        return Err(EngineError::InvalidSampleCount { n });
    }
    scenario.check(flat)?;
    let c = Compiled::new(flat);
    let values: Vec<Option<f64>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let (base, res) = draw(flat, &c, scenario, &seed, i);
            let probs: Vec<f64> = c
                .leaves
                .iter()
                .zip(base)
                .map(|(id, p0)| effective_probability(id, p0, &scenario.decisions, flat.influences_on(id)))
                .collect();
            let p = Eval::new(&c, &probs, &res).marginal(c.top);
            p.is_finite().then_some(p)
        })
        .collect();
    let ok: Vec<f64> = values.iter().flatten().copied().collect();
    let failures = n - ok.len();
    let (mean, std_error) = mean_and_error(&ok);
    Ok(McResult {
        samples: n,
        mean,
        std_error,
        ci95: (mean - 1.96 * std_error, mean + 1.96 * std_error),
        seed,
        per_decision_context: scenario.decisions.clone(),
        failures,
        flagged: failures > 0,
    })
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`).
/// Sums are shifted by the first value and pairwise, so constant input
/// gives that constant back exactly.
pub(crate) fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    match xs.len() {
        0 => (0.0, 0.0),
        1 => (xs[0], 0.0),
        n => {
            let x0 = xs[0];
            let shifted: Vec<f64> = xs.iter().map(|x| x - x0).collect();
            let mean = x0 + pairwise_sum(&shifted) / n as f64;
            let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            let var = pairwise_sum(&sq) / (n - 1) as f64;
            (mean, (var / n as f64).sqrt())
        }
    }
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GateKind, ModelDoc};

    fn andor() -> FlatModel {
        let mut doc = ModelDoc::new("m");
        doc.add_event("a", 0.5).add_event("b", 0.5).add_gate("t", GateKind::AndOr { w: 0.5 }, &["a", "b"]).set_top("t");
        crate::expand(&doc).unwrap()
    }

    fn parsed(src: &str) -> FlatModel {
        crate::expand(&crate::parse(src).unwrap()).unwrap()
    }

    #[test]
    fn point_model_is_constant() {
        let f = parsed("model \"m\"\nevent a { p = 0.2 }\nevent b { p = 0.3 }\ngate t = OR(a, b)\ntop = t\n");
        let s = RngSeed::new(1, 0);
        assert_eq!(sample_parameters(&f, &s, 0), sample_parameters(&f, &s, 77));
        let exact = crate::exact_probability(&f, &DecisionAssignment::none()).unwrap().top_probability;
        let r = mc_estimate(&f, &DecisionAssignment::none(), 50, s).unwrap();
        assert_eq!(r.mean, exact);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.ci95, (exact, exact));
    }

    #[test]
    fn uniform_mean() {
        let f = parsed("model \"m\"\nevent a { p ~ uniform(0, 1) }\ntop = a\n");
        let s = RngSeed::new(7, 0);
        let id = Identifier::new("a").unwrap();
        let n = 100_000u64;
        let xs: Vec<f64> = (0..n).map(|i| sample_parameters(&f, &s, i).probabilities[&id]).collect();
        let (mean, _) = mean_and_error(&xs);
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn same_draw_twice() {
        let f = parsed("model \"m\"\nevent a { p ~ beta(2, 5) }\nevent b { p = 0.1 }\ngate t = ANDOR(w = 0.3; a, b)\ntop = t\n");
        let s = RngSeed::new(42, 3);
        for i in [0, 1, 1000, u32::MAX as u64 + 5] {
            assert_eq!(sample_parameters(&f, &s, i), sample_parameters(&f, &s, i));
        }
        assert_ne!(sample_parameters(&f, &s, 0), sample_parameters(&f, &s, 1));
    }

    #[test]
    fn andor_converges() {
        let f = andor();
        for n in [1_000, 10_000, 100_000] {
            let r = mc_estimate(&f, &DecisionAssignment::none(), n, RngSeed::new(11, 0)).unwrap();
            assert!((r.mean - 0.5).abs() <= 3.0 * r.std_error, "n={n} {r:?}");
            assert!(r.ci95.0 <= r.mean && r.mean <= r.ci95.1);
            assert!(!r.flagged);
        }
    }

    #[test]
    fn deterministic_result() {
        let f = parsed("model \"m\"\nevent a { p ~ beta(2, 5) }\nevent b { p ~ uniform(0.1, 0.4) }\ngate t = OR(a, b)\ntop = t\n");
        let a = mc_estimate(&f, &DecisionAssignment::none(), 1000, RngSeed::new(42, 0)).unwrap();
        let b = mc_estimate(&f, &DecisionAssignment::none(), 1000, RngSeed::new(42, 0)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = mc_estimate(&f, &DecisionAssignment::none(), 1000, RngSeed::new(42, 1)).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn streams_are_uncorrelated() {
        let (s0, s1) = (RngSeed::new(5, 0), RngSeed::new(5, 1));
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|i| s0.rng(i).random::<f64>()).collect();
        let ys: Vec<f64> = (0..n).map(|i| s1.rng(i).random::<f64>()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / n as f64, ys.iter().sum::<f64>() / n as f64);
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let r = cov / (vx * vy).sqrt();
        assert!(r.abs() < 0.05, "{r}");
    }

    #[test]
    fn needs_two_samples() {
        let err = mc_estimate(&andor(), &DecisionAssignment::none(), 1, RngSeed::default()).unwrap_err();
        assert_eq!(err.code(), "INVALID_SAMPLE_COUNT");
    }

    #[test]
    fn overrides_replace_distributions() {
        let f = parsed("model \"m\"\nevent a { p ~ uniform(0, 1) }\ntop = a\n");
        let s = Scenario { overrides: [(Identifier::new("a").unwrap(), 0.25)].into(), ..Default::default() };
        let r = mc_estimate_in(&f, &s, 10, RngSeed::default()).unwrap();
        assert_eq!((r.mean, r.std_error), (0.25, 0.0));
    }
}
