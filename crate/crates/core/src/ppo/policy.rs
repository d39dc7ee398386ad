use rand::Rng;

use super::PpoHyperparams;
use crate::nn::{Activation, Mlp};
use crate::{Error, Result};

/// Initial scale of the policy output layer, so training starts close to
/// uniform action probabilities.
const POLICY_OUTPUT_SCALE: f64 = 0.01;

fn trunk_sizes(input: usize, output: usize, hp: &PpoHyperparams) -> Vec<usize> {
    let mut sizes = vec![input];
    sizes.extend(std::iter::repeat_n(hp.hidden_units, hp.num_layers));
    sizes.push(output);
    sizes
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

/// Shannon entropy in nats of a categorical given by its log-probabilities.
pub fn entropy(log_probs: &[f64]) -> f64 {
    -log_probs
        .iter()
        .map(|&lp| if lp == f64::NEG_INFINITY { 0.0 } else { lp.exp() * lp })
        .sum::<f64>()
}

/// Multi-branch categorical policy: one shared swish trunk whose output is
/// split into independent branches of logits.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNet {
    net: Mlp,
    branches: Vec<usize>,
}

impl PolicyNet {
    pub fn new(obs_dim: usize, branches: &[usize], hp: &PpoHyperparams, rng: &mut impl Rng) -> Self {
        let mut net = Mlp::new(&trunk_sizes(obs_dim, branches.iter().sum(), hp), Activation::Swish, rng);
        net.scale_output_layer(POLICY_OUTPUT_SCALE);
        Self {
            net,
            branches: branches.to_vec(),
        }
    }

    pub fn from_parts(net: Mlp, branches: Vec<usize>) -> Result<Self> {
        if branches.is_empty() || branches.contains(&0) || branches.iter().sum::<usize>() != net.output_dim() {
            return Err(Error::Contract(format!(
                "branches {branches:?} do not match a {}-wide policy output",
                net.output_dim()
            )));
        }
        Ok(Self { net, branches })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Mlp {
        &mut self.net
    }

    pub fn branches(&self) -> &[usize] {
        &self.branches
    }

    pub fn obs_dim(&self) -> usize {
        self.net.input_dim()
    }

    fn check(&self, obs: &[f64]) -> Result<()> {
        if obs.len() != self.obs_dim() {
            return Err(Error::Contract(format!(
                "observation has {} values, policy expects {}",
                obs.len(),
                self.obs_dim()
            )));
        }
        Ok(())
    }

    /// Splits a flat logit vector into per-branch slices.
    pub fn split<'a>(&self, flat: &'a [f64]) -> Vec<&'a [f64]> {
        let mut out = Vec::with_capacity(self.branches.len());
        let mut start = 0;
        for &b in &self.branches {
            out.push(&flat[start..start + b]);
            start += b;
        }
        out
    }

    pub fn probabilities(&self, obs: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check(obs)?;
        let logits = self.net.forward(obs);
        Ok(self.split(&logits).into_iter().map(softmax).collect())
    }

    /// Samples every branch; returns the joint action and per-branch
    /// log-probabilities.
    pub fn act(&self, obs: &[f64], rng: &mut impl Rng) -> Result<(Vec<usize>, Vec<f64>)> {
        self.check(obs)?;
        let logits = self.net.forward(obs);
        let mut actions = Vec::with_capacity(self.branches.len());
        let mut log_probs = Vec::with_capacity(self.branches.len());
        for branch in self.split(&logits) {
            let lp = log_softmax(branch);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut choice = branch.len() - 1;
            for (i, l) in lp.iter().enumerate() {
                acc += l.exp();
                if u < acc {
                    choice = i;
                    break;
                }
            }
            actions.push(choice);
            log_probs.push(lp[choice]);
        }
        Ok((actions, log_probs))
    }

    /// Most probable action per branch (lowest index on ties).
    pub fn greedy(&self, obs: &[f64]) -> Result<Vec<usize>> {
        self.check(obs)?;
        let logits = self.net.forward(obs);
        Ok(self
            .split(&logits)
            .into_iter()
            .map(|b| {
                b.iter()
                    .enumerate()
                    .fold(
                        (0, f64::NEG_INFINITY),
                        |best, (i, &z)| if z > best.1 { (i, z) } else { best },
                    )
                    .0
            })
            .collect())
    }

    /// Joint log-probability of `actions`: the sum over branches.
    pub fn log_prob(&self, obs: &[f64], actions: &[usize]) -> Result<f64> {
        self.check(obs)?;
        if actions.len() != self.branches.len() {
            return Err(Error::Contract("action has the wrong number of branches".into()));
        }
        let logits = self.net.forward(obs);
        Ok(self
            .split(&logits)
            .into_iter()
            .zip(actions)
            .map(|(b, &a)| log_softmax(b)[a])
            .sum())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueNet {
    net: Mlp,
}

impl ValueNet {
    pub fn new(obs_dim: usize, hp: &PpoHyperparams, rng: &mut impl Rng) -> Self {
        Self {
            net: Mlp::new(&trunk_sizes(obs_dim, 1, hp), Activation::Swish, rng),
        }
    }

    pub fn from_net(net: Mlp) -> Result<Self> {
        if net.output_dim() != 1 {
            return Err(Error::Contract("value network must have a scalar output".into()));
        }
        Ok(Self { net })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Mlp {
        &mut self.net
    }

    pub fn value(&self, obs: &[f64]) -> f64 {
        self.net.forward(obs)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn flat_policy(branches: &[usize], bias: Option<(usize, f64)>) -> PolicyNet {
        let out: usize = branches.iter().sum();
        let mut params = vec![0.0; 2 * out + out];
        if let Some((i, b)) = bias {
            params[2 * out + i] = b;
        }
        PolicyNet::from_parts(
            Mlp::from_parts(vec![2, out], Activation::Swish, params).unwrap(),
            branches.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn equal_logits_sample_uniformly() {
        let p = flat_policy(&[3], None);
        let mut r = rng::stream(1, 0);
        let mut counts = [0usize; 3];
        for _ in 0..10_000 {
            counts[p.act(&[0.0, 0.0], &mut r).unwrap().0[0]] += 1;
        }
        for c in counts {
            assert!((c as f64 / 10_000.0 - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn dominant_logit_is_always_chosen() {
        let p = flat_policy(&[3], Some((2, 1e6)));
        let mut r = rng::stream(1, 0);
        assert!((0..1000).all(|_| p.act(&[0.3, 0.1], &mut r).unwrap().0 == vec![2]));
        assert_eq!(p.greedy(&[0.0, 0.0]).unwrap(), vec![2]);
    }

    #[test]
    fn seeded_sampling_repeats() {
        let hp = PpoHyperparams::default();
        let p = PolicyNet::new(6, &[3, 2], &hp, &mut rng::stream(2, 0));
        let run = || {
            let mut r = rng::stream(5, 1);
            (0..50).map(|_| p.act(&[0.1; 6], &mut r).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn joint_log_prob_is_branch_sum() {
        let hp = PpoHyperparams::default();
        let p = PolicyNet::new(4, &[3, 2], &hp, &mut rng::stream(3, 0));
        let (a, lps) = p.act(&[0.2, -0.4, 0.9, 0.0], &mut rng::stream(4, 0)).unwrap();
        let joint = p.log_prob(&[0.2, -0.4, 0.9, 0.0], &a).unwrap();
        assert!((joint - lps.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_contract_error() {
        let p = flat_policy(&[3], None);
        assert!(matches!(
            p.act(&[0.0; 3], &mut rng::stream(0, 0)),
            Err(Error::Contract(_))
        ));
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(logits in prop::collection::vec(-50.0..50.0f64, 1..8)) {
            let p = softmax(&logits);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            prop_assert!(entropy(&log_softmax(&logits)) >= -1e-12);
            for (a, b) in p.iter().zip(log_softmax(&logits)) {
                prop_assert!((a.ln() - b).abs() < 1e-9 || *a < 1e-300);
            }
        }

        #[test]
        fn branch_probabilities_sum_to_one(obs in prop::collection::vec(-1.0..1.0f64, 12), seed in 0u64..100) {
            let hp = PpoHyperparams::default();
            let p = PolicyNet::new(12, &[3, 2], &hp, &mut rng::stream(seed, 0));
            for branch in p.probabilities(&obs).unwrap() {
                prop_assert!((branch.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            }
        }
    }
}
