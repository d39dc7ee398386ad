use super::policy::{entropy, log_softmax, PolicyNet, ValueNet};
use super::Transition;

/// `min(r·A, g(ε, A))` with `g = (1+ε)·A` for `A ≥ 0` and `(1−ε)·A` otherwise.
pub fn clipped_surrogate(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    let g = if advantage >= 0.0 {
        (1.0 + epsilon) * advantage
    } else {
        (1.0 - epsilon) * advantage
    };
    (ratio * advantage).min(g)
}

/// Coefficients of the three loss terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub epsilon: f64,
    pub surrogate: f64,
    pub value: f64,
    pub entropy: f64,
}

/// Unweighted loss terms averaged over a mini-batch.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossStats {
    /// `-mean(clipped surrogate)`.
    pub policy_loss: f64,
    /// `mean((V - R̂)²)`.
    pub value_loss: f64,
    pub entropy: f64,
}

impl LossStats {
    pub fn total(&self, w: &LossWeights) -> f64 {
        w.surrogate * self.policy_loss + w.value * self.value_loss - w.entropy * self.entropy
    }
}

pub fn minibatch_loss(policy: &PolicyNet, value: &ValueNet, batch: &[&Transition], w: &LossWeights) -> LossStats {
    let mut unused_p = Vec::new();
    let mut unused_v = Vec::new();
    accumulate(policy, value, batch, w, None, &mut unused_p, &mut unused_v)
}

/// Loss terms plus the gradients of the weighted total with respect to the
/// policy and value parameters.
pub fn minibatch_gradients(
    policy: &PolicyNet,
    value: &ValueNet,
    batch: &[&Transition],
    w: &LossWeights,
) -> (LossStats, Vec<f64>, Vec<f64>) {
    let mut gp = vec![0.0; policy.net().param_count()];
    let mut gv = vec![0.0; value.net().param_count()];
    let stats = accumulate(policy, value, batch, w, Some(()), &mut gp, &mut gv);
    (stats, gp, gv)
}

fn accumulate(
    policy: &PolicyNet,
    value: &ValueNet,
    batch: &[&Transition],
    w: &LossWeights,
    want_grads: Option<()>,
    gp: &mut [f64],
    gv: &mut [f64],
) -> LossStats {
    let m = batch.len().max(1) as f64;
    let mut stats = LossStats::default();
    for t in batch {
        let trace = policy.net().forward_trace(&t.obs);
        let logits = trace.output();
        let branches = policy.split(logits);
        let log_probs: Vec<Vec<f64>> = branches.iter().map(|b| log_softmax(b)).collect();
        let log_prob: f64 = log_probs.iter().zip(&t.actions).map(|(lp, &a)| lp[a]).sum();
        let ratio = (log_prob - t.log_prob).exp();
        let surrogate = clipped_surrogate(ratio, t.advantage, w.epsilon);
        let h: Vec<f64> = log_probs.iter().map(|lp| entropy(lp)).collect();
        stats.policy_loss -= surrogate / m;
        stats.entropy += h.iter().sum::<f64>() / m;

        let v_trace = value.net().forward_trace(&t.obs);
        let v = v_trace.output()[0];
        stats.value_loss += (v - t.ret).powi(2) / m;

        if want_grads.is_none() {
            continue;
        }
        // the unclipped branch is active when it attains the min
        let unclipped = ratio * t.advantage <= surrogate;
        let d_logp = if unclipped {
            -w.surrogate * ratio * t.advantage / m
        } else {
            0.0
        };
        let mut d_logits = Vec::with_capacity(logits.len());
        for ((lp, &a), hb) in log_probs.iter().zip(&t.actions).zip(&h) {
            for (k, &l) in lp.iter().enumerate() {
                let p = l.exp();
                let onehot = if k == a { 1.0 } else { 0.0 };
                // dH/dz_k = -p_k (log p_k + H)
                let d_entropy = -p * (l + hb);
                d_logits.push(d_logp * (onehot - p) - w.entropy / m * d_entropy);
            }
        }
        policy.net().backward(&trace, &d_logits, gp);
        value.net().backward(&v_trace, &[w.value * 2.0 * (v - t.ret) / m], gv);
    }
    stats
}
