use crate::{Error, Result};

/// Generalized advantage estimation over one contiguous segment.
///
/// `bootstrap_value` is `V(s_T)` for a truncated segment and 0 for one that
/// ends in a terminal state. Returns `(advantages, returns)` with
/// `returns[t] = advantages[t] + values[t]`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    bootstrap_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if rewards.len() != values.len() {
        return Err(Error::Contract(format!(
            "{} rewards but {} values",
            rewards.len(),
            values.len()
        )));
    }
    let n = rewards.len();
    let mut advantages = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let next_value = if t + 1 < n { values[t + 1] } else { bootstrap_value };
        let delta = rewards[t] + gamma * next_value - values[t];
        running = delta + gamma * lambda * running;
        advantages[t] = running;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((advantages, returns))
}

/// Plain discounted reward-to-go with a bootstrap tail.
pub fn discounted_returns(rewards: &[f64], bootstrap_value: f64, gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut running = bootstrap_value;
    for t in (0..rewards.len()).rev() {
        running = rewards[t] + gamma * running;
        out[t] = running;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(r: &[f64], v: &[f64], boot: f64, g: f64, l: f64) -> Vec<f64> {
        let n = r.len();
        let value = |t: usize| if t < n { v[t] } else { boot };
        (0..n)
            .map(|t| {
                (t..n)
                    .map(|k| (g * l).powi((k - t) as i32) * (r[k] + g * value(k + 1) - v[k]))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn gamma_zero_is_one_step_advantage() {
        let (a, _) = compute_gae(&[1.0, 2.0, 3.0], &[0.5, 0.5, 4.0], 9.0, 0.0, 0.95).unwrap();
        assert_eq!(a, vec![0.5, 1.5, -1.0]);
    }

    #[test]
    fn lambda_one_zero_values_is_monte_carlo() {
        let r = [1.0, -1.0, 0.5, 2.0];
        let (a, ret) = compute_gae(&r, &[0.0; 4], 0.0, 0.9, 1.0).unwrap();
        let mc = discounted_returns(&r, 0.0, 0.9);
        for ((x, y), z) in a.iter().zip(&mc).zip(&ret) {
            assert!((x - y).abs() < 1e-12 && (z - y).abs() < 1e-12);
        }
    }

    #[test]
    fn length_three_matches_double_sum() {
        let (r, v) = ([0.3, -0.2, 0.9], [0.1, 0.4, -0.3]);
        let (a, _) = compute_gae(&r, &v, 0.7, 0.9, 0.95).unwrap();
        let b = brute_force(&r, &v, 0.7, 0.9, 0.95);
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn length_mismatch_is_contract_error() {
        assert!(compute_gae(&[1.0], &[], 0.0, 0.9, 0.9).is_err());
    }

    proptest! {
        #[test]
        fn agrees_with_definition(
            data in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 0..=10),
            boot in -2.0..2.0f64,
            gamma in 0.0..=1.0f64,
            lambda in 0.0..=1.0f64,
        ) {
            let (r, v): (Vec<f64>, Vec<f64>) = data.into_iter().unzip();
            let (a, ret) = compute_gae(&r, &v, boot, gamma, lambda).unwrap();
            for (t, (x, y)) in a.iter().zip(brute_force(&r, &v, boot, gamma, lambda)).enumerate() {
                prop_assert!((x - y).abs() < 1e-10);
                prop_assert!((ret[t] - x - v[t]).abs() < 1e-12);
            }
        }
    }
}
