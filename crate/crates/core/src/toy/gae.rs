/// Generalized advantage estimates and value targets.
///
/// `next_values[t]` is the value of the state reached after step `t` (zero
/// for a true terminal state). `episode_end[t]` stops the backward recursion
/// after step `t`; the last step of the buffer always ends the recursion.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    next_values: &[f64],
    episode_end: &[bool],
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(values.len() == n && next_values.len() == n && episode_end.len() == n);
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        if episode_end[t] || t + 1 == n {
            running = 0.0;
        }
        let delta = rewards[t] + gamma * next_values[t] - values[t];
        running = delta + gamma * lambda * running;
        adv[t] = running;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_is_td_error() {
        let (a, r) = gae(&[1.0], &[0.5], &[2.0], &[true], 0.9, 0.95);
        assert!((a[0] - (1.0 + 0.9 * 2.0 - 0.5)).abs() < 1e-15);
        assert!((r[0] - (1.0 + 0.9 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn recursion_resets_at_episode_boundary() {
        let (a, _) = gae(&[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0], &[true, true], 1.0, 1.0);
        assert_eq!(a, vec![1.0, 1.0]);
        let (a, _) = gae(&[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0], &[false, true], 1.0, 1.0);
        assert_eq!(a, vec![2.0, 1.0]);
    }
}
