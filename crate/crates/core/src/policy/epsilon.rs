use rand::Rng;

use crate::error::{ConfigError, PolicyError};

use super::{
    break_tie, update_in, ArmState, DeviceRng, Feedback, PolicyDecision, RewardSignal, SelectionPolicy,
};

/// Explores uniformly with probability `epsilon`, otherwise exploits the best
/// empirical mean. Unpulled arms count as mean 0.
pub fn select_epsilon_greedy(arms: &[ArmState], epsilon: f64, rng: &mut DeviceRng) -> PolicyDecision {
    if rng.gen_bool(epsilon) {
        return PolicyDecision::learned(rng.gen_range(0..arms.len()));
    }
    let means: Vec<f64> = arms.iter().map(|a| a.mean().unwrap_or(0.0)).collect();
    let best = super::ucb::argmax_set(&means);
    PolicyDecision {
        arm_index: break_tie(&best, rng),
        phase: super::Phase::Learned,
        tie_candidates: best.len(),
    }
}

#[derive(Debug, Clone)]
pub struct EpsilonGreedy {
    arms: Vec<ArmState>,
    epsilon: f64,
    signal: RewardSignal,
}

impl EpsilonGreedy {
    pub fn new(n_arms: usize, epsilon: f64, signal: RewardSignal) -> Result<Self, ConfigError> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(ConfigError::Invalid(format!("epsilon must lie in [0, 1], got {epsilon}")));
        }
        Ok(Self { arms: vec![ArmState::default(); n_arms], epsilon, signal })
    }
}

impl SelectionPolicy for EpsilonGreedy {
    fn select(&mut self, rng: &mut DeviceRng) -> PolicyDecision {
        select_epsilon_greedy(&self.arms, self.epsilon, rng)
    }

    fn observe(&mut self, fb: &Feedback) -> Result<(), PolicyError> {
        update_in(&mut self.arms, fb)
    }

    fn reward_signal(&self) -> RewardSignal {
        self.signal
    }

    fn arm_stats(&self) -> Option<&[ArmState]> {
        Some(&self.arms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn arms_with_best(n: usize, best: usize) -> Vec<ArmState> {
        (0..n)
            .map(|i| {
                let r = if i == best { 0.9 } else { 0.1 };
                ArmState { pulls: 10, reward_sum: 10.0 * r, reward_sq_sum: 10.0 * r * r, successes: 10 }
            })
            .collect()
    }

    #[test]
    fn pure_exploration_is_uniform() {
        let arms = arms_with_best(25, 3);
        let mut rng = DeviceRng::seed_from_u64(11);
        let mut counts = [0u32; 25];
        let draws = 10_000;
        for _ in 0..draws {
            counts[select_epsilon_greedy(&arms, 1.0, &mut rng).arm_index] += 1;
        }
        let expected = draws as f64 / 25.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // chi-square critical value, 24 dof, p = 0.01
        assert!(chi2 < 42.98, "chi2 = {chi2}");
    }

    #[test]
    fn pure_exploitation() {
        let arms = arms_with_best(25, 17);
        let mut rng = DeviceRng::seed_from_u64(12);
        for _ in 0..1000 {
            assert_eq!(select_epsilon_greedy(&arms, 0.0, &mut rng).arm_index, 17);
        }
    }

    #[test]
    fn greedy_frequency_matches_mixture() {
        let arms = arms_with_best(25, 8);
        let mut rng = DeviceRng::seed_from_u64(13);
        let hits = (0..10_000)
            .filter(|_| select_epsilon_greedy(&arms, 0.1, &mut rng).arm_index == 8)
            .count();
        let frac = hits as f64 / 10_000.0;
        assert!((frac - (0.9 + 0.1 / 25.0)).abs() < 0.02, "{frac}");
    }

    #[test]
    fn unpulled_arms_lose_to_positive_mean() {
        let mut arms = vec![ArmState::default(); 5];
        arms[2] = ArmState { pulls: 1, reward_sum: 0.4, reward_sq_sum: 0.16, successes: 1 };
        let mut rng = DeviceRng::seed_from_u64(14);
        for _ in 0..100 {
            assert_eq!(select_epsilon_greedy(&arms, 0.0, &mut rng).arm_index, 2);
        }
    }

    #[test]
    fn epsilon_out_of_range() {
        assert!(EpsilonGreedy::new(3, 1.5, RewardSignal::Energy).is_err());
        assert!(EpsilonGreedy::new(3, -0.1, RewardSignal::Energy).is_err());
    }
}
