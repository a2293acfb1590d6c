use crate::error::PolicyError;

use super::{break_tie, update_in, ArmState, DeviceRng, Feedback, Phase, PolicyDecision, SelectionPolicy};

/// Variance upper estimate `sigma2 + sqrt(2 ln m / pulls)`.
pub fn tuned_variance(sigma2: f64, pulls: u64, m: f64) -> f64 {
    sigma2 + (2.0 * m.ln() / pulls as f64).sqrt()
}

/// `reward_sum / pulls + sqrt(ln m / pulls * min(1/4, V))`.
pub fn tuned_score(reward_sum: f64, pulls: u64, sigma2: f64, m: f64) -> f64 {
    let s = pulls as f64;
    let v = tuned_variance(sigma2, pulls, m);
    reward_sum / s + (m.ln() / s * v.min(0.25)).sqrt()
}

pub fn ucb_variance(arm: &ArmState, m: f64) -> Result<f64, PolicyError> {
    let sigma2 = arm.variance().ok_or(PolicyError::UnpulledArm(0))?;
    Ok(tuned_variance(sigma2, arm.pulls, m))
}

pub fn ucb_score(arm: &ArmState, m: f64) -> Result<f64, PolicyError> {
    let sigma2 = arm.variance().ok_or(PolicyError::UnpulledArm(0))?;
    Ok(tuned_score(arm.reward_sum, arm.pulls, sigma2, m))
}

/// Scores of every arm, or the first unpulled arm.
pub fn ucb_scores(arms: &[ArmState], m: f64) -> Result<Vec<f64>, PolicyError> {
    arms.iter()
        .enumerate()
        .map(|(i, a)| ucb_score(a, m).map_err(|_| PolicyError::UnpulledArm(i)))
        .collect()
}

/// Indices whose score equals the maximum exactly.
pub fn argmax_set(scores: &[f64]) -> Vec<usize> {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scores.iter().enumerate().filter(|(_, &s)| s == best).map(|(i, _)| i).collect()
}

/// Plays every arm once in index order, then follows the maximal score.
pub fn select_ucb(arms: &[ArmState], m: f64, tie_rng: &mut DeviceRng) -> PolicyDecision {
    if let Some(first_unpulled) = arms.iter().position(|a| a.pulls == 0) {
        return PolicyDecision { arm_index: first_unpulled, phase: Phase::Initialization, tie_candidates: 1 };
    }
    let scores = ucb_scores(arms, m).expect("all arms pulled");
    let best = argmax_set(&scores);
    PolicyDecision {
        arm_index: break_tie(&best, tie_rng),
        phase: Phase::Learned,
        tie_candidates: best.len(),
    }
}

/// UCB1-tuned over the full arm space, fed with energy-shaped rewards.
#[derive(Debug, Clone)]
pub struct UcbTuned {
    arms: Vec<ArmState>,
    plays: u64,
}

impl UcbTuned {
    pub fn new(n_arms: usize) -> Self {
        Self { arms: vec![ArmState::default(); n_arms], plays: 0 }
    }

    pub fn plays(&self) -> u64 {
        self.plays
    }
}

impl SelectionPolicy for UcbTuned {
    fn select(&mut self, rng: &mut DeviceRng) -> PolicyDecision {
        select_ucb(&self.arms, self.plays as f64, rng)
    }

    fn observe(&mut self, fb: &Feedback) -> Result<(), PolicyError> {
        update_in(&mut self.arms, fb)?;
        self.plays += 1;
        Ok(())
    }

    fn arm_stats(&self) -> Option<&[ArmState]> {
        Some(&self.arms)
    }
}
