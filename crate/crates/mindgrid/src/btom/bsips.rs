//! Bayesian inverse planning over goals, hidden contents, and beliefs.
//!
//! An observer watches an agent act in a gridworld whose box contents it
//! cannot see. Each hypothesis fixes three things: which gem the agent is
//! after, what the boxes actually hold, and which particle belief the
//! agent started with. The observer weighs a hypothesis by how well it
//! predicts the watched actions, assuming the agent picks actions with a
//! Boltzmann policy over belief-averaged plan costs, and by whether the
//! hypothesis world produces the observations actually seen.
//!
//! The weight recursion, per hypothesis `h = (goal, world, belief)`:
//!
//! ```text
//! w_h(0)   = [obs(world at 0) = obs(real world at 0)]
//! w_h(t+1) = w_h(t) * P(a_t | belief_t, goal) * [obs match at t+1]
//! ```
//!
//! All weights live in log space. Because every hypothesis replays the
//! same observed actions, worlds that share a content assignment share
//! one trajectory, and agents in observationally identical situations
//! share one policy; both are computed once and reused.

use std::collections::HashMap;

use thiserror::Error;

use crate::btom::belief::{enumerate_beliefs, Belief};
use crate::gridworld::{observe, transition, valid_actions, Action, EnvState, GridMap};
use crate::planner::{
    boltzmann_log_policy, default_beta, infinity_penalty, logsumexp, manhattan_q, q_hat,
    PlanCache,
};

/// Which agent model the observer assumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentVariant {
    /// Plans under uncertainty, updating a particle belief as it observes.
    Full,
    /// Lesion: always knows the true contents, so it never explores.
    TrueBelief,
    /// Lesion: keeps the belief machinery but steers by straight-line
    /// distance instead of planning.
    NonPlanning,
}

impl AgentVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentVariant::Full => "full",
            AgentVariant::TrueBelief => "true_belief",
            AgentVariant::NonPlanning => "non_planning",
        }
    }

    pub fn parse(s: &str) -> Option<AgentVariant> {
        match s {
            "full" => Some(AgentVariant::Full),
            "true_belief" => Some(AgentVariant::TrueBelief),
            "non_planning" => Some(AgentVariant::NonPlanning),
            _ => None,
        }
    }
}

/// Observer settings.
#[derive(Debug, Clone, Copy)]
pub struct InferenceConfig {
    /// Boltzmann inverse temperature; higher means closer to optimal play.
    pub beta: f64,
    /// Particles per agent belief.
    pub particles: u8,
    pub variant: AgentVariant,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            beta: default_beta(),
            particles: 3,
            variant: AgentVariant::Full,
        }
    }
}

/// One point in the hypothesis space: indices into the gem list, the
/// candidate list, and the initial-belief list of the owning [`Posterior`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hypothesis {
    pub goal: usize,
    pub candidate: usize,
    pub belief0: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InferenceError {
    #[error("no candidate initial states to reason over")]
    NoCandidates,
    #[error("the agent belief needs at least one particle")]
    NoParticles,
}

/// The full output of watching one action sequence: per-hypothesis log
/// weights after every prefix, plus enough shared structure to reconstruct
/// any hypothesis's world state and agent belief at any time.
#[derive(Debug, Clone)]
pub struct Posterior {
    pub map: GridMap,
    pub candidates: Vec<EnvState>,
    pub beliefs0: Vec<Belief>,
    pub hypotheses: Vec<Hypothesis>,
    pub actions: Vec<Action>,
    pub config: InferenceConfig,
    /// Candidate world trajectories under the observed actions: `[j][t]`.
    advanced: Vec<Vec<EnvState>>,
    /// Observation-equivalence class of each candidate at each time,
    /// `[t][j]`, identified by the smallest member index. Classes only ever
    /// split as time passes: revealed contents, taken keys, and unlocked
    /// doors all persist, so two worlds that once look different never look
    /// alike again.
    class_of: Vec<Vec<usize>>,
    /// Cumulative log weight per hypothesis per prefix length: `[h][t]`.
    log_w: Vec<Vec<f64>>,
}

impl Posterior {
    pub fn horizon(&self) -> usize {
        self.actions.len()
    }

    pub fn n_goals(&self) -> usize {
        self.map.gems.len()
    }

    pub fn n_hypotheses(&self) -> usize {
        self.hypotheses.len()
    }

    /// Cumulative log weight of hypothesis `h` after the first `t` actions.
    pub fn log_weight(&self, h: usize, t: usize) -> f64 {
        self.log_w[h][t]
    }

    /// Normalized posterior over hypotheses after the first `t` actions,
    /// or `None` when every hypothesis has been ruled out.
    pub fn weights_at(&self, t: usize) -> Option<Vec<f64>> {
        assert!(t <= self.horizon(), "time beyond the watched actions");
        let lw: Vec<f64> = self.log_w.iter().map(|row| row[t]).collect();
        let z = logsumexp(&lw);
        if z == f64::NEG_INFINITY {
            return None;
        }
        Some(lw.iter().map(|&x| (x - z).exp()).collect())
    }

    /// Marginal over goals after the first `t` actions.
    pub fn goal_posterior(&self, t: usize) -> Option<Vec<f64>> {
        let w = self.weights_at(t)?;
        let mut out = vec![0.0; self.n_goals()];
        for (hyp, wh) in self.hypotheses.iter().zip(&w) {
            out[hyp.goal] += wh;
        }
        Some(out)
    }

    /// Hypothesis `h`'s actual world state after the first `t` actions.
    pub fn world_state(&self, h: usize, t: usize) -> &EnvState {
        &self.advanced[self.hypotheses[h].candidate][t]
    }

    /// The agent's belief at time `t` under hypothesis `h`.
    ///
    /// This is the initial belief restricted to candidates that have looked
    /// exactly like the hypothesis world so far; when nothing survives the
    /// agent has been outright surprised and restarts from a uniform belief
    /// over whatever matches its current percept. Restricting against the
    /// current class alone is equivalent to filtering step by step, because
    /// classes only split over time: a particle consistent now was
    /// consistent at every earlier step, and once a reset happens every
    /// later filter keeps exactly the current class.
    pub fn belief_at(&self, h: usize, t: usize) -> Belief {
        let hyp = &self.hypotheses[h];
        restricted_belief(
            &self.beliefs0[hyp.belief0],
            &self.class_of[t],
            hyp.candidate,
        )
    }

    /// Belief-weighted hypothetical world states at time `t` under
    /// hypothesis `h`: what the agent thinks its situation might be.
    pub fn particle_states(&self, h: usize, t: usize) -> Vec<(EnvState, f64)> {
        self.belief_at(h, t)
            .support()
            .into_iter()
            .map(|(j, w)| (self.advanced[j][t], w))
            .collect()
    }
}

/// Restricts `belief` to the candidates observationally identical to
/// candidate `j_h` at one time step, resetting to uniform over that class
/// when no particle survives.
fn restricted_belief(belief: &Belief, class_of_t: &[usize], j_h: usize) -> Belief {
    let class = class_of_t[j_h];
    let consistent: Vec<bool> = class_of_t.iter().map(|&c| c == class).collect();
    let (filtered, survived) = belief.filtered(&consistent);
    if survived {
        return filtered;
    }
    let members: Vec<usize> = consistent
        .iter()
        .enumerate()
        .filter(|&(_, &ok)| ok)
        .map(|(j, _)| j)
        .collect();
    Belief::uniform_over(&members, class_of_t.len())
}

/// Watches `actions` unfold from `true_initial` and scores every
/// hypothesis in goals x candidates x initial beliefs.
///
/// `candidates` is the hypothesis space over hidden contents, typically
/// from [`crate::gridworld::enumerate_initial_states`]; `true_initial`
/// supplies the observations and need not be among the candidates. The
/// returned [`Posterior`] holds weights after every prefix, so judgment
/// points are free to pick afterwards.
pub fn run_inference(
    map: &GridMap,
    candidates: &[EnvState],
    true_initial: &EnvState,
    actions: &[Action],
    config: &InferenceConfig,
) -> Result<Posterior, InferenceError> {
    if candidates.is_empty() {
        return Err(InferenceError::NoCandidates);
    }
    if config.particles == 0 {
        return Err(InferenceError::NoParticles);
    }
    let n = candidates.len();
    let horizon = actions.len();

    let advance = |s0: EnvState| -> Vec<EnvState> {
        let mut traj = Vec::with_capacity(horizon + 1);
        traj.push(s0);
        for &a in actions {
            let next = transition(map, traj.last().unwrap(), a);
            traj.push(next);
        }
        traj
    };
    let advanced: Vec<Vec<EnvState>> = candidates.iter().map(|&s| advance(s)).collect();
    let true_traj = advance(*true_initial);

    let class_of: Vec<Vec<usize>> = (0..=horizon)
        .map(|t| {
            let mut first: HashMap<_, usize> = HashMap::new();
            (0..n)
                .map(|j| *first.entry(observe(&advanced[j][t])).or_insert(j))
                .collect()
        })
        .collect();

    let beliefs0: Vec<Belief> = match config.variant {
        AgentVariant::TrueBelief => (0..n)
            .map(|j| Belief::delta(j, n, config.particles))
            .collect(),
        _ => enumerate_beliefs(n, config.particles),
    };
    let mut hypotheses = Vec::new();
    for goal in 0..map.gems.len() {
        for candidate in 0..n {
            match config.variant {
                AgentVariant::TrueBelief => hypotheses.push(Hypothesis {
                    goal,
                    candidate,
                    belief0: candidate,
                }),
                _ => {
                    for belief0 in 0..beliefs0.len() {
                        hypotheses.push(Hypothesis { goal, candidate, belief0 });
                    }
                }
            }
        }
    }

    let mut log_w = vec![vec![0.0f64; horizon + 1]; hypotheses.len()];
    let o0 = observe(&true_traj[0]);
    for (h, hyp) in hypotheses.iter().enumerate() {
        if observe(&advanced[hyp.candidate][0]) != o0 {
            log_w[h][0] = f64::NEG_INFINITY;
        }
    }

    let mut cache = PlanCache::new();
    let penalty = infinity_penalty(map);

    for t in 0..horizon {
        // Log likelihood of the observed action, shared by all hypotheses
        // whose agents see the same situation with the same particles.
        let mut policies: HashMap<(usize, usize, Vec<u8>), f64> = HashMap::new();
        for (h, hyp) in hypotheses.iter().enumerate() {
            let prev = log_w[h][t];
            if prev == f64::NEG_INFINITY {
                log_w[h][t + 1] = f64::NEG_INFINITY;
                continue;
            }
            let belief = restricted_belief(&beliefs0[hyp.belief0], &class_of[t], hyp.candidate);
            let class = class_of[t][hyp.candidate];
            let key = (hyp.goal, class, belief.counts().to_vec());
            let log_lik = match policies.get(&key) {
                Some(&v) => v,
                None => {
                    // The class representative sees what every member sees,
                    // so its valid actions are the agent's valid actions.
                    let va = valid_actions(map, &advanced[class][t]);
                    let v = match va.iter().position(|&a| a == actions[t]) {
                        // The watched action is impossible for this agent.
                        None => f64::NEG_INFINITY,
                        Some(ai) => {
                            let particles: Vec<(EnvState, f64)> = belief
                                .support()
                                .into_iter()
                                .map(|(j, w)| (advanced[j][t], w))
                                .collect();
                            let costs: Vec<f64> = va
                                .iter()
                                .map(|&a| match config.variant {
                                    AgentVariant::NonPlanning => particles
                                        .iter()
                                        .map(|&(s, w)| {
                                            w * manhattan_q(map, &s, a, hyp.goal)
                                        })
                                        .sum(),
                                    _ => q_hat(
                                        &mut cache, map, &particles, a, hyp.goal, penalty,
                                    ),
                                })
                                .collect();
                            boltzmann_log_policy(&costs, config.beta)[ai]
                        }
                    };
                    policies.insert(key, v);
                    v
                }
            };
            let obs_ok =
                observe(&advanced[hyp.candidate][t + 1]) == observe(&true_traj[t + 1]);
            log_w[h][t + 1] =
                prev + log_lik + if obs_ok { 0.0 } else { f64::NEG_INFINITY };
        }
    }

    Ok(Posterior {
        map: map.clone(),
        candidates: candidates.to_vec(),
        beliefs0,
        hypotheses,
        actions: actions.to_vec(),
        config: *config,
        advanced,
        class_of,
        log_w,
    })
}
