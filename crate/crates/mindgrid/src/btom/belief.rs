//! Particle beliefs over candidate initial states.
//!
//! An agent's uncertainty about hidden box contents is represented as a
//! multiset of `k` particles drawn from the candidate list produced by
//! [`crate::gridworld::enumerate_initial_states`]. A belief stores one
//! count per candidate; the counts sum to `k` for a fresh belief and may
//! shrink as observations rule particles out. Probabilities are always
//! the surviving counts renormalized, so a belief with counts `[2, 1, 0]`
//! assigns 2/3 to the first candidate and 1/3 to the second.

use std::fmt;

/// A multiset of particles over candidate initial states.
///
/// The vector is indexed by candidate position and holds the number of
/// particles sitting on that candidate. `counts` is kept private so a
/// belief can only be built through the constructors below, all of which
/// keep the representation consistent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Belief {
    counts: Vec<u8>,
}

impl Belief {
    /// Builds a belief from raw counts. Returns `None` when every count
    /// is zero; a belief with no particles is not representable.
    pub fn from_counts(counts: Vec<u8>) -> Option<Self> {
        if counts.iter().all(|&c| c == 0) {
            return None;
        }
        Some(Belief { counts })
    }

    /// All `k` particles on one candidate.
    pub fn delta(candidate: usize, n_candidates: usize, k: u8) -> Self {
        assert!(candidate < n_candidates, "delta candidate out of range");
        assert!(k > 0, "a belief needs at least one particle");
        let mut counts = vec![0; n_candidates];
        counts[candidate] = k;
        Belief { counts }
    }

    /// One particle on each listed candidate.
    pub fn uniform_over(members: &[usize], n_candidates: usize) -> Self {
        assert!(!members.is_empty(), "uniform_over needs at least one member");
        let mut counts = vec![0; n_candidates];
        for &j in members {
            counts[j] = 1;
        }
        Belief { counts }
    }

    /// Number of candidates the belief is defined over.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    /// True when no candidate carries a particle. Unreachable through the
    /// public constructors but possible mid-update; see [`Belief::filtered`].
    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// Raw particle counts, indexed by candidate.
    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    /// Candidates that carry at least one particle, with their normalized
    /// probabilities. The total particle mass always normalizes to one.
    pub fn support(&self) -> Vec<(usize, f64)> {
        let total: u32 = self.counts.iter().map(|&c| c as u32).sum();
        assert!(total > 0, "cannot normalize an empty belief");
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(j, &c)| (j, c as f64 / total as f64))
            .collect()
    }

    /// Zeroes the particles on candidates marked inconsistent and reports
    /// whether any particle survived. The caller decides what a fully dead
    /// belief means; the inference engine resets one, see
    /// [`super::bsips::Posterior::belief_at`].
    pub fn filtered(&self, consistent: &[bool]) -> (Belief, bool) {
        assert_eq!(consistent.len(), self.counts.len());
        let counts: Vec<u8> = self
            .counts
            .iter()
            .zip(consistent)
            .map(|(&c, &ok)| if ok { c } else { 0 })
            .collect();
        let survived = counts.iter().any(|&c| c > 0);
        (Belief { counts }, survived)
    }
}

impl fmt::Display for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Enumerates every multiset of `k` particles over `n_candidates`
/// candidates, in a fixed order: the first candidate's count runs from
/// `k` down to 0, then recursively for the rest. The first belief is all
/// particles on candidate 0, the last is all particles on the final
/// candidate. The list has `C(n_candidates + k - 1, k)` entries.
pub fn enumerate_beliefs(n_candidates: usize, k: u8) -> Vec<Belief> {
    assert!(n_candidates > 0, "need at least one candidate");
    assert!(k > 0, "need at least one particle");
    let mut out = Vec::new();
    let mut counts = vec![0u8; n_candidates];
    fill(&mut counts, 0, k, &mut out);
    out
}

fn fill(counts: &mut Vec<u8>, idx: usize, remaining: u8, out: &mut Vec<Belief>) {
    if idx == counts.len() - 1 {
        counts[idx] = remaining;
        out.push(Belief { counts: counts.clone() });
        counts[idx] = 0;
        return;
    }
    for c in (0..=remaining).rev() {
        counts[idx] = c;
        fill(counts, idx + 1, remaining - c, out);
    }
    counts[idx] = 0;
}
