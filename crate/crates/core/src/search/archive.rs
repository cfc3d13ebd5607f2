use serde::{Deserialize, Serialize};

use crate::fitness::Fitness;
use crate::genome::Patch;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub patch: Patch,
    pub fitness: Fitness,
    /// Generation the individual was recorded in: first evaluation for
    /// archive members, the final generation for last-front members.
    pub generation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdout: Option<Fitness>,
}

/// Every valid individual seen that no other seen individual dominates.
/// Among equal fitnesses the earliest one is kept.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    members: Vec<Member>,
}

impl ParetoArchive {
    /// Offer a candidate; returns whether it was admitted.
    pub fn offer(&mut self, patch: &Patch, fitness: Fitness, generation: usize) -> bool {
        if !fitness.valid {
            return false;
        }
        if self.members.iter().any(|m| m.fitness.dominates(&fitness) || m.fitness == fitness) {
            return false;
        }
        self.members.retain(|m| !fitness.dominates(&m.fitness));
        let member = Member { patch: patch.clone(), fitness, generation, holdout: None };
        let at = self
            .members
            .partition_point(|m| (m.fitness.cost, m.fitness.error) < (fitness.cost, fitness.error));
        self.members.insert(at, member);
        true
    }

    /// Members ordered by increasing cost.
    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn members_mut(&mut self) -> &mut [Member] {
        &mut self.members
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.members.iter().map(|m| (m.fitness.cost, m.fitness.error)).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}
