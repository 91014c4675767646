use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::SatirStyle;

/// Per-style assignment counts. New sessions go to the least-assigned
/// style; ties are broken by a uniform draw from a seeded generator, using
/// one ChaCha stream per draw so the sequence survives restarts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentLedger {
    counts: BTreeMap<SatirStyle, u64>,
    rng_seed: u64,
    #[serde(default)]
    draws: u64,
}

impl AssignmentLedger {
    pub fn new(styles: impl IntoIterator<Item = SatirStyle>, rng_seed: u64) -> Self {
        Self {
            counts: styles.into_iter().map(|s| (s, 0)).collect(),
            rng_seed,
            draws: 0,
        }
    }

    /// Starts from explicit counts, e.g. to resume a study.
    pub fn with_counts(counts: BTreeMap<SatirStyle, u64>, rng_seed: u64) -> Self {
        Self {
            counts,
            rng_seed,
            draws: 0,
        }
    }

    pub fn counts(&self) -> &BTreeMap<SatirStyle, u64> {
        &self.counts
    }

    pub fn count(&self, style: SatirStyle) -> Option<u64> {
        self.counts.get(&style).copied()
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn contains(&self, style: SatirStyle) -> bool {
        self.counts.contains_key(&style)
    }

    /// Picks a least-count style among `candidates` (all registered styles
    /// when `None`) without recording it.
    pub fn pick(&mut self, candidates: Option<&[SatirStyle]>) -> Option<SatirStyle> {
        let pool: Vec<(SatirStyle, u64)> = self
            .counts
            .iter()
            .filter(|(s, _)| candidates.is_none_or(|c| c.contains(s)))
            .map(|(s, c)| (*s, *c))
            .collect();
        let min = pool.iter().map(|(_, c)| *c).min()?;
        let ties: Vec<SatirStyle> = pool.into_iter().filter(|(_, c)| *c == min).map(|(s, _)| s).collect();
        if ties.len() == 1 {
            return Some(ties[0]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(self.draws);
        self.draws += 1;
        Some(ties[rng.random_range(0..ties.len())])
    }

    /// Records one assignment. Returns false for an unregistered style.
    pub fn record(&mut self, style: SatirStyle) -> bool {
        match self.counts.get_mut(&style) {
            Some(count) => {
                *count += 1;
                true
            }
            None => false,
        }
    }
}
