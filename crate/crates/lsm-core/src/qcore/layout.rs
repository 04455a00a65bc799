use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LsmError, Result};
use crate::qcore::Bipartition;

/// A party label. `Party(0)` is Alice, `Party(1)` is Bob.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Party(pub usize);

pub const ALICE: Party = Party(0);
pub const BOB: Party = Party(1);

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => write!(f, "Alice"),
            1 => write!(f, "Bob"),
            n => write!(f, "P{n}"),
        }
    }
}

/// Assignment of tensor factors to parties, slots, and within-slot parts.
///
/// A "slot" is one distributed state of a marking instance; a "part" tags
/// pieces within a slot (e.g. the first and second Bell pair of an X4
/// member). Factors are stored slot-major and party-interleaved inside each
/// slot; any other ordering is reached through explicit permutations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyLayout {
    party: Vec<Party>,
    slot: Vec<usize>,
    part: Vec<usize>,
}

impl PartyLayout {
    pub fn new(party: Vec<Party>, slot: Vec<usize>, part: Vec<usize>) -> Result<Self> {
        if party.is_empty() || party.len() != slot.len() || party.len() != part.len() {
            return Err(LsmError::InvalidArgument(
                "layout vectors must be nonempty and of equal length".into(),
            ));
        }
        Ok(Self { party, slot, part })
    }

    /// A single two-factor slot shared by two parties (one Bell pair).
    pub fn pair(a: Party, b: Party) -> Self {
        Self { party: vec![a, b], slot: vec![0, 0], part: vec![0, 0] }
    }

    pub fn len(&self) -> usize {
        self.party.len()
    }

    pub fn is_empty(&self) -> bool {
        self.party.is_empty()
    }

    pub fn party_of(&self, factor: usize) -> Party {
        self.party[factor]
    }

    pub fn slot_of(&self, factor: usize) -> usize {
        self.slot[factor]
    }

    pub fn part_of(&self, factor: usize) -> usize {
        self.part[factor]
    }

    /// Sorted distinct parties present in the layout.
    pub fn parties(&self) -> Vec<Party> {
        let mut p = self.party.clone();
        p.sort();
        p.dedup();
        p
    }

    pub fn factors_of(&self, party: Party) -> Vec<usize> {
        (0..self.len()).filter(|&f| self.party[f] == party).collect()
    }

    pub fn slot_factors(&self, slot: usize) -> Vec<usize> {
        (0..self.len()).filter(|&f| self.slot[f] == slot).collect()
    }

    pub fn num_slots(&self) -> usize {
        self.slot.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// The cut separating `party` from everyone else.
    pub fn party_cut(&self, party: Party) -> Result<Bipartition> {
        Bipartition::new(self.factors_of(party), self.len())
    }

    /// Whether a factor subset belongs entirely to one party.
    pub fn all_held_by(&self, factors: &[usize], party: Party) -> bool {
        factors.iter().all(|&f| f < self.len() && self.party[f] == party)
    }

    /// Concatenates `m` copies of this layout, renumbering slots 0..m per copy.
    pub fn replicate(&self, m: usize) -> Self {
        let slots_per = self.num_slots();
        let mut party = Vec::with_capacity(self.len() * m);
        let mut slot = Vec::with_capacity(self.len() * m);
        let mut part = Vec::with_capacity(self.len() * m);
        for j in 0..m {
            party.extend_from_slice(&self.party);
            slot.extend(self.slot.iter().map(|&s| s + j * slots_per));
            part.extend_from_slice(&self.part);
        }
        Self { party, slot, part }
    }

    /// Appends another layout, shifting its slot indices past this one's.
    pub fn concat(&self, other: &Self) -> Self {
        let shift = self.num_slots();
        let mut party = self.party.clone();
        let mut slot = self.slot.clone();
        let mut part = self.part.clone();
        party.extend_from_slice(&other.party);
        slot.extend(other.slot.iter().map(|&s| s + shift));
        part.extend_from_slice(&other.part);
        Self { party, slot, part }
    }
}
