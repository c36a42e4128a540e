//! Point sets over an enumerated finite space, stored as bit-vectors.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A subset of `{0, .., n-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    bits: FixedBitSet,
}

impl PointSet {
    pub fn empty(n: usize) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(n),
        }
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        Self { bits }
    }

    /// Panics if an index is out of range.
    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn singleton(n: usize, i: usize) -> Self {
        Self::from_indices(n, [i])
    }

    /// Size of the ambient space.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn insert(&mut self, i: usize) {
        self.bits.insert(i);
    }

    pub fn remove(&mut self, i: usize) {
        self.bits.set(i, false);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits.contains(i)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &PointSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        PointSet { bits }
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        PointSet { bits }
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        PointSet { bits }
    }

    pub fn complement(&self) -> PointSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        PointSet { bits }
    }

    pub fn union_with(&mut self, other: &PointSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn intersect_with(&mut self, other: &PointSet) {
        self.bits.intersect_with(&other.bits);
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Serialize, Deserialize)]
struct RawSet {
    universe: usize,
    members: Vec<usize>,
}

impl Serialize for PointSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawSet {
            universe: self.universe(),
            members: self.to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawSet::deserialize(d)?;
        if let Some(&bad) = raw.members.iter().find(|&&i| i >= raw.universe) {
            return Err(serde::de::Error::custom(format!(
                "member {bad} out of range for universe {}",
                raw.universe
            )));
        }
        Ok(PointSet::from_indices(raw.universe, raw.members))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = PointSet::from_indices(6, [0, 1, 2]);
        let b = PointSet::from_indices(6, [2, 3]);
        assert_eq!(a.union(&b).to_vec(), vec![0, 1, 2, 3]);
        assert_eq!(a.intersection(&b).to_vec(), vec![2]);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 1]);
        assert_eq!(a.complement().to_vec(), vec![3, 4, 5]);
        assert!(PointSet::from_indices(6, [1]).is_subset(&a));
        assert_eq!(PointSet::full(6).len(), 6);
    }
}
