//! Hourly base steps with coarse groupings (4-hour, daily, ...) per carrier.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::ModelError;

/// A half-open hour interval `[start, end)`.
pub type Block = (u32, u32);

/// Partition of the planning horizon into aligned coarse blocks for every
/// group size used by some carrier. Blocks are anchored at hour 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeHierarchy {
    horizon: u32,
    groupings: BTreeMap<u32, Vec<Block>>,
}

impl TimeHierarchy {
    /// Builds groupings for every size in `sizes`. Each size must divide the
    /// horizon and sizes must be pairwise nested (every larger size a
    /// multiple of every smaller one).
    pub fn build(horizon: u32, sizes: &BTreeSet<u32>) -> Result<Self, ModelError> {
        if horizon == 0 {
            return Err(ModelError::TimeHierarchy("empty horizon".into()));
        }
        let mut all = sizes.clone();
        all.insert(1);
        let ordered: Vec<u32> = all.iter().copied().collect();
        for &size in &ordered {
            if size == 0 {
                return Err(ModelError::TimeHierarchy("group size 0".into()));
            }
            if !horizon.is_multiple_of(size) {
                return Err(ModelError::TimeHierarchy(format!(
                    "resolution {size} does not divide horizon {horizon}"
                )));
            }
        }
        for pair in ordered.windows(2) {
            if pair[1] % pair[0] != 0 {
                return Err(ModelError::TimeHierarchy(format!(
                    "group sizes {} and {} are not nested",
                    pair[0], pair[1]
                )));
            }
        }
        let mut groupings = BTreeMap::new();
        for &size in &ordered {
            let blocks = (0..horizon / size)
                .map(|k| (k * size, (k + 1) * size))
                .collect();
            groupings.insert(size, blocks);
        }
        Ok(Self { horizon, groupings })
    }

    /// Like [`TimeHierarchy::build`], but silently drops sizes that do not
    /// divide the horizon or break nesting, returning them for diagnostics.
    pub fn build_lenient(horizon: u32, sizes: &BTreeSet<u32>) -> (Self, Vec<u32>) {
        if horizon == 0 {
            return (
                Self {
                    horizon: 0,
                    groupings: BTreeMap::new(),
                },
                sizes.iter().copied().collect(),
            );
        }
        let mut kept = BTreeSet::new();
        let mut dropped = Vec::new();
        for &size in sizes {
            if size == 0 || horizon == 0 || !horizon.is_multiple_of(size) {
                dropped.push(size);
                continue;
            }
            let nested = kept.iter().all(|&k: &u32| {
                if k < size {
                    size % k == 0
                } else {
                    k % size == 0
                }
            });
            if nested {
                kept.insert(size);
            } else {
                dropped.push(size);
            }
        }
        let base = Self::build(horizon.max(1), &kept).expect("kept sizes are consistent");
        (
            Self {
                horizon,
                groupings: base.groupings,
            },
            dropped,
        )
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Blocks of the given group size, or `None` when the size is absent.
    pub fn blocks(&self, size: u32) -> Option<&[Block]> {
        self.groupings.get(&size).map(|v| v.as_slice())
    }

    pub fn has_size(&self, size: u32) -> bool {
        self.groupings.contains_key(&size)
    }

    pub fn sizes(&self) -> impl Iterator<Item = u32> + '_ {
        self.groupings.keys().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(list: &[u32]) -> BTreeSet<u32> {
        list.iter().copied().collect()
    }

    #[test]
    fn partitions_two_days() {
        let th = TimeHierarchy::build(48, &sizes(&[1, 4, 24])).unwrap();
        assert_eq!(th.blocks(1).unwrap().len(), 48);
        assert_eq!(th.blocks(4).unwrap().len(), 12);
        assert_eq!(th.blocks(24).unwrap().len(), 2);
        assert_eq!(th.blocks(4).unwrap()[1], (4, 8));
    }

    #[test]
    fn identity_resolution() {
        let th = TimeHierarchy::build(24, &sizes(&[1])).unwrap();
        assert_eq!(th.blocks(1).unwrap().len(), 24);
    }

    #[test]
    fn weekly_horizon() {
        let th = TimeHierarchy::build(168, &sizes(&[1, 4, 24])).unwrap();
        assert_eq!(th.blocks(1).unwrap().len(), 168);
        assert_eq!(th.blocks(4).unwrap().len(), 42);
        assert_eq!(th.blocks(24).unwrap().len(), 7);
    }

    #[test]
    fn rejects_non_divisor() {
        let err = TimeHierarchy::build(24, &sizes(&[5])).unwrap_err();
        assert!(err.to_string().contains("does not divide horizon"));
    }

    #[test]
    fn rejects_non_nested() {
        let err = TimeHierarchy::build(24, &sizes(&[4, 6])).unwrap_err();
        assert!(err.to_string().contains("not nested"));
    }

    #[test]
    fn blocks_partition_horizon() {
        let th = TimeHierarchy::build(48, &sizes(&[1, 4, 24])).unwrap();
        for size in th.sizes() {
            let blocks = th.blocks(size).unwrap();
            let mut covered = 0;
            let mut prev_end = 0;
            for &(s, e) in blocks {
                assert_eq!(s, prev_end);
                assert_eq!(e - s, size);
                covered += e - s;
                prev_end = e;
            }
            assert_eq!(covered, 48);
        }
    }

    #[test]
    fn lenient_drops_bad_sizes() {
        let (th, dropped) = TimeHierarchy::build_lenient(24, &sizes(&[1, 4, 5, 6]));
        assert!(th.has_size(4));
        assert!(!th.has_size(5));
        // 6 divides 24 but is not nested with 4
        assert_eq!(dropped, vec![5, 6]);
    }
}
