//! Ratio-test Hamming matching with a mutual-nearest cross check.
//!
//! Small sets are scanned exhaustively. Above [`EXHAUSTIVE_LIMIT`]
//! descriptors, candidates come from LSH buckets keyed on each of the eight
//! 32-bit substrings, so a neighbour is only found if it agrees exactly on at
//! least one substring.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Descriptor;

pub const EXHAUSTIVE_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    pub a: usize,
    pub b: usize,
    pub distance: u32,
}

/// One-to-one correspondences between two descriptor sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchSet {
    pub pairs: Vec<Match>,
}

impl MatchSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
struct Nearest {
    index: usize,
    first: u32,
    second: u32,
}

struct Lsh {
    tables: Vec<HashMap<u32, Vec<usize>>>,
}

impl Lsh {
    fn build(set: &[Descriptor]) -> Self {
        let mut tables = vec![HashMap::new(); 8];
        for (i, d) in set.iter().enumerate() {
            for (k, table) in tables.iter_mut().enumerate() {
                table.entry(d.word32(k)).or_insert_with(Vec::new).push(i);
            }
        }
        Self { tables }
    }

    fn candidates(&self, query: &Descriptor, scratch: &mut Vec<usize>) {
        scratch.clear();
        for (k, table) in self.tables.iter().enumerate() {
            if let Some(bucket) = table.get(&query.word32(k)) {
                scratch.extend_from_slice(bucket);
            }
        }
        scratch.sort_unstable();
        scratch.dedup();
    }
}

fn nearest_in(query: &Descriptor, set: &[Descriptor], candidates: impl Iterator<Item = usize>) -> Option<Nearest> {
    let mut best: Option<Nearest> = None;
    for j in candidates {
        let d = query.hamming(&set[j]);
        best = Some(match best {
            None => Nearest {
                index: j,
                first: d,
                second: u32::MAX,
            },
            Some(n) if d < n.first => Nearest {
                index: j,
                first: d,
                second: n.first,
            },
            Some(n) if d < n.second => Nearest { second: d, ..n },
            Some(n) => n,
        });
    }
    best
}

fn all_nearest(queries: &[Descriptor], set: &[Descriptor]) -> Vec<Option<Nearest>> {
    if set.len().max(queries.len()) <= EXHAUSTIVE_LIMIT {
        queries.iter().map(|q| nearest_in(q, set, 0..set.len())).collect()
    } else {
        let lsh = Lsh::build(set);
        let mut scratch = Vec::new();
        queries
            .iter()
            .map(|q| {
                lsh.candidates(q, &mut scratch);
                nearest_in(q, set, scratch.iter().copied())
            })
            .collect()
    }
}

/// Matches `a` against `b`, keeping pair `(i, j)` when `j` is the nearest
/// neighbour of `i`, the nearest distance is below `ratio` times the second
/// nearest, and `i` is also the nearest neighbour of `j`.
///
/// Panics unless `0 < ratio < 1`.
pub fn match_descriptors(a: &[Descriptor], b: &[Descriptor], ratio: f32) -> MatchSet {
    assert!(ratio > 0.0 && ratio < 1.0, "ratio must lie in (0, 1), got {ratio}");
    if a.is_empty() || b.is_empty() {
        return MatchSet::default();
    }
    let forward = all_nearest(a, b);
    let backward = all_nearest(b, a);
    let pairs = forward
        .iter()
        .enumerate()
        .filter_map(|(i, n)| {
            let n = (*n)?;
            let passes_ratio = n.second == u32::MAX || (n.first as f32) < ratio * n.second as f32;
            let mutual = backward[n.index].is_some_and(|m| m.index == i);
            (passes_ratio && mutual).then_some(Match {
                a: i,
                b: n.index,
                distance: n.first,
            })
        })
        .collect();
    MatchSet { pairs }
}
