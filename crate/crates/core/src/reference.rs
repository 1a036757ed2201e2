//! Published optima for sorting and single-exception sorting networks on
//! 2 to 10 channels, used to annotate search results and to seed the cases
//! that are still open.

use crate::figures;
use crate::network::{LayeredNetwork, NetworkClass};

/// Channel counts covered by the reference tables.
pub const CHANNELS: std::ops::RangeInclusive<usize> = 2..=10;

/// Known optimal depth.
pub fn depth(n: usize, class: NetworkClass) -> Option<usize> {
    const SORTING: [usize; 9] = [1, 3, 3, 5, 5, 6, 6, 7, 7];
    const SINGLE: [usize; 9] = [0, 2, 3, 4, 5, 6, 6, 7, 7];
    lookup(n, class, &SORTING, &SINGLE).copied()
}

/// Known `(lower, upper)` bounds on the optimal size. The bounds coincide
/// except where the optimum is open.
pub fn size(n: usize, class: NetworkClass) -> Option<(usize, usize)> {
    const SORTING: [(usize, usize); 9] = [(1, 1), (3, 3), (5, 5), (9, 9), (12, 12), (16, 16), (19, 19), (25, 25), (29, 29)];
    const SINGLE: [(usize, usize); 9] = [(0, 0), (2, 2), (5, 5), (8, 8), (12, 12), (15, 15), (18, 20), (24, 24), (28, 29)];
    lookup(n, class, &SORTING, &SINGLE).copied()
}

/// Known Pareto-optimal `(size, depth)` pairs, by decreasing size.
pub fn pareto(n: usize, class: NetworkClass) -> Option<&'static [(usize, usize)]> {
    const SORTING: [&[(usize, usize)]; 9] = [
        &[(1, 1)],
        &[(3, 3)],
        &[(5, 3)],
        &[(9, 5)],
        &[(12, 5)],
        &[(16, 6)],
        &[(19, 6)],
        &[(25, 7)],
        &[(31, 7), (29, 8)],
    ];
    const SINGLE: [&[(usize, usize)]; 9] = [
        &[(0, 0)],
        &[(2, 2)],
        &[(5, 3)],
        &[(8, 4)],
        &[(12, 5)],
        &[(15, 6)],
        &[(20, 6)],
        &[(24, 7)],
        &[(31, 7), (29, 8)],
    ];
    lookup(n, class, &SORTING, &SINGLE).copied()
}

fn lookup<'a, T>(n: usize, class: NetworkClass, sorting: &'a [T; 9], single: &'a [T; 9]) -> Option<&'a T> {
    let idx = n.checked_sub(*CHANNELS.start())?;
    match class {
        NetworkClass::Sorting => sorting.get(idx),
        NetworkClass::SingleException => single.get(idx),
        NetworkClass::Halver { .. } => None,
    }
}

/// A published lower bound together with the smallest known network, for
/// size optima that are still open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenSize {
    pub lower: usize,
    pub witness: LayeredNetwork,
}

/// The open size cases among the reference tables: single-exception
/// networks on 8 and 10 channels.
pub fn open_size(n: usize, class: NetworkClass) -> Option<OpenSize> {
    let (lower, upper) = size(n, class)?;
    if lower == upper {
        return None;
    }
    figures::single_exception()
        .into_iter()
        .filter(|f| f.n() == n && f.class == class)
        .min_by_key(|f| f.size)
        .filter(|f| f.size == upper)
        .map(|f| OpenSize { lower, witness: f.network() })
}
