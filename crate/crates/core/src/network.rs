//! Comparator networks over binary vectors.
//!
//! Channels are numbered from 1. A binary vector on `n` channels is stored as
//! an integer whose bit `b` (0-based) carries the value of channel `b + 1`, so
//! channel 1 is the least significant bit. A comparator `(i, j)` with `i < j`
//! routes the minimum to channel `i` and the maximum to channel `j`; on binary
//! vectors that means swapping the two bits exactly when channel `i` holds a 1
//! and channel `j` holds a 0.
//!
//! Everything here is exhaustive over all `2^n` binary inputs. The zero-one
//! principle makes that sufficient for sorting, and it is the oracle every SAT
//! witness is checked against.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};

/// Largest channel count accepted by [`VectorSet`] and the exhaustive checks.
pub const MAX_CHANNELS: usize = 24;

/// An `n`-bit binary vector, channel 1 in the least significant bit.
pub type BinaryVector = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct Comparator {
    i: usize,
    j: usize,
}

impl Comparator {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == 0 || i >= j {
            return Err(Error::InvalidNetwork(format!(
                "comparator ({i},{j}) must satisfy 1 <= i < j"
            )));
        }
        Ok(Self { i, j })
    }

    /// Channel receiving the minimum.
    pub fn i(self) -> usize {
        self.i
    }

    /// Channel receiving the maximum.
    pub fn j(self) -> usize {
        self.j
    }

    pub fn touches(self, channel: usize) -> bool {
        self.i == channel || self.j == channel
    }

    #[inline]
    pub(crate) fn masks(self) -> (u32, u32) {
        (1 << (self.i - 1), 1 << (self.j - 1))
    }

    /// Applies the comparator without range checks.
    #[inline]
    pub(crate) fn apply(self, m: BinaryVector) -> BinaryVector {
        let (lo, hi) = self.masks();
        swap_if_unordered(m, lo, hi)
    }
}

#[inline]
fn swap_if_unordered(m: u32, lo: u32, hi: u32) -> u32 {
    if m & lo != 0 && m & hi == 0 {
        m ^ (lo | hi)
    } else {
        m
    }
}

impl TryFrom<[usize; 2]> for Comparator {
    type Error = Error;

    fn try_from([i, j]: [usize; 2]) -> Result<Self> {
        Comparator::new(i, j)
    }
}

impl From<Comparator> for [usize; 2] {
    fn from(c: Comparator) -> Self {
        [c.i, c.j]
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

fn check_channels(n: usize) -> Result<()> {
    if n == 0 || n > MAX_CHANNELS {
        return Err(invalid_arg(format!(
            "channel count {n} outside 1..={MAX_CHANNELS}"
        )));
    }
    Ok(())
}

fn check_vector(m: BinaryVector, n: usize) -> Result<()> {
    check_channels(n)?;
    if (m as u64) >> n != 0 {
        return Err(invalid_arg(format!("vector {m} does not fit in {n} channels")));
    }
    Ok(())
}

/// Number of binary vectors on `n` channels.
pub fn vector_count(n: usize) -> usize {
    1usize << n
}

/// `c` applied to `m`. Comparators are idempotent.
pub fn apply_comparator(m: BinaryVector, c: Comparator, n: usize) -> Result<BinaryVector> {
    check_vector(m, n)?;
    if c.j > n {
        return Err(Error::InvalidNetwork(format!(
            "comparator {c} out of range for {n} channels"
        )));
    }
    Ok(c.apply(m))
}

/// The sorted version of `m`: its ones moved to the highest channels.
pub fn sorted_value(m: BinaryVector, n: usize) -> Result<BinaryVector> {
    check_vector(m, n)?;
    Ok(sorted_unchecked(m, n))
}

#[inline]
pub(crate) fn sorted_unchecked(m: BinaryVector, n: usize) -> BinaryVector {
    let ones = m.count_ones() as usize;
    if ones == 0 {
        0
    } else {
        (((1u64 << ones) - 1) << (n - ones)) as u32
    }
}

#[inline]
pub(crate) fn is_sorted_vector(m: BinaryVector, n: usize) -> bool {
    sorted_unchecked(m, n) == m
}

/// A comparator network organised in layers of channel-disjoint comparators.
///
/// Size-oriented (sequential) networks use one comparator per layer. Empty
/// networks and empty layers are legal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork")]
pub struct LayeredNetwork {
    n: usize,
    layers: Vec<Vec<Comparator>>,
}

#[derive(Deserialize)]
struct RawNetwork {
    n: usize,
    layers: Vec<Vec<Comparator>>,
}

impl TryFrom<RawNetwork> for LayeredNetwork {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        LayeredNetwork::new(raw.n, raw.layers)
    }
}

impl LayeredNetwork {
    pub fn new(n: usize, layers: Vec<Vec<Comparator>>) -> Result<Self> {
        check_channels(n).map_err(|e| Error::InvalidNetwork(e.to_string()))?;
        for (k, layer) in layers.iter().enumerate() {
            let mut used = 0u32;
            for &c in layer {
                if c.j > n {
                    return Err(Error::InvalidNetwork(format!(
                        "layer {}: comparator {c} out of range for {n} channels",
                        k + 1
                    )));
                }
                let (lo, hi) = c.masks();
                if used & (lo | hi) != 0 {
                    return Err(Error::InvalidNetwork(format!(
                        "layer {}: comparator {c} reuses a channel",
                        k + 1
                    )));
                }
                used |= lo | hi;
            }
        }
        Ok(Self { n, layers })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    /// One comparator per layer, in the given order.
    pub fn sequential(n: usize, comparators: impl IntoIterator<Item = Comparator>) -> Result<Self> {
        Self::new(n, comparators.into_iter().map(|c| vec![c]).collect())
    }

    /// Builds a network from 1-based `(i, j)` pairs, one list per layer.
    pub fn from_pairs(n: usize, layers: &[&[(usize, usize)]]) -> Result<Self> {
        let layers = layers
            .iter()
            .map(|l| l.iter().map(|&(i, j)| Comparator::new(i, j)).collect())
            .collect::<Result<_>>()?;
        Self::new(n, layers)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[Vec<Comparator>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn size(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn comparators(&self) -> impl Iterator<Item = Comparator> + '_ {
        self.layers.iter().flatten().copied()
    }

    /// Drops empty layers.
    pub fn compacted(&self) -> Self {
        Self {
            n: self.n,
            layers: self.layers.iter().filter(|l| !l.is_empty()).cloned().collect(),
        }
    }

    pub fn evaluate(&self, m: BinaryVector) -> Result<BinaryVector> {
        check_vector(m, self.n)?;
        Ok(self.compile().run(m))
    }

    fn compile(&self) -> Compiled {
        Compiled {
            masks: self.comparators().map(Comparator::masks).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("network serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Flattened comparator masks for the exhaustive loops.
struct Compiled {
    masks: Vec<(u32, u32)>,
}

impl Compiled {
    #[inline]
    fn run(&self, mut m: u32) -> u32 {
        for &(lo, hi) in &self.masks {
            m = swap_if_unordered(m, lo, hi);
        }
        m
    }
}

/// Output of `net` on `m`.
pub fn evaluate(net: &LayeredNetwork, m: BinaryVector) -> Result<BinaryVector> {
    net.evaluate(m)
}

/// A subset of `{0, .., 2^n - 1}` stored as an occupancy bitmap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VectorSet {
    n: usize,
    words: Vec<u64>,
}

impl VectorSet {
    pub fn new(n: usize) -> Result<Self> {
        check_channels(n)?;
        Ok(Self {
            n,
            words: vec![0; vector_count(n).div_ceil(64)],
        })
    }

    pub fn from_predicate(n: usize, mut pred: impl FnMut(BinaryVector) -> bool) -> Result<Self> {
        let mut set = Self::new(n)?;
        for m in 0..vector_count(n) as u32 {
            if pred(m) {
                set.insert(m);
            }
        }
        Ok(set)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// # Panics
    /// If `m` has bits above channel `n`.
    pub fn insert(&mut self, m: BinaryVector) -> bool {
        assert!((m as usize) < vector_count(self.n), "vector {m} out of range");
        let (w, b) = (m as usize / 64, m % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    pub fn contains(&self, m: BinaryVector) -> bool {
        (m as usize) < vector_count(self.n) && self.words[m as usize / 64] & (1 << (m % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = BinaryVector> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                Some(w as u32 * 64 + b)
            })
        })
    }
}

impl fmt::Debug for VectorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// `{ net(x) : x in {0,1}^n }`.
pub fn outputs_set(net: &LayeredNetwork) -> VectorSet {
    let compiled = net.compile();
    let mut set = VectorSet::new(net.n).expect("network n already validated");
    for m in 0..vector_count(net.n) as u32 {
        set.insert(compiled.run(m));
    }
    set
}

/// Inputs the network leaves unsorted.
pub fn notsorted_set(net: &LayeredNetwork) -> VectorSet {
    let compiled = net.compile();
    let n = net.n;
    VectorSet::from_predicate(n, |m| compiled.run(m) != sorted_unchecked(m, n))
        .expect("network n already validated")
}

/// A non-negative rational, used for halver approximation factors.
///
/// Only exact `num/den` (or integer) text is accepted; decimal notation is
/// rejected so certification never depends on floating point rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(invalid_arg("ratio denominator must be positive"));
        }
        Ok(Self { num, den })
    }

    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };

    pub fn numerator(self) -> u64 {
        self.num
    }

    pub fn denominator(self) -> u64 {
        self.den
    }

    /// `floor(self * k)`.
    pub fn floor_mul(self, k: u64) -> u64 {
        ((self.num as u128 * k as u128) / self.den as u128) as u64
    }
}

impl FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                Err(invalid_arg(format!(
                    "ratio {s:?} must be written as num/den with non-negative integers"
                )))
            } else {
                t.parse::<u64>().map_err(|e| invalid_arg(e.to_string()))
            }
        };
        match s.split_once('/') {
            Some((a, b)) => Ratio::new(parse(a)?, parse(b)?),
            None => Ratio::new(parse(s)?, 1),
        }
    }
}

impl TryFrom<String> for Ratio {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Ratio> for String {
    fn from(r: Ratio) -> Self {
        r.to_string()
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// The property a network is required to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NetworkClass {
    Sorting,
    /// Sorts every binary input except exactly one.
    SingleException,
    Halver { epsilon: Ratio },
}

impl fmt::Display for NetworkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkClass::Sorting => f.write_str("sorting"),
            NetworkClass::SingleException => f.write_str("single-exception"),
            NetworkClass::Halver { epsilon } => write!(f, "halver({epsilon})"),
        }
    }
}

/// Which half of the output a halver violation was found in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HalfSide {
    /// Too many of the largest `k` inputs ended in channels `1..=n/2`.
    Upper,
    /// Too many of the smallest `k` inputs ended in channels `n/2+1..=n`.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalverViolation {
    pub input: BinaryVector,
    pub output: BinaryVector,
    pub k: usize,
    pub misplaced: usize,
    pub allowed: usize,
    pub side: HalfSide,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    Sorting {
        unsorted_count: usize,
        first_unsorted: Option<BinaryVector>,
    },
    SingleException {
        unsorted_count: usize,
        /// Set exactly when `unsorted_count == 1`.
        exception: Option<BinaryVector>,
    },
    Halver {
        violation: Option<HalverViolation>,
    },
}

impl Evidence {
    pub fn is_clean(&self) -> bool {
        match self {
            Evidence::Sorting { unsorted_count, .. } => *unsorted_count == 0,
            Evidence::SingleException { unsorted_count, .. } => *unsorted_count == 1,
            Evidence::Halver { violation } => violation.is_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificationRecord {
    pub class: NetworkClass,
    pub verdict: bool,
    pub evidence: Evidence,
}

impl CertificationRecord {
    fn from_evidence(class: NetworkClass, evidence: Evidence) -> Self {
        Self {
            class,
            verdict: evidence.is_clean(),
            evidence,
        }
    }
}

/// Checks `net` against `class` over every binary input.
pub fn certify(net: &LayeredNetwork, class: NetworkClass) -> Result<CertificationRecord> {
    let n = net.n;
    let evidence = match class {
        NetworkClass::Sorting | NetworkClass::SingleException => {
            let unsorted = notsorted_set(net);
            let count = unsorted.len();
            if class == NetworkClass::Sorting {
                Evidence::Sorting {
                    unsorted_count: count,
                    first_unsorted: unsorted.iter().next(),
                }
            } else {
                Evidence::SingleException {
                    unsorted_count: count,
                    exception: if count == 1 { unsorted.iter().next() } else { None },
                }
            }
        }
        NetworkClass::Halver { epsilon } => {
            if n % 2 != 0 {
                return Err(invalid_arg(format!("halvers need an even channel count, got {n}")));
            }
            Evidence::Halver {
                violation: first_halver_violation(net, epsilon),
            }
        }
    };
    Ok(CertificationRecord::from_evidence(class, evidence))
}

fn first_halver_violation(net: &LayeredNetwork, epsilon: Ratio) -> Option<HalverViolation> {
    let n = net.n;
    let half = n / 2;
    let upper_mask = (1u32 << half) - 1;
    let compiled = net.compile();
    for input in 0..vector_count(n) as u32 {
        let output = compiled.run(input);
        let ones = input.count_ones() as usize;
        let zeros = n - ones;
        // With k <= n/2 ones, those ones are the k largest inputs.
        if ones <= half {
            let misplaced = (output & upper_mask).count_ones() as usize;
            let allowed = epsilon.floor_mul(ones as u64) as usize;
            if misplaced > allowed {
                return Some(HalverViolation {
                    input,
                    output,
                    k: ones,
                    misplaced,
                    allowed,
                    side: HalfSide::Upper,
                });
            }
        }
        if zeros <= half {
            let misplaced = half - (output >> half).count_ones() as usize;
            let allowed = epsilon.floor_mul(zeros as u64) as usize;
            if misplaced > allowed {
                return Some(HalverViolation {
                    input,
                    output,
                    k: zeros,
                    misplaced,
                    allowed,
                    side: HalfSide::Lower,
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig1() -> LayeredNetwork {
        LayeredNetwork::from_pairs(4, &[&[(1, 2), (3, 4)], &[(1, 3), (2, 4)], &[(2, 3)]]).unwrap()
    }

    fn c(i: usize, j: usize) -> Comparator {
        Comparator::new(i, j).unwrap()
    }

    #[test]
    fn apply_comparator_examples() {
        assert_eq!(apply_comparator(1, c(1, 3), 3).unwrap(), 4);
        assert_eq!(apply_comparator(15, c(2, 4), 4).unwrap(), 15);
        assert_eq!(apply_comparator(2, c(1, 2), 2).unwrap(), 2);
    }

    #[test]
    fn apply_comparator_rejects_bad_arguments() {
        assert!(apply_comparator(8, c(1, 2), 3).is_err());
        assert!(apply_comparator(0, c(1, 4), 3).is_err());
        assert!(Comparator::new(2, 2).is_err());
        assert!(Comparator::new(0, 1).is_err());
        assert!(Comparator::new(3, 1).is_err());
    }

    #[test]
    fn sorted_value_examples() {
        assert_eq!(sorted_value(5, 4).unwrap(), 12);
        assert_eq!(sorted_value(0, 6).unwrap(), 0);
        for n in 1..=10 {
            let all = (1u32 << n) - 1;
            assert_eq!(sorted_value(all, n).unwrap(), all);
        }
        assert!(sorted_value(16, 4).is_err());
    }

    #[test]
    fn evaluate_fig1() {
        let net = fig1();
        assert_eq!(net.evaluate(1).unwrap(), 8);
        assert_eq!(net.evaluate(7).unwrap(), 14);
        assert_eq!(net.evaluate(0).unwrap(), 0);
        assert!(net.evaluate(16).is_err());
    }

    #[test]
    fn outputs_set_examples() {
        let outs: Vec<_> = outputs_set(&fig1()).iter().collect();
        assert_eq!(outs, vec![0, 8, 12, 14, 15]);

        let empty = LayeredNetwork::empty(2).unwrap();
        assert_eq!(outputs_set(&empty).iter().collect::<Vec<_>>(), vec![0, 1, 2, 3]);

        let one = LayeredNetwork::sequential(2, [c(1, 2)]).unwrap();
        let outs = outputs_set(&one);
        assert_eq!(outs.iter().collect::<Vec<_>>(), vec![0, 2, 3]);
        assert_eq!(outs.len(), 3);
    }

    #[test]
    fn notsorted_set_examples() {
        let empty = LayeredNetwork::empty(2).unwrap();
        assert_eq!(notsorted_set(&empty).iter().collect::<Vec<_>>(), vec![1]);
        assert!(notsorted_set(&fig1()).is_empty());
    }

    #[test]
    fn certify_empty_network_is_single_exception() {
        let empty = LayeredNetwork::empty(2).unwrap();
        let rec = certify(&empty, NetworkClass::SingleException).unwrap();
        assert!(rec.verdict);
        assert_eq!(
            rec.evidence,
            Evidence::SingleException {
                unsorted_count: 1,
                exception: Some(1)
            }
        );
        assert!(!certify(&empty, NetworkClass::Sorting).unwrap().verdict);
    }

    #[test]
    fn certify_halver_rejects_odd_channels() {
        let net = LayeredNetwork::empty(3).unwrap();
        let class = NetworkClass::Halver { epsilon: Ratio::ZERO };
        assert!(certify(&net, class).is_err());
    }

    #[test]
    fn certify_halver_reports_first_violation() {
        // A single comparator inside the upper half cannot separate halves.
        let net = LayeredNetwork::sequential(4, [c(1, 2)]).unwrap();
        let rec = certify(&net, NetworkClass::Halver { epsilon: Ratio::ZERO }).unwrap();
        assert!(!rec.verdict);
        let Evidence::Halver { violation: Some(v) } = rec.evidence else {
            panic!("expected a violation");
        };
        // A lone one on channel 1 is moved to channel 2, still in the upper half.
        assert_eq!(v.input, 1);
        assert_eq!(v.output, 2);
        assert_eq!(v.side, HalfSide::Upper);
        assert_eq!((v.k, v.misplaced, v.allowed), (1, 1, 0));
    }

    #[test]
    fn network_validation() {
        assert!(LayeredNetwork::from_pairs(4, &[&[(1, 2), (2, 3)]]).is_err());
        assert!(LayeredNetwork::from_pairs(3, &[&[(1, 4)]]).is_err());
        assert!(LayeredNetwork::empty(0).is_err());
        assert!(LayeredNetwork::empty(MAX_CHANNELS + 1).is_err());
        let with_empty_layer = LayeredNetwork::from_pairs(3, &[&[], &[(1, 2)]]).unwrap();
        assert_eq!(with_empty_layer.depth(), 2);
        assert_eq!(with_empty_layer.compacted().depth(), 1);
    }

    #[test]
    fn json_schema() {
        let net = fig1();
        let text = net.to_json();
        assert_eq!(text, r#"{"n":4,"layers":[[[1,2],[3,4]],[[1,3],[2,4]],[[2,3]]]}"#);
        assert_eq!(LayeredNetwork::from_json(&text).unwrap(), net);
        assert!(LayeredNetwork::from_json(r#"{"n":3,"layers":[[[1,2],[2,3]]]}"#).is_err());
        assert!(LayeredNetwork::from_json(r#"{"n":3,"layers":[[[2,1]]]}"#).is_err());
    }

    #[test]
    fn ratio_parsing() {
        let r: Ratio = "1/4".parse().unwrap();
        assert_eq!((r.numerator(), r.denominator()), (1, 4));
        assert_eq!(r.floor_mul(7), 1);
        assert_eq!(r.floor_mul(8), 2);
        assert_eq!("3".parse::<Ratio>().unwrap(), Ratio::new(3, 1).unwrap());
        assert!("0.25".parse::<Ratio>().is_err());
        assert!("1/0".parse::<Ratio>().is_err());
        assert!("-1/4".parse::<Ratio>().is_err());
        assert!("".parse::<Ratio>().is_err());
    }

    fn arb_network() -> impl Strategy<Value = LayeredNetwork> {
        (2usize..=7).prop_flat_map(|n| {
            let pair = (1..n).prop_flat_map(move |i| (Just(i), i + 1..=n));
            proptest::collection::vec(pair, 0..12).prop_map(move |pairs| {
                LayeredNetwork::sequential(n, pairs.into_iter().map(|(i, j)| Comparator::new(i, j).unwrap()))
                    .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn comparator_is_idempotent(n in 2usize..=10, m in any::<u32>(), a in any::<usize>(), b in any::<usize>()) {
            let m = m & ((1 << n) - 1);
            let i = 1 + a % (n - 1);
            let j = i + 1 + b % (n - i);
            let c = Comparator::new(i, j).unwrap();
            let once = apply_comparator(m, c, n).unwrap();
            prop_assert_eq!(apply_comparator(once, c, n).unwrap(), once);
        }

        #[test]
        fn sorted_value_idempotent_and_popcount_preserving(n in 1usize..=16, m in any::<u32>()) {
            let m = m & ((1 << n) - 1);
            let s = sorted_value(m, n).unwrap();
            prop_assert_eq!(s.count_ones(), m.count_ones());
            prop_assert_eq!(sorted_value(s, n).unwrap(), s);
        }

        #[test]
        fn evaluation_preserves_popcount_and_is_monotone(net in arb_network(), a in any::<u32>(), b in any::<u32>()) {
            let mask = (1u32 << net.n()) - 1;
            let (a, b) = (a & mask, b & mask);
            let lo = a & b;
            let (out_lo, out_a) = (net.evaluate(lo).unwrap(), net.evaluate(a).unwrap());
            prop_assert_eq!(out_a.count_ones(), a.count_ones());
            prop_assert_eq!(out_lo & !out_a, 0, "monotonicity violated");
        }

        #[test]
        fn sorting_criteria_agree(net in arb_network()) {
            let n = net.n();
            let outs = outputs_set(&net);
            let by_notsorted = notsorted_set(&net).is_empty();
            let by_fixed_points = outs.iter().all(|m| sorted_value(m, n).unwrap() == m);
            let by_cardinality = outs.len() == n + 1;
            prop_assert!(outs.len() > n);
            prop_assert_eq!(by_notsorted, by_fixed_points);
            prop_assert_eq!(by_notsorted, by_cardinality);
        }

        #[test]
        fn sorting_and_single_exception_are_exclusive(net in arb_network()) {
            let sorting = certify(&net, NetworkClass::Sorting).unwrap().verdict;
            let single = certify(&net, NetworkClass::SingleException).unwrap().verdict;
            prop_assert!(!(sorting && single));
        }

        #[test]
        fn perfect_halver_routes_all_ones_low(net in arb_network().prop_filter("even", |n| n.n() % 2 == 0)) {
            let n = net.n();
            let half = n / 2;
            let perfect = certify(&net, NetworkClass::Halver { epsilon: Ratio::ZERO }).unwrap().verdict;
            let direct = (0..1u32 << n).all(|m| {
                let out = net.evaluate(m).unwrap();
                let p = m.count_ones() as usize;
                (p > half || out & ((1 << half) - 1) == 0)
                    && (n - p > half || out >> half == (1 << half) - 1)
            });
            prop_assert_eq!(perfect, direct);
        }
    }
}
