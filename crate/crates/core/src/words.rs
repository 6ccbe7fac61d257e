//! Finite words over `{0, .., p-1}`, the shift metric, edit distance, and
//! edit-ball censuses with growth-constant fitting.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::shifts::ShiftSpace;
use crate::Result;

/// Alphabet symbol. Alphabets up to 65536 symbols are supported.
pub type Symbol = u16;

/// A finite word over the alphabet.
///
/// Ordering is lexicographic with prefixes first, which matches the
/// enumeration order used throughout.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn pop(&mut self) {
        self.0.pop();
    }

    /// Concatenation `self . other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl From<&[Symbol]> for Word {
    fn from(s: &[Symbol]) -> Self {
        Word(s.to_vec())
    }
}

impl std::ops::Index<usize> for Word {
    type Output = Symbol;
    fn index(&self, i: usize) -> &Symbol {
        &self.0[i]
    }
}

impl fmt::Display for Word {
    /// Compact digit string when every symbol is a single digit, else a
    /// comma-separated list.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 10) {
            for &s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            write!(f, "[{}]", parts.join(","))
        }
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses a compact digit string (alphabets with p <= 10).
    fn from_str(s: &str) -> Result<Self> {
        let mut v = Vec::with_capacity(s.len());
        for c in s.chars() {
            let d = c
                .to_digit(10)
                .ok_or_else(|| Error::InvalidInput(format!("bad word character {c:?}")))?;
            v.push(d as Symbol);
        }
        Ok(Word(v))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

impl<'de> Deserialize<'de> for Word {
    /// Accepts either a JSON array of integers or a compact digit string.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct WordVisitor;

        impl<'de> Visitor<'de> for WordVisitor {
            type Value = Word;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of symbols or a digit string")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Word, A::Error> {
                let mut v = Vec::new();
                while let Some(s) = seq.next_element::<Symbol>()? {
                    v.push(s);
                }
                Ok(Word(v))
            }

            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<Word, E> {
                Word::from_str(s).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(WordVisitor)
    }
}

/// Length of the longest common prefix of two symbol slices.
pub fn common_prefix_length(u: &[Symbol], v: &[Symbol]) -> usize {
    u.iter().zip(v.iter()).take_while(|(a, b)| a == b).count()
}

/// Shift metric between two finite words: `e^{-common_prefix_length}`.
///
/// For identical finite words this is `e^{-len}` (they agree as far as they
/// are defined); the exact value 0 is reserved for streams declared equal,
/// see [`shift_metric_pair`].
pub fn shift_metric(u: &[Symbol], v: &[Symbol]) -> f64 {
    (-(common_prefix_length(u, v) as f64)).exp()
}

/// A pair of symbol streams compared by the shift metric.
pub enum StreamPair<'a> {
    /// Two streams known only through finite prefixes.
    Prefixes(&'a [Symbol], &'a [Symbol]),
    /// One stream compared with itself; the distance is exactly 0.
    DeclaredEqual,
}

/// Shift metric on streams; exactly 0 only for declared-equal streams.
pub fn shift_metric_pair(pair: StreamPair<'_>) -> f64 {
    match pair {
        StreamPair::DeclaredEqual => 0.0,
        StreamPair::Prefixes(u, v) => shift_metric(u, v),
    }
}

/// Levenshtein edit distance (substitution, insertion, deletion, all cost 1).
pub fn edit_distance(v: &[Symbol], w: &[Symbol]) -> usize {
    if v.is_empty() {
        return w.len();
    }
    if w.is_empty() {
        return v.len();
    }
    // Single-row DP over w, scanning v.
    let mut row: Vec<usize> = (0..=w.len()).collect();
    for (i, &vs) in v.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &ws) in w.iter().enumerate() {
            let cost = usize::from(vs != ws);
            let next = (diag + cost).min(row[j] + 1).min(row[j + 1] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[w.len()]
}

/// Census of an edit ball inside a shift language.
#[derive(Debug, Clone, Serialize)]
pub struct EditBallCensus {
    /// Center word `w`.
    pub center: Word,
    /// Radius as a fraction of `|w|`.
    pub radius_fraction: f64,
    /// Integer radius `floor(radius_fraction * |w|)`.
    pub radius: usize,
    /// Number of admissible words `v` with `edit_distance(v, w) <= radius`.
    pub count: u64,
    /// Smallest `C` with `count <= C n^C (e^{C d} e^{-d log d})^n`
    /// for `n = |w|`, `d = radius_fraction`.
    pub bound_constant: f64,
}

/// Integer radius for a fractional-radius ball; a tiny epsilon absorbs
/// binary rounding of products like `0.1 * 12`.
pub fn ball_radius(n: usize, delta: f64) -> usize {
    (delta * n as f64 + 1e-9).floor() as usize
}

/// Counts admissible words within fractional edit radius `delta` of
/// `center`, by depth-first enumeration of the language tree with capped
/// distance rows (branches whose minimal row entry exceeds the radius are
/// pruned). `node_budget` bounds the number of visited tree nodes.
pub fn edit_ball_count(
    space: &ShiftSpace,
    center: &Word,
    delta: f64,
    node_budget: u64,
) -> Result<EditBallCensus> {
    let n = center.len();
    if n == 0 {
        return Err(Error::InvalidInput("edit ball needs a nonempty center".into()));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidInput(format!("radius fraction {delta} outside [0, 1]")));
    }
    if !space.is_admissible(center.symbols())? {
        return Err(Error::InvalidInput(format!("center {center} is not admissible")));
    }
    let r = ball_radius(n, delta);
    let max_len = n + r;
    let w = center.symbols();

    // Row i holds capped distances d(prefix, w[..j]) for j = 0..=n.
    let cap = r + 1;
    let root: Vec<usize> = (0..=n).map(|j| j.min(cap)).collect();

    let mut visited: u64 = 0;
    let mut count: u64 = 0;
    if root[n] <= r {
        count += 1; // the empty word
    }

    // Explicit stack: (cursor, depth, row).
    let mut stack = vec![(space.root_cursor(), 0usize, root)];
    while let Some((cursor, depth, row)) = stack.pop() {
        if depth >= max_len {
            continue;
        }
        for a in 0..space.alphabet() {
            let a = a as Symbol;
            let Some(next) = space.step(&cursor, a) else {
                continue;
            };
            visited += 1;
            if visited > node_budget {
                return Err(Error::BudgetExceeded(format!(
                    "edit ball enumeration for {center} passed {node_budget} nodes"
                )));
            }
            let mut next_row = vec![0usize; n + 1];
            next_row[0] = (row[0] + 1).min(cap);
            let mut row_min = next_row[0];
            for j in 1..=n {
                let cost = usize::from(w[j - 1] != a);
                let e = (row[j] + 1).min(next_row[j - 1] + 1).min(row[j - 1] + cost).min(cap);
                next_row[j] = e;
                row_min = row_min.min(e);
            }
            if next_row[n] <= r {
                count += 1;
            }
            // Row minima never decrease along a branch; prune when over.
            if row_min <= r {
                stack.push((next, depth + 1, next_row));
            }
        }
    }

    Ok(EditBallCensus {
        center: center.clone(),
        radius_fraction: delta,
        radius: r,
        count,
        bound_constant: fit_bound_constant(n, delta, count),
    })
}

/// Edit-ball count over the full `p`-shift (every word admissible) via a
/// deterministic automaton on capped distance rows. Exact, and much faster
/// than enumeration: words mapping to the same row are counted in bulk.
///
/// Requires the row to fit one `u64` (about `(n+1) * ceil(log2(r+2))` bits);
/// larger inputs should use [`edit_ball_count`].
pub fn edit_ball_count_full_shift(p: u32, center: &Word, delta: f64) -> Result<u64> {
    let n = center.len();
    if n == 0 {
        return Err(Error::InvalidInput("edit ball needs a nonempty center".into()));
    }
    let r = ball_radius(n, delta);
    let cap = (r + 1) as u64;
    let bits = 64 - (cap + 1).leading_zeros() as u64;
    if ((n as u64) + 1) * bits > 64 {
        return Err(Error::BudgetExceeded(format!(
            "row state for n={n}, r={r} does not fit the packed automaton"
        )));
    }
    let mask = (1u64 << bits) - 1;
    let w = center.symbols();

    let pack = |row: &[u64]| -> u64 {
        let mut s = 0u64;
        for (j, &e) in row.iter().enumerate() {
            s |= e << (bits * j as u64);
        }
        s
    };
    let entry = |state: u64, j: usize| -> u64 { (state >> (bits * j as u64)) & mask };

    let root: Vec<u64> = (0..=n).map(|j| (j as u64).min(cap)).collect();
    let mut frontier: std::collections::HashMap<u64, u64> = std::collections::HashMap::new();
    frontier.insert(pack(&root), 1);

    let mut count: u64 = 0;
    if root[n] <= r as u64 {
        count += 1;
    }
    let mut next_frontier: std::collections::HashMap<u64, u64> = std::collections::HashMap::new();
    for _depth in 0..(n + r) {
        next_frontier.clear();
        for (&state, &ways) in &frontier {
            for a in 0..p {
                let a = a as Symbol;
                let mut prev = (entry(state, 0) + 1).min(cap);
                let mut packed = prev;
                let mut row_min = prev;
                let mut accept = prev;
                for j in 1..=n {
                    let cost = u64::from(w[j - 1] != a);
                    let e = (entry(state, j) + 1)
                        .min(prev + 1)
                        .min(entry(state, j - 1) + cost)
                        .min(cap);
                    packed |= e << (bits * j as u64);
                    row_min = row_min.min(e);
                    prev = e;
                    accept = e;
                }
                if accept <= r as u64 {
                    count = count.checked_add(ways).ok_or_else(|| {
                        Error::BudgetExceeded("edit ball count overflowed u64".into())
                    })?;
                }
                if row_min <= r as u64 {
                    *next_frontier.entry(packed).or_insert(0) += ways;
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next_frontier);
        if frontier.is_empty() {
            break;
        }
    }
    Ok(count)
}

/// Smallest `C > 0` with `count <= C n^C (e^{C d} e^{-d log d})^n`,
/// with the continuous extension `d log d = 0` at `d = 0`.
pub fn fit_bound_constant(n: usize, delta: f64, count: u64) -> f64 {
    if count == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let dlogd = if delta > 0.0 { delta * delta.ln() } else { 0.0 };
    // Need ln C + C (ln n + delta n) >= ln count + n d ln d; the left side
    // is strictly increasing in C.
    let target = (count as f64).ln() + nf * dlogd;
    let lhs = |c: f64| c.ln() + c * (nf.ln() + delta * nf);
    let mut lo = 1e-12;
    let mut hi = 1.0;
    while lhs(hi) < target {
        hi *= 2.0;
        if hi > 1e9 {
            return hi;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lhs(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shifts::ShiftSpace;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn common_prefix_and_metric() {
        let u = w("0110");
        let v = w("0111");
        assert_eq!(common_prefix_length(u.symbols(), v.symbols()), 3);
        assert!((shift_metric(u.symbols(), v.symbols()) - (-3.0f64).exp()).abs() < 1e-15);
        assert_eq!(shift_metric_pair(StreamPair::DeclaredEqual), 0.0);
        // disagree at the first symbol: e^0 = 1
        assert_eq!(shift_metric(w("1").symbols(), w("0").symbols()), 1.0);
    }

    #[test]
    fn edit_distance_known_cases() {
        assert_eq!(edit_distance(w("0101").symbols(), w("101").symbols()), 1);
        assert_eq!(edit_distance(w("00").symbols(), w("11").symbols()), 2);
        assert_eq!(edit_distance(&[], w("111").symbols()), 3);
        assert_eq!(edit_distance(w("0110").symbols(), w("0110").symbols()), 0);
    }

    #[test]
    fn edit_ball_full_shift_examples() {
        let space = ShiftSpace::full(2).unwrap();
        let c = edit_ball_count(&space, &w("00"), 0.0, 1 << 20).unwrap();
        assert_eq!(c.count, 1);
        let c = edit_ball_count(&space, &w("00"), 0.5, 1 << 20).unwrap();
        // {00, 10, 01, 0, 000, 100, 010, 001}
        assert_eq!(c.count, 8);
        assert!(c.bound_constant <= 10.0);
    }

    #[test]
    fn edit_ball_respects_admissibility() {
        // Golden-mean shift: no factor 11. The radius-1 ball around 00 keeps
        // all eight members of the full-shift ball because none contains 11;
        // the brute-force oracle in the integration tests freezes this too.
        let space = ShiftSpace::forbidden(2, &[w("11")]).unwrap();
        let c = edit_ball_count(&space, &w("00"), 0.5, 1 << 20).unwrap();
        assert_eq!(c.count, 8);
        // Around 01 the full-shift ball has 8 members but 011 and 11 drop.
        let full = ShiftSpace::full(2).unwrap();
        let cf = edit_ball_count(&full, &w("01"), 0.5, 1 << 20).unwrap();
        let cg = edit_ball_count(&space, &w("01"), 0.5, 1 << 20).unwrap();
        assert!(cg.count < cf.count);
    }

    #[test]
    fn packed_automaton_matches_enumeration() {
        let space = ShiftSpace::full(2).unwrap();
        for s in ["00", "01", "0110", "10101", "111000"] {
            let cw = w(s);
            for delta in [0.1, 0.25, 0.5] {
                let slow = edit_ball_count(&space, &cw, delta, 1 << 24).unwrap().count;
                let fast = edit_ball_count_full_shift(2, &cw, delta).unwrap();
                assert_eq!(slow, fast, "center {s} delta {delta}");
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let space = ShiftSpace::full(2).unwrap();
        let err = edit_ball_count(&space, &w("10101010"), 0.5, 10).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded(_)));
    }

    #[test]
    fn bound_constant_is_minimal() {
        let c = fit_bound_constant(4, 0.25, 17);
        let nf = 4.0f64;
        let lhs = c.ln() + c * (nf.ln() + 0.25 * nf);
        let target = 17f64.ln() + nf * 0.25 * 0.25f64.ln();
        assert!(lhs >= target - 1e-9);
        let c_smaller = 0.99 * c;
        assert!(c_smaller.ln() + c_smaller * (nf.ln() + 0.25 * nf) < target);
    }

    #[test]
    fn word_display_parse_serde_roundtrip() {
        let word = w("0110");
        assert_eq!(word.to_string(), "0110");
        let js = serde_json::to_string(&word).unwrap();
        assert_eq!(js, "[0,1,1,0]");
        let back: Word = serde_json::from_str(&js).unwrap();
        assert_eq!(back, word);
        let from_str: Word = serde_json::from_str("\"0110\"").unwrap();
        assert_eq!(from_str, word);
    }

    proptest! {
        #[test]
        fn edit_distance_is_a_metric(
            a in proptest::collection::vec(0u16..2, 0..12),
            b in proptest::collection::vec(0u16..2, 0..12),
            c in proptest::collection::vec(0u16..2, 0..12),
        ) {
            let dab = edit_distance(&a, &b);
            let dba = edit_distance(&b, &a);
            prop_assert_eq!(dab, dba);
            prop_assert_eq!(dab == 0, a == b);
            let dac = edit_distance(&a, &c);
            let dcb = edit_distance(&c, &b);
            prop_assert!(dab <= dac + dcb);
        }

        #[test]
        fn edit_distance_length_bounds(
            a in proptest::collection::vec(0u16..3, 0..14),
            b in proptest::collection::vec(0u16..3, 0..14),
        ) {
            let d = edit_distance(&a, &b);
            let lo = a.len().abs_diff(b.len());
            let hi = a.len().max(b.len());
            prop_assert!(d >= lo);
            prop_assert!(d <= hi);
        }
    }
}
