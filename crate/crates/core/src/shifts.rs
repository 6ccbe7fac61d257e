//! Shift spaces over `{0, .., p-1}`: full shifts, beta-shifts, S-gap shifts,
//! and forbidden-word shifts.
//!
//! Every kind exposes the same follower-automaton interface (a `Cursor` that
//! is stepped symbol by symbol and dies on inadmissibility), which drives
//! admissibility checks, lexicographic enumeration, and transfer-structure
//! counting without materializing the language.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::beta::BetaExpansion;
use crate::error::Error;
use crate::words::{Symbol, Word};
use crate::Result;

/// Gap-set tail for S-gap shifts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GapTail {
    /// All integers `>= m`.
    From { m: u64 },
    /// The arithmetic progression `a + k d`, `k >= 0`.
    Arith { a: u64, d: u64 },
}

/// Set of allowed interior 0-run lengths for an S-gap shift: an explicit
/// finite part plus an optional infinite tail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SGapSet {
    pub explicit: BTreeSet<u64>,
    pub tail: Option<GapTail>,
}

impl SGapSet {
    pub fn new(explicit: impl IntoIterator<Item = u64>, tail: Option<GapTail>) -> Result<Self> {
        if let Some(GapTail::Arith { d, .. }) = &tail {
            if *d == 0 {
                return Err(Error::InvalidInput("arithmetic gap tail needs d >= 1".into()));
            }
        }
        let set = SGapSet { explicit: explicit.into_iter().collect(), tail };
        if set.is_empty() {
            return Err(Error::InvalidInput("empty gap set".into()));
        }
        Ok(set)
    }

    pub fn contains(&self, g: u64) -> bool {
        if self.explicit.contains(&g) {
            return true;
        }
        match &self.tail {
            Some(GapTail::From { m }) => g >= *m,
            Some(GapTail::Arith { a, d }) => g >= *a && (g - a).is_multiple_of(*d),
            None => false,
        }
    }

    /// Finite gap sets fall outside the usual standing assumptions and are
    /// flagged in reports.
    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    pub fn is_empty(&self) -> bool {
        self.explicit.is_empty() && self.tail.is_none()
    }
}

/// Beta-shift follower automaton over the quasi-greedy expansion digits.
///
/// State `j` = length of the longest suffix of the input that is a prefix of
/// the expansion. Reading `a` from state `j`: match extends to `j+1`,
/// `a` above the expansion digit is inadmissible, below falls back through
/// the failure chain. Valid quasi-greedy words (every suffix of the digit
/// stream is lexicographically at most the stream) make the longest-match
/// check sufficient.
#[derive(Debug, Clone)]
struct BetaAutomaton {
    /// rows[j][a]: next state, or `REJECT`.
    rows: Vec<Vec<u32>>,
}

const REJECT: u32 = u32::MAX;

impl BetaAutomaton {
    fn build(expansion: &BetaExpansion, len: usize) -> Result<Self> {
        let p = expansion.alphabet() as usize;
        let digits = expansion.prefix(len)?;
        // Quasi-greedy validity: suffixes never exceed the stream. Checked
        // here because the rejection logic depends on it.
        let check = len.min(256);
        for j in 1..check {
            let m = check - j;
            if digits[j..j + m] > digits[..m] {
                return Err(Error::InvalidInput(
                    "expansion digits are not quasi-greedy (suffix exceeds the stream)".into(),
                ));
            }
        }

        // KMP prefix function over the digit stream.
        let mut pi = vec![0usize; len];
        for i in 1..len {
            let mut k = pi[i - 1];
            while k > 0 && digits[i] != digits[k] {
                k = pi[k - 1];
            }
            if digits[i] == digits[k] {
                k += 1;
            }
            pi[i] = k;
        }

        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(len);
        for j in 0..len {
            let mut row = vec![REJECT; p];
            let d = digits[j];
            for (a, slot) in row.iter_mut().enumerate() {
                let a = a as Symbol;
                *slot = if a == d {
                    (j + 1) as u32
                } else if a > d {
                    REJECT
                } else if j == 0 {
                    0
                } else {
                    rows[pi[j - 1]][a as usize]
                };
            }
            rows.push(row);
        }
        Ok(BetaAutomaton { rows })
    }

    fn capacity(&self) -> usize {
        self.rows.len()
    }
}

/// Aho-Corasick automaton over the forbidden word set; matching any
/// forbidden factor is a dead end.
#[derive(Debug, Clone)]
struct ForbiddenAutomaton {
    /// goto[state][a]: next state, or `REJECT` when a forbidden word ends.
    goto: Vec<Vec<u32>>,
}

impl ForbiddenAutomaton {
    fn build(p: usize, words: &[Word]) -> Result<Self> {
        for w in words {
            if w.is_empty() {
                return Err(Error::InvalidInput("empty forbidden word".into()));
            }
            if w.symbols().iter().any(|&s| s as usize >= p) {
                return Err(Error::InvalidInput(format!(
                    "forbidden word {w} uses symbols outside the alphabet"
                )));
            }
        }
        // Trie.
        let mut children: Vec<Vec<Option<u32>>> = vec![vec![None; p]];
        let mut terminal = vec![false];
        for w in words {
            let mut node = 0usize;
            for &s in w.symbols() {
                let slot = children[node][s as usize];
                node = match slot {
                    Some(c) => c as usize,
                    None => {
                        children.push(vec![None; p]);
                        terminal.push(false);
                        let c = (children.len() - 1) as u32;
                        children[node][s as usize] = Some(c);
                        c as usize
                    }
                };
            }
            terminal[node] = true;
        }
        // BFS failure links; terminal-through-fail propagates.
        let n = children.len();
        let mut fail = vec![0u32; n];
        let mut goto = vec![vec![0u32; p]; n];
        let mut queue = std::collections::VecDeque::new();
        for a in 0..p {
            if let Some(c) = children[0][a] {
                queue.push_back(c);
                goto[0][a] = c;
            }
        }
        while let Some(u) = queue.pop_front() {
            let u = u as usize;
            if terminal[fail[u] as usize] {
                terminal[u] = true;
            }
            for a in 0..p {
                match children[u][a] {
                    Some(c) => {
                        fail[c as usize] = goto[fail[u] as usize][a];
                        queue.push_back(c);
                        goto[u][a] = c;
                    }
                    None => goto[u][a] = goto[fail[u] as usize][a],
                }
            }
        }
        // Seal matches as rejects.
        if terminal[0] {
            return Err(Error::InvalidInput("forbidden set rejects every word".into()));
        }
        for row in goto.iter_mut() {
            for slot in row.iter_mut() {
                if terminal[*slot as usize] {
                    *slot = REJECT;
                }
            }
        }
        Ok(ForbiddenAutomaton { goto })
    }
}

/// Which family of shift space.
#[derive(Debug, Clone)]
pub enum ShiftKind {
    Full,
    Beta(BetaExpansion),
    SGap(SGapSet),
    Forbidden(Vec<Word>),
}

/// A one-sided shift space with a walkable language.
#[derive(Debug, Clone)]
pub struct ShiftSpace {
    p: u32,
    kind: ShiftKind,
    beta_auto: Option<BetaAutomaton>,
    forb_auto: Option<ForbiddenAutomaton>,
    desc: String,
}

/// Follower-automaton position while reading a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cursor {
    Full,
    Beta(u32),
    /// Leading zeros only (no 1 read yet).
    SGapLeading,
    /// Zero-run length since the last 1.
    SGapAfterOne(u64),
    Forbidden(u32),
}

impl ShiftSpace {
    /// Full shift on `p` symbols.
    pub fn full(p: u32) -> Result<Self> {
        check_alphabet(p)?;
        Ok(ShiftSpace {
            p,
            kind: ShiftKind::Full,
            beta_auto: None,
            forb_auto: None,
            desc: format!("full({p})"),
        })
    }

    /// Beta-shift from a computed expansion.
    pub fn beta(expansion: BetaExpansion) -> Result<Self> {
        let p = expansion.alphabet();
        check_alphabet(p)?;
        let auto = BetaAutomaton::build(&expansion, expansion.horizon())?;
        Ok(ShiftSpace {
            p,
            desc: format!("beta({:.12}, horizon {})", expansion.beta_f64(), expansion.horizon()),
            kind: ShiftKind::Beta(expansion),
            beta_auto: Some(auto),
            forb_auto: None,
        })
    }

    /// Beta-shift from a beta description string; `horizon` bounds the word
    /// lengths the space can decide.
    pub fn beta_from_str(beta: &str, horizon: usize) -> Result<Self> {
        let b = crate::beta::parse_beta(beta)?;
        Self::beta(BetaExpansion::compute(b, horizon)?)
    }

    /// S-gap shift: binary words whose interior 0-runs (between consecutive
    /// 1s) have lengths in the gap set. Boundary runs are unconstrained.
    pub fn sgap(gaps: SGapSet) -> Result<Self> {
        let desc = format!(
            "sgap({:?}{})",
            gaps.explicit.iter().collect::<Vec<_>>(),
            match &gaps.tail {
                Some(GapTail::From { m }) => format!(", from {m}"),
                Some(GapTail::Arith { a, d }) => format!(", {a}+k*{d}"),
                None => ", finite".into(),
            }
        );
        Ok(ShiftSpace {
            p: 2,
            kind: ShiftKind::SGap(gaps),
            beta_auto: None,
            forb_auto: None,
            desc,
        })
    }

    /// Subshift of the full `p`-shift avoiding every listed factor.
    pub fn forbidden(p: u32, words: &[Word]) -> Result<Self> {
        check_alphabet(p)?;
        let auto = ForbiddenAutomaton::build(p as usize, words)?;
        let list: Vec<String> = words.iter().map(|w| w.to_string()).collect();
        Ok(ShiftSpace {
            p,
            kind: ShiftKind::Forbidden(words.to_vec()),
            beta_auto: None,
            forb_auto: Some(auto),
            desc: format!("forbidden({p}; {})", list.join(",")),
        })
    }

    pub fn alphabet(&self) -> u32 {
        self.p
    }

    pub fn kind(&self) -> &ShiftKind {
        &self.kind
    }

    pub fn description(&self) -> &str {
        &self.desc
    }

    /// Longest word length this space can decide (beta horizons are finite).
    pub fn decidable_length(&self) -> usize {
        match &self.kind {
            ShiftKind::Beta(_) => self.beta_auto.as_ref().unwrap().capacity(),
            _ => usize::MAX,
        }
    }

    pub fn root_cursor(&self) -> Cursor {
        match &self.kind {
            ShiftKind::Full => Cursor::Full,
            ShiftKind::Beta(_) => Cursor::Beta(0),
            ShiftKind::SGap(_) => Cursor::SGapLeading,
            ShiftKind::Forbidden(_) => Cursor::Forbidden(0),
        }
    }

    /// Advance the cursor by one symbol; `None` when the extension leaves
    /// the language. Beta cursors at the automaton horizon panic in debug
    /// builds; length guards live in the callers.
    pub fn step(&self, cursor: &Cursor, a: Symbol) -> Option<Cursor> {
        if a as u32 >= self.p {
            return None;
        }
        match (cursor, &self.kind) {
            (Cursor::Full, ShiftKind::Full) => Some(Cursor::Full),
            (Cursor::Beta(j), ShiftKind::Beta(_)) => {
                let auto = self.beta_auto.as_ref().unwrap();
                let next = auto.rows[*j as usize][a as usize];
                (next != REJECT).then_some(Cursor::Beta(next))
            }
            (Cursor::SGapLeading, ShiftKind::SGap(_)) => {
                Some(if a == 0 { Cursor::SGapLeading } else { Cursor::SGapAfterOne(0) })
            }
            (Cursor::SGapAfterOne(g), ShiftKind::SGap(s)) => {
                if a == 0 {
                    Some(Cursor::SGapAfterOne(g + 1))
                } else {
                    s.contains(*g).then_some(Cursor::SGapAfterOne(0))
                }
            }
            (Cursor::Forbidden(u), ShiftKind::Forbidden(_)) => {
                let auto = self.forb_auto.as_ref().unwrap();
                let next = auto.goto[*u as usize][a as usize];
                (next != REJECT).then_some(Cursor::Forbidden(next))
            }
            _ => unreachable!("cursor does not belong to this space"),
        }
    }

    fn check_length(&self, n: usize, what: &str) -> Result<()> {
        let cap = self.decidable_length();
        if n > cap {
            return Err(Error::PrecisionExhausted(format!(
                "{what} of length {n} exceeds the decidable horizon {cap}"
            )));
        }
        Ok(())
    }

    /// Whether `w` is in the language.
    pub fn is_admissible(&self, w: &[Symbol]) -> Result<bool> {
        self.check_length(w.len(), "word")?;
        let mut c = self.root_cursor();
        for &a in w {
            match self.step(&c, a) {
                Some(next) => c = next,
                None => return Ok(false),
            }
        }
        Ok(true)
    }

    /// Walk a cursor across `w`, returning the final cursor if admissible.
    pub fn walk(&self, from: Cursor, w: &[Symbol]) -> Option<Cursor> {
        let mut c = from;
        for &a in w {
            c = self.step(&c, a)?;
        }
        Some(c)
    }

    /// Visit every length-`n` word in lexicographic order.
    pub fn for_each_word(&self, n: usize, visit: &mut dyn FnMut(&[Symbol])) -> Result<()> {
        self.check_length(n, "enumeration")?;
        let mut prefix: Vec<Symbol> = Vec::with_capacity(n);
        self.dfs(self.root_cursor(), n, &mut prefix, visit);
        Ok(())
    }

    fn dfs(
        &self,
        cursor: Cursor,
        n: usize,
        prefix: &mut Vec<Symbol>,
        visit: &mut dyn FnMut(&[Symbol]),
    ) {
        if prefix.len() == n {
            visit(prefix);
            return;
        }
        for a in 0..self.p {
            let a = a as Symbol;
            if let Some(next) = self.step(&cursor, a) {
                prefix.push(a);
                self.dfs(next, n, prefix, visit);
                prefix.pop();
            }
        }
    }

    /// Length-`n` slice of the language, lexicographic; errors if more than
    /// `budget` words would be produced.
    pub fn enumerate_words(&self, n: usize, budget: u64) -> Result<Vec<Word>> {
        let total = self.count_words(n)?;
        if total > budget as u128 {
            return Err(Error::BudgetExceeded(format!(
                "level {n} holds {total} words, over the budget {budget}"
            )));
        }
        let mut out = Vec::with_capacity(total as usize);
        self.for_each_word(n, &mut |w| out.push(Word::new(w.to_vec())))?;
        Ok(out)
    }

    /// `#L_n` via the kind's transfer structure (no enumeration).
    pub fn count_words(&self, n: usize) -> Result<u128> {
        self.check_length(n, "count")?;
        let overflow = || Error::BudgetExceeded(format!("word count at level {n} overflowed"));
        match &self.kind {
            ShiftKind::Full => {
                let mut total: u128 = 1;
                for _ in 0..n {
                    total = total.checked_mul(self.p as u128).ok_or_else(overflow)?;
                }
                Ok(total)
            }
            ShiftKind::Beta(_) => {
                let auto = self.beta_auto.as_ref().unwrap();
                // counts[j] = words ending in automaton state j.
                let mut counts = vec![0u128; n + 1];
                counts[0] = 1;
                for _step in 0..n {
                    let mut next = vec![0u128; n + 1];
                    for (j, &c) in counts.iter().enumerate() {
                        if c == 0 {
                            continue;
                        }
                        for &t in &auto.rows[j] {
                            if t != REJECT {
                                let slot = &mut next[t as usize];
                                *slot = slot.checked_add(c).ok_or_else(overflow)?;
                            }
                        }
                    }
                    counts = next;
                }
                Ok(counts.iter().sum())
            }
            ShiftKind::SGap(s) => {
                // The all-zero prefix contributes 1 at every length; after[g]
                // counts words whose 0-run since the last 1 has length g.
                let mut after = vec![0u128; n + 1];
                for step in 0..n {
                    let mut next_after = vec![0u128; n + 1];
                    // Append 1: from the all-zero prefix, or across an
                    // allowed gap.
                    let mut to_one: u128 = 1;
                    for (g, &c) in after.iter().enumerate().take(step + 1) {
                        if c != 0 && s.contains(g as u64) {
                            to_one = to_one.checked_add(c).ok_or_else(overflow)?;
                        }
                    }
                    next_after[0] = to_one;
                    // Append 0: runs shift up by one.
                    for (g, &c) in after.iter().enumerate().take(step + 1) {
                        next_after[g + 1] = c;
                    }
                    after = next_after;
                }
                let sum: u128 = after.iter().sum();
                sum.checked_add(1).ok_or_else(overflow)
            }
            ShiftKind::Forbidden(_) => {
                let auto = self.forb_auto.as_ref().unwrap();
                let m = auto.goto.len();
                let mut counts = vec![0u128; m];
                counts[0] = 1;
                for _ in 0..n {
                    let mut next = vec![0u128; m];
                    for (u, &c) in counts.iter().enumerate() {
                        if c == 0 {
                            continue;
                        }
                        for &t in &auto.goto[u] {
                            if t != REJECT {
                                let slot = &mut next[t as usize];
                                *slot = slot.checked_add(c).ok_or_else(overflow)?;
                            }
                        }
                    }
                    counts = next;
                }
                Ok(counts.iter().sum())
            }
        }
    }
}

fn check_alphabet(p: u32) -> Result<()> {
    if (2..=65_536).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("alphabet size {p} outside 2..=65536")))
    }
}
