//! Finite-horizon checkers for the structural hypotheses the Moran pipeline
//! consumes: gluing certificates (any two good words connect through a short
//! admissible gap), free concatenation (the good family is closed under
//! juxtaposition), and mistake profiles (every language word is within a
//! sublinear edit distance of the good family).
//!
//! All checks certify bounded statements up to a stated horizon; they never
//! claim the corresponding infinite-language property.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::shifts::{Cursor, ShiftSpace};
use crate::words::{edit_distance, Symbol, Word};
use crate::Result;

/// Internal cap on words enumerated per level inside structure checks.
const LEVEL_BUDGET: u64 = 1 << 22;
/// Internal cap on the number of word pairs a pair check may visit.
const PAIR_BUDGET: u64 = 1 << 21;

/// Named word families; membership always also requires admissibility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordPredicate {
    /// The whole language.
    All,
    StartsWith(Word),
    EndsWith(Word),
    StartsAndEndsWith { prefix: Word, suffix: Word },
}

impl WordPredicate {
    /// Pattern match only; admissibility is the space's business.
    pub fn matches(&self, w: &[Symbol]) -> bool {
        match self {
            WordPredicate::All => true,
            WordPredicate::StartsWith(p) => w.len() >= p.len() && w[..p.len()] == *p.symbols(),
            WordPredicate::EndsWith(s) => {
                w.len() >= s.len() && w[w.len() - s.len()..] == *s.symbols()
            }
            WordPredicate::StartsAndEndsWith { prefix, suffix } => {
                w.len() >= prefix.len()
                    && w.len() >= suffix.len()
                    && w[..prefix.len()] == *prefix.symbols()
                    && w[w.len() - suffix.len()..] == *suffix.symbols()
            }
        }
    }

    /// True when every pattern of the predicate is trivial.
    pub fn is_all(&self) -> bool {
        matches!(self, WordPredicate::All)
    }
}

impl fmt::Display for WordPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordPredicate::All => write!(f, "all"),
            WordPredicate::StartsWith(p) => write!(f, "starts-with:{p}"),
            WordPredicate::EndsWith(s) => write!(f, "ends-with:{s}"),
            WordPredicate::StartsAndEndsWith { prefix, suffix } => {
                write!(f, "starts-and-ends-with:{prefix}:{suffix}")
            }
        }
    }
}

impl FromStr for WordPredicate {
    type Err = Error;

    /// `all`, `starts-with:<word>`, `ends-with:<word>`,
    /// `starts-and-ends-with:<word>:<word>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(WordPredicate::All);
        }
        if let Some(rest) = s.strip_prefix("starts-and-ends-with:") {
            let (a, b) = rest
                .split_once(':')
                .ok_or_else(|| Error::InvalidInput(format!("bad predicate {s:?}")))?;
            return Ok(WordPredicate::StartsAndEndsWith { prefix: a.parse()?, suffix: b.parse()? });
        }
        if let Some(rest) = s.strip_prefix("starts-with:") {
            return Ok(WordPredicate::StartsWith(rest.parse()?));
        }
        if let Some(rest) = s.strip_prefix("ends-with:") {
            return Ok(WordPredicate::EndsWith(rest.parse()?));
        }
        Err(Error::InvalidInput(format!("unknown predicate {s:?}")))
    }
}

/// All predicate-passing admissible words of length exactly `n`.
pub fn family_slice(space: &ShiftSpace, pred: &WordPredicate, n: usize) -> Result<Vec<Word>> {
    let words = space.enumerate_words(n, LEVEL_BUDGET)?;
    Ok(words.into_iter().filter(|w| pred.matches(w.symbols())).collect())
}

fn family_up_to(space: &ShiftSpace, pred: &WordPredicate, horizon: usize) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for n in 0..=horizon {
        out.extend(family_slice(space, pred, n)?);
    }
    Ok(out)
}

/// One glued pair: `left . glue . right` lies in the family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecWitness {
    pub left: Word,
    pub glue: Word,
    pub right: Word,
}

/// Certificate that any two family words up to the horizon glue through a
/// connector of length at most `tau`.
#[derive(Debug, Clone, Serialize)]
pub struct SpecificationCertificate {
    pub space: String,
    pub predicate: String,
    pub tau: usize,
    pub horizon: usize,
    pub pair_count: u64,
    /// A pair attaining `tau` (shortest glue has length exactly `tau`).
    pub worst: SpecWitness,
    /// Bounded sample of the witness table for reports.
    pub witness_sample: Vec<SpecWitness>,
    /// Full witness table, one entry per ordered pair; kept in memory for
    /// revalidation, not serialized.
    #[serde(skip)]
    pub witnesses: Vec<SpecWitness>,
}

/// First pair that would not glue within `tau_max`.
#[derive(Debug, Clone, Serialize)]
pub struct SpecificationFailure {
    pub space: String,
    pub predicate: String,
    pub tau_max: usize,
    pub horizon: usize,
    pub uncovered: (Word, Word),
}

/// Outcome of a gluing check.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SpecificationOutcome {
    Certified(SpecificationCertificate),
    Failed(SpecificationFailure),
}

/// Finds the smallest `tau <= tau_max` such that every ordered pair `(v, w)`
/// of family words with lengths up to `horizon` admits a glue `u`,
/// `|u| <= tau`, with `v u w` again in the family. Glues are searched in
/// shortlex order, so the recorded witness per pair is the minimal one.
pub fn check_w_specification(
    space: &ShiftSpace,
    pred: &WordPredicate,
    tau_max: usize,
    horizon: usize,
) -> Result<SpecificationOutcome> {
    let need = horizon
        .checked_mul(2)
        .and_then(|x| x.checked_add(tau_max))
        .ok_or_else(|| Error::InvalidInput("horizon overflow".into()))?;
    if space.decidable_length() < need {
        return Err(Error::PrecisionExhausted(format!(
            "gluing check needs words of length {need} beyond the decidable horizon"
        )));
    }
    let family = family_up_to(space, pred, horizon)?;
    let pair_count = (family.len() as u64).pow(2);
    if pair_count > PAIR_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{pair_count} pairs exceed the pair budget {PAIR_BUDGET}"
        )));
    }

    let mut witnesses = Vec::with_capacity(family.len() * family.len());
    let mut tau = 0usize;
    let mut worst: Option<SpecWitness> = None;
    let mut buf: Vec<Symbol> = Vec::new();
    for v in &family {
        let v_end = space
            .walk(space.root_cursor(), v.symbols())
            .expect("family words are admissible");
        for w in &family {
            match shortest_glue(space, pred, v, &v_end, w, tau_max, &mut buf) {
                Some(glue) => {
                    if glue.len() >= tau {
                        tau = glue.len();
                        worst = Some(SpecWitness {
                            left: v.clone(),
                            glue: glue.clone(),
                            right: w.clone(),
                        });
                    }
                    witnesses.push(SpecWitness { left: v.clone(), glue, right: w.clone() });
                }
                None => {
                    return Ok(SpecificationOutcome::Failed(SpecificationFailure {
                        space: space.description().to_string(),
                        predicate: pred.to_string(),
                        tau_max,
                        horizon,
                        uncovered: (v.clone(), w.clone()),
                    }))
                }
            }
        }
    }
    let worst = worst.ok_or_else(|| {
        Error::EmptyLevel("the family is empty up to the horizon; nothing to glue".into())
    })?;
    let mut witness_sample: Vec<SpecWitness> = vec![worst.clone()];
    witness_sample.extend(witnesses.iter().take(32).cloned());
    Ok(SpecificationOutcome::Certified(SpecificationCertificate {
        space: space.description().to_string(),
        predicate: pred.to_string(),
        tau,
        horizon,
        pair_count,
        worst,
        witness_sample,
        witnesses,
    }))
}

/// Smallest glue in shortlex order, if any within `tau_max`.
fn shortest_glue(
    space: &ShiftSpace,
    pred: &WordPredicate,
    v: &Word,
    v_end: &Cursor,
    w: &Word,
    tau_max: usize,
    glue_buf: &mut Vec<Symbol>,
) -> Option<Word> {
    for len in 0..=tau_max {
        glue_buf.clear();
        if glue_search(space, pred, v, *v_end, w, len, glue_buf) {
            return Some(Word::new(glue_buf.clone()));
        }
    }
    None
}

fn glue_search(
    space: &ShiftSpace,
    pred: &WordPredicate,
    v: &Word,
    cursor: Cursor,
    w: &Word,
    remaining: usize,
    glue: &mut Vec<Symbol>,
) -> bool {
    if remaining == 0 {
        if space.walk(cursor, w.symbols()).is_none() {
            return false;
        }
        // Admissible; now the pattern on the full concatenation.
        let mut full = Vec::with_capacity(v.len() + glue.len() + w.len());
        full.extend_from_slice(v.symbols());
        full.extend_from_slice(glue);
        full.extend_from_slice(w.symbols());
        return pred.matches(&full);
    }
    for a in 0..space.alphabet() {
        let a = a as Symbol;
        if let Some(next) = space.step(&cursor, a) {
            glue.push(a);
            if glue_search(space, pred, v, next, w, remaining - 1, glue) {
                return true;
            }
            glue.pop();
        }
    }
    false
}

/// Revalidates a certificate: every witness replays through admissibility
/// and the pattern, glue lengths respect `tau`, and (when the full table is
/// present) the table covers exactly the ordered pairs up to the horizon.
pub fn revalidate_certificate(
    space: &ShiftSpace,
    pred: &WordPredicate,
    cert: &SpecificationCertificate,
) -> Result<bool> {
    let table = if cert.witnesses.is_empty() { &cert.witness_sample } else { &cert.witnesses };
    for wit in table {
        if wit.glue.len() > cert.tau {
            return Ok(false);
        }
        let mut full = wit.left.clone();
        full = full.concat(&wit.glue).concat(&wit.right);
        if !space.is_admissible(full.symbols())? || !pred.matches(full.symbols()) {
            return Ok(false);
        }
    }
    if !cert.witnesses.is_empty() {
        let family = family_up_to(space, pred, cert.horizon)?;
        if cert.witnesses.len() as u64 != (family.len() as u64).pow(2) {
            return Ok(false);
        }
        let mut seen: std::collections::BTreeSet<(&Word, &Word)> = Default::default();
        for wit in &cert.witnesses {
            seen.insert((&wit.left, &wit.right));
        }
        for v in &family {
            for w in &family {
                if !seen.contains(&(v, w)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Result of a free-concatenation check.
#[derive(Debug, Clone, Serialize)]
pub struct FreeConcatReport {
    pub space: String,
    pub predicate: String,
    pub horizon: usize,
    pub holds: bool,
    pub pair_count: u64,
    /// Shortlex-first failing pair, when `holds` is false.
    pub counterexample: Option<(Word, Word)>,
}

/// Checks that the family is closed under juxtaposition: for all family
/// words `u, w` of length up to `horizon`, `u w` is again in the family.
pub fn check_free_concatenation(
    space: &ShiftSpace,
    pred: &WordPredicate,
    horizon: usize,
) -> Result<FreeConcatReport> {
    let need = horizon
        .checked_mul(2)
        .ok_or_else(|| Error::InvalidInput("horizon overflow".into()))?;
    if space.decidable_length() < need {
        return Err(Error::PrecisionExhausted(format!(
            "free-concatenation check needs words of length {need} beyond the decidable horizon"
        )));
    }
    let family = family_up_to(space, pred, horizon)?;
    let pair_count = (family.len() as u64).pow(2);
    if pair_count > PAIR_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{pair_count} pairs exceed the pair budget {PAIR_BUDGET}"
        )));
    }
    for u in &family {
        let u_end = space
            .walk(space.root_cursor(), u.symbols())
            .expect("family words are admissible");
        for w in &family {
            let admissible = space.walk(u_end, w.symbols()).is_some();
            let joined = u.concat(w);
            if !admissible || !pred.matches(joined.symbols()) {
                return Ok(FreeConcatReport {
                    space: space.description().to_string(),
                    predicate: pred.to_string(),
                    horizon,
                    holds: false,
                    pair_count,
                    counterexample: Some((u.clone(), w.clone())),
                });
            }
        }
    }
    Ok(FreeConcatReport {
        space: space.description().to_string(),
        predicate: pred.to_string(),
        horizon,
        holds: true,
        pair_count,
        counterexample: None,
    })
}

/// One tested length of a mistake profile.
#[derive(Debug, Clone, Serialize)]
pub struct MistakeSample {
    pub n: usize,
    /// Max over tested `w` in `L_n` of the min edit distance to the family.
    pub value: usize,
    /// `value / n`.
    pub ratio: f64,
    /// True when all of `L_n` was scanned; false for sampled lower
    /// estimates.
    pub exact: bool,
    pub tested_words: u64,
    /// A word attaining the max.
    pub witness: Word,
}

/// Empirical edit-approachability of the language by the family.
#[derive(Debug, Clone, Serialize)]
pub struct MistakeProfile {
    pub space: String,
    pub predicate: String,
    pub samples: Vec<MistakeSample>,
    /// `value / n` per sample; sublinear trends make the family usable.
    pub ratios: Vec<f64>,
}

/// For each `n`, the max over `w` in `L_n` (all words when the level fits
/// the budget, else a seeded uniform sample, flagged) of the min edit
/// distance from `w` to a family word. Candidate family lengths grow
/// outward from `n` until the best distance certifies itself.
pub fn mistake_profile(
    space: &ShiftSpace,
    pred: &WordPredicate,
    n_list: &[usize],
    sample_budget: u64,
    seed: u64,
) -> Result<MistakeProfile> {
    if n_list.is_empty() {
        return Err(Error::InvalidInput("no lengths requested".into()));
    }
    if sample_budget == 0 {
        return Err(Error::InvalidInput("sample budget must be positive".into()));
    }
    let mut samples = Vec::with_capacity(n_list.len());
    let mut slices: HashMap<usize, Vec<Word>> = HashMap::new();
    for &n in n_list {
        if n == 0 {
            return Err(Error::InvalidInput("profile lengths start at 1".into()));
        }
        let total = space.count_words(n)?;
        let exact = total <= sample_budget as u128;
        let mut value = 0usize;
        let mut witness = Word::empty();
        let mut tested: u64 = 0;
        let mut scan = |w: &[Symbol]| -> Result<()> {
            tested += 1;
            let d = min_family_distance(space, pred, w, &mut slices)?;
            if d > value || witness.is_empty() {
                value = d;
                witness = Word::from(w);
            }
            Ok(())
        };
        if exact {
            let mut failure: Option<Error> = None;
            space.for_each_word(n, &mut |w| {
                if failure.is_none() {
                    if let Err(e) = scan(w) {
                        failure = Some(e);
                    }
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
            let mut sampler = LevelSampler::new(space);
            for _ in 0..sample_budget {
                let w = sampler.sample(n, &mut rng)?;
                scan(w.symbols())?;
            }
        }
        debug_assert!(value <= n, "profile value {value} exceeds length {n}");
        samples.push(MistakeSample {
            n,
            value,
            ratio: value as f64 / n as f64,
            exact,
            tested_words: tested,
            witness,
        });
    }
    let ratios = samples.iter().map(|s| s.ratio).collect();
    Ok(MistakeProfile {
        space: space.description().to_string(),
        predicate: pred.to_string(),
        samples,
        ratios,
    })
}

/// Exact min edit distance from `w` to the family, growing the candidate
/// length window until the best value is certified (any family word outside
/// the window differs in length by more than the best distance found).
fn min_family_distance(
    space: &ShiftSpace,
    pred: &WordPredicate,
    w: &[Symbol],
    slices: &mut HashMap<usize, Vec<Word>>,
) -> Result<usize> {
    let n = w.len();
    let mut best = usize::MAX;
    for radius in 0..=n {
        if best <= radius {
            return Ok(best);
        }
        let mut lengths = vec![];
        if radius == 0 {
            lengths.push(n);
        } else {
            if n >= radius {
                lengths.push(n - radius);
            }
            lengths.push(n + radius);
        }
        for m in lengths {
            if let std::collections::hash_map::Entry::Vacant(e) = slices.entry(m) {
                let slice = family_slice(space, pred, m)?;
                e.insert(slice);
            }
            for v in &slices[&m] {
                let d = edit_distance(v.symbols(), w);
                if d < best {
                    best = d;
                }
            }
        }
    }
    if best == usize::MAX {
        return Err(Error::InvalidInput(format!(
            "the family has no words within length window [0, {}]",
            2 * n
        )));
    }
    Ok(best)
}

/// Uniform sampler over a level of the language, driven by exact extension
/// counts from each automaton state.
struct LevelSampler<'a> {
    space: &'a ShiftSpace,
    memo: HashMap<(Cursor, usize), u128>,
}

impl<'a> LevelSampler<'a> {
    fn new(space: &'a ShiftSpace) -> Self {
        LevelSampler { space, memo: HashMap::new() }
    }

    fn count(&mut self, cursor: &Cursor, len: usize) -> u128 {
        if len == 0 {
            return 1;
        }
        if let Some(&c) = self.memo.get(&(*cursor, len)) {
            return c;
        }
        let mut total: u128 = 0;
        for a in 0..self.space.alphabet() {
            if let Some(next) = self.space.step(cursor, a as Symbol) {
                total += self.count(&next, len - 1);
            }
        }
        self.memo.insert((*cursor, len), total);
        total
    }

    fn sample(&mut self, n: usize, rng: &mut ChaCha8Rng) -> Result<Word> {
        let mut cursor = self.space.root_cursor();
        let total = self.count(&cursor, n);
        if total == 0 {
            return Err(Error::EmptyLevel(format!("level {n} holds no words")));
        }
        let mut out = Vec::with_capacity(n);
        for rem in (1..=n).rev() {
            let mut pick = rng.gen_range(0..self.count(&cursor, rem));
            let mut chosen = None;
            for a in 0..self.space.alphabet() {
                let a = a as Symbol;
                if let Some(next) = self.space.step(&cursor, a) {
                    let c = self.count(&next, rem - 1);
                    if pick < c {
                        chosen = Some((a, next));
                        break;
                    }
                    pick -= c;
                }
            }
            let (a, next) = chosen.expect("counts cover the draw");
            out.push(a);
            cursor = next;
        }
        Ok(Word::new(out))
    }
}
