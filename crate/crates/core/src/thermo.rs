//! Thermodynamic machinery over shift languages: finite-range positive
//! potentials, Birkhoff extrema over cylinders, level partition sums,
//! entropy and pressure estimates, and per-level Bowen-equation solutions.
//!
//! The central object is the level-`n` partition sum for a potential `f`
//! (through the tilted family `g_s = -s (f + 1)`):
//!
//! `Lambda_n(s) = sum over level words w of exp(-s (n + inf_[w] S_n f))`
//!
//! using `sup_[w] S_n g_s = -s (n + inf_[w] S_n f)` for `s >= 0`. Its zero in
//! `s`, per level and in the limit, solves the Bowen equation
//! `P(-s(f+1)) = 0` and gives the dimension of the potential-weighted
//! recurrence set. Word collections `D` are either the full language or a
//! named predicate family.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Error;
use crate::numerics::{bisect_decreasing, tail_median, tail_start, LogSumExp};
use crate::shifts::ShiftSpace;
use crate::structure::WordPredicate;
use crate::words::{Symbol, Word};
use crate::Result;

/// Cap on words enumerated per level for predicate-filtered counting.
const ENUM_BUDGET: u128 = 1 << 23;

/// A strictly positive potential depending on finitely many coordinates:
/// depth 0 is a constant, depth `d >= 1` reads the first `d` symbols.
/// Values are in nats per symbol.
#[derive(Debug, Clone)]
pub struct Potential {
    p: u32,
    depth: usize,
    constant: f64,
    /// Dense table indexed by the radix-`p` encoding of the window;
    /// entries for inadmissible windows are NaN and never read.
    table: Vec<f64>,
    min: f64,
    max: f64,
}

impl Potential {
    /// The constant potential `f = c > 0` (depth 0).
    pub fn constant(c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "potential value {c} must be finite and strictly positive"
            )));
        }
        Ok(Potential { p: 0, depth: 0, constant: c, table: Vec::new(), min: c, max: c })
    }

    /// A depth-`d` potential from a value table. The table must assign a
    /// strictly positive value to every admissible word of length `d` and
    /// nothing else.
    pub fn from_table(
        space: &ShiftSpace,
        depth: usize,
        entries: &BTreeMap<Word, f64>,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidInput(
                "depth-0 potentials take a single constant, not a table".into(),
            ));
        }
        let p = space.alphabet();
        let size = (p as u64).checked_pow(depth as u32).filter(|&s| s <= 1 << 24).ok_or_else(
            || Error::InvalidInput(format!("dense table p^{depth} too large for p={p}")),
        )?;
        let mut table = vec![f64::NAN; size as usize];
        let expected = space.count_words(depth)?;
        if entries.len() as u128 != expected {
            return Err(Error::InvalidInput(format!(
                "potential table has {} entries but the language has {} words of length {depth}",
                entries.len(),
                expected
            )));
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for (w, &v) in entries {
            if w.len() != depth {
                return Err(Error::InvalidInput(format!(
                    "potential key {w} has length {}, expected {depth}",
                    w.len()
                )));
            }
            if !space.is_admissible(w.symbols())? {
                return Err(Error::InvalidInput(format!("potential key {w} is not admissible")));
            }
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "potential value {v} for {w} must be finite and strictly positive"
                )));
            }
            table[radix_index(p, w.symbols())] = v;
            min = min.min(v);
            max = max.max(v);
        }
        Ok(Potential { p, depth, constant: 0.0, table, min, max })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Smallest value over admissible windows.
    pub fn min_value(&self) -> f64 {
        self.min
    }

    /// Largest value over admissible windows (the sup norm, `f` positive).
    pub fn max_value(&self) -> f64 {
        self.max
    }

    /// Value on a window of exactly `depth` symbols (any slice for depth 0).
    pub fn value(&self, window: &[Symbol]) -> f64 {
        if self.depth == 0 {
            return self.constant;
        }
        debug_assert_eq!(window.len(), self.depth);
        let v = self.table[radix_index(self.p, window)];
        debug_assert!(v.is_finite(), "potential read on an inadmissible window");
        v
    }
}

fn radix_index(p: u32, window: &[Symbol]) -> usize {
    window.iter().fold(0usize, |acc, &s| acc * p as usize + s as usize)
}

/// Birkhoff extrema of `S_n f` over the cylinder of `w` (`n = |w|`): the
/// first `n - d + 1` terms are determined by `w`, the trailing `d - 1` are
/// optimized over admissible extensions.
pub fn birkhoff_bounds(space: &ShiftSpace, pot: &Potential, w: &[Symbol]) -> Result<(f64, f64)> {
    let n = w.len();
    if pot.depth == 0 {
        return Ok((n as f64 * pot.constant, n as f64 * pot.constant));
    }
    let d = pot.depth;
    if space.decidable_length() < n + d - 1 {
        return Err(Error::PrecisionExhausted(format!(
            "Birkhoff bounds need words of length {} beyond the decidable horizon",
            n + d - 1
        )));
    }
    let Some(end) = space.walk(space.root_cursor(), w) else {
        return Err(Error::InvalidInput("Birkhoff bounds on an inadmissible word".into()));
    };

    let mut determined = 0.0;
    if n >= d {
        for i in 0..=(n - d) {
            determined += pot.value(&w[i..i + d]);
        }
    }

    // Tail windows overlap the extension; buffer = trailing end of w plus
    // the extension symbols.
    let m0 = n.min(d - 1);
    if m0 == 0 {
        return Ok((determined, determined));
    }
    let mut buf: Vec<Symbol> = w[n - m0..].to_vec();
    let mut best = (f64::INFINITY, f64::NEG_INFINITY);
    extend_tail(space, pot, end, &mut buf, d - 1, m0, &mut best);
    if best.0.is_infinite() {
        return Err(Error::NonExtendableWord(format!(
            "no admissible extension of length {} completes the Birkhoff window",
            d - 1
        )));
    }
    Ok((determined + best.0, determined + best.1))
}

/// Largest value of `S_{|w|} f` over the cylinder `[w]`.
pub fn birkhoff_sup(space: &ShiftSpace, pot: &Potential, w: &[Symbol]) -> Result<f64> {
    birkhoff_bounds(space, pot, w).map(|(_, sup)| sup)
}

/// Smallest value of `S_{|w|} f` over the cylinder `[w]`.
pub fn birkhoff_inf(space: &ShiftSpace, pot: &Potential, w: &[Symbol]) -> Result<f64> {
    birkhoff_bounds(space, pot, w).map(|(inf, _)| inf)
}

fn extend_tail(
    space: &ShiftSpace,
    pot: &Potential,
    cursor: crate::shifts::Cursor,
    buf: &mut Vec<Symbol>,
    remaining: usize,
    m0: usize,
    best: &mut (f64, f64),
) {
    if remaining == 0 {
        let d = pot.depth;
        let mut tail = 0.0;
        for k in 0..m0 {
            tail += pot.value(&buf[k..k + d]);
        }
        best.0 = best.0.min(tail);
        best.1 = best.1.max(tail);
        return;
    }
    for a in 0..space.alphabet() {
        let a = a as Symbol;
        if let Some(next) = space.step(&cursor, a) {
            buf.push(a);
            extend_tail(space, pot, next, buf, remaining - 1, m0, best);
            buf.pop();
        }
    }
}

/// Per-level histogram of partition-sum bases `n + inf_[w] S_n f`, binned by
/// exact floating value. Built once per level and reused across bisection
/// steps.
#[derive(Debug, Clone)]
pub struct LevelHistogram {
    pub n: usize,
    pub count: u64,
    /// base bits -> multiplicity; keys are positive finite f64 bits, whose
    /// integer order matches numeric order.
    bins: BTreeMap<u64, u64>,
}

impl LevelHistogram {
    pub fn bins(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.bins.iter().map(|(&bits, &c)| (f64::from_bits(bits), c))
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn base_min(&self) -> Option<f64> {
        self.bins.keys().next().map(|&b| f64::from_bits(b))
    }

    pub fn base_max(&self) -> Option<f64> {
        self.bins.keys().next_back().map(|&b| f64::from_bits(b))
    }
}

/// Builds the level-`n` histogram over the words of the collection `pred`.
/// Positivity of `f` keeps every base above `n`, hence the partition sum
/// strictly decreasing in `s`.
pub fn level_histogram(
    space: &ShiftSpace,
    pot: &Potential,
    n: usize,
    pred: &WordPredicate,
) -> Result<LevelHistogram> {
    if n == 0 {
        return Err(Error::InvalidInput("partition sums start at level 1".into()));
    }
    let mut bins: BTreeMap<u64, u64> = BTreeMap::new();
    let mut count: u64 = 0;
    let mut failure: Option<Error> = None;
    space.for_each_word(n, &mut |w| {
        if failure.is_some() || !pred.matches(w) {
            return;
        }
        match birkhoff_bounds(space, pot, w) {
            Ok((inf, _)) => {
                let base = n as f64 + inf;
                debug_assert!(base > 0.0, "positive potential keeps bases positive");
                *bins.entry(base.to_bits()).or_insert(0) += 1;
                count += 1;
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(LevelHistogram { n, count, bins })
}

/// `log Lambda_n(s)` for the histogram's level; negative infinity when the
/// level is empty.
pub fn partition_log_sum(hist: &LevelHistogram, s: f64) -> f64 {
    let mut lse = LogSumExp::new();
    for (base, mult) in hist.bins() {
        lse.push_many(-s * base, mult);
    }
    lse.value()
}

/// `log Lambda_n(D, s)`: log-space partition sum of the tilted potential
/// over the level-`n` words of the collection.
pub fn partition_sum(
    space: &ShiftSpace,
    pred: &WordPredicate,
    pot: &Potential,
    s: f64,
    n: usize,
) -> Result<f64> {
    let hist = level_histogram(space, pot, n, pred)?;
    if hist.count == 0 {
        return Err(Error::EmptyLevel(format!("level {n} of the collection is empty")));
    }
    Ok(partition_log_sum(&hist, s))
}

/// One per-level Bowen solution `s_n` with its bracket and residual.
#[derive(Debug, Clone, Serialize)]
pub struct SnSolution {
    pub n: usize,
    pub s: f64,
    /// Computational bracket (tighter than the norm-based one).
    pub bracket: (f64, f64),
    /// `log Lambda_n(s)` at the returned `s`.
    pub residual: f64,
    /// Number of words in the level (after filtering).
    pub count: u64,
    /// True when the level had a single base and `s` is the exact quotient.
    pub closed_form: bool,
}

/// Solves `log Lambda_n(s) = 0` on a prebuilt level histogram.
///
/// The bracket `[log#D / base_max, log#D / base_min]` pins the root by
/// construction; a single-bin level collapses to the exact quotient
/// `log(count) / base` (for constant `f`: `log#D / (n (1 + f))`).
/// Bisection stops when `|log Lambda_n| <= tol * n` or the bracket closes.
pub fn solve_on_histogram(hist: &LevelHistogram, tol: f64) -> Result<SnSolution> {
    if hist.count == 0 {
        return Err(Error::EmptyLevel(format!("level {} holds no words", hist.n)));
    }
    let log_n = (hist.count as f64).ln();
    let base_min = hist.base_min().unwrap();
    let base_max = hist.base_max().unwrap();
    if hist.bin_count() == 1 {
        let s = log_n / base_min;
        return Ok(SnSolution {
            n: hist.n,
            s,
            bracket: (s, s),
            residual: partition_log_sum(hist, s),
            count: hist.count,
            closed_form: true,
        });
    }
    let lo = log_n / base_max;
    let hi = log_n / base_min;
    let resid_tol = tol * hist.n as f64;
    let s = bisect_decreasing(
        lo,
        hi,
        |s| partition_log_sum(hist, s),
        f64::EPSILON,
        resid_tol,
        200,
    );
    Ok(SnSolution {
        n: hist.n,
        s,
        bracket: (lo, hi),
        residual: partition_log_sum(hist, s),
        count: hist.count,
        closed_form: false,
    })
}

/// Solves the level-`n` Bowen equation over the collection `pred`.
pub fn solve_sn(
    space: &ShiftSpace,
    pred: &WordPredicate,
    pot: &Potential,
    n: usize,
    tol: f64,
) -> Result<SnSolution> {
    solve_on_histogram(&level_histogram(space, pot, n, pred)?, tol)
}

/// One level of a growth report.
#[derive(Debug, Clone, Serialize)]
pub struct LevelCount {
    pub n: usize,
    pub count: u128,
    pub log_count: f64,
    /// `log(count) / n`.
    pub value: f64,
}

/// Topological entropy evidence from finite levels.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub space: String,
    /// Which word collection was counted.
    pub family: String,
    /// Populated levels only (predicate families may skip lengths).
    pub per_level: Vec<LevelCount>,
    /// Growth slopes between consecutive populated levels.
    pub slopes: Vec<f64>,
    /// Headline estimate: tail median of the slopes (the per-level quotient
    /// `log(count)/n` carries an O(1/n) bias the slopes cancel).
    pub estimate: f64,
    /// Always true: finite levels witness, they do not prove the limit.
    pub finite_horizon: bool,
}

/// Counts collection sizes for `n = 1..=n_max` and estimates the growth
/// rate `h(D) = limsup log(#D_n)/n`.
pub fn entropy_estimate(
    space: &ShiftSpace,
    pred: &WordPredicate,
    n_max: usize,
) -> Result<EntropyReport> {
    if n_max < 2 {
        return Err(Error::InvalidInput("entropy estimates need n_max >= 2".into()));
    }
    let mut per_level = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let count = collection_count(space, pred, n)?;
        if count == 0 {
            continue;
        }
        let log_count = (count as f64).ln();
        per_level.push(LevelCount { n, count, log_count, value: log_count / n as f64 });
    }
    if per_level.is_empty() {
        return Err(Error::EmptyLevel(format!(
            "the collection is empty on every level up to {n_max}"
        )));
    }
    let slopes = slopes_of(&per_level, |l| (l.n, l.log_count));
    let estimate = tail_median(&slopes)
        .or_else(|| per_level.last().map(|l| l.value))
        .expect("per_level nonempty");
    Ok(EntropyReport {
        space: space.description().to_string(),
        family: pred.to_string(),
        per_level,
        slopes,
        estimate,
        finite_horizon: true,
    })
}

/// `#D_n` for the collection: exact transfer-structure count for the whole
/// language, filtered enumeration for predicate families (budget-guarded).
pub fn collection_count(space: &ShiftSpace, pred: &WordPredicate, n: usize) -> Result<u128> {
    let total = space.count_words(n)?;
    if pred.is_all() {
        return Ok(total);
    }
    if total > ENUM_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "level {n} holds {total} words, too many to filter by enumeration"
        )));
    }
    let mut count: u128 = 0;
    space.for_each_word(n, &mut |w| {
        if pred.matches(w) {
            count += 1;
        }
    })?;
    Ok(count)
}

/// One level of a pressure estimate.
#[derive(Debug, Clone, Serialize)]
pub struct LevelPressure {
    pub n: usize,
    pub log_sum: f64,
    /// `log Lambda_n(s) / n`.
    pub value: f64,
}

/// Pressure evidence for the tilted family `-s(f+1)` at a fixed `s`.
#[derive(Debug, Clone, Serialize)]
pub struct PressureEstimate {
    pub space: String,
    pub family: String,
    pub s: f64,
    /// Populated levels only.
    pub per_level: Vec<LevelPressure>,
    pub slopes: Vec<f64>,
    /// Tail median of the slopes.
    pub extrapolated: f64,
    /// The limit notion being estimated is a limsup.
    pub direction: &'static str,
    pub finite_horizon: bool,
}

/// Estimates `P(D, -s(f+1)) = limsup log Lambda_n(s) / n` from sampled
/// levels; empty levels are skipped (predicate families may have gaps).
pub fn pressure_estimate(
    space: &ShiftSpace,
    pred: &WordPredicate,
    pot: &Potential,
    s: f64,
    levels: &[usize],
) -> Result<PressureEstimate> {
    check_levels(levels)?;
    let mut per_level = Vec::with_capacity(levels.len());
    for &n in levels {
        let hist = level_histogram(space, pot, n, pred)?;
        if hist.count == 0 {
            continue;
        }
        let log_sum = partition_log_sum(&hist, s);
        per_level.push(LevelPressure { n, log_sum, value: log_sum / n as f64 });
    }
    if per_level.is_empty() {
        return Err(Error::EmptyLevel("the collection is empty on every requested level".into()));
    }
    let slopes = slopes_of(&per_level, |l| (l.n, l.log_sum));
    let extrapolated = tail_median(&slopes)
        .or_else(|| per_level.last().map(|l| l.value))
        .expect("per_level nonempty");
    Ok(PressureEstimate {
        space: space.description().to_string(),
        family: pred.to_string(),
        s,
        per_level,
        slopes,
        extrapolated,
        direction: "limsup",
        finite_horizon: true,
    })
}

/// Bowen-equation evidence across levels.
#[derive(Debug, Clone, Serialize)]
pub struct BowenSolution {
    pub space: String,
    pub family: String,
    pub per_level: Vec<SnSolution>,
    /// Richardson slopes `(n_j s_j - n_{j-1} s_{j-1}) / (n_j - n_{j-1})`.
    pub slopes: Vec<f64>,
    /// Headline root estimate: tail median of the slopes. Raw `s_n` carry
    /// an O(1/n) bias; differencing cancels it.
    pub limit: f64,
    /// Norm-based bracket at the deepest level:
    /// `[log#D_n / (n (1+max f)), log#D_n / (n (1+min f))]`.
    pub bracket: (f64, f64),
    pub tolerance: f64,
    /// Spread (max - min) of raw `s_n` over the tail window.
    pub tail_spread: f64,
    pub finite_horizon: bool,
}

/// Solves the Bowen equation on each scheduled level of the collection and
/// extrapolates the root. Scheduled levels must be populated.
pub fn bowen_root(
    space: &ShiftSpace,
    pred: &WordPredicate,
    pot: &Potential,
    n_schedule: &[usize],
    tol: f64,
) -> Result<BowenSolution> {
    check_levels(n_schedule)?;
    let mut per_level = Vec::with_capacity(n_schedule.len());
    for &n in n_schedule {
        let hist = level_histogram(space, pot, n, pred)?;
        per_level.push(solve_on_histogram(&hist, tol)?);
    }
    let slopes = slopes_of(&per_level, |l| (l.n, l.n as f64 * l.s));
    let limit = tail_median(&slopes)
        .or_else(|| per_level.last().map(|l| l.s))
        .expect("schedule checked nonempty");
    let deepest = per_level.last().unwrap();
    let log_n = (deepest.count as f64).ln();
    let nf = deepest.n as f64;
    let bracket = (
        log_n / (nf * (1.0 + pot.max_value())),
        log_n / (nf * (1.0 + pot.min_value())),
    );
    let tail = &per_level[tail_start(per_level.len(), 0.3)..];
    let tail_spread = tail.iter().map(|l| l.s).fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().map(|l| l.s).fold(f64::INFINITY, f64::min);
    Ok(BowenSolution {
        space: space.description().to_string(),
        family: pred.to_string(),
        per_level,
        slopes,
        limit,
        bracket,
        tolerance: tol,
        tail_spread,
        finite_horizon: true,
    })
}

fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidInput("no levels requested".into()));
    }
    if levels[0] == 0 {
        return Err(Error::InvalidInput("levels start at 1".into()));
    }
    if levels.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidInput("levels must be strictly increasing".into()));
    }
    Ok(())
}

/// Difference quotients of `value` against `n` between consecutive levels.
fn slopes_of<T>(items: &[T], proj: impl Fn(&T) -> (usize, f64)) -> Vec<f64> {
    items
        .windows(2)
        .map(|pair| {
            let (n0, v0) = proj(&pair[0]);
            let (n1, v1) = proj(&pair[1]);
            (v1 - v0) / (n1 - n0) as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shifts::{GapTail, SGapSet, ShiftSpace};

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn golden() -> ShiftSpace {
        ShiftSpace::forbidden(2, &[w("11")]).unwrap()
    }

    fn depth1(space: &ShiftSpace, v0: f64, v1: f64) -> Potential {
        let mut t = BTreeMap::new();
        t.insert(w("0"), v0);
        t.insert(w("1"), v1);
        Potential::from_table(space, 1, &t).unwrap()
    }

    const ALL: WordPredicate = WordPredicate::All;

    #[test]
    fn constant_potential_closed_form() {
        let space = ShiftSpace::full(2).unwrap();
        let pot = Potential::constant(1.0).unwrap();
        for n in 1..=12 {
            let sol = solve_sn(&space, &ALL, &pot, n, 1e-12).unwrap();
            assert!(sol.closed_form);
            // log(2^n) / (n(1+1)) = log(2)/2 exactly, every level.
            assert!(
                (sol.s - 0.5 * std::f64::consts::LN_2).abs() < 1e-15,
                "level {n}: {}",
                sol.s
            );
        }
    }

    #[test]
    fn bowen_closed_forms_on_full_shifts() {
        // (p, alpha, expected limit log p / (1 + alpha))
        let cases = [(2u32, 1.0, 2.0f64.ln() / 2.0), (2, 3.0, 2.0f64.ln() / 4.0),
            (3, 0.5, 3.0f64.ln() / 1.5)];
        for (p, alpha, expect) in cases {
            let space = ShiftSpace::full(p).unwrap();
            let pot = Potential::constant(alpha).unwrap();
            let levels: Vec<usize> = (1..=10).collect();
            let rep = bowen_root(&space, &ALL, &pot, &levels, 1e-12).unwrap();
            assert!((rep.limit - expect).abs() < 1e-12, "p={p} alpha={alpha}: {}", rep.limit);
            assert!(rep.tail_spread < 1e-14);
            assert!(rep.bracket.0 <= rep.limit + 1e-12 && rep.limit <= rep.bracket.1 + 1e-12);
        }
    }

    #[test]
    fn golden_mean_constant_root_is_half_entropy() {
        let space = golden();
        let pot = Potential::constant(1.0).unwrap();
        let levels: Vec<usize> = (1..=22).collect();
        let rep = bowen_root(&space, &ALL, &pot, &levels, 1e-12).unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((rep.limit - phi.ln() / 2.0).abs() < 1e-9, "limit {}", rep.limit);
        // Raw deepest-level value still carries O(1/n) bias.
        let raw = rep.per_level.last().unwrap().s;
        assert!((raw - phi.ln() / 2.0).abs() > 1e-3);
    }

    #[test]
    fn birkhoff_depth1_is_fully_determined() {
        let space = golden();
        let pot = depth1(&space, 0.25, 1.5);
        let (inf, sup) = birkhoff_bounds(&space, &pot, w("010").symbols()).unwrap();
        assert_eq!(inf, sup);
        assert!((inf - (0.25 + 1.5 + 0.25)).abs() < 1e-15);
        assert_eq!(birkhoff_sup(&space, &pot, w("010").symbols()).unwrap(), sup);
        assert_eq!(birkhoff_inf(&space, &pot, w("010").symbols()).unwrap(), inf);
    }

    #[test]
    fn birkhoff_depth2_optimizes_over_extensions() {
        let space = golden();
        let mut t = BTreeMap::new();
        t.insert(w("00"), 1.0);
        t.insert(w("01"), 2.0);
        t.insert(w("10"), 4.0);
        // 11 is inadmissible: exactly the admissible windows are covered.
        let pot = Potential::from_table(&space, 2, &t).unwrap();

        // After 01 only 0 can follow: both terms forced.
        let (inf, sup) = birkhoff_bounds(&space, &pot, w("01").symbols()).unwrap();
        assert_eq!((inf, sup), (2.0 + 4.0, 2.0 + 4.0));

        // After 00 either 0 or 1 follows: the second term ranges over
        // {f(00), f(01)} = {1, 2}.
        let (inf, sup) = birkhoff_bounds(&space, &pot, w("00").symbols()).unwrap();
        assert_eq!((inf, sup), (1.0 + 1.0, 1.0 + 2.0));
    }

    #[test]
    fn potential_table_must_cover_language_exactly() {
        let space = golden();
        let mut missing = BTreeMap::new();
        missing.insert(w("00"), 1.0);
        assert!(Potential::from_table(&space, 2, &missing).is_err());

        let mut extra = BTreeMap::new();
        extra.insert(w("00"), 1.0);
        extra.insert(w("01"), 1.0);
        extra.insert(w("10"), 1.0);
        extra.insert(w("11"), 1.0);
        assert!(Potential::from_table(&space, 2, &extra).is_err());
    }

    #[test]
    fn potentials_must_be_strictly_positive() {
        assert!(Potential::constant(0.0).is_err());
        assert!(Potential::constant(-1.5).is_err());
        assert!(Potential::constant(f64::NAN).is_err());
        let space = golden();
        let mut t = BTreeMap::new();
        t.insert(w("0"), 1.0);
        t.insert(w("1"), 0.0);
        assert!(Potential::from_table(&space, 1, &t).is_err());
    }

    #[test]
    fn histogram_single_bin_for_constant_potential() {
        let space = ShiftSpace::full(2).unwrap();
        let pot = Potential::constant(1.0).unwrap();
        let hist = level_histogram(&space, &pot, 3, &ALL).unwrap();
        assert_eq!(hist.count, 8);
        let bins: Vec<(f64, u64)> = hist.bins().collect();
        assert_eq!(bins, vec![(6.0, 8)]);
    }

    #[test]
    fn partition_sum_closed_form_and_root() {
        // Full 2-shift, f = 1: log Lambda_n(s) = n (log 2 - 2 s).
        let space = ShiftSpace::full(2).unwrap();
        let pot = Potential::constant(1.0).unwrap();
        for (s, n) in [(0.1, 4usize), (0.5, 7), (1.0, 3)] {
            let got = partition_sum(&space, &ALL, &pot, s, n).unwrap();
            let expect = n as f64 * (2.0f64.ln() - 2.0 * s);
            assert!((got - expect).abs() < 1e-12);
        }
        // Vanishes at the root s = log2/2 (n = 7).
        let at_root = partition_sum(&space, &ALL, &pot, 0.5 * 2.0f64.ln(), 7).unwrap();
        assert!(at_root.abs() < 1e-12);
        // Golden mean, s = 0, n = 4: log #L_4 = log 8.
        let g = partition_sum(&golden(), &ALL, &pot, 0.0, 4).unwrap();
        assert!((g - 8.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn solver_matches_grid_scan_oracle() {
        // Depth-1 potential on the full 2-shift; independent fine grid scan.
        let space = ShiftSpace::full(2).unwrap();
        let pot = depth1(&space, 0.5, 1.5);
        let n = 6;
        let hist = level_histogram(&space, &pot, n, &ALL).unwrap();
        let sol = solve_on_histogram(&hist, 1e-13).unwrap();

        let phi = |s: f64| partition_log_sum(&hist, s);
        let mut scan = None;
        let mut s = 0.0;
        while s < 2.0 {
            if phi(s) >= 0.0 && phi(s + 1e-6) < 0.0 {
                scan = Some(s);
                break;
            }
            s += 1e-6;
        }
        let scan = scan.expect("scan finds the crossing");
        assert!((sol.s - scan).abs() <= 2e-6, "solver {} scan {}", sol.s, scan);
        assert!(sol.residual.abs() <= 1e-13 * n as f64);
        assert!(sol.bracket.0 <= sol.s && sol.s <= sol.bracket.1);
        // Norm-based bracket contains the solution too.
        let log_n = (sol.count as f64).ln();
        assert!(sol.s >= log_n / (n as f64 * 2.5) - 1e-12);
        assert!(sol.s <= log_n / (n as f64 * 1.5) + 1e-12);
    }

    #[test]
    fn partition_sum_is_strictly_decreasing_in_s() {
        let space = golden();
        let pot = depth1(&space, 0.5, 2.0);
        let hist = level_histogram(&space, &pot, 8, &ALL).unwrap();
        let mut prev = partition_log_sum(&hist, 0.0);
        for i in 1..=20 {
            let cur = partition_log_sum(&hist, i as f64 * 0.05);
            assert!(cur < prev);
            prev = cur;
        }
    }

    #[test]
    fn golden_mean_entropy_estimate_hits_log_phi() {
        let rep = entropy_estimate(&golden(), &ALL, 28).unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((rep.estimate - phi.ln()).abs() < 1e-9, "estimate {}", rep.estimate);
        assert!(rep.finite_horizon);
        // Raw per-level quotients still carry the O(1/n) bias.
        assert!((rep.per_level[0].value - phi.ln()).abs() > 1e-3);
    }

    #[test]
    fn full_shift_entropy_is_exact_at_every_level() {
        let rep = entropy_estimate(&ShiftSpace::full(3).unwrap(), &ALL, 12).unwrap();
        for s in &rep.slopes {
            assert!((s - 3.0f64.ln()).abs() < 1e-13);
        }
        assert!((rep.estimate - 3.0f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn even_sgap_entropy_also_hits_log_phi() {
        // Interior 0-runs of even length: growth is again golden-ratio.
        let space =
            ShiftSpace::sgap(SGapSet::new([], Some(GapTail::Arith { a: 0, d: 2 })).unwrap())
                .unwrap();
        let rep = entropy_estimate(&space, &ALL, 30).unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((rep.estimate - phi.ln()).abs() < 1e-2, "estimate {}", rep.estimate);
    }

    #[test]
    fn pressure_at_zero_is_entropy() {
        let space = golden();
        let pot = Potential::constant(1.0).unwrap();
        let levels: Vec<usize> = (2..=16).collect();
        let pres = pressure_estimate(&space, &ALL, &pot, 0.0, &levels).unwrap();
        let ent = entropy_estimate(&space, &ALL, 16).unwrap();
        for lp in &pres.per_level {
            let le = ent.per_level.iter().find(|l| l.n == lp.n).unwrap();
            assert!((lp.log_sum - le.log_count).abs() < 1e-12);
        }
        assert_eq!(pres.direction, "limsup");
    }

    #[test]
    fn filtered_levels_solve_below_the_full_language() {
        // Ends-with-0 slice of the golden-mean shift: count #L_9 = 89 versus
        // #L_10 = 144; with f = 1 both levels are single-bin and exact.
        let space = golden();
        let pot = Potential::constant(1.0).unwrap();
        let ends0: WordPredicate = "ends-with:0".parse().unwrap();
        let s_full = solve_sn(&space, &ALL, &pot, 10, 1e-12).unwrap();
        let s_slice = solve_sn(&space, &ends0, &pot, 10, 1e-12).unwrap();
        assert_eq!(s_full.count, 144);
        assert_eq!(s_slice.count, 89);
        assert!((s_full.s - (144f64.ln() / 20.0)).abs() < 1e-15);
        assert!((s_slice.s - (89f64.ln() / 20.0)).abs() < 1e-15);
        assert!(s_slice.s < s_full.s);
    }

    #[test]
    fn slice_and_language_roots_agree_in_the_tail() {
        // The ends-with-0 family on the golden-mean shift is freely
        // concatenable and edit-approachable; its Bowen levels must track
        // the whole-language levels within the joint spread.
        let space = golden();
        let pot = Potential::constant(1.0).unwrap();
        let levels: Vec<usize> = (2..=22).collect();
        let full = bowen_root(&space, &ALL, &pot, &levels, 1e-12).unwrap();
        let ends0: WordPredicate = "ends-with:0".parse().unwrap();
        let slice = bowen_root(&space, &ends0, &pot, &levels, 1e-12).unwrap();
        let spread = full.tail_spread + slice.tail_spread + 1e-9;
        assert!(
            (full.limit - slice.limit).abs() <= spread,
            "full {} slice {} spread {}",
            full.limit,
            slice.limit,
            spread
        );
    }

    #[test]
    fn empty_level_is_an_error() {
        let space = golden();
        let pot = Potential::constant(1.0).unwrap();
        // Suffix pattern longer than the level: no matches.
        let never: WordPredicate = "ends-with:000000".parse().unwrap();
        assert!(matches!(
            solve_sn(&space, &never, &pot, 5, 1e-12),
            Err(Error::EmptyLevel(_))
        ));
        assert!(matches!(
            partition_sum(&space, &never, &pot, 0.3, 5),
            Err(Error::EmptyLevel(_))
        ));
    }

    #[test]
    fn level_validation() {
        let space = ShiftSpace::full(2).unwrap();
        let pot = Potential::constant(1.0).unwrap();
        assert!(entropy_estimate(&space, &ALL, 1).is_err());
        assert!(bowen_root(&space, &ALL, &pot, &[], 1e-10).is_err());
        assert!(bowen_root(&space, &ALL, &pot, &[0, 1], 1e-10).is_err());
        assert!(bowen_root(&space, &ALL, &pot, &[3, 3], 1e-10).is_err());
    }
}
