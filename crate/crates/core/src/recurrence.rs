//! Dimension computations for shrinking-target recurrence sets.
//!
//! Two families of sets are handled, both inside a shift space with metric
//! `d(x, y) = exp(-common prefix length)`:
//!
//! * `R(psi)`: points `x` with `d(shift^n x, x) < psi(n)` infinitely often,
//!   for a gauge `psi`. When `liminf psi > 0` the set has full dimension
//!   `h`; when `psi` is nonincreasing the dimension is `h / (1 + b)` with
//!   `b = liminf -log(psi(n)) / n` the recurrence exponent. Other gauges
//!   are refused: no theorem covers them.
//! * `R(f)`: points with `d(shift^n x, x) < exp(-S_n f(x))` infinitely
//!   often, for a strictly positive potential `f`. The dimension is the
//!   root of the Bowen equation `P(-s(f+1)) = 0`, estimated per level and
//!   extrapolated.
//!
//! Cover-sum audits provide independent numerical evidence: the natural
//! cover of the recurrence set at scale `n` has `s`-volume that decays for
//! `s` above the dimension and grows below it.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::numerics::{tail_median, tail_start, LogSumExp};
use crate::shifts::ShiftSpace;
use crate::structure::WordPredicate;
use crate::thermo::{
    bowen_root, collection_count, entropy_estimate, level_histogram, partition_log_sum,
    BowenSolution, EntropyReport, LevelHistogram, Potential,
};
use crate::Result;

/// Gauge functions `psi : {1, 2, ...} -> (0, infinity)` in the closed
/// forms the dimension theory distinguishes, plus finite tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PsiForm {
    /// `psi(n) = exp(-alpha n)`.
    Exponential { alpha: f64 },
    /// `psi(n) = c n^(-kappa)`, `c > 0`.
    Polynomial { c: f64, kappa: f64 },
    /// `psi(n) = c n^(-kappa) exp(-alpha n)`, `c > 0`.
    Product { c: f64, kappa: f64, alpha: f64 },
    /// Explicit values `psi(1), ..., psi(len)`.
    Table { values: Vec<f64> },
}

/// A validated gauge function. Values are always handled in log space, so
/// deep arguments never underflow.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct PsiFunction {
    form: PsiForm,
}

impl PsiFunction {
    pub fn new(form: PsiForm) -> Result<Self> {
        match &form {
            PsiForm::Exponential { alpha } => {
                if !alpha.is_finite() {
                    return Err(Error::InvalidInput("exponential rate must be finite".into()));
                }
            }
            PsiForm::Polynomial { c, kappa } | PsiForm::Product { c, kappa, .. } => {
                if !c.is_finite() || *c <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "gauge scale {c} must be finite and positive"
                    )));
                }
                if !kappa.is_finite() {
                    return Err(Error::InvalidInput("gauge power must be finite".into()));
                }
                if let PsiForm::Product { alpha, .. } = &form {
                    if !alpha.is_finite() {
                        return Err(Error::InvalidInput("gauge rate must be finite".into()));
                    }
                }
            }
            PsiForm::Table { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidInput("gauge table is empty".into()));
                }
                if let Some(v) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "gauge table value {v} must be finite and positive"
                    )));
                }
            }
        }
        Ok(PsiFunction { form })
    }

    pub fn exponential(alpha: f64) -> Result<Self> {
        Self::new(PsiForm::Exponential { alpha })
    }

    pub fn polynomial(c: f64, kappa: f64) -> Result<Self> {
        Self::new(PsiForm::Polynomial { c, kappa })
    }

    pub fn product(c: f64, kappa: f64, alpha: f64) -> Result<Self> {
        Self::new(PsiForm::Product { c, kappa, alpha })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        Self::new(PsiForm::Table { values })
    }

    pub fn form(&self) -> &PsiForm {
        &self.form
    }

    /// `log psi(n)`, `n >= 1`. Tables fail past their horizon.
    pub fn log_value(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidInput("gauges are indexed from 1".into()));
        }
        let x = n as f64;
        Ok(match &self.form {
            PsiForm::Exponential { alpha } => -alpha * x,
            PsiForm::Polynomial { c, kappa } => c.ln() - kappa * x.ln(),
            PsiForm::Product { c, kappa, alpha } => c.ln() - kappa * x.ln() - alpha * x,
            PsiForm::Table { values } => {
                let Some(v) = values.get(n as usize - 1) else {
                    return Err(Error::PrecisionExhausted(format!(
                        "gauge table covers n <= {}, requested {n}",
                        values.len()
                    )));
                };
                v.ln()
            }
        })
    }

    /// `-log psi(n)`: the quantity whose linear growth rate is the
    /// recurrence exponent.
    pub fn neg_log(&self, n: u64) -> Result<f64> {
        self.log_value(n).map(|v| -v)
    }

    /// Whether `psi(n+1) <= psi(n)` for all `n >= 1`; analytic for closed
    /// forms, literal for tables.
    pub fn is_nonincreasing(&self) -> bool {
        match &self.form {
            PsiForm::Exponential { alpha } => *alpha >= 0.0,
            PsiForm::Polynomial { kappa, .. } => *kappa >= 0.0,
            // The ratio psi(n+1)/psi(n) = ((n+1)/n)^(-kappa) e^(-alpha) is
            // <= 1 iff kappa log(1+1/n) + alpha >= 0; for kappa >= 0 the
            // binding case is n -> infinity, for kappa < 0 it is n = 1.
            PsiForm::Product { kappa, alpha, .. } => {
                if *kappa >= 0.0 {
                    *alpha >= 0.0
                } else {
                    kappa * std::f64::consts::LN_2 + alpha >= 0.0
                }
            }
            PsiForm::Table { values } => values.windows(2).all(|w| w[1] <= w[0]),
        }
    }

    /// Whether `liminf psi(n) > 0`, when decidable. Finite tables carry no
    /// information about the liminf, hence `None`.
    pub fn liminf_positive(&self) -> Option<bool> {
        match &self.form {
            PsiForm::Exponential { alpha } => Some(*alpha <= 0.0),
            PsiForm::Polynomial { kappa, .. } => Some(*kappa <= 0.0),
            PsiForm::Product { kappa, alpha, .. } => {
                Some(*alpha < 0.0 || (*alpha == 0.0 && *kappa <= 0.0))
            }
            PsiForm::Table { .. } => None,
        }
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        match &self.form {
            PsiForm::Exponential { alpha } => format!("psi(n) = exp(-{alpha} n)"),
            PsiForm::Polynomial { c, kappa } => format!("psi(n) = {c} n^(-{kappa})"),
            PsiForm::Product { c, kappa, alpha } => {
                format!("psi(n) = {c} n^(-{kappa}) exp(-{alpha} n)")
            }
            PsiForm::Table { values } => format!("psi table with {} entries", values.len()),
        }
    }
}

/// The recurrence exponent `b = liminf -log(psi(n)) / n`.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentEstimate {
    pub b: f64,
    /// True when `b` is the exact closed-form limit; false for table
    /// gauges, where `b` is a finite-window minimum.
    pub analytic: bool,
    /// Table gauges: the `n`-window the minimum was taken over.
    pub tail_window: Option<(u64, u64)>,
}

/// Computes the recurrence exponent of a gauge. Closed forms are exact
/// (`exp(-alpha n) -> alpha`, powers of `n` -> 0, products -> the
/// exponential rate); tables give a tail-window minimum of
/// `-log(psi(n))/n`, flagged as finite evidence.
pub fn recurrence_exponent(psi: &PsiFunction, horizon: usize) -> Result<ExponentEstimate> {
    match psi.form() {
        PsiForm::Exponential { alpha } | PsiForm::Product { alpha, .. } => {
            Ok(ExponentEstimate { b: *alpha, analytic: true, tail_window: None })
        }
        PsiForm::Polynomial { .. } => {
            Ok(ExponentEstimate { b: 0.0, analytic: true, tail_window: None })
        }
        PsiForm::Table { values } => {
            let end = values.len().min(horizon.max(1));
            let start = tail_start(end, 0.3) + 1; // 1-indexed n
            let mut b = f64::INFINITY;
            for n in start..=end {
                b = b.min(psi.neg_log(n as u64)? / n as f64);
            }
            Ok(ExponentEstimate {
                b,
                analytic: false,
                tail_window: Some((start as u64, end as u64)),
            })
        }
    }
}

/// Dimension report for a recurrence set.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionReport {
    /// Which set: "R(psi)" or "R(f)".
    pub set: String,
    pub space: String,
    /// Which hypothesis branch produced the answer: "liminf-positive"
    /// (full dimension), "nonincreasing" (`h / (1 + b)`), or "bowen".
    pub branch: String,
    pub entropy: Option<EntropyReport>,
    pub exponent: Option<ExponentEstimate>,
    /// The exponent actually used in the quotient (clamped at 0: a
    /// nonincreasing gauge has true `b >= 0` even when a short table
    /// estimates it below).
    pub b_used: Option<f64>,
    pub bowen: Option<BowenSolution>,
    pub dimension: f64,
    pub finite_horizon: bool,
}

/// Dimension of `R(psi)`: full dimension when `liminf psi > 0`, else
/// `h / (1 + b)` for nonincreasing `psi`; anything else is refused since
/// no hypothesis covers it (non-monotone gauges vanishing along a
/// subsequence have no general formula).
pub fn dimension_r_psi(
    space: &ShiftSpace,
    psi: &PsiFunction,
    horizon: usize,
) -> Result<DimensionReport> {
    let entropy = entropy_estimate(space, &WordPredicate::All, horizon)?;
    let h = entropy.estimate;
    if psi.liminf_positive() == Some(true) {
        let exponent = recurrence_exponent(psi, horizon).ok();
        return Ok(DimensionReport {
            set: "R(psi)".into(),
            space: space.description().to_string(),
            branch: "liminf-positive".into(),
            entropy: Some(entropy),
            exponent,
            b_used: None,
            bowen: None,
            dimension: h,
            finite_horizon: true,
        });
    }
    if !psi.is_nonincreasing() {
        return Err(Error::HypothesisViolated(format!(
            "{} is neither bounded below nor nonincreasing; no dimension formula applies",
            psi.describe()
        )));
    }
    let exponent = recurrence_exponent(psi, horizon)?;
    let b_used = exponent.b.max(0.0);
    let dimension = h / (1.0 + b_used);
    debug_assert!(dimension >= 0.0 && dimension <= h + 1e-12);
    Ok(DimensionReport {
        set: "R(psi)".into(),
        space: space.description().to_string(),
        branch: "nonincreasing".into(),
        entropy: Some(entropy),
        exponent: Some(exponent),
        b_used: Some(b_used),
        bowen: None,
        dimension,
        finite_horizon: true,
    })
}

/// Dimension of `R(f)`: the extrapolated root of the Bowen equation
/// `P(-s(f+1)) = 0` over the scheduled levels.
pub fn dimension_r_f(
    space: &ShiftSpace,
    pot: &Potential,
    n_schedule: &[usize],
    tol: f64,
) -> Result<DimensionReport> {
    let bowen = bowen_root(space, &WordPredicate::All, pot, n_schedule, tol)?;
    let dimension = bowen.limit;
    debug_assert!(dimension >= -1e-12);
    Ok(DimensionReport {
        set: "R(f)".into(),
        space: space.description().to_string(),
        branch: "bowen".into(),
        entropy: None,
        exponent: None,
        b_used: None,
        bowen: Some(bowen),
        dimension,
        finite_horizon: true,
    })
}

/// What a cover-sum audit measures the `s`-volume of.
pub enum CoverTarget<'a> {
    /// Cylinders `[w]`, `w` a level-`n` word, shrunk to diameter
    /// `exp(-n) psi(n)`.
    Psi(&'a PsiFunction),
    /// Cylinders shrunk to diameter `exp(-n - S_n f)` (potential-weighted).
    Potential(&'a Potential),
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverTermRow {
    pub n: usize,
    /// `log` of the level-`n` cover sum.
    pub log_term: f64,
    /// Per-symbol growth rate against the previous row.
    pub log_ratio: Option<f64>,
    /// `log` of the cumulative sum of the terms so far.
    pub log_partial_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverVerdict {
    /// Tail terms shrink geometrically: `s` is at or above the dimension.
    Decay,
    /// Tail terms grow: `s` is below the dimension.
    Growth,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverAudit {
    pub s: f64,
    pub rows: Vec<CoverTermRow>,
    /// Tail median of the per-symbol growth rates.
    pub tail_log_ratio: f64,
    pub verdict: CoverVerdict,
}

/// Dead band around zero growth inside which an audit stays inconclusive.
const RATE_DEAD_BAND: f64 = 1e-9;

/// Per-level data from which cover terms at any `s` are cheap.
enum CachedCover {
    /// `(n, log #L_n, log psi(n) - n)`: term = `log#L + s * coefficient`.
    Psi(Vec<(usize, f64, f64)>),
    /// `(n, histogram)`: term = `log Lambda_n(s)`.
    Potential(Vec<(usize, LevelHistogram)>),
}

impl CachedCover {
    fn build(space: &ShiftSpace, target: &CoverTarget, levels: &[usize]) -> Result<Self> {
        match target {
            CoverTarget::Psi(psi) => {
                let mut rows = Vec::with_capacity(levels.len());
                for &n in levels {
                    let count = collection_count(space, &WordPredicate::All, n)?;
                    let coeff = psi.log_value(n as u64)? - n as f64;
                    rows.push((n, (count as f64).ln(), coeff));
                }
                Ok(CachedCover::Psi(rows))
            }
            CoverTarget::Potential(pot) => {
                let mut rows = Vec::with_capacity(levels.len());
                for &n in levels {
                    let hist = level_histogram(space, pot, n, &WordPredicate::All)?;
                    if hist.count == 0 {
                        return Err(Error::EmptyLevel(format!("level {n} is empty")));
                    }
                    rows.push((n, hist));
                }
                Ok(CachedCover::Potential(rows))
            }
        }
    }

    fn terms(&self, s: f64) -> Vec<(usize, f64)> {
        match self {
            CachedCover::Psi(rows) => {
                rows.iter().map(|&(n, log_count, coeff)| (n, log_count + s * coeff)).collect()
            }
            CachedCover::Potential(rows) => {
                rows.iter().map(|(n, hist)| (*n, partition_log_sum(hist, s))).collect()
            }
        }
    }
}

fn audit_from_terms(s: f64, terms: &[(usize, f64)]) -> CoverAudit {
    let mut rows = Vec::with_capacity(terms.len());
    let mut lse = LogSumExp::new();
    for (i, &(n, log_term)) in terms.iter().enumerate() {
        lse.push(log_term);
        let log_ratio = (i > 0).then(|| {
            let (pn, pt) = terms[i - 1];
            (log_term - pt) / (n - pn) as f64
        });
        rows.push(CoverTermRow { n, log_term, log_ratio, log_partial_sum: lse.value() });
    }
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.log_ratio).collect();
    let tail_log_ratio = tail_median(&ratios).unwrap_or(0.0);
    let verdict = if ratios.is_empty() || tail_log_ratio.abs() <= RATE_DEAD_BAND {
        CoverVerdict::Inconclusive
    } else if tail_log_ratio < 0.0 {
        CoverVerdict::Decay
    } else {
        CoverVerdict::Growth
    };
    CoverAudit { s, rows, tail_log_ratio, verdict }
}

/// Tabulates the level-`n` cover sums of the recurrence set at exponent
/// `s`, with per-level growth rates, cumulative partial sums, and a
/// decay/growth verdict from the tail.
pub fn cover_sum_audit(
    space: &ShiftSpace,
    target: &CoverTarget,
    s: f64,
    levels: &[usize],
) -> Result<CoverAudit> {
    check_audit_levels(levels)?;
    let cached = CachedCover::build(space, target, levels)?;
    Ok(audit_from_terms(s, &cached.terms(s)))
}

/// A bracket of grid points where the cover sums turn from growth to
/// decay; the dimension lies within it.
#[derive(Debug, Clone, Serialize)]
pub struct CoverCrossing {
    pub s_below: f64,
    pub s_above: f64,
    pub grid_step: f64,
}

/// Scans `s` over the grid `s_lo, s_lo + step, ..., <= s_hi` and brackets
/// the growth-to-decay crossing of the cover sums. Returns `None` when
/// every grid point gives the same verdict.
pub fn cover_crossing_scan(
    space: &ShiftSpace,
    target: &CoverTarget,
    s_lo: f64,
    s_hi: f64,
    step: f64,
    levels: &[usize],
) -> Result<Option<CoverCrossing>> {
    let valid_grid = step > 0.0 && s_hi > s_lo;
    if !valid_grid {
        return Err(Error::InvalidInput("need s_lo < s_hi and a positive grid step".into()));
    }
    check_audit_levels(levels)?;
    let cached = CachedCover::build(space, target, levels)?;
    let mut prev: Option<(f64, CoverVerdict)> = None;
    let steps = ((s_hi - s_lo) / step).round() as usize;
    for k in 0..=steps {
        let s = s_lo + k as f64 * step;
        let verdict = audit_from_terms(s, &cached.terms(s)).verdict;
        if let Some((ps, pv)) = prev {
            if pv != CoverVerdict::Decay && verdict == CoverVerdict::Decay {
                return Ok(Some(CoverCrossing { s_below: ps, s_above: s, grid_step: step }));
            }
        }
        prev = Some((s, verdict));
    }
    Ok(None)
}

fn check_audit_levels(levels: &[usize]) -> Result<()> {
    if levels.len() < 2 {
        return Err(Error::InvalidInput("cover audits need at least two levels".into()));
    }
    if levels[0] == 0 || levels.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidInput("levels must be strictly increasing from 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Word;

    fn golden() -> ShiftSpace {
        ShiftSpace::forbidden(2, &["11".parse::<Word>().unwrap()]).unwrap()
    }

    fn log_phi() -> f64 {
        ((1.0 + 5.0f64.sqrt()) / 2.0).ln()
    }

    #[test]
    fn exponent_closed_forms() {
        for alpha in [0.5, 1.0, 2.0, 0.0, -1.0] {
            let e = recurrence_exponent(&PsiFunction::exponential(alpha).unwrap(), 10).unwrap();
            assert_eq!(e.b, alpha);
            assert!(e.analytic);
        }
        let poly = recurrence_exponent(&PsiFunction::polynomial(5.0, 2.0).unwrap(), 10).unwrap();
        assert_eq!(poly.b, 0.0);
        // 5 n^2 e^{-n}: eventually nonincreasing, exponent is the
        // exponential rate.
        let prod =
            recurrence_exponent(&PsiFunction::product(5.0, -2.0, 1.0).unwrap(), 10).unwrap();
        assert_eq!(prod.b, 1.0);
        assert!(prod.analytic);
    }

    #[test]
    fn exponent_from_table_is_tail_minimum() {
        let values: Vec<f64> = (1..=40).map(|n| (-1.5 * n as f64).exp()).collect();
        let psi = PsiFunction::table(values).unwrap();
        let e = recurrence_exponent(&psi, 40).unwrap();
        assert!(!e.analytic);
        assert_eq!(e.tail_window, Some((29, 40)));
        assert!((e.b - 1.5).abs() < 1e-12, "b = {}", e.b);
    }

    #[test]
    fn gauge_validation() {
        assert!(PsiFunction::polynomial(0.0, 1.0).is_err());
        assert!(PsiFunction::polynomial(-2.0, 1.0).is_err());
        assert!(PsiFunction::product(1.0, 1.0, f64::NAN).is_err());
        assert!(PsiFunction::table(vec![]).is_err());
        assert!(PsiFunction::table(vec![0.5, 0.0]).is_err());
        assert!(PsiFunction::table(vec![0.5, -0.1]).is_err());
        let t = PsiFunction::table(vec![0.5, 0.25]).unwrap();
        assert!(t.log_value(3).is_err());
        assert!(t.log_value(0).is_err());
    }

    #[test]
    fn monotonicity_classification() {
        assert!(PsiFunction::exponential(1.0).unwrap().is_nonincreasing());
        assert!(PsiFunction::exponential(0.0).unwrap().is_nonincreasing());
        assert!(!PsiFunction::exponential(-0.5).unwrap().is_nonincreasing());
        assert!(PsiFunction::polynomial(3.0, 2.0).unwrap().is_nonincreasing());
        // 5 n^2 e^{-n} increases from n = 1 to 2 (ratio 4/e > 1).
        assert!(!PsiFunction::product(5.0, -2.0, 1.0).unwrap().is_nonincreasing());
        // n^2 e^{-2n} decreases from the start (ratio 4/e^2 < 1).
        assert!(PsiFunction::product(1.0, -2.0, 2.0).unwrap().is_nonincreasing());
        assert!(PsiFunction::table(vec![1.0, 0.5, 0.5]).unwrap().is_nonincreasing());
        assert!(!PsiFunction::table(vec![1.0, 0.5, 0.6]).unwrap().is_nonincreasing());
    }

    #[test]
    fn full_shift_exponential_gauge_closed_form() {
        // Full 2-shift, psi = e^{-2n}: dimension log2 / 3, every slope
        // exact.
        let space = ShiftSpace::full(2).unwrap();
        let psi = PsiFunction::exponential(2.0).unwrap();
        let rep = dimension_r_psi(&space, &psi, 12).unwrap();
        assert_eq!(rep.branch, "nonincreasing");
        assert!((rep.dimension - 2.0f64.ln() / 3.0).abs() < 1e-13, "dim {}", rep.dimension);
    }

    #[test]
    fn bounded_below_gauge_gives_full_dimension() {
        // psi = 1/2: liminf positive, dimension = entropy.
        let space = golden();
        let psi = PsiFunction::polynomial(0.5, 0.0).unwrap();
        let rep = dimension_r_psi(&space, &psi, 26).unwrap();
        assert_eq!(rep.branch, "liminf-positive");
        assert!((rep.dimension - log_phi()).abs() < 1e-9, "dim {}", rep.dimension);
        assert!(rep.b_used.is_none());
    }

    #[test]
    fn polynomial_gauge_matches_full_dimension_branch() {
        // n^{-2} is nonincreasing with b = 0: same dimension as the
        // liminf-positive branch, through the other theorem.
        let space = golden();
        let slow = dimension_r_psi(&space, &PsiFunction::polynomial(1.0, 2.0).unwrap(), 26)
            .unwrap();
        let fat = dimension_r_psi(&space, &PsiFunction::polynomial(0.5, 0.0).unwrap(), 26)
            .unwrap();
        assert_eq!(slow.branch, "nonincreasing");
        assert_eq!(slow.b_used, Some(0.0));
        assert_eq!(slow.dimension, fat.dimension);
    }

    #[test]
    fn dimension_is_monotone_in_the_gauge() {
        let space = golden();
        let d2 = dimension_r_psi(&space, &PsiFunction::exponential(2.0).unwrap(), 20)
            .unwrap()
            .dimension;
        let d1 = dimension_r_psi(&space, &PsiFunction::exponential(1.0).unwrap(), 20)
            .unwrap()
            .dimension;
        let d0 = dimension_r_psi(&space, &PsiFunction::polynomial(1.0, 2.0).unwrap(), 20)
            .unwrap()
            .dimension;
        assert!(d2 < d1 && d1 < d0, "{d2} {d1} {d0}");
        assert!((d1 - d0 / 2.0).abs() < 1e-12);
        assert!((d2 - d0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn uncovered_gauges_are_refused() {
        let space = ShiftSpace::full(2).unwrap();
        // 5 n^2 e^{-n}: liminf 0 but not nonincreasing.
        let psi = PsiFunction::product(5.0, -2.0, 1.0).unwrap();
        assert!(matches!(
            dimension_r_psi(&space, &psi, 10),
            Err(Error::HypothesisViolated(_))
        ));
        // A table that wiggles upward is likewise refused.
        let tab = PsiFunction::table(vec![0.5, 0.25, 0.3, 0.1]).unwrap();
        assert!(matches!(
            dimension_r_psi(&space, &tab, 4),
            Err(Error::HypothesisViolated(_))
        ));
        // But a growing closed form is fine: liminf positive.
        let grow = PsiFunction::exponential(-1.0).unwrap();
        assert_eq!(dimension_r_psi(&space, &grow, 10).unwrap().branch, "liminf-positive");
    }

    #[test]
    fn nonincreasing_table_gauge_uses_clamped_tail_exponent() {
        let values: Vec<f64> = (1..=30).map(|n| (-(n as f64)).exp()).collect();
        let psi = PsiFunction::table(values).unwrap();
        let space = ShiftSpace::full(2).unwrap();
        let rep = dimension_r_psi(&space, &psi, 30).unwrap();
        assert_eq!(rep.branch, "nonincreasing");
        assert!((rep.dimension - 2.0f64.ln() / 2.0).abs() < 1e-12);
        assert!(!rep.exponent.as_ref().unwrap().analytic);
    }

    #[test]
    fn bowen_dimension_for_constant_potential() {
        let space = ShiftSpace::full(2).unwrap();
        let pot = Potential::constant(1.0).unwrap();
        let levels: Vec<usize> = (1..=10).collect();
        let rep = dimension_r_f(&space, &pot, &levels, 1e-12).unwrap();
        assert_eq!(rep.branch, "bowen");
        assert!((rep.dimension - 2.0f64.ln() / 2.0).abs() < 1e-12);
        assert!(rep.bowen.is_some());
    }

    #[test]
    fn the_two_theorems_agree_on_constant_targets() {
        // d(shift^n x, x) < e^{-alpha n} both as a gauge and as the
        // constant potential f = alpha: the dimensions must match.
        let space = golden();
        let levels: Vec<usize> = (1..=18).collect();
        for alpha in [0.5, 1.0, 2.0] {
            let via_psi =
                dimension_r_psi(&space, &PsiFunction::exponential(alpha).unwrap(), 18)
                    .unwrap()
                    .dimension;
            let via_f = dimension_r_f(
                &space,
                &Potential::constant(alpha).unwrap(),
                &levels,
                1e-12,
            )
            .unwrap()
            .dimension;
            assert!(
                (via_psi - via_f).abs() < 1e-6,
                "alpha {alpha}: psi {via_psi} f {via_f}"
            );
        }
    }

    #[test]
    fn cover_sums_have_exact_rates_on_the_full_shift() {
        // Full 2-shift, psi = e^{-2n}: log T_n = n(log2 - 3s), so every
        // consecutive rate equals log2 - 3s.
        let space = ShiftSpace::full(2).unwrap();
        let psi = PsiFunction::exponential(2.0).unwrap();
        let levels: Vec<usize> = (1..=14).collect();
        for s in [0.2, 0.3] {
            let audit =
                cover_sum_audit(&space, &CoverTarget::Psi(&psi), s, &levels).unwrap();
            let expect = 2.0f64.ln() - 3.0 * s;
            for r in audit.rows.iter().skip(1) {
                assert!((r.log_ratio.unwrap() - expect).abs() < 1e-12);
            }
            let want =
                if expect > 0.0 { CoverVerdict::Growth } else { CoverVerdict::Decay };
            assert_eq!(audit.verdict, want);
        }
    }

    #[test]
    fn cover_crossing_brackets_the_dimension() {
        let space = ShiftSpace::full(2).unwrap();
        let levels: Vec<usize> = (1..=14).collect();

        // psi = e^{-2n}: dimension log2/3 ~ 0.2310.
        let psi = PsiFunction::exponential(2.0).unwrap();
        let cross = cover_crossing_scan(&space, &CoverTarget::Psi(&psi), 0.01, 0.99, 0.01, &levels)
            .unwrap()
            .expect("crossing found");
        let dim = 2.0f64.ln() / 3.0;
        assert!(cross.s_below < dim && dim <= cross.s_above);
        assert!((cross.s_above - cross.s_below - 0.01).abs() < 1e-12);

        // f = 1: dimension log2/2 ~ 0.3466.
        let pot = Potential::constant(1.0).unwrap();
        let cross = cover_crossing_scan(
            &space,
            &CoverTarget::Potential(&pot),
            0.01,
            0.99,
            0.01,
            &levels,
        )
        .unwrap()
        .expect("crossing found");
        let dim = 2.0f64.ln() / 2.0;
        assert!(cross.s_below < dim && dim <= cross.s_above);
    }

    #[test]
    fn partial_sums_accumulate() {
        let space = golden();
        let psi = PsiFunction::exponential(1.0).unwrap();
        let levels: Vec<usize> = (1..=8).collect();
        let audit = cover_sum_audit(&space, &CoverTarget::Psi(&psi), 0.2, &levels).unwrap();
        for pair in audit.rows.windows(2) {
            assert!(pair[1].log_partial_sum > pair[0].log_partial_sum);
            assert!(pair[1].log_partial_sum >= pair[1].log_term);
        }
    }

    #[test]
    fn audit_level_validation() {
        let space = ShiftSpace::full(2).unwrap();
        let psi = PsiFunction::exponential(1.0).unwrap();
        assert!(cover_sum_audit(&space, &CoverTarget::Psi(&psi), 0.3, &[4]).is_err());
        assert!(cover_sum_audit(&space, &CoverTarget::Psi(&psi), 0.3, &[4, 4]).is_err());
        assert!(cover_sum_audit(&space, &CoverTarget::Psi(&psi), 0.3, &[0, 4]).is_err());
    }
}
