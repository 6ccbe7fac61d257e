//! Explicit Moran subsets of recurrence sets, with supporting measures.
//!
//! The lower-bound side of the dimension computations: inside a shift
//! space, a nested family of cylinder generations is built so that every
//! point of the limit set returns close to itself at the scheduled times.
//! Levels are assembled from a block family `F` (a word collection with
//! one fixed block length `M`): a level extends each previous cylinder by
//! new blocks and then an overhang that repeats the word's own head, which
//! is exactly what forces `d(shift^n x, x) <= exp(-t)` at the level's
//! return time.
//!
//! Two variants:
//!
//! * gauge (`psi`): level `k` appends `l_k` blocks up to an aligned length
//!   `n_hat_k ~ n_k` and an overhang of `t_k ~ -log psi(n_hat_k)` symbols;
//!   the natural measure splits uniformly over block choices.
//! * potential (`f`): level `k` appends one block of length `m_k` and an
//!   overhang of `t_k ~ S_{n_k} f` symbols; the natural measure is a Gibbs
//!   split `exp(-s_k (m_k + inf S_{m_k} f))` with `s_k` solving the level
//!   Bowen equation over the block family.
//!
//! Schedules keep every defining inequality as a checked invariant, and
//! audits (mass conservation, Holder exponents of the measure, mass
//! distribution at small scales, materialized recurrence logs) turn the
//! construction into verifiable evidence.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;

use crate::error::Error;
use crate::numerics::LogSumExp;
use crate::recurrence::PsiFunction;
use crate::shifts::{Cursor, ShiftSpace};
use crate::structure::{family_slice, WordPredicate};
use crate::thermo::{birkhoff_inf, entropy_estimate, solve_sn, Potential, SnSolution};
use crate::words::{Symbol, Word};
use crate::Result;

/// Cap on total symbols stored per level (words x length).
const LEVEL_SYMBOL_BUDGET: u128 = 1 << 26;
/// Default branch budget for schedule-only builds of the potential
/// variant (which must enumerate blocks to place its return times).
const DEFAULT_F_BUDGET: u64 = 1 << 20;

/// Which recurrence set the construction sits inside.
#[derive(Debug, Clone)]
pub enum MoranVariant {
    /// `R(psi)` for a nonincreasing gauge.
    Psi(PsiFunction),
    /// `R(f)` for a strictly positive potential.
    F(Potential),
}

/// Validated construction parameters.
#[derive(Debug, Clone)]
pub struct MoranParams {
    pub space: ShiftSpace,
    pub predicate: WordPredicate,
    pub variant: MoranVariant,
    /// Block length `M`.
    pub m: u64,
    /// Density slack `eta` in (0, 1).
    pub eta: f64,
    /// Gauge variant: target length of the first level (`>= M`).
    pub n1: u64,
    /// Entropy estimate used by the block-density check.
    pub h_estimate: f64,
    /// Achieved `log #F_M / (M h)`; the gauge variant requires this to be
    /// at least `1 - eta`.
    pub block_ratio: f64,
}

impl MoranParams {
    pub fn new(
        space: ShiftSpace,
        predicate: WordPredicate,
        variant: MoranVariant,
        m: u64,
        eta: f64,
        n1: u64,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("block length M must be positive".into()));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidInput(format!("eta = {eta} must lie in (0, 1)")));
        }
        match &variant {
            MoranVariant::Psi(psi) => {
                if !psi.is_nonincreasing() {
                    return Err(Error::HypothesisViolated(
                        "the construction needs a nonincreasing gauge".into(),
                    ));
                }
                if n1 < m {
                    return Err(Error::InvalidInput(
                        "the first level must fit at least one block (n1 >= M)".into(),
                    ));
                }
            }
            MoranVariant::F(pot) => {
                if (pot.depth() as u64) > m {
                    return Err(Error::InvalidInput(format!(
                        "block length M = {m} is below the potential depth {}",
                        pot.depth()
                    )));
                }
            }
        }
        let blocks = family_slice(&space, &predicate, m as usize)?;
        if blocks.is_empty() && matches!(variant, MoranVariant::Psi(_)) {
            // The potential variant may repair an empty proposed block
            // length upward; the gauge variant draws blocks at M itself.
            return Err(Error::EmptyLevel(format!(
                "the block family has no words of length {m}"
            )));
        }
        let horizon = (2 * m as usize).clamp(12, 32);
        let h_estimate = entropy_estimate(&space, &WordPredicate::All, horizon)?.estimate;
        let log_blocks = (blocks.len() as f64).ln();
        let block_ratio =
            if h_estimate > 0.0 { log_blocks / (m as f64 * h_estimate) } else { f64::INFINITY };
        if matches!(variant, MoranVariant::Psi(_))
            && log_blocks + 1e-12 < (1.0 - eta) * m as f64 * h_estimate
        {
            return Err(Error::HypothesisViolated(format!(
                "block family too thin: log #F_M = {log_blocks:.6} < (1 - eta) M h = {:.6} \
                 (achieved ratio {block_ratio:.4})",
                (1.0 - eta) * m as f64 * h_estimate
            )));
        }
        Ok(MoranParams { space, predicate, variant, m, eta, n1, h_estimate, block_ratio })
    }
}

/// One level of a gauge-variant schedule.
#[derive(Debug, Clone, Serialize)]
pub struct PsiLevelSchedule {
    pub k: usize,
    /// Sparse target length (least admissible).
    pub n_k: u64,
    /// Block-aligned base length: previous length plus `l_k` blocks.
    pub n_hat: u64,
    /// New blocks this level.
    pub l_k: u64,
    /// `n_k - n_hat`, in `[0, M)`.
    pub i_k: u64,
    /// Least `t` with `exp(-t) < psi(n_hat)`.
    pub t_hat: u64,
    /// Overhang length: least multiple of `M` in `[t_hat, t_hat + M]`.
    pub t_k: u64,
    /// Cylinder word length `n_hat + t_k`.
    pub len: u64,
    /// Return-time ratio `r_k = (n_hat + t_k) / n_hat` as a fraction.
    pub ratio: (u64, u64),
}

/// One level of a potential-variant schedule.
#[derive(Debug, Clone, Serialize)]
pub struct FLevelSchedule {
    pub k: usize,
    /// New block length (multiple of `M`, after any gap repair).
    pub m_k: u64,
    /// Base length: previous length plus `m_k`.
    pub n_k: u64,
    /// Least `t` with `exp(-t) < exp(-max S_{n_k} f)` over the level.
    pub t_hat: u64,
    pub t_k: u64,
    /// Cylinder word length `n_k + t_k`.
    pub len: u64,
    pub ratio: (u64, u64),
    /// Largest Birkhoff sum `S_{n_k} f` over the level's base points.
    pub max_birkhoff: f64,
    /// How many `M`-steps the block-length repair advanced `m_k` because
    /// the family had no words of the proposed length.
    pub repaired: u64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum MoranSchedule {
    Psi { m: u64, levels: Vec<PsiLevelSchedule> },
    F { m: u64, levels: Vec<FLevelSchedule> },
}

impl MoranSchedule {
    pub fn depth(&self) -> usize {
        match self {
            MoranSchedule::Psi { levels, .. } => levels.len(),
            MoranSchedule::F { levels, .. } => levels.len(),
        }
    }

    /// Cylinder word length at level `k` (1-based); 0 for `k = 0`.
    pub fn len_at(&self, k: usize) -> u64 {
        if k == 0 {
            return 0;
        }
        match self {
            MoranSchedule::Psi { levels, .. } => levels[k - 1].len,
            MoranSchedule::F { levels, .. } => levels[k - 1].len,
        }
    }
}

/// One cylinder of one level.
#[derive(Debug, Clone)]
pub struct MoranCylinder {
    pub word: Word,
    /// Index into the previous level; `u32::MAX` marks the root.
    pub parent: u32,
    /// Natural log of the cylinder's measure; NaN until a measure is
    /// attached.
    pub log_mass: f64,
    end: Cursor,
}

#[derive(Debug, Clone)]
pub struct MoranLevel {
    pub k: usize,
    pub cylinders: Vec<MoranCylinder>,
    /// True when this level was subsampled rather than enumerated.
    pub sampled: bool,
}

/// Per-level measure metadata.
#[derive(Debug, Clone, Serialize)]
pub struct LevelMeasure {
    pub k: usize,
    /// Gauge variant: the common log-mass of every level-`k` cylinder.
    pub log_uniform_mass: Option<f64>,
    /// Potential variant: the level Bowen solution whose exponent prices
    /// the blocks.
    pub gibbs: Option<SnSolution>,
    /// Largest `|log sum(children) - log parent|` over parents.
    pub conservation_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MoranMeasure {
    pub tol: f64,
    pub per_level: Vec<LevelMeasure>,
}

/// A built construction: schedule plus cylinder generations, with an
/// optional supporting measure.
#[derive(Debug)]
pub struct MoranConstruction {
    pub params: MoranParams,
    pub schedule: MoranSchedule,
    pub levels: Vec<MoranLevel>,
    /// True when any level was subsampled.
    pub sampled: bool,
    pub measure: Option<MoranMeasure>,
    /// The block family `F_M`, lexicographically sorted.
    blocks_m: Vec<Word>,
}

/// Computes a schedule without retaining cylinders. The gauge variant is
/// pure arithmetic; the potential variant must enumerate levels to place
/// its return times, so it builds (exactly) and discards.
pub fn build_schedule(params: &MoranParams, levels: usize) -> Result<MoranSchedule> {
    match &params.variant {
        MoranVariant::Psi(_) => Ok(MoranSchedule::Psi {
            m: params.m,
            levels: psi_schedule(params, levels)?,
        }),
        MoranVariant::F(_) => {
            let built = MoranConstruction::build(params.clone(), levels, DEFAULT_F_BUDGET, 0)?;
            Ok(built.schedule)
        }
    }
}

fn overflow(what: &str) -> Error {
    Error::ScheduleOverflow(format!("{what} exceeds the u64 schedule range"))
}

/// Least `u64 >= x` for a nonnegative real bound (with an epsilon guard
/// so exact integers are not bumped by representation noise).
fn ceil_bound(x: f64) -> Result<u64> {
    if x <= 0.0 {
        return Ok(0);
    }
    if x >= 9.2e18 {
        return Err(overflow("a level bound"));
    }
    Ok((x - 1e-9).ceil() as u64)
}

/// Least integer `t` with `exp(-t) < v` where `v = exp(-neg_log)`; the
/// sandwich `exp(-t) < v <= exp(-t + 1)` has this unique solution.
fn t_hat_from(neg_log: f64) -> Result<u64> {
    if neg_log >= 9.2e18 {
        return Err(overflow("a return time"));
    }
    let t = neg_log.floor() as i64 + 1;
    Ok(t.max(1) as u64)
}

fn align_up(t: u64, m: u64) -> Result<u64> {
    t.checked_add(m - 1).map(|v| v / m * m).ok_or_else(|| overflow("an overhang length"))
}

fn psi_schedule(params: &MoranParams, levels: usize) -> Result<Vec<PsiLevelSchedule>> {
    let MoranVariant::Psi(psi) = &params.variant else {
        return Err(Error::InvalidInput("gauge schedule on a potential construction".into()));
    };
    if levels == 0 {
        return Err(Error::InvalidInput("need at least one level".into()));
    }
    let m = params.m;
    let mut out = Vec::with_capacity(levels);
    let mut sum_n: u64 = 0;
    let mut prev_n: u64 = 0;
    let mut prev_len: u64 = 0;
    for k in 1..=levels {
        let n_k = if k == 1 {
            params.n1
        } else {
            // Sparsity: n_k / k >= max(sum of earlier n_j, -log psi(n_{k-1})),
            // and the level must fit at least one new block.
            let by_sum = (k as u64).checked_mul(sum_n).ok_or_else(|| overflow("n_k"))?;
            let by_gauge = ceil_bound(k as f64 * psi.neg_log(prev_n)?)?;
            let by_fit = prev_len.checked_add(m).ok_or_else(|| overflow("n_k"))?;
            by_sum.max(by_gauge).max(by_fit)
        };
        let l_k = (n_k - prev_len) / m;
        debug_assert!(k == 1 || l_k >= 1);
        let n_hat = prev_len + l_k * m;
        let i_k = n_k - n_hat;
        debug_assert!(i_k < m && n_hat <= n_k && n_k <= n_hat + m);
        let neg = psi.neg_log(n_hat)?;
        if k == 1 && neg <= 0.0 {
            return Err(Error::HypothesisViolated(format!(
                "gauge is >= 1 at the first level base length {n_hat}; start deeper or \
                 shrink the gauge"
            )));
        }
        let t_hat = t_hat_from(neg)?;
        let t_k = align_up(t_hat, m)?;
        debug_assert!(t_hat <= t_k && t_k <= t_hat + m && t_k % m == 0);
        // Sandwich check: exp(-t_hat) < psi(n_hat) <= exp(-t_hat + 1),
        // with slack scaled to the magnitude (dominant at ~1e18).
        let slack = neg.abs().max(1.0) * 1e-12 + 1e-9;
        debug_assert!((t_hat as f64) + slack > neg && (t_hat as f64) - 1.0 <= neg + slack);
        let len = n_hat.checked_add(t_k).ok_or_else(|| overflow("the level length"))?;
        out.push(PsiLevelSchedule { k, n_k, n_hat, l_k, i_k, t_hat, t_k, len, ratio: (len, n_hat) });
        sum_n = sum_n.checked_add(n_k).ok_or_else(|| overflow("the length sum"))?;
        prev_n = n_k;
        prev_len = len;
    }
    Ok(out)
}

impl MoranConstruction {
    /// Builds `levels` generations of cylinders. Per level, at most
    /// `branch_budget` cylinders are kept; the gauge variant switches to
    /// seeded subsampling beyond the budget (flagged), the potential
    /// variant refuses (its schedule and measure need the full level).
    pub fn build(
        params: MoranParams,
        levels: usize,
        branch_budget: u64,
        seed: u64,
    ) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidInput("need at least one level".into()));
        }
        if branch_budget == 0 {
            return Err(Error::InvalidInput("branch budget must be positive".into()));
        }
        let blocks_m = family_slice(&params.space, &params.predicate, params.m as usize)?;
        match &params.variant {
            MoranVariant::Psi(_) => {
                let schedule = psi_schedule(&params, levels)?;
                let (built, sampled) =
                    build_psi_levels(&params, &schedule, &blocks_m, branch_budget, seed)?;
                Ok(MoranConstruction {
                    schedule: MoranSchedule::Psi { m: params.m, levels: schedule },
                    params,
                    levels: built,
                    sampled,
                    measure: None,
                    blocks_m,
                })
            }
            MoranVariant::F(_) => {
                let (schedule, built) = build_f_levels(&params, levels, branch_budget)?;
                Ok(MoranConstruction {
                    schedule: MoranSchedule::F { m: params.m, levels: schedule },
                    params,
                    levels: built,
                    sampled: false,
                    measure: None,
                    blocks_m,
                })
            }
        }
    }

    pub fn deepest(&self) -> &MoranLevel {
        self.levels.last().expect("constructions hold at least one level")
    }

    /// Attaches the natural measure. Requires exactly enumerated levels:
    /// the gauge variant splits mass uniformly over block choices, the
    /// potential variant prices blocks by the level Bowen exponent. Child
    /// masses are checked to sum back to their parent.
    pub fn attach_measure(&mut self, tol: f64) -> Result<&MoranMeasure> {
        if self.sampled {
            return Err(Error::InvalidInput(
                "measures need exactly enumerated levels; rebuild with a larger budget".into(),
            ));
        }
        let mut per_level = Vec::with_capacity(self.levels.len());
        match (&self.params.variant, self.schedule.clone()) {
            (MoranVariant::Psi(_), MoranSchedule::Psi { levels: sched, .. }) => {
                let ln_f = (self.blocks_m.len() as f64).ln();
                let mut cum = 0.0;
                for (lv, sc) in self.levels.iter_mut().zip(&sched) {
                    cum += sc.l_k as f64 * ln_f;
                    for cyl in &mut lv.cylinders {
                        cyl.log_mass = -cum;
                    }
                    per_level.push(LevelMeasure {
                        k: lv.k,
                        log_uniform_mass: Some(-cum),
                        gibbs: None,
                        conservation_residual: 0.0,
                    });
                }
            }
            (MoranVariant::F(pot), MoranSchedule::F { levels: sched, .. }) => {
                for (idx, sc) in sched.iter().enumerate() {
                    let sol = solve_sn(
                        &self.params.space,
                        &self.params.predicate,
                        pot,
                        sc.m_k as usize,
                        tol,
                    )?;
                    let prev_base = if idx == 0 { 0 } else { sched[idx - 1].len } as usize;
                    let s = sol.s;
                    // Borrow juggling: parent masses first, then children.
                    let parent_masses: Vec<f64> = if idx == 0 {
                        vec![0.0]
                    } else {
                        self.levels[idx - 1].cylinders.iter().map(|c| c.log_mass).collect()
                    };
                    let lv = &mut self.levels[idx];
                    for cyl in &mut lv.cylinders {
                        let block = &cyl.word.symbols()[prev_base..prev_base + sc.m_k as usize];
                        let b_inf = birkhoff_inf(&self.params.space, pot, block)?;
                        let parent_log = if idx == 0 {
                            0.0
                        } else {
                            parent_masses[cyl.parent as usize]
                        };
                        cyl.log_mass = parent_log - s * (sc.m_k as f64 + b_inf);
                    }
                    per_level.push(LevelMeasure {
                        k: sc.k,
                        log_uniform_mass: None,
                        gibbs: Some(sol),
                        conservation_residual: 0.0,
                    });
                }
            }
            _ => unreachable!("variant and schedule kinds always agree"),
        }
        // Conservation: per parent, log sum of child masses equals the
        // parent's log mass (0 for the root).
        for (idx, lm) in per_level.iter_mut().enumerate() {
            let parent_masses: Vec<f64> = if idx == 0 {
                vec![0.0]
            } else {
                self.levels[idx - 1].cylinders.iter().map(|c| c.log_mass).collect()
            };
            let mut worst = 0.0f64;
            let lv = &self.levels[idx];
            let mut i = 0;
            while i < lv.cylinders.len() {
                let p = lv.cylinders[i].parent;
                let mut lse = LogSumExp::new();
                let mut j = i;
                while j < lv.cylinders.len() && lv.cylinders[j].parent == p {
                    lse.push(lv.cylinders[j].log_mass);
                    j += 1;
                }
                let parent_log =
                    if idx == 0 { 0.0 } else { parent_masses[p as usize] };
                worst = worst.max((lse.value() - parent_log).abs());
                i = j;
            }
            lm.conservation_residual = worst;
        }
        self.measure = Some(MoranMeasure { tol, per_level });
        Ok(self.measure.as_ref().unwrap())
    }

    /// Audits the Holder exponent `-log mu(I_n) / n` of the natural
    /// measure over every prefix length `n` in the deepest `levels_back`
    /// level regions. The gauge variant is audited in closed form from the
    /// schedule (uniform masses make `mu(I_n)` independent of which
    /// cylinder realizes the worst case); the potential variant reads the
    /// built tree and needs an attached measure.
    pub fn holder_audit(&self, levels_back: usize, target: Option<f64>) -> Result<HolderAudit> {
        match &self.schedule {
            MoranSchedule::Psi { .. } => holder_audit_psi_schedule(
                &self.schedule,
                self.blocks_m.len(),
                &block_prefix_max_counts(&self.blocks_m, self.params.m),
                levels_back,
                target,
            ),
            MoranSchedule::F { .. } => self.holder_audit_f_tree(levels_back, target),
        }
    }

    fn holder_audit_f_tree(
        &self,
        levels_back: usize,
        target: Option<f64>,
    ) -> Result<HolderAudit> {
        if self.measure.is_none() {
            return Err(Error::InvalidInput("attach a measure before auditing it".into()));
        }
        let k_hi = self.levels.len();
        let k_lo = k_hi.saturating_sub(levels_back) + 1;
        let n_lo = self.schedule.len_at(k_lo - 1) as usize + 1;
        let n_hi = self.schedule.len_at(k_hi) as usize;
        let mut min: Option<HolderSample> = None;
        let mut per_level_min: Vec<HolderSample> = Vec::new();
        for k in k_lo..=k_hi {
            let lo = self.schedule.len_at(k - 1) as usize + 1;
            let hi = self.schedule.len_at(k) as usize;
            let mut level_min: Option<HolderSample> = None;
            for n in lo..=hi {
                let worst_log_mass = self.max_prefix_mass(n);
                let sample = HolderSample {
                    n: n as u64,
                    case: HolderCase::TreePrefix { k },
                    exponent: -worst_log_mass / n as f64,
                };
                if level_min.as_ref().is_none_or(|b| sample.exponent < b.exponent) {
                    level_min = Some(sample.clone());
                }
                if min.as_ref().is_none_or(|b| sample.exponent < b.exponent) {
                    min = Some(sample);
                }
            }
            if let Some(s) = level_min {
                per_level_min.push(s);
            }
        }
        let min = min.ok_or_else(|| Error::InvalidInput("empty audit range".into()))?;
        Ok(HolderAudit {
            scanned: (n_lo as u64, n_hi as u64),
            min_exponent: min.exponent,
            argmin: min,
            per_level_min,
            target,
            clears: None,
        }
        .with_clears())
    }

    /// Largest total log-mass carried by any single `n`-prefix of the
    /// deepest level (cylinders are lexicographically sorted, so prefix
    /// groups are contiguous).
    fn max_prefix_mass(&self, n: usize) -> f64 {
        let leaves = &self.deepest().cylinders;
        let mut best = f64::NEG_INFINITY;
        let mut i = 0;
        while i < leaves.len() {
            let head = &leaves[i].word.symbols()[..n];
            let mut lse = LogSumExp::new();
            let mut j = i;
            while j < leaves.len() && &leaves[j].word.symbols()[..n] == head {
                lse.push(leaves[j].log_mass);
                j += 1;
            }
            best = best.max(lse.value());
            i = j;
        }
        best
    }

    /// Verifies the Frostman-type bound `mu(I_n) <= c exp(-n s)` for all
    /// audited prefix lengths with `exp(-n) < eta_diam`.
    pub fn mass_distribution_check(
        &self,
        s: f64,
        c: f64,
        eta_diam: f64,
    ) -> Result<MassDistributionCheck> {
        let positive = c > 0.0 && eta_diam > 0.0;
        if !positive {
            return Err(Error::InvalidInput("need c > 0 and a positive diameter cutoff".into()));
        }
        let n_start = ((-(eta_diam.ln())).floor() as i64 + 1).max(1) as usize;
        let n_end = self.schedule.len_at(self.schedule.depth()) as usize;
        if n_start > n_end {
            return Err(Error::InvalidInput(format!(
                "diameter cutoff {eta_diam} leaves no audited scales (construction depth {n_end})"
            )));
        }
        let mut first_violation = None;
        match &self.schedule {
            MoranSchedule::Psi { .. } => {
                let cnts = block_prefix_max_counts(&self.blocks_m, self.params.m);
                let scan = PsiMassScan::new(&self.schedule, self.blocks_m.len(), &cnts);
                for n in n_start..=n_end {
                    let (neg_log_mass, _) = scan.neg_log_mass_at(n as u64);
                    if neg_log_mass < n as f64 * s - c.ln() - 1e-12 {
                        first_violation = Some((n as u64, -neg_log_mass, c.ln() - n as f64 * s));
                        break;
                    }
                }
            }
            MoranSchedule::F { .. } => {
                if self.measure.is_none() {
                    return Err(Error::InvalidInput(
                        "attach a measure before checking its mass distribution".into(),
                    ));
                }
                for n in n_start..=n_end {
                    let worst = self.max_prefix_mass(n);
                    if worst > c.ln() - n as f64 * s + 1e-12 {
                        first_violation = Some((n as u64, worst, c.ln() - n as f64 * s));
                        break;
                    }
                }
            }
        }
        let passed = first_violation.is_none();
        let statement = if passed {
            format!(
                "every audited cylinder prefix of diameter below {eta_diam} carries measure \
                 at most {c} * diam^{s}: mass-distribution evidence that the set has \
                 dimension at least {s}"
            )
        } else {
            format!(
                "mass bound mu(I_n) <= {c} exp(-n {s}) fails at n = {}",
                first_violation.unwrap().0
            )
        };
        Ok(MassDistributionCheck {
            s,
            c,
            eta_diam,
            scanned: (n_start as u64, n_end as u64),
            passed,
            first_violation,
            statement,
        })
    }

    /// Materializes one point of the limit set (a deepest-level cylinder
    /// word) and logs its recurrence checks level by level, by exact
    /// integer prefix comparison.
    pub fn materialize_point(&self, seed: u64) -> Result<MaterializedPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let deepest = self.deepest();
        let leaf_index = rng.gen_range(0..deepest.cylinders.len());
        let prefix = deepest.cylinders[leaf_index].word.clone();
        let x = prefix.symbols();
        let mut checks = Vec::with_capacity(self.schedule.depth());
        match (&self.params.variant, &self.schedule) {
            (MoranVariant::Psi(psi), MoranSchedule::Psi { levels, .. }) => {
                for sc in levels {
                    let neg = psi.neg_log(sc.n_hat)?;
                    checks.push(recurrence_row(x, sc.k, sc.n_hat, sc.t_k, neg));
                }
            }
            (MoranVariant::F(pot), MoranSchedule::F { levels, .. }) => {
                for sc in levels {
                    // Independent recomputation of S_{n_k} f on the
                    // materialized prefix (all windows are determined).
                    let d = pot.depth().max(1);
                    let mut s_exact = 0.0;
                    if pot.depth() == 0 {
                        s_exact = sc.n_k as f64 * pot.value(&[]);
                    } else {
                        for i in 0..sc.n_k as usize {
                            s_exact += pot.value(&x[i..i + d]);
                        }
                    }
                    checks.push(recurrence_row(x, sc.k, sc.n_k, sc.t_k, s_exact));
                }
            }
            _ => unreachable!(),
        }
        let all_passed = checks.iter().all(|c| c.passed);
        Ok(MaterializedPoint { seed, leaf_index, prefix, checks, all_passed })
    }

    /// Flat cylinder rows for line-oriented serialization.
    pub fn rows(&self) -> Vec<CylinderRow> {
        let mut out = Vec::new();
        for lv in &self.levels {
            for (i, c) in lv.cylinders.iter().enumerate() {
                out.push(CylinderRow {
                    level: lv.k,
                    index: i as u32,
                    parent: (c.parent != u32::MAX).then_some(c.parent),
                    word: c.word.to_string(),
                    log_mass: c.log_mass.is_finite().then_some(c.log_mass),
                });
            }
        }
        out
    }
}

/// One recurrence check row of a materialized point: did the shift by
/// `n_ref` agree with the point on at least `t_k` symbols, and is `t_k`
/// strictly inside the target `exp(-neg_log_target)`?
#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceCheckRow {
    pub k: usize,
    pub n_ref: u64,
    pub t_k: u64,
    /// Exact common prefix length of `x` and `shift^{n_ref} x` over the
    /// available window.
    pub common_prefix: u64,
    /// `-log` of the recurrence target at this level.
    pub neg_log_target: f64,
    pub passed: bool,
}

fn recurrence_row(x: &[Symbol], k: usize, n_ref: u64, t_k: u64, neg_log_target: f64) -> RecurrenceCheckRow {
    let n = n_ref as usize;
    let avail = x.len().saturating_sub(n);
    let mut cpl = 0usize;
    while cpl < avail && x[n + cpl] == x[cpl] {
        cpl += 1;
    }
    let passed = cpl as u64 >= t_k && (t_k as f64) > neg_log_target;
    RecurrenceCheckRow { k, n_ref, t_k, common_prefix: cpl as u64, neg_log_target, passed }
}

#[derive(Debug, Clone, Serialize)]
pub struct MaterializedPoint {
    pub seed: u64,
    pub leaf_index: usize,
    /// The deepest cylinder word: a prefix of the materialized point.
    pub prefix: Word,
    pub checks: Vec<RecurrenceCheckRow>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CylinderRow {
    pub level: usize,
    pub index: u32,
    pub parent: Option<u32>,
    pub word: String,
    pub log_mass: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MassDistributionCheck {
    pub s: f64,
    pub c: f64,
    pub eta_diam: f64,
    pub scanned: (u64, u64),
    pub passed: bool,
    /// `(n, log mu(I_n), log(c) - n s)` at the first failure.
    pub first_violation: Option<(u64, f64, f64)>,
    pub statement: String,
}

/// Where a Holder audit exponent was realized.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum HolderCase {
    /// `n` inside the level-`k` overhang: the prefix pins one cylinder.
    Overhang { k: usize },
    /// `n` at a block boundary, `q` complete new blocks.
    BlockBoundary { k: usize, q: u64 },
    /// `n` strictly inside a block (`i` symbols in): worst case over the
    /// block family's `i`-prefixes.
    BlockInterior { k: usize, q: u64, i: u64 },
    /// Potential variant: measured directly on the built tree.
    TreePrefix { k: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderSample {
    pub n: u64,
    pub case: HolderCase,
    /// `-log mu(I_n) / n`.
    pub exponent: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderAudit {
    /// Audited prefix-length range.
    pub scanned: (u64, u64),
    pub min_exponent: f64,
    pub argmin: HolderSample,
    pub per_level_min: Vec<HolderSample>,
    pub target: Option<f64>,
    /// `min_exponent >= target`, when a target was given.
    pub clears: Option<bool>,
}

impl HolderAudit {
    fn with_clears(mut self) -> Self {
        self.clears = self.target.map(|t| self.min_exponent >= t);
        self
    }
}

/// Max block-family count per `i`-prefix, `i = 0..M` (index 0 = all
/// blocks). Drives the worst-case interior mass.
fn block_prefix_max_counts(blocks: &[Word], m: u64) -> Vec<u64> {
    let mut out = vec![blocks.len() as u64];
    for i in 1..m as usize {
        let mut best = 0u64;
        let mut cur = 0u64;
        let mut prev: Option<&[Symbol]> = None;
        for b in blocks {
            let head = &b.symbols()[..i];
            if prev == Some(head) {
                cur += 1;
            } else {
                best = best.max(cur);
                cur = 1;
                prev = Some(head);
            }
        }
        out.push(best.max(cur));
    }
    out
}

/// Closed-form worst-case mass scan for the gauge variant: uniform masses
/// make `mu(I_n)` a function of the schedule position alone.
struct PsiMassScan<'a> {
    sched: &'a [PsiLevelSchedule],
    ln_f: f64,
    ln_prefix_max: Vec<f64>,
    m: u64,
    /// Cumulative `-log` level masses: entry `k` is `-log mu(J_k)`.
    neg_log_level: Vec<f64>,
}

impl<'a> PsiMassScan<'a> {
    fn new(schedule: &'a MoranSchedule, block_count: usize, prefix_counts: &[u64]) -> Self {
        let MoranSchedule::Psi { m, levels } = schedule else {
            unreachable!("gauge scan on a gauge schedule");
        };
        let ln_f = (block_count as f64).ln();
        let mut neg_log_level = vec![0.0];
        for sc in levels {
            let prev = *neg_log_level.last().unwrap();
            neg_log_level.push(prev + sc.l_k as f64 * ln_f);
        }
        PsiMassScan {
            sched: levels,
            ln_f,
            ln_prefix_max: prefix_counts.iter().map(|&c| (c as f64).ln()).collect(),
            m: *m,
            neg_log_level,
        }
    }

    /// `(-log max_prefix mu(I_n), case)` at prefix length `n`.
    fn neg_log_mass_at(&self, n: u64) -> (f64, HolderCase) {
        // Locate the level region: len_{k-1} < n <= len_k.
        let mut k_idx = 0;
        while self.sched[k_idx].len < n {
            k_idx += 1;
        }
        let sc = &self.sched[k_idx];
        let prev_len = if k_idx == 0 { 0 } else { self.sched[k_idx - 1].len };
        let base_neg = self.neg_log_level[k_idx];
        if n > sc.n_hat {
            // Overhang: the n-prefix pins a unique level-k cylinder.
            (self.neg_log_level[k_idx + 1], HolderCase::Overhang { k: sc.k })
        } else {
            let q = (n - prev_len) / self.m;
            let i = (n - prev_len) % self.m;
            if i == 0 {
                (base_neg + q as f64 * self.ln_f, HolderCase::BlockBoundary { k: sc.k, q })
            } else {
                (
                    base_neg + (q + 1) as f64 * self.ln_f - self.ln_prefix_max[i as usize],
                    HolderCase::BlockInterior { k: sc.k, q, i },
                )
            }
        }
    }
}

/// Schedule-level Holder audit for the gauge variant: exact, no tree
/// needed, so it scales to schedules whose trees are astronomically big.
pub fn holder_audit_psi_schedule(
    schedule: &MoranSchedule,
    block_count: usize,
    prefix_counts: &[u64],
    levels_back: usize,
    target: Option<f64>,
) -> Result<HolderAudit> {
    let MoranSchedule::Psi { levels, .. } = schedule else {
        return Err(Error::InvalidInput("gauge audit on a potential schedule".into()));
    };
    if levels.is_empty() {
        return Err(Error::InvalidInput("empty schedule".into()));
    }
    let scan = PsiMassScan::new(schedule, block_count, prefix_counts);
    let k_hi = levels.len();
    let k_lo = k_hi.saturating_sub(levels_back) + 1;
    let n_lo = if k_lo == 1 { 1 } else { levels[k_lo - 2].len + 1 };
    let n_hi = levels[k_hi - 1].len;
    let mut min: Option<HolderSample> = None;
    let mut per_level_min: Vec<HolderSample> = Vec::new();
    let mut cur_level = k_lo;
    let mut level_min: Option<HolderSample> = None;
    for n in n_lo..=n_hi {
        let (neg, case) = scan.neg_log_mass_at(n);
        let sample = HolderSample { n, case, exponent: neg / n as f64 };
        let sample_level = match &sample.case {
            HolderCase::Overhang { k }
            | HolderCase::BlockBoundary { k, .. }
            | HolderCase::BlockInterior { k, .. } => *k,
            HolderCase::TreePrefix { k } => *k,
        };
        if sample_level != cur_level {
            if let Some(s) = level_min.take() {
                per_level_min.push(s);
            }
            cur_level = sample_level;
        }
        if level_min.as_ref().is_none_or(|b| sample.exponent < b.exponent) {
            level_min = Some(sample.clone());
        }
        if min.as_ref().is_none_or(|b| sample.exponent < b.exponent) {
            min = Some(sample);
        }
    }
    if let Some(s) = level_min {
        per_level_min.push(s);
    }
    let min = min.expect("nonempty scan range");
    Ok(HolderAudit {
        scanned: (n_lo, n_hi),
        min_exponent: min.exponent,
        argmin: min,
        per_level_min,
        target,
        clears: None,
    }
    .with_clears())
}

/// Extends `word` in place by `extra` symbols repeating its own head
/// (`word[pos] = word[pos - period]` is NOT the rule here: the overhang
/// copies from index 0, giving `x[base + j] = x[j]`, which is what the
/// recurrence checks compare).
fn push_overhang(word: &mut Vec<Symbol>, extra: u64) {
    for j in 0..extra as usize {
        let s = word[j];
        word.push(s);
    }
}

/// Walks `suffix` from `from`; `None` marks an inadmissible junction.
fn walk_suffix(space: &ShiftSpace, from: Cursor, suffix: &[Symbol]) -> Option<Cursor> {
    let mut cur = from;
    for &a in suffix {
        cur = space.step(&cur, a)?;
    }
    Some(cur)
}

fn admissibility_violation(k: usize) -> Error {
    Error::AdmissibilityViolation(format!(
        "a level-{k} word leaves the language: the block family's junctions are not safe \
         in this space; choose a predicate whose words glue"
    ))
}

fn build_psi_levels(
    params: &MoranParams,
    schedule: &[PsiLevelSchedule],
    blocks: &[Word],
    branch_budget: u64,
    seed: u64,
) -> Result<(Vec<MoranLevel>, bool)> {
    let space = &params.space;
    let nf = blocks.len() as u128;
    let empty = Word::new(Vec::new());
    let root = space.root_cursor();
    let mut levels_out: Vec<MoranLevel> = Vec::with_capacity(schedule.len());
    let mut sampled_any = false;
    for sc in schedule {
        let parents: Vec<(u32, &Word, Cursor)> = if levels_out.is_empty() {
            vec![(u32::MAX, &empty, root)]
        } else {
            levels_out
                .last()
                .unwrap()
                .cylinders
                .iter()
                .enumerate()
                .map(|(i, c)| (i as u32, &c.word, c.end))
                .collect()
        };
        let parent_count = parents.len() as u128;
        // Branching factor #F^{l_k}, saturating: only compared to budgets.
        let branch: u128 = nf
            .checked_pow(sc.l_k.min(1000) as u32)
            .unwrap_or(u128::MAX);
        let exact = parent_count.saturating_mul(branch) <= branch_budget as u128;
        let expected = if exact {
            parent_count.saturating_mul(branch)
        } else {
            branch_budget as u128
        };
        if expected.saturating_mul(sc.len as u128) > LEVEL_SYMBOL_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "level {} would hold ~{expected} words of length {}; lower the branch \
                 budget or the depth",
                sc.k, sc.len
            )));
        }
        let mut cylinders: Vec<MoranCylinder> = Vec::new();
        if exact {
            // Odometer over block indices, lexicographic.
            for (pi, pword, pend) in &parents {
                let l = sc.l_k as usize;
                let mut idx = vec![0usize; l];
                loop {
                    let mut w: Vec<Symbol> =
                        Vec::with_capacity(sc.len as usize);
                    w.extend_from_slice(pword.symbols());
                    for &bi in &idx {
                        w.extend_from_slice(blocks[bi].symbols());
                    }
                    push_overhang(&mut w, sc.t_k);
                    let new = &w[pword.len()..];
                    let Some(end) = walk_suffix(space, *pend, new) else {
                        return Err(admissibility_violation(sc.k));
                    };
                    cylinders.push(MoranCylinder {
                        word: Word::new(w),
                        parent: *pi,
                        log_mass: f64::NAN,
                        end,
                    });
                    // Advance odometer.
                    let mut pos = l;
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        idx[pos] += 1;
                        if idx[pos] < blocks.len() {
                            break;
                        }
                        idx[pos] = 0;
                        if pos == 0 {
                            break;
                        }
                    }
                    if idx.iter().all(|&v| v == 0) {
                        break;
                    }
                }
            }
        } else {
            sampled_any = true;
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (sc.k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let cpp = ((branch_budget as u128 / parent_count).max(1) as usize)
                .min(branch.min(u128::from(u32::MAX)) as usize);
            for (pi, pword, pend) in &parents {
                let mut chosen: BTreeSet<Vec<usize>> = BTreeSet::new();
                let mut attempts = 0usize;
                let cap = cpp.saturating_mul(4).max(16);
                while chosen.len() < cpp && attempts < cap {
                    attempts += 1;
                    let tuple: Vec<usize> =
                        (0..sc.l_k).map(|_| rng.gen_range(0..blocks.len())).collect();
                    chosen.insert(tuple);
                }
                for tuple in chosen {
                    let mut w: Vec<Symbol> = Vec::with_capacity(sc.len as usize);
                    w.extend_from_slice(pword.symbols());
                    for &bi in &tuple {
                        w.extend_from_slice(blocks[bi].symbols());
                    }
                    push_overhang(&mut w, sc.t_k);
                    let new = &w[pword.len()..];
                    let Some(end) = walk_suffix(space, *pend, new) else {
                        return Err(admissibility_violation(sc.k));
                    };
                    cylinders.push(MoranCylinder {
                        word: Word::new(w),
                        parent: *pi,
                        log_mass: f64::NAN,
                        end,
                    });
                }
            }
        }
        debug_assert!(cylinders.windows(2).all(|p| p[0].word <= p[1].word));
        debug_assert!(cylinders.iter().all(|c| c.word.len() as u64 == sc.len));
        levels_out.push(MoranLevel { k: sc.k, cylinders, sampled: !exact });
    }
    Ok((levels_out, sampled_any))
}

fn build_f_levels(
    params: &MoranParams,
    levels: usize,
    branch_budget: u64,
) -> Result<(Vec<FLevelSchedule>, Vec<MoranLevel>)> {
    let MoranVariant::F(pot) = &params.variant else {
        return Err(Error::InvalidInput("potential build on a gauge construction".into()));
    };
    let space = &params.space;
    let m = params.m;
    let norm = pot.max_value();
    let mut sched_out: Vec<FLevelSchedule> = Vec::with_capacity(levels);
    let mut levels_out: Vec<MoranLevel> = Vec::with_capacity(levels);
    let mut prev_len: u64 = 0;
    let mut sum_m: u64 = 0;
    for k in 1..=levels {
        // Least multiple of M meeting the density slack and sparsity.
        let mut m_k = if k == 1 {
            m
        } else {
            let by_eta = ceil_bound(2.0 * prev_len as f64 * norm / params.eta)?;
            let by_sparse = (k as u64).checked_mul(sum_m).ok_or_else(|| overflow("m_k"))?;
            align_up(by_eta.max(by_sparse).max(m), m)?
        };
        // Gap repair: advance to the next populated block length.
        let mut blocks = family_slice(space, &params.predicate, m_k as usize)?;
        let mut repaired = 0u64;
        while blocks.is_empty() && repaired < m {
            m_k = m_k.checked_add(m).ok_or_else(|| overflow("m_k"))?;
            repaired += 1;
            blocks = family_slice(space, &params.predicate, m_k as usize)?;
        }
        if blocks.is_empty() {
            return Err(Error::EmptyLevel(format!(
                "no blocks of lengths {}..={} (gap repair exhausted after {repaired} steps)",
                m_k - repaired * m,
                m_k
            )));
        }
        let n_k = prev_len.checked_add(m_k).ok_or_else(|| overflow("n_k"))?;
        debug_assert!(2.0 * prev_len as f64 * norm <= m_k as f64 * params.eta + 1e-9);
        debug_assert!(k == 1 || m_k >= (k as u64) * sum_m);

        let parents: Vec<(u32, Word, Cursor)> = if levels_out.is_empty() {
            vec![(u32::MAX, Word::empty(), space.root_cursor())]
        } else {
            levels_out
                .last()
                .unwrap()
                .cylinders
                .iter()
                .enumerate()
                .map(|(i, c)| (i as u32, c.word.clone(), c.end))
                .collect()
        };
        let total = parents.len() as u128 * blocks.len() as u128;
        if total > branch_budget as u128 {
            return Err(Error::BudgetExceeded(format!(
                "level {k} needs {total} cylinders (> budget {branch_budget}); the \
                 potential variant cannot subsample without breaking its schedule"
            )));
        }

        // Pass 1: bases and their exact Birkhoff sums (windows wrap into
        // the overhang, which repeats the head, so x[n_k + j] = x[j]).
        struct Base {
            parent: u32,
            word: Vec<Symbol>,
            end: Cursor,
            s_exact: f64,
        }
        let d = pot.depth();
        let mut bases: Vec<Base> = Vec::with_capacity(total as usize);
        for (pi, pword, pend) in &parents {
            for b in &blocks {
                let mut w: Vec<Symbol> = Vec::with_capacity(n_k as usize);
                w.extend_from_slice(pword.symbols());
                w.extend_from_slice(b.symbols());
                let Some(end) = walk_suffix(space, *pend, b.symbols()) else {
                    return Err(admissibility_violation(k));
                };
                let s_exact = if d == 0 {
                    n_k as f64 * pot.value(&[])
                } else {
                    let nk = n_k as usize;
                    let mut acc = 0.0;
                    let mut window: Vec<Symbol> = vec![0; d];
                    for i in 0..nk {
                        for (t, slot) in window.iter_mut().enumerate() {
                            let pos = i + t;
                            *slot = if pos < nk { w[pos] } else { w[pos - nk] };
                        }
                        acc += pot.value(&window);
                    }
                    acc
                };
                bases.push(Base { parent: *pi, word: w, end, s_exact });
            }
        }
        let max_birkhoff =
            bases.iter().map(|b| b.s_exact).fold(f64::NEG_INFINITY, f64::max);
        let t_hat = t_hat_from(max_birkhoff)?;
        let t_k = align_up(t_hat, m)?;
        let len = n_k.checked_add(t_k).ok_or_else(|| overflow("the level length"))?;
        if (total).saturating_mul(len as u128) > LEVEL_SYMBOL_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "level {k} would hold {total} words of length {len}"
            )));
        }

        // Pass 2: overhangs and admissibility.
        let mut cylinders = Vec::with_capacity(bases.len());
        for base in bases {
            let mut w = base.word;
            let pre = w.len();
            push_overhang(&mut w, t_k);
            let Some(end) = walk_suffix(space, base.end, &w[pre..]) else {
                return Err(admissibility_violation(k));
            };
            cylinders.push(MoranCylinder {
                word: Word::new(w),
                parent: base.parent,
                log_mass: f64::NAN,
                end,
            });
        }
        debug_assert!(cylinders.windows(2).all(|p| p[0].word <= p[1].word));
        sched_out.push(FLevelSchedule {
            k,
            m_k,
            n_k,
            t_hat,
            t_k,
            len,
            ratio: (len, n_k),
            max_birkhoff,
            repaired,
        });
        levels_out.push(MoranLevel { k, cylinders, sampled: false });
        prev_len = len;
        sum_m = sum_m.checked_add(m_k).ok_or_else(|| overflow("the block sum"))?;
    }
    Ok((sched_out, levels_out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::PsiFunction;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn full2() -> ShiftSpace {
        ShiftSpace::full(2).unwrap()
    }

    fn golden() -> ShiftSpace {
        ShiftSpace::forbidden(2, &[w("11")]).unwrap()
    }

    fn psi_params(space: ShiftSpace, pred: &str, m: u64, eta: f64, n1: u64, alpha: f64) -> MoranParams {
        MoranParams::new(
            space,
            pred.parse().unwrap(),
            MoranVariant::Psi(PsiFunction::exponential(alpha).unwrap()),
            m,
            eta,
            n1,
        )
        .unwrap()
    }

    #[test]
    fn gauge_schedule_worked_example() {
        // M = 2, psi = e^{-n}, first target length 5.
        let params = psi_params(full2(), "all", 2, 0.5, 5, 1.0);
        let MoranSchedule::Psi { levels, .. } = build_schedule(&params, 1).unwrap() else {
            panic!()
        };
        let l1 = &levels[0];
        assert_eq!((l1.n_k, l1.n_hat, l1.l_k, l1.i_k), (5, 4, 2, 1));
        assert_eq!((l1.t_hat, l1.t_k), (5, 6));
        assert_eq!(l1.ratio, (10, 4)); // r_1 = 5/2
    }

    #[test]
    fn unit_block_schedule_has_adjacent_return_times() {
        // M = 1, psi = e^{-n}: t_hat = n_hat + 1 = t_k at every level.
        let params = psi_params(full2(), "all", 1, 0.5, 1, 1.0);
        let MoranSchedule::Psi { levels, .. } = build_schedule(&params, 4).unwrap() else {
            panic!()
        };
        for sc in &levels {
            assert_eq!(sc.t_hat, sc.n_hat + 1);
            assert_eq!(sc.t_k, sc.t_hat);
        }
        // Sparsity and fit, literally.
        let mut sum = 0u64;
        let mut prev_n = 0u64;
        let mut prev_len = 0u64;
        for sc in &levels {
            if sc.k > 1 {
                assert!(sc.n_k >= sc.k as u64 * sum);
                assert!(sc.n_k as f64 >= sc.k as f64 * prev_n as f64 - 1e-9);
                assert!(sc.n_k > prev_len);
            }
            sum += sc.n_k;
            prev_n = sc.n_k;
            prev_len = sc.len;
        }
    }

    #[test]
    fn deep_gauge_schedule_matches_hand_computation() {
        // M = 1, psi = e^{-2n}, n1 = 1: the 7-level schedule drives the
        // deep Holder audit.
        let params = psi_params(full2(), "all", 1, 0.1, 1, 2.0);
        let MoranSchedule::Psi { levels, .. } = build_schedule(&params, 7).unwrap() else {
            panic!()
        };
        let ls: Vec<u64> = levels.iter().map(|l| l.l_k).collect();
        assert_eq!(ls, vec![1, 1, 14, 149, 1679, 21599, 316799]);
        let lens: Vec<u64> = levels.iter().map(|l| l.len).collect();
        assert_eq!(lens, vec![4, 16, 91, 721, 7201, 86401, 1209601]);
    }

    #[test]
    fn deep_holder_audit_clears_its_target() {
        let params = psi_params(full2(), "all", 1, 0.1, 1, 2.0);
        let schedule = build_schedule(&params, 7).unwrap();
        // (1 - eta)^2 log2/3 - 0.02 at eta = 0.1.
        let target = 0.81 * 2.0f64.ln() / 3.0 - 0.02;
        let audit = holder_audit_psi_schedule(&schedule, 2, &[2], 2, Some(target)).unwrap();
        // Worst case: first block step into level 6.
        let expect = 1845.0 * 2.0f64.ln() / 7202.0;
        assert!((audit.min_exponent - expect).abs() < 1e-12, "{}", audit.min_exponent);
        assert_eq!(audit.argmin.n, 7202);
        assert_eq!(audit.clears, Some(true));
        assert!(matches!(audit.argmin.case, HolderCase::BlockBoundary { k: 6, q: 1 }));
    }

    #[test]
    fn schedule_overflow_is_an_error() {
        let params = psi_params(full2(), "all", 1, 0.5, 1, 1.0);
        match build_schedule(&params, 30) {
            Err(Error::ScheduleOverflow(_)) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn exact_tree_masses_conserve_exactly() {
        // Full 2-shift, M = 1, 3 levels: block counts 1, 1, 6 give
        // 2 * 2 * 2^6 = 256 leaves of length 31.
        let params = psi_params(full2(), "all", 1, 0.5, 1, 1.0);
        let mut con = MoranConstruction::build(params, 3, 1 << 10, 0).unwrap();
        assert!(!con.sampled);
        let sizes: Vec<usize> = con.levels.iter().map(|l| l.cylinders.len()).collect();
        assert_eq!(sizes, vec![2, 4, 256]);
        let meas = con.attach_measure(1e-12).unwrap();
        for lm in &meas.per_level {
            assert!(lm.conservation_residual < 1e-12, "level {}: {}", lm.k, lm.conservation_residual);
        }
    }

    #[test]
    fn analytic_holder_audit_matches_brute_force_tree() {
        // Small exact gauge tree; group leaf masses by prefix directly and
        // compare against the closed-form audit at every depth.
        let params = psi_params(full2(), "all", 1, 0.5, 1, 1.0);
        let mut con = MoranConstruction::build(params, 3, 1 << 10, 0).unwrap();
        con.attach_measure(1e-12).unwrap();
        let MoranSchedule::Psi { levels, .. } = con.schedule.clone() else { panic!() };
        let cnts = block_prefix_max_counts(&con.blocks_m, 1);
        let scan = PsiMassScan::new(&con.schedule, con.blocks_m.len(), &cnts);
        let len3 = levels[2].len as usize;
        for n in 1..=len3 {
            let brute = con.max_prefix_mass(n);
            let (analytic_neg, _) = scan.neg_log_mass_at(n as u64);
            assert!(
                (brute + analytic_neg).abs() < 1e-9,
                "n = {n}: brute {brute} analytic {}",
                -analytic_neg
            );
        }
    }

    #[test]
    fn sampled_trees_are_flagged_deterministic_and_measureless() {
        let params = psi_params(full2(), "all", 1, 0.5, 1, 1.0);
        let mut a = MoranConstruction::build(params.clone(), 4, 512, 42).unwrap();
        let b = MoranConstruction::build(params, 4, 512, 42).unwrap();
        assert!(a.sampled);
        assert_eq!(a.deepest().cylinders.len(), b.deepest().cylinders.len());
        for (x, y) in a.deepest().cylinders.iter().zip(&b.deepest().cylinders) {
            assert_eq!(x.word, y.word);
        }
        assert!(a.attach_measure(1e-12).is_err());
    }

    #[test]
    fn materialized_points_recur_at_every_level() {
        let params = psi_params(full2(), "all", 1, 0.5, 1, 1.0);
        let con = MoranConstruction::build(params, 4, 512, 9).unwrap();
        for seed in 0..25 {
            let pt = con.materialize_point(seed).unwrap();
            assert!(pt.all_passed, "seed {seed}: {:?}", pt.checks);
            assert_eq!(pt.checks.len(), 4);
            for c in &pt.checks {
                assert!(c.common_prefix >= c.t_k);
                assert!((c.t_k as f64) > c.neg_log_target);
            }
        }
        // Determinism of the materialization.
        let p1 = con.materialize_point(7).unwrap();
        let p2 = con.materialize_point(7).unwrap();
        assert_eq!(p1.prefix, p2.prefix);
    }

    #[test]
    fn golden_mean_gauge_construction_with_suffix_blocks() {
        // Blocks: admissible length-4 words ending in 0 (5 of them); the
        // junction is always safe because a 0 precedes every appended
        // block and the overhang copies the word head.
        let params = MoranParams::new(
            golden(),
            "ends-with:0".parse().unwrap(),
            MoranVariant::Psi(PsiFunction::exponential(1.0).unwrap()),
            4,
            0.2,
            4,
        )
        .unwrap();
        assert!(params.block_ratio >= 0.8);
        let mut con = MoranConstruction::build(params, 2, 64, 0).unwrap();
        assert!(!con.sampled);
        assert_eq!(con.levels[0].cylinders.len(), 5);
        assert_eq!(con.levels[1].cylinders.len(), 25);
        let meas = con.attach_measure(1e-12).unwrap();
        for lm in &meas.per_level {
            assert!(lm.conservation_residual < 1e-12);
        }
        for seed in 0..10 {
            assert!(con.materialize_point(seed).unwrap().all_passed);
        }
    }

    #[test]
    fn thin_block_family_fails_the_density_check() {
        // Length-2 golden-mean words ending in 1: just 01. log 1 = 0.
        let err = MoranParams::new(
            golden(),
            "ends-with:1".parse().unwrap(),
            MoranVariant::Psi(PsiFunction::exponential(1.0).unwrap()),
            2,
            0.2,
            2,
        );
        assert!(matches!(err, Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn bad_junctions_are_caught() {
        // No-three-zeros space; blocks end with 0 but may also start with
        // 00 after an ...0 overhang cut: 100 + 010 puts 000 in the word.
        let space = ShiftSpace::forbidden(2, &[w("000")]).unwrap();
        let params = MoranParams::new(
            space,
            "ends-with:0".parse().unwrap(),
            MoranVariant::Psi(PsiFunction::exponential(1.0).unwrap()),
            3,
            0.45,
            3,
        )
        .unwrap();
        match MoranConstruction::build(params, 2, 1 << 10, 0) {
            Err(Error::AdmissibilityViolation(_)) => {}
            other => panic!("expected a junction violation, got {other:?}"),
        }
    }

    #[test]
    fn potential_schedule_worked_example() {
        // Full 2-shift, f = 1, M = 2: S_{n_1} f = 2, t_hat = 3, t_1 = 4,
        // ratio (n_1 + t_1)/n_1 = 3.
        let params = MoranParams::new(
            full2(),
            WordPredicate::All,
            MoranVariant::F(Potential::constant(1.0).unwrap()),
            2,
            0.9,
            0,
        )
        .unwrap();
        let MoranSchedule::F { levels, .. } = build_schedule(&params, 1).unwrap() else {
            panic!()
        };
        let l1 = &levels[0];
        assert_eq!((l1.m_k, l1.n_k, l1.t_hat, l1.t_k), (2, 2, 3, 4));
        assert_eq!(l1.ratio, (6, 2));
        assert_eq!(l1.max_birkhoff, 2.0);
    }

    #[test]
    fn potential_level_masses_match_the_bowen_price() {
        // f = 1, M = 4: s_1 = log2/2, 16 level-1 cylinders of mass 1/16.
        let params = MoranParams::new(
            full2(),
            WordPredicate::All,
            MoranVariant::F(Potential::constant(1.0).unwrap()),
            4,
            0.9,
            0,
        )
        .unwrap();
        let mut con = MoranConstruction::build(params, 1, 64, 0).unwrap();
        let meas = con.attach_measure(1e-12).unwrap().clone();
        let sol = meas.per_level[0].gibbs.as_ref().unwrap();
        assert!((sol.s - 0.5 * 2.0f64.ln()).abs() < 1e-15);
        assert_eq!(con.levels[0].cylinders.len(), 16);
        for c in &con.levels[0].cylinders {
            assert!((c.log_mass - (1.0f64 / 16.0).ln()).abs() < 1e-12);
        }
        assert!(meas.per_level[0].conservation_residual < 1e-12);
    }

    #[test]
    fn potential_two_level_construction_conserves_and_recurs() {
        // M = 1 keeps the second level enumerable: m_2 = 7, 128 blocks.
        let params = MoranParams::new(
            full2(),
            WordPredicate::All,
            MoranVariant::F(Potential::constant(1.0).unwrap()),
            1,
            0.9,
            0,
        )
        .unwrap();
        let mut con = MoranConstruction::build(params, 2, 1 << 10, 0).unwrap();
        let MoranSchedule::F { levels, .. } = con.schedule.clone() else { panic!() };
        assert_eq!((levels[0].m_k, levels[0].t_k, levels[0].len), (1, 2, 3));
        assert_eq!(levels[1].m_k, 7);
        assert_eq!(levels[1].n_k, 10);
        assert_eq!(levels[1].t_hat, 11);
        let tol = 1e-12;
        let meas = con.attach_measure(tol).unwrap();
        for lm in &meas.per_level {
            let m_k = levels[lm.k - 1].m_k as f64;
            assert!(
                lm.conservation_residual <= tol * m_k + 1e-12,
                "level {}: {}",
                lm.k,
                lm.conservation_residual
            );
        }
        for seed in 0..10 {
            let pt = con.materialize_point(seed).unwrap();
            assert!(pt.all_passed, "{:?}", pt.checks);
        }
        // Tree-based Holder audit runs and reports a positive exponent.
        let audit = con.holder_audit(2, None).unwrap();
        assert!(audit.min_exponent > 0.0);
    }

    #[test]
    fn gap_repair_advances_block_length() {
        // Anchored blocks need length >= 6, but M = 2 proposes m_1 = 2;
        // the repair walks 2 -> 4 -> 6 and finds the single block 111000.
        let params = MoranParams::new(
            full2(),
            "starts-and-ends-with:111:000".parse().unwrap(),
            MoranVariant::F(Potential::constant(1.0).unwrap()),
            2,
            0.9,
            0,
        )
        .unwrap();
        let con = MoranConstruction::build(params, 1, 16, 0).unwrap();
        let MoranSchedule::F { levels, .. } = &con.schedule else { panic!() };
        assert_eq!(levels[0].repaired, 2);
        assert_eq!((levels[0].m_k, levels[0].n_k, levels[0].t_hat, levels[0].t_k), (6, 6, 7, 8));
        assert_eq!(con.levels[0].cylinders.len(), 1);
        assert_eq!(con.levels[0].cylinders[0].word.to_string(), "11100011100011");
    }

    #[test]
    fn golden_mean_potential_needs_double_anchored_blocks() {
        // Blocks that start and end with 0 glue across every junction the
        // potential variant creates (overhang cuts are not block-aligned).
        let params = MoranParams::new(
            golden(),
            "starts-and-ends-with:0:0".parse().unwrap(),
            MoranVariant::F(Potential::constant(1.0).unwrap()),
            1,
            0.9,
            0,
        )
        .unwrap();
        let mut con = MoranConstruction::build(params, 2, 1 << 10, 0).unwrap();
        con.attach_measure(1e-10).unwrap();
        for seed in 0..5 {
            assert!(con.materialize_point(seed).unwrap().all_passed);
        }
    }

    #[test]
    fn mass_distribution_check_brackets_the_exponent() {
        let params = psi_params(full2(), "all", 1, 0.5, 1, 1.0);
        let mut con = MoranConstruction::build(params, 3, 1 << 10, 0).unwrap();
        con.attach_measure(1e-12).unwrap();
        let audit = con.holder_audit(3, None).unwrap();
        let ok = con
            .mass_distribution_check(audit.min_exponent - 0.01, 1.0, 0.9)
            .unwrap();
        assert!(ok.passed, "{}", ok.statement);
        let bad = con
            .mass_distribution_check(audit.min_exponent + 0.05, 1.0, 0.9)
            .unwrap();
        assert!(!bad.passed);
        assert!(bad.first_violation.is_some());
    }

    #[test]
    fn cylinder_rows_serialize_with_parents() {
        let params = psi_params(full2(), "all", 1, 0.5, 1, 1.0);
        let mut con = MoranConstruction::build(params, 2, 64, 0).unwrap();
        con.attach_measure(1e-12).unwrap();
        let rows = con.rows();
        assert_eq!(rows.len(), 2 + 4);
        assert!(rows[0].parent.is_none());
        assert!(rows.iter().skip(2).all(|r| r.parent.is_some()));
        assert!(rows.iter().all(|r| r.log_mass.is_some()));
        let js = serde_json::to_string(&rows[0]).unwrap();
        assert!(js.contains("\"level\":1"));
    }
}
