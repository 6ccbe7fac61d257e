//! Command-line driver for the symbolic-dynamics toolkit.
//!
//! Every subcommand reads one JSON configuration document, runs exactly one
//! library operation, and emits a JSON report. Reports are deterministic:
//! rerunning with the same configuration and flags reproduces the same bytes.
//! Each report embeds the SHA-256 digest of the configuration file, the
//! resolved flag values, and budget markers (exact vs. sampled, finite
//! horizon). Floating-point numbers are printed with 12 significant digits.
//!
//! Exit codes: 0 on success, 2 when a dimension-formula hypothesis is
//! violated, 3 when a work budget is exhausted, 1 for configuration and
//! usage errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use shiftrec::config::Config;
use shiftrec::moran::MoranConstruction;
use shiftrec::numerics::round_sig;
use shiftrec::recurrence::{self, CoverTarget, PsiFunction};
use shiftrec::structure;
use shiftrec::thermo::{self, Potential};
use shiftrec::words::{self, Word};
use shiftrec::{Error, Result};

/// Significant digits for every floating-point number in a report.
const REPORT_DIGITS: usize = 12;
/// Default solver / residual tolerance.
const DEFAULT_TOL: f64 = 1e-10;
/// Default horizons (deepest word length or level count) per tool.
const ENTROPY_HORIZON: usize = 16;
const PRESSURE_HORIZON: usize = 12;
const BOWEN_HORIZON: usize = 14;
const DIM_RPSI_HORIZON: usize = 20;
const DIM_RF_HORIZON: usize = 14;
const COVER_HORIZON: usize = 12;
const SPEC_HORIZON: usize = 8;
const FREE_CONCAT_HORIZON: usize = 8;
const MISTAKE_HORIZON: usize = 16;
/// Default work budgets per tool.
const EDIT_BALL_BUDGET: u64 = 1 << 20;
const MISTAKE_BUDGET: u64 = 4096;
const BRANCH_BUDGET: u64 = 4096;
/// Cover crossing scans walk this fixed grid.
const COVER_GRID_LO: f64 = 0.0;
const COVER_GRID_HI: f64 = 2.0;
const COVER_GRID_STEP: f64 = 0.01;

#[derive(Parser)]
#[command(
    name = "shiftrec",
    version,
    about = "Dimension theory of recurrence sets on shift spaces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Flags shared by every subcommand. Flags a tool does not consume are
/// ignored with a warning.
#[derive(Args)]
struct Common {
    /// JSON configuration file.
    config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized sampling and point selection.
    #[arg(long)]
    seed: Option<u64>,
    /// Solver / residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Finite horizon: deepest word length or level count.
    #[arg(long)]
    horizon: Option<usize>,
    /// Work budget: search nodes, samples, or branches, depending on the tool.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exponential growth rate (entropy) of the family language.
    Entropy(Common),
    /// Level-n pressure sums of -s(f+1) at the configured s.
    Pressure(Common),
    /// Root of the Bowen equation: the s where the pressure of -s(f+1) vanishes.
    Bowen(Common),
    /// Dimension of the set of points recurrent at gauge psi.
    #[command(name = "dim-rpsi")]
    DimRpsi(Common),
    /// Dimension of the set of points recurrent at the Birkhoff gauge of f.
    #[command(name = "dim-rf")]
    DimRf(Common),
    /// Cover-sum growth/decay audit with a dimension-bracketing grid scan.
    #[command(name = "cover-audit")]
    CoverAudit(Common),
    /// Certify a uniform gluing time for the word family.
    #[command(name = "spec-check")]
    SpecCheck(Common),
    /// Check whether family words concatenate freely.
    #[command(name = "free-concat")]
    FreeConcat(Common),
    /// Worst-case edit distance from level words to the family.
    #[command(name = "mistake-profile")]
    MistakeProfile(Common),
    /// Census of an edit ball around a center word, with growth-bound fit.
    #[command(name = "edit-ball")]
    EditBall(Common),
    /// Nested Moran constructions.
    #[command(subcommand)]
    Moran(MoranCmd),
    /// Materialize one point of a Moran construction and verify its
    /// recurrence times.
    Point(Common),
}

#[derive(Subcommand)]
enum MoranCmd {
    /// Build the nested cylinder tree and its supporting measure; cylinders
    /// stream to a JSON-lines file next to the report.
    Build(Common),
    /// Audit a construction: Holder exponents of the measure and the
    /// mass-distribution bound.
    Audit(Common),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Entropy(_) => "entropy",
            Cmd::Pressure(_) => "pressure",
            Cmd::Bowen(_) => "bowen",
            Cmd::DimRpsi(_) => "dim-rpsi",
            Cmd::DimRf(_) => "dim-rf",
            Cmd::CoverAudit(_) => "cover-audit",
            Cmd::SpecCheck(_) => "spec-check",
            Cmd::FreeConcat(_) => "free-concat",
            Cmd::MistakeProfile(_) => "mistake-profile",
            Cmd::EditBall(_) => "edit-ball",
            Cmd::Moran(MoranCmd::Build(_)) => "moran build",
            Cmd::Moran(MoranCmd::Audit(_)) => "moran audit",
            Cmd::Point(_) => "point",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Cmd::Entropy(c)
            | Cmd::Pressure(c)
            | Cmd::Bowen(c)
            | Cmd::DimRpsi(c)
            | Cmd::DimRf(c)
            | Cmd::CoverAudit(c)
            | Cmd::SpecCheck(c)
            | Cmd::FreeConcat(c)
            | Cmd::MistakeProfile(c)
            | Cmd::EditBall(c)
            | Cmd::Moran(MoranCmd::Build(c))
            | Cmd::Moran(MoranCmd::Audit(c))
            | Cmd::Point(c) => c,
        }
    }
}

/// Configuration sections a tool reads; the rest are ignored with a warning.
fn used_sections(tool: &str) -> &'static [&'static str] {
    match tool {
        "entropy" | "free-concat" | "mistake-profile" => &["family"],
        "pressure" => &["family", "potential", "s"],
        "bowen" => &["family", "potential"],
        "dim-rpsi" => &["psi"],
        "dim-rf" => &["potential"],
        "cover-audit" => &["psi", "potential", "s"],
        "spec-check" => &["family", "tau_max"],
        "edit-ball" => &["word", "delta"],
        "moran build" | "point" => &["family", "psi", "potential", "moran"],
        "moran audit" => &["family", "psi", "potential", "moran", "s"],
        _ => &[],
    }
}

/// Flags a tool consumes; the rest are ignored with a warning.
fn used_flags(tool: &str) -> &'static [&'static str] {
    match tool {
        "entropy" | "pressure" | "dim-rpsi" | "spec-check" | "free-concat" | "cover-audit" => {
            &["horizon"]
        }
        "bowen" | "dim-rf" => &["horizon", "tol"],
        "mistake-profile" => &["horizon", "budget", "seed"],
        "edit-ball" => &["budget"],
        "moran build" | "moran audit" | "point" => &["budget", "seed", "tol"],
        _ => &[],
    }
}

fn warn_ignored(cfg: &Config, com: &Common, tool: &str) {
    let sections = [
        ("family", cfg.family.is_some()),
        ("potential", cfg.potential.is_some()),
        ("psi", cfg.psi.is_some()),
        ("s", cfg.s.is_some()),
        ("word", cfg.word.is_some()),
        ("delta", cfg.delta.is_some()),
        ("tau_max", cfg.tau_max.is_some()),
        ("moran", cfg.moran.is_some()),
    ];
    for (name, present) in sections {
        if present && !used_sections(tool).contains(&name) {
            eprintln!("warning: configuration section `{name}` is not used by `{tool}`; ignored");
        }
    }
    let flags = [
        ("seed", com.seed.is_some()),
        ("tol", com.tol.is_some()),
        ("horizon", com.horizon.is_some()),
        ("budget", com.budget.is_some()),
    ];
    for (name, present) in flags {
        if present && !used_flags(tool).contains(&name) {
            eprintln!("warning: flag `--{name}` is not used by `{tool}`; ignored");
        }
    }
}

fn missing_setting(name: &str, tool: &str) -> Error {
    Error::InvalidInput(format!("configuration setting `{name}` is required by `{tool}`"))
}

fn to_value<T: serde::Serialize>(t: &T) -> Result<Value> {
    serde_json::to_value(t).map_err(|e| Error::InvalidInput(format!("report serialization: {e}")))
}

/// Rounds every float in a report to [`REPORT_DIGITS`] significant digits;
/// integers pass through exactly.
fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_u64() || n.is_i64() {
                return;
            }
            if let Some(x) = n.as_f64() {
                *v = serde_json::Number::from_f64(round_sig(x, REPORT_DIGITS))
                    .map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// What one tool produced, before the envelope is assembled.
struct ToolRun {
    report: Value,
    /// Resolved flag values the tool consumed.
    params: Value,
    /// True when any stage subsampled instead of enumerating.
    sampled: bool,
    /// True when the numbers are finite-horizon estimates rather than
    /// exact finite quantities.
    finite_horizon: bool,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(&cli.cmd) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cmd: &Cmd) -> Result<()> {
    let com = cmd.common();
    let bytes = fs::read(&com.config).map_err(|e| {
        Error::InvalidInput(format!("cannot read {}: {e}", com.config.display()))
    })?;
    let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::InvalidInput(format!("configuration is not UTF-8: {e}")))?;
    let cfg = Config::from_json(&text)?;
    warn_ignored(&cfg, com, cmd.name());

    let out = execute(cmd, &cfg, com)?;
    let mut envelope = json!({
        "tool": cmd.name(),
        "config_digest": format!("sha256:{digest}"),
        "config": to_value(&cfg)?,
        "params": out.params,
        "budget_flags": {
            "exact": !out.sampled,
            "sampled": out.sampled,
            "finite_horizon": out.finite_horizon,
        },
        "report": out.report,
    });
    round_numbers(&mut envelope);
    write_report(&envelope, com.out.as_deref())
}

fn write_report(envelope: &Value, out: Option<&Path>) -> Result<()> {
    let text = format!("{:#}\n", envelope);
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cmd: &Cmd, cfg: &Config, com: &Common) -> Result<ToolRun> {
    match cmd {
        Cmd::Entropy(_) => tool_entropy(cfg, com),
        Cmd::Pressure(_) => tool_pressure(cfg, com),
        Cmd::Bowen(_) => tool_bowen(cfg, com),
        Cmd::DimRpsi(_) => tool_dim_rpsi(cfg, com),
        Cmd::DimRf(_) => tool_dim_rf(cfg, com),
        Cmd::CoverAudit(_) => tool_cover_audit(cfg, com),
        Cmd::SpecCheck(_) => tool_spec_check(cfg, com),
        Cmd::FreeConcat(_) => tool_free_concat(cfg, com),
        Cmd::MistakeProfile(_) => tool_mistake_profile(cfg, com),
        Cmd::EditBall(_) => tool_edit_ball(cfg, com),
        Cmd::Moran(MoranCmd::Build(_)) => tool_moran_build(cfg, com),
        Cmd::Moran(MoranCmd::Audit(_)) => tool_moran_audit(cfg, com),
        Cmd::Point(_) => tool_point(cfg, com),
    }
}

fn tool_entropy(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let space = cfg.build_space()?;
    let pred = cfg.build_family()?;
    let horizon = com.horizon.unwrap_or(ENTROPY_HORIZON);
    let report = thermo::entropy_estimate(&space, &pred, horizon)?;
    Ok(ToolRun {
        report: to_value(&report)?,
        params: json!({ "horizon": horizon }),
        sampled: false,
        finite_horizon: true,
    })
}

fn tool_pressure(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let space = cfg.build_space()?;
    let pred = cfg.build_family()?;
    let pot = cfg.build_potential(&space)?;
    let s = cfg.s.ok_or_else(|| missing_setting("s", "pressure"))?;
    let horizon = com.horizon.unwrap_or(PRESSURE_HORIZON);
    let levels: Vec<usize> = (1..=horizon).collect();
    let report = thermo::pressure_estimate(&space, &pred, &pot, s, &levels)?;
    Ok(ToolRun {
        report: to_value(&report)?,
        params: json!({ "horizon": horizon }),
        sampled: false,
        finite_horizon: true,
    })
}

fn tool_bowen(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let space = cfg.build_space()?;
    let pred = cfg.build_family()?;
    let pot = cfg.build_potential(&space)?;
    let horizon = com.horizon.unwrap_or(BOWEN_HORIZON);
    let tol = com.tol.unwrap_or(DEFAULT_TOL);
    let levels: Vec<usize> = (1..=horizon).collect();
    let report = thermo::bowen_root(&space, &pred, &pot, &levels, tol)?;
    Ok(ToolRun {
        report: to_value(&report)?,
        params: json!({ "horizon": horizon, "tol": tol }),
        sampled: false,
        finite_horizon: true,
    })
}

fn tool_dim_rpsi(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let space = cfg.build_space()?;
    let psi = cfg.build_psi()?;
    let horizon = com.horizon.unwrap_or(DIM_RPSI_HORIZON);
    let report = recurrence::dimension_r_psi(&space, &psi, horizon)?;
    Ok(ToolRun {
        report: to_value(&report)?,
        params: json!({ "horizon": horizon }),
        sampled: false,
        finite_horizon: true,
    })
}

fn tool_dim_rf(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let space = cfg.build_space()?;
    let pot = cfg.build_potential(&space)?;
    let horizon = com.horizon.unwrap_or(DIM_RF_HORIZON);
    let tol = com.tol.unwrap_or(DEFAULT_TOL);
    let levels: Vec<usize> = (1..=horizon).collect();
    let report = recurrence::dimension_r_f(&space, &pot, &levels, tol)?;
    Ok(ToolRun {
        report: to_value(&report)?,
        params: json!({ "horizon": horizon, "tol": tol }),
        sampled: false,
        finite_horizon: true,
    })
}

/// An owned cover target: exactly one of the gauge and potential sections.
enum OwnedTarget {
    Psi(PsiFunction),
    Potential(Potential),
}

impl OwnedTarget {
    fn from_config(cfg: &Config, space: &shiftrec::ShiftSpace) -> Result<Self> {
        match (cfg.psi.is_some(), cfg.potential.is_some()) {
            (true, false) => Ok(OwnedTarget::Psi(cfg.build_psi()?)),
            (false, true) => Ok(OwnedTarget::Potential(cfg.build_potential(space)?)),
            (true, true) => Err(Error::InvalidInput(
                "give exactly one of the `psi` and `potential` sections for a cover audit".into(),
            )),
            (false, false) => Err(Error::InvalidInput(
                "a cover audit needs a `psi` or `potential` section".into(),
            )),
        }
    }

    fn as_target(&self) -> CoverTarget<'_> {
        match self {
            OwnedTarget::Psi(psi) => CoverTarget::Psi(psi),
            OwnedTarget::Potential(pot) => CoverTarget::Potential(pot),
        }
    }
}

fn tool_cover_audit(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let space = cfg.build_space()?;
    let owned = OwnedTarget::from_config(cfg, &space)?;
    let target = owned.as_target();
    let horizon = com.horizon.unwrap_or(COVER_HORIZON);
    let levels: Vec<usize> = (1..=horizon).collect();
    let crossing = recurrence::cover_crossing_scan(
        &space,
        &target,
        COVER_GRID_LO,
        COVER_GRID_HI,
        COVER_GRID_STEP,
        &levels,
    )?;
    let audit_at_s = match cfg.s {
        Some(s) => Some(recurrence::cover_sum_audit(&space, &target, s, &levels)?),
        None => None,
    };
    let report = json!({
        "grid": { "lo": COVER_GRID_LO, "hi": COVER_GRID_HI, "step": COVER_GRID_STEP },
        "levels": levels,
        "crossing": to_value(&crossing)?,
        "audit_at_s": to_value(&audit_at_s)?,
    });
    Ok(ToolRun {
        report,
        params: json!({ "horizon": horizon }),
        sampled: false,
        finite_horizon: true,
    })
}

fn tool_spec_check(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let space = cfg.build_space()?;
    let pred = cfg.build_family()?;
    let tau_max = cfg.tau_max.unwrap_or(8) as usize;
    let horizon = com.horizon.unwrap_or(SPEC_HORIZON);
    let report = structure::check_w_specification(&space, &pred, tau_max, horizon)?;
    Ok(ToolRun {
        report: to_value(&report)?,
        params: json!({ "horizon": horizon }),
        sampled: false,
        finite_horizon: true,
    })
}

fn tool_free_concat(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let space = cfg.build_space()?;
    let pred = cfg.build_family()?;
    let horizon = com.horizon.unwrap_or(FREE_CONCAT_HORIZON);
    let report = structure::check_free_concatenation(&space, &pred, horizon)?;
    Ok(ToolRun {
        report: to_value(&report)?,
        params: json!({ "horizon": horizon }),
        sampled: false,
        finite_horizon: true,
    })
}

fn tool_mistake_profile(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let space = cfg.build_space()?;
    let pred = cfg.build_family()?;
    let horizon = com.horizon.unwrap_or(MISTAKE_HORIZON);
    let budget = com.budget.unwrap_or(MISTAKE_BUDGET);
    let seed = com.seed.unwrap_or(0);
    let mut n_list: Vec<usize> =
        [horizon / 4, horizon / 2, 3 * horizon / 4, horizon].map(|n| n.max(1)).to_vec();
    n_list.dedup();
    let report = structure::mistake_profile(&space, &pred, &n_list, budget, seed)?;
    let sampled = report.samples.iter().any(|s| !s.exact);
    Ok(ToolRun {
        report: to_value(&report)?,
        params: json!({ "horizon": horizon, "budget": budget, "seed": seed }),
        sampled,
        finite_horizon: true,
    })
}

fn tool_edit_ball(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let space = cfg.build_space()?;
    let center: Word = cfg
        .word
        .as_deref()
        .ok_or_else(|| missing_setting("word", "edit-ball"))?
        .parse()?;
    let delta = cfg.delta.ok_or_else(|| missing_setting("delta", "edit-ball"))?;
    let budget = com.budget.unwrap_or(EDIT_BALL_BUDGET);
    let report = words::edit_ball_count(&space, &center, delta, budget)?;
    Ok(ToolRun {
        report: to_value(&report)?,
        params: json!({ "budget": budget }),
        sampled: false,
        finite_horizon: false,
    })
}

/// Builds the configured Moran construction and attaches its measure when
/// every level was enumerated exactly.
fn build_construction(cfg: &Config, com: &Common) -> Result<(MoranConstruction, Value)> {
    let params = cfg.build_moran_params()?;
    let mc = cfg.moran()?;
    let budget = com.budget.unwrap_or(BRANCH_BUDGET);
    let seed = com.seed.unwrap_or(0);
    let tol = com.tol.unwrap_or(DEFAULT_TOL);
    let mut con = MoranConstruction::build(params, mc.levels, budget, seed)?;
    if !con.sampled {
        con.attach_measure(tol)?;
    }
    Ok((con, json!({ "budget": budget, "seed": seed, "tol": tol })))
}

fn cylinders_path(out: &Path) -> PathBuf {
    out.with_extension("cylinders.jsonl")
}

fn tool_moran_build(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let (con, params) = build_construction(cfg, com)?;
    let rows = con.rows();
    let cylinders = match &com.out {
        Some(out) => {
            let path = cylinders_path(out);
            let mut text = String::new();
            for row in &rows {
                let mut line = to_value(row)?;
                round_numbers(&mut line);
                text.push_str(&line.to_string());
                text.push('\n');
            }
            fs::write(&path, text).map_err(|e| {
                Error::InvalidInput(format!("cannot write {}: {e}", path.display()))
            })?;
            Value::String(path.display().to_string())
        }
        None => {
            eprintln!("warning: no --out path, cylinder rows were not written");
            Value::Null
        }
    };
    let level_sizes: Vec<usize> = con.levels.iter().map(|l| l.cylinders.len()).collect();
    let report = json!({
        "space": con.params.space.description(),
        "block_length": con.params.m,
        "eta": con.params.eta,
        "entropy_estimate": con.params.h_estimate,
        "block_ratio": con.params.block_ratio,
        "schedule": to_value(&con.schedule)?,
        "level_sizes": level_sizes,
        "sampled": con.sampled,
        "measure": to_value(&con.measure)?,
        "cylinders": cylinders,
        "cylinder_rows": rows.len(),
    });
    Ok(ToolRun { report, params, sampled: con.sampled, finite_horizon: true })
}

fn tool_moran_audit(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let (con, params) = build_construction(cfg, com)?;
    let mc = cfg.moran()?;
    let holder = con.holder_audit(mc.audit_levels.unwrap_or(2), mc.target)?;
    let mass_check = match cfg.s {
        Some(s) => Some(con.mass_distribution_check(
            s,
            mc.mass_c.unwrap_or(1.0),
            mc.mass_diameter.unwrap_or(0.5),
        )?),
        None => None,
    };
    let conservation: Option<Vec<f64>> = con
        .measure
        .as_ref()
        .map(|m| m.per_level.iter().map(|l| l.conservation_residual).collect());
    let report = json!({
        "space": con.params.space.description(),
        "schedule": to_value(&con.schedule)?,
        "sampled": con.sampled,
        "holder": to_value(&holder)?,
        "mass_check": to_value(&mass_check)?,
        "conservation_residuals": conservation,
    });
    Ok(ToolRun { report, params, sampled: con.sampled, finite_horizon: true })
}

fn tool_point(cfg: &Config, com: &Common) -> Result<ToolRun> {
    let (con, params) = build_construction(cfg, com)?;
    let seed = com.seed.unwrap_or(0);
    let point = con.materialize_point(seed)?;
    let report = json!({
        "space": con.params.space.description(),
        "schedule": to_value(&con.schedule)?,
        "point": to_value(&point)?,
    });
    Ok(ToolRun { report, params, sampled: con.sampled, finite_horizon: false })
}
