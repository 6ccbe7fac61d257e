//! Declarative JSON configuration for spaces, potentials, gauges, word
//! families, and Moran constructions.
//!
//! The command-line tools read one JSON document and build domain objects
//! from it; everything here is plain serde data with explicit `build`
//! methods, so configurations round-trip losslessly and reports can embed
//! the exact input they were produced from.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::moran::{MoranParams, MoranVariant};
use crate::recurrence::{PsiForm, PsiFunction};
use crate::shifts::{GapTail, SGapSet, ShiftSpace};
use crate::structure::WordPredicate;
use crate::thermo::Potential;
use crate::words::Word;
use crate::Result;

/// Default follower-automaton horizon for beta-shifts built from config.
const BETA_HORIZON: usize = 256;

/// Which shift space to work in.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceConfig {
    /// Full shift on `p` symbols.
    Full { p: u32 },
    /// Beta-shift. `beta` accepts integers ("3"), decimals ("2.75"),
    /// square roots ("sqrt2"), and quadratic expressions such as
    /// "(1+sqrt5)/2". `horizon` bounds decidable word lengths.
    Beta {
        beta: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<usize>,
    },
    /// S-gap shift: binary words whose interior 0-runs have lengths in
    /// the set, given as explicit values plus an optional tail.
    SGap {
        #[serde(default)]
        allowed: Vec<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<GapTail>,
    },
    /// Subshift on `p` symbols avoiding every listed word.
    Forbidden { p: u32, forbid: Vec<String> },
}

impl SpaceConfig {
    pub fn build(&self) -> Result<ShiftSpace> {
        match self {
            SpaceConfig::Full { p } => ShiftSpace::full(*p),
            SpaceConfig::Beta { beta, horizon } => {
                ShiftSpace::beta_from_str(beta, horizon.unwrap_or(BETA_HORIZON))
            }
            SpaceConfig::SGap { allowed, tail } => {
                ShiftSpace::sgap(SGapSet::new(allowed.iter().copied(), tail.clone())?)
            }
            SpaceConfig::Forbidden { p, forbid } => {
                let words = forbid
                    .iter()
                    .map(|s| s.parse::<Word>())
                    .collect::<Result<Vec<_>>>()?;
                ShiftSpace::forbidden(*p, &words)
            }
        }
    }
}

/// A strictly positive potential: depth 0 takes `value`, positive depth
/// takes a `values` table covering exactly the admissible words of that
/// length.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<BTreeMap<String, f64>>,
}

impl PotentialConfig {
    pub fn build(&self, space: &ShiftSpace) -> Result<Potential> {
        if self.depth == 0 {
            if self.values.is_some() {
                return Err(Error::InvalidInput(
                    "a depth-0 potential takes \"value\", not \"values\"".into(),
                ));
            }
            let v = self.value.ok_or_else(|| {
                Error::InvalidInput("a depth-0 potential needs \"value\"".into())
            })?;
            Potential::constant(v)
        } else {
            if self.value.is_some() {
                return Err(Error::InvalidInput(
                    "a positive-depth potential takes \"values\", not \"value\"".into(),
                ));
            }
            let raw = self.values.as_ref().ok_or_else(|| {
                Error::InvalidInput("a positive-depth potential needs \"values\"".into())
            })?;
            let mut entries = BTreeMap::new();
            for (k, &v) in raw {
                entries.insert(k.parse::<Word>()?, v);
            }
            Potential::from_table(space, self.depth, &entries)
        }
    }
}

/// Moran construction parameters (the variant comes from whether the
/// top-level config carries a gauge or a potential).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoranConfig {
    /// Block length `M`.
    pub m: u64,
    /// Density slack in (0, 1).
    pub eta: f64,
    /// Gauge variant: first-level target length (defaults to `m`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<u64>,
    /// Construction depth in levels.
    pub levels: usize,
    /// Holder audit: how many deepest level regions to scan (default 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_levels: Option<usize>,
    /// Holder audit: exponent the minimum must clear.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// Mass-distribution check: the constant `c` (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_c: Option<f64>,
    /// Mass-distribution check: the diameter cutoff (default 0.5).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_diameter: Option<f64>,
}

/// One configuration document covering every tool; each tool reads the
/// sections it needs and rejects configs missing them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub space: SpaceConfig,
    /// Word family, e.g. "all", "ends-with:01" (default "all").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialConfig>,
    /// Gauge function for recurrence-set work.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<PsiForm>,
    /// Exponent for pressure evaluation and cover audits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Center word for edit-ball work.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<String>,
    /// Edit-ball radius fraction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Largest gap tried by specification checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moran: Option<MoranConfig>,
}

fn missing(section: &str, needed_by: &str) -> Error {
    Error::InvalidInput(format!("this command needs a \"{section}\" section ({needed_by})"))
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("bad configuration: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    pub fn build_space(&self) -> Result<ShiftSpace> {
        self.space.build()
    }

    pub fn build_family(&self) -> Result<WordPredicate> {
        match &self.family {
            None => Ok(WordPredicate::All),
            Some(s) => s.parse(),
        }
    }

    pub fn build_potential(&self, space: &ShiftSpace) -> Result<Potential> {
        self.potential
            .as_ref()
            .ok_or_else(|| missing("potential", "it defines the Birkhoff weights"))?
            .build(space)
    }

    pub fn build_psi(&self) -> Result<PsiFunction> {
        PsiFunction::new(
            self.psi
                .clone()
                .ok_or_else(|| missing("psi", "it defines the recurrence gauge"))?,
        )
    }

    pub fn moran(&self) -> Result<&MoranConfig> {
        self.moran
            .as_ref()
            .ok_or_else(|| missing("moran", "it sets block length, slack, and depth"))
    }

    /// Assembles validated Moran parameters; the variant is chosen by
    /// which of `psi` / `potential` the config carries (exactly one).
    pub fn build_moran_params(&self) -> Result<MoranParams> {
        let mc = self.moran()?;
        let space = self.build_space()?;
        let family = self.build_family()?;
        let variant = match (&self.psi, &self.potential) {
            (Some(_), None) => MoranVariant::Psi(self.build_psi()?),
            (None, Some(_)) => MoranVariant::F(self.build_potential(&space)?),
            (None, None) => {
                return Err(missing("psi (or potential)", "it selects the recurrence set"))
            }
            (Some(_), Some(_)) => {
                return Err(Error::InvalidInput(
                    "give either \"psi\" or \"potential\", not both: they select \
                     different recurrence sets"
                    .into(),
                ))
            }
        };
        MoranParams::new(space, family, variant, mc.m, mc.eta, mc.n1.unwrap_or(mc.m))
    }
}
