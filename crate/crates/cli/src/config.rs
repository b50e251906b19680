//! JSON analysis config.
//!
//! Exact values (polynomial coefficients, separation inputs, derivative
//! directions) are integers or `"p/q"` strings; floats are rejected there.

use std::sync::Arc;

use equivcheck::groups::{self, PermGroup, Permutation};
use equivcheck::linalg::{parse_rational, Rational, RationalMatrix};
use equivcheck::polynomials::{power_of_sum, product_monomial, symmetrized_monomial_on, MultiPoly};
use equivcheck::representations::{basis_maps, c1_family, layer_conv, layer_custom, layer_full, pointnet_family, regular_family, BasisMapFamily};
use serde::{Deserialize, Deserializer};

use crate::specs::{parse_group, parse_rep};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// An exact rational read from an integer or a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exact(pub Rational);

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) if n.is_i64() => Ok(Exact(Rational::from_integer(n.as_i64().unwrap().into()))),
            serde_json::Value::Number(n) => Err(D::Error::custom(format!("float {n} not allowed for an exact value; use \"p/q\""))),
            serde_json::Value::String(s) => {
                parse_rational(&s).map(Exact).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
            }
            other => Err(D::Error::custom(format!("expected integer or \"p/q\" string, got {other}"))),
        }
    }
}

fn exact_vec(v: &[Exact]) -> Vec<Rational> {
    v.iter().map(|e| e.0.clone()).collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    /// Default group for `full` and `custom` families and for certificates.
    pub group: Option<GroupSpec>,
    #[serde(default)]
    pub families: Vec<FamilySpec>,
    #[serde(default)]
    pub targets: Vec<TargetSpec>,
    #[serde(default)]
    pub analyses: Vec<AnalysisSpec>,
    #[serde(default)]
    pub outputs: OutputSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_json")]
    pub json: String,
    #[serde(default = "default_text")]
    pub text: String,
    #[serde(default = "default_csv_prefix")]
    pub csv_prefix: String,
}

fn default_json() -> String {
    "report.json".into()
}

fn default_text() -> String {
    "report.txt".into()
}

fn default_csv_prefix() -> String {
    "fit".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { json: default_json(), text: default_text(), csv_prefix: default_csv_prefix() }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: FamilyKind,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// Circular convolutions of the given width under the cyclic group.
    Conv { n: usize, width: usize },
    Pointnet { n: usize },
    /// Basis maps of all equivariant maps from the natural to the regular rep of `S_n`.
    Regular { n: usize },
    /// All equivariant affine maps between two reps of a group.
    Full { group: Option<GroupSpec>, source: String, target: String },
    /// Explicit equivariant basis matrices, `target.dim × source.dim` each.
    Custom { group: Option<GroupSpec>, source: String, target: String, matrices: Vec<Vec<Vec<Exact>>> },
}

/// A group given as a short string (`"symmetric:4"`) or as an object.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Short(String),
    Object(GroupObject),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupObject {
    Symmetric { n: usize },
    Alternating { n: usize },
    Cyclic { n: usize },
    Trivial { n: usize },
    /// Closure of permutations given by image arrays.
    Generators { n: usize, gens: Vec<Vec<usize>> },
}

impl GroupSpec {
    pub fn build(&self) -> Result<PermGroup, CliError> {
        let config = |e: equivcheck::Error| CliError::Config(format!("group {}: {e}", self.label()));
        match self {
            GroupSpec::Short(s) => parse_group(s),
            GroupSpec::Object(GroupObject::Generators { n, gens }) => {
                let perms = gens
                    .iter()
                    .map(|g| {
                        if g.len() != *n {
                            return Err(equivcheck::Error::DimensionMismatch { expected: *n, found: g.len() });
                        }
                        Permutation::new(g.clone())
                    })
                    .collect::<equivcheck::Result<Vec<_>>>()
                    .map_err(config)?;
                groups::group_closure(*n, &perms, groups::DEFAULT_ORDER_CAP).map_err(config)
            }
            GroupSpec::Object(_) => parse_group(&self.label()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GroupSpec::Short(s) => s.clone(),
            GroupSpec::Object(GroupObject::Symmetric { n }) => format!("symmetric:{n}"),
            GroupSpec::Object(GroupObject::Alternating { n }) => format!("alternating:{n}"),
            GroupSpec::Object(GroupObject::Cyclic { n }) => format!("cyclic:{n}"),
            GroupSpec::Object(GroupObject::Trivial { n }) => format!("trivial:{n}"),
            GroupSpec::Object(GroupObject::Generators { n, gens }) => format!("generated:{n}:{gens:?}"),
        }
    }
}

/// Group named by an analysis or family, falling back to the config-level group.
pub fn pick_group<'a>(own: &'a Option<GroupSpec>, default: &'a Option<GroupSpec>) -> Result<&'a GroupSpec, CliError> {
    own.as_ref().or(default.as_ref()).ok_or_else(|| CliError::Config("no group given and no config-level group".into()))
}

#[derive(Clone, Debug, Deserialize)]
pub struct TargetSpec {
    pub name: String,
    #[serde(flatten)]
    pub body: TargetBody,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case")]
pub enum TargetBody {
    PowerOfSum { n: usize, degree: u32 },
    ProductMonomial { n: usize },
    /// Symmetrization over the first `exponents.len()` of `n` variables.
    SymmetrizedMonomial { exponents: Vec<u32>, n: Option<usize> },
    Literal { n: usize, terms: Vec<(Exact, Vec<u32>)> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrizedSpec {
    pub s: Vec<u32>,
    pub a: Vec<u32>,
    pub directions: Vec<Vec<Exact>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalysisSpec {
    Membership {
        target: String,
        family: String,
    },
    FailureTests {
        target: Option<String>,
        family: String,
        symmetrized: Option<SymmetrizedSpec>,
    },
    Separation {
        family: String,
        pairs: Vec<(Vec<Exact>, Vec<Exact>)>,
        /// Group whose orbits are compared against the separation relation.
        orbit_group: Option<GroupSpec>,
    },
    Certificate {
        group: Option<GroupSpec>,
        subgroup: String,
        #[serde(default = "default_components")]
        components: Vec<String>,
    },
    Compare {
        first: String,
        second: String,
        degree_cap: u32,
    },
    Fit {
        target: String,
        family: String,
        widths: Vec<usize>,
        seeds: Option<Vec<u64>>,
        activation: Option<String>,
        samples: Option<usize>,
        inner_scale: Option<f64>,
        ridge_lambda: Option<f64>,
        domain_box: Option<Vec<(f64, f64)>>,
    },
}

fn default_components() -> Vec<String> {
    vec!["stabilizer:0".into()]
}

impl AnalysisSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            AnalysisSpec::Membership { .. } => "membership",
            AnalysisSpec::FailureTests { .. } => "failure_tests",
            AnalysisSpec::Separation { .. } => "separation",
            AnalysisSpec::Certificate { .. } => "certificate",
            AnalysisSpec::Compare { .. } => "compare",
            AnalysisSpec::Fit { .. } => "fit",
        }
    }

    fn references(&self) -> (Vec<&str>, Vec<&str>) {
        match self {
            AnalysisSpec::Membership { target, family } => (vec![target], vec![family]),
            AnalysisSpec::FailureTests { target, family, .. } => (target.iter().map(String::as_str).collect(), vec![family]),
            AnalysisSpec::Separation { family, .. } => (vec![], vec![family]),
            AnalysisSpec::Certificate { .. } => (vec![], vec![]),
            AnalysisSpec::Compare { first, second, .. } => (vec![], vec![first, second]),
            AnalysisSpec::Fit { target, family, .. } => (vec![target], vec![family]),
        }
    }
}

pub fn parse_config(text: &str) -> Result<AnalysisConfig, CliError> {
    let cfg: AnalysisConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
    if cfg.version != SCHEMA_VERSION {
        return Err(CliError::Config(format!("unsupported config version {} (expected {SCHEMA_VERSION})", cfg.version)));
    }
    Ok(cfg)
}

pub fn build_family(spec: &FamilySpec, default_group: &Option<GroupSpec>) -> Result<BasisMapFamily, CliError> {
    let wrap = |e: equivcheck::Error| CliError::Config(format!("family {:?}: {e}", spec.name));
    let family = match &spec.kind {
        FamilyKind::Conv { n, width: 1 } => c1_family(*n).map_err(wrap)?,
        FamilyKind::Conv { n, width } => basis_maps(&layer_conv(*n, *width).map_err(wrap)?),
        FamilyKind::Pointnet { n } => pointnet_family(*n).map_err(wrap)?,
        FamilyKind::Regular { n } => regular_family(*n).map_err(wrap)?,
        FamilyKind::Full { group, source, target } => {
            let g = Arc::new(pick_group(group, default_group)?.build()?);
            let layer = layer_full(&parse_rep(&g, source)?, &parse_rep(&g, target)?).map_err(wrap)?;
            basis_maps(&layer)
        }
        FamilyKind::Custom { group, source, target, matrices } => {
            let g = Arc::new(pick_group(group, default_group)?.build()?);
            let (v, w) = (parse_rep(&g, source)?, parse_rep(&g, target)?);
            let mats = matrices
                .iter()
                .map(|m| RationalMatrix::from_rows(m.iter().map(|row| exact_vec(row)).collect(), v.dim()))
                .collect::<equivcheck::Result<Vec<_>>>()
                .map_err(wrap)?;
            for m in &mats {
                if m.rows() != w.dim() {
                    return Err(wrap(equivcheck::Error::DimensionMismatch { expected: w.dim(), found: m.rows() }));
                }
            }
            basis_maps(&layer_custom(&v, &w, mats).map_err(wrap)?)
        }
    };
    Ok(family.named(spec.name.clone()))
}

pub fn build_target(spec: &TargetSpec) -> Result<MultiPoly, CliError> {
    let wrap = |e: equivcheck::Error| CliError::Config(format!("target {:?}: {e}", spec.name));
    match &spec.body {
        TargetBody::PowerOfSum { n, degree } => Ok(power_of_sum(*n, *degree)),
        TargetBody::ProductMonomial { n } => Ok(product_monomial(*n)),
        TargetBody::SymmetrizedMonomial { exponents, n } => {
            let vars: Vec<usize> = (0..exponents.len()).collect();
            symmetrized_monomial_on(exponents, &vars, n.unwrap_or(exponents.len())).map_err(wrap)
        }
        TargetBody::Literal { n, terms } => {
            MultiPoly::from_terms(*n, terms.iter().map(|(c, e)| (c.0.clone(), e.clone())).collect()).map_err(wrap)
        }
    }
}

/// Resolved families and targets, in declaration order.
pub struct Resolved {
    pub families: Vec<(String, BasisMapFamily)>,
    pub targets: Vec<(String, MultiPoly)>,
}

impl Resolved {
    pub fn family(&self, name: &str) -> &BasisMapFamily {
        &self.families.iter().find(|(n, _)| n == name).expect("names resolved").1
    }

    pub fn target(&self, name: &str) -> &MultiPoly {
        &self.targets.iter().find(|(n, _)| n == name).expect("names resolved").1
    }
}

/// Builds every family and target and checks that analyses only reference declared names.
pub fn resolve(cfg: &AnalysisConfig) -> Result<Resolved, CliError> {
    let mut seen = std::collections::BTreeSet::new();
    for name in cfg.families.iter().map(|f| &f.name).chain(cfg.targets.iter().map(|t| &t.name)) {
        if !seen.insert(name) {
            return Err(CliError::Config(format!("duplicate name {name:?}")));
        }
    }
    for a in &cfg.analyses {
        let (targets, families) = a.references();
        if let Some(t) = targets.iter().find(|t| !cfg.targets.iter().any(|s| s.name == **t)) {
            return Err(CliError::Config(format!("unknown target {t:?}")));
        }
        if let Some(f) = families.iter().find(|f| !cfg.families.iter().any(|s| s.name == **f)) {
            return Err(CliError::Config(format!("unknown family {f:?}")));
        }
    }
    Ok(Resolved {
        families: cfg.families.iter().map(|f| Ok((f.name.clone(), build_family(f, &cfg.group)?))).collect::<Result<_, CliError>>()?,
        targets: cfg.targets.iter().map(|t| Ok((t.name.clone(), build_target(t)?))).collect::<Result<_, CliError>>()?,
    })
}

pub(crate) fn exact_pairs(pairs: &[(Vec<Exact>, Vec<Exact>)]) -> Vec<(Vec<Rational>, Vec<Rational>)> {
    pairs.iter().map(|(x, y)| (exact_vec(x), exact_vec(y))).collect()
}

pub(crate) fn exact_vectors(vs: &[Vec<Exact>]) -> Vec<Vec<Rational>> {
    vs.iter().map(|v| exact_vec(v)).collect()
}
