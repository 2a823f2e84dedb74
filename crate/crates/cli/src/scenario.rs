//! Scenario configs: what to run, on which mapping and norm, and where the
//! results go.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use quadlab_core::finite::check_admissible;
use quadlab_core::polarization::IdentityMode;
use quadlab_core::stability::{BoundFamily, ControlFunction, Direction};
use quadlab_core::{EquationSpec, Field, GroupSpec, Mapping, ModulePoint, PointShape, QuasiNormSpec};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
    pub experiment: Experiment,
}

/// Relative paths resolve against the output directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Defaults to `<name>.csv`.
    #[serde(default)]
    pub results: Option<PathBuf>,
    #[serde(default)]
    pub plotdata: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Stability(StabilitySpec),
    Covariance(CovarianceSpec),
    Oracle(OracleSpec),
    InnerProduct(InnerProductSpec),
    BoundEquality(BoundEqualitySpec),
    DeadZone(DeadZoneSpec),
}

fn one() -> usize {
    1
}

fn default_m_max() -> usize {
    60
}

fn default_tol() -> f64 {
    1e-9
}

fn default_series_tol() -> f64 {
    1e-12
}

fn default_precheck() -> usize {
    200
}

fn default_trials() -> usize {
    2000
}

fn default_half_width() -> f64 {
    10.0
}

/// The direct method on `f`, checked against the bound for the `n`-variable
/// equation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySpec {
    pub n: usize,
    pub mapping: Mapping,
    pub control: ControlSpec,
    /// Domain norm; its `dim` is the module rank.
    pub norm: QuasiNormSpec,
    #[serde(default)]
    pub codomain_norm: Option<QuasiNormSpec>,
    /// Size of the matrix algebra `M_k`.
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default)]
    pub field: Field,
    #[serde(default)]
    pub family: BoundFamily,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
    #[serde(default = "default_precheck")]
    pub precheck_samples: usize,
    pub probes: ProbeSpec,
}

impl StabilitySpec {
    pub fn shape(&self) -> PointShape {
        PointShape {
            rank: self.norm.dim(),
            k: self.k,
            field: self.field,
        }
    }
}

/// A control function given outright or fitted to the mapping's sampled
/// twisted remainders.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlSpec {
    Power {
        epsilon: f64,
        r: f64,
    },
    Constant {
        theta: f64,
    },
    FitPower {
        r: f64,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_half_width")]
        half_width: f64,
    },
    FitConstant {
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_half_width")]
        half_width: f64,
    },
}

impl ControlSpec {
    pub fn fixed(&self) -> Option<ControlFunction> {
        match *self {
            ControlSpec::Power { epsilon, r } => Some(ControlFunction::Power { epsilon, r }),
            ControlSpec::Constant { theta } => Some(ControlFunction::Constant { theta }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeSpec {
    Points {
        points: Vec<ModulePoint>,
    },
    /// `count` points drawn uniformly from the box `[-half_width, half_width]`.
    Sampled {
        count: usize,
        #[serde(default = "default_half_width")]
        half_width: f64,
    },
    /// `direction` rescaled to each of the given norms.
    Ray {
        direction: ModulePoint,
        norms: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    /// `Q(ux) = u Q(x) u*` for `count` Haar unitaries.
    Unitary { count: usize },
    /// `Q(ax) = |a|^2 Q(x)` for `count` scalars from `[-2, 2] + [-2, 2]i`.
    Scalar { count: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceSpec {
    pub run: StabilitySpec,
    pub action: Action,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceExpectation {
    #[default]
    Equal,
    Differ,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub a: EquationSpec,
    pub b: EquationSpec,
    pub q: u64,
    pub d: usize,
    #[serde(default)]
    pub expect: SpaceExpectation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityExpectation {
    #[default]
    Holds,
    Violated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerProductSpec {
    pub norm: QuasiNormSpec,
    pub modes: Vec<IdentityMode>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub expect: IdentityExpectation,
}

fn default_rel_tol() -> f64 {
    1e-12
}

/// Compares the bounds for modulus `K = 1` and exponent `p = 1` over a grid
/// of power controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundEqualitySpec {
    pub ns: Vec<usize>,
    pub rs: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub norms: Vec<f64>,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
}

/// Constant-control bounds across moduli `ks`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeadZoneSpec {
    pub n: usize,
    pub theta: f64,
    pub ks: Vec<f64>,
}

fn at(path: &str, e: impl ToString) -> HarnessError {
    HarnessError::Invalid {
        path: path.to_string(),
        message: e.to_string(),
    }
}

fn require(cond: bool, path: &str, message: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(at(path, message))
    }
}

impl Scenario {
    /// Parses and validates; errors carry the path of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            at(&path, e.into_inner())
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios serialize")
    }

    pub fn validate(&self) -> Result<()> {
        require(!self.name.trim().is_empty(), "name", "must not be empty")?;
        require(
            !self.name.contains(['/', '\\']),
            "name",
            "must not contain path separators",
        )?;
        match &self.experiment {
            Experiment::Stability(s) => validate_stability(s, "experiment.stability"),
            Experiment::Covariance(c) => {
                validate_stability(&c.run, "experiment.covariance.run")?;
                let count = match c.action {
                    Action::Unitary { count } | Action::Scalar { count } => count,
                };
                require(count > 0, "experiment.covariance.action.count", "must be positive")?;
                if let Action::Scalar { .. } = c.action {
                    require(
                        c.run.k == 1,
                        "experiment.covariance.run.k",
                        "scalar action needs the scalar algebra (k = 1)",
                    )?;
                }
                require(
                    c.tol > 0.0 && c.tol.is_finite(),
                    "experiment.covariance.tol",
                    "must be positive",
                )
            }
            Experiment::Oracle(o) => {
                let group = GroupSpec::new(o.q, o.d).map_err(|e| at("experiment.oracle.q", e))?;
                o.a.validate().map_err(|e| at("experiment.oracle.a", e))?;
                o.b.validate().map_err(|e| at("experiment.oracle.b", e))?;
                check_admissible(&o.a, &group).map_err(|e| at("experiment.oracle.a", e))?;
                check_admissible(&o.b, &group).map_err(|e| at("experiment.oracle.b", e))
            }
            Experiment::InnerProduct(s) => {
                require(!s.modes.is_empty(), "experiment.inner_product.modes", "must not be empty")?;
                for (i, m) in s.modes.iter().enumerate() {
                    m.equation()
                        .validate()
                        .map_err(|e| at(&format!("experiment.inner_product.modes[{i}]"), e))?;
                }
                Ok(())
            }
            Experiment::BoundEquality(b) => {
                let p = "experiment.bound_equality";
                require(!b.ns.is_empty(), &format!("{p}.ns"), "must not be empty")?;
                require(b.ns.iter().all(|n| *n >= 3), &format!("{p}.ns"), "need n >= 3")?;
                require(!b.rs.is_empty(), &format!("{p}.rs"), "must not be empty")?;
                require(
                    b.rs.iter().all(|r| r.is_finite() && *r > 0.0),
                    &format!("{p}.rs"),
                    "need finite r > 0",
                )?;
                require(!b.epsilons.is_empty(), &format!("{p}.epsilons"), "must not be empty")?;
                require(
                    b.epsilons.iter().all(|e| e.is_finite() && *e > 0.0),
                    &format!("{p}.epsilons"),
                    "need finite epsilon > 0",
                )?;
                require(!b.norms.is_empty(), &format!("{p}.norms"), "must not be empty")?;
                require(
                    b.norms.iter().all(|t| t.is_finite() && *t > 0.0),
                    &format!("{p}.norms"),
                    "need finite norms > 0",
                )?;
                require(b.rel_tol > 0.0, &format!("{p}.rel_tol"), "must be positive")?;
                require(b.series_tol > 0.0, &format!("{p}.series_tol"), "must be positive")
            }
            Experiment::DeadZone(d) => {
                let p = "experiment.dead_zone";
                require(d.n >= 3, &format!("{p}.n"), "need n >= 3")?;
                require(
                    d.theta.is_finite() && d.theta >= 0.0,
                    &format!("{p}.theta"),
                    "need finite theta >= 0",
                )?;
                require(!d.ks.is_empty(), &format!("{p}.ks"), "must not be empty")?;
                require(
                    d.ks.iter().all(|k| k.is_finite() && *k >= 1.0),
                    &format!("{p}.ks"),
                    "moduli are at least 1",
                )
            }
        }
    }
}

fn validate_stability(s: &StabilitySpec, path: &str) -> Result<()> {
    let field = |name: &str| format!("{path}.{name}");
    require(s.n >= 3, &field("n"), "need n >= 3")?;
    require(s.k >= 1, &field("k"), "need k >= 1")?;
    require(s.m_max >= 1, &field("m_max"), "need at least one iteration")?;
    require(s.tol > 0.0, &field("tol"), "must be positive")?;
    require(s.series_tol > 0.0, &field("series_tol"), "must be positive")?;
    s.mapping.validate().map_err(|e| at(&field("mapping"), e))?;
    match &s.control {
        ControlSpec::FitPower { r, trials, half_width } => {
            require(r.is_finite() && *r >= 0.0, &field("control.r"), "need finite r >= 0")?;
            require(*trials > 0, &field("control.trials"), "must be positive")?;
            require(
                half_width.is_finite() && *half_width > 0.0,
                &field("control.half_width"),
                "must be positive",
            )?;
        }
        ControlSpec::FitConstant { trials, half_width } => {
            require(*trials > 0, &field("control.trials"), "must be positive")?;
            require(
                half_width.is_finite() && *half_width > 0.0,
                &field("control.half_width"),
                "must be positive",
            )?;
        }
        fixed => fixed
            .fixed()
            .expect("fixed variant")
            .validate()
            .map_err(|e| at(&field("control"), e))?,
    }
    let shape = s.shape();
    let check_point = |p: &ModulePoint, where_: String| -> Result<()> {
        require(
            p.rank() == shape.rank && p.k() == shape.k,
            &where_,
            &format!("expected rank {} over M_{}", shape.rank, shape.k),
        )?;
        require(p.is_finite(), &where_, "coordinates must be finite")
    };
    match &s.probes {
        ProbeSpec::Points { points } => {
            require(!points.is_empty(), &field("probes.points"), "must not be empty")?;
            for (i, p) in points.iter().enumerate() {
                check_point(p, field(&format!("probes.points[{i}]")))?;
            }
        }
        ProbeSpec::Sampled { count, half_width } => {
            require(*count > 0, &field("probes.count"), "must be positive")?;
            require(
                half_width.is_finite() && *half_width > 0.0,
                &field("probes.half_width"),
                "must be positive",
            )?;
        }
        ProbeSpec::Ray { direction, norms } => {
            check_point(direction, field("probes.direction"))?;
            let len = s.norm.norm_eval(direction).map_err(|e| at(&field("probes.direction"), e))?;
            require(len > 0.0, &field("probes.direction"), "must be nonzero")?;
            require(!norms.is_empty(), &field("probes.norms"), "must not be empty")?;
            require(
                norms.iter().all(|t| t.is_finite() && *t >= 0.0),
                &field("probes.norms"),
                "need finite norms >= 0",
            )?;
        }
    }
    if let Some(c) = &s.codomain_norm {
        require(
            c.dim() == s.mapping.codomain_rank(),
            &field("codomain_norm.dim"),
            &format!("mapping has codomain rank {}", s.mapping.codomain_rank()),
        )?;
    }
    Ok(())
}
