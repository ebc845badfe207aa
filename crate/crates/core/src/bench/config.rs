//! Experiment configuration, read from TOML (or JSON) files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::solutions::{solution, validate_registry, Solution};
use crate::basis::{basis_size, LinearOperator, RadialKernel};
use crate::error::{config, Error, Result};
use crate::geometry::{Domain, Shape};
use crate::nodegen::{fill_advancing_front, fill_halton, fill_polar, NodeSet, DEFAULT_SKIP};
use crate::pde::{BcKind, BcRegion, ProblemSpec, ScalarField, SolverKind};
use crate::point::{self, Point};

/// A named benchmark domain or an explicit shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    Named(String),
    Shape(Shape),
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        match self {
            DomainSpec::Named(name) => Domain::named(name),
            DomainSpec::Shape(s) => Domain::new(s.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    #[default]
    AdvancingFront,
    /// Halton interior with the advancing-front node count.
    Halton,
    Polar,
}

/// Boundary-condition layouts. Data for the first three come from the
/// analytic solution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BcLayout {
    #[default]
    DirichletAll,
    /// Dirichlet where `x > 0.5`, Neumann elsewhere.
    MixedXGtHalf,
    /// `u + alpha du/dn = g` everywhere.
    Robin { alpha: f64 },
    /// Heat-sink analog without analytic solution: `u = t_hot` where the
    /// last coordinate lies below `cut`, `u + alpha du/dn = t_out` elsewhere.
    Heatsink { t_hot: f64, t_out: f64, alpha: f64, cut: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRange {
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSpec {
    pub h_list: Vec<f64>,
    pub n_list: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionId {
    /// `|x - c| > 0.4` around the domain's bounding-box center.
    BoundaryBand,
    /// Complement of `boundary_band`.
    InteriorCore,
}

impl RegionId {
    pub fn predicate(self, domain: &Domain) -> impl Fn(&Point) -> bool + Send + Sync + 'static {
        let (lo, hi) = domain.bounding_box();
        let c = point::scale(&point::add(&lo, &hi), 0.5);
        move |x: &Point| {
            let outer = point::dist(x, &c) > 0.4;
            match self {
                RegionId::BoundaryBand => outer,
                RegionId::InteriorCore => !outer,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionFix {
    pub region: RegionId,
    pub n_fixed: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImexSpec {
    /// Defaults to `m + 2`.
    #[serde(default)]
    pub m_high: Option<u32>,
}

fn default_name() -> String {
    "run".into()
}
fn default_seed() -> u64 {
    1
}
fn default_kernel() -> String {
    "phs3".into()
}
fn default_m() -> u32 {
    3
}
fn default_operator() -> String {
    "laplacian".into()
}
fn default_solution() -> String {
    "sin".into()
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// One experiment: a node set, a problem and either a stencil-size sweep or
/// a convergence study. `solution = "none"` is allowed only with the
/// heatsink layout (right-hand side zero).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub domain: DomainSpec,
    pub h: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub generator: Generator,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    #[serde(default = "default_m")]
    pub m: u32,
    #[serde(default = "default_operator")]
    pub operator: String,
    #[serde(default = "default_solution")]
    pub solution: String,
    #[serde(default)]
    pub bc: BcLayout,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_fix: Option<RegionFix>,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imex: Option<ImexSpec>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

impl ExperimentConfig {
    /// Minimal sweep configuration on the default problem.
    pub fn sweep(name: &str, domain: &str, h: f64, n_min: usize, n_max: usize) -> Self {
        ExperimentConfig {
            name: name.into(),
            domain: DomainSpec::Named(domain.into()),
            h,
            seed: default_seed(),
            generator: Generator::default(),
            kernel: default_kernel(),
            m: default_m(),
            operator: default_operator(),
            solution: default_solution(),
            bc: BcLayout::default(),
            sweep: Some(SweepRange { n_min, n_max }),
            convergence: None,
            region_fix: None,
            solver: SolverKind::default(),
            imex: None,
            output: default_output(),
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`. A run manifest is
    /// accepted too; its `config` entry is used.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
            let value = match value.get("config") {
                Some(c) if value.get("schema_version").is_some() => c.clone(),
                _ => value,
            };
            serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn dim(&self) -> Result<usize> {
        Ok(self.domain.build()?.dim())
    }

    pub fn kernel(&self) -> Result<RadialKernel> {
        self.kernel.parse()
    }

    pub fn m_high(&self) -> Option<u32> {
        self.imex.map(|i| i.m_high.unwrap_or(self.m + 2))
    }

    pub fn has_solution(&self) -> bool {
        self.solution != "none"
    }

    /// Checks ids, ranges and the sweep/convergence choice without doing
    /// any numerical work.
    pub fn validate(&self) -> Result<()> {
        let domain = self.domain.build()?;
        let dim = domain.dim();
        if !(self.h > 0.0 && self.h.is_finite()) {
            return config(format!("h must be positive, got {}", self.h));
        }
        self.kernel()?;
        LinearOperator::named(&self.operator, dim)?;
        if self.has_solution() {
            validate_registry()?;
            solution(&self.solution, dim)?;
        } else if !matches!(self.bc, BcLayout::Heatsink { .. }) {
            return config("solution 'none' requires the heatsink boundary layout");
        }
        let need = basis_size(self.m, dim);
        match (&self.sweep, &self.convergence) {
            (Some(s), None) => {
                if s.n_min > s.n_max {
                    return config(format!("empty sweep range {}..{}", s.n_min, s.n_max));
                }
                if s.n_min < need {
                    return config(format!("n_min {} is below the {need} monomials of degree {}", s.n_min, self.m));
                }
            }
            (None, Some(c)) => {
                if c.h_list.len() < 3 {
                    return config("convergence needs at least three spacings");
                }
                if c.h_list.iter().any(|h| !(*h > 0.0)) {
                    return config("convergence spacings must be positive");
                }
                if c.n_list.is_empty() || c.n_list.iter().any(|&n| n < need) {
                    return config(format!("convergence stencil sizes must be at least {need}"));
                }
                if !self.has_solution() {
                    return config("convergence studies need an analytic solution");
                }
            }
            (Some(_), Some(_)) => return config("give either a sweep or a convergence study, not both"),
            (None, None) => return config("missing sweep or convergence section"),
        }
        if let Some(r) = &self.region_fix {
            if r.n_fixed < need {
                return config(format!("n_fixed {} is below {need}", r.n_fixed));
            }
            if self.convergence.is_some() {
                return config("region_fix applies to sweeps only");
            }
        }
        if let Some(mh) = self.m_high() {
            if mh <= self.m {
                return config(format!("IMEX degree {mh} must exceed m = {}", self.m));
            }
        }
        if let BcLayout::Robin { alpha } | BcLayout::Heatsink { alpha, .. } = self.bc {
            if !alpha.is_finite() {
                return config("Robin alpha must be finite");
            }
        }
        Ok(())
    }

    pub fn solution_entry(&self) -> Result<Option<Solution>> {
        if !self.has_solution() {
            return Ok(None);
        }
        Ok(Some(solution(&self.solution, self.dim()?)?))
    }

    /// Node set at spacing `h` (boundary roles and ghosts not yet applied).
    pub fn nodes_at(&self, h: f64) -> Result<NodeSet> {
        generate_nodes(&self.domain.build()?, self.generator, h, self.seed)
    }

    /// The boundary-value problem described by the configuration.
    pub fn problem(&self) -> Result<ProblemSpec> {
        let domain = self.domain.build()?;
        let dim = domain.dim();
        let op = LinearOperator::named(&self.operator, dim)?;
        let sol = self.solution_entry()?;
        let rhs: ScalarField = match &sol {
            Some(s) => s.rhs_field(&op),
            None => Arc::new(|_| 0.0),
        };
        let bc = match (&self.bc, sol) {
            (BcLayout::DirichletAll, Some(s)) => vec![BcRegion::everywhere(BcKind::Dirichlet(s.field()))],
            (BcLayout::MixedXGtHalf, Some(s)) => vec![
                BcRegion::new(|x| x[0] > 0.5, BcKind::Dirichlet(s.field())),
                BcRegion::everywhere(BcKind::Neumann(normal_derivative(&domain, s))),
            ],
            (BcLayout::Robin { alpha }, Some(s)) => {
                let alpha = *alpha;
                let dn = normal_derivative(&domain, s);
                vec![BcRegion::everywhere(BcKind::Robin { alpha, g: Arc::new(move |x| s.value(x) + alpha * dn(x)) })]
            }
            (&BcLayout::Heatsink { t_hot, t_out, alpha, cut }, _) => vec![
                BcRegion::new(move |x| x[dim - 1] < cut, BcKind::Dirichlet(Arc::new(move |_| t_hot))),
                BcRegion::everywhere(BcKind::Robin { alpha, g: Arc::new(move |_| t_out) }),
            ],
            (_, None) => return config("this boundary layout needs an analytic solution"),
        };
        Ok(ProblemSpec { domain, operator: op, rhs, bc })
    }
}

fn normal_derivative(domain: &Domain, s: Solution) -> ScalarField {
    let domain = domain.clone();
    let dim = domain.dim();
    Arc::new(move |x| {
        let g = s.gradient(x);
        match domain.outward_normal(&x[..dim]) {
            Ok(n) => point::dot(&g, &n.normal),
            Err(_) => f64::NAN,
        }
    })
}

/// Nodes from one of the generators. Halton sets get as many interior
/// nodes as the advancing-front set with the same spacing and seed.
pub fn generate_nodes(domain: &Domain, generator: Generator, h: f64, seed: u64) -> Result<NodeSet> {
    let boundary = || domain.discretize_boundary(h);
    match generator {
        Generator::AdvancingFront => fill_advancing_front(domain, &boundary()?, h, seed),
        Generator::Polar => fill_polar(domain, h),
        Generator::Halton => {
            let b = boundary()?;
            let reference = fill_advancing_front(domain, &b, h, seed)?;
            let target = reference.interior_indices().len();
            let mut nodes = fill_halton(domain, &b, target, DEFAULT_SKIP + seed as usize)?;
            nodes.h = h;
            nodes.seed = seed;
            Ok(nodes)
        }
    }
}
