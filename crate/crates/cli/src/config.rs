//! Experiment configuration: schema validation, typed parsing and
//! conversion to core types.

use ellbc::adapted::{mode_split, BoundaryOperator1D, DEFAULT_REALPART_TOL};
use ellbc::bconds::{aps, graph_from_subspaces, matching, BoundaryCondition, GraphBC, LocalBC, PseudoLocalBC};
use ellbc::linalg::CMat;
use ellbc::serde_cmat::from_rows;
use ellbc::symbolalg::{LinearSymbol, Metric};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = include_str!("../../../schema/experiment.schema.json");

/// Row-major nested arrays of `[re, im]` pairs.
pub type Matrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CheckSymbol,
    RsVerify,
    LsCheck,
    Index,
    DeformSweep,
    MatchVerify,
    GreensCheck,
    SemigroupCheck,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::CheckSymbol => "check-symbol",
            Kind::RsVerify => "rs-verify",
            Kind::LsCheck => "ls-check",
            Kind::Index => "index",
            Kind::DeformSweep => "deform-sweep",
            Kind::MatchVerify => "match-verify",
            Kind::GreensCheck => "greens-check",
            Kind::SemigroupCheck => "semigroup-check",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    /// Coefficient matrices `sigma_i` of `sigma(xi) = sum xi_i sigma_i`.
    pub symbol: Option<Vec<Matrix>>,
    /// Dimension for `rs-verify` when no symbol is given.
    pub dimension: Option<usize>,
    /// Gram matrix on covectors; Euclidean when absent.
    pub metric: Option<Vec<Vec<f64>>>,
    /// Index `i` of the conormal covector `e_i`.
    pub conormal: Option<usize>,
    /// Local boundary projector for `ls-check`.
    pub projector: Option<Matrix>,
    pub boundary_operator: Option<OperatorSpec>,
    pub model: Option<ModelSpec>,
    pub boundary_conditions: Option<EndConditions>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub expect: Expectations,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub a: Matrix,
    pub b: Matrix,
    #[serde(default)]
    pub shift: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub length: f64,
    pub cutoff: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndConditions {
    pub left: BcSpec,
    pub right: BcSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeMatrix {
    pub mode: i64,
    pub matrix: Matrix,
}

/// Boundary condition at one end. Graph data and `aps` are relative to the
/// adapted operator of that end (`A` on the left, `-A` on the right).
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BcSpec {
    Aps,
    /// `range chi_-` of the given operator.
    ForeignAps { operator: OperatorSpec },
    Graph {
        #[serde(default)]
        wplus: Vec<ModeMatrix>,
        #[serde(default)]
        wminus: Vec<ModeMatrix>,
        #[serde(default)]
        g: Vec<ModeMatrix>,
        #[serde(default = "one")]
        scale: f64,
    },
    Local { projector: Matrix },
    PseudoLocal { blocks: Vec<Matrix> },
    Matching,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub symbol: f64,
    pub norm_bound: f64,
    pub eigenvalue: f64,
    pub svd: f64,
    pub gap_threshold: f64,
    pub ls: f64,
    pub min_order: f64,
    pub square_function: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symbol: 1e-10,
            norm_bound: 1e-6,
            eigenvalue: 1e-9,
            svd: ellbc::indexlab::DEFAULT_SVD_TOL,
            gap_threshold: ellbc::indexlab::DEFAULT_GAP_THRESHOLD,
            ls: 1e-8,
            min_order: 1.9,
            square_function: 5e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    pub sphere_samples: usize,
    pub covectors: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { sphere_samples: 2048, covectors: 64 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    /// Deformation steps on `[0, 1]`.
    pub steps: Option<usize>,
    /// Cut positions as fractions of the length.
    pub cuts: Option<Vec<f64>>,
    /// Grids for the Green pairing convergence study.
    pub node_counts: Option<Vec<usize>>,
    /// Mode for the semigroup check.
    pub mode: Option<i64>,
    /// Vector in `V_-` for the semigroup check.
    pub vector: Option<Vec<[f64; 2]>>,
    pub t_max: Option<f64>,
    /// Grid sizes for the semigroup residual order.
    pub grids: Option<Vec<usize>>,
    /// Also run the interchange check with `projector` as `Q`.
    pub interchange: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Expectations {
    pub index: Option<i64>,
    pub dirac_type: Option<bool>,
    pub elliptic: Option<bool>,
    pub ls: Option<bool>,
}

/// Input problems, reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn err(path: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{path}: {msg}"))
}

/// Parses, validates against the schema and deserializes.
pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConfigError(format!("invalid JSON: {e}")))?;
    validate_schema(&value)?;
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        err(if path.is_empty() { "$" } else { &path }, e.into_inner())
    })
}

pub fn validate_schema(value: &serde_json::Value) -> Result<(), ConfigError> {
    let schema: serde_json::Value = serde_json::from_str(SCHEMA).expect("bundled schema is JSON");
    let validator = jsonschema::validator_for(&schema).expect("bundled schema compiles");
    if let Some(e) = validator.iter_errors(value).next() {
        let path = e.instance_path().to_string();
        return Err(err(if path.is_empty() { "/" } else { &path }, &e));
    }
    Ok(())
}

pub fn matrix(m: &Matrix, path: &str) -> Result<CMat, ConfigError> {
    from_rows(m).map_err(|e| err(path, e))
}

fn square(m: &Matrix, path: &str) -> Result<CMat, ConfigError> {
    let out = matrix(m, path)?;
    if !out.is_square() {
        return Err(err(path, format!("matrix must be square, got {}x{}", out.nrows(), out.ncols())));
    }
    Ok(out)
}

pub fn require<'a, T>(field: &'a Option<T>, name: &str, kind: Kind) -> Result<&'a T, ConfigError> {
    field.as_ref().ok_or_else(|| err(name, format!("required for kind {}", kind.name())))
}

impl OperatorSpec {
    pub fn build(&self, path: &str) -> Result<BoundaryOperator1D, ConfigError> {
        let a = square(&self.a, &format!("{path}.a"))?;
        let b = square(&self.b, &format!("{path}.b"))?;
        let op = BoundaryOperator1D::new(a, b).map_err(|e| err(path, e))?;
        Ok(op.with_shift(self.shift))
    }
}

impl ExperimentConfig {
    pub fn symbol(&self) -> Result<LinearSymbol, ConfigError> {
        let coeffs = require(&self.symbol, "symbol", self.kind)?;
        let mats = coeffs
            .iter()
            .enumerate()
            .map(|(i, m)| matrix(m, &format!("symbol[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        LinearSymbol::new(mats).map_err(|e| err("symbol", e))
    }

    pub fn metric(&self, n: usize) -> Result<Metric, ConfigError> {
        match &self.metric {
            None => Ok(Metric::euclidean(n)),
            Some(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(err("metric", format!("expected a {n}x{n} matrix")));
                }
                let gram = ellbc::linalg::RMat::from_fn(n, n, |i, j| rows[i][j]);
                Metric::new(gram).map_err(|e| err("metric", e))
            }
        }
    }

    pub fn operator(&self) -> Result<BoundaryOperator1D, ConfigError> {
        require(&self.boundary_operator, "boundary_operator", self.kind)?.build("boundary_operator")
    }

    pub fn model_spec(&self) -> Result<&ModelSpec, ConfigError> {
        require(&self.model, "model", self.kind)
    }

    pub fn ends(&self) -> Result<&EndConditions, ConfigError> {
        require(&self.boundary_conditions, "boundary_conditions", self.kind)
    }
}

/// Builds the condition at one end of a cylinder with operator `op`.
pub fn build_bc(
    spec: &BcSpec,
    op: &BoundaryOperator1D,
    cutoff: usize,
    right_end: bool,
    path: &str,
) -> Result<BoundaryCondition, ConfigError> {
    let adapted = if right_end { op.negated() } else { op.clone() };
    let splits = || mode_split(&adapted, cutoff, DEFAULT_REALPART_TOL).map_err(|e| err(path, e));
    let r = op.rank();
    Ok(match spec {
        BcSpec::Aps => BoundaryCondition::Aps(aps(&splits()?).map_err(|e| err(path, e))?),
        BcSpec::ForeignAps { operator } => {
            let other = operator.build(&format!("{path}.operator"))?;
            if other.rank() != r {
                return Err(err(path, format!("operator has rank {}, expected {r}", other.rank())));
            }
            let s = mode_split(&other, cutoff, DEFAULT_REALPART_TOL).map_err(|e| err(path, e))?;
            BoundaryCondition::Aps(aps(&s).map_err(|e| err(path, e))?)
        }
        BcSpec::Graph { .. } => BoundaryCondition::Graph(build_graph(spec, &adapted, cutoff, path)?),
        BcSpec::Local { projector } => {
            let p = square(projector, &format!("{path}.projector"))?;
            BoundaryCondition::Local(LocalBC::new(p).map_err(|e| err(path, e))?)
        }
        BcSpec::PseudoLocal { blocks } => {
            let mats = blocks
                .iter()
                .enumerate()
                .map(|(i, b)| square(b, &format!("{path}.blocks[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            BoundaryCondition::PseudoLocal(PseudoLocalBC::new(cutoff, mats).map_err(|e| err(path, e))?)
        }
        BcSpec::Matching => BoundaryCondition::Matching(matching(op, cutoff).map_err(|e| err(path, e))?),
    })
}

/// Graph condition relative to `adapted`: APS with the listed `W_+`, `W_-`
/// vectors and `g` blocks, `g` scaled by `scale`.
pub fn build_graph(spec: &BcSpec, adapted: &BoundaryOperator1D, cutoff: usize, path: &str) -> Result<GraphBC, ConfigError> {
    let splits = mode_split(adapted, cutoff, DEFAULT_REALPART_TOL).map_err(|e| err(path, e))?;
    match spec {
        BcSpec::Aps => aps(&splits).map_err(|e| err(path, e)),
        BcSpec::Graph { wplus, wminus, g, scale } => {
            let mut bc = aps(&splits).map_err(|e| err(path, e))?;
            let modes = -(cutoff as i64)..=cutoff as i64;
            let check = |mm: &ModeMatrix, what: &str, i: usize| -> Result<CMat, ConfigError> {
                let p = format!("{path}.{what}[{i}]");
                if !modes.contains(&mm.mode) {
                    return Err(err(&p, format!("mode {} outside -{cutoff}..={cutoff}", mm.mode)));
                }
                matrix(&mm.matrix, &format!("{p}.matrix"))
            };
            for (i, w) in wplus.iter().enumerate() {
                let m = check(w, "wplus", i)?;
                bc = bc.with_wplus(w.mode, &m).map_err(|e| err(&format!("{path}.wplus[{i}]"), e))?;
            }
            for (i, w) in wminus.iter().enumerate() {
                let m = check(w, "wminus", i)?;
                bc = bc.with_wminus(w.mode, &m).map_err(|e| err(&format!("{path}.wminus[{i}]"), e))?;
            }
            for (i, gm) in g.iter().enumerate() {
                let m = check(gm, "g", i)?;
                bc = bc.with_g(gm.mode, m).map_err(|e| err(&format!("{path}.g[{i}]"), e))?;
            }
            Ok(ellbc::bconds::deform(&bc, *scale))
        }
        _ => {
            // any other condition, rewritten in graph form
            let subs = match spec {
                BcSpec::ForeignAps { operator } => {
                    let other = operator.build(&format!("{path}.operator"))?;
                    let s = mode_split(&other, cutoff, DEFAULT_REALPART_TOL).map_err(|e| err(path, e))?;
                    let bc = aps(&s).map_err(|e| err(path, e))?;
                    bc.modes_range().map(|k| bc.subspace(k)).collect::<Result<Vec<_>, _>>()
                }
                _ => return Err(err(path, "a graph, aps or foreign-aps condition is required here")),
            }
            .map_err(|e| err(path, e))?;
            graph_from_subspaces(&splits, &subs).map_err(|e| err(path, e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ellbc::linalg::c;

    #[test]
    fn defaults_fill_in() {
        let cfg = parse(r#"{"kind": "rs-verify", "dimension": 4}"#).unwrap();
        assert_eq!(cfg.kind, Kind::RsVerify);
        assert_eq!(cfg.tolerances.eigenvalue, 1e-9);
        assert_eq!(cfg.sampling.sphere_samples, 2048);
        assert_eq!(cfg.kind.name(), "rs-verify");
    }

    #[test]
    fn ragged_rows_are_reported_with_their_path() {
        let m: Matrix = serde_json::from_str("[[[1,0],[0,0]],[[1,0]]]").unwrap();
        let e = matrix(&m, "projector").unwrap_err();
        assert!(e.0.contains("projector"), "{e}");
    }

    #[test]
    fn schema_errors_carry_the_instance_path() {
        let e = parse(r#"{"kind": "rs-verify", "dimension": 0}"#).unwrap_err();
        assert!(e.0.contains("/dimension"), "{e}");
    }

    #[test]
    fn metric_must_be_positive_definite() {
        let cfg = parse(r#"{"kind": "rs-verify", "dimension": 3, "metric": [[1,0,0],[0,-1,0],[0,0,1]]}"#).unwrap();
        assert!(cfg.metric(3).is_err());
        let cfg = parse(r#"{"kind": "rs-verify", "dimension": 3, "metric": [[1,0],[0,1]]}"#).unwrap();
        assert!(cfg.metric(3).is_err());
    }

    #[test]
    fn operators_need_matching_square_blocks() {
        let spec: OperatorSpec = serde_json::from_str(r#"{"a": [[[0,1]]], "b": [[[0,0],[1,0]],[[0,0],[0,0]]]}"#).unwrap();
        assert!(spec.build("boundary_operator").is_err());
        let spec: OperatorSpec = serde_json::from_str(r#"{"a": [[[0,1]]], "b": [[[0.5,0]]], "shift": 1.0}"#).unwrap();
        let op = spec.build("boundary_operator").unwrap();
        assert_eq!(op.shift, 1.0);
    }

    #[test]
    fn graph_conditions_require_subspaces_of_the_right_size() {
        let op = BoundaryOperator1D::new(CMat::from_element(1, 1, c(0.0, 1.0)), CMat::from_element(1, 1, c(0.2, 0.0))).unwrap();
        let bad: BcSpec = serde_json::from_str(r#"{"type": "graph", "g": [{"mode": 9, "matrix": [[[1,0]]]}]}"#).unwrap();
        assert!(build_graph(&bad, &op, 2, "left").is_err());
        let aps: BcSpec = serde_json::from_str(r#"{"type": "aps"}"#).unwrap();
        let g = build_graph(&aps, &op, 2, "left").unwrap();
        assert_eq!(g.modes_range().count(), 5);
    }
}
