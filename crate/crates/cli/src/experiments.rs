//! One runner per experiment kind. Each returns verdicts, a JSON evidence
//! record and lines for the text table.

use ellbc::adapted::{mode_split, tangential_unit_covectors, ConormalData, DEFAULT_REALPART_TOL};
use ellbc::bconds::{aps, local_interchange_check, ls_check, BoundaryCondition};
use ellbc::clifford::dirac_seed;
use ellbc::indexlab::{
    check_additivity, check_deformation, check_matching, extension_semigroup_check, greens_convergence,
    numerical_index_with, square_function, CylinderModel, IndexOptions, IndexReport,
};
use ellbc::linalg::{c, CMat, C64};
use ellbc::raritaschwinger::{build_rs, expected_gram_spectrum, rs_symbol};
use ellbc::symbolalg::check_ellipticity;
use ellbc::Error;
use serde_json::{json, Value};

use crate::config::{build_bc, build_graph, matrix, require, ConfigError, ExperimentConfig, Kind};
use crate::report::{Status, Verdict};

pub struct Outcome {
    pub verdicts: Vec<Verdict>,
    pub evidence: Value,
    pub table: Vec<String>,
}

/// Failures while running: bad input (exit 2) or a numerical breakdown
/// (exit 1).
pub enum RunError {
    Config(ConfigError),
    Numeric(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant(msg) => RunError::Numeric(msg),
            other => RunError::Config(ConfigError(other.to_string())),
        }
    }
}

type Run = Result<Outcome, RunError>;

pub fn run(cfg: &ExperimentConfig) -> Run {
    match cfg.kind {
        Kind::CheckSymbol => check_symbol(cfg),
        Kind::RsVerify => rs_verify(cfg),
        Kind::LsCheck => ls(cfg),
        Kind::Index => index(cfg),
        Kind::DeformSweep => deform_sweep(cfg),
        Kind::MatchVerify => match_verify(cfg),
        Kind::GreensCheck => greens(cfg),
        Kind::SemigroupCheck => semigroup(cfg),
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn expect_verdict(name: &str, expected: Option<bool>, got: bool, witness: (&str, Value)) -> Option<Verdict> {
    expected.map(|want| {
        Verdict::new(name, Status::from_bool(want == got), format!("expected {want}, got {got}"), &[witness])
    })
}

fn check_symbol(cfg: &ExperimentConfig) -> Run {
    let sym = cfg.symbol()?;
    let metric = cfg.metric(sym.dim())?;
    let tol = cfg.tolerances;
    let rep = check_ellipticity(&sym, &metric, cfg.sampling.sphere_samples, tol.symbol)?;
    let defect = if sym.is_square() { sym.clifford_defect(&metric)?.2 } else { f64::INFINITY };
    let mut verdicts = vec![Verdict::new(
        "elliptic",
        Status::from_bool(rep.elliptic || cfg.expect.elliptic == Some(false)),
        format!("min singular value on the unit sphere {:.6e} (tolerance {:.1e})", rep.min_sv, tol.symbol),
        &[("min_sv", json!(rep.min_sv)), ("witness_xi", json!(rep.witness_xi))],
    )];
    if cfg.expect.elliptic == Some(false) {
        verdicts[0] = Verdict::new(
            "elliptic",
            Status::from_bool(!rep.elliptic),
            format!("expected non-elliptic; min singular value {:.6e}", rep.min_sv),
            &[("min_sv", json!(rep.min_sv))],
        );
    }
    verdicts.extend(expect_verdict("dirac type", cfg.expect.dirac_type, rep.dirac_type, ("clifford_defect", json!(defect))));
    if rep.dirac_type {
        let dev = (rep.norm_bound_c - 1.0).abs();
        verdicts.push(Verdict::new(
            "norm bound C = 1",
            Status::from_bool(dev <= tol.norm_bound),
            format!("sampled C = {:.12} (|C-1| = {dev:.2e})", rep.norm_bound_c),
            &[("c", json!(rep.norm_bound_c))],
        ));
    }
    let table = vec![
        format!("dimension {} , fibre {}x{}", sym.dim(), sym.rank_f(), sym.rank_e()),
        format!("elliptic={} dirac_type={} C={:.12} min_sv={:.6e}", rep.elliptic, rep.dirac_type, rep.norm_bound_c, rep.min_sv),
    ];
    let mut evidence = to_value(&rep);
    evidence["clifford_defect"] = json!(defect);
    Ok(Outcome { verdicts, evidence, table })
}

fn rs_verify(cfg: &ExperimentConfig) -> Run {
    let seed = match (&cfg.symbol, cfg.dimension) {
        (Some(_), _) => cfg.symbol()?,
        (None, Some(n)) => {
            if n < 3 {
                return Err(ConfigError(format!("dimension: must be at least 3, got {n}")).into());
            }
            dirac_seed(n)
        }
        (None, None) => return Err(ConfigError("dimension: required for kind rs-verify without a symbol".into()).into()),
    };
    let n = seed.dim();
    let metric = cfg.metric(n)?;
    let data = build_rs(&seed, &metric)?;
    let ids = data.identity_residuals();
    let id_worst = [ids.gamma_iota, ids.iota_adjoint, ids.gamma_iota_tilde, ids.iota_tilde_adjoint, ids.p32_idempotent, ids.p32_selfadjoint, ids.p32_formula]
        .into_iter()
        .fold(0.0_f64, f64::max);
    let tol = cfg.tolerances.eigenvalue;
    let mut worst = 0.0_f64;
    let mut mult_ok = true;
    let mut first = Value::Null;
    let samples = metric.unit_sphere(cfg.sampling.covectors);
    for xi in &samples {
        let ev = rs_symbol(&data, xi)?;
        let norm_sq = metric.inner(xi, xi);
        let expected = expected_gram_spectrum(n, data.m, norm_sq);
        let mut counts = [0usize; 2];
        for &e in &ev.gram_eigs {
            let d: Vec<f64> = expected.iter().map(|(v, _)| (e - v).abs()).collect();
            let j = if d[0] <= d[1] { 0 } else { 1 };
            worst = worst.max(d[j]);
            if d[j] <= tol {
                counts[j] += 1;
            }
        }
        mult_ok &= counts[0] == expected[0].1 && counts[1] == expected[1].1;
        if first.is_null() {
            first = json!({
                "xi": xi,
                "expected": [
                    {"value": expected[0].0, "multiplicity": expected[0].1},
                    {"value": expected[1].0, "multiplicity": expected[1].1},
                ],
                "gram_eigenvalues": ev.gram_eigs,
            });
        }
    }
    let expected_unit = expected_gram_spectrum(n, data.m, 1.0);
    let table = vec![
        format!("n = {n}, seed rank m = {}, dim E^(3/2) = {}", data.m, data.dim_e32()),
        "eigenvalue table of sigma^* sigma at |xi| = 1:".into(),
        format!("  {:.12}  multiplicity {}", expected_unit[0].0, expected_unit[0].1),
        format!("  {:.12}  multiplicity {}", expected_unit[1].0, expected_unit[1].1),
    ];
    let verdicts = vec![
        Verdict::new(
            "bundle identities",
            Status::from_bool(id_worst <= 1e-12),
            format!("worst identity residual {id_worst:.2e}"),
            &[("max_residual", json!(id_worst))],
        ),
        Verdict::new(
            "symbol eigenvalues",
            Status::from_bool(worst <= tol && mult_ok),
            format!("{} covectors: max deviation {worst:.2e}, multiplicities ok={mult_ok}", samples.len()),
            &[("max_deviation", json!(worst)), ("covectors", json!(samples.len()))],
        ),
    ];
    let evidence = json!({
        "n": n,
        "m": data.m,
        "dim_e32": data.dim_e32(),
        "identity_residuals": {
            "gamma_iota": ids.gamma_iota,
            "iota_adjoint": ids.iota_adjoint,
            "gamma_iota_tilde": ids.gamma_iota_tilde,
            "iota_tilde_adjoint": ids.iota_tilde_adjoint,
            "p32_idempotent": ids.p32_idempotent,
            "p32_selfadjoint": ids.p32_selfadjoint,
            "p32_formula": ids.p32_formula,
            "p32_rank": ids.p32_rank,
        },
        "eigenvalue_table": [
            {"value": expected_unit[0].0, "multiplicity": expected_unit[0].1},
            {"value": expected_unit[1].0, "multiplicity": expected_unit[1].1},
        ],
        "max_deviation": worst,
        "first_sample": first,
    });
    Ok(Outcome { verdicts, evidence, table })
}

fn ls(cfg: &ExperimentConfig) -> Run {
    let sym = cfg.symbol()?;
    let n = sym.dim();
    let metric = cfg.metric(n)?;
    let i = *require(&cfg.conormal, "conormal", cfg.kind)?;
    if i >= n {
        return Err(ConfigError(format!("conormal: index {i} out of range for dimension {n}")).into());
    }
    let tau: Vec<f64> = (0..n).map(|j| if j == i { 1.0 } else { 0.0 }).collect();
    let conormal = ConormalData::new(&sym, &metric, &tau)?;
    let p = matrix(require(&cfg.projector, "projector", cfg.kind)?, "projector")?;
    let samples = tangential_unit_covectors(&metric, &conormal, cfg.sampling.covectors);
    let sigma_a = |xi: &[f64]| &conormal.sigma0_inv * sym.evaluate(xi).expect("sample dimension");
    let rep = ls_check(|_| p.clone(), sigma_a, &samples, cfg.tolerances.ls)?;
    let want = cfg.expect.ls.unwrap_or(true);
    let mut verdicts = vec![Verdict::new(
        "Lopatinsky-Schapiro",
        Status::from_bool(rep.passed == want),
        format!(
            "{} tangential covectors: condition {} (expected {}), worst margin {:.3e}",
            rep.samples,
            if rep.passed { "holds" } else { "fails" },
            if want { "holds" } else { "fails" },
            rep.worst_margin
        ),
        &[("worst_margin", json!(rep.worst_margin)), ("witnesses", json!(rep.witnesses.len()))],
    )];
    let mut evidence = json!({ "ls": to_value(&rep) });
    if cfg.params.interchange == Some(true) {
        let inter = local_interchange_check(&p, sigma_a, &samples, cfg.tolerances.ls)?;
        verdicts.push(Verdict::new(
            "interchange",
            Status::from_bool(inter.passed),
            format!("sigma_A swaps range Q and range (1-Q): max defect {:.3e}", inter.max_defect),
            &[("max_defect", json!(inter.max_defect))],
        ));
        evidence["interchange"] = to_value(&inter);
    }
    let table = vec![format!("samples {}, rank P {}", rep.samples, ellbc::linalg::numerical_rank(&p, 1e-10).rank)];
    Ok(Outcome { verdicts, evidence, table })
}

fn options(cfg: &ExperimentConfig) -> IndexOptions {
    IndexOptions { svd_tol: cfg.tolerances.svd, gap_threshold: cfg.tolerances.gap_threshold }
}

fn cylinder(cfg: &ExperimentConfig) -> Result<CylinderModel, RunError> {
    let op = cfg.operator()?;
    let spec = cfg.model_spec()?;
    let ends = cfg.ends()?;
    let left = build_bc(&ends.left, &op, spec.cutoff, false, "boundary_conditions.left")?;
    let right = build_bc(&ends.right, &op, spec.cutoff, true, "boundary_conditions.right")?;
    Ok(CylinderModel::new(spec.length, spec.cutoff, spec.nodes, op, left, right)?)
}

fn index_table(rep: &IndexReport) -> Vec<String> {
    let mut t = vec![format!("{:>5} {:>5} {:>7} {:>7} {:>6} {:>12}", "mode", "ker", "coker", "coker_T", "index", "rank_gap")];
    for m in &rep.modes {
        t.push(format!(
            "{:>5} {:>5} {:>7} {:>7} {:>6} {:>12.3e}",
            m.k, m.dim_ker, m.dim_coker, m.coker_transpose, m.index, m.rank_gap
        ));
    }
    t.push(format!(
        "total: ker {} coker {} index {} rank_gap {:.3e}",
        rep.dim_ker, rep.dim_coker, rep.index, rep.rank_gap
    ));
    t
}

fn index_verdicts(rep: &IndexReport, expected: Option<i64>) -> Vec<Verdict> {
    let mut v = vec![
        Verdict::new(
            "rank decisions",
            if rep.unreliable { Status::Unreliable } else { Status::Pass },
            format!("rank_gap {:.3e} (threshold {:.1e})", rep.rank_gap, rep.options.gap_threshold),
            &[("rank_gap", json!(rep.rank_gap))],
        ),
        Verdict::new(
            "cokernel consistency",
            Status::from_bool(rep.adjoint_consistent()),
            format!("adjoint-condition cokernel {} vs transpose cokernel {}", rep.dim_coker, rep.coker_transpose),
            &[("dim_coker", json!(rep.dim_coker)), ("coker_transpose", json!(rep.coker_transpose))],
        ),
    ];
    if let Some(want) = expected {
        v.push(Verdict::new(
            "expected index",
            Status::from_bool(rep.index == want),
            format!("index {} (expected {want}), rank_gap {:.3e}", rep.index, rep.rank_gap),
            &[("index", json!(rep.index)), ("rank_gap", json!(rep.rank_gap))],
        ));
    }
    v
}

fn index(cfg: &ExperimentConfig) -> Run {
    let model = cylinder(cfg)?;
    let rep = numerical_index_with(&model, options(cfg))?;
    Ok(Outcome { verdicts: index_verdicts(&rep, cfg.expect.index), table: index_table(&rep), evidence: to_value(&rep) })
}

fn deform_sweep(cfg: &ExperimentConfig) -> Run {
    let model = cylinder(cfg)?;
    let ends = cfg.ends()?;
    let graph = build_graph(&ends.left, &model.op, model.cutoff, "boundary_conditions.left")?;
    let steps = cfg.params.steps.unwrap_or(10);
    let rep = check_deformation(&model, &graph, steps)?;
    let unreliable = rep.reports.iter().any(|r| r.unreliable);
    let min_gap = rep.reports.iter().map(|r| r.rank_gap).fold(f64::INFINITY, f64::min);
    let mut table = vec![format!("{:>8} {:>6} {:>12}", "s", "index", "rank_gap")];
    for (s, r) in rep.s_values.iter().zip(&rep.reports) {
        table.push(format!("{s:>8.4} {:>6} {:>12.3e}", r.index, r.rank_gap));
    }
    table.push(format!(
        "APS index {} , dim W+ {} , dim W- {}",
        rep.aps_index, rep.dim_wplus, rep.dim_wminus
    ));
    let last = *rep.indices.last().expect("at least two steps");
    let verdicts = vec![
        Verdict::new(
            "rank decisions",
            if unreliable { Status::Unreliable } else { Status::Pass },
            format!("smallest rank_gap over the sweep {min_gap:.3e}"),
            &[("rank_gap", json!(min_gap))],
        ),
        Verdict::new(
            "index constant along the deformation",
            Status::from_bool(rep.constant),
            match rep.first_jump {
                Some(s) => format!("index jumps at s = {s}"),
                None => format!("index {last} at all {} steps", rep.s_values.len()),
            },
            &[("index", json!(last)), ("steps", json!(rep.s_values.len()))],
        ),
        Verdict::new(
            "index = APS index + dim W+ - dim W-",
            Status::from_bool(rep.formula_holds),
            format!("{last} vs {} + {} - {}", rep.aps_index, rep.dim_wplus, rep.dim_wminus),
            &[("index", json!(last)), ("aps_index", json!(rep.aps_index))],
        ),
    ];
    Ok(Outcome { verdicts, evidence: to_value(&rep), table })
}

fn match_verify(cfg: &ExperimentConfig) -> Run {
    let op = cfg.operator()?;
    let spec = cfg.model_spec()?;
    let cuts = cfg.params.cuts.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
    let rep = check_matching(&op, spec.length, spec.cutoff, spec.nodes, &cuts)?;
    let min_gap = [&rep.uncut, &rep.matching, &rep.aps].iter().map(|r| r.rank_gap).fold(f64::INFINITY, f64::min);
    let unreliable = [&rep.uncut, &rep.matching, &rep.aps].iter().any(|r| r.unreliable);
    let mut verdicts = vec![
        Verdict::new(
            "rank decisions",
            if unreliable { Status::Unreliable } else { Status::Pass },
            format!("smallest rank_gap {min_gap:.3e}"),
            &[("rank_gap", json!(min_gap))],
        ),
        Verdict::new(
            "uncut = matching = doubled APS",
            Status::from_bool(rep.passed),
            format!(
                "indices {} / {} / {}; mismatched modes {:?}; cut invariance {:?}",
                rep.uncut.index, rep.matching.index, rep.aps.index, rep.mismatched_modes, rep.cut_invariance
            ),
            &[
                ("uncut", json!(rep.uncut.index)),
                ("matching", json!(rep.matching.index)),
                ("aps", json!(rep.aps.index)),
            ],
        ),
    ];
    let mut evidence = json!({ "matching": to_value(&rep) });
    let mut table = vec![format!(
        "uncut {} , matching {} , doubled APS {} (rank_gap {:.3e})",
        rep.uncut.index, rep.matching.index, rep.aps.index, min_gap
    )];
    // additivity needs outer conditions, taken from the config when present
    if let Some(ends) = &cfg.boundary_conditions {
        let left = build_bc(&ends.left, &op, spec.cutoff, false, "boundary_conditions.left")?;
        let right = build_bc(&ends.right, &op, spec.cutoff, true, "boundary_conditions.right")?;
        if !matches!(left, BoundaryCondition::Matching(_)) {
            let model = CylinderModel::new(spec.length, spec.cutoff, spec.nodes, op.clone(), left, right)?;
            let add = check_additivity(&model, &cuts)?;
            table.push(format!("glued index {} ; cuts:", add.glued));
            for c in &add.cuts {
                table.push(format!("  at {:.3}: matched {} = {} + {}", c.position, c.matched, c.left, c.right));
            }
            verdicts.push(Verdict::new(
                "additivity under cutting",
                Status::from_bool(add.passed),
                format!("glued index {} at {} cut positions", add.glued, add.cuts.len()),
                &[("glued", json!(add.glued)), ("cuts", json!(add.cuts.len()))],
            ));
            evidence["additivity"] = to_value(&add);
        }
    }
    Ok(Outcome { verdicts, evidence, table })
}

/// Smooth test sections for the Green pairing, decaying in the mode.
fn green_u(k: i64, t: f64, r: usize) -> Vec<C64> {
    let w = 1.0 / (1.0 + (k * k) as f64);
    (0..r)
        .map(|j| c((std::f64::consts::TAU * t + j as f64).cos() + 0.3 * (2.0 * t).sin(), 0.1 * k as f64 * t) * w)
        .collect()
}

fn green_v(k: i64, t: f64, r: usize) -> Vec<C64> {
    let w = 1.0 / (1.0 + (k * k) as f64);
    (0..r).map(|j| c((1.5 * t + j as f64).sin() + 0.5, 0.2 * (k as f64 * t).cos() - t * j as f64) * w).collect()
}

fn greens(cfg: &ExperimentConfig) -> Run {
    let model = cylinder(cfg)?;
    let r = model.op.rank();
    let nodes = cfg.params.node_counts.clone().unwrap_or_else(|| vec![21, 41, 81, 161]);
    let conv = greens_convergence(&model, |k, t| green_u(k, t, r), |k, t| green_v(k, t, r), &nodes)?;
    let mut table = vec![format!("{:>7} {:>12} {:>14}", "nodes", "h", "residual")];
    for ((n, h), res) in conv.nodes.iter().zip(&conv.h).zip(&conv.residuals) {
        table.push(format!("{n:>7} {h:>12.4e} {res:>14.4e}"));
    }
    let verdicts = vec![Verdict::new(
        "Green pairing converges at second order",
        Status::from_bool(conv.min_order >= cfg.tolerances.min_order),
        format!("observed orders {:?}", conv.orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>()),
        &[("min_order", json!(conv.min_order)), ("finest_residual", json!(conv.residuals.last()))],
    )];
    Ok(Outcome { verdicts, evidence: to_value(&conv), table })
}

fn semigroup(cfg: &ExperimentConfig) -> Run {
    let op = cfg.operator()?;
    let spec = cfg.model_spec()?;
    let k = cfg.params.mode.unwrap_or(0);
    if k.unsigned_abs() as usize > spec.cutoff {
        return Err(ConfigError(format!("params.mode: {k} outside the cutoff {}", spec.cutoff)).into());
    }
    let bc = match &cfg.boundary_conditions {
        Some(ends) => build_graph(&ends.left, &op, spec.cutoff, "boundary_conditions.left")?,
        None => aps(&mode_split(&op, spec.cutoff, DEFAULT_REALPART_TOL)?)?,
    };
    let mode = bc.mode(k)?;
    let v = match &cfg.params.vector {
        Some(entries) => CMat::from_fn(entries.len(), 1, |i, _| c(entries[i][0], entries[i][1])),
        None => {
            if mode.vminus.ncols() == 0 {
                return Err(ConfigError(format!("params.vector: V_- is trivial in mode {k}")).into());
            }
            CMat::from_fn(mode.vminus.nrows(), 1, |i, _| mode.vminus[(i, 0)])
        }
    };
    let t_max = cfg.params.t_max.unwrap_or(spec.length);
    let grids = cfg.params.grids.clone().unwrap_or_else(|| vec![40, 80, 160]);
    if grids.len() < 2 {
        return Err(ConfigError("params.grids: need at least two grids".into()).into());
    }
    let mut residuals = Vec::new();
    for &n in &grids {
        let grid: Vec<f64> = (0..=n).map(|j| t_max * j as f64 / n as f64).collect();
        residuals.push(extension_semigroup_check(&op, &bc, k, &v, &grid)?);
    }
    let orders: Vec<f64> = residuals
        .windows(2)
        .zip(grids.windows(2))
        .map(|(r, g)| (r[0].residual / r[1].residual).ln() / (g[1] as f64 / g[0] as f64).ln())
        .collect();
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let steps = *grids.last().expect("non-empty") * 10;
    let sq = square_function(&op, k, &v, t_max, steps)?;
    let mut table = vec![format!("mode {k}, v = {:?}", v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())];
    for (n, r) in grids.iter().zip(&residuals) {
        table.push(format!("  grid {n:>5}: residual {:.4e} (relative {:.3e})", r.residual, r.relative));
    }
    table.push(format!(
        "square function: numeric {:.10e}, closed form {:.10e}, bound {:.10e}",
        sq.numeric, sq.closed_form, sq.bound
    ));
    let verdicts = vec![
        Verdict::new(
            "extension satisfies the semigroup identity",
            Status::from_bool(min_order >= cfg.tolerances.min_order),
            format!("residual orders {:?}", orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>()),
            &[("min_order", json!(min_order))],
        ),
        Verdict::new(
            "square function",
            Status::from_bool(sq.relative_error <= cfg.tolerances.square_function && sq.numeric <= sq.bound * (1.0 + 1e-9)),
            format!("relative error {:.3e}, value {:.6e} <= bound {:.6e}", sq.relative_error, sq.numeric, sq.bound),
            &[("relative_error", json!(sq.relative_error)), ("numeric", json!(sq.numeric))],
        ),
    ];
    let evidence = json!({
        "mode": k,
        "vector": v.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
        "grids": grids,
        "semigroup": residuals.iter().map(to_value).collect::<Vec<_>>(),
        "orders": orders,
        "square_function": to_value(&sq),
    });
    Ok(Outcome { verdicts, evidence, table })
}
