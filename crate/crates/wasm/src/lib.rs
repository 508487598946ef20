//! Browser bindings. Every export returns a JSON string; the plain
//! functions underneath are what the native tests exercise.

use ellbc::adapted::{mode_split, BoundaryOperator1D, DEFAULT_REALPART_TOL};
use ellbc::bconds::{aps, BoundaryCondition};
use ellbc::clifford::{dirac_seed, pauli};
use ellbc::indexlab::{numerical_index_with, CylinderModel, IndexOptions};
use ellbc::linalg::{c, identity, re};
use ellbc::raritaschwinger::{build_rs, expected_gram_spectrum, rs_symbol};
use ellbc::symbolalg::Metric;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_CUTOFF: u32 = 40;
const MAX_NODES: u32 = 161;

fn check(cond: bool, msg: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

/// `A = i sigma_z d/dtheta + mass sigma_x + shift`.
pub fn dirac_operator(mass: f64, shift: f64) -> BoundaryOperator1D {
    let [x, _, z] = pauli();
    BoundaryOperator1D::new(z * c(0.0, 1.0), x * re(mass) + identity(2) * re(shift)).expect("2x2 blocks")
}

/// Eigenvalues of every Fourier mode `|k| <= cutoff`.
pub fn spectrum(mass: f64, shift: f64, cutoff: u32) -> Result<Value, String> {
    check(mass.is_finite() && shift.is_finite(), "mass and shift must be finite")?;
    check(cutoff <= MAX_CUTOFF, "cutoff too large")?;
    let op = dirac_operator(mass, shift);
    let modes: Vec<Value> = (-(cutoff as i64)..=cutoff as i64)
        .map(|k| {
            let eigs = op.mode_matrix(k).schur().eigenvalues().expect("complex Schur form is triangular");
            let mut pts: Vec<[f64; 2]> = eigs.iter().map(|z| [z.re, z.im]).collect();
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
            json!({ "k": k, "eigenvalues": pts })
        })
        .collect();
    Ok(json!({ "mass": mass, "shift": shift, "modes": modes }))
}

/// Cylinder with the scalar operator `i d/dtheta + s` running from `s_left`
/// to `s_right`: APS at the left, the APS condition of the shifted operator at
/// the right. The index counts modes whose eigenvalue `s - k` changes sign.
pub fn flow_index(s_left: f64, s_right: f64, cutoff: u32, nodes: u32) -> Result<Value, String> {
    check(s_left.is_finite() && s_right.is_finite(), "shifts must be finite")?;
    check((1..=MAX_CUTOFF).contains(&cutoff), "cutoff must be in 1..=40")?;
    check((11..=MAX_NODES).contains(&nodes), "nodes must be in 11..=161")?;
    let cutoff = cutoff as usize;
    let op = BoundaryOperator1D::scalar(c(0.0, 1.0), re(s_left));
    let right_op = BoundaryOperator1D::scalar(c(0.0, -1.0), re(-s_right));
    let split = |o: &BoundaryOperator1D| mode_split(o, cutoff, DEFAULT_REALPART_TOL).and_then(|s| aps(&s));
    let left = split(&op).map_err(|e| e.to_string())?;
    let right = split(&right_op).map_err(|e| e.to_string())?;
    let model = CylinderModel::new(1.0, cutoff, nodes as usize, op, BoundaryCondition::Aps(left), BoundaryCondition::Aps(right))
        .map_err(|e| e.to_string())?;
    let rep = numerical_index_with(&model, IndexOptions::default()).map_err(|e| e.to_string())?;
    let modes: Vec<Value> = rep.modes.iter().map(|m| json!({ "k": m.k, "index": m.index })).collect();
    Ok(json!({
        "s_left": s_left,
        "s_right": s_right,
        "index": rep.index,
        "rank_gap": rep.rank_gap,
        "unreliable": rep.unreliable,
        "modes": modes,
    }))
}

/// Sorted eigenvalues of `sigma^* sigma` for the Rarita-Schwinger symbol in
/// dimension `n`, at `samples` unit covectors, with the closed-form values.
pub fn rs_gram(n: u32, samples: u32) -> Result<Value, String> {
    check((3..=6).contains(&n), "dimension must be in 3..=6")?;
    check((1..=64).contains(&samples), "samples must be in 1..=64")?;
    let n = n as usize;
    let seed = dirac_seed(n);
    let metric = Metric::euclidean(n);
    let data = build_rs(&seed, &metric).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for xi in metric.unit_sphere(samples as usize) {
        let ev = rs_symbol(&data, &xi).map_err(|e| e.to_string())?;
        rows.push(json!({ "xi": xi, "eigenvalues": ev.gram_eigs }));
    }
    let expected: Vec<Value> = expected_gram_spectrum(n, seed.rank_e(), 1.0)
        .iter()
        .map(|&(v, m)| json!({ "value": v, "multiplicity": m }))
        .collect();
    Ok(json!({ "n": n, "expected": expected, "samples": rows }))
}

fn export(v: Result<Value, String>) -> Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = modeSpectrum)]
pub fn mode_spectrum_js(mass: f64, shift: f64, cutoff: u32) -> Result<String, JsError> {
    export(spectrum(mass, shift, cutoff))
}

#[wasm_bindgen(js_name = flowIndex)]
pub fn flow_index_js(s_left: f64, s_right: f64, cutoff: u32, nodes: u32) -> Result<String, JsError> {
    export(flow_index(s_left, s_right, cutoff, nodes))
}

#[wasm_bindgen(js_name = rsGram)]
pub fn rs_gram_js(n: u32, samples: u32) -> Result<String, JsError> {
    export(rs_gram(n, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_is_symmetric_in_the_mass() {
        // mode k is -k sigma_z + m sigma_x, eigenvalues +-sqrt(k^2 + m^2)
        let v = spectrum(0.5, 0.0, 3).unwrap();
        for m in v["modes"].as_array().unwrap() {
            let k = m["k"].as_f64().unwrap();
            let e = m["eigenvalues"].as_array().unwrap();
            let r = (k * k + 0.25).sqrt();
            assert!((e[0][0].as_f64().unwrap() + r).abs() < 1e-12);
            assert!((e[1][0].as_f64().unwrap() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(spectrum(f64::NAN, 0.0, 2).is_err());
        assert!(flow_index(0.0, 1.0, 0, 31).is_err());
        assert!(rs_gram(2, 4).is_err());
    }
}
