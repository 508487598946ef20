use ellbc_wasm::{flow_index, rs_gram, spectrum};

/// Signed count of integers strictly between the two shifts.
fn crossings(s_left: f64, s_right: f64, cutoff: i64) -> i64 {
    (-cutoff..=cutoff)
        .map(|k| {
            let k = k as f64;
            match (s_left < k, s_right < k) {
                (true, false) => 1,
                (false, true) => -1,
                _ => 0,
            }
        })
        .sum()
}

#[test]
fn index_equals_signed_crossings() {
    for (a, b) in [(0.2, 1.6), (1.6, 0.2), (-2.3, 2.8), (0.3, 0.7), (2.5, -1.5)] {
        let v = flow_index(a, b, 4, 31).unwrap();
        assert_eq!(v["unreliable"], false);
        assert_eq!(v["index"].as_i64().unwrap(), crossings(a, b, 4), "s from {a} to {b}");
    }
}

#[test]
fn rs_eigenvalues_match_closed_form() {
    // at |xi| = 1 the eigenvalues are 1 and ((n-2)/n)^2
    for n in 3..=5u32 {
        let v = rs_gram(n, 8).unwrap();
        let lo = ((n as f64 - 2.0) / n as f64).powi(2);
        for s in v["samples"].as_array().unwrap() {
            for e in s["eigenvalues"].as_array().unwrap() {
                let e = e.as_f64().unwrap();
                assert!((e - 1.0).abs() < 1e-10 || (e - lo).abs() < 1e-10, "n = {n}: {e}");
            }
        }
    }
}

#[test]
fn spectrum_shift_moves_every_eigenvalue() {
    let a = spectrum(0.3, 0.0, 2).unwrap();
    let b = spectrum(0.3, 0.75, 2).unwrap();
    for (ma, mb) in a["modes"].as_array().unwrap().iter().zip(b["modes"].as_array().unwrap()) {
        for (ea, eb) in ma["eigenvalues"].as_array().unwrap().iter().zip(mb["eigenvalues"].as_array().unwrap()) {
            assert!((eb[0].as_f64().unwrap() - ea[0].as_f64().unwrap() - 0.75).abs() < 1e-12);
        }
    }
}
