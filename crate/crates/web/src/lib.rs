//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Three entry points: [`explore`] iterates a map and reports its degree
//! sequence and stability verdict, [`random_family`] draws a seeded family
//! instance and checks it, and [`green_slice`] renders the Green potential on
//! a real 2-plane as RGBA pixels. Each wraps a plain Rust function so the
//! logic is testable off the browser.

use num_complex::Complex64;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use qasmap::family2::{self, FamilyInstance};
use qasmap::greenpot::{grid_meta, grid_sample, EvalConfig, GreenGrid, GreenMode, GreenModel, NodeStatus, Slice};
use qasmap::mapiter::{infer_qas, iterate_degrees, parse_map_file, ProjMap, QasVerdict};
use qasmap::polycore::Limits;
use qasmap::specdeg::{char_poly_roots, extend_degrees, RecurrenceSpec};

/// Symbolic depth is capped so a page never hangs on a large map.
pub const MAX_DEPTH: usize = 6;
pub const MAX_RESOLUTION: usize = 512;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Reads either a family file or a plain map file.
pub fn load(text: &str) -> Result<(ProjMap, Option<FamilyInstance>), String> {
    match family2::parse_family_file(text) {
        Ok(inst) => Ok((inst.map.clone(), Some(inst))),
        Err(_) => parse_map_file(text).map(|m| (m, None)).map_err(err),
    }
}

fn spec_of(map: &ProjMap, verdict: &QasVerdict) -> Option<(RecurrenceSpec, GreenMode)> {
    let d = map.degree() as u64;
    if d < 2 {
        return None;
    }
    match verdict {
        QasVerdict::As => Some((RecurrenceSpec::new(d, 0, 1).ok()?, GreenMode::As)),
        QasVerdict::Qas(c) => Some((
            RecurrenceSpec::new(d, c.h as u64, c.n0 as u64).ok()?,
            GreenMode::Qas(c.clone()),
        )),
        _ => None,
    }
}

fn strings<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

pub fn explore_json(text: &str, depth: usize) -> Result<Value, String> {
    if depth > MAX_DEPTH {
        return Err(format!("depth is limited to {MAX_DEPTH} in the browser"));
    }
    let (map, _) = load(text)?;
    let limits = Limits::default();
    let trace = iterate_degrees(&map, depth, &limits).map_err(err)?;
    let verdict = infer_qas(&trace, map.degree(), &limits).map_err(err)?;
    let mut out = json!({
        "degrees": strings(&trace.degrees),
        "verdict": verdict.label(),
        "removed_factors": trace.extracted.iter().map(|e| e.primitive.to_string_with(map.vars())).collect::<Vec<_>>(),
    });
    if let QasVerdict::Qas(c) = &verdict {
        out["n0"] = json!(c.n0);
        out["H"] = json!(c.h_poly.to_string_with(map.vars()));
    }
    if let Some((spec, _)) = spec_of(&map, &verdict) {
        let rep = char_poly_roots(&spec, 128).map_err(err)?;
        out["lambda"] = json!(rep.lambda_decimal());
        out["r"] = json!(rep.r);
        out["rho"] = json!(rep.rho);
        out["predicted"] = json!(strings(&extend_degrees(&spec, depth + 8).map_err(err)?));
    }
    Ok(out)
}

pub fn random_family_json(seed: u64, deg_p: u32, deg_q: u32, coeff_bound: i64) -> Result<Value, String> {
    let inst = family2::random_family(deg_p, deg_q, coeff_bound, seed).map_err(err)?;
    let pre = family2::preflight(&inst, 128, 32, seed).map_err(err)?;
    let limits = Limits::default();
    let trace = iterate_degrees(&inst.map, 3, &limits).map_err(err)?;
    let verdict = infer_qas(&trace, inst.map.degree(), &limits).map_err(err)?;
    let matches = matches!(&verdict, QasVerdict::Qas(c) if c.n0 == 1 && c.h_poly == inst.p.primitive());
    Ok(json!({
        "family": family2::write_family_file(&inst),
        "spec": { "d": inst.spec.d, "h": inst.spec.h, "n0": inst.spec.n0 },
        "preflight": serde_json::to_value(&pre).map_err(err)?,
        "degrees": strings(&trace.degrees),
        "verdict": verdict.label(),
        "certificate_matches_family": matches,
    }))
}

fn complex_vec(flat: &[f64], nvars: usize, what: &str) -> Result<Vec<Complex64>, String> {
    if flat.len() != 2 * nvars {
        return Err(format!("{what} needs {} numbers (re, im per coordinate)", 2 * nvars));
    }
    Ok(flat.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

/// Samples the potential on `base + x e1 + y e2`. Complex vectors are
/// passed flat as `re, im` pairs.
#[allow(clippy::too_many_arguments)]
pub fn sample_slice(
    text: &str,
    n_iters: usize,
    resolution: usize,
    base: &[f64],
    e1: &[f64],
    e2: &[f64],
    x_range: (f64, f64),
    y_range: (f64, f64),
) -> Result<GreenGrid, String> {
    if resolution == 0 || resolution > MAX_RESOLUTION {
        return Err(format!("resolution must be in 1..={MAX_RESOLUTION}"));
    }
    let (map, _) = load(text)?;
    let limits = Limits::default();
    let trace = iterate_degrees(&map, 3, &limits).map_err(err)?;
    let verdict = infer_qas(&trace, map.degree(), &limits).map_err(err)?;
    let Some((spec, mode)) = spec_of(&map, &verdict) else {
        return Err(format!("no Green potential: verdict {}", verdict.label()));
    };
    let rep = char_poly_roots(&spec, 128).map_err(err)?;
    let model = GreenModel::new(map.clone(), mode, &rep).map_err(err)?;
    let n = map.nvars();
    let slice = Slice {
        base: complex_vec(base, n, "base")?,
        e1: complex_vec(e1, n, "e1")?,
        e2: complex_vec(e2, n, "e2")?,
        x_range,
        y_range,
    };
    grid_sample(&model, slice, resolution, &EvalConfig::new(n_iters)).map_err(err)
}

const RAMP: [[f64; 3]; 4] = [
    [13.0, 8.0, 135.0],
    [156.0, 23.0, 158.0],
    [237.0, 121.0, 83.0],
    [240.0, 249.0, 33.0],
];

fn ramp(t: f64) -> [u8; 3] {
    let s = t.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let k = (s.floor() as usize).min(RAMP.len() - 2);
    let f = s - k as f64;
    let mut px = [0u8; 3];
    for (c, p) in px.iter_mut().enumerate() {
        *p = (RAMP[k][c] * (1.0 - f) + RAMP[k + 1][c] * f).round() as u8;
    }
    px
}

/// RGBA pixels, first row on top. OK nodes follow a colour ramp over the
/// sampled range; failed nodes get fixed colours.
pub fn to_rgba(grid: &GreenGrid) -> Vec<u8> {
    let meta = grid_meta(grid);
    let (lo, hi) = (meta.min.unwrap_or(0.0), meta.max.unwrap_or(0.0));
    let mut out = Vec::with_capacity(grid.values.len() * 4);
    for (u, st) in grid.values.iter().zip(&grid.status) {
        let rgb = match st {
            NodeStatus::Ok if hi > lo => ramp((u - lo) / (hi - lo)),
            NodeStatus::Ok => ramp(0.5),
            NodeStatus::HitDivisor => [255, 255, 255],
            NodeStatus::HitIndeterminacy => [0, 0, 0],
            NodeStatus::NotConverged => [128, 128, 128],
        };
        out.extend_from_slice(&[rgb[0], rgb[1], rgb[2], 255]);
    }
    out
}

/// Degrees, verdict and dynamical degree of a map or family file.
#[wasm_bindgen]
pub fn explore(text: &str, depth: usize) -> Result<String, JsError> {
    explore_json(text, depth)
        .map(|v| v.to_string())
        .map_err(|e| JsError::new(&e))
}

/// A seeded family instance with its preflight report and certificate.
#[wasm_bindgen]
pub fn random_family(seed: u64, deg_p: u32, deg_q: u32, coeff_bound: i64) -> Result<String, JsError> {
    random_family_json(seed, deg_p, deg_q, coeff_bound)
        .map(|v| v.to_string())
        .map_err(|e| JsError::new(&e))
}

/// RGBA image of the potential, `resolution x resolution` pixels.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn green_slice(
    text: &str,
    n_iters: usize,
    resolution: usize,
    base: Vec<f64>,
    e1: Vec<f64>,
    e2: Vec<f64>,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
) -> Result<Vec<u8>, JsError> {
    sample_slice(text, n_iters, resolution, &base, &e1, &e2, (x_lo, x_hi), (y_lo, y_hi))
        .map(|g| to_rgba(&g))
        .map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const QAS: &str = "vars z w t\nmap z*w^2 - w^2*t\nmap z*t^2 - w^2*t\nmap z^3 + 2*z^2*w - z*w*t - z*t^2 - w^2*t\n";

    #[test]
    fn explore_reports_certificate() {
        let v = explore_json(QAS, 3).unwrap();
        assert_eq!(v["degrees"], json!(["1", "3", "8", "21"]));
        assert_eq!((v["verdict"].as_str(), v["H"].as_str()), (Some("QAS"), Some("z")));
        assert!(v["lambda"].as_str().unwrap().starts_with("2.6180339887"));
        assert_eq!(v["predicted"][4], "55");
        assert!(explore_json(QAS, MAX_DEPTH + 1).is_err());
        assert!(explore_json("vars z w t\nmap z\n", 2).is_err());
    }

    #[test]
    fn random_family_is_seeded() {
        let a = random_family_json(5, 1, 2, 3).unwrap();
        assert_eq!(a, random_family_json(5, 1, 2, 3).unwrap());
        assert_eq!(a["verdict"], "QAS");
        assert_eq!(a["certificate_matches_family"], true);
        // The family text reloads through the same loader the page uses.
        let (_, inst) = load(a["family"].as_str().unwrap()).unwrap();
        assert!(inst.is_some());
        assert!(random_family_json(5, 1, 1, 3).is_err());
    }

    #[test]
    fn slice_pixels() {
        let g = sample_slice(
            QAS,
            20,
            8,
            &[1.0, 0.0, 0.0, 0.0, 0.5, 0.0],
            &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            (-2.0, 2.0),
            (-2.0, 2.0),
        )
        .unwrap();
        let px = to_rgba(&g);
        assert_eq!(px.len(), 8 * 8 * 4);
        assert!(px.chunks(4).all(|p| p[3] == 255));
        assert_eq!(ramp(0.0), [13, 8, 135]);
        assert_eq!(ramp(1.0), [240, 249, 33]);
        let bad = sample_slice(QAS, 20, 8, &[1.0], &[], &[], (-1.0, 1.0), (-1.0, 1.0));
        assert!(bad.is_err());
        let ref_map = "vars z w t\nmap z*w^2 - w^2*t\nmap z*t^2 - w^2*t\nmap z^2*w - w^2*t\n";
        let none = sample_slice(
            ref_map,
            20,
            4,
            &[1.0; 6],
            &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            (-1.0, 1.0),
            (-1.0, 1.0),
        );
        assert!(none.unwrap_err().contains("NotQAS"));
    }
}
