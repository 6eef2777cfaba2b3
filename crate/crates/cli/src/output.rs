//! JSON shapes. Field order is fixed by the struct definitions, exact
//! integers are decimal strings and polynomials use the parser grammar.

use num_bigint::BigInt;
use serde::Serialize;

use qasmap::family2::{FamilyInstance, PreflightReport, Verdict};
use qasmap::greenpot::{GridMeta, Precision};
use qasmap::mapiter::{IterationTrace, ProjMap, QasVerdict};
use qasmap::numeric::{decimal_string, log2_abs, Big};
use qasmap::specdeg::SpectralReport;

pub fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
pub struct DegreesJson {
    pub degrees: Vec<String>,
    /// Primitive parts of the factors removed at each step.
    pub removed_factors: Vec<String>,
    pub certificate_digest: String,
}

#[derive(Serialize)]
pub struct CertificateJson {
    pub verdict: &'static str,
    pub n0: Option<usize>,
    #[serde(rename = "H")]
    pub h_poly: Option<String>,
    pub h: Option<u32>,
    pub d: u32,
    pub degrees: Vec<String>,
    pub verified_to: Option<usize>,
    pub witness: Option<usize>,
    pub vars: Vec<String>,
    pub map: Vec<String>,
    pub removed_factors: Vec<String>,
    pub certificate_digest: String,
}

impl CertificateJson {
    pub fn new(map: &ProjMap, trace: &IterationTrace, verdict: &QasVerdict, digest: &str) -> Self {
        let vars = map.vars();
        let show = |p: &qasmap::polycore::HomPoly| p.to_string_with(vars);
        let depth = trace.depth();
        let (n0, h_poly, h, verified_to, witness) = match verdict {
            QasVerdict::As => (None, None, Some(0), Some(depth), None),
            QasVerdict::Qas(c) => (Some(c.n0), Some(show(&c.h_poly)), Some(c.h), Some(c.verified_to), None),
            QasVerdict::NotQas { witness } => (None, None, None, None, Some(*witness)),
            QasVerdict::Inconclusive { n0, .. } => {
                let cand = &trace.extracted[*n0].primitive;
                (Some(*n0), Some(show(cand)), cand.degree().ok(), None, None)
            }
        };
        CertificateJson {
            verdict: verdict.label(),
            n0,
            h_poly,
            h,
            d: map.degree(),
            degrees: strings(&trace.degrees),
            verified_to,
            witness,
            vars: vars.names().to_vec(),
            map: map.components().iter().map(show).collect(),
            removed_factors: trace.extracted.iter().map(|e| show(&e.primitive)).collect(),
            certificate_digest: digest.to_string(),
        }
    }
}

/// Scientific notation that survives magnitudes outside the f64 range.
pub fn sci(x: &Big) -> String {
    let l2 = log2_abs(x);
    if !l2.is_finite() {
        return "0".into();
    }
    let l10 = l2 * std::f64::consts::LOG10_2;
    let mut e = l10.floor();
    let mut m = 10f64.powf(l10 - e);
    if format!("{m:.3}") == "10.000" {
        m = 1.0;
        e += 1.0;
    }
    format!("{m:.3}e{e}")
}

#[derive(Serialize)]
pub struct SpectralJson {
    pub d: u64,
    pub h: u64,
    pub n0: u64,
    /// Coefficients, highest degree first.
    pub charpoly: Vec<String>,
    pub lambda: String,
    pub lambda_f64: f64,
    pub lambda_error: String,
    pub r: usize,
    pub rho: f64,
    pub roots: Vec<[f64; 2]>,
    pub q_fit: Vec<String>,
    pub precision_bits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<String>>,
}

impl SpectralJson {
    pub fn new(rep: &SpectralReport, degrees: Option<&[BigInt]>) -> Self {
        let digits = (rep.precision_bits as f64 * std::f64::consts::LOG10_2) as usize;
        SpectralJson {
            d: rep.spec.d,
            h: rep.spec.h,
            n0: rep.spec.n0,
            charpoly: strings(&rep.charpoly),
            lambda: rep.lambda_decimal(),
            lambda_f64: rep.lambda_f64(),
            lambda_error: sci(&rep.lambda_error),
            r: rep.r,
            rho: rep.rho,
            roots: rep.roots.iter().map(|&(a, b)| [a, b]).collect(),
            q_fit: rep.q_fit.iter().map(|q| decimal_string(q, digits)).collect(),
            precision_bits: rep.precision_bits,
            degrees: degrees.map(strings),
        }
    }
}

#[derive(Serialize)]
pub struct SpecJson {
    pub d: u64,
    pub h: u64,
    pub n0: u64,
}

#[derive(Serialize)]
pub struct FamilyJson {
    pub vars: Vec<String>,
    #[serde(rename = "P")]
    pub p: String,
    #[serde(rename = "Q1")]
    pub q1: String,
    #[serde(rename = "Q2")]
    pub q2: String,
    #[serde(rename = "Q3")]
    pub q3: String,
    #[serde(rename = "R")]
    pub r: String,
    pub map: Vec<String>,
    pub spec: SpecJson,
}

impl FamilyJson {
    pub fn new(inst: &FamilyInstance) -> Self {
        let v = &inst.vars;
        FamilyJson {
            vars: v.names().to_vec(),
            p: inst.p.to_string_with(v),
            q1: inst.q[0].to_string_with(v),
            q2: inst.q[1].to_string_with(v),
            q3: inst.q[2].to_string_with(v),
            r: inst.r.to_string_with(v),
            map: inst.map.components().iter().map(|c| c.to_string_with(v)).collect(),
            spec: SpecJson {
                d: inst.spec.d,
                h: inst.spec.h,
                n0: inst.spec.n0,
            },
        }
    }
}

#[derive(Serialize)]
pub struct FamilyGenJson {
    pub deg_p: u32,
    pub deg_q: u32,
    pub coeff_bound: i64,
    pub seed: u64,
    pub family: FamilyJson,
}

#[derive(Serialize)]
pub struct FamilyCheckJson {
    pub family: FamilyJson,
    pub preflight: PreflightReport,
    pub certificate: CertificateJson,
    /// `H` equals the primitive part of `P` and `n0 = 1`.
    pub certificate_matches_family: bool,
    pub verdict: Verdict,
}

#[derive(Serialize)]
pub struct TelescopeJson {
    pub n: usize,
    pub residual: f64,
}

#[derive(Serialize)]
pub struct GreenPointJson {
    pub point: Vec<[f64; 2]>,
    pub mode: &'static str,
    pub n_iters: usize,
    pub precision: Precision,
    pub u: f64,
    pub final_increment: Option<f64>,
    pub history: Vec<f64>,
    pub functional_eq_residual: Option<f64>,
    pub functional_eq_error: Option<String>,
    pub telescope: Option<TelescopeJson>,
    pub lambda: f64,
    pub kappa: f64,
    pub certificate_digest: String,
}

#[derive(Serialize)]
pub struct GridSidecar {
    #[serde(flatten)]
    pub meta: GridMeta,
    pub mode: &'static str,
    pub lambda: f64,
    /// Largest discrete Laplacian magnitude over interior OK stencils.
    pub laplacian_max: Option<f64>,
}

/// Everything that determines a `verify-all` run.
#[derive(Serialize)]
pub struct RunConfig {
    pub input: String,
    pub depth: usize,
    pub iters: usize,
    pub precision_bits: usize,
    pub samples: usize,
    pub seed: u64,
    pub max_terms: usize,
}

#[derive(Serialize)]
pub struct CheckJson {
    pub name: &'static str,
    pub passed: bool,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

#[derive(Serialize)]
pub struct VerifyJson {
    pub config: RunConfig,
    pub certificate: CertificateJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preflight: Option<PreflightReport>,
    pub spectral: Option<SpectralJson>,
    pub checks: Vec<CheckJson>,
    pub passed: bool,
}
