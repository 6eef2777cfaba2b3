use std::path::Path;

use num_complex::Complex64;

use qasmap::family2::{self, combine, FamilyInstance, Verdict};
use qasmap::greenpot::{
    functional_eq_residual, green_eval, grid_meta, grid_sample, grid_to_csv, grid_to_pgm, laplacian_diagnostic,
    sphere_points, telescope_residual, EvalConfig, GreenError, GreenMode, GreenModel, Precision, Slice,
};
use qasmap::mapiter::{
    certificate_digest, infer_qas as infer, iterate_degrees, parse_map_file, verify_lifting_recurrence, IterationTrace,
    ProjMap, QasVerdict,
};
use qasmap::polycore::Limits;
use qasmap::specdeg::{
    char_poly_roots, check_asymptotics, check_growth_bounds, check_sn_identity, extend_degrees, RecurrenceSpec,
    SpectralReport,
};

use crate::output::*;
use crate::point::{parse_point, parse_range};
use crate::{read_file, write_file, Caps, CliError, InputArgs, Outcome, Result};

struct Loaded {
    map: ProjMap,
    family: Option<FamilyInstance>,
    label: String,
}

fn load(input: &InputArgs) -> Result<Loaded> {
    if let Some(path) = &input.family {
        let inst = family2::parse_family_file(&read_file(path)?)?;
        return Ok(Loaded {
            map: inst.map.clone(),
            family: Some(inst),
            label: path.display().to_string(),
        });
    }
    let path = input
        .map
        .as_ref()
        .ok_or_else(|| CliError::Input("one of --map or --family is required".into()))?;
    Ok(Loaded {
        map: parse_map_file(&read_file(path)?)?,
        family: None,
        label: path.display().to_string(),
    })
}

struct Certified {
    trace: IterationTrace,
    verdict: QasVerdict,
    digest: String,
}

fn limits(caps: &Caps) -> Limits {
    Limits {
        max_terms: caps.max_terms,
    }
}

fn trace(map: &ProjMap, depth: usize, caps: &Caps) -> Result<IterationTrace> {
    if depth > caps.max_depth {
        return Err(CliError::Resource(format!(
            "depth {depth} exceeds --max-depth {}",
            caps.max_depth
        )));
    }
    Ok(iterate_degrees(map, depth, &limits(caps))?)
}

fn certify(map: &ProjMap, depth: usize, caps: &Caps) -> Result<Certified> {
    let trace = trace(map, depth, caps)?;
    let verdict = infer(&trace, map.degree(), &limits(caps))?;
    let h = match &verdict {
        QasVerdict::Qas(c) => Some(&c.h_poly),
        _ => None,
    };
    let digest = certificate_digest(&trace, h, map.vars());
    Ok(Certified { trace, verdict, digest })
}

fn spec_of(map: &ProjMap, verdict: &QasVerdict) -> Result<RecurrenceSpec> {
    let d = map.degree() as u64;
    if d < 2 {
        return Err(CliError::Input(format!("a map of degree {d} has no Green potential")));
    }
    match verdict {
        QasVerdict::As => Ok(RecurrenceSpec::new(d, 0, 1)?),
        QasVerdict::Qas(c) => Ok(RecurrenceSpec::new(d, c.h as u64, c.n0 as u64)?),
        QasVerdict::NotQas { witness } => Err(CliError::Negative(format!(
            "no stability certificate: degree recurrence breaks at n = {witness}"
        ))),
        QasVerdict::Inconclusive { n0, depth } => Err(CliError::Negative(format!(
            "no stability certificate: depth {depth} is too shallow to confirm n0 = {n0}"
        ))),
    }
}

fn model(map: &ProjMap, c: &Certified, precision_bits: usize) -> Result<(GreenModel, SpectralReport)> {
    let spec = spec_of(map, &c.verdict)?;
    let report = char_poly_roots(&spec, precision_bits.max(64))?;
    let mode = match &c.verdict {
        QasVerdict::Qas(cert) => GreenMode::Qas(cert.clone()),
        _ => GreenMode::As,
    };
    let m = GreenModel::new(map.clone(), mode, &report)?.with_digest(c.digest.clone());
    Ok((m, report))
}

fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Unknown => "UNKNOWN",
    }
}

fn mode_label(m: &GreenModel) -> &'static str {
    if m.is_qas() {
        "QAS"
    } else {
        "AS"
    }
}

pub fn degrees(a: &crate::DegreesArgs) -> Result<Outcome> {
    let l = load(&a.input)?;
    let tr = trace(&l.map, a.n, &a.caps)?;
    if a.json {
        let digest = certificate_digest(&tr, None, l.map.vars());
        let vars = l.map.vars();
        return Ok(Outcome::ok(to_json(&DegreesJson {
            degrees: strings(&tr.degrees),
            removed_factors: tr.extracted.iter().map(|e| e.primitive.to_string_with(vars)).collect(),
            certificate_digest: digest,
        })));
    }
    let line: Vec<String> = strings(&tr.degrees);
    Ok(Outcome::ok(format!("{}\n", line.join(" "))))
}

pub fn infer_qas(a: &crate::InferArgs) -> Result<Outcome> {
    let l = load(&a.input)?;
    let c = certify(&l.map, a.n, &a.caps)?;
    let negative = !matches!(c.verdict, QasVerdict::As | QasVerdict::Qas(_));
    Ok(Outcome {
        stdout: to_json(&CertificateJson::new(&l.map, &c.trace, &c.verdict, &c.digest)),
        negative,
    })
}

pub fn lambda(a: &crate::LambdaArgs) -> Result<Outcome> {
    let spec = RecurrenceSpec::new(a.d, a.h, a.n0)?;
    let rep = char_poly_roots(&spec, a.precision)?;
    let degrees = a.n.map(|n| extend_degrees(&spec, n)).transpose()?;
    Ok(Outcome::ok(to_json(&SpectralJson::new(&rep, degrees.as_deref()))))
}

pub fn family_gen(a: &crate::FamilyGenArgs) -> Result<Outcome> {
    let inst = family2::random_family(a.deg_p, a.deg_q, a.coeff_bound, a.seed)?;
    let text = family2::write_family_file(&inst);
    if let Some(p) = &a.map_out {
        write_file(p, &inst.map.to_map_file())?;
    }
    if let Some(p) = &a.out {
        write_file(p, &text)?;
    }
    if a.json {
        return Ok(Outcome::ok(to_json(&FamilyGenJson {
            deg_p: a.deg_p,
            deg_q: a.deg_q,
            coeff_bound: a.coeff_bound,
            seed: a.seed,
            family: FamilyJson::new(&inst),
        })));
    }
    Ok(Outcome::ok(if a.out.is_some() { String::new() } else { text }))
}

pub fn family_check(a: &crate::FamilyCheckArgs) -> Result<Outcome> {
    let inst = family2::parse_family_file(&read_file(&a.family)?)?;
    if let Some(p) = &a.map_out {
        write_file(p, &inst.map.to_map_file())?;
    }
    let pre = family2::preflight(&inst, a.precision, a.samples, a.seed)?;
    let c = certify(&inst.map, a.n, &a.caps)?;
    let matches = match &c.verdict {
        QasVerdict::Qas(cert) => cert.n0 == 1 && cert.h_poly == inst.p.primitive(),
        _ => false,
    };
    let cert_verdict = match &c.verdict {
        QasVerdict::Inconclusive { .. } => Verdict::Unknown,
        _ if matches => Verdict::Pass,
        _ => Verdict::Fail,
    };
    let verdict = combine(&[pre.overall, cert_verdict]);
    let out = FamilyCheckJson {
        family: FamilyJson::new(&inst),
        preflight: pre,
        certificate: CertificateJson::new(&inst.map, &c.trace, &c.verdict, &c.digest),
        certificate_matches_family: matches,
        verdict,
    };
    Ok(Outcome {
        stdout: to_json(&out),
        negative: verdict == Verdict::Fail,
    })
}

fn eval_config(n: usize, precision: Option<usize>, tolerance: Option<f64>) -> EvalConfig {
    let mut cfg = EvalConfig::new(n);
    if let Some(b) = precision {
        cfg = cfg.with_precision(Precision::Bits(b));
    }
    if let Some(t) = tolerance {
        cfg = cfg.with_tolerance(t);
    }
    cfg
}

pub fn green_point(a: &crate::GreenPointArgs) -> Result<Outcome> {
    let l = load(&a.input)?;
    let z = parse_point(&a.point, l.map.nvars())?;
    let c = certify(&l.map, a.depth, &a.caps)?;
    let (m, _) = model(&l.map, &c, a.precision.unwrap_or(128))?;
    let cfg = eval_config(a.n, a.precision, a.tolerance);
    let v = green_eval(&m, &z, &cfg)?;
    let (fe, fe_err) = match functional_eq_residual(&m, &z, &cfg) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let telescope = match a.telescope {
        Some(n) => Some(TelescopeJson {
            n,
            residual: telescope_residual(&m, &z, n, &cfg)?,
        }),
        None => None,
    };
    let out = GreenPointJson {
        point: z.iter().map(|c| [c.re, c.im]).collect(),
        mode: mode_label(&m),
        n_iters: a.n,
        precision: cfg.precision,
        u: v.u,
        final_increment: v.history.last().copied(),
        history: v.history,
        functional_eq_residual: fe,
        functional_eq_error: fe_err,
        telescope,
        lambda: m.lambda(),
        kappa: m.kappa(),
        certificate_digest: c.digest,
    };
    Ok(Outcome::ok(to_json(&out)))
}

fn sidecar_path(pgm: &Path) -> std::path::PathBuf {
    pgm.with_extension("json")
}

pub fn green_grid(a: &crate::GreenGridArgs) -> Result<Outcome> {
    if a.resolution > a.max_resolution {
        return Err(CliError::Resource(format!(
            "resolution {} exceeds --max-resolution {}",
            a.resolution, a.max_resolution
        )));
    }
    let l = load(&a.input)?;
    let nv = l.map.nvars();
    let slice = Slice {
        base: parse_point(&a.base, nv)?,
        e1: parse_point(&a.e1, nv)?,
        e2: parse_point(&a.e2, nv)?,
        x_range: parse_range(&a.x_range)?,
        y_range: parse_range(&a.y_range)?,
    };
    let c = certify(&l.map, a.depth, &a.caps)?;
    let (m, _) = model(&l.map, &c, 128)?;
    let grid = grid_sample(&m, slice, a.resolution, &eval_config(a.n, None, a.tolerance))?;
    let laplacian_max = match laplacian_diagnostic(&grid) {
        Ok(v) => v.into_iter().flatten().reduce(f64::max),
        Err(GreenError::InsufficientOkRegion) => None,
        Err(e) => return Err(e.into()),
    };
    let side = GridSidecar {
        meta: grid_meta(&grid),
        mode: mode_label(&m),
        lambda: m.lambda(),
        laplacian_max,
    };
    let side_json = to_json(&side);
    if let Some(p) = &a.csv {
        write_file(p, &grid_to_csv(&grid))?;
    }
    if let Some(p) = &a.pgm {
        write_file(p, &grid_to_pgm(&grid))?;
    }
    if let Some(p) = a.meta.clone().or_else(|| a.pgm.as_deref().map(sidecar_path)) {
        write_file(&p, &side_json)?;
    }
    let nothing_written = a.csv.is_none() && a.pgm.is_none() && a.meta.is_none();
    Ok(Outcome::ok(if a.json || nothing_written {
        side_json
    } else {
        String::new()
    }))
}

// ---------------------------------------------------------------------
// verify-all

const FE_TOL: f64 = 1e-3;
const FE_QUORUM: f64 = 0.95;
const HOMOGENEITY_TOL: f64 = 1e-8;
const TELESCOPE_TOL: f64 = 1e-3;
const TELESCOPE_MAX_N: usize = 3;
const SN_TOL: f64 = 1e-9;
const SN_N: usize = 20;
const GROWTH_N: usize = 2000;

struct Checks(Vec<CheckJson>);

impl Checks {
    fn push(&mut self, name: &'static str, passed: bool, value: Option<f64>, threshold: Option<f64>, detail: String) {
        self.0.push(CheckJson {
            name,
            passed,
            value: value.filter(|v| v.is_finite()),
            threshold,
            detail,
        });
    }

    fn skip(&mut self, name: &'static str, why: &str) {
        self.push(name, false, None, None, format!("not run: {why}"));
    }
}

fn scalars(count: usize, seed: u64) -> Vec<Complex64> {
    sphere_points(1, count, seed ^ 0x5ca1_ab1e)
        .into_iter()
        .enumerate()
        .map(|(k, c)| c[0] * (0.25 + 0.5 * (k % 8) as f64))
        .collect()
}

fn spectral_checks(
    checks: &mut Checks,
    spec: &RecurrenceSpec,
    rep: &SpectralReport,
    symbolic: &[num_bigint::BigInt],
) -> Result<()> {
    let seq = extend_degrees(spec, symbolic.len() - 1)?;
    checks.push(
        "degree_recurrence",
        seq == symbolic,
        None,
        None,
        format!(
            "recurrence ({}, {}, {}) against {} symbolic degrees",
            spec.d,
            spec.h,
            spec.n0,
            symbolic.len()
        ),
    );
    let sn = check_sn_identity(spec, &rep.lambda, &extend_degrees(spec, SN_N)?, SN_N);
    checks.push(
        "sn_identity",
        sn < SN_TOL,
        Some(sn),
        Some(SN_TOL),
        format!("max |S_n|/lambda^n for n <= {SN_N}"),
    );
    let long = extend_degrees(spec, GROWTH_N)?;
    let (c1, c2) = check_growth_bounds(&long, &rep.lambda)?;
    checks.push(
        "growth_bounds",
        c1.is_finite() && c2.is_finite(),
        Some(c1.max(c2)),
        None,
        format!("C1 = {c1:e}, C2 = {c2:e} over n <= {GROWTH_N}"),
    );
    let asy = check_asymptotics(&long[..61], rep)?;
    let (r5, r30) = (asy.residuals[5], asy.residuals[30]);
    let ok = r30 < 1e-3 * r5 || r30 < 1e-15;
    checks.push(
        "asymptotics",
        ok,
        Some(r30),
        Some(1e-3 * r5),
        format!("relative residual {r5:e} at n = 5, {r30:e} at n = 30"),
    );
    Ok(())
}

fn potential_checks(checks: &mut Checks, m: &GreenModel, a: &crate::VerifyArgs) {
    let nv = m.map().nvars();
    let cfg = EvalConfig::new(a.iters);
    let pts = sphere_points(nv, a.samples, a.seed);

    let mut ok = 0usize;
    let mut good = 0usize;
    let mut worst = 0.0f64;
    for z in &pts {
        if let Ok(r) = functional_eq_residual(m, z, &cfg) {
            ok += 1;
            worst = worst.max(r);
            good += usize::from(r < FE_TOL);
        }
    }
    let frac = if ok == 0 { 0.0 } else { good as f64 / ok as f64 };
    checks.push(
        "functional_equation",
        ok * 2 >= pts.len() && frac >= FE_QUORUM,
        Some(frac),
        Some(FE_QUORUM),
        format!(
            "{good} of {ok} OK orbits ({} sampled) below {FE_TOL:e}; worst {worst:e}",
            pts.len()
        ),
    );

    let mut worst = 0.0f64;
    let mut used = 0usize;
    for (z, s) in pts.iter().zip(scalars(pts.len(), a.seed)) {
        let sz: Vec<Complex64> = z.iter().map(|c| c * s).collect();
        if let (Ok(u), Ok(us)) = (green_eval(m, z, &cfg), green_eval(m, &sz, &cfg)) {
            used += 1;
            worst = worst.max((us.u - s.norm().ln() - u.u).abs());
        }
    }
    checks.push(
        "homogeneity",
        used > 0 && worst < HOMOGENEITY_TOL,
        Some(worst),
        Some(HOMOGENEITY_TOL),
        format!("max |u(sz) - log|s| - u(z)| over {used} pairs"),
    );

    let mut worst = 0.0f64;
    let mut used = 0usize;
    for z in pts.iter().take(20) {
        for n in 1..=TELESCOPE_MAX_N {
            if let Ok(r) = telescope_residual(m, z, n, &cfg) {
                used += 1;
                worst = worst.max(r);
            }
        }
    }
    checks.push(
        "telescope",
        used > 0 && worst < TELESCOPE_TOL,
        Some(worst),
        Some(TELESCOPE_TOL),
        format!("max scaled residual for n <= {TELESCOPE_MAX_N} over {used} evaluations"),
    );
}

pub fn verify_all(a: &crate::VerifyArgs) -> Result<Outcome> {
    let l = load(&a.input)?;
    let lim = limits(&a.caps);
    let mut checks = Checks(Vec::new());

    let preflight = match &l.family {
        Some(inst) => {
            let pre = family2::preflight(inst, a.precision, 64, a.seed)?;
            checks.push(
                "family_preflight",
                pre.overall != Verdict::Fail,
                None,
                None,
                format!("preflight verdict {}", verdict_label(pre.overall)),
            );
            Some(pre)
        }
        None => None,
    };

    let c = certify(&l.map, a.depth, &a.caps)?;
    let recon = c.trace.check_reconstruction(&l.map)?;
    checks.push(
        "trace_reconstruction",
        recon,
        None,
        None,
        format!("F(F_(n-1)) = E_n F_n for n <= {}", a.depth),
    );
    let stable = matches!(c.verdict, QasVerdict::As | QasVerdict::Qas(_));
    checks.push(
        "stability_certificate",
        stable,
        None,
        None,
        format!("verdict {}", c.verdict.label()),
    );

    if let QasVerdict::Qas(cert) = &c.verdict {
        let mut all = true;
        for n in cert.n0 + 1..=cert.verified_to {
            all &= verify_lifting_recurrence(&l.map, cert, &c.trace, n, &lim)?;
        }
        checks.push(
            "lifting_recurrence",
            all,
            None,
            None,
            format!(
                "F_(n-1)(F) = H^(d_(n-n0-1)) F_n for n = {}..={}",
                cert.n0 + 1,
                cert.verified_to
            ),
        );
    }

    let mut spectral = None;
    match model(&l.map, &c, a.precision) {
        Ok((m, rep)) => {
            checks.push(
                "char_poly_roots",
                rep.lambda_f64() > 1.0,
                Some(rep.lambda_f64()),
                None,
                format!("lambda = {}, r = {}", rep.lambda_decimal(), rep.r),
            );
            spectral_checks(&mut checks, &rep.spec, &rep, &c.trace.degrees)?;
            potential_checks(&mut checks, &m, a);
            spectral = Some(SpectralJson::new(&rep, None));
        }
        Err(CliError::Negative(why)) | Err(CliError::Input(why)) => {
            for name in [
                "char_poly_roots",
                "degree_recurrence",
                "sn_identity",
                "growth_bounds",
                "asymptotics",
                "functional_equation",
                "homogeneity",
                "telescope",
            ] {
                checks.skip(name, &why);
            }
        }
        Err(e) => return Err(e),
    }

    let passed = checks.0.iter().all(|c| c.passed);
    let out = VerifyJson {
        config: RunConfig {
            input: l.label,
            depth: a.depth,
            iters: a.iters,
            precision_bits: a.precision,
            samples: a.samples,
            seed: a.seed,
            max_terms: a.caps.max_terms,
        },
        certificate: CertificateJson::new(&l.map, &c.trace, &c.verdict, &c.digest),
        preflight,
        spectral,
        checks: checks.0,
        passed,
    };
    let text = to_json(&out);
    if let Some(p) = &a.out {
        write_file(p, &text)?;
    }
    Ok(Outcome {
        stdout: text,
        negative: !passed,
    })
}
