//! Rational self-maps of projective space given by homogeneous liftings,
//! their iterates with common-factor removal, and detection of (quasi-)
//! algebraic stability.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::linalg::det_rational;
use crate::polycore::{parse_poly, HomPoly, IntPrimitiveForm, Limits, PolyError, VarNames};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("map is not dominant (jacobian determinant vanishes identically)")]
    NotDominant,
    #[error("all components are zero")]
    AllZero,
    #[error("components have different degrees ({0} and {1})")]
    DegreeMismatch(u32, u32),
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("the zero vector is not a projective point")]
    ZeroVector,
    /// `line` is 1-based; 0 refers to the file as a whole.
    #[error("{}", file_message(*line, msg))]
    File { line: usize, msg: String },
}

fn file_message(line: usize, msg: &str) -> String {
    if line == 0 {
        msg.to_string()
    } else {
        format!("line {line}: {msg}")
    }
}

pub type Result<T> = std::result::Result<T, MapError>;

/// Scales a tuple so that all coefficients are coprime integers and the
/// first nonzero component has positive leading coefficient. Returns the
/// scalar `s` with `input = s * output`.
pub fn normalize_tuple(comps: &[HomPoly]) -> (BigRational, Vec<HomPoly>) {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    let mut sign_set = false;
    let mut negative = false;
    for c in comps.iter().filter(|c| !c.is_zero()) {
        let f = c.primitive_form();
        num = num.gcd(f.content.numer());
        den = den.lcm(f.content.denom());
        if !sign_set {
            negative = c.leading_coeff().unwrap().is_negative();
            sign_set = true;
        }
    }
    if num.is_zero() {
        return (BigRational::one(), comps.to_vec());
    }
    if negative {
        num = -num;
    }
    let s = BigRational::new(num, den);
    let inv = s.recip();
    (s, comps.iter().map(|c| c.scale(&inv)).collect())
}

/// Projective self-map of `P^k` given by a primitive dominant lifting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjMap {
    vars: VarNames,
    components: Vec<HomPoly>,
    degree: u32,
    /// Common factor divided out of the input components.
    removed: HomPoly,
    /// `input_i = removed * scale * components_i`.
    scale: BigRational,
}

impl ProjMap {
    pub fn k(&self) -> usize {
        self.components.len() - 1
    }

    pub fn nvars(&self) -> usize {
        self.components.len()
    }

    pub fn vars(&self) -> &VarNames {
        &self.vars
    }

    pub fn components(&self) -> &[HomPoly] {
        &self.components
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn removed_factor(&self) -> &HomPoly {
        &self.removed
    }

    pub fn scale(&self) -> &BigRational {
        &self.scale
    }

    pub fn identity(vars: VarNames) -> ProjMap {
        let n = vars.len();
        ProjMap {
            components: (0..n).map(|i| HomPoly::var(n, i)).collect(),
            degree: 1,
            removed: HomPoly::one(n),
            scale: BigRational::one(),
            vars,
        }
    }

    /// Renders the map in the map-file format.
    pub fn to_map_file(&self) -> String {
        let mut out = format!("vars {}\n", self.vars.names().join(" "));
        for c in &self.components {
            out.push_str("map ");
            out.push_str(&c.to_string_with(&self.vars));
            out.push('\n');
        }
        out
    }

    /// Images of the components at a complex point.
    pub fn eval_complex(&self, z: &[num_complex::Complex64]) -> Vec<num_complex::Complex64> {
        self.components
            .iter()
            .map(|c| c.eval_complex(z).expect("arity checked"))
            .collect()
    }
}

/// Validates, primitivizes and checks dominance.
pub fn make_map(components: Vec<HomPoly>, vars: VarNames) -> Result<ProjMap> {
    let n = vars.len();
    if components.len() != n {
        return Err(MapError::ComponentCount {
            expected: n,
            got: components.len(),
        });
    }
    for c in &components {
        if c.nvars() != n {
            return Err(PolyError::ArityMismatch(n, c.nvars()).into());
        }
    }
    let mut deg: Option<u32> = None;
    for c in components.iter().filter(|c| !c.is_zero()) {
        let e = c.degree()?;
        match deg {
            None => deg = Some(e),
            Some(d) if d != e => return Err(MapError::DegreeMismatch(d, e)),
            _ => {}
        }
    }
    if deg.is_none() {
        return Err(MapError::AllZero);
    }
    let mut g = HomPoly::zero(n);
    for c in &components {
        g = if g.is_zero() { c.primitive() } else { g.gcd(c)? };
        if g.is_constant() {
            break;
        }
    }
    let reduced: Vec<HomPoly> = components
        .iter()
        .map(|c| c.exact_div(&g))
        .collect::<std::result::Result<_, _>>()?;
    let (scale, comps) = normalize_tuple(&reduced);
    let degree = comps.iter().find(|c| !c.is_zero()).unwrap().degree()?;
    if !is_dominant(&comps)? {
        return Err(MapError::NotDominant);
    }
    Ok(ProjMap {
        vars,
        components: comps,
        degree,
        removed: g,
        scale,
    })
}

fn jacobian(comps: &[HomPoly]) -> Result<Vec<Vec<HomPoly>>> {
    let n = comps.len();
    comps
        .iter()
        .map(|c| (0..n).map(|j| c.partial(j).map_err(MapError::from)).collect())
        .collect()
}

/// Dominance: the jacobian determinant of the lifting is not identically
/// zero. Random integer points decide the nonzero case quickly; if all of
/// them give zero the determinant is expanded symbolically.
pub fn is_dominant(comps: &[HomPoly]) -> Result<bool> {
    if comps.iter().any(|c| c.is_zero()) {
        return Ok(false);
    }
    let jac = jacobian(comps)?;
    let n = comps.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a61_636f_6269);
    for _ in 0..6 {
        let pt: Vec<BigRational> = (0..n)
            .map(|_| BigRational::from_integer(rng.random_range(-1000i64..=1000).into()))
            .collect();
        let m: Vec<Vec<BigRational>> = jac
            .iter()
            .map(|row| row.iter().map(|p| p.eval_rational(&pt).unwrap()).collect())
            .collect();
        if !det_rational(&m).is_zero() {
            return Ok(true);
        }
    }
    Ok(!symbolic_det(&jac)?.is_zero())
}

fn symbolic_det(m: &[Vec<HomPoly>]) -> Result<HomPoly> {
    let n = m.len();
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let nv = m[0][0].nvars();
    let mut acc = HomPoly::zero(nv);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<HomPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = m[0][j].mul(&symbolic_det(&minor)?)?;
        acc = if j % 2 == 0 { acc.add(&term)? } else { acc.sub(&term)? };
    }
    Ok(acc)
}

/// Composes the map's components with the lifting `g` and removes the
/// common factor. Returns `(E, result)` where `E` carries the scalar so
/// that `f_i(g) = E * result_i` exactly and `result` is a normalized tuple.
pub fn compose_extract(f: &ProjMap, g: &[HomPoly], limits: &Limits) -> Result<(IntPrimitiveForm, Vec<HomPoly>)> {
    if g.len() != f.nvars() {
        return Err(MapError::ComponentCount {
            expected: f.nvars(),
            got: g.len(),
        });
    }
    let composed: Vec<HomPoly> = f
        .components
        .iter()
        .map(|c| c.compose_limited(g, limits))
        .collect::<std::result::Result<_, _>>()?;
    let mut e = HomPoly::zero(f.nvars());
    for c in &composed {
        e = if e.is_zero() { c.primitive() } else { e.gcd(c)? };
        if e.is_one() {
            break;
        }
    }
    let divided: Vec<HomPoly> = composed
        .iter()
        .map(|c| c.exact_div(&e))
        .collect::<std::result::Result<_, _>>()?;
    let (scale, result) = normalize_tuple(&divided);
    Ok((
        IntPrimitiveForm {
            content: scale,
            primitive: e,
        },
        result,
    ))
}

/// Liftings `F_0..F_N`, their exact degrees and the extracted factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationTrace {
    pub liftings: Vec<Vec<HomPoly>>,
    pub degrees: Vec<BigInt>,
    /// `extracted[n-1]` is `E_n`.
    pub extracted: Vec<IntPrimitiveForm>,
}

impl IterationTrace {
    pub fn depth(&self) -> usize {
        self.liftings.len() - 1
    }

    /// Checks `E_n * F_n = F(F_{n-1})` and the degree bookkeeping for every
    /// step.
    pub fn check_reconstruction(&self, f: &ProjMap) -> Result<bool> {
        let d = BigInt::from(f.degree());
        for n in 1..=self.depth() {
            let e = &self.extracted[n - 1];
            let ev = e.primitive.scale(&e.content);
            for (i, c) in f.components().iter().enumerate() {
                let lhs = c.compose(&self.liftings[n - 1])?;
                if lhs != ev.mul(&self.liftings[n][i])? {
                    return Ok(false);
                }
            }
            let de = BigInt::from(e.primitive.degree()?);
            if self.degrees[n] != &d * &self.degrees[n - 1] - de {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Builds `F_n = F(F_{n-1}) / E_n` for `n = 1..=n_max`.
pub fn iterate_degrees(f: &ProjMap, n_max: usize, limits: &Limits) -> Result<IterationTrace> {
    let nv = f.nvars();
    let id: Vec<HomPoly> = (0..nv).map(|i| HomPoly::var(nv, i)).collect();
    let mut trace = IterationTrace {
        liftings: vec![id],
        degrees: vec![BigInt::one()],
        extracted: Vec::new(),
    };
    for _ in 1..=n_max {
        let prev = trace.liftings.last().unwrap();
        let (e, next) = compose_extract(f, prev, limits)?;
        let deg = next.iter().find(|c| !c.is_zero()).unwrap().degree()?;
        trace.degrees.push(BigInt::from(deg));
        trace.extracted.push(e);
        trace.liftings.push(next);
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QasCertificate {
    pub n0: usize,
    pub h_poly: HomPoly,
    pub h: u32,
    pub d: u32,
    pub verified_to: usize,
    pub degrees: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QasVerdict {
    As,
    Qas(QasCertificate),
    NotQas { witness: usize },
    Inconclusive { n0: usize, depth: usize },
}

impl QasVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            QasVerdict::As => "AS",
            QasVerdict::Qas(_) => "QAS",
            QasVerdict::NotQas { .. } => "NotQAS",
            QasVerdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

/// Reads off algebraic or quasi-algebraic stability from a trace.
pub fn infer_qas(trace: &IterationTrace, d: u32, limits: &Limits) -> Result<QasVerdict> {
    let depth = trace.depth();
    let Some(first) = trace.extracted.iter().position(|e| !e.primitive.is_one()) else {
        return Ok(QasVerdict::As);
    };
    let n0 = first; // E_{n0+1} is extracted[n0]
    let h_poly = trace.extracted[n0].primitive.clone();
    if depth <= n0 + 1 {
        return Ok(QasVerdict::Inconclusive { n0, depth });
    }
    let h = h_poly.degree()?;
    let dd = BigInt::from(d);
    let hh = BigInt::from(h);
    for n in n0 + 2..=depth {
        let expect = h_poly.compose_limited(&trace.liftings[n - n0 - 1], limits)?.primitive();
        let degree_ok = trace.degrees[n] == &dd * &trace.degrees[n - 1] - &hh * &trace.degrees[n - n0 - 1];
        if trace.extracted[n - 1].primitive != expect || !degree_ok {
            return Ok(QasVerdict::NotQas { witness: n });
        }
    }
    Ok(QasVerdict::Qas(QasCertificate {
        n0,
        h_poly,
        h,
        d,
        verified_to: depth,
        degrees: trace.degrees.clone(),
    }))
}

/// Checks `F_{n-1}(F) = H^{d_{n-n0-1}} * F_n` up to the tuple
/// normalization.
pub fn verify_lifting_recurrence(
    f: &ProjMap,
    cert: &QasCertificate,
    trace: &IterationTrace,
    n: usize,
    limits: &Limits,
) -> Result<bool> {
    if n <= cert.n0 || n > cert.verified_to || n > trace.depth() {
        return Err(MapError::IndexOutOfRange(n));
    }
    let e: u32 = (&trace.degrees[n - cert.n0 - 1])
        .try_into()
        .map_err(|_| MapError::IndexOutOfRange(n))?;
    let divisor = cert.h_poly.pow_limited(e, limits)?;
    let mut quotients = Vec::with_capacity(f.nvars());
    for c in &trace.liftings[n - 1] {
        let lhs = c.compose_limited(f.components(), limits)?;
        match lhs.exact_div(&divisor) {
            Ok(q) => quotients.push(q),
            Err(PolyError::NotDivisible) => return Ok(false),
            Err(err) => return Err(err.into()),
        }
    }
    let (_, normalized) = normalize_tuple(&quotients);
    Ok(normalized == trace.liftings[n])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointClass {
    Indeterminate,
    Image(Vec<BigRational>),
}

/// Scales so the first nonzero coordinate is 1.
pub fn canonical_point(p: &[BigRational]) -> Result<Vec<BigRational>> {
    let Some(lead) = p.iter().find(|x| !x.is_zero()) else {
        return Err(MapError::ZeroVector);
    };
    let lead = lead.clone();
    Ok(p.iter().map(|x| x / &lead).collect())
}

pub fn point_class(f: &ProjMap, point: &[BigRational]) -> Result<PointClass> {
    if point.len() != f.nvars() {
        return Err(PolyError::ArityMismatch(f.nvars(), point.len()).into());
    }
    if point.iter().all(|x| x.is_zero()) {
        return Err(MapError::ZeroVector);
    }
    let img: Vec<BigRational> = f
        .components
        .iter()
        .map(|c| c.eval_rational(point))
        .collect::<std::result::Result<_, _>>()?;
    if img.iter().all(|x| x.is_zero()) {
        return Ok(PointClass::Indeterminate);
    }
    Ok(PointClass::Image(canonical_point(&img)?))
}

/// Stable hex digest of the canonical printed liftings and `H`.
pub fn certificate_digest(trace: &IterationTrace, h_poly: Option<&HomPoly>, vars: &VarNames) -> String {
    let mut hasher = Sha256::new();
    for (n, lift) in trace.liftings.iter().enumerate() {
        hasher.update(format!("F{n}\n"));
        for c in lift {
            hasher.update(c.to_string_with(vars));
            hasher.update("\n");
        }
    }
    if let Some(h) = h_poly {
        hasher.update("H\n");
        hasher.update(h.to_string_with(vars));
        hasher.update("\n");
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses a map file: one `vars` line, then one `map` line per variable.
/// `#` starts a comment. Lines with other keywords are passed to `extra`
/// (used by the family format); `extra` returns `false` to reject them.
pub fn parse_map_file_with(
    text: &str,
    mut extra: impl FnMut(usize, &str, &str) -> std::result::Result<bool, MapError>,
) -> Result<(VarNames, Vec<HomPoly>)> {
    let mut vars: Option<VarNames> = None;
    let mut comps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let err = |msg: String| MapError::File { line: line_no, msg };
        match key {
            "vars" => {
                if vars.is_some() {
                    return Err(err("duplicate `vars` line".into()));
                }
                let names: Vec<&str> = rest.split_whitespace().collect();
                if names.is_empty() {
                    return Err(err("`vars` needs at least one name".into()));
                }
                vars = Some(VarNames::new(&names).map_err(|e| err(e.to_string()))?);
            }
            "map" => {
                let v = vars.as_ref().ok_or_else(|| err("`map` before `vars`".into()))?;
                comps.push(parse_poly(rest, v).map_err(|e| err(e.to_string()))?);
            }
            other => {
                if vars.is_none() {
                    return Err(err(format!("`{other}` before `vars`")));
                }
                if !extra(line_no, other, rest)? {
                    return Err(err(format!("unknown keyword `{other}`")));
                }
            }
        }
    }
    let vars = vars.ok_or(MapError::File {
        line: 0,
        msg: "missing `vars` line".into(),
    })?;
    Ok((vars, comps))
}

pub fn parse_map_file(text: &str) -> Result<ProjMap> {
    let (vars, comps) = parse_map_file_with(text, |_, _, _| Ok(false))?;
    if comps.len() != vars.len() {
        return Err(MapError::File {
            line: 0,
            msg: format!("expected {} `map` lines, found {}", vars.len(), comps.len()),
        });
    }
    make_map(comps, vars)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const REF_MAP: &str = "vars z w t\n\
        map z*w^2 - w^2*t\n\
        map z*t^2 - w^2*t\n\
        map z^2*w - w^2*t\n";

    fn zwt(s: &str) -> HomPoly {
        parse_poly(s, &VarNames::zwt()).unwrap()
    }

    fn map_of(parts: &[&str]) -> Result<ProjMap> {
        make_map(parts.iter().map(|s| zwt(s)).collect(), VarNames::zwt())
    }

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn make_map_examples() {
        let m = map_of(&["z^2", "z*w", "z*t"]).unwrap();
        assert_eq!(m.degree(), 1);
        assert_eq!(m.components(), &[zwt("z"), zwt("w"), zwt("t")]);
        assert_eq!(m.removed_factor(), &zwt("z"));
        assert_eq!(map_of(&["z", "w", "t"]).unwrap().degree(), 1);
        assert_eq!(map_of(&["z^2", "z*w", "z*w"]), Err(MapError::NotDominant));
        assert_eq!(map_of(&["0", "0", "0"]), Err(MapError::AllZero));
        assert!(matches!(
            map_of(&["z", "w^2", "t"]),
            Err(MapError::DegreeMismatch(1, 2))
        ));
        // Dominance decided symbolically only after random points fail.
        assert_eq!(map_of(&["z^2", "w^2", "z*w"]).unwrap_err(), MapError::NotDominant);
    }

    #[test]
    fn tuple_normalization() {
        let (s, t) = normalize_tuple(&[zwt("-2/3*z"), zwt("4/3*w"), zwt("0")]);
        assert_eq!(s, BigRational::new((-2).into(), 3.into()));
        assert_eq!(t, vec![zwt("z"), zwt("-2*w"), zwt("0")]);
    }

    /// Same family shape as `REF_MAP` but with `Q3 = z^2 + 2zw - wt - t^2`,
    /// which satisfies the coprimality hypotheses.
    pub(crate) const QAS_MAP: &str = "vars z w t\n\
        map z*w^2 - w^2*t\n\
        map z*t^2 - w^2*t\n\
        map z^3 + 2*z^2*w - z*w*t - z*t^2 - w^2*t\n";

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn reference_trace_has_two_lowering_curves() {
        // Oracle: independent computer-algebra run. {w = 0} is sent to the
        // indeterminate point [0:1:0] as well as {z = 0} to [1:1:1].
        let f = parse_map_file(REF_MAP).unwrap();
        let lim = Limits::default();
        let (e, _) = compose_extract(&f, f.components(), &lim).unwrap();
        assert_eq!(e.primitive, zwt("z*w"));
        let tr = iterate_degrees(&f, 3, &lim).unwrap();
        assert_eq!(tr.degrees, ints(&[1, 3, 7, 16]));
        assert_eq!(tr.extracted[2].primitive, zwt("t*w*(z - t)*(t*z - w^2)"));
        assert!(tr.check_reconstruction(&f).unwrap());
        assert_eq!(infer_qas(&tr, 3, &lim).unwrap(), QasVerdict::NotQas { witness: 3 });
    }

    #[test]
    fn qas_trace() {
        let f = parse_map_file(QAS_MAP).unwrap();
        let lim = Limits::default();
        let (e, _) = compose_extract(&f, f.components(), &lim).unwrap();
        assert_eq!(e.primitive, zwt("z"));
        let tr = iterate_degrees(&f, 4, &lim).unwrap();
        assert_eq!(tr.degrees, ints(&[1, 3, 8, 21, 55]));
        assert!(tr.check_reconstruction(&f).unwrap());
        let QasVerdict::Qas(cert) = infer_qas(&tr, 3, &lim).unwrap() else {
            panic!("expected QAS");
        };
        assert_eq!((cert.n0, cert.h, cert.d, cert.verified_to), (1, 1, 3, 4));
        assert_eq!(cert.h_poly, zwt("z"));
        for n in 2..=4 {
            assert!(verify_lifting_recurrence(&f, &cert, &tr, n, &lim).unwrap());
        }
        assert!(verify_lifting_recurrence(&f, &cert, &tr, 1, &lim).is_err());
        assert!(verify_lifting_recurrence(&f, &cert, &tr, 5, &lim).is_err());
        let short = iterate_degrees(&f, 2, &lim).unwrap();
        assert_eq!(
            infer_qas(&short, 3, &lim).unwrap(),
            QasVerdict::Inconclusive { n0: 1, depth: 2 }
        );
    }

    #[test]
    fn algebraically_stable_maps() {
        let lim = Limits::default();
        let sq = map_of(&["z^2", "w^2", "t^2"]).unwrap();
        let tr = iterate_degrees(&sq, 3, &lim).unwrap();
        let expect: Vec<BigInt> = [1, 2, 4, 8].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(tr.degrees, expect);
        assert_eq!(infer_qas(&tr, 2, &lim).unwrap(), QasVerdict::As);
        let id = ProjMap::identity(VarNames::zwt());
        let tr = iterate_degrees(&id, 3, &lim).unwrap();
        assert!(tr.degrees.iter().all(|x| x.is_one()));
        let (e, r) = compose_extract(&sq, id.components(), &lim).unwrap();
        assert!(e.primitive.is_one());
        assert_eq!(r, sq.components());
    }

    #[test]
    fn points() {
        let f = parse_map_file(REF_MAP).unwrap();
        assert_eq!(point_class(&f, &[q(1), q(1), q(1)]).unwrap(), PointClass::Indeterminate);
        assert_eq!(
            point_class(&f, &[q(0), q(1), q(1)]).unwrap(),
            PointClass::Image(vec![q(1), q(1), q(1)])
        );
        let id = ProjMap::identity(VarNames::zwt());
        let p = vec![q(2), q(-4), q(6)];
        assert_eq!(
            point_class(&id, &p).unwrap(),
            PointClass::Image(vec![q(1), q(-2), q(3)])
        );
        assert_eq!(point_class(&id, &[q(0), q(0), q(0)]), Err(MapError::ZeroVector));
    }

    #[test]
    fn map_file_round_trip() {
        let f = parse_map_file(REF_MAP).unwrap();
        let again = parse_map_file(&f.to_map_file()).unwrap();
        assert_eq!(f, again);
        assert!(matches!(
            parse_map_file("map z\nvars z"),
            Err(MapError::File { line: 1, .. })
        ));
        assert!(parse_map_file("# comment\nvars x y\nmap x^2 # trailing\nmap y^2\n").is_ok());
        assert!(parse_map_file("vars x y\nmap x\n").is_err());
    }
}
