//! Subcommand implementations. Each returns the process exit code.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rug::{Complex, Float};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vanishforge::characters::enumerate_characters;
use vanishforge::construct::{
    dimension_report, vanishing_space_large_weight, vanishing_space_small_weight, verify_certificate,
    ConstructionCertificate, DimensionQuery, DimensionReport, Mode, VerifyReport,
};
use vanishforge::cotangent::{berndt_yeap_closed_form, cot_power_sum};
use vanishforge::num::{cx_from_strings, cx_to_strings, fmt_complex_sci, fmt_sci, is_odd_prime};
use vanishforge::weak::{alpha_basis, character_coordinates, taylor_coeffs, Order, Parity, WeakFunctionRecord};
use vanishforge::{Error, PrecisionContext, Result, WeakFunction};

use crate::{Cli, Command, Format, GlobalOpts};

pub const WEAKFN_SCHEMA: &str = "vanishforge.weakfn/1";
pub const BASIS_SCHEMA: &str = "vanishforge.basis/1";
const TAYLOR_DIGEST_DIGITS: usize = 30;

#[derive(Debug, Serialize, Deserialize)]
pub struct WeakFunctionDocument {
    pub schema: String,
    #[serde(flatten)]
    pub function: WeakFunctionRecord,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CharacterCoordinate {
    pub chi: u64,
    pub value: [String; 2],
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BasisFunction {
    pub index: usize,
    pub order: String,
    pub parity: String,
    pub function: WeakFunctionRecord,
    /// sha256 over Taylor coefficients z^0..z^{N-1}
    pub taylor_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub character_coordinates: Option<Vec<CharacterCoordinate>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BasisDocument {
    pub schema: String,
    pub level: usize,
    pub raw: bool,
    pub precision_bits: u32,
    pub functions: Vec<BasisFunction>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OrderDocument {
    pub schema: String,
    pub level: usize,
    pub order: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_u: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_value: Option<[String; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CotsumDocument {
    pub schema: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub power: usize,
    pub beta: String,
    pub value: [String; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DimsDocument {
    pub schema: String,
    #[serde(flatten)]
    pub report: DimensionReport,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(g: &GlobalOpts, doc: &T, human: &str) -> Result<()> {
    let json = serde_json::to_string_pretty(doc).map_err(|e| Error::Format(e.to_string()))? + "\n";
    if let Some(path) = &g.output {
        fs::write(path, &json).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    }
    match g.format {
        Format::Json if g.output.is_none() => print!("{json}"),
        Format::Json => {}
        Format::Human => print!("{human}"),
    }
    Ok(())
}

fn to_set(v: &[i64]) -> Result<BTreeSet<usize>> {
    v.iter()
        .map(|&x| usize::try_from(x).map_err(|_| Error::Hypothesis(format!("vanishing index {x} is negative"))))
        .collect()
}

pub fn run(cli: &Cli, ctx: &PrecisionContext) -> Result<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Basis { level, raw } => basis(g, ctx, *level, *raw),
        Command::Order { input, index } => order(g, ctx, input, *index),
        Command::Construct { p1, p2, k, vanish_set, l1, l2 } => construct(g, ctx, *p1, *p2, *k, vanish_set.as_ref().map(|v| v.0.as_slice()), *l1, *l2),
        Command::Verify { certificate, recheck_points } => {
            verify(g, ctx, certificate, recheck_points.as_ref().map(|v| v.0.as_slice()).unwrap_or(&[]))
        }
        Command::Cotsum { n, power, beta, ones } => cotsum(g, ctx, *n, *power, beta.as_deref(), *ones),
        Command::Dims { p1, p2, k, vanish_set, l1, l2 } => dims(g, *p1, *p2, *k, vanish_set.as_ref().map(|v| v.0.as_slice()), *l1, *l2),
    }
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Zero => "zero",
        Parity::Even => "even",
        Parity::Odd => "odd",
        Parity::Mixed => "mixed",
    }
}

/// Drops real or imaginary parts that are rounding noise.
fn chop(z: &Complex, floor: &Float) -> Complex {
    let prec = z.prec().0;
    let keep = |x: &Float| if Float::with_val(prec, x.abs_ref()) < *floor { Float::new(prec) } else { x.clone() };
    Complex::with_val(prec, (keep(z.real()), keep(z.imag())))
}

fn taylor_digest(w: &WeakFunction, ctx: &PrecisionContext) -> Result<String> {
    let t = taylor_coeffs(w, w.level(), ctx)?;
    let mut h = Sha256::new();
    for c in &t {
        let re = Float::with_val(c.prec().0, c.real());
        let im = Float::with_val(c.prec().0, c.imag());
        h.update(format!("{},{};", fmt_sci(&re, TAYLOR_DIGEST_DIGITS), fmt_sci(&im, TAYLOR_DIGEST_DIGITS)));
    }
    Ok(hex::encode(h.finalize()))
}

fn basis(g: &GlobalOpts, ctx: &PrecisionContext, level: usize, raw: bool) -> Result<u8> {
    if raw {
        if level < 3 {
            return Err(Error::Hypothesis(format!("level {level} is below 3")));
        }
    } else if level < 5 || !is_odd_prime(level as u64) {
        return Err(Error::Hypothesis(format!(
            "the character layer needs an odd prime level >= 5, got {level}; use --raw for other levels"
        )));
    }
    let alphas = alpha_basis(level, ctx)?;
    let chars = if raw { None } else { Some(enumerate_characters(level as u64)?) };
    let mut functions = Vec::with_capacity(alphas.len());
    let mut human = format!("alpha basis of W_{level}^0 ({} functions)\n", alphas.len());
    for (j, a) in alphas.iter().enumerate() {
        let rep = a.order(ctx)?;
        let parity = a.parity(ctx);
        let coords = match &chars {
            Some(cs) => Some(
                character_coordinates(a, cs, ctx)?
                    .iter()
                    .zip(cs)
                    .map(|(v, c)| CharacterCoordinate { chi: c.index(), value: cx_to_strings(v) })
                    .collect(),
            ),
            None => None,
        };
        let _ = writeln!(human, "alpha_{j}: order {}, parity {}", rep.order, parity_name(parity));
        let floor = a.norm() * ctx.working_eps();
        for (i, b) in a.beta().iter().enumerate() {
            let _ = writeln!(human, "  beta({}) = {}", i + 1, fmt_complex_sci(&chop(b, &floor), 20));
        }
        functions.push(BasisFunction {
            index: j,
            order: rep.order.to_string(),
            parity: parity_name(parity).into(),
            function: a.to_record(),
            taylor_digest: taylor_digest(a, ctx)?,
            character_coordinates: coords,
        });
    }
    let doc = BasisDocument { schema: BASIS_SCHEMA.into(), level, raw, precision_bits: ctx.prec(), functions };
    emit(g, &doc, &human)?;
    Ok(0)
}

fn load_weak(path: &Path, index: Option<usize>, prec: u32) -> Result<WeakFunction> {
    let value: serde_json::Value = read_json(path)?;
    let schema = value.get("schema").and_then(|s| s.as_str()).unwrap_or("");
    match schema {
        WEAKFN_SCHEMA => {
            let doc: WeakFunctionDocument = serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
            WeakFunction::from_record(&doc.function, prec)
        }
        BASIS_SCHEMA => {
            let doc: BasisDocument = serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
            let i = index.ok_or_else(|| Error::arg("a basis file needs --index"))?;
            let f = doc.functions.get(i).ok_or_else(|| Error::arg(format!("basis has no entry {i}")))?;
            WeakFunction::from_record(&f.function, prec)
        }
        other => Err(Error::Format(format!("unsupported schema '{other}'"))),
    }
}

fn order(g: &GlobalOpts, ctx: &PrecisionContext, input: &Path, index: Option<usize>) -> Result<u8> {
    let w = load_weak(input, index, ctx.prec())?;
    let rep = w.order(ctx)?;
    let human = match (&rep.order, &rep.witness) {
        (Order::Infinite, _) => "order ∞\n".to_string(),
        (o, Some((u, v))) => format!("order {o}, witness u={u}, S_{u} = {}\n", fmt_complex_sci(v, 20)),
        (o, None) => format!("order {o}\n"),
    };
    let doc = OrderDocument {
        schema: "vanishforge.order/1".into(),
        level: w.level(),
        order: rep.order.to_string(),
        witness_u: rep.witness.as_ref().map(|(u, _)| *u),
        witness_value: rep.witness.as_ref().map(|(_, v)| cx_to_strings(v)),
    };
    emit(g, &doc, &human)?;
    Ok(0)
}

fn certificate_table(cert: &ConstructionCertificate) -> String {
    let mut out = String::new();
    let i = &cert.inputs;
    let mode = match cert.mode {
        Mode::SmallWeight => "small weight",
        Mode::LargeWeight => "large weight",
    };
    let _ = writeln!(out, "construction ({mode}) p1={} p2={} k={}", i.p1, i.p2, i.k);
    if let Some(s) = &i.vanish_set {
        let _ = writeln!(out, "vanishing indices {s:?}");
    }
    if let (Some(a), Some(b)) = (i.l1, i.l2) {
        let _ = writeln!(out, "orders l1={a} l2={b}");
    }
    let _ = writeln!(out, "dim E = {}, emitted basis = {}, exactness {:?}", cert.dimensions.dim_e, cert.kernel_dimension, cert.exactness);
    for n in &cert.notes {
        let _ = writeln!(out, "note: {n}");
    }
    for b in &cert.basis {
        let _ = writeln!(out, "\n{}", b.label);
        for t in &b.form.terms {
            let c = cx_from_strings(&t.coeff, 64).map(|z| fmt_complex_sci(&z, 12)).unwrap_or_default();
            let _ = writeln!(out, "  coefficient E(chi_{}^({}), chi_{}^({})) = {c}", b.form.p1, t.chi, b.form.p2, t.psi);
        }
        let _ = writeln!(out, "  {:>4}  {:<50}  {:<14}  {:<8}  {:<8}  label", "s", "L(f;s)", "scale", "promised", "vanished");
        for r in &b.l_values {
            let v = cx_from_strings(&r.value, 64).map(|z| fmt_complex_sci(&z, 10)).unwrap_or_default();
            let scale = vanishforge::num::parse_float(&r.scale, 64).map(|x| fmt_sci(&x, 6)).unwrap_or_default();
            let label = if r.trivial { "trivial" } else { "non-trivial" };
            let _ = writeln!(out, "  {:>4}  {:<50}  {:<14}  {:<8}  {:<8}  {label}", r.s, v, scale, r.promised, r.vanished);
        }
    }
    out
}

fn claims_table(claims: &[vanishforge::construct::ClaimCheck]) -> String {
    let mut out = String::new();
    for c in claims {
        let _ = writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.detail);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn construct(
    g: &GlobalOpts,
    ctx: &PrecisionContext,
    p1: u64,
    p2: u64,
    k: u32,
    vanish_set: Option<&[i64]>,
    l1: Option<usize>,
    l2: Option<usize>,
) -> Result<u8> {
    let cert = match (vanish_set, l1, l2) {
        (Some(s), None, None) => vanishing_space_small_weight(p1, p2, k, &to_set(s)?, ctx)?,
        (None, Some(a), Some(b)) => vanishing_space_large_weight(p1, p2, k, a, b, ctx)?,
        _ => return Err(Error::Hypothesis("give exactly one of --vanish-set or --l1/--l2".into())),
    };
    let mut human = certificate_table(&cert);
    let _ = writeln!(human, "\nclaims");
    human.push_str(&claims_table(&cert.claims));
    let _ = writeln!(human, "{}", if cert.passed { "certificate verified" } else { "certificate FAILED verification" });
    emit(g, &cert, &human)?;
    Ok(if cert.passed { 0 } else { 3 })
}

fn verify(g: &GlobalOpts, ctx: &PrecisionContext, path: &Path, recheck: &[i64]) -> Result<u8> {
    let cert: ConstructionCertificate = read_json(path)?;
    let report: VerifyReport = verify_certificate(&cert, recheck, ctx)?;
    let mut human = claims_table(&report.claims);
    if !report.changed.is_empty() {
        let _ = writeln!(human, "\ndifferences from the recorded claims");
        for c in &report.changed {
            let _ = writeln!(human, "  {c}");
        }
    }
    if !report.extra.is_empty() {
        let _ = writeln!(human, "\nextra points (reported only)");
        for e in &report.extra {
            let v = cx_from_strings(&e.value, 64).map(|z| fmt_complex_sci(&z, 10)).unwrap_or_default();
            let state = if e.vanished { "vanishing" } else { "non-vanishing" };
            let label = if e.trivial { "trivial" } else { "non-trivial" };
            let _ = writeln!(human, "  {} s={}: L = {v} ({state}, {label})", e.label, e.s);
        }
    }
    let _ = writeln!(human, "{}", if report.passed { "verification passed" } else { "verification FAILED" });
    emit(g, &report, &human)?;
    Ok(if report.passed { 0 } else { 3 })
}

fn cotsum(g: &GlobalOpts, ctx: &PrecisionContext, n: usize, power: usize, beta: Option<&Path>, ones: bool) -> Result<u8> {
    if n < 2 {
        return Err(Error::Hypothesis(format!("N = {n} is below 2")));
    }
    let prec = ctx.prec();
    let (values, source) = match (beta, ones) {
        (None, true) => (vec![Complex::with_val(prec, 1); n - 1], "ones".to_string()),
        (Some(p), false) => {
            let w = load_weak(p, None, prec)?;
            if w.level() != n {
                return Err(Error::arg(format!("weak function has level {} but N = {n}", w.level())));
            }
            (w.beta().to_vec(), p.display().to_string())
        }
        _ => return Err(Error::arg("give exactly one of --ones or --beta")),
    };
    let v = cot_power_sum(&values, n, power, prec)?;
    let closed = if ones {
        if power == 0 {
            Some((n - 1).to_string())
        } else if power % 2 == 1 {
            Some("0".to_string())
        } else {
            Some(berndt_yeap_closed_form((power / 2) as u32, n as u64)?.to_string())
        }
    } else {
        None
    };
    let mut human = format!("sum = {}\n", fmt_complex_sci(&v, 40));
    if let Some(c) = &closed {
        let _ = writeln!(human, "closed form = {c}");
    }
    let doc = CotsumDocument {
        schema: "vanishforge.cotsum/1".into(),
        n,
        power,
        beta: source,
        value: cx_to_strings(&v),
        closed_form: closed,
    };
    emit(g, &doc, &human)?;
    Ok(0)
}

fn dims(g: &GlobalOpts, p1: u64, p2: u64, k: u32, vanish_set: Option<&[i64]>, l1: Option<usize>, l2: Option<usize>) -> Result<u8> {
    let q = match (vanish_set, l1, l2) {
        (Some(s), None, None) => DimensionQuery::VanishSet(to_set(s)?),
        (None, Some(a), Some(b)) => DimensionQuery::Orders(a, b),
        (None, None, None) => DimensionQuery::Orders(0, 0),
        _ => return Err(Error::Hypothesis("give at most one of --vanish-set or --l1/--l2".into())),
    };
    let r = dimension_report(p1, p2, k, &q)?;
    let mut human = String::new();
    if let Some(v) = r.dim_v {
        let _ = writeln!(human, "{v}");
        let _ = writeln!(
            human,
            "dim V = {v} ({} x {}), parity-filtered {}",
            r.dim_w1.unwrap_or(0),
            r.dim_w2.unwrap_or(0),
            r.dim_v_parity.unwrap_or(0)
        );
    }
    if let Some(es) = r.dim_e_s {
        let _ = writeln!(human, "{es}");
        let _ = writeln!(human, "dim E^S = {es} (|S| = {})", r.vanish_set_size.unwrap_or(0));
    }
    let _ = writeln!(human, "dim E = {}", r.dim_e);
    emit(g, &DimsDocument { schema: "vanishforge.dims/1".into(), report: r }, &human)?;
    Ok(0)
}
