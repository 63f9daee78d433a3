//! Zero sets of the curvature, contact orders and curvature equivalence.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, EvalAtExt, Result};
use crate::expr::EvalError;
use crate::func::Func;
use crate::legendre::{CurvaturePair, Domain, LegendreCurve};
use crate::taylor::{TaylorJet, DEFAULT_ORDER};

pub const DEFAULT_GRID: usize = 4096;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const MIN_GRID: usize = 64;
/// Roots closer than this are the same root.
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignatureConfig {
    /// Number of grid intervals for the root scan.
    pub grid_n: usize,
    /// Touch zeros are accepted when `|f| <= tol * max|f|`.
    pub tol: f64,
    /// Jet order `K` for contact orders.
    pub order: usize,
    /// An `ℓ`-zero and a `β`-zero closer than this are one point.
    pub coincidence: f64,
    /// `ℓ ≡ 0` when `max|ℓ| <= ell_zero_rel * max(1, max|β|)` on the grid.
    pub ell_zero_rel: f64,
}

impl Default for SignatureConfig {
    fn default() -> Self {
        SignatureConfig {
            grid_n: DEFAULT_GRID,
            tol: DEFAULT_TOL,
            order: DEFAULT_ORDER,
            coincidence: 1e-8,
            ell_zero_rel: 1e-10,
        }
    }
}

// ---------------------------------------------------------------------------
// Roots

type JetEval<'a> = dyn Fn(f64, usize) -> Result<TaylorJet, EvalError> + 'a;

/// Values and first derivatives on a uniform grid.
struct Scan {
    ts: Vec<f64>,
    vals: Vec<f64>,
    slopes: Vec<f64>,
}

impl Scan {
    fn new(f: &JetEval<'_>, domain: Domain, grid_n: usize) -> Result<Scan> {
        let ts = domain.grid(grid_n + 1);
        let mut vals = Vec::with_capacity(ts.len());
        let mut slopes = Vec::with_capacity(ts.len());
        for &t in &ts {
            let j = f(t, 1).at(t)?;
            vals.push(j.value());
            slopes.push(j.coeffs()[1]);
        }
        Ok(Scan { ts, vals, slopes })
    }

    fn scale(&self) -> f64 {
        self.vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

fn bisect(g: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut g_lo: f64) -> Result<f64> {
    for _ in 0..200 {
        if hi - lo <= 1e-13 * lo.abs().max(hi.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid)?;
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Number of leading coefficients of `jet` that vanish under its threshold.
fn vanishing_prefix(jet: &TaylorJet) -> usize {
    jet.leading_index(0).unwrap_or(jet.order() + 1)
}

/// Parameter unit for vanishing tests on `domain`: one radian of a `2π`-periodic
/// parameter. Keeps contact orders unchanged when the interval is rescaled.
fn jet_unit(domain: Domain) -> f64 {
    domain.length() / std::f64::consts::TAU
}

/// `jet` in the variable `(t - t0) / ρ` with `ρ` its natural scale up to `unit`.
fn normalized(jet: &TaylorJet, unit: f64) -> TaylorJet {
    jet.rescaled(jet.natural_scale(unit))
}

/// Newton step on `f^(r-1)` for a few candidate multiplicities `r`; keeps
/// whichever point makes the most leading coefficients vanish.
fn polish(f: &JetEval<'_>, t0: f64, order: usize, max_step: f64, unit: f64) -> Result<f64> {
    let jet0 = f(t0, order).at(t0)?;
    let mut best = (t0, vanishing_prefix(&normalized(&jet0, unit)), jet0.value().abs());
    let c = jet0.coeffs().to_vec();
    let r_est = normalized(&jet0, unit).leading_index(1).unwrap_or(order).max(1);
    for r in r_est..=(r_est + 3).min(order) {
        if c[r] == 0.0 {
            continue;
        }
        let step = c[r - 1] / (r as f64 * c[r]);
        if step.is_nan() || step.abs() > max_step || step == 0.0 {
            continue;
        }
        let t = t0 - step;
        let jet = f(t, order).at(t)?;
        let z = vanishing_prefix(&normalized(&jet, unit));
        let v = jet.value().abs();
        if z > best.1 || (z == best.1 && v < best.2) {
            best = (t, z, v);
        }
    }
    Ok(best.0)
}

fn locate(f: &JetEval<'_>, scan: &Scan, domain: Domain, grid_n: usize, tol: f64) -> Result<Vec<f64>> {
    let scale = scan.scale();
    if scale == 0.0 {
        return Err(Error::NonFiniteZeros {
            count: scan.ts.len(),
            grid_n,
        });
    }
    let level = tol * scale;
    let value = |t: f64| -> Result<f64> { Ok(f(t, 0).at(t)?.value()) };
    let slope = |t: f64| -> Result<f64> { Ok(f(t, 1).at(t)?.coeffs()[1]) };
    let max_step = 1e-6 * domain.length().max(1.0);
    let n = scan.ts.len();
    let (ts, vals, slopes) = (&scan.ts, &scan.vals, &scan.slopes);

    let mut roots = Vec::new();
    for i in 0..n {
        if vals[i] == 0.0 {
            roots.push(ts[i]);
        }
        let interior = i > 0 && i + 1 < n;
        if interior && slopes[i] == 0.0 && vals[i].abs() <= level {
            roots.push(ts[i]);
        }
        if i + 1 == n {
            continue;
        }
        let (lo, hi) = (ts[i], ts[i + 1]);
        if vals[i] * vals[i + 1] < 0.0 {
            roots.push(bisect(value, lo, hi, vals[i])?);
        }
        if slopes[i] * slopes[i + 1] < 0.0 {
            let t = bisect(slope, lo, hi, slopes[i])?;
            if value(t)?.abs() <= level {
                roots.push(t);
            }
        }
    }
    for i in [0, n - 1] {
        if vals[i].abs() <= level {
            roots.push(ts[i]);
        }
    }
    if roots.len() > grid_n / 4 {
        return Err(Error::NonFiniteZeros {
            count: roots.len(),
            grid_n,
        });
    }

    let mut polished = Vec::with_capacity(roots.len());
    for t in roots {
        let p = polish(f, t, DEFAULT_ORDER, max_step, jet_unit(domain))?;
        // Endpoints stay put; polishing must not leave the domain.
        let p = if t == domain.start || t == domain.end || !domain.contains(p, 0.0) {
            t
        } else {
            p
        };
        if value(p)?.abs() <= level {
            polished.push(p);
        }
    }
    polished.sort_by(f64::total_cmp);
    polished.dedup_by(|b, a| (*b - *a).abs() <= DEDUP_TOL);
    Ok(polished)
}

/// Roots of `f` on `domain`: sign changes of `f` refined by bisection, touch
/// zeros where `f'` changes sign and `|f| <= tol * max|f|`, and endpoints.
pub fn find_zeros(f: &Func, domain: Domain, grid_n: usize, tol: f64) -> Result<Vec<f64>> {
    if grid_n < MIN_GRID {
        return Err(Error::TooFewSamples {
            min: MIN_GRID,
            got: grid_n,
        });
    }
    let eval = |t: f64, order: usize| f.jet(t, order);
    let scan = Scan::new(&eval, domain, grid_n)?;
    locate(&eval, &scan, domain, grid_n, tol)
}

/// Contact order `ord(f; t0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactOrder {
    Finite(u32),
    /// Every jet coefficient up to the given order vanishes.
    AtLeast(u32),
}

fn contact_order_of(jet: &TaylorJet, t0: f64) -> Result<ContactOrder> {
    if !jet.is_vanishing(0) {
        return Err(Error::NotAZero {
            t: t0,
            value: jet.value(),
        });
    }
    Ok(match jet.leading_index(1) {
        Some(r) => ContactOrder::Finite(r as u32),
        None => ContactOrder::AtLeast(jet.order() as u32 + 1),
    })
}

/// Smallest `r >= 1` whose jet coefficient at `t0` does not vanish.
pub fn contact_order(f: &Func, t0: f64, order: usize) -> Result<ContactOrder> {
    let jet = f.jet(t0, order).at(t0)?;
    contact_order_of(&jet, t0)
}

// ---------------------------------------------------------------------------
// Signatures

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroKind {
    Inflection,
    Singular,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroPoint {
    pub t: f64,
    pub kind: ZeroKind,
    pub ord_ell: Option<u32>,
    pub ord_beta: Option<u32>,
}

impl ZeroPoint {
    /// Everything but the location.
    fn key(&self) -> (ZeroKind, Option<u32>, Option<u32>) {
        (self.kind, self.ord_ell, self.ord_beta)
    }
}

/// The ordered zero points of `ℓ` and `β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    pub domain: [f64; 2],
    pub closed: bool,
    pub ell_identically_zero: bool,
    pub zeros: Vec<ZeroPoint>,
}

impl Signature {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("signatures always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn inflection_count(&self) -> usize {
        self.zeros.iter().filter(|z| z.ord_ell.is_some()).count()
    }

    pub fn singular_count(&self) -> usize {
        self.zeros.iter().filter(|z| z.ord_beta.is_some()).count()
    }

    /// Same zero data, ignoring locations.
    pub fn same_pattern(&self, other: &Signature) -> bool {
        self.closed == other.closed
            && self.ell_identically_zero == other.ell_identically_zero
            && self.zeros.len() == other.zeros.len()
            && self.zeros.iter().zip(&other.zeros).all(|(a, b)| a.key() == b.key())
    }
}

fn component_zeros(
    pair: &CurvaturePair,
    beta: bool,
    scan: &Scan,
    domain: Domain,
    closed: bool,
    config: &SignatureConfig,
) -> Result<Vec<(f64, u32)>> {
    let eval = |t: f64, order: usize| {
        let (l, b) = pair.jets(t, order)?;
        Ok(if beta { b } else { l })
    };
    let mut roots = locate(&eval, scan, domain, config.grid_n, config.tol)?;
    if closed && roots.len() >= 2 {
        let near = |t: f64, e: f64| (t - e).abs() <= DEDUP_TOL * domain.length().max(1.0);
        if near(roots[0], domain.start) && near(roots[roots.len() - 1], domain.end) {
            roots.pop();
        }
    }
    let mut out = Vec::with_capacity(roots.len());
    for t in roots {
        let jet = normalized(&eval(t, config.order).at(t)?, jet_unit(domain));
        match contact_order_of(&jet, t)? {
            ContactOrder::Finite(r) => out.push((t, r)),
            ContactOrder::AtLeast(_) => {
                return Err(Error::ContactOrderExceeded {
                    t,
                    order: config.order,
                })
            }
        }
    }
    Ok(out)
}

/// Signature of an arbitrary curvature pair on `domain`.
pub fn signature_of_pair(
    pair: &CurvaturePair,
    domain: Domain,
    closed: bool,
    config: &SignatureConfig,
) -> Result<Signature> {
    if config.grid_n < MIN_GRID {
        return Err(Error::TooFewSamples {
            min: MIN_GRID,
            got: config.grid_n,
        });
    }
    let ts = domain.grid(config.grid_n + 1);
    let mut ell = Scan {
        ts: ts.clone(),
        vals: Vec::with_capacity(ts.len()),
        slopes: Vec::with_capacity(ts.len()),
    };
    let mut beta = Scan {
        ts,
        vals: Vec::with_capacity(ell.ts.len()),
        slopes: Vec::with_capacity(ell.ts.len()),
    };
    for &t in &ell.ts {
        let (l, b) = pair.jets(t, 1).at(t)?;
        ell.vals.push(l.value());
        ell.slopes.push(l.coeffs()[1]);
        beta.vals.push(b.value());
        beta.slopes.push(b.coeffs()[1]);
    }
    let beta_scale = beta.scale();
    if beta_scale == 0.0 {
        return Err(Error::ConstantCurve);
    }
    let ell_identically_zero = ell.scale() <= config.ell_zero_rel * beta_scale.max(1.0);

    let ell_zeros = if ell_identically_zero {
        Vec::new()
    } else {
        component_zeros(pair, false, &ell, domain, closed, config)?
    };
    let beta_zeros = component_zeros(pair, true, &beta, domain, closed, config)?;

    let mut zeros: Vec<ZeroPoint> = ell_zeros
        .iter()
        .map(|&(t, r)| ZeroPoint {
            t,
            kind: ZeroKind::Inflection,
            ord_ell: Some(r),
            ord_beta: None,
        })
        .collect();
    for (t, r) in beta_zeros {
        match zeros
            .iter_mut()
            .find(|z| z.kind == ZeroKind::Inflection && (z.t - t).abs() <= config.coincidence)
        {
            Some(z) => {
                z.kind = ZeroKind::Both;
                z.ord_beta = Some(r);
            }
            None => zeros.push(ZeroPoint {
                t,
                kind: ZeroKind::Singular,
                ord_ell: None,
                ord_beta: Some(r),
            }),
        }
    }
    zeros.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(Signature {
        domain: [domain.start, domain.end],
        closed,
        ell_identically_zero,
        zeros,
    })
}

pub fn signature(curve: &LegendreCurve, config: &SignatureConfig) -> Result<Signature> {
    signature_of_pair(&curve.curvature_pair(), curve.domain, curve.closed, config)
}

// ---------------------------------------------------------------------------
// Equivalence

/// How the zero lists of two signatures were matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matching {
    Identity,
    Reversal,
    CyclicShift(usize),
    CyclicShiftWithReversal(usize),
    None,
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Matching::Identity => write!(f, "identity"),
            Matching::Reversal => write!(f, "reversal"),
            Matching::CyclicShift(l) => write!(f, "cyclic-shift({l})"),
            Matching::CyclicShiftWithReversal(l) => write!(f, "cyclic-shift-with-reversal({l})"),
            Matching::None => write!(f, "none"),
        }
    }
}

impl Serialize for Matching {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Matching {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let shift = |prefix: &str| {
            text.strip_prefix(prefix)
                .and_then(|rest| rest.strip_suffix(')'))
                .and_then(|l| l.parse::<usize>().ok())
        };
        match text.as_str() {
            "identity" => Ok(Matching::Identity),
            "reversal" => Ok(Matching::Reversal),
            "none" => Ok(Matching::None),
            _ => {
                if let Some(l) = shift("cyclic-shift-with-reversal(") {
                    Ok(Matching::CyclicShiftWithReversal(l))
                } else if let Some(l) = shift("cyclic-shift(") {
                    Ok(Matching::CyclicShift(l))
                } else {
                    Err(serde::de::Error::custom(format!("unknown matching '{text}'")))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    pub matching: Matching,
    pub reason: String,
}

impl EquivalenceVerdict {
    fn no(reason: impl Into<String>) -> Self {
        EquivalenceVerdict {
            equivalent: false,
            matching: Matching::None,
            reason: reason.into(),
        }
    }

    fn yes(matching: Matching) -> Self {
        EquivalenceVerdict {
            equivalent: true,
            reason: format!("zero sequences match by {matching}"),
            matching,
        }
    }
}

/// Curvature equivalence decided from signatures: zero sequences must agree
/// in kind and contact orders up to reversal, and for closed curves also up
/// to a cyclic shift.
pub fn decide_equivalence(first: &Signature, second: &Signature) -> EquivalenceVerdict {
    if first.ell_identically_zero != second.ell_identically_zero {
        return EquivalenceVerdict::no("ell vanishes identically on only one curve");
    }
    if first.closed != second.closed {
        return EquivalenceVerdict::no("one curve is closed and the other is not");
    }
    if first.inflection_count() != second.inflection_count()
        || first.singular_count() != second.singular_count()
        || first.zeros.len() != second.zeros.len()
    {
        return EquivalenceVerdict::no("zero counts differ");
    }
    let a: Vec<_> = first.zeros.iter().map(ZeroPoint::key).collect();
    let b: Vec<_> = second.zeros.iter().map(ZeroPoint::key).collect();
    let reversed: Vec<_> = a.iter().rev().copied().collect();
    let n = a.len();
    let shifted = |seq: &[_], l: usize| (0..n).all(|k| seq[(k + l) % n] == b[k]);

    if a == b {
        return EquivalenceVerdict::yes(Matching::Identity);
    }
    if reversed == b {
        return EquivalenceVerdict::yes(Matching::Reversal);
    }
    if first.closed {
        for l in 1..n {
            if shifted(&a, l) {
                return EquivalenceVerdict::yes(Matching::CyclicShift(l));
            }
        }
        for l in 1..n {
            if shifted(&reversed, l) {
                return EquivalenceVerdict::yes(Matching::CyclicShiftWithReversal(l));
            }
        }
    }
    let i = (0..n).find(|&i| a[i] != b[i]).unwrap_or(0);
    let describe = |z: &ZeroPoint| {
        let ord = |o: Option<u32>| o.map_or("-".to_string(), |r| r.to_string());
        format!(
            "{:?} (ord_ell {}, ord_beta {})",
            z.kind,
            ord(z.ord_ell),
            ord(z.ord_beta)
        )
        .to_lowercase()
    };
    EquivalenceVerdict::no(format!(
        "zero point {} differs: {} vs {}",
        i + 1,
        describe(&first.zeros[i]),
        describe(&second.zeros[i])
    ))
}

// ---------------------------------------------------------------------------
// Parity

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityReport {
    pub ell_odd_count: usize,
    pub beta_odd_count: usize,
    pub ok: bool,
}

/// On a closed curve the number of odd-order zeros of `ℓ` (and of `β`) is even.
pub fn parity_check(sig: &Signature) -> Result<ParityReport> {
    if !sig.closed {
        return Err(Error::ParityRequiresClosed);
    }
    let odd = |o: Option<u32>| o.is_some_and(|r| r % 2 == 1);
    let ell_odd_count = sig.zeros.iter().filter(|z| odd(z.ord_ell)).count();
    let beta_odd_count = sig.zeros.iter().filter(|z| odd(z.ord_beta)).count();
    Ok(ParityReport {
        ell_odd_count,
        beta_odd_count,
        ok: ell_odd_count % 2 == 0 && beta_odd_count % 2 == 0,
    })
}

// ---------------------------------------------------------------------------
// Cofactors

/// A sampled nowhere-zero `λ` with `f = λ g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cofactor {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub min_abs: f64,
}

/// Jets are deflated within this relative distance of a shared zero.
const DEFLATE_RADIUS: f64 = 1e-3;

/// `λ = f/g` on a uniform grid; near a shared zero of order `r` both series
/// are divided by `(t - t0)^r` first, so `λ(t0) = f^(r)(t0) / g^(r)(t0)`.
pub fn cofactor(
    f: &Func,
    g: &Func,
    domain: Domain,
    shared_zeros: &[(f64, u32)],
    samples: usize,
) -> Result<Cofactor> {
    if samples < 2 {
        return Err(Error::TooFewSamples {
            min: 2,
            got: samples,
        });
    }
    let order = DEFAULT_ORDER;
    let mut deflated = Vec::with_capacity(shared_zeros.len());
    for &(t0, r) in shared_zeros {
        for (name, h) in [("f", f), ("g", g)] {
            match contact_order(h, t0, order) {
                Ok(ContactOrder::Finite(found)) if found == r => {}
                Ok(found) => {
                    return Err(Error::CofactorHypothesis(format!(
                        "{name} has contact order {found:?} at t = {t0}, expected {r}"
                    )))
                }
                Err(Error::NotAZero { .. }) => {
                    return Err(Error::CofactorHypothesis(format!(
                        "{name} does not vanish at t = {t0}"
                    )))
                }
                Err(other) => return Err(other),
            }
        }
        let shift = |jet: TaylorJet| TaylorJet::from_coeffs(&jet.coeffs()[r as usize..]);
        let fj = shift(f.jet(t0, order).at(t0)?);
        let gj = shift(g.jet(t0, order).at(t0)?);
        let ratio = fj.div_jet(&gj).map_err(EvalError::from).at(t0)?;
        deflated.push((t0, ratio));
    }

    let radius = DEFLATE_RADIUS * domain.length();
    let ts = domain.grid(samples);
    let mut values = Vec::with_capacity(ts.len());
    for &t in &ts {
        let near = deflated
            .iter()
            .filter(|(t0, _)| (t - t0).abs() <= radius)
            .min_by(|a, b| (t - a.0).abs().total_cmp(&(t - b.0).abs()));
        let lambda = match near {
            Some((t0, ratio)) => {
                let d = t - t0;
                ratio.coeffs().iter().rev().fold(0.0, |acc, c| acc * d + c)
            }
            None => {
                let gv = g.value(t).at(t)?;
                if gv == 0.0 {
                    return Err(Error::CofactorHypothesis(format!(
                        "g vanishes at t = {t}, which is not a listed zero"
                    )));
                }
                f.value(t).at(t)? / gv
            }
        };
        values.push(lambda);
    }
    let min_abs = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min_abs.is_nan() || min_abs <= 0.0 || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::CofactorHypothesis(
            "ratio vanishes or blows up; zero sets differ".to_string(),
        ));
    }
    Ok(Cofactor {
        ts,
        values,
        min_abs,
    })
}
