//! Legendre curves, their moving frame and curvature.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalAtExt, Result};
use crate::expr::{parse_expr, pretty_print, Arity, EvalError};
use crate::format;
use crate::func::{Func, JetFn};
use crate::taylor::TaylorJet;

pub type Vec2 = [f64; 2];

/// Tolerance of the Legendre condition and of `|ν| = 1`.
pub const LEGENDRE_TOL: f64 = 1e-9;
/// Grid size used by the Legendre check and by regularity checks.
pub const CHECK_SAMPLES: usize = 2048;
/// Relative tolerance of the endpoint comparison in [`check_closed`].
pub const CLOSED_TOL: f64 = 1e-8;
/// Below this speed a point counts as singular when deriving `ν`.
pub const MIN_SPEED: f64 = 1e-9;

/// A closed parameter interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub start: f64,
    pub end: f64,
}

impl Domain {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(Error::InvalidDomain { start, end });
        }
        Ok(Domain { start, end })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    /// The `i`-th of `intervals + 1` uniform grid points; both endpoints are exact.
    pub fn point(&self, i: usize, intervals: usize) -> f64 {
        if i == intervals {
            return self.end;
        }
        self.start + self.length() * (i as f64) / (intervals as f64)
    }

    /// `samples` uniform points including both endpoints.
    pub fn grid(&self, samples: usize) -> Vec<f64> {
        let intervals = samples.max(2) - 1;
        (0..=intervals).map(|i| self.point(i, intervals)).collect()
    }

    pub fn contains(&self, t: f64, tol: f64) -> bool {
        t >= self.start - tol && t <= self.end + tol
    }
}

/// `μ = J ν`, the anticlockwise quarter rotation.
pub fn moving_frame(nu: Vec2) -> Vec2 {
    [-nu[1], nu[0]]
}

/// Jets of `(γ, ν)` at one parameter value.
#[derive(Debug, Clone)]
pub struct FrameJets {
    pub x: TaylorJet,
    pub y: TaylorJet,
    pub nu_x: TaylorJet,
    pub nu_y: TaylorJet,
}

/// A plane curve `γ = (x, y)` with unit normal `ν = (nu_x, nu_y)`.
#[derive(Debug, Clone)]
pub struct LegendreCurve {
    pub x: Func,
    pub y: Func,
    pub nu_x: Func,
    pub nu_y: Func,
    pub domain: Domain,
    pub closed: bool,
    pub(crate) nu_derived: bool,
}

impl LegendreCurve {
    pub fn new(x: Func, y: Func, nu_x: Func, nu_y: Func, domain: Domain, closed: bool) -> Self {
        LegendreCurve {
            x,
            y,
            nu_x,
            nu_y,
            domain,
            closed,
            nu_derived: false,
        }
    }

    /// A regular curve with `ν = J(γ̇)/|γ̇|`, so that `β = -|γ̇| < 0`.
    pub fn with_derived_nu(x: Func, y: Func, domain: Domain, closed: bool) -> Result<Self> {
        let (nu_x, nu_y) = derive_nu(&x, &y, domain)?;
        Ok(LegendreCurve {
            x,
            y,
            nu_x,
            nu_y,
            domain,
            closed,
            nu_derived: true,
        })
    }

    pub fn nu_is_derived(&self) -> bool {
        self.nu_derived
    }

    /// Copy with different components; `ν` counts as supplied from now on.
    pub fn with_components(&self, x: Func, y: Func, nu_x: Func, nu_y: Func) -> Self {
        LegendreCurve::new(x, y, nu_x, nu_y, self.domain, self.closed)
    }

    pub fn frame_jets(&self, t: f64, order: usize) -> Result<FrameJets, EvalError> {
        Ok(FrameJets {
            x: self.x.jet(t, order)?,
            y: self.y.jet(t, order)?,
            nu_x: self.nu_x.jet(t, order)?,
            nu_y: self.nu_y.jet(t, order)?,
        })
    }

    pub fn point(&self, t: f64) -> Result<(Vec2, Vec2)> {
        let j = self.frame_jets(t, 0).at(t)?;
        Ok(([j.x.value(), j.y.value()], [j.nu_x.value(), j.nu_y.value()]))
    }

    /// Jets of `(ℓ, β) = (ν̇·μ, γ̇·μ)` of the given order.
    pub fn curvature_jets(&self, t: f64, order: usize) -> Result<(TaylorJet, TaylorJet), EvalError> {
        let j = self.frame_jets(t, order + 1)?;
        let nx = j.nu_x.truncate(order);
        let ny = j.nu_y.truncate(order);
        let dnx = j.nu_x.differentiate();
        let dny = j.nu_y.differentiate();
        let dx = j.x.differentiate();
        let dy = j.y.differentiate();
        let ell = &(&dny * &nx) - &(&dnx * &ny);
        let beta = &(&dy * &nx) - &(&dx * &ny);
        Ok((ell, beta))
    }

    /// The curvature pair `(ℓ(t), β(t))`.
    pub fn curvature(&self, t: f64) -> Result<(f64, f64)> {
        let (ell, beta) = self.curvature_jets(t, 0).at(t)?;
        Ok((ell.value(), beta.value()))
    }

    pub fn curvature_pair(&self) -> CurvaturePair {
        CurvaturePair {
            ell: Func::opaque(CurvatureComponent {
                curve: self.clone(),
                beta: false,
            }),
            beta: Func::opaque(CurvatureComponent {
                curve: self.clone(),
                beta: true,
            }),
            curve: Some(self.clone()),
        }
    }

    /// Spec-file form, available when every component is an expression.
    pub fn to_spec(&self) -> Option<CurveSpec> {
        let nu = if self.nu_derived {
            None
        } else {
            Some([
                pretty_print(&self.nu_x.to_expr()?),
                pretty_print(&self.nu_y.to_expr()?),
            ])
        };
        Some(CurveSpec {
            x: pretty_print(&self.x.to_expr()?),
            y: pretty_print(&self.y.to_expr()?),
            nu,
            domain: [self.domain.start, self.domain.end],
            closed: self.closed,
            params: BTreeMap::new(),
        })
    }
}

#[derive(Debug)]
struct CurvatureComponent {
    curve: LegendreCurve,
    beta: bool,
}

impl JetFn for CurvatureComponent {
    fn jet(&self, t0: f64, order: usize) -> Result<TaylorJet, EvalError> {
        let (ell, beta) = self.curve.curvature_jets(t0, order)?;
        Ok(if self.beta { beta } else { ell })
    }
}

/// An evaluable curvature pair `(ℓ, β)`, from a curve or given directly.
#[derive(Debug, Clone)]
pub struct CurvaturePair {
    pub ell: Func,
    pub beta: Func,
    curve: Option<LegendreCurve>,
}

impl CurvaturePair {
    pub fn new(ell: Func, beta: Func) -> Self {
        CurvaturePair {
            ell,
            beta,
            curve: None,
        }
    }

    /// Jets of both components; shares one frame evaluation when curve-backed.
    pub fn jets(&self, t: f64, order: usize) -> Result<(TaylorJet, TaylorJet), EvalError> {
        match &self.curve {
            Some(curve) => curve.curvature_jets(t, order),
            None => Ok((self.ell.jet(t, order)?, self.beta.jet(t, order)?)),
        }
    }

    pub fn at(&self, t: f64) -> Result<(f64, f64)> {
        let (ell, beta) = self.jets(t, 0).at(t)?;
        Ok((ell.value(), beta.value()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegendreReport {
    pub ok: bool,
    /// `max |γ̇ · ν|` over the grid.
    pub max_defect: f64,
    /// `max ||ν| - 1|` over the grid.
    pub max_norm_defect: f64,
}

/// Checks `γ̇·ν = 0` and `|ν| = 1` on a uniform grid.
pub fn check_legendre(curve: &LegendreCurve, samples: usize, tol: f64) -> Result<LegendreReport> {
    if samples < 2 {
        return Err(Error::TooFewSamples {
            min: 2,
            got: samples,
        });
    }
    let mut max_defect = 0.0_f64;
    let mut max_norm_defect = 0.0_f64;
    for t in curve.domain.grid(samples) {
        let j = curve.frame_jets(t, 1).at(t)?;
        let (a, b) = (j.nu_x.value(), j.nu_y.value());
        let defect = (j.x.coeffs()[1] * a + j.y.coeffs()[1] * b).abs();
        let norm_defect = (a.hypot(b) - 1.0).abs();
        max_defect = max_defect.max(defect);
        max_norm_defect = max_norm_defect.max(norm_defect);
    }
    Ok(LegendreReport {
        ok: max_defect <= tol && max_norm_defect <= tol,
        max_defect,
        max_norm_defect,
    })
}

#[derive(Debug)]
struct DerivedNormal {
    x: Func,
    y: Func,
    second: bool,
}

impl JetFn for DerivedNormal {
    fn jet(&self, t0: f64, order: usize) -> Result<TaylorJet, EvalError> {
        let dx = self.x.jet(t0, order + 1)?.differentiate();
        let dy = self.y.jet(t0, order + 1)?.differentiate();
        let speed = (&(&dx * &dx) + &(&dy * &dy)).sqrt()?;
        Ok(if self.second {
            dx.div_jet(&speed)?
        } else {
            (-&dy).div_jet(&speed)?
        })
    }
}

/// `ν = J(γ̇)/|γ̇|` for a regular curve, verified on a grid.
pub fn derive_nu(x: &Func, y: &Func, domain: Domain) -> Result<(Func, Func)> {
    let speed = |t: f64| -> Result<f64> {
        let dx = x.jet(t, 1).at(t)?.coeffs()[1];
        let dy = y.jet(t, 1).at(t)?.coeffs()[1];
        Ok(dx.hypot(dy))
    };
    let (minima, _) = refined_minima(&speed, domain, CHECK_SAMPLES)?;
    if let Some(&(t, _)) = minima.iter().find(|(_, v)| *v < MIN_SPEED) {
        return Err(Error::SingularPoint { t });
    }
    let make = |second| {
        Func::opaque(DerivedNormal {
            x: x.clone(),
            y: y.clone(),
            second,
        })
    };
    Ok((make(false), make(true)))
}

/// Local minima of a non-negative function on a uniform grid, each refined by
/// golden-section search over its two neighbouring intervals, together with
/// the largest grid value. Plateaus are skipped.
pub(crate) fn refined_minima(
    h: &impl Fn(f64) -> Result<f64>,
    domain: Domain,
    samples: usize,
) -> Result<(Vec<(f64, f64)>, f64)> {
    let ts = domain.grid(samples.max(3));
    let hs = ts.iter().map(|&t| h(t)).collect::<Result<Vec<_>>>()?;
    let scale = hs.iter().fold(0.0_f64, |m, v| m.max(*v));
    let n = ts.len();
    let mut out: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let left = if i > 0 { hs[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < n { hs[i + 1] } else { f64::INFINITY };
        let is_min = hs[i] <= left && hs[i] <= right && (hs[i] < left || hs[i] < right);
        if !is_min && hs[i] != 0.0 {
            continue;
        }
        let lo = ts[i.saturating_sub(1)];
        let hi = ts[(i + 1).min(n - 1)];
        let found = golden_minimum(h, lo, hi, ts[i], hs[i])?;
        if out.last().is_none_or(|(t, _)| found.0 - t > 1e-6) {
            out.push(found);
        }
    }
    Ok((out, scale))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImmersionReport {
    pub ok: bool,
    /// Parameters where `ℓ` and `β` vanish together.
    pub witnesses: Vec<f64>,
}

/// Relative level below which `max(|ℓ|, |β|)` counts as vanishing.
const IMMERSION_TOL: f64 = 1e-8;

/// `(γ, ν)` is an immersion iff `(ℓ, β)` never vanishes simultaneously.
pub fn is_immersion(curve: &LegendreCurve, samples: usize) -> Result<ImmersionReport> {
    let pair = curve.curvature_pair();
    let height = |t: f64| -> Result<f64> {
        let (l, b) = pair.at(t)?;
        Ok(l.abs().max(b.abs()))
    };
    let (minima, scale) = refined_minima(&height, curve.domain, samples)?;
    if scale == 0.0 {
        return Ok(ImmersionReport {
            ok: false,
            witnesses: vec![curve.domain.start],
        });
    }
    let witnesses: Vec<f64> = minima
        .into_iter()
        .filter(|(_, v)| *v <= IMMERSION_TOL * scale)
        .map(|(t, _)| t)
        .collect();
    Ok(ImmersionReport {
        ok: witnesses.is_empty(),
        witnesses,
    })
}

fn golden_minimum(
    f: &impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    t_seed: f64,
    h_seed: f64,
) -> Result<(f64, f64)> {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut best_t, mut best_h) = (t_seed, h_seed);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..100 {
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d)?;
        }
        for (t, h) in [(c, fc), (d, fd)] {
            if h < best_h {
                best_t = t;
                best_h = h;
            }
        }
    }
    Ok((best_t, best_h))
}

/// Outcome of the endpoint comparison of derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClosedReport {
    /// Largest `n` such that derivatives of order `0..=n` agree; `None` if not even `C^0`.
    pub closed_order: Option<usize>,
    pub max_order: usize,
}

impl ClosedReport {
    /// Every checked order agrees at the endpoints.
    pub fn closed_to_checked_order(&self) -> bool {
        self.closed_order == Some(self.max_order)
    }
}

/// Compares one-sided derivatives of `(γ, ν)` at both endpoints up to `max_order`.
pub fn check_closed(curve: &LegendreCurve, max_order: usize) -> Result<ClosedReport> {
    let (a, b) = (curve.domain.start, curve.domain.end);
    let ja = curve.frame_jets(a, max_order).at(a)?;
    let jb = curve.frame_jets(b, max_order).at(b)?;
    let pairs = [
        (&ja.x, &jb.x),
        (&ja.y, &jb.y),
        (&ja.nu_x, &jb.nu_x),
        (&ja.nu_y, &jb.nu_y),
    ];
    let mut closed_order = None;
    for k in 0..=max_order {
        let agree = pairs.iter().all(|(p, q)| {
            let (da, db) = (p.derivative(k).unwrap(), q.derivative(k).unwrap());
            (da - db).abs() <= CLOSED_TOL * da.abs().max(db.abs()).max(1.0)
        });
        if !agree {
            break;
        }
        closed_order = Some(k);
    }
    Ok(ClosedReport {
        closed_order,
        max_order,
    })
}

// ---------------------------------------------------------------------------
// Spec files

/// Text form of a curve; parameters are substituted before parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub x: String,
    pub y: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<[String; 2]>,
    pub domain: [f64; 2],
    #[serde(default)]
    pub closed: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

const RESERVED: [&str; 9] = ["t", "x", "y", "pi", "sin", "cos", "exp", "sqrt", "atan"];

/// Replaces whole identifiers named in `params` by their numeric values.
pub fn substitute_params(text: &str, params: &BTreeMap<String, f64>) -> Result<String> {
    for (name, value) in params {
        if RESERVED.contains(&name.as_str()) {
            return Err(Error::InvalidSpec(format!(
                "parameter name '{name}' is reserved"
            )));
        }
        if !value.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "parameter '{name}' is not finite"
            )));
        }
    }
    let mut out = String::with_capacity(text.len());
    let mut chars = text.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = start + c.len_utf8();
            while let Some(&(i, d)) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    end = i + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let ident = &text[start..end];
            match params.get(ident) {
                Some(v) if *v < 0.0 => out.push_str(&format!("({})", format::plain(*v))),
                Some(v) => out.push_str(&format::plain(*v)),
                None => out.push_str(ident),
            }
        } else if c.is_ascii_digit() || c == '.' {
            // Keep number literals (including exponents such as 1e5) intact.
            out.push(c);
            while let Some(&(_, d)) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '.' {
                    out.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

impl CurveSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve specs always serialize")
    }

    pub fn parse_component(&self, text: &str) -> Result<Func> {
        let substituted = substitute_params(text, &self.params)?;
        Ok(parse_expr(&substituted, Arity::OneVar)?.into())
    }

    pub fn to_curve(&self) -> Result<LegendreCurve> {
        let domain = Domain::new(self.domain[0], self.domain[1])?;
        let x = self.parse_component(&self.x)?;
        let y = self.parse_component(&self.y)?;
        match &self.nu {
            Some([nx, ny]) => {
                let nu_x = self.parse_component(nx)?;
                let nu_y = self.parse_component(ny)?;
                Ok(LegendreCurve::new(x, y, nu_x, nu_y, domain, self.closed))
            }
            None => LegendreCurve::with_derived_nu(x, y, domain, self.closed),
        }
    }
}
