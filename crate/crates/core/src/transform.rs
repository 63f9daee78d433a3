//! Curvature transformation laws.
//!
//! Each transform produces the transformed curve, so its curvature can be
//! recomputed from the frame, and a `*_law` function that predicts the new
//! curvature from the old one.

use serde::Serialize;

use crate::error::{Error, EvalAtExt, Result};
use crate::expr::{parse_expr, Algebra, Arity, Env, EvalError, Expr, Var};
use crate::func::{Func, JetFn};
use crate::legendre::{refined_minima, Domain, LegendreCurve, Vec2, CHECK_SAMPLES};
use crate::taylor::{JetError, TaylorJet};

/// Below this `|t'|` a parameter change is rejected.
const MIN_DERIVATIVE: f64 = 1e-12;
/// Below this `|det|` (or `|ν̄|`) a target map counts as degenerate.
const MIN_JACOBIAN: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Parameter change

/// `(γ∘t, ν∘t)` for a parameter change `u ↦ t(u)` on `new_domain`.
pub fn reparametrize(curve: &LegendreCurve, t_of_u: &Expr, new_domain: Domain) -> Result<LegendreCurve> {
    let t_func: Func = t_of_u.clone().into();
    let dom = curve.domain;
    let slack = 1e-12 * dom.length().max(dom.start.abs()).max(dom.end.abs());
    let mut sign = 0.0_f64;
    for u in new_domain.grid(CHECK_SAMPLES) {
        let jet = t_func.jet(u, 1).at(u)?;
        let (t, dt) = (jet.value(), jet.coeffs()[1]);
        if !dom.contains(t, slack) {
            return Err(Error::OutsideDomain { u, t });
        }
        if dt.abs() < MIN_DERIVATIVE || dt.signum() * sign < 0.0 {
            return Err(Error::NotParameterChange { u });
        }
        sign = dt.signum();
    }
    // t' may touch zero between grid points without changing sign.
    let speed = |u: f64| -> Result<f64> { Ok(t_func.jet(u, 1).at(u)?.coeffs()[1].abs()) };
    let (minima, _) = refined_minima(&speed, new_domain, CHECK_SAMPLES)?;
    if let Some(&(u, _)) = minima.iter().find(|(_, v)| *v < MIN_DERIVATIVE) {
        return Err(Error::NotParameterChange { u });
    }
    let t_start = t_func.value(new_domain.start).at(new_domain.start)?;
    let t_end = t_func.value(new_domain.end).at(new_domain.end)?;
    let hits = |t: f64, target: f64| (t - target).abs() <= slack;
    let covers = (hits(t_start, dom.start) && hits(t_end, dom.end))
        || (hits(t_start, dom.end) && hits(t_end, dom.start));

    let mut out = LegendreCurve::new(
        curve.x.compose(&t_func),
        curve.y.compose(&t_func),
        curve.nu_x.compose(&t_func),
        curve.nu_y.compose(&t_func),
        new_domain,
        curve.closed && covers,
    );
    // ν = Jγ̇/|γ̇| survives an orientation-preserving change of parameter.
    out.nu_derived = curve.nu_derived && sign > 0.0;
    Ok(out)
}

/// `((ℓ∘t) t', (β∘t) t')` at `u`.
pub fn reparam_law(curve: &LegendreCurve, t_of_u: &Expr, u: f64) -> Result<(f64, f64)> {
    let jet = t_of_u.eval_jet(u, 1).at(u)?;
    let (t, dt) = (jet.value(), jet.coeffs()[1]);
    let (ell, beta) = curve.curvature(t)?;
    Ok((ell * dt, beta * dt))
}

// ---------------------------------------------------------------------------
// Affine maps

/// The linear map `(x, y) ↦ (a11 x + a12 y, a21 x + a22 y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineMap {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl AffineMap {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Result<Self> {
        let map = AffineMap { a11, a12, a21, a22 };
        let det = map.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularAffine { det });
        }
        Ok(map)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        [
            self.a11 * p[0] + self.a12 * p[1],
            self.a21 * p[0] + self.a22 * p[1],
        ]
    }

    /// `ν̄ = (a22 a - a21 b, -a12 a + a11 b)` for `ν = (a, b)`.
    pub fn nu_bar(&self, nu: Vec2) -> Vec2 {
        [
            self.a22 * nu[0] - self.a21 * nu[1],
            -self.a12 * nu[0] + self.a11 * nu[1],
        ]
    }
}

fn linear_template(p: f64, q: f64) -> Expr {
    Expr::num(p) * Expr::x() + Expr::num(q) * Expr::y()
}

/// `(Φ∘γ, ν̄/|ν̄|)` for a linear map `Φ`.
pub fn pushforward_affine(curve: &LegendreCurve, map: &AffineMap) -> LegendreCurve {
    let x = Func::apply(linear_template(map.a11, map.a12), &curve.x, &curve.y);
    let y = Func::apply(linear_template(map.a21, map.a22), &curve.x, &curve.y);
    let bar_x = linear_template(map.a22, -map.a21);
    let bar_y = linear_template(-map.a12, map.a11);
    let norm = (bar_x.clone().powi(2) + bar_y.clone().powi(2)).sqrt();
    let nu_x = Func::apply(bar_x / norm.clone(), &curve.nu_x, &curve.nu_y);
    let nu_y = Func::apply(bar_y / norm, &curve.nu_x, &curve.nu_y);
    curve.with_components(x, y, nu_x, nu_y)
}

/// `(det ℓ / |ν̄|², |ν̄| β)` at `t`.
pub fn affine_law(curve: &LegendreCurve, map: &AffineMap, t: f64) -> Result<(f64, f64)> {
    let (_, nu) = curve.point(t)?;
    let (ell, beta) = curve.curvature(t)?;
    let bar = map.nu_bar(nu);
    let n2 = bar[0] * bar[0] + bar[1] * bar[1];
    Ok((map.det() * ell / n2, n2.sqrt() * beta))
}

/// `((y, x)∘γ, (-b, -a))`.
pub fn pushforward_swap(curve: &LegendreCurve) -> LegendreCurve {
    curve.with_components(
        curve.y.clone(),
        curve.x.clone(),
        curve.nu_y.neg(),
        curve.nu_x.neg(),
    )
}

pub fn swap_law(curve: &LegendreCurve, t: f64) -> Result<(f64, f64)> {
    let (ell, beta) = curve.curvature(t)?;
    Ok((-ell, beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Negate {
    Nu,
    Gamma,
}

/// `(γ, -ν)` or `(-γ, ν)`; both have curvature `(ℓ, -β)`.
pub fn negate(curve: &LegendreCurve, which: Negate) -> LegendreCurve {
    match which {
        Negate::Nu => curve.with_components(
            curve.x.clone(),
            curve.y.clone(),
            curve.nu_x.neg(),
            curve.nu_y.neg(),
        ),
        Negate::Gamma => curve.with_components(
            curve.x.neg(),
            curve.y.neg(),
            curve.nu_x.clone(),
            curve.nu_y.clone(),
        ),
    }
}

pub fn negate_law(curve: &LegendreCurve, t: f64) -> Result<(f64, f64)> {
    let (ell, beta) = curve.curvature(t)?;
    Ok((ell, -beta))
}

// ---------------------------------------------------------------------------
// Diffeomorphisms of the target

/// A target map `Φ = (φ1, φ2)` written in `x` and `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffeoSpec {
    pub phi1: Expr,
    pub phi2: Expr,
}

impl DiffeoSpec {
    pub fn new(phi1: Expr, phi2: Expr) -> Self {
        DiffeoSpec { phi1, phi2 }
    }

    /// Parses `"φ1;φ2"`.
    pub fn parse(text: &str) -> Result<Self> {
        let (p1, p2) = text.split_once(';').ok_or_else(|| {
            Error::InvalidSpec("diffeomorphism must be given as 'phi1;phi2'".to_string())
        })?;
        Ok(DiffeoSpec {
            phi1: parse_expr(p1, Arity::TwoVar)?,
            phi2: parse_expr(p2, Arity::TwoVar)?,
        })
    }

    pub fn affine(map: &AffineMap) -> Self {
        DiffeoSpec {
            phi1: linear_template(map.a11, map.a12),
            phi2: linear_template(map.a21, map.a22),
        }
    }
}

/// Transformed frame and curvature at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffeoSample {
    pub t: f64,
    pub gamma: Vec2,
    pub nu: Vec2,
    pub ell: f64,
    pub beta: f64,
}

/// Evaluates the second-order transformation law of `(ℓ, β)` under `Φ`
/// at `t`, using the partial derivatives of `Φ` at `γ(t)`.
pub fn pushforward_diffeo(curve: &LegendreCurve, diffeo: &DiffeoSpec, t: f64) -> Result<DiffeoSample> {
    let ([x, y], [a, b]) = curve.point(t)?;
    let (ell, beta) = curve.curvature(t)?;
    let p1 = diffeo.phi1.eval_bijet(x, y).at(t)?;
    let p2 = diffeo.phi2.eval_bijet(x, y).at(t)?;
    let [p1x, p1y] = p1.grad;
    let [p2x, p2y] = p2.grad;
    let [p1xx, p1xy, p1yy] = p1.hess;
    let [p2xx, p2xy, p2yy] = p2.hess;

    let det = p1x * p2y - p2x * p1y;
    let bar = [p2y * a - p2x * b, -p1y * a + p1x * b];
    let n2 = bar[0] * bar[0] + bar[1] * bar[1];
    let norm = n2.sqrt();
    if det.abs() < MIN_JACOBIAN || norm < MIN_JACOBIAN {
        return Err(Error::DegenerateDiffeo { t });
    }
    let second2 = p2xx * b * b - 2.0 * p2xy * a * b + p2yy * a * a;
    let second1 = p1xx * b * b - 2.0 * p1xy * a * b + p1yy * a * a;
    let bracket = second2 * (-p1x * b + p1y * a) - second1 * (-p2x * b + p2y * a);
    Ok(DiffeoSample {
        t,
        gamma: [p1.value, p2.value],
        nu: [bar[0] / norm, bar[1] / norm],
        ell: (bracket * beta + det * ell) / n2,
        beta: norm * beta,
    })
}

/// A jet in `t` together with its partial derivatives in `x` and `y`.
#[derive(Debug, Clone)]
struct JetGrad {
    v: TaylorJet,
    dx: TaylorJet,
    dy: TaylorJet,
}

impl JetGrad {
    /// Chain rule with `f'(v)` given as a jet.
    fn chain(&self, v: TaylorJet, df: &TaylorJet) -> Self {
        JetGrad {
            v,
            dx: df * &self.dx,
            dy: df * &self.dy,
        }
    }
}

impl Algebra for JetGrad {
    fn add(&self, o: &Self) -> Self {
        JetGrad {
            v: &self.v + &o.v,
            dx: &self.dx + &o.dx,
            dy: &self.dy + &o.dy,
        }
    }
    fn sub(&self, o: &Self) -> Self {
        JetGrad {
            v: &self.v - &o.v,
            dx: &self.dx - &o.dx,
            dy: &self.dy - &o.dy,
        }
    }
    fn mul(&self, o: &Self) -> Self {
        JetGrad {
            v: &self.v * &o.v,
            dx: &(&self.dx * &o.v) + &(&self.v * &o.dx),
            dy: &(&self.dy * &o.v) + &(&self.v * &o.dy),
        }
    }
    fn div(&self, o: &Self) -> Result<Self, JetError> {
        let q = self.v.div_jet(&o.v)?;
        let o2 = &o.v * &o.v;
        let part = |d: &TaylorJet, od: &TaylorJet| (&(d * &o.v) - &(&self.v * od)).div_jet(&o2);
        Ok(JetGrad {
            dx: part(&self.dx, &o.dx)?,
            dy: part(&self.dy, &o.dy)?,
            v: q,
        })
    }
    fn neg(&self) -> Self {
        JetGrad {
            v: -&self.v,
            dx: -&self.dx,
            dy: -&self.dy,
        }
    }
    fn powi(&self, n: u32) -> Self {
        if n == 0 {
            let zero = self.v.scale(0.0);
            return JetGrad {
                v: zero.add_scalar(1.0),
                dx: zero.clone(),
                dy: zero,
            };
        }
        let df = self.v.powi(n - 1).scale(n as f64);
        self.chain(self.v.powi(n), &df)
    }
    fn sin(&self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, &c)
    }
    fn cos(&self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, &-&s)
    }
    fn exp(&self) -> Self {
        let e = self.v.exp();
        self.chain(e.clone(), &e)
    }
    fn sqrt(&self) -> Result<Self, JetError> {
        let s = self.v.sqrt()?;
        let one = s.scale(0.0).add_scalar(1.0);
        let df = one.div_jet(&s.scale(2.0))?;
        Ok(self.chain(s, &df))
    }
    fn atan(&self) -> Self {
        let denom = (&self.v * &self.v).add_scalar(1.0);
        let one = denom.scale(0.0).add_scalar(1.0);
        let df = one
            .div_jet(&denom)
            .expect("1 + v^2 never vanishes");
        self.chain(self.v.atan(), &df)
    }
}

struct JetGradEnv {
    order: usize,
    x: TaylorJet,
    y: TaylorJet,
}

impl Env<JetGrad> for JetGradEnv {
    fn var(&self, v: Var) -> Result<JetGrad, EvalError> {
        let zero = TaylorJet::constant(0.0, self.order);
        let one = TaylorJet::constant(1.0, self.order);
        match v {
            Var::X => Ok(JetGrad {
                v: self.x.clone(),
                dx: one,
                dy: zero,
            }),
            Var::Y => Ok(JetGrad {
                v: self.y.clone(),
                dx: zero,
                dy: one,
            }),
            Var::T => Err(EvalError::Unbound(Var::T)),
        }
    }
    fn constant(&self, c: f64) -> JetGrad {
        let zero = TaylorJet::constant(0.0, self.order);
        JetGrad {
            v: TaylorJet::constant(c, self.order),
            dx: zero.clone(),
            dy: zero,
        }
    }
}

/// `ν̄/|ν̄|` along the curve, with the partials of `Φ` taken as jets in `t`.
#[derive(Debug)]
struct DiffeoNormal {
    curve: LegendreCurve,
    diffeo: DiffeoSpec,
    second: bool,
}

impl JetFn for DiffeoNormal {
    fn jet(&self, t0: f64, order: usize) -> Result<TaylorJet, EvalError> {
        let j = self.curve.frame_jets(t0, order)?;
        let env = JetGradEnv {
            order,
            x: j.x,
            y: j.y,
        };
        let p1 = self.diffeo.phi1.evaluate(&env)?;
        let p2 = self.diffeo.phi2.evaluate(&env)?;
        let (a, b) = (&j.nu_x, &j.nu_y);
        let bar_x = &(&p2.dy * a) - &(&p2.dx * b);
        let bar_y = &(&p1.dx * b) - &(&p1.dy * a);
        let norm = (&(&bar_x * &bar_x) + &(&bar_y * &bar_y)).sqrt()?;
        let num = if self.second { bar_y } else { bar_x };
        Ok(num.div_jet(&norm)?)
    }
}

/// `(Φ∘γ, ν̄/|ν̄|)` as a curve, so its curvature can be recomputed from the frame.
pub fn diffeo_curve(curve: &LegendreCurve, diffeo: &DiffeoSpec) -> Result<LegendreCurve> {
    for t in curve.domain.grid(CHECK_SAMPLES) {
        let ([x, y], _) = curve.point(t)?;
        let p1 = diffeo.phi1.eval_bijet(x, y).at(t)?;
        let p2 = diffeo.phi2.eval_bijet(x, y).at(t)?;
        let det = p1.grad[0] * p2.grad[1] - p2.grad[0] * p1.grad[1];
        if det.abs() < MIN_JACOBIAN {
            return Err(Error::DegenerateDiffeo { t });
        }
    }
    let normal = |second| {
        Func::opaque(DiffeoNormal {
            curve: curve.clone(),
            diffeo: diffeo.clone(),
            second,
        })
    };
    Ok(curve.with_components(
        Func::apply(diffeo.phi1.clone(), &curve.x, &curve.y),
        Func::apply(diffeo.phi2.clone(), &curve.x, &curve.y),
        normal(false),
        normal(true),
    ))
}
