//! Germs of type `(n, m)` and their local normal forms.
//!
//! A germ `γ = (±tⁿ, t^m f(t))` with `f(0) ≠ 0` falls into one of four cases
//! according to how `n` compares with `m`. Each case has a representative
//! curve and a representative curvature class `(t^i, t^j)`, recorded here as
//! a pair of contact orders with `0` meaning "does not vanish".

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::legendre::{Domain, LegendreCurve};
use crate::signature::{signature, SignatureConfig};

/// Largest `n`, `m`, `p` accepted; keeps contact orders inside the default jet order.
pub const MAX_EXPONENT: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GermCase {
    /// `n < m`.
    BelowDiagonal,
    /// `n = m`, `y = c x`.
    DiagonalPlain,
    /// `n = m`, `y = (c + g) x` with `g` of order `p`.
    DiagonalPerturbed,
    /// `n > m`.
    AboveDiagonal,
}

impl fmt::Display for GermCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GermCase::BelowDiagonal => "1",
            GermCase::DiagonalPlain => "2i",
            GermCase::DiagonalPerturbed => "2ii",
            GermCase::AboveDiagonal => "3",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GermData {
    pub case: GermCase,
    pub n: u32,
    pub m: u32,
    pub p: Option<u32>,
    pub sign: i8,
    pub f: Option<Expr>,
    pub c: f64,
}

impl GermData {
    fn base(case: GermCase, n: u32, m: u32, p: Option<u32>) -> Self {
        GermData {
            case,
            n,
            m,
            p,
            sign: 1,
            f: None,
            c: 1.0,
        }
    }

    pub fn below_diagonal(n: u32, m: u32) -> Result<Self> {
        GermData::base(GermCase::BelowDiagonal, n, m, None).validated()
    }

    pub fn diagonal_plain(n: u32) -> Result<Self> {
        GermData::base(GermCase::DiagonalPlain, n, n, None).validated()
    }

    pub fn diagonal_perturbed(n: u32, p: u32) -> Result<Self> {
        GermData::base(GermCase::DiagonalPerturbed, n, n, Some(p)).validated()
    }

    pub fn above_diagonal(n: u32, m: u32) -> Result<Self> {
        GermData::base(GermCase::AboveDiagonal, n, m, None).validated()
    }

    /// Parses the case labels `1`, `2i`, `2ii`, `3`.
    pub fn from_case(case: &str, n: u32, m: Option<u32>, p: Option<u32>) -> Result<Self> {
        let need = |v: Option<u32>, name: &str| {
            v.ok_or_else(|| Error::InvalidGerm(format!("case {case} needs --{name}")))
        };
        match case {
            "1" => GermData::below_diagonal(n, need(m, "m")?),
            "2i" => GermData::diagonal_plain(n),
            "2ii" => GermData::diagonal_perturbed(n, need(p, "p")?),
            "3" => GermData::above_diagonal(n, need(m, "m")?),
            other => Err(Error::InvalidGerm(format!(
                "unknown case '{other}' (expected 1, 2i, 2ii or 3)"
            ))),
        }
    }

    pub fn with_sign(mut self, sign: i8) -> Result<Self> {
        self.sign = sign;
        self.validated()
    }

    pub fn with_f(mut self, f: Expr) -> Result<Self> {
        self.f = Some(f);
        self.validated()
    }

    pub fn with_c(mut self, c: f64) -> Result<Self> {
        self.c = c;
        self.validated()
    }

    /// `|m - n|`.
    pub fn k(&self) -> u32 {
        self.n.abs_diff(self.m)
    }

    fn validated(self) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidGerm(msg));
        for (name, v) in [("n", Some(self.n)), ("m", Some(self.m)), ("p", self.p)] {
            if let Some(v) = v {
                if v == 0 || v > MAX_EXPONENT {
                    return bad(format!("{name} = {v} outside 1..={MAX_EXPONENT}"));
                }
            }
        }
        let consistent = match self.case {
            GermCase::BelowDiagonal => self.n < self.m,
            GermCase::DiagonalPlain => self.n == self.m,
            GermCase::DiagonalPerturbed => self.n == self.m && self.p.is_some(),
            GermCase::AboveDiagonal => self.n > self.m,
        };
        if !consistent {
            return bad(format!(
                "n = {}, m = {} does not fit case {}",
                self.n, self.m, self.case
            ));
        }
        if self.sign != 1 && self.sign != -1 {
            return bad(format!("sign must be 1 or -1, got {}", self.sign));
        }
        if self.c == 0.0 || !self.c.is_finite() {
            return bad("c must be a nonzero number".to_string());
        }
        if let Some(f) = &self.f {
            check_f(f)?;
        }
        Ok(self)
    }

    fn f_or_one(&self) -> Expr {
        self.f.clone().unwrap_or(Expr::Number(1.0))
    }
}

fn check_f(f: &Expr) -> Result<()> {
    match f.eval(0.0) {
        Ok(v) if v != 0.0 && v.is_finite() => Ok(()),
        _ => Err(Error::FVanishesAtZero),
    }
}

fn germ_domain() -> Domain {
    Domain::new(-1.0, 1.0).expect("fixed germ domain")
}

fn tp(k: u32) -> Expr {
    Expr::t().powi(k)
}

fn n(v: u32) -> Expr {
    Expr::Number(v as f64)
}

fn signed(sign: i8, e: Expr) -> Expr {
    if sign < 0 {
        -e
    } else {
        e
    }
}

/// `(a, b)/√(a² + b²)` as two expressions.
fn unit(a: Expr, b: Expr) -> (Expr, Expr) {
    let norm = (a.clone().powi(2) + b.clone().powi(2)).sqrt();
    (a / norm.clone(), b / norm)
}

fn curve(x: Expr, y: Expr, (nx, ny): (Expr, Expr)) -> LegendreCurve {
    LegendreCurve::new(
        x.into(),
        y.into(),
        nx.into(),
        ny.into(),
        germ_domain(),
        false,
    )
}

/// `γ = (±tⁿ, t^m f)` with `ν = (-m t^k f - t^{k+1} ḟ, ±n)/√(…)`, `k = m - n`.
pub fn type_nm_curve(n_: u32, m: u32, f: &Expr, sign: i8) -> Result<LegendreCurve> {
    if n_ == 0 || n_ >= m {
        return Err(Error::InvalidGerm(format!(
            "type (n, m) needs 0 < n < m, got ({n_}, {m})"
        )));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidGerm(format!("sign must be 1 or -1, got {sign}")));
    }
    check_f(f)?;
    let k = m - n_;
    let df = f.derivative();
    let a = -(n(m) * tp(k) * f.clone() + tp(k + 1) * df);
    let b = signed(sign, n(n_));
    Ok(curve(
        signed(sign, tp(n_)),
        tp(m) * f.clone(),
        unit(a, b),
    ))
}

/// Representative curve of the germ's case on `[-1, 1]`.
pub fn local_normal_form(germ: &GermData) -> Result<LegendreCurve> {
    let germ = germ.clone().validated()?;
    let (n_, m) = (germ.n, germ.m);
    let k = germ.k();
    Ok(match germ.case {
        GermCase::BelowDiagonal => curve(tp(n_), tp(m), unit(-(n(m) * tp(k)), n(n_))),
        GermCase::DiagonalPlain => {
            let s = Expr::Number(0.5).sqrt();
            curve(tp(n_), tp(n_), (-s.clone(), s))
        }
        GermCase::DiagonalPerturbed => {
            let p = germ.p.expect("validated");
            let a = -(n(n_) * (Expr::Number(1.0) + tp(p)) + n(p) * tp(p));
            curve(
                tp(n_),
                tp(n_) * (Expr::Number(1.0) + tp(p)),
                unit(a, n(n_)),
            )
        }
        GermCase::AboveDiagonal => curve(tp(n_), tp(m), unit(n(m), -(n(n_) * tp(k)))),
    })
}

/// The germ itself, before normalization, built from `f`, `c` and the sign.
pub fn germ_curve(germ: &GermData) -> Result<LegendreCurve> {
    let germ = germ.clone().validated()?;
    let (n_, m, s) = (germ.n, germ.m, germ.sign);
    let c = Expr::num(germ.c);
    match germ.case {
        GermCase::BelowDiagonal => type_nm_curve(n_, m, &germ.f_or_one(), s),
        GermCase::DiagonalPlain => Ok(curve(
            signed(s, tp(n_)),
            c.clone() * tp(n_),
            unit(-c, signed(s, Expr::Number(1.0))),
        )),
        GermCase::DiagonalPerturbed => {
            let p = germ.p.expect("validated");
            let g = tp(p) * germ.f_or_one();
            let h = c + g.clone();
            let a = -(n(n_) * h.clone() + Expr::t() * g.derivative());
            Ok(curve(signed(s, tp(n_)), tp(n_) * h, unit(a, signed(s, n(n_)))))
        }
        GermCase::AboveDiagonal => {
            let k = germ.k();
            let f = germ.f_or_one();
            let b = -(n(n_) * tp(k) * f.clone() + tp(k + 1) * f.derivative());
            Ok(curve(tp(n_) * f, signed(s, tp(m)), unit(signed(s, n(m)), b)))
        }
    }
}

/// Contact order at the germ point, `0` meaning "does not vanish".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GermOrder {
    Nonvanishing,
    Order(u32),
    ZeroFunction,
}

impl GermOrder {
    fn from_exponent(e: u32) -> Self {
        if e == 0 {
            GermOrder::Nonvanishing
        } else {
            GermOrder::Order(e)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GermSignature {
    pub ord_ell: GermOrder,
    pub ord_beta: GermOrder,
}

/// Exponents `(i, j)` of the representative curvature `(t^i, t^j)`.
pub fn germ_signature(germ: &GermData) -> GermSignature {
    let k = germ.k();
    let (ell, beta) = match germ.case {
        GermCase::BelowDiagonal => (GermOrder::from_exponent(k - 1), germ.n - 1),
        GermCase::DiagonalPlain => (GermOrder::ZeroFunction, germ.n - 1),
        GermCase::DiagonalPerturbed => (
            GermOrder::from_exponent(germ.p.unwrap_or(1) - 1),
            germ.n - 1,
        ),
        GermCase::AboveDiagonal => (GermOrder::from_exponent(k - 1), germ.m - 1),
    };
    GermSignature {
        ord_ell: ell,
        ord_beta: GermOrder::from_exponent(beta),
    }
}

/// Germ signature read off the computed signature of a curve at `t = 0`.
pub fn measured_germ_signature(curve: &LegendreCurve) -> Result<GermSignature> {
    let sig = signature(curve, &SignatureConfig::default())?;
    let at_zero = sig.zeros.iter().find(|z| z.t.abs() <= 1e-6);
    let order = |o: Option<u32>| o.map_or(GermOrder::Nonvanishing, GermOrder::Order);
    let ord_ell = if sig.ell_identically_zero {
        GermOrder::ZeroFunction
    } else {
        order(at_zero.and_then(|z| z.ord_ell))
    };
    Ok(GermSignature {
        ord_ell,
        ord_beta: order(at_zero.and_then(|z| z.ord_beta)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, Arity};
    use crate::legendre::{check_legendre, LEGENDRE_TOL};
    use approx::assert_abs_diff_eq;

    fn e(text: &str) -> Expr {
        parse_expr(text, Arity::OneVar).unwrap()
    }

    #[test]
    fn cusp_from_type_nm() {
        let c = type_nm_curve(2, 3, &e("1"), 1).unwrap();
        let t = 0.4_f64;
        let (_, nu) = c.point(t).unwrap();
        let d = (9.0 * t * t + 4.0).sqrt();
        assert_abs_diff_eq!(nu[0], -3.0 * t / d, epsilon = 1e-15);
        assert_abs_diff_eq!(nu[1], 2.0 / d, epsilon = 1e-15);
        assert_eq!(c.curvature(0.0).unwrap(), (1.5, 0.0));
    }

    #[test]
    fn type_nm_matches_closed_forms() {
        for (n_, m, f, s) in [(3, 5, "1", 1), (2, 3, "1+t", -1), (2, 5, "2-t", 1), (1, 2, "1", 1)] {
            let fe = e(f);
            let c = type_nm_curve(n_, m, &fe, s).unwrap();
            assert!(check_legendre(&c, 257, LEGENDRE_TOL).unwrap().ok);
            let k = (m - n_) as i32;
            let (n_, m) = (n_ as f64, m as f64);
            for t in [-0.9, -0.3, 0.2, 0.7_f64] {
                let fv = fe.eval(t).unwrap();
                let j = fe.eval_jet(t, 2).unwrap();
                let (df, ddf) = (j.coeffs()[1], 2.0 * j.coeffs()[2]);
                let q = m * t.powi(k) * fv + t.powi(k + 1) * df;
                let root = (q * q + n_ * n_).sqrt();
                let ell = s as f64 * n_ * t.powi(k - 1)
                    * (m * k as f64 * fv + (m + k as f64 + 1.0) * t * df + t * t * ddf)
                    / (q * q + n_ * n_);
                let beta = -t.powi(n_ as i32 - 1) * root;
                let (l, b) = c.curvature(t).unwrap();
                assert_abs_diff_eq!(l, ell, epsilon = 1e-12);
                assert_abs_diff_eq!(b, beta, epsilon = 1e-12);
            }
        }
        let regular = type_nm_curve(1, 2, &e("1"), 1).unwrap();
        let (_, b) = regular.curvature(0.5).unwrap();
        assert_abs_diff_eq!(b, -(2.0_f64).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn type_nm_rejects_bad_input() {
        assert!(matches!(
            type_nm_curve(2, 3, &e("t"), 1),
            Err(Error::FVanishesAtZero)
        ));
        assert!(type_nm_curve(3, 3, &e("1"), 1).is_err());
    }

    #[test]
    fn normal_forms_are_legendre_and_flatten() {
        let germs = [
            GermData::below_diagonal(2, 3).unwrap(),
            GermData::diagonal_plain(2).unwrap(),
            GermData::diagonal_perturbed(2, 3).unwrap(),
            GermData::above_diagonal(5, 3).unwrap(),
        ];
        for g in &germs {
            let c = local_normal_form(g).unwrap();
            assert!(check_legendre(&c, 257, LEGENDRE_TOL).unwrap().ok, "{g:?}");
            assert!(c.to_spec().is_some());
            let d = germ_curve(&g.clone().with_c(-2.0).unwrap().with_sign(-1).unwrap()).unwrap();
            assert!(check_legendre(&d, 257, LEGENDRE_TOL).unwrap().ok, "{g:?}");
        }
    }

    #[test]
    fn germ_signature_examples() {
        let s = germ_signature(&GermData::below_diagonal(2, 3).unwrap());
        assert_eq!((s.ord_ell, s.ord_beta), (GermOrder::Nonvanishing, GermOrder::Order(1)));
        let s = germ_signature(&GermData::above_diagonal(5, 3).unwrap());
        assert_eq!((s.ord_ell, s.ord_beta), (GermOrder::Order(1), GermOrder::Order(2)));
        let s = germ_signature(&GermData::diagonal_perturbed(3, 2).unwrap());
        assert_eq!((s.ord_ell, s.ord_beta), (GermOrder::Order(1), GermOrder::Order(2)));
        let s = germ_signature(&GermData::diagonal_plain(2).unwrap());
        assert_eq!(s.ord_ell, GermOrder::ZeroFunction);
    }

    #[test]
    fn measured_matches_predicted() {
        for g in [
            GermData::below_diagonal(2, 3).unwrap(),
            GermData::diagonal_plain(2).unwrap(),
            GermData::diagonal_perturbed(2, 3).unwrap(),
            GermData::above_diagonal(5, 3).unwrap(),
        ] {
            let c = local_normal_form(&g).unwrap();
            assert_eq!(measured_germ_signature(&c).unwrap(), germ_signature(&g), "{g:?}");
        }
    }

    #[test]
    fn case_labels() {
        assert_eq!(
            GermData::from_case("2ii", 3, None, Some(2)).unwrap(),
            GermData::diagonal_perturbed(3, 2).unwrap()
        );
        assert!(GermData::from_case("1", 3, None, None).is_err());
        assert!(GermData::from_case("1", 3, Some(2), None).is_err());
        assert!(GermData::from_case("4", 3, Some(2), None).is_err());
    }
}
