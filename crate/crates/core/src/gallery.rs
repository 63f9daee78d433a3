//! Built-in example curves with closed-form curvature.
//!
//! | name       | curve                                          | params        |
//! |------------|------------------------------------------------|---------------|
//! | `circle`   | `(cos t, sin t)`                               |               |
//! | `gamma_ab` | `(sin at, sin bt)`                             | `a`, `b`      |
//! | `gamma_n`  | `(n cos t - cos nt, n sin t - sin nt)`         | `n`           |
//! | `gamma_m`  | `(m sin t - sin mt, m cos t + cos mt)`         | `m`           |
//! | `type_nm`  | `(s tⁿ, t^m)` on `[-1, 1]`                     | `n`, `m`, `s` |
//!
//! The periodic curves live on `[0, 2π]`. `gamma_n` and `gamma_m` are closed
//! only for odd `n` (resp. `m`): for even values the normal comes back
//! negated after one period.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Arity, Expr};
use crate::legendre::{CurveSpec, LegendreCurve};

pub const NAMES: [&str; 5] = ["circle", "gamma_ab", "gamma_n", "gamma_m", "type_nm"];

#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: String,
    pub spec: CurveSpec,
    pub curve: LegendreCurve,
    /// `(ℓ, β)` in closed form, when known.
    pub curvature: Option<(Expr, Expr)>,
    pub description: String,
}

impl GalleryEntry {
    /// Name with parameters, e.g. `gamma_n[n=3]`.
    pub fn label(&self) -> String {
        let user: Vec<String> = self
            .spec
            .params
            .iter()
            .filter(|(k, _)| !k.starts_with('_'))
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        if user.is_empty() {
            self.name.clone()
        } else {
            format!("{}[{}]", self.name, user.join(","))
        }
    }
}

/// True iff no `(n, m)` with `0 ≤ 1+2n < 4a`, `0 ≤ 1+2m < 4b` has
/// `b(1+2n) = a(1+2m)`, i.e. `cos at` and `cos bt` never vanish together.
pub fn check_ab_assumption(a: u32, b: u32) -> Result<bool> {
    if a == b {
        return Err(Error::RequiresDistinct);
    }
    let (a, b) = (a as u64, b as u64);
    let odd_below = |limit: u64| (0..).map(|n: u64| 1 + 2 * n).take_while(move |v| *v < limit);
    Ok(!odd_below(4 * a).any(|p| odd_below(4 * b).any(|q| b * p == a * q)))
}

fn int_param(params: &BTreeMap<String, f64>, name: &str, default: u32) -> Result<u32> {
    match params.get(name) {
        None => Ok(default),
        Some(&v) if v.fract() == 0.0 && (1.0..=1000.0).contains(&v) => Ok(v as u32),
        Some(v) => Err(Error::InvalidSpec(format!(
            "parameter {name} must be a positive integer, got {v}"
        ))),
    }
}

struct Template {
    x: &'static str,
    y: &'static str,
    nu: [&'static str; 2],
    ell: &'static str,
    beta: &'static str,
    domain: [f64; 2],
    closed: bool,
    description: String,
}

fn build(name: &str, tpl: Template, params: BTreeMap<String, f64>) -> Result<GalleryEntry> {
    let spec = CurveSpec {
        x: tpl.x.to_string(),
        y: tpl.y.to_string(),
        nu: Some([tpl.nu[0].to_string(), tpl.nu[1].to_string()]),
        domain: tpl.domain,
        closed: tpl.closed,
        params,
    };
    let curve = spec.to_curve()?;
    let parse = |text: &str| -> Result<Expr> {
        let substituted = crate::legendre::substitute_params(text, &spec.params)?;
        Ok(parse_expr(&substituted, Arity::OneVar)?)
    };
    let curvature = Some((parse(tpl.ell)?, parse(tpl.beta)?));
    Ok(GalleryEntry {
        name: name.to_string(),
        spec,
        curve,
        curvature,
        description: tpl.description,
    })
}

/// Looks up a gallery entry; unknown parameters are rejected.
pub fn gallery(name: &str, params: &BTreeMap<String, f64>) -> Result<GalleryEntry> {
    let allowed: &[&str] = match name {
        "circle" => &[],
        "gamma_ab" => &["a", "b"],
        "gamma_n" => &["n"],
        "gamma_m" => &["m"],
        "type_nm" => &["n", "m", "s"],
        other => return Err(Error::UnknownEntry(other.to_string())),
    };
    if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidSpec(format!(
            "'{name}' has no parameter '{extra}'"
        )));
    }
    let period = [0.0, 2.0 * PI];
    let mut p = BTreeMap::new();
    match name {
        "circle" => build(
            name,
            Template {
                x: "cos(t)",
                y: "sin(t)",
                nu: ["cos(t)", "sin(t)"],
                ell: "1",
                beta: "1",
                domain: period,
                closed: true,
                description: "unit circle".to_string(),
            },
            p,
        ),
        "gamma_ab" => {
            let a = int_param(params, "a", 1)?;
            let b = int_param(params, "b", 2)?;
            if !check_ab_assumption(a, b)? {
                return Err(Error::AssumptionFailed(format!(
                    "cos({a}t) and cos({b}t) vanish together; the normal is undefined there"
                )));
            }
            p.insert("a".into(), a as f64);
            p.insert("b".into(), b as f64);
            build(
                name,
                Template {
                    x: "sin(a*t)",
                    y: "sin(b*t)",
                    nu: [
                        "-b*cos(b*t)/sqrt(a^2*cos(a*t)^2+b^2*cos(b*t)^2)",
                        "a*cos(a*t)/sqrt(a^2*cos(a*t)^2+b^2*cos(b*t)^2)",
                    ],
                    ell: "-a*b*(b*cos(a*t)*sin(b*t)-a*sin(a*t)*cos(b*t))/(a^2*cos(a*t)^2+b^2*cos(b*t)^2)",
                    beta: "-sqrt(a^2*cos(a*t)^2+b^2*cos(b*t)^2)",
                    domain: period,
                    closed: true,
                    description: format!("Lissajous-type curve (sin {a}t, sin {b}t)"),
                },
                p,
            )
        }
        "gamma_n" => {
            let n = int_param(params, "n", 3)?;
            if n < 2 {
                return Err(Error::AssumptionFailed(
                    "gamma_n needs n >= 2 (n = 1 is a constant curve)".to_string(),
                ));
            }
            p.insert("n".into(), n as f64);
            build(
                name,
                Template {
                    x: "n*cos(t)-cos(n*t)",
                    y: "n*sin(t)-sin(n*t)",
                    nu: ["sin((n+1)/2*t)", "-cos((n+1)/2*t)"],
                    ell: "(n+1)/2",
                    beta: "2*n*sin((n-1)/2*t)",
                    domain: period,
                    closed: n % 2 == 1,
                    description: format!("epicycloid with {} cusps", n - 1),
                },
                p,
            )
        }
        "gamma_m" => {
            let m = int_param(params, "m", 3)?;
            p.insert("m".into(), m as f64);
            build(
                name,
                Template {
                    x: "m*sin(t)-sin(m*t)",
                    y: "m*cos(t)+cos(m*t)",
                    nu: ["-cos((m-1)/2*t)", "-sin((m-1)/2*t)"],
                    ell: "(m-1)/2",
                    beta: "2*m*sin((m+1)/2*t)",
                    domain: period,
                    closed: m % 2 == 1,
                    description: format!("hypocycloid with {} cusps", m + 1),
                },
                p,
            )
        }
        "type_nm" => {
            let n = int_param(params, "n", 2)?;
            let m = int_param(params, "m", 3)?;
            let s = match params.get("s").copied().unwrap_or(1.0) {
                v if v == 1.0 || v == -1.0 => v,
                v => {
                    return Err(Error::InvalidSpec(format!(
                        "parameter s must be 1 or -1, got {v}"
                    )))
                }
            };
            if n >= m {
                return Err(Error::AssumptionFailed(format!(
                    "type_nm needs n < m, got ({n}, {m})"
                )));
            }
            let k = m - n;
            p.insert("n".into(), n as f64);
            p.insert("m".into(), m as f64);
            p.insert("s".into(), s);
            // Exponents must be integer literals, so derived ones are parameters too.
            p.insert("_k".into(), k as f64);
            p.insert("_k1".into(), (k - 1) as f64);
            p.insert("_k2".into(), (2 * k) as f64);
            p.insert("_n1".into(), (n - 1) as f64);
            build(
                name,
                Template {
                    x: "s*t^n",
                    y: "t^m",
                    nu: [
                        "-m*t^_k/sqrt(m^2*t^_k2+n^2)",
                        "s*n/sqrt(m^2*t^_k2+n^2)",
                    ],
                    ell: "s*n*m*_k*t^_k1/(m^2*t^_k2+n^2)",
                    beta: "-t^_n1*sqrt(m^2*t^_k2+n^2)",
                    domain: [-1.0, 1.0],
                    closed: false,
                    description: format!("germ of type ({n}, {m})"),
                },
                p,
            )
        }
        _ => unreachable!("names checked above"),
    }
}

/// Entry with default parameters.
pub fn get(name: &str) -> Result<GalleryEntry> {
    gallery(name, &BTreeMap::new())
}

/// Entry with the given integer parameters.
pub fn with(name: &str, params: &[(&str, f64)]) -> Result<GalleryEntry> {
    let map = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    gallery(name, &map)
}

/// The reference set: circle, `gamma_ab` for `(1,2)` and `(2,3)`, `gamma_n`
/// for `n = 3, 5`, `gamma_m` for `m = 1, 2, 3`.
pub fn reference_entries() -> Vec<GalleryEntry> {
    let mut out = vec![get("circle").expect("circle")];
    for (a, b) in [(1.0, 2.0), (2.0, 3.0)] {
        out.push(with("gamma_ab", &[("a", a), ("b", b)]).expect("gamma_ab"));
    }
    for n in [3.0, 5.0] {
        out.push(with("gamma_n", &[("n", n)]).expect("gamma_n"));
    }
    for m in [1.0, 2.0, 3.0] {
        out.push(with("gamma_m", &[("m", m)]).expect("gamma_m"));
    }
    out
}
