//! Jet-evaluable scalar functions of the curve parameter.
//!
//! A [`Func`] is either a parsed expression or a composite built from other
//! functions. Composites of expressions can always be flattened back into a
//! single [`Expr`] (see [`Func::to_expr`]), which is what lets transformed
//! curves be written out as spec files. Functions that depend on derivatives
//! of other functions (derived normals, pushforward frames) are opaque.

use std::fmt;
use std::sync::Arc;

use crate::expr::{Env, EvalError, Expr, Var};
use crate::taylor::{JetError, TaylorJet};

/// A scalar function that can produce its Taylor jet at any point.
pub trait JetFn: Send + Sync + fmt::Debug {
    fn jet(&self, t0: f64, order: usize) -> Result<TaylorJet, EvalError>;
}

#[derive(Clone)]
pub enum Func {
    Expr(Arc<Expr>),
    /// `template(t, x(t), y(t))`: a template in `t`, `x`, `y` applied to two functions.
    Apply {
        template: Arc<Expr>,
        x: Arc<Func>,
        y: Arc<Func>,
    },
    /// `outer(inner(t))`.
    Compose { outer: Arc<Func>, inner: Arc<Func> },
    /// First derivative of the wrapped function.
    Derivative(Arc<Func>),
    Opaque(Arc<dyn JetFn>),
}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Func::Expr(e) => write!(f, "Expr({e})"),
            Func::Apply { template, x, y } => f
                .debug_struct("Apply")
                .field("template", &format_args!("{template}"))
                .field("x", x)
                .field("y", y)
                .finish(),
            Func::Compose { outer, inner } => f
                .debug_struct("Compose")
                .field("outer", outer)
                .field("inner", inner)
                .finish(),
            Func::Derivative(inner) => f.debug_tuple("Derivative").field(inner).finish(),
            Func::Opaque(inner) => f.debug_tuple("Opaque").field(inner).finish(),
        }
    }
}

struct ApplyEnv {
    t0: f64,
    order: usize,
    x: TaylorJet,
    y: TaylorJet,
}

impl Env<TaylorJet> for ApplyEnv {
    fn var(&self, v: Var) -> Result<TaylorJet, EvalError> {
        Ok(match v {
            Var::T => TaylorJet::variable(self.t0, self.order),
            Var::X => self.x.clone(),
            Var::Y => self.y.clone(),
        })
    }
    fn constant(&self, c: f64) -> TaylorJet {
        TaylorJet::constant(c, self.order)
    }
}

impl From<Expr> for Func {
    fn from(e: Expr) -> Self {
        Func::Expr(Arc::new(e))
    }
}

impl Func {
    pub fn constant(c: f64) -> Func {
        Expr::num(c).into()
    }

    pub fn opaque(f: impl JetFn + 'static) -> Func {
        Func::Opaque(Arc::new(f))
    }

    pub fn jet(&self, t0: f64, order: usize) -> Result<TaylorJet, EvalError> {
        match self {
            Func::Expr(e) => e.eval_jet(t0, order),
            Func::Apply { template, x, y } => {
                let env = ApplyEnv {
                    t0,
                    order,
                    x: x.jet(t0, order)?,
                    y: y.jet(t0, order)?,
                };
                template.evaluate(&env)
            }
            Func::Compose { outer, inner } => {
                let inner_jet = inner.jet(t0, order)?;
                let outer_jet = outer.jet(inner_jet.value(), order)?;
                Ok(outer_jet.compose(&inner_jet))
            }
            Func::Derivative(inner) => Ok(inner.jet(t0, order + 1)?.differentiate()),
            Func::Opaque(inner) => inner.jet(t0, order),
        }
    }

    pub fn value(&self, t: f64) -> Result<f64, EvalError> {
        match self {
            Func::Expr(e) => e.eval(t),
            _ => Ok(self.jet(t, 0)?.value()),
        }
    }

    /// Flattens into a single expression when every leaf is an expression.
    pub fn to_expr(&self) -> Option<Expr> {
        match self {
            Func::Expr(e) => Some((**e).clone()),
            Func::Apply { template, x, y } => {
                let x = x.to_expr()?;
                let y = y.to_expr()?;
                Some(template.substitute(None, Some(&x), Some(&y)))
            }
            Func::Compose { outer, inner } => {
                let outer = outer.to_expr()?;
                let inner = inner.to_expr()?;
                Some(outer.substitute(Some(&inner), None, None))
            }
            Func::Derivative(_) | Func::Opaque(_) => None,
        }
    }

    /// Applies a template in `t`, `x`, `y` to `(x, y) = (self, other)`.
    pub fn apply(template: Expr, x: &Func, y: &Func) -> Func {
        Func::Apply {
            template: Arc::new(template),
            x: Arc::new(x.clone()),
            y: Arc::new(y.clone()),
        }
    }

    /// Applies a template in `t` and `x` to a single function.
    pub fn map(&self, template: Expr) -> Func {
        Func::apply(template, self, &Func::constant(0.0))
    }

    pub fn compose(&self, inner: &Func) -> Func {
        Func::Compose {
            outer: Arc::new(self.clone()),
            inner: Arc::new(inner.clone()),
        }
    }

    pub fn derivative(&self) -> Func {
        Func::Derivative(Arc::new(self.clone()))
    }

    pub fn neg(&self) -> Func {
        self.map(-Expr::x())
    }

    pub fn scale(&self, c: f64) -> Func {
        self.map(Expr::num(c) * Expr::x())
    }

    pub fn mul(&self, other: &Func) -> Func {
        Func::apply(Expr::x() * Expr::y(), self, other)
    }
}

/// The `order`-th derivative of `f` at `t0`, read from a jet of order `max_order`.
pub fn derivative_at(f: &Func, t0: f64, order: usize, max_order: usize) -> Result<f64, EvalError> {
    if order > max_order {
        return Err(JetError::OrderExceeded {
            requested: order,
            available: max_order,
        }
        .into());
    }
    Ok(f.jet(t0, order)?.derivative(order)?)
}
