//! Curves from a prescribed curvature pair, and congruence alignment.
//!
//! With `θ = ∫ℓ` the curve is `γ = (-∫β sin θ, ∫β cos θ)`, `ν = (cos θ, sin θ)`,
//! normalized by `θ(a) = 0` and `γ(a) = 0`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::sig17;
use crate::legendre::{moving_frame, CurvaturePair, Domain, LegendreCurve, Vec2};

pub const MIN_STEPS: usize = 16;

/// A curve sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub ts: Vec<f64>,
    pub gammas: Vec<Vec2>,
    pub nus: Vec<Vec2>,
    pub step: f64,
}

impl SampledCurve {
    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    /// CSV with header `t,gx,gy,nx,ny`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,gx,gy,nx,ny\n");
        for i in 0..self.len() {
            let (g, n) = (self.gammas[i], self.nus[i]);
            writeln!(
                out,
                "{},{},{},{},{}",
                sig17(self.ts[i]),
                sig17(g[0]),
                sig17(g[1]),
                sig17(n[0]),
                sig17(n[1])
            )
            .unwrap();
        }
        out
    }
}

fn simpson(f0: f64, fm: f64, f1: f64, h: f64) -> f64 {
    h / 6.0 * (f0 + 4.0 * fm + f1)
}

/// Integrates the frame equations on `steps` uniform intervals.
///
/// Each interval is a Simpson panel with its midpoint; `θ` at the midpoint
/// comes from a half-width panel so the `γ` panel stays fourth order.
pub fn reconstruct(pair: &CurvaturePair, domain: Domain, steps: usize) -> Result<SampledCurve> {
    if steps < MIN_STEPS {
        return Err(Error::TooFewSamples {
            min: MIN_STEPS,
            got: steps,
        });
    }
    let h = domain.length() / steps as f64;
    let mut ts = Vec::with_capacity(steps + 1);
    let mut gammas = Vec::with_capacity(steps + 1);
    let mut nus = Vec::with_capacity(steps + 1);

    let mut theta = 0.0_f64;
    let mut gamma = [0.0_f64, 0.0];
    let (mut ell0, mut beta0) = pair.at(domain.start)?;
    ts.push(domain.start);
    gammas.push(gamma);
    nus.push([1.0, 0.0]);
    for i in 0..steps {
        let t0 = domain.point(i, steps);
        let t1 = domain.point(i + 1, steps);
        let tm = 0.5 * (t0 + t1);
        let (ell_q, _) = pair.at(t0 + 0.25 * (t1 - t0))?;
        let (ell_m, beta_m) = pair.at(tm)?;
        let (ell1, beta1) = pair.at(t1)?;

        let theta_m = theta + simpson(ell0, ell_q, ell_m, tm - t0);
        let theta1 = theta + simpson(ell0, ell_m, ell1, t1 - t0);
        let gx = |b: f64, th: f64| -b * th.sin();
        let gy = |b: f64, th: f64| b * th.cos();
        gamma[0] += simpson(gx(beta0, theta), gx(beta_m, theta_m), gx(beta1, theta1), t1 - t0);
        gamma[1] += simpson(gy(beta0, theta), gy(beta_m, theta_m), gy(beta1, theta1), t1 - t0);
        theta = theta1;
        ell0 = ell1;
        beta0 = beta1;

        ts.push(t1);
        gammas.push(gamma);
        nus.push([theta.cos(), theta.sin()]);
    }
    Ok(SampledCurve {
        ts,
        gammas,
        nus,
        step: h,
    })
}

/// Richardson estimate of the error of [`reconstruct`] at `steps`, from a
/// comparison with half resolution (fourth order: difference / 15).
pub fn richardson_error(pair: &CurvaturePair, domain: Domain, steps: usize) -> Result<f64> {
    let steps = steps - steps % 2;
    let fine = reconstruct(pair, domain, steps)?;
    let coarse = reconstruct(pair, domain, (steps / 2).max(MIN_STEPS))?;
    if coarse.len() * 2 - 1 != fine.len() {
        return Err(Error::GridMismatch {
            left: fine.len(),
            right: coarse.len(),
        });
    }
    let mut worst = 0.0_f64;
    for (j, g) in coarse.gammas.iter().enumerate() {
        let f = fine.gammas[2 * j];
        worst = worst.max((f[0] - g[0]).hypot(f[1] - g[1]));
    }
    Ok(worst / 15.0)
}

/// Samples `(γ, ν)` on `steps` uniform intervals.
pub fn sample_curve(curve: &LegendreCurve, steps: usize) -> Result<SampledCurve> {
    let intervals = steps.max(1);
    let mut out = SampledCurve {
        ts: Vec::with_capacity(intervals + 1),
        gammas: Vec::with_capacity(intervals + 1),
        nus: Vec::with_capacity(intervals + 1),
        step: curve.domain.length() / intervals as f64,
    };
    for i in 0..=intervals {
        let t = curve.domain.point(i, intervals);
        let (g, n) = curve.point(t)?;
        out.ts.push(t);
        out.gammas.push(g);
        out.nus.push(n);
    }
    Ok(out)
}

/// `γ̃ = Aγ + a`, `ν̃ = Aν` with `A` the rotation by `rotation_angle`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Congruence {
    pub rotation_angle: f64,
    pub translation: Vec2,
}

impl Congruence {
    pub fn rotate(&self, v: Vec2) -> Vec2 {
        let (s, c) = self.rotation_angle.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }

    pub fn apply_point(&self, p: Vec2) -> Vec2 {
        let r = self.rotate(p);
        [r[0] + self.translation[0], r[1] + self.translation[1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alignment {
    pub congruence: Congruence,
    pub residual: f64,
}

/// Finds the congruence taking `first` onto `second`, fixed by the frames at
/// the first grid point, and reports the worst pointwise mismatch.
pub fn align_congruence(first: &SampledCurve, second: &SampledCurve) -> Result<Alignment> {
    if first.len() != second.len() {
        return Err(Error::GridMismatch {
            left: first.len(),
            right: second.len(),
        });
    }
    if first.is_empty() {
        return Err(Error::TooFewSamples { min: 1, got: 0 });
    }
    let (n1, n2) = (first.nus[0], second.nus[0]);
    let cross = n1[0] * n2[1] - n1[1] * n2[0];
    let dot = n1[0] * n2[0] + n1[1] * n2[1];
    let mut congruence = Congruence {
        rotation_angle: cross.atan2(dot),
        translation: [0.0, 0.0],
    };
    let g1 = congruence.rotate(first.gammas[0]);
    congruence.translation = [second.gammas[0][0] - g1[0], second.gammas[0][1] - g1[1]];

    let mut residual = 0.0_f64;
    for i in 0..first.len() {
        let g = congruence.apply_point(first.gammas[i]);
        let n = congruence.rotate(first.nus[i]);
        let dg = (second.gammas[i][0] - g[0]).hypot(second.gammas[i][1] - g[1]);
        let dn = (second.nus[i][0] - n[0]).hypot(second.nus[i][1] - n[1]);
        residual = residual.max(dg).max(dn);
    }
    Ok(Alignment {
        congruence,
        residual,
    })
}

/// Five-point derivative of uniformly sampled values.
fn derivative_5pt(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let f = |i: usize| values[i];
    (0..n)
        .map(|i| {
            let d = if i >= 2 && i + 2 < n {
                f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)
            } else if i == 0 {
                -25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)
            } else if i == 1 {
                -3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)
            } else if i == n - 2 {
                3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5)
            } else {
                25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4)
                    + 3.0 * f(n - 5)
            };
            d / (12.0 * h)
        })
        .collect()
}

/// Curvature `(ℓ, β)` of a sampled curve by fourth-order finite differences.
pub fn curvature_from_samples(curve: &SampledCurve) -> Result<Vec<(f64, f64)>> {
    if curve.len() < 5 {
        return Err(Error::TooFewSamples {
            min: 5,
            got: curve.len(),
        });
    }
    let column = |v: &[Vec2], k: usize| v.iter().map(|p| p[k]).collect::<Vec<_>>();
    let h = curve.step;
    let dgx = derivative_5pt(&column(&curve.gammas, 0), h);
    let dgy = derivative_5pt(&column(&curve.gammas, 1), h);
    let dnx = derivative_5pt(&column(&curve.nus, 0), h);
    let dny = derivative_5pt(&column(&curve.nus, 1), h);
    Ok((0..curve.len())
        .map(|i| {
            let mu = moving_frame(curve.nus[i]);
            (
                dnx[i] * mu[0] + dny[i] * mu[1],
                dgx[i] * mu[0] + dgy[i] * mu[1],
            )
        })
        .collect())
}
