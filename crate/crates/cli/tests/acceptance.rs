//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL`
//! line; run with `--nocapture` to see them.

use std::f64::consts::PI;
use std::time::Instant;

use legendre_core::expr::{parse_expr, pretty_print, Arity, BinaryOp, Expr, UnaryOp, Var};
use legendre_core::func::Func;
use legendre_core::gallery::{self, GalleryEntry};
use legendre_core::legendre::{check_legendre, substitute_params, Domain, LegendreCurve};
use legendre_core::normalform::{
    germ_signature, local_normal_form, measured_germ_signature, type_nm_curve, GermData,
    GermOrder, GermSignature,
};
use legendre_core::reconstruct::{align_congruence, curvature_from_samples, reconstruct, sample_curve};
use legendre_core::signature::{
    decide_equivalence, find_zeros, parity_check, signature, Signature, SignatureConfig,
    DEFAULT_GRID, DEFAULT_TOL,
};
use legendre_core::transform::{
    affine_law, diffeo_curve, negate, negate_law, pushforward_affine, pushforward_diffeo,
    pushforward_swap, reparametrize, swap_law, AffineMap, DiffeoSpec, Negate,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, title: &str, failures: &[String]) {
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {id}: {verdict} - {title}");
    for f in failures.iter().take(20) {
        println!("    {f}");
    }
    assert!(failures.is_empty(), "criterion {id} failed ({} problems)", failures.len());
}

fn all_entries() -> Vec<GalleryEntry> {
    let mut out = gallery::reference_entries();
    out.push(gallery::get("type_nm").unwrap());
    out
}

fn closed_entries() -> Vec<GalleryEntry> {
    gallery::reference_entries()
        .into_iter()
        .filter(|e| e.curve.closed)
        .collect()
}

fn param(e: &GalleryEntry, k: &str) -> f64 {
    e.spec.params[k]
}

/// Curvature formulas written out by hand, independent of the gallery strings.
fn closed_form(e: &GalleryEntry, t: f64) -> (f64, f64) {
    match e.name.as_str() {
        "circle" => (1.0, 1.0),
        "gamma_ab" => {
            let (a, b) = (param(e, "a"), param(e, "b"));
            let (ca, sa, cb, sb) = ((a * t).cos(), (a * t).sin(), (b * t).cos(), (b * t).sin());
            let q = a * a * ca * ca + b * b * cb * cb;
            (-a * b * (b * ca * sb - a * sa * cb) / q, -q.sqrt())
        }
        "gamma_n" => {
            let n = param(e, "n");
            ((n + 1.0) / 2.0, 2.0 * n * ((n - 1.0) / 2.0 * t).sin())
        }
        "gamma_m" => {
            let m = param(e, "m");
            ((m - 1.0) / 2.0, 2.0 * m * ((m + 1.0) / 2.0 * t).sin())
        }
        other => panic!("no closed form for {other}"),
    }
}

#[test]
fn criterion_1_golden_curvature() {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for e in gallery::reference_entries() {
        for t in e.curve.domain.grid(1000) {
            let (l, b) = e.curve.curvature(t).unwrap();
            let (l0, b0) = closed_form(&e, t);
            let err = (l - l0).abs().max((b - b0).abs());
            worst = worst.max(err);
            if err > 1e-9 {
                failures.push(format!("{} at t={t}: ({l}, {b}) vs ({l0}, {b0})", e.label()));
            }
        }
    }
    println!("    max abs error {worst:.3e}");
    report(1, "Frenet curvature matches closed forms (1e-9)", &failures);
}

#[test]
fn criterion_2_reconstruction_round_trip() {
    let mut failures = Vec::new();
    for e in closed_entries() {
        let steps = 8192;
        let rebuilt = reconstruct(&e.curve.curvature_pair(), e.curve.domain, steps).unwrap();
        let original = sample_curve(&e.curve, steps).unwrap();
        let alignment = align_congruence(&rebuilt, &original).unwrap();
        let extracted = curvature_from_samples(&rebuilt).unwrap();
        let curv_err = rebuilt
            .ts
            .iter()
            .zip(&extracted)
            .map(|(&t, &(l, b))| {
                let (l0, b0) = closed_form(&e, t);
                (l - l0).abs().max((b - b0).abs())
            })
            .fold(0.0, f64::max);
        println!(
            "    {}: residual {:.3e}, curvature error {:.3e}",
            e.label(),
            alignment.residual,
            curv_err
        );
        if alignment.residual > 1e-6 {
            failures.push(format!("{}: residual {}", e.label(), alignment.residual));
        }
        if curv_err > 1e-6 {
            failures.push(format!("{}: curvature error {curv_err}", e.label()));
        }
    }
    report(2, "reconstruct then align, residual and curvature within 1e-6", &failures);
}

#[test]
fn criterion_3_global_classification() {
    let config = SignatureConfig::default();
    let sig = |name: &str, k: &str, v: f64| {
        signature(&gallery::with(name, &[(k, v)]).unwrap().curve, &config).unwrap()
    };
    let mut failures = Vec::new();
    for m in [2.0, 3.0, 4.0] {
        let verdict = decide_equivalence(&sig("gamma_n", "n", m + 2.0), &sig("gamma_m", "m", m));
        if !verdict.equivalent {
            failures.push(format!("gamma_n[{}] vs gamma_m[{m}]: {}", m + 2.0, verdict.reason));
        }
    }
    let verdict = decide_equivalence(&sig("gamma_n", "n", 3.0), &sig("gamma_n", "n", 5.0));
    if verdict.equivalent || verdict.reason != "zero counts differ" {
        failures.push(format!("gamma_n[3] vs gamma_n[5]: {verdict:?}"));
    }
    report(3, "epicycloid/hypocycloid equivalences and one non-equivalence", &failures);
}

fn random_affine(rng: &mut ChaCha8Rng) -> AffineMap {
    loop {
        let mut e = || rng.gen_range(-2.0f64..=2.0);
        let (a11, a12, a21, a22) = (e(), e(), e(), e());
        if (a11 * a22 - a12 * a21).abs() >= 0.1 {
            return AffineMap::new(a11, a12, a21, a22).unwrap();
        }
    }
}

/// `t(u) = A + L (u + c sin(2πku) / (2πk))` on `u ∈ [0, 1]`; `t' > 0` for `|c| < 1`
/// and the endpoints go to the endpoints.
fn random_reparam(rng: &mut ChaCha8Rng, domain: Domain) -> Expr {
    let c: f64 = rng.gen_range(-0.8..0.8);
    let k: u32 = rng.gen_range(1..=3);
    let w = 2.0 * PI * k as f64;
    let text = format!(
        "{} + {} * (t + {} * sin({w} * t) / {w})",
        domain.start,
        domain.length(),
        c
    );
    parse_expr(&text, Arity::OneVar).unwrap()
}

fn invariance_failures(e: &GalleryEntry, seed: u64) -> Vec<String> {
    let config = SignatureConfig::default();
    let base = signature(&e.curve, &config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut check = |what: String, sig: Result<Signature, legendre_core::error::Error>| match sig {
        Ok(s) if s.same_pattern(&base) => {}
        Ok(s) => failures.push(format!("{} {what}: {:?} vs {:?}", e.label(), s.zeros, base.zeros)),
        Err(err) => failures.push(format!("{} {what}: {err}", e.label())),
    };
    for i in 0..100 {
        let map = random_affine(&mut rng);
        check(
            format!("affine #{i} {map:?}"),
            signature(&pushforward_affine(&e.curve, &map), &config),
        );
    }
    let unit = Domain::new(0.0, 1.0).unwrap();
    for i in 0..20 {
        let t_of_u = random_reparam(&mut rng, e.curve.domain);
        let sig = reparametrize(&e.curve, &t_of_u, unit).and_then(|c| signature(&c, &config));
        check(format!("reparam #{i} {}", pretty_print(&t_of_u)), sig);
    }
    failures
}

#[test]
fn criterion_4_signature_invariance() {
    let start = Instant::now();
    let entries = all_entries();
    let failures: Vec<String> = std::thread::scope(|s| {
        let handles: Vec<_> = entries
            .iter()
            .enumerate()
            .map(|(i, e)| s.spawn(move || invariance_failures(e, 1000 + i as u64)))
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    println!("    {} curves x 120 transforms in {:.1?}", entries.len(), start.elapsed());
    report(4, "signature unchanged by affine maps and reparametrizations", &failures);
}

fn order(e: u32) -> GermOrder {
    if e == 0 {
        GermOrder::Nonvanishing
    } else {
        GermOrder::Order(e)
    }
}

#[test]
fn criterion_5_local_classification() {
    let mut failures = Vec::new();
    let fs = ["1", "1+t", "2-t"];
    for (n, m) in [(2u32, 3u32), (3, 4), (3, 5), (2, 5)] {
        let expected = GermSignature {
            ord_ell: order(m - n - 1),
            ord_beta: order(n - 1),
        };
        for f in fs {
            let f_expr = parse_expr(f, Arity::OneVar).unwrap();
            for sign in [1, -1] {
                let curve = type_nm_curve(n, m, &f_expr, sign).unwrap();
                let got = measured_germ_signature(&curve).unwrap();
                if got != expected {
                    failures.push(format!("type ({n},{m}) f={f} s={sign}: {got:?} vs {expected:?}"));
                }
            }
        }
        let germ = GermData::below_diagonal(n, m).unwrap();
        if germ_signature(&germ) != expected {
            failures.push(format!("representative ({n},{m}): {:?}", germ_signature(&germ)));
        }
    }
    let mut cases = Vec::new();
    for n in [2, 3, 4] {
        cases.push((
            GermData::diagonal_plain(n).unwrap(),
            GermSignature {
                ord_ell: GermOrder::ZeroFunction,
                ord_beta: order(n - 1),
            },
        ));
        for p in [1, 2, 3] {
            cases.push((
                GermData::diagonal_perturbed(n, p).unwrap(),
                GermSignature {
                    ord_ell: order(p - 1),
                    ord_beta: order(n - 1),
                },
            ));
        }
    }
    for (n, m) in [(3, 2), (4, 3), (5, 3), (5, 2)] {
        cases.push((
            GermData::above_diagonal(n, m).unwrap(),
            GermSignature {
                ord_ell: order(n - m - 1),
                ord_beta: order(m - 1),
            },
        ));
    }
    for (germ, expected) in cases {
        let label = format!("case {} n={} m={} p={:?}", germ.case, germ.n, germ.m, germ.p);
        if germ_signature(&germ) != expected {
            failures.push(format!("{label}: table gives {:?}", germ_signature(&germ)));
        }
        match local_normal_form(&germ).and_then(|c| measured_germ_signature(&c)) {
            Ok(got) if got == expected => {}
            Ok(got) => failures.push(format!("{label}: measured {got:?} vs {expected:?}")),
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    report(5, "germ signatures of normal forms", &failures);
}

#[test]
fn criterion_6_parity() {
    let config = SignatureConfig::default();
    let mut failures = Vec::new();
    for e in closed_entries() {
        let sig = signature(&e.curve, &config).unwrap();
        // Independent count of odd-order zeros.
        let odd = |o: Option<u32>| o.is_some_and(|r| r % 2 == 1);
        let ell_odd = sig.zeros.iter().filter(|z| odd(z.ord_ell)).count();
        let beta_odd = sig.zeros.iter().filter(|z| odd(z.ord_beta)).count();
        let rep = parity_check(&sig).unwrap();
        println!("    {}: odd ell {ell_odd}, odd beta {beta_odd}", e.label());
        if !rep.ok || ell_odd % 2 != 0 || beta_odd % 2 != 0 {
            failures.push(format!("{}: {rep:?}", e.label()));
        }
        if rep.ell_odd_count != ell_odd || rep.beta_odd_count != beta_odd {
            failures.push(format!("{}: counts {rep:?} vs ({ell_odd}, {beta_odd})", e.label()));
        }
    }
    report(6, "closed curves have even odd-order zero counts", &failures);
}

fn law_failures(
    label: &str,
    curve: &LegendreCurve,
    law: impl Fn(f64) -> Result<(f64, f64), legendre_core::error::Error>,
) -> Vec<String> {
    let mut failures = Vec::new();
    let rep = check_legendre(curve, 2048, 1e-8).unwrap();
    if !rep.ok {
        failures.push(format!("{label}: Legendre defect {rep:?}"));
    }
    let mut worst: f64 = 0.0;
    for t in curve.domain.grid(1000) {
        let (l, b) = curve.curvature(t).unwrap();
        let (l0, b0) = law(t).unwrap();
        worst = worst.max((l - l0).abs()).max((b - b0).abs());
    }
    if worst > 1e-8 {
        failures.push(format!("{label}: law vs Frenet {worst:.3e}"));
    }
    failures
}

#[test]
fn criterion_7_transformation_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    let diffeos = ["x; y + 0.2*x^2", "x + 0.3*sin(y); y", "exp(0.2*x); y + 0.1*x"];
    let entries = all_entries();
    for e in &entries {
        let c = &e.curve;
        let lbl = e.label();
        for _ in 0..3 {
            let map = random_affine(&mut rng);
            let pushed = pushforward_affine(c, &map);
            failures.extend(law_failures(&format!("{lbl} affine {map:?}"), &pushed, |t| {
                affine_law(c, &map, t)
            }));
        }
        failures.extend(law_failures(&format!("{lbl} swap"), &pushforward_swap(c), |t| {
            swap_law(c, t)
        }));
        for which in [Negate::Nu, Negate::Gamma] {
            failures.extend(law_failures(&format!("{lbl} {which:?}"), &negate(c, which), |t| {
                negate_law(c, t)
            }));
        }
        for text in diffeos {
            let phi = DiffeoSpec::parse(text).unwrap();
            let pushed = diffeo_curve(c, &phi).unwrap();
            failures.extend(law_failures(&format!("{lbl} diffeo {text}"), &pushed, |t| {
                pushforward_diffeo(c, &phi, t).map(|s| (s.ell, s.beta))
            }));
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let e = &entries[rng.gen_range(0..entries.len())];
        let d = e.curve.domain;
        let t = rng.gen_range(d.start..d.end);
        let map = random_affine(&mut rng);
        let s = pushforward_diffeo(&e.curve, &DiffeoSpec::affine(&map), t).unwrap();
        let (l, b) = affine_law(&e.curve, &map, t).unwrap();
        let err = (s.ell - l).abs().max((s.beta - b).abs());
        worst = worst.max(err);
        if err > 1e-10 {
            failures.push(format!("point #{i} {} t={t}: {err:.3e}", e.label()));
        }
    }
    println!("    affine specialization max error {worst:.3e}");
    report(7, "transformation laws agree with Frenet recomputation", &failures);
}

/// Roots of `f` on a uniform grid with `n` intervals: sign changes refined by
/// bisection, plus grid points where `|f|` is at rounding level.
fn brute_force_roots(f: &dyn Fn(f64) -> f64, domain: Domain, n: usize) -> Option<Vec<f64>> {
    let ts: Vec<f64> = (0..=n)
        .map(|i| domain.start + domain.length() * i as f64 / n as f64)
        .collect();
    let vs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let scale = vs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale <= 1e-12 {
        return None;
    }
    let tiny = 1e-12 * scale.max(1.0);
    let mut roots: Vec<f64> = Vec::new();
    let push = |roots: &mut Vec<f64>, r: f64| {
        if roots.last().is_none_or(|&l| (r - l).abs() > 1e-6) {
            roots.push(r);
        }
    };
    for i in 0..=n {
        if vs[i].abs() <= tiny {
            push(&mut roots, ts[i]);
        } else if i < n && vs[i + 1].abs() > tiny && vs[i].signum() != vs[i + 1].signum() {
            let (mut a, mut b, fa) = (ts[i], ts[i + 1], vs[i]);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if f(mid).signum() == fa.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            push(&mut roots, 0.5 * (a + b));
        }
    }
    Some(roots)
}

fn fd_failures(label: &str, e: &Expr, domain: Domain, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut failures = Vec::new();
    let h = 1e-5;
    for _ in 0..50 {
        let t = rng.gen_range(domain.start + h..domain.end - h);
        let jet = e.eval_jet(t, 1).unwrap();
        let d = jet.coeffs()[1];
        let fd = (e.eval(t + h).unwrap() - e.eval(t - h).unwrap()) / (2.0 * h);
        if (d - fd).abs() > 1e-6 * fd.abs().max(1.0) {
            failures.push(format!("{label} at t={t}: jet {d} vs fd {fd}"));
        }
    }
    failures
}

#[test]
fn criterion_8_numerics_oracles() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let entries = all_entries();
    let mut compared = 0;
    for e in &entries {
        let (ell, beta) = e.curvature.clone().unwrap();
        for (which, expr) in [("ell", ell), ("beta", beta)] {
            let label = format!("{} {which}", e.label());
            let func: Func = expr.clone().into();
            let oracle = brute_force_roots(&|t| expr.eval(t).unwrap(), e.curve.domain, 1_000_000);
            let found = find_zeros(&func, e.curve.domain, DEFAULT_GRID, DEFAULT_TOL);
            match (oracle, found) {
                (None, Err(_)) => {}
                (None, Ok(r)) => failures.push(format!("{label}: zero function gave {r:?}")),
                (Some(_), Err(err)) => failures.push(format!("{label}: {err}")),
                (Some(o), Ok(r)) => {
                    compared += 1;
                    if o.len() != r.len() {
                        failures.push(format!("{label}: oracle {o:?} vs {r:?}"));
                    } else if let Some((a, b)) = o.iter().zip(&r).find(|(a, b)| (*a - *b).abs() > 1e-8) {
                        failures.push(format!("{label}: root {a} vs {b}"));
                    }
                }
            }
            failures.extend(fd_failures(&label, &expr, e.curve.domain, &mut rng));
        }
        for (k, text) in [e.spec.x.clone(), e.spec.y.clone()]
            .into_iter()
            .chain(e.spec.nu.clone().unwrap())
            .enumerate()
        {
            let expr = parse_expr(&substitute_params(&text, &e.spec.params).unwrap(), Arity::OneVar).unwrap();
            failures.extend(fd_failures(&format!("{} component {k}", e.label()), &expr, e.curve.domain, &mut rng));
        }
    }
    println!("    {compared} curvature components compared with the brute-force scan");
    report(8, "root finder and jets agree with brute-force oracles", &failures);
}

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        return match rng.gen_range(0..4) {
            0 => Expr::Number(rng.gen_range(0..100) as f64),
            1 => Expr::Number(rng.gen_range(0.0..1e3)),
            2 => Expr::Var(Var::T),
            _ => Expr::Pi,
        };
    }
    let child = |rng: &mut ChaCha8Rng| Box::new(random_expr(rng, depth - 1));
    match rng.gen_range(0..3) {
        0 => {
            let op = [UnaryOp::Neg, UnaryOp::Sin, UnaryOp::Cos, UnaryOp::Exp, UnaryOp::Sqrt, UnaryOp::Atan]
                [rng.gen_range(0..6)];
            Expr::Unary(op, child(rng))
        }
        1 => {
            let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div][rng.gen_range(0..4)];
            Expr::Binary(op, child(rng), child(rng))
        }
        _ => Expr::PowInt(child(rng), rng.gen_range(0..8)),
    }
}

#[test]
fn criterion_9_parser() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..500 {
        let e = random_expr(&mut rng, 6);
        let text = pretty_print(&e);
        match parse_expr(&text, Arity::OneVar) {
            Ok(back) if back == e => {}
            Ok(back) => failures.push(format!("ast #{i}: {text} reparsed as {}", pretty_print(&back))),
            Err(err) => failures.push(format!("ast #{i}: {text}: {err}")),
        }
    }
    for e in all_entries() {
        let (ell, beta) = e.curvature.clone().unwrap();
        let mut texts = vec![e.spec.x.clone(), e.spec.y.clone()];
        texts.extend(e.spec.nu.clone().unwrap());
        let mut exprs: Vec<Expr> = texts
            .iter()
            .map(|t| parse_expr(&substitute_params(t, &e.spec.params).unwrap(), Arity::OneVar).unwrap())
            .collect();
        exprs.extend([ell, beta]);
        for ex in exprs {
            let printed = pretty_print(&ex);
            if parse_expr(&printed, Arity::OneVar).as_ref() != Ok(&ex) {
                failures.push(format!("{}: {printed} does not round-trip", e.label()));
            }
        }
    }
    for bad in ["1+", "sin(t", "t**2", "foo(t)", "x+t", ")", "2 3", "t^-1", ""] {
        match parse_expr(bad, Arity::OneVar) {
            Ok(e) => failures.push(format!("'{bad}' parsed as {e:?}")),
            Err(err) => {
                if err.offset() > bad.len() || !err.to_string().contains("byte") {
                    failures.push(format!("'{bad}': unpositioned error {err}"));
                }
            }
        }
        let args = ["legendre", "reconstruct", "--ell", bad, "--beta", "1", "--domain", "0:1"];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = legendre_cli::run(args, &mut out, &mut err);
        if code != 2 {
            failures.push(format!("'{bad}': CLI exit {code}"));
        }
    }
    report(9, "parser round trip and positioned syntax errors", &failures);
}
