//! Command-line front end for `legendre-core`.
//!
//! Every subcommand writes its result (CSV, JSON or SVG) to the output stream
//! and diagnostics to the error stream. Exit codes: 0 on success, 1 on domain
//! errors, 2 on usage errors (bad flags, malformed expressions or files).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use legendre_core::error::{Error, Result};
use legendre_core::expr::{parse_expr, Arity};
use legendre_core::format::sig17;
use legendre_core::legendre::{
    check_closed, check_legendre, is_immersion, CurvaturePair, CurveSpec, Domain, LegendreCurve,
    CHECK_SAMPLES, LEGENDRE_TOL,
};
use legendre_core::normalform::{local_normal_form, GermData};
use legendre_core::signature::{decide_equivalence, parity_check, signature, Signature, SignatureConfig};
use legendre_core::taylor::DEFAULT_ORDER;
use legendre_core::transform::{
    diffeo_curve, negate, pushforward_affine, pushforward_diffeo, pushforward_swap, reparametrize,
    AffineMap, DiffeoSpec, Negate,
};
use legendre_core::{gallery, reconstruct};

#[derive(Debug, Parser)]
#[command(name = "legendre", version, about = "Legendre curves: curvature, signatures, transforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the curvature pair as CSV `t,ell,beta`.
    Curvature {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Zero points of ell and beta with contact orders, as JSON.
    Signature {
        #[arg(long)]
        curve: PathBuf,
    },
    /// Decide curvature equivalence of two curves.
    Equivalent {
        #[arg(long)]
        curve1: PathBuf,
        #[arg(long)]
        curve2: PathBuf,
    },
    /// Build a curve from prescribed curvature; CSV `t,gx,gy,nx,ny`.
    Reconstruct {
        #[arg(long, allow_hyphen_values = true)]
        ell: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, allow_hyphen_values = true)]
        domain: String,
        #[arg(long, default_value_t = 8192)]
        steps: usize,
    },
    /// Apply a transformation; prints a curve spec when possible, CSV otherwise.
    Transform(TransformArgs),
    /// Local normal form of a germ as a curve spec.
    NormalForm {
        /// One of 1, 2i, 2ii, 3.
        #[arg(long)]
        case: String,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        p: Option<u32>,
    },
    /// Counts of odd-order zeros on a closed curve.
    Parity {
        #[arg(long)]
        curve: PathBuf,
    },
    /// Built-in example curves.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
    /// Draw the curve as SVG with singular and inflection markers.
    Render {
        #[arg(long)]
        curve: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[arg(long, default_value_t = 640)]
        width: u32,
        #[arg(long, default_value_t = 480)]
        height: u32,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Legendre condition, closedness and immersion report.
    Check {
        #[arg(long)]
        curve: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum ExamplesAction {
    /// List entries with their default parameters.
    List,
    /// Print an entry as a curve spec.
    Get {
        name: String,
        /// Parameter override `key=value`; repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
    },
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("op").required(true).multiple(false))]
struct TransformArgs {
    #[arg(long)]
    curve: PathBuf,
    /// Linear map `a11,a12,a21,a22`.
    #[arg(long, group = "op", allow_hyphen_values = true)]
    affine: Option<String>,
    #[arg(long, group = "op")]
    swap: bool,
    #[arg(long, group = "op")]
    negate_nu: bool,
    #[arg(long, group = "op")]
    negate_gamma: bool,
    /// Parameter change `t(u)`, written in `t`.
    #[arg(long, group = "op", allow_hyphen_values = true, requires = "domain")]
    reparam: Option<String>,
    /// New parameter interval `c:d` for `--reparam`.
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// Target map `phi1;phi2` in `x` and `y`.
    #[arg(long, group = "op", allow_hyphen_values = true)]
    diffeo: Option<String>,
    /// Rows of CSV output when the result has no closed form.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

fn parse_param(text: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got '{text}'"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

/// Failure of a subcommand, with its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Json(_) => Failure::Usage(format!("{}: {e}", e.module())),
            other => Failure::Domain(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Layout of `render` output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    pub width: u32,
    pub height: u32,
    pub samples: usize,
    pub mark_singular: bool,
    pub mark_inflection: bool,
    pub margin_fraction: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            width: 640,
            height: 480,
            samples: 1000,
            mark_singular: true,
            mark_inflection: true,
            margin_fraction: 0.05,
        }
    }
}

impl RenderConfig {
    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidSpec("render size must be positive".into()));
        }
        if self.samples < 2 {
            return Err(Error::TooFewSamples {
                min: 2,
                got: self.samples,
            });
        }
        if !(0.0..0.5).contains(&self.margin_fraction) {
            return Err(Error::InvalidSpec("margin fraction must be in [0, 0.5)".into()));
        }
        Ok(())
    }
}

/// SVG drawing of `γ` with markers at the zero points of `sig`: filled circles
/// at singular points, open circles at inflection points.
pub fn render_svg(curve: &LegendreCurve, sig: Option<&Signature>, cfg: &RenderConfig) -> Result<String> {
    cfg.validate()?;
    let mut points = Vec::with_capacity(cfg.samples);
    for t in curve.domain.grid(cfg.samples) {
        points.push(curve.point(t)?.0);
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    // A constant curve (or a segment) still gets a non-degenerate frame.
    for k in 0..2 {
        if hi[k] - lo[k] < 1e-12 {
            let mid = 0.5 * (hi[k] + lo[k]);
            lo[k] = mid - 0.5;
            hi[k] = mid + 0.5;
        }
    }
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let usable = [w * (1.0 - 2.0 * cfg.margin_fraction), h * (1.0 - 2.0 * cfg.margin_fraction)];
    let scale = (usable[0] / (hi[0] - lo[0])).min(usable[1] / (hi[1] - lo[1]));
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let px = |p: [f64; 2]| {
        (
            0.5 * w + scale * (p[0] - center[0]),
            0.5 * h - scale * (p[1] - center[1]),
        )
    };

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        cfg.width, cfg.height, cfg.width, cfg.height
    )
    .unwrap();
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let (x, y) = px(*p);
        let cmd = if i == 0 { 'M' } else { 'L' };
        write!(d, "{cmd}{} {} ", sig17(x), sig17(y)).unwrap();
    }
    if curve.closed {
        d.push('Z');
    }
    writeln!(
        svg,
        r#"<path d="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        d.trim_end()
    )
    .unwrap();
    if let Some(sig) = sig {
        for z in &sig.zeros {
            let (x, y) = px(curve.point(z.t)?.0);
            if cfg.mark_singular && z.ord_beta.is_some() {
                writeln!(
                    svg,
                    r#"<circle cx="{}" cy="{}" r="4" fill="red"/>"#,
                    sig17(x),
                    sig17(y)
                )
                .unwrap();
            }
            if cfg.mark_inflection && z.ord_ell.is_some() {
                writeln!(
                    svg,
                    r#"<circle cx="{}" cy="{}" r="6" fill="none" stroke="blue" stroke-width="1"/>"#,
                    sig17(x),
                    sig17(y)
                )
                .unwrap();
            }
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn read_spec(path: &Path) -> CliResult<CurveSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(CurveSpec::from_json(&text)?)
}

fn load_curve(path: &Path) -> CliResult<LegendreCurve> {
    Ok(read_spec(path)?.to_curve()?)
}

fn parse_domain(text: &str) -> CliResult<Domain> {
    let bad = || Failure::Usage(format!("domain must be 'a:b', got '{text}'"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok(Domain::new(a, b)?)
}

fn parse_affine(text: &str) -> CliResult<AffineMap> {
    let entries: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("--affine expects four numbers, got '{text}'")))?;
    match entries[..] {
        [a11, a12, a21, a22] => Ok(AffineMap::new(a11, a12, a21, a22)?),
        _ => Err(Failure::Usage(format!(
            "--affine expects four numbers, got '{text}'"
        ))),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn frame_csv(curve: &LegendreCurve, samples: usize) -> Result<String> {
    let mut out = String::from("t,gx,gy,nx,ny,ell,beta\n");
    for t in curve.domain.grid(samples) {
        let (g, n) = curve.point(t)?;
        let (l, b) = curve.curvature(t)?;
        let row = [t, g[0], g[1], n[0], n[1], l, b].map(sig17).join(",");
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

fn curve_output(curve: &LegendreCurve, samples: usize) -> Result<String> {
    match curve.to_spec() {
        Some(spec) => Ok(spec.to_json() + "\n"),
        None => frame_csv(curve, samples),
    }
}

fn transform(args: &TransformArgs) -> CliResult<String> {
    let curve = load_curve(&args.curve)?;
    let samples = args.samples.max(2);
    if let Some(text) = &args.affine {
        let map = parse_affine(text)?;
        return Ok(curve_output(&pushforward_affine(&curve, &map), samples)?);
    }
    if args.swap {
        return Ok(curve_output(&pushforward_swap(&curve), samples)?);
    }
    if args.negate_nu {
        return Ok(curve_output(&negate(&curve, Negate::Nu), samples)?);
    }
    if args.negate_gamma {
        return Ok(curve_output(&negate(&curve, Negate::Gamma), samples)?);
    }
    if let Some(text) = &args.reparam {
        let t_of_u = parse_expr(text, Arity::OneVar).map_err(Error::from)?;
        let domain = parse_domain(args.domain.as_deref().unwrap_or_default())?;
        return Ok(curve_output(&reparametrize(&curve, &t_of_u, domain)?, samples)?);
    }
    if let Some(text) = &args.diffeo {
        let diffeo = DiffeoSpec::parse(text)?;
        // Fails early when the Jacobian degenerates along the curve.
        diffeo_curve(&curve, &diffeo)?;
        let mut out = String::from("t,gx,gy,nx,ny,ell,beta\n");
        for t in curve.domain.grid(samples) {
            let s = pushforward_diffeo(&curve, &diffeo, t)?;
            let row = [t, s.gamma[0], s.gamma[1], s.nu[0], s.nu[1], s.ell, s.beta]
                .map(sig17)
                .join(",");
            out.push_str(&row);
            out.push('\n');
        }
        return Ok(out);
    }
    Err(Failure::Usage("transform needs one operation".into()))
}

fn execute(command: Command) -> CliResult<String> {
    let config = SignatureConfig::default();
    Ok(match command {
        Command::Curvature { curve, samples } => {
            let curve = load_curve(&curve)?;
            if samples < 2 {
                return Err(Failure::Usage("--samples must be at least 2".into()));
            }
            let mut out = String::from("t,ell,beta\n");
            for t in curve.domain.grid(samples) {
                let (l, b) = curve.curvature(t)?;
                writeln!(out, "{},{},{}", sig17(t), sig17(l), sig17(b)).unwrap();
            }
            out
        }
        Command::Signature { curve } => {
            let curve = load_curve(&curve)?;
            signature(&curve, &config)?.to_json() + "\n"
        }
        Command::Equivalent { curve1, curve2 } => {
            let s1 = signature(&load_curve(&curve1)?, &config)?;
            let s2 = signature(&load_curve(&curve2)?, &config)?;
            to_json(&decide_equivalence(&s1, &s2))
        }
        Command::Reconstruct {
            ell,
            beta,
            domain,
            steps,
        } => {
            let ell = parse_expr(&ell, Arity::OneVar).map_err(Error::from)?;
            let beta = parse_expr(&beta, Arity::OneVar).map_err(Error::from)?;
            let domain = parse_domain(&domain)?;
            let pair = CurvaturePair::new(ell.into(), beta.into());
            reconstruct::reconstruct(&pair, domain, steps)?.to_csv()
        }
        Command::Transform(args) => transform(&args)?,
        Command::NormalForm { case, n, m, p } => {
            let germ = GermData::from_case(&case, n, m, p)?;
            let curve = local_normal_form(&germ)?;
            curve.to_spec().expect("normal forms are expressions").to_json() + "\n"
        }
        Command::Parity { curve } => {
            let curve = load_curve(&curve)?;
            to_json(&parity_check(&signature(&curve, &config)?)?)
        }
        Command::Examples { action } => match action {
            ExamplesAction::List => {
                let mut out = String::new();
                for name in gallery::NAMES {
                    let entry = gallery::get(name)?;
                    writeln!(out, "{}\t{}", entry.label(), entry.description).unwrap();
                }
                out
            }
            ExamplesAction::Get { name, params } => {
                let params: BTreeMap<String, f64> = params.into_iter().collect();
                gallery::gallery(&name, &params)?.spec.to_json() + "\n"
            }
        },
        Command::Render {
            curve,
            output,
            width,
            height,
            samples,
        } => {
            let curve = load_curve(&curve)?;
            let cfg = RenderConfig {
                width,
                height,
                samples,
                ..RenderConfig::default()
            };
            let sig = match signature(&curve, &config) {
                Ok(sig) => Some(sig),
                Err(Error::ConstantCurve) | Err(Error::NonFiniteZeros { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            let svg = render_svg(&curve, sig.as_ref(), &cfg)?;
            std::fs::write(&output, svg)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", output.display())))?;
            String::new()
        }
        Command::Check { curve } => {
            let curve = load_curve(&curve)?;
            let legendre = check_legendre(&curve, CHECK_SAMPLES, LEGENDRE_TOL)?;
            let closedness = check_closed(&curve, DEFAULT_ORDER)?;
            let immersion = is_immersion(&curve, CHECK_SAMPLES)?;
            to_json(&serde_json::json!({
                "legendre": legendre,
                "closed": curve.closed,
                "closed_order": closedness.closed_order,
                "closed_to_checked_order": closedness.closed_to_checked_order(),
                "max_order": closedness.max_order,
                "immersion": immersion,
            }))
        }
    })
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let target: &mut dyn Write = if code == 0 { out } else { err };
            let _ = target.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "error: {}: {e}", e.module());
            1
        }
    }
}
