//! Batch front end: parses differential polynomials, scalars, and matrices,
//! dispatches to the library, and prints canonical JSON (default) or text.
//! Exit codes: 0 success, 2 input error, 3 resource limit.

use clap::{Parser, Subcommand};
use diffkit_core::diffpoly::{CharSet, DiffPoly, FactorKind};
use diffkit_core::error::{DiffError, Result};
use diffkit_core::geometry::{self, AckGuard};
use diffkit_core::groebner::{AlgIdeal, AlgPoly, JetRing, Limits};
use diffkit_core::mindex::{gamma_set, RankedVar};
use diffkit_core::parse::{parse_diffpoly, parse_scalar};
use diffkit_core::pv::{integrability_check, pv_fundamental_solution, MatrixK};
use diffkit_core::scalars::{DiffFieldCtx, DiffScalar};
use diffkit_core::series::TruncSeries;
use diffkit_core::taylor::{self, PointMap};
use num_bigint::BigUint;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "diffkit",
    about = "Exact differential-algebra workbench",
    version,
    max_term_width = 100
)]
struct Cli {
    /// Number of commuting derivations d1..dm.
    #[arg(long, global = true, default_value_t = 1)]
    m: usize,

    /// Number of unknowns x1..xn.
    #[arg(long, global = true, default_value_t = 1)]
    n: usize,

    /// Coefficient field: rational | ratfn:<p> | tower:<depth>.
    #[arg(long, global = true, default_value = "rational")]
    field: String,

    /// Derivation table for ratfn fields: JSON p x m array of scalar
    /// expressions, entry [j][i] giving d<i+1>(u<j+1>).
    #[arg(long = "deriv-table", global = true, value_name = "JSON")]
    deriv_table: Option<String>,

    /// Truncation order for series and tower levels.
    #[arg(long = "N", global = true, default_value_t = 6)]
    trunc: usize,

    /// Emit compact JSON (the default).
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,

    /// Emit line-oriented text instead of JSON.
    #[arg(long, global = true)]
    text: bool,

    /// Read the subcommand's primary input from a file instead of its flag.
    #[arg(long, global = true, value_name = "PATH")]
    file: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Taylor expansion of a scalar at a point map.
    Taylor {
        /// Scalar expression to expand.
        #[arg(long)]
        a: Option<String>,
        /// JSON array of scalar expressions: images of the generators.
        #[arg(long)]
        phi: Option<String>,
    },
    /// Twisted Taylor expansion (differential where the point map is).
    Twist {
        /// Scalar expression to expand.
        #[arg(long)]
        a: Option<String>,
        /// JSON array of scalar expressions: images of the generators.
        #[arg(long)]
        phi: Option<String>,
    },
    /// Series solutions of an explicit autoreduced system.
    Solve {
        /// Semicolon-separated differential polynomials.
        #[arg(long)]
        system: Option<String>,
        /// Semicolon-separated assignments like "x1=1; D[1](x1)=u1".
        #[arg(long, default_value = "")]
        init: String,
    },
    /// Fundamental solution of an integrable linear system.
    Pv {
        /// JSON matrix (m=1) or array of m matrices; entries are numbers or
        /// scalar expressions.
        #[arg(long = "A")]
        a: Option<String>,
    },
    /// Prolongation of an affine variety given by order-zero polynomials.
    Prolong {
        /// Semicolon-separated generators in x1..xn.
        #[arg(long = "X")]
        x: Option<String>,
        /// Prolongation order.
        #[arg(long)]
        r: u32,
    },
    /// Jet ideal of a characteristic set.
    Jet {
        /// Semicolon-separated differential polynomials.
        #[arg(long)]
        system: Option<String>,
        /// Jet order.
        #[arg(long)]
        r: u32,
    },
    /// Differential division with a membership certificate.
    Reduce {
        /// Semicolon-separated differential polynomials (the divisors).
        #[arg(long)]
        system: Option<String>,
        /// The polynomial to reduce.
        #[arg(long)]
        g: String,
    },
    /// The prolongation-length bound for the ambient (m, n).
    Bound {
        /// Base order (any size).
        #[arg(long)]
        r: String,
    },
    /// The prolongation-containment condition on a jet-frame variety.
    AxiomCheck {
        /// Semicolon-separated generators in the full frame of the bound order.
        #[arg(long = "W")]
        w: Option<String>,
    },
    /// The jet coordinate frame for the ambient (m, n).
    Gamma {
        /// Frame order.
        #[arg(long)]
        r: u32,
    },
}

#[derive(Serialize)]
struct CoeffOut {
    alpha: Vec<u32>,
    value: String,
}

#[derive(Serialize)]
struct TaylorOut {
    coeffs: Vec<CoeffOut>,
    display: String,
    precision: i64,
}

#[derive(Serialize)]
struct SeriesOut {
    var: String,
    coeffs: Vec<CoeffOut>,
    display: String,
}

#[derive(Serialize)]
struct SolveOut {
    series: Vec<SeriesOut>,
    precision: usize,
}

#[derive(Serialize)]
struct PvOut {
    #[serde(rename = "Z")]
    z: Vec<Vec<String>>,
    precision: usize,
}

#[derive(Serialize)]
struct IdealOut {
    vars: Vec<String>,
    generators: Vec<String>,
}

#[derive(Serialize)]
struct FactorOut {
    kind: &'static str,
    element: String,
    power: u32,
}

#[derive(Serialize)]
struct CertOut {
    multiplier: String,
    theta: Vec<u32>,
    element: String,
}

#[derive(Serialize)]
struct ReduceOut {
    remainder: String,
    premultiplier: String,
    factors: Vec<FactorOut>,
    certificate: Vec<CertOut>,
}

#[derive(Serialize)]
struct AxiomOut {
    holds: bool,
    failing_generator: Option<String>,
    pi: Vec<String>,
    tau: Vec<String>,
    psi: Vec<String>,
}

#[derive(Serialize)]
struct GammaOut {
    vars: Vec<String>,
}

#[derive(Serialize)]
struct ErrorBody {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ErrorOut {
    error: ErrorBody,
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => print!("{out}"),
        Err(e) => {
            let code = match e {
                DiffError::ResourceLimit(_) => 3,
                _ => 2,
            };
            let body = ErrorOut {
                error: ErrorBody {
                    kind: error_kind(&e),
                    message: e.to_string(),
                },
            };
            eprintln!("{}", serde_json::to_string(&body).expect("error serializes"));
            std::process::exit(code);
        }
    }
}

fn error_kind(e: &DiffError) -> &'static str {
    use DiffError::*;
    match e {
        DivisionByZero => "division-by-zero",
        PrecisionLoss(_) => "precision-loss",
        NotAUnit(_) => "not-a-unit",
        NonCommutingDerivations { .. } => "non-commuting-derivations",
        PoleError(_) => "pole",
        UndefinedGenerator(_) => "undefined-generator",
        RelationNotRespected { .. } => "relation-not-respected",
        ConstantPolynomial(_) => "constant-polynomial",
        NotAutoreduced { .. } => "not-autoreduced",
        NotExplicit(_) => "not-explicit",
        InconsistentSystem { .. } => "inconsistent-system",
        MissingInitial(_) => "missing-initial",
        UnexpectedInitial(_) => "unexpected-initial",
        OrderExceeded { .. } => "order-exceeded",
        Violation { .. } => "integrability-violation",
        IntegrabilityError { .. } => "path-disagreement",
        WitnessNotOnX(_) => "witness-not-on-variety",
        DimensionMismatch(_) => "dimension-mismatch",
        ResourceLimit(_) => "resource-limit",
        SyntaxError { .. } => "syntax",
        ArityError(_) => "arity",
    }
}

fn input_err(msg: impl Into<String>) -> DiffError {
    DiffError::SyntaxError {
        pos: 1,
        msg: msg.into(),
    }
}

fn build_ctx(cli: &Cli) -> Result<DiffFieldCtx> {
    if cli.m == 0 {
        return Err(input_err("--m must be at least 1"));
    }
    let spec = cli.field.as_str();
    if spec == "rational" {
        if cli.deriv_table.is_some() {
            return Err(input_err("--deriv-table needs --field ratfn:<p>"));
        }
        return Ok(DiffFieldCtx::rationals(cli.m));
    }
    if let Some(p_text) = spec.strip_prefix("ratfn:") {
        let p: usize = p_text
            .parse()
            .map_err(|_| input_err(format!("bad generator count in --field {spec}")))?;
        if let Some(table_json) = &cli.deriv_table {
            let rows: Vec<Vec<String>> = serde_json::from_str(table_json)
                .map_err(|e| input_err(format!("--deriv-table is not a JSON string table: {e}")))?;
            if rows.len() != p || rows.iter().any(|r| r.len() != cli.m) {
                return Err(DiffError::DimensionMismatch(format!(
                    "--deriv-table must be {p} rows of {} entries",
                    cli.m
                )));
            }
            let bootstrap = DiffFieldCtx::constants_field(cli.m, p);
            let mut table = Vec::with_capacity(p);
            for row in &rows {
                let mut out = Vec::with_capacity(cli.m);
                for entry in row {
                    out.push(parse_scalar(&bootstrap, entry)?);
                }
                table.push(out);
            }
            return DiffFieldCtx::rational_functions(cli.m, p, &table);
        }
        if p == cli.m {
            return Ok(DiffFieldCtx::partial_field(cli.m));
        }
        return Err(input_err(format!(
            "--field ratfn:{p} with m={} needs --deriv-table",
            cli.m
        )));
    }
    if let Some(depth_text) = spec.strip_prefix("tower:") {
        let depth: usize = depth_text
            .parse()
            .map_err(|_| input_err(format!("bad depth in --field {spec}")))?;
        if depth == 0 {
            return Err(input_err("tower depth must be at least 1"));
        }
        let mut ctx = DiffFieldCtx::rationals(cli.m);
        for _ in 0..depth {
            ctx = DiffFieldCtx::tower(&ctx, cli.trunc);
        }
        return Ok(ctx);
    }
    Err(input_err(format!(
        "unknown --field {spec}; use rational, ratfn:<p>, or tower:<depth>"
    )))
}

/// The primary input: from its flag or from `--file`, never both.
fn primary_input(cli: &Cli, flag: &Option<String>, name: &str) -> Result<String> {
    match (flag, &cli.file) {
        (Some(_), Some(_)) => Err(input_err(format!("give --{name} or --file, not both"))),
        (Some(v), None) => Ok(v.clone()),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map(|s| s.trim().to_string())
            .map_err(|e| input_err(format!("cannot read {}: {e}", path.display()))),
        (None, None) => Err(input_err(format!("missing --{name} (or --file)"))),
    }
}

fn no_file(cli: &Cli) -> Result<()> {
    if cli.file.is_some() {
        return Err(input_err("this subcommand takes no --file input"));
    }
    Ok(())
}

/// Output names of the series variables; tower levels already use the lower
/// `t` numbers.
fn series_names(ctx: &DiffFieldCtx) -> Vec<String> {
    let offset = ctx.depth() * ctx.m();
    (1..=ctx.m()).map(|k| format!("t{}", offset + k)).collect()
}

fn parse_system(ctx: &DiffFieldCtx, n: usize, text: &str) -> Result<Vec<DiffPoly>> {
    let mut out = Vec::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(parse_diffpoly(ctx, n, part)?);
    }
    if out.is_empty() {
        return Err(input_err("no polynomials given"));
    }
    Ok(out)
}

fn parse_inits(
    ctx: &DiffFieldCtx,
    n: usize,
    text: &str,
) -> Result<BTreeMap<RankedVar, DiffScalar>> {
    let mut out = BTreeMap::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let Some((key, value)) = part.split_once('=') else {
            return Err(input_err(format!("initial '{part}' is not key=value")));
        };
        let key_poly = parse_diffpoly(ctx, n, key.trim())?;
        let var = key_poly
            .leader()
            .filter(|v| key_poly == DiffPoly::var(ctx, n, v.clone()))
            .ok_or_else(|| input_err(format!("initial key '{}' is not a variable", key.trim())))?;
        if out.insert(var, parse_scalar(ctx, value.trim())?).is_some() {
            return Err(input_err(format!("initial key '{}' repeats", key.trim())));
        }
    }
    Ok(out)
}

fn matrix_entry(ctx: &DiffFieldCtx, v: &serde_json::Value) -> Result<DiffScalar> {
    match v {
        serde_json::Value::Number(k) => k
            .as_i64()
            .map(|k| ctx.from_int(k))
            .ok_or_else(|| input_err(format!("matrix entry {k} is not an exact integer"))),
        serde_json::Value::String(s) => parse_scalar(ctx, s),
        other => Err(input_err(format!("matrix entry {other} is not a scalar"))),
    }
}

fn parse_one_matrix(ctx: &DiffFieldCtx, v: &serde_json::Value) -> Result<MatrixK> {
    let rows = v
        .as_array()
        .ok_or_else(|| input_err("matrix must be a JSON array of rows"))?;
    if rows.is_empty() {
        return Err(input_err("matrix must have at least one row"));
    }
    let mut entries = Vec::with_capacity(rows.len());
    for row in rows {
        let cells = row
            .as_array()
            .ok_or_else(|| input_err("matrix row must be a JSON array"))?;
        if cells.len() != rows.len() {
            return Err(DiffError::DimensionMismatch(format!(
                "matrix must be square, got a row of {} in size {}",
                cells.len(),
                rows.len()
            )));
        }
        entries.push(cells.iter().map(|c| matrix_entry(ctx, c)).collect::<Result<Vec<_>>>()?);
    }
    Ok(MatrixK::new(ctx, entries))
}

fn parse_matrices(ctx: &DiffFieldCtx, text: &str) -> Result<Vec<MatrixK>> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| input_err(format!("bad matrix JSON: {e}")))?;
    let outer = v
        .as_array()
        .ok_or_else(|| input_err("matrix input must be a JSON array"))?;
    let nested = outer
        .first()
        .and_then(|r| r.as_array())
        .and_then(|r| r.first())
        .is_some_and(serde_json::Value::is_array);
    let list: Vec<MatrixK> = if nested {
        outer
            .iter()
            .map(|mv| parse_one_matrix(ctx, mv))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![parse_one_matrix(ctx, &v)?]
    };
    if list.len() != ctx.m() {
        return Err(DiffError::DimensionMismatch(format!(
            "expected {} coefficient matrices, got {}",
            ctx.m(),
            list.len()
        )));
    }
    Ok(list)
}

fn parse_point_map(ctx: &DiffFieldCtx, phi: &Option<String>) -> Result<PointMap> {
    match phi {
        None => Ok(PointMap::identity(ctx)),
        Some(text) => {
            let images: Vec<String> = serde_json::from_str(text)
                .map_err(|e| input_err(format!("--phi is not a JSON string array: {e}")))?;
            if images.len() != ctx.num_generators() {
                return Err(DiffError::DimensionMismatch(format!(
                    "--phi needs {} images, got {}",
                    ctx.num_generators(),
                    images.len()
                )));
            }
            let imgs = images
                .iter()
                .map(|s| parse_scalar(ctx, s))
                .collect::<Result<Vec<_>>>()?;
            Ok(PointMap::new(ctx, ctx, imgs))
        }
    }
}

fn coeffs_out(s: &TruncSeries) -> Vec<CoeffOut> {
    s.coeffs()
        .map(|(alpha, v)| CoeffOut {
            alpha: alpha.entries().to_vec(),
            value: v.to_string(),
        })
        .collect()
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string(value).expect("output serializes");
    out.push('\n');
    out
}

/// The plain (order-zero) coordinate ring for `prolong` inputs.
fn plain_ring(ctx: &DiffFieldCtx, n: usize) -> JetRing {
    JetRing::jet_frame(ctx, n, 0)
}

fn ideal_out(ideal: &AlgIdeal) -> IdealOut {
    IdealOut {
        vars: ideal.ring().vars().iter().map(|v| v.to_string()).collect(),
        generators: ideal.generators().iter().map(|g| g.to_string()).collect(),
    }
}

fn ideal_text(ideal: &AlgIdeal) -> String {
    if ideal.is_zero_ideal() {
        "0\n".to_string()
    } else {
        ideal
            .generators()
            .iter()
            .map(|g| format!("{g}\n"))
            .collect()
    }
}

fn gen_strings(ideal: &AlgIdeal) -> Vec<String> {
    ideal.generators().iter().map(|g| g.to_string()).collect()
}

fn run(cli: &Cli) -> Result<String> {
    let ctx = build_ctx(cli)?;
    let text_mode = cli.text;
    let limits = Limits::default();
    match &cli.cmd {
        Cmd::Taylor { a, phi } | Cmd::Twist { a, phi } => {
            let expr = primary_input(cli, a, "a")?;
            let value = parse_scalar(&ctx, &expr)?;
            let map = parse_point_map(&ctx, phi)?;
            let series = if matches!(cli.cmd, Cmd::Taylor { .. }) {
                taylor::taylor(&map, &value, cli.trunc)?
            } else {
                taylor::twisted_taylor(&map, &value, cli.trunc)?
            };
            let display = series.display_with_names(&series_names(&ctx));
            if text_mode {
                Ok(format!("{display}\n"))
            } else {
                Ok(json_line(&TaylorOut {
                    coeffs: coeffs_out(&series),
                    display,
                    precision: series.prec(),
                }))
            }
        }
        Cmd::Solve { system, init } => {
            let polys = parse_system(&ctx, cli.n, &primary_input(cli, system, "system")?)?;
            let charset = CharSet::new(polys)?;
            let inits = parse_inits(&ctx, cli.n, init)?;
            let solutions = taylor::series_solve(&charset, &inits, cli.trunc)?;
            let names = series_names(&ctx);
            if text_mode {
                let mut out = String::new();
                for (k, s) in solutions.iter().enumerate() {
                    out.push_str(&format!("x{} = {}\n", k + 1, s.display_with_names(&names)));
                }
                Ok(out)
            } else {
                Ok(json_line(&SolveOut {
                    series: solutions
                        .iter()
                        .enumerate()
                        .map(|(k, s)| SeriesOut {
                            var: format!("x{}", k + 1),
                            coeffs: coeffs_out(s),
                            display: s.display_with_names(&names),
                        })
                        .collect(),
                    precision: cli.trunc,
                }))
            }
        }
        Cmd::Pv { a } => {
            let matrices = parse_matrices(&ctx, &primary_input(cli, a, "A")?)?;
            integrability_check(&matrices)?;
            let prec = u32::try_from(cli.trunc)
                .map_err(|_| input_err("--N is too large for a series order"))?;
            let z = pv_fundamental_solution(&matrices, prec)?;
            let names = series_names(&ctx);
            let rows: Vec<Vec<String>> = z
                .iter()
                .map(|row| row.iter().map(|s| s.display_with_names(&names)).collect())
                .collect();
            if text_mode {
                Ok(rows
                    .iter()
                    .map(|r| format!("[{}]\n", r.join(", ")))
                    .collect())
            } else {
                Ok(json_line(&PvOut {
                    z: rows,
                    precision: cli.trunc,
                }))
            }
        }
        Cmd::Prolong { x, r } => {
            let polys = parse_system(&ctx, cli.n, &primary_input(cli, x, "X")?)?;
            let ring = plain_ring(&ctx, cli.n);
            let gens = polys
                .iter()
                .map(|p| ring.polynomialize(p))
                .collect::<Result<Vec<AlgPoly>>>()?;
            let tau = geometry::prolongation_tau(&AlgIdeal::new(&ring, gens), *r);
            if text_mode {
                Ok(ideal_text(&tau))
            } else {
                Ok(json_line(&ideal_out(&tau)))
            }
        }
        Cmd::Jet { system, r } => {
            let polys = parse_system(&ctx, cli.n, &primary_input(cli, system, "system")?)?;
            let charset = CharSet::new(polys)?;
            let jet = geometry::jet_ideal(&charset, *r, &limits)?;
            if text_mode {
                Ok(ideal_text(&jet))
            } else {
                Ok(json_line(&ideal_out(&jet)))
            }
        }
        Cmd::Reduce { system, g } => {
            let polys = parse_system(&ctx, cli.n, &primary_input(cli, system, "system")?)?;
            let charset = CharSet::new(polys)?;
            let target = parse_diffpoly(&ctx, cli.n, g)?;
            let division = charset.diff_divide(&target);
            let factors = division
                .factors
                .iter()
                .map(|f| FactorOut {
                    kind: match f.kind {
                        FactorKind::Initial => "initial",
                        FactorKind::Separant => "separant",
                    },
                    element: charset.elements()[f.element].to_string(),
                    power: f.power,
                })
                .collect();
            let certificate = division
                .certificate
                .iter()
                .map(|t| CertOut {
                    multiplier: t.multiplier.to_string(),
                    theta: t.theta.entries().to_vec(),
                    element: charset.elements()[t.element].to_string(),
                })
                .collect();
            if text_mode {
                let mut out = format!(
                    "remainder = {}\npremultiplier = {}\n",
                    division.remainder, division.premultiplier
                );
                for f in &division.factors {
                    let kind = match f.kind {
                        FactorKind::Initial => "initial",
                        FactorKind::Separant => "separant",
                    };
                    out.push_str(&format!(
                        "factor: {kind}({})^{}\n",
                        charset.elements()[f.element],
                        f.power
                    ));
                }
                for t in &division.certificate {
                    out.push_str(&format!(
                        "certificate: ({}) * D{}({})\n",
                        t.multiplier,
                        t.theta,
                        charset.elements()[t.element]
                    ));
                }
                Ok(out)
            } else {
                Ok(json_line(&ReduceOut {
                    remainder: division.remainder.to_string(),
                    premultiplier: division.premultiplier.to_string(),
                    factors,
                    certificate,
                }))
            }
        }
        Cmd::Bound { r } => {
            no_file(cli)?;
            let r: BigUint = r
                .parse()
                .map_err(|_| input_err(format!("--r must be a natural number, got '{r}'")))?;
            let m = u32::try_from(cli.m).map_err(|_| input_err("--m is too large"))?;
            let n = u32::try_from(cli.n).map_err(|_| input_err("--n is too large"))?;
            if n == 0 {
                return Err(input_err("--n must be at least 1"));
            }
            let c = geometry::kernel_bound(&r, m, n, &AckGuard::default())?;
            Ok(format!("{c}\n"))
        }
        Cmd::AxiomCheck { w } => {
            let input = primary_input(cli, w, "W")?;
            if cli.n == 0 {
                return Err(input_err("--n must be at least 1"));
            }
            let m = u32::try_from(cli.m).map_err(|_| input_err("--m is too large"))?;
            let n = u32::try_from(cli.n).map_err(|_| input_err("--n is too large"))?;
            let c_big = geometry::kernel_bound(&BigUint::from(1u32), m, n, &AckGuard::default())?;
            let c = u32::try_from(&c_big).map_err(|_| {
                DiffError::ResourceLimit(format!("frame order {c_big} is not materializable"))
            })?;
            let ring = JetRing::jet_frame(&ctx, cli.n, c);
            let polys = parse_system(&ctx, cli.n, &input)?;
            let gens = polys
                .iter()
                .map(|p| ring.polynomialize(p))
                .collect::<Result<Vec<AlgPoly>>>()?;
            let report = geometry::axiom_check(&AlgIdeal::new(&ring, gens), &limits)?;
            if text_mode {
                let mut out = format!("holds: {}\n", report.holds);
                if let Some(g) = &report.failing_generator {
                    out.push_str(&format!("failing generator: {g}\n"));
                }
                out.push_str(&format!("pi: {}\n", gen_strings(&report.pi).join(", ")));
                out.push_str(&format!("tau: {}\n", gen_strings(&report.tau).join(", ")));
                out.push_str(&format!("psi: {}\n", gen_strings(&report.psi).join(", ")));
                Ok(out)
            } else {
                Ok(json_line(&AxiomOut {
                    holds: report.holds,
                    failing_generator: report.failing_generator.as_ref().map(|g| g.to_string()),
                    pi: gen_strings(&report.pi),
                    tau: gen_strings(&report.tau),
                    psi: gen_strings(&report.psi),
                }))
            }
        }
        Cmd::Gamma { r } => {
            no_file(cli)?;
            if cli.n == 0 {
                return Err(input_err("--n must be at least 1"));
            }
            let vars: Vec<String> = gamma_set(cli.n, *r, ctx.m())
                .iter()
                .map(|v| v.to_string())
                .collect();
            if text_mode {
                Ok(vars.iter().map(|v| format!("{v}\n")).collect())
            } else {
                Ok(json_line(&GammaOut { vars }))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use diffkit_core::mindex::MultiIndex;

    fn cli(args: &[&str]) -> Cli {
        Cli::parse_from(args)
    }

    #[test]
    fn field_specs() {
        let c = cli(&["diffkit", "--m", "2", "gamma", "--r", "0"]);
        assert_eq!(build_ctx(&c).unwrap().m(), 2);
        let c = cli(&["diffkit", "--field", "ratfn:1", "gamma", "--r", "0"]);
        assert_eq!(build_ctx(&c).unwrap().num_generators(), 1);
        let c = cli(&["diffkit", "--field", "tower:2", "gamma", "--r", "0"]);
        assert_eq!(build_ctx(&c).unwrap().depth(), 2);
        let c = cli(&["diffkit", "--field", "nope", "gamma", "--r", "0"]);
        assert!(build_ctx(&c).is_err());
        let c = cli(&["diffkit", "--field", "ratfn:3", "gamma", "--r", "0"]);
        assert!(build_ctx(&c).is_err());
    }

    #[test]
    fn deriv_table_constructs_custom_fields() {
        let c = cli(&[
            "diffkit",
            "--field",
            "ratfn:1",
            "--deriv-table",
            r#"[["u1"]]"#,
            "gamma",
            "--r",
            "0",
        ]);
        let ctx = build_ctx(&c).unwrap();
        let u = ctx.generator(1).unwrap();
        assert_eq!(u.derive(1), u);
    }

    #[test]
    fn matrices_single_and_list_forms() {
        let ctx = DiffFieldCtx::rationals(1);
        let one = parse_matrices(&ctx, "[[0,1],[0,0]]").unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].entry(0, 1), &ctx.one());
        let ctx2 = DiffFieldCtx::rationals(2);
        let two = parse_matrices(&ctx2, "[[[1]],[[2]]]").unwrap();
        assert_eq!(two.len(), 2);
        assert!(parse_matrices(&ctx2, "[[0,1],[0,0]]").is_err());
        assert!(parse_matrices(&ctx, "[[0,1]]").is_err());
        let named = parse_matrices(&DiffFieldCtx::partial_field(1), r#"[["u1"]]"#).unwrap();
        assert!(named[0].entry(0, 0).derive(1).is_one());
    }

    #[test]
    fn init_assignments() {
        let ctx = DiffFieldCtx::rationals(2);
        let inits = parse_inits(&ctx, 2, "x1=1; D[1,0](x2)=3/2").unwrap();
        assert_eq!(inits.len(), 2);
        let v = RankedVar::new(MultiIndex::new(vec![1, 0]), 2);
        assert_eq!(inits[&v], ctx.from_int(3).div(&ctx.from_int(2)).unwrap());
        assert!(parse_inits(&ctx, 2, "x1+1=2").is_err());
        assert!(parse_inits(&ctx, 2, "x1=1; x1=2").is_err());
        assert!(parse_inits(&ctx, 2, "x1").is_err());
    }
}
