//! Command-line interface of the `pbounds` binary.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analytic::{upper_bounds_2d, upper_bounds_3d};
use crate::constants::{literature_bounds, ConstantKind};
use crate::eigen::{evaluate_expansion, BasisSpec, RayleighRitz};
use crate::eigenfunctions::sample_function;
use crate::error::{Error, Result};
use crate::geometry::{Shape, Tetrahedron3D, Triangle2D};
use crate::majorant::{self, EtaRule, FieldsSpec, LambdaFactor, MajorantOptions, MeshSpec};
use crate::rational::PRECISION_ENV;
use crate::report::{format_number, json_document, svg_lines, svg_scatter};
use crate::tables::{self, TableOptions};

#[derive(Parser, Debug)]
#[command(name = "pbounds", version, about = "Two-sided bounds of Poincare and trace constants")]
pub struct Cli {
    /// Decimal digits used to rationalize vertex coordinates.
    #[arg(long, global = true)]
    pub digits: Option<u32>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lower and upper bounds on triangles over a sweep of angles.
    Bounds2d(Bounds2dArgs),
    /// Lower and upper bounds on tetrahedra over angle sweeps.
    Bounds3d(Bounds3dArgs),
    /// Recompute one of the reference tables and diff it.
    Tables(TablesArgs),
    /// Sample an eigenfunction on a barycentric lattice.
    Eigenfunction(EigenfunctionArgs),
    /// Evaluate the error majorant for a mesh and approximate fields.
    Majorant(MajorantArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Monomial,
    Cosine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    CpT,
    CpGamma,
    CtrGamma,
}

impl From<KindArg> for ConstantKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::CpT => ConstantKind::CpT,
            KindArg::CpGamma => ConstantKind::CpGamma,
            KindArg::CtrGamma => ConstantKind::CtrGamma,
        }
    }
}

#[derive(Args, Debug)]
pub struct Bounds2dArgs {
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub h: f64,
    /// `start:end:count`; angles accept forms such as `pi/18` or `5pi/6`.
    #[arg(long = "alpha-grid", default_value = "pi/18:17pi/18:17")]
    pub alpha_grid: String,
    #[arg(long = "N", default_value_t = 6)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = BasisArg::Monomial)]
    pub basis: BasisArg,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct Bounds3dArgs {
    #[arg(long, default_value_t = 1.0)]
    pub h1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub h2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub h3: f64,
    #[arg(long = "alpha-grid", default_value = "pi/6:5pi/6:5")]
    pub alpha_grid: String,
    #[arg(long = "theta-grid", default_value = "pi/2:pi/2:1")]
    pub theta_grid: String,
    #[arg(long = "N", default_value_t = 4)]
    pub n: u32,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TablesArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
    pub id: u8,
    #[arg(long = "n2d", default_value_t = 6)]
    pub n_2d: u32,
    #[arg(long = "n3d", default_value_t = 4)]
    pub n_3d: u32,
    #[arg(long = "n3d-max", default_value_t = 5)]
    pub n_3d_max: u32,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EigenfunctionArgs {
    #[arg(long, default_value_t = 1.0)]
    pub h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value = "pi/2")]
    pub alpha: String,
    #[arg(long, value_enum, default_value_t = KindArg::CpGamma)]
    pub kind: KindArg,
    /// Which eigenfunction, counting from the one of the smallest eigenvalue.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long = "N", default_value_t = 6)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = BasisArg::Monomial)]
    pub basis: BasisArg,
    #[arg(long, default_value_t = 40)]
    pub resolution: usize,
    #[arg(long)]
    pub svg: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EtaArg {
    Sum,
    RootSumOfSquares,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LambdaArg {
    Inverse,
    InverseSqrt,
}

#[derive(Args, Debug)]
pub struct MajorantArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub fields: PathBuf,
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = EtaArg::Sum)]
    pub eta: EtaArg,
    #[arg(long = "lambda-factor", value_enum, default_value_t = LambdaArg::Inverse)]
    pub lambda_factor: LambdaArg,
}

/// Parses `pi`, `pi/18`, `5pi/6`, `5*pi/6`, `2.5` and similar.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim().replace(' ', "").to_lowercase();
    let bad = || Error::InvalidInput(format!("cannot parse angle {s:?}"));
    if let Some(pos) = t.find("pi") {
        let num = t[..pos].trim_end_matches('*');
        let factor = if num.is_empty() { 1.0 } else { num.parse::<f64>().map_err(|_| bad())? };
        let rest = &t[pos + 2..];
        let div = if rest.is_empty() {
            1.0
        } else {
            rest.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?
        };
        Ok(factor * PI / div)
    } else {
        t.parse::<f64>().map_err(|_| bad())
    }
}

/// Parses `start:end:count` into `count` equally spaced angles, all of
/// which must lie strictly inside `(0, pi)`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(format!("grid {s:?} is not start:end:count")));
    }
    let (a, b) = (parse_angle(parts[0])?, parse_angle(parts[1])?);
    let k: usize = parts[2].trim().parse().map_err(|_| Error::InvalidInput(format!("bad count in {s:?}")))?;
    if k == 0 {
        return Err(Error::InvalidInput("grid needs at least one point".into()));
    }
    let grid: Vec<f64> = if k == 1 {
        vec![a]
    } else {
        (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
    };
    if grid.iter().any(|&x| !(x > 0.0 && x < PI)) {
        return Err(Error::InvalidInput(format!("grid {s:?} leaves (0, pi)")));
    }
    Ok(grid)
}

fn basis_2d(b: BasisArg, n: u32) -> Result<BasisSpec> {
    if !(1..=8).contains(&n) {
        return Err(Error::InvalidInput(format!("N must lie in 1..=8 in 2D, got {n}")));
    }
    Ok(match b {
        BasisArg::Monomial => BasisSpec::monomial(2, n),
        BasisArg::Cosine => BasisSpec::cosine(n),
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)?;
    Ok(())
}

fn csv_string(columns: &[&str], rows: &[Vec<f64>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r.iter().map(|x| format_number(*x)))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct Rows<'a> {
    columns: &'a [&'a str],
    rows: &'a [Vec<f64>],
}

/// Columns of `bounds2d`; all values are dimensionless (divided by `h` or `sqrt h`).
pub const BOUNDS2D_COLUMNS: [&str; 11] = [
    "alpha",
    "rho",
    "lower_CP_T",
    "upper_CP_MR",
    "upper_CP_LS",
    "lower_CP_Gamma",
    "upper_CP_Gamma",
    "lower_CTr_Gamma",
    "upper_CTr_Gamma",
    "cheng_lower",
    "pw_upper",
];

/// One `bounds2d` row per angle, in grid order.
pub fn bounds2d_rows(h: f64, rho: f64, alphas: &[f64], basis: BasisSpec) -> Result<Vec<Vec<f64>>> {
    alphas
        .par_iter()
        .map(|&alpha| -> Result<Vec<f64>> {
            let run = || -> Result<Vec<f64>> {
                let t = Triangle2D::new(h, rho, alpha)?;
                let rr = RayleighRitz::new(t, basis)?;
                let low = |k| rr.lower_bound(k).map(|r| r.constant_lower_bound);
                let up = upper_bounds_2d(&t)?;
                let lit = literature_bounds(&t);
                Ok(vec![
                    alpha,
                    rho,
                    low(ConstantKind::CpT)?,
                    up.cp_classical,
                    lit.ls_upper / h,
                    low(ConstantKind::CpGamma)?,
                    up.cp_gamma,
                    low(ConstantKind::CtrGamma)?,
                    up.ctr_gamma,
                    lit.cheng_lower / h,
                    lit.pw_upper / h,
                ])
            };
            run().map_err(|e| annotate(e, &format!("alpha = {alpha}")))
        })
        .collect()
}

/// Prefixes the failing point to an error message, keeping its category.
fn annotate(e: Error, at: &str) -> Error {
    match e {
        Error::InvalidInput(m) => Error::InvalidInput(format!("{at}: {m}")),
        Error::DegenerateShape(m) => Error::DegenerateShape(format!("{at}: {m}")),
        other => {
            eprintln!("failure at {at}");
            other
        }
    }
}

fn cmd_bounds2d(a: &Bounds2dArgs) -> Result<()> {
    let alphas = parse_grid(&a.alpha_grid)?;
    let basis = basis_2d(a.basis, a.n)?;
    let rows = bounds2d_rows(a.h, a.rho, &alphas, basis)?;
    fs::create_dir_all(&a.out)?;
    write(&a.out.join("bounds2d.csv"), &csv_string(&BOUNDS2D_COLUMNS, &rows)?)?;
    write(&a.out.join("bounds2d.json"), &json_document("bounds2d", &Rows { columns: &BOUNDS2D_COLUMNS, rows: &rows })?)?;
    let series = [(5, "lower CP_Gamma"), (6, "upper CP_Gamma"), (7, "lower CTr_Gamma"), (8, "upper CTr_Gamma")]
        .iter()
        .map(|&(j, name)| (name.to_string(), rows.iter().map(|r| r[j]).collect()))
        .collect::<Vec<_>>();
    write(&a.out.join("bounds2d.svg"), &svg_lines(&format!("rho = {}", a.rho), &alphas, &series))?;
    Ok(())
}

pub const BOUNDS3D_COLUMNS: [&str; 6] =
    ["alpha", "theta", "lower_CP_Gamma", "upper_CP_Gamma", "lower_CTr_Gamma", "upper_CTr_Gamma"];

/// One `bounds3d` row per `(theta, alpha)` pair, theta-major.
pub fn bounds3d_rows(h: [f64; 3], alphas: &[f64], thetas: &[f64], n: u32) -> Result<Vec<Vec<f64>>> {
    if !(1..=5).contains(&n) {
        return Err(Error::InvalidInput(format!("N must lie in 1..=5 in 3D, got {n}")));
    }
    let cells: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| alphas.iter().map(move |&a| (a, t))).collect();
    cells
        .par_iter()
        .map(|&(alpha, theta)| -> Result<Vec<f64>> {
            let run = || -> Result<Vec<f64>> {
                let t = Tetrahedron3D::new(h[0], h[1], h[2], alpha, theta)?;
                let rr = RayleighRitz::new(t, BasisSpec::monomial(3, n))?;
                let up = upper_bounds_3d(&t)?;
                Ok(vec![
                    alpha,
                    theta,
                    rr.lower_bound(ConstantKind::CpGamma)?.constant_lower_bound,
                    up.cp_gamma,
                    rr.lower_bound(ConstantKind::CtrGamma)?.constant_lower_bound,
                    up.ctr_gamma,
                ])
            };
            run().map_err(|e| annotate(e, &format!("alpha = {alpha}, theta = {theta}")))
        })
        .collect()
}

fn cmd_bounds3d(a: &Bounds3dArgs) -> Result<()> {
    let alphas = parse_grid(&a.alpha_grid)?;
    let thetas = parse_grid(&a.theta_grid)?;
    let rows = bounds3d_rows([a.h1, a.h2, a.h3], &alphas, &thetas, a.n)?;
    fs::create_dir_all(&a.out)?;
    write(&a.out.join("bounds3d.csv"), &csv_string(&BOUNDS3D_COLUMNS, &rows)?)?;
    write(&a.out.join("bounds3d.json"), &json_document("bounds3d", &Rows { columns: &BOUNDS3D_COLUMNS, rows: &rows })?)?;
    Ok(())
}

fn cmd_tables(a: &TablesArgs) -> Result<()> {
    let opts = TableOptions { n_2d: a.n_2d, n_3d: a.n_3d, n_3d_max: a.n_3d_max, ..TableOptions::default() };
    let t = tables::compute_table(a.id, &opts)?;
    let d = tables::diff(&t, tables::reference_table(a.id)?);
    fs::create_dir_all(&a.out)?;
    let mut buf = Vec::new();
    t.write_csv(&mut buf)?;
    fs::write(a.out.join(format!("table{}.csv", a.id)), buf)?;
    let mut buf = Vec::new();
    tables::write_diff_csv(&d, &mut buf)?;
    fs::write(a.out.join(format!("table{}_diff.csv", a.id)), buf)?;
    write(&a.out.join(format!("table{}.json", a.id)), &json_document("tables", &t)?)?;
    let worst = d.iter().map(|c| c.deviation).fold(0.0, f64::max);
    println!("table {}: {} cells compared, largest deviation {}", a.id, d.len(), format_number(worst));
    Ok(())
}

#[derive(Serialize)]
struct EigenfunctionSummary {
    kind: ConstantKind,
    k: usize,
    eigenvalue: f64,
    constant: f64,
    residual: f64,
    shape: Shape,
    points: usize,
}

fn cmd_eigenfunction(a: &EigenfunctionArgs) -> Result<()> {
    let alpha = parse_angle(&a.alpha)?;
    let t = Triangle2D::new(a.h, a.rho, alpha)?;
    let basis = basis_2d(a.basis, a.n)?;
    if a.resolution < 2 {
        return Err(Error::InvalidInput("resolution must be at least 2".into()));
    }
    let kind: ConstantKind = a.kind.into();
    let rr = RayleighRitz::new(t, basis)?;
    let pairs = rr.eigenpairs(kind, a.k)?;
    let pair = pairs.last().expect("k >= 1");
    let field = sample_function(|p| evaluate_expansion(&basis, &pair.coefficients, &p) - pair.offset, &t, a.resolution)?;
    fs::create_dir_all(&a.out)?;
    let mut buf = Vec::new();
    field.write_csv(&mut buf)?;
    fs::write(a.out.join("eigenfunction.csv"), buf)?;
    let scale = if kind.is_trace() { a.h } else { a.h * a.h };
    let summary = EigenfunctionSummary {
        kind,
        k: a.k,
        eigenvalue: pair.lambda,
        constant: (1.0 / (pair.lambda * scale)).sqrt(),
        residual: pair.residual,
        shape: Shape::Triangle(t),
        points: field.points.len(),
    };
    write(&a.out.join("eigenfunction.json"), &json_document("eigenfunction", &summary)?)?;
    if a.svg {
        let title = format!("eigenfunction {} (lambda = {:.6})", a.k, pair.lambda);
        write(&a.out.join("eigenfunction.svg"), &svg_scatter(&title, &field))?;
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())))
}

fn cmd_majorant(a: &MajorantArgs) -> Result<()> {
    let mesh: MeshSpec = read_json(&a.mesh)?;
    let fields: FieldsSpec = read_json(&a.fields)?;
    let options = MajorantOptions {
        eta: match a.eta {
            EtaArg::Sum => EtaRule::Sum,
            EtaArg::RootSumOfSquares => EtaRule::RootSumOfSquares,
        },
        lambda: match a.lambda_factor {
            LambdaArg::Inverse => LambdaFactor::Inverse,
            LambdaArg::InverseSqrt => LambdaFactor::InverseSqrt,
        },
    };
    let rep = majorant::report(&mesh, &fields, options).inspect_err(|e| {
        if let Error::Inadmissible(v) = e {
            for x in v {
                eprintln!("{x}");
            }
        }
    })?;
    write(&a.out, &json_document("majorant", &rep)?)?;
    println!("majorant {}", format_number(rep.total));
    Ok(())
}

/// Runs one parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    if let Some(d) = cli.digits {
        if !(1..=300).contains(&d) {
            return Err(Error::InvalidInput("digits must lie in 1..=300".into()));
        }
        std::env::set_var(PRECISION_ENV, d.to_string());
    }
    if let Some(n) = cli.threads {
        // Fails only when a global pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match &cli.command {
        Command::Bounds2d(a) => cmd_bounds2d(a),
        Command::Bounds3d(a) => cmd_bounds3d(a),
        Command::Tables(a) => cmd_tables(a),
        Command::Eigenfunction(a) => cmd_eigenfunction(a),
        Command::Majorant(a) => cmd_majorant(a),
    }
}
