//! Command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::algebra::{assemble, Generator, LatticeParams, OperatorMatrix};
use crate::analysis::{extrapolate, fmt_num, run_scan, theory_b, ScanPlan};
use crate::basis::{build_basis, Basis, Convention, ModuleKind, ModuleSpec};
use crate::characters::{f0_bar, kac_character, multiplicity_d, param_from_c, partition_terms, QSeries};
use crate::error::{Error, Result};
use crate::inner::{gram, GramKind};
use crate::jordan::{j_pair, measure_b_tt_limit_with, Descent, NullKind, LIMIT_EXPONENTS};
use crate::koosaleur::{Chirality, LatticeOperators};
use crate::linalg::C64;
use crate::spectral::{identify_fields, identify_tt, FieldName, ModuleSpectrum};

/// Exit code for command-line usage errors.
pub const EXIT_USAGE: i32 = 64;

/// Default directory for files written by `scan`.
pub const OUT_DIR_ENV: &str = "LOOPJORDAN_OUT";

#[derive(Parser, Debug)]
#[command(name = "loopjordan", version, about = "Temperley-Lieb loop models, lattice Virasoro generators and emerging Jordan blocks")]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Number of sites (even).
    #[arg(long = "N", id = "sites")]
    pub n: usize,
    /// `standard:J[:PHI]`, `quotient-zero`, `glued:JMAX`, `glued-quotient:JMAX`.
    #[arg(long, default_value = "standard:0")]
    pub module: String,
    #[arg(long, default_value = "plain")]
    pub convention: String,
    /// Contraction weight for pairs of through-lines.
    #[arg(long, default_value_t = 1.0)]
    pub y: f64,
    /// Central charge.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["x", "m"])]
    pub c: Option<f64>,
    #[arg(long, conflicts_with = "m")]
    pub x: Option<f64>,
    /// Free loop weight (with `--einf`); no conformal data.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub einf: f64,
    /// Use the explicit seven-state order (N=4, glued-quotient:2).
    #[arg(long)]
    pub appendix_order: bool,
}

impl ModelArgs {
    fn convention(&self) -> Result<Convention> {
        self.convention.parse()
    }

    fn spec(&self) -> Result<ModuleSpec> {
        Ok(ModuleSpec::new(ModuleSpec::parse_kind(&self.module)?, self.convention()?).with_y(self.y))
    }

    fn basis(&self) -> Result<Basis> {
        let b = build_basis(self.spec()?, self.n)?;
        if self.appendix_order {
            b.appendix_order()
        } else {
            Ok(b)
        }
    }

    fn params(&self) -> Result<LatticeParams> {
        let conv = self.convention()?;
        match (self.c, self.x, self.m) {
            (Some(c), _, _) => LatticeParams::from_c(self.n, c, conv),
            (_, Some(x), _) => LatticeParams::from_x(self.n, x, conv),
            (_, _, Some(m)) => LatticeParams::custom(self.n, m, self.einf, conv),
            _ => Err(Error::invalid("give one of --c, --x or --m")),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorChoice {
    /// Unscaled Hamiltonian.
    H,
    /// `H_0`.
    H0,
    /// `L_n`.
    Ln,
    /// `Lbar_n`.
    Lbarn,
    /// `H_n`.
    Hn,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairChoice {
    B11,
    B12,
}

impl From<PairChoice> for NullKind {
    fn from(p: PairChoice) -> Self {
        match p {
            PairChoice::B11 => NullKind::B11,
            PairChoice::B12 => NullKind::B12,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DescentChoice {
    H,
    L,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List a module basis.
    Basis {
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value = "standard:0")]
        module: String,
        #[arg(long)]
        appendix_order: bool,
        #[arg(long)]
        json: bool,
    },
    /// Emit a generator or lattice operator as a matrix.
    Op {
        #[command(flatten)]
        model: ModelArgs,
        /// `eJ`, `tau`, `tau^P`, `1`, or one of `H`, `H0`, `Hn`, `Ln`, `Lbarn`.
        #[arg(long, default_value = "H")]
        operator: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        n: i64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Loop or Euclidean Gram matrix.
    Gram {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        euclidean: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectrum by lattice momentum, with field tags.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = OperatorChoice::H0)]
        operator: OperatorChoice,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        n: i64,
    },
    /// J of the tagged pair over sizes and central charges.
    Jscan {
        #[arg(long, value_enum, default_value_t = PairChoice::B11)]
        pair: PairChoice,
        #[arg(long = "N", value_delimiter = ',', default_values_t = [6usize, 8, 10, 12])]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1.0f64])]
        c: Vec<f64>,
        #[arg(long, default_value = "plain")]
        convention: String,
    },
    /// b1 and b2 of a tagged pair.
    Bmeasure {
        #[arg(long, value_enum, default_value_t = PairChoice::B11)]
        pair: PairChoice,
        #[arg(long = "N", value_delimiter = ',', default_values_t = [6usize, 8, 10, 12])]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1.0f64])]
        c: Vec<f64>,
        #[arg(long, default_value = "plain")]
        convention: String,
        #[arg(long, value_enum, default_value_t = DescentChoice::H)]
        descent: DescentChoice,
    },
    /// b(T, t) in the glued module as c -> 0.
    Btt {
        #[arg(long = "N")]
        n: usize,
        /// Exponents k of the sequence c = +-pi 10^(-k).
        #[arg(long, value_delimiter = ',')]
        exponents: Option<Vec<u32>>,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Characters, multiplicities and partition-function terms.
    Chars {
        #[arg(long, conflicts_with = "c")]
        x: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, default_value_t = 4.0)]
        cutoff: f64,
        #[arg(long, default_value_t = 3)]
        jmax: usize,
        /// Print D_{1,0} (which removes F_{1,1}).
        #[arg(long = "check-D10")]
        check_d10: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run a scan plan; writes CSV and a JSON manifest.
    Scan {
        #[arg(long)]
        plan: PathBuf,
        /// Output directory (default: $LOOPJORDAN_OUT or the current directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Polynomial extrapolation in 1/L.
    Extrapolate {
        /// `L:y` pairs, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        points: Vec<String>,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        /// Compare against the continuum b at this x (with --pair).
        #[arg(long)]
        x: Option<f64>,
        #[arg(long, value_enum)]
        pair: Option<PairChoice>,
    },
}

fn c64_pair(z: C64) -> serde_json::Value {
    json!([z.re, z.im])
}

fn matrix_json(label: &str, basis: &Basis, dense: &faer::Mat<C64>) -> serde_json::Value {
    let rows: Vec<Vec<serde_json::Value>> = (0..dense.nrows()).map(|r| (0..dense.ncols()).map(|c| c64_pair(dense[(r, c)])).collect()).collect();
    json!({
        "label": label,
        "N": basis.n_sites(),
        "states": basis.states().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "data": rows,
    })
}

fn matrix_csv(dense: &faer::Mat<C64>) -> String {
    let mut out = String::from("row,col,re,im\n");
    for r in 0..dense.nrows() {
        for c in 0..dense.ncols() {
            let z = dense[(r, c)];
            let _ = writeln!(out, "{r},{c},{},{}", fmt_num(z.re), fmt_num(z.im));
        }
    }
    out
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            let _ = so.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = so.write_all(b"\n");
            }
            Ok(())
        }
    }
}

fn lattice_operator(model: &ModelArgs, operator: &str, n: i64) -> Result<(Basis, OperatorMatrix)> {
    let basis = model.basis()?;
    let params = model.params()?;
    let op = match operator {
        "H" | "H0" | "Hn" | "Ln" | "Lbarn" => {
            let ops = LatticeOperators::new(basis.clone(), params)?;
            match operator {
                "H" => ops.hamiltonian_unscaled(),
                "H0" => ops.h_n(0)?,
                "Hn" => ops.h_n(n)?,
                "Ln" => ops.koo_saleur(n, Chirality::Left)?,
                _ => ops.koo_saleur(n, Chirality::Right)?,
            }
        }
        g => assemble(g.parse::<Generator>()?, &basis, &params)?,
    };
    Ok((basis, op))
}

fn state_tags(model: &ModelArgs, spectrum: &ModuleSpectrum, ops: &LatticeOperators) -> Vec<(usize, usize, FieldName)> {
    // (momentum, index in sector, tag)
    let mut out = Vec::new();
    let locate = |v: &[C64]| {
        spectrum.sectors.iter().find_map(|(p, data)| {
            data.iter()
                .position(|d| crate::linalg::dot(&d.eigenvector, v).norm() > 1.0 - 1e-9)
                .map(|i| (*p, i))
        })
    };
    let kind = ModuleSpec::parse_kind(&model.module).ok();
    let tagged: Vec<(FieldName, Vec<C64>)> = match kind {
        Some(ModuleKind::Standard { j: 1, phi }) if phi == 0.0 => identify_fields(spectrum, &[FieldName::Alpha, FieldName::Beta, FieldName::Phi11])
            .into_iter()
            .flatten()
            .map(|t| (t.tag, t.datum.eigenvector))
            .collect(),
        Some(ModuleKind::Standard { j: 2, phi }) if phi == 0.0 => identify_fields(spectrum, &[FieldName::Mu, FieldName::Nu, FieldName::Phi12])
            .into_iter()
            .flatten()
            .map(|t| (t.tag, t.datum.eigenvector))
            .collect(),
        Some(ModuleKind::Glued { .. } | ModuleKind::GluedQuotient { .. }) => ops
            .h_n(-2)
            .ok()
            .and_then(|a| identify_tt(spectrum, &a.op).ok())
            .map(|ts| ts.into_iter().map(|t| (t.tag, t.datum.eigenvector)).collect())
            .unwrap_or_default(),
        _ => vec![(FieldName::I, spectrum.ground().eigenvector.clone())],
    };
    for (tag, v) in tagged {
        if let Some((p, i)) = locate(&v) {
            out.push((p, i, tag));
        }
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Basis { n, module, appendix_order, json } => {
            let spec = ModuleSpec::new(ModuleSpec::parse_kind(&module)?, Convention::Plain);
            let mut b = build_basis(spec, n)?;
            if appendix_order {
                b = b.appendix_order()?;
            }
            if json {
                emit(&serde_json::to_string_pretty(&b.to_json()).expect("serializable"), None)
            } else {
                let text: Vec<String> = b.states().iter().map(|s| s.to_string()).collect();
                emit(&text.join("\n"), None)
            }
        }
        Command::Op { model, operator, n, format, out } => {
            let (basis, op) = lattice_operator(&model, &operator, n)?;
            let dense = op.to_dense();
            let text = match format {
                Format::Json => serde_json::to_string(&matrix_json(&op.label, &basis, &dense)).expect("serializable"),
                Format::Csv => matrix_csv(&dense),
            };
            emit(&text, out.as_deref())
        }
        Command::Gram { model, euclidean, format, out } => {
            let basis = model.basis()?;
            let kind = if euclidean { GramKind::Euclidean } else { GramKind::Loop };
            let g = gram(&basis, kind, &model.params()?)?;
            let text = match format {
                Format::Json => serde_json::to_string(&matrix_json(&format!("{kind:?}"), &basis, &g.data)).expect("serializable"),
                Format::Csv => matrix_csv(&g.data),
            };
            emit(&text, out.as_deref())
        }
        Command::Spectrum { model, operator, n } => {
            let basis = model.basis()?;
            let params = model.params()?;
            let sectors = basis.sectors();
            let ops = LatticeOperators::new(basis, params)?;
            let op = match operator {
                OperatorChoice::H => ops.hamiltonian_unscaled(),
                OperatorChoice::H0 => ops.h_n(0)?,
                OperatorChoice::Hn => ops.h_n(n)?,
                OperatorChoice::Ln => ops.koo_saleur(n, Chirality::Left)?,
                OperatorChoice::Lbarn => ops.koo_saleur(n, Chirality::Right)?,
            };
            let tau = ops.tau(1)?;
            let spectrum = ModuleSpectrum::new(&op.op, &tau.op, params.n, sectors)?;
            let tags = if matches!(operator, OperatorChoice::H0) && params.has_conformal_data() {
                state_tags(&model, &spectrum, &ops)
            } else {
                Vec::new()
            };
            let mut text = String::from("N,c,module,p,re,im,weight,tag\n");
            for (p, data) in &spectrum.sectors {
                for (i, d) in data.iter().enumerate() {
                    let tag = tags.iter().filter(|t| t.0 == *p && t.1 == i).map(|t| t.2.to_string()).collect::<Vec<_>>().join("/");
                    let _ = writeln!(
                        text,
                        "{},{},{},{},{},{},{},{}",
                        params.n,
                        fmt_num(params.c),
                        model.module.replace(',', ";"),
                        p,
                        fmt_num(d.eigenvalue.re),
                        fmt_num(d.eigenvalue.im),
                        fmt_num(d.eigenvalue.re),
                        tag
                    );
                }
            }
            emit(&text, None)
        }
        Command::Jscan { pair, sizes, c, convention } => {
            let conv: Convention = convention.parse()?;
            let kind: NullKind = pair.into();
            let cells: Vec<(usize, f64)> = sizes.iter().flat_map(|&n| c.iter().map(move |&c| (n, c))).collect();
            use rayon::prelude::*;
            let res: Vec<Result<f64>> = cells.par_iter().map(|&(n, c)| j_pair(kind, n, c, conv)).collect();
            let mut text = String::from("N,c,pair,J,marker\n");
            for ((n, c), r) in cells.iter().zip(res) {
                match r {
                    Ok(j) => writeln!(text, "{n},{},{kind:?},{},", fmt_num(*c), fmt_num(j)),
                    Err(e) => writeln!(text, "{n},{},{kind:?},,{}", fmt_num(*c), e.to_string().replace(',', ";")),
                }
                .expect("string write");
            }
            emit(&text, None)
        }
        Command::Bmeasure { pair, sizes, c, convention, descent } => {
            let mut plan = ScanPlan { kind: pair.into(), sizes, c_values: c, convention: convention.parse()?, ..ScanPlan::default() };
            plan.descent = match descent {
                DescentChoice::H => Descent::Symmetric,
                DescentChoice::L => Descent::Chiral,
            };
            emit(&run_scan(&plan).to_csv(), None)
        }
        Command::Btt { n, exponents, tolerance } => {
            let ks = exponents.unwrap_or_else(|| LIMIT_EXPONENTS.to_vec());
            let lim = measure_b_tt_limit_with(n, &ks, tolerance)?;
            let mut text = String::new();
            let _ = writeln!(text, "N = {n}");
            let _ = writeln!(text, "k,c,b1(+c),b2(+c),b1(-c),b2(-c),b1_mean,b2_mean");
            for s in &lim.steps {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{},{}",
                    s.k,
                    fmt_num(s.c),
                    fmt_num(s.plus.0),
                    fmt_num(s.plus.1),
                    fmt_num(s.minus.0),
                    fmt_num(s.minus.1),
                    fmt_num(s.mean.0),
                    fmt_num(s.mean.1)
                );
            }
            for (i, r) in lim.richardson.iter().enumerate() {
                let _ = writeln!(text, "richardson {}: b1 = {}, b2 = {}", i + 1, fmt_num(r.0), fmt_num(r.1));
            }
            let _ = writeln!(text, "spread = {}, max |Im b| = {}", fmt_num(lim.spread), fmt_num(lim.max_imag));
            let _ = writeln!(text, "b = {} (b1), {} (b2)", fmt_num(lim.b1), fmt_num(lim.b2));
            emit(&text, None)
        }
        Command::Chars { x, c, cutoff, jmax, check_d10, json } => {
            let x = match (x, c) {
                (Some(x), _) => x,
                (None, Some(c)) => param_from_c(c)?,
                _ => return Err(Error::invalid("give --x or --c")),
            };
            if !(x > 0.0) {
                return Err(Error::invalid(format!("x must be positive, got {x}")));
            }
            let mut text = String::new();
            if check_d10 {
                let _ = writeln!(text, "D_1,0 = {}", fmt_num(multiplicity_d(1, 0.0, x)?));
            }
            let terms = partition_terms(x, cutoff, jmax)?;
            if json {
                let value = json!({
                    "x": x,
                    "F0bar_check": series_json(&f0_bar(x, cutoff)?),
                    "K11": series_json(&kac_character(1, 1, x, cutoff.max(0.0) as usize)?),
                    "terms": terms.iter().map(|t| json!({"label": t.label, "coefficient": t.coefficient, "series": series_json(&t.series)})).collect::<Vec<_>>(),
                });
                let _ = writeln!(text, "{}", serde_json::to_string_pretty(&value).expect("serializable"));
            } else {
                for t in &terms {
                    let _ = writeln!(text, "{}  coefficient {}", t.label, fmt_num(t.coefficient));
                    for (h, hb, k) in &t.series.terms {
                        let _ = writeln!(text, "  {}  {}  {}", fmt_num(*h), fmt_num(*hb), fmt_num(*k));
                    }
                    for w in &t.series.warnings {
                        let _ = writeln!(text, "  warning: {w}");
                    }
                }
            }
            emit(&text, None)
        }
        Command::Scan { plan, out } => {
            let text = fs::read_to_string(&plan).map_err(|e| Error::invalid(format!("cannot read {}: {e}", plan.display())))?;
            let plan_value = ScanPlan::parse(&text)?;
            let table = run_scan(&plan_value);
            let dir = out.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir).map_err(|e| Error::invalid(format!("cannot create {}: {e}", dir.display())))?;
            let stem = plan.file_stem().and_then(|s| s.to_str()).unwrap_or("scan").to_string();
            emit(&table.to_csv(), Some(&dir.join(format!("{stem}.csv"))))?;
            let manifest = serde_json::to_string_pretty(&table.manifest()).expect("serializable");
            emit(&manifest, Some(&dir.join(format!("{stem}.manifest.json"))))?;
            emit(&format!("{} cells written to {}", table.cells.len(), dir.display()), None)
        }
        Command::Extrapolate { points, degree, x, pair } => {
            let pts = points
                .iter()
                .map(|p| {
                    let (l, y) = p.split_once(':').ok_or_else(|| Error::invalid(format!("point {p:?} is not L:y")))?;
                    let f = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad number in {p:?}")));
                    Ok((f(l)?, f(y)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let e = extrapolate(&pts, degree)?;
            let mut text = String::new();
            let _ = writeln!(text, "limit = {}", fmt_num(e.limit));
            let _ = writeln!(text, "coefficients = {}", e.coefficients.iter().map(|c| fmt_num(*c)).collect::<Vec<_>>().join(","));
            let _ = writeln!(text, "residual = {}", fmt_num(e.residual));
            let _ = writeln!(text, "sensitivity = {}", e.sensitivity.map_or("n/a".into(), fmt_num));
            if let (Some(x), Some(p)) = (x, pair) {
                let th = theory_b(p.into(), x)?;
                let _ = writeln!(text, "theory = {}, relative deviation = {}", fmt_num(th), fmt_num(e.limit / th - 1.0));
            }
            emit(&text, None)
        }
    }
}

fn series_json(s: &QSeries) -> serde_json::Value {
    json!({
        "shift": s.shift,
        "cutoff": s.cutoff,
        "terms": s.terms.iter().map(|t| json!([t.0, t.1, t.2])).collect::<Vec<_>>(),
        "warnings": s.warnings,
    })
}

/// Parses `args`, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    if let Some(j) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
