//! Command-line front end: expression parsing, argument handling and JSON
//! reports.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analytic::{AnalyticExpr, Complex, MoebiusMap};
use crate::axioms::run_all_seeded;
use crate::characterization::{
    check_invertible_with, check_isometry_with, detect_automorphism_with, inverse_symbols, validate_expr,
    CheckOptions, Verdict,
};
use crate::error::{Result, WcoError};
use crate::operators::{condition_number, finite_section, WcoSymbols, DEFAULT_SEED};
use crate::quadrature::GridConfig;
use crate::spaces::{norm, seminorm, SpaceSpec};

pub const EXIT_POSITIVE: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const PRESET_ENV: &str = "WCOLAB_GRID_PRESET";

/// Parses the expression mini-language:
/// `const(re,im)`, `poly(c0,c1,...)`, `mobius(a_re,a_im,th)`, `add(e,e)`,
/// `mul(e,e)`, `compose(outer,inner)`, `recip(e)`, `pow(e,alpha)`.
///
/// Polynomial coefficients are complex literals such as `2`, `-0.5i` or
/// `1e-3+2i`. Whitespace is ignored.
pub fn parse_expression(s: &str) -> Result<AnalyticExpr> {
    let mut p = ExprParser { src: s.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("end of input"));
    }
    Ok(e)
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, expected: &str) -> WcoError {
        WcoError::Parse { position: self.pos, expected: expected.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("'{}'", c as char)))
        }
    }

    fn ident(&mut self) -> Result<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("a function name"));
        }
        Ok((start, String::from_utf8_lossy(&self.src[start..self.pos]).to_ascii_lowercase()))
    }

    fn expr(&mut self) -> Result<AnalyticExpr> {
        let (start, name) = self.ident()?;
        self.expect(b'(')?;
        let e = match name.as_str() {
            "const" => {
                let re = self.real()?;
                self.expect(b',')?;
                let im = self.real()?;
                AnalyticExpr::constant(Complex::new(re, im))
            }
            "poly" => {
                let mut coeffs = vec![self.complex()?];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    coeffs.push(self.complex()?);
                }
                AnalyticExpr::poly(coeffs)
            }
            "mobius" => {
                let at = self.pos;
                let re = self.real()?;
                self.expect(b',')?;
                let im = self.real()?;
                self.expect(b',')?;
                let th = self.real()?;
                let m = MoebiusMap::from_angle(Complex::new(re, im), th).map_err(|_| WcoError::Parse {
                    position: at,
                    expected: "a Moebius parameter with |a| < 1".into(),
                })?;
                AnalyticExpr::moebius(m)
            }
            "add" | "mul" | "compose" => {
                let l = self.expr()?;
                self.expect(b',')?;
                let r = self.expr()?;
                match name.as_str() {
                    "add" => AnalyticExpr::add(&l, &r),
                    "mul" => AnalyticExpr::mul(&l, &r),
                    _ => AnalyticExpr::compose(&l, &r),
                }
            }
            "recip" => AnalyticExpr::recip(&self.expr()?),
            "pow" => {
                let base = self.expr()?;
                self.expect(b',')?;
                AnalyticExpr::pow(&base, self.real()?)
            }
            _ => {
                return Err(WcoError::Parse {
                    position: start,
                    expected: "one of const, poly, mobius, add, mul, compose, recip, pow".into(),
                })
            }
        };
        self.expect(b')')?;
        Ok(e)
    }

    /// Longest prefix of the form [+-]digits[.digits][(e|E)[+-]digits].
    fn number_text(&mut self) -> Option<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        if i < s.len() && (s[i] == b'+' || s[i] == b'-') {
            i += 1;
        }
        let digits_start = i;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
        }
        if i < s.len() && s[i] == b'.' {
            i += 1;
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
            }
        }
        let mantissa = &s[digits_start..i];
        if mantissa.is_empty() || mantissa == b"." {
            return None;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            let exp_digits = j;
            while j < s.len() && s[j].is_ascii_digit() {
                j += 1;
            }
            if j > exp_digits {
                i = j;
            }
        }
        self.pos = i;
        Some((start, String::from_utf8_lossy(&s[start..i]).into_owned()))
    }

    fn finite(&self, position: usize, text: &str) -> Result<f64> {
        text.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or(WcoError::Parse { position, expected: "a finite number".into() })
    }

    fn real(&mut self) -> Result<f64> {
        let (start, text) = self.number_text().ok_or_else(|| self.error("a number"))?;
        self.finite(start, &text)
    }

    /// `re`, `imi`, `re+imi`, `re-imi`, with `i` alone standing for `1i`.
    fn complex(&mut self) -> Result<Complex> {
        self.skip_ws();
        let first = self.signed_part()?;
        match first {
            Part::Imag(im) => Ok(Complex::new(0.0, im)),
            Part::Real(re) => {
                let save = self.pos;
                if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                    if let Part::Imag(im) = self.signed_part()? {
                        return Ok(Complex::new(re, im));
                    }
                    self.pos = save;
                    return Err(self.error("an imaginary part ending in 'i'"));
                }
                Ok(Complex::new(re, 0.0))
            }
        }
    }

    fn signed_part(&mut self) -> Result<Part> {
        self.skip_ws();
        let start = self.pos;
        if let Some((at, text)) = self.number_text() {
            let v = self.finite(at, &text)?;
            if self.src.get(self.pos) == Some(&b'i') {
                self.pos += 1;
                return Ok(Part::Imag(v));
            }
            return Ok(Part::Real(v));
        }
        let mut sign = 1.0;
        if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
            if self.src[self.pos] == b'-' {
                sign = -1.0;
            }
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'i') {
            self.pos += 1;
            return Ok(Part::Imag(sign));
        }
        self.pos = start;
        Err(self.error("a complex literal"))
    }
}

enum Part {
    Real(f64),
    Imag(f64),
}

#[derive(Debug, Parser)]
#[command(name = "wcolab", version, about = "Weighted composition operators on spaces of analytic functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Seed of the random test family.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub ntheta: Option<usize>,
    #[arg(long, global = true)]
    pub nradial: Option<usize>,
    #[arg(long, global = true)]
    pub rmax: Option<f64>,
    /// Also write the JSON document to this file.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SymbolArgs {
    /// Multiplication symbol F.
    #[arg(long = "F")]
    pub weight: String,
    /// Composition symbol.
    #[arg(long)]
    pub phi: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Norm of a function, with its |f(0)| + p(f) split when applicable.
    Norm {
        #[arg(long)]
        space: String,
        #[arg(long = "fn")]
        function: String,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Translation-invariant seminorm p(f).
    Seminorm {
        #[arg(long)]
        space: String,
        #[arg(long = "fn")]
        function: String,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Invertibility verdict for W_{F,phi}.
    CheckInvertible {
        #[arg(long)]
        space: String,
        #[command(flatten)]
        symbols: SymbolArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Surjective isometry verdict for W_{F,phi}.
    CheckIsometry {
        #[arg(long)]
        space: String,
        #[command(flatten)]
        symbols: SymbolArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Symbols of the inverse operator.
    Invert {
        #[arg(long)]
        space: Option<String>,
        #[command(flatten)]
        symbols: SymbolArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Axiom reports for a space.
    Axioms {
        #[arg(long)]
        space: String,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Leading N x N section of the coefficient matrix.
    Section {
        #[command(flatten)]
        symbols: SymbolArgs,
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Write the matrix as CSV, each entry a `re,im` pair.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Norm { .. } => "norm",
            Command::Seminorm { .. } => "seminorm",
            Command::CheckInvertible { .. } => "check-invertible",
            Command::CheckIsometry { .. } => "check-isometry",
            Command::Invert { .. } => "invert",
            Command::Axioms { .. } => "axioms",
            Command::Section { .. } => "section",
        }
    }

    fn grid(&self) -> &GridArgs {
        match self {
            Command::Norm { grid, .. }
            | Command::Seminorm { grid, .. }
            | Command::CheckInvertible { grid, .. }
            | Command::CheckIsometry { grid, .. }
            | Command::Invert { grid, .. }
            | Command::Axioms { grid, .. }
            | Command::Section { grid, .. } => grid,
        }
    }
}

/// What a run printed and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: impl Into<String>) -> Self {
        Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: msg.into() }
    }
}

/// Grid from the preset scale (`fast`, `default`, `fine`) and the overrides.
pub fn grid_config(args: &GridArgs, preset: Option<&str>) -> Result<GridConfig> {
    let factor = match preset.map(str::trim) {
        None | Some("") | Some("default") => 1.0,
        Some("fast") => 0.5,
        Some("fine") => 2.0,
        Some(other) => {
            return Err(WcoError::Parameter(format!(
                "{PRESET_ENV} must be fast, default or fine, got {other:?}"
            )))
        }
    };
    let base = GridConfig::default().scaled(factor)?;
    if args.ntheta.is_none() && args.nradial.is_none() && args.rmax.is_none() {
        return Ok(base);
    }
    GridConfig::new(
        args.ntheta.unwrap_or(base.n_theta),
        args.nradial.unwrap_or(base.n_radial),
        args.rmax.unwrap_or(base.r_max),
    )
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I, preset: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_POSITIVE, stdout: text, stderr: String::new() }
                }
                _ => Outcome::usage(text),
            };
        }
    };
    run(&cli.command, preset)
}

pub fn run(cmd: &Command, preset: Option<&str>) -> Outcome {
    match execute(cmd, preset) {
        Ok((code, doc)) => {
            let text = match serde_json::to_string_pretty(&doc) {
                Ok(t) => t + "\n",
                Err(e) => return Outcome::usage(format!("error: cannot serialize report: {e}\n")),
            };
            if let Some(path) = &cmd.grid().json {
                if let Err(e) = std::fs::write(path, &text) {
                    return Outcome::usage(format!("error: cannot write {}: {e}\n", path.display()));
                }
            }
            Outcome { code, stdout: text, stderr: String::new() }
        }
        Err(e) => Outcome::usage(format!("error: {e}\n")),
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| WcoError::NonFinite(e.to_string()))
}

fn parse_checked(s: &str, cfg: &GridConfig) -> Result<AnalyticExpr> {
    let e = parse_expression(s)?;
    validate_expr(&e, cfg)?;
    Ok(e)
}

fn symbols(args: &SymbolArgs, cfg: &GridConfig) -> Result<(WcoSymbols, Value)> {
    let weight = parse_checked(&args.weight, cfg)?;
    let phi = parse_checked(&args.phi, cfg)?;
    let w = WcoSymbols::new(weight, phi, cfg)?;
    let inputs = json!({ "F": w.weight.to_string(), "phi": w.phi.to_string() });
    Ok((w, inputs))
}

fn grid_inputs(cfg: &GridConfig, seed: u64) -> Value {
    json!({ "n_theta": cfg.n_theta, "n_radial": cfg.n_radial, "r_max": cfg.r_max, "seed": seed })
}

fn document(cmd: &Command, space: Option<&SpaceSpec>, mut inputs: Value, grid: Value, result: Value) -> Value {
    inputs["grid"] = grid;
    json!({
        "command": cmd.name(),
        "space": space.map(|s| s.to_string()),
        "inputs": inputs,
        "result": result,
    })
}

fn execute(cmd: &Command, preset: Option<&str>) -> Result<(i32, Value)> {
    let grid_args = cmd.grid();
    let cfg = grid_config(grid_args, preset)?;
    let seed = grid_args.seed;
    let grid = grid_inputs(&cfg, seed);
    let opts = CheckOptions { seed, ..CheckOptions::default() };
    match cmd {
        Command::Norm { space, function, .. } | Command::Seminorm { space, function, .. } => {
            let space: SpaceSpec = space.parse()?;
            let f = parse_checked(function, &cfg)?;
            let result = if matches!(cmd, Command::Norm { .. }) {
                to_value(&norm(&space, &f, &cfg)?)?
            } else {
                json!({ "seminorm": seminorm(&space, &f, &cfg)? })
            };
            let inputs = json!({ "fn": f.to_string() });
            Ok((EXIT_POSITIVE, document(cmd, Some(&space), inputs, grid, result)))
        }
        Command::CheckInvertible { space, symbols: s, .. } => {
            let space: SpaceSpec = space.parse()?;
            let (w, inputs) = symbols(s, &cfg)?;
            let report = check_invertible_with(&w, &space, &cfg, &opts)?;
            let code = match report.verdict {
                Verdict::Invertible => EXIT_POSITIVE,
                Verdict::NotInvertible => EXIT_NEGATIVE,
                Verdict::Inconclusive => EXIT_INCONCLUSIVE,
            };
            Ok((code, document(cmd, Some(&space), inputs, grid, to_value(&report)?)))
        }
        Command::CheckIsometry { space, symbols: s, .. } => {
            let space: SpaceSpec = space.parse()?;
            let (w, inputs) = symbols(s, &cfg)?;
            let report = check_isometry_with(&w, &space, &cfg, &opts)?;
            let code = if report.surjective_isometry { EXIT_POSITIVE } else { EXIT_NEGATIVE };
            Ok((code, document(cmd, Some(&space), inputs, grid, to_value(&report)?)))
        }
        Command::Invert { space, symbols: s, .. } => {
            let space: Option<SpaceSpec> = space.as_deref().map(str::parse).transpose()?;
            let (w, inputs) = symbols(s, &cfg)?;
            let fit = detect_automorphism_with(&w.phi, &cfg, &opts)?;
            let (code, result) = if fit.found {
                match inverse_symbols(&w, &fit, &cfg) {
                    Ok((g, psi)) => (
                        EXIT_POSITIVE,
                        json!({ "G": g.to_string(), "psi": psi.to_string(), "automorphism": to_value(&fit)?, "reason": null }),
                    ),
                    Err(e) => (
                        EXIT_NEGATIVE,
                        json!({ "G": null, "psi": null, "automorphism": to_value(&fit)?, "reason": e.to_string() }),
                    ),
                }
            } else {
                (
                    EXIT_NEGATIVE,
                    json!({ "G": null, "psi": null, "automorphism": to_value(&fit)?, "reason": "composition symbol is not an automorphism" }),
                )
            };
            Ok((code, document(cmd, space.as_ref(), inputs, grid, result)))
        }
        Command::Axioms { space, .. } => {
            let space: SpaceSpec = space.parse()?;
            let reports = run_all_seeded(&space, &cfg, seed);
            let ok = reports.iter().all(|r| r.passed || r.unsupported);
            let code = if ok { EXIT_POSITIVE } else { EXIT_NEGATIVE };
            Ok((code, document(cmd, Some(&space), json!({}), grid, to_value(&reports)?)))
        }
        Command::Section { symbols: s, n, csv, .. } => {
            let (w, mut inputs) = symbols(s, &cfg)?;
            inputs["n"] = json!(n);
            let section = finite_section(&w, *n, &cfg)?;
            let kappa = condition_number(&section).ok();
            let csv_path = match csv {
                Some(path) => {
                    std::fs::write(path, section.to_csv()).map_err(|e| {
                        WcoError::Parameter(format!("cannot write {}: {e}", path.display()))
                    })?;
                    Some(path.display().to_string())
                }
                None => None,
            };
            let result = json!({
                "dimension": section.dimension,
                "radius": section.radius,
                "condition_number": kappa,
                "csv": csv_path,
            });
            Ok((EXIT_POSITIVE, document(cmd, None, inputs, grid, result)))
        }
    }
}
