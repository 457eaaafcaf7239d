//! Decision procedures for invertibility and surjective isometry of weighted
//! composition operators, with their numerical ingredients: zero counting,
//! automorphism fitting and multiplier tests.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{AnalyticExpr, Complex, MoebiusMap, Node};
use crate::error::{Result, WcoError};
use crate::operators::{condition_number, default_family, finite_section, WcoSymbols, DEFAULT_SEED};
use crate::quadrature::{GridConfig, SupSearch};
use crate::spaces::{log_bloch_weight, norm, seminorm, SpaceSpec};

/// Modulus below which a contour is considered to carry a zero.
pub const CONTOUR_ZERO_TOL: f64 = 1e-9;
/// Modulus below which a grid value counts as a zero.
pub const NONVANISHING_TOL: f64 = 1e-9;
pub const TREND_WINDOW: usize = 6;
pub const TREND_SLOPE_LIMIT: f64 = 0.05;
pub const EMPIRICAL_MULTIPLIER_LIMIT: f64 = 1e3;
pub const SECTION_SIZES: [usize; 3] = [8, 16, 32];

const MAX_BISECTIONS: u32 = 30;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOptions {
    /// Seed of the random part of the test family.
    pub seed: u64,
    /// Largest accepted grid residual of an automorphism fit.
    pub auto_tol: f64,
    pub unimodular_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            seed: DEFAULT_SEED,
            auto_tol: 1e-8,
            unimodular_tol: 1e-9,
        }
    }
}

fn grid_values(f: &AnalyticExpr, cfg: &GridConfig) -> Result<Vec<(Complex, Complex)>> {
    cfg.grid_points()
        .into_par_iter()
        .map(|z| Ok((z, f.eval(z)?)))
        .collect()
}

/// Winding number of f along |z| = r, i.e. the number of zeros inside.
///
/// An arc between samples is bisected while its phase increment exceeds π/4,
/// either measured or predicted from the phase speed Re(z f'/f).
pub fn count_zeros(f: &AnalyticExpr, r: f64, cfg: &GridConfig) -> Result<i64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(WcoError::Parameter(format!("contour radius {r} must lie in (0, 1)")));
    }
    let n = cfg.n_theta;
    let samples: Vec<ContourSample> = (0..n)
        .map(|j| ContourSample::at(f, r, cfg.angle(j)))
        .collect::<Result<_>>()?;
    let min_modulus = samples.iter().map(|s| s.w.norm()).fold(f64::INFINITY, f64::min);
    if !(min_modulus >= CONTOUR_ZERO_TOL) {
        return Err(WcoError::ContourZero { radius: r, min_modulus });
    }
    let mut total = 0.0;
    for j in 0..n {
        let mut end = samples[(j + 1) % n];
        end.t = samples[j].t + 2.0 * PI / n as f64;
        total += arc_phase(f, r, samples[j], end, MAX_BISECTIONS)?;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

#[derive(Clone, Copy)]
struct ContourSample {
    t: f64,
    w: Complex,
    /// d arg f(re^{it}) / dt.
    speed: f64,
}

impl ContourSample {
    fn at(f: &AnalyticExpr, r: f64, t: f64) -> Result<Self> {
        let z = Complex::from_polar(r, t);
        let j = f.eval_jet(z)?;
        let speed = if j.f.norm() > 0.0 { (z * j.df / j.f).re } else { f64::INFINITY };
        Ok(ContourSample { t, w: j.f, speed })
    }
}

fn arc_phase(f: &AnalyticExpr, r: f64, a: ContourSample, b: ContourSample, depth: u32) -> Result<f64> {
    let d = (b.w / a.w).arg();
    let predicted = a.speed.abs().max(b.speed.abs()) * (b.t - a.t);
    if (d.abs() <= PI / 4.0 && predicted <= PI / 4.0) || depth == 0 {
        return Ok(d);
    }
    let m = ContourSample::at(f, r, 0.5 * (a.t + b.t))?;
    if m.w.norm() < CONTOUR_ZERO_TOL {
        return Err(WcoError::ContourZero { radius: r, min_modulus: m.w.norm() });
    }
    Ok(arc_phase(f, r, a, m, depth - 1)? + arc_phase(f, r, m, b, depth - 1)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AutomorphismFit {
    pub found: bool,
    pub map: Option<MoebiusMap>,
    /// Grid sup of |φ − map|; absent when no candidate could be built.
    pub residual: Option<f64>,
    pub zero_count: i64,
}

impl AutomorphismFit {
    fn rejected(zero_count: i64, residual: Option<f64>) -> Self {
        AutomorphismFit { found: false, map: None, residual, zero_count }
    }
}

pub fn detect_automorphism(phi: &AnalyticExpr, cfg: &GridConfig) -> Result<AutomorphismFit> {
    detect_automorphism_with(phi, cfg, &CheckOptions::default())
}

/// Fits λ(a − z)/(1 − āz) to φ: a is the unique zero (located by Newton's
/// method), λ comes from φ(0) = λa, or from φ'(0) when a is near 0.
pub fn detect_automorphism_with(
    phi: &AnalyticExpr,
    cfg: &GridConfig,
    opts: &CheckOptions,
) -> Result<AutomorphismFit> {
    let zero_count = count_zeros(phi, cfg.r_max, cfg)?;
    if zero_count != 1 {
        return Ok(AutomorphismFit::rejected(zero_count, None));
    }
    let values = grid_values(phi, cfg)?;
    let mut z = values
        .iter()
        .min_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .map(|&(z, _)| z)
        .expect("grid is nonempty");
    for _ in 0..100 {
        let j = phi.eval_jet(z)?;
        if j.df.norm() == 0.0 {
            return Ok(AutomorphismFit::rejected(zero_count, None));
        }
        let step = j.f / j.df;
        let next = z - step;
        if !(next.norm() < 1.0) {
            return Ok(AutomorphismFit::rejected(zero_count, None));
        }
        z = next;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    let a = z;
    let j0 = phi.eval_jet(Complex::new(0.0, 0.0))?;
    let raw = if a.norm() > 1e-3 {
        j0.f / a
    } else {
        -j0.df / (1.0 - a.norm_sqr())
    };
    if !(raw.norm() > 1e-12) || !raw.is_finite() {
        return Ok(AutomorphismFit::rejected(zero_count, None));
    }
    let map = MoebiusMap::new(a, raw / raw.norm())?;
    let residual = values
        .par_iter()
        .map(|&(z, w)| (w - map.eval(z)).norm())
        .reduce(|| 0.0, f64::max);
    if residual <= opts.auto_tol {
        Ok(AutomorphismFit { found: true, map: Some(map), residual: Some(residual), zero_count })
    } else {
        Ok(AutomorphismFit::rejected(zero_count, Some(residual)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MultiplierStatus {
    #[serde(rename = "Yes_Exact")]
    YesExact,
    #[serde(rename = "No_Exact")]
    NoExact,
    #[serde(rename = "Yes_Empirical")]
    YesEmpirical,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplierVerdict {
    pub status: MultiplierStatus,
    pub measured_constant: f64,
    pub criterion: String,
    /// Grid sup of |u| when it was measured.
    pub sup_modulus: Option<f64>,
}

/// Least-squares slope of the per-circle maximum of g against log(1/(1 − r))
/// over the outermost sup radii.
pub fn boundary_trend<G>(g: G, cfg: &GridConfig) -> Result<f64>
where
    G: Fn(Complex) -> Result<f64> + Sync,
{
    let k = cfg.sup_radii.len();
    let radii = &cfg.sup_radii[k.saturating_sub(TREND_WINDOW)..];
    if radii.len() < 2 {
        return Ok(0.0);
    }
    let maxima: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            cfg.circle(r)
                .map(&g)
                .try_fold(f64::NEG_INFINITY, |m, v| v.map(|v| m.max(v)))
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = radii.iter().map(|r| (1.0 / (1.0 - r)).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = maxima.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&maxima).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// sup over the disk of (1 − |z|²) log(2/(1 − |z|²)) |u'(z)|.
pub fn log_weight_derivative_sup(u: &AnalyticExpr, cfg: &GridConfig) -> Result<f64> {
    Ok(SupSearch::for_grid(cfg)
        .run(|z| Ok(log_bloch_weight(z.norm_sqr(), 1.0) * u.eval_jet(z)?.df.norm()))?
        .value)
}

/// Sup of g and whether its boundary trend shows divergence.
fn bounded_sup<G>(g: G, cfg: &GridConfig) -> Result<(f64, bool)>
where
    G: Fn(Complex) -> Result<f64> + Sync,
{
    let sup = SupSearch::for_grid(cfg).run(&g)?.value;
    let slope = boundary_trend(&g, cfg)?;
    Ok((sup, slope > TREND_SLOPE_LIMIT))
}

fn numerically_constant(u: &AnalyticExpr, cfg: &GridConfig) -> Result<Option<Complex>> {
    if let Some(c) = u.as_constant() {
        return Ok(Some(c));
    }
    let values = grid_values(u, cfg)?;
    let c = values[0].1;
    let spread = values.iter().map(|(_, w)| (w - c).norm()).fold(0.0, f64::max);
    Ok((spread <= 1e-12 * (1.0 + c.norm())).then_some(c))
}

pub fn multiplier_test(u: &AnalyticExpr, space: &SpaceSpec, cfg: &GridConfig) -> MultiplierVerdict {
    multiplier_test_with(u, space, cfg, &CheckOptions::default())
}

/// Exact criteria for Bloch(1) and the families whose multipliers are the
/// bounded functions; otherwise unboundedness is an exact negative and
/// boundedness is backed only by norm ratios over the test family.
pub fn multiplier_test_with(
    u: &AnalyticExpr,
    space: &SpaceSpec,
    cfg: &GridConfig,
    opts: &CheckOptions,
) -> MultiplierVerdict {
    match multiplier_test_inner(u, space, cfg, opts) {
        Ok(v) => v,
        Err(e) => MultiplierVerdict {
            status: MultiplierStatus::Inconclusive,
            measured_constant: f64::NAN,
            criterion: format!("evaluation failed: {e}"),
            sup_modulus: None,
        },
    }
}

fn multiplier_test_inner(
    u: &AnalyticExpr,
    space: &SpaceSpec,
    cfg: &GridConfig,
    opts: &CheckOptions,
) -> Result<MultiplierVerdict> {
    if let Some(c) = numerically_constant(u, cfg)? {
        return Ok(MultiplierVerdict {
            status: MultiplierStatus::YesExact,
            measured_constant: c.norm(),
            criterion: "constant".into(),
            sup_modulus: Some(c.norm()),
        });
    }
    let (sup_u, u_diverges) = bounded_sup(|z| Ok(u.eval(z)?.norm()), cfg)?;
    if let SpaceSpec::Bloch { beta } = space {
        if *beta == 1.0 {
            let weighted = |z: Complex| Ok(log_bloch_weight(z.norm_sqr(), 1.0) * u.eval_jet(z)?.df.norm());
            let (sup_w, w_diverges) = bounded_sup(weighted, cfg)?;
            let status = if u_diverges || w_diverges {
                MultiplierStatus::NoExact
            } else {
                MultiplierStatus::YesExact
            };
            return Ok(MultiplierVerdict {
                status,
                measured_constant: sup_w,
                criterion: "bounded with bounded log-weighted derivative".into(),
                sup_modulus: Some(sup_u),
            });
        }
    }
    if space.has_hinf_multipliers() {
        let status = if u_diverges { MultiplierStatus::NoExact } else { MultiplierStatus::YesExact };
        return Ok(MultiplierVerdict {
            status,
            measured_constant: sup_u,
            criterion: "bounded on the disk".into(),
            sup_modulus: Some(sup_u),
        });
    }
    if u_diverges {
        return Ok(MultiplierVerdict {
            status: MultiplierStatus::NoExact,
            measured_constant: sup_u,
            criterion: "unbounded, and multipliers are bounded".into(),
            sup_modulus: Some(sup_u),
        });
    }
    let family = default_family(opts.seed);
    let ratios: Vec<f64> = family
        .par_iter()
        .map(|f| Ok(norm(space, &AnalyticExpr::mul(u, f), cfg)?.total / norm(space, f, cfg)?.total))
        .collect::<Result<_>>()?;
    let worst = ratios.into_iter().fold(0.0, f64::max);
    let status = if worst <= EMPIRICAL_MULTIPLIER_LIMIT {
        MultiplierStatus::YesEmpirical
    } else {
        MultiplierStatus::Inconclusive
    };
    Ok(MultiplierVerdict {
        status,
        measured_constant: worst,
        criterion: "max norm ratio over the test family".into(),
        sup_modulus: Some(sup_u),
    })
}

/// Symbols (G, ψ) of the inverse operator: ψ = φ⁻¹ and G = 1/(F∘ψ).
pub fn inverse_symbols(
    w: &WcoSymbols,
    fit: &AutomorphismFit,
    cfg: &GridConfig,
) -> Result<(AnalyticExpr, AnalyticExpr)> {
    let map = match (fit.found, fit.map) {
        (true, Some(m)) => m,
        _ => {
            return Err(WcoError::DegenerateInput(
                "composition symbol is not a fitted automorphism".into(),
            ))
        }
    };
    let psi = AnalyticExpr::moebius(map.inverse());
    let g = match w.weight.as_constant() {
        Some(c) if c.norm() > 0.0 => AnalyticExpr::constant(c.inv()),
        Some(_) => return Err(WcoError::NonVanishingViolation("F is identically zero".into())),
        None => AnalyticExpr::recip(&AnalyticExpr::compose(&w.weight, &psi)),
    };
    for z in cfg.grid_points() {
        match g.eval(z) {
            Ok(v) if v.is_finite() => {}
            _ => {
                return Err(WcoError::NonVanishingViolation(format!(
                    "1/(F∘ψ) is not defined at z = {z}"
                )))
            }
        }
    }
    Ok((g, psi))
}

/// Grid sup of |W_{G,ψ}W_{F,φ}f − f| and |W_{F,φ}W_{G,ψ}f − f| over the family.
pub fn roundtrip_residual(
    w: &WcoSymbols,
    inverse: &WcoSymbols,
    family: &[AnalyticExpr],
    cfg: &GridConfig,
) -> Result<f64> {
    let points = cfg.grid_points();
    let left = inverse.after(w);
    let right = w.after(inverse);
    let per_f: Vec<f64> = family
        .par_iter()
        .map(|f| {
            let a = left.apply(f);
            let b = right.apply(f);
            let mut worst: f64 = 0.0;
            for &z in &points {
                let fz = f.eval(z)?;
                worst = worst.max((a.eval(z)? - fz).norm()).max((b.eval(z)? - fz).norm());
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(per_f.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Invertible,
    NotInvertible,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InverseSymbols {
    #[serde(rename = "G")]
    pub g: String,
    pub psi: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectionEvidence {
    pub n: usize,
    pub condition_number: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvertibilityReport {
    pub automorphism: AutomorphismFit,
    pub nonvanishing: bool,
    /// Smallest |F| on the grid.
    pub min_modulus: f64,
    pub zero_count: Option<i64>,
    pub reciprocal_multiplier: Option<MultiplierVerdict>,
    pub verdict: Verdict,
    pub inverse_symbols: Option<InverseSymbols>,
    pub roundtrip_residual: Option<f64>,
    /// Heuristic evidence only.
    pub section_condition_numbers: Vec<SectionEvidence>,
    pub caveat: String,
}

/// Zero count of F at r_max (retrying on slightly smaller contours) and the
/// grid minimum of |F|.
fn nonvanishing(f: &AnalyticExpr, cfg: &GridConfig) -> Result<(bool, f64, Option<i64>)> {
    let min_modulus = grid_values(f, cfg)?
        .iter()
        .map(|(_, w)| w.norm())
        .fold(f64::INFINITY, f64::min);
    let mut zero_count = None;
    for k in 0..4 {
        let r = cfg.r_max * (1.0 - 1e-7 * k as f64);
        match count_zeros(f, r, cfg) {
            Ok(n) => {
                zero_count = Some(n);
                break;
            }
            Err(WcoError::ContourZero { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let holds = zero_count == Some(0) && min_modulus > NONVANISHING_TOL;
    Ok((holds, min_modulus, zero_count))
}

pub fn check_invertible(w: &WcoSymbols, space: &SpaceSpec, cfg: &GridConfig) -> Result<InvertibilityReport> {
    check_invertible_with(w, space, cfg, &CheckOptions::default())
}

/// W_{F,φ} is invertible iff φ is an automorphism, F has no zeros and 1/F is
/// a multiplier.
pub fn check_invertible_with(
    w: &WcoSymbols,
    space: &SpaceSpec,
    cfg: &GridConfig,
    opts: &CheckOptions,
) -> Result<InvertibilityReport> {
    space.validate()?;
    let automorphism = detect_automorphism_with(&w.phi, cfg, opts)?;
    let (nonvanishing, min_modulus, zero_count) = nonvanishing(&w.weight, cfg)?;
    let reciprocal_multiplier = nonvanishing
        .then(|| multiplier_test_with(&AnalyticExpr::recip(&w.weight), space, cfg, opts));

    let verdict = if !automorphism.found || !nonvanishing {
        Verdict::NotInvertible
    } else {
        match reciprocal_multiplier.as_ref().map(|m| m.status) {
            Some(MultiplierStatus::YesExact) => Verdict::Invertible,
            Some(MultiplierStatus::NoExact) => Verdict::NotInvertible,
            _ => Verdict::Inconclusive,
        }
    };

    let (inverse_symbols, roundtrip_residual) = if verdict == Verdict::Invertible {
        let (g, psi) = inverse_symbols(w, &automorphism, cfg)?;
        let inverse = WcoSymbols::new_unchecked(g.clone(), psi.clone());
        let residual = roundtrip_residual(w, &inverse, &default_family(opts.seed), cfg)?;
        (
            Some(InverseSymbols { g: g.to_string(), psi: psi.to_string() }),
            Some(residual),
        )
    } else {
        (None, None)
    };

    let section_condition_numbers = SECTION_SIZES
        .par_iter()
        .map(|&n| SectionEvidence {
            n,
            condition_number: finite_section(w, n, cfg).and_then(|s| condition_number(&s)).ok(),
        })
        .collect();

    let caveat = format!(
        "zeros of F and of φ outside |z| <= {} are not detected; section condition numbers are heuristic evidence",
        cfg.r_max
    );
    Ok(InvertibilityReport {
        automorphism,
        nonvanishing,
        min_modulus,
        zero_count,
        reciprocal_multiplier,
        verdict,
        inverse_symbols,
        roundtrip_residual,
        section_condition_numbers,
        caveat,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsometryReport {
    pub surjective_isometry: bool,
    #[serde(rename = "F_is_unimodular_const")]
    pub f_is_unimodular_const: bool,
    pub phi_is_rotation: bool,
    pub measured_defect: f64,
    pub phi_origin_value: Complex,
}

pub fn check_isometry(w: &WcoSymbols, space: &SpaceSpec, cfg: &GridConfig) -> Result<IsometryReport> {
    check_isometry_with(w, space, cfg, &CheckOptions::default())
}

/// On spaces normed by |f(0)| + p(f), W_{F,φ} is a surjective isometry only
/// when F is a unimodular constant and φ a rotation.
pub fn check_isometry_with(
    w: &WcoSymbols,
    space: &SpaceSpec,
    cfg: &GridConfig,
    opts: &CheckOptions,
) -> Result<IsometryReport> {
    if !space.has_a6_form() {
        return Err(WcoError::UnsupportedSpace(format!(
            "{space} has no |f(0)| + p(f) norm decomposition"
        )));
    }
    let moduli: Vec<f64> = grid_values(&w.weight, cfg)?.iter().map(|(_, v)| v.norm()).collect();
    let hi = moduli.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = moduli.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = opts.unimodular_tol;
    let f_is_unimodular_const =
        (hi - 1.0).abs() <= tol && (lo - 1.0).abs() <= tol && seminorm(space, &w.weight, cfg)? < tol;

    let fit = detect_automorphism_with(&w.phi, cfg, opts)?;
    let phi_is_rotation = fit.found && fit.map.is_some_and(|m| m.a().norm() < tol);
    let phi_origin_value = w.phi.eval(Complex::new(0.0, 0.0))?;
    let measured_defect = crate::operators::isometry_defect(w, space, &default_family(opts.seed), cfg)?;
    Ok(IsometryReport {
        surjective_isometry: f_is_unimodular_const && phi_is_rotation,
        f_is_unimodular_const,
        phi_is_rotation,
        measured_defect,
        phi_origin_value,
    })
}

/// Checks the analyticity preconditions of every node on the grid: inner maps
/// of compositions stay in the disk, reciprocals have no zeros, and real
/// powers have zero-free bases whose principal argument never jumps across
/// the branch cut.
pub fn validate_expr(expr: &AnalyticExpr, cfg: &GridConfig) -> Result<()> {
    match expr.node() {
        Node::Const(_) | Node::Poly(_) | Node::Moebius(_) => Ok(()),
        Node::Add(l, r) | Node::Mul(l, r) => {
            validate_expr(l, cfg)?;
            validate_expr(r, cfg)
        }
        Node::Compose { outer, inner } => {
            validate_expr(inner, cfg)?;
            for (z, w) in grid_values(inner, cfg)? {
                if !(w.norm() < 1.0) {
                    return Err(WcoError::Domain {
                        z,
                        reason: format!("inner map of a composition reaches modulus {}", w.norm()),
                    });
                }
            }
            validate_expr(outer, cfg)
        }
        Node::Recip(inner) => {
            validate_expr(inner, cfg)?;
            let (holds, min_modulus, zero_count) = nonvanishing(inner, cfg)?;
            if !holds {
                return Err(WcoError::NonVanishingViolation(format!(
                    "reciprocal of {inner}: zero count {zero_count:?}, min modulus {min_modulus:e}"
                )));
            }
            Ok(())
        }
        Node::Pow(inner, _) => {
            validate_expr(inner, cfg)?;
            let (holds, min_modulus, zero_count) = nonvanishing(inner, cfg)?;
            if !holds {
                return Err(WcoError::NonVanishingViolation(format!(
                    "base of a power {inner}: zero count {zero_count:?}, min modulus {min_modulus:e}"
                )));
            }
            check_branch_continuity(inner, cfg)
        }
    }
}

/// Fails when the principal argument of f jumps by more than π between
/// neighbouring grid samples along a ring or a spoke.
fn check_branch_continuity(f: &AnalyticExpr, cfg: &GridConfig) -> Result<()> {
    let radii = cfg.scan_radii();
    let n = cfg.n_theta;
    let rows: Vec<Vec<Complex>> = radii
        .par_iter()
        .map(|&r| (0..n).map(|j| f.eval(Complex::from_polar(r, cfg.angle(j)))).collect())
        .collect::<Result<_>>()?;
    let jump = |a: Complex, b: Complex| (a.arg() - b.arg()).abs() > PI;
    for (i, row) in rows.iter().enumerate() {
        for j in 0..n {
            let here = row[j];
            let along = row[(j + 1) % n];
            let outward = rows.get(i + 1).map(|next| next[j]);
            if jump(here, along) || outward.is_some_and(|o| jump(here, o)) {
                return Err(WcoError::Branch { base: here });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> GridConfig {
        GridConfig::default()
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn phi_half() -> AnalyticExpr {
        AnalyticExpr::moebius(MoebiusMap::new(c(0.5, 0.0), c(1.0, 0.0)).unwrap())
    }

    #[test]
    fn zero_counts_of_simple_polynomials() {
        assert_eq!(count_zeros(&AnalyticExpr::real_poly(&[-0.5, 1.0]), 0.9, &cfg()).unwrap(), 1);
        assert_eq!(count_zeros(&AnalyticExpr::real_poly(&[2.0, 1.0]), 0.99, &cfg()).unwrap(), 0);
        assert_eq!(count_zeros(&AnalyticExpr::monomial(2), 0.5, &cfg()).unwrap(), 2);
    }

    #[test]
    fn zero_on_contour_is_reported() {
        let f = AnalyticExpr::real_poly(&[-0.5, 1.0]);
        assert!(matches!(count_zeros(&f, 0.5, &cfg()), Err(WcoError::ContourZero { .. })));
    }

    #[test]
    fn high_degree_needs_bisection() {
        // 200 zeros on |z| = 0.5^{1/200} ≈ 0.9965
        let mut coeffs = vec![0.0; 201];
        coeffs[0] = -0.5;
        coeffs[200] = 1.0;
        let f = AnalyticExpr::real_poly(&coeffs);
        assert_eq!(count_zeros(&f, 0.9999, &GridConfig::new(64, 8, 1.0 - 1e-6).unwrap()).unwrap(), 200);
    }

    #[test]
    fn detects_involution() {
        let fit = detect_automorphism(&phi_half(), &cfg()).unwrap();
        assert!(fit.found);
        let m = fit.map.unwrap();
        assert!((m.a() - c(0.5, 0.0)).norm() < 1e-12);
        assert!((m.lambda() - c(1.0, 0.0)).norm() < 1e-12);
        assert!(fit.residual.unwrap() < 1e-12);
    }

    #[test]
    fn detects_rotation_through_derivative() {
        let phi = AnalyticExpr::poly(vec![c(0.0, 0.0), Complex::from_polar(1.0, 0.3)]);
        let fit = detect_automorphism(&phi, &cfg()).unwrap();
        assert!(fit.found);
        assert!(fit.map.unwrap().a().norm() < 1e-14);
    }

    #[test]
    fn rejects_non_automorphisms() {
        let half = detect_automorphism(&AnalyticExpr::real_poly(&[0.0, 0.5]), &cfg()).unwrap();
        assert!(!half.found);
        assert_eq!(half.zero_count, 1);
        assert!(half.residual.unwrap() > 0.1);
        let square = detect_automorphism(&AnalyticExpr::monomial(2), &cfg()).unwrap();
        assert!(!square.found);
        assert_eq!(square.zero_count, 2);
    }

    #[test]
    fn constant_is_exact_multiplier() {
        for space in SpaceSpec::representatives() {
            let v = multiplier_test(&AnalyticExpr::constant(c(0.0, -3.0)), &space, &cfg());
            assert_eq!(v.status, MultiplierStatus::YesExact);
            assert_abs_diff_eq!(v.measured_constant, 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn identity_is_bloch_multiplier_with_log_weight_constant() {
        let v = multiplier_test(&AnalyticExpr::identity(), &SpaceSpec::Bloch { beta: 1.0 }, &cfg());
        assert_eq!(v.status, MultiplierStatus::YesExact);
        assert_abs_diff_eq!(v.measured_constant, 2.0 / std::f64::consts::E, epsilon = 1e-6);
    }

    #[test]
    fn bounded_reciprocal_is_hardy_multiplier() {
        let u = AnalyticExpr::recip(&AnalyticExpr::real_poly(&[2.0, 1.0]));
        let v = multiplier_test(&u, &SpaceSpec::Hardy { p: 2.0 }, &cfg());
        assert_eq!(v.status, MultiplierStatus::YesExact);
        assert!(v.measured_constant <= 1.0 + 1e-12 && v.measured_constant > 0.99);
    }

    #[test]
    fn unbounded_function_is_not_a_multiplier() {
        let u = AnalyticExpr::recip(&AnalyticExpr::real_poly(&[1.0, -1.0]));
        for space in [SpaceSpec::Hardy { p: 2.0 }, SpaceSpec::Bloch { beta: 1.0 }, SpaceSpec::BesovMin] {
            assert_eq!(multiplier_test(&u, &space, &cfg()).status, MultiplierStatus::NoExact);
        }
    }

    #[test]
    fn inverse_of_rotation_and_involution() {
        let rot = WcoSymbols::new_unchecked(AnalyticExpr::one(), AnalyticExpr::moebius(MoebiusMap::rotation(0.4)));
        let fit = detect_automorphism(&rot.phi, &cfg()).unwrap();
        let (g, psi) = inverse_symbols(&rot, &fit, &cfg()).unwrap();
        assert_eq!(g.as_constant(), Some(c(1.0, 0.0)));
        let z = c(0.3, 0.2);
        assert!((psi.eval(z).unwrap() - Complex::from_polar(1.0, -0.4) * z).norm() < 1e-14);

        let inv = WcoSymbols::new_unchecked(AnalyticExpr::one(), phi_half());
        let fit = detect_automorphism(&inv.phi, &cfg()).unwrap();
        let (_, psi) = inverse_symbols(&inv, &fit, &cfg()).unwrap();
        assert!((psi.eval(z).unwrap() - phi_half().eval(z).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn invertible_example_with_roundtrip() {
        let w = WcoSymbols::new(AnalyticExpr::real_poly(&[2.0, 1.0]), phi_half(), &cfg()).unwrap();
        let r = check_invertible(&w, &SpaceSpec::Bloch { beta: 1.0 }, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Invertible);
        assert!(r.roundtrip_residual.unwrap() < 1e-10);
        assert!(r.inverse_symbols.is_some());
        assert_eq!(r.section_condition_numbers.len(), 3);
    }

    #[test]
    fn vanishing_weight_is_not_invertible() {
        let w = WcoSymbols::new(AnalyticExpr::identity(), phi_half(), &cfg()).unwrap();
        let r = check_invertible(&w, &SpaceSpec::Hardy { p: 2.0 }, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvertible);
        assert!(!r.nonvanishing);
        assert!(r.reciprocal_multiplier.is_none());
    }

    #[test]
    fn isometry_checks() {
        let rot = WcoSymbols::new_unchecked(
            AnalyticExpr::constant(Complex::from_polar(1.0, PI / 3.0)),
            AnalyticExpr::moebius(MoebiusMap::rotation(PI / 7.0)),
        );
        let r = check_isometry(&rot, &SpaceSpec::Bloch { beta: 2.0 }, &cfg()).unwrap();
        assert!(r.surjective_isometry);
        assert!(r.measured_defect < 1e-8);

        let mob = AnalyticExpr::moebius(MoebiusMap::new(c(0.3, 0.0), c(1.0, 0.0)).unwrap());
        let w = WcoSymbols::new_unchecked(AnalyticExpr::one(), mob);
        let r = check_isometry(&w, &SpaceSpec::Bloch { beta: 1.0 }, &cfg()).unwrap();
        assert!(!r.surjective_isometry && !r.phi_is_rotation && r.f_is_unimodular_const);
        assert!((r.phi_origin_value - c(0.3, 0.0)).norm() < 1e-9);

        let w = WcoSymbols::new_unchecked(
            AnalyticExpr::real_poly(&[1.0, 0.1]),
            AnalyticExpr::moebius(MoebiusMap::rotation(1.0)),
        );
        let r = check_isometry(&w, &SpaceSpec::Bloch { beta: 1.0 }, &cfg()).unwrap();
        assert!(!r.surjective_isometry && !r.f_is_unimodular_const && r.phi_is_rotation);

        assert!(matches!(
            check_isometry(&w, &SpaceSpec::Hardy { p: 2.0 }, &cfg()),
            Err(WcoError::UnsupportedSpace(_))
        ));
    }

    #[test]
    fn validation_of_expressions() {
        let base = AnalyticExpr::real_poly(&[2.0 / 3.0, 1.0 / 3.0]);
        assert!(validate_expr(&AnalyticExpr::pow(&base, 2.5), &cfg()).is_ok());
        // z/2 − 1 stays off zero but straddles the cut
        let crossing = AnalyticExpr::real_poly(&[-1.0, 0.5]);
        assert!(matches!(
            validate_expr(&AnalyticExpr::pow(&crossing, 0.5), &cfg()),
            Err(WcoError::Branch { .. })
        ));
        let vanishing = AnalyticExpr::recip(&AnalyticExpr::real_poly(&[0.1, 1.0]));
        assert!(matches!(validate_expr(&vanishing, &cfg()), Err(WcoError::NonVanishingViolation(_))));
        let escaping = AnalyticExpr::compose(&AnalyticExpr::identity(), &AnalyticExpr::real_poly(&[0.5, 0.6]));
        assert!(matches!(validate_expr(&escaping, &cfg()), Err(WcoError::Domain { .. })));
    }
}
