//! Norm and seminorm evaluators for the space families of analytic functions
//! on the disk.
//!
//! Families whose norm splits as |f(0)| + p(f) with a translation-invariant
//! seminorm p report that split in [`NormBreakdown`].

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::analytic::{AnalyticExpr, Complex};
use crate::error::{Result, WcoError};
use crate::quadrature::{
    area_integral, circle_lp_mean, sup_over_radii, unit_interval_rule, weighted_radial_integral,
    GridConfig, SupSearch,
};

/// Radii of the a-grid used for the sup over a ∈ 𝔻 in the BMOA ⋆-norm.
pub const BMOA_A_RADII: [f64; 6] = [0.0, 0.3, 0.6, 0.8, 0.9, 0.95];
pub const BMOA_A_ANGLES: usize = 16;
/// |f''| has kinks at the zeros of f'', so the B¹ area rule uses a finer
/// angular grid.
pub const BESOV_MIN_OVERSAMPLING: usize = 4;

/// One space family together with its real parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpaceSpec {
    Hinf,
    Hardy { p: f64 },
    Bergman { p: f64, alpha: f64 },
    /// H(p, q, α); `p` and `q` may be infinite.
    MixedNorm { p: f64, q: f64, alpha: f64 },
    Growth { gamma: f64 },
    Bloch { beta: f64 },
    LogBloch { gamma: f64 },
    Bmoa,
    Besov { p: f64, alpha: f64 },
    BesovMin,
}

impl SpaceSpec {
    /// One representative of each of the ten families.
    pub fn representatives() -> Vec<SpaceSpec> {
        vec![
            SpaceSpec::Hinf,
            SpaceSpec::Hardy { p: 2.0 },
            SpaceSpec::Bergman { p: 2.0, alpha: 0.0 },
            SpaceSpec::MixedNorm { p: 2.0, q: 2.0, alpha: 1.0 },
            SpaceSpec::Growth { gamma: 1.0 },
            SpaceSpec::Bloch { beta: 1.0 },
            SpaceSpec::LogBloch { gamma: 1.0 },
            SpaceSpec::Bmoa,
            SpaceSpec::Besov { p: 2.0, alpha: 0.0 },
            SpaceSpec::BesovMin,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(WcoError::Parameter(msg));
        let p_ok = |p: f64| p >= 1.0 && !p.is_nan();
        match *self {
            SpaceSpec::Hinf | SpaceSpec::Bmoa | SpaceSpec::BesovMin => Ok(()),
            SpaceSpec::Hardy { p } if !(p_ok(p) && p.is_finite()) => {
                bad(format!("Hardy exponent p = {p} must lie in [1, inf)"))
            }
            SpaceSpec::Bergman { p, alpha } | SpaceSpec::Besov { p, alpha }
                if !(p_ok(p) && p.is_finite() && alpha > -1.0 && alpha.is_finite()) =>
            {
                bad(format!("need 1 <= p < inf and alpha > -1, got p = {p}, alpha = {alpha}"))
            }
            SpaceSpec::MixedNorm { p, q, alpha }
                if !(p_ok(p) && p_ok(q) && alpha > 0.0 && alpha.is_finite()) =>
            {
                bad(format!("need p, q >= 1 and alpha > 0, got p = {p}, q = {q}, alpha = {alpha}"))
            }
            SpaceSpec::Growth { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                bad(format!("growth exponent gamma = {gamma} must be > 0"))
            }
            SpaceSpec::Bloch { beta } if !(beta > 0.0 && beta.is_finite()) => {
                bad(format!("Bloch exponent beta = {beta} must be > 0"))
            }
            SpaceSpec::LogBloch { gamma } if !gamma.is_finite() => {
                bad(format!("log-Bloch exponent gamma = {gamma} must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// Norm of the form |f(0)| + p(f) with p translation-invariant.
    pub fn has_a6_form(&self) -> bool {
        matches!(
            self,
            SpaceSpec::Bloch { .. }
                | SpaceSpec::LogBloch { .. }
                | SpaceSpec::Bmoa
                | SpaceSpec::Besov { .. }
                | SpaceSpec::BesovMin
        )
    }

    /// Spaces whose multiplier algebra is H^∞.
    pub fn has_hinf_multipliers(&self) -> bool {
        matches!(
            self,
            SpaceSpec::Hinf
                | SpaceSpec::Hardy { .. }
                | SpaceSpec::Bergman { .. }
                | SpaceSpec::MixedNorm { .. }
                | SpaceSpec::Growth { .. }
        )
    }
}

fn fmt_exp(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        x.to_string()
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpaceSpec::Hinf => write!(f, "hinf"),
            SpaceSpec::Hardy { p } => write!(f, "hardy:{p}"),
            SpaceSpec::Bergman { p, alpha } => write!(f, "bergman:{p},{alpha}"),
            SpaceSpec::MixedNorm { p, q, alpha } => {
                write!(f, "mixed:{},{},{alpha}", fmt_exp(p), fmt_exp(q))
            }
            SpaceSpec::Growth { gamma } => write!(f, "growth:{gamma}"),
            SpaceSpec::Bloch { beta } => write!(f, "bloch:{beta}"),
            SpaceSpec::LogBloch { gamma } => write!(f, "logbloch:{gamma}"),
            SpaceSpec::Bmoa => write!(f, "bmoa"),
            SpaceSpec::Besov { p, alpha } => write!(f, "besov:{p},{alpha}"),
            SpaceSpec::BesovMin => write!(f, "b1"),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = WcoError;

    /// `hinf`, `hardy:p`, `bergman:p,a`, `mixed:p,q,a`, `growth:g`, `bloch:b`,
    /// `logbloch:g`, `bmoa`, `besov:p,a`, `b1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s, None),
        };
        let nums: Vec<f64> = match args {
            None => Vec::new(),
            Some(a) => a
                .split(',')
                .map(|t| {
                    let t = t.trim();
                    if t.eq_ignore_ascii_case("inf") {
                        return Ok(f64::INFINITY);
                    }
                    t.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| WcoError::Parameter(format!("bad space parameter {t:?}")))
                })
                .collect::<Result<_>>()?,
        };
        let arity = |n: usize| -> Result<()> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(WcoError::Parameter(format!(
                    "space {name:?} takes {n} parameter(s), got {}",
                    nums.len()
                )))
            }
        };
        let spec = match name.to_ascii_lowercase().as_str() {
            "hinf" => {
                arity(0)?;
                SpaceSpec::Hinf
            }
            "hardy" => {
                arity(1)?;
                SpaceSpec::Hardy { p: nums[0] }
            }
            "bergman" => {
                arity(2)?;
                SpaceSpec::Bergman { p: nums[0], alpha: nums[1] }
            }
            "mixed" => {
                arity(3)?;
                SpaceSpec::MixedNorm { p: nums[0], q: nums[1], alpha: nums[2] }
            }
            "growth" => {
                arity(1)?;
                SpaceSpec::Growth { gamma: nums[0] }
            }
            "bloch" => {
                arity(1)?;
                SpaceSpec::Bloch { beta: nums[0] }
            }
            "logbloch" => {
                arity(1)?;
                SpaceSpec::LogBloch { gamma: nums[0] }
            }
            "bmoa" => {
                arity(0)?;
                SpaceSpec::Bmoa
            }
            "besov" => {
                arity(2)?;
                SpaceSpec::Besov { p: nums[0], alpha: nums[1] }
            }
            "b1" => {
                arity(0)?;
                SpaceSpec::BesovMin
            }
            other => return Err(WcoError::Parameter(format!("unknown space family {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for SpaceSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormBreakdown {
    pub total: f64,
    /// |f(0)| for families with the |f(0)| + p(f) form, 0 otherwise.
    pub point_part: f64,
    /// p(f) for families with the |f(0)| + p(f) form; the whole norm otherwise.
    pub seminorm_part: f64,
    pub has_a6_form: bool,
}

impl NormBreakdown {
    fn split(point_part: f64, seminorm_part: f64) -> Self {
        NormBreakdown {
            total: point_part + seminorm_part,
            point_part,
            seminorm_part,
            has_a6_form: true,
        }
    }

    fn single(total: f64) -> Self {
        NormBreakdown {
            total,
            point_part: 0.0,
            seminorm_part: total,
            has_a6_form: false,
        }
    }
}

const ORIGIN: Complex = Complex::new(0.0, 0.0);

pub fn norm(space: &SpaceSpec, f: &AnalyticExpr, cfg: &GridConfig) -> Result<NormBreakdown> {
    space.validate()?;
    match *space {
        SpaceSpec::Hinf => Ok(NormBreakdown::single(
            SupSearch::for_grid(cfg).run(|z| Ok(f.eval(z)?.norm()))?.value,
        )),
        SpaceSpec::Hardy { p } => {
            // integral means are nondecreasing in r
            let r = *cfg.sup_radii.last().expect("validated grid");
            Ok(NormBreakdown::single(modulus_mean(f, p, r, cfg)?))
        }
        SpaceSpec::Bergman { p, alpha } => {
            let v = weighted_radial_integral(|r| Ok(modulus_mean(f, p, r, cfg)?.powf(p)), alpha, cfg)?;
            Ok(NormBreakdown::single(v.powf(1.0 / p)))
        }
        SpaceSpec::MixedNorm { p, q, alpha } => Ok(NormBreakdown::single(mixed_norm(f, p, q, alpha, cfg)?)),
        SpaceSpec::Growth { gamma } => {
            let v = SupSearch::for_grid(cfg)
                .run(|z| Ok((1.0 - z.norm_sqr()).powf(gamma) * f.eval(z)?.norm()))?
                .value;
            Ok(NormBreakdown::single(v))
        }
        SpaceSpec::Bloch { beta } => {
            let v = SupSearch::for_grid(cfg)
                .run(|z| Ok((1.0 - z.norm_sqr()).powf(beta) * f.eval_jet(z)?.df.norm()))?
                .value;
            Ok(NormBreakdown::split(f.eval(ORIGIN)?.norm(), v))
        }
        SpaceSpec::LogBloch { gamma } => {
            let v = SupSearch::for_grid(cfg)
                .run(|z| Ok(log_bloch_weight(z.norm_sqr(), gamma) * f.eval_jet(z)?.df.norm()))?
                .value;
            Ok(NormBreakdown::split(f.eval(ORIGIN)?.norm(), v))
        }
        SpaceSpec::Bmoa => Ok(NormBreakdown::split(f.eval(ORIGIN)?.norm(), bmoa_seminorm(f, cfg)?)),
        SpaceSpec::Besov { p, alpha } => {
            let v = weighted_radial_integral(
                |r| Ok(circle_mean(|z| Ok(f.eval_jet(z)?.df.norm()), p, r, cfg)?.powf(p)),
                alpha,
                cfg,
            )?;
            Ok(NormBreakdown::split(f.eval(ORIGIN)?.norm(), v.powf(1.0 / p)))
        }
        SpaceSpec::BesovMin => {
            let j0 = f.eval_jet(ORIGIN)?;
            let mut fine = cfg.clone();
            fine.n_theta *= BESOV_MIN_OVERSAMPLING;
            let area = area_integral(|z| Ok(f.eval_jet(z)?.d2f.norm()), &fine)?;
            // the translation-invariant part is |f'(0)| + ∫|f''| dA
            Ok(NormBreakdown::split(j0.f.norm(), j0.df.norm() + area))
        }
    }
}

/// The translation-invariant seminorm p(f) of a family with the
/// |f(0)| + p(f) norm form.
pub fn seminorm(space: &SpaceSpec, f: &AnalyticExpr, cfg: &GridConfig) -> Result<f64> {
    if !space.has_a6_form() {
        return Err(WcoError::UnsupportedSpace(format!(
            "{space} has no |f(0)| + p(f) norm decomposition"
        )));
    }
    Ok(norm(space, f, cfg)?.seminorm_part)
}

fn circle_mean<G>(g: G, p: f64, r: f64, cfg: &GridConfig) -> Result<f64>
where
    G: Fn(Complex) -> Result<f64>,
{
    if r == 0.0 {
        return g(ORIGIN);
    }
    circle_lp_mean(g, p, r, cfg)
}

fn modulus_mean(f: &AnalyticExpr, p: f64, r: f64, cfg: &GridConfig) -> Result<f64> {
    circle_mean(|z| Ok(f.eval(z)?.norm()), p, r, cfg)
}

fn mixed_norm(f: &AnalyticExpr, p: f64, q: f64, alpha: f64, cfg: &GridConfig) -> Result<f64> {
    if q.is_infinite() {
        return sup_over_radii(|r| Ok((1.0 - r * r).powf(alpha) * modulus_mean(f, p, r, cfg)?), cfg);
    }
    let v = weighted_radial_integral(|r| Ok(modulus_mean(f, p, r, cfg)?.powf(q)), alpha * q - 1.0, cfg)?;
    Ok(v.powf(1.0 / q))
}

/// (1 − t) log^γ(2/(1 − t)) with t = |z|².
pub(crate) fn log_bloch_weight(t: f64, gamma: f64) -> f64 {
    let s = 1.0 - t;
    s * (2.0 / s).ln().powf(gamma)
}

/// sup over the a-grid (refined locally) of (∫|f'|²(1 − |φ_a|²) dA)^{1/2}.
fn bmoa_seminorm(f: &AnalyticExpr, cfg: &GridConfig) -> Result<f64> {
    let nodes = cfg.disk_nodes();
    let weighted: Vec<(Complex, f64)> = nodes
        .par_iter()
        .map(|&(z, w)| Ok((z, w * (1.0 - z.norm_sqr()) * f.eval_jet(z)?.df.norm_sqr())))
        .collect::<Result<_>>()?;
    if weighted.iter().all(|&(_, v)| v == 0.0) {
        return Ok(0.0);
    }
    const CHUNK: usize = 4096;
    let garsia = |a: Complex| -> Result<f64> {
        let ac = a.conj();
        let one = Complex::new(1.0, 0.0);
        let partial: Vec<f64> = weighted
            .par_chunks(CHUNK)
            .map(|chunk| {
                chunk
                    .iter()
                    .map(|&(z, v)| v / (one - ac * z).norm_sqr())
                    .sum::<f64>()
            })
            .collect();
        let s: f64 = partial.iter().sum();
        Ok(((1.0 - a.norm_sqr()) * s).max(0.0).sqrt())
    };
    let search = SupSearch {
        radii: BMOA_A_RADII.to_vec(),
        n_angles: BMOA_A_ANGLES,
        candidates: 3,
        max_rounds: 6,
        x_tol: 1e-7,
        r_cap: 0.99,
    };
    Ok(search.run(garsia)?.value)
}

/// Bound B(r) with |f(z) − f(0)| ≤ B(|z|)‖f‖ for every f in the space.
///
/// For the |f(0)| + p(f) families this is the radial integral of the
/// pointwise derivative estimate, evaluated exactly. For the others it comes
/// from the growth rate K of point evaluations: f − f(0) vanishes at 0, so by
/// the Schwarz lemma on |w| = ρ = (1 + r)/2 it is at most (r/ρ)(K(ρ) + 1)‖f‖.
pub fn pointeval_bound(space: &SpaceSpec, r: f64) -> Result<f64> {
    space.validate()?;
    if !(0.0..1.0).contains(&r) {
        return Err(WcoError::Parameter(format!("radius {r} must lie in [0, 1)")));
    }
    let s = 1.0 - r * r;
    Ok(match *space {
        SpaceSpec::Bloch { beta } => bloch_increment(beta, r),
        SpaceSpec::LogBloch { gamma } => log_bloch_increment(gamma, r),
        // Bloch seminorm ≤ √2 × ⋆-seminorm (first Taylor coefficient of f∘φ_a)
        SpaceSpec::Bmoa => std::f64::consts::SQRT_2 * bloch_increment(1.0, r),
        SpaceSpec::Besov { p, alpha } => bloch_increment((2.0 + alpha) / p, r),
        SpaceSpec::BesovMin => {
            r - 0.25 * s.ln() + 0.25 * ((1.0 + r) * (1.0 + r).ln() + (1.0 - r) * (1.0 - r).ln())
        }
        _ => {
            let rho = 0.5 * (1.0 + r);
            (r / rho) * (growth_rate(space, rho)? + 1.0)
        }
    })
}

/// Bound K(r) with |f(z)| ≤ K(|z|)‖f‖, for the families normed without
/// derivatives.
pub fn growth_rate(space: &SpaceSpec, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(WcoError::Parameter(format!("radius {r} must lie in [0, 1)")));
    }
    let s = 1.0 - r * r;
    match *space {
        SpaceSpec::Hinf => Ok(1.0),
        SpaceSpec::Hardy { p } => Ok(s.powf(-1.0 / p)),
        SpaceSpec::Bergman { p, alpha } => Ok(s.powf(-(2.0 + alpha) / p)),
        SpaceSpec::MixedNorm { p, alpha, .. } => {
            let rho = 0.5 * (1.0 + r);
            let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
            Ok((1.0 - rho * rho).powf(-alpha) * (rho * rho / (rho * rho - r * r)).powf(inv_p))
        }
        SpaceSpec::Growth { gamma } => Ok(s.powf(-gamma)),
        _ => Err(WcoError::UnsupportedSpace(format!("{space} is normed through derivatives"))),
    }
}

/// ∫₀^r (1 − ρ²)^{−β} dρ.
pub fn bloch_increment(beta: f64, r: f64) -> f64 {
    if beta == 1.0 {
        return 0.5 * ((1.0 + r) / (1.0 - r)).ln();
    }
    radial_singular_integral(|rho| (1.0 - rho * rho).powf(-beta), r)
}

/// ∫₀^r dρ / ((1 − ρ²) log^γ(2/(1 − ρ²))).
pub fn log_bloch_increment(gamma: f64, r: f64) -> f64 {
    radial_singular_integral(|rho| 1.0 / log_bloch_weight(rho * rho, gamma), r)
}

/// Composite Gauss–Legendre on [0, r] for integrands singular only at 1:
/// each panel is as long as its right end's distance to 1.
fn radial_singular_integral<F: Fn(f64) -> f64>(g: F, r: f64) -> f64 {
    let rule = unit_interval_rule(16);
    let mut a = 0.0;
    let mut total = 0.0;
    while a < r {
        let b = (0.5 * (1.0 + a)).min(r);
        let h = b - a;
        total += rule.iter().map(|&(x, w)| w * h * g(a + h * x)).sum::<f64>();
        if b >= r {
            break;
        }
        a = b;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> GridConfig {
        GridConfig::default()
    }

    fn chi() -> AnalyticExpr {
        AnalyticExpr::identity()
    }

    #[test]
    fn bloch_norms_of_monomials() {
        let n = norm(&SpaceSpec::Bloch { beta: 1.0 }, &chi(), &cfg()).unwrap();
        assert_abs_diff_eq!(n.total, 1.0, epsilon = 1e-12);
        assert_eq!(n.point_part, 0.0);
        let n2 = norm(&SpaceSpec::Bloch { beta: 1.0 }, &AnalyticExpr::monomial(2), &cfg()).unwrap();
        assert_abs_diff_eq!(n2.seminorm_part, 4.0 * 3f64.sqrt() / 9.0, epsilon = 1e-10);
    }

    #[test]
    fn hardy_bergman_and_growth_goldens() {
        let h = norm(&SpaceSpec::Hardy { p: 2.0 }, &AnalyticExpr::real_poly(&[3.0, 4.0]), &cfg()).unwrap();
        assert_abs_diff_eq!(h.total, 5.0, epsilon = 1e-5);
        for k in 0..=10 {
            let b = norm(&SpaceSpec::Bergman { p: 2.0, alpha: 0.0 }, &AnalyticExpr::monomial(k), &cfg()).unwrap();
            assert_abs_diff_eq!(b.total, 1.0 / ((k + 1) as f64).sqrt(), epsilon = 1e-12);
        }
        let g = norm(
            &SpaceSpec::Growth { gamma: 1.0 },
            &AnalyticExpr::recip(&AnalyticExpr::real_poly(&[1.0, -1.0])),
            &cfg(),
        )
        .unwrap();
        assert!((g.total - 2.0).abs() < 2e-6, "{}", g.total);
    }

    #[test]
    fn besov_min_of_square_is_two() {
        let n = norm(&SpaceSpec::BesovMin, &AnalyticExpr::monomial(2), &cfg()).unwrap();
        assert_abs_diff_eq!(n.total, 2.0, epsilon = 1e-12);
        let s = seminorm(&SpaceSpec::Besov { p: 2.0, alpha: 0.0 }, &chi(), &cfg()).unwrap();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bmoa_of_constant_and_identity() {
        let c = AnalyticExpr::constant(Complex::new(0.6, 0.8));
        let n = norm(&SpaceSpec::Bmoa, &c, &cfg()).unwrap();
        assert_abs_diff_eq!(n.total, 1.0, epsilon = 1e-15);
        assert_eq!(n.seminorm_part, 0.0);
        // sup over a is attained at a = 0, where ∫(1 − |z|²) dA = 1/2
        let s = seminorm(&SpaceSpec::Bmoa, &chi(), &cfg()).unwrap();
        assert_abs_diff_eq!(s, 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn seminorm_rejects_non_a6_families() {
        assert!(matches!(
            seminorm(&SpaceSpec::Hardy { p: 2.0 }, &chi(), &cfg()),
            Err(WcoError::UnsupportedSpace(_))
        ));
    }

    #[test]
    fn constant_has_zero_bloch_seminorm() {
        let c = AnalyticExpr::constant(Complex::new(2.0, -1.0));
        assert_eq!(seminorm(&SpaceSpec::Bloch { beta: 1.0 }, &c, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn mixed_norm_matches_bergman_on_diagonal() {
        let f = AnalyticExpr::real_poly(&[0.3, -0.2, 0.7, 0.1]);
        for p in [1.0, 2.0, 4.0] {
            let a = norm(&SpaceSpec::Bergman { p, alpha: 0.0 }, &f, &cfg()).unwrap().total;
            let m = norm(&SpaceSpec::MixedNorm { p, q: p, alpha: 1.0 / p }, &f, &cfg()).unwrap().total;
            assert!((a - m).abs() <= 1e-6 * a);
        }
        let m = norm(&SpaceSpec::MixedNorm { p: 2.0, q: 2.0, alpha: 0.5 }, &chi(), &cfg()).unwrap();
        assert_abs_diff_eq!(m.total, 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn mixed_norm_sup_variant() {
        // sup (1 − r²) r at r = 1/√3
        let m = norm(&SpaceSpec::MixedNorm { p: 2.0, q: f64::INFINITY, alpha: 1.0 }, &chi(), &cfg()).unwrap();
        assert_abs_diff_eq!(m.total, 2.0 / (3.0 * 3f64.sqrt()), epsilon = 1e-12);
        let c = AnalyticExpr::constant(Complex::new(0.0, 3.0));
        let m = norm(&SpaceSpec::MixedNorm { p: 3.0, q: 1.5, alpha: 0.7 }, &c, &cfg()).unwrap();
        assert_abs_diff_eq!(m.total, 3.0, epsilon = 1e-13);
    }

    #[test]
    fn space_strings_round_trip() {
        for s in [
            "hinf", "hardy:2", "bergman:2,0", "mixed:2,inf,0.5", "growth:1", "bloch:0.5",
            "logbloch:-1", "bmoa", "besov:2,0", "b1",
        ] {
            let spec: SpaceSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("hardy".parse::<SpaceSpec>().is_err());
        assert!("hardy:0.5".parse::<SpaceSpec>().is_err());
        assert!("bergman:2,-1".parse::<SpaceSpec>().is_err());
        assert!("dirichlet".parse::<SpaceSpec>().is_err());
        assert!("bloch:x".parse::<SpaceSpec>().is_err());
    }

    #[test]
    fn pointeval_bound_cases() {
        let b = pointeval_bound(&SpaceSpec::Bloch { beta: 1.0 }, 0.5).unwrap();
        assert_abs_diff_eq!(b, 0.5 * 3f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.549306, epsilon = 1e-6);
        // β < 1: bounded by ∫₀¹ (1 − ρ²)^{-1/2} dρ = π/2
        let near = pointeval_bound(&SpaceSpec::Bloch { beta: 0.5 }, 1.0 - 1e-12).unwrap();
        assert!(near < std::f64::consts::FRAC_PI_2 && near > 1.5);
        assert_eq!(pointeval_bound(&SpaceSpec::Bloch { beta: 2.0 }, 0.0).unwrap(), 0.0);
        // β = 2: r/(2(1 − r²)) + ¼ log((1 + r)/(1 − r))
        let r: f64 = 0.9;
        let exact = r / (2.0 * (1.0 - r * r)) + 0.25 * ((1.0 + r) / (1.0 - r)).ln();
        assert_abs_diff_eq!(bloch_increment(2.0, r), exact, epsilon = 1e-12);
        assert!(pointeval_bound(&SpaceSpec::Bloch { beta: 1.0 }, 1.0).is_err());
    }

    #[test]
    fn increment_bound_without_derivatives() {
        let hardy = SpaceSpec::Hardy { p: 2.0 };
        assert_eq!(pointeval_bound(&hardy, 0.0).unwrap(), 0.0);
        // χ has unit H² norm and increment r
        for r in [0.1, 0.5, 0.9, 0.999] {
            assert!(pointeval_bound(&hardy, r).unwrap() >= r);
        }
        assert_abs_diff_eq!(growth_rate(&SpaceSpec::Growth { gamma: 1.0 }, 0.9).unwrap(), 1.0 / 0.19, epsilon = 1e-12);
        assert!(growth_rate(&SpaceSpec::Bmoa, 0.5).is_err());
    }

    #[test]
    fn log_bloch_increment_reduces_to_bloch_at_gamma_zero() {
        for r in [0.3, 0.9, 0.999] {
            assert_abs_diff_eq!(log_bloch_increment(0.0, r), bloch_increment(1.0, r), epsilon = 1e-12);
        }
    }
}
