//! Weighted composition operators W_{F,φ} f = F·(f∘φ), their finite sections
//! and isometry defects.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::analytic::{AnalyticExpr, Complex};
use crate::error::{Result, WcoError};
use crate::quadrature::{taylor_coefficients, GridConfig};
use crate::spaces::{norm, SpaceSpec};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const SECTION_RADIUS: f64 = 0.9;

/// Symbols of a weighted composition operator.
#[derive(Clone, Debug)]
pub struct WcoSymbols {
    /// Multiplication symbol F.
    pub weight: AnalyticExpr,
    /// Composition symbol φ, a self-map of the disk.
    pub phi: AnalyticExpr,
}

impl Serialize for WcoSymbols {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("WcoSymbols", 2)?;
        st.serialize_field("F", &self.weight.to_string())?;
        st.serialize_field("phi", &self.phi.to_string())?;
        st.end()
    }
}

impl WcoSymbols {
    /// Checks on the grid that φ maps into the disk and is not constant, and
    /// that F is not identically zero.
    pub fn new(weight: AnalyticExpr, phi: AnalyticExpr, cfg: &GridConfig) -> Result<Self> {
        let points = cfg.grid_points();
        let phis: Vec<Complex> = points.iter().map(|&z| phi.eval(z)).collect::<Result<_>>()?;
        if let Some((k, w)) = phis.iter().enumerate().find(|(_, w)| !(w.norm() < 1.0)) {
            return Err(WcoError::Domain {
                z: points[k],
                reason: format!("composition symbol takes the value {w} outside the disk"),
            });
        }
        let spread = phis.iter().map(|w| (w - phis[0]).norm()).fold(0.0, f64::max);
        if spread < 1e-14 {
            return Err(WcoError::DegenerateInput("composition symbol is constant".into()));
        }
        let mut nonzero = false;
        for &z in &points {
            if weight.eval(z)?.norm() > 0.0 {
                nonzero = true;
                break;
            }
        }
        if !nonzero {
            return Err(WcoError::DegenerateInput("multiplication symbol vanishes identically".into()));
        }
        Ok(WcoSymbols { weight, phi })
    }

    /// Skips the grid checks.
    pub fn new_unchecked(weight: AnalyticExpr, phi: AnalyticExpr) -> Self {
        WcoSymbols { weight, phi }
    }

    /// W f as an expression.
    pub fn apply(&self, f: &AnalyticExpr) -> AnalyticExpr {
        apply(self, f)
    }

    /// Symbols of the product `self ∘ inner`, i.e. f ↦ self(inner(f)).
    pub fn after(&self, inner: &WcoSymbols) -> WcoSymbols {
        WcoSymbols {
            weight: AnalyticExpr::mul(&self.weight, &AnalyticExpr::compose(&inner.weight, &self.phi)),
            phi: AnalyticExpr::compose(&inner.phi, &self.phi),
        }
    }
}

pub fn apply(w: &WcoSymbols, f: &AnalyticExpr) -> AnalyticExpr {
    AnalyticExpr::mul(&w.weight, &AnalyticExpr::compose(f, &w.phi))
}

/// `count` polynomials of random degree in 1..=`max_degree` with coefficients
/// uniform in the unit disk.
pub fn random_polynomials(count: usize, max_degree: usize, seed: u64) -> Vec<AnalyticExpr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let degree = rng.random_range(1..=max_degree.max(1));
            let coeffs = (0..=degree)
                .map(|_| {
                    let r = rng.random::<f64>().sqrt();
                    let t = 2.0 * PI * rng.random::<f64>();
                    Complex::from_polar(r, t)
                })
                .collect();
            AnalyticExpr::poly(coeffs)
        })
        .collect()
}

/// f_λ(z) = 1 + λz for the eight eighth roots of unity λ.
pub fn probe_family() -> Vec<AnalyticExpr> {
    (0..8)
        .map(|k| {
            let lambda = Complex::from_polar(1.0, 2.0 * PI * k as f64 / 8.0);
            AnalyticExpr::poly(vec![Complex::new(1.0, 0.0), lambda])
        })
        .collect()
}

/// Monomials χ^k for k ≤ 8, 30 random polynomials of degree ≤ 12 and the
/// probes 1 + λz.
pub fn default_family(seed: u64) -> Vec<AnalyticExpr> {
    let mut family: Vec<AnalyticExpr> = (0..=8).map(AnalyticExpr::monomial).collect();
    family.extend(random_polynomials(30, 12, seed));
    family.extend(probe_family());
    family
}

/// Leading N×N block of the coefficient matrix of W: column k holds the
/// Taylor coefficients of W χ^k.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSection {
    pub dimension: usize,
    pub entries: DMatrix<Complex>,
    pub radius: f64,
}

impl FiniteSection {
    /// Row-major CSV, each entry written as a `re,im` pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.dimension {
            for k in 0..self.dimension {
                let c = self.entries[(j, k)];
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{},{}", c.re, c.im);
            }
            out.push('\n');
        }
        out
    }
}

pub fn finite_section(w: &WcoSymbols, n: usize, cfg: &GridConfig) -> Result<FiniteSection> {
    if n == 0 {
        return Err(WcoError::Parameter("section dimension must be positive".into()));
    }
    let radius = SECTION_RADIUS.min(cfg.r_max);
    let columns: Vec<Vec<Complex>> = (0..n)
        .into_par_iter()
        .map(|k| taylor_coefficients(&apply(w, &AnalyticExpr::monomial(k)), n, radius, cfg))
        .collect::<Result<_>>()?;
    let entries = DMatrix::from_fn(n, n, |j, k| columns[k][j]);
    Ok(FiniteSection { dimension: n, entries, radius })
}

/// Ratio of largest to smallest singular value.
pub fn condition_number(s: &FiniteSection) -> Result<f64> {
    if s.dimension < 2 {
        return Err(WcoError::Parameter("condition number needs N >= 2".into()));
    }
    let sv = s.entries.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min < 1e-300 {
        return Err(WcoError::SingularMatrix(min));
    }
    Ok(max / min)
}

/// ‖W f‖/‖f‖ for each member of the family, in order.
pub fn norm_ratios(
    w: &WcoSymbols,
    space: &SpaceSpec,
    family: &[AnalyticExpr],
    cfg: &GridConfig,
) -> Result<Vec<f64>> {
    if family.is_empty() {
        return Err(WcoError::DegenerateInput("empty test family".into()));
    }
    family
        .par_iter()
        .map(|f| {
            let nf = norm(space, f, cfg)?.total;
            if nf < 1e-14 {
                return Err(WcoError::DegenerateInput(format!("{f} has norm {nf:e}")));
            }
            let nw = norm(space, &apply(w, f), cfg)?.total;
            let ratio = nw / nf;
            if !ratio.is_finite() {
                return Err(WcoError::NonFinite(format!("norm ratio for {f}")));
            }
            Ok(ratio)
        })
        .collect()
}

/// max over the family of |‖W f‖/‖f‖ − 1|.
pub fn isometry_defect(
    w: &WcoSymbols,
    space: &SpaceSpec,
    family: &[AnalyticExpr],
    cfg: &GridConfig,
) -> Result<f64> {
    Ok(norm_ratios(w, space, family, cfg)?
        .into_iter()
        .map(|r| (r - 1.0).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::MoebiusMap;
    use approx::assert_abs_diff_eq;

    fn cfg() -> GridConfig {
        GridConfig::default()
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn rotation(theta: f64) -> AnalyticExpr {
        AnalyticExpr::moebius(MoebiusMap::rotation(theta))
    }

    #[test]
    fn apply_rotation_to_square() {
        let theta = 0.7;
        let w = WcoSymbols::new(AnalyticExpr::one(), rotation(theta), &cfg()).unwrap();
        let g = w.apply(&AnalyticExpr::monomial(2));
        for z in [c(0.3, 0.1), c(-0.5, 0.6)] {
            let expected = Complex::from_polar(1.0, 2.0 * theta) * z * z;
            assert!((g.eval(z).unwrap() - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn apply_to_one_returns_weight() {
        let f = AnalyticExpr::real_poly(&[2.0, 1.0]);
        let phi = AnalyticExpr::moebius(MoebiusMap::new(c(0.5, 0.0), c(1.0, 0.0)).unwrap());
        let w = WcoSymbols::new(f.clone(), phi, &cfg()).unwrap();
        let g = w.apply(&AnalyticExpr::one());
        for z in [c(0.0, 0.0), c(0.9, -0.2)] {
            assert!((g.eval(z).unwrap() - f.eval(z).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn symbols_are_validated() {
        let bad = AnalyticExpr::real_poly(&[0.5, 0.9]);
        assert!(matches!(
            WcoSymbols::new(AnalyticExpr::one(), bad, &cfg()),
            Err(WcoError::Domain { .. })
        ));
        let constant = AnalyticExpr::constant(c(0.2, 0.0));
        assert!(WcoSymbols::new(AnalyticExpr::one(), constant, &cfg()).is_err());
        let zero = AnalyticExpr::constant(c(0.0, 0.0));
        assert!(WcoSymbols::new(zero, AnalyticExpr::identity(), &cfg()).is_err());
    }

    #[test]
    fn rotation_section_is_unitary_diagonal() {
        let theta = 1.1;
        let w = WcoSymbols::new_unchecked(AnalyticExpr::one(), rotation(theta));
        let s = finite_section(&w, 16, &cfg()).unwrap();
        for j in 0..16 {
            for k in 0..16 {
                let expected = if j == k { Complex::from_polar(1.0, k as f64 * theta) } else { c(0.0, 0.0) };
                assert!((s.entries[(j, k)] - expected).norm() < 1e-12);
            }
        }
        assert_abs_diff_eq!(condition_number(&s).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn multiplier_section_is_two_diagonal() {
        let w = WcoSymbols::new_unchecked(AnalyticExpr::real_poly(&[2.0, 1.0]), AnalyticExpr::identity());
        let s = finite_section(&w, 8, &cfg()).unwrap();
        for j in 0..8 {
            for k in 0..8 {
                let expected = match j as isize - k as isize {
                    0 => 2.0,
                    1 => 1.0,
                    _ => 0.0,
                };
                assert!((s.entries[(j, k)] - c(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn square_symbol_doubles_degree() {
        let w = WcoSymbols::new_unchecked(AnalyticExpr::one(), AnalyticExpr::monomial(2));
        let s = finite_section(&w, 12, &cfg()).unwrap();
        for k in 0..12 {
            for j in 0..12 {
                let expected = if j == 2 * k { 1.0 } else { 0.0 };
                assert!((s.entries[(j, k)] - c(expected, 0.0)).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn half_dilation_condition_number_grows() {
        let w = WcoSymbols::new_unchecked(AnalyticExpr::one(), AnalyticExpr::real_poly(&[0.0, 0.5]));
        let s = finite_section(&w, 32, &cfg()).unwrap();
        let kappa = condition_number(&s).unwrap();
        assert!((kappa / 2f64.powi(31) - 1.0).abs() < 1e-3, "{kappa}");
    }

    #[test]
    fn condition_number_needs_two_rows() {
        let w = WcoSymbols::new_unchecked(AnalyticExpr::one(), AnalyticExpr::identity());
        let s = finite_section(&w, 1, &cfg()).unwrap();
        assert!(condition_number(&s).is_err());
    }

    #[test]
    fn csv_has_pairs_per_entry() {
        let w = WcoSymbols::new_unchecked(AnalyticExpr::one(), AnalyticExpr::identity());
        let csv = finite_section(&w, 3, &cfg()).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.split(',').count() == 6));
        assert!(lines[0].starts_with("1,"));
    }

    #[test]
    fn scaling_by_two_has_defect_one() {
        let w = WcoSymbols::new_unchecked(AnalyticExpr::constant(c(2.0, 0.0)), AnalyticExpr::identity());
        let family = random_polynomials(5, 6, DEFAULT_SEED);
        for space in [SpaceSpec::Hardy { p: 2.0 }, SpaceSpec::Bloch { beta: 1.0 }] {
            assert_abs_diff_eq!(isometry_defect(&w, &space, &family, &cfg()).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn involution_breaks_bloch_isometry_on_identity() {
        let phi = AnalyticExpr::moebius(MoebiusMap::new(c(0.5, 0.0), c(1.0, 0.0)).unwrap());
        let w = WcoSymbols::new(AnalyticExpr::one(), phi, &cfg()).unwrap();
        let d = isometry_defect(&w, &SpaceSpec::Bloch { beta: 1.0 }, &[AnalyticExpr::identity()], &cfg()).unwrap();
        // ‖χ∘φ_a‖ = |a| + 1 while ‖χ‖ = 1
        assert!((d - 0.5).abs() < 1e-8, "{d}");
    }

    #[test]
    fn defect_rejects_zero_norm_members() {
        let w = WcoSymbols::new_unchecked(AnalyticExpr::one(), AnalyticExpr::identity());
        let zero = AnalyticExpr::constant(c(0.0, 0.0));
        assert!(matches!(
            isometry_defect(&w, &SpaceSpec::Hinf, &[zero], &cfg()),
            Err(WcoError::DegenerateInput(_))
        ));
    }

    #[test]
    fn default_family_is_seeded() {
        let a = default_family(DEFAULT_SEED);
        let b = default_family(DEFAULT_SEED);
        assert_eq!(a.len(), 9 + 30 + 8);
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_string() == y.to_string()));
        let other = default_family(1);
        assert_ne!(a[20].to_string(), other[20].to_string());
    }
}
