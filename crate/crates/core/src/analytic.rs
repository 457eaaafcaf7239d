//! Analytic functions on the unit disk as immutable expression trees.
//!
//! Every node evaluates to a [`Jet2`], the value together with the first two
//! complex derivatives, using exact differentiation rules. Disk automorphisms
//! are carried by [`MoebiusMap`], which also implements the group operations
//! in closed form.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, WcoError};

pub type Complex = Complex64;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);

/// Value and first two derivatives of an analytic function at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jet2 {
    pub f: Complex,
    pub df: Complex,
    pub d2f: Complex,
}

impl Jet2 {
    pub const fn new(f: Complex, df: Complex, d2f: Complex) -> Self {
        Jet2 { f, df, d2f }
    }

    pub const fn constant(c: Complex) -> Self {
        Jet2::new(c, ZERO, ZERO)
    }

    /// Jet of the identity map at `z`.
    pub const fn variable(z: Complex) -> Self {
        Jet2::new(z, ONE, ZERO)
    }

    pub fn scale(self, c: Complex) -> Self {
        Jet2::new(c * self.f, c * self.df, c * self.d2f)
    }

    /// Reciprocal by the quotient rule. `None` when the value is zero.
    pub fn recip(self) -> Option<Self> {
        if self.f == ZERO {
            return None;
        }
        let inv = self.f.inv();
        let inv2 = inv * inv;
        Some(Jet2::new(
            inv,
            -self.df * inv2,
            (2.0 * self.df * self.df - self.f * self.d2f) * inv2 * inv,
        ))
    }

    /// Chain rule: `outer` is the jet of g at w = self.f, the result is the
    /// jet of g∘h where `self` is the jet of h.
    pub fn compose_into(self, outer: Jet2) -> Self {
        Jet2::new(
            outer.f,
            outer.df * self.df,
            outer.d2f * self.df * self.df + outer.df * self.d2f,
        )
    }

    /// Principal-branch real power.
    pub fn powf(self, alpha: f64) -> Result<Self> {
        let u = self.f;
        if u.im == 0.0 && u.re <= 0.0 {
            return Err(WcoError::Branch { base: u });
        }
        let p0 = (alpha * u.ln()).exp();
        let p1 = alpha * p0 / u;
        let p2 = (alpha - 1.0) * p1 / u;
        Ok(Jet2::new(
            p0,
            p1 * self.df,
            p2 * self.df * self.df + p1 * self.d2f,
        ))
    }

    pub fn is_finite(&self) -> bool {
        self.f.is_finite() && self.df.is_finite() && self.d2f.is_finite()
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        Jet2::new(self.f + rhs.f, self.df + rhs.df, self.d2f + rhs.d2f)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        Jet2::new(self.f - rhs.f, self.df - rhs.df, self.d2f - rhs.d2f)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2::new(-self.f, -self.df, -self.d2f)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        Jet2::new(
            self.f * rhs.f,
            self.df * rhs.f + self.f * rhs.df,
            self.d2f * rhs.f + 2.0 * self.df * rhs.df + self.f * rhs.d2f,
        )
    }
}

/// Disk automorphism z ↦ λ(a − z)/(1 − āz) with |a| < 1 and |λ| = 1.
///
/// With λ = 1 this is the involution φ_a. Note that `(a = 0, λ)` is the map
/// z ↦ −λz; use [`MoebiusMap::rotation`] for z ↦ e^{iθ}z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MoebiusMap {
    a: Complex,
    lambda: Complex,
}

impl MoebiusMap {
    /// Validates |a| < 1 and |λ| = 1 (to 1e-9); λ is renormalized to the circle.
    pub fn new(a: Complex, lambda: Complex) -> Result<Self> {
        if !a.is_finite() || !lambda.is_finite() {
            return Err(WcoError::Parameter("non-finite Moebius parameter".into()));
        }
        if a.norm() >= 1.0 {
            return Err(WcoError::Parameter(format!(
                "Moebius parameter |a| = {} must be < 1",
                a.norm()
            )));
        }
        let m = lambda.norm();
        if (m - 1.0).abs() > 1e-9 {
            return Err(WcoError::Parameter(format!(
                "Moebius rotation |lambda| = {m} must be 1"
            )));
        }
        Ok(MoebiusMap { a, lambda: lambda / m })
    }

    /// `(a, λ = e^{iθ})`.
    pub fn from_angle(a: Complex, theta: f64) -> Result<Self> {
        MoebiusMap::new(a, Complex::from_polar(1.0, theta))
    }

    /// The involution φ_a(z) = (a − z)/(1 − āz).
    pub fn involution(a: Complex) -> Result<Self> {
        MoebiusMap::new(a, ONE)
    }

    /// The rotation z ↦ e^{iθ}z.
    pub fn rotation(theta: f64) -> Self {
        MoebiusMap {
            a: ZERO,
            lambda: -Complex::from_polar(1.0, theta),
        }
    }

    pub fn identity() -> Self {
        MoebiusMap::rotation(0.0)
    }

    pub fn a(&self) -> Complex {
        self.a
    }

    pub fn lambda(&self) -> Complex {
        self.lambda
    }

    /// Argument θ of λ = e^{iθ}, as used by the `mobius(a_re,a_im,th)` syntax.
    pub fn theta(&self) -> f64 {
        self.lambda.arg()
    }

    pub fn eval(&self, z: Complex) -> Complex {
        self.lambda * (self.a - z) / (ONE - self.a.conj() * z)
    }

    pub fn jet(&self, z: Complex) -> Jet2 {
        let den = ONE - self.a.conj() * z;
        let inv = den.inv();
        let k = self.a.norm_sqr() - 1.0;
        Jet2::new(
            self.lambda * (self.a - z) * inv,
            self.lambda * k * inv * inv,
            self.lambda * k * 2.0 * self.a.conj() * inv * inv * inv,
        )
    }

    /// Closed-form inverse: the inverse of λφ_a is λ̄φ_{λa}.
    pub fn inverse(&self) -> Self {
        MoebiusMap {
            a: self.lambda * self.a,
            lambda: self.lambda.conj(),
        }
    }

    /// `self ∘ other`, recomputed in closed form from the 2×2 matrix product.
    pub fn compose(&self, other: &MoebiusMap) -> Self {
        // λ(a − z)/(1 − āz) ~ [[−λ, λa], [−ā, 1]]
        let m1 = self.matrix();
        let m2 = other.matrix();
        let p = [
            m1[0] * m2[0] + m1[1] * m2[2],
            m1[0] * m2[1] + m1[1] * m2[3],
            m1[2] * m2[0] + m1[3] * m2[2],
            m1[2] * m2[1] + m1[3] * m2[3],
        ];
        let d = p[3];
        let mu = -p[0] / d;
        let a = -(p[2] / d).conj();
        MoebiusMap {
            a,
            lambda: mu / mu.norm(),
        }
    }

    fn matrix(&self) -> [Complex; 4] {
        [-self.lambda, self.lambda * self.a, -self.a.conj(), ONE]
    }

    /// True when the map fixes the origin, within `tol` on |a|.
    pub fn is_rotation(&self, tol: f64) -> bool {
        self.a.norm() <= tol
    }
}

/// Node kinds of an [`AnalyticExpr`].
#[derive(Debug)]
pub enum Node {
    Const(Complex),
    /// Coefficients c_0, c_1, ..., c_N of Σ c_k z^k.
    Poly(Vec<Complex>),
    Moebius(MoebiusMap),
    Add(AnalyticExpr, AnalyticExpr),
    Mul(AnalyticExpr, AnalyticExpr),
    Compose { outer: AnalyticExpr, inner: AnalyticExpr },
    Recip(AnalyticExpr),
    Pow(AnalyticExpr, f64),
}

/// Immutable expression tree denoting an analytic function on the disk.
/// Cloning is cheap; subtrees are shared.
#[derive(Clone, Debug)]
pub struct AnalyticExpr(Arc<Node>);

impl AnalyticExpr {
    fn from_node(node: Node) -> Self {
        AnalyticExpr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    /// # Panics
    /// If `c` is not finite.
    pub fn constant(c: Complex) -> Self {
        assert!(c.is_finite(), "non-finite constant {c}");
        AnalyticExpr::from_node(Node::Const(c))
    }

    pub fn one() -> Self {
        AnalyticExpr::constant(ONE)
    }

    /// # Panics
    /// If any coefficient is not finite.
    pub fn poly(coeffs: Vec<Complex>) -> Self {
        assert!(
            coeffs.iter().all(|c| c.is_finite()),
            "non-finite polynomial coefficient"
        );
        let coeffs = if coeffs.is_empty() { vec![ZERO] } else { coeffs };
        AnalyticExpr::from_node(Node::Poly(coeffs))
    }

    /// Polynomial with real coefficients.
    pub fn real_poly(coeffs: &[f64]) -> Self {
        AnalyticExpr::poly(coeffs.iter().map(|&c| Complex::new(c, 0.0)).collect())
    }

    /// The identity function χ(z) = z.
    pub fn identity() -> Self {
        AnalyticExpr::real_poly(&[0.0, 1.0])
    }

    /// χ^k.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![ZERO; k + 1];
        c[k] = ONE;
        AnalyticExpr::poly(c)
    }

    pub fn moebius(m: MoebiusMap) -> Self {
        AnalyticExpr::from_node(Node::Moebius(m))
    }

    pub fn add(l: &AnalyticExpr, r: &AnalyticExpr) -> Self {
        AnalyticExpr::from_node(Node::Add(l.clone(), r.clone()))
    }

    pub fn mul(l: &AnalyticExpr, r: &AnalyticExpr) -> Self {
        AnalyticExpr::from_node(Node::Mul(l.clone(), r.clone()))
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &AnalyticExpr, inner: &AnalyticExpr) -> Self {
        AnalyticExpr::from_node(Node::Compose {
            outer: outer.clone(),
            inner: inner.clone(),
        })
    }

    pub fn recip(inner: &AnalyticExpr) -> Self {
        AnalyticExpr::from_node(Node::Recip(inner.clone()))
    }

    /// # Panics
    /// If `alpha` is not finite.
    pub fn pow(inner: &AnalyticExpr, alpha: f64) -> Self {
        assert!(alpha.is_finite(), "non-finite exponent");
        AnalyticExpr::from_node(Node::Pow(inner.clone(), alpha))
    }

    /// `c · self`.
    pub fn scaled(&self, c: Complex) -> Self {
        AnalyticExpr::mul(&AnalyticExpr::constant(c), self)
    }

    /// `self + c`.
    pub fn shifted(&self, c: Complex) -> Self {
        AnalyticExpr::add(self, &AnalyticExpr::constant(c))
    }

    /// Structural constant (a `Const` node).
    pub fn as_constant(&self) -> Option<Complex> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Jet (value, first and second derivative) at `z`, |z| < 1.
    pub fn eval_jet(&self, z: Complex) -> Result<Jet2> {
        if !(z.norm() < 1.0) {
            return Err(WcoError::Domain {
                z,
                reason: "evaluation point must lie in the open unit disk".into(),
            });
        }
        self.jet_at(z)
    }

    pub fn eval(&self, z: Complex) -> Result<Complex> {
        Ok(self.eval_jet(z)?.f)
    }

    fn jet_at(&self, z: Complex) -> Result<Jet2> {
        match self.node() {
            Node::Const(c) => Ok(Jet2::constant(*c)),
            Node::Poly(c) => Ok(horner_jet(c, z)),
            Node::Moebius(m) => Ok(m.jet(z)),
            Node::Add(l, r) => Ok(l.jet_at(z)? + r.jet_at(z)?),
            Node::Mul(l, r) => Ok(l.jet_at(z)? * r.jet_at(z)?),
            Node::Compose { outer, inner } => {
                let g = inner.jet_at(z)?;
                if !(g.f.norm() < 1.0) {
                    return Err(WcoError::Domain {
                        z,
                        reason: format!(
                            "inner map of a composition has modulus {} >= 1",
                            g.f.norm()
                        ),
                    });
                }
                Ok(g.compose_into(outer.jet_at(g.f)?))
            }
            Node::Recip(inner) => inner.jet_at(z)?.recip().ok_or(WcoError::Domain {
                z,
                reason: "reciprocal of a vanishing function".into(),
            }),
            Node::Pow(inner, alpha) => inner.jet_at(z)?.powf(*alpha),
        }
    }
}

fn horner_jet(c: &[Complex], z: Complex) -> Jet2 {
    let mut p = ZERO;
    let mut dp = ZERO;
    let mut d2p = ZERO;
    for &ck in c.iter().rev() {
        d2p = d2p * z + 2.0 * dp;
        dp = dp * z + p;
        p = p * z + ck;
    }
    Jet2::new(p, dp, d2p)
}

/// Complex literal in the expression mini-language: `re`, `imi`, `re+imi`.
pub(crate) struct ComplexLiteral(pub Complex);

impl fmt::Display for ComplexLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.0;
        if c.im == 0.0 {
            write!(f, "{}", c.re)
        } else if c.re == 0.0 {
            write!(f, "{}i", c.im)
        } else if c.im.is_sign_negative() {
            write!(f, "{}{}i", c.re, c.im)
        } else {
            write!(f, "{}+{}i", c.re, c.im)
        }
    }
}

/// Renders the expression in the CLI mini-language; the output parses back to
/// an equivalent tree.
impl fmt::Display for AnalyticExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "const({},{})", c.re + 0.0, c.im + 0.0),
            Node::Poly(c) => {
                write!(f, "poly(")?;
                for (k, ck) in c.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", ComplexLiteral(*ck))?;
                }
                write!(f, ")")
            }
            Node::Moebius(m) => write!(f, "mobius({},{},{})", m.a.re + 0.0, m.a.im + 0.0, m.theta() + 0.0),
            Node::Add(l, r) => write!(f, "add({l},{r})"),
            Node::Mul(l, r) => write!(f, "mul({l},{r})"),
            Node::Compose { outer, inner } => write!(f, "compose({outer},{inner})"),
            Node::Recip(e) => write!(f, "recip({e})"),
            Node::Pow(e, alpha) => write!(f, "pow({e},{alpha})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn poly_jet_at_origin_gives_taylor_data() {
        let p = AnalyticExpr::real_poly(&[1.0, 2.0, 3.0]);
        let j = p.eval_jet(ZERO).unwrap();
        assert_eq!(j, Jet2::new(c(1.0, 0.0), c(2.0, 0.0), c(6.0, 0.0)));
    }

    #[test]
    fn moebius_at_zero_parameter_is_negation() {
        let m = AnalyticExpr::moebius(MoebiusMap::involution(ZERO).unwrap());
        let j = m.eval_jet(c(0.3, 0.0)).unwrap();
        assert_abs_diff_eq!(j.f.re, -0.3, epsilon = 1e-15);
        assert_abs_diff_eq!((j.df - c(-1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.d2f.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn compose_square_with_involution_matches_finite_differences() {
        let phi = AnalyticExpr::moebius(MoebiusMap::involution(c(0.5, 0.0)).unwrap());
        let e = AnalyticExpr::compose(&AnalyticExpr::monomial(2), &phi);
        let j = e.eval_jet(ZERO).unwrap();
        assert_abs_diff_eq!(j.f.re, 0.25, epsilon = 1e-15);
        // central difference oracle with step 1e-6
        let h = 1e-6;
        let fd = (e.eval(c(h, 0.0)).unwrap() - e.eval(c(-h, 0.0)).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(fd.re, -0.75, epsilon = 1e-8);
        assert_abs_diff_eq!((j.df - fd).norm(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(j.df.re, -0.75, epsilon = 1e-14);
    }

    #[test]
    fn compose_outside_disk_is_domain_error() {
        let inner = AnalyticExpr::real_poly(&[0.5, 0.9]);
        let e = AnalyticExpr::compose(&AnalyticExpr::identity(), &inner);
        assert!(e.eval(c(0.1, 0.0)).is_ok());
        assert!(matches!(e.eval(c(0.9, 0.0)), Err(WcoError::Domain { .. })));
        assert!(matches!(
            AnalyticExpr::identity().eval(c(1.0, 0.0)),
            Err(WcoError::Domain { .. })
        ));
    }

    #[test]
    fn pow_on_branch_cut_is_branch_error() {
        let e = AnalyticExpr::pow(&AnalyticExpr::real_poly(&[-0.5, 1.0]), 0.5);
        assert!(matches!(e.eval(ZERO), Err(WcoError::Branch { .. })));
        assert!(e.eval(c(0.0, 0.2)).is_ok());
    }

    #[test]
    fn recip_of_zero_is_domain_error() {
        let e = AnalyticExpr::recip(&AnalyticExpr::identity());
        assert!(matches!(e.eval(ZERO), Err(WcoError::Domain { .. })));
    }

    #[test]
    fn rotation_inverse_is_opposite_rotation() {
        let theta = 0.83;
        let m = MoebiusMap::from_angle(ZERO, theta).unwrap();
        let inv = m.inverse();
        assert_abs_diff_eq!(inv.a().norm(), 0.0);
        assert_abs_diff_eq!((inv.lambda() - Complex::from_polar(1.0, -theta)).norm(), 0.0, epsilon = 1e-15);
        for k in 0..16 {
            let z = Complex::from_polar(0.7, k as f64 * 0.4);
            assert_abs_diff_eq!((inv.eval(m.eval(z)) - z).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn involution_is_its_own_inverse() {
        let m = MoebiusMap::involution(c(0.5, 0.0)).unwrap();
        let inv = m.inverse();
        assert_abs_diff_eq!((inv.a() - m.a()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((inv.lambda() - m.lambda()).norm(), 0.0, epsilon = 1e-15);
        let id = m.compose(&m);
        assert!(id.is_rotation(1e-15));
        for k in 0..64 {
            let z = Complex::from_polar(0.95 * (k as f64 / 64.0), k as f64);
            assert!((id.eval(z) - z).norm() < 1e-12);
        }
    }

    #[test]
    fn rotations_add_angles() {
        let r = MoebiusMap::rotation(0.4).compose(&MoebiusMap::rotation(1.1));
        let z = c(0.3, -0.2);
        assert_abs_diff_eq!((r.eval(z) - Complex::from_polar(1.0, 1.5) * z).norm(), 0.0, epsilon = 1e-15);
        assert!(r.is_rotation(0.0));
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let m = MoebiusMap::from_angle(c(-0.3, 0.6), 2.1).unwrap();
        let id = m.compose(&m.inverse());
        assert!(id.a().norm() < 1e-15);
        assert!((id.eval(c(0.2, 0.1)) - c(0.2, 0.1)).norm() < 1e-15);
    }

    #[test]
    fn moebius_rejects_invalid_parameters() {
        assert!(MoebiusMap::new(c(1.0, 0.0), ONE).is_err());
        assert!(MoebiusMap::new(ZERO, c(2.0, 0.0)).is_err());
    }

    #[test]
    fn display_uses_mini_language() {
        let e = AnalyticExpr::pow(
            &AnalyticExpr::poly(vec![c(1.0, -2.0), c(0.0, 0.5), c(3.0, 0.0)]),
            2.5,
        );
        assert_eq!(e.to_string(), "pow(poly(1-2i,0.5i,3),2.5)");
        let m = AnalyticExpr::moebius(MoebiusMap::involution(c(0.5, 0.0)).unwrap());
        assert_eq!(AnalyticExpr::recip(&m).to_string(), "recip(mobius(0.5,0,0))");
    }
}
