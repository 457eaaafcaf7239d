//! Grids, integration and supremum engines over the disk and its circles.
//!
//! Angular integrals use the trapezoid rule on `n_theta` equispaced nodes,
//! which is spectrally accurate for smooth periodic integrands. Radial
//! integrals use Gauss–Legendre nodes in t = r², which is the natural variable
//! for the normalized area measure dA = dt dθ / 2π.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::analytic::{AnalyticExpr, Complex};
use crate::error::{Result, WcoError};

/// Global closed-grid-disk radius used for validation checks and sup grids.
pub const DEFAULT_R_MAX: f64 = 1.0 - 1e-6;
pub const DEFAULT_N_THETA: usize = 512;
pub const DEFAULT_N_RADIAL: usize = 64;
const SUP_RADII_COUNT: u32 = 20;
/// Scans also visit the rings k/20, k < 20.
const INTERIOR_RINGS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Angular nodes; a power of two, at least 64.
    pub n_theta: usize,
    /// Gauss–Legendre nodes in t = r².
    pub n_radial: usize,
    /// Strictly increasing radii used by sup scans, all < 1.
    pub sup_radii: Vec<f64>,
    pub r_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig::new(DEFAULT_N_THETA, DEFAULT_N_RADIAL, DEFAULT_R_MAX)
            .expect("default grid is valid")
    }
}

impl GridConfig {
    /// Builds a grid with the default radii r_k = 1 − 2^{−k}, k = 1..20,
    /// capped at `r_max`.
    pub fn new(n_theta: usize, n_radial: usize, r_max: f64) -> Result<Self> {
        let mut sup_radii: Vec<f64> = Vec::new();
        for k in 1..=SUP_RADII_COUNT {
            let r = (1.0 - 0.5f64.powi(k as i32)).min(r_max);
            if sup_radii.last().is_none_or(|&last| r > last) {
                sup_radii.push(r);
            }
        }
        let cfg = GridConfig {
            n_theta,
            n_radial,
            sup_radii,
            r_max,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 64 || !self.n_theta.is_power_of_two() {
            return Err(WcoError::Parameter(format!(
                "n_theta = {} must be a power of two >= 64",
                self.n_theta
            )));
        }
        if self.n_radial < 2 {
            return Err(WcoError::Parameter("n_radial must be >= 2".into()));
        }
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(WcoError::Parameter(format!(
                "r_max = {} must lie in (0, 1)",
                self.r_max
            )));
        }
        if self.sup_radii.is_empty()
            || self.sup_radii.windows(2).any(|w| !(w[0] < w[1]))
            || self.sup_radii.iter().any(|&r| !(r > 0.0 && r < 1.0))
        {
            return Err(WcoError::Parameter(
                "sup_radii must be strictly increasing and inside (0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Both node counts doubled.
    pub fn refined(&self) -> Self {
        GridConfig {
            n_theta: self.n_theta * 2,
            n_radial: self.n_radial * 2,
            ..self.clone()
        }
    }

    /// Node counts scaled by `factor` (n_theta rounded to a power of two).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let n_theta = ((self.n_theta as f64 * factor).round() as usize)
            .max(64)
            .next_power_of_two();
        let n_radial = ((self.n_radial as f64 * factor).round() as usize).max(2);
        let cfg = GridConfig {
            n_theta,
            n_radial,
            ..self.clone()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    pub fn circle(&self, r: f64) -> impl Iterator<Item = Complex> + '_ {
        (0..self.n_theta).map(move |j| Complex::from_polar(r, self.angle(j)))
    }

    /// The origin, the rings k/20 (k = 1..19) and the sup radii, increasing.
    pub fn scan_radii(&self) -> Vec<f64> {
        let mut radii: Vec<f64> = (0..INTERIOR_RINGS)
            .map(|k| k as f64 / INTERIOR_RINGS as f64)
            .filter(|&r| r < self.r_max)
            .collect();
        radii.extend(self.sup_radii.iter().copied());
        radii.sort_by(f64::total_cmp);
        radii.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        radii
    }

    /// The origin plus every scan ring × every angle.
    pub fn grid_points(&self) -> Vec<Complex> {
        let radii = self.scan_radii();
        let mut pts = Vec::with_capacity(radii.len() * self.n_theta);
        pts.push(Complex::new(0.0, 0.0));
        for &r in &radii[1..] {
            pts.extend(self.circle(r));
        }
        pts
    }

    /// Gauss–Legendre nodes and weights on [0, 1].
    pub fn radial_rule(&self) -> Vec<(f64, f64)> {
        unit_interval_rule(self.n_radial)
    }

    /// Area quadrature nodes z with weights w such that Σ w g(z) ≈ ∫ g dA.
    pub fn disk_nodes(&self) -> Vec<(Complex, f64)> {
        let inv_n = 1.0 / self.n_theta as f64;
        let mut out = Vec::with_capacity(self.n_radial * self.n_theta);
        for (t, w) in self.radial_rule() {
            let r = t.sqrt();
            out.extend(self.circle(r).map(|z| (z, w * inv_n)));
        }
        out
    }
}

pub(crate) fn unit_interval_rule(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// M_p(r, f): the L^p mean of |f| over the circle of radius r (max modulus for
/// p = ∞), by the trapezoid rule.
pub fn integral_mean(f: &AnalyticExpr, p: f64, r: f64, cfg: &GridConfig) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(WcoError::Parameter(format!("integral mean exponent p = {p} must be >= 1")));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(WcoError::Parameter(format!("radius {r} must lie in [0, 1)")));
    }
    if r == 0.0 {
        return Ok(f.eval(Complex::new(0.0, 0.0))?.norm());
    }
    circle_lp_mean(|z| Ok(f.eval(z)?.norm()), p, r, cfg)
}

/// L^p mean over the circle of a nonnegative pointwise quantity.
pub fn circle_lp_mean<G>(g: G, p: f64, r: f64, cfg: &GridConfig) -> Result<f64>
where
    G: Fn(Complex) -> Result<f64>,
{
    if p.is_infinite() {
        let mut m = 0.0f64;
        for z in cfg.circle(r) {
            m = m.max(g(z)?);
        }
        return Ok(m);
    }
    let mut sum = 0.0;
    for z in cfg.circle(r) {
        sum += g(z)?.powf(p);
    }
    Ok((sum / cfg.n_theta as f64).powf(1.0 / p))
}

/// ∫_𝔻 g dA for the normalized area measure: Gauss–Legendre in t = r² on
/// [0, 1] times the trapezoid rule in θ. All nodes lie strictly inside the
/// disk, so `area_integral(1) = 1` to round-off.
pub fn area_integral<G>(g: G, cfg: &GridConfig) -> Result<f64>
where
    G: Fn(Complex) -> Result<f64> + Sync,
{
    let rule = cfg.radial_rule();
    let rows: Vec<Result<f64>> = rule
        .par_iter()
        .map(|&(t, w)| {
            let r = t.sqrt();
            let mut s = 0.0;
            for z in cfg.circle(r) {
                s += g(z)?;
            }
            Ok(w * s / cfg.n_theta as f64)
        })
        .collect();
    // fixed summation order keeps the result deterministic
    rows.into_iter().sum()
}

/// c ∫₀¹ (1 − r²)^{c−1} h(r) 2r dr with c = exponent + 1, computed after the
/// substitution s = (1 − r²)^c, which turns the weight into ds on [0, 1].
pub fn weighted_radial_integral<H>(h: H, exponent: f64, cfg: &GridConfig) -> Result<f64>
where
    H: Fn(f64) -> Result<f64> + Sync,
{
    let c = exponent + 1.0;
    if !(c > 0.0) {
        return Err(WcoError::Parameter(format!(
            "weight exponent {exponent} must exceed -1"
        )));
    }
    let rule = cfg.radial_rule();
    let terms: Vec<Result<f64>> = rule
        .par_iter()
        .map(|&(s, w)| {
            let r = (1.0 - s.powf(1.0 / c)).max(0.0).sqrt();
            Ok(w * h(r)?)
        })
        .collect();
    terms.into_iter().sum()
}

/// Where a supremum search located its best value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupResult {
    pub value: f64,
    pub at: Complex,
}

/// Polar grid scan followed by local golden-section refinement of the best
/// grid local maxima. The returned value is always an attained function
/// value, hence a lower bound for the true supremum.
#[derive(Clone, Debug)]
pub struct SupSearch {
    /// Scan radii, increasing; may start at 0.
    pub radii: Vec<f64>,
    pub n_angles: usize,
    /// Number of grid local maxima refined.
    pub candidates: usize,
    pub max_rounds: usize,
    /// Bracket width at which a golden-section search stops.
    pub x_tol: f64,
    /// Refinement never moves beyond this radius.
    pub r_cap: f64,
}

impl SupSearch {
    pub fn for_grid(cfg: &GridConfig) -> Self {
        let radii = cfg.scan_radii();
        SupSearch {
            radii,
            n_angles: cfg.n_theta,
            candidates: 8,
            max_rounds: 12,
            x_tol: 1e-10,
            r_cap: cfg.r_max,
        }
    }

    fn angle(&self, j: isize) -> f64 {
        2.0 * PI * j as f64 / self.n_angles as f64
    }

    pub fn run<G>(&self, g: G) -> Result<SupResult>
    where
        G: Fn(Complex) -> Result<f64> + Sync,
    {
        let nr = self.radii.len();
        let na = self.n_angles;
        let rows: Vec<Result<Vec<f64>>> = self
            .radii
            .par_iter()
            .map(|&r| {
                if r == 0.0 {
                    let v = g(Complex::new(0.0, 0.0))?;
                    Ok(vec![v; na])
                } else {
                    (0..na)
                        .map(|j| g(Complex::from_polar(r, self.angle(j as isize))))
                        .collect()
                }
            })
            .collect();
        let grid: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;

        let mut best = SupResult {
            value: f64::NEG_INFINITY,
            at: Complex::new(0.0, 0.0),
        };
        let mut local: Vec<(f64, usize, usize)> = Vec::new();
        for i in 0..nr {
            for j in 0..na {
                let v = grid[i][j];
                if v.is_nan() {
                    return Err(WcoError::NonFinite("NaN in supremum scan".into()));
                }
                if v > best.value {
                    best = SupResult {
                        value: v,
                        at: Complex::from_polar(self.radii[i], self.angle(j as isize)),
                    };
                }
                if self.radii[i] == 0.0 && j > 0 {
                    continue;
                }
                let mut is_max = true;
                'nb: for di in -1isize..=1 {
                    let ii = i as isize + di;
                    if ii < 0 || ii >= nr as isize {
                        continue;
                    }
                    for dj in -1isize..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let jj = (j as isize + dj).rem_euclid(na as isize) as usize;
                        if grid[ii as usize][jj] > v {
                            is_max = false;
                            break 'nb;
                        }
                    }
                }
                if is_max {
                    local.push((v, i, j));
                }
            }
        }
        local.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        local.truncate(self.candidates);

        for &(v0, i, j) in &local {
            let refined = self.refine(&g, i, j, v0)?;
            if refined.value > best.value {
                best = refined;
            }
        }
        Ok(best)
    }

    fn refine<G>(&self, g: &G, i: usize, j: usize, v0: f64) -> Result<SupResult>
    where
        G: Fn(Complex) -> Result<f64>,
    {
        let lo = if i == 0 { 0.0 } else { self.radii[i - 1] };
        let hi = if i + 1 < self.radii.len() {
            self.radii[i + 1]
        } else {
            self.r_cap
        }
        .min(self.r_cap);
        let half_r = 0.5 * (hi - lo);
        let half_t = 2.0 * PI / self.n_angles as f64;

        let mut r = self.radii[i];
        let mut t = self.angle(j as isize);
        let mut v = v0;
        for round in 0..self.max_rounds {
            let start = v;
            let (r_lo, r_hi) = if round == 0 {
                (lo, hi)
            } else {
                ((r - half_r).max(0.0), (r + half_r).min(self.r_cap))
            };
            let (r_new, v_r) =
                golden_max(|x| g(Complex::from_polar(x, t)), r_lo, r_hi, self.x_tol)?;
            if v_r > v {
                r = r_new;
                v = v_r;
            }
            if r > 0.0 {
                let (t_new, v_t) = golden_max(
                    |x| g(Complex::from_polar(r, x)),
                    t - half_t,
                    t + half_t,
                    self.x_tol,
                )?;
                if v_t > v {
                    t = t_new;
                    v = v_t;
                }
            }
            if v - start <= 1e-15 * v.abs() {
                break;
            }
        }
        Ok(SupResult {
            value: v,
            at: Complex::from_polar(r, t),
        })
    }
}

/// Golden-section maximization of a unimodal function on [a, b]; the
/// endpoints are evaluated too, so boundary maxima are found.
pub(crate) fn golden_max<F>(f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let fa = f(a)?;
    let fb = f(b)?;
    let (mut best_x, mut best_v) = if fa >= fb { (a, fa) } else { (b, fb) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > x_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best_v {
            best_x = x;
            best_v = v;
        }
    }
    Ok((best_x, best_v))
}

/// sup over 𝔻 of a pointwise real function, as a refined grid maximum
/// (a lower bound for the true supremum).
pub fn sup_over_disk<G>(g: G, cfg: &GridConfig) -> Result<f64>
where
    G: Fn(Complex) -> Result<f64> + Sync,
{
    Ok(SupSearch::for_grid(cfg).run(g)?.value)
}

/// sup over r ∈ [0, r_max] of a radial function: scan of {0} ∪ sup_radii and
/// golden-section refinement around the best scan point.
pub fn sup_over_radii<H>(h: H, cfg: &GridConfig) -> Result<f64>
where
    H: Fn(f64) -> Result<f64>,
{
    let mut radii = vec![0.0];
    radii.extend_from_slice(&cfg.sup_radii);
    let vals: Vec<f64> = radii.iter().map(|&r| h(r)).collect::<Result<_>>()?;
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (k, &v) in vals.iter().enumerate() {
        if v > best {
            best = v;
            arg = k;
        }
    }
    let lo = if arg == 0 { 0.0 } else { radii[arg - 1] };
    let hi = if arg + 1 < radii.len() { radii[arg + 1] } else { cfg.r_max };
    let (_, v) = golden_max(&h, lo, hi.min(cfg.r_max), 1e-10)?;
    Ok(best.max(v))
}

/// True when extracting `count` coefficients on radius r amplifies round-off
/// beyond the 1e-12 level.
pub fn extraction_ill_conditioned(count: usize, r: f64) -> bool {
    r.powi(count as i32) < 1e-12
}

/// First `count` Taylor coefficients from a discrete Fourier transform of the
/// samples on the circle of radius r.
pub fn taylor_coefficients(
    f: &AnalyticExpr,
    count: usize,
    r: f64,
    cfg: &GridConfig,
) -> Result<Vec<Complex>> {
    if !(r > 0.0 && r <= cfg.r_max) {
        return Err(WcoError::Parameter(format!(
            "extraction radius {r} must lie in (0, r_max]"
        )));
    }
    if count > cfg.n_theta / 2 {
        return Err(WcoError::Parameter(format!(
            "cannot extract {count} coefficients from {} samples",
            cfg.n_theta
        )));
    }
    if extraction_ill_conditioned(count, r) {
        log::warn!("taylor extraction of {count} coefficients at radius {r} is ill-conditioned");
    }
    let n = cfg.n_theta;
    let mut buf: Vec<Complex> = cfg.circle(r).map(|z| f.eval(z)).collect::<Result<_>>()?;
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut scale = n as f64;
    let mut out = Vec::with_capacity(count);
    for c in buf.into_iter().take(count) {
        out.push(c / scale);
        scale *= r;
    }
    Ok(out)
}
