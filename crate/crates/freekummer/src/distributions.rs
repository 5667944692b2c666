//! Free-Poisson and free-Kummer laws: supports, densities, closed-form
//! Cauchy transforms, and recovery of a free-Kummer law from the quadratic
//! equation satisfied by its Cauchy transform.

use crate::error::{domain, numeric, Error, Result};
use crate::transforms::{cosine_nodes, stieltjes_atom0, DensityFn, SpectralMeasure, DEFAULT_NODES};
use num_complex::Complex64 as C;
use std::f64::consts::PI;
use std::sync::Arc;

/// Product of principal square roots √(z−a)·√(z−b); behaves like z − (a+b)/2 at infinity off [a, b].
pub fn sqrt_pair(z: C, a: f64, b: f64) -> C {
    (z - a).sqrt() * (z - b).sqrt()
}

/// Rate λ and scale γ of ν(λ, γ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreePoissonParams {
    pub lambda: f64,
    pub gamma_scale: f64,
}

impl FreePoissonParams {
    pub fn new(lambda: f64, gamma_scale: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite() && gamma_scale > 0.0 && gamma_scale.is_finite()) {
            return domain(format!("free Poisson needs lambda > 0 and scale > 0, got ({lambda}, {gamma_scale})"));
        }
        Ok(FreePoissonParams { lambda, gamma_scale })
    }

    pub fn support(&self) -> (f64, f64) {
        let s = self.lambda.sqrt();
        (self.gamma_scale * (1.0 - s).powi(2), self.gamma_scale * (1.0 + s).powi(2))
    }

    pub fn atom0(&self) -> f64 {
        (1.0 - self.lambda).max(0.0)
    }

    /// Density of the absolutely continuous part (total mass min(λ, 1)).
    pub fn density(&self, x: f64) -> f64 {
        let (l, g) = (self.lambda, self.gamma_scale);
        let q = 4.0 * l * g * g - (x - g * (1.0 + l)).powi(2);
        if x <= 0.0 || q <= 0.0 {
            return 0.0;
        }
        q.sqrt() / (2.0 * PI * g * x)
    }

    /// G(z) = 2/(z + γ(1−λ) + √(z−a)√(z−b)).
    pub fn cauchy(&self, z: C) -> C {
        let (a, b) = self.support();
        2.0 / (z + self.gamma_scale * (1.0 - self.lambda) + sqrt_pair(z, a, b))
    }
}

pub fn mp_measure(p: &FreePoissonParams) -> Result<SpectralMeasure> {
    let (lo, hi) = p.support();
    let q = *p;
    SpectralMeasure::from_density(p.atom0(), lo, hi, Arc::new(move |x| q.density(x)), DEFAULT_NODES)
}

/// Regime of a free-Kummer parameter triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KummerRegime {
    /// α ≠ 1
    General,
    /// α = 1 and 1−β > (1+√γ)²: a shifted free-Poisson law
    ShiftedPoisson,
    /// α = 1 otherwise: support [0, b]
    Boundary,
}

/// K(α, β, γ) with its derived support, σ (α = 1 boundary regime) and δ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeKummerParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub sigma: Option<f64>,
    pub delta: f64,
    pub regime: KummerRegime,
}

fn check_triple(alpha: f64, beta: f64, gamma: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite() && gamma > 0.0 && gamma.is_finite() && beta.is_finite()) {
        return domain(format!("free-Kummer needs alpha > 0, gamma > 0, finite beta; got ({alpha}, {beta}, {gamma})"));
    }
    Ok(())
}

/// Residual of the endpoint system for α ≠ 1.
pub fn endpoint_residual(alpha: f64, beta: f64, gamma: f64, a: f64, b: f64) -> f64 {
    let s = ((a + 1.0) * (b + 1.0)).sqrt();
    let r1 = gamma + beta / s - (alpha - 1.0).abs() / (a * b).sqrt();
    let r2 = gamma * (a + b) / 2.0 - alpha + 1.0 + beta - beta / s - 2.0;
    r1.abs().max(r2.abs())
}

/// Positive root b of γb/2 + β − β/√(b+1) = 2.
pub fn boundary_endpoint(beta: f64, gamma: f64) -> Result<f64> {
    let f = |b: f64| gamma * b / 2.0 + beta - beta / (b + 1.0).sqrt() - 2.0;
    let mut hi = 1.0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e15 {
            return numeric("no positive root for the boundary endpoint equation");
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sign changes of `f` on a log grid over [lo, hi], restricted to where `feasible` holds.
/// Windows that straddle the feasibility edge are clipped to their feasible part.
fn scan_roots(lo: f64, hi: f64, feasible: &dyn Fn(f64) -> bool, f: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let n = 4000;
    let grid: Vec<f64> = (0..=n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / n as f64).exp()).collect();
    let bisect = |mut lo: f64, mut hi: f64, pred: &dyn Fn(f64) -> bool| {
        // pred(lo) holds, pred(hi) does not
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if pred(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (mut s0, mut s1) = (w[0], w[1]);
        match (feasible(s0), feasible(s1)) {
            (false, false) => continue,
            (true, true) => {}
            (true, false) => s1 = bisect(s0, s1, feasible),
            (false, true) => s0 = bisect(s1, s0, feasible),
        }
        let (f0, f1) = (f(s0), f(s1));
        if f0 == 0.0 {
            roots.push(s0);
        } else if f0 * f1 < 0.0 {
            roots.push(bisect(s0, s1, &|x| f(x) * f0 > 0.0));
        }
    }
    roots
}

/// Endpoints for α ≠ 1. With s = √((a+1)(b+1)) the second equation gives
/// a+b and ab as functions of s, leaving one scalar equation in s. When a is
/// tiny that equation loses ab to cancellation, so the same system is also
/// scanned in t = √(ab), where the first equation fixes s.
fn general_endpoints(alpha: f64, beta: f64, gamma: f64) -> Result<(f64, f64)> {
    let k = (alpha - 1.0).abs();
    let u_of = |s: f64| 2.0 * (1.0 + alpha - beta + beta / s) / gamma;
    let pair = |u: f64, v: f64| {
        let d = (u * u - 4.0 * v).sqrt();
        let b = (u + d) / 2.0;
        (v / b, b)
    };
    let mut candidates = Vec::new();

    let v_of = |s: f64| s * s - u_of(s) - 1.0;
    let feasible_s = |s: f64| {
        let (u, v) = (u_of(s), v_of(s));
        s > 1.0 && u > 0.0 && v > 0.0 && u * u > 4.0 * v
    };
    let f_s = |s: f64| gamma + beta / s - k / v_of(s).sqrt();
    for s in scan_roots(1.0 + 1e-9, 1e9, &feasible_s, &f_s) {
        candidates.push(pair(u_of(s), v_of(s)));
    }

    if beta == 0.0 {
        let t = k / gamma;
        candidates.push(pair(2.0 * (1.0 + alpha) / gamma, t * t));
    } else {
        let s_of = |t: f64| beta / (k / t - gamma);
        let feasible_t = |t: f64| {
            let s = s_of(t);
            let u = u_of(s);
            s.is_finite() && s > 1.0 && u > 0.0 && u * u > 4.0 * t * t
        };
        let f_t = |t: f64| {
            let s = s_of(t);
            (s * s - u_of(s) - 1.0 - t * t) / (s * s)
        };
        for t in scan_roots(1e-12, 1e6, &feasible_t, &f_t) {
            candidates.push(pair(u_of(s_of(t)), t * t));
        }
    }

    let mut best: Option<(f64, f64, f64)> = None;
    for (a, b) in candidates {
        let r = endpoint_residual(alpha, beta, gamma, a, b);
        if a > 0.0 && a < b && best.map_or(true, |x| r < x.2) {
            best = Some((a, b, r));
        }
    }
    match best {
        Some((a, b, r)) if r <= 1e-10 => Ok((a, b)),
        Some((a, b, r)) => numeric(format!("endpoint solve stalled at a = {a}, b = {b}, residual {r:e}")),
        None => numeric(format!("no endpoint pair 0 < a < b found for ({alpha}, {beta}, {gamma})")),
    }
}

/// Support endpoints (a, b) for any supported regime.
pub fn kummer_endpoints(alpha: f64, beta: f64, gamma: f64) -> Result<(f64, f64)> {
    check_triple(alpha, beta, gamma)?;
    if alpha != 1.0 {
        return general_endpoints(alpha, beta, gamma);
    }
    if 1.0 - beta > (1.0 + gamma.sqrt()).powi(2) {
        let r = (1.0 - beta).sqrt();
        return Ok((-1.0 + (1.0 - r).powi(2) / gamma, -1.0 + (1.0 + r).powi(2) / gamma));
    }
    Ok((0.0, boundary_endpoint(beta, gamma)?))
}

/// (b, σ) for α = 1 in the boundary regime.
pub fn alpha_one_sigma(beta: f64, gamma: f64) -> Result<(f64, f64)> {
    let b = boundary_endpoint(beta, gamma)?;
    Ok((b, gamma + beta / (b + 1.0).sqrt()))
}

/// Whether σ ≥ 0, predicted as 1−β ≤ (1+√γ)² and checked against σ from the solved endpoint.
pub fn sigma_regime_check(beta: f64, gamma: f64) -> Result<bool> {
    if !(gamma > 0.0) {
        return domain("gamma must be positive");
    }
    let predicted = 1.0 - beta <= (1.0 + gamma.sqrt()).powi(2);
    let (_, sigma) = alpha_one_sigma(beta, gamma)?;
    if predicted != (sigma >= -1e-10) {
        return numeric(format!("sign of sigma = {sigma:e} contradicts the predicted regime"));
    }
    Ok(predicted)
}

impl FreeKummerParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        check_triple(alpha, beta, gamma)?;
        let (a, b) = kummer_endpoints(alpha, beta, gamma)?;
        let (regime, sigma) = if alpha != 1.0 {
            (KummerRegime::General, None)
        } else if a > 0.0 {
            (KummerRegime::ShiftedPoisson, None)
        } else {
            let s = gamma + beta / (b + 1.0).sqrt();
            if s < -1e-12 {
                return domain(format!("sigma = {s:e} < 0: beta, gamma outside the nonnegative-sigma range"));
            }
            (KummerRegime::Boundary, Some(s.max(0.0)))
        };
        let mut p = FreeKummerParams { alpha, beta, gamma, a, b, sigma, delta: 0.0, regime };
        let (nodes, jac) = cosine_nodes(a, b, DEFAULT_NODES);
        let m1: f64 = nodes.iter().zip(&jac).map(|(x, j)| x * p.density(*x) * j).sum();
        p.delta = gamma * m1 - alpha + beta + gamma;
        Ok(p)
    }

    pub fn atom0(&self) -> f64 {
        (1.0 - self.alpha).max(0.0)
    }

    /// Density of the absolutely continuous part.
    pub fn density(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        let root = ((x - self.a) * (self.b - x)).sqrt();
        let v = match self.regime {
            KummerRegime::Boundary => {
                root * (self.sigma.unwrap_or(0.0) / x - self.beta / ((1.0 + x) * (self.b + 1.0).sqrt())) / (2.0 * PI)
            }
            _ => {
                let p = (self.a * self.b).sqrt();
                let c = ((self.a + 1.0) * (self.b + 1.0)).sqrt();
                root * ((self.alpha - 1.0).abs() / (x * p) - self.beta / ((1.0 + x) * c)) / (2.0 * PI)
            }
        };
        v.max(0.0)
    }

    /// Closed-form Cauchy transform; removable singularities at z = −1 (and z = 0 when α > 1)
    /// are evaluated through algebraically cancelled forms.
    pub fn cauchy(&self, z: C) -> Result<C> {
        if z.im == 0.0 && z.re >= 0.0 {
            return domain(format!("z = {} lies on [0, inf)", z.re));
        }
        Ok(self.cauchy_raw(z))
    }

    fn cauchy_raw(&self, z: C) -> C {
        let (a, b, al, be, ga) = (self.a, self.b, self.alpha, self.beta, self.gamma);
        let r = sqrt_pair(z, a, b);
        let c = ((a + 1.0) * (b + 1.0)).sqrt();
        // β/(z+1)·(1 + R/c)
        let t_beta = if (z + 1.0).norm() < (z - (1.0 + a + b)).norm() {
            be * (1.0 - z + a + b) / (c * (c - r))
        } else {
            be * (1.0 + r / c) / (z + 1.0)
        };
        let t_alpha = match self.regime {
            KummerRegime::Boundary => -self.sigma.unwrap_or(0.0) * r / z,
            KummerRegime::ShiftedPoisson => C::new(0.0, 0.0),
            KummerRegime::General => {
                let k = al - 1.0;
                let p = (a * b).sqrt();
                if k > 0.0 && z.norm() < (z - (a + b)).norm() {
                    -k * (a + b - z) / (p * (p - r))
                } else {
                    -(k + k.abs() * r / p) / z
                }
            }
        };
        0.5 * (ga + t_beta + t_alpha)
    }

    pub fn measure(&self) -> Result<SpectralMeasure> {
        let p = *self;
        SpectralMeasure::from_density(self.atom0(), self.a, self.b, Arc::new(move |x| p.density(x)), DEFAULT_NODES)
    }

    /// Left side of z(z+1)G² − (γz(z+1) − (α−1)(z+1) + βz)G + γz + δ = 0 at a given G.
    pub fn quadratic_lhs(&self, z: C, g: C) -> C {
        let bz = self.gamma * z * (z + 1.0) - (self.alpha - 1.0) * (z + 1.0) + self.beta * z;
        z * (z + 1.0) * g * g - bz * g + self.gamma * z + self.delta
    }
}

pub fn kummer_measure(alpha: f64, beta: f64, gamma: f64) -> Result<SpectralMeasure> {
    FreeKummerParams::new(alpha, beta, gamma)?.measure()
}

pub fn kummer_cauchy(alpha: f64, beta: f64, gamma: f64, z: C) -> Result<C> {
    let p = FreeKummerParams::new(alpha, beta, gamma)?;
    let far = C::new(-1e7, 0.0);
    let v = far * p.cauchy_raw(far);
    if (v - 1.0).norm() > 1e-4 {
        return numeric(format!("branch check failed: zG(z) = {v} at z = -1e7"));
    }
    p.cauchy(z)
}

pub fn kummer_delta(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    Ok(FreeKummerParams::new(alpha, beta, gamma)?.delta)
}

/// Moments m₀..m_n generated by the quadratic equation for G (Laurent recursion in 1/z).
pub fn quadratic_laurent_moments(alpha: f64, beta: f64, gamma: f64, delta: f64, n: usize) -> Vec<f64> {
    let mut g: Vec<f64> = Vec::with_capacity(n + 1);
    let sq = |g: &[f64], j: isize| -> f64 {
        if j < 0 {
            return 0.0;
        }
        let j = j as usize;
        (0..=j).map(|i| g[i] * g[j - i]).sum()
    };
    for k in 0..=n {
        let ki = k as isize;
        let gm1 = if k >= 1 { g[k - 1] } else { 0.0 };
        let gm2 = if k >= 2 { g[k - 2] } else { 0.0 };
        let mut v = sq(&g, ki - 1) + sq(&g, ki - 2) - gamma * gm1 + (alpha - 1.0) * (gm1 + gm2) - beta * gm1;
        if k == 0 {
            v += gamma;
        }
        if k == 1 {
            v += delta;
        }
        g.push(v / gamma);
    }
    g
}

/// Roots of a monic polynomial z^n + c_{n−1}z^{n−1} + … + c₀ (coefficients low to high, without the leading 1).
pub fn monic_roots(c: &[f64]) -> Vec<C> {
    let n = c.len();
    let eval = |z: C| c.iter().rev().fold(C::new(1.0, 0.0), |acc, ci| acc * z + *ci);
    let scale = 1.0 + c.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let seed = C::new(0.4, 0.9);
    let mut r: Vec<C> = (0..n).map(|k| seed.powu(k as u32) * scale).collect();
    for _ in 0..2000 {
        let mut delta = 0.0_f64;
        for i in 0..n {
            let mut den = C::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= r[i] - r[j];
                }
            }
            let step = eval(r[i]) / den;
            r[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * scale {
            break;
        }
    }
    r
}

/// Free-Kummer law recovered from the quadratic equation for G with a supplied δ.
pub fn kummer_from_quadratic(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<SpectralMeasure> {
    check_triple(alpha, beta, gamma)?;
    if !(beta >= 0.0 || alpha > 1.0) {
        return domain("uniqueness from the quadratic equation needs beta >= 0 or alpha > 1");
    }
    let expected = kummer_delta(alpha, beta, gamma)?;
    if (delta - expected).abs() > 1e-6 * expected.abs().max(1.0) {
        return Err(Error::Validation(format!("delta = {delta} does not match the derived value {expected}")));
    }
    // discriminant B² − 4z(z+1)(γz+δ), B = γz² + b1 z + b0
    let b1 = gamma - alpha + 1.0 + beta;
    let b0 = -(alpha - 1.0);
    let q = [
        b0 * b0,
        2.0 * b0 * b1 - 4.0 * delta,
        b1 * b1 + 2.0 * gamma * b0 - 4.0 * (gamma + delta),
        2.0 * gamma * b1 - 4.0 * gamma,
    ];
    let g2 = gamma * gamma;
    let roots = monic_roots(&[q[0] / g2, q[1] / g2, q[2] / g2, q[3] / g2]);
    let mut pair = (0, 1);
    let mut dmin = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            let d = (roots[i] - roots[j]).norm();
            if d < dmin {
                dmin = d;
                pair = (i, j);
            }
        }
    }
    let mut ends: Vec<f64> = (0..4).filter(|k| *k != pair.0 && *k != pair.1).map(|k| roots[k].re).collect();
    // the double root is only good to √ε numerically; the root sum pins it from the simple ones
    let rr = 0.5 * (-q[3] / g2 - ends[0] - ends[1]);
    for e in ends.iter_mut() {
        *e = e.max(0.0);
    }
    ends.sort_by(f64::total_cmp);
    let (lo, hi) = (ends[0], ends[1]);
    let make = move |s: f64| {
        move |z: C| {
            let bz = gamma * z * z + b1 * z + b0;
            (bz - s * gamma * (z - rr) * sqrt_pair(z, lo, hi)) / (2.0 * z * (z + 1.0))
        }
    };
    let far = C::new(-1e7, 0.0);
    let s = [1.0, -1.0]
        .into_iter()
        .find(|s| (far * make(*s)(far) - 1.0).norm() < 1e-4)
        .ok_or_else(|| Error::Domain("no root of the quadratic decays like 1/z".into()))?;
    let g = make(s);
    for z in [C::new(lo + 0.3 * (hi - lo), 0.1), C::new(-1.0, 0.5), C::new(hi + 1.0, 1.0)] {
        if g(z).im > 1e-12 {
            return domain("selected root is not a Cauchy transform (Im G > 0 on the upper half-plane)");
        }
    }
    // G extends continuously to the cut, so the boundary value is read just above it
    let eps = 1e-13 * (hi - lo);
    let atom0 = stieltjes_atom0(&g);
    let f: DensityFn = Arc::new(move |x: f64| (-g(C::new(x, eps)).im / PI).max(0.0));
    SpectralMeasure::from_density(atom0, lo, hi, f, DEFAULT_NODES)
}

/// Law of R = (1+X)^{-1}. An atom of X at 0 would give R an atom at 1, which the measure model does not hold.
pub fn pushforward_resolvent_shift(mu: &SpectralMeasure) -> Result<SpectralMeasure> {
    if mu.atom0() > 0.0 {
        return domain("measure has an atom at 0; its image would have an atom at 1");
    }
    let (lo, hi) = mu.support();
    if !mu.has_density() {
        return SpectralMeasure::point_mass(1.0 / (1.0 + lo));
    }
    let f = mu.density_fn();
    let density: Option<DensityFn> = f.map(|f| Arc::new(move |r: f64| f(1.0 / r - 1.0) / (r * r)) as DensityFn);
    let nodes = mu.nodes().iter().map(|x| 1.0 / (1.0 + x)).collect();
    Ok(SpectralMeasure::from_parts(0.0, 1.0 / (1.0 + hi), 1.0 / (1.0 + lo), density, nodes, mu.weights().to_vec()))
}
