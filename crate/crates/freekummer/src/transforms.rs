//! Compactly supported measures on [0, ∞) and their analytic transforms.
//!
//! A [`SpectralMeasure`] is an optional atom at 0 plus an absolutely
//! continuous part on [lo, hi]. Integrals use the substitution
//! x = mid + half·cos θ with a midpoint rule in θ, which is spectrally
//! accurate for densities vanishing like a square root at both edges.

use crate::error::{domain, numeric, usage, Result};
use crate::partitions::DiscreteLaw;
use crate::series::Series1;
use num_complex::Complex64 as C;
use std::fmt;
use std::sync::Arc;

/// Default number of quadrature nodes.
pub const DEFAULT_NODES: usize = 2048;

/// A density x ↦ f(x).
pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// atom0·δ₀ + f(x)dx on [lo, hi], or a point mass when lo = hi.
#[derive(Clone)]
pub struct SpectralMeasure {
    atom0: f64,
    lo: f64,
    hi: f64,
    density: Option<DensityFn>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl fmt::Debug for SpectralMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralMeasure")
            .field("atom0", &self.atom0)
            .field("support", &(self.lo, self.hi))
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

/// Midpoint nodes of the cosine substitution on [lo, hi], with the Jacobian folded into the weights.
pub fn cosine_nodes(lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let h = std::f64::consts::PI / n as f64;
    (0..n)
        .map(|j| {
            let th = (j as f64 + 0.5) * h;
            (mid + half * th.cos(), half * th.sin() * h)
        })
        .unzip()
}

impl SpectralMeasure {
    /// atom0·δ₀ plus density f on [lo, hi]; checks mass and sign.
    pub fn from_density(atom0: f64, lo: f64, hi: f64, f: DensityFn, n_nodes: usize) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi.is_finite()) {
            return domain(format!("support [{lo}, {hi}] must satisfy 0 <= lo < hi < inf"));
        }
        if !(0.0..=1.0).contains(&atom0) {
            return domain(format!("atom weight {atom0} outside [0,1]"));
        }
        if n_nodes < 8 {
            return usage("quadrature needs at least 8 nodes");
        }
        let (nodes, jac) = cosine_nodes(lo, hi, n_nodes);
        let mut weights = Vec::with_capacity(n_nodes);
        for (x, j) in nodes.iter().zip(&jac) {
            let v = f(*x);
            if !(v >= -1e-12) {
                return numeric(format!("density {v} at x = {x} is negative or undefined"));
            }
            weights.push(v.max(0.0) * j);
        }
        let m = SpectralMeasure { atom0, lo, hi, density: Some(f), nodes, weights };
        let mass = m.mass();
        if (mass - 1.0).abs() > 1e-8 {
            return numeric(format!("total mass {mass} differs from 1"));
        }
        Ok(m)
    }

    /// δ_c for c ≥ 0.
    pub fn point_mass(c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return domain("point mass must sit in [0, inf)");
        }
        if c == 0.0 {
            return Ok(SpectralMeasure { atom0: 1.0, lo: 0.0, hi: 0.0, density: None, nodes: vec![], weights: vec![] });
        }
        Ok(SpectralMeasure { atom0: 0.0, lo: c, hi: c, density: None, nodes: vec![c], weights: vec![1.0] })
    }

    pub(crate) fn from_parts(
        atom0: f64,
        lo: f64,
        hi: f64,
        density: Option<DensityFn>,
        nodes: Vec<f64>,
        weights: Vec<f64>,
    ) -> Self {
        SpectralMeasure { atom0, lo, hi, density, nodes, weights }
    }

    pub fn atom0(&self) -> f64 {
        self.atom0
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// f(x) inside (lo, hi), else 0.
    pub fn density(&self, x: f64) -> f64 {
        match &self.density {
            Some(f) if x > self.lo && x < self.hi => f(x),
            _ => 0.0,
        }
    }

    pub fn has_density(&self) -> bool {
        self.density.is_some()
    }

    pub fn density_fn(&self) -> Option<DensityFn> {
        self.density.clone()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫ g dμ including the atom.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        let cont: f64 = self.nodes.iter().zip(&self.weights).map(|(x, w)| w * g(*x)).sum();
        if self.atom0 > 0.0 {
            cont + self.atom0 * g(0.0)
        } else {
            cont
        }
    }

    pub fn integrate_c(&self, g: impl Fn(f64) -> C) -> C {
        let cont: C = self.nodes.iter().zip(&self.weights).map(|(x, w)| g(*x) * *w).sum();
        if self.atom0 > 0.0 {
            cont + g(0.0) * self.atom0
        } else {
            cont
        }
    }

    pub fn mass(&self) -> f64 {
        self.atom0 + self.weights.iter().sum::<f64>()
    }

    /// m₀, …, m_n.
    pub fn moments(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|k| self.integrate(|x| x.powi(k as i32))).collect()
    }

    /// Smallest density value over the quadrature nodes (0 without a density).
    pub fn min_density_at_nodes(&self) -> f64 {
        match &self.density {
            Some(f) => self.nodes.iter().map(|x| f(*x)).fold(f64::INFINITY, f64::min),
            None => 0.0,
        }
    }

    /// The measure as a finitely supported law (quadrature nodes plus the atom).
    pub fn law(&self) -> DiscreteLaw<f64> {
        let mut nodes = Vec::with_capacity(self.nodes.len() + 1);
        let mut weights = Vec::with_capacity(self.nodes.len() + 1);
        if self.atom0 > 0.0 {
            nodes.push(0.0);
            weights.push(self.atom0);
        }
        nodes.extend_from_slice(&self.nodes);
        weights.extend_from_slice(&self.weights);
        DiscreteLaw { nodes, weights }
    }
}

/// G(z) = ∫ dμ(x)/(z − x).
pub fn cauchy_transform(mu: &SpectralMeasure, z: C) -> Result<C> {
    if z.im == 0.0 && z.re >= mu.lo && z.re <= mu.hi && !(mu.lo == 0.0 && mu.hi == 0.0) {
        return domain(format!("z = {} lies in the support", z.re));
    }
    if z == C::new(0.0, 0.0) && mu.atom0 > 0.0 {
        return domain("z = 0 is the atom of the measure");
    }
    let mut g: C = mu.nodes.iter().zip(&mu.weights).map(|(x, w)| *w / (z - *x)).sum();
    if mu.atom0 > 0.0 {
        g += mu.atom0 / z;
    }
    Ok(g)
}

/// M(z) = ∫ zx/(1 − zx) dμ(x).
pub fn moment_transform(mu: &SpectralMeasure, z: C) -> Result<C> {
    if z.im == 0.0 && z.re != 0.0 {
        let t = 1.0 / z.re;
        if t >= mu.lo && t <= mu.hi {
            return domain(format!("1 - zx vanishes on the support at z = {}", z.re));
        }
    }
    Ok(mu.nodes.iter().zip(&mu.weights).map(|(x, w)| *w * z * *x / (1.0 - z * *x)).sum())
}

/// Σ_{k=1}^{n} m_k z^k.
pub fn moment_transform_series(mu: &SpectralMeasure, n: usize) -> Series1<f64> {
    moment_series(&mu.moments(n), n)
}

/// Moment series from m₀..m_n (m₀ ignored).
pub fn moment_series(m: &[f64], n: usize) -> Series1<f64> {
    Series1::from_fn(n, |k| if k == 0 { 0.0 } else { m.get(k).copied().unwrap_or(0.0) })
}

/// η = M/(1 + M).
pub fn eta_transform(mu: &SpectralMeasure, z: C) -> Result<C> {
    let m = moment_transform(mu, z)?;
    if (m + 1.0).norm() < 1e-14 {
        return domain("M(z) = -1 is a pole of eta");
    }
    Ok(m / (m + 1.0))
}

/// η series from a moment series with zero constant term.
pub fn eta_series(m: &Series1<f64>) -> Result<Series1<f64>> {
    let one = Series1::one(m.order());
    m.div(&one.add(m)?)
}

/// S(z) = (1+z)/z · M^{⟨-1⟩}(z) to order n, using moments up to n+1.
pub fn s_transform_from_moments(m: &[f64], n: usize) -> Result<Series1<f64>> {
    if m.len() < n + 2 {
        return usage(format!("S-transform to order {n} needs moments up to order {}", n + 1));
    }
    if m[1] == 0.0 {
        return domain("S-transform needs a nonzero first moment");
    }
    let minv = moment_series(m, n + 1).revert()?;
    let q = minv.div_z()?;
    let one_plus_z = Series1::new(vec![1.0, 1.0], n);
    q.mul(&one_plus_z)
}

pub fn s_transform_series(mu: &SpectralMeasure, n: usize) -> Result<Series1<f64>> {
    s_transform_from_moments(&mu.moments(n + 1), n)
}

/// ε values used for Stieltjes inversion.
pub const EPS_LADDER: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Two-step Richardson extrapolation of a quantity with an expansion in powers of ε (ε halved along the ladder).
pub fn richardson(v: [f64; 3]) -> f64 {
    let d1a = 2.0 * v[1] - v[0];
    let d1b = 2.0 * v[2] - v[1];
    (4.0 * d1b - d1a) / 3.0
}

/// −(1/π) lim Im G(x + iε). Inside (lo, hi) the ladder is scaled by
/// min(1, dist(x, edge)/(hi − lo)) so that ε stays small compared to the distance to a branch point.
pub fn stieltjes_density(g: &dyn Fn(C) -> C, x: f64, support: (f64, f64), ladder: &[f64; 3]) -> f64 {
    let (lo, hi) = support;
    let scale = if hi > lo && x > lo && x < hi { ((x - lo).min(hi - x) / (hi - lo)).min(1.0) } else { 1.0 };
    let v = ladder.map(|e| -g(C::new(x, e * scale)).im / std::f64::consts::PI);
    richardson(v)
}

/// Result of a Stieltjes inversion on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct InvertedDensity {
    pub atom0: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

/// Atom at 0: −lim_{t↓0} t·G(−t). The ladder halves √t, which also removes
/// the √t term produced by densities with an x^{-1/2} singularity at 0.
pub fn stieltjes_atom0(g: &dyn Fn(C) -> C) -> f64 {
    let v = [1e-3, 5e-4, 2.5e-4].map(|s: f64| {
        let t = s * s;
        t * g(C::new(-t, 0.0)).re * -1.0
    });
    richardson(v).max(0.0)
}

fn check_decay(g: &dyn Fn(C) -> C) -> Result<()> {
    for z in [C::new(-1e7, 0.0), C::new(0.0, 1e7)] {
        let v = z * g(z);
        if !v.re.is_finite() || (v - 1.0).norm() > 1e-3 {
            return domain(format!("zG(z) = {v} at z = {z}; G does not decay like 1/z"));
        }
    }
    Ok(())
}

/// Density and atom at 0 recovered from a Cauchy transform.
pub fn stieltjes_invert(g: &dyn Fn(C) -> C, grid: &[f64], support: (f64, f64), ladder: &[f64; 3]) -> Result<InvertedDensity> {
    check_decay(g)?;
    let density = grid.iter().map(|&x| stieltjes_density(g, x, support, ladder)).collect();
    Ok(InvertedDensity { atom0: stieltjes_atom0(g), grid: grid.to_vec(), density })
}

/// Measure whose density is obtained pointwise by Stieltjes inversion of `g`.
pub fn stieltjes_measure(g: Arc<dyn Fn(C) -> C + Send + Sync>, support: (f64, f64), n_nodes: usize) -> Result<SpectralMeasure> {
    check_decay(&*g)?;
    let atom0 = stieltjes_atom0(&*g);
    let gg = g.clone();
    let f: DensityFn = Arc::new(move |x| stieltjes_density(&*gg, x, support, &EPS_LADDER).max(0.0));
    SpectralMeasure::from_density(atom0, support.0, support.1, f, n_nodes)
}

/// Unique t < 0 with M(t) = target for M increasing on (−∞, 0) with M(0) = 0.
pub fn invert_m_on_negative_axis(m: &dyn Fn(f64) -> f64, target: f64) -> Result<f64> {
    if !(target <= 0.0) {
        return domain(format!("target {target} outside the range (M(-inf), 0]"));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let mut lo = -1.0;
    while m(lo) > target {
        lo *= 2.0;
        if lo < -1e15 {
            return domain(format!("target {target} below the range of M on the negative axis"));
        }
    }
    let mut hi = 0.0_f64;
    // coarse monotonicity guard on the bracket
    let probe: Vec<f64> = (0..=16).map(|k| m(lo + (hi - lo) * k as f64 / 16.0)).collect();
    if probe.windows(2).any(|p| p[1] < p[0] - 1e-13 * (1.0 + p[0].abs())) {
        return numeric("M is not monotone on the bracket");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if m(mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // one secant-Newton polish inside the bracket
    let t = 0.5 * (lo + hi);
    let h = (hi - lo).max(1e-14 * t.abs().max(1e-300));
    let d = (m(t + h) - m(t - h)) / (2.0 * h);
    let cand = if d > 0.0 { t - (m(t) - target) / d } else { t };
    Ok(if cand >= lo && cand <= hi { cand } else { t })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp11() -> SpectralMeasure {
        let f: DensityFn = Arc::new(|x: f64| (x * (4.0 - x)).max(0.0).sqrt() / (2.0 * std::f64::consts::PI * x));
        SpectralMeasure::from_density(0.0, 0.0, 4.0, f, DEFAULT_NODES).unwrap()
    }

    #[test]
    fn point_mass_cauchy() {
        let d = SpectralMeasure::point_mass(1.0).unwrap();
        assert!((cauchy_transform(&d, C::new(2.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        assert!(cauchy_transform(&d, C::new(1.0, 0.0)).is_err());
        let z = C::new(-0.4, 0.0);
        assert!((moment_transform(&d, z).unwrap() - z / (1.0 - z)).norm() < 1e-15);
        assert!((eta_transform(&d, z).unwrap() - z).norm() < 1e-15);
    }

    #[test]
    fn catalan_moments() {
        let s = moment_transform_series(&mp11(), 4);
        for (k, c) in [1.0, 2.0, 5.0, 14.0].iter().enumerate() {
            assert!((s.coefficient(k + 1) - c).abs() < 1e-10);
        }
    }

    #[test]
    fn m_and_g_relation() {
        let mu = mp11();
        for k in 1..20 {
            let z = -0.1 * k as f64;
            let g = cauchy_transform(&mu, C::new(1.0 / z, 0.0)).unwrap();
            let m = moment_transform(&mu, C::new(z, 0.0)).unwrap();
            assert!((g - z * (1.0 + m)).norm() < 1e-10);
        }
    }

    #[test]
    fn inversion_of_one_over_z() {
        let g = |z: C| 1.0 / z;
        let inv = stieltjes_invert(&g, &[0.5, 1.0], (0.0, 1.0), &EPS_LADDER).unwrap();
        assert!((inv.atom0 - 1.0).abs() < 1e-12);
        assert!(inv.density.iter().all(|d| d.abs() < 1e-6));
        assert!(stieltjes_invert(&|_z: C| C::new(1.0, 0.0), &[0.5], (0.0, 1.0), &EPS_LADDER).is_err());
    }

    #[test]
    fn negative_axis_inversion() {
        let m = |t: f64| t / (1.0 - t);
        assert!((invert_m_on_negative_axis(&m, -1.0 / 3.0).unwrap() + 0.5).abs() < 1e-13);
        assert!(invert_m_on_negative_axis(&m, -1.5).is_err());
        assert!(invert_m_on_negative_axis(&m, 0.2).is_err());
        let bumpy = |t: f64| t + 0.5 * (20.0 * t).sin();
        assert!(invert_m_on_negative_axis(&bumpy, -0.7).is_err());
    }
}
