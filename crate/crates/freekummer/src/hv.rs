//! The map (X, Y) ↦ (U, V) with R = (I+X)^{-1}, U = R^{1/2} Y R^{1/2} and
//! V = (I+U)^{1/2} X (I+U)^{1/2}, the two-resolvent function
//! k(z,w) = φ(g₁(R)(I−zU)^{-1} g₂(R)(I−wU)^{-1}), and the regression identities
//! that pin down free-Kummer and free-Poisson laws.
//!
//! Parametrization used throughout: for the forward map,
//! X ∼ K(α, α+β, γ) and Y ∼ ν(α+β, 1/γ) give U ∼ K(α+β, α, γ) and V ∼ ν(α, 1/γ).

use crate::distributions::{kummer_from_quadratic, kummer_measure, mp_measure, FreeKummerParams, FreePoissonParams};
use crate::error::{domain, numeric, usage, Error, Result};
use crate::partitions::{DiscreteLaw, Letter, MixedMoments, MomentOracle, Tag};
use crate::series::{Coef, Series1, Series2};
use crate::subordination::{eta_h_series, ry_word, subordination_series, PointwisePair, RealFn};
use crate::transforms::SpectralMeasure;
use num_complex::Complex64 as C;
use std::sync::Arc;

/// Largest moment order accepted by [`hv_moments`].
pub const MAX_HV_ORDER: usize = 8;

/// A free pair (X, Y) with the derived pair (R, Y) and pointwise transforms.
#[derive(Clone)]
pub struct HvInstance {
    pub mu_x: SpectralMeasure,
    pub mu_y: SpectralMeasure,
    /// Laws of R = (1+X)^{-1} and Y.
    pub oracle: MomentOracle<f64>,
    pub x_law: Option<FreeKummerParams>,
    pub y_law: Option<FreePoissonParams>,
    pub u_law: Option<FreeKummerParams>,
    pub v_law: Option<FreePoissonParams>,
    pub transforms: PointwisePair,
}

fn variance(mu: &SpectralMeasure) -> f64 {
    let m = mu.moments(2);
    m[2] - m[1] * m[1]
}

fn check_pair(mu_x: &SpectralMeasure, mu_y: &SpectralMeasure) -> Result<()> {
    if variance(mu_x) <= 1e-12 || variance(mu_y) <= 1e-12 {
        return domain("X and Y must be non-degenerate (variance > 1e-12)");
    }
    if mu_x.support().0 < 0.0 || mu_y.support().0 < 0.0 {
        return domain("X and Y must be positive");
    }
    Ok(())
}

fn r_law(mu_x: &SpectralMeasure) -> DiscreteLaw<f64> {
    mu_x.law().map_nodes(|x| 1.0 / (1.0 + x))
}

/// M(t) = G(1/t)/t − 1 from a Cauchy transform, for t < 0.
fn m_from_cauchy(g: impl Fn(C) -> Result<C> + Send + Sync + 'static) -> RealFn {
    Arc::new(move |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        g(C::new(1.0 / t, 0.0)).map(|v| v.re / t - 1.0).unwrap_or(f64::NAN)
    })
}

impl HvInstance {
    /// Generic instance; M_U is obtained from M_R and M_Y through the S-transform.
    pub fn new(mu_x: SpectralMeasure, mu_y: SpectralMeasure) -> Result<Self> {
        check_pair(&mu_x, &mu_y)?;
        let oracle = MomentOracle::new(r_law(&mu_x), mu_y.law());
        let transforms = PointwisePair::from_oracle(&oracle);
        Ok(HvInstance { mu_x, mu_y, oracle, x_law: None, y_law: None, u_law: None, v_law: None, transforms })
    }

    /// X ∼ K(α, α+β, γ), Y ∼ ν(α+β, 1/γ), with U ∼ K(α+β, α, γ) and V ∼ ν(α, 1/γ)
    /// attached as the predicted image laws. Only existence of the laws is required here.
    pub fn theorem(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha + beta > 0.0 && gamma > 0.0) {
            return domain(format!("need alpha > 0, alpha + beta > 0, gamma > 0; got ({alpha}, {beta}, {gamma})"));
        }
        let x = FreeKummerParams::new(alpha, alpha + beta, gamma)?;
        let y = FreePoissonParams::new(alpha + beta, 1.0 / gamma)?;
        let u = FreeKummerParams::new(alpha + beta, alpha, gamma)?;
        let v = FreePoissonParams::new(alpha, 1.0 / gamma)?;
        let (mu_x, mu_y) = (x.measure()?, mp_measure(&y)?);
        check_pair(&mu_x, &mu_y)?;
        let oracle = MomentOracle::new(r_law(&mu_x), mu_y.law());
        // M_R(t) = φ(tR/(1−tR)) = −t·G_X(t−1)
        let m_r: RealFn = Arc::new(move |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            x.cauchy(C::new(t - 1.0, 0.0)).map(|g| -t * g.re).unwrap_or(f64::NAN)
        });
        let m_y = m_from_cauchy(move |z| Ok(y.cauchy(z)));
        let m_u = m_from_cauchy(move |z| u.cauchy(z));
        Ok(HvInstance {
            mu_x,
            mu_y,
            oracle,
            x_law: Some(x),
            y_law: Some(y),
            u_law: Some(u),
            v_law: Some(v),
            transforms: PointwisePair::new(m_r, m_y, m_u),
        })
    }

    pub fn m_u(&self, z: f64) -> f64 {
        (self.transforms.m_u)(z)
    }

    pub fn omega2(&self, z: f64) -> Result<f64> {
        self.transforms.omega2(z)
    }

    fn strictly_positive_x(&self) -> bool {
        self.mu_x.atom0() == 0.0 && self.mu_x.support().0 > 0.0
    }

    /// φ(X^{-1}) and φ(X^{-2}) when X is strictly positive.
    pub fn inverse_x_moments(&self) -> Result<(f64, f64)> {
        if !self.strictly_positive_x() {
            return domain("X is not strictly positive");
        }
        Ok((self.mu_x.integrate(|x| 1.0 / x), self.mu_x.integrate(|x| 1.0 / (x * x))))
    }
}

/// φ(Uⁿ) and φ(Vⁿ) for n = 0..=order from mixed moments of R and Y.
///
/// φ(Uⁿ) = φ((RY)ⁿ). For V, φ(Vⁿ) = φ((X + X R^{1/2} Y R^{1/2})ⁿ); choosing the second
/// term at positions t₁ < … < t_k and reading cyclically gives Π_j R X^{c_j} Y with
/// c_j the cyclic gap from t_{j−1} to t_j.
pub fn hv_moments(inst: &HvInstance, order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order > MAX_HV_ORDER {
        return usage(format!("HV moments are limited to order {MAX_HV_ORDER}"));
    }
    let mut eng = MixedMoments::new(&inst.oracle);
    let (mut mu, mut mv) = (vec![1.0], vec![1.0]);
    for n in 1..=order {
        mu.push(eng.tracial_moment(&ry_word(n)));
        let mut total = eng.tracial_moment(&[Letter::r(Tag::XPow(n as i32))]);
        for mask in 1u32..(1 << n) {
            let pos: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let mut w = Vec::with_capacity(3 * pos.len());
            for (j, &t) in pos.iter().enumerate() {
                let gap = if j == 0 { t + n - pos[pos.len() - 1] } else { t - pos[j - 1] };
                w.extend([Letter::R, Letter::r(Tag::XPow(gap as i32)), Letter::Y]);
            }
            total += eng.tracial_moment(&w);
        }
        mv.push(total);
    }
    Ok((mu, mv))
}

/// Moment-level comparison of (U, V) with K(α+β, α, γ) and ν(α, 1/γ).
#[derive(Clone, Debug)]
pub struct HvReport {
    pub params: [f64; 3],
    pub order: usize,
    pub moments_u: Vec<f64>,
    pub target_u: Vec<f64>,
    pub moments_v: Vec<f64>,
    pub target_v: Vec<f64>,
    pub dev_u: f64,
    pub dev_v: f64,
    /// None in exploratory mode.
    pub pass: Option<bool>,
}

pub fn hv_regime_ok(alpha: f64, beta: f64, gamma: f64) -> bool {
    alpha > 1.0 && beta > 1.0 - alpha && gamma > 0.0
}

/// Outside α > 1, β > 1−α the run needs `exploratory = true` and reports no verdict.
pub fn verify_hv_property(alpha: f64, beta: f64, gamma: f64, order: usize, tol: f64, exploratory: bool) -> Result<HvReport> {
    let in_regime = hv_regime_ok(alpha, beta, gamma);
    if !in_regime && !exploratory {
        return usage(format!("({alpha}, {beta}, {gamma}) is outside alpha > 1, beta > 1 - alpha, gamma > 0"));
    }
    if order == 0 || order > MAX_HV_ORDER {
        return usage(format!("order must be in 1..={MAX_HV_ORDER}"));
    }
    let inst = HvInstance::theorem(alpha, beta, gamma)?;
    let (moments_u, moments_v) = hv_moments(&inst, order)?;
    let target_u = kummer_measure(alpha + beta, alpha, gamma)?.moments(order);
    let target_v = mp_measure(&FreePoissonParams::new(alpha, 1.0 / gamma)?)?.moments(order);
    let dev = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let (dev_u, dev_v) = (dev(&moments_u, &target_u), dev(&moments_v, &target_v));
    let pass = if exploratory && !in_regime { None } else { Some(dev_u <= tol && dev_v <= tol) };
    Ok(HvReport { params: [alpha, beta, gamma], order, moments_u, target_u, moments_v, target_v, dev_u, dev_v, pass })
}

fn alternating(first: Letter, second: Letter, len: usize) -> Vec<Letter> {
    (0..len).map(|i| if i % 2 == 0 { first } else { second }).collect()
}

/// Boolean cumulants of alternating words in R, Y with one inserted h(R):
/// y_n = β_{2n+1}(Y,R,…,Y), r_n = β_{2n+1}(R,Y,…,R),
/// s_{m,n} = β(Y,R,…,Y [2m+1], h, Y,R,…,Y [2n+1]), t_{m,n} = β(R,Y,…,Y [2m], h, Y,R,…,R [2n]).
#[derive(Clone, Debug, PartialEq)]
pub struct MixedCumulantTable<T: Coef = f64> {
    pub order: usize,
    pub h: Tag,
    pub y: Vec<T>,
    pub r: Vec<T>,
    /// s[m][n] for m + n + 2 ≤ order
    pub s: Vec<Vec<T>>,
    /// t[m][n] for m + n ≤ order
    pub t: Vec<Vec<T>>,
}

impl<T: Coef> MixedCumulantTable<T> {
    pub fn new(o: &MomentOracle<T>, h: Tag, order: usize) -> Self {
        let mut eng = MixedMoments::new(o);
        let hl = Letter::r(h);
        let y = (0..=order).map(|n| eng.boolean_cumulant_letters(&alternating(Letter::Y, Letter::R, 2 * n + 1))).collect();
        let r = (0..=order).map(|n| eng.boolean_cumulant_letters(&alternating(Letter::R, Letter::Y, 2 * n + 1))).collect();
        let mut s = vec![Vec::new(); order.saturating_sub(1)];
        for m in 0..order.saturating_sub(1) {
            for n in 0..=order - 2 - m {
                let mut w = alternating(Letter::Y, Letter::R, 2 * m + 1);
                w.push(hl);
                w.extend(alternating(Letter::Y, Letter::R, 2 * n + 1));
                s[m].push(eng.boolean_cumulant_letters(&w));
            }
        }
        let mut t = vec![Vec::new(); order + 1];
        for m in 0..=order {
            for n in 0..=order - m {
                let mut w = alternating(Letter::R, Letter::Y, 2 * m);
                w.push(hl);
                w.extend(alternating(Letter::Y, Letter::R, 2 * n));
                t[m].push(eng.boolean_cumulant_letters(&w));
            }
        }
        MixedCumulantTable { order, h, y, r, s, t }
    }

    /// max |s_{m,n} − s_{n,m}|, |t_{m,n} − t_{n,m}|.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for tab in [&self.s, &self.t] {
            for m in 0..tab.len() {
                for n in 0..tab[m].len() {
                    worst = worst.max((tab[m][n].clone() - tab[n][m].clone()).magnitude());
                }
            }
        }
        worst
    }

    /// G(z,w) = Σ s_{m,n} z^{m+1} w^{n+1}.
    pub fn g_series(&self) -> Series2<T> {
        Series2::from_fn(self.order, |i, j| if i >= 1 && j >= 1 { self.s[i - 1][j - 1].clone() } else { T::zero() })
    }

    /// H(z,w) = Σ t_{m,n} z^m w^n.
    pub fn h_series(&self) -> Series2<T> {
        Series2::from_fn(self.order, |i, j| self.t[i][j].clone())
    }
}

/// G, H from cumulant tables and from the subordination closed forms.
#[derive(Clone, Debug)]
pub struct GhReport<T: Coef = f64> {
    pub g: Series2<T>,
    pub h: Series2<T>,
    pub g_closed: Series2<T>,
    pub h_closed: Series2<T>,
    /// max over both closed-form comparisons
    pub closed_form_residual: f64,
    /// G·D[ω₁] against H·P with P = (wω₂(z) − zω₂(w))/(z−w)
    pub lemma_gh_residual: f64,
    /// H against G·D[ω₁/z]/D[ω₂] + η^h(ω₂(z), ω₂(w))
    pub lemma_hg_residual: f64,
}

/// D[f] is the divided difference (f(z) − f(w))/(z − w) throughout.
pub fn gh_series<T: Coef>(o: &MomentOracle<T>, h: Tag, order: usize) -> Result<GhReport<T>> {
    if order < 2 {
        return usage("G and H need order >= 2");
    }
    let n = order;
    let table = MixedCumulantTable::new(o, h, n);
    let (g, hh) = (table.g_series(), table.h_series());
    let pair = subordination_series(o, n + 1)?;
    let eta_u = pair.eta_product()?;
    let w2 = pair.omega2.truncate(n);
    let e = eta_h_series(&o.r, h, n)?.eta2.compose(&w2, &w2)?;
    let p = Series2::cross_divided_difference(&pair.omega2).truncate(n);
    let d1 = Series2::divided_difference(&pair.omega1);
    let d2 = Series2::divided_difference(&pair.omega2);
    let deta = Series2::divided_difference(&eta_u);
    let g_closed = p.mul(&d2)?.div(&deta)?.mul(&e)?;
    let h_closed = d1.mul(&d2)?.div(&deta)?.mul(&e)?;
    let closed_form_residual = g.max_abs_diff(&g_closed).max(hh.max_abs_diff(&h_closed));
    let lemma_gh_residual = g.mul(&d1)?.max_abs_diff(&hh.mul(&p)?);
    let m = n - 1;
    let d1z = Series2::divided_difference(&pair.omega1.div_z()?);
    let rhs = g.truncate(m).mul(&d1z)?.div(&d2.truncate(m))?.add(&e.truncate(m))?;
    let lemma_hg_residual = hh.truncate(m).max_abs_diff(&rhs);
    Ok(GhReport { g, h: hh, g_closed, h_closed, closed_form_residual, lemma_gh_residual, lemma_hg_residual })
}

/// Coefficients φ(g₁(R) U^m g₂(R) U^n), m + n ≤ order, from mixed moments.
pub fn k_series_bruteforce<T: Coef>(o: &MomentOracle<T>, g1: Tag, g2: Tag, order: usize) -> Result<Series2<T>> {
    if order > 8 {
        return usage("brute-force k series are limited to order 8");
    }
    let mut eng = MixedMoments::new(o);
    let (a, b) = (Letter::r(g1), Letter::r(g2));
    // U^k = R^{1/2}(YR)^{k−1}Y R^{1/2}; the outer square roots merge with the neighbouring g's
    let tail = |k: usize| -> Vec<Letter> {
        let mut w = Vec::new();
        for i in 0..k {
            if i > 0 {
                w.push(Letter::R);
            }
            w.push(Letter::Y);
        }
        w
    };
    let mut c = vec![vec![T::zero(); order + 1]; order + 1];
    for m in 0..=order {
        for n in 0..=order - m {
            let w: Vec<Letter> = match (m, n) {
                (0, 0) => vec![a, b],
                (0, k) | (k, 0) => [vec![Letter::R, a, b], tail(k)].concat(),
                _ => [vec![Letter::R, a], tail(m), vec![Letter::R, b], tail(n)].concat(),
            };
            c[m][n] = eng.tracial_moment(&w);
        }
    }
    Ok(Series2::from_fn(order, |i, j| c[i][j].clone()))
}

/// k = k₁ + k₂ with k₁ = F(ω₂(z), ω₂(w)), k₂ = P·A₁·A₂/B, where
/// F(s,t) = Σ φ(g₁g₂R^{i+j}) sⁱtʲ, A_k(s,t) = Σ φ(R g_k R^{i+j}) sⁱtʲ, B(s,t) = Σ φ(R^{1+i+j}) sⁱtʲ,
/// each composed with ω₂ in both variables, and P = (wω₂(z) − zω₂(w))/(z−w).
pub fn k_series_from_omega<T: Coef>(r: &DiscreteLaw<T>, omega2: &Series1<T>, g1: Tag, g2: Tag, order: usize) -> Result<Series2<T>> {
    let n = order;
    if omega2.order() < n {
        return usage("omega2 series order below the requested order");
    }
    let w2 = omega2.truncate(n);
    let mom = |f: &dyn Fn(&T) -> T, k: usize| r.expect(|x| f(x) * Tag::Pow(k as i32).eval(x));
    let table = |f: &dyn Fn(&T) -> T| -> Result<Series2<T>> {
        let c: Vec<T> = (0..=n).map(|k| mom(f, k)).collect();
        Series2::from_fn(n, |i, j| c[i + j].clone()).compose(&w2, &w2)
    };
    let k1 = table(&|x: &T| g1.eval(x) * g2.eval(x))?;
    let a1 = table(&|x: &T| x.clone() * g1.eval(x))?;
    let a2 = table(&|x: &T| x.clone() * g2.eval(x))?;
    let bb = table(&|x: &T| x.clone())?;
    if bb.coefficient2(0, 0).is_zero() {
        return numeric("phi(R) = 0: B has zero leading coefficient");
    }
    let p = Series2::cross_divided_difference(&w2);
    let k2 = p.mul(&a1)?.mul(&a2)?.div(&bb)?;
    k1.add(&k2)
}

pub fn k_series_closedform<T: Coef>(o: &MomentOracle<T>, g1: Tag, g2: Tag, order: usize) -> Result<Series2<T>> {
    let pair = subordination_series(o, order.max(1))?;
    k_series_from_omega(&o.r, &pair.omega2, g1, g2, order)
}

/// k(z,w) for g₁ = g₂ = R(I−R)^{-1} = X^{-1}, evaluated pointwise on the negative axis.
pub fn k_special_pointwise(inst: &HvInstance, z: f64, w: f64) -> Result<f64> {
    if !(z < 0.0 && w < 0.0) {
        return domain("k is evaluated at z, w < 0 only");
    }
    let (g1, g2) = inst.inverse_x_moments()?;
    let scale = z.abs().max(w.abs());
    if (z - w).abs() < 1e-3 * scale {
        // diagonal: symmetric differences in z with one Richardson step
        let h = 5e-3 * z.abs();
        let sym = |h: f64| -> Result<f64> { Ok(0.5 * (k_off_diagonal(inst, z + h, w, g1, g2)? + k_off_diagonal(inst, z - h, w, g1, g2)?)) };
        return Ok((4.0 * sym(h / 2.0)? - sym(h)?) / 3.0);
    }
    k_off_diagonal(inst, z, w, g1, g2)
}

fn k_off_diagonal(inst: &HvInstance, z: f64, w: f64, phig: f64, phig2: f64) -> Result<f64> {
    let (mz, mw) = (inst.m_u(z), inst.m_u(w));
    let (oz, ow) = (inst.omega2(z)?, inst.omega2(w)?);
    if !(mz.is_finite() && mw.is_finite()) {
        return numeric("M_U is not finite on the grid");
    }
    let fz = (mz - phig) / (oz - 1.0);
    let fw = (mw - phig) / (ow - 1.0);
    let k1 = (oz * fz / (oz - 1.0) - ow * fw / (ow - 1.0)) / (oz - ow) + (phig + phig2) / ((oz - 1.0) * (ow - 1.0));
    let k2 = (w * oz - z * ow) / ((mz - mw) * (oz - ow) * (z - w)) * (fz - fw).powi(2);
    Ok(k1 + k2)
}

/// Scalar state values entering the regression identities.
///
/// `x_inv`, `x_inv2` are φ(X^{-1}), φ(X^{-2}); `x_sq` is φ(X²); `k` = M_U(−1) = φ((I+U)^{-1}) − 1;
/// `p2` = ω₂(−1). Values requiring invertibility are None when unavailable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionConstants {
    pub a: f64,
    pub b: f64,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub lambda: f64,
    pub p: f64,
    pub x_inv: Option<f64>,
    pub x_inv2: Option<f64>,
    pub x_sq: f64,
    pub k: f64,
    pub p2: f64,
}

impl RegressionConstants {
    /// φ(V), φ(V²) from mixed moments; φ(V^{-1}), φ(V^{-2}) by quadrature of the V law when it is known.
    pub fn compute(inst: &HvInstance) -> Result<Self> {
        let (_, mv) = hv_moments(inst, 2)?;
        let (mut c, mut d) = (None, None);
        if let Some(v) = inst.v_law {
            let mu_v = mp_measure(&v)?;
            if mu_v.atom0() == 0.0 && mu_v.support().0 > 0.0 {
                c = Some(mu_v.integrate(|x| 1.0 / x));
                d = Some(mu_v.integrate(|x| 1.0 / (x * x)));
            }
        }
        let (x_inv, x_inv2) = match inst.inverse_x_moments() {
            Ok((u, v)) => (Some(u), Some(v)),
            Err(_) => (None, None),
        };
        let mx = inst.mu_x.moments(2);
        Ok(RegressionConstants {
            a: mv[1],
            b: mv[2],
            c,
            d,
            lambda: inst.mu_y.moments(1)[1],
            p: mx[1],
            x_inv,
            x_inv2,
            x_sq: mx[2],
            k: inst.m_u(-1.0),
            p2: inst.omega2(-1.0)?,
        })
    }

    fn need(v: Option<f64>, what: &str) -> Result<f64> {
        v.ok_or_else(|| Error::Domain(format!("{what} needs a strictly positive variable")))
    }
}

/// `n` points from `lo` to `hi` (lo < hi < 0), log-spaced in |z|.
pub fn negative_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo < hi && hi < 0.0) || n == 0 {
        return Err(Error::Domain(format!("grid needs lo < hi < 0 and n ≥ 1, got [{lo}, {hi}] with n = {n}")));
    }
    if n == 1 {
        return Ok(vec![hi]);
    }
    let (l0, l1) = ((-lo).ln(), (-hi).ln());
    Ok((0..n).map(|k| -(l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp()).collect())
}

/// 40 points on [−5, −0.05].
pub fn default_grid() -> Vec<f64> {
    negative_grid(-5.0, -0.05, 40).expect("valid default grid")
}

fn max_over(grid: &[f64], f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &z in grid {
        let v = f(z)?;
        if !v.is_finite() {
            return numeric(format!("non-finite residual at z = {z}"));
        }
        worst = worst.max(v.abs());
    }
    Ok(worst)
}

/// Residual of one regression identity over the grid.
///
/// 1: (ω₂−1)M_U + ω₂ = z/(z+1)·(aM_U + a − φ(X)).
/// 2: z(M_U − φ(X^{-1}))/(ω₂−1) = cz + c(z+1)M_U.
/// 3: k(z,−1) = d + d(1 + 1/z)M_U with g = X^{-1}.
/// 4: with D = (ω₂−1)M_U + ω₂,
///    φ(X²) + φ(Y)φ(X) + ω₂φ(X) + (ω₂−1)D + D²/(zM_U) = b(1+K)/(z+1) + bz(M_U+1)/(z+1) + φ(Y)D/M_U.
pub fn regression_residual(case: u8, inst: &HvInstance, k: &RegressionConstants, grid: &[f64]) -> Result<f64> {
    match case {
        1 => max_over(grid, |z| {
            let (m, o) = (inst.m_u(z), inst.omega2(z)?);
            Ok((o - 1.0) * m + o - z / (z + 1.0) * (k.a * m + k.a - k.p))
        }),
        2 => {
            let c = RegressionConstants::need(k.c, "phi(V^-1)")?;
            let q = RegressionConstants::need(k.x_inv, "phi(X^-1)")?;
            max_over(grid, |z| {
                let (m, o) = (inst.m_u(z), inst.omega2(z)?);
                Ok(z * (m - q) / (o - 1.0) - c * z - c * (z + 1.0) * m)
            })
        }
        3 => {
            let d = RegressionConstants::need(k.d, "phi(V^-2)")?;
            let g1 = RegressionConstants::need(k.x_inv, "phi(X^-1)")?;
            let g2 = RegressionConstants::need(k.x_inv2, "phi(X^-2)")?;
            max_over(grid, |z| {
                let m = inst.m_u(z);
                Ok(k_minus_one(inst, k, z, g1, g2)? - d - d * (1.0 + 1.0 / z) * m)
            })
        }
        4 => max_over(grid, |z| hveq2(inst, k, z, 1.0 + k.k)),
        _ => usage("regression case must be 1, 2, 3 or 4"),
    }
}

/// k(z, −1) with the constants' K = M_U(−1) and p = ω₂(−1).
fn k_minus_one(inst: &HvInstance, k: &RegressionConstants, z: f64, g1: f64, g2: f64) -> Result<f64> {
    if (z + 1.0).abs() < 1e-3 {
        let h = 5e-3;
        let f = |z: f64| k_minus_one(inst, k, z, g1, g2);
        let sym = |h: f64| -> Result<f64> { Ok(0.5 * (f(-1.0 + h)? + f(-1.0 - h)?)) };
        return Ok((4.0 * sym(h / 2.0)? - sym(h)?) / 3.0);
    }
    let (mz, oz) = (inst.m_u(z), inst.omega2(z)?);
    let (kk, p) = (k.k, k.p2);
    let fz = (mz - g1) / (oz - 1.0);
    let fw = (kk - g1) / (p - 1.0);
    let k1 = (oz * fz / (oz - 1.0) - p * fw / (p - 1.0)) / (oz - p) + (g1 + g2) / ((oz - 1.0) * (p - 1.0));
    let k2 = -(oz + z * p) / ((mz - kk) * (oz - p) * (z + 1.0)) * (fz - fw).powi(2);
    Ok(k1 + k2)
}

fn hveq2(inst: &HvInstance, k: &RegressionConstants, z: f64, resolvent_mean: f64) -> Result<f64> {
    let (m, o) = (inst.m_u(z), inst.omega2(z)?);
    let dd = (o - 1.0) * m + o;
    let lhs = k.x_sq + k.lambda * k.p + o * k.p + (o - 1.0) * dd + dd * dd / (z * m);
    let rhs = k.b * resolvent_mean / (z + 1.0) + k.b * z / (z + 1.0) * (m + 1.0) + k.lambda * dd / m;
    Ok(lhs - rhs)
}

/// Free-Kummer law of X and free-Poisson law of Y determined by one regression case,
/// together with the quadratic parameters (α′, β′, γ′, ρ) of M_U's equation.
#[derive(Clone, Debug)]
pub struct Characterization {
    pub case: u8,
    pub lambda: f64,
    pub x: FreeKummerParams,
    pub y: FreePoissonParams,
    pub quadratic: [f64; 4],
}

fn positive_gap(v: f64, what: &str) -> Result<f64> {
    if !(v > 1e-12) {
        return domain(format!("{what} must be positive (got {v:e})"));
    }
    Ok(v)
}

/// Case 1 uses a, c, φ(X), φ(X^{-1}); case 2 uses c, d, φ(X^{-1}), φ(X^{-2}); case 3 uses a, b, φ(X), φ(Y).
///
/// The recovered laws are validated by solving the quadratic equations for U ∼ K(α′, β′, γ′)
/// (constant term ρ + γ′ + β′) and X ∼ K(β′, α′, γ′) (constant term α′ + γ′ + ρ).
pub fn determine_from_equations(case: u8, k: &RegressionConstants) -> Result<Characterization> {
    let (lambda, den, al, be, ga, rho) = match case {
        1 => {
            let c = RegressionConstants::need(k.c, "phi(V^-1)")?;
            let q = RegressionConstants::need(k.x_inv, "phi(X^-1)")?;
            let den = positive_gap(k.a * c - 1.0, "ac - 1")?;
            let lambda = c * (k.a - k.p) + q - c;
            (lambda, den, lambda, k.a * c, c, c * (k.p - k.a))
        }
        2 => {
            let c = RegressionConstants::need(k.c, "phi(V^-1)")?;
            let d = RegressionConstants::need(k.d, "phi(V^-2)")?;
            let a = RegressionConstants::need(k.x_inv, "phi(X^-1)")?;
            let b = RegressionConstants::need(k.x_inv2, "phi(X^-2)")?;
            let den = positive_gap(d - c * c, "d - c^2")?;
            let p = 1.0 + c * (c - a - b) / (a * d);
            let kk = a + c * (p - 1.0);
            let lambda = a * c * c - c.powi(3) - d * kk;
            (lambda, den, lambda, d, c.powi(3), c * c * a - c.powi(3) - lambda)
        }
        3 => {
            let den = positive_gap(k.b - k.a * k.a, "b - a^2")?;
            let lambda = k.lambda;
            (lambda, den / k.a, lambda, k.a, 1.0, k.p - k.a)
        }
        _ => return usage("characterization case must be 1, 2 or 3"),
    };
    if !(lambda > 0.0) {
        return Err(Error::Validation(format!("inconsistent constants: lambda = {lambda:e} <= 0")));
    }
    let q = [al / den, be / den, ga / den, rho / den];
    let [a1, b1, g1, r1] = q;
    kummer_from_quadratic(a1, b1, g1, r1 + g1 + b1)?;
    kummer_from_quadratic(b1, a1, g1, a1 + g1 + r1)?;
    let x = FreeKummerParams::new(b1, a1, g1)?;
    let y = FreePoissonParams::new(a1, 1.0 / g1)?;
    Ok(Characterization { case, lambda, x, y, quadratic: q })
}

/// Named residuals of one characterization case: its lemma identities on the grid, the
/// linear relation c·ω₂ = (ac−1)zM_U + λz (and its case-2/3 analogues), and scalar constraints.
pub fn case_residuals(case: u8, inst: &HvInstance, k: &RegressionConstants, grid: &[f64]) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    match case {
        1 => {
            let c = RegressionConstants::need(k.c, "phi(V^-1)")?;
            let q = RegressionConstants::need(k.x_inv, "phi(X^-1)")?;
            out.push(("regression_v".into(), regression_residual(1, inst, k, grid)?));
            out.push(("regression_v_inv".into(), regression_residual(2, inst, k, grid)?));
            let lambda = c * (k.a - k.p) + q - c;
            let r = max_over(grid, |z| Ok(c * inst.omega2(z)? - (k.a * c - 1.0) * z * inst.m_u(z) - lambda * z))?;
            out.push(("linear_omega".into(), r));
        }
        2 => {
            let c = RegressionConstants::need(k.c, "phi(V^-1)")?;
            let d = RegressionConstants::need(k.d, "phi(V^-2)")?;
            let a = RegressionConstants::need(k.x_inv, "phi(X^-1)")?;
            let b = RegressionConstants::need(k.x_inv2, "phi(X^-2)")?;
            out.push(("regression_v_inv".into(), regression_residual(2, inst, k, grid)?));
            out.push(("regression_v_inv2".into(), regression_residual(3, inst, k, grid)?));
            let p = 1.0 + c * (c - a - b) / (a * d);
            let kk = a + c * (p - 1.0);
            out.push(("omega2_at_minus_one".into(), (p - k.p2).abs()));
            out.push(("m_u_at_minus_one".into(), (kk - k.k).abs()));
            let lambda = a * c * c - c.powi(3) - d * kk;
            let r = max_over(grid, |z| Ok(c.powi(3) * inst.omega2(z)? - (d - c * c) * z * inst.m_u(z) - lambda * z))?;
            out.push(("linear_omega".into(), r));
        }
        3 => {
            out.push(("regression_v".into(), regression_residual(1, inst, k, grid)?));
            // φ((I+U)^{-1}) = φ(X)/a under the first regression condition
            out.push(("regression_v2".into(), max_over(grid, |z| hveq2(inst, k, z, k.p / k.a))?));
            out.push(("second_moment_constraint".into(), (k.b * k.p / k.a - k.x_sq - k.lambda * k.p + (k.a - k.p)).abs()));
            let s = (k.b - k.a * k.a) / k.a;
            let r = max_over(grid, |z| Ok(inst.omega2(z)? - s * z * inst.m_u(z) - k.lambda * z))?;
            out.push(("linear_omega".into(), r));
        }
        _ => return usage("characterization case must be 1, 2 or 3"),
    }
    Ok(out)
}

/// Names of the constants each case depends on.
pub fn case_constants(case: u8) -> &'static [&'static str] {
    match case {
        1 => &["a", "c", "p", "x_inv"],
        2 => &["c", "d", "x_inv", "x_inv2"],
        3 => &["a", "b", "p", "x_sq", "lambda"],
        _ => &[],
    }
}

/// Copy of `k` with one named constant shifted by `eps`.
pub fn perturb(k: &RegressionConstants, name: &str, eps: f64) -> Result<RegressionConstants> {
    let mut out = *k;
    let bump = |v: &mut Option<f64>| {
        if let Some(x) = v.as_mut() {
            *x += eps;
        }
    };
    match name {
        "a" => out.a += eps,
        "b" => out.b += eps,
        "c" => bump(&mut out.c),
        "d" => bump(&mut out.d),
        "lambda" => out.lambda += eps,
        "p" => out.p += eps,
        "x_inv" => bump(&mut out.x_inv),
        "x_inv2" => bump(&mut out.x_inv2),
        "x_sq" => out.x_sq += eps,
        "k" => out.k += eps,
        "p2" => out.p2 += eps,
        _ => return usage(format!("unknown constant {name}")),
    }
    Ok(out)
}

/// Round trip of one case on the instance X ∼ K(α, α+β, γ), Y ∼ ν(α+β, 1/γ).
#[derive(Clone, Debug)]
pub struct CharacterizationReport {
    pub case: u8,
    pub constants: RegressionConstants,
    pub inequality_holds: bool,
    pub residuals: Vec<(String, f64)>,
    pub recovered_x: [f64; 3],
    pub recovered_y: [f64; 2],
    pub expected_x: [f64; 3],
    pub expected_y: [f64; 2],
    pub parameter_error: f64,
    /// For each constant: largest residual after shifting it by 0.1.
    pub perturbed: Vec<(String, f64)>,
}

pub fn characterize_instance(case: u8, alpha: f64, beta: f64, gamma: f64, grid: &[f64]) -> Result<CharacterizationReport> {
    let inst = HvInstance::theorem(alpha, beta, gamma)?;
    let k = RegressionConstants::compute(&inst)?;
    let inequality_holds = match case {
        1 => k.c.map_or(false, |c| k.a * c > 1.0),
        2 => k.c.zip(k.d).map_or(false, |(c, d)| d > c * c),
        3 => k.b > k.a * k.a,
        _ => return usage("characterization case must be 1, 2 or 3"),
    };
    let residuals = case_residuals(case, &inst, &k, grid)?;
    let ch = determine_from_equations(case, &k)?;
    let recovered_x = [ch.x.alpha, ch.x.beta, ch.x.gamma];
    let recovered_y = [ch.y.lambda, ch.y.gamma_scale];
    let expected_x = [alpha, alpha + beta, gamma];
    let expected_y = [alpha + beta, 1.0 / gamma];
    let parameter_error = recovered_x
        .iter()
        .chain(&recovered_y)
        .zip(expected_x.iter().chain(&expected_y))
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    let mut perturbed = Vec::new();
    for name in case_constants(case) {
        let kp = perturb(&k, name, 0.1)?;
        let worst = case_residuals(case, &inst, &kp, grid)?.iter().map(|r| r.1).fold(0.0, f64::max);
        perturbed.push((name.to_string(), worst));
    }
    Ok(CharacterizationReport {
        case,
        constants: k,
        inequality_holds,
        residuals,
        recovered_x,
        recovered_y,
        expected_x,
        expected_y,
        parameter_error,
        perturbed,
    })
}

/// ω₂ = M_R^{⟨−1⟩}∘M_U as a series, with M_U from the moments of the U law.
pub fn omega2_series_from_laws(r: &DiscreteLaw<f64>, u_moments: &[f64], order: usize) -> Result<Series1<f64>> {
    let rm = r.moments(order);
    let m_r = Series1::from_fn(order, |k| if k == 0 { 0.0 } else { rm[k] });
    let m_u = Series1::from_fn(order, |k| if k == 0 { 0.0 } else { u_moments[k] });
    m_r.revert()?.compose(&m_u)
}
