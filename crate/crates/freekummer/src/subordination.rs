//! Subordination functions of the free multiplicative convolution of R and Y.
//!
//! With U = R^{1/2} Y R^{1/2}: M_U(z) = M_R(ω₂(z)) = M_Y(ω₁(z)).
//! Series forms come from mixed moments and reversion; pointwise values on
//! the negative axis come from monotone inversion of moment transforms.

use crate::error::{domain, numeric, usage, Result};
use crate::partitions::{DiscreteLaw, Letter, MixedMoments, MomentOracle, Tag};
use crate::series::{Coef, Series1, Series2};
use crate::transforms::invert_m_on_negative_axis;
use std::sync::Arc;

/// Truncated series of ω₁, ω₂, M_U = M_{RY}, M_R and M_Y.
#[derive(Clone, Debug, PartialEq)]
pub struct SubordinationPair<T: Coef = f64> {
    pub omega1: Series1<T>,
    pub omega2: Series1<T>,
    pub m_product: Series1<T>,
    pub m_r: Series1<T>,
    pub m_y: Series1<T>,
}

fn law_moment_series<T: Coef>(law: &DiscreteLaw<T>, n: usize) -> Series1<T> {
    let m = law.moments(n);
    Series1::from_fn(n, |k| if k == 0 { T::zero() } else { m[k].clone() })
}

/// (RY)^k as letters.
pub fn ry_word(k: usize) -> Vec<Letter> {
    (0..k).flat_map(|_| [Letter::R, Letter::Y]).collect()
}

pub fn subordination_series<T: Coef>(o: &MomentOracle<T>, n: usize) -> Result<SubordinationPair<T>> {
    if n == 0 {
        return usage("subordination series need order >= 1");
    }
    let m_r = law_moment_series(&o.r, n);
    let m_y = law_moment_series(&o.y, n);
    if m_r.coefficient(1).is_zero() || m_y.coefficient(1).is_zero() {
        return domain("subordination needs nonzero first moments");
    }
    let mut eng = MixedMoments::new(o);
    let mp: Vec<T> = (0..=n).map(|k| if k == 0 { T::zero() } else { eng.moment(&ry_word(k)) }).collect();
    let m_product = Series1::new(mp, n);
    let omega1 = m_y.revert()?.compose(&m_product)?;
    let omega2 = m_r.revert()?.compose(&m_product)?;
    Ok(SubordinationPair { omega1, omega2, m_product, m_r, m_y })
}

impl<T: Coef> SubordinationPair<T> {
    /// max of |M_Y∘ω₁ − M_U| and |M_R∘ω₂ − M_U| over coefficients.
    pub fn consistency_residual(&self) -> Result<f64> {
        let a = self.m_y.compose(&self.omega1)?.max_abs_diff(&self.m_product);
        let b = self.m_r.compose(&self.omega2)?.max_abs_diff(&self.m_product);
        Ok(a.max(b))
    }

    /// η_U = M_U/(1+M_U).
    pub fn eta_product(&self) -> Result<Series1<T>> {
        let one = Series1::one(self.m_product.order());
        self.m_product.div(&one.add(&self.m_product)?)
    }

    /// Coefficients of ω₁ω₂ − z·η_U.
    pub fn useful_identity_residual(&self) -> Result<f64> {
        let lhs = self.omega1.mul(&self.omega2)?;
        let rhs = self.eta_product()?.mul_z();
        Ok(lhs.max_abs_diff(&rhs))
    }
}

/// Coefficients of ω₁ against β_{2k−1}(R,Y,…,R) and of ω₂ against β_{2k−1}(Y,R,…,Y), k ≤ n.
pub fn omega_cumulant_residual<T: Coef>(o: &MomentOracle<T>, pair: &SubordinationPair<T>, n: usize) -> f64 {
    let mut eng = MixedMoments::new(o);
    let mut worst: f64 = 0.0;
    for k in 1..=n.min(pair.omega1.order()) {
        let alt = |first: Letter, second: Letter| -> Vec<Letter> {
            (0..2 * k - 1).map(|i| if i % 2 == 0 { first } else { second }).collect()
        };
        let b1 = eng.boolean_cumulant_letters(&alt(Letter::R, Letter::Y));
        let b2 = eng.boolean_cumulant_letters(&alt(Letter::Y, Letter::R));
        worst = worst.max((pair.omega1.coefficient(k) - b1).magnitude());
        worst = worst.max((pair.omega2.coefficient(k) - b2).magnitude());
    }
    worst
}

/// Pointwise transform on the negative axis.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// t ↦ Σ wᵢ t xᵢ/(1 − t xᵢ).
pub fn law_m_transform(law: &DiscreteLaw<f64>) -> RealFn {
    let l = law.clone();
    Arc::new(move |t: f64| l.nodes.iter().zip(&l.weights).map(|(x, w)| w * t * x / (1.0 - t * x)).sum())
}

/// ω₂(z) = M_R^{⟨−1⟩}(M_U(z)) for z < 0.
pub fn omega2_pointwise(m_r: &dyn Fn(f64) -> f64, m_u_at_z: f64) -> Result<f64> {
    invert_m_on_negative_axis(m_r, m_u_at_z)
}

/// M_R, M_Y, M_U on the negative axis, with ω₁, ω₂ by inversion.
#[derive(Clone)]
pub struct PointwisePair {
    pub m_r: RealFn,
    pub m_y: RealFn,
    pub m_u: RealFn,
}

impl PointwisePair {
    pub fn new(m_r: RealFn, m_y: RealFn, m_u: RealFn) -> Self {
        PointwisePair { m_r, m_y, m_u }
    }

    /// From two discrete laws. M_U is obtained by solving
    /// M_U^{⟨−1⟩}(m) = (m+1)/m · M_R^{⟨−1⟩}(m) · M_Y^{⟨−1⟩}(m), i.e. multiplicativity of S.
    pub fn from_oracle(o: &MomentOracle<f64>) -> Self {
        let m_r = law_m_transform(&o.r);
        let m_y = law_m_transform(&o.y);
        let (fr, fy) = (m_r.clone(), m_y.clone());
        let m_u: RealFn = Arc::new(move |z: f64| product_m_pointwise(&*fr, &*fy, z).unwrap_or(f64::NAN));
        PointwisePair { m_r, m_y, m_u }
    }

    pub fn omega1(&self, z: f64) -> Result<f64> {
        invert_m_on_negative_axis(&*self.m_y, (self.m_u)(z))
    }

    pub fn omega2(&self, z: f64) -> Result<f64> {
        invert_m_on_negative_axis(&*self.m_r, (self.m_u)(z))
    }

    /// max over the grid of |M_R(ω₂) − M_U|, |M_Y(ω₁) − M_U| and |ω₁ω₂ − zM_U/(1+M_U)|.
    pub fn residuals(&self, grid: &[f64]) -> Result<(f64, f64)> {
        let (mut sub, mut useful): (f64, f64) = (0.0, 0.0);
        for &z in grid {
            let mu = (self.m_u)(z);
            if !mu.is_finite() {
                return numeric(format!("M_U({z}) is not finite"));
            }
            let (w1, w2) = (self.omega1(z)?, self.omega2(z)?);
            sub = sub.max(((self.m_r)(w2) - mu).abs()).max(((self.m_y)(w1) - mu).abs());
            useful = useful.max((w1 * w2 - z * mu / (1.0 + mu)).abs());
        }
        Ok((sub, useful))
    }
}

/// M_U(z) for z < 0 from M_R and M_Y.
pub fn product_m_pointwise(m_r: &dyn Fn(f64) -> f64, m_y: &dyn Fn(f64) -> f64, z: f64) -> Result<f64> {
    if !(z < 0.0) {
        return domain("pointwise product transform needs z < 0");
    }
    // ψ(m) = M_U^{⟨−1⟩}(m) is increasing on (−1, 0)
    let psi = |m: f64| -> Option<f64> {
        let a = invert_m_on_negative_axis(m_r, m).ok()?;
        let b = invert_m_on_negative_axis(m_y, m).ok()?;
        Some((m + 1.0) / m * a * b)
    };
    let (mut lo, mut hi) = (-1.0_f64, 0.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        match psi(mid) {
            Some(v) if v > z => hi = mid,
            _ => lo = mid,
        }
    }
    Ok(0.5 * (lo + hi))
}

/// η^h_R as one- and two-variable series.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaH<T: Coef = f64> {
    pub h: Tag,
    pub eta1: Series1<T>,
    pub eta2: Series2<T>,
}

fn r_only_oracle<T: Coef>(r: &DiscreteLaw<T>) -> MomentOracle<T> {
    MomentOracle::new(r.clone(), DiscreteLaw::dirac(T::one()))
}

/// Built from Boolean cumulants β(R,…,R,h,R,…,R) and checked against the resolvent quotients.
pub fn eta_h_series<T: Coef>(r: &DiscreteLaw<T>, h: Tag, n: usize) -> Result<EtaH<T>> {
    let o = r_only_oracle(r);
    let mut eng = MixedMoments::new(&o);
    let hl = Letter::r(h);
    let entries = |l: usize, k: usize| -> Vec<Letter> {
        let mut v = vec![Letter::R; l];
        v.push(hl);
        v.extend(std::iter::repeat(Letter::R).take(k));
        v
    };
    let c1: Vec<T> = (0..=n).map(|k| eng.boolean_cumulant_letters(&entries(0, k))).collect();
    let mut c2 = vec![vec![T::zero(); n + 1]; n + 1];
    for l in 0..=n {
        for k in 0..=n - l {
            c2[l][k] = eng.boolean_cumulant_letters(&entries(l, k));
        }
    }
    let eta1 = Series1::new(c1, n);
    let eta2 = Series2::from_fn(n, |l, k| c2[l][k].clone());
    // φ(h R^k) and φ(R^k)
    let hm: Vec<T> = (0..=2 * n).map(|k| r.expect(|x| h.eval(x) * Tag::Pow(k as i32).eval(x))).collect();
    let pm = r.moments(n);
    let p = Series1::from_fn(n, |k| pm[k].clone());
    let q1 = Series1::from_fn(n, |k| hm[k].clone()).div(&p)?;
    let num2 = Series2::from_fn(n, |i, j| hm[i + j].clone());
    let den2 = Series2::from_z(&p, n).mul(&Series2::from_w(&p, n))?;
    let q2 = num2.div(&den2)?;
    let d = eta1.max_abs_diff(&q1).max(eta2.max_abs_diff(&q2));
    let scale = 1.0 + q2.max_abs_diff(&Series2::zero(n));
    if d > 1e-10 * scale {
        return numeric(format!("two constructions of eta^h disagree by {d:e}"));
    }
    Ok(EtaH { h, eta1, eta2 })
}

/// η_R = M_R/(1+M_R) as a series.
pub fn eta_series_of_law<T: Coef>(r: &DiscreteLaw<T>, n: usize) -> Result<Series1<T>> {
    let m = law_moment_series(r, n);
    m.div(&Series1::one(n).add(&m)?)
}

/// Residual of (z−w)η^h(z,w) = zη^h(z) − wη^h(w) + η_R(z)wη^h(w) − η_R(w)zη^h(z).
pub fn eta_h_identity_residual<T: Coef>(e: &EtaH<T>, eta_r: &Series1<T>) -> Result<f64> {
    let n = e.eta2.order();
    let zh = e.eta1.mul_z();
    let lhs = e.eta2.mul_z_minus_w();
    let rz = Series2::from_z(eta_r, n);
    let rw = Series2::from_w(eta_r, n);
    let zhz = Series2::from_z(&zh, n);
    let whw = Series2::from_w(&zh, n);
    let rhs = zhz.sub(&whw)?.add(&rz.mul(&whw)?)?.sub(&rw.mul(&zhz)?)?;
    Ok(lhs.max_abs_diff(&rhs))
}

/// Σ_k φ(h(R) R^k) s^k.
pub fn resolvent_series<T: Coef>(r: &DiscreteLaw<T>, h: Tag, n: usize) -> Series1<T> {
    Series1::from_fn(n, |k| r.expect(|x| h.eval(x) * Tag::Pow(k as i32).eval(x)))
}

/// Max coefficient difference between Σ φ(U^k h(R)) z^k (mixed moments) and Σ φ(h(R)R^k) ω₂(z)^k.
pub fn verify_conditional_subordination<T: Coef>(o: &MomentOracle<T>, h: Tag, n: usize) -> Result<f64> {
    let pair = subordination_series(o, n)?;
    let mut eng = MixedMoments::new(o);
    let hl = Letter::r(h);
    let lhs: Vec<T> = (0..=n)
        .map(|k| {
        if k == 0 {
            eng.moment(&[hl])
        } else {
            // U^k h = R^{1/2}(YR)^{k−1}Y R^{1/2} h, cycled
            let mut w = vec![Letter::R, hl];
            for i in 0..k {
                if i > 0 {
                    w.push(Letter::R);
                }
                w.push(Letter::Y);
            }
            eng.moment(&w)
        }
    })
        .collect();
    let lhs = Series1::new(lhs, n);
    let rhs = resolvent_series(&o.r, h, n).compose(&pair.omega2)?;
    Ok(lhs.max_abs_diff(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rational;
    use num_rational::BigRational;

    fn pair() -> MomentOracle<f64> {
        MomentOracle::new(
            DiscreteLaw::new(vec![0.3, 0.8], vec![0.4, 0.6]).unwrap(),
            DiscreteLaw::new(vec![0.5, 1.6, 2.2], vec![0.3, 0.3, 0.4]).unwrap(),
        )
    }

    #[test]
    fn unit_r_gives_identity_omega1() {
        let o = MomentOracle::new(DiscreteLaw::dirac(1.0), pair().y);
        let p = subordination_series(&o, 6).unwrap();
        assert!(p.omega1.max_abs_diff(&Series1::var(6)) < 1e-12);
        let eta_y = eta_series_of_law(&o.y, 6).unwrap();
        assert!(p.omega2.max_abs_diff(&eta_y) < 1e-12);
    }

    #[test]
    fn series_identities() {
        let o = pair();
        let p = subordination_series(&o, 8).unwrap();
        assert!(p.consistency_residual().unwrap() < 1e-12);
        assert!(p.useful_identity_residual().unwrap() < 1e-12);
        assert!((p.omega2.coefficient(1) - o.y.moments(1)[1]).abs() < 1e-14);
        assert!(omega_cumulant_residual(&o, &p, 5) < 1e-12);
    }

    #[test]
    fn exact_series_identities() {
        let o: MomentOracle<BigRational> = MomentOracle::new(
            DiscreteLaw::new(vec![rational(1, 3), rational(4, 5)], vec![rational(1, 2), rational(1, 2)]).unwrap(),
            DiscreteLaw::new(vec![rational(1, 2), rational(2, 1)], vec![rational(1, 4), rational(3, 4)]).unwrap(),
        );
        let p = subordination_series(&o, 5).unwrap();
        assert_eq!(p.useful_identity_residual().unwrap(), 0.0);
        assert_eq!(omega_cumulant_residual(&o, &p, 5), 0.0);
    }

    #[test]
    fn pointwise_matches_series() {
        let o = pair();
        let p = subordination_series(&o, 10).unwrap();
        let pw = PointwisePair::from_oracle(&o);
        let z = -0.05;
        assert!((pw.omega2(z).unwrap() - p.omega2.eval(&z)).abs() < 1e-7);
        let (a, b) = pw.residuals(&[-5.0, -1.0, -0.3, -0.05]).unwrap();
        assert!(a < 1e-9 && b < 1e-9);
    }

    #[test]
    fn eta_h_cases() {
        let r = pair().r;
        let e = eta_h_series(&r, Tag::Unit, 6).unwrap();
        assert!(e.eta1.max_abs_diff(&Series1::one(6)) < 1e-12);
        let e = eta_h_series(&r, Tag::Pow(1), 6).unwrap();
        let eta = eta_series_of_law(&r, 7).unwrap();
        assert!(e.eta1.max_abs_diff(&eta.div_z().unwrap()) < 1e-12);
        assert!(e.eta2.asymmetry() < 1e-12);
        assert!(e.eta2.column_z().max_abs_diff(&e.eta1) < 1e-12);
        for h in [Tag::Pow(2), Tag::RATIO, Tag::OneMinus] {
            let e = eta_h_series(&r, h, 6).unwrap();
            assert!(eta_h_identity_residual(&e, &eta_series_of_law(&r, 6).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn conditional_subordination() {
        let o = pair();
        for h in [Tag::Unit, Tag::Pow(1), Tag::RATIO] {
            assert!(verify_conditional_subordination(&o, h, 6).unwrap() < 1e-10);
        }
    }
}
