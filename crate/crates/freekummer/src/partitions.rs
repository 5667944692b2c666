//! Interval partitions, Boolean cumulants and mixed moments of a free pair.
//!
//! The pair is an `R`-family and a `Y`-family, each given by a finitely
//! supported law ([`DiscreteLaw`]). A letter is a scalar function of one of
//! the two variables. Mixed moments are computed by recursive centering:
//! for an alternating word, expanding φ((x₁−c₁)⋯(x_n−c_n)) = 0 expresses the
//! moment through strictly shorter words, which are memoized.

use crate::error::{usage, Result};
use crate::series::Coef;
use std::collections::HashMap;
use std::ops::Range;

/// An interval partition of {0, …, n−1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntervalPartition {
    blocks: Vec<Range<usize>>,
}

impl IntervalPartition {
    /// Partition from consecutive block sizes.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
            return usage("block sizes must be positive and nonempty");
        }
        let mut start = 0;
        let blocks = sizes
            .iter()
            .map(|&s| {
                let r = start..start + s;
                start += s;
                r
            })
            .collect();
        Ok(IntervalPartition { blocks })
    }

    /// Bit k of `cuts` set means a block boundary between k and k+1.
    pub fn from_cuts(n: usize, cuts: u32) -> Self {
        let mut blocks = Vec::new();
        let mut start = 0;
        for k in 0..n.saturating_sub(1) {
            if cuts >> k & 1 == 1 {
                blocks.push(start..k + 1);
                start = k + 1;
            }
        }
        blocks.push(start..n);
        IntervalPartition { blocks }
    }

    pub fn one(n: usize) -> Self {
        Self::from_cuts(n, 0)
    }

    pub fn size(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn cuts(&self) -> u32 {
        self.blocks[..self.blocks.len() - 1].iter().fold(0, |m, b| m | 1 << (b.end - 1))
    }

    /// `self ≤ other` in the reversed refinement order.
    pub fn refines(&self, other: &Self) -> bool {
        self.size() == other.size() && other.cuts() & !self.cuts() == 0
    }

    pub fn is_valid(&self) -> bool {
        let mut expect = 0;
        for b in &self.blocks {
            if b.start != expect || b.end <= b.start {
                return false;
            }
            expect = b.end;
        }
        !self.blocks.is_empty()
    }
}

/// All 2^{n−1} interval partitions of an n-element set, 1 ≤ n ≤ 16.
pub fn enumerate_interval_partitions(n: usize) -> Result<Vec<IntervalPartition>> {
    if !(1..=16).contains(&n) {
        return usage(format!("interval partitions need 1 <= n <= 16, got {n}"));
    }
    Ok((0..1u32 << (n - 1)).map(|c| IntervalPartition::from_cuts(n, c)).collect())
}

/// Least upper bound: a boundary survives only if both inputs have it.
pub fn partition_join(p: &IntervalPartition, q: &IntervalPartition) -> Result<IntervalPartition> {
    if p.size() != q.size() {
        return usage("join of partitions of different sizes");
    }
    Ok(IntervalPartition::from_cuts(p.size(), p.cuts() & q.cuts()))
}

/// Boolean cumulants β₁..β_n from moments m₁..m_n (m₀ = 1 implied).
pub fn moments_to_boolean_cumulants<T: Coef>(m: &[T]) -> Result<Vec<T>> {
    if m.is_empty() {
        return usage("empty moment sequence");
    }
    let mut b: Vec<T> = Vec::with_capacity(m.len());
    for n in 0..m.len() {
        let mut acc = m[n].clone();
        for k in 0..n {
            acc = acc - b[k].clone() * m[n - k - 1].clone();
        }
        b.push(acc);
    }
    Ok(b)
}

/// Inverse of [`moments_to_boolean_cumulants`].
pub fn boolean_cumulants_to_moments<T: Coef>(b: &[T]) -> Result<Vec<T>> {
    if b.is_empty() {
        return usage("empty cumulant sequence");
    }
    let mut m: Vec<T> = Vec::with_capacity(b.len());
    for n in 0..b.len() {
        let mut acc = b[n].clone();
        for k in 0..n {
            acc = acc + b[k].clone() * m[n - k - 1].clone();
        }
        m.push(acc);
    }
    Ok(m)
}

/// Which of the two free variables a letter belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    R,
    Y,
}

/// A scalar function applied to the underlying variable x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Unit,
    /// x^k, k may be negative
    Pow(i32),
    /// 1 − x
    OneMinus,
    /// ((1 − x)/x)^k; with R = (1+X)^{-1} this is X^k
    XPow(i32),
}

impl Tag {
    pub fn eval<T: Coef>(&self, x: &T) -> T {
        fn ipow<T: Coef>(b: T, k: i32) -> T {
            let mut acc = T::one();
            for _ in 0..k.unsigned_abs() {
                acc = acc * b.clone();
            }
            if k < 0 {
                T::one() / acc
            } else {
                acc
            }
        }
        match *self {
            Tag::Unit => T::one(),
            Tag::Pow(k) => ipow(x.clone(), k),
            Tag::OneMinus => T::one() - x.clone(),
            Tag::XPow(k) => ipow((T::one() - x.clone()) / x.clone(), k),
        }
    }

    /// R(1−R)^{-1}, i.e. X^{-1} when R = (1+X)^{-1}.
    pub const RATIO: Tag = Tag::XPow(-1);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub side: Side,
    pub tag: Tag,
}

impl Letter {
    pub const R: Letter = Letter { side: Side::R, tag: Tag::Pow(1) };
    pub const Y: Letter = Letter { side: Side::Y, tag: Tag::Pow(1) };

    pub fn r(tag: Tag) -> Self {
        Letter { side: Side::R, tag }
    }
    pub fn y(tag: Tag) -> Self {
        Letter { side: Side::Y, tag }
    }
}

/// A word in the two families; adjacent letters of one family multiply.
pub type MixedWord = Vec<Letter>;

/// Finitely supported law Σ wᵢ δ_{xᵢ}.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLaw<T: Coef = f64> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Coef> DiscreteLaw<T> {
    pub fn new(nodes: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return usage("law needs equally many nonempty nodes and weights");
        }
        Ok(DiscreteLaw { nodes, weights })
    }

    pub fn dirac(x: T) -> Self {
        DiscreteLaw { nodes: vec![x], weights: vec![T::one()] }
    }

    pub fn expect(&self, f: impl Fn(&T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).fold(T::zero(), |acc, (x, w)| acc + w.clone() * f(x))
    }

    /// m₀..m_n.
    pub fn moments(&self, n: usize) -> Vec<T> {
        (0..=n).map(|k| self.expect(|x| Tag::Pow(k as i32).eval(x))).collect()
    }

    pub fn map_nodes(&self, f: impl Fn(&T) -> T) -> Self {
        DiscreteLaw { nodes: self.nodes.iter().map(f).collect(), weights: self.weights.clone() }
    }
}

/// Laws of the free pair (R, Y); every mixed moment is determined by them.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentOracle<T: Coef = f64> {
    pub r: DiscreteLaw<T>,
    pub y: DiscreteLaw<T>,
}

impl<T: Coef> MomentOracle<T> {
    pub fn new(r: DiscreteLaw<T>, y: DiscreteLaw<T>) -> Self {
        MomentOracle { r, y }
    }

    pub fn law(&self, side: Side) -> &DiscreteLaw<T> {
        match side {
            Side::R => &self.r,
            Side::Y => &self.y,
        }
    }

    /// φ(1) = 1 for both laws and nonnegative 2×2 Hankel minors up to order 4.
    pub fn is_positive(&self) -> bool {
        [&self.r, &self.y].iter().all(|l| {
            let m = l.moments(4);
            (m[0].real() - 1.0).abs() < 1e-12
                && (0..3).all(|i| (m[i].clone() * m[i + 2].clone() - m[i + 1].clone() * m[i + 1].clone()).real() >= -1e-12)
        })
    }
}

/// A product of letters from one family, reduced to x^p ((1−x)/x)^q (1−x)^r.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Elem {
    side: Side,
    p: i32,
    q: i32,
    r: i32,
}

impl Elem {
    fn from_letter(l: &Letter) -> Self {
        let (p, q, r) = match l.tag {
            Tag::Unit => (0, 0, 0),
            Tag::Pow(k) => (k, 0, 0),
            Tag::XPow(k) => (0, k, 0),
            Tag::OneMinus => (0, 0, 1),
        };
        Elem { side: l.side, p, q, r }
    }

    fn is_unit(&self) -> bool {
        self.p == 0 && self.q == 0 && self.r == 0
    }

    fn times(&mut self, o: &Elem) {
        self.p += o.p;
        self.q += o.q;
        self.r += o.r;
    }
}

fn push_elem(out: &mut Vec<Elem>, e: &Elem) {
    match out.last_mut() {
        Some(last) if last.side == e.side => {
            last.times(e);
            if last.is_unit() {
                out.pop();
            }
        }
        _ => {
            if !e.is_unit() {
                out.push(*e);
            }
        }
    }
}

/// Cyclic reduction and least rotation; valid because the state is tracial.
fn cyclic_canonical(w: &mut Vec<Elem>) {
    while w.len() >= 2 && w[0].side == w[w.len() - 1].side {
        let last = w.pop().unwrap();
        w[0].times(&last);
        if w[0].is_unit() {
            w.remove(0);
        }
    }
    let n = w.len();
    if n < 2 {
        return;
    }
    let best = (0..n)
        .min_by(|&a, &b| (0..n).map(|i| w[(a + i) % n]).cmp((0..n).map(|i| w[(b + i) % n])))
        .unwrap_or(0);
    w.rotate_left(best);
}

/// Memoizing evaluator for mixed moments and Boolean cumulants of one pair.
pub struct MixedMoments<'a, T: Coef> {
    oracle: &'a MomentOracle<T>,
    elem_cache: HashMap<Elem, T>,
    word_cache: HashMap<Vec<Elem>, T>,
}

impl<'a, T: Coef> MixedMoments<'a, T> {
    pub fn new(oracle: &'a MomentOracle<T>) -> Self {
        MixedMoments { oracle, elem_cache: HashMap::new(), word_cache: HashMap::new() }
    }

    fn elem_moment(&mut self, e: &Elem) -> T {
        if let Some(v) = self.elem_cache.get(e) {
            return v.clone();
        }
        let law = self.oracle.law(e.side);
        let (tp, tq) = (Tag::Pow(e.p), Tag::XPow(e.q));
        let mut acc = T::zero();
        for (x, w) in law.nodes.iter().zip(&law.weights) {
            let mut v = w.clone();
            if e.p != 0 {
                v = v * tp.eval(x);
            }
            if e.q != 0 {
                v = v * tq.eval(x);
            }
            for _ in 0..e.r {
                v = v * (T::one() - x.clone());
            }
            acc = acc + v;
        }
        self.elem_cache.insert(*e, acc.clone());
        acc
    }

    /// φ of a word.
    pub fn moment(&mut self, w: &[Letter]) -> T {
        let mut c = Vec::with_capacity(w.len());
        for l in w {
            push_elem(&mut c, &Elem::from_letter(l));
        }
        self.word_moment(c)
    }

    /// φ of a word read cyclically; rotations share one cache entry.
    pub fn tracial_moment(&mut self, w: &[Letter]) -> T {
        let mut c = Vec::with_capacity(w.len());
        for l in w {
            push_elem(&mut c, &Elem::from_letter(l));
        }
        cyclic_canonical(&mut c);
        self.word_moment(c)
    }

    fn word_moment(&mut self, w: Vec<Elem>) -> T {
        match w.len() {
            0 => return T::one(),
            1 => return self.elem_moment(&w[0]),
            _ => {}
        }
        if let Some(v) = self.word_cache.get(&w) {
            return v.clone();
        }
        let n = w.len();
        let negc: Vec<T> = w.iter().map(|e| -self.elem_moment(e)).collect();
        let full = (1usize << n) - 1;
        // comp[mask] = Π_{i ∉ mask} (−cᵢ)
        let mut comp = vec![T::one(); full + 1];
        for mask in (0..full).rev() {
            let i = (!mask).trailing_zeros() as usize;
            comp[mask] = comp[mask | 1 << i].clone() * negc[i].clone();
        }
        let mut acc = T::zero();
        let mut sub: Vec<Elem> = Vec::with_capacity(n);
        for (mask, coef) in comp.iter().enumerate().take(full) {
            if coef.is_zero() {
                continue;
            }
            sub.clear();
            for (i, e) in w.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    push_elem(&mut sub, e);
                }
            }
            let mut key = sub.clone();
            cyclic_canonical(&mut key);
            acc = acc + coef.clone() * self.word_moment(key);
        }
        let v = -acc;
        self.word_cache.insert(w, v.clone());
        v
    }

    /// β_n(e₁, …, e_n) where each entry is itself a (product) word.
    pub fn boolean_cumulant(&mut self, entries: &[MixedWord]) -> T {
        let n = entries.len();
        let mut beta: Vec<T> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.moment(&entries[..=k].concat());
            for j in 0..k {
                let tail = self.moment(&entries[j + 1..=k].concat());
                acc = acc - beta[j].clone() * tail;
            }
            beta.push(acc);
        }
        beta.pop().unwrap_or_else(T::one)
    }

    /// β_n with one letter per entry.
    pub fn boolean_cumulant_letters(&mut self, letters: &[Letter]) -> T {
        let entries: Vec<MixedWord> = letters.iter().map(|l| vec![*l]).collect();
        self.boolean_cumulant(&entries)
    }

    /// β_π(e₁, …, e_n) for an interval partition π.
    pub fn boolean_cumulant_partition(&mut self, entries: &[MixedWord], p: &IntervalPartition) -> T {
        p.blocks().iter().fold(T::one(), |acc, b| acc * self.boolean_cumulant(&entries[b.clone()]))
    }
}

/// φ(word) for the free pair described by the oracle.
pub fn free_mixed_moment<T: Coef>(w: &[Letter], o: &MomentOracle<T>) -> Result<T> {
    if w.is_empty() {
        return usage("empty word");
    }
    Ok(MixedMoments::new(o).moment(w))
}

/// β_n(w₁, …, w_n) with one letter per entry.
pub fn boolean_cumulant_of_word<T: Coef>(w: &[Letter], o: &MomentOracle<T>) -> Result<T> {
    if w.is_empty() {
        return usage("empty word");
    }
    Ok(MixedMoments::new(o).boolean_cumulant_letters(w))
}

/// |β_m(grouped products) − Σ_{π ∨ σ = 1} β_π| for the grouping σ given by `split`.
pub fn verify_product_formula<T: Coef>(word: &[Letter], split: &[usize], o: &MomentOracle<T>) -> Result<f64> {
    let n = word.len();
    if n == 0 || n > 8 {
        return usage("product formula check needs 1 <= n <= 8");
    }
    if split.iter().sum::<usize>() != n {
        return usage("split sizes must sum to the word length");
    }
    let sigma = IntervalPartition::from_sizes(split)?;
    let mut eng = MixedMoments::new(o);
    let grouped: Vec<MixedWord> = sigma.blocks().iter().map(|b| word[b.clone()].to_vec()).collect();
    let lhs = eng.boolean_cumulant(&grouped);
    let singles: Vec<MixedWord> = word.iter().map(|l| vec![*l]).collect();
    let top = IntervalPartition::one(n);
    let mut rhs = T::zero();
    for p in enumerate_interval_partitions(n)? {
        if partition_join(&p, &sigma)? == top {
            rhs = rhs + eng.boolean_cumulant_partition(&singles, &p);
        }
    }
    Ok((lhs - rhs).magnitude())
}

fn subsets_between(lo: usize, hi: usize) -> impl Iterator<Item = Vec<usize>> {
    // all strictly increasing sequences drawn from lo+1..hi (exclusive of both)
    let inner: Vec<usize> = (lo + 1..hi).collect();
    let k = inner.len();
    (0..1u32 << k).map(move |mask| (0..k).filter(|i| mask >> i & 1 == 1).map(|i| inner[i]).collect())
}

/// Right side of the alternating-moment formula for φ(Y₁X₁⋯Y_nX_n).
pub fn boolmain1_rhs<T: Coef>(xs: &[Letter], ys: &[Letter], eng: &mut MixedMoments<T>) -> T {
    let n = ys.len();
    let mut total = T::zero();
    for mid in subsets_between(0, n) {
        // 1-based cut points j_1 < … < j_{k+1} = n, j_0 = 0
        let mut js = vec![0];
        js.extend(mid.iter().copied());
        js.push(n);
        let xword: MixedWord = js[1..].iter().map(|&j| xs[j - 1]).collect();
        let mut term = eng.moment(&xword);
        for w in js.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut entries: Vec<MixedWord> = Vec::new();
            for i in a + 1..=b {
                entries.push(vec![ys[i - 1]]);
                if i < b {
                    entries.push(vec![xs[i - 1]]);
                }
            }
            term = term * eng.boolean_cumulant(&entries);
        }
        total = total + term;
    }
    total
}

/// Right side of the Boolean-cumulant formula for β_{2n+1}(X₁,Y₁,…,Y_n,X_{n+1}),
/// summing over 1 = j₁ < … < j_k = `end`.
pub fn boolmain3_rhs<T: Coef>(xs: &[Letter], ys: &[Letter], end: usize, eng: &mut MixedMoments<T>) -> T {
    let mut total = T::zero();
    for mid in subsets_between(1, end) {
        let mut js = vec![1];
        js.extend(mid.iter().copied());
        js.push(end);
        let xentries: Vec<MixedWord> = js.iter().map(|&j| vec![xs[j - 1]]).collect();
        let mut term = eng.boolean_cumulant(&xentries);
        for w in js.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut entries: Vec<MixedWord> = vec![vec![ys[a - 1]]];
            for i in a + 1..b {
                entries.push(vec![xs[i - 1]]);
                entries.push(vec![ys[i - 1]]);
            }
            term = term * eng.boolean_cumulant(&entries);
        }
        total = total + term;
    }
    total
}

/// Letters used by [`verify_boolmain`]: X_i from the R-family, Y_i from the Y-family,
/// with varying functions so that no two neighbours coincide.
pub fn boolmain_letters(n: usize) -> (Vec<Letter>, Vec<Letter>) {
    let rtags = [Tag::Pow(1), Tag::Pow(2), Tag::OneMinus, Tag::Pow(3)];
    let ytags = [Tag::Pow(1), Tag::Pow(2), Tag::Pow(3)];
    let xs = (0..=n).map(|i| Letter::r(rtags[i % rtags.len()])).collect();
    let ys = (0..=n).map(|i| Letter::y(ytags[(i + 1) % ytags.len()])).collect();
    (xs, ys)
}

/// Residual of the selected alternating formula (variant 1 or 3) at size n ≤ 6.
pub fn verify_boolmain<T: Coef>(variant: u8, n: usize, o: &MomentOracle<T>) -> Result<f64> {
    if n == 0 || n > 6 {
        return usage("alternating formula check needs 1 <= n <= 6");
    }
    let (xs, ys) = boolmain_letters(n);
    let mut eng = MixedMoments::new(o);
    match variant {
        1 => {
            let mut word = Vec::new();
            for i in 0..n {
                word.push(ys[i]);
                word.push(xs[i]);
            }
            let lhs = eng.moment(&word);
            let rhs = boolmain1_rhs(&xs[..n], &ys[..n], &mut eng);
            Ok((lhs - rhs).magnitude())
        }
        3 => {
            let mut letters = Vec::new();
            for i in 0..n {
                letters.push(xs[i]);
                letters.push(ys[i]);
            }
            letters.push(xs[n]);
            let lhs = eng.boolean_cumulant_letters(&letters);
            let rhs = boolmain3_rhs(&xs[..=n], &ys[..n], n + 1, &mut eng);
            Ok((lhs - rhs).magnitude())
        }
        _ => usage("variant must be 1 or 3"),
    }
}

/// Random free pair number `index` of the family keyed by `seed`.
///
/// Each pair draws from its own ChaCha8 stream (seed, stream = index), so pairs are
/// reproducible independently of one another. R has atoms in (0.05, 0.95), Y in (0.1, 3),
/// each with 2 to `max_atoms` atoms and weights proportional to uniforms on (0.2, 1).
pub fn seeded_oracle(seed: u64, index: u64, max_atoms: usize) -> MomentOracle<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut law = |lo: f64, hi: f64| {
        let k = rng.gen_range(2..=max_atoms.max(2));
        let nodes: Vec<f64> = (0..k).map(|_| rng.gen_range(lo..hi)).collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
        let s: f64 = raw.iter().sum();
        DiscreteLaw { nodes, weights: raw.iter().map(|w| w / s).collect() }
    };
    let r = law(0.05, 0.95);
    let y = law(0.1, 3.0);
    MomentOracle::new(r, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rational;
    use num_rational::BigRational;

    fn pair() -> MomentOracle<f64> {
        MomentOracle::new(
            DiscreteLaw::new(vec![0.3, 0.9, 1.7], vec![0.2, 0.5, 0.3]).unwrap(),
            DiscreteLaw::new(vec![0.5, 1.6], vec![0.6, 0.4]).unwrap(),
        )
    }

    #[test]
    fn counts_and_small_cases() {
        assert_eq!(enumerate_interval_partitions(1).unwrap().len(), 1);
        let p3 = enumerate_interval_partitions(3).unwrap();
        assert_eq!(p3.len(), 4);
        assert!(enumerate_interval_partitions(0).is_err());
        assert!(enumerate_interval_partitions(17).is_err());
    }

    #[test]
    fn join_examples() {
        let a = IntervalPartition::from_sizes(&[2, 1]).unwrap();
        let b = IntervalPartition::from_sizes(&[1, 2]).unwrap();
        assert_eq!(partition_join(&a, &b).unwrap(), IntervalPartition::one(3));
        assert_eq!(partition_join(&a, &a).unwrap(), a);
    }

    #[test]
    fn first_cumulants() {
        let b = moments_to_boolean_cumulants(&[0.7]).unwrap();
        assert_eq!(b, vec![0.7]);
        let b = moments_to_boolean_cumulants(&[0.7, 1.3]).unwrap();
        assert!((b[1] - (1.3 - 0.49)).abs() < 1e-15);
        assert!(moments_to_boolean_cumulants::<f64>(&[]).is_err());
    }

    #[test]
    fn factorization_of_xy() {
        let o = pair();
        let xy = free_mixed_moment(&[Letter::R, Letter::Y], &o).unwrap();
        let (mr, my) = (o.r.moments(2), o.y.moments(2));
        assert!((xy - mr[1] * my[1]).abs() < 1e-15);
        // φ(XYXY) expansion
        let w = [Letter::R, Letter::Y, Letter::R, Letter::Y];
        let v = free_mixed_moment(&w, &o).unwrap();
        let expect = mr[2] * my[1] * my[1] + mr[1] * mr[1] * my[2] - mr[1] * mr[1] * my[1] * my[1];
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn unit_y_collapses() {
        let o = MomentOracle::new(pair().r, DiscreteLaw::dirac(1.0));
        let w = [Letter::R, Letter::Y, Letter::r(Tag::Pow(2)), Letter::Y, Letter::R];
        let v = free_mixed_moment(&w, &o).unwrap();
        assert!((v - o.r.moments(4)[4]).abs() < 1e-14);
    }

    #[test]
    fn variance_cumulant() {
        let o = MomentOracle::new(
            DiscreteLaw::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap(),
            DiscreteLaw::dirac(1.0),
        );
        // m = (1, 2): β₂ = 2 − 1 = 1
        let b = boolean_cumulant_of_word(&[Letter::R, Letter::R], &o).unwrap();
        assert!((b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn alternating_formulas_exact() {
        let r = DiscreteLaw::new(vec![rational(1, 3), rational(3, 2)], vec![rational(1, 4), rational(3, 4)]).unwrap();
        let y = DiscreteLaw::new(vec![rational(1, 2), rational(2, 1), rational(1, 1)], vec![rational(1, 5), rational(2, 5), rational(2, 5)]).unwrap();
        let o: MomentOracle<BigRational> = MomentOracle::new(r, y);
        for n in 1..=4 {
            assert_eq!(verify_boolmain(1, n, &o).unwrap(), 0.0, "variant 1, n={n}");
            assert_eq!(verify_boolmain(3, n, &o).unwrap(), 0.0, "variant 3, n={n}");
        }
    }

    #[test]
    fn cumulant_formula_needs_last_index_n_plus_one() {
        // Ending the index chain at n instead of n+1 drops the last X entry.
        let o = pair();
        let n = 3;
        let (xs, ys) = boolmain_letters(n);
        let mut eng = MixedMoments::new(&o);
        let mut letters = Vec::new();
        for i in 0..n {
            letters.push(xs[i]);
            letters.push(ys[i]);
        }
        letters.push(xs[n]);
        let lhs = eng.boolean_cumulant_letters(&letters);
        let good = boolmain3_rhs(&xs[..=n], &ys[..n], n + 1, &mut eng);
        let literal = boolmain3_rhs(&xs[..=n], &ys[..n], n, &mut eng);
        assert!((lhs - good).abs() < 1e-12);
        assert!((lhs - literal).abs() > 1e-4);
    }

    #[test]
    fn product_formula_small() {
        let o = pair();
        let w = [Letter::R, Letter::Y];
        assert!(verify_product_formula(&w, &[1, 1], &o).unwrap() < 1e-15);
        let w4 = [Letter::R, Letter::Y, Letter::r(Tag::Pow(2)), Letter::Y];
        assert!(verify_product_formula(&w4, &[2, 2], &o).unwrap() < 1e-12);
    }

    #[test]
    fn positivity_of_discrete_pair() {
        assert!(pair().is_positive());
    }
}
