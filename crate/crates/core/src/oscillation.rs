//! Mean oscillation: the bilinear form `I_{A,B}`, the derivation `∂` into
//! `L²(Ω × Ω)`, and the decomposition of a zero-mean function into
//! zero-mean two-level blocks.

use std::sync::Arc;

use crate::rearrange::{decreasing_rearrangement, merged_cells, StepProfile, FLOAT_CHECK_TOLERANCE};
use crate::scalar::{self, nearly_equal, Scalar};
use crate::space::{AtomSet, DiscreteSpace, SimpleFunction};
use crate::{Error, Result};

/// `I_{A,B}(f,g,h) = Σ_{y∈A} Σ_{x∈B} (f(x)+f(y))(g(x)−g(y)) h(y) μ(x) μ(y)`.
///
/// The outer variable `y` ranges over `A`, the inner `x` over `B`.
pub fn bilinear_form<T: Scalar>(
    a: &AtomSet,
    b: &AtomSet,
    f: &SimpleFunction<T>,
    g: &SimpleFunction<T>,
    h: &SimpleFunction<T>,
) -> Result<T> {
    f.require_same_space(g)?;
    f.require_same_space(h)?;
    let n = f.atoms();
    a.check_within(n)?;
    b.check_within(n)?;
    let mu = f.space().weights();
    let mut total = T::zero();
    for y in a.iter() {
        let mut inner = T::zero();
        for x in b.iter() {
            inner = inner
                + (f.value(x).clone() + f.value(y).clone()) * (g.value(x).clone() - g.value(y).clone()) * mu[x].clone();
        }
        total = total + inner * h.value(y).clone() * mu[y].clone();
    }
    Ok(total)
}

/// Largest `|LHS − RHS|` over atom pairs of
/// `f(x)g(x) − f(y)g(y) = ½(f(x)+f(y))(g(x)−g(y)) + ½(f(x)−f(y))(g(x)+g(y))`.
pub fn product_identity_check<T: Scalar>(f: &SimpleFunction<T>, g: &SimpleFunction<T>) -> Result<T> {
    f.require_same_space(g)?;
    let half = T::one() / T::from_i64(2);
    let mut worst = T::zero();
    for x in 0..f.atoms() {
        for y in 0..f.atoms() {
            let (fx, fy, gx, gy) = (f.value(x).clone(), f.value(y).clone(), g.value(x).clone(), g.value(y).clone());
            let lhs = fx.clone() * gx.clone() - fy.clone() * gy.clone();
            let rhs = half.clone() * (fx.clone() + fy.clone()) * (gx.clone() - gy.clone())
                + half.clone() * (fx - fy) * (gx + gy);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

/// Largest atom count for which an `n × n` kernel is materialized.
pub const MAX_KERNEL_ATOMS: usize = 512;

/// A function on `Ω × Ω`, stored row-major by `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductKernel<T> {
    space: Arc<DiscreteSpace<T>>,
    values: Vec<T>,
}

impl<T: Scalar> ProductKernel<T> {
    pub fn from_fn(space: Arc<DiscreteSpace<T>>, entry: impl Fn(usize, usize) -> T) -> Result<Self> {
        let n = space.atoms();
        if n > MAX_KERNEL_ATOMS {
            return Err(Error::KernelTooLarge(n));
        }
        let values = (0..n * n).map(|i| entry(i / n, i % n)).collect();
        Ok(ProductKernel { space, values })
    }

    pub fn zero(space: Arc<DiscreteSpace<T>>) -> Result<Self> {
        Self::from_fn(space, |_, _| T::zero())
    }

    pub fn space(&self) -> &Arc<DiscreteSpace<T>> {
        &self.space
    }

    pub fn atoms(&self) -> usize {
        self.space.atoms()
    }

    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.values[x * self.atoms() + y]
    }

    /// `(mK)(x,y) = m(x) K(x,y)`.
    pub fn left_mul(&self, m: &SimpleFunction<T>) -> Result<Self> {
        self.require_space(m)?;
        Self::from_fn(Arc::clone(&self.space), |x, y| m.value(x).clone() * self.get(x, y).clone())
    }

    /// `(Km)(x,y) = K(x,y) m(y)`.
    pub fn right_mul(&self, m: &SimpleFunction<T>) -> Result<Self> {
        self.require_space(m)?;
        Self::from_fn(Arc::clone(&self.space), |x, y| self.get(x, y).clone() * m.value(y).clone())
    }

    pub fn add(&self, other: &ProductKernel<T>) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Self::from_fn(Arc::clone(&self.space), |x, y| self.get(x, y).clone() + other.get(x, y).clone())
    }

    /// `⟨K, L⟩ = Σ K(x,y) L(x,y) μ(x) μ(y)`.
    pub fn pairing(&self, other: &ProductKernel<T>) -> Result<T> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let mu = self.space.weights();
        let n = self.atoms();
        Ok(scalar::sum((0..n * n).map(|i| {
            self.values[i].clone() * other.values[i].clone() * mu[i / n].clone() * mu[i % n].clone()
        })))
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.atoms();
        (0..n).all(|x| (0..n).all(|y| *self.get(x, y) == -self.get(y, x).clone()))
    }

    fn require_space(&self, m: &SimpleFunction<T>) -> Result<()> {
        if **m.space() == *self.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// `(∂f)(x,y) = f(x) − f(y)`.
pub fn derivation<T: Scalar>(f: &SimpleFunction<T>) -> Result<ProductKernel<T>> {
    ProductKernel::from_fn(Arc::clone(f.space()), |x, y| f.value(x).clone() - f.value(y).clone())
}

/// The adjoint of `∂` for the `μ⊗μ` and `μ` inner products:
/// `(∂*K)(z) = Σ_y K(z,y) μ(y) − Σ_x K(x,z) μ(x)`.
///
/// With this adjoint `∂*∂f = 2(f − f_Ω)`.
pub fn derivation_adjoint<T: Scalar>(k: &ProductKernel<T>) -> SimpleFunction<T> {
    let n = k.atoms();
    let mu = k.space.weights();
    let values = (0..n)
        .map(|z| {
            let out = scalar::sum((0..n).map(|y| k.get(z, y).clone() * mu[y].clone()));
            let inn = scalar::sum((0..n).map(|x| k.get(x, z).clone() * mu[x].clone()));
            out - inn
        })
        .collect();
    SimpleFunction::new(Arc::clone(&k.space), values).expect("kernel matches its space")
}

/// Largest `|⟨∂u, K⟩ − ⟨u, ∂*K⟩|` over coordinate functions `u = 1_{{i}}`.
pub fn adjoint_pairing_check<T: Scalar>(k: &ProductKernel<T>) -> Result<T> {
    let adjoint = derivation_adjoint(k);
    let mut worst = T::zero();
    for i in 0..k.atoms() {
        let mut set = AtomSet::empty();
        set.insert(i);
        let u = SimpleFunction::indicator(Arc::clone(&k.space), &set);
        let lhs = derivation(&u)?.pairing(k)?;
        let rhs = adjoint.value(i).clone() * k.space.weight(i).clone();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Both sides of `∂(fg) = f·∂g + (∂f)·g`.
pub fn leibniz_kernels<T: Scalar>(
    f: &SimpleFunction<T>,
    g: &SimpleFunction<T>,
) -> Result<(ProductKernel<T>, ProductKernel<T>)> {
    let lhs = derivation(&f.pointwise_mul(g)?)?;
    let rhs = derivation(g)?.left_mul(f)?.add(&derivation(f)?.right_mul(g)?)?;
    Ok((lhs, rhs))
}

/// `∂*(f·∂g) + ∂*((∂f)·g)`, which equals `∂*∂(fg) = 2(fg − (fg)_Ω)`.
pub fn product_adjoint_sum<T: Scalar>(f: &SimpleFunction<T>, g: &SimpleFunction<T>) -> Result<SimpleFunction<T>> {
    let left = derivation_adjoint(&derivation(g)?.left_mul(f)?);
    let right = derivation_adjoint(&derivation(f)?.right_mul(g)?);
    left.pointwise_add(&right)
}

/// `(‖f − f_Ω‖₂², ½ ∬ (f(x)−f(y))² dμ dμ, ½ ‖∂f‖₂²)`; all three agree.
///
/// The middle term is summed pair by pair without building a kernel.
pub fn variance_identity_check<T: Scalar>(f: &SimpleFunction<T>) -> Result<(T, T, T)> {
    let mu = f.space().weights();
    let n = f.atoms();
    let half = T::one() / T::from_i64(2);
    let variance = crate::norms::lp_power(&f.center(), 2);
    let mut pairs = T::zero();
    for x in 0..n {
        for y in 0..n {
            let d = f.value(x).clone() - f.value(y).clone();
            pairs = pairs + d.clone() * d * mu[x].clone() * mu[y].clone();
        }
    }
    let kernel = derivation(f)?;
    let energy = kernel.pairing(&kernel)?;
    Ok((variance, half.clone() * pairs, half * energy))
}

/// `g_i = a·1_A − b·1_B` with `a·μ(A) = b·μ(B)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroMeanBlock<T> {
    pub a: T,
    pub a_set: AtomSet,
    pub b: T,
    pub b_set: AtomSet,
}

impl<T: Scalar> ZeroMeanBlock<T> {
    pub fn to_function(&self, space: &Arc<DiscreteSpace<T>>) -> SimpleFunction<T> {
        let mut values = vec![T::zero(); space.atoms()];
        for i in self.a_set.iter() {
            values[i] = self.a.clone();
        }
        for i in self.b_set.iter() {
            values[i] = -self.b.clone();
        }
        SimpleFunction::new(Arc::clone(space), values).expect("block atoms are in range")
    }

    pub fn support(&self) -> AtomSet {
        self.a_set.union(&self.b_set)
    }
}

/// Ordered zero-mean blocks summing to a zero-mean function.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition<T> {
    space: Arc<DiscreteSpace<T>>,
    blocks: Vec<ZeroMeanBlock<T>>,
}

/// Which structural properties a decomposition satisfies against `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecompositionCheck {
    /// Every block has disjoint nonempty sets, positive heights and
    /// `a·μ(A) = b·μ(B)`.
    pub zero_mean: bool,
    /// `supp(g_1) ⊇ supp(g_2) ⊇ …`.
    pub nested: bool,
    /// `Σ g_i = g` pointwise.
    pub sums_to_g: bool,
    /// `Σ g_i* = g*` as profiles.
    pub profile_additive: bool,
    /// `∫_0^t g* ≤ ∫_0^t Σ g_i*` for all `t`, with equality at `t = 1`.
    pub profile_majorized: bool,
    /// `K ≤ m + n`, where `m`, `n` count distinct positive and negative
    /// levels of `g`.
    pub within_bound: bool,
}

impl DecompositionCheck {
    pub fn all(&self) -> bool {
        self.zero_mean && self.nested && self.sums_to_g && self.profile_additive && self.within_bound
    }
}

impl<T: Scalar> BlockDecomposition<T> {
    /// Wraps blocks as given; use [`BlockDecomposition::check`] to validate.
    pub fn new(space: Arc<DiscreteSpace<T>>, blocks: Vec<ZeroMeanBlock<T>>) -> Result<Self> {
        for b in &blocks {
            b.a_set.check_within(space.atoms())?;
            b.b_set.check_within(space.atoms())?;
        }
        Ok(BlockDecomposition { space, blocks })
    }

    pub fn blocks(&self) -> &[ZeroMeanBlock<T>] {
        &self.blocks
    }

    pub fn space(&self) -> &Arc<DiscreteSpace<T>> {
        &self.space
    }

    pub fn functions(&self) -> Vec<SimpleFunction<T>> {
        self.blocks.iter().map(|b| b.to_function(&self.space)).collect()
    }

    /// `Σ g_i*`.
    pub fn profile_sum(&self) -> StepProfile<T> {
        let profiles: Vec<StepProfile<T>> = self.functions().iter().map(decreasing_rearrangement).collect();
        StepProfile::sum(&profiles.iter().collect::<Vec<_>>())
    }

    pub fn check(&self, g: &SimpleFunction<T>) -> DecompositionCheck {
        let tol = FLOAT_CHECK_TOLERANCE;
        let zero_mean = self.blocks.iter().all(|b| {
            !b.a_set.is_empty()
                && !b.b_set.is_empty()
                && b.a_set.is_disjoint(&b.b_set)
                && b.a > T::zero()
                && b.b > T::zero()
                && nearly_equal(
                    &(b.a.clone() * self.space.measure(&b.a_set)),
                    &(b.b.clone() * self.space.measure(&b.b_set)),
                    tol,
                )
        });
        let nested = self.blocks.windows(2).all(|w| w[1].support().is_subset(&w[0].support()));
        let sum = self
            .functions()
            .into_iter()
            .fold(SimpleFunction::zero(Arc::clone(&self.space)), |acc, f| acc.pointwise_add(&f).expect("same space"));
        let sums_to_g = sum.values().iter().zip(g.values()).all(|(u, v)| nearly_equal(u, v, tol));
        let g_star = decreasing_rearrangement(g);
        let total = self.profile_sum();
        let profile_additive = total.same_function(&g_star);
        let profile_majorized = majorizes(&total, &g_star);
        let mut positive: Vec<T> = Vec::new();
        let mut negative: Vec<T> = Vec::new();
        for v in g.values() {
            let bucket = if *v > T::zero() { &mut positive } else { &mut negative };
            if !v.is_zero() && !bucket.contains(v) {
                bucket.push(v.clone());
            }
        }
        let within_bound = self.blocks.len() <= positive.len() + negative.len();
        DecompositionCheck { zero_mean, nested, sums_to_g, profile_additive, profile_majorized, within_bound }
    }
}

/// `∫_0^t q ≤ ∫_0^t p` for every `t`, with equal totals.
fn majorizes<T: Scalar>(p: &StepProfile<T>, q: &StepProfile<T>) -> bool {
    let mut dp = T::zero();
    let mut dq = T::zero();
    for c in merged_cells(&[p, q]) {
        dp = dp + c.values[0].clone() * c.length.clone();
        dq = dq + c.values[1].clone() * c.length;
        if dq > dp && !nearly_equal(&dq, &dp, FLOAT_CHECK_TOLERANCE) {
            return false;
        }
    }
    nearly_equal(&dp, &dq, FLOAT_CHECK_TOLERANCE)
}

/// Peels a zero-mean `g` into zero-mean two-level blocks.
///
/// Each round takes the current positive support `P`, negative support
/// `N`, smallest positive level `a` and smallest negative magnitude `b`.
/// If `a·μ(P) ≤ b·μ(N)` it emits `(a, P, a·μ(P)/μ(N), N)`, otherwise
/// `(b·μ(N)/μ(P), P, b, N)`, subtracts the block and repeats. Each round
/// clears at least one level, so at most `m + n` blocks are produced.
pub fn zero_mean_decompose<T: Scalar>(g: &SimpleFunction<T>) -> Result<BlockDecomposition<T>> {
    if g.is_zero() {
        return Err(Error::EmptyInput);
    }
    if !is_centered(g) {
        return Err(Error::NotZeroMean(g.integrate().to_literal()));
    }
    let scale = g.sup_abs();
    let space = Arc::clone(g.space());
    let levels = g.magnitude_levels().len() * 2;
    let mut rest: Vec<T> = g.values().to_vec();
    let mut blocks = Vec::new();
    while rest.iter().any(|v| !v.is_zero()) {
        if blocks.len() > levels {
            return Err(Error::PreconditionViolated("decomposition did not terminate".into()));
        }
        let p: AtomSet = (0..rest.len()).filter(|&i| rest[i] > T::zero()).collect();
        let n: AtomSet = (0..rest.len()).filter(|&i| rest[i] < T::zero()).collect();
        if p.is_empty() || n.is_empty() {
            // Only reachable through float round-off.
            return Err(Error::NotZeroMean(scalar::sum(rest.iter().cloned()).to_literal()));
        }
        let a = p.iter().map(|i| rest[i].clone()).reduce(T::min).expect("nonempty");
        let b = n.iter().map(|i| rest[i].abs()).reduce(T::min).expect("nonempty");
        let (mp, mn) = (space.measure(&p), space.measure(&n));
        let (a, b) = if a.clone() * mp.clone() <= b.clone() * mn.clone() {
            let b = a.clone() * mp / mn;
            (a, b)
        } else {
            (b.clone() * mn / mp, b)
        };
        for i in p.iter() {
            rest[i] = snap(rest[i].clone() - a.clone(), &scale);
        }
        for i in n.iter() {
            rest[i] = snap(rest[i].clone() + b.clone(), &scale);
        }
        blocks.push(ZeroMeanBlock { a, a_set: p, b, b_set: n });
    }
    BlockDecomposition::new(space, blocks)
}

/// `∫g = 0`, exactly in exact mode and relative to `‖g‖_∞` otherwise.
pub fn is_centered<T: Scalar>(g: &SimpleFunction<T>) -> bool {
    let mean = g.integrate();
    if T::is_exact() {
        mean.is_zero()
    } else {
        mean.abs().to_f64() <= FLOAT_CHECK_TOLERANCE * g.sup_abs().to_f64()
    }
}

/// Flushes float residue to zero; the identity in exact mode.
fn snap<T: Scalar>(v: T, scale: &T) -> T {
    if !T::is_exact() && v.abs().to_f64() <= FLOAT_CHECK_TOLERANCE * scale.to_f64() {
        T::zero()
    } else {
        v
    }
}

fn check_lemma31_hypotheses<T: Scalar>(f: &SimpleFunction<T>, g: &SimpleFunction<T>, h: &SimpleFunction<T>) -> Result<()> {
    f.require_same_space(g)?;
    f.require_same_space(h)?;
    if !is_centered(g) {
        return Err(Error::PreconditionViolated(format!("g has mean {}", g.integrate().to_literal())));
    }
    let unit = [T::zero(), T::one(), -T::one()];
    if let Some(i) = f.values().iter().position(|v| !unit.contains(v)) {
        return Err(Error::PreconditionViolated(format!("f takes value {} outside {{-1,0,1}} at atom {i}", f.value(i).to_literal())));
    }
    if let Some(i) = h.values().iter().position(|v| v.abs() > T::one()) {
        return Err(Error::PreconditionViolated(format!("|h| exceeds 1 at atom {i}")));
    }
    Ok(())
}

/// `(I_{G^c,G} + I_{G,G^c}, 2 Σ_{y∈G} Σ_{x∈G^c} |g(y)| 1_F(x,y) 1_H(x,y) μ(x) μ(y))`
/// with `G = supp g`, `F = supp f`, `H = supp h`, and
/// `1_F(x,y) = 1_F(x) ∨ 1_F(y)`.
pub fn lemma31_bound<T: Scalar>(f: &SimpleFunction<T>, g: &SimpleFunction<T>, h: &SimpleFunction<T>) -> Result<(T, T)> {
    check_lemma31_hypotheses(f, g, h)?;
    let n = f.atoms();
    let big_g = g.support();
    let complement = big_g.complement(n);
    let lhs = bilinear_form(&complement, &big_g, f, g, h)? + bilinear_form(&big_g, &complement, f, g, h)?;
    let mu = f.space().weights();
    let (big_f, big_h) = (f.support(), h.support());
    let mut rhs = T::zero();
    for y in big_g.iter() {
        for x in complement.iter() {
            let in_f = big_f.contains(x) || big_f.contains(y);
            let in_h = big_h.contains(x) || big_h.contains(y);
            if in_f && in_h {
                rhs = rhs + g.value(y).abs() * mu[x].clone() * mu[y].clone();
            }
        }
    }
    Ok((lhs, T::from_i64(2) * rhs))
}

/// The four-block split of `I_{Ω,Ω}` along `G = supp g`.
#[derive(Clone, Debug, PartialEq)]
pub struct Splitting<T> {
    pub whole: T,
    pub g_gc: T,
    pub gc_g: T,
    pub g_g: T,
    pub gc_gc: T,
}

impl<T: Scalar> Splitting<T> {
    /// `I_{Ω,Ω}` equals the sum of the four blocks and `I_{G^c,G^c} = 0`.
    pub fn holds(&self) -> bool {
        let parts = self.g_gc.clone() + self.gc_g.clone() + self.g_g.clone() + self.gc_gc.clone();
        nearly_equal(&self.whole, &parts, FLOAT_CHECK_TOLERANCE) && self.gc_gc.is_zero()
    }
}

pub fn splitting<T: Scalar>(f: &SimpleFunction<T>, g: &SimpleFunction<T>, h: &SimpleFunction<T>) -> Result<Splitting<T>> {
    let n = f.atoms();
    let omega = AtomSet::full(n);
    let big_g = g.support();
    let gc = big_g.complement(n);
    Ok(Splitting {
        whole: bilinear_form(&omega, &omega, f, g, h)?,
        g_gc: bilinear_form(&big_g, &gc, f, g, h)?,
        gc_g: bilinear_form(&gc, &big_g, f, g, h)?,
        g_g: bilinear_form(&big_g, &big_g, f, g, h)?,
        gc_gc: bilinear_form(&gc, &gc, f, g, h)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn uni(n: usize) -> Arc<DiscreteSpace<Q>> {
        Arc::new(DiscreteSpace::uniform(n).unwrap())
    }

    fn func(s: &Arc<DiscreteSpace<Q>>, v: &[i64]) -> SimpleFunction<Q> {
        SimpleFunction::new(Arc::clone(s), v.iter().map(|&x| q(x, 1)).collect()).unwrap()
    }

    fn set(v: &[usize]) -> AtomSet {
        v.iter().copied().collect()
    }

    #[test]
    fn bilinear_form_examples() {
        let s = uni(2);
        let all = AtomSet::full(2);
        let (f, g) = (func(&s, &[1, 1]), func(&s, &[1, -1]));
        assert_eq!(bilinear_form(&all, &all, &f, &g, &func(&s, &[-1, 1])).unwrap(), q(2, 1));
        assert_eq!(bilinear_form(&all, &all, &f, &g, &func(&s, &[1, -1])).unwrap(), q(-2, 1));
        assert_eq!(bilinear_form(&all, &all, &f, &func(&s, &[3, 3]), &g).unwrap(), q(0, 1));
    }

    #[test]
    fn bilinear_form_is_not_symmetric_in_its_sets() {
        let s = uni(3);
        let (f, g, h) = (func(&s, &[1, 0, 2]), func(&s, &[2, -1, -1]), func(&s, &[1, 1, 0]));
        let (a, b) = (set(&[0]), set(&[1, 2]));
        // y = 0, x ∈ {1,2}: (f(x)+1)(g(x)−2)·1 = (1)(−3) + (3)(−3) = −12, times 1/9
        assert_eq!(bilinear_form(&a, &b, &f, &g, &h).unwrap(), q(-12, 9));
        assert_ne!(bilinear_form(&a, &b, &f, &g, &h).unwrap(), bilinear_form(&b, &a, &f, &g, &h).unwrap());
    }

    #[test]
    fn product_identity_examples() {
        let s = uni(2);
        assert_eq!(product_identity_check(&func(&s, &[2, 0]), &func(&s, &[1, -1])).unwrap(), q(0, 1));
        let f = func(&s, &[3, -5]);
        assert_eq!(product_identity_check(&f, &f).unwrap(), q(0, 1));
    }

    #[test]
    fn derivation_examples() {
        let s = uni(2);
        let k = derivation(&func(&s, &[1, -1])).unwrap();
        assert_eq!([k.get(0, 0), k.get(0, 1), k.get(1, 0), k.get(1, 1)], [&q(0, 1), &q(2, 1), &q(-2, 1), &q(0, 1)]);
        assert!(k.is_antisymmetric());
        assert_eq!(derivation(&func(&s, &[4, 4])).unwrap(), ProductKernel::zero(Arc::clone(&s)).unwrap());
        let (l, r) = leibniz_kernels(&func(&s, &[2, 0]), &func(&s, &[1, -1])).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn adjoint_examples() {
        let s = uni(2);
        let f = func(&s, &[1, -1]);
        let back = derivation_adjoint(&derivation(&f).unwrap());
        // 2(f − f_Ω)
        assert_eq!(back.values(), &[q(2, 1), q(-2, 1)]);
        assert!(derivation_adjoint(&ProductKernel::zero(Arc::clone(&s)).unwrap()).is_zero());
        let symmetric = ProductKernel::from_fn(Arc::clone(&s), |_, _| q(5, 1)).unwrap();
        assert!(derivation_adjoint(&symmetric).is_zero());
        let k = ProductKernel::from_fn(uni(3), |x, y| q((x * 3 + y * y) as i64, 1)).unwrap();
        assert_eq!(adjoint_pairing_check(&k).unwrap(), q(0, 1));
    }

    #[test]
    fn adjoint_of_product_derivations_integral() {
        // −∂*(f∂g)(y) = Σ_x (f(x)+f(y))(g(x)−g(y)) μ(x)
        let s = uni(3);
        let (f, g) = (func(&s, &[1, 0, -2]), func(&s, &[3, -1, 1]));
        let adj = derivation_adjoint(&derivation(&g).unwrap().left_mul(&f).unwrap());
        for y in 0..3 {
            let direct = scalar::sum((0..3).map(|x| {
                (f.value(x).clone() + f.value(y).clone()) * (g.value(x).clone() - g.value(y).clone()) * q(1, 3)
            }));
            assert_eq!(-adj.value(y).clone(), direct);
        }
        let sum = product_adjoint_sum(&f, &g).unwrap();
        assert_eq!(sum, f.pointwise_mul(&g).unwrap().center().scaled(&q(2, 1)));
    }

    #[test]
    fn variance_examples() {
        let s = uni(2);
        assert_eq!(variance_identity_check(&func(&s, &[1, -1])).unwrap(), (q(1, 1), q(1, 1), q(1, 1)));
        assert_eq!(variance_identity_check(&func(&s, &[7, 7])).unwrap(), (q(0, 1), q(0, 1), q(0, 1)));
        let w = Arc::new(DiscreteSpace::new(vec![q(1, 5), q(3, 10), q(1, 2)]).unwrap());
        let (a, b, c) = variance_identity_check(&func(&w, &[3, -1, 2])).unwrap();
        // E f² − (E f)² = 4.1 − 1.69
        assert_eq!(a, q(241, 100));
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn decompose_worked_example() {
        let s = uni(4);
        let g = func(&s, &[3, 1, -2, -2]);
        let d = zero_mean_decompose(&g).unwrap();
        assert_eq!(
            d.blocks(),
            &[
                ZeroMeanBlock { a: q(1, 1), a_set: set(&[0, 1]), b: q(1, 1), b_set: set(&[2, 3]) },
                ZeroMeanBlock { a: q(2, 1), a_set: set(&[0]), b: q(1, 1), b_set: set(&[2, 3]) },
            ]
        );
        let expected = StepProfile::new(vec![(q(3, 1), q(1, 4)), (q(2, 1), q(1, 2)), (q(1, 1), q(1, 4))]).unwrap();
        assert_eq!(decreasing_rearrangement(&g), expected);
        assert_eq!(d.profile_sum(), expected);
        assert!(d.check(&g).all());
    }

    #[test]
    fn decompose_small_cases() {
        let s = uni(3);
        let d = zero_mean_decompose(&func(&s, &[1, -1, 0])).unwrap();
        assert_eq!(d.blocks(), &[ZeroMeanBlock { a: q(1, 1), a_set: set(&[0]), b: q(1, 1), b_set: set(&[1]) }]);
        let two = func(&uni(4), &[3, -1, -1, -1]);
        assert_eq!(zero_mean_decompose(&two).unwrap().blocks().len(), 1);
        assert_eq!(zero_mean_decompose(&func(&s, &[0, 0, 0])).unwrap_err(), Error::EmptyInput);
        assert!(matches!(zero_mean_decompose(&func(&s, &[1, 0, 0])), Err(Error::NotZeroMean(_))));
    }

    #[test]
    fn profile_additivity_can_fail() {
        // Peeling keeps supports nested, but the blocks cannot all be
        // comonotone with g here, so Σ g_i* only majorizes g*.
        let s = uni(6);
        let g = SimpleFunction::new(Arc::clone(&s), [3, 3, -15, 9, 13, -13].iter().map(|&v| q(v, 8)).collect()).unwrap();
        let check = zero_mean_decompose(&g).unwrap().check(&g);
        assert!(check.zero_mean && check.nested && check.sums_to_g && check.within_bound);
        assert!(check.profile_majorized);
        assert!(!check.profile_additive);
    }

    #[test]
    fn lemma31_examples() {
        let s = uni(3);
        let one = func(&s, &[1, 1, 1]);
        assert_eq!(lemma31_bound(&one, &func(&s, &[1, -1, 0]), &one).unwrap(), (q(0, 1), q(4, 9)));
        assert_eq!(lemma31_bound(&one, &func(&s, &[2, -1, -1]), &one).unwrap(), (q(0, 1), q(0, 1)));
        let s4 = uni(4);
        let (lhs, rhs) = lemma31_bound(&func(&s4, &[0, 0, 0, 0]), &func(&s4, &[2, -1, -1, 0]), &func(&s4, &[1, 0, -1, 1])).unwrap();
        assert!(lhs <= rhs);
        assert!(matches!(lemma31_bound(&func(&s, &[2, 0, 0]), &func(&s, &[1, -1, 0]), &one), Err(Error::PreconditionViolated(_))));
        assert!(matches!(lemma31_bound(&one, &func(&s, &[1, 0, 0]), &one), Err(Error::PreconditionViolated(_))));
        assert!(matches!(lemma31_bound(&one, &func(&s, &[1, -1, 0]), &func(&s, &[2, 0, 0])), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn kernel_size_limit() {
        let s = Arc::new(DiscreteSpace::<f64>::uniform(MAX_KERNEL_ATOMS + 1).unwrap());
        let f = SimpleFunction::zero(s);
        assert_eq!(derivation(&f).unwrap_err(), Error::KernelTooLarge(MAX_KERNEL_ATOMS + 1));
        assert_eq!(bilinear_form(&AtomSet::full(513), &AtomSet::full(513), &f, &f, &f).unwrap(), 0.0);
    }

    fn triple() -> impl Strategy<Value = (Vec<i64>, Vec<i64>, Vec<i64>)> {
        (1usize..7).prop_flat_map(|n| {
            (
                prop::collection::vec(-8i64..=8, n),
                prop::collection::vec(-8i64..=8, n),
                prop::collection::vec(-8i64..=8, n),
            )
        })
    }

    proptest! {
        #[test]
        fn bilinear_form_is_trilinear((a, b, c) in triple(), k in -3i64..=3) {
            let n = a.len();
            let s = uni(n);
            let (f, g, h) = (func(&s, &a), func(&s, &b), func(&s, &c));
            let all = AtomSet::full(n);
            let base = bilinear_form(&all, &all, &f, &g, &h).unwrap();
            let k = q(k, 1);
            let fk = f.scaled(&k);
            prop_assert_eq!(bilinear_form(&all, &all, &fk, &g, &h).unwrap(), k.clone() * base.clone());
            let g2 = g.pointwise_add(&h).unwrap();
            prop_assert_eq!(
                bilinear_form(&all, &all, &f, &g2, &h).unwrap(),
                base.clone() + bilinear_form(&all, &all, &f, &h, &h).unwrap()
            );
            let h2 = h.pointwise_add(&f).unwrap();
            prop_assert_eq!(
                bilinear_form(&all, &all, &f, &g, &h2).unwrap(),
                base + bilinear_form(&all, &all, &f, &g, &f).unwrap()
            );
        }

        #[test]
        fn splitting_holds((a, b, c) in triple()) {
            let s = uni(a.len());
            let sp = splitting(&func(&s, &a), &func(&s, &b).center(), &func(&s, &c)).unwrap();
            prop_assert!(sp.holds());
        }

        #[test]
        fn decomposition_structure((a, _b, _c) in triple()) {
            let s = uni(a.len());
            let g = func(&s, &a).center();
            prop_assume!(!g.is_zero());
            let check = zero_mean_decompose(&g).unwrap().check(&g);
            prop_assert!(check.zero_mean && check.nested && check.sums_to_g && check.within_bound && check.profile_majorized);
        }
    }
}
