use num_bigint::BigInt;
use num_rational::BigRational;

use super::config::{ExponentTuple, Suite, TrialConfig};
use crate::io::Instance;
use crate::norms::{self, associate_norm, lp_norm, norm, norm_of_profile, ConcaveWeight, RiNorm};
use crate::oscillation::{bilinear_form, lemma31_bound, splitting};
use crate::rearrange::{
    decreasing_rearrangement, equimeasurable, indicator_difference_rearrangement, layer_decompose,
    layer_reconstruct, monotone_ladder_check, nonexpansive_check, nonexpansive_check_power,
    profile_integrate_product, rearrangement_preserves_lp_power, FLOAT_CHECK_TOLERANCE,
};
use crate::scalar::{nearly_equal, Exponent, Scalar};
use crate::space::{AtomSet, SimpleFunction};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `lhs <= rhs`.
    Le,
    /// `lhs == rhs`.
    Eq,
}

/// One comparison made on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Check<T> {
    pub property: &'static str,
    pub lhs: T,
    pub rhs: T,
    pub relation: Relation,
}

impl<T: Scalar> Check<T> {
    pub fn le(property: &'static str, (lhs, rhs): (T, T)) -> Self {
        Check { property, lhs, rhs, relation: Relation::Le }
    }

    pub fn eq(property: &'static str, (lhs, rhs): (T, T)) -> Self {
        Check { property, lhs, rhs, relation: Relation::Eq }
    }

    /// A pass/fail property recorded as `failures == 0`.
    pub fn flag(property: &'static str, ok: bool) -> Self {
        Check::eq(property, (T::from_i64(if ok { 0 } else { 1 }), T::zero()))
    }

    pub fn gap(&self) -> T {
        self.rhs.clone() - self.lhs.clone()
    }

    /// `Le` holds when the gap is nonnegative, with no tolerance; `Eq`
    /// holds exactly in exact mode and to `10^-9` relative otherwise.
    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::Le => self.gap() >= T::zero(),
            Relation::Eq => nearly_equal(&self.lhs, &self.rhs, FLOAT_CHECK_TOLERANCE),
        }
    }

    /// Like [`Check::holds`] but forgiving violations smaller than `rel`
    /// times the larger side.
    pub fn holds_within(&self, rel: f64) -> bool {
        let scale = self.lhs.abs().to_f64().max(self.rhs.abs().to_f64());
        let slack = rel * scale;
        match self.relation {
            Relation::Le => self.gap().to_f64() >= -slack,
            Relation::Eq => self.gap().abs().to_f64() <= slack,
        }
    }
}

/// `φ` with breakpoints `(0,0)`, `(1/4,1/2)`, `(1,1)`.
pub fn default_phi() -> ConcaveWeight {
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    ConcaveWeight::new(vec![(q(0, 1), q(0, 1)), (q(1, 4), q(1, 2)), (q(1, 1), q(1, 1))])
        .expect("default weight is concave")
}

/// `(I_{Ω,Ω}(f,g,h), 2 ∫_0^∞ f* g* h*)`.
pub fn thm32_sides<T: Scalar>(f: &SimpleFunction<T>, g: &SimpleFunction<T>, h: &SimpleFunction<T>) -> Result<(T, T)> {
    let all = AtomSet::full(f.atoms());
    let lhs = bilinear_form(&all, &all, f, g, h)?;
    let profiles = [decreasing_rearrangement(f), decreasing_rearrangement(g), decreasing_rearrangement(h)];
    let rhs = profile_integrate_product(&profiles.iter().collect::<Vec<_>>())?;
    Ok((lhs, T::from_i64(2) * rhs))
}

/// `(‖fg − (fg)_Ω‖_r, ‖f‖_{p1} ‖g − g_Ω‖_{q1} + ‖g‖_{p2} ‖f − f_Ω‖_{q2})`.
pub fn thm41_sides<T: Scalar>(f: &SimpleFunction<T>, g: &SimpleFunction<T>, t: &ExponentTuple) -> Result<(T, T)> {
    let lhs = lp_norm(&f.pointwise_mul(g)?.center(), &t.r)?;
    let rhs = lp_norm(f, &t.p1)? * lp_norm(&g.center(), &t.q1)? + lp_norm(g, &t.p2)? * lp_norm(&f.center(), &t.q2)?;
    Ok((lhs, rhs))
}

/// Both forms, in order:
/// `‖fg − (fg)_Ω‖_X ≤ ‖f‖_∞ ‖g − g_Ω‖_X + ‖g‖_∞ ‖f − f_Ω‖_X` and
/// `‖fg − (fg)_Ω‖_1 ≤ ‖f‖_X ‖g − g_Ω‖_{X'} + ‖g‖_{X'} ‖f − f_Ω‖_X`.
pub fn thm43_sides<T: Scalar>(f: &SimpleFunction<T>, g: &SimpleFunction<T>, x: &RiNorm) -> Result<[(T, T); 2]> {
    let product = f.pointwise_mul(g)?.center();
    let (fc, gc) = (f.center(), g.center());
    let norm_fc = norm(x, &fc)?;
    let first = (
        norm(x, &product)?,
        f.sup_abs() * norm(x, &gc)? + g.sup_abs() * norm_fc.clone(),
    );
    let second = (
        lp_norm(&product, &Exponent::one())?,
        norm(x, f)? * associate_norm(x, &gc)? + associate_norm(x, g)? * norm_fc,
    );
    Ok([first, second])
}

/// Evaluates every comparison of `cfg.suite` on `instance`, in a fixed
/// order.
pub fn evaluate<T: Scalar>(cfg: &TrialConfig, instance: &Instance) -> Result<Vec<Check<T>>> {
    let space = instance.space::<T>()?;
    let f = instance.function(&space, "f")?;
    let g = instance.function(&space, "g")?;
    match cfg.suite {
        Suite::Lemma31 => {
            let h = instance.function(&space, "h")?;
            Ok(vec![Check::le("lemma31", lemma31_bound(&f, &g, &h)?)])
        }
        Suite::Thm32 => {
            let h = instance.function(&space, "h")?;
            let split = splitting(&f, &g, &h)?;
            let parts = split.g_gc.clone() + split.gc_g.clone() + split.g_g.clone() + split.gc_gc.clone();
            Ok(vec![
                Check::le("thm32", thm32_sides(&f, &g, &h)?),
                Check::eq("splitting", (split.whole, parts)),
                Check::eq("splitting_off_support", (split.gc_gc, T::zero())),
            ])
        }
        Suite::Thm41 => Ok(vec![Check::le("thm41", thm41_sides(&f, &g, &cfg.exponent_tuple())?)]),
        Suite::Thm43 => {
            let [first, second] = thm43_sides(&f, &g, &cfg.ri_norm())?;
            Ok(vec![Check::le("thm43_x_norm", first), Check::le("thm43_associate", second)])
        }
        Suite::Rearrange => rearrange_checks(&f, &g),
    }
}

const LP_POWER_NAMES: [&str; 3] = ["lp_preserved_p1", "lp_preserved_p2", "lp_preserved_p3"];

fn rearrange_checks<T: Scalar>(f: &SimpleFunction<T>, g: &SimpleFunction<T>) -> Result<Vec<Check<T>>> {
    let fs = decreasing_rearrangement(f);
    let gs = decreasing_rearrangement(g);
    let mut checks = vec![Check::flag("equimeasurable", equimeasurable(f, &fs) && equimeasurable(g, &gs))];

    for (k, name) in (1..=3).zip(LP_POWER_NAMES) {
        checks.push(Check::eq(name, rearrangement_preserves_lp_power(f, k)));
    }
    checks.push(Check::eq("lp_preserved_pinf", (f.sup_abs(), fs.sup())));

    let rebuilt = layer_reconstruct(&layer_decompose(f));
    let round_trip = rebuilt.values().iter().zip(f.values()).all(|(a, b)| nearly_equal(a, b, FLOAT_CHECK_TOLERANCE));
    checks.push(Check::flag("layer_cake", round_trip));

    let mut thresholds = f.magnitude_levels();
    let half = T::one() / T::from_i64(2);
    let midpoints: Vec<T> =
        thresholds.windows(2).map(|w| (w[0].clone() + w[1].clone()) * half.clone()).collect();
    thresholds.extend(midpoints);
    thresholds.push(f.sup_abs() + T::one());
    let mut identity_holds = true;
    for t in &thresholds {
        let (lhs, rhs) = indicator_difference_rearrangement(f, t)?;
        identity_holds &= lhs.same_function(&rhs);
    }
    checks.push(Check::flag("indicator_difference", identity_holds));

    checks.push(Check::le("nonexpansive_p1", nonexpansive_check(f, g, &Exponent::one())?));
    checks.push(Check::le("nonexpansive_p2", nonexpansive_check_power(f, g, 2)?));
    checks.push(Check::le("nonexpansive_pinf", nonexpansive_check(f, g, &Exponent::Infinite)?));

    checks.push(Check::flag("monotone_ladder", monotone_ladder_check(f, 16).holds()));

    checks.push(Check::le("hardy_littlewood", norms::hardy_littlewood_check(f, g)?));
    let mut holder = vec![("holder_l1", RiNorm::l1()), ("holder_linf", RiNorm::linf())];
    let lorentz = RiNorm::lorentz(default_phi());
    if f.space().is_equal_atoms() {
        holder.push(("holder_lorentz", lorentz.clone()));
    }
    for (name, x) in holder {
        let (_, middle, top) = norms::holder_check(&x, f, g)?;
        checks.push(Check::le(name, (middle, top)));
    }

    let sum = f.pointwise_add(g)?;
    checks.push(Check::le("sublinearity", (decreasing_rearrangement(&sum).sup(), fs.sup() + gs.sup())));

    if f.space().is_equal_atoms() {
        let (lo, mid, hi) = norms::embedding_chain(&lorentz, f)?;
        checks.push(Check::le("embedding_lower", (lo, mid.clone())));
        checks.push(Check::le("embedding_upper", (mid.clone(), hi)));
        checks.push(Check::eq("norm_via_profile", (mid, norm_of_profile(&lorentz, &fs, f.atoms())?)));
        let mut reversed = f.values().to_vec();
        reversed.reverse();
        let shuffled = SimpleFunction::new(std::sync::Arc::clone(f.space()), reversed)?;
        checks.push(Check::eq("rearrangement_invariance", (norm(&lorentz, f)?, norm(&lorentz, &shuffled)?)));
    }
    Ok(checks)
}

/// A hand-built instance run once per suite, with optional expected values
/// for the first comparison and, for the rearrangement suite, the expected
/// profile of `f`.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub instance: Instance,
    pub exponents: Option<ExponentTuple>,
    pub norm: Option<RiNorm>,
    pub expected: Option<(BigRational, BigRational)>,
    pub expected_profile: Option<Vec<(BigRational, BigRational)>>,
}

impl Fixture {
    fn new(name: impl Into<String>, instance: Instance) -> Self {
        Fixture { name: name.into(), instance, exponents: None, norm: None, expected: None, expected_profile: None }
    }

    fn expect(mut self, lhs: BigRational, rhs: BigRational) -> Self {
        self.expected = Some((lhs, rhs));
        self
    }

    /// `cfg` with this fixture's parameters substituted.
    pub fn config(&self, cfg: &TrialConfig) -> TrialConfig {
        let mut c = cfg.clone();
        if self.exponents.is_some() {
            c.exponents = self.exponents.clone();
        }
        if self.norm.is_some() {
            c.norm = self.norm.clone();
        }
        c
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ints(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| q(x, 1)).collect()
}

fn uniform(n: usize) -> Instance {
    Instance::new(vec![q(1, n as i64); n])
}

/// Overlap configurations: `g = 2·1_A − 1_B` on six equal atoms with
/// `A = {0}`, `B = {1,2}`, `G^c = {3,4,5}`, and `F = supp f` meeting each of
/// `A`, `B`, `G^c` or not, giving eight overlap patterns. The pattern name
/// lists the bits for `A`, `B`, `G^c`.
fn overlap_fixtures() -> Vec<Fixture> {
    let g = ints(&[2, -1, -1, 0, 0, 0]);
    let h = vec![q(1, 1), q(-1, 2), q(1, 1), q(-1, 1), q(1, 2), q(1, 1)];
    (0..8)
        .map(|bits: usize| {
            let mut f = ints(&[0; 6]);
            if bits & 4 != 0 {
                f[0] = q(1, 1);
            }
            if bits & 2 != 0 {
                f[1] = q(-1, 1);
                f[2] = q(1, 1);
            }
            if bits & 1 != 0 {
                f[3] = q(1, 1);
                f[5] = q(-1, 1);
            }
            let name = format!("overlap-{}{}{}", bits >> 2 & 1, bits >> 1 & 1, bits & 1);
            Fixture::new(name, uniform(6).with("f", f).with("g", g.clone()).with("h", h.clone()))
        })
        .collect()
}

pub fn fixtures(suite: Suite) -> Vec<Fixture> {
    match suite {
        Suite::Lemma31 => vec![
            Fixture::new("support-gap", uniform(3).with("f", ints(&[1, 1, 1])).with("g", ints(&[1, -1, 0])).with("h", ints(&[1, 1, 1])))
                .expect(q(0, 1), q(4, 9)),
            Fixture::new("full-support", uniform(3).with("f", ints(&[1, 1, 1])).with("g", ints(&[2, -1, -1])).with("h", ints(&[1, 1, 1])))
                .expect(q(0, 1), q(0, 1)),
        ],
        Suite::Thm32 => {
            let mut v = vec![
                Fixture::new("equality", uniform(2).with("f", ints(&[1, 1])).with("g", ints(&[1, -1])).with("h", ints(&[-1, 1])))
                    .expect(q(2, 1), q(2, 1)),
                Fixture::new("gap-four", uniform(2).with("f", ints(&[1, 1])).with("g", ints(&[1, -1])).with("h", ints(&[1, -1])))
                    .expect(q(-2, 1), q(2, 1)),
                Fixture::new("zero-g", uniform(2).with("f", ints(&[1, 1])).with("g", ints(&[0, 0])).with("h", ints(&[-1, 1])))
                    .expect(q(0, 1), q(0, 1)),
            ];
            v.extend(overlap_fixtures());
            v
        }
        Suite::Thm41 => {
            let one_inf: ExponentTuple = "1,inf,1,inf,1".parse().expect("valid tuple");
            let twos: ExponentTuple = "1,2,2,2,2".parse().expect("valid tuple");
            let mut a = Fixture::new("two-point", uniform(2).with("f", ints(&[2, 0])).with("g", ints(&[1, -1])))
                .expect(q(1, 1), q(3, 1));
            a.exponents = Some(one_inf.clone());
            let mut b = Fixture::new("constant-product", uniform(2).with("f", ints(&[1, -1])).with("g", ints(&[1, -1])))
                .expect(q(0, 1), q(2, 1));
            b.exponents = Some(twos);
            let mut c = Fixture::new("constant-f", uniform(2).with("f", ints(&[2, 2])).with("g", ints(&[1, -1])))
                .expect(q(2, 1), q(2, 1));
            c.exponents = Some(one_inf);
            vec![a, b, c]
        }
        Suite::Thm43 => {
            let mut a = Fixture::new("l1-two-point", uniform(2).with("f", ints(&[2, 0])).with("g", ints(&[1, -1])))
                .expect(q(1, 1), q(3, 1));
            a.norm = Some(RiNorm::l1());
            let mut b = Fixture::new("l1-constant-f", uniform(2).with("f", ints(&[1, 1])).with("g", ints(&[1, -1])))
                .expect(q(1, 1), q(1, 1));
            b.norm = Some(RiNorm::l1());
            vec![a, b]
        }
        Suite::Rearrange => {
            let mut hand = Fixture::new(
                "hand-profile",
                Instance::new(vec![q(1, 5), q(3, 10), q(1, 2)]).with("f", ints(&[3, -1, 2])).with("g", ints(&[1, 1, -2])),
            );
            hand.expected_profile = Some(vec![(q(3, 1), q(1, 5)), (q(2, 1), q(1, 2)), (q(1, 1), q(3, 10))]);
            let zero = Fixture::new("zero-function", uniform(3).with("f", ints(&[0, 0, 0])).with("g", ints(&[0, 0, 0])));
            vec![hand, zero]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::config::WeightScheme;

    #[test]
    fn thm32_fixture_values() {
        let cfg = TrialConfig::new(Suite::Thm32);
        for fx in fixtures(Suite::Thm32) {
            let checks = evaluate::<BigRational>(&fx.config(&cfg), &fx.instance).unwrap();
            assert!(checks.iter().all(Check::holds), "{}", fx.name);
            if let Some((l, r)) = fx.expected {
                assert_eq!((checks[0].lhs.clone(), checks[0].rhs.clone()), (l, r), "{}", fx.name);
            }
        }
    }

    #[test]
    fn thm41_and_thm43_fixture_values() {
        for suite in [Suite::Thm41, Suite::Thm43] {
            let cfg = TrialConfig::new(suite);
            for fx in fixtures(suite) {
                let checks = evaluate::<BigRational>(&fx.config(&cfg), &fx.instance).unwrap();
                let (l, r) = fx.expected.clone().unwrap();
                assert_eq!((checks[0].lhs.clone(), checks[0].rhs.clone()), (l, r), "{}", fx.name);
            }
        }
    }

    #[test]
    fn thm43_l2_matches_thm41_sup_tuple() {
        let s = std::sync::Arc::new(crate::DiscreteSpace::<f64>::uniform(4).unwrap());
        let f = SimpleFunction::new(s.clone(), vec![1.5, -0.25, 2.0, 0.0]).unwrap();
        let g = SimpleFunction::new(s, vec![-1.0, 0.75, 0.5, 2.0]).unwrap();
        let [first, _] = thm43_sides(&f, &g, &RiNorm::lp(Exponent::integer(2))).unwrap();
        let other = thm41_sides(&f, &g, &ExponentTuple::sup_weighted(Exponent::integer(2))).unwrap();
        assert!((first.0 - other.0).abs() <= 1e-12 * first.0.abs());
        assert!((first.1 - other.1).abs() <= 1e-12 * first.1.abs());
    }

    #[test]
    fn rearrange_checks_pass_on_fixtures() {
        let cfg = TrialConfig::new(Suite::Rearrange).with_weights(WeightScheme::Equal);
        for fx in fixtures(Suite::Rearrange) {
            let exact = evaluate::<BigRational>(&cfg, &fx.instance).unwrap();
            assert!(exact.iter().all(Check::holds), "{} {:?}", fx.name, exact.iter().find(|c| !c.holds()));
            let float = evaluate::<f64>(&cfg, &fx.instance).unwrap();
            assert_eq!(float.len(), exact.len());
        }
    }

    #[test]
    fn check_semantics() {
        assert!(Check::le("x", (1.0, 1.0)).holds());
        assert!(!Check::le("x", (1.0 + 1e-15, 1.0)).holds());
        assert!(Check::le("x", (1.0 + 1e-15, 1.0)).holds_within(1e-12));
        assert!(Check::<f64>::flag("x", true).holds());
        assert!(!Check::<f64>::flag("x", false).holds());
    }
}
