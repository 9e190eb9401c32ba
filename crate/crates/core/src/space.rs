//! Finite probability spaces and the functions that live on them.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::scalar::{self, Scalar, WEIGHT_SUM_TOLERANCE};
use crate::{Error, Result};

/// A probability space on finitely many atoms.
///
/// Weights are validated once at construction and never change.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSpace<T> {
    weights: Vec<T>,
    equal_atoms: bool,
}

impl<T: Scalar> DiscreteSpace<T> {
    /// Validates positivity and normalization. In exact mode the weights
    /// must sum to exactly 1; in float mode to within 2^-40.
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        if let Some(index) = weights.iter().position(|w| *w <= T::zero()) {
            return Err(Error::NonPositiveWeight { index });
        }
        let total = scalar::sum(weights.iter().cloned());
        let normalized = if T::is_exact() {
            total == T::one()
        } else {
            (total.clone() - T::one()).abs().to_f64() <= WEIGHT_SUM_TOLERANCE
        };
        if !normalized {
            return Err(Error::WeightSum { sum: total.to_literal() });
        }
        let equal_atoms = weights.iter().all(|w| *w == weights[0]);
        Ok(DiscreteSpace { weights, equal_atoms })
    }

    /// `n` atoms of measure `1/n` each.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        let w = T::one() / T::from_i64(n as i64);
        Ok(DiscreteSpace { weights: vec![w; n], equal_atoms: true })
    }

    pub fn from_rationals(weights: &[BigRational]) -> Result<Self> {
        DiscreteSpace::new(weights.iter().map(T::from_rational).collect())
    }

    pub fn atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> &T {
        &self.weights[atom]
    }

    pub fn is_equal_atoms(&self) -> bool {
        self.equal_atoms
    }

    /// Fails with [`Error::NonEqualAtomSpace`] unless all atoms have equal
    /// measure.
    pub fn require_equal_atoms(&self) -> Result<()> {
        if self.equal_atoms {
            Ok(())
        } else {
            Err(Error::NonEqualAtomSpace)
        }
    }

    pub fn measure(&self, set: &AtomSet) -> T {
        scalar::sum(set.iter().map(|i| self.weights[i].clone()))
    }
}

/// A subset of atom indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AtomSet(BTreeSet<usize>);

impl AtomSet {
    pub fn empty() -> Self {
        AtomSet(BTreeSet::new())
    }

    pub fn full(atoms: usize) -> Self {
        AtomSet((0..atoms).collect())
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.0.contains(&atom)
    }

    pub fn insert(&mut self, atom: usize) {
        self.0.insert(atom);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn complement(&self, atoms: usize) -> AtomSet {
        (0..atoms).filter(|i| !self.contains(*i)).collect()
    }

    pub fn union(&self, other: &AtomSet) -> AtomSet {
        self.0.union(&other.0).copied().collect()
    }

    pub fn intersection(&self, other: &AtomSet) -> AtomSet {
        self.0.intersection(&other.0).copied().collect()
    }

    pub fn is_disjoint(&self, other: &AtomSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn is_subset(&self, other: &AtomSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Checks every member is a valid index into a space of `atoms` atoms.
    pub fn check_within(&self, atoms: usize) -> Result<()> {
        match self.0.iter().find(|&&i| i >= atoms) {
            Some(&index) => Err(Error::AtomOutOfRange { index, atoms }),
            None => Ok(()),
        }
    }
}

impl FromIterator<usize> for AtomSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        AtomSet(iter.into_iter().collect())
    }
}

/// A real function on the atoms of a [`DiscreteSpace`].
#[derive(Clone, Debug)]
pub struct SimpleFunction<T> {
    space: Arc<DiscreteSpace<T>>,
    values: Vec<T>,
}

impl<T: Scalar> PartialEq for SimpleFunction<T> {
    fn eq(&self, other: &Self) -> bool {
        self.same_space(other) && self.values == other.values
    }
}

impl<T: Scalar> SimpleFunction<T> {
    pub fn new(space: Arc<DiscreteSpace<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != space.atoms() {
            return Err(Error::LengthMismatch { expected: space.atoms(), got: values.len() });
        }
        Ok(SimpleFunction { space, values })
    }

    pub fn from_rationals(space: Arc<DiscreteSpace<T>>, values: &[BigRational]) -> Result<Self> {
        SimpleFunction::new(space, values.iter().map(T::from_rational).collect())
    }

    pub fn constant(space: Arc<DiscreteSpace<T>>, c: T) -> Self {
        let values = vec![c; space.atoms()];
        SimpleFunction { space, values }
    }

    pub fn zero(space: Arc<DiscreteSpace<T>>) -> Self {
        SimpleFunction::constant(space, T::zero())
    }

    /// The indicator of `set`.
    pub fn indicator(space: Arc<DiscreteSpace<T>>, set: &AtomSet) -> Self {
        let values = (0..space.atoms())
            .map(|i| if set.contains(i) { T::one() } else { T::zero() })
            .collect();
        SimpleFunction { space, values }
    }

    pub fn space(&self) -> &Arc<DiscreteSpace<T>> {
        &self.space
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, atom: usize) -> &T {
        &self.values[atom]
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    pub fn same_space(&self, other: &SimpleFunction<T>) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    pub fn require_same_space(&self, other: &SimpleFunction<T>) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(T::is_zero)
    }

    /// `f_Ω = Σ f(i) μ(i)`.
    pub fn integrate(&self) -> T {
        scalar::sum(
            self.values
                .iter()
                .zip(self.space.weights())
                .map(|(v, w)| v.clone() * w.clone()),
        )
    }

    /// `f - f_Ω`.
    pub fn center(&self) -> SimpleFunction<T> {
        let mean = self.integrate();
        self.map(|v| v.clone() - mean.clone())
    }

    /// Atoms with a nonzero value. No tolerance is applied in float mode.
    pub fn support(&self) -> AtomSet {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    /// `(f_+, f_-)` with `f = f_+ - f_-`.
    pub fn pos_neg_parts(&self) -> (SimpleFunction<T>, SimpleFunction<T>) {
        let pos = self.map(|v| if *v > T::zero() { v.clone() } else { T::zero() });
        let neg = self.map(|v| if *v < T::zero() { -v.clone() } else { T::zero() });
        (pos, neg)
    }

    /// `‖f‖_∞`, the largest absolute value.
    pub fn sup_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn abs(&self) -> SimpleFunction<T> {
        self.map(|v| v.abs())
    }

    pub fn map(&self, op: impl Fn(&T) -> T) -> SimpleFunction<T> {
        SimpleFunction { space: Arc::clone(&self.space), values: self.values.iter().map(op).collect() }
    }

    pub fn zip_with(&self, other: &SimpleFunction<T>, op: impl Fn(&T, &T) -> T) -> Result<SimpleFunction<T>> {
        self.require_same_space(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| op(a, b)).collect();
        Ok(SimpleFunction { space: Arc::clone(&self.space), values })
    }

    pub fn pointwise_add(&self, other: &SimpleFunction<T>) -> Result<SimpleFunction<T>> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn pointwise_sub(&self, other: &SimpleFunction<T>) -> Result<SimpleFunction<T>> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn pointwise_mul(&self, other: &SimpleFunction<T>) -> Result<SimpleFunction<T>> {
        self.zip_with(other, |a, b| a.clone() * b.clone())
    }

    pub fn scaled(&self, c: &T) -> SimpleFunction<T> {
        self.map(|v| v.clone() * c.clone())
    }

    /// `μ({|f| > t})`.
    pub fn distribution(&self, t: &T) -> T {
        scalar::sum(
            self.values
                .iter()
                .zip(self.space.weights())
                .filter(|(v, _)| v.abs() > *t)
                .map(|(_, w)| w.clone()),
        )
    }

    /// Atom indices ordered by `|value|` descending, ties by index.
    pub fn order_by_magnitude(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&i, &j| {
            self.values[j]
                .abs()
                .partial_cmp(&self.values[i].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(&j))
        });
        order
    }

    /// Distinct values of `|f|`, ascending, always including 0.
    pub fn magnitude_levels(&self) -> Vec<T> {
        let mut levels: Vec<T> = std::iter::once(T::zero()).chain(self.values.iter().map(|v| v.abs())).collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        levels.dedup();
        levels
    }
}
