//! Multi-index enumeration, sparse polynomial arithmetic and semi-algebraic
//! set descriptions.
//!
//! The monomial order is graded lexicographic (ascending total degree,
//! within a degree the index with the larger leading exponents first), fixed
//! once for the whole crate: every matrix layout and moment-vector address
//! derives from it.

use crate::scalar::Scalar;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("operand has {left} variables, expected {right}")]
    NvarsMismatch { left: usize, right: usize },
    #[error("evaluation point has length {got}, expected {expected}")]
    PointLength { got: usize, expected: usize },
    #[error("{m} inequalities would generate 2^{m} preordering products; the limit is 2^20")]
    PreorderingTooLarge { m: usize },
    #[error("interval {index} is degenerate: [{lo}, {hi}]")]
    DegenerateInterval { index: usize, lo: String, hi: String },
    #[error("inequality {index} has {got} variables, expected {expected}")]
    SetNvarsMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("box has {got} intervals, expected {expected}")]
    BoxLength { got: usize, expected: usize },
}

/// Exponent vector over a fixed number of variables.
///
/// Ordering is graded lexicographic; comparing indices of different lengths
/// is a caller bug (checked in debug builds).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    /// The unit index for variable `i`.
    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise sum (monomial product).
    pub fn plus(&self, other: &Self) -> Self {
        debug_assert_eq!(self.nvars(), other.nvars());
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    }

    /// The same exponents with `extra` trailing zero slots appended.
    pub fn extend_vars(&self, extra: usize) -> Self {
        let mut e = self.0.clone();
        e.extend(std::iter::repeat_n(0, extra));
        MultiIndex(e)
    }

    /// Doubled exponents (the diagonal key `2α`).
    pub fn doubled(&self) -> Self {
        MultiIndex(self.0.iter().map(|&e| 2 * e).collect())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(
            self.nvars(),
            other.nvars(),
            "comparing multi-indices of different lengths"
        );
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => self.0.cmp(&other.0).reverse(),
            ord => ord,
        }
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Number of multi-indices in `nvars` variables of degree at most `d`.
pub fn basis_size(nvars: usize, d: u32) -> usize {
    binomial(nvars as u64 + d as u64, d as u64) as usize
}

/// All multi-indices of degree at most `d`, in graded-lex order.
pub fn enumerate_indices(nvars: usize, d: u32) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(basis_size(nvars, d));
    let mut current = vec![0u32; nvars];
    for deg in 0..=d {
        emit_degree(&mut current, 0, deg, &mut out);
    }
    out
}

fn emit_degree(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    // larger leading exponent first, matching the graded-lex order
    for e in (0..=remaining).rev() {
        current[pos] = e;
        emit_degree(current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

/// Position of `idx` in the graded-lex enumeration of its variable count.
///
/// Inverse of [`enumerate_indices`]: `enumerate_indices(n, d)[index_rank(i)] == *i`
/// whenever `i.degree() <= d`.
pub fn index_rank(idx: &MultiIndex) -> usize {
    let n = idx.nvars() as u64;
    let deg = idx.degree() as u64;
    // indices of strictly smaller degree
    let mut rank = if deg == 0 {
        0
    } else {
        binomial(n + deg - 1, deg - 1)
    };
    // within the degree block, count indices that come first
    let mut remaining = deg;
    for (pos, &e) in idx.exponents().iter().enumerate() {
        let vars_after = (idx.nvars() - pos - 1) as u64;
        if vars_after == 0 {
            break;
        }
        // indices with a larger exponent at this position precede idx
        for larger in (e as u64 + 1)..=remaining {
            rank += binomial(vars_after - 1 + remaining - larger, remaining - larger);
        }
        remaining -= e as u64;
    }
    rank as usize
}

/// Sparse multivariate polynomial with scalar coefficients.
///
/// Invariants: no stored coefficient is zero, every key has length `nvars`,
/// and the zero polynomial is the empty term map (degree 0 by convention).
#[derive(Clone, PartialEq)]
pub struct Polynomial<T> {
    nvars: usize,
    terms: BTreeMap<MultiIndex, T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, value: T) -> Self {
        let mut p = Self::zero(nvars);
        if !value.is_zero() {
            p.terms.insert(MultiIndex::zeros(nvars), value);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, T::one())
    }

    /// The monomial `x_i`.
    pub fn variable(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut p = Self::zero(nvars);
        p.terms.insert(MultiIndex::unit(nvars, i), T::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (MultiIndex, T)>) -> Self {
        let mut p = Self::zero(nvars);
        for (idx, coef) in terms {
            assert_eq!(idx.nvars(), nvars, "term key length mismatch");
            p.add_term(idx, coef);
        }
        p
    }

    /// Univariate polynomial `c_0 + c_1 x + ...` from dense coefficients.
    pub fn from_univariate_coeffs(coeffs: &[T]) -> Self {
        Self::from_terms(
            1,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (MultiIndex::new(vec![k as u32]), c.clone())),
        )
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, idx: &MultiIndex) -> T {
        self.terms.get(idx).cloned().unwrap_or_else(T::zero)
    }

    /// Max term degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    fn add_term(&mut self, idx: MultiIndex, coef: T) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(idx) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + coef;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_nvars(other)?;
        let mut out = self.clone();
        for (idx, coef) in &other.terms {
            out.add_term(idx.clone(), coef.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &T) -> Self {
        if factor.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c.clone() * factor.clone()))
                .collect(),
        }
    }

    /// Exact sparse convolution; zero coefficients arising from cancellation
    /// are dropped.
    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_nvars(other)?;
        let mut out = Self::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.plus(b), ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..e {
            acc = acc.mul(self).expect("nvars invariant");
        }
        acc
    }

    /// `Σ coef · Π point_i^{e_i}` by direct monomial evaluation.
    pub fn evaluate(&self, point: &[T]) -> Result<T, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::PointLength {
                got: point.len(),
                expected: self.nvars,
            });
        }
        let mut acc = T::zero();
        for (idx, coef) in &self.terms {
            let mut term = coef.clone();
            for (x, &e) in point.iter().zip(idx.exponents()) {
                if e > 0 {
                    term = term * x.powu(e);
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    /// The same polynomial viewed in `nvars + extra` variables.
    pub fn extend_vars(&self, extra: usize) -> Self {
        Polynomial {
            nvars: self.nvars + extra,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.extend_vars(extra), c.clone()))
                .collect(),
        }
    }

    fn check_nvars(&self, other: &Self) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::NvarsMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Debug for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, coef) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", coef)?;
            for (i, &e) in idx.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i)?,
                    _ => write!(f, "*x{}^{}", i, e)?,
                }
            }
        }
        Ok(())
    }
}

/// Compact basic semi-algebraic set `{x : g_j(x) >= 0}` together with a box
/// asserted (not verified) to contain it.
#[derive(Clone)]
pub struct SemialgebraicSet<T> {
    nvars: usize,
    inequalities: Vec<Polynomial<T>>,
    bounds: Vec<(T, T)>,
}

impl<T: Scalar> SemialgebraicSet<T> {
    pub fn new(
        nvars: usize,
        inequalities: Vec<Polynomial<T>>,
        bounds: Vec<(T, T)>,
    ) -> Result<Self, PolyError> {
        if bounds.len() != nvars {
            return Err(PolyError::BoxLength {
                got: bounds.len(),
                expected: nvars,
            });
        }
        for (i, (lo, hi)) in bounds.iter().enumerate() {
            if !(lo < hi) {
                return Err(PolyError::DegenerateInterval {
                    index: i,
                    lo: format!("{}", lo),
                    hi: format!("{}", hi),
                });
            }
        }
        for (i, g) in inequalities.iter().enumerate() {
            if g.nvars() != nvars {
                return Err(PolyError::SetNvarsMismatch {
                    index: i,
                    got: g.nvars(),
                    expected: nvars,
                });
            }
        }
        Ok(SemialgebraicSet {
            nvars,
            inequalities,
            bounds,
        })
    }

    /// The interval `[lo, hi]` described by the single inequality
    /// `(x - lo)(hi - x) >= 0`.
    pub fn interval(lo: T, hi: T) -> Result<Self, PolyError> {
        let x = Polynomial::variable(1, 0);
        let g = x
            .add(&Polynomial::constant(1, -lo.clone()))
            .unwrap()
            .mul(&Polynomial::constant(1, hi.clone()).add(&x.scale(&-T::one())).unwrap())
            .unwrap();
        SemialgebraicSet::new(1, vec![g], vec![(lo, hi)])
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn inequalities(&self) -> &[Polynomial<T>] {
        &self.inequalities
    }

    pub fn bounds(&self) -> &[(T, T)] {
        &self.bounds
    }
}

impl<T: Scalar> fmt::Debug for SemialgebraicSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemialgebraicSet")
            .field("nvars", &self.nvars)
            .field("inequalities", &self.inequalities)
            .field("bounds", &self.bounds)
            .finish()
    }
}

/// One product `g^β = g_1^{β_1} ··· g_m^{β_m}` of the preordering.
#[derive(Clone)]
pub struct PreorderingTerm<T> {
    pub selector: Vec<bool>,
    pub product: Polynomial<T>,
    pub halfdeg: u32,
}

impl<T: Scalar> fmt::Debug for PreorderingTerm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PreorderingTerm")
            .field("selector", &self.selector)
            .field("product", &self.product)
            .field("halfdeg", &self.halfdeg)
            .finish()
    }
}

/// All `2^m` preordering products, selectors in binary counting order
/// starting from the empty product.
pub fn preordering<T: Scalar>(
    set: &SemialgebraicSet<T>,
) -> Result<Vec<PreorderingTerm<T>>, PolyError> {
    let m = set.inequalities().len();
    if m > 20 {
        return Err(PolyError::PreorderingTooLarge { m });
    }
    let mut out = Vec::with_capacity(1 << m);
    for code in 0u32..(1u32 << m) {
        let selector: Vec<bool> = (0..m).map(|j| code >> j & 1 == 1).collect();
        let mut product = Polynomial::one(set.nvars());
        for (j, &on) in selector.iter().enumerate() {
            if on {
                product = product.mul(&set.inequalities()[j])?;
            }
        }
        let halfdeg = product.degree().div_ceil(2);
        out.push(PreorderingTerm {
            selector,
            product,
            halfdeg,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(exps: &[u32]) -> MultiIndex {
        MultiIndex::new(exps.to_vec())
    }

    #[test]
    fn enumeration_two_vars_degree_two() {
        let got = enumerate_indices(2, 2);
        let expected = [
            mi(&[0, 0]),
            mi(&[1, 0]),
            mi(&[0, 1]),
            mi(&[2, 0]),
            mi(&[1, 1]),
            mi(&[0, 2]),
        ];
        assert_eq!(got, expected);
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_indices(1, 0), vec![mi(&[0])]);
        assert_eq!(enumerate_indices(3, 4).len(), 35);
        // brute force: all exponent triples with sum <= 4
        let mut count = 0;
        for a in 0..=4u32 {
            for b in 0..=4u32 {
                for c in 0..=4u32 {
                    if a + b + c <= 4 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 35);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(index_rank(&mi(&[0, 0])), 0);
        assert_eq!(index_rank(&mi(&[0, 1])), 2);
        assert_eq!(index_rank(&mi(&[2, 0])), 3);
    }

    #[test]
    fn rank_inverts_enumeration() {
        for n in 1..=4 {
            for d in 0..=10u32 {
                let list = enumerate_indices(n, d);
                assert_eq!(list.len(), basis_size(n, d), "n={n} d={d}");
                for (pos, idx) in list.iter().enumerate() {
                    assert_eq!(index_rank(idx), pos, "n={n} d={d} idx={idx:?}");
                }
            }
        }
    }

    #[test]
    fn mul_example_x_times_one_minus_x() {
        let x: Polynomial<f64> = Polynomial::variable(1, 0);
        let one_minus_x = Polynomial::one(1).add(&x.scale(&-1.0)).unwrap();
        let g = x.mul(&one_minus_x).unwrap();
        assert_eq!(g.coefficient(&mi(&[1])), 1.0);
        assert_eq!(g.coefficient(&mi(&[2])), -1.0);
        assert_eq!(g.num_terms(), 2);
        assert_eq!(g.degree(), 2);
    }

    #[test]
    fn mul_identity_and_cancellation() {
        let x: Polynomial<f64> = Polynomial::variable(1, 0);
        let p = Polynomial::from_univariate_coeffs(&[3.0, 0.0, -2.0]);
        assert_eq!(p.mul(&Polynomial::one(1)).unwrap(), p);
        // (1 - x)(1 + x) = 1 - x^2, the x terms cancel and must be dropped
        let a = Polynomial::one(1).add(&x.scale(&-1.0)).unwrap();
        let b = Polynomial::one(1).add(&x).unwrap();
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.coefficient(&mi(&[0])), 1.0);
        assert_eq!(prod.coefficient(&mi(&[1])), 0.0);
        assert_eq!(prod.coefficient(&mi(&[2])), -1.0);
        assert_eq!(prod.num_terms(), 2);
    }

    #[test]
    fn mul_nvars_mismatch() {
        let p: Polynomial<f64> = Polynomial::one(1);
        let q: Polynomial<f64> = Polynomial::one(2);
        assert!(matches!(p.mul(&q), Err(PolyError::NvarsMismatch { .. })));
    }

    #[test]
    fn evaluate_examples() {
        let g: Polynomial<f64> = Polynomial::from_univariate_coeffs(&[0.0, 1.0, -1.0]);
        assert_eq!(g.evaluate(&[0.5]).unwrap(), 0.25);
        let one: Polynomial<f64> = Polynomial::one(2);
        assert_eq!(one.evaluate(&[3.0, -7.0]).unwrap(), 1.0);
        let p: Polynomial<f64> = Polynomial::from_univariate_coeffs(&[1.0, 0.0, -1.0]);
        assert_eq!(p.evaluate(&[1.0]).unwrap(), 0.0);
        assert!(p.evaluate(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_polynomial_conventions() {
        let z: Polynomial<f64> = Polynomial::zero(2);
        assert!(z.is_zero());
        assert_eq!(z.degree(), 0);
        assert_eq!(z.num_terms(), 0);
        assert_eq!(Polynomial::constant(2, 0.0), z);
    }

    #[test]
    fn preordering_interval() {
        let set: SemialgebraicSet<f64> = SemialgebraicSet::interval(0.0, 1.0).unwrap();
        let terms = preordering(&set).unwrap();
        assert_eq!(terms.len(), 2);
        assert_eq!(terms[0].selector, vec![false]);
        assert_eq!(terms[0].product, Polynomial::one(1));
        assert_eq!(terms[0].halfdeg, 0);
        assert_eq!(terms[1].selector, vec![true]);
        assert_eq!(terms[1].halfdeg, 1);
        assert_eq!(terms[1].product.coefficient(&mi(&[1])), 1.0);
        assert_eq!(terms[1].product.coefficient(&mi(&[2])), -1.0);
    }

    #[test]
    fn preordering_empty_and_two_inequalities() {
        let trivial: SemialgebraicSet<f64> =
            SemialgebraicSet::new(1, vec![], vec![(0.0, 1.0)]).unwrap();
        let terms = preordering(&trivial).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].product, Polynomial::one(1));

        let x: Polynomial<f64> = Polynomial::variable(1, 0);
        let one_minus_x = Polynomial::one(1).add(&x.scale(&-1.0)).unwrap();
        let set = SemialgebraicSet::new(1, vec![x, one_minus_x], vec![(0.0, 1.0)]).unwrap();
        let terms = preordering(&set).unwrap();
        let halfdegs: Vec<u32> = terms.iter().map(|t| t.halfdeg).collect();
        assert_eq!(halfdegs, vec![0, 1, 1, 1]);
        let degs: Vec<u32> = terms.iter().map(|t| t.product.degree()).collect();
        assert_eq!(degs, vec![0, 1, 1, 2]);
    }

    #[test]
    fn preordering_degree_additivity() {
        let x: Polynomial<f64> = Polynomial::variable(2, 0);
        let y: Polynomial<f64> = Polynomial::variable(2, 1);
        let g1 = x.mul(&x).unwrap();
        let g2 = y.clone();
        let g3 = x.add(&y).unwrap();
        let set =
            SemialgebraicSet::new(2, vec![g1, g2, g3], vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        for term in preordering(&set).unwrap() {
            let expected: u32 = term
                .selector
                .iter()
                .zip(set.inequalities())
                .filter(|(&on, _)| on)
                .map(|(_, g)| g.degree())
                .sum();
            assert_eq!(term.product.degree(), expected);
            assert_eq!(term.halfdeg, expected.div_ceil(2));
        }
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert!(SemialgebraicSet::<f64>::interval(1.0, 1.0).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_poly(nvars: usize) -> impl Strategy<Value = Polynomial<f64>> {
            let term = (
                proptest::collection::vec(0u32..4, nvars),
                -2.0f64..2.0,
            );
            proptest::collection::vec(term, 0..6).prop_map(move |terms| {
                Polynomial::from_terms(
                    nvars,
                    terms
                        .into_iter()
                        .map(|(exps, coef)| (MultiIndex::new(exps), coef)),
                )
            })
        }

        proptest! {
            // product evaluation is multiplicative at points of [-1, 1]^n
            #[test]
            fn mul_agrees_with_evaluation(
                (p, q, point) in (1usize..=3).prop_flat_map(|n| {
                    (arb_poly(n), arb_poly(n), proptest::collection::vec(-1.0f64..1.0, n))
                })
            ) {
                let product = p.mul(&q).unwrap();
                let lhs = product.evaluate(&point).unwrap();
                let rhs = p.evaluate(&point).unwrap() * q.evaluate(&point).unwrap();
                let mass: f64 = p.terms().map(|(_, c)| c.abs()).sum::<f64>()
                    * q.terms().map(|(_, c)| c.abs()).sum::<f64>();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + mass));
            }

            #[test]
            fn add_agrees_with_evaluation(
                (p, q, point) in (1usize..=3).prop_flat_map(|n| {
                    (arb_poly(n), arb_poly(n), proptest::collection::vec(-1.0f64..1.0, n))
                })
            ) {
                let sum = p.add(&q).unwrap();
                let lhs = sum.evaluate(&point).unwrap();
                let rhs = p.evaluate(&point).unwrap() + q.evaluate(&point).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs() + rhs.abs()));
            }

            // no operation may ever leave an explicit zero coefficient behind
            #[test]
            fn no_stored_zero_coefficients(
                (p, q) in (1usize..=3).prop_flat_map(|n| (arb_poly(n), arb_poly(n)))
            ) {
                for poly in [p.mul(&q).unwrap(), p.add(&q).unwrap()] {
                    prop_assert!(poly.terms().all(|(_, c)| *c != 0.0));
                }
            }

            #[test]
            fn rank_is_enumeration_position(
                exps in proptest::collection::vec(0u32..5, 1..=4)
            ) {
                let idx = MultiIndex::new(exps);
                let list = enumerate_indices(idx.nvars(), idx.degree());
                prop_assert_eq!(&list[index_rank(&idx)], &idx);
            }
        }
    }
}
