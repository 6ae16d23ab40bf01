//! Analytic moment generation.
//!
//! All moments are taken against the Lebesgue measure of the reference box
//! **scaled to a probability measure**: the all-ones density integrates to 1
//! and the zero-order moment of every generated vector is 1. Densities are
//! relative to this scaled measure, which changes the raw moments by the box
//! volume; every formula below already includes that factor.

use crate::polybasis::{enumerate_indices, MultiIndex, Polynomial};
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("interval {index} is degenerate: [{lo}, {hi}]")]
    DegenerateInterval { index: usize, lo: String, hi: String },
    #[error("atom {index} has location of length {got}, expected {expected}")]
    AtomDimension { index: usize, got: usize, expected: usize },
    #[error("atom {index} lies outside the box in coordinate {coordinate}")]
    AtomOutsideBox { index: usize, coordinate: usize },
    #[error("atom {index} has negative weight {weight}")]
    NegativeAtomWeight { index: usize, weight: String },
    #[error("box weight a = {a} is outside [0, 1]")]
    BoxWeightRange { a: String },
    #[error("atom weights sum to {sum}, expected 1")]
    AtomWeightSum { sum: String },
    #[error("moment vector of {nvars} variables is missing key {key:?}")]
    MissingKey { nvars: usize, key: MultiIndex },
    #[error("key {key:?} has degree above max_order {max_order}")]
    KeyAboveOrder { key: MultiIndex, max_order: u32 },
    #[error("density has {got} variables, expected {expected}")]
    DensityNvars { got: usize, expected: usize },
}

/// Truncated moment sequence: one value per multi-index of degree up to
/// `max_order`, total on that range.
///
/// `probability` records that the vector is meant to represent a probability
/// measure, in which case the zero-index entry is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector<T> {
    nvars: usize,
    max_order: u32,
    entries: BTreeMap<MultiIndex, T>,
    probability: bool,
}

/// Moment sequence over `(x, t)`; the last variable plays the role of the
/// density axis.
pub type JointMomentVector<T> = MomentVector<T>;

impl<T: Scalar> MomentVector<T> {
    /// Validates completeness: every index of degree `<= max_order` present.
    pub fn new(
        nvars: usize,
        max_order: u32,
        entries: BTreeMap<MultiIndex, T>,
        probability: bool,
    ) -> Result<Self, MeasureError> {
        for key in entries.keys() {
            if key.degree() > max_order {
                return Err(MeasureError::KeyAboveOrder {
                    key: key.clone(),
                    max_order,
                });
            }
        }
        for idx in enumerate_indices(nvars, max_order) {
            if !entries.contains_key(&idx) {
                return Err(MeasureError::MissingKey { nvars, key: idx });
            }
        }
        Ok(MomentVector {
            nvars,
            max_order,
            entries,
            probability,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn is_probability(&self) -> bool {
        self.probability
    }

    pub fn get(&self, idx: &MultiIndex) -> Option<&T> {
        self.entries.get(idx)
    }

    pub fn entries(&self) -> &BTreeMap<MultiIndex, T> {
        &self.entries
    }

    /// Univariate convenience accessor: the moment of `x^k`.
    pub fn univariate(&self, k: u32) -> Option<&T> {
        if self.nvars != 1 {
            return None;
        }
        self.entries.get(&MultiIndex::new(vec![k]))
    }
}

/// Convex mixture `a · (scaled Lebesgue on the box) + (1 - a) · Σ w_i δ_{s_i}`.
#[derive(Clone, Debug)]
pub struct MixtureScenario<T> {
    pub box_weight: T,
    pub atoms: Vec<Atom<T>>,
}

#[derive(Clone, Debug)]
pub struct Atom<T> {
    pub location: Vec<T>,
    pub weight: T,
}

impl<T: Scalar> MixtureScenario<T> {
    /// Pure scaled-Lebesgue scenario (`a = 1`).
    pub fn lebesgue() -> Self {
        MixtureScenario {
            box_weight: T::one(),
            atoms: vec![],
        }
    }

    /// Single atom at `s` with total atom weight `1 - a`.
    pub fn single_atom(a: T, location: Vec<T>) -> Self {
        MixtureScenario {
            box_weight: a,
            atoms: vec![Atom {
                location,
                weight: T::one(),
            }],
        }
    }

    /// Atom locations may sit on the box boundary.
    pub fn validate(&self, bounds: &[(T, T)]) -> Result<(), MeasureError> {
        let a = &self.box_weight;
        if *a < T::zero() || *a > T::one() {
            return Err(MeasureError::BoxWeightRange {
                a: format!("{}", a),
            });
        }
        for (i, atom) in self.atoms.iter().enumerate() {
            if atom.location.len() != bounds.len() {
                return Err(MeasureError::AtomDimension {
                    index: i,
                    got: atom.location.len(),
                    expected: bounds.len(),
                });
            }
            if atom.weight < T::zero() {
                return Err(MeasureError::NegativeAtomWeight {
                    index: i,
                    weight: format!("{}", atom.weight),
                });
            }
            for (c, (x, (lo, hi))) in atom.location.iter().zip(bounds).enumerate() {
                if x < lo || x > hi {
                    return Err(MeasureError::AtomOutsideBox {
                        index: i,
                        coordinate: c,
                    });
                }
            }
        }
        if !self.atoms.is_empty() {
            let sum = self
                .atoms
                .iter()
                .fold(T::zero(), |acc, atom| acc + atom.weight.clone());
            let tol = T::from_ratio(1, 1_000_000_000);
            if (sum.clone() - T::one()).abs() > tol {
                return Err(MeasureError::AtomWeightSum {
                    sum: format!("{}", sum),
                });
            }
        } else if self.box_weight != T::one() {
            return Err(MeasureError::AtomWeightSum {
                sum: "0".to_string(),
            });
        }
        Ok(())
    }
}

fn check_bounds<T: Scalar>(bounds: &[(T, T)]) -> Result<(), MeasureError> {
    for (i, (lo, hi)) in bounds.iter().enumerate() {
        if !(lo < hi) {
            return Err(MeasureError::DegenerateInterval {
                index: i,
                lo: format!("{}", lo),
                hi: format!("{}", hi),
            });
        }
    }
    Ok(())
}

/// Moment of `x^e` under the uniform probability measure on `[lo, hi]`:
/// `(hi^{e+1} - lo^{e+1}) / ((e + 1)(hi - lo))`.
fn interval_moment<T: Scalar>(lo: &T, hi: &T, e: u32) -> T {
    let p = e + 1;
    (hi.powu(p) - lo.powu(p)) / (T::from_int(i64::from(p)) * (hi.clone() - lo.clone()))
}

/// Moments `γ_α` of the box-uniform probability measure, complete up to
/// `max_order`.
pub fn box_lebesgue_moments<T: Scalar>(
    bounds: &[(T, T)],
    max_order: u32,
) -> Result<MomentVector<T>, MeasureError> {
    check_bounds(bounds)?;
    let nvars = bounds.len();
    let mut entries = BTreeMap::new();
    for idx in enumerate_indices(nvars, max_order) {
        let mut v = T::one();
        for ((lo, hi), &e) in bounds.iter().zip(idx.exponents()) {
            if e > 0 {
                v = v * interval_moment(lo, hi, e);
            }
        }
        entries.insert(idx, v);
    }
    MomentVector::new(nvars, max_order, entries, true)
}

/// Moments `y_α = a γ_α + (1 - a) Σ w_i s_i^α` of a Dirac mixture.
pub fn mixture_moments<T: Scalar>(
    scenario: &MixtureScenario<T>,
    bounds: &[(T, T)],
    max_order: u32,
) -> Result<MomentVector<T>, MeasureError> {
    check_bounds(bounds)?;
    scenario.validate(bounds)?;
    let gamma = box_lebesgue_moments(bounds, max_order)?;
    let a = scenario.box_weight.clone();
    let atom_mass = T::one() - a.clone();
    let mut entries = BTreeMap::new();
    for (idx, g) in gamma.entries() {
        let mut v = a.clone() * g.clone();
        for atom in &scenario.atoms {
            let mut mono = atom.weight.clone();
            for (x, &e) in atom.location.iter().zip(idx.exponents()) {
                if e > 0 {
                    mono = mono * x.powu(e);
                }
            }
            v = v + atom_mass.clone() * mono;
        }
        entries.insert(idx.clone(), v);
    }
    MomentVector::new(bounds.len(), max_order, entries, true)
}

/// Moments of the measure `f · dλ` (the `x`-marginal weighted by a
/// polynomial density), exact monomial integration.
pub fn density_moments<T: Scalar>(
    density: &Polynomial<T>,
    bounds: &[(T, T)],
    max_order: u32,
) -> Result<MomentVector<T>, MeasureError> {
    check_bounds(bounds)?;
    let nvars = bounds.len();
    if density.nvars() != nvars {
        return Err(MeasureError::DensityNvars {
            got: density.nvars(),
            expected: nvars,
        });
    }
    let gamma = box_lebesgue_moments(bounds, max_order + density.degree())?;
    let mut entries = BTreeMap::new();
    for idx in enumerate_indices(nvars, max_order) {
        let mut v = T::zero();
        for (term, coef) in density.terms() {
            v = v + coef.clone() * gamma.get(&idx.plus(term)).unwrap().clone();
        }
        entries.insert(idx, v);
    }
    let probability = entries
        .get(&MultiIndex::zeros(nvars))
        .map(|v| (v.clone() - T::one()).abs() <= T::from_ratio(1, 1_000_000_000))
        .unwrap_or(false);
    MomentVector::new(nvars, max_order, entries, probability)
}

/// Joint witness moments `z_{αk} = ∫ x^α f(x)^k dλ` of a polynomial density,
/// over `n + 1` variables with the last slot holding the power `k`.
///
/// This is the analytic feasible point used to validate assembled problems:
/// its restriction to `k = 0` is the Lebesgue vector and to `k = 1` the
/// moments of `f · dλ`.
pub fn witness_joint_moments<T: Scalar>(
    density: &Polynomial<T>,
    bounds: &[(T, T)],
    max_order: u32,
) -> Result<JointMomentVector<T>, MeasureError> {
    check_bounds(bounds)?;
    let nvars = bounds.len();
    if density.nvars() != nvars {
        return Err(MeasureError::DensityNvars {
            got: density.nvars(),
            expected: nvars,
        });
    }
    // powers f^0 .. f^max_order, expanded exactly
    let mut powers = Vec::with_capacity(max_order as usize + 1);
    powers.push(Polynomial::one(nvars));
    for k in 1..=max_order {
        let next = powers[(k - 1) as usize].mul(density).expect("same nvars");
        powers.push(next);
    }
    let needed = max_order + max_order * density.degree();
    let gamma = box_lebesgue_moments(bounds, needed)?;
    let mut entries = BTreeMap::new();
    for joint in enumerate_indices(nvars + 1, max_order) {
        let k = joint.exponents()[nvars];
        let alpha = MultiIndex::new(joint.exponents()[..nvars].to_vec());
        let mut v = T::zero();
        for (term, coef) in powers[k as usize].terms() {
            v = v + coef.clone() * gamma.get(&alpha.plus(term)).unwrap().clone();
        }
        entries.insert(joint, v);
    }
    MomentVector::new(nvars + 1, max_order, entries, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use crate::scalar::Scalar;

    fn unit_box() -> Vec<(f64, f64)> {
        vec![(0.0, 1.0)]
    }

    fn mi(exps: &[u32]) -> MultiIndex {
        MultiIndex::new(exps.to_vec())
    }

    #[test]
    fn unit_interval_moments() {
        let gamma = box_lebesgue_moments(&unit_box(), 6).unwrap();
        for k in 0..=6u32 {
            let got = *gamma.univariate(k).unwrap();
            assert!((got - 1.0 / f64::from(k + 1)).abs() < 1e-15, "k={k}");
        }
        assert!(gamma.is_probability());
    }

    #[test]
    fn stretched_interval_mean() {
        let gamma = box_lebesgue_moments(&[(0.0, 2.0)], 2).unwrap();
        assert_eq!(*gamma.univariate(1).unwrap(), 1.0);
    }

    #[test]
    fn product_box_moment() {
        let gamma = box_lebesgue_moments(&[(0.0, 1.0), (0.0, 1.0)], 3).unwrap();
        let got: f64 = *gamma.get(&mi(&[1, 2])).unwrap();
        assert!((got - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert!(box_lebesgue_moments(&[(1.0, 1.0)], 2).is_err());
    }

    #[test]
    fn exact_rational_moments() {
        let bounds = vec![(BigRational::from_int(0), BigRational::from_int(1))];
        let gamma = box_lebesgue_moments(&bounds, 8).unwrap();
        for k in 0..=8u32 {
            assert_eq!(
                *gamma.univariate(k).unwrap(),
                BigRational::from_ratio(1, i64::from(k) + 1)
            );
        }
    }

    #[test]
    fn mixture_single_atom_formula() {
        // y_1 = 0.5/2 + 0.5*0.5 = 0.5
        let sc = MixtureScenario::single_atom(0.5, vec![0.5]);
        let y = mixture_moments(&sc, &unit_box(), 4).unwrap();
        assert!((y.univariate(1).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(*y.univariate(0).unwrap(), 1.0);
    }

    #[test]
    fn mixture_pure_lebesgue_matches_gamma() {
        let sc: MixtureScenario<f64> = MixtureScenario::lebesgue();
        let y = mixture_moments(&sc, &unit_box(), 8).unwrap();
        let gamma = box_lebesgue_moments(&unit_box(), 8).unwrap();
        assert_eq!(y.entries(), gamma.entries());
    }

    #[test]
    fn mixture_two_atoms() {
        let sc = MixtureScenario {
            box_weight: 0.5,
            atoms: vec![
                Atom { location: vec![0.5], weight: 0.5 },
                Atom { location: vec![0.6], weight: 0.5 },
            ],
        };
        let y = mixture_moments(&sc, &unit_box(), 4).unwrap();
        let got = *y.univariate(1).unwrap();
        assert!((got - 0.525).abs() < 1e-15);
    }

    #[test]
    fn atoms_on_boundary_allowed() {
        let sc = MixtureScenario::single_atom(0.5, vec![1.0]);
        assert!(mixture_moments(&sc, &unit_box(), 4).is_ok());
        let sc = MixtureScenario::single_atom(0.5, vec![0.0]);
        assert!(mixture_moments(&sc, &unit_box(), 4).is_ok());
    }

    #[test]
    fn scenario_validation_errors() {
        let sc = MixtureScenario::single_atom(0.5, vec![1.5]);
        assert!(matches!(
            mixture_moments(&sc, &unit_box(), 2),
            Err(MeasureError::AtomOutsideBox { .. })
        ));
        let sc = MixtureScenario {
            box_weight: 0.5,
            atoms: vec![Atom { location: vec![0.5], weight: 0.7 }],
        };
        assert!(matches!(
            mixture_moments(&sc, &unit_box(), 2),
            Err(MeasureError::AtomWeightSum { .. })
        ));
    }

    #[test]
    fn witness_constant_density() {
        let f = Polynomial::one(1);
        let z = witness_joint_moments(&f, &unit_box(), 6).unwrap();
        for joint in enumerate_indices(2, 6) {
            let alpha = joint.exponents()[0];
            let got = *z.get(&joint).unwrap();
            assert!((got - 1.0 / f64::from(alpha + 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn witness_linear_density_values() {
        // f(x) = 2x on [0,1]
        let f = Polynomial::from_univariate_coeffs(&[0.0, 2.0]);
        let z = witness_joint_moments(&f, &unit_box(), 6).unwrap();
        // z_{0,1} = ∫ 2x dx = 1 (f is a probability density)
        assert!((z.get(&mi(&[0, 1])).unwrap() - 1.0).abs() < 1e-15);
        // z_{1,2} = ∫ x · 4x^2 dx = 1
        assert!((z.get(&mi(&[1, 2])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(*z.get(&mi(&[0, 0])).unwrap(), 1.0);
    }

    #[test]
    fn witness_slices_match_named_generators() {
        let f = Polynomial::from_univariate_coeffs(&[0.0, 0.0, 3.0]);
        let z = witness_joint_moments(&f, &unit_box(), 5).unwrap();
        let gamma = box_lebesgue_moments(&unit_box(), 5).unwrap();
        let fdl = density_moments(&f, &unit_box(), 4).unwrap();
        for (idx, v) in z.entries() {
            let (alpha, k) = (idx.exponents()[0], idx.exponents()[1]);
            if k == 0 {
                assert_eq!(v, gamma.univariate(alpha).unwrap());
            } else if k == 1 {
                let want = fdl.univariate(alpha).unwrap();
                assert!((v - want).abs() < 1e-14);
            }
        }
    }

    /// Composite Simpson quadrature, the independent oracle for the k = 1
    /// slice of the witness moments.
    fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
        let h = (hi - lo) / panels as f64;
        let mut acc = f(lo) + f(hi);
        for i in 1..panels {
            let x = lo + h * i as f64;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * h / 3.0
    }

    #[test]
    fn mixture_moment_matrix_is_psd() {
        // mixtures are genuine measures, so their moment matrices must be
        // PSD no matter where the atoms sit
        use crate::momentmatrix::LinearMatrixMap;
        for (a, atoms) in [
            (0.5, vec![0.5]),
            (0.2, vec![0.0, 1.0]),
            (0.9, vec![0.3]),
            (0.0, vec![0.7]),
        ] {
            let n = atoms.len();
            let weight = 1.0 / n as f64;
            let sc = MixtureScenario {
                box_weight: a,
                atoms: atoms
                    .into_iter()
                    .map(|s| Atom { location: vec![s], weight })
                    .collect(),
            };
            let y = mixture_moments(&sc, &unit_box(), 8).unwrap();
            let m = LinearMatrixMap::<f64>::moment(1, 4)
                .instantiate(y.entries())
                .unwrap();
            assert!(m.min_eigenvalue() >= -1e-10, "a={a}");
        }
    }

    #[test]
    fn witness_k1_matches_quadrature() {
        let f = Polynomial::from_univariate_coeffs(&[0.25, 1.0, 0.75, 0.0, -0.3]);
        let z = witness_joint_moments(&f, &unit_box(), 4).unwrap();
        for alpha in 0..=3u32 {
            let got = *z.get(&mi(&[alpha, 1])).unwrap();
            let want = simpson(
                |x| x.powi(alpha as i32) * f.evaluate(&[x]).unwrap(),
                0.0,
                1.0,
                2000,
            );
            assert!((got - want).abs() < 1e-10, "alpha={alpha}: {got} vs {want}");
        }
    }
}
