//! Moment and localizing matrices as structural linear maps.
//!
//! A [`LinearMatrixMap`] records, for each moment key, the matrix positions
//! (upper triangle) and coefficients that the corresponding moment feeds
//! into. Instantiation against a moment table materializes the dense
//! symmetric matrix. The map for the unit polynomial is the plain moment
//! matrix; a general polynomial `g` gives the localizing matrix, whose
//! position `(i, j)` collects `g_γ · z_{idx_i + idx_j + γ}`.

use crate::linalg::SymMat;
use crate::polybasis::{basis_size, enumerate_indices, MultiIndex, Polynomial};
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MomentMatrixError {
    #[error("moment data is missing key {key:?}")]
    MissingKey { key: MultiIndex },
}

/// Structural map from moment keys to symmetric-matrix positions.
#[derive(Clone, Debug)]
pub struct LinearMatrixMap<T> {
    nvars: usize,
    order: u32,
    size: usize,
    shift_degree: u32,
    basis: Vec<MultiIndex>,
    entries: BTreeMap<MultiIndex, Vec<(usize, usize, T)>>,
}

impl<T: Scalar> LinearMatrixMap<T> {
    /// The moment matrix map of order `d`: position `(i, j)` keyed by
    /// `idx_i + idx_j` with coefficient 1.
    pub fn moment(nvars: usize, d: u32) -> Self {
        Self::localizing(&Polynomial::one(nvars), d)
    }

    /// The localizing matrix map of `g` at order `d`.
    pub fn localizing(g: &Polynomial<T>, d: u32) -> Self {
        let nvars = g.nvars();
        let basis = enumerate_indices(nvars, d);
        let size = basis.len();
        debug_assert_eq!(size, basis_size(nvars, d));
        let mut entries: BTreeMap<MultiIndex, Vec<(usize, usize, T)>> = BTreeMap::new();
        for i in 0..size {
            for j in i..size {
                let pair = basis[i].plus(&basis[j]);
                for (gamma, coef) in g.terms() {
                    entries
                        .entry(pair.plus(gamma))
                        .or_default()
                        .push((i, j, coef.clone()));
                }
            }
        }
        LinearMatrixMap {
            nvars,
            order: d,
            size,
            shift_degree: 2 * d + g.degree(),
            basis,
            entries,
        }
    }

    /// Map with explicitly given entries, for affine PSD blocks that are not
    /// moment or localizing matrices (e.g. Gram blocks after a change of
    /// variables). `key_len` is the uniform length of the entry keys.
    pub fn from_entries(
        key_len: usize,
        size: usize,
        entries: BTreeMap<MultiIndex, Vec<(usize, usize, T)>>,
    ) -> Self {
        let shift_degree = entries.keys().map(MultiIndex::degree).max().unwrap_or(0);
        LinearMatrixMap {
            nvars: key_len,
            order: 0,
            size,
            shift_degree,
            basis: vec![],
            entries,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Max total degree of any referenced key.
    pub fn shift_degree(&self) -> u32 {
        self.shift_degree
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn keys(&self) -> impl Iterator<Item = &MultiIndex> {
        self.entries.keys()
    }

    pub fn positions(&self, key: &MultiIndex) -> Option<&[(usize, usize, T)]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    /// Dense symmetric matrix `Σ_key z_key · (coefficient matrix of key)`.
    pub fn instantiate(
        &self,
        moments: &BTreeMap<MultiIndex, T>,
    ) -> Result<SymMat<T>, MomentMatrixError> {
        let mut out = SymMat::zeros(self.size);
        for (key, positions) in &self.entries {
            let z = moments
                .get(key)
                .ok_or_else(|| MomentMatrixError::MissingKey { key: key.clone() })?;
            for (r, c, coef) in positions {
                out.add_sym(*r, *c, z.clone() * coef.clone());
            }
        }
        Ok(out)
    }

    /// Materialized coefficient matrix of a single key (a derived view used
    /// by the reconstruction tests, not a stored artifact).
    pub fn coefficient_matrix(&self, key: &MultiIndex) -> SymMat<T> {
        let mut out = SymMat::zeros(self.size);
        if let Some(positions) = self.entries.get(key) {
            for (r, c, coef) in positions {
                out.add_sym(*r, *c, coef.clone());
            }
        }
        out
    }

    /// Stable JSON rendering for golden-file tests.
    pub fn to_debug_json(&self) -> serde_json::Value {
        use serde_json::json;
        let entries: Vec<_> = self
            .entries
            .iter()
            .map(|(key, positions)| {
                json!({
                    "key": key.exponents(),
                    "positions": positions
                        .iter()
                        .map(|(r, c, coef)| json!([r, c, format!("{}", coef)]))
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "nvars": self.nvars,
            "order": self.order,
            "size": self.size,
            "shift_degree": self.shift_degree,
            "entries": entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{box_lebesgue_moments, witness_joint_moments};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn mi(exps: &[u32]) -> MultiIndex {
        MultiIndex::new(exps.to_vec())
    }

    fn interval_g() -> Polynomial<f64> {
        // x(1 - x) on [0, 1]
        Polynomial::from_univariate_coeffs(&[0.0, 1.0, -1.0])
    }

    fn uniform_moments(order: u32) -> BTreeMap<MultiIndex, f64> {
        box_lebesgue_moments(&[(0.0, 1.0)], order)
            .unwrap()
            .entries()
            .clone()
    }

    #[test]
    fn hankel_of_uniform() {
        let map = LinearMatrixMap::<f64>::moment(1, 1);
        let m = map.instantiate(&uniform_moments(2)).unwrap();
        assert_eq!(m.size(), 2);
        assert_eq!(*m.get(0, 0), 1.0);
        assert_eq!(*m.get(0, 1), 0.5);
        assert_eq!(*m.get(1, 0), 0.5);
        assert!((m.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_map_two_vars() {
        let map = LinearMatrixMap::<f64>::moment(2, 0);
        assert_eq!(map.size(), 1);
        let keys: Vec<_> = map.keys().collect();
        assert_eq!(keys, vec![&mi(&[0, 0])]);
    }

    #[test]
    fn key_positions_order_two() {
        let map = LinearMatrixMap::<f64>::moment(2, 2);
        assert_eq!(map.size(), 6);
        // basis ranks: (2,0) -> 3, (1,1) -> 4, (0,2) -> 5
        let mut positions: Vec<(usize, usize)> = map
            .positions(&mi(&[2, 2]))
            .unwrap()
            .iter()
            .map(|&(r, c, _)| (r, c))
            .collect();
        positions.sort_unstable();
        assert_eq!(positions, vec![(3, 5), (4, 4)]);
    }

    #[test]
    fn every_position_covered_once_with_unit_coefficient() {
        let map = LinearMatrixMap::<f64>::moment(2, 2);
        let mut seen = BTreeMap::new();
        for key in map.keys() {
            for &(r, c, coef) in map.positions(key).unwrap() {
                assert_eq!(coef, 1.0);
                assert!(r <= c);
                assert!(seen.insert((r, c), key.clone()).is_none());
            }
        }
        assert_eq!(seen.len(), 6 * 7 / 2);
    }

    #[test]
    fn localizing_coefficients_match_g() {
        let g = interval_g();
        let map = LinearMatrixMap::localizing(&g, 1);
        // position (0, 0): keys (1) with +1 and (2) with -1
        let mut by_key: Vec<(MultiIndex, f64)> = vec![];
        for key in map.keys() {
            for &(r, c, coef) in map.positions(key).unwrap() {
                if (r, c) == (0, 0) {
                    by_key.push((key.clone(), coef));
                }
            }
        }
        assert_eq!(by_key, vec![(mi(&[1]), 1.0), (mi(&[2]), -1.0)]);
    }

    #[test]
    fn localizing_interval_scalar() {
        let map = LinearMatrixMap::localizing(&interval_g(), 0);
        let m = map.instantiate(&uniform_moments(2)).unwrap();
        assert_eq!(m.size(), 1);
        assert!((m.get(0, 0) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(map.shift_degree(), 2);
    }

    #[test]
    fn localizing_with_unit_polynomial_is_moment_map() {
        let one = Polynomial::one(2);
        let a = LinearMatrixMap::localizing(&one, 2);
        let b = LinearMatrixMap::<f64>::moment(2, 2);
        let z: BTreeMap<MultiIndex, f64> = enumerate_indices(2, 4)
            .into_iter()
            .enumerate()
            .map(|(i, idx)| (idx, 1.0 + i as f64))
            .collect();
        assert_eq!(a.instantiate(&z).unwrap(), b.instantiate(&z).unwrap());
    }

    #[test]
    fn localizing_vanishes_on_atom_at_root() {
        // moments of the Dirac at x = 0: z_k = 0^k
        let z: BTreeMap<MultiIndex, f64> = (0..=4u32)
            .map(|k| (mi(&[k]), if k == 0 { 1.0 } else { 0.0 }))
            .collect();
        let map = LinearMatrixMap::localizing(&interval_g(), 1);
        let m = map.instantiate(&z).unwrap();
        for r in 0..m.size() {
            for c in 0..m.size() {
                assert_eq!(*m.get(r, c), 0.0);
            }
        }
    }

    #[test]
    fn missing_key_is_reported() {
        let map = LinearMatrixMap::<f64>::moment(1, 1);
        let mut z = uniform_moments(2);
        z.remove(&mi(&[2]));
        match map.instantiate(&z) {
            Err(MomentMatrixError::MissingKey { key }) => assert_eq!(key, mi(&[2])),
            other => panic!("expected missing-key error, got {other:?}"),
        }
    }

    #[test]
    fn zero_moments_give_zero_matrix() {
        let map = LinearMatrixMap::<f64>::moment(2, 1);
        let z: BTreeMap<MultiIndex, f64> = enumerate_indices(2, 2)
            .into_iter()
            .map(|idx| (idx, 0.0))
            .collect();
        let m = map.instantiate(&z).unwrap();
        assert_eq!(m, SymMat::zeros(3));
    }

    fn monomial_value(point: &[f64], idx: &MultiIndex) -> f64 {
        point
            .iter()
            .zip(idx.exponents())
            .map(|(x, &e)| x.powi(e as i32))
            .product()
    }

    /// Σ_α point^α · B_α must reproduce v_d(point) v_d(point)^T, and the
    /// localizing variant picks up the factor g(point).
    #[test]
    fn reconstruction_identities_at_random_points() {
        let mut rng = StdRng::seed_from_u64(42);
        for nvars in 1..=3usize {
            for d in 1..=3u32 {
                let g = if nvars == 1 {
                    interval_g()
                } else {
                    // 1 - Σ x_i^2, lifted to the right arity
                    let mut p = Polynomial::one(nvars);
                    for i in 0..nvars {
                        let xi = Polynomial::variable(nvars, i);
                        p = p.add(&xi.mul(&xi).unwrap().scale(&-1.0)).unwrap();
                    }
                    p
                };
                let moment = LinearMatrixMap::<f64>::moment(nvars, d);
                let local = LinearMatrixMap::localizing(&g, d);
                for _ in 0..20 {
                    let point: Vec<f64> = (0..nvars).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let v: Vec<f64> = moment
                        .basis()
                        .iter()
                        .map(|idx| monomial_value(&point, idx))
                        .collect();
                    let gval = g.evaluate(&point).unwrap();
                    let mut recon_b = SymMat::zeros(moment.size());
                    for key in moment.keys() {
                        let mut b = moment.coefficient_matrix(key);
                        b.scale_in_place(&monomial_value(&point, key));
                        recon_b.add_assign(&b);
                    }
                    let mut recon_c = SymMat::zeros(local.size());
                    for key in local.keys() {
                        let mut c = local.coefficient_matrix(key);
                        c.scale_in_place(&monomial_value(&point, key));
                        recon_c.add_assign(&c);
                    }
                    for i in 0..moment.size() {
                        for j in 0..moment.size() {
                            let want_b = v[i] * v[j];
                            let want_c = gval * v[i] * v[j];
                            let scale_b = want_b.abs().max(1.0);
                            let scale_c = want_c.abs().max(1.0);
                            assert!(
                                (recon_b.get(i, j) - want_b).abs() <= 1e-10 * scale_b,
                                "B: nvars={nvars} d={d} ({i},{j})"
                            );
                            assert!(
                                (recon_c.get(i, j) - want_c).abs() <= 1e-10 * scale_c,
                                "C: nvars={nvars} d={d} ({i},{j})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn atomic_measure_moment_matrix_is_psd() {
        let mut rng = StdRng::seed_from_u64(7);
        for trial in 0..10 {
            let nvars = 2;
            let atoms: Vec<(Vec<f64>, f64)> = (0..3)
                .map(|_| {
                    (
                        (0..nvars).map(|_| rng.random_range(-1.0..1.0)).collect(),
                        rng.random_range(0.1..1.0),
                    )
                })
                .collect();
            let z: BTreeMap<MultiIndex, f64> = enumerate_indices(nvars, 6)
                .into_iter()
                .map(|idx| {
                    let v = atoms
                        .iter()
                        .map(|(p, w)| w * monomial_value(p, &idx))
                        .sum();
                    (idx, v)
                })
                .collect();
            let m = LinearMatrixMap::<f64>::moment(nvars, 3)
                .instantiate(&z)
                .unwrap();
            assert!(m.min_eigenvalue() >= -1e-10, "trial {trial}");
        }
    }

    #[test]
    fn localizing_psd_where_g_nonnegative() {
        let mut rng = StdRng::seed_from_u64(11);
        let g = interval_g();
        // atoms inside [0,1], where g >= 0
        let atoms: Vec<(f64, f64)> = (0..4)
            .map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.1..1.0)))
            .collect();
        let z: BTreeMap<MultiIndex, f64> = (0..=8u32)
            .map(|k| {
                let v = atoms.iter().map(|&(s, w)| w * s.powi(k as i32)).sum();
                (mi(&[k]), v)
            })
            .collect();
        let m = LinearMatrixMap::localizing(&g, 3).instantiate(&z).unwrap();
        assert!(m.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn hankel_structure_exact_equality() {
        let f = Polynomial::from_univariate_coeffs(&[0.3, 0.9, -0.2]);
        let z = witness_joint_moments(&f, &[(0.0, 1.0)], 6).unwrap();
        let map = LinearMatrixMap::<f64>::moment(2, 3);
        let m = map.instantiate(z.entries()).unwrap();
        let basis = map.basis();
        for i in 0..map.size() {
            for j in 0..map.size() {
                for p in 0..map.size() {
                    for q in 0..map.size() {
                        if basis[i].plus(&basis[j]) == basis[p].plus(&basis[q]) {
                            assert_eq!(m.get(i, j), m.get(p, q), "({i},{j}) vs ({p},{q})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn debug_json_golden() {
        let map = LinearMatrixMap::<f64>::moment(1, 1);
        let got = map.to_debug_json();
        let want: serde_json::Value = serde_json::json!({
            "nvars": 1,
            "order": 1,
            "size": 2,
            "shift_degree": 2,
            "entries": [
                { "key": [0], "positions": [[0, 0, "1"]] },
                { "key": [1], "positions": [[0, 1, "1"]] },
                { "key": [2], "positions": [[1, 1, "1"]] },
            ],
        });
        assert_eq!(got, want);
    }
}
