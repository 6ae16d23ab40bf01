//! Dense semidefinite programming tailored to moment problems.
//!
//! A problem is a linear objective over scalar variables keyed by
//! [`MultiIndex`], a set of fixed-value keys substituted at assembly time
//! (equalities hold by construction, they are never solved for), PSD block
//! constraints given by [`LinearMatrixMap`]s, and optional scalar upper
//! bounds lowered to 1x1 blocks.
//!
//! Feasibility is decided by an explicit phase-1 margin program
//! `min t  s.t.  Block_b(z) + t I >= 0 for all b`, which is always strictly
//! feasible; its optimum is the distance to PSD-feasibility. A margin above
//! `infeas_threshold` certifies infeasibility. On the feasible side the
//! verdict is based on the block residuals at the margin minimizer: genuine
//! moment matrices sit so close to the PSD boundary (least eigenvalues decay
//! like the conditioning of the monomial basis) that a strict interior
//! margin is unobservable at any fixed tolerance, while residuals within
//! `feas_tol` are stable to certify.

mod certificate;
mod solver;

pub use certificate::{
    extract_infeasibility_duals, verify_infeasibility, CertificateError,
};
pub use solver::{phase1, solve, solve_with_stats, Phase1Outcome, SolveStats};

use crate::linalg::SymMat;
use crate::momentmatrix::LinearMatrixMap;
use crate::polybasis::MultiIndex;
use crate::scalar::{Real, Scalar};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SdpError {
    #[error("key {key:?} is declared both variable and fixed")]
    VariableFixedOverlap { key: MultiIndex },
    #[error("key {key:?} referenced by {site} is neither a variable nor fixed")]
    UnboundKey { key: MultiIndex, site: &'static str },
    #[error("assignment is missing variable {key:?}")]
    MissingAssignment { key: MultiIndex },
    #[error("problem has no blocks")]
    NoBlocks,
}

/// Immutable SDP instance over moment-style keys.
#[derive(Clone, Debug)]
pub struct SdpProblem<T> {
    variables: Vec<MultiIndex>,
    fixed: BTreeMap<MultiIndex, T>,
    blocks: Vec<LinearMatrixMap<T>>,
    objective: BTreeMap<MultiIndex, T>,
    upper_bounds: BTreeMap<MultiIndex, T>,
}

impl<T: Scalar> SdpProblem<T> {
    pub fn new(
        variables: Vec<MultiIndex>,
        fixed: BTreeMap<MultiIndex, T>,
        blocks: Vec<LinearMatrixMap<T>>,
        objective: BTreeMap<MultiIndex, T>,
        upper_bounds: BTreeMap<MultiIndex, T>,
    ) -> Result<Self, SdpError> {
        if blocks.is_empty() {
            return Err(SdpError::NoBlocks);
        }
        let var_set: std::collections::BTreeSet<&MultiIndex> = variables.iter().collect();
        for key in fixed.keys() {
            if var_set.contains(key) {
                return Err(SdpError::VariableFixedOverlap { key: key.clone() });
            }
        }
        let known = |key: &MultiIndex| var_set.contains(key) || fixed.contains_key(key);
        for block in &blocks {
            for key in block.keys() {
                if !known(key) {
                    return Err(SdpError::UnboundKey {
                        key: key.clone(),
                        site: "a block",
                    });
                }
            }
        }
        for key in objective.keys() {
            if !known(key) {
                return Err(SdpError::UnboundKey {
                    key: key.clone(),
                    site: "the objective",
                });
            }
        }
        for key in upper_bounds.keys() {
            if !known(key) {
                return Err(SdpError::UnboundKey {
                    key: key.clone(),
                    site: "an upper bound",
                });
            }
        }
        Ok(SdpProblem {
            variables,
            fixed,
            blocks,
            objective,
            upper_bounds,
        })
    }

    pub fn variables(&self) -> &[MultiIndex] {
        &self.variables
    }

    pub fn fixed(&self) -> &BTreeMap<MultiIndex, T> {
        &self.fixed
    }

    pub fn blocks(&self) -> &[LinearMatrixMap<T>] {
        &self.blocks
    }

    pub fn objective(&self) -> &BTreeMap<MultiIndex, T> {
        &self.objective
    }

    pub fn upper_bounds(&self) -> &BTreeMap<MultiIndex, T> {
        &self.upper_bounds
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    /// Objective value of an assignment, fixed contribution included.
    pub fn objective_value(&self, assignment: &BTreeMap<MultiIndex, T>) -> Result<T, SdpError> {
        let mut acc = T::zero();
        for (key, coef) in &self.objective {
            let v = self
                .fixed
                .get(key)
                .or_else(|| assignment.get(key))
                .ok_or_else(|| SdpError::MissingAssignment { key: key.clone() })?;
            acc = acc + coef.clone() * v.clone();
        }
        Ok(acc)
    }

    /// Per-block structural data with fixed keys folded into constant
    /// offsets; bound constraints appear as trailing 1x1 blocks.
    pub(crate) fn compile(&self) -> Compiled<T> {
        let var_index: BTreeMap<&MultiIndex, usize> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        let mut blocks = Vec::with_capacity(self.blocks.len() + self.upper_bounds.len());
        for map in &self.blocks {
            let size = map.size();
            let mut offset = SymMat::zeros(size);
            let mut per_var: BTreeMap<usize, Vec<(usize, usize, T)>> = BTreeMap::new();
            for key in map.keys() {
                let positions = map.positions(key).unwrap();
                if let Some(value) = self.fixed.get(key) {
                    for (r, c, coef) in positions {
                        offset.add_sym(*r, *c, value.clone() * coef.clone());
                    }
                } else {
                    let vi = var_index[key];
                    per_var.entry(vi).or_default().extend(positions.iter().cloned());
                }
            }
            blocks.push(CompiledBlock {
                size,
                offset,
                entries: per_var.into_iter().collect(),
            });
        }
        for (key, bound) in &self.upper_bounds {
            // bound z_key <= c becomes the 1x1 block [c - z_key]
            let mut offset = SymMat::zeros(1);
            let mut entries = vec![];
            match self.fixed.get(key) {
                Some(value) => {
                    offset.add_sym(0, 0, bound.clone() - value.clone());
                }
                None => {
                    offset.add_sym(0, 0, bound.clone());
                    entries.push((var_index[key], vec![(0usize, 0usize, -T::one())]));
                }
            }
            blocks.push(CompiledBlock {
                size: 1,
                offset,
                entries,
            });
        }

        let mut c = vec![T::zero(); self.variables.len()];
        let mut c0 = T::zero();
        for (key, coef) in &self.objective {
            match self.fixed.get(key) {
                Some(value) => c0 = c0 + coef.clone() * value.clone(),
                None => {
                    let vi = var_index[key];
                    c[vi] = c[vi].clone() + coef.clone();
                }
            }
        }
        Compiled { c, c0, blocks }
    }

    /// Instantiates every block (bounds included) at the given assignment.
    pub fn block_matrices(
        &self,
        assignment: &BTreeMap<MultiIndex, T>,
    ) -> Result<Vec<SymMat<T>>, SdpError> {
        let compiled = self.compile();
        let x = self.assignment_vector(assignment)?;
        Ok(compiled.blocks.iter().map(|b| b.evaluate(&x)).collect())
    }

    pub(crate) fn assignment_vector(
        &self,
        assignment: &BTreeMap<MultiIndex, T>,
    ) -> Result<Vec<T>, SdpError> {
        self.variables
            .iter()
            .map(|key| {
                assignment
                    .get(key)
                    .cloned()
                    .ok_or_else(|| SdpError::MissingAssignment { key: key.clone() })
            })
            .collect()
    }

    pub(crate) fn vector_to_assignment(&self, x: &[T]) -> BTreeMap<MultiIndex, T> {
        self.variables
            .iter()
            .cloned()
            .zip(x.iter().cloned())
            .collect()
    }

    /// Text dump in the versioned conic exchange format (see README).
    pub fn dump_conic(&self) -> String {
        let compiled = self.compile();
        let mut out = String::new();
        let _ = writeln!(out, "momdens-conic 1");
        let _ = writeln!(out, "variables {}", self.variables.len());
        for (i, key) in self.variables.iter().enumerate() {
            let exps: Vec<String> = key.exponents().iter().map(|e| e.to_string()).collect();
            let _ = writeln!(out, "var {} {}", i, exps.join(" "));
        }
        let _ = writeln!(out, "objective const {}", compiled.c0);
        for (i, coef) in compiled.c.iter().enumerate() {
            if !coef.is_zero() {
                let _ = writeln!(out, "obj {} {}", i, coef);
            }
        }
        let _ = writeln!(out, "blocks {}", compiled.blocks.len());
        for (b, block) in compiled.blocks.iter().enumerate() {
            let _ = writeln!(out, "block {} size {}", b, block.size);
            for r in 0..block.size {
                for c in r..block.size {
                    let v = block.offset.get(r, c);
                    if !v.is_zero() {
                        let _ = writeln!(out, "off {} {} {} {}", b, r, c, v);
                    }
                }
            }
            for (vi, positions) in &block.entries {
                for (r, c, coef) in positions {
                    let _ = writeln!(out, "ent {} {} {} {} {}", b, r, c, vi, coef);
                }
            }
        }
        let _ = writeln!(out, "end");
        out
    }
}

/// Lowered problem: per-block constant offsets plus per-variable sparse
/// symmetric coefficient entries.
pub(crate) struct Compiled<T> {
    pub c: Vec<T>,
    pub c0: T,
    pub blocks: Vec<CompiledBlock<T>>,
}

pub(crate) struct CompiledBlock<T> {
    pub size: usize,
    pub offset: SymMat<T>,
    /// `(variable position, entries with r <= c)`
    #[allow(clippy::type_complexity)]
    pub entries: Vec<(usize, Vec<(usize, usize, T)>)>,
}

impl<T: Scalar> CompiledBlock<T> {
    pub fn evaluate(&self, x: &[T]) -> SymMat<T> {
        let mut m = self.offset.clone();
        for (vi, positions) in &self.entries {
            let v = &x[*vi];
            if v.is_zero() {
                continue;
            }
            for (r, c, coef) in positions {
                m.add_sym(*r, *c, v.clone() * coef.clone());
            }
        }
        m
    }
}

/// Solver verdict for one SDP instance.
#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome<T> {
    Feasible {
        assignment: BTreeMap<MultiIndex, T>,
        objective: T,
        min_block_eigenvalue: T,
    },
    Infeasible {
        /// Optimal phase-1 margin `t*`, the uniform diagonal lift needed to
        /// reach PSD-feasibility.
        margin: T,
        assignment: BTreeMap<MultiIndex, T>,
    },
    Indeterminate {
        reason: String,
        margin: Option<T>,
    },
}

impl<T> SolveOutcome<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveOutcome::Feasible { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, SolveOutcome::Infeasible { .. })
    }
}

/// Interior-point configuration; defaults match the documented tolerances.
#[derive(Clone, Debug)]
pub struct SolverConfig<T> {
    /// A block residual above `-feas_tol` counts as PSD-feasible.
    pub feas_tol: T,
    /// A certified phase-1 margin above this threshold counts as infeasible.
    pub infeas_threshold: T,
    /// Barrier parameter reduction per stage (gap shrinks by this factor).
    pub barrier_reduction: T,
    /// Newton iteration budget per barrier run.
    pub max_newton_iters: usize,
    /// Fraction of the backtracked boundary step actually taken.
    pub step_fraction: T,
    /// Relative duality-gap target for phase-2 objective accuracy.
    pub gap_rel: T,
    /// Absolute duality-gap target for phase-1 margins.
    pub gap_abs: T,
    /// Objective divergence guard: below `-divergence_bound` the problem is
    /// reported unbounded.
    pub divergence_bound: T,
    /// Free variables are confined to `|x_i| <= variable_box`: the margin
    /// objective alone does not coerce the moment variables, and barrier
    /// centers would otherwise drift along curves of unbounded completions.
    /// Verdicts are relative to this box; exact certificates are not.
    pub variable_box: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        let f = |v: f64| T::from_f64(v).unwrap();
        SolverConfig {
            feas_tol: f(1e-8),
            infeas_threshold: f(1e-6),
            barrier_reduction: f(0.2),
            max_newton_iters: 200,
            step_fraction: f(0.98),
            gap_rel: f(1e-6),
            gap_abs: f(1e-9),
            divergence_bound: f(1e6),
            variable_box: f(1e6),
        }
    }
}

/// Independent verification of an assignment: exact instantiation of every
/// block and a symmetric eigenvalue computation, no solver state consulted.
#[derive(Clone, Debug)]
pub struct ResidualReport<T> {
    pub block_min_eigenvalues: Vec<T>,
    pub objective: T,
}

impl<T: Real> ResidualReport<T> {
    pub fn min_eigenvalue(&self) -> T {
        self.block_min_eigenvalues
            .iter()
            .fold(T::infinity(), |m, &v| if v < m { v } else { m })
    }
}

pub fn residuals<T: Real>(
    problem: &SdpProblem<T>,
    assignment: &BTreeMap<MultiIndex, T>,
) -> Result<ResidualReport<T>, SdpError> {
    let matrices = problem.block_matrices(assignment)?;
    Ok(ResidualReport {
        block_min_eigenvalues: matrices.iter().map(SymMat::min_eigenvalue).collect(),
        objective: problem.objective_value(assignment)?,
    })
}
