//! Path-following barrier solver for the block-PSD problems.
//!
//! One engine drives both phases: minimize `η c·x - Σ_b log det S_b(x)`
//! over strictly feasible `x`, re-centering with damped Newton steps while
//! `η` grows by `1 / barrier_reduction` per stage. At an (approximate)
//! center the duality gap is bounded by `total_dim / η`, which is what the
//! termination and the infeasibility certification use.
//!
//! The phase-1 margin program appends the lift variable `t` to every block
//! and minimizes it from the always-strictly-feasible start
//! `z = 0, t = max(1, 1.1 λ_max(-Block_b(0)))`. Free variables are kept
//! inside a large configurable box: the pure margin objective does not
//! coerce the moment variables, and without the box the analytic centers
//! drift along curves of unbounded completions.

use super::{Compiled, CompiledBlock, SdpProblem, SolveOutcome, SolverConfig};
use crate::linalg::{Cholesky, SymMat};
use crate::polybasis::MultiIndex;
use crate::scalar::Real;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverFailure {
    #[error("objective diverged below the divergence bound; problem unbounded")]
    Unbounded,
}

/// Outcome of the phase-1 margin program.
#[derive(Clone, Debug)]
pub struct Phase1Outcome<T> {
    /// Achieved optimal lift `t*` (up to `gap`).
    pub margin: T,
    /// Duality-gap bound at exit; `margin - 2 gap` is the certified lower
    /// bound on the true optimum.
    pub gap: T,
    pub assignment: BTreeMap<MultiIndex, T>,
    pub newton_iters: usize,
    /// How the run ended; a stalled run still carries its best iterate and
    /// a valid (just looser) gap bound.
    pub termination: Phase1Termination,
    pub(crate) x: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase1Termination {
    GapReached,
    CertifiedInfeasible,
    IterationCap,
    NumericalStall,
}

impl Phase1Termination {
    fn describe(self) -> &'static str {
        match self {
            Phase1Termination::GapReached => "gap target reached",
            Phase1Termination::CertifiedInfeasible => "infeasibility certified early",
            Phase1Termination::IterationCap => "newton iteration budget exhausted",
            Phase1Termination::NumericalStall => "numerical stall at the precision floor",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveStats<T> {
    pub phase1_newton_iters: usize,
    pub phase2_newton_iters: usize,
    pub phase2_ran: bool,
    pub phase2_shift: Option<T>,
    pub phase1_margin: Option<T>,
    pub phase1_gap: Option<T>,
}

impl<T> Default for SolveStats<T> {
    fn default() -> Self {
        SolveStats {
            phase1_newton_iters: 0,
            phase2_newton_iters: 0,
            phase2_ran: false,
            phase2_shift: None,
            phase1_margin: None,
            phase1_gap: None,
        }
    }
}

pub(crate) enum RunStatus {
    GapReached,
    EarlyStopped,
    Diverged,
    IterationCap,
    NewtonBreakdown,
    LineSearchStall,
}

pub(crate) struct BarrierRun<T> {
    pub x: Vec<T>,
    pub gap: T,
    pub iters: usize,
    pub status: RunStatus,
    pub eta: T,
}

pub(crate) struct BarrierOpts<'a, T> {
    pub gap_abs: T,
    pub gap_rel: T,
    pub divergence_floor: Option<T>,
    #[allow(clippy::type_complexity)]
    pub early_stop: Option<&'a dyn Fn(&[T], T) -> bool>,
    /// Resume the schedule at this barrier weight instead of 1.
    pub start_eta: Option<T>,
    /// Newton-decrement threshold for "centered" (default 1e-6).
    pub center_tol: Option<T>,
}

impl<T> Default for BarrierOpts<'_, T>
where
    T: Real,
{
    fn default() -> Self {
        BarrierOpts {
            gap_abs: T::from_f64(1e-9).unwrap(),
            gap_rel: T::zero(),
            divergence_floor: None,
            early_stop: None,
            start_eta: None,
            center_tol: None,
        }
    }
}

fn cholesky_all<T: Real>(blocks: &[CompiledBlock<T>], x: &[T]) -> Option<Vec<Cholesky<T>>> {
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        out.push(b.evaluate(x).cholesky()?);
    }
    Some(out)
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Central-path minimization of `c·x` over the strictly feasible region of
/// `blocks`, starting from the strictly feasible `x0`.
pub(crate) fn barrier_minimize<T: Real>(
    blocks: &[CompiledBlock<T>],
    c: &[T],
    x0: Vec<T>,
    cfg: &SolverConfig<T>,
    opts: &BarrierOpts<T>,
) -> BarrierRun<T> {
    let n = c.len();
    let two = T::one() + T::one();
    let total_dim = T::from_usize(blocks.iter().map(|b| b.size).sum()).unwrap();
    // Newton-decrement centering test, scale invariant; at this level the
    // iterate is deep inside the quadratic convergence region and the
    // duality-gap bound total_dim / eta holds up to a negligible correction.
    let center_tol = opts.center_tol.unwrap_or_else(|| T::from_f64(1e-6).unwrap());
    let step_floor = T::from_f64(1e-10).unwrap();

    let mut x = x0;
    let mut chols = cholesky_all(blocks, &x).expect("barrier start must be strictly feasible");
    let mut eta = opts.start_eta.unwrap_or_else(T::one);
    let mut iters = 0usize;
    let mut prev_cx: Option<T> = None;

    let finish = |x: Vec<T>, iters, status, eta: T| BarrierRun {
        x,
        gap: total_dim / eta,
        iters,
        status,
        eta,
    };

    loop {
        // re-center at the current eta
        let mut centered = false;
        loop {
            if iters >= cfg.max_newton_iters {
                return finish(x, iters, RunStatus::IterationCap, eta);
            }
            iters += 1;

            let inverses: Vec<SymMat<T>> = chols.iter().map(Cholesky::inverse).collect();
            let mut grad: Vec<T> = (0..n).map(|i| eta * c[i]).collect();
            for (b, block) in blocks.iter().enumerate() {
                for (vi, entries) in &block.entries {
                    grad[*vi] = grad[*vi] - inverses[b].frob_entries(entries);
                }
            }
            let mut hess = SymMat::zeros(n);
            for (b, block) in blocks.iter().enumerate() {
                let w = &inverses[b];
                for (ii, (vi, entries_i)) in block.entries.iter().enumerate() {
                    let y = w.sandwich(entries_i);
                    for (vj, entries_j) in &block.entries[ii..] {
                        hess.add_sym(*vi, *vj, y.frob_entries(entries_j));
                    }
                }
            }

            // Jacobi-preconditioned, regularized Newton solve; delta doubles
            // from 1e-12 to 1e-6 before giving up
            let precond: Vec<T> = (0..n)
                .map(|i| {
                    let d = *hess.get(i, i);
                    if d > T::zero() {
                        T::one() / d.sqrt()
                    } else {
                        T::one()
                    }
                })
                .collect();
            let mut scaled = SymMat::zeros(n);
            for i in 0..n {
                for j in i..n {
                    scaled.set_sym(i, j, *hess.get(i, j) * precond[i] * precond[j]);
                }
            }
            let neg_grad_scaled: Vec<T> =
                (0..n).map(|i| -grad[i] * precond[i]).collect();
            let mut delta = T::from_f64(1e-12).unwrap();
            let delta_max = T::from_f64(1e-6).unwrap();
            let mut direction = None;
            let mut tried_plain = false;
            loop {
                let factor = if tried_plain {
                    let mut shifted = scaled.clone();
                    shifted.shift_diagonal(&delta);
                    shifted.cholesky()
                } else {
                    tried_plain = true;
                    scaled.cholesky()
                };
                if let Some(f) = factor {
                    // one round of iterative refinement in the scaled system
                    let mut y = f.solve(&neg_grad_scaled);
                    let mut residual = neg_grad_scaled.clone();
                    for i in 0..n {
                        for j in 0..n {
                            residual[i] = residual[i] - *scaled.get(i, j) * y[j];
                        }
                    }
                    let correction = f.solve(&residual);
                    for i in 0..n {
                        y[i] = y[i] + correction[i];
                    }
                    direction = Some((0..n).map(|i| y[i] * precond[i]).collect::<Vec<T>>());
                    break;
                }
                delta = delta * two;
                if delta > delta_max {
                    break;
                }
            }
            let Some(dir) = direction else {
                return finish(x, iters, RunStatus::NewtonBreakdown, eta);
            };

            // decrement^2 = -grad . dir = dir' H dir >= 0 up to regularization
            let decrement_sq = -dot(&grad, &dir);
            if decrement_sq / two <= center_tol {
                centered = true;
                break;
            }

            // feasibility backtracking, then a fraction of the boundary step
            let mut step = T::one();
            let mut candidate = None;
            for halvings in 0..90 {
                let xt: Vec<T> = x.iter().zip(&dir).map(|(&a, &d)| a + step * d).collect();
                if let Some(ch) = cholesky_all(blocks, &xt) {
                    if halvings > 0 {
                        let shrunk = step * cfg.step_fraction;
                        let xs: Vec<T> =
                            x.iter().zip(&dir).map(|(&a, &d)| a + shrunk * d).collect();
                        if let Some(chs) = cholesky_all(blocks, &xs) {
                            step = shrunk;
                            candidate = Some((xs, chs));
                            break;
                        }
                    }
                    candidate = Some((xt, ch));
                    break;
                }
                step = step / two;
            }
            let Some((mut xt, mut cht)) = candidate else {
                return finish(x, iters, RunStatus::LineSearchStall, eta);
            };

            // Armijo decrease on the barrier potential
            let phi = |cx: T, ch: &[Cholesky<T>]| {
                eta * cx - ch.iter().fold(T::zero(), |acc, c| acc + c.log_det())
            };
            let phi0 = phi(dot(c, &x), &chols);
            let slope = dot(&grad, &dir);
            let armijo = T::from_f64(0.25).unwrap();
            let mut ok = false;
            for _ in 0..40 {
                if phi(dot(c, &xt), &cht) <= phi0 + armijo * step * slope {
                    ok = true;
                    break;
                }
                step = step / two;
                let xs: Vec<T> = x.iter().zip(&dir).map(|(&a, &d)| a + step * d).collect();
                match cholesky_all(blocks, &xs) {
                    Some(chs) => {
                        xt = xs;
                        cht = chs;
                    }
                    None => break,
                }
            }
            if !ok {
                return finish(x, iters, RunStatus::LineSearchStall, eta);
            }
            x = xt;
            chols = cht;

            if let Some(floor) = opts.divergence_floor {
                if dot(c, &x) < floor {
                    return finish(x, iters, RunStatus::Diverged, eta);
                }
            }
            // rounding floor: no observable progress means we are as
            // centered as f64 permits at this eta
            if step < step_floor {
                break;
            }
        }

        // centered at eta: the duality gap is bounded by total_dim / eta
        let gap = total_dim / eta;
        let cx = dot(c, &x);
        if let Some(stop) = opts.early_stop {
            if stop(&x, gap) {
                return finish(x, iters, RunStatus::EarlyStopped, eta);
            }
        }
        if gap <= opts.gap_abs {
            return finish(x, iters, RunStatus::GapReached, eta);
        }
        // the relative test needs a genuinely centered iterate whose value
        // has settled: far from the optimum (or at a numerical stall) the
        // current value can dwarf the gap bound and would end the run
        // spuriously
        let settled = prev_cx.is_some_and(|p: T| (cx - p).abs() <= gap);
        if centered && settled && gap <= opts.gap_rel * (T::one() + cx.abs()) {
            return finish(x, iters, RunStatus::GapReached, eta);
        }
        prev_cx = Some(cx);
        eta = eta / cfg.barrier_reduction;
    }
}

/// Appends `|x_i| <= box` blocks for every free variable.
fn push_variable_box<T: Real>(blocks: &mut Vec<CompiledBlock<T>>, n: usize, bound: T) {
    for i in 0..n {
        for sign in [T::one(), -T::one()] {
            let mut offset = SymMat::zeros(1);
            offset.add_sym(0, 0, bound);
            blocks.push(CompiledBlock {
                size: 1,
                offset,
                entries: vec![(i, vec![(0, 0, sign)])],
            });
        }
    }
}

/// Phase-1 margin program: `min t  s.t.  Block_b(z) + t I >= 0` over the
/// free variables and the scalar lift `t`.
///
/// Interpretation of the optimal margin `t*`: above `infeas_threshold` the
/// original problem is infeasible within tolerance; below `-infeas_threshold`
/// a strictly feasible interior point has been found; in between the problem
/// is marginal and the caller falls back to block residuals.
pub fn phase1<T: Real>(
    problem: &SdpProblem<T>,
    cfg: &SolverConfig<T>,
) -> Result<Phase1Outcome<T>, SolverFailure> {
    let compiled = problem.compile();
    let (run, _, _) = phase1_run(&compiled, cfg, Phase1Stop::Optimal)?;
    let n = compiled.c.len();
    Ok(outcome_from_run(problem, run, n))
}

fn outcome_from_run<T: Real>(
    problem: &SdpProblem<T>,
    run: BarrierRun<T>,
    n: usize,
) -> Phase1Outcome<T> {
    let termination = match run.status {
        RunStatus::GapReached => Phase1Termination::GapReached,
        RunStatus::EarlyStopped => Phase1Termination::CertifiedInfeasible,
        RunStatus::IterationCap => Phase1Termination::IterationCap,
        _ => Phase1Termination::NumericalStall,
    };
    Phase1Outcome {
        margin: run.x[n],
        gap: run.gap,
        assignment: problem.vector_to_assignment(&run.x[..n]),
        newton_iters: run.iters,
        termination,
        x: run.x,
    }
}

/// Stop rule for the margin program: run to the optimal margin, or stop as
/// soon as infeasibility is certified (`t - 2 gap > infeas_threshold`).
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Phase1Stop {
    Optimal,
    CertifyInfeasible,
}

/// Runs the margin program; also hands back the lifted blocks and the count
/// of problem blocks (the rest are box regularizers), for dual extraction.
#[allow(clippy::type_complexity)]
pub(crate) fn phase1_run<T: Real>(
    compiled: &Compiled<T>,
    cfg: &SolverConfig<T>,
    stop: Phase1Stop,
) -> Result<(BarrierRun<T>, Vec<CompiledBlock<T>>, usize), SolverFailure> {
    let n = compiled.c.len();
    let num_problem_blocks = compiled.blocks.len();
    let mut blocks: Vec<CompiledBlock<T>> = compiled
        .blocks
        .iter()
        .map(|b| CompiledBlock {
            size: b.size,
            offset: b.offset.clone(),
            entries: b.entries.clone(),
        })
        .collect();
    // lift variable t on every problem block (bounds included, box excluded)
    for block in blocks.iter_mut().take(num_problem_blocks) {
        let diag: Vec<(usize, usize, T)> = (0..block.size).map(|i| (i, i, T::one())).collect();
        block.entries.push((n, diag));
    }
    push_variable_box(&mut blocks, n, cfg.variable_box);

    let worst = compiled
        .blocks
        .iter()
        .map(|b| -b.offset.min_eigenvalue())
        .fold(T::neg_infinity(), T::max);
    let t0 = T::max(T::one(), T::from_f64(1.1).unwrap() * worst);
    let mut x0 = vec![T::zero(); n + 1];
    x0[n] = t0;

    let mut c = vec![T::zero(); n + 1];
    c[n] = T::one();

    let two = T::one() + T::one();
    let threshold = cfg.infeas_threshold;
    let early = move |x: &[T], gap: T| x[n] - two * gap > threshold;
    let half_feas = cfg.feas_tol / two;
    let gap_abs = if cfg.gap_abs < half_feas {
        cfg.gap_abs
    } else {
        half_feas
    };
    let opts = BarrierOpts {
        gap_abs,
        gap_rel: T::zero(),
        divergence_floor: Some(-cfg.divergence_bound),
        early_stop: match stop {
            Phase1Stop::Optimal => None,
            Phase1Stop::CertifyInfeasible => Some(&early),
        },
        ..Default::default()
    };
    let run = barrier_minimize(&blocks, &c, x0, cfg, &opts);
    match run.status {
        // stalled or budget-capped runs still carry their best iterate and a
        // valid (looser) gap bound; the caller decides from the residuals
        RunStatus::Diverged => Err(SolverFailure::Unbounded),
        _ => Ok((run, blocks, num_problem_blocks)),
    }
}

pub fn solve<T: Real>(problem: &SdpProblem<T>, cfg: &SolverConfig<T>) -> SolveOutcome<T> {
    solve_with_stats(problem, cfg).0
}

/// Full solve: phase-1 verdict routing, then phase-2 objective minimization
/// from the interior point when one is usable.
pub fn solve_with_stats<T: Real>(
    problem: &SdpProblem<T>,
    cfg: &SolverConfig<T>,
) -> (SolveOutcome<T>, SolveStats<T>) {
    let compiled = problem.compile();
    let n = compiled.c.len();
    let mut stats = SolveStats::default();

    // with every variable fixed this is a plain eigenvalue check
    if n == 0 {
        let min_eig = compiled
            .blocks
            .iter()
            .map(|b| b.offset.min_eigenvalue())
            .fold(T::infinity(), T::min);
        let outcome = if -min_eig > cfg.infeas_threshold {
            SolveOutcome::Infeasible {
                margin: -min_eig,
                assignment: BTreeMap::new(),
            }
        } else if min_eig >= -cfg.feas_tol {
            SolveOutcome::Feasible {
                assignment: BTreeMap::new(),
                objective: compiled.c0,
                min_block_eigenvalue: min_eig,
            }
        } else {
            SolveOutcome::Indeterminate {
                reason: format!(
                    "all variables fixed; least block eigenvalue {} lies in the tolerance band",
                    min_eig
                ),
                margin: Some(-min_eig),
            }
        };
        return (outcome, stats);
    }

    let p1 = match phase1_run(&compiled, cfg, Phase1Stop::CertifyInfeasible) {
        Ok((run, _, _)) => outcome_from_run(problem, run, n),
        Err(err) => {
            return (
                SolveOutcome::Indeterminate {
                    reason: format!("phase-1 failed: {err}"),
                    margin: None,
                },
                stats,
            );
        }
    };
    stats.phase1_newton_iters = p1.newton_iters;
    stats.phase1_margin = Some(p1.margin);
    stats.phase1_gap = Some(p1.gap);
    let two = T::one() + T::one();

    if p1.margin - two * p1.gap > cfg.infeas_threshold {
        return (
            SolveOutcome::Infeasible {
                margin: p1.margin,
                assignment: p1.assignment,
            },
            stats,
        );
    }

    // residual verdict at the margin minimizer
    let x1 = &p1.x[..n];
    let min_eig_at = |x: &[T]| {
        compiled
            .blocks
            .iter()
            .map(|b| b.evaluate(x).min_eigenvalue())
            .fold(T::infinity(), T::min)
    };
    let min_eig1 = min_eig_at(x1);
    if min_eig1 < -cfg.feas_tol {
        return (
            SolveOutcome::Indeterminate {
                reason: format!(
                    "phase-1 margin {} (gap {}, {}) is not a certified infeasibility and the \
                     best residual {} is below -feas_tol",
                    p1.margin,
                    p1.gap,
                    p1.termination.describe(),
                    min_eig1
                ),
                margin: Some(p1.margin),
            },
            stats,
        );
    }

    // phase 2: minimize the objective from the interior; shift the blocks
    // by the smallest diagonal lift that makes the start factorizable
    let mut shift = T::zero();
    let shift_cap = T::from_f64(1e-9).unwrap();
    let shifted_blocks = loop {
        let mut blocks: Vec<CompiledBlock<T>> = compiled
            .blocks
            .iter()
            .map(|b| CompiledBlock {
                size: b.size,
                offset: {
                    let mut o = b.offset.clone();
                    o.shift_diagonal(&shift);
                    o
                },
                entries: b.entries.clone(),
            })
            .collect();
        push_variable_box(&mut blocks, n, cfg.variable_box);
        if cholesky_all(&blocks, &p1.x[..n]).is_some() {
            break Some(blocks);
        }
        shift = if shift.is_zero() {
            T::from_f64(1e-12).unwrap()
        } else {
            shift * two
        };
        if shift > shift_cap {
            break None;
        }
    };

    let feasible_from = |x: &[T], stats: SolveStats<T>| {
        let assignment = problem.vector_to_assignment(x);
        let objective = problem
            .objective_value(&assignment)
            .expect("assignment covers all variables");
        (
            SolveOutcome::Feasible {
                assignment,
                objective,
                min_block_eigenvalue: min_eig_at(x),
            },
            stats,
        )
    };

    let Some(blocks2) = shifted_blocks else {
        // the interior is numerically empty; report the phase-1 point
        return feasible_from(x1, stats);
    };
    stats.phase2_ran = true;
    stats.phase2_shift = Some(shift);

    let opts = BarrierOpts {
        gap_abs: cfg.gap_abs,
        gap_rel: cfg.gap_rel,
        divergence_floor: Some(-cfg.divergence_bound),
        early_stop: None,
        ..Default::default()
    };
    let run = barrier_minimize(&blocks2, &compiled.c, p1.x[..n].to_vec(), cfg, &opts);
    stats.phase2_newton_iters = run.iters;
    match run.status {
        RunStatus::Diverged => (
            SolveOutcome::Indeterminate {
                reason: format!(
                    "objective diverged below -{}; the problem appears unbounded",
                    cfg.divergence_bound
                ),
                margin: Some(p1.margin),
            },
            stats,
        ),
        RunStatus::GapReached | RunStatus::EarlyStopped => feasible_from(&run.x, stats),
        // budget or numerical trouble: feasibility already certified, fall
        // back to the best point whose residuals still pass
        _ => {
            if min_eig_at(&run.x) >= -cfg.feas_tol {
                feasible_from(&run.x, stats)
            } else {
                feasible_from(x1, stats)
            }
        }
    }
}
