//! Exact separation certificates for infeasible instances.
//!
//! A claim "this block system has no PSD completion" is verified without
//! trusting the solver: take the interior-point dual estimates, write them
//! as exact rationals, project them exactly onto the subspace where every
//! free variable's coefficient pairing vanishes, and then check in rational
//! arithmetic that each projected dual is PSD and that its pairing with the
//! constant offsets is strictly negative. Any feasible assignment `x` would
//! give `0 <= Σ_b <S_b(x), Z_b> = Σ_b <offset_b, Z_b> < 0`, a contradiction,
//! so a verified certificate is a proof of infeasibility — independent of
//! floating-point behaviour and of the variable box used by the solver.

use super::solver::{barrier_minimize, phase1_run, BarrierOpts, Phase1Stop};
use super::{SdpProblem, SolverConfig};
use crate::linalg::SymMat;
use crate::scalar::Scalar;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("expected {expected} dual blocks, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dual block {block} contains a non-finite entry")]
    NonFiniteDual { block: usize },
    #[error("dual block {block} is not positive semidefinite")]
    NotPsd { block: usize },
    #[error("dual does not separate: offset pairing {value} is not negative")]
    NotSeparating { value: String },
    #[error("phase-1 did not certify infeasibility (margin {margin}, gap {gap})")]
    NoCertifiedMargin { margin: f64, gap: f64 },
}

/// Runs the margin program and returns the interior-point dual estimate
/// `Z_b = S_b(x, t)^{-1} / eta` for every block of the boxed problem —
/// the PSD blocks, the bound blocks, and the `|x_i| <= variable_box`
/// blocks, in solver order — once the achieved margin certifies
/// infeasibility at the configured threshold.
pub fn extract_infeasibility_duals(
    problem: &SdpProblem<f64>,
    cfg: &SolverConfig<f64>,
) -> Result<Vec<SymMat<f64>>, CertificateError> {
    let compiled = problem.compile();
    let (run, blocks, _) = match phase1_run(&compiled, cfg, Phase1Stop::CertifyInfeasible) {
        Ok(v) => v,
        Err(_) => {
            return Err(CertificateError::NoCertifiedMargin {
                margin: f64::NAN,
                gap: f64::NAN,
            })
        }
    };
    let n = compiled.c.len();
    let margin = run.x[n];
    if margin - 2.0 * run.gap <= cfg.infeas_threshold {
        return Err(CertificateError::NoCertifiedMargin {
            margin,
            gap: run.gap,
        });
    }

    // re-center as tightly as f64 permits at the exit eta: the exact
    // verification charges the equality residuals against the separation
    // margin, so the cleaner the center the stronger the certificate
    let mut c = vec![0.0_f64; n + 1];
    c[n] = 1.0;
    let opts = BarrierOpts {
        gap_abs: run.gap * 1.5,
        start_eta: Some(run.eta),
        center_tol: Some(1e-16),
        ..Default::default()
    };
    let run = barrier_minimize(&blocks, &c, run.x, cfg, &opts);

    let mut duals = Vec::with_capacity(blocks.len());
    for block in &blocks {
        let chol = block
            .evaluate(&run.x)
            .cholesky()
            .expect("phase-1 iterate is strictly feasible for the lifted blocks");
        let mut w = chol.inverse();
        w.scale_in_place(&(1.0 / run.eta));
        duals.push(w);
    }
    Ok(duals)
}

/// Exact verification against the boxed problem (`variable_box` must be the
/// exact solver setting); on success returns the certified (positive)
/// rational violation `-Σ_b <offset_b, Z_b>`.
///
/// The float duals are taken exactly as rationals for the PSD and bound
/// blocks; whatever equality residual `r_i = Σ_b <F_bi, Z_b>` remains is
/// absorbed by the two box slacks of variable `i` (the blocks `B - x_i >= 0`
/// and `B + x_i >= 0` enter row `i` with coefficients -1 and +1), which
/// keeps every dual exactly PSD by construction. A verified certificate
/// proves: no assignment with `|x_i| <= variable_box` makes every block PSD.
pub fn verify_infeasibility(
    problem: &SdpProblem<BigRational>,
    duals: &[SymMat<f64>],
    variable_box: f64,
) -> Result<BigRational, CertificateError> {
    let compiled = problem.compile();
    let nvars = compiled.c.len();
    let nblocks = compiled.blocks.len();
    // the extraction hands back PSD + bound duals first, then 2 per variable
    if duals.len() != nblocks + 2 * nvars {
        return Err(CertificateError::LengthMismatch {
            expected: nblocks + 2 * nvars,
            got: duals.len(),
        });
    }
    let bound = BigRational::from_float(variable_box).expect("finite box");

    // rationalize the structural duals exactly
    let mut zs: Vec<SymMat<BigRational>> = Vec::with_capacity(nblocks);
    for (b, dual) in duals.iter().take(nblocks).enumerate() {
        let size = compiled.blocks[b].size;
        if dual.size() != size {
            return Err(CertificateError::LengthMismatch {
                expected: size,
                got: dual.size(),
            });
        }
        let mut z = SymMat::zeros(size);
        for r in 0..size {
            for c in r..size {
                let v = *dual.get(r, c);
                if !v.is_finite() {
                    return Err(CertificateError::NonFiniteDual { block: b });
                }
                z.set_sym(r, c, BigRational::from_float(v).expect("finite float"));
            }
        }
        if !is_psd_exact(&z) {
            return Err(CertificateError::NotPsd { block: b });
        }
        zs.push(z);
    }

    // equality residuals r_i = sum_b <F_bi, Z_b> over the structural blocks
    let two = BigRational::from_int(2);
    let mut residual = vec![BigRational::zero(); nvars];
    for (b, block) in compiled.blocks.iter().enumerate() {
        for (vi, entries) in &block.entries {
            for (r, c, f) in entries {
                let w = if r == c { f.clone() } else { two.clone() * f.clone() };
                residual[*vi] =
                    residual[*vi].clone() + w * zs[b].get(*r, *c).clone();
            }
        }
    }

    // absorb each residual on the box slack of the matching sign; the box
    // dual pair contributes -z_plus + z_minus to row i and
    // bound * (z_plus + z_minus) to the offset pairing
    let mut pairing = BigRational::zero();
    for (b, block) in compiled.blocks.iter().enumerate() {
        pairing += block.offset.dot(&zs[b]);
    }
    for r in &residual {
        pairing += bound.clone() * r.abs();
    }

    if pairing >= BigRational::zero() {
        return Err(CertificateError::NotSeparating {
            value: format!("{}", pairing.to_f64_approx()),
        });
    }
    Ok(-pairing)
}

/// Exact PSD test by Gaussian elimination with positive diagonal pivots.
fn is_psd_exact(m: &SymMat<BigRational>) -> bool {
    let n = m.size();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|r| (0..n).map(|c| m.get(r, c).clone()).collect())
        .collect();
    let mut active: Vec<usize> = (0..n).collect();
    loop {
        if active.iter().any(|&i| a[i][i] < BigRational::zero()) {
            return false;
        }
        let pivot = active.iter().position(|&i| a[i][i] > BigRational::zero());
        let Some(pos) = pivot else {
            // all active diagonal entries are zero: PSD iff the remaining
            // block vanishes entirely
            return active
                .iter()
                .all(|&i| active.iter().all(|&j| a[i][j].is_zero()));
        };
        let p = active.remove(pos);
        let piv = a[p][p].clone();
        for &i in &active {
            if a[i][p].is_zero() {
                continue;
            }
            let factor = a[i][p].clone() / piv.clone();
            for &j in &active {
                let delta = factor.clone() * a[p][j].clone();
                a[i][j] = a[i][j].clone() - delta;
            }
        }
        if active.is_empty() {
            return true;
        }
    }
}
