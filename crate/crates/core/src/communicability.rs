//! Total communicability via the action of the matrix exponential, the
//! Perron communicability surrogate, and the structured variant with its
//! bounds.
//!
//! tc = 1ᵀ exp₀(B) 1 with exp₀(t) = exp(t) − 1, so tc = 1ᵀ exp(B) 1 − NL.
//! Below `DENSE_LIMIT` the exponential is formed densely by Padé
//! scaling-and-squaring; above it exp(B)·1 is approximated in a Krylov
//! subspace with substepping. All exp₀-scaled quantities are additionally
//! carried in natural-log form, which stays finite past ρ ≈ 709 where the
//! linear values overflow.

use serde::Serialize;

use crate::dense::{DenseMatrix, MatVec};
use crate::error::{Error, Result};
use crate::multiplex::{SparsityPattern, SupraAdjacency};
use crate::spectral::{self, PerronTriple};

pub const DENSE_LIMIT: usize = 1000;
pub const DEFAULT_DENSE_TOL: f64 = 1e-10;
pub const DEFAULT_KRYLOV_TOL: f64 = 1e-8;
pub const KRYLOV_DIM: usize = 50;

/// exp₀(t) = exp(t) − 1.
pub fn exp0(t: f64) -> f64 {
    t.exp_m1()
}

/// ln(exp₀(t)) = t + ln(1 − e^{−t}) for t > 0, finite far past the linear
/// overflow point. Tiny arguments switch to the direct form, where the
/// complement expression loses all precision.
pub fn ln_exp0(t: f64) -> f64 {
    assert!(t > 0.0, "ln_exp0 needs a positive argument");
    if t < 1e-8 {
        return t.exp_m1().ln();
    }
    t + (-(-t).exp()).ln_1p()
}

/// Dense matrix exponential by [13/13] Padé approximation with scaling and
/// squaring.
pub fn matrix_exponential(a: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, ln_scale) = matrix_exponential_scaled(a)?;
    let mut m = m;
    m.scale(ln_scale.exp());
    Ok(m)
}

/// Like [`matrix_exponential`] but represents the result as
/// e^{ln_scale} · M̃, renormalizing between squarings so the factorization
/// stays finite when exp(A) itself overflows.
pub fn matrix_exponential_scaled(a: &DenseMatrix) -> Result<(DenseMatrix, f64)> {
    assert!(a.is_square());
    let n = a.rows();
    const THETA_13: f64 = 5.371920351148152;
    #[rustfmt::skip]
    const B: [f64; 14] = [
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0,
    ];
    let norm = a.one_norm();
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let mut scaled = a.clone();
    if s > 0 {
        scaled.scale(0.5f64.powi(s));
    }
    let a2 = scaled.matmul(&scaled);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);
    let ident = DenseMatrix::identity(n);

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let mut inner = DenseMatrix::zeros(n, n);
    inner.add_scaled(B[13], &a6);
    inner.add_scaled(B[11], &a4);
    inner.add_scaled(B[9], &a2);
    let mut u = a6.matmul(&inner);
    u.add_scaled(B[7], &a6);
    u.add_scaled(B[5], &a4);
    u.add_scaled(B[3], &a2);
    u.add_scaled(B[1], &ident);
    let u = scaled.matmul(&u);

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let mut inner = DenseMatrix::zeros(n, n);
    inner.add_scaled(B[12], &a6);
    inner.add_scaled(B[10], &a4);
    inner.add_scaled(B[8], &a2);
    let mut v = a6.matmul(&inner);
    v.add_scaled(B[6], &a6);
    v.add_scaled(B[4], &a4);
    v.add_scaled(B[2], &a2);
    v.add_scaled(B[0], &ident);

    // solve (V - U) X = (V + U)
    let mut vm = v.clone();
    vm.add_scaled(-1.0, &u);
    let mut vp = v;
    vp.add_scaled(1.0, &u);
    let mut x = vm.lu_solve(vp)?;
    let mut ln_scale = 0.0f64;
    for _ in 0..s {
        x = x.matmul(&x);
        ln_scale *= 2.0;
        let mx = x
            .data()
            .iter()
            .cloned()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        if mx > 1e100 {
            x.scale(1.0 / mx);
            ln_scale += mx.ln();
        }
    }
    Ok((x, ln_scale))
}

/// 1ᵀ exp(M) 1 − n through the dense exponential.
pub fn total_communicability_dense(m: &DenseMatrix) -> Result<f64> {
    let n = m.rows();
    let (e, ln_scale) = matrix_exponential_scaled(m)?;
    Ok(ln_scale.exp() * e.data().iter().sum::<f64>() - n as f64)
}

/// ln(1ᵀ exp(M) 1 − n), finite even when the linear value overflows.
pub fn total_communicability_dense_ln(m: &DenseMatrix) -> Result<f64> {
    let n = m.rows();
    let (e, ln_scale) = matrix_exponential_scaled(m)?;
    let total: f64 = e.data().iter().sum();
    Ok(ln_quadratic_minus_n(ln_scale, total, n))
}

/// ln(e^{ln_scale}·total − n), stable across scales.
fn ln_quadratic_minus_n(ln_scale: f64, total: f64, n: usize) -> f64 {
    if !(total > 0.0) {
        return f64::NAN;
    }
    let ln_full = ln_scale + total.ln();
    let ln_n = (n as f64).ln();
    if ln_full > ln_n + 40.0 {
        // the subtracted n is below the 1-ulp level
        ln_full
    } else {
        let linear = ln_full.exp() - n as f64;
        if linear > 0.0 {
            linear.ln()
        } else {
            f64::NAN
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KrylovStats {
    pub substeps: usize,
    pub matvecs: usize,
    /// accumulated relative local-error estimate over all substeps
    pub error_estimate: f64,
}

/// Approximates w = exp(M) v by restarted Arnoldi substepping. The local
/// relative error per substep is estimated from the last Hessenberg entry
/// and the step size adapts to keep the accumulated estimate below `tol`.
pub fn krylov_expv<M: MatVec + ?Sized>(
    m: &M,
    v: &[f64],
    tol: f64,
    max_dim: usize,
) -> Result<(Vec<f64>, KrylovStats)> {
    let (mut w, ln_scale, stats) = krylov_expv_scaled(m, v, tol, max_dim)?;
    let factor = ln_scale.exp();
    for x in w.iter_mut() {
        *x *= factor;
    }
    Ok((w, stats))
}

/// Like [`krylov_expv`] but represents the result as e^{ln_scale} · w̃,
/// renormalizing between substeps so the factorization stays finite when
/// exp(M) v overflows.
pub fn krylov_expv_scaled<M: MatVec + ?Sized>(
    m: &M,
    v: &[f64],
    tol: f64,
    max_dim: usize,
) -> Result<(Vec<f64>, f64, KrylovStats)> {
    let n = m.dim();
    assert_eq!(v.len(), n);
    let beta0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if beta0 == 0.0 {
        return Ok((
            vec![0.0; n],
            0.0,
            KrylovStats {
                substeps: 0,
                matvecs: 0,
                error_estimate: 0.0,
            },
        ));
    }
    // upper bound for ||M||_inf to pick the first substep
    let ones = vec![1.0; n];
    let mut row = vec![0.0; n];
    m.apply(&ones, &mut row);
    let anorm = row.iter().cloned().fold(0.0, f64::max).max(1e-30);

    let m_dim = max_dim.max(2).min(n);
    let mut w = v.to_vec();
    let mut ln_scale = 0.0f64;
    let mut t_done = 0.0f64;
    let mut tau = (1.0f64).min(m_dim as f64 / (2.0 * anorm));
    let mut err_total = 0.0f64;
    let mut substeps = 0usize;
    let mut matvecs = 0usize;
    const MAX_SUBSTEPS: usize = 10_000;

    // one substep grows the iterate by at most e^{tau * anorm}; capping the
    // exponent keeps every intermediate finite given unit-norm iterates
    let tau_cap = 550.0 / anorm;
    while t_done < 1.0 {
        if substeps >= MAX_SUBSTEPS {
            return Err(Error::Numerical(format!(
                "Krylov exponential did not converge: {substeps} substeps used, \
                 accumulated error estimate {err_total:.3e}"
            )));
        }
        tau = tau.min(1.0 - t_done).min(tau_cap);
        let beta = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if beta == 0.0 {
            break;
        }
        // Arnoldi on the current vector
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_dim + 1);
        basis.push(w.iter().map(|x| x / beta).collect());
        let mut h = vec![vec![0.0f64; m_dim]; m_dim + 1];
        let mut k_used = m_dim;
        let mut happy = false;
        for j in 0..m_dim {
            let mut cand = vec![0.0; n];
            m.apply(&basis[j], &mut cand);
            matvecs += 1;
            // modified Gram-Schmidt with one reorthogonalization pass
            for _pass in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c: f64 = q.iter().zip(&cand).map(|(a, b)| a * b).sum();
                    if c != 0.0 {
                        for (ci, qi) in cand.iter_mut().zip(q) {
                            *ci -= c * qi;
                        }
                    }
                    h[i][j] += c;
                }
            }
            let hn = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
            h[j + 1][j] = hn;
            if hn <= 1e-12 * anorm.max(1.0) {
                k_used = j + 1;
                happy = true;
                break;
            }
            for c in cand.iter_mut() {
                *c /= hn;
            }
            basis.push(cand);
        }

        // exp(tau * H) on the small Hessenberg block, carried as
        // e^{f_ln} * f so the scale-back cannot overflow
        let mut hk = DenseMatrix::zeros(k_used, k_used);
        for i in 0..k_used {
            for j in 0..k_used {
                hk.set(i, j, tau * h[i][j]);
            }
        }
        let (f, f_ln) = matrix_exponential_scaled(&hk)?;
        let fe1_norm = (0..k_used)
            .map(|j| f.get(j, 0) * f.get(j, 0))
            .sum::<f64>()
            .sqrt()
            .max(1e-300);
        // a-posteriori local error relative to the produced vector
        let err_rel = if happy {
            0.0
        } else {
            (tau * h[k_used][k_used - 1] * f.get(k_used - 1, 0)).abs() / fe1_norm
        };
        let budget = tol * tau;
        if !happy && err_rel > budget && tau > 1e-12 {
            // reject and shrink
            tau *= 0.5
                * (budget / err_rel)
                    .powf(1.0 / (k_used as f64))
                    .clamp(0.1, 0.9);
            substeps += 1;
            continue;
        }
        // accept: w = e^{f_ln} * beta * V_k * exp_scaled(tau H) e1
        let mut next = vec![0.0; n];
        for (j, q) in basis.iter().take(k_used).enumerate() {
            let coef = beta * f.get(j, 0);
            if coef != 0.0 {
                for (ni, qi) in next.iter_mut().zip(q) {
                    *ni += coef * qi;
                }
            }
        }
        ln_scale += f_ln;
        w = next;
        t_done += tau;
        err_total += err_rel;
        substeps += 1;
        // keep the iterate at unit norm, folding the growth into ln_scale
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            for x in w.iter_mut() {
                *x /= norm;
            }
            ln_scale += norm.ln();
        } else {
            return Err(Error::Numerical(format!(
                "Krylov exponential produced a non-finite iterate at t = {t_done}"
            )));
        }
        if !happy && err_rel > 0.0 {
            let grow = (budget / err_rel).powf(1.0 / (k_used as f64)).min(2.0);
            tau *= 0.9 * grow.max(0.2);
        } else {
            tau *= 2.0;
        }
    }
    Ok((
        w,
        ln_scale,
        KrylovStats {
            substeps,
            matvecs,
            error_estimate: err_total,
        },
    ))
}

/// 1ᵀ exp(M) 1 − n through the Krylov approximation of exp(M)·1.
pub fn total_communicability_krylov<M: MatVec + ?Sized>(m: &M, tol: f64) -> Result<f64> {
    let n = m.dim();
    let ones = vec![1.0; n];
    let (w, ln_scale, _stats) = krylov_expv_scaled(m, &ones, tol, KRYLOV_DIM)?;
    Ok(ln_scale.exp() * w.iter().sum::<f64>() - n as f64)
}

/// ln of the Krylov total communicability, finite past linear overflow.
pub fn total_communicability_krylov_ln<M: MatVec + ?Sized>(m: &M, tol: f64) -> Result<f64> {
    let n = m.dim();
    let ones = vec![1.0; n];
    let (w, ln_scale, _stats) = krylov_expv_scaled(m, &ones, tol, KRYLOV_DIM)?;
    Ok(ln_quadratic_minus_n(ln_scale, w.iter().sum::<f64>(), n))
}

/// Total communicability of a supra-adjacency matrix: dense below
/// [`DENSE_LIMIT`], Krylov above. `tol` overrides the path's default
/// relative accuracy.
pub fn total_communicability(b: &SupraAdjacency, tol: Option<f64>) -> Result<f64> {
    let size = b.size();
    if size <= DENSE_LIMIT {
        let _ = tol.unwrap_or(DEFAULT_DENSE_TOL);
        total_communicability_dense(&b.to_dense())
    } else {
        total_communicability_krylov(b, tol.unwrap_or(DEFAULT_KRYLOV_TOL))
    }
}

/// ln tc through the same dense/Krylov path selection.
pub fn total_communicability_ln(b: &SupraAdjacency, tol: Option<f64>) -> Result<f64> {
    let size = b.size();
    if size <= DENSE_LIMIT {
        let _ = tol.unwrap_or(DEFAULT_DENSE_TOL);
        total_communicability_dense_ln(&b.to_dense())
    } else {
        total_communicability_krylov_ln(b, tol.unwrap_or(DEFAULT_KRYLOV_TOL))
    }
}

/// Pc = exp₀(ρ) · 1ᵀ(y xᵀ)1 = exp₀(ρ) · ||x||₁ ||y||₁; the rank-one matrix
/// is never materialized.
pub fn perron_communicability(t: &PerronTriple) -> f64 {
    let sx: f64 = t.x.iter().sum();
    let sy: f64 = t.y.iter().sum();
    exp0(t.rho) * sx * sy
}

/// ln Pc, finite even when exp₀(ρ) overflows.
pub fn ln_perron_communicability(t: &PerronTriple) -> f64 {
    let sx: f64 = t.x.iter().sum();
    let sy: f64 = t.y.iter().sum();
    ln_exp0(t.rho) + sx.ln() + sy.ln()
}

/// Pc^struct = exp₀(ρ) · Σ_{(i,j)∈S} y_i x_j.
pub fn structured_perron_communicability(t: &PerronTriple, s: &SparsityPattern) -> Result<f64> {
    let w = spectral::wilkinson(t);
    Ok(exp0(t.rho) * w.projected_ones_quadratic(s)?)
}

pub fn ln_structured_perron_communicability(t: &PerronTriple, s: &SparsityPattern) -> Result<f64> {
    let w = spectral::wilkinson(t);
    Ok(ln_exp0(t.rho) + w.projected_ones_quadratic(s)?.ln())
}

/// All headline communicability quantities for one supra-adjacency
/// matrix, with the Perron bounds evaluated both linearly and in log
/// form.
#[derive(Debug, Clone, Serialize)]
pub struct CommunicabilityReport {
    pub size: usize,
    pub tc: f64,
    pub pc: f64,
    pub pc_struct: f64,
    pub rho: f64,
    pub kappa: f64,
    pub kappa_struct: f64,
    /// exp₀(ρ) ≤ Pc
    pub bound_lo: f64,
    /// Pc ≤ NL·exp₀(ρ)
    pub bound_hi: f64,
    /// Pc^struct ≤ NL·exp₀(ρ)·κ^struct/κ
    pub bound_hi_struct: f64,
    /// tc / (κ·Pc), near 1 when ρ dominates the spectrum
    pub approx_ratio: f64,
    pub ln_tc: f64,
    pub ln_pc: f64,
    pub ln_pc_struct: f64,
    pub ln_bound_lo: f64,
    pub ln_bound_hi: f64,
    pub ln_bound_hi_struct: f64,
    /// empty unless a bound is violated, which would indicate solver failure
    pub violations: Vec<String>,
}

const BOUND_LOG_TOL: f64 = 1e-10;

/// Assembles tc, Pc, Pc^struct, κ, κ^struct and the bracketing bounds for
/// B(γ) with the intra-layer pattern `s`.
pub fn communicability_report(
    b: &SupraAdjacency,
    s: &SparsityPattern,
    triple: &PerronTriple,
    tol: Option<f64>,
) -> Result<CommunicabilityReport> {
    let size = b.size();
    let tc = total_communicability(b, tol)?;
    let ln_tc = total_communicability_ln(b, tol)?;
    let pc = perron_communicability(triple);
    let pc_struct = structured_perron_communicability(triple, s)?;
    let kappa = spectral::condition_number(triple)?;
    let kappa_struct = spectral::structured_condition_number(triple, s)?;
    let rho = triple.rho;
    let nl = size as f64;
    let bound_lo = exp0(rho);
    let bound_hi = nl * exp0(rho);
    let bound_hi_struct = nl * exp0(rho) * kappa_struct / kappa;

    let ln_pc = ln_perron_communicability(triple);
    let ln_pc_struct = ln_structured_perron_communicability(triple, s)?;
    let ln_bound_lo = ln_exp0(rho);
    let ln_bound_hi = nl.ln() + ln_exp0(rho);
    let ln_bound_hi_struct = nl.ln() + ln_exp0(rho) + (kappa_struct / kappa).ln();
    // evaluate the surrogate-quality ratio in log space so it survives
    // linear overflow of tc and Pc
    let approx_ratio = if tc.is_finite() && pc.is_finite() {
        tc / (kappa * pc)
    } else {
        (ln_tc - kappa.ln() - ln_pc).exp()
    };

    let mut violations = Vec::new();
    if ln_bound_lo > ln_pc + BOUND_LOG_TOL {
        violations.push(format!(
            "lower bound violated: ln exp0(rho) = {ln_bound_lo} > ln Pc = {ln_pc}"
        ));
    }
    if ln_pc > ln_bound_hi + BOUND_LOG_TOL {
        violations.push(format!(
            "upper bound violated: ln Pc = {ln_pc} > ln(NL exp0(rho)) = {ln_bound_hi}"
        ));
    }
    if ln_pc_struct > ln_pc + BOUND_LOG_TOL {
        violations.push(format!(
            "structured Pc exceeds Pc: {ln_pc_struct} > {ln_pc}"
        ));
    }
    if ln_pc_struct > ln_bound_hi_struct + BOUND_LOG_TOL {
        violations.push(format!(
            "structured upper bound violated: {ln_pc_struct} > {ln_bound_hi_struct}"
        ));
    }
    if kappa_struct > kappa * (1.0 + BOUND_LOG_TOL) {
        violations.push(format!(
            "structured condition number exceeds unstructured: {kappa_struct} > {kappa}"
        ));
    }

    Ok(CommunicabilityReport {
        size,
        tc,
        pc,
        pc_struct,
        rho,
        kappa,
        kappa_struct,
        bound_lo,
        bound_hi,
        bound_hi_struct,
        approx_ratio,
        ln_tc,
        ln_pc,
        ln_pc_struct,
        ln_bound_lo,
        ln_bound_hi,
        ln_bound_hi_struct,
        violations,
    })
}
