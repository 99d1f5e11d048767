//! Efficiency matrices, multiplex global K-efficiency, harmonic
//! centralities, and the identity/bound certificates tying them to the
//! Perron root.

use serde::Serialize;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::tropical::PathLengthMatrix;

/// Entrywise reciprocals of a path-length matrix (1/∞ = 0), zero diagonal.
#[derive(Debug, Clone)]
pub struct EfficiencyMatrix {
    pub k: usize,
    matrix: DenseMatrix,
}

impl EfficiencyMatrix {
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }
}

pub fn efficiency_matrix(p: &PathLengthMatrix) -> EfficiencyMatrix {
    let n = p.n();
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let len = p.length(i, j);
            if len.is_finite() {
                m.set(i, j, 1.0 / len);
            }
        }
    }
    EfficiencyMatrix {
        k: p.k(),
        matrix: m,
    }
}

/// e^K = (1/(N(N−1))) · 1ᵀ P^K_{−1} 1. Disconnected pairs contribute zero.
pub fn global_k_efficiency(q: &EfficiencyMatrix) -> Result<f64> {
    let n = q.n();
    if n < 2 {
        return Err(Error::Data(
            "global efficiency needs at least two vertices".into(),
        ));
    }
    let total: f64 = q.matrix.data().iter().sum();
    Ok(total / (n as f64 * (n as f64 - 1.0)))
}

/// (h_in, h_out): column sums and row sums of the efficiency matrix.
pub fn harmonic_centralities(q: &EfficiencyMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = q.n();
    let mut h_in = vec![0.0; n];
    let mut h_out = vec![0.0; n];
    for i in 0..n {
        let row = q.matrix.row(i);
        for (j, v) in row.iter().enumerate() {
            h_out[i] += v;
            h_in[j] += v;
        }
    }
    (h_in, h_out)
}

/// Pass/fail report for the efficiency identities and Perron-root bounds.
#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyCertificates {
    pub n: usize,
    pub k: usize,
    pub e_k: f64,
    pub h_in_l1: f64,
    pub h_out_l1: f64,
    /// relative error of N(N−1)·e^K against ||h_in||₁ and ||h_out||₁
    pub identity_in_rel_err: f64,
    pub identity_out_rel_err: f64,
    pub rho_k: f64,
    pub h_in_max: f64,
    pub h_out_max: f64,
    /// min(||h_in||_∞, ||h_out||_∞) − ρ_K, nonnegative when the bound holds
    pub harmonic_bound_slack: f64,
    /// N(N−1)·e^K − ρ_K, nonnegative when the bound holds
    pub global_bound_slack: f64,
    pub identities_hold: bool,
    pub harmonic_bound_holds: bool,
    pub global_bound_holds: bool,
    pub all_hold: bool,
}

const IDENTITY_REL_TOL: f64 = 1e-12;

/// Evaluates the three certificates for an efficiency matrix whose Perron
/// root is `rho_k`: the harmonic-centrality identity and the two
/// Perron-root upper bounds.
pub fn efficiency_certificates(q: &EfficiencyMatrix, rho_k: f64) -> Result<EfficiencyCertificates> {
    let n = q.n();
    let e_k = global_k_efficiency(q)?;
    let (h_in, h_out) = harmonic_centralities(q);
    let h_in_l1: f64 = h_in.iter().sum();
    let h_out_l1: f64 = h_out.iter().sum();
    let h_in_max = h_in.iter().cloned().fold(0.0, f64::max);
    let h_out_max = h_out.iter().cloned().fold(0.0, f64::max);
    let scale = n as f64 * (n as f64 - 1.0) * e_k;
    let rel = |a: f64, b: f64| {
        let denom = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        (a - b).abs() / denom
    };
    let identity_in_rel_err = if scale == 0.0 && h_in_l1 == 0.0 {
        0.0
    } else {
        rel(scale, h_in_l1)
    };
    let identity_out_rel_err = if scale == 0.0 && h_out_l1 == 0.0 {
        0.0
    } else {
        rel(scale, h_out_l1)
    };
    let harmonic_bound_slack = h_in_max.min(h_out_max) - rho_k;
    let global_bound_slack = scale - rho_k;
    let bound_tol = 1e-10 * scale.max(1.0);
    let identities_hold =
        identity_in_rel_err <= IDENTITY_REL_TOL && identity_out_rel_err <= IDENTITY_REL_TOL;
    let harmonic_bound_holds = harmonic_bound_slack >= -bound_tol;
    let global_bound_holds = global_bound_slack >= -bound_tol;
    Ok(EfficiencyCertificates {
        n,
        k: q.k,
        e_k,
        h_in_l1,
        h_out_l1,
        identity_in_rel_err,
        identity_out_rel_err,
        rho_k,
        h_in_max,
        h_out_max,
        harmonic_bound_slack,
        global_bound_slack,
        identities_hold,
        harmonic_bound_holds,
        global_bound_holds,
        all_hold: identities_hold && harmonic_bound_holds && global_bound_holds,
    })
}
