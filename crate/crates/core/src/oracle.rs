//! Independent brute-force references used by tests and diagnostics:
//! an exact layer-state shortest-path dynamic program, a dense matrix
//! exponential quadratic form, and a dense eigendecomposition. These are
//! deliberately separate code paths from the production kernels; size
//! guards fail loudly.

use nalgebra::DMatrix;

use crate::dense::{DenseMatrix, MatVec};
use crate::error::{Error, Result};
use crate::multiplex::{CouplingParameter, MultiplexTensor};
use crate::spectral::PerronTriple;

const MAX_PATH_VERTICES: usize = 64;
const MAX_EXP_SIZE: usize = 1000;
const MAX_EIG_SIZE: usize = 500;

/// Exact minimum cost over all layer-assigned walks with at most `k`
/// intra-layer edges, by dynamic programming over (vertex, last-edge layer)
/// states. The start state carries no layer, so the first edge never pays
/// a switch.
pub fn exact_k_path_lengths(
    t: &MultiplexTensor,
    g: &CouplingParameter,
    k: usize,
) -> Result<DenseMatrix> {
    let n = t.n_vertices();
    if n > MAX_PATH_VERTICES {
        return Err(Error::Data(format!(
            "exact path oracle is limited to {MAX_PATH_VERTICES} vertices, got {n}"
        )));
    }
    let l = t.n_layers();
    let switch = g.switch_cost();
    let states = l + 1; // state 0 = no layer yet
    let edges: Vec<(usize, usize, usize, f64)> = t
        .entries()
        .map(|(layer, s, d, w)| (layer, s, d, 1.0 / w))
        .collect();

    let mut out = DenseMatrix::zeros(n, n);
    let mut dist = vec![f64::INFINITY; n * states];
    let mut next = vec![f64::INFINITY; n * states];
    for i in 0..n {
        dist.fill(f64::INFINITY);
        dist[i * states] = 0.0;
        for _round in 0..k {
            next.copy_from_slice(&dist);
            for &(layer, h, j, cost) in &edges {
                // cheapest way to stand at h about to use `layer`
                let mut best = dist[h * states]; // fresh start
                for c in 0..l {
                    let d = dist[h * states + 1 + c];
                    let pen = if c == layer { 0.0 } else { switch };
                    let cand = d + pen;
                    if cand < best {
                        best = cand;
                    }
                }
                let cand = best + cost;
                let slot = j * states + 1 + layer;
                if cand < next[slot] {
                    next[slot] = cand;
                }
            }
            std::mem::swap(&mut dist, &mut next);
        }
        for j in 0..n {
            let best = dist[j * states..(j + 1) * states]
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            out.set(i, j, if i == j { 0.0 } else { best });
        }
    }
    Ok(out)
}

/// 1ᵀ exp(B) 1 − n via the reference dense matrix exponential.
pub fn dense_exp_quadratic_form(b: &DenseMatrix) -> Result<f64> {
    if !b.is_square() {
        return Err(Error::Dimension(
            "exponential quadratic form needs a square matrix".into(),
        ));
    }
    let n = b.rows();
    if n > MAX_EXP_SIZE {
        return Err(Error::Data(format!(
            "dense exponential oracle is limited to size {MAX_EXP_SIZE}, got {n}"
        )));
    }
    let m = DMatrix::from_row_slice(n, n, b.data());
    let e = m.exp();
    Ok(e.sum() - n as f64)
}

/// Dense Perron reference plus the second-largest eigenvalue modulus for
/// spectral-gap diagnostics.
#[derive(Debug, Clone)]
pub struct DensePerron {
    pub triple: PerronTriple,
    /// largest non-Perron eigenvalue modulus from a bounded Schur
    /// decomposition; NaN when the QR iteration did not converge within
    /// its iteration budget (happens for strongly clustered spectra)
    pub second_modulus: f64,
}

/// Dense Perron reference. The Perron pair is computed by Noda iteration
/// (shift-and-invert from above with Collatz-Wielandt shifts), which
/// converges for nonnegative matrices regardless of how clustered the
/// rest of the spectrum is. The full eigenvalue list for the spectral-gap
/// diagnostic comes from a Schur decomposition with a bounded iteration
/// budget.
pub fn dense_perron(m: &DenseMatrix) -> Result<DensePerron> {
    if !m.is_square() {
        return Err(Error::Dimension("Perron of a non-square matrix".into()));
    }
    let n = m.rows();
    if n > MAX_EIG_SIZE {
        return Err(Error::Data(format!(
            "dense eigendecomposition oracle is limited to size {MAX_EIG_SIZE}, got {n}"
        )));
    }
    if n == 0 {
        return Err(Error::Dimension("empty matrix has no Perron root".into()));
    }
    if m.has_negative_entry() {
        return Err(Error::Data(
            "Perron computation requires a nonnegative matrix".into(),
        ));
    }
    let a = DMatrix::from_row_slice(n, n, m.data());
    let at = a.transpose();
    let frob = m.frobenius_norm();
    let (_, x, iters_r) = noda_iteration(&a, frob)?;
    let (_, y, iters_l) = noda_iteration(&at, frob)?;

    // two-sided Rayleigh quotient for the final root estimate
    let xv = DMatrix::from_column_slice(n, 1, &x);
    let yv = DMatrix::from_column_slice(n, 1, &y);
    let ax = &a * &xv;
    let ytx: f64 = y.iter().zip(&x).map(|(p, q)| p * q).sum();
    let ytax: f64 = y.iter().zip(ax.iter()).map(|(p, q)| p * q).sum();
    let rho = if ytx.abs() > 1e-13 {
        ytax / ytx
    } else {
        x.iter().zip(ax.iter()).map(|(p, q)| p * q).sum()
    };
    if !(rho > 0.0) {
        return Err(Error::Numerical(format!(
            "dense reference found no positive dominant eigenvalue ({rho:.3e})"
        )));
    }
    let residual_right = (&ax - &xv * rho).norm();
    let residual_left = (&at * &yv - &yv * rho).norm();

    let second_modulus = match nalgebra::linalg::Schur::try_new(a, 1e-12, 100_000) {
        Some(schur) => {
            let eigs = schur.complex_eigenvalues();
            // drop the single eigenvalue closest to the Perron root
            let mut drop_idx = 0;
            let mut best = f64::INFINITY;
            for (i, e) in eigs.iter().enumerate() {
                let d = (e.re - rho).abs() + e.im.abs();
                if d < best {
                    best = d;
                    drop_idx = i;
                }
            }
            eigs.iter()
                .enumerate()
                .filter(|&(i, _)| i != drop_idx)
                .map(|(_, e)| e.norm())
                .fold(0.0, f64::max)
        }
        None => f64::NAN,
    };

    Ok(DensePerron {
        triple: PerronTriple {
            rho,
            x,
            y,
            residual_right,
            residual_left,
            iterations: iters_r.max(iters_l),
            irreducible: m.strongly_connected(),
        },
        second_modulus,
    })
}

/// Noda iteration: x_{k+1} ∝ (μ_k I − A)⁻¹ x_k with μ_k the Collatz-
/// Wielandt upper bound max_i (A x_k)_i / (x_k)_i. The bracket
/// [min ratio, max ratio] pinches onto ρ; iterates stay nonnegative.
fn noda_iteration(a: &DMatrix<f64>, frob: f64) -> Result<(f64, Vec<f64>, usize)> {
    let n = a.nrows();
    let mut x = DMatrix::from_element(n, 1, 1.0 / (n as f64).sqrt());
    let target = 1e-13 * frob.max(1.0);
    let mut theta = 0.0;
    for iter in 0..200 {
        let ax = a * &x;
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for i in 0..n {
            if x[(i, 0)] > 1e-300 {
                let r = ax[(i, 0)] / x[(i, 0)];
                hi = hi.max(r);
                lo = lo.min(r);
            }
        }
        if !(hi > 0.0) {
            return Err(Error::Numerical(
                "zero matrix has no positive Perron root".into(),
            ));
        }
        theta = x.iter().zip(ax.iter()).map(|(p, q)| p * q).sum();
        let res = (&ax - &x * theta).norm();
        if res <= target || hi - lo <= 1e-15 * hi.abs() {
            return Ok((theta, x.iter().cloned().collect(), iter));
        }
        let shifted = DMatrix::<f64>::identity(n, n) * hi - a;
        let mut next = x.clone();
        if !shifted.lu().solve_mut(&mut next) {
            // mu hit rho to machine precision: current x is the vector
            return Ok((theta, x.iter().cloned().collect(), iter));
        }
        let norm = next.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Ok((theta, x.iter().cloned().collect(), iter));
        }
        next /= norm;
        // inverse of an M-matrix keeps nonnegativity; clip rounding dust
        for v in next.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        x = next;
    }
    let ax = a * &x;
    let res = (&ax - &x * theta).norm();
    if res <= 1e-8 * frob.max(1.0) {
        Ok((theta, x.iter().cloned().collect(), 200))
    } else {
        Err(Error::Numerical(format!(
            "Noda iteration stalled with residual {res:.3e}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplex::Directedness;

    /// Exhaustive enumeration of layer-assigned walks with at most `k`
    /// edges, used to validate the DP oracle on tiny instances.
    fn enumerate_min_cost(
        t: &MultiplexTensor,
        g: &CouplingParameter,
        k: usize,
        from: usize,
        to: usize,
    ) -> f64 {
        fn recurse(
            t: &MultiplexTensor,
            switch: f64,
            at: usize,
            last_layer: Option<usize>,
            budget: usize,
            cost: f64,
            to: usize,
            best: &mut f64,
        ) {
            if at == to && cost < *best {
                *best = cost;
            }
            if budget == 0 {
                return;
            }
            for (layer, s, d, w) in t.entries() {
                if s != at {
                    continue;
                }
                let pen = match last_layer {
                    Some(l) if l != layer => switch,
                    _ => 0.0,
                };
                recurse(
                    t,
                    switch,
                    d,
                    Some(layer),
                    budget - 1,
                    cost + 1.0 / w + pen,
                    to,
                    best,
                );
            }
        }
        let mut best = f64::INFINITY;
        if from == to {
            return 0.0;
        }
        recurse(t, g.switch_cost(), from, None, k, 0.0, to, &mut best);
        best
    }

    fn chain_two_layers() -> MultiplexTensor {
        // layer-1 edge v1 -> v2 weight 1, layer-2 edge v2 -> v3 weight 1
        MultiplexTensor::from_entries(&[(1, 1, 2, 1.0), (2, 2, 3, 1.0)], Directedness::Directed)
            .unwrap()
    }

    #[test]
    fn chain_switch_cost_gamma_one() {
        let t = chain_two_layers();
        let g = CouplingParameter::new(1.0).unwrap();
        let d = exact_k_path_lengths(&t, &g, 2).unwrap();
        assert_eq!(d.get(0, 2), 3.0);
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(d.get(0, 0), 0.0);
        assert_eq!(
            enumerate_min_cost(&t, &g, 2, 0, 2),
            3.0,
            "exhaustive enumeration disagrees"
        );
    }

    #[test]
    fn chain_switch_cost_gamma_two() {
        let t = chain_two_layers();
        let g = CouplingParameter::new(2.0).unwrap();
        let d = exact_k_path_lengths(&t, &g, 2).unwrap();
        assert_eq!(d.get(0, 2), 2.5);
        assert_eq!(enumerate_min_cost(&t, &g, 2, 0, 2), 2.5);
    }

    #[test]
    fn chain_same_layer_no_switch() {
        let t = MultiplexTensor::from_entries(
            &[(1, 1, 2, 1.0), (1, 2, 3, 1.0)],
            Directedness::Directed,
        )
        .unwrap();
        for gamma in [0.1, 1.0, 7.5] {
            let g = CouplingParameter::new(gamma).unwrap();
            let d = exact_k_path_lengths(&t, &g, 2).unwrap();
            assert_eq!(d.get(0, 2), 2.0);
        }
    }

    #[test]
    fn monotone_in_k_and_gamma() {
        let t = MultiplexTensor::from_entries(
            &[
                (1, 1, 2, 2.0),
                (2, 2, 3, 0.5),
                (1, 3, 4, 1.0),
                (2, 1, 4, 0.25),
                (1, 4, 1, 1.0),
            ],
            Directedness::Directed,
        )
        .unwrap();
        let g1 = CouplingParameter::new(0.5).unwrap();
        let g2 = CouplingParameter::new(2.0).unwrap();
        let n = t.n_vertices();
        for k in 1..4 {
            let dk = exact_k_path_lengths(&t, &g1, k).unwrap();
            let dk1 = exact_k_path_lengths(&t, &g1, k + 1).unwrap();
            let dg2 = exact_k_path_lengths(&t, &g2, k).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert!(dk1.get(i, j) <= dk.get(i, j));
                    // larger gamma (cheaper switches) never increases length
                    assert!(dg2.get(i, j) <= dk.get(i, j));
                }
            }
        }
    }

    #[test]
    fn size_guard() {
        let entries: Vec<(i64, i64, i64, f64)> =
            (1..=65).map(|i| (1i64, i, i % 65 + 1, 1.0)).collect();
        let t = MultiplexTensor::from_entries(&entries, Directedness::Directed).unwrap();
        let g = CouplingParameter::new(1.0).unwrap();
        assert!(exact_k_path_lengths(&t, &g, 2).is_err());
    }

    #[test]
    fn exp_quadratic_form_closed_forms() {
        // [0] -> 0
        let z = DenseMatrix::zeros(1, 1);
        assert!(dense_exp_quadratic_form(&z).unwrap().abs() < 1e-14);
        // 2-node undirected edge -> 2e - 2
        let a = DenseMatrix::from_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0]);
        let want = 2.0 * std::f64::consts::E - 2.0;
        assert!((dense_exp_quadratic_form(&a).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn dense_perron_closed_forms() {
        let a = DenseMatrix::from_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0]);
        let p = dense_perron(&a).unwrap();
        assert!((p.triple.rho - 1.0).abs() < 1e-12);
        assert!((p.second_modulus - 1.0).abs() < 1e-12);

        let a = DenseMatrix::from_vec(2, 2, vec![0.0, 2.0, 1.0, 0.0]);
        let p = dense_perron(&a).unwrap();
        assert!((p.triple.rho - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!(p.triple.x.iter().all(|&v| v > 0.0));
        assert!(p.triple.y.iter().all(|&v| v > 0.0));
    }
}
