//! Perron root and vector computation, Wilkinson perturbations, and
//! unstructured/structured condition numbers of the Perron root.

use crate::dense::{DenseMatrix, MatVec};
use crate::error::{Error, Result};
use crate::multiplex::SparsityPattern;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Perron root with unit-Euclidean-norm right/left Perron vectors and
/// residual diagnostics. For irreducible input both vectors are entrywise
/// positive.
#[derive(Debug, Clone)]
pub struct PerronTriple {
    pub rho: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub residual_right: f64,
    pub residual_left: f64,
    pub iterations: usize,
    /// Whether the positive-entry digraph was strongly connected. The
    /// solver proceeds either way; callers may warn.
    pub irreducible: bool,
}

impl PerronTriple {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// yᵀx, the reciprocal of the Perron-root condition number.
    pub fn y_dot_x(&self) -> f64 {
        dot(&self.y, &self.x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two-sided power iteration with a deterministic all-ones start.
///
/// The iteration runs on M + σI with σ half the smaller of the maximum row
/// and column sums, which makes the Perron root strictly dominant even for
/// periodic (e.g. bipartite) matrices without changing the eigenvectors.
/// Residuals are measured against the unshifted matrix and must both drop
/// below `tol * ||M||_F`.
pub fn perron<M: MatVec + ?Sized>(m: &M, tol: f64, max_iter: usize) -> Result<PerronTriple> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::Dimension("empty matrix has no Perron root".into()));
    }
    if m.has_negative_entry() {
        return Err(Error::Data(
            "Perron computation requires a nonnegative matrix".into(),
        ));
    }
    let frob = m.frobenius_norm();
    if frob == 0.0 {
        return Err(Error::Numerical(
            "zero matrix has no positive Perron root".into(),
        ));
    }
    let irreducible = m.strongly_connected();

    let ones = vec![1.0; n];
    let mut row_sums = vec![0.0; n];
    let mut col_sums = vec![0.0; n];
    m.apply(&ones, &mut row_sums);
    m.apply_transpose(&ones, &mut col_sums);
    let max_row = row_sums.iter().cloned().fold(0.0, f64::max);
    let max_col = col_sums.iter().cloned().fold(0.0, f64::max);
    let sigma = 0.5 * max_row.min(max_col);

    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let mut u = vec![inv_sqrt_n; n];
    let mut v = vec![inv_sqrt_n; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let target = tol * frob;
    let mut best = f64::INFINITY;

    for iter in 0..=max_iter {
        m.apply(&u, &mut w);
        m.apply_transpose(&v, &mut z);
        let vtu = dot(&v, &u);
        let rho = if vtu > 1e-8 {
            dot(&v, &w) / vtu
        } else {
            dot(&u, &w)
        };
        let res_r = {
            let mut s = 0.0;
            for i in 0..n {
                let d = w[i] - rho * u[i];
                s += d * d;
            }
            s.sqrt()
        };
        let res_l = {
            let mut s = 0.0;
            for i in 0..n {
                let d = z[i] - rho * v[i];
                s += d * d;
            }
            s.sqrt()
        };
        best = best.min(res_r.max(res_l));
        if res_r <= target && res_l <= target {
            if !(rho > 0.0) {
                return Err(Error::Numerical(format!(
                    "Perron iteration converged to nonpositive value {rho}"
                )));
            }
            return Ok(PerronTriple {
                rho,
                x: u,
                y: v,
                residual_right: res_r,
                residual_left: res_l,
                iterations: iter,
                irreducible,
            });
        }
        // shifted update
        for i in 0..n {
            w[i] += sigma * u[i];
            z[i] += sigma * v[i];
        }
        let nw = norm2(&w);
        let nz = norm2(&z);
        if nw == 0.0 || nz == 0.0 {
            return Err(Error::Numerical(
                "Perron iteration collapsed to the zero vector".into(),
            ));
        }
        for i in 0..n {
            u[i] = w[i] / nw;
            v[i] = z[i] / nz;
        }
    }
    Err(Error::Numerical(format!(
        "Perron iteration did not converge within {max_iter} iterations \
         (best residual {best:.3e}, target {target:.3e})"
    )))
}

/// Rank-one worst-case perturbation y·xᵀ of the Perron root. Entries are
/// produced on demand; the matrix is never materialized unless asked to.
#[derive(Debug, Clone)]
pub struct WilkinsonMatrix {
    y: Vec<f64>,
    x: Vec<f64>,
}

impl WilkinsonMatrix {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.y[i] * self.x[j]
    }

    /// ||y xᵀ||_F = ||y||₂ ||x||₂ (1 for unit Perron vectors).
    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.y) * norm2(&self.x)
    }

    /// 1ᵀ (y xᵀ) 1 = ||y||₁ ||x||₁ for nonnegative vectors.
    pub fn ones_quadratic(&self) -> f64 {
        let sy: f64 = self.y.iter().sum();
        let sx: f64 = self.x.iter().sum();
        sy * sx
    }

    /// Frobenius norm of the projection onto the pattern, enumerating
    /// pattern positions only.
    pub fn projected_frobenius(&self, s: &SparsityPattern) -> Result<f64> {
        self.check_dim(s)?;
        let mut acc = 0.0;
        for (r, c) in s.positions() {
            let e = self.entry(r, c);
            acc += e * e;
        }
        Ok(acc.sqrt())
    }

    /// 1ᵀ (y xᵀ)|_S 1 over pattern positions only.
    pub fn projected_ones_quadratic(&self, s: &SparsityPattern) -> Result<f64> {
        self.check_dim(s)?;
        Ok(s.positions().map(|(r, c)| self.entry(r, c)).sum())
    }

    /// Largest entry over the pattern; ties resolve to the lexicographically
    /// smallest position.
    pub fn max_entry_on(&self, s: &SparsityPattern) -> Result<Option<(usize, usize, f64)>> {
        self.check_dim(s)?;
        let mut top: Option<(usize, usize, f64)> = None;
        for (r, c) in s.positions() {
            let e = self.entry(r, c);
            match top {
                Some((_, _, best)) if e <= best => {}
                _ => top = Some((r, c, e)),
            }
        }
        Ok(top)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.entry(i, j));
            }
        }
        m
    }

    fn check_dim(&self, s: &SparsityPattern) -> Result<()> {
        if s.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "pattern dimension {} does not match Wilkinson dimension {}",
                s.dim(),
                self.dim()
            )));
        }
        Ok(())
    }
}

pub fn wilkinson(t: &PerronTriple) -> WilkinsonMatrix {
    WilkinsonMatrix {
        y: t.y.clone(),
        x: t.x.clone(),
    }
}

const DEGENERATE_YTX: f64 = 1e-14;

/// κ(ρ) = 1 / yᵀx ≥ 1 for unit Perron vectors; equals 1 for symmetric
/// input.
pub fn condition_number(t: &PerronTriple) -> Result<f64> {
    let ytx = t.y_dot_x();
    if ytx <= DEGENERATE_YTX {
        return Err(Error::Numerical(format!(
            "yᵀx = {ytx:.3e} is below machine precision; the condition number is meaningless"
        )));
    }
    Ok(1.0 / ytx)
}

/// κ^struct(ρ) = ||(y xᵀ)|_S||_F / yᵀx = κ(ρ) · ||(y xᵀ)|_S||_F ≤ κ(ρ).
pub fn structured_condition_number(t: &PerronTriple, s: &SparsityPattern) -> Result<f64> {
    let ytx = t.y_dot_x();
    if ytx <= DEGENERATE_YTX {
        return Err(Error::Numerical(format!(
            "yᵀx = {ytx:.3e} is below machine precision; the condition number is meaningless"
        )));
    }
    let w = wilkinson(t);
    Ok(w.projected_frobenius(s)? / ytx)
}

/// First-order Perron-root shift ε · yᵀEx / yᵀx under M + εE.
pub fn rho_perturbation_estimate(t: &PerronTriple, e: &DenseMatrix, eps: f64) -> Result<f64> {
    if !e.is_square() || e.rows() != t.dim() {
        return Err(Error::Dimension(format!(
            "perturbation direction is {}x{}, expected {n}x{n}",
            e.rows(),
            e.cols(),
            n = t.dim()
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::Data(format!("eps must be positive, got {eps}")));
    }
    let ytx = t.y_dot_x();
    if ytx <= DEGENERATE_YTX {
        return Err(Error::Numerical(format!(
            "yᵀx = {ytx:.3e} is below machine precision"
        )));
    }
    let mut ex = vec![0.0; t.dim()];
    e.matvec(&t.x, &mut ex);
    Ok(eps * dot(&t.y, &ex) / ytx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycle() -> DenseMatrix {
        DenseMatrix::from_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0])
    }

    #[test]
    fn perron_symmetric_permutation() {
        let t = perron(&two_cycle(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((t.rho - 1.0).abs() < 1e-12);
        let s = 0.5_f64.sqrt();
        for i in 0..2 {
            assert!((t.x[i] - s).abs() < 1e-12);
            assert!((t.y[i] - s).abs() < 1e-12);
        }
        assert!(t.irreducible);
    }

    #[test]
    fn perron_periodic_directed() {
        // eigenvalues ±sqrt(2); plain power iteration oscillates, the shift
        // must still converge
        let m = DenseMatrix::from_vec(2, 2, vec![0.0, 2.0, 1.0, 0.0]);
        let t = perron(&m, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((t.rho - 2.0_f64.sqrt()).abs() < 1e-10, "rho = {}", t.rho);
        assert!(t.residual_right <= DEFAULT_TOL * m.frobenius_norm());
        assert!(t.residual_left <= DEFAULT_TOL * m.frobenius_norm());
        assert!(t.x.iter().all(|&v| v > 0.0));
        assert!(t.y.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn perron_rejects_bad_input() {
        let m = DenseMatrix::from_vec(2, 2, vec![0.0, -1.0, 1.0, 0.0]);
        assert!(perron(&m, DEFAULT_TOL, 100).is_err());
        let z = DenseMatrix::zeros(2, 2);
        assert!(perron(&z, DEFAULT_TOL, 100).is_err());
    }

    #[test]
    fn perron_nonconvergence_reports_residual() {
        let m = DenseMatrix::from_vec(2, 2, vec![0.0, 2.0, 1.0, 0.0]);
        let err = perron(&m, 1e-15, 1).unwrap_err().to_string();
        assert!(err.contains("did not converge"), "{err}");
        assert!(err.contains("residual"), "{err}");
    }

    #[test]
    fn wilkinson_identities() {
        let t = perron(&two_cycle(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let w = wilkinson(&t);
        // x = y = (0.7071, 0.7071) -> W = ones(2)/2
        for i in 0..2 {
            for j in 0..2 {
                assert!((w.entry(i, j) - 0.5).abs() < 1e-12);
            }
        }
        assert!((w.frobenius_norm() - 1.0).abs() < 1e-12);
        let sx: f64 = t.x.iter().sum();
        let sy: f64 = t.y.iter().sum();
        assert!((w.ones_quadratic() - sx * sy).abs() < 1e-12);
    }

    #[test]
    fn condition_numbers() {
        let t = perron(&two_cycle(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let k = condition_number(&t).unwrap();
        assert!((k - 1.0).abs() < 1e-10);
        // full pattern: structured equals unstructured
        let full = SparsityPattern::full(2);
        let ks = structured_condition_number(&t, &full).unwrap();
        assert!((ks - k).abs() < 1e-12);
        // any pattern: structured <= unstructured
        let part = SparsityPattern::from_positions(2, [(0usize, 1usize)]).unwrap();
        let ks = structured_condition_number(&t, &part).unwrap();
        assert!(ks <= k + 1e-12);
        // dimension mismatch
        let wrong = SparsityPattern::full(3);
        assert!(structured_condition_number(&t, &wrong).is_err());
    }

    #[test]
    fn perturbation_estimate_rank_one_alignment() {
        let t = perron(&two_cycle(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let e = DenseMatrix::from_vec(2, 2, vec![0.5; 4]);
        let est = rho_perturbation_estimate(&t, &e, 0.01).unwrap();
        assert!((est - 0.01).abs() < 1e-12);
        // exact shift: rho(A + 0.01 * ones/2) = 1.01
        let mut m = two_cycle();
        m.add_scaled(0.01, &e);
        let t2 = perron(&m, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((t2.rho - 1.01).abs() < 1e-10);
        // Wilkinson direction gives the worst case eps * kappa
        let w = wilkinson(&t);
        let est_w = rho_perturbation_estimate(&t, &w.to_dense(), 0.01).unwrap();
        let kappa = condition_number(&t).unwrap();
        assert!((est_w - 0.01 * kappa).abs() < 1e-12);
    }

    #[test]
    fn projected_wilkinson_maximizes_over_cone_directions() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..5 {
            let n = 5;
            let mut data = vec![0.0; n * n];
            for v in data.iter_mut() {
                *v = rng.random_range(0.1..2.0);
            }
            let m = DenseMatrix::from_vec(n, n, data);
            let t = perron(&m, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
            let w = wilkinson(&t);
            // random sparsity pattern with at least one position
            let mut positions = Vec::new();
            for r in 0..n {
                for c in 0..n {
                    if rng.random_range(0.0..1.0) < 0.4 {
                        positions.push((r, c));
                    }
                }
            }
            if positions.is_empty() {
                positions.push((0, 1));
            }
            let s = SparsityPattern::from_positions(n, positions.clone()).unwrap();
            // the normalized projected Wilkinson direction attains ||W|_S||_F
            let best = w.projected_frobenius(&s).unwrap();
            for _ in 0..1000 {
                let mut e = vec![0.0f64; positions.len()];
                let mut nrm = 0.0f64;
                for v in e.iter_mut() {
                    *v = rng.random_range(0.0..1.0);
                    nrm += *v * *v;
                }
                let nrm = nrm.sqrt();
                let ytex: f64 = positions
                    .iter()
                    .zip(&e)
                    .map(|(&(r, c), &v)| t.y[r] * v * t.x[c])
                    .sum::<f64>()
                    / nrm;
                assert!(
                    ytex <= best + 1e-12,
                    "cone direction beats projected Wilkinson: {ytex} > {best}"
                );
            }
        }
    }

    #[test]
    fn symmetric_input_gives_equal_left_and_right_vectors() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..10 {
            let n = rng.random_range(3..=8);
            let mut m = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random_range(0.0..1.0) < 0.6 {
                        let w = rng.random_range(0.5..2.0);
                        m.set(i, j, w);
                        m.set(j, i, w);
                    }
                }
            }
            if m.frobenius_norm() == 0.0 {
                continue;
            }
            let t = match perron(&m, DEFAULT_TOL, DEFAULT_MAX_ITER) {
                Ok(t) => t,
                Err(_) => continue, // reducible draws may legitimately stall
            };
            let diff: f64 =
                t.x.iter()
                    .zip(&t.y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
            assert!(diff <= 10.0 * DEFAULT_TOL, "||x - y|| = {diff}");
        }
    }

    #[test]
    fn max_entry_on_pattern_is_deterministic() {
        let t = perron(&two_cycle(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let w = wilkinson(&t);
        let full = SparsityPattern::full(2);
        // all four entries tie at 0.5; lexicographically smallest wins
        let (r, c, v) = w.max_entry_on(&full).unwrap().unwrap();
        assert_eq!((r, c), (0, 0));
        assert!((v - 0.5).abs() < 1e-12);
    }
}
