//! Min-plus kernels and the multiplex K-path length matrix.
//!
//! Path lengths are sums of reciprocal edge weights plus 1/γ for every
//! layer switch. The K-level recursion extends shortest ≤(K−1)-edge paths
//! by one intra-layer edge and charges the switch cost only when the new
//! edge's layer differs from the last-edge layers of every known shortest
//! prefix.

use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::multiplex::{CouplingParameter, MultiplexTensor};

/// Per-entry set of layer ids, stored as a flat bitset over the whole
/// N×N matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSetMatrix {
    n: usize,
    n_layers: usize,
    words: usize,
    bits: Vec<u64>,
}

impl LayerSetMatrix {
    fn new(n: usize, n_layers: usize) -> Self {
        let words = n_layers.div_ceil(64).max(1);
        LayerSetMatrix {
            n,
            n_layers,
            words,
            bits: vec![0; n * n * words],
        }
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        (i * self.n + j) * self.words
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize, layer: usize) -> bool {
        let o = self.offset(i, j);
        self.bits[o + layer / 64] >> (layer % 64) & 1 == 1
    }

    #[inline]
    fn insert(bits: &mut [u64], words: usize, j: usize, layer: usize) {
        bits[j * words + layer / 64] |= 1 << (layer % 64);
    }

    #[inline]
    fn set_single(bits: &mut [u64], words: usize, j: usize, layer: usize) {
        let o = j * words;
        bits[o..o + words].fill(0);
        bits[o + layer / 64] = 1 << (layer % 64);
    }

    /// Sorted layer ids stored for entry (i, j).
    pub fn layers(&self, i: usize, j: usize) -> Vec<usize> {
        let o = self.offset(i, j);
        let mut out = Vec::new();
        for l in 0..self.n_layers {
            if self.bits[o + l / 64] >> (l % 64) & 1 == 1 {
                out.push(l);
            }
        }
        out
    }
}

/// Sparse view of the reciprocal-weight tensor: for every source vertex,
/// the finite off-diagonal entries (target, layer, 1/weight). Diagonal
/// entries are 0 and absent pairs are ∞ by convention.
#[derive(Debug, Clone)]
pub struct ReciprocalLengthTensor {
    n: usize,
    n_layers: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    layers: Vec<u32>,
    recips: Vec<f64>,
}

impl ReciprocalLengthTensor {
    pub fn from_tensor(t: &MultiplexTensor) -> Self {
        let n = t.n_vertices();
        let mut rows: Vec<Vec<(u32, u32, f64)>> = vec![Vec::new(); n];
        for (layer, s, d, w) in t.entries() {
            rows[s].push((d as u32, layer as u32, 1.0 / w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut layers = Vec::new();
        let mut recips = Vec::new();
        offsets.push(0);
        for row in rows.iter_mut() {
            row.sort_unstable_by_key(|&(d, l, _)| (d, l));
            for &(d, l, r) in row.iter() {
                targets.push(d);
                layers.push(l);
                recips.push(r);
            }
            offsets.push(targets.len());
        }
        ReciprocalLengthTensor {
            n,
            n_layers: t.n_layers(),
            offsets,
            targets,
            layers,
            recips,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    /// p_ij^(ℓ): 0 on the diagonal, 1/a_ij^(ℓ) where an edge exists, ∞
    /// otherwise.
    pub fn entry(&self, layer: usize, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        for idx in self.offsets[i]..self.offsets[i + 1] {
            if self.targets[idx] as usize == j && self.layers[idx] as usize == layer {
                return self.recips[idx];
            }
        }
        f64::INFINITY
    }

    #[inline]
    fn out_edges(&self, src: usize) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (self.offsets[src]..self.offsets[src + 1]).map(move |idx| {
            (
                self.targets[idx] as usize,
                self.layers[idx] as usize,
                self.recips[idx],
            )
        })
    }
}

/// Shortest lengths over paths with at most `k` intra-layer edges, plus the
/// last-edge layers of all currently-known shortest prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLengthMatrix {
    k: usize,
    gamma: f64,
    n: usize,
    lengths: Vec<f64>,
    last_layers: LayerSetMatrix,
    stabilized_at: Option<usize>,
}

impl PathLengthMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn length(&self, i: usize, j: usize) -> f64 {
        self.lengths[i * self.n + j]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn lengths_dense(&self) -> DenseMatrix {
        DenseMatrix::from_vec(self.n, self.n, self.lengths.clone())
    }

    pub fn last_layers(&self, i: usize, j: usize) -> Vec<usize> {
        self.last_layers.layers(i, j)
    }

    /// Smallest K whose length matrix equals the final (stabilized) one;
    /// `None` when the iteration was capped before a fixed point was seen.
    pub fn stabilized_at(&self) -> Option<usize> {
        self.stabilized_at
    }
}

/// The 1-path matrix: entrywise minimum of the reciprocal tensor over
/// layers, with argmin layer sets.
pub fn one_path_matrix(t: &MultiplexTensor, g: &CouplingParameter) -> PathLengthMatrix {
    let n = t.n_vertices();
    let mut lengths = vec![f64::INFINITY; n * n];
    let mut sets = LayerSetMatrix::new(n, t.n_layers());
    for i in 0..n {
        lengths[i * n + i] = 0.0;
    }
    for (layer, s, d, w) in t.entries() {
        let r = 1.0 / w;
        let slot = s * n + d;
        if r < lengths[slot] {
            lengths[slot] = r;
            let row = &mut sets.bits[s * n * sets.words..(s + 1) * n * sets.words];
            LayerSetMatrix::set_single(row, sets.words, d, layer);
        } else if r == lengths[slot] {
            let row = &mut sets.bits[s * n * sets.words..(s + 1) * n * sets.words];
            LayerSetMatrix::insert(row, sets.words, d, layer);
        }
    }
    PathLengthMatrix {
        k: 1,
        gamma: g.gamma(),
        n,
        lengths,
        last_layers: sets,
        stabilized_at: None,
    }
}

/// Min-plus product c_ij = min_h (a_ih + b_hj) with ∞ absorbing under +.
pub fn minplus_multiply(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols() != b.rows() {
        return Err(Error::Dimension(format!(
            "min-plus product of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (m, inner, p) = (a.rows(), a.cols(), b.cols());
    let mut c = DenseMatrix::zeros(m, p);
    c.data_mut()
        .par_chunks_mut(p)
        .enumerate()
        .for_each(|(i, row)| {
            row.fill(f64::INFINITY);
            for h in 0..inner {
                let aih = a.get(i, h);
                if !aih.is_finite() {
                    continue;
                }
                let brow = b.row(h);
                for (cj, bhj) in row.iter_mut().zip(brow.iter()) {
                    let cand = aih + bhj;
                    if cand < *cj {
                        *cj = cand;
                    }
                }
            }
        });
    Ok(c)
}

/// One K-level extension of the path-length recursion.
pub fn extend_path_matrix(
    p: &PathLengthMatrix,
    t: &ReciprocalLengthTensor,
    g: &CouplingParameter,
) -> Result<PathLengthMatrix> {
    if p.gamma != g.gamma() {
        return Err(Error::Data(format!(
            "coupling parameter mismatch: path matrix built with gamma = {}, extension requested with gamma = {}",
            p.gamma,
            g.gamma()
        )));
    }
    if p.n != t.n_vertices() || p.last_layers.n_layers != t.n_layers() {
        return Err(Error::Dimension(
            "path matrix and reciprocal tensor shapes differ".into(),
        ));
    }
    let n = p.n;
    let words = p.last_layers.words;
    let inv_gamma = g.switch_cost();
    let mut lengths = vec![0.0; n * n];
    let mut bits = vec![0u64; n * n * words];

    lengths
        .par_chunks_mut(n)
        .zip(bits.par_chunks_mut(n * words))
        .enumerate()
        .for_each(|(i, (out_row, out_bits))| {
            let prev_row = &p.lengths[i * n..(i + 1) * n];
            let prev_bits = &p.last_layers.bits[i * n * words..(i + 1) * n * words];
            out_row.copy_from_slice(prev_row);
            out_bits.copy_from_slice(prev_bits);
            for h in 0..n {
                let base = prev_row[h];
                if !base.is_finite() {
                    continue;
                }
                let from_start = h == i;
                for (j, layer, r) in t.out_edges(h) {
                    if j == i {
                        continue; // the diagonal stays zero
                    }
                    let pen = if from_start
                        || prev_bits[h * words + layer / 64] >> (layer % 64) & 1 == 1
                    {
                        0.0
                    } else {
                        inv_gamma
                    };
                    let cand = base + r + pen;
                    let cur = out_row[j];
                    if cand < cur {
                        out_row[j] = cand;
                        LayerSetMatrix::set_single(out_bits, words, j, layer);
                    } else if cand == cur {
                        LayerSetMatrix::insert(out_bits, words, j, layer);
                    }
                }
            }
        });

    Ok(PathLengthMatrix {
        k: p.k + 1,
        gamma: p.gamma,
        n,
        lengths,
        last_layers: LayerSetMatrix {
            n,
            n_layers: p.last_layers.n_layers,
            words,
            bits,
        },
        stabilized_at: None,
    })
}

/// Edge budget: a fixed K or the full N−1 bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMax {
    Full,
    At(usize),
}

impl std::str::FromStr for KMax {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(KMax::Full);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(KMax::At(k)),
            _ => Err(format!("expected a positive integer or 'full', got '{s}'")),
        }
    }
}

/// Drives the K-level recursion one level at a time, detecting the fixed
/// point of (lengths, last_layers) to stop early.
pub struct KPathIterator {
    recip: ReciprocalLengthTensor,
    gamma: CouplingParameter,
    bound: usize,
    full_bound: usize,
    state: Option<PathLengthMatrix>,
    finished: bool,
    fixed_point: bool,
    last_length_change: usize,
}

impl KPathIterator {
    pub fn new(t: &MultiplexTensor, g: &CouplingParameter, k_max: KMax) -> Result<Self> {
        let n = t.n_vertices();
        let full_bound = n.saturating_sub(1).max(1);
        let bound = match k_max {
            KMax::Full => full_bound,
            KMax::At(0) => return Err(Error::Data("edge budget K must be at least 1".into())),
            KMax::At(k) => k.min(full_bound),
        };
        Ok(KPathIterator {
            recip: ReciprocalLengthTensor::from_tensor(t),
            gamma: *g,
            bound,
            full_bound,
            state: None,
            finished: false,
            fixed_point: false,
            last_length_change: 1,
        })
    }

    pub fn recip_tensor(&self) -> &ReciprocalLengthTensor {
        &self.recip
    }

    /// Yields P^1, P^2, … in order; stops (returns None) after the budget
    /// is exhausted or one extension leaves both lengths and layer sets
    /// unchanged. The duplicate fixed-point level is not yielded.
    pub fn next_level(&mut self, t: &MultiplexTensor) -> Result<Option<&PathLengthMatrix>> {
        if self.finished {
            return Ok(None);
        }
        match self.state {
            None => {
                let p1 = one_path_matrix(t, &self.gamma);
                if self.bound == 1 {
                    self.finished = true;
                    self.fixed_point = self.bound == self.full_bound;
                }
                self.state = Some(p1);
            }
            Some(ref prev) => {
                let next = extend_path_matrix(prev, &self.recip, &self.gamma)?;
                if next.lengths == prev.lengths && next.last_layers == prev.last_layers {
                    self.finished = true;
                    self.fixed_point = true;
                    return Ok(None);
                }
                if next.lengths != prev.lengths {
                    self.last_length_change = next.k;
                }
                if next.k >= self.bound {
                    self.finished = true;
                    self.fixed_point = self.bound == self.full_bound;
                }
                self.state = Some(next);
            }
        }
        Ok(self.state.as_ref())
    }

    /// Final state stamped with the stabilization index (the smallest K
    /// whose lengths equal the final ones), when the fixed point is known.
    pub fn into_final(self) -> PathLengthMatrix {
        let mut p = self.state.expect("iterator was never advanced");
        p.stabilized_at = if self.fixed_point {
            Some(self.last_length_change)
        } else {
            None
        };
        p
    }
}

/// Builds P^K by iterated extension, stopping early at the fixed point of
/// (lengths, last_layers).
pub fn path_length_matrix(
    t: &MultiplexTensor,
    g: &CouplingParameter,
    k_max: KMax,
) -> Result<PathLengthMatrix> {
    let mut iter = KPathIterator::new(t, g, k_max)?;
    while iter.next_level(t)?.is_some() {}
    Ok(iter.into_final())
}
