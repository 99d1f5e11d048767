//! Multiplex data model: the third-order adjacency tensor, dataset
//! ingestion, layer aggregation, supra-adjacency assembly, sparsity
//! patterns and cone projection.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::dense::{DenseMatrix, MatVec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Directedness {
    Directed,
    Undirected,
}

/// Inter-layer coupling weight γ > 0. The cost of a layer switch in the
/// path-length recursion is 1/γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParameter {
    gamma: f64,
}

impl CouplingParameter {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Data(format!(
                "coupling parameter must be a positive finite real, got {gamma}"
            )));
        }
        Ok(CouplingParameter { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn switch_cost(&self) -> f64 {
        1.0 / self.gamma
    }
}

/// Third-order adjacency tensor of a multiplex: `n_layers` stacked
/// `n_vertices × n_vertices` nonnegative layer matrices with strictly
/// positive stored weights, no self-loops, and (for undirected data) both
/// orientations stored with equal weight.
///
/// Vertices and layers are indexed densely from 0 internally; the original
/// integer ids from the input file are kept as labels for reporting.
#[derive(Debug, Clone)]
pub struct MultiplexTensor {
    n_vertices: usize,
    n_layers: usize,
    directedness: Directedness,
    // canonical storage: (layer, src, dst) -> weight, all 0-based internal
    weights: BTreeMap<(usize, usize, usize), f64>,
    vertex_labels: Vec<i64>,
    layer_labels: Vec<i64>,
    vertex_index: HashMap<i64, usize>,
    layer_index: HashMap<i64, usize>,
}

impl MultiplexTensor {
    /// Builds a validated tensor from labeled entries
    /// `(layer_label, src_label, dst_label, weight)`.
    ///
    /// Labels may be arbitrary integers; they are compacted to dense
    /// indices in ascending label order. For undirected data each edge may
    /// be given in either or both orientations; both are stored. Duplicate
    /// entries with equal weight collapse silently, conflicting weights are
    /// an error.
    pub fn from_entries(
        entries: &[(i64, i64, i64, f64)],
        directedness: Directedness,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Data("no entries".into()));
        }
        let mut vertex_set = BTreeSet::new();
        let mut layer_set = BTreeSet::new();
        for &(l, s, d, _) in entries {
            vertex_set.insert(s);
            vertex_set.insert(d);
            layer_set.insert(l);
        }
        Self::build(
            entries,
            directedness,
            vertex_set.into_iter().collect(),
            layer_set.into_iter().collect(),
        )
    }

    /// Like [`from_entries`](Self::from_entries) but with an explicit shape:
    /// vertices are labeled 1..=n_vertices and layers 1..=n_layers, so
    /// edgeless layers and isolated vertices are representable. The entry
    /// list may be empty.
    pub fn from_entries_padded(
        entries: &[(i64, i64, i64, f64)],
        directedness: Directedness,
        n_vertices: usize,
        n_layers: usize,
    ) -> Result<Self> {
        if n_vertices == 0 || n_layers == 0 {
            return Err(Error::Data(
                "a multiplex needs at least one vertex and one layer".into(),
            ));
        }
        let vertex_labels: Vec<i64> = (1..=n_vertices as i64).collect();
        let layer_labels: Vec<i64> = (1..=n_layers as i64).collect();
        for &(l, s, d, _) in entries {
            if !(1..=n_layers as i64).contains(&l) {
                return Err(Error::Data(format!("layer id {l} outside 1..={n_layers}")));
            }
            for v in [s, d] {
                if !(1..=n_vertices as i64).contains(&v) {
                    return Err(Error::Data(format!(
                        "vertex id {v} outside 1..={n_vertices}"
                    )));
                }
            }
        }
        Self::build(entries, directedness, vertex_labels, layer_labels)
    }

    fn build(
        entries: &[(i64, i64, i64, f64)],
        directedness: Directedness,
        vertex_labels: Vec<i64>,
        layer_labels: Vec<i64>,
    ) -> Result<Self> {
        for &(l, s, d, w) in entries {
            if s == d {
                return Err(Error::Data(format!(
                    "self-loop on vertex {s} in layer {l} is not allowed"
                )));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Data(format!(
                    "edge ({l}, {s}, {d}) has nonpositive or non-finite weight {w}"
                )));
            }
        }
        let vertex_index: HashMap<i64, usize> = vertex_labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i))
            .collect();
        let layer_index: HashMap<i64, usize> = layer_labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i))
            .collect();

        let mut weights: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        let mut insert = |key: (usize, usize, usize), w: f64, raw: (i64, i64, i64)| -> Result<()> {
            match weights.get(&key) {
                None => {
                    weights.insert(key, w);
                    Ok(())
                }
                Some(&existing) if existing == w => Ok(()),
                Some(&existing) => Err(Error::Data(format!(
                    "conflicting duplicate edge ({}, {}, {}): weights {existing} and {w}",
                    raw.0, raw.1, raw.2
                ))),
            }
        };
        for &(l, s, d, w) in entries {
            let key = (layer_index[&l], vertex_index[&s], vertex_index[&d]);
            insert(key, w, (l, s, d))?;
            if directedness == Directedness::Undirected {
                insert((key.0, key.2, key.1), w, (l, d, s))?;
            }
        }

        Ok(MultiplexTensor {
            n_vertices: vertex_labels.len(),
            n_layers: layer_labels.len(),
            directedness,
            weights,
            vertex_index,
            layer_index,
            vertex_labels,
            layer_labels,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn directedness(&self) -> Directedness {
        self.directedness
    }

    pub fn is_undirected(&self) -> bool {
        self.directedness == Directedness::Undirected
    }

    /// Number of stored (layer, src, dst) entries; undirected edges count
    /// once per orientation.
    pub fn n_entries(&self) -> usize {
        self.weights.len()
    }

    /// Iterates stored entries in canonical (layer, src, dst) order,
    /// 0-based internal indices.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        self.weights.iter().map(|(&(l, s, d), &w)| (l, s, d, w))
    }

    pub fn weight(&self, layer: usize, src: usize, dst: usize) -> Option<f64> {
        self.weights.get(&(layer, src, dst)).copied()
    }

    pub fn vertex_label(&self, idx: usize) -> i64 {
        self.vertex_labels[idx]
    }

    pub fn layer_label(&self, idx: usize) -> i64 {
        self.layer_labels[idx]
    }

    pub fn vertex_index_of(&self, label: i64) -> Option<usize> {
        self.vertex_index.get(&label).copied()
    }

    pub fn layer_index_of(&self, label: i64) -> Option<usize> {
        self.layer_index.get(&label).copied()
    }

    /// Layers (0-based) in which the intra-layer edge (src, dst) exists.
    pub fn layers_of_edge(&self, src: usize, dst: usize) -> Vec<usize> {
        (0..self.n_layers)
            .filter(|&l| self.weights.contains_key(&(l, src, dst)))
            .collect()
    }

    /// Serializes the entry multiset back to labeled tuples in canonical
    /// order (used by round-trip checks).
    pub fn labeled_entries(&self) -> Vec<(i64, i64, i64, f64)> {
        self.entries()
            .map(|(l, s, d, w)| {
                (
                    self.layer_labels[l],
                    self.vertex_labels[s],
                    self.vertex_labels[d],
                    w,
                )
            })
            .collect()
    }

    pub(crate) fn with_weights(
        &self,
        weights: BTreeMap<(usize, usize, usize), f64>,
    ) -> MultiplexTensor {
        MultiplexTensor {
            weights,
            ..self.clone()
        }
    }

    pub(crate) fn weights_map(&self) -> &BTreeMap<(usize, usize, usize), f64> {
        &self.weights
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeListFormat {
    /// `<layer> <src> <dst> [weight]`
    Extended,
    /// `<src> <dst> [weight]`, a single implicit layer
    SingleLayer,
}

/// Loads a multiplex from a whitespace-separated edge list. `#` starts a
/// comment that runs to the end of the line; weights default to 1.
pub fn load_multiplex(
    path: impl AsRef<Path>,
    format: EdgeListFormat,
    directedness: Directedness,
) -> Result<MultiplexTensor> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_edge_list(&text, &path.display().to_string(), format, directedness)
}

pub fn parse_edge_list(
    text: &str,
    path: &str,
    format: EdgeListFormat,
    directedness: Directedness,
) -> Result<MultiplexTensor> {
    let mut entries = Vec::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_string(),
            line: lineno + 1,
            message,
        };
        let parse_int = |s: &str, what: &str| {
            s.parse::<i64>()
                .map_err(|_| err(format!("cannot parse {what} '{s}' as an integer")))
        };
        let parse_weight = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(format!("cannot parse weight '{s}' as a number")))
        };
        let (layer, src, dst, weight) = match format {
            EdgeListFormat::Extended => {
                if fields.len() < 3 || fields.len() > 4 {
                    return Err(err(format!(
                        "expected 'layer src dst [weight]', found {} fields",
                        fields.len()
                    )));
                }
                let layer = parse_int(fields[0], "layer id")?;
                let src = parse_int(fields[1], "source vertex")?;
                let dst = parse_int(fields[2], "target vertex")?;
                let w = if fields.len() == 4 {
                    parse_weight(fields[3])?
                } else {
                    1.0
                };
                (layer, src, dst, w)
            }
            EdgeListFormat::SingleLayer => {
                if fields.len() < 2 || fields.len() > 3 {
                    return Err(err(format!(
                        "expected 'src dst [weight]', found {} fields",
                        fields.len()
                    )));
                }
                let src = parse_int(fields[0], "source vertex")?;
                let dst = parse_int(fields[1], "target vertex")?;
                let w = if fields.len() == 3 {
                    parse_weight(fields[2])?
                } else {
                    1.0
                };
                (1, src, dst, w)
            }
        };
        if src == dst {
            return Err(err(format!("self-loop on vertex {src} is not allowed")));
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(err(format!("nonpositive weight {weight}")));
        }
        entries.push((layer, src, dst, weight));
    }
    if entries.is_empty() {
        return Err(Error::Data(format!("{path}: no entries")));
    }
    MultiplexTensor::from_entries(&entries, directedness)
}

/// Entrywise sum of the layer matrices.
pub fn aggregate(t: &MultiplexTensor) -> DenseMatrix {
    let n = t.n_vertices();
    let mut a = DenseMatrix::zeros(n, n);
    for (_, s, d, w) in t.entries() {
        a.set(s, d, a.get(s, d) + w);
    }
    a
}

/// Compressed sparse row square matrix with nonnegative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<u32>,
    val: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets; duplicates must not occur.
    pub fn from_triplets(n: usize, mut triplets: Vec<(u32, u32, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::with_capacity(triplets.len());
        let mut val = Vec::with_capacity(triplets.len());
        for &(r, c, v) in &triplets {
            row_ptr[r as usize + 1] += 1;
            col.push(c);
            val.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            col,
            val,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col[lo..hi]
            .iter()
            .zip(&self.val[lo..hi])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col[lo..hi].binary_search(&(j as u32)) {
            Ok(pos) => self.val[lo + pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row_entries(i) {
                m.set(i, j, v);
            }
        }
        m
    }
}

impl MatVec for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for (j, v) in self.row_entries(i) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for i in 0..self.n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for (j, v) in self.row_entries(i) {
                y[j] += v * xi;
            }
        }
    }

    fn frobenius_norm(&self) -> f64 {
        self.val.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn has_negative_entry(&self) -> bool {
        self.val.iter().any(|&v| v < 0.0)
    }

    fn strongly_connected(&self) -> bool {
        strongly_connected_from_edges(self.n, |h, f| {
            for (j, v) in self.row_entries(h) {
                if v > 0.0 {
                    f(j);
                }
            }
        })
    }
}

/// Supra-adjacency matrix B(γ): layer matrices on the diagonal blocks,
/// γ·I_N on every off-diagonal block, zero main diagonal. Stored sparsely.
#[derive(Debug, Clone)]
pub struct SupraAdjacency {
    n_vertices: usize,
    n_layers: usize,
    gamma: f64,
    matrix: CsrMatrix,
}

/// Assembles B(γ) from the tensor. Supra-vertex (ℓ, i) maps to row
/// ℓ·N + i.
pub fn build_supra(t: &MultiplexTensor, g: &CouplingParameter) -> SupraAdjacency {
    let n = t.n_vertices();
    let l = t.n_layers();
    let size = n * l;
    let gamma = g.gamma();
    let mut triplets = Vec::with_capacity(t.n_entries() + size * l.saturating_sub(1));
    for (layer, s, d, w) in t.entries() {
        triplets.push(((layer * n + s) as u32, (layer * n + d) as u32, w));
    }
    for l1 in 0..l {
        for l2 in 0..l {
            if l1 == l2 {
                continue;
            }
            for i in 0..n {
                triplets.push(((l1 * n + i) as u32, (l2 * n + i) as u32, gamma));
            }
        }
    }
    SupraAdjacency {
        n_vertices: n,
        n_layers: l,
        gamma,
        matrix: CsrMatrix::from_triplets(size, triplets),
    }
}

impl SupraAdjacency {
    pub fn size(&self) -> usize {
        self.n_vertices * self.n_layers
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.matrix.to_dense()
    }

    /// Extracts the N×N block in block position (l1, l2).
    pub fn block(&self, l1: usize, l2: usize) -> DenseMatrix {
        let n = self.n_vertices;
        let mut b = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for (j, v) in self.matrix.row_entries(l1 * n + i) {
                if j >= l2 * n && j < (l2 + 1) * n {
                    b.set(i, j - l2 * n, v);
                }
            }
        }
        b
    }

    /// Sparsity pattern of the block-diagonal (intra-layer) part.
    pub fn intra_layer_pattern(&self) -> SparsityPattern {
        let n = self.n_vertices;
        let size = self.size();
        let mut positions = BTreeSet::new();
        for i in 0..size {
            let block = i / n;
            for (j, v) in self.matrix.row_entries(i) {
                if v > 0.0 && j / n == block {
                    positions.insert((i as u32, j as u32));
                }
            }
        }
        SparsityPattern {
            dim: size,
            positions,
        }
    }
}

impl MatVec for SupraAdjacency {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.apply(x, y);
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.apply_transpose(x, y);
    }

    fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }

    fn has_negative_entry(&self) -> bool {
        self.matrix.has_negative_entry()
    }

    fn strongly_connected(&self) -> bool {
        self.matrix.strongly_connected()
    }
}

/// Set of (row, column) positions defining a cone of nonnegative matrices
/// with a fixed zero pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    dim: usize,
    positions: BTreeSet<(u32, u32)>,
}

impl SparsityPattern {
    pub fn from_positions(
        dim: usize,
        positions: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (r, c) in positions {
            if r >= dim || c >= dim {
                return Err(Error::Dimension(format!(
                    "pattern position ({r}, {c}) out of bounds for dimension {dim}"
                )));
            }
            set.insert((r as u32, c as u32));
        }
        Ok(SparsityPattern {
            dim,
            positions: set,
        })
    }

    pub fn full(dim: usize) -> Self {
        let mut positions = BTreeSet::new();
        for r in 0..dim {
            for c in 0..dim {
                positions.insert((r as u32, c as u32));
            }
        }
        SparsityPattern { dim, positions }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.positions.contains(&(r as u32, c as u32))
    }

    pub fn positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.positions
            .iter()
            .map(|&(r, c)| (r as usize, c as usize))
    }
}

impl fmt::Display for SparsityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SparsityPattern(dim={}, positions={})",
            self.dim,
            self.positions.len()
        )
    }
}

/// Positions of strictly positive entries of a square matrix.
pub fn pattern_of(m: &DenseMatrix) -> SparsityPattern {
    assert!(m.is_square(), "sparsity pattern of a non-square matrix");
    let n = m.rows();
    let mut positions = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if m.get(i, j) > 0.0 {
                positions.insert((i as u32, j as u32));
            }
        }
    }
    SparsityPattern { dim: n, positions }
}

/// Projection onto the cone: keeps entries at pattern positions, zeroes the
/// rest. Idempotent.
pub fn project_onto_cone(m: &DenseMatrix, s: &SparsityPattern) -> Result<DenseMatrix> {
    if !m.is_square() || m.rows() != s.dim() {
        return Err(Error::Dimension(format!(
            "cannot project {}x{} matrix onto pattern of dimension {}",
            m.rows(),
            m.cols(),
            s.dim()
        )));
    }
    let mut out = DenseMatrix::zeros(m.rows(), m.cols());
    for (r, c) in s.positions() {
        out.set(r, c, m.get(r, c));
    }
    Ok(out)
}

/// Strong connectivity of the digraph given by a successor callback:
/// forward and backward reachability from vertex 0 must each cover all
/// vertices. `for_each_successor(h, f)` must call `f(j)` for every edge
/// h → j.
pub(crate) fn strongly_connected_from_edges(
    n: usize,
    for_each_successor: impl Fn(usize, &mut dyn FnMut(usize)),
) -> bool {
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    // reverse adjacency built on the fly
    let mut reverse: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut forward: Vec<Vec<u32>> = vec![Vec::new(); n];
    for h in 0..n {
        for_each_successor(h, &mut |j| {
            forward[h].push(j as u32);
            reverse[j].push(h as u32);
        });
    }
    let bfs_covers = |adj: &[Vec<u32>]| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                let w = w as usize;
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    };
    bfs_covers(&forward) && bfs_covers(&reverse)
}

/// True iff the directed graph of strictly positive entries is strongly
/// connected.
pub fn is_irreducible(m: &DenseMatrix) -> bool {
    assert!(m.is_square(), "irreducibility of a non-square matrix");
    m.strongly_connected()
}
