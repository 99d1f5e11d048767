//! Edge recommendation under the efficiency and popularity approaches,
//! perturbation application, and before/after measure comparison.
//!
//! Efficiency approach: Perron sensitivity of the K-efficiency matrix,
//! read off the Wilkinson perturbation projected onto the aggregate
//! pattern. Popularity approach: Perron sensitivity of the supra-adjacency
//! matrix, read off the intra-layer-projected Wilkinson entries weighted by
//! the edge weights.

use serde::Serialize;

use crate::efficiency::{efficiency_matrix, global_k_efficiency};
use crate::error::{Error, Result};
use crate::multiplex::{aggregate, build_supra, pattern_of, CouplingParameter, MultiplexTensor};
use crate::spectral::{self, wilkinson, PerronTriple};
use crate::tropical::{KMax, KPathIterator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Approach {
    Efficiency,
    Popularity,
}

/// Which matrix entry a recommendation came from.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    /// selecting matrix: "efficiency-wilkinson-k{K}" or "supra-importance"
    pub matrix: String,
    pub row_label: i64,
    pub col_label: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeRecommendation {
    pub approach: Approach,
    /// original vertex labels; undirected pairs are reported once with the
    /// larger label first
    pub vertex_pair: (i64, i64),
    /// original labels of the layers carrying the edge (all layers for the
    /// efficiency approach, the single selected layer for popularity)
    pub layers: Vec<i64>,
    pub score: f64,
    pub rank: usize,
    pub provenance: Provenance,
}

/// Variant switch for the popularity importance: entries of the projected
/// Wilkinson matrix either multiplied by the corresponding edge weights or
/// taken bare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImportanceVariant {
    Weighted,
    Unweighted,
}

fn sort_and_rank(mut recs: Vec<EdgeRecommendation>, top: usize) -> Vec<EdgeRecommendation> {
    recs.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.vertex_pair.cmp(&b.vertex_pair))
            .then_with(|| a.layers.cmp(&b.layers))
    });
    recs.truncate(top);
    for (i, r) in recs.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    recs
}

/// Top intra-layer edges whose strengthening most increases the Perron
/// root of the K-efficiency matrix: the largest entries of the Wilkinson
/// perturbation of P^K_{−1} on the sparsity pattern of A⁺.
pub fn rank_edges_efficiency(
    t: &MultiplexTensor,
    g: &CouplingParameter,
    k_max: KMax,
    top: usize,
) -> Result<Vec<EdgeRecommendation>> {
    if top == 0 {
        return Err(Error::Data("top must be at least 1".into()));
    }
    let mut iter = KPathIterator::new(t, g, k_max)?;
    let mut last = None;
    while let Some(p) = iter.next_level(t)? {
        last = Some(p.clone());
    }
    let p = last.expect("at least one level is always produced");
    rank_edges_efficiency_at(t, &p, top)
}

/// Same selection for an already-built path-length matrix.
pub fn rank_edges_efficiency_at(
    t: &MultiplexTensor,
    p: &crate::tropical::PathLengthMatrix,
    top: usize,
) -> Result<Vec<EdgeRecommendation>> {
    let q = efficiency_matrix(p);
    let triple = spectral::perron(
        q.matrix(),
        spectral::DEFAULT_TOL,
        spectral::DEFAULT_MAX_ITER,
    )?;
    let a_plus = aggregate(t);
    let pattern = pattern_of(&a_plus);
    recommend_from_efficiency_triple(t, &triple, &pattern, p.k(), top)
}

pub fn recommend_from_efficiency_triple(
    t: &MultiplexTensor,
    triple: &PerronTriple,
    a_plus_pattern: &crate::multiplex::SparsityPattern,
    k: usize,
    top: usize,
) -> Result<Vec<EdgeRecommendation>> {
    let w = wilkinson(triple);
    let undirected = t.is_undirected();
    let mut recs = Vec::new();
    for (i, j) in a_plus_pattern.positions() {
        if undirected && i < j {
            continue; // mirrored below
        }
        // the provenance cites the orientation whose entry won
        let mut score = w.entry(i, j);
        let mut chosen = (i, j);
        if undirected && w.entry(j, i) > score {
            score = w.entry(j, i);
            chosen = (j, i);
        }
        let layers: Vec<i64> = t
            .layers_of_edge(i, j)
            .into_iter()
            .map(|l| t.layer_label(l))
            .collect();
        debug_assert!(!layers.is_empty());
        let (a, b) = (t.vertex_label(i), t.vertex_label(j));
        let vertex_pair = if undirected {
            (a.max(b), a.min(b))
        } else {
            (a, b)
        };
        recs.push(EdgeRecommendation {
            approach: Approach::Efficiency,
            vertex_pair,
            layers,
            score,
            rank: 0,
            provenance: Provenance {
                matrix: format!("efficiency-wilkinson-k{k}"),
                row_label: t.vertex_label(chosen.0),
                col_label: t.vertex_label(chosen.1),
            },
        });
    }
    Ok(sort_and_rank(recs, top))
}

/// Top intra-layer edges whose strengthening most increases the Perron
/// root of B(γ): importance of entry (ℓ, i, j) is its weight times the
/// (ℓ·N+i, ℓ·N+j) entry of the projected Wilkinson matrix of B.
pub fn rank_edges_popularity(
    t: &MultiplexTensor,
    g: &CouplingParameter,
    top: usize,
) -> Result<Vec<EdgeRecommendation>> {
    rank_edges_popularity_with(t, g, top, ImportanceVariant::Weighted)
}

pub fn rank_edges_popularity_with(
    t: &MultiplexTensor,
    g: &CouplingParameter,
    top: usize,
    variant: ImportanceVariant,
) -> Result<Vec<EdgeRecommendation>> {
    if top == 0 {
        return Err(Error::Data("top must be at least 1".into()));
    }
    let b = build_supra(t, g);
    let triple = spectral::perron(&b, spectral::DEFAULT_TOL, spectral::DEFAULT_MAX_ITER)?;
    rank_edges_popularity_from_triple(t, &triple, top, variant)
}

pub fn rank_edges_popularity_from_triple(
    t: &MultiplexTensor,
    triple: &PerronTriple,
    top: usize,
    variant: ImportanceVariant,
) -> Result<Vec<EdgeRecommendation>> {
    let n = t.n_vertices();
    let undirected = t.is_undirected();
    let mut recs = Vec::new();
    for (layer, i, j, weight) in t.entries() {
        if undirected && i < j {
            continue;
        }
        let entry = |r: usize, c: usize| triple.y[r] * triple.x[c];
        let importance = |s: usize, d: usize, w: f64| {
            let wil = entry(layer * n + s, layer * n + d);
            match variant {
                ImportanceVariant::Weighted => w * wil,
                ImportanceVariant::Unweighted => wil,
            }
        };
        let mut score = importance(i, j, weight);
        let mut chosen = (i, j);
        if undirected && importance(j, i, weight) > score {
            score = importance(j, i, weight);
            chosen = (j, i);
        }
        let (a, b) = (t.vertex_label(i), t.vertex_label(j));
        let vertex_pair = if undirected {
            (a.max(b), a.min(b))
        } else {
            (a, b)
        };
        recs.push(EdgeRecommendation {
            approach: Approach::Popularity,
            vertex_pair,
            layers: vec![t.layer_label(layer)],
            score,
            rank: 0,
            provenance: Provenance {
                matrix: "supra-importance".into(),
                row_label: t.vertex_label(chosen.0),
                col_label: t.vertex_label(chosen.1),
            },
        });
    }
    Ok(sort_and_rank(recs, top))
}

/// An intra-layer edge named by original labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct EdgeTarget {
    pub layer: i64,
    pub src: i64,
    pub dst: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMode {
    AddAbsolute(f64),
    Scale(f64),
}

/// Returns a new tensor with the targeted weights updated. Undirected
/// tensors get the symmetric update; listing both orientations of the same
/// undirected edge is rejected as a duplicate.
pub fn apply_perturbation(
    t: &MultiplexTensor,
    targets: &[EdgeTarget],
    mode: PerturbMode,
) -> Result<MultiplexTensor> {
    match mode {
        PerturbMode::Scale(f) if !(f > 0.0) || !f.is_finite() => {
            return Err(Error::Data(format!(
                "scale factor must be positive and finite, got {f}"
            )));
        }
        PerturbMode::AddAbsolute(a) if !a.is_finite() => {
            return Err(Error::Data(format!(
                "additive amount must be finite, got {a}"
            )));
        }
        _ => {}
    }
    let undirected = t.is_undirected();
    let mut seen = std::collections::BTreeSet::new();
    let mut weights = t.weights_map().clone();
    for target in targets {
        let layer = t.layer_index_of(target.layer).ok_or_else(|| {
            Error::Data(format!(
                "unknown layer {} in perturbation target",
                target.layer
            ))
        })?;
        let src = t.vertex_index_of(target.src).ok_or_else(|| {
            Error::Data(format!(
                "unknown vertex {} in perturbation target",
                target.src
            ))
        })?;
        let dst = t.vertex_index_of(target.dst).ok_or_else(|| {
            Error::Data(format!(
                "unknown vertex {} in perturbation target",
                target.dst
            ))
        })?;
        let canonical = if undirected {
            (layer, src.min(dst), src.max(dst))
        } else {
            (layer, src, dst)
        };
        if !seen.insert(canonical) {
            return Err(Error::Data(format!(
                "duplicate perturbation target ({}, {}, {})",
                target.layer, target.src, target.dst
            )));
        }
        let keys: Vec<(usize, usize, usize)> = if undirected {
            vec![(layer, src, dst), (layer, dst, src)]
        } else {
            vec![(layer, src, dst)]
        };
        for key in keys {
            let w = weights.get_mut(&key).ok_or_else(|| {
                Error::Data(format!(
                    "edge ({}, {}, {}) does not exist in the tensor",
                    target.layer, target.src, target.dst
                ))
            })?;
            let updated = match mode {
                PerturbMode::AddAbsolute(a) => *w + a,
                PerturbMode::Scale(f) => *w * f,
            };
            if !(updated > 0.0) || !updated.is_finite() {
                return Err(Error::Data(format!(
                    "perturbation drives edge ({}, {}, {}) to nonpositive weight {updated}",
                    target.layer, target.src, target.dst
                )));
            }
            *w = updated;
        }
    }
    Ok(t.with_weights(weights))
}

/// The four headline quantities of one multiplex at one γ.
#[derive(Debug, Clone, Serialize)]
pub struct Measures {
    pub global_efficiency: f64,
    pub stabilized_at: Option<usize>,
    pub total_communicability: f64,
    pub rho_supra: f64,
    pub rho_efficiency: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureDeltas {
    pub global_efficiency: f64,
    pub total_communicability: f64,
    pub rho_supra: f64,
    pub rho_efficiency: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureComparison {
    pub before: Measures,
    pub after: Measures,
    pub delta: MeasureDeltas,
}

pub fn measures(t: &MultiplexTensor, g: &CouplingParameter, k_max: KMax) -> Result<Measures> {
    let p = crate::tropical::path_length_matrix(t, g, k_max)?;
    let q = efficiency_matrix(&p);
    let e = global_k_efficiency(&q)?;
    let rho_eff = spectral::perron(
        q.matrix(),
        spectral::DEFAULT_TOL,
        spectral::DEFAULT_MAX_ITER,
    )?
    .rho;
    let b = build_supra(t, g);
    let rho_supra = spectral::perron(&b, spectral::DEFAULT_TOL, spectral::DEFAULT_MAX_ITER)?.rho;
    let tc = crate::communicability::total_communicability(&b, None)?;
    Ok(Measures {
        global_efficiency: e,
        stabilized_at: p.stabilized_at(),
        total_communicability: tc,
        rho_supra,
        rho_efficiency: rho_eff,
    })
}

/// Computes e(γ), tc(γ), ρ(B) and ρ(P_{−1}) for both tensors and the
/// deltas.
pub fn compare_measures(
    before: &MultiplexTensor,
    after: &MultiplexTensor,
    g: &CouplingParameter,
    k_max: KMax,
) -> Result<MeasureComparison> {
    if before.n_vertices() != after.n_vertices() || before.n_layers() != after.n_layers() {
        return Err(Error::Dimension(format!(
            "tensors differ in shape: {}x{} layers vs {}x{}",
            before.n_vertices(),
            before.n_layers(),
            after.n_vertices(),
            after.n_layers()
        )));
    }
    let m_before = measures(before, g, k_max)?;
    let m_after = measures(after, g, k_max)?;
    let delta = MeasureDeltas {
        global_efficiency: m_after.global_efficiency - m_before.global_efficiency,
        total_communicability: m_after.total_communicability - m_before.total_communicability,
        rho_supra: m_after.rho_supra - m_before.rho_supra,
        rho_efficiency: m_after.rho_efficiency - m_before.rho_efficiency,
    };
    Ok(MeasureComparison {
        before: m_before,
        after: m_after,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplex::Directedness;

    fn g1() -> CouplingParameter {
        CouplingParameter::new(1.0).unwrap()
    }

    /// Small connected two-layer multiplex with a clear hub edge.
    fn toy() -> MultiplexTensor {
        MultiplexTensor::from_entries(
            &[
                (1, 1, 2, 4.0),
                (1, 2, 3, 1.0),
                (2, 3, 4, 1.0),
                (2, 4, 1, 1.0),
                (1, 1, 3, 1.0),
            ],
            Directedness::Undirected,
        )
        .unwrap()
    }

    #[test]
    fn efficiency_ranking_returns_existing_edges() {
        let t = toy();
        let recs = rank_edges_efficiency(&t, &g1(), KMax::Full, 3).unwrap();
        assert_eq!(recs.len(), 3);
        for (idx, r) in recs.iter().enumerate() {
            assert_eq!(r.rank, idx + 1);
            assert!(r.score > 0.0);
            assert!(!r.layers.is_empty());
            // the recommended pair exists in the aggregate
            let (hi, lo) = r.vertex_pair;
            let i = t.vertex_index_of(hi).unwrap();
            let j = t.vertex_index_of(lo).unwrap();
            assert!(!t.layers_of_edge(i, j).is_empty());
        }
        // scores nonincreasing
        for w in recs.windows(2) {
            assert!(w[0].score >= w[1].score);
        }
    }

    #[test]
    fn popularity_ranking_prefers_heavy_hub_edge() {
        let t = toy();
        let recs = rank_edges_popularity(&t, &g1(), 2).unwrap();
        assert_eq!(recs.len(), 2);
        // weighted importance must pick the weight-4 edge (2,1) in layer 1
        assert_eq!(recs[0].vertex_pair, (2, 1));
        assert_eq!(recs[0].layers, vec![1]);
        // provenance score equals the recomputed entry
        let b = build_supra(&t, &g1());
        let triple =
            spectral::perron(&b, spectral::DEFAULT_TOL, spectral::DEFAULT_MAX_ITER).unwrap();
        let n = t.n_vertices();
        let layer = t.layer_index_of(1).unwrap();
        let (i, j) = (t.vertex_index_of(2).unwrap(), t.vertex_index_of(1).unwrap());
        let at = |r: usize, c: usize| triple.y[layer * n + r] * triple.x[layer * n + c];
        let recomputed = 4.0 * at(i, j).max(at(j, i));
        assert!((recs[0].score - recomputed).abs() <= 1e-12 * recomputed);
    }

    #[test]
    fn unweighted_variant_can_differ() {
        let t = toy();
        let w = rank_edges_popularity_with(&t, &g1(), 5, ImportanceVariant::Weighted).unwrap();
        let u = rank_edges_popularity_with(&t, &g1(), 5, ImportanceVariant::Unweighted).unwrap();
        assert_eq!(w.len(), u.len());
        // same candidate set either way
        let mut wp: Vec<_> = w
            .iter()
            .map(|r| (r.vertex_pair, r.layers.clone()))
            .collect();
        let mut up: Vec<_> = u
            .iter()
            .map(|r| (r.vertex_pair, r.layers.clone()))
            .collect();
        wp.sort();
        up.sort();
        assert_eq!(wp, up);
    }

    #[test]
    fn provenance_entry_matches_score_exactly() {
        // weighted undirected multiplex whose efficiency matrix is
        // asymmetric, so the two orientations genuinely differ
        let t = MultiplexTensor::from_entries(
            &[(1, 1, 2, 1.5), (2, 1, 2, 1.2), (2, 1, 3, 0.5)],
            Directedness::Undirected,
        )
        .unwrap();
        let recs = rank_edges_efficiency(&t, &g1(), KMax::Full, 5).unwrap();
        let p = crate::tropical::path_length_matrix(&t, &g1(), KMax::Full).unwrap();
        let q = efficiency_matrix(&p);
        let triple =
            spectral::perron(q.matrix(), spectral::DEFAULT_TOL, spectral::DEFAULT_MAX_ITER)
                .unwrap();
        let w = spectral::wilkinson(&triple);
        for r in &recs {
            let i = t.vertex_index_of(r.provenance.row_label).unwrap();
            let j = t.vertex_index_of(r.provenance.col_label).unwrap();
            assert_eq!(
                r.score,
                w.entry(i, j),
                "claimed entry ({}, {}) differs from score",
                r.provenance.row_label,
                r.provenance.col_label
            );
        }
    }

    #[test]
    fn top_zero_is_an_error() {
        let t = toy();
        assert!(rank_edges_efficiency(&t, &g1(), KMax::Full, 0).is_err());
        assert!(rank_edges_popularity(&t, &g1(), 0).is_err());
    }

    #[test]
    fn perturbation_modes() {
        let t = toy();
        // add_absolute 1 doubles the unit edge (1,3) in layer 1
        let out = apply_perturbation(
            &t,
            &[EdgeTarget {
                layer: 1,
                src: 1,
                dst: 3,
            }],
            PerturbMode::AddAbsolute(1.0),
        )
        .unwrap();
        let (i, j) = (t.vertex_index_of(1).unwrap(), t.vertex_index_of(3).unwrap());
        assert_eq!(out.weight(0, i, j), Some(2.0));
        assert_eq!(out.weight(0, j, i), Some(2.0)); // symmetric update

        // scale 1.0 leaves the tensor unchanged
        let same = apply_perturbation(
            &t,
            &[EdgeTarget {
                layer: 1,
                src: 1,
                dst: 3,
            }],
            PerturbMode::Scale(1.0),
        )
        .unwrap();
        assert_eq!(same.labeled_entries(), t.labeled_entries());

        // unknown target
        assert!(apply_perturbation(
            &t,
            &[EdgeTarget {
                layer: 2,
                src: 1,
                dst: 2
            }],
            PerturbMode::AddAbsolute(1.0)
        )
        .is_err());
        // nonpositive result
        assert!(apply_perturbation(
            &t,
            &[EdgeTarget {
                layer: 1,
                src: 1,
                dst: 3
            }],
            PerturbMode::AddAbsolute(-1.0)
        )
        .is_err());
        // duplicate orientation of an undirected edge
        assert!(apply_perturbation(
            &t,
            &[
                EdgeTarget {
                    layer: 1,
                    src: 1,
                    dst: 3
                },
                EdgeTarget {
                    layer: 1,
                    src: 3,
                    dst: 1
                }
            ],
            PerturbMode::Scale(1.25)
        )
        .is_err());
    }

    #[test]
    fn compare_measures_null_perturbation() {
        let t = toy();
        let cmp = compare_measures(&t, &t, &g1(), KMax::Full).unwrap();
        assert_eq!(cmp.delta.global_efficiency, 0.0);
        assert_eq!(cmp.delta.total_communicability, 0.0);
        assert_eq!(cmp.delta.rho_supra, 0.0);
        assert_eq!(cmp.delta.rho_efficiency, 0.0);
    }

    #[test]
    fn strengthening_never_decreases_supra_root() {
        let t = toy();
        for target in [
            EdgeTarget {
                layer: 1,
                src: 2,
                dst: 1,
            },
            EdgeTarget {
                layer: 2,
                src: 3,
                dst: 4,
            },
        ] {
            let after = apply_perturbation(&t, &[target], PerturbMode::Scale(1.25)).unwrap();
            let cmp = compare_measures(&t, &after, &g1(), KMax::Full).unwrap();
            assert!(
                cmp.delta.rho_supra >= -1e-10,
                "rho decreased: {}",
                cmp.delta.rho_supra
            );
            assert!(cmp.delta.global_efficiency >= -1e-12);
        }
    }

    #[test]
    fn scores_invariant_under_relabeling() {
        // same multiplex with vertex labels permuted: scores agree, pairs map
        let t1 = toy();
        let relabel = |v: i64| match v {
            1 => 10,
            2 => 20,
            3 => 30,
            4 => 40,
            _ => unreachable!(),
        };
        let entries: Vec<(i64, i64, i64, f64)> = t1
            .labeled_entries()
            .into_iter()
            .map(|(l, s, d, w)| (l, relabel(s), relabel(d), w))
            .collect();
        let t2 = MultiplexTensor::from_entries(&entries, Directedness::Undirected).unwrap();
        let r1 = rank_edges_popularity(&t1, &g1(), 3).unwrap();
        let r2 = rank_edges_popularity(&t2, &g1(), 3).unwrap();
        for (a, b) in r1.iter().zip(&r2) {
            assert!((a.score - b.score).abs() <= 1e-12 * a.score);
            assert_eq!(relabel(a.vertex_pair.0), b.vertex_pair.0);
            assert_eq!(relabel(a.vertex_pair.1), b.vertex_pair.1);
        }
    }
}
