//! Report structures emitted by the CLI. Serialization is deterministic:
//! typed structs keep a stable key order and floats print with at least
//! five significant digits in the table renderer.

use serde::Serialize;

use crate::communicability::CommunicabilityReport;
use crate::efficiency::EfficiencyCertificates;
use crate::ranking::{Approach, EdgeRecommendation, EdgeTarget, MeasureComparison, PerturbMode};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct DatasetMeta {
    pub input: String,
    pub n_vertices: usize,
    pub n_layers: usize,
    pub n_entries: usize,
    pub directed: bool,
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyRow {
    pub k: usize,
    pub pick: (i64, i64),
    pub e_k: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencySection {
    /// smallest K whose length matrix equals the stabilized one, when known
    pub stabilized_at: Option<usize>,
    /// rows in descending K, matching the published table layout
    pub rows: Vec<EfficiencyRow>,
    pub certificates: EfficiencyCertificates,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankingSection {
    pub approach: Approach,
    /// edge budget used by the efficiency approach
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub recommendations: Vec<EdgeRecommendation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationSection {
    pub targets: Vec<EdgeTarget>,
    pub mode: PerturbMode,
    pub comparison: MeasureComparison,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub meta: DatasetMeta,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<EfficiencySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub communicability: Option<CommunicabilityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranking: Option<RankingSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSection>,
}

/// Fixed scientific formatting with 7 significant digits.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    format!("{x:.6e}")
}

impl AnalysisReport {
    pub fn new(meta: DatasetMeta) -> Self {
        AnalysisReport {
            schema_version: SCHEMA_VERSION,
            meta,
            efficiency: None,
            communicability: None,
            ranking: None,
            perturbation: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let m = &self.meta;
        out.push_str(&format!(
            "dataset: {}\n  N = {}, L = {}, entries = {}, directed = {}, gamma = {}\n",
            m.input, m.n_vertices, m.n_layers, m.n_entries, m.directed, m.gamma
        ));
        if let Some(eff) = &self.efficiency {
            match eff.stabilized_at {
                Some(k) => out.push_str(&format!("\nefficiency (stabilized at K* = {k})\n")),
                None => out.push_str("\nefficiency (not stabilized within the budget)\n"),
            }
            out.push_str("  K | pick (i,j) | e^K\n");
            for row in &eff.rows {
                out.push_str(&format!(
                    "  {} | ({},{}) | {}\n",
                    row.k,
                    row.pick.0,
                    row.pick.1,
                    sci(row.e_k)
                ));
            }
            let c = &eff.certificates;
            out.push_str(&format!(
                "certificates at K = {}: identities {} (rel err {} / {}), \
                 harmonic bound {} (slack {}), global bound {} (slack {})\n",
                c.k,
                pass(c.identities_hold),
                sci(c.identity_in_rel_err),
                sci(c.identity_out_rel_err),
                pass(c.harmonic_bound_holds),
                sci(c.harmonic_bound_slack),
                pass(c.global_bound_holds),
                sci(c.global_bound_slack)
            ));
            out.push_str(&format!(
                "  e = {}, rho(P_-1^K) = {}, ||h_in||_inf = {}, ||h_out||_inf = {}\n",
                sci(c.e_k),
                sci(c.rho_k),
                sci(c.h_in_max),
                sci(c.h_out_max)
            ));
        }
        if let Some(c) = &self.communicability {
            out.push_str("\ncommunicability\n");
            out.push_str(&format!(
                "  tc        = {} (ln {})\n",
                sci(c.tc),
                sci(c.ln_tc)
            ));
            out.push_str(&format!(
                "  Pc        = {} (ln {})\n",
                sci(c.pc),
                sci(c.ln_pc)
            ));
            out.push_str(&format!(
                "  Pc_struct = {} (ln {})\n",
                sci(c.pc_struct),
                sci(c.ln_pc_struct)
            ));
            out.push_str(&format!("  rho = {}\n", sci(c.rho)));
            out.push_str(&format!(
                "  kappa = {}, kappa_struct = {}\n",
                sci(c.kappa),
                sci(c.kappa_struct)
            ));
            out.push_str(&format!(
                "  bounds: exp0(rho) = {} <= Pc <= NL*exp0(rho) = {}\n",
                sci(c.bound_lo),
                sci(c.bound_hi)
            ));
            out.push_str(&format!(
                "  structured bound: Pc_struct <= {}\n",
                sci(c.bound_hi_struct)
            ));
            out.push_str(&format!("  tc / (kappa * Pc) = {}\n", sci(c.approx_ratio)));
            if c.violations.is_empty() {
                out.push_str("  all bounds hold\n");
            } else {
                for v in &c.violations {
                    out.push_str(&format!("  VIOLATION: {v}\n"));
                }
            }
        }
        if let Some(r) = &self.ranking {
            match r.k {
                Some(k) => {
                    out.push_str(&format!("\nranking ({:?} approach, K = {k})\n", r.approach))
                }
                None => out.push_str(&format!("\nranking ({:?} approach)\n", r.approach)),
            }
            out.push_str("  rank | edge (i,j) | layers | score\n");
            for rec in &r.recommendations {
                let layers: Vec<String> = rec.layers.iter().map(|l| l.to_string()).collect();
                out.push_str(&format!(
                    "  {} | ({},{}) | {{{}}} | {}\n",
                    rec.rank,
                    rec.vertex_pair.0,
                    rec.vertex_pair.1,
                    layers.join(","),
                    sci(rec.score)
                ));
            }
        }
        if let Some(p) = &self.perturbation {
            out.push_str("\nperturbation\n");
            let mode = match p.mode {
                PerturbMode::AddAbsolute(a) => format!("add {a}"),
                PerturbMode::Scale(f) => format!("scale {f}"),
            };
            out.push_str(&format!("  mode: {mode}\n"));
            for t in &p.targets {
                out.push_str(&format!(
                    "  target: layer {} edge ({},{})\n",
                    t.layer, t.src, t.dst
                ));
            }
            let c = &p.comparison;
            out.push_str("  measure | before | after | delta\n");
            out.push_str(&format!(
                "  e       | {} | {} | {}\n",
                sci(c.before.global_efficiency),
                sci(c.after.global_efficiency),
                sci(c.delta.global_efficiency)
            ));
            out.push_str(&format!(
                "  tc      | {} | {} | {}\n",
                sci(c.before.total_communicability),
                sci(c.after.total_communicability),
                sci(c.delta.total_communicability)
            ));
            out.push_str(&format!(
                "  rho(B)  | {} | {} | {}\n",
                sci(c.before.rho_supra),
                sci(c.after.rho_supra),
                sci(c.delta.rho_supra)
            ));
            out.push_str(&format!(
                "  rho(P-1)| {} | {} | {}\n",
                sci(c.before.rho_efficiency),
                sci(c.after.rho_efficiency),
                sci(c.delta.rho_efficiency)
            ));
        }
        out
    }
}

fn pass(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}
