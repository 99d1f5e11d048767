//! Command-line front end: argument definitions and command execution.
//! Exit codes: 0 success, 2 usage error (via clap), 3 data error,
//! 4 numerical failure.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::communicability::communicability_report;
use crate::dense::MatVec;
use crate::efficiency::{efficiency_certificates, efficiency_matrix, global_k_efficiency};
use crate::error::{Error, Result};
use crate::multiplex::{
    aggregate, build_supra, is_irreducible, load_multiplex, pattern_of, CouplingParameter,
    Directedness, EdgeListFormat, MultiplexTensor,
};
use crate::ranking::{
    apply_perturbation, compare_measures, rank_edges_popularity_from_triple,
    recommend_from_efficiency_triple, Approach, EdgeTarget, ImportanceVariant, PerturbMode,
};
use crate::report::{
    AnalysisReport, DatasetMeta, EfficiencyRow, EfficiencySection, PerturbationSection,
    RankingSection,
};
use crate::spectral::{self, perron};
use crate::tropical::{KMax, KPathIterator};

#[derive(Debug, Parser)]
#[command(
    name = "muxcomm",
    version,
    about = "Multiplex network communication analysis: global efficiency, total communicability, and spectral edge ranking"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    /// extended edge list: `layer src dst [weight]`
    Multiplex,
    /// single-layer edge list: `src dst [weight]`
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputArg {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Input edge-list file
    #[arg(long)]
    pub input: PathBuf,

    /// Input file format
    #[arg(long, value_enum, default_value_t = FormatArg::Multiplex)]
    pub format: FormatArg,

    /// Treat the dataset as undirected (stores both orientations)
    #[arg(long)]
    pub undirected: bool,

    /// Inter-layer coupling weight
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,

    /// Report format
    #[arg(long, value_enum, default_value_t = OutputArg::Table)]
    pub output: OutputArg,

    /// Solver tolerance override
    #[arg(long)]
    pub tol: Option<f64>,

    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,

    /// Print timing diagnostics to stderr
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-K table of the chosen edge and the global K-efficiency
    Efficiency {
        #[command(flatten)]
        common: CommonArgs,
        /// Edge budget: a positive integer or "full"
        #[arg(long, alias = "k", default_value = "full")]
        kmax: KMax,
    },
    /// Total, Perron, and structured Perron communicability with bounds
    Communicability {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Ranked intra-layer edge recommendations
    Rank {
        #[command(flatten)]
        common: CommonArgs,
        /// Selection approach
        #[arg(long, value_enum)]
        approach: ApproachArg,
        /// Edge budget for the efficiency approach
        #[arg(long, alias = "k", default_value = "full")]
        kmax: KMax,
        /// Number of recommendations
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        top: u32,
        /// Rank by bare projected-Wilkinson entries instead of
        /// weight-multiplied importance
        #[arg(long)]
        unweighted_importance: bool,
    },
    /// Apply a perturbation to named edges and compare measures
    PerturbCompare {
        #[command(flatten)]
        common: CommonArgs,
        /// Target edge as layer:src:dst (repeatable; none compares the
        /// network against itself)
        #[arg(long = "edge")]
        edges: Vec<EdgeSpec>,
        /// Perturbation: `add:<amount>` or `scale:<factor>`
        #[arg(long, default_value = "add:1")]
        mode: ModeSpec,
        /// Edge budget for the efficiency measure
        #[arg(long, alias = "k", default_value = "full")]
        kmax: KMax,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ApproachArg {
    Efficiency,
    Popularity,
}

#[derive(Debug, Clone, Copy)]
pub struct EdgeSpec(pub EdgeTarget);

impl FromStr for EdgeSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected layer:src:dst, got '{s}'"));
        }
        let nums: std::result::Result<Vec<i64>, _> =
            parts.iter().map(|p| p.parse::<i64>()).collect();
        match nums {
            Ok(v) => Ok(EdgeSpec(EdgeTarget {
                layer: v[0],
                src: v[1],
                dst: v[2],
            })),
            Err(_) => Err(format!("expected three integers in '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ModeSpec(pub PerturbMode);

impl FromStr for ModeSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| format!("expected add:<amount> or scale:<factor>, got '{s}'"))?;
        let v: f64 = value
            .parse()
            .map_err(|_| format!("cannot parse '{value}' as a number"))?;
        match kind {
            "add" => Ok(ModeSpec(PerturbMode::AddAbsolute(v))),
            "scale" => Ok(ModeSpec(PerturbMode::Scale(v))),
            _ => Err(format!("unknown mode '{kind}', expected add or scale")),
        }
    }
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Efficiency { common, .. }
            | Command::Communicability { common }
            | Command::Rank { common, .. }
            | Command::PerturbCompare { common, .. } => common,
        }
    }
}

struct Timer {
    enabled: bool,
    start: Instant,
}

impl Timer {
    fn new(enabled: bool) -> Self {
        Timer {
            enabled,
            start: Instant::now(),
        }
    }

    fn lap(&mut self, what: &str) {
        if self.enabled {
            eprintln!(
                "timing: {what} {:.1} ms",
                self.start.elapsed().as_secs_f64() * 1e3
            );
        }
        self.start = Instant::now();
    }
}

fn load(common: &CommonArgs) -> Result<(MultiplexTensor, CouplingParameter, DatasetMeta)> {
    if let Some(tol) = common.tol {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::Data(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
    }
    let format = match common.format {
        FormatArg::Multiplex => EdgeListFormat::Extended,
        FormatArg::Single => EdgeListFormat::SingleLayer,
    };
    let directedness = if common.undirected {
        Directedness::Undirected
    } else {
        Directedness::Directed
    };
    let tensor = load_multiplex(&common.input, format, directedness)?;
    let gamma = CouplingParameter::new(common.gamma)?;
    let meta = DatasetMeta {
        input: common.input.display().to_string(),
        n_vertices: tensor.n_vertices(),
        n_layers: tensor.n_layers(),
        n_entries: tensor.n_entries(),
        directed: !common.undirected,
        gamma: gamma.gamma(),
    };
    Ok((tensor, gamma, meta))
}

fn solver_tol(common: &CommonArgs) -> f64 {
    common.tol.unwrap_or(spectral::DEFAULT_TOL)
}

/// Builds the per-K efficiency table: each level's top edge pick (largest
/// projected-Wilkinson entry of P^K_{−1}) and global K-efficiency, plus
/// the certificates evaluated at the final level.
pub fn efficiency_section(
    t: &MultiplexTensor,
    g: &CouplingParameter,
    k_max: KMax,
    tol: f64,
) -> Result<EfficiencySection> {
    let a_plus = aggregate(t);
    if !is_irreducible(&a_plus) {
        eprintln!("warning: the aggregate matrix is reducible; Perron vectors may vanish on part of the network");
    }
    let pattern = pattern_of(&a_plus);
    let mut rows = Vec::new();
    let mut final_cert = None;
    let mut iter = KPathIterator::new(t, g, k_max)?;
    while let Some(p) = iter.next_level(t)? {
        let q = efficiency_matrix(p);
        let e_k = global_k_efficiency(&q)?;
        let triple = perron(q.matrix(), tol, spectral::DEFAULT_MAX_ITER)?;
        let recs = recommend_from_efficiency_triple(t, &triple, &pattern, p.k(), 1)?;
        let pick = recs
            .first()
            .map(|r| r.vertex_pair)
            .ok_or_else(|| Error::Data("the multiplex has no intra-layer edges".into()))?;
        rows.push(EfficiencyRow {
            k: p.k(),
            pick,
            e_k,
        });
        final_cert = Some(efficiency_certificates(&q, triple.rho)?);
    }
    rows.reverse(); // descending K, the published layout
    let p = iter.into_final();
    Ok(EfficiencySection {
        stabilized_at: p.stabilized_at(),
        rows,
        certificates: final_cert.expect("at least one level always runs"),
    })
}

/// Executes one parsed command and returns the report. Diagnostics go to
/// stderr; the caller renders the report to stdout.
pub fn execute(command: &Command) -> Result<AnalysisReport> {
    let common = command.common();
    if let Some(threads) = common.threads {
        // ignore the error when a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let mut timer = Timer::new(common.timings);
    let (tensor, gamma, meta) = load(common)?;
    timer.lap("load");
    let mut report = AnalysisReport::new(meta);

    match command {
        Command::Efficiency { common, kmax } => {
            report.efficiency = Some(efficiency_section(
                &tensor,
                &gamma,
                *kmax,
                solver_tol(common),
            )?);
            timer.lap("efficiency");
        }
        Command::Communicability { common } => {
            let b = build_supra(&tensor, &gamma);
            if !b.strongly_connected() {
                eprintln!("warning: the supra-adjacency matrix is reducible");
            }
            let triple = perron(&b, solver_tol(common), spectral::DEFAULT_MAX_ITER)?;
            let pattern = b.intra_layer_pattern();
            let tc_tol = common.tol;
            report.communicability = Some(communicability_report(&b, &pattern, &triple, tc_tol)?);
            timer.lap("communicability");
        }
        Command::Rank {
            common,
            approach,
            kmax,
            top,
            unweighted_importance,
        } => {
            let top = *top as usize;
            match approach {
                ApproachArg::Efficiency => {
                    let a_plus = aggregate(&tensor);
                    if !is_irreducible(&a_plus) {
                        eprintln!("warning: the aggregate matrix is reducible");
                    }
                    let pattern = pattern_of(&a_plus);
                    let mut iter = KPathIterator::new(&tensor, &gamma, *kmax)?;
                    let mut last_k = 1;
                    let mut last_triple = None;
                    while let Some(p) = iter.next_level(&tensor)? {
                        let q = efficiency_matrix(p);
                        last_k = p.k();
                        last_triple = Some(perron(
                            q.matrix(),
                            solver_tol(common),
                            spectral::DEFAULT_MAX_ITER,
                        )?);
                    }
                    let triple = last_triple.expect("at least one level always runs");
                    let recs =
                        recommend_from_efficiency_triple(&tensor, &triple, &pattern, last_k, top)?;
                    report.ranking = Some(RankingSection {
                        approach: Approach::Efficiency,
                        k: Some(last_k),
                        recommendations: recs,
                    });
                }
                ApproachArg::Popularity => {
                    let b = build_supra(&tensor, &gamma);
                    if !b.strongly_connected() {
                        eprintln!("warning: the supra-adjacency matrix is reducible");
                    }
                    let triple = perron(&b, solver_tol(common), spectral::DEFAULT_MAX_ITER)?;
                    let variant = if *unweighted_importance {
                        ImportanceVariant::Unweighted
                    } else {
                        ImportanceVariant::Weighted
                    };
                    let recs = rank_edges_popularity_from_triple(&tensor, &triple, top, variant)?;
                    report.ranking = Some(RankingSection {
                        approach: Approach::Popularity,
                        k: None,
                        recommendations: recs,
                    });
                }
            }
            timer.lap("rank");
        }
        Command::PerturbCompare {
            edges, mode, kmax, ..
        } => {
            let targets: Vec<EdgeTarget> = edges.iter().map(|e| e.0).collect();
            let perturbed = apply_perturbation(&tensor, &targets, mode.0)?;
            let comparison = compare_measures(&tensor, &perturbed, &gamma, *kmax)?;
            report.perturbation = Some(PerturbationSection {
                targets,
                mode: mode.0,
                comparison,
            });
            timer.lap("perturb-compare");
        }
    }
    Ok(report)
}

/// Renders the report per the requested output format.
pub fn render(report: &AnalysisReport, output: OutputArg) -> String {
    match output {
        OutputArg::Table => report.to_table(),
        OutputArg::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
    }
}
