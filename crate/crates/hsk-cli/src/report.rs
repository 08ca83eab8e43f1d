//! Machine-readable report bodies. These JSON shapes are the stability
//! contract of the CLI; the aligned text on stdout is for people and may be
//! reworded freely.

use serde::Serialize;

use hsk_core::homshift::{GrowthClass, ProbeReport};
use hsk_core::presentation::Presentation;
use hsk_core::snf::AbelianInvariants;

#[derive(Serialize)]
pub struct GraphStats {
    pub vertices: usize,
    pub edges: usize,
    pub loops: usize,
}

#[derive(Serialize)]
pub struct FundamentalReport {
    pub free_rank: usize,
    pub loop_factors: usize,
}

#[derive(Serialize)]
pub struct SquareGroupReport {
    pub generators: Vec<String>,
    pub relators: Vec<Vec<String>>,
    /// Group order when enumeration closed, otherwise null.
    pub order: Option<usize>,
    /// Live cosets at the point the budget ran out; null when closed.
    pub live_cosets: Option<usize>,
    pub budget: usize,
    pub abelianization: AbelianInvariants,
    pub certified_infinite: bool,
}

#[derive(Serialize)]
pub struct SquareCoverReport {
    pub sheets: Option<usize>,
    pub vertices: Option<usize>,
    /// Truncation note when the cover could not be completed.
    pub note: Option<String>,
}

#[derive(Serialize)]
pub struct AnalysisReport {
    pub graph: GraphStats,
    pub connected: bool,
    pub bipartite: bool,
    pub fundamental: FundamentalReport,
    pub square_group: SquareGroupReport,
    pub square_cover: SquareCoverReport,
    /// "logarithmic", "linear", or "unresolved" per the finiteness dichotomy.
    pub predicted_gluing: String,
    /// Bipartite bases glue only up to phase.
    pub phased: bool,
    pub mixing: bool,
    pub warnings: Vec<String>,
}

pub fn presentation_tokens(p: &Presentation) -> (Vec<String>, Vec<Vec<String>>) {
    let gens = p.generators().to_vec();
    let rels = p.relators().iter().map(|r| p.word_tokens(r)).collect();
    (gens, rels)
}

#[derive(Serialize)]
pub struct ComponentCount {
    pub part: String,
    pub prefix: String,
    pub vertices: usize,
}

#[derive(Serialize)]
pub struct RealizeReport {
    pub base_vertex: String,
    pub total_vertices: usize,
    pub total_edges: usize,
    pub bipartite: bool,
    pub components: Vec<ComponentCount>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
pub struct ProbeEntryReport {
    pub n: usize,
    pub vertices: usize,
    pub diameter: usize,
    pub exact: bool,
    pub connected: bool,
}

#[derive(Serialize)]
pub struct ProbeJsonReport {
    pub entries: Vec<ProbeEntryReport>,
    pub classification: String,
    pub linear_residual: Option<f64>,
    pub log_residual: Option<f64>,
    pub square_group_order: Option<usize>,
    pub certified_infinite: bool,
    pub coherent: Option<bool>,
    pub notes: Vec<String>,
}

pub fn growth_class_name(c: GrowthClass) -> &'static str {
    match c {
        GrowthClass::Logarithmic => "logarithmic",
        GrowthClass::Linear => "linear",
        GrowthClass::Bounded => "bounded",
        GrowthClass::Inconclusive => "inconclusive",
    }
}

pub fn probe_json(rep: &ProbeReport) -> ProbeJsonReport {
    ProbeJsonReport {
        entries: rep
            .entries
            .iter()
            .map(|e| ProbeEntryReport {
                n: e.n,
                vertices: e.vertices,
                diameter: e.diameter,
                exact: e.exact,
                connected: e.connected,
            })
            .collect(),
        classification: growth_class_name(rep.classification).to_string(),
        linear_residual: rep.linear_residual,
        log_residual: rep.log_residual,
        square_group_order: match rep.square_group {
            hsk_core::coset::GroupOrder::Finite(n) => Some(n),
            hsk_core::coset::GroupOrder::Unknown => None,
        },
        certified_infinite: rep.infinite_certified,
        coherent: rep.coherent,
        notes: rep.notes.clone(),
    }
}

#[derive(Serialize)]
pub struct CoverReport {
    pub outcome: String,
    pub sheets: Option<usize>,
    pub total_vertices: Option<usize>,
    pub radius: Option<usize>,
    pub basepoint: Option<String>,
    pub live_cosets: Option<usize>,
    pub budget: Option<usize>,
}

#[derive(Serialize)]
pub struct LiftJsonReport {
    pub outcome: String,
    pub start: String,
    pub width: usize,
    pub height: usize,
    /// Path of the lifted pattern on success.
    pub output: Option<String>,
    /// Obstructed cell and the two incompatible values, on failure.
    pub cell: Option<[usize; 2]>,
    pub values: Option<[String; 2]>,
}

pub fn to_json_line(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialize report");
    s.push('\n');
    s
}
