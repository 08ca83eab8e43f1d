//! Single-binary front end. Every subcommand is a pure function of its
//! input files and flags: reports are emitted as aligned text on stdout plus
//! machine-readable JSON, and identical invocations produce byte-identical
//! files.
//!
//! Exit codes: 0 success, 2 usage or validation failure, 3 budget
//! exhaustion (a partial report file is still written).

mod report;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hsk_core::coset::{enumerate, Enumeration};
use hsk_core::cover::{square_cover, universal_cover_ball, Cover, SquareCover};
use hsk_core::graph::{spanning_tree, Graph, SpanningTree};
use hsk_core::homshift::{gluing_rate_probe, lift_pattern, Pattern, PatternLift, ProbeBudgets};
use hsk_core::presentation::{
    classify_fundamental, simplify, square_presentation, Presentation, SimplifyEffort,
};
use hsk_core::realization::{realize, Nu, RealizationConfig};

use report::*;

#[derive(Parser)]
#[command(
    name = "hsk",
    version,
    about = "Square groups, covers and gluing-rate probes for finite graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full invariant report for one graph
    Analyze(AnalyzeArgs),
    /// Compile a group presentation into a graph whose square group realizes it
    Realize(RealizeArgs),
    /// Measure strip-graph diameters and classify the gluing rate
    Probe(ProbeArgs),
    /// Build the square cover or a truncated universal cover
    Cover(CoverArgs),
    /// Lift a pattern through a cover
    Lift(LiftArgs),
    /// Render a graph or cover as GraphViz DOT
    ExportDot(ExportDotArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Graph file (JSON with "vertices" and "edges")
    graph: PathBuf,
    /// Coset enumeration budget
    #[arg(long, default_value_t = 50_000)]
    max_cosets: usize,
    /// Root vertex for the spanning tree (default: first vertex)
    #[arg(long)]
    tree_root: Option<String>,
    /// Depth of the relator-redundancy search during simplification
    #[arg(long, default_value_t = 4)]
    rewrite_depth: usize,
    /// Write the closed coset table as a plain-text permutation listing
    #[arg(long)]
    table_out: Option<PathBuf>,
    /// Write the JSON report here
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum NuArg {
    Zero,
    Alternating,
}

#[derive(Args)]
struct RealizeArgs {
    /// Presentation file ("generators: ..." then "relator: ..." lines)
    presentation: PathBuf,
    /// Petal cycle length (even, at least 6)
    #[arg(long, default_value_t = 6)]
    petal: usize,
    /// Rung pattern on relator disks
    #[arg(long, value_enum, default_value_t = NuArg::Alternating)]
    nu: NuArg,
    /// Graph file to write; a sidecar <output>.report.json lists the parts
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ProbeArgs {
    /// Graph file
    graph: PathBuf,
    /// Largest strip length to measure
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Stop once a strip would exceed this many walks
    #[arg(long, default_value_t = 500_000)]
    walk_cap: usize,
    /// Coset enumeration budget for the algebraic cross-reference
    #[arg(long, default_value_t = 50_000)]
    max_cosets: usize,
    /// Write the JSON report here (always written on budget exhaustion)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CoverArgs {
    /// Graph file
    graph: PathBuf,
    /// Build the exact square cover (requires the square group to enumerate)
    #[arg(long, group = "kind", required = true)]
    square: bool,
    /// Build a truncated ball of the universal cover instead
    #[arg(long, group = "kind")]
    universal: bool,
    /// Ball radius for --universal
    #[arg(long, default_value_t = 4)]
    radius: usize,
    /// Ball basepoint for --universal (default: first vertex)
    #[arg(long)]
    basepoint: Option<String>,
    /// Root vertex for the spanning tree behind --square
    #[arg(long)]
    tree_root: Option<String>,
    /// Coset enumeration budget for --square
    #[arg(long, default_value_t = 50_000)]
    max_cosets: usize,
    /// Cover file to write; a sidecar <output>.report.json summarizes it
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct LiftArgs {
    /// Base graph file
    graph: PathBuf,
    /// Pattern file (JSON with "width", "height", row-major "cells")
    pattern: PathBuf,
    /// Cover file produced by `hsk cover`
    #[arg(long)]
    cover: PathBuf,
    /// Fiber vertex lifting the pattern corner (default: least by name)
    #[arg(long)]
    start: Option<String>,
    /// Where to write the lifted pattern on success
    #[arg(short, long, default_value = "lifted.json")]
    output: PathBuf,
}

#[derive(Args)]
struct ExportDotArgs {
    /// Graph file, or a cover file when --cover is given
    input: PathBuf,
    /// Treat the input as a cover and color fibers by base vertex
    #[arg(long)]
    cover: bool,
    /// DOT file to write (default: stdout)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() {
    // Die quietly when the consumer of our stdout goes away (| head, | less
    // quit early), like every other line-printing tool.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let budget = e
                .chain()
                .any(|c| matches!(c.downcast_ref(), Some(hsk_core::Error::BudgetExhausted(_))));
            std::process::exit(if budget { 3 } else { 2 });
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Analyze(a) => cmd_analyze(a),
        Cmd::Realize(a) => cmd_realize(a),
        Cmd::Probe(a) => cmd_probe(a),
        Cmd::Cover(a) => cmd_cover(a),
        Cmd::Lift(a) => cmd_lift(a),
        Cmd::ExportDot(a) => cmd_export_dot(a),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_graph(path: &Path) -> Result<(Arc<Graph>, Vec<String>)> {
    let (g, warnings) = Graph::parse(&read(path)?)
        .with_context(|| format!("loading graph {}", path.display()))?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok((Arc::new(g), warnings))
}

fn tree_for(g: &Arc<Graph>, root: &Option<String>) -> Result<SpanningTree> {
    let root = root.clone().unwrap_or_else(|| g.name(0).to_string());
    Ok(spanning_tree(g, &root)?)
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("report.json")
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<i32> {
    let (g, warnings) = load_graph(&a.graph)?;
    if !g.is_connected() {
        bail!("graph is not connected; analyze one component at a time");
    }
    let bipartite = g.is_bipartite()?;
    let (free_rank, loop_factors) = classify_fundamental(&g)?;
    let t = tree_for(&g, &a.tree_root)?;

    let sq = square_presentation(&g, &t);
    let effort = SimplifyEffort { redundancy_depth: a.rewrite_depth, ..SimplifyEffort::default() };
    let s = simplify(&sq.presentation, effort);
    let enumeration = enumerate(&s.presentation, a.max_cosets)?;
    let ab = s.presentation.abelianization();
    let certified_infinite = ab.free_rank > 0;

    let (order, live_cosets) = match &enumeration {
        Enumeration::Finite(table) => (Some(table.coset_count()), None),
        Enumeration::Unknown { live_cosets, .. } => (None, Some(*live_cosets)),
    };
    let cover = match order {
        Some(n) => SquareCoverReport {
            sheets: Some(n),
            vertices: Some(n * g.vertex_count()),
            note: None,
        },
        None => SquareCoverReport {
            sheets: None,
            vertices: None,
            note: Some(format!(
                "not constructed: enumeration kept {} live cosets at budget {}",
                live_cosets.unwrap(),
                a.max_cosets
            )),
        },
    };
    let predicted = match (order, certified_infinite) {
        (Some(_), _) => "logarithmic",
        (None, true) => "linear",
        (None, false) => "unresolved",
    };
    let mixing = !bipartite;

    let (gens, rels) = presentation_tokens(&s.presentation);
    let rep = AnalysisReport {
        graph: GraphStats {
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            loops: g.loop_count(),
        },
        connected: true,
        bipartite,
        fundamental: FundamentalReport { free_rank, loop_factors },
        square_group: SquareGroupReport {
            generators: gens,
            relators: rels,
            order,
            live_cosets,
            budget: a.max_cosets,
            abelianization: ab,
            certified_infinite,
        },
        square_cover: cover,
        predicted_gluing: predicted.to_string(),
        phased: bipartite,
        mixing,
        warnings,
    };

    println!(
        "graph: {} vertices, {} edges, {} loops",
        rep.graph.vertices, rep.graph.edges, rep.graph.loops
    );
    println!("connected: yes");
    println!("bipartite: {}", if bipartite { "yes" } else { "no" });
    println!("fundamental group: free rank {free_rank}, loop factors {loop_factors}");
    println!("square group presentation (simplified):");
    for line in s.presentation.to_text().lines() {
        println!("  {line}");
    }
    match order {
        Some(n) => println!("square group: order {n} (enumeration closed)"),
        None => println!(
            "square group: order unknown ({} live cosets at budget {})",
            rep.square_group.live_cosets.unwrap(),
            a.max_cosets
        ),
    }
    println!(
        "abelianization: free rank {}, invariant factors {:?}",
        rep.square_group.abelianization.free_rank, rep.square_group.abelianization.invariant_factors
    );
    match (&rep.square_cover.sheets, &rep.square_cover.note) {
        (Some(sheets), _) => println!(
            "square cover: {sheets} sheet{}, {} vertices",
            if *sheets == 1 { "" } else { "s" },
            rep.square_cover.vertices.unwrap()
        ),
        (None, Some(note)) => println!("square cover: {note}"),
        (None, None) => unreachable!(),
    }
    let phase_tag = if bipartite { " (phased: bipartite base)" } else { "" };
    println!("predicted gluing: {predicted}{phase_tag}");
    println!("mixing: {}", if mixing { "yes" } else { "no" });

    if let Some(path) = &a.table_out {
        let Enumeration::Finite(table) = &enumeration else {
            bail!("--table-out needs a closed table; raise --max-cosets");
        };
        let mut text = format!("cosets: {}\n", table.coset_count());
        for (i, name) in s.presentation.generators().iter().enumerate() {
            let images: Vec<String> =
                table.permutation_of_gen(i as u32).iter().map(|x| x.to_string()).collect();
            text.push_str(&format!("{name}: {}\n", images.join(" ")));
        }
        write(path, &text)?;
        println!("coset table written to {}", path.display());
    }
    if let Some(path) = &a.output {
        write(path, &to_json_line(&rep))?;
        println!("report written to {}", path.display());
    }
    Ok(0)
}

fn cmd_realize(a: RealizeArgs) -> Result<i32> {
    let p = Presentation::parse(&read(&a.presentation)?)
        .with_context(|| format!("loading presentation {}", a.presentation.display()))?;
    let cfg = RealizationConfig {
        petal: a.petal,
        nu: match a.nu {
            NuArg::Zero => Nu::Zero,
            NuArg::Alternating => Nu::Alternating,
        },
    };
    let r = realize(&p, &cfg)?;
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    write(&a.output, &r.graph.to_json())?;

    let names = r.graph.vertex_names();
    let count_prefix =
        |prefix: &str| names.iter().filter(|n| n.starts_with(&format!("{prefix}."))).count();
    let mut components =
        vec![ComponentCount { part: "base vertex".into(), prefix: r.base_vertex.clone(), vertices: 1 }];
    for (gen, prefix) in &r.generator_petals {
        components.push(ComponentCount {
            part: format!("petal for generator {gen}"),
            prefix: prefix.clone(),
            vertices: count_prefix(prefix),
        });
    }
    for prefix in &r.relator_disks {
        components.push(ComponentCount {
            part: "relator disk".into(),
            prefix: prefix.clone(),
            vertices: count_prefix(prefix),
        });
    }
    let rep = RealizeReport {
        base_vertex: r.base_vertex.clone(),
        total_vertices: r.graph.vertex_count(),
        total_edges: r.graph.edge_count(),
        bipartite: r.graph.is_bipartite()?,
        components,
        warnings: r.warnings.clone(),
    };
    write(&sidecar(&a.output), &to_json_line(&rep))?;

    println!(
        "realized: {} vertices, {} edges{}",
        rep.total_vertices,
        rep.total_edges,
        if rep.bipartite { ", bipartite" } else { "" }
    );
    for c in &rep.components {
        println!("  {:>3} vertices  {} ({})", c.vertices, c.part, c.prefix);
    }
    println!("graph written to {}", a.output.display());
    println!("report written to {}", sidecar(&a.output).display());
    Ok(0)
}

fn cmd_probe(a: ProbeArgs) -> Result<i32> {
    let (g, _) = load_graph(&a.graph)?;
    let budgets = ProbeBudgets { walk_cap: a.walk_cap, max_cosets: a.max_cosets, ..ProbeBudgets::default() };
    let rep = gluing_rate_probe(&g, a.n_max, &budgets)?;

    println!("  n  vertices  diameter  exact");
    for e in &rep.entries {
        println!(
            "{:>3}  {:>8}  {:>8}  {}",
            e.n,
            e.vertices,
            e.diameter,
            if e.exact { "yes" } else { "no" }
        );
    }
    match (rep.linear_residual, rep.log_residual) {
        (Some(lin), Some(log)) => println!(
            "classification: {} (linear residual {lin:.4}, log residual {log:.4})",
            growth_class_name(rep.classification)
        ),
        _ => println!("classification: {}", growth_class_name(rep.classification)),
    }
    match rep.square_group {
        hsk_core::coset::GroupOrder::Finite(n) => println!("square group: order {n}"),
        hsk_core::coset::GroupOrder::Unknown => println!("square group: order unknown"),
    }
    println!("certified infinite: {}", if rep.infinite_certified { "yes" } else { "no" });
    match rep.coherent {
        Some(true) => println!("coherent with the algebra: yes"),
        Some(false) => println!("coherent with the algebra: NO"),
        None => println!("coherent with the algebra: nothing to compare"),
    }
    for note in &rep.notes {
        println!("note: {note}");
    }

    let truncated = rep.notes.iter().any(|n| n.starts_with("stopped at n"));
    let json = to_json_line(&probe_json(&rep));
    match (&a.output, truncated) {
        (Some(path), _) => {
            write(path, &json)?;
            println!("report written to {}", path.display());
        }
        (None, true) => {
            // Budget exhaustion must leave a report file behind even when
            // none was asked for.
            let path = a.graph.with_extension("probe.json");
            write(&path, &json)?;
            println!("partial report written to {}", path.display());
        }
        (None, false) => {}
    }
    Ok(if truncated { 3 } else { 0 })
}

fn cmd_cover(a: CoverArgs) -> Result<i32> {
    let (g, _) = load_graph(&a.graph)?;
    if a.universal {
        let basepoint = a.basepoint.clone().unwrap_or_else(|| g.name(0).to_string());
        let ball = universal_cover_ball(&g, &basepoint, a.radius)?;
        write(&a.output, &ball.to_json())?;
        let rep = CoverReport {
            outcome: "truncated_ball".into(),
            sheets: None,
            total_vertices: Some(ball.total().vertex_count()),
            radius: Some(a.radius),
            basepoint: Some(basepoint.clone()),
            live_cosets: None,
            budget: None,
        };
        write(&sidecar(&a.output), &to_json_line(&rep))?;
        println!(
            "universal cover ball: radius {} at {}, {} vertices",
            a.radius,
            basepoint,
            ball.total().vertex_count()
        );
        println!("cover written to {}", a.output.display());
        return Ok(0);
    }

    let t = tree_for(&g, &a.tree_root)?;
    match square_cover(&g, &t, a.max_cosets)? {
        SquareCover::Exact(c) => {
            write(&a.output, &c.to_json())?;
            let rep = CoverReport {
                outcome: "exact".into(),
                sheets: c.sheet_count(),
                total_vertices: Some(c.total().vertex_count()),
                radius: None,
                basepoint: None,
                live_cosets: None,
                budget: Some(a.max_cosets),
            };
            write(&sidecar(&a.output), &to_json_line(&rep))?;
            match c.sheet_count() {
                Some(1) => println!("square cover: 1 sheet, {} vertices", c.total().vertex_count()),
                Some(s) => {
                    println!("square cover: {s} sheets, {} vertices", c.total().vertex_count())
                }
                None => println!(
                    "square cover: uneven fibers, {} vertices",
                    c.total().vertex_count()
                ),
            }
            println!("cover written to {}", a.output.display());
            Ok(0)
        }
        SquareCover::Unknown { live_cosets, budget } => {
            let rep = CoverReport {
                outcome: "budget_exhausted".into(),
                sheets: None,
                total_vertices: None,
                radius: None,
                basepoint: None,
                live_cosets: Some(live_cosets),
                budget: Some(budget),
            };
            write(&sidecar(&a.output), &to_json_line(&rep))?;
            eprintln!(
                "square group enumeration kept {live_cosets} live cosets at budget {budget}; \
                 no exact cover. Partial report written to {}",
                sidecar(&a.output).display()
            );
            Ok(3)
        }
    }
}

fn graphs_match(a: &Graph, b: &Graph) -> bool {
    let mut an: Vec<&String> = a.vertex_names().iter().collect();
    let mut bn: Vec<&String> = b.vertex_names().iter().collect();
    an.sort();
    bn.sort();
    if an != bn {
        return false;
    }
    let edge_set = |g: &Graph| {
        let mut e: Vec<(String, String)> = g
            .undirected_edges()
            .map(|(u, v)| {
                let (x, y) = (g.name(u).to_string(), g.name(v).to_string());
                if x <= y {
                    (x, y)
                } else {
                    (y, x)
                }
            })
            .collect();
        e.sort();
        e
    };
    edge_set(a) == edge_set(b)
}

fn cmd_lift(a: LiftArgs) -> Result<i32> {
    let (g, _) = load_graph(&a.graph)?;
    let pattern = Pattern::parse(&read(&a.pattern)?)
        .with_context(|| format!("loading pattern {}", a.pattern.display()))?;
    let cover = Cover::parse(&read(&a.cover)?)
        .with_context(|| format!("loading cover {}", a.cover.display()))?;
    if !graphs_match(cover.base(), &g) {
        bail!(
            "cover in {} is not a cover of the graph in {}",
            a.cover.display(),
            a.graph.display()
        );
    }

    let corner = cover.base().id(pattern.get(0, 0))?;
    let start = match &a.start {
        Some(s) => s.clone(),
        None => {
            let mut fiber: Vec<&str> =
                cover.fiber(corner).into_iter().map(|x| cover.total().name(x)).collect();
            fiber.sort();
            fiber
                .first()
                .ok_or_else(|| anyhow!("empty fiber over pattern corner"))?
                .to_string()
        }
    };

    match lift_pattern(&cover, &pattern, &start)? {
        PatternLift::Lifted(lifted) => {
            write(&a.output, &lifted.to_json())?;
            let rep = LiftJsonReport {
                outcome: "lifted".into(),
                start,
                width: pattern.width,
                height: pattern.height,
                output: Some(a.output.display().to_string()),
                cell: None,
                values: None,
            };
            write(&sidecar(&a.output), &to_json_line(&rep))?;
            println!(
                "pattern lifts: {}x{} box from {}",
                pattern.width, pattern.height, rep.start
            );
            println!("lifted pattern written to {}", a.output.display());
            Ok(0)
        }
        PatternLift::Obstruction { cell, values } => {
            let rep = LiftJsonReport {
                outcome: "obstruction".into(),
                start,
                width: pattern.width,
                height: pattern.height,
                output: None,
                cell: Some([cell.0, cell.1]),
                values: Some([values.0.clone(), values.1.clone()]),
            };
            write(&sidecar(&a.output), &to_json_line(&rep))?;
            println!(
                "pattern does not lift: cell ({}, {}) would need both {} and {}",
                cell.0, cell.1, values.0, values.1
            );
            println!("report written to {}", sidecar(&a.output).display());
            Ok(0)
        }
    }
}

fn cmd_export_dot(a: ExportDotArgs) -> Result<i32> {
    let dot = if a.cover {
        Cover::parse(&read(&a.input)?)
            .with_context(|| format!("loading cover {}", a.input.display()))?
            .to_dot()
    } else {
        let (g, _) = load_graph(&a.input)?;
        g.to_dot()
    };
    match &a.output {
        Some(path) => {
            write(path, &dot)?;
            println!("dot written to {}", path.display());
        }
        None => print!("{dot}"),
    }
    Ok(0)
}
