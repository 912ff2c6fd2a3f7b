//! Command-line surface for the successor lane graph toolkit.
//!
//! Subcommands compose the library pipelines. All diagnostics go to
//! stderr; data goes to files (or stdout for `loss`/`eval` summaries).
//! Exit codes: 0 ok, 1 usage, 2 bad data, 3 internal failure.

use std::panic::AssertUnwindSafe;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lanegraph::aggregate::{proposals_to_graph, AggregationConfig, Representation};
use lanegraph::config::ToolConfig;
use lanegraph::curve::{fit_bezier, resample_polyline, Polyline};
use lanegraph::decompose::{decompose, path_to_polyline, DEFAULT_MAX_PATHS};
use lanegraph::doc::{
    load_graph, load_json, save_graph, save_json, AssignmentDocument, PairDoc, PathEntry,
    PathSetDocument, ProposalDocument, ReportDocument, SCHEMA_VERSION,
};
use lanegraph::geom::Point;
use lanegraph::graph::Extent;
use lanegraph::matching::{hungarian, match_cost, set_loss, MatchWeights, PathProposal};
use lanegraph::metrics::evaluate;
use lanegraph::synth::{generate_synthetic, SyntheticSpec};

#[derive(Parser)]
#[command(
    name = "lanegraph",
    version,
    about = "Successor lane graph toolkit: decomposition, representation, matching, aggregation, and metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReprArg {
    Polyline,
    Bezier,
}

impl From<ReprArg> for Representation {
    fn from(value: ReprArg) -> Self {
        match value {
            ReprArg::Polyline => Representation::Polyline,
            ReprArg::Bezier => Representation::Bezier,
        }
    }
}

fn parse_extent(raw: &str) -> Result<Extent, String> {
    let (w, h) = raw
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH (e.g. 256x256), got \"{raw}\""))?;
    let width: u32 = w.trim().parse().map_err(|e| format!("width: {e}"))?;
    let height: u32 = h.trim().parse().map_err(|e| format!("height: {e}"))?;
    if width == 0 || height == 0 {
        return Err("extent must be non-zero".into());
    }
    Ok(Extent::new(width, height))
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a lane graph into its maximal-length paths
    Decompose {
        /// Input graph document (pixel coordinates)
        #[arg(long)]
        graph: PathBuf,
        /// Output path-set document
        #[arg(long)]
        out: PathBuf,
        /// Abort if the graph has more maximal paths than this
        #[arg(long, default_value_t = DEFAULT_MAX_PATHS)]
        max_paths: u64,
    },
    /// Convert decomposed paths to polyline or Bezier control points
    Represent {
        /// Input path-set document (from `decompose`)
        #[arg(long)]
        paths: PathBuf,
        /// Target representation
        #[arg(long, value_enum)]
        to: ReprArg,
        /// Number of polyline control points
        #[arg(long, default_value_t = 20)]
        n_cp: usize,
        /// Bezier degree
        #[arg(long, default_value_t = 10)]
        degree: usize,
        /// Output proposal document (normalized coordinates)
        #[arg(long)]
        out: PathBuf,
        /// RoI size; overrides the extent recorded in the path document
        #[arg(long, value_parser = parse_extent)]
        extent: Option<Extent>,
    },
    /// Optimally match ground-truth paths against proposals
    Match {
        /// Ground-truth proposal document (likelihoods ignored)
        #[arg(long)]
        gt: PathBuf,
        /// Predicted proposal document
        #[arg(long)]
        pred: PathBuf,
        /// Spatial cost weight
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Classification cost weight
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Output assignment document (pairs + cost matrix)
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the composite set loss between ground truth and proposals
    Loss {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Fuse thresholded proposals into a successor lane graph
    Aggregate {
        /// Predicted proposal document (normalized coordinates)
        #[arg(long)]
        pred: PathBuf,
        /// Minimum likelihood threshold
        #[arg(long, default_value_t = 0.5)]
        p_min: f64,
        /// Node merge radius in pixels
        #[arg(long, default_value_t = 10.0)]
        d_max: f64,
        /// RoI size used to denormalize coordinates
        #[arg(long, value_parser = parse_extent)]
        extent: Extent,
        /// Resample each decoded path to this many points before merging
        #[arg(long)]
        n_cp_out: Option<usize>,
        /// Output graph document
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a predicted graph against ground truth
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Flat key=value config file; flags below override it
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output report document
        #[arg(long)]
        out: PathBuf,
        /// Raster extent; defaults to the ground-truth document's extent
        #[arg(long, value_parser = parse_extent)]
        extent: Option<Extent>,
        #[arg(long)]
        interp_dist: Option<f64>,
        #[arg(long)]
        match_dist: Option<f64>,
        #[arg(long)]
        topo_radius: Option<f64>,
        #[arg(long)]
        lane_halfwidth: Option<f64>,
        /// Comma-separated SDA thresholds in pixels
        #[arg(long)]
        sda_thresholds: Option<String>,
    },
    /// Generate a seeded synthetic lane graph
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Binary split levels (2^n maximal paths)
        #[arg(long, default_value_t = 1)]
        n_splits: u32,
        /// Chain segments between splits
        #[arg(long, default_value_t = 3)]
        depth: u32,
        /// Lateral jitter amplitude in pixels
        #[arg(long, default_value_t = 2.0)]
        jitter: f64,
        /// RoI size
        #[arg(long, value_parser = parse_extent)]
        extent: Extent,
        /// Output graph document
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let code = match std::panic::catch_unwind(AssertUnwindSafe(real_main)) {
        Ok(code) => code,
        Err(_) => {
            eprintln!("error: internal failure (panic)");
            3
        }
    };
    std::process::exit(code);
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Decompose {
            graph,
            out,
            max_paths,
        } => cmd_decompose(&graph, &out, max_paths),
        Command::Represent {
            paths,
            to,
            n_cp,
            degree,
            out,
            extent,
        } => cmd_represent(&paths, to, n_cp, degree, &out, extent),
        Command::Match {
            gt,
            pred,
            alpha,
            beta,
            out,
        } => cmd_match(&gt, &pred, alpha, beta, &out),
        Command::Loss {
            gt,
            pred,
            alpha,
            beta,
        } => cmd_loss(&gt, &pred, alpha, beta),
        Command::Aggregate {
            pred,
            p_min,
            d_max,
            extent,
            n_cp_out,
            out,
        } => cmd_aggregate(&pred, p_min, d_max, extent, n_cp_out, &out),
        Command::Eval {
            pred,
            gt,
            config,
            out,
            extent,
            interp_dist,
            match_dist,
            topo_radius,
            lane_halfwidth,
            sda_thresholds,
        } => cmd_eval(EvalArgs {
            pred,
            gt,
            config,
            out,
            extent,
            interp_dist,
            match_dist,
            topo_radius,
            lane_halfwidth,
            sda_thresholds,
        }),
        Command::Generate {
            seed,
            n_splits,
            depth,
            jitter,
            extent,
            out,
        } => cmd_generate(seed, n_splits, depth, jitter, extent, &out),
    }
}

fn cmd_decompose(graph_path: &Path, out: &Path, max_paths: u64) -> Result<()> {
    let graph = load_graph(graph_path)?;
    let paths = decompose(&graph, max_paths)?;
    let entries = paths
        .iter()
        .map(|p| {
            let line = path_to_polyline(&graph, p);
            Ok(PathEntry {
                node_ids: p.node_ids().iter().map(|n| n.0).collect(),
                points: match line {
                    Ok(line) => line.points().iter().map(|pt| [pt.x, pt.y]).collect(),
                    // Single-node paths carry just the root position.
                    Err(_) => p
                        .node_ids()
                        .iter()
                        .map(|&id| {
                            let pos = graph.position(id)?;
                            Ok([pos.x, pos.y])
                        })
                        .collect::<Result<Vec<_>, lanegraph::error::Error>>()?,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    save_json(&PathSetDocument::new(graph.extent(), entries), out)?;
    log::info!("wrote {} path(s) to {}", paths.len(), out.display());
    Ok(())
}

/// Snap values that drift past the unit interval by floating-point noise;
/// anything beyond the tolerance is a real range violation.
fn snap_unit(v: f64) -> f64 {
    const TOL: f64 = 1e-9;
    if (-TOL..0.0).contains(&v) {
        0.0
    } else if (1.0..=1.0 + TOL).contains(&v) {
        1.0
    } else {
        v
    }
}

fn cmd_represent(
    paths_path: &Path,
    to: ReprArg,
    n_cp: usize,
    degree: usize,
    out: &Path,
    extent_flag: Option<Extent>,
) -> Result<()> {
    let doc: PathSetDocument = load_json(paths_path)?;
    doc.check_version()?;
    let extent = extent_flag.or(doc.extent).ok_or_else(|| {
        anyhow!("the path document carries no extent; pass --extent WxH")
    })?;
    let (w, h) = (f64::from(extent.width), f64::from(extent.height));

    let mut clamped = 0usize;
    let mut proposals = Vec::with_capacity(doc.paths.len());
    for (index, entry) in doc.paths.iter().enumerate() {
        let line = Polyline::new(entry.points.iter().map(|&[x, y]| Point::new(x, y)).collect())
            .with_context(|| format!("path {index}"))?;
        let control_px: Vec<Point> = match to {
            ReprArg::Polyline => resample_polyline(&line, n_cp)
                .with_context(|| format!("path {index}"))?
                .points()
                .to_vec(),
            ReprArg::Bezier => {
                // Densify by arc length first so short node chains still
                // support the requested degree.
                let dense = resample_polyline(&line, (degree + 1).max(20))
                    .with_context(|| format!("path {index}"))?;
                fit_bezier(&dense, degree)
                    .with_context(|| format!("path {index}"))?
                    .curve
                    .control_points()
                    .to_vec()
            }
        };
        let normalized: Vec<Point> = control_px
            .iter()
            .map(|p| {
                let mut x = snap_unit(p.x / w);
                let mut y = snap_unit(p.y / h);
                if matches!(to, ReprArg::Bezier) {
                    // Interior control points of a fit may overshoot the
                    // RoI; the proposal contract is [0, 1], so clamp.
                    let (cx, cy) = (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0));
                    if (cx - x).abs() > 1e-9 || (cy - y).abs() > 1e-9 {
                        clamped += 1;
                    }
                    x = cx;
                    y = cy;
                }
                Point::new(x, y)
            })
            .collect();
        proposals.push(
            PathProposal::new(1.0, normalized).with_context(|| format!("path {index}"))?,
        );
    }
    if clamped > 0 {
        log::warn!("{clamped} fitted control point coordinate(s) clamped into [0, 1]");
    }

    save_json(&ProposalDocument::from_proposals(&proposals, to.into()), out)?;
    Ok(())
}

fn load_match_inputs(
    gt_path: &Path,
    pred_path: &Path,
    alpha: f64,
    beta: f64,
) -> Result<(
    Vec<lanegraph::matching::GroundTruthPath>,
    Vec<PathProposal>,
    MatchWeights,
)> {
    let gt_doc: ProposalDocument = load_json(gt_path)?;
    let pred_doc: ProposalDocument = load_json(pred_path)?;
    let gts = gt_doc.to_ground_truths()?;
    let props = pred_doc.to_proposals()?;
    let weights = MatchWeights::new(alpha, beta)?;
    Ok((gts, props, weights))
}

fn cmd_match(gt: &Path, pred: &Path, alpha: f64, beta: f64, out: &Path) -> Result<()> {
    let (gts, props, weights) = load_match_inputs(gt, pred, alpha, beta)?;
    let cost_matrix: Vec<Vec<f64>> = gts
        .iter()
        .map(|g| {
            props
                .iter()
                .map(|p| match_cost(g, p, &weights))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let assignment = hungarian(&cost_matrix)?;
    save_json(
        &AssignmentDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            alpha,
            beta,
            total_cost: assignment.total_cost,
            pairs: assignment
                .pairs
                .iter()
                .map(|&(gt, proposal)| PairDoc { gt, proposal })
                .collect(),
            cost_matrix,
        },
        out,
    )?;
    Ok(())
}

fn cmd_loss(gt: &Path, pred: &Path, alpha: f64, beta: f64) -> Result<()> {
    let (gts, props, weights) = load_match_inputs(gt, pred, alpha, beta)?;
    let loss = set_loss(&gts, &props, &weights)?;
    println!("total={}", loss.total);
    println!("regression={}", loss.regression);
    println!("classification={}", loss.classification);
    Ok(())
}

fn cmd_aggregate(
    pred: &Path,
    p_min: f64,
    d_max: f64,
    extent: Extent,
    n_cp_out: Option<usize>,
    out: &Path,
) -> Result<()> {
    let doc: ProposalDocument = load_json(pred)?;
    let repr = doc.representation()?;
    let props = doc.to_proposals()?;
    let cfg = AggregationConfig::new(p_min, d_max, n_cp_out)?;
    let result = proposals_to_graph(&props, repr, &cfg, extent)?;
    for warning in &result.warnings {
        log::warn!("{warning}");
    }
    save_graph(&result.graph, out)?;
    Ok(())
}

struct EvalArgs {
    pred: PathBuf,
    gt: PathBuf,
    config: Option<PathBuf>,
    out: PathBuf,
    extent: Option<Extent>,
    interp_dist: Option<f64>,
    match_dist: Option<f64>,
    topo_radius: Option<f64>,
    lane_halfwidth: Option<f64>,
    sda_thresholds: Option<String>,
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let pred = load_graph(&args.pred)?;
    let gt = load_graph(&args.gt)?;

    let mut tool = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ToolConfig::parse(&text).with_context(|| path.display().to_string())?
        }
        None => ToolConfig::default(),
    };
    if let Some(v) = args.interp_dist {
        tool.interp_dist = v;
    }
    if let Some(v) = args.match_dist {
        tool.match_dist = v;
    }
    if let Some(v) = args.topo_radius {
        tool.topo_radius = v;
    }
    if let Some(v) = args.lane_halfwidth {
        tool.lane_halfwidth = v;
    }
    if let Some(raw) = &args.sda_thresholds {
        tool.set("sda_thresholds", raw)?;
    }

    let extent = args
        .extent
        .or(gt.extent())
        .or(pred.extent())
        .ok_or_else(|| anyhow!("no extent available; pass --extent WxH"))?;
    let cfg = tool.metric_config(extent)?;

    let report = evaluate(&pred, &gt, &cfg);
    println!("topo_precision={}", report.topo_precision);
    println!("topo_recall={}", report.topo_recall);
    println!("geo_precision={}", report.geo_precision);
    println!("geo_recall={}", report.geo_recall);
    println!("apls={}", report.apls);
    for s in &report.sda {
        println!("sda_{}={}", s.threshold, s.score);
    }
    println!("graph_iou={}", report.graph_iou);

    save_json(
        &ReportDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            config: cfg,
            metrics: report,
        },
        &args.out,
    )?;
    Ok(())
}

fn cmd_generate(
    seed: u64,
    n_splits: u32,
    depth: u32,
    jitter: f64,
    extent: Extent,
    out: &Path,
) -> Result<()> {
    let spec = SyntheticSpec {
        n_splits,
        depth,
        jitter,
        extent,
    };
    let graph = generate_synthetic(seed, &spec)?;
    save_graph(&graph, out)?;
    Ok(())
}
