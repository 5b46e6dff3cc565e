use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tgforge_core::ParamsPatch;

#[derive(Debug, Parser)]
#[command(
    name = "tgforge",
    version,
    about = "Lay out and explore typed theory graphs in 3D"
)]
pub struct Cli {
    /// Worker threads for force evaluation (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Accept edges whose source and target coincide.
    #[arg(long, global = true)]
    pub allow_self_loops: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a layout and write it as JSON.
    Layout(LayoutArgs),
    /// Check a graph file and report errors and warnings.
    Validate {
        #[command(flatten)]
        input: InputArg,
    },
    /// Write the visible subgraph (and optionally layout) after filtering.
    Filter(FilterArgs),
    /// Report metrics of an existing layout.
    Metrics {
        /// Graph file (JSON).
        graph: PathBuf,
        /// Layout file (JSON) for that graph.
        layout: PathBuf,
    },
    /// Serve the graph over HTTP.
    Serve(ServeArgs),
}

/// Graph file, given positionally or with `-i`.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InputArg {
    /// Graph file (JSON).
    #[arg(value_name = "GRAPH")]
    graph: Option<PathBuf>,

    /// Graph file (JSON), same as the positional argument.
    #[arg(short = 'i', long = "input", value_name = "GRAPH")]
    input: Option<PathBuf>,
}

impl InputArg {
    pub fn path(&self) -> &Path {
        self.graph
            .as_deref()
            .or(self.input.as_deref())
            .expect("clap requires one input")
    }
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    #[command(flatten)]
    pub input: InputArg,

    /// Where to write the layout.
    #[arg(short, long)]
    pub output: PathBuf,

    /// JSON file of parameters; its values override individual flags.
    #[arg(long)]
    pub params: Option<PathBuf>,

    /// Use a single thread regardless of --threads.
    #[arg(long)]
    pub sequential: bool,

    #[command(flatten)]
    pub flags: ParamFlags,
}

#[derive(Debug, Default, Args)]
pub struct ParamFlags {
    /// Ideal edge length L [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub ideal_edge_length: Option<f64>,
    /// Repulsion constant [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub k_repel: Option<f64>,
    /// Attraction constant [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub k_attract: Option<f64>,
    /// Vertical push per hierarchical edge [default: 7]
    #[arg(long, allow_negative_numbers = true)]
    pub k_hierarchy: Option<f64>,
    /// Barnes-Hut opening angle; 0 is exact [default: 0.75]
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Iteration limit, also accepted as --iterations [default: 500]
    #[arg(long, alias = "iterations", allow_negative_numbers = true)]
    pub max_iterations: Option<i64>,
    /// Stop when no node moves more than this many edge lengths [default: 0.001]
    #[arg(long, allow_negative_numbers = true)]
    pub convergence_eps: Option<f64>,
    /// Initial step cap as a fraction of the placement radius [default: 0.1]
    #[arg(long, allow_negative_numbers = true)]
    pub initial_temperature: Option<f64>,
    /// Per-iteration temperature multiplier [default: 0.95]
    #[arg(long, allow_negative_numbers = true)]
    pub cooling_factor: Option<f64>,
    /// Seed for the initial placement [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Distance floor in force terms [default: 0.001 * L]
    #[arg(long, allow_negative_numbers = true)]
    pub min_distance: Option<f64>,
}

impl ParamFlags {
    pub fn to_patch(&self) -> ParamsPatch {
        ParamsPatch {
            ideal_edge_length: self.ideal_edge_length,
            k_repel: self.k_repel,
            k_attract: self.k_attract,
            k_hierarchy: self.k_hierarchy,
            theta: self.theta,
            max_iterations: self.max_iterations,
            convergence_eps: self.convergence_eps,
            initial_temperature: self.initial_temperature,
            cooling_factor: self.cooling_factor,
            seed: self.seed,
            min_distance: self.min_distance,
        }
    }
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub input: InputArg,

    /// Where to write the filtered graph.
    #[arg(short, long)]
    pub output: PathBuf,

    /// Comma-separated edge kinds to keep (default: all).
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,

    /// Keep only nodes reachable from this node.
    #[arg(long, group = "focus")]
    pub reachable_from: Option<String>,

    /// Keep only nodes that reach this node.
    #[arg(long, group = "focus")]
    pub coreachable_from: Option<String>,

    /// Keep only nodes within --k hops of this node, ignoring direction.
    #[arg(long, group = "focus")]
    pub neighborhood: Option<String>,

    /// Hop radius for --neighborhood.
    #[arg(long, default_value_t = 1)]
    pub k: usize,

    /// Cutoff sphere center as x,y,z (needs --layout).
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        requires = "cutoff_radius"
    )]
    pub cutoff_center: Option<Vec<f64>>,

    /// Cutoff sphere radius.
    #[arg(long, allow_negative_numbers = true, requires = "cutoff_center")]
    pub cutoff_radius: Option<f64>,

    /// Layout of the input graph; required by the cutoff.
    #[arg(long)]
    pub layout: Option<PathBuf>,

    /// Where to write the layout restricted to visible nodes.
    #[arg(long, requires = "layout")]
    pub layout_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub input: InputArg,

    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,

    /// Port to bind; 0 picks a free one.
    #[arg(long, default_value_t = 8080)]
    pub port: u16,

    /// Directory of viewer assets served at `/`.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,

    /// Existing layout to show before any job runs.
    #[arg(long)]
    pub layout: Option<PathBuf>,

    /// Emit a progress event every this many iterations.
    #[arg(long, default_value_t = 5)]
    pub snapshot_every: usize,
}
