//! `tgforge` command-line tool.
//!
//! Every command prints exactly one JSON line on stdout; logs and diagnostics
//! go to stderr (`TGFORGE_LOG=info` for more). Exit status is 0 on success,
//! 1 for bad input and 2 for internal failures.

mod args;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::Context;
use clap::Parser;
use serde_json::{json, Value};
use tgforge_core::graph::{parse_graph, serialize_graph, validate, LoadOptions, TheoryGraph};
use tgforge_core::layout::{parse_layout, serialize_layout};
use tgforge_core::metrics::layout_metrics;
use tgforge_core::ops::{apply_filter, Cutoff, FilterSpec, Focus, FocusMode};
use tgforge_core::{run_layout, EngineOptions, Execution, Layout, LayoutError, ParamsPatch, Vec3};
use tgforge_server::AppState;

use args::{Cli, Command, FilterArgs, LayoutArgs, ServeArgs};

/// Failure caused by what the user supplied, reported with exit status 1.
#[derive(Debug)]
struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input(message: impl fmt::Display) -> anyhow::Error {
    InputError(message.to_string()).into()
}

/// Result of a command: the stdout line (if not already printed) and exit status.
struct Outcome {
    line: Option<Value>,
    status: u8,
}

impl Outcome {
    fn ok(line: Value) -> Self {
        Self {
            line: Some(line),
            status: 0,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TGFORGE_LOG", "warn"))
        .format_timestamp_millis()
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let message = e.kind().to_string();
            println!(
                "{}",
                json!({ "error": { "code": "usage", "message": message } })
            );
            return ExitCode::from(1);
        }
    };

    let outcome = std::panic::catch_unwind(|| run(cli));
    let (line, status) = match outcome {
        Ok(Ok(outcome)) => (outcome.line, outcome.status),
        Ok(Err(err)) => {
            let (code, status) = match err.downcast_ref::<InputError>() {
                Some(_) => ("input", 1),
                None => ("internal", 2),
            };
            eprintln!("error: {err:#}");
            let line = json!({ "error": { "code": code, "message": format!("{err:#}") } });
            (Some(line), status)
        }
        Err(_) => {
            let line = json!({ "error": { "code": "internal", "message": "internal error" } });
            (Some(line), 2)
        }
    };
    if let Some(line) = line {
        println!("{line}");
    }
    ExitCode::from(status)
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let load = LoadOptions {
        allow_self_loops: cli.allow_self_loops,
    };
    match cli.command {
        Command::Layout(args) => layout_cmd(args, cli.threads, &load),
        Command::Validate { input } => validate_cmd(input.path(), &load),
        Command::Filter(args) => filter_cmd(args, &load),
        Command::Metrics { graph, layout } => metrics_cmd(&graph, &layout, &load),
        Command::Serve(args) => serve_cmd(args, cli.threads, &load),
    }
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path, load: &LoadOptions) -> anyhow::Result<TheoryGraph> {
    parse_graph(&read(path)?, load).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_layout(path: &Path, graph: &TheoryGraph) -> anyhow::Result<Layout> {
    let (layout, _) =
        parse_layout(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    layout
        .points_for(graph)
        .map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(layout)
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let write = || -> std::io::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    };
    write().map_err(|e| input(format!("cannot write {}: {e}", path.display())))
}

fn params_error(e: LayoutError) -> anyhow::Error {
    match e {
        LayoutError::InvalidParam { .. } => input(e),
        other => other.into(),
    }
}

fn layout_cmd(
    args: LayoutArgs,
    threads: Option<usize>,
    load: &LoadOptions,
) -> anyhow::Result<Outcome> {
    let mut patch = args.flags.to_patch();
    if let Some(path) = &args.params {
        let from_file: ParamsPatch = serde_json::from_slice(&read(path)?)
            .map_err(|e| input(format!("{}: {e}", path.display())))?;
        patch = patch.or(from_file);
    }
    let params = patch.resolve().map_err(params_error)?;
    params.validate().map_err(params_error)?;
    let graph = load_graph(args.input.path(), load)?;

    let options = if args.sequential {
        EngineOptions::sequential()
    } else {
        EngineOptions {
            execution: Execution::Parallel,
            ..Default::default()
        }
    };
    let compute = || run_layout(&graph, &params, options, None);
    let started = Instant::now();
    let layout = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(compute),
        None => compute(),
    }?;
    log::info!(
        "layout of {} nodes: {} iterations in {:.3}s",
        graph.node_count(),
        layout.iterations_run,
        started.elapsed().as_secs_f64()
    );

    write_atomic(&args.output, &serialize_layout(&layout, Some(&params)))?;
    let metrics = layout_metrics(&graph, &layout)?;
    Ok(Outcome::ok(json!({
        "output": args.output,
        "iterations": layout.iterations_run,
        "converged": layout.converged,
        "finalMaxDisplacement": layout.final_max_displacement,
        "metrics": metrics,
    })))
}

fn validate_cmd(path: &Path, load: &LoadOptions) -> anyhow::Result<Outcome> {
    let bytes = read(path)?;
    let report = match parse_graph(&bytes, load) {
        Ok(graph) => validate(&graph),
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            tgforge_core::graph::ValidationReport::from_load_error(&e)
        }
    };
    for w in &report.warnings {
        eprintln!("warning [{}]: {}", w.code, w.message);
    }
    Ok(Outcome {
        status: if report.is_ok() { 0 } else { 1 },
        line: Some(serde_json::to_value(&report)?),
    })
}

fn filter_spec(args: &FilterArgs) -> anyhow::Result<FilterSpec> {
    let focus = [
        (&args.reachable_from, FocusMode::Reachable),
        (&args.coreachable_from, FocusMode::Coreachable),
        (&args.neighborhood, FocusMode::Neighborhood),
    ]
    .into_iter()
    .find_map(|(node, mode)| {
        node.as_ref().map(|node| Focus {
            node: node.clone(),
            mode,
            k: args.k,
        })
    });
    let cutoff = match (&args.cutoff_center, args.cutoff_radius) {
        (Some(c), Some(radius)) => match c[..] {
            [x, y, z] => Some(Cutoff {
                center: Vec3::new(x, y, z),
                radius,
            }),
            _ => return Err(input("--cutoff-center takes three numbers: x,y,z")),
        },
        _ => None,
    };
    Ok(FilterSpec {
        enabled_kinds: args.kinds.clone(),
        focus,
        cutoff,
    })
}

fn filter_cmd(args: FilterArgs, load: &LoadOptions) -> anyhow::Result<Outcome> {
    let graph = load_graph(args.input.path(), load)?;
    let layout = args
        .layout
        .as_deref()
        .map(|p| load_layout(p, &graph))
        .transpose()?;
    let spec = filter_spec(&args)?;
    let visible = apply_filter(&graph, layout.as_ref(), &spec).map_err(input)?;

    let sub = graph.restrict(&visible.visible_nodes, &visible.visible_edges);
    write_atomic(&args.output, &serialize_graph(&sub))?;
    if let (Some(out), Some(layout)) = (&args.layout_output, &layout) {
        write_atomic(
            out,
            &serialize_layout(&layout.restrict(&visible.visible_nodes), None),
        )?;
    }
    Ok(Outcome::ok(json!({
        "output": args.output,
        "layoutOutput": args.layout_output,
        "filter": spec,
        "visibleNodes": visible.visible_nodes.len(),
        "visibleEdges": visible.visible_edges.len(),
    })))
}

fn metrics_cmd(graph: &Path, layout: &Path, load: &LoadOptions) -> anyhow::Result<Outcome> {
    let graph = load_graph(graph, load)?;
    let layout = load_layout(layout, &graph)?;
    let metrics = layout_metrics(&graph, &layout)?;
    Ok(Outcome::ok(serde_json::to_value(metrics)?))
}

fn serve_cmd(
    args: ServeArgs,
    threads: Option<usize>,
    load: &LoadOptions,
) -> anyhow::Result<Outcome> {
    let graph = load_graph(args.input.path(), load)?;
    let layout = args
        .layout
        .as_deref()
        .map(|p| load_layout(p, &graph))
        .transpose()?;
    let mut state = AppState::new(graph).with_snapshot_every(args.snapshot_every);
    if let Some(dir) = &args.static_dir {
        if !dir.is_dir() {
            return Err(input(format!(
                "static directory {} does not exist",
                dir.display()
            )));
        }
        state = state.with_static_dir(PathBuf::from(dir));
    }
    if let Some(n) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?;
        state = state.with_pool(pool);
    }
    state.session.write().unwrap().layout = layout;
    let state = Arc::new(state);

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting runtime")?;
    runtime.block_on(async move {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| input(format!("cannot bind {addr}: {e}")))?;
        let local = listener.local_addr()?;
        println!("{}", json!({ "listening": format!("http://{local}") }));
        std::io::stdout().flush()?;
        log::info!("serving on http://{local}");
        let shutdown = async {
            if tokio::signal::ctrl_c().await.is_err() {
                std::future::pending::<()>().await;
            }
            log::info!("shutting down");
        };
        tgforge_server::serve(listener, state, shutdown).await?;
        Ok(Outcome {
            line: None,
            status: 0,
        })
    })
}
