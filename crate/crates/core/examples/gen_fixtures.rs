//! Writes the bundled fixture graphs into the given directory (default `fixtures/`).

use std::path::PathBuf;

use tgforge_core::generate::synthetic_library;
use tgforge_core::serialize_graph;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    let g = synthetic_library(739, 2851, 0.2, 2017);
    std::fs::write(dir.join("nasa739.json"), serialize_graph(&g))?;
    println!(
        "wrote {} ({} nodes, {} edges)",
        dir.join("nasa739.json").display(),
        g.node_count(),
        g.edge_count()
    );
    Ok(())
}
