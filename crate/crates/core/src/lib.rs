//! Three-dimensional layout and exploration of typed directed theory graphs.
//!
//! The crate loads graphs whose edges carry a kind (`import`, `view`, ...),
//! lays them out with a force-directed model that adds a vertical force per
//! hierarchical edge so those edges point upward, and provides the filters
//! and transforms an interactive viewer needs.
//!
//! ```
//! use tgforge_core::{graph, engine, metrics};
//!
//! let doc = br#"{
//!   "nodes": [{"id": "a", "uri": "u:a"}, {"id": "b", "uri": "u:b"}],
//!   "edges": [{"id": "e", "from": "a", "to": "b", "kind": "import", "uri": "u:e"}]
//! }"#;
//! let g = graph::parse_graph(doc, &Default::default()).unwrap();
//! let params = tgforge_core::LayoutParams::default();
//! let layout = engine::run_layout(&g, &params, Default::default(), None).unwrap();
//! let m = metrics::layout_metrics(&g, &layout).unwrap();
//! assert_eq!(m.upward_fraction, 1.0);
//! ```
//!
//! With the default `parallel` feature, force evaluation within an iteration
//! is spread over the current rayon pool; results are identical for any
//! worker count.

pub mod engine;
pub mod error;
pub mod generate;
pub mod graph;
pub mod layout;
pub mod metrics;
pub mod octree;
pub mod ops;
pub mod params;
pub mod rng;
pub mod vec3;

pub use engine::{run_layout, run_layout_from, EngineOptions, Execution, RepulsionMode};
pub use error::{FilterError, GraphError, LayoutError, SpatialError};
pub use graph::{parse_graph, serialize_graph, validate, LoadOptions, TheoryGraph};
pub use layout::Layout;
pub use params::{LayoutParams, ParamsPatch};
pub use vec3::Vec3;
