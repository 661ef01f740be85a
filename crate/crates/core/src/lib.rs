//! Fault-tolerant spanners for finite doubling metrics.
//!
//! A net-tree over the input points supplies a basic `(1+eps)`-spanner made
//! of tree and cross edges. Every tree node is then given a set of nearby
//! surrogate points, and each edge of the basic spanner is replaced by a
//! bipartite clique or matching between the surrogate sets of its endpoints.
//! Removing any `k` points leaves a `(1+eps)`-spanner on the survivors, while
//! the maximum degree stays linear in `k`.
//!
//! ```
//! use ftspan::{gen, pipeline::{build, BuildConfig, Mode}};
//!
//! let metric = gen::uniform_plane(40, 1).normalize();
//! let out = build(&metric, &BuildConfig::new(1.0, 1).mode(Mode::Full)).unwrap();
//! assert!(out.spanner.max_degree() > 0);
//! ```

pub mod construct;
pub mod gen;
pub mod io;
pub mod metric;
pub mod net_tree;
pub mod pipeline;
pub mod shortcuts;
pub mod spanner;
pub mod verify;

pub use metric::{Metric, MetricError, PointId};
pub use net_tree::{NetTree, NodeId};
pub use spanner::{Edge, EdgeKind, FtSpanner};
