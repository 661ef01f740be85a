//! Independent checks of a built spanner: stretch under faults, hop counts,
//! structural invariants of the set computation, and a greedy baseline.

pub mod audit;
pub mod hops;
pub mod mutate;
pub mod oracle;
pub mod report;
pub mod stretch;

pub use audit::{structural_audit, Finding};
pub use hops::{default_hop_cap, measure_hop_diameter, HopReport};
pub use oracle::greedy_ft_oracle;
pub use report::Report;
pub use stretch::{check_stretch, fault_suite, FaultStrategy, Hints, SuiteResult, Witness};
