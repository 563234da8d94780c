//! Topology and collective-schedule construction for direct-connect networks.

pub mod analysis;
pub mod base;
pub mod chunk;
pub mod cost;
pub mod error;
pub mod expand;
pub mod expr;
pub mod graph;
pub mod io;
pub mod lp;
pub mod materialize;
pub mod milp;
pub mod pareto;
pub mod rational;
pub mod schedule;
pub mod sim;
pub mod validate;

pub use analysis::{analyze, Analysis, CostMode};
pub use base::{BaseSpec, Family};
pub use chunk::ChunkSet;
pub use cost::{measure_cost, CostVector};
pub use error::{Error, Result};
pub use expr::{parse_expr, TopoExpr};
pub use graph::{Digraph, IsoMap};
pub use rational::Q;
pub use schedule::{Collective, Schedule, Transfer};
