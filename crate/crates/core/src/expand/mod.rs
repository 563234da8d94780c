//! Topology expansions and the schedules they induce.

pub mod degree;
pub mod line;
pub mod product;
pub mod undirected;

pub use degree::{degree_expand, degree_expand_schedule};
pub use line::{line_expand_schedule, line_graph};
pub use product::{cartesian_power, cartesian_product, power_rs, power_schedule, product_of};
pub use undirected::to_undirected;
