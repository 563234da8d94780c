//! Linear programming: a dense simplex solver, an LP-format writer and the
//! shortest-path schedule programs built on them.

pub mod format;
pub mod simplex;
pub mod sp;
