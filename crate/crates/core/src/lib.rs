//! Exact geometry for CAT(0) model spaces carrying group actions: weighted
//! Cayley trees, tree×line products, flat lattices and free-product gluing
//! complexes, with orbit segment conditions, cone-topology Cauchy tests and
//! boundary maps.

pub mod groups;
pub mod num;
pub mod oracle;
pub mod report;
pub mod actions;
pub mod boundary;
pub mod conditions;
pub mod config;
pub mod exec;
pub mod experiments;
pub mod spaces;
