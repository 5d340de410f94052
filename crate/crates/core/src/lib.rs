//! Exact primal-dual algorithms for node-weighted prize-collecting Steiner
//! tree and forest on planar graphs, with auditors and brute-force oracles.

pub mod audit;
pub mod generate;
pub mod graph;
pub mod instance;
pub mod io;
pub mod lmp;
pub mod lp;
pub mod moats;
pub mod oracle;
pub mod pcsf;
pub mod rational;
pub mod threshold;
pub mod union_find;
