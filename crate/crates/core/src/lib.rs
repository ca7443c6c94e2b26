//! Network dismantling by edge removal: random graph generators, classic
//! node attacks, hierarchical spectral bisection, GCC-vs-cost evaluation and
//! SIR spreading on the damaged graphs.

pub mod bench;
pub mod epidemics;
pub mod error;
pub mod evaluation;
pub mod generators;
pub mod graph;
pub mod io;
pub mod plan;
pub mod seeds;
pub mod spectral;
pub mod strategies;
pub mod unionfind;

pub use error::{Error, Result};
pub use evaluation::{average_curves, cfe, execute_plan, improvement, AveragedCurve, GccCurve};
pub use generators::GenSpec;
pub use graph::{ComponentReport, Edge, Graph};
pub use plan::{Batch, Provenance, RemovalPlan};
pub use spectral::{hpi_ncut, power_iteration, spectral_bisection, PartitionTree, SpectralConfig};
