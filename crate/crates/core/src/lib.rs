//! Discovery of functional dependencies over joins of relational tables,
//! without materializing the full join.

pub mod attrs;
pub mod context;
pub mod error;
pub mod eval;
pub mod fd;
pub mod fixture;
pub mod infer;
pub mod join;
pub mod lattice;
pub mod mine;
pub mod oracle;
pub mod partition;
pub mod pipeline;
pub mod relation;
pub mod sample;
pub mod upstage;

pub use attrs::{AttrId, AttrSet, MAX_ATTRS};
pub use error::{Error, Result};
pub use fd::{holds, Afd, FdSet, FunctionalDependency, Origin};
pub use join::{coverage, join, partial_join, CoverageReport, JoinOperator, JoinSpec};
pub use lattice::discover_fds;
pub use partition::{build_partition, g3_error, partition_product, violating_tuples, StrippedPartition};
pub use eval::{evaluate, EvalMetrics};
pub use oracle::oracle_join_fds;
pub use pipeline::{discover_chain, discover_join_fds, DiscoveryReport, JoinDiscovery, PipelineConfig, Strategy};
pub use relation::{load_csv, parse_csv, CsvOptions, Instance, NULL_CODE};
pub use sample::SampleConfig;
pub use upstage::{upstage, ProvidedFds, UpstageResult};
