//! Five-stage group testing for two and three defectives.
//!
//! A random constant-weight pool matrix forms the first stage; its outcome
//! leaves a small hypergraph of candidate defective sets, and a few short
//! adaptive stages pick the right edge. The crate contains the designs, the
//! decoders behind a stage-enforcing oracle, the goodness audits of the
//! matrix, the asymptotic rate constants and a verification harness.
//!
//! ```
//! use multistage_gt::{compute_params, decode_s2, generate_matrix, NoiselessOracle, Overrides};
//!
//! let params = compute_params(256, 2, &Overrides::default()).unwrap().with_seed(5);
//! let matrix = generate_matrix(&params).unwrap();
//! let mut oracle = NoiselessOracle::new(256, &[17, 200]).unwrap();
//! let result = decode_s2(&matrix, &mut oracle).unwrap();
//! assert_eq!(result.defectives(), Some(&[17, 200][..]));
//! assert!(result.transcript.stage_count() <= 3);
//! ```

pub mod audit;
pub mod campaign;
pub mod decode;
pub mod design;
pub mod error;
pub mod hypergraph;
pub mod io;
pub mod model;
pub mod oracle;
pub mod rates;

pub use audit::{audit_2good, audit_3good, AuditReport, OutcomeScope, Property, Violation};
pub use campaign::{run_campaign, CampaignConfig, CampaignMode, CampaignReport};
pub use decode::three::{build_structure, decode_s3, structural_audit, Structure};
pub use decode::two::{decode_s2, partition_edges_s2};
pub use decode::{DecodePath, Diagnostics};
pub use design::{compute_params, generate_matrix, outcome, sparsity_threshold};
pub use error::{Error, Result};
pub use hypergraph::{bitmask_identify, candidates, find_configuration, greedy_partition, maximal_matching};
pub use model::{
    CandidateHypergraph, DecodeOutcome, DecodeResult, DesignParams, FailureReason, Hyperedge,
    OutcomeVector, Overrides, PoolMatrix, RelativeWeight, Transcript,
};
pub use oracle::{NoiselessOracle, ProtocolError, StageOracle};
pub use rates::{optimize_constants, RateReport};
