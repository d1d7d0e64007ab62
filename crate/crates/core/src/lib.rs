//! Triple-helix synergy among the geographic, technological, and
//! organizational attributes of company populations.
//!
//! The entry points are:
//!
//! - [`table`] and [`entropy`]: sparse `(G, T, O)` contingency tables and the
//!   seven Shannon entropies, two-way mutual information, and the signed
//!   three-way mutual information (synergy) computed from them.
//! - [`taxonomy`]: NACE Rev. 2 normalisation, high-tech / knowledge-intensive
//!   sector flags, and the eleven employee size classes.
//! - [`geo`]: ZIP code canonicalisation and the ZIP → state / CBSA / CSA
//!   concordance.
//! - [`ingest`]: company CSV parsing, cleaning with audit counters, and the
//!   cleaned-sample file format.
//! - [`decomposition`]: the within/between-group split of synergy and entropy
//!   at any grouping, sector summaries, specialisation, correlations, tallies.
//! - [`synth`] and [`oracle`]: seeded synthetic populations with planted
//!   structure and a dense brute-force reference implementation.
//!
//! ```
//! use synergy_core::table::build_table;
//! use synergy_core::entropy::mutual_info3;
//!
//! let xor = [["0", "0", "0"], ["0", "1", "1"], ["1", "0", "1"], ["1", "1", "0"]];
//! let table = build_table(xor);
//! assert_eq!(mutual_info3(&table).unwrap().bits, -1.0);
//! ```

pub mod correlation;
pub mod decomposition;
pub mod entropy;
pub mod geo;
pub mod ingest;
pub mod oracle;
pub mod record;
pub mod synth;
pub mod table;
pub mod taxonomy;

mod fsum;

pub use decomposition::{decompose, DecompositionResult, GroupResult, Scale};
pub use entropy::{entropy_profile, mutual_info2, mutual_info3, EntropyProfile, SynergyValue};
pub use record::{AnalysisRecord, CompanyRecord, SampleRecord};
pub use table::{build_table, merge_tables, ContingencyTable3, Dim};
pub use taxonomy::{SectorFilter, SectorFlags, SizeClass};
