//! Conjunctive queries over the vault, the reference queries and a
//! brute-force oracle.

pub mod exec;
pub mod oracle;
pub mod parse;
pub mod plan;
pub mod predicate;

pub use exec::{execute, execute_two_phase, ExecError, ResultRow, ResultSet};
pub use oracle::OracleCorpus;
pub use parse::{parse_query, ParseError};
pub use plan::{plan, plan_as_of, Leg, PlanError, QueryPlan};
pub use predicate::{AttrRef, Predicate, QueryId};
