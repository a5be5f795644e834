//! Online learning to rank with TopRank.
//!
//! The crate is a small laboratory around one algorithm:
//!
//! * [`env`] holds the stochastic click models (document-based, position-based,
//!   cascade and a generic factored model), exact click probabilities, click
//!   sampling and an exhaustive checker for the four modelling assumptions the
//!   algorithm relies on.
//! * [`toprank`] is the algorithm itself: a relation over items is refined from
//!   pairwise click differences, the items are partitioned by repeatedly peeling
//!   off the minimal elements of that relation, and each round the learner
//!   shows a ranking that is uniformly random within every block.
//! * [`baselines`] has the reference agents (oracle, uniform random, cascade
//!   KL-UCB) behind the shared [`Agent`](baselines::Agent) trait.
//! * [`analysis`] turns the quantitative guarantees into executable checks:
//!   regret bound evaluators, the pairwise-bias estimator, the self-normalized
//!   concentration Monte-Carlo, wrong-edge monitoring and lower-bound instances.
//! * [`harness`] runs seeded episodes and replicate batches and writes CSV traces.
//!
//! # Indexing
//!
//! Items and positions are stored 0-based everywhere in the library: item `i`
//! is `alpha[i]`, and `action.item_at(k)` is the item shown in slot `k`, with
//! slot `0` the top of the list. Everything that leaves the process (CLI
//! output, edge syntax, JSON snapshots, CSV round numbers) is 1-based, so item
//! `i` prints as `i + 1`.

pub mod analysis;
pub mod baselines;
pub mod env;
pub mod error;
pub mod harness;
pub mod rng;
pub mod toprank;

pub use error::{Error, Result};
