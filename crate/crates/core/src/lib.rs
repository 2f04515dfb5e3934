//! Exact computational toolkit for the universal Coxeter group of rank `n`,
//! the free product `W_n` of `n` copies of `Z/2Z`, and its (outer)
//! automorphisms.
//!
//! The crate provides:
//!
//! * [`word`] — reduced words, conjugacy and involutions in `W_n`;
//! * [`aut`] — automorphisms given by words in partial-conjugation and swap
//!   moves, outer equality, named families and Dehn twists;
//! * [`subgroup`] — folded core graphs for finitely generated subgroups:
//!   membership, intersections, conjugacy and free-factor detection;
//! * [`coset`] — a truncated coset enumeration used as an independent
//!   membership oracle;
//! * [`splitting`] — free splittings of `W_n` as marked graphs of groups,
//!   `W_k`-stars, compatibility and refinement;
//! * [`complex`] — the splitting graphs built from star classes: adjacency,
//!   triangle classification, bounded balls and induced maps.
//!
//! All values are immutable after construction and all operations are pure,
//! so everything here can be shared freely across threads.

pub mod aut;
pub mod complex;
pub mod coset;
pub mod error;
pub mod splitting;
pub mod subgroup;
pub mod word;

pub use error::Error;
pub use word::{Involution, Rank, Word};
