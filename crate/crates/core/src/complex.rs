//! The splitting graphs built from star classes.

use crate::error::Error;
use crate::splitting::StarClass;

/// Which of the splitting graphs adjacency is computed in.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ComplexKind {
    /// `{0}`-stars and one-letter stars, joined by refinement.
    L,
    /// One-edge stars, joined by compatibility.
    Y,
    /// Two-edge stars, joined by compatibility.
    Xtilde,
    /// Two-edge stars, joined when both a common collapse and a common
    /// refinement exist.
    X,
    /// Stars of every center rank, joined by refinement.
    Xprime,
}

pub fn admissible(kind: ComplexKind, s: &StarClass) -> bool {
    let n = s.rank().get();
    let k = s.center_rank();
    match kind {
        ComplexKind::L => k <= 1,
        ComplexKind::Y => k == n - 1,
        ComplexKind::Xtilde | ComplexKind::X => k == n - 2,
        ComplexKind::Xprime => k <= n - 2,
    }
}

pub fn adjacent(_kind: ComplexKind, _s: &StarClass, _t: &StarClass) -> Result<bool, Error> {
    unimplemented!()
}
