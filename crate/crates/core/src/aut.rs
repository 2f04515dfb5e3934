//! Automorphisms of `W_n`.
//!
//! Every automorphism is stored as a word in generating moves — partial
//! conjugations and swaps of standard generators — together with the cached
//! tuple of images of `x_1..x_n`. Both move kinds are involutions, so the
//! inverse of a move word is its reversal. The move list `[m_0, ..., m_k]`
//! denotes the composition `m_0 ∘ m_1 ∘ ... ∘ m_k` (rightmost acts first).
//!
//! Outer equality is decided exactly: a conjugator carrying one image tuple
//! to another is pinned down, up to the order-two centralizer of the first
//! image, by the first generator alone, leaving two candidates to verify.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::Error;
use crate::splitting::SplittingTree;
use crate::subgroup::{self, CoreGraph};
use crate::word::{Involution, Rank, Word};

/// A generating move: either the partial conjugation sending `x_j` to
/// `x_i x_j x_i` for every `j` in `set` (with `i` outside the set), or the
/// swap of two standard generators.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum GeneratorMove {
    PartialConj { set: BTreeSet<u8>, by: u8 },
    Swap { a: u8, b: u8 },
}

impl GeneratorMove {
    pub fn partial_conj(set: BTreeSet<u8>, by: u8) -> Result<GeneratorMove, Error> {
        if set.contains(&by) {
            return Err(Error::ConjugatingLetterInSet { letter: by });
        }
        Ok(GeneratorMove::PartialConj { set, by })
    }

    pub fn swap(a: u8, b: u8) -> Result<GeneratorMove, Error> {
        if a == b {
            return Err(Error::SwapEqualLetters);
        }
        Ok(GeneratorMove::Swap { a: a.min(b), b: a.max(b) })
    }

    fn validate(&self, rank: Rank) -> Result<(), Error> {
        let check = |l: u8| -> Result<(), Error> {
            if rank.contains(l) {
                Ok(())
            } else {
                Err(Error::LetterOutOfRange { letter: l as usize, rank: rank.get() })
            }
        };
        match self {
            GeneratorMove::PartialConj { set, by } => {
                check(*by)?;
                for &l in set {
                    check(l)?;
                }
                if set.contains(by) {
                    return Err(Error::ConjugatingLetterInSet { letter: *by });
                }
                Ok(())
            }
            GeneratorMove::Swap { a, b } => {
                check(*a)?;
                check(*b)?;
                if a == b {
                    return Err(Error::SwapEqualLetters);
                }
                Ok(())
            }
        }
    }

    /// Letterwise action on a word, reduced afterwards.
    pub fn apply_word(&self, w: &Word) -> Word {
        let mut letters = Vec::with_capacity(w.len() * 3);
        for &l in w.letters() {
            match self {
                GeneratorMove::PartialConj { set, by } => {
                    if set.contains(&l) {
                        letters.extend([*by, l, *by]);
                    } else {
                        letters.push(l);
                    }
                }
                GeneratorMove::Swap { a, b } => {
                    letters.push(if l == *a {
                        *b
                    } else if l == *b {
                        *a
                    } else {
                        l
                    });
                }
            }
        }
        Word::reduce(w.rank(), &letters).expect("move keeps letters in range")
    }

    fn permute(&self, l: u8) -> u8 {
        match self {
            GeneratorMove::PartialConj { .. } => l,
            GeneratorMove::Swap { a, b } => {
                if l == *a {
                    *b
                } else if l == *b {
                    *a
                } else {
                    l
                }
            }
        }
    }
}

/// An automorphism of `W_n`, defined by a move word with cached images.
#[derive(Clone)]
pub struct Automorphism {
    rank: Rank,
    moves: Vec<GeneratorMove>,
    images: Vec<Involution>,
}

impl PartialEq for Automorphism {
    fn eq(&self, other: &Self) -> bool {
        // equality of maps, not of defining words
        self.rank == other.rank && self.images == other.images
    }
}
impl Eq for Automorphism {}

impl std::hash::Hash for Automorphism {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rank.hash(state);
        self.images.hash(state);
    }
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "aut[")?;
        for (i, img) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} -> {}", i + 1, img.word())?;
        }
        write!(f, "]")
    }
}

impl Automorphism {
    pub fn identity(rank: Rank) -> Automorphism {
        let images = rank
            .letters()
            .map(|l| Involution::standard(rank, l).expect("letters in range"))
            .collect();
        Automorphism { rank, moves: Vec::new(), images }
    }

    /// Builds the composition `moves[0] ∘ moves[1] ∘ ... ` (rightmost first)
    /// and caches the images.
    pub fn from_moves(rank: Rank, moves: Vec<GeneratorMove>) -> Result<Automorphism, Error> {
        for m in &moves {
            m.validate(rank)?;
        }
        let mut images: Vec<Word> = rank
            .letters()
            .map(|l| Word::generator(rank, l).expect("letters in range"))
            .collect();
        for m in moves.iter().rev() {
            for img in images.iter_mut() {
                *img = m.apply_word(img);
            }
        }
        let images = images
            .into_iter()
            .map(|w| w.as_involution().expect("automorphism image of a generator has order two"))
            .collect();
        Ok(Automorphism { rank, moves, images })
    }

    pub fn from_move(rank: Rank, m: GeneratorMove) -> Result<Automorphism, Error> {
        Automorphism::from_moves(rank, vec![m])
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn moves(&self) -> &[GeneratorMove] {
        &self.moves
    }

    pub fn images(&self) -> &[Involution] {
        &self.images
    }

    pub fn image_word(&self, letter: u8) -> Word {
        self.images[(letter - 1) as usize].word()
    }

    pub fn is_identity(&self) -> bool {
        self.rank
            .letters()
            .all(|l| self.images[(l - 1) as usize].word().letters() == [l])
    }

    /// Homomorphic extension of the image tuple to arbitrary words.
    pub fn apply(&self, w: &Word) -> Word {
        assert_eq!(self.rank, w.rank(), "rank mismatch in automorphism application");
        let mut out: Vec<u8> = Vec::new();
        for &l in w.letters() {
            for &m in self.image_word(l).letters() {
                if out.last() == Some(&m) {
                    out.pop();
                } else {
                    out.push(m);
                }
            }
        }
        Word::reduce(self.rank, &out).expect("image letters in range")
    }

    pub fn apply_involution(&self, t: &Involution) -> Involution {
        self.apply(&t.word()).as_involution().expect("automorphic image of an involution")
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        assert_eq!(self.rank, other.rank, "rank mismatch in composition");
        let mut moves = self.moves.clone();
        moves.extend(other.moves.iter().cloned());
        let images = other
            .images
            .iter()
            .map(|img| {
                self.apply(&img.word())
                    .as_involution()
                    .expect("composition image of a generator has order two")
            })
            .collect();
        Automorphism { rank: self.rank, moves, images }
    }

    /// Every move is an involution, so the inverse word is the reversal.
    pub fn inverse(&self) -> Automorphism {
        let mut moves = self.moves.clone();
        moves.reverse();
        Automorphism::from_moves(self.rank, moves).expect("reversed moves stay valid")
    }

    /// The permutation of conjugacy classes `{[x_1], ..., [x_n]}`:
    /// position `i-1` holds the class letter of the image of `x_i`.
    pub fn class_permutation(&self) -> Vec<u8> {
        self.images.iter().map(|img| img.letter()).collect()
    }

    /// True when the class permutation is trivial, i.e. the automorphism
    /// represents an element of the finite-index kernel subgroup of the
    /// class-permutation homomorphism.
    pub fn is_class_trivial(&self) -> bool {
        self.class_permutation().iter().enumerate().all(|(i, &l)| l as usize == i + 1)
    }

    // named families ------------------------------------------------------

    /// `x_j -> x_i x_j x_i`, all other generators fixed.
    pub fn sigma(rank: Rank, j: u8, i: u8) -> Result<Automorphism, Error> {
        let m = GeneratorMove::partial_conj(BTreeSet::from([j]), i)?;
        Automorphism::from_moves(rank, vec![m])
    }

    /// The swap of `x_i` and `x_j`.
    pub fn transposition(rank: Rank, i: u8, j: u8) -> Result<Automorphism, Error> {
        let m = GeneratorMove::swap(i, j)?;
        Automorphism::from_moves(rank, vec![m])
    }

    /// `x_i -> w x_i w^{-1}`, all other generators fixed; `w` must avoid the
    /// letter `i` so the image is reduced as written.
    pub fn leaf_conjugation(rank: Rank, i: u8, w: &Word) -> Result<Automorphism, Error> {
        if !rank.contains(i) {
            return Err(Error::LetterOutOfRange { letter: i as usize, rank: rank.get() });
        }
        if w.letters().contains(&i) {
            return Err(Error::ConjugatorTouchesLetter { letter: i });
        }
        Self::block_conjugation(rank, &BTreeSet::from([i]), w)
    }

    /// `x_j -> w x_j w^{-1}` for every `j` in `set`, other generators fixed;
    /// the letters of `w` must avoid `set`.
    pub fn block_conjugation(rank: Rank, set: &BTreeSet<u8>, w: &Word) -> Result<Automorphism, Error> {
        for &l in w.letters() {
            if set.contains(&l) {
                return Err(Error::ConjugatorTouchesLetter { letter: l });
            }
        }
        let mut moves = Vec::with_capacity(w.len());
        for &a in w.letters().iter().rev() {
            moves.push(GeneratorMove::partial_conj(set.clone(), a)?);
        }
        Automorphism::from_moves(rank, moves)
    }

    /// The standard commuting family member: `x_i -> (x_1 x_2) x_i (x_2 x_1)`
    /// for `i >= 3`.
    pub fn basepoint_conjugation(rank: Rank, i: u8) -> Result<Automorphism, Error> {
        if i < 3 {
            return Err(Error::LetterOutOfRange { letter: i as usize, rank: rank.get() });
        }
        let w = Word::reduce(rank, &[1, 2])?;
        Automorphism::leaf_conjugation(rank, i, &w)
    }

    /// The inner automorphism `x -> g x g^{-1}`, written as a move word via
    /// the letterwise identity `ad_g = ad_{g_1} ∘ ad_{g_2} ∘ ...`.
    pub fn inner(g: &Word) -> Automorphism {
        let rank = g.rank();
        let mut moves = Vec::with_capacity(g.len());
        for &a in g.letters() {
            let set: BTreeSet<u8> = rank.letters().filter(|&l| l != a).collect();
            moves.push(GeneratorMove::PartialConj { set, by: a });
        }
        Automorphism::from_moves(rank, moves).expect("inner moves are valid")
    }

    // outer structure ------------------------------------------------------

    /// Finds `h` with `ad_h ∘ self = other`, if the two automorphisms agree
    /// in the outer group. The conjugator is pinned down by the first
    /// generator image up to the order-two centralizer of that image, so at
    /// most two candidates need verifying.
    pub fn equal_outer(&self, other: &Automorphism) -> Option<Word> {
        assert_eq!(self.rank, other.rank, "rank mismatch in outer comparison");
        let t = &self.images[0];
        let s = &other.images[0];
        if t.letter() != s.letter() {
            return None;
        }
        let u = t.conjugator();
        let v = s.conjugator();
        let letter = Word::generator(self.rank, t.letter()).expect("letter in range");
        let candidates = [v.mul(&u.inverse()), v.mul(&letter).mul(&u.inverse())];
        'candidates: for h in candidates {
            for l in self.rank.letters() {
                let lhs = self.image_word(l).conjugated_by(&h);
                if lhs != other.image_word(l) {
                    continue 'candidates;
                }
            }
            return Some(h);
        }
        None
    }

    /// If `self` is the inner automorphism `ad_h`, returns `h`.
    pub fn inner_witness(&self) -> Option<Word> {
        Automorphism::identity(self.rank).equal_outer(self)
    }

    pub fn is_inner(&self) -> bool {
        self.inner_witness().is_some()
    }

    // JSON ------------------------------------------------------------------

    pub fn to_json(&self) -> serde_json::Value {
        let moves: Vec<serde_json::Value> = self
            .moves
            .iter()
            .map(|m| match m {
                GeneratorMove::PartialConj { set, by } => serde_json::json!({
                    "kind": "pc",
                    "set": set.iter().map(|&l| l as usize).collect::<Vec<_>>(),
                    "i": *by as usize,
                }),
                GeneratorMove::Swap { a, b } => serde_json::json!({
                    "kind": "swap",
                    "i": *a as usize,
                    "j": *b as usize,
                }),
            })
            .collect();
        let images: Vec<String> =
            self.images.iter().map(|img| img.word().to_string()).collect();
        serde_json::json!({
            "rank": self.rank.get(),
            "moves": moves,
            "images": images,
        })
    }

    /// Parses the JSON form. Images are redundant on input: when present they
    /// are recomputed from the moves and compared, and a mismatch is an error.
    pub fn from_json(value: &serde_json::Value) -> Result<Automorphism, Error> {
        let obj = value.as_object().ok_or_else(|| Error::Json("expected an object".into()))?;
        let rank = Rank::new(
            obj.get("rank")
                .and_then(|v| v.as_u64())
                .ok_or_else(|| Error::Json("missing rank".into()))? as usize,
        )?;
        let moves_json = obj
            .get("moves")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::Json("missing moves".into()))?;
        let mut moves = Vec::new();
        for m in moves_json {
            let kind = m
                .get("kind")
                .and_then(|v| v.as_str())
                .ok_or_else(|| Error::Json("move without kind".into()))?;
            match kind {
                "pc" => {
                    let set = m
                        .get("set")
                        .and_then(|v| v.as_array())
                        .ok_or_else(|| Error::Json("pc move without set".into()))?
                        .iter()
                        .map(|x| x.as_u64().map(|l| l as u8))
                        .collect::<Option<BTreeSet<u8>>>()
                        .ok_or_else(|| Error::Json("bad set entry".into()))?;
                    let by = m
                        .get("i")
                        .and_then(|v| v.as_u64())
                        .ok_or_else(|| Error::Json("pc move without i".into()))?
                        as u8;
                    moves.push(GeneratorMove::partial_conj(set, by)?);
                }
                "swap" => {
                    let a = m
                        .get("i")
                        .and_then(|v| v.as_u64())
                        .ok_or_else(|| Error::Json("swap without i".into()))? as u8;
                    let b = m
                        .get("j")
                        .and_then(|v| v.as_u64())
                        .ok_or_else(|| Error::Json("swap without j".into()))? as u8;
                    moves.push(GeneratorMove::swap(a, b)?);
                }
                other => return Err(Error::Json(format!("unknown move kind {other:?}"))),
            }
        }
        let aut = Automorphism::from_moves(rank, moves)?;
        if let Some(images) = obj.get("images").and_then(|v| v.as_array()) {
            if images.len() != rank.get() {
                return Err(Error::ImageMismatch);
            }
            for (idx, img) in images.iter().enumerate() {
                let text = img.as_str().ok_or_else(|| Error::Json("image not a string".into()))?;
                let word = Word::parse(rank, text)?;
                if word != aut.image_word((idx + 1) as u8) {
                    return Err(Error::ImageMismatch);
                }
            }
        }
        Ok(aut)
    }
}

/// Swap moves composing to the permutation `perm` (1-based images).
fn permutation_moves(perm: &[u8]) -> Vec<GeneratorMove> {
    let mut q: Vec<u8> = perm.to_vec();
    let mut moves = Vec::new();
    for i in 1..=q.len() as u8 {
        let qi = q[(i - 1) as usize];
        if qi != i {
            let m = GeneratorMove::swap(i, qi).expect("distinct letters");
            // post-compose with the transposition fixing position i
            for entry in q.iter_mut() {
                *entry = m.permute(*entry);
            }
            moves.push(m);
        }
    }
    moves
}

const STANDARDIZE_DEPTH: usize = 8;

/// Finds an automorphism `phi` carrying every word of the tuple to a single
/// standard generator, by Whitehead descent on the total word length.
/// Returns `phi` and the target letters, in tuple order.
pub fn standardize_marking(rank: Rank, words: &[Word]) -> Result<(Automorphism, Vec<u8>), Error> {
    if words.iter().any(|w| w.is_empty()) {
        return Err(Error::InvalidImages { reason: "empty word in marking".into() });
    }
    let targets = |ws: &[Word]| -> Option<Vec<u8>> {
        ws.iter().map(|w| if w.len() == 1 { Some(w.letters()[0]) } else { None }).collect()
    };
    if let Some(letters) = targets(words) {
        return Ok((Automorphism::identity(rank), letters));
    }
    let score = |ws: &[Word]| -> (usize, usize) {
        (ws.iter().map(|w| w.len()).sum::<usize>(), 0)
    };
    let (trace, final_words, _complete, explored) = subgroup::whitehead_descend(
        rank,
        words,
        &score,
        &subgroup::tuple_key,
        STANDARDIZE_DEPTH,
    );
    match targets(&final_words) {
        Some(letters) => {
            let mut moves = trace;
            moves.reverse();
            let phi = Automorphism::from_moves(rank, moves)?;
            debug_assert!(words.iter().zip(&letters).all(|(w, &l)| {
                phi.apply(w) == Word::generator(rank, l).unwrap()
            }));
            Ok((phi, letters))
        }
        None => Err(Error::DescentBudget { depth: STANDARDIZE_DEPTH, states: explored }),
    }
}

/// Builds the automorphism with the given image tuple, synthesizing a move
/// word by Whitehead descent; fails if the tuple is not a marking or the
/// descent budget runs out.
pub fn from_images(rank: Rank, images: &[Involution]) -> Result<Automorphism, Error> {
    if images.len() != rank.get() {
        return Err(Error::InvalidImages {
            reason: format!("expected {} images, got {}", rank.get(), images.len()),
        });
    }
    let classes: BTreeSet<u8> = images.iter().map(|img| img.letter()).collect();
    if classes.len() != rank.get() {
        return Err(Error::InvalidImages {
            reason: "image class letters do not form a permutation".into(),
        });
    }
    let words: Vec<Word> = images.iter().map(|img| img.word()).collect();
    let (phi, letters) = standardize_marking(rank, &words)?;
    // self = phi^{-1} ∘ P with P the letter permutation i -> letters[i-1]
    let perm: Vec<u8> = letters.clone();
    let mut moves = phi.inverse().moves().to_vec();
    moves.extend(permutation_moves(&perm));
    let result = Automorphism::from_moves(rank, moves)?;
    for (i, img) in images.iter().enumerate() {
        if result.image_word((i + 1) as u8) != img.word() {
            return Err(Error::ImageMismatch);
        }
    }
    Ok(result)
}

/// The twist of a free splitting about one of its edges: the identity on the
/// collapse block containing the endpoint whose vertex group holds `z`, and
/// conjugation by `z` on the block across the edge. For the one-edge star
/// with factor `A` and leaf `x_n`, twisting by `z` in `A` is exactly the
/// leaf conjugation `x_n -> z x_n z^{-1}`.
pub fn twist(tree: &SplittingTree, edge: usize, z: &Word) -> Result<Automorphism, Error> {
    let rank = tree.rank();
    assert_eq!(rank, z.rank(), "rank mismatch in twist");
    if edge >= tree.edge_count() {
        return Err(Error::NoSuchEdge { index: edge });
    }
    if z.is_empty() {
        return Ok(Automorphism::identity(rank));
    }
    let (a, b) = tree.edge(edge);
    let member_of = |v: usize| -> Result<bool, Error> {
        let gens: Vec<Word> = tree.vertex_gens(v).iter().map(|t| t.word()).collect();
        if gens.is_empty() {
            return Ok(false);
        }
        Ok(CoreGraph::from_generators(rank, &gens)?.member(z))
    };
    let near = if member_of(a)? {
        a
    } else if member_of(b)? {
        b
    } else {
        return Err(Error::TwistorNotInVertexGroup);
    };
    let far_root = if near == a { b } else { a };
    let far_side = tree.component_without_edge(edge, far_root);

    let mut words: Vec<Word> = Vec::new();
    let mut far_flags: Vec<bool> = Vec::new();
    for v in 0..tree.vertex_count() {
        for t in tree.vertex_gens(v) {
            words.push(t.word());
            far_flags.push(far_side.contains(&v));
        }
    }
    let (phi, letters) = standardize_marking(rank, &words)?;
    let far_letters: BTreeSet<u8> = letters
        .iter()
        .zip(&far_flags)
        .filter(|(_, &far)| far)
        .map(|(&l, _)| l)
        .collect();
    let z0 = phi.apply(z);
    let core_twist = Automorphism::block_conjugation(rank, &far_letters, &z0)?;
    let result = phi.inverse().compose(&core_twist).compose(&phi);
    debug_assert!(words.iter().zip(&far_flags).all(|(t, &far)| {
        let image = result.apply(t);
        if far {
            image == t.conjugated_by(z)
        } else {
            image == *t
        }
    }));
    Ok(result)
}

/// The unique representative of the outer class of `f` that maps the free
/// factor `<a_gens>` onto itself and fixes the complementary leaf involution
/// exactly. Fails when `f` does not stabilize the splitting class.
pub fn normalize_stabilizer_rep(
    f: &Automorphism,
    a_gens: &[Involution],
    leaf: &Involution,
) -> Result<Automorphism, Error> {
    let rank = f.rank();
    let a_words: Vec<Word> = a_gens.iter().map(|t| t.word()).collect();
    let core_a = CoreGraph::from_generators(rank, &a_words)?;
    let fa_words: Vec<Word> = a_words.iter().map(|w| f.apply(w)).collect();
    let core_fa = CoreGraph::from_generators(rank, &fa_words)?;
    let g0 = core_fa.conjugate_subgroups(&core_a).ok_or(Error::NotAStabilizer)?;
    let f1 = Automorphism::inner(&g0).compose(f);
    let t1 = f1.apply(&leaf.word());
    let inv1 = t1.as_involution().ok_or(Error::NotAStabilizer)?;
    if inv1.letter() != leaf.letter() {
        return Err(Error::NotAStabilizer);
    }
    let letter = Word::generator(rank, leaf.letter())?;
    let candidates = [
        leaf.conjugator().mul(&inv1.conjugator().inverse()),
        leaf.conjugator().mul(&letter).mul(&inv1.conjugator().inverse()),
    ];
    for h in candidates {
        if core_a.member(&h) {
            let normalized = Automorphism::inner(&h).compose(&f1);
            // exactness of the normalization
            if normalized.apply(&leaf.word()) != leaf.word() {
                continue;
            }
            if a_words.iter().all(|w| core_a.member(&normalized.apply(w))) {
                return Ok(normalized);
            }
        }
    }
    Err(Error::NotAStabilizer)
}

#[cfg(test)]
pub mod tests_support {
    use super::*;
    use rand::prelude::*;

    pub fn random_move(rng: &mut impl Rng, rank: Rank) -> GeneratorMove {
        let n = rank.get() as u8;
        if rng.gen_bool(0.5) {
            let by = rng.gen_range(1..=n);
            let mut set = BTreeSet::new();
            while set.is_empty() {
                for l in rank.letters() {
                    if l != by && rng.gen_bool(0.4) {
                        set.insert(l);
                    }
                }
            }
            GeneratorMove::partial_conj(set, by).unwrap()
        } else {
            let a = rng.gen_range(1..=n);
            let mut b = rng.gen_range(1..=n);
            while b == a {
                b = rng.gen_range(1..=n);
            }
            GeneratorMove::swap(a, b).unwrap()
        }
    }

    pub fn random_automorphism(rng: &mut impl Rng, rank: Rank, max_moves: usize) -> Automorphism {
        let count = rng.gen_range(0..=max_moves);
        let moves = (0..count).map(|_| random_move(rng, rank)).collect();
        Automorphism::from_moves(rank, moves).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::tests_support::*;
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rk(n: usize) -> Rank {
        Rank::new(n).unwrap()
    }

    fn w(n: usize, letters: &[u8]) -> Word {
        Word::reduce(rk(n), letters).unwrap()
    }

    #[test]
    fn sigma_action() {
        let s = Automorphism::sigma(rk(3), 2, 1).unwrap();
        assert_eq!(s.apply(&w(3, &[2])), w(3, &[1, 2, 1]));
        assert_eq!(s.apply(&w(3, &[1])), w(3, &[1]));
        assert!(s.compose(&s).is_identity());
    }

    #[test]
    fn all_generating_moves_are_involutions() {
        let rank = rk(4);
        for m in crate::subgroup::partial_conj_moves(rank) {
            let f = Automorphism::from_move(rank, m).unwrap();
            assert!(f.compose(&f).is_identity());
        }
        for i in 1..=4u8 {
            for j in (i + 1)..=4u8 {
                let f = Automorphism::transposition(rank, i, j).unwrap();
                assert!(f.compose(&f).is_identity());
            }
        }
    }

    #[test]
    fn basepoint_conjugation_images() {
        let f = Automorphism::basepoint_conjugation(rk(4), 3).unwrap();
        assert_eq!(f.apply(&w(4, &[3])), w(4, &[1, 2, 3, 2, 1]));
        assert_eq!(f.apply(&w(4, &[4])), w(4, &[4]));
        assert!(Automorphism::basepoint_conjugation(rk(4), 2).is_err());
    }

    #[test]
    fn leaf_conjugation_images() {
        let f = Automorphism::leaf_conjugation(rk(5), 5, &w(5, &[2, 3])).unwrap();
        assert_eq!(f.apply(&w(5, &[5])), w(5, &[2, 3, 5, 3, 2]));
        for j in 1..=4u8 {
            assert_eq!(f.apply(&w(5, &[j])), w(5, &[j]));
        }
        assert!(Automorphism::leaf_conjugation(rk(5), 5, &w(5, &[2, 5])).is_err());
    }

    #[test]
    fn inner_automorphisms() {
        let g = w(4, &[1, 2]);
        let f = Automorphism::inner(&g);
        for l in 1..=4u8 {
            assert_eq!(f.apply(&w(4, &[l])), w(4, &[l]).conjugated_by(&g));
        }
        assert_eq!(f.inner_witness().unwrap(), g);
        // ad_{x_1}: x_j -> 1 j 1 for j != 1
        let f1 = Automorphism::inner(&w(4, &[1]));
        assert_eq!(f1.apply(&w(4, &[2])), w(4, &[1, 2, 1]));
        assert_eq!(f1.apply(&w(4, &[1])), w(4, &[1]));
    }

    #[test]
    fn inverse_and_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let n = rng.gen_range(3..=6usize);
            let f = random_automorphism(&mut rng, rk(n), 8);
            let g = random_automorphism(&mut rng, rk(n), 8);
            assert!(f.inverse().compose(&f).is_identity());
            assert!(f.compose(&f.inverse()).is_identity());
            let word = crate::word::Word::reduce(
                rk(n),
                &(0..10)
                    .map(|_| rng.gen_range(1..=n as u8))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            // apply is a homomorphism through composition
            assert_eq!(f.compose(&g).apply(&word), f.apply(&g.apply(&word)));
        }
    }

    #[test]
    fn class_permutation_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..200 {
            let n = rng.gen_range(3..=6usize);
            let f = random_automorphism(&mut rng, rk(n), 6);
            let g = random_automorphism(&mut rng, rk(n), 6);
            let fg = f.compose(&g);
            let pf = f.class_permutation();
            let pg = g.class_permutation();
            let composed: Vec<u8> = pg.iter().map(|&l| pf[(l - 1) as usize]).collect();
            assert_eq!(fg.class_permutation(), composed);
        }
        // partial conjugations land in the class-trivial subgroup, swaps do not
        assert!(Automorphism::sigma(rk(4), 2, 1).unwrap().is_class_trivial());
        let sw = Automorphism::transposition(rk(4), 1, 2).unwrap();
        assert!(!sw.is_class_trivial());
        assert_eq!(sw.class_permutation(), vec![2, 1, 3, 4]);
    }

    #[test]
    fn outer_equality() {
        let rank = rk(4);
        let id = Automorphism::identity(rank);
        let ad1 = Automorphism::inner(&w(4, &[1]));
        assert_eq!(ad1.equal_outer(&id).unwrap(), w(4, &[1]));
        let s = Automorphism::sigma(rank, 2, 1).unwrap();
        let sw = Automorphism::transposition(rank, 1, 2).unwrap();
        assert!(s.equal_outer(&sw).is_none());

        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..200 {
            let n = rng.gen_range(3..=5usize);
            let f = random_automorphism(&mut rng, rk(n), 6);
            let len = rng.gen_range(0..6);
            let g = crate::word::Word::reduce(
                rk(n),
                &(0..len).map(|_| rng.gen_range(1..=n as u8)).collect::<Vec<_>>(),
            )
            .unwrap();
            let shifted = Automorphism::inner(&g).compose(&f);
            let h = f.equal_outer(&shifted).expect("same outer class");
            for l in 1..=n as u8 {
                assert_eq!(f.image_word(l).conjugated_by(&h), shifted.image_word(l));
            }
        }
    }

    #[test]
    fn from_images_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..100 {
            let n = rng.gen_range(3..=5usize);
            let f = random_automorphism(&mut rng, rk(n), 5);
            let rebuilt = from_images(rk(n), f.images()).unwrap();
            assert_eq!(rebuilt, f);
        }
    }

    #[test]
    fn from_images_rejects_non_markings() {
        let rank = rk(3);
        // two images in the same class cannot be a marking
        let images = vec![
            Involution::standard(rank, 1).unwrap(),
            Involution::standard(rank, 1).unwrap(),
            Involution::standard(rank, 3).unwrap(),
        ];
        assert!(matches!(from_images(rank, &images), Err(Error::InvalidImages { .. })));
        // a tuple generating a proper subgroup is not a marking either:
        // (x_1, 2.1.2, x_3) generates <x_1, x_2 x_1 x_2, x_3>
        let images = vec![
            Involution::standard(rank, 1).unwrap(),
            w(3, &[2, 1, 2]).as_involution().unwrap(),
            Involution::standard(rank, 3).unwrap(),
        ];
        assert!(from_images(rank, &images).is_err());
    }

    #[test]
    fn json_round_trip_and_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let f = random_automorphism(&mut rng, rk(5), 6);
        let json = f.to_json();
        let back = Automorphism::from_json(&json).unwrap();
        assert_eq!(back, f);
        // corrupt one image
        let mut bad = json.clone();
        bad["images"][0] = serde_json::json!("2.1.2");
        if f.image_word(1) != w(5, &[2, 1, 2]) {
            assert!(matches!(Automorphism::from_json(&bad), Err(Error::ImageMismatch)));
        }
    }

    #[test]
    fn standardize_marking_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for _ in 0..60 {
            let n = rng.gen_range(3..=5usize);
            let f = random_automorphism(&mut rng, rk(n), 5);
            let words: Vec<Word> =
                (1..=n as u8).map(|l| f.apply(&Word::generator(rk(n), l).unwrap())).collect();
            let (phi, letters) = standardize_marking(rk(n), &words).unwrap();
            for (word, &l) in words.iter().zip(&letters) {
                assert_eq!(phi.apply(word), Word::generator(rk(n), l).unwrap());
            }
        }
    }
}
