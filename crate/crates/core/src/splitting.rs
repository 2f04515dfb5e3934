//! Free splittings of `W_n` as marked graphs of groups, and star classes.
//!
//! A splitting is stored as its quotient tree: vertices carry lists of
//! involutions generating the vertex groups, edge groups are trivial. A
//! `W_k`-star has a center vertex of rank `k` and `n-k` order-two leaves; the
//! one-edge case is a `W_{n-1}`-star.
//!
//! Equivalence classes of stars are represented canonically by the set of
//! conjugacy classes of their corank-one factors (the one-edge collapses):
//! by uniqueness of refinements this set is a complete invariant, and
//! refinement, compatibility and graph adjacency are all computed from it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::aut::Automorphism;
use crate::error::Error;
use crate::subgroup::{self, CoreGraph, FreeFactor, FreeFactorClass};
use crate::word::{Involution, Rank, Word};

const ANCHOR_LENGTH: usize = 6;

#[derive(Clone, PartialEq, Eq)]
pub struct SplittingTree {
    rank: Rank,
    vertices: Vec<Vec<Involution>>,
    edges: Vec<(usize, usize)>,
}

impl fmt::Debug for SplittingTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tree[{} vertices, {} edges]", self.vertices.len(), self.edges.len())
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub first_violation: Option<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.first_violation.is_none()
    }
}

impl SplittingTree {
    pub fn new(
        rank: Rank,
        vertices: Vec<Vec<Involution>>,
        edges: Vec<(usize, usize)>,
    ) -> SplittingTree {
        SplittingTree { rank, vertices, edges }
    }

    /// The star with center group generated by the letters of `center` and
    /// one order-two leaf for every remaining letter.
    pub fn standard_star(rank: Rank, center: &BTreeSet<u8>) -> Result<SplittingTree, Error> {
        let n = rank.get();
        for &l in center {
            if !rank.contains(l) {
                return Err(Error::LetterOutOfRange { letter: l as usize, rank: n });
            }
        }
        if center.len() == n {
            return Err(Error::CenterIsEverything { rank: n });
        }
        let center_gens: Vec<Involution> = center
            .iter()
            .map(|&l| Involution::standard(rank, l).expect("letter in range"))
            .collect();
        let mut vertices = vec![center_gens];
        let mut edges = Vec::new();
        for l in rank.letters() {
            if !center.contains(&l) {
                vertices.push(vec![Involution::standard(rank, l).expect("letter in range")]);
                edges.push((0, vertices.len() - 1));
            }
        }
        Ok(SplittingTree { rank, vertices, edges })
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> (usize, usize) {
        self.edges[index]
    }

    pub fn vertex_gens(&self, v: usize) -> &[Involution] {
        &self.vertices[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Vertices of the component of `root` after deleting one edge.
    pub fn component_without_edge(&self, edge: usize, root: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        seen.insert(root);
        let mut queue = VecDeque::new();
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for (i, &(a, b)) in self.edges.iter().enumerate() {
                if i == edge {
                    continue;
                }
                let other = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if seen.insert(other) {
                    queue.push_back(other);
                }
            }
        }
        seen
    }

    /// Applies an automorphism to the marking.
    pub fn apply(&self, f: &Automorphism) -> SplittingTree {
        assert_eq!(self.rank, f.rank(), "rank mismatch in tree action");
        let vertices = self
            .vertices
            .iter()
            .map(|gens| gens.iter().map(|t| f.apply_involution(t)).collect())
            .collect();
        SplittingTree { rank: self.rank, vertices, edges: self.edges.clone() }
    }

    /// Contracts the given edges, merging vertex groups along them.
    pub fn collapse(&self, contracted: &BTreeSet<usize>) -> Result<SplittingTree, Error> {
        if contracted.len() >= self.edges.len() {
            return Err(Error::CollapseEverything);
        }
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut Vec<usize>, v: usize) -> usize {
            if parent[v] == v {
                v
            } else {
                let r = find(parent, parent[v]);
                parent[v] = r;
                r
            }
        }
        for &e in contracted {
            if e >= self.edges.len() {
                return Err(Error::NoSuchEdge { index: e });
            }
            let (a, b) = self.edges[e];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut index: BTreeMap<usize, usize> = BTreeMap::new();
        let mut vertices: Vec<Vec<Involution>> = Vec::new();
        for v in 0..self.vertices.len() {
            let r = find(&mut parent, v);
            let slot = *index.entry(r).or_insert_with(|| {
                vertices.push(Vec::new());
                vertices.len() - 1
            });
            vertices[slot].extend(self.vertices[v].iter().cloned());
        }
        let mut edges = Vec::new();
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if !contracted.contains(&i) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                edges.push((index[&ra], index[&rb]));
            }
        }
        Ok(SplittingTree { rank: self.rank, vertices, edges })
    }

    /// `(center, leaves)` when the tree is a star; the one-edge case takes
    /// the larger vertex group as center.
    pub fn star_shape(&self) -> Option<(usize, Vec<usize>)> {
        let m = self.edges.len();
        if m == 0 {
            return None;
        }
        if m == 1 {
            let (a, b) = self.edges[0];
            let (center, leaf) = if self.vertices[a].len() >= self.vertices[b].len() {
                (a, b)
            } else {
                (b, a)
            };
            return Some((center, vec![leaf]));
        }
        let center = (0..self.vertices.len()).find(|&v| self.degree(v) == m)?;
        let mut leaves = Vec::new();
        for v in 0..self.vertices.len() {
            if v == center {
                continue;
            }
            if self.degree(v) != 1 {
                return None;
            }
            leaves.push(v);
        }
        if leaves.len() != m {
            return None;
        }
        Some((center, leaves))
    }

    /// The equivalence class of a star: the set of conjugacy classes of its
    /// one-edge collapses, one corank-one factor per leaf.
    pub fn star_class(&self) -> Result<StarClass, Error> {
        let (center, leaves) = self.star_shape().ok_or(Error::NotAStar)?;
        let mut corank1 = BTreeSet::new();
        for &leaf in &leaves {
            let mut gens: Vec<Word> = Vec::new();
            for v in 0..self.vertices.len() {
                if v == leaf {
                    continue;
                }
                gens.extend(self.vertices[v].iter().map(|t| t.word()));
            }
            corank1.insert(FreeFactorClass::of_generators(self.rank, &gens)?);
        }
        if corank1.len() != leaves.len() {
            return Err(Error::InvalidSplitting(
                "one-edge collapses are not pairwise distinct".into(),
            ));
        }
        let _ = center;
        StarClass::new(self.rank, corank1)
    }

    /// Checks the splitting invariants and reports the first violation.
    pub fn validate(&self) -> ValidationReport {
        let fail = |msg: String| ValidationReport { first_violation: Some(msg) };
        if self.vertices.is_empty() || self.edges.is_empty() {
            return fail("a splitting needs at least one edge".into());
        }
        // connected tree
        if self.edges.len() + 1 != self.vertices.len() {
            return fail(format!(
                "not a tree: {} vertices, {} edges",
                self.vertices.len(),
                self.edges.len()
            ));
        }
        let reachable = {
            let mut seen = BTreeSet::new();
            seen.insert(0usize);
            let mut queue = VecDeque::from([0usize]);
            while let Some(v) = queue.pop_front() {
                for &(a, b) in &self.edges {
                    let other = if a == v {
                        b
                    } else if b == v {
                        a
                    } else {
                        continue;
                    };
                    if seen.insert(other) {
                        queue.push_back(other);
                    }
                }
            }
            seen
        };
        if reachable.len() != self.vertices.len() {
            return fail("quotient graph is not connected".into());
        }
        for v in 0..self.vertices.len() {
            if self.vertices[v].is_empty() && self.degree(v) < 3 {
                return fail(format!("vertex {v} has trivial group but degree {}", self.degree(v)));
            }
        }
        let mut classes: Vec<u8> = Vec::new();
        for gens in &self.vertices {
            classes.extend(gens.iter().map(|t| t.letter()));
        }
        classes.sort_unstable();
        let expected: Vec<u8> = self.rank.letters().collect();
        if classes != expected {
            return fail(format!(
                "vertex group classes {classes:?} do not cover 1..={} exactly once",
                self.rank.get()
            ));
        }
        for (v, gens) in self.vertices.iter().enumerate() {
            if gens.is_empty() {
                continue;
            }
            let words: Vec<Word> = gens.iter().map(|t| t.word()).collect();
            let core = match CoreGraph::from_generators(self.rank, &words) {
                Ok(core) => core,
                Err(e) => return fail(format!("vertex {v}: {e}")),
            };
            match subgroup::is_free_factor(&core, subgroup::DEFAULT_WHITEHEAD_DEPTH) {
                Ok(FreeFactor::Yes(_)) => {}
                Ok(FreeFactor::No { .. }) => {
                    return fail(format!("vertex {v} group is not a free factor"));
                }
                Ok(FreeFactor::Inconclusive { depth_budget, .. }) => {
                    return fail(format!(
                        "vertex {v} free-factor status undecided within depth {depth_budget}"
                    ));
                }
                Err(e) => return fail(format!("vertex {v}: {e}")),
            }
        }
        ValidationReport { first_violation: None }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rank": self.rank.get(),
            "vertices": self
                .vertices
                .iter()
                .map(|gens| gens.iter().map(|t| t.word().to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<SplittingTree, Error> {
        let obj = value.as_object().ok_or_else(|| Error::Json("expected an object".into()))?;
        let rank = Rank::new(
            obj.get("rank")
                .and_then(|v| v.as_u64())
                .ok_or_else(|| Error::Json("missing rank".into()))? as usize,
        )?;
        let vertices_json = obj
            .get("vertices")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::Json("missing vertices".into()))?;
        let mut vertices = Vec::new();
        for gens in vertices_json {
            let gens = gens.as_array().ok_or_else(|| Error::Json("vertex not a list".into()))?;
            let mut list = Vec::new();
            for g in gens {
                let text = g.as_str().ok_or_else(|| Error::Json("word not a string".into()))?;
                let word = Word::parse(rank, text)?;
                let inv = word.as_involution().ok_or_else(|| {
                    Error::Json(format!("vertex generator {text:?} has infinite order"))
                })?;
                list.push(inv);
            }
            vertices.push(list);
        }
        let edges_json = obj
            .get("edges")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::Json("missing edges".into()))?;
        let mut edges = Vec::new();
        for e in edges_json {
            let pair = e.as_array().ok_or_else(|| Error::Json("edge not a pair".into()))?;
            if pair.len() != 2 {
                return Err(Error::Json("edge not a pair".into()));
            }
            let a = pair[0].as_u64().ok_or_else(|| Error::Json("bad edge endpoint".into()))?;
            let b = pair[1].as_u64().ok_or_else(|| Error::Json("bad edge endpoint".into()))?;
            if a as usize >= vertices.len() || b as usize >= vertices.len() {
                return Err(Error::Json("edge endpoint out of range".into()));
            }
            edges.push((a as usize, b as usize));
        }
        Ok(SplittingTree { rank, vertices, edges })
    }

    /// DOT rendering of the quotient graph with vertex-group labels.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph splitting {\n");
        for (v, gens) in self.vertices.iter().enumerate() {
            let label = if gens.is_empty() {
                "1".to_string()
            } else {
                gens.iter().map(|t| t.word().to_string()).collect::<Vec<_>>().join(", ")
            };
            out.push_str(&format!("  v{v} [label=\"<{label}>\"];\n"));
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!("  v{a} -- v{b};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Equivalence class of a `W_k`-star: the set of its `n-k` corank-one
/// factor classes. A complete, canonical invariant of the class.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StarClass {
    rank: Rank,
    corank1: BTreeSet<FreeFactorClass>,
}

impl fmt::Debug for StarClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "star[k={} | {}]", self.center_rank(), self.short_id())
    }
}

impl StarClass {
    pub fn new(rank: Rank, corank1: BTreeSet<FreeFactorClass>) -> Result<StarClass, Error> {
        if corank1.is_empty() || corank1.len() > rank.get() {
            return Err(Error::BadFamilySize {
                got: corank1.len(),
                min: 1,
                max: rank.get(),
            });
        }
        for c in &corank1 {
            if !c.is_corank_one() {
                return Err(Error::NotCorankOne);
            }
        }
        Ok(StarClass { rank, corank1 })
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn corank1(&self) -> &BTreeSet<FreeFactorClass> {
        &self.corank1
    }

    /// The rank `k` of the center group: `n` minus the number of edges.
    pub fn center_rank(&self) -> usize {
        self.rank.get() - self.corank1.len()
    }

    pub fn act(&self, f: &Automorphism) -> StarClass {
        let corank1 = self.corank1.iter().map(|c| c.apply(f)).collect();
        StarClass::new(self.rank, corank1).expect("automorphic image of a star class")
    }

    /// `self` refines `other`: every one-edge collapse of `other` is one of
    /// `self` (so `self` has the smaller center).
    pub fn refines(&self, other: &StarClass) -> bool {
        other.corank1.is_subset(&self.corank1)
    }

    /// Deterministic fingerprint of the class (FNV-1a over the codes).
    pub fn short_id(&self) -> String {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for c in &self.corank1 {
            for unit in c.code() {
                for byte in unit.to_le_bytes() {
                    hash ^= byte as u64;
                    hash = hash.wrapping_mul(0x1000_0000_01b3);
                }
            }
            hash ^= 0xff;
            hash = hash.wrapping_mul(0x1000_0000_01b3);
        }
        format!("{hash:016x}")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rank": self.rank.get(),
            "k": self.center_rank(),
            "corank1": self.corank1.iter().map(|c| c.code_string()).collect::<Vec<_>>(),
        })
    }
}

/// The one-edge splitting determined by a corank-one factor class: its
/// representative generators and a complementary order-two leaf. The leaf is
/// produced from a free-factor witness, so the pair really spans `W_n`.
pub fn one_edge_splitting(class: &FreeFactorClass) -> Result<(Vec<Word>, Involution), Error> {
    if !class.is_corank_one() {
        return Err(Error::NotCorankOne);
    }
    let rank = class.rank();
    let missing = class.missing_class().expect("corank-one class misses one letter");
    let core = class.representative_core();
    match subgroup::is_free_factor(&core, subgroup::DEFAULT_WHITEHEAD_DEPTH)? {
        FreeFactor::Yes(psi) => {
            let leaf_word = psi.inverse().apply(&Word::generator(rank, missing)?);
            let leaf = leaf_word.as_involution().expect("image of a generator");
            Ok((class.representative().to_vec(), leaf))
        }
        FreeFactor::No { .. } => Err(Error::NotAFreeFactor),
        FreeFactor::Inconclusive { .. } => Err(Error::FreeFactorUndecided),
    }
}

/// Builds the one-edge star tree of a corank-one class.
pub fn one_edge_tree(class: &FreeFactorClass) -> Result<SplittingTree, Error> {
    let rank = class.rank();
    let (gens, leaf) = one_edge_splitting(class)?;
    let center: Vec<Involution> = gens
        .iter()
        .map(|g| g.as_involution().expect("corank-one generators are involutions"))
        .collect();
    Ok(SplittingTree::new(rank, vec![center, vec![leaf]], vec![(0, 1)]))
}

/// Enumerates elements of the subgroup with word length at most `max_len`,
/// shortest first: closed reduced paths at the base of the core graph.
fn subgroup_elements(core: &CoreGraph, max_len: usize) -> Vec<Word> {
    let rank = core.rank();
    let mut out = vec![Word::identity(rank)];
    let mut frontier: Vec<(usize, Vec<u8>)> = vec![(core.base(), Vec::new())];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (v, letters) in &frontier {
            for l in rank.letters() {
                if letters.last() == Some(&l) {
                    continue;
                }
                if let Some(t) = core.transition(*v, l) {
                    let mut ext = letters.clone();
                    ext.push(l);
                    if t == core.base() {
                        out.push(Word::reduce(rank, &ext).expect("letters in range"));
                    }
                    next.push((t, ext));
                }
            }
        }
        frontier = next;
    }
    out
}

/// The common refinement of two distinct one-edge classes, when compatible:
/// a two-edge star whose one-edge collapses are exactly the two inputs.
///
/// The leaf of `b` is anchored at the class position inside a representative
/// of `a`; with the anchor fixed, the aligning conjugator is determined up
/// to the order-two centralizer of the leaf, leaving two candidates. Each is
/// accepted only after the center passes the signature and join checks.
pub fn compatible_one_edge_tree(
    a: &FreeFactorClass,
    b: &FreeFactorClass,
) -> Result<Option<SplittingTree>, Error> {
    if !a.is_corank_one() || !b.is_corank_one() {
        return Err(Error::NotCorankOne);
    }
    let rank = a.rank();
    assert_eq!(rank, b.rank(), "rank mismatch");
    if a == b {
        return Ok(None);
    }
    let missing_a = a.missing_class().expect("corank-one");
    let missing_b = b.missing_class().expect("corank-one");
    if missing_a == missing_b {
        // a two-edge star covers each class once, so its two collapses miss
        // different letters
        return Ok(None);
    }
    let core_a = a.representative_core();
    let (_, tau_b) = one_edge_splitting(b)?;
    let (loop_v, _) = core_a
        .loops()
        .into_iter()
        .find(|&(_, l)| l == missing_b)
        .expect("corank-one factor covers every class but one");
    let anchor_path = core_a.path_to(loop_v);
    let letter_b = Word::generator(rank, missing_b)?;
    let q_inv = tau_b.conjugator().inverse();
    let n = rank.get();
    for g in [
        anchor_path.mul(&q_inv),
        anchor_path.mul(&letter_b).mul(&q_inv),
    ] {
        let moved: Vec<Word> = b.representative().iter().map(|x| x.conjugated_by(&g)).collect();
        let core_moved = CoreGraph::from_generators(rank, &moved)?;
        let center_core = core_a.intersect(&core_moved);
        if center_core.kurosh_signature() != (n - 2, 0) {
            continue;
        }
        let center_words = center_core.canonical_generators();
        let t_prime_word = letter_b.conjugated_by(&anchor_path);
        let with_tprime: Vec<Word> = center_words
            .iter()
            .cloned()
            .chain([t_prime_word.clone()])
            .collect();
        if !CoreGraph::from_generators(rank, &with_tprime)?.equal_subgroups(&core_a) {
            continue;
        }
        let Some((loop_m, _)) = core_moved.loops().into_iter().find(|&(_, l)| l == missing_a)
        else {
            continue;
        };
        let t_word =
            Word::generator(rank, missing_a)?.conjugated_by(&core_moved.path_to(loop_m));
        let with_t: Vec<Word> =
            center_words.iter().cloned().chain([t_word.clone()]).collect();
        if !CoreGraph::from_generators(rank, &with_t)?.equal_subgroups(&core_moved) {
            continue;
        }
        let center: Vec<Involution> = center_words
            .iter()
            .map(|w| w.as_involution().expect("loop generators are involutions"))
            .collect();
        let t = t_word.as_involution().expect("conjugated letter");
        let t_prime = t_prime_word.as_involution().expect("conjugated letter");
        let tree = SplittingTree::new(
            rank,
            vec![center, vec![t], vec![t_prime]],
            vec![(0, 1), (0, 2)],
        );
        return Ok(Some(tree));
    }
    Ok(None)
}

/// Compatibility of two one-edge classes.
pub fn compatible_one_edge(
    a: &FreeFactorClass,
    b: &FreeFactorClass,
) -> Result<Option<StarClass>, Error> {
    match compatible_one_edge_tree(a, b)? {
        Some(tree) => Ok(Some(tree.star_class()?)),
        None => Ok(None),
    }
}

/// One refinement step: splits a new leaf of class `class` off the center of
/// the growing star. Anchors of increasing length are tried inside the
/// center; every candidate must shrink the center by exactly one order-two
/// piece, restore the center when joined with the new leaf, and collapse
/// onto the requested class.
fn refine_step(
    rank: Rank,
    center_words: &mut Vec<Word>,
    leaves: &mut Vec<Involution>,
    class: &FreeFactorClass,
) -> Result<(), Error> {
    let core_c = CoreGraph::from_generators(rank, center_words)?;
    let missing = class.missing_class().ok_or(Error::NotCorankOne)?;
    let (sig_k, sig_r) = core_c.kurosh_signature();
    debug_assert_eq!(sig_r, 0);
    let loop_v = core_c.loops().into_iter().find(|&(_, l)| l == missing);
    let Some((loop_v, _)) = loop_v else {
        return Err(Error::IncompatiblePair {
            left: class.code_string(),
            right: format!("center missing class {missing}"),
        });
    };
    let base_anchor = core_c.path_to(loop_v);
    let (_, tau) = one_edge_splitting(class)?;
    let q_inv = tau.conjugator().inverse();
    let letter = Word::generator(rank, missing)?;
    for shift in subgroup_elements(&core_c, ANCHOR_LENGTH) {
        let anchor = shift.mul(&base_anchor);
        for g in [anchor.mul(&q_inv), anchor.mul(&letter).mul(&q_inv)] {
            let moved: Vec<Word> =
                class.representative().iter().map(|x| x.conjugated_by(&g)).collect();
            let core_moved = CoreGraph::from_generators(rank, &moved)?;
            let new_center_core = core_c.intersect(&core_moved);
            if new_center_core.kurosh_signature() != (sig_k - 1, 0) {
                continue;
            }
            let new_center = new_center_core.canonical_generators();
            let t_prime_word = letter.conjugated_by(&anchor);
            let join: Vec<Word> =
                new_center.iter().cloned().chain([t_prime_word.clone()]).collect();
            if !CoreGraph::from_generators(rank, &join)?.equal_subgroups(&core_c) {
                continue;
            }
            // the collapse that keeps the new leaf must land in `class`
            let mut collapse_gens = new_center.clone();
            collapse_gens.extend(leaves.iter().map(|t| t.word()));
            let collapse_class = FreeFactorClass::of_generators(rank, &collapse_gens)?;
            if collapse_class != *class {
                continue;
            }
            *center_words = new_center;
            leaves.push(t_prime_word.as_involution().expect("conjugated letter"));
            return Ok(());
        }
    }
    Err(Error::IncompatiblePair {
        left: class.code_string(),
        right: "current center".into(),
    })
}

/// The unique star refining all the given one-edge classes: a tree with one
/// edge per class whose one-edge collapses are exactly the input set.
/// Alignment proceeds in canonical code order; any failed alignment is a
/// hard error naming the class.
pub fn refine(classes: &BTreeSet<FreeFactorClass>) -> Result<SplittingTree, Error> {
    let mut iter = classes.iter();
    let first = iter.next().ok_or(Error::BadFamilySize { got: 0, min: 1, max: Rank::MAX })?;
    let rank = first.rank();
    if classes.len() > rank.get() {
        return Err(Error::BadFamilySize { got: classes.len(), min: 1, max: rank.get() });
    }
    if classes.len() == 1 {
        return one_edge_tree(first);
    }
    let (gens, tau) = one_edge_splitting(first)?;
    let mut center_words = gens;
    let mut leaves = vec![tau];
    for class in iter {
        refine_step(rank, &mut center_words, &mut leaves, class)?;
    }
    let center: Vec<Involution> = center_words
        .iter()
        .map(|w| w.as_involution().expect("center generators are involutions"))
        .collect();
    let mut vertices = vec![center];
    let mut edges = Vec::new();
    for leaf in leaves {
        vertices.push(vec![leaf]);
        edges.push((0, vertices.len() - 1));
    }
    let tree = SplittingTree::new(rank, vertices, edges);
    let result_class = tree.star_class()?;
    if result_class.corank1() != classes {
        return Err(Error::InvalidSplitting(
            "refinement does not collapse onto the requested classes".into(),
        ));
    }
    Ok(tree)
}

/// Refinement of a star class given by its corank-one set.
pub fn refine_class(classes: &BTreeSet<FreeFactorClass>) -> Result<StarClass, Error> {
    refine(classes)?.star_class()
}

/// Star classes are compatible when the union of their corank-one sets is
/// pairwise compatible; the refinement of the union then witnesses a common
/// refinement of the two stars.
pub fn is_compatible(s: &StarClass, t: &StarClass) -> Result<bool, Error> {
    let union: Vec<&FreeFactorClass> = s.corank1().union(t.corank1()).collect();
    for (i, x) in union.iter().enumerate() {
        for y in union.iter().skip(i + 1) {
            if compatible_one_edge_tree(x, y)?.is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A free factor system: the conjugacy classes of the nontrivial vertex
/// groups of a splitting.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FreeFactorSystem {
    rank: Rank,
    factors: Vec<FreeFactorClass>,
}

impl FreeFactorSystem {
    pub fn of_tree(tree: &SplittingTree) -> Result<FreeFactorSystem, Error> {
        let mut factors = Vec::new();
        for v in 0..tree.vertex_count() {
            let gens: Vec<Word> = tree.vertex_gens(v).iter().map(|t| t.word()).collect();
            if gens.is_empty() {
                continue;
            }
            factors.push(FreeFactorClass::of_generators(tree.rank(), &gens)?);
        }
        factors.sort();
        Ok(FreeFactorSystem { rank: tree.rank(), factors })
    }

    /// The minimum of the partial order: every class a single generator.
    pub fn minimum(rank: Rank) -> FreeFactorSystem {
        let factors = rank
            .letters()
            .map(|l| {
                FreeFactorClass::of_generators(rank, &[Word::generator(rank, l).unwrap()])
                    .expect("single letter")
            })
            .collect();
        FreeFactorSystem { rank, factors }
    }

    pub fn factors(&self) -> &[FreeFactorClass] {
        &self.factors
    }

    /// Every factor of `self` conjugates into a single factor of `other`.
    pub fn leq(&self, other: &FreeFactorSystem) -> bool {
        self.factors.iter().all(|f| {
            let core_f = f.representative_core();
            other.factors.iter().any(|g| {
                core_f.conjugate_into_subgroup(&g.representative_core()).is_some()
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aut::tests_support::random_automorphism;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rk(n: usize) -> Rank {
        Rank::new(n).unwrap()
    }

    fn w(n: usize, letters: &[u8]) -> Word {
        Word::reduce(rk(n), letters).unwrap()
    }

    fn standard_class(n: usize, letters: &[u8]) -> FreeFactorClass {
        let gens: Vec<Word> = letters.iter().map(|&l| w(n, &[l])).collect();
        FreeFactorClass::of_generators(rk(n), &gens).unwrap()
    }

    #[test]
    fn standard_stars() {
        let zero_star = SplittingTree::standard_star(rk(4), &BTreeSet::new()).unwrap();
        assert_eq!(zero_star.edge_count(), 4);
        assert!(zero_star.validate().is_valid());

        let one_edge =
            SplittingTree::standard_star(rk(4), &BTreeSet::from([1, 2, 3])).unwrap();
        assert_eq!(one_edge.edge_count(), 1);
        assert!(one_edge.validate().is_valid());

        let middle = SplittingTree::standard_star(rk(5), &BTreeSet::from([2, 3, 4])).unwrap();
        assert_eq!(middle.edge_count(), 2);
        assert!(middle.validate().is_valid());

        assert!(matches!(
            SplittingTree::standard_star(rk(4), &BTreeSet::from([1, 2, 3, 4])),
            Err(Error::CenterIsEverything { rank: 4 })
        ));
    }

    #[test]
    fn star_classes_of_standard_stars() {
        let one_edge =
            SplittingTree::standard_star(rk(5), &BTreeSet::from([1, 2, 3, 4])).unwrap();
        let class = one_edge.star_class().unwrap();
        assert_eq!(class.center_rank(), 4);
        assert_eq!(class.corank1().len(), 1);
        assert!(class.corank1().contains(&standard_class(5, &[1, 2, 3, 4])));

        let middle = SplittingTree::standard_star(rk(5), &BTreeSet::from([2, 3, 4])).unwrap();
        let class = middle.star_class().unwrap();
        assert_eq!(class.center_rank(), 3);
        let expected: BTreeSet<FreeFactorClass> =
            [standard_class(5, &[2, 3, 4, 5]), standard_class(5, &[1, 2, 3, 4])]
                .into_iter()
                .collect();
        assert_eq!(class.corank1(), &expected);
    }

    #[test]
    fn invalid_splittings_are_reported() {
        // degree-2 trivial vertex
        let rank = rk(4);
        let tree = SplittingTree::new(
            rank,
            vec![
                vec![Involution::standard(rank, 1).unwrap(), Involution::standard(rank, 2).unwrap()],
                vec![],
                vec![
                    Involution::standard(rank, 3).unwrap(),
                    Involution::standard(rank, 4).unwrap(),
                ],
            ],
            vec![(0, 1), (1, 2)],
        );
        let report = tree.validate();
        assert!(!report.is_valid());
        assert!(report.first_violation.unwrap().contains("vertex 1"));

        // leaf group that is not a free factor
        let tree = SplittingTree::new(
            rank,
            vec![
                vec![
                    Involution::standard(rank, 1).unwrap(),
                    w(4, &[2, 1, 2]).as_involution().unwrap(),
                ],
                vec![
                    Involution::standard(rank, 3).unwrap(),
                    Involution::standard(rank, 4).unwrap(),
                ],
            ],
            vec![(0, 1)],
        );
        let report = tree.validate();
        assert!(!report.is_valid());
        let msg = report.first_violation.unwrap();
        assert!(msg.contains("classes") || msg.contains("free factor"), "{msg}");
    }

    #[test]
    fn collapse_standard_zero_star() {
        let zero_star = SplittingTree::standard_star(rk(4), &BTreeSet::new()).unwrap();
        // keep only the edge to the leaf x_2
        let contracted: BTreeSet<usize> = [0usize, 2, 3].into_iter().collect();
        let collapsed = zero_star.collapse(&contracted).unwrap();
        assert_eq!(collapsed.edge_count(), 1);
        let class = collapsed.star_class().unwrap();
        assert!(class.corank1().contains(&standard_class(4, &[1, 3, 4])));
        assert!(matches!(
            zero_star.collapse(&[0usize, 1, 2, 3].into_iter().collect()),
            Err(Error::CollapseEverything)
        ));
    }

    #[test]
    fn compatible_standard_pair() {
        let a = standard_class(5, &[2, 3, 4, 5]);
        let b = standard_class(5, &[1, 3, 4, 5]);
        let tree = compatible_one_edge_tree(&a, &b).unwrap().expect("compatible");
        assert!(tree.validate().is_valid());
        let class = tree.star_class().unwrap();
        assert_eq!(class.center_rank(), 3);
        assert_eq!(
            class.corank1().iter().cloned().collect::<Vec<_>>(),
            {
                let mut v = vec![a.clone(), b.clone()];
                v.sort();
                v
            }
        );
        // center is <x_3, x_4, x_5>
        let center_gens: Vec<Word> = tree.vertex_gens(0).iter().map(|t| t.word()).collect();
        let center = CoreGraph::from_generators(rk(5), &center_gens).unwrap();
        let expected =
            CoreGraph::from_generators(rk(5), &[w(5, &[3]), w(5, &[4]), w(5, &[5])]).unwrap();
        assert!(center.equal_subgroups(&expected));
    }

    #[test]
    fn incompatible_pair_with_same_missing_class() {
        let a = standard_class(5, &[2, 3, 4, 5]);
        let twisted = FreeFactorClass::of_generators(
            rk(5),
            &[w(5, &[2]), w(5, &[1, 3, 1]), w(5, &[4]), w(5, &[5])],
        )
        .unwrap();
        assert_ne!(a, twisted);
        assert!(compatible_one_edge_tree(&a, &twisted).unwrap().is_none());
        // and reflexive input gives none by convention
        assert!(compatible_one_edge_tree(&a, &a).unwrap().is_none());
    }

    #[test]
    fn refinement_round_trip_standard() {
        let classes: BTreeSet<FreeFactorClass> = [
            standard_class(5, &[2, 3, 4, 5]),
            standard_class(5, &[1, 3, 4, 5]),
            standard_class(5, &[1, 2, 4, 5]),
        ]
        .into_iter()
        .collect();
        let tree = refine(&classes).unwrap();
        assert_eq!(tree.edge_count(), 3);
        let class = tree.star_class().unwrap();
        assert_eq!(class.corank1(), &classes);
        assert_eq!(class.center_rank(), 2);
    }

    #[test]
    fn refinement_round_trip_random_orbits() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..40 {
            let n = 5;
            let k = rng.gen_range(0..=n - 2);
            let mut letters: Vec<u8> = (1..=n as u8).collect();
            letters.shuffle(&mut rng);
            let center: BTreeSet<u8> = letters[..k].iter().copied().collect();
            let std = SplittingTree::standard_star(rk(n), &center).unwrap();
            let gamma = random_automorphism(&mut rng, rk(n), 6);
            let moved = std.apply(&gamma);
            let class = moved.star_class().unwrap();
            assert_eq!(class.corank1().len(), n - k);
            let tree = refine(class.corank1()).unwrap();
            assert_eq!(tree.star_class().unwrap(), class);
            assert_eq!(tree.edge_count(), n - k);
        }
    }

    #[test]
    fn equivariance_of_star_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let std = SplittingTree::standard_star(rk(5), &BTreeSet::from([2, 3, 4])).unwrap();
        let base = std.star_class().unwrap();
        for _ in 0..100 {
            let gamma = random_automorphism(&mut rng, rk(5), 6);
            assert_eq!(std.apply(&gamma).star_class().unwrap(), base.act(&gamma));
        }
        // inner automorphisms act trivially
        for _ in 0..100 {
            let g = crate::word::Word::reduce(
                rk(5),
                &(0..rng.gen_range(0..8)).map(|_| rng.gen_range(1..=5u8)).collect::<Vec<_>>(),
            )
            .unwrap();
            assert_eq!(base.act(&Automorphism::inner(&g)), base);
        }
    }

    #[test]
    fn transposition_moves_one_edge_class() {
        let n = 5;
        let std =
            SplittingTree::standard_star(rk(n), &BTreeSet::from([1, 2, 3, 4])).unwrap();
        let class = std.star_class().unwrap();
        let swapped = class.act(&Automorphism::transposition(rk(n), 1, 5).unwrap());
        let expected = standard_class(5, &[5, 2, 3, 4]);
        assert!(swapped.corank1().contains(&expected));
    }

    #[test]
    fn refines_partial_order() {
        let middle = SplittingTree::standard_star(rk(5), &BTreeSet::from([2, 3, 4]))
            .unwrap()
            .star_class()
            .unwrap();
        let one_edge = SplittingTree::standard_star(rk(5), &BTreeSet::from([2, 3, 4, 5]))
            .unwrap()
            .star_class()
            .unwrap();
        assert!(middle.refines(&one_edge));
        assert!(!one_edge.refines(&middle));
        assert!(middle.refines(&middle));
    }

    #[test]
    fn free_factor_system_order() {
        let rank = rk(5);
        let minimum = FreeFactorSystem::minimum(rank);
        let tree = SplittingTree::standard_star(rank, &BTreeSet::from([2, 3, 4])).unwrap();
        let system = FreeFactorSystem::of_tree(&tree).unwrap();
        assert!(minimum.leq(&system));
        assert!(system.leq(&system));
        assert!(!system.leq(&minimum), "a rank-3 factor cannot conjugate into a Z/2");
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..50 {
            let k = rng.gen_range(0..=3);
            let mut letters: Vec<u8> = (1..=5).collect();
            letters.shuffle(&mut rng);
            let center: BTreeSet<u8> = letters[..k].iter().copied().collect();
            let gamma = random_automorphism(&mut rng, rank, 5);
            let tree =
                SplittingTree::standard_star(rank, &center).unwrap().apply(&gamma);
            let system = FreeFactorSystem::of_tree(&tree).unwrap();
            assert!(minimum.leq(&system));
        }
    }

    #[test]
    fn tree_json_round_trip() {
        let tree = SplittingTree::standard_star(rk(5), &BTreeSet::from([2, 3])).unwrap();
        let json = tree.to_json();
        let back = SplittingTree::from_json(&json).unwrap();
        assert_eq!(back, tree);
    }
}
