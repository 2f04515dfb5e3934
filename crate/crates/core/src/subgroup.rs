//! Folded core graphs for finitely generated subgroups of `W_n`.
//!
//! A core graph is the analog of a Stallings subgroup graph for a free
//! product of order-two groups: edges are unoriented and carry a generator
//! letter, at most one edge with a given letter touches each vertex
//! (foldedness), and a letter may label a self-loop. An `i`-loop at a vertex
//! with base path `p` certifies that the involution `p·x_i·p^{-1}` lies in
//! the subgroup. Membership of a reduced word is a deterministic trace from
//! the base vertex.
//!
//! Conjugacy of subgroups only depends on the basepoint-free cyclic core
//! (hair pruned), compared through a canonical breadth-first code.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::aut::{Automorphism, GeneratorMove};
use crate::error::Error;
use crate::word::{Involution, Rank, Word};

#[derive(Clone)]
pub struct CoreGraph {
    rank: Rank,
    base: usize,
    next: Vec<Vec<Option<usize>>>,
    gens: Vec<Word>,
}

impl PartialEq for CoreGraph {
    fn eq(&self, other: &Self) -> bool {
        // generator provenance is not part of the identity of the graph
        self.rank == other.rank && self.base == other.base && self.next == other.next
    }
}
impl Eq for CoreGraph {}

impl fmt::Debug for CoreGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "core[{} vertices, base {}]", self.next.len(), self.base)
    }
}

struct Folder {
    rank: Rank,
    parent: Vec<usize>,
    next: Vec<Vec<Option<usize>>>,
}

impl Folder {
    fn new(rank: Rank) -> Folder {
        Folder { rank, parent: Vec::new(), next: Vec::new() }
    }

    fn vertex(&mut self) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.next.push(vec![None; self.rank.get()]);
        id
    }

    fn find(&mut self, v: usize) -> usize {
        if self.parent[v] == v {
            v
        } else {
            let root = self.find(self.parent[v]);
            self.parent[v] = root;
            root
        }
    }

    /// Inserts the unoriented edge `u -l- v`, folding to closure.
    fn insert(&mut self, u: usize, l: u8, v: usize) {
        let mut pending = VecDeque::new();
        pending.push_back((u, l, v));
        while let Some((u, l, v)) = pending.pop_front() {
            let u = self.find(u);
            let v = self.find(v);
            let li = (l - 1) as usize;
            let from_u = self.next[u][li].map(|t| self.find(t));
            let from_v = self.next[v][li].map(|t| self.find(t));
            match (from_u, from_v) {
                (None, None) => {
                    self.next[u][li] = Some(v);
                    self.next[v][li] = Some(u);
                }
                (Some(a), None) => {
                    if a == v {
                        self.next[v][li] = Some(u);
                    } else {
                        self.merge(a, v, &mut pending);
                        pending.push_back((u, l, v));
                    }
                }
                (None, Some(b)) => {
                    if b == u {
                        self.next[u][li] = Some(v);
                    } else {
                        self.merge(b, u, &mut pending);
                        pending.push_back((u, l, v));
                    }
                }
                (Some(a), Some(b)) => {
                    if a != v {
                        self.merge(a, v, &mut pending);
                        pending.push_back((u, l, v));
                    } else if b != u {
                        self.merge(b, u, &mut pending);
                        pending.push_back((u, l, v));
                    }
                }
            }
        }
    }

    fn merge(&mut self, a: usize, b: usize, pending: &mut VecDeque<(usize, u8, usize)>) {
        let a = self.find(a);
        let b = self.find(b);
        if a == b {
            return;
        }
        let (root, loser) = if a < b { (a, b) } else { (b, a) };
        self.parent[loser] = root;
        for li in 0..self.rank.get() {
            if let Some(t) = self.next[loser][li] {
                self.next[loser][li] = None;
                pending.push_back((root, (li + 1) as u8, t));
            }
        }
    }

    /// Relabels vertices in breadth-first discovery order from the base, so
    /// structurally equal subgroups produce identical tables regardless of
    /// the generator order they were built from.
    fn compact(mut self, base: usize) -> (usize, Vec<Vec<Option<usize>>>) {
        let root = self.find(base);
        let mut order: Vec<usize> = Vec::new();
        let mut index: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = VecDeque::new();
        index.insert(root, 0);
        order.push(root);
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for li in 0..self.rank.get() {
                if let Some(t) = self.next[v][li] {
                    let t = self.find(t);
                    if !index.contains_key(&t) {
                        index.insert(t, order.len());
                        order.push(t);
                        queue.push_back(t);
                    }
                }
            }
        }
        let mut table = vec![vec![None; self.rank.get()]; order.len()];
        for (new_v, &old_v) in order.iter().enumerate() {
            for li in 0..self.rank.get() {
                if let Some(t) = self.next[old_v][li] {
                    let t = self.find(t);
                    table[new_v][li] = Some(index[&t]);
                }
            }
        }
        (0, table)
    }
}

impl CoreGraph {
    /// Builds the folded core of `<gens>`: a wedge of cycles (one per
    /// generator of infinite order) and lollipops (one per involution,
    /// ending in a loop), folded to closure.
    pub fn from_generators(rank: Rank, gens: &[Word]) -> Result<CoreGraph, Error> {
        let mut folder = Folder::new(rank);
        let base = folder.vertex();
        let mut kept: Vec<Word> = Vec::new();
        for g in gens {
            assert_eq!(g.rank(), rank, "rank mismatch in core construction");
            if g.is_empty() {
                return Err(Error::EmptyGenerator);
            }
            kept.push(g.clone());
            match g.as_involution() {
                Some(inv) => {
                    let mut v = base;
                    for &l in inv.conjugator().letters() {
                        let w = folder.vertex();
                        folder.insert(v, l, w);
                        v = w;
                    }
                    folder.insert(v, inv.letter(), v);
                }
                None => {
                    let letters = g.letters();
                    let mut v = base;
                    for (idx, &l) in letters.iter().enumerate() {
                        let w = if idx + 1 == letters.len() { base } else { folder.vertex() };
                        folder.insert(v, l, w);
                        v = folder.find(w);
                    }
                }
            }
        }
        let (new_base, table) = folder.compact(base);
        Ok(CoreGraph { rank, base: new_base, next: table, gens: kept })
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn vertex_count(&self) -> usize {
        self.next.len()
    }

    pub fn generators(&self) -> &[Word] {
        &self.gens
    }

    pub fn transition(&self, v: usize, letter: u8) -> Option<usize> {
        self.next[v][(letter - 1) as usize]
    }

    pub fn is_trivial(&self) -> bool {
        self.next.len() == 1 && self.next[0].iter().all(|t| t.is_none())
    }

    /// Deterministic trace of a reduced word from the base vertex; membership
    /// holds exactly when the trace is defined throughout and closes up.
    pub fn member(&self, w: &Word) -> bool {
        assert_eq!(self.rank, w.rank(), "rank mismatch in membership test");
        let mut v = self.base;
        for &l in w.letters() {
            match self.transition(v, l) {
                Some(t) => v = t,
                None => return false,
            }
        }
        v == self.base
    }

    pub fn contains_subgroup(&self, other: &CoreGraph) -> bool {
        other.gens.iter().all(|g| self.member(g))
    }

    pub fn equal_subgroups(&self, other: &CoreGraph) -> bool {
        self.contains_subgroup(other) && other.contains_subgroup(self)
    }

    /// Shortest path word from the base to `v`.
    pub fn path_to(&self, v: usize) -> Word {
        let mut prev: Vec<Option<(usize, u8)>> = vec![None; self.next.len()];
        let mut seen = vec![false; self.next.len()];
        let mut queue = VecDeque::new();
        seen[self.base] = true;
        queue.push_back(self.base);
        while let Some(u) = queue.pop_front() {
            if u == v {
                break;
            }
            for l in self.rank.letters() {
                if let Some(t) = self.transition(u, l) {
                    if !seen[t] {
                        seen[t] = true;
                        prev[t] = Some((u, l));
                        queue.push_back(t);
                    }
                }
            }
        }
        let mut letters = Vec::new();
        let mut cur = v;
        while let Some((u, l)) = prev[cur] {
            letters.push(l);
            cur = u;
        }
        letters.reverse();
        Word::reduce(self.rank, &letters).expect("path letters are in range")
    }

    /// All `(vertex, letter)` loop slots, in vertex order.
    pub fn loops(&self) -> Vec<(usize, u8)> {
        let mut out = Vec::new();
        for v in 0..self.next.len() {
            for l in self.rank.letters() {
                if self.transition(v, l) == Some(v) {
                    out.push((v, l));
                }
            }
        }
        out
    }

    /// Kurosh signature `(k, r)`: the subgroup is isomorphic to the free
    /// product of `k` copies of `Z/2` and a free group of rank `r`.
    pub fn kurosh_signature(&self) -> (usize, usize) {
        let loops = self.loops().len();
        let mut non_loop_half_edges = 0usize;
        for v in 0..self.next.len() {
            for l in self.rank.letters() {
                if let Some(t) = self.transition(v, l) {
                    if t != v {
                        non_loop_half_edges += 1;
                    }
                }
            }
        }
        let edges = non_loop_half_edges / 2;
        let betti = edges + 1 - self.next.len();
        (loops, betti)
    }

    /// The conjugacy classes (as letters, with multiplicity) of the order-two
    /// pieces of the subgroup: letters of the loops of the cyclic core.
    pub fn covered_classes(&self) -> Vec<u8> {
        let mut letters: Vec<u8> = self.loops().iter().map(|&(_, l)| l).collect();
        letters.sort_unstable();
        letters
    }

    /// A deterministic generating set read off the graph: one involution per
    /// loop and one cycle word per non-tree edge of a breadth-first spanning
    /// tree.
    pub fn canonical_generators(&self) -> Vec<Word> {
        let mut parent_edge: Vec<Option<(usize, u8)>> = vec![None; self.next.len()];
        let mut seen = vec![false; self.next.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        seen[self.base] = true;
        queue.push_back(self.base);
        let mut tree: HashSet<(usize, u8, usize)> = HashSet::new();
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for l in self.rank.letters() {
                if let Some(t) = self.transition(u, l) {
                    if !seen[t] {
                        seen[t] = true;
                        parent_edge[t] = Some((u, l));
                        tree.insert((u.min(t), l, u.max(t)));
                        queue.push_back(t);
                    }
                }
            }
        }
        let path = |mut v: usize| -> Vec<u8> {
            let mut letters = Vec::new();
            while let Some((u, l)) = parent_edge[v] {
                letters.push(l);
                v = u;
            }
            letters.reverse();
            letters
        };
        let mut out = Vec::new();
        for v in &order {
            for l in self.rank.letters() {
                match self.transition(*v, l) {
                    Some(t) if t == *v => {
                        let mut letters = path(*v);
                        letters.push(l);
                        let back: Vec<u8> = path(*v).into_iter().rev().collect();
                        letters.extend(back);
                        out.push(Word::reduce(self.rank, &letters).unwrap());
                    }
                    Some(t) => {
                        let key = ((*v).min(t), l, (*v).max(t));
                        if !tree.contains(&key) && *v <= t {
                            let mut letters = path(*v);
                            letters.push(l);
                            let back: Vec<u8> = path(t).into_iter().rev().collect();
                            letters.extend(back);
                            let word = Word::reduce(self.rank, &letters).unwrap();
                            if !word.is_empty() {
                                out.push(word);
                            }
                        }
                    }
                    None => {}
                }
            }
        }
        out
    }

    /// Vertices surviving iterated pruning of loop-free valence-one vertices
    /// (the basepoint-free cyclic core; the base gets no special treatment).
    fn cyclic_vertices(&self) -> Vec<bool> {
        let mut alive = vec![true; self.next.len()];
        loop {
            let mut pruned = false;
            for v in 0..self.next.len() {
                if !alive[v] {
                    continue;
                }
                let mut slots = 0;
                let mut has_loop = false;
                for l in self.rank.letters() {
                    match self.transition(v, l) {
                        Some(t) if t == v => has_loop = true,
                        Some(t) if alive[t] => slots += 1,
                        _ => {}
                    }
                }
                if !has_loop && slots <= 1 {
                    alive[v] = false;
                    pruned = true;
                }
            }
            if !pruned {
                return alive;
            }
        }
    }

    fn bfs_code_from(&self, start: usize, alive: &[bool]) -> Vec<u16> {
        let mut index: BTreeMap<usize, u16> = BTreeMap::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        index.insert(start, 0);
        order.push(start);
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for l in self.rank.letters() {
                if let Some(t) = self.transition(v, l) {
                    if alive[t] && !index.contains_key(&t) {
                        index.insert(t, order.len() as u16);
                        order.push(t);
                        queue.push_back(t);
                    }
                }
            }
        }
        let mut code = Vec::with_capacity(order.len() * self.rank.get() + 1);
        code.push(order.len() as u16);
        for &v in &order {
            for l in self.rank.letters() {
                match self.transition(v, l) {
                    Some(t) if alive[t] => code.push(index[&t] + 1),
                    _ => code.push(0),
                }
            }
        }
        code
    }

    /// Canonical code of the cyclic core: the minimum over start vertices of
    /// the breadth-first encoding. Two subgroups are conjugate exactly when
    /// their codes agree.
    pub fn canonical_code(&self) -> Vec<u16> {
        let alive = self.cyclic_vertices();
        let mut best: Option<Vec<u16>> = None;
        for v in 0..self.next.len() {
            if !alive[v] {
                continue;
            }
            let code = self.bfs_code_from(v, &alive);
            if best.as_ref().map_or(true, |b| code < *b) {
                best = Some(code);
            }
        }
        best.unwrap_or_else(|| vec![0])
    }

    fn canonical_order(&self) -> Option<(Vec<u16>, Vec<usize>)> {
        let alive = self.cyclic_vertices();
        let mut best: Option<(Vec<u16>, usize)> = None;
        for v in 0..self.next.len() {
            if !alive[v] {
                continue;
            }
            let code = self.bfs_code_from(v, &alive);
            if best.as_ref().map_or(true, |(b, _)| code < *b) {
                best = Some((code, v));
            }
        }
        let (code, start) = best?;
        // rebuild the BFS order from the minimizing start
        let mut order = Vec::new();
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start);
        order.push(start);
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for l in self.rank.letters() {
                if let Some(t) = self.transition(v, l) {
                    if alive[t] && seen.insert(t) {
                        order.push(t);
                        queue.push_back(t);
                    }
                }
            }
        }
        Some((code, order))
    }

    /// First cyclic-core vertex reached from the base (the entry of the hair
    /// path), together with the path word leading there.
    fn core_entry(&self) -> Option<(usize, Word)> {
        let alive = self.cyclic_vertices();
        if !alive.iter().any(|&a| a) {
            return None;
        }
        let mut prev: Vec<Option<(usize, u8)>> = vec![None; self.next.len()];
        let mut seen = vec![false; self.next.len()];
        let mut queue = VecDeque::new();
        seen[self.base] = true;
        queue.push_back(self.base);
        let mut entry = None;
        while let Some(u) = queue.pop_front() {
            if alive[u] {
                entry = Some(u);
                break;
            }
            for l in self.rank.letters() {
                if let Some(t) = self.transition(u, l) {
                    if !seen[t] {
                        seen[t] = true;
                        prev[t] = Some((u, l));
                        queue.push_back(t);
                    }
                }
            }
        }
        let entry = entry?;
        let mut letters = Vec::new();
        let mut cur = entry;
        while let Some((u, l)) = prev[cur] {
            letters.push(l);
            cur = u;
        }
        letters.reverse();
        Some((entry, Word::reduce(self.rank, &letters).unwrap()))
    }

    /// Finds `g` with `g · t · g^{-1}` in the subgroup: a loop with the
    /// class letter of `t` must exist, and the witness is assembled from its
    /// base path.
    pub fn conjugate_into(&self, t: &Involution) -> Option<Word> {
        assert_eq!(self.rank, t.rank(), "rank mismatch");
        let j = t.letter();
        for (v, l) in self.loops() {
            if l == j {
                let p = self.path_to(v);
                let witness = p.mul(&t.conjugator().inverse());
                debug_assert!(self.member(&t.word().conjugated_by(&witness)));
                return Some(witness);
            }
        }
        None
    }

    /// Finds `g` with `g · self · g^{-1} = other`, comparing basepoint-free
    /// cyclic cores by canonical code and transporting base paths.
    pub fn conjugate_subgroups(&self, other: &CoreGraph) -> Option<Word> {
        assert_eq!(self.rank, other.rank, "rank mismatch");
        if self.is_trivial() && other.is_trivial() {
            return Some(Word::identity(self.rank));
        }
        let (code_a, order_a) = self.canonical_order()?;
        let (code_b, order_b) = other.canonical_order()?;
        if code_a != code_b {
            return None;
        }
        let (entry_a, hair_a) = self.core_entry()?;
        let (entry_b, hair_b) = other.core_entry()?;
        // position of self's entry vertex in canonical order, transported to
        // the matching vertex of other's cyclic core
        let pos = order_a.iter().position(|&v| v == entry_a)?;
        let twin = order_b[pos];
        // path from other's entry to the twin inside other's graph
        let mut prev: Vec<Option<(usize, u8)>> = vec![None; other.next.len()];
        let mut seen = vec![false; other.next.len()];
        let mut queue = VecDeque::new();
        seen[entry_b] = true;
        queue.push_back(entry_b);
        while let Some(u) = queue.pop_front() {
            for l in other.rank.letters() {
                if let Some(t) = other.transition(u, l) {
                    if !seen[t] {
                        seen[t] = true;
                        prev[t] = Some((u, l));
                        queue.push_back(t);
                    }
                }
            }
        }
        let mut letters = Vec::new();
        let mut cur = twin;
        while let Some((u, l)) = prev[cur] {
            letters.push(l);
            cur = u;
        }
        letters.reverse();
        let bridge = Word::reduce(self.rank, &letters).ok()?;
        let witness = hair_b.mul(&bridge).mul(&hair_a.inverse());
        // verify both inclusions before answering
        let ok = self
            .gens
            .iter()
            .all(|g| other.member(&g.conjugated_by(&witness)))
            && other
                .gens
                .iter()
                .all(|g| self.member(&g.conjugated_by(&witness.inverse())));
        if ok {
            Some(witness)
        } else {
            None
        }
    }

    /// Finds `g` with `g · self · g^{-1}` contained in `other`: searches for
    /// a label-preserving graph morphism of the cyclic core of `self` into
    /// `other` and verifies the resulting witness.
    pub fn conjugate_into_subgroup(&self, other: &CoreGraph) -> Option<Word> {
        assert_eq!(self.rank, other.rank, "rank mismatch");
        if self.is_trivial() {
            return Some(Word::identity(self.rank));
        }
        let alive = self.cyclic_vertices();
        let (entry_a, hair_a) = self.core_entry()?;
        for target in 0..other.next.len() {
            // deterministic extension: both graphs are folded, so the image
            // of one vertex forces the rest
            let mut map: BTreeMap<usize, usize> = BTreeMap::new();
            map.insert(entry_a, target);
            let mut queue = VecDeque::new();
            queue.push_back(entry_a);
            let mut ok = true;
            while let Some(v) = queue.pop_front() {
                let img = map[&v];
                for l in self.rank.letters() {
                    if let Some(t) = self.transition(v, l) {
                        if !alive[t] {
                            continue;
                        }
                        match other.transition(img, l) {
                            Some(timg) => match map.get(&t) {
                                Some(&existing) => {
                                    if existing != timg {
                                        ok = false;
                                        break;
                                    }
                                }
                                None => {
                                    map.insert(t, timg);
                                    queue.push_back(t);
                                }
                            },
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                }
                if !ok {
                    break;
                }
            }
            if !ok {
                continue;
            }
            let witness = other.path_to(target).mul(&hair_a.inverse());
            if self.gens.iter().all(|g| other.member(&g.conjugated_by(&witness))) {
                return Some(witness);
            }
        }
        None
    }

    /// Core of the intersection, based at the pair of base vertices: the
    /// reachable part of the product table, pruned of hair.
    pub fn intersect(&self, other: &CoreGraph) -> CoreGraph {
        assert_eq!(self.rank, other.rank, "rank mismatch in intersection");
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut verts: Vec<(usize, usize)> = Vec::new();
        let mut queue = VecDeque::new();
        index.insert((self.base, other.base), 0);
        verts.push((self.base, other.base));
        queue.push_back((self.base, other.base));
        while let Some((a, b)) = queue.pop_front() {
            for l in self.rank.letters() {
                if let (Some(ta), Some(tb)) = (self.transition(a, l), other.transition(b, l)) {
                    if !index.contains_key(&(ta, tb)) {
                        index.insert((ta, tb), verts.len());
                        verts.push((ta, tb));
                        queue.push_back((ta, tb));
                    }
                }
            }
        }
        let mut table: Vec<Vec<Option<usize>>> = vec![vec![None; self.rank.get()]; verts.len()];
        for (i, &(a, b)) in verts.iter().enumerate() {
            for l in self.rank.letters() {
                if let (Some(ta), Some(tb)) = (self.transition(a, l), other.transition(b, l)) {
                    table[i][(l - 1) as usize] = index.get(&(ta, tb)).copied();
                }
            }
        }
        // prune non-base hair: valence-one vertices without loops
        let mut alive = vec![true; verts.len()];
        loop {
            let mut pruned = false;
            for v in 0..verts.len() {
                if !alive[v] || v == 0 {
                    continue;
                }
                let mut slots = 0;
                let mut has_loop = false;
                for li in 0..self.rank.get() {
                    match table[v][li] {
                        Some(t) if t == v => has_loop = true,
                        Some(t) if alive[t] => slots += 1,
                        _ => {}
                    }
                }
                if !has_loop && slots <= 1 {
                    alive[v] = false;
                    pruned = true;
                }
            }
            if !pruned {
                break;
            }
        }
        let mut graph = CoreGraph {
            rank: self.rank,
            base: 0,
            next: {
                let mut compacted = Vec::new();
                let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
                for v in 0..verts.len() {
                    if alive[v] {
                        remap.insert(v, compacted.len());
                        compacted.push(v);
                    }
                }
                let mut out = vec![vec![None; self.rank.get()]; compacted.len()];
                for (nv, &ov) in compacted.iter().enumerate() {
                    for li in 0..self.rank.get() {
                        if let Some(t) = table[ov][li] {
                            if alive[t] {
                                out[nv][li] = Some(remap[&t]);
                            }
                        }
                    }
                }
                out
            },
            gens: Vec::new(),
        };
        graph.gens = graph.canonical_generators();
        graph
    }

    /// DOT rendering: letters as edge labels, loops as self-edges, base
    /// double-circled.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph core {\n");
        for v in 0..self.next.len() {
            if v == self.base {
                out.push_str(&format!("  v{v} [shape=doublecircle];\n"));
            } else {
                out.push_str(&format!("  v{v} [shape=circle];\n"));
            }
        }
        for v in 0..self.next.len() {
            for l in self.rank.letters() {
                if let Some(t) = self.transition(v, l) {
                    if t > v || (t == v) {
                        out.push_str(&format!("  v{v} -- v{t} [label=\"{l}\"];\n"));
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }

    /// JSON adjacency table keyed `"v:i" -> w`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut adj = serde_json::Map::new();
        for v in 0..self.next.len() {
            for l in self.rank.letters() {
                if let Some(t) = self.transition(v, l) {
                    adj.insert(format!("{v}:{l}"), serde_json::json!(t));
                }
            }
        }
        serde_json::json!({
            "rank": self.rank.get(),
            "base": self.base,
            "vertices": self.next.len(),
            "adjacency": adj,
        })
    }
}

/// Conjugacy class of a finitely generated subgroup, keyed by the canonical
/// code of its cyclic core. Representative generators are carried along for
/// later constructions but take no part in equality or ordering.
#[derive(Clone)]
pub struct FreeFactorClass {
    rank: Rank,
    code: Vec<u16>,
    signature: (usize, usize),
    covered: Vec<u8>,
    rep: Vec<Word>,
}

impl PartialEq for FreeFactorClass {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.code == other.code
    }
}
impl Eq for FreeFactorClass {}

impl PartialOrd for FreeFactorClass {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FreeFactorClass {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.rank, &self.code).cmp(&(other.rank, &other.code))
    }
}
impl std::hash::Hash for FreeFactorClass {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rank.hash(state);
        self.code.hash(state);
    }
}

impl fmt::Debug for FreeFactorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ffc[{}]", self.code_string())
    }
}

impl FreeFactorClass {
    pub fn of_generators(rank: Rank, gens: &[Word]) -> Result<FreeFactorClass, Error> {
        let core = CoreGraph::from_generators(rank, gens)?;
        Ok(Self::of_core(&core))
    }

    pub fn of_core(core: &CoreGraph) -> FreeFactorClass {
        FreeFactorClass {
            rank: core.rank(),
            code: core.canonical_code(),
            signature: core.kurosh_signature(),
            covered: core.covered_classes(),
            rep: core.generators().to_vec(),
        }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn code(&self) -> &[u16] {
        &self.code
    }

    pub fn code_string(&self) -> String {
        self.code.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(".")
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    /// Class letters covered by the subgroup, with multiplicity.
    pub fn covered(&self) -> &[u8] {
        &self.covered
    }

    pub fn representative(&self) -> &[Word] {
        &self.rep
    }

    pub fn representative_core(&self) -> CoreGraph {
        CoreGraph::from_generators(self.rank, &self.rep).expect("representative is valid")
    }

    /// True for classes of the shape that occurs as a one-edge splitting
    /// side: `n-1` order-two pieces, no free part, all classes but one.
    pub fn is_corank_one(&self) -> bool {
        let n = self.rank.get();
        self.signature == (n - 1, 0) && {
            let distinct: BTreeSet<u8> = self.covered.iter().copied().collect();
            distinct.len() == n - 1
        }
    }

    /// The unique class letter not covered, for corank-one classes.
    pub fn missing_class(&self) -> Option<u8> {
        if !self.is_corank_one() {
            return None;
        }
        let covered: BTreeSet<u8> = self.covered.iter().copied().collect();
        self.rank.letters().find(|l| !covered.contains(l))
    }

    pub fn apply(&self, f: &Automorphism) -> FreeFactorClass {
        let gens: Vec<Word> = self.rep.iter().map(|g| f.apply(g)).collect();
        FreeFactorClass::of_generators(self.rank, &gens).expect("images of valid generators")
    }
}

/// Outcome of the bounded Whitehead search for free-factor status.
#[derive(Clone, Debug)]
pub enum FreeFactor {
    /// The witness maps the subgroup onto the standard factor generated by
    /// the covered class letters.
    Yes(Automorphism),
    /// Search closed on a minimal form that is not a standard factor.
    No { explored: usize },
    /// Budget exhausted before the plateau closed.
    Inconclusive { depth_budget: usize, explored: usize },
}

impl FreeFactor {
    pub fn is_yes(&self) -> bool {
        matches!(self, FreeFactor::Yes(_))
    }
}

pub const DEFAULT_WHITEHEAD_DEPTH: usize = 6;
const PLATEAU_STATE_CAP: usize = 4000;

pub(crate) fn partial_conj_moves(rank: Rank) -> Vec<GeneratorMove> {
    let n = rank.get();
    let mut moves = Vec::new();
    for by in rank.letters() {
        let others: Vec<u8> = rank.letters().filter(|&l| l != by).collect();
        // nonempty subsets of the other letters
        for mask in 1u64..(1u64 << (n - 1)) {
            let set: BTreeSet<u8> = others
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &l)| l)
                .collect();
            moves.push(GeneratorMove::partial_conj(set, by).expect("valid move"));
        }
    }
    moves
}

pub(crate) fn tuple_key(gens: &[Word]) -> Vec<u8> {
    let mut key = Vec::new();
    for g in gens {
        key.extend_from_slice(g.letters());
        key.push(0);
    }
    key
}

fn core_size(rank: Rank, gens: &[Word]) -> Result<(usize, usize), Error> {
    let core = CoreGraph::from_generators(rank, gens)?;
    let alive = core.cyclic_vertices();
    let vertices = alive.iter().filter(|&&a| a).count();
    let mut slots = 0usize;
    for v in 0..core.vertex_count() {
        if !alive[v] {
            continue;
        }
        for l in rank.letters() {
            if let Some(t) = core.transition(v, l) {
                if alive[t] {
                    slots += 1;
                }
            }
        }
    }
    Ok((vertices, slots))
}

fn class_key(rank: Rank, gens: &[Word]) -> Vec<u16> {
    CoreGraph::from_generators(rank, gens).expect("valid generators").canonical_code()
}

/// Greedy Whitehead descent on the cyclic core size, with a bounded
/// breadth-first plateau search to escape level sets. Returns the moves
/// applied (first applied first) and the final generator tuple.
pub(crate) fn whitehead_descend(
    rank: Rank,
    gens: &[Word],
    score: &dyn Fn(&[Word]) -> (usize, usize),
    key: &dyn Fn(&[Word]) -> Vec<u8>,
    depth_budget: usize,
) -> (Vec<GeneratorMove>, Vec<Word>, bool, usize) {
    let moves = partial_conj_moves(rank);
    let apply = |m: &GeneratorMove, gs: &[Word]| -> Vec<Word> {
        gs.iter().map(|g| m.apply_word(g)).collect()
    };
    let mut current = gens.to_vec();
    let mut trace: Vec<GeneratorMove> = Vec::new();
    let mut explored = 0usize;
    loop {
        let cur_score = score(&current);
        let mut best: Option<(GeneratorMove, Vec<Word>, (usize, usize))> = None;
        for m in &moves {
            let cand = apply(m, &current);
            let s = score(&cand);
            explored += 1;
            if s < cur_score && best.as_ref().map_or(true, |(_, _, bs)| s < *bs) {
                best = Some((m.clone(), cand, s));
            }
        }
        if let Some((m, cand, _)) = best {
            trace.push(m);
            current = cand;
            continue;
        }
        // plateau: breadth-first over equal-score states looking for a drop
        let mut visited: HashSet<Vec<u8>> = HashSet::new();
        visited.insert(key(&current));
        let mut frontier: VecDeque<(Vec<Word>, Vec<GeneratorMove>)> = VecDeque::new();
        frontier.push_back((current.clone(), Vec::new()));
        let mut jump: Option<(Vec<Word>, Vec<GeneratorMove>, GeneratorMove)> = None;
        let mut truncated = false;
        'plateau: while let Some((state, path)) = frontier.pop_front() {
            if path.len() >= depth_budget {
                truncated = true;
                continue;
            }
            for m in &moves {
                let cand = apply(m, &state);
                let s = score(&cand);
                explored += 1;
                if s < cur_score {
                    jump = Some((cand, path.clone(), m.clone()));
                    break 'plateau;
                }
                if s == cur_score {
                    let k = key(&cand);
                    if !visited.contains(&k) {
                        if visited.len() >= PLATEAU_STATE_CAP {
                            truncated = true;
                            continue;
                        }
                        visited.insert(k);
                        let mut next_path = path.clone();
                        next_path.push(m.clone());
                        frontier.push_back((cand, next_path));
                    }
                }
            }
        }
        match jump {
            Some((state, path, last)) => {
                trace.extend(path);
                trace.push(last);
                current = state;
            }
            None => {
                return (trace, current, !truncated, explored);
            }
        }
    }
}

/// Decides whether the subgroup is a free factor of `W_n`, by greedy descent
/// on the cyclic core over all partial-conjugation moves. `Yes` carries an
/// automorphism carrying the subgroup onto the standard factor spanned by
/// its class letters.
pub fn is_free_factor(core: &CoreGraph, depth_budget: usize) -> Result<FreeFactor, Error> {
    let (k, r) = core.kurosh_signature();
    if r > 0 {
        return Err(Error::FreePart { rank: r });
    }
    let rank = core.rank();
    if k == 0 {
        return Ok(FreeFactor::Yes(Automorphism::identity(rank)));
    }
    let gens = core.canonical_generators();
    let score = |gs: &[Word]| core_size(rank, gs).expect("valid generators");
    let key = |gs: &[Word]| {
        class_key(rank, gs).iter().flat_map(|c| c.to_le_bytes()).collect::<Vec<u8>>()
    };
    let (trace, final_gens, complete, explored) =
        whitehead_descend(rank, &gens, &score, &key, depth_budget);
    let final_core = CoreGraph::from_generators(rank, &final_gens)?;
    let alive = final_core.cyclic_vertices();
    let cyclic_count = alive.iter().filter(|&&a| a).count();
    // one surviving vertex means the cyclic part is a rose of loops
    if cyclic_count == 1 {
        // strip the hair: conjugate the standard rose back onto the base
        let v = (0..final_core.vertex_count()).find(|&v| alive[v]).unwrap();
        let hair = final_core.path_to(v);
        let mut moves_rev = trace.clone();
        moves_rev.reverse();
        let descent = Automorphism::from_moves(rank, moves_rev)?;
        let witness = Automorphism::inner(&hair.inverse()).compose(&descent);
        Ok(FreeFactor::Yes(witness))
    } else if complete {
        Ok(FreeFactor::No { explored })
    } else {
        Ok(FreeFactor::Inconclusive { depth_budget, explored })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coset::{CosetTable, Membership};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rk(n: usize) -> Rank {
        Rank::new(n).unwrap()
    }

    fn w(n: usize, letters: &[u8]) -> Word {
        Word::reduce(rk(n), letters).unwrap()
    }

    fn core(n: usize, gens: &[&[u8]]) -> CoreGraph {
        let words: Vec<Word> = gens.iter().map(|g| w(n, g)).collect();
        CoreGraph::from_generators(rk(n), &words).unwrap()
    }

    fn random_reduced(rng: &mut impl Rng, rank: Rank, len: usize) -> Word {
        let n = rank.get() as u8;
        let mut letters: Vec<u8> = Vec::with_capacity(len);
        for _ in 0..len {
            loop {
                let l = rng.gen_range(1..=n);
                if letters.last() != Some(&l) {
                    letters.push(l);
                    break;
                }
            }
        }
        Word::reduce(rank, &letters).unwrap()
    }

    #[test]
    fn wedge_of_standard_generators() {
        let c = core(3, &[&[1], &[2]]);
        assert_eq!(c.vertex_count(), 1);
        assert_eq!(c.transition(0, 1), Some(0));
        assert_eq!(c.transition(0, 2), Some(0));
        assert_eq!(c.transition(0, 3), None);
    }

    #[test]
    fn lollipop_core() {
        // <x_1, x_2 x_1 x_2> in W_2: 1-loop at base, 2-edge to v, 1-loop at v
        let c = core(2, &[&[1], &[2, 1, 2]]);
        assert_eq!(c.vertex_count(), 2);
        assert_eq!(c.transition(0, 1), Some(0));
        assert_eq!(c.transition(0, 2), Some(1));
        assert_eq!(c.transition(1, 1), Some(1));
        assert!(c.member(&w(2, &[1, 2, 1, 2])));
        assert!(!c.member(&w(2, &[2])));
        assert_eq!(c.kurosh_signature(), (2, 0));
    }

    #[test]
    fn membership_examples() {
        let c = core(3, &[&[1], &[2]]);
        assert!(!c.member(&w(3, &[3])));
        assert!(c.member(&w(3, &[1, 2, 1])));
    }

    #[test]
    fn empty_generator_rejected() {
        assert!(matches!(
            CoreGraph::from_generators(rk(3), &[Word::identity(rk(3))]),
            Err(Error::EmptyGenerator)
        ));
    }

    #[test]
    fn generator_order_is_irrelevant() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let n = rng.gen_range(2..=5usize);
            let count = rng.gen_range(1..=4usize);
            let mut gens: Vec<Word> = Vec::new();
            for _ in 0..count {
                let len = rng.gen_range(1..=7);
                let g = random_reduced(&mut rng, rk(n), len);
                if !g.is_empty() {
                    gens.push(g);
                }
            }
            if gens.is_empty() {
                continue;
            }
            let a = CoreGraph::from_generators(rk(n), &gens).unwrap();
            let mut shuffled = gens.clone();
            shuffled.shuffle(&mut rng);
            let b = CoreGraph::from_generators(rk(n), &shuffled).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn membership_agrees_with_coset_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut checked = 0usize;
        for _ in 0..300 {
            let n = rng.gen_range(2..=5usize);
            let count = rng.gen_range(1..=3usize);
            let gens: Vec<Word> = (0..count)
                .map(|_| { let len = rng.gen_range(1..=6); random_reduced(&mut rng, rk(n), len) })
                .filter(|g| !g.is_empty())
                .collect();
            if gens.is_empty() {
                continue;
            }
            let core = CoreGraph::from_generators(rk(n), &gens).unwrap();
            let table = CosetTable::enumerate(rk(n), &gens, 12, 40_000);
            for _ in 0..10 {
                let len = rng.gen_range(0..=10);
                let probe = random_reduced(&mut rng, rk(n), len);
                match table.trace(&probe) {
                    Membership::Inside => {
                        checked += 1;
                        assert!(core.member(&probe), "oracle says inside: {probe}");
                    }
                    Membership::Outside => {
                        checked += 1;
                        assert!(!core.member(&probe), "oracle says outside: {probe}");
                    }
                    Membership::Unknown => {}
                }
            }
        }
        assert!(checked > 2000, "oracle region too small: {checked}");
    }

    #[test]
    fn kurosh_signatures() {
        assert_eq!(core(4, &[&[1], &[2], &[3]]).kurosh_signature(), (3, 0));
        assert_eq!(core(2, &[&[1, 2]]).kurosh_signature(), (0, 1));
        assert_eq!(core(2, &[&[1], &[2, 1, 2]]).kurosh_signature(), (2, 0));
    }

    #[test]
    fn intersection_examples() {
        let a = core(5, &[&[2], &[3], &[4], &[5]]);
        let b = core(5, &[&[1], &[3], &[4], &[5]]);
        let both = a.intersect(&b);
        let expected = core(5, &[&[3], &[4], &[5]]);
        assert!(both.equal_subgroups(&expected));
        // self intersection
        assert!(a.intersect(&a).equal_subgroups(&a));
        // disjoint factors meet trivially
        let t = core(3, &[&[1]]).intersect(&core(3, &[&[2]]));
        assert!(t.is_trivial());
    }

    #[test]
    fn intersection_membership_cross_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = core(5, &[&[2], &[3], &[4], &[5]]);
        let b = core(5, &[&[1], &[3], &[4], &[5]]);
        let both = a.intersect(&b);
        for _ in 0..500 {
            let len = rng.gen_range(0..=8);
            let probe = random_reduced(&mut rng, rk(5), len);
            assert_eq!(both.member(&probe), a.member(&probe) && b.member(&probe));
        }
    }

    #[test]
    fn conjugate_into_involution() {
        let a = core(5, &[&[2], &[3], &[4], &[5]]);
        let t = w(5, &[3, 1, 3]).as_involution().unwrap();
        assert!(a.conjugate_into(&t).is_none());
        let s = w(5, &[1, 3, 1]).as_involution().unwrap();
        let g = a.conjugate_into(&s).unwrap();
        assert!(a.member(&s.word().conjugated_by(&g)));
    }

    #[test]
    fn conjugate_subgroups_examples() {
        let a = core(5, &[&[2], &[3], &[4], &[5]]);
        let twisted = core(5, &[&[2], &[1, 3, 1], &[4], &[5]]);
        assert!(a.conjugate_subgroups(&twisted).is_none());

        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..200 {
            let n = rng.gen_range(3..=5usize);
            let gens: Vec<Word> = (0..rng.gen_range(1..=3))
                .map(|_| { let len = rng.gen_range(1..=5); random_reduced(&mut rng, rk(n), len) })
                .collect();
            let len = rng.gen_range(0..=5);
            let g = random_reduced(&mut rng, rk(n), len);
            let conj: Vec<Word> = gens.iter().map(|x| x.conjugated_by(&g)).collect();
            let left = CoreGraph::from_generators(rk(n), &gens).unwrap();
            let right = CoreGraph::from_generators(rk(n), &conj).unwrap();
            let witness = left.conjugate_subgroups(&right).expect("conjugates detected");
            for x in &gens {
                assert!(right.member(&x.conjugated_by(&witness)));
            }
        }
    }

    #[test]
    fn free_factor_examples() {
        let std3 = core(4, &[&[1], &[2], &[3]]);
        assert!(matches!(
            is_free_factor(&std3, DEFAULT_WHITEHEAD_DEPTH).unwrap(),
            FreeFactor::Yes(_)
        ));

        // index-two subgroup of W_2 is not a free factor
        let proper = core(2, &[&[1], &[2, 1, 2]]);
        assert!(matches!(
            is_free_factor(&proper, DEFAULT_WHITEHEAD_DEPTH).unwrap(),
            FreeFactor::No { .. }
        ));

        // image of <x_1,x_3,x_4,x_5> under the conjugation x_1 -> (23)1(32)
        let moved = core(5, &[&[2, 3, 1, 3, 2], &[3], &[4], &[5]]);
        match is_free_factor(&moved, DEFAULT_WHITEHEAD_DEPTH).unwrap() {
            FreeFactor::Yes(phi) => {
                let std = core(5, &[&[1], &[3], &[4], &[5]]);
                for g in moved.generators() {
                    assert!(std.member(&phi.apply(g)));
                }
                assert!(phi.moves().len() <= 2, "short move word expected");
            }
            other => panic!("expected a positive verdict, got {other:?}"),
        }

        // free part is rejected
        let cyclic = core(2, &[&[1, 2]]);
        assert!(matches!(
            is_free_factor(&cyclic, DEFAULT_WHITEHEAD_DEPTH),
            Err(Error::FreePart { rank: 1 })
        ));
    }

    #[test]
    fn free_factor_witness_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..50 {
            let n = rng.gen_range(4..=5usize);
            // random automorphic image of a standard factor
            let mut letters: Vec<u8> = (1..=n as u8).collect();
            letters.shuffle(&mut rng);
            let take = rng.gen_range(2..n);
            let chosen = &letters[..take];
            let f = crate::aut::tests_support::random_automorphism(&mut rng, rk(n), 4);
            let gens: Vec<Word> = chosen
                .iter()
                .map(|&l| f.apply(&Word::generator(rk(n), l).unwrap()))
                .collect();
            let moved = CoreGraph::from_generators(rk(n), &gens).unwrap();
            match is_free_factor(&moved, DEFAULT_WHITEHEAD_DEPTH).unwrap() {
                FreeFactor::Yes(phi) => {
                    let std_gens: Vec<Word> = moved
                        .covered_classes()
                        .iter()
                        .map(|&l| Word::generator(rk(n), l).unwrap())
                        .collect();
                    let std = CoreGraph::from_generators(rk(n), &std_gens).unwrap();
                    let image: Vec<Word> = gens.iter().map(|g| phi.apply(g)).collect();
                    let image_core = CoreGraph::from_generators(rk(n), &image).unwrap();
                    assert!(std.equal_subgroups(&image_core));
                }
                other => panic!("image of a standard factor must be detected: {other:?}"),
            }
        }
    }
}
