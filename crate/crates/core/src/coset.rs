//! Truncated coset enumeration for subgroups of `W_n`, used as an
//! independent membership oracle.
//!
//! The presentation only has the relators `x_i^2`, so the transition by each
//! generator is a partial involution on cosets and every table entry is set
//! symmetrically. Subgroup generators are scanned at the trivial coset until
//! the table closes; afterwards the table is completed breadth-first out to
//! a depth bound. Tracing a word then answers membership definitively inside
//! the enumerated region and `Unknown` outside it.

use std::collections::VecDeque;

use crate::word::{Rank, Word};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Membership {
    Inside,
    Outside,
    Unknown,
}

#[derive(Debug)]
pub struct CosetTable {
    rank: Rank,
    next: Vec<Vec<Option<usize>>>,
    parent: Vec<usize>,
    depth_bound: usize,
    truncated: bool,
}

impl CosetTable {
    /// Enumerates cosets of `<gens>` in `W_n`: first closes the subgroup
    /// generator scans at the base coset, then defines new cosets
    /// breadth-first up to `depth` letters from the base (subject to
    /// `max_cosets`).
    pub fn enumerate(rank: Rank, gens: &[Word], depth: usize, max_cosets: usize) -> CosetTable {
        let mut table = CosetTable {
            rank,
            next: vec![vec![None; rank.get()]],
            parent: vec![0],
            depth_bound: depth,
            truncated: false,
        };
        // Scan the subgroup generators until a full pass makes no change.
        loop {
            let before = (table.parent.len(), table.defined_entries());
            for g in gens {
                table.scan(g, max_cosets);
            }
            let after = (table.parent.len(), table.defined_entries());
            if before == after {
                break;
            }
        }
        table.complete_bfs(depth, max_cosets);
        table
    }

    pub fn coset_count(&self) -> usize {
        (0..self.parent.len()).filter(|&c| self.parent[c] == c).count()
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn depth_bound(&self) -> usize {
        self.depth_bound
    }

    /// Traces `w` from the base coset. `Unknown` means the trace left the
    /// enumerated region; the other two answers are definitive.
    pub fn trace(&self, w: &Word) -> Membership {
        assert_eq!(self.rank, w.rank(), "rank mismatch in coset trace");
        let mut c = self.find_const(0);
        for &l in w.letters() {
            match self.next[c][(l - 1) as usize] {
                Some(d) => c = self.find_const(d),
                None => return Membership::Unknown,
            }
        }
        if c == self.find_const(0) {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }

    fn defined_entries(&self) -> usize {
        self.next.iter().map(|row| row.iter().filter(|e| e.is_some()).count()).sum()
    }

    fn find(&mut self, c: usize) -> usize {
        if self.parent[c] == c {
            c
        } else {
            let root = self.find(self.parent[c]);
            self.parent[c] = root;
            root
        }
    }

    fn find_const(&self, mut c: usize) -> usize {
        while self.parent[c] != c {
            c = self.parent[c];
        }
        c
    }

    fn new_coset(&mut self) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.next.push(vec![None; self.rank.get()]);
        id
    }

    /// Installs the involutive transition `c -l- d`, merging cosets on
    /// conflicts.
    fn set(&mut self, c: usize, l: u8, d: usize) {
        let mut pending = VecDeque::new();
        pending.push_back((c, l, d));
        while let Some((c, l, d)) = pending.pop_front() {
            let c = self.find(c);
            let d = self.find(d);
            let li = (l - 1) as usize;
            let from_c = self.next[c][li].map(|t| self.find(t));
            let from_d = self.next[d][li].map(|t| self.find(t));
            match (from_c, from_d) {
                (None, None) => {
                    self.next[c][li] = Some(d);
                    self.next[d][li] = Some(c);
                }
                (Some(a), None) => {
                    if a == d {
                        self.next[d][li] = Some(c);
                    } else {
                        self.merge(a, d, &mut pending);
                        pending.push_back((c, l, d));
                    }
                }
                (None, Some(b)) => {
                    if b == c {
                        self.next[c][li] = Some(d);
                    } else {
                        self.merge(b, c, &mut pending);
                        pending.push_back((c, l, d));
                    }
                }
                (Some(a), Some(b)) => {
                    if a != d {
                        self.merge(a, d, &mut pending);
                        pending.push_back((c, l, d));
                    } else if b != c {
                        self.merge(b, c, &mut pending);
                        pending.push_back((c, l, d));
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
                pending.push_back((root, (li + 1) as u8, t));
                self.next[loser][li] = None;
            }
        }
    }

    /// Scans one subgroup generator at the base coset, filling the gap in
    /// the middle and forcing closure.
    fn scan(&mut self, g: &Word, max_cosets: usize) {
        let letters = g.letters().to_vec();
        let mut i = 0usize;
        let mut c = self.find(0);
        while i < letters.len() {
            match self.next[c][(letters[i] - 1) as usize] {
                Some(d) => {
                    c = self.find(d);
                    i += 1;
                }
                None => break,
            }
        }
        if i == letters.len() {
            // fully traced: the generator must close at the base coset
            let base = self.find(0);
            if c != base {
                let mut pending = VecDeque::new();
                self.merge(c, base, &mut pending);
                while let Some((u, l, v)) = pending.pop_front() {
                    self.set(u, l, v);
                }
            }
            return;
        }
        let mut j = letters.len();
        let mut b = self.find(0);
        while j > i {
            match self.next[b][(letters[j - 1] - 1) as usize] {
                Some(d) => {
                    b = self.find(d);
                    j -= 1;
                }
                None => break,
            }
        }
        if i == j {
            let mut pending = VecDeque::new();
            self.merge(c, b, &mut pending);
            while let Some((u, l, v)) = pending.pop_front() {
                self.set(u, l, v);
            }
        } else if j == i + 1 {
            self.set(c, letters[i], b);
        } else {
            // fill the open gap with fresh cosets
            if self.parent.len() + (j - i) > max_cosets {
                self.truncated = true;
                return;
            }
            let mut cur = c;
            for k in i..j - 1 {
                let fresh = self.new_coset();
                self.set(cur, letters[k], fresh);
                cur = self.find(fresh);
            }
            self.set(cur, letters[j - 1], b);
        }
    }

    fn complete_bfs(&mut self, depth: usize, max_cosets: usize) {
        let mut dist = vec![usize::MAX; self.parent.len()];
        let base = self.find(0);
        dist[base] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(base);
        while let Some(c) = queue.pop_front() {
            let c = self.find(c);
            let dc = dist[c];
            if dc >= depth {
                continue;
            }
            for li in 0..self.rank.get() {
                match self.next[c][li] {
                    Some(t) => {
                        let t = self.find(t);
                        if dist.get(t).copied().unwrap_or(usize::MAX) == usize::MAX {
                            dist[t] = dc + 1;
                            queue.push_back(t);
                        }
                    }
                    None => {
                        if self.parent.len() >= max_cosets {
                            self.truncated = true;
                            continue;
                        }
                        let fresh = self.new_coset();
                        self.next[c][li] = Some(fresh);
                        self.next[fresh][li] = Some(c);
                        dist.push(dc + 1);
                        queue.push_back(fresh);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rk(n: usize) -> Rank {
        Rank::new(n).unwrap()
    }

    fn w(n: usize, letters: &[u8]) -> Word {
        Word::reduce(rk(n), letters).unwrap()
    }

    #[test]
    fn index_two_subgroup() {
        // <x_1, x_2 x_1 x_2> has index 2 in W_2
        let gens = vec![w(2, &[1]), w(2, &[2, 1, 2])];
        let table = CosetTable::enumerate(rk(2), &gens, 8, 1000);
        assert_eq!(table.trace(&w(2, &[1])), Membership::Inside);
        assert_eq!(table.trace(&w(2, &[1, 2, 1, 2])), Membership::Inside);
        assert_eq!(table.trace(&w(2, &[2])), Membership::Outside);
        assert_eq!(table.coset_count(), 2);
    }

    #[test]
    fn standard_factor() {
        let gens = vec![w(3, &[1]), w(3, &[2])];
        let table = CosetTable::enumerate(rk(3), &gens, 4, 10_000);
        assert_eq!(table.trace(&w(3, &[3])), Membership::Outside);
        assert_eq!(table.trace(&w(3, &[1, 2, 1])), Membership::Inside);
        let deep = w(3, &[3, 1, 3, 1, 3, 1, 3]);
        assert_eq!(table.trace(&deep), Membership::Unknown);
    }

    #[test]
    fn whole_group() {
        // <x_1, x_1 x_2 x_1> = W_2: the scans collapse everything onto the
        // base coset.
        let gens = vec![w(2, &[1]), w(2, &[1, 2, 1])];
        let table = CosetTable::enumerate(rk(2), &gens, 6, 1000);
        assert_eq!(table.trace(&w(2, &[2])), Membership::Inside);
        assert_eq!(table.coset_count(), 1);
    }

    #[test]
    fn dihedral_index_three() {
        // Two reflections at distance 3/2 in the infinite dihedral group
        // generate an index-3 subgroup.
        let gens = vec![w(2, &[1]), w(2, &[2, 1, 2, 1, 2])];
        let table = CosetTable::enumerate(rk(2), &gens, 12, 1000);
        assert_eq!(table.trace(&w(2, &[2])), Membership::Outside);
        assert_eq!(table.trace(&w(2, &[1, 2, 1, 2, 1])), Membership::Outside);
        assert_eq!(table.coset_count(), 3);
    }
}
