//! Finite posets and meet-semilattices.
//!
//! Elements are dense integer ids local to each poset.  Order queries are
//! answered from precomputed reachability bitsets, so everything downstream
//! can treat `x <= y` as O(1).

use crate::bits::BitSet;
use thiserror::Error;

pub type Elem = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PosetError {
    #[error("cover relation has a cycle")]
    Cyclic,
    #[error("unknown element id {0}")]
    UnknownElement(Elem),
    #[error("elements {0} and {1} are not comparable as required")]
    NotComparable(Elem, Elem),
    #[error("poset is not ranked: cover ({0}, {1}) skips a rank")]
    NotRanked(Elem, Elem),
    #[error("no unique minimum element")]
    NoBottom,
    #[error("elements {0} and {1} have no unique maximal lower bound")]
    NoMeet(Elem, Elem),
}

/// A finite poset on elements `0..n`, stored as reachability bitsets.
#[derive(Clone, Debug)]
pub struct FinitePoset {
    n: usize,
    /// `up[x]` = all y with y >= x (including x).
    up: Vec<BitSet>,
    /// `down[x]` = all y with y <= x (including x).
    down: Vec<BitSet>,
    covers: Vec<(Elem, Elem)>,
    rank: Option<Vec<usize>>,
}

impl FinitePoset {
    /// Build from a cover (or any generating) relation `lower < upper`.
    pub fn from_relations(n: usize, rels: &[(Elem, Elem)]) -> Result<Self, PosetError> {
        let mut up = vec![BitSet::new(n); n];
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in rels {
            if a >= n || b >= n {
                return Err(PosetError::UnknownElement(a.max(b)));
            }
            adj[a].push(b);
        }
        // Topological order; also detects cycles.
        let order = topo_order(n, &adj).ok_or(PosetError::Cyclic)?;
        for &x in order.iter().rev() {
            up[x].insert(x);
            let mut acc = up[x].clone();
            for &y in &adj[x] {
                acc.union_with(&up[y]);
            }
            up[x] = acc;
        }
        let mut down = vec![BitSet::new(n); n];
        for x in 0..n {
            for y in up[x].iter() {
                down[y].insert(x);
            }
        }
        let mut p = FinitePoset {
            n,
            up,
            down,
            covers: Vec::new(),
            rank: None,
        };
        p.covers = p.compute_covers();
        p.rank = p.compute_rank();
        Ok(p)
    }

    /// Build directly from reflexive-transitive up-sets.
    pub fn from_up_sets(up: Vec<BitSet>) -> Result<Self, PosetError> {
        let n = up.len();
        for x in 0..n {
            if !up[x].contains(x) {
                return Err(PosetError::UnknownElement(x));
            }
            for y in up[x].iter() {
                if y != x && up[y].contains(x) {
                    return Err(PosetError::Cyclic);
                }
                if !up[y].subset_of(&up[x]) {
                    return Err(PosetError::Cyclic); // not transitive
                }
            }
        }
        let mut down = vec![BitSet::new(n); n];
        for x in 0..n {
            for y in up[x].iter() {
                down[y].insert(x);
            }
        }
        let mut p = FinitePoset {
            n,
            up,
            down,
            covers: Vec::new(),
            rank: None,
        };
        p.covers = p.compute_covers();
        p.rank = p.compute_rank();
        Ok(p)
    }

    fn compute_covers(&self) -> Vec<(Elem, Elem)> {
        let mut covers = Vec::new();
        for x in 0..self.n {
            for y in self.up[x].iter() {
                if y == x {
                    continue;
                }
                // y covers x iff nothing sits strictly between.
                let mut between = self.up[x].clone();
                between.intersect_with(&self.down[y]);
                if between.count() == 2 {
                    covers.push((x, y));
                }
            }
        }
        covers.sort_unstable();
        covers
    }

    /// Longest-chain rank from the minimal elements, when every cover
    /// increases it by exactly one; `None` otherwise.
    fn compute_rank(&self) -> Option<Vec<usize>> {
        let mut rank = vec![0usize; self.n];
        let mut lower = vec![Vec::new(); self.n];
        for &(a, b) in &self.covers {
            lower[b].push(a);
        }
        let mut order: Vec<Elem> = (0..self.n).collect();
        order.sort_by_key(|&x| self.down[x].count());
        for &x in &order {
            rank[x] = lower[x].iter().map(|&w| rank[w] + 1).max().unwrap_or(0);
        }
        for &(a, b) in &self.covers {
            if rank[b] != rank[a] + 1 {
                return None;
            }
        }
        Some(rank)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn le(&self, x: Elem, y: Elem) -> bool {
        self.up[x].contains(y)
    }

    pub fn lt(&self, x: Elem, y: Elem) -> bool {
        x != y && self.le(x, y)
    }

    pub fn up_set(&self, x: Elem) -> &BitSet {
        &self.up[x]
    }

    pub fn down_set(&self, x: Elem) -> &BitSet {
        &self.down[x]
    }

    pub fn covers(&self) -> &[(Elem, Elem)] {
        &self.covers
    }

    /// Elements covering x (upper covers).
    pub fn covers_up(&self, x: Elem) -> impl Iterator<Item = Elem> + '_ {
        self.covers
            .iter()
            .filter(move |&&(a, _)| a == x)
            .map(|&(_, b)| b)
    }

    /// Elements covered by x (lower covers).
    pub fn covers_of(&self, x: Elem) -> impl Iterator<Item = Elem> + '_ {
        self.covers
            .iter()
            .filter(move |&&(_, b)| b == x)
            .map(|&(a, _)| a)
    }

    pub fn is_ranked(&self) -> bool {
        self.rank.is_some()
    }

    pub fn rank(&self, x: Elem) -> usize {
        self.rank.as_ref().expect("poset is not ranked")[x]
    }

    pub fn rank_opt(&self) -> Option<&[usize]> {
        self.rank.as_deref()
    }

    /// Number of elements of each rank, from rank 0 up.
    pub fn rank_profile(&self) -> Vec<usize> {
        let rank = self.rank.as_ref().expect("poset is not ranked");
        let top = rank.iter().copied().max().unwrap_or(0);
        let mut profile = vec![0usize; top + 1];
        for &r in rank {
            profile[r] += 1;
        }
        profile
    }

    pub fn maximal_elements(&self) -> Vec<Elem> {
        (0..self.n).filter(|&x| self.up[x].count() == 1).collect()
    }

    pub fn minimal_elements(&self) -> Vec<Elem> {
        (0..self.n).filter(|&x| self.down[x].count() == 1).collect()
    }

    /// The induced subposet on `{z : x <= z <= y}`, with ranks shifted so
    /// `x` gets rank 0.  Also returns the map from new ids to old ids.
    pub fn interval(&self, x: Elem, y: Elem) -> Result<(FinitePoset, Vec<Elem>), PosetError> {
        if !self.le(x, y) {
            return Err(PosetError::NotComparable(x, y));
        }
        let mut members = self.up[x].clone();
        members.intersect_with(&self.down[y]);
        let old_ids: Vec<Elem> = members.iter().collect();
        self.induced(&old_ids).map(|p| (p, old_ids))
    }

    /// Induced subposet on the given (sorted, distinct) old ids.
    pub fn induced(&self, old_ids: &[Elem]) -> Result<FinitePoset, PosetError> {
        let mut idx = vec![usize::MAX; self.n];
        for (i, &o) in old_ids.iter().enumerate() {
            idx[o] = i;
        }
        let mut rels = Vec::new();
        for (i, &a) in old_ids.iter().enumerate() {
            for b in self.up[a].iter() {
                if b != a && idx[b] != usize::MAX {
                    rels.push((i, idx[b]));
                }
            }
        }
        FinitePoset::from_relations(old_ids.len(), &rels)
    }

    /// All strictly increasing `(p+1)`-tuples, in lexicographic order on ids.
    pub fn chains(&self, p: usize) -> Vec<Vec<Elem>> {
        let mut result = Vec::new();
        let mut stack: Vec<Elem> = Vec::new();
        self.chains_rec(p + 1, &mut stack, &mut result);
        result
    }

    fn chains_rec(&self, target: usize, stack: &mut Vec<Elem>, out: &mut Vec<Vec<Elem>>) {
        if stack.len() == target {
            out.push(stack.clone());
            return;
        }
        let lo = stack.last().copied();
        for x in 0..self.n {
            if let Some(l) = lo {
                if !self.lt(l, x) {
                    continue;
                }
            }
            stack.push(x);
            self.chains_rec(target, stack, out);
            stack.pop();
        }
    }
}

fn topo_order(n: usize, adj: &[Vec<Elem>]) -> Option<Vec<Elem>> {
    let mut indeg = vec![0usize; n];
    for xs in adj {
        for &y in xs {
            indeg[y] += 1;
        }
    }
    let mut queue: Vec<Elem> = (0..n).filter(|&x| indeg[x] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(x) = queue.pop() {
        order.push(x);
        for &y in &adj[x] {
            indeg[y] -= 1;
            if indeg[y] == 0 {
                queue.push(y);
            }
        }
    }
    if order.len() == n {
        Some(order)
    } else {
        None
    }
}

/// A finite meet-semilattice: a poset with a minimum in which every pair of
/// elements has a unique maximal lower bound.
#[derive(Clone, Debug)]
pub struct MeetSemilattice {
    poset: FinitePoset,
    bottom: Elem,
}

impl MeetSemilattice {
    pub fn new(poset: FinitePoset) -> Result<Self, PosetError> {
        let mins = poset.minimal_elements();
        if mins.len() != 1 {
            return Err(PosetError::NoBottom);
        }
        let sl = MeetSemilattice {
            bottom: mins[0],
            poset,
        };
        Ok(sl)
    }

    /// Check the meet-semilattice property pair by pair.  Quadratic; meant
    /// for fixture-sized inputs and debug assertions.
    pub fn validate(&self) -> Result<(), PosetError> {
        let n = self.poset.n;
        for x in 0..n {
            for y in x + 1..n {
                let mut common = self.poset.down[x].clone();
                common.intersect_with(&self.poset.down[y]);
                let maximal: Vec<Elem> = common
                    .iter()
                    .filter(|&z| common.iter().all(|w| w == z || !self.poset.lt(z, w)))
                    .collect();
                if maximal.len() != 1 {
                    return Err(PosetError::NoMeet(x, y));
                }
            }
        }
        Ok(())
    }

    pub fn poset(&self) -> &FinitePoset {
        &self.poset
    }

    pub fn bottom(&self) -> Elem {
        self.bottom
    }

    pub fn len(&self) -> usize {
        self.poset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poset.is_empty()
    }

    pub fn le(&self, x: Elem, y: Elem) -> bool {
        self.poset.le(x, y)
    }

    pub fn rank(&self, x: Elem) -> usize {
        self.poset.rank(x)
    }

    pub fn atoms(&self) -> Vec<Elem> {
        (0..self.len()).filter(|&x| self.poset.rank(x) == 1).collect()
    }

    /// The unique least upper bound of `S`, if `S` has any upper bound.
    /// The empty join is the bottom element.
    pub fn join_of(&self, s: &[Elem]) -> Result<Option<Elem>, PosetError> {
        for &x in s {
            if x >= self.len() {
                return Err(PosetError::UnknownElement(x));
            }
        }
        if s.is_empty() {
            return Ok(Some(self.bottom));
        }
        let mut ub = self.poset.up[s[0]].clone();
        for &x in &s[1..] {
            ub.intersect_with(&self.poset.up[x]);
        }
        let mut min = None;
        for z in ub.iter() {
            if ub.iter().all(|w| w == z || !self.poset.lt(w, z)) {
                if min.is_some() {
                    // Two distinct minimal upper bounds: no least one.  In a
                    // meet-semilattice this cannot happen for nonempty ub.
                    return Ok(None);
                }
                min = Some(z);
            }
        }
        Ok(min)
    }

    pub fn join2(&self, x: Elem, y: Elem) -> Option<Elem> {
        self.join_of(&[x, y]).expect("valid ids")
    }

    /// The unique maximal lower bound.
    pub fn meet(&self, x: Elem, y: Elem) -> Elem {
        let mut common = self.poset.down[x].clone();
        common.intersect_with(&self.poset.down[y]);
        let mut best = self.bottom;
        for z in common.iter() {
            if self.poset.le(best, z) {
                best = z;
            }
        }
        best
    }

    /// Rank of the interval `[x, y]`.
    pub fn dist(&self, x: Elem, y: Elem) -> usize {
        debug_assert!(self.le(x, y));
        self.rank(y) - self.rank(x)
    }
}

/// True iff `p` is a geometric lattice: a lattice, atomic, and semimodular.
pub fn is_geometric_lattice(p: &FinitePoset) -> bool {
    if !p.is_ranked() {
        return false;
    }
    if p.minimal_elements().len() != 1 || p.maximal_elements().len() != 1 {
        return false;
    }
    let sl = match MeetSemilattice::new(p.clone()) {
        Ok(sl) => sl,
        Err(_) => return false,
    };
    if sl.validate().is_err() {
        return false;
    }
    let n = p.len();
    // A lattice: every pair has a join.
    let mut join = vec![vec![0usize; n]; n];
    for x in 0..n {
        for y in 0..n {
            match sl.join2(x, y) {
                Some(j) => join[x][y] = j,
                None => return false,
            }
        }
    }
    // Atomic: every element is the join of the atoms below it.
    let atoms: Vec<Elem> = (0..n).filter(|&x| p.rank(x) == 1).collect();
    for x in 0..n {
        let below: Vec<Elem> = atoms.iter().copied().filter(|&a| p.le(a, x)).collect();
        match sl.join_of(&below).expect("ids valid") {
            Some(j) if j == x => {}
            _ => return false,
        }
    }
    // Semimodular: rank(x) + rank(y) >= rank(x v y) + rank(x ^ y).
    for x in 0..n {
        for y in 0..n {
            let m = sl.meet(x, y);
            if p.rank(x) + p.rank(y) < p.rank(join[x][y]) + p.rank(m) {
                return false;
            }
        }
    }
    true
}
