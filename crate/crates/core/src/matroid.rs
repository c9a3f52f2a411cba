//! Matroids from circuits, their lattices of flats, irreducible elements,
//! and (combinatorial) building sets.
//!
//! Ground sets are capped at 64 elements so subsets fit in a `u64`.

use crate::poset::{is_geometric_lattice, Elem, FinitePoset, MeetSemilattice, PosetError};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatroidError {
    #[error("ground set larger than 64 elements is not supported")]
    GroundTooLarge,
    #[error("loop present: element {0:?} forms a one-element circuit")]
    LoopPresent(String),
    #[error("parallel pair: elements {0:?} and {1:?} form a two-element circuit")]
    ParallelPair(String, String),
    #[error("circuit axiom violation: {0}")]
    CircuitAxiomViolation(String),
    #[error("unknown ground element {0:?}")]
    UnknownElement(String),
    #[error("poset error: {0}")]
    Poset(#[from] PosetError),
}

/// A simple matroid presented by its set of circuits.
#[derive(Clone, Debug)]
pub struct Matroid {
    ground: Vec<String>,
    /// Circuits as bitmasks over ground indices; an inclusion antichain.
    circuits: Vec<u64>,
}

impl Matroid {
    pub fn from_circuits<S: AsRef<str>>(
        ground: &[S],
        circuits: &[Vec<S>],
    ) -> Result<Self, MatroidError> {
        if ground.len() > 64 {
            return Err(MatroidError::GroundTooLarge);
        }
        let names: Vec<String> = ground.iter().map(|s| s.as_ref().to_string()).collect();
        let index: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut masks = Vec::new();
        for c in circuits {
            let mut m = 0u64;
            for e in c {
                let i = *index
                    .get(e.as_ref())
                    .ok_or_else(|| MatroidError::UnknownElement(e.as_ref().to_string()))?;
                m |= 1 << i;
            }
            masks.push(m);
        }
        Self::from_masks(names, masks)
    }

    fn from_masks(ground: Vec<String>, mut circuits: Vec<u64>) -> Result<Self, MatroidError> {
        circuits.sort_unstable();
        circuits.dedup();
        for &c in &circuits {
            match c.count_ones() {
                0 => {
                    return Err(MatroidError::CircuitAxiomViolation(
                        "empty circuit".into(),
                    ))
                }
                1 => {
                    let e = c.trailing_zeros() as usize;
                    return Err(MatroidError::LoopPresent(ground[e].clone()));
                }
                2 => {
                    let a = c.trailing_zeros() as usize;
                    let b = (63 - c.leading_zeros()) as usize;
                    return Err(MatroidError::ParallelPair(
                        ground[a].clone(),
                        ground[b].clone(),
                    ));
                }
                _ => {}
            }
        }
        // Antichain under inclusion.
        for (i, &a) in circuits.iter().enumerate() {
            for &b in &circuits[i + 1..] {
                if a & !b == 0 || b & !a == 0 {
                    return Err(MatroidError::CircuitAxiomViolation(format!(
                        "circuit {} contains circuit {}",
                        mask_names(&ground, a.max(b)),
                        mask_names(&ground, a.min(b)),
                    )));
                }
            }
        }
        // Circuit elimination: for C1 != C2 and e in their intersection,
        // (C1 u C2) - e contains a circuit.
        for (i, &c1) in circuits.iter().enumerate() {
            for &c2 in &circuits[i + 1..] {
                let common = c1 & c2;
                if common == 0 {
                    continue;
                }
                let mut rem = common;
                while rem != 0 {
                    let e = rem.trailing_zeros();
                    rem &= rem - 1;
                    let u = (c1 | c2) & !(1u64 << e);
                    if !circuits.iter().any(|&c3| c3 & !u == 0) {
                        return Err(MatroidError::CircuitAxiomViolation(format!(
                            "elimination fails for {} and {} at {:?}",
                            mask_names(&ground, c1),
                            mask_names(&ground, c2),
                            ground[e as usize],
                        )));
                    }
                }
            }
        }
        Ok(Matroid { ground, circuits })
    }

    /// The cycle matroid of a simple graph on vertices `0..n`.
    pub fn from_graph(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self, MatroidError> {
        let mut names = Vec::new();
        let mut seen = HashSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(MatroidError::LoopPresent(format!("{}-{}", u, v)));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(MatroidError::ParallelPair(
                    format!("{}-{}", key.0, key.1),
                    format!("{}-{}", key.0, key.1),
                ));
            }
            names.push(format!("{}-{}", key.0, key.1));
        }
        let edge_index: HashMap<(usize, usize), usize> = edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| ((u.min(v), u.max(v)), i))
            .collect();
        // Every simple cycle of the graph, as an edge set.
        let mut circuits = Vec::new();
        let verts: Vec<usize> = (0..n_vertices).collect();
        for subset in 1u64..(1 << n_vertices.min(63)) {
            let vs: Vec<usize> = verts
                .iter()
                .copied()
                .filter(|&v| subset >> v & 1 == 1)
                .collect();
            if vs.len() < 3 {
                continue;
            }
            // cycles through exactly vs: fix vs[0], permute the rest
            let rest = &vs[1..];
            let mut perm: Vec<usize> = rest.to_vec();
            permutations(&mut perm, 0, &mut |p| {
                // avoid reflections: require p[0] < p[last]
                if p[0] > *p.last().unwrap() {
                    return;
                }
                let cycle: Vec<usize> = std::iter::once(vs[0])
                    .chain(p.iter().copied())
                    .collect();
                let mut mask = 0u64;
                for i in 0..cycle.len() {
                    let u = cycle[i];
                    let v = cycle[(i + 1) % cycle.len()];
                    match edge_index.get(&(u.min(v), u.max(v))) {
                        Some(&e) => mask |= 1 << e,
                        None => return,
                    }
                }
                circuits.push(mask);
            });
        }
        Self::from_masks(names, circuits)
    }

    /// A matroid presented by its bases: circuits are derived brute-force.
    pub fn from_bases<S: AsRef<str>>(
        ground: &[S],
        bases: &[Vec<S>],
    ) -> Result<Self, MatroidError> {
        if ground.len() > 20 {
            return Err(MatroidError::GroundTooLarge);
        }
        let names: Vec<String> = ground.iter().map(|s| s.as_ref().to_string()).collect();
        let index: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut basis_masks = Vec::new();
        for b in bases {
            let mut m = 0u64;
            for e in b {
                let i = *index
                    .get(e.as_ref())
                    .ok_or_else(|| MatroidError::UnknownElement(e.as_ref().to_string()))?;
                m |= 1 << i;
            }
            basis_masks.push(m);
        }
        let n = names.len();
        let independent =
            |s: u64| basis_masks.iter().any(|&b| s & !b == 0);
        let mut circuits = Vec::new();
        for s in 1u64..(1 << n) {
            if independent(s) {
                continue;
            }
            let mut minimal = true;
            let mut rem = s;
            while rem != 0 {
                let e = rem.trailing_zeros();
                rem &= rem - 1;
                if !independent(s & !(1u64 << e)) {
                    minimal = false;
                    break;
                }
            }
            if minimal {
                circuits.push(s);
            }
        }
        Self::from_masks(names, circuits)
    }

    pub fn ground(&self) -> &[String] {
        &self.ground
    }

    pub fn circuits(&self) -> &[u64] {
        &self.circuits
    }

    pub fn is_independent(&self, s: u64) -> bool {
        !self.circuits.iter().any(|&c| c & !s == 0)
    }

    /// Matroid rank of a subset, by greedy extension.
    pub fn rank(&self, s: u64) -> usize {
        let mut indep = 0u64;
        let mut rem = s;
        while rem != 0 {
            let e = rem.trailing_zeros();
            rem &= rem - 1;
            let cand = indep | 1 << e;
            if self.is_independent(cand) {
                indep = cand;
            }
        }
        indep.count_ones() as usize
    }

    pub fn closure(&self, s: u64) -> u64 {
        // greedy basis of s, then test each outside element against it
        let mut basis = 0u64;
        let mut rem = s;
        while rem != 0 {
            let e = rem.trailing_zeros();
            rem &= rem - 1;
            if self.is_independent(basis | 1 << e) {
                basis |= 1 << e;
            }
        }
        let mut cl = s;
        for e in 0..self.ground.len() {
            if cl >> e & 1 == 1 {
                continue;
            }
            if !self.is_independent(basis | 1 << e) {
                cl |= 1 << e;
            }
        }
        cl
    }

    /// The lattice of flats.
    pub fn lattice_of_flats(&self) -> Result<GeometricLattice, MatroidError> {
        let n = self.ground.len();
        let mut flats: Vec<Vec<u64>> = vec![vec![self.closure(0)]];
        debug_assert_eq!(flats[0][0], 0, "simple matroid has empty bottom flat");
        loop {
            let last = flats.last().unwrap();
            let mut next = HashSet::new();
            for &f in last {
                for e in 0..n {
                    if f >> e & 1 == 0 {
                        next.insert(self.closure(f | 1 << e));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            let mut next: Vec<u64> = next.into_iter().collect();
            next.sort_unstable();
            flats.push(next);
        }
        let mut all: Vec<u64> = Vec::new();
        for level in &flats {
            all.extend_from_slice(level);
        }
        let index: HashMap<u64, usize> = all.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let mut rels = Vec::new();
        for (i, &a) in all.iter().enumerate() {
            for (j, &b) in all.iter().enumerate() {
                if i != j && a & !b == 0 {
                    rels.push((i, j));
                }
            }
        }
        let poset = FinitePoset::from_relations(all.len(), &rels)?;
        let sl = MeetSemilattice::new(poset)?;
        let atoms: Vec<Elem> = (0..n)
            .map(|e| *index.get(&(1u64 << e)).expect("atoms are flats"))
            .collect();
        // supp over atom indices: flats are already ground masks and atoms
        // biject with ground elements here.
        let supp = all.clone();
        let by_supp = index;
        Ok(GeometricLattice {
            top: sl.len() - 1,
            sl,
            atoms,
            atom_labels: self.ground.clone(),
            supp,
            by_supp,
        })
    }
}

fn permutations<F: FnMut(&[usize])>(v: &mut Vec<usize>, k: usize, f: &mut F) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

fn mask_names(ground: &[String], m: u64) -> String {
    let names: Vec<&str> = (0..ground.len())
        .filter(|&i| m >> i & 1 == 1)
        .map(|i| ground[i].as_str())
        .collect();
    format!("{{{}}}", names.join(","))
}

/// A geometric lattice with atoms labelled and every element identified by
/// its atom support.
#[derive(Clone, Debug)]
pub struct GeometricLattice {
    sl: MeetSemilattice,
    top: Elem,
    atoms: Vec<Elem>,
    atom_labels: Vec<String>,
    /// element -> bitmask over atom indices
    supp: Vec<u64>,
    by_supp: HashMap<u64, Elem>,
}

impl GeometricLattice {
    pub fn semilattice(&self) -> &MeetSemilattice {
        &self.sl
    }

    pub fn poset(&self) -> &FinitePoset {
        self.sl.poset()
    }

    pub fn len(&self) -> usize {
        self.sl.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sl.is_empty()
    }

    pub fn bottom(&self) -> Elem {
        self.sl.bottom()
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    pub fn rank(&self, x: Elem) -> usize {
        self.sl.rank(x)
    }

    pub fn top_rank(&self) -> usize {
        self.rank(self.top)
    }

    pub fn le(&self, x: Elem, y: Elem) -> bool {
        self.sl.le(x, y)
    }

    pub fn lt(&self, x: Elem, y: Elem) -> bool {
        self.sl.poset().lt(x, y)
    }

    /// Rank distance `d(x, y)` of a closed interval.
    pub fn dist(&self, x: Elem, y: Elem) -> usize {
        self.sl.dist(x, y)
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_elem(&self, atom_idx: usize) -> Elem {
        self.atoms[atom_idx]
    }

    pub fn atoms(&self) -> &[Elem] {
        &self.atoms
    }

    pub fn atom_labels(&self) -> &[String] {
        &self.atom_labels
    }

    pub fn supp(&self, x: Elem) -> u64 {
        self.supp[x]
    }

    pub fn elem_by_supp(&self, mask: u64) -> Option<Elem> {
        self.by_supp.get(&mask).copied()
    }

    /// Human-readable label: the atom labels of the support, joined.
    pub fn label(&self, x: Elem) -> String {
        if x == self.bottom() {
            return "0hat".into();
        }
        if x == self.top() {
            return "1hat".into();
        }
        let parts: Vec<&str> = (0..self.atoms.len())
            .filter(|&i| self.supp[x] >> i & 1 == 1)
            .map(|i| self.atom_labels[i].as_str())
            .collect();
        if parts.iter().all(|p| p.chars().count() == 1) {
            parts.concat()
        } else {
            parts.join("|")
        }
    }

    pub fn join_of(&self, s: &[Elem]) -> Option<Elem> {
        self.sl.join_of(s).expect("element ids are valid")
    }

    pub fn join2(&self, x: Elem, y: Elem) -> Elem {
        self.sl.join2(x, y).expect("lattice joins always exist")
    }

    pub fn meet(&self, x: Elem, y: Elem) -> Elem {
        self.sl.meet(x, y)
    }

    /// Join of a set of atoms given as an atom-index mask.
    pub fn join_atoms(&self, mask: u64) -> Elem {
        let s: Vec<Elem> = (0..self.atoms.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| self.atoms[i])
            .collect();
        self.join_of(&s).expect("lattice joins always exist")
    }

    /// Rank of the join of a set of atoms.
    pub fn rank_of_atom_set(&self, mask: u64) -> usize {
        self.rank(self.join_atoms(mask))
    }

    pub fn is_geometric(&self) -> bool {
        is_geometric_lattice(self.sl.poset())
    }

    /// The interval `[lo, hi]` as a geometric lattice in its own right.
    /// Atoms are the elements covering `lo`; the returned map sends new ids
    /// to old ids.
    pub fn interval_lattice(&self, lo: Elem, hi: Elem) -> (GeometricLattice, Vec<Elem>) {
        let (poset, old_ids) = self
            .sl
            .poset()
            .interval(lo, hi)
            .expect("interval endpoints comparable");
        let sl = MeetSemilattice::new(poset).expect("interval of a lattice");
        let atoms: Vec<Elem> = (0..sl.len()).filter(|&x| sl.rank(x) == 1).collect();
        assert!(atoms.len() <= 64, "interval has too many atoms");
        let atom_labels: Vec<String> = atoms.iter().map(|&a| self.label(old_ids[a])).collect();
        let mut supp = vec![0u64; sl.len()];
        for x in 0..sl.len() {
            for (i, &a) in atoms.iter().enumerate() {
                if sl.le(a, x) {
                    supp[x] |= 1 << i;
                }
            }
        }
        let by_supp = supp.iter().enumerate().map(|(x, &m)| (m, x)).collect();
        let top = sl
            .poset()
            .maximal_elements()
            .first()
            .copied()
            .expect("interval nonempty");
        (
            GeometricLattice {
                sl,
                top,
                atoms,
                atom_labels,
                supp,
                by_supp,
            },
            old_ids,
        )
    }

    /// Circuits of the underlying simple matroid `M(L)`: minimal dependent
    /// sets of atoms, as atom-index masks.
    pub fn circuits(&self) -> Vec<u64> {
        enumerate_circuits(self.atoms.len(), &|mask| Some(self.rank_of_atom_set(mask)))
    }

    /// Irreducible elements of `L_+`: those whose restriction matroid is
    /// connected.  Atoms are always irreducible.
    pub fn irreducibles(&self) -> Vec<Elem> {
        (1..self.len())
            .filter(|&x| x != self.bottom() && self.is_irreducible(x))
            .collect()
    }

    fn is_irreducible(&self, x: Elem) -> bool {
        let atoms_below: Vec<usize> = (0..self.atoms.len())
            .filter(|&i| self.supp[x] >> i & 1 == 1)
            .collect();
        if atoms_below.len() <= 1 {
            return true;
        }
        // Greedy basis of supp(x); connectivity of the fundamental-circuit
        // graph with respect to it equals matroid connectivity.
        let mut basis: Vec<usize> = Vec::new();
        let mut basis_mask = 0u64;
        for &a in &atoms_below {
            let cand = basis_mask | 1 << a;
            if self.rank_of_atom_set(cand) == basis.len() + 1 {
                basis.push(a);
                basis_mask = cand;
            }
        }
        if basis.len() != self.rank(x) {
            // cannot happen in a geometric lattice
            return false;
        }
        let mut uf = UnionFind::new(self.atoms.len());
        for &e in &atoms_below {
            if basis_mask >> e & 1 == 1 {
                continue;
            }
            // b lies in the fundamental circuit of e over the basis iff
            // basis - b + e still has full rank
            for &b in &basis {
                let without = (basis_mask & !(1u64 << b)) | 1 << e;
                if self.rank_of_atom_set(without) == basis.len() {
                    uf.union(e, b);
                }
            }
        }
        // all of supp(x) in one class?
        let root = uf.find(atoms_below[0]);
        atoms_below.iter().all(|&a| uf.find(a) == root)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Minimal dependent atom sets, where `rank_of(mask)` returns the rank of
/// the join when the join exists and `None` otherwise.  Works for locally
/// geometric semilattices as well as lattices.
pub fn enumerate_circuits(
    n_atoms: usize,
    rank_of: &dyn Fn(u64) -> Option<usize>,
) -> Vec<u64> {
    let mut circuits: HashSet<u64> = HashSet::new();
    let is_dependent = |mask: u64| -> Option<bool> {
        rank_of(mask).map(|r| r < mask.count_ones() as usize)
    };
    // DFS over independent sets, extending by larger atom indices.
    let mut stack: Vec<u64> = vec![0];
    while let Some(indep) = stack.pop() {
        let hi = if indep == 0 {
            0
        } else {
            64 - indep.leading_zeros() as usize
        };
        for a in 0..n_atoms {
            if indep >> a & 1 == 1 {
                continue;
            }
            let cand = indep | 1 << a;
            match is_dependent(cand) {
                None => continue, // no common upper bound
                Some(false) => {
                    if a >= hi {
                        stack.push(cand);
                    }
                }
                Some(true) => {
                    // unique circuit inside cand: minimalize
                    let mut c = cand;
                    loop {
                        let mut shrunk = false;
                        let mut rem = c;
                        while rem != 0 {
                            let e = rem.trailing_zeros();
                            rem &= rem - 1;
                            let smaller = c & !(1u64 << e);
                            if smaller != 0 && is_dependent(smaller) == Some(true) {
                                c = smaller;
                                shrunk = true;
                                break;
                            }
                        }
                        if !shrunk {
                            break;
                        }
                    }
                    circuits.insert(c);
                }
            }
        }
    }
    let mut out: Vec<u64> = circuits.into_iter().collect();
    out.sort_unstable();
    out
}

/// A building set for a geometric lattice (or any semilattice), with a fixed
/// reverse linear extension: `p >= q` implies `p` comes first.
#[derive(Clone, Debug)]
pub struct BuildingSet {
    /// Members in the order `prec`.
    pub members: Vec<Elem>,
}

impl BuildingSet {
    /// The minimal building set: all irreducibles.
    pub fn minimal(lat: &GeometricLattice) -> Self {
        Self::with_default_order(lat, lat.irreducibles())
    }

    /// The maximal building set: all of `L_+`.
    pub fn maximal(lat: &GeometricLattice) -> Self {
        let members: Vec<Elem> = (0..lat.len()).filter(|&x| x != lat.bottom()).collect();
        Self::with_default_order(lat, members)
    }

    /// Order members by descending rank, ties broken lexicographically on
    /// atom support.  This is always a reverse linear extension.
    pub fn with_default_order(lat: &GeometricLattice, mut members: Vec<Elem>) -> Self {
        members.sort_by_key(|&x| (std::cmp::Reverse(lat.rank(x)), lat.supp(x)));
        members.dedup();
        BuildingSet { members }
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.members.contains(&x)
    }

    /// Position in the `prec` order.
    pub fn position(&self, x: Elem) -> Option<usize> {
        self.members.iter().position(|&m| m == x)
    }

    /// `F(L, G; x)`: the maximal members of `G` below or equal to `x`.
    pub fn factors(&self, lat: &GeometricLattice, x: Elem) -> Vec<Elem> {
        assert!(x != lat.bottom(), "factors of the bottom are undefined");
        let below: Vec<Elem> = self
            .members
            .iter()
            .copied()
            .filter(|&g| lat.le(g, x))
            .collect();
        let mut maxs: Vec<Elem> = below
            .iter()
            .copied()
            .filter(|&g| below.iter().all(|&h| h == g || !lat.lt(g, h)))
            .collect();
        maxs.sort_unstable();
        maxs
    }

    /// Check the join-decomposition isomorphism for every `x` in `L_+`, and
    /// that the maximum is a member when the carrier has one.
    pub fn validate(&self, lat: &GeometricLattice) -> bool {
        if !self.contains(lat.top()) {
            return false;
        }
        // prec must be a reverse linear extension
        for (i, &p) in self.members.iter().enumerate() {
            for &q in &self.members[i + 1..] {
                if lat.lt(p, q) {
                    return false;
                }
            }
        }
        for x in 0..lat.len() {
            if x == lat.bottom() {
                continue;
            }
            let factors = self.factors(lat, x);
            if factors.is_empty() {
                return false;
            }
            if factors.len() == 1 {
                if factors[0] != x {
                    return false;
                }
                continue;
            }
            if !product_join_iso(lat, &factors, x) {
                return false;
            }
        }
        true
    }
}

/// Is the join map from the product of lower intervals of the factors to
/// `[bottom, x]` a poset isomorphism?
fn product_join_iso(lat: &GeometricLattice, factors: &[Elem], x: Elem) -> bool {
    let intervals: Vec<Vec<Elem>> = factors
        .iter()
        .map(|&f| lat.poset().down_set(f).iter().collect())
        .collect();
    let size: usize = intervals.iter().map(|iv| iv.len()).product();
    let target: Vec<Elem> = lat.poset().down_set(x).iter().collect();
    if size != target.len() {
        return false;
    }
    // enumerate tuples, record joins, check bijection
    let mut tuples: Vec<Vec<Elem>> = vec![Vec::new()];
    for iv in &intervals {
        let mut next = Vec::with_capacity(tuples.len() * iv.len());
        for t in &tuples {
            for &z in iv {
                let mut t2 = t.clone();
                t2.push(z);
                next.push(t2);
            }
        }
        tuples = next;
    }
    let mut joins = Vec::with_capacity(tuples.len());
    let mut seen = HashSet::new();
    for t in &tuples {
        match lat.join_of(t) {
            Some(j) => {
                if !lat.le(j, x) || !seen.insert(j) {
                    return false;
                }
                joins.push(j);
            }
            None => return false,
        }
    }
    // order preservation both ways
    for i in 0..tuples.len() {
        for j in 0..tuples.len() {
            let le_comp = tuples[i]
                .iter()
                .zip(&tuples[j])
                .all(|(&a, &b)| lat.le(a, b));
            let le_join = lat.le(joins[i], joins[j]);
            if le_comp != le_join {
                return false;
            }
        }
    }
    true
}

/// Fixtures shared across the crate for tests and the acceptance suite.
pub mod fixtures {
    use super::Matroid;

    /// Rank-3 matroid on `{1..5}` with two 3-element flats 124 and 135.
    pub fn m5() -> Matroid {
        Matroid::from_circuits(
            &["1", "2", "3", "4", "5"],
            &[
                vec!["1", "2", "4"],
                vec!["1", "3", "5"],
                vec!["2", "3", "4", "5"],
            ],
        )
        .expect("m5 is a matroid")
    }

    /// The uniform matroid U_{2,3}.
    pub fn u23() -> Matroid {
        Matroid::from_circuits(&["1", "2", "3"], &[vec!["1", "2", "3"]]).expect("u23")
    }

    /// The free matroid on three elements (Boolean lattice).
    pub fn boolean3() -> Matroid {
        Matroid::from_circuits(&["a", "b", "c"], &[]).expect("boolean3")
    }

    /// Graphic matroid of the complete graph on `n` vertices; its lattice of
    /// flats is the partition lattice.
    pub fn complete_graph(n: usize) -> Matroid {
        let mut edges = Vec::new();
        for u in 1..=n {
            for v in u + 1..=n {
                edges.push((u, v));
            }
        }
        Matroid::from_graph(n + 1, &edges).expect("complete graph")
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use std::collections::BTreeSet;

    /// Oracle: every flat is the closure of some subset; enumerate closures
    /// of all subsets directly.
    fn flats_by_closure(m: &Matroid) -> Vec<u64> {
        let n = m.ground().len();
        let mut flats = HashSet::new();
        for s in 0u64..(1 << n) {
            flats.insert(m.closure(s));
        }
        let mut v: Vec<u64> = flats.into_iter().collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn m5_lattice_profile() {
        let m = m5();
        let lat = m.lattice_of_flats().unwrap();
        // oracle: closures of all subsets
        let oracle = flats_by_closure(&m);
        assert_eq!(lat.len(), oracle.len());
        // frozen from the closure-enumeration oracle: 6 flats of rank 2
        assert_eq!(lat.poset().rank_profile(), vec![1, 5, 6, 1]);
        let mut rank2: Vec<String> = (0..lat.len())
            .filter(|&x| lat.rank(x) == 2)
            .map(|x| lat.label(x))
            .collect();
        rank2.sort();
        assert_eq!(rank2, vec!["124", "135", "23", "25", "34", "45"]);
        assert!(lat.is_geometric());
    }

    #[test]
    fn u23_lattice() {
        let lat = u23().lattice_of_flats().unwrap();
        assert_eq!(lat.poset().rank_profile(), vec![1, 3, 1]);
        assert!(lat.is_geometric());
    }

    #[test]
    fn k4_is_partition_lattice() {
        let lat = complete_graph(4).lattice_of_flats().unwrap();
        assert_eq!(lat.poset().rank_profile(), vec![1, 6, 7, 1]);
        assert!(lat.is_geometric());
        // oracle: number of partitions of 4 elements = Bell(4) = 15
        assert_eq!(lat.len(), 15);
    }

    #[test]
    fn k5_flat_count_is_bell5() {
        let lat = complete_graph(5).lattice_of_flats().unwrap();
        assert_eq!(lat.len(), 52);
    }

    #[test]
    fn loops_and_parallels_rejected() {
        assert!(matches!(
            Matroid::from_circuits(&["1"], &[vec!["1"]]),
            Err(MatroidError::LoopPresent(_))
        ));
        assert!(matches!(
            Matroid::from_circuits(&["1", "2"], &[vec!["1", "2"]]),
            Err(MatroidError::ParallelPair(_, _))
        ));
    }

    #[test]
    fn nested_circuits_rejected() {
        let err = Matroid::from_circuits(
            &["1", "2", "3", "4"],
            &[vec!["1", "2", "3"], vec!["1", "2", "3", "4"]],
        )
        .unwrap_err();
        assert!(matches!(err, MatroidError::CircuitAxiomViolation(_)));
    }

    #[test]
    fn elimination_violation_rejected() {
        // {1,2,3} and {1,4,5} share 1 but {2,3,4,5} contains no circuit
        let err = Matroid::from_circuits(
            &["1", "2", "3", "4", "5"],
            &[vec!["1", "2", "3"], vec!["1", "4", "5"]],
        )
        .unwrap_err();
        assert!(matches!(err, MatroidError::CircuitAxiomViolation(_)));
    }

    #[test]
    fn m5_join_of_pair() {
        let lat = m5().lattice_of_flats().unwrap();
        let a2 = lat.atom_elem(1);
        let a4 = lat.atom_elem(3);
        let j = lat.join2(a2, a4);
        assert_eq!(lat.label(j), "124");
    }

    #[test]
    fn m5_irreducibles() {
        let lat = m5().lattice_of_flats().unwrap();
        let irr = lat.irreducibles();
        let labels: BTreeSet<String> = irr.iter().map(|&x| lat.label(x)).collect();
        let expected: BTreeSet<String> = ["1", "2", "3", "4", "5", "124", "135", "1hat"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(labels, expected);
    }

    #[test]
    fn boolean_irreducibles_are_atoms() {
        let lat = boolean3().lattice_of_flats().unwrap();
        let irr = lat.irreducibles();
        assert_eq!(irr.len(), 3);
        assert!(irr.iter().all(|&x| lat.rank(x) == 1));
    }

    #[test]
    fn pi4_irreducibles() {
        let lat = complete_graph(4).lattice_of_flats().unwrap();
        // oracle: connectivity via the full common-circuit relation
        let circuits = lat.circuits();
        let mut count = 0;
        for x in 0..lat.len() {
            if x == lat.bottom() {
                continue;
            }
            let atoms: Vec<usize> = (0..lat.n_atoms())
                .filter(|&i| lat.supp(x) >> i & 1 == 1)
                .collect();
            let mut uf = UnionFind::new(lat.n_atoms());
            for &c in &circuits {
                if c & !lat.supp(x) == 0 {
                    let elems: Vec<usize> =
                        (0..lat.n_atoms()).filter(|&i| c >> i & 1 == 1).collect();
                    for w in elems.windows(2) {
                        uf.union(w[0], w[1]);
                    }
                }
            }
            let root = uf.find(atoms[0]);
            let connected = atoms.iter().all(|&a| uf.find(a) == root);
            assert_eq!(
                connected,
                lat.is_irreducible(x),
                "connectivity mismatch at {}",
                lat.label(x)
            );
            if connected {
                count += 1;
            }
        }
        // 6 atoms + 4 triple-partitions + top
        assert_eq!(count, 11);
        assert_eq!(lat.irreducibles().len(), 11);
    }

    #[test]
    fn m5_factors() {
        let lat = m5().lattice_of_flats().unwrap();
        let g = BuildingSet::minimal(&lat);
        // order: 1hat < 124 < 135 < atoms
        let labels: Vec<String> = g.members.iter().map(|&x| lat.label(x)).collect();
        assert_eq!(
            labels,
            vec!["1hat", "124", "135", "1", "2", "3", "4", "5"]
        );
        assert_eq!(g.factors(&lat, lat.top()), vec![lat.top()]);
        let f23 = lat.elem_by_supp(0b00110).unwrap(); // atoms 2,3
        let fs = g.factors(&lat, f23);
        let fl: BTreeSet<String> = fs.iter().map(|&x| lat.label(x)).collect();
        assert_eq!(
            fl,
            ["2", "3"].iter().map(|s| s.to_string()).collect::<BTreeSet<_>>()
        );
        let f124 = lat.elem_by_supp(0b01011).unwrap(); // atoms 1,2,4
        assert_eq!(g.factors(&lat, f124), vec![f124]);
    }

    #[test]
    fn building_set_validation() {
        let lat = m5().lattice_of_flats().unwrap();
        assert!(BuildingSet::minimal(&lat).validate(&lat));
        assert!(BuildingSet::maximal(&lat).validate(&lat));
        // atoms + top, without 124 and 135: not a building set
        let mut members: Vec<Elem> = lat.atoms().to_vec();
        members.push(lat.top());
        let bad = BuildingSet::with_default_order(&lat, members);
        assert!(!bad.validate(&lat));
    }

    #[test]
    fn interval_of_pi4_is_pi3_shaped() {
        let lat = complete_graph(4).lattice_of_flats().unwrap();
        // x = partition 12|3|4 = the flat containing only edge 1-2
        let atom_12 = (0..lat.n_atoms())
            .position(|i| lat.atom_labels()[i] == "1-2")
            .unwrap();
        let x = lat.atom_elem(atom_12);
        let (iv, _) = lat.interval_lattice(x, lat.top());
        assert_eq!(iv.poset().rank_profile(), vec![1, 3, 1]);
        assert!(iv.is_geometric());
    }

    #[test]
    fn factor_count_one_iff_irreducible() {
        for m in [m5(), u23(), boolean3(), complete_graph(4)] {
            let lat = m.lattice_of_flats().unwrap();
            let g = BuildingSet::minimal(&lat);
            let irr: HashSet<Elem> = lat.irreducibles().into_iter().collect();
            for x in 0..lat.len() {
                if x == lat.bottom() {
                    continue;
                }
                let f = g.factors(&lat, x);
                assert_eq!(f.len() == 1, irr.contains(&x), "at {}", lat.label(x));
            }
        }
    }

    #[test]
    fn interval_cardinality_product() {
        for m in [m5(), complete_graph(4)] {
            let lat = m.lattice_of_flats().unwrap();
            let g = BuildingSet::minimal(&lat);
            for x in 0..lat.len() {
                if x == lat.bottom() {
                    continue;
                }
                let f = g.factors(&lat, x);
                let prod: usize = f
                    .iter()
                    .map(|&y| lat.poset().down_set(y).count())
                    .product();
                assert_eq!(prod, lat.poset().down_set(x).count());
            }
        }
    }

    #[test]
    fn irreducibles_contained_in_every_valid_building_set() {
        let lat = m5().lattice_of_flats().unwrap();
        let irr: HashSet<Elem> = lat.irreducibles().into_iter().collect();
        for g in [BuildingSet::minimal(&lat), BuildingSet::maximal(&lat)] {
            assert!(g.validate(&lat));
            assert!(irr.iter().all(|&x| g.contains(x)));
        }
    }

    #[test]
    fn circuits_recovered_from_lattice() {
        let m = m5();
        let lat = m.lattice_of_flats().unwrap();
        let mut cs = lat.circuits();
        cs.sort_unstable();
        let mut expected = m.circuits().to_vec();
        expected.sort_unstable();
        assert_eq!(cs, expected);
    }
}
