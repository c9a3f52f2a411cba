//! Orlik-Solomon algebras of locally geometric semilattices: presentation,
//! no-broken-circuit bases, the boundary, Brieskorn decomposition, flag
//! complexes, and the `fl` isomorphism.

use crate::algebra::{Element, Monomial, NormalFormEngine};
use crate::blowup::BlownSemilattice;
use crate::matroid::GeometricLattice;
use crate::poset::Elem;
use crate::ratmat::QMatrix;
use crate::Rat;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

/// The carrier interface the algebra layers need: atoms in a fixed linear
/// order, joins of atom sets, ranks, and supports.
pub trait Carrier: Send + Sync {
    fn n_atoms(&self) -> usize;
    fn n_elems(&self) -> usize;
    fn bottom_elem(&self) -> Elem;
    fn elem_rank(&self, x: Elem) -> usize;
    fn elem_le(&self, x: Elem, y: Elem) -> bool;
    /// Join of a set of atoms, `None` when there is no upper bound.
    fn join_mask(&self, mask: u64) -> Option<Elem>;
    /// Atoms below an element, as a mask.
    fn atom_supp(&self, x: Elem) -> u64;
    fn atom_name(&self, i: usize) -> String;
}

impl Carrier for GeometricLattice {
    fn n_atoms(&self) -> usize {
        self.n_atoms()
    }
    fn n_elems(&self) -> usize {
        self.len()
    }
    fn bottom_elem(&self) -> Elem {
        self.bottom()
    }
    fn elem_rank(&self, x: Elem) -> usize {
        self.rank(x)
    }
    fn elem_le(&self, x: Elem, y: Elem) -> bool {
        self.le(x, y)
    }
    fn join_mask(&self, mask: u64) -> Option<Elem> {
        Some(self.join_atoms(mask))
    }
    fn atom_supp(&self, x: Elem) -> u64 {
        self.supp(x)
    }
    fn atom_name(&self, i: usize) -> String {
        self.atom_labels()[i].clone()
    }
}

impl Carrier for BlownSemilattice {
    fn n_atoms(&self) -> usize {
        self.n_h()
    }
    fn n_elems(&self) -> usize {
        self.len()
    }
    fn bottom_elem(&self) -> Elem {
        self.bottom()
    }
    fn elem_rank(&self, x: Elem) -> usize {
        self.rank(x)
    }
    fn elem_le(&self, x: Elem, y: Elem) -> bool {
        self.le(x, y)
    }
    fn join_mask(&self, mask: u64) -> Option<Elem> {
        self.join_h_mask(mask)
    }
    fn atom_supp(&self, x: Elem) -> u64 {
        self.supp(x)
    }
    fn atom_name(&self, i: usize) -> String {
        self.pbs.label(i)
    }
}

/// Minimal non-faces of a simplicial complex given by a face predicate.
pub fn minimal_nonfaces(n_vertices: usize, is_face: &dyn Fn(u64) -> bool) -> Vec<u64> {
    let mut out = HashSet::new();
    let mut frontier = vec![(0u64, 0usize)];
    while let Some((face, lo)) = frontier.pop() {
        for v in lo..n_vertices {
            let cand = face | 1 << v;
            if is_face(cand) {
                frontier.push((cand, v + 1));
            } else {
                // minimal iff removing any vertex gives a face
                let mut minimal = true;
                let mut m = cand;
                while m != 0 {
                    let w = m.trailing_zeros();
                    m &= m - 1;
                    if !is_face(cand & !(1u64 << w)) {
                        minimal = false;
                        break;
                    }
                }
                if minimal {
                    out.insert(cand);
                }
            }
        }
    }
    let mut v: Vec<u64> = out.into_iter().collect();
    v.sort_unstable();
    v
}

/// The Orlik-Solomon algebra of a locally geometric semilattice.
pub struct OsAlgebra {
    pub carrier: Arc<dyn Carrier>,
    /// Local circuits, as atom masks.
    pub circuits: Vec<u64>,
    /// Broken circuits (circuit minus its least atom).
    pub broken: Vec<u64>,
    /// Minimal non-faces of the atomic complex.
    pub nonfaces: Vec<u64>,
    /// nbc sets by size.
    pub nbc: Vec<Vec<u64>>,
    engine: NormalFormEngine,
}

impl OsAlgebra {
    pub fn new(carrier: Arc<dyn Carrier>) -> Self {
        let n = carrier.n_atoms();
        let circuits = crate::matroid::enumerate_circuits(n, &|mask| {
            carrier.join_mask(mask).map(|j| carrier.elem_rank(j))
        });
        let broken: Vec<u64> = circuits
            .iter()
            .map(|&c| c & !(1u64 << c.trailing_zeros()))
            .collect();
        let is_face = |mask: u64| carrier.join_mask(mask).is_some();
        let nonfaces = minimal_nonfaces(n, &is_face);
        // nbc sets: faces containing no broken circuit, graded by size
        let top_rank = (0..carrier.n_elems())
            .map(|x| carrier.elem_rank(x))
            .max()
            .unwrap_or(0);
        let mut nbc: Vec<Vec<u64>> = vec![Vec::new(); top_rank + 1];
        let mut frontier = vec![(0u64, 0usize)];
        nbc[0].push(0);
        while let Some((face, lo)) = frontier.pop() {
            for v in lo..n {
                let cand = face | 1 << v;
                if !is_face(cand) {
                    continue;
                }
                if broken.iter().any(|&b| b & !cand == 0) {
                    continue;
                }
                nbc[cand.count_ones() as usize].push(cand);
                frontier.push((cand, v + 1));
            }
        }
        for level in &mut nbc {
            level.sort_unstable();
        }
        let mut relations: Vec<Element> = Vec::new();
        for &c in &circuits {
            relations.push(Element::monomial(Monomial::e_set(c), Rat::one()).boundary());
        }
        for &nf in &nonfaces {
            relations.push(Element::monomial(Monomial::e_set(nf), Rat::one()));
        }
        let engine = NormalFormEngine::new(relations);
        OsAlgebra {
            carrier,
            circuits,
            broken,
            nonfaces,
            nbc,
            engine,
        }
    }

    pub fn engine(&self) -> &NormalFormEngine {
        &self.engine
    }

    pub fn top_degree(&self) -> usize {
        self.nbc.len() - 1
    }

    pub fn dim(&self, i: usize) -> usize {
        self.nbc.get(i).map_or(0, |v| v.len())
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.nbc.iter().map(|v| v.len()).collect();
        while d.len() > 1 && *d.last().unwrap() == 0 {
            d.pop();
        }
        d
    }

    pub fn normal_form(&self, a: &Element) -> Element {
        self.engine.normal_form(a)
    }

    /// Coordinates of a normal-form element in the degree-`i` nbc basis.
    pub fn coords(&self, a: &Element, i: usize) -> Vec<Rat> {
        let index: HashMap<u64, usize> = self.nbc[i]
            .iter()
            .enumerate()
            .map(|(k, &m)| (m, k))
            .collect();
        let mut v = vec![Rat::zero(); self.nbc[i].len()];
        for (m, c) in &a.terms {
            assert!(m.x.is_empty(), "OS elements have no x part");
            assert_eq!(m.e_degree(), i, "degree mismatch");
            let k = *index.get(&m.e).expect("normal form lies in the nbc basis");
            v[k] = c.clone();
        }
        v
    }

    /// The boundary matrix `OS^i -> OS^{i-1}` in nbc coordinates.  The
    /// boundary of an nbc monomial is already in normal form.
    pub fn boundary_matrix(&self, i: usize) -> QMatrix {
        assert!(i >= 1);
        let rows = self.dim(i - 1);
        let cols = self.dim(i);
        let mut m = QMatrix::zeros(rows, cols);
        for (k, &j_mask) in self.nbc[i].iter().enumerate() {
            let b = Element::monomial(Monomial::e_set(j_mask), Rat::one()).boundary();
            for (mon, c) in &b.terms {
                let r = self.nbc[i - 1]
                    .binary_search(&mon.e)
                    .expect("subsets of nbc sets are nbc");
                m[(r, k)] = c.clone();
            }
        }
        m
    }

    /// Brieskorn decomposition in degree `i`: the nbc basis partitioned by
    /// the join of the underlying set.
    pub fn brieskorn(&self, i: usize) -> BTreeMap<Elem, Vec<u64>> {
        let mut blocks: BTreeMap<Elem, Vec<u64>> = BTreeMap::new();
        for &j_mask in &self.nbc[i] {
            let y = self
                .carrier
                .join_mask(j_mask)
                .expect("nbc sets have upper bounds");
            debug_assert_eq!(self.carrier.elem_rank(y), i);
            blocks.entry(y).or_default().push(j_mask);
        }
        blocks
    }

    /// Dimensions of the projective subalgebra, by the splitting
    /// recurrence, cross-checked against kernel dimensions of the
    /// boundary.  Requires the carrier to be a lattice (unique maximum).
    pub fn projective_dims(&self) -> Vec<usize> {
        let maxes: Vec<Elem> = (0..self.carrier.n_elems())
            .filter(|&x| {
                (0..self.carrier.n_elems()).all(|y| y == x || !self.carrier.elem_le(x, y))
            })
            .collect();
        assert_eq!(maxes.len(), 1, "projective dimensions need a lattice");
        let r = self.top_degree();
        let mut pos = vec![0usize; r];
        for i in 0..r {
            pos[i] = if i == 0 {
                1
            } else {
                self.dim(i) - pos[i - 1]
            };
            // cross-check: dim ker(partial: OS^i -> OS^{i-1})
            let ker = if i == 0 {
                1
            } else {
                self.dim(i) - self.boundary_matrix(i).rank()
            };
            assert_eq!(pos[i], ker, "splitting disagrees with the kernel");
        }
        pos
    }
}

/// The flag space of a locally geometric semilattice (or of a principal
/// lower set of one): chains graded by rank, modulo the single-position
/// exchange relations, with the differential `delta`.
pub struct FlagSpace {
    pub carrier: Arc<dyn Carrier>,
    /// Only elements `<= roof` participate (the whole carrier if `None`).
    pub roof: Option<Elem>,
    /// chains per degree: each is `(bottom = y_0 < ... < y_i)` with
    /// `rank(y_j) = j`.
    pub chains: Vec<Vec<Vec<Elem>>>,
    /// indices of the chains chosen as a basis of the quotient
    pub basis: Vec<Vec<usize>>,
    /// projection matrices chain-space -> quotient coordinates
    pub proj: Vec<QMatrix>,
}

impl FlagSpace {
    pub fn new(carrier: Arc<dyn Carrier>) -> Self {
        Self::build(carrier, None)
    }

    pub fn below(carrier: Arc<dyn Carrier>, roof: Elem) -> Self {
        Self::build(carrier, Some(roof))
    }

    fn build(carrier: Arc<dyn Carrier>, roof: Option<Elem>) -> Self {
        let in_range = |x: Elem| roof.map_or(true, |r| carrier.elem_le(x, r));
        let max_rank = (0..carrier.n_elems())
            .filter(|&x| in_range(x))
            .map(|x| carrier.elem_rank(x))
            .max()
            .unwrap_or(0);
        let mut by_rank: Vec<Vec<Elem>> = vec![Vec::new(); max_rank + 1];
        for x in 0..carrier.n_elems() {
            if in_range(x) {
                by_rank[carrier.elem_rank(x)].push(x);
            }
        }
        let mut chains: Vec<Vec<Vec<Elem>>> = Vec::with_capacity(max_rank + 1);
        chains.push(vec![vec![carrier.bottom_elem()]]);
        for i in 1..=max_rank {
            let mut level = Vec::new();
            for c in &chains[i - 1] {
                let top = *c.last().unwrap();
                for &y in &by_rank[i] {
                    if carrier.elem_le(top, y) && top != y {
                        let mut c2 = c.clone();
                        c2.push(y);
                        level.push(c2);
                    }
                }
            }
            level.sort();
            chains.push(level);
        }
        let mut basis = Vec::with_capacity(max_rank + 1);
        let mut proj = Vec::with_capacity(max_rank + 1);
        for i in 0..=max_rank {
            let level = &chains[i];
            let index: HashMap<&Vec<Elem>, usize> =
                level.iter().enumerate().map(|(k, c)| (c, k)).collect();
            // relations: for each internal position j and each gapped chain
            let mut rels: Vec<Vec<Rat>> = Vec::new();
            if i >= 2 {
                let mut seen_gaps: HashSet<(Vec<Elem>, usize)> = HashSet::new();
                for c in level {
                    for j in 1..i {
                        let mut gap = c.clone();
                        gap.remove(j);
                        if !seen_gaps.insert((gap.clone(), j)) {
                            continue;
                        }
                        let mut row = vec![Rat::zero(); level.len()];
                        for &y in &by_rank[j] {
                            if carrier.elem_le(c[j - 1], y)
                                && carrier.elem_le(y, c[j + 1])
                                && y != c[j - 1]
                                && y != c[j + 1]
                            {
                                let mut full = c.clone();
                                full[j] = y;
                                if let Some(&k) = index.get(&full) {
                                    row[k] += Rat::one();
                                }
                            }
                        }
                        rels.push(row);
                    }
                }
            }
            let rel_mat = if rels.is_empty() {
                QMatrix::zeros(0, level.len())
            } else {
                QMatrix::from_rows(rels)
            };
            let (rref, pivots) = rel_mat.rref();
            let pivot_set: HashSet<usize> = pivots.iter().copied().collect();
            let free: Vec<usize> = (0..level.len())
                .filter(|k| !pivot_set.contains(k))
                .collect();
            let mut p = QMatrix::zeros(free.len(), level.len());
            for (fi, &f) in free.iter().enumerate() {
                p[(fi, f)] = Rat::one();
            }
            for (r, &c) in pivots.iter().enumerate() {
                for (fi, &f) in free.iter().enumerate() {
                    p[(fi, c)] = -rref[(r, f)].clone();
                }
            }
            basis.push(free);
            proj.push(p);
        }
        FlagSpace {
            carrier,
            roof,
            chains,
            basis,
            proj,
        }
    }

    pub fn dim(&self, i: usize) -> usize {
        self.basis.get(i).map_or(0, |b| b.len())
    }

    pub fn dims(&self) -> Vec<usize> {
        (0..self.chains.len()).map(|i| self.dim(i)).collect()
    }

    pub fn top_degree(&self) -> usize {
        self.chains.len() - 1
    }

    /// `delta: Fl^i -> Fl^{i+1}` in quotient coordinates.
    pub fn delta(&self, i: usize) -> QMatrix {
        let next = i + 1;
        if next >= self.chains.len() {
            return QMatrix::zeros(0, self.dim(i));
        }
        let sign = if i % 2 == 0 { Rat::one() } else { -Rat::one() };
        let index: HashMap<&Vec<Elem>, usize> = self.chains[next]
            .iter()
            .enumerate()
            .map(|(k, c)| (c, k))
            .collect();
        // chain-level map, then project; sources are the basis chains
        let mut chain_level = QMatrix::zeros(self.chains[next].len(), self.dim(i));
        for (bi, &k) in self.basis[i].iter().enumerate() {
            let c = &self.chains[i][k];
            let top = *c.last().unwrap();
            for x in 0..self.carrier.n_elems() {
                if self.carrier.elem_rank(x) == next
                    && self.carrier.elem_le(top, x)
                    && x != top
                    && self
                        .roof
                        .map_or(true, |r| self.carrier.elem_le(x, r))
                {
                    let mut c2 = c.clone();
                    c2.push(x);
                    let row = index[&c2];
                    chain_level[(row, bi)] += sign.clone();
                }
            }
        }
        self.proj[next].mul(&chain_level)
    }

    /// The restriction `Fl^i(self) -> Fl^i(smaller)` induced by sending a
    /// chain to itself when it survives and to zero otherwise.
    pub fn restriction(&self, smaller: &FlagSpace, i: usize) -> QMatrix {
        if i >= self.chains.len() || i >= smaller.chains.len() {
            return QMatrix::zeros(smaller.dim(i), self.dim(i));
        }
        let index: HashMap<&Vec<Elem>, usize> = smaller.chains[i]
            .iter()
            .enumerate()
            .map(|(k, c)| (c, k))
            .collect();
        let mut chain_level = QMatrix::zeros(smaller.chains[i].len(), self.dim(i));
        for (bi, &k) in self.basis[i].iter().enumerate() {
            if let Some(&row) = index.get(&self.chains[i][k]) {
                chain_level[(row, bi)] = Rat::one();
            }
        }
        smaller.proj[i].mul(&chain_level)
    }

    /// The chain-level functional of `fl(e_J)` evaluated on a chain.
    fn fl_value(&self, carrier: &dyn Carrier, j_mask: u64, chain: &[Elem]) -> Rat {
        let atoms: Vec<usize> = (0..carrier.n_atoms())
            .filter(|&a| j_mask >> a & 1 == 1)
            .collect();
        let i = atoms.len();
        assert_eq!(chain.len(), i + 1);
        let mut total = Rat::zero();
        let mut perm: Vec<usize> = (0..i).collect();
        permute(&mut perm, 0, &mut |p| {
            // flag of the permuted atoms: partial joins must match the chain
            let mut mask = 0u64;
            let mut ok = true;
            for (step, &pi) in p.iter().enumerate() {
                mask |= 1 << atoms[pi];
                match carrier.join_mask(mask) {
                    Some(y) if y == chain[step + 1] => {}
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let s = permutation_sign(p);
                total += crate::rat(s);
            }
        });
        total
    }

    /// The matrix of `fl: OS^i -> (Fl^i)^dual`: entry (f, J) is the value
    /// of the functional `fl(e_J)` on the f-th basis chain.
    pub fn fl_matrix(&self, os: &OsAlgebra, i: usize) -> QMatrix {
        let mut m = QMatrix::zeros(self.dim(i), os.dim(i));
        for (col, &j_mask) in os.nbc[i].iter().enumerate() {
            for (row, &k) in self.basis[i].iter().enumerate() {
                m[(row, col)] = self.fl_value(os.carrier.as_ref(), j_mask, &self.chains[i][k]);
            }
        }
        m
    }

    /// Check that the chain-level functional of each nbc monomial vanishes
    /// on the exchange relations (so `fl` descends to the quotient dual).
    pub fn fl_descends(&self, os: &OsAlgebra, i: usize) -> bool {
        // functional vanishes on relations iff evaluating on any chain
        // equals evaluating through basis representatives
        let level = &self.chains[i];
        for &j_mask in &os.nbc[i] {
            let values: Vec<Rat> = level
                .iter()
                .map(|c| self.fl_value(os.carrier.as_ref(), j_mask, c))
                .collect();
            // through the projection: value on chain k must equal the
            // pairing of proj column k with basis values
            for (k, _) in level.iter().enumerate() {
                let mut through = Rat::zero();
                for (bi, &bk) in self.basis[i].iter().enumerate() {
                    through += &self.proj[i][(bi, k)] * &values[bk];
                }
                if through != values[k] {
                    return false;
                }
            }
        }
        true
    }
}

fn permute<F: FnMut(&[usize])>(v: &mut Vec<usize>, k: usize, f: &mut F) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

fn permutation_sign(p: &[usize]) -> i64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The matrix of the algebra map `OS(L) -> OS(L')` induced by a linear
/// substitution on generators, in nbc coordinates per degree.
pub fn os_map_matrix(
    source: &OsAlgebra,
    target: &OsAlgebra,
    images: &dyn Fn(usize) -> Vec<(usize, Rat)>,
    degree: usize,
) -> QMatrix {
    let mut m = QMatrix::zeros(target.dim(degree), source.dim(degree));
    for (col, &j_mask) in source.nbc[degree].iter().enumerate() {
        let img = Element::monomial(Monomial::e_set(j_mask), Rat::one())
            .substitute_linear(images, &|_| Vec::new());
        let nf = target.normal_form(&img);
        let coords = target.coords(&nf, degree);
        for (row, c) in coords.into_iter().enumerate() {
            m[(row, col)] = c;
        }
    }
    m
}

/// Generator images of the single-blowup map: `e_g` goes to `e_g`, plus
/// `e_p` when `g` lies below the blown-up element.
pub fn blowup_images(
    from: &BlownSemilattice,
    to: &BlownSemilattice,
    p_lm: Elem,
) -> impl Fn(usize) -> Vec<(usize, Rat)> {
    let h_from = from.pbs.h.clone();
    let to_index: HashMap<Elem, usize> = to
        .pbs
        .h
        .iter()
        .enumerate()
        .map(|(i, &m)| (m, i))
        .collect();
    let p_idx_to = *to_index.get(&p_lm).expect("p is a member of H'");
    // supports in L(M,H) of the element p before its blowup
    let p_surv = from.surviving(p_lm).expect("p survives in L(M,H)");
    let below_mask = from.supp(p_surv);
    move |i: usize| {
        let lm = h_from[i];
        let j = *to_index.get(&lm).expect("H subset of H'");
        let mut v = vec![(j, Rat::one())];
        if below_mask >> i & 1 == 1 {
            v.push((p_idx_to, Rat::one()));
        }
        v
    }
}
