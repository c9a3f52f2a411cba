//! Combinatorial blowups, partial building sets, the iterated blowup
//! `L(M,H)`, nested set complexes, and the maps between them.
//!
//! Elements of a blown-up semilattice are canonically identified by their
//! atom support, a bitmask over `H` in the fixed order `prec`.

use crate::bits::BitSet;
use crate::matroid::{BuildingSet, GeometricLattice};
use crate::poset::{Elem, FinitePoset, MeetSemilattice, PosetError};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BlowupError {
    #[error("cannot blow up the bottom element")]
    BlowupAtBottom,
    #[error("element {0} is not in the semilattice")]
    UnknownElement(Elem),
    #[error("H-core is not an order filter of G: {0} is missing")]
    NotOrderFilter(String),
    #[error("member {0} is not in the building set")]
    NotInBuildingSet(String),
    #[error("set is not nested")]
    NotNested,
    #[error("{0} is not a sub-building-set of {1}")]
    NotSub(String, String),
    #[error("poset error: {0}")]
    Poset(#[from] PosetError),
}

/// Where an element of a blown-up semilattice came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Survivor of an element of the original lattice.
    Original(Elem),
    /// Pair `(p, x)` created when blowing up `p` (an index into `H`);
    /// `inner_supp` is the support the element `x` ended up with.
    Pair { p: usize, inner_supp: u64 },
}

/// A partial building set `H` inside a building set `G` of a geometric
/// lattice: atoms plus an upward-closed subset of `G`, with the inherited
/// reverse linear extension.
#[derive(Clone)]
pub struct PartialBuildingSet {
    pub lat: Arc<GeometricLattice>,
    pub g: Arc<BuildingSet>,
    /// All of `H` (atoms included), ordered by `prec`.
    pub h: Vec<Elem>,
}

impl PartialBuildingSet {
    /// `H = atoms u core`.  The core must consist of non-atom members of
    /// `G` and be upward closed in `G`.
    pub fn new(
        lat: Arc<GeometricLattice>,
        g: Arc<BuildingSet>,
        core: &[Elem],
    ) -> Result<Self, BlowupError> {
        for &p in core {
            if !g.contains(p) {
                return Err(BlowupError::NotInBuildingSet(lat.label(p)));
            }
            if lat.rank(p) <= 1 {
                return Err(BlowupError::NotInBuildingSet(lat.label(p)));
            }
            for &q in &g.members {
                if lat.le(p, q) && lat.rank(q) > 1 && !core.contains(&q) {
                    return Err(BlowupError::NotOrderFilter(lat.label(q)));
                }
            }
        }
        let h: Vec<Elem> = g
            .members
            .iter()
            .copied()
            .filter(|&m| lat.rank(m) == 1 || core.contains(&m))
            .collect();
        Ok(PartialBuildingSet { lat, g, h })
    }

    /// The trivial partial building set `H = atoms`.
    pub fn atoms_only(lat: Arc<GeometricLattice>, g: Arc<BuildingSet>) -> Self {
        Self::new(lat, g, &[]).expect("empty core is always an order filter")
    }

    /// The full partial building set `H = G`.
    pub fn full(lat: Arc<GeometricLattice>, g: Arc<BuildingSet>) -> Self {
        let core: Vec<Elem> = g
            .members
            .iter()
            .copied()
            .filter(|&m| lat.rank(m) > 1)
            .collect();
        Self::new(lat, g, &core).expect("G-core is an order filter")
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Non-atom members in `prec` order.
    pub fn core(&self) -> Vec<Elem> {
        self.h
            .iter()
            .copied()
            .filter(|&m| self.lat.rank(m) > 1)
            .collect()
    }

    pub fn h_index(&self, x: Elem) -> Option<usize> {
        self.h.iter().position(|&m| m == x)
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.h.contains(&x)
    }

    pub fn label(&self, i: usize) -> String {
        self.lat.label(self.h[i])
    }

    /// Is `other` extended by `self`: does `self` have the same lattice and
    /// a core containing `other`'s?
    pub fn extends(&self, smaller: &PartialBuildingSet) -> bool {
        Arc::ptr_eq(&self.lat, &smaller.lat)
            && smaller.h.iter().all(|m| self.h.contains(m))
    }

    /// Is a set of members (as a mask over `prec` positions) H-nested:
    /// every nontrivial antichain in it joins outside `H`?
    pub fn is_nested(&self, mask: u64) -> bool {
        let elems: Vec<Elem> = self.mask_elems(mask);
        let mut anti: Vec<Elem> = Vec::new();
        !self.has_bad_antichain(&elems, 0, &mut anti)
    }

    fn has_bad_antichain(&self, elems: &[Elem], from: usize, anti: &mut Vec<Elem>) -> bool {
        if anti.len() >= 2 {
            let j = self
                .lat
                .join_of(anti)
                .expect("joins exist in a lattice");
            if self.contains(j) {
                return true;
            }
        }
        for i in from..elems.len() {
            let x = elems[i];
            if anti
                .iter()
                .all(|&a| !self.lat.le(a, x) && !self.lat.le(x, a))
            {
                anti.push(x);
                if self.has_bad_antichain(elems, i + 1, anti) {
                    anti.pop();
                    return true;
                }
                anti.pop();
            }
        }
        false
    }

    pub fn mask_elems(&self, mask: u64) -> Vec<Elem> {
        (0..self.h.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| self.h[i])
            .collect()
    }

    pub fn elems_mask(&self, elems: &[Elem]) -> u64 {
        let mut m = 0u64;
        for &e in elems {
            let i = self.h_index(e).expect("element belongs to H");
            m |= 1 << i;
        }
        m
    }
}

/// The nested set complex `N(M,H)`, with memoized face queries.
pub struct NestedComplex {
    pbs: PartialBuildingSet,
    memo: Mutex<HashMap<u64, bool>>,
}

impl NestedComplex {
    pub fn new(pbs: PartialBuildingSet) -> Self {
        NestedComplex {
            pbs,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn pbs(&self) -> &PartialBuildingSet {
        &self.pbs
    }

    pub fn n_vertices(&self) -> usize {
        self.pbs.len()
    }

    pub fn is_face(&self, mask: u64) -> bool {
        if let Some(&b) = self.memo.lock().unwrap().get(&mask) {
            return b;
        }
        let b = self.pbs.is_nested(mask);
        self.memo.lock().unwrap().insert(mask, b);
        b
    }

    /// All faces (including the empty face), ascending by mask.
    pub fn faces(&self) -> Vec<u64> {
        let n = self.n_vertices();
        let mut out = vec![0u64];
        let mut frontier = vec![(0u64, 0usize)];
        while let Some((mask, lo)) = frontier.pop() {
            for v in lo..n {
                let m2 = mask | 1 << v;
                if self.is_face(m2) {
                    out.push(m2);
                    frontier.push((m2, v + 1));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Maximal faces.
    pub fn facets(&self) -> Vec<u64> {
        let faces = self.faces();
        let n = self.n_vertices();
        faces
            .iter()
            .copied()
            .filter(|&f| (0..n).all(|v| f >> v & 1 == 1 || !self.is_face(f | 1 << v)))
            .collect()
    }

    /// Facets as sorted lists of member labels.
    pub fn facet_labels(&self) -> Vec<Vec<String>> {
        self.facets()
            .iter()
            .map(|&f| {
                (0..self.n_vertices())
                    .filter(|&v| f >> v & 1 == 1)
                    .map(|v| self.pbs.label(v))
                    .collect()
            })
            .collect()
    }
}

/// Provenance of an element of a single blowup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlowNode {
    Kept(Elem),
    Pair(Elem),
}

/// One combinatorial blowup.  Returns the blown-up semilattice, the
/// provenance of each new element (`Kept` or `Pair`), and the blowdown map.
pub fn combinatorial_blowup(
    sl: &MeetSemilattice,
    p: Elem,
) -> Result<(MeetSemilattice, Vec<BlowNode>, Vec<Elem>), BlowupError> {
    if p >= sl.len() {
        return Err(BlowupError::UnknownElement(p));
    }
    if p == sl.bottom() {
        return Err(BlowupError::BlowupAtBottom);
    }
    let n = sl.len();
    let poset = sl.poset();
    let kept: Vec<Elem> = (0..n).filter(|&x| !poset.le(p, x)).collect();
    let mut new_id = vec![usize::MAX; n];
    for (i, &x) in kept.iter().enumerate() {
        new_id[x] = i;
    }
    // L_(p): kept elements whose join with p exists
    let joins_with_p: Vec<Option<Elem>> = (0..n)
        .map(|x| {
            if poset.le(p, x) {
                None
            } else {
                sl.join2(x, p)
            }
        })
        .collect();
    let pairs: Vec<Elem> = kept
        .iter()
        .copied()
        .filter(|&x| joins_with_p[x].is_some())
        .collect();
    let mut pair_id = vec![usize::MAX; n];
    for (i, &x) in pairs.iter().enumerate() {
        pair_id[x] = kept.len() + i;
    }
    let total = kept.len() + pairs.len();
    let mut up = vec![BitSet::new(total); total];
    for (i, &x) in kept.iter().enumerate() {
        up[i].insert(i);
        for y in poset.up_set(x).iter() {
            if new_id[y] != usize::MAX {
                up[i].insert(new_id[y]);
            }
            // rule (iii): (p, y) > x iff y >= x
            if pair_id[y] != usize::MAX {
                up[i].insert(pair_id[y]);
            }
        }
    }
    for &x in &pairs {
        let i = pair_id[x];
        up[i].insert(i);
        for y in poset.up_set(x).iter() {
            if pair_id[y] != usize::MAX {
                up[i].insert(pair_id[y]);
            }
        }
    }
    let new_poset = FinitePoset::from_up_sets(up)?;
    let new_sl = MeetSemilattice::new(new_poset)?;
    let mut nodes = Vec::with_capacity(total);
    let mut blowdown = Vec::with_capacity(total);
    for &x in &kept {
        nodes.push(BlowNode::Kept(x));
        blowdown.push(x);
    }
    for &x in &pairs {
        nodes.push(BlowNode::Pair(x));
        blowdown.push(joins_with_p[x].expect("pair elements join with p"));
    }
    Ok((new_sl, nodes, blowdown))
}

/// The iterated blowup `L(M,H)` of a geometric lattice along a partial
/// building set, with support-canonical element identity.
pub struct BlownSemilattice {
    pub pbs: PartialBuildingSet,
    sl: MeetSemilattice,
    /// H index -> atom element id.
    atom_of_h: Vec<Elem>,
    /// element -> support mask over H indices.
    supp: Vec<u64>,
    by_supp: HashMap<u64, Elem>,
    /// element -> image in the original lattice under the total blowdown.
    pi_lm: Vec<Elem>,
    /// original-lattice elements that survive all blowups.
    surviving: HashMap<Elem, Elem>,
    prov: Vec<Provenance>,
}

impl BlownSemilattice {
    /// Blow up the `H`-core in `prec` order.  The result does not depend on
    /// the choice of linear extension; `prec` fixes a canonical one.
    pub fn build(pbs: &PartialBuildingSet) -> Result<Self, BlowupError> {
        let core = pbs.core();
        Self::build_with_order(pbs, &core)
    }

    /// Blow up using an explicit order on the core (used to verify order
    /// independence; the order must be a reverse linear extension).
    pub fn build_with_order(
        pbs: &PartialBuildingSet,
        core_order: &[Elem],
    ) -> Result<Self, BlowupError> {
        let lat = &pbs.lat;
        let mut sl = lat.semilattice().clone();
        // provenance of the working semilattice, per element
        let mut orig: Vec<Option<Elem>> = (0..sl.len()).map(Some).collect();
        let mut prov: Vec<Provenance> = (0..sl.len()).map(Provenance::Original).collect();
        let mut pi: Vec<Elem> = (0..sl.len()).collect();
        for &p_lm in core_order {
            let p_cur = orig
                .iter()
                .position(|&o| o == Some(p_lm))
                .ok_or(BlowupError::UnknownElement(p_lm))?;
            let (next, nodes, _) = combinatorial_blowup(&sl, p_cur)?;
            let p_h = pbs.h_index(p_lm).expect("core member is in H");
            let mut norig = Vec::with_capacity(next.len());
            let mut nprov = Vec::with_capacity(next.len());
            let mut npi = Vec::with_capacity(next.len());
            for node in &nodes {
                match *node {
                    BlowNode::Kept(x) => {
                        norig.push(orig[x]);
                        nprov.push(prov[x].clone());
                        npi.push(pi[x]);
                    }
                    BlowNode::Pair(x) => {
                        norig.push(None);
                        nprov.push(Provenance::Pair {
                            p: p_h,
                            inner_supp: 0, // filled in below
                        });
                        // single-step blowdown is p v x in the previous
                        // semilattice; compose with the previous total map
                        let j = sl.join2(x, p_cur).expect("pair joins with p");
                        npi.push(pi[j]);
                    }
                }
            }
            sl = next;
            orig = norig;
            prov = nprov;
            pi = npi;
        }
        // atoms of the result biject with H
        let atoms = sl.atoms();
        let mut atom_of_h = vec![usize::MAX; pbs.h.len()];
        for &a in &atoms {
            let h_idx = match prov[a] {
                Provenance::Original(o) => pbs
                    .h_index(o)
                    .expect("surviving atoms of the lattice are in H"),
                Provenance::Pair { p, .. } => p,
            };
            atom_of_h[h_idx] = a;
        }
        assert!(
            atom_of_h.iter().all(|&a| a != usize::MAX),
            "atoms of L(M,H) must biject with H"
        );
        let mut supp = vec![0u64; sl.len()];
        for x in 0..sl.len() {
            for (i, &a) in atom_of_h.iter().enumerate() {
                if sl.le(a, x) {
                    supp[x] |= 1 << i;
                }
            }
        }
        let mut by_supp = HashMap::new();
        for (x, &m) in supp.iter().enumerate() {
            let clash = by_supp.insert(m, x);
            assert!(clash.is_none(), "atom support must determine the element");
        }
        // record inner supports on pair provenances, for diagnostics
        let prov: Vec<Provenance> = prov
            .into_iter()
            .enumerate()
            .map(|(x, pv)| match pv {
                Provenance::Pair { p, .. } => Provenance::Pair {
                    p,
                    inner_supp: supp[x] & !(1u64 << p),
                },
                other => other,
            })
            .collect();
        let surviving: HashMap<Elem, Elem> = orig
            .iter()
            .enumerate()
            .filter_map(|(x, &o)| o.map(|lm| (lm, x)))
            .collect();
        Ok(BlownSemilattice {
            pbs: pbs.clone(),
            sl,
            atom_of_h,
            supp,
            by_supp,
            pi_lm: pi,
            surviving,
            prov,
        })
    }

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

    pub fn rank(&self, x: Elem) -> usize {
        self.sl.rank(x)
    }

    pub fn le(&self, x: Elem, y: Elem) -> bool {
        self.sl.le(x, y)
    }

    /// `d(x, y)`: the rank of the (geometric) interval `[x, y]`.
    pub fn dist(&self, x: Elem, y: Elem) -> usize {
        self.sl.dist(x, y)
    }

    pub fn n_h(&self) -> usize {
        self.atom_of_h.len()
    }

    pub fn atom_of_h(&self, i: usize) -> Elem {
        self.atom_of_h[i]
    }

    pub fn supp(&self, x: Elem) -> u64 {
        self.supp[x]
    }

    pub fn elem_by_supp(&self, mask: u64) -> Option<Elem> {
        self.by_supp.get(&mask).copied()
    }

    pub fn provenance(&self, x: Elem) -> &Provenance {
        &self.prov[x]
    }

    /// Image in the original lattice under the total blowdown map.
    pub fn pi_lm(&self, x: Elem) -> Elem {
        self.pi_lm[x]
    }

    /// The element an original-lattice element survives as, if it does.
    pub fn surviving(&self, lm: Elem) -> Option<Elem> {
        self.surviving.get(&lm).copied()
    }

    pub fn join_of(&self, s: &[Elem]) -> Option<Elem> {
        self.sl.join_of(s).expect("ids valid")
    }

    /// Join of a set of H-atoms given by mask; `None` when not a face.
    pub fn join_h_mask(&self, mask: u64) -> Option<Elem> {
        let elems: Vec<Elem> = (0..self.n_h())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| self.atom_of_h[i])
            .collect();
        self.join_of(&elems)
    }

    /// The atomic complex `Ka`: masks over `H` with a common upper bound.
    pub fn is_atomic_face(&self, mask: u64) -> bool {
        self.join_h_mask(mask).is_some()
    }

    pub fn label(&self, x: Elem) -> String {
        let parts: Vec<String> = (0..self.n_h())
            .filter(|&i| self.supp[x] >> i & 1 == 1)
            .map(|i| self.pbs.label(i))
            .collect();
        if parts.is_empty() {
            "0hat".into()
        } else {
            parts.join("|")
        }
    }

    /// Local circuits: minimal dependent atom sets (as H-masks) among sets
    /// with a common upper bound.
    pub fn circuits(&self) -> Vec<u64> {
        crate::matroid::enumerate_circuits(self.n_h(), &|mask| {
            self.join_h_mask(mask).map(|j| self.rank(j))
        })
    }
}

/// `Pi` on vertex sets: blow a subset of `H'` down to `H`.
/// Both partial building sets must share the lattice, with `H` contained in
/// `H'`.  Input and output are masks over the respective `prec` orders.
pub fn pi_map(
    from: &BlownSemilattice,
    to: &BlownSemilattice,
    mask: u64,
) -> Result<u64, BlowupError> {
    let hp = &from.pbs;
    let h = &to.pbs;
    if !hp.extends(h) {
        return Err(BlowupError::NotSub("H".into(), "H'".into()));
    }
    if !from.is_atomic_face(mask) {
        return Err(BlowupError::NotNested);
    }
    let mut out = 0u64;
    for i in (0..hp.len()).filter(|&i| mask >> i & 1 == 1) {
        let lm = hp.h[i];
        match h.h_index(lm) {
            Some(j) => {
                // still an atom downstairs
                out |= 1 << j;
            }
            None => {
                // blown down to the surviving original element; collect the
                // H-atoms underneath it
                let e = to
                    .surviving(lm)
                    .expect("members of H' - H survive in L(M,H)");
                out |= to.supp(e);
            }
        }
    }
    Ok(out)
}

/// `eta` on vertex sets: lift a subset of `H` up to `H'`, one blowup at a
/// time in `prec` order.  Works entirely in the original lattice.
pub fn eta_map(
    from: &PartialBuildingSet,
    to: &PartialBuildingSet,
    mask: u64,
) -> Result<u64, BlowupError> {
    if !to.extends(from) {
        return Err(BlowupError::NotSub("H".into(), "H'".into()));
    }
    if !from.is_nested(mask) {
        return Err(BlowupError::NotNested);
    }
    let lat = &from.lat;
    let mut set: Vec<Elem> = from.mask_elems(mask);
    let from_core = from.core();
    for &p in to.core().iter() {
        if from_core.contains(&p) {
            continue;
        }
        let below: Vec<Elem> = set.iter().copied().filter(|&x| lat.lt(x, p)).collect();
        if below.is_empty() {
            continue;
        }
        if lat.join_of(&below) == Some(p) {
            set.retain(|&x| !lat.lt(x, p));
            set.push(p);
        }
    }
    Ok(to.elems_mask(&set))
}

/// The element-level blowdown `pi^{H'}_H : L(M,H') -> L(M,H)`, computed by
/// re-running the extension blowups from `L(M,H)` and matching supports.
pub fn blowdown_map(
    from: &BlownSemilattice,
    to: &BlownSemilattice,
) -> Result<Vec<Elem>, BlowupError> {
    let hp = &from.pbs;
    let h = &to.pbs;
    if !hp.extends(h) {
        return Err(BlowupError::NotSub("H".into(), "H'".into()));
    }
    // rebuild L(M,H') as an extension of the H construction: core order =
    // H core first, then the difference, both in prec order
    let h_core = h.core();
    let mut order = h_core.clone();
    for &p in hp.core().iter() {
        if !h_core.contains(&p) {
            order.push(p);
        }
    }
    let ext = BlownSemilattice::build_with_order(hp, &order)?;
    // recompute the composite blowdown from ext to L(M,H) by folding the
    // single-step maps of the extension blowups
    let mut sl = to.sl.clone();
    let mut orig: Vec<Option<Elem>> = (0..sl.len())
        .map(|x| match to.prov[x] {
            Provenance::Original(o) => Some(o),
            _ => None,
        })
        .collect();
    let mut down: Vec<Elem> = (0..sl.len()).collect();
    for &p_lm in order[h_core.len()..].iter() {
        let p_cur = orig
            .iter()
            .position(|&o| o == Some(p_lm))
            .expect("extension members survive");
        let (next, nodes, step) = combinatorial_blowup(&sl, p_cur)?;
        let mut norig = Vec::with_capacity(next.len());
        let mut ndown = Vec::with_capacity(next.len());
        for (new_id, node) in nodes.iter().enumerate() {
            match *node {
                BlowNode::Kept(x) => {
                    norig.push(orig[x]);
                    ndown.push(down[x]);
                }
                BlowNode::Pair(_) => {
                    norig.push(None);
                    ndown.push(down[step[new_id]]);
                }
            }
        }
        sl = next;
        orig = norig;
        down = ndown;
    }
    // rebuilt extension has the same supports as `from`; translate
    let mut ext_supp_to_down: HashMap<u64, Elem> = HashMap::new();
    for x in 0..ext.len() {
        ext_supp_to_down.insert(ext.supp(x), down[x]);
    }
    let mut result = vec![usize::MAX; from.len()];
    for (y, r) in result.iter_mut().enumerate() {
        *r = *ext_supp_to_down
            .get(&from.supp(y))
            .expect("L(M,H') is canonical up to support isomorphism");
    }
    Ok(result)
}

/// `F^+(y)` and the interval data `z_y` for the local decomposition.
pub struct FactorsPlus {
    /// Members of `F^+(y)` as original-lattice elements, sorted by id.
    pub fplus: Vec<Elem>,
    /// `z_y(g)` for each member, in the same order.
    pub z: Vec<Elem>,
}

impl FactorsPlus {
    pub fn z_of(&self, g: Elem) -> Option<Elem> {
        self.fplus.iter().position(|&f| f == g).map(|i| self.z[i])
    }
}

/// `F^+(L(M,H), G; y) = F(...) u {1hat}` with `z_y(g)` the join of the
/// members strictly below `g`.
pub fn factors_plus(bl: &BlownSemilattice, y: Elem) -> FactorsPlus {
    let pbs = &bl.pbs;
    let lat = &pbs.lat;
    // eta of the support, viewed in G
    let full = PartialBuildingSet::full(lat.clone(), pbs.g.clone());
    let mask = bl.supp(y);
    let eta = eta_map(pbs, &full, mask).expect("supports are nested");
    let mut fplus: Vec<Elem> = full.mask_elems(eta);
    if !fplus.contains(&lat.top()) {
        fplus.push(lat.top());
    }
    fplus.sort_unstable();
    let z: Vec<Elem> = fplus
        .iter()
        .map(|&g| {
            let below: Vec<Elem> = fplus
                .iter()
                .copied()
                .filter(|&f| lat.lt(f, g))
                .collect();
            lat.join_of(&below).expect("joins exist in a lattice")
        })
        .collect();
    FactorsPlus { fplus, z }
}

/// Factors of `y` computed directly inside `L(M,H)`, viewing `G` as a
/// building set there (atoms for blown-up members, survivors otherwise).
pub fn factors_in_blowup(bl: &BlownSemilattice, y: Elem) -> Vec<Elem> {
    let pbs = &bl.pbs;
    let lat = &pbs.lat;
    let core = pbs.core();
    let g_in_l: Vec<(Elem, Elem)> = pbs
        .g
        .members
        .iter()
        .map(|&g| {
            let e = match pbs.h_index(g) {
                Some(i) if lat.rank(g) == 1 || core.contains(&g) => bl.atom_of_h(i),
                _ => bl.surviving(g).expect("unblown members survive"),
            };
            (g, e)
        })
        .collect();
    let below: Vec<(Elem, Elem)> = g_in_l
        .iter()
        .copied()
        .filter(|&(_, e)| bl.le(e, y))
        .collect();
    let mut maxs: Vec<Elem> = below
        .iter()
        .filter(|&&(_, e)| below.iter().all(|&(_, f)| f == e || !bl.poset().lt(e, f)))
        .map(|&(g, _)| g)
        .collect();
    maxs.sort_unstable();
    maxs.dedup();
    maxs
}

/// The local data at `(y, g)`: the interval `[z_y(g), g]` as a geometric
/// lattice, the induced partial building set on it, and the map `zeta`.
pub struct LocalBuildingData {
    /// `[z_y(g), g]` with ranks shifted to start at 0.
    pub interval: GeometricLattice,
    /// new interval ids -> original-lattice ids
    pub old_ids: Vec<Elem>,
    /// induced partial building set on the interval
    pub pbs: PartialBuildingSet,
    /// `zeta` restricted to the block of `g`: pairs (member of H, image in
    /// the interval as an interval id)
    pub zeta: Vec<(Elem, Elem)>,
}

/// Compute the local partial building set at `(y, g)`; `g` must belong to
/// `F^+(y)`.
pub fn local_building_set(
    bl: &BlownSemilattice,
    y: Elem,
    g: Elem,
) -> Result<LocalBuildingData, BlowupError> {
    let pbs = &bl.pbs;
    let lat = &pbs.lat;
    let fp = factors_plus(bl, y);
    let z_g = fp.z_of(g).ok_or(BlowupError::UnknownElement(g))?;
    let (interval, old_ids) = lat.interval_lattice(z_g, g);
    let mut new_id: HashMap<Elem, Elem> = HashMap::new();
    for (i, &o) in old_ids.iter().enumerate() {
        new_id.insert(o, i);
    }
    let min_in_fplus_above = |p: Elem| -> Option<Elem> {
        let above: Vec<Elem> = fp
            .fplus
            .iter()
            .copied()
            .filter(|&f| lat.le(p, f))
            .collect();
        let mins: Vec<Elem> = above
            .iter()
            .copied()
            .filter(|&f| above.iter().all(|&f2| f2 == f || !lat.lt(f2, f)))
            .collect();
        if mins.len() == 1 {
            Some(mins[0])
        } else {
            None
        }
    };
    // zeta on closed-star vertices of supp(y) whose block is g
    let supp_mask = bl.supp(y);
    let core = pbs.core();
    let mut zeta: Vec<(Elem, Elem)> = Vec::new();
    let mut h_members: Vec<Elem> = Vec::new();
    for (i, &p) in pbs.h.iter().enumerate() {
        if !pbs.is_nested(supp_mask | 1 << i) {
            continue;
        }
        let p_hat = min_in_fplus_above(p).expect("unique minimum exists");
        if p_hat != g {
            continue;
        }
        let image = lat.join2(p, fp.z_of(p_hat).unwrap());
        debug_assert!(lat.lt(z_g, image) && lat.le(image, g));
        let iv_image = *new_id.get(&image).expect("image lies in the interval");
        zeta.push((p, iv_image));
        if interval.rank(iv_image) > 1 && core.contains(&p) {
            h_members.push(iv_image);
        }
    }
    // the ambient building set on the interval, from the same construction
    // applied to G (G-nestedness lives in the original lattice)
    let g_members: Vec<Elem> = {
        let full = PartialBuildingSet::full(lat.clone(), pbs.g.clone());
        let f_mask: u64 = fp
            .fplus
            .iter()
            .filter_map(|&f| full.h_index(f))
            .map(|i| 1u64 << i)
            .sum();
        let mut members: Vec<Elem> = Vec::new();
        for (i, &p) in full.h.iter().enumerate() {
            if !full.is_nested(f_mask | 1 << i) {
                continue;
            }
            match min_in_fplus_above(p) {
                Some(p_hat) if p_hat == g => {}
                _ => continue,
            }
            let image = lat.join2(p, z_g);
            if let Some(&iv) = new_id.get(&image) {
                if interval.rank(iv) >= 1 {
                    members.push(iv);
                }
            }
        }
        members.extend(interval.atoms().iter().copied());
        members.push(interval.top());
        members.sort_unstable();
        members.dedup();
        members
    };
    let g_loc = Arc::new(BuildingSet::with_default_order(&interval, g_members));
    let iv_arc = Arc::new(interval);
    h_members.sort_unstable();
    h_members.dedup();
    let local_pbs = PartialBuildingSet::new(iv_arc.clone(), g_loc, &h_members)?;
    Ok(LocalBuildingData {
        interval: (*iv_arc).clone(),
        old_ids,
        pbs: local_pbs,
        zeta,
    })
}

/// Standard fixtures: lattices with building sets, shared by tests, the
/// acceptance suite, and examples.
pub mod fixtures {
    use super::*;
    use crate::matroid::fixtures as mf;

    pub struct Fixture {
        pub lat: Arc<GeometricLattice>,
        pub g: Arc<BuildingSet>,
    }

    impl Fixture {
        pub fn minimal(m: &crate::matroid::Matroid) -> Fixture {
            let lat = Arc::new(m.lattice_of_flats().expect("fixture matroid"));
            let g = Arc::new(BuildingSet::minimal(&lat));
            Fixture { lat, g }
        }

        pub fn maximal(m: &crate::matroid::Matroid) -> Fixture {
            let lat = Arc::new(m.lattice_of_flats().expect("fixture matroid"));
            let g = Arc::new(BuildingSet::maximal(&lat));
            Fixture { lat, g }
        }

        /// Partial building set from core labels (e.g. "1hat", "124").
        pub fn pbs(&self, core_labels: &[&str]) -> PartialBuildingSet {
            let core: Vec<Elem> = core_labels
                .iter()
                .map(|&l| self.elem_by_label(l))
                .collect();
            PartialBuildingSet::new(self.lat.clone(), self.g.clone(), &core)
                .expect("fixture cores are order filters")
        }

        pub fn elem_by_label(&self, label: &str) -> Elem {
            (0..self.lat.len())
                .find(|&x| self.lat.label(x) == label)
                .unwrap_or_else(|| panic!("no element labelled {label}"))
        }

        /// All partial building sets of this fixture (order filters of the
        /// non-atom part of G).
        pub fn all_pbs(&self) -> Vec<PartialBuildingSet> {
            let core_pool: Vec<Elem> = self
                .g
                .members
                .iter()
                .copied()
                .filter(|&m| self.lat.rank(m) > 1)
                .collect();
            let n = core_pool.len();
            assert!(n <= 20, "core pool too large to enumerate");
            let mut out = Vec::new();
            'subsets: for s in 0u64..(1 << n) {
                let core: Vec<Elem> = (0..n)
                    .filter(|&i| s >> i & 1 == 1)
                    .map(|i| core_pool[i])
                    .collect();
                for &p in &core {
                    for &q in &core_pool {
                        if self.lat.le(p, q) && !core.contains(&q) {
                            continue 'subsets;
                        }
                    }
                }
                out.push(
                    PartialBuildingSet::new(self.lat.clone(), self.g.clone(), &core)
                        .expect("order filter"),
                );
            }
            out
        }
    }

    pub fn m5_min() -> Fixture {
        Fixture::minimal(&mf::m5())
    }

    pub fn u23_min() -> Fixture {
        Fixture::minimal(&mf::u23())
    }

    pub fn pi4_min() -> Fixture {
        Fixture::minimal(&mf::complete_graph(4))
    }

    pub fn pi4_max() -> Fixture {
        Fixture::maximal(&mf::complete_graph(4))
    }

    pub fn boolean3_max() -> Fixture {
        Fixture::maximal(&mf::boolean3())
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use std::collections::BTreeSet;

    fn labels(pbs: &PartialBuildingSet, mask: u64) -> BTreeSet<String> {
        (0..pbs.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| pbs.label(i))
            .collect()
    }

    fn mask_of(pbs: &PartialBuildingSet, labels: &[&str]) -> u64 {
        let mut m = 0u64;
        for &l in labels {
            let i = (0..pbs.len())
                .find(|&i| pbs.label(i) == l)
                .unwrap_or_else(|| panic!("no H member {l}"));
            m |= 1 << i;
        }
        m
    }

    #[test]
    fn u23_blowup_at_top() {
        // Oracle: the definition, spelled out by hand for U_{2,3}.
        let fx = u23_min();
        let sl = fx.lat.semilattice();
        let (blown, nodes, pi) = combinatorial_blowup(sl, fx.lat.top()).unwrap();
        assert_eq!(blown.len(), 8);
        let kept = nodes
            .iter()
            .filter(|n| matches!(n, BlowNode::Kept(_)))
            .count();
        assert_eq!(kept, 4);
        assert_eq!(blown.poset().rank_profile(), vec![1, 4, 3]);
        // blowdown: kept map to themselves, pairs to p v x
        for (i, n) in nodes.iter().enumerate() {
            match *n {
                BlowNode::Kept(x) => assert_eq!(pi[i], x),
                BlowNode::Pair(x) => {
                    assert_eq!(pi[i], sl.join2(x, fx.lat.top()).unwrap())
                }
            }
        }
    }

    #[test]
    fn m5_blowup_size_oracle() {
        // |Bl_p(L)| = |{x : x not >= p}| + |L_(p)|, computed independently.
        let fx = m5_min();
        let lat = &fx.lat;
        let sl = lat.semilattice();
        let p = lat.top();
        let keep = (0..lat.len()).filter(|&x| !lat.le(p, x)).count();
        let pairs = (0..lat.len())
            .filter(|&x| !lat.le(p, x) && sl.join2(x, p).is_some())
            .count();
        assert_eq!((keep, pairs), (12, 12));
        let (blown, _, _) = combinatorial_blowup(sl, p).unwrap();
        assert_eq!(blown.len(), 24);
    }

    #[test]
    fn blowup_at_bottom_rejected() {
        let fx = u23_min();
        assert!(matches!(
            combinatorial_blowup(fx.lat.semilattice(), fx.lat.bottom()),
            Err(BlowupError::BlowupAtBottom)
        ));
    }

    #[test]
    fn blowup_at_atom_of_full_blowup_is_isomorphic() {
        // After the whole building set is blown up, blowing up an atom
        // changes nothing (up to the canonical relabelling of that atom).
        for fx in [u23_min(), m5_min()] {
            let pbs = PartialBuildingSet::full(fx.lat.clone(), fx.g.clone());
            let bl = BlownSemilattice::build(&pbs).unwrap();
            let atom = bl.atom_of_h(pbs.len() - 1);
            let (blown, nodes, _) = combinatorial_blowup(bl.semilattice(), atom).unwrap();
            assert_eq!(blown.len(), bl.len());
            // canonical relabelling: kept x -> x, pair (p,x) -> p v x
            let mut map = vec![usize::MAX; blown.len()];
            for (i, n) in nodes.iter().enumerate() {
                match *n {
                    BlowNode::Kept(x) => map[i] = x,
                    BlowNode::Pair(x) => {
                        map[i] = bl.semilattice().join2(x, atom).unwrap()
                    }
                }
            }
            let mut seen = BTreeSet::new();
            for &m in &map {
                assert!(seen.insert(m));
            }
            for a in 0..blown.len() {
                for b in 0..blown.len() {
                    assert_eq!(blown.le(a, b), bl.le(map[a], map[b]));
                }
            }
        }
    }

    #[test]
    fn build_semilattice_atoms_only_is_identity() {
        let fx = m5_min();
        let pbs = PartialBuildingSet::atoms_only(fx.lat.clone(), fx.g.clone());
        let bl = BlownSemilattice::build(&pbs).unwrap();
        assert_eq!(bl.len(), fx.lat.len());
        assert_eq!(bl.poset().rank_profile(), fx.lat.poset().rank_profile());
    }

    #[test]
    fn order_independence_of_build() {
        // two valid reverse linear extensions of the full M5 core
        let fx = m5_min();
        let pbs = PartialBuildingSet::full(fx.lat.clone(), fx.g.clone());
        let core = pbs.core();
        assert_eq!(core.len(), 3);
        // 1hat must stay first; 124 and 135 commute
        let swapped = vec![core[0], core[2], core[1]];
        let a = BlownSemilattice::build_with_order(&pbs, &core).unwrap();
        let b = BlownSemilattice::build_with_order(&pbs, &swapped).unwrap();
        assert_eq!(a.len(), b.len());
        for x in 0..a.len() {
            let y = b.elem_by_supp(a.supp(x)).expect("same support sets");
            for x2 in 0..a.len() {
                let y2 = b.elem_by_supp(a.supp(x2)).unwrap();
                assert_eq!(a.le(x, x2), b.le(y, y2));
            }
            assert_eq!(a.pi_lm(x), b.pi_lm(y));
        }
    }

    #[test]
    fn join_absent_after_blowup() {
        // in Bl_1hat(U23): atoms 1 and 2 no longer have a join
        let fx = u23_min();
        let pbs = fx.pbs(&["1hat"]);
        let bl = BlownSemilattice::build(&pbs).unwrap();
        let m = mask_of(&pbs, &["1", "2"]);
        assert!(bl.join_h_mask(m).is_none());
        // the empty join is the bottom
        assert_eq!(bl.join_h_mask(0), Some(bl.bottom()));
    }

    #[test]
    fn nested_complex_equals_atomic_complex() {
        // Ka(L(M,H)) = N(M,H), exhaustively over subsets of H.
        for fx in [m5_min(), u23_min(), pi4_min(), boolean3_max()] {
            for pbs in fx.all_pbs() {
                let bl = BlownSemilattice::build(&pbs).unwrap();
                let n = pbs.len();
                assert!(n <= 20);
                for mask in 0u64..(1 << n) {
                    assert_eq!(
                        pbs.is_nested(mask),
                        bl.is_atomic_face(mask),
                        "mismatch at {:?}",
                        labels(&pbs, mask)
                    );
                }
            }
        }
    }

    #[test]
    fn m5_nested_examples() {
        let fx = m5_min();
        let h124 = fx.pbs(&["1hat", "124"]);
        // {2,4} joins to 124 in H: not nested
        assert!(!h124.is_nested(mask_of(&h124, &["2", "4"])));
        // {1,3,5}: joins 135 and pairwise joins all outside H
        assert!(h124.is_nested(mask_of(&h124, &["1", "3", "5"])));
        // singletons are nested
        for i in 0..h124.len() {
            assert!(h124.is_nested(1 << i));
        }
    }

    #[test]
    fn m5_link_of_top_facets() {
        // facet lists of the link of 1hat, frozen from the figure
        let fx = m5_min();
        let cases: Vec<(&[&str], Vec<Vec<&str>>)> = vec![
            (
                &["1hat"][..],
                vec![
                    vec!["1", "2", "4"],
                    vec!["1", "3", "5"],
                    vec!["2", "3"],
                    vec!["2", "5"],
                    vec!["3", "4"],
                    vec!["4", "5"],
                ],
            ),
            (
                &["1hat", "124"][..],
                vec![
                    vec!["1", "3", "5"],
                    vec!["124", "1"],
                    vec!["124", "2"],
                    vec!["124", "4"],
                    vec!["2", "3"],
                    vec!["2", "5"],
                    vec!["3", "4"],
                    vec!["4", "5"],
                ],
            ),
            (
                &["1hat", "135"][..],
                vec![
                    vec!["1", "2", "4"],
                    vec!["135", "1"],
                    vec!["135", "3"],
                    vec!["135", "5"],
                    vec!["2", "3"],
                    vec!["2", "5"],
                    vec!["3", "4"],
                    vec!["4", "5"],
                ],
            ),
            (
                &["1hat", "124", "135"][..],
                vec![
                    vec!["124", "1"],
                    vec!["124", "2"],
                    vec!["124", "4"],
                    vec!["135", "1"],
                    vec!["135", "3"],
                    vec!["135", "5"],
                    vec!["2", "3"],
                    vec!["2", "5"],
                    vec!["3", "4"],
                    vec!["4", "5"],
                ],
            ),
        ];
        for (core, expected) in cases {
            let pbs = fx.pbs(core);
            let nc = NestedComplex::new(pbs.clone());
            let top = mask_of(&pbs, &["1hat"]);
            // link of 1hat: facets containing it, with 1hat removed
            let link: BTreeSet<BTreeSet<String>> = nc
                .facets()
                .iter()
                .filter(|&&f| f & top != 0)
                .map(|&f| labels(&pbs, f & !top))
                .collect();
            let expect: BTreeSet<BTreeSet<String>> = expected
                .iter()
                .map(|f| f.iter().map(|s| s.to_string()).collect())
                .collect();
            assert_eq!(link, expect, "core {:?}", core);
            // 1hat is a cone vertex: every facet contains it
            assert!(nc.facets().iter().all(|&f| f & top != 0));
        }
    }

    #[test]
    fn pi_examples() {
        let fx = m5_min();
        let g_full = PartialBuildingSet::full(fx.lat.clone(), fx.g.clone());
        let h1 = fx.pbs(&["1hat"]);
        let h124 = fx.pbs(&["1hat", "124"]);
        let bl_g = BlownSemilattice::build(&g_full).unwrap();
        let bl_h1 = BlownSemilattice::build(&h1).unwrap();
        let bl_h124 = BlownSemilattice::build(&h124).unwrap();
        // vertex 135 in N(M,G) -> 2-simplex {1,3,5} in N(M,{1hat})
        let m135 = mask_of(&g_full, &["135"]);
        let out = pi_map(&bl_g, &bl_h1, m135).unwrap();
        assert_eq!(labels(&h1, out), labels(&h1, mask_of(&h1, &["1", "3", "5"])));
        // {2,124}: preserved down to {1hat,124}, then opens up to {1,2,4}
        let m = mask_of(&g_full, &["2", "124"]);
        let step1 = pi_map(&bl_g, &bl_h124, m).unwrap();
        assert_eq!(
            labels(&h124, step1),
            labels(&h124, mask_of(&h124, &["2", "124"]))
        );
        let step2 = pi_map(&bl_h124, &bl_h1, step1).unwrap();
        assert_eq!(labels(&h1, step2), labels(&h1, mask_of(&h1, &["1", "2", "4"])));
        // sets avoiding the blown-down elements are preserved
        let m23 = mask_of(&g_full, &["2", "3"]);
        assert_eq!(
            labels(&h1, pi_map(&bl_g, &bl_h1, m23).unwrap()),
            labels(&g_full, m23)
        );
    }

    #[test]
    fn eta_examples() {
        let fx = m5_min();
        let atoms = PartialBuildingSet::atoms_only(fx.lat.clone(), fx.g.clone());
        let g_full = PartialBuildingSet::full(fx.lat.clone(), fx.g.clone());
        let h124 = fx.pbs(&["1hat", "124"]);
        // {1,2,4} and {2,4} both contract to {124}
        for set in [vec!["1", "2", "4"], vec!["2", "4"]] {
            let m = mask_of(&atoms, &set);
            let up = eta_map(&atoms, &g_full, m).unwrap();
            assert_eq!(
                labels(&g_full, up),
                labels(&g_full, mask_of(&g_full, &["124"]))
            );
            let up2 = eta_map(&atoms, &h124, m).unwrap();
            assert_eq!(labels(&h124, up2), labels(&h124, mask_of(&h124, &["124"])));
        }
        // {2,3} is preserved
        let m23 = mask_of(&atoms, &["2", "3"]);
        assert_eq!(
            labels(&g_full, eta_map(&atoms, &g_full, m23).unwrap()),
            labels(&atoms, m23)
        );
        // subsets of the core are fixed by eta
        let mc = mask_of(&h124, &["1hat", "124"]);
        assert_eq!(
            eta_map(&h124, &g_full, mc).unwrap(),
            mask_of(&g_full, &["1hat", "124"])
        );
        // non-nested input rejected
        let bad = mask_of(&h124, &["2", "4"]);
        assert!(matches!(
            eta_map(&h124, &g_full, bad),
            Err(BlowupError::NotNested)
        ));
    }

    #[test]
    fn eta_preserves_nested_and_antichains() {
        let fx = m5_min();
        let all = fx.all_pbs();
        for from in &all {
            for to in &all {
                if !to.extends(from) || from.core() == to.core() {
                    continue;
                }
                for mask in 0u64..(1 << from.len()) {
                    if !from.is_nested(mask) {
                        continue;
                    }
                    let up = eta_map(from, to, mask).unwrap();
                    assert!(to.is_nested(up), "eta left the nested complex");
                    let elems = from.mask_elems(mask);
                    let is_anti = |es: &[Elem]| {
                        es.iter().all(|&a| {
                            es.iter()
                                .all(|&b| a == b || (!fx.lat.le(a, b) && !fx.lat.le(b, a)))
                        })
                    };
                    if is_anti(&elems) {
                        assert!(is_anti(&to.mask_elems(up)));
                    }
                }
            }
        }
    }

    #[test]
    fn pi_lands_in_nested() {
        let fx = m5_min();
        let all = fx.all_pbs();
        let blown: Vec<BlownSemilattice> = all
            .iter()
            .map(|p| BlownSemilattice::build(p).unwrap())
            .collect();
        for (i, from) in all.iter().enumerate() {
            for (j, to) in all.iter().enumerate() {
                if !from.extends(to) || from.core() == to.core() {
                    continue;
                }
                for mask in 0u64..(1 << from.len()) {
                    if !from.is_nested(mask) {
                        continue;
                    }
                    let down = pi_map(&blown[i], &blown[j], mask).unwrap();
                    assert!(to.is_nested(down));
                }
            }
        }
    }

    #[test]
    fn blowdown_fibres_connected_and_initial() {
        let fx = m5_min();
        let h1 = fx.pbs(&["1hat"]);
        let h124 = fx.pbs(&["1hat", "124"]);
        let bl_h1 = BlownSemilattice::build(&h1).unwrap();
        let bl_h124 = BlownSemilattice::build(&h124).unwrap();
        let pi = blowdown_map(&bl_h124, &bl_h1).unwrap();
        // surjective
        let image: BTreeSet<Elem> = pi.iter().copied().collect();
        assert_eq!(image.len(), bl_h1.len());
        // order preserving
        for a in 0..bl_h124.len() {
            for b in 0..bl_h124.len() {
                if bl_h124.le(a, b) {
                    assert!(bl_h1.le(pi[a], pi[b]));
                }
            }
        }
        for y in 0..bl_h1.len() {
            let fibre: Vec<Elem> = (0..bl_h124.len()).filter(|&x| pi[x] == y).collect();
            assert!(!fibre.is_empty());
            // unique minimum
            let mins: Vec<Elem> = fibre
                .iter()
                .copied()
                .filter(|&x| fibre.iter().all(|&w| w == x || !bl_h124.poset().lt(w, x)))
                .collect();
            assert_eq!(mins.len(), 1, "fibre over {} has a unique minimum", y);
            // initial: preimage of the principal ideal is the union of
            // principal ideals over the fibre
            let mut pre: BTreeSet<Elem> = BTreeSet::new();
            for x in 0..bl_h124.len() {
                if bl_h1.le(pi[x], y) {
                    pre.insert(x);
                }
            }
            let mut cover: BTreeSet<Elem> = BTreeSet::new();
            for &f in &fibre {
                cover.extend(bl_h124.poset().down_set(f).iter());
            }
            assert_eq!(pre, cover);
        }
    }

    #[test]
    fn blowdown_factor_case_split() {
        // Factors blow down by cases: collapse to {p} over p itself;
        // unchanged when the new atom is absent from the support; when the
        // new atom is present, members absorbed under p drop out, leaving
        // the maximal elements (the literal two-case statement fails for
        // e.g. supp(y) = {1, 124, 1hat} in L(M5, {1hat,124})).
        let fx = m5_min();
        for (small, big) in [
            (vec!["1hat"], vec!["1hat", "124"]),
            (vec!["1hat", "124"], vec!["1hat", "124", "135"]),
        ] {
            let h = fx.pbs(&small);
            let hp = fx.pbs(&big);
            let p = *hp
                .core()
                .iter()
                .find(|&&c| !h.core().contains(&c))
                .unwrap();
            let bl_h = BlownSemilattice::build(&h).unwrap();
            let bl_hp = BlownSemilattice::build(&hp).unwrap();
            let pi = blowdown_map(&bl_hp, &bl_h).unwrap();
            let p_idx = hp.h_index(p).unwrap();
            for y in 0..bl_hp.len() {
                if y == bl_hp.bottom() {
                    continue;
                }
                let down = pi[y];
                if down == bl_h.bottom() {
                    continue;
                }
                let f_down = factors_in_blowup(&bl_h, down);
                let f_up = factors_in_blowup(&bl_hp, y);
                if bl_h.surviving(p) == Some(down) {
                    assert_eq!(f_down, vec![p], "y = {}", bl_hp.label(y));
                } else if bl_hp.supp(y) >> p_idx & 1 == 0 {
                    assert_eq!(f_down, f_up, "y = {}", bl_hp.label(y));
                } else {
                    // drop the support atoms strictly below p, re-join
                    let mut kept_mask = 0u64;
                    for (i, &m) in hp.h.iter().enumerate() {
                        if bl_hp.supp(y) >> i & 1 == 1 && !fx.lat.lt(m, p) {
                            kept_mask |= 1 << i;
                        }
                    }
                    let y2 = bl_hp.join_h_mask(kept_mask).expect("subset of a face");
                    assert_eq!(
                        f_down,
                        factors_in_blowup(&bl_hp, y2),
                        "y = {}",
                        bl_hp.label(y)
                    );
                }
            }
        }
    }

    #[test]
    fn factors_plus_examples() {
        let fx = m5_min();
        let g_min = PartialBuildingSet::full(fx.lat.clone(), fx.g.clone());
        let bl = BlownSemilattice::build(&g_min).unwrap();
        // y = bottom: F+ = {1hat}, z(1hat) = bottom
        let fp = factors_plus(&bl, bl.bottom());
        assert_eq!(fp.fplus, vec![fx.lat.top()]);
        assert_eq!(fp.z, vec![fx.lat.bottom()]);
        // y = join of atoms 2,3 in L(M,G): F+ = {2,3,1hat}, z(1hat) = flat 23
        let m23 = mask_of(&g_min, &["2", "3"]);
        let y = bl.join_h_mask(m23).unwrap();
        let fp = factors_plus(&bl, y);
        let lbls: BTreeSet<String> = fp.fplus.iter().map(|&f| fx.lat.label(f)).collect();
        assert_eq!(
            lbls,
            ["2", "3", "1hat"].iter().map(|s| s.to_string()).collect()
        );
        assert_eq!(fp.z_of(fx.lat.top()), Some(fx.elem_by_label("23")));
        // two routes agree: eta-based and direct factors in the blowup
        for y in 0..bl.len() {
            if y == bl.bottom() {
                continue;
            }
            let via_eta: BTreeSet<Elem> = factors_plus(&bl, y)
                .fplus
                .iter()
                .copied()
                .filter(|&f| f != fx.lat.top())
                .collect();
            let direct: BTreeSet<Elem> = factors_in_blowup(&bl, y).into_iter().collect();
            let mut d = direct.clone();
            if !via_eta.contains(&fx.lat.top()) {
                d.remove(&fx.lat.top());
            }
            assert_eq!(via_eta, d, "factors mismatch at y={}", y);
        }
    }

    #[test]
    fn local_building_set_trivial_case() {
        let fx = m5_min();
        let h1 = fx.pbs(&["1hat"]);
        let bl = BlownSemilattice::build(&h1).unwrap();
        // y = bottom, g = 1hat: interval is all of L, H_loc = H
        let data = local_building_set(&bl, bl.bottom(), fx.lat.top()).unwrap();
        assert_eq!(data.interval.len(), fx.lat.len());
        let core_lbls: BTreeSet<String> = data
            .pbs
            .core()
            .iter()
            .map(|&x| data.interval.label(x))
            .collect();
        assert_eq!(core_lbls, ["1hat"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn partition6_local_intervals() {
        // the three-interval decomposition, at partition-lattice-of-[6]
        // scale: p = 12345|6, q = 123|4|5|6, y = (p, q)
        let m = crate::matroid::fixtures::complete_graph(6);
        let fx = Fixture::minimal(&m);
        let lat = &fx.lat;
        let edge = |u: usize, v: usize| format!("{}-{}", u.min(v), u.max(v));
        let flat_of = |edges: &[String]| -> Elem {
            let mask: u64 = lat
                .atom_labels()
                .iter()
                .enumerate()
                .filter(|(_, l)| edges.contains(l))
                .map(|(i, _)| 1u64 << i)
                .sum();
            lat.elem_by_supp(mask).expect("flat exists")
        };
        let block5: Vec<String> = (1..=5)
            .flat_map(|u| (u + 1..=5).map(move |v| edge(u, v)))
            .collect();
        let p = flat_of(&block5);
        let q = flat_of(&[edge(1, 2), edge(1, 3), edge(2, 3)]);
        let pbs =
            PartialBuildingSet::new(fx.lat.clone(), fx.g.clone(), &[lat.top(), p]).unwrap();
        let bl = BlownSemilattice::build(&pbs).unwrap();
        // y = (p, q): support is the atoms of q plus the new atom p
        let mut mask = 0u64;
        for (i, &h) in pbs.h.iter().enumerate() {
            if h == p || (lat.le(h, q) && lat.rank(h) == 1) {
                mask |= 1 << i;
            }
        }
        let y = bl.elem_by_supp(mask).expect("(p,q) exists");
        let fp = factors_plus(&bl, y);
        let fpl: BTreeSet<Elem> = fp.fplus.iter().copied().collect();
        assert_eq!(
            fpl,
            [q, p, lat.top()].iter().copied().collect::<BTreeSet<_>>()
        );
        // interval [bottom, q]: local H = atoms only; local G adds q
        let dq = local_building_set(&bl, y, q).unwrap();
        assert_eq!(dq.interval.top_rank(), 2);
        assert!(dq.pbs.core().is_empty());
        assert_eq!(dq.pbs.len(), 3); // atoms 12, 13, 23
        assert_eq!(dq.pbs.g.members.len(), 4); // q and its three atoms
        // interval [q, p]: local H-core is the image of p (the top)
        let dp = local_building_set(&bl, y, p).unwrap();
        assert_eq!(dp.interval.top_rank(), lat.rank(p) - lat.rank(q));
        let core: Vec<Elem> = dp.pbs.core();
        assert_eq!(core.len(), 1);
        assert_eq!(core[0], dp.interval.top());
        // atoms of [q,p] include q v 45, which is not in G
        let q45 = {
            let a45 = (0..lat.n_atoms())
                .find(|&i| lat.atom_labels()[i] == edge(4, 5))
                .map(|i| lat.atom_elem(i))
                .unwrap();
            lat.join2(q, a45)
        };
        assert_eq!(dp.interval.top_rank(), 2);
        assert!(dp.old_ids.contains(&q45));
        assert!(!fx.g.contains(q45));
        // interval [p, 1hat]: rank one, both local sets are just the top
        let d1 = local_building_set(&bl, y, lat.top()).unwrap();
        assert_eq!(d1.interval.top_rank(), 1);
        assert_eq!(d1.pbs.len(), d1.interval.atoms().len());
    }

    #[test]
    fn nested_complex_export() {
        let fx = u23_min();
        let pbs = PartialBuildingSet::full(fx.lat.clone(), fx.g.clone());
        let nc = NestedComplex::new(pbs);
        let facets = nc.facet_labels();
        // faces: 1hat with each single atom
        assert_eq!(facets.len(), 3);
        for f in facets {
            assert_eq!(f.len(), 2);
            assert!(f.contains(&"1hat".to_string()));
        }
    }
}
