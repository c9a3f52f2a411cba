//! The bigraded differential graded algebra of a geometric lattice and a
//! partial building set: presentation, Groebner basis, monomial basis,
//! differential, bigraded dimension table, blowup morphisms, cohomology,
//! and the dual complex.
//!
//! Two variants share one engine: the full algebra on all generators, and
//! the reduced algebra obtained by killing `e` of the maximum (the
//! generator of the maximum appears in no relation, so the reduced algebra
//! is spanned by the basis monomials avoiding it).

use crate::algebra::{Element, Monomial, NormalFormEngine};
use crate::blowup::{BlownSemilattice, PartialBuildingSet};
use crate::os::OsAlgebra;
use crate::poset::Elem;
use crate::ratmat::QMatrix;
use crate::Rat;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("the reduced variant requires the maximum element in H")]
    OneHatMissing,
}

/// Which algebra: the full one, or the quotient by `e` of the maximum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Full,
    Reduced,
}

pub struct LerayModel {
    pub bl: Arc<BlownSemilattice>,
    pub os: Arc<OsAlgebra>,
    engine: NormalFormEngine,
    /// index of the maximum element inside `H` (when present, 0 by the
    /// reverse linear extension)
    top_idx: Option<usize>,
    /// all standard monomials, grouped by bidegree
    basis: BTreeMap<(usize, usize), Vec<Monomial>>,
    /// positions within each bidegree
    index: HashMap<Monomial, usize>,
}

impl LerayModel {
    pub fn new(bl: Arc<BlownSemilattice>) -> Self {
        let os = Arc::new(OsAlgebra::new(bl.clone()));
        Self::with_os(bl, os)
    }

    pub fn with_os(bl: Arc<BlownSemilattice>, os: Arc<OsAlgebra>) -> Self {
        let pbs = &bl.pbs;
        let lat = &pbs.lat;
        let n = pbs.len();
        let mut gens: Vec<Element> = Vec::new();
        // (i): e_A x_B over bipartitions of minimal non-nested sets
        for &v in &os.nonfaces {
            let bits: Vec<usize> = (0..n).filter(|&i| v >> i & 1 == 1).collect();
            for split in 0u64..(1 << bits.len()) {
                let mut a = 0u64;
                let mut b = 0u64;
                for (k, &i) in bits.iter().enumerate() {
                    if split >> k & 1 == 1 {
                        a |= 1 << i;
                    } else {
                        b |= 1 << i;
                    }
                }
                let mut m = Monomial::e_set(a);
                for i in (0..n).filter(|&i| b >> i & 1 == 1) {
                    let (m2, s) = m.mul(&Monomial::x_single(i, 1)).expect("x never clashes");
                    debug_assert_eq!(s, 1);
                    m = m2;
                }
                gens.push(Element::monomial(m, Rat::one()));
            }
        }
        // (ii): boundaries of local circuits
        for &c in &os.circuits {
            gens.push(Element::monomial(Monomial::e_set(c), Rat::one()).boundary());
        }
        // (iii'): e_S x_T c_g^d over nested antichains S u T below g
        let antichains = nested_antichains(pbs);
        for &u in &antichains {
            let join = lat
                .join_of(&pbs.mask_elems(u))
                .expect("joins exist in a lattice");
            for (gi, &g) in pbs.h.iter().enumerate() {
                if !lat.lt(join, g) {
                    continue;
                }
                let d = lat.dist(join, g) as u32;
                let cg = c_poly(pbs, gi);
                let mut cgd = Element::one();
                for _ in 0..d {
                    cgd = cgd.mul(&cg);
                }
                let bits: Vec<usize> = (0..n).filter(|&i| u >> i & 1 == 1).collect();
                for split in 0u64..(1 << bits.len()) {
                    let mut s_mask = 0u64;
                    let mut t_mask = 0u64;
                    for (k, &i) in bits.iter().enumerate() {
                        if split >> k & 1 == 1 {
                            s_mask |= 1 << i;
                        } else {
                            t_mask |= 1 << i;
                        }
                    }
                    let mut m = Monomial::e_set(s_mask);
                    for i in (0..n).filter(|&i| t_mask >> i & 1 == 1) {
                        let (m2, sg) =
                            m.mul(&Monomial::x_single(i, 1)).expect("x never clashes");
                        debug_assert_eq!(sg, 1);
                        m = m2;
                    }
                    gens.push(Element::monomial(m, Rat::one()).mul(&cgd));
                }
            }
        }
        let engine = NormalFormEngine::new(gens);
        let top_idx = pbs.h_index(lat.top());
        // monomial basis per the combinatorial conditions
        let mut basis: BTreeMap<(usize, usize), Vec<Monomial>> = BTreeMap::new();
        let core_mask: u64 = pbs
            .h
            .iter()
            .enumerate()
            .filter(|&(_, &m)| lat.rank(m) > 1)
            .map(|(i, _)| 1u64 << i)
            .sum();
        for level in &os.nbc {
            for &s_mask in level {
                // subsets T of the core with S u T nested
                let mut stack = vec![(0u64, 0usize)];
                while let Some((t_mask, lo)) = stack.pop() {
                    emit_basis_monomials(pbs, s_mask, t_mask, &mut basis);
                    for i in lo..n {
                        if core_mask >> i & 1 == 0 || t_mask >> i & 1 == 1 {
                            continue;
                        }
                        let t2 = t_mask | 1 << i;
                        if pbs.is_nested(s_mask | t2) {
                            stack.push((t2, i + 1));
                        }
                    }
                }
            }
        }
        for v in basis.values_mut() {
            v.sort();
        }
        let mut index = HashMap::new();
        for v in basis.values() {
            for (k, m) in v.iter().enumerate() {
                index.insert(m.clone(), k);
            }
        }
        LerayModel {
            bl,
            os,
            engine,
            top_idx,
            basis,
            index,
        }
    }

    pub fn engine(&self) -> &NormalFormEngine {
        &self.engine
    }

    pub fn pbs(&self) -> &PartialBuildingSet {
        &self.bl.pbs
    }

    /// Does the monomial survive in the given variant?
    fn in_variant(&self, m: &Monomial, variant: Variant) -> bool {
        match variant {
            Variant::Full => true,
            Variant::Reduced => {
                let t = self.top_idx.expect("reduced variant requires the top");
                m.e >> t & 1 == 0
            }
        }
    }

    /// Basis monomials of one bidegree.
    pub fn basis(&self, variant: Variant, i: usize, j: usize) -> Vec<Monomial> {
        self.basis
            .get(&(i, j))
            .map(|v| {
                v.iter()
                    .filter(|m| self.in_variant(m, variant))
                    .cloned()
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn dim(&self, variant: Variant, i: usize, j: usize) -> usize {
        self.basis(variant, i, j).len()
    }

    /// The bigraded dimension table, as `(i, j) -> dim`, nonzero entries.
    pub fn bigraded_table(&self, variant: Variant) -> BTreeMap<(usize, usize), usize> {
        let mut t = BTreeMap::new();
        for (&(i, j), _) in self.basis.iter() {
            let d = self.dim(variant, i, j);
            if d > 0 {
                t.insert((i, j), d);
            }
        }
        t
    }

    /// Check the reduced-variant precondition.
    pub fn require_top(&self) -> Result<(), ModelError> {
        if self.top_idx.is_some() {
            Ok(())
        } else {
            Err(ModelError::OneHatMissing)
        }
    }

    pub fn normal_form(&self, a: &Element) -> Element {
        self.engine.normal_form(a)
    }

    /// Coordinates of a normal-form element in the bidegree basis.
    pub fn coords(&self, a: &Element, variant: Variant, i: usize, j: usize) -> Vec<Rat> {
        let basis = self.basis(variant, i, j);
        let mut v = vec![Rat::zero(); basis.len()];
        for (m, c) in &a.terms {
            assert_eq!(m.bidegree(), (i, j), "bidegree mismatch");
            let k = self.index.get(m).copied().expect("monomial is standard");
            // index is within the Full list; translate when reduced
            if self.in_variant(m, variant) {
                let pos = match variant {
                    Variant::Full => k,
                    Variant::Reduced => basis
                        .binary_search(m)
                        .expect("reduced basis is sorted"),
                };
                v[pos] = c.clone();
            } else {
                panic!("element leaves the reduced subspace");
            }
        }
        v
    }

    /// Matrix of `d : B^{i,j} -> B^{i+2, j-1}`.
    pub fn differential_matrix(&self, variant: Variant, i: usize, j: usize) -> QMatrix {
        let source = self.basis(variant, i, j);
        let target_dim = self.dim(variant, i + 2, j.wrapping_sub(1));
        if j == 0 {
            return QMatrix::zeros(target_dim, source.len());
        }
        let mut m = QMatrix::zeros(target_dim, source.len());
        for (col, mono) in source.iter().enumerate() {
            let img = self.normal_form(
                &Element::monomial(mono.clone(), Rat::one()).differential(),
            );
            let coords = self.coords(&img, variant, i + 2, j - 1);
            for (row, c) in coords.into_iter().enumerate() {
                m[(row, col)] = c;
            }
        }
        m
    }

    /// Cohomology dimensions: the complex in line `k` is
    /// `B^{0,k} -> B^{2,k-1} -> ... -> B^{2k,0}` with position `p = i/2`;
    /// returns `(p, k) -> dim` for nonzero entries.
    pub fn cohomology(&self, variant: Variant) -> BTreeMap<(usize, usize), usize> {
        let max_k = self
            .basis
            .keys()
            .map(|&(i, j)| i / 2 + j)
            .max()
            .unwrap_or(0);
        let mut out = BTreeMap::new();
        for k in 0..=max_k {
            let dims: Vec<usize> = (0..=k).map(|p| self.dim(variant, 2 * p, k - p)).collect();
            let ranks: Vec<usize> = (0..=k)
                .map(|p| {
                    if dims[p] == 0 {
                        0
                    } else {
                        self.differential_matrix(variant, 2 * p, k - p).rank()
                    }
                })
                .collect();
            for p in 0..=k {
                let incoming = if p == 0 { 0 } else { ranks[p - 1] };
                let h = dims[p] - ranks[p] - incoming;
                if h > 0 {
                    out.insert((p, k), h);
                }
            }
        }
        out
    }

    /// Line dimensions of `H^0`, indexed by `k`.
    pub fn h0_dims(&self, variant: Variant) -> Vec<usize> {
        let coh = self.cohomology(variant);
        let max_k = coh.keys().map(|&(_, k)| k).max().unwrap_or(0);
        (0..=max_k)
            .map(|k| coh.get(&(0, k)).copied().unwrap_or(0))
            .collect()
    }

    /// Is the cohomology concentrated in position 0?
    pub fn higher_cohomology_vanishes(&self, variant: Variant) -> bool {
        self.cohomology(variant).keys().all(|&(p, _)| p == 0)
    }
}

/// `c_g = sum of x_h over members h >= g` (in the original lattice).
pub fn c_poly(pbs: &PartialBuildingSet, g_idx: usize) -> Element {
    let g = pbs.h[g_idx];
    let mut el = Element::zero();
    for (i, &h) in pbs.h.iter().enumerate() {
        if pbs.lat.le(g, h) {
            el.add_term(Monomial::x_single(i, 1), Rat::one());
        }
    }
    el
}

/// All nested sets that are antichains in the original lattice (including
/// the empty set), as masks.
fn nested_antichains(pbs: &PartialBuildingSet) -> Vec<u64> {
    let n = pbs.len();
    let lat = &pbs.lat;
    let mut out = vec![0u64];
    let mut stack = vec![(0u64, 0usize)];
    while let Some((mask, lo)) = stack.pop() {
        for i in lo..n {
            let ei = pbs.h[i];
            let anti = (0..n)
                .filter(|&k| mask >> k & 1 == 1)
                .all(|k| !lat.le(pbs.h[k], ei) && !lat.le(ei, pbs.h[k]));
            if !anti {
                continue;
            }
            let m2 = mask | 1 << i;
            if pbs.is_nested(m2) {
                out.push(m2);
                stack.push((m2, i + 1));
            }
        }
    }
    out.sort_unstable();
    out
}

fn emit_basis_monomials(
    pbs: &PartialBuildingSet,
    s_mask: u64,
    t_mask: u64,
    basis: &mut BTreeMap<(usize, usize), Vec<Monomial>>,
) {
    let lat = &pbs.lat;
    let union = s_mask | t_mask;
    let t_bits: Vec<usize> = (0..pbs.len()).filter(|&i| t_mask >> i & 1 == 1).collect();
    // exponent bound per member of T: d(join of the strictly-smaller part, g)
    let mut bounds = Vec::with_capacity(t_bits.len());
    for &gi in &t_bits {
        let g = pbs.h[gi];
        let below: Vec<Elem> = (0..pbs.len())
            .filter(|&k| union >> k & 1 == 1 && lat.lt(pbs.h[k], g))
            .map(|k| pbs.h[k])
            .collect();
        let z = lat.join_of(&below).expect("joins exist in a lattice");
        let d = lat.dist(z, g);
        if d < 2 {
            return; // no admissible exponent
        }
        bounds.push(d as u32);
    }
    // enumerate exponent vectors 1..bound per position
    let mut exps = vec![1u32; t_bits.len()];
    loop {
        let x: Vec<(u32, u32)> = t_bits
            .iter()
            .zip(&exps)
            .map(|(&i, &b)| (i as u32, b))
            .collect();
        let m = Monomial { e: s_mask, x };
        basis.entry(m.bidegree()).or_default().push(m);
        // increment
        let mut pos = 0;
        loop {
            if pos == exps.len() {
                return;
            }
            exps[pos] += 1;
            if exps[pos] < bounds[pos] {
                break;
            }
            exps[pos] = 1;
            pos += 1;
        }
    }
}

/// Generator images for the blowup morphism at the algebra level: both
/// `e` and `x` of members below `p` pick up the corresponding `p` term.
pub struct BlowupImages {
    pub map: Vec<Vec<(usize, Rat)>>,
}

impl BlowupImages {
    pub fn new(from: &BlownSemilattice, to: &BlownSemilattice, p_lm: Elem) -> Self {
        let to_index: HashMap<Elem, usize> = to
            .pbs
            .h
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i))
            .collect();
        let p_idx_to = *to_index.get(&p_lm).expect("p is in H'");
        let p_surv = from.surviving(p_lm).expect("p survives in L(M,H)");
        let below = from.supp(p_surv);
        let map = from
            .pbs
            .h
            .iter()
            .enumerate()
            .map(|(i, lm)| {
                let j = *to_index.get(lm).expect("H inside H'");
                let mut v = vec![(j, Rat::one())];
                if below >> i & 1 == 1 {
                    v.push((p_idx_to, Rat::one()));
                }
                v
            })
            .collect();
        BlowupImages { map }
    }

    pub fn apply(&self, el: &Element) -> Element {
        el.substitute_linear(&|i| self.map[i].clone(), &|i| self.map[i].clone())
    }
}

/// The blowup morphism between two models, as matrices per bidegree, with
/// its injectivity certificates.
pub struct PhiMap<'a> {
    pub from: &'a LerayModel,
    pub to: &'a LerayModel,
    pub images: BlowupImages,
}

impl<'a> PhiMap<'a> {
    pub fn new(from: &'a LerayModel, to: &'a LerayModel, p_lm: Elem) -> Self {
        let images = BlowupImages::new(&from.bl, &to.bl, p_lm);
        PhiMap { from, to, images }
    }

    pub fn matrix(&self, variant: Variant, i: usize, j: usize) -> QMatrix {
        let source = self.from.basis(variant, i, j);
        let target_dim = self.to.dim(variant, i, j);
        let mut m = QMatrix::zeros(target_dim, source.len());
        for (col, mono) in source.iter().enumerate() {
            let img = self
                .to
                .normal_form(&self.images.apply(&Element::monomial(mono.clone(), Rat::one())));
            let coords = self.to.coords(&img, variant, i, j);
            for (row, c) in coords.into_iter().enumerate() {
                m[(row, col)] = c;
            }
        }
        m
    }

    /// Relations of the source map into the target ideal.
    pub fn preserves_relations(&self) -> bool {
        self.from
            .engine
            .generators()
            .iter()
            .all(|g| self.to.normal_form(&self.images.apply(g)).is_zero())
    }

    /// `phi . d = d . phi` checked on every basis monomial.
    pub fn commutes_with_d(&self, variant: Variant) -> bool {
        for (&(i, j), _) in self.from.basis.iter() {
            for mono in self.from.basis(variant, i, j) {
                let el = Element::monomial(mono, Rat::one());
                let lhs = self.to.normal_form(&self.images.apply(&el.differential()));
                let rhs = self
                    .to
                    .normal_form(&self.images.apply(&el).differential());
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    /// Injective in every bidegree, by exact rank.
    pub fn injective(&self, variant: Variant) -> bool {
        self.from.basis.keys().all(|&(i, j)| {
            let dim = self.from.dim(variant, i, j);
            dim == 0 || self.matrix(variant, i, j).rank() == dim
        })
    }

    /// The initial-monomial certificate: the predicted lead terms are
    /// pairwise distinct and match the computed ones.
    pub fn lead_certificate(&self, variant: Variant) -> bool {
        let from_bl = &self.from.bl;
        let to_bl = &self.to.bl;
        // p is the unique member of H' missing from H
        let p_lm = *to_bl
            .pbs
            .h
            .iter()
            .find(|m| !from_bl.pbs.h.contains(m))
            .expect("phi extends by one member");
        let p_surv = from_bl.surviving(p_lm).expect("p survives");
        let below = from_bl.supp(p_surv);
        let p_idx_to = to_bl.pbs.h_index(p_lm).unwrap();
        let translate: Vec<usize> = (0..from_bl.n_h())
            .map(|i| to_bl.pbs.h_index(from_bl.pbs.h[i]).unwrap())
            .collect();
        let mut seen = std::collections::HashSet::new();
        for (&(i, j), _) in self.from.basis.iter() {
            for mono in self.from.basis(variant, i, j) {
                let img = self
                    .to
                    .normal_form(&self.images.apply(&Element::monomial(mono.clone(), Rat::one())));
                let lead = img.lead().expect("phi of a basis monomial is nonzero").0;
                // predicted lead: translate variables; if the e-part below p
                // joins exactly to p, swap the least such for e_p
                let s_below = mono.e & below;
                let mut e_pred: u64 = (0..from_bl.n_h())
                    .filter(|&k| mono.e >> k & 1 == 1)
                    .map(|k| 1u64 << translate[k])
                    .sum();
                if from_bl.join_h_mask(s_below) == Some(p_surv) {
                    let g = (0..from_bl.n_h())
                        .find(|&k| s_below >> k & 1 == 1)
                        .expect("nonempty below part");
                    e_pred = e_pred & !(1u64 << translate[g]) | 1 << p_idx_to;
                }
                let x_pred: Vec<(u32, u32)> = mono
                    .x
                    .iter()
                    .map(|&(v, b)| (translate[v as usize] as u32, b))
                    .collect();
                let mut x_sorted = x_pred;
                x_sorted.sort_by_key(|&(v, _)| v);
                let predicted = Monomial {
                    e: e_pred,
                    x: x_sorted,
                };
                if *lead != predicted {
                    return false;
                }
                if !seen.insert(predicted) {
                    return false; // lead terms must be pairwise distinct
                }
            }
        }
        true
    }
}
