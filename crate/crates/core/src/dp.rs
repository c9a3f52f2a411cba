//! De Concini-Procesi (Chow) algebras of a partial building set, their
//! local quotients, monomial bases, tensor decompositions, restriction
//! maps, and Poincare duality.
//!
//! The global algebra has its own normal-form engine (the x part of the
//! bigraded Groebner basis).  Local quotients are realized as blocks of
//! the bigraded model: the block of a no-broken-circuit representative
//! with the right join.

use crate::algebra::{Element, Monomial, NormalFormEngine};
use crate::blowup::{factors_plus, local_building_set, BlownSemilattice, PartialBuildingSet};
use crate::model::{c_poly, LerayModel};
use crate::poset::Elem;
use crate::ratmat::QMatrix;
use crate::Rat;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DpError {
    #[error("tensor decomposition requires the blowdown of y away from the maximum")]
    BlowdownIsTop,
    #[error("degree mismatch in the pairing")]
    DegreeMismatch,
}

/// The Chow algebra of a partial building set, with monomial basis and
/// normal forms from the x part of the bigraded Groebner basis.
pub struct DpAlgebra {
    pub pbs: PartialBuildingSet,
    engine: NormalFormEngine,
    /// basis monomials per x-degree (cohomological degree = twice that)
    pub basis: Vec<Vec<Monomial>>,
}

impl DpAlgebra {
    pub fn new(pbs: &PartialBuildingSet) -> Self {
        let lat = &pbs.lat;
        let n = pbs.len();
        let mut gens: Vec<Element> = Vec::new();
        // Stanley-Reisner monomials over minimal non-nested sets
        let nonfaces =
            crate::os::minimal_nonfaces(n, &|mask| pbs.is_nested(mask));
        for &v in &nonfaces {
            let mut m = Monomial::one();
            for i in (0..n).filter(|&i| v >> i & 1 == 1) {
                let (m2, _) = m.mul(&Monomial::x_single(i, 1)).expect("x never clashes");
                m = m2;
            }
            gens.push(Element::monomial(m, Rat::one()));
        }
        // x_T c_g^d over nested antichains below g (the linear relations
        // c_g of atoms are the T = empty, g an atom instances)
        for &u in &nested_antichains(pbs) {
            let join = lat
                .join_of(&pbs.mask_elems(u))
                .expect("joins exist in a lattice");
            for (gi, &g) in pbs.h.iter().enumerate() {
                if !lat.lt(join, g) {
                    continue;
                }
                let d = lat.dist(join, g) as u32;
                let cg = c_poly(pbs, gi);
                let mut el = Element::one();
                for i in (0..n).filter(|&i| u >> i & 1 == 1) {
                    el = el.mul(&Element::x_var(i));
                }
                for _ in 0..d {
                    el = el.mul(&cg);
                }
                gens.push(el);
            }
        }
        let engine = NormalFormEngine::new(gens);
        // basis: x_T^b with T nested inside the core, exponents within the
        // rank gaps
        let r1 = lat.top_rank(); // rank r+1
        let mut basis: Vec<Vec<Monomial>> = vec![Vec::new(); r1.max(1)];
        basis[0].push(Monomial::one());
        let core_mask: u64 = pbs
            .h
            .iter()
            .enumerate()
            .filter(|&(_, &m)| lat.rank(m) > 1)
            .map(|(i, _)| 1u64 << i)
            .sum();
        let mut stack = vec![(0u64, 0usize)];
        while let Some((t_mask, lo)) = stack.pop() {
            if t_mask != 0 {
                emit_x_monomials(pbs, 0, t_mask, &mut |m| {
                    let k = m.x_degree();
                    if basis.len() <= k {
                        basis.resize(k + 1, Vec::new());
                    }
                    basis[k].push(m);
                });
            }
            for i in lo..n {
                if core_mask >> i & 1 == 0 || t_mask >> i & 1 == 1 {
                    continue;
                }
                let t2 = t_mask | 1 << i;
                if pbs.is_nested(t2) {
                    stack.push((t2, i + 1));
                }
            }
        }
        for level in &mut basis {
            level.sort();
        }
        while basis.len() > 1 && basis.last().unwrap().is_empty() {
            basis.pop();
        }
        DpAlgebra { pbs: pbs.clone(), engine, basis }
    }

    pub fn engine(&self) -> &NormalFormEngine {
        &self.engine
    }

    /// `r`: the top nonzero degree (the lattice rank minus one).
    pub fn top(&self) -> usize {
        self.basis.len() - 1
    }

    pub fn dim(&self, k: usize) -> usize {
        self.basis.get(k).map_or(0, |v| v.len())
    }

    /// Dimensions by x-degree.
    pub fn dims(&self) -> Vec<usize> {
        self.basis.iter().map(|v| v.len()).collect()
    }

    pub fn normal_form(&self, a: &Element) -> Element {
        self.engine.normal_form(a)
    }

    pub fn coords(&self, a: &Element, k: usize) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.dim(k)];
        for (m, c) in &a.terms {
            assert_eq!(m.e, 0, "Chow elements have no e part");
            assert_eq!(m.x_degree(), k);
            let pos = self.basis[k]
                .binary_search(m)
                .expect("normal form lies in the basis");
            v[pos] = c.clone();
        }
        v
    }

    /// The involution on basis monomials.  Requires the products of the
    /// member with the maximum (always a basis case by duality).
    pub fn epsilon(&self, m: &Monomial) -> (Monomial, i64) {
        let pbs = &self.pbs;
        let lat = &pbs.lat;
        let r = lat.top_rank() - 1;
        let top_idx = pbs.h_index(lat.top()).expect("duality requires the top in H");
        let t_mask = m.x_support();
        let t_plus = t_mask | 1 << top_idx;
        let mut out_x: Vec<(u32, u32)> = Vec::new();
        for gi in (0..pbs.len()).filter(|&i| t_plus >> i & 1 == 1) {
            let g = pbs.h[gi];
            let below: Vec<Elem> = (0..pbs.len())
                .filter(|&k| t_mask >> k & 1 == 1 && lat.lt(pbs.h[k], g))
                .map(|k| pbs.h[k])
                .collect();
            let z = lat.join_of(&below).expect("joins exist");
            let mut d = lat.dist(z, g) as u32;
            if gi == top_idx {
                d -= 1;
            }
            let b = m.x_exp(gi);
            if d > b {
                out_x.push((gi as u32, d - b));
            } else {
                assert_eq!(d, b, "basis exponents stay within the rank gaps");
            }
        }
        out_x.sort_by_key(|&(i, _)| i);
        let t_size = (t_mask & !(1u64 << top_idx)).count_ones() as usize;
        let sign = if (t_size + r) % 2 == 0 { 1 } else { -1 };
        (Monomial { e: 0, x: out_x }, sign)
    }

    /// The pairing: the coefficient of `mu = (-1)^r x_top^r` in `u v`.
    /// Zero on mismatched degrees.
    pub fn pairing(&self, u: &Element, v: &Element) -> Rat {
        let r = self.top();
        let prod = self.normal_form(&u.mul(v));
        let top_part = prod
            .terms
            .iter()
            .filter(|(m, _)| m.x_degree() == r)
            .collect::<Vec<_>>();
        if top_part.is_empty() {
            return Rat::zero();
        }
        assert_eq!(self.dim(r), 1, "top degree is one-dimensional");
        let top_idx = self
            .pbs
            .h_index(self.pbs.lat.top())
            .expect("top is a member");
        let mu_mono = Monomial::x_single(top_idx, r as u32);
        let mut c = Rat::zero();
        for (m, cf) in top_part {
            assert_eq!(*m, mu_mono);
            c = cf.clone();
        }
        if r % 2 == 1 {
            -c
        } else {
            c
        }
    }

    /// The pairing matrix of the degree-`k` basis against its involution
    /// image (which lives in the complementary degree).
    pub fn pairing_matrix(&self, k: usize) -> QMatrix {
        let n = self.dim(k);
        let mut out = QMatrix::zeros(n, n);
        for (a, ma) in self.basis[k].iter().enumerate() {
            let ua = Element::monomial(ma.clone(), Rat::one());
            for (b, mb) in self.basis[k].iter().enumerate() {
                let (me, s) = self.epsilon(mb);
                let ub = Element::monomial(me, crate::rat(s));
                out[(a, b)] = self.pairing(&ua, &ub);
            }
        }
        out
    }
}

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

/// Enumerate `x_T^b` monomials for a fixed nested `T` relative to a fixed
/// `S` (a support), with exponent gaps measured below each member.
fn emit_x_monomials(
    pbs: &PartialBuildingSet,
    s_mask: u64,
    t_mask: u64,
    f: &mut dyn FnMut(Monomial),
) {
    let lat = &pbs.lat;
    let union = s_mask | t_mask;
    let t_bits: Vec<usize> = (0..pbs.len()).filter(|&i| t_mask >> i & 1 == 1).collect();
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
            return;
        }
        bounds.push(d as u32);
    }
    let mut exps = vec![1u32; t_bits.len()];
    loop {
        let x: Vec<(u32, u32)> = t_bits
            .iter()
            .zip(&exps)
            .map(|(&i, &b)| (i as u32, b))
            .collect();
        f(Monomial { e: 0, x });
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

/// A local Chow algebra `D_y`, as dimension data with (optionally) the
/// block realization inside a bigraded model for products and restrictions.
pub struct LocalDp {
    pub y: Elem,
    /// canonical no-broken-circuit representative with join `y`
    pub s_mask: u64,
    /// x-part basis monomials per x-degree
    pub basis: Vec<Vec<Monomial>>,
}

impl LocalDp {
    /// Dimension-only construction from the support representative; no
    /// normal forms available.
    pub fn dims_only(bl: &BlownSemilattice, y: Elem) -> Self {
        Self::from_rep(bl, y, bl.supp(y))
    }

    /// Block construction at the least nbc representative; compatible with
    /// the model engine for products.
    pub fn from_model(model: &LerayModel, y: Elem) -> Self {
        let rank = model.bl.rank(y);
        let blocks = model.os.brieskorn(rank);
        let s_mask = *blocks
            .get(&y)
            .and_then(|v| v.first())
            .expect("every element has an nbc set with its join");
        Self::from_rep(&model.bl, y, s_mask)
    }

    fn from_rep(bl: &BlownSemilattice, y: Elem, s_mask: u64) -> Self {
        let pbs = &bl.pbs;
        debug_assert_eq!(bl.join_h_mask(s_mask), Some(y));
        let n = pbs.len();
        let core_mask: u64 = pbs
            .h
            .iter()
            .enumerate()
            .filter(|&(_, &m)| pbs.lat.rank(m) > 1)
            .map(|(i, _)| 1u64 << i)
            .sum();
        let mut basis: Vec<Vec<Monomial>> = vec![vec![Monomial::one()]];
        let mut stack = vec![(0u64, 0usize)];
        while let Some((t_mask, lo)) = stack.pop() {
            if t_mask != 0 {
                emit_x_monomials(pbs, s_mask, t_mask, &mut |m| {
                    let k = m.x_degree();
                    if basis.len() <= k {
                        basis.resize(k + 1, Vec::new());
                    }
                    basis[k].push(m);
                });
            }
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
        for level in &mut basis {
            level.sort();
        }
        while basis.len() > 1 && basis.last().unwrap().is_empty() {
            basis.pop();
        }
        LocalDp { y, s_mask, basis }
    }

    pub fn dim(&self, k: usize) -> usize {
        self.basis.get(k).map_or(0, |v| v.len())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.basis.iter().map(|v| v.len()).collect()
    }

    pub fn top(&self) -> usize {
        self.basis.len() - 1
    }

    /// Class of a pure-x element in this local algebra, via the model.
    pub fn reduce(&self, model: &LerayModel, a: &Element) -> Element {
        let es = Element::monomial(Monomial::e_set(self.s_mask), Rat::one());
        let nf = model.normal_form(&es.mul(a));
        // strip the e part
        let mut out = Element::zero();
        for (m, c) in &nf.terms {
            assert_eq!(m.e, self.s_mask, "reduction stays in the block");
            out.add_term(
                Monomial {
                    e: 0,
                    x: m.x.clone(),
                },
                c.clone(),
            );
        }
        out
    }

    pub fn coords(&self, model: &LerayModel, a: &Element, k: usize) -> Vec<Rat> {
        let red = self.reduce(model, a);
        let mut v = vec![Rat::zero(); self.dim(k)];
        for (m, c) in &red.terms {
            assert_eq!(m.x_degree(), k);
            let pos = self.basis[k]
                .binary_search(m)
                .expect("reduced form lies in the block basis");
            v[pos] = c.clone();
        }
        v
    }

    /// Restriction `D_y -> D_z` for `y <= z`, per x-degree.
    pub fn restriction(&self, model: &LerayModel, target: &LocalDp, k: usize) -> QMatrix {
        let mut m = QMatrix::zeros(target.dim(k), self.dim(k));
        for (col, mono) in self.basis.get(k).iter().flat_map(|v| v.iter()).enumerate() {
            let el = Element::monomial(mono.clone(), Rat::one());
            let coords = target.coords(model, &el, k);
            for (row, c) in coords.into_iter().enumerate() {
                m[(row, col)] = c;
            }
        }
        m
    }

    /// The dualizing class.
    pub fn mu(&self, bl: &BlownSemilattice) -> Element {
        let pbs = &bl.pbs;
        let lat = &pbs.lat;
        let fp = factors_plus(bl, self.y);
        let core = pbs.core();
        let mut el = Element::one();
        for (pos, &g) in fp.fplus.iter().enumerate() {
            if !core.contains(&g) {
                continue;
            }
            let d = lat.dist(fp.z[pos], g);
            if d < 1 {
                continue;
            }
            let gi = pbs.h_index(g).expect("factors are members");
            let var = Element::x_var(gi).scale(&crate::rat(-1));
            for _ in 0..d - 1 {
                el = el.mul(&var);
            }
        }
        el
    }

    /// The local pairing: the coefficient of the dualizing class in `u v`.
    pub fn pairing(&self, model: &LerayModel, u: &Element, v: &Element) -> Rat {
        let top = self.top();
        assert_eq!(self.dim(top), 1, "local top degree is one-dimensional");
        let mu = self.mu(&model.bl);
        let mu_c = self.coords(model, &mu, top);
        assert!(!mu_c[0].is_zero(), "dualizing class spans the top degree");
        let prod = self.coords(model, &u.mul(v), top);
        &prod[0] / &mu_c[0]
    }
}

/// The tensor decomposition of a local Chow algebra: one factor per member
/// of `F^+(y)`, as global Chow algebras of the local building sets.
pub struct TensorFactor {
    pub g: Elem,
    pub data: crate::blowup::LocalBuildingData,
    pub dp: DpAlgebra,
}

pub fn tensor_decompose(
    bl: &BlownSemilattice,
    y: Elem,
) -> Result<Vec<TensorFactor>, DpError> {
    let lat = &bl.pbs.lat;
    if bl.pi_lm(y) == lat.top() {
        return Err(DpError::BlowdownIsTop);
    }
    let fp = factors_plus(bl, y);
    let mut out = Vec::new();
    for &g in &fp.fplus {
        let data = local_building_set(bl, y, g).expect("g is a factor");
        let dp = DpAlgebra::new(&data.pbs);
        out.push(TensorFactor { g, data, dp });
    }
    Ok(out)
}

/// Graded dimensions of a tensor product of the factors.
pub fn tensor_dims(factors: &[TensorFactor]) -> Vec<usize> {
    let mut dims = vec![1usize];
    for f in factors {
        let fd = f.dp.dims();
        let mut next = vec![0usize; dims.len() + fd.len() - 1];
        for (a, &da) in dims.iter().enumerate() {
            for (b, &db) in fd.iter().enumerate() {
                next[a + b] += da * db;
            }
        }
        dims = next;
    }
    while dims.len() > 1 && *dims.last().unwrap() == 0 {
        dims.pop();
    }
    dims
}

/// The blowup morphism between Chow algebras: variable images with the
/// extra `x_p` term below `p`.
pub struct DpPhi<'a> {
    pub from: &'a DpAlgebra,
    pub to: &'a DpAlgebra,
    images: Vec<Vec<(usize, Rat)>>,
}

impl<'a> DpPhi<'a> {
    pub fn new(
        from: &'a DpAlgebra,
        to: &'a DpAlgebra,
        bl_from: &BlownSemilattice,
        p_lm: Elem,
    ) -> Self {
        let to_index: HashMap<Elem, usize> = to
            .pbs
            .h
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i))
            .collect();
        let p_idx_to = *to_index.get(&p_lm).expect("p is in H'");
        let p_surv = bl_from.surviving(p_lm).expect("p survives");
        let below = bl_from.supp(p_surv);
        let images = from
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
        DpPhi { from, to, images }
    }

    pub fn apply(&self, el: &Element) -> Element {
        el.substitute_linear(&|_| Vec::new(), &|i| self.images[i].clone())
    }

    pub fn matrix(&self, k: usize) -> QMatrix {
        let mut m = QMatrix::zeros(self.to.dim(k), self.from.dim(k));
        for (col, mono) in self.from.basis[k].iter().enumerate() {
            let img = self
                .to
                .normal_form(&self.apply(&Element::monomial(mono.clone(), Rat::one())));
            for (row, c) in self.to.coords(&img, k).into_iter().enumerate() {
                m[(row, col)] = c;
            }
        }
        m
    }

    /// `phi(c_g over H) = c_g over H'` as raw polynomials.
    pub fn preserves_linear_forms(&self) -> bool {
        for gi in 0..self.from.pbs.len() {
            let g = self.from.pbs.h[gi];
            let lhs = self.apply(&c_poly(&self.from.pbs, gi));
            let gj = self.to.pbs.h_index(g).expect("member persists");
            if lhs != c_poly(&self.to.pbs, gj) {
                return false;
            }
        }
        true
    }

    pub fn injective(&self) -> bool {
        (0..self.from.basis.len()).all(|k| self.matrix(k).rank() == self.from.dim(k))
    }
}

/// The stalkwise map `D_{pi(y)} -> D'_y` induced by the blowup morphism,
/// per x-degree; both sides realized as model blocks.
pub fn local_phi_matrix(
    model_from: &LerayModel,
    model_to: &LerayModel,
    phi: &DpPhi,
    y_from: Elem,
    y_to: Elem,
    k: usize,
) -> QMatrix {
    let d_from = LocalDp::from_model(model_from, y_from);
    let d_to = LocalDp::from_model(model_to, y_to);
    let mut m = QMatrix::zeros(d_to.dim(k), d_from.dim(k));
    for (col, mono) in d_from.basis.get(k).iter().flat_map(|v| v.iter()).enumerate() {
        let img = phi.apply(&Element::monomial(mono.clone(), Rat::one()));
        for (row, c) in d_to.coords(model_to, &img, k).into_iter().enumerate() {
            m[(row, col)] = c;
        }
    }
    m
}

/// Dimensions of the local Chow algebras over every element, by x-degree:
/// the stalk data of the structure sheaf.
pub fn sheaf_dims(model: &LerayModel) -> BTreeMap<Elem, Vec<usize>> {
    (0..model.bl.len())
        .map(|y| (y, LocalDp::from_model(model, y).dims()))
        .collect()
}
