//! The free graded-commutative algebra `Q[e_g, x_g : g in H]` with `e_g` in
//! bidegree (0,1) and `x_g` in bidegree (2,0): sparse elements over exact
//! rationals, the fixed term order, and Groebner normal-form reduction.
//!
//! Variables are indexed by positions `0..n` in the `prec` order on `H`
//! (so index 0 is the maximum element when present).  In the term order,
//! variables later in `prec` are larger, all `x` variables precede all `e`
//! variables, and monomials are compared by total degree first.

use crate::Rat;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

/// A monomial `e_S x_T^b`: `e` is a bitmask over variable indices, `x` is a
/// sorted exponent list.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    pub e: u64,
    pub x: Vec<(u32, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { e: 0, x: Vec::new() }
    }

    pub fn e_single(i: usize) -> Self {
        Monomial {
            e: 1 << i,
            x: Vec::new(),
        }
    }

    pub fn x_single(i: usize, exp: u32) -> Self {
        if exp == 0 {
            return Self::one();
        }
        Monomial {
            e: 0,
            x: vec![(i as u32, exp)],
        }
    }

    pub fn e_set(mask: u64) -> Self {
        Monomial { e: mask, x: Vec::new() }
    }

    pub fn x_degree(&self) -> usize {
        self.x.iter().map(|&(_, b)| b as usize).sum()
    }

    pub fn e_degree(&self) -> usize {
        self.e.count_ones() as usize
    }

    /// Bidegree `(2 * sum b, |S|)`.
    pub fn bidegree(&self) -> (usize, usize) {
        (2 * self.x_degree(), self.e_degree())
    }

    pub fn total_degree(&self) -> usize {
        2 * self.x_degree() + self.e_degree()
    }

    /// The set of variable indices appearing in the x part.
    pub fn x_support(&self) -> u64 {
        self.x.iter().fold(0u64, |m, &(i, _)| m | 1 << i)
    }

    pub fn x_exp(&self, i: usize) -> u32 {
        self.x
            .iter()
            .find(|&&(j, _)| j as usize == i)
            .map_or(0, |&(_, b)| b)
    }

    /// Does `self` divide `m` (as commutative-times-exterior monomials)?
    pub fn divides(&self, m: &Monomial) -> bool {
        if self.e & !m.e != 0 {
            return false;
        }
        self.x.iter().all(|&(i, b)| m.x_exp(i as usize) >= b)
    }

    /// `m / self`, including the Koszul sign of splitting the e part as
    /// `quotient * self`.
    pub fn divide(&self, m: &Monomial) -> Option<(Monomial, i64)> {
        if !self.divides(m) {
            return None;
        }
        let qe = m.e & !self.e;
        let mut qx = Vec::new();
        for &(i, b) in &m.x {
            let rem = b - self.x_exp(i as usize);
            if rem > 0 {
                qx.push((i, rem));
            }
        }
        let sign = koszul_sign(qe, self.e);
        Some((Monomial { e: qe, x: qx }, sign))
    }

    /// Product with Koszul sign; `None` when an exterior variable repeats.
    pub fn mul(&self, other: &Monomial) -> Option<(Monomial, i64)> {
        if self.e & other.e != 0 {
            return None;
        }
        let sign = koszul_sign(self.e, other.e);
        let mut x = Vec::with_capacity(self.x.len() + other.x.len());
        let (mut i, mut j) = (0, 0);
        while i < self.x.len() || j < other.x.len() {
            match (self.x.get(i), other.x.get(j)) {
                (Some(&(a, ea)), Some(&(b, eb))) => {
                    if a < b {
                        x.push((a, ea));
                        i += 1;
                    } else if b < a {
                        x.push((b, eb));
                        j += 1;
                    } else {
                        x.push((a, ea + eb));
                        i += 1;
                        j += 1;
                    }
                }
                (Some(&t), None) => {
                    x.push(t);
                    i += 1;
                }
                (None, Some(&t)) => {
                    x.push(t);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Some((
            Monomial {
                e: self.e | other.e,
                x,
            },
            sign,
        ))
    }
}

/// Sign of reordering `e_A e_B` into ascending order, for disjoint masks
/// (A's variables listed first): parity of the pairs (a, b) with a > b.
pub fn koszul_sign(a: u64, b: u64) -> i64 {
    let mut inv = 0u32;
    let mut bb = b;
    while bb != 0 {
        let i = bb.trailing_zeros();
        bb &= bb - 1;
        if i < 63 {
            inv += (a >> (i + 1)).count_ones();
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The term order: graded by total degree, then the x parts compared
/// lexicographically from the largest variable down, then the e parts the
/// same way (as integers, since bit significance matches variable size).
#[derive(Clone, Copy, Debug, Default)]
pub struct TermOrder;

impl TermOrder {
    pub fn cmp(a: &Monomial, b: &Monomial) -> Ordering {
        a.total_degree()
            .cmp(&b.total_degree())
            .then_with(|| cmp_x_from_top(&a.x, &b.x))
            .then_with(|| a.e.cmp(&b.e))
    }
}

fn cmp_x_from_top(a: &[(u32, u32)], b: &[(u32, u32)]) -> Ordering {
    let (mut i, mut j) = (a.len(), b.len());
    loop {
        match (i, j) {
            (0, 0) => return Ordering::Equal,
            (0, _) => return Ordering::Less,
            (_, 0) => return Ordering::Greater,
            _ => {
                let (ia, ea) = a[i - 1];
                let (ib, eb) = b[j - 1];
                match ia.cmp(&ib) {
                    Ordering::Greater => return Ordering::Greater,
                    Ordering::Less => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(&eb) {
                        Ordering::Equal => {
                            i -= 1;
                            j -= 1;
                        }
                        other => return other,
                    },
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        TermOrder::cmp(self, other)
    }
}

/// A sparse rational combination of monomials.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Element {
    pub terms: BTreeMap<Monomial, Rat>,
}

impl Element {
    pub fn zero() -> Self {
        Element {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Element::monomial(Monomial::one(), Rat::one())
    }

    pub fn monomial(m: Monomial, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Element { terms }
    }

    pub fn e_var(i: usize) -> Self {
        Element::monomial(Monomial::e_single(i), Rat::one())
    }

    pub fn x_var(i: usize) -> Self {
        Element::monomial(Monomial::x_single(i, 1), Rat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        Element {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    /// Graded-commutative product.
    pub fn mul(&self, other: &Element) -> Element {
        let mut out = Element::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, s)) = ma.mul(mb) {
                    out.add_term(m, ca * cb * crate::rat(s));
                }
            }
        }
        out
    }

    /// The largest monomial.
    pub fn lead(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    /// The boundary `partial`: derivation with `partial(e_g) = 1`,
    /// `partial(x_g) = 0`.
    pub fn boundary(&self) -> Element {
        let mut out = Element::zero();
        for (m, c) in &self.terms {
            let mut pos = 0;
            let mut e = m.e;
            while e != 0 {
                let i = e.trailing_zeros() as usize;
                e &= e - 1;
                let m2 = Monomial {
                    e: m.e & !(1u64 << i),
                    x: m.x.clone(),
                };
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                out.add_term(m2, c * crate::rat(sign));
                pos += 1;
            }
        }
        out
    }

    /// The differential `d`: derivation with `d(e_g) = x_g`, `d(x_g) = 0`;
    /// bidegree (2,-1).
    pub fn differential(&self) -> Element {
        let mut out = Element::zero();
        for (m, c) in &self.terms {
            let mut pos = 0;
            let mut e = m.e;
            while e != 0 {
                let i = e.trailing_zeros() as usize;
                e &= e - 1;
                let stripped = Monomial {
                    e: m.e & !(1u64 << i),
                    x: m.x.clone(),
                };
                let (m2, s) = stripped
                    .mul(&Monomial::x_single(i, 1))
                    .expect("x variables never clash");
                debug_assert_eq!(s, 1);
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                out.add_term(m2, c * crate::rat(sign));
                pos += 1;
            }
        }
        out
    }

    /// Apply a substitution sending each variable to a linear combination
    /// of variables: `e_i -> sum_j e_coeffs[i][j] e_j` and likewise for x.
    /// Coefficient lists are sparse (index, coefficient) pairs.
    pub fn substitute_linear(
        &self,
        e_images: &dyn Fn(usize) -> Vec<(usize, Rat)>,
        x_images: &dyn Fn(usize) -> Vec<(usize, Rat)>,
    ) -> Element {
        let mut out = Element::zero();
        for (m, c) in &self.terms {
            let mut acc = Element::monomial(Monomial::one(), c.clone());
            let mut e = m.e;
            while e != 0 {
                let i = e.trailing_zeros() as usize;
                e &= e - 1;
                let mut img = Element::zero();
                for (j, cf) in e_images(i) {
                    img.add_term(Monomial::e_single(j), cf);
                }
                acc = acc.mul(&img);
            }
            for &(i, b) in &m.x {
                let mut img = Element::zero();
                for (j, cf) in x_images(i as usize) {
                    img.add_term(Monomial::x_single(j, 1), cf);
                }
                for _ in 0..b {
                    acc = acc.mul(&img);
                }
            }
            out = out.add(&acc);
        }
        out
    }

    /// Restrict to one bidegree.
    pub fn bidegree_part(&self, i: usize, j: usize) -> Element {
        Element {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.bidegree() == (i, j))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }
}

/// Groebner reduction against a fixed generating set: deterministic
/// (largest reducible monomial first, first matching generator), memoized
/// per monomial.
pub struct NormalFormEngine {
    /// Generators, sorted by lead monomial; all nonzero.
    basis: Vec<Element>,
    leads: Vec<Monomial>,
    memo: Mutex<HashMap<Monomial, Element>>,
}

impl NormalFormEngine {
    pub fn new(mut basis: Vec<Element>) -> Self {
        basis.retain(|f| !f.is_zero());
        basis.sort_by(|f, g| {
            let lf = f.lead().expect("nonzero").0;
            let lg = g.lead().expect("nonzero").0;
            TermOrder::cmp(lf, lg).then_with(|| {
                // fall back to full-term comparison for determinism
                f.terms
                    .iter()
                    .rev()
                    .map(|(m, _)| m.clone())
                    .collect::<Vec<_>>()
                    .cmp(&g.terms.iter().rev().map(|(m, _)| m.clone()).collect::<Vec<_>>())
            })
        });
        let leads = basis
            .iter()
            .map(|f| f.lead().expect("nonzero").0.clone())
            .collect();
        NormalFormEngine {
            basis,
            leads,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn generators(&self) -> &[Element] {
        &self.basis
    }

    /// Normal form of a single monomial.
    pub fn nf_monomial(&self, m: &Monomial) -> Element {
        if let Some(hit) = self.memo.lock().unwrap().get(m) {
            return hit.clone();
        }
        let result = match self.find_reducer(m) {
            None => Element::monomial(m.clone(), Rat::one()),
            Some(k) => {
                let f = &self.basis[k];
                let (q, _) = self.leads[k].divide(m).expect("reducer divides");
                let prod = Element::monomial(q, Rat::one()).mul(f);
                let gamma = prod
                    .terms
                    .get(m)
                    .expect("lead survives multiplication")
                    .clone();
                // m - prod/gamma kills m; reduce the rest recursively
                let mut out = Element::zero();
                for (m2, c2) in &prod.terms {
                    if m2 == m {
                        continue;
                    }
                    let nf2 = self.nf_monomial(m2);
                    out = out.add(&nf2.scale(&(-c2 / &gamma)));
                }
                out
            }
        };
        self.memo
            .lock()
            .unwrap()
            .insert(m.clone(), result.clone());
        result
    }

    pub fn normal_form(&self, a: &Element) -> Element {
        let mut out = Element::zero();
        for (m, c) in a.terms.iter().rev() {
            out = out.add(&self.nf_monomial(m).scale(c));
        }
        out
    }

    pub fn reduces_to_zero(&self, a: &Element) -> bool {
        self.normal_form(a).is_zero()
    }

    fn find_reducer(&self, m: &Monomial) -> Option<usize> {
        self.leads.iter().position(|l| l.divides(m))
    }

    /// Is the monomial in normal form (not divisible by any lead)?
    pub fn is_standard(&self, m: &Monomial) -> bool {
        self.find_reducer(m).is_none()
    }

    /// The S-polynomial of generators `i` and `j`, normalized so both lead
    /// terms cancel.
    pub fn s_polynomial(&self, i: usize, j: usize) -> Element {
        let (f, g) = (&self.basis[i], &self.basis[j]);
        let (lf, lg) = (&self.leads[i], &self.leads[j]);
        // lcm of the leads
        let e = lf.e | lg.e;
        let mut x: Vec<(u32, u32)> = Vec::new();
        let vars = lf.x_support() | lg.x_support();
        let mut v = vars;
        while v != 0 {
            let idx = v.trailing_zeros() as usize;
            v &= v - 1;
            let b = lf.x_exp(idx).max(lg.x_exp(idx));
            x.push((idx as u32, b));
        }
        x.sort_by_key(|&(i, _)| i);
        let lcm = Monomial { e, x };
        let (qf, _) = lf.divide(&lcm).expect("lead divides lcm");
        let (qg, _) = lg.divide(&lcm).expect("lead divides lcm");
        let pf = Element::monomial(qf, Rat::one()).mul(f);
        let pg = Element::monomial(qg, Rat::one()).mul(g);
        let cf = pf.terms.get(&lcm).expect("lcm appears").clone();
        let cg = pg.terms.get(&lcm).expect("lcm appears").clone();
        pf.scale(&cf.recip()).sub(&pg.scale(&cg.recip()))
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, rat_one};

    fn e(i: usize) -> Element {
        Element::e_var(i)
    }

    fn x(i: usize) -> Element {
        Element::x_var(i)
    }

    #[test]
    fn koszul_signs() {
        // e_1 e_2 = e_{12}; e_2 e_1 = -e_{12}
        let a = e(1).mul(&e(2));
        let b = e(2).mul(&e(1));
        assert_eq!(a, b.scale(&rat(-1)));
        // e_1 e_1 = 0
        assert!(e(1).mul(&e(1)).is_zero());
        // (e_1 + x_0)(e_2) = e_{12} + x_0 e_2
        let s = e(1).add(&x(0)).mul(&e(2));
        assert_eq!(s.terms.len(), 2);
    }

    #[test]
    fn mul_associative_and_bidegree_additive() {
        // deterministic pseudo-random triples
        let mut seed = 42u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            (seed >> 40) as usize
        };
        for _ in 0..30 {
            let rand_elem = |next: &mut dyn FnMut() -> usize| {
                let mut el = Element::zero();
                for _ in 0..3 {
                    let m = Monomial {
                        e: (next() % 16) as u64,
                        x: {
                            let i = next() % 4;
                            let b = next() % 3;
                            if b == 0 {
                                vec![]
                            } else {
                                vec![(i as u32, b as u32)]
                            }
                        },
                    };
                    el.add_term(m, rat((next() % 7) as i64 - 3));
                }
                el
            };
            let a = rand_elem(&mut next);
            let b = rand_elem(&mut next);
            let c = rand_elem(&mut next);
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            for (m, _) in a.mul(&b).terms.iter() {
                // every product monomial has the sum bidegree of some pair
                let (i, j) = m.bidegree();
                assert!(a
                    .terms
                    .keys()
                    .any(|ma| b.terms.keys().any(|mb| {
                        let (ia, ja) = ma.bidegree();
                        let (ib, jb) = mb.bidegree();
                        ia + ib == i && ja + jb == j
                    })));
            }
        }
    }

    #[test]
    fn boundary_examples() {
        // partial(e_1) = 1
        assert_eq!(e(1).boundary(), Element::one());
        // partial(e_1 e_2) = e_2 - e_1
        assert_eq!(e(1).mul(&e(2)).boundary(), e(2).sub(&e(1)));
        // partial^2 = 0
        let m = e(0).mul(&e(1)).mul(&e(3));
        assert!(m.boundary().boundary().is_zero());
    }

    #[test]
    fn differential_examples() {
        // d(e_g) = x_g
        assert_eq!(e(2).differential(), x(2));
        // d(e_g e_h) = x_g e_h - e_g x_h
        let d = e(1).mul(&e(2)).differential();
        let expected = x(1).mul(&e(2)).sub(&e(1).mul(&x(2)));
        assert_eq!(d, expected);
        // d(x_g^2 e_h) = x_g^2 x_h
        let m = Element::monomial(Monomial::x_single(1, 2), rat_one()).mul(&e(2));
        assert_eq!(
            m.differential(),
            Element::monomial(Monomial::x_single(1, 2), rat_one()).mul(&x(2))
        );
        // d^2 = 0
        let big = e(0).mul(&e(1)).mul(&e(2)).add(&x(0).mul(&e(3)));
        assert!(big.differential().differential().is_zero());
    }

    #[test]
    fn term_order_shape() {
        // lead of a circuit boundary is the broken-circuit monomial:
        // for C = {0,1,2} (ascending prec), lead(partial e_C) = e_{12}
        let c = e(0).mul(&e(1)).mul(&e(2));
        let lead = c.boundary().lead().unwrap().0.clone();
        assert_eq!(lead, Monomial::e_set(0b110));
        // lead of c_g = x_g + (earlier variables): x_g itself
        let cg = x(3).add(&x(1)).add(&x(0));
        assert_eq!(cg.lead().unwrap().0, &Monomial::x_single(3, 1));
    }

    #[test]
    fn normal_form_basics() {
        // basis {e_1 e_2}: anything containing it reduces to zero
        let basis = vec![e(1).mul(&e(2))];
        let engine = NormalFormEngine::new(basis);
        let a = e(1).mul(&e(2)).mul(&e(3));
        assert!(engine.reduces_to_zero(&a));
        // already-reduced elements are fixed
        let b = e(1).mul(&e(3));
        assert_eq!(engine.normal_form(&b), b);
        // members of the basis reduce to zero
        assert!(engine.reduces_to_zero(&e(1).mul(&e(2))));
    }

    #[test]
    fn normal_form_linear_and_idempotent() {
        // a small inhomogeneous basis: x_0 - x_1 and e_2 x_1
        let basis = vec![x(1).sub(&x(0)), e(2).mul(&x(1))];
        let engine = NormalFormEngine::new(basis);
        let mut seed = 7u64;
        let mut next = move || {
            seed = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            (seed >> 45) as i64 - 100
        };
        for _ in 0..20 {
            let a = Element::monomial(Monomial::x_single(1, 2), rat(next()))
                .add(&e(2).mul(&x(1)).scale(&rat(next())))
                .add(&e(0).scale(&rat(next())));
            let b = e(1).mul(&x(0)).scale(&rat(next()));
            let lhs = engine.normal_form(&a.add(&b));
            let rhs = engine.normal_form(&a).add(&engine.normal_form(&b));
            assert_eq!(lhs, rhs);
            let nf = engine.normal_form(&a);
            assert_eq!(engine.normal_form(&nf), nf);
        }
    }

    #[test]
    fn s_polynomial_coprime_leads_reduce() {
        // x_0 - x_1 and x_2 - x_1 have coprime leads: S-poly reduces to 0
        let basis = vec![x(0).sub(&x(1)), x(2).sub(&x(1))];
        let engine = NormalFormEngine::new(basis);
        for i in 0..engine.len() {
            for j in i + 1..engine.len() {
                assert!(engine.reduces_to_zero(&engine.s_polynomial(i, j)));
            }
        }
    }
}
