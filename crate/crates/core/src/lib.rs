//! Combinatorial models for matroids: lattices of flats, combinatorial
//! blowups, nested set complexes, Orlik-Solomon and De Concini-Procesi
//! algebras, and the bigraded differential graded algebra that interpolates
//! between them.  All linear algebra is over the rationals, exact.
//!
//! The crate is organized in layers:
//!
//! * [`poset`] - finite posets, meet-semilattices, rank functions;
//! * [`matroid`] - matroids from circuits, lattices of flats, building sets;
//! * [`blowup`] - combinatorial blowups, partial building sets, nested sets;
//! * [`ratmat`] - exact rational matrices (rank, kernel, solving);
//! * [`algebra`] - the bigraded exterior-commutative monomial algebra with
//!   a fixed term order and Groebner normal forms;
//! * [`os`] - Orlik-Solomon algebras and flag complexes;
//! * [`dp`] - De Concini-Procesi (Chow) algebras and Poincare duality;
//! * [`model`] - the bigraded differential graded algebra `B(M,H)`;
//! * [`sheaf`] - sheaves on finite posets and the interval-poset machinery.

pub mod algebra;
pub mod bits;
pub mod blowup;
pub mod dp;
pub mod matroid;
pub mod model;
pub mod os;
pub mod poset;
pub mod ratmat;
pub mod report;
pub mod sheaf;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

/// Shorthand for the exact scalar type used throughout.
pub type Rat = num_rational::BigRational;

/// `0` as a [`Rat`].
pub fn rat_zero() -> Rat {
    use num_traits::Zero;
    Rat::zero()
}

/// `1` as a [`Rat`].
pub fn rat_one() -> Rat {
    use num_traits::One;
    Rat::one()
}

/// An integer as a [`Rat`].
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(num_bigint::BigInt::from(n))
}
