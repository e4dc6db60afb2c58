//! Structure of the normalized unit group `V(Z/p^e [G])` for a finite abelian
//! p-group `G`, with a brute-force oracle for checking the closed forms.
//!
//! Ring coefficients are stored in any unsigned word implementing [`Residue`];
//! arithmetic is carried out in `u64`.

pub mod error;
pub mod oracle;
pub mod pgroup;
pub mod residue;
pub mod ring;
pub mod theory;
pub mod zpelin;

pub use error::{Error, Result};
pub use oracle::{
    census, enumerate_units, invariants_from_histogram, order_histogram, verify_check, Census,
    CheckId, CheckParams, OrderHistogram, Verdict, VerificationReport, Verifier, DEFAULT_BUDGET,
};
pub use pgroup::{GroupElement, GroupSpec};
pub use residue::{PPower, Residue};
pub use ring::{binomial_p_power, GroupRing, RingElement, RingSpec};
pub use theory::{
    structure_report, v_invariants, AbelianInvariants, DimensionSubgroup, StructureReport,
};
pub use zpelin::{howell_form, module_membership, module_size_exp, HowellBasis, ResidueMatrix};

pub type RingElement8 = RingElement<u8>;
pub type RingElement16 = RingElement<u16>;
pub type RingElement32 = RingElement<u32>;
pub type RingElement64 = RingElement<u64>;
pub type Matrix32 = ResidueMatrix<u32>;
pub type Matrix64 = ResidueMatrix<u64>;
