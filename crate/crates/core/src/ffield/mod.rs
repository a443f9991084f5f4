//! Binary field arithmetic, polynomials, extension fields and root finding.

pub mod ext;
pub mod gf;
pub mod linalg;
pub mod poly;
pub mod quotient;

pub use ext::{factor_roots, ExtElem, ExtField};
pub use gf::{gf_add, gf_inv, gf_mul, reduction_poly, FieldElement, GfField};
pub use poly::{interpolate, poly_eval, Poly};
pub use quotient::{find_irreducible, is_irreducible, quotient_pow, QuotientElement, QuotientRing};
