//! Finite fields and binary forms.

pub mod binform;
pub mod ext;
pub mod field;
pub mod poly;

pub use binform::{cubic_root_count, cubic_roots_in_p1, multiple_affine_roots, BinForm, Factorer, Factorization};
pub use ext::ExtField;
pub use field::{prime_power, FieldOp, FieldSpec, Fq, FqElem};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("q = {0} is not a prime power at most 9")]
    UnsupportedOrder(u32),
    #[error("modulus is not irreducible")]
    ReducibleModulus,
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("the zero form has no factorization")]
    ZeroForm,
    #[error("F_{q}^{d} is too large to tabulate")]
    ExtensionTooLarge { q: u32, d: u32 },
}
