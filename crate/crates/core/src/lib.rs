//! Concordance invariants of knots given by Seifert matrices: Levine–Tristram
//! signatures, linking forms of 2-fold branched covers, Casson–Gordon sums and
//! certificates of linear independence for satellite families.

pub mod certificate;
pub mod cover;
pub mod cyclotomic;
pub mod interval;
pub mod knot;
pub mod matrix;
pub mod obstruction;
pub mod modular;
pub mod poly;
pub mod signature;
pub mod snf;
pub mod subgroups;
