//! The guide's chapters, included so that `cargo test` runs their code
//! listings as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/expressions.md")]
pub mod expressions {}
#[doc = include_str!("../../../book/src/problems.md")]
pub mod problems {}
#[doc = include_str!("../../../book/src/green.md")]
pub mod green {}
#[doc = include_str!("../../../book/src/quadrature.md")]
pub mod quadrature {}
#[doc = include_str!("../../../book/src/iteration.md")]
pub mod iteration {}
#[doc = include_str!("../../../book/src/hypotheses.md")]
pub mod hypotheses {}
#[doc = include_str!("../../../book/src/studies.md")]
pub mod studies {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
