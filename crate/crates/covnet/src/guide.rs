//! The user guide, one module per book chapter (`book/` in the repository
//! root, built with mdbook). Each chapter's fenced Rust blocks compile and
//! run as doc-tests of this crate, so the book cannot drift from the API it
//! documents.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}

#[doc = include_str!("../../../book/src/closed-forms.md")]
pub mod closed_forms {}

#[doc = include_str!("../../../book/src/scheduling.md")]
pub mod scheduling {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/extensions.md")]
pub mod extensions {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
