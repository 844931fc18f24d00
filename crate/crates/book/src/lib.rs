//! Compiles the guide's code listings as doctests; mdbook cannot resolve
//! crate dependencies when it tests a book on its own.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/noise_model.md")]
pub mod noise_model {}
#[doc = include_str!("../../../book/src/strategy.md")]
pub mod strategy {}
#[doc = include_str!("../../../book/src/rates.md")]
pub mod rates {}
#[doc = include_str!("../../../book/src/theory.md")]
pub mod theory {}
#[doc = include_str!("../../../book/src/probes.md")]
pub mod probes {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
