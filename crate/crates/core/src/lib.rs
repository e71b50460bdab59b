pub mod catalog;
pub mod chart;
pub mod cli;
pub mod conformal;
pub mod correspondence;
pub mod dual;
pub mod error;
pub mod invariance;
pub mod io;
pub mod lorentz;
pub mod mesh;
pub mod radial;
pub mod report;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod chapter_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/lorentz.md")]
mod chapter_lorentz {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/conformal.md")]
mod chapter_conformal {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/correspondence.md")]
mod chapter_correspondence {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/catalog.md")]
mod chapter_catalog {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/invariance.md")]
mod chapter_invariance {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/radial.md")]
mod chapter_radial {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod chapter_cli {}
