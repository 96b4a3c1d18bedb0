//! Sock-puppet audits of a simulated short-video recommendation platform.
//!
//! A campaign conditions bots on partisan channels, records what the
//! platform recommends to them, and compares the labeled logs against
//! engagement-weighted baselines. See the book under `book/` for a tour.

pub mod analysis;
pub mod artifacts;
pub mod campaign;
pub mod config;
pub mod harness;
pub mod labeling;
pub mod misinfo;
pub mod model;
pub mod report;
pub mod seed;
pub mod sim;
pub mod special;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/seeds.md")]
mod book_seeds {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/platform.md")]
mod book_platform {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/campaign.md")]
mod book_campaign {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/skew.md")]
mod book_skew {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/sensitivity.md")]
mod book_sensitivity {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/labeling.md")]
mod book_labeling {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/regression.md")]
mod book_regression {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/misinfo.md")]
mod book_misinfo {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
