//! A meta-interpretive learning engine with an unsupervised play/build
//! bootstrapping loop.
//!
//! The learner proves example atoms with metarule-guided search and
//! predicate invention ([`engine`]), over background knowledge that the
//! play stage grows by solving self-generated tasks ([`playgol`]). Two
//! domains plug in ([`robot`], [`strings`]), an independent interpreter
//! cross-checks and scores solutions ([`interp`]), closed-form calculators
//! cover the hypothesis-space and sample-complexity quantities
//! ([`theory`]), and an experiment harness reproduces the play-budget
//! sweeps at configurable scale ([`harness`]).

pub mod engine;
pub mod harness;
pub mod interp;
pub mod logic;
pub mod playgol;
pub mod robot;
pub mod strings;
pub mod theory;
pub mod util;
