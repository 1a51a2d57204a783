//! Exact toolkit for Hardy-type nonlocality arguments in the bipartite
//! two-input no-signaling polytope.
//!
//! - [`rational`] and [`lp`]: exact rationals and a two-phase simplex.
//! - [`nosignaling`]: scenarios, boxes and the polytope's constraint rows.
//! - [`vertices`]: closed-form local and nonlocal extremal boxes, locality.
//! - [`hardy`]: conventional and relaxed Hardy arguments, their optima,
//!   and the PP / PN / PPC quantities.
//! - [`cli`]: the `hardy-ns` command line.

pub mod cli;
pub mod hardy;
pub mod lp;
pub mod nosignaling;
pub mod rational;
pub mod vertices;

pub use hardy::{ArgumentKind, HardyArgument, RelabelSearch};
pub use nosignaling::{JointBox, Scenario};
pub use rational::Rational;
