//! Model checking for fragments of Halpern-Shoham interval temporal logic
//! over finite Kripke structures, under homogeneity.
//!
//! Engines:
//! * [`checker`]: representative-track checking for the fragment with
//!   `A`, `Ai`, `B`, `Bi`, `Ei`, driven by [`unravel`] and [`descriptor`].
//! * [`conp`]: counterexample search for the universal fragment with `A`,
//!   `Ai`, `B`, `E`, over descriptor elements.
//! * [`oracle`]: independent reference semantics used to cross-check both.

pub mod bitset;
pub mod checker;
pub mod conp;
pub mod descriptor;
pub mod formula;
pub mod kripke;
pub mod oracle;
pub mod random;
pub mod reductions;
pub mod unravel;
