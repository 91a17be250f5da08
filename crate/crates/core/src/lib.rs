//! Exact-arithmetic engine for inductive-confirmation rules (projectability,
//! reasoning by analogy, Nicod's condition) over finite universes described
//! by two monadic predicates F and G.

pub mod acceptance;
pub mod cosmology;
pub mod measures;
pub mod model;
pub mod prop_lang;
pub mod rational;
pub mod rules;
pub mod search;
