//! A labelled tableau prover for interpretability logics whose frame
//! condition is a set of strict universal Horn clauses (IL, ILM, ILP and
//! user-supplied conditions).
//!
//! Pipeline: [`formula::parse`] a goal, pick a [`frame::FrameCondition`],
//! and call [`tableau::prove`] or [`tableau::run`]. Closed tableaux are
//! proofs; open saturated branches come with a countermodel that has
//! already been re-checked by the forcing evaluator in [`semantics`].

pub mod cli;
pub mod formula;
pub mod frame;
pub mod gen;
pub mod horn;
pub mod label;
pub mod semantics;
pub mod structure;
pub mod tableau;

pub use formula::{closure_set, parse, render, Formula};
pub use frame::{parse_horn, preset, FrameCondition, HornClause, Preset};
pub use label::Label;
pub use semantics::{check_frame, extract_model, random_model, verify_hintikka, Model};
pub use structure::LabelStructure;
pub use tableau::{apply_rule, prove, run, Bounds, ProverResult, RuleId, Tableau, Verdict};
