pub mod mra;
pub mod greenop;
pub mod scf;
pub mod secondq;
pub mod wfn;
pub mod activespace;
pub mod refine;
