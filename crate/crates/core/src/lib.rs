pub mod eval;
pub mod export;
pub mod features;
pub mod hypergraph;
pub mod layout;
pub mod model;
pub mod parser;
