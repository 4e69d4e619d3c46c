pub mod corpus;
pub mod faultmodel;
pub mod frontend;
pub mod localize;
pub mod logic;
pub mod mutation;
pub mod normalizer;
pub mod solvers;
pub mod span;
pub mod vcgen;
