//! File formats, corpus handling and the command-line front end for
//! [`homgraph_core`].

pub mod cli;
pub mod compare;
pub mod corpus;
pub mod features_csv;
pub mod report;
pub mod wire;
