//! File formats, CSV reports and the command-line front end for
//! [`mchap_core`].

pub mod cli;
pub mod format;
pub mod report;
