//! Script language, session execution, and identity suites for the command
//! line tool.

pub mod script;
pub mod session;
pub mod suites;
