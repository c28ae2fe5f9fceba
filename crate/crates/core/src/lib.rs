pub mod cli;
pub mod engine;
pub mod fixgen;
pub mod lang;
pub mod mbfl;
pub mod sbfl;
pub mod snapshot;
pub mod testkit;
pub mod validation;
