pub mod space;
pub mod maps;
pub mod checker;
pub mod recover;
pub mod explore;
pub mod cli;
