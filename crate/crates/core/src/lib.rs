pub mod cli;
pub mod cmred;
pub mod coupling;
pub mod dynsim;
pub mod graphlab;
pub mod netlin;
pub mod nform;
pub mod numkit;
