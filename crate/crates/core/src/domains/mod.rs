pub mod blockworld;
pub mod maze;
pub mod regression;
pub mod switchboard;
