//! HTTP service and command-line front end over `cinemotion-core`.

pub mod api;
pub mod config;
pub mod server;
