pub mod aggregate;
pub mod config;
pub mod forecast;
pub mod hash;
pub mod simulate;
pub mod time;
pub mod trace;
pub mod workload;
