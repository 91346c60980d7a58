//! Command-line tool and HTTP JSON API for pathrisk models.

pub mod api;
pub mod cli;
pub mod server;
