// SPDX-License-Identifier: Apache-2.0

//! HTTP server, HTTP transport, and command-line front end for `wscr-core`.

pub mod cli;
pub mod http;
pub mod server;

pub use cli::run;
pub use http::HttpTransport;
pub use server::{serve, serve_broker, ServeError, ServerHandle};
