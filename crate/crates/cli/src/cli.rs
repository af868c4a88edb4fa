// SPDX-License-Identifier: Apache-2.0

//! `wscr` command-line client.
//!
//! Machine-readable XML goes to stdout and a human summary to stderr.
//! Exit status: 0 on success (including `NoMatch`), 1 on user errors, 2 when
//! the registry cannot be reached.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use wscr_core::discovery::{parse_query_xml, BrokerConfig, DiscoveryResult};
use wscr_core::proxy::{
    ProxyError, ServiceProxy, Transport, DEFAULT_ENDPOINT, DEFAULT_TTL, ENDPOINT_ENV,
};
use wscr_core::ranker::Feedback;
use wscr_core::wire;

use crate::server;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_TRANSPORT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wscr", version, about = "QoS-aware service registry client")]
struct Cli {
    /// Registry base URL.
    #[arg(long, global = true, env = ENDPOINT_ENV, default_value = DEFAULT_ENDPOINT)]
    endpoint: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Publish a <ServiceRecord> document and print its certificate.
    Publish { record: PathBuf },
    /// Run a <DiscoveryQuery> document and print the ranked result.
    Discover {
        query: PathBuf,
        /// Keep only the first N ranked services.
        #[arg(long)]
        top: Option<usize>,
        /// Include the per-stage candidate sets.
        #[arg(long)]
        debug_stages: bool,
    },
    /// Rate a service from 1 to 5.
    Feedback {
        key: String,
        #[arg(allow_negative_numbers = true)]
        rating: String,
        #[arg(long, default_value = "cli")]
        consumer: String,
    },
    /// Print a stored service record.
    Get { key: String },
    /// Run the broker until interrupted.
    Serve { config: PathBuf },
}

enum Failure {
    User(String),
    Transport(String),
}

impl From<ProxyError> for Failure {
    fn from(e: ProxyError) -> Self {
        if e.is_transport() || matches!(e, ProxyError::BadResponse(_)) {
            Failure::Transport(e.to_string())
        } else {
            Failure::User(e.to_string())
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::User(format!("{}: {e}", path.display())))
}

/// Runs one command. `transport` carries every registry request.
pub fn run<I, T>(args: I, transport: T, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator,
    I::Item: Into<OsString> + Clone,
    T: Transport,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USER } else { EXIT_OK };
        }
    };
    let proxy = ServiceProxy::new(transport, cli.endpoint, DEFAULT_TTL);
    match execute(cli.command, &proxy, out, err) {
        Ok(()) => EXIT_OK,
        Err(Failure::User(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USER
        }
        Err(Failure::Transport(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_TRANSPORT
        }
    }
}

fn execute<T: Transport>(
    command: Command,
    proxy: &ServiceProxy<T>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    match command {
        Command::Publish { record } => {
            let rec = wire::parse_record_xml(&read_file(&record)?)
                .map_err(|e| Failure::User(format!("{}: {e}", record.display())))?;
            let cert = proxy.publish(&rec)?;
            let _ = writeln!(out, "{}", wire::certificate_to_xml(&cert));
            let _ = writeln!(
                err,
                "published {} ({})",
                cert.service_key, cert.certificate_id
            );
        }
        Command::Discover {
            query,
            top,
            debug_stages,
        } => {
            let q = parse_query_xml(&read_file(&query)?)
                .map_err(|e| Failure::User(format!("{}: {e}", query.display())))?;
            let (mut result, stages, _) = proxy.discover_remote(&q, debug_stages)?;
            if let Some(n) = top {
                result.services.truncate(n);
            }
            let _ = writeln!(out, "{}", wire::result_to_xml(&result, stages.as_ref()));
            let _ = write!(err, "{}", summary_table(&result));
            if let Some(s) = stages {
                let _ = writeln!(
                    err,
                    "stages: matched={} filtered={} ranked={}",
                    s.matched.len(),
                    s.filtered.len(),
                    s.ranked.len()
                );
            }
        }
        Command::Feedback {
            key,
            rating,
            consumer,
        } => {
            let rating: i64 = rating
                .parse()
                .ok()
                .filter(|r| (1..=5).contains(r))
                .ok_or_else(|| {
                    Failure::User(format!("rating must be an integer 1-5, got `{rating}`"))
                })?;
            let fb = Feedback {
                consumer_id: consumer,
                service_key: key,
                rating,
                at: chrono::Utc::now(),
            };
            let (count, mean) = proxy.feedback(&fb)?;
            let _ = writeln!(out, "{}", wire::feedback_to_xml(&fb));
            let _ = writeln!(err, "{}: {count} rating(s), mean {mean}", fb.service_key);
        }
        Command::Get { key } => {
            let rec = proxy.get_service(&key)?;
            let _ = writeln!(out, "{}", wire::record_to_xml(&rec));
            let _ = writeln!(err, "{}  {}  [{}]", rec.service_key, rec.name, rec.concept);
        }
        Command::Serve { config } => serve_until_interrupted(&config, err)?,
    }
    Ok(())
}

fn serve_until_interrupted(config: &Path, err: &mut dyn Write) -> Result<(), Failure> {
    let cfg = BrokerConfig::load(config).map_err(|e| Failure::User(e.to_string()))?;
    let handle = server::serve(&cfg).map_err(|e| Failure::User(e.to_string()))?;
    let _ = writeln!(err, "listening on {} (Ctrl-C to stop)", handle.base_url());
    let rt = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::User(e.to_string()))?;
    if let Err(e) = rt.block_on(tokio::signal::ctrl_c()) {
        let _ = writeln!(err, "cannot wait for Ctrl-C: {e}");
    }
    handle.stop().map_err(|e| Failure::User(e.to_string()))?;
    let _ = writeln!(err, "stopped");
    Ok(())
}

fn truncate(s: &str, width: usize) -> String {
    if s.chars().count() <= width {
        s.to_string()
    } else {
        let mut t: String = s.chars().take(width.saturating_sub(1)).collect();
        t.push('~');
        t
    }
}

/// Fixed-width table of the ranked services.
pub fn summary_table(result: &DiscoveryResult) -> String {
    let mut s = format!(
        "status: {} ({} services)\n",
        result.status.as_str(),
        result.services.len()
    );
    if result.services.is_empty() {
        return s;
    }
    s.push_str(&format!(
        "{:>4}  {:<16}  {:<24}  {:>8}  {:>8}  {:>8}\n",
        "rank", "key", "name", "name_sim", "qos", "final"
    ));
    for r in &result.services {
        s.push_str(&format!(
            "{:>4}  {:<16}  {:<24}  {:>8.4}  {:>8.4}  {:>8.4}\n",
            r.rank,
            truncate(&r.record.service_key, 16),
            truncate(&r.record.name, 24),
            r.name_similarity,
            r.qos_score,
            r.final_score
        ));
    }
    s
}
