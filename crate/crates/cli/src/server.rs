// SPDX-License-Identifier: Apache-2.0

//! HTTP front end for a [`Broker`].
//!
//! Every request is answered by [`Broker::handle`], so the HTTP path and the
//! in-process loopback path produce the same bytes.

use std::io;
use std::net::{SocketAddr, TcpListener};
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::http::{header, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response as HttpResponse};
use axum::Router;
use thiserror::Error;
use tokio::sync::oneshot;
use wscr_core::discovery::{Broker, BrokerConfig, ConfigError, Response};
use wscr_core::registry::StoreError;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("PortInUse: port {0} is already bound")]
    PortInUse(u16),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("server i/o: {0}")]
    Io(#[from] io::Error),
}

/// A running server. Dropping the handle stops it.
pub struct ServerHandle {
    addr: SocketAddr,
    broker: Arc<Broker>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn broker(&self) -> &Arc<Broker> {
        &self.broker
    }

    /// Stops accepting requests, waits for in-flight ones, then flushes the
    /// broker's journals.
    pub fn stop(mut self) -> Result<(), StoreError> {
        self.halt();
        self.broker.shutdown()
    }

    fn halt(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            match t.join() {
                Ok(Err(e)) => log::error!("server exited with error: {e}"),
                Err(_) => log::error!("server thread panicked"),
                Ok(Ok(())) => {}
            }
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if self.thread.is_some() {
            self.halt();
            if let Err(e) = self.broker.shutdown() {
                log::error!("flushing journals on drop: {e}");
            }
        }
    }
}

/// Opens the broker described by `cfg` and serves it on `127.0.0.1:port`.
pub fn serve(cfg: &BrokerConfig) -> Result<ServerHandle, ServeError> {
    let listener = bind(cfg.port)?;
    let broker = Arc::new(Broker::from_config(cfg)?);
    serve_listener(broker, listener)
}

/// Serves an existing broker. Port 0 picks a free port.
pub fn serve_broker(broker: Arc<Broker>, port: u16) -> Result<ServerHandle, ServeError> {
    serve_listener(broker, bind(port)?)
}

fn bind(port: u16) -> Result<TcpListener, ServeError> {
    TcpListener::bind(("127.0.0.1", port)).map_err(|e| match e.kind() {
        io::ErrorKind::AddrInUse => ServeError::PortInUse(port),
        _ => ServeError::Io(e),
    })
}

fn serve_listener(broker: Arc<Broker>, listener: TcpListener) -> Result<ServerHandle, ServeError> {
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_io()
        .thread_name("wscr-http")
        .build()?;
    let (tx, rx) = oneshot::channel::<()>();
    let app_broker = Arc::clone(&broker);
    let app = Router::new().fallback(move |method: Method, uri: Uri, body: Bytes| {
        let broker = Arc::clone(&app_broker);
        async move { dispatch(broker, method, uri, body).await }
    });
    let thread = std::thread::Builder::new()
        .name("wscr-server".into())
        .spawn(move || {
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener)?;
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
            })
        })?;
    log::info!("serving on http://{addr}");
    Ok(ServerHandle {
        addr,
        broker,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}

async fn dispatch(broker: Arc<Broker>, method: Method, uri: Uri, body: Bytes) -> HttpResponse {
    let target = uri
        .path_and_query()
        .map(|pq| pq.as_str().to_string())
        .unwrap_or_else(|| uri.path().to_string());
    let response = match String::from_utf8(body.to_vec()) {
        Ok(text) => {
            let method = method.as_str().to_string();
            // handlers may touch the journal files
            tokio::task::spawn_blocking(move || broker.handle(&method, &target, &text))
                .await
                .unwrap_or_else(|e| Response::fault(500, "InternalError", e.to_string()))
        }
        Err(e) => Response::fault(400, "MalformedXML", format!("body is not UTF-8: {e}")),
    };
    let status = StatusCode::from_u16(response.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (
        status,
        [(header::CONTENT_TYPE, "application/xml")],
        response.body,
    )
        .into_response()
}
