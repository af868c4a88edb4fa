// SPDX-License-Identifier: Apache-2.0

//! Blocking HTTP implementation of [`Transport`].

use std::time::Duration;

use ureq::Agent;
use wscr_core::proxy::{Transport, TransportError, TransportResponse};

pub struct HttpTransport {
    agent: Agent,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpTransport { agent }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(30))
    }
}

impl Transport for HttpTransport {
    fn send(
        &self,
        method: &str,
        url: &str,
        body: &str,
    ) -> Result<TransportResponse, TransportError> {
        let fail = |e: ureq::Error| TransportError {
            url: url.to_string(),
            reason: e.to_string(),
        };
        let result = match method {
            "GET" => self.agent.get(url).call(),
            "POST" => self
                .agent
                .post(url)
                .content_type("application/xml")
                .send(body),
            other => {
                return Err(TransportError {
                    url: url.to_string(),
                    reason: format!("unsupported method {other}"),
                })
            }
        };
        let mut resp = result.map_err(fail)?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(fail)?;
        Ok(TransportResponse { status, body })
    }
}
