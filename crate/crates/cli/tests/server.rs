// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::sync::Arc;

use wscr_cli::{serve, serve_broker, HttpTransport, ServeError};
use wscr_core::discovery::{query_to_xml, Broker, BrokerConfig, DiscoveryQuery};
use wscr_core::proxy::Transport;
use wscr_core::wire;
use wscr_core::xml;

fn data(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name);
    fs::read_to_string(path).unwrap()
}

fn ontology() -> wscr_core::Ontology {
    wscr_core::Ontology::parse(&data("ontology.txt")).unwrap()
}

fn converter_query() -> DiscoveryQuery {
    wscr_core::parse_query_xml(&data("query.xml")).unwrap()
}

#[test]
fn publish_discover_matches_in_process() {
    let broker = Arc::new(Broker::in_memory(ontology()));
    let server = serve_broker(Arc::clone(&broker), 0).unwrap();
    let http = HttpTransport::default();
    let base = server.base_url();

    for file in ["converter.xml", "fx-rates.xml"] {
        let body = xml::envelope(&data(file));
        let resp = http
            .send("POST", &format!("{base}/publish"), &body)
            .unwrap();
        assert_eq!(resp.status, 200, "{}", resp.body);
        let cert =
            wire::certificate_from_element(&xml::open_envelope(&resp.body).unwrap()).unwrap();
        assert!(cert.certificate_id.starts_with("cert-"));
    }

    let q = converter_query();
    let resp = http
        .send(
            "POST",
            &format!("{base}/discover"),
            &xml::envelope(&query_to_xml(&q)),
        )
        .unwrap();
    assert_eq!(resp.status, 200);
    let direct = broker.discover(&q).unwrap();
    assert_eq!(
        resp.body,
        xml::envelope(&wire::result_to_xml(&direct, None))
    );
    assert_eq!(direct.services[0].record.service_key, "svc-001");
    server.stop().unwrap();
}

#[test]
fn error_statuses() {
    let server = serve_broker(Arc::new(Broker::in_memory(ontology())), 0).unwrap();
    let http = HttpTransport::default();
    let base = server.base_url();

    let resp = http
        .send("POST", &format!("{base}/discover"), "<Envelope><Body>")
        .unwrap();
    assert_eq!(resp.status, 400);
    let fault = xml::Fault::from_element(&xml::open_envelope(&resp.body).unwrap()).unwrap();
    assert_eq!(fault.code, "MalformedXML");

    let resp = http
        .send("GET", &format!("{base}/services/nope"), "")
        .unwrap();
    assert_eq!(resp.status, 404);

    let body = xml::envelope(&data("converter.xml"));
    assert_eq!(
        http.send("POST", &format!("{base}/publish"), &body)
            .unwrap()
            .status,
        200
    );
    let dup = http
        .send("POST", &format!("{base}/publish"), &body)
        .unwrap();
    assert_eq!(dup.status, 409);
    assert!(dup.body.contains("DuplicateKey"));

    let resp = http
        .send("GET", &format!("{base}/services/svc-001"), "")
        .unwrap();
    assert_eq!(resp.status, 200);
    assert!(resp.body.contains("<Certificate "));

    let health = http.send("GET", &format!("{base}/health"), "").unwrap();
    assert!(health.body.contains("services=\"1\""));
    assert_eq!(
        http.send("GET", &format!("{base}/publish"), "")
            .unwrap()
            .status,
        405
    );
}

#[test]
fn repeated_discovery_is_byte_identical() {
    let broker = Arc::new(Broker::in_memory(ontology()));
    broker
        .publish(wire::parse_record_xml(&data("converter.xml")).unwrap())
        .unwrap();
    broker
        .publish(wire::parse_record_xml(&data("fx-rates.xml")).unwrap())
        .unwrap();
    let server = serve_broker(broker, 0).unwrap();
    let http = HttpTransport::default();
    let url = format!("{}/discover?debug=1", server.base_url());
    let body = xml::envelope(&query_to_xml(&converter_query()));
    let first = http.send("POST", &url, &body).unwrap().body;
    for _ in 0..5 {
        assert_eq!(http.send("POST", &url, &body).unwrap().body, first);
    }
    assert!(first.contains("<Stages"));
}

#[test]
fn port_in_use_is_reported() {
    let holder = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = holder.local_addr().unwrap().port();
    let err = serve_broker(Arc::new(Broker::in_memory(ontology())), port)
        .err()
        .unwrap();
    assert!(matches!(err, ServeError::PortInUse(p) if p == port));
}

#[test]
fn bad_config_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broker.conf");
    fs::write(&path, "port=0\nontology_path=missing.txt\n").unwrap();
    let cfg = BrokerConfig::load(&path).unwrap();
    let err = serve(&cfg).err().unwrap();
    assert!(err.to_string().contains("ontology_path"), "{err}");

    fs::write(&path, "port=http\nontology_path=o.txt\n").unwrap();
    let err = BrokerConfig::load(&path).unwrap_err();
    assert!(err.to_string().contains("port"), "{err}");
}

#[test]
fn state_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ontology.txt"), data("ontology.txt")).unwrap();
    let conf = dir.path().join("broker.conf");
    fs::write(
        &conf,
        "port=0\nsnapshot_path=reg.jsonl\nontology_path=ontology.txt\n",
    )
    .unwrap();
    let cfg = BrokerConfig::load(&conf).unwrap();
    let http = HttpTransport::default();

    let server = serve(&cfg).unwrap();
    let base = server.base_url();
    let resp = http
        .send(
            "POST",
            &format!("{base}/publish"),
            &xml::envelope(&data("converter.xml")),
        )
        .unwrap();
    assert_eq!(resp.status, 200);
    let fb = r#"<Envelope><Body><Feedback consumer="c1" serviceKey="svc-001" rating="4"/></Body></Envelope>"#;
    assert_eq!(
        http.send("POST", &format!("{base}/feedback"), fb)
            .unwrap()
            .status,
        200
    );
    let before = http
        .send(
            "POST",
            &format!("{base}/discover"),
            &xml::envelope(&query_to_xml(&converter_query())),
        )
        .unwrap()
        .body;
    server.stop().unwrap();

    let server = serve(&cfg).unwrap();
    let base = server.base_url();
    let after = http
        .send(
            "POST",
            &format!("{base}/discover"),
            &xml::envelope(&query_to_xml(&converter_query())),
        )
        .unwrap()
        .body;
    assert_eq!(before, after);
    assert_eq!(server.broker().feedback().rating_count("svc-001"), 1);
}
