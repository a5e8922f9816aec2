use std::io::Write;
use std::sync::Arc;

use tokio::io::{AsyncReadExt, AsyncWriteExt};

use urbansense::ingestion::{synthesize_scenario, ScenarioSpec};
use urbansense::service::{bind, serve, Service, ServiceConfig, ServiceError, StoreError, TAIL_FILE};

fn small_log() -> Vec<urbansense::model::Message> {
    let mut spec = ScenarioSpec::embedded();
    spec.agents.peaceful = 30;
    spec.agents.violent = 3;
    spec.agents.bystander = 10;
    spec.agents.remote = 5;
    synthesize_scenario(&spec).unwrap().0.into_messages()
}

#[test]
fn torn_tail_loses_one_message_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ServiceConfig { snapshot_every: 1_000_000, ..ServiceConfig::default() };
    let msgs = small_log();
    {
        let (svc, w) = Service::open(&cfg, dir.path()).unwrap();
        assert!(w.is_empty());
        for m in &msgs[..20] {
            svc.ingest(m.clone()).unwrap();
        }
    }
    let tail = dir.path().join(TAIL_FILE);
    let text = std::fs::read_to_string(&tail).unwrap();
    let keep = text.trim_end().rfind('\n').unwrap() + 1;
    // cut the last entry in half
    let torn = &text[..keep + (text.len() - keep) / 2];
    std::fs::write(&tail, torn).unwrap();
    let (svc, warnings) = Service::open(&cfg, dir.path()).unwrap();
    assert_eq!(warnings.len(), 1);
    assert_eq!(svc.read(|s| s.applied), 19);
    // the store keeps accepting writes after the truncation
    svc.ingest(msgs[19].clone()).unwrap();
    drop(svc);
    let (svc, warnings) = Service::open(&cfg, dir.path()).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(svc.read(|s| s.applied), 20);
}

#[test]
fn recovery_is_idempotent_across_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ServiceConfig { snapshot_every: 7, ..ServiceConfig::default() };
    let msgs = small_log();
    let before = {
        let (svc, _) = Service::open(&cfg, dir.path()).unwrap();
        for m in &msgs[..50] {
            svc.ingest(m.clone()).unwrap();
        }
        svc.read(|s| s.clone())
    };
    let once = Service::open(&cfg, dir.path()).unwrap().0.read(|s| s.clone());
    let twice = Service::open(&cfg, dir.path()).unwrap().0.read(|s| s.clone());
    assert_eq!(before, once);
    assert_eq!(once, twice);
}

#[test]
fn corrupt_snapshot_refuses_to_start() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::File::create(dir.path().join("snapshot.json")).unwrap().write_all(b"{\"engine\": [").unwrap();
    match Service::open(&ServiceConfig::default(), dir.path()) {
        Err(ServiceError::Store(StoreError::CorruptSnapshot { offset, .. })) => assert_eq!(offset, 12),
        Err(e) => panic!("unexpected error {e}"),
        Ok(_) => panic!("started on a corrupt snapshot"),
    }
}

#[tokio::test]
async fn busy_port_is_a_startup_error_and_shutdown_is_graceful() {
    let listener = bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    assert!(matches!(bind(&addr).await, Err(ServiceError::Bind { .. })));

    let svc = Arc::new(Service::new(&ServiceConfig::default()).unwrap());
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(serve(svc.clone(), listener, async {
        let _ = stopped.await;
    }));

    let mut conn = tokio::net::TcpStream::connect(&addr).await.unwrap();
    conn.write_all(b"GET /v1/healthz HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").await.unwrap();
    let mut buf = String::new();
    conn.read_to_string(&mut buf).await.unwrap();
    assert!(buf.starts_with("HTTP/1.1 200"), "{buf}");
    assert!(buf.contains("\"status\":\"ok\""));

    // an open stream must not hold the shutdown up
    let mut sse = tokio::net::TcpStream::connect(&addr).await.unwrap();
    sse.write_all(b"GET /v1/stream HTTP/1.1\r\nHost: x\r\n\r\n").await.unwrap();
    let mut head = [0u8; 12];
    sse.read_exact(&mut head).await.unwrap();
    stop.send(()).unwrap();
    tokio::time::timeout(std::time::Duration::from_secs(10), server).await.unwrap().unwrap().unwrap();
}
