use std::net::SocketAddr;

use eduverba_cli::mock_llm::{router, MockConfig, COMPLETIONS_PATH};
use eduverba_core::generate::mock::FaultRates;
use eduverba_core::generate::{generate_clues, GenParams, GenerateError, GenerationRequest, HttpChatBackend};
use eduverba_core::{ClueStatus, PromptTemplate};

fn start(cfg: MockConfig) -> SocketAddr {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, router(cfg)).await.unwrap();
        });
    });
    rx.recv().unwrap()
}

fn params(addr: SocketAddr) -> GenParams {
    GenParams {
        endpoint: format!("http://{addr}{COMPLETIONS_PATH}"),
        max_retries: 3,
        ..GenParams::default()
    }
}

fn request(keyword: &str) -> GenerationRequest {
    let context = format!("{keyword} is a river in South America. It carries more water than any other river. Many tributaries join it.");
    GenerationRequest {
        prompt: PromptTemplate::default().render(&context, keyword, "Geography").unwrap(),
        keyword: keyword.into(),
    }
}

#[test]
fn http_backend_gets_valid_clues() {
    let addr = start(MockConfig {
        seed: 1,
        rates: FaultRates { malformed: 0.0, leak: 0.0 },
        api_key: Some("secret".into()),
    });
    let p = params(addr);
    let set = generate_clues(&request("Amazon"), &HttpChatBackend::new(&p, Some("secret".into())), &p).unwrap();
    assert_eq!(set.status, ClueStatus::Valid);
    assert_eq!(set.clues.len(), 3);
    assert!(set.clues.iter().all(|c| !c.to_lowercase().contains("amazon")));
}

#[test]
fn wrong_key_is_auth_failure() {
    let addr = start(MockConfig {
        seed: 1,
        rates: FaultRates { malformed: 0.0, leak: 0.0 },
        api_key: Some("secret".into()),
    });
    let p = params(addr);
    let err = generate_clues(&request("Amazon"), &HttpChatBackend::new(&p, Some("wrong".into())), &p).unwrap_err();
    assert!(matches!(err, GenerateError::AuthFailure(_)), "{err}");
}

#[test]
fn always_malformed_exhausts_retries() {
    let addr = start(MockConfig {
        seed: 1,
        rates: FaultRates { malformed: 1.0, leak: 0.0 },
        api_key: None,
    });
    let p = params(addr);
    let set = generate_clues(&request("Amazon"), &HttpChatBackend::new(&p, None), &p).unwrap();
    assert_eq!(set.status, ClueStatus::Malformed);
    assert_eq!(set.attempts, 3);
}

#[test]
fn closed_port_is_unreachable() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let p = GenParams {
        max_retries: 2,
        ..params(addr)
    };
    let err = generate_clues(&request("Amazon"), &HttpChatBackend::new(&p, None), &p).unwrap_err();
    assert!(matches!(err, GenerateError::EndpointUnreachable { attempts: 2, .. }), "{err}");
}
