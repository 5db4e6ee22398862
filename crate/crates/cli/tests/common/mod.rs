#![allow(dead_code)]

use std::fs;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use eduverba_cli::serve::{self, AppState};
use eduverba_core::grid::AssembleConfig;
use eduverba_core::ClueInstructExample;
use serde_json::Value;

pub const GEO: [&str; 5] = ["Amazon", "Sahara", "Andes", "Danube", "Nile"];

const LEAD_REST: &str = " is a well known geographic feature. It appears in many school atlases and travel guides. \
     Visitors come from all over the world to see it each year. Scientists study the region for its climate and wildlife. \
     Several nations share an interest in its protection.";

pub fn lead(keyword: &str) -> String {
    format!("The {keyword}{LEAD_REST}")
}

pub fn corpus() -> Vec<ClueInstructExample> {
    GEO.iter()
        .enumerate()
        .map(|(i, k)| ClueInstructExample {
            id: format!("ex{i}"),
            context: lead(k),
            keyword: k.to_string(),
            category: "Geography".into(),
            clues: vec![format!("First clue number {i}"), format!("Second clue number {i}"), format!("Third clue number {i}")],
            source_url: format!("https://example.org/{k}"),
        })
        .collect()
}

/// Pages named after letter sequences so every keyword is alphabetic.
pub fn write_fixture_pages(root: &Path, category: &str, n: usize) {
    let dir = root.join(category);
    fs::create_dir_all(&dir).unwrap();
    for i in 0..n {
        let title: String = format!("Zq{}", (0..3).map(|k| (b'a' + ((i / 26usize.pow(k)) % 26) as u8) as char).collect::<String>());
        let body = format!("'''{title}'''{LEAD_REST}\n\n== History ==\nMore.\n");
        fs::write(dir.join(format!("{title}.wiki")), body).unwrap();
        fs::write(dir.join(format!("{title}.meta")), format!("views={}\nimportance=Mid\nurl=https://example.org/{title}\n", 20_000 + i)).unwrap();
    }
}

pub struct Server {
    pub addr: SocketAddr,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl Server {
    pub fn start(state: AppState) -> Server {
        let state = Arc::new(state);
        let (addr_tx, addr_rx) = std::sync::mpsc::channel();
        let (stop, stop_rx) = tokio::sync::oneshot::channel::<()>();
        let handle = std::thread::spawn(move || {
            let rt = tokio::runtime::Runtime::new().unwrap();
            rt.block_on(async move {
                let listener = serve::bind("127.0.0.1:0".parse().unwrap()).await.unwrap();
                addr_tx.send(listener.local_addr().unwrap()).unwrap();
                serve::serve(listener, state, None, async {
                    let _ = stop_rx.await;
                })
                .await
                .unwrap();
            });
        });
        Server {
            addr: addr_rx.recv().unwrap(),
            stop: Some(stop),
            handle: Some(handle),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        if let Some(s) = self.stop.take() {
            let _ = s.send(());
        }
        if let Some(h) = self.handle.take() {
            h.join().unwrap();
        }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        self.shutdown();
    }
}

pub fn state(dir: &Path) -> AppState {
    AppState::new(corpus(), &dir.join("ratings.tsv"), AssembleConfig::default()).unwrap()
}

pub fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

pub fn get(url: &str) -> (u16, Value) {
    let mut r = agent().get(url).call().unwrap();
    (r.status().as_u16(), r.body_mut().read_json().unwrap())
}

pub fn post(url: &str, body: Value) -> (u16, Value) {
    let mut r = agent().post(url).send_json(&body).unwrap();
    (r.status().as_u16(), r.body_mut().read_json().unwrap())
}
