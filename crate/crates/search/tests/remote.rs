use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use glyphpress_core::config::RenderConfig;
use glyphpress_core::metrics::{HeuristicTokenizer, VisualTokenModel};
use glyphpress_core::EmbeddedFont;
use glyphpress_search::critic::{critic_propose, CriticRow, RemoteCritic};
use glyphpress_search::eval::{EchoGold, RemoteJudge, RemoteModel, ScoreOutcome};
use glyphpress_search::remote::RemoteError;
use glyphpress_search::{evaluate_config, Endpoint, Harness, ModelClient, Scorer, SearchSpace, ValidationItem};
use serde_json::{json, Value};

enum Reply {
    Ok(String),
    Status(u16),
    Hang,
}

/// Serve `replies` in order, one per connection; request bodies come back on
/// the channel.
fn stub(replies: Vec<Reply>) -> (String, mpsc::Receiver<(String, Value)>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for reply in replies {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut headers = String::new();
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                headers.push_str(&line);
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let _ = tx.send((headers, serde_json::from_slice(&body).unwrap_or(Value::Null)));
            let mut stream = stream;
            let (status, text) = match reply {
                Reply::Ok(content) => (200, json!({"choices": [{"message": {"content": content}}]}).to_string()),
                Reply::Status(s) => (s, "boom".to_string()),
                Reply::Hang => {
                    thread::sleep(Duration::from_millis(1500));
                    continue;
                }
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                text.len()
            );
        }
    });
    (url, rx)
}

fn endpoint(url: &str) -> Endpoint {
    let mut e = Endpoint::new(url);
    e.timeout = Duration::from_millis(500);
    e.retries = 0;
    e
}

fn item() -> ValidationItem {
    ValidationItem {
        id: "q1".into(),
        context: "The capital of France is Paris.".into(),
        instruction: "What is the capital of France?".into(),
        answer: "Paris".into(),
        tag: None,
    }
}

#[test]
fn judge_verdicts() {
    let (url, rx) = stub(vec![Reply::Ok("CORRECT".into()), Reply::Ok("I think it is right.".into()), Reply::Hang]);
    let judge = RemoteJudge { endpoint: endpoint(&url) };
    assert_eq!(judge.score(&item(), "Paris"), ScoreOutcome::Scored(1.0));
    let (_, body) = rx.recv().unwrap();
    let prompt = body["messages"][0]["content"].as_str().unwrap();
    assert!(prompt.contains("Reference answer: Paris"));
    assert!(matches!(judge.score(&item(), "Paris"), ScoreOutcome::Unscored(_)));
    assert!(matches!(judge.score(&item(), "Paris"), ScoreOutcome::Unscored(_)));
}

#[test]
fn http_errors_surface_with_status() {
    let (url, _rx) = stub(vec![Reply::Status(500)]);
    match endpoint(&url).probe() {
        Err(RemoteError::Status { status: 500, body }) => assert_eq!(body, "boom"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn bearer_token_is_sent() {
    let (url, rx) = stub(vec![Reply::Ok("OK".into())]);
    let mut e = endpoint(&url);
    e.token = Some("s3cret".into());
    e.probe().unwrap();
    let (headers, _) = rx.recv().unwrap();
    assert!(headers.to_ascii_lowercase().contains("authorization: bearer s3cret"));
}

#[test]
fn model_receives_pages_then_instruction() {
    let (url, rx) = stub(vec![Reply::Ok("Paris".into())]);
    let model = RemoteModel { endpoint: endpoint(&url) };
    let config = RenderConfig::default();
    let pages = glyphpress_core::render_document(&item().context, &config, &EmbeddedFont).unwrap();
    assert_eq!(model.predict(&item(), &pages).unwrap(), "Paris");
    let (_, body) = rx.recv().unwrap();
    let content = body["messages"][0]["content"].as_array().unwrap();
    assert_eq!(content.len(), pages.len() + 1);
    assert!(content[0]["image_url"]["url"].as_str().unwrap().starts_with("data:image/png;base64,"));
    assert_eq!(content.last().unwrap()["text"], "What is the capital of France?");
}

#[test]
fn harness_with_judge_timeouts_counts_unscored() {
    let mut replies: Vec<Reply> = (0..8).map(|_| Reply::Ok("CORRECT".into())).collect();
    replies.extend([Reply::Hang, Reply::Hang]);
    let (url, _rx) = stub(replies);
    let judge = RemoteJudge { endpoint: endpoint(&url) };
    let set: Vec<ValidationItem> = (0..10)
        .map(|i| ValidationItem { id: format!("q{i}"), ..item() })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let report = pool
        .install(|| {
            evaluate_config(
                &RenderConfig::default(),
                &Harness {
                    set: &set,
                    client: &EchoGold,
                    scorer: &judge,
                    vtm: VisualTokenModel::default(),
                    tokenizer: &HeuristicTokenizer,
                    metrics: &EmbeddedFont,
                },
            )
        })
        .unwrap();
    assert_eq!(report.scored, 8);
    assert_eq!(report.unscored_ids.len(), 2);
    assert_eq!(report.accuracy, 1.0);
}

#[test]
fn critic_round_trip_and_malformed_reply() {
    let (url, rx) = stub(vec![Reply::Ok(r#"[{"font_size_pt": 9}]"#.into()), Reply::Ok("no idea".into())]);
    let critic = RemoteCritic { endpoint: endpoint(&url) };
    let base = RenderConfig { font_size_pt: 10.0, line_height_pt: 11.0, ..RenderConfig::default() };
    let rows = [CriticRow { config: &base, accuracy: 0.9, rho: 3.0 }];
    let space = SearchSpace::full();
    let p = critic_propose(&rows, &rows, &critic, &space, 1, None);
    assert_eq!(p.configs, vec![RenderConfig { font_size_pt: 9.0, ..base.clone() }]);
    let (_, body) = rx.recv().unwrap();
    assert!(body["messages"][0]["content"].as_str().unwrap().contains("\"population\""));
    let p = critic_propose(&rows, &rows, &critic, &space, 1, None);
    assert!(p.configs.is_empty());
    assert!(p.shortfall.is_some());
}
