//! Minimal in-process chat-completions server for offline tests and
//! examples. Accepts `POST /chat/completions`, records each request body
//! and arrival time, and replies from a scripted list (or a single fixed
//! reply, repeated).

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Instant;

/// One scripted reply.
#[derive(Clone, Debug)]
pub struct MockReply {
    pub status: u16,
    /// Assistant message content for 2xx replies, error text otherwise.
    pub content: String,
}

impl MockReply {
    pub fn ok(content: impl Into<String>) -> Self {
        MockReply {
            status: 200,
            content: content.into(),
        }
    }

    pub fn status(status: u16, content: impl Into<String>) -> Self {
        MockReply {
            status,
            content: content.into(),
        }
    }
}

/// What the server saw for one request.
#[derive(Clone, Debug)]
pub struct ReceivedRequest {
    pub body: serde_json::Value,
    pub authorization: Option<String>,
    pub received_at: Instant,
}

pub struct MockChatServer {
    endpoint: String,
    requests: Arc<Mutex<Vec<ReceivedRequest>>>,
    shutdown: Arc<AtomicBool>,
    port: u16,
    handle: Option<JoinHandle<()>>,
}

impl MockChatServer {
    /// Starts the server on an ephemeral localhost port. Replies are
    /// consumed in order; once exhausted, the last reply repeats.
    pub fn start(replies: Vec<MockReply>) -> std::io::Result<Self> {
        assert!(!replies.is_empty(), "at least one reply required");
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let port = listener.local_addr()?.port();
        let requests: Arc<Mutex<Vec<ReceivedRequest>>> = Arc::default();
        let shutdown = Arc::new(AtomicBool::new(false));
        let thread_requests = Arc::clone(&requests);
        let thread_shutdown = Arc::clone(&shutdown);
        let handle = std::thread::spawn(move || {
            let next = AtomicUsize::new(0);
            for stream in listener.incoming() {
                if thread_shutdown.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let idx = next.fetch_add(1, Ordering::SeqCst).min(replies.len() - 1);
                let _ = handle_connection(stream, &replies[idx], &thread_requests);
            }
        });
        Ok(MockChatServer {
            endpoint: format!("http://127.0.0.1:{port}"),
            requests,
            shutdown,
            port,
            handle: Some(handle),
        })
    }

    /// Base URL; the client appends `/chat/completions`.
    pub fn endpoint_url(&self) -> String {
        self.endpoint.clone()
    }

    pub fn requests(&self) -> Vec<ReceivedRequest> {
        self.requests.lock().unwrap().clone()
    }
}

impl Drop for MockChatServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Unblock the accept loop.
        let _ = TcpStream::connect(("127.0.0.1", self.port));
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn handle_connection(
    stream: TcpStream,
    reply: &MockReply,
    requests: &Mutex<Vec<ReceivedRequest>>,
) -> std::io::Result<()> {
    let received_at = Instant::now();
    let mut reader = BufReader::new(stream);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut content_length = 0usize;
    let mut authorization = None;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            let value = value.trim();
            match name.to_ascii_lowercase().as_str() {
                "content-length" => content_length = value.parse().unwrap_or(0),
                "authorization" => authorization = Some(value.to_string()),
                _ => {}
            }
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    let body: serde_json::Value = serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null);
    requests.lock().unwrap().push(ReceivedRequest {
        body,
        authorization,
        received_at,
    });

    let payload = if (200..300).contains(&reply.status) {
        serde_json::json!({
            "choices": [
                {"message": {"role": "assistant", "content": reply.content}}
            ]
        })
        .to_string()
    } else {
        serde_json::json!({"error": reply.content}).to_string()
    };
    let mut stream = reader.into_inner();
    let reason = match reply.status {
        200 => "OK",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Status",
    };
    write!(
        stream,
        "HTTP/1.1 {} {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
        reply.status,
        reason,
        payload.len(),
        payload
    )?;
    stream.flush()
}
