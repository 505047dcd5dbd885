//! The full http-chat path against an in-process mock server: wire
//! format, bearer auth, retry on a transient 500, and the resulting
//! transcripts. Point `endpoint_url` at a real chat-completions endpoint
//! (and set ADVISOR_API_KEY) to use a hosted model instead.
//!
//! ```bash
//! cargo run --example http_advisor
//! ```

use steplab::adaptation::StrategySpec;
use steplab::advisor::mock::{MockChatServer, MockReply};
use steplab::advisor::{AdvisorConfig, AdvisorEnv, API_KEY_ENV};
use steplab::es::{run, RunOptions};
use steplab::problems::make_suite;

fn main() -> steplab::Result<()> {
    let server = MockChatServer::start(vec![
        MockReply::status(500, "transient overload"),
        MockReply::ok("Reasoning: steady improvement, go a little coarser.\nRecommended step size: 0.15"),
        MockReply::ok("Reasoning: gains are flattening out.\nRecommended step size: 0.05"),
    ])
    .expect("start mock server");
    std::env::set_var(API_KEY_ENV, "example-key");

    let mut advisor = AdvisorConfig::http_chat(server.endpoint_url(), "mock-model");
    advisor.max_retries = 2;
    advisor.retry_initial_backoff_ms = 10;
    advisor.min_request_interval_ms = 20;

    let instance = &make_suite(&[1], &[2], 5)?[0];
    let strategy = StrategySpec::periodic_advisor("mock", advisor);
    let record = run(instance, &strategy, &RunOptions::new(101, 1), &AdvisorEnv::new())?;

    for t in &record.transcripts {
        println!(
            "generation {:>3}: parsed {:?} (clamped: {}, {} ms)",
            t.generation, t.parsed_sigma, t.clamped, t.latency_ms
        );
        println!("  reply: {}", t.raw_response.replace('\n', " / "));
    }
    println!(
        "server saw {} requests (first failed with 500 and was retried)",
        server.requests().len()
    );
    Ok(())
}
