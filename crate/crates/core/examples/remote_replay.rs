//! Fetch a repository through the REST client, replaying recorded responses
//! so nothing touches the network.
//!
//! `cargo run --example remote_replay`

use std::path::Path;

use openness::ingest::remote::{FetchConfig, Fetcher, RecordedTransport, RemoteError};
use openness::ingest::{dataset_summary, to_ndjson};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/remote");

    let transport = RecordedTransport::from_dir(fixtures.join("two_prs"))?;
    let store = Fetcher::new(transport, FetchConfig::default()).fetch("octo/demo")?;
    println!("octo/demo: {:?}", dataset_summary(&store));
    print!("{}", to_ndjson(&store));

    let transport = RecordedTransport::from_dir(fixtures.join("rate_limit"))?;
    match Fetcher::new(transport, FetchConfig::default()).fetch("octo/demo") {
        Err(RemoteError::RateLimited { reset_at, .. }) => {
            println!("\nrate limited; quota resets at {reset_at:?}");
        }
        other => println!("\nunexpected: {other:?}"),
    }
    Ok(())
}
