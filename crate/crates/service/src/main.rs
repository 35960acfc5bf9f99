use std::process::ExitCode;
use std::sync::Arc;

use recexp_service::{router, ServiceConfig, Store};
use tracing_subscriber::EnvFilter;

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();

    let cfg = match ServiceConfig::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration: {e}");
            return ExitCode::from(2);
        }
    };
    let ctx = match cfg.setup.build() {
        Ok(c) => Arc::new(c),
        Err(e) => {
            eprintln!("study setup: {e}");
            return ExitCode::from(2);
        }
    };
    let store = match Store::open(&cfg.event_log, ctx, cfg.seed_base, cfg.clock(), cfg.ids()) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    let listener = match tokio::net::TcpListener::bind(cfg.listen).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("bind {}: {e}", cfg.listen);
            return ExitCode::FAILURE;
        }
    };
    let addr = listener.local_addr().map_or(cfg.listen, |a| a);
    tracing::info!(%addr, log = %cfg.event_log.display(), "listening");
    // scripts wait for this line before sending requests
    println!("listening on {addr}");
    let served = axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    match served {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("server: {e}");
            ExitCode::FAILURE
        }
    }
}
