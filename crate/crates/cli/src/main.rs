// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::BufReader;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use tangent::engine::DEFAULT_K;
use tangent::index::{self, read_html_dir, IndexBuilder, IndexParams, JsonlRecords};
use tangent::service::SearchService;
use tangent::tuples::Window;
use tangent_cli::{render_text, router, DocumentResponse, RankBy};

#[derive(Parser)]
#[command(name = "tangent", version, about = "Formula search over Symbol Layout Trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a JSON-lines corpus or a directory of HTML pages.
    Index {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Maximum path length of indexed tuples, or `all`.
        #[arg(long, default_value = "all")]
        window: Window,
        /// Also index end-of-line tuples.
        #[arg(long)]
        eol: bool,
    },
    /// Search an index.
    Query {
        #[arg(long)]
        index: PathBuf,
        /// Presentation MathML, or `@path` to read it from a file.
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long)]
        no_rerank: bool,
        #[arg(long, conflicts_with = "text")]
        json: bool,
        #[arg(long)]
        text: bool,
        /// Rank documents instead of formulae.
        #[arg(long)]
        by_doc: bool,
        /// Expected window; the index's own setting is used regardless.
        #[arg(long)]
        window: Option<Window>,
    },
    /// Serve the HTTP API and, optionally, a static web UI.
    Serve {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory of static files served under `/`.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Index {
            input,
            out,
            window,
            eol,
        } => build(&input, &out, IndexParams::new(window, eol)),
        Command::Query {
            index,
            query,
            k,
            no_rerank,
            json,
            text: _,
            by_doc,
            window,
        } => run_query(&index, &query, k, !no_rerank, json, by_doc, window),
        Command::Serve {
            index,
            port,
            host,
            assets,
        } => serve(&index, SocketAddr::new(host, port), assets.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn build(input: &Path, out: &Path, params: IndexParams) -> anyhow::Result<()> {
    let mut builder = IndexBuilder::new(params);
    if input.is_dir() {
        let records = read_html_dir(input).with_context(|| format!("reading {}", input.display()))?;
        for r in &records {
            builder.add_record(r);
        }
    } else {
        let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
        for item in JsonlRecords::new(BufReader::new(file)) {
            match item {
                Ok(r) => builder.add_record(&r),
                Err((line, msg)) => {
                    log::warn!("{}:{line}: skipped: {msg}", input.display());
                    builder.report_mut().skipped_lines += 1;
                }
            }
        }
    }
    let report = builder.report().clone();
    if report.records == 0 {
        bail!("{}: corpus contains no records", input.display());
    }
    let index = builder.finish();
    index::save(&index, out).with_context(|| format!("writing {}", out.display()))?;
    eprintln!(
        "indexed {} documents, {} formulae ({} distinct), {} tuples; {} parse failures, {} skipped lines; w={} eol={}",
        report.records,
        report.formulae,
        index.formula_count(),
        index.tuple_count(),
        report.parse_failures,
        report.skipped_lines,
        params.window,
        params.eol
    );
    Ok(())
}

fn load(path: &Path) -> anyhow::Result<SearchService> {
    let index = index::load(path).with_context(|| format!("loading {}", path.display()))?;
    Ok(SearchService::new(index))
}

fn run_query(
    index: &Path,
    query: &str,
    k: usize,
    rerank: bool,
    json: bool,
    by_doc: bool,
    window: Option<Window>,
) -> anyhow::Result<()> {
    let service = load(index)?;
    let params = service.index().expect("loaded").params();
    if let Some(w) = window.filter(|&w| w != params.window) {
        log::warn!("--window {w} ignored: index was built with w={}", params.window);
    }
    let mathml = match query.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => query.to_owned(),
    };
    let response = service.run_query(&mathml, k, rerank)?;
    let by = if by_doc { RankBy::Doc } else { RankBy::Formula };
    if json {
        let out = match by {
            RankBy::Formula => serde_json::to_string_pretty(&response)?,
            RankBy::Doc => serde_json::to_string_pretty(&DocumentResponse::from(&response))?,
        };
        println!("{out}");
    } else {
        println!("{}", render_text(&response, by));
    }
    Ok(())
}

fn serve(index: &Path, addr: SocketAddr, assets: Option<&Path>) -> anyhow::Result<()> {
    let service = Arc::new(load(index)?);
    let app = router(service, assets);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app).await?;
        Ok(())
    })
}
