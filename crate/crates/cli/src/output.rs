use std::path::Path;

use serde::Serialize;
use ssrcps_core::io::{json_hash, write_json};
use ssrcps_core::sim::TOOL_VERSION;

use crate::failure::{CliResult, Failure};

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    tool_version: &'static str,
    config_hash: &'a str,
    seed: u64,
    #[serde(flatten)]
    body: &'a T,
}

/// Hash of the parsed invocation, used when no config file exists.
pub fn args_hash<A: Serialize>(args: &A) -> CliResult<String> {
    json_hash(args).map_err(Failure::from)
}

/// Writes `body` with provenance fields to `path`, or to stdout.
pub fn emit<T: Serialize>(
    body: &T,
    config_hash: &str,
    seed: u64,
    path: Option<&Path>,
) -> CliResult<()> {
    let stamped = Stamped {
        tool_version: TOOL_VERSION,
        config_hash,
        seed,
        body,
    };
    match path {
        Some(p) => write_json(&stamped, p).map_err(Failure::from),
        None => {
            let text =
                serde_json::to_string_pretty(&stamped).map_err(|e| Failure::data(e.into()))?;
            println!("{text}");
            Ok(())
        }
    }
}
