//! Line-oriented `key = value` run configuration.

use std::collections::BTreeMap;

use crate::{Error, Result};

/// Keys the CLI understands; anything else is rejected to catch typos.
pub const CONFIG_KEYS: &[&str] = &[
    "format", "edging", "undirected", "unweighted", "metric", "top", "bottom", "method",
    "heuristic", "nt", "p", "max_paths", "kmin", "seed", "er_samples", "window", "m", "mg", "ts",
    "pcm", "match_fraction", "overlap", "headline_max", "relevant_max", "hits_degree_shortcut",
];

/// Parse `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::MalformedRecord {
            line: idx + 1,
            message: "expected key = value".into(),
        })?;
        let key = key.trim().to_string();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Parameter(format!(
                "unknown config key at line {}: {key}",
                idx + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}
