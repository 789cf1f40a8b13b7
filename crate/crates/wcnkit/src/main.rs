//! Command-line surface for the WCN toolkit.
//!
//! Every subcommand writes one JSON report with sorted keys embedding its
//! resolved configuration; `detect` writes JSON Lines (one object per
//! event) and echoes the config report to stdout. Configuration precedence
//! is flags > config file > built-in defaults.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use wcnkit::ahp::{self, Pcm, SlotThresholds};
use wcnkit::baselines::{self, CorpusStats, Metric, ScoreOptions};
use wcnkit::corpus::{self, CorpusFormat, RawDocument, StopwordPolicy, TokenStream};
use wcnkit::decompose::{self, HeuristicKind};
use wcnkit::detect::{self, DetectorConfig, EventPhrase};
use wcnkit::eval::{self, EvalOptions, GroundTruth};
use wcnkit::netsci::{self, DistributionKind, PathView};
use wcnkit::phrase::{self, Keyphrase};
use wcnkit::wcn::{build_wcn, Direction, Edging, WcnGraph, WcnMode, Weighting};
use wcnkit::{Error, Result};

#[derive(Parser)]
#[command(name = "wcnkit", version, about = "Word co-occurrence network toolkit")]
struct Cli {
    /// Line-oriented `key = value` config file (flags take precedence).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Omit timestamps so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Report destination (stdout when omitted).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CorpusArgs {
    /// Input corpus file.
    #[arg(long)]
    input: PathBuf,
    /// Corpus format: jsonl or tsv.
    #[arg(long)]
    format: Option<String>,
    /// Stopword override file, one word per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the co-occurrence network and report its size.
    Build {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Edging scheme: nearest_neighbour or all_pair.
        #[arg(long)]
        edging: Option<String>,
        #[arg(long)]
        undirected: bool,
        #[arg(long)]
        unweighted: bool,
        /// Write the edge list as tail<TAB>head<TAB>weight.
        #[arg(long)]
        dump_edges: Option<PathBuf>,
    },
    /// Structural analysis: distributions, power-law fits, ASPL,
    /// assortativity, small-world check.
    Analyze {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Lower cutoff for the power-law fits.
        #[arg(long)]
        kmin: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Random-baseline sample count for the small-world check.
        #[arg(long)]
        er_samples: Option<usize>,
    },
    /// Score every node under a keyword metric.
    Keywords {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        top: Option<usize>,
        /// Report the lowest-scoring words instead.
        #[arg(long)]
        bottom: bool,
        /// HITS via the degree shortcut instead of the recursive iteration.
        #[arg(long)]
        hits_degree_shortcut: bool,
    },
    /// Extract keyphrases.
    Keyphrase {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// heuristic, kbridge, threshold, mls, topo, or barank.
        #[arg(long)]
        method: Option<String>,
        /// Heuristic kind: root_two, divided_by_two, divided_by_three,
        /// log_method.
        #[arg(long)]
        heuristic: Option<String>,
        /// Max nodes per subgraph for kbridge.
        #[arg(long)]
        nt: Option<usize>,
        /// Edges-to-keep index for threshold decomposition.
        #[arg(long)]
        p: Option<usize>,
        /// Simple-path cap for MLS enumeration.
        #[arg(long)]
        max_paths: Option<usize>,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Rank a phrase report with the analytic hierarchy process.
    Rank {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Phrase report produced by `keyphrase`.
        #[arg(long)]
        phrases: PathBuf,
        /// `default` or a path to a 4x4 whitespace-separated matrix.
        #[arg(long)]
        pcm: Option<String>,
        /// Word count above which a phrase is a description.
        #[arg(long)]
        headline_max: Option<usize>,
        /// Word count at or below which a phrase is merely relevant.
        #[arg(long)]
        relevant_max: Option<usize>,
    },
    /// Sliding-window event detection; output is JSON Lines.
    Detect {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Documents per window.
        #[arg(long)]
        window: Option<usize>,
        /// Qualification multiplier.
        #[arg(long)]
        m: Option<f64>,
        /// Minimum node count for event phrases.
        #[arg(long)]
        mg: Option<usize>,
        /// Domain stopword fraction per window.
        #[arg(long)]
        ts: Option<f64>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        pcm: Option<String>,
    },
    /// Score a run file against ground-truth topics.
    Eval {
        /// Topics JSONL: {topic_id, title, keywords: [...]}.
        #[arg(long)]
        truth: PathBuf,
        /// Optional relevance TSV: doc_id<TAB>topic_id.
        #[arg(long)]
        relevance: Option<PathBuf>,
        /// Run file: events JSONL or a phrase report.
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        match_fraction: Option<f64>,
        /// Jaccard threshold for the redundancy metric.
        #[arg(long)]
        overlap: Option<f64>,
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    wcnkit::config::parse_config_text(&text)
}

struct Settings {
    map: BTreeMap<String, String>,
}

impl Settings {
    fn resolve<T: FromStr + Clone>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.map.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map_err(|_| Error::Parameter(format!("bad config value for {key}: {raw}"))),
            None => Ok(default),
        }
    }

    fn resolve_flag(&self, flag: bool, key: &str) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        self.resolve(None, key, false)
    }
}

fn load_policy(stopwords: &Option<PathBuf>, t_s: f64) -> Result<StopwordPolicy> {
    match stopwords {
        Some(path) => StopwordPolicy::from_file(path, t_s),
        None => {
            let mut policy = StopwordPolicy::default();
            policy.domain_fraction = t_s;
            Ok(policy)
        }
    }
}

fn parse_format(name: &str) -> Result<CorpusFormat> {
    match name {
        "jsonl" => Ok(CorpusFormat::Jsonl),
        "tsv" => Ok(CorpusFormat::Tsv),
        other => Err(Error::Parameter(format!("unknown corpus format: {other}"))),
    }
}

fn parse_heuristic(name: &str) -> Result<HeuristicKind> {
    match name {
        "root_two" => Ok(HeuristicKind::RootTwo),
        "divided_by_two" => Ok(HeuristicKind::DividedByTwo),
        "divided_by_three" => Ok(HeuristicKind::DividedByThree),
        "log_method" => Ok(HeuristicKind::LogMethod),
        other => Err(Error::Parameter(format!("unknown heuristic: {other}"))),
    }
}

fn load_pcm(spec: &str) -> Result<Pcm> {
    if spec == "default" {
        Ok(Pcm::default_matrix())
    } else {
        Pcm::from_file(Path::new(spec))
    }
}

struct LoadedCorpus {
    docs: Vec<RawDocument>,
    streams: Vec<TokenStream>,
    graph: WcnGraph,
    format: String,
}

fn load_and_build(
    corpus: &CorpusArgs,
    settings: &Settings,
    mode: WcnMode,
    t_s: f64,
) -> Result<LoadedCorpus> {
    let format_name = settings.resolve(corpus.format.clone(), "format", "jsonl".to_string())?;
    let format = parse_format(&format_name)?;
    let docs = corpus::load_corpus(&corpus.input, format)?;
    let policy = load_policy(&corpus.stopwords, t_s)?;
    let streams: Vec<TokenStream> = docs.iter().map(|d| corpus::preprocess(d, &policy)).collect();
    let graph = build_wcn(&streams, mode);
    Ok(LoadedCorpus {
        docs,
        streams,
        graph,
        format: format_name,
    })
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn report_value(command: &str, config: Value, result: Value, timestamp: bool) -> Value {
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), json!(command));
    doc.insert("config".into(), config);
    if timestamp {
        doc.insert("generated_at_unix".into(), json!(now_unix()));
    }
    doc.insert("result".into(), result);
    Value::Object(doc)
}

fn write_report(output: &Option<PathBuf>, value: &Value) -> Result<()> {
    let text = format!("{}\n", serde_json::to_string_pretty(value).expect("serializable"));
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn distribution_json(g: &WcnGraph) -> Result<Value> {
    let mut out = serde_json::Map::new();
    let kinds = [
        ("degree", DistributionKind::Degree),
        ("in_degree", DistributionKind::InDegree),
        ("out_degree", DistributionKind::OutDegree),
        ("strength", DistributionKind::Strength),
        ("in_strength", DistributionKind::InStrength),
        ("out_strength", DistributionKind::OutStrength),
        ("edge_weight", DistributionKind::EdgeWeight),
        ("edge_strength", DistributionKind::EdgeStrength),
    ];
    for (name, kind) in kinds {
        match netsci::distribution(g, kind) {
            Ok(d) => {
                let hist: BTreeMap<String, u64> = d
                    .histogram
                    .iter()
                    .map(|(k, v)| {
                        let key = if kind == DistributionKind::EdgeStrength {
                            format!("{:.3}", *k as f64 / 1000.0)
                        } else {
                            k.to_string()
                        };
                        (key, *v)
                    })
                    .collect();
                out.insert(name.into(), json!(hist));
            }
            Err(_) => {
                out.insert(name.into(), Value::Null);
            }
        }
    }
    Ok(Value::Object(out))
}

fn fit_json(g: &WcnGraph, kind: DistributionKind, k_min: f64) -> Value {
    let fit = netsci::distribution(g, kind).and_then(|d| netsci::fit_power_law(&d, k_min));
    match fit {
        Ok(f) => json!({
            "gamma": f.gamma,
            "r_squared": f.r_squared,
            "fit_range": [f.fit_range.0, f.fit_range.1],
            "points_used": f.points_used,
            "scale_free": f.gamma > 2.0 && f.gamma < 3.0,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn phrases_json(phrases: &[Keyphrase]) -> Value {
    json!(phrases
        .iter()
        .map(|p| {
            json!({
                "words": p.words,
                "density": p.density,
                "method": p.method,
                "component": p.source_component.0,
            })
        })
        .collect::<Vec<_>>())
}

/// Read a run file for evaluation: either JSON Lines with a `words` field
/// per object, or a single JSON array of phrase objects.
fn load_run_candidates(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    eval::parse_run_candidates(&text)
}

fn corpus_config_json(corpus: &CorpusArgs, format: &str) -> Value {
    json!({
        "input": corpus.input.display().to_string(),
        "format": format,
        "stopwords": corpus.stopwords.as_ref().map(|p| p.display().to_string()),
    })
}

fn run(cli: Cli) -> Result<()> {
    let settings = Settings {
        map: match &cli.config {
            Some(path) => parse_config_file(path)?,
            None => BTreeMap::new(),
        },
    };
    let timestamp = !cli.no_timestamp;

    match &cli.command {
        Command::Build {
            corpus,
            edging,
            undirected,
            unweighted,
            dump_edges,
        } => {
            let edging_name =
                settings.resolve(edging.clone(), "edging", "nearest_neighbour".to_string())?;
            let mode = WcnMode {
                edging: match edging_name.as_str() {
                    "nearest_neighbour" => Edging::NearestNeighbour,
                    "all_pair" => Edging::AllPair,
                    other => {
                        return Err(Error::Parameter(format!("unknown edging: {other}")))
                    }
                },
                direction: if settings.resolve_flag(*undirected, "undirected")? {
                    Direction::Undirected
                } else {
                    Direction::Directed
                },
                weighting: if settings.resolve_flag(*unweighted, "unweighted")? {
                    Weighting::Unweighted
                } else {
                    Weighting::Weighted
                },
            };
            let loaded = load_and_build(corpus, &settings, mode, 0.0)?;
            if let Some(path) = dump_edges {
                let mut buf = Vec::new();
                loaded.graph.dump_edge_list(&mut buf).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                std::fs::write(path, buf).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
            let mut config = corpus_config_json(corpus, &loaded.format);
            config["mode"] = json!(mode);
            config["dump_edges"] = json!(dump_edges.as_ref().map(|p| p.display().to_string()));
            let result = json!({
                "documents": loaded.docs.len(),
                "nodes": loaded.graph.node_count(),
                "edges": loaded.graph.edge_count(),
                "total_weight": loaded.graph.total_weight(),
                "components": loaded.graph.component_subgraphs().len(),
            });
            write_report(&cli.output, &report_value("build", config, result, timestamp))
        }

        Command::Analyze {
            corpus,
            kmin,
            seed,
            er_samples,
        } => {
            let k_min = settings.resolve(*kmin, "kmin", 1.0)?;
            let seed = settings.resolve(*seed, "seed", 42u64)?;
            let samples = settings.resolve(*er_samples, "er_samples", 1usize)?;
            let loaded = load_and_build(corpus, &settings, WcnMode::default(), 0.0)?;
            let g = &loaded.graph;
            if g.is_empty() {
                return Err(Error::EmptyInput("corpus produced an empty graph".into()));
            }
            let assort = netsci::assortativity(g)
                .map(|r| {
                    json!({
                        "tau": r.tau,
                        "a": r.a,
                        "b": r.b,
                        "c": r.c,
                        "edges": r.edge_endpoint_degrees.len(),
                    })
                })
                .unwrap_or_else(|e| json!({ "error": e.to_string() }));
            let sw = netsci::small_world_sampled(g, seed, samples)?;
            let aspl_block = json!({
                "directed": netsci::aspl(g, PathView::Directed, false).ok(),
                "undirected": netsci::aspl(g, PathView::Undirected, false).ok(),
                "directed_max_component": netsci::aspl(g, PathView::Directed, true).ok(),
                "undirected_max_component": netsci::aspl(g, PathView::Undirected, true).ok(),
            });
            let mut config = corpus_config_json(corpus, &loaded.format);
            config["kmin"] = json!(k_min);
            config["seed"] = json!(seed);
            config["er_samples"] = json!(samples);
            let result = json!({
                "nodes": g.node_count(),
                "edges": g.edge_count(),
                "distributions": distribution_json(g)?,
                "power_law": {
                    "degree": fit_json(g, DistributionKind::Degree, k_min),
                    "strength": fit_json(g, DistributionKind::Strength, k_min),
                    "edge_weight": fit_json(g, DistributionKind::EdgeWeight, k_min),
                },
                "aspl": aspl_block,
                "assortativity": assort,
                "small_world": {
                    "cc": sw.cc,
                    "cc_random": sw.cc_random,
                    "aspl": sw.aspl,
                    "aspl_random": sw.aspl_random,
                    "verdict": sw.verdict,
                },
            });
            write_report(&cli.output, &report_value("analyze", config, result, timestamp))
        }

        Command::Keywords {
            corpus,
            metric,
            top,
            bottom,
            hits_degree_shortcut,
        } => {
            let metric_name = settings.resolve(metric.clone(), "metric", "degree".to_string())?;
            let metric = Metric::parse(&metric_name)?;
            let top_n = settings.resolve(*top, "top", 10usize)?;
            let bottom = settings.resolve_flag(*bottom, "bottom")?;
            let shortcut = settings.resolve_flag(*hits_degree_shortcut, "hits_degree_shortcut")?;
            let loaded = load_and_build(corpus, &settings, WcnMode::default(), 0.0)?;
            let stats = CorpusStats::from_streams(&loaded.streams);
            let options = ScoreOptions {
                hits_mode: if shortcut {
                    baselines::HitsMode::DegreeShortcut
                } else {
                    baselines::HitsMode::Recursive
                },
                ..ScoreOptions::default()
            };
            let table = baselines::score(&loaded.graph, &stats, metric, &options)?;
            let ranked = baselines::top_keywords(&table, top_n, bottom);
            let pairs: Vec<Value> = ranked
                .iter()
                .map(|w| json!([w, table.scores[w]]))
                .collect();
            let mut config = corpus_config_json(corpus, &loaded.format);
            config["metric"] = json!(metric_name);
            config["top"] = json!(top_n);
            config["bottom"] = json!(bottom);
            config["hits_degree_shortcut"] = json!(shortcut);
            let result = json!({
                "keywords": { metric_name.clone(): pairs },
                "warnings": table.warnings,
            });
            write_report(&cli.output, &report_value("keywords", config, result, timestamp))
        }

        Command::Keyphrase {
            corpus,
            method,
            heuristic,
            nt,
            p,
            max_paths,
            top,
        } => {
            let method_name = settings.resolve(method.clone(), "method", "barank".to_string())?;
            let top_n = settings.resolve(*top, "top", 10usize)?;
            let max_paths = settings.resolve(*max_paths, "max_paths", 1000usize)?;
            let loaded = load_and_build(corpus, &settings, WcnMode::default(), 0.0)?;
            let g = &loaded.graph;
            if g.edge_count() == 0 {
                return Err(Error::EmptyInput("corpus produced an edgeless graph".into()));
            }

            let mut warnings: Vec<String> = Vec::new();
            let mut extra = serde_json::Map::new();
            let mut phrases: Vec<Keyphrase> = Vec::new();
            match method_name.as_str() {
                "barank" => {
                    phrases = phrase::barank(g, top_n)?;
                }
                "topo" => {
                    for (idx, comp) in g.component_subgraphs().into_iter().enumerate() {
                        if comp.node_count() >= 2 {
                            phrases.push(phrase::topo_keyphrase_tagged(
                                &comp,
                                wcnkit::wcn::ComponentId(idx),
                                phrase::PhraseMethod::Topo,
                            )?);
                        }
                    }
                    phrase::sort_by_density(&mut phrases);
                    phrases.truncate(top_n);
                }
                "mls" => {
                    for comp in g.component_subgraphs() {
                        if comp.node_count() < 2 {
                            continue;
                        }
                        let result = phrase::mls_extract(&comp, max_paths)?;
                        phrases.extend(result.phrases);
                        warnings.extend(result.warnings.iter().map(|w| format!("{w:?}")));
                    }
                    phrase::sort_by_density(&mut phrases);
                    phrases.truncate(top_n);
                }
                "heuristic" | "kbridge" | "threshold" => {
                    let set = match method_name.as_str() {
                        "heuristic" => {
                            let kind_name = settings.resolve(
                                heuristic.clone(),
                                "heuristic",
                                "root_two".to_string(),
                            )?;
                            let kind = parse_heuristic(&kind_name)?;
                            decompose::heuristic_retain(g, kind)?
                        }
                        "kbridge" => {
                            let n_t = settings.resolve(*nt, "nt", 10usize)?;
                            decompose::k_bridge(g, n_t)?
                        }
                        _ => {
                            let p = settings.resolve(*p, "p", 30usize)?;
                            decompose::threshold_decompose(g, p)?
                        }
                    };
                    extra.insert("provenance".into(), json!(set.provenance));
                    for sub in &set.subgraphs {
                        let result = phrase::mls_extract(sub, max_paths)?;
                        phrases.extend(result.phrases);
                        warnings.extend(result.warnings.iter().map(|w| format!("{w:?}")));
                    }
                    phrase::sort_by_density(&mut phrases);
                    phrases.truncate(top_n);
                }
                other => return Err(Error::Parameter(format!("unknown method: {other}"))),
            }

            let mut config = corpus_config_json(corpus, &loaded.format);
            config["method"] = json!(method_name);
            config["top"] = json!(top_n);
            config["max_paths"] = json!(max_paths);
            let mut result = serde_json::Map::new();
            result.insert("phrases".into(), phrases_json(&phrases));
            result.insert("warnings".into(), json!(warnings));
            for (k, v) in extra {
                result.insert(k, v);
            }
            write_report(
                &cli.output,
                &report_value("keyphrase", config, Value::Object(result), timestamp),
            )
        }

        Command::Rank {
            corpus,
            phrases,
            pcm,
            headline_max,
            relevant_max,
        } => {
            let pcm_spec = settings.resolve(pcm.clone(), "pcm", "default".to_string())?;
            let matrix = load_pcm(&pcm_spec)?;
            let thresholds = SlotThresholds {
                headline_max: settings.resolve(*headline_max, "headline_max", 12usize)?,
                relevant_max: settings.resolve(*relevant_max, "relevant_max", 3usize)?,
            };
            let loaded = load_and_build(corpus, &settings, WcnMode::default(), 0.0)?;
            let text = std::fs::read_to_string(phrases).map_err(|source| Error::Io {
                path: phrases.display().to_string(),
                source,
            })?;
            let parsed: Value = serde_json::from_str(&text).map_err(|e| Error::MalformedRecord {
                line: 0,
                message: e.to_string(),
            })?;
            let list = parsed
                .get("result")
                .and_then(|r| r.get("phrases"))
                .or_else(|| parsed.get("phrases"))
                .cloned()
                .unwrap_or(parsed);
            #[derive(serde::Deserialize)]
            struct PhraseRecord {
                words: Vec<String>,
                #[serde(default)]
                density: f64,
                #[serde(default)]
                component: usize,
            }
            let records: Vec<PhraseRecord> =
                serde_json::from_value(list).map_err(|e| Error::MalformedRecord {
                    line: 0,
                    message: e.to_string(),
                })?;
            let keyphrases: Vec<Keyphrase> = records
                .iter()
                .map(|r| Keyphrase {
                    words: r.words.clone(),
                    density: r.density,
                    source_component: wcnkit::wcn::ComponentId(r.component),
                    method: phrase::PhraseMethod::Barank,
                })
                .collect();
            let mut modes = Vec::new();
            let attrs: Vec<ahp::AhpAttributes> = keyphrases
                .iter()
                .map(|kp| match ahp::compute_attributes(kp, &loaded.graph) {
                    Ok(a) => {
                        modes.push("path");
                        Ok(a)
                    }
                    Err(Error::Contract(_)) => {
                        modes.push("induced");
                        ahp::compute_attributes_forward_induced(kp, &loaded.graph)
                    }
                    Err(e) => Err(e),
                })
                .collect::<Result<_>>()?;
            let model = ahp::build_model(&attrs, &matrix)?;
            let ranked = ahp::rank(&model, &keyphrases, thresholds)?;
            let mut config = corpus_config_json(corpus, &loaded.format);
            config["pcm"] = json!(pcm_spec);
            config["phrases"] = json!(phrases.display().to_string());
            config["headline_max"] = json!(thresholds.headline_max);
            config["relevant_max"] = json!(thresholds.relevant_max);
            let result = json!({
                "consistency": {
                    "gm": model.gm,
                    "lambda_max": model.lambda_max,
                    "ci": model.ci,
                    "cr": model.cr,
                    "ri": model.ri,
                    "weights": model.weights,
                },
                "attribute_modes": modes,
                "ranked": ranked
                    .iter()
                    .map(|r| {
                        json!({
                            "rank": r.rank,
                            "score": r.score,
                            "slot": r.slot,
                            "words": r.phrase.words,
                        })
                    })
                    .collect::<Vec<_>>(),
            });
            write_report(&cli.output, &report_value("rank", config, result, timestamp))
        }

        Command::Detect {
            corpus,
            window,
            m,
            mg,
            ts,
            top,
            pcm,
        } => {
            let cfg = DetectorConfig {
                window_size: settings.resolve(*window, "window", 200usize)?,
                multiplier: settings.resolve(*m, "m", 2.0f64)?,
                min_event_nodes: settings.resolve(*mg, "mg", 2usize)?,
                domain_fraction: settings.resolve(*ts, "ts", 0.01f64)?,
                top_n: settings.resolve(*top, "top", 5usize)?,
            };
            let pcm_spec = settings.resolve(pcm.clone(), "pcm", "default".to_string())?;
            let matrix = load_pcm(&pcm_spec)?;
            let format_name =
                settings.resolve(corpus.format.clone(), "format", "jsonl".to_string())?;
            let format = parse_format(&format_name)?;
            let docs = corpus::load_corpus(&corpus.input, format)?;
            let policy = load_policy(&corpus.stopwords, cfg.domain_fraction)?;
            let events = detect::detect_events_with_pcm(&docs, &policy, &cfg, &matrix)?;
            write_events_jsonl(&cli.output, &events)?;
            let mut config = corpus_config_json(corpus, &format_name);
            config["window"] = json!(cfg.window_size);
            config["m"] = json!(cfg.multiplier);
            config["mg"] = json!(cfg.min_event_nodes);
            config["mq"] = json!(cfg.qualification_nodes());
            config["ts"] = json!(cfg.domain_fraction);
            config["top"] = json!(cfg.top_n);
            config["pcm"] = json!(pcm_spec);
            let summary = report_value(
                "detect",
                config,
                json!({
                    "events": events.len(),
                    "windows": docs.chunks(cfg.window_size.max(1)).count(),
                    "output": cli.output.as_ref().map(|p| p.display().to_string()),
                }),
                timestamp,
            );
            if cli.output.is_some() {
                println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));
            }
            Ok(())
        }

        Command::Eval {
            truth,
            relevance,
            run: run_path,
            match_fraction,
            overlap,
            stopwords,
        } => {
            let options = EvalOptions {
                match_fraction: settings.resolve(*match_fraction, "match_fraction", 0.5)?,
                redundancy_overlap: settings.resolve(*overlap, "overlap", 0.5)?,
            };
            let policy = load_policy(stopwords, 0.0)?;
            let mut ground_truth = GroundTruth::load_topics(truth, &policy)?;
            if let Some(path) = relevance {
                ground_truth.load_relevance(path)?;
            }
            let candidates = load_run_candidates(run_path)?;
            let report = eval::evaluate_run(&candidates, &ground_truth, options)?;
            let config = json!({
                "truth": truth.display().to_string(),
                "relevance": relevance.as_ref().map(|p| p.display().to_string()),
                "run": run_path.display().to_string(),
                "match_fraction": options.match_fraction,
                "overlap": options.redundancy_overlap,
            });
            let result = serde_json::to_value(&report).expect("serializable");
            write_report(&cli.output, &report_value("eval", config, result, timestamp))
        }
    }
}

fn write_events_jsonl(output: &Option<PathBuf>, events: &[EventPhrase]) -> Result<()> {
    let mut buf = Vec::new();
    for event in events {
        let line = serde_json::to_value(event).expect("serializable");
        writeln!(buf, "{}", serde_json::to_string(&line).expect("serializable")).unwrap();
    }
    match output {
        Some(path) => std::fs::write(path, buf).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            std::io::stdout().write_all(&buf).ok();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = match &err {
                Error::Parameter(_) => "parameter",
                Error::Io { .. } => "io",
                Error::MalformedRecord { .. } => "malformed_record",
                Error::InconsistentMatrix { .. } => "inconsistent_matrix",
                Error::EmptyInput(_) => "empty_input",
                Error::UnknownWord(_) => "unknown_word",
                Error::MissingEdge { .. } => "missing_edge",
                Error::Fit(_) => "fit",
                Error::Contract(_) => "contract",
                Error::Undefined(_) => "undefined",
            };
            let payload = json!({ "error": { "kind": kind, "message": err.to_string() } });
            eprintln!("{}", serde_json::to_string(&payload).expect("serializable"));
            if matches!(err, Error::Parameter(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
