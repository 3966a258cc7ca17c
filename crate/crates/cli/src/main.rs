//! `mact`: segment action strings into meta-actions, inspect match interval
//! tables, aggregate corpus statistics, compute evaluation metrics, run
//! gradient and oracle self-checks, sample Gumbel-softmax draws, and generate
//! synthetic corpora.
//!
//! Exit codes: 0 on success, 1 on any application error, 2 on usage errors.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mact_core::{
    build_table, build_table_bruteforce, default_grammar, encode_actions, fidelity,
    generate_synthetic, goal_condition_rate, gradcheck, gumbel_softmax, load_grammar,
    parse_corpus, path_length_weighted, segment, segment_bruteforce, success_rate, ActionString,
    Corpus, EpisodeResult, MetaActionGrammar,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "mact", version, about = "Meta-action parsing and evaluation for embodied-agent trajectories")]
struct Cli {
    /// Grammar file (one NAME<TAB>PATTERN per line); built-in grammar when omitted
    #[arg(long, global = true, value_name = "PATH")]
    grammar: Option<PathBuf>,

    /// Seed for every randomized subcommand
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Segment action strings into the fewest meta-actions
    Segment {
        /// Action strings over the letters m, r, l, u, d, i
        #[arg(required = true, value_name = "STRING")]
        strings: Vec<String>,
    },
    /// Print every (meta-action, start, end) match interval of a string
    Table {
        /// Action string over the letters m, r, l, u, d, i
        #[arg(value_name = "STRING")]
        string: String,
    },
    /// Segment a corpus and print aggregate statistics
    Stats {
        /// Corpus JSON file
        #[arg(value_name = "FILE")]
        corpus: PathBuf,
    },
    /// Compute evaluation metrics over a corpus with outcome annotations
    Metrics {
        /// Corpus JSON file
        #[arg(value_name = "FILE")]
        corpus: PathBuf,
        /// Distance threshold for path-coverage scoring
        #[arg(long, default_value_t = 1.0, value_name = "DIST")]
        d_th: f64,
    },
    /// Check analytic loss gradients against central finite differences
    Gradcheck {
        /// Number of random batches per loss
        #[arg(long, default_value_t = 100, value_name = "N")]
        cases: usize,
    },
    /// Draw Gumbel-softmax samples and report category frequencies
    Gumbel {
        /// Comma-separated category logits
        #[arg(long, default_value = "0.0,0.5,1.0", value_name = "LIST")]
        logits: String,
        /// Softmax temperature
        #[arg(long, default_value_t = 1.0, value_name = "TAU")]
        temperature: f64,
        /// Number of draws (seeded seed, seed+1, ...)
        #[arg(long, default_value_t = 10000, value_name = "N")]
        draws: usize,
    },
    /// Cross-check the fast table builder and segmenter against brute force
    OracleCheck {
        /// Check every string up to this length
        #[arg(long, default_value_t = 5, value_name = "LEN")]
        max_len: usize,
        /// Additional random trajectories to check
        #[arg(long, default_value_t = 200, value_name = "N")]
        random: usize,
    },
    /// Generate a synthetic corpus
    Gen {
        /// Number of episodes
        #[arg(long, default_value_t = 100, value_name = "N")]
        episodes: usize,
        /// Mean actions per episode
        #[arg(long, default_value_t = 20, value_name = "LEN")]
        mean_len: usize,
        /// Output file; stdout when omitted
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn main() {
    // Die quietly when the read end of a pipe closes (`mact table ... | head`),
    // like other line-oriented tools, instead of panicking on EPIPE.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let grammar = match &cli.grammar {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading grammar {}", path.display()))?;
            load_grammar(&text).with_context(|| format!("loading grammar {}", path.display()))?
        }
        None => default_grammar(),
    };
    match cli.command {
        Command::Segment { strings } => cmd_segment(&grammar, &strings, cli.format),
        Command::Table { string } => cmd_table(&grammar, &string, cli.format),
        Command::Stats { corpus } => cmd_stats(&grammar, &corpus, cli.format),
        Command::Metrics { corpus, d_th } => cmd_metrics(&corpus, d_th, cli.format),
        Command::Gradcheck { cases } => cmd_gradcheck(cases, cli.seed, cli.format),
        Command::Gumbel {
            logits,
            temperature,
            draws,
        } => cmd_gumbel(&logits, temperature, draws, cli.seed, cli.format),
        Command::OracleCheck { max_len, random } => {
            cmd_oracle_check(&grammar, max_len, random, cli.seed, cli.format)
        }
        Command::Gen {
            episodes,
            mean_len,
            out,
        } => cmd_gen(episodes, mean_len, cli.seed, out.as_deref()),
    }
}

fn load_corpus(path: &std::path::Path) -> Result<Corpus> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading corpus {}", path.display()))?;
    let corpus = parse_corpus(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(corpus)
}

#[derive(Serialize)]
struct SpanOut<'a> {
    meta: usize,
    name: &'a str,
    start: usize,
    end: usize,
}

#[derive(Serialize)]
struct SegmentOut<'a> {
    input: &'a str,
    count: usize,
    segments: Vec<SpanOut<'a>>,
}

fn cmd_segment(grammar: &MetaActionGrammar, strings: &[String], format: Format) -> Result<()> {
    let mut results = Vec::with_capacity(strings.len());
    for input in strings {
        let a = ActionString::new(input.clone())
            .with_context(|| format!("invalid action string {input:?}"))?;
        let seg = segment(grammar, &a).with_context(|| format!("segmenting {input:?}"))?;
        let segments: Vec<SpanOut> = seg
            .segments
            .iter()
            .map(|s| SpanOut {
                meta: s.meta,
                name: grammar.name(s.meta),
                start: s.start,
                end: s.end,
            })
            .collect();
        results.push(SegmentOut {
            input,
            count: seg.count(),
            segments,
        });
    }
    match format {
        Format::Tsv => {
            for r in results {
                let mut spans = String::new();
                for (i, s) in r.segments.iter().enumerate() {
                    if i > 0 {
                        spans.push(' ');
                    }
                    write!(spans, "{}[{},{})", s.name, s.start, s.end).unwrap();
                }
                println!("{}\t{}\t{}", r.input, r.count, spans);
            }
        }
        Format::Json => println!("{}", serde_json::to_string(&results)?),
    }
    Ok(())
}

fn cmd_table(grammar: &MetaActionGrammar, string: &str, format: Format) -> Result<()> {
    let a = ActionString::new(string.to_string())
        .with_context(|| format!("invalid action string {string:?}"))?;
    let table = build_table(grammar, &a);
    let rows: Vec<SpanOut> = table
        .entries()
        .iter()
        .map(|e| SpanOut {
            meta: e.meta,
            name: grammar.name(e.meta),
            start: e.start,
            end: e.end,
        })
        .collect();
    match format {
        Format::Tsv => {
            for r in rows {
                println!("{}\t{}\t{}\t{}", r.meta, r.name, r.start, r.end);
            }
        }
        Format::Json => println!("{}", serde_json::to_string(&rows)?),
    }
    Ok(())
}

#[derive(Serialize)]
struct MetaCount<'a> {
    name: &'a str,
    count: usize,
}

#[derive(Serialize)]
struct StatsOut<'a> {
    trajectories: usize,
    mean_la_length: f64,
    mean_ma_length: f64,
    compression_ratio: f64,
    meta_histogram: Vec<MetaCount<'a>>,
}

fn cmd_stats(grammar: &MetaActionGrammar, path: &std::path::Path, format: Format) -> Result<()> {
    let corpus = load_corpus(path)?;
    let trajectories: Vec<_> = corpus.episodes.iter().map(|e| e.trajectory.clone()).collect();
    let stats = mact_core::corpus_stats(grammar, &trajectories).map_err(|e| {
        let id = &corpus.episodes[e.index].id;
        anyhow::anyhow!("episode {} ({id}): {}", e.index, e.source)
    })?;
    let out = StatsOut {
        trajectories: stats.n_trajectories,
        mean_la_length: stats.mean_la_length,
        mean_ma_length: stats.mean_ma_length,
        compression_ratio: stats.compression_ratio,
        meta_histogram: stats
            .meta_histogram
            .iter()
            .enumerate()
            .map(|(id, &count)| MetaCount {
                name: grammar.name(id),
                count,
            })
            .collect(),
    };
    match format {
        Format::Tsv => {
            println!("trajectories: {}", out.trajectories);
            println!("mean_la_length: {:.4}", out.mean_la_length);
            println!("mean_ma_length: {:.4}", out.mean_ma_length);
            println!("compression_ratio: {:.4}", out.compression_ratio);
            for m in &out.meta_histogram {
                println!("meta[{}]: {}", m.name, m.count);
            }
        }
        Format::Json => println!("{}", serde_json::to_string(&out)?),
    }
    Ok(())
}

#[derive(Serialize)]
struct MetricsOut {
    sr: f64,
    gc: f64,
    plw_sr: f64,
    plw_gc: f64,
    pc: f64,
    ls: f64,
    cls: f64,
}

fn cmd_metrics(path: &std::path::Path, d_th: f64, format: Format) -> Result<()> {
    let corpus = load_corpus(path)?;
    if corpus.episodes.is_empty() {
        bail!("corpus has no episodes");
    }
    let mut results: Vec<EpisodeResult> = Vec::with_capacity(corpus.episodes.len());
    let mut plw_sr_sum = 0.0;
    let mut plw_gc_sum = 0.0;
    let mut pc_sum = 0.0;
    let mut ls_sum = 0.0;
    let mut cls_sum = 0.0;
    for (index, episode) in corpus.episodes.iter().enumerate() {
        let result = episode.result().with_context(|| {
            format!("episode {index} ({}) has no goal_conditions", episode.id)
        })?;
        let ref_len = result.ref_len().with_context(|| {
            format!("episode {index} ({}) has no ref_path or ref_len", episode.id)
        })?;
        let pred_len = result.pred_len().with_context(|| {
            format!("episode {index} ({}) has no pred_path or pred_len", episode.id)
        })?;
        let success = if result.success() { 1.0 } else { 0.0 };
        let rate = result.condition_rate().with_context(|| {
            format!("episode {index} ({}) has empty goal_conditions", episode.id)
        })?;
        plw_sr_sum += path_length_weighted(success, ref_len, pred_len)
            .with_context(|| format!("episode {index} ({})", episode.id))?;
        plw_gc_sum += path_length_weighted(rate, ref_len, pred_len)
            .with_context(|| format!("episode {index} ({})", episode.id))?;
        let (pred_path, ref_path) = match (&episode.pred_path, &episode.ref_path) {
            (Some(p), Some(r)) => (p, r),
            _ => bail!(
                "episode {index} ({}) has no pred_path/ref_path for fidelity",
                episode.id
            ),
        };
        let f = fidelity(pred_path, ref_path, d_th)
            .with_context(|| format!("episode {index} ({})", episode.id))?;
        pc_sum += f.pc;
        ls_sum += f.ls;
        cls_sum += f.cls;
        results.push(result);
    }
    let n = corpus.episodes.len() as f64;
    let out = MetricsOut {
        sr: success_rate(&results)?,
        gc: goal_condition_rate(&results)?,
        plw_sr: plw_sr_sum / n,
        plw_gc: plw_gc_sum / n,
        pc: pc_sum / n,
        ls: ls_sum / n,
        cls: cls_sum / n,
    };
    match format {
        Format::Tsv => {
            println!("sr: {:.4}", out.sr);
            println!("gc: {:.4}", out.gc);
            println!("plw_sr: {:.4}", out.plw_sr);
            println!("plw_gc: {:.4}", out.plw_gc);
            println!("pc: {:.4}", out.pc);
            println!("ls: {:.4}", out.ls);
            println!("cls: {:.4}", out.cls);
        }
        Format::Json => println!("{}", serde_json::to_string(&out)?),
    }
    Ok(())
}

#[derive(Serialize)]
struct GradcheckOut {
    contrastive_max_rel_err: f64,
    cross_entropy_max_rel_err: f64,
    tolerance: f64,
}

fn cmd_gradcheck(cases: usize, seed: u64, format: Format) -> Result<()> {
    let report = gradcheck::run_suite(cases, seed);
    let out = GradcheckOut {
        contrastive_max_rel_err: report.contrastive,
        cross_entropy_max_rel_err: report.cross_entropy,
        tolerance: gradcheck::TOLERANCE,
    };
    match format {
        Format::Tsv => {
            println!("contrastive_max_rel_err: {:.3e}", out.contrastive_max_rel_err);
            println!("cross_entropy_max_rel_err: {:.3e}", out.cross_entropy_max_rel_err);
        }
        Format::Json => println!("{}", serde_json::to_string(&out)?),
    }
    let worst = report.contrastive.max(report.cross_entropy);
    if worst > gradcheck::TOLERANCE {
        bail!(
            "worst relative error {worst:.3e} exceeds tolerance {:.0e}",
            gradcheck::TOLERANCE
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct GumbelOut {
    frequencies: Vec<f64>,
    max_sum_err: f64,
}

fn cmd_gumbel(
    logits_arg: &str,
    temperature: f64,
    draws: usize,
    seed: u64,
    format: Format,
) -> Result<()> {
    let logits: Vec<f64> = logits_arg
        .split(',')
        .map(|piece| {
            piece
                .trim()
                .parse::<f64>()
                .with_context(|| format!("invalid logit {:?}", piece.trim()))
        })
        .collect::<Result<_>>()?;
    if draws == 0 {
        bail!("--draws must be at least 1");
    }
    let mut counts = vec![0usize; logits.len()];
    let mut max_sum_err = 0.0f64;
    for draw in 0..draws {
        let sample = gumbel_softmax(&logits, temperature, seed + draw as u64)?;
        counts[sample.hard_index] += 1;
        let sum: f64 = sample.relaxed.iter().sum();
        max_sum_err = max_sum_err.max((sum - 1.0).abs());
    }
    let out = GumbelOut {
        frequencies: counts.iter().map(|&c| c as f64 / draws as f64).collect(),
        max_sum_err,
    };
    match format {
        Format::Tsv => {
            for (i, f) in out.frequencies.iter().enumerate() {
                println!("freq[{i}]: {f:.4}");
            }
            println!("max_sum_err: {:.3e}", out.max_sum_err);
        }
        Format::Json => println!("{}", serde_json::to_string(&out)?),
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleCheckOut {
    cases: usize,
    mismatches: usize,
}

fn cmd_oracle_check(
    grammar: &MetaActionGrammar,
    max_len: usize,
    random: usize,
    seed: u64,
    format: Format,
) -> Result<()> {
    if max_len > 7 {
        bail!("--max-len above 7 is impractical; the sweep grows as 6^len");
    }
    let mut cases = 0usize;
    let mut mismatches = 0usize;
    let mut check = |a: &ActionString| {
        cases += 1;
        let tables_agree =
            build_table(grammar, a).entries() == build_table_bruteforce(grammar, a).entries();
        let segments_agree = segment(grammar, a) == segment_bruteforce(grammar, a);
        if !tables_agree || !segments_agree {
            mismatches += 1;
            eprintln!("mismatch on {:?}", a.as_str());
        }
    };
    let mut buf = String::new();
    exhaustive(&mut buf, max_len, &mut |s| {
        check(&ActionString::new(s.to_string()).expect("alphabet letters only"));
    });
    for episode in generate_synthetic(seed, random, 12).episodes {
        check(&encode_actions(&episode.trajectory));
    }
    let out = OracleCheckOut { cases, mismatches };
    match format {
        Format::Tsv => {
            println!("check: table+segment");
            println!("cases: {}", out.cases);
            println!("mismatches: {}", out.mismatches);
        }
        Format::Json => println!("{}", serde_json::to_string(&out)?),
    }
    if out.mismatches > 0 {
        bail!("{} of {} cases disagree with brute force", out.mismatches, out.cases);
    }
    Ok(())
}

fn exhaustive(buf: &mut String, remaining: usize, f: &mut impl FnMut(&str)) {
    f(buf);
    if remaining == 0 {
        return;
    }
    for &c in mact_core::ALPHABET.iter() {
        buf.push(c);
        exhaustive(buf, remaining - 1, f);
        buf.pop();
    }
}

fn cmd_gen(episodes: usize, mean_len: usize, seed: u64, out: Option<&std::path::Path>) -> Result<()> {
    let corpus = generate_synthetic(seed, episodes, mean_len);
    let json = mact_core::corpus_to_json(&corpus);
    match out {
        Some(path) => {
            std::fs::write(path, json.as_bytes())
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {} ({} episodes)", path.display(), episodes);
        }
        None => println!("{json}"),
    }
    Ok(())
}
