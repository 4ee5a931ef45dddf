//! `subvocab` command-line tool.

mod io;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use subvocab::analysis::{segmentation_rate, usage_breakdown, vocab_coverage};
use subvocab::corpus::{clean_corpus, sample_pairs, CleaningConfig, MonoCorpus, ParallelCorpus};
use subvocab::eval::{self, best_point, paired_bootstrap, should_stop, LearningCurve, Smoothing};
use subvocab::substring::{encode_multi_hot, mean_embedding, word_substrings, EmbeddingMatrix, SubstringVocabulary};
use subvocab::subword::{detokenize, train_bpe, BpeModel, GreedyTrainer, MergeTable, Segmentation, Segmenter};
use subvocab::synth::{
    apply_relatedness, corpus_alphabet, corrupt_word_order, restore_relatedness, CorruptionMode, RelatednessConfig, SideReport,
    SubstitutionKey,
};
use subvocab::transfer::{build_balanced_vocabulary, build_merged_vocabulary, transform_vocabulary, transform_with_child, StrategyKind, TransformStrategy};
use subvocab::{BoundaryConvention, Error, Result, Vocabulary};

use crate::io::{emit, emit_raw, read_all, stream_lines, write_text, Format};

#[derive(Parser)]
#[command(name = "subvocab", version, about = "Subword vocabulary tools for transfer learning in MT")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct SeedArg {
    #[arg(long, env = "SUBVOCAB_SEED", default_value_t = subvocab::rng::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct ParallelIn {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
}

#[derive(Args)]
struct ParallelOut {
    #[arg(long)]
    out_source: PathBuf,
    #[arg(long)]
    out_target: PathBuf,
}

#[derive(Args)]
struct SegmenterArgs {
    /// Vocabulary file.
    #[arg(long)]
    vocab: PathBuf,
    /// Merge table; segments with BPE instead of greedy longest match.
    #[arg(long)]
    merges: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a BPE merge table.
    BpeTrain {
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        merges: usize,
        #[arg(long)]
        output_merges: PathBuf,
        #[arg(long)]
        output_vocab: Option<PathBuf>,
    },
    /// Apply a merge table to standard input.
    BpeApply {
        #[arg(long)]
        merges: PathBuf,
        /// Escape characters outside this vocabulary.
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Train a greedy longest-match vocabulary of a target size.
    VocabTrain {
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = subvocab::subword::DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long, default_value_t = subvocab::subword::DEFAULT_BATCH)]
        batch: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Segment standard input with a vocabulary.
    Segment {
        #[command(flatten)]
        model: SegmenterArgs,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Undo segmentation.
    Detok {
        /// Take the boundary convention from this vocabulary file.
        #[arg(long, conflicts_with = "convention", required_unless_present = "convention")]
        vocab: Option<PathBuf>,
        #[arg(long)]
        convention: Option<BoundaryConvention>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Turn a parent vocabulary into one usable for a child language pair.
    VocabTransform {
        #[arg(long)]
        parent: PathBuf,
        /// Child training text; a child vocabulary is trained from it.
        #[arg(long, required_unless_present = "child_vocab")]
        child_corpus: Vec<PathBuf>,
        /// Prebuilt child vocabulary in frequency order.
        #[arg(long, conflicts_with = "child_corpus")]
        child_vocab: Option<PathBuf>,
        #[arg(long, default_value = "frequency")]
        strategy: StrategyKind,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        output: PathBuf,
        /// Mapping as JSON lines; standard output when absent.
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
    /// Joint vocabulary from two separately trained halves.
    VocabMerge {
        #[arg(long, required = true)]
        parent_corpus: Vec<PathBuf>,
        #[arg(long, required = true)]
        child_corpus: Vec<PathBuf>,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = subvocab::subword::DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Joint vocabulary from equally sized parent and child samples.
    VocabBalance {
        #[arg(long)]
        parent_source: PathBuf,
        #[arg(long)]
        parent_target: PathBuf,
        #[arg(long)]
        child_source: PathBuf,
        #[arg(long)]
        child_target: PathBuf,
        #[arg(long)]
        size: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        output: PathBuf,
    },
    /// Average subword tokens per word.
    SegRate {
        #[command(flatten)]
        model: SegmenterArgs,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Break vocabulary entries down by the languages that use them.
    VocabUsage {
        #[command(flatten)]
        model: SegmenterArgs,
        /// `LANG=PATH`, repeatable.
        #[arg(long = "corpus", required = true, value_parser = parse_lang_path)]
        corpora: Vec<(String, PathBuf)>,
        #[arg(long, value_delimiter = ',', required = true)]
        parent_langs: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        child_langs: Vec<String>,
        #[arg(long, default_value_t = 10)]
        min_count: u64,
    },
    /// Share of vocabulary entries used in a corpus.
    VocabCoverage {
        #[command(flatten)]
        model: SegmenterArgs,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        min_count: u64,
    },
    /// Build an artificially related language by letter substitution.
    Relate {
        /// Share of word types kept unchanged.
        #[arg(long)]
        keep_ratio: Option<f64>,
        #[command(flatten)]
        seed: SeedArg,
        /// Key to use; generated and saved here when the file does not exist.
        #[arg(long)]
        key_file: Option<PathBuf>,
        /// Where to save the kept-type report needed by --restore.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Undo a previous run using its saved report (requires --key-file).
        #[arg(long, conflicts_with_all = ["keep_ratio", "report"], requires = "key_file")]
        restore: Option<PathBuf>,
        /// Parallel input; standard input is processed as one side otherwise.
        #[arg(long, requires_all = ["target", "out_source", "out_target"])]
        source: Option<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        out_source: Option<PathBuf>,
        #[arg(long)]
        out_target: Option<PathBuf>,
    },
    /// Damage word order or sentence alignment.
    Corrupt {
        #[arg(long)]
        mode: CorruptionMode,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        input: ParallelIn,
        #[command(flatten)]
        output: ParallelOut,
    },
    /// Filter a parallel corpus by length, ratio and control characters.
    Clean {
        #[command(flatten)]
        input: ParallelIn,
        #[command(flatten)]
        output: ParallelOut,
        #[arg(long, default_value_t = CleaningConfig::default().min_tokens)]
        min_tokens: usize,
        #[arg(long, default_value_t = CleaningConfig::default().max_tokens)]
        max_tokens: usize,
        #[arg(long, default_value_t = CleaningConfig::default().max_length_ratio)]
        max_ratio: f64,
        /// Keep control characters instead of stripping them.
        #[arg(long)]
        keep_control: bool,
    },
    /// Draw a seeded sample of sentence pairs, original order kept.
    Sample {
        #[command(flatten)]
        input: ParallelIn,
        #[command(flatten)]
        output: ParallelOut,
        #[arg(short, long)]
        n: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Corpus BLEU of pre-tokenized text.
    Bleu {
        #[arg(long)]
        hyp: PathBuf,
        /// Reference file, repeatable for multiple references.
        #[arg(long = "ref", required = true)]
        refs: Vec<PathBuf>,
        #[arg(long, default_value_t = eval::DEFAULT_MAX_N)]
        max_n: usize,
        /// Replace zero match counts by this value.
        #[arg(long)]
        smooth: Option<f64>,
    },
    /// Paired bootstrap resampling of two systems.
    Significance {
        #[arg(long)]
        hyp_a: PathBuf,
        #[arg(long)]
        hyp_b: PathBuf,
        #[arg(long = "ref", required = true)]
        refs: Vec<PathBuf>,
        #[arg(long, default_value_t = eval::DEFAULT_RESAMPLES)]
        resamples: usize,
        #[arg(long, default_value_t = eval::DEFAULT_MAX_N)]
        max_n: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Decide whether training should stop from a learning curve.
    StopCheck {
        /// `step<TAB>score` per line; standard input when absent.
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long, default_value_t = eval::DEFAULT_REL_DELTA)]
        rel_delta: f64,
        #[arg(long, default_value_t = eval::DEFAULT_WINDOW_FRAC)]
        window_frac: f64,
    },
    /// List a word's marked substrings or build a substring vocabulary.
    Substrings {
        #[arg(long, conflicts_with_all = ["input", "size", "output"], required_unless_present = "input")]
        word: Option<String>,
        #[arg(long, requires_all = ["size", "output"])]
        input: Vec<PathBuf>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Averaged substring embeddings for words on standard input.
    Embed {
        #[arg(long)]
        substrings: PathBuf,
        /// Embedding matrix; seeded random initialization when absent.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        dim: usize,
        #[command(flatten)]
        seed: SeedArg,
        /// Save the matrix that was used.
        #[arg(long)]
        save_matrix: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn parse_lang_path(s: &str) -> std::result::Result<(String, PathBuf), String> {
    let (lang, path) = s.split_once('=').ok_or_else(|| format!("expected LANG=PATH, got `{s}`"))?;
    if lang.is_empty() || path.is_empty() {
        return Err(format!("expected LANG=PATH, got `{s}`"));
    }
    Ok((lang.to_string(), PathBuf::from(path)))
}

enum Model {
    Greedy(Vocabulary),
    Bpe(BpeModel),
}

impl Model {
    fn load(args: &SegmenterArgs) -> Result<Self> {
        let vocab = Vocabulary::read(&args.vocab)?;
        Ok(match &args.merges {
            Some(m) => Model::Bpe(BpeModel::new(vocab, MergeTable::read(m)?)),
            None => Model::Greedy(vocab),
        })
    }

    fn segmenter(&self) -> &dyn Segmenter {
        match self {
            Model::Greedy(v) => v,
            Model::Bpe(m) => m,
        }
    }
}

fn parallel(input: &ParallelIn) -> Result<ParallelCorpus> {
    ParallelCorpus::load(&input.source, &input.target)
}

fn tokenized(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(eval::tokenize_lines(&read_all(Some(path))?))
}

fn references(paths: &[PathBuf], n: usize) -> Result<Vec<Vec<Vec<String>>>> {
    let streams = paths.iter().map(|p| tokenized(p)).collect::<Result<Vec<_>>>()?;
    for s in &streams {
        if s.len() != n {
            return Err(Error::Alignment {
                source_lines: n,
                target_lines: s.len(),
            });
        }
    }
    Ok((0..n).map(|i| streams.iter().map(|s| s[i].clone()).collect()).collect())
}

#[derive(Serialize)]
struct TrainReport {
    vocab_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    merges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    component_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct RelateReport {
    keep_ratio: f64,
    seed: u64,
    source: SideReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<SideReport>,
}

#[derive(Serialize)]
struct CountReport {
    lines: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<()> {
    let format = cli.format;
    match cli.command {
        Command::BpeTrain {
            input,
            merges,
            output_merges,
            output_vocab,
        } => {
            let (vocab, table) = train_bpe(&io::corpus(&input)?, merges)?;
            table.write(&output_merges)?;
            if let Some(p) = output_vocab {
                vocab.write(p)?;
            }
            emit(
                &TrainReport {
                    vocab_size: vocab.len(),
                    merges: Some(table.len()),
                    component_size: None,
                    seed: None,
                },
                format,
            )
        }
        Command::BpeApply { merges, vocab, input } => {
            let table = MergeTable::read(merges)?;
            match vocab {
                Some(v) => {
                    let model = BpeModel::new(Vocabulary::read(v)?, table);
                    stream_lines(input.as_deref(), |l| Ok(model.segment(l).to_string()))?;
                }
                None => {
                    stream_lines(input.as_deref(), |l| Ok(table.apply(l).to_string()))?;
                }
            }
            Ok(())
        }
        Command::VocabTrain {
            input,
            size,
            tolerance,
            batch,
            output,
        } => {
            let vocab = GreedyTrainer::new(size).tolerance(tolerance).batch(batch).train(&io::corpus(&input)?)?;
            vocab.write(&output)?;
            emit(
                &TrainReport {
                    vocab_size: vocab.len(),
                    merges: None,
                    component_size: None,
                    seed: None,
                },
                format,
            )
        }
        Command::Segment { model, input } => {
            let model = Model::load(&model)?;
            let seg = model.segmenter();
            stream_lines(input.as_deref(), |l| Ok(seg.segment(l).to_string()))?;
            Ok(())
        }
        Command::Detok { vocab, convention, input } => {
            let convention = match (vocab, convention) {
                (Some(v), _) => Vocabulary::read(v)?.convention(),
                (None, Some(c)) => c,
                (None, None) => unreachable!("clap requires one of --vocab / --convention"),
            };
            stream_lines(input.as_deref(), |l| detokenize(&Segmentation::parse(l), convention))?;
            Ok(())
        }
        Command::VocabTransform {
            parent,
            child_corpus,
            child_vocab,
            strategy,
            seed,
            output,
            mapping,
        } => {
            let parent = Vocabulary::read(parent)?;
            let strategy = TransformStrategy::new(strategy, seed.seed);
            let (vocab, map) = match child_vocab {
                Some(c) => transform_with_child(&parent, &Vocabulary::read(c)?, strategy)?,
                None => {
                    let corpus = io::corpus(&child_corpus)?;
                    transform_vocabulary(&parent, &[&corpus], strategy)?
                }
            };
            vocab.write(&output)?;
            match mapping {
                Some(p) => write_text(&p, &map.to_jsonl()),
                None => emit_raw(&map.to_jsonl()),
            }
        }
        Command::VocabMerge {
            parent_corpus,
            child_corpus,
            size,
            tolerance,
            output,
        } => {
            let merged = build_merged_vocabulary(&io::corpus(&parent_corpus)?, &io::corpus(&child_corpus)?, size, tolerance)?;
            merged.vocab.write(&output)?;
            emit(
                &TrainReport {
                    vocab_size: merged.vocab.len(),
                    merges: None,
                    component_size: Some(merged.component_size),
                    seed: None,
                },
                format,
            )
        }
        Command::VocabBalance {
            parent_source,
            parent_target,
            child_source,
            child_target,
            size,
            seed,
            output,
        } => {
            let parent = ParallelCorpus::load(parent_source, parent_target)?;
            let child = ParallelCorpus::load(child_source, child_target)?;
            let vocab = build_balanced_vocabulary(&parent, &child, size, seed.seed)?;
            vocab.write(&output)?;
            emit(
                &TrainReport {
                    vocab_size: vocab.len(),
                    merges: None,
                    component_size: None,
                    seed: Some(seed.seed),
                },
                format,
            )
        }
        Command::SegRate { model, input } => {
            let model = Model::load(&model)?;
            let corpus = MonoCorpus::new(read_all(input.as_deref())?);
            emit(&segmentation_rate(model.segmenter(), &corpus)?, format)
        }
        Command::VocabUsage {
            model,
            corpora,
            parent_langs,
            child_langs,
            min_count,
        } => {
            let model = Model::load(&model)?;
            let mut map = BTreeMap::new();
            for (lang, path) in corpora {
                let corpus = MonoCorpus::new(read_all(Some(&path))?).with_tag(lang.clone());
                map.insert(lang, corpus);
            }
            let parent: BTreeSet<String> = parent_langs.into_iter().collect();
            let child: BTreeSet<String> = child_langs.into_iter().collect();
            let breakdown = usage_breakdown(model.segmenter(), &map, &parent, &child, min_count)?;
            match format {
                Format::Json => emit(&breakdown, format),
                Format::Tsv => emit_raw(&breakdown.to_tsv()),
            }
        }
        Command::VocabCoverage { model, input, min_count } => {
            #[derive(Serialize)]
            struct Coverage {
                coverage_pct: f64,
                min_count: u64,
                vocab_size: usize,
            }
            let model = Model::load(&model)?;
            let corpus = MonoCorpus::new(read_all(input.as_deref())?);
            let seg = model.segmenter();
            emit(
                &Coverage {
                    coverage_pct: vocab_coverage(seg, &corpus, min_count)?,
                    min_count,
                    vocab_size: seg.vocabulary().len(),
                },
                format,
            )
        }
        Command::Relate {
            keep_ratio,
            seed,
            key_file,
            report,
            restore,
            source,
            target,
            out_source,
            out_target,
        } => {
            let corpus = match (&source, &target) {
                (Some(s), Some(t)) => ParallelCorpus::load(s, t)?,
                _ => {
                    let lines = read_all(None)?;
                    let blanks = vec![String::new(); lines.len()];
                    ParallelCorpus::from_sides(lines, blanks)?
                }
            };
            let is_parallel = source.is_some();
            let key = match &key_file {
                Some(p) if p.exists() => SubstitutionKey::read(p)?,
                _ => {
                    let alphabet = corpus_alphabet(corpus.pairs().iter().flat_map(|(s, t)| [s.as_str(), t.as_str()]));
                    let key = SubstitutionKey::generate(&alphabet, seed.seed)?;
                    if let Some(p) = &key_file {
                        key.write(p)?;
                    }
                    key
                }
            };
            let (result, summary) = match restore {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                    let saved: RelateReport = serde_json::from_str(&text)?;
                    let kept_target = saved.target.map(|t| t.kept_types).unwrap_or_default();
                    (restore_relatedness(&corpus, &key, &saved.source.kept_types, &kept_target)?, None)
                }
                None => {
                    let keep_ratio =
                        keep_ratio.ok_or_else(|| Error::Config("--keep-ratio is required unless --restore is given".into()))?;
                    let out = apply_relatedness(&corpus, &key, &RelatednessConfig { keep_ratio, seed: seed.seed })?;
                    let summary = RelateReport {
                        keep_ratio,
                        seed: seed.seed,
                        source: out.source,
                        target: is_parallel.then_some(out.target),
                    };
                    (out.corpus, Some(summary))
                }
            };
            if let (Some(p), Some(s)) = (&report, &summary) {
                write_text(p, &(serde_json::to_string(s)? + "\n"))?;
            }
            match (out_source, out_target) {
                (Some(s), Some(t)) if is_parallel => result.write(s, t),
                _ => {
                    let text: String = result.pairs().iter().map(|(s, _)| format!("{s}\n")).collect();
                    emit_raw(&text)
                }
            }
        }
        Command::Corrupt { mode, seed, input, output } => {
            let corpus = parallel(&input)?;
            let out = corrupt_word_order(&corpus, mode, seed.seed);
            out.write(&output.out_source, &output.out_target)?;
            emit(
                &CountReport {
                    lines: out.len(),
                    seed: Some(seed.seed),
                },
                format,
            )
        }
        Command::Clean {
            input,
            output,
            min_tokens,
            max_tokens,
            max_ratio,
            keep_control,
        } => {
            let cfg = CleaningConfig {
                min_tokens,
                max_tokens,
                max_length_ratio: max_ratio,
                strip_control_chars: !keep_control,
            };
            let (kept, stats) = clean_corpus(&parallel(&input)?, &cfg)?;
            kept.write(&output.out_source, &output.out_target)?;
            emit(&stats, format)
        }
        Command::Sample { input, output, n, seed } => {
            let sample = sample_pairs(&parallel(&input)?, n, seed.seed)?;
            sample.write(&output.out_source, &output.out_target)?;
            emit(
                &CountReport {
                    lines: sample.len(),
                    seed: Some(seed.seed),
                },
                format,
            )
        }
        Command::Bleu { hyp, refs, max_n, smooth } => {
            let hyps = tokenized(&hyp)?;
            let refs = references(&refs, hyps.len())?;
            let smoothing = smooth.map_or(Smoothing::None, Smoothing::AddEpsilon);
            emit(&eval::corpus_bleu_with(&hyps, &refs, max_n, smoothing)?, format)
        }
        Command::Significance {
            hyp_a,
            hyp_b,
            refs,
            resamples,
            max_n,
            seed,
        } => {
            let a = tokenized(&hyp_a)?;
            let b = tokenized(&hyp_b)?;
            let refs = references(&refs, a.len())?;
            emit(&paired_bootstrap(&a, &b, &refs, max_n, resamples, seed.seed)?, format)
        }
        Command::StopCheck {
            curve,
            rel_delta,
            window_frac,
        } => {
            #[derive(Serialize)]
            struct StopReport {
                #[serde(flatten)]
                decision: eval::StopDecision,
                best_step: u64,
                best_score: f64,
            }
            let curve = LearningCurve::parse_tsv(&(read_all(curve.as_deref())?.join("\n")))?;
            let decision = should_stop(&curve, rel_delta, window_frac)?;
            let (best_step, best_score) = best_point(&curve)?;
            emit(
                &StopReport {
                    decision,
                    best_step,
                    best_score,
                },
                format,
            )
        }
        Command::Substrings { word, input, size, output } => match (word, size, output) {
            (Some(w), _, _) => emit(&word_substrings(&w)?, format),
            (None, Some(size), Some(output)) => {
                let vocab = SubstringVocabulary::build(&io::corpus(&input)?, size)?;
                vocab.write(&output)?;
                emit(
                    &TrainReport {
                        vocab_size: vocab.len(),
                        merges: None,
                        component_size: None,
                        seed: None,
                    },
                    format,
                )
            }
            _ => Err(Error::Config("give --word, or --input with --size and --output".into())),
        },
        Command::Embed {
            substrings,
            matrix,
            dim,
            seed,
            save_matrix,
            input,
        } => {
            let vocab = SubstringVocabulary::read(substrings)?;
            let w = match matrix {
                Some(p) => EmbeddingMatrix::read(p)?,
                None => EmbeddingMatrix::random(vocab.len(), dim, seed.seed)?,
            };
            if w.rows() != vocab.len() {
                return Err(Error::Config(format!(
                    "matrix has {} rows but the substring vocabulary has {} entries",
                    w.rows(),
                    vocab.len()
                )));
            }
            if let Some(p) = save_matrix {
                w.write(p)?;
            }
            stream_lines(input.as_deref(), |word| {
                let word = word.trim();
                if word.is_empty() {
                    return Ok(String::new());
                }
                let hot = encode_multi_hot(word, &vocab)?;
                if hot.is_empty() {
                    return Ok(format!("{word}\t"));
                }
                let e = mean_embedding(&hot, &w)?;
                let cols: Vec<String> = e.iter().map(f64::to_string).collect();
                Ok(format!("{word}\t{}", cols.join(" ")))
            })?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("subvocab: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("subvocab: {e}");
            ExitCode::from(1)
        }
    }
}
