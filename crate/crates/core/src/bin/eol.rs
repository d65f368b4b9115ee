//! Command-line interface composing the localization pipelines.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eol_core::caption_prep::{
    apply_mmlm_masking, extract_object_queries, extract_vocab_matches, tokenize, top_m_concepts,
    LexiconTagger, MaskingParams, ObjectVocabulary, Stoplist, DEFAULT_TOP_M,
};
use eol_core::error::{Error, Result};
use eol_core::grounding::{run_subtask1, run_subtask2, PipelineOptions};
use eol_core::harness::{
    load_annotations, load_candidates, load_captions, load_predictions, load_results, read_json,
    to_sorted_json_string, write_json_sorted, PredictedObject, PredictionFile, PredictionSegment,
    ResultsFile,
};
use eol_core::metrics::{caption_grounding_metrics, localization_accuracy, DEFAULT_IOU_THRESH};
use eol_core::simulator::{simulate_candidates, NoiseConfig};

#[derive(Parser)]
#[command(name = "eol", about = "Entities object localization toolkit", version)]
struct Cli {
    /// RNG seed for commands that sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic per-model detector candidates from ground truth.
    Simulate(SimulateArgs),
    /// Sub-task I: ground annotated object words of GT sentences.
    Ground1(Ground1Args),
    /// Sub-task II: extract queries from generated captions and ground them.
    Ground2(Ground2Args),
    /// Score sub-task I results (localization accuracy).
    EvalLoc(EvalLocArgs),
    /// Score sub-task II predictions (P/R/F1 suites).
    EvalCap(EvalCapArgs),
    /// Extract object queries from one sentence.
    Extract(ExtractArgs),
    /// Apply MMLM masking to one sentence.
    Mask(MaskArgs),
    /// Select the top-M concepts from a frame-probability matrix.
    Concepts(ConceptsArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Ground-truth annotation file.
    #[arg(long)]
    ann: PathBuf,
    /// Output directory; one candidate file per model is written.
    #[arg(long)]
    out: PathBuf,
    /// Number of simulated models.
    #[arg(long, default_value_t = 7)]
    models: u32,
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    #[arg(long, default_value_t = 0.0)]
    miss: f64,
    #[arg(long, default_value_t = 0.0)]
    span_noise: f64,
    #[arg(long, default_value_t = 0)]
    distractors: u32,
}

#[derive(Args)]
struct FusionFlags {
    /// Vote over all raw candidates pooled across models.
    #[arg(long)]
    pooled_voting: bool,
    /// Minimum span score for a model's selection to count.
    #[arg(long, default_value_t = 0.0)]
    min_span_score: f64,
}

#[derive(Args)]
struct Ground1Args {
    #[arg(long)]
    ann: PathBuf,
    /// Candidate file, or directory of per-model candidate files.
    #[arg(long)]
    cands: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Unify co-reference groups to a single box.
    #[arg(long)]
    unify_coref: bool,
    #[command(flatten)]
    fusion: FusionFlags,
}

#[derive(Args)]
struct Ground2Args {
    /// Generated captions file.
    #[arg(long)]
    captions: PathBuf,
    #[arg(long)]
    cands: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Object vocabulary file, or "default" for the built-in one.
    #[arg(long, default_value = "default")]
    vocab: String,
    /// Stoplist file, "default", or "none".
    #[arg(long, default_value = "default")]
    stoplist: String,
    /// Keep only noun/pronoun queries (the POS-filter ablation).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pos_filter: bool,
    #[command(flatten)]
    fusion: FusionFlags,
}

#[derive(Args)]
struct EvalLocArgs {
    #[arg(long)]
    ann: PathBuf,
    /// Results file produced by ground1.
    #[arg(long)]
    results: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IOU_THRESH)]
    iou_thresh: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalCapArgs {
    #[arg(long)]
    ann: PathBuf,
    /// Prediction file produced by ground2.
    #[arg(long)]
    preds: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IOU_THRESH)]
    iou_thresh: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    sentence: String,
    #[arg(long, default_value = "default")]
    vocab: String,
    #[arg(long, default_value = "default")]
    stoplist: String,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pos_filter: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MaskArgs {
    #[arg(long)]
    sentence: String,
    #[arg(long, default_value_t = 0.15)]
    mask_rate: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConceptsArgs {
    /// JSON file holding a T x C probability matrix.
    #[arg(long)]
    probs: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOP_M)]
    m: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_vocab(spec: &str) -> Result<ObjectVocabulary> {
    if spec == "default" {
        Ok(ObjectVocabulary::default_vocab().clone())
    } else {
        ObjectVocabulary::from_file(Path::new(spec))
    }
}

fn load_stoplist(spec: &str) -> Result<Stoplist> {
    match spec {
        "default" => Ok(Stoplist::default_stoplist().clone()),
        "none" => Ok(Stoplist::empty()),
        path => Stoplist::from_file(Path::new(path)),
    }
}

fn emit<T: serde::Serialize>(value: &T, out: &Option<PathBuf>) -> Result<()> {
    let text = to_sorted_json_string(value);
    print!("{text}");
    if let Some(path) = out {
        write_json_sorted(path, value)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let gt = load_annotations(&args.ann)?;
            let cfg = NoiseConfig {
                jitter_sigma: args.jitter,
                miss_rate: args.miss,
                span_noise: args.span_noise,
                num_models: args.models,
                seed: cli.seed,
                distractors: args.distractors,
            };
            let files = simulate_candidates(&gt, &cfg)?;
            std::fs::create_dir_all(&args.out).map_err(|source| Error::Io {
                path: args.out.clone(),
                source,
            })?;
            for file in &files {
                let path = args.out.join(format!("{}.json", file.model_id));
                write_json_sorted(&path, file)?;
            }
            eprintln!("wrote {} model files to {:?}", files.len(), args.out);
        }
        Command::Ground1(args) => {
            let gt = load_annotations(&args.ann)?;
            let cands = load_candidates(&args.cands)?;
            let options = PipelineOptions {
                unify_coref: args.unify_coref,
                pooled_voting: args.fusion.pooled_voting,
                min_span_score: args.fusion.min_span_score,
                ..PipelineOptions::default()
            };
            let output = run_subtask1(&gt, &cands, &options)?;
            let file = ResultsFile {
                results: output.results,
                misses: output.misses,
            };
            write_json_sorted(&args.out, &file)?;
            eprintln!(
                "grounded {} queries ({} misses) -> {:?}",
                file.results.len(),
                file.misses.len(),
                args.out
            );
        }
        Command::Ground2(args) => {
            let captions = load_captions(&args.captions)?;
            let cands = load_candidates(&args.cands)?;
            let vocab = load_vocab(&args.vocab)?;
            let stoplist = load_stoplist(&args.stoplist)?;
            let options = PipelineOptions {
                use_pos_filter: args.pos_filter,
                pooled_voting: args.fusion.pooled_voting,
                min_span_score: args.fusion.min_span_score,
                ..PipelineOptions::default()
            };
            let output = run_subtask2(
                &captions,
                &cands,
                &vocab,
                &stoplist,
                LexiconTagger::default_tagger(),
                &options,
            )?;
            // Re-group grounded queries into per-segment predictions.
            let mut by_segment: BTreeMap<_, Vec<PredictedObject>> = BTreeMap::new();
            for r in &output.results {
                by_segment
                    .entry(r.query.sentence_id.clone())
                    .or_default()
                    .push(PredictedObject {
                        word: r.query.word.clone(),
                        category_id: r.query.category_id,
                        frame_idx: r.bbox.frame_idx,
                        box_coords: [r.bbox.x1, r.bbox.y1, r.bbox.x2, r.bbox.y2],
                    });
            }
            let file = PredictionFile {
                segments: captions
                    .segments
                    .iter()
                    .map(|seg| {
                        let sid = eol_core::caption_prep::SentenceId::new(
                            &seg.video_id,
                            &seg.segment_id,
                        );
                        PredictionSegment {
                            video_id: seg.video_id.clone(),
                            segment_id: seg.segment_id.clone(),
                            sentence: Some(seg.sentence.clone()),
                            objects: by_segment.remove(&sid).unwrap_or_default(),
                        }
                    })
                    .collect(),
            };
            write_json_sorted(&args.out, &file)?;
            eprintln!(
                "predicted {} object words ({} ungroundable) -> {:?}",
                file.segments.iter().map(|s| s.objects.len()).sum::<usize>(),
                output.misses.len(),
                args.out
            );
        }
        Command::EvalLoc(args) => {
            let gt = load_annotations(&args.ann)?;
            let results = load_results(&args.results)?;
            let output = eol_core::grounding::PipelineOutput {
                results: results.results,
                misses: results.misses,
            };
            let report = localization_accuracy(&output, &gt, args.iou_thresh)?.rounded();
            emit(&report, &args.out)?;
        }
        Command::EvalCap(args) => {
            let gt = load_annotations(&args.ann)?;
            let preds = load_predictions(&args.preds)?;
            let report = caption_grounding_metrics(&preds, &gt, args.iou_thresh)?.rounded();
            emit(&report, &args.out)?;
        }
        Command::Extract(args) => {
            let vocab = load_vocab(&args.vocab)?;
            let stoplist = load_stoplist(&args.stoplist)?;
            let queries = if args.pos_filter {
                extract_object_queries(
                    &args.sentence,
                    &vocab,
                    &stoplist,
                    LexiconTagger::default_tagger(),
                )
            } else {
                extract_vocab_matches(&args.sentence, &vocab)
            };
            for q in &queries {
                println!("{}", q.word);
            }
            if args.out.is_some() {
                emit(&queries, &args.out)?;
            }
        }
        Command::Mask(args) => {
            let tokens = tokenize(&args.sentence);
            // Sentence-local id space; the mask token gets the id one
            // past the last word.
            let mut words: Vec<String> = tokens.iter().map(|t| t.lemma.clone()).collect();
            words.sort();
            words.dedup();
            let ids: Vec<u32> = tokens
                .iter()
                .map(|t| words.binary_search(&t.lemma).unwrap() as u32)
                .collect();
            let params = MaskingParams {
                mask_rate: args.mask_rate,
                mask_token_id: words.len() as u32,
                vocab_size: words.len() as u32,
            };
            let outcome = apply_mmlm_masking(&ids, &params, cli.seed)?;
            let as_word = |id: u32| {
                words
                    .get(id as usize)
                    .cloned()
                    .unwrap_or_else(|| "[MASK]".to_string())
            };
            let view = serde_json::json!({
                "tokens": outcome.tokens.iter().map(|&t| as_word(t)).collect::<Vec<_>>(),
                "masked_positions": outcome.masked_positions,
                "labels": outcome.labels.iter().map(|&t| as_word(t)).collect::<Vec<_>>(),
                "actions": outcome.actions,
            });
            emit(&view, &args.out)?;
        }
        Command::Concepts(args) => {
            let probs: Vec<Vec<f64>> = read_json(&args.probs)?;
            let set = top_m_concepts(&probs, args.m)?;
            emit(&set, &args.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
