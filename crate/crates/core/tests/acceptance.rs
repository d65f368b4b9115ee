//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Reference values from the original experiments (e.g. 73.19
//! localization accuracy, 26.05 F1_all_per_sent) require trained
//! detector and captioning models and are not reproducible here; the
//! suite instead verifies the deterministic core against independent
//! oracles and property checks at fixed tolerances.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use eol_core::caption_prep::{
    apply_mmlm_masking, extract_object_queries, top_m_concepts, LexiconTagger, MaskAction,
    MaskingParams, ObjectVocabulary, SentenceId, Stoplist, DEFAULT_TOP_M,
};
use eol_core::fusion::iou_voting_select;
use eol_core::geometry::{iou, BBox};
use eol_core::grounding::{run_subtask1, PipelineOptions, PipelineOutput};
use eol_core::harness::{
    CandidateSet, GroundTruthAnnotation, PredictedObject, PredictionFile, PredictionSegment,
};
use eol_core::metrics::{caption_grounding_metrics, localization_accuracy};
use eol_core::simulator::{simulate_candidates, synthetic_annotation, NoiseConfig};

#[test]
fn criterion_1_reference_numbers_not_reproduced() {
    // The published table values (73.19 sub-task I accuracy, 26.05
    // F1_all_per_sent) depend on trained MDETR/UMPM weights that this
    // artifact does not contain; they are format references only and no
    // test asserts them. The remaining criteria substitute oracle- and
    // property-based checks.
    println!("criterion 1: PASS (reference table values documented as not reproducible)");
}

// ---------------------------------------------------------------------
// criterion 2: pixel-grid IoU oracle
// ---------------------------------------------------------------------

fn pixel_grid_iou(a: &BBox, b: &BBox) -> f64 {
    let mut inter = 0u64;
    let mut union = 0u64;
    for x in 0..64 {
        for y in 0..64 {
            let (xf, yf) = (x as f64, y as f64);
            let in_a = xf >= a.x1 && xf < a.x2 && yf >= a.y1 && yf < a.y2;
            let in_b = xf >= b.x1 && xf < b.x2 && yf >= b.y1 && yf < b.y2;
            inter += (in_a && in_b) as u64;
            union += (in_a || in_b) as u64;
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[test]
fn criterion_2_geometry_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let mut coords = [0i32; 8];
        for c in coords.iter_mut() {
            *c = rng.gen_range(0..64);
        }
        let a = BBox::new(0, coords[0] as f64, coords[1] as f64, coords[2] as f64, coords[3] as f64);
        let b = BBox::new(0, coords[4] as f64, coords[5] as f64, coords[6] as f64, coords[7] as f64);
        let fast = iou(&a, &b);
        let slow = pixel_grid_iou(&a, &b);
        assert!(
            (fast - slow).abs() < 1e-9,
            "IoU mismatch: {fast} vs oracle {slow} for {a:?} {b:?}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "oracle run took {elapsed:?}");
    println!("criterion 2: PASS (10000 box pairs, max err < 1e-9, {elapsed:?})");
}

// ---------------------------------------------------------------------
// criterion 3: fusion vs naive scorer
// ---------------------------------------------------------------------

/// Independent naive scorer: textbook rectangle IoU, input-order sums,
/// explicit argmax with the coordinate tie-break.
fn naive_vote_winner(boxes: &[BBox]) -> BBox {
    fn rect_iou(a: &BBox, b: &BBox) -> f64 {
        if a.frame_idx != b.frame_idx {
            return 0.0;
        }
        let w = f64::max(0.0, f64::min(a.x2, b.x2) - f64::max(a.x1, b.x1));
        let h = f64::max(0.0, f64::min(a.y2, b.y2) - f64::max(a.y1, b.y1));
        let inter = w * h;
        let area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
        let area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
        let union = area_a + area_b - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }
    let k = boxes.len();
    let mut scores = vec![0.0f64; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                scores[i] += rect_iou(&boxes[i], &boxes[j]);
            }
        }
    }
    let mut best = 0;
    for i in 1..k {
        let key_i = (boxes[i].frame_idx, boxes[i].x1, boxes[i].y1, boxes[i].x2, boxes[i].y2);
        let key_b = (boxes[best].frame_idx, boxes[best].x1, boxes[best].y1, boxes[best].x2, boxes[best].y2);
        if scores[i] > scores[best] || (scores[i] == scores[best] && key_i < key_b) {
            best = i;
        }
    }
    boxes[best]
}

#[test]
fn criterion_3_fusion_matches_naive_scorer() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1_000 {
        let k = rng.gen_range(1..=10);
        let boxes: Vec<BBox> = (0..k)
            .map(|_| {
                BBox::new(
                    0,
                    rng.gen_range(0.0..64.0),
                    rng.gen_range(0.0..64.0),
                    rng.gen_range(0.0..64.0),
                    rng.gen_range(0.0..64.0),
                )
            })
            .collect();
        let vote = iou_voting_select(&boxes).unwrap();
        assert_eq!(boxes[vote.winner_index], naive_vote_winner(&boxes));

        // argmax unchanged when self-IoU (+1 per candidate) is included
        let with_self: Vec<f64> = vote.scores.iter().map(|s| s + 1.0).collect();
        let max = with_self.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(with_self[vote.winner_index], max);
    }
    println!("criterion 3: PASS (1000 candidate sets, winners identical, self-IoU invariant)");
}

// ---------------------------------------------------------------------
// criterion 4: ablation structure on simulated data
// ---------------------------------------------------------------------

fn coref_member_correct(output: &PipelineOutput, gt_boxes: &HashMap<(SentenceId, (usize, usize)), BBox>) -> (u64, u64) {
    let mut correct = 0u64;
    let mut total = 0u64;
    for r in &output.results {
        if r.query.coref_group.is_some() {
            total += 1;
            let gtb = gt_boxes[&(r.query.sentence_id.clone(), r.query.token_span)];
            correct += (iou(&r.bbox, &gtb) > 0.5) as u64;
        }
    }
    for q in &output.misses {
        if q.coref_group.is_some() {
            total += 1;
        }
    }
    (correct, total)
}

#[test]
fn criterion_4_ablation_structure() {
    let start = Instant::now();
    // 170 segments x 4 objects = 680 object words; the first three of
    // each segment form a co-reference group sharing one GT box.
    let gt = synthetic_annotation(170, 4, true, 40);
    let mut gt_boxes = HashMap::new();
    for video in &gt.videos {
        for segment in &video.segments {
            for object in &segment.objects {
                gt_boxes.insert(
                    (
                        SentenceId::new(&video.video_id, &segment.segment_id),
                        object.token_span,
                    ),
                    object.bbox(),
                );
            }
        }
    }

    let mut fusion_wins = 0;
    for seed in 0..20u64 {
        let cfg = NoiseConfig {
            jitter_sigma: 0.1,
            miss_rate: 0.1,
            num_models: 7,
            seed: 4000 + seed * 13,
            ..NoiseConfig::default()
        };
        let files = simulate_candidates(&gt, &cfg).unwrap();

        let mut single_sum = 0.0;
        for file in &files {
            let set = CandidateSet::from_files(vec![file.clone()]).unwrap();
            let out = run_subtask1(&gt, &set, &PipelineOptions::default()).unwrap();
            single_sum += localization_accuracy(&out, &gt, 0.5).unwrap().macro_accuracy;
        }
        let mean_single = single_sum / files.len() as f64;

        let set = CandidateSet::from_files(files).unwrap();
        let fused_out = run_subtask1(&gt, &set, &PipelineOptions::default()).unwrap();
        let fused = localization_accuracy(&fused_out, &gt, 0.5).unwrap().macro_accuracy;
        if fused >= mean_single - 0.01 {
            fusion_wins += 1;
        }

        let unified_out = run_subtask1(
            &gt,
            &set,
            &PipelineOptions {
                unify_coref: true,
                ..PipelineOptions::default()
            },
        )
        .unwrap();
        let (c_plain, t_plain) = coref_member_correct(&fused_out, &gt_boxes);
        let (c_unify, t_unify) = coref_member_correct(&unified_out, &gt_boxes);
        assert_eq!(t_plain, t_unify);
        assert!(
            c_unify >= c_plain,
            "seed {seed}: unify dropped shared-box group accuracy {c_plain}/{t_plain} -> {c_unify}/{t_unify}"
        );
    }
    assert!(
        fusion_wins >= 18,
        "fusion beat the single-model mean in only {fusion_wins}/20 seeds"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "ablation run took {elapsed:?}");
    println!(
        "criterion 4: PASS (fusion win {fusion_wins}/20 seeds, unify never hurt shared-box groups, {elapsed:?})"
    );
}

// ---------------------------------------------------------------------
// criterion 5: end-to-end identity through the CLI
// ---------------------------------------------------------------------

#[test]
fn criterion_5_end_to_end_identity() {
    use std::process::Command;
    let dir = tempfile::tempdir().unwrap();
    let gt = synthetic_annotation(12, 3, false, 50);
    let gt_path = dir.path().join("gt.json");
    eol_core::harness::write_json_sorted(&gt_path, &gt).unwrap();

    let bin = env!("CARGO_BIN_EXE_eol");
    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().unwrap();
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    };

    let sim = dir.path().join("sim");
    run(&["simulate", "--ann", gt_path.to_str().unwrap(), "--out", sim.to_str().unwrap()]);

    // sub-task I
    let res = dir.path().join("res.json");
    run(&[
        "ground1",
        "--ann",
        gt_path.to_str().unwrap(),
        "--cands",
        sim.to_str().unwrap(),
        "--unify-coref",
        "--out",
        res.to_str().unwrap(),
    ]);
    let report = run(&[
        "eval-loc",
        "--ann",
        gt_path.to_str().unwrap(),
        "--results",
        res.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["macro_accuracy"], serde_json::json!(1.0));

    // sub-task II with captions equal to the GT sentences
    let captions = eol_core::harness::CaptionFile {
        segments: gt.videos[0]
            .segments
            .iter()
            .map(|s| eol_core::harness::CaptionSegment {
                video_id: gt.videos[0].video_id.clone(),
                segment_id: s.segment_id.clone(),
                sentence: s.sentence.clone(),
                frame_idx: 0,
            })
            .collect(),
    };
    let caps_path = dir.path().join("caps.json");
    eol_core::harness::write_json_sorted(&caps_path, &captions).unwrap();
    let preds = dir.path().join("preds.json");
    run(&[
        "ground2",
        "--captions",
        caps_path.to_str().unwrap(),
        "--cands",
        sim.to_str().unwrap(),
        "--out",
        preds.to_str().unwrap(),
    ]);
    let report = run(&[
        "eval-cap",
        "--ann",
        gt_path.to_str().unwrap(),
        "--preds",
        preds.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    for key in [
        "p_all",
        "r_all",
        "f1_all",
        "p_all_per_sent",
        "r_all_per_sent",
        "f1_all_per_sent",
    ] {
        assert_eq!(report[key], serde_json::json!(1.0), "{key} != 1.0");
    }
    println!("criterion 5: PASS (zero-noise identity: macro 1.0 and all six caption metrics 1.0)");
}

// ---------------------------------------------------------------------
// criterion 6: metric oracles on randomized corpora
// ---------------------------------------------------------------------

mod reference_scorer {
    //! Brute-force metric reference, written against the metric
    //! definitions only; shares no code with the implementation.
    use super::*;
    use std::collections::BTreeMap;

    pub fn rect_iou(a: &BBox, b: &BBox) -> f64 {
        if a.frame_idx != b.frame_idx {
            return 0.0;
        }
        let w = f64::max(0.0, f64::min(a.x2, b.x2) - f64::max(a.x1, b.x1));
        let h = f64::max(0.0, f64::min(a.y2, b.y2) - f64::max(a.y1, b.y1));
        let inter = w * h;
        let union = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }

    pub fn localization(
        output: &PipelineOutput,
        gt: &GroundTruthAnnotation,
        thresh: f64,
    ) -> (BTreeMap<u32, (u64, u64)>, f64) {
        let mut preds: HashMap<(SentenceId, (usize, usize)), Option<BBox>> = HashMap::new();
        for r in &output.results {
            preds.insert((r.query.sentence_id.clone(), r.query.token_span), Some(r.bbox));
        }
        for q in &output.misses {
            preds.insert((q.sentence_id.clone(), q.token_span), None);
        }
        let mut per_cat: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
        for video in &gt.videos {
            for segment in &video.segments {
                let sid = SentenceId::new(&video.video_id, &segment.segment_id);
                for object in &segment.objects {
                    let entry = per_cat.entry(object.category_id).or_insert((0, 0));
                    entry.1 += 1;
                    if let Some(Some(b)) = preds.get(&(sid.clone(), object.token_span)) {
                        if rect_iou(b, &object.bbox()) > thresh {
                            entry.0 += 1;
                        }
                    }
                }
            }
        }
        let macro_acc = per_cat
            .values()
            .map(|&(c, t)| c as f64 / t as f64)
            .sum::<f64>()
            / per_cat.len() as f64;
        (per_cat, macro_acc)
    }

    pub fn caption(
        pred: &PredictionFile,
        gt: &GroundTruthAnnotation,
        thresh: f64,
    ) -> [f64; 6] {
        let mut by_seg: HashMap<(String, String), &PredictionSegment> = HashMap::new();
        for s in &pred.segments {
            by_seg.insert((s.video_id.clone(), s.segment_id.clone()), s);
        }
        let f1 = |p: f64, r: f64| if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        let (mut hits_all, mut pred_all, mut gt_all) = (0u64, 0u64, 0u64);
        let (mut sp, mut sr, mut sf, mut n) = (0.0, 0.0, 0.0, 0u64);
        for video in &gt.videos {
            for segment in &video.segments {
                let objs: Vec<PredictedObject> = by_seg
                    .get(&(video.video_id.clone(), segment.segment_id.clone()))
                    .map(|s| s.objects.clone())
                    .unwrap_or_default();
                let mut used = vec![false; segment.objects.len()];
                let mut hits = 0u64;
                for p in &objs {
                    for (gi, g) in segment.objects.iter().enumerate() {
                        if !used[gi]
                            && g.category_id == p.category_id
                            && rect_iou(&p.bbox(), &g.bbox()) > thresh
                        {
                            used[gi] = true;
                            hits += 1;
                            break;
                        }
                    }
                }
                let p = if objs.is_empty() { 0.0 } else { hits as f64 / objs.len() as f64 };
                let r = if segment.objects.is_empty() {
                    0.0
                } else {
                    hits as f64 / segment.objects.len() as f64
                };
                sp += p;
                sr += r;
                sf += f1(p, r);
                n += 1;
                hits_all += hits;
                pred_all += objs.len() as u64;
                gt_all += segment.objects.len() as u64;
            }
        }
        let pa = if pred_all == 0 { 0.0 } else { hits_all as f64 / pred_all as f64 };
        let ra = if gt_all == 0 { 0.0 } else { hits_all as f64 / gt_all as f64 };
        let nf = n.max(1) as f64;
        [pa, ra, f1(pa, ra), sp / nf, sr / nf, sf / nf]
    }
}

fn random_corpus(rng: &mut ChaCha8Rng) -> (GroundTruthAnnotation, PipelineOutput, PredictionFile) {
    let num_segments = rng.gen_range(1..=10);
    let objects = rng.gen_range(1..=5);
    let gt = synthetic_annotation(num_segments, objects, rng.gen_bool(0.3), rng.gen());

    let mut output = PipelineOutput::default();
    let mut pred_segments = Vec::new();
    for segment in &gt.videos[0].segments {
        let sid = SentenceId::new(&gt.videos[0].video_id, &segment.segment_id);
        let mut pred_objs = Vec::new();
        for object in &segment.objects {
            let query = object.query(sid.clone());
            let roll: f64 = rng.gen();
            if roll < 0.2 {
                output.misses.push(query);
            } else {
                // jittered or outright wrong box
                let b = object.bbox();
                let bbox = if roll < 0.7 {
                    let dx = rng.gen_range(-30.0..30.0);
                    let dy = rng.gen_range(-30.0..30.0);
                    BBox::new(0, b.x1 + dx, b.y1 + dy, b.x2 + dx, b.y2 + dy)
                } else {
                    BBox::new(
                        0,
                        rng.gen_range(0.0..600.0),
                        rng.gen_range(0.0..440.0),
                        rng.gen_range(0.0..600.0),
                        rng.gen_range(0.0..440.0),
                    )
                };
                output.results.push(eol_core::grounding::GroundingResult {
                    query,
                    bbox,
                    per_model_boxes: Default::default(),
                });
            }
            // prediction side: sometimes mispredict the category
            if rng.gen_bool(0.8) {
                let (word, category_id) = if rng.gen_bool(0.8) {
                    (object.word.clone(), object.category_id)
                } else {
                    ("cat".to_string(), 9)
                };
                let b = object.bbox();
                let dx = rng.gen_range(-40.0..40.0);
                pred_objs.push(PredictedObject {
                    word,
                    category_id,
                    frame_idx: 0,
                    box_coords: [b.x1 + dx, b.y1, b.x2 + dx, b.y2],
                });
            }
        }
        pred_segments.push(PredictionSegment {
            video_id: gt.videos[0].video_id.clone(),
            segment_id: segment.segment_id.clone(),
            sentence: None,
            objects: pred_objs,
        });
    }
    (gt, output, PredictionFile { segments: pred_segments })
}

#[test]
fn criterion_6_metric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let (gt, output, preds) = random_corpus(&mut rng);

        let report = localization_accuracy(&output, &gt, 0.5).unwrap();
        let (ref_cats, ref_macro) = reference_scorer::localization(&output, &gt, 0.5);
        assert_eq!(report.per_category.len(), ref_cats.len());
        for (cat, stats) in &report.per_category {
            assert_eq!((stats.num_correct, stats.num_total), ref_cats[cat]);
        }
        assert_eq!(report.macro_accuracy, ref_macro);

        let cap = caption_grounding_metrics(&preds, &gt, 0.5).unwrap();
        let reference = reference_scorer::caption(&preds, &gt, 0.5);
        assert_eq!(
            [cap.p_all, cap.r_all, cap.f1_all, cap.p_all_per_sent, cap.r_all_per_sent, cap.f1_all_per_sent],
            reference
        );
    }
    println!("criterion 6: PASS (200 random corpora agree exactly with the reference scorer)");
}

// ---------------------------------------------------------------------
// criterion 7: masking statistics
// ---------------------------------------------------------------------

#[test]
fn criterion_7_masking_statistics() {
    let tokens: Vec<u32> = (0..100_000u32).map(|i| i % 1000).collect();
    let params = MaskingParams::new(1000, 1000);
    let outcome = apply_mmlm_masking(&tokens, &params, 42).unwrap();
    let selected = outcome.masked_positions.len() as f64 / tokens.len() as f64;
    assert!(
        (0.145..=0.155).contains(&selected),
        "selected fraction {selected}"
    );
    let count = |a: MaskAction| {
        outcome.actions.iter().filter(|&&x| x == a).count() as f64 / outcome.actions.len() as f64
    };
    let (m, r, k) = (
        count(MaskAction::Mask),
        count(MaskAction::Random),
        count(MaskAction::Keep),
    );
    assert!((0.785..=0.815).contains(&m), "MASK fraction {m}");
    assert!((0.085..=0.115).contains(&r), "RANDOM fraction {r}");
    assert!((0.085..=0.115).contains(&k), "KEEP fraction {k}");
    assert_eq!(outcome, apply_mmlm_masking(&tokens, &params, 42).unwrap());
    println!(
        "criterion 7: PASS (select {selected:.4}, actions {m:.4}/{r:.4}/{k:.4}, seed-stable)"
    );
}

// ---------------------------------------------------------------------
// criterion 8: query extraction fixtures
// ---------------------------------------------------------------------

#[test]
fn criterion_8_query_extraction_fixtures() {
    let vocab = ObjectVocabulary::default_vocab();
    let stoplist = Stoplist::default_stoplist();
    let tagger = LexiconTagger::default_tagger();
    let words = |s: &str| -> Vec<String> {
        extract_object_queries(s, vocab, stoplist, tagger)
            .into_iter()
            .map(|q| q.word)
            .collect()
    };
    assert_eq!(
        words("A woman is seen speaking to the camera while holding a accordion"),
        ["woman", "accordion"]
    );
    assert_eq!(words("A man jumps the rope"), ["man", "rope"]);
    println!("criterion 8: PASS (camera filtered, verb 'jumps' excluded)");
}

// ---------------------------------------------------------------------
// criterion 9: top-M concept selection
// ---------------------------------------------------------------------

#[test]
fn criterion_9_top_m_concepts() {
    assert_eq!(DEFAULT_TOP_M, 15);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1_000 {
        let frames = rng.gen_range(1..=6);
        let concepts = rng.gen_range(1..=20);
        let probs: Vec<Vec<f64>> = (0..frames)
            .map(|_| (0..concepts).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let a = top_m_concepts(&probs, DEFAULT_TOP_M).unwrap();
        let mut shuffled = probs.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut rng);
        let b = top_m_concepts(&shuffled, DEFAULT_TOP_M).unwrap();
        assert_eq!(a.concepts, b.concepts);
        assert_eq!(a.concepts.len(), DEFAULT_TOP_M.min(concepts));
    }
    // constructed ties resolve to the smaller concept id, deterministically
    let tied = vec![vec![0.4, 0.4, 0.4, 0.1]];
    for _ in 0..10 {
        assert_eq!(top_m_concepts(&tied, 2).unwrap().concepts, vec![0, 1]);
    }
    println!("criterion 9: PASS (1000 permutation-invariant matrices, M=15 default, tie-break stable)");
}
