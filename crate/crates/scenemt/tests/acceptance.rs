//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --test acceptance`.
#![allow(clippy::needless_range_loop)]

use std::collections::VecDeque;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use scenemt_core::eval::{bleu, chrf, sign_test, ChrfConfig};
use scenemt_core::masks::{
    binary_scene_mask, f_norm, normal_scene_mask, scaled_scene_mask, udiscal_mask, Alignment, Mask,
    UNIT_PEAK_SIGMA,
};
use scenemt_core::model::{
    beam_search, copy_task, greedy_decode, length_penalty, sacra_attention, sasa_attention,
    scaled_dot_attention, token_accuracy, train, window_cover, DecodeConfig, HeadSpec, ModelConfig,
    Site, TrainConfig, Transformer,
};
use scenemt_core::numcore::{grad_check_many, Tensor};
use scenemt_core::semgraph::{
    extract_scenes, parse_scene_cover, parse_ucca, scene_distance, MainRelation, RelationKind,
    Scene, SceneCover, UdGraph,
};
use scenemt_core::Result as CoreResult;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn below(r: &mut ChaCha8Rng, n: usize) -> usize {
    (r.next_u64() % n as u64) as usize
}

fn unit(r: &mut ChaCha8Rng) -> f64 {
    (r.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

fn tensor(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    Tensor::new(&[rows, cols], (0..rows * cols).map(|_| unit(r)).collect()).unwrap()
}

fn random_tree(r: &mut ChaCha8Rng, n: usize) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, below(r, i + 1));
    }
    let mut heads = vec![None; n];
    for k in 1..n {
        heads[order[k]] = Some(order[below(r, k)]);
    }
    heads
}

fn scene(tokens: Vec<usize>) -> Scene {
    Scene {
        id: 0,
        main: MainRelation {
            kind: RelationKind::Process,
            tokens: vec![tokens[0]],
        },
        tokens,
        participants: vec![],
    }
}

fn random_cover(r: &mut ChaCha8Rng, n: usize, max_scenes: usize) -> SceneCover {
    let k = below(r, max_scenes + 1);
    let scenes = (0..k)
        .map(|_| {
            let mut tokens: Vec<usize> = (0..n).filter(|_| below(r, 3) == 0).collect();
            if tokens.is_empty() {
                tokens.push(below(r, n));
            }
            scene(tokens)
        })
        .collect();
    SceneCover::new(n, scenes).unwrap()
}

fn barked() -> SceneCover {
    extract_scenes(&parse_ucca(include_str!("fixtures/barked.ug")).unwrap()).unwrap()
}

fn c1_barked_mask() -> Outcome {
    let start = Instant::now();
    let cover = barked();
    let m = binary_scene_mask(&cover);
    let (saw, dog, barked) = (1, 3, 5);
    let took = start.elapsed();
    ensure(m.get(saw, dog) == 1.0, "M[saw,dog] != 1")?;
    ensure(m.get(dog, barked) == 1.0, "M[dog,barked] != 1")?;
    ensure(m.get(saw, barked) == 0.0, "M[saw,barked] != 0")?;
    ensure(took < Duration::from_secs(1), format!("took {took:?}"))?;
    Ok(format!(
        "M[saw,dog]=1 M[dog,barked]=1 M[saw,barked]=0 in {took:?}"
    ))
}

fn c2_vanilla_equivalence() -> Outcome {
    let mut r = rng(2);
    for case in 0..100 {
        let l = 1 + below(&mut r, 16);
        let d_k = 1 + below(&mut r, 32);
        let (q, k, v) = (
            tensor(&mut r, l, d_k),
            tensor(&mut r, l, d_k),
            tensor(&mut r, l, d_k),
        );
        let a = sasa_attention(&q, &k, &v, &Mask::ones(l)).map_err(|e| e.to_string())?;
        let b = scaled_dot_attention(&q, &k, &v).map_err(|e| e.to_string())?;
        let bitwise = a
            .output
            .data()
            .iter()
            .zip(b.output.data())
            .all(|(x, y)| x.to_bits() == y.to_bits());
        ensure(
            bitwise,
            format!("instance {case} (L={l}, d_k={d_k}) differs"),
        )?;
    }
    Ok("100 instances bitwise equal".into())
}

fn c3_sacra_invariance() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for _ in 0..100 {
        let ls = 2 + below(&mut r, 10);
        let lt = 1 + below(&mut r, 8);
        let d_k = 1 + below(&mut r, 6);
        let d_model = d_k * (1 + below(&mut r, 3));
        // token b joins exactly the scenes of token a
        let a = below(&mut r, ls);
        let b = (a + 1 + below(&mut r, ls - 1)) % ls;
        let base = random_cover(&mut r, ls, 4);
        let scenes = base
            .scenes()
            .iter()
            .filter_map(|s| {
                let mut t: Vec<usize> = s.tokens.iter().copied().filter(|&t| t != b).collect();
                if t.contains(&a) {
                    t.push(b);
                }
                (!t.is_empty()).then(|| scene(t))
            })
            .collect();
        let cover = SceneCover::new(ls, scenes).unwrap();
        let c = 0.1 + 0.8 * (unit(&mut r) + 1.0) / 2.0;
        let mask = match below(&mut r, 3) {
            0 => binary_scene_mask(&cover),
            1 => scaled_scene_mask(&cover, c).unwrap(),
            _ => normal_scene_mask(&cover, c).unwrap(),
        };
        let out = sacra_attention(
            &tensor(&mut r, lt, d_model),
            &tensor(&mut r, ls, d_model),
            &tensor(&mut r, ls, d_k),
            &mask,
        )
        .map_err(|e| e.to_string())?;
        for i in 0..ls {
            for j in i + 1..ls {
                if mask.row(i) == mask.row(j) {
                    pairs += 1;
                    for t in 0..lt {
                        worst = worst.max((out.weights.get(t, i) - out.weights.get(t, j)).abs());
                    }
                }
            }
        }
    }
    ensure(worst < 1e-12, format!("max abs diff {worst:e}"))?;
    ensure(pairs >= 100, format!("only {pairs} identical-row pairs"))?;
    Ok(format!(
        "{pairs} identical-row pairs, max abs diff {worst:e}"
    ))
}

fn c4_gradients() -> Outcome {
    let start = Instant::now();
    let cfg = ModelConfig {
        d_model: 8,
        enc_layers: 2,
        dec_layers: 2,
        heads: 2,
        d_ff: 8,
        src_vocab: 7,
        trg_vocab: 7,
        max_len: 16,
    };
    let sasa = HeadSpec {
        site: Site::EncoderSelf,
        layers: vec![2],
        heads: vec![1],
        ..HeadSpec::sasa()
    };
    let sacra = HeadSpec {
        site: Site::Cross,
        layers: vec![1],
        heads: vec![2],
        ..HeadSpec::sacra()
    };
    let model = Transformer::new(cfg, vec![sasa, sacra], 11).map_err(|e| e.to_string())?;
    let src = [2, 5, 3, 6, 4];
    let trg = [3, 3, 6, 2];
    let cover =
        parse_scene_cover("#L 5\nS P main=0 tokens=0,1,2\nS P main=3 tokens=2,3\n").unwrap();
    let mask = binary_scene_mask(&cover);
    let masks = vec![mask.clone(), mask];
    let err = grad_check_many(
        |g, vars| model.loss(g, vars, &src, &trg, &masks, 0.1).map(|(l, _)| l),
        model.params(),
        1e-5,
    )
    .map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure(err <= 1e-4, format!("max relative error {err:e}"))?;
    ensure(took < Duration::from_secs(60), format!("took {took:?}"))?;
    Ok(format!(
        "{} parameters, max relative error {err:e}, {took:.2?}",
        model.param_count()
    ))
}

fn floyd_warshall(heads: &[Option<usize>]) -> Vec<Vec<u32>> {
    let n = heads.len();
    let mut d = vec![vec![u32::MAX / 4; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        if let Some(h) = heads[i] {
            d[i][h] = 1;
            d[h][i] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    d
}

/// Token distance by BFS over an explicit scene graph.
fn scene_bfs(cover: &SceneCover, i: usize, j: usize) -> u32 {
    let scenes = cover.scenes();
    let k = scenes.len();
    let adjacent = |a: usize, b: usize| {
        a != b
            && scenes[a]
                .tokens
                .iter()
                .any(|t| scenes[b].tokens.contains(t))
    };
    let mut best = u32::MAX;
    for start in (0..k).filter(|&s| scenes[s].tokens.contains(&i)) {
        let mut dist = vec![u32::MAX; k];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            for t in 0..k {
                if adjacent(s, t) && dist[t] == u32::MAX {
                    dist[t] = dist[s] + 1;
                    queue.push_back(t);
                }
            }
        }
        for end in (0..k).filter(|&s| scenes[s].tokens.contains(&j)) {
            best = best.min(dist[end]);
        }
    }
    best
}

fn c5_distance_oracles() -> Outcome {
    let mut r = rng(5);
    for case in 0..200 {
        let n = 1 + below(&mut r, 12);
        let heads = random_tree(&mut r, n);
        let fw = floyd_warshall(&heads);
        let ud = UdGraph::from_heads(heads).map_err(|e| e.to_string())?;
        let d = ud.distances();
        // the UDISCAL mask is f_norm of exactly these distances
        let mask = udiscal_mask(&ud, &Alignment::identity(n)).map_err(|e| e.to_string())?;
        for i in 0..n {
            for j in 0..n {
                ensure(
                    d.raw(i, j) == fw[i][j],
                    format!("tree {case}: d({i},{j})={} vs {}", d.raw(i, j), fw[i][j]),
                )?;
                ensure(
                    mask.get(i, j) == f_norm(fw[i][j] as f64, 1.0),
                    format!("tree {case}: mask({i},{j})"),
                )?;
            }
        }
    }
    for case in 0..200 {
        let n = 1 + below(&mut r, 12);
        let cover = random_cover(&mut r, n, 5);
        let d = scene_distance(&cover);
        for i in 0..n {
            for j in 0..n {
                let want = scene_bfs(&cover, i, j);
                ensure(
                    d.raw(i, j) == want,
                    format!("cover {case}: d({i},{j})={} vs {want}", d.raw(i, j)),
                )?;
            }
        }
    }
    Ok("200 trees and 200 covers exact".into())
}

fn c6_mask_values() -> Outcome {
    let peak = f_norm(0.0, UNIT_PEAK_SIGMA);
    ensure(
        (peak - 1.0).abs() <= 1e-12,
        format!("f_norm(0, 1/sqrt(2pi)) = {peak}"),
    )?;
    let cover = parse_scene_cover("#L 3\nS P main=0 tokens=0,1\nS P main=2 tokens=1,2\n").unwrap();
    let normal = normal_scene_mask(&cover, 0.5)
        .map_err(|e| e.to_string())?
        .get(0, 2);
    ensure(
        (normal - 0.455938).abs() <= 1e-6,
        format!("normal mask at C=0.5, d=1 is {normal}"),
    )?;
    let ud = UdGraph::from_heads(vec![None, Some(0)]).unwrap();
    let selfv = udiscal_mask(&ud, &Alignment::identity(2))
        .map_err(|e| e.to_string())?
        .get(1, 1);
    ensure(
        (selfv - 0.398942).abs() <= 1e-6,
        format!("UDISCAL self value {selfv}"),
    )?;
    Ok(format!(
        "peak={peak} normal={normal:.6} udiscal_self={selfv:.6}"
    ))
}

fn toy_run(name: &str, specs: Vec<HeadSpec>) -> std::result::Result<String, String> {
    let pairs = copy_task(200, 12, 3, 8, 42).map_err(|e| e.to_string())?;
    let cfg = ModelConfig {
        d_model: 32,
        enc_layers: 4,
        dec_layers: 4,
        heads: 4,
        d_ff: 64,
        src_vocab: 12,
        trg_vocab: 12,
        max_len: 16,
    };
    let tc = TrainConfig {
        warmup: 200,
        batch_size: 16,
        steps: 2000,
        seed: 7,
        ..TrainConfig::default()
    };
    let masks: Vec<Vec<Mask>> = pairs
        .iter()
        .map(|p| {
            specs
                .iter()
                .map(|_| binary_scene_mask(&window_cover(p.src.len(), 3, 1).unwrap()))
                .collect()
        })
        .collect();
    let start = Instant::now();
    let (model, report) =
        train(&pairs, &cfg, &tc, &specs, &masks).map_err(|e| format!("{name}: {e}"))?;
    let acc = token_accuracy(&model, &pairs, &masks).map_err(|e| format!("{name}: {e}"))?;
    let took = start.elapsed();
    let ln_v = 12f64.ln();
    let loss0 = report.losses[0];
    ensure(
        (loss0 - ln_v).abs() <= 0.1 * ln_v,
        format!("{name}: step-0 loss {loss0:.4} vs ln 12 = {ln_v:.4}"),
    )?;
    ensure(acc >= 0.99, format!("{name}: accuracy {acc:.4}"))?;
    ensure(
        took < Duration::from_secs(600),
        format!("{name}: took {took:?}"),
    )?;
    Ok(format!(
        "{name} acc={acc:.4} loss0={loss0:.3} {:.0}s",
        took.as_secs_f64()
    ))
}

fn c7_toy_training() -> Outcome {
    // one run at a time so each timing reflects a single core
    let runs = [
        ("vanilla", vec![]),
        ("sasa", vec![HeadSpec::sasa()]),
        ("sacra", vec![HeadSpec::sacra()]),
    ];
    let mut lines = Vec::new();
    for (name, specs) in runs {
        lines.push(toy_run(name, specs)?);
    }
    Ok(lines.join("; "))
}

fn c8_metrics() -> Outcome {
    let id = bleu(&["the cat sat on the mat"], &["the cat sat on the mat"])
        .map_err(|e| e.to_string())?
        .score;
    ensure(id == 100.0, format!("bleu identity {id}"))?;
    let hand = bleu(&["the cat sat down now"], &["the cat sat down"])
        .map_err(|e| e.to_string())?
        .score;
    ensure((hand - 66.87).abs() <= 0.01, format!("bleu example {hand}"))?;
    let c = chrf(&["abab"], &["ab"], &ChrfConfig::default())
        .map_err(|e| e.to_string())?
        .score;
    ensure((c - 35.09).abs() <= 0.01, format!("chrf example {c}"))?;
    let b: Vec<f64> = (0..10).map(|i| if i < 8 { 1.0 } else { -1.0 }).collect();
    let p = sign_test(&[0.0; 10], &b).map_err(|e| e.to_string())?;
    ensure(p == 56.0 / 1024.0, format!("sign test {p}"))?;
    Ok(format!(
        "bleu_id={id} bleu_ex={hand:.3} chrf_ex={c:.3} sign={p:.6}"
    ))
}

fn c9_beam() -> Outcome {
    fn table(prefix: &[usize]) -> CoreResult<Vec<f64>> {
        let ninf = f64::NEG_INFINITY;
        let ln = f64::ln;
        Ok(match prefix {
            [] => vec![ninf, ln(0.6), ln(0.4)],
            [1] => vec![ninf, ln(0.5), ln(0.5)],
            [2] => vec![ninf, ln(0.9), ln(0.1)],
            [1, _] => vec![ninf, ln(0.55), ln(0.45)],
            [2, _] => vec![ninf, ln(0.3), ln(0.7)],
            [_, _, _] => vec![0.0, ninf, ninf],
            _ => unreachable!(),
        })
    }
    let alpha = 0.6;
    let mut best = (vec![], f64::NEG_INFINITY);
    for code in 0..8usize {
        let seq: Vec<usize> = (0..3).map(|i| 1 + ((code >> (2 - i)) & 1)).collect();
        let lp: f64 = (0..3)
            .map(|t| table(&seq[..t]).unwrap()[seq[t]])
            .sum::<f64>()
            + table(&seq).unwrap()[0];
        let score = lp / length_penalty(4, alpha);
        if score > best.1 {
            best = (seq, score);
        }
    }
    let h = beam_search(
        &mut table,
        &DecodeConfig {
            beam: 2,
            alpha,
            max_len: 10,
        },
        0,
    )
    .map_err(|e| e.to_string())?;
    ensure(
        h.tokens == best.0,
        format!("beam {:?} vs exhaustive {:?}", h.tokens, best.0),
    )?;
    let greedy = greedy_decode(&mut table, 10, 0).map_err(|e| e.to_string())?;

    let mut r = rng(9);
    for seed in 0..50 {
        let cfg = ModelConfig {
            d_model: 8,
            enc_layers: 2,
            dec_layers: 2,
            heads: 2,
            d_ff: 16,
            src_vocab: 6,
            trg_vocab: 3 + below(&mut r, 5),
            max_len: 12,
        };
        let model = Transformer::new(cfg, vec![], seed).map_err(|e| e.to_string())?;
        let src: Vec<usize> = (0..1 + below(&mut r, 6))
            .map(|_| 2 + below(&mut r, 4))
            .collect();
        let b = model
            .translate(
                &src,
                &[],
                &DecodeConfig {
                    beam: 1,
                    alpha,
                    max_len: 8,
                },
            )
            .map_err(|e| e.to_string())?;
        let g = model.greedy(&src, &[], 8).map_err(|e| e.to_string())?;
        ensure(
            b.tokens == g.tokens,
            format!(
                "model {seed}: beam=1 {:?} vs greedy {:?}",
                b.tokens, g.tokens
            ),
        )?;
    }
    Ok(format!(
        "beam=2 {:?} = exhaustive (greedy {:?}); 50 models beam=1 = greedy",
        h.tokens, greedy.tokens
    ))
}

fn cli(dir: &Path, args: &[&str]) -> std::result::Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_scenemt"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        out.status.success(),
        format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()),
    )
}

fn c10_determinism() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (d1, d2) = (root.path().join("run1"), root.path().join("run2"));
    fs::create_dir_all(&d1).map_err(|e| e.to_string())?;
    fs::create_dir_all(&d2).map_err(|e| e.to_string())?;

    cli(&d1, &["copy-task", "--pairs", "40", "--out", "data"])?;
    cli(
        &d1,
        &[
            "train",
            "--src",
            "data/train.src",
            "--trg",
            "data/train.trg",
            "--scenes",
            "data/train.scenes",
            "--d-model",
            "16",
            "--layers",
            "3",
            "--heads",
            "2",
            "--d-ff",
            "32",
            "--max-len",
            "16",
            "--steps",
            "60",
            "--batch",
            "8",
            "--warmup",
            "30",
            "--seed",
            "5",
            "--sasa",
            "layers=3",
            "--sacra",
            "--out",
            "model",
        ],
    )?;
    cli(
        &d1,
        &[
            "translate",
            "--model",
            "model",
            "--src",
            "data/train.src",
            "--scenes",
            "data/train.scenes",
            "--out",
            "tr",
        ],
    )?;
    cli(
        &d1,
        &[
            "evaluate",
            "--hyp",
            "tr/hyp.txt",
            "--ref",
            "data/train.trg",
            "--out",
            "ev",
        ],
    )?;

    for step in ["data", "model", "tr", "ev"] {
        let manifest = d1.join(step).join("manifest.txt");
        cli(
            &d2,
            &["replay", manifest.to_str().ok_or("non-UTF-8 temp path")?],
        )?;
    }
    let mut checked = Vec::new();
    for file in ["model/model.ckpt", "ev/scores.txt", "tr/hyp.txt"] {
        let a = fs::read(d1.join(file)).map_err(|e| format!("{file}: {e}"))?;
        let b = fs::read(d2.join(file)).map_err(|e| format!("{file}: {e}"))?;
        ensure(a == b, format!("{file} differs between runs"))?;
        checked.push(format!("{file} ({} bytes)", a.len()));
    }
    Ok(format!("identical: {}", checked.join(", ")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("scene mask fixture", c1_barked_mask),
        (
            "all-ones mask equals vanilla attention",
            c2_vanilla_equivalence,
        ),
        (
            "scene-keyed cross-attention invariance",
            c3_sacra_invariance,
        ),
        ("end-to-end gradient check", c4_gradients),
        ("distance oracles", c5_distance_oracles),
        ("mask value formulas", c6_mask_values),
        ("toy copy-task training", c7_toy_training),
        ("metrics", c8_metrics),
        ("beam search", c9_beam),
        ("manifest replay determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
