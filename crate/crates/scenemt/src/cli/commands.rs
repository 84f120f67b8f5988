use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use scenemt_core::eval::{bleu, chrf, sign_test, ChrfConfig};
use scenemt_core::masks::{MaskFamily, MaskSpec};
use scenemt_core::model::{
    copy_task, token_accuracy, train, validate_head_specs, window_cover, DecodeConfig, HeadSpec,
    ModelConfig, Site, TrainConfig, TrainExample, Transformer,
};
use scenemt_core::semgraph::sem_split;
use scenemt_core::textpipe::{apply_bpe, filter_corpus, train_bpe, FilterConfig, ParallelPair};
use scenemt_core::Error;

use super::structures::Structures;
use super::{Cli, Command, HeadArgs, ModelArgs, StructureArgs};
use crate::error::{CliError, Result};
use crate::io::{
    format_mask, format_model_file, format_per_sentence, parse_head_spec, parse_model_file,
    parse_score_file, read_checkpoint, read_lines, read_text, write_checkpoint, write_text,
    Manifest, Vocab,
};

fn manifest(command: &str, argv: &[String]) -> Manifest {
    let mut m = Manifest::new();
    m.push("command", command)
        .push("version", env!("CARGO_PKG_VERSION"));
    for (i, a) in argv.iter().enumerate() {
        m.push(&format!("argv.{i}"), a);
    }
    m
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

fn finish(out: &Path, m: &Manifest) -> Result<()> {
    write_text(&out.join("manifest.txt"), &m.to_text())
}

fn paired_lines(a: &Path, b: &Path) -> Result<(Vec<String>, Vec<String>)> {
    let (la, lb) = (read_lines(a)?, read_lines(b)?);
    if la.len() != lb.len() {
        return Err(CliError::input(
            b,
            Error::Contract(format!(
                "{} lines, but {} has {}",
                lb.len(),
                a.display(),
                la.len()
            )),
        ));
    }
    Ok((la, lb))
}

pub(super) fn dispatch(command: Command, argv: &[String]) -> Result<String> {
    match command {
        Command::CopyTask {
            out,
            pairs,
            vocab,
            min_len,
            max_len,
            window,
            overlap,
            seed,
        } => cmd_copy_task(
            argv,
            &out,
            pairs,
            vocab,
            (min_len, max_len),
            (window, overlap),
            seed,
        ),
        Command::Masks {
            family,
            c,
            structures,
            out,
        } => cmd_masks(argv, &family, c, &structures, &out),
        Command::Train {
            src,
            trg,
            structures,
            model,
            heads,
            steps,
            batch,
            warmup,
            label_smoothing,
            adam_eps,
            seed,
            out,
        } => {
            let tc = TrainConfig {
                warmup,
                label_smoothing,
                adam_eps,
                batch_size: batch,
                steps,
                seed,
                ..TrainConfig::default()
            };
            cmd_train(argv, &src, &trg, &structures, &model, &heads, &tc, &out)
        }
        Command::Translate {
            model,
            src,
            structures,
            beam,
            alpha,
            greedy,
            max_len,
            out,
        } => {
            let dc = DecodeConfig {
                beam,
                alpha,
                max_len,
            };
            cmd_translate(argv, &model, &src, &structures, &dc, greedy, &out)
        }
        Command::Evaluate {
            hyp,
            reference,
            beta,
            word_order,
            char_order,
            out,
        } => {
            let cfg = ChrfConfig {
                beta,
                word_order,
                char_order,
            };
            cmd_evaluate(argv, &hyp, &reference, &cfg, &out)
        }
        Command::Split {
            src,
            structures,
            out,
        } => cmd_split(argv, &src, &structures, &out),
        Command::Join { pieces, index, out } => cmd_join(argv, &pieces, &index, &out),
        Command::Compare { a, b, out } => cmd_compare(argv, &a, &b, &out),
        Command::Filter {
            src,
            trg,
            max_len,
            max_ratio,
            out,
        } => cmd_filter(argv, &src, &trg, &FilterConfig { max_len, max_ratio }, &out),
        Command::Bpe {
            corpus,
            merges,
            out,
        } => cmd_bpe(argv, &corpus, merges, &out),
        Command::Replay { manifest, out } => cmd_replay(&manifest, out),
    }
}

fn cmd_copy_task(
    argv: &[String],
    out: &Path,
    pairs: usize,
    vocab: usize,
    (min_len, max_len): (usize, usize),
    (window, overlap): (usize, usize),
    seed: u64,
) -> Result<String> {
    let data = copy_task(pairs, vocab, min_len, max_len, seed)?;
    prepare_out(out)?;
    let words = |ids: &[usize]| {
        ids.iter()
            .map(|i| format!("w{}", i - 2))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut src = String::new();
    let mut scenes = String::new();
    for p in &data {
        src.push_str(&words(&p.src));
        src.push('\n');
        scenes.push_str(&window_cover(p.src.len(), window, overlap)?.to_text());
    }
    write_text(&out.join("train.src"), &src)?;
    write_text(&out.join("train.trg"), &src)?;
    write_text(&out.join("train.scenes"), &scenes)?;
    let mut m = manifest("copy-task", argv);
    m.push("pairs", pairs)
        .push("vocab", vocab)
        .push("min_len", min_len)
        .push("max_len", max_len)
        .push("window", window)
        .push("overlap", overlap)
        .push("seed", seed);
    finish(out, &m)?;
    Ok(format!("pairs={pairs}\n"))
}

fn cmd_masks(
    argv: &[String],
    family: &str,
    c: f64,
    args: &StructureArgs,
    out: &Path,
) -> Result<String> {
    let spec = MaskSpec::new(family.parse::<MaskFamily>()?, c)?;
    let structures = Structures::load(args, None)?;
    let n = structures.sentences();
    if n.is_none() {
        return Err(CliError::Usage("give --ucca, --scenes or --conllu".into()));
    }
    let n = n.unwrap_or(0);
    prepare_out(out)?;
    for i in 0..n {
        let mask = structures.mask(&spec, i)?;
        write_text(
            &out.join(format!("mask-{:04}.txt", i + 1)),
            &format_mask(&mask, spec.family.name()),
        )?;
    }
    let mut m = manifest("masks", argv);
    m.push("family", spec.family)
        .push("C", spec.c)
        .push("sentences", n);
    finish(out, &m)?;
    Ok(format!("masks={n}\n"))
}

fn head_specs(args: &HeadArgs) -> Result<Vec<HeadSpec>> {
    let with_c = |mut h: HeadSpec| {
        if let Some(c) = args.c {
            h.mask.c = c;
        }
        h
    };
    let mut specs = Vec::new();
    let flags: [(&Option<Vec<String>>, HeadSpec); 4] = [
        (&args.sasa, HeadSpec::sasa()),
        (&args.sacra, HeadSpec::sacra()),
        (&args.pascal, HeadSpec::pascal()),
        (&args.udiscal, HeadSpec::udiscal()),
    ];
    for (opts, base) in flags {
        if let Some(opts) = opts {
            specs.push(parse_head_spec(&opts.join(" "), with_c(base))?);
        }
    }
    for opts in &args.head {
        let base = HeadSpec {
            site: Site::EncoderSelf,
            layers: vec![1],
            heads: vec![1],
            mask: MaskSpec::binary(),
        };
        specs.push(parse_head_spec(opts, with_c(base))?);
    }
    Ok(specs)
}

fn encode_all(vocab: &Vocab, lines: &[String], path: &Path) -> Result<Vec<Vec<usize>>> {
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| vocab.encode(l, i + 1))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::input(path, e))
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    argv: &[String],
    src: &Path,
    trg: &Path,
    structures: &StructureArgs,
    model: &ModelArgs,
    heads: &HeadArgs,
    tc: &TrainConfig,
    out: &Path,
) -> Result<String> {
    let (src_lines, trg_lines) = paired_lines(src, trg)?;
    let src_vocab = Vocab::build(src_lines.iter().map(String::as_str));
    let trg_vocab = Vocab::build(trg_lines.iter().map(String::as_str));
    let cfg = ModelConfig {
        d_model: model.d_model,
        enc_layers: model.layers,
        dec_layers: model.layers,
        heads: model.heads,
        d_ff: model.d_ff,
        src_vocab: src_vocab.len(),
        trg_vocab: trg_vocab.len(),
        max_len: model.max_len,
    };
    cfg.validate()?;
    tc.validate()?;
    let specs = head_specs(heads)?;
    validate_head_specs(&specs, &cfg)?;

    let srcs = encode_all(&src_vocab, &src_lines, src)?;
    let trgs = encode_all(&trg_vocab, &trg_lines, trg)?;
    if let Some(i) = srcs
        .iter()
        .zip(&trgs)
        .position(|(s, t)| s.is_empty() || t.is_empty())
    {
        return Err(CliError::input(
            src,
            Error::Contract(format!("sentence pair {} has an empty side", i + 1)),
        ));
    }
    let structures = Structures::load(structures, Some(srcs.len()))?;
    structures.require(&specs)?;
    let masks = (0..srcs.len())
        .map(|i| structures.masks(&specs, i))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<TrainExample> = srcs
        .into_iter()
        .zip(trgs)
        .map(|(src, trg)| TrainExample { src, trg })
        .collect();

    let (model, report) = train(&pairs, &cfg, tc, &specs, &masks)?;
    let accuracy = token_accuracy(&model, &pairs, &masks)?;

    prepare_out(out)?;
    let mut ckpt = Vec::new();
    let named: Vec<_> = model.named_params().collect();
    write_checkpoint(&mut ckpt, named).map_err(|e| CliError::io(out.join("model.ckpt"), e))?;
    fs::write(out.join("model.ckpt"), ckpt).map_err(|e| CliError::io(out.join("model.ckpt"), e))?;
    write_text(&out.join("model.cfg"), &format_model_file(&cfg, &specs))?;
    write_text(&out.join("src.vocab"), &src_vocab.to_text())?;
    write_text(&out.join("trg.vocab"), &trg_vocab.to_text())?;
    let losses: String = report
        .losses
        .iter()
        .enumerate()
        .map(|(i, l)| format!("{i}\t{l}\n"))
        .collect();
    write_text(&out.join("losses.txt"), &losses)?;

    let final_loss = report.losses.last().copied().unwrap_or(f64::NAN);
    let mut m = manifest("train", argv);
    m.push("src", src.display())
        .push("trg", trg.display())
        .push("pairs", pairs.len())
        .push("d_model", cfg.d_model)
        .push("enc_layers", cfg.enc_layers)
        .push("dec_layers", cfg.dec_layers)
        .push("heads", cfg.heads)
        .push("d_ff", cfg.d_ff)
        .push("src_vocab", cfg.src_vocab)
        .push("trg_vocab", cfg.trg_vocab)
        .push("max_len", cfg.max_len)
        .push("steps", tc.steps)
        .push("batch_size", tc.batch_size)
        .push("warmup", tc.warmup)
        .push("label_smoothing", tc.label_smoothing)
        .push("beta1", tc.beta1)
        .push("beta2", tc.beta2)
        .push("adam_eps", tc.adam_eps)
        .push("seed", tc.seed);
    for h in &specs {
        m.push("head", crate::io::format_head_spec(h));
    }
    m.push("result.final_loss", final_loss)
        .push("result.accuracy", accuracy);
    finish(out, &m)?;
    Ok(format!(
        "steps={} final_loss={final_loss:.4} accuracy={accuracy:.4}\n",
        tc.steps
    ))
}

fn load_model(dir: &Path) -> Result<(Transformer, Vocab, Vocab)> {
    let cfg_path = dir.join("model.cfg");
    let (cfg, specs) =
        parse_model_file(&read_text(&cfg_path)?).map_err(|e| CliError::input(&cfg_path, e))?;
    let ckpt_path = dir.join("model.ckpt");
    let bytes = fs::read(&ckpt_path).map_err(|e| CliError::io(&ckpt_path, e))?;
    let named = read_checkpoint(&bytes[..]).map_err(|e| CliError::input(&ckpt_path, e))?;
    let model =
        Transformer::from_named(cfg, specs, named).map_err(|e| CliError::input(&ckpt_path, e))?;
    let vocab = |name: &str| -> Result<Vocab> {
        let p = dir.join(name);
        Vocab::parse(&read_text(&p)?).map_err(|e| CliError::input(&p, e))
    };
    let (sv, tv) = (vocab("src.vocab")?, vocab("trg.vocab")?);
    if sv.len() != model.config().src_vocab || tv.len() != model.config().trg_vocab {
        return Err(CliError::input(
            dir,
            Error::Dimension("vocabulary sizes disagree with model.cfg".into()),
        ));
    }
    Ok((model, sv, tv))
}

fn cmd_translate(
    argv: &[String],
    model_dir: &Path,
    src: &Path,
    structures: &StructureArgs,
    dc: &DecodeConfig,
    greedy: bool,
    out: &Path,
) -> Result<String> {
    dc.validate()?;
    let (model, src_vocab, trg_vocab) = load_model(model_dir)?;
    let lines = read_lines(src)?;
    let srcs = encode_all(&src_vocab, &lines, src)?;
    let structures = Structures::load(structures, Some(srcs.len()))?;
    structures.require(model.head_specs())?;
    let mut hyps = String::new();
    for (i, s) in srcs.iter().enumerate() {
        if !s.is_empty() {
            let masks = structures.masks(model.head_specs(), i)?;
            let h = if greedy {
                model.greedy(s, &masks, dc.max_len)
            } else {
                model.translate(s, &masks, dc)
            }
            .map_err(|e| {
                CliError::input(src, Error::Contract(format!("sentence {}: {e}", i + 1)))
            })?;
            hyps.push_str(&trg_vocab.decode(&h.tokens));
        }
        hyps.push('\n');
    }
    prepare_out(out)?;
    write_text(&out.join("hyp.txt"), &hyps)?;
    let mut m = manifest("translate", argv);
    m.push("model", model_dir.display())
        .push("src", src.display())
        .push("decoder", if greedy { "greedy" } else { "beam" })
        .push("beam", dc.beam)
        .push("alpha", dc.alpha)
        .push("max_len", dc.max_len)
        .push("sentences", srcs.len());
    finish(out, &m)?;
    Ok(format!("sentences={}\n", srcs.len()))
}

fn cmd_evaluate(
    argv: &[String],
    hyp: &Path,
    reference: &Path,
    cfg: &ChrfConfig,
    out: &Path,
) -> Result<String> {
    let (hyps, refs) = paired_lines(hyp, reference)?;
    let b = bleu(&hyps, &refs)?;
    let c = chrf(&hyps, &refs, cfg)?;
    let scores = format!("{b}\n{c}\n");
    prepare_out(out)?;
    write_text(&out.join("scores.txt"), &scores)?;
    write_text(&out.join("bleu.tsv"), &format_per_sentence(&b))?;
    write_text(&out.join("chrf.tsv"), &format_per_sentence(&c))?;
    let mut m = manifest("evaluate", argv);
    m.push("hyp", hyp.display())
        .push("ref", reference.display())
        .push("chrf_beta", cfg.beta)
        .push("chrf_word_order", cfg.word_order)
        .push("chrf_char_order", cfg.char_order)
        .push("result.bleu", b.score)
        .push("result.chrf", c.score);
    finish(out, &m)?;
    Ok(scores)
}

fn cmd_split(argv: &[String], src: &Path, args: &StructureArgs, out: &Path) -> Result<String> {
    let lines = read_lines(src)?;
    let structures = Structures::load(args, Some(lines.len()))?;
    let covers = structures
        .covers()
        .ok_or_else(|| CliError::Usage("split needs --ucca or --scenes".into()))?;
    let mut pieces = String::new();
    let mut index = String::new();
    let mut count = 0;
    for (i, (line, cover)) in lines.iter().zip(covers).enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let parts = sem_split(&tokens, cover).map_err(|e| {
            CliError::input(src, Error::Contract(format!("sentence {}: {e}", i + 1)))
        })?;
        for p in parts {
            pieces.push_str(&p.join(" "));
            pieces.push('\n');
            index.push_str(&format!("{}\n", i + 1));
            count += 1;
        }
    }
    prepare_out(out)?;
    write_text(&out.join("pieces.txt"), &pieces)?;
    write_text(&out.join("index.txt"), &index)?;
    let mut m = manifest("split", argv);
    m.push("src", src.display())
        .push("sentences", lines.len())
        .push("pieces", count);
    finish(out, &m)?;
    Ok(format!("sentences={} pieces={count}\n", lines.len()))
}

/// Concatenates the pieces of each sentence with ` . ` between them.
fn join_pieces(pieces: &[String], index: &[usize]) -> Vec<String> {
    let n = index.iter().copied().max().unwrap_or(0);
    let mut grouped: Vec<Vec<&str>> = vec![Vec::new(); n];
    for (p, &i) in pieces.iter().zip(index) {
        grouped[i - 1].push(p.trim());
    }
    grouped.into_iter().map(|g| g.join(" . ")).collect()
}

fn cmd_join(argv: &[String], pieces: &Path, index: &Path, out: &Path) -> Result<String> {
    let (idx_lines, piece_lines) = paired_lines(index, pieces)?;
    let idx = idx_lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            l.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| Error::Parse {
                    line: i + 1,
                    msg: format!("`{l}` is not a sentence number"),
                })
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::input(index, e))?;
    let joined = join_pieces(&piece_lines, &idx);
    prepare_out(out)?;
    let text: String = joined.iter().map(|l| format!("{l}\n")).collect();
    write_text(&out.join("joined.txt"), &text)?;
    let mut m = manifest("join", argv);
    m.push("pieces", pieces.display())
        .push("index", index.display())
        .push("sentences", joined.len());
    finish(out, &m)?;
    Ok(format!("sentences={}\n", joined.len()))
}

fn grouped_scores(path: &Path) -> Result<BTreeMap<String, Vec<f64>>> {
    let lines = parse_score_file(&read_text(path)?).map_err(|e| CliError::input(path, e))?;
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for l in lines {
        out.entry(l.metric).or_default().push(l.score);
    }
    Ok(out)
}

fn cmd_compare(argv: &[String], a: &Path, b: &Path, out: &Path) -> Result<String> {
    let (ga, gb) = (grouped_scores(a)?, grouped_scores(b)?);
    if ga.keys().ne(gb.keys()) {
        return Err(CliError::input(
            b,
            Error::Contract("metrics differ between the score files".into()),
        ));
    }
    if ga.is_empty() {
        return Err(CliError::input(a, Error::Contract("no scores".into())));
    }
    let mut text = String::new();
    for (metric, sa) in &ga {
        let sb = &gb[metric];
        let p = sign_test(sa, sb).map_err(|e| CliError::input(b, e))?;
        let wins = sa.iter().zip(sb).filter(|(x, y)| y > x).count();
        let losses = sa.iter().zip(sb).filter(|(x, y)| y < x).count();
        text.push_str(&format!(
            "metric={metric} p={p:.6} n={} wins={wins} losses={losses} ties={}\n",
            wins + losses,
            sa.len() - wins - losses
        ));
    }
    prepare_out(out)?;
    write_text(&out.join("compare.txt"), &text)?;
    let mut m = manifest("compare", argv);
    m.push("a", a.display()).push("b", b.display());
    finish(out, &m)?;
    Ok(text)
}

fn cmd_filter(
    argv: &[String],
    src: &Path,
    trg: &Path,
    cfg: &FilterConfig,
    out: &Path,
) -> Result<String> {
    let (s, t) = paired_lines(src, trg)?;
    let total = s.len();
    let pairs: Vec<ParallelPair> = s
        .iter()
        .zip(&t)
        .map(|(a, b)| ParallelPair::from_lines(a, b))
        .collect();
    let kept = filter_corpus(pairs, cfg, &[], &[]);
    let side = |f: fn(&ParallelPair) -> &Vec<String>| -> String {
        kept.iter()
            .map(|p| format!("{}\n", f(p).join(" ")))
            .collect()
    };
    prepare_out(out)?;
    write_text(&out.join("filtered.src"), &side(|p| &p.src))?;
    write_text(&out.join("filtered.trg"), &side(|p| &p.trg))?;
    let mut m = manifest("filter", argv);
    m.push("max_len", cfg.max_len)
        .push("max_ratio", cfg.max_ratio)
        .push("result.kept", kept.len())
        .push("result.total", total);
    finish(out, &m)?;
    Ok(format!("kept={} total={total}\n", kept.len()))
}

fn cmd_bpe(argv: &[String], corpus: &Path, merges: usize, out: &Path) -> Result<String> {
    let lines = read_lines(corpus)?;
    let model = train_bpe(lines.iter().map(String::as_str), merges);
    let mut segmented = String::new();
    let mut align = String::new();
    for line in &lines {
        let mut subwords = Vec::new();
        let mut counts = Vec::new();
        for w in line.split_whitespace() {
            let pieces = apply_bpe(&model, w);
            counts.push(pieces.len().to_string());
            subwords.extend(pieces);
        }
        segmented.push_str(&subwords.join(" "));
        segmented.push('\n');
        align.push_str(&counts.join(" "));
        align.push('\n');
    }
    prepare_out(out)?;
    write_text(&out.join("bpe.model"), &model.to_text())?;
    write_text(&out.join("corpus.bpe"), &segmented)?;
    write_text(&out.join("corpus.align"), &align)?;
    let mut m = manifest("bpe", argv);
    m.push("corpus", corpus.display())
        .push("merges", merges)
        .push("result.merges", model.merges().len());
    finish(out, &m)?;
    Ok(format!("merges={}\n", model.merges().len()))
}

/// Swaps the value of `--out` in a recorded command line.
fn override_out(argv: &mut [String], out: &Path) -> Result<()> {
    let value = out.display().to_string();
    for i in 0..argv.len() {
        if argv[i] == "--out" && i + 1 < argv.len() {
            argv[i + 1] = value;
            return Ok(());
        }
        if argv[i].starts_with("--out=") {
            argv[i] = format!("--out={value}");
            return Ok(());
        }
    }
    Err(CliError::Usage("recorded command has no --out".into()))
}

fn cmd_replay(path: &Path, out: Option<PathBuf>) -> Result<String> {
    let m = Manifest::parse(&read_text(path)?).map_err(|e| CliError::input(path, e))?;
    let mut argv = m.argv();
    if argv.is_empty() {
        return Err(CliError::input(
            path,
            Error::Contract("manifest records no command line".into()),
        ));
    }
    if argv[0] == "replay" {
        return Err(CliError::Usage("a manifest cannot record a replay".into()));
    }
    if let Some(out) = out {
        override_out(&mut argv, &out)?;
    }
    let mut full = vec!["scenemt".to_string()];
    full.extend(argv.iter().cloned());
    let cli = Cli::try_parse_from(&full).map_err(|e| CliError::Usage(e.to_string()))?;
    dispatch(cli.command, &argv)
}
