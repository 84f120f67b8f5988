use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::attention::{aggregate_keys, attend, mask_var};
use super::beam::{beam_search, greedy_decode, Hypothesis, StepScorer};
use super::config::{validate_head_specs, DecodeConfig, HeadSpec, ModelConfig, Site};
use crate::error::{Error, Result};
use crate::masks::Mask;
use crate::numcore::{Graph, Tensor, Var};

/// End-of-sentence id in the target vocabulary.
pub const EOS: usize = 0;
/// Start-of-sentence id fed to the decoder.
pub const BOS: usize = 1;

const LN_EPS: f64 = 1e-6;
const CAUSAL_BLOCK: f64 = -1e9;

#[derive(Debug, Clone)]
struct HeadParams {
    wq: usize,
    /// `None` for scene-keyed cross-attention heads.
    wk: Option<usize>,
    wv: usize,
    wo: usize,
    /// Index of the head spec that masks this head.
    spec: Option<usize>,
}

#[derive(Debug, Clone)]
struct Norm {
    gain: usize,
    bias: usize,
}

#[derive(Debug, Clone)]
struct FeedForward {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
}

#[derive(Debug, Clone)]
struct EncoderLayer {
    norm_attn: Norm,
    attn: Vec<HeadParams>,
    norm_ff: Norm,
    ff: FeedForward,
}

#[derive(Debug, Clone)]
struct DecoderLayer {
    norm_self: Norm,
    self_attn: Vec<HeadParams>,
    norm_cross: Norm,
    cross: Vec<HeadParams>,
    norm_ff: Norm,
    ff: FeedForward,
}

#[derive(Debug, Clone)]
struct Layout {
    src_emb: usize,
    trg_emb: usize,
    encoder: Vec<EncoderLayer>,
    enc_norm: Norm,
    decoder: Vec<DecoderLayer>,
    dec_norm: Norm,
    out_w: usize,
    out_b: usize,
}

/// How a fresh parameter is initialized.
#[derive(Debug, Clone, Copy)]
enum Init {
    Uniform(f64),
    Const(f64),
}

struct Builder {
    names: Vec<String>,
    shapes: Vec<Vec<usize>>,
    inits: Vec<Init>,
}

impl Builder {
    fn add(&mut self, name: String, shape: &[usize], init: Init) -> usize {
        self.names.push(name);
        self.shapes.push(shape.to_vec());
        self.inits.push(init);
        self.names.len() - 1
    }

    fn xavier(&mut self, name: String, rows: usize, cols: usize) -> usize {
        let bound = libm::sqrt(6.0 / (rows + cols) as f64);
        self.add(name, &[rows, cols], Init::Uniform(bound))
    }

    fn norm(&mut self, prefix: &str, d: usize) -> Norm {
        Norm {
            gain: self.add(format!("{prefix}.gain"), &[d], Init::Const(1.0)),
            bias: self.add(format!("{prefix}.bias"), &[d], Init::Const(0.0)),
        }
    }

    fn ff(&mut self, prefix: &str, d: usize, d_ff: usize) -> FeedForward {
        FeedForward {
            w1: self.xavier(format!("{prefix}.w1"), d, d_ff),
            b1: self.add(format!("{prefix}.b1"), &[d_ff], Init::Const(0.0)),
            w2: self.xavier(format!("{prefix}.w2"), d_ff, d),
            b2: self.add(format!("{prefix}.b2"), &[d], Init::Const(0.0)),
        }
    }

    fn heads(
        &mut self,
        prefix: &str,
        cfg: &ModelConfig,
        specs: &[HeadSpec],
        site: Option<Site>,
        layer: usize,
    ) -> Vec<HeadParams> {
        let (d, d_k) = (cfg.d_model, cfg.d_k());
        (0..cfg.heads)
            .map(|h| {
                let spec =
                    site.and_then(|site| specs.iter().position(|s| s.covers(site, layer, h + 1)));
                let scene_keyed = site == Some(Site::Cross) && spec.is_some();
                let p = format!("{prefix}.h{h}");
                HeadParams {
                    wq: self.xavier(format!("{p}.wq"), d, if scene_keyed { d } else { d_k }),
                    wk: (!scene_keyed).then(|| self.xavier(format!("{p}.wk"), d, d_k)),
                    wv: self.xavier(format!("{p}.wv"), d, d_k),
                    wo: self.xavier(format!("{p}.wo"), d_k, d),
                    spec,
                }
            })
            .collect()
    }
}

fn build_layout(cfg: &ModelConfig, specs: &[HeadSpec]) -> (Layout, Builder) {
    let mut b = Builder {
        names: Vec::new(),
        shapes: Vec::new(),
        inits: Vec::new(),
    };
    let d = cfg.d_model;
    let emb_bound = libm::sqrt(3.0 / d as f64);
    let src_emb = b.add(
        "src_emb".into(),
        &[cfg.src_vocab, d],
        Init::Uniform(emb_bound),
    );
    let trg_emb = b.add(
        "trg_emb".into(),
        &[cfg.trg_vocab, d],
        Init::Uniform(emb_bound),
    );
    let encoder = (1..=cfg.enc_layers)
        .map(|l| {
            let p = format!("enc{l}");
            EncoderLayer {
                norm_attn: b.norm(&format!("{p}.norm_attn"), d),
                attn: b.heads(&format!("{p}.attn"), cfg, specs, Some(Site::EncoderSelf), l),
                norm_ff: b.norm(&format!("{p}.norm_ff"), d),
                ff: b.ff(&format!("{p}.ff"), d, cfg.d_ff),
            }
        })
        .collect();
    let enc_norm = b.norm("enc_norm", d);
    let decoder = (1..=cfg.dec_layers)
        .map(|l| {
            let p = format!("dec{l}");
            DecoderLayer {
                norm_self: b.norm(&format!("{p}.norm_self"), d),
                self_attn: b.heads(&format!("{p}.self"), cfg, specs, None, l),
                norm_cross: b.norm(&format!("{p}.norm_cross"), d),
                cross: b.heads(&format!("{p}.cross"), cfg, specs, Some(Site::Cross), l),
                norm_ff: b.norm(&format!("{p}.norm_ff"), d),
                ff: b.ff(&format!("{p}.ff"), d, cfg.d_ff),
            }
        })
        .collect();
    let dec_norm = b.norm("dec_norm", d);
    // Small output weights keep the initial prediction close to uniform.
    let out_w = b.add(
        "out_w".into(),
        &[d, cfg.trg_vocab],
        Init::Uniform(0.1 / libm::sqrt(d as f64)),
    );
    let out_b = b.add("out_b".into(), &[cfg.trg_vocab], Init::Const(0.0));
    (
        Layout {
            src_emb,
            trg_emb,
            encoder,
            enc_norm,
            decoder,
            dec_norm,
            out_w,
            out_b,
        },
        b,
    )
}

/// Encoder output plus the per-spec mask constants recorded with it.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub states: Var,
    mask_vars: Vec<Var>,
    src_len: usize,
}

/// Pre-norm encoder-decoder transformer with sinusoidal positions.
#[derive(Debug, Clone)]
pub struct Transformer {
    config: ModelConfig,
    head_specs: Vec<HeadSpec>,
    names: Vec<String>,
    params: Vec<Tensor>,
    layout: Layout,
}

fn uniform(rng: &mut ChaCha8Rng, bound: f64) -> f64 {
    let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (2.0 * unit - 1.0) * bound
}

/// Sinusoidal position table, `len x d`.
pub fn positional_encoding(len: usize, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; len * d];
    for pos in 0..len {
        for i in 0..d {
            let exponent = (2 * (i / 2)) as f64 / d as f64;
            let angle = pos as f64 / libm::pow(10_000.0, exponent);
            out[pos * d + i] = if i % 2 == 0 {
                libm::sin(angle)
            } else {
                libm::cos(angle)
            };
        }
    }
    out
}

impl Transformer {
    /// Fresh model with parameters drawn from a ChaCha stream seeded by `seed`.
    pub fn new(config: ModelConfig, head_specs: Vec<HeadSpec>, seed: u64) -> Result<Self> {
        config.validate()?;
        validate_head_specs(&head_specs, &config)?;
        let (layout, b) = build_layout(&config, &head_specs);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = b
            .shapes
            .iter()
            .zip(&b.inits)
            .map(|(shape, init)| {
                let n: usize = shape.iter().product();
                let data = match *init {
                    Init::Uniform(bound) => (0..n).map(|_| uniform(&mut rng, bound)).collect(),
                    Init::Const(c) => vec![c; n],
                };
                Tensor::new(shape, data).expect("builder shapes are consistent")
            })
            .collect();
        Ok(Transformer {
            config,
            head_specs,
            names: b.names,
            params,
            layout,
        })
    }

    /// Rebuilds a model from named tensors (e.g. a checkpoint). Names and
    /// shapes must match the layout implied by `config` and `head_specs`.
    pub fn from_named(
        config: ModelConfig,
        head_specs: Vec<HeadSpec>,
        named: Vec<(String, Tensor)>,
    ) -> Result<Self> {
        config.validate()?;
        validate_head_specs(&head_specs, &config)?;
        let (layout, b) = build_layout(&config, &head_specs);
        if named.len() != b.names.len() {
            return Err(Error::Dimension(format!(
                "expected {} tensors, got {}",
                b.names.len(),
                named.len()
            )));
        }
        let mut params = Vec::with_capacity(named.len());
        for ((name, t), (want_name, want_shape)) in
            named.into_iter().zip(b.names.iter().zip(&b.shapes))
        {
            if &name != want_name || t.shape() != want_shape.as_slice() {
                return Err(Error::Dimension(format!(
                    "tensor `{name}` {:?} where `{want_name}` {want_shape:?} was expected",
                    t.shape()
                )));
            }
            params.push(t);
        }
        Ok(Transformer {
            config,
            head_specs,
            names: b.names,
            params,
            layout,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn head_specs(&self) -> &[HeadSpec] {
        &self.head_specs
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn params(&self) -> &[Tensor] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    pub fn named_params(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.params)
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    /// Records every parameter on `g` as a trainable leaf.
    pub fn bind(&self, g: &mut Graph) -> Vec<Var> {
        self.params.iter().map(|t| g.param(t.clone())).collect()
    }

    /// Like [`bind`](Self::bind) but with gradients disabled.
    pub fn bind_frozen(&self, g: &mut Graph) -> Vec<Var> {
        self.params.iter().map(|t| g.leaf(t.clone())).collect()
    }

    fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len == 0 || len > self.config.max_len {
            return Err(Error::Dimension(format!(
                "{what} length {len} outside 1..={}",
                self.config.max_len
            )));
        }
        Ok(())
    }

    fn embed(&self, g: &mut Graph, table: Var, ids: &[usize]) -> Result<Var> {
        let d = self.config.d_model;
        let e = g.embedding(table, ids)?;
        let e = g.scale(e, libm::sqrt(d as f64));
        let pe = g.constant(&[ids.len(), d], positional_encoding(ids.len(), d))?;
        g.add(e, pe)
    }

    fn norm(&self, g: &mut Graph, vars: &[Var], n: &Norm, x: Var) -> Result<Var> {
        g.layer_norm(x, vars[n.gain], vars[n.bias], LN_EPS)
    }

    fn feed_forward(&self, g: &mut Graph, vars: &[Var], ff: &FeedForward, x: Var) -> Result<Var> {
        let h = g.matmul(x, vars[ff.w1])?;
        let h = g.add_row(h, vars[ff.b1])?;
        let h = g.relu(h);
        let o = g.matmul(h, vars[ff.w2])?;
        g.add_row(o, vars[ff.b2])
    }

    /// Multi-head attention as a sum of per-head output projections.
    #[allow(clippy::too_many_arguments)]
    fn attention(
        &self,
        g: &mut Graph,
        vars: &[Var],
        heads: &[HeadParams],
        queries: Var,
        memory: Var,
        bias: Option<Var>,
        masks: &[Var],
        site: Option<Site>,
    ) -> Result<Var> {
        let d_k = self.config.d_k();
        let mut total: Option<Var> = None;
        for head in heads {
            let q = g.matmul(queries, vars[head.wq])?;
            let v = g.matmul(memory, vars[head.wv])?;
            let (o, _) = match (site, head.spec, head.wk) {
                (Some(Site::Cross), Some(spec), None) => {
                    let keys = aggregate_keys(g, memory, masks[spec])?;
                    attend(g, q, keys, v, d_k, bias, None)?
                }
                (_, spec, Some(wk)) => {
                    let k = g.matmul(memory, vars[wk])?;
                    attend(g, q, k, v, d_k, bias, spec.map(|s| masks[s]))?
                }
                _ => unreachable!("scene-keyed heads only exist at cross-attention"),
            };
            let proj = g.matmul(o, vars[head.wo])?;
            total = Some(match total {
                Some(t) => g.add(t, proj)?,
                None => proj,
            });
        }
        Ok(total.expect("at least one head"))
    }

    /// Runs the encoder. `masks[i]` is the source-length square mask for
    /// `head_specs()[i]`.
    pub fn encode(
        &self,
        g: &mut Graph,
        vars: &[Var],
        src: &[usize],
        masks: &[Mask],
    ) -> Result<Encoded> {
        self.check_len(src.len(), "source")?;
        if masks.len() != self.head_specs.len() {
            return Err(Error::Contract(format!(
                "{} masks for {} head specs",
                masks.len(),
                self.head_specs.len()
            )));
        }
        for (i, m) in masks.iter().enumerate() {
            if m.rows() != src.len() || m.cols() != src.len() {
                return Err(Error::Dimension(format!(
                    "mask for head spec {i} is {}x{}, source has {} subwords",
                    m.rows(),
                    m.cols(),
                    src.len()
                )));
            }
        }
        let mask_vars: Vec<Var> = masks.iter().map(|m| mask_var(g, m)).collect();
        let mut x = self.embed(g, vars[self.layout.src_emb], src)?;
        for layer in &self.layout.encoder {
            let h = self.norm(g, vars, &layer.norm_attn, x)?;
            let a = self.attention(
                g,
                vars,
                &layer.attn,
                h,
                h,
                None,
                &mask_vars,
                Some(Site::EncoderSelf),
            )?;
            x = g.add(x, a)?;
            let h = self.norm(g, vars, &layer.norm_ff, x)?;
            let f = self.feed_forward(g, vars, &layer.ff, h)?;
            x = g.add(x, f)?;
        }
        let states = self.norm(g, vars, &self.layout.enc_norm, x)?;
        Ok(Encoded {
            states,
            mask_vars,
            src_len: src.len(),
        })
    }

    /// Runs the decoder over `trg_in` (which starts with [`BOS`]) and returns
    /// `len(trg_in) x trg_vocab` logits.
    pub fn decode(
        &self,
        g: &mut Graph,
        vars: &[Var],
        enc: &Encoded,
        trg_in: &[usize],
    ) -> Result<Var> {
        self.check_len(trg_in.len(), "target")?;
        let n = trg_in.len();
        let mut causal = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                causal[i * n + j] = CAUSAL_BLOCK;
            }
        }
        let causal = g.constant(&[n, n], causal)?;
        let mut y = self.embed(g, vars[self.layout.trg_emb], trg_in)?;
        for layer in &self.layout.decoder {
            let h = self.norm(g, vars, &layer.norm_self, y)?;
            let a = self.attention(g, vars, &layer.self_attn, h, h, Some(causal), &[], None)?;
            y = g.add(y, a)?;
            let h = self.norm(g, vars, &layer.norm_cross, y)?;
            let c = self.attention(
                g,
                vars,
                &layer.cross,
                h,
                enc.states,
                None,
                &enc.mask_vars,
                Some(Site::Cross),
            )?;
            y = g.add(y, c)?;
            let h = self.norm(g, vars, &layer.norm_ff, y)?;
            let f = self.feed_forward(g, vars, &layer.ff, h)?;
            y = g.add(y, f)?;
        }
        let h = self.norm(g, vars, &self.layout.dec_norm, y)?;
        let logits = g.matmul(h, vars[self.layout.out_w])?;
        g.add_row(logits, vars[self.layout.out_b])
    }

    pub fn forward(
        &self,
        g: &mut Graph,
        vars: &[Var],
        src: &[usize],
        trg_in: &[usize],
        masks: &[Mask],
    ) -> Result<Var> {
        let enc = self.encode(g, vars, src, masks)?;
        self.decode(g, vars, &enc, trg_in)
    }

    /// Logits for teacher-forced `trg_in` without recording gradients.
    pub fn logits(&self, src: &[usize], trg_in: &[usize], masks: &[Mask]) -> Result<Tensor> {
        let mut g = Graph::new();
        let vars = self.bind_frozen(&mut g);
        let out = self.forward(&mut g, &vars, src, trg_in, masks)?;
        Ok(g.tensor(out))
    }

    /// Summed label-smoothed cross-entropy of `trg` (no specials) given
    /// `src`; returns the loss var and the number of predicted tokens.
    pub fn loss(
        &self,
        g: &mut Graph,
        vars: &[Var],
        src: &[usize],
        trg: &[usize],
        masks: &[Mask],
        smoothing: f64,
    ) -> Result<(Var, usize)> {
        let mut trg_in = Vec::with_capacity(trg.len() + 1);
        trg_in.push(BOS);
        trg_in.extend_from_slice(trg);
        let mut trg_out = trg.to_vec();
        trg_out.push(EOS);
        let logits = self.forward(g, vars, src, &trg_in, masks)?;
        Ok((g.cross_entropy(logits, &trg_out, smoothing)?, trg_out.len()))
    }

    fn scorer(&self, src: &[usize], masks: &[Mask]) -> Result<ModelScorer<'_>> {
        let mut g = Graph::new();
        let vars = self.bind_frozen(&mut g);
        let enc = self.encode(&mut g, &vars, src, masks)?;
        let mark = g.len();
        Ok(ModelScorer {
            model: self,
            graph: g,
            vars,
            enc,
            mark,
        })
    }

    /// Beam search; the output excludes [`EOS`].
    pub fn translate(
        &self,
        src: &[usize],
        masks: &[Mask],
        cfg: &DecodeConfig,
    ) -> Result<Hypothesis> {
        let mut scorer = self.scorer(src, masks)?;
        let cfg = DecodeConfig {
            max_len: cfg.max_len.min(self.config.max_len - 1),
            ..cfg.clone()
        };
        beam_search(&mut scorer, &cfg, EOS)
    }

    /// Greedy argmax decoding; the output excludes [`EOS`].
    pub fn greedy(&self, src: &[usize], masks: &[Mask], max_len: usize) -> Result<Hypothesis> {
        let mut scorer = self.scorer(src, masks)?;
        greedy_decode(&mut scorer, max_len.min(self.config.max_len - 1), EOS)
    }
}

struct ModelScorer<'a> {
    model: &'a Transformer,
    graph: Graph,
    vars: Vec<Var>,
    enc: Encoded,
    mark: usize,
}

impl StepScorer for ModelScorer<'_> {
    fn log_probs(&mut self, prefix: &[usize]) -> Result<Vec<f64>> {
        debug_assert!(self.enc.src_len > 0);
        self.graph.truncate(self.mark);
        let mut trg_in = Vec::with_capacity(prefix.len() + 1);
        trg_in.push(BOS);
        trg_in.extend_from_slice(prefix);
        let logits = self
            .model
            .decode(&mut self.graph, &self.vars, &self.enc, &trg_in)?;
        let v = self.model.config.trg_vocab;
        let values = self.graph.value(logits);
        let last = &values[(trg_in.len() - 1) * v..];
        let lse = crate::numcore::log_sum_exp(last);
        Ok(last.iter().map(|x| x - lse).collect())
    }
}
