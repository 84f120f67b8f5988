use scenemt_core::masks::{MaskFamily, MaskSpec};
use scenemt_core::model::{HeadSpec, ModelConfig, Site};
use scenemt_core::{Error, Result};

fn join(xs: &[usize]) -> String {
    xs.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn format_head_spec(h: &HeadSpec) -> String {
    format!(
        "site={} layers={} heads={} family={} C={}",
        h.site.name(),
        join(&h.layers),
        join(&h.heads),
        h.mask.family,
        h.mask.c
    )
}

fn list(v: &str) -> Option<Vec<usize>> {
    v.split(',').map(|x| x.trim().parse().ok()).collect()
}

/// Overrides fields of `base` from `key=value` words. Keys: `site`,
/// `layer`/`layers`, `head`/`heads` (comma lists of 1-based indices),
/// `family`, `C`.
pub fn parse_head_spec(words: &str, base: HeadSpec) -> Result<HeadSpec> {
    let mut h = base;
    for w in words.split_whitespace() {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("head option `{w}` is not key=value")))?;
        let bad = || Error::Config(format!("bad value in head option `{w}`"));
        match k {
            "site" => {
                h.site = match v {
                    "encoder-self" => Site::EncoderSelf,
                    "cross" => Site::Cross,
                    _ => return Err(bad()),
                }
            }
            "layer" | "layers" => h.layers = list(v).ok_or_else(bad)?,
            "head" | "heads" => h.heads = list(v).ok_or_else(bad)?,
            "family" => h.mask.family = v.parse::<MaskFamily>()?,
            "C" | "c" => h.mask.c = v.parse().map_err(|_| bad())?,
            _ => return Err(Error::Config(format!("unknown head option `{k}`"))),
        }
    }
    h.mask.validate()?;
    Ok(h)
}

/// Model shape and head placements as `key=value` lines, one `head=` line
/// per spec.
pub fn format_model_file(cfg: &ModelConfig, specs: &[HeadSpec]) -> String {
    let mut out = format!(
        "d_model={}\nenc_layers={}\ndec_layers={}\nheads={}\nd_ff={}\nsrc_vocab={}\ntrg_vocab={}\nmax_len={}\n",
        cfg.d_model, cfg.enc_layers, cfg.dec_layers, cfg.heads, cfg.d_ff, cfg.src_vocab, cfg.trg_vocab, cfg.max_len
    );
    for h in specs {
        out.push_str(&format!("head={}\n", format_head_spec(h)));
    }
    out
}

pub fn parse_model_file(text: &str) -> Result<(ModelConfig, Vec<HeadSpec>)> {
    let mut cfg = ModelConfig::default();
    let mut seen = [false; 8];
    let mut specs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err("expected key=value".into()))?;
        if k == "head" {
            let base = HeadSpec {
                site: Site::EncoderSelf,
                layers: vec![],
                heads: vec![],
                mask: MaskSpec::binary(),
            };
            specs.push(parse_head_spec(v, base).map_err(|e| err(e.to_string()))?);
            continue;
        }
        let n: usize = v
            .parse()
            .map_err(|_| err(format!("`{v}` is not a count")))?;
        let (slot, field) = match k {
            "d_model" => (0, &mut cfg.d_model),
            "enc_layers" => (1, &mut cfg.enc_layers),
            "dec_layers" => (2, &mut cfg.dec_layers),
            "heads" => (3, &mut cfg.heads),
            "d_ff" => (4, &mut cfg.d_ff),
            "src_vocab" => (5, &mut cfg.src_vocab),
            "trg_vocab" => (6, &mut cfg.trg_vocab),
            "max_len" => (7, &mut cfg.max_len),
            _ => return Err(err(format!("unknown key `{k}`"))),
        };
        *field = n;
        seen[slot] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: "model file is missing a shape field".into(),
        });
    }
    Ok((cfg, specs))
}
