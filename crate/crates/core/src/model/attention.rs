use alloc::format;

use crate::error::{Error, Result};
use crate::masks::Mask;
use crate::numcore::{Graph, Tensor, Var};

/// Output of one attention head together with the weights that produced it
/// (after masking, for SASA).
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput {
    pub output: Tensor,
    pub weights: Tensor,
}

pub(crate) fn mask_var(g: &mut Graph, mask: &Mask) -> Var {
    g.constant(&[mask.rows(), mask.cols()], mask.values().to_vec())
        .expect("mask shape matches its values")
}

/// `softmax(Q K^T / sqrt(d_k) + bias)`, optionally multiplied by `post_mask`,
/// then applied to `V`. Returns `(output, weights)`.
pub(crate) fn attend(
    g: &mut Graph,
    q: Var,
    k: Var,
    v: Var,
    d_k: usize,
    bias: Option<Var>,
    post_mask: Option<Var>,
) -> Result<(Var, Var)> {
    let logits = g.matmul_t(q, k)?;
    let mut logits = g.scale(logits, 1.0 / libm::sqrt(d_k as f64));
    if let Some(b) = bias {
        logits = g.add(logits, b)?;
    }
    let mut weights = g.softmax_rows(logits)?;
    if let Some(m) = post_mask {
        weights = g.mul(weights, m)?;
    }
    let out = g.matmul(weights, v)?;
    Ok((out, weights))
}

/// Scene-aggregated keys `M * X_enc / L_src`: one `d_model`-wide key per
/// source token, identical for tokens with identical mask rows.
pub(crate) fn aggregate_keys(g: &mut Graph, x_enc: Var, mask: Var) -> Result<Var> {
    let l_src = g.dims(x_enc)?.0;
    let summed = g.matmul(mask, x_enc)?;
    Ok(g.scale(summed, 1.0 / l_src as f64))
}

fn check_square(mask: &Mask, n: usize, what: &str) -> Result<()> {
    if mask.rows() != n || mask.cols() != n {
        return Err(Error::Dimension(format!(
            "{what}: {}x{} mask for length {n}",
            mask.rows(),
            mask.cols()
        )));
    }
    Ok(())
}

fn run_head(q: &Tensor, k: &Tensor, v: &Tensor, mask: Option<&Mask>) -> Result<AttentionOutput> {
    let (lq, dk) = q.dims2()?;
    let (lk, dk2) = k.dims2()?;
    let (lv, _) = v.dims2()?;
    if dk != dk2 || lk != lv {
        return Err(Error::Dimension(format!(
            "Q {lq}x{dk}, K {lk}x{dk2}, V with {lv} rows"
        )));
    }
    let mut g = Graph::new();
    let (qv, kv, vv) = (g.leaf(q.clone()), g.leaf(k.clone()), g.leaf(v.clone()));
    let m = match mask {
        Some(mask) => {
            check_square(mask, lq, "self-attention")?;
            if lq != lk {
                return Err(Error::Dimension(
                    "masked self-attention needs as many keys as queries".into(),
                ));
            }
            Some(mask_var(&mut g, mask))
        }
        None => None,
    };
    let (out, w) = attend(&mut g, qv, kv, vv, dk, None, m)?;
    Ok(AttentionOutput {
        output: g.tensor(out),
        weights: g.tensor(w),
    })
}

/// Vanilla scaled dot-product attention.
pub fn scaled_dot_attention(q: &Tensor, k: &Tensor, v: &Tensor) -> Result<AttentionOutput> {
    run_head(q, k, v, None)
}

/// Scene-aware self-attention: `(softmax(Q K^T / sqrt(d_k)) * M) V`, the
/// product taken elementwise and not renormalized.
pub fn sasa_attention(q: &Tensor, k: &Tensor, v: &Tensor, mask: &Mask) -> Result<AttentionOutput> {
    run_head(q, k, v, Some(mask))
}

/// The SACrA key matrix `M * X_enc / L_src`.
pub fn sacra_keys(x_enc: &Tensor, mask: &Mask) -> Result<Tensor> {
    let (l_src, _) = x_enc.dims2()?;
    check_square(mask, l_src, "cross-attention")?;
    let mut g = Graph::new();
    let x = g.leaf(x_enc.clone());
    let m = mask_var(&mut g, mask);
    let k = aggregate_keys(&mut g, x, m)?;
    Ok(g.tensor(k))
}

/// Scene-aware cross-attention. `q_dec` is `L_trg x d_model` (the SACrA query
/// projection maps to `d_model`), `x_enc` is `L_src x d_model`, `v` is
/// `L_src x d_k`; logits are scaled by `1/sqrt(d_k)`.
pub fn sacra_attention(
    q_dec: &Tensor,
    x_enc: &Tensor,
    v: &Tensor,
    mask: &Mask,
) -> Result<AttentionOutput> {
    let (_, dq) = q_dec.dims2()?;
    let (l_src, d_model) = x_enc.dims2()?;
    let (lv, d_k) = v.dims2()?;
    if dq != d_model || lv != l_src {
        return Err(Error::Dimension(format!(
            "queries of width {dq}, encoder states {l_src}x{d_model}, values with {lv} rows"
        )));
    }
    check_square(mask, l_src, "cross-attention")?;
    let mut g = Graph::new();
    let (qv, xv, vv) = (
        g.leaf(q_dec.clone()),
        g.leaf(x_enc.clone()),
        g.leaf(v.clone()),
    );
    let m = mask_var(&mut g, mask);
    let keys = aggregate_keys(&mut g, xv, m)?;
    let (out, w) = attend(&mut g, qv, keys, vv, d_k, None, None)?;
    Ok(AttentionOutput {
        output: g.tensor(out),
        weights: g.tensor(w),
    })
}
