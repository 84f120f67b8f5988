use alloc::format;
use alloc::vec::Vec;

use super::{Graph, Tensor, Var};
use crate::error::{Error, Result};

/// Compares the tape gradient of scalar `f` at `x` with central differences
/// of step `h`. Returns the largest `|numeric - analytic| / max(1, |analytic|)`
/// over all coordinates.
pub fn grad_check<F>(f: F, x: &Tensor, h: f64) -> Result<f64>
where
    F: Fn(&mut Graph, Var) -> Result<Var>,
{
    grad_check_many(|g, vars| f(g, vars[0]), core::slice::from_ref(x), h)
}

/// [`grad_check`] over several input tensors at once.
pub fn grad_check_many<F>(f: F, inputs: &[Tensor], h: f64) -> Result<f64>
where
    F: Fn(&mut Graph, &[Var]) -> Result<Var>,
{
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Contract(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let eval = |values: &[Tensor], track: bool| -> Result<(Graph, Vec<Var>, Var)> {
        let mut g = Graph::new();
        let vars: Vec<Var> = values
            .iter()
            .map(|t| {
                if track {
                    g.param(t.clone())
                } else {
                    g.leaf(t.clone())
                }
            })
            .collect();
        let out = f(&mut g, &vars)?;
        if g.value(out).len() != 1 {
            return Err(Error::Contract(format!(
                "function under check must return a scalar, got shape {:?}",
                g.shape(out)
            )));
        }
        Ok((g, vars, out))
    };

    let (g, vars, out) = eval(inputs, true)?;
    let grads = g.backward(out)?;
    let analytic: Vec<Vec<f64>> = vars
        .iter()
        .zip(inputs)
        .map(|(&v, t)| grads.get_or_zeros(v, t.len()))
        .collect();
    drop(g);

    let mut worst: f64 = 0.0;
    let mut probe: Vec<Tensor> = inputs.to_vec();
    for (ti, t) in inputs.iter().enumerate() {
        for (k, &orig) in t.data().iter().enumerate() {
            probe[ti].data_mut()[k] = orig + h;
            let (gp, _, op) = eval(&probe, false)?;
            let plus = gp.value(op)[0];
            probe[ti].data_mut()[k] = orig - h;
            let (gm, _, om) = eval(&probe, false)?;
            let minus = gm.value(om)[0];
            probe[ti].data_mut()[k] = orig;

            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic[ti][k];
            let err = (numeric - a).abs() / a.abs().max(1.0);
            if !err.is_finite() {
                return Err(Error::Contract(format!(
                    "non-finite gradient at input {ti}, coordinate {k}"
                )));
            }
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
