use alloc::format;

use crate::error::{Error, Result};

fn binomial_tail(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if n <= 1000 {
        // C(n, i) and 2^-n both stay within f64 range up to n = 1000
        let half_n = libm::pow(0.5, n as f64);
        let mut c = 1.0f64;
        let mut tail = 0.0;
        for i in 0..=n {
            if i > 0 {
                c = c * (n - i + 1) as f64 / i as f64;
            }
            if i >= k {
                tail += c * half_n;
            }
        }
        tail.min(1.0)
    } else {
        let ln_n = libm::lgamma(n as f64 + 1.0);
        let ln2 = core::f64::consts::LN_2;
        (k..=n)
            .map(|i| {
                libm::exp(
                    ln_n - libm::lgamma(i as f64 + 1.0)
                        - libm::lgamma((n - i) as f64 + 1.0)
                        - n as f64 * ln2,
                )
            })
            .sum::<f64>()
            .min(1.0)
    }
}

/// One-sided exact sign test of "B improves on A". Ties are discarded; with
/// `n` remaining pairs and `k` wins for B, returns `P[X >= k]` for
/// `X ~ Binomial(n, 1/2)`.
pub fn sign_test(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Contract(format!(
            "{} scores paired with {}",
            a.len(),
            b.len()
        )));
    }
    let mut n = 0;
    let mut k = 0;
    for (x, y) in a.iter().zip(b) {
        if y > x {
            k += 1;
            n += 1;
        } else if y < x {
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::Undefined("every pair is tied".into()));
    }
    Ok(binomial_tail(n, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn exact_values() {
        let a = [1.0; 5];
        let b = [2.0; 5];
        assert_eq!(sign_test(&a, &b).unwrap(), 1.0 / 32.0);
        let a: Vec<f64> = (0..10).map(|_| 10.0).collect();
        let b: Vec<f64> = (0..10).map(|i| if i < 8 { 11.0 } else { 9.0 }).collect();
        assert!((sign_test(&a, &b).unwrap() - 56.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn ties_are_dropped() {
        assert!(matches!(
            sign_test(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::Undefined(_))
        ));
        assert_eq!(sign_test(&[1.0, 1.0], &[1.0, 2.0]).unwrap(), 0.5);
        assert!(sign_test(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn large_n_uses_log_space() {
        let p = binomial_tail(2000, 1000);
        assert!(p > 0.5 && p < 0.52, "{p}");
        assert!((binomial_tail(1000, 500) - binomial_tail(1000, 500)).abs() == 0.0);
    }
}
