use alloc::format;
use alloc::vec::Vec;

use super::{expand_to_subwords, f_norm, Alignment, Mask};
use crate::error::{Error, Result};
use crate::semgraph::UdGraph;

fn check_words(ud: &UdGraph, align: &Alignment) -> Result<()> {
    if align.word_count() != ud.len() {
        return Err(Error::Dimension(format!(
            "alignment covers {} words, dependency tree has {}",
            align.word_count(),
            ud.len()
        )));
    }
    Ok(())
}

/// Parent-centred Gaussian at subword resolution: row `t` peaks at the
/// midpoint of the subword span of the parent of `t`'s word (its own span
/// for the root), `M[t, j] = f_norm(j - p_t, 1)`.
pub fn pascal_mask(ud: &UdGraph, align: &Alignment) -> Result<Mask> {
    check_words(ud, align)?;
    let n = align.subword_count();
    let words = align.word_of_subwords();
    let centres: Vec<f64> = words
        .iter()
        .map(|&w| {
            let parent = ud.heads()[w].unwrap_or(w);
            let (start, end) = align.range(parent);
            (start + end) as f64 / 2.0
        })
        .collect();
    Ok(Mask::from_fn(n, n, |t, j| {
        f_norm(j as f64 - centres[t], 1.0)
    }))
}

/// Gaussian over undirected dependency distance between words,
/// `f_norm(dist(i, j), 1)`, expanded to subwords.
pub fn udiscal_mask(ud: &UdGraph, align: &Alignment) -> Result<Mask> {
    check_words(ud, align)?;
    let dist = ud.distances();
    let n = ud.len();
    let word_mask = Mask::from_fn(n, n, |i, j| {
        let d = dist.get(i, j).expect("trees are connected");
        f_norm(d as f64, 1.0)
    });
    expand_to_subwords(&word_mask, align)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_word() {
        let ud = UdGraph::from_heads(vec![None]).unwrap();
        let m = pascal_mask(&ud, &Alignment::identity(1)).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 1));
        assert!((m.get(0, 0) - 0.398942).abs() < 1e-6);
    }

    #[test]
    fn parent_on_one_subword() {
        // word 3 is the root and parent of everything else
        let ud = UdGraph::from_heads(vec![Some(3), Some(3), Some(3), None, Some(3)]).unwrap();
        let m = pascal_mask(&ud, &Alignment::identity(5)).unwrap();
        assert!((m.get(0, 3) - 0.398942).abs() < 1e-6);
        assert!((m.get(0, 4) - 0.241971).abs() < 1e-6);
        // rows of the root peak at itself as well
        assert!((m.get(3, 3) - 0.398942).abs() < 1e-6);
    }

    #[test]
    fn parent_spanning_two_subwords() {
        // words: w0 -> sub 0, w1 -> sub 1, w2 -> subs 2..3; w2 is root
        let ud = UdGraph::from_heads(vec![Some(2), Some(2), None]).unwrap();
        let align = Alignment::new(vec![(0, 0), (1, 1), (2, 3)]).unwrap();
        let m = pascal_mask(&ud, &align).unwrap();
        assert_eq!(m.rows(), 4);
        for t in 0..4 {
            assert!((m.get(t, 2) - 0.352065).abs() < 1e-6);
            assert!((m.get(t, 3) - 0.352065).abs() < 1e-6);
        }
        assert!(!m.is_symmetric());
    }

    #[test]
    fn udiscal_values_and_dimension_check() {
        let ud = UdGraph::from_heads(vec![None, Some(0), Some(1)]).unwrap();
        let m = udiscal_mask(&ud, &Alignment::identity(3)).unwrap();
        assert!((m.get(1, 1) - 0.398942).abs() < 1e-6);
        assert!((m.get(0, 1) - 0.241971).abs() < 1e-6);
        assert!((m.get(0, 2) - f_norm(2.0, 1.0)).abs() < 1e-15);
        assert!(m.is_symmetric());
        assert!(matches!(
            udiscal_mask(&ud, &Alignment::identity(4)),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            pascal_mask(&ud, &Alignment::identity(2)),
            Err(Error::Dimension(_))
        ));
    }
}
