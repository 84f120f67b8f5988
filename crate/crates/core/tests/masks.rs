mod common;

use common::{below, random_cover, random_tree, rng, unit};
use proptest::prelude::*;
use scenemt_core::masks::{
    binary_scene_mask, expand_to_subwords, f_norm, normal_scene_mask, pascal_mask,
    scaled_scene_mask, udiscal_mask, Alignment, Mask, MaskFamily, MaskSource, MaskSpec,
    UNIT_PEAK_SIGMA,
};
use scenemt_core::semgraph::{extract_scenes, parse_scene_cover, parse_ucca, SceneCover, UdGraph};
use scenemt_core::Error;

fn gauss(x: f64) -> f64 {
    (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Scene-graph hop distance between tokens by brute force over scene
/// sequences (Bellman-Ford style relaxation on scenes).
fn token_dist(cover: &SceneCover, i: usize, j: usize) -> Option<u32> {
    let scenes: Vec<&Vec<usize>> = cover.scenes().iter().map(|s| &s.tokens).collect();
    let k = scenes.len();
    let mut d: Vec<Option<u32>> = (0..k)
        .map(|s| scenes[s].contains(&i).then_some(0))
        .collect();
    for _ in 0..k {
        for a in 0..k {
            for b in 0..k {
                if let Some(da) = d[a] {
                    if scenes[a].iter().any(|t| scenes[b].contains(t))
                        && d[b].is_none_or(|db| da + 1 < db)
                    {
                        d[b] = Some(da + 1);
                    }
                }
            }
        }
    }
    (0..k)
        .filter(|&s| scenes[s].contains(&j))
        .filter_map(|s| d[s])
        .min()
}

fn oracle_scene_mask(cover: &SceneCover, family: MaskFamily, c: f64) -> Vec<f64> {
    let n = cover.len();
    let assigned = |t: usize| cover.scenes().iter().any(|s| s.tokens.contains(&t));
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if !assigned(i) || !assigned(j) {
                out.push(1.0);
                continue;
            }
            let shared = cover
                .scenes()
                .iter()
                .any(|s| s.tokens.contains(&i) && s.tokens.contains(&j));
            out.push(match family {
                MaskFamily::Binary => f64::from(u8::from(shared)),
                MaskFamily::Scaled => {
                    if shared {
                        1.0
                    } else {
                        c
                    }
                }
                MaskFamily::NormalScene => match token_dist(cover, i, j) {
                    Some(d) => (-std::f64::consts::PI * (c * d as f64).powi(2)).exp(),
                    None => 0.0,
                },
                _ => unreachable!(),
            });
        }
    }
    out
}

fn random_counts(r: &mut rand_chacha::ChaCha8Rng, words: usize) -> Vec<usize> {
    (0..words).map(|_| 1 + below(r, 3)).collect()
}

fn owner(counts: &[usize], sub: usize) -> usize {
    let mut acc = 0;
    for (w, &c) in counts.iter().enumerate() {
        acc += c;
        if sub < acc {
            return w;
        }
    }
    unreachable!()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn f_norm_reference_values() {
    assert!((f_norm(0.0, UNIT_PEAK_SIGMA) - 1.0).abs() < 1e-12);
    assert!((f_norm(0.0, 1.0) - 0.398942).abs() < 1e-6);
    let cover = parse_scene_cover(
        "#L 4\nS P main=0 tokens=0,1\nS P main=2 tokens=1,2\nS S main=3 tokens=3\n",
    )
    .unwrap();
    let m = normal_scene_mask(&cover, 0.5).unwrap();
    assert!((m.get(0, 2) - 0.455938).abs() < 1e-6);
    assert_eq!(m.get(0, 3), 0.0);
    assert_eq!(m.get(1, 1), 1.0);
}

#[test]
fn relative_clause_binary_mask() {
    let cover = extract_scenes(&parse_ucca(include_str!("fixtures/barked.ug")).unwrap()).unwrap();
    let m = binary_scene_mask(&cover);
    let (saw, dog, barked, that) = (1, 3, 5, 4);
    assert_eq!(m.get(saw, dog), 1.0);
    assert_eq!(m.get(dog, barked), 1.0);
    assert_eq!(m.get(saw, barked), 0.0);
    assert!(m.row(that).iter().all(|&v| v == 1.0));
}

#[test]
fn scene_families_match_oracle() {
    let mut r = rng(21);
    for _ in 0..200 {
        let n = 1 + below(&mut r, 10);
        let cover = random_cover(&mut r, n, 4);
        let c = 0.05 + 0.9 * (unit(&mut r) + 1.0) / 2.0;
        assert_eq!(
            binary_scene_mask(&cover).values(),
            oracle_scene_mask(&cover, MaskFamily::Binary, c)
        );
        assert_eq!(
            scaled_scene_mask(&cover, c).unwrap().values(),
            oracle_scene_mask(&cover, MaskFamily::Scaled, c)
        );
        let normal = normal_scene_mask(&cover, c).unwrap();
        assert!(close(
            normal.values(),
            &oracle_scene_mask(&cover, MaskFamily::NormalScene, c),
            1e-12
        ));
    }
}

#[test]
fn dependency_families_match_oracle() {
    let mut r = rng(22);
    for _ in 0..200 {
        let words = 1 + below(&mut r, 8);
        let heads = random_tree(&mut r, words);
        let counts = random_counts(&mut r, words);
        let subs: usize = counts.iter().sum();
        let ud = UdGraph::from_heads(heads.clone()).unwrap();
        let align = Alignment::from_counts(&counts).unwrap();

        let start = |w: usize| counts[..w].iter().sum::<usize>();
        let mut pascal = Vec::new();
        for t in 0..subs {
            let p = heads[owner(&counts, t)].unwrap_or(owner(&counts, t));
            let centre = start(p) as f64 + (counts[p] - 1) as f64 / 2.0;
            pascal.extend((0..subs).map(|j| gauss(j as f64 - centre)));
        }
        assert!(close(
            pascal_mask(&ud, &align).unwrap().values(),
            &pascal,
            1e-12
        ));

        let edges: Vec<(usize, usize)> = heads
            .iter()
            .enumerate()
            .filter_map(|(c, h)| h.map(|h| (c, h)))
            .collect();
        let mut d = vec![vec![u32::MAX / 4; words]; words];
        for (w, row) in d.iter_mut().enumerate() {
            row[w] = 0;
        }
        for &(a, b) in &edges {
            d[a][b] = 1;
            d[b][a] = 1;
        }
        for k in 0..words {
            for i in 0..words {
                for j in 0..words {
                    d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                }
            }
        }
        let udiscal: Vec<f64> = (0..subs * subs)
            .map(|x| {
                gauss(f64::from(
                    d[owner(&counts, x / subs)][owner(&counts, x % subs)],
                ))
            })
            .collect();
        let got = udiscal_mask(&ud, &align).unwrap();
        assert!(close(got.values(), &udiscal, 1e-12));
        assert!((got.get(0, 0) - 0.398942).abs() < 1e-6);
    }
}

#[test]
fn expansion_matches_oracle() {
    let mut r = rng(23);
    for _ in 0..100 {
        let words = 1 + below(&mut r, 6);
        let values: Vec<f64> = (0..words * words)
            .map(|_| (unit(&mut r) + 1.0) / 2.0)
            .collect();
        let m = Mask::new(words, words, values).unwrap();
        let counts = random_counts(&mut r, words);
        let e = expand_to_subwords(&m, &Alignment::from_counts(&counts).unwrap()).unwrap();
        let n: usize = counts.iter().sum();
        for a in 0..n {
            for b in 0..n {
                assert_eq!(e.get(a, b), m.get(owner(&counts, a), owner(&counts, b)));
            }
        }
    }
}

#[test]
fn spec_validation_and_dispatch() {
    assert!(matches!(
        MaskSpec::new(MaskFamily::Scaled, 1.5),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        MaskSpec::new(MaskFamily::Scaled, 0.0),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        MaskSpec::new(MaskFamily::NormalScene, -1.0),
        Err(Error::Config(_))
    ));
    assert!(MaskSpec::new(MaskFamily::NormalScene, 0.5f64.sqrt()).is_ok());
    let cover = parse_scene_cover("#L 2\nS P main=0 tokens=0,1\n").unwrap();
    let ud = UdGraph::from_heads(vec![None, Some(0)]).unwrap();
    let id = Alignment::identity(2);
    let pascal = MaskSpec::new(MaskFamily::Pascal, 0.0).unwrap();
    assert!(matches!(
        pascal.build(MaskSource::Scenes(&cover), &id),
        Err(Error::Contract(_))
    ));
    assert!(matches!(
        MaskSpec::binary().build(MaskSource::Tree(&ud), &id),
        Err(Error::Contract(_))
    ));
    assert!(matches!(
        pascal.build(MaskSource::Tree(&ud), &Alignment::identity(3)),
        Err(Error::Dimension(_))
    ));
    for f in ["binary", "scaled", "normal", "pascal", "udiscal"] {
        assert_eq!(f.parse::<MaskFamily>().unwrap().name(), f);
    }
}

fn arb_cover() -> impl Strategy<Value = SceneCover> {
    (1usize..10, 0usize..5, any::<u64>())
        .prop_map(|(n, k, seed)| random_cover(&mut rng(seed), n, k))
}

proptest! {
    #[test]
    fn scene_masks_are_symmetric_with_expected_values(cover in arb_cover(), c in 0.01f64..0.99) {
        let b = binary_scene_mask(&cover);
        let s = scaled_scene_mask(&cover, c).unwrap();
        let g = normal_scene_mask(&cover, c).unwrap();
        for m in [&b, &s, &g] {
            prop_assert!(m.is_square() && m.is_symmetric());
            prop_assert!((0..m.rows()).all(|i| m.get(i, i) == 1.0));
        }
        prop_assert!(b.values().iter().all(|&v| v == 0.0 || v == 1.0));
        prop_assert!(s.values().iter().all(|&v| v == c || v == 1.0));
        prop_assert!(g.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        // the normal mask is 1 exactly where the binary mask is
        for (x, y) in b.values().iter().zip(g.values()) {
            prop_assert_eq!(*x == 1.0, *y == 1.0);
        }
    }

    #[test]
    fn udiscal_symmetric_pascal_rows_peak_on_parent(seed in any::<u64>(), words in 1usize..8) {
        let mut r = rng(seed);
        let heads = random_tree(&mut r, words);
        let ud = UdGraph::from_heads(heads.clone()).unwrap();
        let align = Alignment::identity(words);
        prop_assert!(udiscal_mask(&ud, &align).unwrap().is_symmetric());
        let p = pascal_mask(&ud, &align).unwrap();
        for (t, h) in heads.iter().enumerate() {
            let centre = h.unwrap_or(t);
            let row = p.row(t);
            let best = row.iter().cloned().fold(f64::MIN, f64::max);
            prop_assert_eq!(row[centre], best);
        }
    }
}
