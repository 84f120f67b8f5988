use proptest::prelude::*;
use scenemt::io::{
    format_head_spec, format_mask, format_model_file, parse_head_spec, parse_mask, parse_masks,
    parse_model_file, parse_score_file, read_checkpoint, write_checkpoint, Manifest, Vocab,
    CHECKPOINT_MAGIC,
};
use scenemt_core::masks::{Mask, MaskFamily, MaskSpec};
use scenemt_core::model::{HeadSpec, ModelConfig, Site};
use scenemt_core::numcore::Tensor;
use scenemt_core::Error;

fn arb_tensor() -> impl Strategy<Value = Tensor> {
    prop::collection::vec(1usize..4, 1..3).prop_flat_map(|shape| {
        let n: usize = shape.iter().product();
        prop::collection::vec(any::<f64>(), n)
            .prop_map(move |data| Tensor::new(&shape, data).unwrap())
    })
}

proptest! {
    #[test]
    fn checkpoint_round_trip_is_bitwise(tensors in prop::collection::vec(("[a-z.0-9]{1,12}", arb_tensor()), 0..5)) {
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, tensors.iter().map(|(n, t)| (n.as_str(), t))).unwrap();
        prop_assert_eq!(&bytes[..8], CHECKPOINT_MAGIC);
        let back = read_checkpoint(&bytes[..]).unwrap();
        prop_assert_eq!(back.len(), tensors.len());
        for ((n1, t1), (n2, t2)) in back.iter().zip(&tensors) {
            prop_assert_eq!(n1, n2);
            prop_assert_eq!(t1.shape(), t2.shape());
            let same = t1.data().iter().zip(t2.data()).all(|(a, b)| a.to_bits() == b.to_bits());
            prop_assert!(same);
        }
        if !bytes.is_empty() {
            prop_assert!(read_checkpoint(&bytes[..bytes.len() - 1]).is_err());
        }
        let mut extra = bytes.clone();
        extra.push(0);
        prop_assert!(read_checkpoint(&extra[..]).is_err());
    }

    #[test]
    fn mask_file_round_trip(rows in 1usize..6, cols in 1usize..6, seed in prop::collection::vec(0.0f64..=1.0, 36)) {
        let mask = Mask::new(rows, cols, seed[..rows * cols].to_vec()).unwrap();
        let text = format_mask(&mask, "normal");
        let (back, family) = parse_mask(&text).unwrap();
        prop_assert_eq!(family, "normal");
        prop_assert_eq!((back.rows(), back.cols()), (rows, cols));
        for (a, b) in back.values().iter().zip(mask.values()) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
        let two = format!("{text}{}", format_mask(&Mask::ones(2), "binary"));
        prop_assert_eq!(parse_masks(&two).unwrap().len(), 2);
    }

    #[test]
    fn manifest_round_trip(values in prop::collection::vec("[ -~\n\r\\\\]{0,20}", 0..6)) {
        let mut m = Manifest::new();
        for (i, v) in values.iter().enumerate() {
            m.push(&format!("argv.{i}"), v);
        }
        let back = Manifest::parse(&m.to_text()).unwrap();
        prop_assert_eq!(back.argv(), values);
    }

    #[test]
    fn vocab_round_trip(lines in prop::collection::vec("[a-d]{1,3}( [a-d]{1,3}){0,4}", 1..6)) {
        let v = Vocab::build(lines.iter().map(String::as_str));
        let back = Vocab::parse(&v.to_text()).unwrap();
        prop_assert_eq!(&back, &v);
        for (i, l) in lines.iter().enumerate() {
            let ids = v.encode(l, i + 1).unwrap();
            prop_assert!(ids.iter().all(|&id| id >= 2));
            prop_assert_eq!(v.decode(&ids), l.split_whitespace().collect::<Vec<_>>().join(" "));
        }
    }
}

#[test]
fn bad_inputs_name_the_line() {
    assert!(matches!(
        parse_mask("M 2 2 binary\n1 0\n0\n"),
        Err(Error::Parse { line: 3, .. })
    ));
    assert!(read_checkpoint(&b"NOTACKPT"[..]).is_err());
    let v = Vocab::build(["a b"]);
    assert!(matches!(
        v.encode("a z", 7),
        Err(Error::Parse { line: 7, .. })
    ));
    assert!(matches!(
        parse_score_file("0.5\nfoo\n"),
        Err(Error::Parse { line: 2, .. })
    ));
}

#[test]
fn score_files_in_three_shapes() {
    let lines = parse_score_file("metric=bleu score=12.5 n=3\n1\t0.25\n0.75\n").unwrap();
    let got: Vec<(&str, f64)> = lines.iter().map(|l| (l.metric.as_str(), l.score)).collect();
    assert_eq!(got, [("bleu", 12.5), ("score", 0.25), ("score", 0.75)]);
}

#[test]
fn model_file_and_head_specs_round_trip() {
    let cfg = ModelConfig {
        d_model: 32,
        enc_layers: 4,
        dec_layers: 4,
        heads: 4,
        d_ff: 64,
        src_vocab: 14,
        trg_vocab: 14,
        max_len: 16,
    };
    let normal = HeadSpec {
        site: Site::EncoderSelf,
        layers: vec![1, 3],
        heads: vec![2],
        mask: MaskSpec::new(MaskFamily::NormalScene, 0.5).unwrap(),
    };
    let specs = vec![HeadSpec::sasa(), HeadSpec::sacra(), normal.clone()];
    let (c2, s2) = parse_model_file(&format_model_file(&cfg, &specs)).unwrap();
    assert_eq!(c2, cfg);
    assert_eq!(s2, specs);
    assert_eq!(
        parse_head_spec(&format_head_spec(&normal), HeadSpec::sasa()).unwrap(),
        normal
    );

    let tuned =
        parse_head_spec("layers=2 heads=1,3 family=scaled C=0.25", HeadSpec::sasa()).unwrap();
    assert_eq!(
        (tuned.layers.as_slice(), tuned.heads.as_slice()),
        ([2].as_slice(), [1, 3].as_slice())
    );
    assert_eq!(tuned.mask, MaskSpec::new(MaskFamily::Scaled, 0.25).unwrap());
    assert!(matches!(
        parse_head_spec("family=scaled C=1.5", HeadSpec::sasa()),
        Err(Error::Config(_))
    ));
}
