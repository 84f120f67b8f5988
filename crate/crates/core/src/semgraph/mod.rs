//! Semantic (UCCA) and syntactic (UD) structure ingestion.
//!
//! A UCCA graph is reduced to a [`SceneCover`]: the set of scenes, each a
//! token set with one main relation (a Process or a State). Everything the
//! mask builders need downstream is derived from the cover or from a
//! [`UdGraph`].

mod distance;
mod scenes;
mod split;
mod ucca;
mod ud;

pub use distance::{scene_distance, DistMatrix, SceneGraph};
pub use scenes::{
    extract_scenes, parse_scene_cover, parse_scene_covers, MainRelation, RelationKind, Scene,
    SceneCover,
};
pub use split::sem_split;
pub use ucca::{parse_ucca, parse_ucca_many, Edge, Terminal, UccaGraph};
pub use ud::{parse_conllu, serialize_conllu, UdGraph};

use alloc::vec::Vec;

/// Splits `text` into blocks that each start at a `#L` header line. Lines
/// before the first header must be blank or comments. Line numbers are
/// 1-based and refer to the whole input.
pub(crate) fn header_blocks(text: &str) -> crate::Result<Vec<Vec<(usize, &str)>>> {
    let mut blocks: Vec<Vec<(usize, &str)>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.starts_with("#L") {
            blocks.push(Vec::new());
        }
        match blocks.last_mut() {
            Some(block) => block.push((line_no, line)),
            None if line.is_empty() || line.starts_with('#') => {}
            None => {
                return Err(crate::error::parse_err(
                    line_no,
                    "expected `#L <int>` header",
                ))
            }
        }
    }
    Ok(blocks)
}

pub(crate) fn parse_len_header(line_no: usize, line: &str) -> crate::Result<usize> {
    let rest = line
        .strip_prefix("#L")
        .ok_or_else(|| crate::error::parse_err(line_no, "expected `#L <int>` header"))?;
    rest.trim().parse::<usize>().map_err(|_| {
        crate::error::parse_err(line_no, "sentence length is not a non-negative integer")
    })
}
