use std::path::{Path, PathBuf};

use scenemt_core::masks::{Alignment, Mask, MaskSource, MaskSpec};
use scenemt_core::model::HeadSpec;
use scenemt_core::semgraph::{
    extract_scenes, parse_conllu, parse_scene_covers, parse_ucca_many, SceneCover, UdGraph,
};
use scenemt_core::Error;

use super::StructureArgs;
use crate::error::{CliError, Result};
use crate::io::read_text;

/// Per-sentence structures loaded from the files named on the command line.
pub struct Structures {
    covers: Option<(PathBuf, Vec<SceneCover>)>,
    trees: Option<(PathBuf, Vec<UdGraph>)>,
    aligns: Option<Vec<Alignment>>,
}

fn check_count(path: &Path, found: usize, sentences: usize) -> Result<()> {
    if found != sentences {
        return Err(CliError::input(
            path,
            Error::Contract(format!("{found} records for {sentences} sentences")),
        ));
    }
    Ok(())
}

fn parse_alignments(path: &Path) -> Result<Vec<Alignment>> {
    read_text(path)?
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let counts = line
                .split_whitespace()
                .map(|c| c.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: "expected subword counts".into(),
                })?;
            Alignment::from_counts(&counts).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::input(path, e))
}

impl Structures {
    /// Loads whatever `args` names and checks there is one record per
    /// sentence. Without `sentences` the files only have to agree with each
    /// other.
    pub fn load(args: &StructureArgs, sentences: Option<usize>) -> Result<Self> {
        let covers = if let Some(p) = &args.ucca {
            let graphs = parse_ucca_many(&read_text(p)?).map_err(|e| CliError::input(p, e))?;
            let covers = graphs
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    extract_scenes(g)
                        .map_err(|e| Error::Structural(format!("graph {}: {e}", i + 1)))
                })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| CliError::input(p, e))?;
            Some((p.clone(), covers))
        } else if let Some(p) = &args.scenes {
            let covers = parse_scene_covers(&read_text(p)?).map_err(|e| CliError::input(p, e))?;
            Some((p.clone(), covers))
        } else {
            None
        };
        let trees = match &args.conllu {
            Some(p) => Some((
                p.clone(),
                parse_conllu(&read_text(p)?).map_err(|e| CliError::input(p, e))?,
            )),
            None => None,
        };
        let aligns = match &args.align {
            Some(p) => Some((p.clone(), parse_alignments(p)?)),
            None => None,
        };
        let counts = [
            covers.as_ref().map(|(p, c)| (p, c.len())),
            trees.as_ref().map(|(p, t)| (p, t.len())),
            aligns.as_ref().map(|(p, a)| (p, a.len())),
        ];
        let mut expected = sentences;
        for (p, n) in counts.into_iter().flatten() {
            match expected {
                Some(e) => check_count(p, n, e)?,
                None => expected = Some(n),
            }
        }
        Ok(Structures {
            covers,
            trees,
            aligns: aligns.map(|(_, a)| a),
        })
    }

    /// Record count of the loaded structure files, if any were given.
    pub fn sentences(&self) -> Option<usize> {
        self.covers
            .as_ref()
            .map(|(_, c)| c.len())
            .or_else(|| self.trees.as_ref().map(|(_, t)| t.len()))
    }

    pub fn covers(&self) -> Option<&[SceneCover]> {
        self.covers.as_ref().map(|(_, c)| c.as_slice())
    }

    /// Fails unless every spec has the structure its family needs.
    pub fn require(&self, specs: &[HeadSpec]) -> Result<()> {
        for h in specs {
            let scene = h.mask.family.is_scene_based();
            if scene && self.covers.is_none() {
                return Err(CliError::Usage(format!(
                    "{} heads need --ucca or --scenes",
                    h.mask.family
                )));
            }
            if !scene && self.trees.is_none() {
                return Err(CliError::Usage(format!(
                    "{} heads need --conllu",
                    h.mask.family
                )));
            }
        }
        Ok(())
    }

    /// The mask of sentence `i` under `spec`.
    pub fn mask(&self, spec: &MaskSpec, i: usize) -> Result<Mask> {
        let (path, source, words) = if spec.family.is_scene_based() {
            let (p, c) = self
                .covers
                .as_ref()
                .ok_or_else(|| CliError::Usage("no scene input".into()))?;
            (p, MaskSource::Scenes(&c[i]), c[i].len())
        } else {
            let (p, t) = self
                .trees
                .as_ref()
                .ok_or_else(|| CliError::Usage("no dependency input".into()))?;
            (p, MaskSource::Tree(&t[i]), t[i].len())
        };
        let align = match &self.aligns {
            Some(a) => a[i].clone(),
            None => Alignment::identity(words),
        };
        spec.build(source, &align).map_err(|e| match e {
            Error::Config(_) => CliError::Core(e),
            e => CliError::input(path, Error::Contract(format!("sentence {}: {e}", i + 1))),
        })
    }

    /// Masks of sentence `i`, one per head spec.
    pub fn masks(&self, specs: &[HeadSpec], i: usize) -> Result<Vec<Mask>> {
        specs.iter().map(|h| self.mask(&h.mask, i)).collect()
    }
}
