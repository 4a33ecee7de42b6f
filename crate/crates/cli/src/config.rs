use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64 as C64;
use serde::Serialize;

use invfield::bases::{random_selfconj_basis, torus_adapted_selfconj_basis, SelfConjBasis, SpaceTag};
use invfield::{GroupElement, RngStream, SO4Element, SU2Element};

use crate::args::{BasisKind, CommonArgs, Format, Space};

/// Stream ids derived from the run seed.
pub const BASIS_STREAM: u64 = 1;
pub const SAMPLE_STREAM: u64 = 2;
pub const GROUP_STREAM: u64 = 3;
pub const MIXING_STREAM: u64 = 4;

/// Fully resolved settings, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub space: Space,
    pub ell: usize,
    pub basis: BasisKind,
    pub seed: u64,
    pub samples: usize,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub extra: serde_json::Value,
}

impl RunConfig {
    pub fn new(command: &str, common: &CommonArgs, samples: usize, format: Format) -> Self {
        Self {
            command: command.to_string(),
            space: common.space,
            ell: common.ell,
            basis: common.basis,
            seed: common.seed,
            samples,
            tol: None,
            out: common.out.clone(),
            format,
            extra: serde_json::Value::Object(Default::default()),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        if let serde_json::Value::Object(map) = &mut self.extra {
            map.insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        }
    }
}

pub fn space_tag(space: Space, ell: usize) -> Result<SpaceTag> {
    match space {
        Space::S2 => Ok(SpaceTag::S2 { ell }),
        Space::S3 => Ok(SpaceTag::S3 { ell }),
        Space::Su2 => bail!(
            "space su2 has no self-conjugated module here; it is used by the bijoux sampler \
             (--dist bijoux, demo-nonorthogonal)"
        ),
    }
}

pub fn build_basis(common: &CommonArgs) -> Result<SelfConjBasis> {
    let tag = space_tag(common.space, common.ell)?;
    let torus = torus_adapted_selfconj_basis(tag)
        .with_context(|| format!("invalid space/ell combination: {:?} ell={}", common.space, common.ell))?;
    let mut rng = RngStream::new(common.seed, BASIS_STREAM);
    Ok(match common.basis {
        BasisKind::Torus => torus,
        BasisKind::Random => random_selfconj_basis(&torus, &mut rng)?,
        BasisKind::Translated => {
            let g0 = tag.haar(&mut rng);
            torus.translated(&g0)?
        }
    })
}

/// Parses "α,β,γ" (SU(2)) or "α1,β1,γ1,α2,β2,γ2" (SO(4)) Euler angles.
pub fn parse_group_element(text: &str, tag: SpaceTag) -> Result<GroupElement> {
    let angles: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad angle {t:?}: {e}")))
        .collect::<Result<_>>()?;
    match (tag, angles.as_slice()) {
        (SpaceTag::S2 { .. }, [a, b, c]) => Ok(GroupElement::Su2(SU2Element::from_euler(*a, *b, *c))),
        (SpaceTag::S3 { .. }, [a1, b1, c1, a2, b2, c2]) => Ok(GroupElement::So4(SO4Element::new(
            SU2Element::from_euler(*a1, *b1, *c1),
            SU2Element::from_euler(*a2, *b2, *c2),
        ))),
        (SpaceTag::S2 { .. }, _) => bail!("--g on s2 takes three Euler angles, got {}", angles.len()),
        (SpaceTag::S3 { .. }, _) => bail!("--g on s3 takes six Euler angles, got {}", angles.len()),
    }
}

pub fn parse_alpha(items: &[String]) -> Result<Vec<C64>> {
    items
        .iter()
        .map(|t| C64::from_str(t.trim()).map_err(|e| anyhow!("bad complex number {t:?}: {e:?}")))
        .collect()
}
