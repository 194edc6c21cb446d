//! The nested cube hierarchy and its symbolic addresses.
//!
//! A depth-`k` [`VertexWord`] selects the cube pair `Q'_v ⊃ Q_v` centred at
//! `z_v = Σ_i (r_{i-1}/2) v_i`, with outer half-edge `r_{k-1}/2` and inner
//! half-edge `r_k`. The same words address the target hierarchy built from
//! `rt_k`. Point location descends this tree by coordinate signs.

mod coding;
mod pack;
mod word;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use coding::{code_z, dyadic_preimage, dyadic_preimage_exact, on_dyadic_boundary, DyadicCube};
pub use pack::{
    geometric_sequence, harmonic_sequence, ulp, ulps_apart, GluingResidual, SequencePack,
    GLUING_ULPS,
};
pub use word::{VertexWord, MAX_DIMENSION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CantorError {
    #[error("word depth {depth} exceeds pack depth {max}")]
    Depth { depth: usize, max: usize },
    #[error("point {0:?} is outside the closed cube [-1, 1]^n")]
    Domain(Vec<f64>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid sequence pack: {0}")]
    Pack(String),
    #[error("invalid vertex word: {0}")]
    Word(String),
    #[error("corner is not a level-{level} dyadic grid point: {corner:?}")]
    Precision { corner: Vec<f64>, level: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Domain,
    Target,
}

/// Outer and inner cube sharing a centre.
#[derive(Debug, Clone, PartialEq)]
pub struct CubePair {
    pub center: Vec<f64>,
    pub inner_half_edge: f64,
    pub outer_half_edge: f64,
    pub side: Side,
}

impl CubePair {
    /// Euclidean diameter of the inner cube.
    pub fn inner_diameter(&self) -> f64 {
        2.0 * (self.center.len() as f64).sqrt() * self.inner_half_edge
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Annulus,
    Core,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Annulus => "annulus",
            Region::Core => "core",
        }
    }
}

/// Result of point location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    /// `r_k < ‖x - z_v‖_∞ ≤ r_{k-1}/2` for the depth-`k` word.
    Annulus { word: VertexWord, depth: usize },
    /// Inside the closed inner cube of a word at the maximal depth.
    Core { word: VertexWord },
}

impl Location {
    pub fn word(&self) -> &VertexWord {
        match self {
            Location::Annulus { word, .. } | Location::Core { word } => word,
        }
    }

    pub fn depth(&self) -> usize {
        self.word().depth()
    }

    pub fn region(&self) -> Region {
        match self {
            Location::Annulus { .. } => Region::Annulus,
            Location::Core { .. } => Region::Core,
        }
    }
}

/// Centre `z_v` (domain) or `z̃_v` (target) of a word.
pub fn center(word: &VertexWord, pack: &SequencePack, side: Side) -> Result<Vec<f64>, CantorError> {
    check_word(word, pack)?;
    let radii = pack.radii(side);
    let mut z = vec![0.0; pack.dimension()];
    for level in 1..=word.depth() {
        let step = 0.5 * radii[level - 1];
        for (i, zi) in z.iter_mut().enumerate() {
            *zi += step * word.sign(level, i);
        }
    }
    Ok(z)
}

/// Outer and inner cube of a word of depth `1..=K`.
pub fn cubes(word: &VertexWord, pack: &SequencePack, side: Side) -> Result<CubePair, CantorError> {
    let k = word.depth();
    if k == 0 {
        return Err(CantorError::Word("the root has no cube pair".into()));
    }
    let center = center(word, pack, side)?;
    let radii = pack.radii(side);
    Ok(CubePair {
        center,
        inner_half_edge: radii[k],
        outer_half_edge: 0.5 * radii[k - 1],
        side,
    })
}

fn check_word(word: &VertexWord, pack: &SequencePack) -> Result<(), CantorError> {
    if word.dimension() != pack.dimension() {
        return Err(CantorError::Dimension {
            expected: pack.dimension(),
            got: word.dimension(),
        });
    }
    if word.depth() > pack.depth() {
        return Err(CantorError::Depth {
            depth: word.depth(),
            max: pack.depth(),
        });
    }
    Ok(())
}

pub(crate) fn check_point(x: &[f64], n: usize) -> Result<(), CantorError> {
    if x.len() != n {
        return Err(CantorError::Dimension {
            expected: n,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !(v.is_finite() && v.abs() <= 1.0)) {
        return Err(CantorError::Domain(x.to_vec()));
    }
    Ok(())
}

/// State at the end of a descent: the address, the offset `x - z_v` kept in
/// local coordinates, and its sup norm.
#[derive(Debug, Clone)]
pub(crate) struct Descent {
    pub word: VertexWord,
    pub region: Region,
    pub local: Vec<f64>,
    pub radius: f64,
}

/// Sup norm.
pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Descends the hierarchy with half-edges `radii`.
///
/// Children are chosen by the sign of the local offset; a zero coordinate
/// selects the `-1` child. Inner cubes are closed.
pub(crate) fn descend(x: &[f64], radii: &[f64], max_depth: usize) -> Descent {
    let n = x.len();
    let mut word = VertexWord::empty(n);
    let mut local = x.to_vec();
    for k in 1..=max_depth {
        let step = 0.5 * radii[k - 1];
        let mut mask = 0u64;
        for (i, yi) in local.iter_mut().enumerate() {
            if *yi > 0.0 {
                mask |= 1 << i;
                *yi -= step;
            } else {
                *yi += step;
            }
        }
        word.push(mask);
        let radius = sup_norm(&local);
        if radius > radii[k] {
            return Descent {
                word,
                region: Region::Annulus,
                local,
                radius,
            };
        }
    }
    let radius = sup_norm(&local);
    Descent {
        word,
        region: Region::Core,
        local,
        radius,
    }
}

/// Locates `x ∈ [-1, 1]^n` in the domain hierarchy down to `max_depth`.
pub fn locate(x: &[f64], pack: &SequencePack, max_depth: usize) -> Result<Location, CantorError> {
    locate_on(x, pack, max_depth, Side::Domain)
}

/// [`locate`] on either hierarchy.
pub fn locate_on(
    x: &[f64],
    pack: &SequencePack,
    max_depth: usize,
    side: Side,
) -> Result<Location, CantorError> {
    check_point(x, pack.dimension())?;
    if max_depth > pack.depth() {
        return Err(CantorError::Depth {
            depth: max_depth,
            max: pack.depth(),
        });
    }
    let d = descend(x, pack.radii(side), max_depth);
    let depth = d.word.depth();
    Ok(match d.region {
        Region::Annulus => Location::Annulus {
            word: d.word,
            depth,
        },
        Region::Core => Location::Core { word: d.word },
    })
}

/// CSV table of all cubes at depths `1..=max_depth`:
/// `depth,word,c1..cn,inner,outer`.
pub fn cube_table_csv(
    pack: &SequencePack,
    max_depth: usize,
    side: Side,
) -> Result<String, CantorError> {
    let n = pack.dimension();
    let mut out = String::from("depth,word");
    for i in 1..=n {
        out.push_str(&format!(",c{i}"));
    }
    out.push_str(",inner,outer\n");
    for k in 1..=max_depth {
        for w in VertexWord::all(n, k) {
            let c = cubes(&w, pack, side)?;
            out.push_str(&format!("{k},{w}"));
            for v in &c.center {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{},{}\n", c.inner_half_edge, c.outer_half_edge));
        }
    }
    Ok(out)
}
