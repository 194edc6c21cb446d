//! Hausdorff cover sums: upper bounds from the cube covers themselves and
//! lower-bound probes from ball covers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::cantor::{self, CantorError, SequencePack, Side, VertexWord};
use crate::gauge::{diameter_constant, eval_h, GaugeSpec};

/// Relative slack in the cube-in-ball and cube-meets-ball predicates, so
/// circumscribed balls contain their cube despite rounding.
pub const NEIGHBOR_SLACK: f64 = 1e-12;

/// Upper cover sum of the depth-`k` inner cubes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub depth: usize,
    /// `2^{nk}`, exact in binary64.
    pub count: f64,
    /// `h(c_n r_k)`.
    pub per_cube: f64,
    pub total: f64,
    pub ratio_to_one: f64,
}

/// `Σ_{v ∈ V^k} h(diam Q_v) = 2^{nk} h(2√n r_k)`.
pub fn hausdorff_upper_sum(h: &GaugeSpec, pack: &SequencePack, k: usize) -> Result<CoverReport, AnalysisError> {
    if k > pack.depth() {
        return Err(CantorError::Depth {
            depth: k,
            max: pack.depth(),
        }
        .into());
    }
    let n = pack.dimension();
    let count = 2f64.powi((n * k) as i32);
    let per_cube = eval_h(h, diameter_constant(n) * pack.r()[k])?;
    let total = count * per_cube;
    Ok(CoverReport {
        depth: k,
        count,
        per_cube,
        total,
        ratio_to_one: total,
    })
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    fn contains_cube(&self, center: &[f64], half_edge: f64) -> bool {
        let far: f64 = self
            .center
            .iter()
            .zip(center)
            .map(|(c, z)| {
                let d = (c - z).abs() + half_edge;
                d * d
            })
            .sum();
        far.sqrt() <= self.radius * (1.0 + NEIGHBOR_SLACK)
    }

    fn meets_cube(&self, center: &[f64], half_edge: f64) -> bool {
        let near: f64 = self
            .center
            .iter()
            .zip(center)
            .map(|(c, z)| {
                let d = ((c - z).abs() - half_edge).max(0.0);
                d * d
            })
            .sum();
        near.sqrt() <= self.radius * (1.0 + NEIGHBOR_SLACK)
    }
}

/// Per-ball data of a lower-bound probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallProbe {
    pub h_diameter: f64,
    /// Depth-`l` cubes inside the ball.
    pub contained: u64,
    /// `Σ_{Q_v ⊆ B, v ∈ V^l} h(diam Q_v)`.
    pub dominated_sum: f64,
    /// Smallest depth with a cube inside the ball, if any up to `l`.
    pub minimal_depth: Option<usize>,
    /// Number of cubes at `minimal_depth` meeting the ball.
    pub neighbor_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerProbeReport {
    pub level: usize,
    pub balls: Vec<BallProbe>,
    /// `Σ_j h(diam B_j)`.
    pub cover_sum: f64,
    /// Upper sum at depth `l`.
    pub reference: f64,
    pub ratio: f64,
    pub c_probe: f64,
    pub holds: bool,
    /// Largest `#U` over the balls.
    pub max_neighbor_count: u64,
}

fn word_index(word: &VertexWord) -> u64 {
    let n = word.dimension();
    word.levels().iter().fold(0u64, |acc, &m| (acc << n) | m)
}

fn child_center(center: &[f64], step: f64, mask: u64) -> Vec<f64> {
    center
        .iter()
        .enumerate()
        .map(|(i, &c)| if mask >> i & 1 == 1 { c + step } else { c - step })
        .collect()
}

/// Walks the cubes meeting `ball` down to `level`, adding every depth-`level`
/// cube inside the ball to `covered` (indexed by word) and returning how
/// many there were.
fn mark_contained(
    ball: &Ball,
    pack: &SequencePack,
    level: usize,
    word: &mut VertexWord,
    center: &[f64],
    covered: &mut [bool],
) -> u64 {
    let d = word.depth();
    let radii = pack.r();
    if !ball.meets_cube(center, radii[d]) {
        return 0;
    }
    let n = pack.dimension();
    if ball.contains_cube(center, radii[d]) {
        let span = 1u64 << (n * (level - d));
        let start = word_index(word) * span;
        for slot in &mut covered[start as usize..(start + span) as usize] {
            *slot = true;
        }
        return span;
    }
    if d == level {
        return 0;
    }
    let mut total = 0;
    for mask in 0..1u64 << n {
        let c = child_center(center, 0.5 * radii[d], mask);
        word.push(mask);
        total += mark_contained(ball, pack, level, word, &c, covered);
        let levels = word.levels()[..d].to_vec();
        *word = VertexWord::from_levels(n, levels);
    }
    total
}

/// Breadth-first search for the smallest depth at which some cube lies in
/// the ball, returning that depth and the number of cubes there meeting it.
fn minimal_depth(ball: &Ball, pack: &SequencePack, level: usize) -> Option<(usize, u64)> {
    let n = pack.dimension();
    let radii = pack.r();
    let mut frontier: Vec<Vec<f64>> = vec![vec![0.0; n]];
    for d in 0..=level {
        frontier.retain(|c| ball.meets_cube(c, radii[d]));
        if frontier.is_empty() {
            return None;
        }
        if frontier.iter().any(|c| ball.contains_cube(c, radii[d])) {
            return Some((d, frontier.len() as u64));
        }
        if d == level {
            return None;
        }
        let step = 0.5 * radii[d];
        frontier = frontier
            .iter()
            .flat_map(|c| (0..1u64 << n).map(move |m| child_center(c, step, m)))
            .collect();
    }
    None
}

/// Checks a ball cover of the depth-`level` cubes against the upper sum.
///
/// Every depth-`level` inner cube must lie in some ball. The report holds
/// `Σ_j h(diam B_j)`, the per-ball dominated cube sums, the minimal
/// contained depth `m` of each ball and the count `#U` of depth-`m` cubes
/// meeting it (by exhaustive tree search), and whether
/// `Σ_j h(diam B_j) ≥ c_probe · 2^{nl} h(c_n r_l)`.
pub fn hausdorff_lower_probe(
    h: &GaugeSpec,
    pack: &SequencePack,
    cover: &[Ball],
    level: usize,
    c_probe: f64,
) -> Result<LowerProbeReport, AnalysisError> {
    let n = pack.dimension();
    if level > pack.depth() {
        return Err(CantorError::Depth {
            depth: level,
            max: pack.depth(),
        }
        .into());
    }
    if n * level > 26 {
        return Err(AnalysisError::Argument(format!(
            "2^(n l) = 2^{} cubes is too many to enumerate",
            n * level
        )));
    }
    if cover.iter().any(|b| b.center.len() != n || !(b.radius > 0.0)) {
        return Err(AnalysisError::Argument("balls need dimension n and positive radius".into()));
    }
    let per_cube = eval_h(h, diameter_constant(n) * pack.r()[level])?;
    let mut covered = vec![false; 1usize << (n * level)];
    let mut balls = Vec::with_capacity(cover.len());
    for ball in cover {
        let mut word = VertexWord::empty(n);
        let contained = mark_contained(ball, pack, level, &mut word, &vec![0.0; n], &mut covered);
        let found = minimal_depth(ball, pack, level);
        balls.push(BallProbe {
            h_diameter: eval_h(h, ball.diameter())?,
            contained,
            dominated_sum: contained as f64 * per_cube,
            minimal_depth: found.map(|f| f.0),
            neighbor_count: found.map(|f| f.1),
        });
    }
    let uncovered = covered.iter().filter(|c| !**c).count();
    if uncovered > 0 {
        return Err(AnalysisError::Coverage { level, uncovered });
    }
    let hs: Vec<f64> = balls.iter().map(|b| b.h_diameter).collect();
    let cover_sum = super::pairwise_sum(&hs);
    let reference = 2f64.powi((n * level) as i32) * per_cube;
    let ratio = cover_sum / reference;
    Ok(LowerProbeReport {
        level,
        max_neighbor_count: balls.iter().filter_map(|b| b.neighbor_count).max().unwrap_or(0),
        balls,
        cover_sum,
        reference,
        ratio,
        c_probe,
        holds: ratio >= c_probe,
    })
}

/// Balls circumscribing each depth-`m` inner cube.
pub fn canonical_cover(pack: &SequencePack, m: usize) -> Result<Vec<Ball>, AnalysisError> {
    let n = pack.dimension();
    let radius = (n as f64).sqrt() * pack.r()[m];
    VertexWord::all(n, m)
        .map(|w| {
            Ok(Ball {
                center: cantor::center(&w, pack, Side::Domain)?,
                radius,
            })
        })
        .collect()
}

/// Random multi-scale cover of the depth-`level` cubes.
///
/// The tree is cut at random: each node at depth `d ≥ 1` becomes a ball
/// with probability `stop`, or always at `d = level`. The ball is centred
/// at the centre of a random deepest descendant (a point near `C_A`) and
/// its radius is the distance to the node cube's farthest corner, inflated
/// by a random factor in `[1, 1 + inflate)`.
pub fn random_cover<R: Rng>(
    pack: &SequencePack,
    level: usize,
    stop: f64,
    inflate: f64,
    rng: &mut R,
) -> Result<Vec<Ball>, AnalysisError> {
    if level < 1 || level > pack.depth() {
        return Err(CantorError::Depth {
            depth: level,
            max: pack.depth(),
        }
        .into());
    }
    let n = pack.dimension();
    let mut balls = Vec::new();
    let mut stack: Vec<VertexWord> = (0..1u64 << n)
        .map(|m| VertexWord::empty(n).child(m))
        .collect();
    while let Some(word) = stack.pop() {
        let d = word.depth();
        if d == level || rng.gen_bool(stop) {
            let node = cantor::center(&word, pack, Side::Domain)?;
            let mut deep = word.clone();
            while deep.depth() < pack.depth() {
                deep.push(rng.gen_range(0..1u64 << n));
            }
            let center = cantor::center(&deep, pack, Side::Domain)?;
            let far: f64 = center
                .iter()
                .zip(&node)
                .map(|(c, z)| {
                    let e = (c - z).abs() + pack.r()[d];
                    e * e
                })
                .sum::<f64>()
                .sqrt();
            balls.push(Ball {
                center,
                radius: far * (1.0 + inflate * rng.gen::<f64>()),
            });
        } else {
            stack.extend((0..1u64 << n).map(|m| word.child(m)));
        }
    }
    Ok(balls)
}
