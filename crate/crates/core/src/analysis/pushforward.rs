//! Mass carried by each depth-`j` word under the depth-`k` upper sum.

use serde::{Deserialize, Serialize};

use super::{hausdorff_upper_sum, AnalysisError};
use crate::cantor::{code_z, CantorError, SequencePack, VertexWord};
use crate::gauge::GaugeSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardEntry {
    pub word: String,
    /// Lower-left corner numerators of the dyadic image `z(Q_u)` at level `j`.
    pub dyadic: Vec<u64>,
    /// Depth-`k` descendants of the word.
    pub descendants: u64,
    /// Restricted upper sum over the total upper sum.
    pub ratio: f64,
    /// Whether `ratio` equals `2^{-jn}` and the count ratio is exact.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardReport {
    pub k: usize,
    pub j: usize,
    /// `2^{-jn}`.
    pub expected: f64,
    pub entries: Vec<PushforwardEntry>,
    pub all_exact: bool,
}

/// For each `u ∈ V^j`, the share of the depth-`k` upper sum carried by the
/// descendants of `u`, compared with the Lebesgue measure `2^{-jn}` of its
/// dyadic image.
pub fn pushforward_check(
    pack: &SequencePack,
    h: &GaugeSpec,
    k: usize,
    j: usize,
) -> Result<PushforwardReport, AnalysisError> {
    let n = pack.dimension();
    if j > k {
        return Err(AnalysisError::Argument(format!("need j <= k, got j = {j}, k = {k}")));
    }
    if k > pack.depth() {
        return Err(CantorError::Depth {
            depth: k,
            max: pack.depth(),
        }
        .into());
    }
    if n * k > 62 || n * j > 20 {
        return Err(AnalysisError::Argument("too many words to enumerate".into()));
    }
    let total = hausdorff_upper_sum(h, pack, k)?;
    let expected = 2f64.powi(-((n * j) as i32));
    let descendants = 1u64 << (n * (k - j));
    let all = 1u64 << (n * k);
    // exact rational check: descendants / all == 1 / 2^{jn}
    let count_exact = descendants << (n * j) == all;
    let entries: Vec<PushforwardEntry> = VertexWord::all(n, j)
        .map(|u| {
            let ratio = descendants as f64 * total.per_cube / total.total;
            PushforwardEntry {
                word: u.to_string(),
                dyadic: code_z(&u).numerators,
                descendants,
                ratio,
                exact: count_exact && ratio == expected,
            }
        })
        .collect();
    Ok(PushforwardReport {
        k,
        j,
        expected,
        all_exact: entries.iter().all(|e| e.exact),
        entries,
    })
}
