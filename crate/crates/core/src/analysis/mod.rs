//! Measure and norm computations on a finite-depth construction.

mod cover;
mod norms;
mod pushforward;
pub mod quadrature;
mod shell;

use thiserror::Error;

use crate::cantor::{CantorError, SequencePack, Side};
use crate::gauge::GaugeError;

pub use cover::{
    canonical_cover, hausdorff_lower_probe, hausdorff_upper_sum, random_cover, Ball, BallProbe,
    CoverReport, LowerProbeReport, NEIGHBOR_SLACK,
};
pub use norms::{
    grand_norm_report, sobolev_norm, telescoping_bound, telescoping_constants, EpsGrid, NormReport,
    SobolevReport,
};
pub use pushforward::{pushforward_check, PushforwardEntry, PushforwardReport};
pub use shell::{radial_quadrature, shell_integral, shell_integral_quadrature, Radial, SHELL_REL_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Cantor(#[from] CantorError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error("quadrature did not converge on [{r:e}, {big_r:e}]")]
    Tolerance { r: f64, big_r: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("cover leaves {uncovered} depth-{level} cubes uncovered")]
    Coverage { level: usize, uncovered: usize },
}

/// Pairwise (tree) summation in a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        len => {
            let (lo, hi) = values.split_at(len / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Measure of the union of the `2^{nk}` inner cubes at depth `k`:
/// `2^n a_k^n` on the domain side, `2^n b_k^n` on the target side.
pub fn lebesgue_level(pack: &SequencePack, k: usize, side: Side) -> Result<f64, AnalysisError> {
    if k > pack.depth() {
        return Err(CantorError::Depth {
            depth: k,
            max: pack.depth(),
        }
        .into());
    }
    let n = pack.dimension() as i32;
    let v = match side {
        Side::Domain => pack.a()[k],
        Side::Target => pack.b()[k],
    };
    Ok((2.0 * v).powi(n))
}
