//! Gauge-parameterized Ponomarev homeomorphisms of the cube `[-1, 1]^n`.
//!
//! The construction maps a Cantor set `C_A` of Lebesgue measure zero onto a
//! Cantor set `C_B` of positive measure by a sup-norm radial map on nested
//! cube annuli. The contraction sequence `a_k` is chosen from a gauge `h`
//! so that the generalized Hausdorff measure `H^h(C_A)` is either positive
//! and finite, or zero.
//!
//! * [`gauge`]: gauge functions and the sequence generators.
//! * [`cantor`]: vertex words, cube hierarchy, point location, binary coding.
//! * [`mapping`]: evaluation, inversion and derivatives of the map.
//! * [`analysis`]: Lebesgue levels, Hausdorff cover sums, shell integrals,
//!   grand and classical Sobolev norm reports, pushforward counts.
//! * [`cli`]: the `ponomarev` command-line front end.

pub mod analysis;
pub mod cantor;
pub mod cli;
pub mod gauge;
pub mod mapping;

pub use cantor::{SequencePack, Side, VertexWord};
pub use gauge::{GaugeSpec, RawGauge, TauSpec};
pub use mapping::PonomarevMap;
