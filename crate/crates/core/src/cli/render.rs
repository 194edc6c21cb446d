//! Plane renderings (n = 2) as binary PGM/PPM images plus a CSV grid.
//!
//! Pixel `(i, j)` sits at `x_1 = -1 + 2i/(N-1)`, `x_2 = 1 - 2j/(N-1)`, so
//! the grid includes the boundary of the square.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::config::Resolved;
use super::io::{OutputDir, Stamp};
use super::CliError;
use crate::cantor::{locate_on, Region, Side};
use crate::mapping::PonomarevMap;

/// Grid lines per axis drawn in `grid.pgm`.
pub const GRID_LINES: usize = 17;

#[derive(Debug, Clone, PartialEq)]
pub struct Pixel {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub displacement: f64,
    pub jacobian: f64,
    pub depth: usize,
    pub region: Region,
    /// Number of target inner cubes containing the target-side point `x`.
    pub target_level: usize,
}

pub fn coordinate(i: usize, n: usize) -> f64 {
    if i + 1 == n {
        1.0
    } else {
        -1.0 + 2.0 * i as f64 / (n - 1) as f64
    }
}

fn pixel(map: &PonomarevMap, x: [f64; 2]) -> Result<Pixel, CliError> {
    let num = |e: crate::mapping::MapError| CliError::Numeric(e.to_string());
    let e = map.eval_traced(&x).map_err(num)?;
    let jacobian = map.jacobian_det_unchecked(&x).map_err(num)?;
    let t = locate_on(&x, map.pack(), map.depth(), Side::Target).map_err(|e| CliError::Numeric(e.to_string()))?;
    let target_level = match t.region() {
        Region::Core => t.depth(),
        Region::Annulus => t.depth() - 1,
    };
    let y = [e.value[0], e.value[1]];
    Ok(Pixel {
        x,
        y,
        displacement: ((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2)).sqrt(),
        jacobian,
        depth: e.depth(),
        region: e.region,
        target_level,
    })
}

/// Row-major pixels, top row first.
pub fn pixels(map: &PonomarevMap, resolution: usize) -> Result<Vec<Pixel>, CliError> {
    if map.dimension() != 2 {
        return Err(CliError::Unsupported(format!(
            "render needs n = 2, got n = {}",
            map.dimension()
        )));
    }
    (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let (j, i) = (idx / resolution, idx % resolution);
            pixel(map, [coordinate(i, resolution), -coordinate(j, resolution)])
        })
        .collect()
}

pub fn pnm(magic: &str, stamp: &Stamp, width: usize, height: usize, data: &[u8]) -> Vec<u8> {
    let mut bytes = format!("{magic}\n{}\n{width} {height}\n255\n", stamp.comment()).into_bytes();
    bytes.extend_from_slice(data);
    bytes
}

/// Maps `v` from `[lo, hi]` to `0..=255`; a degenerate range maps to 0.
fn gray(v: f64, lo: f64, hi: f64) -> u8 {
    if hi > lo {
        (255.0 * ((v - lo) / (hi - lo)).clamp(0.0, 1.0)).round() as u8
    } else {
        0
    }
}

/// Blue-green-red ramp on `t ∈ [0, 1]`.
fn ramp(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let c = |v: f64| (255.0 * v).round() as u8;
    [c(t), c(1.0 - (2.0 * t - 1.0).abs()), c(1.0 - t)]
}

fn to_pixel(v: f64, n: usize) -> Option<usize> {
    let p = ((v + 1.0) * 0.5 * (n - 1) as f64).round();
    (p >= 0.0 && p <= (n - 1) as f64).then_some(p as usize)
}

/// Images of the lines `x_1 = c` and `x_2 = c` for `GRID_LINES` values of `c`.
pub fn grid_image(map: &PonomarevMap, n: usize) -> Result<Vec<u8>, CliError> {
    let mut img = vec![0u8; n * n];
    let samples = 4 * n;
    for l in 0..GRID_LINES {
        let c = coordinate(l, GRID_LINES);
        for s in 0..samples {
            let u = coordinate(s, samples);
            for x in [[c, u], [u, c]] {
                let y = map.eval(&x).map_err(|e| CliError::Numeric(e.to_string()))?;
                if let (Some(i), Some(j)) = (to_pixel(y[0], n), to_pixel(-y[1], n)) {
                    img[j * n + i] = 255;
                }
            }
        }
    }
    Ok(img)
}

pub fn cmd_render(res: &Resolved, resolution: usize, out: &mut OutputDir) -> Result<(), CliError> {
    let map = PonomarevMap::build_with(res.pack.clone(), res.provenance.clone())
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let px = pixels(&map, resolution)?;
    let n = resolution;
    let stamp = out.stamp().clone();

    let dmax = px.iter().map(|p| p.displacement).fold(0.0, f64::max);
    let disp: Vec<u8> = px.iter().map(|p| gray(p.displacement, 0.0, dmax)).collect();
    out.raw("displacement.pgm", &pnm("P5", &stamp, n, n, &disp))?;

    let logs: Vec<f64> = px.iter().map(|p| p.jacobian.ln()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let jac: Vec<u8> = logs
        .iter()
        .flat_map(|&l| ramp(if hi > lo { (l - lo) / (hi - lo) } else { 0.5 }))
        .collect();
    out.raw("jacobian.ppm", &pnm("P6", &stamp, n, n, &jac))?;

    let depth = map.depth() as f64;
    let regions: Vec<u8> = px.iter().map(|p| gray(p.target_level as f64, 0.0, depth)).collect();
    out.raw("regions.pgm", &pnm("P5", &stamp, n, n, &regions))?;

    out.raw("grid.pgm", &pnm("P5", &stamp, n, n, &grid_image(&map, n)?))?;

    let mut csv = String::from("i,j,x1,x2,y1,y2,displacement,jacobian,depth,region,target_level\n");
    for (idx, p) in px.iter().enumerate() {
        writeln!(
            csv,
            "{},{},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{}",
            idx % n,
            idx / n,
            p.x[0],
            p.x[1],
            p.y[0],
            p.y[1],
            p.displacement,
            p.jacobian,
            p.depth,
            p.region.as_str(),
            p.target_level
        )
        .unwrap();
    }
    out.csv("render.csv", &csv)
}
