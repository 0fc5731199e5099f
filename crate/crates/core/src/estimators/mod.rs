//! Statistics of a single configuration.

mod discrepancy;
mod hull;
mod spatial;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{chord_distance, Cap, Configuration, SpherePoint};

pub use crate::gof::Ecdf;
pub use discrepancy::{
    cap_discrepancy, cap_discrepancy_grid, DiscrepancyMode, DiscrepancyResult, CANDIDATE_LIMIT,
    DEFAULT_GRID_CENTERS,
};
pub use hull::{
    convex_hull_3d, largest_empty_cap, largest_empty_cap_grid, EmptyCap, HullFacet, EMPTY_TOL,
};

/// Pairs closer than this are treated as coincident.
pub const COINCIDENT_TOL: f64 = 1e-14;

/// From this size on, spacing statistics use the spatial index.
pub const SPATIAL_INDEX_MIN_N: usize = 2048;

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

fn check_min_points(config: &Configuration, min: usize) -> Result<()> {
    if config.len() < min {
        return Err(Error::domain(format!("need at least {min} points, got {}", config.len())));
    }
    Ok(())
}

/// Visits every unordered pair `(i, j, |p_i - p_j|)`, failing on coincident points.
fn for_each_pair(points: &[SpherePoint], mut f: impl FnMut(f64)) -> Result<()> {
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = chord_distance(&points[i], &points[j]);
            if d < COINCIDENT_TOL {
                return Err(Error::CoincidentPoints { i, j, distance: d });
            }
            f(d);
        }
    }
    Ok(())
}

/// Closed-cap count `#{j : p_j in cap}`.
pub fn count_in_cap(config: &Configuration, cap: &Cap) -> usize {
    config.points().iter().filter(|p| cap.contains(p)).count()
}

/// `sum_{i != j} |x_i - x_j|^(-s)`.
pub fn riesz_energy(config: &Configuration, s: f64) -> Result<f64> {
    let mut acc = CompensatedSum::default();
    for_each_pair(config.points(), |d| acc.add(d.powf(-s)))?;
    Ok(2.0 * acc.value())
}

/// `sum_{i != j} ln(1 / |x_i - x_j|)`.
pub fn log_energy(config: &Configuration) -> Result<f64> {
    let mut acc = CompensatedSum::default();
    for_each_pair(config.points(), |d| acc.add(-d.ln()))?;
    Ok(2.0 * acc.value())
}

/// Squared L2 cap discrepancy via `(2/3) n^2 - (1/2) sum_{i,j} |x_i - x_j|`.
pub fn l2_discrepancy_sq(config: &Configuration) -> f64 {
    let pts = config.points();
    let mut acc = CompensatedSum::default();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            acc.add(chord_distance(&pts[i], &pts[j]));
        }
    }
    let n = pts.len() as f64;
    2.0 / 3.0 * n * n - acc.value()
}

/// Distance from each point to its nearest other point.
pub fn nearest_neighbor_distances(config: &Configuration) -> Result<Vec<f64>> {
    check_min_points(config, 2)?;
    let pts = config.points();
    let dist = if pts.len() >= SPATIAL_INDEX_MIN_N {
        spatial::nearest_distances(pts)
    } else {
        let mut best = vec![f64::INFINITY; pts.len()];
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d = chord_distance(&pts[i], &pts[j]);
                best[i] = best[i].min(d);
                best[j] = best[j].min(d);
            }
        }
        best
    };
    Ok(dist)
}

/// `m_n = min_{i != j} |x_i - x_j|`.
pub fn min_spacing(config: &Configuration) -> Result<f64> {
    Ok(nearest_neighbor_distances(config)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// `G_t = #{i < j : |x_i - x_j| <= t}`.
pub fn pair_count(config: &Configuration, t: f64) -> Result<u64> {
    check_min_points(config, 2)?;
    if !(t >= 0.0) {
        return Err(Error::domain(format!("pair threshold t = {t} must be nonnegative")));
    }
    let pts = config.points();
    if pts.len() >= SPATIAL_INDEX_MIN_N && t < 0.5 {
        return Ok(spatial::pairs_within(pts, t));
    }
    let mut count = 0u64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            if chord_distance(&pts[i], &pts[j]) <= t {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// The values `(n / 4) d_j^2`, `d_j` the nearest-neighbour distance of point `j`.
pub fn nn_spacing_values(config: &Configuration) -> Result<Vec<f64>> {
    let n = config.len() as f64;
    Ok(nearest_neighbor_distances(config)?.into_iter().map(|d| n / 4.0 * d * d).collect())
}

/// Area `pi r^2` of the cap with chord radius `r`.
pub fn cap_area(chord_radius: f64) -> f64 {
    PI * chord_radius * chord_radius
}
