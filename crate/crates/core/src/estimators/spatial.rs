//! Uniform cubic-cell index over points of the sphere.

use std::collections::HashMap;

use crate::geom::{chord_distance, SpherePoint};

type Key = (i32, i32, i32);

struct CellIndex {
    cell: f64,
    cells: HashMap<Key, Vec<u32>>,
}

impl CellIndex {
    fn new(points: &[SpherePoint], cell: f64) -> Self {
        let mut cells: HashMap<Key, Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(key(p, cell)).or_default().push(i as u32);
        }
        CellIndex { cell, cells }
    }

    /// Indices in cells at Chebyshev distance exactly `r` from `c`.
    fn shell(&self, c: Key, r: i32, mut f: impl FnMut(u32)) {
        for dx in -r..=r {
            for dy in -r..=r {
                for dz in -r..=r {
                    if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                        continue;
                    }
                    if let Some(v) = self.cells.get(&(c.0 + dx, c.1 + dy, c.2 + dz)) {
                        v.iter().for_each(|&j| f(j));
                    }
                }
            }
        }
    }
}

fn key(p: &SpherePoint, cell: f64) -> Key {
    (
        ((p.x() + 1.0) / cell).floor() as i32,
        ((p.y() + 1.0) / cell).floor() as i32,
        ((p.z() + 1.0) / cell).floor() as i32,
    )
}

/// Nearest-neighbour distance of every point (at least two points).
pub(super) fn nearest_distances(points: &[SpherePoint]) -> Vec<f64> {
    // about two points per occupied cell
    let cell = (8.0 * std::f64::consts::PI / points.len() as f64).sqrt();
    let index = CellIndex::new(points, cell);
    let max_r = (2.0 / cell).ceil() as i32 + 1;
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let c = key(p, cell);
            let mut best = f64::INFINITY;
            for r in 0..=max_r {
                index.shell(c, r, |j| {
                    if j as usize != i {
                        best = best.min(chord_distance(p, &points[j as usize]));
                    }
                });
                // anything in shell r + 1 is at least r cells away
                if best <= r as f64 * index.cell {
                    break;
                }
            }
            best
        })
        .collect()
}

/// Number of unordered pairs at distance at most `t`.
pub(super) fn pairs_within(points: &[SpherePoint], t: f64) -> u64 {
    let cell = t.max(1e-3);
    let index = CellIndex::new(points, cell);
    let mut count = 0u64;
    for (i, p) in points.iter().enumerate() {
        let c = key(p, cell);
        for r in 0..=1 {
            index.shell(c, r, |j| {
                if (j as usize) > i && chord_distance(p, &points[j as usize]) <= t {
                    count += 1;
                }
            });
        }
    }
    count
}
