//! Convex hull of points on the sphere and the largest empty cap.
//!
//! Each hull facet spans a plane `<m, x> = h` with every point on the side
//! `<m, x> <= h`, so the cap `<m, x> >= h` holds no point in its interior.
//! These caps are centered at the spherical Voronoi vertices, where the
//! distance to the nearest point is locally maximal.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{cross3, dot3, fibonacci_lattice, sub3, tangent_frame, Configuration, SpherePoint};

/// Emptiness is certified against the cap shrunk by this much in height.
pub const EMPTY_TOL: f64 = 1e-9;

/// Chordal covering radius of the `g`-point Fibonacci lattice is below
/// `FIB_COVER / sqrt(g)` (measured: about 2.72 / sqrt(g)).
const FIB_COVER: f64 = 3.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullFacet {
    pub vertices: [usize; 3],
    pub circumcenter_on_sphere: SpherePoint,
    pub circum_chord_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmptyCap {
    pub area: f64,
    pub center: SpherePoint,
    pub chord_radius: f64,
    /// Bound on how far `chord_radius` may sit below the true covering
    /// radius; zero for the hull-based result.
    pub tolerance: f64,
}

fn orient(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], p: &[f64; 3]) -> f64 {
    let n = cross3(&sub3(b, a), &sub3(c, a));
    dot3(&n, &sub3(p, a))
}

/// Incremental convex hull with outward-oriented facets.
pub fn convex_hull_3d(points: &[SpherePoint]) -> Result<Vec<HullFacet>> {
    let n = points.len();
    if n < 4 {
        return Err(Error::DegenerateInput(format!("hull needs at least 4 points, got {n}")));
    }
    let p: Vec<[f64; 3]> = points.iter().map(|q| q.to_array()).collect();

    // initial tetrahedron from well-separated points
    let i0 = 0;
    let dist2 = |a: &[f64; 3], b: &[f64; 3]| dot3(&sub3(a, b), &sub3(a, b));
    let i1 = (0..n).max_by(|&a, &b| dist2(&p[a], &p[i0]).total_cmp(&dist2(&p[b], &p[i0]))).unwrap();
    let area = |k: usize| {
        let c = cross3(&sub3(&p[i1], &p[i0]), &sub3(&p[k], &p[i0]));
        dot3(&c, &c)
    };
    let i2 = (0..n).max_by(|&a, &b| area(a).total_cmp(&area(b))).unwrap();
    let vol = |k: usize| orient(&p[i0], &p[i1], &p[i2], &p[k]).abs();
    let i3 = (0..n).max_by(|&a, &b| vol(a).total_cmp(&vol(b))).unwrap();
    if area(i2) < 1e-20 || vol(i3) < 1e-12 {
        return Err(Error::DegenerateInput("points are coplanar or coincident".into()));
    }
    let centroid = [0, 1, 2].map(|d| (p[i0][d] + p[i1][d] + p[i2][d] + p[i3][d]) / 4.0);

    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut alive: Vec<bool> = Vec::new();
    for f in [[i0, i1, i2], [i0, i3, i1], [i1, i3, i2], [i0, i2, i3]] {
        let f = if orient(&p[f[0]], &p[f[1]], &p[f[2]], &centroid) > 0.0 { [f[0], f[2], f[1]] } else { f };
        faces.push(f);
        alive.push(true);
    }

    let eps = 1e-13;
    for (q, pq) in p.iter().enumerate() {
        if q == i0 || q == i1 || q == i2 || q == i3 {
            continue;
        }
        let visible: Vec<usize> = (0..faces.len())
            .filter(|&f| alive[f] && orient(&p[faces[f][0]], &p[faces[f][1]], &p[faces[f][2]], pq) > eps)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for &f in &visible {
            let [a, b, c] = faces[f];
            edges.extend([(a, b), (b, c), (c, a)]);
            alive[f] = false;
        }
        for &(a, b) in &edges {
            if !edges.contains(&(b, a)) {
                faces.push([a, b, q]);
                alive.push(true);
            }
        }
    }

    let live: Vec<[usize; 3]> = faces.iter().zip(&alive).filter(|(_, &a)| a).map(|(f, _)| *f).collect();
    let verts: HashSet<usize> = live.iter().flatten().copied().collect();
    let mut undirected: HashMap<(usize, usize), usize> = HashMap::new();
    for f in &live {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            *undirected.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let euler = verts.len() as i64 - undirected.len() as i64 + live.len() as i64;
    if euler != 2 || undirected.values().any(|&c| c != 2) {
        return Err(Error::DegenerateInput(format!("hull failed the Euler check (V - E + F = {euler})")));
    }

    Ok(live
        .into_iter()
        .map(|[a, b, c]| {
            let m = cross3(&sub3(&p[b], &p[a]), &sub3(&p[c], &p[a]));
            let norm = dot3(&m, &m).sqrt();
            let m = [m[0] / norm, m[1] / norm, m[2] / norm];
            let h = (dot3(&m, &p[a]) + dot3(&m, &p[b]) + dot3(&m, &p[c])) / 3.0;
            HullFacet {
                vertices: [a, b, c],
                circumcenter_on_sphere: SpherePoint::from_unit(m[0], m[1], m[2]),
                circum_chord_radius: (2.0 * (1.0 - h)).max(0.0).sqrt(),
            }
        })
        .collect())
}

/// Largest cap free of points, from the hull facets. Each candidate is
/// re-verified against every point.
pub fn largest_empty_cap(config: &Configuration) -> Result<EmptyCap> {
    let pts = config.points();
    let facets = convex_hull_3d(pts)?;
    let mut best: Option<EmptyCap> = None;
    for f in facets {
        let c = f.circumcenter_on_sphere;
        let h = 1.0 - 0.5 * f.circum_chord_radius * f.circum_chord_radius;
        if pts.iter().any(|p| c.dot(p) >= h + EMPTY_TOL) {
            continue;
        }
        if best.is_none_or(|b| f.circum_chord_radius > b.chord_radius) {
            best = Some(EmptyCap {
                area: PI * f.circum_chord_radius * f.circum_chord_radius,
                center: c,
                chord_radius: f.circum_chord_radius,
                tolerance: 0.0,
            });
        }
    }
    best.ok_or_else(|| Error::DegenerateInput("no hull facet passed the emptiness check".into()))
}

fn hole_radius(pts: &[[f64; 3]], c: &[f64; 3]) -> f64 {
    let m = pts.iter().map(|p| dot3(p, c)).fold(f64::NEG_INFINITY, f64::max);
    (2.0 * (1.0 - m.min(1.0))).max(0.0).sqrt()
}

/// Grid search for the largest empty cap: Fibonacci centers, then two levels
/// of local refinement around every center that could still lead to the
/// maximum. The returned radius is within `tolerance` of the exact one.
pub fn largest_empty_cap_grid(config: &Configuration, centers: usize) -> Result<EmptyCap> {
    if config.len() < 4 {
        return Err(Error::DegenerateInput(format!("need at least 4 points, got {}", config.len())));
    }
    if centers == 0 {
        return Err(Error::domain("grid search needs at least one center"));
    }
    const SIDE: usize = 17;
    const MAX_SEEDS: usize = 256;
    let pts: Vec<[f64; 3]> = config.points().iter().map(|p| p.to_array()).collect();
    let mut cands: Vec<([f64; 3], f64)> =
        fibonacci_lattice(centers).iter().map(|c| (c.to_array(), hole_radius(&pts, &c.to_array()))).collect();
    let mut best = cands.iter().copied().fold(([0.0, 0.0, 1.0], -1.0), |a, b| if b.1 > a.1 { b } else { a });
    let mut cover = (FIB_COVER / (centers as f64).sqrt()).min(2.0);
    for _level in 0..2 {
        let mut seeds: Vec<([f64; 3], f64)> = cands.into_iter().filter(|c| c.1 >= best.1 - cover).collect();
        seeds.sort_by(|a, b| b.1.total_cmp(&a.1));
        seeds.truncate(MAX_SEEDS);
        let half = 1.1 * cover;
        let step = 2.0 * half / (SIDE - 1) as f64;
        let mut next = Vec::with_capacity(seeds.len() * SIDE * SIDE);
        for (c, _) in &seeds {
            let sp = SpherePoint::from_unit(c[0], c[1], c[2]);
            let (u, v) = tangent_frame(&sp);
            for a in 0..SIDE {
                for b in 0..SIDE {
                    let sa = -half + a as f64 * step;
                    let sb = -half + b as f64 * step;
                    let q = [0, 1, 2].map(|d| c[d] + sa * u[d] + sb * v[d]);
                    let nq = dot3(&q, &q).sqrt();
                    let q = q.map(|x| x / nq);
                    let r = hole_radius(&pts, &q);
                    if r > best.1 {
                        best = (q, r);
                    }
                    next.push((q, r));
                }
            }
        }
        cands = next;
        // half diagonal of a local cell, padded for the tangent-plane map
        cover = 1.05 * step * std::f64::consts::FRAC_1_SQRT_2;
    }
    let (c, r) = best;
    Ok(EmptyCap { area: PI * r * r, center: SpherePoint::from_unit(c[0], c[1], c[2]), chord_radius: r, tolerance: cover })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;
    use crate::samplers::{sample_dpp_hkpv, sample_uniform_iid};

    fn cfg(raw: &[[f64; 3]]) -> Configuration {
        Configuration::new(raw.iter().map(|p| SpherePoint::new(p[0], p[1], p[2]).unwrap()).collect(), "t", 0).unwrap()
    }

    fn tetrahedron() -> Configuration {
        cfg(&[[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])
    }

    #[test]
    fn platonic_hulls() {
        assert_eq!(convex_hull_3d(tetrahedron().points()).unwrap().len(), 4);
        let oct = cfg(&[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]);
        assert_eq!(convex_hull_3d(oct.points()).unwrap().len(), 8);
    }

    #[test]
    fn hull_contains_every_point() {
        let c = sample_uniform_iid(64, RngSeed(4)).unwrap();
        let facets = convex_hull_3d(c.points()).unwrap();
        assert_eq!(facets.len(), 2 * 64 - 4);
        for f in &facets {
            let m = f.circumcenter_on_sphere;
            let h = 1.0 - 0.5 * f.circum_chord_radius * f.circum_chord_radius;
            for p in c.points() {
                assert!(m.dot(p) <= h + 1e-9);
            }
            for &v in &f.vertices {
                assert!((m.dot(&c.points()[v]) - h).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let flat = cfg(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.6, 0.8, 0.0]]);
        assert!(matches!(convex_hull_3d(flat.points()), Err(Error::DegenerateInput(_))));
        assert!(convex_hull_3d(&flat.points()[..3]).is_err());
    }

    #[test]
    fn tetrahedron_empty_cap() {
        let c = tetrahedron();
        let e = largest_empty_cap(&c).unwrap();
        // the hole opposite a vertex is centered at its antipode; the facet
        // plane sits at height 1/3 on that side
        let r = (2.0 * (1.0 - 1.0 / 3.0f64)).sqrt();
        assert!((e.chord_radius - r).abs() < 1e-12);
        let g = largest_empty_cap_grid(&c, 4096).unwrap();
        assert!(g.chord_radius <= e.chord_radius + 1e-12);
        assert!(e.chord_radius - g.chord_radius <= g.tolerance);
    }

    #[test]
    fn exact_and_grid_agree() {
        for seed in 0..10 {
            let c = sample_dpp_hkpv(64, RngSeed(seed)).unwrap();
            let e = largest_empty_cap(&c).unwrap();
            let g = largest_empty_cap_grid(&c, 4096).unwrap();
            assert!(g.chord_radius <= e.chord_radius + 1e-12);
            assert!(e.chord_radius - g.chord_radius <= g.tolerance, "{} {} {}", e.chord_radius, g.chord_radius, g.tolerance);
            // certificate: nothing strictly inside
            let h = 1.0 - 0.5 * e.chord_radius * e.chord_radius;
            assert!(c.points().iter().all(|p| e.center.dot(p) < h + EMPTY_TOL));
        }
    }

    #[test]
    fn lattice_covering_bound_holds() {
        use rand::Rng;
        let mut rng = RngSeed(1).rng();
        for g in [20usize, 100, 4096] {
            let lat: Vec<[f64; 3]> = fibonacci_lattice(g).iter().map(|p| p.to_array()).collect();
            let bound = FIB_COVER / (g as f64).sqrt();
            for _ in 0..20_000 {
                let z = 2.0 * rng.random::<f64>() - 1.0;
                let q = SpherePoint::from_height_azimuth(z, 2.0 * PI * rng.random::<f64>()).to_array();
                assert!(hole_radius(&lat, &q) < bound);
            }
        }
    }
}
