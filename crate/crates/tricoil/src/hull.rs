//! 3-D convex hull volume (quickhull).
//!
//! Degenerate inputs (fewer than four points, collinear or coplanar sets)
//! have zero volume by definition.

use crate::actuation::Vec3;

struct Face {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    alive: bool,
    outside: Vec<usize>,
}

impl Face {
    fn new(pts: &[Vec3], a: usize, b: usize, c: usize) -> Face {
        let n = (pts[b] - pts[a]).cross(&(pts[c] - pts[a]));
        let offset = n.dot(&pts[a]);
        Face { v: [a, b, c], normal: n, offset, alive: true, outside: Vec::new() }
    }

    fn dist(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Volume of the convex hull of `points`, m³.
pub fn hull_volume(points: &[Vec3]) -> f64 {
    if points.len() < 4 {
        return 0.0;
    }
    let pts = points;
    let scale = bounding_diagonal(pts);
    if scale == 0.0 {
        return 0.0;
    }
    let eps = 1e-12 * scale;

    // Initial simplex: widest axis-aligned pair, then farthest from the
    // line, then farthest from the plane.
    let (mut i0, mut i1) = (0, 0);
    let mut best_spread = -1.0;
    for axis in 0..3 {
        let lo = (0..pts.len()).min_by(|&a, &b| pts[a][axis].total_cmp(&pts[b][axis])).unwrap();
        let hi = (0..pts.len()).max_by(|&a, &b| pts[a][axis].total_cmp(&pts[b][axis])).unwrap();
        let spread = pts[hi][axis] - pts[lo][axis];
        if spread > best_spread {
            best_spread = spread;
            i0 = lo;
            i1 = hi;
        }
    }
    if (pts[i1] - pts[i0]).norm() < eps {
        return 0.0;
    }
    let dir = (pts[i1] - pts[i0]).normalize();
    let i2 = (0..pts.len())
        .max_by(|&a, &b| {
            let da = ((pts[a] - pts[i0]) - dir * (pts[a] - pts[i0]).dot(&dir)).norm();
            let db = ((pts[b] - pts[i0]) - dir * (pts[b] - pts[i0]).dot(&dir)).norm();
            da.total_cmp(&db)
        })
        .unwrap();
    let line_dist = ((pts[i2] - pts[i0]) - dir * (pts[i2] - pts[i0]).dot(&dir)).norm();
    if line_dist < eps {
        return 0.0; // collinear
    }
    let plane_n = (pts[i1] - pts[i0]).cross(&(pts[i2] - pts[i0]));
    let i3 = (0..pts.len())
        .max_by(|&a, &b| {
            let da = (pts[a] - pts[i0]).dot(&plane_n).abs();
            let db = (pts[b] - pts[i0]).dot(&plane_n).abs();
            da.total_cmp(&db)
        })
        .unwrap();
    let plane_dist = (pts[i3] - pts[i0]).dot(&plane_n).abs() / plane_n.norm();
    if plane_dist < eps {
        return 0.0; // coplanar
    }

    // Orient the initial tetrahedron outward.
    let (a, b, c, d) = if (pts[i3] - pts[i0]).dot(&plane_n) > 0.0 {
        (i0, i2, i1, i3)
    } else {
        (i0, i1, i2, i3)
    };
    let mut faces = vec![
        Face::new(pts, a, b, c),
        Face::new(pts, a, c, d),
        Face::new(pts, c, b, d),
        Face::new(pts, b, a, d),
    ];

    // Initial outside sets.
    for p in 0..pts.len() {
        if p == a || p == b || p == c || p == d {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (fi, f) in faces.iter().enumerate() {
            let dist = f.dist(&pts[p]);
            if dist > eps && best.map_or(true, |(_, bd)| dist > bd) {
                best = Some((fi, dist));
            }
        }
        if let Some((fi, _)) = best {
            faces[fi].outside.push(p);
        }
    }

    loop {
        // Face with the farthest pending outside point.
        let mut pick: Option<(usize, usize, f64)> = None;
        for (fi, f) in faces.iter().enumerate() {
            if !f.alive {
                continue;
            }
            for &p in &f.outside {
                let dist = f.dist(&pts[p]);
                if pick.map_or(true, |(_, _, bd)| dist > bd) {
                    pick = Some((fi, p, dist));
                }
            }
        }
        let Some((_, apex, _)) = pick else { break };

        // Visible set and its horizon (directed edges without a visible twin).
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive && f.dist(&pts[apex]) > eps)
            .map(|(fi, _)| fi)
            .collect();
        let mut edges = Vec::new();
        for &fi in &visible {
            let [va, vb, vc] = faces[fi].v;
            edges.push((va, vb));
            edges.push((vb, vc));
            edges.push((vc, va));
        }
        let horizon: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .filter(|&(x, y)| !edges.contains(&(y, x)))
            .collect();

        let mut orphans = Vec::new();
        for &fi in &visible {
            faces[fi].alive = false;
            orphans.append(&mut faces[fi].outside);
        }
        let first_new = faces.len();
        for &(x, y) in &horizon {
            faces.push(Face::new(pts, x, y, apex));
        }
        for p in orphans {
            if p == apex {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for fi in first_new..faces.len() {
                let dist = faces[fi].dist(&pts[p]);
                if dist > eps && best.map_or(true, |(_, bd)| dist > bd) {
                    best = Some((fi, dist));
                }
            }
            if let Some((fi, _)) = best {
                faces[fi].outside.push(p);
            }
        }
    }

    // Fan volume about the centroid of hull vertices.
    let mut verts: Vec<usize> = faces.iter().filter(|f| f.alive).flat_map(|f| f.v).collect();
    verts.sort_unstable();
    verts.dedup();
    let centroid: Vec3 = verts.iter().map(|&v| pts[v]).sum::<Vec3>() / verts.len() as f64;
    faces
        .iter()
        .filter(|f| f.alive)
        .map(|f| {
            let u = pts[f.v[0]] - centroid;
            let v = pts[f.v[1]] - centroid;
            let w = pts[f.v[2]] - centroid;
            u.dot(&v.cross(&w)).abs() / 6.0
        })
        .sum()
}

fn bounding_diagonal(pts: &[Vec3]) -> f64 {
    let mut lo = pts[0];
    let mut hi = pts[0];
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_volume() {
        let s = 0.01;
        let mut pts = Vec::new();
        for ix in 0..2 {
            for iy in 0..2 {
                for iz in 0..2 {
                    pts.push(Vec3::new(ix as f64 * s, iy as f64 * s, iz as f64 * s));
                }
            }
        }
        assert!((hull_volume(&pts) - 1e-6).abs() < 1e-18);
        // Interior points change nothing.
        pts.push(Vec3::new(0.005, 0.005, 0.005));
        assert!((hull_volume(&pts) - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn degenerate_sets_have_zero_volume() {
        assert_eq!(hull_volume(&[]), 0.0);
        let p = Vec3::new(0.1, 0.2, 0.3);
        assert_eq!(hull_volume(&[p, p, p, p, p]), 0.0);
        // Three points.
        assert_eq!(
            hull_volume(&[Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)]),
            0.0
        );
        // Collinear.
        let line: Vec<Vec3> = (0..10).map(|i| Vec3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        assert_eq!(hull_volume(&line), 0.0);
        // Coplanar.
        let plane: Vec<Vec3> = (0..20)
            .map(|i| Vec3::new((i % 5) as f64, (i / 5) as f64, 1.5))
            .collect();
        assert_eq!(hull_volume(&plane), 0.0);
    }

    #[test]
    fn tetrahedron_volume() {
        let pts = [
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        assert!((hull_volume(&pts) - 1.0 / 6.0).abs() < 1e-15);
    }

    /// Brute-force oracle: every point triple whose plane has all other
    /// points strictly on one side is a hull facet; fan those facets from
    /// the centroid. Only valid for points in general position.
    fn brute_force_volume(pts: &[Vec3]) -> f64 {
        let n = pts.len();
        let centroid: Vec3 = pts.iter().sum::<Vec3>() / n as f64;
        let mut vol = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let nrm = (pts[j] - pts[i]).cross(&(pts[k] - pts[i]));
                    if nrm.norm() < 1e-12 {
                        continue;
                    }
                    let mut pos = false;
                    let mut neg = false;
                    for (m, p) in pts.iter().enumerate() {
                        if m == i || m == j || m == k {
                            continue;
                        }
                        let d = nrm.dot(&(p - pts[i]));
                        if d > 0.0 {
                            pos = true;
                        } else if d < 0.0 {
                            neg = true;
                        }
                    }
                    if pos && neg {
                        continue;
                    }
                    let u = pts[i] - centroid;
                    let v = pts[j] - centroid;
                    let w = pts[k] - centroid;
                    vol += u.dot(&v.cross(&w)).abs() / 6.0;
                }
            }
        }
        vol
    }

    #[test]
    fn random_cloud_matches_brute_force_oracle() {
        // Deterministic LCG point cloud, general position.
        let mut state = 0x853c49e6748fea9b_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..4 {
            let pts: Vec<Vec3> =
                (0..50).map(|_| Vec3::new(next(), next(), next())).collect();
            let quick = hull_volume(&pts);
            let brute = brute_force_volume(&pts);
            assert!(
                (quick - brute).abs() < 1e-12 * brute,
                "quickhull {quick} vs brute {brute}"
            );
        }
    }

    #[test]
    fn adding_points_never_shrinks_the_hull() {
        let mut state = 0x2545f4914f6cdd1d_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut pts: Vec<Vec3> = (0..10).map(|_| Vec3::new(next(), next(), next())).collect();
        let mut prev = hull_volume(&pts);
        for _ in 0..40 {
            pts.push(Vec3::new(next(), next(), next()));
            let vol = hull_volume(&pts);
            assert!(vol >= prev - 1e-15);
            prev = vol;
        }
    }
}
