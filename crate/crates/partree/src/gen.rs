//! Deterministic dataset and query generation.
//!
//! All randomness comes from a 64-bit mixing recurrence seeded
//! explicitly, so a (family, n, seed) triple always reproduces the same
//! dataset byte for byte.

use crate::geom::{Dir, Line, Point, Ray, Segment};
use crate::io::{Dataset, Query};
use std::fmt;
use std::str::FromStr;

/// SplitMix64-style mixing generator.
#[derive(Clone, Debug)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        self.next_u64() % bound
    }

    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo < hi);
        lo + self.below((hi - lo) as u64) as i64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Uniform,
    Clustered,
    Grid,
    Collinear,
}

impl Family {
    pub const ALL: [Family; 4] =
        [Family::Uniform, Family::Clustered, Family::Grid, Family::Collinear];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Uniform => "uniform",
            Family::Clustered => "clustered",
            Family::Grid => "grid",
            Family::Collinear => "collinear",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Family::Uniform),
            "clustered" => Ok(Family::Clustered),
            "grid" => Ok(Family::Grid),
            "collinear" => Ok(Family::Collinear),
            other => Err(format!(
                "unknown family `{other}` (expected uniform|clustered|grid|collinear)"
            )),
        }
    }
}

/// `n` distinct points of the given family on an integer grid.
pub fn points(family: Family, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = Rng::new(seed ^ 0xda7a5e7);
    let span = (8 * n.max(4)) as i64;
    let mut pts: Vec<Point> = Vec::new();
    let push_unique = |pts: &mut Vec<Point>, p: Point| {
        if !pts.contains(&p) {
            pts.push(p);
            true
        } else {
            false
        }
    };
    match family {
        Family::Uniform => {
            while pts.len() < n {
                let p = Point::ints(rng.range(-span, span), rng.range(-span, span));
                push_unique(&mut pts, p);
            }
        }
        Family::Clustered => {
            let k = (n / 8).max(1);
            let centers: Vec<(i64, i64)> = (0..k)
                .map(|_| (rng.range(-span, span), rng.range(-span, span)))
                .collect();
            let radius = (span / (k as i64 * 2).max(4)).max(2);
            while pts.len() < n {
                let (cx, cy) = centers[rng.below(k as u64) as usize];
                let p = Point::ints(
                    cx + rng.range(-radius, radius + 1),
                    cy + rng.range(-radius, radius + 1),
                );
                push_unique(&mut pts, p);
            }
        }
        Family::Grid => {
            // A jittered lattice: regular structure plus occasional
            // off-lattice points.
            let side = (n as f64).sqrt().ceil() as i64 + 1;
            let step = (2 * span / side).max(1);
            'fill: for gy in 0..side {
                for gx in 0..side {
                    if pts.len() >= n {
                        break 'fill;
                    }
                    let p = Point::ints(-span + gx * step, -span + gy * step);
                    push_unique(&mut pts, p);
                }
            }
            while pts.len() < n {
                let p = Point::ints(rng.range(-span, span), rng.range(-span, span));
                push_unique(&mut pts, p);
            }
        }
        Family::Collinear => {
            // Degenerate family: points packed onto shared lines and
            // shared coordinate values.
            let lines = (n / 6).max(2);
            while pts.len() < n * 2 / 3 {
                let x0 = rng.range(-span, span);
                let y0 = rng.range(-span, span);
                let dx = rng.range(-4, 5);
                let dy = rng.range(-4, 5);
                if dx == 0 && dy == 0 {
                    continue;
                }
                let len = 3 + rng.below(4) as i64;
                for t in 0..len {
                    if pts.len() >= n * 2 / 3 {
                        break;
                    }
                    push_unique(&mut pts, Point::ints(x0 + t * dx, y0 + t * dy));
                }
                let _ = lines;
            }
            // Shared x / shared y coordinates.
            while pts.len() < n {
                let fixed = rng.range(-span / 2, span / 2);
                let other = rng.range(-span, span);
                let p = if rng.below(2) == 0 {
                    Point::ints(fixed, other)
                } else {
                    Point::ints(other, fixed)
                };
                push_unique(&mut pts, p);
            }
        }
    }
    pts.truncate(n);
    pts
}

/// `n` segments whose 2n endpoints are distinct. When `disjoint` is set
/// the segments are pairwise disjoint (each lives in its own lattice
/// box), as the ray-shooting structure requires.
pub fn segments(family: Family, n: usize, seed: u64, disjoint: bool) -> Vec<Segment> {
    let mut rng = Rng::new(seed ^ 0x5e95e9);
    if disjoint {
        let side = (n as f64).sqrt().ceil() as i64 + 1;
        let box_size = 16i64;
        let mut segs = Vec::new();
        let mut boxes: Vec<(i64, i64)> = (0..side * side).map(|i| (i % side, i / side)).collect();
        // Deterministic shuffle so box order depends on the seed.
        for i in (1..boxes.len()).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            boxes.swap(i, j);
        }
        for &(bx, by) in boxes.iter().take(n) {
            let ox = bx * box_size;
            let oy = by * box_size;
            // Interior margin of 1 keeps neighbouring boxes disjoint.
            loop {
                let p = Point::ints(ox + rng.range(1, 15), oy + rng.range(1, 15));
                let q = Point::ints(ox + rng.range(1, 15), oy + rng.range(1, 15));
                if p != q {
                    segs.push(Segment::new(p, q));
                    break;
                }
            }
        }
        segs
    } else {
        let pts = points(family, 2 * n, seed ^ 0x33);
        pts.chunks(2).map(|c| Segment::new(c[0].clone(), c[1].clone())).collect()
    }
}

/// `n` non-degenerate triangles with corners drawn from the family.
pub fn triangles(family: Family, n: usize, seed: u64) -> Vec<[Point; 3]> {
    let pts = points(family, 3 * n + 8, seed ^ 0x7a1);
    let mut rng = Rng::new(seed ^ 0x7a2);
    let mut tris = Vec::new();
    let mut i = 0;
    while tris.len() < n {
        let (a, b, c) = if i + 2 < pts.len() {
            (pts[i].clone(), pts[i + 1].clone(), pts[i + 2].clone())
        } else {
            let m = pts.len() as u64;
            (
                pts[rng.below(m) as usize].clone(),
                pts[rng.below(m) as usize].clone(),
                pts[rng.below(m) as usize].clone(),
            )
        };
        i += 3;
        if crate::geom::orient(&a, &b, &c) != 0 {
            tris.push([a, b, c]);
        }
    }
    tris
}

pub fn dataset(family: Family, n: usize, seed: u64, disjoint_segments: bool) -> Dataset {
    Dataset {
        points: points(family, n, seed),
        segments: segments(family, n, seed.wrapping_add(1), disjoint_segments),
        triangles: triangles(family, n, seed.wrapping_add(2)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryKind {
    Triangle,
    Halfplane,
    Point,
    Line,
    Segment,
    Ray,
}

/// Query batch of one kind. A slice of the queries deliberately grazes
/// the dataset (lines through dataset points, rays through endpoints) to
/// exercise boundary conventions.
pub fn queries(kind: QueryKind, count: usize, seed: u64, ds: &Dataset) -> Vec<Query> {
    let mut rng = Rng::new(seed ^ 0x9e41);
    let span = 16 * (ds.points.len().max(ds.segments.len()).max(4)) as i64;
    let rnd_pt = |rng: &mut Rng| Point::ints(rng.range(-span, span), rng.range(-span, span));
    let data_pt = |rng: &mut Rng, ds: &Dataset| -> Option<Point> {
        if !ds.points.is_empty() {
            Some(ds.points[rng.below(ds.points.len() as u64) as usize].clone())
        } else if !ds.segments.is_empty() {
            let s = &ds.segments[rng.below(ds.segments.len() as u64) as usize];
            Some(if rng.below(2) == 0 { s.p.clone() } else { s.q.clone() })
        } else {
            None
        }
    };
    let mut out = Vec::new();
    while out.len() < count {
        let degenerate = rng.below(4) == 0;
        let q = match kind {
            QueryKind::Triangle => {
                let a = if degenerate {
                    data_pt(&mut rng, ds).unwrap_or_else(|| rnd_pt(&mut rng))
                } else {
                    rnd_pt(&mut rng)
                };
                let b = rnd_pt(&mut rng);
                let c = rnd_pt(&mut rng);
                if crate::geom::orient(&a, &b, &c) == 0 {
                    continue;
                }
                Query::Triangle([a, b, c])
            }
            QueryKind::Halfplane => {
                let (a, b) = if degenerate {
                    let a = data_pt(&mut rng, ds).unwrap_or_else(|| rnd_pt(&mut rng));
                    let b = data_pt(&mut rng, ds).unwrap_or_else(|| rnd_pt(&mut rng));
                    (a, b)
                } else {
                    (rnd_pt(&mut rng), rnd_pt(&mut rng))
                };
                if a == b {
                    continue;
                }
                let side = if rng.below(2) == 0 { 1 } else { -1 };
                Query::Halfplane(Line::through(&a, &b), side)
            }
            QueryKind::Point => {
                let p = if degenerate {
                    // On a triangle edge or corner when possible.
                    if !ds.triangles.is_empty() {
                        let t = &ds.triangles[rng.below(ds.triangles.len() as u64) as usize];
                        match rng.below(2) {
                            0 => t[0].clone(),
                            _ => t[0].midpoint(&t[1]),
                        }
                    } else {
                        rnd_pt(&mut rng)
                    }
                } else {
                    rnd_pt(&mut rng)
                };
                Query::Point(p)
            }
            QueryKind::Line => {
                let (a, b) = if degenerate {
                    let a = data_pt(&mut rng, ds).unwrap_or_else(|| rnd_pt(&mut rng));
                    (a, rnd_pt(&mut rng))
                } else {
                    (rnd_pt(&mut rng), rnd_pt(&mut rng))
                };
                if a == b {
                    continue;
                }
                Query::Line(Line::through(&a, &b))
            }
            QueryKind::Segment => {
                let (a, b) = if degenerate {
                    let a = data_pt(&mut rng, ds).unwrap_or_else(|| rnd_pt(&mut rng));
                    (a, rnd_pt(&mut rng))
                } else {
                    (rnd_pt(&mut rng), rnd_pt(&mut rng))
                };
                if a == b {
                    continue;
                }
                Query::Segment(Segment::new(a, b))
            }
            QueryKind::Ray => {
                let o = rnd_pt(&mut rng);
                let through_data = degenerate;
                let dir = if through_data {
                    match data_pt(&mut rng, ds) {
                        Some(t) if t != o => Dir::from_points(&o, &t),
                        _ => Dir::ints(rng.range(-9, 10).max(1), rng.range(-9, 10)),
                    }
                } else {
                    let dx = rng.range(-9, 10);
                    let dy = rng.range(-9, 10);
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    Dir::ints(dx, dy)
                };
                Query::Ray(Ray::new(o, dir))
            }
        };
        out.push(q);
    }
    out
}

/// Probe lines for crossing-number profiles: lines through dataset point
/// pairs plus fresh random lines.
pub fn probe_lines(count: usize, seed: u64, pts: &[Point], through_pairs: bool) -> Vec<Line> {
    let mut rng = Rng::new(seed ^ 0x11f);
    let span = 16 * pts.len().max(4) as i64;
    let mut out = Vec::new();
    while out.len() < count {
        let (a, b) = if through_pairs && pts.len() >= 2 {
            let i = rng.below(pts.len() as u64) as usize;
            let j = rng.below(pts.len() as u64) as usize;
            if i == j {
                continue;
            }
            (pts[i].clone(), pts[j].clone())
        } else {
            let a = Point::ints(rng.range(-span, span), rng.range(-span, span));
            let b = Point::ints(rng.range(-span, span), rng.range(-span, span));
            if a == b {
                continue;
            }
            (a, b)
        };
        out.push(Line::through(&a, &b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        for fam in Family::ALL {
            let a = dataset(fam, 32, 7, true);
            let b = dataset(fam, 32, 7, true);
            assert_eq!(a, b);
            let c = dataset(fam, 32, 8, true);
            assert_ne!(a, c, "family {fam} ignores the seed");
        }
    }

    #[test]
    fn points_distinct() {
        for fam in Family::ALL {
            let pts = points(fam, 64, 3);
            assert_eq!(pts.len(), 64);
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    assert_ne!(pts[i], pts[j]);
                }
            }
        }
    }

    #[test]
    fn collinear_family_is_degenerate() {
        let pts = points(Family::Collinear, 48, 5);
        // Some collinear triple must exist.
        let mut found = false;
        'outer: for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                for k in j + 1..pts.len() {
                    if crate::geom::orient(&pts[i], &pts[j], &pts[k]) == 0 {
                        found = true;
                        break 'outer;
                    }
                }
            }
        }
        assert!(found);
        // Some shared coordinate must exist.
        let shared_x = pts
            .iter()
            .enumerate()
            .any(|(i, p)| pts[i + 1..].iter().any(|q| q.x == p.x));
        assert!(shared_x);
    }

    #[test]
    fn disjoint_segments_are_disjoint() {
        let segs = segments(Family::Uniform, 40, 11, true);
        assert_eq!(segs.len(), 40);
        for i in 0..segs.len() {
            for j in i + 1..segs.len() {
                assert!(
                    !crate::geom::segments_intersect(&segs[i], &segs[j]),
                    "segments {i} and {j} intersect"
                );
            }
        }
    }

    #[test]
    fn query_batches() {
        let ds = dataset(Family::Uniform, 16, 2, false);
        for kind in [
            QueryKind::Triangle,
            QueryKind::Halfplane,
            QueryKind::Point,
            QueryKind::Line,
            QueryKind::Segment,
            QueryKind::Ray,
        ] {
            let qs = queries(kind, 50, 4, &ds);
            assert_eq!(qs.len(), 50);
            assert_eq!(qs, queries(kind, 50, 4, &ds));
        }
    }
}
