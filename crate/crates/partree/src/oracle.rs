//! Brute-force reference implementations.
//!
//! Everything here answers queries by direct enumeration over the input
//! objects using only the primitive predicates, deliberately sharing no
//! code path with the indexed structures it validates.

use crate::cell::{interiors_overlap, Halfplane, SimplexCell};
use crate::geom::{segments_intersect, Line, Point, Ray, Segment};
use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_traits::Zero;

/// Count of points satisfying every closed constraint.
pub fn count_in_simplex(points: &[Point], cons: &[Halfplane]) -> usize {
    points
        .iter()
        .filter(|p| cons.iter().all(|h| h.satisfied(p)))
        .count()
}

/// Closed triangle containment count for a query point, plus the ids.
pub fn stab_ids(triangles: &[[Point; 3]], q: &Point) -> Vec<usize> {
    triangles
        .iter()
        .enumerate()
        .filter(|(_, t)| triangle_contains(t, q))
        .map(|(i, _)| i)
        .collect()
}

pub fn triangle_contains(t: &[Point; 3], q: &Point) -> bool {
    let o1 = crate::geom::orient(&t[0], &t[1], q);
    let o2 = crate::geom::orient(&t[1], &t[2], q);
    let o3 = crate::geom::orient(&t[2], &t[0], q);
    (o1 >= 0 && o2 >= 0 && o3 >= 0) || (o1 <= 0 && o2 <= 0 && o3 <= 0)
}

/// Does any segment meet the query line (closed convention)?
pub fn detect_line(segments: &[Segment], l: &Line) -> bool {
    segments.iter().any(|s| l.side(&s.p) * l.side(&s.q) <= 0)
}

/// Ids of segments intersecting the query segment (closed; collinear
/// overlap counts).
pub fn seg_intersect_ids(segments: &[Segment], q: &Segment) -> Vec<usize> {
    segments
        .iter()
        .enumerate()
        .filter(|(_, s)| segments_intersect(s, q))
        .map(|(i, _)| i)
        .collect()
}

/// First segment hit by the ray: smallest hit parameter, ties broken by
/// smallest id. Returns `(id, parameter)`.
pub fn first_hit(segments: &[Segment], ray: &Ray) -> Option<(usize, Scalar)> {
    let mut best: Option<(usize, Scalar)> = None;
    for (i, s) in segments.iter().enumerate() {
        if let Some(t) = ray_segment_hit(ray, s) {
            let better = match &best {
                None => true,
                Some((_, bt)) => t < *bt,
            };
            if better {
                best = Some((i, t));
            }
        }
    }
    best
}

/// Smallest `t >= 0` with `ray.at(t)` on the closed segment, handling
/// the collinear case (nearest endpoint) and origin-on-segment
/// (parameter zero).
pub fn ray_segment_hit(ray: &Ray, s: &Segment) -> Option<Scalar> {
    if s.contains(&ray.origin) {
        return Some(crate::scalar::int(0));
    }
    let line = s.supporting_line();
    let denom = &line.a * &ray.dir.x + &line.b * &ray.dir.y;
    if crate::scalar::sgn_int(&denom) == 0 {
        // Ray parallel to (or collinear with) the segment.
        if line.side(&ray.origin) != 0 {
            return None;
        }
        // Collinear: nearest endpoint ahead of the origin.
        let mut best: Option<Scalar> = None;
        for e in [&s.p, &s.q] {
            if let Some(t) = param_along(ray, e) {
                if best.as_ref().map_or(true, |b| t < *b) {
                    best = Some(t);
                }
            }
        }
        return best;
    }
    let t = ray.hit_line(&line)?;
    let hit = ray.at(&t);
    if s.contains(&hit) {
        Some(t)
    } else {
        None
    }
}

/// Parameter of a point on the ray, if it lies ahead of the origin.
fn param_along(ray: &Ray, p: &Point) -> Option<Scalar> {
    let dx = &p.x - &ray.origin.x;
    let dy = &p.y - &ray.origin.y;
    let t = if !ray.dir.x.is_zero() {
        dx / crate::scalar::big(ray.dir.x.clone())
    } else if !ray.dir.y.is_zero() {
        dy / crate::scalar::big(ray.dir.y.clone())
    } else {
        unreachable!()
    };
    // The point must actually be on the ray line.
    let at = ray.at(&t);
    if at == *p && t >= crate::scalar::int(0) {
        Some(t)
    } else {
        None
    }
}

/// Number of cells of a partition crossed by a line.
pub fn crossings(cells: &[SimplexCell], l: &Line) -> usize {
    cells.iter().filter(|c| c.crossed_by(l)).count()
}

#[derive(Debug)]
pub enum CuttingViolation {
    /// Cell index and its crossing weight; the bound `weight * r <= total`
    /// fails.
    CrossingBound { cell: usize, weight: BigInt },
    /// Input point not covered by any cell.
    Uncovered { point: Point },
    /// Two cells with overlapping interiors.
    Overlap { a: usize, b: usize },
    /// Cell escapes the parent region.
    OutsideParent { cell: usize },
}

/// Independent check of the (1/r)-cutting contract: for every cell, the
/// total weight of lines crossing it satisfies `weight * r <= total_weight`
/// (exact rational comparison with rational `r`); cells cover the given
/// points and are pairwise interior-disjoint.
pub fn verify_cutting(
    lines: &[(Line, BigInt)],
    cells: &[SimplexCell],
    r: &Scalar,
    cover_points: &[Point],
    parent: Option<&SimplexCell>,
) -> Result<(), CuttingViolation> {
    let total: BigInt = lines.iter().map(|(_, w)| w.clone()).sum();
    for (i, c) in cells.iter().enumerate() {
        let w: BigInt = lines
            .iter()
            .filter(|(l, _)| c.crossed_by(l))
            .map(|(_, w)| w.clone())
            .sum();
        // w * r <= total  <=>  w * r_num <= total * r_den
        if &w * r.numer() > &total * r.denom() {
            return Err(CuttingViolation::CrossingBound { cell: i, weight: w });
        }
        if let Some(parent) = parent {
            for h in parent.constraints() {
                if !c.inside_halfplane(h) {
                    return Err(CuttingViolation::OutsideParent { cell: i });
                }
            }
        }
    }
    for p in cover_points {
        if !cells.iter().any(|c| c.contains(p)) {
            return Err(CuttingViolation::Uncovered { point: p.clone() });
        }
    }
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            if interiors_overlap(&cells[i], &cells[j]) {
                return Err(CuttingViolation::Overlap { a: i, b: j });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Dir;
    use crate::scalar::{int, rat};

    #[test]
    fn count_in_halfplane() {
        // Points 0..=4 on the x-axis; halfplane x >= 2 keeps 3 of them.
        let pts: Vec<Point> = (0..5).map(|i| Point::ints(i, 0)).collect();
        let h = Halfplane::new(Line::vertical(&int(2)), 1);
        assert_eq!(count_in_simplex(&pts, &[h]), 3);
    }

    #[test]
    fn stab_counts() {
        let tris = vec![
            [Point::ints(0, 0), Point::ints(4, 0), Point::ints(0, 4)],
            [Point::ints(1, 1), Point::ints(5, 1), Point::ints(1, 5)],
        ];
        assert_eq!(stab_ids(&tris, &Point::ints(1, 1)), vec![0, 1]);
        // On the first triangle's hypotenuse only.
        assert_eq!(stab_ids(&tris, &Point::ints(4, 0)), vec![0]);
        assert_eq!(stab_ids(&tris, &Point::ints(-1, 0)), Vec::<usize>::new());
    }

    #[test]
    fn first_hit_orders_and_ties() {
        let segs = vec![
            Segment::new(Point::ints(5, -1), Point::ints(5, 1)),
            Segment::new(Point::ints(3, -1), Point::ints(3, 1)),
            // Shares the hit point (3, 0) with segment 1.
            Segment::new(Point::ints(3, 0), Point::ints(4, 5)),
        ];
        let ray = Ray::new(Point::ints(0, 0), Dir::ints(1, 0));
        let (id, t) = first_hit(&segs, &ray).unwrap();
        assert_eq!((id, t), (1, int(3)));
        // Origin on a segment: parameter 0.
        let ray0 = Ray::new(Point::ints(3, 0), Dir::ints(1, 0));
        let (id0, t0) = first_hit(&segs, &ray0).unwrap();
        assert_eq!((id0, t0), (1, int(0)));
        // Collinear ray: nearest endpoint.
        let h = vec![Segment::new(Point::ints(4, 0), Point::ints(9, 0))];
        let (_, t) = first_hit(&h, &Ray::new(Point::ints(0, 0), Dir::ints(1, 0))).unwrap();
        assert_eq!(t, int(4));
        // Miss.
        let miss = Ray::new(Point::ints(0, 0), Dir::ints(-1, 0));
        assert!(first_hit(&segs, &miss).is_none());
    }

    #[test]
    fn cutting_verifier_flags_violations() {
        let lines: Vec<(Line, BigInt)> = (0..4)
            .map(|i| (Line::vertical(&int(2 * i + 1)), BigInt::from(1)))
            .collect();
        // A single cell (the plane) is crossed by everything: fails any
        // r > 1.
        let plane = vec![SimplexCell::plane()];
        assert!(matches!(
            verify_cutting(&lines, &plane, &int(2), &[], None),
            Err(CuttingViolation::CrossingBound { .. })
        ));
        // Vertical slabs at the line positions: each interior cell is
        // crossed by no line, so any r passes the crossing bound.
        let mut cells = Vec::new();
        let mut rest = vec![SimplexCell::plane()];
        for (l, _) in &lines {
            let mut next = Vec::new();
            for c in rest {
                if c.crossed_by(l) {
                    let sc = c.split(l);
                    cells.extend(sc.minus);
                    next.extend(sc.plus);
                } else {
                    next.push(c);
                }
            }
            rest = next;
        }
        cells.extend(rest);
        let probe: Vec<Point> = (0..10).map(|i| Point::ints(i, i)).collect();
        verify_cutting(&lines, &cells, &rat(9, 2), &probe, None).unwrap();
    }
}
