//! Generalized simplex cells: convex regions cut out by at most three
//! closed halfplanes. Bounded cells are triangles; unbounded cells are
//! the plane, halfplanes, strips, wedges and truncated wedges.
//!
//! Every cell carries a *frame*: a finite generator representation
//! `region = conv(points) + cone(dirs)` plus a strictly interior witness.
//! All sidedness and crossing predicates reduce to exact sign tests over
//! the generators, so unbounded cells never need symbolic limits.

use crate::geom::{Dir, Line, Point, Segment};
use crate::scalar::{int, Scalar};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One closed halfplane: `side * (a*x + b*y + c) >= 0`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Halfplane {
    pub line: Line,
    pub side: i8,
}

impl Halfplane {
    pub fn new(line: Line, side: i8) -> Self {
        assert!(side == 1 || side == -1);
        Halfplane { line, side }
    }

    pub fn satisfied(&self, p: &Point) -> bool {
        self.line.side(p) * self.side >= 0
    }

    pub fn strictly_satisfied(&self, p: &Point) -> bool {
        self.line.side(p) * self.side > 0
    }

    /// Sign of the constraint form at `p`: positive inside.
    pub fn eval_sign(&self, p: &Point) -> i8 {
        self.line.side(p) * self.side
    }

    pub fn eval_dir_sign(&self, d: &Dir) -> i8 {
        self.line.side_dir(d) * self.side
    }
}

/// Generator frame of a convex polyhedron.
#[derive(Clone, Debug)]
pub struct Frame {
    /// Convex-hull generators (the vertices when the region has any,
    /// otherwise base points on the boundary lines, or the origin for
    /// the whole plane).
    pub points: Vec<Point>,
    /// Recession-cone generators (cone(dirs) is exactly the recession
    /// cone of the region).
    pub dirs: Vec<Dir>,
    /// Vertices in boundary-chain order.
    pub verts: Vec<Point>,
    /// Recession directions at the two open ends of the boundary chain,
    /// present when the region is unbounded and has vertices.
    pub end_dirs: Option<(Dir, Dir)>,
    /// A point of the region; strictly interior whenever the region is
    /// full-dimensional.
    pub witness: Point,
}

/// A cell of a partition: at most three halfplane constraints.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "CellRepr", into = "CellRepr")]
pub struct SimplexCell {
    cons: Vec<Halfplane>,
    frame: Frame,
}

#[derive(Serialize, Deserialize)]
struct CellRepr {
    cons: Vec<Halfplane>,
}

impl From<CellRepr> for SimplexCell {
    fn from(r: CellRepr) -> Self {
        SimplexCell::from_constraints(r.cons).expect("invalid serialized cell")
    }
}

impl From<SimplexCell> for CellRepr {
    fn from(c: SimplexCell) -> Self {
        CellRepr { cons: c.cons }
    }
}

impl PartialEq for SimplexCell {
    fn eq(&self, other: &Self) -> bool {
        self.cons == other.cons
    }
}
impl Eq for SimplexCell {}

impl SimplexCell {
    pub fn plane() -> Self {
        SimplexCell::from_constraints(Vec::new()).unwrap()
    }

    pub fn triangle(p: &Point, q: &Point, r: &Point) -> Self {
        assert!(crate::geom::orient(p, q, r) != 0, "degenerate triangle");
        let centroid = Point::new(
            (&p.x + &q.x + &r.x) / int(3),
            (&p.y + &q.y + &r.y) / int(3),
        );
        let cons = [(p, q), (q, r), (r, p)]
            .iter()
            .map(|(u, v)| {
                let line = Line::through(u, v);
                let s = line.side(&centroid);
                assert!(s != 0);
                Halfplane::new(line, s)
            })
            .collect();
        SimplexCell::from_constraints(cons).unwrap()
    }

    /// Builds a cell from explicit constraints. Returns `None` when the
    /// region is empty or lower-dimensional. Redundant constraints are
    /// removed; the result keeps at most three.
    pub fn from_constraints(cons: Vec<Halfplane>) -> Option<Self> {
        let poly = Polyhedron::from_constraints(&cons)?;
        if poly.cons.len() > 3 {
            return None;
        }
        let frame = poly.frame;
        Some(SimplexCell { cons: poly.cons, frame })
    }

    pub fn constraints(&self) -> &[Halfplane] {
        &self.cons
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn is_bounded(&self) -> bool {
        self.frame.dirs.is_empty()
    }

    pub fn interior_witness(&self) -> &Point {
        &self.frame.witness
    }

    /// Closed membership.
    pub fn contains(&self, p: &Point) -> bool {
        self.cons.iter().all(|h| h.satisfied(p))
    }

    pub fn strictly_contains(&self, p: &Point) -> bool {
        self.cons.iter().all(|h| h.strictly_satisfied(p))
    }

    /// Sign classification of the linear form of `line` over the cell:
    /// `(sup_positive, inf_negative)` where `sup_positive` means the form
    /// takes a strictly positive value somewhere on the cell.
    pub fn form_signs(&self, line: &Line) -> (bool, bool) {
        let mut pos = false;
        let mut neg = false;
        for p in &self.frame.points {
            match line.side(p) {
                1 => pos = true,
                -1 => neg = true,
                _ => {}
            }
        }
        for d in &self.frame.dirs {
            match line.side_dir(d) {
                1 => pos = true,
                -1 => neg = true,
                _ => {}
            }
        }
        (pos, neg)
    }

    /// A line crosses the cell when it meets the interior (equivalently,
    /// the cell has points strictly on both sides).
    pub fn crossed_by(&self, line: &Line) -> bool {
        let (pos, neg) = self.form_signs(line);
        pos && neg
    }

    /// The whole cell satisfies the closed constraint.
    pub fn inside_halfplane(&self, h: &Halfplane) -> bool {
        let mut bad = false;
        for p in &self.frame.points {
            if h.eval_sign(p) < 0 {
                bad = true;
            }
        }
        for d in &self.frame.dirs {
            if h.eval_dir_sign(d) < 0 {
                bad = true;
            }
        }
        !bad
    }

    /// The whole cell strictly violates the constraint.
    pub fn outside_halfplane(&self, h: &Halfplane) -> bool {
        self.frame.points.iter().all(|p| h.eval_sign(p) < 0)
            && self.frame.dirs.iter().all(|d| h.eval_dir_sign(d) <= 0)
    }

    /// Closed segment/cell intersection test.
    pub fn intersects_segment(&self, s: &Segment) -> bool {
        if self.contains(&s.p) || self.contains(&s.q) {
            return true;
        }
        // Both endpoints outside: the segment meets the cell only if it
        // enters through a boundary edge. Clip the segment's parameter
        // interval against every constraint.
        let mut lo = int(0);
        let mut hi = int(1);
        for h in &self.cons {
            let fp = signed_value(&h.line, &s.p) * int(h.side as i64);
            let fq = signed_value(&h.line, &s.q) * int(h.side as i64);
            // f(t) = fp + t*(fq - fp) >= 0
            let d = &fq - &fp;
            if d.is_zero() {
                if fp < int(0) {
                    return false;
                }
            } else if d > int(0) {
                let bound = -&fp / &d;
                if bound > lo {
                    lo = bound;
                }
            } else {
                let bound = -&fp / &d;
                if bound < hi {
                    hi = bound;
                }
            }
        }
        lo <= hi
    }

    pub fn contains_segment(&self, s: &Segment) -> bool {
        self.contains(&s.p) && self.contains(&s.q)
    }

    /// Splits the cell by a crossing line into the piece on the
    /// non-negative side and the piece on the non-positive side, each
    /// re-triangulated into at most two cells.
    pub fn split(&self, line: &Line) -> SplitCells {
        assert!(self.crossed_by(line), "split by non-crossing line");
        let plus = self.clipped_piece(line, 1);
        let minus = self.clipped_piece(line, -1);
        SplitCells { plus, minus }
    }

    fn clipped_piece(&self, line: &Line, side: i8) -> Vec<SimplexCell> {
        let mut cons = self.cons.clone();
        cons.push(Halfplane::new(line.clone(), side));
        let poly = Polyhedron::from_constraints(&cons)
            .expect("clip of a crossed cell must be full-dimensional");
        poly.into_cells()
    }
}

pub struct SplitCells {
    pub plus: Vec<SimplexCell>,
    pub minus: Vec<SimplexCell>,
}

/// Exact value of the line form at a point (not just its sign).
fn signed_value(l: &Line, p: &Point) -> Scalar {
    crate::scalar::big(l.a.clone()) * &p.x + crate::scalar::big(l.b.clone()) * &p.y
        + crate::scalar::big(l.c.clone())
}

/// Intermediate convex polyhedron with any number of constraints;
/// used for clipping and for interior-overlap tests.
pub struct Polyhedron {
    pub cons: Vec<Halfplane>,
    pub frame: Frame,
}

#[derive(Clone)]
struct BoundaryPiece {

    base: Point,
    dir: Dir,
    lo: Option<Scalar>,
    hi: Option<Scalar>,
}

impl BoundaryPiece {
    fn at(&self, t: &Scalar) -> Point {
        self.dir.offset(&self.base, t)
    }
    fn lo_point(&self) -> Option<Point> {
        self.lo.as_ref().map(|t| self.at(t))
    }
    fn hi_point(&self) -> Option<Point> {
        self.hi.as_ref().map(|t| self.at(t))
    }
}

impl Polyhedron {
    /// Computes the irredundant constraint set and the generator frame.
    /// Returns `None` when the region is empty or not full-dimensional
    /// (detected via the final witness).
    pub fn from_constraints(cons: &[Halfplane]) -> Option<Polyhedron> {
        let mut cons: Vec<Halfplane> = {
            let mut seen = Vec::new();
            for h in cons {
                if !seen.contains(h) {
                    seen.push(h.clone());
                }
            }
            seen
        };
        let original: Vec<Halfplane> = cons.clone();

        // Drop constraints whose boundary contributes no 1-dimensional
        // piece. Dropping can only enlarge the region; when the true
        // region is full-dimensional it provably never does, and the
        // final strict-witness check rejects the degenerate cases.
        'restart: loop {
            for i in 0..cons.len() {
                match feasible_interval(&cons, i) {
                    Interval::Empty | Interval::Single => {
                        cons.remove(i);
                        continue 'restart;
                    }
                    Interval::Range(_, _) => {}
                }
            }
            break;
        }

        let mut pieces = Vec::new();
        for i in 0..cons.len() {
            if let Interval::Range(lo, hi) = feasible_interval(&cons, i) {
                let (base, dir) = line_param(&cons[i].line);
                pieces.push(BoundaryPiece { base, dir, lo, hi });
            } else {
                unreachable!("redundancy loop left a degenerate piece");
            }
        }

        let frame = build_frame(&cons, &pieces)?;
        if !original.iter().all(|h| h.strictly_satisfied(&frame.witness)) {
            return None;
        }
        Some(Polyhedron { cons, frame })
    }

    /// Decomposes into cells of at most three constraints each: the
    /// polyhedron itself if already simple, otherwise a fan of triangles
    /// from the lexicographically smallest vertex plus, when unbounded,
    /// one truncated wedge carrying the recession directions.
    pub fn into_cells(self) -> Vec<SimplexCell> {
        if self.cons.len() <= 3 {
            return vec![SimplexCell { cons: self.cons, frame: self.frame }];
        }
        let verts = &self.frame.verts;
        let mut out = Vec::new();
        if let Some((d_start, d_end)) = &self.frame.end_dirs {
            // Unbounded: one truncated wedge over the chain's end
            // vertices; what remains is the polygon over the chain
            // closed by the wedge's base edge.
            assert!(verts.len() >= 2);
            out.push(trunc_wedge(&verts[0], verts.last().unwrap(), d_start, d_end));
        }
        // Fan the (closed) vertex cycle from its lexicographically
        // smallest corner.
        let k = verts.len();
        if k >= 3 {
            let m = lex_min_index(verts);
            for i in 0..k {
                let j = (i + 1) % k;
                if i == m || j == m {
                    continue;
                }
                out.push(SimplexCell::triangle(&verts[m], &verts[i], &verts[j]));
            }
        }
        out
    }
}

fn lex_min_index(verts: &[Point]) -> usize {
    let mut m = 0;
    for i in 1..verts.len() {
        if (&verts[i].x, &verts[i].y) < (&verts[m].x, &verts[m].y) {
            m = i;
        }
    }
    m
}

/// Wedge or truncated wedge over base segment `v0 v1` (or apex when the
/// two coincide) with recession directions `d0` at `v0`, `d1` at `v1`.
fn trunc_wedge(v0: &Point, v1: &Point, d0: &Dir, d1: &Dir) -> SimplexCell {
    let sum = d0.add(d1).expect("opposite recession directions at a vertex chain");
    let witness = sum.offset(&v0.midpoint(v1), &int(1));
    let mut cons = Vec::new();
    if v0 != v1 {
        let base = Line::through(v0, v1);
        let s = base.side(&witness);
        assert!(s != 0);
        cons.push(Halfplane::new(base, s));
    }
    for (v, d) in [(v0, d0), (v1, d1)] {
        let far = d.offset(v, &int(1));
        let l = Line::through(v, &far);
        let s = l.side(&witness);
        if s != 0 {
            cons.push(Halfplane::new(l, s));
        }
    }
    SimplexCell::from_constraints(cons).expect("degenerate wedge")
}

enum Interval {
    Empty,
    Single,
    Range(Option<Scalar>, Option<Scalar>),
}

fn line_param(l: &Line) -> (Point, Dir) {
    let base = if !l.b.is_zero() {
        Point::new(int(0), Scalar::new(-l.c.clone(), l.b.clone()))
    } else {
        Point::new(Scalar::new(-l.c.clone(), l.a.clone()), int(0))
    };
    (base, l.direction())
}

/// Feasible parameter interval of constraint `i`'s boundary line under
/// all other constraints.
fn feasible_interval(cons: &[Halfplane], i: usize) -> Interval {
    let (base, dir) = line_param(&cons[i].line);
    let mut lo: Option<Scalar> = None;
    let mut hi: Option<Scalar> = None;
    for (j, h) in cons.iter().enumerate() {
        if j == i {
            continue;
        }
        // Constraint value along the line: beta + t*alpha >= 0.
        let alpha = crate::scalar::big(
            (&h.line.a * &dir.x + &h.line.b * &dir.y) * num_bigint::BigInt::from(h.side),
        );
        let beta = signed_value(&h.line, &base) * int(h.side as i64);
        if alpha.is_zero() {
            if beta < int(0) {
                return Interval::Empty;
            }
        } else if alpha > int(0) {
            let bound = -&beta / &alpha;
            if lo.as_ref().map_or(true, |l| bound > *l) {
                lo = Some(bound);
            }
        } else {
            let bound = -&beta / &alpha;
            if hi.as_ref().map_or(true, |h| bound < *h) {
                hi = Some(bound);
            }
        }
    }
    match (&lo, &hi) {
        (Some(l), Some(h)) if l > h => Interval::Empty,
        (Some(l), Some(h)) if l == h => Interval::Single,
        _ => Interval::Range(lo, hi),
    }
}

fn build_frame(cons: &[Halfplane], pieces: &[BoundaryPiece]) -> Option<Frame> {
    if cons.is_empty() {
        let o = Point::ints(0, 0);
        return Some(Frame {
            points: vec![o.clone()],
            dirs: vec![Dir::ints(1, 0), Dir::ints(-1, 0), Dir::ints(0, 1), Dir::ints(0, -1)],
            verts: Vec::new(),
            end_dirs: None,
            witness: o,
        });
    }

    let mut verts: Vec<Point> = Vec::new();
    let mut dirs: Vec<Dir> = Vec::new();
    for p in pieces {
        for v in [p.lo_point(), p.hi_point()].into_iter().flatten() {
            if !verts.contains(&v) {
                verts.push(v);
            }
        }
        if p.hi.is_none() {
            push_dir(&mut dirs, p.dir.clone());
        }
        if p.lo.is_none() {
            push_dir(&mut dirs, p.dir.neg());
        }
    }

    if verts.is_empty() {
        return frame_without_vertices(cons, pieces, dirs);
    }

    // Chain the vertices along the boundary by walking the pieces.
    let (chain, end_dirs) = walk_chain(pieces)?;
    debug_assert_eq!(chain.len(), verts.len());

    let witness = match &end_dirs {
        None => centroid(&chain),
        Some((d0, d1)) => {
            let sum = d0.add(d1)?;
            sum.offset(&chain[0].midpoint(chain.last().unwrap()), &int(1))
        }
    };

    Some(Frame { points: chain.clone(), dirs, verts: chain, end_dirs, witness })
}

fn frame_without_vertices(
    cons: &[Halfplane],
    pieces: &[BoundaryPiece],
    mut dirs: Vec<Dir>,
) -> Option<Frame> {
    let points: Vec<Point> = pieces.iter().map(|p| p.base.clone()).collect();
    let witness = match cons.len() {
        1 => {
            // Halfplane: base point moved along the inward normal, which
            // is also an extra recession generator.
            let h = &cons[0];
            let n = Dir::new(
                &h.line.a * num_bigint::BigInt::from(h.side),
                &h.line.b * num_bigint::BigInt::from(h.side),
            );
            let w = n.offset(&points[0], &int(1));
            push_dir(&mut dirs, n);
            w
        }
        2 => points[0].midpoint(&points[1]),
        _ => return None,
    };
    Some(Frame { points, dirs, verts: Vec::new(), end_dirs: None, witness })
}

fn push_dir(dirs: &mut Vec<Dir>, d: Dir) {
    if !dirs.contains(&d) {
        dirs.push(d);
    }
}

fn centroid(pts: &[Point]) -> Point {
    let n = int(pts.len() as i64);
    let mut x = int(0);
    let mut y = int(0);
    for p in pts {
        x += &p.x;
        y += &p.y;
    }
    Point::new(x / &n, y / &n)
}

/// Walks the boundary pieces into a vertex chain. Returns the ordered
/// vertices and, when unbounded, the recession directions at the two
/// open ends.
fn walk_chain(pieces: &[BoundaryPiece]) -> Option<(Vec<Point>, Option<(Dir, Dir)>)> {
    // Index pieces by their finite endpoints.
    let mut at: BTreeMap<Point, Vec<usize>> = BTreeMap::new();
    for (i, p) in pieces.iter().enumerate() {
        for v in [p.lo_point(), p.hi_point()].into_iter().flatten() {
            at.entry(v).or_default().push(i);
        }
    }
    let rays: Vec<usize> = pieces
        .iter()
        .enumerate()
        .filter(|(_, p)| p.lo.is_none() || p.hi.is_none())
        .map(|(i, _)| i)
        .collect();

    if rays.is_empty() {
        // Bounded: walk the cycle starting from the lexicographically
        // smallest vertex.
        let start = at.keys().next()?.clone();
        let mut chain = vec![start.clone()];
        let mut prev_piece = usize::MAX;
        let mut cur = start.clone();
        loop {
            let cand = &at[&cur];
            let &next_piece = cand.iter().find(|&&i| i != prev_piece)?;
            let p = &pieces[next_piece];
            let lo = p.lo_point()?;
            let hi = p.hi_point()?;
            let next = if lo == cur { hi } else { lo };
            if next == start {
                break;
            }
            chain.push(next.clone());
            prev_piece = next_piece;
            cur = next;
        }
        Some((chain, None))
    } else {
        if rays.len() != 2 {
            return None;
        }
        // Deterministic start: the ray piece with the smaller unbounded
        // direction.
        let ray_dir = |i: usize| -> Dir {
            let p = &pieces[i];
            if p.hi.is_none() {
                p.dir.clone()
            } else {
                p.dir.neg()
            }
        };
        let (start_ray, end_ray) = {
            let (a, b) = (rays[0], rays[1]);
            if (ray_dir(a).x.clone(), ray_dir(a).y.clone())
                <= (ray_dir(b).x.clone(), ray_dir(b).y.clone())
            {
                (a, b)
            } else {
                (b, a)
            }
        };
        let p = &pieces[start_ray];
        let first = p.lo_point().or_else(|| p.hi_point())?;
        let mut chain = vec![first.clone()];
        let mut prev_piece = start_ray;
        let mut cur = first;
        loop {
            let cand = &at[&cur];
            let next_piece = match cand.iter().find(|&&i| i != prev_piece) {
                Some(&i) => i,
                None => break, // single-vertex wedge
            };
            if next_piece == end_ray {
                break;
            }
            let piece = &pieces[next_piece];
            let lo = piece.lo_point()?;
            let hi = piece.hi_point()?;
            let next = if lo == cur { hi } else { lo };
            chain.push(next.clone());
            prev_piece = next_piece;
            cur = next;
        }
        Some((chain, Some((ray_dir(start_ray), ray_dir(end_ray)))))
    }
}

/// Do the interiors of two cells intersect?
pub fn interiors_overlap(a: &SimplexCell, b: &SimplexCell) -> bool {
    let mut cons = a.constraints().to_vec();
    cons.extend_from_slice(b.constraints());
    Polyhedron::from_constraints(&cons).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::orient;
    use crate::scalar::rat;

    fn tri() -> SimplexCell {
        SimplexCell::triangle(&Point::ints(0, 0), &Point::ints(8, 0), &Point::ints(0, 8))
    }

    #[test]
    fn triangle_membership() {
        let t = tri();
        assert!(t.contains(&Point::ints(1, 1)));
        assert!(t.contains(&Point::ints(0, 0)));
        assert!(t.contains(&Point::ints(4, 4))); // on hypotenuse
        assert!(!t.contains(&Point::ints(5, 5)));
        assert!(t.is_bounded());
        assert!(t.strictly_contains(t.interior_witness()));
    }

    #[test]
    fn plane_and_halfplane() {
        let pl = SimplexCell::plane();
        assert!(pl.contains(&Point::ints(-1000, 1000)));
        assert!(!pl.is_bounded());
        let h = SimplexCell::from_constraints(vec![Halfplane::new(
            Line::through(&Point::ints(0, 0), &Point::ints(1, 0)),
            1,
        )])
        .unwrap();
        assert!(h.contains(&Point::ints(5, 3)) || h.contains(&Point::ints(5, -3)));
        assert!(h.contains(&Point::ints(7, 0)));
        assert!(!h.is_bounded());
        assert!(h.strictly_contains(h.interior_witness()));
    }

    #[test]
    fn crossing_predicate() {
        let t = tri();
        let l = Line::vertical(&int(4));
        assert!(t.crossed_by(&l));
        let far = Line::vertical(&int(9));
        assert!(!t.crossed_by(&far));
        // Line through a vertex only: does not meet the interior.
        let touch = Line::through(&Point::ints(0, 0), &Point::ints(-1, 1));
        assert!(!t.crossed_by(&touch));
        // Line along an edge: not crossing.
        let edge = Line::through(&Point::ints(0, 0), &Point::ints(1, 0));
        assert!(!t.crossed_by(&edge));
    }

    #[test]
    fn split_triangle_counts() {
        let t = tri();
        // Vertical through the interior: one side is a triangle, the
        // other a quad split into two triangles.
        let sc = t.split(&Line::vertical(&int(4)));
        assert_eq!(sc.plus.len() + sc.minus.len(), 3);
        for c in sc.plus.iter().chain(sc.minus.iter()) {
            assert!(c.is_bounded());
            assert!(c.constraints().len() == 3);
        }
        // Line through a vertex: exactly two triangles.
        let through = Line::through(&Point::ints(0, 0), &Point::ints(2, 1));
        let sc = t.split(&through);
        assert_eq!(sc.plus.len() + sc.minus.len(), 2);
    }

    #[test]
    fn split_plane() {
        let pl = SimplexCell::plane();
        let sc = pl.split(&Line::through(&Point::ints(0, 0), &Point::ints(1, 2)));
        assert_eq!(sc.plus.len(), 1);
        assert_eq!(sc.minus.len(), 1);
        for c in sc.plus.iter().chain(sc.minus.iter()) {
            assert_eq!(c.constraints().len(), 1);
        }
    }

    #[test]
    fn split_halfplane_to_wedges() {
        let h = SimplexCell::from_constraints(vec![Halfplane::new(
            Line::through(&Point::ints(0, 0), &Point::ints(1, 0)),
            1,
        )])
        .unwrap();
        let sc = h.split(&Line::vertical(&int(3)));
        assert_eq!(sc.plus.len(), 1);
        assert_eq!(sc.minus.len(), 1);
        for c in sc.plus.iter().chain(sc.minus.iter()) {
            assert_eq!(c.constraints().len(), 2);
            assert!(!c.is_bounded());
            assert!(c.strictly_contains(c.interior_witness()));
        }
    }

    #[test]
    fn split_strip() {
        let l1 = Line::through(&Point::ints(0, 0), &Point::ints(1, 0));
        let l2 = Line::through(&Point::ints(0, 4), &Point::ints(1, 4));
        let strip = SimplexCell::from_constraints(vec![
            Halfplane::new(l1, 1),
            Halfplane::new(l2, -1),
        ])
        .unwrap();
        assert!(strip.contains(&Point::ints(100, 2)));
        assert!(!strip.contains(&Point::ints(0, 5)));
        let sc = strip.split(&Line::vertical(&int(0)));
        assert_eq!(sc.plus.len() + sc.minus.len(), 2);
        for c in sc.plus.iter().chain(sc.minus.iter()) {
            assert_eq!(c.constraints().len(), 3);
            assert!(!c.is_bounded());
        }
    }

    #[test]
    fn split_preserves_region() {
        // Points on either side land in exactly the matching pieces and
        // every point of the cell lands in at least one piece.
        let t = tri();
        let l = Line::vertical(&rat(5, 2));
        let sc = t.split(&l);
        for x in 0..9 {
            for y in 0..9 {
                let p = Point::ints(x, y);
                if !t.contains(&p) {
                    continue;
                }
                let n = sc
                    .plus
                    .iter()
                    .chain(sc.minus.iter())
                    .filter(|c| c.contains(&p))
                    .count();
                assert!(n >= 1, "lost point {:?}", p);
            }
        }
    }

    #[test]
    fn unbounded_split_preserves_region() {
        let pl = SimplexCell::plane();
        let mut cells = vec![pl];
        let cuts = [
            Line::through(&Point::ints(0, 0), &Point::ints(3, 1)),
            Line::through(&Point::ints(1, 5), &Point::ints(2, -4)),
            Line::vertical(&int(2)),
            Line::through(&Point::ints(0, 2), &Point::ints(5, 2)),
        ];
        for cut in &cuts {
            let mut next = Vec::new();
            for c in cells {
                if c.crossed_by(cut) {
                    let sc = c.split(cut);
                    next.extend(sc.plus);
                    next.extend(sc.minus);
                } else {
                    next.push(c);
                }
            }
            cells = next;
        }
        // Every probe point is covered; interiors are pairwise disjoint.
        for x in -6..7 {
            for y in -6..7 {
                let p = Point::ints(x, y);
                assert!(cells.iter().any(|c| c.contains(&p)), "lost {:?}", p);
            }
        }
        for i in 0..cells.len() {
            for j in i + 1..cells.len() {
                assert!(
                    !interiors_overlap(&cells[i], &cells[j]),
                    "cells {} and {} overlap",
                    i,
                    j
                );
            }
        }
        for c in &cells {
            assert!(c.strictly_contains(c.interior_witness()));
            assert!(c.constraints().len() <= 3);
        }
    }

    #[test]
    fn overlap_detection() {
        let a = tri();
        let b = SimplexCell::triangle(&Point::ints(4, 4), &Point::ints(12, 4), &Point::ints(4, 12));
        let c = SimplexCell::triangle(&Point::ints(1, 1), &Point::ints(2, 1), &Point::ints(1, 2));
        assert!(interiors_overlap(&a, &c)); // nested
        assert!(!interiors_overlap(&a, &b)); // touch at (4,4) only
        let d = SimplexCell::triangle(&Point::ints(3, 3), &Point::ints(12, 4), &Point::ints(4, 12));
        assert!(interiors_overlap(&a, &d));
        // Shared edge, opposite sides.
        let e = SimplexCell::triangle(&Point::ints(0, 0), &Point::ints(8, 0), &Point::ints(4, -5));
        assert!(!interiors_overlap(&a, &e));
    }

    #[test]
    fn segment_cell_intersection() {
        let t = tri();
        let s = Segment::new(Point::ints(-5, 1), Point::ints(20, 1));
        assert!(t.intersects_segment(&s));
        let outside = Segment::new(Point::ints(9, 9), Point::ints(20, 20));
        assert!(!t.intersects_segment(&outside));
        let touch = Segment::new(Point::ints(8, 0), Point::ints(12, 0));
        assert!(t.intersects_segment(&touch));
    }

    #[test]
    fn wedge_from_three_cuts() {
        // Quadrant wedge.
        let w = SimplexCell::from_constraints(vec![
            Halfplane::new(Line::through(&Point::ints(0, 0), &Point::ints(1, 0)), 1),
            Halfplane::new(Line::through(&Point::ints(0, 0), &Point::ints(0, 1)), 1),
        ])
        .unwrap();
        assert!(w.contains(&Point::ints(3, 7)));
        assert!(!w.contains(&Point::ints(-1, 3)));
        assert_eq!(w.frame().verts.len(), 1);
        // A line crossing only the far part of the wedge.
        let l = Line::through(&Point::ints(10, 0), &Point::ints(0, 10));
        assert!(w.crossed_by(&l));
        let sc = w.split(&l);
        assert_eq!(sc.plus.len() + sc.minus.len(), 2);
        let tri_part: Vec<_> = sc
            .plus
            .iter()
            .chain(sc.minus.iter())
            .filter(|c| c.is_bounded())
            .collect();
        assert_eq!(tri_part.len(), 1);
    }

    #[test]
    fn orientation_of_decomposed_triangles() {
        let t = tri();
        let sc = t.split(&Line::vertical(&int(4)));
        for c in sc.plus.iter().chain(sc.minus.iter()) {
            let v = &c.frame().verts;
            assert_eq!(v.len(), 3);
            assert_ne!(orient(&v[0], &v[1], &v[2]), 0);
        }
    }
}
