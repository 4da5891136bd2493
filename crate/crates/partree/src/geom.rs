//! Planar primitives: points, canonical lines, segments, rays, the
//! point/line duality and the global shear transform.

use crate::scalar::{int, sgn, sgn_int, Scalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: Scalar,
    pub y: Scalar,
}

impl Point {
    pub fn new(x: Scalar, y: Scalar) -> Self {
        Point { x, y }
    }

    pub fn ints(x: i64, y: i64) -> Self {
        Point { x: int(x), y: int(y) }
    }

    /// Lexicographic (x, then y) comparison key; used for deterministic
    /// tie-breaking rules throughout.
    pub fn lex_le(&self, other: &Point) -> bool {
        (&self.x, &self.y) <= (&other.x, &other.y)
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        let two = int(2);
        Point::new((&self.x + &other.x) / &two, (&self.y + &other.y) / &two)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Line `a*x + b*y + c = 0` with integer coefficients, `gcd(a,b,c) = 1`,
/// and sign fixed so `(a, b)` is lexicographically positive. The canonical
/// form makes structural dedup a plain equality test.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Line {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl fmt::Debug for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}x + {}y + {} = 0]", self.a, self.b, self.c)
    }
}

impl Line {
    pub fn new(a: BigInt, b: BigInt, c: BigInt) -> Self {
        assert!(!(a.is_zero() && b.is_zero()), "degenerate line");
        let g = a.gcd(&b).gcd(&c);
        let (mut a, mut b, mut c) = (a / &g, b / &g, c / &g);
        let flip = if a.is_zero() { b.is_negative() } else { a.is_negative() };
        if flip {
            a = -a;
            b = -b;
            c = -c;
        }
        Line { a, b, c }
    }

    /// Line through two distinct points.
    pub fn through(p: &Point, q: &Point) -> Self {
        assert!(p != q, "coincident points");
        // (y_q - y_p) * x - (x_q - x_p) * y + (x_q*y_p - y_q*x_p) = 0,
        // scaled by the common denominator to integer coefficients.
        let a = &q.y - &p.y;
        let b = &p.x - &q.x;
        let c = &q.x * &p.y - &p.x * &q.y;
        Self::from_rational(&a, &b, &c)
    }

    /// Clears denominators of rational coefficients.
    pub fn from_rational(a: &Scalar, b: &Scalar, c: &Scalar) -> Self {
        let m = a.denom().lcm(b.denom()).lcm(c.denom());
        let scale = |r: &Scalar| (r * BigRational::from_integer(m.clone())).to_integer();
        Line::new(scale(a), scale(b), scale(c))
    }

    /// Vertical line `x = x0`.
    pub fn vertical(x0: &Scalar) -> Self {
        Self::from_rational(&int(1), &int(0), &-x0.clone())
    }

    pub fn is_vertical(&self) -> bool {
        self.b.is_zero()
    }

    /// Sign of `a*x + b*y + c` at `p`, evaluated exactly.
    pub fn side(&self, p: &Point) -> i8 {
        // a*xn*yd + b*yn*xd + c*xd*yd over positive denominators.
        let v = &self.a * p.x.numer() * p.y.denom()
            + &self.b * p.y.numer() * p.x.denom()
            + &self.c * p.x.denom() * p.y.denom();
        sgn_int(&v)
    }

    /// Sign of the homogeneous form `a*dx + b*dy` for a direction.
    pub fn side_dir(&self, d: &Dir) -> i8 {
        sgn_int(&(&self.a * &d.x + &self.b * &d.y))
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.side(p) == 0
    }

    /// Slope and intercept of a non-vertical line (`y = m*x + k`).
    pub fn slope_intercept(&self) -> (Scalar, Scalar) {
        assert!(!self.is_vertical());
        let m = BigRational::new(-self.a.clone(), self.b.clone());
        let k = BigRational::new(-self.c.clone(), self.b.clone());
        (m, k)
    }

    /// `y` value at a given `x` for a non-vertical line.
    pub fn y_at(&self, x: &Scalar) -> Scalar {
        let (m, k) = self.slope_intercept();
        m * x + k
    }

    /// +1 if `p` is strictly above the (non-vertical) line, -1 below, 0 on.
    pub fn above(&self, p: &Point) -> i8 {
        assert!(!self.is_vertical());
        self.side(p) * sgn_int(&self.b)
    }

    /// Intersection point of two non-parallel lines.
    pub fn intersect(&self, other: &Line) -> Option<Point> {
        let det = &self.a * &other.b - &other.a * &self.b;
        if det.is_zero() {
            return None;
        }
        let x = BigRational::new(&self.b * &other.c - &other.b * &self.c, det.clone());
        let y = BigRational::new(&other.a * &self.c - &self.a * &other.c, det);
        Some(Point::new(x, y))
    }

    pub fn is_parallel(&self, other: &Line) -> bool {
        (&self.a * &other.b - &other.a * &self.b).is_zero()
    }

    /// A direction vector along the line.
    pub fn direction(&self) -> Dir {
        Dir::new(-self.b.clone(), self.a.clone())
    }
}

/// Primitive integer direction vector (gcd 1), used for cell recession
/// rays and ray-shooting directions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Dir {
    pub x: BigInt,
    pub y: BigInt,
}

impl fmt::Debug for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.x, self.y)
    }
}

impl Dir {
    pub fn new(x: BigInt, y: BigInt) -> Self {
        assert!(!(x.is_zero() && y.is_zero()), "zero direction");
        let g = x.gcd(&y);
        Dir { x: x / &g, y: y / &g }
    }

    pub fn ints(x: i64, y: i64) -> Self {
        Dir::new(BigInt::from(x), BigInt::from(y))
    }

    pub fn from_points(from: &Point, to: &Point) -> Self {
        let dx = &to.x - &from.x;
        let dy = &to.y - &from.y;
        let m = dx.denom().lcm(dy.denom());
        let mr = BigRational::from_integer(m);
        Dir::new((&dx * &mr).to_integer(), (&dy * &mr).to_integer())
    }

    pub fn neg(&self) -> Dir {
        Dir { x: -self.x.clone(), y: -self.y.clone() }
    }

    pub fn add(&self, other: &Dir) -> Option<Dir> {
        let x = &self.x + &other.x;
        let y = &self.y + &other.y;
        if x.is_zero() && y.is_zero() {
            None
        } else {
            Some(Dir::new(x, y))
        }
    }

    /// Cross product sign: orientation of `other` relative to `self`.
    pub fn cross_sign(&self, other: &Dir) -> i8 {
        sgn_int(&(&self.x * &other.y - &self.y * &other.x))
    }

    pub fn dot_sign(&self, other: &Dir) -> i8 {
        sgn_int(&(&self.x * &other.x + &self.y * &other.y))
    }

    /// Moves a point by `t` times this direction.
    pub fn offset(&self, p: &Point, t: &Scalar) -> Point {
        Point::new(&p.x + t * BigRational::from_integer(self.x.clone()),
                   &p.y + t * BigRational::from_integer(self.y.clone()))
    }
}

/// Orientation of the ordered triple (p, q, r): +1 counterclockwise,
/// -1 clockwise, 0 collinear.
pub fn orient(p: &Point, q: &Point, r: &Point) -> i8 {
    let v = (&q.x - &p.x) * (&r.y - &p.y) - (&q.y - &p.y) * (&r.x - &p.x);
    sgn(&v)
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Segment {
    pub p: Point,
    pub q: Point,
}

impl Segment {
    pub fn new(p: Point, q: Point) -> Self {
        assert!(p != q, "degenerate segment");
        Segment { p, q }
    }

    pub fn supporting_line(&self) -> Line {
        Line::through(&self.p, &self.q)
    }

    /// Closed containment of a point on the segment.
    pub fn contains(&self, r: &Point) -> bool {
        if orient(&self.p, &self.q, r) != 0 {
            return false;
        }
        let d = Dir::from_points(&self.p, &self.q);
        // r between p and q along the segment direction.
        let dp = Dir::from_points_or_zero(&self.p, r);
        let dq = Dir::from_points_or_zero(r, &self.q);
        match (dp, dq) {
            (None, _) | (_, None) => true,
            (Some(a), Some(b)) => d.dot_sign(&a) >= 0 && d.dot_sign(&b) >= 0,
        }
    }
}

impl Dir {
    fn from_points_or_zero(from: &Point, to: &Point) -> Option<Dir> {
        if from == to {
            None
        } else {
            Some(Dir::from_points(from, to))
        }
    }
}

/// Closed segment intersection test; collinear overlap counts.
pub fn segments_intersect(s1: &Segment, s2: &Segment) -> bool {
    let o1 = orient(&s1.p, &s1.q, &s2.p);
    let o2 = orient(&s1.p, &s1.q, &s2.q);
    let o3 = orient(&s2.p, &s2.q, &s1.p);
    let o4 = orient(&s2.p, &s2.q, &s1.q);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    // Touching or collinear cases.
    (o1 == 0 && s1.contains(&s2.p))
        || (o2 == 0 && s1.contains(&s2.q))
        || (o3 == 0 && s2.contains(&s1.p))
        || (o4 == 0 && s2.contains(&s1.q))
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Point,
    pub dir: Dir,
}

impl Ray {
    pub fn new(origin: Point, dir: Dir) -> Self {
        Ray { origin, dir }
    }

    pub fn supporting_line(&self) -> Line {
        let far = self.dir.offset(&self.origin, &int(1));
        Line::through(&self.origin, &far)
    }

    /// Parameter `t >= 0` with `origin + t*dir` on `line`, if the ray
    /// meets the line at a single point.
    pub fn hit_line(&self, line: &Line) -> Option<Scalar> {
        let denom = &line.a * &self.dir.x + &line.b * &self.dir.y;
        if denom.is_zero() {
            return None;
        }
        let num = &line.a * self.origin.x.numer() * self.origin.y.denom()
            + &line.b * self.origin.y.numer() * self.origin.x.denom()
            + &line.c * self.origin.x.denom() * self.origin.y.denom();
        let denom_full = denom * self.origin.x.denom() * self.origin.y.denom();
        let t = BigRational::new(-num, denom_full);
        if t.is_negative() {
            None
        } else {
            Some(t)
        }
    }

    pub fn at(&self, t: &Scalar) -> Point {
        self.dir.offset(&self.origin, t)
    }
}

/// Duality: point `(a, b)` maps to the line `y = a*x - b` and the
/// non-vertical line `y = m*x + k` maps to the point `(m, -k)`.
/// The map is an involution and reverses above/below order:
/// `p` lies above `l` exactly when `dual_line(l)` lies above `dual_point(p)`.
pub fn dual_point(p: &Point) -> Line {
    // y = p.x * x - p.y  =>  p.x * x - y - p.y = 0
    Line::from_rational(&p.x, &int(-1), &-p.y.clone())
}

pub fn dual_line(l: &Line) -> Point {
    let (m, k) = l.slope_intercept();
    Point::new(m, -k)
}

/// Global shear `x' = x + theta * y`, `y' = y`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Shear {
    pub theta: Scalar,
}

impl Shear {
    pub fn identity() -> Self {
        Shear { theta: int(0) }
    }

    /// Fixed enumeration of candidate shear parameters:
    /// 0, 1, 1/2, 1/3, 1/4, ...
    pub fn candidate(k: usize) -> Scalar {
        if k == 0 {
            int(0)
        } else {
            crate::scalar::rat(1, k as i64)
        }
    }

    pub fn apply_point(&self, p: &Point) -> Point {
        Point::new(&p.x + &self.theta * &p.y, p.y.clone())
    }

    pub fn unapply_point(&self, p: &Point) -> Point {
        Point::new(&p.x - &self.theta * &p.y, p.y.clone())
    }

    /// Image of the line `a x + b y + c = 0` under the shear
    /// (substitute `x = x' - theta*y`): `a x' + (b - a*theta) y + c = 0`.
    pub fn apply_line(&self, l: &Line) -> Line {
        let a = BigRational::from_integer(l.a.clone());
        let b = BigRational::from_integer(l.b.clone()) - &a * &self.theta;
        Line::from_rational(&a, &b, &BigRational::from_integer(l.c.clone()))
    }

    pub fn apply_segment(&self, s: &Segment) -> Segment {
        Segment::new(self.apply_point(&s.p), self.apply_point(&s.q))
    }

    pub fn apply_dir(&self, d: &Dir) -> Dir {
        let x = &d.x * self.theta.denom() + &d.y * self.theta.numer();
        let y = &d.y * self.theta.denom();
        Dir::new(x, y)
    }
}

/// First shear parameter (in the fixed enumeration) under which no line
/// in `lines` is vertical and no two points in `points` share an
/// x-coordinate.
pub fn find_shear(points: &[Point], lines: &[Line]) -> Shear {
    'outer: for k in 0.. {
        let theta = Shear::candidate(k);
        let shear = Shear { theta };
        for l in lines {
            if shear.apply_line(l).is_vertical() {
                continue 'outer;
            }
        }
        let mut xs: Vec<Scalar> = points.iter().map(|p| shear.apply_point(p).x).collect();
        xs.sort();
        for w in xs.windows(2) {
            if w[0] == w[1] {
                continue 'outer;
            }
        }
        return shear;
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn line_canonical_form() {
        let l1 = Line::new(BigInt::from(2), BigInt::from(-4), BigInt::from(6));
        let l2 = Line::new(BigInt::from(-1), BigInt::from(2), BigInt::from(-3));
        assert_eq!(l1, l2);
        assert_eq!(l1.a, BigInt::from(1));
    }

    #[test]
    fn line_through_and_side() {
        let p = Point::ints(0, 0);
        let q = Point::ints(2, 2);
        let l = Line::through(&p, &q);
        assert!(l.contains(&Point::ints(1, 1)));
        // (0,1) is above y = x.
        assert_eq!(l.above(&Point::ints(0, 1)), 1);
        assert_eq!(l.above(&Point::ints(1, 0)), -1);
    }

    #[test]
    fn intersect_lines() {
        let l1 = Line::through(&Point::ints(0, 0), &Point::ints(1, 1));
        let l2 = Line::through(&Point::ints(0, 2), &Point::ints(2, 0));
        let p = l1.intersect(&l2).unwrap();
        assert_eq!(p, Point::ints(1, 1));
        assert!(l1.intersect(&l1).is_none());
    }

    #[test]
    fn orientation() {
        assert_eq!(orient(&Point::ints(0, 0), &Point::ints(1, 0), &Point::ints(0, 1)), 1);
        assert_eq!(orient(&Point::ints(0, 0), &Point::ints(0, 1), &Point::ints(1, 0)), -1);
        assert_eq!(orient(&Point::ints(0, 0), &Point::ints(1, 1), &Point::ints(2, 2)), 0);
    }

    #[test]
    fn duality_involution() {
        let p = Point::new(rat(3, 2), rat(-5, 7));
        let l = dual_point(&p);
        assert_eq!(dual_line(&l), p);
    }

    #[test]
    fn duality_order_reversal() {
        // p above l  <=>  dual(l) above dual(p), for sampled pairs.
        let pts = [Point::ints(0, 3), Point::ints(2, -1), Point::new(rat(1, 2), rat(7, 3))];
        let lines = [
            Line::through(&Point::ints(0, 0), &Point::ints(1, 2)),
            Line::through(&Point::ints(-1, 5), &Point::ints(3, 4)),
        ];
        for p in &pts {
            for l in &lines {
                let lhs = l.above(p);
                let rhs = dual_point(p).above(&dual_line(l));
                assert_eq!(lhs, rhs, "p={:?} l={:?}", p, l);
            }
        }
    }

    #[test]
    fn segment_predicates() {
        let s = Segment::new(Point::ints(0, 0), Point::ints(4, 0));
        assert!(s.contains(&Point::ints(2, 0)));
        assert!(s.contains(&Point::ints(0, 0)));
        assert!(!s.contains(&Point::ints(5, 0)));
        let t = Segment::new(Point::ints(2, -1), Point::ints(2, 1));
        assert!(segments_intersect(&s, &t));
        let u = Segment::new(Point::ints(2, 1), Point::ints(2, 5));
        assert!(!segments_intersect(&s, &u));
        // Endpoint touch.
        let v = Segment::new(Point::ints(4, 0), Point::ints(6, 2));
        assert!(segments_intersect(&s, &v));
        // Collinear overlap counts as intersecting.
        let w = Segment::new(Point::ints(3, 0), Point::ints(9, 0));
        assert!(segments_intersect(&s, &w));
        let z = Segment::new(Point::ints(5, 0), Point::ints(9, 0));
        assert!(!segments_intersect(&s, &z));
    }

    #[test]
    fn ray_hits() {
        let r = Ray::new(Point::ints(0, 0), Dir::ints(1, 0));
        let l = Line::vertical(&int(5));
        assert_eq!(r.hit_line(&l).unwrap(), int(5));
        let behind = Line::vertical(&int(-3));
        assert!(r.hit_line(&behind).is_none());
    }

    #[test]
    fn shear_selection() {
        // Two points sharing x force theta != 0.
        let pts = vec![Point::ints(1, 0), Point::ints(1, 5)];
        let shear = find_shear(&pts, &[]);
        assert_eq!(shear.theta, int(1));
        let a = shear.apply_point(&pts[0]);
        let b = shear.apply_point(&pts[1]);
        assert_ne!(a.x, b.x);
        assert_eq!(shear.unapply_point(&a), pts[0]);
    }

    #[test]
    fn shear_line_consistency() {
        let shear = Shear { theta: rat(1, 3) };
        let p = Point::ints(2, 5);
        let q = Point::ints(-1, 4);
        let l = Line::through(&p, &q);
        let ls = shear.apply_line(&l);
        assert!(ls.contains(&shear.apply_point(&p)));
        assert!(ls.contains(&shear.apply_point(&q)));
    }
}
