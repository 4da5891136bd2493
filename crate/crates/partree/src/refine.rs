//! Partition refinement with multiplicative line weights.
//!
//! Given points P, test lines H, and t interior-disjoint cells covering
//! P, the engine processes each cell once in a deterministically chosen
//! order. Per cell it builds a weighted cutting (weights `2^I(h)` for the
//! crossing lines), then subdivides each cutting cell so no piece exceeds
//! the point budget `ceil(2n/(bt))`, then bumps the crossing counter
//! `λ(h)` of every line by the number of new subcells it crosses and
//! propagates the exponent changes into the per-cell totals W' and N'.
//!
//! All exponent laws are exact:
//! `I(h) = ceil(λ(h)·log2(1+1/b))`, evaluated by big-integer comparison
//! `(b+1)^λ <= 2^I · b^λ` (the value is irrational, never an integer);
//! `I(v)` applies the same law to the sum of λ over the lines through
//! arrangement vertex v; `I_E`/`I_F` are the top bit positions of
//! `W' = Σ 2^I(h)` (crossing lines) and `N' = Σ 2^I(v)` (contained
//! vertices).
//!
//! Point subdivision keeps the subcell budget `b·t` hard: every cut adds
//! exactly one cell. Cells with at most two constraints take vertical
//! cuts (all abscissae are distinct after shearing). Three-constraint
//! cells take cuts through one of their corners, ordering points by angle
//! around the corner; a rank falling inside a collinear tie class is
//! realized by cutting along the class line itself and splitting the
//! on-line points by stored assignment. Unbounded three-constraint cells
//! with parallel rays take cuts parallel to the rays; diverging rays
//! fall back to one preparatory cut parallel to the far ray, which
//! leaves a ray-parallel piece and a two-constraint wedge.

use crate::cell::SimplexCell;
use crate::cutting;
use crate::geom::{Dir, Line, Point};
use crate::scalar::{big, int, msb, sgn, Scalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Clone, Debug)]
pub struct RefineConfig {
    /// Branching parameter; power of two, at least 4.
    pub b: u32,
    /// Selection-rule constant in (0, 1).
    pub beta: Scalar,
    /// Multiplier in the cutting parameter r_i.
    pub c_cut: Scalar,
    /// Recompute W'/N' from scratch after every iteration and compare.
    pub audit: bool,
    /// Nominal input cell count for the budget arithmetic; lets a caller
    /// that dropped empty cells keep the schedule's caps.  Defaults to
    /// the actual cell count and is never taken smaller than it.
    pub t_nominal: Option<usize>,
    /// Record one line per iteration.
    pub trace: bool,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            b: 8,
            beta: crate::scalar::rat(1, 10),
            c_cut: crate::scalar::rat(1, 4),
            audit: false,
            trace: false,
            t_nominal: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("b = {0} is not a power of two >= 4")]
    BadB(u32),
    #[error("beta must lie in (0, 1)")]
    BadBeta,
    #[error("c_cut must be positive")]
    BadCCut,
    #[error("cell {cell} holds {points} points, more than 2n/t = {max}")]
    CellOverfull { cell: usize, points: usize, max: usize },
    #[error("point {point} assigned to cell {cell} that does not contain it")]
    PointNotCovered { point: usize, cell: usize },
    #[error("point {point} not assigned to any cell")]
    PointMissing { point: usize },
    #[error("point {point} assigned to more than one cell")]
    PointDuplicated { point: usize },
    #[error("points {a} and {b} share an abscissa; shear the input first")]
    SharedAbscissa { a: usize, b: usize },
    #[error("cells {a} and {b} have overlapping interiors")]
    CellsOverlap { a: usize, b: usize },
    #[error("subcell budget exceeded: {got} > {max}")]
    Budget { got: usize, max: usize },
}

pub struct RefineResult {
    pub subcells: Vec<SimplexCell>,
    /// Point ids per subcell (the stored assignment map).
    pub subcell_points: Vec<Vec<usize>>,
    /// Input-cell index each subcell came from.
    pub subcell_parent: Vec<usize>,
    /// Input-cell indices in processing order.
    pub order: Vec<usize>,
    /// Final crossing counters, one per input line.
    pub lambda: Vec<u64>,
    /// Largest λ over all lines.
    pub max_crossed: u64,
    pub trace: Vec<String>,
}

/// Memoized exact evaluation of `I(λ) = ceil(λ·log2(1+1/b))`:
/// the smallest i with `(b+1)^λ <= 2^i · b^λ`.
struct CeilLaw {
    b: u64,
    num: BigInt, // (b+1)^λ for λ = table.len() - 1
    den: BigInt, // b^λ
    table: Vec<u64>,
}

impl CeilLaw {
    fn new(b: u64) -> Self {
        CeilLaw { b, num: BigInt::one(), den: BigInt::one(), table: vec![0] }
    }
    fn get(&mut self, lam: u64) -> u64 {
        while self.table.len() as u64 <= lam {
            self.num *= self.b + 1;
            self.den *= self.b;
            let mut i = *self.table.last().unwrap();
            while self.num > &self.den << i {
                i += 1;
            }
            self.table.push(i);
        }
        self.table[lam as usize]
    }
}

fn pow2_scalar(e: i64) -> Scalar {
    if e >= 0 {
        big(BigInt::one() << (e as u64))
    } else {
        Scalar::new(BigInt::one(), BigInt::one() << ((-e) as u64))
    }
}

/// Membership in the first selection class: cells satisfying
/// `(1-β)/(1+β)·log2(b) + I_F >= 2·I_E`. Cells without interior
/// vertices (I_F = -∞) never qualify; cells without crossing lines
/// (I_E = -∞) always do.
fn in_s1(ie: Option<u64>, if_: Option<u64>, cfg: &RefineConfig) -> bool {
    let Some(ie) = ie else { return true };
    let Some(if_) = if_ else { return false };
    let j = BigInt::from(cfg.b.trailing_zeros());
    let p = cfg.beta.numer().clone();
    let q = cfg.beta.denom().clone();
    // (q-p)·j + (q+p)·I_F >= 2(q+p)·I_E
    (&q - &p) * j + (&q + &p) * BigInt::from(if_) >= 2 * (q + p) * BigInt::from(ie)
}

/// Deterministic cell selection. `states` holds `(cell id, I_E, I_F)`
/// for the unprocessed cells (None encodes -∞). If the first class holds
/// at least half the cells, its member with smallest I_F wins, otherwise
/// the complement's member with smallest I_E; ties break to the smallest
/// cell id.
pub fn select_cell(states: &[(usize, Option<u64>, Option<u64>)], cfg: &RefineConfig) -> usize {
    let i = states.len();
    assert!(i >= 1);
    let s1: Vec<&(usize, Option<u64>, Option<u64>)> =
        states.iter().filter(|(_, ie, if_)| in_s1(*ie, *if_, cfg)).collect();
    if 2 * s1.len() >= i {
        s1.iter()
            .min_by_key(|(id, _, if_)| (if_.map_or((0, 0), |v| (1, v)), *id))
            .unwrap()
            .0
    } else {
        states
            .iter()
            .filter(|(_, ie, if_)| !in_s1(*ie, *if_, cfg))
            .min_by_key(|(id, ie, _)| (ie.map_or((0, 0), |v| (1, v)), *id))
            .unwrap()
            .0
    }
}

/// The cutting parameter for one cell: `c_cut·b^{1/(1+β)}` when
/// `I_E - I_F/2` exceeds `(1/(1+β) - 1/2)·log2(b)` (exact rational
/// comparison), else `c_cut·2^{I_E - I_F/2}·sqrt(b)`; powers are rounded
/// down to dyadics (within factor 2), and the result is clamped to >= 1.
pub fn compute_ri(ie: Option<u64>, if_: Option<u64>, cfg: &RefineConfig) -> Scalar {
    let one = int(1);
    let Some(ie) = ie else { return one };
    let j = cfg.b.trailing_zeros() as i64;
    let p = cfg.beta.numer();
    let q = cfg.beta.denom();
    let branch1 = match if_ {
        None => true,
        Some(if_) => {
            // (q+p)·(2·I_E - I_F) > (q-p)·j
            (q + p) * (2 * BigInt::from(ie) - BigInt::from(if_)) > (q - p) * BigInt::from(j)
        }
    };
    let e = if branch1 {
        // floor(j·q / (q+p)); q, p are small by construction.
        let num = BigInt::from(j) * q;
        let den = q + p;
        let fl: BigInt = num.div_floor(&den);
        i64::try_from(fl).expect("exponent fits i64")
    } else {
        (2 * ie as i64 - if_.unwrap() as i64 + j).div_euclid(2)
    };
    let r = &cfg.c_cut * pow2_scalar(e);
    if r < one {
        one
    } else {
        r
    }
}

struct PointCtx<'a> {
    pts: &'a [Point],
    cap: usize,
}

/// Piece quota for k points.
fn quota(k: usize, cap: usize) -> usize {
    k.div_ceil(cap)
}

/// Acceptable split ranks: the left part takes ceil(q/2) of the q pieces.
/// Any rank R with ceil(R/cap) = q1 and ceil((k-R)/cap) = q - q1 keeps
/// the total piece count at q.
fn rank_window(k: usize, cap: usize) -> (usize, usize) {
    let q = quota(k, cap);
    let q1 = q.div_ceil(2);
    let hi = cap * q1;
    let lo = (cap * (q1 - 1) + 1).max(k.saturating_sub(cap * (q - q1)));
    (lo, hi)
}

/// A planned cut: the line plus the exact id partition (points on the
/// line are split by rank, not geometry).
struct PlannedCut {
    line: Line,
    left: Vec<usize>,
    right: Vec<usize>,
}

fn vertical_cut(ids: &[usize], ctx: &PointCtx) -> PlannedCut {
    let mut sorted = ids.to_vec();
    sorted.sort_by(|&a, &b| (&ctx.pts[a].x, &ctx.pts[a].y).cmp(&(&ctx.pts[b].x, &ctx.pts[b].y)));
    let (_, hi) = rank_window(sorted.len(), ctx.cap);
    let xm = (&ctx.pts[sorted[hi - 1]].x + &ctx.pts[sorted[hi]].x) / int(2);
    let right = sorted.split_off(hi);
    PlannedCut { line: Line::vertical(&xm), left: sorted, right }
}

/// Cut through a corner of the cell. Points sort by angle around the
/// anchor (ties by distance; a point equal to the anchor sorts first and
/// lies on every candidate line). Ranks whose neighbors share a direction
/// are realized by cutting along that direction's line when it crosses
/// the interior.
fn corner_cut(cell: &SimplexCell, ids: &[usize], anchor: &Point, ctx: &PointCtx) -> Option<PlannedCut> {
    let dir_of = |id: usize| -> Option<Dir> {
        if ctx.pts[id] == *anchor {
            None
        } else {
            Some(Dir::from_points(anchor, &ctx.pts[id]))
        }
    };
    let mut sorted = ids.to_vec();
    sorted.sort_by(|&a, &b| {
        match (dir_of(a), dir_of(b)) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, _) => std::cmp::Ordering::Less,
            (_, None) => std::cmp::Ordering::Greater,
            (Some(da), Some(db)) => match da.cross_sign(&db) {
                1 => std::cmp::Ordering::Less,
                -1 => std::cmp::Ordering::Greater,
                // Same ray from the anchor: order by distance, i.e. by
                // the offset along the shared direction.
                _ => {
                    let key = |id: usize| {
                        if !da.x.is_zero() {
                            (&ctx.pts[id].x - &anchor.x) * big(da.x.clone()).recip()
                        } else {
                            (&ctx.pts[id].y - &anchor.y) * big(da.y.clone()).recip()
                        }
                    };
                    key(a).cmp(&key(b))
                }
            },
        }
    });
    let (lo, hi) = rank_window(sorted.len(), ctx.cap);
    for r in (lo..=hi).rev() {
        let da = dir_of(sorted[r - 1]);
        let db = dir_of(sorted[r]);
        let line = match (da, db) {
            (Some(da), Some(db)) if da.cross_sign(&db) != 0 => {
                // Directions differ: cut strictly between them.
                let mid = da.add(&db).expect("cone directions never opposite");
                Line::through(anchor, &mid.offset(anchor, &int(1)))
            }
            (Some(_), Some(_)) => {
                // Tie class: cut along the class line, split by rank.
                Line::through(anchor, &ctx.pts[sorted[r]])
            }
            // A rank adjacent to the anchor-coincident point: any line
            // through the anchor toward the next direction class works
            // only if directions around it differ; skip, the window has
            // other ranks (the coincident class is a single point).
            _ => continue,
        };
        if !cell.crossed_by(&line) {
            continue;
        }
        let right = sorted.split_off(r);
        return Some(PlannedCut { line, left: sorted, right });
    }
    None
}

/// Cuts parallel to direction `u` (for unbounded cells whose two rays
/// share that direction). Points sort by the transversal functional
/// `η(p) = u.x·p.y - u.y·p.x`; tie classes lie on η-level lines.
fn parallel_cut(cell: &SimplexCell, ids: &[usize], u: &Dir, ctx: &PointCtx) -> Option<PlannedCut> {
    let eta = |id: usize| -> Scalar {
        big(u.x.clone()) * &ctx.pts[id].y - big(u.y.clone()) * &ctx.pts[id].x
    };
    let mut sorted = ids.to_vec();
    sorted.sort_by(|&a, &b| {
        (eta(a), &ctx.pts[a].x, &ctx.pts[a].y).cmp(&(eta(b), &ctx.pts[b].x, &ctx.pts[b].y))
    });
    let level = |c: &Scalar| -> Line {
        // u.x·y - u.y·x = c
        Line::from_rational(&-big(u.y.clone()), &big(u.x.clone()), &-c.clone())
    };
    let (lo, hi) = rank_window(sorted.len(), ctx.cap);
    for r in (lo..=hi).rev() {
        let ea = eta(sorted[r - 1]);
        let eb = eta(sorted[r]);
        let line = if ea != eb {
            level(&((ea + eb) / int(2)))
        } else {
            level(&ea)
        };
        if !cell.crossed_by(&line) {
            continue;
        }
        let right = sorted.split_off(r);
        return Some(PlannedCut { line, left: sorted, right });
    }
    None
}

/// Applies a planned cut and recurses on the pieces. Points land in the
/// piece dictated by their id-partition side; when a side decomposes
/// into two cells (only possible on the last-resort vertical path) ids
/// route to the first containing cell.
fn apply_cut(
    cell: &SimplexCell,
    cut: PlannedCut,
    ctx: &PointCtx,
    out: &mut Vec<(SimplexCell, Vec<usize>)>,
) -> bool {
    let split = cell.split(&cut.line);
    if split.plus.is_empty() || split.minus.is_empty() {
        return false;
    }
    // Which side does the left group belong to? Use its first member
    // strictly off the cut line; all-on-line groups may take either side.
    let group_side = |ids: &[usize]| -> i8 {
        ids.iter().map(|&i| cut.line.side(&ctx.pts[i])).find(|&s| s != 0).unwrap_or(0)
    };
    let (ls, rs) = (group_side(&cut.left), group_side(&cut.right));
    let left_sign: i8 = match (ls, rs) {
        (0, 0) => -1,
        (0, s) => -s,
        (s, _) => s,
    };
    let route = |ids: Vec<usize>, cells: &[SimplexCell], out: &mut Vec<(SimplexCell, Vec<usize>)>| {
        if cells.len() == 1 {
            point_split(cells[0].clone(), ids, ctx, out);
        } else {
            let mut per: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
            for id in ids {
                let k = cells
                    .iter()
                    .position(|c| c.contains(&ctx.pts[id]))
                    .expect("point lost during fallback routing");
                per[k].push(id);
            }
            for (c, ids) in cells.iter().zip(per) {
                point_split(c.clone(), ids, ctx, out);
            }
        }
    };
    let (lcells, rcells) =
        if left_sign > 0 { (&split.plus, &split.minus) } else { (&split.minus, &split.plus) };
    debug_assert!(cut.left.iter().all(|&i| lcells.iter().any(|c| c.contains(&ctx.pts[i]))));
    debug_assert!(cut.right.iter().all(|&i| rcells.iter().any(|c| c.contains(&ctx.pts[i]))));
    route(cut.left, lcells, out);
    route(cut.right, rcells, out);
    true
}

/// Subdivides a cell until every piece holds at most `cap` points.
fn point_split(
    cell: SimplexCell,
    ids: Vec<usize>,
    ctx: &PointCtx,
    out: &mut Vec<(SimplexCell, Vec<usize>)>,
) {
    if ids.len() <= ctx.cap {
        out.push((cell, ids));
        return;
    }
    if cell.constraints().len() <= 2 {
        let cut = vertical_cut(&ids, ctx);
        assert!(apply_cut(&cell, cut, ctx, out), "vertical cut failed on open cell");
        return;
    }
    // Three constraints: corners first.
    let mut anchors = cell.frame().verts.clone();
    anchors.sort();
    for a in &anchors {
        if let Some(cut) = corner_cut(&cell, &ids, a, ctx) {
            if apply_cut(&cell, cut, ctx, out) {
                return;
            }
        }
    }
    if let Some((d0, d1)) = cell.frame().end_dirs.clone() {
        if d0.cross_sign(&d1) == 0 && d0.dot_sign(&d1) > 0 {
            // Both rays share a direction: transversal-level cuts.
            if let Some(cut) = parallel_cut(&cell, &ids, &d0, ctx) {
                if apply_cut(&cell, cut, ctx, out) {
                    return;
                }
            }
        } else {
            // Diverging rays: one preparatory cut through the smaller
            // vertex parallel to the far ray yields a ray-parallel
            // piece plus a wedge, both splittable exactly.
            let va = anchors[0].clone();
            let vb = anchors[1].clone();
            let (da, db) = if cell.frame().verts[0] == va { (d0, d1) } else { (d1, d0) };
            let _ = da;
            let line = Line::through(&va, &db.offset(&va, &int(1)));
            if cell.crossed_by(&line) {
                let vb_side = line.side(&vb);
                let mut left = Vec::new();
                let mut right = Vec::new();
                for id in &ids {
                    let s = line.side(&ctx.pts[*id]);
                    if s == vb_side || s == 0 {
                        left.push(*id);
                    } else {
                        right.push(*id);
                    }
                }
                let cut = PlannedCut { line, left, right };
                if apply_cut(&cell, cut, ctx, out) {
                    return;
                }
            }
        }
    }
    // Last resort: a vertical cut, which may cost one extra cell.
    let cut = vertical_cut(&ids, ctx);
    assert!(apply_cut(&cell, cut, ctx, out), "point subdivision exhausted all cut strategies");
}

struct VertInfo {
    point: Point,
    lines: Vec<u32>,
}

/// Runs the refinement over `cells` (each a region plus its point ids).
pub fn refine(
    pts: &[Point],
    lines: &[Line],
    cells: &[(SimplexCell, Vec<usize>)],
    cfg: &RefineConfig,
) -> Result<RefineResult, RefineError> {
    if !cfg.b.is_power_of_two() || cfg.b < 4 {
        return Err(RefineError::BadB(cfg.b));
    }
    if sgn(&cfg.beta) <= 0 || cfg.beta >= int(1) {
        return Err(RefineError::BadBeta);
    }
    if sgn(&cfg.c_cut) <= 0 {
        return Err(RefineError::BadCCut);
    }
    let n = pts.len();
    let t = cfg.t_nominal.unwrap_or(0).max(cells.len());
    let b = cfg.b as usize;

    // Preconditions: exactly-once point assignment, containment, cell
    // point loads, distinct abscissae.
    let mut owner = vec![usize::MAX; n];
    for (ci, (cell, ids)) in cells.iter().enumerate() {
        // Ceiling form so the output budget ceil(2n/(bt)) of one round
        // always satisfies the precondition of the next.
        if ids.len() > (2 * n).div_ceil(t) {
            return Err(RefineError::CellOverfull {
                cell: ci,
                points: ids.len(),
                max: (2 * n).div_ceil(t),
            });
        }
        for &id in ids {
            if owner[id] != usize::MAX {
                return Err(RefineError::PointDuplicated { point: id });
            }
            owner[id] = ci;
            if !cell.contains(&pts[id]) {
                return Err(RefineError::PointNotCovered { point: id, cell: ci });
            }
        }
    }
    if let Some(p) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(RefineError::PointMissing { point: p });
    }
    {
        let mut by_x: Vec<usize> = (0..n).collect();
        by_x.sort_by(|&a, &b| pts[a].x.cmp(&pts[b].x));
        for w in by_x.windows(2) {
            if pts[w[0]].x == pts[w[1]].x {
                return Err(RefineError::SharedAbscissa { a: w[0], b: w[1] });
            }
        }
    }

    if cfg.audit {
        // Pairwise interior disjointness; quadratic, so audit-only.
        for i in 0..t {
            for j in i + 1..t {
                if crate::cell::interiors_overlap(&cells[i].0, &cells[j].0) {
                    return Err(RefineError::CellsOverlap { a: i, b: j });
                }
            }
        }
    }

    let cap = (2 * n).div_ceil(b * t).max(1);
    let m = lines.len();

    // Arrangement vertices of the test set, with incident lines.
    let verts: Vec<VertInfo> = {
        let mut by_pt: BTreeMap<Point, Vec<u32>> = BTreeMap::new();
        for i in 0..m {
            for j in i + 1..m {
                if let Some(p) = lines[i].intersect(&lines[j]) {
                    let e = by_pt.entry(p).or_default();
                    e.push(i as u32);
                    e.push(j as u32);
                }
            }
        }
        by_pt
            .into_iter()
            .map(|(point, mut ls)| {
                ls.sort();
                ls.dedup();
                VertInfo { point, lines: ls }
            })
            .collect()
    };
    let mut line_verts: Vec<Vec<u32>> = vec![Vec::new(); m];
    for (vi, v) in verts.iter().enumerate() {
        for &l in &v.lines {
            line_verts[l as usize].push(vi as u32);
        }
    }

    let mut law = CeilLaw::new(cfg.b as u64);
    let mut lambda = vec![0u64; m];
    let mut ih = vec![0u64; m];
    let mut vert_sum = vec![0u64; verts.len()];
    let mut iv = vec![0u64; verts.len()];
    // Vertex -> first containing unprocessed cell.
    let mut vert_cell: Vec<Option<u32>> = verts
        .iter()
        .map(|v| {
            cells
                .iter()
                .position(|(c, _)| c.contains(&v.point))
                .map(|i| i as u32)
        })
        .collect();

    struct CellState {
        cross: Vec<u32>,
        wprime: BigInt,
        nprime: BigInt,
        processed: bool,
    }
    let mut states: Vec<CellState> = cells
        .iter()
        .map(|(c, _)| {
            let cross: Vec<u32> =
                (0..m as u32).filter(|&h| c.crossed_by(&lines[h as usize])).collect();
            let wprime = BigInt::from(cross.len());
            CellState { cross, wprime, nprime: BigInt::zero(), processed: false }
        })
        .collect();
    for (vi, vc) in vert_cell.iter().enumerate() {
        if let Some(ci) = vc {
            states[*ci as usize].nprime += BigInt::one() << iv[vi];
        }
    }
    let mut line_cells: Vec<Vec<u32>> = vec![Vec::new(); m];
    for (ci, st) in states.iter().enumerate() {
        for &h in &st.cross {
            line_cells[h as usize].push(ci as u32);
        }
    }

    let exp_of = |x: &BigInt| -> Option<u64> { (!x.is_zero()).then(|| msb(x)) };

    let mut subcells: Vec<SimplexCell> = Vec::new();
    let mut subcell_points: Vec<Vec<usize>> = Vec::new();
    let mut subcell_parent: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = Vec::new();
    let mut trace: Vec<String> = Vec::new();

    // One pass per actual cell; the nominal t only sets the budgets.
    for step in (1..=cells.len()).rev() {
        let live: Vec<(usize, Option<u64>, Option<u64>)> = states
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.processed)
            .map(|(i, s)| (i, exp_of(&s.wprime), exp_of(&s.nprime)))
            .collect();
        let s1_count = live.iter().filter(|(_, ie, if_)| in_s1(*ie, *if_, cfg)).count();
        let chosen = select_cell(&live, cfg);
        let (ie, if_) = live.iter().find(|(i, ..)| *i == chosen).map(|(_, a, b)| (*a, *b)).unwrap();
        let mut ri = compute_ri(ie, if_, cfg);
        let branch1 = match (ie, if_) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(ie), Some(if_)) => {
                let p = cfg.beta.numer();
                let q = cfg.beta.denom();
                let j = BigInt::from(cfg.b.trailing_zeros());
                (q + p) * (2 * BigInt::from(ie) - BigInt::from(if_)) > (q - p) * j
            }
        };

        // Step 1: weighted cutting, retried with halved r until the cell
        // count fits b/4.
        let parent = &cells[chosen].0;
        let weighted: Vec<(Line, u64)> = states[chosen]
            .cross
            .iter()
            .map(|&h| (lines[h as usize].clone(), ih[h as usize]))
            .collect();
        let cut_cells = loop {
            let cc = if weighted.is_empty() {
                vec![parent.clone()]
            } else {
                let r4 = &ri * int(4);
                let cut = cutting::cut_weighted(&weighted, &r4, parent);
                if let Some(sz) = &cut.normalized_size {
                    assert!(
                        *sz <= BigInt::from(5 * cut.distinct),
                        "normalized multiset exceeded 5m"
                    );
                }
                cut.cells
            };
            if cc.len() <= b / 4 || cc.len() == 1 {
                break cc;
            }
            ri = ri / int(2);
        };

        // Step 2: assign points to cutting cells (first containing cell
        // wins on boundaries), then subdivide to the point budget.
        let my_pts = &cells[chosen].1;
        let mut per_cut: Vec<Vec<usize>> = vec![Vec::new(); cut_cells.len()];
        for &id in my_pts {
            let k = cut_cells
                .iter()
                .position(|c| c.contains(&pts[id]))
                .expect("cutting cells must cover the parent's points");
            per_cut[k].push(id);
        }
        let ctx = PointCtx { pts, cap };
        let mut pieces: Vec<(SimplexCell, Vec<usize>)> = Vec::new();
        for (c, ids) in cut_cells.into_iter().zip(per_cut) {
            point_split(c, ids, &ctx, &mut pieces);
        }

        if cfg.trace {
            trace.push(format!(
                "{step}, {chosen}, {s1_count}, {}, {ri}, {}",
                if branch1 { 1 } else { 2 },
                pieces.len()
            ));
        }

        // Step 3: bookkeeping.
        states[chosen].processed = true;
        order.push(chosen);
        let first_new = subcells.len();
        for (c, ids) in pieces {
            assert!(ids.len() <= cap, "point budget violated");
            subcells.push(c);
            subcell_points.push(ids);
            subcell_parent.push(chosen);
        }
        for vc in vert_cell.iter_mut() {
            if *vc == Some(chosen as u32) {
                *vc = None;
            }
        }
        let cross_list = states[chosen].cross.clone();
        for &h in &cross_list {
            let h = h as usize;
            let c = subcells[first_new..]
                .iter()
                .filter(|sc| sc.crossed_by(&lines[h]))
                .count() as u64;
            if c == 0 {
                continue;
            }
            lambda[h] += c;
            let new_ih = law.get(lambda[h]);
            if new_ih != ih[h] {
                let delta = (BigInt::one() << new_ih) - (BigInt::one() << ih[h]);
                for &ci in &line_cells[h] {
                    let ci = ci as usize;
                    if !states[ci].processed {
                        states[ci].wprime += &delta;
                    }
                }
                ih[h] = new_ih;
            }
            for &vi in &line_verts[h] {
                let vi = vi as usize;
                vert_sum[vi] += c;
                let new_iv = law.get(vert_sum[vi]);
                if new_iv != iv[vi] {
                    if let Some(ci) = vert_cell[vi] {
                        let delta = (BigInt::one() << new_iv) - (BigInt::one() << iv[vi]);
                        states[ci as usize].nprime += delta;
                    }
                    iv[vi] = new_iv;
                }
            }
        }

        if cfg.audit {
            for (ci, st) in states.iter().enumerate() {
                if st.processed {
                    continue;
                }
                let w: BigInt =
                    st.cross.iter().map(|&h| BigInt::one() << law.get(lambda[h as usize])).sum();
                assert_eq!(w, st.wprime, "W' drift on cell {ci}");
                let nf: BigInt = (0..verts.len())
                    .filter(|&vi| vert_cell[vi] == Some(ci as u32))
                    .map(|vi| {
                        let s: u64 = verts[vi].lines.iter().map(|&h| lambda[h as usize]).sum();
                        BigInt::one() << law.get(s)
                    })
                    .sum();
                assert_eq!(nf, st.nprime, "N' drift on cell {ci}");
            }
        }
    }

    if subcells.len() > b * t {
        return Err(RefineError::Budget { got: subcells.len(), max: b * t });
    }
    let max_crossed = lambda.iter().copied().max().unwrap_or(0);
    Ok(RefineResult {
        subcells,
        subcell_points,
        subcell_parent,
        order,
        lambda,
        max_crossed,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::geom::find_shear;
    use crate::oracle;
    use crate::scalar::rat;

    /// Generator points with the engine's shear applied, so all
    /// abscissae are distinct.
    fn sheared_points(family: gen::Family, n: usize, seed: u64) -> Vec<Point> {
        let pts = gen::points(family, n, seed);
        let sh = find_shear(&pts, &[]);
        pts.iter().map(|p| sh.apply_point(p)).collect()
    }

    fn pair_lines(pts: &[Point], max: usize) -> Vec<Line> {
        let mut ls = Vec::new();
        'outer: for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if pts[i].x != pts[j].x {
                    let l = Line::through(&pts[i], &pts[j]);
                    if !ls.contains(&l) {
                        ls.push(l);
                        if ls.len() == max {
                            break 'outer;
                        }
                    }
                }
            }
        }
        ls
    }

    /// Seeds a t-cell partition by cutting the plane and routing points.
    fn seed_cells(
        pts: &[Point],
        lines: &[Line],
        want: usize,
    ) -> Vec<(SimplexCell, Vec<usize>)> {
        let mut cells = vec![SimplexCell::plane()];
        let mut li = 0;
        while cells.len() < want && li < lines.len() {
            // Split the cell with the most points.
            let counts: Vec<usize> = cells
                .iter()
                .map(|c| pts.iter().filter(|p| c.contains(p)).count())
                .collect();
            let k = (0..cells.len()).max_by_key(|&i| counts[i]).unwrap();
            let sp = cells[k].split(&lines[li]);
            li += 1;
            if sp.plus.is_empty() || sp.minus.is_empty() {
                continue;
            }
            cells.remove(k);
            cells.extend(sp.plus);
            cells.extend(sp.minus);
        }
        let mut out: Vec<(SimplexCell, Vec<usize>)> =
            cells.into_iter().map(|c| (c, Vec::new())).collect();
        for (id, p) in pts.iter().enumerate() {
            let k = out.iter().position(|(c, _)| c.contains(p)).unwrap();
            out[k].1.push(id);
        }
        out
    }

    fn check_result(pts: &[Point], cells: &[(SimplexCell, Vec<usize>)], cfg: &RefineConfig, res: &RefineResult) {
        let b = cfg.b as usize;
        let t = cells.len();
        let cap = (2 * pts.len()).div_ceil(b * t).max(1);
        assert!(res.subcells.len() <= b * t);
        let mut seen = vec![false; pts.len()];
        for (sc, ids) in res.subcells.iter().zip(&res.subcell_points) {
            assert!(ids.len() <= cap);
            for &id in ids {
                assert!(!seen[id]);
                seen[id] = true;
                assert!(sc.contains(&pts[id]), "point {id} outside its subcell");
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn single_plane_cell() {
        let pts = sheared_points(gen::Family::Uniform, 16, 1);
        let lines = pair_lines(&pts, 12);
        let cells = vec![(SimplexCell::plane(), (0..16).collect::<Vec<_>>())];
        let cfg = RefineConfig { b: 4, ..Default::default() };
        let res = refine(&pts, &lines, &cells, &cfg).unwrap();
        check_result(&pts, &cells, &cfg, &res);
        // cap = ceil(32/4) = 8
        assert!(res.subcell_points.iter().all(|ids| ids.len() <= 8));
    }

    #[test]
    fn lambda_matches_recount() {
        let pts = sheared_points(gen::Family::Uniform, 40, 7);
        let lines = pair_lines(&pts, 30);
        let cells = seed_cells(&pts, &lines[25..], 5);
        let cfg = RefineConfig { b: 8, ..Default::default() };
        let res = refine(&pts, &lines, &cells, &cfg).unwrap();
        check_result(&pts, &cells, &cfg, &res);
        for (h, l) in lines.iter().enumerate() {
            assert_eq!(
                res.lambda[h] as usize,
                oracle::crossings(&res.subcells, l),
                "line {h}"
            );
        }
    }

    #[test]
    fn audit_incremental_equals_scratch() {
        let pts = sheared_points(gen::Family::Uniform, 30, 3);
        let lines = pair_lines(&pts, 20);
        let cells = seed_cells(&pts, &lines[16..], 4);
        let cfg = RefineConfig { b: 8, audit: true, trace: true, ..Default::default() };
        let res = refine(&pts, &lines, &cells, &cfg).unwrap();
        check_result(&pts, &cells, &cfg, &res);
        assert_eq!(res.trace.len(), cells.len());
        assert_eq!(res.order.len(), cells.len());
    }

    #[test]
    fn collinear_stress() {
        let pts = sheared_points(gen::Family::Collinear, 32, 5);
        let lines = pair_lines(&pts, 24);
        let cells = seed_cells(&pts, &lines[20..], 3);
        let cfg = RefineConfig { b: 8, audit: true, ..Default::default() };
        let res = refine(&pts, &lines, &cells, &cfg).unwrap();
        check_result(&pts, &cells, &cfg, &res);
    }

    #[test]
    fn selection_rule_transcription() {
        let cfg = RefineConfig { b: 16, ..Default::default() };
        // Literal re-evaluation: (1-β)/(1+β)·log2(b) + I_F >= 2·I_E with
        // β = 1/10, b = 16: (9/11)·4 + I_F >= 2·I_E  <=>  36 + 11·I_F >= 22·I_E.
        let states: Vec<(usize, Option<u64>, Option<u64>)> = vec![
            (0, Some(10), Some(3)),  // 36+33 >= 220? no  -> S2
            (1, Some(2), Some(1)),   // 36+11 >= 44? yes  -> S1
            (2, Some(2), Some(0)),   // 36 >= 44? no      -> S2
            (3, Some(5), None),      // I_F = -inf        -> S2
            (4, None, Some(7)),      // I_E = -inf        -> S1
            (5, Some(1), Some(0)),   // 36 >= 22? yes     -> S1
        ];
        // |S1| = 3, 2·3 >= 6: pick S1 member with smallest I_F: ids 2?, no —
        // S1 = {1 (I_F=1), 4 (I_F=7), 5 (I_F=0)} -> id 5.
        assert_eq!(select_cell(&states, &cfg), 5);
        // Drop id 5: S1 = {1, 4}, 2·2 >= 5? no -> S2 smallest I_E:
        // ids {0 (10), 2 (2), 3 (5)} -> id 2.
        let states2: Vec<_> = states.iter().filter(|(i, ..)| *i != 5).cloned().collect();
        assert_eq!(select_cell(&states2, &cfg), 2);
    }

    #[test]
    fn ri_rule_examples() {
        let cfg = RefineConfig { b: 16, beta: rat(1, 10), c_cut: rat(1, 4), ..Default::default() };
        // I_E = I_F = 0: branch 2, r = (1/4)·2^((0-0+4)/2) = 1.
        assert_eq!(compute_ri(Some(0), Some(0), &cfg), int(1));
        // Huge I_E: branch 1, r = (1/4)·2^floor(4·10/11) = (1/4)·2^3 = 2.
        assert_eq!(compute_ri(Some(50), Some(0), &cfg), int(2));
        // No crossing lines: trivial r.
        assert_eq!(compute_ri(None, Some(3), &cfg), int(1));
        // Cap property: r never exceeds c·2^ceil(j·q/(q+p)).
        let cap = rat(1, 4) * pow2_scalar(4);
        for ie in 0..20u64 {
            for if_ in 0..20u64 {
                assert!(compute_ri(Some(ie), Some(if_), &cfg) <= cap);
            }
        }
    }

    #[test]
    fn precondition_errors() {
        let pts = sheared_points(gen::Family::Uniform, 8, 2);
        let lines = pair_lines(&pts, 4);
        let cfg = RefineConfig::default();
        // Missing point.
        let cells = vec![(SimplexCell::plane(), (0..7).collect::<Vec<_>>())];
        assert!(matches!(
            refine(&pts, &lines, &cells, &cfg),
            Err(RefineError::PointMissing { point: 7 })
        ));
        // Bad b.
        let cells = vec![(SimplexCell::plane(), (0..8).collect::<Vec<_>>())];
        let bad = RefineConfig { b: 6, ..Default::default() };
        assert!(matches!(refine(&pts, &lines, &cells, &bad), Err(RefineError::BadB(6))));
    }

    #[test]
    fn edge_heavy_triangle_point_split() {
        // Many points on one edge line of a triangle cell, stressing
        // the tie-class paths of the corner cuts.
        let mut pts: Vec<Point> = (0..12).map(|i| Point::ints(2 * i + 1, 0)).collect();
        pts.push(Point::ints(2, 5));
        pts.push(Point::ints(4, 7));
        let tri = SimplexCell::triangle(
            &Point::ints(0, 0),
            &Point::ints(30, 0),
            &Point::ints(0, 30),
        );
        let ids: Vec<usize> = (0..pts.len()).collect();
        let ctx = PointCtx { pts: &pts, cap: 3 };
        let mut out = Vec::new();
        point_split(tri, ids, &ctx, &mut out);
        let mut seen = vec![false; pts.len()];
        for (c, ids) in &out {
            assert!(ids.len() <= 3);
            for &id in ids {
                assert!(!seen[id]);
                seen[id] = true;
                assert!(c.contains(&pts[id]));
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(out.len(), 5); // ceil(14/3) = 5 pieces exactly
    }
}
