//! Deterministic cuttings.
//!
//! A (1/r)-cutting for a set of lines is a set of generalized simplex
//! cells covering the parent region so that each cell's interior is
//! crossed by at most a 1/r fraction of the total line weight. Cells are
//! produced by recursive splitting: an overfull cell is split by the
//! crossing line minimizing the heavier child's crossing weight, with
//! ties broken by canonical line order.
//!
//! Weighted inputs carry power-of-two weights `2^I(h)`. They are first
//! normalized to a small integer multiset (at most five times the number
//! of distinct lines) and the cutting is computed on the multiset with
//! parameter `5r`; the finish test additionally checks the original
//! weight bound directly, so the crossing bound holds exactly for the
//! input weights.

use crate::cell::SimplexCell;
use crate::geom::{Dir, Line, Point};
use crate::scalar::{int, msb, sgn, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

pub struct Cutting {
    pub cells: Vec<SimplexCell>,
    /// Size of the normalized multiset, when one was formed.
    pub normalized_size: Option<BigInt>,
    /// Number of distinct input lines.
    pub distinct: usize,
}

struct Item {
    line: Line,
    /// Weight driving the split-selection and primary finish test.
    w_norm: BigInt,
    /// Original weight; the finish test enforces its bound too.
    w_orig: BigInt,
}

/// Unweighted cutting: each cell crossed by at most `m/r` distinct lines.
pub fn cut_unweighted(lines: &[Line], r: &Scalar, parent: &SimplexCell) -> Cutting {
    let mut dedup: BTreeMap<Line, ()> = BTreeMap::new();
    for l in lines {
        dedup.insert(l.clone(), ());
    }
    let items: Vec<Item> = dedup
        .into_keys()
        .map(|line| Item { line, w_norm: BigInt::one(), w_orig: BigInt::one() })
        .collect();
    let distinct = items.len();
    let cells = cut_items(&items, r, r, parent);
    Cutting { cells, normalized_size: None, distinct }
}

/// Converts weights `2^exp(h)` into small integer multiplicities.
/// With `q` the top bit of the total weight and `p` the top bit of the
/// number of lines, each line gets `2^(p+1+exp-q)` copies, at least one.
/// The resulting multiset has size at most `5m`.
pub fn normalize_multiset(weighted: &[(Line, u64)]) -> Vec<(Line, BigInt)> {
    let mut by_line: BTreeMap<Line, u64> = BTreeMap::new();
    for (l, e) in weighted {
        // Duplicate lines keep their largest exponent.
        let cur = by_line.entry(l.clone()).or_insert(*e);
        *cur = (*cur).max(*e);
    }
    let m = by_line.len();
    if m == 0 {
        return Vec::new();
    }
    let total: BigInt = by_line.values().map(|&e| BigInt::one() << e).sum();
    let q = msb(&total);
    let p = msb(&BigInt::from(m));
    by_line
        .into_iter()
        .map(|(l, e)| {
            let exp = p as i128 + 1 + e as i128 - q as i128;
            let mult = if exp >= 0 { BigInt::one() << (exp as u64) } else { BigInt::one() };
            (l, mult)
        })
        .collect()
}

/// Weighted cutting for weights `2^exp(h)`: each cell's crossing weight
/// is at most a `1/r` fraction of the total weight.
pub fn cut_weighted(weighted: &[(Line, u64)], r: &Scalar, parent: &SimplexCell) -> Cutting {
    let by_line: BTreeMap<Line, u64> = {
        let mut m = BTreeMap::new();
        for (l, e) in weighted {
            let cur = m.entry(l.clone()).or_insert(*e);
            *cur = (*cur).max(*e);
        }
        m
    };
    let flat: Vec<(Line, u64)> = by_line.iter().map(|(l, &e)| (l.clone(), e)).collect();
    let norm = normalize_multiset(&flat);
    let items: Vec<Item> = norm
        .into_iter()
        .map(|(line, mult)| {
            let e = by_line[&line];
            Item { line, w_norm: mult, w_orig: BigInt::one() << e }
        })
        .collect();
    let distinct = items.len();
    let normalized_size: BigInt = items.iter().map(|it| it.w_norm.clone()).sum();
    let r5 = r * crate::scalar::int(5);
    let cells = cut_items(&items, &r5, r, parent);
    Cutting { cells, normalized_size: Some(normalized_size), distinct }
}

/// One closure end of a line clipped to a cell: a boundary point, or a
/// recession direction when the intersection is unbounded that way.
enum End {
    Pt(Point),
    Ray(Dir),
}

impl End {
    fn side(&self, l: &Line) -> i8 {
        match self {
            End::Pt(p) => l.side(p),
            End::Ray(d) => l.side_dir(d),
        }
    }
}

/// Closure ends of `line` ∩ `cell` for a line crossing the cell.
fn clip_ends(cell: &SimplexCell, line: &Line) -> (End, End) {
    let d = line.direction();
    let p0 = if !line.b.is_zero() {
        Point::new(int(0), Scalar::from(-line.c.clone()) / Scalar::from(line.b.clone()))
    } else {
        Point::new(Scalar::from(-line.c.clone()) / Scalar::from(line.a.clone()), int(0))
    };
    let mut lo: Option<Scalar> = None;
    let mut hi: Option<Scalar> = None;
    for h in cell.constraints() {
        let s = int(h.side as i64);
        let f0 = &s
            * (Scalar::from(h.line.a.clone()) * &p0.x
                + Scalar::from(h.line.b.clone()) * &p0.y
                + Scalar::from(h.line.c.clone()));
        let f1 = &s * Scalar::from(&h.line.a * &d.x + &h.line.b * &d.y);
        if sgn(&f1) == 0 {
            continue;
        }
        let bound = -f0 / &f1;
        if sgn(&f1) > 0 {
            if lo.as_ref().map_or(true, |t| bound > *t) {
                lo = Some(bound);
            }
        } else if hi.as_ref().map_or(true, |t| bound < *t) {
            hi = Some(bound);
        }
    }
    let at = |t: &Scalar| {
        Point::new(&p0.x + t * Scalar::from(d.x.clone()), &p0.y + t * Scalar::from(d.y.clone()))
    };
    let e1 = lo.map_or(End::Ray(d.neg()), |t| End::Pt(at(&t)));
    let e2 = hi.map_or(End::Ray(d.clone()), |t| End::Pt(at(&t)));
    (e1, e2)
}

/// Recursive splitter. A cell is finished when its crossing weight obeys
/// both `w_norm * r_norm <= W_norm` and `w_orig * r_orig <= W_orig`.
fn cut_items(items: &[Item], r_norm: &Scalar, r_orig: &Scalar, parent: &SimplexCell) -> Vec<SimplexCell> {
    let total_norm: BigInt = items.iter().map(|it| it.w_norm.clone()).sum();
    let total_orig: BigInt = items.iter().map(|it| it.w_orig.clone()).sum();
    let finished = |cross: &[usize]| -> bool {
        let wn: BigInt = cross.iter().map(|&i| items[i].w_norm.clone()).sum();
        let wo: BigInt = cross.iter().map(|&i| items[i].w_orig.clone()).sum();
        &wn * r_norm.numer() <= &total_norm * r_norm.denom()
            && &wo * r_orig.numer() <= &total_orig * r_orig.denom()
    };
    if sgn(r_norm) <= 0 {
        return vec![parent.clone()];
    }

    let root_cross: Vec<usize> =
        (0..items.len()).filter(|&i| parent.crossed_by(&items[i].line)).collect();
    let mut out = Vec::new();
    let mut stack = vec![(parent.clone(), root_cross)];
    while let Some((cell, cross)) = stack.pop() {
        if finished(&cross) {
            out.push(cell);
            continue;
        }
        // Pick the crossing line minimizing the heavier side's weight;
        // items are in canonical line order, so first minimum wins.
        // Selection weights come from one clip of each line against the
        // cell: a line reaches a side of the split exactly when one of
        // its clipped ends lies strictly on that side (so only the
        // winning line's split is ever constructed).
        let ends: Vec<(End, End)> =
            cross.iter().map(|&i| clip_ends(&cell, &items[i].line)).collect();
        let mut best: Option<(BigInt, usize)> = None;
        for &h in &cross {
            let hl = &items[h].line;
            let mut wplus = BigInt::ZERO;
            let mut wminus = BigInt::ZERO;
            for (j, &i) in cross.iter().enumerate() {
                if i == h {
                    continue;
                }
                let (s1, s2) = (ends[j].0.side(hl), ends[j].1.side(hl));
                if s1 > 0 || s2 > 0 {
                    wplus += &items[i].w_norm;
                }
                if s1 < 0 || s2 < 0 {
                    wminus += &items[i].w_norm;
                }
            }
            let wmax = wplus.max(wminus);
            if best.as_ref().map_or(true, |(b, _)| wmax < *b) {
                best = Some((wmax, h));
            }
        }
        let (_, h) = best.expect("overfull cell with no usable crossing line");
        let split = cell.split(&items[h].line);
        for piece in split.plus.into_iter().chain(split.minus) {
            let sub: Vec<usize> = cross
                .iter()
                .copied()
                .filter(|&i| i != h && piece.crossed_by(&items[i].line))
                .collect();
            stack.push((piece, sub));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::geom::Point;
    use crate::oracle;
    use crate::scalar::{int, rat};

    fn sample_lines(n: usize, seed: u64) -> Vec<Line> {
        let pts = gen::points(gen::Family::Uniform, n, seed);
        let mut ls = Vec::new();
        for ch in pts.chunks(2) {
            if ch.len() == 2 && ch[0].x != ch[1].x {
                ls.push(Line::through(&ch[0], &ch[1]));
            }
        }
        ls
    }

    fn cover_points(lines: &[Line], seed: u64) -> Vec<Point> {
        let mut pts = Vec::new();
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                if let Some(p) = lines[i].intersect(&lines[j]) {
                    pts.push(p);
                }
            }
        }
        pts.extend(gen::points(gen::Family::Uniform, 40, seed ^ 0xfeed));
        pts
    }

    #[test]
    fn unweighted_bound_holds_exactly() {
        for seed in 0..4u64 {
            let ls = sample_lines(24, seed);
            let parent = SimplexCell::plane();
            for r in [int(2), int(4), rat(7, 2)] {
                let cut = cut_unweighted(&ls, &r, &parent);
                let weighted: Vec<(Line, BigInt)> = {
                    let mut dedup: Vec<Line> = ls.clone();
                    dedup.sort();
                    dedup.dedup();
                    dedup.into_iter().map(|l| (l, BigInt::one())).collect()
                };
                oracle::verify_cutting(&weighted, &cut.cells, &r, &cover_points(&ls, seed), None)
                    .unwrap_or_else(|e| panic!("seed {seed} r {r}: {e:?}"));
            }
        }
    }

    #[test]
    fn unweighted_respects_parent() {
        let ls = sample_lines(16, 11);
        let parent = SimplexCell::triangle(
            &Point::ints(-200, -200),
            &Point::ints(200, -200),
            &Point::ints(0, 200),
        );
        let cut = cut_unweighted(&ls, &int(3), &parent);
        let weighted: Vec<(Line, BigInt)> = {
            let mut d = ls.clone();
            d.sort();
            d.dedup();
            d.into_iter().map(|l| (l, BigInt::one())).collect()
        };
        let cover: Vec<Point> = cover_points(&ls, 11)
            .into_iter()
            .filter(|p| parent.contains(p))
            .collect();
        oracle::verify_cutting(&weighted, &cut.cells, &int(3), &cover, Some(&parent)).unwrap();
    }

    #[test]
    fn normalize_size_bound() {
        let ls = sample_lines(30, 5);
        for seed in 0..8u64 {
            let mut rng = gen::Rng::new(seed);
            let weighted: Vec<(Line, u64)> =
                ls.iter().map(|l| (l.clone(), rng.below(40))).collect();
            let norm = normalize_multiset(&weighted);
            let m = norm.len();
            let size: BigInt = norm.iter().map(|(_, mult)| mult.clone()).sum();
            assert!(size <= BigInt::from(5 * m), "seed {seed}: |Q'| = {size}, m = {m}");
            assert!(norm.iter().all(|(_, mult)| *mult >= BigInt::one()));
        }
    }

    #[test]
    fn weighted_bound_holds_exactly() {
        for seed in 0..3u64 {
            let ls = sample_lines(20, 100 + seed);
            let mut rng = gen::Rng::new(seed);
            let weighted: Vec<(Line, u64)> =
                ls.iter().map(|l| (l.clone(), rng.below(20))).collect();
            let parent = SimplexCell::plane();
            let r = int(3);
            let cut = cut_weighted(&weighted, &r, &parent);
            assert!(cut.normalized_size.clone().unwrap() <= BigInt::from(5 * cut.distinct));
            let orig: Vec<(Line, BigInt)> = {
                let mut by: BTreeMap<Line, u64> = BTreeMap::new();
                for (l, e) in &weighted {
                    let cur = by.entry(l.clone()).or_insert(*e);
                    *cur = (*cur).max(*e);
                }
                by.into_iter().map(|(l, e)| (l, BigInt::one() << e)).collect()
            };
            oracle::verify_cutting(&orig, &cut.cells, &r, &cover_points(&ls, seed), None)
                .unwrap_or_else(|e| panic!("seed {seed}: {e:?}"));
        }
    }

    #[test]
    fn small_r_returns_parent() {
        let ls = sample_lines(10, 2);
        let cut = cut_unweighted(&ls, &rat(1, 2), &SimplexCell::plane());
        assert_eq!(cut.cells.len(), 1);
    }
}
