//! Plain-text dataset and query formats.
//!
//! Datasets are line-oriented: a versioned header, `#` comments, and
//! records `P x y` (point), `S x1 y1 x2 y2` (segment),
//! `T x1 y1 x2 y2 x3 y3` (triangle). Coordinates are exact rationals
//! written `num/den` (the `/den` part omitted when the denominator is
//! one), so emit/parse round-trips are bit-exact.

use crate::geom::{Dir, Line, Point, Ray, Segment};
use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_traits::One;
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

pub const DATASET_HEADER: &str = "# partree dataset v1";
pub const QUERY_HEADER: &str = "# partree queries v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing or wrong header; expected `{0}`")]
    Header(&'static str),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    pub points: Vec<Point>,
    pub segments: Vec<Segment>,
    pub triangles: Vec<[Point; 3]>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    /// `T ...`: triangle range/containment query.
    Triangle([Point; 3]),
    /// `H a b c side`: halfplane query.
    Halfplane(Line, i8),
    /// `Q x y`: stabbing query point.
    Point(Point),
    /// `L a b c`: line intersection-detection query.
    Line(Line),
    /// `G x1 y1 x2 y2`: query segment.
    Segment(Segment),
    /// `R ox oy dx dy`: ray-shooting query.
    Ray(Ray),
}

fn fmt_scalar(s: &Scalar) -> String {
    if s.denom().is_one() {
        s.numer().to_string()
    } else {
        format!("{}/{}", s.numer(), s.denom())
    }
}

fn parse_scalar(tok: &str, line: usize) -> Result<Scalar, FormatError> {
    let bad = |msg: String| FormatError::Parse { line, msg };
    match tok.split_once('/') {
        None => {
            let n = BigInt::from_str(tok)
                .map_err(|e| bad(format!("bad integer `{tok}`: {e}")))?;
            Ok(Scalar::from_integer(n))
        }
        Some((n, d)) => {
            let n = BigInt::from_str(n)
                .map_err(|e| bad(format!("bad numerator `{tok}`: {e}")))?;
            let d = BigInt::from_str(d)
                .map_err(|e| bad(format!("bad denominator `{tok}`: {e}")))?;
            if d == BigInt::from(0u8) {
                return Err(bad(format!("zero denominator in `{tok}`")));
            }
            Ok(Scalar::new(n, d))
        }
    }
}

fn parse_point(toks: &[&str], line: usize) -> Result<Point, FormatError> {
    Ok(Point::new(parse_scalar(toks[0], line)?, parse_scalar(toks[1], line)?))
}

fn expect_args(toks: &[&str], n: usize, line: usize, rec: &str) -> Result<(), FormatError> {
    if toks.len() != n {
        Err(FormatError::Parse {
            line,
            msg: format!("`{rec}` record needs {n} fields, got {}", toks.len()),
        })
    } else {
        Ok(())
    }
}

impl Dataset {
    pub fn parse(text: &str) -> Result<Dataset, FormatError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == DATASET_HEADER => {}
            _ => return Err(FormatError::Header(DATASET_HEADER)),
        }
        let mut ds = Dataset::default();
        for (i, raw) in lines {
            let lineno = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = l.split_whitespace().collect();
            match toks[0] {
                "P" => {
                    expect_args(&toks[1..], 2, lineno, "P")?;
                    ds.points.push(parse_point(&toks[1..], lineno)?);
                }
                "S" => {
                    expect_args(&toks[1..], 4, lineno, "S")?;
                    let p = parse_point(&toks[1..3], lineno)?;
                    let q = parse_point(&toks[3..5], lineno)?;
                    if p == q {
                        return Err(FormatError::Parse {
                            line: lineno,
                            msg: "degenerate segment".into(),
                        });
                    }
                    ds.segments.push(Segment::new(p, q));
                }
                "T" => {
                    expect_args(&toks[1..], 6, lineno, "T")?;
                    let a = parse_point(&toks[1..3], lineno)?;
                    let b = parse_point(&toks[3..5], lineno)?;
                    let c = parse_point(&toks[5..7], lineno)?;
                    if crate::geom::orient(&a, &b, &c) == 0 {
                        return Err(FormatError::Parse {
                            line: lineno,
                            msg: "degenerate triangle".into(),
                        });
                    }
                    ds.triangles.push([a, b, c]);
                }
                other => {
                    return Err(FormatError::Parse {
                        line: lineno,
                        msg: format!("unknown record `{other}`"),
                    })
                }
            }
        }
        Ok(ds)
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{DATASET_HEADER}");
        for p in &self.points {
            let _ = writeln!(out, "P {} {}", fmt_scalar(&p.x), fmt_scalar(&p.y));
        }
        for s in &self.segments {
            let _ = writeln!(
                out,
                "S {} {} {} {}",
                fmt_scalar(&s.p.x),
                fmt_scalar(&s.p.y),
                fmt_scalar(&s.q.x),
                fmt_scalar(&s.q.y)
            );
        }
        for t in &self.triangles {
            let _ = writeln!(
                out,
                "T {} {} {} {} {} {}",
                fmt_scalar(&t[0].x),
                fmt_scalar(&t[0].y),
                fmt_scalar(&t[1].x),
                fmt_scalar(&t[1].y),
                fmt_scalar(&t[2].x),
                fmt_scalar(&t[2].y)
            );
        }
        out
    }
}

pub fn parse_queries(text: &str) -> Result<Vec<Query>, FormatError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == QUERY_HEADER => {}
        _ => return Err(FormatError::Header(QUERY_HEADER)),
    }
    let mut out = Vec::new();
    for (i, raw) in lines {
        let lineno = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        let q = match toks[0] {
            "T" => {
                expect_args(&toks[1..], 6, lineno, "T")?;
                Query::Triangle([
                    parse_point(&toks[1..3], lineno)?,
                    parse_point(&toks[3..5], lineno)?,
                    parse_point(&toks[5..7], lineno)?,
                ])
            }
            "H" => {
                expect_args(&toks[1..], 4, lineno, "H")?;
                let a = parse_scalar(toks[1], lineno)?;
                let b = parse_scalar(toks[2], lineno)?;
                let c = parse_scalar(toks[3], lineno)?;
                let side: i8 = toks[4].parse().map_err(|_| FormatError::Parse {
                    line: lineno,
                    msg: format!("bad side `{}`", toks[4]),
                })?;
                if side != 1 && side != -1 {
                    return Err(FormatError::Parse {
                        line: lineno,
                        msg: "side must be 1 or -1".into(),
                    });
                }
                Query::Halfplane(Line::from_rational(&a, &b, &c), side)
            }
            "Q" => {
                expect_args(&toks[1..], 2, lineno, "Q")?;
                Query::Point(parse_point(&toks[1..], lineno)?)
            }
            "L" => {
                expect_args(&toks[1..], 3, lineno, "L")?;
                let a = parse_scalar(toks[1], lineno)?;
                let b = parse_scalar(toks[2], lineno)?;
                let c = parse_scalar(toks[3], lineno)?;
                Query::Line(Line::from_rational(&a, &b, &c))
            }
            "G" => {
                expect_args(&toks[1..], 4, lineno, "G")?;
                Query::Segment(Segment::new(
                    parse_point(&toks[1..3], lineno)?,
                    parse_point(&toks[3..5], lineno)?,
                ))
            }
            "R" => {
                expect_args(&toks[1..], 4, lineno, "R")?;
                let origin = parse_point(&toks[1..3], lineno)?;
                let dx = parse_scalar(toks[3], lineno)?;
                let dy = parse_scalar(toks[4], lineno)?;
                let x = dx.numer() * dy.denom();
                let y = dy.numer() * dx.denom();
                Query::Ray(Ray::new(origin, Dir::new(x, y)))
            }
            other => {
                return Err(FormatError::Parse {
                    line: lineno,
                    msg: format!("unknown query record `{other}`"),
                })
            }
        };
        out.push(q);
    }
    Ok(out)
}

pub fn emit_queries(queries: &[Query]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{QUERY_HEADER}");
    for q in queries {
        match q {
            Query::Triangle([a, b, c]) => {
                let _ = writeln!(
                    out,
                    "T {} {} {} {} {} {}",
                    fmt_scalar(&a.x),
                    fmt_scalar(&a.y),
                    fmt_scalar(&b.x),
                    fmt_scalar(&b.y),
                    fmt_scalar(&c.x),
                    fmt_scalar(&c.y)
                );
            }
            Query::Halfplane(l, side) => {
                let _ = writeln!(out, "H {} {} {} {}", l.a, l.b, l.c, side);
            }
            Query::Point(p) => {
                let _ = writeln!(out, "Q {} {}", fmt_scalar(&p.x), fmt_scalar(&p.y));
            }
            Query::Line(l) => {
                let _ = writeln!(out, "L {} {} {}", l.a, l.b, l.c);
            }
            Query::Segment(s) => {
                let _ = writeln!(
                    out,
                    "G {} {} {} {}",
                    fmt_scalar(&s.p.x),
                    fmt_scalar(&s.p.y),
                    fmt_scalar(&s.q.x),
                    fmt_scalar(&s.q.y)
                );
            }
            Query::Ray(r) => {
                let _ = writeln!(
                    out,
                    "R {} {} {} {}",
                    fmt_scalar(&r.origin.x),
                    fmt_scalar(&r.origin.y),
                    r.dir.x,
                    r.dir.y
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn dataset_roundtrip() {
        let ds = Dataset {
            points: vec![Point::ints(3, -4), Point::new(rat(1, 3), rat(-7, 2))],
            segments: vec![Segment::new(Point::ints(0, 0), Point::ints(5, 5))],
            triangles: vec![[Point::ints(0, 0), Point::ints(4, 0), Point::ints(0, 4)]],
        };
        let text = ds.emit();
        let back = Dataset::parse(&text).unwrap();
        assert_eq!(ds, back);
        // Emit is stable.
        assert_eq!(text, back.emit());
    }

    #[test]
    fn dataset_errors() {
        assert!(matches!(Dataset::parse("no header"), Err(FormatError::Header(_))));
        let bad = format!("{DATASET_HEADER}\nP 1\n");
        assert!(matches!(bad.parse_err(), FormatError::Parse { line: 2, .. }));
        let bad = format!("{DATASET_HEADER}\nP 1 x\n");
        assert!(matches!(bad.parse_err(), FormatError::Parse { line: 2, .. }));
        let bad = format!("{DATASET_HEADER}\nS 1 1 1 1\n");
        assert!(matches!(bad.parse_err(), FormatError::Parse { line: 2, .. }));
        let bad = format!("{DATASET_HEADER}\nP 1/0 2\n");
        assert!(matches!(bad.parse_err(), FormatError::Parse { line: 2, .. }));
    }

    trait ParseErr {
        fn parse_err(&self) -> FormatError;
    }
    impl ParseErr for String {
        fn parse_err(&self) -> FormatError {
            Dataset::parse(self).unwrap_err()
        }
    }

    #[test]
    fn query_roundtrip() {
        let qs = vec![
            Query::Triangle([Point::ints(0, 0), Point::ints(3, 0), Point::ints(0, 3)]),
            Query::Halfplane(Line::through(&Point::ints(0, 0), &Point::ints(1, 2)), -1),
            Query::Point(Point::new(rat(5, 3), int(2))),
            Query::Line(Line::through(&Point::ints(1, 1), &Point::ints(4, 5))),
            Query::Segment(Segment::new(Point::ints(-2, 0), Point::ints(3, 3))),
            Query::Ray(Ray::new(Point::ints(1, 1), Dir::ints(2, -1))),
        ];
        let text = emit_queries(&qs);
        assert_eq!(parse_queries(&text).unwrap(), qs);
    }
}
