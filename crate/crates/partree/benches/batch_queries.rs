//! Batch query throughput: rayon fan-out vs. the sequential fallback
//! over the same immutable structures.

use criterion::{criterion_group, criterion_main, Criterion};
use partree::gen::{dataset, queries, Family, QueryKind};
use partree::io::Query;
use partree::par::{map_batch, map_batch_seq};
use partree::rangecount::{build_rangecount, triangle_query, RangeCountConfig, RangeCountIndex};
use partree::segquery::{build_segment_store, SegQueryConfig, SegmentStore};

fn range_batch(c: &mut Criterion) {
    let ds = dataset(Family::Uniform, 96, 3, true);
    let cfg = RangeCountConfig { r: Some(4), r1: Some(2), t_leaf: 16, ..Default::default() };
    let idx: RangeCountIndex = build_rangecount(&ds.points, cfg).unwrap();
    let qs: Vec<[partree::geom::Point; 3]> = queries(QueryKind::Triangle, 64, 11, &ds)
        .into_iter()
        .filter_map(|q| match q {
            Query::Triangle(t) => Some(t),
            _ => None,
        })
        .collect();
    let count = |t: &[partree::geom::Point; 3]| idx.count(&triangle_query(&t[0], &t[1], &t[2])).count;

    let mut g = c.benchmark_group("triangle_batch");
    g.bench_function("parallel", |b| b.iter(|| map_batch(&qs, count)));
    g.bench_function("sequential", |b| b.iter(|| map_batch_seq(&qs, count)));
    g.finish();
}

fn segment_batch(c: &mut Criterion) {
    let ds = dataset(Family::Uniform, 96, 5, true);
    let cfg = SegQueryConfig { r: Some(4), ..Default::default() };
    let store: SegmentStore = build_segment_store(&ds.segments, cfg).unwrap();
    let qs: Vec<partree::geom::Segment> = queries(QueryKind::Segment, 64, 13, &ds)
        .into_iter()
        .filter_map(|q| match q {
            Query::Segment(s) => Some(s),
            _ => None,
        })
        .collect();

    let mut g = c.benchmark_group("segment_batch");
    g.bench_function("parallel", |b| {
        b.iter(|| map_batch(&qs, |s| store.count_intersecting(s)))
    });
    g.bench_function("sequential", |b| {
        b.iter(|| map_batch_seq(&qs, |s| store.count_intersecting(s)))
    });
    g.finish();
}

criterion_group!(benches, range_batch, segment_batch);
criterion_main!(benches);
