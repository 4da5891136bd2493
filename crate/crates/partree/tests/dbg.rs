use partree::gen::{dataset, Family};
use partree::rangecount::{build_rangecount, RangeCountConfig};
use partree::rayshoot::{build_rayshoot, RayShootConfig};
use partree::segquery::{build_segment_store, SegQueryConfig};
use partree::stabbing::{build_stabbing, StabbingConfig};
use std::time::Instant;

#[test]
fn timing_probe() {
    let rc_cfg = RangeCountConfig {
        r: Some(4),
        r1: Some(2),
        t_leaf: 32,
        ..RangeCountConfig::default()
    };
    let st_cfg = StabbingConfig { r: Some(8), t_leaf: 16, ..StabbingConfig::default() };
    let sq_cfg = SegQueryConfig { r: Some(4), ..SegQueryConfig::default() };
    for n in [64usize, 256] {
        let ds = dataset(Family::Uniform, n, 1, true);
        let t0 = Instant::now();
        build_rangecount(&ds.points, rc_cfg.clone()).unwrap();
        eprintln!("n={n} rangecount build {:?}", t0.elapsed());
        let t0 = Instant::now();
        build_stabbing(&ds.triangles, st_cfg.clone()).unwrap();
        eprintln!("n={n} stabbing build {:?}", t0.elapsed());
        let t0 = Instant::now();
        build_segment_store(&ds.segments, sq_cfg.clone()).unwrap();
        eprintln!("n={n} segstore build {:?}", t0.elapsed());
        let t0 = Instant::now();
        build_rayshoot(
            &ds.segments,
            RayShootConfig { store: sq_cfg.clone(), ..RayShootConfig::default() },
        )
        .unwrap();
        eprintln!("n={n} rayshoot build {:?}", t0.elapsed());
    }
}
