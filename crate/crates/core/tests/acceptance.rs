//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voxelskip::bench::{median, run_benchmark, timed_build, BenchConfig, TfSpec};
use voxelskip::kdtree::build_kdtree;
use voxelskip::lbvh::{LbvhNodeKind, DEFAULT_BRICK_SIZE as LBVH_BRICK};
use voxelskip::morton;
use voxelskip::render::{render_frame, Camera, RenderOptions};
use voxelskip::svt::DEFAULT_BRICK_SIZE as SVT_BRICK;
use voxelskip::volume::{gen_blobs, gen_menger, gen_shell};
use voxelskip::{
    build_index, build_lbvh, build_svt_grid, classify, flag_bricks, occupancy, report_stats, Aabb, BinaryVolume,
    BuildParams, IndexKind, TransferFunction, Volume,
};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "menger occupancy", c1_menger_occupancy),
        (2, "dense shallow tree", c2_dense_shallow),
        (3, "svt oracle", c3_svt_oracle),
        (4, "lbvh validity", c4_lbvh_validity),
        (5, "max leaf size", c5_max_leaf_size),
        (6, "image equivalence", c6_image_equivalence),
        (7, "skipping effectiveness", c7_skipping),
        (8, "build cost ordering", c8_build_ordering),
        (9, "hybrid build parity", c9_hybrid_parity),
        (10, "benchmark csv", c10_bench_csv),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} ({secs:.2} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} ({secs:.2} s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn opaque() -> TransferFunction {
    TransferFunction::opaque([1.0; 3])
}

fn shell(dims: u32, radius: f64, thickness: f64) -> Volume {
    gen_shell([dims; 3], [dims as f64 / 2.0; 3], radius, thickness)
}

fn c1_menger_occupancy() -> Outcome {
    let start = Instant::now();
    let b = classify(&gen_menger(3), &opaque(), false);
    let pct = 100.0 * occupancy(&b);
    let elapsed = start.elapsed();
    ensure!(b.count() == 8000, "solid count {} != 8000", b.count());
    ensure!((pct - 40.7).abs() <= 0.5, "occupancy {pct:.3}% not within 0.5 of 40.7%");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("{pct:.2}% in {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

fn c2_dense_shallow() -> Outcome {
    let b = BinaryVolume::from_fn([64; 3], |_, _, _| true);
    let tree = build_kdtree(&build_svt_grid(&b, SVT_BRICK), &BuildParams::shallow()).map_err(|e| e.to_string())?;
    ensure!((tree.node_count(), tree.height()) == (1, 1), "got {} nodes, height {}", tree.node_count(), tree.height());
    let menger = classify(&gen_menger(3), &opaque(), false);
    let tree = build_kdtree(&build_svt_grid(&menger, SVT_BRICK), &BuildParams::shallow()).map_err(|e| e.to_string())?;
    Ok(format!(
        "dense: 1 node, height 1; menger level 3 shallow: {} node(s), height {}",
        tree.node_count(),
        tree.height()
    ))
}

fn random_box(rng: &mut impl Rng, dims: [u32; 3]) -> Aabb {
    let mut lo = [0; 3];
    let mut hi = [0; 3];
    for a in 0..3 {
        let x = rng.gen_range(0..=dims[a]);
        let y = rng.gen_range(0..=dims[a]);
        lo[a] = x.min(y);
        hi[a] = x.max(y);
    }
    Aabb::new(lo, hi)
}

fn brute_count(b: &BinaryVolume, bx: &Aabb) -> u64 {
    let mut n = 0;
    for z in bx.lo[2]..bx.hi[2] {
        for y in bx.lo[1]..bx.hi[1] {
            for x in bx.lo[0]..bx.hi[0] {
                n += b.get(x, y, z) as u64;
            }
        }
    }
    n
}

fn brute_shrink(b: &BinaryVolume, bx: &Aabb) -> Option<Aabb> {
    let mut tight: Option<Aabb> = None;
    for z in bx.lo[2]..bx.hi[2] {
        for y in bx.lo[1]..bx.hi[1] {
            for x in bx.lo[0]..bx.hi[0] {
                if b.get(x, y, z) {
                    let v = Aabb::voxel([x, y, z]);
                    tight = Some(tight.map_or(v, |t| t.union(&v)));
                }
            }
        }
    }
    tight
}

fn random_volume(rng: &mut impl Rng, dims: [u32; 3]) -> BinaryVolume {
    // Mix of sparse noise and a few solid boxes so shrink results vary.
    let density = rng.gen_range(0.0005..0.05);
    let boxes: Vec<Aabb> = (0..rng.gen_range(0..4))
        .map(|_| {
            let lo: [u32; 3] = std::array::from_fn(|a| rng.gen_range(0..dims[a]));
            let hi = std::array::from_fn(|a| (lo[a] + rng.gen_range(1..12)).min(dims[a]));
            Aabb::new(lo, hi)
        })
        .collect();
    BinaryVolume::from_fn(dims, |x, y, z| rng.gen_bool(density) || boxes.iter().any(|bx| bx.contains_point([x, y, z])))
}

fn c3_svt_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut queries = 0;
    for vol in 0..10 {
        let b = random_volume(&mut rng, [64; 3]);
        let g = build_svt_grid(&b, SVT_BRICK);
        for _ in 0..100 {
            let bx = random_box(&mut rng, [64; 3]);
            let (got, want) = (g.box_count(&bx), brute_count(&b, &bx));
            ensure!(got == want, "volume {vol}: box_count {bx:?} = {got}, brute force {want}");
            let (got, want) = (g.shrink_to_occupied(&bx), brute_shrink(&b, &bx));
            ensure!(got == want, "volume {vol}: shrink {bx:?} = {got:?}, brute force {want:?}");
            queries += 2;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("{queries} queries exact"))
}

fn c4_lbvh_validity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut leaves = 0;
    for vol in 0..20 {
        let dims = std::array::from_fn(|_| rng.gen_range(1..=80));
        let b = random_volume(&mut rng, dims);
        let bricks = flag_bricks(&b, LBVH_BRICK).map_err(|e| e.to_string())?;
        let mut nonempty = 0;
        let bd: [u32; 3] = std::array::from_fn(|a| dims[a].div_ceil(LBVH_BRICK));
        for z in 0..bd[2] {
            for y in 0..bd[1] {
                for x in 0..bd[0] {
                    let lo = [x, y, z].map(|c| c * LBVH_BRICK);
                    let hi = std::array::from_fn(|a| (lo[a] + LBVH_BRICK).min(dims[a]));
                    nonempty += (brute_count(&b, &Aabb::new(lo, hi)) > 0) as usize;
                }
            }
        }
        let bvh = build_lbvh(&bricks);
        ensure!(bvh.leaf_count() == nonempty, "volume {vol}: {} leaves, {nonempty} non-empty bricks", bvh.leaf_count());
        ensure!(bvh.leaves().count() == nonempty, "volume {vol}: leaf iterator disagrees");
        for (i, n) in bvh.nodes.iter().enumerate() {
            if let LbvhNodeKind::Inner { left, right, .. } = n.kind {
                let u = bvh.nodes[left as usize].bbox.union(&bvh.nodes[right as usize].bbox);
                ensure!(n.bbox == u, "volume {vol}: node {i} box {:?} != union {u:?}", n.bbox);
            }
        }
        leaves += nonempty;
    }
    for _ in 0..1000 {
        let p: [u32; 3] = std::array::from_fn(|_| rng.gen_range(0..morton::AXIS_LIMIT));
        let code = morton::encode(p[0], p[1], p[2]).map_err(|e| e.to_string())?;
        ensure!(morton::decode(code) == p, "morton round trip failed for {p:?}");
    }
    Ok(format!("{leaves} leaves over 20 volumes; 1000 morton round trips"))
}

fn c5_max_leaf_size() -> Outcome {
    let b = classify(&shell(128, 48.0, 2.0), &opaque(), true);
    let g = build_svt_grid(&b, SVT_BRICK);
    let capped = build_kdtree(&g, &BuildParams::deep(Some(32))).map_err(|e| e.to_string())?;
    let free = build_kdtree(&g, &BuildParams::deep(None)).map_err(|e| e.to_string())?;
    for leaf in capped.leaves() {
        ensure!(leaf.bbox.extents().iter().all(|&e| e <= 32), "leaf {:?} exceeds 32", leaf.bbox);
    }
    let widest = free.leaves().map(|l| *l.bbox.extents().iter().max().unwrap()).max().unwrap_or(0);
    ensure!(
        capped.node_count() > free.node_count(),
        "mls32 has {} nodes, unconstrained {}",
        capped.node_count(),
        free.node_count()
    );
    Ok(format!("mls32: {} nodes; no mls: {} nodes (widest leaf {widest})", capped.node_count(), free.node_count()))
}

fn equivalence_tfs() -> [(&'static str, TransferFunction); 2] {
    [
        ("ramp", TfSpec::default().load().unwrap()),
        ("steep", TransferFunction::ramp(0.45, 0.7, 0.9, [0.9, 0.3, 0.1], [0.2, 0.6, 1.0])),
    ]
}

fn c6_image_equivalence() -> Outcome {
    let start = Instant::now();
    let datasets =
        [("menger3", gen_menger(3)), ("shell128", shell(128, 48.0, 2.0)), ("blobs128", gen_blobs([128; 3], 100, 7))];
    let kinds = IndexKind::ALL.into_iter().filter(|&k| k != IndexKind::Naive);
    let kinds: Vec<IndexKind> = kinds.collect();
    let opts = RenderOptions::default();
    let mut frames = 0;
    let mut worst = 0;
    for (name, v) in &datasets {
        for (tf_name, tf) in equivalence_tfs() {
            let visible = classify(v, &tf, true);
            let cam = Camera::orbit(v.dims(), 35.0, 25.0, 1.0, 256, 256).unwrap();
            let naive = render_frame(v, &tf, &build_index(IndexKind::Naive, &visible).unwrap(), &cam, opts);
            for &kind in &kinds {
                let index = build_index(kind, &visible).map_err(|e| e.to_string())?;
                let f = render_frame(v, &tf, &index, &cam, opts);
                let d = f.max_channel_diff(&naive);
                ensure!(d <= 1, "{name}/{tf_name}/{kind}: max channel difference {d}");
                worst = worst.max(d);
                frames += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    Ok(format!("{frames} frames, max difference {worst}"))
}

fn orbit_samples(v: &Volume, tf: &TransferFunction, kind: IndexKind, frames: u32, viewport: u32) -> u64 {
    let index = build_index(kind, &classify(v, tf, true)).unwrap();
    (0..frames)
        .map(|i| {
            let cam = Camera::orbit(v.dims(), 360.0 * i as f64 / frames as f64, 0.0, 1.0, viewport, viewport).unwrap();
            render_frame(v, tf, &index, &cam, RenderOptions::default()).sample_count
        })
        .sum()
}

fn c7_skipping() -> Outcome {
    let tf = opaque();
    let v = shell(128, 40.0, 1.0);
    let occ = 100.0 * occupancy(&classify(&v, &tf, false));
    let naive = orbit_samples(&v, &tf, IndexKind::Naive, 4, 128);
    let kd = orbit_samples(&v, &tf, IndexKind::KdDeepMls32, 4, 128);
    let ratio = kd as f64 / naive as f64;
    ensure!(ratio <= 0.2, "shell ({occ:.2}% occupied): kd-deep-mls32 takes {:.1}% of naive samples", ratio * 100.0);
    let m = gen_menger(3);
    let m_ratio = orbit_samples(&m, &tf, IndexKind::KdDeepMls32, 4, 128) as f64
        / orbit_samples(&m, &tf, IndexKind::Naive, 4, 128) as f64;
    Ok(format!(
        "shell {occ:.2}% occupied: {:.1}% of naive samples; menger level 3 (recorded): {:.1}%",
        ratio * 100.0,
        m_ratio * 100.0
    ))
}

fn build_seconds(b: &BinaryVolume, kind: IndexKind, reps: u32) -> f64 {
    timed_build(kind, b, reps).unwrap().1
}

fn c8_build_ordering() -> Outcome {
    let b = classify(&shell(256, 96.0, 2.0), &opaque(), true);
    let lbvh = build_seconds(&b, IndexKind::Lbvh, 3);
    let shallow = build_seconds(&b, IndexKind::KdShallow, 3);
    let deep = build_seconds(&b, IndexKind::KdDeepMls32, 3);
    let detail = format!("lbvh {:.4} s, kd-shallow {:.4} s, kd-deep-mls32 {:.4} s", lbvh, shallow, deep);
    ensure!(2.0 * lbvh < shallow && 2.0 * shallow < deep, "{detail}");
    Ok(detail)
}

fn c9_hybrid_parity() -> Outcome {
    let b = classify(&shell(256, 96.0, 2.0), &opaque(), true);
    // Interleave the kinds so that machine load drifts affect both alike.
    let (mut shallow, mut hybrid) = (Vec::new(), Vec::new());
    for _ in 0..5 {
        shallow.push(build_seconds(&b, IndexKind::KdShallow, 1));
        hybrid.push(build_seconds(&b, IndexKind::Hybrid, 1));
    }
    let (shallow, hybrid) = (median(&mut shallow), median(&mut hybrid));
    let detail = format!("hybrid {hybrid:.4} s, kd-shallow {shallow:.4} s, ratio {:.2}", hybrid / shallow);
    ensure!(hybrid <= 1.5 * shallow, "{detail}");
    Ok(detail)
}

fn c10_bench_csv() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str| -> Result<String, String> {
        let mut cfg = BenchConfig {
            kinds: vec![IndexKind::Lbvh, IndexKind::KdDeepMls32, IndexKind::Hybrid],
            frames: 3,
            viewport: 64,
            reps: 1,
            csv: Some(dir.path().join(name)),
            ..Default::default()
        };
        cfg = cfg.with_dataset("gen:menger:level=3").map_err(|e| e.to_string())?;
        cfg = cfg.with_dataset("gen:shell:dims=64,radius=24,thickness=2").map_err(|e| e.to_string())?;
        run_benchmark(&cfg).map_err(|e| e.to_string())?;
        std::fs::read_to_string(dir.path().join(name)).map_err(|e| e.to_string())
    };
    let (a, b) = (run("a.csv")?, run("b.csv")?);
    let parse = |text: &str| -> Vec<csv::StringRecord> {
        csv::Reader::from_reader(text.as_bytes()).records().map(|r| r.unwrap()).collect()
    };
    let header = a.lines().next().unwrap_or_default();
    ensure!(header == "dataset,index,occupancy_pct,build_s,fps,nodes,height,samples", "header {header:?}");
    let (ra, rb) = (parse(&a), parse(&b));
    ensure!(ra.len() == 6, "{} rows", ra.len());
    // dataset, index, occupancy, nodes, height, samples; timings vary.
    for (x, y) in ra.iter().zip(&rb) {
        for col in [0, 1, 2, 5, 6, 7] {
            ensure!(x[col] == y[col], "column {col} differs: {:?} vs {:?}", &x[col], &y[col]);
        }
    }
    let menger_lbvh = &ra[0];
    let stats = report_stats(
        &build_index(IndexKind::Lbvh, &classify(&gen_menger(3), &TfSpec::default().load().unwrap(), true)).unwrap(),
    );
    ensure!(menger_lbvh[5] == stats.node_count.to_string(), "node column disagrees with report_stats");
    Ok(format!("6 rows, structural columns identical; menger occupancy column {}", &ra[0][2]))
}
