//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one PASS or FAIL line; exits non-zero on any FAIL.

mod common;
#[path = "../../core/tests/common/mod.rs"]
mod core_common;

use std::fs;
use std::panic;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use tryon_cli::layout::*;
use tryon_cli::{run_eval, PipelineConfig};
use tryon_core::imaging::io::save_image;
use tryon_core::imaging::{lip, ImageBuffer, LabelScheme, ParseMap};
use tryon_core::keypoints::{HandLandmarks, Side};
use tryon_core::locate::{watch_from_hand, wrist_fallback};
use tryon_core::metrics::{ssim, Resolution, C1};
use tryon_core::tps::{
    fit_tps, gic_loss, l1_loss, tps_grid, warp_image, GmmConfig, GmmProblem, TpsParams, WarpGrid,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(t)
}

fn tps_identity() -> Check {
    let mut rng = core_common::rng(1);
    let img = ImageBuffer::new(256, 192, 3, (0..256 * 192 * 3).map(|_| rng.random::<u8>()).collect()).unwrap();
    let start = Instant::now();
    let grid = tps_grid(&TpsParams::zeros(5), 256, 192).map_err(|e| e.to_string())?;
    let out = warp_image(&img, &grid, 255).map_err(|e| e.to_string())?;
    let t = within(Duration::from_secs(1), start)?;
    ensure(out == img, || "output differs from input".into())?;
    Ok(format!("256x192 RGB bit-identical in {t:.2?}"))
}

fn tps_interpolation() -> Check {
    let mut rng = core_common::rng(2);
    let mut worst = 0.0f64;
    for draw in 0..20 {
        let k = if draw % 2 == 0 { 5 } else { 3 };
        // (W-1) and (H-1) divisible by k-1 put every control point on a pixel
        let (w, h) = (129u32, 97u32);
        let params = core_common::random_params(&mut rng, k, 0.3);
        let grid = tps_grid(&params, w, h).map_err(|e| e.to_string())?;
        let (hx, hy) = ((w - 1) as f64 / 2.0, (h - 1) as f64 / 2.0);
        for j in 0..k {
            for i in 0..k {
                let (px, py) = (i as u32 * (w - 1) / (k as u32 - 1), j as u32 * (h - 1) / (k as u32 - 1));
                let idx = j * k + i;
                let want = (px as f64 + params.dx[idx] * hx, py as f64 + params.dy[idx] * hy);
                let got = grid.get(px, py);
                let rel = ((got.0 - want.0).abs() / want.0.abs().max(1.0)).max((got.1 - want.1).abs() / want.1.abs().max(1.0));
                worst = worst.max(rel);
            }
        }
    }
    ensure(worst <= 1e-9, || format!("worst relative error {worst:.3e}"))?;
    Ok(format!("20 draws, worst relative error {worst:.2e}"))
}

fn gradient_correctness() -> Check {
    let start = Instant::now();
    let eps = 1e-4;
    let cfg = GmmConfig {
        gic_stride: 3,
        fill: 128,
        ..GmmConfig::default()
    };
    let mut rng = core_common::rng(7);
    let mut worst = 0.0f64;
    let (mut kept, mut rejected) = (0, 0);
    while kept < 20 {
        ensure(rejected < 200, || "too many draws near a kink".into())?;
        let acc = core_common::smooth_image(&mut rng, 24, 18);
        let target = core_common::smooth_image(&mut rng, 24, 18);
        let params = core_common::random_params(&mut rng, cfg.grid_k, 0.08);
        if core_common::near_kink(&acc, &target, &cfg, &params, eps) {
            rejected += 1;
            continue;
        }
        let problem = GmmProblem::new(&acc, &target, &cfg).map_err(|e| e.to_string())?;
        let eval = problem.evaluate(&params, true).map_err(|e| e.to_string())?;
        let analytic: Vec<f64> = eval.grad_dx.iter().chain(&eval.grad_dy).copied().collect();
        let numeric = core_common::finite_difference_gradient(&problem, &params, eps);
        worst = worst.max(core_common::relative_error(&analytic, &numeric));
        kept += 1;
    }
    let t = within(Duration::from_secs(30), start)?;
    ensure(worst < 1e-3, || format!("worst relative error {worst:.3e}"))?;
    Ok(format!("{kept} kink-free draws ({rejected} rejected), worst relative error {worst:.2e}, {t:.2?}"))
}

fn rect_image(dx: i32, dy: i32) -> ImageBuffer {
    let mut img = ImageBuffer::filled(64, 48, 1, 0).unwrap();
    for y in 16..32 {
        for x in 20..44 {
            img.pixel_mut((x + dx) as u32, (y + dy) as u32)[0] = 255;
        }
    }
    img
}

fn known_warp_recovery() -> Check {
    let acc = rect_image(0, 0);
    let target = rect_image(5, -3);
    let cfg = GmmConfig {
        fill: 0,
        max_steps: 5000,
        ..GmmConfig::default()
    };
    let start = Instant::now();
    let fit = fit_tps(&acc, &target, &cfg, &TpsParams::zeros(cfg.grid_k)).map_err(|e| e.to_string())?;
    let grid = tps_grid(&fit.params, 64, 48).map_err(|e| e.to_string())?;
    let t = within(Duration::from_secs(60), start)?;
    let (mx, my) = grid
        .mean_forward_displacement(|x, y| target.pixel(x, y)[0] > 0)
        .ok_or("empty target")?;
    let warped = warp_image(&acc, &grid, cfg.fill).map_err(|e| e.to_string())?;
    let l1 = l1_loss(&warped, &target).map_err(|e| e.to_string())?;
    ensure((mx - 5.0).abs() <= 0.5 && (my + 3.0).abs() <= 0.5, || {
        format!("mean displacement ({mx:.3}, {my:.3})")
    })?;
    ensure(l1 < 0.01, || format!("final L1 {l1:.4}"))?;
    Ok(format!("mean displacement ({mx:.3}, {my:.3}), L1 {l1:.5}, {} steps in {t:.2?}", cfg.max_steps))
}

/// Sum over interior lattice points of the two distance-difference terms.
fn gic_brute_force(grid: &WarpGrid, stride: u32) -> f64 {
    let (w, h) = grid.dims();
    let at = |a: i64, b: i64| grid.get((a * stride as i64) as u32, (b * stride as i64) as u32);
    let dist = |p: (f64, f64), q: (f64, f64)| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
    let (nx, ny) = (((w - 1) / stride + 1) as i64, ((h - 1) / stride + 1) as i64);
    let mut total = 0.0;
    for b in 1..ny - 1 {
        for a in 1..nx - 1 {
            let p = at(a, b);
            total += (dist(p, at(a + 1, b)) - dist(p, at(a - 1, b))).abs();
            total += (dist(p, at(a, b + 1)) - dist(p, at(a, b - 1))).abs();
        }
    }
    total
}

fn gic_loss_checks() -> Check {
    let spacings = [(1.0, 1.0), (2.0, 3.0), (0.5, 0.25), (1.75, 3.5), (7.0, 0.125), (-1.0, 2.0)];
    for (sx, sy) in spacings {
        for stride in [1, 3, 4] {
            let grid = WarpGrid::from_fn(40, 30, |x, y| (-12.5 + sx * x as f64, 100.0 + sy * y as f64));
            let v = gic_loss(&grid, stride).map_err(|e| e.to_string())?;
            ensure(v == 0.0, || format!("spacing ({sx}, {sy}) stride {stride} gives {v:e}"))?;
        }
    }
    let mut rng = core_common::rng(5);
    let mut worst = 0.0f64;
    for draw in 0..50 {
        let stride = 1 + draw % 4;
        let amp = rng.random_range(0.1..3.0);
        let noise: Vec<(f64, f64)> = (0..40 * 30)
            .map(|_| (rng.random_range(-amp..amp), rng.random_range(-amp..amp)))
            .collect();
        let grid = WarpGrid::from_fn(40, 30, |x, y| {
            let n = noise[(y * 40 + x) as usize];
            (x as f64 * 1.5 + n.0, y as f64 + n.1)
        });
        let got = gic_loss(&grid, stride).map_err(|e| e.to_string())?;
        let want = gic_brute_force(&grid, stride);
        worst = worst.max((got - want).abs() / want.abs().max(1.0));
    }
    ensure(worst <= 1e-9, || format!("worst relative deviation from brute force {worst:.3e}"))?;
    Ok(format!("0 on {} uniform grids; 50 perturbed grids within {worst:.1e} of brute force", spacings.len() * 3))
}

fn hand_from(k0: (f64, f64), v: (f64, f64), w: (f64, f64)) -> HandLandmarks {
    let m = (k0.0 - v.0, k0.1 - v.1);
    let mut points = [(k0.0 + 1.0, k0.1 + 1.0); 21];
    points[0] = k0;
    points[9] = (m.0 + w.0, m.1 + w.1);
    points[13] = (m.0 - w.0, m.1 - w.1);
    HandLandmarks {
        points,
        handedness: Side::Left,
    }
}

fn localization_algebra() -> Check {
    // (K0, K0 - midpoint(K9, K13), finger spread) → center K0 + v, radius |v|
    let cases = [
        ((100.0, 200.0), (0.0, 50.0), (6.0, 2.0), (100.0, 250.0), 50.0),
        ((320.5, 410.25), (3.0, 4.0), (-10.0, 3.0), (323.5, 414.25), 5.0),
        ((12.0, 700.0), (-5.0, 12.0), (4.0, 0.5), (7.0, 712.0), 13.0),
        ((640.0, 96.0), (15.0, -8.0), (0.0, 9.0), (655.0, 88.0), 17.0),
        ((0.5, 0.5), (-20.0, -21.0), (2.25, -1.0), (-19.5, -20.5), 29.0),
    ];
    for (i, &(k0, v, w, center, radius)) in cases.iter().enumerate() {
        let site = watch_from_hand(&hand_from(k0, v, w)).map_err(|e| e.to_string())?;
        ensure(site.center == center && site.radius == radius, || {
            format!("set {i}: got {:?} r {}, want {center:?} r {radius}", site.center, site.radius)
        })?;
    }
    let mut rng = core_common::rng(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut points = [(0.0, 0.0); 21];
        for p in points.iter_mut() {
            *p = (rng.random_range(0.0..1024.0), rng.random_range(0.0..768.0));
        }
        let h = HandLandmarks {
            points,
            handedness: Side::Right,
        };
        let t = (rng.random_range(-300.0..300.0), rng.random_range(-300.0..300.0));
        let a = watch_from_hand(&h).map_err(|e| e.to_string())?;
        let b = watch_from_hand(&h.translated(t.0, t.1)).map_err(|e| e.to_string())?;
        let dev = (b.center.0 - a.center.0 - t.0)
            .abs()
            .max((b.center.1 - a.center.1 - t.1).abs())
            .max((b.radius - a.radius).abs());
        worst = worst.max(dev);
    }
    ensure(worst < 1e-9, || format!("translation equivariance off by {worst:.3e}"))?;
    Ok(format!("5 hand-built sets exact; 100 translated draws within {worst:.1e} px"))
}

fn fallback_geometry() -> Check {
    struct Case {
        rects: [(u32, u32, u32, u32); 2],
        labels: [u8; 2],
        gap_center: (f64, f64),
    }
    let cases = [
        // vertical forearm split by a 20-row gap
        Case {
            rects: [(80, 40, 119, 139), (80, 160, 119, 259)],
            labels: [lip::LEFT_ARM, lip::LEFT_ARM],
            gap_center: (99.5, 149.5),
        },
        // horizontal arm, different labels on the two sides
        Case {
            rects: [(10, 100, 69, 129), (86, 100, 145, 129)],
            labels: [lip::RIGHT_ARM, lip::LEFT_ARM],
            gap_center: (77.5, 114.5),
        },
        // segments of unequal length (96 and 100 rows)
        Case {
            rects: [(120, 20, 149, 115), (120, 130, 149, 229)],
            labels: [lip::RIGHT_ARM, lip::RIGHT_ARM],
            gap_center: (134.5, 122.5),
        },
    ];
    let mut worst = 0.0f64;
    for (i, case) in cases.iter().enumerate() {
        let mut parse = ParseMap::filled(200, 300, lip::BACKGROUND, LabelScheme::LIP).unwrap();
        for (r, &label) in case.rects.iter().zip(&case.labels) {
            parse.fill_rect(r.0, r.1, r.2, r.3, label).unwrap();
        }
        let got = wrist_fallback(&parse).map_err(|e| e.to_string())?;
        // solid rectangles: centroid is the box center
        let centroid = |r: &(u32, u32, u32, u32)| ((r.0 + r.2) as f64 / 2.0, (r.1 + r.3) as f64 / 2.0);
        let (a, b) = (centroid(&case.rects[0]), centroid(&case.rects[1]));
        let oracle = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
        ensure((got.0 - oracle.0).abs() < 1e-9 && (got.1 - oracle.1).abs() < 1e-9, || {
            format!("case {i}: got {got:?}, centroid oracle {oracle:?}")
        })?;
        let d = ((got.0 - case.gap_center.0).powi(2) + (got.1 - case.gap_center.1).powi(2)).sqrt();
        worst = worst.max(d);
        ensure(d <= 2.0, || format!("case {i}: {d:.2} px from the gap center"))?;
    }
    Ok(format!("3 arm layouts match the centroid oracle, at most {worst:.2} px from the gap center"))
}

fn ssim_checks() -> Check {
    let mut rng = core_common::rng(8);
    for _ in 0..5 {
        let img = core_common::smooth_image(&mut rng, 48, 40);
        let s = ssim(&img, &img).map_err(|e| e.to_string())?;
        ensure((s - 1.0).abs() <= 1e-9, || format!("identity pair scored {s}"))?;
    }
    let black = ImageBuffer::filled(32, 32, 1, 0).unwrap();
    let white = ImageBuffer::filled(32, 32, 1, 255).unwrap();
    let closed = (2.0 * 0.0 * 255.0 + C1) / (255.0f64.powi(2) + C1);
    let s = ssim(&black, &white).map_err(|e| e.to_string())?;
    ensure((s - closed).abs() <= 1e-9, || format!("constant pair {s:e}, closed form {closed:e}"))?;
    let base = core_common::smooth_image(&mut rng, 64, 48);
    let mut noise_rng = core_common::rng(9);
    let unit: Vec<f64> = (0..base.data().len()).map(|_| noise_rng.random_range(-1.0..1.0)).collect();
    let scores: Vec<f64> = [8.0, 24.0, 64.0]
        .iter()
        .map(|amp| {
            let data = base
                .data()
                .iter()
                .zip(&unit)
                .map(|(&v, n)| (v as f64 + amp * n).round().clamp(0.0, 255.0) as u8)
                .collect();
            ssim(&base, &ImageBuffer::new(64, 48, 3, data).unwrap()).unwrap()
        })
        .collect();
    ensure(scores[0] > scores[1] && scores[1] > scores[2], || format!("not monotone: {scores:?}"))?;
    Ok(format!(
        "identity 1.0, constant pair {s:.4e} (closed form {closed:.4e}), noise {:.4} > {:.4} > {:.4}",
        scores[0], scores[1], scores[2]
    ))
}

fn tryon(args: &[&str]) -> Result<i32, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_tryon"))
        .args(args)
        .env("TRYON_LOG", "warn")
        .status()
        .map_err(|e| e.to_string())?;
    status.code().ok_or_else(|| "terminated by signal".into())
}

fn end_to_end() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let kinds = [common::Kind::Hand, common::Kind::Wrist, common::Kind::Fallback];
    let mut roots = Vec::new();
    for run in ["first", "second"] {
        let root = dir.path().join(run);
        common::write_tree(&root, &kinds);
        let r = root.to_str().unwrap().to_string();
        for stage in ["prepare", "warp", "eval"] {
            let code = tryon(&[stage, "--root", &r, "--deterministic", "--jobs", "3"])?;
            ensure(code == 0, || format!("{run} run: {stage} exited {code}"))?;
        }
        roots.push(root);
    }
    let t = within(Duration::from_secs(120), start)?;
    let root = &roots[0];
    for sub in [AGNOSTIC_MASK_DIR, AGNOSTIC_DIR, TARGET_CROP_DIR, WARP_DIR] {
        for id in common::ids(3) {
            let p = output_path(root, sub, &id, "png");
            ensure(p.is_file(), || format!("missing {}", p.display()))?;
        }
    }
    for id in common::ids(3) {
        for p in [output_path(root, PARAMS_DIR, &id, "txt"), output_path(root, LOSS_DIR, &id, "csv")] {
            ensure(p.is_file(), || format!("missing {}", p.display()))?;
        }
    }
    for f in ["scores.csv", "summary.csv", "errors.csv", "table.txt"] {
        ensure(root.join(EVAL_DIR).join(f).is_file(), || format!("missing eval/{f}"))?;
    }
    let (a, b) = (common::snapshot(&roots[0]), common::snapshot(&roots[1]));
    ensure(a.keys().eq(b.keys()), || "artifact trees list different files".into())?;
    if let Some((k, _)) = a.iter().find(|(k, v)| b[*k] != **v) {
        return Err(format!("{} differs between runs", k.display()));
    }
    Ok(format!("3 images, exit 0 for prepare/warp/eval, {} files byte-identical across runs, {t:.2?}", a.len()))
}

fn eval_count_contract() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (gen, truth) = (dir.path().join("generated"), dir.path().join("truth"));
    fs::create_dir_all(&gen).map_err(|e| e.to_string())?;
    fs::create_dir_all(&truth).map_err(|e| e.to_string())?;
    let mut rng = core_common::rng(10);
    for i in 0..48 {
        let a = core_common::smooth_image(&mut rng, 48, 64);
        let b = core_common::smooth_image(&mut rng, 48, 64);
        save_image(&gen.join(format!("{i:02}.png")), &a).map_err(|e| e.to_string())?;
        save_image(&truth.join(format!("{i:02}.png")), &b).map_err(|e| e.to_string())?;
    }
    let cfg = PipelineConfig {
        dataset_root: dir.path().to_path_buf(),
        resolutions: Resolution::defaults(),
        ..PipelineConfig::default()
    };
    let report = run_eval(&cfg, &gen, &truth).map_err(|e| e.to_string())?;
    let csv = fs::read_to_string(dir.path().join(EVAL_DIR).join("scores.csv")).map_err(|e| e.to_string())?;
    let rows = csv.lines().count() - 1;
    ensure(report.rows.len() == 144 && rows == 144, || {
        format!("{} report rows, {rows} csv rows", report.rows.len())
    })?;
    ensure(report.errors.is_empty(), || format!("{} errors", report.errors.len()))?;
    let tags: Vec<String> = cfg.resolutions.iter().map(|r| format!("{}:{}x{}", r.tag, r.width, r.height)).collect();
    Ok(format!("48 pairs x [{}] = {rows} score rows", tags.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("TPS identity", tps_identity),
        ("TPS interpolation", tps_interpolation),
        ("gradient correctness", gradient_correctness),
        ("known-warp recovery", known_warp_recovery),
        ("GIC loss", gic_loss_checks),
        ("localization algebra", localization_algebra),
        ("fallback geometry", fallback_geometry),
        ("SSIM", ssim_checks),
        ("end-to-end fixture", end_to_end),
        ("evaluation count contract", eval_count_contract),
    ];
    // only run criteria whose number or name contains the filter, if one is given
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let n = n + 1;
        if let Some(f) = &filter {
            if !name.contains(f.as_str()) && n.to_string() != *f {
                continue;
            }
        }
        let result = panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match result {
            Ok(detail) => println!("PASS criterion {n:>2} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n:>2} {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criterion(s) failed");
        std::process::exit(1);
    }
}
