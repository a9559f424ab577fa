//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the verdicts are always printed; exits non-zero if any fails.

use std::collections::BTreeSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcbfeat::color::{convert_pixel, hls_to_rgb, hsv_to_rgb, rgb_to_hls, rgb_to_hsv, ColorSpaceId};
use pcbfeat::pipeline::{
    run_extract, run_rank, synth_dataset, with_jobs, PipelineConfig, SyntheticBoardSpec, TopFeatures,
};
use pcbfeat::selection::{
    feature_importances, fit_forest, gini_gain, gini_impurity, FeatureMatrix, FeaturesPerSplit, ForestConfig,
    QuartileSummary,
};
use pcbfeat::shape::{doh_blobs, shi_tomasi_corners, BlobParams, CornerParams};
use pcbfeat::texture::{gabor_responses, glcm, rlbp_ulbp_code, GaborParams};
use pcbfeat::{Family, GrayRaster, ImageRaster};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [(u32, &str, Duration, Check); 10] = [
        (1, "gini oracle", Duration::from_secs(1), gini_oracle),
        (2, "glcm brute-force equivalence", Duration::from_secs(5), glcm_equivalence),
        (3, "lbp exhaustiveness", Duration::from_secs(1), lbp_exhaustive),
        (4, "color round-trips", Duration::from_secs(5), color_round_trips),
        (5, "corner geometry", Duration::from_secs(10), corner_geometry),
        (6, "blob geometry", Duration::from_secs(10), blob_geometry),
        (7, "gabor orientation selectivity", Duration::from_secs(30), gabor_selectivity),
        (8, "color features lead on synthetic boards", Duration::from_secs(300), color_leads),
        (9, "ksize sweep health", Duration::from_secs(600), ksize_sweep),
        (10, "determinism across worker counts", Duration::from_secs(300), determinism),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > limit => Err(format!("{d}; took {elapsed:.2?}, limit {limit:?}")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name} ({elapsed:.2?}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name} ({elapsed:.2?}): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

fn gini_oracle() -> Result<String, String> {
    let g = |p: &[f64]| gini_impurity(p).map_err(|e| e.to_string());
    ensure!(g(&[0.5, 0.5])? == 0.5, "gini [0.5,0.5]");
    ensure!(g(&[0.25, 0.75])? == 0.375, "gini [0.25,0.75]");
    ensure!(g(&[1.0, 0.0])? == 0.0, "gini pure");
    let perfect = gini_gain(0.5, 0.0, 0.0, 0.5, 0.5).map_err(|e| e.to_string())?;
    ensure!(perfect == 0.5, "perfect split gain {perfect}");

    // x0 = 1..6 with classes [0,0,0,1,0,1]; x1 only isolates the fifth sample.
    // Root: x0 <= 3.5 wins with gain 4/9 - 1/2 * 4/9 = 2/9 over all samples.
    // Right child {4,5,6} = [1,0,1]: x1 <= 0.5 is pure, gain 4/9 on half the samples.
    let rows: Vec<Vec<f64>> = (1..=6)
        .map(|i| vec![i as f64, if i == 5 { 1.0 } else { 0.0 }])
        .collect();
    let labels = vec![0, 0, 0, 10, 0, 10];
    let m = FeatureMatrix::new(vec!["x0".into(), "x1".into()], rows, labels, "oracle", 1).map_err(|e| e.to_string())?;
    let config = ForestConfig {
        n_trees: 1,
        bootstrap: false,
        features_per_split: FeaturesPerSplit::All,
        ..ForestConfig::default()
    };
    let model = fit_forest(&m, &config).map_err(|e| e.to_string())?;
    let raw = [1.0 * (2.0 / 9.0), 0.5 * (4.0 / 9.0)];
    let total: f64 = raw.iter().sum();
    let imp = feature_importances(&model);
    for (f, (got, want)) in imp.iter().zip(raw.map(|r| r / total)).enumerate() {
        ensure!((got - want).abs() <= 1e-12, "feature {f}: importance {got}, expected {want}");
    }
    Ok(format!("importances {imp:?} match weighted decreases"))
}

fn glcm_equivalence() -> Result<String, String> {
    const LEVELS: usize = 16;
    // (angle, dx, dy) with y pointing down the rows
    let offsets = [(0.0, 1isize, 0isize), (45.0, 1, -1), (90.0, 0, -1), (135.0, -1, -1)];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0;
    for _ in 0..100 {
        let block = ImageRaster::from_fn(8, 8, |_, _| rng.random_range(0..LEVELS as u8));
        for &(angle, dx, dy) in &offsets {
            let mut naive = vec![0f64; LEVELS * LEVELS];
            for y in 0..8isize {
                for x in 0..8isize {
                    let (nx, ny) = (x + dx, y + dy);
                    if (0..8).contains(&nx) && (0..8).contains(&ny) {
                        let i = block.get(x as usize, y as usize, 0) as usize;
                        let j = block.get(nx as usize, ny as usize, 0) as usize;
                        naive[i * LEVELS + j] += 1.0;
                    }
                }
            }
            let fast = glcm(&block, LEVELS, 1, angle, false, false).map_err(|e| e.to_string())?;
            ensure!(fast.data == naive, "raw counts differ at angle {angle}");
            let sym = glcm(&block, LEVELS, 1, angle, true, false).map_err(|e| e.to_string())?;
            for i in 0..LEVELS {
                for j in 0..LEVELS {
                    let want = naive[i * LEVELS + j] + naive[j * LEVELS + i];
                    ensure!(sym.at(i, j) == want, "symmetric count ({i},{j}) differs at angle {angle}");
                }
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} block/angle pairs identical"))
}

fn lbp_exhaustive() -> Result<String, String> {
    // ring positions (col, row) clockwise from the top-left
    const RING: [(usize, usize); 8] = [(0, 0), (1, 0), (2, 0), (2, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
    let pattern = |bits: u32, shift: usize| {
        let mut n = [100u8; 9];
        for k in 0..8 {
            let (c, r) = RING[(k + shift) % 8];
            n[r * 3 + c] = if bits >> k & 1 == 1 { 200 } else { 0 };
        }
        n
    };
    let mut uniform = 0;
    let mut orbits = BTreeSet::new();
    for bits in 0..256u32 {
        let code = rlbp_ulbp_code(&pattern(bits, 0));
        uniform += usize::from(code.uniform);
        orbits.insert(code.rotated_value);
        for shift in 1..8 {
            let rotated = rlbp_ulbp_code(&pattern(bits, shift));
            ensure!(
                rotated.rotated_value == code.rotated_value && rotated.uniform == code.uniform && rotated.bin == code.bin,
                "pattern {bits:08b} rotated by {shift} changes its code"
            );
        }
    }
    ensure!(uniform == 58, "{uniform} uniform codes");
    ensure!(orbits.len() == 36, "{} rotation orbits", orbits.len());
    Ok("58 uniform codes, 36 orbits, rotation invariant".into())
}

fn color_round_trips() -> Result<String, String> {
    let tol = 1.0 / 255.0;
    let mut worst = 0f64;
    for r in 0..16 {
        for g in 0..16 {
            for b in 0..16 {
                let rgb = [r, g, b].map(|v| (v * 17) as f64 / 255.0);
                for (name, back) in [("HSV", hsv_to_rgb(rgb_to_hsv(rgb))), ("HLS", hls_to_rgb(rgb_to_hls(rgb)))] {
                    for c in 0..3 {
                        let err = (back[c] - rgb[c]).abs();
                        worst = worst.max(err);
                        ensure!(err <= tol, "{name} round trip of {rgb:?} off by {err}");
                    }
                }
            }
        }
    }
    let l = convert_pixel(ColorSpaceId::Lab, [255, 255, 255])[0];
    ensure!((l - 100.0).abs() <= 0.01, "white L = {l}");
    Ok(format!("worst round-trip error {worst:.2e}, white L = {l:.4}"))
}

fn corner_geometry() -> Result<String, String> {
    let (n, cell, offset) = (6usize, 10usize, 10usize);
    let size = n * cell + 2 * offset;
    let g = GrayRaster::from_fn(size, size, |x, y| {
        if x < offset || y < offset || x >= offset + n * cell || y >= offset + n * cell {
            return 0.5;
        }
        if ((x - offset) / cell + (y - offset) / cell) % 2 == 0 {
            0.9
        } else {
            0.1
        }
    });
    // lattice lines fall between pixel centres
    let line = |i: usize| (offset + i * cell) as f64 - 0.5;
    let all: Vec<(f64, f64)> = (0..=n).flat_map(|i| (0..=n).map(move |j| (line(i), line(j)))).collect();
    let interior: Vec<(f64, f64)> = (1..n).flat_map(|i| (1..n).map(move |j| (line(i), line(j)))).collect();
    let params = CornerParams {
        max_corners: 100,
        min_distance: 5.0,
        quality_level: 0.1,
        ..CornerParams::default()
    };
    let corners = shi_tomasi_corners(&g, &params).map_err(|e| e.to_string())?;
    let dist = |c: (f64, f64), p: (f64, f64)| ((c.0 - p.0).powi(2) + (c.1 - p.1).powi(2)).sqrt();
    let mut worst = 0f64;
    for c in &corners.corners {
        let d = all.iter().map(|&p| dist((c.x, c.y), p)).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
        ensure!(d <= 0.5, "corner ({:.2},{:.2}) is {d:.2} px from the lattice", c.x, c.y);
    }
    let hit = interior
        .iter()
        .filter(|&&p| corners.corners.iter().any(|c| dist((c.x, c.y), p) <= 0.5))
        .count();
    let recall = hit as f64 / interior.len() as f64;
    ensure!(recall >= 0.9, "only {hit}/{} interior intersections detected", interior.len());
    Ok(format!(
        "{} corners, worst offset {worst:.3} px, {hit}/{} interior found",
        corners.len(),
        interior.len()
    ))
}

fn blob_geometry() -> Result<String, String> {
    let params = BlobParams {
        min_sigma: 1.0,
        max_sigma: 10.0,
        num_sigma: 10,
        ..BlobParams::default()
    };
    let step = 1.0;
    let (cx, cy, sigma) = (30.0, 27.0, 4.0);
    let mut found = Vec::new();
    for (kind, base, amp) in [("bright", 0.1, 0.8), ("dark", 0.9, -0.8)] {
        let g = GrayRaster::from_fn(60, 60, |x, y| {
            let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            (base + amp * (-r2 / (2.0 * sigma * sigma)).exp()) as f32
        });
        let blobs = doh_blobs(&g, &params).map_err(|e| e.to_string())?;
        ensure!(blobs.len() == 1, "{kind} spot gave {} blobs: {blobs:?}", blobs.len());
        let b = blobs[0];
        ensure!(
            ((b.x - cx).powi(2) + (b.y - cy).powi(2)).sqrt() <= 1.0,
            "{kind} blob centre ({}, {})",
            b.x,
            b.y
        );
        ensure!((b.sigma - sigma).abs() <= step, "{kind} blob sigma {}", b.sigma);
        found.push(format!("{kind} at ({}, {}) sigma {}", b.x, b.y, b.sigma));
    }
    Ok(found.join("; "))
}

fn gabor_selectivity() -> Result<String, String> {
    let params = GaborParams::default();
    let size = 96;
    let margin = params.extent() / 2;
    let energies = |phi: f64| -> Result<Vec<f64>, String> {
        let (s, c) = phi.to_radians().sin_cos();
        let g = GrayRaster::from_fn(size, size, |x, y| {
            let u = x as f64 * c + y as f64 * s;
            (0.5 + 0.5 * (2.0 * std::f64::consts::PI * u / 14.0).cos()) as f32
        });
        let responses = gabor_responses(&g, &params).map_err(|e| e.to_string())?;
        Ok(responses
            .iter()
            .map(|r| {
                let mut sum = 0f64;
                for y in margin..size - margin {
                    for x in margin..size - margin {
                        sum += r.get(x, y, 0).abs() as f64;
                    }
                }
                sum / ((size - 2 * margin) * (size - 2 * margin)) as f64
            })
            .collect())
    };
    let argmax = |e: &[f64]| (0..e.len()).max_by(|&a, &b| e[a].total_cmp(&e[b])).expect("channels");
    let e0 = energies(0.0)?;
    ensure!(argmax(&e0) == 0, "0 deg stripes peak at channel {} ({e0:?})", argmax(&e0));
    let e30 = energies(30.0)?;
    ensure!(argmax(&e30) == 1, "30 deg stripes peak at channel {} ({e30:?})", argmax(&e30));
    // rotating by one bank step shifts the whole energy profile by one channel
    for k in 0..e0.len() {
        let (a, b) = (e0[k], e30[(k + 1) % e0.len()]);
        ensure!((a - b).abs() <= 0.1 * a.max(b), "channel {k}: {a} vs shifted {b}");
    }
    Ok(format!("argmax 0 -> 0 deg, 30 -> 30 deg; peak/second {:.2}", {
        let mut s = e0.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        s[0] / s[1]
    }))
}

fn boards(dir: &Path, count: usize) -> Result<(), String> {
    synth_dataset(&SyntheticBoardSpec::default(), count, dir.join("data"))
        .map(|_| ())
        .map_err(|e| e.to_string())
}

fn pipeline(dir: &Path, ksizes: Vec<usize>, jobs: usize) -> Result<PipelineConfig, String> {
    let config = PipelineConfig {
        dataset: dir.join("data/dataset.json"),
        output_dir: dir.join("out"),
        ksizes,
        jobs: Some(jobs),
        ..PipelineConfig::default()
    };
    let extract = with_jobs(config.jobs, || run_extract(&config)).map_err(|e| e.to_string())?;
    let extract = extract.map_err(|e| e.to_string())?;
    ensure!(extract.exit_code() == 0, "extract failures: {:?}", extract.failed);
    let rank = with_jobs(config.jobs, || run_rank(&config)).map_err(|e| e.to_string())?;
    let rank = rank.map_err(|e| e.to_string())?;
    ensure!(rank.exit_code() == 0, "rank failures: {:?}", rank.failed);
    Ok(config)
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn color_leads() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    boards(dir.path(), 10)?;
    let config = pipeline(dir.path(), vec![25], 1)?;
    let top: TopFeatures = read(&config.output_dir.join("top_features.json"))?;
    let color = top.overall.iter().filter(|f| f.family == Family::Color).count();
    let names: Vec<&str> = top.overall.iter().map(|f| f.feature_name.as_str()).collect();
    ensure!(top.overall.len() == 5 && color >= 4, "{color} of top 5 are color: {names:?}");
    Ok(format!("{color}/5 color: {}", names.join(", ")))
}

fn ksize_sweep() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    boards(dir.path(), 10)?;
    let ksizes = vec![5, 10, 15, 20, 25];
    let config = pipeline(dir.path(), ksizes.clone(), 1)?;
    let summaries: Vec<QuartileSummary> = read(&config.output_dir.join("summary_ksize.json"))?;
    let groups: Vec<String> = summaries.iter().map(|s| s.group.clone()).collect();
    let expected: Vec<String> = ksizes.iter().map(|k| k.to_string()).collect();
    ensure!(groups == expected, "summary groups {groups:?}");
    for s in &summaries {
        ensure!(
            s.min <= s.lower_hinge && s.lower_hinge <= s.median && s.median <= s.upper_hinge && s.upper_hinge <= s.max,
            "k={} hinges out of order: {s:?}",
            s.group
        );
    }
    let (m5, m25) = (summaries[0].median, summaries[4].median);
    let direction = if m25 >= m5 { "holds" } else { "does not hold" };
    Ok(format!(
        "5 ordered summaries; informational: median k=25 {m25:.3e} vs k=5 {m5:.3e}, k=25 >= k=5 {direction}"
    ))
}

fn determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    boards(dir.path(), 4)?;
    let out = dir.path().join("out");
    let snapshot = || -> Result<Vec<(String, Vec<u8>)>, String> {
        let mut files = Vec::new();
        for sub in ["", "features"] {
            let mut entries: Vec<_> = fs::read_dir(out.join(sub))
                .map_err(|e| e.to_string())?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            entries.sort();
            for p in entries {
                let name = p.strip_prefix(&out).expect("under out").display().to_string();
                files.push((name, fs::read(&p).map_err(|e| e.to_string())?));
            }
        }
        Ok(files)
    };
    pipeline(dir.path(), vec![10, 25], 1)?;
    let single = snapshot()?;
    fs::remove_dir_all(&out).map_err(|e| e.to_string())?;
    pipeline(dir.path(), vec![10, 25], 8)?;
    let multi = snapshot()?;
    let names = |f: &[(String, Vec<u8>)]| f.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
    ensure!(names(&single) == names(&multi), "different file sets: {:?} vs {:?}", names(&single), names(&multi));
    for ((name, x), (_, y)) in single.iter().zip(&multi) {
        ensure!(x == y, "{name} differs between 1 and 8 workers");
    }
    Ok(format!("{} output files byte-identical", single.len()))
}
