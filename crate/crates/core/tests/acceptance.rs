//! Acceptance checks. Prints one `PASS`, `FAIL` or `SKIPPED` line per
//! criterion and exits nonzero if any criterion fails.
//!
//! The dataset reproductions need local copies of the data:
//! - `RSBENCH_EUROSAT_ROOT`: EuroSAT MSI folder-per-class root holding the
//!   `eurosat-{train,val,test}.txt` split files (or point
//!   `RSBENCH_EUROSAT_SPLITS` at the directory that holds them).
//! - `RSBENCH_SAT6_MANIFEST`: a generic manifest CSV for converted SAT-6.
//! - `RSBENCH_ACCEPTANCE_OUT`: optional directory for the reproduction
//!   results, so reruns resume instead of starting over.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rsbench_core::bench::{aggregate, run_benchmark, AggregateRow, BenchmarkConfig};
use rsbench_core::datasets::{generate_synthetic, SyntheticSpec};
use rsbench_core::eval::{mean_average_precision, micro_f1, overall_accuracy, KnnModel};
use rsbench_core::extract::{
    extract_features, rcf_extract, rcf_init_random, zca_apply, zca_fit, Extractor,
    PatchProvenance, PatchSet, ZcaEpsilon,
};
use rsbench_core::preprocess::{resize_bilinear, MinMaxScope, NormalizeSpec, ResizeSpec};
use rsbench_core::{evaluate, FeatureMatrix, Label, Pipeline, RasterImage, Split, Step};

enum Verdict {
    Pass(String),
    Fail(String),
    Skipped(String),
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let verdict = f();
    let elapsed = start.elapsed();
    let suffix = format!("{:.2}s", elapsed.as_secs_f64());
    match (verdict, limit) {
        (Verdict::Pass(d), Some(l)) if elapsed > l => {
            Verdict::Fail(format!("{d}; took {suffix}, limit {}s", l.as_secs()))
        }
        (Verdict::Pass(d), _) => Verdict::Pass(format!("{d}; {suffix}")),
        (Verdict::Fail(d), _) => Verdict::Fail(format!("{d}; {suffix}")),
        (v, _) => v,
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn matrix(dim: usize, rows: Vec<Vec<f32>>, labels: Vec<Label>) -> FeatureMatrix {
    let ids = (0..rows.len()).map(|i| format!("s{i}")).collect();
    let m = FeatureMatrix::from_rows(rows, ids, labels).expect("consistent matrix");
    assert_eq!(m.dim(), dim);
    m
}

// ---- KNN -------------------------------------------------------------

fn knn_oracle(train: &[Vec<f32>], labels: &[usize], classes: usize, query: &[f32], k: usize) -> usize {
    let mut order: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let d: f64 = row.iter().zip(query).map(|(&a, &b)| (f64::from(a) - f64::from(b)).powi(2)).sum();
            (d, i)
        })
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes = vec![0usize; classes];
    for &(_, i) in &order[..k] {
        votes[labels[i]] += 1;
    }
    let best = *votes.iter().max().unwrap();
    votes.iter().position(|&v| v == best).unwrap()
}

fn knn_criterion() -> Verdict {
    let mut r = rng(11);
    let ks = [1usize, 3, 5, 10];
    let (mut agree, mut total) = (0usize, 0usize);
    for instance in 0..50 {
        let k = ks[instance % ks.len()];
        let n_train = r.random_range(k..=500);
        let n_query = r.random_range(1..=100);
        let d = r.random_range(1..=16);
        let classes = r.random_range(2..=5);
        // Half the instances live on a coarse integer grid, where equal
        // distances and vote ties are common; the rest repeat train rows.
        let grid = instance % 2 == 0;
        let value = |r: &mut ChaCha8Rng| -> f32 {
            if grid {
                r.random_range(0..3) as f32
            } else {
                r.random::<f32>()
            }
        };
        let mut train: Vec<Vec<f32>> = (0..n_train).map(|_| (0..d).map(|_| value(&mut r)).collect()).collect();
        if !grid {
            for i in (1..n_train).step_by(3) {
                train[i] = train[i - 1].clone();
            }
        }
        let labels: Vec<usize> = (0..n_train).map(|_| r.random_range(0..classes)).collect();
        let mut queries: Vec<Vec<f32>> = (0..n_query).map(|_| (0..d).map(|_| value(&mut r)).collect()).collect();
        if !grid {
            for (q, row) in queries.iter_mut().enumerate().step_by(4) {
                *row = train[q % n_train].clone();
            }
        }
        // The model needs every class present to size its vote array.
        let mut labels = labels;
        for (c, label) in labels.iter_mut().take(classes).enumerate() {
            *label = c;
        }
        let train_m = matrix(d, train.clone(), labels.iter().map(|&c| Label::Multiclass(c)).collect());
        let query_m = matrix(d, queries.clone(), vec![Label::Multiclass(0); n_query]);
        let model = match KnnModel::new(k, train_m) {
            Ok(m) => m,
            Err(e) => return Verdict::Fail(format!("instance {instance}: {e}")),
        };
        let got = match model.predict_multiclass(&query_m) {
            Ok(p) => p,
            Err(e) => return Verdict::Fail(format!("instance {instance}: {e}")),
        };
        for (q, &g) in got.iter().enumerate() {
            total += 1;
            if g == knn_oracle(&train, &labels, model.num_classes(), &queries[q], k) {
                agree += 1;
            }
        }
    }
    check(agree == total, format!("{agree}/{total} predictions agree over 50 instances"))
}

// ---- RCF -------------------------------------------------------------

fn rcf_oracle(image: &RasterImage, weights: &[Vec<f32>], biases: &[f32], k: usize) -> Vec<f64> {
    let (c, h, w) = (image.channels(), image.height(), image.width());
    let positions = ((h - k + 1) * (w - k + 1)) as f64;
    let mut out = Vec::new();
    for (filter, &bias) in weights.iter().zip(biases) {
        let (mut pos, mut neg) = (0.0f64, 0.0f64);
        for y in 0..=h - k {
            for x in 0..=w - k {
                let mut acc = f64::from(bias);
                for band in 0..c {
                    for dy in 0..k {
                        for dx in 0..k {
                            let wv = filter[(band * k + dy) * k + dx];
                            let pv = image.band(band)[(y + dy) * w + x + dx];
                            acc += f64::from(wv) * f64::from(pv);
                        }
                    }
                }
                pos += acc.max(0.0);
                neg += (-acc).max(0.0);
            }
        }
        out.push(pos / positions);
        out.push(neg / positions);
    }
    out
}

fn rcf_criterion() -> Verdict {
    let mut r = rng(12);
    let mut worst = 0.0f64;
    for case in 0..100u64 {
        let c = r.random_range(1..=3);
        let h = r.random_range(1..=8);
        let w = r.random_range(1..=8);
        let kernels: Vec<usize> = [1, 3, 5, 7].into_iter().filter(|&k| k <= h.min(w)).collect();
        let k = kernels[r.random_range(0..kernels.len())];
        let features = 2 * r.random_range(1..=4);
        let data: Vec<f32> = (0..c * h * w).map(|_| r.random_range(-1.0..1.0)).collect();
        let image = RasterImage::new(c, h, w, data).unwrap();
        let mut bank = rcf_init_random(c, features, k, case).unwrap();
        if case % 2 == 1 {
            bank = bank.with_bias(r.random_range(-0.5..0.5));
        }
        let weights: Vec<Vec<f32>> = (0..bank.num_filters()).map(|i| bank.filter(i).to_vec()).collect();
        let expected = rcf_oracle(&image, &weights, bank.biases(), k);
        let got = match rcf_extract(&image, &bank) {
            Ok(v) => v,
            Err(e) => return Verdict::Fail(format!("case {case}: {e}")),
        };
        if got.len() != expected.len() {
            return Verdict::Fail(format!("case {case}: {} outputs, expected {}", got.len(), expected.len()));
        }
        let scale = expected.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = got.iter().zip(&expected).fold(0.0f64, |m, (&g, &e)| m.max((f64::from(g) - e).abs()));
        let rel = if scale > 0.0 { diff / scale } else { diff };
        worst = worst.max(rel);
    }
    check(worst <= 1e-4, format!("worst relative error {worst:.2e} over 100 cases (tol 1e-4)"))
}

// ---- ZCA -------------------------------------------------------------

fn zca_criterion() -> Verdict {
    let mut r = rng(13);
    let mut worst = 0.0f64;
    let dims = [1usize, 2, 5, 9, 16, 27, 32];
    for &dim in &dims {
        let n = 50 * dim;
        // Correlated but well-conditioned: x = (I + 0.5 G / sqrt(dim)) z + offset
        let mix: Vec<f64> = (0..dim * dim)
            .map(|i| {
                let g: f64 = r.sample(StandardNormal);
                let eye = if i / dim == i % dim { 1.0 } else { 0.0 };
                eye + 0.5 * g / (dim as f64).sqrt()
            })
            .collect();
        let offset: Vec<f64> = (0..dim).map(|_| r.random_range(-3.0..3.0)).collect();
        let mut data = Vec::with_capacity(n * dim);
        for _ in 0..n {
            let z: Vec<f64> = (0..dim).map(|_| r.sample(StandardNormal)).collect();
            for row in 0..dim {
                let v: f64 = (0..dim).map(|j| mix[row * dim + j] * z[j]).sum::<f64>() + offset[row];
                data.push(v as f32);
            }
        }
        let provenance = PatchProvenance {
            dataset: "acceptance".into(),
            seed: 13,
            count: n,
        };
        let patches = PatchSet::new(dim, data, provenance).unwrap();
        let model = match zca_fit(&patches, ZcaEpsilon::Absolute(0.0)) {
            Ok(m) => m,
            Err(e) => return Verdict::Fail(format!("dim {dim}: {e}")),
        };
        let white = zca_apply(&model, &patches).unwrap();
        let mean: Vec<f64> = (0..dim)
            .map(|j| white.iter().map(|p| f64::from(p[j])).sum::<f64>() / n as f64)
            .collect();
        for a in 0..dim {
            for b in 0..dim {
                let cov = white
                    .iter()
                    .map(|p| (f64::from(p[a]) - mean[a]) * (f64::from(p[b]) - mean[b]))
                    .sum::<f64>()
                    / n as f64;
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((cov - target).abs());
            }
        }
    }
    check(worst <= 1e-3, format!("max |cov - I| = {worst:.2e} for dims {dims:?} (tol 1e-3)"))
}

// ---- bilinear --------------------------------------------------------

fn bilinear_criterion() -> Verdict {
    let line = RasterImage::new(1, 1, 2, vec![0.0, 10.0]).unwrap();
    let out = resize_bilinear(&line, ResizeSpec::new(1, 4).unwrap()).unwrap();
    let want = [0.0f32, 2.5, 7.5, 10.0];
    let exact_err = out.band(0).iter().zip(want).fold(0.0f32, |m, (&g, e)| m.max((g - e).abs()));
    if exact_err > 1e-6 {
        return Verdict::Fail(format!("[0,10] -> {:?}, expected {want:?}", out.band(0)));
    }

    let mut r = rng(14);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (ih, iw) = (r.random_range(2..=32), r.random_range(2..=32));
        let (oh, ow) = (r.random_range(1..=64), r.random_range(1..=64));
        let (a, by, bx): (f64, f64, f64) = (r.random_range(-1.0..1.0), r.random_range(-0.1..0.1), r.random_range(-0.1..0.1));
        let data: Vec<f32> =
            (0..ih * iw).map(|i| (a + by * (i / iw) as f64 + bx * (i % iw) as f64) as f32).collect();
        let img = RasterImage::new(1, ih, iw, data).unwrap();
        let out = resize_bilinear(&img, ResizeSpec::new(oh, ow).unwrap()).unwrap();
        let src = |o: usize, ins: usize, outs: usize| (o as f64 + 0.5) * ins as f64 / outs as f64 - 0.5;
        for y in 0..oh {
            let sy = src(y, ih, oh);
            if !(0.0..=(ih - 1) as f64).contains(&sy) {
                continue;
            }
            for x in 0..ow {
                let sx = src(x, iw, ow);
                if !(0.0..=(iw - 1) as f64).contains(&sx) {
                    continue;
                }
                let expected = a + by * sy + bx * sx;
                worst = worst.max((f64::from(out.band(0)[y * ow + x]) - expected).abs());
            }
        }
    }
    check(worst <= 1e-5, format!("exact case err {exact_err:.1e}; affine interior max err {worst:.2e} over 20 sizes"))
}

// ---- metrics ---------------------------------------------------------

fn ap_oracle(scores: &[f64], truth: &[bool]) -> Option<f64> {
    let positives = truth.iter().filter(|&&t| t).count();
    if positives == 0 {
        return None;
    }
    let mut ranked: Vec<usize> = (0..scores.len()).collect();
    ranked.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let (mut hits, mut prev_recall, mut ap) = (0usize, 0.0f64, 0.0f64);
    for (t, &i) in ranked.iter().enumerate() {
        if truth[i] {
            hits += 1;
        }
        let recall = hits as f64 / positives as f64;
        let precision = hits as f64 / (t + 1) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Some(ap)
}

fn metrics_criterion() -> Verdict {
    let mut r = rng(15);
    let mut worst_map = 0.0f64;
    for set in 0..50 {
        let n = r.random_range(1..=20);
        let k = r.random_range(1..=4);
        // Scores on a coarse grid so ties occur.
        let scores: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| r.random_range(0..5) as f64 / 4.0).collect()).collect();
        let mut truth: Vec<Vec<bool>> = (0..n).map(|_| (0..k).map(|_| r.random_bool(0.4)).collect()).collect();
        truth[r.random_range(0..n)][r.random_range(0..k)] = true;
        let per_class: Vec<f64> = (0..k)
            .filter_map(|c| {
                let s: Vec<f64> = scores.iter().map(|row| row[c]).collect();
                let t: Vec<bool> = truth.iter().map(|row| row[c]).collect();
                ap_oracle(&s, &t)
            })
            .collect();
        let expected = 100.0 * per_class.iter().sum::<f64>() / per_class.len() as f64;
        let got = match mean_average_precision(&scores, &truth) {
            Ok(v) => v,
            Err(e) => return Verdict::Fail(format!("set {set}: {e}")),
        };
        worst_map = worst_map.max((got - expected).abs());

        let pred: Vec<Vec<bool>> = scores.iter().map(|row| row.iter().map(|&s| s >= 0.5).collect()).collect();
        let (mut tp, mut fp, mut fn_) = (0u32, 0u32, 0u32);
        for (p, t) in pred.iter().flatten().zip(truth.iter().flatten()) {
            tp += u32::from(*p && *t);
            fp += u32::from(*p && !*t);
            fn_ += u32::from(!*p && *t);
        }
        let f1_expected = 100.0 * f64::from(2 * tp) / f64::from(2 * tp + fp + fn_);
        let f1 = micro_f1(&pred, &truth).unwrap();
        if f1 != f1_expected {
            return Verdict::Fail(format!("set {set}: micro-F1 {f1} vs {f1_expected}"));
        }

        let pred_c: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let truth_c: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let correct = pred_c.iter().zip(&truth_c).filter(|(a, b)| a == b).count();
        let oa_expected = 100.0 * correct as f64 / n as f64;
        let oa = overall_accuracy(&pred_c, &truth_c).unwrap();
        if oa != oa_expected {
            return Verdict::Fail(format!("set {set}: OA {oa} vs {oa_expected}"));
        }
    }
    check(worst_map <= 1e-9, format!("mAP max err {worst_map:.1e} (tol 1e-9); F1 and OA exact on 50 sets"))
}

// ---- synthetic end to end --------------------------------------------

fn synthetic_oa(separation: f64, dir: &Path) -> Result<f64, String> {
    let spec = SyntheticSpec::multiclass(5, 200, 4, 64, separation, 21);
    let manifest = generate_synthetic(&spec, dir).map_err(|e| e.to_string())?;
    // Fixed range: per-image min-max would erase the class mean offsets.
    let hi = (spec.max_mean() + 6.0 * spec.noise_std) as f32;
    let pipeline = Pipeline::new(vec![
        Step::Normalize(NormalizeSpec::MinMax(MinMaxScope::FixedRange { lo: 0.0, hi })),
        Step::Resize(ResizeSpec::square(128).unwrap()),
    ]);
    let run = |split| extract_features(&manifest, None, &pipeline, Extractor::ImageStatistics, &[split]);
    let train = run(Split::Train).map_err(|e| e.to_string())?;
    let test = run(Split::Test).map_err(|e| e.to_string())?;
    let report = evaluate(&train, &test, 5).map_err(|e| e.to_string())?;
    report.oa.ok_or_else(|| "no OA in report".into())
}

fn synthetic_criterion() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let separated = synthetic_oa(10.0, &tmp.path().join("sep10"));
    let chance = synthetic_oa(0.0, &tmp.path().join("sep0"));
    match (separated, chance) {
        (Ok(s), Ok(c)) => check(
            s >= 99.0 && (c - 20.0).abs() <= 5.0,
            format!("separation 10: OA {s:.2} (>= 99); separation 0: OA {c:.2} (20 ± 5)"),
        ),
        (Err(e), _) | (_, Err(e)) => Verdict::Fail(e),
    }
}

// ---- dataset reproductions -------------------------------------------

fn env_path(name: &str) -> Option<PathBuf> {
    std::env::var_os(name).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn output_dir(name: &str, tmp: &Path) -> PathBuf {
    env_path("RSBENCH_ACCEPTANCE_OUT").unwrap_or_else(|| tmp.to_path_buf()).join(name)
}

fn toml_path(p: &Path) -> String {
    toml_string(&p.display().to_string())
}

fn toml_string(s: &str) -> String {
    format!("{s:?}")
}

fn run_rows(config: &str) -> Result<Vec<AggregateRow>, String> {
    let config = BenchmarkConfig::from_toml_str(config).map_err(|e| e.to_string())?;
    let summary = run_benchmark(&config).map_err(|e| e.to_string())?;
    if summary.failed > 0 {
        let first = summary.results.iter().find_map(|r| r.error.clone()).unwrap_or_default();
        return Err(format!("{} cell(s) failed: {first}", summary.failed));
    }
    Ok(aggregate(&summary.results))
}

fn find<'a>(rows: &'a [AggregateRow], bands: &str, extractor: &str) -> Option<&'a AggregateRow> {
    rows.iter().find(|r| r.bands == bands && r.extractor.starts_with(extractor))
}

fn within(got: f64, target: f64, tol: f64) -> bool {
    (got - target).abs() <= tol
}

struct EurosatRuns {
    rows: Result<Vec<AggregateRow>, String>,
}

fn eurosat_runs(tmp: &Path) -> Option<EurosatRuns> {
    let root = env_path("RSBENCH_EUROSAT_ROOT")?;
    let splits = env_path("RSBENCH_EUROSAT_SPLITS")
        .map(|p| format!("splits = {}\n", toml_path(&p)))
        .unwrap_or_default();
    let config = format!(
        r#"
output_dir = {out}
k = 5
seeds = [0, 1, 2, 3, 4]

[dataset]
dataset = "eurosat"
root = {root}
{splits}
[band_sets]
MSI = []
RGB = [3, 2, 1]

[pipelines]
native = [{{ op = "reflectance" }}]

[[extractors]]
kind = "image_statistics"

[[extractors]]
kind = "rcf_empirical"
features = 512
kernel = 3
"#,
        out = toml_path(&output_dir("eurosat", tmp)),
        root = toml_path(&root),
    );
    Some(EurosatRuns { rows: run_rows(&config) })
}

fn oa_of(row: Option<&AggregateRow>) -> Option<(f64, Option<f64>)> {
    let m = row?.metrics.get("oa")?;
    Some((m.mean, m.std))
}

fn eurosat_image_stat(runs: &Option<EurosatRuns>) -> Verdict {
    let Some(runs) = runs else {
        return Verdict::Skipped("set RSBENCH_EUROSAT_ROOT to a EuroSAT MSI copy".into());
    };
    let rows = match &runs.rows {
        Ok(r) => r,
        Err(e) => return Verdict::Fail(e.clone()),
    };
    match (oa_of(find(rows, "MSI", "image_statistics")), oa_of(find(rows, "RGB", "image_statistics"))) {
        (Some((msi, _)), Some((rgb, _))) => check(
            within(msi, 89.56, 1.0) && within(rgb, 76.94, 1.0),
            format!("MSI OA {msi:.2} (89.56 ± 1.0); RGB OA {rgb:.2} (76.94 ± 1.0)"),
        ),
        _ => Verdict::Fail("image statistics rows missing".into()),
    }
}

fn eurosat_mosaiks(runs: &Option<EurosatRuns>) -> Verdict {
    let Some(runs) = runs else {
        return Verdict::Skipped("set RSBENCH_EUROSAT_ROOT to a EuroSAT MSI copy".into());
    };
    let rows = match &runs.rows {
        Ok(r) => r,
        Err(e) => return Verdict::Fail(e.clone()),
    };
    match oa_of(find(rows, "MSI", "rcf_empirical")) {
        Some((mean, _)) => check(within(mean, 91.07, 1.5), format!("MSI OA mean {mean:.2} over 5 seeds (91.07 ± 1.5)")),
        None => Verdict::Fail("empirical RCF row missing".into()),
    }
}

fn eurosat_spread(runs: &Option<EurosatRuns>) -> Verdict {
    let Some(runs) = runs else {
        return Verdict::Skipped("set RSBENCH_EUROSAT_ROOT to a EuroSAT MSI copy".into());
    };
    let rows = match &runs.rows {
        Ok(r) => r,
        Err(e) => return Verdict::Fail(e.clone()),
    };
    match oa_of(find(rows, "MSI", "rcf_empirical")) {
        Some((_, Some(std))) => check(std <= 0.5, format!("seed std {std:.3} (<= 0.5)")),
        _ => Verdict::Fail("empirical RCF row missing or single-seed".into()),
    }
}

fn sat6_image_stat(tmp: &Path) -> Verdict {
    let Some(manifest) = env_path("RSBENCH_SAT6_MANIFEST") else {
        return Verdict::Skipped("set RSBENCH_SAT6_MANIFEST to a converted SAT-6 manifest".into());
    };
    let config = format!(
        r#"
output_dir = {out}
k = 5

[dataset]
dataset = "generic-manifest"
root = {root}

[band_sets]
all = []

[pipelines]
native = []

[[extractors]]
kind = "image_statistics"
"#,
        out = toml_path(&output_dir("sat6", tmp)),
        root = toml_path(&manifest),
    );
    match run_rows(&config) {
        Ok(rows) => match oa_of(find(&rows, "all", "image_statistics")) {
            Some((oa, _)) => check(within(oa, 99.60, 0.3), format!("OA {oa:.2} (99.60 ± 0.3)")),
            None => Verdict::Fail("image statistics row missing".into()),
        },
        Err(e) => Verdict::Fail(e),
    }
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let secs = |s| Some(Duration::from_secs(s));
    let mut verdicts: Vec<(&str, Verdict)> = vec![
        ("knn matches exhaustive oracle", timed(secs(10), knn_criterion)),
        ("rcf matches window enumeration", timed(secs(5), rcf_criterion)),
        ("zca whitens to identity covariance", timed(secs(5), zca_criterion)),
        ("bilinear resize oracle", timed(None, bilinear_criterion)),
        ("metric oracles", timed(None, metrics_criterion)),
        ("synthetic end to end", timed(secs(60), synthetic_criterion)),
    ];
    let eurosat = eurosat_runs(tmp.path());
    verdicts.push(("eurosat image statistics", eurosat_image_stat(&eurosat)));
    verdicts.push(("eurosat empirical rcf accuracy", eurosat_mosaiks(&eurosat)));
    verdicts.push(("eurosat empirical rcf seed spread", eurosat_spread(&eurosat)));
    verdicts.push(("sat-6 image statistics", sat6_image_stat(tmp.path())));

    let mut failed = 0;
    for (name, verdict) in &verdicts {
        match verdict {
            Verdict::Pass(d) => println!("PASS    {name}: {d}"),
            Verdict::Fail(d) => {
                failed += 1;
                println!("FAIL    {name}: {d}");
            }
            Verdict::Skipped(d) => println!("SKIPPED {name}: {d}"),
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
