use std::path::{Path, PathBuf};

use coconet::baselines::{add_gaussian_noise, NoiseSpec};
use coconet::dataio::{encode_cifar_records, write_image, CifarRecord};
use coconet::metrics::{psnr, ssim, MetricsReport};
use coconet::Image;
use coconet_harness::denoise::noise_seed;
use coconet_harness::output::{read_aggregates, read_records, AGGREGATES_FILE, RECORDS_FILE};
use coconet_harness::{
    complete::complete_images, run_completion_demo, run_denoise_benchmark, run_memorize_demo,
    run_upsample_benchmark, BenchmarkRun, Experiment, Method, OutputDir, TrainOverrides,
};
use coconet::model::TrainConfig;
use coconet::nn::NetworkArch;

fn tiny_overrides() -> TrainOverrides {
    TrainOverrides {
        depth: Some(1),
        width: Some(6),
        lr: Some(1e-2),
        epochs: Some(3),
        batch_size: None,
    }
}

fn test_image(h: usize, w: usize, seed: usize) -> Image {
    Image::from_fn(h, w, |r, c| {
        let t = (r * 7 + c * 3 + seed * 11) as f64;
        [
            0.5 + 0.4 * (t * 0.05).sin(),
            0.5 + 0.4 * (t * 0.03).cos(),
            (r as f64 / h as f64 + c as f64 / w as f64) / 2.0,
        ]
    })
    .unwrap()
}

fn cifar_fixture(dir: &Path, count: usize) -> PathBuf {
    let records: Vec<CifarRecord> = (0..count)
        .map(|i| {
            let img = test_image(32, 32, i);
            // quantize as the real file would
            CifarRecord {
                image: Image::from_rgb8(32, 32, &img.to_rgb8()).unwrap(),
                label: (i % 10) as u8,
            }
        })
        .collect();
    let path = dir.join("test_batch.bin");
    std::fs::write(&path, encode_cifar_records(&records).unwrap()).unwrap();
    path
}

fn set5_fixture(dir: &Path) -> PathBuf {
    let root = dir.join("set5");
    std::fs::create_dir_all(&root).unwrap();
    for (i, name) in ["woman", "head", "butterfly", "bird", "baby"].iter().enumerate() {
        let img = test_image(24 + i, 20 + 2 * i, i);
        write_image(root.join(format!("{name}_GT.ppm")), &img).unwrap();
    }
    std::fs::write(root.join("notes.txt"), "not an image").unwrap();
    root
}

fn all_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(all_files(&path));
        } else {
            out.push(path);
        }
    }
    out.sort();
    out
}

#[test]
fn single_noisy_image_matches_direct_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let mut run = BenchmarkRun::new(Experiment::Denoise, cifar_fixture(tmp.path(), 3));
    run.subset_size = 1;
    run.sigmas = vec![10.0];
    run.methods = vec![Method::Noisy];
    run.master_seed = 42;
    let report = run_denoise_benchmark(&run).unwrap();
    assert_eq!(report.metrics.records.len(), 1);

    let clean = Image::from_rgb8(32, 32, &test_image(32, 32, 0).to_rgb8()).unwrap();
    let noisy = add_gaussian_noise(&clean, NoiseSpec::new(10.0, noise_seed(&run, 0, 10.0)).unwrap())
        .unwrap();
    let agg = report.metrics.aggregate("noisy", Some(10.0)).unwrap();
    assert_eq!(agg.mean_psnr_db, psnr(&clean, &noisy).unwrap());
    assert_eq!(agg.mean_ssim, ssim(&clean, &noisy).unwrap());
}

#[test]
fn full_method_table_and_self_consistent_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cifar = cifar_fixture(tmp.path(), 4);
    let out_root = tmp.path().join("out");
    let mut run = BenchmarkRun::new(Experiment::Denoise, &cifar);
    run.subset_size = 3;
    run.overrides = tiny_overrides();
    run.output_dir = Some(out_root.clone());
    run.workers = 2;
    let report = run_denoise_benchmark(&run).unwrap();

    assert_eq!(report.metrics.records.len(), 3 * 2 * 10);
    let table_rows: Vec<&str> = report.table.lines().skip(2).collect();
    assert_eq!(table_rows.len(), 10);
    assert!(table_rows[0].starts_with("Noisy image"));
    assert!(table_rows[9].starts_with("CocoNet"));
    assert_eq!(report.table.lines().next().unwrap().matches('|').count(), 4);

    let records = read_records(std::fs::File::open(out_root.join(RECORDS_FILE)).unwrap()).unwrap();
    assert_eq!(records, report.metrics);
    let aggregates =
        read_aggregates(std::fs::File::open(out_root.join(AGGREGATES_FILE)).unwrap()).unwrap();
    let recomputed = MetricsReport {
        records: records.records.clone(),
    }
    .aggregates();
    assert_eq!(aggregates, recomputed);
    for a in &aggregates {
        let group: Vec<_> = records
            .records
            .iter()
            .filter(|r| r.method == a.method && r.sigma == a.sigma)
            .collect();
        let mean = group.iter().map(|r| r.ssim).sum::<f64>() / group.len() as f64;
        assert_eq!(a.count, group.len());
        assert!((a.mean_ssim - mean).abs() < 1e-12);
    }

    // nothing outside the output directory besides the fixture itself
    let files = all_files(tmp.path());
    assert!(files
        .iter()
        .all(|f| f.starts_with(&out_root) || f == &cifar));
    assert!(files.iter().any(|f| f.ends_with("00002_s20_coconet.ppm")));
}

#[test]
fn fixed_seed_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cifar = cifar_fixture(tmp.path(), 3);
    let run_once = |name: &str, workers: usize| {
        let mut run = BenchmarkRun::new(Experiment::Denoise, &cifar);
        run.subset_size = 3;
        run.sigmas = vec![20.0, 10.0];
        run.methods = vec![Method::Noisy, Method::parse("bilateral3").unwrap(), Method::CocoNet];
        run.overrides = tiny_overrides();
        run.output_dir = Some(tmp.path().join(name));
        run.master_seed = 7;
        run.workers = workers;
        run_denoise_benchmark(&run).unwrap();
        std::fs::read(tmp.path().join(name).join(RECORDS_FILE)).unwrap()
    };
    let a = run_once("a", 1);
    assert_eq!(a, run_once("b", 1));
    assert_eq!(a, run_once("c", 3));
}

#[test]
fn subset_larger_than_dataset_is_a_dataset_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut run = BenchmarkRun::new(Experiment::Denoise, cifar_fixture(tmp.path(), 2));
    run.subset_size = 3;
    let err = run_denoise_benchmark(&run).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    run.dataset = tmp.path().join("missing.bin");
    assert_eq!(run_denoise_benchmark(&run).unwrap_err().exit_code(), 3);
}

#[test]
fn upsampling_table_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let mut run = BenchmarkRun::new(Experiment::Upsample, set5_fixture(tmp.path()));
    run.overrides = tiny_overrides();
    run.output_dir = Some(tmp.path().join("up"));
    let report = run_upsample_benchmark(&run).unwrap();
    let ids: Vec<&str> = report
        .metrics
        .records
        .iter()
        .map(|r| r.image_id.as_str())
        .collect();
    assert_eq!(
        ids,
        ["baby", "baby", "bird", "bird", "butterfly", "butterfly", "head", "head", "woman", "woman"]
    );
    assert!(report.metrics.records.iter().all(|r| r.sigma.is_none()));
    assert_eq!(report.table.lines().count(), 2 + 5 + 1);
    assert!(report.table.contains("20.61"));
    assert!(report.table.contains("quoted"));
    let out = tmp.path().join("up");
    for name in ["butterfly_lr.ppm", "butterfly_bicubic.ppm", "butterfly_coconet.ppm"] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let hr = coconet::dataio::read_image(out.join("bird_coconet.ppm")).unwrap();
    assert_eq!(hr.dims(), (27, 26));
}

#[test]
fn completion_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out_root = tmp.path().join("done");
    let mut run = BenchmarkRun::new(Experiment::Complete, set5_fixture(tmp.path()));
    run.overrides = tiny_overrides();
    run.output_dir = Some(out_root.clone());
    let report = run_completion_demo(&run).unwrap();
    assert_eq!(report.records.len(), 5);
    for r in &report.records {
        assert!(r.masked_min > 0.0 && r.masked_max < 1.0);
        assert!(r.observed_psnr_db.is_finite());
    }
    let images = all_files(&out_root)
        .into_iter()
        .filter(|f| f.extension().is_some_and(|e| e == "ppm"))
        .count();
    assert_eq!(images, 15);
    let masks = std::fs::read_to_string(out_root.join("masks.csv")).unwrap();
    assert_eq!(masks.lines().count(), 1 + 5);
    assert!(masks.starts_with("image_id,mask_top,mask_left,mask_size"));

    // the mask side follows the smaller image dimension
    let baby = &report.records[0];
    assert_eq!(baby.mask_size, 28 / 4);

    // same seed, same masks
    let again = complete_images(
        &BenchmarkRun {
            output_dir: None,
            ..run.clone()
        },
        &coconet_harness::upsample::load_image_dir(&run.dataset, 5).unwrap(),
    )
    .unwrap();
    assert_eq!(again.records, report.records);
}

#[test]
fn memorization_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let image = test_image(16, 16, 3);
    let mut config = TrainConfig::new(NetworkArch::uniform(2, 16))
        .with_epochs(30)
        .with_lr(1e-2);
    config.snapshot_epochs = vec![0, 10, 30];
    let out = OutputDir::create(tmp.path().join("mem")).unwrap();
    let report = run_memorize_demo(&image, &config, Some(&out)).unwrap();
    let epochs: Vec<usize> = report.curve.iter().map(|c| c.0).collect();
    assert_eq!(epochs, [0, 10, 30]);
    // a fresh network is close to uniform mid-gray
    let first = &report.snapshots[0].image;
    assert!(first.as_slice().iter().all(|v| (v - 0.5).abs() < 0.25));
    assert!(report.curve[2].1 > report.curve[0].1);
    for name in ["input.ppm", "epoch_00000.ppm", "epoch_00030.ppm", "psnr_curve.csv"] {
        assert!(tmp.path().join("mem").join(name).is_file(), "{name}");
    }
}
