use std::f64::consts::TAU;

use coconet::baselines::{add_gaussian_noise, NoiseSpec};
use coconet::metrics::{psnr, ssim};
use coconet::model::{reconstruct, train, PixelMask, Rect, TrainConfig};
use coconet::nn::NetworkArch;
use coconet::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth image from a few random low-frequency waves.
fn smooth_image(h: usize, w: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<[f64; 5]> = (0..3)
        .map(|_| {
            [
                rng.random_range(0.5..2.5),
                rng.random_range(0.5..2.5),
                rng.random_range(0.0..TAU),
                rng.random_range(0.1..0.25),
                rng.random_range(0.0..3.0),
            ]
        })
        .collect();
    Image::from_fn(h, w, |r, c| {
        let (y, x) = (r as f64 / h as f64, c as f64 / w as f64);
        let mut rgb = [0.5; 3];
        for (ch, v) in rgb.iter_mut().enumerate() {
            for [fx, fy, phase, amp, shift] in &waves {
                *v += amp * (TAU * (fx * x + fy * y) + phase + shift * ch as f64).sin() / 2.0;
            }
        }
        rgb.map(|v| v.clamp(0.0, 1.0))
    })
    .unwrap()
}

fn small(epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig::new(NetworkArch::uniform(3, 32))
        .with_epochs(epochs)
        .with_lr(5e-3)
        .with_seed(seed)
}

fn max_adjacent_difference(img: &Image) -> f64 {
    let (h, w) = img.dims();
    let mut worst: f64 = 0.0;
    for r in 0..h {
        for c in 0..w {
            let p = img.pixel(r, c);
            for (nr, nc) in [(r + 1, c), (r, c + 1)] {
                if nr < h && nc < w {
                    let q = img.pixel(nr, nc);
                    for k in 0..3 {
                        worst = worst.max((p[k] - q[k]).abs());
                    }
                }
            }
        }
    }
    worst
}

#[test]
fn full_batch_training_lowers_the_loss_on_8x8() {
    let image = smooth_image(8, 8, 3);
    let outcome = train(&image, None, &small(100, 1)).unwrap();
    let h = &outcome.loss_history;
    assert_eq!(h.len(), 100);
    assert!(h[99] < h[0], "{} !< {}", h[99], h[0]);
}

#[test]
fn outputs_at_8x_are_smoother_than_at_1x() {
    let image = smooth_image(16, 16, 7);
    let model = train(&image, None, &small(400, 2)).unwrap().model;
    let one = reconstruct(&model, 16, 16).unwrap();
    let eight = reconstruct(&model, 128, 128).unwrap();
    let (d1, d8) = (max_adjacent_difference(&one), max_adjacent_difference(&eight));
    assert!(d8 < d1, "8x step {d8} vs 1x step {d1}");
}

#[test]
fn reconstruction_improves_across_snapshots_on_most_images() {
    let epochs = [0, 10, 100, 300];
    let mut ordered = 0;
    for seed in 0..10 {
        let image = smooth_image(12, 12, 100 + seed);
        let mut config = small(300, seed);
        config.snapshot_epochs = epochs.to_vec();
        let outcome = train(&image, None, &config).unwrap();
        let scores: Vec<f64> = outcome
            .snapshots
            .iter()
            .map(|s| psnr(&image, &s.image).unwrap())
            .collect();
        assert_eq!(scores.len(), epochs.len());
        if scores.windows(2).all(|w| w[1] >= w[0]) {
            ordered += 1;
        }
    }
    assert!(ordered >= 8, "only {ordered}/10 monotone");
}

#[test]
fn completed_patch_is_bounded_and_smooth() {
    let image = smooth_image(20, 20, 11);
    let rect = Rect {
        top: 7,
        left: 8,
        height: 5,
        width: 5,
    };
    let mask = PixelMask::excluding(20, 20, rect).unwrap();
    let model = train(&image, Some(&mask), &small(400, 4)).unwrap().model;
    let out = reconstruct(&model, 20, 20).unwrap();

    let mut observed_steps = Vec::new();
    let mut masked_steps = Vec::new();
    for r in 0..19 {
        for c in 0..19 {
            let p = out.pixel(r, c);
            let (down, right) = (out.pixel(r + 1, c), out.pixel(r, c + 1));
            let g = (0..3)
                .map(|k| (down[k] - p[k]).hypot(right[k] - p[k]))
                .fold(0.0, f64::max);
            if rect.contains(r, c) {
                masked_steps.push(g);
                assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
            } else {
                observed_steps.push(g);
            }
        }
    }
    observed_steps.sort_by(f64::total_cmp);
    let p99 = observed_steps[(observed_steps.len() * 99) / 100];
    let masked_max = masked_steps.iter().copied().fold(0.0, f64::max);
    assert!(masked_max < p99, "masked {masked_max} vs observed p99 {p99}");
}

#[test]
fn metrics_fall_as_noise_grows() {
    let image = smooth_image(32, 32, 5);
    let mut last = (f64::INFINITY, f64::INFINITY);
    for sigma in [5.0, 10.0, 20.0, 40.0] {
        let noisy = add_gaussian_noise(&image, NoiseSpec::new(sigma, 8).unwrap()).unwrap();
        let now = (psnr(&image, &noisy).unwrap(), ssim(&image, &noisy).unwrap());
        assert!(now.0 < last.0 && now.1 < last.1, "sigma {sigma}: {now:?} after {last:?}");
        last = now;
    }
}

#[test]
fn constant_image_survives_denoising() {
    let image = Image::filled(8, 8, [0.3, 0.6, 0.45]).unwrap();
    let out = coconet::model::denoise(&image, &small(200, 9)).unwrap();
    for (a, b) in out.as_slice().iter().zip(image.as_slice()) {
        assert!((a - b).abs() < 0.05);
    }
}
