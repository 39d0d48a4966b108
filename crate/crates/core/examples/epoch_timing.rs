//! Times training epochs for a given architecture on a synthetic 32x32 image.
//!
//! `cargo run --release -p coconet --example epoch_timing -- [depth] [width] [epochs] [batch]`

use std::time::Instant;

use coconet::model::{train, BatchPolicy, TrainConfig};
use coconet::nn::NetworkArch;
use coconet::Image;

fn main() -> coconet::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let depth = args.first().copied().unwrap_or(15);
    let width = args.get(1).copied().unwrap_or(200);
    let epochs = args.get(2).copied().unwrap_or(20);
    let batch = args.get(3).copied().unwrap_or(0);

    let image = Image::from_fn(32, 32, |r, c| {
        let (y, x) = (r as f64 / 31.0, c as f64 / 31.0);
        [0.5 + 0.4 * (6.0 * x).sin() * y, 0.5 + 0.4 * (5.0 * y).cos() * x, 0.3 + 0.4 * x * y]
    })?;
    let mut config = TrainConfig::new(NetworkArch::uniform(depth, width)).with_epochs(epochs);
    if batch > 0 {
        config.batch_policy = BatchPolicy::MiniBatch(batch);
    }
    let start = Instant::now();
    let outcome = train(&image, None, &config)?;
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "{depth}x{width}, {epochs} epochs: {:.3} s/epoch, final loss {:.3e}",
        elapsed / epochs as f64,
        outcome.model.final_loss
    );
    Ok(())
}
