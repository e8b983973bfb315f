//! Plug-in sweep on the rotated two-Gaussian data with quadratic features:
//! both class-probability models are fitted once and every `lambda` reuses
//! them.

use fairfront::data::{quadratic_features, split, SplitSpec};
use fairfront::distributions::sample_rotated_gaussians;
use fairfront::frontier::linspace;
use fairfront::measures::SensitiveChannel;
use fairfront::plugin::{pareto_front, sweep_lambda, SweepConfig};

fn main() -> fairfront::Result<()> {
    let sample = quadratic_features(&sample_rotated_gaussians(10_000, 0.5, 7)?);
    let (train, test) = split(&sample, SplitSpec::default())?;
    let lambdas = linspace(-2.0, 2.0, 41);

    for channel in [SensitiveChannel::Dp, SensitiveChannel::Eo] {
        let cfg = SweepConfig { channel, ..SweepConfig::default() };
        let sweep = sweep_lambda(&train, &test, &lambdas, &cfg)?;
        println!("{channel:?}, c = {:.4}", sweep.c_used.get());
        for p in sweep.points.iter().step_by(5) {
            println!(
                "  lambda {:>5.2}  BER {:.4}  -|MD| {:.4}  DI {}",
                p.lambda,
                p.ber_target,
                p.md_sym_sensitive,
                p.di_sensitive.map_or("-".into(), |d| format!("{d:.4}"))
            );
        }
        let front = pareto_front(&sweep.points);
        let (md, ber) = front[0];
        println!("  fairest point: |MD| {md:.4} at BER {ber:.4}");
    }
    Ok(())
}
