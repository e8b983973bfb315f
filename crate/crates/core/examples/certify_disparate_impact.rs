//! Checks the 80% rule two ways on the german credit stand-in: directly as a
//! ratio, and as a cost-sensitive risk of a model trained to predict the
//! sensitive feature, under increasing label noise.

use fairfront::experiments::{cmd_certify, CertifyConfig, RunContext};

fn main() -> fairfront::Result<()> {
    let out = std::env::temp_dir().join("fairfront-certify");
    let (run, rows) = cmd_certify(&RunContext::new(&out), &CertifyConfig::default())?;
    println!("noise   DI       delta     agree");
    for r in &rows {
        println!(
            "{:<7.2} {:<8} {:>+8.4}  {}",
            r.noise_rate,
            r.di.map_or("-".into(), |d| format!("{d:.4}")),
            r.delta,
            r.agree.map_or("-".into(), |a| a.to_string())
        );
    }
    println!("manifest: {}", run.manifest_path.display());
    Ok(())
}
