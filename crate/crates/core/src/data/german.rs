//! German credit data: schema, a bundled synthetic stand-in with the same
//! columns and codes, and lookup of a fetched copy.
//!
//! Target is `class = 1` (good credit), the sensitive feature is
//! `age > 25`, and age is not used as a feature.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{load_csv_with_report, read_csv, LoadReport, SchemaDescriptor};
use crate::distributions::SampleSet;
use crate::error::{Error, Result};

pub const SCHEMA_TOML: &str = include_str!("../../data/german.toml");

/// Bundled stand-in, `standin_csv(STANDIN_ROWS, STANDIN_SEED)`.
pub const STANDIN_CSV: &str = include_str!("../../data/german_standin.csv");
pub const STANDIN_ROWS: usize = 1000;
pub const STANDIN_SEED: u64 = 1994;

/// File name looked up inside the data directory.
pub const FILE_NAME: &str = "german.csv";

pub const COLUMNS: [&str; 21] = [
    "checking_status",
    "duration",
    "credit_history",
    "purpose",
    "credit_amount",
    "savings_status",
    "employment",
    "installment_rate",
    "personal_status",
    "other_parties",
    "residence_since",
    "property_magnitude",
    "age",
    "other_payment_plans",
    "housing",
    "existing_credits",
    "job",
    "num_dependents",
    "own_telephone",
    "foreign_worker",
    "class",
];

pub fn schema() -> SchemaDescriptor {
    SchemaDescriptor::from_toml_str(SCHEMA_TOML).expect("bundled schema parses")
}

pub fn load_standin() -> Result<SampleSet> {
    read_csv(STANDIN_CSV.as_bytes(), &schema()).map(|(s, _)| s)
}

/// `<dir>/german.csv`, as written by `scripts/fetch_german.sh`.
pub fn fetched_path(dir: impl AsRef<Path>) -> PathBuf {
    dir.as_ref().join(FILE_NAME)
}

pub fn load_fetched(dir: impl AsRef<Path>) -> Result<(SampleSet, LoadReport)> {
    let path = fetched_path(dir);
    if !path.exists() {
        return Err(Error::Config(format!(
            "{} not found; run scripts/fetch_german.sh",
            path.display()
        )));
    }
    load_csv_with_report(path, &schema())
}

fn pick(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Synthetic rows in the german credit layout. Age drives employment,
/// housing, property and status codes, so the sensitive feature is
/// partly predictable from the other columns; the credit outcome follows a
/// logistic model of checking status, history, duration and savings.
pub fn standin_csv(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for _ in 0..n {
        let young = rng.gen::<f64>() < 0.19;
        let age: u32 = if young {
            rng.gen_range(19..=25)
        } else {
            26 + (rng.gen::<f64>().powf(1.6) * 49.0) as u32
        };
        let seniority = ((age as f64 - 19.0) / 30.0).min(1.0);

        let checking = pick(&mut rng, &[0.27, 0.27, 0.06, 0.40]);
        let history = pick(&mut rng, &[0.04, 0.05, 0.53, 0.09, 0.29 * (0.5 + seniority)]);
        let purpose_codes = ["0", "1", "2", "3", "4", "5", "6", "8", "9", "10"];
        let purpose = pick(&mut rng, &[0.23, 0.10, 0.18, 0.28, 0.01, 0.02, 0.05, 0.01, 0.10, 0.02]);
        let duration = 4 + 4 * rng.gen_range(0..6) + rng.gen_range(0..4) * rng.gen_range(0..9);
        let amount = (250.0 + duration as f64 * rng.gen_range(60.0..260.0)).round() as u32;
        let savings = pick(&mut rng, &[0.60, 0.10, 0.06, 0.05, 0.19]);
        let employment = if young {
            pick(&mut rng, &[0.12, 0.45, 0.35, 0.06, 0.02])
        } else {
            pick(&mut rng, &[0.05, 0.12, 0.33, 0.18, 0.32])
        };
        let installment = rng.gen_range(1..=4);
        let status = if young {
            pick(&mut rng, &[0.04, 0.55, 0.30, 0.11])
        } else {
            pick(&mut rng, &[0.06, 0.25, 0.60, 0.09])
        };
        let parties = pick(&mut rng, &[0.91, 0.04, 0.05]);
        let residence = if young { rng.gen_range(1..=2) } else { rng.gen_range(1..=4) };
        let property = if young {
            pick(&mut rng, &[0.20, 0.25, 0.45, 0.10])
        } else {
            pick(&mut rng, &[0.30, 0.23, 0.31, 0.16])
        };
        let plans = pick(&mut rng, &[0.14, 0.05, 0.81]);
        let housing = if young {
            pick(&mut rng, &[0.45, 0.50, 0.05])
        } else {
            pick(&mut rng, &[0.13, 0.75, 0.12])
        };
        let credits = 1 + u32::from(rng.gen::<f64>() < 0.2 + 0.3 * seniority);
        let job = pick(&mut rng, &[0.02, 0.20, 0.63, 0.15]);
        let dependents = 1 + u32::from(rng.gen::<f64>() < 0.05 + 0.2 * seniority);
        let telephone = pick(&mut rng, &[0.6 - 0.2 * seniority, 0.4 + 0.2 * seniority]);
        let foreign = pick(&mut rng, &[0.96, 0.04]);

        let logit = 0.9 + [-0.9, -0.4, 0.3, 1.2][checking]
            + [-1.0, -0.8, 0.0, 0.2, 0.7][history]
            + [0.0, 0.2, 0.3, 0.5, 0.6][savings]
            - 0.03 * (duration as f64 - 20.0)
            - 0.00008 * (amount as f64 - 3000.0)
            - 0.2 * (installment as f64 - 2.5)
            + 0.25 * seniority
            + if housing == 1 { 0.3 } else { 0.0 };
        let good = rng.gen::<f64>() < 1.0 / (1.0 + (-logit).exp());

        let _ = writeln!(
            out,
            "A1{},{},A3{},A4{},{},A6{},A7{},{},A9{},A10{},{},A12{},{},A14{},A15{},{},A17{},{},A19{},A20{},{}",
            checking + 1,
            duration,
            history,
            purpose_codes[purpose],
            amount,
            savings + 1,
            employment + 1,
            installment,
            status + 1,
            parties + 1,
            residence,
            property + 1,
            age,
            plans + 1,
            housing + 1,
            credits,
            job + 1,
            dependents,
            telephone + 1,
            foreign + 1,
            if good { 1 } else { 2 },
        );
    }
    out
}
