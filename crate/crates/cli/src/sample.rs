//! Synthetic stand-in for the asthma and lead-exposure sample.
//!
//! Columns: `age` (years, 6 to 80), `sex` (`female`/`male`), `smoking`
//! (`yes`/`no`, ever smoked 100 cigarettes), `lead` (blood lead, μg/dL,
//! log-normal with mean near 1.67), `bmi` and `asthma` (0/1). The outcome
//! follows a logistic model with a mild lead effect and a prevalence near 15%.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::data::{csv_writer, flush, write_row};
use crate::error::Result;

pub const SAMPLE_ROWS: usize = 1200;
/// Seed of the bundled `data/asthma_synthetic.csv`.
pub const SAMPLE_SEED: u64 = 2012;
pub const SAMPLE_COLUMNS: [&str; 6] = ["age", "sex", "smoking", "lead", "bmi", "asthma"];

pub struct SampleRow {
    pub age: u32,
    pub female: bool,
    pub smoker: bool,
    pub lead: f64,
    pub bmi: f64,
    pub asthma: bool,
}

pub fn generate(rows: usize, seed: u64) -> Vec<SampleRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // mean exp(μ + σ²/2) = 1.67
    let sigma = 0.7;
    let lead_dist = LogNormal::new(1.67f64.ln() - sigma * sigma / 2.0, sigma).expect("valid log-normal");
    let bmi_dist = Normal::new(0.0, 5.5).expect("valid normal");
    (0..rows)
        .map(|_| {
            let age: u32 = rng.random_range(6..=80);
            let female = rng.random_bool(0.51);
            let smoker = age >= 16 && rng.random_bool(if female { 0.35 } else { 0.48 });
            let lead = lead_dist.sample(&mut rng).min(40.0);
            let bmi_mean = if age < 18 { 17.0 + 0.5 * age as f64 } else { 27.5 };
            let bmi = (bmi_mean + bmi_dist.sample(&mut rng)).clamp(13.0, 60.0);
            let eta = -1.85 + 0.25 * f64::from(u8::from(female)) + 0.35 * f64::from(u8::from(smoker))
                - 0.008 * (age as f64 - 40.0)
                + 0.02 * (bmi - 27.0)
                + 0.12 * (lead - 1.67);
            let asthma = rng.random_bool(1.0 / (1.0 + (-eta).exp()));
            SampleRow {
                age,
                female,
                smoker,
                lead: (lead * 100.0).round() / 100.0,
                bmi: (bmi * 10.0).round() / 10.0,
                asthma,
            }
        })
        .collect()
}

pub fn write_sample(path: &Path, rows: usize, seed: u64) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| crate::error::CliError::io(dir, e))?;
    }
    let mut w = csv_writer(path)?;
    write_row(&mut w, path, &SAMPLE_COLUMNS)?;
    for r in generate(rows, seed) {
        write_row(
            &mut w,
            path,
            &[
                r.age.to_string(),
                if r.female { "female" } else { "male" }.to_string(),
                if r.smoker { "yes" } else { "no" }.to_string(),
                format!("{:.2}", r.lead),
                format!("{:.1}", r.bmi),
                u8::from(r.asthma).to_string(),
            ],
        )?;
    }
    flush(w, path)
}
