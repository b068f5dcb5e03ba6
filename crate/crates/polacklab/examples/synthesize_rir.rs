//! Sample room impulse responses with both samplers and write them as WAV.
//!
//! ```bash
//! cargo run --release --example synthesize_rir
//! ```

use polacklab::profile::{rt60_to_alpha, sample_ar_profile, ArProfileSpec};
use polacklab::synth::{
    default_duration, default_edges, design_filter_bank, generalized_polack, simple_polack,
    DEFAULT_BANK_BANDS, DEFAULT_BANK_ORDER,
};

fn main() -> polacklab::Result<()> {
    let fs = 16_000.0;
    let out = std::path::Path::new("target/examples_out");

    // plain sampler: constant decay from an RT60
    let rt60 = 0.5;
    let alpha = rt60_to_alpha(rt60)?;
    let h = simple_polack(1.0, alpha, default_duration(alpha), fs, 42)?;
    println!(
        "simple sampler: RT60 {rt60} s -> alpha {alpha:.3} 1/s, {} samples ({:.3} s), energy {:.4}",
        h.samples.len(),
        h.duration(),
        h.energy()
    );
    h.write_wav(&out.join("rir_simple.wav"))?;

    // filter-bank sampler: frequency-dependent decay and magnitude
    let profile = sample_ar_profile(
        &ArProfileSpec {
            order: 8,
            pole_radius_max: 0.95,
            target_mean_alpha: alpha,
            target_mean_b: 1.0,
            seed: 7,
        },
        fs / 2.0,
    )?;
    let bank = design_filter_bank(&default_edges(fs, DEFAULT_BANK_BANDS), DEFAULT_BANK_ORDER, fs)?;
    let duration = default_duration(profile.min_alpha(bank.centers()));
    let h2 = generalized_polack(&profile, &bank, duration, fs, 42)?;
    println!(
        "generalized sampler: {} bands, {} samples ({:.3} s), energy {:.4}",
        bank.n_bands(),
        h2.samples.len(),
        h2.duration(),
        h2.energy()
    );
    h2.write_wav(&out.join("rir_generalized.wav"))?;
    println!("wrote {}", out.display());
    Ok(())
}
