//! The complex scatter of the RIR's Fourier coefficient at low and high
//! frequencies: anisotropic near DC, circular in the high-frequency limit.
//!
//! Writes per-frequency scatter CSVs and prints the circularity and
//! phase-uniformity verdicts.
//!
//! ```bash
//! cargo run --release --example scatter_regimes
//! ```

use polacklab::ensemble::{
    circularity_test, draw_spectra, phase_uniformity_test, EnsembleSpec, PhaseSample, SynthSpec,
};
use polacklab::io::write_csv;
use polacklab::profile::{sample_ar_profile, ArProfileSpec};
use polacklab::synth::{default_edges, design_filter_bank, DEFAULT_BANK_BANDS, DEFAULT_BANK_ORDER};

fn main() -> polacklab::Result<()> {
    let fs = 16_000.0;
    // random frequency-dependent parameters, mean RT60 of 82 ms
    let profile = sample_ar_profile(
        &ArProfileSpec {
            order: 8,
            pole_radius_max: 0.95,
            target_mean_alpha: 168.48183607273505,
            target_mean_b: 0.0029,
            seed: 21,
        },
        fs / 2.0,
    )?;
    let bank = design_filter_bank(&default_edges(fs, DEFAULT_BANK_BANDS), DEFAULT_BANK_ORDER, fs)?;
    let spec = EnsembleSpec {
        n_samples: 4_000,
        master_seed: 0xF161,
        synth: SynthSpec::Generalized { profile, bank },
        sample_rate: fs,
        duration: None,
        frequencies: vec![10.0, 100.0, 1000.0],
    };
    let out = std::path::Path::new("target/examples_out");
    let by_freq = draw_spectra(&spec)?;
    for (f, vals) in spec.frequencies.iter().zip(by_freq.iter()) {
        let circ = circularity_test(vals, 0.01)?;
        let unif = phase_uniformity_test(&PhaseSample::from_complex(*f, vals), 0.01)?;
        println!(
            "f = {f:>6.0} Hz: variance ratio {:>6.3}, corr {:>+6.3} -> circularity {}; KS p = {:.2e} -> phase {}",
            circ.statistic,
            circ.extras["corr"],
            if circ.reject { "REJECTED (anisotropic)" } else { "kept (isotropic)" },
            unif.p_value,
            if unif.reject { "NON-UNIFORM" } else { "uniform" },
        );
        let rows: Vec<Vec<f64>> = vals.iter().map(|z| vec![z.re, z.im]).collect();
        write_csv(&out.join(format!("scatter_{f:.0}hz.csv")), &["re", "im"], &rows)?;
    }
    println!("scatter CSVs in {}", out.display());
    Ok(())
}
