//! What reverberant phase does to a waveform, and which losses can tell.
//!
//! A dry signal is convolved with a random RIR; the dry magnitude
//! spectrogram is resynthesized once with its own phase and once with the
//! reverberant phase. Magnitude-only losses see no difference while the
//! waveform-level SI-SDR collapses — the reverberant phase carries almost no
//! usable alignment information.
//!
//! ```bash
//! cargo run --release --example phase_loss_demo
//! ```

use polacklab::loss::{loss_phase_sensitivity, phase_substitution_demo, LossMode};
use polacklab::profile::rt60_to_alpha;
use polacklab::spectral::{stft, StftConfig};
use polacklab::synth::{default_duration, simple_polack, synth_test_signal, TestSignalKind};

fn main() -> polacklab::Result<()> {
    let fs = 16_000.0;
    let rt60 = 0.5;
    let alpha = rt60_to_alpha(rt60)?;
    let s = synth_test_signal(TestSignalKind::HarmonicChirp, 2.0, fs, 5)?;
    let h = simple_polack(1.0, alpha, default_duration(alpha), fs, 6)?;
    let cfg = StftConfig::default();

    let report = phase_substitution_demo(&s, &h, &cfg)?;
    println!("RT60 = {rt60} s, Hann {}/{} at {fs} Hz", cfg.win_len, cfg.hop);
    println!("losses of the wet-phase reconstruction against the dry spectrogram:");
    for mode in LossMode::ALL {
        println!("  {:<16} {:12.6e}", mode.label(), report.losses_wet[mode.label()]);
    }
    println!(
        "SI-SDR: dry phase {:+7.1} dB   wet phase {:+7.1} dB",
        report.sisdr_dry_db, report.sisdr_wet_db
    );
    println!(
        "reanalysis residual of the inconsistent wet spectrogram: {:.3e}",
        report.wet_reanalysis_residual
    );

    // sensitivity of each loss to fully re-randomized phases
    let spec = stft(&s.samples, &cfg)?;
    println!("\nloss statistics under uniform re-randomized target phase (200 trials):");
    for mode in LossMode::ALL {
        let st = loss_phase_sensitivity(&spec, mode, 200, 11)?;
        println!(
            "  {:<16} mean {:12.6e}  variance {:12.6e}",
            mode.label(),
            st.mean,
            st.variance
        );
    }
    println!("magnitude modes are exactly flat; phase-kept modes are dominated by the perturbation");
    Ok(())
}
