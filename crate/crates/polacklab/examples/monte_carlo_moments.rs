//! Empirical spectral moments of sampled RIRs against the theory, with
//! z-scores.
//!
//! ```bash
//! cargo run --release --example monte_carlo_moments
//! ```

use polacklab::ensemble::{estimate_spectral_moments, EnsembleSpec, SynthSpec};
use polacklab::moments::{closed_form_sigma, DiscretizationConvention};
use polacklab::profile::FrequencyProfile;

fn main() -> polacklab::Result<()> {
    let (b, alpha, fs) = (1.0, 20.0, 8_000.0);
    let spec = EnsembleSpec {
        n_samples: 5_000,
        master_seed: 2024,
        synth: SynthSpec::Simple { b, alpha },
        sample_rate: fs,
        duration: None,
        frequencies: vec![0.0, 10.0, 50.0, 200.0, 500.0, 1000.0],
    };
    let profile = FrequencyProfile::constant(alpha, b, fs / 2.0)?;
    let conv = DiscretizationConvention::new(fs)?;
    println!(
        "{} RIRs of {:.3} s at {fs} Hz (dt-scaled transform convention)",
        spec.n_samples,
        spec.duration()
    );
    println!(
        "{:>8} {:>12} {:>12} {:>6} {:>12} {:>12} {:>6} {:>12} {:>6}",
        "f [Hz]", "Var Re", "theory", "z", "Var Im", "theory", "z", "Cov", "z"
    );
    for row in estimate_spectral_moments(&spec)? {
        let th = conv.scale_moment(closed_form_sigma(&profile, row.f)?);
        let z = |e: f64, t: f64, se: f64| if se > 0.0 { (e - t) / se } else { 0.0 };
        println!(
            "{:>8.0} {:>12.4e} {:>12.4e} {:>6.2} {:>12.4e} {:>12.4e} {:>6.2} {:>12.4e} {:>6.2}",
            row.f,
            row.var_re,
            th.sigma_plus_sq,
            z(row.var_re, th.sigma_plus_sq, row.se_var_re),
            row.var_im,
            th.sigma_minus_sq,
            z(row.var_im, th.sigma_minus_sq, row.se_var_im),
            row.cov_re_im,
            // the estimator measures Cov(Re H, Im H) = -C
            z(row.cov_re_im, th.cov_re_im(), row.se_cov),
        );
    }
    Ok(())
}
