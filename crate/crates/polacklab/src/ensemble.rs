//! Monte Carlo verification of the moment theory: empirical spectral moments,
//! circularity and phase-uniformity hypothesis tests, cross-bin decorrelation
//! and STFT phase whiteness.
//!
//! Every operation takes an [`EnsembleSpec`] whose per-sample seeds are
//! derived from the master seed, so reports are bitwise reproducible
//! regardless of thread count; reductions always run in sample order.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::FrequencyProfile;
use crate::rng;
use crate::spectral::{self, StftConfig};
use crate::stats;
use crate::synth::{self, FilterBank, ImpulseResponse};

/// Which sampler the ensemble draws from.
#[derive(Debug, Clone)]
pub enum SynthSpec {
    /// Constant-parameter sampler.
    Simple { b: f64, alpha: f64 },
    /// Filter-bank sampler with a frequency-dependent profile.
    Generalized {
        profile: FrequencyProfile,
        bank: FilterBank,
    },
}

impl SynthSpec {
    pub fn sample(&self, duration: f64, sample_rate: f64, seed: u64) -> Result<ImpulseResponse> {
        match self {
            SynthSpec::Simple { b, alpha } => {
                synth::simple_polack(*b, *alpha, duration, sample_rate, seed)
            }
            SynthSpec::Generalized { profile, bank } => {
                synth::generalized_polack(profile, bank, duration, sample_rate, seed)
            }
        }
    }

    /// Decay rate at frequency `f` (clamped into the defined band).
    pub fn alpha_at(&self, f: f64) -> f64 {
        match self {
            SynthSpec::Simple { alpha, .. } => *alpha,
            SynthSpec::Generalized { profile, .. } => {
                let fc = f.clamp(-profile.nyquist(), profile.nyquist());
                profile.eval(fc).expect("clamped frequency").0
            }
        }
    }

    /// Magnitude at frequency `f`.
    pub fn b_at(&self, f: f64) -> f64 {
        match self {
            SynthSpec::Simple { b, .. } => *b,
            SynthSpec::Generalized { profile, .. } => {
                let fc = f.clamp(-profile.nyquist(), profile.nyquist());
                profile.eval(fc).expect("clamped frequency").1
            }
        }
    }

    /// Slowest decay that actually enters the synthesis (per band center for
    /// the generalized sampler), used to size default durations.
    pub fn alpha_min(&self) -> f64 {
        match self {
            SynthSpec::Simple { alpha, .. } => *alpha,
            SynthSpec::Generalized { profile, bank } => profile.min_alpha(bank.centers()),
        }
    }

    /// Slowest decay among the bands carrying the given frequencies (plus the
    /// frequencies themselves). Sizing the RIR length from the frequencies
    /// under study instead of the globally slowest band keeps the -80 dB
    /// truncation guarantee where it matters and avoids paying for bands
    /// nobody measures.
    pub fn alpha_min_for(&self, freqs: &[f64]) -> f64 {
        match self {
            SynthSpec::Simple { alpha, .. } => *alpha,
            SynthSpec::Generalized { profile, bank } => {
                if freqs.is_empty() {
                    return self.alpha_min();
                }
                let mut points: Vec<f64> = freqs.to_vec();
                for &f in freqs {
                    points.push(bank.centers()[bank.band_of(f)]);
                }
                profile.min_alpha(&points)
            }
        }
    }

    /// Serializable descriptor for provenance digests.
    pub fn descriptor(&self) -> serde_json::Value {
        match self {
            SynthSpec::Simple { b, alpha } => serde_json::json!({
                "kind": "simple", "b": b, "alpha": alpha,
            }),
            SynthSpec::Generalized { profile, bank } => serde_json::json!({
                "kind": "generalized",
                "profile": profile,
                "edges": bank.edges,
                "order": bank.order,
            }),
        }
    }
}

/// An ensemble of seeded RIR draws plus the frequency grid under study.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub n_samples: usize,
    pub master_seed: u64,
    pub synth: SynthSpec,
    pub sample_rate: f64,
    /// RIR length; `None` sizes it from the slowest decay (-80 dB, capped 10 s).
    pub duration: Option<f64>,
    pub frequencies: Vec<f64>,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::domain("ensemble needs n_samples >= 2"));
        }
        if !(self.sample_rate > 0.0) {
            return Err(Error::domain("sample rate must be positive"));
        }
        for &f in &self.frequencies {
            if !(0.0..self.sample_rate / 2.0).contains(&f) {
                return Err(Error::domain(format!(
                    "grid frequency {f} outside [0, fs/2)"
                )));
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.duration.unwrap_or_else(|| {
            synth::default_duration(self.synth.alpha_min_for(&self.frequencies))
        })
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn descriptor(&self) -> serde_json::Value {
        serde_json::json!({
            "n_samples": self.n_samples,
            "master_seed": self.master_seed,
            "synth": self.synth.descriptor(),
            "sample_rate": self.sample_rate,
            "duration": self.duration(),
            "frequencies": self.frequencies,
        })
    }

    pub fn config_digest(&self) -> String {
        crate::io::digest_json(&self.descriptor())
    }
}

/// Empirical counterpart of the per-frequency covariance matrix, under the
/// dt-scaled transform convention.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EmpiricalMoment {
    pub f: f64,
    pub var_re: f64,
    pub var_im: f64,
    pub cov_re_im: f64,
    pub n: usize,
    pub se_var_re: f64,
    pub se_var_im: f64,
    pub se_cov: f64,
}

/// Outcome of one hypothesis test. The serialized `decision` field is true
/// when the null hypothesis is rejected at the stated significance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub f_hz: Option<f64>,
    pub statistic: f64,
    pub p_value: f64,
    pub significance: f64,
    #[serde(rename = "decision")]
    pub reject: bool,
    pub n: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, f64>,
}

/// Phases of the Fourier coefficient at one frequency over an ensemble,
/// normalized into `[0, 2 pi)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseSample {
    pub f: f64,
    pub phases: Vec<f64>,
}

impl PhaseSample {
    pub fn from_complex(f: f64, values: &[Complex64]) -> Self {
        let tau = std::f64::consts::TAU;
        PhaseSample {
            f,
            phases: values.iter().map(|z| z.arg().rem_euclid(tau)).collect(),
        }
    }
}

/// Transform values `H_est(f)` for each grid frequency over the ensemble;
/// outer index frequency, inner index sample.
pub fn draw_spectra(spec: &EnsembleSpec) -> Result<Vec<Vec<Complex64>>> {
    spec.validate()?;
    let duration = spec.duration();
    let per_sample: Vec<Vec<Complex64>> = (0..spec.n_samples)
        .into_par_iter()
        .map(|j| -> Result<Vec<Complex64>> {
            let seed = rng::mix_seed(spec.master_seed, j as u64);
            let h = spec.synth.sample(duration, spec.sample_rate, seed)?;
            spec.frequencies
                .iter()
                .map(|&f| h.spectrum_at(f))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut by_freq = vec![Vec::with_capacity(spec.n_samples); spec.frequencies.len()];
    for row in &per_sample {
        for (k, &v) in row.iter().enumerate() {
            by_freq[k].push(v);
        }
    }
    Ok(by_freq)
}

/// Sample variances/covariance of `(Re H_est, Im H_est)` on the grid.
///
/// Standard errors use the Gaussian-theory formulas, which are good at the
/// ensemble sizes the crate runs at; below 1000 samples a 200-resample
/// bootstrap replaces them (seeded from the master seed, deterministic).
pub fn estimate_spectral_moments(spec: &EnsembleSpec) -> Result<Vec<EmpiricalMoment>> {
    let by_freq = draw_spectra(spec)?;
    Ok(spec
        .frequencies
        .iter()
        .zip(by_freq.iter())
        .enumerate()
        .map(|(k, (&f, vals))| {
            let mut row = empirical_moment(f, vals);
            if vals.len() < 1000 && vals.len() >= 4 {
                let seed = rng::mix_seed(spec.master_seed, 0xB007_0000 + k as u64);
                let (se_vr, se_vi, se_cov) = bootstrap_moment_se(vals, seed, 200);
                row.se_var_re = se_vr;
                row.se_var_im = se_vi;
                row.se_cov = se_cov;
            }
            row
        })
        .collect())
}

/// Moment row from raw complex draws (fixed-order reduction), with
/// Gaussian-theory standard errors.
pub fn empirical_moment(f: f64, vals: &[Complex64]) -> EmpiricalMoment {
    let n = vals.len();
    let re: Vec<f64> = vals.iter().map(|z| z.re).collect();
    let im: Vec<f64> = vals.iter().map(|z| z.im).collect();
    let (_, var_re) = stats::mean_var(&re);
    let (_, var_im) = stats::mean_var(&im);
    let cov = stats::covariance(&re, &im);
    let nf = (n.max(2) - 1) as f64;
    EmpiricalMoment {
        f,
        var_re,
        var_im,
        cov_re_im: cov,
        n,
        se_var_re: var_re * (2.0 / nf).sqrt(),
        se_var_im: var_im * (2.0 / nf).sqrt(),
        se_cov: ((var_re * var_im + cov * cov) / nf).sqrt(),
    }
}

/// Bootstrap standard errors of (var_re, var_im, cov) over resamples with
/// replacement.
fn bootstrap_moment_se(vals: &[Complex64], seed: u64, resamples: usize) -> (f64, f64, f64) {
    use rand::Rng;
    let n = vals.len();
    let mut vr = Vec::with_capacity(resamples);
    let mut vi = Vec::with_capacity(resamples);
    let mut cv = Vec::with_capacity(resamples);
    let mut buf_re = vec![0.0; n];
    let mut buf_im = vec![0.0; n];
    for r in 0..resamples {
        let mut rng = rng::rng_for(seed, r as u64);
        for i in 0..n {
            let z = vals[rng.gen_range(0..n)];
            buf_re[i] = z.re;
            buf_im[i] = z.im;
        }
        let (_, a) = stats::mean_var(&buf_re);
        let (_, b) = stats::mean_var(&buf_im);
        vr.push(a);
        vi.push(b);
        cv.push(stats::covariance(&buf_re, &buf_im));
    }
    let sd = |xs: &[f64]| stats::mean_var(xs).1.sqrt();
    (sd(&vr), sd(&vi), sd(&cv))
}

/// Isotropy test on complex draws: an F-style variance-ratio test between the
/// real and imaginary parts combined (Bonferroni) with a Fisher-z test for
/// zero correlation.
pub fn circularity_test(samples: &[Complex64], significance: f64) -> Result<TestReport> {
    let n = samples.len();
    if n < 30 {
        return Err(Error::stats(format!("circularity test needs n >= 30, got {n}")));
    }
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let im: Vec<f64> = samples.iter().map(|z| z.im).collect();
    let (_, var_re) = stats::mean_var(&re);
    let (_, var_im) = stats::mean_var(&im);
    if var_re <= 0.0 || var_im <= 0.0 {
        return Err(Error::stats(
            "degenerate sample: zero variance in a component (all values equal)",
        ));
    }
    let cov = stats::covariance(&re, &im);
    let corr = cov / (var_re * var_im).sqrt();
    let p_ratio = stats::variance_ratio_p(var_re, var_im, n, n)?;
    let p_corr = stats::correlation_p(corr, n)?;
    let p = (2.0 * p_ratio.min(p_corr)).min(1.0);
    let mut extras = BTreeMap::new();
    extras.insert("p_variance_ratio".to_string(), p_ratio);
    extras.insert("p_correlation".to_string(), p_corr);
    extras.insert("var_re".to_string(), var_re);
    extras.insert("var_im".to_string(), var_im);
    extras.insert("corr".to_string(), corr);
    Ok(TestReport {
        test: "circularity".to_string(),
        f_hz: None,
        statistic: var_re / var_im,
        p_value: p,
        significance,
        reject: p < significance,
        n,
        extras,
    })
}

/// KS test of a real sample against a normal law with fitted mean and
/// variance (conservative with fitted parameters, the safe direction here):
/// used to check per-index Gaussianity of sampled RIRs.
pub fn normality_test(data: &[f64], significance: f64) -> Result<TestReport> {
    if data.len() < 30 {
        return Err(Error::stats(format!(
            "normality test needs n >= 30, got {}",
            data.len()
        )));
    }
    let (d, p) = stats::ks_test_normal_fitted(data)?;
    Ok(TestReport {
        test: "normality_ks_fitted".to_string(),
        f_hz: None,
        statistic: d,
        p_value: p,
        significance,
        reject: p < significance,
        n: data.len(),
        extras: BTreeMap::new(),
    })
}

/// Kolmogorov-Smirnov test of the phases against Uniform[0, 2 pi), with a
/// Rayleigh mean-resultant statistic reported alongside (advisory; the KS
/// value decides).
pub fn phase_uniformity_test(sample: &PhaseSample, significance: f64) -> Result<TestReport> {
    let n = sample.phases.len();
    if n < 30 {
        return Err(Error::stats(format!(
            "phase uniformity test needs n >= 30, got {n}"
        )));
    }
    let tau = std::f64::consts::TAU;
    let scaled: Vec<f64> = sample.phases.iter().map(|p| p / tau).collect();
    let (d, p_ks) = stats::ks_test_uniform01(&scaled)?;
    let (z, p_ray) = stats::rayleigh_test(&sample.phases)?;
    let mut extras = BTreeMap::new();
    extras.insert("rayleigh_z".to_string(), z);
    extras.insert("rayleigh_p".to_string(), p_ray);
    Ok(TestReport {
        test: "phase_uniformity".to_string(),
        f_hz: Some(sample.f),
        statistic: d,
        p_value: p_ks,
        significance,
        reject: p_ks < significance,
        n,
        extras,
    })
}

/// Empirical vs. theoretical cross-frequency correlation
/// `E[H(f + xi/2) H*(f - xi/2)]` (dt convention).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossBinReport {
    pub f: f64,
    pub xi: f64,
    pub empirical_re: f64,
    pub empirical_im: f64,
    pub theoretical_re: f64,
    pub theoretical_im: f64,
    pub rel_error: f64,
    pub standard_error: f64,
    pub n: usize,
}

impl CrossBinReport {
    pub fn empirical(&self) -> Complex64 {
        Complex64::new(self.empirical_re, self.empirical_im)
    }

    pub fn theoretical(&self) -> Complex64 {
        Complex64::new(self.theoretical_re, self.theoretical_im)
    }
}

pub fn cross_bin_correlation(spec: &EnsembleSpec, f: f64, xi: f64) -> Result<CrossBinReport> {
    spec.validate()?;
    let (f1, f2) = (f + xi / 2.0, f - xi / 2.0);
    let half = spec.sample_rate / 2.0;
    if !(f1 > 0.0 && f1 < half && f2 > 0.0 && f2 < half) {
        return Err(Error::domain(format!(
            "f +- xi/2 = ({f1}, {f2}) outside (0, {half})"
        )));
    }
    let duration = spec.duration();
    let pairs: Vec<(Complex64, Complex64)> = (0..spec.n_samples)
        .into_par_iter()
        .map(|j| -> Result<(Complex64, Complex64)> {
            let seed = rng::mix_seed(spec.master_seed, j as u64);
            let h = spec.synth.sample(duration, spec.sample_rate, seed)?;
            Ok((h.spectrum_at(f1)?, h.spectrum_at(f2)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let products: Vec<Complex64> = pairs.iter().map(|(a, b)| a * b.conj()).collect();
    let n = products.len() as f64;
    let mean: Complex64 = products.iter().sum::<Complex64>() / n;
    let var_re = products.iter().map(|z| (z.re - mean.re).powi(2)).sum::<f64>() / (n - 1.0);
    let var_im = products.iter().map(|z| (z.im - mean.im).powi(2)).sum::<f64>() / (n - 1.0);
    let se = ((var_re + var_im) / n).sqrt();

    // theory at the center frequency, scaled to the dt convention
    let alpha = spec.synth.alpha_at(f);
    let b = spec.synth.b_at(f) * spec.dt();
    let q = 2.0 * std::f64::consts::PI * xi / alpha;
    let theory = b / alpha * Complex64::new(1.0, -q) / (1.0 + q * q);

    Ok(CrossBinReport {
        f,
        xi,
        empirical_re: mean.re,
        empirical_im: mean.im,
        theoretical_re: theory.re,
        theoretical_im: theory.im,
        rel_error: (mean - theory).norm() / theory.norm(),
        standard_error: se,
        n: spec.n_samples,
    })
}

/// Least-squares slope of `log y` on `log x`.
pub fn convergence_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::domain("convergence slope needs n >= 3 matched points"));
    }
    if xs.iter().chain(ys.iter()).any(|&v| !(v > 0.0)) {
        return Err(Error::domain("convergence slope needs positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    stats::linear_fit(&lx, &ly)
}

// --- STFT phase whiteness ---------------------------------------------------

/// One tested (time-lag, frequency-lag) class of TF bin pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagClassRow {
    pub dt_hops: usize,
    pub df_bins: usize,
    pub n_pairs: usize,
    /// Deterministic complex correlation a white process would show through
    /// this window/hop/envelope (cross-ambiguity of the squared-window with
    /// the decay envelope).
    pub window_confound: f64,
    /// `pi/4 *` confound: the phase-correlation level implied by the window
    /// alone.
    pub predicted_phase_corr: f64,
    /// Debiased RMS resultant of phase differences/sums across the ensemble.
    pub measured_corr: f64,
    /// Whether the class counts toward the whiteness decision. Classes whose
    /// window confound alone predicts phase correlation above 0.035 are
    /// reported but excluded, like the low-frequency bins.
    pub included: bool,
}

/// Phase-whiteness report over TF bin pairs plus aggregate uniformity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitenessReport {
    pub classes: Vec<LagClassRow>,
    /// Maximum measured correlation over included classes.
    pub max_corr: f64,
    pub corr_threshold: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub significance: f64,
    /// Fraction of per-(frame, bin) cells individually rejecting uniformity.
    pub cell_rejection_rate: f64,
    pub n_samples: usize,
    pub n_frames: usize,
    pub bins_tested: Vec<usize>,
    pub low_freq_cutoff_hz: f64,
    pub pass: bool,
    pub config_digest: String,
}

impl WhitenessReport {
    pub fn as_test_report(&self) -> TestReport {
        let mut extras = BTreeMap::new();
        extras.insert("max_corr".to_string(), self.max_corr);
        extras.insert("ks_statistic".to_string(), self.ks_statistic);
        extras.insert("cell_rejection_rate".to_string(), self.cell_rejection_rate);
        TestReport {
            test: "stft_phase_whiteness".to_string(),
            f_hz: None,
            statistic: self.max_corr,
            p_value: self.ks_p_value,
            significance: self.significance,
            reject: !self.pass,
            n: self.n_samples,
            extras,
        }
    }
}

/// Options for the whiteness check.
#[derive(Debug, Clone)]
pub struct WhitenessConfig {
    pub significance: f64,
    pub corr_threshold: f64,
    /// Every `bin_step`-th bin above the cutoff is tested.
    pub bin_step: usize,
    pub max_frames: usize,
    /// Tested (time, frequency) lag classes in (hops, bins).
    pub lags: Vec<(usize, usize)>,
}

impl Default for WhitenessConfig {
    fn default() -> Self {
        let mut lags = Vec::new();
        for dt in 1..=4usize {
            for df in [2usize, 3, 4, 5, 8] {
                lags.push((dt, df));
            }
        }
        WhitenessConfig {
            significance: 0.01,
            corr_threshold: 0.05,
            bin_step: 3,
            max_frames: 10,
            lags,
        }
    }
}

/// Uniformity and mutual independence of STFT phases across TF bins over an
/// ensemble of RIRs.
///
/// Bins below `10 alpha(0) / (4 pi)` are excluded (the theory is asymptotic
/// in frequency); lag classes whose deterministic window cross-ambiguity
/// already implies phase correlation are reported but excluded from the
/// decision, since they measure the analysis window rather than the process.
pub fn stft_phase_whiteness(
    spec: &EnsembleSpec,
    cfg: &StftConfig,
    opts: &WhitenessConfig,
) -> Result<WhitenessReport> {
    spec.validate()?;
    cfg.validate()?;
    if (cfg.sample_rate - spec.sample_rate).abs() > 1e-9 {
        return Err(Error::config(format!(
            "STFT config at {} Hz but ensemble at {} Hz",
            cfg.sample_rate, spec.sample_rate
        )));
    }
    let duration = spec.duration();
    let sig_len = (duration * spec.sample_rate).ceil() as usize;
    let n_fft = cfg.win_len;
    let hop = cfg.hop;
    let pad = if cfg.center { n_fft / 2 } else { 0 };

    // frames whose window lies fully inside the signal (the envelope-based
    // confound formula holds exactly there)
    let first_frame = pad.div_ceil(hop);
    let n_frames_total = if sig_len + 2 * pad >= n_fft {
        (sig_len + 2 * pad - n_fft) / hop + 1
    } else {
        1
    };
    let last_full = ((sig_len + pad).saturating_sub(n_fft)) / hop;
    if last_full < first_frame {
        return Err(Error::config(
            "RIR shorter than one analysis window; nothing to test",
        ));
    }
    let n_frames = (last_full - first_frame + 1).min(opts.max_frames);

    // bins above the low-frequency exclusion, inside the synthesis band
    let alpha0 = spec.synth.alpha_at(0.0);
    let f_cut = 10.0 * alpha0 / (4.0 * std::f64::consts::PI);
    let f_max = 0.4 * spec.sample_rate;
    let k_min = (f_cut / cfg.bin_hz(1)).ceil() as usize;
    let k_max = (f_max / cfg.bin_hz(1)).floor() as usize;
    if k_min + 2 >= k_max {
        return Err(Error::config(format!(
            "low-frequency cutoff {f_cut:.1} Hz leaves no usable bins"
        )));
    }
    // phases are collected for every bin in range so any frequency lag has
    // its partner; reference bins are stepped to bound the pair count
    let bins: Vec<usize> = (k_min..=k_max).collect();
    let refs: Vec<usize> = (0..bins.len()).step_by(opts.bin_step.max(1)).collect();
    let n_cells = n_frames * bins.len();
    let per_sample: Vec<Vec<f64>> = (0..spec.n_samples)
        .into_par_iter()
        .map(|j| -> Result<Vec<f64>> {
            let seed = rng::mix_seed(spec.master_seed, j as u64);
            let h = spec.synth.sample(duration, spec.sample_rate, seed)?;
            let sg = spectral::stft(&h.samples, cfg)?;
            let mut out = Vec::with_capacity(n_cells);
            for t in 0..n_frames {
                let frame = first_frame + t;
                for &k in &bins {
                    out.push(sg.get(frame.min(n_frames_total - 1), k).arg());
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    // per-class debiased RMS circular correlation
    let n = spec.n_samples as f64;
    let w = spectral::window(cfg.window, n_fft);
    let mut classes = Vec::new();
    for &(dt, df) in &opts.lags {
        let mut acc_diff = 0.0f64;
        let mut acc_sum = 0.0f64;
        let mut n_pairs = 0usize;
        let mut confound: f64 = 0.0;
        for t0 in 0..n_frames.saturating_sub(dt) {
            for &bi in &refs {
                if bi + df >= bins.len() {
                    continue;
                }
                let k0 = bins[bi];
                let k1 = k0 + df;
                let f1 = cfg.bin_hz(k0);
                let cell_a = t0 * bins.len() + bi;
                let cell_b = (t0 + dt) * bins.len() + (bi + df);
                let mut rd = Complex64::new(0.0, 0.0);
                let mut rs = Complex64::new(0.0, 0.0);
                for row in &per_sample {
                    let (p1, p2) = (row[cell_a], row[cell_b]);
                    rd += Complex64::from_polar(1.0, p1 - p2);
                    rs += Complex64::from_polar(1.0, p1 + p2);
                }
                acc_diff += (rd / n).norm_sqr();
                acc_sum += (rs / n).norm_sqr();
                n_pairs += 1;
                let f2 = cfg.bin_hz(k1);
                let beta =
                    0.5 * (spec.synth.alpha_at(f1) + spec.synth.alpha_at(f2)) / spec.sample_rate;
                confound = confound.max(window_cross_ambiguity(&w, hop * dt, df, n_fft, beta));
            }
        }
        if n_pairs == 0 {
            continue;
        }
        let debias = |acc: f64| -> f64 { (acc / n_pairs as f64 - 1.0 / n).max(0.0).sqrt() };
        let measured = debias(acc_diff).max(debias(acc_sum));
        let predicted = std::f64::consts::FRAC_PI_4 * confound;
        classes.push(LagClassRow {
            dt_hops: dt,
            df_bins: df,
            n_pairs,
            window_confound: confound,
            predicted_phase_corr: predicted,
            measured_corr: measured,
            included: predicted <= 0.035,
        });
    }

    let max_corr = classes
        .iter()
        .filter(|c| c.included)
        .map(|c| c.measured_corr)
        .fold(0.0, f64::max);

    // aggregate uniformity over the stepped reference cells: pooled KS plus
    // the per-cell rejection rate
    let tau = std::f64::consts::TAU;
    let mut pooled = Vec::with_capacity(spec.n_samples * n_frames * refs.len());
    let mut rejections = 0usize;
    let mut n_ref_cells = 0usize;
    let mut cell_buf = Vec::with_capacity(spec.n_samples);
    for t in 0..n_frames {
        for &bi in &refs {
            let cell = t * bins.len() + bi;
            cell_buf.clear();
            for row in &per_sample {
                cell_buf.push(row[cell].rem_euclid(tau) / tau);
            }
            let (_, p) = stats::ks_test_uniform01(&cell_buf)?;
            if p < opts.significance {
                rejections += 1;
            }
            n_ref_cells += 1;
            pooled.extend_from_slice(&cell_buf);
        }
    }
    let (ks_d, ks_p) = stats::ks_test_uniform01(&pooled)?;

    let pass = max_corr < opts.corr_threshold && ks_p >= opts.significance;
    Ok(WhitenessReport {
        classes,
        max_corr,
        corr_threshold: opts.corr_threshold,
        ks_statistic: ks_d,
        ks_p_value: ks_p,
        significance: opts.significance,
        cell_rejection_rate: rejections as f64 / n_ref_cells as f64,
        n_samples: spec.n_samples,
        n_frames,
        bins_tested: refs.iter().map(|&bi| bins[bi]).collect(),
        low_freq_cutoff_hz: f_cut,
        pass,
        config_digest: spec.config_digest(),
    })
}

/// Complex correlation between STFT bins `(t, k)` and `(t + dt, k + df)` for
/// an exponentially decaying white process: `|sum_m e^{-beta m} w[m] w[m - s]
/// e^{-2 pi i df m / N}| / sqrt(D1 D2)` with `s = dt * hop`. Depends only on
/// the lags, not the absolute frame, because the envelope factors out.
fn window_cross_ambiguity(w: &[f64], shift: usize, df: usize, n_fft: usize, beta: f64) -> f64 {
    if shift >= n_fft {
        return 0.0;
    }
    let theta = 2.0 * std::f64::consts::PI * df as f64 / n_fft as f64;
    let mut num = Complex64::new(0.0, 0.0);
    let mut d1 = 0.0;
    for (m, &wm) in w.iter().enumerate() {
        let env = (-beta * m as f64).exp();
        d1 += env * wm * wm;
        if m >= shift {
            let cross = env * wm * w[m - shift];
            num += cross * Complex64::from_polar(1.0, -theta * m as f64);
        }
    }
    // second frame's power under the same envelope, shifted
    let mut d2 = 0.0;
    for (m, &wm) in w.iter().enumerate() {
        let env = (-beta * (m + shift) as f64).exp();
        d2 += env * wm * wm;
    }
    num.norm() / (d1 * d2).sqrt().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn simple_spec(n: usize, seed: u64, freqs: Vec<f64>) -> EnsembleSpec {
        EnsembleSpec {
            n_samples: n,
            master_seed: seed,
            synth: SynthSpec::Simple { b: 1.0, alpha: 20.0 },
            sample_rate: 8000.0,
            duration: None,
            frequencies: freqs,
        }
    }

    #[test]
    fn convergence_slope_exact_power_laws() {
        let xs: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powi(-2)).collect();
        let (slope, _, r2) = convergence_slope(&xs, &ys).unwrap();
        assert!((slope + 2.0).abs() < 1e-10);
        assert!((r2 - 1.0).abs() < 1e-10);
        assert!(convergence_slope(&xs, &[0.0; 20]).is_err());
        assert!(convergence_slope(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn closed_form_anisotropy_and_cross_cov_slopes() {
        // anisotropy sigma+^2 - sigma-^2 falls like f^-2, C like f^-1
        let p = FrequencyProfile::constant(20.0, 1.0, 1e7).unwrap();
        let alpha0 = 20.0;
        let base = alpha0 / (4.0 * std::f64::consts::PI);
        let xs: Vec<f64> = (0..=20)
            .map(|i| base * 100.0 * (10000.0f64 / 100.0).powf(i as f64 / 20.0))
            .collect();
        let mut aniso = Vec::new();
        let mut cross = Vec::new();
        for &f in &xs {
            let m = moments::closed_form_sigma(&p, f).unwrap();
            aniso.push(m.sigma_plus_sq - m.sigma_minus_sq);
            cross.push(m.cross_cov);
        }
        let (s1, _, _) = convergence_slope(&xs, &aniso).unwrap();
        let (s2, _, _) = convergence_slope(&xs, &cross).unwrap();
        assert!((s1 + 2.0).abs() < 0.01, "anisotropy slope {s1}");
        assert!((s2 + 1.0).abs() < 0.01, "cross-cov slope {s2}");
    }

    #[test]
    fn circularity_accepts_circular_and_detects_anisotropy() {
        let mut rng = rng::rng_for(3, 0);
        let circ: Vec<Complex64> = (0..5000)
            .map(|_| {
                Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
            })
            .collect();
        let rep = circularity_test(&circ, 0.01).unwrap();
        assert!(!rep.reject, "false rejection, p={}", rep.p_value);
        let aniso: Vec<Complex64> = circ
            .iter()
            .map(|z| Complex64::new(1.5 * z.re, z.im))
            .collect();
        let rep2 = circularity_test(&aniso, 0.01).unwrap();
        assert!(rep2.reject);
        // correlated parts also rejected
        let correlated: Vec<Complex64> = circ
            .iter()
            .map(|z| Complex64::new(z.re, 0.6 * z.re + 0.8 * z.im))
            .collect();
        assert!(circularity_test(&correlated, 0.01).unwrap().reject);
    }

    #[test]
    fn circularity_degenerate_and_small_n() {
        let flat = vec![Complex64::new(1.0, 1.0); 100];
        assert!(circularity_test(&flat, 0.01).is_err());
        let few = vec![Complex64::new(1.0, 0.0); 10];
        assert!(circularity_test(&few, 0.01).is_err());
    }

    #[test]
    fn uniformity_accepts_uniform_rejects_clustered() {
        let mut rng = rng::rng_for(4, 0);
        let unif = PhaseSample {
            f: 100.0,
            phases: (0..5000)
                .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
                .collect(),
        };
        let rep = phase_uniformity_test(&unif, 0.01).unwrap();
        assert!(!rep.reject, "p = {}", rep.p_value);
        let clustered = PhaseSample {
            f: 100.0,
            phases: (0..5000)
                .map(|i| 0.5 + 0.1 * ((i % 13) as f64 / 13.0))
                .collect(),
        };
        let rep2 = phase_uniformity_test(&clustered, 0.01).unwrap();
        assert!(rep2.reject && rep2.p_value < 1e-10);
        // all-equal phases: maximal KS statistic
        let equal = PhaseSample {
            f: 1.0,
            phases: vec![1.0; 100],
        };
        let rep3 = phase_uniformity_test(&equal, 0.01).unwrap();
        assert!(rep3.p_value < 1e-12);
    }

    #[test]
    fn calibration_smoke_at_nominal_level() {
        // 200 quick null repetitions per test; full calibration lives in the
        // acceptance suite
        let mut rejections_ks = 0;
        let mut rejections_circ = 0;
        let reps = 200;
        for rep in 0..reps {
            let mut rng = rng::rng_for(1000 + rep, 0);
            let phases: Vec<f64> = (0..500)
                .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
                .collect();
            let r = phase_uniformity_test(&PhaseSample { f: 1.0, phases }, 0.01).unwrap();
            if r.reject {
                rejections_ks += 1;
            }
            let vals: Vec<Complex64> = (0..500)
                .map(|_| {
                    Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
                })
                .collect();
            if circularity_test(&vals, 0.01).unwrap().reject {
                rejections_circ += 1;
            }
        }
        assert!(rejections_ks <= 10, "KS rejected {rejections_ks}/{reps}");
        assert!(rejections_circ <= 10, "circularity rejected {rejections_circ}/{reps}");
    }

    #[test]
    fn moments_smoke_against_theory() {
        let spec = simple_spec(800, 42, vec![500.0]);
        let rows = estimate_spectral_moments(&spec).unwrap();
        let want = 1.0 * spec.dt() / (2.0 * 20.0);
        let row = &rows[0];
        assert!((row.var_re - want).abs() < 6.0 * row.se_var_re, "{row:?}");
        assert!((row.var_im - want).abs() < 6.0 * row.se_var_im);
        assert_eq!(row.n, 800);
    }

    #[test]
    fn moments_degenerate_two_samples() {
        let spec = simple_spec(2, 1, vec![100.0]);
        let rows = estimate_spectral_moments(&spec).unwrap();
        assert!(rows[0].var_re.is_finite() && rows[0].se_var_re.is_finite());
    }

    #[test]
    fn bootstrap_se_tracks_gaussian_formula() {
        // at n = 800 the bootstrap fallback is active; it should land near
        // the Gaussian-theory standard error
        let spec = simple_spec(800, 5, vec![500.0]);
        let rows = estimate_spectral_moments(&spec).unwrap();
        let gaussian = rows[0].var_re * (2.0f64 / 799.0).sqrt();
        let ratio = rows[0].se_var_re / gaussian;
        assert!(
            (0.7..=1.4).contains(&ratio),
            "bootstrap/theory SE ratio {ratio}"
        );
        // determinism of the resampling
        let rows2 = estimate_spectral_moments(&spec).unwrap();
        assert_eq!(rows[0].se_var_re.to_bits(), rows2[0].se_var_re.to_bits());
    }

    #[test]
    fn ensemble_results_independent_of_thread_count() {
        let spec = simple_spec(64, 7, vec![200.0, 1000.0]);
        let a = draw_spectra(&spec).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| draw_spectra(&spec).unwrap());
        assert_eq!(a.len(), b.len());
        for (va, vb) in a.iter().zip(&b) {
            for (x, y) in va.iter().zip(vb) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn cross_bin_zero_lag_matches_variance() {
        let spec = simple_spec(2000, 11, vec![500.0]);
        let rep = cross_bin_correlation(&spec, 500.0, 0.0).unwrap();
        let want = 1.0 * spec.dt() / 20.0;
        assert!(
            (rep.empirical().re - want).abs() < 4.0 * rep.standard_error,
            "{rep:?}"
        );
        assert!((rep.theoretical() - Complex64::new(want, 0.0)).norm() < 1e-15);
        assert!(cross_bin_correlation(&spec, 10.0, 100.0).is_err());
    }

    #[test]
    fn whiteness_smoke_structure_and_determinism() {
        let spec = EnsembleSpec {
            n_samples: 64,
            master_seed: 5,
            synth: SynthSpec::Simple { b: 1.0, alpha: 168.5 },
            sample_rate: 8000.0,
            duration: Some(0.15),
            frequencies: vec![],
        };
        let cfg = StftConfig::new(256, 64, 8000.0).unwrap();
        let opts = WhitenessConfig {
            bin_step: 4,
            max_frames: 5,
            ..WhitenessConfig::default()
        };
        let r1 = stft_phase_whiteness(&spec, &cfg, &opts).unwrap();
        let r2 = stft_phase_whiteness(&spec, &cfg, &opts).unwrap();
        assert_eq!(
            serde_json::to_string(&r1).unwrap(),
            serde_json::to_string(&r2).unwrap()
        );
        assert!(!r1.classes.is_empty());
        // near-window pairs must be flagged as confounded
        let near = r1
            .classes
            .iter()
            .find(|c| c.dt_hops == 1 && c.df_bins == 2)
            .unwrap();
        assert!(!near.included);
        assert!(near.window_confound > 0.05);
    }
}
