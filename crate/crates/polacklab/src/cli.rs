//! The `polacklab` command-line front end: file-producing subcommands for
//! synthesis, the scatter/moment/correlation tables, phase tests, and the
//! loss demonstration.
//!
//! Configuration precedence is CLI flags over config-file values over
//! built-in defaults; the effective configuration (and its SHA-256 digest)
//! is echoed into every run's `run_meta.json`. CSV floats use a fixed
//! 9-significant-digit format so identical runs are byte-identical.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::ensemble::{self, EnsembleSpec, SynthSpec, WhitenessConfig};
use crate::error::{Error, Result};
use crate::io;
use crate::loss::{self, LossMode};
use crate::moments::{self, DiscretizationConvention};
use crate::profile::{self, ArProfileSpec, FrequencyProfile};
use crate::spectral::StftConfig;
use crate::synth::{self, TestSignalKind};

#[derive(Parser, Debug)]
#[command(
    name = "polacklab",
    version,
    about = "Statistical late-reverberation laboratory",
    after_help = "Outputs are deterministic for identical seed and configuration."
)]
pub struct CliArgs {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample RIRs and write them as WAV plus metadata.
    Synth(SynthArgs),
    /// Scatter data of (Re H, Im H) at chosen frequencies, with circularity
    /// and phase-uniformity verdicts.
    Fig1(Fig1Args),
    /// Theory (closed form + quadrature) vs Monte Carlo moment tables with
    /// z-scores.
    Moments(MomentsArgs),
    /// Cross-frequency correlation sweep against the closed form.
    Xcorr(XcorrArgs),
    /// Phase-uniformity tests across a frequency grid plus the STFT
    /// whiteness report.
    PhaseTest(PhaseTestArgs),
    /// Phase-substitution experiment and loss phase-sensitivity statistics.
    LossDemo(LossDemoArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Master seed (required for all stochastic commands; may come from the
    /// config file instead).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample rate in Hz.
    #[arg(long)]
    pub fs: Option<f64>,
    /// Ensemble size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Parameter profile: `const:alpha=<a>,b=<b>` | `ar:order=8[,seed=..,
    /// mean_alpha=..,mean_b=..,radius=..]` | a JSON profile path.
    #[arg(long)]
    pub profile: Option<String>,
    /// Number of filter-bank bands for generalized synthesis.
    #[arg(long)]
    pub bands: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats: csv,json,wav.
    #[arg(long)]
    pub format: Option<String>,
    /// JSON config file supplying defaults for any of the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Reverberation time RT60 in seconds (alternative to an explicit alpha).
    #[arg(long)]
    pub rt60: Option<f64>,
    /// RIR duration in seconds (default: -80 dB point of the slowest band).
    #[arg(long)]
    pub duration: Option<f64>,
}

#[derive(Args, Debug)]
pub struct Fig1Args {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Scatter frequencies in Hz.
    #[arg(long, value_delimiter = ',')]
    pub freqs: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Frequency grid in Hz.
    #[arg(long, value_delimiter = ',')]
    pub freqs: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct XcorrArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Center frequency in Hz.
    #[arg(long)]
    pub center: Option<f64>,
    /// Frequency separations xi in units of alpha/(2 pi).
    #[arg(long, value_delimiter = ',')]
    pub xi_scaled: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct PhaseTestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Frequencies for the per-frequency uniformity tests.
    #[arg(long, value_delimiter = ',')]
    pub freqs: Vec<f64>,
    /// STFT window length for the whiteness check.
    #[arg(long, default_value_t = 1024)]
    pub win: usize,
    /// STFT hop for the whiteness check.
    #[arg(long, default_value_t = 256)]
    pub hop: usize,
}

#[derive(Args, Debug)]
pub struct LossDemoArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Dry test signal kind: harmonic_chirp | am_tones | white.
    #[arg(long, default_value = "harmonic_chirp")]
    pub signal: String,
    /// Reverberation time of the demo RIR in seconds.
    #[arg(long)]
    pub rt60: Option<f64>,
    /// Dry signal duration in seconds.
    #[arg(long, default_value_t = 2.0)]
    pub duration: f64,
    /// Trials for the phase-sensitivity statistics.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
}

/// Values a config file may supply (same precedence slot for every command).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub fs: Option<f64>,
    pub n: Option<usize>,
    pub profile: Option<String>,
    pub bands: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub sample_rate: f64,
    pub n_samples: usize,
    pub profile_arg: String,
    pub bands: usize,
    pub out_dir: PathBuf,
    pub formats: Formats,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub wav: bool,
}

impl Formats {
    fn parse(s: &str) -> Result<Formats> {
        let mut f = Formats {
            csv: false,
            json: false,
            wav: false,
        };
        for part in s.split(',').filter(|p| !p.is_empty()) {
            match part.trim() {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "wav" => f.wav = true,
                other => {
                    return Err(Error::config(format!("unknown output format `{other}`")));
                }
            }
        }
        Ok(f)
    }
}

fn load_file_config(path: &Option<PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::io(p.display().to_string(), e))?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

/// Merge CLI flags over config-file values over defaults.
fn resolve_common(args: &CommonArgs, default_n: usize) -> Result<RunConfig> {
    let file = load_file_config(&args.config)?;
    let seed = args
        .seed
        .or(file.seed)
        .ok_or_else(|| Error::config("--seed is required (flag or config file)"))?;
    let sample_rate = args.fs.or(file.fs).unwrap_or(16_000.0);
    if !(sample_rate > 0.0) {
        return Err(Error::config("sample rate must be positive"));
    }
    let n_samples = args.n.or(file.n).unwrap_or(default_n);
    let profile_arg = args
        .profile
        .clone()
        .or(file.profile)
        .unwrap_or_else(|| "const:alpha=27.631021115928548,b=1".to_string());
    let bands = args.bands.or(file.bands).unwrap_or(synth::DEFAULT_BANK_BANDS);
    let out_dir = args
        .out
        .clone()
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("polacklab_out"));
    let formats = Formats::parse(
        &args
            .format
            .clone()
            .or(file.format)
            .unwrap_or_else(|| "csv,json".to_string()),
    )?;
    Ok(RunConfig {
        seed,
        sample_rate,
        n_samples,
        profile_arg,
        bands,
        out_dir,
        formats,
    })
}

/// Parsed `--profile` argument.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileArg {
    Const { alpha: Option<f64>, b: f64 },
    Ar(ArArgSpec),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArArgSpec {
    pub order: usize,
    pub seed: Option<u64>,
    pub mean_alpha: f64,
    pub mean_b: f64,
    pub radius: f64,
}

/// Mean decay rate matching the 82 ms reverberation time used for the
/// scatter experiment (6 ln 10 / 0.082).
pub const DEFAULT_AR_MEAN_ALPHA: f64 = 168.48183607273505;
/// Companion mean magnitude for the scatter experiment.
pub const DEFAULT_AR_MEAN_B: f64 = 0.0029;

pub fn parse_profile_arg(s: &str) -> Result<ProfileArg> {
    if let Some(body) = s.strip_prefix("const:") {
        let kv = parse_kv(body)?;
        let mut alpha = None;
        let mut b = 1.0;
        for (k, v) in kv {
            match k.as_str() {
                "alpha" => alpha = Some(parse_num(&v)?),
                "b" | "B" => b = parse_num(&v)?,
                other => {
                    return Err(Error::config(format!(
                        "unknown const profile key `{other}`"
                    )))
                }
            }
        }
        Ok(ProfileArg::Const { alpha, b })
    } else if let Some(body) = s.strip_prefix("ar:") {
        let kv = parse_kv(body)?;
        let mut spec = ArArgSpec {
            order: 8,
            seed: None,
            mean_alpha: DEFAULT_AR_MEAN_ALPHA,
            mean_b: DEFAULT_AR_MEAN_B,
            radius: 0.95,
        };
        for (k, v) in kv {
            match k.as_str() {
                "order" => {
                    spec.order = v
                        .parse()
                        .map_err(|_| Error::config(format!("bad ar order `{v}`")))?
                }
                "seed" => {
                    spec.seed = Some(
                        v.parse()
                            .map_err(|_| Error::config(format!("bad ar seed `{v}`")))?,
                    )
                }
                "mean_alpha" => spec.mean_alpha = parse_num(&v)?,
                "mean_b" => spec.mean_b = parse_num(&v)?,
                "radius" => spec.radius = parse_num(&v)?,
                other => {
                    return Err(Error::config(format!("unknown ar profile key `{other}`")))
                }
            }
        }
        Ok(ProfileArg::Ar(spec))
    } else if s.ends_with(".json") {
        Ok(ProfileArg::File(PathBuf::from(s)))
    } else {
        Err(Error::config(format!(
            "cannot parse profile `{s}`: expected const:..., ar:..., or a .json path"
        )))
    }
}

fn parse_kv(body: &str) -> Result<Vec<(String, String)>> {
    body.split(',')
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::config(format!("expected key=value, got `{pair}`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn parse_num(v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::config(format!("bad numeric value `{v}`")))
}

/// Build the profile named by the argument; `rt60` may supply the constant
/// decay rate instead of an explicit alpha, but not both.
pub fn resolve_profile(
    arg: &ProfileArg,
    rt60: Option<f64>,
    master_seed: u64,
    nyquist: f64,
) -> Result<FrequencyProfile> {
    match arg {
        ProfileArg::Const { alpha, b } => {
            let a = match (alpha, rt60) {
                (Some(_), Some(_)) => {
                    return Err(Error::config(
                        "conflicting decay specifications: both alpha and rt60 given",
                    ))
                }
                (Some(a), None) => *a,
                (None, Some(rt)) => profile::rt60_to_alpha(rt)?,
                (None, None) => {
                    return Err(Error::config("constant profile needs alpha or --rt60"))
                }
            };
            FrequencyProfile::constant(a, *b, nyquist)
        }
        ProfileArg::Ar(spec) => {
            if rt60.is_some() {
                return Err(Error::config(
                    "conflicting decay specifications: rt60 with an ar profile",
                ));
            }
            let ar = ArProfileSpec {
                order: spec.order,
                pole_radius_max: spec.radius,
                target_mean_alpha: spec.mean_alpha,
                target_mean_b: spec.mean_b,
                seed: spec.seed.unwrap_or_else(|| crate::rng::mix_seed(master_seed, 0xA1)),
            };
            profile::sample_ar_profile(&ar, nyquist)
        }
        ProfileArg::File(path) => {
            if rt60.is_some() {
                return Err(Error::config(
                    "conflicting decay specifications: rt60 with a profile file",
                ));
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            let p: FrequencyProfile = serde_json::from_str(&text)?;
            Ok(p)
        }
    }
}

/// Synthesis configuration resolved from a profile argument: constant
/// profiles use the plain sampler, everything else the filter bank.
fn resolve_synth(
    cfg: &RunConfig,
    rt60: Option<f64>,
) -> Result<(SynthSpec, FrequencyProfile)> {
    let arg = parse_profile_arg(&cfg.profile_arg)?;
    let nyquist = cfg.sample_rate / 2.0;
    let prof = resolve_profile(&arg, rt60, cfg.seed, nyquist)?;
    let synth_spec = match arg {
        ProfileArg::Const { .. } => {
            let (alpha, b) = prof.eval(0.0)?;
            SynthSpec::Simple { b, alpha }
        }
        _ => {
            let edges = synth::default_edges(cfg.sample_rate, cfg.bands);
            let bank =
                synth::design_filter_bank(&edges, synth::DEFAULT_BANK_ORDER, cfg.sample_rate)?;
            SynthSpec::Generalized {
                profile: prof.clone(),
                bank,
            }
        }
    };
    Ok((synth_spec, prof))
}

/// Written at the end of every run: effective config, digest, output list.
#[derive(Debug, Serialize)]
struct RunMeta {
    command: String,
    effective_config: serde_json::Value,
    config_digest: String,
    outputs: Vec<String>,
}

fn write_meta(
    out_dir: &Path,
    command: &str,
    config: serde_json::Value,
    outputs: &[PathBuf],
) -> Result<PathBuf> {
    let digest = io::digest_json(&config);
    let meta = RunMeta {
        command: command.to_string(),
        effective_config: config,
        config_digest: digest,
        outputs: outputs
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect(),
    };
    let path = out_dir.join("run_meta.json");
    let text = serde_json::to_string_pretty(&meta)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(path)
}

// --- subcommands -------------------------------------------------------------------

pub fn cmd_synth(args: &SynthArgs) -> Result<Vec<PathBuf>> {
    let cfg = resolve_common(&args.common, 1)?;
    let (synth_spec, prof) = resolve_synth(&cfg, args.rt60)?;
    let duration = args
        .duration
        .unwrap_or_else(|| synth::default_duration(synth_spec.alpha_min()));
    let mut outputs = Vec::new();
    let mut seeds = Vec::new();
    for j in 0..cfg.n_samples {
        let seed_j = crate::rng::mix_seed(cfg.seed, j as u64);
        seeds.push(seed_j);
        let h = synth_spec.sample(duration, cfg.sample_rate, seed_j)?;
        let path = cfg.out_dir.join(format!("rir_{j:03}.wav"));
        h.write_wav(&path)?;
        outputs.push(path);
    }
    let config = serde_json::json!({
        "seed": cfg.seed,
        "sample_rate": cfg.sample_rate,
        "n": cfg.n_samples,
        "duration": duration,
        "profile": prof,
        "profile_arg": cfg.profile_arg,
        "rt60": args.rt60,
        "synth": synth_spec.descriptor(),
        "derived_seeds": seeds,
    });
    outputs.push(write_meta(&cfg.out_dir, "synth", config, &outputs)?);
    Ok(outputs)
}

pub fn cmd_fig1(args: &Fig1Args) -> Result<Vec<PathBuf>> {
    let cfg = resolve_common(&args.common, 10_000)?;
    // the scatter experiment defaults to random AR(8) profiles
    let profile_arg = if args.common.profile.is_none() {
        "ar:order=8".to_string()
    } else {
        cfg.profile_arg.clone()
    };
    let cfg = RunConfig {
        profile_arg,
        ..cfg
    };
    let freqs = if args.freqs.is_empty() {
        vec![10.0, 100.0, 1000.0]
    } else {
        args.freqs.clone()
    };
    let (synth_spec, prof) = resolve_synth(&cfg, None)?;
    let spec = EnsembleSpec {
        n_samples: cfg.n_samples,
        master_seed: cfg.seed,
        synth: synth_spec,
        sample_rate: cfg.sample_rate,
        duration: None,
        frequencies: freqs.clone(),
    };
    let by_freq = ensemble::draw_spectra(&spec)?;

    let mut outputs = Vec::new();
    let mut reports = Vec::new();
    for (f, vals) in freqs.iter().zip(by_freq.iter()) {
        if cfg.formats.csv {
            let path = cfg.out_dir.join(format!("scatter_{f:.0}hz.csv"));
            let rows: Vec<Vec<f64>> = vals.iter().map(|z| vec![z.re, z.im]).collect();
            io::write_csv(&path, &["re", "im"], &rows)?;
            outputs.push(path);
        }
        let mut circ = ensemble::circularity_test(vals, 0.01)?;
        circ.f_hz = Some(*f);
        let unif = ensemble::phase_uniformity_test(
            &ensemble::PhaseSample::from_complex(*f, vals),
            0.01,
        )?;
        reports.push(circ);
        reports.push(unif);
    }
    let config = serde_json::json!({
        "seed": cfg.seed,
        "sample_rate": cfg.sample_rate,
        "n": cfg.n_samples,
        "frequencies": freqs,
        "profile": prof,
        "profile_arg": cfg.profile_arg,
    });
    if cfg.formats.json {
        let path = cfg.out_dir.join("summary.json");
        let body = serde_json::json!({
            "tests": reports,
            "config_digest": io::digest_json(&config),
        });
        std::fs::create_dir_all(&cfg.out_dir)
            .map_err(|e| Error::io(cfg.out_dir.display().to_string(), e))?;
        std::fs::write(&path, serde_json::to_string_pretty(&body)?)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        outputs.push(path);
    }
    outputs.push(write_meta(&cfg.out_dir, "fig1", config, &outputs)?);
    Ok(outputs)
}

pub fn cmd_moments(args: &MomentsArgs) -> Result<Vec<PathBuf>> {
    let cfg = resolve_common(&args.common, 20_000)?;
    let freqs = if args.freqs.is_empty() {
        [0.0, 10.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0]
            .iter()
            .copied()
            .filter(|&f| f < 0.49 * cfg.sample_rate)
            .collect()
    } else {
        args.freqs.clone()
    };
    let (synth_spec, prof) = resolve_synth(&cfg, None)?;
    let spec = EnsembleSpec {
        n_samples: cfg.n_samples,
        master_seed: cfg.seed,
        synth: synth_spec,
        sample_rate: cfg.sample_rate,
        duration: None,
        frequencies: freqs.clone(),
    };
    let emp = ensemble::estimate_spectral_moments(&spec)?;
    let conv = DiscretizationConvention::new(cfg.sample_rate)?;

    let mut rows = Vec::new();
    let mut quad_rows = Vec::new();
    for row in &emp {
        let theory = conv.scale_moment(moments::closed_form_sigma(&prof, row.f)?);
        let z = |e: f64, t: f64, se: f64| if se > 0.0 { (e - t) / se } else { 0.0 };
        // the c columns live in estimator coordinates: Cov(Re H, Im H) = -C
        rows.push(vec![
            row.f,
            theory.sigma_plus_sq,
            theory.sigma_minus_sq,
            theory.cov_re_im(),
            row.var_re,
            row.var_im,
            row.cov_re_im,
            z(row.var_re, theory.sigma_plus_sq, row.se_var_re),
            z(row.var_im, theory.sigma_minus_sq, row.se_var_im),
            z(row.cov_re_im, theory.cov_re_im(), row.se_cov),
        ]);
        // quadrature route for the same frequency (continuous units)
        let support = moments::support_for(prof.min_alpha(&[0.0, row.f]), moments::SUPPORT_TAIL);
        let c = moments::TestFunction::cosine(row.f, support);
        let s = moments::TestFunction::sine(row.f, support);
        let qp = moments::scalar_product_variance(&prof, &c);
        let qm = moments::scalar_product_variance(&prof, &s);
        let qc = moments::scalar_product_covariance(&prof, &c, &s);
        let cf = moments::closed_form_sigma(&prof, row.f)?;
        let rel = |a: f64, b: f64| {
            let scale = a.abs().max(b.abs());
            if scale > 0.0 {
                (a - b).abs() / scale
            } else {
                0.0
            }
        };
        quad_rows.push(vec![
            row.f,
            qp,
            qm,
            qc,
            cf.sigma_plus_sq,
            cf.sigma_minus_sq,
            cf.cross_cov,
            rel(qp, cf.sigma_plus_sq)
                .max(rel(qm, cf.sigma_minus_sq))
                .max(rel(qc, cf.cross_cov)),
        ]);
    }

    let mut outputs = Vec::new();
    if cfg.formats.csv {
        let path = cfg.out_dir.join("moments.csv");
        io::write_csv(
            &path,
            &[
                "f_hz", "sp2_theory", "sm2_theory", "c_theory", "sp2_emp", "sm2_emp", "c_emp",
                "z_sp2", "z_sm2", "z_c",
            ],
            &rows,
        )?;
        outputs.push(path);
        let qpath = cfg.out_dir.join("moments_quadrature.csv");
        io::write_csv(
            &qpath,
            &[
                "f_hz",
                "sp2_quad",
                "sm2_quad",
                "c_quad",
                "sp2_closed",
                "sm2_closed",
                "c_closed",
                "max_rel_diff",
            ],
            &quad_rows,
        )?;
        outputs.push(qpath);
        // pure theory table in continuous units
        let theory: Vec<moments::SpectralMoment> = freqs
            .iter()
            .map(|&f| moments::closed_form_sigma(&prof, f))
            .collect::<Result<_>>()?;
        let tpath = cfg.out_dir.join("theory_moments.csv");
        io::write_moment_table(&tpath, &theory)?;
        outputs.push(tpath);
        if cfg.formats.json {
            let tjson = cfg.out_dir.join("theory_moments.json");
            io::write_moment_table_json(&tjson, &theory)?;
            outputs.push(tjson);
        }
    }
    let config = serde_json::json!({
        "seed": cfg.seed,
        "sample_rate": cfg.sample_rate,
        "n": cfg.n_samples,
        "frequencies": freqs,
        "profile": prof,
        "profile_arg": cfg.profile_arg,
    });
    if cfg.formats.json {
        let path = cfg.out_dir.join("moments.json");
        let body = serde_json::json!({
            "empirical": emp,
            "config_digest": io::digest_json(&config),
        });
        std::fs::create_dir_all(&cfg.out_dir)
            .map_err(|e| Error::io(cfg.out_dir.display().to_string(), e))?;
        std::fs::write(&path, serde_json::to_string_pretty(&body)?)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        outputs.push(path);
    }
    outputs.push(write_meta(&cfg.out_dir, "moments", config, &outputs)?);
    Ok(outputs)
}

pub fn cmd_xcorr(args: &XcorrArgs) -> Result<Vec<PathBuf>> {
    let cfg = resolve_common(&args.common, 50_000)?;
    let (synth_spec, prof) = resolve_synth(&cfg, None)?;
    let center = args.center.unwrap_or(500.0);
    let alpha_c = synth_spec.alpha_at(center);
    let unit = alpha_c / std::f64::consts::TAU;
    let xi_scaled = if args.xi_scaled.is_empty() {
        vec![0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0]
    } else {
        args.xi_scaled.clone()
    };
    let spec = EnsembleSpec {
        n_samples: cfg.n_samples,
        master_seed: cfg.seed,
        synth: synth_spec,
        sample_rate: cfg.sample_rate,
        duration: None,
        frequencies: vec![center],
    };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &xs in &xi_scaled {
        let xi = xs * unit;
        let rep = ensemble::cross_bin_correlation(&spec, center, xi)?;
        rows.push(vec![
            xi,
            xs,
            rep.empirical_re,
            rep.empirical_im,
            rep.theoretical_re,
            rep.theoretical_im,
            rep.rel_error,
            rep.empirical().norm(),
            rep.theoretical().norm(),
            rep.standard_error,
        ]);
        reports.push(rep);
    }
    let mut outputs = Vec::new();
    if cfg.formats.csv {
        let path = cfg.out_dir.join("xcorr.csv");
        io::write_csv(
            &path,
            &[
                "xi_hz",
                "xi_over_alpha_2pi",
                "emp_re",
                "emp_im",
                "theory_re",
                "theory_im",
                "rel_error",
                "emp_abs",
                "theory_abs",
                "standard_error",
            ],
            &rows,
        )?;
        outputs.push(path);
    }
    let config = serde_json::json!({
        "seed": cfg.seed,
        "sample_rate": cfg.sample_rate,
        "n": cfg.n_samples,
        "center": center,
        "xi_scaled": xi_scaled,
        "profile": prof,
        "profile_arg": cfg.profile_arg,
    });
    if cfg.formats.json {
        let path = cfg.out_dir.join("xcorr.json");
        let body = serde_json::json!({
            "rows": reports,
            "config_digest": io::digest_json(&config),
        });
        std::fs::create_dir_all(&cfg.out_dir)
            .map_err(|e| Error::io(cfg.out_dir.display().to_string(), e))?;
        std::fs::write(&path, serde_json::to_string_pretty(&body)?)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        outputs.push(path);
    }
    outputs.push(write_meta(&cfg.out_dir, "xcorr", config, &outputs)?);
    Ok(outputs)
}

pub fn cmd_phase_test(args: &PhaseTestArgs) -> Result<Vec<PathBuf>> {
    let cfg = resolve_common(&args.common, 2_000)?;
    let (synth_spec, prof) = resolve_synth(&cfg, None)?;
    let freqs = if args.freqs.is_empty() {
        let lo: f64 = 10.0;
        let hi = 0.4 * cfg.sample_rate;
        (0..12)
            .map(|i| lo * (hi / lo).powf(i as f64 / 11.0))
            .collect()
    } else {
        args.freqs.clone()
    };
    let alpha0 = synth_spec.alpha_at(0.0);
    let f_cut = 10.0 * alpha0 / (4.0 * std::f64::consts::PI);

    let spec = EnsembleSpec {
        n_samples: cfg.n_samples,
        master_seed: cfg.seed,
        synth: synth_spec,
        sample_rate: cfg.sample_rate,
        duration: None,
        frequencies: freqs.clone(),
    };
    let by_freq = ensemble::draw_spectra(&spec)?;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (f, vals) in freqs.iter().zip(by_freq.iter()) {
        let rep = ensemble::phase_uniformity_test(
            &ensemble::PhaseSample::from_complex(*f, vals),
            0.01,
        )?;
        let excluded = *f < f_cut;
        rows.push(vec![
            *f,
            rep.statistic,
            rep.p_value,
            rep.extras.get("rayleigh_p").copied().unwrap_or(1.0),
            rep.n as f64,
            if excluded { 1.0 } else { 0.0 },
            if rep.reject { 1.0 } else { 0.0 },
        ]);
        reports.push((excluded, rep));
    }

    let stft_cfg = StftConfig {
        win_len: args.win,
        hop: args.hop,
        sample_rate: cfg.sample_rate,
        ..StftConfig::default()
    };
    let whiteness = ensemble::stft_phase_whiteness(&spec, &stft_cfg, &WhitenessConfig::default())?;

    let mut outputs = Vec::new();
    if cfg.formats.csv {
        let path = cfg.out_dir.join("phase_tests.csv");
        io::write_csv(
            &path,
            &["f_hz", "ks_d", "ks_p", "rayleigh_p", "n", "excluded", "reject"],
            &rows,
        )?;
        outputs.push(path);
    }
    let config = serde_json::json!({
        "seed": cfg.seed,
        "sample_rate": cfg.sample_rate,
        "n": cfg.n_samples,
        "frequencies": freqs,
        "low_freq_cutoff_hz": f_cut,
        "win": args.win,
        "hop": args.hop,
        "profile": prof,
        "profile_arg": cfg.profile_arg,
    });
    if cfg.formats.json {
        let path = cfg.out_dir.join("phase_tests.json");
        let body = serde_json::json!({
            "uniformity": reports
                .iter()
                .map(|(excluded, rep)| serde_json::json!({
                    "excluded_low_freq": excluded,
                    "report": rep,
                }))
                .collect::<Vec<_>>(),
            "whiteness": whiteness,
            "config_digest": io::digest_json(&config),
        });
        std::fs::create_dir_all(&cfg.out_dir)
            .map_err(|e| Error::io(cfg.out_dir.display().to_string(), e))?;
        std::fs::write(&path, serde_json::to_string_pretty(&body)?)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        outputs.push(path);
    }
    outputs.push(write_meta(&cfg.out_dir, "phase-test", config, &outputs)?);
    Ok(outputs)
}

pub fn cmd_loss_demo(args: &LossDemoArgs) -> Result<Vec<PathBuf>> {
    let cfg = resolve_common(&args.common, 1)?;
    let kind = match args.signal.as_str() {
        "harmonic_chirp" => TestSignalKind::HarmonicChirp,
        "am_tones" => TestSignalKind::AmTones,
        "white" => TestSignalKind::White,
        other => {
            return Err(Error::config(format!("unknown test signal `{other}`")))
        }
    };
    let rt60 = args.rt60.unwrap_or(0.5);
    let alpha = profile::rt60_to_alpha(rt60)?;
    let s = synth::synth_test_signal(kind, args.duration, cfg.sample_rate, cfg.seed)?;
    let h = synth::simple_polack(
        1.0,
        alpha,
        synth::default_duration(alpha),
        cfg.sample_rate,
        crate::rng::mix_seed(cfg.seed, 1),
    )?;
    let stft_cfg = StftConfig {
        sample_rate: cfg.sample_rate,
        ..StftConfig::default()
    };
    let report = loss::phase_substitution_demo(&s, &h, &stft_cfg)?;

    // sensitivity of each loss mode to re-randomized phase of the dry signal
    let s_spec = crate::spectral::stft(&s.samples, &stft_cfg)?;
    let mut sensitivity = BTreeMap::new();
    for mode in LossMode::ALL {
        let stats = loss::loss_phase_sensitivity(
            &s_spec,
            mode,
            args.trials,
            crate::rng::mix_seed(cfg.seed, 2),
        )?;
        sensitivity.insert(mode.label().to_string(), stats);
    }

    let config = serde_json::json!({
        "seed": cfg.seed,
        "sample_rate": cfg.sample_rate,
        "signal": args.signal,
        "duration": args.duration,
        "rt60": rt60,
        "trials": args.trials,
    });
    let mut outputs = Vec::new();
    if cfg.formats.json {
        let path = cfg.out_dir.join("loss_report.json");
        let body = serde_json::json!({
            "demo": report,
            "sensitivity": sensitivity,
            "config_digest": io::digest_json(&config),
        });
        std::fs::create_dir_all(&cfg.out_dir)
            .map_err(|e| Error::io(cfg.out_dir.display().to_string(), e))?;
        std::fs::write(&path, serde_json::to_string_pretty(&body)?)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        outputs.push(path);
    }
    if cfg.formats.wav {
        let y = synth::convolve(&s, &h)?;
        let s_stft = crate::spectral::stft(&s.samples, &stft_cfg)?;
        let y_trim = synth::Signal {
            samples: y.samples[..s.samples.len()].to_vec(),
            sample_rate: y.sample_rate,
        };
        let y_stft = crate::spectral::stft(&y_trim.samples, &stft_cfg)?;
        let wet = s_stft.with_phases_of(&y_stft)?;
        let s_wet = synth::Signal {
            samples: crate::spectral::istft(&wet)?,
            sample_rate: cfg.sample_rate,
        };
        for (name, sig) in [("dry.wav", &s), ("wet.wav", &y), ("dry_mag_wet_phase.wav", &s_wet)]
        {
            let path = cfg.out_dir.join(name);
            sig.write_wav(&path)?;
            outputs.push(path);
        }
    }
    outputs.push(write_meta(&cfg.out_dir, "loss-demo", config, &outputs)?);
    Ok(outputs)
}

/// Entry point used by the binary: parse, run, report, exit code.
pub fn run() -> i32 {
    let cli = CliArgs::parse();
    let result = match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Fig1(a) => cmd_fig1(a),
        Command::Moments(a) => cmd_moments(a),
        Command::Xcorr(a) => cmd_xcorr(a),
        Command::PhaseTest(a) => cmd_phase_test(a),
        Command::LossDemo(a) => cmd_loss_demo(a),
    };
    match result {
        Ok(outputs) => {
            for p in outputs {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            let msg = serde_json::json!({ "error": e.to_string() });
            eprintln!("{msg}");
            1
        }
    }
}
