//! Frequency-dependent reverberation parameters.
//!
//! A [`FrequencyProfile`] carries the decay rate `alpha(f)` [1/s] and the
//! magnitude density `b(f)` (dimensionless squared amplitude of the discrete
//! model; see [`crate::moments::DiscretizationConvention`]) as symmetric
//! positive functions of frequency, defined on `[-nyquist, nyquist]`.
//! Profiles are either constant, tabulated with linear interpolation, or
//! random autoregressive spectra with poles drawn inside the unit disk.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::rng;

/// Decay rate [1/s] for a given reverberation time RT60 [s]:
/// `alpha = 6 ln(10) / rt60`.
pub fn rt60_to_alpha(rt60: f64) -> Result<f64> {
    if !(rt60 > 0.0) || !rt60.is_finite() {
        return Err(Error::domain(format!(
            "rt60 must be positive and finite, got {rt60}"
        )));
    }
    Ok(6.0 * std::f64::consts::LN_10 / rt60)
}

/// Reverberation time RT60 [s] for a given decay rate [1/s].
pub fn alpha_to_rt60(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    Ok(6.0 * std::f64::consts::LN_10 / alpha)
}

/// Specification for drawing random autoregressive parameter profiles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArProfileSpec {
    /// AR order (number of poles). Order 0 degenerates to a flat spectrum.
    pub order: usize,
    /// Poles are drawn uniformly in the disk of this radius (must be in (0,1)).
    pub pole_radius_max: f64,
    /// Mean of `alpha(f)` over `[0, nyquist]` after rescaling [1/s].
    pub target_mean_alpha: f64,
    /// Mean of `b(f)` over `[0, nyquist]` after rescaling.
    pub target_mean_b: f64,
    pub seed: u64,
}

impl ArProfileSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.pole_radius_max > 0.0 && self.pole_radius_max < 1.0) {
            return Err(Error::domain(format!(
                "pole_radius_max must be in (0,1), got {}",
                self.pole_radius_max
            )));
        }
        if !(self.target_mean_alpha > 0.0) {
            return Err(Error::domain("target_mean_alpha must be positive"));
        }
        if !(self.target_mean_b >= 0.0) {
            return Err(Error::domain("target_mean_b must be nonnegative"));
        }
        Ok(())
    }
}

/// All-pole power spectrum `scale / |A(e^{i pi f / nyquist})|^2` with real
/// polynomial coefficients derived from a conjugate-closed pole set.
#[derive(Debug, Clone)]
pub struct ArSpectrum {
    poles: Vec<Complex64>,
    scale: f64,
    coeffs: Vec<f64>,
}

impl ArSpectrum {
    /// Build from poles; coefficients are formed from exact real quadratic
    /// factors so the spectrum is real and even by construction.
    pub fn from_poles(poles: Vec<Complex64>, scale: f64) -> Result<Self> {
        for p in &poles {
            if p.norm() >= 1.0 {
                return Err(Error::domain(format!("AR pole {p} outside the unit disk")));
            }
        }
        let coeffs = real_coeffs_from_poles(&poles);
        Ok(ArSpectrum {
            poles,
            scale,
            coeffs,
        })
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Spectrum value at normalized angle `omega` in [0, pi].
    fn eval_omega(&self, omega: f64) -> f64 {
        let z = Complex64::from_polar(1.0, -omega);
        // Horner evaluation of A(z^{-1}) = sum coeffs[k] z^{-k}
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        self.scale / acc.norm_sqr()
    }
}

/// Expand `prod (1 - p z^-1)` into real coefficients, pairing each strictly
/// complex pole with its conjugate as one exact real quadratic.
fn real_coeffs_from_poles(poles: &[Complex64]) -> Vec<f64> {
    let mut coeffs = vec![1.0];
    let mut used = vec![false; poles.len()];
    let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    for (i, p) in poles.iter().enumerate() {
        if used[i] {
            continue;
        }
        used[i] = true;
        if p.im == 0.0 {
            coeffs = mul(&coeffs, &[1.0, -p.re]);
        } else {
            // find the stored conjugate partner, if any
            let partner = poles
                .iter()
                .enumerate()
                .position(|(j, q)| !used[j] && j != i && q.re == p.re && q.im == -p.im);
            let quad = [1.0, -2.0 * p.re, p.norm_sqr()];
            coeffs = mul(&coeffs, &quad);
            if let Some(j) = partner {
                used[j] = true;
            }
        }
    }
    coeffs
}

#[derive(Debug, Clone)]
enum ProfileShape {
    Constant {
        alpha: f64,
        b: f64,
    },
    Tabulated {
        /// (frequency [Hz], value) knots, ascending in frequency.
        alpha_knots: Vec<(f64, f64)>,
        b_knots: Vec<(f64, f64)>,
    },
    Ar {
        alpha: ArSpectrum,
        b: ArSpectrum,
    },
}

/// The pair `(alpha(f), b(f))` on `[-nyquist, nyquist]`.
///
/// Both maps are even functions (evaluation goes through `|f|`, so the
/// symmetry is bit-exact), `alpha > 0` and `b >= 0` everywhere.
#[derive(Debug, Clone)]
pub struct FrequencyProfile {
    shape: ProfileShape,
    nyquist: f64,
}

impl FrequencyProfile {
    pub fn constant(alpha: f64, b: f64, nyquist: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::domain(format!("b must be nonnegative, got {b}")));
        }
        check_nyquist(nyquist)?;
        Ok(FrequencyProfile {
            shape: ProfileShape::Constant { alpha, b },
            nyquist,
        })
    }

    /// Piecewise-linear profile. Knots must be ascending in `[0, nyquist]`;
    /// evaluation clamps to the nearest knot outside the knot range.
    pub fn tabulated(
        alpha_knots: Vec<(f64, f64)>,
        b_knots: Vec<(f64, f64)>,
        nyquist: f64,
    ) -> Result<Self> {
        check_nyquist(nyquist)?;
        check_knots(&alpha_knots, nyquist, "alpha", true)?;
        check_knots(&b_knots, nyquist, "b", false)?;
        Ok(FrequencyProfile {
            shape: ProfileShape::Tabulated {
                alpha_knots,
                b_knots,
            },
            nyquist,
        })
    }

    pub fn from_ar_spectra(alpha: ArSpectrum, b: ArSpectrum, nyquist: f64) -> Result<Self> {
        check_nyquist(nyquist)?;
        if alpha.scale <= 0.0 {
            return Err(Error::domain("alpha AR scale must be positive"));
        }
        if b.scale < 0.0 {
            return Err(Error::domain("b AR scale must be nonnegative"));
        }
        Ok(FrequencyProfile {
            shape: ProfileShape::Ar { alpha, b },
            nyquist,
        })
    }

    pub fn nyquist(&self) -> f64 {
        self.nyquist
    }

    /// `(alpha(f), b(f))`; errors if `|f| > nyquist`.
    pub fn eval(&self, f: f64) -> Result<(f64, f64)> {
        if !f.is_finite() || f.abs() > self.nyquist {
            return Err(Error::domain(format!(
                "frequency {f} outside [-{0}, {0}]",
                self.nyquist
            )));
        }
        let fa = f.abs();
        Ok(match &self.shape {
            ProfileShape::Constant { alpha, b } => (*alpha, *b),
            ProfileShape::Tabulated {
                alpha_knots,
                b_knots,
            } => (interp_clamped(alpha_knots, fa), interp_clamped(b_knots, fa)),
            ProfileShape::Ar { alpha, b } => {
                let omega = std::f64::consts::PI * fa / self.nyquist;
                (alpha.eval_omega(omega), b.eval_omega(omega))
            }
        })
    }

    pub fn alpha(&self, f: f64) -> Result<f64> {
        Ok(self.eval(f)?.0)
    }

    pub fn b(&self, f: f64) -> Result<f64> {
        Ok(self.eval(f)?.1)
    }

    /// Minimum of `alpha` over the given frequencies (used to size RIR
    /// durations). Frequencies outside the band are clamped.
    pub fn min_alpha(&self, freqs: &[f64]) -> f64 {
        freqs
            .iter()
            .map(|&f| {
                let fc = f.clamp(-self.nyquist, self.nyquist);
                self.eval(fc).expect("clamped frequency is in band").0
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Frequencies where the profile has structure; quadrature seeds panels here.
    pub fn feature_frequencies(&self) -> Vec<f64> {
        match &self.shape {
            ProfileShape::Constant { .. } => Vec::new(),
            ProfileShape::Tabulated {
                alpha_knots,
                b_knots,
            } => alpha_knots
                .iter()
                .chain(b_knots.iter())
                .map(|&(f, _)| f)
                .collect(),
            ProfileShape::Ar { alpha, b } => alpha
                .poles
                .iter()
                .chain(b.poles.iter())
                .filter(|p| p.im >= 0.0)
                .map(|p| p.arg().abs() / std::f64::consts::PI * self.nyquist)
                .collect(),
        }
    }

    /// Short human-readable description for output metadata.
    pub fn describe(&self) -> String {
        match &self.shape {
            ProfileShape::Constant { alpha, b } => {
                format!("constant alpha={alpha} b={b} nyquist={}", self.nyquist)
            }
            ProfileShape::Tabulated { alpha_knots, .. } => format!(
                "tabulated {} knots nyquist={}",
                alpha_knots.len(),
                self.nyquist
            ),
            ProfileShape::Ar { alpha, b } => format!(
                "ar order_alpha={} order_b={} nyquist={}",
                alpha.poles.len(),
                b.poles.len(),
                self.nyquist
            ),
        }
    }
}

fn check_nyquist(nyquist: f64) -> Result<()> {
    if !(nyquist > 0.0) || !nyquist.is_finite() {
        return Err(Error::domain(format!(
            "nyquist must be positive, got {nyquist}"
        )));
    }
    Ok(())
}

fn check_knots(knots: &[(f64, f64)], nyquist: f64, name: &str, strictly_positive: bool) -> Result<()> {
    if knots.is_empty() {
        return Err(Error::domain(format!("{name} knot list is empty")));
    }
    for pair in knots.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::domain(format!("{name} knots must ascend in frequency")));
        }
    }
    for &(f, v) in knots {
        if f < 0.0 || f > nyquist {
            return Err(Error::domain(format!(
                "{name} knot frequency {f} outside [0, {nyquist}]"
            )));
        }
        let ok = if strictly_positive { v > 0.0 } else { v >= 0.0 };
        if !ok || !v.is_finite() {
            return Err(Error::domain(format!("invalid {name} knot value {v}")));
        }
    }
    Ok(())
}

fn interp_clamped(knots: &[(f64, f64)], f: f64) -> f64 {
    if f <= knots[0].0 {
        return knots[0].1;
    }
    if f >= knots[knots.len() - 1].0 {
        return knots[knots.len() - 1].1;
    }
    let idx = knots.partition_point(|&(kf, _)| kf <= f);
    let (f0, v0) = knots[idx - 1];
    let (f1, v1) = knots[idx];
    v0 + (v1 - v0) * (f - f0) / (f1 - f0)
}

/// Draw a random AR profile: poles uniform in the disk (conjugate-closed),
/// each spectrum rescaled so its mean over `[0, nyquist]` hits the target.
pub fn sample_ar_profile(spec: &ArProfileSpec, nyquist: f64) -> Result<FrequencyProfile> {
    spec.validate()?;
    check_nyquist(nyquist)?;
    let alpha = sample_ar_spectrum(spec, nyquist, 0, spec.target_mean_alpha)?;
    let b = sample_ar_spectrum(spec, nyquist, 1, spec.target_mean_b)?;
    FrequencyProfile::from_ar_spectra(alpha, b, nyquist)
}

fn sample_ar_spectrum(
    spec: &ArProfileSpec,
    nyquist: f64,
    stream: u64,
    target_mean: f64,
) -> Result<ArSpectrum> {
    let mut rng = rng::rng_for(spec.seed, stream);
    let mut poles = Vec::with_capacity(spec.order);
    let pairs = spec.order / 2;
    for _ in 0..pairs {
        // area-uniform draw in the upper half disk, then close under conjugation
        let r = spec.pole_radius_max * rng.gen::<f64>().sqrt();
        let theta = std::f64::consts::PI * rng.gen::<f64>();
        let p = Complex64::from_polar(r, theta);
        poles.push(p);
        poles.push(p.conj());
    }
    if spec.order % 2 == 1 {
        let x = spec.pole_radius_max * (2.0 * rng.gen::<f64>() - 1.0);
        poles.push(Complex64::new(x, 0.0));
    }
    let unscaled = ArSpectrum::from_poles(poles, 1.0)?;
    let mean = ar_band_mean(&unscaled, nyquist);
    let scale = if target_mean == 0.0 {
        0.0
    } else {
        target_mean / mean
    };
    ArSpectrum::from_poles(unscaled.poles.clone(), scale)
}

/// Mean of the spectrum over `[0, nyquist]`, by the same panel quadrature the
/// moment computations use.
pub fn ar_band_mean(spectrum: &ArSpectrum, nyquist: f64) -> f64 {
    let features: Vec<f64> = spectrum
        .poles
        .iter()
        .filter(|p| p.im >= 0.0)
        .map(|p| p.arg().abs() / std::f64::consts::PI * nyquist)
        .collect();
    let w0 = spectrum
        .poles
        .iter()
        .map(|p| (1.0 - p.norm()) / std::f64::consts::PI * nyquist)
        .fold(nyquist / 64.0, f64::min)
        .max(1e-9 * nyquist);
    let pts = quad::feature_breakpoints(0.0, nyquist, &features, w0 / 4.0);
    let integral = quad::integrate_refining_real(
        &|f| spectrum.eval_omega(std::f64::consts::PI * f / nyquist),
        &pts,
        1e-10,
        24,
    );
    integral / nyquist
}

// --- serialization -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ArDto {
    poles: Vec<(f64, f64)>,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ProfileDto {
    Constant {
        alpha: f64,
        b: f64,
        nyquist_hz: f64,
    },
    Tabulated {
        alpha: Vec<(f64, f64)>,
        b: Vec<(f64, f64)>,
        nyquist_hz: f64,
    },
    Ar {
        alpha: ArDto,
        b: ArDto,
        nyquist_hz: f64,
    },
}

impl Serialize for FrequencyProfile {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = match &self.shape {
            ProfileShape::Constant { alpha, b } => ProfileDto::Constant {
                alpha: *alpha,
                b: *b,
                nyquist_hz: self.nyquist,
            },
            ProfileShape::Tabulated {
                alpha_knots,
                b_knots,
            } => ProfileDto::Tabulated {
                alpha: alpha_knots.clone(),
                b: b_knots.clone(),
                nyquist_hz: self.nyquist,
            },
            ProfileShape::Ar { alpha, b } => ProfileDto::Ar {
                alpha: ArDto {
                    poles: alpha.poles.iter().map(|p| (p.re, p.im)).collect(),
                    scale: alpha.scale,
                },
                b: ArDto {
                    poles: b.poles.iter().map(|p| (p.re, p.im)).collect(),
                    scale: b.scale,
                },
                nyquist_hz: self.nyquist,
            },
        };
        dto.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FrequencyProfile {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let dto = ProfileDto::deserialize(deserializer)?;
        let built = match dto {
            ProfileDto::Constant {
                alpha,
                b,
                nyquist_hz,
            } => FrequencyProfile::constant(alpha, b, nyquist_hz),
            ProfileDto::Tabulated {
                alpha,
                b,
                nyquist_hz,
            } => FrequencyProfile::tabulated(alpha, b, nyquist_hz),
            ProfileDto::Ar {
                alpha,
                b,
                nyquist_hz,
            } => (|| {
                let a = ArSpectrum::from_poles(
                    alpha.poles.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
                    alpha.scale,
                )?;
                let bb = ArSpectrum::from_poles(
                    b.poles.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
                    b.scale,
                )?;
                FrequencyProfile::from_ar_spectra(a, bb, nyquist_hz)
            })(),
        };
        built.map_err(DeError::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rt60_alpha_known_values() {
        // 6 ln 10 and 6 ln 10 / 0.082, high-precision reference values
        assert!((rt60_to_alpha(1.0).unwrap() - 13.815510557964274).abs() < 1e-12);
        assert!((rt60_to_alpha(0.082).unwrap() - 168.48183607273505).abs() < 1e-10);
        assert!((alpha_to_rt60(13.815510557964274).unwrap() - 1.0).abs() < 1e-12);
        assert!((alpha_to_rt60(168.48183607273505).unwrap() - 0.082).abs() < 1e-12);
    }

    #[test]
    fn rt60_alpha_round_trip_and_monotonicity() {
        for &rt in &[0.05, 0.3, 1.0, 4.0, 1e6] {
            let a = rt60_to_alpha(rt).unwrap();
            let back = alpha_to_rt60(a).unwrap();
            assert!((back - rt).abs() <= 1e-12 * rt);
        }
        // alpha decreases as rt60 grows
        assert!(rt60_to_alpha(10.0).unwrap() < rt60_to_alpha(1.0).unwrap());
        assert!(rt60_to_alpha(1e9).unwrap() < 1e-7);
    }

    #[test]
    fn rt60_alpha_reject_nonpositive() {
        assert!(rt60_to_alpha(0.0).is_err());
        assert!(rt60_to_alpha(-1.0).is_err());
        assert!(alpha_to_rt60(0.0).is_err());
        assert!(alpha_to_rt60(f64::NAN).is_err());
    }

    #[test]
    fn constant_profile_eval() {
        let p = FrequencyProfile::constant(20.0, 1.5, 4000.0).unwrap();
        assert_eq!(p.eval(123.4).unwrap(), (20.0, 1.5));
        assert_eq!(p.eval(-4000.0).unwrap(), (20.0, 1.5));
        assert!(p.eval(4000.1).is_err());
    }

    #[test]
    fn tabulated_midpoint_and_clamp() {
        let p = FrequencyProfile::tabulated(
            vec![(0.0, 10.0), (4000.0, 30.0)],
            vec![(100.0, 1.0), (200.0, 3.0)],
            4000.0,
        )
        .unwrap();
        let (a, b) = p.eval(2000.0).unwrap();
        assert!((a - 20.0).abs() < 1e-12);
        // clamp below and above the b knot range
        assert_eq!(b, 3.0);
        assert_eq!(p.eval(50.0).unwrap().1, 1.0);
        assert_eq!(p.eval(150.0).unwrap().1, 2.0);
    }

    #[test]
    fn eval_is_symmetric_bit_exact() {
        let spec = ArProfileSpec {
            order: 8,
            pole_radius_max: 0.95,
            target_mean_alpha: 168.5,
            target_mean_b: 0.0029,
            seed: 7,
        };
        let p = sample_ar_profile(&spec, 8000.0).unwrap();
        for i in 0..200 {
            let f = i as f64 * 40.0;
            let (a1, b1) = p.eval(f).unwrap();
            let (a2, b2) = p.eval(-f).unwrap();
            assert!(a1.to_bits() == a2.to_bits() && b1.to_bits() == b2.to_bits());
            assert!(a1 > 0.0 && b1 >= 0.0);
        }
    }

    #[test]
    fn ar_profile_determinism() {
        let spec = ArProfileSpec {
            order: 8,
            pole_radius_max: 0.95,
            target_mean_alpha: 100.0,
            target_mean_b: 1.0,
            seed: 31,
        };
        let p1 = sample_ar_profile(&spec, 4000.0).unwrap();
        let p2 = sample_ar_profile(&spec, 4000.0).unwrap();
        match (&p1.shape, &p2.shape) {
            (ProfileShape::Ar { alpha: a1, b: b1 }, ProfileShape::Ar { alpha: a2, b: b2 }) => {
                assert_eq!(a1.poles, a2.poles);
                assert_eq!(b1.poles, b2.poles);
                assert_eq!(a1.scale.to_bits(), a2.scale.to_bits());
                assert_eq!(b1.scale.to_bits(), b2.scale.to_bits());
            }
            _ => panic!("expected AR profiles"),
        }
    }

    #[test]
    fn ar_order_zero_is_flat() {
        let spec = ArProfileSpec {
            order: 0,
            pole_radius_max: 0.5,
            target_mean_alpha: 42.0,
            target_mean_b: 0.5,
            seed: 1,
        };
        let p = sample_ar_profile(&spec, 1000.0).unwrap();
        let flat = FrequencyProfile::constant(42.0, 0.5, 1000.0).unwrap();
        for i in 0..=50 {
            let f = i as f64 * 20.0;
            let (a, b) = p.eval(f).unwrap();
            let (fa, fb) = flat.eval(f).unwrap();
            assert!((a - fa).abs() <= 1e-12 * fa);
            assert!((b - fb).abs() <= 1e-12 * fb);
        }
    }

    #[test]
    fn ar_mean_hits_target() {
        for seed in [3u64, 11, 12345] {
            let spec = ArProfileSpec {
                order: 8,
                pole_radius_max: 0.95,
                target_mean_alpha: 168.48183607273505,
                target_mean_b: 0.0029,
                seed,
            };
            let p = sample_ar_profile(&spec, 8000.0).unwrap();
            match &p.shape {
                ProfileShape::Ar { alpha, b } => {
                    let ma = ar_band_mean(alpha, 8000.0);
                    let mb = ar_band_mean(b, 8000.0);
                    assert!(
                        (ma - spec.target_mean_alpha).abs() < 1e-3 * spec.target_mean_alpha,
                        "seed {seed}: mean alpha {ma}"
                    );
                    assert!((mb - spec.target_mean_b).abs() < 1e-3 * spec.target_mean_b);
                }
                _ => panic!("expected AR profile"),
            }
        }
    }

    #[test]
    fn serialization_round_trips_bit_exact() {
        let spec = ArProfileSpec {
            order: 8,
            pole_radius_max: 0.95,
            target_mean_alpha: 168.5,
            target_mean_b: 0.0029,
            seed: 99,
        };
        for p in [
            sample_ar_profile(&spec, 8000.0).unwrap(),
            FrequencyProfile::constant(27.631021115928548, 1.0, 4000.0).unwrap(),
            FrequencyProfile::tabulated(
                vec![(0.0, 5.0), (1000.0, 9.0)],
                vec![(0.0, 0.25), (1000.0, 1.0)],
                1000.0,
            )
            .unwrap(),
        ] {
            let json = serde_json::to_string(&p).unwrap();
            let q: FrequencyProfile = serde_json::from_str(&json).unwrap();
            for i in 0..100 {
                let f = i as f64 * 9.99;
                let (a1, b1) = p.eval(f).unwrap();
                let (a2, b2) = q.eval(f).unwrap();
                assert_eq!(a1.to_bits(), a2.to_bits());
                assert_eq!(b1.to_bits(), b2.to_bits());
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(FrequencyProfile::constant(0.0, 1.0, 1000.0).is_err());
        assert!(FrequencyProfile::constant(1.0, -0.1, 1000.0).is_err());
        let bad = ArProfileSpec {
            order: 4,
            pole_radius_max: 1.0,
            target_mean_alpha: 1.0,
            target_mean_b: 1.0,
            seed: 0,
        };
        assert!(sample_ar_profile(&bad, 1000.0).is_err());
    }
}
