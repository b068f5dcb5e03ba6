//! Deterministic DSP substrate: FFT, single-frequency transforms, STFT/ISTFT,
//! and Butterworth IIR filtering.
//!
//! Conventions:
//! - forward FFT is unnormalized, `X[k] = sum_n x[n] e^{-2 pi i k n / N}`;
//!   the inverse carries the `1/N`, so `ifft(fft(x)) == x`;
//! - the single-frequency transform [`goertzel_at`] is `dt`-scaled,
//!   `H(f) = dt * sum_n x[n] e^{-2 pi i f n dt}`, the discrete stand-in for
//!   the continuous Fourier integral used by the moment theory.

use num_complex::Complex64;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// --- FFT ----------------------------------------------------------------------

pub fn fft(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex<f64>> = input.iter().map(|c| Complex::new(c.re, c.im)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.into_iter().map(|c| Complex64::new(c.re, c.im)).collect()
}

pub fn ifft(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    let mut buf: Vec<Complex<f64>> = input.iter().map(|c| Complex::new(c.re, c.im)).collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.into_iter()
        .map(|c| Complex64::new(c.re * scale, c.im * scale))
        .collect()
}

pub fn fft_real(input: &[f64]) -> Vec<Complex64> {
    let buf: Vec<Complex64> = input.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft(&buf)
}

// --- single-frequency transform -------------------------------------------------

/// `dt * sum_n x[n] e^{-2 pi i f n dt}` by the Goertzel recurrence, for any
/// `|f| <= fs/2` (no FFT grid alignment required).
pub fn goertzel_at(samples: &[f64], sample_rate: f64, f: f64) -> Result<Complex64> {
    if !(sample_rate > 0.0) {
        return Err(Error::domain(format!("sample rate must be positive, got {sample_rate}")));
    }
    if !f.is_finite() || f.abs() > sample_rate / 2.0 {
        return Err(Error::domain(format!(
            "frequency {f} outside [-fs/2, fs/2] = [{}, {}]",
            -sample_rate / 2.0,
            sample_rate / 2.0
        )));
    }
    let n = samples.len();
    if n == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let omega = 2.0 * std::f64::consts::PI * f / sample_rate;
    let coeff = 2.0 * omega.cos();
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for &x in samples {
        let s0 = x + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    // s1 - e^{-i w} s2 = e^{i w (n-1)} sum_k x[k] e^{-i w k}
    let y = Complex64::new(s1, 0.0) - Complex64::from_polar(1.0, -omega) * s2;
    let sum = y * Complex64::from_polar(1.0, -omega * (n as f64 - 1.0));
    Ok(sum / sample_rate)
}

// --- STFT -----------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowKind {
    Hann,
}

/// Analysis/synthesis configuration for the STFT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftConfig {
    pub window: WindowKind,
    pub win_len: usize,
    pub hop: usize,
    pub sample_rate: f64,
    /// Pad `win_len/2` zeros on both sides so every input sample is fully
    /// covered by the window stack (exact round trip everywhere).
    pub center: bool,
}

impl StftConfig {
    pub fn new(win_len: usize, hop: usize, sample_rate: f64) -> Result<Self> {
        let cfg = StftConfig {
            window: WindowKind::Hann,
            win_len,
            hop,
            sample_rate,
            center: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.win_len == 0 || self.hop == 0 || self.hop > self.win_len {
            return Err(Error::config(format!(
                "need 0 < hop <= win_len, got hop={} win_len={}",
                self.hop, self.win_len
            )));
        }
        if !(self.sample_rate > 0.0) {
            return Err(Error::config("sample rate must be positive"));
        }
        Ok(())
    }

    /// Steady-state check that the squared-window overlap-add stack has no
    /// gaps; required before inverting.
    pub fn validate_for_istft(&self) -> Result<()> {
        self.validate()?;
        let w = window(self.window, self.win_len);
        // steady-state stack value at phase j in [0, hop):
        // sum of w^2 over all window positions hitting that phase
        let mut stack = vec![0.0; self.hop];
        for (i, &wv) in w.iter().enumerate() {
            stack[i % self.hop] += wv * wv;
        }
        let max = stack.iter().cloned().fold(0.0, f64::max);
        let min = stack.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= 1e-8 * max {
            return Err(Error::config(format!(
                "window/hop pair violates the overlap-add condition (min/max stack ratio {:.3e})",
                min / max
            )));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.win_len / 2 + 1
    }

    /// Frequency of bin `k` in Hz.
    pub fn bin_hz(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate / self.win_len as f64
    }

    /// Hop duration in seconds.
    pub fn hop_secs(&self) -> f64 {
        self.hop as f64 / self.sample_rate
    }
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            window: WindowKind::Hann,
            win_len: 1024,
            hop: 256,
            sample_rate: 16000.0,
            center: true,
        }
    }
}

/// Periodic window of the given kind.
pub fn window(kind: WindowKind, n: usize) -> Vec<f64> {
    match kind {
        WindowKind::Hann => (0..n)
            .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
            .collect(),
    }
}

/// Complex time-frequency matrix, `n_frames x n_bins`, one-sided bins.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    data: Vec<Complex64>,
    n_frames: usize,
    n_bins: usize,
    pub config: StftConfig,
    /// Original signal length, kept so the inverse restores it exactly.
    pub signal_len: usize,
}

impl Spectrogram {
    pub fn from_data(
        data: Vec<Complex64>,
        n_frames: usize,
        n_bins: usize,
        config: StftConfig,
        signal_len: usize,
    ) -> Result<Self> {
        if data.len() != n_frames * n_bins {
            return Err(Error::config(format!(
                "spectrogram data length {} does not match {n_frames} x {n_bins}",
                data.len()
            )));
        }
        if n_bins != config.n_bins() {
            return Err(Error::config(format!(
                "expected {} bins for window length {}, got {n_bins}",
                config.n_bins(),
                config.win_len
            )));
        }
        Ok(Spectrogram {
            data,
            n_frames,
            n_bins,
            config,
            signal_len,
        })
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn get(&self, frame: usize, bin: usize) -> Complex64 {
        self.data[frame * self.n_bins + bin]
    }

    pub fn set(&mut self, frame: usize, bin: usize, v: Complex64) {
        self.data[frame * self.n_bins + bin] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn same_shape(&self, other: &Spectrogram) -> bool {
        self.n_frames == other.n_frames && self.n_bins == other.n_bins
    }

    /// New spectrogram with this one's magnitudes and `phases`'s angles.
    pub fn with_phases_of(&self, phases: &Spectrogram) -> Result<Spectrogram> {
        if !self.same_shape(phases) {
            return Err(Error::config("spectrogram shape mismatch"));
        }
        let data = self
            .data
            .iter()
            .zip(phases.data.iter())
            .map(|(m, p)| Complex64::from_polar(m.norm(), p.arg()))
            .collect();
        Ok(Spectrogram {
            data,
            n_frames: self.n_frames,
            n_bins: self.n_bins,
            config: self.config,
            signal_len: self.signal_len,
        })
    }
}

/// Short-time Fourier transform of a real signal.
pub fn stft(samples: &[f64], config: &StftConfig) -> Result<Spectrogram> {
    config.validate()?;
    let n = config.win_len;
    let hop = config.hop;
    let w = window(config.window, n);

    let pad = if config.center { n / 2 } else { 0 };
    let padded_len = samples.len() + 2 * pad;
    let n_frames = if padded_len >= n {
        (padded_len - n) / hop + 1
    } else {
        1
    };

    let n_bins = config.n_bins();
    let mut data = vec![Complex64::new(0.0, 0.0); n_frames * n_bins];
    let mut planner = FftPlanner::new();
    let plan = planner.plan_fft_forward(n);
    let mut buf = vec![Complex::new(0.0, 0.0); n];

    let sample_at = |idx: isize| -> f64 {
        let src = idx - pad as isize;
        if src < 0 || src >= samples.len() as isize {
            0.0
        } else {
            samples[src as usize]
        }
    };

    for frame in 0..n_frames {
        let start = (frame * hop) as isize;
        for i in 0..n {
            buf[i] = Complex::new(sample_at(start + i as isize) * w[i], 0.0);
        }
        plan.process(&mut buf);
        for k in 0..n_bins {
            data[frame * n_bins + k] = Complex64::new(buf[k].re, buf[k].im);
        }
    }

    Spectrogram::from_data(data, n_frames, n_bins, *config, samples.len())
}

/// Inverse STFT by squared-window-normalized overlap-add.
pub fn istft(spec: &Spectrogram) -> Result<Vec<f64>> {
    let config = &spec.config;
    config.validate_for_istft()?;
    let n = config.win_len;
    let hop = config.hop;
    let w = window(config.window, n);
    let n_bins = spec.n_bins;

    let pad = if config.center { n / 2 } else { 0 };
    let out_len = (spec.n_frames - 1) * hop + n;
    let mut num = vec![0.0f64; out_len];
    let mut den = vec![0.0f64; out_len];

    let mut planner = FftPlanner::new();
    let plan = planner.plan_fft_inverse(n);
    let mut buf = vec![Complex::new(0.0, 0.0); n];

    for frame in 0..spec.n_frames {
        // rebuild the hermitian-symmetric spectrum
        for k in 0..n_bins {
            let v = spec.get(frame, k);
            buf[k] = Complex::new(v.re, v.im);
        }
        for k in n_bins..n {
            let v = spec.get(frame, n - k);
            buf[k] = Complex::new(v.re, -v.im);
        }
        plan.process(&mut buf);
        let start = frame * hop;
        let scale = 1.0 / n as f64;
        for i in 0..n {
            num[start + i] += buf[i].re * scale * w[i];
            den[start + i] += w[i] * w[i];
        }
    }

    let mut out = Vec::with_capacity(spec.signal_len);
    for i in 0..spec.signal_len {
        let idx = i + pad;
        if idx < out_len && den[idx] > 1e-12 {
            out.push(num[idx] / den[idx]);
        } else {
            out.push(0.0);
        }
    }
    Ok(out)
}

// --- Butterworth IIR ------------------------------------------------------------

/// Filter band shape with edge frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BandKind {
    Lowpass(f64),
    Highpass(f64),
    Bandpass(f64, f64),
}

#[derive(Debug, Clone, Copy)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

/// Cascade of second-order sections with a scalar gain.
#[derive(Debug, Clone)]
pub struct Sos {
    pub sections: Vec<Biquad>,
    pub gain: f64,
}

impl Sos {
    /// Filter a signal (zero initial state), direct form II transposed.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = x.to_vec();
        for s in &self.sections {
            let mut z1 = 0.0;
            let mut z2 = 0.0;
            for v in y.iter_mut() {
                let xin = *v;
                let yout = s.b0 * xin + z1;
                z1 = s.b1 * xin - s.a1 * yout + z2;
                z2 = s.b2 * xin - s.a2 * yout;
                *v = yout;
            }
        }
        for v in y.iter_mut() {
            *v *= self.gain;
        }
        y
    }

    /// Largest pole magnitude of the cascade.
    pub fn max_pole_radius(&self) -> f64 {
        let mut r: f64 = 0.0;
        for s in &self.sections {
            let disc = s.a1 * s.a1 - 4.0 * s.a2;
            if disc < 0.0 {
                r = r.max(s.a2.max(0.0).sqrt());
            } else {
                let sq = disc.sqrt();
                r = r.max(((-s.a1 + sq) * 0.5).abs());
                r = r.max(((-s.a1 - sq) * 0.5).abs());
            }
        }
        r
    }

    /// Samples until the impulse response decays below `tol` of its peak.
    pub fn settle_samples(&self, tol: f64) -> usize {
        let r = self.max_pole_radius();
        if r <= 0.0 || r >= 1.0 {
            return 0;
        }
        (tol.ln() / r.ln()).ceil() as usize
    }

    /// Frequency response at `f` Hz for sample rate `fs`.
    pub fn response(&self, f: f64, fs: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f / fs);
        let z2 = z1 * z1;
        let mut h = Complex64::new(self.gain, 0.0);
        for s in &self.sections {
            h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (Complex64::new(1.0, 0.0) + s.a1 * z1 + s.a2 * z2);
        }
        h
    }
}

/// Bilinear-transform Butterworth design with prewarped edges.
pub fn design_butterworth(kind: BandKind, order: usize, fs: f64) -> Result<Sos> {
    if order == 0 {
        return Err(Error::domain("filter order must be >= 1"));
    }
    if !(fs > 0.0) {
        return Err(Error::domain("sample rate must be positive"));
    }
    let check_edge = |f: f64| -> Result<()> {
        if !(f > 0.0 && f < fs / 2.0) {
            return Err(Error::domain(format!(
                "band edge {f} Hz outside (0, {})",
                fs / 2.0
            )));
        }
        Ok(())
    };
    let k = 2.0 * fs;
    let warp = |f: f64| k * (std::f64::consts::PI * f / fs).tan();

    // analog prototype poles on the left unit semicircle
    let proto: Vec<Complex64> = (1..=order)
        .map(|i| {
            let theta = std::f64::consts::PI * (2 * i + order - 1) as f64 / (2 * order) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect();

    // analog poles plus zero counts at s=0 / s=infinity
    let (analog_poles, zeros_at_origin, ref_freq): (Vec<Complex64>, usize, f64) = match kind {
        BandKind::Lowpass(fc) => {
            check_edge(fc)?;
            let wc = warp(fc);
            (proto.iter().map(|p| p * wc).collect(), 0, 0.0)
        }
        BandKind::Highpass(fc) => {
            check_edge(fc)?;
            let wc = warp(fc);
            (proto.iter().map(|p| wc / p).collect(), order, fs / 2.0)
        }
        BandKind::Bandpass(f_lo, f_hi) => {
            check_edge(f_lo)?;
            check_edge(f_hi)?;
            if f_lo >= f_hi {
                return Err(Error::domain(format!(
                    "bandpass edges must ascend, got ({f_lo}, {f_hi})"
                )));
            }
            let (wl, wh) = (warp(f_lo), warp(f_hi));
            let w0sq = wl * wh;
            let bw = wh - wl;
            let mut poles = Vec::with_capacity(2 * order);
            for p in &proto {
                let pb = p * bw * 0.5;
                let disc = (pb * pb - w0sq).sqrt();
                poles.push(pb + disc);
                poles.push(pb - disc);
            }
            // digital reference frequency at the warped geometric center
            let f0 = (w0sq.sqrt() / k).atan() * fs / std::f64::consts::PI;
            (poles, order, f0)
        }
    };
    let n_poles = analog_poles.len();
    let zeros_at_nyquist = n_poles - zeros_at_origin;

    // bilinear transform of poles, zeros are exactly at z=+1 / z=-1
    let z_poles: Vec<Complex64> = analog_poles
        .iter()
        .map(|s| (k + s) / (k - s))
        .collect();
    for p in &z_poles {
        if p.norm() >= 1.0 - 1e-12 || !p.re.is_finite() || !p.im.is_finite() {
            return Err(Error::domain(format!(
                "unstable design (pole magnitude {:.6} at or beyond the unit circle)",
                p.norm()
            )));
        }
    }

    // group poles into conjugate pairs / real singletons
    let mut remaining = z_poles;
    let mut sections = Vec::new();
    let mut zo = zeros_at_origin; // z = +1
    let mut zn = zeros_at_nyquist; // z = -1
    while let Some(p) = remaining.pop() {
        if p.im.abs() > 1e-12 {
            let idx = remaining
                .iter()
                .position(|q| (q.conj() - p).norm() < 1e-9)
                .ok_or_else(|| Error::domain("pole set not conjugate-closed"))?;
            remaining.swap_remove(idx);
            let a1 = -2.0 * p.re;
            let a2 = p.norm_sqr();
            let (b0, b1, b2) = take_zero_pair(&mut zo, &mut zn);
            sections.push(Biquad { b0, b1, b2, a1, a2 });
        } else {
            let a1 = -p.re;
            // pair real poles together when possible
            if let Some(idx) = remaining.iter().position(|q| q.im.abs() <= 1e-12) {
                let q = remaining.swap_remove(idx);
                let (b0, b1, b2) = take_zero_pair(&mut zo, &mut zn);
                sections.push(Biquad {
                    b0,
                    b1,
                    b2,
                    a1: -(p.re + q.re),
                    a2: p.re * q.re,
                });
            } else {
                let (b0, b1) = if zo > 0 {
                    zo -= 1;
                    (1.0, -1.0)
                } else {
                    zn -= 1;
                    (1.0, 1.0)
                };
                sections.push(Biquad {
                    b0,
                    b1,
                    b2: 0.0,
                    a1,
                    a2: 0.0,
                });
            }
        }
    }

    let mut sos = Sos {
        sections,
        gain: 1.0,
    };
    let h_ref = sos.response(ref_freq, fs).norm();
    if !(h_ref > 0.0) || !h_ref.is_finite() {
        return Err(Error::domain("degenerate design (zero reference response)"));
    }
    sos.gain = 1.0 / h_ref;
    Ok(sos)
}

/// Hand one z=+1 zero and/or z=-1 zero to a biquad, preferring one of each
/// (bandpass sections), falling back to a double zero.
fn take_zero_pair(zo: &mut usize, zn: &mut usize) -> (f64, f64, f64) {
    if *zo > 0 && *zn > 0 {
        *zo -= 1;
        *zn -= 1;
        (1.0, 0.0, -1.0) // (z-1)(z+1)
    } else if *zo >= 2 {
        *zo -= 2;
        (1.0, -2.0, 1.0) // (z-1)^2
    } else {
        *zn -= 2;
        (1.0, 2.0, 1.0) // (z+1)^2
    }
}

/// Squared magnitude of the ideal (analog, prewarped) Butterworth response at
/// digital frequency `f`; the bilinear design must match this exactly.
pub fn analytic_butterworth_power(kind: BandKind, order: usize, fs: f64, f: f64) -> f64 {
    let k = 2.0 * fs;
    let warp = |x: f64| k * (std::f64::consts::PI * x / fs).tan();
    let omega = warp(f);
    match kind {
        BandKind::Lowpass(fc) => {
            let wc = warp(fc);
            1.0 / (1.0 + (omega / wc).powi(2 * order as i32))
        }
        BandKind::Highpass(fc) => {
            let wc = warp(fc);
            1.0 / (1.0 + (wc / omega).powi(2 * order as i32))
        }
        BandKind::Bandpass(f_lo, f_hi) => {
            let (wl, wh) = (warp(f_lo), warp(f_hi));
            let w0sq = wl * wh;
            let bw = wh - wl;
            let x = (omega * omega - w0sq) / (bw * omega);
            1.0 / (1.0 + x.powi(2 * order as i32))
        }
    }
}

/// Butterworth band-pass filtering of a signal.
pub fn iir_bandpass(samples: &[f64], band: (f64, f64), order: usize, fs: f64) -> Result<Vec<f64>> {
    let sos = design_butterworth(BandKind::Bandpass(band.0, band.1), order, fs)?;
    Ok(sos.filter(samples))
}
