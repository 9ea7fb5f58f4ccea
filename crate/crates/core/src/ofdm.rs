//! Subcarrier grid description.

use serde::Serialize;

use crate::error::{Error, Result};

/// OFDM grid: FFT size, cyclic prefix, the usable carriers and the sample time.
///
/// `usable` holds physical bin indices in `[0, n_fft)`. Bins at or above
/// `n_fft / 2` are negative frequencies; [`OfdmConfig::freq`] returns the signed
/// frequency index, which is what every phase ramp and correlation lag in the crate
/// is computed from. For integer sample delays the signed and unsigned forms give
/// identical phases, but lags stay compact across the DC null.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OfdmConfig {
    n_fft: usize,
    cp_len: usize,
    usable: Vec<usize>,
    sample_time: f64,
    #[serde(skip)]
    freqs: Vec<i64>,
}

impl OfdmConfig {
    pub fn new(n_fft: usize, cp_len: usize, usable: Vec<usize>, sample_time: f64) -> Result<Self> {
        if n_fft == 0 {
            return Err(Error::Config("n_fft must be positive".into()));
        }
        if cp_len == 0 || cp_len >= n_fft {
            return Err(Error::Config(format!(
                "cp_len must be in [1, n_fft); got {cp_len} with n_fft {n_fft}"
            )));
        }
        if usable.is_empty() {
            return Err(Error::Config("usable carrier set is empty".into()));
        }
        if usable.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("usable carriers must be strictly increasing".into()));
        }
        if *usable.last().unwrap() >= n_fft {
            return Err(Error::Config("usable carrier index out of range".into()));
        }
        if !(sample_time.is_finite() && sample_time > 0.0) {
            return Err(Error::Config("sample_time must be positive".into()));
        }
        let freqs = usable.iter().map(|&k| signed_bin(k, n_fft)).collect();
        Ok(Self { n_fft, cp_len, usable, sample_time, freqs })
    }

    /// `k_len` carriers around DC with the DC bin nulled and the band edges left
    /// virtual. An odd `k_len` puts the extra carrier on the positive side.
    pub fn symmetric_band(n_fft: usize, cp_len: usize, k_len: usize, sample_time: f64) -> Result<Self> {
        if k_len == 0 || k_len > n_fft.saturating_sub(1) {
            return Err(Error::Config(format!(
                "cannot place {k_len} carriers around a nulled DC on a {n_fft}-point grid"
            )));
        }
        let pos = k_len.div_ceil(2);
        let neg = k_len - pos;
        if pos > n_fft / 2 || neg >= n_fft / 2 {
            return Err(Error::Config("band does not fit the grid".into()));
        }
        let mut usable: Vec<usize> = (1..=pos).collect();
        usable.extend(n_fft - neg..n_fft);
        Self::new(n_fft, cp_len, usable, sample_time)
    }

    /// Every bin is usable (no virtual carriers).
    pub fn full_grid(n_fft: usize, cp_len: usize, sample_time: f64) -> Result<Self> {
        Self::new(n_fft, cp_len, (0..n_fft).collect(), sample_time)
    }

    /// 512-point grid, 128-sample CP, 0.1 us sampling, 408 usable carriers.
    pub fn reference() -> Self {
        Self::symmetric_band(512, 128, 408, 1e-7).expect("reference grid is valid")
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn usable(&self) -> &[usize] {
        &self.usable
    }

    pub fn sample_time(&self) -> f64 {
        self.sample_time
    }

    /// Number of usable carriers K.
    pub fn k(&self) -> usize {
        self.usable.len()
    }

    /// Signed frequency index of the carrier at usable position `pos`.
    pub fn freq(&self, pos: usize) -> i64 {
        self.freqs[pos]
    }

    pub fn freqs(&self) -> &[i64] {
        &self.freqs
    }

    /// Frequency lag between two usable positions, `freq(i) - freq(j)`.
    pub fn lag(&self, i: usize, j: usize) -> i64 {
        self.freqs[i] - self.freqs[j]
    }

    /// Number of non-negative lags a correlation vector must cover on this grid.
    /// Equals K for contiguous carriers; one more when the DC null splits the band.
    pub fn lag_span(&self) -> usize {
        let lo = self.freqs.iter().min().unwrap();
        let hi = self.freqs.iter().max().unwrap();
        (hi - lo) as usize + 1
    }

    /// `exp(-j 2 pi f delay / n_fft)` for carrier position `pos`.
    pub fn phase_ramp(&self, pos: usize, delay: f64) -> num_complex::Complex64 {
        let arg = -2.0 * std::f64::consts::PI * self.freqs[pos] as f64 * delay / self.n_fft as f64;
        num_complex::Complex64::from_polar(1.0, arg)
    }
}

/// Maps a bin index to a signed frequency in `(-n/2, n/2]`.
pub fn signed_bin(k: usize, n_fft: usize) -> i64 {
    if k <= n_fft / 2 {
        k as i64
    } else {
        k as i64 - n_fft as i64
    }
}
