//! Uniformly sampled two-channel time series.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

// f64 math via the trait under no_std; shadowed by inherent methods when
// std is linked (tests, doctests), hence the allow.
#[allow(unused_imports)]
use num_traits::Float;

/// Two channels sampled at a fixed step. Sample counts are kept odd
/// (`2K + 1`) so the half-spectrum grid over `k = 0..=K` carries the whole
/// signal without a special Nyquist bin.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSeries {
    dt: f64,
    samples: [Vec<f64>; 2],
    labels: [String; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub enum SeriesError {
    /// Sample count even or below 3.
    BadLength { len: usize },
    /// Channels of different length.
    LengthMismatch { ch1: usize, ch2: usize },
    /// dt must be positive and finite.
    BadStep { dt: f64 },
    /// A sample is NaN or infinite.
    NonFinite { channel: usize, index: usize },
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::BadLength { len } => {
                write!(f, "series length {len} is not odd and >= 3")
            }
            SeriesError::LengthMismatch { ch1, ch2 } => {
                write!(f, "channel lengths differ: {ch1} vs {ch2}")
            }
            SeriesError::BadStep { dt } => write!(f, "bad sample step dt = {dt}"),
            SeriesError::NonFinite { channel, index } => {
                write!(f, "non-finite sample in channel {channel} at index {index}")
            }
        }
    }
}

impl core::error::Error for SeriesError {}

impl ChannelSeries {
    pub fn new(
        dt: f64,
        ch1: Vec<f64>,
        ch2: Vec<f64>,
        labels: [&str; 2],
    ) -> Result<Self, SeriesError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SeriesError::BadStep { dt });
        }
        if ch1.len() != ch2.len() {
            return Err(SeriesError::LengthMismatch { ch1: ch1.len(), ch2: ch2.len() });
        }
        if ch1.len() < 3 || ch1.len() % 2 == 0 {
            return Err(SeriesError::BadLength { len: ch1.len() });
        }
        for (c, ch) in [&ch1, &ch2].into_iter().enumerate() {
            if let Some(i) = ch.iter().position(|v| !v.is_finite()) {
                return Err(SeriesError::NonFinite { channel: c + 1, index: i });
            }
        }
        Ok(ChannelSeries {
            dt,
            samples: [ch1, ch2],
            labels: [labels[0].to_string(), labels[1].to_string()],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of samples per channel, always odd.
    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `channel` is 0 or 1.
    pub fn channel(&self, channel: usize) -> &[f64] {
        &self.samples[channel]
    }

    pub fn labels(&self) -> [&str; 2] {
        [&self.labels[0], &self.labels[1]]
    }

    /// Root mean square of a channel about zero. Series here are fluctuation
    /// records, so no mean is removed.
    pub fn rms(&self, channel: usize) -> f64 {
        let ch = &self.samples[channel];
        let sum: f64 = ch.iter().map(|v| v * v).sum();
        (sum / ch.len() as f64).sqrt()
    }
}
