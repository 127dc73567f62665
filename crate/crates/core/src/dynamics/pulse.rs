//! Drive envelopes and pulse sequences.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::model::{DriveParams, SystemParams};
use crate::{Error, Result};

/// Ramp duration used by the reset sequence (us).
pub const DEFAULT_RAMP: f64 = 0.8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampShape {
    /// `(1 - cos(pi u)) / 2`, with zero slope at both ends.
    #[default]
    Cosine,
    Linear,
}

/// A 0 -> 1 ramp of given shape and duration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ramp {
    pub shape: RampShape,
    pub duration: f64,
}

impl Ramp {
    /// Rising value at time `t` after the ramp starts, clamped to [0, 1].
    pub fn up(&self, t: f64) -> f64 {
        let u = (t / self.duration).clamp(0.0, 1.0);
        match self.shape {
            RampShape::Cosine => 0.5 * (1.0 - (std::f64::consts::PI * u).cos()),
            RampShape::Linear => u,
        }
    }

    pub fn down(&self, t: f64) -> f64 {
        1.0 - self.up(t)
    }

    /// Time derivative of [`Ramp::up`].
    pub fn up_rate(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.duration {
            return 0.0;
        }
        match self.shape {
            RampShape::Cosine => {
                let k = std::f64::consts::PI / self.duration;
                0.5 * k * (k * t).sin()
            }
            RampShape::Linear => 1.0 / self.duration,
        }
    }
}

pub fn ramp_envelope(shape: RampShape, duration: f64) -> Result<Ramp> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParams(format!("ramp duration must be positive, got {duration}")));
    }
    Ok(Ramp { shape, duration })
}

/// Envelope of one channel over one segment, as a function of the time
/// elapsed since the segment started.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Envelope {
    Off,
    On,
    RampUp(RampShape),
    RampDown(RampShape),
}

impl Envelope {
    pub fn value(&self, elapsed: f64, duration: f64) -> f64 {
        match *self {
            Envelope::Off => 0.0,
            Envelope::On => 1.0,
            Envelope::RampUp(shape) => Ramp { shape, duration }.up(elapsed),
            Envelope::RampDown(shape) => Ramp { shape, duration }.down(elapsed),
        }
    }

    pub fn rate(&self, elapsed: f64, duration: f64) -> f64 {
        match *self {
            Envelope::Off | Envelope::On => 0.0,
            Envelope::RampUp(shape) => Ramp { shape, duration }.up_rate(elapsed),
            Envelope::RampDown(shape) => -Ramp { shape, duration }.up_rate(elapsed),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    SidebandM,
    SidebandR,
    Rabi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    /// Zero only for instantaneous gates.
    pub duration: f64,
    pub sideband_m: Envelope,
    pub sideband_r: Envelope,
    pub rabi: Envelope,
    /// Instantaneous pi/2 unmapping gate applied at the segment start.
    pub gate: bool,
}

impl Segment {
    fn envelope(&self, channel: Channel) -> Envelope {
        match channel {
            Channel::SidebandM => self.sideband_m,
            Channel::SidebandR => self.sideband_r,
            Channel::Rabi => self.rabi,
        }
    }
}

/// Envelope values (and their time derivatives) of every channel at one time.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ChannelValues {
    pub sideband_m: f64,
    pub sideband_r: f64,
    pub rabi: f64,
    pub sideband_m_rate: f64,
    pub sideband_r_rate: f64,
}

/// Ordered segments plus the peak amplitudes the envelopes scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub segments: Vec<Segment>,
    pub eps_m: C64,
    pub eps_r: C64,
    pub rabi: f64,
}

impl PulseSequence {
    pub fn new(segments: Vec<Segment>, eps_m: C64, eps_r: C64, rabi: f64) -> Result<Self> {
        let seq = PulseSequence { segments, eps_m, eps_r, rabi };
        seq.validate()?;
        Ok(seq)
    }

    /// All channels on at full amplitude for `duration`, no gate.
    pub fn constant(duration: f64, eps_m: C64, eps_r: C64, rabi: f64) -> Result<Self> {
        let seg = Segment {
            name: "drive".into(),
            duration,
            sideband_m: Envelope::On,
            sideband_r: Envelope::On,
            rabi: Envelope::On,
            gate: false,
        };
        Self::new(vec![seg], eps_m, eps_r, rabi)
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.segments {
            let ok = s.duration.is_finite() && (s.duration > 0.0 || (s.duration == 0.0 && s.gate));
            if !ok {
                return Err(Error::InvalidParams(format!(
                    "segment '{}' has invalid duration {}",
                    s.name, s.duration
                )));
            }
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Start time of every segment.
    pub fn starts(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let start = t;
                t += s.duration;
                start
            })
            .collect()
    }

    /// Index of the segment containing `t`; boundaries belong to the later
    /// non-instantaneous segment, the end of the sequence to the last one.
    fn locate(&self, t: f64) -> Option<(usize, f64)> {
        let mut found = None;
        let mut start = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            if s.duration > 0.0 && t >= start - 1e-12 {
                found = Some((i, t - start));
            }
            start += s.duration;
        }
        found
    }

    pub fn values(&self, t: f64) -> ChannelValues {
        match self.locate(t) {
            None => ChannelValues::default(),
            Some((i, elapsed)) => {
                let s = &self.segments[i];
                let elapsed = elapsed.min(s.duration);
                let v = |c: Channel| s.envelope(c).value(elapsed, s.duration);
                let r = |c: Channel| s.envelope(c).rate(elapsed, s.duration);
                ChannelValues {
                    sideband_m: v(Channel::SidebandM),
                    sideband_r: v(Channel::SidebandR),
                    rabi: v(Channel::Rabi),
                    sideband_m_rate: r(Channel::SidebandM),
                    sideband_r_rate: r(Channel::SidebandR),
                }
            }
        }
    }

    pub fn has_gate(&self) -> bool {
        self.segments.iter().any(|s| s.gate)
    }

    /// Time of the unmapping gate, if any.
    pub fn gate_time(&self) -> Option<f64> {
        let starts = self.starts();
        self.segments.iter().position(|s| s.gate).map(|i| starts[i])
    }

    /// End of the segment named `name`.
    pub fn segment_end(&self, name: &str) -> Option<f64> {
        let starts = self.starts();
        self.segments.iter().position(|s| s.name == name).map(|i| starts[i] + self.segments[i].duration)
    }
}

/// Options for [`rdr_sequence_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceOptions {
    pub ramp: f64,
    pub shape: RampShape,
    /// Multiplies the Rabi drive; zero removes it and the unmapping gate.
    pub rabi_scale: f64,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        SequenceOptions { ramp: DEFAULT_RAMP, shape: RampShape::Cosine, rabi_scale: 1.0 }
    }
}

/// Reset sequence with the default 800 ns cosine ramps.
pub fn rdr_sequence(params: &SystemParams, drives: &DriveParams, hold: f64) -> Result<PulseSequence> {
    rdr_sequence_with(params, drives, hold, SequenceOptions::default())
}

/// Segments: sidebands ramp up, Rabi ramps up, hold, Rabi ramps down followed
/// by the pi/2 unmapping gate, sidebands ramp down.
pub fn rdr_sequence_with(
    params: &SystemParams,
    drives: &DriveParams,
    hold: f64,
    opts: SequenceOptions,
) -> Result<PulseSequence> {
    if !(hold >= 0.0) {
        return Err(Error::InvalidParams(format!("hold duration must be >= 0, got {hold}")));
    }
    let ramp = ramp_envelope(opts.shape, opts.ramp)?;
    let (up, down) = (Envelope::RampUp(ramp.shape), Envelope::RampDown(ramp.shape));
    let rabi = params.omega_rabi * opts.rabi_scale;
    let seg = |name: &str, duration, sb, rabi| Segment {
        name: name.into(),
        duration,
        sideband_m: sb,
        sideband_r: sb,
        rabi,
        gate: false,
    };
    let mut segments = vec![
        seg("sideband-ramp-up", ramp.duration, up, Envelope::Off),
        seg("rabi-ramp-up", ramp.duration, Envelope::On, up),
    ];
    if hold > 0.0 {
        segments.push(seg("hold", hold, Envelope::On, Envelope::On));
    }
    segments.push(seg("rabi-ramp-down", ramp.duration, Envelope::On, down));
    if rabi != 0.0 {
        segments.push(Segment { gate: true, ..seg("unmap-gate", 0.0, Envelope::On, Envelope::Off) });
    }
    segments.push(seg("sideband-ramp-down", ramp.duration, down, Envelope::Off));
    PulseSequence::new(segments, drives.eps_m, drives.eps_r, rabi)
}
