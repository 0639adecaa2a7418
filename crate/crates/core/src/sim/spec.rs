use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::EvaParams;
use crate::detector::{InitMode, Refresh};
use crate::frame::{FrameConfig, QamAlphabet};
use crate::{Error, Result};

/// Where each frame's channel comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    /// Fresh EVA realisation per frame.
    Eva,
    /// Fixed channel from a JSON path list.
    File { path: PathBuf },
    /// Single unit path.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    /// MRC from zero estimates.
    Mrc,
    /// MRC from the TF-MMSE estimate.
    MrcInit,
    /// Sliced TF-MMSE estimate alone.
    MmseTfOnly,
    /// CP-OFDM with single-tap MMSE.
    OfdmMmse,
    /// MRC, soft demapping and one LDPC decode.
    CodedMrc,
    /// Turbo loop of MRC passes and LDPC decodes.
    TurboMrc,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 6] = [
        DetectorKind::Mrc,
        DetectorKind::MrcInit,
        DetectorKind::MmseTfOnly,
        DetectorKind::OfdmMmse,
        DetectorKind::CodedMrc,
        DetectorKind::TurboMrc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Mrc => "mrc",
            DetectorKind::MrcInit => "mrc_init",
            DetectorKind::MmseTfOnly => "mmse_tf_only",
            DetectorKind::OfdmMmse => "ofdm_mmse",
            DetectorKind::CodedMrc => "coded_mrc",
            DetectorKind::TurboMrc => "turbo_mrc",
        }
    }

    pub fn is_coded(self) -> bool {
        matches!(self, DetectorKind::CodedMrc | DetectorKind::TurboMrc)
    }

    fn takes_iterations(self) -> bool {
        !matches!(self, DetectorKind::MmseTfOnly | DetectorKind::OfdmMmse)
    }
}

/// A detector variant with its iteration budget, written `name[:iters]`.
/// For `turbo_mrc` the budget is the number of turbo iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DetectorSpec {
    pub kind: DetectorKind,
    pub iterations: Option<usize>,
}

impl DetectorSpec {
    pub fn new(kind: DetectorKind, iterations: Option<usize>) -> Self {
        DetectorSpec { kind, iterations }
    }

    /// Iterations after applying the campaign defaults.
    pub fn resolved(&self, spec: &SimSpec) -> Option<usize> {
        if !self.kind.takes_iterations() {
            return None;
        }
        Some(self.iterations.unwrap_or(match self.kind {
            DetectorKind::TurboMrc => spec.n_turbo,
            _ => spec.iterations,
        }))
    }

    /// Label with defaults filled in, used in output.
    pub fn label(&self, spec: &SimSpec) -> String {
        match self.resolved(spec) {
            Some(s) => format!("{}:{s}", self.kind.name()),
            None => self.kind.name().to_string(),
        }
    }
}

impl fmt::Display for DetectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.iterations {
            Some(s) => write!(f, "{}:{s}", self.kind.name()),
            None => f.write_str(self.kind.name()),
        }
    }
}

impl FromStr for DetectorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, iters) = match s.split_once(':') {
            Some((n, i)) => (n, Some(i)),
            None => (s, None),
        };
        let kind = DetectorKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownDetector(s.to_string()))?;
        let iterations = match iters {
            None => None,
            Some(_) if !kind.takes_iterations() => {
                return Err(Error::UnknownDetector(format!(
                    "{s} ({name} takes no iteration count)"
                )))
            }
            Some(i) => Some(
                i.parse::<usize>()
                    .map_err(|_| Error::UnknownDetector(format!("{s} (bad iteration count)")))?,
            ),
        };
        Ok(DetectorSpec { kind, iterations })
    }
}

impl Serialize for DetectorSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DetectorSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// When a campaign point stops drawing frames. With `frames` set exactly that
/// many frames run; otherwise frames are drawn in batches until the error
/// targets are met or a cap is hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopRule {
    pub frames: Option<u64>,
    pub min_frame_errors: u64,
    pub min_bit_errors: u64,
    pub max_bits: u64,
    pub max_frames: Option<u64>,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            frames: None,
            min_frame_errors: 200,
            min_bit_errors: 0,
            max_bits: 10_000_000,
            max_frames: None,
        }
    }
}

impl StopRule {
    pub fn fixed(frames: u64) -> Self {
        StopRule {
            frames: Some(frames),
            ..StopRule::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = match self.frames {
            Some(f) => f == 0,
            None => {
                (self.min_frame_errors == 0 && self.min_bit_errors == 0)
                    || self.max_bits == 0
                    || self.max_frames == Some(0)
            }
        };
        if bad {
            return Err(Error::InvalidSpec(format!(
                "stop rule must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

fn de_snr_list<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Point {
        Num(f64),
        Text(String),
    }
    Vec::<Point>::deserialize(d)?
        .into_iter()
        .map(|p| match p {
            Point::Num(v) => Ok(v),
            Point::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Point::Text(t) => Err(serde::de::Error::custom(format!("bad SNR point {t:?}"))),
        })
        .collect()
}

fn ser_snr_list<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_infinite() {
            seq.serialize_element("inf")?;
        } else {
            seq.serialize_element(x)?;
        }
    }
    seq.end()
}

/// A Monte-Carlo campaign. SNR is `Es/N0` with unit-energy symbols, so
/// `sigma_w = 10^(-snr_db / 20)`; `"inf"` means noiseless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSpec {
    pub doppler_bins: usize,
    pub delay_bins: usize,
    pub subcarrier_spacing: f64,
    pub l_max: usize,
    pub channel: ChannelSpec,
    pub speed_kmh: f64,
    pub doppler_cap: usize,
    pub carrier_hz: Option<f64>,
    pub qam: usize,
    #[serde(deserialize_with = "de_snr_list", serialize_with = "ser_snr_list")]
    pub snr_db: Vec<f64>,
    pub detectors: Vec<DetectorSpec>,
    /// Default MRC passes (S).
    pub iterations: usize,
    pub n_turbo: usize,
    pub stop: StopRule,
    pub seed: u64,
    pub threads: Option<usize>,
    /// Frames per scheduling batch; stop rules are checked between batches.
    pub batch: usize,
    pub code_len: usize,
    /// alist file overriding the built-in code.
    pub code_file: Option<PathBuf>,
    /// Initial estimate for `coded_mrc` and `turbo_mrc`.
    pub coded_init: InitMode,
    pub epsilon: f64,
    pub from_scratch_feedback: bool,
    /// Adds a wall-clock column (makes output run-dependent).
    pub timing: bool,
}

impl Default for SimSpec {
    fn default() -> Self {
        SimSpec {
            doppler_bins: 128,
            delay_bins: 512,
            subcarrier_spacing: 15e3,
            l_max: 32,
            channel: ChannelSpec::Eva,
            speed_kmh: 120.0,
            doppler_cap: 16,
            carrier_hz: None,
            qam: 4,
            snr_db: Vec::new(),
            detectors: vec![DetectorSpec::new(DetectorKind::Mrc, None)],
            iterations: 10,
            n_turbo: 2,
            stop: StopRule::default(),
            seed: 1,
            threads: None,
            batch: 32,
            code_len: 4096,
            code_file: None,
            coded_init: InitMode::TfMmse,
            epsilon: 1e-12,
            from_scratch_feedback: false,
            timing: false,
        }
    }
}

impl SimSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
        SimSpec::from_json_str(&text)
    }

    pub fn frame_config(&self) -> Result<FrameConfig> {
        FrameConfig::new(
            self.delay_bins,
            self.doppler_bins,
            self.subcarrier_spacing,
            self.l_max,
        )
    }

    pub fn alphabet(&self) -> Result<QamAlphabet> {
        QamAlphabet::new(self.qam)
    }

    pub fn eva_params(&self) -> EvaParams {
        EvaParams {
            speed_kmh: self.speed_kmh,
            doppler_cap: self.doppler_cap,
            carrier_hz: self.carrier_hz,
        }
    }

    pub fn refresh(&self) -> Refresh {
        if self.from_scratch_feedback {
            Refresh::FromScratch
        } else {
            Refresh::Incremental
        }
    }

    pub fn noise_std(snr_db: f64) -> f64 {
        10f64.powf(-snr_db / 20.0)
    }

    pub fn validate(&self) -> Result<()> {
        self.frame_config()?;
        self.alphabet()?;
        if self.snr_db.is_empty() {
            return Err(Error::InvalidSpec("SNR list is empty".into()));
        }
        if let Some(bad) = self
            .snr_db
            .iter()
            .find(|v| v.is_nan() || **v == f64::NEG_INFINITY)
        {
            return Err(Error::InvalidSpec(format!("bad SNR point {bad}")));
        }
        if self.detectors.is_empty() {
            return Err(Error::InvalidSpec("detector list is empty".into()));
        }
        let mut labels: Vec<String> = self.detectors.iter().map(|d| d.label(self)).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpec("detector list has duplicates".into()));
        }
        if self.batch == 0 {
            return Err(Error::InvalidSpec("batch must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidSpec("threads must be positive".into()));
        }
        if self.coded_init == InitMode::External {
            return Err(Error::InvalidSpec(
                "coded_init must be zero or tf_mmse".into(),
            ));
        }
        for d in &self.detectors {
            if d.kind == DetectorKind::TurboMrc && d.resolved(self) == Some(0) {
                return Err(Error::InvalidSpec(
                    "turbo_mrc needs at least one iteration".into(),
                ));
            }
        }
        if matches!(self.channel, ChannelSpec::Eva) && self.doppler_cap >= self.doppler_bins / 2 {
            return Err(Error::InvalidSpec(format!(
                "doppler_cap {} must be below N/2 = {}",
                self.doppler_cap,
                self.doppler_bins / 2
            )));
        }
        self.stop.validate()
    }
}
