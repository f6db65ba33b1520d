//! HRTF sets and the HRTF-JSON container.
//!
//! The document is a single JSON object whose fields appear in this order:
//! `schema`, `frequencies_hz`, `directions`, `ears`, `encoding`, `data` and,
//! when impulse responses are present, `hrir`. `data` holds `[re, im]` pairs in
//! direction-major, ear-middle, frequency-minor order, either inline or as
//! base64 of little-endian `f64` values.

use std::fmt;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BemError, Result};

pub const SCHEMA: &str = "hrtf-json/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ear {
    Left,
    Right,
}

impl Ear {
    pub fn region(self) -> hrtf_core::Region {
        match self {
            Ear::Left => hrtf_core::Region::LeftEar,
            Ear::Right => hrtf_core::Region::RightEar,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Ear::Left => "left",
            Ear::Right => "right",
        }
    }
}

impl fmt::Display for Ear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Degrees and meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    pub az: f64,
    pub el: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponses {
    /// Hz.
    pub sample_rate: f64,
    pub taps: usize,
    /// Direction-major, ear-middle, tap-minor.
    pub data: Vec<f64>,
}

/// Complex transfer values `H(direction, ear, frequency)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HrtfSet {
    pub directions: Vec<GridPoint>,
    /// Hz.
    pub frequencies: Vec<f64>,
    pub ears: Vec<Ear>,
    /// Direction-major, ear-middle, frequency-minor.
    pub values: Vec<Complex64>,
    pub impulse: Option<ImpulseResponses>,
}

impl HrtfSet {
    pub fn new(directions: Vec<GridPoint>, frequencies: Vec<f64>, ears: Vec<Ear>, values: Vec<Complex64>) -> Result<Self> {
        let set = Self {
            directions,
            frequencies,
            ears,
            values,
            impulse: None,
        };
        set.check()?;
        Ok(set)
    }

    pub fn check(&self) -> Result<()> {
        let expect = self.directions.len() * self.ears.len() * self.frequencies.len();
        if self.values.len() != expect {
            return Err(BemError::DimensionMismatch(format!(
                "{} values for {} directions × {} ears × {} frequencies",
                self.values.len(),
                self.directions.len(),
                self.ears.len(),
                self.frequencies.len()
            )));
        }
        if let Some(i) = self.values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(BemError::Format(format!("non-finite transfer value at index {i}")));
        }
        if self.frequencies.iter().any(|f| !f.is_finite()) || self.frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BemError::Format("frequencies must be finite and strictly ascending".into()));
        }
        let mut ears = self.ears.clone();
        ears.sort();
        ears.dedup();
        if ears.len() != self.ears.len() {
            return Err(BemError::Format("duplicate ear".into()));
        }
        if let Some(ir) = &self.impulse {
            if ir.data.len() != self.directions.len() * self.ears.len() * ir.taps {
                return Err(BemError::DimensionMismatch(format!(
                    "{} impulse samples for {} directions × {} ears × {} taps",
                    ir.data.len(),
                    self.directions.len(),
                    self.ears.len(),
                    ir.taps
                )));
            }
        }
        Ok(())
    }

    pub fn ear_index(&self, ear: Ear) -> Option<usize> {
        self.ears.iter().position(|e| *e == ear)
    }

    /// All frequencies for one direction and ear.
    pub fn spectrum(&self, direction: usize, ear: usize) -> &[Complex64] {
        let nf = self.frequencies.len();
        let start = (direction * self.ears.len() + ear) * nf;
        &self.values[start..start + nf]
    }

    pub fn value(&self, direction: usize, ear: usize, frequency: usize) -> Complex64 {
        self.spectrum(direction, ear)[frequency]
    }

    pub fn impulse_response(&self, direction: usize, ear: usize) -> Option<&[f64]> {
        self.impulse.as_ref().map(|ir| {
            let start = (direction * self.ears.len() + ear) * ir.taps;
            &ir.data[start..start + ir.taps]
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Base64,
    Inline,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ComplexPayload {
    Base64(String),
    Inline(Vec<[f64; 2]>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RealPayload {
    Base64(String),
    Inline(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HrirDocument {
    sample_rate: f64,
    taps: usize,
    encoding: Encoding,
    data: RealPayload,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    schema: String,
    frequencies_hz: Vec<f64>,
    directions: Vec<GridPoint>,
    ears: Vec<Ear>,
    encoding: Encoding,
    data: ComplexPayload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hrir: Option<HrirDocument>,
}

fn encode_f64(values: impl Iterator<Item = f64>) -> String {
    let bytes: Vec<u8> = values.flat_map(f64::to_le_bytes).collect();
    STANDARD.encode(bytes)
}

fn decode_f64(text: &str) -> Result<Vec<f64>> {
    let bytes = STANDARD.decode(text).map_err(|e| BemError::Format(format!("base64: {e}")))?;
    if bytes.len() % 8 != 0 {
        return Err(BemError::Format(format!("{} payload bytes is not a whole number of f64", bytes.len())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect())
}

/// Serializes `set`; the output ends with a newline.
pub fn to_hrtf_json(set: &HrtfSet, encoding: Encoding) -> Result<String> {
    set.check()?;
    let data = match encoding {
        Encoding::Base64 => ComplexPayload::Base64(encode_f64(set.values.iter().flat_map(|v| [v.re, v.im]))),
        Encoding::Inline => ComplexPayload::Inline(set.values.iter().map(|v| [v.re, v.im]).collect()),
    };
    let hrir = set.impulse.as_ref().map(|ir| HrirDocument {
        sample_rate: ir.sample_rate,
        taps: ir.taps,
        encoding,
        data: match encoding {
            Encoding::Base64 => RealPayload::Base64(encode_f64(ir.data.iter().copied())),
            Encoding::Inline => RealPayload::Inline(ir.data.clone()),
        },
    });
    let doc = Document {
        schema: SCHEMA.to_string(),
        frequencies_hz: set.frequencies.clone(),
        directions: set.directions.clone(),
        ears: set.ears.clone(),
        encoding,
        data,
        hrir,
    };
    let mut text = serde_json::to_string(&doc)?;
    text.push('\n');
    Ok(text)
}

pub fn from_hrtf_json(text: &str) -> Result<HrtfSet> {
    let doc: Document = serde_json::from_str(text)?;
    if doc.schema != SCHEMA {
        return Err(BemError::Format(format!("unsupported schema {:?}", doc.schema)));
    }
    let values = match (doc.encoding, doc.data) {
        (Encoding::Base64, ComplexPayload::Base64(s)) => {
            let flat = decode_f64(&s)?;
            if flat.len() % 2 != 0 {
                return Err(BemError::Format("odd number of payload values".into()));
            }
            flat.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
        }
        (Encoding::Inline, ComplexPayload::Inline(pairs)) => pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
        (e, _) => return Err(BemError::Format(format!("data does not match encoding {e:?}"))),
    };
    let impulse = match doc.hrir {
        None => None,
        Some(h) => {
            let data = match (h.encoding, h.data) {
                (Encoding::Base64, RealPayload::Base64(s)) => decode_f64(&s)?,
                (Encoding::Inline, RealPayload::Inline(v)) => v,
                (e, _) => return Err(BemError::Format(format!("hrir data does not match encoding {e:?}"))),
            };
            Some(ImpulseResponses {
                sample_rate: h.sample_rate,
                taps: h.taps,
                data,
            })
        }
    };
    let set = HrtfSet {
        directions: doc.directions,
        frequencies: doc.frequencies_hz,
        ears: doc.ears,
        values,
        impulse,
    };
    set.check()?;
    Ok(set)
}

pub fn save_hrtf_json(set: &HrtfSet, path: impl AsRef<Path>, encoding: Encoding) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_hrtf_json(set, encoding)?).map_err(|source| BemError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_hrtf_json(path: impl AsRef<Path>) -> Result<HrtfSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| BemError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_hrtf_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> HrtfSet {
        let directions = vec![GridPoint { az: 0.0, el: 0.0, r: 1.2 }, GridPoint { az: 90.0, el: 15.0, r: 1.2 }];
        let frequencies = vec![100.0, 200.0, 300.0];
        let values = (0..12).map(|i| Complex64::new(i as f64 * 0.1, -1.0 / (i + 1) as f64)).collect();
        HrtfSet::new(directions, frequencies, vec![Ear::Left, Ear::Right], values).unwrap()
    }

    #[test]
    fn round_trip_is_exact_in_both_encodings() {
        let mut set = sample();
        set.impulse = Some(ImpulseResponses { sample_rate: 48000.0, taps: 2, data: vec![0.5, -0.25, 1e-300, 3.0, 0.0, 1.0, 2.0, 7.0] });
        for enc in [Encoding::Base64, Encoding::Inline] {
            let text = to_hrtf_json(&set, enc).unwrap();
            let back = from_hrtf_json(&text).unwrap();
            assert_eq!(back, set);
            assert_eq!(to_hrtf_json(&back, enc).unwrap(), text);
        }
    }

    #[test]
    fn field_order_is_fixed() {
        let text = to_hrtf_json(&sample(), Encoding::Inline).unwrap();
        let keys = ["\"schema\"", "\"frequencies_hz\"", "\"directions\"", "\"ears\"", "\"encoding\"", "\"data\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(text.starts_with("{\"schema\":\"hrtf-json/1\",\"frequencies_hz\":[100.0,200.0,300.0],\"directions\":[{\"az\":0.0,\"el\":0.0,\"r\":1.2}"));
        assert!(text.contains("\"ears\":[\"left\",\"right\"]"));
    }

    #[test]
    fn ordering_is_direction_ear_frequency() {
        let set = sample();
        assert_eq!(set.value(1, 0, 2), set.values[8]);
        assert_eq!(set.spectrum(0, 1), &set.values[3..6]);
    }

    #[test]
    fn malformed_documents_rejected() {
        let good = to_hrtf_json(&sample(), Encoding::Inline).unwrap();
        let wrong_schema = good.replace("hrtf-json/1", "hrtf-json/2");
        assert!(matches!(from_hrtf_json(&wrong_schema), Err(BemError::Format(_))));
        let mismatch = good.replace("\"encoding\":\"inline\"", "\"encoding\":\"base64\"");
        assert!(from_hrtf_json(&mismatch).is_err());
        let extra = good.replacen('{', "{\"extra\":1,", 1);
        assert!(from_hrtf_json(&extra).is_err());
        let mut short = sample();
        short.values.pop();
        assert!(to_hrtf_json(&short, Encoding::Base64).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.json");
        save_hrtf_json(&sample(), &path, Encoding::Base64).unwrap();
        assert_eq!(load_hrtf_json(&path).unwrap(), sample());
        assert!(matches!(load_hrtf_json(dir.path().join("missing.json")), Err(BemError::Io { .. })));
    }
}
