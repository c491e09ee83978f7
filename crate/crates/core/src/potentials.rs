//! Log-linear emission, transition, and pattern potentials.
//!
//! All three potential families are linear in a sparse feature
//! representation: each `log_*` score is exactly the sum of the weights of
//! its active features, and the feature enumerators here are the single
//! source of truth for which features those are. Gradients are expected
//! minus observed counts of the same features, which keeps the training
//! objective convex.
//!
//! Positions are 1-based throughout, matching the match-position
//! convention of the automata layer. Window slots that fall outside the
//! input are filled with the reserved pad token.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};

/// Feature-template configuration shared by training and decoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Emission window half-width: offsets `-r..=r` around the position.
    #[serde(default = "default_radius")]
    pub emission_window_radius: usize,
    /// 1-based input positions whose token identity is exposed to every
    /// pattern potential as a global feature.
    #[serde(default = "default_anchors")]
    pub global_anchor_positions: Vec<usize>,
    /// Ascending boundary list for bucketing firing positions. Empty means
    /// exact positions up to `max_position`.
    #[serde(default)]
    pub position_buckets: Vec<usize>,
    /// Half-width of the input window around a pattern's firing position;
    /// zero disables the template. Lets a pattern potential see nearby
    /// input tokens the same way emissions do, which matters when the
    /// evidence for a match sits inside the matched span rather than at a
    /// fixed global position.
    #[serde(default)]
    pub pattern_window_radius: usize,
    /// Reserved token for window slots outside the input.
    #[serde(default = "default_pad")]
    pub pad_symbol: char,
    /// Largest position seen in training; later positions share its
    /// bucket. Zero means "not calibrated yet" and leaves positions as-is.
    #[serde(default)]
    pub max_position: usize,
}

fn default_radius() -> usize {
    1
}

fn default_anchors() -> Vec<usize> {
    vec![1]
}

fn default_pad() -> char {
    '#'
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            emission_window_radius: default_radius(),
            global_anchor_positions: default_anchors(),
            position_buckets: Vec::new(),
            pattern_window_radius: 0,
            pad_symbol: default_pad(),
            max_position: 0,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.emission_window_radius > 4 {
            return Err(Error::Data(
                "emission window radius must be at most 4".into(),
            ));
        }
        if self.global_anchor_positions.iter().any(|&p| p == 0) {
            return Err(Error::Data("anchor positions are 1-based".into()));
        }
        if self.position_buckets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Data(
                "position bucket boundaries must be strictly ascending".into(),
            ));
        }
        if self.pattern_window_radius > 8 {
            return Err(Error::Data(
                "pattern window radius must be at most 8".into(),
            ));
        }
        Ok(())
    }

    /// The bucket of firing position `i`.
    pub fn bucket_of(&self, i: usize) -> usize {
        if self.position_buckets.is_empty() {
            if self.max_position > 0 {
                i.min(self.max_position)
            } else {
                i
            }
        } else {
            self.position_buckets.iter().filter(|&&b| b <= i).count()
        }
    }

    /// Token at 1-based position `pos`, padding outside the input.
    fn token_at(&self, x: &[char], pos: i64) -> char {
        if pos >= 1 && pos <= x.len() as i64 {
            x[(pos - 1) as usize]
        } else {
            self.pad_symbol
        }
    }

    /// Active emission features for labeling position `i` of `x` with
    /// `label`: one `(offset, token, label)` feature per window slot.
    pub fn emission_features(&self, x: &[char], label: char, i: usize) -> Vec<Feature> {
        assert!(i >= 1 && i <= x.len(), "position out of range");
        let r = self.emission_window_radius as i64;
        (-r..=r)
            .map(|offset| Feature::Emission {
                offset,
                token: self.token_at(x, i as i64 + offset),
                label,
            })
            .collect()
    }

    /// The single transition feature for the adjacent pair `(a, b)`.
    pub fn transition_feature(&self, a: char, b: char) -> Feature {
        Feature::Transition { prev: a, next: b }
    }

    /// Active pattern features for pattern `pattern` firing at position
    /// `i`: its bias, one anchor feature per anchor position, its position
    /// bucket, and (when enabled) one window feature per slot around the
    /// firing position.
    pub fn pattern_features(&self, x: &[char], pattern: usize, i: usize) -> Vec<Feature> {
        let mut out = Vec::with_capacity(
            2 + self.global_anchor_positions.len() + 2 * self.pattern_window_radius,
        );
        out.push(Feature::PatternBias { pattern });
        for &p in &self.global_anchor_positions {
            out.push(Feature::PatternAnchor {
                pattern,
                position: p,
                token: self.token_at(x, p as i64),
            });
        }
        out.push(Feature::PatternBucket {
            pattern,
            bucket: self.bucket_of(i),
        });
        let r = self.pattern_window_radius as i64;
        for offset in -r..=r {
            out.push(Feature::PatternWindow {
                pattern,
                offset,
                token: self.token_at(x, i as i64 + offset),
            });
        }
        out
    }
}

/// One weight coordinate of the model.
///
/// Renders as (and parses from) a `kind|field|field|field` string key,
/// which is the representation used in model files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    /// Adjacent-label pair weight.
    Transition { prev: char, next: char },
    /// Windowed input-token weight for one label.
    Emission { offset: i64, token: char, label: char },
    /// Per-pattern firing bias.
    PatternBias { pattern: usize },
    /// Pattern firing conditioned on the token at a fixed input position.
    PatternAnchor {
        pattern: usize,
        position: usize,
        token: char,
    },
    /// Pattern firing conditioned on the bucketed firing position.
    PatternBucket { pattern: usize, bucket: usize },
    /// Pattern firing conditioned on an input token near the firing
    /// position.
    PatternWindow {
        pattern: usize,
        offset: i64,
        token: char,
    },
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Transition { prev, next } => write!(f, "transition|{prev}|{next}"),
            Feature::Emission {
                offset,
                token,
                label,
            } => write!(f, "emission|{offset}|{token}|{label}"),
            Feature::PatternBias { pattern } => write!(f, "bias|{pattern}"),
            Feature::PatternAnchor {
                pattern,
                position,
                token,
            } => write!(f, "anchor|{pattern}|{position}|{token}"),
            Feature::PatternBucket { pattern, bucket } => {
                write!(f, "posbucket|{pattern}|{bucket}")
            }
            Feature::PatternWindow {
                pattern,
                offset,
                token,
            } => write!(f, "patwin|{pattern}|{offset}|{token}"),
        }
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Data(format!("malformed feature key {s:?}"));
        let parts: Vec<&str> = s.split('|').collect();
        let one_char = |p: &str| -> Result<char> {
            let mut it = p.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(bad()),
            }
        };
        match parts.as_slice() {
            ["transition", a, b] => Ok(Feature::Transition {
                prev: one_char(a)?,
                next: one_char(b)?,
            }),
            ["emission", offset, token, label] => Ok(Feature::Emission {
                offset: offset.parse().map_err(|_| bad())?,
                token: one_char(token)?,
                label: one_char(label)?,
            }),
            ["bias", pattern] => Ok(Feature::PatternBias {
                pattern: pattern.parse().map_err(|_| bad())?,
            }),
            ["anchor", pattern, position, token] => Ok(Feature::PatternAnchor {
                pattern: pattern.parse().map_err(|_| bad())?,
                position: position.parse().map_err(|_| bad())?,
                token: one_char(token)?,
            }),
            ["posbucket", pattern, bucket] => Ok(Feature::PatternBucket {
                pattern: pattern.parse().map_err(|_| bad())?,
                bucket: bucket.parse().map_err(|_| bad())?,
            }),
            ["patwin", pattern, offset, token] => Ok(Feature::PatternWindow {
                pattern: pattern.parse().map_err(|_| bad())?,
                offset: offset.parse().map_err(|_| bad())?,
                token: one_char(token)?,
            }),
            _ => Err(bad()),
        }
    }
}

/// All model weights, in log space.
///
/// The transition table is dense over the label alphabet; emission and
/// pattern weights live in lazily grown sparse maps where a missing
/// feature weighs zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    labels: Vec<char>,
    transition: Vec<f64>,
    emission: BTreeMap<Feature, f64>,
    pattern: BTreeMap<Feature, f64>,
}

impl ModelParams {
    /// Fresh all-zero parameters over the given label alphabet.
    pub fn new(alphabet: &Alphabet) -> Self {
        let n = alphabet.len();
        Self {
            labels: alphabet.symbols().to_vec(),
            transition: vec![0.0; n * n],
            emission: BTreeMap::new(),
            pattern: BTreeMap::new(),
        }
    }

    pub fn labels(&self) -> &[char] {
        &self.labels
    }

    fn label_id(&self, c: char) -> usize {
        self.labels
            .iter()
            .position(|&l| l == c)
            .unwrap_or_else(|| panic!("label '{c}' is not in the model alphabet"))
    }

    /// Transition log-potential for the adjacent pair `(a, b)`.
    pub fn log_transition(&self, a: char, b: char) -> f64 {
        self.transition[self.label_id(a) * self.labels.len() + self.label_id(b)]
    }

    /// Transition log-potential by label ids.
    pub fn log_transition_ids(&self, a: usize, b: usize) -> f64 {
        self.transition[a * self.labels.len() + b]
    }

    /// Emission log-potential for labeling position `i` (1-based) of `x`
    /// with `label`: the sum of all active window-feature weights.
    pub fn log_emission(&self, config: &FeatureConfig, x: &[char], label: char, i: usize) -> f64 {
        config
            .emission_features(x, label, i)
            .iter()
            .map(|f| self.get(f))
            .sum()
    }

    /// Pattern log-potential for `pattern` firing at position `i`.
    pub fn log_pattern(&self, config: &FeatureConfig, x: &[char], pattern: usize, i: usize) -> f64 {
        config
            .pattern_features(x, pattern, i)
            .iter()
            .map(|f| self.get(f))
            .sum()
    }

    /// The weight of one feature; missing features weigh zero.
    pub fn get(&self, feature: &Feature) -> f64 {
        match feature {
            Feature::Transition { prev, next } => self.log_transition(*prev, *next),
            Feature::Emission { .. } => self.emission.get(feature).copied().unwrap_or(0.0),
            _ => self.pattern.get(feature).copied().unwrap_or(0.0),
        }
    }

    /// Sets one weight, growing the sparse maps as needed.
    pub fn set(&mut self, feature: Feature, value: f64) {
        match feature {
            Feature::Transition { prev, next } => {
                let idx = self.label_id(prev) * self.labels.len() + self.label_id(next);
                self.transition[idx] = value;
            }
            Feature::Emission { .. } => {
                self.emission.insert(feature, value);
            }
            _ => {
                self.pattern.insert(feature, value);
            }
        }
    }

    pub fn add(&mut self, feature: Feature, delta: f64) {
        let v = self.get(&feature);
        self.set(feature, v + delta);
    }

    /// Every stored coordinate, transitions first (row-major over the
    /// label order), then the sparse maps in key order.
    pub fn iter_all(&self) -> impl Iterator<Item = (Feature, f64)> + '_ {
        let n = self.labels.len();
        let trans = (0..n * n).map(move |idx| {
            (
                Feature::Transition {
                    prev: self.labels[idx / n],
                    next: self.labels[idx % n],
                },
                self.transition[idx],
            )
        });
        trans
            .chain(self.emission.iter().map(|(f, &v)| (*f, v)))
            .chain(self.pattern.iter().map(|(f, &v)| (*f, v)))
    }

    pub fn emission_weights(&self) -> &BTreeMap<Feature, f64> {
        &self.emission
    }

    pub fn pattern_weights(&self) -> &BTreeMap<Feature, f64> {
        &self.pattern
    }

    /// Squared Euclidean norm over every stored coordinate.
    pub fn l2_norm_sq(&self) -> f64 {
        self.iter_all().map(|(_, v)| v * v).sum()
    }

    /// All stored weights are finite.
    pub fn is_finite(&self) -> bool {
        self.iter_all().all(|(_, v)| v.is_finite())
    }
}
