//! Flat `key = value` experiment configuration.

use std::path::Path;

use crate::error::{Error, Result};
use crate::sketch::SketchConfig;

use super::signal::{HeadShape, TailShape};

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub n: u64,
    pub k: usize,
    pub eps: f64,
    pub trials: usize,
    pub seed: u64,
    pub head: HeadShape,
    pub tail: TailShape,
    pub tail_mass: f64,
    /// Scale each signal so its tail has unit l1 mass before sketching.
    pub normalize: bool,
    /// Nonzero makes the decoder use a different schedule than the encoder,
    /// which every trial must reject.
    pub recover_seed_offset: u64,
    pub sketch: SketchConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            n: 1 << 14,
            k: 8,
            eps: 0.25,
            trials: 100,
            seed: 0,
            head: HeadShape::Geometric { start: 1.0, ratio: 0.75 },
            tail: TailShape::Uniform { support: None },
            tail_mass: 1.0,
            normalize: true,
            recover_seed_offset: 0,
            sketch: SketchConfig::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parameter(format!("{key}: cannot parse {value:?}")))
}

fn parse_support(key: &str, value: &str) -> Result<Option<usize>> {
    if value == "all" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

impl HarnessConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = HarnessConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        HarnessConfig::from_text(&std::fs::read_to_string(path)?)
    }

    /// Set one key. Head and tail shape keys may arrive in any order: the
    /// shape keys reset their parameters to defaults, so list them first.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "eps" => self.eps = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "tail_mass" => self.tail_mass = parse(key, value)?,
            "normalize" => self.normalize = parse(key, value)?,
            "recover_seed_offset" => self.recover_seed_offset = parse(key, value)?,
            "head" => {
                self.head = match value {
                    "flat" => HeadShape::Flat { value: 1.0 },
                    "geometric" => HeadShape::Geometric { start: 1.0, ratio: 0.75 },
                    "spikes" => HeadShape::Spikes { values: Vec::new() },
                    _ => return Err(Error::Parameter(format!("unknown head shape {value}"))),
                }
            }
            "head_value" => match &mut self.head {
                HeadShape::Flat { value: v } => *v = parse(key, value)?,
                _ => return Err(Error::Parameter("head_value needs head = flat".into())),
            },
            "head_start" => match &mut self.head {
                HeadShape::Geometric { start, .. } => *start = parse(key, value)?,
                _ => return Err(Error::Parameter("head_start needs head = geometric".into())),
            },
            "head_ratio" => match &mut self.head {
                HeadShape::Geometric { ratio, .. } => *ratio = parse(key, value)?,
                _ => return Err(Error::Parameter("head_ratio needs head = geometric".into())),
            },
            "head_spikes" => match &mut self.head {
                HeadShape::Spikes { values } => {
                    *values = value
                        .split(',')
                        .map(|v| parse(key, v.trim()))
                        .collect::<Result<_>>()?
                }
                _ => return Err(Error::Parameter("head_spikes needs head = spikes".into())),
            },
            "tail" => {
                self.tail = match value {
                    "uniform" => TailShape::Uniform { support: None },
                    "geometric" => TailShape::Geometric { ratio: 0.5, support: None },
                    "adversarial" => TailShape::AdversarialSameBucket { per_head: 4 },
                    _ => return Err(Error::Parameter(format!("unknown tail shape {value}"))),
                }
            }
            "tail_support" => match &mut self.tail {
                TailShape::Uniform { support } | TailShape::Geometric { support, .. } => {
                    *support = parse_support(key, value)?
                }
                _ => return Err(Error::Parameter("tail_support needs a uniform or geometric tail".into())),
            },
            "tail_ratio" => match &mut self.tail {
                TailShape::Geometric { ratio, .. } => *ratio = parse(key, value)?,
                _ => return Err(Error::Parameter("tail_ratio needs tail = geometric".into())),
            },
            "tail_per_head" => match &mut self.tail {
                TailShape::AdversarialSameBucket { per_head } => *per_head = parse(key, value)?,
                _ => return Err(Error::Parameter("tail_per_head needs tail = adversarial".into())),
            },
            _ => self.sketch.set(key, value)?,
        }
        Ok(())
    }

    /// Every setting as `(key, value)`, in a fixed order, for report provenance.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        push("n", self.n.to_string());
        push("k", self.k.to_string());
        push("eps", self.eps.to_string());
        push("trials", self.trials.to_string());
        push("seed", self.seed.to_string());
        match &self.head {
            HeadShape::Flat { value } => {
                push("head", "flat".into());
                push("head_value", value.to_string());
            }
            HeadShape::Geometric { start, ratio } => {
                push("head", "geometric".into());
                push("head_start", start.to_string());
                push("head_ratio", ratio.to_string());
            }
            HeadShape::Spikes { values } => {
                push("head", "spikes".into());
                let list: Vec<String> = values.iter().map(f64::to_string).collect();
                push("head_spikes", list.join(","));
            }
        }
        let support = |s: &Option<usize>| s.map_or("all".to_string(), |v| v.to_string());
        match &self.tail {
            TailShape::Uniform { support: s } => {
                push("tail", "uniform".into());
                push("tail_support", support(s));
            }
            TailShape::Geometric { ratio, support: s } => {
                push("tail", "geometric".into());
                push("tail_ratio", ratio.to_string());
                push("tail_support", support(s));
            }
            TailShape::AdversarialSameBucket { per_head } => {
                push("tail", "adversarial".into());
                push("tail_per_head", per_head.to_string());
            }
        }
        push("tail_mass", self.tail_mass.to_string());
        push("normalize", self.normalize.to_string());
        push("recover_seed_offset", self.recover_seed_offset.to_string());
        let c = &self.sketch;
        for (k, v) in [
            ("c1", c.c1),
            ("c2", c.c2),
            ("c3", c.c3),
            ("c4", c.c4),
            ("c5", c.c5),
            ("c6", c.c6),
            ("c7", c.c7),
            ("c_heavy", c.c_heavy),
            ("round_decay", c.round_decay),
            ("upfal_alpha", c.upfal_alpha),
            ("zeta", c.zeta),
            ("bfs_c", c.bfs_c),
        ] {
            push(k, v.to_string());
        }
        push("delta", c.delta.to_string());
        out
    }

    pub fn to_text(&self) -> String {
        self.pairs().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
