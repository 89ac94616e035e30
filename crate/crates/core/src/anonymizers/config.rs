use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PitchShift,
    Mcadams,
    PoolAverage,
    ConstrainedSample,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::PitchShift => "pitch_shift",
            Method::Mcadams => "mcadams",
            Method::PoolAverage => "pool_average",
            Method::ConstrainedSample => "constrained_sample",
        }
    }

    pub fn is_waveform(self) -> bool {
        matches!(self, Method::PitchShift | Method::Mcadams)
    }

    /// McAdams draws per utterance; the others keep one draw per speaker.
    pub fn default_scope(self) -> Scope {
        match self {
            Method::Mcadams => Scope::PerUtterance,
            _ => Scope::PerSpeaker,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pitch_shift" => Ok(Method::PitchShift),
            "mcadams" => Ok(Method::Mcadams),
            "pool_average" => Ok(Method::PoolAverage),
            "constrained_sample" => Ok(Method::ConstrainedSample),
            other => Err(Error::Configuration(format!("unknown method '{other}'"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    PerSpeaker,
    PerUtterance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnonymizerConfig {
    pub method: Method,
    pub semitone_range: [f64; 2],
    pub mcadams_alpha_range: [f64; 2],
    /// Overrides the random α draw.
    pub mcadams_alpha: Option<f64>,
    /// Overrides the random semitone draw (sign included).
    pub semitones: Option<f64>,
    pub pool_farthest_k: usize,
    pub pool_average_m: usize,
    pub cosine_threshold: f64,
    /// `None` means the method's default scope.
    pub randomization_scope: Option<Scope>,
    pub seed: u64,
}

impl Default for AnonymizerConfig {
    fn default() -> Self {
        Self {
            method: Method::Mcadams,
            semitone_range: [3.0, 5.0],
            mcadams_alpha_range: [0.5, 0.9],
            mcadams_alpha: None,
            semitones: None,
            pool_farthest_k: 200,
            pool_average_m: 100,
            cosine_threshold: 0.7,
            randomization_scope: None,
            seed: 0,
        }
    }
}

impl AnonymizerConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Configuration(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn scope(&self) -> Scope {
        self.randomization_scope.unwrap_or(self.method.default_scope())
    }

    /// Seed for one utterance under this config's method and scope.
    pub fn derived_seed(&self, speaker_id: &str, utt_id: &str) -> u64 {
        let scope_key = match self.scope() {
            Scope::PerSpeaker => "",
            Scope::PerUtterance => utt_id,
        };
        super::derive_seed(self.seed, speaker_id, scope_key, self.method.name())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Configuration(m));
        let [lo, hi] = self.semitone_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("semitone_range must satisfy 0 < lo <= hi, got [{lo}, {hi}]"));
        }
        let [alo, ahi] = self.mcadams_alpha_range;
        if !(alo > 0.0 && alo <= ahi && ahi <= 1.0) {
            return bad(format!("mcadams_alpha_range must lie in (0, 1] with lo <= hi, got [{alo}, {ahi}]"));
        }
        if let Some(a) = self.mcadams_alpha {
            if !(a > 0.0 && a <= 1.0) {
                return bad(format!("mcadams_alpha must lie in (0, 1], got {a}"));
            }
        }
        if let Some(s) = self.semitones {
            if !s.is_finite() {
                return bad("semitones must be finite".into());
            }
        }
        if self.pool_average_m == 0 || self.pool_average_m > self.pool_farthest_k {
            return bad(format!(
                "need 0 < pool_average_m <= pool_farthest_k, got m = {}, k = {}",
                self.pool_average_m, self.pool_farthest_k
            ));
        }
        if !(self.cosine_threshold > -1.0 && self.cosine_threshold < 1.0) {
            return bad(format!("cosine_threshold must lie in (-1, 1), got {}", self.cosine_threshold));
        }
        Ok(())
    }

    /// Checks `m <= k <= pool_size` for the pool method.
    pub fn validate_pool_size(&self, pool_size: usize) -> Result<()> {
        if self.pool_farthest_k > pool_size {
            return Err(Error::Validation(format!(
                "pool of {pool_size} entries is smaller than pool_farthest_k = {}",
                self.pool_farthest_k
            )));
        }
        Ok(())
    }
}
