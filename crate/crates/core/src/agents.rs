//! Bot probability scores and the bot/human threshold rule.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AgentId;

/// Default `P(bot)` threshold at or above which an agent is a bot.
pub const DEFAULT_BOT_THRESHOLD: f64 = 0.7;

/// Bot or human. The numeric code is the ego digit of a pattern code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentType {
    Bot,
    Human,
}

impl AgentType {
    pub fn code(self) -> u8 {
        match self {
            AgentType::Bot => 0,
            AgentType::Human => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AgentType::Bot => "bot",
            AgentType::Human => "human",
        }
    }
}

impl fmt::Display for AgentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bot" => Ok(AgentType::Bot),
            "human" => Ok(AgentType::Human),
            other => Err(Error::Input(format!("unknown agent type `{other}`"))),
        }
    }
}

fn check_unit_interval(what: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} {value} is outside [0, 1]")))
    }
}

/// Apply the threshold rule: a scored agent is a bot iff `p_bot >= threshold`;
/// unscored agents are human.
///
/// Out-of-range probabilities are rejected rather than clamped.
pub fn classify_agent(p_bot: Option<f64>, threshold: f64) -> Result<AgentType> {
    check_unit_interval("threshold", threshold)?;
    match p_bot {
        None => Ok(AgentType::Human),
        Some(p) => {
            check_unit_interval("P(bot)", p)?;
            Ok(if p >= threshold {
                AgentType::Bot
            } else {
                AgentType::Human
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentProfile {
    pub id: AgentId,
    pub p_bot: Option<f64>,
    pub agent_type: AgentType,
}

/// All known agent profiles, classified at a fixed threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentRegistry {
    profiles: BTreeMap<AgentId, AgentProfile>,
    threshold: f64,
}

impl Default for AgentRegistry {
    fn default() -> Self {
        Self {
            profiles: BTreeMap::new(),
            threshold: DEFAULT_BOT_THRESHOLD,
        }
    }
}

impl AgentRegistry {
    pub fn new(threshold: f64) -> Result<Self> {
        check_unit_interval("threshold", threshold).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            profiles: BTreeMap::new(),
            threshold,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Insert or replace the profile for `id`. Returns the replaced profile, if any.
    pub fn insert(&mut self, id: AgentId, p_bot: Option<f64>) -> Result<Option<AgentProfile>> {
        let agent_type = classify_agent(p_bot, self.threshold)?;
        let profile = AgentProfile {
            id: id.clone(),
            p_bot,
            agent_type,
        };
        Ok(self.profiles.insert(id, profile))
    }

    pub fn get(&self, id: &str) -> Option<&AgentProfile> {
        self.profiles.get(id)
    }

    /// Agent type of `id`, defaulting to [`AgentType::Human`] for unknown agents.
    pub fn agent_type(&self, id: &str) -> AgentType {
        self.profiles
            .get(id)
            .map_or(AgentType::Human, |p| p.agent_type)
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn profiles(&self) -> impl Iterator<Item = &AgentProfile> {
        self.profiles.values()
    }

    pub fn bot_count(&self) -> usize {
        self.profiles
            .values()
            .filter(|p| p.agent_type == AgentType::Bot)
            .count()
    }

    /// Share of registered agents classified as bots.
    pub fn bot_fraction(&self) -> Result<f64> {
        if self.profiles.is_empty() {
            return Err(Error::UndefinedStatistic(
                "bot fraction of an empty registry".into(),
            ));
        }
        Ok(self.bot_count() as f64 / self.profiles.len() as f64)
    }

    /// Same scores, reclassified at another threshold.
    pub fn with_threshold(&self, threshold: f64) -> Result<Self> {
        let mut out = AgentRegistry::new(threshold)?;
        for p in self.profiles.values() {
            out.insert(p.id.clone(), p.p_bot)?;
        }
        Ok(out)
    }
}
