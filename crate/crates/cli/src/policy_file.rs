//! Policy files.
//!
//! ```toml
//! # (t, state, action) rules, checked after the stationary table
//! rules = [[2, "s1", "stop"]]
//!
//! # same action at every step
//! [stationary]
//! s0 = "play"
//! s1 = "go"
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use qqlearn::{EpisodicModel, Policy};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    #[serde(default)]
    pub stationary: BTreeMap<String, String>,
    #[serde(default)]
    pub rules: Vec<(usize, String, String)>,
}

impl PolicyFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn into_policy(self, model: &EpisodicModel) -> Result<Policy> {
        let mut errs = Vec::new();
        let state_of =
            |label: &str| (0..model.num_states()).find(|&s| model.state_label(s) == label);
        let action_of = |s: usize, label: &str| {
            (0..model.actions(s).len()).find(|&a| model.action_label(s, a) == label)
        };
        let resolve = |state: &str, action: &str, errs: &mut Vec<String>| {
            let Some(s) = state_of(state) else {
                errs.push(format!("unknown state `{state}`"));
                return None;
            };
            let Some(a) = action_of(s, action) else {
                errs.push(format!("state `{state}` has no action `{action}`"));
                return None;
            };
            Some((s, a))
        };

        let mut policy = Policy::empty(model.horizon(), model.num_states());
        for (state, action) in &self.stationary {
            if let Some((s, a)) = resolve(state, action, &mut errs) {
                for t in 1..=model.horizon() {
                    policy.set(t, s, a)?;
                }
            }
        }
        for (t, state, action) in &self.rules {
            if *t == 0 || *t > model.horizon() {
                errs.push(format!("step {t} outside 1..={}", model.horizon()));
                continue;
            }
            if let Some((s, a)) = resolve(state, action, &mut errs) {
                policy.set(*t, s, a)?;
            }
        }
        if errs.is_empty() {
            Ok(policy)
        } else {
            Err(CliError::Invalid(format!(
                "incompatible policy:\n{}",
                errs.join("\n")
            )))
        }
    }
}

pub fn load_policy(path: &Path, model: &EpisodicModel) -> Result<Policy> {
    let text = crate::read_text(path)?;
    PolicyFile::parse(&text, path)?.into_policy(model)
}
