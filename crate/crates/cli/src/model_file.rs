//! Text model files.
//!
//! ```toml
//! states = ["s0", "g1", "g2", "g3"]
//! initial = "s0"
//! end_states = ["g1", "g2", "g3"]   # least preferred first
//! horizon = 1
//! transitions = [
//!   ["s0", "play", "g1", 0.5],
//!   ["s0", "play", "g2", 0.2],
//!   ["s0", "play", "g3", 0.3],
//! ]
//!
//! [actions]
//! s0 = ["play"]
//! ```
//!
//! State ids follow the order of `states`; action ids follow the order of
//! each state's list in `actions`. Probability rows are not renormalised.

use std::collections::HashMap;
use std::path::Path;

use qqlearn::{ActionSpec, EpisodicModel, Outcome};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub initial: String,
    pub end_states: Vec<String>,
    pub horizon: usize,
    #[serde(default)]
    pub actions: HashMap<String, Vec<String>>,
    #[serde(default)]
    pub transitions: Vec<(String, String, String, f64)>,
}

impl ModelFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Resolves labels into a model. Label problems are collected and
    /// reported together; structural checks are left to model validation.
    pub fn into_model(self) -> Result<EpisodicModel> {
        let mut errs = Vec::new();
        let mut index = HashMap::new();
        for (s, name) in self.states.iter().enumerate() {
            if index.insert(name.as_str(), s).is_some() {
                errs.push(format!("states: `{name}` listed twice"));
            }
        }
        let lookup = |name: &str, what: &str, errs: &mut Vec<String>| {
            let id = index.get(name).copied();
            if id.is_none() {
                errs.push(format!("{what}: unknown state `{name}`"));
            }
            id
        };

        let initial = lookup(&self.initial, "initial", &mut errs);
        let ends: Vec<usize> = self
            .end_states
            .iter()
            .filter_map(|g| lookup(g, "end_states", &mut errs))
            .collect();

        let mut actions: Vec<Vec<ActionSpec>> = vec![Vec::new(); self.states.len()];
        let mut action_index: HashMap<(usize, &str), usize> = HashMap::new();
        let mut declared: Vec<(&String, &Vec<String>)> = self.actions.iter().collect();
        declared.sort_by_key(|(state, _)| index.get(state.as_str()).copied());
        for (state, names) in declared {
            let Some(s) = lookup(state, "actions", &mut errs) else {
                continue;
            };
            for name in names {
                if action_index
                    .insert((s, name.as_str()), actions[s].len())
                    .is_some()
                {
                    errs.push(format!("actions: `{name}` listed twice for `{state}`"));
                    continue;
                }
                actions[s].push(ActionSpec::new(name.clone(), Vec::new()));
            }
        }

        for (k, (from, action, to, p)) in self.transitions.iter().enumerate() {
            let what = format!("transitions[{k}]");
            let (Some(s), Some(next)) =
                (lookup(from, &what, &mut errs), lookup(to, &what, &mut errs))
            else {
                continue;
            };
            match action_index.get(&(s, action.as_str())) {
                Some(&a) => actions[s][a].outcomes.push(Outcome::new(next, *p)),
                None => errs.push(format!("{what}: `{from}` has no action `{action}`")),
            }
        }

        if !errs.is_empty() {
            return Err(CliError::Invalid(errs.join("\n")));
        }
        Ok(EpisodicModel::new(
            self.states,
            actions,
            initial.expect("checked"),
            ends,
            self.horizon,
        ))
    }
}

pub fn load_model(path: &Path) -> Result<EpisodicModel> {
    let text = crate::read_text(path)?;
    ModelFile::parse(&text, path)?.into_model()
}
