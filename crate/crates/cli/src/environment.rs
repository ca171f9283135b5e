use std::path::Path;

use qqlearn::env::{build_example1, build_two_action_toy, build_wwtbam, WwtbamConfig};
use qqlearn::{EpisodicModel, Policy};

use crate::error::{CliError, Result};
use crate::model_file::ModelFile;

/// Names accepted in place of a file path.
pub const BUILT_INS: [&str; 3] = ["wwtbam", "toy", "example1"];

/// A resolved environment.
#[derive(Debug, Clone)]
pub struct Environment {
    pub name: String,
    pub model: EpisodicModel,
    /// The model's own policy, when it has only one.
    pub designated: Option<Policy>,
    /// States already encode the step.
    pub progress_in_state: bool,
}

impl Environment {
    fn plain(name: &str, model: EpisodicModel) -> Self {
        Self {
            name: name.to_string(),
            model,
            designated: None,
            progress_in_state: false,
        }
    }

    fn game_show(name: &str, config: &WwtbamConfig) -> Result<Self> {
        Ok(Self {
            progress_in_state: true,
            ..Self::plain(name, build_wwtbam(config)?)
        })
    }
}

/// Contents of a file given where a model is expected.
#[derive(Debug)]
pub enum ModelSource {
    Model(ModelFile),
    GameShow(WwtbamConfig),
}

impl ModelSource {
    /// Game-show configs are recognised by their `questions` key.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |e: toml::de::Error| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let table: toml::Table = toml::from_str(text).map_err(parse_err)?;
        if table.contains_key("questions") {
            toml::from_str(text)
                .map(ModelSource::GameShow)
                .map_err(parse_err)
        } else {
            toml::from_str(text)
                .map(ModelSource::Model)
                .map_err(parse_err)
        }
    }
}

/// Resolves a built-in name, or a path relative to `base`.
pub fn resolve(name: &str, base: &Path) -> Result<Environment> {
    match name {
        "wwtbam" => Environment::game_show(name, &WwtbamConfig::default()),
        "toy" => Ok(Environment::plain(name, build_two_action_toy())),
        "example1" => {
            let (model, policy) = build_example1();
            Ok(Environment {
                designated: Some(policy),
                ..Environment::plain(name, model)
            })
        }
        _ => {
            let path = base.join(name);
            let text = crate::read_text(&path)?;
            match ModelSource::parse(&text, &path)? {
                ModelSource::Model(file) => Ok(Environment::plain(name, file.into_model()?)),
                ModelSource::GameShow(cfg) => Environment::game_show(name, &cfg),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_ins_resolve() {
        for name in BUILT_INS {
            let env = resolve(name, Path::new(".")).unwrap();
            assert!(env.model.validate().is_clean());
        }
        assert!(resolve("wwtbam", Path::new(".")).unwrap().progress_in_state);
        assert!(resolve("example1", Path::new("."))
            .unwrap()
            .designated
            .is_some());
    }

    #[test]
    fn game_show_files_are_detected() {
        let text =
            "questions = 1\npayouts = [10]\nguarantees = []\nbase_prob = [0.5]\nlifelines = []\n";
        assert!(matches!(
            ModelSource::parse(text, Path::new("g.toml")).unwrap(),
            ModelSource::GameShow(_)
        ));
    }

    #[test]
    fn missing_file_is_a_usage_error() {
        let err = resolve("no/such/file.toml", Path::new(".")).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_USAGE);
    }
}
