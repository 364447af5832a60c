//! Body description files.
//!
//! JSON by default, TOML when the file ends in `.toml`; both share one
//! schema and reject unknown keys:
//!
//! ```json
//! {"kind": "p_ellipsoid", "p": 3, "semi_axes": [1.0, 0.5]}
//! {"kind": "ellipsoid", "semi_axes": [4.0, 1.0]}
//! {"kind": "ball", "dimension": 3, "radius": 1.0}
//! ```

use std::path::{Path, PathBuf};

use latstretch_core::ConvexBody;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    PEllipsoid { p: f64, semi_axes: Vec<f64> },
    Ellipsoid { semi_axes: Vec<f64> },
    Ball { dimension: usize, #[serde(default = "unit")] radius: f64 },
}

fn unit() -> f64 {
    1.0
}

impl BodySpec {
    pub fn build(&self) -> latstretch_core::Result<ConvexBody> {
        match self {
            BodySpec::PEllipsoid { p, semi_axes } => ConvexBody::p_ellipsoid(*p, semi_axes.clone()),
            BodySpec::Ellipsoid { semi_axes } => ConvexBody::p_ellipsoid(2.0, semi_axes.clone()),
            BodySpec::Ball { dimension, radius } => ConvexBody::ball(*dimension, *radius),
        }
    }

    pub fn parse_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn parse_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_owned(), source: e })?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml")) {
            Self::parse_toml(&text)
        } else {
            Self::parse_json(&text)
        };
        parsed.map_err(|message| CliError::Body { source_name: path.display().to_string(), message })
    }
}

/// A body given by file or inline JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySource {
    Path(PathBuf),
    Inline(BodySpec),
}

impl BodySource {
    /// Text starting with `{` is inline JSON; anything else is a path.
    pub fn from_arg(arg: &str) -> Result<Self, CliError> {
        if arg.trim_start().starts_with('{') {
            BodySpec::parse_json(arg)
                .map(BodySource::Inline)
                .map_err(|message| CliError::Body { source_name: "inline body".into(), message })
        } else {
            Ok(BodySource::Path(PathBuf::from(arg)))
        }
    }

    pub fn spec(&self) -> Result<BodySpec, CliError> {
        match self {
            BodySource::Path(p) => BodySpec::load(p),
            BodySource::Inline(spec) => Ok(spec.clone()),
        }
    }

    pub fn build(&self) -> Result<ConvexBody, CliError> {
        Ok(self.spec()?.build()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_toml_agree() {
        let j = BodySpec::parse_json(r#"{"kind": "p_ellipsoid", "p": 3, "semi_axes": [1.0, 0.5]}"#).unwrap();
        let t = BodySpec::parse_toml("kind = \"p_ellipsoid\"\np = 3.0\nsemi_axes = [1.0, 0.5]\n").unwrap();
        assert_eq!(j, t);
        let ball = BodySpec::parse_json(r#"{"kind": "ball", "dimension": 3}"#).unwrap();
        assert_eq!(ball, BodySpec::Ball { dimension: 3, radius: 1.0 });
    }

    #[test]
    fn unknown_key_is_named() {
        let err = BodySpec::parse_json(r#"{"kind": "ellipsoid", "semi_axes": [1, 1], "colour": 1}"#).unwrap_err();
        assert!(err.contains("colour"), "{err}");
        let err = BodySpec::parse_toml("kind = \"ellipsoid\"\nsemi_axes = [1.0]\nextra = 2\n").unwrap_err();
        assert!(err.contains("extra"), "{err}");
        assert!(BodySpec::parse_json(r#"{"kind": "cube"}"#).is_err());
    }

    #[test]
    fn inline_or_path() {
        assert!(matches!(BodySource::from_arg(r#"{"kind":"ball","dimension":2}"#).unwrap(), BodySource::Inline(_)));
        assert!(matches!(BodySource::from_arg("disk.json").unwrap(), BodySource::Path(_)));
    }
}
