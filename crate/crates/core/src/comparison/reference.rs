//! Reference architectures: the components a system is expected to contain.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ReferenceError {
    #[error("invalid reference file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("component {index} has an empty name")]
    EmptyName { index: usize },
    #[error("component `{0}` is declared twice")]
    DuplicateComponent(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    #[serde(default)]
    pub layer: u32,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub known_methods: Vec<String>,
}

impl Component {
    pub fn named(name: impl Into<String>) -> Component {
        Component {
            name: name.into(),
            layer: 0,
            aliases: Vec::new(),
            known_methods: Vec::new(),
        }
    }

    /// The name followed by every alias.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.name.as_str()).chain(self.aliases.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceArchitecture {
    pub name: String,
    #[serde(rename = "component", default)]
    pub components: Vec<Component>,
}

impl ReferenceArchitecture {
    pub fn new(
        name: impl Into<String>,
        components: Vec<Component>,
    ) -> Result<ReferenceArchitecture, ReferenceError> {
        let r = ReferenceArchitecture {
            name: name.into(),
            components,
        };
        r.validate()?;
        Ok(r)
    }

    /// Parses a TOML file with a `name` and `[[component]]` tables.
    pub fn from_toml(text: &str) -> Result<ReferenceArchitecture, ReferenceError> {
        let r: ReferenceArchitecture = toml::from_str(text)?;
        r.validate()?;
        Ok(r)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("reference serializes")
    }

    fn validate(&self) -> Result<(), ReferenceError> {
        let mut seen = HashSet::new();
        for (index, c) in self.components.iter().enumerate() {
            if c.name.trim().is_empty() {
                return Err(ReferenceError::EmptyName { index });
            }
            if !seen.insert(c.name.as_str()) {
                return Err(ReferenceError::DuplicateComponent(c.name.clone()));
            }
        }
        Ok(())
    }
}
