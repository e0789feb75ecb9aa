//! The sectioned `key = value` input format.
//!
//! ```text
//! [manifold]
//! generator = s1_cross_einstein
//! rho = 1
//! m = -2
//!
//! [checks]
//! qe_residual = 1e-8
//! theorem11
//! killing_integral = killing:1e-6, solution:1e-9
//! ```
//!
//! Lines starting with `#` are comments. Every key remembers its line so
//! later failures can point back into the file.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub section: String,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            // command-line problems have no place in the file
            write!(f, "{}", self.message)
        } else if self.section.is_empty() {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            write!(f, "[{}] line {}: {}", self.section, self.line, self.message)
        }
    }
}

impl std::error::Error for SpecError {}

#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub key: String,
    /// `None` for bare keys such as a check name without overrides.
    pub value: Option<String>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub items: Vec<Item>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.key == key)
    }

    pub fn error(&self, line: usize, message: impl Into<String>) -> SpecError {
        SpecError {
            section: self.name.clone(),
            line,
            message: message.into(),
        }
    }

    /// The value of `item` as a number.
    pub fn number(&self, item: &Item) -> Result<f64, SpecError> {
        let text = item
            .value
            .as_deref()
            .ok_or_else(|| self.error(item.line, format!("'{}' needs a value", item.key)))?;
        parse_number(text).ok_or_else(|| self.error(item.line, format!("'{}' is not a number: {text}", item.key)))
    }

    pub fn text<'a>(&self, item: &'a Item) -> Result<&'a str, SpecError> {
        item.value
            .as_deref()
            .ok_or_else(|| self.error(item.line, format!("'{}' needs a value", item.key)))
    }
}

pub const SECTIONS: [&str; 6] = ["manifold", "algebra", "field", "params", "checks", "grid"];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpecFile {
    pub sections: Vec<Section>,
}

impl SpecFile {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

/// Accepts plain floats plus `pi`, `-pi` and `e`.
pub fn parse_number(text: &str) -> Option<f64> {
    let t = text.trim();
    match t {
        "pi" => Some(std::f64::consts::PI),
        "-pi" => Some(-std::f64::consts::PI),
        "e" => Some(std::f64::consts::E),
        _ => t.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

pub fn parse(text: &str) -> Result<SpecFile, SpecError> {
    let mut spec = SpecFile::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| SpecError {
                section: String::new(),
                line,
                message: format!("malformed section header '{content}'"),
            })?;
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(SpecError {
                    section: name.clone(),
                    line,
                    message: format!("unknown section; expected one of {}", SECTIONS.join(", ")),
                });
            }
            if spec.section(&name).is_some() {
                return Err(SpecError {
                    section: name,
                    line,
                    message: "section appears twice".into(),
                });
            }
            spec.sections.push(Section {
                name,
                line,
                items: Vec::new(),
            });
            continue;
        }
        let section = spec.sections.last_mut().ok_or_else(|| SpecError {
            section: String::new(),
            line,
            message: "entry before any [section] header".into(),
        })?;
        let (key, value) = match content.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim().to_string())),
            None => (content, None),
        };
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(section.error(line, format!("malformed key '{key}'")));
        }
        if value.as_deref() == Some("") {
            return Err(section.error(line, format!("'{key}' has an empty value")));
        }
        // brackets repeat by design; everything else is single-valued
        if key != "bracket" && section.get(key).is_some() {
            return Err(section.error(line, format!("duplicate key '{key}'")));
        }
        section.items.push(Item {
            key: key.to_string(),
            value,
            line,
        });
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_items() {
        let spec = parse("# top\n[manifold]\ngenerator = flat_torus\nn = 3\n\n[checks]\nqe_residual\ntheorem11 = 1e-6\n").unwrap();
        assert_eq!(spec.sections.len(), 2);
        let m = spec.section("manifold").unwrap();
        assert_eq!(m.get("n").unwrap().line, 4);
        let c = spec.section("checks").unwrap();
        assert_eq!(c.items[0].value, None);
        assert_eq!(c.items[1].value.as_deref(), Some("1e-6"));
    }

    #[test]
    fn errors_carry_location() {
        let err = parse("[manifold]\ngenerator\n[oops]\n").unwrap_err();
        assert_eq!((err.section.as_str(), err.line), ("oops", 3));
        let err = parse("n = 2\n").unwrap_err();
        assert_eq!(err.line, 1);
        let err = parse("[grid]\nresolution = 8\nresolution = 16\n").unwrap_err();
        assert_eq!((err.section.as_str(), err.line), ("grid", 3));
        let err = parse("[grid]\nresolution =\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_number(" -2.5 "), Some(-2.5));
        assert_eq!(parse_number("pi"), Some(std::f64::consts::PI));
        assert_eq!(parse_number("inf"), None);
        assert_eq!(parse_number("two"), None);
    }
}
