//! `key = value` parameter overrides.
//!
//! Blank lines and `#` comments are ignored. Values are reals.

use thiserror::Error;

use super::{LorenzParams, MicrogridParams};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: `{value}` is not a number")]
    Value { line: usize, value: String },
    #[error("unknown parameter `{0}`")]
    UnknownKey(String),
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

/// Parses override lines in file order.
pub fn parse_overrides(text: &str) -> Result<Vec<(String, f64)>, ConfigError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: idx + 1,
            text: line.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                text: line.to_string(),
            });
        }
        let v: f64 = value.parse().map_err(|_| ConfigError::Value {
            line: idx + 1,
            value: value.to_string(),
        })?;
        out.push((key.to_string(), v));
    }
    Ok(out)
}

impl MicrogridParams {
    /// Applies overrides; keys are matched case-insensitively.
    pub fn apply_overrides(&mut self, overrides: &[(String, f64)]) -> Result<(), ConfigError> {
        for (key, v) in overrides {
            let slot = match key.to_ascii_lowercase().as_str() {
                "v0" => &mut self.v0,
                "omega" => &mut self.omega,
                "g" => &mut self.g,
                "c" => &mut self.c,
                "l" => &mut self.l,
                "is" | "i_s" => &mut self.i_s,
                "n" | "n_ideality" => &mut self.n_ideality,
                "t" | "temperature" => &mut self.temperature,
                "k_b" => &mut self.k_b,
                "q_e" => &mut self.q_e,
                "m" => &mut self.m,
                _ => return Err(ConfigError::UnknownKey(key.clone())),
            };
            *slot = *v;
        }
        self.validate().map_err(ConfigError::Invalid)
    }
}

impl LorenzParams {
    pub fn apply_overrides(&mut self, overrides: &[(String, f64)]) -> Result<(), ConfigError> {
        for (key, v) in overrides {
            match key.to_ascii_lowercase().as_str() {
                "sigma" => self.sigma = *v,
                "rho" => self.rho = *v,
                "beta" => self.beta = *v,
                _ => return Err(ConfigError::UnknownKey(key.clone())),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies() {
        let text = "# loads\nG = 0.02\n\n  V0=120 # volts\nIs = 1e-9\n";
        let ov = parse_overrides(text).unwrap();
        assert_eq!(ov.len(), 3);
        let mut p = MicrogridParams::default();
        p.apply_overrides(&ov).unwrap();
        assert_eq!((p.g, p.v0, p.i_s), (0.02, 120.0, 1e-9));
        assert_eq!(p.c, MicrogridParams::default().c);
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_overrides("a = 1\nnonsense\n").unwrap_err(),
            ConfigError::Syntax { line: 2, text: "nonsense".into() }
        );
        assert_eq!(
            parse_overrides("G = abc").unwrap_err(),
            ConfigError::Value { line: 1, value: "abc".into() }
        );
        let mut p = MicrogridParams::default();
        assert_eq!(
            p.apply_overrides(&[("R".into(), 1.0)]).unwrap_err(),
            ConfigError::UnknownKey("R".into())
        );
        assert!(matches!(
            p.apply_overrides(&[("L".into(), -1.0)]),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn lorenz_overrides() {
        let mut p = LorenzParams::default();
        p.apply_overrides(&parse_overrides("rho = 14").unwrap()).unwrap();
        assert_eq!(p.rho, 14.0);
        assert!(p.apply_overrides(&[("G".into(), 1.0)]).is_err());
    }
}
