//! Flat `key = value` configuration.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Frequencies and rates carry a `_hz` suffix and are ordinary frequencies
//! (the value is `ω/2π`); the two scheme-A detunings are given in units of
//! `ω_b`. Every key has a default, so an empty file is a complete
//! configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::cascaded::CascadedParams;
use crate::pulse::{PulseLabParams, PulseParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    Finite,
    Positive,
    NonNegative,
    UnitInterval,
}

impl Constraint {
    fn check(self, x: f64) -> Result<(), &'static str> {
        let ok = x.is_finite()
            && match self {
                Constraint::Finite => true,
                Constraint::Positive => x > 0.0,
                Constraint::NonNegative => x >= 0.0,
                Constraint::UnitInterval => (0.0..=1.0).contains(&x),
            };
        if ok {
            return Ok(());
        }
        Err(match self {
            Constraint::Finite => "must be a finite number",
            Constraint::Positive => "must be a positive finite number",
            Constraint::NonNegative => "must be a non-negative finite number",
            Constraint::UnitInterval => "must lie in [0, 1]",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Number(Constraint),
    /// Number, or `auto` to derive it from other keys.
    AutoNumber(Constraint),
    /// Integer no smaller than the bound.
    Integer(usize),
    Text(&'static [&'static str]),
    /// Free text (validated by the consumer).
    FreeText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Section {
    Cascaded,
    Pulse,
    Sweep,
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub section: Section,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, section: Section, kind: Kind, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        name,
        section,
        kind,
        default,
        help,
    }
}

use Constraint::*;
use Section::*;

pub const SCHEMES: &[&str] = &["cascaded", "pulse"];

/// Every recognized key, in serialization order.
pub static SCHEMA: &[KeySpec] = &[
    key(
        "omega_b_hz",
        Cascaded,
        Kind::Number(Positive),
        "1e7",
        "megahertz resonator frequency b (Hz)",
    ),
    key(
        "omega_m_hz",
        Cascaded,
        Kind::Number(Positive),
        "8.2e9",
        "gigahertz phonon frequency m (Hz)",
    ),
    key(
        "kappa_c_hz",
        Cascaded,
        Kind::Number(Positive),
        "2e7",
        "linewidth of cavity c (Hz)",
    ),
    key(
        "kappa_a_hz",
        Cascaded,
        Kind::Number(Positive),
        "2e7",
        "linewidth of modes a1 and a2 (Hz)",
    ),
    key(
        "gamma_b_hz",
        Cascaded,
        Kind::Number(Positive),
        "1e3",
        "damping of b (Hz)",
    ),
    key(
        "gamma_m_hz",
        Cascaded,
        Kind::Number(Positive),
        "5e6",
        "damping of m (Hz)",
    ),
    key(
        "g_c_hz",
        Cascaded,
        Kind::Number(NonNegative),
        "100",
        "bare dispersive coupling (Hz)",
    ),
    key(
        "g_hz",
        Cascaded,
        Kind::Number(NonNegative),
        "20",
        "bare triple-resonant coupling (Hz)",
    ),
    key(
        "delta_c_tilde_rel",
        Cascaded,
        Kind::Number(Finite),
        "1",
        "effective detuning of c, in units of omega_b",
    ),
    key(
        "delta_1_rel",
        Cascaded,
        Kind::Number(Finite),
        "-1",
        "detuning of a1, in units of omega_b",
    ),
    key(
        "eta",
        Cascaded,
        Kind::Number(UnitInterval),
        "1",
        "waveguide coupling efficiency",
    ),
    key(
        "target_gc_hz",
        Cascaded,
        Kind::Number(NonNegative),
        "3e6",
        "required |G_c| (Hz)",
    ),
    key(
        "target_g2_hz",
        Cascaded,
        Kind::Number(NonNegative),
        "3e6",
        "required |G_2| (Hz)",
    ),
    key(
        "t1",
        Cascaded,
        Kind::Number(NonNegative),
        "0.01",
        "temperature of the upstream node (K)",
    ),
    key(
        "t2",
        Cascaded,
        Kind::Number(NonNegative),
        "0.01",
        "temperature of the downstream node (K)",
    ),
    key(
        "lambda_c",
        Cascaded,
        Kind::Number(Positive),
        "1.55e-6",
        "wavelength of c (m)",
    ),
    key(
        "lambda_a1",
        Cascaded,
        Kind::Number(Positive),
        "1.55e-6",
        "wavelength of a1 (m)",
    ),
    key(
        "lambda_a2",
        Cascaded,
        Kind::Number(Positive),
        "1.55e-6",
        "wavelength of a2 (m)",
    ),
    key(
        "g0_blue_hz",
        Pulse,
        Kind::Number(Positive),
        "8.25e5",
        "bare coupling of the gigahertz node (Hz)",
    ),
    key(
        "g0_red_hz",
        Pulse,
        Kind::Number(Positive),
        "1.7e3",
        "bare coupling of the megahertz node (Hz)",
    ),
    key(
        "kappa_blue_hz",
        Pulse,
        Kind::Number(Positive),
        "1.3e9",
        "cavity linewidth at the gigahertz node (Hz)",
    ),
    key(
        "kappa_red_hz",
        Pulse,
        Kind::Number(Positive),
        "2e7",
        "cavity linewidth at the megahertz node (Hz)",
    ),
    key(
        "omega_mech_blue_hz",
        Pulse,
        Kind::Number(Positive),
        "5.3e9",
        "gigahertz node frequency = blue pulse detuning (Hz)",
    ),
    key(
        "omega_mech_red_hz",
        Pulse,
        Kind::Number(Positive),
        "1e8",
        "megahertz node frequency = red pulse detuning (Hz)",
    ),
    key(
        "power_blue",
        Pulse,
        Kind::Number(NonNegative),
        "4e-7",
        "blue pulse power (W)",
    ),
    key(
        "power_red",
        Pulse,
        Kind::Number(NonNegative),
        "3.35e-5",
        "red pulse power (W)",
    ),
    key(
        "tau_b",
        Pulse,
        Kind::Number(Positive),
        "1e-5",
        "blue pulse duration (s)",
    ),
    key("tau_r", Pulse, Kind::Number(Positive), "1e-5", "red pulse duration (s)"),
    key(
        "wavelength",
        Pulse,
        Kind::Number(Positive),
        "1.55e-6",
        "pulse carrier wavelength (m)",
    ),
    key(
        "fiber_loss",
        Pulse,
        Kind::Number(NonNegative),
        "0.2",
        "fiber attenuation (dB/km)",
    ),
    key("distance", Pulse, Kind::Number(NonNegative), "0", "fiber length (km)"),
    key(
        "pulse_r",
        Pulse,
        Kind::AutoNumber(NonNegative),
        "auto",
        "squeeze parameter r; auto derives it from the blue pulse",
    ),
    key(
        "pulse_w",
        Pulse,
        Kind::AutoNumber(UnitInterval),
        "auto",
        "transfer efficiency W; auto derives it from the red pulse",
    ),
    key(
        "pulse_reflectivity",
        Pulse,
        Kind::AutoNumber(UnitInterval),
        "auto",
        "fiber reflectivity R; auto derives it from distance and fiber_loss",
    ),
    key(
        "sweep_scheme",
        Sweep,
        Kind::Text(SCHEMES),
        "cascaded",
        "model evaluated by `sweep`: cascaded or pulse",
    ),
    key(
        "sweep_axis1",
        Sweep,
        Kind::FreeText,
        "",
        "numeric key varied along the first axis",
    ),
    key("sweep_min1", Sweep, Kind::Number(Finite), "0", "first axis start"),
    key("sweep_max1", Sweep, Kind::Number(Finite), "1", "first axis end"),
    key("sweep_steps1", Sweep, Kind::Integer(2), "41", "first axis point count"),
    key(
        "sweep_axis2",
        Sweep,
        Kind::FreeText,
        "",
        "numeric key varied along the second axis (empty for 1-D)",
    ),
    key("sweep_min2", Sweep, Kind::Number(Finite), "0", "second axis start"),
    key("sweep_max2", Sweep, Kind::Number(Finite), "1", "second axis end"),
    key("sweep_steps2", Sweep, Kind::Integer(2), "41", "second axis point count"),
    key(
        "sweep_outputs",
        Sweep,
        Kind::FreeText,
        "all",
        "comma-separated output columns, or all",
    ),
];

pub fn key_spec(name: &str) -> Option<&'static KeySpec> {
    SCHEMA.iter().find(|k| k.name == name)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Integer(usize),
    Auto,
    Text(String),
}

impl Value {
    fn parse(spec: &KeySpec, raw: &str) -> Result<Self, ConfigError> {
        let raw = raw.trim();
        let number = |c: Constraint| -> Result<f64, ConfigError> {
            let x: f64 = raw
                .parse()
                .map_err(|_| invalid(spec.name, format!("`{raw}` is not a number")))?;
            c.check(x).map_err(|m| invalid(spec.name, format!("{x} {m}")))?;
            Ok(x)
        };
        match spec.kind {
            Kind::Number(c) => Ok(Value::Number(number(c)?)),
            Kind::AutoNumber(c) => {
                if raw == "auto" {
                    Ok(Value::Auto)
                } else {
                    Ok(Value::Number(number(c)?))
                }
            }
            Kind::Integer(min) => {
                let n: usize = raw
                    .parse()
                    .map_err(|_| invalid(spec.name, format!("`{raw}` is not a non-negative integer")))?;
                if n < min {
                    return Err(invalid(spec.name, format!("{n} is below the minimum {min}")));
                }
                Ok(Value::Integer(n))
            }
            Kind::Text(choices) => {
                if choices.contains(&raw) {
                    Ok(Value::Text(raw.to_string()))
                } else {
                    Err(invalid(spec.name, format!("`{raw}` is not one of {choices:?}")))
                }
            }
            Kind::FreeText => Ok(Value::Text(raw.to_string())),
        }
    }

    fn render(&self) -> String {
        match self {
            Value::Number(x) => format!("{x:e}"),
            Value::Integer(n) => n.to_string(),
            Value::Auto => "auto".into(),
            Value::Text(s) => s.clone(),
        }
    }
}

/// A complete, validated configuration: every schema key has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<&'static str, Value>,
}

impl Default for Config {
    fn default() -> Self {
        let values = SCHEMA
            .iter()
            .map(|k| (k.name, Value::parse(k, k.default).expect("schema defaults parse")))
            .collect();
        Self { values }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = Config::default();
        let mut seen = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            let k = k.trim();
            let spec = key_spec(k).ok_or_else(|| ConfigError::UnknownKey {
                line,
                key: k.to_string(),
            })?;
            if seen.insert(spec.name, line).is_some() {
                return Err(ConfigError::Duplicate {
                    line,
                    key: k.to_string(),
                });
            }
            let value = Value::parse(spec, v).map_err(|e| match e {
                ConfigError::Invalid { key, message } => ConfigError::Invalid {
                    key,
                    message: format!("{message} (line {line})"),
                },
                other => other,
            })?;
            config.values.insert(spec.name, value);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Every key, one per line, grouped by section.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut section = None;
        for spec in SCHEMA {
            if section != Some(spec.section) {
                if section.is_some() {
                    out.push('\n');
                }
                let title = match spec.section {
                    Section::Cascaded => "cascaded steady-state model",
                    Section::Pulse => "pulsed protocol",
                    Section::Sweep => "sweep",
                };
                let _ = writeln!(out, "# {title}");
                section = Some(spec.section);
            }
            let _ = writeln!(out, "{} = {}", spec.name, self.values[spec.name].render());
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        match self.values.get(key)? {
            Value::Number(x) => Some(*x),
            Value::Integer(n) => Some(*n as f64),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.values.get(key)? {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Sets a numeric key, checking it against the schema.
    pub fn set_number(&mut self, key: &str, x: f64) -> Result<(), ConfigError> {
        let spec = key_spec(key).ok_or_else(|| invalid(key, "unknown key"))?;
        let c = match spec.kind {
            Kind::Number(c) | Kind::AutoNumber(c) => c,
            _ => return Err(invalid(key, "not a numeric key")),
        };
        c.check(x).map_err(|m| invalid(key, format!("{x} {m}")))?;
        self.values.insert(spec.name, Value::Number(x));
        Ok(())
    }

    pub fn set_text(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        let spec = key_spec(key).ok_or_else(|| invalid(key, "unknown key"))?;
        let value = Value::parse(spec, raw)?;
        self.values.insert(spec.name, value);
        Ok(())
    }

    fn hz(&self, key: &str) -> f64 {
        2.0 * PI * self.number(key).expect("numeric key")
    }

    fn num(&self, key: &str) -> f64 {
        self.number(key).expect("numeric key")
    }

    pub fn cascaded_params(&self) -> CascadedParams {
        let omega_b = self.hz("omega_b_hz");
        CascadedParams {
            omega_b,
            omega_m: self.hz("omega_m_hz"),
            kappa_c: self.hz("kappa_c_hz"),
            kappa_a: self.hz("kappa_a_hz"),
            gamma_b: self.hz("gamma_b_hz"),
            gamma_m: self.hz("gamma_m_hz"),
            g_c: self.hz("g_c_hz"),
            g: self.hz("g_hz"),
            delta_c_tilde: self.num("delta_c_tilde_rel") * omega_b,
            delta_1: self.num("delta_1_rel") * omega_b,
            eta: self.num("eta"),
            target_gc: self.hz("target_gc_hz"),
            target_g2: self.hz("target_g2_hz"),
            t1: self.num("t1"),
            t2: self.num("t2"),
            lambda_c: self.num("lambda_c"),
            lambda_a1: self.num("lambda_a1"),
            lambda_a2: self.num("lambda_a2"),
        }
    }

    pub fn pulse_lab_params(&self) -> PulseLabParams {
        PulseLabParams {
            g0_blue: self.hz("g0_blue_hz"),
            g0_red: self.hz("g0_red_hz"),
            kappa_blue: self.hz("kappa_blue_hz"),
            kappa_red: self.hz("kappa_red_hz"),
            omega_mech_blue: self.hz("omega_mech_blue_hz"),
            omega_mech_red: self.hz("omega_mech_red_hz"),
            power_blue: self.num("power_blue"),
            power_red: self.num("power_red"),
            tau_b: self.num("tau_b"),
            tau_r: self.num("tau_r"),
            wavelength: self.num("wavelength"),
            fiber_loss: self.num("fiber_loss"),
            distance: self.num("distance"),
        }
    }

    /// Protocol parameters: explicit `pulse_*` values win over the ones
    /// derived from the lab description.
    pub fn pulse_params(&self) -> crate::Result<PulseParams> {
        let explicit = |k: &str| self.number(k);
        let all_explicit = ["pulse_r", "pulse_w", "pulse_reflectivity"]
            .iter()
            .all(|k| explicit(k).is_some());
        let derived = if all_explicit {
            None
        } else {
            Some(self.pulse_lab_params().derive()?.params)
        };
        let pick = |k: &str, f: fn(&PulseParams) -> f64| {
            explicit(k).unwrap_or_else(|| f(derived.as_ref().expect("derived when not explicit")))
        };
        PulseParams::new(
            pick("pulse_r", PulseParams::r),
            pick("pulse_w", PulseParams::w),
            pick("pulse_reflectivity", PulseParams::reflectivity),
        )
    }

    /// Cross-key checks beyond the per-key constraints.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.cascaded_params()
            .validate()
            .map_err(|e| invalid("cascaded parameters", e.to_string()))?;
        self.pulse_lab_params()
            .validate()
            .map_err(|e| invalid("pulse parameters", e.to_string()))?;
        Ok(())
    }
}

/// Human-readable listing of every key with its default and meaning.
pub fn schema_listing() -> String {
    let mut out = String::from("Configuration keys (key = default: meaning):\n");
    for spec in SCHEMA {
        let _ = writeln!(out, "  {} = {}: {}", spec.name, spec.default, spec.help);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_config_gives_reference_parameters() {
        let c = Config::parse("").unwrap();
        let p = c.cascaded_params();
        let d = CascadedParams::default();
        let pairs = [
            (p.omega_b, d.omega_b),
            (p.omega_m, d.omega_m),
            (p.kappa_c, d.kappa_c),
            (p.kappa_a, d.kappa_a),
            (p.gamma_b, d.gamma_b),
            (p.gamma_m, d.gamma_m),
            (p.g_c, d.g_c),
            (p.g, d.g),
            (p.delta_c_tilde, d.delta_c_tilde),
            (p.delta_1, d.delta_1),
            (p.eta, d.eta),
            (p.target_gc, d.target_gc),
            (p.target_g2, d.target_g2),
            (p.t1, d.t1),
            (p.t2, d.t2),
            (p.lambda_c, d.lambda_c),
        ];
        for (a, b) in pairs {
            assert_relative_eq!(a, b, max_relative = 1e-15);
        }
        assert_eq!(p.kappa_c, 2.0 * p.omega_b);
        let lab = c.pulse_lab_params();
        let dl = PulseLabParams::default();
        assert_relative_eq!(lab.g0_blue, dl.g0_blue, max_relative = 1e-15);
        assert_relative_eq!(lab.kappa_red, dl.kappa_red, max_relative = 1e-15);
        assert_eq!(lab.distance, 0.0);
    }

    #[test]
    fn comments_and_whitespace() {
        let c = Config::parse("# header\n\n  eta = 0.5   # trailing\nt1=0.02\n").unwrap();
        assert_eq!(c.number("eta"), Some(0.5));
        assert_eq!(c.number("t1"), Some(0.02));
    }

    #[test]
    fn out_of_range_eta_names_the_key() {
        let err = Config::parse("eta = 1.5").unwrap_err();
        match err {
            ConfigError::Invalid { key, message } => {
                assert_eq!(key, "eta");
                assert!(message.contains("line 1"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        assert!(matches!(
            Config::parse("eta = 1\nnonsense\n"),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            Config::parse("\n\nfoo = 1"),
            Err(ConfigError::UnknownKey { line: 3, .. })
        ));
        assert!(matches!(
            Config::parse("t1 = 1\nt1 = 2"),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(Config::parse("t1 = warm"), Err(ConfigError::Invalid { .. })));
        assert!(Config::parse("sweep_steps1 = 1").is_err());
        assert!(Config::parse("sweep_scheme = other").is_err());
        assert!(Config::parse("t2 = NaN").is_err());
        assert!(Config::parse("kappa_c_hz = inf").is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let text = "eta = 0.123456789012345678\nomega_b_hz = 1.0000000000000002e7\n\
                    pulse_r = 0.7\ndelta_1_rel = -0.3\nsweep_axis1 = eta\nt2 = 3.3e-3\n";
        let a = Config::parse(text).unwrap();
        let b = Config::parse(&a.serialize()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.serialize(), b.serialize());
        let d = Config::default();
        assert_eq!(Config::parse(&d.serialize()).unwrap(), d);
    }

    #[test]
    fn listing_mentions_every_key() {
        let listing = schema_listing();
        for spec in SCHEMA {
            assert!(listing.contains(spec.name));
        }
    }

    #[test]
    fn explicit_pulse_values_override_derivation() {
        let c = Config::parse("pulse_r = 0.5\npulse_w = 0.7\npulse_reflectivity = 0.1").unwrap();
        let p = c.pulse_params().unwrap();
        assert_eq!((p.r(), p.w(), p.reflectivity()), (0.5, 0.7, 0.1));
        let c = Config::parse("pulse_w = 0.7\ndistance = 50").unwrap();
        let p = c.pulse_params().unwrap();
        assert!((p.r() - 2.17).abs() < 0.02);
        assert_eq!(p.w(), 0.7);
        assert_relative_eq!(p.reflectivity(), 0.9, max_relative = 1e-14);
    }
}
