//! Grid sweeps over configuration keys.

use rayon::prelude::*;

use super::config::{key_spec, Config, ConfigError, Kind, Section};
use crate::cascaded::entanglement_report;
use crate::pulse::e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Cascaded,
    Pulse,
}

impl Scheme {
    fn section(self) -> Section {
        match self {
            Scheme::Cascaded => Section::Cascaded,
            Scheme::Pulse => Section::Pulse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    ECb,
    EA1b,
    EMb,
    DnB,
    DnA1,
    DnM,
    E12,
    R,
    W,
    Reflectivity,
}

impl Field {
    pub const CASCADED: [Field; 6] = [Field::ECb, Field::EA1b, Field::EMb, Field::DnB, Field::DnA1, Field::DnM];
    pub const PULSE: [Field; 4] = [Field::E12, Field::R, Field::W, Field::Reflectivity];

    pub fn name(self) -> &'static str {
        match self {
            Field::ECb => "E_cb",
            Field::EA1b => "E_a1b",
            Field::EMb => "E_mb",
            Field::DnB => "dn_b",
            Field::DnA1 => "dn_a1",
            Field::DnM => "dn_m",
            Field::E12 => "E_12",
            Field::R => "r",
            Field::W => "W",
            Field::Reflectivity => "R",
        }
    }

    pub fn parse(name: &str) -> Option<Field> {
        Self::CASCADED
            .iter()
            .chain(Self::PULSE.iter())
            .copied()
            .find(|f| f.name() == name)
    }

    fn scheme(self) -> Scheme {
        if Self::CASCADED.contains(&self) {
            Scheme::Cascaded
        } else {
            Scheme::Pulse
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }

    /// Column label: protocol parameters use their symbols, everything else
    /// its key.
    pub fn label(&self) -> &str {
        match self.key.as_str() {
            "pulse_r" => "r",
            "pulse_w" => "W",
            "pulse_reflectivity" => "R",
            k => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scheme: Scheme,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub fixed: Config,
    pub outputs: Vec<Field>,
}

impl SweepSpec {
    pub fn new(
        scheme: Scheme,
        axis1: Axis,
        axis2: Option<Axis>,
        fixed: Config,
        outputs: Vec<Field>,
    ) -> Result<Self, ConfigError> {
        let check = |axis: &Axis, which: &str| -> Result<(), ConfigError> {
            let err = |m: String| ConfigError::Invalid {
                key: format!("sweep_axis{which}"),
                message: m,
            };
            let spec = key_spec(&axis.key).ok_or_else(|| err(format!("unknown key `{}`", axis.key)))?;
            if spec.section != scheme.section() {
                return Err(err(format!("`{}` is not a parameter of this scheme", axis.key)));
            }
            if !matches!(spec.kind, Kind::Number(_) | Kind::AutoNumber(_)) {
                return Err(err(format!("`{}` is not numeric", axis.key)));
            }
            if axis.steps < 2 {
                return Err(err(format!("needs at least 2 steps, got {}", axis.steps)));
            }
            if !(axis.min < axis.max) {
                return Err(err(format!("needs min < max, got [{}, {}]", axis.min, axis.max)));
            }
            let mut probe = fixed.clone();
            for x in [axis.min, axis.max] {
                probe.set_number(&axis.key, x)?;
            }
            Ok(())
        };
        check(&axis1, "1")?;
        if let Some(a2) = &axis2 {
            check(a2, "2")?;
            if a2.key == axis1.key {
                return Err(ConfigError::Invalid {
                    key: "sweep_axis2".into(),
                    message: "both axes vary the same key".into(),
                });
            }
        }
        if outputs.is_empty() {
            return Err(ConfigError::Invalid {
                key: "sweep_outputs".into(),
                message: "no output columns".into(),
            });
        }
        if let Some(f) = outputs.iter().find(|f| f.scheme() != scheme) {
            return Err(ConfigError::Invalid {
                key: "sweep_outputs".into(),
                message: format!("`{}` is not produced by this scheme", f.name()),
            });
        }
        Ok(Self {
            scheme,
            axis1,
            axis2,
            fixed,
            outputs,
        })
    }

    /// Builds the sweep described by the `sweep_*` keys of a configuration.
    pub fn from_config(config: &Config) -> Result<Self, ConfigError> {
        let scheme = match config.text("sweep_scheme") {
            Some("pulse") => Scheme::Pulse,
            _ => Scheme::Cascaded,
        };
        let axis = |i: u8| -> Option<Axis> {
            let key = config.text(&format!("sweep_axis{i}"))?.trim().to_string();
            if key.is_empty() {
                return None;
            }
            Some(Axis {
                key,
                min: config.number(&format!("sweep_min{i}"))?,
                max: config.number(&format!("sweep_max{i}"))?,
                steps: config.number(&format!("sweep_steps{i}"))? as usize,
            })
        };
        let axis1 = axis(1).ok_or_else(|| ConfigError::Invalid {
            key: "sweep_axis1".into(),
            message: "no sweep axis configured".into(),
        })?;
        let outputs = parse_outputs(config.text("sweep_outputs").unwrap_or("all"), scheme)?;
        Self::new(scheme, axis1, axis(2), config.clone(), outputs)
    }

    pub fn with_steps(mut self, steps: usize) -> Result<Self, ConfigError> {
        self.axis1.steps = steps;
        if let Some(a) = self.axis2.as_mut() {
            a.steps = steps;
        }
        Self::new(self.scheme, self.axis1, self.axis2, self.fixed, self.outputs)
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let v1 = self.axis1.values();
        match &self.axis2 {
            None => v1.into_iter().map(|x| vec![x]).collect(),
            Some(a2) => {
                let v2 = a2.values();
                v1.iter().flat_map(|&x| v2.iter().map(move |&y| vec![x, y])).collect()
            }
        }
    }
}

fn parse_outputs(raw: &str, scheme: Scheme) -> Result<Vec<Field>, ConfigError> {
    let raw = raw.trim();
    if raw == "all" || raw.is_empty() {
        return Ok(match scheme {
            Scheme::Cascaded => Field::CASCADED.to_vec(),
            Scheme::Pulse => Field::PULSE.to_vec(),
        });
    }
    raw.split(',')
        .map(|s| {
            let s = s.trim();
            Field::parse(s).ok_or_else(|| ConfigError::Invalid {
                key: "sweep_outputs".into(),
                message: format!("unknown output `{s}`"),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Unstable,
    Unphysical,
    Failed,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Unstable => "unstable",
            Status::Unphysical => "unphysical",
            Status::Failed => "failed",
        }
    }
}

/// One grid point. `values` is aligned with the table's outputs and holds
/// NaN where a quantity is unavailable.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub axes: Vec<f64>,
    pub values: Vec<f64>,
    pub stable: bool,
    pub steady_residual: f64,
    pub lyapunov_residual: f64,
    pub status: Status,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub axis_labels: Vec<String>,
    pub outputs: Vec<Field>,
    /// Grid extent `(axis1 steps, axis2 steps)`; 1-D tables use 1 for the
    /// second entry.
    pub shape: (usize, usize),
    pub rows: Vec<ResultRow>,
}

impl Table {
    pub fn columns(&self) -> Vec<String> {
        self.axis_labels
            .iter()
            .cloned()
            .chain(self.outputs.iter().map(|f| f.name().to_string()))
            .chain(["stable", "steady_residual", "lyapunov_residual", "status"].map(String::from))
            .collect()
    }

    pub fn column(&self, field: Field) -> Option<Vec<f64>> {
        let i = self.outputs.iter().position(|&f| f == field)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }
}

fn failed_row(axes: Vec<f64>, n: usize, message: String) -> ResultRow {
    ResultRow {
        axes,
        values: vec![f64::NAN; n],
        stable: false,
        steady_residual: f64::NAN,
        lyapunov_residual: f64::NAN,
        status: Status::Failed,
        error: Some(message),
    }
}

/// Evaluates one parameter point of a sweep.
pub fn evaluate_point(spec: &SweepSpec, axes: &[f64]) -> ResultRow {
    let n = spec.outputs.len();
    let mut config = spec.fixed.clone();
    let mut keys = vec![&spec.axis1];
    keys.extend(spec.axis2.as_ref());
    for (axis, &x) in keys.iter().zip(axes) {
        if let Err(e) = config.set_number(&axis.key, x) {
            return failed_row(axes.to_vec(), n, e.to_string());
        }
    }
    match spec.scheme {
        Scheme::Cascaded => match entanglement_report(&config.cascaded_params()) {
            Err(e) => failed_row(axes.to_vec(), n, e.to_string()),
            Ok(rep) => {
                let values = spec
                    .outputs
                    .iter()
                    .map(|f| {
                        match f {
                            Field::ECb => rep.e_cb,
                            Field::EA1b => rep.e_a1b,
                            Field::EMb => rep.e_mb,
                            Field::DnB => rep.dn_b,
                            Field::DnA1 => rep.dn_a1,
                            Field::DnM => rep.dn_m,
                            _ => None,
                        }
                        .unwrap_or(f64::NAN)
                    })
                    .collect();
                let status = match (rep.stable, rep.physical) {
                    (false, _) => Status::Unstable,
                    (true, Some(false)) => Status::Unphysical,
                    _ => Status::Ok,
                };
                ResultRow {
                    axes: axes.to_vec(),
                    values,
                    stable: rep.stable,
                    steady_residual: rep.steady_residual,
                    lyapunov_residual: rep.lyapunov_residual.unwrap_or(f64::NAN),
                    status,
                    error: None,
                }
            }
        },
        Scheme::Pulse => {
            let result = config.pulse_params().and_then(|p| Ok((p, e12(&p)?)));
            match result {
                Err(e) => failed_row(axes.to_vec(), n, e.to_string()),
                Ok((p, e)) => ResultRow {
                    axes: axes.to_vec(),
                    values: spec
                        .outputs
                        .iter()
                        .map(|f| match f {
                            Field::E12 => e,
                            Field::R => p.r(),
                            Field::W => p.w(),
                            Field::Reflectivity => p.reflectivity(),
                            _ => f64::NAN,
                        })
                        .collect(),
                    stable: true,
                    steady_residual: f64::NAN,
                    lyapunov_residual: f64::NAN,
                    status: Status::Ok,
                    error: None,
                },
            }
        }
    }
}

/// Evaluates every grid point on a pool of `threads` workers (0 picks the
/// rayon default) and returns rows in row-major order, axis 2 varying
/// fastest. Per-point failures are recorded in the rows.
pub fn run_sweep(spec: &SweepSpec, threads: usize) -> Result<Table, rayon::ThreadPoolBuildError> {
    let points = spec.points();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let rows: Vec<ResultRow> = pool.install(|| points.par_iter().map(|p| evaluate_point(spec, p)).collect());
    for row in &rows {
        if let Some(e) = &row.error {
            log::warn!("point {:?} failed: {e}", row.axes);
        }
    }
    let mut axis_labels = vec![spec.axis1.label().to_string()];
    axis_labels.extend(spec.axis2.as_ref().map(|a| a.label().to_string()));
    Ok(Table {
        axis_labels,
        outputs: spec.outputs.clone(),
        shape: (spec.axis1.steps, spec.axis2.as_ref().map_or(1, |a| a.steps)),
        rows,
    })
}
