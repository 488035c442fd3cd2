//! Canned figure sweeps with the reference parameters built in.

use std::str::FromStr;

use super::config::Config;
use super::sweep::{run_sweep, Axis, Field, Scheme, SweepSpec, Table};

pub const DEFAULT_GRID_2D: usize = 41;
pub const DEFAULT_GRID_1D: usize = 101;

/// Temperature axes of the `3*` figures (K); both share one range so the
/// T1 and T2 sensitivities compare directly.
pub const T1_RANGE: (f64, f64) = (0.0, 0.5);
pub const T2_RANGE: (f64, f64) = (0.0, 0.5);

/// The three (r, W) pairs of the fiber-loss curves.
pub const FIG6_CURVES: [(f64, f64); 3] = [(2.18, 0.95), (1.44, 0.80), (0.95, 0.55)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigId {
    F2a,
    F2b,
    F2c,
    F2d,
    F3a,
    F3b,
    F3c,
    F3d,
    F3e,
    F3f,
    F6,
}

impl FigId {
    pub const ALL: [FigId; 11] = [
        FigId::F2a,
        FigId::F2b,
        FigId::F2c,
        FigId::F2d,
        FigId::F3a,
        FigId::F3b,
        FigId::F3c,
        FigId::F3d,
        FigId::F3e,
        FigId::F3f,
        FigId::F6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigId::F2a => "2a",
            FigId::F2b => "2b",
            FigId::F2c => "2c",
            FigId::F2d => "2d",
            FigId::F3a => "3a",
            FigId::F3b => "3b",
            FigId::F3c => "3c",
            FigId::F3d => "3d",
            FigId::F3e => "3e",
            FigId::F3f => "3f",
            FigId::F6 => "6",
        }
    }

    /// Field shown by the figure's density plot; `None` for the curve
    /// figure.
    pub fn field(self) -> Option<Field> {
        Some(match self {
            FigId::F2a | FigId::F2c | FigId::F3b => Field::EA1b,
            FigId::F2b | FigId::F2d | FigId::F3c => Field::EMb,
            FigId::F3a => Field::ECb,
            FigId::F3d => Field::DnB,
            FigId::F3e => Field::DnA1,
            FigId::F3f => Field::DnM,
            FigId::F6 => return None,
        })
    }
}

impl FromStr for FigId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure `{s}`; expected one of 2a-2d, 3a-3f, 6"))
    }
}

fn axis(key: &str, (min, max): (f64, f64), steps: usize) -> Axis {
    Axis {
        key: key.into(),
        min,
        max,
        steps,
    }
}

/// Sweep behind a density-plot figure.
pub fn fig_spec(id: FigId, grid: usize) -> Option<SweepSpec> {
    let mut config = Config::default();
    let (a1, a2) = match id {
        FigId::F2a | FigId::F2b => (
            axis("delta_c_tilde_rel", (0.0, 2.0), grid),
            axis("delta_1_rel", (-2.0, 0.0), grid),
        ),
        FigId::F2c | FigId::F2d => (
            axis("delta_c_tilde_rel", (0.0, 2.0), grid),
            axis("eta", (0.0, 1.0), grid),
        ),
        FigId::F3a | FigId::F3b | FigId::F3c | FigId::F3d | FigId::F3e | FigId::F3f => {
            config.set_number("eta", 0.9).ok()?;
            config.set_number("delta_c_tilde_rel", 0.75).ok()?;
            (axis("t1", T1_RANGE, grid), axis("t2", T2_RANGE, grid))
        }
        FigId::F6 => return None,
    };
    SweepSpec::new(Scheme::Cascaded, a1, Some(a2), config, Field::CASCADED.to_vec()).ok()
}

/// Runs the figure's sweep. `grid` defaults to 41 per axis for density
/// plots and 101 reflectivity points for the curves.
pub fn run_fig(id: FigId, grid: Option<usize>, threads: usize) -> Result<Table, String> {
    if id != FigId::F6 {
        let spec = fig_spec(id, grid.unwrap_or(DEFAULT_GRID_2D)).ok_or("grid needs at least 2 steps")?;
        return run_sweep(&spec, threads).map_err(|e| e.to_string());
    }
    let steps = grid.unwrap_or(DEFAULT_GRID_1D);
    let mut combined: Option<Table> = None;
    for (r, w) in FIG6_CURVES {
        let mut config = Config::default();
        config.set_number("pulse_r", r).map_err(|e| e.to_string())?;
        config.set_number("pulse_w", w).map_err(|e| e.to_string())?;
        let spec = SweepSpec::new(
            Scheme::Pulse,
            axis("pulse_reflectivity", (0.0, 1.0), steps),
            None,
            config,
            vec![Field::E12],
        )
        .map_err(|e| e.to_string())?;
        let mut t = run_sweep(&spec, threads).map_err(|e| e.to_string())?;
        for row in &mut t.rows {
            row.axes.splice(0..0, [r, w]);
        }
        match combined.as_mut() {
            None => {
                t.axis_labels = vec!["r".into(), "W".into(), "R".into()];
                combined = Some(t);
            }
            Some(c) => {
                c.rows.extend(t.rows);
                c.shape.0 += t.shape.0;
            }
        }
    }
    Ok(combined.expect("three curves"))
}
