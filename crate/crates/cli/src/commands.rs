use std::path::{Path, PathBuf};

use bentring_core::experiments::{
    builtin_cases, compare_report, round_significant, ExperimentCase, REPRODUCTION_TOLERANCE,
};
use bentring_core::{
    chi_crystal, extrema, mean_reflection_numeric, mean_reflection_refined, mean_reflection_rough,
    orbiting_check, ray_trace, reflection_condition, sweep, sweep_refined, DeflectionCurve, Mode,
};
use clap::ValueEnum;
use serde::Serialize;

use crate::input::Input;
use crate::Failure;

/// Largest closed-form versus ray-trace deviation accepted by `oracle-check`.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

/// Sampled impact parameters are kept at least this far from critical ones.
pub const BREAKPOINT_GAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Small,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Small => Mode::SmallAngle,
        }
    }
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                // a closed reader (e.g. `| head`) is not a failure
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Failure::Io(format!("stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    text
}

fn urad(x: f64) -> f64 {
    round_significant(x * 1e6, 4)
}

pub fn curve_csv(curve: &DeflectionCurve) -> String {
    let mut out = String::from("b_hat,alpha_rad,chi_rad,chi_urad\n");
    for s in &curve.samples {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{}\n",
            s.b_hat,
            s.alpha,
            s.chi,
            urad(s.chi)
        ));
    }
    out
}

pub struct SweepArgs {
    pub b_min: f64,
    pub b_max: f64,
    pub samples: usize,
    pub mode: ModeArg,
    pub refine: bool,
}

pub fn sweep_cmd(
    input: &Input,
    args: &SweepArgs,
    format: Format,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let geom = input.geometry()?;
    let run = if args.refine { sweep_refined } else { sweep };
    let curve = run(
        &geom,
        args.b_min,
        args.b_max,
        args.samples,
        args.mode.into(),
    )?;
    let text = match format {
        Format::Csv => curve_csv(&curve),
        Format::Json => to_json(&curve),
    };
    emit(out, &text)
}

fn key_values_csv(rows: &[(&str, String)]) -> String {
    let mut out = String::from("quantity,value\n");
    for (k, v) in rows {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

pub fn extrema_cmd(input: &Input, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let e = extrema(&input.geometry()?)?;
    let text = match format {
        Format::Json => to_json(&e),
        Format::Csv => key_values_csv(&[
            ("alpha_max_plus_urad", urad(e.alpha_max_plus).to_string()),
            ("alpha_min_plus_urad", urad(e.alpha_min_plus).to_string()),
            ("alpha_max_minus_urad", urad(e.alpha_max_minus).to_string()),
            ("alpha_min_minus_urad", urad(e.alpha_min_minus).to_string()),
        ]),
    };
    emit(out, &text)
}

#[derive(Serialize)]
struct Averages {
    chi_rough_urad: f64,
    chi_refined_urad: f64,
    chi_numeric_urad: f64,
}

pub fn average_cmd(input: &Input, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let geom = input.geometry()?;
    let a = Averages {
        chi_rough_urad: mean_reflection_rough(&geom)? * 1e6,
        chi_refined_urad: mean_reflection_refined(&geom)? * 1e6,
        chi_numeric_urad: mean_reflection_numeric(&geom)? * 1e6,
    };
    let text = match format {
        Format::Json => to_json(&a),
        Format::Csv => key_values_csv(&[
            (
                "chi_rough_urad",
                round_significant(a.chi_rough_urad, 4).to_string(),
            ),
            (
                "chi_refined_urad",
                round_significant(a.chi_refined_urad, 4).to_string(),
            ),
            (
                "chi_numeric_urad",
                round_significant(a.chi_numeric_urad, 4).to_string(),
            ),
        ]),
    };
    emit(out, &text)
}

pub fn reproduce_cmd(
    cases: Option<&PathBuf>,
    format: Option<Format>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let cases: Vec<ExperimentCase> = match cases {
        None => builtin_cases(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?
        }
    };
    let report = compare_report(&cases)?;
    let text = match format {
        None => report.to_table(),
        Some(Format::Csv) => report.to_csv(),
        Some(Format::Json) => {
            let mut t = report.to_json();
            t.push('\n');
            t
        }
    };
    emit(out, &text)?;
    match report.rows.iter().find(|r| r.reproduction_error > REPRODUCTION_TOLERANCE) {
        Some(row) => Err(Failure::Verification(format!(
            "case '{}' differs from its reference prediction by {:.3e} (tolerance {REPRODUCTION_TOLERANCE})",
            row.name, row.reproduction_error
        ))),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct OracleSummary {
    samples: usize,
    mode: &'static str,
    max_abs_deviation_rad: f64,
    worst_b_hat: f64,
    tolerance_rad: f64,
    pass: bool,
}

/// Midpoint grid of `samples` values over `[b_min, b_max]`, each moved off
/// any critical impact parameter by at least [`BREAKPOINT_GAP`].
pub fn oracle_grid(critical: &[f64], b_min: f64, b_max: f64, samples: usize) -> Vec<f64> {
    let step = (b_max - b_min) / samples as f64;
    (0..samples)
        .map(|k| {
            let mut b = b_min + (k as f64 + 0.5) * step;
            while let Some(c) = critical.iter().find(|c| (b - **c).abs() < BREAKPOINT_GAP) {
                b = c + 2.0 * BREAKPOINT_GAP;
            }
            b
        })
        .collect()
}

pub fn oracle_check_cmd(
    input: &Input,
    b_min: f64,
    b_max: f64,
    samples: usize,
    mode: ModeArg,
    format: Format,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if samples == 0 {
        return Err(Failure::Invalid("--samples must be at least 1".into()));
    }
    if !(b_min >= 0.0 && b_min < b_max && b_max.is_finite()) {
        return Err(Failure::Invalid(format!(
            "need 0 <= bmin < bmax, got [{b_min}, {b_max}]"
        )));
    }
    let geom = input.geometry()?;
    let grid = oracle_grid(&geom.critical_impact_parameters(), b_min, b_max, samples);
    let (worst, worst_b) = grid
        .iter()
        .map(|&b| {
            (
                (chi_crystal(&geom, b, mode.into()).chi - ray_trace(&geom, b).chi).abs(),
                b,
            )
        })
        .fold(
            (0.0f64, grid[0]),
            |acc, x| if x.0 > acc.0 { x } else { acc },
        );
    let informational = mode == ModeArg::Small;
    let summary = OracleSummary {
        samples,
        mode: if informational { "small" } else { "exact" },
        max_abs_deviation_rad: worst,
        worst_b_hat: worst_b,
        tolerance_rad: ORACLE_TOLERANCE,
        pass: informational || worst <= ORACLE_TOLERANCE,
    };
    let text = match format {
        Format::Json => to_json(&summary),
        Format::Csv => format!(
            "samples,mode,max_abs_deviation_rad,worst_b_hat,tolerance_rad,pass\n{},{},{:.16e},{:.16e},{:e},{}\n",
            summary.samples,
            summary.mode,
            summary.max_abs_deviation_rad,
            summary.worst_b_hat,
            summary.tolerance_rad,
            summary.pass
        ),
    };
    emit(out, &text)?;
    if summary.pass {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "max deviation {worst:e} rad at b_hat = {worst_b:.17e} exceeds {ORACLE_TOLERANCE:e}"
        )))
    }
}

#[derive(Serialize)]
struct Conditions {
    phi0: f64,
    a_hat: f64,
    d_hat: f64,
    reflection_condition: bool,
    no_orbiting: bool,
    thin_plane_regime: bool,
}

pub fn condition_cmd(
    input: &Input,
    samples: usize,
    format: Format,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let geom = input.geometry()?;
    let c = Conditions {
        phi0: geom.phi0(),
        a_hat: geom.a_hat(),
        d_hat: geom.d_hat(),
        reflection_condition: reflection_condition(&geom),
        no_orbiting: orbiting_check(&geom, samples)?,
        thin_plane_regime: geom.a_hat() > geom.phi0().abs() / 2.0,
    };
    let text = match format {
        Format::Json => to_json(&c),
        Format::Csv => key_values_csv(&[
            ("phi0", format!("{:e}", c.phi0)),
            ("a_hat", format!("{:e}", c.a_hat)),
            ("d_hat", format!("{:e}", c.d_hat)),
            ("reflection_condition", c.reflection_condition.to_string()),
            ("no_orbiting", c.no_orbiting.to_string()),
            ("thin_plane_regime", c.thin_plane_regime.to_string()),
        ]),
    };
    emit(out, &text)
}
