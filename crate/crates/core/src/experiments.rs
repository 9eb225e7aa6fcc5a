//! Volume-reflection measurements with silicon crystals and the predicted
//! average reflection angles for each of them.

use serde::{Deserialize, Serialize};

use crate::crystal::{scale, BeamSpec, RingPotentialSpec};
use crate::deflection::{mean_reflection_refined, mean_reflection_rough};
use crate::error::Result;

/// Relative agreement required between recomputed and reference predictions.
pub const REPRODUCTION_TOLERANCE: f64 = 0.01;

/// Planes are never counted in these measurements; the averages do not
/// depend on it, so a nominal value keeps the geometry valid.
const NOMINAL_PLANES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub value_urad: f64,
    pub uncertainty_urad: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCase {
    pub name: String,
    pub beam_energy_gev: f64,
    pub orientation: String,
    pub crystal: RingPotentialSpec,
    pub beam: BeamSpec,
    pub measured: Option<Measurement>,
    pub reference_refined_urad: f64,
    pub reference_rough_urad: f64,
}

#[allow(clippy::too_many_arguments)]
fn case(
    name: &str,
    energy: f64,
    orientation: &str,
    radius: f64,
    phi0: f64,
    a_angstrom: f64,
    d_angstrom: f64,
    measured: (f64, Option<f64>),
    refined: f64,
    rough: f64,
) -> ExperimentCase {
    ExperimentCase {
        name: name.to_string(),
        beam_energy_gev: energy,
        orientation: orientation.to_string(),
        crystal: RingPotentialSpec::from_angstroms(radius, NOMINAL_PLANES, d_angstrom, a_angstrom)
            .expect("built-in crystal is valid"),
        beam: BeamSpec::with_phi0(phi0).expect("built-in beam is valid"),
        measured: Some(Measurement {
            value_urad: measured.0,
            uncertainty_urad: measured.1,
        }),
        reference_refined_urad: refined,
        reference_rough_urad: rough,
    }
}

/// The four proton measurements: 1 and 70 GeV on <111>, 400 GeV on <110>
/// and <111>.
pub fn builtin_cases() -> Vec<ExperimentCase> {
    vec![
        case(
            "1 GeV <111>",
            1.0,
            "<111>",
            0.33,
            0.289e-7,
            0.78,
            3.136,
            (236.0, Some(6.0)),
            318.8,
            226.6,
        ),
        case(
            "70 GeV <111>",
            70.0,
            "<111>",
            1.7,
            0.58e-9,
            0.78,
            3.136,
            (39.5, Some(2.0)),
            37.3,
            32.0,
        ),
        case(
            "400 GeV <110>",
            400.0,
            "<110>",
            18.5,
            0.1132e-9,
            0.48,
            1.92,
            (13.9, Some(0.2)),
            19.0,
            14.1,
        ),
        case(
            "400 GeV <111>",
            400.0,
            "<111>",
            11.5,
            0.1008e-9,
            0.78,
            3.136,
            (13.0, None),
            16.0,
            13.3,
        ),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub rough_urad: f64,
    pub refined_urad: f64,
}

pub fn predict(case: &ExperimentCase) -> Result<Prediction> {
    let geom = scale(&case.crystal, &case.beam)?;
    Ok(Prediction {
        rough_urad: mean_reflection_rough(&geom)? * 1e6,
        refined_urad: mean_reflection_refined(&geom)? * 1e6,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub measured_urad: Option<f64>,
    pub measured_uncertainty_urad: Option<f64>,
    pub rough_urad: f64,
    pub refined_urad: f64,
    /// (prediction - measurement) / measurement
    pub rough_deviation: Option<f64>,
    pub refined_deviation: Option<f64>,
    pub reference_rough_urad: f64,
    pub reference_refined_urad: f64,
    /// Largest relative distance of the recomputed predictions from the
    /// reference ones.
    pub reproduction_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

pub fn compare_report(cases: &[ExperimentCase]) -> Result<Report> {
    let rows = cases
        .iter()
        .map(|c| {
            let p = predict(c)?;
            let measured = c.measured.map(|m| m.value_urad);
            let deviation = |x: f64| measured.map(|m| (x - m) / m);
            let reproduction_error = ((p.rough_urad - c.reference_rough_urad)
                / c.reference_rough_urad)
                .abs()
                .max(
                    ((p.refined_urad - c.reference_refined_urad) / c.reference_refined_urad).abs(),
                );
            Ok(ReportRow {
                name: c.name.clone(),
                measured_urad: measured,
                measured_uncertainty_urad: c.measured.and_then(|m| m.uncertainty_urad),
                rough_urad: p.rough_urad,
                refined_urad: p.refined_urad,
                rough_deviation: deviation(p.rough_urad),
                refined_deviation: deviation(p.refined_urad),
                reference_rough_urad: c.reference_rough_urad,
                reference_refined_urad: c.reference_refined_urad,
                reproduction_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report { rows })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Rounds to `digits` significant figures.
pub fn round_significant(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    (x * factor).round() / factor
}

impl Report {
    /// True when every recomputed prediction is within `tolerance` of its
    /// reference value.
    pub fn reproduces(&self, tolerance: f64) -> bool {
        self.rows.iter().all(|r| r.reproduction_error <= tolerance)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "name,measured_urad,measured_sigma_urad,rough_urad,refined_urad,rough_deviation,refined_deviation,reference_rough_urad,reference_refined_urad,reproduction_error\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.name,
                opt(r.measured_urad),
                opt(r.measured_uncertainty_urad),
                round_significant(r.rough_urad, 4),
                round_significant(r.refined_urad, 4),
                opt(r.rough_deviation.map(|x| round_significant(x, 4))),
                opt(r.refined_deviation.map(|x| round_significant(x, 4))),
                r.reference_rough_urad,
                r.reference_refined_urad,
                round_significant(r.reproduction_error, 4),
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width table for terminals.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<16} {:>14} {:>10} {:>10} {:>9} {:>9}\n",
            "case", "measured", "rough", "refined", "dev(r)", "dev(f)"
        );
        for r in &self.rows {
            let measured = match (r.measured_urad, r.measured_uncertainty_urad) {
                (Some(m), Some(s)) => format!("{m} ± {s}"),
                (Some(m), None) => format!("{m}"),
                _ => "-".into(),
            };
            let pct = |x: Option<f64>| {
                x.map(|v| format!("{:+.1}%", 100.0 * v))
                    .unwrap_or("-".into())
            };
            out.push_str(&format!(
                "{:<16} {:>14} {:>10.1} {:>10.1} {:>9} {:>9}\n",
                r.name,
                measured,
                r.rough_urad,
                r.refined_urad,
                pct(r.rough_deviation),
                pct(r.refined_deviation)
            ));
        }
        out
    }
}
