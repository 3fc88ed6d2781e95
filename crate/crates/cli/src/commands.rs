//! Subcommand implementations: each compiles the shared settings into one
//! emitted artifact (CSV text or a JSON report).

use gfrac::clocks::{classify_mfpt, tail_exponent, ClockLimit, MfptClass};
use gfrac::oracle::{compare, solve_l1, ErrorNorm};
use gfrac::solution::MfptOutcome;

use crate::config::{config_err, numeric, resolve_times, CliError, Format, Settings};
use crate::report::*;

/// First-passage density curve with the long-time power-law asymptote in
/// the third column (`nan` when the scenario has no power tail: order 1,
/// or a saturating clock).
pub fn cmd_fptd(settings: &Settings) -> Result<String, CliError> {
    let scn = &settings.scenario;
    let times = resolve_times(scn, &settings.time)?;
    let curve = scn.fptd_curve(&times).map_err(numeric)?;

    let asymptote: Vec<f64> = match curve.tail_constant {
        Some(c) => times
            .iter()
            .map(|&t| {
                let g = scn.clock().value(t);
                c * scn.clock().derivative(t) * g.powf(-(scn.alpha() + 1.0))
            })
            .collect(),
        None => vec![f64::NAN; times.len()],
    };

    match settings.format {
        Format::Csv => {
            let rows: Vec<Vec<f64>> = curve
                .times
                .iter()
                .zip(&curve.density)
                .zip(&asymptote)
                .map(|((&t, &phi), &a)| vec![t, phi, a])
                .collect();
            Ok(curve_csv("t,phi,phi_asymptotic", &rows))
        }
        Format::Json => to_json(&CurveReport {
            quantity: "fptd".into(),
            points: curve
                .times
                .iter()
                .zip(&curve.density)
                .zip(&asymptote)
                .map(|((&t, &value), &a)| CurvePoint {
                    t,
                    value,
                    asymptote: if a.is_nan() { None } else { Some(a) },
                })
                .collect(),
        }),
    }
}

pub fn cmd_survival(settings: &Settings) -> Result<String, CliError> {
    let scn = &settings.scenario;
    let times = resolve_times(scn, &settings.time)?;
    let values = scn.survival_curve(&times).map_err(numeric)?;
    match settings.format {
        Format::Csv => {
            let rows: Vec<Vec<f64>> = times
                .iter()
                .zip(&values)
                .map(|(&t, &p)| vec![t, p])
                .collect();
            Ok(curve_csv("t,survival", &rows))
        }
        Format::Json => to_json(&CurveReport {
            quantity: "survival".into(),
            points: times
                .iter()
                .zip(&values)
                .map(|(&t, &value)| CurvePoint {
                    t,
                    value,
                    asymptote: None,
                })
                .collect(),
        }),
    }
}

/// The concentration field on a regular sample grid at one time.
pub fn cmd_field(settings: &Settings) -> Result<String, CliError> {
    let scn = &settings.scenario;
    let t = settings
        .time
        .at
        .ok_or_else(|| config_err("field needs an evaluation time (time.at or --t)"))?;
    let nodes = sample_grid(scn.domain());
    let mut points = Vec::with_capacity(nodes.len());
    for r in nodes {
        let value = scn.field(&r, t).map_err(numeric)?;
        points.push(GridPoint { r, value });
    }
    match settings.format {
        Format::Csv => Ok(grid_csv(scn.domain().dim(), "u", &points)),
        Format::Json => to_json(&FieldReport {
            quantity: "field".into(),
            t: Some(t),
            p_infinity: None,
            points,
        }),
    }
}

pub fn cmd_mfpt(settings: &Settings) -> Result<String, CliError> {
    let scn = &settings.scenario;
    let report = match scn.mfpt().map_err(numeric)? {
        MfptOutcome::Finite {
            tau,
            error_estimate,
        } => RegimeReport {
            regime: "finite".into(),
            tau: Some(tau),
            tau_error: Some(error_estimate),
            tail_exponent: None,
            p_infinity: None,
        },
        MfptOutcome::Infinite { tail_exponent } => RegimeReport {
            regime: "infinite".into(),
            tau: None,
            tau_error: None,
            tail_exponent,
            p_infinity: None,
        },
        MfptOutcome::Undefined { p_infinity } => RegimeReport {
            regime: "never_absorbed".into(),
            tau: None,
            tau_error: None,
            tail_exponent: None,
            p_infinity: Some(p_infinity),
        },
    };
    to_json(&report)
}

/// Clock-only regime classification (no series work).
pub fn cmd_classify(settings: &Settings) -> Result<String, CliError> {
    let scn = &settings.scenario;
    let class = classify_mfpt(scn.clock(), scn.alpha()).map_err(numeric)?;
    let report = match class {
        MfptClass::Finite | MfptClass::Infinite => {
            let delta = if scn.alpha() < 1.0 {
                tail_exponent(scn.clock(), scn.alpha()).map_err(numeric)?
            } else {
                None
            };
            RegimeReport {
                regime: match class {
                    MfptClass::Finite => "finite".into(),
                    _ => "infinite".into(),
                },
                tau: None,
                tau_error: None,
                tail_exponent: delta,
                p_infinity: None,
            }
        }
        MfptClass::NeverAbsorbed => RegimeReport {
            regime: "never_absorbed".into(),
            tau: None,
            tau_error: None,
            tail_exponent: None,
            p_infinity: Some(scn.asymptotic_survival().map_err(numeric)?),
        },
    };
    to_json(&report)
}

/// Stationary profile and asymptotic survival; a precondition failure
/// (unbounded clock) is a configuration error.
pub fn cmd_stationary(settings: &Settings) -> Result<String, CliError> {
    let scn = &settings.scenario;
    if matches!(scn.clock().limit_at_infinity(), ClockLimit::Unbounded) {
        return Err(config_err(
            "stationary profiles exist only for saturating clocks (the field decays to zero \
             when the clock is unbounded); use a dodson clock or request survival/fptd curves",
        ));
    }
    let p_inf = scn.asymptotic_survival().map_err(numeric)?;
    let nodes = sample_grid(scn.domain());
    let mut points = Vec::with_capacity(nodes.len());
    for r in nodes {
        let value = scn.stationary_field(&r).map_err(numeric)?;
        points.push(GridPoint { r, value });
    }
    match settings.format {
        Format::Csv => {
            let mut out = format!("# p_infinity = {}\n", fmt_f64(p_inf));
            out.push_str(&grid_csv(scn.domain().dim(), "u_stationary", &points));
            Ok(out)
        }
        Format::Json => to_json(&FieldReport {
            quantity: "stationary".into(),
            t: None,
            p_infinity: Some(p_inf),
            points,
        }),
    }
}

/// Independent finite-difference cross-check of the series solution.
pub fn cmd_validate(settings: &Settings) -> Result<String, CliError> {
    let scn = &settings.scenario;
    let solution = solve_l1(scn, &settings.grid).map_err(numeric)?;
    let report = compare(scn, &solution, ErrorNorm::Max).map_err(numeric)?;
    let settled = report
        .worst_from(settings.grid.s_final / 8.0)
        .unwrap_or(report.worst);
    to_json(&ValidationReport {
        norm: "max".into(),
        worst: report.worst,
        worst_settled: settled,
        skipped_slices: report.skipped,
        slices: report
            .per_slice
            .iter()
            .map(|e| ValidationSlice {
                s: e.s,
                t: e.t,
                deviation: e.value,
            })
            .collect(),
    })
}

/// 33 nodes per axis (or the boundary-excluded interior of a smaller
/// request) — a plot-ready sampling of the open box.
fn sample_grid(domain: &gfrac::spectral::BoxDomain) -> Vec<Vec<f64>> {
    const PER_AXIS: usize = 33;
    let dim = domain.dim();
    let mut nodes = Vec::new();
    let mut index = vec![1usize; dim];
    loop {
        let r: Vec<f64> = index
            .iter()
            .zip(domain.lengths())
            .map(|(&i, &l)| i as f64 * l / (PER_AXIS + 1) as f64)
            .collect();
        nodes.push(r);
        let mut axis = 0;
        loop {
            index[axis] += 1;
            if index[axis] <= PER_AXIS {
                break;
            }
            index[axis] = 1;
            axis += 1;
            if axis == dim {
                return nodes;
            }
        }
    }
}

fn grid_csv(dim: usize, value_name: &str, points: &[GridPoint]) -> String {
    let mut header = String::new();
    for a in 0..dim {
        header.push_str(&format!("x{},", a + 1));
    }
    header.push_str(value_name);
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let mut row = p.r.clone();
            row.push(p.value);
            row
        })
        .collect();
    curve_csv(&header, &rows)
}

fn to_json<T: serde::Serialize>(report: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Numeric(format!("report serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}
