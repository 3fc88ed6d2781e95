//! End-to-end tests of the `gfrac` binary: exit codes, artifact formats,
//! determinism, and agreement with independently scripted references.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde::Deserialize;

fn gfrac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfrac"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "expected success, got {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("stdout should be UTF-8")
}

fn config_path(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "configs", name].iter().collect();
    assert!(p.exists(), "missing example config {}", p.display());
    p.to_str().unwrap().to_string()
}

fn parse_csv(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().expect("csv should have a header").to_string();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|cell| cell.parse::<f64>().expect("csv cell should be a number"))
                .collect()
        })
        .collect();
    (header, rows)
}

// ---------------------------------------------------------------------
// Published JSON schemas, restated independently so that drift in the
// emitted reports breaks this suite.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegimeReport {
    regime: String,
    #[serde(default)]
    tau: Option<f64>,
    #[serde(default)]
    tau_error: Option<f64>,
    #[serde(default)]
    tail_exponent: Option<f64>,
    #[serde(default)]
    p_infinity: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurvePoint {
    t: f64,
    value: f64,
    #[serde(default)]
    asymptote: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveReport {
    quantity: String,
    points: Vec<CurvePoint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValidationSlice {
    s: f64,
    t: f64,
    deviation: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValidationReport {
    norm: String,
    worst: f64,
    worst_settled: f64,
    skipped_slices: usize,
    slices: Vec<ValidationSlice>,
}

// ---------------------------------------------------------------------
// Exit codes.

#[test]
fn unknown_config_keys_are_rejected_with_exit_2() {
    let dir = std::env::temp_dir().join("gfrac_cli_badkey");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "order.alpha = 0.5\nsolver.mesh = 4\n").unwrap();
    let out = gfrac(&["mfpt", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown key"), "stderr was: {err}");
    assert!(err.contains("line 2"), "stderr was: {err}");
}

#[test]
fn an_empty_time_grid_is_a_configuration_error() {
    let out = gfrac(&["survival", "--alpha", "1", "--tpoints", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("time.points"));
}

#[test]
fn stationary_profiles_require_a_saturating_clock() {
    let out = gfrac(&[
        "stationary", "--alpha", "0.5", "--clock", "power_law", "--beta", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("saturating"));
}

#[test]
fn unresolved_early_times_fail_as_numeric_errors() {
    // A point release in 2d cannot be represented at t = 0.01 with a 4000
    // eigenvalue cutoff; the engine refuses rather than emit garbage.
    let dir = std::env::temp_dir().join("gfrac_cli_early");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("early.cfg");
    std::fs::write(
        &cfg,
        "order.alpha = 0.6\ndomain.dim = 2\nclock.family = power_law\nclock.beta = 2\n\
         series.lambda_max = 4000\ntime.min = 0.01\ntime.max = 100\ntime.points = 4\n",
    )
    .unwrap();
    let out = gfrac(&["fptd", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("numeric error"));
}

#[test]
fn identity_clock_rejects_parameters() {
    let out = gfrac(&["mfpt", "--alpha", "1", "--beta", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("identity"));
}

// ---------------------------------------------------------------------
// Artifacts.

#[test]
fn repeated_runs_emit_byte_identical_csv() {
    let args = ["fptd", "--config", &config_path("quadratic_clock_2d.cfg"), "--tpoints", "40"];
    let first = stdout_of(&gfrac(&args));
    let second = stdout_of(&gfrac(&args));
    assert_eq!(first, second);
    assert!(first.len() > 40 * 40, "unexpectedly short artifact");
}

#[test]
fn fptd_csv_has_the_density_and_asymptote_columns() {
    let text = stdout_of(&gfrac(&[
        "fptd", "--config", &config_path("quadratic_clock_2d.cfg"), "--tpoints", "12",
    ]));
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, "t,phi,phi_asymptotic");
    assert_eq!(rows.len(), 12);
    // Late in the tail the asymptote is within a percent of the density.
    let last = rows.last().unwrap();
    assert!((last[1] - last[2]).abs() <= 0.01 * last[1].abs());

    // The asymptote column is NaN when there is no power-law tail.
    let text = stdout_of(&gfrac(&[
        "fptd", "--config", &config_path("classical_1d.cfg"), "--tpoints", "6",
        "--tmin", "0.01", "--tmax", "1",
    ]));
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, "t,phi,phi_asymptotic");
    assert!(rows.iter().all(|r| r[2].is_nan()));
    assert!(rows.iter().all(|r| r[1].is_finite()));
}

#[test]
fn classical_fptd_matches_a_hand_rolled_series() {
    let text = stdout_of(&gfrac(&[
        "fptd", "--config", &config_path("classical_1d.cfg"), "--tpoints", "9",
        "--tmin", "0.01", "--tmax", "1",
    ]));
    let (_, rows) = parse_csv(&text);
    for row in rows {
        let (t, phi) = (row[0], row[1]);
        // Center release on the unit interval: phi(t) = sum over odd n of
        // 4 (-1)^((n-1)/2) / (n pi) * (n pi)^2 exp(-(n pi)^2 t).
        let mut reference = 0.0_f64;
        for k in 0..200 {
            let n = 2 * k + 1;
            let lam = (n as f64 * std::f64::consts::PI).powi(2);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            reference += sign * 4.0 / (n as f64 * std::f64::consts::PI) * lam * (-lam * t).exp();
        }
        assert!(
            (phi - reference).abs() <= 1e-7 * reference.abs().max(1e-12),
            "t={t}: cli {phi} vs reference {reference}"
        );
    }
}

#[test]
fn mfpt_reports_the_classical_exit_time() {
    let text = stdout_of(&gfrac(&["mfpt", "--config", &config_path("classical_1d.cfg")]));
    let report: RegimeReport = serde_json::from_str(&text).expect("schema drift");
    assert_eq!(report.regime, "finite");
    let tau = report.tau.expect("finite regime must carry tau");
    assert!((tau - 0.125).abs() <= 1e-6, "tau = {tau}");
    assert!(report.tau_error.expect("finite regime carries an error bound") < 1e-6);
    assert!(report.tail_exponent.is_none() && report.p_infinity.is_none());
}

#[test]
fn classify_reports_regimes_across_clock_families() {
    // Saturating clock: a positive fraction never reaches the boundary.
    let text = stdout_of(&gfrac(&["classify", "--config", &config_path("dodson_1d.cfg")]));
    let report: RegimeReport = serde_json::from_str(&text).expect("schema drift");
    assert_eq!(report.regime, "never_absorbed");
    let p = report.p_infinity.expect("never_absorbed carries p_infinity");
    assert!(p > 0.0 && p < 1.0, "p_infinity = {p}");

    // Fast quadratic clock at alpha = 0.8: tail exponent 1 + 2*0.8 > 2.
    let text = stdout_of(&gfrac(&[
        "classify", "--alpha", "0.8", "--clock", "power_law", "--beta", "2",
    ]));
    let report: RegimeReport = serde_json::from_str(&text).expect("schema drift");
    assert_eq!(report.regime, "finite");
    let delta = report.tail_exponent.expect("power tail carries its exponent");
    assert!((delta - 2.6).abs() < 1e-12);

    // Plain clock at alpha = 0.6: tail exponent 1.6 < 2, divergent mean.
    let text = stdout_of(&gfrac(&["classify", "--alpha", "0.6"]));
    let report: RegimeReport = serde_json::from_str(&text).expect("schema drift");
    assert_eq!(report.regime, "infinite");
    let delta = report.tail_exponent.expect("power tail carries its exponent");
    assert!((delta - 1.6).abs() < 1e-12);
}

#[test]
fn json_curves_round_trip_through_the_published_schema() {
    let text = stdout_of(&gfrac(&[
        "fptd", "--config", &config_path("quadratic_clock_2d.cfg"),
        "--tpoints", "5", "--format", "json",
    ]));
    let report: CurveReport = serde_json::from_str(&text).expect("schema drift");
    assert_eq!(report.quantity, "fptd");
    assert_eq!(report.points.len(), 5);
    assert!(report.points.iter().all(|p| p.asymptote.is_some() && p.t > 0.0));

    let text = stdout_of(&gfrac(&[
        "survival", "--config", &config_path("dodson_1d.cfg"),
        "--tpoints", "5", "--format", "json",
    ]));
    let report: CurveReport = serde_json::from_str(&text).expect("schema drift");
    assert_eq!(report.quantity, "survival");
    assert!(report.points.iter().all(|p| p.asymptote.is_none()));
    assert!(report.points.windows(2).all(|w| w[1].value <= w[0].value + 1e-12));
}

#[test]
fn validate_reports_settled_deviations() {
    let text = stdout_of(&gfrac(&[
        "validate", "--config", &config_path("validate_gaussian_1d.cfg"),
    ]));
    let report: ValidationReport = serde_json::from_str(&text).expect("schema drift");
    assert_eq!(report.norm, "max");
    assert!(!report.slices.is_empty());
    assert!(report.worst_settled <= report.worst);
    assert!(report.worst_settled < 0.05, "settled deviation {}", report.worst_settled);
    assert!(report.slices.windows(2).all(|w| w[0].s < w[1].s));
    assert!(report.slices.iter().all(|s| s.t > 0.0 && s.deviation >= 0.0));
    let _ = report.skipped_slices;
}

#[test]
fn output_path_writes_the_artifact_to_disk() {
    let dir = std::env::temp_dir().join("gfrac_cli_out");
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("survival.csv");
    let _ = std::fs::remove_file(&target);
    let out = gfrac(&[
        "survival", "--alpha", "1", "--tmin", "0.01", "--tmax", "1", "--tpoints", "3",
        "--out", target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty(), "artifact should go to the file, not stdout");
    let (header, rows) = parse_csv(&std::fs::read_to_string(&target).unwrap());
    assert_eq!(header, "t,survival");
    assert_eq!(rows.len(), 3);
}

#[test]
fn flag_overrides_take_precedence_over_the_config_file() {
    let cfg = config_path("quadratic_clock_2d.cfg");
    let base = stdout_of(&gfrac(&["classify", "--config", &cfg]));
    let base: RegimeReport = serde_json::from_str(&base).unwrap();
    // alpha 0.6 with g = t^2: exponent 2.2, mean exit time finite.
    assert_eq!(base.regime, "finite");
    assert!((base.tail_exponent.unwrap() - 2.2).abs() < 1e-12);

    let slow = stdout_of(&gfrac(&["classify", "--config", &cfg, "--alpha", "0.4"]));
    let slow: RegimeReport = serde_json::from_str(&slow).unwrap();
    assert_eq!(slow.regime, "infinite");
    assert!((slow.tail_exponent.unwrap() - 1.8).abs() < 1e-12);
}

#[test]
fn stationary_csv_carries_the_surviving_fraction() {
    let text = stdout_of(&gfrac(&["stationary", "--config", &config_path("dodson_1d.cfg")]));
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# p_infinity = "), "got {first:?}");
    let p: f64 = first.rsplit('=').next().unwrap().trim().parse().unwrap();
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, "x1,u_stationary");
    assert_eq!(rows.len(), 33);
    // The profile integrates (midpoint rule) to the surviving fraction.
    let h = 1.0 / 34.0;
    let mass: f64 = rows.iter().map(|r| r[1] * h).sum();
    assert!((mass - p).abs() < 1e-3 * p, "mass {mass} vs p_infinity {p}");
    // Symmetric about the center for a centered release.
    for (a, b) in rows.iter().zip(rows.iter().rev()) {
        assert!((a[1] - b[1]).abs() <= 1e-10 * a[1].abs() + 1e-14);
    }
}

#[test]
fn field_grids_are_positive_and_vanish_toward_the_walls(){
    let text = stdout_of(&gfrac(&[
        "field", "--alpha", "1", "--t", "0.05", "--tmin", "0.01",
    ]));
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, "x1,u");
    assert_eq!(rows.len(), 33);
    let center = rows[16][1];
    let edge = rows[0][1];
    assert!(center > edge && edge > 0.0, "center {center}, edge {edge}");
    assert!(Path::new(&config_path("classical_1d.cfg")).exists());
}
