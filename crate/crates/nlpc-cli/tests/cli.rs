//! End-to-end tests of the binary: exit codes, artifact schemas and
//! determinism across thread counts.

use std::path::Path;
use std::process::{Command, Output};

fn nlpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlpc")).args(args).output().expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_string()
}

/// Small, fast variant of the long-wavelength pair-generation setup.
const SMALL_FIG2: &str = "
[stack]
material_1 = algaas-x0.4
material_2 = air
period = 18.75 nm
fill = 0.656

[pump]
wavelength = 750 nm
polarization = tm
kpar_norm = 0.056644
band = 0
g_p = 0

[downconversion]
split = 0.5
pol_1 = te
pol_2 = tm
n_brackets = 1024
n_azimuth = 64

[grid]
omega_norm_min = 0.02
omega_norm_max = 0.05
n_omega = 48
kpar_norm_min = 0.0
kpar_norm_max = 0.08
n_kpar = 40

[modes]
g_max = 32

[efficiency]
chi2_pm_per_v = 200 pm/V
chi2_ref_pm_per_v = 2.2 pm/V
fill = 0.65
fourier = auto
tensor = auto
";

#[test]
fn missing_config_exits_2() {
    let out = nlpc(&["bands", "--config", "/nonexistent/nope.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "bad.cfg", "[stack]\nperiod = 40 nm\nnot a key value\n");
    let out = nlpc(&["bands", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));
}

#[test]
fn pump_in_stopband_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "gap.cfg",
        "[stack]\nmaterial_1 = algaas-x0.4\nmaterial_2 = air\nperiod = 187.5 nm\nfill = 0.656\n\n[pump]\nomega_norm = 0.38\npolarization = tm\nband = 1\n",
    );
    let out = nlpc(&["modes", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain error"));
}

#[test]
fn zero_solutions_is_success() {
    // homogeneous dispersive medium: colinear matching is impossible and
    // no transverse geometry can fix it, so the solution list is empty
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "empty.cfg",
        "[material.disp]\nmodel = table\npoints = 700 nm: 3.4, 1600 nm: 3.2\ninterpolation = linear\n\n[stack]\nmaterial_1 = disp\nmaterial_2 = disp\nperiod = 10 nm\nfill = 0.5\n\n[pump]\nwavelength = 750 nm\npolarization = tm\nkpar_norm = 0.0\nband = 0\n\n[downconversion]\npol_1 = te\npol_2 = te\nn_brackets = 512\n",
    );
    let out = nlpc(&["match", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("match.json")).unwrap())
            .unwrap();
    assert_eq!(doc.as_array().unwrap().len(), 0);
}

#[test]
fn match_json_schema_and_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "fig2.cfg", SMALL_FIG2);
    let out = nlpc(&["match", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--quiet"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty(), "--quiet must suppress the summary");

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("match.json")).unwrap())
            .unwrap();
    let arr = doc.as_array().unwrap();
    assert!(!arr.is_empty());
    for s in arr {
        for key in [
            "omega_1_rad_per_s",
            "omega_2_rad_per_s",
            "omega_1_norm",
            "k_par_1_rad_per_m",
            "k_par_2_rad_per_m",
            "kz_1_rad_per_m",
            "kz_2_rad_per_m",
            "kz_1_norm",
            "pol_1",
            "pol_2",
            "band_1",
            "band_2",
            "g_dc",
            "residual_rad_per_m",
            "match_type",
            "backward",
        ] {
            assert!(s.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(s["match_type"], "type-ii");
    }
}

#[test]
fn cones_artifacts_and_intersections() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "fig2.cfg", SMALL_FIG2);
    let out = nlpc(&["cones", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    for name in ["cones_te_tm.csv", "cones_tm_te.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "phi,k1x,k1y,k1z,k2x,k2y,k2z,residual");
        let mut rows = 0;
        for line in lines {
            assert_eq!(line.split(',').count(), 8, "bad row: {line}");
            rows += 1;
        }
        assert_eq!(rows, 64);
    }

    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("cones_intersections.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(doc["match_type"], "type-ii");
    assert_eq!(doc["pairs"].as_array().unwrap().len(), 2);

    let svg = std::fs::read_to_string(dir.path().join("cones.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("<polyline"));
}

#[test]
fn bands_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "fig2.cfg", SMALL_FIG2);
    let out = nlpc(&["bands", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("bands.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "omega_norm,kpar_norm,pol,propagating,attenuation_norm,above_light_line"
    );
    let mut rows = 0;
    for line in lines {
        assert_eq!(line.split(',').count(), 6);
        rows += 1;
    }
    assert_eq!(rows, 2 * 48 * 40, "both polarizations on the full grid");
}

#[test]
fn modes_and_efficiency_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "fig2.cfg", SMALL_FIG2);
    assert_eq!(
        nlpc(&["modes", "--config", &cfg, "--out", dir.path().to_str().unwrap()]).status.code(),
        Some(0)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("modes.json")).unwrap())
            .unwrap();
    assert_eq!(doc["g_star"], 0);
    assert!(doc["fraction"].as_f64().unwrap() >= 0.99);

    let text = std::fs::read_to_string(dir.path().join("modes.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "g_index,re,im,abs");
    assert_eq!(lines.count(), 65);

    assert_eq!(
        nlpc(&["efficiency", "--config", &cfg, "--out", dir.path().to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("efficiency.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(doc["provenance"]["fill"], "config");
    assert_eq!(doc["provenance"]["fourier"], "computed");
    assert_eq!(doc["provenance"]["tensor"], "computed");
    let amp = doc["amplitude"].as_f64().unwrap();
    let eff = doc["efficiency"].as_f64().unwrap();
    assert!((eff - amp * amp).abs() <= 1e-9 * eff.abs());
}

#[test]
fn optimize_fill_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "fig2.cfg", SMALL_FIG2);
    let out = nlpc(&["optimize-fill", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("optimize_fill.json")).unwrap(),
    )
    .unwrap();
    let alpha = doc["alpha_star"].as_f64().unwrap();
    assert!((alpha - 0.656).abs() <= 0.01, "alpha* = {alpha}");
}

#[test]
fn outputs_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "fig2.cfg", SMALL_FIG2);
    let out1 = dir.path().join("t1");
    let out4 = dir.path().join("t4");
    for (threads, out) in [("1", &out1), ("4", &out4)] {
        let r = nlpc(&[
            "bands",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
            "--quiet",
        ]);
        assert_eq!(r.status.code(), Some(0));
        let r = nlpc(&[
            "cones",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
            "--quiet",
        ]);
        assert_eq!(r.status.code(), Some(0));
    }
    for name in ["bands.csv", "bands.svg", "cones_te_tm.csv", "cones_intersections.json"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out4.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between thread counts");
    }
}

#[test]
fn surface_csv_schema_and_formats_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "surf.cfg",
        "[stack]\nmaterial_1 = algaas-x0.4\nmaterial_2 = air\nperiod = 18.75 nm\nfill = 0.656\n\n[surface]\nwavelength = 1500 nm\nzone = extended\nband = 0\nn_samples = 128\n",
    );
    let out = nlpc(&[
        "surface",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("surface.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "kpar_norm,kz_norm,pol,band,gap_flag,above_light_line");
    for line in lines {
        assert_eq!(line.split(',').count(), 6);
    }
    // svg was not requested
    assert!(!dir.path().join("surface.svg").exists());
}

#[test]
fn csv_floats_carry_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "fig2.cfg", SMALL_FIG2);
    nlpc(&["modes", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--quiet"]);
    let text = std::fs::read_to_string(dir.path().join("modes.csv")).unwrap();
    let row = text.lines().nth(1).unwrap();
    let abs_field = row.split(',').nth(3).unwrap();
    // scientific notation with at least 12 significant digits
    let mantissa = abs_field.split('e').next().unwrap();
    let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
    assert!(digits >= 12, "only {digits} digits in `{abs_field}`");
    assert!(abs_field.contains('e'));
}
