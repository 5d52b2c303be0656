//! Subcommand implementations: resolve the config, run the solvers and
//! emit artifacts with deterministic content and naming.

use std::fmt;
use std::path::Path;

use serde_json::json;

use nlpc::bandstructure::{
    band_diagram, optimal_fill, stopbands_normal, BandDiagram, LayeredStack, Polarization,
};
use nlpc::blochmodes::{fourier_coefficients, leading_fraction, mode_profile};
use nlpc::config::{ConfigError, FactorSource, GpChoice, RunConfig, StopbandsConfig};
use nlpc::efficiency::{
    deff_factor, polarization_vector, relative_efficiency, CrystalFrame, EfficiencyFactors,
};
use nlpc::phasematch::{
    cone_intersections, emission_cone, find_matches, ConeSpec, EmissionCone, MatchError,
    MatchSolution, MatchType, PumpSpec, ScanSpec,
};
use nlpc::surfaces::{surface, ZoneScheme};
use nlpc::C_LIGHT;

use crate::emit::{self, num, svg};
use crate::{Command, Format};

#[derive(Debug)]
pub enum CliError {
    /// Unparseable or inconsistent configuration (exit 2).
    Config(ConfigError),
    /// The configuration is well-formed but physically unusable, or a
    /// solver reported a domain failure (exit 3).
    Domain(String),
    /// Filesystem trouble writing artifacts (exit 1).
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Domain(m) => write!(f, "domain error: {m}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn dom(e: impl fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

struct Reporter {
    quiet: bool,
}

impl Reporter {
    fn wrote(&self, path: &Path, note: &str) {
        if !self.quiet {
            if note.is_empty() {
                println!("wrote {}", path.display());
            } else {
                println!("wrote {} ({note})", path.display());
            }
        }
    }
}

pub fn dispatch(
    cmd: Command,
    config_path: &Path,
    out: &Path,
    formats: &[Format],
    quiet: bool,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|e| {
        CliError::Config(ConfigError::Validation(format!(
            "cannot read `{}`: {e}",
            config_path.display()
        )))
    })?;
    let cfg = RunConfig::parse(&text)?;
    let rep = Reporter { quiet };
    let want = |f: Format| formats.contains(&f);
    match cmd {
        Command::Bands => bands(&cfg, out, want(Format::Csv), want(Format::Svg), &rep),
        Command::Stopbands => stopbands(&cfg, out, want(Format::Json), &rep),
        Command::Surface => cmd_surface(&cfg, out, want(Format::Csv), want(Format::Svg), &rep),
        Command::Modes => modes(&cfg, out, want(Format::Csv), want(Format::Json), &rep),
        Command::Match => cmd_match(&cfg, out, want(Format::Json), &rep),
        Command::Cones => {
            cones(&cfg, out, want(Format::Csv), want(Format::Json), want(Format::Svg), &rep)
        }
        Command::Efficiency => efficiency(&cfg, out, want(Format::Json), &rep),
        Command::OptimizeFill => optimize_fill(&cfg, out, want(Format::Json), &rep),
    }
}

/// Pump spec with `g_p = auto` resolved to the dominant space harmonic of
/// the pump Bloch mode.
fn resolved_pump(cfg: &RunConfig) -> Result<PumpSpec, CliError> {
    let (mut pump, choice) = cfg.pump_spec()?;
    if choice == GpChoice::Auto {
        let profile = mode_profile(&cfg.stack, pump.omega, pump.k_par_mag(), pump.pol)
            .map_err(dom)?;
        let spectrum = fourier_coefficients(&profile, cfg.modes.g_max).map_err(dom)?;
        let (g_star, _) = leading_fraction(&spectrum);
        let two_pi_l = 2.0 * std::f64::consts::PI / cfg.stack.period();
        let k_dominant = profile.kz_ext + g_star as f64 * two_pi_l;
        let kz_band = nlpc::surfaces::kz_extended(
            &cfg.stack,
            pump.omega,
            pump.k_par_mag(),
            pump.pol,
            pump.band,
        )
        .map_err(dom)?
        .ok_or_else(|| dom("pump mode is evanescent; cannot resolve g_p"))?;
        pump.g_p = ((k_dominant - kz_band) / two_pi_l).round() as i32;
    }
    Ok(pump)
}

fn scan_spec(cfg: &RunConfig) -> Result<ScanSpec, CliError> {
    let dc = cfg
        .downconversion
        .as_ref()
        .ok_or_else(|| ConfigError::Validation("missing [downconversion] section".into()))?;
    Ok(ScanSpec {
        pol_1: dc.pol_1,
        pol_2: dc.pol_2,
        band_1: dc.band_1,
        band_2: dc.band_2,
        split: dc.split,
        g_dc: dc.g_dc,
        n_brackets: dc.n_brackets,
        range: None,
    })
}

// ---------------------------------------------------------------- bands

fn bands(
    cfg: &RunConfig,
    out: &Path,
    csv: bool,
    svg_out: bool,
    rep: &Reporter,
) -> Result<(), CliError> {
    let g = &cfg.grid;
    let st = &cfg.stack;
    let omega: Vec<f64> = (0..g.n_omega)
        .map(|j| {
            st.omega_from_norm(
                g.omega_norm_min
                    + (g.omega_norm_max - g.omega_norm_min) * j as f64 / (g.n_omega - 1) as f64,
            )
        })
        .collect();
    let kpar: Vec<f64> = (0..g.n_kpar)
        .map(|j| {
            st.k_from_norm(
                g.k_par_norm_min
                    + (g.k_par_norm_max - g.k_par_norm_min) * j as f64 / (g.n_kpar - 1) as f64,
            )
        })
        .collect();
    let te = band_diagram(st, &omega, &kpar, Polarization::Te).map_err(dom)?;
    let tm = band_diagram(st, &omega, &kpar, Polarization::Tm).map_err(dom)?;

    if csv {
        let mut text =
            String::from("omega_norm,kpar_norm,pol,propagating,attenuation_norm,above_light_line\n");
        for bd in [&te, &tm] {
            for (i, &w) in bd.omega.iter().enumerate() {
                for (j, &k) in bd.k_par.iter().enumerate() {
                    let c = bd.cell(i, j);
                    text.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        num(st.omega_norm(w)),
                        num(st.k_norm(k)),
                        bd.pol.label(),
                        c.propagating,
                        num(st.k_norm(c.attenuation)),
                        c.above_light_line
                    ));
                }
            }
        }
        let p = emit::write_text(out, "bands.csv", &text)?;
        rep.wrote(&p, &format!("{} x {} grid, both polarizations", g.n_omega, g.n_kpar));
    }

    if svg_out {
        let kmax = g.k_par_norm_max;
        let mut canvas = svg::Canvas::new(
            (-kmax, kmax),
            (g.omega_norm_min, g.omega_norm_max),
            "k_par (pi/L); TM left, TE right",
            "omega (pi c / L)",
        );
        let row_height = (g.omega_norm_max - g.omega_norm_min) / (g.n_omega - 1) as f64;
        // shade propagating spans; TM mirrored to negative k
        shade_bands(&mut canvas, st, &tm, -1.0, row_height);
        shade_bands(&mut canvas, st, &te, 1.0, row_height);
        // vacuum light lines
        let m = kmax.min(g.omega_norm_max);
        let lo = g.omega_norm_min;
        if m > lo {
            canvas.polyline(&[[lo, lo], [m, m]], "black", false);
            canvas.polyline(&[[-lo, lo], [-m, m]], "black", false);
        }
        let p = emit::write_text(out, "bands.svg", &canvas.finish())?;
        rep.wrote(&p, "band diagram");
    }
    Ok(())
}

fn shade_bands(
    canvas: &mut svg::Canvas,
    st: &LayeredStack,
    bd: &BandDiagram,
    k_sign: f64,
    row_height: f64,
) {
    for (i, &w) in bd.omega.iter().enumerate() {
        let wn = st.omega_norm(w);
        let mut j = 0;
        while j < bd.k_par.len() {
            if bd.cell(i, j).propagating {
                let start = j;
                while j < bd.k_par.len() && bd.cell(i, j).propagating {
                    j += 1;
                }
                let k0 = st.k_norm(bd.k_par[start]) * k_sign;
                let k1 = st.k_norm(bd.k_par[j - 1]) * k_sign;
                let (k0, k1) = if k0 <= k1 { (k0, k1) } else { (k1, k0) };
                canvas.hspan(k0, k1, wn - 0.5 * row_height, wn + 0.5 * row_height, "#c8c8c8");
            } else {
                j += 1;
            }
        }
    }
}

// ------------------------------------------------------------ stopbands

fn stopbands(cfg: &RunConfig, out: &Path, json: bool, rep: &Reporter) -> Result<(), CliError> {
    let sb = cfg.stopbands.unwrap_or(StopbandsConfig {
        omega_norm_min: 1e-3,
        omega_norm_max: 1.0,
        n_samples: 8192,
    });
    let st = &cfg.stack;
    let range = (st.omega_from_norm(sb.omega_norm_min), st.omega_from_norm(sb.omega_norm_max));
    let bands = stopbands_normal(st, Polarization::Te, range, sb.n_samples).map_err(dom)?;
    if json {
        let intervals: Vec<_> = bands
            .iter()
            .map(|&(lo, hi)| {
                json!({
                    "omega_lo_rad_per_s": lo,
                    "omega_hi_rad_per_s": hi,
                    "omega_lo_norm": st.omega_norm(lo),
                    "omega_hi_norm": st.omega_norm(hi),
                })
            })
            .collect();
        let doc = json!({
            "period_m": st.period(),
            "scan_omega_norm": [sb.omega_norm_min, sb.omega_norm_max],
            "stopbands": intervals,
        });
        let p = emit::write_json(out, "stopbands.json", &doc)?;
        rep.wrote(&p, &format!("{} interval(s)", bands.len()));
    }
    Ok(())
}

// -------------------------------------------------------------- surface

fn cmd_surface(
    cfg: &RunConfig,
    out: &Path,
    csv: bool,
    svg_out: bool,
    rep: &Reporter,
) -> Result<(), CliError> {
    let sc = cfg
        .surface
        .as_ref()
        .ok_or_else(|| ConfigError::Validation("missing [surface] section".into()))?;
    let st = &cfg.stack;
    let omega = st.omega_from_norm(sc.omega_norm);
    let (n1, n2) = st.indices_at(omega).map_err(dom)?;
    let k_max = match sc.k_par_max_norm {
        Some(kn) => st.k_from_norm(kn),
        None => 0.98 * n1.max(n2) * omega / C_LIGHT,
    };
    let te = surface(st, omega, Polarization::Te, k_max, sc.n_samples, sc.zone).map_err(dom)?;
    let tm = surface(st, omega, Polarization::Tm, k_max, sc.n_samples, sc.zone).map_err(dom)?;

    if csv {
        let band_label = match sc.zone {
            ZoneScheme::Extended(b) => b as i64,
            ZoneScheme::Reduced => -1,
        };
        let mut text = String::from("kpar_norm,kz_norm,pol,band,gap_flag,above_light_line\n");
        for s in [&te, &tm] {
            for smp in &s.samples {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    num(st.k_norm(smp.k_par)),
                    num(smp.kz.map(|k| st.k_norm(k)).unwrap_or(f64::NAN)),
                    s.pol.label(),
                    band_label,
                    u8::from(smp.kz.is_none()),
                    smp.above_light_line
                ));
            }
        }
        let p = emit::write_text(out, "surface.csv", &text)?;
        rep.wrote(
            &p,
            &format!("omega_norm = {:.6}, {} gap(s) TE / {} TM", sc.omega_norm, te.gaps.len(), tm.gaps.len()),
        );
    }

    if svg_out {
        // paired TE/TM sets at the origin; a second pair translated by the
        // pump wavevector when a pump is configured
        let kmax_n = st.k_norm(k_max);
        let ymax = [&te, &tm]
            .iter()
            .flat_map(|s| s.samples.iter().filter_map(|x| x.kz))
            .fold(0.0f64, |a, b| a.max(st.k_norm(b)));
        let (mut x1, mut y1) = (kmax_n, ymax);
        let pump_k3 = match cfg.pump.as_ref() {
            Some(_) => {
                let pump = resolved_pump(cfg)?;
                let k3 = pump.k3(st).map_err(dom)?;
                let kp = [st.k_norm(k3[0]), st.k_norm(k3[2])];
                x1 = x1.max(kp[0] + kmax_n);
                y1 = y1.max(kp[1] + ymax);
                Some(kp)
            }
            None => None,
        };
        let mut canvas = svg::Canvas::new(
            (-x1 * 1.05, x1 * 1.05),
            (-y1 * 1.05, y1 * 1.05),
            "k_par (pi/L)",
            "K_z (pi/L)",
        );
        draw_surface_set(&mut canvas, st, &te, [0.0, 0.0], "#1f77b4", true);
        draw_surface_set(&mut canvas, st, &tm, [0.0, 0.0], "#d62728", false);
        if let Some(kp) = pump_k3 {
            draw_surface_set(&mut canvas, st, &te, kp, "#1f77b4", true);
            draw_surface_set(&mut canvas, st, &tm, kp, "#d62728", false);
            canvas.arrow([0.0, 0.0], kp, "black");
        }
        let p = emit::write_text(out, "surface.svg", &canvas.finish())?;
        rep.wrote(&p, "dispersion surfaces");
    }
    Ok(())
}

/// Draw one surface as closed curves (four mirror quadrants), split at
/// gaps, optionally translated.
fn draw_surface_set(
    canvas: &mut svg::Canvas,
    st: &LayeredStack,
    s: &nlpc::surfaces::DispersionSurface,
    offset: [f64; 2],
    stroke: &str,
    dashed: bool,
) {
    for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
        let mut seg: Vec<[f64; 2]> = Vec::new();
        for smp in &s.samples {
            match smp.kz {
                Some(kz) => seg.push([
                    offset[0] + sx * st.k_norm(smp.k_par),
                    offset[1] + sy * st.k_norm(kz),
                ]),
                None => {
                    canvas.polyline(&seg, stroke, dashed);
                    seg.clear();
                }
            }
        }
        canvas.polyline(&seg, stroke, dashed);
    }
}

// ---------------------------------------------------------------- modes

fn modes(
    cfg: &RunConfig,
    out: &Path,
    csv: bool,
    json: bool,
    rep: &Reporter,
) -> Result<(), CliError> {
    let pump = resolved_pump(cfg)?;
    let st = &cfg.stack;
    let profile = mode_profile(st, pump.omega, pump.k_par_mag(), pump.pol).map_err(dom)?;
    let spectrum = fourier_coefficients(&profile, cfg.modes.g_max).map_err(dom)?;
    let (g_star, fraction) = leading_fraction(&spectrum);

    if csv {
        let mut text = String::from("g_index,re,im,abs\n");
        for h in &spectrum.entries {
            text.push_str(&format!(
                "{},{},{},{}\n",
                h.g,
                num(h.coefficient.re),
                num(h.coefficient.im),
                num(h.magnitude)
            ));
        }
        let p = emit::write_text(out, "modes.csv", &text)?;
        rep.wrote(&p, &format!("{} harmonics", spectrum.entries.len()));
    }
    if json {
        let doc = json!({ "g_star": g_star, "fraction": fraction });
        let p = emit::write_json(out, "modes.json", &doc)?;
        rep.wrote(&p, &format!("g* = {g_star}, fraction = {fraction:.4}"));
    }
    Ok(())
}

// ---------------------------------------------------------------- match

fn solution_json(st: &LayeredStack, s: &MatchSolution) -> serde_json::Value {
    json!({
        "omega_1_rad_per_s": s.omega_1,
        "omega_2_rad_per_s": s.omega_2,
        "omega_1_norm": st.omega_norm(s.omega_1),
        "omega_2_norm": st.omega_norm(s.omega_2),
        "k_par_1_rad_per_m": s.k_par_1,
        "k_par_2_rad_per_m": s.k_par_2,
        "k_par_1_norm": [st.k_norm(s.k_par_1[0]), st.k_norm(s.k_par_1[1])],
        "k_par_2_norm": [st.k_norm(s.k_par_2[0]), st.k_norm(s.k_par_2[1])],
        "kz_1_rad_per_m": s.kz_1,
        "kz_2_rad_per_m": s.kz_2,
        "kz_1_norm": st.k_norm(s.kz_1),
        "kz_2_norm": st.k_norm(s.kz_2),
        "pol_1": s.pol_1.label(),
        "pol_2": s.pol_2.label(),
        "band_1": s.band_1,
        "band_2": s.band_2,
        "g_dc": s.g_dc,
        "residual_rad_per_m": s.residual,
        "residual_norm": st.k_norm(s.residual),
        "match_type": match s.match_type { MatchType::TypeI => "type-i", MatchType::TypeII => "type-ii" },
        "backward": s.backward,
    })
}

fn cmd_match(cfg: &RunConfig, out: &Path, json_out: bool, rep: &Reporter) -> Result<(), CliError> {
    let pump = resolved_pump(cfg)?;
    let scan = scan_spec(cfg)?;
    let solutions = match find_matches(&cfg.stack, &pump, &scan) {
        Ok(s) => s,
        // an empty scan is a domain misconfiguration; everything else
        // with zero roots is a legitimate empty result
        Err(e) => return Err(dom(e)),
    };
    if json_out {
        let doc = serde_json::Value::Array(
            solutions.iter().map(|s| solution_json(&cfg.stack, s)).collect(),
        );
        let p = emit::write_json(out, "match.json", &doc)?;
        rep.wrote(&p, &format!("{} solution(s)", solutions.len()));
    }
    Ok(())
}

// ---------------------------------------------------------------- cones

fn cone_csv(cone: &EmissionCone) -> String {
    let mut text = String::from("phi,k1x,k1y,k1z,k2x,k2y,k2z,residual\n");
    for s in &cone.samples {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            num(s.phi),
            num(s.k_1[0]),
            num(s.k_1[1]),
            num(s.k_1[2]),
            num(s.k_2[0]),
            num(s.k_2[1]),
            num(s.k_2[2]),
            num(s.residual)
        ));
    }
    text
}

fn cones(
    cfg: &RunConfig,
    out: &Path,
    csv: bool,
    json_out: bool,
    svg_out: bool,
    rep: &Reporter,
) -> Result<(), CliError> {
    let pump = resolved_pump(cfg)?;
    let dc = cfg
        .downconversion
        .as_ref()
        .ok_or_else(|| ConfigError::Validation("missing [downconversion] section".into()))?;
    let st = &cfg.stack;
    let spec = ConeSpec {
        pol_1: dc.pol_1,
        pol_2: dc.pol_2,
        band_1: dc.band_1,
        band_2: dc.band_2,
        split: dc.split,
        g_dc: dc.g_dc,
        signs: (nlpc::phasematch::Branch::Forward, nlpc::phasematch::Branch::Forward),
        n_azimuth: dc.n_azimuth,
    };
    let primary = emission_cone(st, &pump, &spec).map_err(dom)?;

    let mut cones = vec![primary.clone()];
    let mut intersections: Option<Result<nlpc::phasematch::EntanglementDirections, MatchError>> =
        None;
    if primary.match_type == MatchType::TypeII {
        let complementary = emission_cone(
            st,
            &pump,
            &ConeSpec { pol_1: dc.pol_2, pol_2: dc.pol_1, ..spec },
        )
        .map_err(dom)?;
        intersections = Some(cone_intersections(st, &primary, &complementary));
        cones.push(complementary);
    }

    if csv {
        for cone in &cones {
            let name = format!("cones_{}_{}.csv", cone.pol_1.label(), cone.pol_2.label());
            let p = emit::write_text(out, &name, &cone_csv(cone))?;
            rep.wrote(&p, &format!("{} samples", cone.samples.len()));
        }
    }

    if json_out {
        let doc = match &intersections {
            None => json!({
                "match_type": "type-i",
                "pairs": [],
                "note": "type-i cone; crossings are defined for complementary type-ii cones",
            }),
            Some(Ok(dirs)) => json!({
                "match_type": "type-ii",
                "pairs": dirs.pairs.iter().map(|p| json!({
                    "k_1_rad_per_m": p.k_1,
                    "k_2_rad_per_m": p.k_2,
                    "k_1_norm": [st.k_norm(p.k_1[0]), st.k_norm(p.k_1[1]), st.k_norm(p.k_1[2])],
                    "k_2_norm": [st.k_norm(p.k_2[0]), st.k_norm(p.k_2[1]), st.k_norm(p.k_2[2])],
                    "residual_a_rad_per_m": p.residual_a,
                    "residual_b_rad_per_m": p.residual_b,
                })).collect::<Vec<_>>(),
                "angular_separation_rad": dirs.angular_separation(),
            }),
            Some(Err(MatchError::NoIntersection)) => json!({
                "match_type": "type-ii",
                "pairs": [],
                "note": "cones do not intersect",
            }),
            Some(Err(e)) => return Err(dom(e)),
        };
        let p = emit::write_json(out, "cones_intersections.json", &doc)?;
        let n = doc["pairs"].as_array().map(|a| a.len()).unwrap_or(0);
        rep.wrote(&p, &format!("{n} crossing(s)"));
    }

    if svg_out {
        let pts: Vec<[f64; 2]> = cones
            .iter()
            .flat_map(|c| c.samples.iter().map(|s| [st.k_norm(s.k_1[0]), st.k_norm(s.k_1[1])]))
            .collect();
        let reach = pts.iter().fold(1e-12f64, |a, p| a.max(p[0].abs()).max(p[1].abs())) * 1.15;
        let mut canvas =
            svg::Canvas::new((-reach, reach), (-reach, reach), "k_1x (pi/L)", "k_1y (pi/L)");
        for (cone, color) in cones.iter().zip(["#1f77b4", "#d62728"]) {
            let mut poly: Vec<[f64; 2]> = cone
                .samples
                .iter()
                .map(|s| [st.k_norm(s.k_1[0]), st.k_norm(s.k_1[1])])
                .collect();
            if let Some(first) = poly.first().copied() {
                poly.push(first);
            }
            canvas.polyline(&poly, color, cone.pol_1 == Polarization::Te);
        }
        if let Some(Ok(dirs)) = &intersections {
            for p in &dirs.pairs {
                canvas.marker(st.k_norm(p.k_1[0]), st.k_norm(p.k_1[1]), "black");
            }
        }
        let p = emit::write_text(out, "cones.svg", &canvas.finish())?;
        rep.wrote(&p, "emission cones");
    }
    Ok(())
}

// ----------------------------------------------------------- efficiency

fn efficiency(cfg: &RunConfig, out: &Path, json_out: bool, rep: &Reporter) -> Result<(), CliError> {
    let st = &cfg.stack;
    let e = &cfg.efficiency;

    let (fill, fill_src) = match e.fill {
        FactorSource::Value(v) => (v, "config"),
        FactorSource::Auto => (st.fill(), "computed"),
    };
    let (fourier, fourier_src) = match e.fourier {
        FactorSource::Value(v) => (v, "config"),
        FactorSource::Auto => {
            let pump = resolved_pump(cfg)?;
            let profile =
                mode_profile(st, pump.omega, pump.k_par_mag(), pump.pol).map_err(dom)?;
            let spectrum = fourier_coefficients(&profile, cfg.modes.g_max).map_err(dom)?;
            (leading_fraction(&spectrum).1, "computed")
        }
    };
    let (tensor, tensor_src) = match e.tensor {
        FactorSource::Value(v) => (v, "config"),
        FactorSource::Auto => {
            let pump = resolved_pump(cfg)?;
            let scan = scan_spec(cfg)?;
            let solutions = find_matches(st, &pump, &scan).map_err(dom)?;
            let sol = solutions
                .iter()
                .find(|s| !s.backward)
                .ok_or_else(|| dom("no forward phase-matching solution for the tensor factor"))?;
            let pump_k3 = pump.k3(st).map_err(dom)?;
            let frame = CrystalFrame::default();
            let e_p = polarization_vector(pump_k3, pump.pol).map_err(dom)?;
            let e_1 = polarization_vector(sol.k_1_3(), sol.pol_1).map_err(dom)?;
            let e_2 = polarization_vector(sol.k_2_3(), sol.pol_2).map_err(dom)?;
            (deff_factor(e_p, e_1, e_2, &frame).map_err(dom)?, "computed")
        }
    };

    let factors = EfficiencyFactors { chi2_ratio: e.chi2_ratio, fill, fourier, tensor };
    let report = relative_efficiency(&factors).map_err(dom)?;

    if json_out {
        let doc = json!({
            "factors": {
                "chi2_ratio": factors.chi2_ratio,
                "fill": factors.fill,
                "fourier": factors.fourier,
                "tensor": factors.tensor,
            },
            "provenance": {
                "chi2_ratio": "config",
                "fill": fill_src,
                "fourier": fourier_src,
                "tensor": tensor_src,
            },
            "amplitude": report.amplitude,
            "efficiency": report.efficiency,
        });
        let p = emit::write_json(out, "efficiency.json", &doc)?;
        rep.wrote(&p, &format!("efficiency = {:.4e}", report.efficiency));
    }
    Ok(())
}

// -------------------------------------------------------- optimize-fill

fn optimize_fill(
    cfg: &RunConfig,
    out: &Path,
    json_out: bool,
    rep: &Reporter,
) -> Result<(), CliError> {
    let pump = cfg
        .pump
        .as_ref()
        .ok_or_else(|| ConfigError::Validation("missing [pump] section (sets the design frequency)".into()))?;
    let st = &cfg.stack;
    let omega = st.omega_from_norm(pump.omega_norm);
    let (n1, n2) = st.indices_at(omega).map_err(dom)?;
    let alpha = optimal_fill(n1, n2).map_err(dom)?;
    if json_out {
        let (no, ne) = nlpc::bandstructure::effective_indices(n1, n2, alpha);
        let doc = json!({
            "n1": n1,
            "n2": n2,
            "alpha_star": alpha,
            "n_ordinary": no,
            "n_extraordinary": ne,
            "birefringence": no - ne,
        });
        let p = emit::write_json(out, "optimize_fill.json", &doc)?;
        rep.wrote(&p, &format!("alpha* = {alpha:.6}"));
    }
    Ok(())
}
