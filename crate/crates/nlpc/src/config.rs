//! Run configuration: a line-oriented `[section]` / `key = value` text
//! format describing the stack, pump, scan parameters and output
//! selections. Lengths carry an explicit unit (`nm`, `um`, `m`);
//! frequencies and wavevectors may alternatively be given in normalized
//! units (`omega * period / (pi c)`, `k * period / pi`) through `_norm`
//! keys.
//!
//! Parsing is strict: unknown sections or keys, duplicate keys, missing
//! units and malformed numbers are all errors, reported with their line
//! number.

use std::collections::BTreeMap;

use crate::bandstructure::{BandError, LayeredStack, Polarization};
use crate::materials::{builtin_material, Interpolation, MaterialError, MaterialModel, OscillatorModel};
use crate::phasematch::PumpSpec;
use crate::surfaces::ZoneScheme;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Material(#[from] MaterialError),

    #[error(transparent)]
    Band(#[from] BandError),
}

fn perr(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, msg: msg.into() }
}

/// Reciprocal-lattice choice for the pump: fixed index or automatic
/// selection of the mode's dominant space harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpChoice {
    Auto,
    Fixed(i32),
}

/// Source of one efficiency factor: taken from the config or computed
/// from the solved geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorSource {
    Auto,
    Value(f64),
}

#[derive(Debug, Clone)]
pub struct PumpConfig {
    pub omega_norm: f64,
    pub pol: Polarization,
    pub k_par_norm: [f64; 2],
    pub band: u32,
    pub g_p: GpChoice,
}

#[derive(Debug, Clone)]
pub struct DownconversionConfig {
    pub pol_1: Polarization,
    pub pol_2: Polarization,
    pub band_1: u32,
    pub band_2: u32,
    pub split: f64,
    pub g_dc: i32,
    pub n_brackets: usize,
    pub n_azimuth: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct GridConfig {
    pub omega_norm_min: f64,
    pub omega_norm_max: f64,
    pub n_omega: usize,
    pub k_par_norm_min: f64,
    pub k_par_norm_max: f64,
    pub n_kpar: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            omega_norm_min: 1e-3,
            omega_norm_max: 1.0,
            n_omega: 512,
            k_par_norm_min: 0.0,
            k_par_norm_max: 1.0,
            n_kpar: 512,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceConfig {
    pub omega_norm: f64,
    pub zone: ZoneScheme,
    pub k_par_max_norm: Option<f64>,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ModesConfig {
    pub g_max: u32,
}

impl Default for ModesConfig {
    fn default() -> Self {
        ModesConfig { g_max: 64 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StopbandsConfig {
    pub omega_norm_min: f64,
    pub omega_norm_max: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone)]
pub struct EfficiencyConfig {
    pub chi2_ratio: f64,
    pub fill: FactorSource,
    pub fourier: FactorSource,
    pub tensor: FactorSource,
}

impl Default for EfficiencyConfig {
    fn default() -> Self {
        EfficiencyConfig {
            chi2_ratio: 1.0,
            fill: FactorSource::Auto,
            fourier: FactorSource::Auto,
            tensor: FactorSource::Auto,
        }
    }
}

/// Fully parsed and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub stack: LayeredStack,
    pub pump: Option<PumpConfig>,
    pub downconversion: Option<DownconversionConfig>,
    pub grid: GridConfig,
    pub surface: Option<SurfaceConfig>,
    pub modes: ModesConfig,
    pub stopbands: Option<StopbandsConfig>,
    pub efficiency: EfficiencyConfig,
}

impl RunConfig {
    /// Parse and validate a configuration document.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let sections = split_sections(text)?;

        // custom material definitions first, so the stack can refer to them
        let mut custom: BTreeMap<String, MaterialModel> = BTreeMap::new();
        for (name, fields) in &sections {
            if let Some(mat_name) = name.strip_prefix("material.") {
                if mat_name.is_empty() {
                    return Err(perr(fields.line, "empty material name"));
                }
                let model = parse_material(fields.clone())?;
                if custom.insert(mat_name.to_string(), model).is_some() {
                    return Err(perr(fields.line, format!("duplicate material `{mat_name}`")));
                }
            }
        }
        let resolve = |name: &str, line: usize| -> Result<MaterialModel, ConfigError> {
            if let Some(m) = custom.get(name) {
                return Ok(m.clone());
            }
            builtin_material(name)
                .map_err(|e| perr(line, format!("cannot resolve material `{name}`: {e}")))
        };

        // the stack next: frequency keys in other sections may be given as
        // vacuum wavelengths, which normalize against the period
        let mut stack = None;
        for (name, fields) in &sections {
            if name != "stack" {
                continue;
            }
            let mut f = fields.clone();
            let m1_name = f.take_str("material_1")?;
            let m2_name = f.take_str("material_2")?;
            let m1 = resolve(&m1_name, f.line)?;
            let m2 = resolve(&m2_name, f.line)?;
            let period = f.take_opt_length("period")?;
            let fill = f.take_opt_f64("fill")?;
            let t1 = f.take_opt_length("thickness_1")?;
            let t2 = f.take_opt_length("thickness_2")?;
            let st = match (period, fill, t1, t2) {
                (Some(p), Some(al), None, None) => LayeredStack::from_period_fill(m1, m2, p, al)?,
                (None, None, Some(a), Some(b)) => LayeredStack::new(m1, a, m2, b)?,
                _ => {
                    return Err(ConfigError::Validation(
                        "stack needs exactly one of {period, fill} or {thickness_1, thickness_2}"
                            .into(),
                    ))
                }
            };
            f.finish()?;
            stack = Some(st);
        }
        let stack = stack.ok_or_else(|| ConfigError::Validation("missing [stack] section".into()))?;

        let mut pump = None;
        let mut dc = None;
        let mut grid = GridConfig::default();
        let mut surface = None;
        let mut modes = ModesConfig::default();
        let mut stopbands = None;
        let mut efficiency = EfficiencyConfig::default();

        for (name, fields) in &sections {
            let mut f = fields.clone();
            match name.as_str() {
                "stack" => {}
                "pump" => {
                    let omega_norm = take_omega_norm(&mut f, "pump", &stack)?;
                    let pol = f.take_pol("polarization")?;
                    let kx = f.take_opt_f64("kpar_norm")?.unwrap_or(0.0);
                    let ky = f.take_opt_f64("kpar_y_norm")?.unwrap_or(0.0);
                    let band = f.take_opt_u32("band")?.unwrap_or(0);
                    let g_p = match f.take_opt_str("g_p")? {
                        None => GpChoice::Fixed(0),
                        Some(s) if s == "auto" => GpChoice::Auto,
                        Some(s) => GpChoice::Fixed(s.parse::<i32>().map_err(|_| {
                            ConfigError::Validation(format!("g_p must be an integer or `auto`, got `{s}`"))
                        })?),
                    };
                    f.finish()?;
                    pump = Some(PumpConfig { omega_norm, pol, k_par_norm: [kx, ky], band, g_p });
                }
                "downconversion" => {
                    let pol_1 = f.take_pol("pol_1")?;
                    let pol_2 = f.take_pol("pol_2")?;
                    let band_1 = f.take_opt_u32("band_1")?.unwrap_or(0);
                    let band_2 = f.take_opt_u32("band_2")?.unwrap_or(0);
                    let split = f.take_opt_f64("split")?.unwrap_or(0.5);
                    if !(split > 0.0 && split < 1.0) {
                        return Err(ConfigError::Validation(format!(
                            "split = {split} must lie in (0, 1)"
                        )));
                    }
                    let g_dc = f.take_opt_i32("g_dc")?.unwrap_or(0);
                    let n_brackets = f.take_opt_usize("n_brackets")?.unwrap_or(2048);
                    let n_azimuth = f.take_opt_usize("n_azimuth")?.unwrap_or(256);
                    f.finish()?;
                    dc = Some(DownconversionConfig {
                        pol_1,
                        pol_2,
                        band_1,
                        band_2,
                        split,
                        g_dc,
                        n_brackets,
                        n_azimuth,
                    });
                }
                "grid" => {
                    let d = GridConfig::default();
                    grid = GridConfig {
                        omega_norm_min: f.take_opt_f64("omega_norm_min")?.unwrap_or(d.omega_norm_min),
                        omega_norm_max: f.take_opt_f64("omega_norm_max")?.unwrap_or(d.omega_norm_max),
                        n_omega: f.take_opt_usize("n_omega")?.unwrap_or(d.n_omega),
                        k_par_norm_min: f.take_opt_f64("kpar_norm_min")?.unwrap_or(d.k_par_norm_min),
                        k_par_norm_max: f.take_opt_f64("kpar_norm_max")?.unwrap_or(d.k_par_norm_max),
                        n_kpar: f.take_opt_usize("n_kpar")?.unwrap_or(d.n_kpar),
                    };
                    f.finish()?;
                    if !(grid.omega_norm_min > 0.0 && grid.omega_norm_max > grid.omega_norm_min) {
                        return Err(ConfigError::Validation("grid omega range must be positive and ascending".into()));
                    }
                    if grid.n_omega < 2 || grid.n_kpar < 2 {
                        return Err(ConfigError::Validation("grid needs at least 2 points per axis".into()));
                    }
                }
                "surface" => {
                    let omega_norm = take_omega_norm(&mut f, "surface", &stack)?;
                    let zone = match f.take_opt_str("zone")?.as_deref() {
                        None | Some("extended") => {
                            ZoneScheme::Extended(f.take_opt_u32("band")?.unwrap_or(0))
                        }
                        Some("reduced") => ZoneScheme::Reduced,
                        Some(other) => {
                            return Err(ConfigError::Validation(format!(
                                "zone must be `reduced` or `extended`, got `{other}`"
                            )))
                        }
                    };
                    let k_par_max_norm = f.take_opt_f64("kpar_max_norm")?;
                    let n_samples = f.take_opt_usize("n_samples")?.unwrap_or(512);
                    f.finish()?;
                    surface = Some(SurfaceConfig { omega_norm, zone, k_par_max_norm, n_samples });
                }
                "modes" => {
                    modes = ModesConfig { g_max: f.take_opt_u32("g_max")?.unwrap_or(64) };
                    f.finish()?;
                }
                "stopbands" => {
                    let omega_norm_min = f.take_opt_f64("omega_norm_min")?.unwrap_or(1e-3);
                    let omega_norm_max = f.take_opt_f64("omega_norm_max")?.unwrap_or(1.0);
                    let n_samples = f.take_opt_usize("n_samples")?.unwrap_or(8192);
                    f.finish()?;
                    if !(omega_norm_min > 0.0 && omega_norm_max > omega_norm_min) {
                        return Err(ConfigError::Validation(
                            "stopbands omega range must be positive and ascending".into(),
                        ));
                    }
                    stopbands = Some(StopbandsConfig { omega_norm_min, omega_norm_max, n_samples });
                }
                "efficiency" => {
                    let chi2_ratio = match (
                        f.take_opt_f64("chi2_ratio")?,
                        f.take_opt_chi2("chi2_pm_per_v")?,
                        f.take_opt_chi2("chi2_ref_pm_per_v")?,
                    ) {
                        (Some(r), None, None) => r,
                        (None, Some(c), Some(cref)) => {
                            if cref == 0.0 {
                                return Err(ConfigError::Validation("chi2_ref_pm_per_v must be nonzero".into()));
                            }
                            c / cref
                        }
                        (None, None, None) => 1.0,
                        _ => {
                            return Err(ConfigError::Validation(
                                "give either chi2_ratio or both chi2_pm_per_v and chi2_ref_pm_per_v".into(),
                            ))
                        }
                    };
                    let fill = f.take_factor("fill")?;
                    let fourier = f.take_factor("fourier")?;
                    let tensor = f.take_factor("tensor")?;
                    f.finish()?;
                    efficiency = EfficiencyConfig { chi2_ratio, fill, fourier, tensor };
                }
                other if other.starts_with("material.") => {
                    // parsed in the first pass
                }
                other => {
                    return Err(perr(fields.line, format!("unknown section `[{other}]`")));
                }
            }
        }

        if let Some(p) = &pump {
            if !(p.omega_norm > 0.0) {
                return Err(ConfigError::Validation("pump frequency must be positive".into()));
            }
        }
        Ok(RunConfig { stack, pump, downconversion: dc, grid, surface, modes, stopbands, efficiency })
    }

    /// Pump spec in SI units against this config's stack; `g_p = auto`
    /// resolves to 0 here and is refined by the caller from the mode's
    /// dominant harmonic.
    pub fn pump_spec(&self) -> Result<(PumpSpec, GpChoice), ConfigError> {
        let p = self
            .pump
            .as_ref()
            .ok_or_else(|| ConfigError::Validation("missing [pump] section".into()))?;
        let g_p = match p.g_p {
            GpChoice::Fixed(g) => g,
            GpChoice::Auto => 0,
        };
        Ok((
            PumpSpec {
                omega: self.stack.omega_from_norm(p.omega_norm),
                pol: p.pol,
                k_par: [
                    self.stack.k_from_norm(p.k_par_norm[0]),
                    self.stack.k_from_norm(p.k_par_norm[1]),
                ],
                band: p.band,
                g_p,
            },
            p.g_p,
        ))
    }
}

fn take_omega_norm(f: &mut Fields, what: &str, stack: &LayeredStack) -> Result<f64, ConfigError> {
    match (f.take_opt_f64("omega_norm")?, f.take_opt_length("wavelength")?) {
        (Some(w), None) => Ok(w),
        // omega_norm = omega L / (pi c) = 2 L / lambda
        (None, Some(lambda)) => Ok(2.0 * stack.period() / lambda),
        (None, None) => Err(ConfigError::Validation(format!(
            "[{what}] needs omega_norm or wavelength"
        ))),
        (Some(_), Some(_)) => Err(ConfigError::Validation(format!(
            "[{what}] must not give both omega_norm and wavelength"
        ))),
    }
}

/// One parsed section: source line of the header plus its key/value pairs.
#[derive(Debug, Clone)]
struct Fields {
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn take_str(&mut self, key: &str) -> Result<String, ConfigError> {
        self.take(key)
            .map(|(_, v)| v)
            .ok_or_else(|| ConfigError::Validation(format!("missing key `{key}`")))
    }

    fn take_opt_str(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        Ok(self.take(key).map(|(_, v)| v))
    }

    fn take_opt_f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| perr(line, format!("`{key}` expects a number, got `{v}`"))),
        }
    }

    fn take_opt_u32(&mut self, key: &str) -> Result<Option<u32>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<u32>()
                .map(Some)
                .map_err(|_| perr(line, format!("`{key}` expects a non-negative integer, got `{v}`"))),
        }
    }

    fn take_opt_i32(&mut self, key: &str) -> Result<Option<i32>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<i32>()
                .map(Some)
                .map_err(|_| perr(line, format!("`{key}` expects an integer, got `{v}`"))),
        }
    }

    fn take_opt_usize(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| perr(line, format!("`{key}` expects a non-negative integer, got `{v}`"))),
        }
    }

    fn take_opt_length(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => parse_length_m(&v)
                .map(Some)
                .ok_or_else(|| perr(line, format!("`{key}` expects a length like `750 nm`, got `{v}`"))),
        }
    }

    fn take_opt_chi2(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => {
                let raw = v.strip_suffix("pm/V").map(str::trim).unwrap_or(&v);
                raw.parse::<f64>()
                    .map(Some)
                    .map_err(|_| perr(line, format!("`{key}` expects a value like `200 pm/V`, got `{v}`")))
            }
        }
    }

    fn take_pol(&mut self, key: &str) -> Result<Polarization, ConfigError> {
        let (line, v) = self
            .take(key)
            .ok_or_else(|| ConfigError::Validation(format!("missing key `{key}`")))?;
        match v.to_ascii_lowercase().as_str() {
            "te" => Ok(Polarization::Te),
            "tm" => Ok(Polarization::Tm),
            other => Err(perr(line, format!("`{key}` must be te or tm, got `{other}`"))),
        }
    }

    fn take_factor(&mut self, key: &str) -> Result<FactorSource, ConfigError> {
        match self.take(key) {
            None => Ok(FactorSource::Auto),
            Some((_, v)) if v == "auto" => Ok(FactorSource::Auto),
            Some((line, v)) => v
                .parse::<f64>()
                .map(FactorSource::Value)
                .map_err(|_| perr(line, format!("`{key}` expects a number or `auto`, got `{v}`"))),
        }
    }

    /// Reject any keys that were not consumed.
    fn finish(self) -> Result<(), ConfigError> {
        if let Some((key, (line, _))) = self.entries.into_iter().next() {
            return Err(perr(line, format!("unknown key `{key}`")));
        }
        Ok(())
    }
}

fn split_sections(text: &str) -> Result<Vec<(String, Fields)>, ConfigError> {
    let mut sections: Vec<(String, Fields)> = Vec::new();
    let mut current: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| perr(line_no, "unterminated section header"))?
                .trim()
                .to_ascii_lowercase();
            if name.is_empty() {
                return Err(perr(line_no, "empty section name"));
            }
            if sections.iter().any(|(n, _)| *n == name) {
                return Err(perr(line_no, format!("duplicate section `[{name}]`")));
            }
            sections.push((name, Fields { line: line_no, entries: BTreeMap::new() }));
            current = Some(sections.len() - 1);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(perr(line_no, format!("expected `key = value`, got `{line}`")));
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(perr(line_no, "empty key"));
        }
        if value.is_empty() {
            return Err(perr(line_no, format!("empty value for `{key}`")));
        }
        let Some(i) = current else {
            return Err(perr(line_no, "key outside of any [section]"));
        };
        if sections[i].1.entries.insert(key.clone(), (line_no, value)).is_some() {
            return Err(perr(line_no, format!("duplicate key `{key}`")));
        }
    }
    Ok(sections)
}

/// `"187.5 nm"` / `"1.5 um"` / `"2e-6 m"` to metres.
fn parse_length_m(s: &str) -> Option<f64> {
    let s = s.trim();
    let (num, unit) = s.split_once(char::is_whitespace).or_else(|| {
        // allow `750nm` without a space
        let split = s.find(|c: char| c.is_ascii_alphabetic())?;
        Some((&s[..split], &s[split..]))
    })?;
    let v: f64 = num.trim().parse().ok()?;
    if !v.is_finite() || v <= 0.0 {
        return None;
    }
    match unit.trim() {
        "nm" => Some(v * 1e-9),
        "um" => Some(v * 1e-6),
        "mm" => Some(v * 1e-3),
        "m" => Some(v),
        _ => None,
    }
}

fn parse_material(mut f: Fields) -> Result<MaterialModel, ConfigError> {
    let model = f.take_str("model")?;
    let out = match model.as_str() {
        "constant" => {
            let n = f
                .take_opt_f64("n")?
                .ok_or_else(|| ConfigError::Validation("constant model needs `n`".into()))?;
            let range = take_range(&mut f)?.unwrap_or((100e-9, 100e-6));
            MaterialModel::constant(n, range)?
        }
        "oscillator" => {
            let e0 = f
                .take_opt_f64("e0_ev")?
                .ok_or_else(|| ConfigError::Validation("oscillator model needs `e0_ev`".into()))?;
            let ed = f
                .take_opt_f64("ed_ev")?
                .ok_or_else(|| ConfigError::Validation("oscillator model needs `ed_ev`".into()))?;
            let lattice = f.take_opt_f64("lattice_ev")?.unwrap_or(0.0);
            let offset = f.take_opt_f64("offset")?.unwrap_or(0.0);
            let range = take_range(&mut f)?
                .ok_or_else(|| ConfigError::Validation("oscillator model needs `range`".into()))?;
            let anchor_lambda = f.take_opt_length("anchor_wavelength")?;
            let anchor_n = f.take_opt_f64("anchor_n")?;
            let mut m = OscillatorModel { e0_ev: e0, ed_ev: ed, lattice_ev: lattice, offset, range_m: range };
            match (anchor_lambda, anchor_n) {
                (Some(lam), Some(n)) => {
                    let raw = MaterialModel::Oscillator(m.clone());
                    let at = raw.refractive_index(lam)?;
                    m.offset += n - at;
                }
                (None, None) => {}
                _ => {
                    return Err(ConfigError::Validation(
                        "anchor needs both anchor_wavelength and anchor_n".into(),
                    ))
                }
            }
            MaterialModel::oscillator(m)?
        }
        "table" => {
            let (line, pts) = f
                .take("points")
                .ok_or_else(|| ConfigError::Validation("table model needs `points`".into()))?;
            let interp = match f.take_opt_str("interpolation")?.as_deref() {
                None | Some("cubic") => Interpolation::MonotoneCubic,
                Some("linear") => Interpolation::Linear,
                Some(other) => {
                    return Err(perr(line, format!("interpolation must be linear or cubic, got `{other}`")))
                }
            };
            let mut lambda = Vec::new();
            let mut index = Vec::new();
            for pair in pts.split(',') {
                let Some((lam, n)) = pair.split_once(':') else {
                    return Err(perr(line, format!("table point `{pair}` is not `wavelength: n`")));
                };
                let lam_m = parse_length_m(lam.trim())
                    .ok_or_else(|| perr(line, format!("bad wavelength `{}`", lam.trim())))?;
                let n: f64 = n
                    .trim()
                    .parse()
                    .map_err(|_| perr(line, format!("bad index `{}`", n.trim())))?;
                lambda.push(lam_m);
                index.push(n);
            }
            MaterialModel::table(lambda, index, interp)?
        }
        other => {
            return Err(ConfigError::Validation(format!(
                "unknown material model `{other}` (constant | oscillator | table)"
            )))
        }
    };
    f.finish()?;
    Ok(out)
}

fn take_range(f: &mut Fields) -> Result<Option<(f64, f64)>, ConfigError> {
    match f.take("range") {
        None => Ok(None),
        Some((line, v)) => {
            let Some((lo, hi)) = v.split_once("..") else {
                return Err(perr(line, format!("range `{v}` is not `lo .. hi`")));
            };
            let lo = parse_length_m(lo.trim())
                .ok_or_else(|| perr(line, format!("bad range start `{}`", lo.trim())))?;
            let hi = parse_length_m(hi.trim())
                .ok_or_else(|| perr(line, format!("bad range end `{}`", hi.trim())))?;
            if !(hi > lo) {
                return Err(perr(line, "range must be ascending"));
            }
            Ok(Some((lo, hi)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
[stack]
material_1 = algaas-x0.4
material_2 = air
period = 187.5 nm
fill = 0.656

[pump]
omega_norm = 0.5
polarization = tm
kpar_norm = 0.2
band = 1
";

    #[test]
    fn minimal_config_parses() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert!((cfg.stack.period() - 187.5e-9).abs() < 1e-18);
        assert!((cfg.stack.fill() - 0.656).abs() < 1e-12);
        let (pump, choice) = cfg.pump_spec().unwrap();
        assert_eq!(pump.band, 1);
        assert_eq!(choice, GpChoice::Fixed(0));
        assert!((cfg.stack.omega_norm(pump.omega) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn thicknesses_alternative() {
        let cfg = RunConfig::parse(
            "[stack]\nmaterial_1 = air\nmaterial_2 = air\nthickness_1 = 10 nm\nthickness_2 = 30 nm\n",
        )
        .unwrap();
        assert!((cfg.stack.fill() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn mixed_geometry_keys_rejected() {
        let err = RunConfig::parse(
            "[stack]\nmaterial_1 = air\nmaterial_2 = air\nperiod = 40 nm\nfill = 0.5\nthickness_1 = 10 nm\nthickness_2 = 30 nm\n",
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Validation(_)));
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let err = RunConfig::parse(
            "[stack]\nmaterial_1 = air\nmaterial_2 = air\nperiod = 40 nm\nfill = 0.5\ntypo_key = 1\n",
        )
        .unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 6),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_key_rejected() {
        let err = RunConfig::parse("[stack]\nperiod = 40 nm\nperiod = 50 nm\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, .. }));
    }

    #[test]
    fn lengths_require_units() {
        let err = RunConfig::parse(
            "[stack]\nmaterial_1 = air\nmaterial_2 = air\nperiod = 40\nfill = 0.5\n",
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }));
    }

    #[test]
    fn custom_table_material() {
        let cfg = RunConfig::parse(
            "[material.glass]\nmodel = table\npoints = 700 nm: 3.5, 800 nm: 3.3\ninterpolation = linear\n\n[stack]\nmaterial_1 = glass\nmaterial_2 = air\nperiod = 40 nm\nfill = 0.5\n",
        )
        .unwrap();
        let (n1, _) = cfg
            .stack
            .indices_at(2.0 * std::f64::consts::PI * crate::C_LIGHT / 750e-9)
            .unwrap();
        assert!((n1 - 3.4).abs() < 1e-12);
    }

    #[test]
    fn custom_oscillator_with_anchor() {
        let cfg = RunConfig::parse(
            "[material.osc]\nmodel = oscillator\ne0_ev = 4.0\ned_ev = 35.0\nrange = 700 nm .. 1800 nm\nanchor_wavelength = 750 nm\nanchor_n = 3.40\n\n[stack]\nmaterial_1 = osc\nmaterial_2 = air\nperiod = 40 nm\nfill = 0.5\n",
        )
        .unwrap();
        let (n1, _) = cfg
            .stack
            .indices_at(2.0 * std::f64::consts::PI * crate::C_LIGHT / 750e-9)
            .unwrap();
        assert!((n1 - 3.40).abs() < 1e-12);
    }

    #[test]
    fn efficiency_section() {
        let cfg = RunConfig::parse(
            "[stack]\nmaterial_1 = air\nmaterial_2 = air\nperiod = 40 nm\nfill = 0.5\n\n[efficiency]\nchi2_pm_per_v = 200 pm/V\nchi2_ref_pm_per_v = 2.2 pm/V\nfill = 0.65\nfourier = auto\ntensor = 0.83\n",
        )
        .unwrap();
        assert!((cfg.efficiency.chi2_ratio - 200.0 / 2.2).abs() < 1e-12);
        assert_eq!(cfg.efficiency.fill, FactorSource::Value(0.65));
        assert_eq!(cfg.efficiency.fourier, FactorSource::Auto);
        assert_eq!(cfg.efficiency.tensor, FactorSource::Value(0.83));
    }

    #[test]
    fn junk_never_panics() {
        for text in [
            "",
            "[",
            "[stack",
            "]]",
            "key = value",
            "[stack]\n= 3\n",
            "[stack]\nperiod 40nm\n",
            "[pump]\nomega_norm = nan\n",
            "[material.]\nmodel = constant\n",
            "[stack]\nmaterial_1 = \u{7}\u{3}binary\n",
        ] {
            let _ = RunConfig::parse(text);
        }
    }
}
