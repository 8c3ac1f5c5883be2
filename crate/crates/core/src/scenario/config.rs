use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::grid::Dim;
use crate::kernels::{BoundaryCondition, InteractionKind};
use crate::lattice::Stencil;
use crate::meanfield::ConvergenceParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    NseEvolve,
    NseGround,
    HartreeCoulomb,
    FockSectors,
    MeanfieldConverge,
    SceMisstep,
    HydrogenWrongNse,
    KernelVerify,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::NseEvolve,
        ScenarioKind::NseGround,
        ScenarioKind::HartreeCoulomb,
        ScenarioKind::FockSectors,
        ScenarioKind::MeanfieldConverge,
        ScenarioKind::SceMisstep,
        ScenarioKind::HydrogenWrongNse,
        ScenarioKind::KernelVerify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::NseEvolve => "nse-evolve",
            ScenarioKind::NseGround => "nse-ground",
            ScenarioKind::HartreeCoulomb => "hartree-coulomb",
            ScenarioKind::FockSectors => "fock-sectors",
            ScenarioKind::MeanfieldConverge => "meanfield-converge",
            ScenarioKind::SceMisstep => "sce-misstep",
            ScenarioKind::HydrogenWrongNse => "hydrogen-wrong-nse",
            ScenarioKind::KernelVerify => "kernel-verify",
        }
    }

    /// The TOML section holding this scenario's parameters.
    pub fn section(self) -> &'static str {
        match self {
            ScenarioKind::NseEvolve => "nse_evolve",
            ScenarioKind::NseGround => "nse_ground",
            ScenarioKind::HartreeCoulomb => "hartree_coulomb",
            ScenarioKind::FockSectors => "fock_sectors",
            ScenarioKind::MeanfieldConverge => "meanfield_converge",
            ScenarioKind::SceMisstep => "sce_misstep",
            ScenarioKind::HydrogenWrongNse => "hydrogen_wrong_nse",
            ScenarioKind::KernelVerify => "kernel_verify",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            ScenarioKind::NseEvolve => "self-gravitating Gaussian under the Newton-Schrodinger equation",
            ScenarioKind::NseGround => "imaginary-time ground state and its real-time stationarity",
            ScenarioKind::HartreeCoulomb => "Coulomb-repulsive Hartree spreading against free spreading",
            ScenarioKind::FockSectors => "dense N-particle sectors of the field Hamiltonian and their linearity",
            ScenarioKind::MeanfieldConverge => "exact N-boson dynamics converging to the Hartree orbital",
            ScenarioKind::SceMisstep => "semiclassically sourced orbital against the linear one-particle field",
            ScenarioKind::HydrogenWrongNse => "hydrogen ground state with and without electron self-repulsion",
            ScenarioKind::KernelVerify => "regularized kernel limits and the isolated Poisson solver",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NseEvolveParams {
    pub points: usize,
    pub spacing: f64,
    pub mass: f64,
    pub g_newton: f64,
    pub width: f64,
    pub momentum: [f64; 3],
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    pub boundary: BoundaryCondition,
}

impl Default for NseEvolveParams {
    fn default() -> Self {
        Self {
            points: 32,
            spacing: 0.5,
            mass: 1.0,
            g_newton: 3.0,
            width: 1.0,
            momentum: [0.0; 3],
            dt: 0.01,
            steps: 200,
            record_every: 10,
            boundary: BoundaryCondition::Isolated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NseGroundParams {
    pub points: usize,
    pub spacing: f64,
    pub mass: f64,
    pub g_newton: f64,
    /// rms width of the Gaussian starting guess.
    pub width: f64,
    pub itol: f64,
    pub max_iter: usize,
    pub check_dt: f64,
    pub check_steps: usize,
    /// Allowed `|E / mu - 1/3|`.
    pub virial_tolerance: f64,
}

impl Default for NseGroundParams {
    fn default() -> Self {
        Self {
            points: 32,
            spacing: 0.5,
            mass: 1.0,
            g_newton: 4.0,
            width: 2.0,
            itol: 1e-8,
            max_iter: 5000,
            check_dt: 0.002,
            check_steps: 50,
            virial_tolerance: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HartreeCoulombParams {
    pub points: usize,
    pub spacing: f64,
    pub mass: f64,
    pub e2_over_4pi: f64,
    pub width: f64,
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
}

impl Default for HartreeCoulombParams {
    fn default() -> Self {
        Self {
            points: 32,
            spacing: 0.5,
            mass: 1.0,
            e2_over_4pi: 2.0,
            width: 1.0,
            dt: 0.01,
            steps: 100,
            record_every: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FockSectorsParams {
    pub dim: Dim,
    pub sites_per_axis: usize,
    pub spacing: f64,
    pub mass: f64,
    pub kind: InteractionKind,
    /// `G m^2` or `e^2 / 4 pi`.
    pub strength: f64,
    pub sigma: f64,
    pub max_particles: usize,
    pub stencil: Stencil,
    pub superpositions: usize,
    pub t: f64,
}

impl Default for FockSectorsParams {
    fn default() -> Self {
        Self {
            dim: Dim::One,
            sites_per_axis: 4,
            spacing: 1.0,
            mass: 1.0,
            kind: InteractionKind::GravityAttractive,
            strength: 1.0,
            sigma: 2.0,
            max_particles: 2,
            stencil: Stencil::FourthOrder,
            superpositions: 20,
            t: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceMisstepParams {
    pub sites: usize,
    pub spacing: f64,
    pub mass: f64,
    pub g_newton: f64,
    pub sigma: f64,
    pub centre: f64,
    pub width: f64,
    pub momentum: f64,
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    pub frozen_source: bool,
    pub threshold: f64,
}

impl Default for SceMisstepParams {
    fn default() -> Self {
        Self {
            sites: 24,
            spacing: 1.0,
            mass: 1.0,
            g_newton: 4.0,
            sigma: 2.0,
            centre: 8.0,
            width: 1.2,
            momentum: 0.0,
            dt: 0.01,
            steps: 500,
            record_every: 10,
            frozen_source: false,
            threshold: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HydrogenParams {
    pub reduced_mass: f64,
    pub alpha: f64,
    pub r_max: f64,
    pub n_points: usize,
    /// Radial samples written to the CSV.
    pub output_points: usize,
}

impl Default for HydrogenParams {
    fn default() -> Self {
        Self { reduced_mass: 1.0, alpha: 1.0, r_max: 60.0, n_points: 60_000, output_points: 300 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelVerifyParams {
    pub sigmas: Vec<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
    pub poisson_points: usize,
    pub poisson_spacing: f64,
    pub g_newton: f64,
}

impl Default for KernelVerifyParams {
    fn default() -> Self {
        Self {
            sigmas: vec![1.0, 0.3, 0.1, 0.01, 0.001],
            r_min: 0.01,
            r_max: 10.0,
            samples: 400,
            poisson_points: 32,
            poisson_spacing: 1.0,
            g_newton: 1.0,
        }
    }
}

/// A parsed run description. Exactly the section matching `scenario` may be
/// present; when absent, its defaults apply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nse_evolve: Option<NseEvolveParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nse_ground: Option<NseGroundParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hartree_coulomb: Option<HartreeCoulombParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_sectors: Option<FockSectorsParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meanfield_converge: Option<ConvergenceParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sce_misstep: Option<SceMisstepParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hydrogen_wrong_nse: Option<HydrogenParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_verify: Option<KernelVerifyParams>,
}

/// A configuration problem, anchored to a 1-based source line when known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Invalid value: `(key, message)`.
type Invalid = (&'static str, String);

fn positive(key: &'static str, v: f64) -> Result<(), Invalid> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err((key, format!("`{key}` must be finite and positive, got {v}")))
    }
}

fn non_negative(key: &'static str, v: f64) -> Result<(), Invalid> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err((key, format!("`{key}` must be finite and non-negative, got {v}")))
    }
}

fn at_least(key: &'static str, v: usize, min: usize) -> Result<(), Invalid> {
    if v >= min {
        Ok(())
    } else {
        Err((key, format!("`{key}` must be at least {min}, got {v}")))
    }
}

impl NseEvolveParams {
    fn validate(&self) -> Result<(), Invalid> {
        at_least("points", self.points, 4)?;
        positive("spacing", self.spacing)?;
        positive("mass", self.mass)?;
        non_negative("g_newton", self.g_newton)?;
        positive("width", self.width)?;
        if self.momentum.iter().any(|p| !p.is_finite()) {
            return Err(("momentum", "`momentum` must be finite".into()));
        }
        positive("dt", self.dt)?;
        at_least("steps", self.steps, 1)?;
        at_least("record_every", self.record_every, 1)
    }
}

impl NseGroundParams {
    fn validate(&self) -> Result<(), Invalid> {
        at_least("points", self.points, 4)?;
        positive("spacing", self.spacing)?;
        positive("mass", self.mass)?;
        positive("g_newton", self.g_newton)?;
        positive("width", self.width)?;
        positive("itol", self.itol)?;
        at_least("max_iter", self.max_iter, 1)?;
        positive("check_dt", self.check_dt)?;
        positive("virial_tolerance", self.virial_tolerance)
    }
}

impl HartreeCoulombParams {
    fn validate(&self) -> Result<(), Invalid> {
        at_least("points", self.points, 4)?;
        positive("spacing", self.spacing)?;
        positive("mass", self.mass)?;
        positive("e2_over_4pi", self.e2_over_4pi)?;
        positive("width", self.width)?;
        positive("dt", self.dt)?;
        at_least("steps", self.steps, 1)?;
        at_least("record_every", self.record_every, 1)
    }
}

impl FockSectorsParams {
    fn validate(&self) -> Result<(), Invalid> {
        at_least("sites_per_axis", self.sites_per_axis, 2)?;
        positive("spacing", self.spacing)?;
        positive("mass", self.mass)?;
        non_negative("strength", self.strength)?;
        positive("sigma", self.sigma)?;
        if self.kind == InteractionKind::CoulombExternalAttractive {
            return Err(("kind", "`kind` must be a pair interaction".into()));
        }
        at_least("max_particles", self.max_particles, 2)?;
        non_negative("t", self.t)
    }
}

fn validate_meanfield(p: &ConvergenceParams) -> Result<(), Invalid> {
    at_least("sites", p.sites, 2)?;
    positive("spacing", p.spacing)?;
    positive("mass", p.mass)?;
    positive("sigma", p.sigma)?;
    non_negative("g_total", p.g_total)?;
    if p.kind == InteractionKind::CoulombExternalAttractive {
        return Err(("kind", "`kind` must be a pair interaction".into()));
    }
    if p.n_values.len() < 2 || p.n_values.iter().any(|&n| n < 2) {
        return Err(("n_values", "`n_values` needs at least two entries, each >= 2".into()));
    }
    non_negative("t", p.t)?;
    positive("dt", p.dt)?;
    at_least("samples", p.samples, 1)?;
    positive("lump_width", p.lump_width)
}

impl SceMisstepParams {
    fn validate(&self) -> Result<(), Invalid> {
        at_least("sites", self.sites, 2)?;
        positive("spacing", self.spacing)?;
        positive("mass", self.mass)?;
        non_negative("g_newton", self.g_newton)?;
        positive("sigma", self.sigma)?;
        positive("width", self.width)?;
        if !(self.centre.is_finite() && self.momentum.is_finite()) {
            return Err(("centre", "`centre` and `momentum` must be finite".into()));
        }
        positive("dt", self.dt)?;
        at_least("record_every", self.record_every, 1)?;
        positive("threshold", self.threshold)
    }
}

impl HydrogenParams {
    fn validate(&self) -> Result<(), Invalid> {
        positive("reduced_mass", self.reduced_mass)?;
        positive("alpha", self.alpha)?;
        positive("r_max", self.r_max)?;
        at_least("n_points", self.n_points, 1000)?;
        at_least("output_points", self.output_points, 2)
    }
}

impl KernelVerifyParams {
    fn validate(&self) -> Result<(), Invalid> {
        if self.sigmas.is_empty() {
            return Err(("sigmas", "`sigmas` must not be empty".into()));
        }
        for &s in &self.sigmas {
            positive("sigmas", s)?;
        }
        positive("r_min", self.r_min)?;
        if !(self.r_max > self.r_min) {
            return Err(("r_max", "`r_max` must exceed `r_min`".into()));
        }
        at_least("samples", self.samples, 2)?;
        at_least("poisson_points", self.poisson_points, 16)?;
        positive("poisson_spacing", self.poisson_spacing)?;
        positive("g_newton", self.g_newton)
    }
}

/// 1-based line of `key = ...`, inside `[section]` when given.
fn locate(source: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, line) in source.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            current = Some(t.trim_matches(|c| c == '[' || c == ']').trim().to_string());
            continue;
        }
        let in_scope = match section {
            Some(s) => current.as_deref() == Some(s),
            None => current.is_none(),
        };
        if in_scope {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn section_line(source: &str, section: &str) -> Option<usize> {
    source
        .lines()
        .position(|l| l.trim().trim_matches(|c| c == '[' || c == ']').trim() == section && l.trim().starts_with('['))
        .map(|i| i + 1)
}

impl ScenarioConfig {
    /// Defaults for `kind`, with its section filled in.
    pub fn default_for(kind: ScenarioKind) -> Self {
        let mut c = Self {
            scenario: kind,
            output_dir: None,
            seed: 0,
            nse_evolve: None,
            nse_ground: None,
            hartree_coulomb: None,
            fock_sectors: None,
            meanfield_converge: None,
            sce_misstep: None,
            hydrogen_wrong_nse: None,
            kernel_verify: None,
        };
        c.fill_defaults();
        c
    }

    /// Parses and validates TOML text.
    pub fn parse(source: &str) -> Result<Self, ConfigError> {
        let mut config: Self = toml::from_str(source).map_err(|e| ConfigError {
            line: e.span().map(|s| source[..s.start.min(source.len())].matches('\n').count() + 1),
            message: e.message().to_string(),
        })?;
        config.check_sections(source)?;
        config.fill_defaults();
        config.validate_against(source)?;
        Ok(config)
    }

    fn present_sections(&self) -> Vec<ScenarioKind> {
        let mut v = Vec::new();
        let flags = [
            (ScenarioKind::NseEvolve, self.nse_evolve.is_some()),
            (ScenarioKind::NseGround, self.nse_ground.is_some()),
            (ScenarioKind::HartreeCoulomb, self.hartree_coulomb.is_some()),
            (ScenarioKind::FockSectors, self.fock_sectors.is_some()),
            (ScenarioKind::MeanfieldConverge, self.meanfield_converge.is_some()),
            (ScenarioKind::SceMisstep, self.sce_misstep.is_some()),
            (ScenarioKind::HydrogenWrongNse, self.hydrogen_wrong_nse.is_some()),
            (ScenarioKind::KernelVerify, self.kernel_verify.is_some()),
        ];
        for (k, present) in flags {
            if present {
                v.push(k);
            }
        }
        v
    }

    fn check_sections(&self, source: &str) -> Result<(), ConfigError> {
        for k in self.present_sections() {
            if k != self.scenario {
                return Err(ConfigError {
                    line: section_line(source, k.section()),
                    message: format!("section [{}] does not apply to scenario `{}`", k.section(), self.scenario),
                });
            }
        }
        Ok(())
    }

    fn fill_defaults(&mut self) {
        match self.scenario {
            ScenarioKind::NseEvolve => {
                self.nse_evolve.get_or_insert_with(Default::default);
            }
            ScenarioKind::NseGround => {
                self.nse_ground.get_or_insert_with(Default::default);
            }
            ScenarioKind::HartreeCoulomb => {
                self.hartree_coulomb.get_or_insert_with(Default::default);
            }
            ScenarioKind::FockSectors => {
                self.fock_sectors.get_or_insert_with(Default::default);
            }
            ScenarioKind::MeanfieldConverge => {
                self.meanfield_converge.get_or_insert_with(Default::default);
            }
            ScenarioKind::SceMisstep => {
                self.sce_misstep.get_or_insert_with(Default::default);
            }
            ScenarioKind::HydrogenWrongNse => {
                self.hydrogen_wrong_nse.get_or_insert_with(Default::default);
            }
            ScenarioKind::KernelVerify => {
                self.kernel_verify.get_or_insert_with(Default::default);
            }
        }
    }

    /// Semantic checks on the filled-in section.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_against("")
    }

    fn validate_against(&self, source: &str) -> Result<(), ConfigError> {
        if self.seed > i64::MAX as u64 {
            return Err(ConfigError {
                line: locate(source, None, "seed"),
                message: "`seed` must fit in a TOML integer (at most 2^63 - 1)".into(),
            });
        }
        let result = match self.scenario {
            ScenarioKind::NseEvolve => self.nse_evolve.as_ref().map(NseEvolveParams::validate),
            ScenarioKind::NseGround => self.nse_ground.as_ref().map(NseGroundParams::validate),
            ScenarioKind::HartreeCoulomb => self.hartree_coulomb.as_ref().map(HartreeCoulombParams::validate),
            ScenarioKind::FockSectors => self.fock_sectors.as_ref().map(FockSectorsParams::validate),
            ScenarioKind::MeanfieldConverge => self.meanfield_converge.as_ref().map(validate_meanfield),
            ScenarioKind::SceMisstep => self.sce_misstep.as_ref().map(SceMisstepParams::validate),
            ScenarioKind::HydrogenWrongNse => self.hydrogen_wrong_nse.as_ref().map(HydrogenParams::validate),
            ScenarioKind::KernelVerify => self.kernel_verify.as_ref().map(KernelVerifyParams::validate),
        };
        match result {
            Some(Err((key, message))) => {
                Err(ConfigError { line: locate(source, Some(self.scenario.section()), key), message })
            }
            Some(Ok(())) => Ok(()),
            None => Err(ConfigError { line: None, message: format!("missing section [{}]", self.scenario.section()) }),
        }
    }

    /// Canonical TOML of the fully populated configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    /// Git-style object hash: `sha256("blob <len>\0" + canonical TOML)`.
    pub fn content_hash(&self) -> String {
        let body = self.to_toml();
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", body.len()).as_bytes());
        h.update(body.as_bytes());
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_for_every_scenario() {
        for k in ScenarioKind::ALL {
            let c = ScenarioConfig::default_for(k);
            let back = ScenarioConfig::parse(&c.to_toml()).unwrap();
            assert_eq!(back, c, "{k}");
            assert_eq!(back.content_hash(), c.content_hash());
        }
    }

    #[test]
    fn minimal_config_gets_section_defaults() {
        let c = ScenarioConfig::parse("scenario = \"kernel-verify\"\n").unwrap();
        assert_eq!(c.kernel_verify, Some(KernelVerifyParams::default()));
    }

    #[test]
    fn empty_config_is_rejected() {
        let e = ScenarioConfig::parse("").unwrap_err();
        assert!(e.message.contains("scenario"), "{e}");
    }

    #[test]
    fn unknown_key_is_line_anchored() {
        let src = "scenario = \"nse-evolve\"\n\n[nse_evolve]\npoints = 16\nbogus = 1\n";
        let e = ScenarioConfig::parse(src).unwrap_err();
        assert_eq!(e.line, Some(5), "{e}");
        assert!(e.message.contains("bogus"));
    }

    #[test]
    fn invalid_value_is_line_anchored() {
        let src = "scenario = \"nse-evolve\"\nseed = 3\n[nse_evolve]\npoints = 16\nspacing = -0.5\n";
        let e = ScenarioConfig::parse(src).unwrap_err();
        assert_eq!(e.line, Some(5));
        assert!(e.to_string().starts_with("line 5:"));
    }

    #[test]
    fn foreign_section_is_rejected() {
        let src = "scenario = \"nse-evolve\"\n[kernel_verify]\nsamples = 10\n";
        let e = ScenarioConfig::parse(src).unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn hash_changes_with_content() {
        let a = ScenarioConfig::default_for(ScenarioKind::NseEvolve);
        let mut b = a.clone();
        b.seed = 1;
        assert_ne!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash().len(), 64);
    }
}
