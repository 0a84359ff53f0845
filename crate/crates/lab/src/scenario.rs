//! JSON scenario schema and its translation into core types.

use arrival_core::detectors::{
    Aperture, ChiProfile, Coupling, PmlDirection, PmlProfile, ScalarPotential, SlabDetector, SpacetimeRegion,
};
use arrival_core::fields::{
    BackflowPair, DoubleSlit, GaussianPacket, LongitudinalProfile, PlaneWave, SamplingBox, SpinVector, Superposition,
    WaveField, WaveguideSpinField,
};
use arrival_core::guidance::{IntegratorOptions, Surface};
use arrival_core::{Complex64, Vector3};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

pub const SCHEMA_VERSION: u32 = 1;

/// One complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Must equal 1.
    pub schema_version: u32,
    /// Root seed of every random stream.
    #[serde(default)]
    pub seed: u64,
    /// Integrator settings shared by every trajectory in the run.
    #[serde(default)]
    pub integrator: IntegratorSpec,
    pub task: Task,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self { tol: default_tol(), max_steps: default_max_steps() }
    }
}

impl IntegratorSpec {
    pub fn options(&self) -> IntegratorOptions {
        IntegratorOptions { tol: self.tol, max_steps: self.max_steps, ..IntegratorOptions::default() }
    }
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_steps() -> usize {
    1_000_000
}

fn unit() -> f64 {
    1.0
}

fn one() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_bins() -> usize {
    200
}

fn default_models() -> usize {
    100
}

fn default_max_dim() -> usize {
    8
}

fn default_orders() -> usize {
    3
}

fn yes() -> bool {
    true
}

pub(crate) fn complex(c: [f64; 2]) -> Complex64 {
    Complex64::new(c[0], c[1])
}

pub(crate) fn vector(v: [f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

/// The command and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Task {
    BackflowMap(BackflowMapParams),
    Trajectories(TrajectoriesParams),
    ArrivalHist(ArrivalHistParams),
    Slab(SlabParams),
    Pml(PmlParams),
    Spacetime(SpacetimeParams),
    PovmCheck(PovmCheckParams),
    GtzTest(GtzParams),
    WhichPath(WhichPathParams),
    ScatteredField(ScatteredFieldParams),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::BackflowMap(_) => "backflow-map",
            Task::Trajectories(_) => "trajectories",
            Task::ArrivalHist(_) => "arrival-hist",
            Task::Slab(_) => "slab",
            Task::Pml(_) => "pml",
            Task::Spacetime(_) => "spacetime",
            Task::PovmCheck(_) => "povm-check",
            Task::GtzTest(_) => "gtz-test",
            Task::WhichPath(_) => "which-path",
            Task::ScatteredField(_) => "scattered-field",
        }
    }
}

/// Uniform grid of `points` values over [min, max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self, name: &str) -> Result<Vec<f64>, LabError> {
        if !(self.min.is_finite() && self.max.is_finite())
            || self.points == 0
            || (self.points > 1 && !(self.max > self.min))
        {
            return Err(LabError::precondition(name, "axis needs finite bounds, max > min and at least one point"));
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.min + step * i as f64).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub center: [f64; 3],
    /// Initial position standard deviation.
    pub sigma: f64,
    pub momentum: [f64; 3],
    #[serde(default = "unit")]
    pub mass: f64,
}

impl PacketSpec {
    fn build(&self, path: &str) -> Result<GaussianPacket, LabError> {
        GaussianPacket::new(vector(self.center), self.sigma, vector(self.momentum), self.mass)
            .map_err(|e| LabError::core(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileSpec {
    #[default]
    Odd,
    Even,
}

impl From<ProfileSpec> for LongitudinalProfile {
    fn from(p: ProfileSpec) -> Self {
        match p {
            ProfileSpec::Odd => LongitudinalProfile::Odd,
            ProfileSpec::Even => LongitudinalProfile::Even,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    /// Complex coefficient [re, im].
    pub coefficient: [f64; 2],
    pub field: FieldSpec,
}

/// Wave functions the core can evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    PlaneWave {
        k: [f64; 3],
        #[serde(default = "one")]
        amplitude: [f64; 2],
        #[serde(default = "unit")]
        mass: f64,
    },
    GaussianPacket(PacketSpec),
    DoubleSlit {
        separation: f64,
        packet: PacketSpec,
        #[serde(default)]
        relative_phase: f64,
        /// Complex amplitudes of the two slit components; equal weights when omitted.
        #[serde(default)]
        amplitudes: Option<[[f64; 2]; 2]>,
    },
    Waveguide(WaveguideSpec),
    /// e^{ik₁·x} + α e^{ik₂·x} with both wavevectors in the x–z plane at polar angles
    /// `theta1`, `theta2` from ẑ; α defaults to the value that maximises backflow at the origin.
    BackflowPair {
        k: f64,
        theta1: f64,
        theta2: f64,
        #[serde(default)]
        alpha: Option<[f64; 2]>,
        #[serde(default = "unit")]
        mass: f64,
    },
    Superposition {
        terms: Vec<TermSpec>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct WaveguideSpec {
    /// Unit spin polarisation vector.
    pub spin: [f64; 3],
    #[serde(default = "unit")]
    pub width: f64,
    #[serde(default = "unit")]
    pub sigma: f64,
    #[serde(default)]
    pub profile: ProfileSpec,
    #[serde(default = "unit")]
    pub mass: f64,
}

impl WaveguideSpec {
    pub fn build(&self, path: &str) -> Result<WaveguideSpinField, LabError> {
        let spin = spin_vector(self.spin, &format!("{path}.spin"))?;
        WaveguideSpinField::new(spin, self.width, self.sigma, self.profile.into(), self.mass)
            .map_err(|e| LabError::core(path, e))
    }
}

pub(crate) fn spin_vector(s: [f64; 3], path: &str) -> Result<SpinVector, LabError> {
    SpinVector::new(s[0], s[1], s[2]).map_err(|_| {
        LabError::precondition(path, format!("SpinVector invariant |s| = 1 violated: |s| = {}", vector(s).norm()))
    })
}

impl FieldSpec {
    pub fn build(&self, path: &str) -> Result<WaveField, LabError> {
        let core = |e| LabError::core(path, e);
        Ok(match self {
            FieldSpec::PlaneWave { k, amplitude, mass } => {
                WaveField::PlaneWave(PlaneWave::new(vector(*k), complex(*amplitude), *mass).map_err(core)?)
            }
            FieldSpec::GaussianPacket(p) => WaveField::GaussianPacket(p.build(path)?),
            FieldSpec::DoubleSlit { .. } => WaveField::DoubleSlit(self.double_slit(path)?),
            FieldSpec::Waveguide(w) => WaveField::Waveguide(w.build(path)?),
            FieldSpec::BackflowPair { .. } => self.backflow_pair(path)?.field().clone(),
            FieldSpec::Superposition { terms } => {
                let built = terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| Ok((complex(t.coefficient), t.field.build(&format!("{path}.terms[{i}].field"))?)))
                    .collect::<Result<Vec<_>, LabError>>()?;
                WaveField::Superposition(Superposition::new(built).map_err(core)?)
            }
        })
    }

    pub fn double_slit(&self, path: &str) -> Result<DoubleSlit, LabError> {
        match self {
            FieldSpec::DoubleSlit { separation, packet, relative_phase, amplitudes } => {
                let g = packet.build(&format!("{path}.packet"))?;
                match amplitudes {
                    Some([a, b]) => DoubleSlit::new(*separation, g, *relative_phase, [complex(*a), complex(*b)]),
                    None => DoubleSlit::symmetric(*separation, g, *relative_phase),
                }
                .map_err(|e| LabError::core(path, e))
            }
            _ => Err(LabError::precondition(path, "a double-slit field is required")),
        }
    }

    pub fn backflow_pair(&self, path: &str) -> Result<BackflowPair, LabError> {
        match self {
            FieldSpec::BackflowPair { k, theta1, theta2, alpha, mass } => {
                BackflowPair::from_angles(*k, *theta1, *theta2, alpha.map(complex), *mass)
                    .map_err(|e| LabError::core(path, e))
            }
            _ => Err(LabError::precondition(path, "a backflow-pair field is required")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SurfaceSpec {
    PlaneZ { z: f64 },
    PlaneX { x: f64 },
    Disk { z: f64, radius: f64 },
}

impl SurfaceSpec {
    pub fn build(&self, path: &str) -> Result<Surface, LabError> {
        let s = match *self {
            SurfaceSpec::PlaneZ { z } => Surface::PlaneZ { z },
            SurfaceSpec::PlaneX { x } => Surface::PlaneX { x },
            SurfaceSpec::Disk { z, radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(LabError::precondition(&format!("{path}.radius"), "radius must be positive"));
                }
                Surface::Disk { z, radius }
            }
        };
        Ok(s)
    }
}

/// Axis-aligned box [lo, hi] in space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl BoxSpec {
    pub fn build(&self, path: &str) -> Result<SamplingBox, LabError> {
        SamplingBox::new(vector(self.lo), vector(self.hi)).map_err(|e| LabError::core(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct BackflowMapParams {
    pub field: FieldSpec,
    pub x: Axis,
    pub z: Axis,
    #[serde(default)]
    pub y: f64,
    #[serde(default)]
    pub t: f64,
    /// Starting points of guidance trajectories drawn over the map.
    #[serde(default)]
    pub trajectories: Vec<[f64; 3]>,
    /// Integration time of each trajectory.
    #[serde(default = "unit")]
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TrajectoriesParams {
    pub field: FieldSpec,
    /// Explicit starting points.
    #[serde(default)]
    pub starts: Vec<[f64; 3]>,
    /// Number of additional Born-distributed starting points.
    #[serde(default)]
    pub n: u64,
    #[serde(default)]
    pub region: Option<BoxSpec>,
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    /// Surface whose crossings are reported.
    #[serde(default)]
    pub surface: Option<SurfaceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ArrivalHistParams {
    pub field: FieldSpec,
    pub surface: SurfaceSpec,
    pub n: u64,
    #[serde(default)]
    pub t0: f64,
    pub t_max: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub region: Option<BoxSpec>,
    /// Finite window of a plane for the ideal flux curve.
    #[serde(default)]
    pub patch: Option<PatchSpec>,
    /// Also emit the ideal flux bin masses.
    #[serde(default = "yes")]
    pub ideal: bool,
    /// Highest crossing order reported separately.
    #[serde(default = "default_orders")]
    pub max_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SlabParams {
    /// Scatterer number density N.
    pub density: f64,
    /// Forward scattering amplitude [re, im].
    pub f0: [f64; 2],
    pub thickness: f64,
    #[serde(default = "unit")]
    pub area: f64,
    #[serde(default = "unit")]
    pub mass: f64,
    pub k: f64,
    /// Incidence angles from the slab normal.
    pub thetas: Vec<f64>,
    /// Points per wave profile written across [−d, 2d]; zero skips the profile file.
    #[serde(default)]
    pub profile_points: usize,
}

impl SlabParams {
    pub fn build(&self, path: &str) -> Result<SlabDetector, LabError> {
        SlabDetector::new(self.density, complex(self.f0), self.thickness, self.area)
            .and_then(|s| s.with_mass(self.mass))
            .map_err(|e| LabError::core(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShapeSpec {
    Step,
    Smooth { a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PmlSpec {
    pub chi0: f64,
    pub thickness: f64,
    pub shape: ShapeSpec,
    /// Longitudinal wavenumber the layer is matched to.
    pub kz: f64,
    #[serde(default = "unit")]
    pub mass: f64,
    #[serde(default = "unit")]
    pub area: f64,
}

impl PmlSpec {
    pub fn build(&self, direction: PmlDirection, path: &str) -> Result<PmlProfile, LabError> {
        let shape = match self.shape {
            ShapeSpec::Step => ChiProfile::Step,
            ShapeSpec::Smooth { a } => ChiProfile::Smooth { a },
        };
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(LabError::precondition(&format!("{path}.mass"), "mass must be positive"));
        }
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(LabError::precondition(&format!("{path}.area"), "area must be positive"));
        }
        let p = PmlProfile::new(self.chi0, self.thickness, shape, direction, self.kz)
            .map_err(|e| LabError::core(path, e))?;
        Ok(PmlProfile { mass: self.mass, area: self.area, ..p })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PmlParams {
    pub profile: PmlSpec,
    /// Grid of the potential and density table; defaults to a window around the layer.
    #[serde(default)]
    pub z: Option<Axis>,
    /// Points of the residual check grid.
    #[serde(default = "default_verify_points")]
    pub verify_points: usize,
}

fn default_verify_points() -> usize {
    2001
}

/// What flows through a space-time detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceSpec {
    Field {
        field: FieldSpec,
    },
    /// Stationary plane wave absorbed by a forward layer.
    AbsorbedPlaneWave {
        profile: PmlSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CouplingSpec {
    /// Uniform complex potential [re, im] with im ≤ 0.
    ScalarConstant { potential: [f64; 2] },
    /// Potential of a smooth forward layer.
    ScalarPml { profile: PmlSpec },
    /// Imaginary vector potential, constant over the region.
    Vector { charge: f64, im_a: [f64; 3] },
}

impl CouplingSpec {
    pub fn build(&self, path: &str) -> Result<Coupling, LabError> {
        Ok(match *self {
            CouplingSpec::ScalarConstant { potential } => {
                Coupling::Scalar(ScalarPotential::Constant(complex(potential)))
            }
            CouplingSpec::ScalarPml { profile } => Coupling::Scalar(ScalarPotential::Pml(
                profile.build(PmlDirection::Forward, &format!("{path}.profile"))?,
            )),
            CouplingSpec::Vector { charge, im_a } => Coupling::Vector { charge, im_a: vector(im_a) },
        })
    }
}

/// Space-time box [x]×[y]×[z]×[t].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl RegionSpec {
    pub fn build(&self, path: &str) -> Result<SpacetimeRegion, LabError> {
        SpacetimeRegion::new(self.lo, self.hi).map_err(|e| LabError::core(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SpacetimeParams {
    pub source: SourceSpec,
    pub coupling: CouplingSpec,
    /// Detector regions; each is reported separately together with the total.
    pub regions: Vec<RegionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSpec {
    pub field1: FieldSpec,
    pub field2: FieldSpec,
    pub x: [f64; 3],
    #[serde(default)]
    pub t: f64,
    pub normal: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PovmCheckParams {
    /// Number of random pointer models.
    #[serde(default = "default_models")]
    pub models: usize,
    /// Largest system and pointer dimension drawn.
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    /// Current-additivity check on a pair of scalar fields.
    #[serde(default)]
    pub counterexample: Option<CounterexampleSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DbbSpec {
    /// Trajectories per spin preparation.
    pub n: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DdSpec {
    /// Detection-plane distance in units of the longitudinal width.
    pub l: f64,
    pub lambda0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GtzParams {
    #[serde(default = "unit")]
    pub width: f64,
    #[serde(default = "unit")]
    pub sigma: f64,
    #[serde(default)]
    pub profile: ProfileSpec,
    #[serde(default = "unit")]
    pub mass: f64,
    /// Detection disk across the guide.
    pub disk: SurfaceSpec,
    /// Detector efficiency in [0, 1].
    #[serde(default = "unit")]
    pub eta: f64,
    /// Arrival-time grid of the full-signal distributions.
    pub tau: Axis,
    /// Guidance first-arrival ensembles for the four spin preparations.
    #[serde(default)]
    pub dbb: Option<DbbSpec>,
    /// Closed-form arrival density on the same τ grid.
    #[serde(default)]
    pub dd: Option<DdSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WhichPathMethodSpec {
    Quadrature,
    Samples { n: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct WhichPathParams {
    pub field: FieldSpec,
    pub t: f64,
    pub method: WhichPathMethodSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ApertureSpec {
    Rectangle { center: [f64; 3], half_x: f64, half_y: f64 },
    Disk { center: [f64; 3], radius: f64 },
}

impl ApertureSpec {
    pub fn build(&self, path: &str) -> Result<Aperture, LabError> {
        match *self {
            ApertureSpec::Rectangle { center, half_x, half_y } => {
                if !(half_x > 0.0 && half_y > 0.0) {
                    return Err(LabError::precondition(path, "half widths must be positive"));
                }
                Ok(Aperture::Rectangle { center: vector(center), half_x, half_y })
            }
            ApertureSpec::Disk { center, radius } => {
                if !(radius > 0.0) {
                    return Err(LabError::precondition(&format!("{path}.radius"), "radius must be positive"));
                }
                Ok(Aperture::Disk { center: vector(center), radius })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScatteredFieldParams {
    pub field: FieldSpec,
    pub aperture: ApertureSpec,
    pub points: Vec<[f64; 3]>,
    /// Set when the local current at the aperture flows backwards.
    #[serde(default)]
    pub backflow: bool,
}

/// Parses a scenario, naming the offending field on failure.
pub fn parse(text: &str) -> Result<Scenario, LabError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        LabError::Schema(if path == "." { e.inner().to_string() } else { format!("{path}: {}", e.inner()) })
    })?;
    if scenario.schema_version != SCHEMA_VERSION {
        return Err(LabError::Schema(format!(
            "schema_version: expected {SCHEMA_VERSION}, found {}",
            scenario.schema_version
        )));
    }
    Ok(scenario)
}

/// JSON Schema document describing [`Scenario`].
pub fn json_schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(Scenario)).expect("schema serialises")
}
