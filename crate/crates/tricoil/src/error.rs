use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("on-conductor evaluation: query point lies on the wire circle")]
    OnConductor,

    #[error("inside winding volume: (r={r} m, z={z} m) is within the coil cross-section")]
    InsideWinding { r: f64, z: f64 },

    #[error("outside field map domain: (r={r} m, z={z} m)")]
    OutsideFieldMap { r: f64, z: f64 },

    #[error("query touches a masked winding cell at (r={r} m, z={z} m)")]
    MaskedCell { r: f64, z: f64 },

    #[error("field map grid overlaps the winding at (r={r} m, z={z} m); build with masking enabled")]
    GridOverlapsWinding { r: f64, z: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mechanism locked: no real linkage solution at s = {s} m")]
    MechanismLocked { s: f64 },

    #[error("slider position {s} m outside travel range [{min}, {max}] m")]
    SliderOutOfRange { s: f64, min: f64, max: f64 },

    #[error("theta {theta_deg:.3}° unreachable; attainable range is [{min_deg:.3}°, {max_deg:.3}°]")]
    ThetaUnreachable { theta_deg: f64, min_deg: f64, max_deg: f64 },

    #[error("coil {coil} local query (r={r} m, z={z} m) outside its field map")]
    CoilQueryOutOfDomain { coil: usize, r: f64, z: f64 },

    #[error("finite-difference stencil exits the field map domain at {axis} ± {delta} m")]
    StencilOutOfDomain { axis: char, delta: f64 },

    #[error("unreachable field direction: least-norm residual {residual:.3e} T exceeds tolerance")]
    UnreachableField { residual: f64 },

    #[error("theta {theta_deg:.3}° not in library; available: {available:?} (deg)")]
    UnknownTheta { theta_deg: f64, available: Vec<f64> },

    #[error("position ({x}, {y}, {z}) m outside the library grid for theta {theta_deg:.1}°")]
    OutsideLibrary { x: f64, y: f64, z: f64, theta_deg: f64 },

    #[error("library node invalid (masked) near ({x}, {y}, {z}) m")]
    InvalidLibraryNode { x: f64, y: f64, z: f64 },

    #[error("non-unit direction: |u| = {norm}")]
    NonUnitDirection { norm: f64 },

    #[error("synthesis failed at azimuth {alpha_rad} rad: {source}")]
    AzimuthSynthesis { alpha_rad: f64, source: Box<Error> },

    #[error("synthesis failed at rotation phase {phase_rad} rad: {source}")]
    PhaseSynthesis { phase_rad: f64, source: Box<Error> },

    #[error("trajectory exits library coverage at ({x}, {y}, {z}) m world frame")]
    TrajectoryOutOfCoverage { x: f64, y: f64, z: f64 },

    #[error("simulation log shorter than one metrics window ({duration} s < {window} s)")]
    LogTooShort { duration: f64, window: f64 },

    #[error("compare: trajectories differ between modes (waypoint hash mismatch)")]
    TrajectoryMismatch,

    #[error("config error: {0}")]
    Config(String),

    #[error("library file: unsupported format version {found} (this build reads version {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("library file: payload hash mismatch (file corrupted)")]
    HashMismatch,

    #[error("library file: truncated payload ({got} bytes, expected {expected})")]
    Truncated { got: usize, expected: usize },

    #[error("library file: malformed: {0}")]
    MalformedFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
