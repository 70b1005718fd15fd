use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("event lies {distance:e} from the axis of solenoid `{solenoid}` (minimum 1e-9)")]
    AxisProximity { solenoid: String, distance: f64 },

    #[error("time {t} is outside the worldline range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("invalid worldline: {0}")]
    InvalidWorldline(String),

    #[error("invalid interferometer: {0}")]
    InvalidInterferometer(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid field configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("invalid deformation strategy: {0}")]
    InvalidStrategy(String),

    #[error("degenerate interferometer: {0}")]
    DegenerateInterferometer(String),

    #[error("invalid polyline: {0}")]
    InvalidPolyline(String),

    #[error("gauge function `{name}` fails the derivative self-check: {detail}")]
    GaugeInconsistent { name: String, detail: String },

    #[error("event is within {min_distance:e} of a region boundary ({boundary})")]
    BoundaryProximity { boundary: String, min_distance: f64 },

    #[error("scenario structure violation: {0}")]
    StructureViolation(String),

    #[error("meshes do not bound the same interferometer: {0}")]
    MismatchedBoundary(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
