//! Default numerical tolerances.

/// Absolute tolerance for every antiderivative of the reduced nonlinearity.
pub const QUAD: f64 = 1e-12;
/// Bracket width for the oscillation endpoints.
pub const ROOT: f64 = 1e-10;
/// Balance condition threshold in the existence gate.
pub const GATE: f64 = 1e-9;
/// `f'(±1)` must be below `-SLOPE` to count as strictly negative.
pub const SLOPE: f64 = 1e-8;
/// Points used to sample `t ↦ ∫_t^1 f_{a,A}` on `(-1, 0]`.
pub const GATE_SAMPLES: usize = 2000;
/// Ellipticity sandwich, relative to `|tr N| + 1`.
pub const ELLIPTICITY: f64 = 1e-9;
/// `|Y|` below this counts as a located flux zero.
pub const EVENT: f64 = 1e-12;
/// Fixed step used right after a flux zero when `alpha > 0`.
pub const MICRO_STEP: f64 = 1e-6;
pub const MICRO_STEPS: usize = 10;
/// Relative tolerance for `delta == delta1`.
pub const MATCH: f64 = 1e-9;
pub const LIMIT: f64 = 1e-4;
pub const LIMIT_WINDOW: f64 = 5.0;
/// `|u|` beyond this is declared unbounded by the classifier.
pub const BLOW_UP: f64 = 2.0;
/// Endpoint clearance for the quadrature-inverted profile.
pub const PROFILE_CLEARANCE: f64 = 1e-4;
pub const GRAD_FLOOR: f64 = 1e-8;
pub const CLIP: f64 = 1e-9;
