//! Fixed point, linear stability, bifurcation, transient classification,
//! vector-field slices and parameter calibration.

mod bifurcation;
mod calibrate;
mod classify;
mod eigen;
mod field;
mod fixed_point;

pub use bifurcation::{
    bifurcation_scan, discriminant_at, spectrum_at, BifurcationResult, BranchPoint,
};
pub use calibrate::{calibrate, Calibration, CalibrationResiduals, CalibrationTargets};
pub use classify::{
    classify, consumption_rate, oscillation_count, prominent_peaks, transient_end, CaseLabel,
    Classification, ClassifierConfig,
};
pub use eigen::{
    characteristic_polynomial, cubic_discriminant, cubic_roots, eigenvalues, phase_lags, Cubic,
    EigenSpectrum,
};
pub use field::{
    vector_field_slice, Axis, FieldSample, FieldSlice, Nullcline, NullclineKind, Plane, SliceGrid,
};
pub use fixed_point::{fixed_point, fixed_point_bisection, fixed_point_closed_form};
