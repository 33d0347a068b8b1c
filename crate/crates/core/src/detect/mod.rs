//! Residual-based fault detector: a steady-state Kalman predictor on the
//! assembled linear model, the Mahalanobis distance of its innovations, and a
//! Chebyshev threshold on the distance.

pub mod alarm;
pub mod dare;
pub mod detector;
pub mod stats;

pub use alarm::{run_detection, DetectionReport};
pub use dare::{solve_dare_gain, DareSolution, DARE_MAX_ITER, DARE_TOL};
pub use detector::{
    calibrate_detector, observer_step, CalibrationOptions, DetectorModel, KalmanObserver,
    BASELINE_WINDOW, DEFAULT_ALPHA, DEFAULT_HOLD,
};
pub use stats::{
    baseline_statistics, chebyshev_threshold, mahalanobis_distance, Baseline, ResidualStats,
    MIN_BASELINE_SAMPLES,
};
