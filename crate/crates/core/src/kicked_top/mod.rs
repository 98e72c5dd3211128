//! The quantum kicked top, its classical limit, and the entropic and OTOC
//! diagnostics of its dynamics.

pub mod classical;
pub mod otoc;
pub mod series;
pub mod system;

pub use classical::{
    classical_orbit, classical_step, ehrenfest_time, lyapunov_exponent, lyapunov_from_point, phase_portrait,
    write_portrait_csv, ClassicalPoint, PortraitPoint,
};
pub use otoc::{otoc_series, OtocSeries};
pub use series::{
    saturation_residuals, saturation_window, time_averaged_tmi, time_averaged_tmi_grid, timeseries_measures,
    window_stats, Measure, StepMeasures, TimeSeries, TmiGrid, WindowStats,
};
pub use system::{KickedTopParams, SpinSystem, DEFAULT_DIM_CAP};
