//! Run orchestration: configuration, presets, the coupled time loop,
//! verification studies, and file output.

pub mod config;
pub mod delta;
pub mod io;
pub mod mms;
pub mod presets;
pub mod run;

pub use config::{parse_config, ConfigError, IcParams, Preset, RunConfig};
pub use delta::{run_delta_study, DeltaError, DeltaStudy};
pub use io::{read_snapshot, read_timeseries, write_snapshot, write_timeseries, DiagRow};
pub use mms::{run_mms, MmsCase, MmsTable};
pub use run::{advance, run_simulation, Integrator, RunError, RunReport};
