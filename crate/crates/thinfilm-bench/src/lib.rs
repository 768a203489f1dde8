//! Shared setup for the solver benchmarks: prebuilt fields and configs
//! so the timed closures measure the hot path alone.

use thinfilm::presets;
use thinfilm::{Field, SimulationConfig};

/// The blow-up example on its published 150 x 150 grid, the workload
/// that dominates short simulate runs.
pub fn blowup_setup() -> (Field, SimulationConfig) {
    let cfg = presets::example1_config();
    let u0 = presets::example1_initial(cfg.grid);
    (u0, cfg)
}

/// The decay example on its published 500 x 500 grid, sized to expose
/// cache behaviour the small grid hides.
pub fn decay_setup() -> (Field, SimulationConfig) {
    let cfg = presets::example2_config();
    let u0 = presets::example2_initial(cfg.grid);
    (u0, cfg)
}
