//! Point tracking by entropic optimal transport.
//!
//! The crate links labeled point objects across image frames by solving
//! regularized transport problems: a 2-marginal Sinkhorn solve over
//! frame-to-frame distances (nearest-neighbor style "speed cost" tracking)
//! and a 3-marginal solve over a velocity-change tensor for objects assumed
//! to move at constant velocity ("acceleration cost" tracking). Seeded
//! generators produce the benchmark motion models, and brute-force oracles
//! verify the solvers at desk scale.

pub mod error;
pub mod frames;
pub mod mass;
pub mod matrix;
pub mod oracle;
pub mod sim;
pub mod sinkhorn;
pub mod sinkhorn3;
pub mod tensor;
pub mod tracker;

pub use error::{Error, Result};
pub use frames::{
    acceleration_cost, frames_from_csv, frames_to_csv, read_frames_csv, speed_cost,
    write_frames_csv, FrameSequence, PointSet,
};
pub use mass::MassVector;
pub use matrix::{CostMatrix, SquareMatrix, TransportPlan};
pub use oracle::{exact_assignment_oracle, exact_triple_oracle, TripleAssignment};
pub use sim::{
    child_seed, gen_constant_velocity, gen_constant_velocity_noisy,
    gen_constant_velocity_noisy_with, gen_random_walk, NoiseModel, SimKind, SimScenario,
};
pub use sinkhorn::{
    marginal_residual, sinkhorn_plan, transport_cost, SolverOptions, STABILIZATION_THRESHOLD,
};
pub use sinkhorn3::{compress_ij, compress_ik, sinkhorn3_plan};
pub use tensor::{CostTensor3, Tensor3, TransportTensor3};
pub use tracker::{
    performance_index, track_accel_2d, track_accel_2d_with, track_accel_3d, track_speed, Method,
    OutputAxis, Stage3Assoc, TrackingResult,
};
