//! Light field camera-motion blur: synthesis, a differentiable forward
//! model, Fourier-domain analysis and closed-form recovery, and blind
//! deblurring of jointly unknown light field and camera path.

pub mod error;
pub mod forward;
pub mod fourier;
pub mod io;
pub mod lightfield;
pub mod path;
pub mod sampling;
pub mod solver;
pub mod synth;

pub use error::{LfError, Result};
pub use forward::{blur, blur_adjoint, path_gradient, ExposureConfig};
pub use lightfield::{
    central_view, epipolar_slice, full_aperture, refocus, rmse, subaperture, Dims, Image, LightField,
};
pub use path::MotionPath;
pub use solver::{blind_deblur, SolverConfig, SolverReport};
