pub mod bounds;
pub mod cli;
pub mod example;
pub mod linalg;
pub mod operators;
pub mod pep;
pub mod rppa;
pub mod scalar;
pub mod sdp;
pub mod verify;

pub use scalar::Real;

pub type VectorF64 = linalg::Vector<f64>;
pub type SymMatrixF64 = linalg::SymMatrix<f64>;
pub type MatrixF64 = linalg::Matrix<f64>;
pub type ViProblemF64 = operators::ViProblem<f64>;
pub type TrajectoryF64 = rppa::Trajectory<f64>;
pub type PepInstanceF64 = pep::PepInstance<f64>;
pub type SdpProblemF64 = sdp::SdpProblem<f64>;

pub type VectorF32 = linalg::Vector<f32>;
pub type SymMatrixF32 = linalg::SymMatrix<f32>;
pub type MatrixF32 = linalg::Matrix<f32>;
pub type ViProblemF32 = operators::ViProblem<f32>;
pub type TrajectoryF32 = rppa::Trajectory<f32>;
pub type PepInstanceF32 = pep::PepInstance<f32>;
pub type SdpProblemF32 = sdp::SdpProblem<f32>;
