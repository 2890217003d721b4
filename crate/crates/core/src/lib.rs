//! Numerical core for a light-powered electrokinetic microrobot swarm.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It is organised
//! by subsystem:
//!
//! * [`physics`]: thin-gap lubrication model of a single electrokinetic motor,
//!   from the gap electric field through the variational Reynolds solve to the
//!   steady gliding state.
//! * [`fitting`]: Nelder-Mead simplex, model fitting against observed
//!   speed/angle/gap data, mobility regression and field-strength estimates.
//! * [`kinematics`]: differential-drive model of a two-motor robot.
//! * [`holography`]: Gerchberg-Saxton hologram synthesis, blazed gratings,
//!   affine SLM/camera calibration and the far-field forward model.
//! * [`control`]: misalignment angle and the two waypoint control laws.
//! * [`swarm`]: waypoint assignment, leader-follower targets and the
//!   stop-and-go proximity gate.
//!
//! All quantities are SI unless a type says otherwise.
#![no_std]
// `num_traits::Float` supplies float math without std; it goes unused whenever
// std is linked somewhere in the build graph.
#![allow(unused_imports)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod control;
pub mod fitting;
pub mod geom;
pub mod holography;
pub mod kinematics;
pub mod linalg;
pub mod physics;
pub mod quadrature;
pub mod swarm;

pub use geom::Point2;
