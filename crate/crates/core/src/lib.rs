//! Inelastic constitutive artificial neural networks for finite-strain
//! viscoelasticity.
//!
//! The material is a generalized Maxwell solid: an equilibrium spring in
//! parallel with viscous branches. Each branch couples a convex Helmholtz
//! free energy network with a dissipation potential network; the internal
//! state evolves through an exponential integrator in the symmetrized
//! intermediate configuration.
//!
//! The crate is `no_std` (with `alloc`). Everything numeric is generic over
//! [`scalar::Real`] so that stresses and their weight gradients come from the
//! same code.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod autodiff;
pub mod checks;
pub mod double;
pub mod energy;
pub mod error;
pub mod model;
pub mod potential;
pub mod presets;
pub mod protocol;
pub mod scalar;
pub mod tensor;
pub mod training;

pub use energy::{EnergyVariant, EnergyWeights};
pub use error::{Error, Result};
pub use model::{MaterialState, MaxwellBranch, StepOutput, Topology, ViscoSolid};
pub use potential::{PotentialVariant, PotentialWeights};
pub use protocol::{Dataset, LoadPath, Protocol, ReferenceModel};
pub use scalar::Real;
pub use tensor::{InvariantSet, SymTensor3};
pub use training::{Metrics, TrainConfig, TrainResult};
