//! The initial triple and the inductive step.

pub mod cutoff;
pub mod flow;
pub mod initial;
pub mod interp;
pub mod perturbation;
pub mod reynolds;
pub mod stage;
pub mod triple;

pub use cutoff::CutoffFamily;
pub use flow::{flow_map, ConstantSampler, FlowField, SeparableSampler, VelocitySampler, ZeroSampler};
pub use initial::{initial_triple, InitialData};
pub use perturbation::{
    assemble_perturbation, AssemblyInput, AssemblyMode, LemmaStats, PerturbationSlice, SliceStress,
};
pub use reynolds::ReynoldsComponents;
pub use stage::{iterate, new_pressure, rho, StepContext, StepParams};
pub use triple::{EulerReynoldsTriple, Separable};
