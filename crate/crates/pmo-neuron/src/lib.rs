//! Electrothermal simulator for a clock-less RRAM neuron.
//!
//! The model couples a two-mechanism conduction law (Ohmic + space-charge
//! limited) with a lumped thermal balance whose Joule-heating feedback
//! produces integrate-and-fire dynamics: under sustained bias the device
//! self-heats until its current runs away to the compliance limit, which
//! the surrounding circuit detects as a spike. Two such branches — one
//! stimulus-driven, one constant-biased — alternate through a toggle
//! register to implement firing and refractory phases, and a 4-bit
//! pattern register shapes bursting/chattering behavior by switching a
//! control resistor in and out.

pub mod calibrate;
pub mod circuit;
pub mod config;
pub mod device;
pub mod error;
pub mod neuron;
pub mod params;
pub mod plot;
pub mod runner;
pub mod scaling;
pub mod stimulus;

pub use error::ModelError;
pub use params::DeviceParams;
