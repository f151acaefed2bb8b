pub mod advdiff;
pub mod audit;
pub mod config;
pub mod conslaw;
pub mod error;
pub mod experiment;
pub mod integrator;
pub mod linear_analysis;
pub mod models;
pub mod newton;
pub mod params;
pub mod quadrature;
pub mod second_order;
