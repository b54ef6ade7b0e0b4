//! Deterministic simulator and planner for edge-coordinated UAV swarms
//! surveying wildfire regions for search and rescue.
//!
//! The crate models the fire region as a binary raster, lays a survey grid
//! over it, assigns survey points to UAVs through a validated planning loop,
//! routes each UAV over its points and simulates the mission with a simple
//! kinematic and energy model.

pub mod assignment;
pub mod commands;
pub mod config;
pub mod fire_world;
pub mod geometry;
pub mod planner;
pub mod render;
pub mod routing;
pub mod sim;

pub use geometry::Point;
