//! Isogeometric cohesive-zone analysis of delamination in layered solids.
//!
//! The crate is organised bottom-up:
//!
//! * [`spline`]: B-spline/NURBS evaluation, knot insertion, degree elevation
//!   and point inversion.
//! * [`mesh`]: analysis meshes over knot spans, discontinuity insertion,
//!   interface-element connectivity and Bezier extraction.
//! * [`material`]: ply elasticity, the bilinear mixed-mode cohesive law and
//!   penalty contact.
//! * [`fem`]: quadrature, element integration and global assembly.
//! * [`solver`]: Newton-Raphson with load/displacement control and
//!   dissipation-based path following.
//! * [`post`]: visualization meshes, Gauss-point extrapolation and VTK output.
//! * [`cases`]: benchmark builders, analytic oracles, case configuration and
//!   the command-line driver.

pub mod cases;
pub mod fem;
pub mod material;
pub mod mesh;
pub mod post;
pub mod solver;
pub mod spline;
