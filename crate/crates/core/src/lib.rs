//! Numerical laboratory for a polynomial-exponential automorphism of C^2
//! tangent to the identity at the origin: exact germ and directions, the
//! parabolic curve, Fatou coordinates, the fiber coordinate and basin rasters.

pub mod analysis;
pub mod bigprec;
pub mod curve;
pub mod ddouble;
pub mod fatou;
pub mod fibers;
pub mod fit;
pub mod jets;
pub mod mapchain;
pub mod ode;
pub mod regions;
pub mod scalar;
