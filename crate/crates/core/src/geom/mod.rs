//! Geometry kernel: vectors, isometries, the dihedral group, triangle
//! meshes with symmetry bookkeeping, and their topology.

pub mod bvh;
pub mod dihedral;
pub mod equivariance;
pub mod hurwitz;
pub mod isometry;
pub mod mesh;
pub mod topology;
pub mod vec3;

pub use bvh::Bvh;
pub use dihedral::{DihedralGroup, GroupElement};
pub use equivariance::equivariance_residual;
pub use hurwitz::{equivariant_genus_solve, riemann_hurwitz_check};
pub use isometry::Isometry;
pub use mesh::{Symmetry, TriMesh, VertexTag};
pub use topology::{boundary_components, euler_characteristic, genus, SurfaceTopology};
pub use vec3::Vec3;
