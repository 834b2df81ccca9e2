//! Device description, dot transforms, meshing and panel export.

mod device;
mod fastcap;
mod mesh;
mod transform;

pub use device::{
    load_device, reference_device, Aabb, Conductor, ConductorBox, DeviceSpec, Role, Vec3,
    DEFAULT_EPSILON_R, REFERENCE_DEVICE_JSON,
};
pub use fastcap::{export_panels, import_panels};
pub use mesh::{mesh_device, Panel, PanelMesh};
pub use transform::{dot_size, transform_dots};

pub(crate) use mesh::{cross, dot, norm, sub};
