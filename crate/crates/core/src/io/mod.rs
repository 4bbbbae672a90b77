//! Configuration files, meshes and result files.

mod config;
mod export;
mod mesh;

pub use config::{
    load_config, parse_config, BlendConfig, Config, FieldConfig, ImageSide, InitConfig, MeshFormat, OutputConfig,
    Periods, RegionConfig, RegionRef, ScalarConfig, StructureConfig, ThresholdConfig,
};
pub use export::{read_grid, sidecar_path, write_diagram, write_grid, write_report, GridSidecar};
pub use mesh::{marching_cubes, TriangleMesh};
