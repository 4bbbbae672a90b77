use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    dilate_region_boundary, expression_field, image_region, tpms, GrayImage, PorousKind, PorousSpec, Region,
    ScalarField, TpmsKind,
};
use crate::geometry::{Aabb, Axis, Lattice, Point};
use crate::init::{CoordinateFrame, InitPlan};
use crate::optimize::OptimizeSettings;
use crate::pipeline::{BlendProblem, StagePlan};
use crate::spline::FitSettings;

/// A whole blending job.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Blended in order, left to right.
    pub structures: Vec<StructureConfig>,
    /// Named regions that other sections refer to.
    #[serde(default)]
    pub regions: BTreeMap<String, RegionConfig>,
    pub blend: BlendConfig,
    #[serde(default)]
    pub optimize: OptimizeSettings,
    #[serde(default)]
    pub output: OutputConfig,
    /// Every structure is clipped to this region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<RegionRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureConfig {
    pub field: FieldConfig,
    pub kind: PorousKind,
    pub threshold: ThresholdConfig,
    /// Where the structure is kept unchanged.
    pub region: RegionRef,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldConfig {
    Tpms { kind: TpmsKind, periods: Periods },
    /// Expression in `x`, `y`, `z`.
    Expression(String),
    Constant(f64),
}

/// Unit cells per unit length, for all axes or each axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Periods {
    Uniform(f64),
    PerAxis([f64; 3]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarConfig {
    Number(f64),
    Field(FieldConfig),
}

/// One threshold for pores and rods, `[c1, c2]` for sheets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdConfig {
    Single(ScalarConfig),
    Pair([ScalarConfig; 2]),
}

/// A region name from `regions`, or an inline definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionRef {
    Name(String),
    Inline(Box<RegionConfig>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageSide {
    Dark,
    Light,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionConfig {
    Box {
        min: Point,
        max: Point,
    },
    Cylinder {
        axis: Axis,
        center: Point,
        radius: f64,
        range: [f64; 2],
    },
    Sphere {
        center: Point,
        radius: f64,
    },
    /// `{p · normal ≤ offset}`, sampled over the given box.
    HalfSpace {
        normal: Point,
        offset: f64,
        min: Point,
        max: Point,
    },
    /// `{expr ≤ 0}` over the given box.
    Expression {
        expr: String,
        min: Point,
        max: Point,
    },
    /// Grayscale image over the unit square, extruded along z. Relative
    /// paths are resolved against the config file's directory.
    Image {
        path: PathBuf,
        threshold: u8,
        z_range: [f64; 2],
        side: ImageSide,
    },
    Union(Vec<RegionRef>),
    Intersection(Vec<RegionRef>),
    Difference {
        from: RegionRef,
        remove: RegionRef,
    },
    Complement(RegionRef),
    /// Points within `radius` of the interface between `a` and `b`,
    /// detected on a lattice over the union of their boxes.
    InterfaceBand {
        a: RegionRef,
        b: RegionRef,
        radius: f64,
        resolution: [usize; 3],
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    Cartesian { axis: Axis },
    Cylindrical { axis: Axis, center: Point },
    Spherical { center: Point },
    ThreeDimensional,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlendConfig {
    /// One blending region per adjacent pair of structures.
    pub regions: Vec<RegionRef>,
    pub init: InitConfig,
    /// Filled from the init mode when absent.
    #[serde(default)]
    pub degrees: Option<[usize; 3]>,
    #[serde(default)]
    pub counts: Option<[usize; 3]>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_refinements")]
    pub max_refinements: usize,
    #[serde(default)]
    pub fit: FitSettings,
}

fn default_grid() -> usize {
    64
}

fn default_refinements() -> usize {
    3
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshFormat {
    #[default]
    Obj,
    Stl,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; the command line may override it.
    pub dir: PathBuf,
    pub mesh: MeshFormat,
    /// Write the final field as raw `f32` samples.
    pub grid: bool,
    pub diagram: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            mesh: MeshFormat::Obj,
            grid: true,
            diagram: true,
        }
    }
}

impl InitConfig {
    fn plan(&self, blend: &BlendConfig) -> InitPlan {
        let mut plan = match *self {
            InitConfig::Cartesian { axis } => InitPlan::one_dimensional(CoordinateFrame::Cartesian { axis }),
            InitConfig::Cylindrical { axis, center } => {
                InitPlan::one_dimensional(CoordinateFrame::Cylindrical { axis, center })
            }
            InitConfig::Spherical { center } => InitPlan::one_dimensional(CoordinateFrame::Spherical { center }),
            InitConfig::ThreeDimensional => InitPlan::three_dimensional(),
        };
        if let Some(d) = blend.degrees {
            plan.degrees = d;
        }
        if let Some(c) = blend.counts {
            plan.counts = c;
        }
        plan.grid = blend.grid;
        plan.max_refinements = blend.max_refinements;
        plan.fit = blend.fit;
        plan
    }
}

/// Parse and validate a config, filling every default.
pub fn parse_config(text: &str) -> Result<Config> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut config: Config = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })?;
    let plan = config.blend.init.plan(&config.blend);
    config.blend.degrees = Some(plan.degrees);
    config.blend.counts = Some(plan.counts);
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

impl Config {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn init_plan(&self) -> InitPlan {
        self.blend.init.plan(&self.blend)
    }

    /// Structural checks that need no file access.
    pub fn validate(&self) -> Result<()> {
        let n = self.structures.len();
        if n < 2 {
            return Err(Error::config("structures", format!("need at least 2 structures, found {n}")));
        }
        if self.blend.regions.len() + 1 != n {
            return Err(Error::config(
                "blend.regions",
                format!(
                    "expected {} blending regions (one per adjacent pair of structures), found {}",
                    n - 1,
                    self.blend.regions.len()
                ),
            ));
        }
        for (i, s) in self.structures.iter().enumerate() {
            let sheet = s.kind == PorousKind::Sheet;
            let pair = matches!(s.threshold, ThresholdConfig::Pair(_));
            if sheet != pair {
                let want = if sheet { "a pair [c1, c2]" } else { "a single value" };
                return Err(Error::config(format!("structures[{i}].threshold"), format!("{:?} takes {want}", s.kind)));
            }
            if let FieldConfig::Tpms { periods, .. } = &s.field {
                let p = periods.per_axis();
                if p.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                    return Err(Error::config(format!("structures[{i}].field.tpms.periods"), "periods must be positive"));
                }
            }
            self.check_ref(&s.region, &format!("structures[{i}].region"), &mut Vec::new())?;
        }
        for (i, r) in self.blend.regions.iter().enumerate() {
            self.check_ref(r, &format!("blend.regions[{i}]"), &mut Vec::new())?;
        }
        if let Some(m) = &self.model {
            self.check_ref(m, "model", &mut Vec::new())?;
        }
        for (name, r) in &self.regions {
            self.check_region(r, &format!("regions.{name}"), &mut vec![name.clone()])?;
        }
        if !(self.optimize.eta > 0.0 && self.optimize.eta.is_finite()) {
            return Err(Error::config("optimize.eta", "learning rate must be positive"));
        }
        if !(self.optimize.epsilon > 0.0 && self.optimize.epsilon.is_finite()) {
            return Err(Error::config("optimize.epsilon", "must be positive"));
        }
        if self.optimize.resolution.iter().any(|&r| r < 2) {
            return Err(Error::config("optimize.resolution", "need at least 2 points per axis"));
        }
        self.init_plan().validate().map_err(|e| Error::config("blend", e.to_string()))
    }

    fn check_ref(&self, r: &RegionRef, path: &str, stack: &mut Vec<String>) -> Result<()> {
        match r {
            RegionRef::Name(name) => {
                if stack.contains(name) {
                    return Err(Error::config(path, format!("region {name:?} refers to itself")));
                }
                let Some(def) = self.regions.get(name) else {
                    return Err(Error::config(path, format!("unknown region {name:?}")));
                };
                stack.push(name.clone());
                self.check_region(def, &format!("regions.{name}"), stack)?;
                stack.pop();
                Ok(())
            }
            RegionRef::Inline(def) => self.check_region(def, path, stack),
        }
    }

    fn check_region(&self, r: &RegionConfig, path: &str, stack: &mut Vec<String>) -> Result<()> {
        match r {
            RegionConfig::Union(parts) | RegionConfig::Intersection(parts) => {
                if parts.is_empty() {
                    return Err(Error::config(path, "needs at least one operand"));
                }
                for (i, p) in parts.iter().enumerate() {
                    self.check_ref(p, &format!("{path}[{i}]"), stack)?;
                }
                Ok(())
            }
            RegionConfig::Difference { from, remove } => {
                self.check_ref(from, &format!("{path}.from"), stack)?;
                self.check_ref(remove, &format!("{path}.remove"), stack)
            }
            RegionConfig::Complement(inner) => self.check_ref(inner, path, stack),
            RegionConfig::InterfaceBand { a, b, radius, resolution } => {
                if !(*radius > 0.0) || resolution.iter().any(|&r| r < 2) {
                    return Err(Error::config(path, "radius must be positive and resolution at least 2"));
                }
                self.check_ref(a, &format!("{path}.a"), stack)?;
                self.check_ref(b, &format!("{path}.b"), stack)
            }
            RegionConfig::Box { min, max }
            | RegionConfig::HalfSpace { min, max, .. }
            | RegionConfig::Expression { min, max, .. } => {
                if (0..3).any(|a| !(min[a] <= max[a])) {
                    return Err(Error::config(path, "min must not exceed max"));
                }
                Ok(())
            }
            RegionConfig::Sphere { radius, .. } | RegionConfig::Cylinder { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(Error::config(path, "radius must be positive"));
                }
                Ok(())
            }
            RegionConfig::Image { .. } => Ok(()),
        }
    }

    /// Build the pipeline input; relative image paths resolve against `base`.
    pub fn to_problem(&self, base: &Path) -> Result<BlendProblem> {
        let mut b = Builder {
            config: self,
            base,
            cache: BTreeMap::new(),
        };
        let mut specs = Vec::new();
        let mut regions = Vec::new();
        for (i, s) in self.structures.iter().enumerate() {
            let path = format!("structures[{i}]");
            let base_field = build_field(&s.field, &format!("{path}.field"))?;
            let bbox = base_field.bbox();
            let scalar = |c: &ScalarConfig, p: &str| -> Result<ScalarField> {
                match c {
                    ScalarConfig::Number(v) => Ok(ScalarField::constant(*v, bbox)),
                    ScalarConfig::Field(f) => build_field(f, p),
                }
            };
            let spec = match (&s.threshold, s.kind) {
                (ThresholdConfig::Single(c), PorousKind::Pore) => {
                    PorousSpec::pore(base_field, scalar(c, &format!("{path}.threshold"))?)
                }
                (ThresholdConfig::Single(c), _) => PorousSpec::rod(base_field, scalar(c, &format!("{path}.threshold"))?),
                (ThresholdConfig::Pair([c1, c2]), _) => PorousSpec::sheet(
                    base_field,
                    scalar(c1, &format!("{path}.threshold[0]"))?,
                    scalar(c2, &format!("{path}.threshold[1]"))?,
                ),
            };
            specs.push(spec);
            regions.push(b.region(&s.region, &format!("{path}.region"))?);
        }
        let plan = self.init_plan();
        let stages = self
            .blend
            .regions
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Ok(StagePlan {
                    br: b.region(r, &format!("blend.regions[{i}]"))?,
                    init: plan,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let model = self.model.as_ref().map(|m| b.region(m, "model")).transpose()?;
        Ok(BlendProblem {
            specs,
            regions,
            stages,
            settings: self.optimize,
            model: model.map(|m| m.indicator().clone()),
            trace: None,
        })
    }
}

impl Periods {
    pub fn per_axis(&self) -> [f64; 3] {
        match *self {
            Periods::Uniform(n) => [n; 3],
            Periods::PerAxis(p) => p,
        }
    }
}

fn build_field(f: &FieldConfig, path: &str) -> Result<ScalarField> {
    match f {
        FieldConfig::Tpms { kind, periods } => {
            tpms(*kind, periods.per_axis()).map_err(|e| Error::config(format!("{path}.tpms"), e.to_string()))
        }
        FieldConfig::Expression(src) => {
            expression_field(src, Aabb::unit()).map_err(|e| Error::config(format!("{path}.expression"), e.to_string()))
        }
        FieldConfig::Constant(v) => Ok(ScalarField::constant(*v, Aabb::unit())),
    }
}

struct Builder<'a> {
    config: &'a Config,
    base: &'a Path,
    cache: BTreeMap<String, Region>,
}

impl Builder<'_> {
    fn region(&mut self, r: &RegionRef, path: &str) -> Result<Region> {
        match r {
            RegionRef::Name(name) => {
                if let Some(done) = self.cache.get(name) {
                    return Ok(done.clone());
                }
                let def = self
                    .config
                    .regions
                    .get(name)
                    .ok_or_else(|| Error::config(path, format!("unknown region {name:?}")))?;
                let built = self.build(def, &format!("regions.{name}"))?;
                self.cache.insert(name.clone(), built.clone());
                Ok(built)
            }
            RegionRef::Inline(def) => self.build(def, path),
        }
    }

    fn build(&mut self, r: &RegionConfig, path: &str) -> Result<Region> {
        let fold = |this: &mut Self, parts: &[RegionRef], f: fn(&Region, &Region) -> Region| -> Result<Region> {
            let mut acc = this.region(&parts[0], &format!("{path}[0]"))?;
            for (i, p) in parts.iter().enumerate().skip(1) {
                acc = f(&acc, &this.region(p, &format!("{path}[{i}]"))?);
            }
            Ok(acc)
        };
        Ok(match r {
            RegionConfig::Box { min, max } => Region::aabb(Aabb::new(*min, *max)),
            RegionConfig::Cylinder {
                axis,
                center,
                radius,
                range,
            } => Region::cylinder(*axis, *center, *radius, (range[0], range[1])),
            RegionConfig::Sphere { center, radius } => Region::sphere(*center, *radius),
            RegionConfig::HalfSpace {
                normal,
                offset,
                min,
                max,
            } => Region::half_space(*normal, *offset, Aabb::new(*min, *max))
                .map_err(|e| Error::config(path, e.to_string()))?,
            RegionConfig::Expression { expr, min, max } => {
                let bbox = Aabb::new(*min, *max);
                Region::new(expression_field(expr, bbox).map_err(|e| Error::config(path, e.to_string()))?)
            }
            RegionConfig::Image {
                path: file,
                threshold,
                z_range,
                side,
            } => {
                let full = if file.is_absolute() { file.clone() } else { self.base.join(file) };
                let img = GrayImage::open(&full)?;
                let (dark, light) = image_region(&img, *threshold, (z_range[0], z_range[1]))
                    .map_err(|e| Error::config(path, e.to_string()))?;
                match side {
                    ImageSide::Dark => dark,
                    ImageSide::Light => light,
                }
            }
            RegionConfig::Union(parts) => fold(self, parts, Region::union)?,
            RegionConfig::Intersection(parts) => fold(self, parts, Region::intersection)?,
            RegionConfig::Difference { from, remove } => {
                let a = self.region(from, &format!("{path}.from"))?;
                a.difference(&self.region(remove, &format!("{path}.remove"))?)
            }
            RegionConfig::Complement(inner) => self.region(inner, path)?.complement(),
            RegionConfig::InterfaceBand {
                a,
                b,
                radius,
                resolution,
            } => {
                let ra = self.region(a, &format!("{path}.a"))?;
                let rb = self.region(b, &format!("{path}.b"))?;
                let lattice = Lattice::new(ra.bbox().union(&rb.bbox()), *resolution)?;
                dilate_region_boundary(&ra, &rb, *radius, &lattice).map_err(|e| Error::config(path, e.to_string()))?
            }
        })
    }
}
