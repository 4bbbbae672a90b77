use topoblend::field::{tpms, PorousKind, PorousSpec, Region, TpmsKind};
use topoblend::init::{CoordinateFrame, InitPlan};
use topoblend::io::{marching_cubes, parse_config, read_grid, write_grid, TriangleMesh};
use topoblend::optimize::OptimizeSettings;
use topoblend::pipeline::{blend_many, blend_pair, outside_br_deviation, BlendProblem, StagePlan};
use topoblend::topology::sample_field;
use topoblend::{Aabb, Axis, Error};

fn slab(lo: f64, hi: f64) -> Region {
    Region::aabb(Aabb::new([lo, 0.0, 0.0], [hi, 0.25, 0.25]))
}

fn rod(kind: TpmsKind, periods: f64, c: f64) -> PorousSpec {
    PorousSpec::with_constants(PorousKind::Rod, tpms(kind, [periods; 3]).unwrap(), c, 0.0)
}

fn three_slabs() -> BlendProblem {
    let plan = InitPlan::one_dimensional(CoordinateFrame::Cartesian { axis: Axis::X });
    BlendProblem {
        specs: vec![rod(TpmsKind::P, 4.0, 0.5), rod(TpmsKind::Iwp, 8.0, 2.5), rod(TpmsKind::P, 8.0, 0.5)],
        regions: vec![slab(0.0, 1.0 / 3.0), slab(1.0 / 3.0, 2.0 / 3.0), slab(2.0 / 3.0, 1.0)],
        stages: vec![
            StagePlan { br: slab(0.23, 0.43), init: plan },
            StagePlan { br: slab(0.57, 0.77), init: plan },
        ],
        settings: OptimizeSettings::default(),
        model: None,
        trace: None,
    }
}

#[test]
fn sequential_blend_preserves_regions_and_reports_consistently() {
    let problem = three_slabs();
    let (phi, report) = blend_many(&problem).unwrap();
    assert_eq!(report.stages.len(), 2);
    assert!(!report.mismatch);
    assert_eq!([report.betti[0], report.betti[2]], report.oracle_betti);
    assert!(report.converged(), "{report:?}");
    assert_eq!(report.betti[0], 1);
    assert_eq!(report.betti[2], 0);
    assert!(outside_br_deviation(&problem, &phi, 1000, 1) <= 1e-12);
    // Every stage's running region contains the previous one.
    for i in 1..problem.regions.len() {
        let grown = problem.regions[..=i].iter().skip(1).fold(problem.regions[0].clone(), |a, r| a.union(r));
        let before = problem.regions[..i].iter().skip(1).fold(problem.regions[0].clone(), |a, r| a.union(r));
        for x in 0..=20 {
            let p = [x as f64 / 20.0, 0.1, 0.1];
            assert!(!before.contains(&p) || grown.contains(&p));
        }
    }
}

#[test]
fn pair_blend_matches_single_stage_many() {
    let problem = three_slabs();
    let left = problem.structure_field(0);
    let right = problem.structure_field(1);
    let er2 = slab(1.0 / 3.0, 1.0);
    let (_, a) = blend_pair(
        &left,
        &right,
        &problem.regions[0],
        &er2,
        &problem.stages[0].br,
        &problem.stages[0].init,
        &problem.settings,
    )
    .unwrap();
    let single = BlendProblem {
        specs: problem.specs[..2].to_vec(),
        regions: vec![problem.regions[0].clone(), er2],
        stages: problem.stages[..1].to_vec(),
        ..problem
    };
    let (_, b) = blend_many(&single).unwrap();
    assert_eq!(a.stages[0].loss_trace, b.stages[0].loss_trace);
    assert_eq!(a.betti, b.betti);
}

#[test]
fn stage_failures_name_the_stage() {
    let mut problem = three_slabs();
    // A blending region far from both structures leaves nothing to ramp across.
    problem.stages[1].br = slab(0.35, 0.36);
    match blend_many(&problem) {
        Err(Error::Stage { stage, .. }) => assert_eq!(stage, 1),
        other => panic!("expected a stage error, got {:?}", other.map(|r| r.1)),
    }
    let mut short = three_slabs();
    short.stages.pop();
    assert!(matches!(blend_many(&short), Err(Error::Domain(_))));
}

#[test]
fn config_to_mesh_round_trip() {
    let text = r#"{
        "structures": [
            {"field": {"tpms": {"kind": "p", "periods": 4}}, "kind": "rod", "threshold": 0.5, "region": "a"},
            {"field": {"tpms": {"kind": "iwp", "periods": 8}}, "kind": "rod", "threshold": 2.5, "region": "b"}
        ],
        "regions": {
            "a": {"box": {"min": [0, 0, 0], "max": [0.5, 0.25, 0.25]}},
            "b": {"box": {"min": [0.5, 0, 0], "max": [1, 0.25, 0.25]}}
        },
        "blend": {
            "regions": [{"box": {"min": [0.3, 0, 0], "max": [0.7, 0.25, 0.25]}}],
            "init": {"mode": "cartesian", "axis": "x"}
        },
        "optimize": {"resolution": [40, 12, 12]}
    }"#;
    let config = parse_config(text).unwrap();
    let problem = config.to_problem(std::path::Path::new(".")).unwrap();
    let (phi, report) = blend_many(&problem).unwrap();
    assert_eq!(report.resolution, [40, 12, 12]);
    let grid = sample_field(&phi, problem.ter(), report.resolution).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("phi.raw");
    write_grid(&grid, &raw).unwrap();
    let back = read_grid(&raw).unwrap();
    let mesh = marching_cubes(&back, 0.0);
    assert!(!mesh.is_empty());
    mesh.validate().unwrap();
    let mut obj = Vec::new();
    mesh.write_obj(&mut obj).unwrap();
    let again = TriangleMesh::read_obj(obj.as_slice()).unwrap();
    assert_eq!(again.vertices.len(), mesh.vertices.len());
    assert_eq!(again.triangles.len(), mesh.triangles.len());
    assert_eq!(marching_cubes(&back, 0.0), mesh);
}
