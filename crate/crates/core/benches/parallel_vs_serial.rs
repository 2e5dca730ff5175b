use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sdfield::camera::{CameraPose, Intrinsics};
use sdfield::encoder::{encode_image, Image};
use sdfield::extraction::{evaluate_field, marching_cubes_with, IsoSurfaceConfig};
use sdfield::geometry::shapes::icosphere;
use sdfield::geometry::{build_sdf_grid, Aabb, SdfGrid};
use sdfield::metrics::{chamfer_with, sample_surface_points, voxel_iou_with};
use sdfield::regressor::{ModelConfig, SdfModel};
use sdfield::Vec3;

const MODES: [(&str, bool); 2] = [("serial", false), ("parallel", true)];

fn sdf_grid(c: &mut Criterion) {
    let mesh = icosphere(Vec3::zeros(), 0.4, 2);
    let mut g = c.benchmark_group("sdf_grid_res24");
    g.sample_size(10);
    for (name, par) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, &par| {
            b.iter(|| build_sdf_grid(black_box(&mesh), 24, Aabb::cube(0.5), par).unwrap())
        });
    }
    g.finish();
}

fn marching(c: &mut Criterion) {
    let grid = SdfGrid::from_fn([96; 3], Aabb::cube(0.5), true, |p| p.norm() - 0.4).unwrap();
    let mut g = c.benchmark_group("marching_cubes_res96");
    for (name, par) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, &par| {
            b.iter(|| marching_cubes_with(black_box(&grid), 0.0, par))
        });
    }
    g.finish();
}

fn field(c: &mut Criterion) {
    let model = SdfModel::init(&ModelConfig::default(), 1);
    let image = Image::filled(128, 128, 1, 0.5);
    let stack = encode_image(&image, &model.encoder).unwrap();
    let pose = CameraPose::look_at(Vec3::new(0.0, 0.0, -1.5), Vec3::zeros(), Vec3::y()).unwrap();
    let cfg = IsoSurfaceConfig { resolution: 16, ..Default::default() };
    let mut g = c.benchmark_group("evaluate_field_res16");
    g.sample_size(10);
    for (name, par) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, &par| {
            b.iter(|| evaluate_field(&model, &stack, &pose, &Intrinsics::default(), &cfg, par).unwrap())
        });
    }
    g.finish();
}

fn metrics(c: &mut Criterion) {
    let a_mesh = icosphere(Vec3::zeros(), 0.4, 3);
    let b_mesh = icosphere(Vec3::new(0.05, 0.0, 0.0), 0.38, 3);
    let a = sample_surface_points(&a_mesh, 8192, 1).unwrap();
    let b = sample_surface_points(&b_mesh, 8192, 2).unwrap();
    let mut g = c.benchmark_group("metrics");
    g.sample_size(10);
    for (name, par) in MODES {
        g.bench_with_input(BenchmarkId::new("chamfer_8192", name), &par, |bch, &par| {
            bch.iter(|| chamfer_with(black_box(&a), black_box(&b), par).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("voxel_iou_res16", name), &par, |bch, &par| {
            bch.iter(|| voxel_iou_with(&a_mesh, &b_mesh, 16, par).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sdf_grid, marching, field, metrics);
criterion_main!(benches);
