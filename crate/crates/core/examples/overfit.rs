//! Trains one model on a single analytic shape and reports held-out error,
//! reconstruction chamfer distance and timing.
//!
//! ```text
//! cargo run --release -p sdfield --example overfit -- sphere two_stream 5000 1e-4 1e-4 64
//! ```

use std::time::Instant;

use sdfield::config::RunConfig;
use sdfield::extraction::{reconstruct, IsoSurfaceConfig};
use sdfield::metrics::{chamfer, sample_surface_points};
use sdfield::pipeline::run_fit;
use sdfield::regressor::ModelVariant;

fn main() -> sdfield::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let mut cfg = RunConfig {
        shape: sdfield::config::ShapeSpec::Analytic(arg(0, "sphere")),
        variant: ModelVariant::from_name(&arg(1, "two_stream")).expect("variant"),
        ..RunConfig::default()
    };
    cfg.train.iterations = arg(2, "2000").parse().unwrap();
    cfg.train.lr = arg(3, "1e-4").parse().unwrap();
    cfg.train.lr_final = arg(4, "1e-4").parse().unwrap();
    cfg.train.batch_size = arg(5, "64").parse().unwrap();
    cfg.train.global_only = arg(6, "false") == "global";

    let t = Instant::now();
    let out = run_fit(&cfg, true)?;
    let secs = t.elapsed().as_secs_f64();
    let log = &out.loss_log;
    let tail = &log[log.len().saturating_sub(100)..];
    println!(
        "train {:.1}s ({:.2} ms/it) final mean batch loss {:.5}",
        secs,
        1e3 * secs / log.len().max(1) as f64,
        tail.iter().sum::<f64>() / tail.len().max(1) as f64
    );
    println!("held-out {:?}", out.held_out);

    if out.model.variant != ModelVariant::Binary {
        let t = Instant::now();
        let scene = &out.prepared.scene;
        let iso = IsoSurfaceConfig { resolution: 64, iso_value: 0.0, bbox: cfg.bbox() };
        let mesh = reconstruct(&out.model, &scene.image, &scene.pose, &scene.intrinsics, &iso, true)?;
        let reference = out.prepared.shape.reference_mesh(cfg.bbox())?;
        let a = sample_surface_points(&mesh, 2048, 7)?;
        let b = sample_surface_points(&reference, 2048, 8)?;
        println!(
            "mesh {} verts {} faces watertight {} cd {:.3e} ({:.1}s)",
            mesh.vertices().len(),
            mesh.faces().len(),
            mesh.is_watertight(),
            chamfer(&a, &b)?,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
