//! Batch encode a directory of meshes, fit a generator and learn an edit
//! direction from labels, all through the pipeline commands.
//!
//!     cargo run --release --example batch_pipeline

use geoimg::latent::SvmOptions;
use geoimg::mesh::{primitives, save_mesh, Vec3};
use geoimg::pipeline::{cmd_encode, cmd_latent_edit, cmd_latent_edit_direction, cmd_latent_fit, Config};
use geoimg::pipeline::{GeneratorSource, OutputTargets};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::temp_dir().join("geoimg-batch");
    let input = root.join("meshes");
    std::fs::create_dir_all(&input)?;
    let mut labels = serde_json::Map::new();
    for k in 0..10 {
        let stretch = 0.7 + 0.08 * k as f64;
        let mesh = primitives::star_shaped(3, |u: &Vec3| 1.0 / ((u.x / stretch).powi(2) + u.y * u.y + u.z * u.z).sqrt());
        let id = format!("blob{k:02}");
        save_mesh(&mesh, input.join(format!("{id}.obj")))?;
        labels.insert(id, serde_json::json!({ "wide": k >= 5 }));
    }
    std::fs::write(root.join("labels.json"), serde_json::Value::Object(labels).to_string())?;

    let config = Config {
        input_dir: input,
        output_dir: root.join("out"),
        resolution: 64,
        labels: Some(root.join("labels.json")),
        ..Default::default()
    };
    let summary = cmd_encode(&config)?;
    println!("encoded {} shapes, {} failed", summary.encoded(), summary.failed());

    let fit = cmd_latent_fit(&summary.manifest_path, 5, None)?;
    println!("generator: {}", fit.generator_path.display());
    let direction = config.output_dir.join("wide.json");
    let dir = cmd_latent_edit_direction(&summary.manifest_path, "wide", None, SvmOptions::default(), &direction)?;
    println!("`wide` direction accuracy {:.2}", dir.margin_accuracy.unwrap_or(0.0));

    let targets = OutputTargets {
        geoimg: config.output_dir.join("blob02_wider.geoimg"),
        mesh: Some(config.output_dir.join("blob02_wider.obj")),
        mirror: true,
    };
    let source = GeneratorSource::Linear(fit.generator_path);
    cmd_latent_edit(&source, &config.output_dir.join("blob02.latent.json"), &direction, 1.0, 2.0, &targets)?;
    println!("edited shape written to {}", targets.mesh.as_ref().unwrap().display());
    Ok(())
}
