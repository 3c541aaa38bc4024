use geoimg::codec::{decode, GeometryImage};
use geoimg::latent::{apply_edit, interpolate, EditDirection, LatentVector};
use geoimg::mesh::{PointSet, Vec3};
use geoimg::metrics::chamfer;
use geoimg::pipeline::{DatasetManifest, ManifestEntry, PipelineParams};
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::path::PathBuf;

fn points(k: usize) -> impl Strategy<Value = PointSet> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0), 1..k)
        .prop_map(|v| PointSet { points: v.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect() })
}

fn latent(d: usize) -> impl Strategy<Value = LatentVector> {
    prop::collection::vec(-10.0f64..10.0, d).prop_map(|v| LatentVector::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geoimg_bytes_roundtrip(n in 2usize..12, seed in prop::collection::vec(0.0f32..2.0, 144)) {
        let rad: Vec<f64> = seed[..n * n].iter().map(|&v| v as f64).collect();
        let gi = GeometryImage::from_rad(n, rad).unwrap();
        let bytes = gi.to_bytes();
        let back = GeometryImage::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &gi);
        prop_assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn decoded_radius_matches_pixels(n in 2usize..10, seed in prop::collection::vec(0.01f32..1.0, 100)) {
        let rad: Vec<f64> = seed[..n * n].iter().map(|&v| v as f64).collect();
        let gi = GeometryImage::from_rad(n, rad.clone()).unwrap();
        let m = decode(&gi, false).unwrap();
        prop_assert_eq!(m.vertices().len(), n * n);
        prop_assert_eq!(m.faces().len(), 2 * (n - 1) * (n - 1));
        let stored = gi.rad().unwrap();
        for (v, r) in m.vertices().iter().zip(stored) {
            prop_assert!((v.norm() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn chamfer_is_symmetric_and_zero_on_self(a in points(40), b in points(40)) {
        let ab = chamfer(&a, &b).unwrap();
        let ba = chamfer(&b, &a).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.max(1.0));
        prop_assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn edits_compose_additively(p in latent(6), n in latent(6), alpha in -3.0f64..3.0, t1 in -4.0f64..4.0, t2 in -4.0f64..4.0) {
        prop_assume!(n.values().iter().any(|v| v.abs() > 1e-3));
        let dir = EditDirection::new(n, "x").unwrap();
        let e = |q: &LatentVector, t: f64| apply_edit(q, &dir, alpha, t).unwrap();
        prop_assert!(e(&p, 0.0).max_abs_diff(&p) <= 1e-12);
        prop_assert!(e(&e(&p, t1), t2).max_abs_diff(&e(&p, t1 + t2)) <= 1e-12);
    }

    #[test]
    fn interpolation_hits_endpoints(a in latent(5), b in latent(5), s in 0.0f64..=1.0) {
        prop_assert_eq!(interpolate(&a, &b, 0.0).unwrap(), a.clone());
        prop_assert!(interpolate(&a, &b, 1.0).unwrap().max_abs_diff(&b) <= 1e-12);
        let m = interpolate(&a, &b, s).unwrap();
        for ((x, y), z) in a.values().iter().zip(b.values()).zip(m.values()) {
            prop_assert!(*z >= x.min(*y) - 1e-12 && *z <= x.max(*y) + 1e-12);
        }
    }

    #[test]
    fn manifest_json_is_stable(ids in prop::collection::btree_set("[a-z]{1,6}", 1..8), value in "[a-z0-9]{0,5}") {
        let entries: Vec<ManifestEntry> = ids
            .iter()
            .rev()
            .map(|id| ManifestEntry {
                id: id.clone(),
                source: PathBuf::from(format!("{id}.obj")),
                geoimg: Some(PathBuf::from(format!("{id}.geoimg"))),
                labels: BTreeMap::from([("tag".to_string(), value.clone())]),
                transform: None,
                latent: None,
                error: None,
            })
            .collect();
        let params = PipelineParams { resolution: 64, target_radius: 0.9, fill: Default::default(), seed: 7 };
        let m = DatasetManifest::new(params, entries);
        let text = m.to_json().unwrap();
        let back = DatasetManifest::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), text);
        let sorted: Vec<_> = back.entries.iter().map(|e| e.id.clone()).collect();
        prop_assert_eq!(sorted, ids.into_iter().collect::<Vec<_>>());
    }
}
