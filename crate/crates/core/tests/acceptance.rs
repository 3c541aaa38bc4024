//! Acceptance suite: one PASS/FAIL line per criterion, each with its
//! runtime budget. Runs with a custom main (`harness = false`).

use geoimg::codec::{decode, roundtrip_report, square_to_sphere, sphere_to_square, Encoder, FillPolicy, GeometryImage};
use geoimg::codec::RoundtripOptions;
use geoimg::latent::{apply_edit, fit_edit_direction, fit_linear_generator, project, EditDirection, Generator};
use geoimg::latent::{LatentVector, SvmOptions};
use geoimg::mesh::{primitives, PointSet, Vec3};
use geoimg::metrics::lfd::rotation_group;
use geoimg::metrics::{auction, chamfer, hungarian, lfd};
use geoimg::pipeline::{cmd_encode, Config};
use nalgebra::{DMatrix, DVector, Rotation3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::TAU;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Duration, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Frozen from a reference run at n = 512: 1.746e-5.
const CUBE_CHAMFER_512: f64 = 2.0e-5;

fn rad_decode_formula() -> Check {
    let mut worst: f64 = 0.0;
    for r0 in [0.3, 0.8, 1.0] {
        for n in [64, 256] {
            let gi = GeometryImage::from_rad(n, vec![r0; n * n]).map_err(|e| e.to_string())?;
            for mirror in [false, true] {
                let m = decode(&gi, mirror).map_err(|e| e.to_string())?;
                for v in m.vertices() {
                    worst = worst.max((v.norm() - r0).abs());
                }
            }
        }
    }
    ensure(worst < 1e-9, || format!("max | |v| - r0 | = {worst:e}"))?;
    Ok(format!("max | |v| - r0 | = {worst:.1e}"))
}

fn equal_area_map() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-6;
    let mut worst_det: f64 = 0.0;
    let mut worst_inv: f64 = 0.0;
    for _ in 0..10_000 {
        let s = rng.random_range(h..1.0 - h);
        let t = rng.random_range(h..1.0 - h);
        let ds = (square_to_sphere(s + h, t) - square_to_sphere(s - h, t)) / (2.0 * h);
        let dt = (square_to_sphere(s, t + h) - square_to_sphere(s, t - h)) / (2.0 * h);
        let det = ds.cross(&dt).norm();
        worst_det = worst_det.max((det / TAU - 1.0).abs());
        let (s2, t2) = sphere_to_square(&square_to_sphere(s, t)).map_err(|e| e.to_string())?;
        worst_inv = worst_inv.max((s2 - s).abs().max((t2 - t).abs()));
    }
    ensure(worst_det < 1e-4, || format!("Jacobian relative deviation {worst_det:e}"))?;
    ensure(worst_inv < 1e-6, || format!("inverse round-trip error {worst_inv:e}"))?;
    Ok(format!("|det/2pi - 1| <= {worst_det:.1e}, inverse error <= {worst_inv:.1e}"))
}

fn roundtrip_fidelity() -> Check {
    let sphere = primitives::star_shaped(5, |_: &Vec3| 0.8);
    let sphere_opts = RoundtripOptions {
        target_radius: 0.8,
        ..Default::default()
    };
    let cube = primitives::cube(0.5);
    let cube_opts = RoundtripOptions::default();
    let mut lines = Vec::new();
    for (name, mesh, opts) in [("sphere", &sphere, &sphere_opts), ("cube", &cube, &cube_opts)] {
        let mut series = Vec::new();
        for n in [64, 128, 256, 512] {
            let r = roundtrip_report(mesh, n, opts).map_err(|e| e.to_string())?;
            series.push(r.chamfer);
        }
        ensure(series.windows(2).all(|w| w[1] <= w[0]), || format!("{name} chamfer not monotone: {series:?}"))?;
        lines.push(format!("{name} {}", series.iter().map(|c| format!("{c:.2e}")).collect::<Vec<_>>().join(" ")));
        if name == "sphere" {
            ensure(series[2] < 1e-3, || format!("sphere n=256 chamfer {:e}", series[2]))?;
        } else {
            ensure(series[3] < CUBE_CHAMFER_512, || format!("cube n=512 chamfer {:e}", series[3]))?;
        }
    }
    Ok(format!("chamfer n=64..512: {}", lines.join("; ")))
}

fn random_points(rng: &mut ChaCha8Rng, k: usize) -> PointSet {
    PointSet {
        points: (0..k)
            .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    }
}

fn brute_chamfer(a: &PointSet, b: &PointSet) -> f64 {
    let one_way = |p: &PointSet, q: &PointSet| {
        p.points
            .iter()
            .map(|x| q.points.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .sum::<f64>()
            / p.points.len() as f64
    };
    one_way(a, b) + one_way(b, a)
}

fn metric_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cd_err: f64 = 0.0;
    for _ in 0..5 {
        let a = random_points(&mut rng, 200);
        let b = random_points(&mut rng, 200);
        cd_err = cd_err.max((chamfer(&a, &b).map_err(|e| e.to_string())? - brute_chamfer(&a, &b)).abs());
    }
    ensure(cd_err < 1e-9, || format!("chamfer vs brute force {cd_err:e}"))?;

    let mut emd_gap: f64 = 0.0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let a = random_points(&mut rng, 64);
        let b = random_points(&mut rng, 64);
        let cost = |i: usize, j: usize| (a.points[i] - b.points[j]).abs().sum();
        let total = |assign: &[usize]| assign.iter().enumerate().map(|(i, &j)| cost(i, j)).sum::<f64>();
        let exact = total(&hungarian(64, cost));
        let approx = total(&auction(64, cost));
        emd_gap = emd_gap.max((approx - exact) / exact);
    }
    ensure(emd_gap < 0.02, || format!("auction vs Hungarian gap {emd_gap:e}"))?;

    let m = primitives::cube(0.6).map_vertices(|v| v.component_mul(&Vec3::new(1.0, 0.5, 0.8)));
    let self_dist = lfd(&m, &m).map_err(|e| e.to_string())?;
    ensure(self_dist == 0.0, || format!("lfd(m, m) = {self_dist:e}"))?;
    let mut worst_rot: f64 = 0.0;
    for g in rotation_group() {
        let r = m.rotated(&Rotation3::from_matrix_unchecked(g.rotation));
        worst_rot = worst_rot.max(lfd(&m, &r).map_err(|e| e.to_string())?);
    }
    ensure(worst_rot < 1e-3, || format!("lfd under group rotation {worst_rot:e}"))?;
    Ok(format!(
        "chamfer err {cd_err:.1e}, auction gap {:.3}%, lfd(m,m) = 0, max rotated lfd {worst_rot:.1e}",
        100.0 * emd_gap
    ))
}

fn latent_projection() -> Check {
    let (d, n) = (16, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data: Vec<GeometryImage> = (0..40)
        .map(|_| {
            let coeffs: Vec<f64> = (0..6).map(|_| rng.random_range(-0.1..0.1)).collect();
            let rad = (0..n * n)
                .map(|idx| {
                    let (x, y) = ((idx % n) as f64 / n as f64, (idx / n) as f64 / n as f64);
                    0.5 + coeffs[0] * x + coeffs[1] * y + coeffs[2] * x * y + coeffs[3] * (6.0 * x).sin()
                        + coeffs[4] * (5.0 * y).cos()
                        + coeffs[5] * rng.random_range(-1.0..1.0)
                })
                .collect();
            GeometryImage::from_rad(n, rad).unwrap()
        })
        .collect();
    let g = fit_linear_generator(&data, d).map_err(|e| e.to_string())?;
    let w_star = LatentVector::new((0..d).map(|_| 0.05 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect()).unwrap();
    let target = GeometryImage::from_rad(n, g.generate_raw(&w_star).map_err(|e| e.to_string())?).unwrap();

    // least squares through a QR solve of the stacked basis, independent of
    // the generator's own encoder
    let b = DMatrix::from_fn(n * n, d, |i, k| g.basis()[k][i]);
    let rhs = DVector::from_iterator(n * n, target.rad().unwrap().iter().zip(g.mean()).map(|(x, m)| x - m));
    let qr = b.clone().qr();
    let w_ls = qr.r().solve_upper_triangular(&(qr.q().transpose() * rhs)).ok_or("singular basis")?;
    let oracle = LatentVector::new(w_ls.iter().copied().collect()).unwrap();

    let p = project(&target, &g, 500, 0.5, 0).map_err(|e| e.to_string())?;
    let err = p.latent.max_abs_diff(&oracle);
    ensure(err < 1e-4, || format!("|w - w_ls|_inf = {err:e}"))?;
    ensure(p.losses.len() == 500, || format!("{} losses", p.losses.len()))?;
    // equal to within f64 round-off of the starting loss once at the floor
    let slack = 1e-12 * p.initial_loss;
    let rises = p.losses.windows(2).filter(|w| w[1] > w[0] + slack).count();
    ensure(rises == 0 && p.losses[0] <= p.initial_loss, || format!("loss rose {rises} times"))?;
    Ok(format!(
        "|w - w_ls|_inf = {err:.1e}, |w - w*|_inf = {:.1e}, loss {:.2e} -> {:.2e}",
        p.latent.max_abs_diff(&w_star),
        p.initial_loss,
        p.losses[499]
    ))
}

fn edit_formula() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = 12;
        let p = LatentVector::new((0..d).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
        let dir = EditDirection::new(LatentVector::new((0..d).map(|_| Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect()).unwrap(), "a")
            .map_err(|e| e.to_string())?;
        let (alpha, t1, t2): (f64, f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let e = |q: &LatentVector, t: f64| apply_edit(q, &dir, alpha, t).unwrap();
        worst = worst.max(e(&p, 0.0).max_abs_diff(&p));
        worst = worst.max(e(&e(&p, t1), t2).max_abs_diff(&e(&p, t1 + t2)));
        worst = worst.max(e(&e(&p, t1), -t1).max_abs_diff(&p));
    }
    ensure(worst <= 1e-12, || format!("edit identities off by {worst:e}"))?;

    let d = 10;
    let mut examples = Vec::new();
    for k in 0..400 {
        let y = k % 2 == 0;
        let mut w: Vec<f64> = (0..d).map(|_| Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
        w[3] += if y { 4.0 } else { -4.0 };
        examples.push((LatentVector::new(w).unwrap(), y));
    }
    let dir = fit_edit_direction(&examples, "axis3", SvmOptions::default()).map_err(|e| e.to_string())?;
    let angle = dir.direction.values()[3].clamp(-1.0, 1.0).acos().to_degrees();
    let acc = dir.margin_accuracy.unwrap_or(0.0);
    ensure(angle < 5.0 && acc == 1.0, || format!("angle {angle:.2} deg, accuracy {acc}"))?;
    Ok(format!("identities within {worst:.1e}; SVM angle {angle:.2} deg, accuracy {acc}"))
}

fn meshing_speed(dir: &Path) -> Check {
    let n = 512;
    let mesh = primitives::star_shaped(4, |u: &Vec3| 0.8 / (u.x * u.x + 2.0 * u.y * u.y + u.z * u.z).sqrt());
    let (gi, _) = Encoder::new(&mesh)
        .and_then(|e| e.encode(n, FillPolicy::Nearest))
        .map_err(|e| e.to_string())?;
    let path = dir.join("speed.geoimg");
    GeometryImage::from_rad(n, gi.rad().unwrap().to_vec())
        .and_then(|g| g.save(&path))
        .map_err(|e| e.to_string())?;
    let loaded = GeometryImage::load(&path).map_err(|e| e.to_string())?;
    decode(&loaded, true).map_err(|e| e.to_string())?;
    let mut runs: Vec<Duration> = (0..50)
        .map(|_| {
            let t = Instant::now();
            let m = decode(&loaded, true).unwrap();
            let dt = t.elapsed();
            drop(m);
            dt
        })
        .collect();
    runs.sort();
    let median = runs[25];

    let out = dir.join("speed.obj");
    let t = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_geoimg"))
        .args(["decode", path.to_str().unwrap(), "--mirror", "--out", out.to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    let cli = t.elapsed();
    ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
    let detail = format!(
        "decode median {:.2} ms over 50 runs, CLI decode to OBJ {:.0} ms",
        median.as_secs_f64() * 1e3,
        cli.as_secs_f64() * 1e3
    );
    ensure(median < Duration::from_millis(20) && cli < Duration::from_millis(200), || detail.clone())?;
    Ok(detail)
}

fn determinism(dir: &Path) -> Check {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let run = |out: &str| {
        let cfg = Config {
            input_dir: fixtures.join("trio"),
            output_dir: dir.join(out),
            labels: Some(fixtures.join("labels.json")),
            ..Default::default()
        };
        cmd_encode(&cfg).map_err(|e| e.to_string())
    };
    let a = run("a")?;
    run("b")?;
    ensure(a.encoded() == 3 && a.failed() == 0, || format!("{} encoded, {} failed", a.encoded(), a.failed()))?;
    let mut files = vec!["manifest.json".to_string()];
    files.extend(a.manifest.entries.iter().filter_map(|e| e.geoimg.as_ref()).map(|p| p.display().to_string()));
    for f in &files {
        let x = std::fs::read(dir.join("a").join(f)).map_err(|e| e.to_string())?;
        let y = std::fs::read(dir.join("b").join(f)).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("{f} differs between runs"))?;
    }
    Ok(format!("{} files byte-identical across two runs", files.len()))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("rad decode formula", Duration::from_secs(1), Box::new(rad_decode_formula)),
        ("equal-area parameterization", Duration::from_secs(5), Box::new(equal_area_map)),
        ("round-trip fidelity", Duration::from_secs(60), Box::new(roundtrip_fidelity)),
        ("metric oracles", Duration::from_secs(120), Box::new(metric_oracles)),
        ("latent projection", Duration::from_secs(30), Box::new(latent_projection)),
        ("edit formula", Duration::from_secs(30), Box::new(edit_formula)),
        ("meshing speed", Duration::from_secs(60), Box::new(|| meshing_speed(tmp.path()))),
        ("determinism", Duration::from_secs(120), Box::new(|| determinism(tmp.path()))),
    ];
    let mut failed = 0;
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = check();
        let elapsed = t.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= *budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {budget:?} runtime budget")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} {}. {name} [{:.2} s / {} s]: {detail}",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
