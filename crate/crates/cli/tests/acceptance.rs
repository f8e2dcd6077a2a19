//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! 1. FFD identity and affine precision at 1e-9, under 1 s on a 50k-vertex
//!    template.
//! 2. Solve/measure closure within 2% for 100 randomized reports (+/-30%),
//!    both garment types, under 30 s.
//! 3. Ellipse inversion round trip at 1e-9; Ramanujan vs quadrature within
//!    0.5% for aspect ratios >= 0.2.
//! 4. MLS interpolation/identity/similarity at 1e-7; brute-force least
//!    squares oracle within 1e-6.
//! 5. Checkerboard texture round trip: mean absolute error below 5/255 over
//!    the eroded interior of every piece, under 60 s at 1024^2 source.
//! 6. Mirror and scale invariances of measurement reports.
//! 7. Byte-identical outputs across repeated and staged CLI runs.
//! 8. Monotone garment size response (longer hemline, wider chest).

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use garment3d::annotation::{mirror_annotations, CaptureMode, GarmentType};
use garment3d::geom::{point_in_polygon, point_segment_distance, solve_dense, Aabb, Pt2, Pt3};
use garment3d::geomkit::{
    ellipse_girth_from_width, ellipse_width_from_half_perimeter, ramanujan_perimeter,
};
use garment3d::lattice::{
    deform, embed, solve_lattice_pants, solve_lattice_tshirt, ControlLattice,
};
use garment3d::measure::{measure_tshirt, pixel_scale, MeasurementReport};
use garment3d::synth::{make_bundle, make_checker_fixture, write_bundle_files, BundleOptions};
use garment3d::template::{
    make_pants_template, make_tshirt_template, parse_obj, PantsParams, TemplateAsset,
    TshirtParams,
};
use garment3d::texwarp::{compose_atlas, AtlasOptions, MlsWarp};

fn pass(n: u32, name: &str) {
    println!("ACCEPTANCE {n} {name}: PASS");
}

// --- criterion 1 -------------------------------------------------------

#[test]
fn criterion_1_ffd_identity_and_affine_precision() {
    let params = TshirtParams {
        segments_across: 150,
        ..TshirtParams::default()
    };
    let template = make_tshirt_template(&params).unwrap();
    assert!(
        template.vertices.len() >= 50_000,
        "template has {} vertices",
        template.vertices.len()
    );

    let start = Instant::now();
    let bbox = template.aabb();
    let lattice = ControlLattice::rest_over_box((4, 2, 4), bbox);
    let embedding = embed(&template.vertices, &bbox).unwrap();
    let out = deform(&embedding, &lattice);
    let scale = bbox.size().x.max(bbox.size().y).max(bbox.size().z);
    for (a, b) in template.vertices.iter().zip(&out) {
        assert!(a.distance(*b) <= 1e-9 * scale, "identity violated");
    }

    let affine = |p: Pt3| {
        Pt3::new(
            1.21 * p.x - 0.1 * p.y + 0.04 * p.z + 0.3,
            0.05 * p.x + 0.92 * p.y - 0.2 * p.z - 0.1,
            -0.07 * p.x + 0.3 * p.y + 1.15 * p.z + 0.5,
        )
    };
    let mut mapped = lattice.clone();
    for p in &mut mapped.displaced {
        *p = affine(*p);
    }
    let out = deform(&embedding, &mapped);
    for (a, b) in template.vertices.iter().zip(&out) {
        assert!(
            affine(*a).distance(*b) <= 1e-9 * scale.max(1.0),
            "affine precision violated"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "FFD on 50k vertices took {elapsed:?}"
    );
    pass(1, "ffd identity & affine precision");
}

// --- criterion 2 -------------------------------------------------------

fn random_tshirt_report(
    rng: &mut StdRng,
    base: &garment3d::measure::TshirtMeasurements,
) -> garment3d::measure::TshirtMeasurements {
    let mut f = || rng.gen_range(0.7..1.3);
    let mut report = base.clone();
    report.left_sleeve_length *= f();
    report.right_sleeve_length *= f();
    report.chest_width *= f();
    report.armpit_to_hemline *= f();
    report.armpit_to_shoulder *= f();
    // Keep the shoulder-to-neck-top gap positive while staying within
    // +/-30% of the template's own neck_to_hemline.
    let base_gap = base.neck_to_hemline - base.armpit_to_hemline - base.armpit_to_shoulder;
    report.neck_to_hemline = report.armpit_to_hemline + report.armpit_to_shoulder + base_gap * f();
    report
}

#[test]
fn criterion_2_solve_measure_closure() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(20240811);

    let tshirt = make_tshirt_template(&TshirtParams::default()).unwrap();
    let base_t = match tshirt.intrinsic_report() {
        MeasurementReport::Tshirt(r) => r,
        _ => unreachable!(),
    };
    let embedding_t = embed(&tshirt.vertices, &tshirt.aabb()).unwrap();
    for _ in 0..100 {
        let report = random_tshirt_report(&mut rng, &base_t);
        let lattice = solve_lattice_tshirt(&report, &tshirt).unwrap();
        let deformed = deform(&embedding_t, &lattice);
        let measured = match tshirt.remeasure_markers(&deformed) {
            MeasurementReport::Tshirt(r) => r,
            _ => unreachable!(),
        };
        for (got, want) in [
            (measured.left_sleeve_length, report.left_sleeve_length),
            (measured.right_sleeve_length, report.right_sleeve_length),
            (measured.chest_width, report.chest_width),
            (measured.armpit_to_hemline, report.armpit_to_hemline),
            (measured.armpit_to_shoulder, report.armpit_to_shoulder),
            (measured.neck_to_hemline, report.neck_to_hemline),
        ] {
            assert!(
                ((got - want) / want).abs() < 0.02,
                "t-shirt closure: {got} vs {want}"
            );
        }
    }

    let pants = make_pants_template(&PantsParams::default()).unwrap();
    let base_p = match pants.intrinsic_report() {
        MeasurementReport::Pants(r) => r,
        _ => unreachable!(),
    };
    let embedding_p = embed(&pants.vertices, &pants.aabb()).unwrap();
    for _ in 0..100 {
        let mut report = base_p.clone();
        report.crotch_to_bottom *= rng.gen_range(0.7..1.3);
        report.crotch_to_waist *= rng.gen_range(0.7..1.3);
        report.waist_girth *= rng.gen_range(0.7..1.3);
        let lattice = solve_lattice_pants(&report, &pants).unwrap();
        let deformed = deform(&embedding_p, &lattice);
        let measured = match pants.remeasure_markers(&deformed) {
            MeasurementReport::Pants(r) => r,
            _ => unreachable!(),
        };
        for (got, want) in [
            (measured.crotch_to_bottom, report.crotch_to_bottom),
            (measured.crotch_to_waist, report.crotch_to_waist),
            (measured.waist_girth, report.waist_girth),
        ] {
            assert!(
                ((got - want) / want).abs() < 0.02,
                "pants closure: {got} vs {want}"
            );
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "closure took {elapsed:?}");
    pass(2, "solve/measure closure within 2%");
}

// --- criterion 3 -------------------------------------------------------

fn quadrature_perimeter(a: f64, b: f64) -> f64 {
    // Adaptive Simpson on the exact elliptic arc-length integral.
    fn integrand(a: f64, b: f64, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        ((a * s).powi(2) + (b * c).powi(2)).sqrt()
    }
    fn simpson(lo: f64, hi: f64, flo: f64, fm: f64, fhi: f64) -> f64 {
        (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi)
    }
    #[allow(clippy::too_many_arguments)]
    fn adapt(
        a: f64,
        b: f64,
        lo: f64,
        hi: f64,
        flo: f64,
        fmid: f64,
        fhi: f64,
        whole: f64,
        eps: f64,
    ) -> f64 {
        let m = 0.5 * (lo + hi);
        let lm = 0.5 * (lo + m);
        let rm = 0.5 * (m + hi);
        let flm = integrand(a, b, lm);
        let frm = integrand(a, b, rm);
        let left = simpson(lo, m, flo, flm, fmid);
        let right = simpson(m, hi, fmid, frm, fhi);
        if (left + right - whole).abs() <= 15.0 * eps {
            left + right + (left + right - whole) / 15.0
        } else {
            adapt(a, b, lo, m, flo, flm, fmid, left, eps / 2.0)
                + adapt(a, b, m, hi, fmid, frm, fhi, right, eps / 2.0)
        }
    }
    let hi = std::f64::consts::FRAC_PI_2;
    let flo = integrand(a, b, 0.0);
    let fhi = integrand(a, b, hi);
    let fmid = integrand(a, b, 0.5 * hi);
    let whole = simpson(0.0, hi, flo, fmid, fhi);
    4.0 * adapt(a, b, 0.0, hi, flo, fmid, fhi, whole, 1e-12)
}

#[test]
fn criterion_3_ellipse_inversion() {
    for i in 2..=10 {
        let rho = i as f64 / 10.0;
        for h in [0.2, 1.0, 7.3, 42.0] {
            let width = ellipse_width_from_half_perimeter(h, rho).unwrap();
            let back = ellipse_girth_from_width(width, rho).unwrap() / 2.0;
            assert!(
                ((back - h) / h).abs() <= 1e-9,
                "round trip rho={rho} h={h}: {back}"
            );
        }
        let a = 1.0;
        let ram = ramanujan_perimeter(a, rho * a);
        let exact = quadrature_perimeter(a, rho * a);
        assert!(
            ((ram - exact) / exact).abs() < 0.005,
            "rho={rho}: ramanujan {ram} vs quadrature {exact}"
        );
    }
    pass(3, "ellipse inversion & perimeter accuracy");
}

// --- criterion 4 -------------------------------------------------------

fn brute_force_similarity(v: Pt2, pairs: &[(Pt2, Pt2)]) -> Pt2 {
    let mut a = vec![vec![0.0; 4]; 4];
    let mut rhs = vec![0.0; 4];
    for (p, q) in pairs {
        let w = 1.0 / p.distance_sq(v);
        let jx = [p.x, -p.y, 1.0, 0.0];
        let jy = [p.y, p.x, 0.0, 1.0];
        for i in 0..4 {
            for j in 0..4 {
                a[i][j] += w * (jx[i] * jx[j] + jy[i] * jy[j]);
            }
            rhs[i] += w * (jx[i] * q.x + jy[i] * q.y);
        }
    }
    let sol = solve_dense(a, rhs).unwrap();
    Pt2::new(
        sol[0] * v.x - sol[1] * v.y + sol[2],
        sol[1] * v.x + sol[0] * v.y + sol[3],
    )
}

#[test]
fn criterion_4_mls_properties() {
    let mut rng = StdRng::seed_from_u64(4242);

    // Interpolation at control points.
    let pairs: Vec<(Pt2, Pt2)> = (0..25)
        .map(|_| {
            (
                Pt2::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)),
                Pt2::new(rng.gen_range(-50.0..150.0), rng.gen_range(-50.0..150.0)),
            )
        })
        .collect();
    let warp = MlsWarp::new(&pairs, 1.0).unwrap();
    for (p, q) in &pairs {
        assert!(warp.map(*p).distance(*q) < 1e-9, "interpolation");
    }

    // Identity and similarity reproduction on 1000 random points.
    let ps: Vec<Pt2> = (0..30)
        .map(|_| Pt2::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
        .collect();
    let identity = MlsWarp::new(
        &ps.iter().map(|p| (*p, *p)).collect::<Vec<_>>(),
        1.0,
    )
    .unwrap();
    let (s, c) = 0.7_f64.sin_cos();
    let sim = |p: Pt2| Pt2::new(1.8 * (c * p.x - s * p.y) + 11.0, 1.8 * (s * p.x + c * p.y) - 4.0);
    let similar = MlsWarp::new(
        &ps.iter().map(|p| (*p, sim(*p))).collect::<Vec<_>>(),
        1.0,
    )
    .unwrap();
    for _ in 0..1000 {
        let v = Pt2::new(rng.gen_range(-10.0..110.0), rng.gen_range(-10.0..110.0));
        assert!(identity.map(v).distance(v) <= 1e-7, "identity reproduction");
        assert!(
            similar.map(v).distance(sim(v)) <= 1e-7,
            "similarity reproduction"
        );
    }

    // Brute-force weighted least squares oracle on 10 random pair sets.
    let mut max_dev = 0.0_f64;
    for _ in 0..10 {
        let pairs: Vec<(Pt2, Pt2)> = (0..12)
            .map(|_| {
                (
                    Pt2::new(rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0)),
                    Pt2::new(rng.gen_range(0.0..80.0), rng.gen_range(0.0..80.0)),
                )
            })
            .collect();
        let warp = MlsWarp::new(&pairs, 1.0).unwrap();
        for _ in 0..100 {
            let v = Pt2::new(rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0));
            if pairs.iter().any(|(p, _)| p.distance(v) < 1e-3) {
                continue;
            }
            max_dev = max_dev.max(warp.map(v).distance(brute_force_similarity(v, &pairs)));
        }
    }
    assert!(max_dev <= 1e-6, "max oracle deviation {max_dev}");
    pass(4, "mls interpolation/reproduction/oracle");
}

// --- criterion 5 -------------------------------------------------------

fn checker_roundtrip(template: &TemplateAsset, label: &str) {
    let atlas_size = 2048u32;
    let fx = make_checker_fixture(template, 1024, atlas_size, 128, 28.0);
    let options = AtlasOptions {
        atlas_size,
        samples_per_segment: 50,
        ..AtlasOptions::default()
    };
    let (atlas, stats) = compose_atlas(&fx.bundle, template, &options).unwrap();
    for s in &stats {
        assert!(!s.skipped, "piece {} skipped", s.piece);
    }

    for piece in &template.pieces {
        let placement = fx
            .placements
            .iter()
            .find(|(n, _)| *n == piece.name)
            .map(|(_, p)| *p)
            .unwrap();
        let stat = stats.iter().find(|s| s.piece == piece.name).unwrap();
        // Content within (erosion radius + snap slack) of the region border
        // samples extrapolated colors; measure only the interior beyond it.
        let texels_per_px = atlas_size as f64 / placement.scale;
        let margin_uv = ((stat.erosion_radius + 2.0) * texels_per_px + 2.0) / atlas_size as f64;

        let (mut lo, mut hi) = (Pt2::new(1.0, 1.0), Pt2::new(0.0, 0.0));
        for v in &piece.contour {
            lo = Pt2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Pt2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        let n = piece.contour.len();
        let mut sum = 0.0;
        let mut count = 0usize;
        let t0 = ((lo.x * atlas_size as f64) as u32).saturating_sub(1);
        let t1 = ((hi.x * atlas_size as f64) as u32 + 1).min(atlas_size - 1);
        let r0 = ((lo.y * atlas_size as f64) as u32).saturating_sub(1);
        let r1 = ((hi.y * atlas_size as f64) as u32 + 1).min(atlas_size - 1);
        for ty in r0..=r1 {
            for tx in t0..=t1 {
                let uv = Pt2::new(
                    (tx as f64 + 0.5) / atlas_size as f64,
                    (ty as f64 + 0.5) / atlas_size as f64,
                );
                if !point_in_polygon(uv, &piece.contour, 0.0) {
                    continue;
                }
                let near_border = (0..n).any(|i| {
                    point_segment_distance(uv, piece.contour[i], piece.contour[(i + 1) % n])
                        < margin_uv
                });
                if near_border {
                    continue;
                }
                let got = atlas.raster.get_pixel(tx, ty).0;
                let want = fx.atlas.get_pixel(tx, ty).0;
                for ch in 0..3 {
                    sum += (got[ch] as f64 - want[ch] as f64).abs();
                }
                count += 3;
            }
        }
        assert!(count > 3000, "piece {} interior too small: {count}", piece.name);
        let mae = sum / count as f64;
        assert!(
            mae < 5.0,
            "{label} piece {}: checkerboard MAE {mae:.3}/255",
            piece.name
        );
    }
}

#[test]
fn criterion_5_texture_round_trip() {
    let start = Instant::now();
    let tshirt = make_tshirt_template(&TshirtParams::default()).unwrap();
    checker_roundtrip(&tshirt, "tshirt");
    let pants = make_pants_template(&PantsParams::default()).unwrap();
    checker_roundtrip(&pants, "pants");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "round trip took {elapsed:?}");
    pass(5, "checkerboard texture round trip");
}

// --- criterion 6 -------------------------------------------------------

#[test]
fn criterion_6_mirror_and_scale_invariances() {
    let (bundle, reference) = make_bundle(&BundleOptions::default());
    let template = make_tshirt_template(&TshirtParams::default()).unwrap();
    let scale = pixel_scale(
        &bundle.front.landmarks,
        Some((reference.0.as_str(), reference.1)),
    )
    .unwrap();
    let report = measure_tshirt(
        &bundle.front.landmarks,
        CaptureMode::Mannequin,
        &scale,
        template.constants.chest_rho,
    )
    .unwrap();

    let (mirrored_lm, _) = mirror_annotations(&bundle.front.landmarks, &bundle.front.mask);
    let mirrored = measure_tshirt(
        &mirrored_lm,
        CaptureMode::Mannequin,
        &scale,
        template.constants.chest_rho,
    )
    .unwrap();
    assert!((report.left_sleeve_length - mirrored.right_sleeve_length).abs() <= 1e-9);
    assert!((report.right_sleeve_length - mirrored.left_sleeve_length).abs() <= 1e-9);
    assert!((report.chest_width - mirrored.chest_width).abs() <= 1e-9);
    assert!((report.armpit_to_hemline - mirrored.armpit_to_hemline).abs() <= 1e-9);
    assert!((report.armpit_to_shoulder - mirrored.armpit_to_shoulder).abs() <= 1e-9);
    assert!((report.neck_to_hemline - mirrored.neck_to_hemline).abs() <= 1e-9);
    assert!(
        (report.armpit_to_hemline_sides.left - mirrored.armpit_to_hemline_sides.right).abs()
            <= 1e-9
    );

    // Doubling the user measurement doubles every metric field exactly.
    let scale2 = pixel_scale(
        &bundle.front.landmarks,
        Some((reference.0.as_str(), reference.1 * 2.0)),
    )
    .unwrap();
    let doubled = measure_tshirt(
        &bundle.front.landmarks,
        CaptureMode::FlatLay,
        &scale2,
        template.constants.chest_rho,
    )
    .unwrap();
    let flat = measure_tshirt(
        &bundle.front.landmarks,
        CaptureMode::FlatLay,
        &scale,
        template.constants.chest_rho,
    )
    .unwrap();
    assert_eq!(doubled.left_sleeve_length, 2.0 * flat.left_sleeve_length);
    assert_eq!(doubled.right_sleeve_length, 2.0 * flat.right_sleeve_length);
    assert_eq!(doubled.chest_width, 2.0 * flat.chest_width);
    assert_eq!(doubled.armpit_to_hemline, 2.0 * flat.armpit_to_hemline);
    assert_eq!(doubled.armpit_to_shoulder, 2.0 * flat.armpit_to_shoulder);
    assert_eq!(doubled.neck_to_hemline, 2.0 * flat.neck_to_hemline);
    pass(6, "mirror & scale invariances");
}

// --- criterion 7 -------------------------------------------------------

struct CliFixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
    reference: (String, f64),
    garment: &'static str,
}

fn cli_fixture(garment: GarmentType) -> CliFixture {
    let dir = tempfile::tempdir().unwrap();
    let opts = BundleOptions {
        garment,
        ..BundleOptions::default()
    };
    let (bundle, reference) = make_bundle(&opts);
    write_bundle_files(&bundle, dir.path()).unwrap();
    let root = dir.path().to_path_buf();
    CliFixture {
        _dir: dir,
        root,
        reference,
        garment: match garment {
            GarmentType::Tshirt => "tshirt",
            GarmentType::Pants => "pants",
        },
    }
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_garment3d"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn common_args(fx: &CliFixture, out: &Path) -> Vec<String> {
    let f = |name: &str| fx.root.join(name).display().to_string();
    vec![
        "--garment-type".into(),
        fx.garment.into(),
        "--front".into(),
        f("front.png"),
        "--front-landmarks".into(),
        f("front_landmarks.json"),
        "--front-mask".into(),
        f("front_mask.png"),
        "--back".into(),
        f("back.png"),
        "--back-landmarks".into(),
        f("back_landmarks.json"),
        "--back-mask".into(),
        f("back_mask.png"),
        "--out".into(),
        out.display().to_string(),
        "--measure".into(),
        format!("{}={}", fx.reference.0, fx.reference.1),
        "--atlas-size".into(),
        "512".into(),
        "--n-contour".into(),
        "20".into(),
    ]
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn criterion_7_end_to_end_determinism() {
    for garment in [GarmentType::Tshirt, GarmentType::Pants] {
        let fx = cli_fixture(garment);
        let out_dir = tempfile::tempdir().unwrap();
        let (a, b, staged) = (
            out_dir.path().join("a"),
            out_dir.path().join("b"),
            out_dir.path().join("staged"),
        );

        for out in [&a, &b] {
            let mut args = vec!["build".to_string()];
            args.extend(common_args(&fx, out));
            let output = run_cli(&args.iter().map(String::as_str).collect::<Vec<_>>());
            assert!(
                output.status.success(),
                "build failed: {}",
                String::from_utf8_lossy(&output.stderr)
            );
        }
        for file in [
            "model.obj",
            "model.mtl",
            "atlas.png",
            "measurements.json",
            "lattice.json",
        ] {
            assert_eq!(
                read(&a.join(file)),
                read(&b.join(file)),
                "{} differs between runs ({})",
                file,
                fx.garment
            );
        }

        // Staged commands reproduce the build outputs byte for byte.
        for stage in ["measure", "deform", "texture"] {
            let mut args = vec![stage.to_string()];
            args.extend(common_args(&fx, &staged));
            let output = run_cli(&args.iter().map(String::as_str).collect::<Vec<_>>());
            assert!(
                output.status.success(),
                "{stage} failed: {}",
                String::from_utf8_lossy(&output.stderr)
            );
        }
        for file in [
            "model.obj",
            "model.mtl",
            "atlas.png",
            "measurements.json",
            "lattice.json",
        ] {
            assert_eq!(
                read(&a.join(file)),
                read(&staged.join(file)),
                "staged {} differs from build ({})",
                file,
                fx.garment
            );
        }
    }
    pass(7, "end-to-end determinism & stage isolation");
}

// --- criterion 8 -------------------------------------------------------

fn obj_extents(path: &Path) -> (f64, f64) {
    let text = std::fs::read_to_string(path).unwrap();
    let (vertices, _, _) = parse_obj(&text).unwrap();
    let bb = Aabb::from_points(&vertices).unwrap();
    (bb.max.x - bb.min.x, bb.max.z - bb.min.z)
}

#[test]
fn criterion_8_monotone_size_response() {
    let out_dir = tempfile::tempdir().unwrap();

    let base_fx = cli_fixture(GarmentType::Tshirt);
    let base_out = out_dir.path().join("base");
    let mut args = vec!["build".to_string()];
    args.extend(common_args(&base_fx, &base_out));
    let output = run_cli(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(output.status.success());

    // Wider chest and a longer hemline, same scale reference.
    let bigger = BundleOptions {
        tshirt: TshirtParams {
            chest_width: 0.60,
            hem_to_armpit: 0.45,
            ..TshirtParams::default()
        },
        ..BundleOptions::default()
    };
    let (bundle, _) = make_bundle(&bigger);
    let dir = tempfile::tempdir().unwrap();
    write_bundle_files(&bundle, dir.path()).unwrap();
    let big_fx = CliFixture {
        root: dir.path().to_path_buf(),
        _dir: dir,
        reference: base_fx.reference.clone(),
        garment: "tshirt",
    };
    let big_out = out_dir.path().join("big");
    let mut args = vec!["build".to_string()];
    args.extend(common_args(&big_fx, &big_out));
    let output = run_cli(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );

    let (base_w, base_h) = obj_extents(&base_out.join("model.obj"));
    let (big_w, big_h) = obj_extents(&big_out.join("model.obj"));
    assert!(big_w > base_w * 1.05, "width {base_w} -> {big_w}");
    assert!(big_h > base_h * 1.05, "height {base_h} -> {big_h}");
    pass(8, "monotone size response");
}
