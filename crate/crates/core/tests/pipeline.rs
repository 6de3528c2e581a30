use imfkit_core::synth::{self, Curve, PairParams};
use imfkit_core::table::{load_tables, save_tables, TableFormat};
use imfkit_core::{apply_imf, compose_imf, decode_image, encode_png, psnr, simulate_overlap, ImfTable, Method};

fn pair(seed: u64, curve: Curve, noise: f64) -> synth::SynthPair {
    let p = PairParams { width: 128, height: 128, channels: 3, noise };
    synth::exposure_pair(&mut synth::rng(seed), curve, &p)
}

#[test]
fn tables_survive_disk_round_trip_in_both_formats() {
    let p = pair(1, Curve::Sigmoid { gain: 6.0 }, 1.0);
    let dir = tempfile::tempdir().unwrap();
    for (m, format) in [(Method::Wha, TableFormat::Csv), (Method::Chm, TableFormat::Json), (Method::Gc, TableFormat::Csv)] {
        let raw = m.estimate(&p.a, &p.b).unwrap();
        let out = dir.path().join(format!("{m}"));
        save_tables(&raw, &out, format).unwrap();
        let back = load_tables(&out).unwrap();
        assert_eq!(back, raw, "{m}");
    }
}

#[test]
fn estimate_apply_round_trip_through_png() {
    let p = pair(2, Curve::Gamma { gamma: 0.5 }, 1.0);
    let dir = tempfile::tempdir().unwrap();
    let (a_path, b_path) = (dir.path().join("a.png"), dir.path().join("b.png"));
    encode_png(&p.a, &a_path).unwrap();
    encode_png(&p.b, &b_path).unwrap();
    let (a, b) = (decode_image(&a_path).unwrap(), decode_image(&b_path).unwrap());
    assert_eq!(a, p.a);
    let (ca, cb) = simulate_overlap(&a, &b, 8).unwrap();
    let tables = Method::Wha.estimate_total(&ca, &cb).unwrap();
    assert!(tables.iter().all(|t| t.is_total() && t.is_non_decreasing()));
    let mapped = apply_imf(&a, &tables).unwrap();
    assert!(psnr(&mapped, &b).unwrap() > 35.0);
    assert!(psnr(&a, &b).unwrap() < 25.0);
}

#[test]
fn chained_tables_track_the_composed_curve() {
    let p1 = pair(3, Curve::Gamma { gamma: 0.7 }, 0.0);
    let second = Curve::Gamma { gamma: 0.8 };
    let c = second.apply(&p1.b);
    let ab = Method::Wha.estimate_total(&p1.a, &p1.b).unwrap();
    let bc = Method::Wha.estimate_total(&p1.b, &c).unwrap();
    let direct = Method::Wha.estimate_total(&p1.a, &c).unwrap();
    for ch in 0..3 {
        let chained: ImfTable = compose_imf(&bc[ch], &ab[ch]).unwrap();
        let worst = chained.max_abs_diff(&direct[ch]).unwrap();
        assert!(worst <= 2.0, "channel {ch}: {worst}");
    }
}
