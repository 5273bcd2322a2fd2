//! Acceptance suite. Prints one line per criterion and exits nonzero if any fails.
//!
//! Run with `cargo test -p thresh-cli --test acceptance`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::result::Result;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use http_body_util::BodyExt;
use rand::Rng;
use serde_json::Value;
use tower::ServiceExt;

use thresh_core::io::{decode_image, read_pgm, write_pgm, PgmEncoding};
use thresh_core::*;
use thresh_oracles as oracle;
use thresh_service::{router, ServiceConfig, PGM_MIME};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure!(elapsed < limit, "{what} took {elapsed:?}, limit {limit:?}");
    Ok(())
}

/// HDT equals a direct-partition brute force on 1,000 mixture histograms.
fn hdt_oracle_equivalence() -> Outcome {
    const REL_TOL: f64 = 1e-6;
    let start = Instant::now();
    let mut rng = oracle::rng(0x4844_5401);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let counts = oracle::random_mixture_counts(&mut rng);
        let hist = Histogram::from_counts(counts).map_err(|e| e.to_string())?;
        let got = hdt_threshold(&hist).map_err(|e| e.to_string())?;
        let (t, c) = oracle::brute_force_hdt(&counts);
        ensure!(got.t == t, "case {case}: t {} vs oracle {t}", got.t);
        let crit = got.criterion.unwrap();
        let rel = (crit - c).abs() / c.abs().max(f64::MIN_POSITIVE);
        let rel = if crit == c { 0.0 } else { rel };
        worst = worst.max(rel);
        ensure!(rel <= REL_TOL, "case {case}: criterion {crit} vs {c} (rel {rel:e})");
    }
    within(start.elapsed(), Duration::from_secs(10), "1000 histograms")?;
    Ok(format!("worst rel err {worst:.1e} <= {REL_TOL:e}, {:?}", start.elapsed()))
}

/// P-tile defining property on 1,000 images × 7 ratios.
fn ptile_defining_property() -> Outcome {
    let start = Instant::now();
    let mut rng = oracle::rng(0x5054_494c);
    let ratios = [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99];
    for case in 0..1000 {
        let (w, h) = (rng.random_range(1..=40), rng.random_range(1..=40));
        let img = if case % 2 == 0 {
            oracle::random_image(&mut rng, w, h)
        } else {
            oracle::random_blobby_image(&mut rng, w, h)
        };
        let hist = compute_histogram(&img);
        for p in ratios {
            let t = ptile_threshold(&hist, p).map_err(|e| e.to_string())?.t;
            let above = oracle::fraction_above(img.pixels(), i32::from(t));
            ensure!(above <= p, "case {case} p={p}: above({t}) = {above}");
            if t > 0 {
                let prev = oracle::fraction_above(img.pixels(), i32::from(t) - 1);
                ensure!(prev > p, "case {case} p={p}: above({}) = {prev} not > p", t - 1);
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(5), "7000 ptile checks")?;
    Ok(format!("7000 (image, p) pairs, {:?}", start.elapsed()))
}

/// Binarization equals a naive loop; foreground sets nest as t ascends.
fn binarization_conformance() -> Outcome {
    let mut rng = oracle::rng(0x4551_3202);
    for case in 0..200 {
        let (w, h) = (rng.random_range(1..=48), rng.random_range(1..=48));
        let img = oracle::random_image(&mut rng, w, h);
        let t: u8 = rng.random();
        let mask = apply_threshold(&img, t);
        ensure!(
            mask.mask() == oracle::naive_binarize(img.pixels(), t).as_slice(),
            "case {case}: mask differs from naive loop at t={t}"
        );
    }
    for case in 0..20 {
        let img = oracle::random_blobby_image(&mut rng, 32, 24);
        let mut prev = apply_threshold(&img, 0);
        for t in 1..=255u8 {
            let next = apply_threshold(&img, t);
            ensure!(
                next.mask().iter().zip(prev.mask()).all(|(n, p)| n <= p),
                "image {case}: foreground at t={t} not contained in t={}",
                t - 1
            );
            prev = next;
        }
        ensure!(prev.count_ones() == 0, "image {case}: t=255 mask not empty");
    }
    Ok("200 exact pairs, 20 nested sweeps 0..=255".into())
}

/// Mean threshold equals the big-integer floor of the mean.
fn mean_exactness() -> Outcome {
    let mut rng = oracle::rng(0x4d45_414e);
    for case in 0..500 {
        let (w, h) = (rng.random_range(1..=64), rng.random_range(1..=64));
        let img = oracle::random_image(&mut rng, w, h);
        let got = mean_threshold(&compute_histogram(&img)).map_err(|e| e.to_string())?.t;
        let want = oracle::bigint_mean_floor(img.pixels());
        ensure!(got == want, "case {case}: {got} vs {want}");
    }
    let checker = GrayImage::from_fn(16, 16, |x, y| if (x + y) % 2 == 0 { 0 } else { 255 }).unwrap();
    let t = mean_threshold(&compute_histogram(&checker)).unwrap().t;
    ensure!(t == 127, "checkerboard gave {t}");
    Ok("500 images exact, checkerboard t=127".into())
}

/// Kirsch edge map: zeros on flat input, 3825 at a full step, rot90 equivariance.
fn kirsch_oracle() -> Outcome {
    for (w, h, v) in [(1, 1, 0), (7, 3, 128), (16, 16, 255)] {
        let e = kirsch_edges(&GrayImage::filled(w, h, v).unwrap());
        ensure!(e.magnitudes().iter().all(|&m| m == 0), "constant {w}x{h}@{v} not all zero");
    }
    let step = GrayImage::from_fn(8, 6, |x, _| if x < 4 { 0 } else { 255 }).unwrap();
    let e = kirsch_edges(&step);
    let direct = oracle::direct_kirsch(&step);
    ensure!(e.magnitudes() == direct.as_slice(), "step map differs from direct convolution");
    for y in 1..5 {
        ensure!(e.get(3, y) == 3825, "boundary ({}, {y}) = {}", 3, e.get(3, y));
        ensure!(direct[y * 8 + 3] == 3825, "oracle boundary ({}, {y}) = {}", 3, direct[y * 8 + 3]);
    }
    let mut rng = oracle::rng(0x4b49_5253);
    for case in 0..50 {
        let side = rng.random_range(3..=24);
        let img = oracle::random_image(&mut rng, side, side);
        let rotated = GrayImage::new(side, side, oracle::rot90(img.pixels(), side, side)).unwrap();
        let lhs = oracle::interior(kirsch_edges(&rotated).magnitudes(), side, side);
        let rhs = oracle::interior(&oracle::rot90(kirsch_edges(&img).magnitudes(), side, side), side, side);
        ensure!(lhs == rhs, "case {case}: rot90 interior mismatch ({side}x{side})");
    }
    Ok("flat=0, step=3825, 50 rot90 cases exact".into())
}

/// EMT on the half/half synthetic labels exactly the right half; flat input errors.
fn emt_synthetic() -> Outcome {
    let img = GrayImage::from_fn(8, 8, |x, _| if x < 4 { 0 } else { 200 }).unwrap();
    let r = emt_threshold(&img, 0.9).map_err(|e| e.to_string())?;
    let mask = apply_threshold(&img, r.t);
    let right_half: Vec<u8> = (0..64).map(|i| u8::from(i % 8 >= 4)).collect();
    ensure!(mask.mask() == right_half.as_slice(), "mask at t={} is not the right half", r.t);
    for _ in 0..10 {
        ensure!(emt_threshold(&img, 0.9).as_ref() == Ok(&r), "emt result changed between runs");
    }
    let flat = emt_threshold(&GrayImage::filled(8, 8, 77).unwrap(), 0.9);
    ensure!(flat == Err(Error::NoEdges), "constant image gave {flat:?}");
    Ok(format!("t={}, right-half mask, constant -> no edges", r.t))
}

/// Adding c shifts mean/ptile/hdt by exactly c and leaves masks unchanged.
fn shift_equivariance() -> Outcome {
    let mut rng = oracle::rng(0x5348_4946);
    for case in 0..100 {
        let (w, h) = (rng.random_range(1..=40), rng.random_range(1..=40));
        let img = oracle::random_image_in(&mut rng, w, h, 0, 205);
        let h0 = compute_histogram(&img);
        for c in [1u8, 10, 50] {
            let shifted = GrayImage::new(w, h, img.pixels().iter().map(|&v| v + c).collect()).unwrap();
            let h1 = compute_histogram(&shifted);
            for spec in [MethodSpec::Mean, MethodSpec::Ptile { p: 0.25 }, MethodSpec::Hdt] {
                let a = select_threshold_with_histogram(&img, &h0, spec).map_err(|e| e.to_string())?;
                let b = select_threshold_with_histogram(&shifted, &h1, spec).map_err(|e| e.to_string())?;
                ensure!(
                    u16::from(a.t) + u16::from(c) == u16::from(b.t),
                    "case {case} {} c={c}: {} -> {}",
                    spec.method(),
                    a.t,
                    b.t
                );
                ensure!(
                    apply_threshold(&img, a.t) == apply_threshold(&shifted, b.t),
                    "case {case} {} c={c}: masks differ",
                    spec.method()
                );
            }
        }
    }
    Ok("100 images x c in {1,10,50} x {mean,ptile,hdt}".into())
}

/// P5 round-trips are bit-exact; P2 and P5 parse to the same image.
fn pgm_round_trip() -> Outcome {
    let mut rng = oracle::rng(0x5047_4d35);
    for case in 0..200 {
        let (w, h) = (rng.random_range(1..=64), rng.random_range(1..=64));
        let img = oracle::random_image(&mut rng, w, h);
        let p5 = write_pgm(&img, PgmEncoding::Binary);
        let back = read_pgm(&p5).map_err(|e| e.to_string())?;
        ensure!(back == img, "case {case}: P5 decode differs");
        ensure!(write_pgm(&back, PgmEncoding::Binary) == p5, "case {case}: P5 re-encode differs");
        let p2 = read_pgm(&write_pgm(&img, PgmEncoding::Ascii)).map_err(|e| e.to_string())?;
        ensure!(p2 == back, "case {case}: P2 and P5 parse differently");
    }
    Ok("200 images bit-exact".into())
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_thresh")
}

fn run_compare(inputs: &[PathBuf], ts: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(bin());
    cmd.arg("compare").arg("-o").arg(out);
    for i in inputs {
        cmd.arg("-i").arg(i);
    }
    for t in ts {
        cmd.args(["--t", t]);
    }
    let o = cmd.output().map_err(|e| e.to_string())?;
    ensure!(o.status.success(), "compare exited {:?}: {}", o.status, String::from_utf8_lossy(&o.stderr));
    Ok(o.stdout)
}

fn strip_timing(report: &[u8]) -> Result<Value, String> {
    let mut v: Value = serde_json::from_slice(report).map_err(|e| e.to_string())?;
    for e in v.as_array_mut().ok_or("report is not an array")? {
        e.as_object_mut().ok_or("entry is not an object")?.remove("elapsed_micros");
    }
    Ok(v)
}

fn mask_files(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|x| x == "pgm") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            files.insert(name, std::fs::read(&path).map_err(|e| e.to_string())?);
        }
    }
    Ok(files)
}

/// `compare` over three synthetics with manual t = 127, 167, 43.
fn cli_compare() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = oracle::rng(0x434d_5052);
    let inputs: Vec<PathBuf> = ["scene1", "scene2", "scene3"]
        .iter()
        .map(|name| {
            let img = oracle::random_blobby_image(&mut rng, 64, 48);
            let p = dir.path().join(format!("{name}.pgm"));
            std::fs::write(&p, write_pgm(&img, PgmEncoding::Binary)).unwrap();
            p
        })
        .collect();
    let manual = ["127", "167", "43"];
    let (out_a, out_b) = (dir.path().join("a"), dir.path().join("b"));
    let report_a = run_compare(&inputs, &manual, &out_a)?;
    let report_b = run_compare(&inputs, &manual, &out_b)?;

    let masks_a = mask_files(&out_a)?;
    ensure!(masks_a.len() == 15, "expected 15 masks, found {}", masks_a.len());
    for (name, bytes) in &masks_a {
        let img = read_pgm(bytes).map_err(|e| format!("{name}: {e}"))?;
        ensure!(img.pixels().iter().all(|&v| v == 0 || v == 255), "{name} is not 0/255");
    }
    for stem in ["scene1", "scene2", "scene3"] {
        for m in Method::ALL {
            ensure!(masks_a.contains_key(&format!("{stem}.{m}.pgm")), "missing {stem}.{m}.pgm");
        }
    }

    let file_report = std::fs::read(out_a.join("report.json")).map_err(|e| e.to_string())?;
    ensure!(file_report == report_a.trim_ascii_end(), "stdout report differs from report.json");
    let parsed: Vec<thresh_core::io::ReportEntry> =
        serde_json::from_slice(&file_report).map_err(|e| format!("report schema: {e}"))?;
    ensure!(parsed.len() == 15, "report has {} entries", parsed.len());
    let raw: Value = serde_json::from_slice(&file_report).unwrap();
    let expected_keys = ["criterion", "elapsed_micros", "foreground_fraction", "image_id", "method", "t"];
    for e in raw.as_array().unwrap() {
        let mut keys: Vec<&str> = e.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        ensure!(keys == expected_keys, "entry keys {keys:?}");
        let frac = e["foreground_fraction"].as_f64().unwrap();
        ensure!((0.0..=1.0).contains(&frac), "fraction {frac} outside [0, 1]");
    }
    for (stem, t) in ["scene1", "scene2", "scene3"].iter().zip([127u8, 167, 43]) {
        let e = parsed
            .iter()
            .find(|e| e.image_id == *stem && e.method == Method::Manual)
            .ok_or(format!("no manual entry for {stem}"))?;
        ensure!(e.t == Some(t), "{stem}: manual t {:?}, expected {t}", e.t);
    }

    ensure!(masks_a == mask_files(&out_b)?, "masks differ between runs");
    ensure!(strip_timing(&report_a)? == strip_timing(&report_b)?, "reports differ between runs");
    let dis_a = std::fs::read(out_a.join("disagreement.json")).map_err(|e| e.to_string())?;
    let dis_b = std::fs::read(out_b.join("disagreement.json")).map_err(|e| e.to_string())?;
    ensure!(dis_a == dis_b, "disagreement matrices differ between runs");

    // 512×512, all five methods, end to end through the binary.
    let big = oracle::random_blobby_image(&mut rng, 512, 512);
    let big_path = dir.path().join("big.pgm");
    std::fs::write(&big_path, write_pgm(&big, PgmEncoding::Binary)).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let report = run_compare(&[big_path], &["127"], &dir.path().join("big"))?;
    let elapsed = start.elapsed();
    let entries = strip_timing(&report)?;
    ensure!(entries.as_array().unwrap().len() == 5, "512x512 run produced {} entries", entries);
    ensure!(
        entries.as_array().unwrap().iter().all(|e| e.get("error").is_none()),
        "a method failed on 512x512"
    );
    within(elapsed, Duration::from_secs(1), "512x512 compare")?;
    Ok(format!("15 masks, deterministic, 512x512 in {elapsed:?}"))
}

async fn call(app: &axum::Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn service_equivalence_async() -> Outcome {
    let app = router(&ServiceConfig::default());
    let mut rng = oracle::rng(0x5345_5256);
    let mut checks = 0;
    for case in 0..20 {
        let (w, h) = (rng.random_range(2..=48), rng.random_range(2..=48));
        let img = if case % 2 == 0 {
            oracle::random_blobby_image(&mut rng, w, h)
        } else {
            oracle::random_image(&mut rng, w, h)
        };
        let upload = Request::post("/api/images")
            .body(Body::from(write_pgm(&img, PgmEncoding::Binary)))
            .unwrap();
        let (status, body) = call(&app, upload).await;
        ensure!(status == StatusCode::CREATED, "case {case}: upload {status}");
        let v: Value = serde_json::from_slice(&body).unwrap();
        let id = v["id"].as_str().unwrap().to_owned();

        let (_, body) = call(&app, Request::get(format!("/api/images/{id}/histogram")).body(Body::empty()).unwrap()).await;
        ensure!(
            body == serde_json::to_vec(&compute_histogram(&img)).unwrap(),
            "case {case}: histogram payload differs"
        );

        let queries = [
            ("method=mean", MethodSpec::Mean),
            ("method=hdt", MethodSpec::Hdt),
            ("method=ptile", MethodSpec::Ptile { p: DEFAULT_P }),
            ("method=ptile&p=0.1", MethodSpec::Ptile { p: 0.1 }),
            ("method=ptile&p=0.85", MethodSpec::Ptile { p: 0.85 }),
            ("method=emt", MethodSpec::Emt { edge_percentile: DEFAULT_EDGE_PERCENTILE }),
            ("method=emt&edge_percentile=0.5", MethodSpec::Emt { edge_percentile: 0.5 }),
        ];
        for (q, spec) in queries {
            let uri = format!("/api/images/{id}/threshold?{q}");
            let (status, body) = call(&app, Request::get(&uri).body(Body::empty()).unwrap()).await;
            match select_threshold(&img, spec) {
                Ok(lib) => {
                    ensure!(status == StatusCode::OK, "case {case} {q}: status {status}");
                    let served: ThresholdResult = serde_json::from_slice(&body).map_err(|e| e.to_string())?;
                    ensure!(served == lib, "case {case} {q}: {served:?} vs {lib:?}");
                }
                Err(Error::NoEdges) => ensure!(status == StatusCode::CONFLICT, "case {case} {q}: {status}"),
                Err(e) => return Err(format!("case {case} {q}: library error {e}")),
            }
            checks += 1;
        }

        for t in [0u8, 43, 127, 167, 255, rng.random()] {
            let lib = apply_threshold(&img, t);
            let uri = format!("/api/images/{id}/binary?t={t}");
            let (status, png) = call(&app, Request::get(&uri).body(Body::empty()).unwrap()).await;
            ensure!(status == StatusCode::OK, "case {case} t={t}: {status}");
            let decoded = decode_image(&png).map_err(|e| e.to_string())?;
            ensure!(decoded == lib.to_gray(), "case {case} t={t}: PNG preview differs");
            let req = Request::get(&uri).header(header::ACCEPT, PGM_MIME).body(Body::empty()).unwrap();
            let (_, pgm) = call(&app, req).await;
            ensure!(pgm == write_pgm(&lib, PgmEncoding::Binary), "case {case} t={t}: PGM differs");
            checks += 2;
        }
    }
    Ok(format!("20 images, {checks} responses identical to library calls"))
}

fn service_equivalence() -> Outcome {
    tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?
        .block_on(service_equivalence_async())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("hdt-oracle-equivalence", hdt_oracle_equivalence),
        ("ptile-defining-property", ptile_defining_property),
        ("binarization-conformance", binarization_conformance),
        ("mean-exactness", mean_exactness),
        ("kirsch-oracle", kirsch_oracle),
        ("emt-synthetic", emt_synthetic),
        ("shift-equivariance", shift_equivariance),
        ("pgm-round-trip", pgm_round_trip),
        ("cli-compare", cli_compare),
        ("service-library-equivalence", service_equivalence),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason} ({:?})", start.elapsed());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
